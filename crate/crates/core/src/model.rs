//! The coupled system: component descriptions, candidate solutions, the
//! non-local functionals, and the fixed-point map u ↦ I(u) + D(u) whose
//! fixed points solve the Dirichlet system.
//!
//! A candidate solution stores interior node values per component plus one
//! exterior coefficient b_i per component, with u_i = b_i ζ_i outside the
//! ball. Every admissible boundary operator forces solutions into exactly
//! that form, and the ansatz makes the limsup-at-infinity functional exact
//! instead of truncated.

use ndarray::{Array1, Array2};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::expr::ScalarExpr;
use crate::geometry::{build_grid, BallDomain, QuadratureGrid};
use crate::green::{
    apply, assemble, solve_nonhomogeneous, spectral_radius, DiscreteGreenOperator, EigenPair,
};
use crate::interval::Interval;
use crate::kernel::{ExteriorData, FracOrder, QuadControl};

/// Non-local functionals of the whole solution vector: the weights P_i in
/// the equations and the boundary functionals B_i.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum FunctionalSpec {
    /// ∫_Ω exp(u_j) dx
    IntegralOfExpOf { component: usize },
    /// ∫_Ω g(u_1, …, u_m) dx for an expression g in z only.
    Integral { expr: ScalarExpr },
    /// osc_Ω(u_j) = max − min over the domain.
    Oscillation { component: usize },
    /// Π u_j(p) over a list of (component, interior point) pairs.
    PointProduct { factors: Vec<PointFactor> },
    /// limsup_{|x|→∞} u_j(x), exact under the exterior ansatz.
    LimSupAtInfinity { component: usize },
    Constant { value: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PointFactor {
    pub component: usize,
    pub point: Vec<f64>,
}

impl FunctionalSpec {
    fn validate(&self, m: usize, domain: &BallDomain, as_boundary: bool) -> Result<()> {
        let check_component = |j: usize| {
            if j >= 1 && j <= m {
                Ok(())
            } else {
                Err(Error::InvalidSpec(format!(
                    "functional references component {j}, system has {m}"
                )))
            }
        };
        match self {
            FunctionalSpec::IntegralOfExpOf { component }
            | FunctionalSpec::Oscillation { component }
            | FunctionalSpec::LimSupAtInfinity { component } => check_component(*component),
            FunctionalSpec::Integral { expr } => {
                expr.validate(m)?;
                if expr.uses_w() {
                    Err(Error::InvalidSpec(
                        "integral functionals may not reference the functional value w".into(),
                    ))
                } else {
                    Ok(())
                }
            }
            FunctionalSpec::PointProduct { factors } => {
                if factors.is_empty() {
                    return Err(Error::InvalidSpec("point product needs factors".into()));
                }
                for f in factors {
                    check_component(f.component)?;
                    if f.point.len() != domain.dim() {
                        return Err(Error::InvalidSpec(format!(
                            "point has dimension {}, domain has {}",
                            f.point.len(),
                            domain.dim()
                        )));
                    }
                    if !domain.contains(&f.point) {
                        return Err(Error::InvalidSpec(
                            "point-product points must lie inside the open ball".into(),
                        ));
                    }
                }
                Ok(())
            }
            FunctionalSpec::Constant { value } => {
                if as_boundary && *value < 0.0 {
                    Err(Error::InvalidSpec(
                        "boundary functionals must be nonnegative".into(),
                    ))
                } else if value.is_finite() {
                    Ok(())
                } else {
                    Err(Error::InvalidSpec("constant functional must be finite".into()))
                }
            }
        }
    }
}

/// One equation of the system.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComponentSpec {
    pub s: FracOrder,
    pub lambda: f64,
    pub eta: f64,
    /// Nonlinearity f_i(z, w).
    pub f: ScalarExpr,
    /// Functional weight P_i entering the equation.
    #[serde(rename = "P")]
    pub weight: FunctionalSpec,
    /// Boundary functional B_i entering the exterior condition.
    #[serde(rename = "B")]
    pub boundary: FunctionalSpec,
    /// Exterior profile ζ_i.
    pub zeta: ExteriorData,
}

/// Full description of the m-component system on one ball.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SystemSpec {
    pub m: usize,
    pub domain: BallDomain,
    pub resolution: usize,
    pub components: Vec<ComponentSpec>,
}

impl SystemSpec {
    pub fn validate(&self) -> Result<()> {
        if self.m == 0 || self.m != self.components.len() {
            return Err(Error::InvalidSpec(format!(
                "m = {} does not match {} components",
                self.m,
                self.components.len()
            )));
        }
        if self.resolution < 4 {
            return Err(Error::InvalidSpec(format!(
                "resolution must be >= 4, got {}",
                self.resolution
            )));
        }
        BallDomain::new(self.domain.dim(), self.domain.radius())?;
        for (idx, comp) in self.components.iter().enumerate() {
            if !(comp.lambda >= 0.0) || !(comp.eta >= 0.0) {
                return Err(Error::InvalidSpec(format!(
                    "component {} has negative parameters (lambda = {}, eta = {})",
                    idx + 1,
                    comp.lambda,
                    comp.eta
                )));
            }
            comp.f.validate(self.m)?;
            comp.weight.validate(self.m, &self.domain, false)?;
            comp.boundary.validate(self.m, &self.domain, true)?;
            comp.zeta.validate()?;
        }
        Ok(())
    }

    /// Canonical JSON form; `parse ∘ to_json` is the identity on it.
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("spec serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let spec: SystemSpec = serde_json::from_str(text)
            .map_err(|e| Error::InvalidSpec(format!("JSON parse error: {e}")))?;
        spec.validate()?;
        Ok(spec)
    }
}

/// Box of componentwise bounds defining the truncated cone.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoxBounds {
    pub rho: Vec<f64>,
}

impl BoxBounds {
    pub fn new(rho: Vec<f64>) -> Result<Self> {
        if rho.is_empty() || rho.iter().any(|r| !(*r > 0.0)) {
            return Err(Error::InvalidParameter(
                "box bounds must be positive".into(),
            ));
        }
        Ok(Self { rho })
    }

    pub fn intervals(&self) -> Vec<Interval> {
        self.rho.iter().map(|&r| Interval::new(0.0, r)).collect()
    }
}

/// Candidate solution: interior node values per component and one exterior
/// coefficient per component (u_i = b_i ζ_i outside the ball).
#[derive(Debug, Clone, PartialEq)]
pub struct State {
    interior: Array2<f64>,
    exterior_coeff: Array1<f64>,
}

impl State {
    pub fn zeros(m: usize, n: usize) -> Self {
        Self {
            interior: Array2::zeros((m, n)),
            exterior_coeff: Array1::zeros(m),
        }
    }

    pub fn new(interior: Array2<f64>, exterior_coeff: Array1<f64>) -> Result<Self> {
        if interior.nrows() != exterior_coeff.len() {
            return Err(Error::DimensionMismatch {
                expected: interior.nrows(),
                got: exterior_coeff.len(),
            });
        }
        Ok(Self {
            interior,
            exterior_coeff,
        })
    }

    pub fn components(&self) -> usize {
        self.interior.nrows()
    }

    pub fn nodes(&self) -> usize {
        self.interior.ncols()
    }

    pub fn interior(&self) -> &Array2<f64> {
        &self.interior
    }

    pub fn interior_mut(&mut self) -> &mut Array2<f64> {
        &mut self.interior
    }

    pub fn exterior_coeff(&self) -> &Array1<f64> {
        &self.exterior_coeff
    }

    pub fn exterior_coeff_mut(&mut self) -> &mut Array1<f64> {
        &mut self.exterior_coeff
    }

    /// Componentwise nonnegativity everywhere (interior values and
    /// exterior coefficients), within `tol` below zero.
    pub fn in_cone(&self, tol: f64) -> bool {
        self.interior.iter().all(|&v| v >= -tol)
            && self.exterior_coeff.iter().all(|&v| v >= -tol)
    }

    /// Membership in the truncated cone: nonnegative and componentwise
    /// below the box bounds everywhere (the exterior sup is b_i sup ζ_i).
    pub fn in_box(&self, bounds: &BoxBounds, sys: &SystemSpec, tol: f64) -> bool {
        if !self.in_cone(tol) {
            return false;
        }
        (0..self.components()).all(|i| {
            let cap = bounds.rho[i] + tol;
            self.interior.row(i).iter().all(|&v| v <= cap)
                && self.exterior_coeff[i] * sys.components[i].zeta.sup_global() <= cap
        })
    }

    /// Sup over R^n of |u_i|: interior node max joined with the exterior
    /// coefficient against sup ζ_i.
    pub fn component_sup(&self, i: usize, sys: &SystemSpec) -> f64 {
        let interior = self
            .interior
            .row(i)
            .iter()
            .fold(0.0f64, |m, &v| m.max(v.abs()));
        let exterior = self.exterior_coeff[i].abs() * sys.components[i].zeta.sup_global();
        interior.max(exterior)
    }

    /// Sup norm of the full vector state.
    pub fn sup_norm(&self, sys: &SystemSpec) -> f64 {
        (0..self.components())
            .map(|i| self.component_sup(i, sys))
            .fold(0.0, f64::max)
    }

    /// Sup distance to another state (interior values and coefficients).
    pub fn sup_distance(&self, other: &State) -> f64 {
        let mut d = 0.0f64;
        for (a, b) in self.interior.iter().zip(other.interior.iter()) {
            d = d.max((a - b).abs());
        }
        for (a, b) in self
            .exterior_coeff
            .iter()
            .zip(other.exterior_coeff.iter())
        {
            d = d.max((a - b).abs());
        }
        d
    }
}

/// Assembled numerical machinery for one system: shared grid, one Green
/// operator per order, harmonic lifts of the exterior profiles, and the
/// principal eigenpairs.
#[derive(Debug, Clone)]
pub struct SystemOperators {
    grid: QuadratureGrid,
    ops: Vec<DiscreteGreenOperator>,
    lifts: Vec<Array1<f64>>,
    lift_sup: Vec<f64>,
    eigen: Vec<EigenPair>,
}

impl SystemOperators {
    /// Assemble everything the fixed-point map and the certificates need.
    pub fn build(sys: &SystemSpec, ctrl: &QuadControl) -> Result<Self> {
        sys.validate()?;
        let grid = build_grid(&sys.domain, sys.resolution)?;
        let mut ops = Vec::with_capacity(sys.m);
        let mut lifts = Vec::with_capacity(sys.m);
        let mut lift_sup = Vec::with_capacity(sys.m);
        let mut eigen = Vec::with_capacity(sys.m);
        let zero = Array1::zeros(grid.len());
        for comp in &sys.components {
            let op = assemble(&grid, &sys.domain, comp.s)?;
            let lift = solve_nonhomogeneous(&op, &zero, &comp.zeta, ctrl)?;
            let interior_max = lift.interior.iter().fold(0.0f64, |m, &v| m.max(v.abs()));
            lift_sup.push(interior_max.max(comp.zeta.sup_outside(sys.domain.radius())));
            lifts.push(lift.interior);
            eigen.push(spectral_radius(&op, 1e-10, 100_000)?);
            ops.push(op);
        }
        Ok(Self {
            grid,
            ops,
            lifts,
            lift_sup,
            eigen,
        })
    }

    pub fn grid(&self) -> &QuadratureGrid {
        &self.grid
    }

    pub fn operator(&self, i: usize) -> &DiscreteGreenOperator {
        &self.ops[i]
    }

    /// Harmonic lift γ_i on the nodes.
    pub fn lift(&self, i: usize) -> &Array1<f64> {
        &self.lifts[i]
    }

    /// ‖γ_i‖_∞ over all of R^n.
    pub fn lift_sup(&self, i: usize) -> f64 {
        self.lift_sup[i]
    }

    pub fn eigenpair(&self, i: usize) -> &EigenPair {
        &self.eigen[i]
    }

    pub fn zero_state(&self, sys: &SystemSpec) -> State {
        State::zeros(sys.m, self.grid.len())
    }
}

/// Evaluate a functional of the whole state.
pub fn eval_functional(
    spec: &FunctionalSpec,
    state: &State,
    sys: &SystemSpec,
    grid: &QuadratureGrid,
) -> Result<f64> {
    match spec {
        FunctionalSpec::IntegralOfExpOf { component } => {
            let row = state.interior().row(component - 1);
            let mut sum = 0.0;
            for (k, &u) in row.iter().enumerate() {
                sum += grid.weights()[k] * u.exp();
            }
            Ok(sum)
        }
        FunctionalSpec::Integral { expr } => {
            let m = state.components();
            let mut z = vec![0.0; m];
            let mut sum = 0.0;
            for k in 0..grid.len() {
                for (i, zi) in z.iter_mut().enumerate() {
                    *zi = state.interior()[[i, k]];
                }
                sum += grid.weights()[k] * expr.eval(&z, 0.0);
            }
            Ok(sum)
        }
        FunctionalSpec::Oscillation { component } => {
            let row = state.interior().row(component - 1);
            let max = row.iter().fold(f64::NEG_INFINITY, |m, &v| m.max(v));
            let min = row.iter().fold(f64::INFINITY, |m, &v| m.min(v));
            Ok(max - min)
        }
        FunctionalSpec::PointProduct { factors } => {
            let mut prod = 1.0;
            for f in factors {
                if !sys.domain.contains(&f.point) {
                    return Err(Error::InvalidParameter(
                        "point-product point lies outside the open ball".into(),
                    ));
                }
                let k = grid.nearest_node(&f.point)?;
                prod *= state.interior()[[f.component - 1, k]];
            }
            Ok(prod)
        }
        FunctionalSpec::LimSupAtInfinity { component } => {
            Ok(state.exterior_coeff()[component - 1]
                * sys.components[component - 1].zeta.limsup_at_infinity())
        }
        FunctionalSpec::Constant { value } => Ok(*value),
    }
}

/// Substitution operator: the vector f_i(u(x_k), P_i[u]) over the nodes.
pub fn nemytskii(
    sys: &SystemSpec,
    i: usize,
    state: &State,
    grid: &QuadratureGrid,
) -> Result<Array1<f64>> {
    let comp = &sys.components[i];
    let w = eval_functional(&comp.weight, state, sys, grid)?;
    let m = state.components();
    let mut z = vec![0.0; m];
    let mut out = Array1::zeros(grid.len());
    for k in 0..grid.len() {
        for (j, zj) in z.iter_mut().enumerate() {
            *zj = state.interior()[[j, k]];
        }
        out[k] = comp.f.eval(&z, w);
    }
    Ok(out)
}

/// One application of the fixed-point map T = I + D:
/// interior_i ← λ_i G_i(F_i(u)) + η_i B_i[u] γ_i, b_i ← η_i B_i[u].
pub fn apply_t(sys: &SystemSpec, state: &State, ops: &SystemOperators) -> Result<State> {
    if state.components() != sys.m || state.nodes() != ops.grid().len() {
        return Err(Error::DimensionMismatch {
            expected: sys.m * ops.grid().len(),
            got: state.components() * state.nodes(),
        });
    }
    let mut interior = Array2::zeros((sys.m, ops.grid().len()));
    let mut coeff = Array1::zeros(sys.m);
    for i in 0..sys.m {
        let comp = &sys.components[i];
        let f = nemytskii(sys, i, state, ops.grid())?;
        let gf = apply(ops.operator(i), &f)?;
        let b = eval_functional(&comp.boundary, state, sys, ops.grid())?;
        let lift = ops.lift(i);
        for k in 0..ops.grid().len() {
            interior[[i, k]] = comp.lambda * gf[k] + comp.eta * b * lift[k];
        }
        coeff[i] = comp.eta * b;
    }
    State::new(interior, coeff)
}

/// Sup-norm defect of the fixed-point equation at `state`, including the
/// exterior-coefficient defect.
pub fn residual(sys: &SystemSpec, state: &State, ops: &SystemOperators) -> Result<f64> {
    let t = apply_t(sys, state, ops)?;
    Ok(state.sup_distance(&t))
}
