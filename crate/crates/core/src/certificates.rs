//! Certified bound data and mechanical hypothesis checking for the
//! existence and non-existence theorems.
//!
//! Sup-bounds come from interval arithmetic (sound over-estimates) and
//! per-variant analytic rules for the functionals; dense sampling is never
//! used in a verdict. Norm constants carry their provenance: analytic
//! closed forms where the ball geometry provides them, discrete operator
//! norms otherwise, and the principal eigenvalue is always discrete, so
//! verdicts are numerical certificates, rigorous modulo the discretization
//! of that one constant.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::green::sup_norm_g1;
use crate::interval::Interval;
use crate::kernel::{torsion_closed_form, ExteriorData};
use crate::model::{BoxBounds, FunctionalSpec, SystemOperators, SystemSpec};

/// Where a constant came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Provenance {
    Analytic,
    Interval,
    NumericDiscrete,
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct TrackedValue {
    pub value: f64,
    pub provenance: Provenance,
}

impl TrackedValue {
    fn analytic(value: f64) -> Self {
        Self {
            value,
            provenance: Provenance::Analytic,
        }
    }

    fn interval(value: f64) -> Self {
        Self {
            value,
            provenance: Provenance::Interval,
        }
    }

    fn discrete(value: f64) -> Self {
        Self {
            value,
            provenance: Provenance::NumericDiscrete,
        }
    }
}

/// Bound data derived from a system over a box of componentwise caps.
#[derive(Debug, Clone)]
pub struct SystemBounds {
    /// Range of each functional weight P_i over the truncated cone.
    pub omega: Vec<(f64, f64)>,
    /// Interval upper bound M_i of f_i over box × omega range.
    pub f_sup: Vec<f64>,
    /// Interval lower bound of f_i over the same region.
    pub f_inf: Vec<f64>,
    /// Upper bound of each boundary functional B_i over the truncated cone.
    pub b_sup: Vec<f64>,
    /// Linear-growth constants: smallest interval-certified tau_i with
    /// f_i <= tau_i z_i, when the literal factor z_i can be peeled off.
    pub tau: Vec<Option<f64>>,
    /// Linear bounds xi_i with |B_i[u]| <= xi_i ||u||_inf, when the
    /// variant admits one.
    pub xi: Vec<Option<f64>>,
}

/// Range of one functional over the truncated cone defined by `bounds`.
fn functional_range(
    spec: &FunctionalSpec,
    bounds: &BoxBounds,
    volume: f64,
) -> (f64, f64) {
    match spec {
        FunctionalSpec::IntegralOfExpOf { component } => {
            (volume, volume * bounds.rho[component - 1].exp())
        }
        FunctionalSpec::Integral { expr } => {
            let z = bounds.intervals();
            let range = expr.eval_interval(&z, Interval::point(0.0));
            (volume * range.lo, volume * range.hi)
        }
        FunctionalSpec::Oscillation { component } => (0.0, bounds.rho[component - 1]),
        FunctionalSpec::PointProduct { factors } => {
            let hi = factors
                .iter()
                .map(|f| bounds.rho[f.component - 1])
                .product();
            (0.0, hi)
        }
        FunctionalSpec::LimSupAtInfinity { component } => (0.0, bounds.rho[component - 1]),
        FunctionalSpec::Constant { value } => (*value, *value),
    }
}

/// Linear bound for a boundary functional relative to the sup norm.
fn functional_linear_bound(spec: &FunctionalSpec, bounds: &BoxBounds) -> Option<f64> {
    match spec {
        // One factor is bounded by ||u||; the rest by their caps. Dropping
        // the largest cap gives the smallest certified constant.
        FunctionalSpec::PointProduct { factors } => {
            let caps: Vec<f64> = factors.iter().map(|f| bounds.rho[f.component - 1]).collect();
            let product: f64 = caps.iter().product();
            let max = caps.iter().cloned().fold(0.0f64, f64::max);
            Some(product / max)
        }
        FunctionalSpec::LimSupAtInfinity { .. } | FunctionalSpec::Oscillation { .. } => Some(1.0),
        FunctionalSpec::Constant { value } if *value == 0.0 => Some(0.0),
        _ => None,
    }
}

/// Compute every bound the theorems consume from a system description
/// and a box.
pub fn bounds_from_spec(sys: &SystemSpec, bounds: &BoxBounds) -> Result<SystemBounds> {
    sys.validate()?;
    if bounds.rho.len() != sys.m {
        return Err(Error::DimensionMismatch {
            expected: sys.m,
            got: bounds.rho.len(),
        });
    }
    let volume = sys.domain.volume();
    let z = bounds.intervals();

    let mut omega = Vec::with_capacity(sys.m);
    let mut f_sup = Vec::with_capacity(sys.m);
    let mut f_inf = Vec::with_capacity(sys.m);
    let mut b_sup = Vec::with_capacity(sys.m);
    let mut tau = Vec::with_capacity(sys.m);
    let mut xi = Vec::with_capacity(sys.m);

    for (i, comp) in sys.components.iter().enumerate() {
        let (w_lo, w_hi) = functional_range(&comp.weight, bounds, volume);
        let w_range = Interval::new(w_lo, w_hi);
        let f_range = comp.f.eval_interval(&z, w_range);
        omega.push((w_lo, w_hi));
        f_sup.push(f_range.hi);
        f_inf.push(f_range.lo);
        b_sup.push(functional_range(&comp.boundary, bounds, volume).1);
        tau.push(
            comp.f
                .factor_out_component(i + 1)
                .map(|g| g.eval_interval(&z, w_range).hi),
        );
        xi.push(functional_linear_bound(&comp.boundary, bounds));
    }

    Ok(SystemBounds {
        omega,
        f_sup,
        f_inf,
        b_sup,
        tau,
        xi,
    })
}

/// Which source the operator norms are drawn from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NormSource {
    /// Closed forms where the ball provides them (the sup of G(1) is the
    /// torsion value at the center; constant exterior data lifts to
    /// itself), discrete values elsewhere.
    PreferAnalytic,
    /// Discrete operator norms throughout.
    DiscreteOnly,
}

fn g1_norms(sys: &SystemSpec, ops: &SystemOperators, source: NormSource) -> Vec<TrackedValue> {
    sys.components
        .iter()
        .enumerate()
        .map(|(i, comp)| match source {
            NormSource::PreferAnalytic => TrackedValue::analytic(torsion_closed_form(
                &vec![0.0; sys.domain.dim()],
                &sys.domain,
                comp.s,
            )),
            NormSource::DiscreteOnly => TrackedValue::discrete(sup_norm_g1(ops.operator(i))),
        })
        .collect()
}

fn gamma_norms(sys: &SystemSpec, ops: &SystemOperators, source: NormSource) -> Vec<TrackedValue> {
    sys.components
        .iter()
        .enumerate()
        .map(|(i, comp)| match (&comp.zeta, source) {
            (ExteriorData::Constant { value }, NormSource::PreferAnalytic) => {
                TrackedValue::analytic(*value)
            }
            _ => TrackedValue::discrete(ops.lift_sup(i)),
        })
        .collect()
}

/// Data for the lower-bound hypothesis on the distinguished component:
/// f_{i0}(z, w) >= delta * z_{i0} on the small box.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct SmallBoxData {
    pub delta: f64,
    pub rho0: f64,
    /// Interval lower bound of f_{i0} over the small box.
    pub f_lower: f64,
}

/// Everything the existence check consumes.
#[derive(Debug, Clone)]
pub struct ExistenceHypotheses {
    pub rho: Vec<f64>,
    pub lambda: Vec<f64>,
    pub eta: Vec<f64>,
    pub omega: Vec<(f64, f64)>,
    pub f_sup: Vec<TrackedValue>,
    pub f_inf: Vec<f64>,
    pub b_sup: Vec<TrackedValue>,
    /// Distinguished component (0-based).
    pub i0: usize,
    pub mu_i0: TrackedValue,
    pub g1_sup: Vec<TrackedValue>,
    pub gamma_sup: Vec<TrackedValue>,
    /// Present when (delta, rho0) could be fixed, by the caller or
    /// automatically.
    pub small_box: Option<SmallBoxData>,
    /// Human-readable notes about unavailable pieces.
    pub notes: Vec<String>,
}

impl ExistenceHypotheses {
    /// Assemble the hypothesis data.
    ///
    /// When `delta_rho0` is `None` the pair is chosen automatically the way
    /// the worked example does: delta = mu_{i0}/lambda_{i0} (making the
    /// eigenvalue inequality tight) and rho0 small enough that the interval
    /// lower bound of f_{i0} on the shrunken box dominates delta * rho0.
    /// That requires a strictly positive lower bound; otherwise the pair
    /// must be supplied.
    pub fn from_system(
        sys: &SystemSpec,
        ops: &SystemOperators,
        bounds: &BoxBounds,
        i0: usize,
        delta_rho0: Option<(f64, f64)>,
        source: NormSource,
    ) -> Result<Self> {
        if i0 >= sys.m {
            return Err(Error::InvalidParameter(format!(
                "distinguished component {i0} out of range (m = {})",
                sys.m
            )));
        }
        let sb = bounds_from_spec(sys, bounds)?;
        let volume = sys.domain.volume();
        let mut notes = Vec::new();

        let small_box = match delta_rho0 {
            Some((delta, rho0)) => {
                let rho_min = bounds.rho.iter().cloned().fold(f64::INFINITY, f64::min);
                if !(delta > 0.0) || !(rho0 > 0.0) || rho0 >= rho_min {
                    return Err(Error::InvalidParameter(format!(
                        "need delta > 0 and 0 < rho0 < min rho, got ({delta}, {rho0})"
                    )));
                }
                Some(SmallBoxData {
                    delta,
                    rho0,
                    f_lower: small_box_lower(sys, i0, rho0, volume),
                })
            }
            None => {
                let lambda_i0 = sys.components[i0].lambda;
                if lambda_i0 > 0.0 {
                    // A hair above the tie value, so the eigenvalue
                    // inequality survives the rounding of delta * lambda.
                    let delta = ops.eigenpair(i0).mu / lambda_i0 * (1.0 + 1e-9);
                    let rho_star =
                        0.5 * bounds.rho.iter().cloned().fold(f64::INFINITY, f64::min);
                    let lower = small_box_lower(sys, i0, rho_star, volume);
                    if lower > 0.0 {
                        // Shrinking the box can only raise the lower bound,
                        // so rho0 = min(rho*, lower/delta) certifies
                        // f_{i0} >= lower >= delta rho0 >= delta z_{i0};
                        // shaved below the tie for the same rounding reason.
                        let rho0 = rho_star.min(lower / delta * (1.0 - 1e-9));
                        Some(SmallBoxData {
                            delta,
                            rho0,
                            f_lower: lower,
                        })
                    } else {
                        notes.push(format!(
                            "auto selection failed: f_{} has no positive interval lower bound \
                             on the shrunken box (got {lower:.3e}); supply (delta, rho0)",
                            i0 + 1
                        ));
                        None
                    }
                } else {
                    notes.push(format!(
                        "lambda_{} = 0: the eigenvalue inequality cannot hold for any delta",
                        i0 + 1
                    ));
                    None
                }
            }
        };

        Ok(Self {
            rho: bounds.rho.clone(),
            lambda: sys.components.iter().map(|c| c.lambda).collect(),
            eta: sys.components.iter().map(|c| c.eta).collect(),
            omega: sb.omega,
            f_sup: sb.f_sup.iter().map(|&v| TrackedValue::interval(v)).collect(),
            f_inf: sb.f_inf,
            b_sup: sb.b_sup.iter().map(|&v| TrackedValue::interval(v)).collect(),
            i0,
            mu_i0: TrackedValue::discrete(ops.eigenpair(i0).mu),
            g1_sup: g1_norms(sys, ops, source),
            gamma_sup: gamma_norms(sys, ops, source),
            small_box,
            notes,
        })
    }
}

/// Interval lower bound of f_{i0} over the box with every cap shrunk to
/// `rho0` and the matching functional range.
fn small_box_lower(sys: &SystemSpec, i0: usize, rho0: f64, volume: f64) -> f64 {
    let small = BoxBounds {
        rho: vec![rho0; sys.m],
    };
    let comp = &sys.components[i0];
    let (w_lo, w_hi) = functional_range(&comp.weight, &small, volume);
    comp.f
        .eval_interval(&small.intervals(), Interval::new(w_lo, w_hi))
        .lo
}

/// Everything the non-existence check consumes.
#[derive(Debug, Clone)]
pub struct NonexistenceHypotheses {
    pub rho: Vec<f64>,
    pub lambda: Vec<f64>,
    pub eta: Vec<f64>,
    pub omega: Vec<(f64, f64)>,
    pub tau: Vec<Option<TrackedValue>>,
    pub xi: Vec<Option<TrackedValue>>,
    pub g1_sup: Vec<TrackedValue>,
    pub gamma_sup: Vec<TrackedValue>,
}

impl NonexistenceHypotheses {
    pub fn from_system(
        sys: &SystemSpec,
        ops: &SystemOperators,
        bounds: &BoxBounds,
        source: NormSource,
    ) -> Result<Self> {
        let sb = bounds_from_spec(sys, bounds)?;
        Ok(Self {
            rho: bounds.rho.clone(),
            lambda: sys.components.iter().map(|c| c.lambda).collect(),
            eta: sys.components.iter().map(|c| c.eta).collect(),
            omega: sb.omega,
            tau: sb
                .tau
                .iter()
                .map(|t| t.map(TrackedValue::interval))
                .collect(),
            xi: sb.xi.iter().map(|x| x.map(TrackedValue::interval)).collect(),
            g1_sup: g1_norms(sys, ops, source),
            gamma_sup: gamma_norms(sys, ops, source),
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Outcome {
    ExistenceCertified,
    NonexistenceCertified,
    Inconclusive,
}

#[derive(Debug, Clone, Serialize)]
pub struct InequalityReport {
    pub name: String,
    pub lhs: f64,
    pub rhs: f64,
    /// rhs − lhs; certification needs >= 0, or > 0 for strict inequalities.
    pub slack: f64,
    pub strict: bool,
    pub satisfied: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct NamedConstant {
    pub name: String,
    pub value: f64,
    pub provenance: Provenance,
}

#[derive(Debug, Clone, Serialize)]
pub struct Verdict {
    pub outcome: Outcome,
    pub inequalities: Vec<InequalityReport>,
    pub constants: Vec<NamedConstant>,
    pub notes: Vec<String>,
}

impl Verdict {
    pub fn min_slack(&self) -> f64 {
        self.inequalities
            .iter()
            .map(|i| i.slack)
            .fold(f64::INFINITY, f64::min)
    }
}

fn push_constant(out: &mut Vec<NamedConstant>, name: String, tv: TrackedValue) {
    out.push(NamedConstant {
        name,
        value: tv.value,
        provenance: tv.provenance,
    });
}

/// Check the existence hypotheses: nonnegativity of the nonlinearities on
/// the box, the lower-bound inequality on the small box, the eigenvalue
/// inequality, and the box-invariance inequality per component.
pub fn check_existence(h: &ExistenceHypotheses) -> Verdict {
    let m = h.rho.len();
    let mut inequalities = Vec::new();
    let mut constants = Vec::new();
    let mut notes = h.notes.clone();

    for i in 0..m {
        push_constant(&mut constants, format!("M_{}", i + 1), h.f_sup[i]);
        push_constant(&mut constants, format!("B_{}", i + 1), h.b_sup[i]);
        push_constant(&mut constants, format!("norm_G1_{}", i + 1), h.g1_sup[i]);
        push_constant(
            &mut constants,
            format!("norm_gamma_{}", i + 1),
            h.gamma_sup[i],
        );
    }
    push_constant(
        &mut constants,
        format!("mu_{}", h.i0 + 1),
        h.mu_i0,
    );

    // Nonnegativity of f_i over the box region.
    for i in 0..m {
        inequalities.push(InequalityReport {
            name: format!("f_{}_nonnegative", i + 1),
            lhs: 0.0,
            rhs: h.f_inf[i],
            slack: h.f_inf[i],
            strict: false,
            satisfied: h.f_inf[i] >= 0.0,
        });
    }

    // Lower bound on the distinguished component and the eigenvalue
    // inequality; both need the (delta, rho0) pair.
    if let Some(sbd) = h.small_box {
        let lhs = sbd.delta * sbd.rho0;
        inequalities.push(InequalityReport {
            name: format!("f_{}_lower_bound", h.i0 + 1),
            lhs,
            rhs: sbd.f_lower,
            slack: sbd.f_lower - lhs,
            strict: false,
            satisfied: sbd.f_lower >= lhs,
        });
        let rhs = sbd.delta * h.lambda[h.i0];
        inequalities.push(InequalityReport {
            name: "eigenvalue_vs_delta_lambda".into(),
            lhs: h.mu_i0.value,
            rhs,
            slack: rhs - h.mu_i0.value,
            strict: false,
            satisfied: h.mu_i0.value <= rhs,
        });
    } else {
        notes.push("no (delta, rho0) pair available; existence cannot be certified".into());
    }

    // Box invariance per component.
    for i in 0..m {
        let lhs = h.lambda[i] * h.f_sup[i].value * h.g1_sup[i].value
            + h.eta[i] * h.b_sup[i].value * h.gamma_sup[i].value;
        inequalities.push(InequalityReport {
            name: format!("box_invariance_{}", i + 1),
            lhs,
            rhs: h.rho[i],
            slack: h.rho[i] - lhs,
            strict: false,
            satisfied: lhs <= h.rho[i],
        });
    }

    let all_ok = h.small_box.is_some() && inequalities.iter().all(|i| i.satisfied);
    Verdict {
        outcome: if all_ok {
            Outcome::ExistenceCertified
        } else {
            Outcome::Inconclusive
        },
        inequalities,
        constants,
        notes,
    }
}

/// Check the non-existence hypotheses: the strict contraction inequality
/// per component, with the linear-growth constants required to exist.
pub fn check_nonexistence(h: &NonexistenceHypotheses) -> Verdict {
    let m = h.rho.len();
    let mut inequalities = Vec::new();
    let mut constants = Vec::new();
    let mut notes = Vec::new();
    let mut available = true;

    for i in 0..m {
        push_constant(&mut constants, format!("norm_G1_{}", i + 1), h.g1_sup[i]);
        push_constant(
            &mut constants,
            format!("norm_gamma_{}", i + 1),
            h.gamma_sup[i],
        );
        match (h.tau[i], h.xi[i]) {
            (Some(tau), Some(xi)) => {
                push_constant(&mut constants, format!("tau_{}", i + 1), tau);
                push_constant(&mut constants, format!("xi_{}", i + 1), xi);
                let lhs = h.lambda[i] * tau.value * h.g1_sup[i].value
                    + h.eta[i] * xi.value * h.gamma_sup[i].value;
                inequalities.push(InequalityReport {
                    name: format!("contraction_{}", i + 1),
                    lhs,
                    rhs: 1.0,
                    slack: 1.0 - lhs,
                    strict: true,
                    satisfied: lhs < 1.0,
                });
            }
            (tau, xi) => {
                available = false;
                if tau.is_none() {
                    notes.push(format!(
                        "no certified linear-growth constant for f_{} (the factor z_{} \
                         is not syntactically present)",
                        i + 1,
                        i + 1
                    ));
                }
                if xi.is_none() {
                    notes.push(format!(
                        "boundary functional {} admits no linear bound in the sup norm",
                        i + 1
                    ));
                }
            }
        }
    }

    let all_ok = available && inequalities.iter().all(|i| i.satisfied);
    Verdict {
        outcome: if all_ok {
            Outcome::NonexistenceCertified
        } else {
            Outcome::Inconclusive
        },
        inequalities,
        constants,
        notes,
    }
}

/// The largest lambda_i for which the box-invariance inequality holds with
/// all other parameters fixed.
pub fn existence_boundary_lambda(h: &ExistenceHypotheses, i: usize) -> Option<f64> {
    let denom = h.f_sup[i].value * h.g1_sup[i].value;
    if denom <= 0.0 {
        return None;
    }
    Some((h.rho[i] - h.eta[i] * h.b_sup[i].value * h.gamma_sup[i].value) / denom)
}

/// The lambda_i at which the strict contraction inequality becomes an
/// equality with all other parameters fixed.
pub fn nonexistence_boundary_lambda(h: &NonexistenceHypotheses, i: usize) -> Option<f64> {
    let tau = h.tau[i]?;
    let xi = h.xi[i]?;
    let denom = tau.value * h.g1_sup[i].value;
    if denom <= 0.0 {
        return None;
    }
    Some((1.0 - h.eta[i] * xi.value * h.gamma_sup[i].value) / denom)
}

/// Which theorem a scan evaluates.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ScanMode {
    Existence,
    Nonexistence,
}

#[derive(Debug, Clone)]
pub struct ScanRow {
    pub lambda: Vec<f64>,
    pub eta: Vec<f64>,
    pub outcome: Outcome,
    pub min_slack: f64,
}

/// Evaluate the verdict over a finite list of parameter points. The bound
/// data and operator norms do not depend on the parameters, so they are
/// computed once and reused; the output order matches the input order.
pub fn feasible_region_scan(
    sys: &SystemSpec,
    ops: &SystemOperators,
    bounds: &BoxBounds,
    points: &[(Vec<f64>, Vec<f64>)],
    mode: ScanMode,
    i0: usize,
    source: NormSource,
) -> Result<Vec<ScanRow>> {
    let mut rows = Vec::with_capacity(points.len());
    for (lambda, eta) in points {
        if lambda.len() != sys.m || eta.len() != sys.m {
            return Err(Error::DimensionMismatch {
                expected: sys.m,
                got: lambda.len().max(eta.len()),
            });
        }
        let mut varied = sys.clone();
        for (i, comp) in varied.components.iter_mut().enumerate() {
            comp.lambda = lambda[i];
            comp.eta = eta[i];
        }
        let verdict = match mode {
            ScanMode::Existence => {
                let h = ExistenceHypotheses::from_system(&varied, ops, bounds, i0, None, source)?;
                check_existence(&h)
            }
            ScanMode::Nonexistence => {
                let h = NonexistenceHypotheses::from_system(&varied, ops, bounds, source)?;
                check_nonexistence(&h)
            }
        };
        rows.push(ScanRow {
            lambda: lambda.clone(),
            eta: eta.clone(),
            outcome: verdict.outcome,
            min_slack: verdict.min_slack(),
        });
    }
    Ok(rows)
}
