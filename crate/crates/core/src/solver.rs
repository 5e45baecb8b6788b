//! Fixed-point solvers for the system map: damped Picard iteration,
//! finite-difference Newton on the residual, multistart search over the
//! truncated cone, and solution verification.
//!
//! The solvers are best-effort: acceptance rests on the verified residual
//! of whatever state they return, never on a convergence theorem.

use ndarray::{Array1, Array2};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::model::{apply_t, nemytskii, residual, BoxBounds, State, SystemOperators, SystemSpec};

/// Default damping of the Picard update.
pub const DEFAULT_DAMPING: f64 = 0.5;
/// Default residual tolerance.
pub const DEFAULT_TOL: f64 = 1e-8;
/// Default iteration budget of the Picard loop.
pub const DEFAULT_MAX_ITER: usize = 2000;
/// Default iteration budget of the Newton loop.
pub const DEFAULT_NEWTON_MAX_ITER: usize = 25;
/// Distinct solutions are separated by more than this sup distance.
pub const DEDUP_DISTANCE: f64 = 1e-4;
/// Sup norms above this count as a non-zero solution.
pub const NONZERO_SUP: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    Picard,
    Newton,
}

impl Method {
    pub fn name(&self) -> &'static str {
        match self {
            Method::Picard => "picard",
            Method::Newton => "newton",
        }
    }
}

#[derive(Debug, Clone)]
pub struct SolveReport {
    pub final_state: State,
    pub residual: f64,
    pub iterations: usize,
    pub converged: bool,
    pub method: Method,
    /// Residual after each evaluation of the map, when recorded.
    pub trajectory: Option<Vec<f64>>,
}

/// Damped Picard iteration u ← (1−θ)u + θT(u) from a cone start.
///
/// The damping is a convex combination, so iterates stay in the cone as
/// long as the map preserves it. Non-convergence is reported in the
/// result, never thrown.
pub fn picard_solve(
    sys: &SystemSpec,
    ops: &SystemOperators,
    init: State,
    damping: f64,
    tol: f64,
    max_iter: usize,
    record_trajectory: bool,
) -> Result<SolveReport> {
    if !(damping > 0.0 && damping <= 1.0) {
        return Err(Error::InvalidParameter(format!(
            "damping must lie in (0, 1], got {damping}"
        )));
    }
    if !(tol > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "tolerance must be positive, got {tol}"
        )));
    }
    if !init.in_cone(0.0) {
        return Err(Error::InvalidParameter(
            "picard iteration requires a nonnegative start".into(),
        ));
    }
    let mut state = init;
    let mut trajectory = record_trajectory.then(Vec::new);
    let mut last_res = f64::INFINITY;
    for it in 1..=max_iter {
        let image = apply_t(sys, &state, ops)?;
        last_res = state.sup_distance(&image);
        if let Some(t) = trajectory.as_mut() {
            t.push(last_res);
        }
        if last_res <= tol {
            return Ok(SolveReport {
                final_state: state,
                residual: last_res,
                iterations: it,
                converged: true,
                method: Method::Picard,
                trajectory,
            });
        }
        let mut next = image;
        next.interior_mut()
            .zip_mut_with(state.interior(), |t, &u| *t = (1.0 - damping) * u + damping * *t);
        next.exterior_coeff_mut()
            .zip_mut_with(state.exterior_coeff(), |t, &u| {
                *t = (1.0 - damping) * u + damping * *t
            });
        state = next;
    }
    Ok(SolveReport {
        final_state: state,
        residual: last_res,
        iterations: max_iter,
        converged: false,
        method: Method::Picard,
        trajectory,
    })
}

fn flatten(state: &State) -> Array1<f64> {
    let m = state.components();
    let n = state.nodes();
    let mut v = Array1::zeros(m * n + m);
    for i in 0..m {
        for k in 0..n {
            v[i * n + k] = state.interior()[[i, k]];
        }
    }
    for i in 0..m {
        v[m * n + i] = state.exterior_coeff()[i];
    }
    v
}

fn unflatten(v: &Array1<f64>, m: usize, n: usize) -> State {
    let mut interior = Array2::zeros((m, n));
    for i in 0..m {
        for k in 0..n {
            interior[[i, k]] = v[i * n + k];
        }
    }
    let coeff = Array1::from_iter((0..m).map(|i| v[m * n + i]));
    State::new(interior, coeff).expect("consistent shapes")
}

/// Residual vector R(v) = v − T(v) in flattened coordinates.
fn residual_vector(sys: &SystemSpec, ops: &SystemOperators, v: &Array1<f64>) -> Result<Array1<f64>> {
    let m = sys.m;
    let n = ops.grid().len();
    let state = unflatten(v, m, n);
    let image = apply_t(sys, &state, ops)?;
    Ok(v - &flatten(&image))
}

/// Newton iteration on R(u) = u − T(u) over the interior values and
/// exterior coefficients, with a forward finite-difference Jacobian
/// (step 1e-6 (1 + |u_j|)), dense LU solves, and clamping of negative
/// overshoot back to the cone.
pub fn newton_solve(
    sys: &SystemSpec,
    ops: &SystemOperators,
    init: State,
    tol: f64,
    max_iter: usize,
) -> Result<SolveReport> {
    use ndarray_linalg::Solve;

    if !(tol > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "tolerance must be positive, got {tol}"
        )));
    }
    let m = sys.m;
    let n = ops.grid().len();
    let dim = m * n + m;
    let mut v = flatten(&init);
    let mut last_res = f64::INFINITY;
    for it in 1..=max_iter {
        let r = residual_vector(sys, ops, &v)?;
        last_res = r.iter().fold(0.0f64, |acc, &x| acc.max(x.abs()));
        if last_res <= tol {
            return Ok(SolveReport {
                final_state: unflatten(&v, m, n),
                residual: last_res,
                iterations: it,
                converged: true,
                method: Method::Newton,
                trajectory: None,
            });
        }

        // Forward-difference Jacobian, column by column.
        let cols: Vec<Array1<f64>> = (0..dim)
            .into_par_iter()
            .map(|j| {
                let step = 1e-6 * (1.0 + v[j].abs());
                let mut vj = v.clone();
                vj[j] += step;
                residual_vector(sys, ops, &vj).map(|rj| (rj - &r) / step)
            })
            .collect::<Result<_>>()?;
        let mut jac = Array2::zeros((dim, dim));
        for (j, col) in cols.iter().enumerate() {
            for i in 0..dim {
                jac[[i, j]] = col[i];
            }
        }
        let delta = jac
            .solve(&r)
            .map_err(|e| Error::LinearSolve(format!("newton jacobian solve failed: {e}")))?;
        v -= &delta;
        // Stay in the cone.
        v.mapv_inplace(|x| x.max(0.0));
    }
    Ok(SolveReport {
        final_state: unflatten(&v, m, n),
        residual: last_res,
        iterations: max_iter,
        converged: false,
        method: Method::Newton,
        trajectory: None,
    })
}

/// One found solution of a multistart run.
#[derive(Debug, Clone)]
pub struct FoundSolution {
    pub report: SolveReport,
    /// Sup norm of the state over R^n.
    pub sup_norm: f64,
    /// Whether the localization threshold rho_0 was met, when one was given.
    pub above_rho0: Option<bool>,
}

/// Picard (with Newton fallback) from a deterministic family of starts:
/// the zero state, the box corner, scalings of the principal
/// eigenfunctions, and seeded uniform random states in the box cone.
/// Returns the distinct converged solutions, sorted by sup norm.
#[allow(clippy::too_many_arguments)]
pub fn multistart_search(
    sys: &SystemSpec,
    ops: &SystemOperators,
    bounds: &BoxBounds,
    n_starts: usize,
    seed: u64,
    rho0: Option<f64>,
    tol: f64,
    max_iter: usize,
) -> Result<Vec<FoundSolution>> {
    if n_starts == 0 {
        return Err(Error::InvalidParameter("need at least one start".into()));
    }
    if bounds.rho.len() != sys.m {
        return Err(Error::DimensionMismatch {
            expected: sys.m,
            got: bounds.rho.len(),
        });
    }
    let n = ops.grid().len();
    let m = sys.m;

    let mut starts: Vec<State> = Vec::with_capacity(n_starts);
    starts.push(State::zeros(m, n));
    if starts.len() < n_starts {
        starts.push(box_corner(sys, n, bounds));
    }
    for sigma_frac in [0.25, 0.5, 1.0] {
        if starts.len() >= n_starts {
            break;
        }
        let sigma = sigma_frac * bounds.rho.iter().cloned().fold(f64::INFINITY, f64::min);
        let mut interior = Array2::zeros((m, n));
        for i in 0..m {
            let phi = &ops.eigenpair(i).eigenfunction;
            for k in 0..n {
                interior[[i, k]] = sigma * phi[k].max(0.0);
            }
        }
        starts.push(State::new(interior, Array1::zeros(m))?);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    while starts.len() < n_starts {
        let mut interior = Array2::zeros((m, n));
        let mut coeff = Array1::zeros(m);
        for i in 0..m {
            for k in 0..n {
                interior[[i, k]] = rng.random_range(0.0..bounds.rho[i]);
            }
            let sup = sys.components[i].zeta.sup_global();
            coeff[i] = if sup > 0.0 {
                rng.random_range(0.0..bounds.rho[i] / sup)
            } else {
                0.0
            };
        }
        starts.push(State::new(interior, coeff)?);
    }
    starts.truncate(n_starts);

    let reports: Vec<SolveReport> = starts
        .into_par_iter()
        .map(|start| {
            let picard = picard_solve(
                sys,
                ops,
                start,
                DEFAULT_DAMPING,
                tol,
                max_iter,
                false,
            )?;
            if picard.converged {
                return Ok(picard);
            }
            newton_solve(
                sys,
                ops,
                picard.final_state,
                tol,
                DEFAULT_NEWTON_MAX_ITER,
            )
        })
        .collect::<Result<_>>()?;

    let mut found: Vec<FoundSolution> = reports
        .into_iter()
        .filter(|r| r.converged)
        .map(|report| {
            let sup_norm = report.final_state.sup_norm(sys);
            FoundSolution {
                sup_norm,
                above_rho0: rho0.map(|r0| sup_norm >= r0),
                report,
            }
        })
        .collect();

    // Sort, then keep one representative per cluster of nearby states.
    found.sort_by(|a, b| {
        (a.sup_norm, a.report.residual)
            .partial_cmp(&(b.sup_norm, b.report.residual))
            .expect("finite keys")
    });
    let mut distinct: Vec<FoundSolution> = Vec::new();
    for cand in found {
        if distinct
            .iter()
            .all(|kept| kept.report.final_state.sup_distance(&cand.report.final_state) > DEDUP_DISTANCE)
        {
            distinct.push(cand);
        }
    }
    Ok(distinct)
}

fn box_corner(sys: &SystemSpec, n: usize, bounds: &BoxBounds) -> State {
    let m = sys.m;
    let mut interior = Array2::zeros((m, n));
    let mut coeff = Array1::zeros(m);
    for i in 0..m {
        interior.row_mut(i).fill(bounds.rho[i]);
        let sup = sys.components[i].zeta.sup_global();
        coeff[i] = if sup > 0.0 { bounds.rho[i] / sup } else { 0.0 };
    }
    State::new(interior, coeff).expect("consistent shapes")
}

/// Verification of a candidate solution against the definition: bounded
/// substituted nonlinearities, the fixed-point identity within `tol`, and
/// membership in the cone.
#[derive(Debug, Clone)]
pub struct VerifyReport {
    pub valid: bool,
    pub residual: f64,
    pub in_cone: bool,
    /// Sup of |u_i| over R^n per component.
    pub component_sup: Vec<f64>,
    /// Sup of |F_i(u)| per component (bounded automatically on a grid,
    /// reported for the record).
    pub nemytskii_sup: Vec<f64>,
    /// Nonnegative with some component above the zero threshold.
    pub nonzero_positive: bool,
}

pub fn verify_solution(
    sys: &SystemSpec,
    ops: &SystemOperators,
    state: &State,
    tol: f64,
) -> Result<VerifyReport> {
    let res = residual(sys, state, ops)?;
    let in_cone = state.in_cone(0.0);
    let component_sup: Vec<f64> = (0..sys.m).map(|i| state.component_sup(i, sys)).collect();
    let mut nemytskii_sup = Vec::with_capacity(sys.m);
    for i in 0..sys.m {
        let f = nemytskii(sys, i, state, ops.grid())?;
        nemytskii_sup.push(f.iter().fold(0.0f64, |m, &v| m.max(v.abs())));
    }
    let nonzero_positive = in_cone && component_sup.iter().any(|&s| s > NONZERO_SUP);
    Ok(VerifyReport {
        valid: res <= tol && in_cone,
        residual: res,
        in_cone,
        component_sup,
        nemytskii_sup,
        nonzero_positive,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernel::QuadControl;
    use crate::presets;
    use approx::assert_abs_diff_eq;

    fn build(sys: &SystemSpec) -> SystemOperators {
        SystemOperators::build(sys, &QuadControl::default()).unwrap()
    }

    #[test]
    fn picard_rejects_bad_arguments() {
        let sys = presets::nonexistence_example(0.1, 1.0, 0.0, 0.0, 8);
        let ops = build(&sys);
        let zero = ops.zero_state(&sys);
        assert!(picard_solve(&sys, &ops, zero.clone(), 0.0, 1e-8, 10, false).is_err());
        assert!(picard_solve(&sys, &ops, zero.clone(), 1.5, 1e-8, 10, false).is_err());
        assert!(picard_solve(&sys, &ops, zero, 0.5, 0.0, 10, false).is_err());
    }

    #[test]
    fn picard_returns_fixed_point_immediately() {
        let sys = presets::nonexistence_example(0.1, 1.0, 0.0, 0.0, 8);
        let ops = build(&sys);
        let zero = ops.zero_state(&sys);
        let report = picard_solve(&sys, &ops, zero, 0.5, 1e-10, 100, false).unwrap();
        assert!(report.converged);
        assert_eq!(report.iterations, 1);
        assert_eq!(report.residual, 0.0);
    }

    #[test]
    fn picard_contracts_to_zero_in_small_parameter_regime() {
        let sys = presets::nonexistence_example(0.1, 1.0, 0.0, 0.0, 12);
        let ops = build(&sys);
        let corner = super::box_corner(&sys, ops.grid().len(), &presets::nonexistence_box());
        let report = picard_solve(&sys, &ops, corner, 0.5, 1e-10, 2000, true).unwrap();
        assert!(report.converged);
        assert!(report.final_state.sup_norm(&sys) <= 1e-6);
        // Reported residual matches an independent recomputation.
        let re = residual(&sys, &report.final_state, &ops).unwrap();
        assert_abs_diff_eq!(re, report.residual, epsilon = 1e-12);
    }

    #[test]
    fn picard_finds_nonzero_solution_in_admissible_regime() {
        let sys = presets::existence_example(0.05, 1.0, 0.2, 0.5, 16);
        let ops = build(&sys);
        let corner = super::box_corner(&sys, ops.grid().len(), &presets::existence_box());
        let report = picard_solve(&sys, &ops, corner, 0.5, 1e-8, 2000, false).unwrap();
        assert!(report.converged);
        assert!(report.residual <= 1e-8);
        assert!(report.final_state.sup_norm(&sys) >= 1e-3);
        assert!(report.final_state.in_cone(0.0));
    }

    #[test]
    fn newton_agrees_with_picard() {
        let sys = presets::existence_example(0.05, 1.0, 0.2, 0.5, 12);
        let ops = build(&sys);
        let corner = super::box_corner(&sys, ops.grid().len(), &presets::existence_box());
        let picard = picard_solve(&sys, &ops, corner.clone(), 0.5, 1e-9, 2000, false).unwrap();
        assert!(picard.converged);
        let newton = newton_solve(&sys, &ops, corner, 1e-9, 25).unwrap();
        assert!(newton.converged);
        let dist = picard
            .final_state
            .sup_distance(&newton.final_state);
        assert!(dist <= 1e-6, "methods disagree by {dist}");
    }

    #[test]
    fn newton_keeps_converged_state() {
        let sys = presets::existence_example(0.05, 1.0, 0.2, 0.5, 12);
        let ops = build(&sys);
        let corner = super::box_corner(&sys, ops.grid().len(), &presets::existence_box());
        let picard = picard_solve(&sys, &ops, corner, 0.5, 1e-9, 2000, false).unwrap();
        let newton = newton_solve(&sys, &ops, picard.final_state.clone(), 1e-9, 25).unwrap();
        assert!(newton.converged);
        assert!(newton.residual <= 1e-9);
    }

    #[test]
    fn newton_converges_to_zero_near_origin() {
        let sys = presets::nonexistence_example(0.1, 1.0, 0.0, 0.0, 8);
        let ops = build(&sys);
        let mut start = ops.zero_state(&sys);
        start.interior_mut().row_mut(0).fill(0.05);
        let report = newton_solve(&sys, &ops, start, 1e-10, 25).unwrap();
        assert!(report.converged);
        assert!(report.final_state.sup_norm(&sys) <= 1e-8);
    }

    #[test]
    fn multistart_finds_only_zero_in_certified_region() {
        let sys = presets::nonexistence_example(0.1, 1.0, 0.0, 0.0, 12);
        let ops = build(&sys);
        let found = multistart_search(
            &sys,
            &ops,
            &presets::nonexistence_box(),
            8,
            42,
            Some(1e-3),
            1e-9,
            2000,
        )
        .unwrap();
        assert_eq!(found.len(), 1);
        assert!(found[0].sup_norm <= 1e-6);
        assert_eq!(found[0].above_rho0, Some(false));
    }

    #[test]
    fn multistart_single_zero_start() {
        let sys = presets::nonexistence_example(0.1, 1.0, 0.0, 0.0, 8);
        let ops = build(&sys);
        let found = multistart_search(
            &sys,
            &ops,
            &presets::nonexistence_box(),
            1,
            0,
            None,
            1e-9,
            500,
        )
        .unwrap();
        assert_eq!(found.len(), 1);
        assert_eq!(found[0].sup_norm, 0.0);
    }

    #[test]
    fn multistart_finds_nonzero_in_admissible_region() {
        let sys = presets::existence_example(0.05, 1.0, 0.2, 0.5, 12);
        let ops = build(&sys);
        let found = multistart_search(
            &sys,
            &ops,
            &presets::existence_box(),
            4,
            7,
            Some(1e-3),
            1e-8,
            2000,
        )
        .unwrap();
        assert!(found.iter().any(|f| f.sup_norm >= 1e-3));
    }

    #[test]
    fn verify_flags_zero_and_nonzero() {
        let sys = presets::nonexistence_example(0.1, 1.0, 0.0, 0.0, 8);
        let ops = build(&sys);
        let zero = ops.zero_state(&sys);
        let report = verify_solution(&sys, &ops, &zero, 1e-10).unwrap();
        assert!(report.valid);
        assert!(!report.nonzero_positive);

        // A spec where T(0) != 0: zero state fails at zero tolerance.
        let sys = presets::existence_example(0.05, 1.0, 0.2, 0.5, 8);
        let ops = build(&sys);
        let zero = ops.zero_state(&sys);
        let report = verify_solution(&sys, &ops, &zero, 0.0).unwrap();
        assert!(!report.valid);
        assert!(report.residual > 0.0);
    }

    #[test]
    fn verify_accepts_picard_output() {
        let sys = presets::existence_example(0.05, 1.0, 0.2, 0.5, 12);
        let ops = build(&sys);
        let corner = super::box_corner(&sys, ops.grid().len(), &presets::existence_box());
        let solved = picard_solve(&sys, &ops, corner, 0.5, 1e-9, 2000, false).unwrap();
        let report = verify_solution(&sys, &ops, &solved.final_state, 1e-8).unwrap();
        assert!(report.valid);
        assert!(report.nonzero_positive);
        assert!(report.nemytskii_sup.iter().all(|v| v.is_finite()));
    }
}
