//! Command-line front end: grid inspection, closed-form torsion tables,
//! spectral data, harmonic lifts, fixed-point solves, certificates and
//! parameter-region scans, plus the two built-in example systems.
//!
//! Exit codes: 0 success, 2 invalid configuration or spec, 3 solver
//! non-convergence, 4 inconclusive certificate under --require-certified.

mod report;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use ndarray::Array1;
use serde_json::json;

use fraxol_core::certificates::{
    check_existence, check_nonexistence, ExistenceHypotheses, NonexistenceHypotheses, NormSource,
    Outcome, ScanMode,
};
use fraxol_core::green::{assemble, solve_nonhomogeneous, spectral_radius, sup_norm_g1};
use fraxol_core::model::{BoxBounds, State, SystemOperators, SystemSpec};
use fraxol_core::solver::{
    multistart_search, newton_solve, picard_solve, SolveReport, DEFAULT_DAMPING, DEFAULT_MAX_ITER,
    DEFAULT_TOL,
};
use fraxol_core::{
    build_grid, feasible_region_scan, presets, torsion_closed_form, BallDomain, ExteriorData,
    FracOrder, QuadControl,
};
use report::{canonical_json, emit, Csv, CsvField};

#[derive(Parser)]
#[command(name = "fraxol", version, about = "Fractional-Laplacian system solver and certificate checker")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Dump the quadrature grid as CSV (index, coordinates, weight).
    GridInfo {
        #[arg(long, default_value_t = 32)]
        resolution: usize,
        #[arg(long, default_value_t = 1.0)]
        radius: f64,
        #[arg(long, default_value_t = 2)]
        dim: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Closed-form torsion values along a ray, as CSV (norm_x, value).
    Torsion {
        #[arg(long)]
        s: f64,
        #[arg(long, default_value_t = 1.0)]
        radius: f64,
        #[arg(long, default_value_t = 32)]
        samples: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Principal spectral data of the discrete Green operator, as JSON.
    Spectrum {
        #[arg(long)]
        s: f64,
        #[arg(long, default_value_t = 32)]
        resolution: usize,
        #[arg(long, default_value_t = 1e-10)]
        tol: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Harmonic lift of an exterior profile, as CSV (index, x, gamma).
    Harmonic {
        #[arg(long)]
        s: f64,
        #[arg(long, default_value_t = 32)]
        resolution: usize,
        /// Profile: const:C, gaussian:AMP:DECAY or torsion:S:RADIUS.
        #[arg(long, default_value = "const:1.0")]
        zeta: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Solve the fixed-point problem of a system spec.
    Solve {
        #[arg(long)]
        spec: PathBuf,
        #[arg(long)]
        resolution: Option<usize>,
        #[arg(long, value_enum, default_value_t = MethodArg::Picard)]
        method: MethodArg,
        #[arg(long, default_value_t = DEFAULT_TOL)]
        tol: f64,
        #[arg(long, default_value_t = DEFAULT_MAX_ITER)]
        max_iter: usize,
        #[arg(long, default_value_t = DEFAULT_DAMPING)]
        damping: f64,
        #[arg(long, default_value_t = 20)]
        starts: usize,
        #[arg(long, default_value_t = 42)]
        seed: u64,
        /// Box caps rho_1,...,rho_m for multistart and corner starts.
        #[arg(long, value_delimiter = ',')]
        rho: Option<Vec<f64>>,
        #[arg(long, default_value = "fraxol-out")]
        out_dir: PathBuf,
    },
    /// Check the existence/non-existence hypotheses of a system spec.
    Certify {
        #[arg(long)]
        spec: PathBuf,
        #[arg(long)]
        resolution: Option<usize>,
        #[command(flatten)]
        options: CertifyOptions,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Tabulate verdicts over a parameter grid, as CSV.
    Scan {
        #[arg(long)]
        spec: PathBuf,
        #[arg(long)]
        resolution: Option<usize>,
        #[arg(long, value_enum)]
        mode: ModeArg,
        /// Box caps rho_1,...,rho_m.
        #[arg(long, value_delimiter = ',')]
        rho: Vec<f64>,
        /// Ranges as VALUE or START:STOP:COUNT (two-component systems).
        #[arg(long)]
        lambda1: Option<String>,
        #[arg(long)]
        lambda2: Option<String>,
        #[arg(long)]
        eta1: Option<String>,
        #[arg(long)]
        eta2: Option<String>,
        #[arg(long, default_value_t = 1)]
        i0: usize,
        #[arg(long)]
        discrete_norms: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run a built-in example system.
    Example {
        #[arg(value_enum)]
        which: ExampleArg,
        #[arg(long)]
        lambda1: Option<f64>,
        #[arg(long)]
        lambda2: Option<f64>,
        #[arg(long)]
        eta1: Option<f64>,
        #[arg(long)]
        eta2: Option<f64>,
        #[arg(long, default_value_t = 32)]
        resolution: usize,
        /// Run the multistart solver and write its report.
        #[arg(long)]
        solve: bool,
        /// Check the matching certificate and write the verdict.
        #[arg(long)]
        certify: bool,
        #[arg(long)]
        require_certified: bool,
        #[arg(long, default_value_t = 20)]
        starts: usize,
        #[arg(long, default_value_t = 42)]
        seed: u64,
        #[arg(long, default_value = "fraxol-out")]
        out_dir: PathBuf,
    },
}

#[derive(Args)]
struct CertifyOptions {
    #[arg(long, value_enum)]
    mode: ModeArg,
    /// Box caps rho_1,...,rho_m.
    #[arg(long, value_delimiter = ',')]
    rho: Vec<f64>,
    /// Distinguished component (1-based) for the existence check.
    #[arg(long, default_value_t = 1)]
    i0: usize,
    /// Supply the (delta, rho0) pair instead of the automatic choice.
    #[arg(long, requires = "rho0")]
    delta: Option<f64>,
    #[arg(long, requires = "delta")]
    rho0: Option<f64>,
    /// Use discrete operator norms even where closed forms exist.
    #[arg(long)]
    discrete_norms: bool,
    /// Exit with code 4 unless the verdict certifies.
    #[arg(long)]
    require_certified: bool,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum MethodArg {
    Picard,
    Newton,
    Multistart,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ModeArg {
    Existence,
    Nonexistence,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ExampleArg {
    Existence,
    Nonexistence,
}

/// Failure with the exit code it maps to.
struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn invalid(message: impl Into<String>) -> Self {
        Self {
            code: 2,
            message: message.into(),
        }
    }

    fn not_converged(message: impl Into<String>) -> Self {
        Self {
            code: 3,
            message: message.into(),
        }
    }

    fn inconclusive(message: impl Into<String>) -> Self {
        Self {
            code: 4,
            message: message.into(),
        }
    }
}

type CliResult = Result<(), Failure>;

fn invalid<E: std::fmt::Display>(e: E) -> Failure {
    Failure::invalid(e.to_string())
}

fn main() -> ExitCode {
    // Cap worker parallelism when asked to.
    if let Ok(threads) = std::env::var("FRAXOL_THREADS") {
        if let Ok(k) = threads.parse::<usize>() {
            let _ = rayon::ThreadPoolBuilder::new()
                .num_threads(k.max(1))
                .build_global();
        }
    }
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}

fn run(command: Command) -> CliResult {
    match command {
        Command::GridInfo {
            resolution,
            radius,
            dim,
            out,
        } => grid_info(resolution, radius, dim, out),
        Command::Torsion {
            s,
            radius,
            samples,
            out,
        } => torsion_table(s, radius, samples, out),
        Command::Spectrum {
            s,
            resolution,
            tol,
            out,
        } => spectrum(s, resolution, tol, out),
        Command::Harmonic {
            s,
            resolution,
            zeta,
            out,
        } => harmonic(s, resolution, &zeta, out),
        Command::Solve {
            spec,
            resolution,
            method,
            tol,
            max_iter,
            damping,
            starts,
            seed,
            rho,
            out_dir,
        } => solve_cmd(
            spec, resolution, method, tol, max_iter, damping, starts, seed, rho, out_dir,
        ),
        Command::Certify {
            spec,
            resolution,
            options,
            out,
        } => certify_cmd(spec, resolution, options, out),
        Command::Scan {
            spec,
            resolution,
            mode,
            rho,
            lambda1,
            lambda2,
            eta1,
            eta2,
            i0,
            discrete_norms,
            out,
        } => scan_cmd(
            spec,
            resolution,
            mode,
            rho,
            [lambda1, lambda2, eta1, eta2],
            i0,
            discrete_norms,
            out,
        ),
        Command::Example {
            which,
            lambda1,
            lambda2,
            eta1,
            eta2,
            resolution,
            solve,
            certify,
            require_certified,
            starts,
            seed,
            out_dir,
        } => example_cmd(
            which,
            [lambda1, lambda2, eta1, eta2],
            resolution,
            solve,
            certify,
            require_certified,
            starts,
            seed,
            out_dir,
        ),
    }
}

fn frac_order(s: f64) -> Result<FracOrder, Failure> {
    FracOrder::new(s).map_err(invalid)
}

fn grid_info(resolution: usize, radius: f64, dim: usize, out: Option<PathBuf>) -> CliResult {
    let domain = BallDomain::new(dim, radius).map_err(invalid)?;
    let grid = build_grid(&domain, resolution).map_err(invalid)?;
    let coords: Vec<String> = (1..=dim).map(|i| format!("x{i}")).collect();
    let mut header: Vec<&str> = vec!["index"];
    header.extend(coords.iter().map(|s| s.as_str()));
    header.push("weight");
    let mut csv = Csv::new(&header);
    for j in 0..grid.len() {
        let mut row = vec![CsvField::Int(j as i64)];
        row.extend(grid.node(j).iter().map(|&c| CsvField::Float(c)));
        row.push(CsvField::Float(grid.weights()[j]));
        csv.row(&row);
    }
    emit(out.as_deref(), &csv.finish()).map_err(invalid)
}

fn torsion_table(s: f64, radius: f64, samples: usize, out: Option<PathBuf>) -> CliResult {
    if samples == 0 {
        return Err(Failure::invalid("samples must be positive"));
    }
    let order = frac_order(s)?;
    let domain = BallDomain::new(2, radius).map_err(invalid)?;
    let mut csv = Csv::new(&["norm_x", "value"]);
    for k in 0..=samples {
        let r = radius * k as f64 / samples as f64;
        let v = torsion_closed_form(&[r, 0.0], &domain, order);
        csv.row(&[CsvField::Float(r), CsvField::Float(v)]);
    }
    emit(out.as_deref(), &csv.finish()).map_err(invalid)
}

fn spectrum(s: f64, resolution: usize, tol: f64, out: Option<PathBuf>) -> CliResult {
    let order = frac_order(s)?;
    let domain = BallDomain::new(2, 1.0).map_err(invalid)?;
    let grid = build_grid(&domain, resolution).map_err(invalid)?;
    let op = assemble(&grid, &domain, order).map_err(invalid)?;
    let pair = spectral_radius(&op, tol, 100_000).map_err(invalid)?;
    let value = json!({
        "s": s,
        "resolution": resolution,
        "spectral_radius": pair.spectral_radius,
        "mu": pair.mu,
        "residual": pair.residual,
        "sup_norm_G1": sup_norm_g1(&op),
    });
    emit(out.as_deref(), &canonical_json(&value)).map_err(invalid)
}

fn parse_zeta(text: &str) -> Result<ExteriorData, Failure> {
    let parts: Vec<&str> = text.split(':').collect();
    let parse = |v: &str| -> Result<f64, Failure> {
        v.parse::<f64>()
            .map_err(|_| Failure::invalid(format!("bad number {v} in profile {text}")))
    };
    match parts.as_slice() {
        ["const", c] => ExteriorData::constant(parse(c)?).map_err(invalid),
        ["gaussian", a, d] => ExteriorData::gaussian(parse(a)?, parse(d)?).map_err(invalid),
        ["torsion", s, r] => {
            ExteriorData::torsion(FracOrder::new(parse(s)?).map_err(invalid)?, parse(r)?)
                .map_err(invalid)
        }
        _ => Err(Failure::invalid(format!(
            "profile must be const:C, gaussian:AMP:DECAY or torsion:S:RADIUS, got {text}"
        ))),
    }
}

fn harmonic(s: f64, resolution: usize, zeta: &str, out: Option<PathBuf>) -> CliResult {
    let order = frac_order(s)?;
    let profile = parse_zeta(zeta)?;
    let domain = BallDomain::new(2, 1.0).map_err(invalid)?;
    let grid = build_grid(&domain, resolution).map_err(invalid)?;
    let op = assemble(&grid, &domain, order).map_err(invalid)?;
    let zero = Array1::zeros(grid.len());
    let lift =
        solve_nonhomogeneous(&op, &zero, &profile, &QuadControl::default()).map_err(invalid)?;
    let mut csv = Csv::new(&["index", "x1", "x2", "gamma"]);
    for j in 0..grid.len() {
        let x = grid.node(j);
        csv.row(&[
            CsvField::Int(j as i64),
            CsvField::Float(x[0]),
            CsvField::Float(x[1]),
            CsvField::Float(lift.interior[j]),
        ]);
    }
    emit(out.as_deref(), &csv.finish()).map_err(invalid)
}

fn load_spec(path: &Path, resolution: Option<usize>) -> Result<SystemSpec, Failure> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Failure::invalid(format!("reading {}: {e}", path.display())))?;
    let mut spec = SystemSpec::from_json(&text).map_err(invalid)?;
    if let Some(r) = resolution {
        spec.resolution = r;
        spec.validate().map_err(invalid)?;
    }
    Ok(spec)
}

fn solve_report_value(sys: &SystemSpec, report: &SolveReport) -> serde_json::Value {
    let sups: Vec<f64> = (0..sys.m)
        .map(|i| report.final_state.component_sup(i, sys))
        .collect();
    json!({
        "method": report.method.name(),
        "converged": report.converged,
        "iterations": report.iterations,
        "residual": report.residual,
        "sup_norm": report.final_state.sup_norm(sys),
        "component_sup": sups,
    })
}

fn write_solution_csv(
    sys: &SystemSpec,
    ops: &SystemOperators,
    state: &State,
    path: &Path,
) -> CliResult {
    let mut header: Vec<String> = vec!["index".into(), "x1".into(), "x2".into()];
    for i in 1..=sys.m {
        header.push(format!("u{i}"));
    }
    let header_refs: Vec<&str> = header.iter().map(|s| s.as_str()).collect();
    let mut csv = Csv::new(&header_refs);
    for k in 0..ops.grid().len() {
        let x = ops.grid().node(k);
        let mut row = vec![
            CsvField::Int(k as i64),
            CsvField::Float(x[0]),
            CsvField::Float(x[1]),
        ];
        for i in 0..sys.m {
            row.push(CsvField::Float(state.interior()[[i, k]]));
        }
        csv.row(&row);
    }
    emit(Some(path), &csv.finish()).map_err(invalid)
}

fn default_box(sys: &SystemSpec, rho: Option<Vec<f64>>) -> Result<BoxBounds, Failure> {
    match rho {
        Some(r) => BoxBounds::new(r).map_err(invalid),
        None => BoxBounds::new(vec![1.0; sys.m]).map_err(invalid),
    }
}

#[allow(clippy::too_many_arguments)]
fn solve_cmd(
    spec: PathBuf,
    resolution: Option<usize>,
    method: MethodArg,
    tol: f64,
    max_iter: usize,
    damping: f64,
    starts: usize,
    seed: u64,
    rho: Option<Vec<f64>>,
    out_dir: PathBuf,
) -> CliResult {
    let sys = load_spec(&spec, resolution)?;
    let bounds = default_box(&sys, rho)?;
    if bounds.rho.len() != sys.m {
        return Err(Failure::invalid(format!(
            "--rho needs {} entries, got {}",
            sys.m,
            bounds.rho.len()
        )));
    }
    let ops = SystemOperators::build(&sys, &QuadControl::default()).map_err(invalid)?;
    std::fs::create_dir_all(&out_dir).map_err(invalid)?;

    match method {
        MethodArg::Multistart => {
            let found = multistart_search(
                &sys, &ops, &bounds, starts, seed, None, tol, max_iter,
            )
            .map_err(invalid)?;
            let entries: Vec<serde_json::Value> = found
                .iter()
                .map(|f| {
                    let mut v = solve_report_value(&sys, &f.report);
                    v["sup_norm"] = json!(f.sup_norm);
                    v
                })
                .collect();
            let value = json!({
                "method": "multistart",
                "n_starts": starts,
                "seed": seed,
                "solutions": entries,
            });
            emit(Some(&out_dir.join("report.json")), &canonical_json(&value)).map_err(invalid)?;
            let best = found
                .iter()
                .max_by(|a, b| a.sup_norm.partial_cmp(&b.sup_norm).expect("finite"))
                .ok_or_else(|| Failure::not_converged("no start converged"))?;
            write_solution_csv(&sys, &ops, &best.report.final_state, &out_dir.join("solution.csv"))
        }
        MethodArg::Picard | MethodArg::Newton => {
            let n = ops.grid().len();
            let corner = {
                let mut interior = ndarray::Array2::zeros((sys.m, n));
                let mut coeff = Array1::zeros(sys.m);
                for i in 0..sys.m {
                    interior.row_mut(i).fill(bounds.rho[i]);
                    let sup = sys.components[i].zeta.sup_global();
                    coeff[i] = if sup > 0.0 { bounds.rho[i] / sup } else { 0.0 };
                }
                State::new(interior, coeff).map_err(invalid)?
            };
            let report = match method {
                MethodArg::Picard => {
                    picard_solve(&sys, &ops, corner, damping, tol, max_iter, false)
                        .map_err(invalid)?
                }
                _ => newton_solve(&sys, &ops, corner, tol, max_iter.min(100)).map_err(invalid)?,
            };
            emit(
                Some(&out_dir.join("report.json")),
                &canonical_json(&solve_report_value(&sys, &report)),
            )
            .map_err(invalid)?;
            write_solution_csv(&sys, &ops, &report.final_state, &out_dir.join("solution.csv"))?;
            if !report.converged {
                return Err(Failure::not_converged(format!(
                    "solver stopped at residual {:.3e}",
                    report.residual
                )));
            }
            Ok(())
        }
    }
}

fn certify_verdict(
    sys: &SystemSpec,
    ops: &SystemOperators,
    options: &CertifyOptions,
) -> Result<fraxol_core::Verdict, Failure> {
    let bounds = BoxBounds::new(options.rho.clone()).map_err(invalid)?;
    if bounds.rho.len() != sys.m {
        return Err(Failure::invalid(format!(
            "--rho needs {} entries, got {}",
            sys.m,
            bounds.rho.len()
        )));
    }
    let source = if options.discrete_norms {
        NormSource::DiscreteOnly
    } else {
        NormSource::PreferAnalytic
    };
    if options.i0 == 0 || options.i0 > sys.m {
        return Err(Failure::invalid(format!(
            "--i0 must be in 1..={}, got {}",
            sys.m, options.i0
        )));
    }
    Ok(match options.mode {
        ModeArg::Existence => {
            let pair = match (options.delta, options.rho0) {
                (Some(d), Some(r0)) => Some((d, r0)),
                _ => None,
            };
            let h = ExistenceHypotheses::from_system(
                sys,
                ops,
                &bounds,
                options.i0 - 1,
                pair,
                source,
            )
            .map_err(invalid)?;
            check_existence(&h)
        }
        ModeArg::Nonexistence => {
            let h = NonexistenceHypotheses::from_system(sys, ops, &bounds, source)
                .map_err(invalid)?;
            check_nonexistence(&h)
        }
    })
}

fn certify_cmd(
    spec: PathBuf,
    resolution: Option<usize>,
    options: CertifyOptions,
    out: Option<PathBuf>,
) -> CliResult {
    let sys = load_spec(&spec, resolution)?;
    let ops = SystemOperators::build(&sys, &QuadControl::default()).map_err(invalid)?;
    let verdict = certify_verdict(&sys, &ops, &options)?;
    let value = serde_json::to_value(&verdict).map_err(invalid)?;
    emit(out.as_deref(), &canonical_json(&value)).map_err(invalid)?;
    if options.require_certified && verdict.outcome == Outcome::Inconclusive {
        return Err(Failure::inconclusive("certificate is inconclusive"));
    }
    Ok(())
}

/// VALUE or START:STOP:COUNT.
fn parse_range(text: &str, name: &str) -> Result<Vec<f64>, Failure> {
    let bad = || Failure::invalid(format!("--{name}: expected VALUE or START:STOP:COUNT, got {text}"));
    let parts: Vec<&str> = text.split(':').collect();
    match parts.as_slice() {
        [v] => Ok(vec![v.parse().map_err(|_| bad())?]),
        [a, b, k] => {
            let (a, b): (f64, f64) = (a.parse().map_err(|_| bad())?, b.parse().map_err(|_| bad())?);
            let k: usize = k.parse().map_err(|_| bad())?;
            if k == 0 {
                return Err(bad());
            }
            if k == 1 {
                return Ok(vec![a]);
            }
            Ok((0..k)
                .map(|i| a + (b - a) * i as f64 / (k - 1) as f64)
                .collect())
        }
        _ => Err(bad()),
    }
}

#[allow(clippy::too_many_arguments)]
fn scan_cmd(
    spec: PathBuf,
    resolution: Option<usize>,
    mode: ModeArg,
    rho: Vec<f64>,
    ranges: [Option<String>; 4],
    i0: usize,
    discrete_norms: bool,
    out: Option<PathBuf>,
) -> CliResult {
    let sys = load_spec(&spec, resolution)?;
    if sys.m != 2 {
        return Err(Failure::invalid(
            "the scan command drives two-component systems; use the library for general m",
        ));
    }
    let bounds = BoxBounds::new(rho).map_err(invalid)?;
    if bounds.rho.len() != sys.m {
        return Err(Failure::invalid(format!(
            "--rho needs {} entries",
            sys.m
        )));
    }
    if i0 == 0 || i0 > sys.m {
        return Err(Failure::invalid(format!("--i0 must be in 1..={}", sys.m)));
    }
    let defaults = [
        sys.components[0].lambda,
        sys.components[1].lambda,
        sys.components[0].eta,
        sys.components[1].eta,
    ];
    let names = ["lambda1", "lambda2", "eta1", "eta2"];
    let mut grids: Vec<Vec<f64>> = Vec::with_capacity(4);
    for (k, r) in ranges.iter().enumerate() {
        grids.push(match r {
            Some(text) => parse_range(text, names[k])?,
            None => vec![defaults[k]],
        });
    }
    let mut points = Vec::new();
    for &l1 in &grids[0] {
        for &l2 in &grids[1] {
            for &e1 in &grids[2] {
                for &e2 in &grids[3] {
                    points.push((vec![l1, l2], vec![e1, e2]));
                }
            }
        }
    }
    let ops = SystemOperators::build(&sys, &QuadControl::default()).map_err(invalid)?;
    let source = if discrete_norms {
        NormSource::DiscreteOnly
    } else {
        NormSource::PreferAnalytic
    };
    let scan_mode = match mode {
        ModeArg::Existence => ScanMode::Existence,
        ModeArg::Nonexistence => ScanMode::Nonexistence,
    };
    let rows = feasible_region_scan(&sys, &ops, &bounds, &points, scan_mode, i0 - 1, source)
        .map_err(invalid)?;
    let mut csv = Csv::new(&["lambda1", "lambda2", "eta1", "eta2", "verdict", "min_slack"]);
    for row in rows {
        csv.row(&[
            CsvField::Float(row.lambda[0]),
            CsvField::Float(row.lambda[1]),
            CsvField::Float(row.eta[0]),
            CsvField::Float(row.eta[1]),
            CsvField::Str(outcome_name(row.outcome).into()),
            CsvField::Float(row.min_slack),
        ]);
    }
    emit(out.as_deref(), &csv.finish()).map_err(invalid)
}

fn outcome_name(outcome: Outcome) -> &'static str {
    match outcome {
        Outcome::ExistenceCertified => "existence_certified",
        Outcome::NonexistenceCertified => "nonexistence_certified",
        Outcome::Inconclusive => "inconclusive",
    }
}

#[allow(clippy::too_many_arguments)]
fn example_cmd(
    which: ExampleArg,
    params: [Option<f64>; 4],
    resolution: usize,
    solve: bool,
    certify: bool,
    require_certified: bool,
    starts: usize,
    seed: u64,
    out_dir: PathBuf,
) -> CliResult {
    let (sys, bounds, mode) = match which {
        ExampleArg::Existence => (
            presets::existence_example(
                params[0].unwrap_or(0.05),
                params[1].unwrap_or(1.0),
                params[2].unwrap_or(0.2),
                params[3].unwrap_or(0.5),
                resolution,
            ),
            presets::existence_box(),
            ModeArg::Existence,
        ),
        ExampleArg::Nonexistence => (
            presets::nonexistence_example(
                params[0].unwrap_or(0.1),
                params[1].unwrap_or(1.0),
                params[2].unwrap_or(0.0),
                params[3].unwrap_or(0.0),
                resolution,
            ),
            presets::nonexistence_box(),
            ModeArg::Nonexistence,
        ),
    };
    std::fs::create_dir_all(&out_dir).map_err(invalid)?;
    emit(Some(&out_dir.join("spec.json")), &sys.to_json()).map_err(invalid)?;

    if !solve && !certify {
        return Ok(());
    }
    let ops = SystemOperators::build(&sys, &QuadControl::default()).map_err(invalid)?;

    let mut failure: Option<Failure> = None;
    if certify {
        let options = CertifyOptions {
            mode,
            rho: bounds.rho.clone(),
            i0: 1,
            delta: None,
            rho0: None,
            discrete_norms: false,
            require_certified,
        };
        let verdict = certify_verdict(&sys, &ops, &options)?;
        let value = serde_json::to_value(&verdict).map_err(invalid)?;
        emit(Some(&out_dir.join("verdict.json")), &canonical_json(&value)).map_err(invalid)?;
        if require_certified && verdict.outcome == Outcome::Inconclusive {
            failure = Some(Failure::inconclusive("certificate is inconclusive"));
        }
    }
    if solve {
        let found = multistart_search(
            &sys,
            &ops,
            &bounds,
            starts,
            seed,
            None,
            DEFAULT_TOL,
            DEFAULT_MAX_ITER,
        )
        .map_err(invalid)?;
        let entries: Vec<serde_json::Value> = found
            .iter()
            .map(|f| {
                let mut v = solve_report_value(&sys, &f.report);
                v["sup_norm"] = json!(f.sup_norm);
                v
            })
            .collect();
        let value = json!({
            "method": "multistart",
            "n_starts": starts,
            "seed": seed,
            "solutions": entries,
        });
        emit(Some(&out_dir.join("report.json")), &canonical_json(&value)).map_err(invalid)?;
        match found
            .iter()
            .max_by(|a, b| a.sup_norm.partial_cmp(&b.sup_norm).expect("finite"))
        {
            Some(best) => write_solution_csv(
                &sys,
                &ops,
                &best.report.final_state,
                &out_dir.join("solution.csv"),
            )?,
            None => {
                failure.get_or_insert(Failure::not_converged("no start converged"));
            }
        }
    }
    match failure {
        Some(f) => Err(f),
        None => Ok(()),
    }
}
