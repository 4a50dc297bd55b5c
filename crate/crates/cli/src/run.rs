//! One function per subcommand; each returns the `result` payload.

use serde_json::{json, Value};
use vicinal_core::iteration::{
    convergence_summary, fejer_residuals, ratio_chain_residuals, ConvergenceSummary,
};
use vicinal_core::mappings::{discontinuity_witness, example_3_2_feasibility, MappingKind};
use vicinal_core::properties::{check_comparison, sample_pairs, PropertyRun};
use vicinal_core::resolvent::resolve_with_limit;
use vicinal_core::sphere::exp_map;
use vicinal_core::{
    asymptotic_center, check, dist, g_estimate, g_maximize, g_shape_check, picard_trace, ppa_run,
    resolve, spherical_boundedness_margin, AdmissibleCap, Ball, CheckOptions, ConvexFunctional,
    GEstimator, MappingHandle, PpaOptions, PpaRun, Property, SpherePoint,
};

use crate::config::{Command, ExperimentConfig, Format};
use crate::error::CliError;
use crate::output::{samples_csv, table_csv, to_value, trace_csv};

/// What a command produced.
pub struct Outcome {
    pub result: Value,
    /// Replaces the JSON envelope under `--format csv`.
    pub csv: Option<String>,
    /// Some checked property had violations.
    pub violated: bool,
}

impl Outcome {
    fn json(result: Value) -> Self {
        Self { result, csv: None, violated: false }
    }
}

pub fn run(cfg: &ExperimentConfig) -> Result<Outcome, CliError> {
    let command = cfg.command.expect("resolved config");
    let out = match command {
        Command::Resolve => resolve_cmd(cfg),
        Command::Check => check_cmd(cfg),
        Command::Iterate => iterate_cmd(cfg),
        Command::Ppa => ppa_cmd(cfg),
        Command::Center => center_cmd(cfg),
        Command::Example32 => example_cmd(cfg),
        Command::GFunction => g_cmd(cfg),
    }?;
    if cfg.format == Format::Csv && out.csv.is_none() {
        return Err(CliError::Config(format!(
            "--format csv is not available for {}",
            command.name()
        )));
    }
    Ok(out)
}

fn functional(cfg: &ExperimentConfig) -> Result<&ConvexFunctional, CliError> {
    cfg.functional
        .as_ref()
        .ok_or_else(|| CliError::Config("a functional is required (--functional or config)".into()))
}

fn mapping(cfg: &ExperimentConfig) -> Result<MappingHandle, CliError> {
    let kind = cfg
        .mapping
        .clone()
        .ok_or_else(|| CliError::Config("a mapping is required (--mapping, --functional or config)".into()))?;
    Ok(MappingHandle::new(kind, cfg.cap.clone())?)
}

fn x0(cfg: &ExperimentConfig) -> &SpherePoint {
    cfg.x0.as_ref().expect("resolved x0")
}

fn resolve_cmd(cfg: &ExperimentConfig) -> Result<Outcome, CliError> {
    let point = cfg.point.as_ref().expect("resolved point");
    let r = resolve_with_limit(functional(cfg)?, &cfg.cap, point, cfg.tol(), cfg.max_iter())?;
    let mut result = to_value(&r);
    result["input_distance"] = json!(dist(point, &r.point)?);
    Ok(Outcome::json(result))
}

fn check_options(cfg: &ExperimentConfig) -> CheckOptions {
    let mut o = CheckOptions::new(cfg.sampling.count, cfg.sampling.seed);
    o.tolerance = cfg.tol();
    o.stratification = cfg.stratification();
    o.reference = cfg.reference.clone();
    o.kappa = cfg.kappa;
    o
}

/// Runs the configured properties; the comparison inequality needs no mapping.
fn run_checks(cfg: &ExperimentConfig, t: Option<&MappingHandle>) -> Result<Vec<PropertyRun>, CliError> {
    if cfg.properties.is_empty() {
        return Err(CliError::Config("no property given (--property or config)".into()));
    }
    let options = check_options(cfg);
    let mut runs = Vec::new();
    for p in &cfg.properties {
        let run = match (p, t) {
            (Property::ComparisonInequality, _) => check_comparison(&cfg.cap, &options)?,
            (_, Some(t)) => check(t, *p, &options)?,
            (_, None) => {
                return Err(CliError::Config(format!("property {p} needs a mapping")));
            }
        };
        runs.push(run);
    }
    if let Some(path) = &cfg.emit_samples {
        for run in &runs {
            let path = if runs.len() == 1 {
                path.clone()
            } else {
                let stem = path.file_stem().and_then(|s| s.to_str()).unwrap_or("samples");
                path.with_file_name(format!("{stem}-{}.csv", run.report.property))
            };
            crate::output::write(Some(&path), &samples_csv(&run.samples)?)?;
        }
    }
    Ok(runs)
}

const REPORT_COLUMNS: [&str; 7] = [
    "property",
    "samples",
    "seed",
    "tolerance",
    "kappa",
    "min_residual",
    "violations",
];

fn reports_outcome(runs: &[PropertyRun], mut result: Value) -> Result<Outcome, CliError> {
    let reports: Vec<Value> = runs.iter().map(|r| to_value(&r.report)).collect();
    let violated = runs.iter().any(|r| !r.report.passed());
    result["reports"] = Value::Array(reports.clone());
    result["passed"] = json!(!violated);
    Ok(Outcome {
        result,
        csv: Some(table_csv(&REPORT_COLUMNS, &reports)?),
        violated,
    })
}

fn check_cmd(cfg: &ExperimentConfig) -> Result<Outcome, CliError> {
    let needs_mapping = cfg.properties.iter().any(|p| *p != Property::ComparisonInequality);
    let t = if needs_mapping { Some(mapping(cfg)?) } else { None };
    let runs = run_checks(cfg, t.as_ref())?;
    reports_outcome(&runs, json!({}))
}

fn iterate_cmd(cfg: &ExperimentConfig) -> Result<Outcome, CliError> {
    let t = mapping(cfg)?;
    let reference = t.known_fixed_point()?;
    let trace = picard_trace(&t, x0(cfg), cfg.max_iter(), cfg.stop_tol(), reference.as_ref())?;
    let summary = (trace.steps() > 0).then(|| convergence_summary(&trace)).transpose()?;
    Ok(Outcome {
        csv: Some(trace_csv(&trace)?),
        result: json!({ "trace": to_value(&trace), "summary": to_value(&summary) }),
        violated: false,
    })
}

/// `min f` over a tangent grid of spacing `h` covering a 2-sphere cap.
fn grid_minimum(f: &ConvexFunctional, cap: &AdmissibleCap, h: f64) -> Result<f64, CliError> {
    if cap.ambient_dim() != 3 {
        return Err(CliError::Config("--grid-spacing needs a cap on the 2-sphere".into()));
    }
    if !(h > 0.0 && h < cap.radius()) {
        return Err(CliError::Config(format!("grid spacing {h} outside (0, r)")));
    }
    let c = cap.center().coords();
    // orthonormal tangent basis at the center by Gram–Schmidt on e_i
    let mut basis: Vec<[f64; 3]> = Vec::new();
    for i in 0..3 {
        let mut v = [0.0; 3];
        v[i] = 1.0;
        for b in std::iter::once(&[c[0], c[1], c[2]]).chain(basis.iter()) {
            let dot: f64 = v.iter().zip(b).map(|(a, b)| a * b).sum();
            v.iter_mut().zip(b).for_each(|(a, b)| *a -= dot * b);
        }
        let n = v.iter().map(|a| a * a).sum::<f64>().sqrt();
        if n > 0.1 {
            basis.push(v.map(|a| a / n));
        }
    }
    let (u, w) = (basis[0], basis[1]);
    let r = cap.radius();
    let n = (r / h).ceil() as i64;
    let mut best = f64::INFINITY;
    for i in -n..=n {
        for j in -n..=n {
            let (a, b) = (i as f64 * h, j as f64 * h);
            if a.hypot(b) > r {
                continue;
            }
            let v: Vec<f64> = (0..3).map(|k| a * u[k] + b * w[k]).collect();
            if let Some(val) = f.evaluate(&exp_map(cap.center(), &v)?)?.finite() {
                best = best.min(val);
            }
        }
    }
    Ok(best)
}

fn ppa_diagnostics(cfg: &ExperimentConfig, run: &PpaRun) -> Result<Value, CliError> {
    let f = functional(cfg)?;
    let trace = &run.trace;
    let summary: Option<ConvergenceSummary> =
        (trace.steps() > 0).then(|| convergence_summary(trace)).transpose()?;
    let fixed = resolve(f, &cfg.cap, &run.minimizer, cfg.resolvent_tol())?;
    let mut d = json!({
        "steps": trace.steps(),
        "stop_reason": to_value(&trace.stop_reason),
        "final_step": trace.final_step(),
        "max_window_deviation": summary.map(|s| s.max_window_deviation),
        "fixed_point_residual": dist(&fixed.point, &run.minimizer)?,
    });
    if let Some(r) = &trace.reference {
        let min = |v: Vec<f64>| v.into_iter().fold(f64::INFINITY, f64::min);
        d["reference_distance"] = json!(dist(&run.minimizer, r)?);
        if trace.steps() > 0 {
            d["fejer_min"] = json!(min(fejer_residuals(trace)?));
            d["ratio_chain_min"] = json!(min(ratio_chain_residuals(trace)?));
        }
    }
    if let Some(h) = cfg.grid_spacing {
        let grid = grid_minimum(f, &cfg.cap, h)?;
        let value = run.objective_value.finite().unwrap_or(f64::INFINITY);
        d["grid_minimum"] = json!(grid);
        d["grid_gap"] = json!(value - grid);
    }
    Ok(d)
}

fn ppa_options(cfg: &ExperimentConfig) -> PpaOptions {
    PpaOptions {
        max_iter: cfg.max_iter(),
        stop_tol: cfg.stop_tol(),
        resolvent_tol: cfg.resolvent_tol(),
    }
}

/// Worst value of `key` over `rows` (`max` or `min`), skipping nulls.
fn worst(rows: &[Value], key: &str, take_max: bool) -> Value {
    let vals = rows.iter().filter_map(|r| r[key].as_f64());
    let v = if take_max {
        vals.fold(f64::NEG_INFINITY, f64::max)
    } else {
        vals.fold(f64::INFINITY, f64::min)
    };
    if v.is_finite() { json!(v) } else { Value::Null }
}

fn ppa_cmd(cfg: &ExperimentConfig) -> Result<Outcome, CliError> {
    let f = functional(cfg)?;
    let options = ppa_options(cfg);
    if let Some(x0) = &cfg.x0 {
        let run = ppa_run(f, &cfg.cap, x0, options)?;
        let diagnostics = ppa_diagnostics(cfg, &run)?;
        return Ok(Outcome {
            csv: Some(trace_csv(&run.trace)?),
            result: json!({ "run": to_value(&run), "diagnostics": diagnostics }),
            violated: false,
        });
    }
    if cfg.starts == 0 {
        return Err(CliError::Config("starts must be positive".into()));
    }
    let mut sampler = cfg.cap.sampler(cfg.sampling.seed);
    let mut runs = Vec::new();
    for _ in 0..cfg.starts {
        let x0 = sampler.next_point();
        let run = ppa_run(f, &cfg.cap, &x0, options)?;
        let mut row = ppa_diagnostics(cfg, &run)?;
        row["x0"] = to_value(&x0);
        row["minimizer"] = to_value(&run.minimizer);
        row["objective_value"] = to_value(&run.objective_value);
        runs.push(row);
    }
    let aggregate = json!({
        "traces": runs.len(),
        "max_steps": runs.iter().filter_map(|r| r["steps"].as_u64()).max(),
        "max_final_step": worst(&runs, "final_step", true),
        "max_window_deviation": worst(&runs, "max_window_deviation", true),
        "max_fixed_point_residual": worst(&runs, "fixed_point_residual", true),
        "max_reference_distance": worst(&runs, "reference_distance", true),
        "fejer_min": worst(&runs, "fejer_min", false),
        "ratio_chain_min": worst(&runs, "ratio_chain_min", false),
        "max_grid_gap": worst(&runs, "grid_gap", true),
    });
    Ok(Outcome::json(json!({ "runs": runs, "aggregate": aggregate })))
}

fn center_cmd(cfg: &ExperimentConfig) -> Result<Outcome, CliError> {
    let t = cfg.mapping.is_some().then(|| mapping(cfg)).transpose()?;
    let points = match (&cfg.points, &t) {
        (Some(p), _) => p.clone(),
        (None, Some(t)) => picard_trace(t, x0(cfg), cfg.max_iter(), cfg.stop_tol(), None)?.iterates,
        (None, None) => {
            return Err(CliError::Config("center needs points or a mapping to iterate".into()))
        }
    };
    let m = cfg.tail_start.unwrap_or(points.len() / 2);
    let estimate = asymptotic_center(&points, m, cfg.tol())?;
    let mut result = json!({
        "estimate": to_value(&estimate),
        "margin": spherical_boundedness_margin(&points, m)?,
        "sequence_length": points.len(),
        "last_distance": dist(&estimate.center, points.last().expect("nonempty"))?,
    });
    if let Some(t) = &t {
        result["displacement"] = json!(dist(&t.apply(&estimate.center)?, &estimate.center)?);
    }
    Ok(Outcome::json(result))
}

fn example_cmd(cfg: &ExperimentConfig) -> Result<Outcome, CliError> {
    let feasibility = example_3_2_feasibility(cfg.delta);
    let t = MappingHandle::example_3_2(cfg.cap.center().clone(), cfg.cap.radius(), cfg.delta)?;
    let eps = (1e-6f64).min(cfg.cap.radius() - std::f64::consts::FRAC_PI_8);
    let witness = discontinuity_witness(&t, eps)?;
    let runs = run_checks(cfg, Some(&t))?;
    // cross-region share, recounted from the sample pairs
    let inner = Ball::new(cfg.cap.center().clone(), std::f64::consts::FRAC_PI_8)?;
    let pairs = sample_pairs(&cfg.cap, cfg.sampling.count, cfg.sampling.seed, cfg.stratification());
    let mut cross = 0usize;
    for (x, y) in &pairs {
        cross += usize::from(inner.contains(x)? != inner.contains(y)?);
    }
    let mapping = MappingKind::Example32 {
        anchor: cfg.cap.center().clone(),
        radius: cfg.cap.radius(),
        delta: cfg.delta,
    };
    reports_outcome(
        &runs,
        json!({
            "mapping": to_value(&mapping),
            "feasibility": to_value(&feasibility),
            "witness": to_value(&witness),
            "cross_pairs": cross,
            "cross_fraction": cross as f64 / pairs.len().max(1) as f64,
        }),
    )
}

fn g_cmd(cfg: &ExperimentConfig) -> Result<Outcome, CliError> {
    let t = mapping(cfg)?;
    let trace = picard_trace(&t, x0(cfg), cfg.max_iter(), cfg.stop_tol(), None)?;
    let limit = trace.last().clone();
    let skip = cfg.skip.expect("resolved skip");
    let est = GEstimator::from_trace(&trace, skip)?;
    let mut maximizers = Vec::new();
    let mut points = Vec::new();
    for &n in cfg.truncations.as_deref().expect("resolved truncations") {
        let m = g_maximize(&est.truncate(n)?, &cfg.cap, cfg.tol())?;
        maximizers.push(json!({
            "n": n,
            "maximizer": to_value(&m),
            "distance_to_limit": dist(&m, &limit)?,
            "value": g_estimate(&est.truncate(n)?, &m)?,
        }));
        points.push(m);
    }
    let mut spread: f64 = 0.0;
    for a in &points {
        for b in &points {
            spread = spread.max(dist(a, b)?);
        }
    }
    let shape = g_shape_check(&est, &cfg.cap, cfg.sampling.count, cfg.sampling.seed)?;
    Ok(Outcome::json(json!({
        "limit": to_value(&limit),
        "steps": trace.steps(),
        "skip": skip,
        "maximizers": maximizers,
        "truncation_spread": spread,
        "max_distance_to_limit": worst(&maximizers, "distance_to_limit", true),
        "shape": to_value(&shape),
    })))
}
