//! Picard iteration and the proximal point algorithm.

mod center;
mod tail;

pub use center::{asymptotic_center, spherical_boundedness_margin, AsymptoticCenterEstimate};
pub use tail::{tail_transform_stat, TailMode, Transform};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::functions::{ConvexFunctional, ExtendedReal};
use crate::mappings::{MappingHandle, MappingKind, SelfMap};
use crate::sphere::{dist, AdmissibleCap, SpherePoint};

pub const DEFAULT_STOP_TOL: f64 = 1e-10;
pub const DEFAULT_MAX_ITER: usize = 10_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StopReason {
    /// The last step was shorter than the stop tolerance.
    Tolerance,
    MaxIterations,
}

/// Iterates `x_0, …, x_N` of a Picard sequence with derived distances.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IterationTrace {
    pub iterates: Vec<SpherePoint>,
    /// `d(x_{n+1}, x_n)` for `n < N`.
    pub step_distances: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reference: Option<SpherePoint>,
    /// `d(x_n, reference)` for `n ≤ N`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reference_distances: Option<Vec<f64>>,
    /// `f(x_n)` for proximal point runs.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub objective_values: Option<Vec<ExtendedReal>>,
    pub stop_reason: StopReason,
}

impl IterationTrace {
    /// Number of steps `N`.
    pub fn steps(&self) -> usize {
        self.step_distances.len()
    }

    pub fn last(&self) -> &SpherePoint {
        self.iterates.last().expect("a trace holds at least x_0")
    }

    pub fn final_step(&self) -> Option<f64> {
        self.step_distances.last().copied()
    }
}

/// Runs `x_{n+1} = T x_n` until a step is shorter than `stop_tol` or
/// `max_iter` steps were taken. `stop_tol = 0` always runs `max_iter` steps.
pub fn picard_trace<T: SelfMap + ?Sized>(
    t: &T,
    x0: &SpherePoint,
    max_iter: usize,
    stop_tol: f64,
    reference: Option<&SpherePoint>,
) -> Result<IterationTrace> {
    if !(stop_tol >= 0.0 && stop_tol.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "stop tolerance {stop_tol} must be finite and nonnegative"
        )));
    }
    let domain = t.domain();
    domain.require(x0)?;
    if let Some(r) = reference {
        x0.check_same_dim(r)?;
    }

    let mut iterates = vec![x0.clone()];
    let mut steps = Vec::new();
    let mut stop_reason = StopReason::MaxIterations;
    for n in 1..=max_iter {
        let prev = &iterates[n - 1];
        let next = t.apply(prev)?;
        if !domain.contains(&next)? {
            return Err(Error::EscapedDomain { step: n });
        }
        let d = dist(&next, prev)?;
        iterates.push(next);
        steps.push(d);
        if d < stop_tol {
            stop_reason = StopReason::Tolerance;
            break;
        }
    }

    let reference_distances = reference
        .map(|r| iterates.iter().map(|x| dist(x, r)).collect::<Result<Vec<_>>>())
        .transpose()?;
    Ok(IterationTrace {
        iterates,
        step_distances: steps,
        reference: reference.cloned(),
        reference_distances,
        objective_values: None,
        stop_reason,
    })
}

/// `(n, d(x_{n+1}, x_n))` for every step.
pub fn asymptotic_regularity_profile(trace: &IterationTrace) -> Result<Vec<(usize, f64)>> {
    if trace.iterates.len() < 2 {
        return Err(Error::Precondition("trace has no steps".into()));
    }
    Ok(trace.step_distances.iter().copied().enumerate().collect())
}

fn require_reference(trace: &IterationTrace) -> Result<(&SpherePoint, &[f64])> {
    match (&trace.reference, &trace.reference_distances) {
        (Some(r), Some(d)) => Ok((r, d)),
        _ => Err(Error::Precondition("trace has no reference point".into())),
    }
}

/// `d(x_n, ref) − d(x_{n+1}, ref)` for every step; nonnegative along
/// quasi-nonexpansive iterations toward a fixed point.
pub fn fejer_residuals(trace: &IterationTrace) -> Result<Vec<f64>> {
    let (_, d) = require_reference(trace)?;
    Ok(d.windows(2).map(|w| w[0] - w[1]).collect())
}

/// `cos d(x_{n+1}, x_n) − cos d(x_n, ref) / cos d(x_{n+1}, ref)` for every
/// step; nonnegative for firmly vicinal mappings and a fixed `ref`.
pub fn ratio_chain_residuals(trace: &IterationTrace) -> Result<Vec<f64>> {
    let (r, _) = require_reference(trace)?;
    trace
        .iterates
        .windows(2)
        .map(|w| {
            let step = w[1].cos_dist(&w[0])?;
            Ok(step - w[0].cos_dist(r)? / w[1].cos_dist(r)?)
        })
        .collect()
}

/// Metric-convergence summary of a finished trace.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceSummary {
    /// `x_N`.
    pub limit: SpherePoint,
    /// `⌊N/2⌋`.
    pub window_start: usize,
    /// `max_{n ≥ N/2} d(x_n, x_N)`.
    pub max_window_deviation: f64,
    pub final_step: f64,
}

pub fn convergence_summary(trace: &IterationTrace) -> Result<ConvergenceSummary> {
    let n = trace.steps();
    if n == 0 {
        return Err(Error::Precondition("trace has no steps".into()));
    }
    let limit = trace.last().clone();
    let window_start = n / 2;
    let mut max_window_deviation: f64 = 0.0;
    for x in &trace.iterates[window_start..] {
        max_window_deviation = max_window_deviation.max(dist(x, &limit)?);
    }
    Ok(ConvergenceSummary {
        limit,
        window_start,
        max_window_deviation,
        final_step: trace.step_distances[n - 1],
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PpaOptions {
    pub max_iter: usize,
    pub stop_tol: f64,
    /// Accuracy of each resolvent evaluation.
    pub resolvent_tol: f64,
}

impl Default for PpaOptions {
    fn default() -> Self {
        Self {
            max_iter: DEFAULT_MAX_ITER,
            stop_tol: DEFAULT_STOP_TOL,
            resolvent_tol: crate::resolvent::DEFAULT_TOL,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PpaRun {
    pub trace: IterationTrace,
    /// The final iterate.
    pub minimizer: SpherePoint,
    pub objective_value: ExtendedReal,
}

/// Picard iteration of `R_f`, with the closed-form minimizer (when known)
/// as the trace reference.
pub fn ppa_run(
    f: &ConvexFunctional,
    domain: &AdmissibleCap,
    x0: &SpherePoint,
    options: PpaOptions,
) -> Result<PpaRun> {
    let mapping = MappingHandle::new(
        MappingKind::ResolventOf {
            functional: f.clone(),
            tol: options.resolvent_tol,
        },
        domain.clone(),
    )?;
    let reference = f.known_minimizer(domain)?;
    let mut trace = picard_trace(
        &mapping,
        x0,
        options.max_iter,
        options.stop_tol,
        reference.as_ref(),
    )?;
    let values = trace
        .iterates
        .iter()
        .map(|x| f.evaluate(x))
        .collect::<Result<Vec<_>>>()?;
    let objective_value = *values.last().expect("nonempty trace");
    trace.objective_values = Some(values);
    Ok(PpaRun {
        minimizer: trace.last().clone(),
        trace,
        objective_value,
    })
}
