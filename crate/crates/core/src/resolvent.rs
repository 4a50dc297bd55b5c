//! The resolvent `R_f x = argmin_y { f(y) + tan d(y, x) sin d(y, x) }` on an
//! admissible cap, and metric projections onto balls.

use serde::{Deserialize, Serialize};

use crate::descent::{self, DescentOptions, SmoothObjective};
use crate::error::{Error, Result};
use crate::functions::{penalty, ConvexFunctional, ExtendedReal, Profile, SmoothTerm};
use crate::linalg;
use crate::sphere::{dist, AdmissibleCap, Ball, SpherePoint};

/// Default geodesic-distance tolerance of [`resolve`].
pub const DEFAULT_TOL: f64 = 1e-10;
/// Default iteration cap of the descent solver.
pub const DEFAULT_MAX_ITER: usize = 10_000;

/// Lower bound on the geodesic strong-convexity modulus of the resolvent
/// objective: the penalty alone has Riemannian Hessian eigenvalues
/// `cos t + (1 + sin² t)/cos³ t` and `cos t + 1/cos t`, both at least 2.
const STRONG_CONVEXITY: f64 = 2.0;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResolventResult {
    pub point: SpherePoint,
    pub objective_value: f64,
    pub iterations: usize,
    pub gradient_norm_at_exit: f64,
}

/// `f(y) + tan d(y, x) sin d(y, x)`.
pub fn resolvent_objective(
    f: &ConvexFunctional,
    x: &SpherePoint,
    y: &SpherePoint,
) -> Result<ExtendedReal> {
    let t = dist(y, x)?;
    Ok(f.evaluate(y)? + ExtendedReal::Finite(penalty(t)?))
}

/// Metric projection `P_C x` onto a closed ball.
pub fn metric_projection(ball: &Ball, x: &SpherePoint) -> Result<SpherePoint> {
    ball.project(x)
}

struct PenalizedObjective<'a> {
    terms: &'a [SmoothTerm],
    base: &'a [f64],
}

impl SmoothObjective for PenalizedObjective<'_> {
    fn value(&self, y: &[f64]) -> f64 {
        let pen = Profile::TanSin.value_from_gap(0.5 * linalg::dist_sq(y, self.base));
        self.terms.iter().map(|t| t.value(y)).sum::<f64>() + pen
    }

    fn gradient(&self, y: &[f64]) -> Vec<f64> {
        let mut g = vec![0.0; y.len()];
        for t in self.terms {
            t.add_gradient(y, &mut g);
        }
        let c = linalg::cos_arc(y, self.base);
        linalg::axpy(
            &mut g,
            Profile::TanSin.slope(c),
            &linalg::tangent_toward(y, self.base),
        );
        g
    }
}

/// Computes `R_f x` over the cap to within geodesic distance `tol`.
///
/// Indicator constraints become the feasible ball of a projected descent;
/// at most one indicator term (after dropping zero weights) is supported.
/// Without smooth terms the answer is the closed-form projection.
pub fn resolve(
    f: &ConvexFunctional,
    cap: &AdmissibleCap,
    x: &SpherePoint,
    tol: f64,
) -> Result<ResolventResult> {
    resolve_with_limit(f, cap, x, tol, DEFAULT_MAX_ITER)
}

pub fn resolve_with_limit(
    f: &ConvexFunctional,
    cap: &AdmissibleCap,
    x: &SpherePoint,
    tol: f64,
    max_iter: usize,
) -> Result<ResolventResult> {
    if !(tol > 0.0 && tol.is_finite()) {
        return Err(Error::InvalidParameter(format!("tolerance {tol} must be positive")));
    }
    cap.require(x)?;
    f.validate(cap)?;
    let parts = f.decompose()?;
    let feasible = match parts.constraints.as_slice() {
        [] => cap.as_ball().clone(),
        [ball] => ball.clone(),
        _ => {
            return Err(Error::Unsupported(
                "more than one indicator constraint".into(),
            ))
        }
    };

    let (point, iterations, gradient_norm) = if parts.smooth.is_empty() {
        (feasible.project(x)?, 0, 0.0)
    } else {
        let objective = PenalizedObjective {
            terms: &parts.smooth,
            base: x.coords(),
        };
        let out = descent::minimize(
            &objective,
            &feasible,
            x.coords(),
            DescentOptions {
                stationarity: 0.1 * tol * STRONG_CONVEXITY,
                max_iter,
            },
        );
        if !out.converged {
            return Err(Error::NonConvergence {
                iterations: out.iterations,
                residual: out.stationarity,
            });
        }
        (SpherePoint::from_unit(out.point), out.iterations, out.stationarity)
    };

    let objective_value = resolvent_objective(f, x, &point)?
        .finite()
        .ok_or_else(|| Error::Precondition("resolvent landed outside dom f".into()))?;
    Ok(ResolventResult {
        point,
        objective_value,
        iterations,
        gradient_norm_at_exit: gradient_norm,
    })
}
