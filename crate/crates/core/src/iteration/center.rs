//! Minimax (Chebyshev) center of a sequence tail on the sphere.
//!
//! Minimizing `max_k d(x_k, y)` over unit `y` is the same as maximizing
//! `min_k <x_k, y>`, whose optimum is `v*/|v*|` for the minimum-norm point
//! `v*` of the convex hull of the `x_k`. A log-sum-exp smoothing with an
//! increasing sharpness schedule supplies a warm start; Wolfe's
//! minimum-norm-point algorithm then solves the hull problem exactly, in
//! coordinates translated to the warm start so that tiny tails keep full
//! relative precision.

use std::f64::consts::FRAC_PI_2;

use serde::{Deserialize, Serialize};

use crate::descent::{self, DescentOptions, SmoothObjective};
use crate::error::{Error, Result};
use crate::linalg;
use crate::sphere::{dist, Ball, SpherePoint};

const SHARPNESS_START: f64 = 10.0;
const SHARPNESS_END: f64 = 1e4;
const SMOOTHING_MAX_ITER: usize = 500;
const WOLFE_MAX_ITER: usize = 10_000;
/// Relative gap at which the hull problem counts as solved.
const WOLFE_REL_GAP: f64 = 1e-14;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AsymptoticCenterEstimate {
    pub center: SpherePoint,
    /// `max_{k ≥ m} d(x_k, center)`.
    pub radius: f64,
    pub tail_start: usize,
    pub window: usize,
}

/// `β⁻¹ log Σ exp(β (1 − <x_k, y>))`, a smooth upper bound of
/// `max_k (1 − cos d(x_k, y))`.
struct SoftMax<'a> {
    points: &'a [Vec<f64>],
    beta: f64,
}

impl SoftMax<'_> {
    fn gaps(&self, y: &[f64]) -> Vec<f64> {
        self.points.iter().map(|p| 0.5 * linalg::dist_sq(p, y)).collect()
    }
}

impl SmoothObjective for SoftMax<'_> {
    fn value(&self, y: &[f64]) -> f64 {
        let h = self.gaps(y);
        let top = h.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let s: f64 = h.iter().map(|v| (self.beta * (v - top)).exp()).sum();
        top + s.ln() / self.beta
    }

    fn gradient(&self, y: &[f64]) -> Vec<f64> {
        let h = self.gaps(y);
        let top = h.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let w: Vec<f64> = h.iter().map(|v| (self.beta * (v - top)).exp()).collect();
        let total: f64 = w.iter().sum();
        let mut g = vec![0.0; y.len()];
        for (p, wk) in self.points.iter().zip(&w) {
            // ∇(1 − <p, y>) = −(p − <p, y> y)
            linalg::axpy(&mut g, -wk / total, &linalg::tangent_toward(y, p));
        }
        g
    }
}

fn warm_start(points: &[Vec<f64>], tol: f64) -> Vec<f64> {
    let base = &points[0];
    let spread = points.iter().map(|p| linalg::arc(base, p)).fold(0.0, f64::max);
    if spread == 0.0 {
        return base.clone();
    }
    // the minimax center is within `spread` of any tail point
    let Ok(region) = Ball::new(
        SpherePoint::from_unit(base.clone()),
        spread.min(FRAC_PI_2 - 1e-6),
    ) else {
        return base.clone();
    };
    let mut y = base.clone();
    let mut beta = SHARPNESS_START;
    loop {
        let out = descent::minimize(
            &SoftMax { points, beta },
            &region,
            &y,
            DescentOptions {
                stationarity: tol,
                max_iter: SMOOTHING_MAX_ITER,
            },
        );
        y = out.point;
        if beta >= SHARPNESS_END {
            return y;
        }
        beta = (2.0 * beta).min(SHARPNESS_END);
    }
}

struct Hull {
    /// `q_i = x_i − b`.
    q: Vec<Vec<f64>>,
    /// `s_i = |q_i|² = 2(1 − <x_i, b>)`.
    s: Vec<f64>,
}

struct HullPoint {
    /// `Σ λ_i q_i`; the hull point is `b + xt`.
    xt: Vec<f64>,
    /// `Σ λ_i s_i`.
    ls: f64,
    /// `1 − |b + xt|² = Σ λ_i s_i − |xt|²`.
    deficit: f64,
}

impl Hull {
    fn combine(&self, active: &[usize], lambda: &[f64]) -> HullPoint {
        let mut xt = vec![0.0; self.q[0].len()];
        let mut ls = 0.0;
        for (&i, &l) in active.iter().zip(lambda) {
            linalg::axpy(&mut xt, l, &self.q[i]);
            ls += l * self.s[i];
        }
        let deficit = ls - linalg::dot(&xt, &xt);
        HullPoint { xt, ls, deficit }
    }

    /// `|v|² − <v, x_j> = s_j/2 − <xt, q_j> − Σλs/2 + |xt|²` for `v = b + xt`:
    /// how far vertex `j` lies below the current supporting level.
    fn gap(&self, hp: &HullPoint, j: usize) -> f64 {
        0.5 * self.s[j] - linalg::dot(&hp.xt, &self.q[j]) - 0.5 * hp.ls + linalg::dot(&hp.xt, &hp.xt)
    }

    /// Minimizer of `|b + Σ μ_i q_i|²` over the affine hull of `active`:
    /// `2 G μ + ν 1 = s`, `Σ μ = 1`.
    fn affine_minimizer(&self, active: &[usize]) -> Option<Vec<f64>> {
        let k = active.len();
        let mut m = vec![vec![0.0; k + 1]; k + 1];
        let mut rhs = vec![0.0; k + 1];
        for (a, &i) in active.iter().enumerate() {
            for (c, &j) in active.iter().enumerate() {
                m[a][c] = 2.0 * linalg::dot(&self.q[i], &self.q[j]);
            }
            m[a][k] = 1.0;
            m[k][a] = 1.0;
            rhs[a] = self.s[i];
        }
        rhs[k] = 1.0;
        let mut sol = linalg::solve(m, rhs)?;
        sol.truncate(k);
        Some(sol)
    }
}

/// Wolfe's algorithm; returns the final hull point.
fn min_norm_point(hull: &Hull, tol_gap: f64) -> Result<HullPoint> {
    let n = hull.q.len();
    let farthest = (0..n)
        .max_by(|&a, &b| hull.s[a].total_cmp(&hull.s[b]))
        .expect("nonempty hull");
    let mut active = vec![farthest];
    let mut lambda = vec![1.0];

    for _ in 0..WOLFE_MAX_ITER {
        let hp = hull.combine(&active, &lambda);
        let (j, gap) = (0..n)
            .map(|j| (j, hull.gap(&hp, j)))
            .max_by(|a, b| a.1.total_cmp(&b.1))
            .expect("nonempty hull");
        if gap <= tol_gap || active.contains(&j) {
            return Ok(hp);
        }
        active.push(j);
        lambda.push(0.0);

        loop {
            let Some(mu) = hull.affine_minimizer(&active) else {
                // numerically dependent corral: the current combination is
                // still a hull point, and the radius certificate decides
                return Ok(hull.combine(&active, &lambda));
            };
            if mu.iter().all(|&m| m > 0.0) {
                lambda = mu;
                break;
            }
            let theta = lambda
                .iter()
                .zip(&mu)
                .filter(|(_, &m)| m <= 0.0)
                .map(|(&l, &m)| l / (l - m))
                .fold(f64::INFINITY, f64::min);
            for (l, m) in lambda.iter_mut().zip(&mu) {
                *l += theta * (m - *l);
            }
            // drop vertices whose weight hit zero (at least the blocking one)
            let blocking = lambda
                .iter()
                .enumerate()
                .min_by(|a, b| a.1.total_cmp(b.1))
                .map(|(i, _)| i)
                .expect("nonempty corral");
            let keep: Vec<bool> = lambda
                .iter()
                .enumerate()
                .map(|(i, &l)| i != blocking && l > 0.0)
                .collect();
            let mut k = 0;
            active.retain(|_| {
                k += 1;
                keep[k - 1]
            });
            let mut k = 0;
            lambda.retain(|_| {
                k += 1;
                keep[k - 1]
            });
            let total: f64 = lambda.iter().sum();
            lambda.iter_mut().for_each(|l| *l /= total);
        }
    }
    let hp = hull.combine(&active, &lambda);
    Err(Error::NonConvergence {
        iterations: WOLFE_MAX_ITER,
        residual: (0..n).map(|j| hull.gap(&hp, j)).fold(0.0, f64::max),
    })
}

/// The point minimizing `max_{k ≥ tail_start} d(x_k, ·)`, with attained radius.
///
/// The attained radius is certified within `tol` of the optimum; otherwise
/// a non-convergence error is returned.
pub fn asymptotic_center(points: &[SpherePoint], tail_start: usize, tol: f64) -> Result<AsymptoticCenterEstimate> {
    if points.is_empty() {
        return Err(Error::Empty("point sequence"));
    }
    if tail_start >= points.len() {
        return Err(Error::Precondition(format!(
            "tail start {tail_start} beyond sequence length {}",
            points.len()
        )));
    }
    if !(tol > 0.0 && tol.is_finite()) {
        return Err(Error::InvalidParameter(format!("tolerance {tol} must be positive")));
    }
    let tail = &points[tail_start..];
    for p in &tail[1..] {
        tail[0].check_same_dim(p)?;
    }
    let raw: Vec<Vec<f64>> = tail.iter().map(|p| p.coords().to_vec()).collect();

    let b = warm_start(&raw, tol);
    let q: Vec<Vec<f64>> = raw
        .iter()
        .map(|p| p.iter().zip(&b).map(|(x, y)| x - y).collect())
        .collect();
    let s: Vec<f64> = q.iter().map(|v| linalg::dot(v, v)).collect();
    let scale = s.iter().copied().fold(0.0, f64::max);
    let hull = Hull { q, s };

    let (center, lower) = if scale == 0.0 {
        (b, 0.0)
    } else {
        let hp = min_norm_point(&hull, WOLFE_REL_GAP * scale)?;
        if hp.deficit >= 1.0 - 1e-12 {
            return Err(Error::Precondition(
                "tail hull contains the origin: not spherically bounded".into(),
            ));
        }
        let v: Vec<f64> = b.iter().zip(&hp.xt).map(|(x, y)| x + y).collect();
        // optimal radius R* satisfies sin² R* = 1 − |v*|² = deficit
        (linalg::normalize(v), hp.deficit.max(0.0).sqrt().asin())
    };
    let center = SpherePoint::from_unit(center);
    let mut radius: f64 = 0.0;
    for p in tail {
        radius = radius.max(dist(p, &center)?);
    }
    if radius - lower > tol {
        return Err(Error::NonConvergence {
            iterations: WOLFE_MAX_ITER,
            residual: radius - lower,
        });
    }
    Ok(AsymptoticCenterEstimate {
        center,
        radius,
        tail_start,
        window: tail.len(),
    })
}

/// `π/2` minus the asymptotic-center radius of the tail; positive exactly
/// when the tail is spherically bounded. Tails whose hull contains the
/// origin get margin `0`.
pub fn spherical_boundedness_margin(points: &[SpherePoint], tail_start: usize) -> Result<f64> {
    match asymptotic_center(points, tail_start, crate::resolvent::DEFAULT_TOL) {
        Ok(est) => Ok(FRAC_PI_2 - est.radius),
        Err(Error::Precondition(msg)) if msg.contains("origin") => Ok(0.0),
        Err(e) => Err(e),
    }
}
