//! Projected Riemannian gradient descent on a spherical ball.
//!
//! Steps follow the geodesic against the Riemannian gradient and are pulled
//! back into the feasible ball by metric projection. The step size is found
//! by backtracking on the quadratic upper model
//! `F(y⁺) ≤ F(y) + <g, Δ> + |Δ|²/(2η)`, where `Δ = log_y(y⁺)`. Once the
//! predicted decrease is below floating-point resolution, a step is accepted
//! only if the gradient mapping contracts, so accuracy is governed by
//! gradient precision rather than by objective-value precision. The step
//! size grows only after a resolvable model test.

use crate::linalg;
use crate::sphere::Ball;

pub(crate) trait SmoothObjective {
    fn value(&self, y: &[f64]) -> f64;
    /// Riemannian gradient at `y`, in ambient coordinates.
    fn gradient(&self, y: &[f64]) -> Vec<f64>;
}

#[derive(Clone, Copy, Debug)]
pub(crate) struct DescentOptions {
    /// Stop once the gradient-mapping norm `d(y, y⁺)/η` falls below this.
    pub stationarity: f64,
    pub max_iter: usize,
}

#[derive(Clone, Debug)]
pub(crate) struct DescentOutcome {
    pub point: Vec<f64>,
    pub iterations: usize,
    pub stationarity: f64,
    pub converged: bool,
}

const MAX_BACKTRACKS: usize = 80;
const MAX_STEP_LENGTH: f64 = 0.5;
const MAX_STEP_SIZE: f64 = 1e3;

fn roundoff(a: f64, b: f64) -> f64 {
    16.0 * f64::EPSILON * (a.abs() + b.abs() + 1.0)
}

/// Projected geodesic step of size `eta`; returns the new point and `d(y, y⁺)`.
fn step(feasible: &Ball, y: &[f64], grad: &[f64], eta: f64) -> (Vec<f64>, Vec<f64>, f64) {
    let gnorm = linalg::norm(grad);
    let length = (eta * gnorm).min(MAX_STEP_LENGTH);
    let scale = if gnorm > 0.0 { -length / gnorm } else { 0.0 };
    let moved = linalg::exp(y, &linalg::scaled(grad, scale));
    let trial = feasible.project_raw(&moved);
    let delta = linalg::log(y, &trial);
    let dn = linalg::norm(&delta);
    (trial, delta, dn)
}

struct Accepted {
    point: Vec<f64>,
    value: f64,
    grad: Vec<f64>,
    stationarity: f64,
    eta: f64,
    certified: bool,
}

pub(crate) fn minimize<O: SmoothObjective>(
    objective: &O,
    feasible: &Ball,
    start: &[f64],
    options: DescentOptions,
) -> DescentOutcome {
    let mut y = feasible.project_raw(start);
    let mut value = objective.value(&y);
    let mut grad = objective.gradient(&y);
    let mut eta = 1.0;
    let mut stationarity = f64::INFINITY;

    for iteration in 1..=options.max_iter {
        let mut accepted = None;
        let mut trial_eta = eta;
        for _ in 0..MAX_BACKTRACKS {
            let (trial, delta, dn) = step(feasible, &y, &grad, trial_eta);
            if dn == 0.0 {
                accepted = Some(Accepted {
                    point: trial,
                    value,
                    grad: grad.clone(),
                    stationarity: 0.0,
                    eta: trial_eta,
                    certified: false,
                });
                break;
            }
            let trial_value = objective.value(&trial);
            let model = value + linalg::dot(&grad, &delta) + dn * dn / (2.0 * trial_eta);
            let slack = roundoff(value, trial_value);
            if value - model > 64.0 * slack {
                // the model decrease is resolvable in floating point: Armijo-type test
                if trial_value <= model {
                    let trial_grad = objective.gradient(&trial);
                    accepted = Some(Accepted {
                        point: trial,
                        value: trial_value,
                        grad: trial_grad,
                        stationarity: dn / trial_eta,
                        eta: trial_eta,
                        certified: true,
                    });
                    break;
                }
            } else {
                // below value resolution: require the gradient mapping to contract
                let trial_grad = objective.gradient(&trial);
                let (_, _, next_dn) = step(feasible, &trial, &trial_grad, trial_eta);
                if next_dn < dn {
                    accepted = Some(Accepted {
                        point: trial,
                        value: trial_value,
                        grad: trial_grad,
                        stationarity: dn / trial_eta,
                        eta: trial_eta,
                        certified: false,
                    });
                    break;
                }
            }
            trial_eta *= 0.5;
        }

        let Some(acc) = accepted else {
            return DescentOutcome {
                point: y,
                iterations: iteration,
                stationarity,
                converged: false,
            };
        };

        stationarity = acc.stationarity;
        y = acc.point;
        value = acc.value;
        grad = acc.grad;
        eta = if acc.certified {
            (acc.eta * 2.0).min(MAX_STEP_SIZE)
        } else {
            acc.eta
        };

        if stationarity <= options.stationarity {
            return DescentOutcome {
                point: y,
                iterations: iteration,
                stationarity,
                converged: true,
            };
        }
    }

    DescentOutcome {
        point: y,
        iterations: options.max_iter,
        stationarity,
        converged: false,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sphere::SpherePoint;

    /// `−<y, m>` restricted to the sphere; minimized at `m/|m|`.
    struct Linear(Vec<f64>);

    impl SmoothObjective for Linear {
        fn value(&self, y: &[f64]) -> f64 {
            -linalg::dot(y, &self.0)
        }
        fn gradient(&self, y: &[f64]) -> Vec<f64> {
            linalg::scaled(&linalg::project_tangent(y, &self.0), -1.0)
        }
    }

    fn opts() -> DescentOptions {
        DescentOptions {
            stationarity: 1e-13,
            max_iter: 10_000,
        }
    }

    #[test]
    fn finds_interior_minimizer_to_high_precision() {
        let ball = Ball::new(SpherePoint::basis(3, 0).unwrap(), 0.6).unwrap();
        let target = linalg::normalize(vec![1.0, 0.2, -0.1]);
        let out = minimize(&Linear(target.clone()), &ball, &[1.0, 0.0, 0.0], opts());
        assert!(out.converged, "{out:?}");
        assert!(linalg::arc(&out.point, &target) < 1e-12);
    }

    #[test]
    fn stops_on_the_boundary_for_outside_targets() {
        let ball = Ball::new(SpherePoint::basis(3, 0).unwrap(), 0.3).unwrap();
        let target = vec![0.5f64.cos(), 0.5f64.sin(), 0.0];
        let out = minimize(&Linear(target), &ball, &[1.0, 0.0, 0.0], opts());
        assert!(out.converged);
        let expected = [0.3f64.cos(), 0.3f64.sin(), 0.0];
        assert!(linalg::arc(&out.point, &expected) < 1e-12);
    }

    #[test]
    fn reports_non_convergence_when_capped() {
        let ball = Ball::new(SpherePoint::basis(3, 0).unwrap(), 0.6).unwrap();
        let target = linalg::normalize(vec![1.0, 0.5, 0.0]);
        let out = minimize(
            &Linear(target),
            &ball,
            &[1.0, 0.0, 0.0],
            DescentOptions {
                stationarity: 0.0,
                max_iter: 3,
            },
        );
        assert!(!out.converged);
        assert_eq!(out.iterations, 3);
    }
}
