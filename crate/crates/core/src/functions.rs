//! Proper lower semicontinuous geodesically convex functions on a cap.
//!
//! Every smooth catalog member has the form `φ(<y, a>)` for an anchor `a`,
//! which gives closed-form values, directional derivatives and Riemannian
//! gradients `φ'(<y, a>) (a − <y, a> y)`.

use std::cmp::Ordering;
use std::f64::consts::FRAC_PI_2;
use std::fmt;
use std::ops::{Add, Mul};

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::linalg;
use crate::sphere::{dist, AdmissibleCap, Ball, SpherePoint, MEMBERSHIP_SLACK};

/// A value in `(−∞, +∞]`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum ExtendedReal {
    Finite(f64),
    PosInfinity,
}

impl ExtendedReal {
    pub fn is_finite(&self) -> bool {
        matches!(self, ExtendedReal::Finite(_))
    }

    pub fn finite(&self) -> Option<f64> {
        match *self {
            ExtendedReal::Finite(v) => Some(v),
            ExtendedReal::PosInfinity => None,
        }
    }

    /// Scales by a nonnegative weight, with `0 · ∞ = 0`.
    pub fn weighted(self, weight: f64) -> Self {
        debug_assert!(weight >= 0.0);
        match self {
            _ if weight == 0.0 => ExtendedReal::Finite(0.0),
            ExtendedReal::Finite(v) => ExtendedReal::Finite(weight * v),
            ExtendedReal::PosInfinity => ExtendedReal::PosInfinity,
        }
    }
}

impl Add for ExtendedReal {
    type Output = ExtendedReal;

    fn add(self, rhs: Self) -> Self {
        match (self, rhs) {
            (ExtendedReal::Finite(a), ExtendedReal::Finite(b)) => ExtendedReal::Finite(a + b),
            _ => ExtendedReal::PosInfinity,
        }
    }
}

impl Mul<f64> for ExtendedReal {
    type Output = ExtendedReal;

    fn mul(self, weight: f64) -> Self {
        self.weighted(weight)
    }
}

impl PartialOrd for ExtendedReal {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        match (self, other) {
            (ExtendedReal::Finite(a), ExtendedReal::Finite(b)) => a.partial_cmp(b),
            (ExtendedReal::Finite(_), ExtendedReal::PosInfinity) => Some(Ordering::Less),
            (ExtendedReal::PosInfinity, ExtendedReal::Finite(_)) => Some(Ordering::Greater),
            (ExtendedReal::PosInfinity, ExtendedReal::PosInfinity) => Some(Ordering::Equal),
        }
    }
}

impl fmt::Display for ExtendedReal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ExtendedReal::Finite(v) => write!(f, "{v}"),
            ExtendedReal::PosInfinity => f.write_str("+inf"),
        }
    }
}

/// Finite values serialize as numbers, `+∞` as the string `"+inf"`.
impl Serialize for ExtendedReal {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            ExtendedReal::Finite(v) => s.serialize_f64(*v),
            ExtendedReal::PosInfinity => s.serialize_str("+inf"),
        }
    }
}

impl<'de> Deserialize<'de> for ExtendedReal {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Repr {
            Num(f64),
            Str(String),
        }
        match Repr::deserialize(d)? {
            Repr::Num(v) => Ok(ExtendedReal::Finite(v)),
            Repr::Str(s) if s == "+inf" => Ok(ExtendedReal::PosInfinity),
            Repr::Str(s) => Err(serde::de::Error::custom(format!("bad extended real {s:?}"))),
        }
    }
}

fn check_penalty_arg(t: f64) -> Result<()> {
    if !(0.0..FRAC_PI_2).contains(&t) {
        return Err(Error::InvalidParameter(format!(
            "penalty argument {t} outside [0, π/2)"
        )));
    }
    Ok(())
}

/// The resolvent penalty kernel `tan t · sin t` on `[0, π/2)`.
pub fn penalty(t: f64) -> Result<f64> {
    check_penalty_arg(t)?;
    Ok(t.tan() * t.sin())
}

/// `d/dt (tan t sin t) = sin t (1 + 1/cos² t)`.
pub fn penalty_derivative(t: f64) -> Result<f64> {
    check_penalty_arg(t)?;
    let c = t.cos();
    Ok(t.sin() * (1.0 + 1.0 / (c * c)))
}

/// Weighted term of a [`ConvexFunctional::WeightedSum`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WeightedTerm {
    pub weight: f64,
    pub functional: ConvexFunctional,
}

/// Catalog of convex functionals with closed-form evaluation.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ConvexFunctional {
    /// `0` on the ball, `+∞` outside.
    IndicatorBall { anchor: SpherePoint, radius: f64 },
    /// `tan d(y, a) · sin d(y, a)`; unique minimizer `a`.
    PullToPoint { anchor: SpherePoint },
    /// `−cos d(y, a)`; unique minimizer `a`.
    NegCosDist { anchor: SpherePoint },
    /// `Σ w_i f_i` with `w_i ≥ 0`. The empty sum is the zero function.
    WeightedSum { terms: Vec<WeightedTerm> },
}

/// Smooth scalar profiles `φ` of the inner product `c = <y, a>`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub(crate) enum Profile {
    /// `φ(c) = 1/c − c = tan t sin t` for `c = cos t`.
    TanSin,
    /// `φ(c) = −c`.
    NegCos,
}

impl Profile {
    /// Value from `h = 1 − c = |y − a|²/2`, which is accurate for nearby points.
    pub(crate) fn value_from_gap(self, h: f64) -> f64 {
        let c = 1.0 - h;
        match self {
            Profile::TanSin => h * (2.0 - h) / c,
            Profile::NegCos => -c,
        }
    }

    pub(crate) fn slope(self, c: f64) -> f64 {
        match self {
            Profile::TanSin => -1.0 / (c * c) - 1.0,
            Profile::NegCos => -1.0,
        }
    }
}

/// A smooth weighted term `w φ(<y, a>)`.
#[derive(Clone, Debug, PartialEq)]
pub(crate) struct SmoothTerm {
    pub weight: f64,
    pub profile: Profile,
    pub anchor: Vec<f64>,
}

impl SmoothTerm {
    pub(crate) fn value(&self, y: &[f64]) -> f64 {
        self.weight * self.profile.value_from_gap(0.5 * linalg::dist_sq(y, &self.anchor))
    }

    /// Adds `w φ'(c) (a − c y)` to `grad`.
    pub(crate) fn add_gradient(&self, y: &[f64], grad: &mut [f64]) {
        let c = linalg::cos_arc(y, &self.anchor);
        let t = linalg::tangent_toward(y, &self.anchor);
        linalg::axpy(grad, self.weight * self.profile.slope(c), &t);
    }
}

/// Flattened view of a functional: smooth terms plus indicator constraints.
#[derive(Clone, Debug, Default)]
pub(crate) struct Decomposition {
    pub smooth: Vec<SmoothTerm>,
    pub constraints: Vec<Ball>,
}

impl ConvexFunctional {
    pub fn indicator_ball(anchor: SpherePoint, radius: f64) -> Result<Self> {
        Ball::new(anchor.clone(), radius)?;
        Ok(Self::IndicatorBall { anchor, radius })
    }

    pub fn pull_to_point(anchor: SpherePoint) -> Self {
        Self::PullToPoint { anchor }
    }

    pub fn neg_cos_dist(anchor: SpherePoint) -> Self {
        Self::NegCosDist { anchor }
    }

    pub fn weighted_sum(terms: Vec<(f64, ConvexFunctional)>) -> Result<Self> {
        let terms = terms
            .into_iter()
            .map(|(weight, functional)| {
                if !(weight >= 0.0 && weight.is_finite()) {
                    return Err(Error::InvalidParameter(format!("weight {weight} must be >= 0")));
                }
                Ok(WeightedTerm { weight, functional })
            })
            .collect::<Result<_>>()?;
        Ok(Self::WeightedSum { terms })
    }

    /// The zero function, i.e. the empty weighted sum.
    pub fn zero() -> Self {
        Self::WeightedSum { terms: Vec::new() }
    }

    pub fn kind_name(&self) -> &'static str {
        match self {
            Self::IndicatorBall { .. } => "indicator_ball",
            Self::PullToPoint { .. } => "pull_to_point",
            Self::NegCosDist { .. } => "neg_cos_dist",
            Self::WeightedSum { .. } => "weighted_sum",
        }
    }

    /// Checks that the functional is a proper convex function on `cap`:
    /// anchors inside the cap, indicator balls inside the cap, weights
    /// finite and nonnegative, dimensions consistent.
    pub fn validate(&self, cap: &AdmissibleCap) -> Result<()> {
        match self {
            Self::IndicatorBall { anchor, radius } => {
                let ball = Ball::new(anchor.clone(), *radius)?;
                if !ball.is_inside(cap.as_ball())? {
                    return Err(Error::InvalidParameter(format!(
                        "indicator ball (radius {radius}) is not inside the working cap"
                    )));
                }
                Ok(())
            }
            Self::PullToPoint { anchor } | Self::NegCosDist { anchor } => cap.require(anchor),
            Self::WeightedSum { terms } => terms.iter().try_for_each(|t| {
                if !(t.weight >= 0.0 && t.weight.is_finite()) {
                    return Err(Error::InvalidParameter(format!(
                        "weight {} must be >= 0",
                        t.weight
                    )));
                }
                t.functional.validate(cap)
            }),
        }
    }

    pub fn evaluate(&self, y: &SpherePoint) -> Result<ExtendedReal> {
        match self {
            Self::IndicatorBall { anchor, radius } => {
                if dist(y, anchor)? <= radius + MEMBERSHIP_SLACK {
                    Ok(ExtendedReal::Finite(0.0))
                } else {
                    Ok(ExtendedReal::PosInfinity)
                }
            }
            Self::PullToPoint { anchor } => {
                let t = dist(y, anchor)?;
                Ok(ExtendedReal::Finite(penalty(t)?))
            }
            Self::NegCosDist { anchor } => Ok(ExtendedReal::Finite(-y.cos_dist(anchor)?)),
            Self::WeightedSum { terms } => terms.iter().try_fold(ExtendedReal::Finite(0.0), |acc, t| {
                Ok(acc + t.functional.evaluate(y)?.weighted(t.weight))
            }),
        }
    }

    /// One-sided derivative of `s ↦ f(c(s))` at `s = 0`, where `c` is the
    /// unit-speed geodesic from `y` toward `toward`.
    ///
    /// For an indicator the value is `0` while the geodesic stays in the
    /// ball and `+∞` when it leaves immediately (or `y` is already outside).
    pub fn directional_derivative(&self, y: &SpherePoint, toward: &SpherePoint) -> Result<ExtendedReal> {
        y.check_same_dim(toward)?;
        let w = linalg::tangent_toward(y.coords(), toward.coords());
        let wn = linalg::norm(&w);
        if wn == 0.0 {
            return Err(Error::Precondition(
                "direction point coincides with the base point".into(),
            ));
        }
        let u = linalg::scaled(&w, 1.0 / wn);
        self.derivative_along(y, &u)
    }

    fn derivative_along(&self, y: &SpherePoint, u: &[f64]) -> Result<ExtendedReal> {
        match self {
            Self::IndicatorBall { anchor, radius } => {
                y.check_same_dim(anchor)?;
                let d = dist(y, anchor)?;
                if d > radius + MEMBERSHIP_SLACK {
                    return Ok(ExtendedReal::PosInfinity);
                }
                if d < radius - MEMBERSHIP_SLACK {
                    return Ok(ExtendedReal::Finite(0.0));
                }
                // on the boundary: d/ds <c(s), anchor> = <u, anchor> must be positive to stay inside
                if linalg::dot(u, anchor.coords()) > 0.0 {
                    Ok(ExtendedReal::Finite(0.0))
                } else {
                    Ok(ExtendedReal::PosInfinity)
                }
            }
            Self::PullToPoint { anchor } => {
                y.check_same_dim(anchor)?;
                let c = y.cos_dist(anchor)?;
                let t = linalg::tangent_toward(y.coords(), anchor.coords());
                Ok(ExtendedReal::Finite(Profile::TanSin.slope(c) * linalg::dot(u, &t)))
            }
            Self::NegCosDist { anchor } => {
                y.check_same_dim(anchor)?;
                let t = linalg::tangent_toward(y.coords(), anchor.coords());
                Ok(ExtendedReal::Finite(-linalg::dot(u, &t)))
            }
            Self::WeightedSum { terms } => terms.iter().try_fold(ExtendedReal::Finite(0.0), |acc, t| {
                Ok(acc + t.functional.derivative_along(y, u)?.weighted(t.weight))
            }),
        }
    }

    /// A minimizer over `cap` when one is available in closed form.
    ///
    /// Every smooth catalog term is an increasing function of the distance to
    /// its anchor, so when all smooth terms share one anchor `a` the argmin
    /// over the feasible ball is the projection of `a`. With no smooth terms
    /// any feasible point minimizes and the feasible ball's center is
    /// returned. Otherwise `None`.
    pub fn known_minimizer(&self, cap: &AdmissibleCap) -> Result<Option<SpherePoint>> {
        let parts = self.decompose()?;
        let feasible = match parts.constraints.as_slice() {
            [] => cap.as_ball().clone(),
            [ball] => ball.clone(),
            _ => return Ok(None),
        };
        let Some(first) = parts.smooth.first() else {
            return Ok(Some(feasible.center().clone()));
        };
        if parts.smooth.iter().any(|t| t.anchor != first.anchor) {
            return Ok(None);
        }
        let anchor = SpherePoint::new(first.anchor.clone())?;
        Ok(Some(feasible.project(&anchor)?))
    }

    /// Splits into smooth terms and indicator constraints, dropping
    /// zero-weight terms (`0 · f = 0`).
    pub(crate) fn decompose(&self) -> Result<Decomposition> {
        let mut out = Decomposition::default();
        self.decompose_into(1.0, &mut out)?;
        Ok(out)
    }

    fn decompose_into(&self, weight: f64, out: &mut Decomposition) -> Result<()> {
        if weight == 0.0 {
            return Ok(());
        }
        match self {
            Self::IndicatorBall { anchor, radius } => {
                out.constraints.push(Ball::new(anchor.clone(), *radius)?)
            }
            Self::PullToPoint { anchor } => out.smooth.push(SmoothTerm {
                weight,
                profile: Profile::TanSin,
                anchor: anchor.coords().to_vec(),
            }),
            Self::NegCosDist { anchor } => out.smooth.push(SmoothTerm {
                weight,
                profile: Profile::NegCos,
                anchor: anchor.coords().to_vec(),
            }),
            Self::WeightedSum { terms } => {
                for t in terms {
                    t.functional.decompose_into(weight * t.weight, out)?;
                }
            }
        }
        Ok(())
    }
}
