//! The unit sphere S^n ⊂ R^{n+1} as a model CAT(1) space.
//!
//! Points are unit vectors in ambient coordinates. Distances are great-circle
//! arc lengths, geodesics are great-circle arcs, and closed balls of radius
//! below π/4 serve as the admissible working spaces: any two of their points
//! lie at distance `2r < π/2`, so every cosine of a distance is positive.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg;

/// Tolerance on `| |x| - 1 |` accepted when constructing a point from user data.
/// Accepted coordinates are renormalized, so stored points are unit to rounding.
pub const INPUT_NORM_TOL: f64 = 1e-9;

/// Slack added to ball radii in membership tests.
pub const MEMBERSHIP_SLACK: f64 = 1e-12;

/// Norm deviation attributable to rounding in a normalized vector.
const ROUNDOFF_NORM_TOL: f64 = 16.0 * f64::EPSILON;

/// Renormalizes unless `coords` is already unit up to rounding. Stored
/// points are fixed by this map, so serialized points parse back to
/// themselves bit for bit.
fn canonical(mut coords: Vec<f64>) -> Vec<f64> {
    for _ in 0..4 {
        if (linalg::norm(&coords) - 1.0).abs() <= ROUNDOFF_NORM_TOL {
            break;
        }
        coords = linalg::normalize(coords);
    }
    coords
}

/// Distances closer than this to π are treated as antipodal.
const ANTIPODAL_GAP: f64 = 1e-9;

/// A point of S^n stored as a unit vector in R^{n+1}.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct SpherePoint {
    coords: Vec<f64>,
}

impl SpherePoint {
    /// Builds a point from ambient coordinates whose norm is 1 within
    /// [`INPUT_NORM_TOL`]. The coordinates are renormalized unless they are
    /// already unit up to rounding.
    pub fn new(coords: Vec<f64>) -> Result<Self> {
        if coords.len() < 2 || coords.iter().any(|c| !c.is_finite()) {
            return Err(Error::DegenerateCoordinates);
        }
        let norm = linalg::norm(&coords);
        if (norm - 1.0).abs() > INPUT_NORM_TOL {
            return Err(Error::NotUnit { norm });
        }
        Ok(Self {
            coords: canonical(coords),
        })
    }

    /// Radially projects any nonzero finite vector onto the sphere.
    pub fn from_ambient(coords: Vec<f64>) -> Result<Self> {
        if coords.len() < 2 || coords.iter().any(|c| !c.is_finite()) {
            return Err(Error::DegenerateCoordinates);
        }
        let norm = linalg::norm(&coords);
        if norm == 0.0 || !norm.is_finite() {
            return Err(Error::NotUnit { norm });
        }
        Ok(Self {
            coords: canonical(linalg::normalize(coords)),
        })
    }

    /// The `index`-th standard basis vector of R^{ambient_dim}.
    pub fn basis(ambient_dim: usize, index: usize) -> Result<Self> {
        if ambient_dim < 2 || index >= ambient_dim {
            return Err(Error::InvalidParameter(format!(
                "basis vector {index} of R^{ambient_dim}"
            )));
        }
        let mut coords = vec![0.0; ambient_dim];
        coords[index] = 1.0;
        Ok(Self { coords })
    }

    /// Internal constructor for vectors already known to be unit length.
    pub(crate) fn from_unit(coords: Vec<f64>) -> Self {
        debug_assert!((linalg::norm(&coords) - 1.0).abs() < 1e-12);
        Self {
            coords: canonical(coords),
        }
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    /// Intrinsic dimension n of S^n.
    pub fn dimension(&self) -> usize {
        self.coords.len() - 1
    }

    pub fn ambient_dim(&self) -> usize {
        self.coords.len()
    }

    pub(crate) fn check_same_dim(&self, other: &SpherePoint) -> Result<()> {
        if self.coords.len() != other.coords.len() {
            return Err(Error::DimensionMismatch {
                left: self.coords.len(),
                right: other.coords.len(),
            });
        }
        Ok(())
    }

    /// Cosine of the distance to `other`, clamped to [-1, 1].
    pub fn cos_dist(&self, other: &SpherePoint) -> Result<f64> {
        self.check_same_dim(other)?;
        Ok(linalg::cos_arc(&self.coords, &other.coords))
    }
}

impl TryFrom<Vec<f64>> for SpherePoint {
    type Error = Error;

    fn try_from(coords: Vec<f64>) -> Result<Self> {
        Self::new(coords)
    }
}

impl From<SpherePoint> for Vec<f64> {
    fn from(p: SpherePoint) -> Self {
        p.coords
    }
}

/// Great-circle distance in [0, π].
///
/// Mathematically `acos(clamp(<x, y>))`; evaluated through the half-angle
/// form `2 atan2(|x - y|, |x + y|)` so that small distances keep full
/// relative precision.
pub fn dist(x: &SpherePoint, y: &SpherePoint) -> Result<f64> {
    x.check_same_dim(y)?;
    Ok(linalg::arc(&x.coords, &y.coords))
}

/// The point `α x ⊕ (1 − α) y`: arclength `(1 − α) d(x, y)` from `x` toward `y`.
pub fn geodesic_point(x: &SpherePoint, y: &SpherePoint, alpha: f64) -> Result<SpherePoint> {
    x.check_same_dim(y)?;
    if !(0.0..=1.0).contains(&alpha) {
        return Err(Error::InvalidParameter(format!(
            "geodesic weight {alpha} outside [0, 1]"
        )));
    }
    let d = linalg::arc(&x.coords, &y.coords);
    if d == 0.0 || alpha == 1.0 {
        return Ok(x.clone());
    }
    if d > PI - ANTIPODAL_GAP {
        return Err(Error::Antipodal);
    }
    if alpha == 0.0 {
        return Ok(y.clone());
    }
    let t = (1.0 - alpha) * d;
    let sd = d.sin();
    let wx = (d - t).sin() / sd;
    let wy = t.sin() / sd;
    let coords = x
        .coords
        .iter()
        .zip(&y.coords)
        .map(|(a, b)| wx * a + wy * b)
        .collect();
    Ok(SpherePoint::from_unit(linalg::normalize(coords)))
}

/// Tangent vector at `from` pointing toward `to`, of length `d(from, to)`.
pub fn log_map(from: &SpherePoint, to: &SpherePoint) -> Result<Vec<f64>> {
    from.check_same_dim(to)?;
    Ok(linalg::log(&from.coords, &to.coords))
}

/// Follows the geodesic leaving `from` with initial velocity `v`.
/// Components of `v` normal to the sphere at `from` are discarded.
pub fn exp_map(from: &SpherePoint, v: &[f64]) -> Result<SpherePoint> {
    if v.len() != from.ambient_dim() {
        return Err(Error::DimensionMismatch {
            left: from.ambient_dim(),
            right: v.len(),
        });
    }
    let tangent = linalg::project_tangent(&from.coords, v);
    Ok(SpherePoint::from_unit(linalg::exp(&from.coords, &tangent)))
}

/// `cos d(αx1 ⊕ (1−α)x2, x3) − α cos d(x1, x3) − (1−α) cos d(x2, x3)`.
///
/// The comparison inequality of CAT(1) spaces says this is nonnegative for
/// triangles of perimeter below 2π whose sides at `x3` are at most π/2.
pub fn comparison_residual(
    x1: &SpherePoint,
    x2: &SpherePoint,
    x3: &SpherePoint,
    alpha: f64,
) -> Result<f64> {
    x1.check_same_dim(x2)?;
    x1.check_same_dim(x3)?;
    let d12 = linalg::arc(&x1.coords, &x2.coords);
    let d13 = linalg::arc(&x1.coords, &x3.coords);
    let d23 = linalg::arc(&x2.coords, &x3.coords);
    if d12 + d23 + d13 >= 2.0 * PI {
        return Err(Error::Precondition(format!(
            "triangle perimeter {} is not below 2π",
            d12 + d23 + d13
        )));
    }
    if d13 > FRAC_PI_2 + MEMBERSHIP_SLACK || d23 > FRAC_PI_2 + MEMBERSHIP_SLACK {
        return Err(Error::Precondition(format!(
            "sides at the third vertex ({d13}, {d23}) exceed π/2"
        )));
    }
    let m = geodesic_point(x1, x2, alpha)?;
    let lhs = linalg::cos_arc(&m.coords, &x3.coords);
    let rhs = alpha * linalg::cos_arc(&x1.coords, &x3.coords)
        + (1.0 - alpha) * linalg::cos_arc(&x2.coords, &x3.coords);
    Ok(lhs - rhs)
}

/// Closed ball `S_ρ[c]` with `0 ≤ ρ < π/2`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawBall")]
pub struct Ball {
    center: SpherePoint,
    radius: f64,
}

#[derive(Deserialize)]
struct RawBall {
    center: SpherePoint,
    radius: f64,
}

impl TryFrom<RawBall> for Ball {
    type Error = Error;

    fn try_from(raw: RawBall) -> Result<Self> {
        Ball::new(raw.center, raw.radius)
    }
}

impl Ball {
    pub fn new(center: SpherePoint, radius: f64) -> Result<Self> {
        if !(0.0..FRAC_PI_2).contains(&radius) {
            return Err(Error::InvalidParameter(format!(
                "ball radius {radius} outside [0, π/2)"
            )));
        }
        Ok(Self { center, radius })
    }

    pub fn center(&self) -> &SpherePoint {
        &self.center
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    /// `d(x, center) ≤ radius + 1e-12`.
    pub fn contains(&self, x: &SpherePoint) -> Result<bool> {
        Ok(dist(x, &self.center)? <= self.radius + MEMBERSHIP_SLACK)
    }

    /// Whether this ball lies inside `other` (within the membership slack).
    pub fn is_inside(&self, other: &Ball) -> Result<bool> {
        Ok(dist(&self.center, &other.center)? + self.radius <= other.radius + MEMBERSHIP_SLACK)
    }

    /// Metric projection onto the ball: `x` itself when inside, otherwise the
    /// point at distance `radius` from the center on the geodesic toward `x`.
    pub fn project(&self, x: &SpherePoint) -> Result<SpherePoint> {
        self.center.check_same_dim(x)?;
        let d = linalg::arc(&self.center.coords, &x.coords);
        if d <= self.radius {
            return Ok(x.clone());
        }
        if d > PI - ANTIPODAL_GAP {
            return Err(Error::Antipodal);
        }
        Ok(SpherePoint::from_unit(self.project_raw(&x.coords)))
    }

    /// Projection on raw unit coordinates; the caller guarantees matching
    /// dimensions and a non-antipodal input.
    pub(crate) fn project_raw(&self, x: &[f64]) -> Vec<f64> {
        let c = &self.center.coords;
        let d = linalg::arc(c, x);
        if d <= self.radius {
            return x.to_vec();
        }
        let w = linalg::tangent_toward(c, x);
        let wn = linalg::norm(&w);
        linalg::exp(c, &linalg::scaled(&w, self.radius / wn))
    }
}

/// An admissible working space `S_r[p]` with `0 < r < π/4`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawBall", into = "Ball")]
pub struct AdmissibleCap {
    ball: Ball,
}

impl TryFrom<RawBall> for AdmissibleCap {
    type Error = Error;

    fn try_from(raw: RawBall) -> Result<Self> {
        AdmissibleCap::new(raw.center, raw.radius)
    }
}

impl From<AdmissibleCap> for Ball {
    fn from(cap: AdmissibleCap) -> Self {
        cap.ball
    }
}

impl AdmissibleCap {
    /// Default experiment radius, inside the window (π/8, π/4).
    pub const DEFAULT_RADIUS: f64 = 0.6;

    pub fn new(center: SpherePoint, radius: f64) -> Result<Self> {
        if !(radius > 0.0 && radius < FRAC_PI_4) {
            return Err(Error::InvalidParameter(format!(
                "cap radius {radius} outside (0, π/4)"
            )));
        }
        Ok(Self {
            ball: Ball { center, radius },
        })
    }

    /// The cap of radius 0.6 around the first basis vector of R^{ambient_dim}.
    pub fn standard(ambient_dim: usize) -> Result<Self> {
        Self::new(SpherePoint::basis(ambient_dim, 0)?, Self::DEFAULT_RADIUS)
    }

    pub fn center(&self) -> &SpherePoint {
        &self.ball.center
    }

    pub fn radius(&self) -> f64 {
        self.ball.radius
    }

    pub fn ambient_dim(&self) -> usize {
        self.ball.center.ambient_dim()
    }

    pub fn as_ball(&self) -> &Ball {
        &self.ball
    }

    pub fn contains(&self, x: &SpherePoint) -> Result<bool> {
        self.ball.contains(x)
    }

    /// Errors unless `x` lies in the cap.
    pub fn require(&self, x: &SpherePoint) -> Result<()> {
        let distance = dist(x, &self.ball.center)?;
        if distance > self.ball.radius + MEMBERSHIP_SLACK {
            return Err(Error::OutOfDomain {
                distance,
                radius: self.ball.radius,
            });
        }
        Ok(())
    }

    pub fn sampler(&self, seed: u64) -> CapSampler {
        CapSampler::new(self.ball.clone(), seed)
    }
}

/// Deterministic sampler of points in a ball or an annulus around its center.
///
/// A direction is drawn from an ambient Gaussian projected onto the tangent
/// space at the center; the arclength radius is uniform on the requested
/// interval; the sample is the geodesic endpoint.
#[derive(Clone, Debug)]
pub struct CapSampler {
    ball: Ball,
    rng: ChaCha8Rng,
}

impl CapSampler {
    pub fn new(ball: Ball, seed: u64) -> Self {
        Self {
            ball,
            rng: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    fn direction(&mut self) -> Vec<f64> {
        let c = self.ball.center.coords.clone();
        loop {
            let v: Vec<f64> = (0..c.len())
                .map(|_| self.rng.sample::<f64, _>(StandardNormal))
                .collect();
            let t = linalg::project_tangent(&c, &v);
            let n = linalg::norm(&t);
            if n > 1e-6 {
                return linalg::scaled(&t, 1.0 / n);
            }
        }
    }

    /// A point with `d(point, center)` uniform on `[0, radius]`.
    pub fn next_point(&mut self) -> SpherePoint {
        let r = self.ball.radius;
        self.annulus_point(0.0, r)
    }

    /// A point with `d(point, center)` uniform on `[inner, outer]`.
    pub fn annulus_point(&mut self, inner: f64, outer: f64) -> SpherePoint {
        let dir = self.direction();
        let t = if outer > inner {
            self.rng.random_range(inner..=outer)
        } else {
            inner
        };
        SpherePoint::from_unit(linalg::exp(&self.ball.center.coords, &linalg::scaled(&dir, t)))
    }

    /// Uniform draw from `[lo, hi)`.
    pub fn uniform(&mut self, lo: f64, hi: f64) -> f64 {
        self.rng.random_range(lo..hi)
    }
}

/// One deterministic sample from the cap.
pub fn sample_point(cap: &AdmissibleCap, seed: u64) -> SpherePoint {
    cap.sampler(seed).next_point()
}

/// The CAT(κ) model scale: distances `d_κ` with diameter bound `D_κ = π/√κ`.
///
/// Multiplying distances by `√κ` turns a CAT(κ) space with diameter below
/// `D_κ/2` into an admissible CAT(1) space.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct KappaModel {
    kappa: f64,
    sqrt_kappa: f64,
    diameter: f64,
}

impl TryFrom<f64> for KappaModel {
    type Error = Error;

    fn try_from(kappa: f64) -> Result<Self> {
        KappaModel::new(kappa)
    }
}

impl From<KappaModel> for f64 {
    fn from(m: KappaModel) -> Self {
        m.kappa
    }
}

impl KappaModel {
    pub fn new(kappa: f64) -> Result<Self> {
        if !(kappa > 0.0 && kappa.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "curvature {kappa} must be positive"
            )));
        }
        let sqrt_kappa = kappa.sqrt();
        Ok(Self {
            kappa,
            sqrt_kappa,
            diameter: PI / sqrt_kappa,
        })
    }

    /// The unit-curvature model, on which rescaling is the identity.
    pub fn unit() -> Self {
        Self::new(1.0).expect("κ = 1 is valid")
    }

    pub fn kappa(&self) -> f64 {
        self.kappa
    }

    pub fn sqrt_kappa(&self) -> f64 {
        self.sqrt_kappa
    }

    /// `D_κ = π / √κ`.
    pub fn diameter(&self) -> f64 {
        self.diameter
    }

    /// Maps a κ-model distance in `[0, D_κ]` to the unit-curvature distance `√κ d`.
    pub fn rescale_to_unit(&self, d_kappa: f64) -> Result<f64> {
        if !(0.0..=self.diameter).contains(&d_kappa) {
            return Err(Error::InvalidParameter(format!(
                "distance {d_kappa} outside [0, D_κ = {}]",
                self.diameter
            )));
        }
        Ok(self.sqrt_kappa * d_kappa)
    }

    /// Inverse of [`rescale_to_unit`](Self::rescale_to_unit).
    pub fn rescale_from_unit(&self, d_unit: f64) -> Result<f64> {
        if !(0.0..=PI).contains(&d_unit) {
            return Err(Error::InvalidParameter(format!(
                "unit distance {d_unit} outside [0, π]"
            )));
        }
        Ok(d_unit / self.sqrt_kappa)
    }

    /// Distance in the κ-model `(S^n, ρ/√κ)`.
    pub fn dist(&self, x: &SpherePoint, y: &SpherePoint) -> Result<f64> {
        Ok(dist(x, y)? / self.sqrt_kappa)
    }

    /// `cos(√κ d_κ(x, y))`, the cosine entering κ-scaled inequalities.
    pub fn unit_cos(&self, x: &SpherePoint, y: &SpherePoint) -> Result<f64> {
        Ok(self.rescale_to_unit(self.dist(x, y)?)?.cos())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(c: &[f64]) -> SpherePoint {
        SpherePoint::new(c.to_vec()).unwrap()
    }

    fn planar(t: f64) -> SpherePoint {
        p(&[t.cos(), t.sin(), 0.0])
    }

    #[test]
    fn dist_examples() {
        assert!((dist(&p(&[1., 0., 0.]), &p(&[0., 1., 0.])).unwrap() - FRAC_PI_2).abs() < 1e-15);
        assert_eq!(dist(&p(&[0., 0., 1.]), &p(&[0., 0., 1.])).unwrap(), 0.0);
        assert!((dist(&p(&[1., 0., 0.]), &planar(0.3)).unwrap() - 0.3).abs() < 1e-15);
    }

    #[test]
    fn dist_rejects_dimension_mismatch() {
        let err = dist(&p(&[1., 0.]), &p(&[1., 0., 0.])).unwrap_err();
        assert_eq!(err, Error::DimensionMismatch { left: 2, right: 3 });
    }

    #[test]
    fn construction_checks_norm() {
        assert!(matches!(
            SpherePoint::new(vec![1.0, 1.0]),
            Err(Error::NotUnit { .. })
        ));
        assert!(SpherePoint::new(vec![1.0]).is_err());
        assert!(SpherePoint::new(vec![f64::NAN, 0.0]).is_err());
        let q = SpherePoint::from_ambient(vec![3.0, 4.0]).unwrap();
        assert_eq!(q.coords(), &[0.6, 0.8]);
        assert!(SpherePoint::from_ambient(vec![0.0, 0.0]).is_err());
    }

    #[test]
    fn geodesic_examples() {
        let x = p(&[1., 0., 0.]);
        let y = p(&[0., 1., 0.]);
        let mid = geodesic_point(&x, &y, 0.5).unwrap();
        let h = 0.5f64.sqrt();
        assert!(linalg::dist_sq(mid.coords(), &[h, h, 0.0]).sqrt() < 1e-15);
        assert_eq!(geodesic_point(&x, &y, 1.0).unwrap(), x);

        let quarter = geodesic_point(&x, &y, 0.25).unwrap();
        let t = 3.0 * PI / 8.0;
        assert!(linalg::dist_sq(quarter.coords(), planar(t).coords()).sqrt() < 1e-15);
        // arclength oracle
        assert!((dist(&quarter, &x).unwrap() - t).abs() < 1e-10);
    }

    #[test]
    fn geodesic_rejects_antipodes_and_bad_weights() {
        let x = p(&[1., 0., 0.]);
        let y = p(&[-1., 0., 0.]);
        assert_eq!(geodesic_point(&x, &y, 0.5), Err(Error::Antipodal));
        assert!(geodesic_point(&x, &x, 1.5).is_err());
    }

    #[test]
    fn comparison_residual_examples() {
        let x = planar(0.2);
        assert!(comparison_residual(&x, &x, &x, 0.3).unwrap().abs() < 1e-15);

        let e1 = p(&[1., 0., 0.]);
        let e2 = p(&[0., 1., 0.]);
        let e3 = p(&[0., 0., 1.]);
        assert!(comparison_residual(&e1, &e2, &e3, 0.5).unwrap().abs() < 1e-15);

        let expected = FRAC_PI_4.cos() - 0.5 * (1.0 + FRAC_PI_2.cos());
        let r = comparison_residual(&e1, &e2, &e1, 0.5).unwrap();
        assert!((r - expected).abs() < 1e-15);
        assert!(r > 0.0);
    }

    #[test]
    fn comparison_residual_preconditions() {
        let e1 = p(&[1., 0., 0.]);
        let e2 = p(&[0., 1., 0.]);
        let far = p(&[-1., 0., 0.]);
        assert!(matches!(
            comparison_residual(&e1, &e2, &far, 0.5),
            Err(Error::Precondition(_))
        ));
    }

    #[test]
    fn cap_membership() {
        let cap = AdmissibleCap::new(p(&[1., 0., 0.]), 0.6).unwrap();
        assert!(cap.contains(cap.center()).unwrap());
        assert!(!cap.contains(&p(&[0., 1., 0.])).unwrap());
        assert!(cap.contains(&planar(0.6)).unwrap());
        assert!(AdmissibleCap::new(p(&[1., 0., 0.]), FRAC_PI_4).is_err());
        assert!(AdmissibleCap::new(p(&[1., 0., 0.]), 0.0).is_err());
    }

    #[test]
    fn projection_onto_ball() {
        let ball = Ball::new(p(&[1., 0., 0.]), 0.3).unwrap();
        let inside = planar(0.1);
        assert_eq!(ball.project(&inside).unwrap(), inside);
        let proj = ball.project(&planar(0.5)).unwrap();
        assert!(linalg::dist_sq(proj.coords(), planar(0.3).coords()).sqrt() < 1e-15);
        assert_eq!(ball.project(&proj).unwrap(), proj);
    }

    #[test]
    fn projection_matches_grid_argmin() {
        // dense grid over the ball in geodesic polar coordinates
        let ball = Ball::new(p(&[1., 0., 0.]), 0.3).unwrap();
        let x = planar(0.5);
        let mut best = (f64::INFINITY, ball.center().clone());
        let n = 400;
        for i in 0..=n {
            let rho = 0.3 * i as f64 / n as f64;
            for j in 0..720 {
                let phi = 2.0 * PI * j as f64 / 720.0;
                let v = [0.0, rho * phi.cos(), rho * phi.sin()];
                let y = exp_map(ball.center(), &v).unwrap();
                let d = dist(&y, &x).unwrap();
                if d < best.0 {
                    best = (d, y);
                }
            }
        }
        let proj = ball.project(&x).unwrap();
        assert!(dist(&proj, &best.1).unwrap() < 1e-3);
        assert!(dist(&proj, &x).unwrap() <= best.0 + 1e-15);
    }

    #[test]
    fn sampling_is_deterministic_and_inside() {
        let cap = AdmissibleCap::standard(3).unwrap();
        assert_eq!(sample_point(&cap, 7), sample_point(&cap, 7));
        assert_ne!(sample_point(&cap, 7), sample_point(&cap, 8));
        let mut s = cap.sampler(1);
        let pts: Vec<_> = (0..10_000).map(|_| s.next_point()).collect();
        assert!(pts.iter().all(|x| cap.contains(x).unwrap()));
        let mut max_pair: f64 = 0.0;
        for (i, a) in pts.iter().enumerate() {
            for b in &pts[i + 1..] {
                max_pair = max_pair.max(linalg::arc(a.coords(), b.coords()));
            }
        }
        assert!(max_pair > 0.9 * 2.0 * cap.radius(), "spread {max_pair}");
    }

    #[test]
    fn annulus_samples_respect_bounds() {
        let cap = AdmissibleCap::standard(4).unwrap();
        let mut s = cap.sampler(3);
        for _ in 0..1000 {
            let x = s.annulus_point(0.4, 0.6);
            let d = dist(&x, cap.center()).unwrap();
            assert!((0.4 - 1e-12..=0.6 + 1e-12).contains(&d));
        }
    }

    #[test]
    fn kappa_rescaling_examples() {
        let unit = KappaModel::new(1.0).unwrap();
        assert_eq!(unit.rescale_to_unit(0.4).unwrap(), 0.4);
        let four = KappaModel::new(4.0).unwrap();
        assert!((four.rescale_to_unit(FRAC_PI_4).unwrap() - FRAC_PI_2).abs() < 1e-15);
        assert!((four.diameter() * four.sqrt_kappa() - PI).abs() < 1e-12);
        let quarter = KappaModel::new(0.25).unwrap();
        assert_eq!(quarter.rescale_to_unit(1.0).unwrap(), 0.5);
        assert!(four.rescale_to_unit(-0.1).is_err());
        assert!(four.rescale_to_unit(four.diameter() + 1e-9).is_err());
        assert!(KappaModel::new(0.0).is_err());
    }

    #[test]
    fn serde_shapes() {
        let cap = AdmissibleCap::standard(3).unwrap();
        let json = serde_json::to_string(&cap).unwrap();
        assert_eq!(json, r#"{"center":[1.0,0.0,0.0],"radius":0.6}"#);
        let back: AdmissibleCap = serde_json::from_str(&json).unwrap();
        assert_eq!(back, cap);
        assert!(serde_json::from_str::<AdmissibleCap>(r#"{"center":[1,0,0],"radius":0.9}"#).is_err());
        assert!(serde_json::from_str::<SpherePoint>("[2.0, 0.0]").is_err());
    }
}
