//! Self-maps of an admissible cap: resolvents, ball projections, the
//! discontinuous nonspreading mapping built from three concentric balls,
//! and compositions.

use std::f64::consts::{FRAC_PI_4, FRAC_PI_8};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::functions::ConvexFunctional;
use crate::resolvent::{self, DEFAULT_TOL};
use crate::sphere::{dist, exp_map, log_map, AdmissibleCap, Ball, SpherePoint};

/// Anything that maps a cap into itself. Implement this to run the property
/// checkers and iteration drivers on a custom mapping.
pub trait SelfMap {
    fn domain(&self) -> &AdmissibleCap;
    fn apply(&self, x: &SpherePoint) -> Result<SpherePoint>;
    /// A fixed point known in closed form, if any.
    fn known_fixed_point(&self) -> Result<Option<SpherePoint>> {
        Ok(None)
    }
}

impl<T: SelfMap + ?Sized> SelfMap for &T {
    fn domain(&self) -> &AdmissibleCap {
        (**self).domain()
    }

    fn apply(&self, x: &SpherePoint) -> Result<SpherePoint> {
        (**self).apply(x)
    }

    fn known_fixed_point(&self) -> Result<Option<SpherePoint>> {
        (**self).known_fixed_point()
    }
}

fn default_tol() -> f64 {
    DEFAULT_TOL
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum MappingKind {
    Identity,
    /// `R_f`, solved to geodesic accuracy `tol`.
    ResolventOf {
        functional: ConvexFunctional,
        #[serde(default = "default_tol")]
        tol: f64,
    },
    ProjectionOnto { ball: Ball },
    /// `T x = p` on `S_{π/8}[p]` and `T x = P_B x` elsewhere in `S_r[p]`,
    /// where `B = S_{δπ/8}[p]`.
    #[serde(rename = "example_3_2")]
    Example32 { anchor: SpherePoint, radius: f64, delta: f64 },
    /// Applied left to right.
    Composition { steps: Vec<MappingKind> },
}

impl MappingKind {
    pub fn name(&self) -> &'static str {
        match self {
            Self::Identity => "identity",
            Self::ResolventOf { .. } => "resolvent_of",
            Self::ProjectionOnto { .. } => "projection_onto",
            Self::Example32 { .. } => "example_3_2",
            Self::Composition { .. } => "composition",
        }
    }
}

/// `C_z = cos d(Tz, z)`.
#[derive(Clone, Copy, Debug, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(transparent)]
pub struct DisplacementCosine(f64);

impl DisplacementCosine {
    pub fn value(self) -> f64 {
        self.0
    }
}

/// `cos(π/8) ≤ cos²(δπ/8)`, both sides evaluated.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Example32Feasibility {
    pub delta: f64,
    pub lhs: f64,
    pub rhs: f64,
    pub holds: bool,
}

pub fn example_3_2_feasibility(delta: f64) -> Example32Feasibility {
    let lhs = FRAC_PI_8.cos();
    let rhs = (delta * FRAC_PI_8).cos().powi(2);
    Example32Feasibility {
        delta,
        lhs,
        rhs,
        holds: lhs <= rhs,
    }
}

fn check_example_params(radius: f64, delta: f64) -> Result<()> {
    if !(radius > FRAC_PI_8 && radius < FRAC_PI_4) {
        return Err(Error::InvalidParameter(format!(
            "radius {radius} outside (π/8, π/4)"
        )));
    }
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::InvalidParameter(format!("delta {delta} outside (0, 1)")));
    }
    let feas = example_3_2_feasibility(delta);
    if !feas.holds {
        return Err(Error::InvalidParameter(format!(
            "cos(π/8) = {} exceeds cos²(δπ/8) = {}",
            feas.lhs, feas.rhs
        )));
    }
    Ok(())
}

/// A validated mapping of `domain` into itself.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawMapping")]
pub struct MappingHandle {
    kind: MappingKind,
    domain: AdmissibleCap,
}

#[derive(Deserialize)]
struct RawMapping {
    kind: MappingKind,
    domain: AdmissibleCap,
}

impl TryFrom<RawMapping> for MappingHandle {
    type Error = Error;

    fn try_from(raw: RawMapping) -> Result<Self> {
        MappingHandle::new(raw.kind, raw.domain)
    }
}

impl MappingHandle {
    pub fn new(kind: MappingKind, domain: AdmissibleCap) -> Result<Self> {
        validate_kind(&kind, &domain)?;
        Ok(Self { kind, domain })
    }

    pub fn identity(domain: AdmissibleCap) -> Self {
        Self {
            kind: MappingKind::Identity,
            domain,
        }
    }

    pub fn resolvent_of(functional: ConvexFunctional, domain: AdmissibleCap) -> Result<Self> {
        Self::new(
            MappingKind::ResolventOf {
                functional,
                tol: DEFAULT_TOL,
            },
            domain,
        )
    }

    pub fn projection_onto(ball: Ball, domain: AdmissibleCap) -> Result<Self> {
        Self::new(MappingKind::ProjectionOnto { ball }, domain)
    }

    /// The mapping on `X = S_r[p]` that collapses `C = S_{π/8}[p]` to `p`
    /// and projects the rest onto `B = S_{δπ/8}[p]`.
    pub fn example_3_2(anchor: SpherePoint, radius: f64, delta: f64) -> Result<Self> {
        check_example_params(radius, delta)?;
        let domain = AdmissibleCap::new(anchor.clone(), radius)?;
        Self::new(
            MappingKind::Example32 {
                anchor,
                radius,
                delta,
            },
            domain,
        )
    }

    pub fn compose(steps: Vec<MappingKind>, domain: AdmissibleCap) -> Result<Self> {
        Self::new(MappingKind::Composition { steps }, domain)
    }

    pub fn kind(&self) -> &MappingKind {
        &self.kind
    }

    pub fn domain(&self) -> &AdmissibleCap {
        &self.domain
    }

    pub fn apply(&self, x: &SpherePoint) -> Result<SpherePoint> {
        self.domain.require(x)?;
        apply_kind(&self.kind, &self.domain, x)
    }

    pub fn displacement_cosine(&self, z: &SpherePoint) -> Result<DisplacementCosine> {
        let tz = self.apply(z)?;
        Ok(DisplacementCosine(tz.cos_dist(z)?))
    }

    /// A fixed point known in closed form, if any.
    pub fn known_fixed_point(&self) -> Result<Option<SpherePoint>> {
        known_fixed_point(&self.kind, &self.domain)
    }
}

impl SelfMap for MappingHandle {
    fn domain(&self) -> &AdmissibleCap {
        &self.domain
    }

    fn apply(&self, x: &SpherePoint) -> Result<SpherePoint> {
        MappingHandle::apply(self, x)
    }

    fn known_fixed_point(&self) -> Result<Option<SpherePoint>> {
        MappingHandle::known_fixed_point(self)
    }
}

fn validate_kind(kind: &MappingKind, domain: &AdmissibleCap) -> Result<()> {
    match kind {
        MappingKind::Identity => Ok(()),
        MappingKind::ResolventOf { functional, tol } => {
            if !(*tol > 0.0 && tol.is_finite()) {
                return Err(Error::InvalidParameter(format!(
                    "resolvent tolerance {tol} must be positive"
                )));
            }
            functional.validate(domain)
        }
        MappingKind::ProjectionOnto { ball } => {
            if !ball.is_inside(domain.as_ball())? {
                return Err(Error::InvalidParameter(
                    "projection ball is not inside the domain cap".into(),
                ));
            }
            Ok(())
        }
        MappingKind::Example32 {
            anchor,
            radius,
            delta,
        } => {
            check_example_params(*radius, *delta)?;
            let own = AdmissibleCap::new(anchor.clone(), *radius)?;
            if dist(own.center(), domain.center())? > 1e-12 || (radius - domain.radius()).abs() > 1e-12 {
                return Err(Error::InvalidParameter(
                    "example_3_2 must act on its own cap S_r[p]".into(),
                ));
            }
            Ok(())
        }
        MappingKind::Composition { steps } => steps.iter().try_for_each(|s| validate_kind(s, domain)),
    }
}

fn apply_kind(kind: &MappingKind, domain: &AdmissibleCap, x: &SpherePoint) -> Result<SpherePoint> {
    match kind {
        MappingKind::Identity => {
            domain.center().check_same_dim(x)?;
            Ok(x.clone())
        }
        MappingKind::ResolventOf { functional, tol } => {
            Ok(resolvent::resolve(functional, domain, x, *tol)?.point)
        }
        MappingKind::ProjectionOnto { ball } => ball.project(x),
        MappingKind::Example32 { anchor, delta, .. } => {
            let collapse = Ball::new(anchor.clone(), FRAC_PI_8)?;
            if collapse.contains(x)? {
                Ok(anchor.clone())
            } else {
                Ball::new(anchor.clone(), delta * FRAC_PI_8)?.project(x)
            }
        }
        MappingKind::Composition { steps } => steps
            .iter()
            .try_fold(x.clone(), |y, s| apply_kind(s, domain, &y)),
    }
}

fn known_fixed_point(kind: &MappingKind, domain: &AdmissibleCap) -> Result<Option<SpherePoint>> {
    match kind {
        MappingKind::Identity => Ok(Some(domain.center().clone())),
        MappingKind::ResolventOf { functional, .. } => functional.known_minimizer(domain),
        MappingKind::ProjectionOnto { ball } => Ok(Some(ball.center().clone())),
        MappingKind::Example32 { anchor, .. } => Ok(Some(anchor.clone())),
        MappingKind::Composition { steps } => {
            if steps.is_empty() {
                return Ok(Some(domain.center().clone()));
            }
            // a fixed point of some step that the whole composition also fixes
            for s in steps {
                if let Some(p) = known_fixed_point(s, domain)? {
                    let tp = apply_kind(kind, domain, &p)?;
                    if dist(&tp, &p)? <= 1e-12 {
                        return Ok(Some(p));
                    }
                }
            }
            Ok(None)
        }
    }
}

/// Two points straddling the sphere `d(·, p) = π/8` whose images are
/// `δπ/8` apart, exhibiting the jump of the example mapping.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DiscontinuityWitness {
    pub inside: SpherePoint,
    pub outside: SpherePoint,
    /// `d(inside, outside)`.
    pub gap: f64,
    /// `d(T inside, T outside)`.
    pub jump: f64,
}

/// Builds a witness with points at distances `π/8` and `π/8 + eps` from the
/// anchor along a common geodesic.
pub fn discontinuity_witness(handle: &MappingHandle, eps: f64) -> Result<DiscontinuityWitness> {
    let MappingKind::Example32 { anchor, radius, .. } = handle.kind() else {
        return Err(Error::InvalidParameter(
            "discontinuity witness needs an example_3_2 mapping".into(),
        ));
    };
    if !(eps > 0.0 && FRAC_PI_8 + eps <= *radius) {
        return Err(Error::InvalidParameter(format!(
            "offset {eps} must lie in (0, r − π/8]"
        )));
    }
    // direction: toward the basis vector least aligned with the anchor
    let k = (0..anchor.ambient_dim())
        .min_by(|&i, &j| anchor.coords()[i].abs().total_cmp(&anchor.coords()[j].abs()))
        .unwrap_or(0);
    let v = log_map(anchor, &SpherePoint::basis(anchor.ambient_dim(), k)?)?;
    let n = v.iter().map(|a| a * a).sum::<f64>().sqrt();
    let along = |t: f64| -> Result<SpherePoint> {
        let scaled: Vec<f64> = v.iter().map(|a| a * t / n).collect();
        exp_map(anchor, &scaled)
    };
    let inside = along(FRAC_PI_8)?;
    let outside = along(FRAC_PI_8 + eps)?;
    let jump = dist(&handle.apply(&inside)?, &handle.apply(&outside)?)?;
    Ok(DiscontinuityWitness {
        gap: dist(&inside, &outside)?,
        inside,
        outside,
        jump,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn planar(t: f64) -> SpherePoint {
        SpherePoint::new(vec![t.cos(), t.sin(), 0.0]).unwrap()
    }

    fn cap() -> AdmissibleCap {
        AdmissibleCap::standard(3).unwrap()
    }

    fn example() -> MappingHandle {
        MappingHandle::example_3_2(planar(0.0), 0.6, 0.5).unwrap()
    }

    #[test]
    fn projection_fixes_members_and_shortens() {
        let ball = Ball::new(planar(0.0), 0.3).unwrap();
        let t = MappingHandle::projection_onto(ball, cap()).unwrap();
        assert_eq!(t.apply(&planar(0.2)).unwrap(), planar(0.2));
        let c = t.displacement_cosine(&planar(0.5)).unwrap().value();
        assert!((c - 0.2f64.cos()).abs() < 1e-15);
    }

    #[test]
    fn zero_resolvent_is_identity() {
        let t = MappingHandle::resolvent_of(ConvexFunctional::zero(), cap()).unwrap();
        let x = planar(-0.35);
        assert_eq!(t.apply(&x).unwrap(), x);
        assert_eq!(t.displacement_cosine(&x).unwrap().value(), 1.0);
    }

    #[test]
    fn example_branches() {
        let t = example();
        let p = planar(0.0);
        assert_eq!(t.apply(&p).unwrap(), p);
        // closed inner ball: the boundary collapses to p
        assert_eq!(t.apply(&planar(FRAC_PI_8)).unwrap(), p);
        let c = t.displacement_cosine(&planar(0.1)).unwrap().value();
        assert!((c - 0.1f64.cos()).abs() < 1e-15);
        let img = t.apply(&planar(0.5)).unwrap();
        assert!((dist(&img, &p).unwrap() - 0.5 * FRAC_PI_8).abs() < 1e-15);
        assert!((dist(&img, &planar(0.5 * FRAC_PI_8)).unwrap()) < 1e-15);
    }

    #[test]
    fn example_feasibility_is_recomputed() {
        let f = example_3_2_feasibility(0.5);
        assert!((f.lhs - 0.923_879_532_511_286_7).abs() < 1e-15);
        assert!((f.rhs - (FRAC_PI_8 / 2.0).cos().powi(2)).abs() < 1e-15);
        assert!(f.holds);
        assert!(!example_3_2_feasibility(0.99).holds);
        assert!(MappingHandle::example_3_2(planar(0.0), 0.6, 0.99).is_err());
        assert!(MappingHandle::example_3_2(planar(0.0), 0.3, 0.5).is_err());
        assert!(MappingHandle::example_3_2(planar(0.0), 0.6, 0.0).is_err());
    }

    #[test]
    fn discontinuity_witness_jumps() {
        let w = discontinuity_witness(&example(), 1e-9).unwrap();
        assert!(w.gap < 2e-9);
        assert!((w.jump - 0.5 * FRAC_PI_8).abs() < 1e-12);
    }

    #[test]
    fn composition_applies_left_to_right() {
        let inner = Ball::new(planar(0.1), 0.05).unwrap();
        let outer = Ball::new(planar(0.0), 0.3).unwrap();
        let t = MappingHandle::compose(
            vec![
                MappingKind::ProjectionOnto { ball: outer.clone() },
                MappingKind::ProjectionOnto { ball: inner.clone() },
            ],
            cap(),
        )
        .unwrap();
        let x = planar(0.55);
        let expected = inner.project(&outer.project(&x).unwrap()).unwrap();
        assert_eq!(t.apply(&x).unwrap(), expected);
        assert!(t.known_fixed_point().unwrap().is_some());
    }

    #[test]
    fn rejects_bad_domains() {
        let big = Ball::new(planar(0.0), 0.7).unwrap();
        assert!(MappingHandle::projection_onto(big, cap()).is_err());
        let wrong = MappingKind::Example32 {
            anchor: planar(0.1),
            radius: 0.6,
            delta: 0.5,
        };
        assert!(MappingHandle::new(wrong, cap()).is_err());
        let t = MappingHandle::identity(cap());
        assert!(matches!(
            t.apply(&SpherePoint::basis(3, 1).unwrap()),
            Err(Error::OutOfDomain { .. })
        ));
    }

    #[test]
    fn maps_cap_into_itself_and_is_deterministic() {
        let q = planar(0.25);
        let maps = [
            MappingHandle::resolvent_of(ConvexFunctional::neg_cos_dist(q.clone()), cap()).unwrap(),
            MappingHandle::resolvent_of(ConvexFunctional::pull_to_point(q), cap()).unwrap(),
            example(),
        ];
        let mut sampler = cap().sampler(11);
        for _ in 0..300 {
            let x = sampler.next_point();
            for t in &maps {
                let a = t.apply(&x).unwrap();
                assert!(t.domain().contains(&a).unwrap());
                assert_eq!(a, t.apply(&x).unwrap());
            }
        }
    }

    #[test]
    fn descriptor_round_trip() {
        let t = example();
        let json = serde_json::to_string(&t).unwrap();
        assert!(json.contains("\"kind\":\"example_3_2\""));
        let back: MappingHandle = serde_json::from_str(&json).unwrap();
        assert_eq!(back, t);
    }
}
