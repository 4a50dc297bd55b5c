//! Residual checkers for the vicinal family of inequalities and the
//! g-function of weighted Picard data.
//!
//! Every residual is `lhs − rhs` of an inequality that should hold as
//! `lhs ≥ rhs`; a checker samples point pairs deterministically from a seed,
//! evaluates in parallel and reduces in sample order.

use std::f64::consts::FRAC_PI_8;
use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::descent::{self, DescentOptions, SmoothObjective};
use crate::error::{Error, Result};
use crate::functions::{Profile, SmoothTerm};
use crate::iteration::IterationTrace;
use crate::linalg;
use crate::mappings::SelfMap;
use crate::sphere::{dist, geodesic_point, AdmissibleCap, CapSampler, KappaModel, SpherePoint};

/// Default violation threshold: a residual below `−DEFAULT_TOLERANCE` counts.
pub const DEFAULT_TOLERANCE: f64 = 1e-9;
/// `d(Ty, y)` above this rejects `y` as a fixed point.
pub const FIXED_POINT_TOL: f64 = 1e-10;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Property {
    Vicinal,
    FirmlyVicinal,
    SphericallyNonspreading,
    FirmlySphericallyNonspreading,
    /// `cos d(Tx, x) cos d(Tx, y) ≥ cos d(x, y)` for a fixed point `y`.
    FixedPointPull,
    /// `d(Tx, y) ≤ d(x, y)` for a fixed point `y`.
    QuasiNonexpansive,
    /// The CAT(1) comparison inequality on sampled triples; needs no mapping.
    ComparisonInequality,
}

impl Property {
    pub const ALL: [Property; 7] = [
        Property::Vicinal,
        Property::FirmlyVicinal,
        Property::SphericallyNonspreading,
        Property::FirmlySphericallyNonspreading,
        Property::FixedPointPull,
        Property::QuasiNonexpansive,
        Property::ComparisonInequality,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Property::Vicinal => "vicinal",
            Property::FirmlyVicinal => "firmly-vicinal",
            Property::SphericallyNonspreading => "spherically-nonspreading",
            Property::FirmlySphericallyNonspreading => "firmly-spherically-nonspreading",
            Property::FixedPointPull => "fixed-point-pull",
            Property::QuasiNonexpansive => "quasi-nonexpansive",
            Property::ComparisonInequality => "comparison-inequality",
        }
    }

    pub fn needs_fixed_point(self) -> bool {
        matches!(self, Property::FixedPointPull | Property::QuasiNonexpansive)
    }
}

impl fmt::Display for Property {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Property {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let norm = s.replace('_', "-");
        Property::ALL
            .into_iter()
            .find(|p| p.name() == norm)
            .ok_or_else(|| Error::InvalidParameter(format!("unknown property `{s}`")))
    }
}

/// Both sides of one inequality instance.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResidualSample {
    pub x: SpherePoint,
    pub y: SpherePoint,
    pub lhs: f64,
    pub rhs: f64,
    pub residual: f64,
    /// Third vertex and weight of a comparison triple.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub z: Option<SpherePoint>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
}

impl ResidualSample {
    fn new(x: &SpherePoint, y: &SpherePoint, lhs: f64, rhs: f64) -> Self {
        Self {
            x: x.clone(),
            y: y.clone(),
            lhs,
            rhs,
            residual: lhs - rhs,
            z: None,
            alpha: None,
        }
    }
}

/// Cosines and distances entering the inequalities, measured in a κ-model
/// and mapped back to unit curvature.
struct Geometry<'a> {
    model: &'a KappaModel,
}

impl Geometry<'_> {
    fn cos(&self, a: &SpherePoint, b: &SpherePoint) -> Result<f64> {
        self.model.unit_cos(a, b)
    }

    fn dist(&self, a: &SpherePoint, b: &SpherePoint) -> Result<f64> {
        self.model.rescale_to_unit(self.model.dist(a, b)?)
    }
}

/// Residual of `property` at the pair `(x, y)` with images `(tx, ty)`.
fn pair_residual(
    property: Property,
    x: &SpherePoint,
    y: &SpherePoint,
    tx: &SpherePoint,
    ty: &SpherePoint,
    model: &KappaModel,
) -> Result<ResidualSample> {
    let g = Geometry { model };
    let (lhs, rhs) = match property {
        Property::Vicinal | Property::FirmlyVicinal => {
            let cx = g.cos(tx, x)?;
            let cy = g.cos(ty, y)?;
            let (wx, wy) = (cx * cx * (1.0 + cy * cy), cy * cy * (1.0 + cx * cx));
            let coeff = if property == Property::Vicinal {
                wx + wy
            } else {
                wx * cy + wy * cx
            };
            (
                coeff * g.cos(tx, ty)?,
                wx * g.cos(tx, y)? + wy * g.cos(ty, x)?,
            )
        }
        Property::SphericallyNonspreading => {
            let c = g.cos(tx, ty)?;
            (c * c, g.cos(tx, y)? * g.cos(ty, x)?)
        }
        Property::FirmlySphericallyNonspreading => {
            let c = g.cos(tx, ty)?;
            (
                (g.cos(tx, x)? + g.cos(ty, y)?) * c * c,
                2.0 * g.cos(tx, y)? * g.cos(ty, x)?,
            )
        }
        Property::FixedPointPull => (g.cos(tx, x)? * g.cos(tx, y)?, g.cos(x, y)?),
        Property::QuasiNonexpansive => (g.dist(x, y)?, g.dist(tx, y)?),
        Property::ComparisonInequality => {
            return Err(Error::InvalidParameter(
                "the comparison inequality is evaluated on triples".into(),
            ))
        }
    };
    Ok(ResidualSample::new(x, y, lhs, rhs))
}

fn mapped_residual<T: SelfMap + ?Sized>(
    t: &T,
    property: Property,
    x: &SpherePoint,
    y: &SpherePoint,
) -> Result<ResidualSample> {
    let tx = t.apply(x)?;
    let ty = t.apply(y)?;
    if property.needs_fixed_point() {
        require_fixed(y, &ty)?;
    }
    pair_residual(property, x, y, &tx, &ty, &KappaModel::unit())
}

fn require_fixed(y: &SpherePoint, ty: &SpherePoint) -> Result<()> {
    let displacement = dist(ty, y)?;
    if displacement > FIXED_POINT_TOL {
        return Err(Error::NotFixedPoint { displacement });
    }
    Ok(())
}

/// `(C_x²(1+C_y²) + C_y²(1+C_x²)) cos d(Tx,Ty)` against
/// `C_x²(1+C_y²) cos d(Tx,y) + C_y²(1+C_x²) cos d(Ty,x)`.
pub fn vicinal_residual<T: SelfMap + ?Sized>(t: &T, x: &SpherePoint, y: &SpherePoint) -> Result<ResidualSample> {
    mapped_residual(t, Property::Vicinal, x, y)
}

/// As [`vicinal_residual`] with left coefficient `C_x²(1+C_y²)C_y + C_y²(1+C_x²)C_x`.
pub fn firmly_vicinal_residual<T: SelfMap + ?Sized>(
    t: &T,
    x: &SpherePoint,
    y: &SpherePoint,
) -> Result<ResidualSample> {
    mapped_residual(t, Property::FirmlyVicinal, x, y)
}

/// `cos² d(Tx,Ty)` against `cos d(Tx,y) cos d(Ty,x)`.
pub fn spherically_nonspreading_residual<T: SelfMap + ?Sized>(
    t: &T,
    x: &SpherePoint,
    y: &SpherePoint,
) -> Result<ResidualSample> {
    mapped_residual(t, Property::SphericallyNonspreading, x, y)
}

/// `(C_x + C_y) cos² d(Tx,Ty)` against `2 cos d(Tx,y) cos d(Ty,x)`.
pub fn firmly_sph_nonspreading_residual<T: SelfMap + ?Sized>(
    t: &T,
    x: &SpherePoint,
    y: &SpherePoint,
) -> Result<ResidualSample> {
    mapped_residual(t, Property::FirmlySphericallyNonspreading, x, y)
}

/// `cos d(Tx,x) cos d(Tx,y) − cos d(x,y)` for a fixed point `y`.
pub fn fixed_point_pull_residual<T: SelfMap + ?Sized>(t: &T, x: &SpherePoint, y: &SpherePoint) -> Result<f64> {
    Ok(mapped_residual(t, Property::FixedPointPull, x, y)?.residual)
}

/// `d(x,y) − d(Tx,y)` for a fixed point `y`.
pub fn quasi_nonexpansive_residual<T: SelfMap + ?Sized>(
    t: &T,
    x: &SpherePoint,
    y: &SpherePoint,
) -> Result<f64> {
    Ok(mapped_residual(t, Property::QuasiNonexpansive, x, y)?.residual)
}

/// How sample pairs are drawn from the domain cap.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Stratification {
    /// Both points uniform in arclength radius over the cap.
    #[default]
    Uniform,
    /// Split at distance π/8 from the cap center into an inner ball `C` and
    /// its complement; pair `i` is cross-region for `i ≡ 0`, inside `C × C`
    /// for `i ≡ 1` and outside for `i ≡ 2 (mod 3)`.
    Example32,
}

/// Deterministic sample pairs.
pub fn sample_pairs(
    domain: &AdmissibleCap,
    count: usize,
    seed: u64,
    stratification: Stratification,
) -> Vec<(SpherePoint, SpherePoint)> {
    let mut sampler = domain.sampler(seed);
    let r = domain.radius();
    let split = FRAC_PI_8.min(r);
    // strictly outside the closed inner ball
    let outer_start = split * (1.0 + 1e-12);
    (0..count)
        .map(|i| match stratification {
            Stratification::Uniform => (sampler.next_point(), sampler.next_point()),
            Stratification::Example32 => {
                let inner = |s: &mut CapSampler| s.annulus_point(0.0, split);
                let outer = |s: &mut CapSampler| s.annulus_point(outer_start, r);
                match i % 3 {
                    0 => {
                        // randomize which coordinate is inside
                        if sampler.uniform(0.0, 1.0) < 0.5 {
                            (inner(&mut sampler), outer(&mut sampler))
                        } else {
                            let a = outer(&mut sampler);
                            (a, inner(&mut sampler))
                        }
                    }
                    1 => (inner(&mut sampler), inner(&mut sampler)),
                    _ => (outer(&mut sampler), outer(&mut sampler)),
                }
            }
        })
        .collect()
}

/// Settings shared by every checker run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CheckOptions {
    pub samples: usize,
    pub seed: u64,
    pub tolerance: f64,
    #[serde(default)]
    pub stratification: Stratification,
    /// Fixed point used by the fixed-point properties; defaults to the
    /// mapping's closed-form fixed point when available.
    #[serde(default)]
    pub reference: Option<SpherePoint>,
    /// Curvature model in which distances are measured.
    #[serde(default = "KappaModel::unit")]
    pub kappa: KappaModel,
}

impl CheckOptions {
    pub fn new(samples: usize, seed: u64) -> Self {
        Self {
            samples,
            seed,
            tolerance: DEFAULT_TOLERANCE,
            stratification: Stratification::Uniform,
            reference: None,
            kappa: KappaModel::unit(),
        }
    }
}

/// Aggregate of one property over a sample set.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PropertyReport {
    pub property: Property,
    pub samples: usize,
    pub seed: u64,
    pub tolerance: f64,
    pub kappa: f64,
    pub min_residual: f64,
    /// Number of samples with `residual < −tolerance`.
    pub violations: usize,
    /// The first sample attaining the minimum.
    pub worst: Option<ResidualSample>,
}

impl PropertyReport {
    pub fn passed(&self) -> bool {
        self.violations == 0
    }

    fn from_samples(property: Property, options: &CheckOptions, samples: &[ResidualSample]) -> Self {
        let mut worst: Option<&ResidualSample> = None;
        for s in samples {
            if worst.map_or(true, |w| s.residual < w.residual) {
                worst = Some(s);
            }
        }
        Self {
            property,
            samples: samples.len(),
            seed: options.seed,
            tolerance: options.tolerance,
            kappa: options.kappa.kappa(),
            min_residual: worst.map_or(f64::INFINITY, |w| w.residual),
            violations: samples
                .iter()
                .filter(|s| s.residual < -options.tolerance)
                .count(),
            worst: worst.cloned(),
        }
    }
}

/// A report together with every sample behind it.
#[derive(Clone, Debug, PartialEq)]
pub struct PropertyRun {
    pub report: PropertyReport,
    pub samples: Vec<ResidualSample>,
}

fn check_options(options: &CheckOptions) -> Result<()> {
    if options.samples == 0 {
        return Err(Error::Empty("sample count"));
    }
    if !(options.tolerance >= 0.0 && options.tolerance.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "tolerance {} must be finite and nonnegative",
            options.tolerance
        )));
    }
    Ok(())
}

/// Evaluates several pair properties of `t` on one shared sample set, so
/// each mapping image is computed once.
///
/// Fixed-point properties pair every sampled `x` with the reference fixed
/// point instead of the second sample.
pub fn check_properties<T: SelfMap + Sync + ?Sized>(
    t: &T,
    properties: &[Property],
    options: &CheckOptions,
) -> Result<Vec<PropertyRun>> {
    check_options(options)?;
    if properties.contains(&Property::ComparisonInequality) {
        return Err(Error::InvalidParameter(
            "comparison-inequality does not involve a mapping; use check_comparison".into(),
        ));
    }
    let domain = t.domain();
    let fixed = if properties.iter().any(|p| p.needs_fixed_point()) {
        let reference = match &options.reference {
            Some(r) => r.clone(),
            None => t.known_fixed_point()?.ok_or_else(|| {
                Error::Precondition("fixed-point properties need a reference fixed point".into())
            })?,
        };
        domain.require(&reference)?;
        let image = t.apply(&reference)?;
        require_fixed(&reference, &image)?;
        Some((reference, image))
    } else {
        None
    };

    let pairs = sample_pairs(domain, options.samples, options.seed, options.stratification);
    let model = &options.kappa;
    let per_pair: Vec<Vec<ResidualSample>> = pairs
        .par_iter()
        .map(|(x, y)| -> Result<Vec<ResidualSample>> {
            let tx = t.apply(x)?;
            let ty = if properties.iter().any(|p| !p.needs_fixed_point()) {
                Some(t.apply(y)?)
            } else {
                None
            };
            properties
                .iter()
                .map(|&p| match (&fixed, &ty) {
                    (Some((r, tr)), _) if p.needs_fixed_point() => pair_residual(p, x, r, &tx, tr, model),
                    (_, Some(ty)) => pair_residual(p, x, y, &tx, ty, model),
                    _ => unreachable!("image of y is computed whenever a pair property is requested"),
                })
                .collect()
        })
        .collect::<Result<_>>()?;

    Ok(properties
        .iter()
        .enumerate()
        .map(|(k, &p)| {
            let samples: Vec<ResidualSample> = per_pair.iter().map(|v| v[k].clone()).collect();
            PropertyRun {
                report: PropertyReport::from_samples(p, options, &samples),
                samples,
            }
        })
        .collect())
}

/// Single-property convenience wrapper around [`check_properties`].
pub fn check<T: SelfMap + Sync + ?Sized>(t: &T, property: Property, options: &CheckOptions) -> Result<PropertyRun> {
    if property == Property::ComparisonInequality {
        return check_comparison(t.domain(), options);
    }
    let mut runs = check_properties(t, &[property], options)?;
    Ok(runs.remove(0))
}

/// `cos d(αx ⊕ (1−α)y, z) − α cos d(x,z) − (1−α) cos d(y,z)` in `model`.
pub fn comparison_sample(
    x: &SpherePoint,
    y: &SpherePoint,
    z: &SpherePoint,
    alpha: f64,
    model: &KappaModel,
) -> Result<ResidualSample> {
    let g = Geometry { model };
    let m = geodesic_point(x, y, alpha)?;
    let lhs = g.cos(&m, z)?;
    let rhs = alpha * g.cos(x, z)? + (1.0 - alpha) * g.cos(y, z)?;
    let mut s = ResidualSample::new(x, y, lhs, rhs);
    s.z = Some(z.clone());
    s.alpha = Some(alpha);
    Ok(s)
}

/// The comparison inequality on `samples` random triples of the cap with a
/// uniform random weight each.
pub fn check_comparison(domain: &AdmissibleCap, options: &CheckOptions) -> Result<PropertyRun> {
    check_options(options)?;
    let mut sampler = domain.sampler(options.seed);
    let triples: Vec<_> = (0..options.samples)
        .map(|_| {
            let x = sampler.next_point();
            let y = sampler.next_point();
            let z = sampler.next_point();
            let alpha = sampler.uniform(0.0, 1.0);
            (x, y, z, alpha)
        })
        .collect();
    let samples: Vec<ResidualSample> = triples
        .par_iter()
        .map(|(x, y, z, a)| comparison_sample(x, y, z, *a, &options.kappa))
        .collect::<Result<_>>()?;
    Ok(PropertyRun {
        report: PropertyReport::from_samples(Property::ComparisonInequality, options, &samples),
        samples,
    })
}

/// Finite truncation `g_n(y) = σ_n⁻¹ Σ_{k<n} β_k cos d(y, z_k)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GEstimator {
    points: Vec<SpherePoint>,
    weights: Vec<f64>,
    partial_sums: Vec<f64>,
    truncation: usize,
}

impl GEstimator {
    pub fn new(points: Vec<SpherePoint>, weights: Vec<f64>) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::Empty("g-function points"));
        }
        if points.len() != weights.len() {
            return Err(Error::InvalidParameter(format!(
                "{} points but {} weights",
                points.len(),
                weights.len()
            )));
        }
        for p in &points[1..] {
            points[0].check_same_dim(p)?;
        }
        if let Some(w) = weights.iter().find(|w| !(**w > 0.0 && w.is_finite())) {
            return Err(Error::InvalidParameter(format!("weight {w} must be positive")));
        }
        let partial_sums = weights
            .iter()
            .scan(0.0, |acc, w| {
                *acc += w;
                Some(*acc)
            })
            .collect();
        Ok(Self {
            truncation: points.len(),
            points,
            weights,
            partial_sums,
        })
    }

    /// Data of a Picard trace `x_0, x_1, …`: `z_k = T x_k = x_{k+1}` with
    /// `β_k = C²/(1 + C²)`, `C = cos d(x_{k+1}, x_k)`, skipping the first
    /// `skip` steps. Dropping a finite prefix leaves the limit inferior
    /// unchanged.
    pub fn from_trace(trace: &IterationTrace, skip: usize) -> Result<Self> {
        let steps = trace.iterates.len().saturating_sub(1);
        if skip >= steps {
            return Err(Error::Precondition(format!(
                "burn-in {skip} leaves no steps of a trace with {steps}"
            )));
        }
        let (points, weights) = (skip..steps)
            .map(|k| {
                let z = trace.iterates[k + 1].clone();
                let c = linalg::cos_arc(z.coords(), trace.iterates[k].coords());
                (z, c * c / (1.0 + c * c))
            })
            .unzip();
        Self::new(points, weights)
    }

    /// The same data truncated to its first `n` terms.
    pub fn truncate(&self, n: usize) -> Result<Self> {
        if n == 0 || n > self.points.len() {
            return Err(Error::InvalidParameter(format!(
                "truncation {n} outside 1..={}",
                self.points.len()
            )));
        }
        let mut out = self.clone();
        out.truncation = n;
        Ok(out)
    }

    pub fn truncation(&self) -> usize {
        self.truncation
    }

    pub fn points(&self) -> &[SpherePoint] {
        &self.points[..self.truncation]
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights[..self.truncation]
    }

    /// `σ_n`.
    pub fn sigma(&self) -> f64 {
        self.partial_sums[self.truncation - 1]
    }

    pub fn partial_sums(&self) -> &[f64] {
        &self.partial_sums[..self.truncation]
    }

    fn terms(&self) -> Vec<SmoothTerm> {
        let sigma = self.sigma();
        self.points()
            .iter()
            .zip(self.weights())
            .map(|(z, w)| SmoothTerm {
                weight: w / sigma,
                profile: Profile::NegCos,
                anchor: z.coords().to_vec(),
            })
            .collect()
    }
}

/// `g_n(y)`.
pub fn g_estimate(est: &GEstimator, y: &SpherePoint) -> Result<f64> {
    let mut acc = 0.0;
    for (z, w) in est.points().iter().zip(est.weights()) {
        acc += w * y.cos_dist(z)?;
    }
    Ok(acc / est.sigma())
}

struct NegatedG(Vec<SmoothTerm>);

impl SmoothObjective for NegatedG {
    fn value(&self, y: &[f64]) -> f64 {
        self.0.iter().map(|t| t.value(y)).sum()
    }

    fn gradient(&self, y: &[f64]) -> Vec<f64> {
        let mut g = vec![0.0; y.len()];
        for t in &self.0 {
            t.add_gradient(y, &mut g);
        }
        g
    }
}

/// Maximizer of `g_n` over `domain`, to geodesic accuracy `tol`.
pub fn g_maximize(est: &GEstimator, domain: &AdmissibleCap, tol: f64) -> Result<SpherePoint> {
    if !(tol > 0.0 && tol.is_finite()) {
        return Err(Error::InvalidParameter(format!("tolerance {tol} must be positive")));
    }
    for z in est.points() {
        domain.require(z)?;
    }
    // −g_n is geodesically strongly convex on the cap with modulus at least
    // min_k cos d(y, z_k) ≥ cos(2r)
    let modulus = (2.0 * domain.radius()).cos();
    let start = domain.center().coords().to_vec();
    let out = descent::minimize(
        &NegatedG(est.terms()),
        domain.as_ball(),
        &start,
        DescentOptions {
            stationarity: 0.1 * tol * modulus,
            max_iter: crate::resolvent::DEFAULT_MAX_ITER,
        },
    );
    if !out.converged {
        return Err(Error::NonConvergence {
            iterations: out.iterations,
            residual: out.stationarity,
        });
    }
    Ok(SpherePoint::from_unit(out.point))
}

/// Sampled shape residuals of a finite g-function.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GShapeReport {
    pub samples: usize,
    pub seed: u64,
    /// `min g(αy ⊕ (1−α)z) − α g(y) − (1−α) g(z)`; concavity.
    pub concavity_min: f64,
    /// `min d(y, z) − |g(y) − g(z)|`; nonexpansiveness.
    pub nonexpansive_min: f64,
    pub value_min: f64,
    pub value_max: f64,
}

/// Samples `samples` geodesic triples `(y, z, α)` in `domain`.
pub fn g_shape_check(est: &GEstimator, domain: &AdmissibleCap, samples: usize, seed: u64) -> Result<GShapeReport> {
    if samples == 0 {
        return Err(Error::InvalidParameter("sample count must be positive".into()));
    }
    let mut sampler = domain.sampler(seed);
    let triples: Vec<_> = (0..samples)
        .map(|_| {
            let y = sampler.next_point();
            let z = sampler.next_point();
            (y, z, sampler.uniform(0.0, 1.0))
        })
        .collect();
    let rows = triples
        .par_iter()
        .map(|(y, z, alpha)| -> Result<[f64; 4]> {
            let m = geodesic_point(y, z, *alpha)?;
            let (gy, gz, gm) = (g_estimate(est, y)?, g_estimate(est, z)?, g_estimate(est, &m)?);
            Ok([
                gm - alpha * gy - (1.0 - alpha) * gz,
                dist(y, z)? - (gy - gz).abs(),
                gy.min(gz).min(gm),
                gy.max(gz).max(gm),
            ])
        })
        .collect::<Result<Vec<_>>>()?;
    let fold = |i: usize, init: f64, f: fn(f64, f64) -> f64| rows.iter().map(|r| r[i]).fold(init, f);
    Ok(GShapeReport {
        samples,
        seed,
        concavity_min: fold(0, f64::INFINITY, f64::min),
        nonexpansive_min: fold(1, f64::INFINITY, f64::min),
        value_min: fold(2, f64::INFINITY, f64::min),
        value_max: fold(3, f64::NEG_INFINITY, f64::max),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::functions::ConvexFunctional;
    use crate::mappings::MappingHandle;
    use crate::sphere::Ball;

    fn planar(t: f64) -> SpherePoint {
        SpherePoint::new(vec![t.cos(), t.sin(), 0.0]).unwrap()
    }

    fn cap() -> AdmissibleCap {
        AdmissibleCap::standard(3).unwrap()
    }

    fn pairs() -> Vec<(SpherePoint, SpherePoint)> {
        sample_pairs(&cap(), 200, 3, Stratification::Uniform)
    }

    #[test]
    fn identity_residuals_vanish() {
        let t = MappingHandle::identity(cap());
        for (x, y) in pairs() {
            for r in [
                vicinal_residual(&t, &x, &y).unwrap(),
                firmly_vicinal_residual(&t, &x, &y).unwrap(),
                spherically_nonspreading_residual(&t, &x, &y).unwrap(),
                firmly_sph_nonspreading_residual(&t, &x, &y).unwrap(),
            ] {
                assert_eq!(r.residual, 0.0);
                assert_eq!(r.residual, r.lhs - r.rhs);
            }
        }
    }

    #[test]
    fn diagonal_vicinal_residual_closed_form() {
        let t = MappingHandle::resolvent_of(ConvexFunctional::neg_cos_dist(planar(-0.2)), cap()).unwrap();
        let x = planar(0.45);
        let r = vicinal_residual(&t, &x, &x).unwrap();
        let c = t.displacement_cosine(&x).unwrap().value();
        let expected = 2.0 * c * c * (1.0 + c * c) * (1.0 - c);
        assert!((r.residual - expected).abs() < 1e-14, "{} vs {expected}", r.residual);
        assert!(r.residual > 0.0);
    }

    #[test]
    fn projection_is_firmly_vicinal() {
        let ball = Ball::new(planar(0.1), 0.25).unwrap();
        let t = MappingHandle::projection_onto(ball, cap()).unwrap();
        for (x, y) in pairs() {
            assert!(firmly_vicinal_residual(&t, &x, &y).unwrap().residual >= -1e-12);
        }
        let y = planar(0.1);
        let x = planar(0.55);
        assert!(fixed_point_pull_residual(&t, &x, &y).unwrap() >= -1e-12);
        let q = quasi_nonexpansive_residual(&t, &x, &y).unwrap();
        assert!((q - (0.45 - 0.25)).abs() < 1e-14);
        assert_eq!(fixed_point_pull_residual(&t, &y, &y).unwrap(), 0.0);
    }

    #[test]
    fn fixed_point_properties_reject_non_fixed_reference() {
        let t = MappingHandle::projection_onto(Ball::new(planar(0.0), 0.1).unwrap(), cap()).unwrap();
        assert!(matches!(
            quasi_nonexpansive_residual(&t, &planar(0.0), &planar(0.4)),
            Err(Error::NotFixedPoint { .. })
        ));
    }

    #[test]
    fn example_cross_pair_chain() {
        let t = MappingHandle::example_3_2(planar(0.0), 0.6, 0.5).unwrap();
        let (x, y) = (planar(0.55), planar(-0.2));
        let r = spherically_nonspreading_residual(&t, &x, &y).unwrap();
        let b = (0.5 * FRAC_PI_8).cos().powi(2);
        assert!(r.lhs >= b - 1e-15 && b > FRAC_PI_8.cos() && FRAC_PI_8.cos() >= r.rhs);
    }

    #[test]
    fn stratified_sampling_covers_regions() {
        let pairs = sample_pairs(&cap(), 3000, 9, Stratification::Example32);
        let inner = Ball::new(cap().center().clone(), FRAC_PI_8).unwrap();
        let mut cross = 0;
        for (i, (x, y)) in pairs.iter().enumerate() {
            let (a, b) = (inner.contains(x).unwrap(), inner.contains(y).unwrap());
            match i % 3 {
                0 => assert_ne!(a, b),
                1 => assert!(a && b),
                _ => assert!(!a && !b),
            }
            cross += usize::from(a != b);
        }
        assert_eq!(cross, 1000);
    }

    #[test]
    fn reports_are_deterministic_and_order_independent() {
        let t = MappingHandle::resolvent_of(ConvexFunctional::pull_to_point(planar(0.3)), cap()).unwrap();
        let options = CheckOptions::new(64, 5);
        let props = [Property::FirmlyVicinal, Property::QuasiNonexpansive];
        let a = check_properties(&t, &props, &options).unwrap();
        let pool = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
        let b = pool.install(|| check_properties(&t, &props, &options).unwrap());
        assert_eq!(a, b);
        for run in &a {
            assert_eq!(run.report.samples, 64);
            assert!(run.report.passed(), "{:?}", run.report);
            let min = run.samples.iter().map(|s| s.residual).fold(f64::INFINITY, f64::min);
            assert_eq!(min, run.report.min_residual);
        }
    }

    #[test]
    fn violation_count_matches_tolerance() {
        // a rotation about the cap center is an isometry without the
        // nonspreading property in general
        struct Shift(AdmissibleCap);
        impl SelfMap for Shift {
            fn domain(&self) -> &AdmissibleCap {
                &self.0
            }
            fn apply(&self, x: &SpherePoint) -> Result<SpherePoint> {
                let c = x.coords();
                SpherePoint::new(vec![c[0], -c[1], c[2]])
            }
        }
        let t = Shift(cap());
        let mut options = CheckOptions::new(500, 1);
        let run = check(&t, Property::SphericallyNonspreading, &options).unwrap();
        let expected = run.samples.iter().filter(|s| s.residual < -options.tolerance).count();
        assert_eq!(run.report.violations, expected);
        assert!(run.report.violations > 0);
        options.tolerance = 10.0;
        assert_eq!(check(&t, Property::SphericallyNonspreading, &options).unwrap().report.violations, 0);
    }

    #[test]
    fn comparison_examples() {
        let e = |i| SpherePoint::basis(3, i).unwrap();
        let unit = KappaModel::unit();
        let s = comparison_sample(&e(0), &e(1), &e(2), 0.5, &unit).unwrap();
        assert!(s.residual.abs() < 1e-15);
        let s = comparison_sample(&e(0), &e(1), &e(0), 0.5, &unit).unwrap();
        assert!((s.residual - (std::f64::consts::FRAC_1_SQRT_2 - 0.5)).abs() < 1e-15);
        let run = check_comparison(&cap(), &CheckOptions::new(2000, 4)).unwrap();
        assert!(run.report.min_residual >= -1e-12);
    }

    #[test]
    fn property_names_round_trip() {
        for p in Property::ALL {
            assert_eq!(p.name().parse::<Property>().unwrap(), p);
            let json = serde_json::to_string(&p).unwrap();
            assert_eq!(json, format!("\"{}\"", p.name()));
        }
        assert!("firmly_vicinal".parse::<Property>().is_ok());
        assert!("nope".parse::<Property>().is_err());
    }

    #[test]
    fn g_examples() {
        let p = planar(0.1);
        let y = planar(-0.3);
        let est = GEstimator::new(vec![p.clone(); 4], vec![0.1, 0.2, 0.3, 0.4]).unwrap();
        assert!((g_estimate(&est, &y).unwrap() - 0.4f64.cos()).abs() < 1e-15);
        assert!((g_estimate(&est, &p).unwrap() - 1.0).abs() < 1e-15);
        assert!((est.sigma() - 1.0).abs() < 1e-15);
        let m = g_maximize(&est, &cap(), 1e-10).unwrap();
        assert!(dist(&m, &p).unwrap() < 1e-10);

        let (z, w) = (planar(0.2), planar(-0.4));
        let two = GEstimator::new(vec![z.clone(), w.clone(), z.clone(), w.clone()], vec![0.25; 4]).unwrap();
        let expected = 0.5 * (y.cos_dist(&z).unwrap() + y.cos_dist(&w).unwrap());
        assert!((g_estimate(&two, &y).unwrap() - expected).abs() < 1e-15);
        let m = g_maximize(&two, &cap(), 1e-10).unwrap();
        assert!(dist(&m, &planar(-0.1)).unwrap() < 1e-10);
    }

    #[test]
    fn g_maximize_matches_closed_form() {
        // oracle: the maximizer of <y, Σβz> over a ball containing its
        // normalization is that normalization
        let mut s = cap().sampler(2);
        let pts: Vec<SpherePoint> = (0..40).map(|_| s.next_point()).collect();
        let w: Vec<f64> = (0..40).map(|k| 0.1 + 0.4 * ((k * 7 % 11) as f64) / 11.0).collect();
        let est = GEstimator::new(pts.clone(), w.clone()).unwrap();
        let mut m = vec![0.0; 3];
        for (p, wk) in pts.iter().zip(&w) {
            linalg::axpy(&mut m, *wk, p.coords());
        }
        let oracle = SpherePoint::from_ambient(m).unwrap();
        let got = g_maximize(&est, &cap(), 1e-10).unwrap();
        assert!(dist(&got, &oracle).unwrap() < 1e-9);
        let sub = est.truncate(10).unwrap();
        assert_eq!(sub.points().len(), 10);
        assert!((sub.sigma() - w[..10].iter().sum::<f64>()).abs() < 1e-12);
        assert!(est.truncate(0).is_err() && est.truncate(41).is_err());
    }

    #[test]
    fn g_rejects_bad_weights() {
        assert!(GEstimator::new(vec![planar(0.0)], vec![0.0]).is_err());
        assert!(GEstimator::new(vec![], vec![]).is_err());
        assert!(GEstimator::new(vec![planar(0.0)], vec![1.0, 2.0]).is_err());
    }
}
