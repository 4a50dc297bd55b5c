//! Experiment configuration: defaults, config file, then flags.

use std::path::PathBuf;

use clap::ValueEnum;
use serde::{Deserialize, Deserializer, Serialize};
use vicinal_core::mappings::MappingKind;
use vicinal_core::properties::Stratification;
use vicinal_core::{AdmissibleCap, Ball, ConvexFunctional, KappaModel, Property, SpherePoint};

use crate::args::{IterArgs, TargetArgs};
use crate::error::CliError;

pub const SCHEMA_VERSION: &str = "1";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    Resolve,
    Check,
    Iterate,
    Ppa,
    Center,
    #[serde(rename = "example-3-2")]
    #[value(name = "example-3-2")]
    Example32,
    GFunction,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Resolve => "resolve",
            Command::Check => "check",
            Command::Iterate => "iterate",
            Command::Ppa => "ppa",
            Command::Center => "center",
            Command::Example32 => "example-3-2",
            Command::GFunction => "g-function",
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Json,
    Csv,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Sampling {
    pub count: usize,
    pub seed: u64,
    pub stratification: Option<Stratification>,
}

impl Default for Sampling {
    fn default() -> Self {
        Self {
            count: 1000,
            seed: 0,
            stratification: None,
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Tolerances {
    /// Solver accuracy or checker tolerance, depending on the command.
    pub tol: Option<f64>,
    pub stop_tol: Option<f64>,
    pub resolvent_tol: Option<f64>,
}

/// Everything a run depends on. Unset optional fields are filled with
/// command-specific defaults by [`ExperimentConfig::resolve`], and the
/// resolved value is echoed in the output.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub command: Option<Command>,
    pub cap: AdmissibleCap,
    pub mapping: Option<MappingKind>,
    pub functional: Option<ConvexFunctional>,
    #[serde(alias = "property", deserialize_with = "one_or_many")]
    pub properties: Vec<Property>,
    pub point: Option<SpherePoint>,
    pub x0: Option<SpherePoint>,
    /// Fixed point for the fixed-point properties.
    pub reference: Option<SpherePoint>,
    pub points: Option<Vec<SpherePoint>>,
    pub sampling: Sampling,
    pub tolerances: Tolerances,
    pub max_iter: Option<usize>,
    pub tail_start: Option<usize>,
    pub kappa: KappaModel,
    pub starts: usize,
    pub grid_spacing: Option<f64>,
    pub delta: f64,
    pub skip: Option<usize>,
    pub truncations: Option<Vec<usize>>,
    pub strict: bool,
    pub format: Format,
    pub out: Option<PathBuf>,
    pub emit_samples: Option<PathBuf>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            command: None,
            cap: AdmissibleCap::standard(3).expect("standard cap"),
            mapping: None,
            functional: None,
            properties: Vec::new(),
            point: None,
            x0: None,
            reference: None,
            points: None,
            sampling: Sampling::default(),
            tolerances: Tolerances::default(),
            max_iter: None,
            tail_start: None,
            kappa: KappaModel::unit(),
            starts: 1,
            grid_spacing: None,
            delta: 0.5,
            skip: None,
            truncations: None,
            strict: false,
            format: Format::Json,
            out: None,
            emit_samples: None,
        }
    }
}

fn one_or_many<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<Property>, D::Error> {
    #[derive(Deserialize)]
    #[serde(untagged)]
    enum OneOrMany {
        One(Property),
        Many(Vec<Property>),
    }
    Ok(match OneOrMany::deserialize(d)? {
        OneOrMany::One(p) => vec![p],
        OneOrMany::Many(v) => v,
    })
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self, CliError> {
        serde_json::from_str(text).map_err(|e| CliError::Config(format!("config: {e}")))
    }

    /// Reads `path`, or standard input for `-`.
    pub fn load(path: &str) -> Result<Self, CliError> {
        let text = if path == "-" {
            std::io::read_to_string(std::io::stdin())
        } else {
            std::fs::read_to_string(path)
        }
        .map_err(|e| CliError::Config(format!("cannot read config {path}: {e}")))?;
        Self::from_json(&text)
    }

    /// Applies the target and iteration flags (which win over the config
    /// file) and fills defaults.
    pub fn resolve(
        mut self,
        command: Command,
        target: Option<&TargetArgs>,
        iter: Option<&IterArgs>,
    ) -> Result<Self, CliError> {
        self.command = Some(command);
        if let Some(t) = target {
            t.apply(&mut self)?;
        }
        if let Some(i) = iter {
            i.apply(&mut self)?;
        }
        self.fill_defaults(command)?;
        Ok(self)
    }

    fn fill_defaults(&mut self, command: Command) -> Result<(), CliError> {
        use vicinal_core::iteration::{DEFAULT_MAX_ITER, DEFAULT_STOP_TOL};
        use vicinal_core::properties::DEFAULT_TOLERANCE;
        use vicinal_core::resolvent::DEFAULT_TOL;

        let t = &mut self.tolerances;
        let (tol, max_iter, stop_tol) = match command {
            Command::Resolve => (DEFAULT_TOL, DEFAULT_MAX_ITER, DEFAULT_STOP_TOL),
            Command::Check => (DEFAULT_TOLERANCE, DEFAULT_MAX_ITER, DEFAULT_STOP_TOL),
            Command::Example32 => (1e-12, DEFAULT_MAX_ITER, DEFAULT_STOP_TOL),
            Command::Iterate | Command::Ppa => (DEFAULT_TOL, DEFAULT_MAX_ITER, DEFAULT_STOP_TOL),
            Command::Center => (DEFAULT_TOL, 200, 0.0),
            Command::GFunction => (DEFAULT_TOL, 300, 0.0),
        };
        t.tol.get_or_insert(tol);
        t.stop_tol.get_or_insert(stop_tol);
        t.resolvent_tol.get_or_insert(DEFAULT_TOL);
        self.max_iter.get_or_insert(max_iter);
        if command == Command::GFunction {
            self.skip.get_or_insert(100);
            self.truncations.get_or_insert_with(|| vec![50, 100, 200]);
        }
        if command == Command::Example32 {
            self.sampling.stratification.get_or_insert(Stratification::Example32);
            if self.properties.is_empty() {
                self.properties = vec![Property::SphericallyNonspreading];
            }
        }
        let example = matches!(self.mapping, Some(MappingKind::Example32 { .. }));
        self.sampling.stratification.get_or_insert(if example {
            Stratification::Example32
        } else {
            Stratification::Uniform
        });
        let needs_start = matches!(command, Command::Iterate | Command::GFunction)
            || (command == Command::Ppa && self.starts <= 1)
            || (command == Command::Center && self.points.is_none());
        if needs_start && self.x0.is_none() {
            self.x0 = Some(vicinal_core::sample_point(&self.cap, self.sampling.seed));
        }
        if command == Command::Resolve && self.point.is_none() {
            self.point = Some(vicinal_core::sample_point(&self.cap, self.sampling.seed));
        }
        // a bare functional implies its resolvent
        if self.mapping.is_none() && command != Command::Resolve && command != Command::Ppa {
            if let Some(f) = &self.functional {
                self.mapping = Some(MappingKind::ResolventOf {
                    functional: f.clone(),
                    tol: self.tolerances.resolvent_tol.unwrap_or(DEFAULT_TOL),
                });
            }
        }
        Ok(())
    }

    pub fn tol(&self) -> f64 {
        self.tolerances.tol.expect("resolved")
    }

    pub fn stop_tol(&self) -> f64 {
        self.tolerances.stop_tol.expect("resolved")
    }

    pub fn resolvent_tol(&self) -> f64 {
        self.tolerances.resolvent_tol.expect("resolved")
    }

    pub fn max_iter(&self) -> usize {
        self.max_iter.expect("resolved")
    }

    pub fn stratification(&self) -> Stratification {
        self.sampling.stratification.unwrap_or_default()
    }
}

/// A point given as comma-separated coordinates, or `p`/`center` for the cap
/// center.
pub fn parse_point(text: &str, cap: &AdmissibleCap) -> Result<SpherePoint, CliError> {
    let t = text.trim();
    if t == "p" || t == "center" {
        return Ok(cap.center().clone());
    }
    let coords = t
        .trim_start_matches('[')
        .trim_end_matches(']')
        .split(',')
        .map(|c| c.trim().parse::<f64>())
        .collect::<Result<Vec<_>, _>>()
        .map_err(|e| CliError::Config(format!("point {text:?}: {e}")))?;
    Ok(SpherePoint::new(coords)?)
}

/// `indicator-ball`, `pull-to-point`, `neg-cos-dist`, or inline JSON.
pub fn parse_functional(
    text: &str,
    anchor: SpherePoint,
    radius: f64,
) -> Result<ConvexFunctional, CliError> {
    if text.trim_start().starts_with('{') {
        return serde_json::from_str(text).map_err(|e| CliError::Config(format!("functional: {e}")));
    }
    Ok(match text.replace('_', "-").as_str() {
        "indicator-ball" => ConvexFunctional::indicator_ball(anchor, radius)?,
        "pull-to-point" => ConvexFunctional::pull_to_point(anchor),
        "neg-cos-dist" => ConvexFunctional::neg_cos_dist(anchor),
        other => {
            return Err(CliError::Config(format!(
                "unknown functional {other:?} (indicator-ball, pull-to-point, neg-cos-dist or JSON)"
            )))
        }
    })
}

/// `identity`, `example-3-2`, `resolvent`, `projection`, or inline JSON.
pub fn parse_mapping(
    text: &str,
    cfg: &ExperimentConfig,
    anchor: SpherePoint,
    radius: f64,
) -> Result<MappingKind, CliError> {
    if text.trim_start().starts_with('{') {
        return serde_json::from_str(text).map_err(|e| CliError::Config(format!("mapping: {e}")));
    }
    Ok(match text.replace('_', "-").as_str() {
        "identity" => MappingKind::Identity,
        "example-3-2" => MappingKind::Example32 {
            anchor: cfg.cap.center().clone(),
            radius: cfg.cap.radius(),
            delta: cfg.delta,
        },
        "resolvent" | "resolvent-of" => MappingKind::ResolventOf {
            functional: cfg.functional.clone().ok_or_else(|| {
                CliError::Config("mapping resolvent needs a functional".into())
            })?,
            tol: cfg
                .tolerances
                .resolvent_tol
                .unwrap_or(vicinal_core::resolvent::DEFAULT_TOL),
        },
        "projection" | "projection-onto" => MappingKind::ProjectionOnto {
            ball: Ball::new(anchor, radius)?,
        },
        other => {
            return Err(CliError::Config(format!(
                "unknown mapping {other:?} (identity, example-3-2, resolvent, projection or JSON)"
            )))
        }
    })
}

pub fn parse_stratification(text: &str) -> Result<Stratification, String> {
    match text.replace(['-', '_'], "").as_str() {
        "uniform" => Ok(Stratification::Uniform),
        "example32" => Ok(Stratification::Example32),
        _ => Err(format!("unknown stratification {text:?} (uniform, example-3-2)")),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn config_roundtrips() {
        let text = r#"{
            "cap": {"center": [0, 0, 1], "radius": 0.5},
            "functional": {"kind": "neg_cos_dist", "anchor": [0, 0.1, 0.99498743710662]},
            "property": "firmly-vicinal",
            "sampling": {"count": 10, "seed": 4}
        }"#;
        let cfg = ExperimentConfig::from_json(text).unwrap();
        assert_eq!(cfg.properties, vec![Property::FirmlyVicinal]);
        let again = ExperimentConfig::from_json(&serde_json::to_string(&cfg).unwrap()).unwrap();
        assert_eq!(again, cfg);
    }

    #[test]
    fn rejects_unknown_fields() {
        assert!(ExperimentConfig::from_json(r#"{"sampels": 3}"#).is_err());
    }

    #[test]
    fn parses_points() {
        let cap = AdmissibleCap::standard(3).unwrap();
        assert_eq!(parse_point("p", &cap).unwrap(), *cap.center());
        let q = parse_point("0.6,0.8,0", &cap).unwrap();
        assert_eq!(q.coords(), &[0.6, 0.8, 0.0]);
        assert!(parse_point("1,x", &cap).is_err());
    }
}
