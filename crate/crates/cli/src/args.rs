use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use vicinal_core::properties::Stratification;
use vicinal_core::{AdmissibleCap, KappaModel, Property, SpherePoint};

use crate::config::{self, Command, ExperimentConfig, Format};
use crate::error::CliError;

/// Experiments with vicinal mappings, tan·sin resolvents and proximal point
/// iteration on spherical caps.
#[derive(Debug, Parser)]
#[command(name = "vicinal", version)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Sub,
}

#[derive(Debug, Subcommand)]
pub enum Sub {
    /// Evaluate the resolvent R_f at a point.
    Resolve {
        #[command(flatten)]
        common: CommonArgs,
        #[command(flatten)]
        target: TargetArgs,
        /// Input point (comma-separated coordinates, or `p` for the cap center).
        #[arg(long)]
        point: Option<String>,
        /// Iteration budget of the solver.
        #[arg(long)]
        max_iter: Option<usize>,
    },
    /// Sample an inequality property of a mapping.
    Check {
        #[command(flatten)]
        common: CommonArgs,
        #[command(flatten)]
        target: TargetArgs,
        #[command(flatten)]
        check: CheckArgs,
    },
    /// Picard iteration of a mapping.
    Iterate {
        #[command(flatten)]
        common: CommonArgs,
        #[command(flatten)]
        target: TargetArgs,
        #[command(flatten)]
        iter: IterArgs,
    },
    /// Proximal point algorithm for a functional.
    Ppa {
        #[command(flatten)]
        common: CommonArgs,
        #[command(flatten)]
        target: TargetArgs,
        #[command(flatten)]
        iter: IterArgs,
        /// Number of random starting points (ignored when --x0 is given).
        #[arg(long)]
        starts: Option<usize>,
        /// Also compare f(limit) with a tangent grid minimum of this spacing
        /// (2-sphere caps only).
        #[arg(long)]
        grid_spacing: Option<f64>,
    },
    /// Asymptotic center of a sequence tail.
    Center {
        #[command(flatten)]
        common: CommonArgs,
        #[command(flatten)]
        target: TargetArgs,
        #[command(flatten)]
        iter: IterArgs,
        /// Points file: a JSON array of coordinate arrays, or CSV rows.
        #[arg(long)]
        points: Option<PathBuf>,
        /// First index m of the tail (default: half the sequence).
        #[arg(long = "tail-start", visible_alias = "m")]
        tail_start: Option<usize>,
    },
    /// The discontinuous spherically nonspreading example mapping.
    #[command(name = "example-3-2")]
    Example32 {
        #[command(flatten)]
        common: CommonArgs,
        #[command(flatten)]
        check: CheckArgs,
        /// Shrink factor δ of the outer projection ball.
        #[arg(long)]
        delta: Option<f64>,
    },
    /// Finite-truncation g-function of a Picard trace and its maximizer.
    GFunction {
        #[command(flatten)]
        common: CommonArgs,
        #[command(flatten)]
        target: TargetArgs,
        #[command(flatten)]
        iter: IterArgs,
        /// Burn-in steps dropped from the trace.
        #[arg(long)]
        skip: Option<usize>,
        /// Truncation lengths n, comma-separated.
        #[arg(long, value_delimiter = ',')]
        truncations: Option<Vec<usize>>,
    },
    /// Print the JSON Schema of the output envelope.
    Schema,
}

#[derive(Debug, Args)]
pub struct CommonArgs {
    /// JSON config file (`-` for standard input); flags override its fields.
    #[arg(long)]
    pub config: Option<String>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub samples: Option<usize>,
    /// Solver accuracy or checker tolerance.
    #[arg(long)]
    pub tol: Option<f64>,
    /// Exit with status 4 when a checked property is violated.
    #[arg(long)]
    pub strict: bool,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    /// Output file (default: standard output).
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Use the standard cap of radius 0.6 around e_0 in R^dim.
    #[arg(long)]
    pub dim: Option<usize>,
    #[arg(long)]
    pub cap_radius: Option<f64>,
}

/// Shorthand descriptors for the functional or mapping under study.
#[derive(Debug, Args)]
pub struct TargetArgs {
    /// identity, example-3-2, resolvent, projection, or inline JSON.
    #[arg(long)]
    pub mapping: Option<String>,
    /// indicator-ball, pull-to-point, neg-cos-dist, or inline JSON.
    #[arg(long)]
    pub functional: Option<String>,
    /// Anchor of the functional or projection ball (`p` for the cap center).
    #[arg(long)]
    pub anchor: Option<String>,
    /// Radius of an indicator or projection ball.
    #[arg(long)]
    pub radius: Option<f64>,
}

#[derive(Debug, Args)]
pub struct IterArgs {
    /// Starting point (`p` for the cap center; default: seeded sample).
    #[arg(long)]
    pub x0: Option<String>,
    #[arg(long)]
    pub max_iter: Option<usize>,
    #[arg(long)]
    pub stop_tol: Option<f64>,
    #[arg(long)]
    pub resolvent_tol: Option<f64>,
}

#[derive(Debug, Args)]
pub struct CheckArgs {
    /// Properties to check, comma-separated.
    #[arg(long, value_delimiter = ',')]
    pub property: Vec<Property>,
    /// uniform or example-3-2.
    #[arg(long, value_parser = config::parse_stratification)]
    pub stratification: Option<Stratification>,
    /// Curvature κ of the model in which distances are measured.
    #[arg(long)]
    pub kappa: Option<f64>,
    /// Write every residual sample as CSV to this path.
    #[arg(long)]
    pub emit_samples: Option<PathBuf>,
    /// Fixed point used by the fixed-point properties.
    #[arg(long)]
    pub reference: Option<String>,
}

impl CommonArgs {
    pub fn apply(&self, cfg: &mut ExperimentConfig) -> Result<(), CliError> {
        if let Some(dim) = self.dim {
            cfg.cap = AdmissibleCap::standard(dim)?;
        }
        if let Some(r) = self.cap_radius {
            cfg.cap = AdmissibleCap::new(cfg.cap.center().clone(), r)?;
        }
        if let Some(s) = self.seed {
            cfg.sampling.seed = s;
        }
        if let Some(n) = self.samples {
            cfg.sampling.count = n;
        }
        if let Some(t) = self.tol {
            cfg.tolerances.tol = Some(t);
        }
        cfg.strict |= self.strict;
        if let Some(f) = self.format {
            cfg.format = f;
        }
        if let Some(o) = &self.out {
            cfg.out = Some(o.clone());
        }
        Ok(())
    }
}

impl TargetArgs {
    pub fn apply(&self, cfg: &mut ExperimentConfig) -> Result<(), CliError> {
        let anchor = match &self.anchor {
            Some(a) => config::parse_point(a, &cfg.cap)?,
            None => cfg.cap.center().clone(),
        };
        let radius = self.radius.unwrap_or(0.3);
        if let Some(f) = &self.functional {
            cfg.functional = Some(config::parse_functional(f, anchor.clone(), radius)?);
        } else if self.anchor.is_some() && self.mapping.is_none() {
            return Err(CliError::Config("--anchor needs --functional or --mapping".into()));
        }
        if let Some(m) = &self.mapping {
            cfg.mapping = Some(config::parse_mapping(m, cfg, anchor, radius)?);
        }
        Ok(())
    }
}

impl IterArgs {
    pub fn apply(&self, cfg: &mut ExperimentConfig) -> Result<(), CliError> {
        if let Some(x) = &self.x0 {
            cfg.x0 = Some(config::parse_point(x, &cfg.cap)?);
        }
        if let Some(n) = self.max_iter {
            cfg.max_iter = Some(n);
        }
        if let Some(t) = self.stop_tol {
            cfg.tolerances.stop_tol = Some(t);
        }
        if let Some(t) = self.resolvent_tol {
            cfg.tolerances.resolvent_tol = Some(t);
        }
        Ok(())
    }
}

impl CheckArgs {
    pub fn apply(&self, cfg: &mut ExperimentConfig) -> Result<Option<SpherePoint>, CliError> {
        if !self.property.is_empty() {
            cfg.properties = self.property.clone();
        }
        if let Some(s) = self.stratification {
            cfg.sampling.stratification = Some(s);
        }
        if let Some(k) = self.kappa {
            cfg.kappa = KappaModel::new(k)?;
        }
        if let Some(p) = &self.emit_samples {
            cfg.emit_samples = Some(p.clone());
        }
        self.reference
            .as_deref()
            .map(|r| config::parse_point(r, &cfg.cap))
            .transpose()
    }
}

impl Sub {
    pub fn command(&self) -> Command {
        match self {
            Sub::Resolve { .. } => Command::Resolve,
            Sub::Check { .. } => Command::Check,
            Sub::Iterate { .. } => Command::Iterate,
            Sub::Ppa { .. } => Command::Ppa,
            Sub::Center { .. } => Command::Center,
            Sub::Example32 { .. } => Command::Example32,
            Sub::GFunction { .. } => Command::GFunction,
            Sub::Schema => unreachable!("schema is printed before dispatch"),
        }
    }

    /// The resolved configuration: defaults, then the config file, then flags.
    pub fn into_config(self) -> Result<ExperimentConfig, CliError> {
        let command = self.command();
        let common = match &self {
            Sub::Resolve { common, .. }
            | Sub::Check { common, .. }
            | Sub::Iterate { common, .. }
            | Sub::Ppa { common, .. }
            | Sub::Center { common, .. }
            | Sub::Example32 { common, .. }
            | Sub::GFunction { common, .. } => common,
            Sub::Schema => unreachable!("schema is printed before dispatch"),
        };
        let mut cfg = match &common.config {
            Some(path) => ExperimentConfig::load(path)?,
            None => ExperimentConfig::default(),
        };
        match &self {
            Sub::Resolve { common, target, point, max_iter } => {
                common.apply(&mut cfg)?;
                if let Some(p) = point {
                    cfg.point = Some(config::parse_point(p, &cfg.cap)?);
                }
                if max_iter.is_some() {
                    cfg.max_iter = *max_iter;
                }
                cfg.resolve(command, Some(target), None)
            }
            Sub::Check { common, target, check } => {
                common.apply(&mut cfg)?;
                if let Some(r) = check.apply(&mut cfg)? {
                    cfg.reference = Some(r);
                }
                cfg.resolve(command, Some(target), None)
            }
            Sub::Iterate { common, target, iter } => {
                common.apply(&mut cfg)?;
                cfg.resolve(command, Some(target), Some(iter))
            }
            Sub::Ppa { common, target, iter, starts, grid_spacing } => {
                common.apply(&mut cfg)?;
                if let Some(s) = starts {
                    cfg.starts = *s;
                }
                if grid_spacing.is_some() {
                    cfg.grid_spacing = *grid_spacing;
                }
                cfg.resolve(command, Some(target), Some(iter))
            }
            Sub::Center { common, target, iter, points, tail_start } => {
                common.apply(&mut cfg)?;
                if let Some(path) = points {
                    cfg.points = Some(crate::output::read_points(path)?);
                }
                if tail_start.is_some() {
                    cfg.tail_start = *tail_start;
                }
                cfg.resolve(command, Some(target), Some(iter))
            }
            Sub::Example32 { common, check, delta } => {
                common.apply(&mut cfg)?;
                if let Some(d) = delta {
                    cfg.delta = *d;
                }
                if let Some(r) = check.apply(&mut cfg)? {
                    cfg.reference = Some(r);
                }
                cfg.resolve(command, None, None)
            }
            Sub::GFunction { common, target, iter, skip, truncations } => {
                common.apply(&mut cfg)?;
                if skip.is_some() {
                    cfg.skip = *skip;
                }
                if truncations.is_some() {
                    cfg.truncations = truncations.clone();
                }
                cfg.resolve(command, Some(target), Some(iter))
            }
            Sub::Schema => unreachable!("schema is printed before dispatch"),
        }
    }
}
