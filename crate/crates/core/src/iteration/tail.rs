use std::f64::consts::FRAC_PI_2;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Monotone transforms of tail statistics.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Transform {
    /// `cos` on `[0, π/2]`; nonincreasing.
    Cos,
    Identity,
    Negation,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TailMode {
    Limsup,
    Liminf,
}

impl Transform {
    fn apply(self, t: f64) -> f64 {
        match self {
            Transform::Cos => t.cos(),
            Transform::Identity => t,
            Transform::Negation => -t,
        }
    }
}

/// The transform of the tail maximum (`Limsup`) or minimum (`Liminf`) of
/// `values`, all of which form the tail.
///
/// For a continuous nonincreasing transform this equals the tail minimum
/// (resp. maximum) of the transformed values, which lets distance-side and
/// cosine-side formulations of a test be cross-checked.
pub fn tail_transform_stat(values: &[f64], transform: Transform, mode: TailMode) -> Result<f64> {
    if values.is_empty() {
        return Err(Error::Empty("tail values"));
    }
    if let Some(v) = values.iter().find(|v| !v.is_finite()) {
        return Err(Error::InvalidParameter(format!("tail value {v} is not finite")));
    }
    if transform == Transform::Cos {
        if let Some(v) = values.iter().find(|v| !(0.0..=FRAC_PI_2).contains(*v)) {
            return Err(Error::InvalidParameter(format!(
                "cos transform needs values in [0, π/2], got {v}"
            )));
        }
    }
    let stat = match mode {
        TailMode::Limsup => values.iter().copied().fold(f64::NEG_INFINITY, f64::max),
        TailMode::Liminf => values.iter().copied().fold(f64::INFINITY, f64::min),
    };
    Ok(transform.apply(stat))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn examples() {
        let c = tail_transform_stat(&[0.4, 0.4], Transform::Cos, TailMode::Limsup).unwrap();
        assert_eq!(c, 0.4f64.cos());
        let v = [0.1, 0.5, 0.3];
        let c = tail_transform_stat(&v, Transform::Cos, TailMode::Limsup).unwrap();
        assert_eq!(c, 0.5f64.cos());
        // nonincreasing transform swaps sup and inf
        let min_cos = v.iter().map(|t| t.cos()).fold(f64::INFINITY, f64::min);
        assert_eq!(c, min_cos);
        assert_eq!(tail_transform_stat(&v, Transform::Identity, TailMode::Limsup).unwrap(), 0.5);
        assert_eq!(tail_transform_stat(&v, Transform::Negation, TailMode::Liminf).unwrap(), -0.1);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(tail_transform_stat(&[], Transform::Identity, TailMode::Limsup).is_err());
        assert!(tail_transform_stat(&[2.0], Transform::Cos, TailMode::Limsup).is_err());
        assert!(tail_transform_stat(&[f64::NAN], Transform::Identity, TailMode::Liminf).is_err());
    }
}
