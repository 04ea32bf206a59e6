use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

/// Coordinatewise affine map `t(x) = shift + scale * x`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DiagonalAffine {
    shift: Vec<f64>,
    scale: Vec<f64>,
}

impl DiagonalAffine {
    pub fn new(shift: Vec<f64>, scale: Vec<f64>) -> Result<Self> {
        if shift.len() != scale.len() {
            return Err(invalid("shift and scale lengths differ"));
        }
        if scale.iter().any(|s| *s == 0.0 || !s.is_finite()) || shift.iter().any(|s| !s.is_finite()) {
            return Err(invalid("affine map must be finite and invertible"));
        }
        Ok(Self { shift, scale })
    }

    pub fn identity(n: usize) -> Self {
        Self { shift: vec![0.0; n], scale: vec![1.0; n] }
    }

    /// The map `x -> (x - center) / radius`.
    pub fn normalizing(center: &[f64], radius: f64) -> Result<Self> {
        Self::new(center.iter().map(|c| -c / radius).collect(), vec![1.0 / radius; center.len()])
    }

    pub fn dim(&self) -> usize {
        self.shift.len()
    }

    pub fn shift(&self) -> &[f64] {
        &self.shift
    }

    pub fn scale(&self) -> &[f64] {
        &self.scale
    }

    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        x.iter().zip(&self.shift).zip(&self.scale).map(|((xi, b), a)| b + a * xi).collect()
    }

    pub fn inverse(&self) -> Self {
        Self {
            shift: self.shift.iter().zip(&self.scale).map(|(b, a)| -b / a).collect(),
            scale: self.scale.iter().map(|a| 1.0 / a).collect(),
        }
    }

    /// The block-diagonal map acting on concatenated coordinates.
    pub fn concat(maps: &[&Self]) -> Self {
        Self {
            shift: maps.iter().flat_map(|m| m.shift.iter().copied()).collect(),
            scale: maps.iter().flat_map(|m| m.scale.iter().copied()).collect(),
        }
    }
}
