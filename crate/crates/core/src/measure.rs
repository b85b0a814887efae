//! Measures on finite spaces.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::metric::FiniteMetricSpace;

/// Tolerance on total mass for probability measures.
pub const MASS_TOLERANCE: f64 = 1e-12;

/// Nonnegative finite weights indexed by point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct MeasureVec(Vec<f64>);

impl MeasureVec {
    pub fn new(weights: Vec<f64>) -> Result<Self> {
        if let Some((i, w)) = weights.iter().enumerate().find(|(_, w)| !(w.is_finite() && **w >= 0.0)) {
            return Err(Error::Value(format!("weight {w} at point {i} must be finite and >= 0")));
        }
        Ok(MeasureVec(weights))
    }

    /// Like [`Self::new`] and additionally requires total mass 1.
    pub fn probability(weights: Vec<f64>) -> Result<Self> {
        let m = Self::new(weights)?;
        let total = m.total();
        if (total - 1.0).abs() > MASS_TOLERANCE {
            return Err(Error::Value(format!("total mass {total} is not 1")));
        }
        Ok(m)
    }

    pub fn uniform(n: usize) -> Self {
        MeasureVec(vec![1.0 / n as f64; n])
    }

    pub fn point_mass(n: usize, x: usize) -> Self {
        let mut w = vec![0.0; n];
        w[x] = 1.0;
        MeasureVec(w)
    }

    /// Rescale to total mass 1.
    pub fn normalized(&self) -> Result<Self> {
        let total = self.total();
        if total <= 0.0 {
            return Err(Error::Value("cannot normalize a zero measure".into()));
        }
        Ok(MeasureVec(self.0.iter().map(|w| w / total).collect()))
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn weights(&self) -> &[f64] {
        &self.0
    }

    pub fn into_weights(self) -> Vec<f64> {
        self.0
    }

    pub fn total(&self) -> f64 {
        self.0.iter().sum()
    }

    pub fn mass(&self, points: &[usize]) -> f64 {
        points.iter().map(|&p| self.0[p]).sum()
    }

    pub fn support(&self) -> Vec<usize> {
        (0..self.0.len()).filter(|&p| self.0[p] > 0.0).collect()
    }

    /// Mass of the closed ball `B(x, r)`.
    pub fn ball_mass(&self, space: &FiniteMetricSpace, x: usize, r: f64) -> f64 {
        let tol = space.tolerance();
        (0..space.len()).filter(|&y| space.d(x, y) <= r + tol).map(|y| self.0[y]).sum()
    }
}

/// A metric space carrying a probability measure.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightedSpace {
    pub space: FiniteMetricSpace,
    pub mu: MeasureVec,
}

impl WeightedSpace {
    pub fn new(space: FiniteMetricSpace, mu: MeasureVec) -> Result<Self> {
        if mu.len() != space.len() {
            return Err(Error::Structural(format!("measure has {} weights for {} points", mu.len(), space.len())));
        }
        let total = mu.total();
        if (total - 1.0).abs() > MASS_TOLERANCE {
            return Err(Error::Value(format!("total mass {total} is not 1")));
        }
        Ok(WeightedSpace { space, mu })
    }

    pub fn uniform(space: FiniteMetricSpace) -> Self {
        let mu = MeasureVec::uniform(space.len());
        WeightedSpace { space, mu }
    }

    pub fn len(&self) -> usize {
        self.space.len()
    }

    pub fn is_empty(&self) -> bool {
        self.space.is_empty()
    }
}
