//! Uniform time grid for the trading interval [0, T].

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Uniform grid t_k = k·Δt, k = 0..=M, with Δt = T/M.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TimeGrid {
    /// Trading horizon T > 0.
    pub t_end: f64,
    /// Number of steps M ≥ 1 (M+1 grid points).
    pub steps: usize,
}

impl TimeGrid {
    /// Build a grid, validating T > 0 and M ≥ 1.
    pub fn new(t_end: f64, steps: usize) -> Result<Self> {
        if !(t_end.is_finite() && t_end > 0.0) {
            return Err(Error::Config(format!("horizon T must be positive, got {t_end}")));
        }
        if steps == 0 {
            return Err(Error::Config("grid must have at least one step".into()));
        }
        Ok(TimeGrid { t_end, steps })
    }

    /// Step width Δt = T/M.
    pub fn dt(&self) -> f64 {
        self.t_end / self.steps as f64
    }

    /// Grid point t_k = k·Δt.
    pub fn t(&self, k: usize) -> f64 {
        debug_assert!(k <= self.steps);
        self.t_end * k as f64 / self.steps as f64
    }

    /// Remaining horizon T − t_k.
    pub fn remaining(&self, k: usize) -> f64 {
        self.t_end - self.t(k)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_points_cover_interval() {
        let g = TimeGrid::new(10.0, 100).unwrap();
        assert_eq!(g.t(0), 0.0);
        assert_eq!(g.t(100), 10.0);
        assert!((g.dt() - 0.1).abs() < 1e-15);
        assert!((g.remaining(40) - 6.0).abs() < 1e-12);
    }

    #[test]
    fn rejects_bad_grids() {
        assert!(TimeGrid::new(0.0, 10).is_err());
        assert!(TimeGrid::new(-1.0, 10).is_err());
        assert!(TimeGrid::new(10.0, 0).is_err());
    }
}
