use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const MIN_GRID: usize = 256;

/// Numerical settings shared by every construction.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GlobalConfig {
    /// Dimension of the coefficient space.
    pub d: usize,
    /// Number of roots-of-unity sample points.
    pub q: usize,
    pub tol_rank: f64,
    pub tol_id: f64,
    /// Relative threshold for membership decisions.
    pub tol_member: f64,
    pub rng_seed: u64,
}

impl GlobalConfig {
    pub fn new(d: usize, q: usize) -> Self {
        Self {
            d,
            q,
            tol_rank: 1e-8,
            tol_id: 1e-9,
            tol_member: 1e-7,
            rng_seed: 0,
        }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.rng_seed = seed;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.d == 0 {
            return Err(Error::InvalidConfig("d must be positive".into()));
        }
        if !self.q.is_power_of_two() || self.q < 4 {
            return Err(Error::InvalidConfig(format!(
                "grid size {} is not a power of two >= 4",
                self.q
            )));
        }
        for (name, t) in [
            ("tol_rank", self.tol_rank),
            ("tol_id", self.tol_id),
            ("tol_member", self.tol_member),
        ] {
            if !(t > 0.0 && t < 1.0) {
                return Err(Error::InvalidConfig(format!("{name} = {t} outside (0, 1)")));
            }
        }
        Ok(())
    }

    /// Checks that the grid can hold functions of the given total degree.
    pub fn check_capacity(&self, total_degree: usize) -> Result<()> {
        if self.q < 4 * (1 + total_degree) {
            return Err(Error::GridTooSmall {
                q: self.q,
                reason: format!("need at least {} points", 4 * (1 + total_degree)),
            });
        }
        Ok(())
    }

    /// Checks that zeros of modulus up to `radius` alias below `tol_id / 100`.
    pub fn check_decay(&self, radius: f64) -> Result<()> {
        if radius > 0.0 && radius.powf(self.q as f64 / 2.0) > self.tol_id / 100.0 {
            return Err(Error::GridTooSmall {
                q: self.q,
                reason: format!("zeros of modulus {radius:.4} alias above tolerance"),
            });
        }
        Ok(())
    }
}

/// Smallest admissible grid for the given degree, symbol band and zero radius.
pub fn choose_grid(degree: usize, band: usize, max_radius: f64, tol_id: f64) -> usize {
    let mut q = (8 * (degree + band + 2)).max(MIN_GRID).next_power_of_two();
    if max_radius > 0.0 {
        while max_radius.powf(q as f64 / 2.0) > tol_id / 100.0 {
            q *= 2;
        }
    }
    q
}
