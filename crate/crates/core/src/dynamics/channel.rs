use serde::{Deserialize, Serialize};

use crate::center::reduced_mass;
use crate::error::{Error, Result};

/// One partial wave on the radial grid r_k = kΔr, k = 1..=N, with Dirichlet
/// walls at r = 0 and r = (N+1)Δr.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RadialChannel {
    pub l: u32,
    pub n: usize,
    pub dr: f64,
    pub m1: f64,
    pub m2: f64,
}

impl RadialChannel {
    pub fn new(l: u32, n: usize, dr: f64, m1: f64, m2: f64) -> Result<Self> {
        let ch = RadialChannel { l, n, dr, m1, m2 };
        ch.validate()?;
        Ok(ch)
    }

    /// Grid with N points filling [0, radius].
    pub fn with_radius(l: u32, n: usize, radius: f64, m1: f64, m2: f64) -> Result<Self> {
        Self::new(l, n, radius / (n + 1) as f64, m1, m2)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.dr > 0.0 && self.dr.is_finite()) {
            return Err(Error::Config(format!("grid spacing must be positive, got {}", self.dr)));
        }
        if self.n < 2 {
            return Err(Error::Config(format!("grid needs at least 2 points, got {}", self.n)));
        }
        if !(self.m1 > 0.0 && self.m2 > 0.0) {
            return Err(Error::Config(format!("masses must be positive, got {}, {}", self.m1, self.m2)));
        }
        Ok(())
    }

    pub fn mu(&self) -> f64 {
        reduced_mass(self.m1, self.m2)
    }

    pub fn threshold(&self) -> f64 {
        self.m1 + self.m2
    }

    pub fn r(&self, k: usize) -> f64 {
        (k + 1) as f64 * self.dr
    }

    pub fn radius(&self) -> f64 {
        (self.n + 1) as f64 * self.dr
    }

    pub fn radii(&self) -> Vec<f64> {
        (0..self.n).map(|k| self.r(k)).collect()
    }

    /// z for an invariant mass value: m = m₁ + m₂ + z²/(2μ).
    pub fn z_of_mass(&self, m: f64) -> f64 {
        (2.0 * self.mu() * (m - self.threshold())).max(0.0).sqrt()
    }

    pub fn mass_of_z(&self, z: f64) -> f64 {
        self.threshold() + z * z / (2.0 * self.mu())
    }
}
