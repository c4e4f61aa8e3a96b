use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use super::mass::MassOperator;
use crate::error::{Error, Result};

/// Width multiple that must separate the packet's central momentum from threshold.
pub const THRESHOLD_SIGMAS: f64 = 3.0;

#[derive(Clone, Debug, PartialEq)]
pub struct RelativeWavePacket {
    pub amplitudes: Vec<C64>,
    pub meta: PacketSpec,
}

/// Gaussian in z around `z0` with amplitude width `sigma_z`; `r0` is the
/// distance from the origin at t = 0 of an incoming packet (0: at the origin).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PacketSpec {
    pub z0: f64,
    pub sigma_z: f64,
    pub r0: f64,
}

impl PacketSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.z0 > 0.0 && self.sigma_z > 0.0 && self.r0 >= 0.0) {
            return Err(Error::Config(format!("invalid packet parameters {self:?}")));
        }
        if self.z0 - THRESHOLD_SIGMAS * self.sigma_z <= 0.0 {
            return Err(Error::Config(format!(
                "packet support touches threshold: z0 = {} within {THRESHOLD_SIGMAS} sigma_z = {}",
                self.z0, self.sigma_z
            )));
        }
        Ok(())
    }
}

impl RelativeWavePacket {
    /// Packet with free-eigenbasis coefficients c_a ∝ exp(−(z_a−z₀)²/(4σ_z²))·e^{iλ_a r₀/v₀},
    /// v₀ = z₀/μ the group velocity.
    pub fn gaussian(free: &MassOperator, spec: PacketSpec) -> Result<Self> {
        spec.validate()?;
        let mu = free.channel.mu();
        let tau = spec.r0 / (spec.z0 / mu);
        let c: Vec<C64> = free
            .eigenvalues()
            .iter()
            .zip(free.momenta())
            .map(|(&l, z)| {
                let g = (-(z - spec.z0).powi(2) / (4.0 * spec.sigma_z * spec.sigma_z)).exp();
                C64::from_polar(g, l * tau)
            })
            .collect();
        let amplitudes = free.synthesize(&c);
        RelativeWavePacket { amplitudes, meta: spec }.normalized()
    }

    pub fn with_amplitudes(&self, amplitudes: Vec<C64>) -> Self {
        RelativeWavePacket { amplitudes, meta: self.meta }
    }

    pub fn norm(&self) -> f64 {
        norm(&self.amplitudes)
    }

    pub fn normalized(self) -> Result<Self> {
        let n = self.norm();
        if !(n > 0.0 && n.is_finite()) {
            return Err(Error::Config("packet has zero norm on this grid".into()));
        }
        let amplitudes = self.amplitudes.iter().map(|a| a / n).collect();
        Ok(RelativeWavePacket { amplitudes, meta: self.meta })
    }

    pub fn distance(&self, other: &RelativeWavePacket) -> f64 {
        distance(&self.amplitudes, &other.amplitudes)
    }

    /// ℓ² norm over the outer `fraction` of the grid.
    pub fn edge_amplitude(&self, fraction: f64) -> f64 {
        edge_amplitude(&self.amplitudes, fraction)
    }

    /// ⟨r⟩ on a grid with spacing `dr`.
    pub fn mean_radius(&self, dr: f64) -> f64 {
        let w: f64 = self.amplitudes.iter().map(|a| a.norm_sqr()).sum();
        self.amplitudes.iter().enumerate().map(|(k, a)| (k + 1) as f64 * dr * a.norm_sqr()).sum::<f64>() / w
    }
}

pub fn norm(v: &[C64]) -> f64 {
    v.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
}

pub fn distance(a: &[C64], b: &[C64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).norm_sqr()).sum::<f64>().sqrt()
}

pub fn edge_amplitude(v: &[C64], fraction: f64) -> f64 {
    let n = v.len();
    let start = n - ((fraction * n as f64).ceil() as usize).clamp(1, n);
    norm(&v[start..])
}
