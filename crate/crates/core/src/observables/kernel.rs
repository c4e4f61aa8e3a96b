//! Reduced transfer kernels for elastic two-body scattering.

use std::f64::consts::PI;

use num_complex::Complex64 as C64;

use crate::dynamics::PhaseShiftTable;
use crate::error::{Error, Result};

/// ⟨q|𝔗|p₁,p₂⟩ for 2→2 as a function of s = M² and the center-frame scattering angle.
pub trait TransferKernel: Sync {
    fn amplitude(&self, s: f64, cos_theta: f64) -> Result<C64>;
}

/// Kernel with a fixed value, for tests.
#[derive(Clone, Copy, Debug)]
pub struct ConstantKernel(pub C64);

impl TransferKernel for ConstantKernel {
    fn amplitude(&self, _s: f64, _c: f64) -> Result<C64> {
        Ok(self.0)
    }
}

/// P_0..P_lmax at x.
pub fn legendre(lmax: usize, x: f64) -> Vec<f64> {
    let mut p = vec![1.0; lmax + 1];
    if lmax >= 1 {
        p[1] = x;
    }
    for l in 2..=lmax {
        p[l] = ((2 * l - 1) as f64 * x * p[l - 1] - (l - 1) as f64 * p[l - 2]) / l as f64;
    }
    p
}

/// 𝔗 = i(4π√s/z) Σ_l (2l+1)(e^{2iδ_l} − 1) P_l(cos θ),
/// normalized so that the full-sphere cross section is (4π/z²)Σ(2l+1)sin²δ_l.
#[derive(Clone, Debug)]
pub struct ElasticKernel {
    pub m1: f64,
    pub m2: f64,
    /// One table per l = 0..=lmax.
    pub tables: Vec<PhaseShiftTable>,
}

impl ElasticKernel {
    pub fn new(m1: f64, m2: f64, tables: Vec<PhaseShiftTable>) -> Result<Self> {
        for (l, t) in tables.iter().enumerate() {
            if t.l as usize != l {
                return Err(Error::Config(format!("phase-shift table {l} is for l = {}", t.l)));
            }
        }
        Ok(ElasticKernel { m1, m2, tables })
    }

    pub fn mu(&self) -> f64 {
        self.m1 * self.m2 / (self.m1 + self.m2)
    }

    /// z from M = √s.
    pub fn z_of_sqrt_s(&self, m: f64) -> f64 {
        (2.0 * self.mu() * (m - self.m1 - self.m2)).max(0.0).sqrt()
    }

    pub fn phase_shifts(&self, z: f64) -> Result<Vec<f64>> {
        self.tables.iter().map(|t| t.interpolate(z)).collect()
    }

    /// e^{2iδ_l} − 1 for every l at z.
    pub fn partial_amplitudes(&self, z: f64) -> Result<Vec<C64>> {
        Ok(self.phase_shifts(z)?.into_iter().map(|d| C64::from_polar(1.0, 2.0 * d) - 1.0).collect())
    }

    /// i·4π√s/z
    pub fn prefactor(&self, s: f64) -> Result<C64> {
        let m = s.sqrt();
        let z = self.z_of_sqrt_s(m);
        if !(z > 0.0) {
            return Err(Error::Kinematic(format!("s = {s} is at or below threshold")));
        }
        Ok(C64::new(0.0, 4.0 * PI * m / z))
    }

    /// (4π/z²) Σ (2l+1) sin²δ_l
    pub fn partial_wave_total(&self, z: f64) -> Result<f64> {
        let d = self.phase_shifts(z)?;
        Ok(4.0 * PI / (z * z) * d.iter().enumerate().map(|(l, d)| (2 * l + 1) as f64 * d.sin().powi(2)).sum::<f64>())
    }
}

impl TransferKernel for ElasticKernel {
    fn amplitude(&self, s: f64, cos_theta: f64) -> Result<C64> {
        let pre = self.prefactor(s)?;
        let z = self.z_of_sqrt_s(s.sqrt());
        let a = self.partial_amplitudes(z)?;
        let p = legendre(a.len().saturating_sub(1), cos_theta);
        let sum: C64 = a.iter().zip(&p).enumerate().map(|(l, (a, p))| a * ((2 * l + 1) as f64 * p)).sum();
        Ok(pre * sum)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn table(l: u32, delta: f64) -> PhaseShiftTable {
        PhaseShiftTable { l, z: vec![0.1, 0.5, 1.0, 2.0, 3.0], delta: vec![delta; 5] }
    }

    #[test]
    fn legendre_values() {
        let p = legendre(3, 0.3);
        assert!((p[2] - 0.5 * (3.0 * 0.09 - 1.0)).abs() < 1e-15);
        assert!((p[3] - 0.5 * (5.0 * 0.027 - 0.9)).abs() < 1e-15);
    }

    #[test]
    fn zero_shifts_give_zero_kernel() {
        let k = ElasticKernel::new(1.0, 1.0, vec![table(0, 0.0), table(1, 0.0)]).unwrap();
        assert_eq!(k.amplitude(9.0, 0.3).unwrap(), C64::new(0.0, 0.0));
    }

    #[test]
    fn s_wave_is_isotropic_and_optical() {
        let k = ElasticKernel::new(1.0, 1.0, vec![table(0, 0.4), table(1, -0.2), table(2, 0.05)]).unwrap();
        let s: f64 = 9.0;
        let z = k.z_of_sqrt_s(3.0);
        let iso = ElasticKernel::new(1.0, 1.0, vec![table(0, 0.4)]).unwrap();
        assert!((iso.amplitude(s, 0.9).unwrap() - iso.amplitude(s, -0.4).unwrap()).norm() < 1e-13);
        let sigma = k.partial_wave_total(z).unwrap();
        let forward = k.amplitude(s, 1.0).unwrap();
        assert!((forward.im + 2.0 * z * s.sqrt() * sigma).abs() < 1e-6 * sigma);
        assert!(matches!(k.amplitude(400.0, 0.0), Err(Error::Range { .. })));
        for a in k.partial_amplitudes(z).unwrap() {
            assert!(((a + 1.0).norm() - 1.0).abs() < 1e-12);
        }
    }
}
