use serde::{Deserialize, Serialize};

use super::flux::flux_factor;
use super::position::{PositionPacket, TRUNCATION_TOL};
use crate::error::{Error, Result};
use crate::fourvec::FourVector;

/// Largest ∫d³x ρ₁ρ₂ on the first or last slice, relative to the peak slice, before the window counts as truncating.
pub const WINDOW_TOL: f64 = 1e-8;

/// Uniform time grid t₀, t₀ + dt, …, t₁.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TimeWindow {
    pub t0: f64,
    pub t1: f64,
    pub steps: usize,
}

impl TimeWindow {
    /// Symmetric window ±half with step at most `dt`; the step count is even.
    pub fn symmetric(half: f64, dt: f64) -> Self {
        let steps = ((2.0 * half / dt).ceil() as usize).max(2).next_multiple_of(2);
        TimeWindow { t0: -half, t1: half, steps }
    }

    pub fn dt(&self) -> f64 {
        (self.t1 - self.t0) / self.steps as f64
    }

    pub fn times(&self) -> Vec<f64> {
        (0..=self.steps).map(|k| self.t0 + k as f64 * self.dt()).collect()
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.t1 > self.t0) || self.steps < 2 || !self.steps.is_multiple_of(2) {
            return Err(Error::Config(format!("invalid time window {self:?}: need t1 > t0 and an even step count")));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LuminosityResult {
    /// ∫d⁴x |ψ̃₁|²|ψ̃₂|²
    pub overlap: f64,
    /// √((p₁·p₂)² − m₁²m₂²)/(p₁⁰p₂⁰)
    pub prefactor: f64,
    pub value: f64,
    /// |I_dt − I_2dt|/3 scaled by the prefactor.
    pub quadrature_error: f64,
    /// Overlap rate on the window ends relative to its Cauchy-Schwarz bound ‖ρ₁‖‖ρ₂‖.
    pub boundary: f64,
    /// Largest face/peak density seen for either packet.
    pub truncation: f64,
    /// (t, ∫d³x ρ₁ρ₂) per slice.
    pub rate: Vec<(f64, f64)>,
}

/// L = (F/(p₁⁰p₂⁰))∫d⁴x ρ₁ρ₂ with trapezoidal quadrature on the box and window.
pub fn luminosity(
    pk1: &PositionPacket,
    pk2: &PositionPacket,
    p1: &FourVector,
    p2: &FourVector,
    window: &TimeWindow,
) -> Result<LuminosityResult> {
    window.validate()?;
    if pk1.grid != pk2.grid {
        return Err(Error::Config("packets must share a sampling box".into()));
    }
    let f = flux_factor(p1, p2)?;
    let prefactor = f / (p1.t() * p2.t());
    let dv = pk1.grid.cell_volume();
    let mut rate = Vec::with_capacity(window.steps + 1);
    let mut truncation: f64 = 0.0;
    let mut bounds = Vec::with_capacity(window.steps + 1);
    for t in window.times() {
        let r1 = pk1.density(t);
        let r2 = pk2.density(t);
        for r in [&r1, &r2] {
            let face = PositionPacket::face_fraction(&pk1.grid, r);
            if face > TRUNCATION_TOL {
                return Err(Error::Truncation(format!("packet reaches the box faces at t = {t}: face/peak density {face:e}")));
            }
            truncation = truncation.max(face);
        }
        rate.push((t, r1.iter().zip(&r2).map(|(a, b)| a * b).sum::<f64>() * dv));
        let sq = |r: &[f64]| (r.iter().map(|x| x * x).sum::<f64>() * dv).sqrt();
        bounds.push(sq(&r1) * sq(&r2));
    }
    let end = |k: usize| if bounds[k] > 0.0 { rate[k].1 / bounds[k] } else { 0.0 };
    let boundary = end(0).max(end(window.steps));
    if boundary > WINDOW_TOL {
        return Err(Error::Window { boundary });
    }
    let trap = |stride: usize| {
        let h = window.dt() * stride as f64;
        let pts: Vec<f64> = rate.iter().step_by(stride).map(|r| r.1).collect();
        let n = pts.len();
        h * (pts.iter().sum::<f64>() - 0.5 * (pts[0] + pts[n - 1]))
    };
    let overlap = trap(1);
    let coarse = trap(2);
    Ok(LuminosityResult {
        overlap,
        prefactor,
        value: prefactor * overlap,
        quadrature_error: prefactor * (overlap - coarse).abs() / 3.0,
        boundary,
        truncation,
        rate,
    })
}

/// ∫d²x_⊥ ρ̂₁ρ̂₂ at time t, with ρ̂ the density integrated along the box x axis.
pub fn transverse_overlap(pk1: &PositionPacket, pk2: &PositionPacket, t: f64) -> Result<f64> {
    if pk1.grid != pk2.grid {
        return Err(Error::Config("packets must share a sampling box".into()));
    }
    let a = pk1.projected_density(t);
    let b = pk2.projected_density(t);
    Ok(a.iter().zip(&b).map(|(x, y)| x * y).sum::<f64>() * pk1.grid.dx * pk1.grid.dx)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScatteringProbability {
    pub w: f64,
    /// w > 0.1: the single-scattering picture is strained.
    pub warning: bool,
}

pub const SINGLE_SCATTERING_LIMIT: f64 = 0.1;

/// w = σ·L
pub fn scattering_probability(sigma: f64, lum: f64) -> ScatteringProbability {
    let w = sigma * lum;
    ScatteringProbability { w, warning: w > SINGLE_SCATTERING_LIMIT }
}

#[cfg(test)]
mod tests {
    use super::super::position::{Evolution, MomentumGaussian, SamplingBox};
    use super::*;
    use nalgebra::Vector3;

    #[test]
    fn disjoint_packets_have_no_luminosity() {
        let grid = SamplingBox::new([0.0; 3], [64, 64, 32], 0.25).unwrap();
        let a = MomentumGaussian::new(1.0, Vector3::zeros(), 1.0).translated(Vector3::new(0.0, -4.0, 0.0));
        let b = MomentumGaussian::new(1.0, Vector3::new(0.5, 0.0, 0.0), 1.0).translated(Vector3::new(0.0, 4.0, 0.0));
        let pa = PositionPacket::from_momentum(&a, grid, Evolution::Rigid).unwrap();
        let pb = PositionPacket::from_momentum(&b, grid, Evolution::Rigid).unwrap();
        let w = TimeWindow::symmetric(3.0, 0.5);
        let r = luminosity(&pa, &pb, &a.central_momentum(), &b.central_momentum(), &w).unwrap();
        assert!(r.value < 1e-12 && r.boundary < 1e-12, "{}", r.value);
    }

    #[test]
    fn probability_is_linear() {
        assert_eq!(scattering_probability(2.0, 0.0).w, 0.0);
        let one = scattering_probability(0.03, 1.5);
        let two = scattering_probability(0.03, 3.0);
        assert_eq!(two.w, 2.0 * one.w);
        assert!(!one.warning);
        assert!(scattering_probability(1.0, 0.2).warning);
    }
}
