//! End-to-end scattering probability of two colliding packets versus σ·L.
//!
//! The probability is w = ∫_Δ |⟨q|T|Ψ₁Ψ₂⟩|², evaluated in center variables (u, k, n̂):
//! the reduced kernel is expanded in partial waves, so the angular integral over the
//! initial relative direction n̂ reduces to projections of Ψ₁Ψ₂ onto Y_lm(n̂), and the
//! final-region integral to a Gram matrix of Y_lm over Δ.

use std::f64::consts::PI;

use nalgebra::{DMatrix, Vector3};
use num_complex::Complex64 as C64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::harmonics::{lm_index, real_harmonics, RealHarmonics};
use super::kernel::ElasticKernel;
use super::luminosity::{luminosity, LuminosityResult, TimeWindow};
use super::position::{Evolution, MomentumGaussian, PositionPacket, SamplingBox};
use super::xsection::{cross_section_band, gauss_legendre, two_body_momentum};
use crate::center::to_center;
use crate::dynamics::{phase_shifts_stationary, Potential, RadialChannel};
use crate::error::{Error, Result};
use crate::fourvec::{FourVector, LorentzMatrix};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct FactorizationConfig {
    pub m1: f64,
    pub m2: f64,
    pub potential: Potential,
    pub lmax: usize,
    /// Relative momentum z̄ of the central configuration; particle 1 at rest, particle 2 along x̂.
    pub z0: f64,
    /// Momentum width σ of both packets, in units of z̄.
    pub width_ratio: f64,
    /// Δ: cos∠(k̂_f, x̂) ≥ region_cos_min in the center frame.
    pub region_cos_min: f64,
    /// Gauss-Legendre nodes per radial coordinate (u_x, u_⊥, k).
    pub nodes: usize,
    pub polar_nodes: usize,
    pub azimuth_nodes: usize,
    /// Half-widths of the integration ranges, in packet widths.
    pub range_sigmas: f64,
    /// Angular cap around the peak direction, in packet widths.
    pub cap_sigmas: f64,
    pub box_n: [usize; 3],
    /// Box spacing in units of the position width 1/(2σ).
    pub box_step: f64,
    /// Overlap window half-width in position widths travelled at the relative speed.
    pub window_widths: f64,
    /// Quadrature estimate of w repeated with this fraction of the nodes.
    pub coarse_fraction: f64,
}

impl Default for FactorizationConfig {
    fn default() -> Self {
        FactorizationConfig {
            m1: 1.0,
            m2: 1.0,
            potential: Potential::SquareWell { depth: 0.5, radius: 1.0 },
            lmax: 2,
            z0: 1.0,
            width_ratio: 0.1,
            region_cos_min: -0.8,
            nodes: 60,
            polar_nodes: 40,
            azimuth_nodes: 32,
            range_sigmas: 13.5,
            cap_sigmas: 14.0,
            box_n: [96, 48, 48],
            box_step: 0.5,
            window_widths: 12.0,
            coarse_fraction: 2.0 / 3.0,
        }
    }
}

impl FactorizationConfig {
    pub fn validate(&self) -> Vec<String> {
        let mut d = vec![];
        if !(self.m1 > 0.0 && self.m2 > 0.0) {
            d.push(format!("masses must be positive, got {} and {}", self.m1, self.m2));
        }
        if let Err(e) = self.potential.validate() {
            d.push(e.to_string());
        }
        if !(self.z0 > 0.0) {
            d.push(format!("z0 must be positive, got {}", self.z0));
        }
        if !(self.width_ratio > 0.0) || self.width_ratio * 3.0 >= 1.0 {
            d.push(format!("packet support touches threshold: width_ratio = {} (needs < 1/3)", self.width_ratio));
        }
        if !(self.region_cos_min >= -1.0 && self.region_cos_min < 1.0) {
            d.push(format!("region_cos_min must lie in [-1, 1), got {}", self.region_cos_min));
        }
        if self.nodes < 4 || self.polar_nodes < 4 || self.azimuth_nodes < 4 {
            d.push("quadrature node counts must be at least 4".into());
        }
        if !(self.coarse_fraction > 0.0 && self.coarse_fraction < 1.0) {
            d.push(format!("coarse_fraction must lie in (0, 1), got {}", self.coarse_fraction));
        }
        if !(self.range_sigmas > 0.0 && self.cap_sigmas > 0.0 && self.box_step > 0.0 && self.window_widths > 0.0) {
            d.push("range, cap, box step and window widths must be positive".into());
        }
        if self.box_n.iter().any(|&n| n < 4) {
            d.push(format!("box needs at least 4 points per axis, got {:?}", self.box_n));
        }
        d
    }

    pub fn sigma_p(&self) -> f64 {
        self.width_ratio * self.z0
    }

    pub fn mu(&self) -> f64 {
        self.m1 * self.m2 / (self.m1 + self.m2)
    }

    /// M̄ = m₁ + m₂ + z̄²/(2μ)
    pub fn central_mass(&self) -> f64 {
        self.m1 + self.m2 + self.z0 * self.z0 / (2.0 * self.mu())
    }

    /// p̄₁ at rest, p̄₂ along x̂ with (p̄₁ + p̄₂)² = M̄².
    pub fn central_momenta(&self) -> [FourVector; 2] {
        let m = self.central_mass();
        let e2 = (m * m - self.m1 * self.m1 - self.m2 * self.m2) / (2.0 * self.m1);
        let p2 = (e2 * e2 - self.m2 * self.m2).sqrt();
        [FourVector::new(self.m1, 0.0, 0.0, 0.0), FourVector::new(e2, p2, 0.0, 0.0)]
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FactorizationResult {
    pub width_ratio: f64,
    pub w: f64,
    pub w_error: f64,
    pub sigma: f64,
    pub luminosity: LuminosityResult,
    pub sigma_l: f64,
    pub ratio: f64,
    /// Propagated from the w and L quadrature estimates.
    pub ratio_error: f64,
}

/// Gaussian exponents below this are dropped from the angular sums.
const NEGLIGIBLE_EXPONENT: f64 = -40.0;

struct KPoint {
    k: f64,
    weight: f64,
    e1: f64,
    e2: f64,
    m: f64,
    /// (2π)^{-2}(k/(4M))·i4πM/z·(e^{2iδ_l}−1)·4π per l
    coeff: Vec<C64>,
    cap: f64,
}

fn kernel_tables(cfg: &FactorizationConfig, z_lo: f64, z_hi: f64) -> Result<ElasticKernel> {
    let n = 400;
    let grid: Vec<f64> = (0..n).map(|i| z_lo + (z_hi - z_lo) * i as f64 / (n - 1) as f64).collect();
    let tables = (0..=cfg.lmax)
        .map(|l| {
            let ch = RadialChannel { l: l as u32, n: 1, dr: 1.0, m1: cfg.m1, m2: cfg.m2 };
            phase_shifts_stationary(&ch, &cfg.potential, &grid)
        })
        .collect::<Result<Vec<_>>>()?;
    ElasticKernel::new(cfg.m1, cfg.m2, tables)
}

/// Gram matrix ∫_Δ Y_lm Y_l'm' dΩ for cos∠(k̂, x̂) ∈ [cos_min, 1], polar axis x̂.
fn region_gram(lmax: usize, cos_min: f64) -> DMatrix<f64> {
    let nlm = (lmax + 1) * (lmax + 1);
    let (x, w) = gauss_legendre(80);
    let nph = 64;
    let half = 0.5 * (1.0 - cos_min);
    let mut g = DMatrix::zeros(nlm, nlm);
    let mut y = vec![];
    for (xi, wi) in x.iter().zip(&w) {
        let c = cos_min + half * (xi + 1.0);
        for j in 0..nph {
            let ph = 2.0 * PI * j as f64 / nph as f64;
            real_harmonics(lmax, c, ph, &mut y);
            let wt = wi * half * 2.0 * PI / nph as f64;
            for a in 0..nlm {
                for b in 0..nlm {
                    g[(a, b)] += wt * y[a] * y[b];
                }
            }
        }
    }
    g
}

/// w over the quadrature described by `cfg` with `nodes` radial nodes.
fn probability(cfg: &FactorizationConfig, kernel: &ElasticKernel, gram: &DMatrix<f64>, nodes: usize) -> Result<f64> {
    let sig = cfg.sigma_p();
    let [pb1, pb2] = cfg.central_momenta();
    let mb = cfg.central_mass();
    let kb = two_body_momentum(mb, cfg.m1, cfg.m2)?;
    let (xu, wu) = gauss_legendre(nodes);
    let ubx = pb2[1] / mb;
    let hu = cfg.range_sigmas * sig / mb;
    let hk_hi = cfg.range_sigmas * sig;
    let hk_lo = hk_hi.min(0.9 * kb);
    let lmax = cfg.lmax;
    let nlm = (lmax + 1) * (lmax + 1);

    let kpts: Vec<KPoint> = xu
        .iter()
        .zip(&wu)
        .map(|(x, w)| {
            // Affine map of [−1, 1] onto [k̄ − hk_lo, k̄ + hk_hi].
            let (mid, half) = (kb + 0.5 * (hk_hi - hk_lo), 0.5 * (hk_hi + hk_lo));
            let k = mid + half * x;
            let (e1, e2) = ((cfg.m1.powi(2) + k * k).sqrt(), (cfg.m2.powi(2) + k * k).sqrt());
            let m = e1 + e2;
            let z = kernel.z_of_sqrt_s(m);
            let pre = C64::new(0.0, 4.0 * PI * m / z) * ((2.0 * PI).powi(-2) * k / (4.0 * m) * 4.0 * PI);
            let coeff = kernel.partial_amplitudes(z)?.into_iter().map(|a| a * pre).collect();
            Ok(KPoint { k, weight: w * half, e1, e2, m, coeff, cap: PI.min(cfg.cap_sigmas * sig / k) })
        })
        .collect::<Result<_>>()?;

    let (xt, wt) = gauss_legendre(cfg.polar_nodes);
    let nph = cfg.azimuth_nodes;
    // Ψ₁Ψ₂ = √((2π)⁶·4p₁⁰p₂⁰)·g₁g₂
    let norm = (2.0 * PI * sig * sig).powf(-1.5) * (2.0 * PI).powi(3) * 2.0;
    let (c1, c2) = (pb1.spatial(), pb2.spatial());
    let inv4s2 = 1.0 / (4.0 * sig * sig);
    let azimuth: Vec<(f64, f64)> = (0..nph).map(|j| (2.0 * PI * j as f64 / nph as f64).sin_cos()).map(|(s, c)| (c, s)).collect();
    let harmonics = RealHarmonics::new(lmax);

    let rows: Vec<Result<f64>> = (0..nodes)
        .into_par_iter()
        .map(|iu| {
            let ux = ubx + hu * xu[iu];
            let wux = hu * wu[iu];
            let mut acc = 0.0;
            let mut y = Vec::with_capacity(nlm);
            let mut psilm = vec![0.0; nlm];
            for ip in 0..nodes {
                let up = 0.5 * hu * (xu[ip] + 1.0);
                let wup = 0.5 * hu * wu[ip];
                let uvec = Vector3::new(ux, up, 0.0);
                let u0 = (1.0 + uvec.norm_squared()).sqrt();
                let uf = FourVector::from_parts(u0, uvec);
                let linv = LorentzMatrix::boost_spatial(&uvec).inverse();
                let perp = pb1 - uf * pb1.dot(&uf);
                let nst = linv.apply(&perp).spatial().normalize();
                let mut e1 = nst.cross(&Vector3::z());
                if e1.norm() < 1e-6 {
                    e1 = nst.cross(&Vector3::y());
                }
                let e1 = e1.normalize();
                let e2 = nst.cross(&e1);
                for kp in &kpts {
                    psilm.iter_mut().for_each(|v| *v = 0.0);
                    for (xt_i, wt_i) in xt.iter().zip(&wt) {
                        let th = 0.5 * kp.cap * (xt_i + 1.0);
                        let wth = 0.5 * kp.cap * wt_i * th.sin() * 2.0 * PI / nph as f64;
                        let (st, ct) = th.sin_cos();
                        for &(cp, sp) in &azimuth {
                            let n = nst * ct + (e1 * cp + e2 * sp) * st;
                            // L_u(0, k n̂) = (u⃗·k n̂, k n̂ + u⃗ (u⃗·k n̂)/(1 + u⁰))
                            let kn = n * kp.k;
                            let ukn = uvec.dot(&kn);
                            let lq = kn + uvec * (ukn / (1.0 + u0));
                            let p1 = uvec * kp.e1 + lq;
                            let p2 = uvec * kp.e2 - lq;
                            let expo = -((p1 - c1).norm_squared() + (p2 - c2).norm_squared()) * inv4s2;
                            if expo < NEGLIGIBLE_EXPONENT {
                                continue;
                            }
                            let (t1, t2) = (u0 * kp.e1 + ukn, u0 * kp.e2 - ukn);
                            let psi = norm * (t1 * t2).sqrt() * expo.exp() * wth;
                            harmonics.eval(&n, &mut y);
                            for (a, ya) in psilm.iter_mut().zip(&y) {
                                *a += ya * psi;
                            }
                        }
                    }
                    let amp: Vec<C64> = (0..=lmax)
                        .flat_map(|l| {
                            let c = kp.coeff[l];
                            (-(l as i64)..=l as i64).map(move |m| (l, m, c))
                        })
                        .map(|(l, m, c)| c * psilm[lm_index(l, m)])
                        .collect();
                    let mut val = 0.0;
                    for a in 0..nlm {
                        for b in 0..nlm {
                            val += gram[(a, b)] * (amp[a].conj() * amp[b]).re;
                        }
                    }
                    let (k, m) = (kp.k, kp.m);
                    let meas = (m.powi(3) / u0) * (k * m / (kp.e1 * kp.e2)) * (k / (4.0 * (2.0 * PI).powi(6) * m)) * 2.0 * PI * up;
                    acc += wux * wup * kp.weight * meas * val;
                }
            }
            Ok(acc)
        })
        .collect();
    rows.into_iter().sum()
}

/// w, σ_Δ(p̄₁, p̄₂), L and w/(σL) for one packet width.
pub fn factorization(cfg: &FactorizationConfig) -> Result<FactorizationResult> {
    let diag = cfg.validate();
    if !diag.is_empty() {
        return Err(Error::Config(diag.join("; ")));
    }
    let sig = cfg.sigma_p();
    let [pb1, pb2] = cfg.central_momenta();
    let mb = cfg.central_mass();
    let kb = two_body_momentum(mb, cfg.m1, cfg.m2)?;
    let k_lo = kb - (cfg.range_sigmas * sig).min(0.9 * kb);
    let k_hi = kb + cfg.range_sigmas * sig;
    let z_of_k = |k: f64| {
        let m = (cfg.m1.powi(2) + k * k).sqrt() + (cfg.m2.powi(2) + k * k).sqrt();
        (2.0 * cfg.mu() * (m - cfg.m1 - cfg.m2)).sqrt()
    };
    let kernel = kernel_tables(cfg, 0.999 * z_of_k(k_lo), 1.001 * z_of_k(k_hi))?;

    let d = to_center(&[pb1, pb2], &[cfg.m1, cfg.m2])?;
    let sigma = cross_section_band(&kernel, mb * mb, d.q[0].spatial(), Vector3::x(), cfg.region_cos_min, 1.0, 200)?;

    let width = 0.5 / sig;
    let grid = SamplingBox::new([0.0; 3], cfg.box_n, cfg.box_step * width)?;
    let pk1 = PositionPacket::from_momentum(&MomentumGaussian::new(cfg.m1, pb1.spatial(), sig), grid, Evolution::Free)?;
    let pk2 = PositionPacket::from_momentum(&MomentumGaussian::new(cfg.m2, pb2.spatial(), sig), grid, Evolution::Free)?;
    let v = pb2[1] / pb2.t();
    let window = TimeWindow::symmetric(cfg.window_widths * width / v, 0.5 * width / v);
    let lum = luminosity(&pk1, &pk2, &pb1, &pb2, &window)?;

    let gram = region_gram(cfg.lmax, cfg.region_cos_min);
    let w = probability(cfg, &kernel, &gram, cfg.nodes)?;
    let coarse_nodes = ((cfg.nodes as f64 * cfg.coarse_fraction).round() as usize).max(4);
    let w_coarse = probability(cfg, &kernel, &gram, coarse_nodes)?;
    let w_error = (w - w_coarse).abs();
    let sigma_l = sigma * lum.value;
    let ratio = w / sigma_l;
    let ratio_error = ratio * ((w_error / w).powi(2) + (lum.quadrature_error / lum.value).powi(2)).sqrt();
    Ok(FactorizationResult { width_ratio: cfg.width_ratio, w, w_error, sigma, luminosity: lum, sigma_l, ratio, ratio_error })
}
