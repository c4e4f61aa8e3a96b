//! Elastic 2→2 cross sections: Monte-Carlo phase space and deterministic quadrature.

use std::f64::consts::PI;

use nalgebra::Vector3;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::flux::flux_factor;
use super::kernel::TransferKernel;
use crate::center::{from_center, to_center, CenterDecomposition};
use crate::error::{Error, Result};
use crate::fourvec::{FourVector, LorentzMatrix};

/// Independent random streams per MC run; fixed so results do not depend on the thread count.
pub const MC_STREAMS: usize = 16;

/// Final-state region Δ as an indicator on the outgoing lab momenta (q₁, q₂).
#[derive(Clone, Debug, PartialEq)]
pub enum Region {
    Full,
    /// cos∠(q⃗₁*, axis) ∈ [cos_min, cos_max], q⃗₁* the relative momentum of particle 1 in the center frame.
    CenterBand { axis: Vector3<f64>, cos_min: f64, cos_max: f64 },
    /// cos∠(q⃗₁, axis) ≥ cos_min for the lab momentum of particle 1.
    LabCone { axis: Vector3<f64>, cos_min: f64 },
    /// ΛΔ: contains q iff Δ contains Λ⁻¹q.
    Boosted { inner: Box<Region>, lambda: LorentzMatrix },
}

impl Region {
    pub fn boosted(self, lambda: LorentzMatrix) -> Region {
        Region::Boosted { inner: Box::new(self), lambda }
    }

    pub fn contains(&self, q1: &FourVector, q2: &FourVector, masses: [f64; 2]) -> bool {
        match self {
            Region::Full => true,
            Region::CenterBand { axis, cos_min, cos_max } => match to_center(&[*q1, *q2], &masses) {
                Ok(d) => {
                    let c = d.q[0].spatial().normalize().dot(&axis.normalize());
                    c >= *cos_min && c <= *cos_max
                }
                Err(_) => false,
            },
            Region::LabCone { axis, cos_min } => q1.spatial().normalize().dot(&axis.normalize()) >= *cos_min,
            Region::Boosted { inner, lambda } => {
                let inv = lambda.inverse();
                inner.contains(&inv.apply(q1), &inv.apply(q2), masses)
            }
        }
    }

    /// Parses `full`, `band:<cmin>:<cmax>` (center frame, axis x̂) or `cone:<cmin>` (lab, axis x̂).
    pub fn parse(s: &str) -> Result<Region> {
        let parts: Vec<&str> = s.split(':').collect();
        let num = |x: &str| x.trim().parse::<f64>().map_err(|_| Error::Config(format!("bad number {x:?} in region {s:?}")));
        let x = Vector3::x();
        let r = match parts.as_slice() {
            ["full"] => Region::Full,
            ["band", a, b] => Region::CenterBand { axis: x, cos_min: num(a)?, cos_max: num(b)? },
            ["cone", a] => Region::LabCone { axis: x, cos_min: num(a)? },
            _ => return Err(Error::Config(format!("unknown region {s:?}; expected full, band:<cmin>:<cmax> or cone:<cmin>"))),
        };
        Ok(r)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct McEstimate {
    pub sigma: f64,
    pub error: f64,
    pub samples: usize,
    /// Fraction of samples inside Δ.
    pub acceptance: f64,
}

/// Relative momentum k at invariant mass M for masses m1, m2.
pub fn two_body_momentum(m: f64, m1: f64, m2: f64) -> Result<f64> {
    let a = m * m - (m1 + m2).powi(2);
    let b = m * m - (m1 - m2).powi(2);
    if a < 0.0 {
        return Err(Error::Kinematic(format!("invariant mass {m} below threshold {}", m1 + m2)));
    }
    Ok((a * b).sqrt() / (2.0 * m))
}

fn stream_seeds(seed: u64) -> Vec<u64> {
    let mut master = ChaCha8Rng::seed_from_u64(seed);
    (0..MC_STREAMS).map(|_| master.random()).collect()
}

fn unit_vector(rng: &mut impl Rng) -> Vector3<f64> {
    let c: f64 = rng.random_range(-1.0..=1.0);
    let phi: f64 = rng.random_range(0.0..2.0 * PI);
    let s = (1.0 - c * c).max(0.0).sqrt();
    Vector3::new(s * phi.cos(), s * phi.sin(), c)
}

/// σ_Δ = (2π)⁴/(4F) ∫ d̃q₁ d̃q₂ δ⁴(p₁+p₂−q₁−q₂) |𝔗|² 1_Δ, sampled uniformly in the
/// center-frame direction of the final relative momentum. For 2→2 the phase-space
/// integral reduces to k/(16π²√s) ∫dΩ.
pub fn cross_section_mc(
    kernel: &dyn TransferKernel,
    p: [FourVector; 2],
    masses: [f64; 2],
    region: &Region,
    samples: usize,
    seed: u64,
) -> Result<McEstimate> {
    if samples < 2 {
        return Err(Error::Config("at least two samples are required".into()));
    }
    let f = flux_factor(&p[0], &p[1])?;
    if f <= 0.0 {
        return Err(Error::Kinematic("zero flux: no relative motion".into()));
    }
    let d = to_center(&p, &masses)?;
    let m = d.invariant_mass()?;
    let s = m * m;
    let k = two_body_momentum(m, masses[0], masses[1])?;
    let n_in = d.q[0].spatial().normalize();
    let scale = 4.0 * PI * k / (4.0 * f * 16.0 * PI * PI * m);
    let seeds = stream_seeds(seed);
    let per = samples / MC_STREAMS;
    let extra = samples % MC_STREAMS;
    let partial: Vec<Result<(f64, f64, usize)>> = seeds
        .par_iter()
        .enumerate()
        .map(|(i, &sd)| {
            let mut rng = ChaCha8Rng::seed_from_u64(sd);
            let count = per + usize::from(i < extra);
            let (mut sum, mut sum_sq, mut hits) = (0.0, 0.0, 0usize);
            for _ in 0..count {
                let n = unit_vector(&mut rng);
                let q = n * k;
                let out = CenterDecomposition {
                    u: d.u,
                    q: vec![FourVector::from_parts(0.0, q), FourVector::from_parts(0.0, -q)],
                    masses: masses.to_vec(),
                };
                let fin = from_center(&out)?;
                if !region.contains(&fin[0], &fin[1], masses) {
                    continue;
                }
                let a = kernel.amplitude(s, n.dot(&n_in))?;
                let v = scale * a.norm_sqr();
                sum += v;
                sum_sq += v * v;
                hits += 1;
            }
            Ok((sum, sum_sq, hits))
        })
        .collect();
    let (mut sum, mut sum_sq, mut hits) = (0.0, 0.0, 0usize);
    for r in partial {
        let (a, b, h) = r?;
        sum += a;
        sum_sq += b;
        hits += h;
    }
    let nf = samples as f64;
    let mean = sum / nf;
    let var = (sum_sq / nf - mean * mean).max(0.0) * nf / (nf - 1.0);
    Ok(McEstimate { sigma: mean, error: (var / nf).sqrt(), samples, acceptance: hits as f64 / nf })
}

/// Gauss-Legendre nodes and weights on [−1, 1].
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut z = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, z);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * z * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            dp = n as f64 * (z * p1 - p0) / (z * z - 1.0);
            let dz = p1 / dp;
            z -= dz;
            if dz.abs() < 1e-15 {
                break;
            }
        }
        x[i] = -z;
        x[n - 1 - i] = z;
        w[i] = 2.0 / ((1.0 - z * z) * dp * dp);
        w[n - 1 - i] = w[i];
    }
    (x, w)
}

/// σ over final relative directions with cos∠(k̂_f, axis) ∈ [cos_min, cos_max] in the center frame,
/// for an initial relative direction `n_in` there: (1/(64π²s))∫dΩ|𝔗|².
pub fn cross_section_band(
    kernel: &dyn TransferKernel,
    s: f64,
    n_in: Vector3<f64>,
    axis: Vector3<f64>,
    cos_min: f64,
    cos_max: f64,
    nodes: usize,
) -> Result<f64> {
    let (x, w) = gauss_legendre(nodes);
    let a = axis.normalize();
    let n_in = n_in.normalize();
    let mut e1 = a.cross(&Vector3::z());
    if e1.norm() < 1e-6 {
        e1 = a.cross(&Vector3::y());
    }
    let e1 = e1.normalize();
    let e2 = a.cross(&e1);
    let nph = 2 * nodes;
    let half = 0.5 * (cos_max - cos_min);
    let mut acc = 0.0;
    for (xi, wi) in x.iter().zip(&w) {
        let c = cos_min + half * (xi + 1.0);
        let sn = (1.0 - c * c).max(0.0).sqrt();
        for j in 0..nph {
            let ph = 2.0 * PI * j as f64 / nph as f64;
            let n = a * c + (e1 * ph.cos() + e2 * ph.sin()) * sn;
            acc += wi * half * (2.0 * PI / nph as f64) * kernel.amplitude(s, n.dot(&n_in))?.norm_sqr();
        }
    }
    Ok(acc / (64.0 * PI * PI * s))
}

#[cfg(test)]
mod tests {
    use super::super::kernel::ConstantKernel;
    use super::*;
    use num_complex::Complex64 as C64;

    fn head_on() -> [FourVector; 2] {
        [FourVector::on_shell(1.0, Vector3::new(0.0, 0.0, 0.8)), FourVector::on_shell(1.0, Vector3::new(0.0, 0.0, -0.8))]
    }

    #[test]
    fn gl_integrates_polynomials() {
        let (x, w) = gauss_legendre(7);
        let i: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(12)).sum();
        assert!((i - 2.0 / 13.0).abs() < 1e-14);
        assert!((w.iter().sum::<f64>() - 2.0).abs() < 1e-14);
    }

    #[test]
    fn zero_kernel_and_empty_region() {
        let z = cross_section_mc(&ConstantKernel(C64::new(0.0, 0.0)), head_on(), [1.0, 1.0], &Region::Full, 1000, 1).unwrap();
        assert_eq!(z.sigma, 0.0);
        let empty = Region::LabCone { axis: Vector3::x(), cos_min: 1.5 };
        let e = cross_section_mc(&ConstantKernel(C64::new(1.0, 0.0)), head_on(), [1.0, 1.0], &empty, 1000, 1).unwrap();
        assert_eq!((e.sigma, e.acceptance), (0.0, 0.0));
    }

    #[test]
    fn constant_kernel_is_exact() {
        let p = head_on();
        let m = (p[0] + p[1]).square().sqrt();
        let est = cross_section_mc(&ConstantKernel(C64::new(2.0, 0.0)), p, [1.0, 1.0], &Region::Full, 1000, 3).unwrap();
        let exact = 4.0 * 4.0 * PI / (64.0 * PI * PI * m * m);
        assert!((est.sigma - exact).abs() < 1e-12 * exact);
        let band = cross_section_band(&ConstantKernel(C64::new(2.0, 0.0)), m * m, Vector3::z(), Vector3::x(), -1.0, 1.0, 20).unwrap();
        assert!((band - exact).abs() < 1e-12 * exact);
    }

    #[test]
    fn zero_flux_rejected() {
        let rest = FourVector::new(1.0, 0.0, 0.0, 0.0);
        let r = cross_section_mc(&ConstantKernel(C64::new(1.0, 0.0)), [rest, rest], [1.0, 1.0], &Region::Full, 10, 0);
        assert!(matches!(r, Err(Error::Kinematic(_))));
    }

    #[test]
    fn region_parsing() {
        assert_eq!(Region::parse("full").unwrap(), Region::Full);
        assert!(matches!(Region::parse("band:-0.8:1").unwrap(), Region::CenterBand { .. }));
        assert!(Region::parse("cone").is_err());
    }
}
