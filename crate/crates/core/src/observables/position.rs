//! Position-space packets ψ̃(t,x⃗) = (2π)^{-3/2} ∫d³p g(p⃗) e^{−i(p⁰t − p⃗·x⃗)} sampled on a periodic box.

use std::f64::consts::PI;
use std::sync::Arc;

use nalgebra::Vector3;
use num_complex::Complex64 as C64;
use rustfft::{Fft, FftDirection, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fourvec::FourVector;

/// Largest density on a box face, relative to the peak, before a slice counts as truncated.
pub const TRUNCATION_TOL: f64 = 1e-8;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SamplingBox {
    pub center: [f64; 3],
    pub n: [usize; 3],
    pub dx: f64,
}

impl SamplingBox {
    pub fn new(center: [f64; 3], n: [usize; 3], dx: f64) -> Result<Self> {
        if !(dx > 0.0 && dx.is_finite()) || n.iter().any(|&k| k < 4) {
            return Err(Error::Config(format!("invalid sampling box n = {n:?}, dx = {dx}")));
        }
        Ok(SamplingBox { center, n, dx })
    }

    pub fn len(&self) -> usize {
        self.n.iter().product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn cell_volume(&self) -> f64 {
        self.dx.powi(3)
    }

    /// Lower corner along each axis: x_j = corner + j·dx.
    pub fn corner(&self, axis: usize) -> f64 {
        self.center[axis] - (self.n[axis] / 2) as f64 * self.dx
    }

    pub fn coordinate(&self, axis: usize, j: usize) -> f64 {
        self.corner(axis) + j as f64 * self.dx
    }

    pub fn index(&self, i: usize, j: usize, k: usize) -> usize {
        (i * self.n[1] + j) * self.n[2] + k
    }

    pub fn point(&self, idx: usize) -> Vector3<f64> {
        let k = idx % self.n[2];
        let j = (idx / self.n[2]) % self.n[1];
        let i = idx / (self.n[1] * self.n[2]);
        Vector3::new(self.coordinate(0, i), self.coordinate(1, j), self.coordinate(2, k))
    }

    /// Angular wavenumber of FFT bin m along an axis.
    pub fn wavenumber(&self, axis: usize, m: usize) -> f64 {
        let n = self.n[axis];
        let s = if m < n.div_ceil(2) { m as f64 } else { m as f64 - n as f64 };
        2.0 * PI * s / (n as f64 * self.dx)
    }

    fn dk3(&self) -> f64 {
        (0..3).map(|a| 2.0 * PI / (self.n[a] as f64 * self.dx)).product()
    }
}

/// Momentum wave function g(p⃗) = (2πσ²)^{-3/4} exp(−|p⃗−p⃗₀|²/(4σ²)) e^{−ip⃗·a⃗},
/// i.e. Ψ(p) = √((2π)³2p⁰) g(p⃗) with unit norm under d̃p, translated by a⃗.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MomentumGaussian {
    pub mass: f64,
    pub center: [f64; 3],
    pub sigma: f64,
    pub offset: [f64; 3],
}

impl MomentumGaussian {
    pub fn new(mass: f64, center: Vector3<f64>, sigma: f64) -> Self {
        MomentumGaussian { mass, center: center.into(), sigma, offset: [0.0; 3] }
    }

    /// Multiplies Ψ by e^{ip·a} with a = (0, a⃗).
    pub fn translated(self, a: Vector3<f64>) -> Self {
        let o = Vector3::from(self.offset) + a;
        MomentumGaussian { offset: o.into(), ..self }
    }

    pub fn central_momentum(&self) -> FourVector {
        FourVector::on_shell(self.mass, Vector3::from(self.center))
    }

    /// Position width of the density along each axis, 1/(2σ).
    pub fn position_width(&self) -> f64 {
        0.5 / self.sigma
    }

    pub fn g(&self, p: &Vector3<f64>) -> C64 {
        let d = p - Vector3::from(self.center);
        let amp = (2.0 * PI * self.sigma * self.sigma).powf(-0.75) * (-d.norm_squared() / (4.0 * self.sigma * self.sigma)).exp();
        C64::from_polar(amp, -p.dot(&Vector3::from(self.offset)))
    }

    /// Ψ(p) on shell.
    pub fn psi(&self, p: &FourVector) -> C64 {
        self.g(&p.spatial()) * ((2.0 * PI).powi(3) * 2.0 * p.t()).max(0.0).sqrt()
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.mass > 0.0 && self.sigma > 0.0) {
            return Err(Error::Config(format!("invalid momentum packet {self:?}")));
        }
        Ok(())
    }
}

/// Time dependence of the sampled packet.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Evolution {
    /// Exact dispersion p⁰ = √(m² + p⃗²), with spreading.
    Free,
    /// Dispersion linearized at the carrier: the density translates rigidly at the group velocity.
    Rigid,
}

struct Fft3 {
    plans: [Arc<dyn Fft<f64>>; 3],
}

impl Fft3 {
    fn new(n: [usize; 3], dir: FftDirection) -> Self {
        let mut planner = FftPlanner::new();
        Fft3 { plans: [planner.plan_fft(n[0], dir), planner.plan_fft(n[1], dir), planner.plan_fft(n[2], dir)] }
    }

    fn run(&self, data: &mut [C64], n: [usize; 3]) {
        let [nx, ny, nz] = n;
        for line in data.chunks_exact_mut(nz) {
            self.plans[2].process(line);
        }
        let mut buf = vec![C64::new(0.0, 0.0); ny.max(nx)];
        for i in 0..nx {
            for k in 0..nz {
                for j in 0..ny {
                    buf[j] = data[(i * ny + j) * nz + k];
                }
                self.plans[1].process(&mut buf[..ny]);
                for j in 0..ny {
                    data[(i * ny + j) * nz + k] = buf[j];
                }
            }
        }
        for j in 0..ny {
            for k in 0..nz {
                for i in 0..nx {
                    buf[i] = data[(i * ny + j) * nz + k];
                }
                self.plans[0].process(&mut buf[..nx]);
                for i in 0..nx {
                    data[(i * ny + j) * nz + k] = buf[i];
                }
            }
        }
    }
}

/// ψ̃ on a sampling box, evaluated per time slice from stored momentum-space coefficients.
#[derive(Clone)]
pub struct PositionPacket {
    pub grid: SamplingBox,
    pub mass: f64,
    /// Carrier momentum p⃗₀; coefficients are stored relative to it.
    pub carrier: Vector3<f64>,
    pub evolution: Evolution,
    spectrum: Vec<C64>,
    energies: Vec<f64>,
    inverse: Arc<Fft3>,
}

impl std::fmt::Debug for PositionPacket {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("PositionPacket")
            .field("grid", &self.grid)
            .field("mass", &self.mass)
            .field("carrier", &self.carrier)
            .field("evolution", &self.evolution)
            .finish()
    }
}

impl PositionPacket {
    fn relative_k(grid: &SamplingBox, idx: usize) -> Vector3<f64> {
        let k = idx % grid.n[2];
        let j = (idx / grid.n[2]) % grid.n[1];
        let i = idx / (grid.n[1] * grid.n[2]);
        Vector3::new(grid.wavenumber(0, i), grid.wavenumber(1, j), grid.wavenumber(2, k))
    }

    fn assemble(grid: SamplingBox, mass: f64, carrier: Vector3<f64>, evolution: Evolution, spectrum: Vec<C64>) -> Self {
        let energies = (0..grid.len())
            .map(|idx| {
                let p = carrier + Self::relative_k(&grid, idx);
                match evolution {
                    Evolution::Free => (mass * mass + p.norm_squared()).sqrt(),
                    Evolution::Rigid => {
                        let e0 = (mass * mass + carrier.norm_squared()).sqrt();
                        e0 + carrier.dot(&(p - carrier)) / e0
                    }
                }
            })
            .collect();
        let inverse = Arc::new(Fft3::new(grid.n, FftDirection::Inverse));
        PositionPacket { grid, mass, carrier, evolution, spectrum, energies, inverse }
    }

    /// Transform of a momentum Gaussian, carrier at its center.
    pub fn from_momentum(psi: &MomentumGaussian, grid: SamplingBox, evolution: Evolution) -> Result<Self> {
        psi.validate()?;
        let carrier = Vector3::from(psi.center);
        let spectrum = (0..grid.len()).map(|idx| psi.g(&(carrier + Self::relative_k(&grid, idx)))).collect();
        Ok(Self::assemble(grid, psi.mass, carrier, evolution, spectrum))
    }

    /// Packet with ψ̃(0,x⃗) ∝ envelope(x⃗)·e^{ip⃗₀·x⃗}, normalized on the box.
    pub fn from_position(
        grid: SamplingBox,
        mass: f64,
        carrier: Vector3<f64>,
        evolution: Evolution,
        envelope: impl Fn(&Vector3<f64>) -> C64,
    ) -> Result<Self> {
        if !(mass > 0.0) {
            return Err(Error::Config(format!("invalid mass {mass}")));
        }
        let mut data: Vec<C64> = (0..grid.len()).map(|idx| envelope(&grid.point(idx))).collect();
        let norm = (data.iter().map(|a| a.norm_sqr()).sum::<f64>() * grid.cell_volume()).sqrt();
        if !(norm > 0.0 && norm.is_finite()) {
            return Err(Error::Config("position envelope has zero norm on the box".into()));
        }
        Fft3::new(grid.n, FftDirection::Forward).run(&mut data, grid.n);
        let scale = (2.0 * PI).powf(1.5) / (grid.dk3() * grid.len() as f64 * norm);
        let corner = Vector3::new(grid.corner(0), grid.corner(1), grid.corner(2));
        for (idx, a) in data.iter_mut().enumerate() {
            let k = Self::relative_k(&grid, idx);
            *a *= C64::from_polar(scale, -k.dot(&corner));
        }
        Ok(Self::assemble(grid, mass, carrier, evolution, data))
    }

    pub fn group_velocity(&self) -> Vector3<f64> {
        self.carrier / (self.mass * self.mass + self.carrier.norm_squared()).sqrt()
    }

    /// ψ̃(t, x⃗_j) on every box point.
    pub fn slice(&self, t: f64) -> Vec<C64> {
        let g = &self.grid;
        let corner = Vector3::new(g.corner(0), g.corner(1), g.corner(2));
        let mut data: Vec<C64> = self
            .spectrum
            .iter()
            .zip(&self.energies)
            .enumerate()
            .map(|(idx, (a, e))| {
                let k = Self::relative_k(g, idx);
                a * C64::from_polar(1.0, k.dot(&corner) - e * t)
            })
            .collect();
        self.inverse.run(&mut data, g.n);
        let scale = (2.0 * PI).powf(-1.5) * g.dk3();
        for (idx, a) in data.iter_mut().enumerate() {
            *a *= C64::from_polar(scale, self.carrier.dot(&g.point(idx)));
        }
        data
    }

    /// ρ(t, x⃗) = |ψ̃|²
    pub fn density(&self, t: f64) -> Vec<f64> {
        self.slice(t).iter().map(|a| a.norm_sqr()).collect()
    }

    /// ∫d³x ρ on the box.
    pub fn slice_norm(&self, t: f64) -> f64 {
        self.density(t).iter().sum::<f64>() * self.grid.cell_volume()
    }

    /// Density-weighted mean position.
    pub fn centroid(&self, t: f64) -> Vector3<f64> {
        let rho = self.density(t);
        let w: f64 = rho.iter().sum();
        rho.iter().enumerate().map(|(idx, r)| self.grid.point(idx) * *r).sum::<Vector3<f64>>() / w
    }

    /// Largest face density relative to the peak.
    pub fn face_fraction(grid: &SamplingBox, rho: &[f64]) -> f64 {
        let peak = rho.iter().cloned().fold(0.0, f64::max);
        if peak == 0.0 {
            return 0.0;
        }
        let [nx, ny, nz] = grid.n;
        let mut face: f64 = 0.0;
        for i in 0..nx {
            for j in 0..ny {
                for k in 0..nz {
                    if i == 0 || j == 0 || k == 0 || i == nx - 1 || j == ny - 1 || k == nz - 1 {
                        face = face.max(rho[grid.index(i, j, k)]);
                    }
                }
            }
        }
        face / peak
    }

    /// Truncation error when the packet reaches the box faces at time t.
    pub fn check_truncation(&self, t: f64) -> Result<f64> {
        let f = Self::face_fraction(&self.grid, &self.density(t));
        if f > TRUNCATION_TOL {
            return Err(Error::Truncation(format!("packet reaches the box faces at t = {t}: face/peak density {f:e}")));
        }
        Ok(f)
    }

    /// ρ̂(x_⊥) = ∫dx ρ(t, x, x_⊥) on the (y, z) grid.
    pub fn projected_density(&self, t: f64) -> Vec<f64> {
        let [nx, ny, nz] = self.grid.n;
        let rho = self.density(t);
        let mut out = vec![0.0; ny * nz];
        for i in 0..nx {
            for j in 0..ny {
                for k in 0..nz {
                    out[j * nz + k] += rho[self.grid.index(i, j, k)] * self.grid.dx;
                }
            }
        }
        out
    }
}

/// Integrated density of a window function (flat-top with tanh edges) of full width w:
/// f(y) = ½[tanh((y + w/2)/s) − tanh((y − w/2)/s)], with ∫f dy = w.
pub fn flat_top(y: f64, width: f64, edge: f64) -> f64 {
    0.5 * (((y + 0.5 * width) / edge).tanh() - ((y - 0.5 * width) / edge).tanh())
}
