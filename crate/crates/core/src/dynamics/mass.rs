use std::sync::Arc;

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;

use super::channel::RadialChannel;
use super::packet::RelativeWavePacket;
use super::potential::Potential;
use super::tridiag::{tql2, TridiagEigen};
use crate::error::{Error, Result};

/// Fraction of the grid (from the outer wall) that must be free of interaction.
pub const ASYMPTOTIC_FRACTION: f64 = 1.0 / 3.0;

/// Invariant-mass operator on one radial channel with its eigendecomposition.
///
/// Operators built from a potential keep their tridiagonal matrix; operators
/// defined as functions of another operator share its eigenvectors and only
/// carry the transformed spectrum.
#[derive(Clone, Debug)]
pub struct MassOperator {
    pub channel: RadialChannel,
    pub potential: Potential,
    tridiagonal: Option<(Vec<f64>, Vec<f64>)>,
    values: Vec<f64>,
    vectors: Arc<Vec<f64>>,
}

/// M = (m₁+m₂)·1 + T_l with the three-point radial kinetic matrix.
pub fn build_free_mass(ch: &RadialChannel) -> Result<MassOperator> {
    build_interacting_mass(ch, &Potential::Zero)
}

/// M′ = M + V, with V sampled as cell averages over [r_k − Δr/2, r_k + Δr/2].
pub fn build_interacting_mass(ch: &RadialChannel, v: &Potential) -> Result<MassOperator> {
    ch.validate()?;
    v.validate()?;
    let outer = (1.0 - ASYMPTOTIC_FRACTION) * ch.radius();
    if v.support() > outer {
        return Err(Error::Config(format!(
            "potential reaches asymptotic region: support {} exceeds {outer} (outer third of the grid)",
            v.support()
        )));
    }
    let mu = ch.mu();
    let h2 = ch.dr * ch.dr;
    let cent = (ch.l * (ch.l + 1)) as f64 / (2.0 * mu);
    let diag: Vec<f64> = (0..ch.n)
        .map(|k| {
            let r = ch.r(k);
            ch.threshold() + 1.0 / (mu * h2) + cent / (r * r) + v.cell_average(r - 0.5 * ch.dr, r + 0.5 * ch.dr)
        })
        .collect();
    let off = vec![-1.0 / (2.0 * mu * h2); ch.n - 1];
    let TridiagEigen { values, vectors, .. } = tql2(&diag, &off);
    Ok(MassOperator { channel: *ch, potential: *v, tridiagonal: Some((diag, off)), values, vectors: Arc::new(vectors) })
}

impl MassOperator {
    pub fn dim(&self) -> usize {
        self.channel.n
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.values
    }

    pub fn eigenvector(&self, a: usize) -> &[f64] {
        let n = self.dim();
        &self.vectors[a * n..(a + 1) * n]
    }

    /// z_a = √(2μ(λ_a − m₁ − m₂)), clamped at 0 below threshold.
    pub fn momenta(&self) -> Vec<f64> {
        self.values.iter().map(|&l| self.channel.z_of_mass(l)).collect()
    }

    /// Indices of eigenvalues below threshold.
    pub fn bound_states(&self) -> Vec<usize> {
        (0..self.dim()).take_while(|&a| self.values[a] < self.channel.threshold()).collect()
    }

    /// Operator with the same eigenvectors and eigenvalues λ ↦ f(λ).
    pub fn spectral_map(&self, f: impl Fn(f64) -> f64) -> MassOperator {
        MassOperator {
            channel: self.channel,
            potential: self.potential,
            tridiagonal: None,
            values: self.values.iter().map(|&l| f(l)).collect(),
            vectors: Arc::clone(&self.vectors),
        }
    }

    pub fn dense(&self) -> DMatrix<f64> {
        let n = self.dim();
        match &self.tridiagonal {
            Some((d, e)) => DMatrix::from_fn(n, n, |i, j| {
                if i == j {
                    d[i]
                } else if i + 1 == j {
                    e[i]
                } else if j + 1 == i {
                    e[j]
                } else {
                    0.0
                }
            }),
            None => {
                let v = DMatrix::from_row_slice(n, n, &self.vectors);
                v.transpose() * DMatrix::from_diagonal(&nalgebra::DVector::from_column_slice(&self.values)) * v
            }
        }
    }

    /// c_a = ⟨e_a, ψ⟩
    pub fn coefficients(&self, psi: &[C64]) -> Vec<C64> {
        let n = self.dim();
        (0..n)
            .map(|a| {
                let row = self.eigenvector(a);
                let (mut re, mut im) = (0.0, 0.0);
                for (v, p) in row.iter().zip(psi) {
                    re += v * p.re;
                    im += v * p.im;
                }
                C64::new(re, im)
            })
            .collect()
    }

    /// ψ = Σ_a c_a e_a
    pub fn synthesize(&self, c: &[C64]) -> Vec<C64> {
        let n = self.dim();
        let mut re = vec![0.0; n];
        let mut im = vec![0.0; n];
        for (a, ca) in c.iter().enumerate() {
            if ca.re == 0.0 && ca.im == 0.0 {
                continue;
            }
            for ((r, i), v) in re.iter_mut().zip(im.iter_mut()).zip(self.eigenvector(a)) {
                *r += ca.re * v;
                *i += ca.im * v;
            }
        }
        re.into_iter().zip(im).map(|(r, i)| C64::new(r, i)).collect()
    }

    /// Mψ
    pub fn apply(&self, psi: &[C64]) -> Vec<C64> {
        match &self.tridiagonal {
            Some((d, e)) => {
                let n = self.dim();
                (0..n)
                    .map(|k| {
                        let mut acc = psi[k] * d[k];
                        if k > 0 {
                            acc += psi[k - 1] * e[k - 1];
                        }
                        if k + 1 < n {
                            acc += psi[k + 1] * e[k];
                        }
                        acc
                    })
                    .collect()
            }
            None => {
                let c: Vec<C64> = self.coefficients(psi).iter().zip(&self.values).map(|(c, l)| c * l).collect();
                self.synthesize(&c)
            }
        }
    }

    /// Multiplies spectral coefficients by e^{−i·scale·λ·t}.
    pub fn phase_coefficients(&self, c: &mut [C64], t: f64, scale: f64) {
        for (ca, l) in c.iter_mut().zip(&self.values) {
            *ca *= C64::from_polar(1.0, -scale * l * t);
        }
    }

    /// e^{−i·scale·M·t}ψ for the Hamiltonian scale·M.
    pub fn propagate(&self, psi: &[C64], t: f64, scale: f64) -> Vec<C64> {
        if t == 0.0 {
            return psi.to_vec();
        }
        let mut c = self.coefficients(psi);
        self.phase_coefficients(&mut c, t, scale);
        self.synthesize(&c)
    }

    /// Ψ(t) = Σ_a e^{−iλ_a t}⟨e_a,Ψ⟩e_a
    pub fn evolve(&self, psi: &RelativeWavePacket, t: f64) -> RelativeWavePacket {
        psi.with_amplitudes(self.propagate(&psi.amplitudes, t, 1.0))
    }

    /// max |⟨e_a,e_b⟩ − δ_ab| over a sample of pairs including all bound states.
    pub fn orthonormality_residual(&self, stride: usize) -> f64 {
        let n = self.dim();
        let mut idx: Vec<usize> = (0..n).step_by(stride.max(1)).collect();
        idx.extend(self.bound_states());
        idx.push(n - 1);
        let mut worst: f64 = 0.0;
        for &a in &idx {
            for &b in &idx {
                let d: f64 = self.eigenvector(a).iter().zip(self.eigenvector(b)).map(|(x, y)| x * y).sum();
                worst = worst.max((d - if a == b { 1.0 } else { 0.0 }).abs());
            }
        }
        worst
    }

    /// max ‖M e_a − λ_a e_a‖ over sampled eigenvectors.
    pub fn eigen_residual(&self, stride: usize) -> f64 {
        let n = self.dim();
        (0..n)
            .step_by(stride.max(1))
            .map(|a| {
                let e: Vec<C64> = self.eigenvector(a).iter().map(|&x| C64::new(x, 0.0)).collect();
                let me = self.apply(&e);
                me.iter().zip(&e).map(|(x, y)| (x - y * self.values[a]).norm_sqr()).sum::<f64>().sqrt()
            })
            .fold(0.0, f64::max)
    }

    /// max |M_ij − M_ji|; zero by construction for stored matrices.
    pub fn hermiticity_residual(&self) -> f64 {
        let m = self.dense();
        (&m - m.transpose()).abs().max()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn box_ground_state() {
        let ch = RadialChannel::with_radius(0, 400, 40.0, 1.0, 1.0).unwrap();
        let m = build_free_mass(&ch).unwrap();
        let exact = 2.0 + PI * PI / (2.0 * ch.mu() * 40.0 * 40.0);
        assert!((m.eigenvalues()[0] - exact).abs() < 1e-6);
        assert!(m.eigenvalues().iter().all(|&l| l >= 2.0));
        let ch1 = RadialChannel { l: 1, ..ch };
        assert!(build_free_mass(&ch1).unwrap().eigenvalues()[0] > m.eigenvalues()[0]);
    }

    #[test]
    fn deep_well_binds() {
        // s-wave bound state exists once √(2μV₀)·a > π/2.
        let ch = RadialChannel::with_radius(0, 600, 30.0, 1.0, 1.0).unwrap();
        let shallow = build_interacting_mass(&ch, &Potential::SquareWell { depth: 2.0, radius: 1.0 }).unwrap();
        assert!(shallow.bound_states().is_empty());
        let deep = build_interacting_mass(&ch, &Potential::SquareWell { depth: 3.0, radius: 1.0 }).unwrap();
        assert_eq!(deep.bound_states().len(), 1);
        let g = build_interacting_mass(&ch, &Potential::Gaussian { depth: 1.0, width: 1.5 }).unwrap();
        assert_eq!(g.hermiticity_residual(), 0.0);
        assert!(g.orthonormality_residual(37) < 1e-12);
        assert!(g.eigen_residual(53) < 1e-11);
        let lowest_kinetic = build_free_mass(&ch).unwrap().eigenvalues()[0] - 2.0;
        assert!(deep.eigenvalues()[0] >= 2.0 + lowest_kinetic - 3.0);
    }

    #[test]
    fn potential_must_leave_outer_third() {
        let ch = RadialChannel::with_radius(0, 100, 10.0, 1.0, 1.0).unwrap();
        let err = build_interacting_mass(&ch, &Potential::SquareWell { depth: 1.0, radius: 7.0 }).unwrap_err();
        assert!(err.to_string().contains("asymptotic region"));
    }

    #[test]
    fn zero_potential_is_free() {
        let ch = RadialChannel::with_radius(2, 200, 20.0, 1.0, 3.0).unwrap();
        let a = build_free_mass(&ch).unwrap();
        let b = build_interacting_mass(&ch, &Potential::Zero).unwrap();
        assert_eq!(a.eigenvalues(), b.eigenvalues());
        assert_eq!(a.dense(), b.dense());
    }

    #[test]
    fn spectral_map_dense_matches() {
        let ch = RadialChannel::with_radius(0, 30, 5.0, 1.0, 1.0).unwrap();
        let m = build_free_mass(&ch).unwrap();
        let s = m.spectral_map(|l| l + 0.25);
        let diff = s.dense() - m.dense();
        assert!((diff - DMatrix::identity(30, 30) * 0.25).abs().max() < 1e-12);
    }
}
