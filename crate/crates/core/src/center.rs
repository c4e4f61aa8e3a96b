//! Center variables: (p₁…p_n) ↔ (u, q₁…q_n), invariant mass and the two-body reduction.

use nalgebra::Vector3;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fourvec::{check_velocity, FourVector, LorentzMatrix};

pub const CONSTRAINT_TOL: f64 = 1e-10;
const TIMELIKE_TOL: f64 = 1e-12;
const SHELL_TOL: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CenterDecomposition {
    pub u: FourVector,
    pub q: Vec<FourVector>,
    pub masses: Vec<f64>,
}

impl CenterDecomposition {
    /// ‖Σq_i‖ over all four components.
    pub fn constraint_residual(&self) -> f64 {
        self.q.iter().copied().sum::<FourVector>().euclid_norm()
    }

    pub fn validate(&self) -> Result<()> {
        check_velocity(&self.u)?;
        validate_relative(&self.q, &self.masses)
    }

    pub fn invariant_mass(&self) -> Result<f64> {
        invariant_mass(&self.q, &self.masses)
    }
}

fn validate_relative(q: &[FourVector], masses: &[f64]) -> Result<()> {
    if q.len() != masses.len() || q.is_empty() {
        return Err(Error::Constraint(format!("{} momenta for {} masses", q.len(), masses.len())));
    }
    if let Some(m) = masses.iter().find(|m| !(**m >= 0.0)) {
        return Err(Error::Constraint(format!("mass {m} is negative")));
    }
    for (i, qi) in q.iter().enumerate() {
        if qi.t() != 0.0 {
            return Err(Error::Constraint(format!("q_{i} has time component {}", qi.t())));
        }
    }
    let sum = q.iter().copied().sum::<FourVector>().euclid_norm();
    let scale = q.iter().map(|qi| qi.spatial().norm()).sum::<f64>().max(masses.iter().sum());
    if sum > CONSTRAINT_TOL * scale.max(1e-300) {
        return Err(Error::Constraint(format!("sum of relative momenta is {sum:e}")));
    }
    Ok(())
}

pub fn to_center(p: &[FourVector], masses: &[f64]) -> Result<CenterDecomposition> {
    if p.len() != masses.len() || p.is_empty() {
        return Err(Error::Constraint(format!("{} momenta for {} masses", p.len(), masses.len())));
    }
    for (i, (pi, m)) in p.iter().zip(masses).enumerate() {
        let residual = (pi.square() - m * m).abs();
        if residual > SHELL_TOL * pi.t().powi(2).max(1.0) || pi.t() < 0.0 {
            return Err(Error::OffShell { index: i, residual });
        }
    }
    let total: FourVector = p.iter().copied().sum();
    let p_sq = total.square();
    if p_sq <= TIMELIKE_TOL * total.euclid_norm().powi(2) {
        return Err(Error::Degenerate { p_sq });
    }
    let u = total * (1.0 / p_sq.sqrt());
    // Recompute u⁰ from u⃗ so that u² = 1 holds to rounding.
    let u = FourVector::velocity(u.spatial());
    let inv = LorentzMatrix::boost_spatial(&u.spatial()).inverse();
    let q = p
        .iter()
        .map(|pi| {
            let perp = *pi - u * pi.dot(&u);
            let mut qi = inv.apply(&perp);
            qi.0[0] = 0.0;
            qi
        })
        .collect::<Vec<_>>();
    Ok(CenterDecomposition { u, q, masses: masses.to_vec() })
}

/// p_i = √(m_i²+q⃗_i²)·u + L_u q_i
pub fn from_center(d: &CenterDecomposition) -> Result<Vec<FourVector>> {
    d.validate()?;
    let l = LorentzMatrix::boost(&d.u)?;
    Ok(d
        .q
        .iter()
        .zip(&d.masses)
        .map(|(qi, m)| d.u * (m * m + qi.spatial().norm_squared()).sqrt() + l.apply(qi))
        .collect())
}

/// M(q) = Σ √(m_i² + q⃗_i²)
pub fn invariant_mass(q: &[FourVector], masses: &[f64]) -> Result<f64> {
    validate_relative(q, masses)?;
    Ok(q.iter().zip(masses).map(|(qi, m)| (m * m + qi.spatial().norm_squared()).sqrt()).sum())
}

/// Relative three-momenta for an observer at rest; the last one is fixed by the constraint.
pub fn solved_relative(q: &[Vector3<f64>]) -> Vec<FourVector> {
    let mut out: Vec<FourVector> = q.iter().map(|v| FourVector::from_parts(0.0, *v)).collect();
    let last = -q.iter().sum::<Vector3<f64>>();
    out.push(FourVector::from_parts(0.0, last));
    out
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TwoBodyReduction {
    pub m1: f64,
    pub m2: f64,
    pub mu: f64,
    pub z_sq: f64,
    pub q_sq: f64,
}

impl TwoBodyReduction {
    pub fn from_z_sq(z_sq: f64, m1: f64, m2: f64) -> Result<Self> {
        let q_sq = q_sq_of_z_sq(z_sq, m1, m2)?;
        Ok(TwoBodyReduction { m1, m2, mu: reduced_mass(m1, m2), z_sq, q_sq })
    }

    /// m = m₁ + m₂ + z²/(2μ)
    pub fn mass(&self) -> f64 {
        self.m1 + self.m2 + self.z_sq / (2.0 * self.mu)
    }

    /// |√(m₁²+q²) + √(m₂²+q²) − m|
    pub fn defining_residual(&self) -> f64 {
        ((self.m1 * self.m1 + self.q_sq).sqrt() + (self.m2 * self.m2 + self.q_sq).sqrt() - self.mass()).abs()
    }
}

pub fn reduced_mass(m1: f64, m2: f64) -> f64 {
    m1 * m2 / (m1 + m2)
}

fn check_pair(m1: f64, m2: f64) -> Result<()> {
    if !(m1 > 0.0 && m2 > 0.0) {
        return Err(Error::Domain(format!("two-body reduction needs positive masses, got {m1}, {m2}")));
    }
    Ok(())
}

/// q² as a function of z², in the factored form
/// (m² − (m₁+m₂)²)(m² − (m₁−m₂)²)/(4m²), which equals the expanded
/// ¼(m² − 2(m₁²+m₂²) + (m₁²−m₂²)²/m²) without its cancellation near threshold.
pub fn q_sq_of_z_sq(z_sq: f64, m1: f64, m2: f64) -> Result<f64> {
    check_pair(m1, m2)?;
    if !(z_sq >= 0.0) {
        return Err(Error::Domain(format!("z² = {z_sq} is negative")));
    }
    let mu = reduced_mass(m1, m2);
    let kin = z_sq / (2.0 * mu);
    let m = m1 + m2 + kin;
    let above = kin * (m + m1 + m2);
    let diff = m1 - m2;
    Ok(above * (m * m - diff * diff) / (4.0 * m * m))
}

/// Inverse of [`q_sq_of_z_sq`]: z² = 2μ(√(m₁²+q²) + √(m₂²+q²) − m₁ − m₂),
/// with each kinetic term written as q²/(E_i + m_i).
pub fn z_sq_of_q_sq(q_sq: f64, m1: f64, m2: f64) -> Result<f64> {
    check_pair(m1, m2)?;
    if !(q_sq >= 0.0) {
        return Err(Error::Domain(format!("q² = {q_sq} is negative")));
    }
    let mu = reduced_mass(m1, m2);
    let e1 = (m1 * m1 + q_sq).sqrt();
    let e2 = (m2 * m2 + q_sq).sqrt();
    Ok(2.0 * mu * (q_sq / (e1 + m1) + q_sq / (e2 + m2)))
}
