//! Phase shifts from outward integration of the stationary radial equation.

use serde::{Deserialize, Serialize};

use super::channel::RadialChannel;
use super::potential::Potential;
use super::special::riccati;
use crate::error::{Error, Result};

/// Distance beyond the potential's support where solutions are matched.
pub const MATCH_OFFSET: f64 = 1.0;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PhaseShiftTable {
    pub l: u32,
    /// Strictly increasing.
    pub z: Vec<f64>,
    /// Continuous in z, pinned to the Born tail at the largest z.
    pub delta: Vec<f64>,
}

impl PhaseShiftTable {
    pub fn range(&self) -> (f64, f64) {
        (self.z[0], *self.z.last().expect("non-empty table"))
    }

    /// Local cubic interpolation.
    pub fn interpolate(&self, z: f64) -> Result<f64> {
        let (lo, hi) = self.range();
        if !(z >= lo && z <= hi) {
            return Err(Error::Range { z, lo, hi });
        }
        let n = self.z.len();
        if n < 4 {
            let k = self.z.partition_point(|&x| x <= z).clamp(1, n - 1);
            let (z0, z1) = (self.z[k - 1], self.z[k]);
            let w = if z1 > z0 { (z - z0) / (z1 - z0) } else { 0.0 };
            return Ok(self.delta[k - 1] * (1.0 - w) + self.delta[k] * w);
        }
        let k = self.z.partition_point(|&x| x <= z);
        let start = k.saturating_sub(2).min(n - 4);
        let xs = &self.z[start..start + 4];
        let ys = &self.delta[start..start + 4];
        let mut acc = 0.0;
        for i in 0..4 {
            let mut w = 1.0;
            for j in 0..4 {
                if i != j {
                    w *= (z - xs[j]) / (xs[i] - xs[j]);
                }
            }
            acc += w * ys[i];
        }
        Ok(acc)
    }
}

/// u'' = (l(l+1)/r² + 2μV(r) − z²) u
fn rhs(l: u32, mu: f64, v: &Potential, z_sq: f64, r: f64, u: f64) -> f64 {
    let cent = if l == 0 { 0.0 } else { (l * (l + 1)) as f64 / (r * r) };
    (cent + 2.0 * mu * v.eval(r) - z_sq) * u
}

fn rk4_segment(l: u32, mu: f64, v: &Potential, z_sq: f64, a: f64, b: f64, h_max: f64, state: &mut (f64, f64)) {
    // Potentials are evaluated strictly inside the segment, so jumps at its ends are never sampled.
    let inner = |r: f64| r.clamp(a + 1e-13 * b.max(1.0), b - 1e-13 * b.max(1.0));
    let mut r = a;
    while r < b {
        // Steps shrink near the origin, where the centrifugal term is stiff.
        let mut h = if l == 0 { h_max } else { h_max.min(0.05 * r.max(1e-12)) };
        if r + h > b || b - (r + h) < 1e-3 * h {
            h = b - r;
        }
        let (u, p) = *state;
        let f = |r: f64, u: f64| rhs(l, mu, v, z_sq, inner(r), u);
        let k1u = p;
        let k1p = f(r, u);
        let k2u = p + 0.5 * h * k1p;
        let k2p = f(r + 0.5 * h, u + 0.5 * h * k1u);
        let k3u = p + 0.5 * h * k2p;
        let k3p = f(r + 0.5 * h, u + 0.5 * h * k2u);
        let k4u = p + h * k3p;
        let k4p = f(r + h, u + h * k3u);
        let nu = u + h / 6.0 * (k1u + 2.0 * k2u + 2.0 * k3u + k4u);
        let np = p + h / 6.0 * (k1p + 2.0 * k2p + 2.0 * k3p + k4p);
        let norm = nu.abs().max(np.abs());
        *state = if norm > 1e100 { (nu / norm, np / norm) } else { (nu, np) };
        r += h;
    }
}

/// Principal-branch δ_l(z) from a single outward integration.
pub fn phase_shift_principal(l: u32, mu: f64, v: &Potential, z: f64) -> Result<f64> {
    if !(z > 0.0 && z.is_finite()) {
        return Err(Error::Matching(format!("z must be positive, got {z}")));
    }
    if matches!(v, Potential::Zero) {
        return Ok(0.0);
    }
    let z_sq = z * z;
    let r_match = v.support() + MATCH_OFFSET;
    let depth = v.sup_norm();
    let k_eff = (z_sq + 2.0 * mu * depth).sqrt().max(1.0);
    let h_max = (0.01f64).min(0.02 / k_eff);
    let (start, mut state) = if l == 0 {
        (0.0, (0.0, 1.0))
    } else {
        // u ≈ r^{l+1}(1 + c r²) near the origin, normalized to u(r_s) = 1.
        let r_s = 1e-3 / k_eff;
        let c = (2.0 * mu * v.eval(0.0) - z_sq) / (2.0 * (2 * l + 3) as f64);
        let lf = l as f64;
        let u = 1.0 + c * r_s * r_s;
        let up = ((lf + 1.0) + (lf + 3.0) * c * r_s * r_s) / r_s;
        (r_s, (u, up))
    };
    let mut knots = vec![start];
    knots.extend(v.breakpoints().into_iter().filter(|&b| b > start && b < r_match));
    knots.push(r_match);
    for w in knots.windows(2) {
        rk4_segment(l, mu, v, z_sq, w[0], w[1], h_max, &mut state);
    }
    let (u, up) = state;
    if !(u.is_finite() && up.is_finite()) || (u == 0.0 && up == 0.0) {
        return Err(Error::Matching(format!("integration diverged at z = {z}, l = {l}")));
    }
    let x = z * r_match;
    let (j, jp, n, np) = riccati(l, x);
    let num = z * jp * u - j * up;
    let den = z * np * u - n * up;
    if !(num.is_finite() && den.is_finite()) || (num == 0.0 && den == 0.0) {
        return Err(Error::Matching(format!("degenerate matching at z = {z}, l = {l}: r_match = {r_match}")));
    }
    Ok((num / den).atan())
}

/// δ_l on `z_grid` (any order, positive), unwrapped by continuity from the largest z.
pub fn phase_shifts_stationary(ch: &RadialChannel, v: &Potential, z_grid: &[f64]) -> Result<PhaseShiftTable> {
    v.validate()?;
    if z_grid.is_empty() {
        return Err(Error::Matching("empty z grid".into()));
    }
    let mut z: Vec<f64> = z_grid.to_vec();
    z.sort_by(f64::total_cmp);
    z.dedup();
    let principal: Vec<f64> = z.iter().map(|&zz| phase_shift_principal(ch.l, ch.mu(), v, zz)).collect::<Result<_>>()?;
    let n = z.len();
    let mut delta = vec![0.0; n];
    delta[n - 1] = principal[n - 1];
    for k in (0..n - 1).rev() {
        let target = delta[k + 1];
        let shift = ((target - principal[k]) / std::f64::consts::PI).round();
        delta[k] = principal[k] + shift * std::f64::consts::PI;
    }
    Ok(PhaseShiftTable { l: ch.l, z, delta })
}

/// Closed-form s-wave square-well phase shift, principal branch of the arctangent.
pub fn square_well_s_wave(z: f64, mu: f64, depth: f64, radius: f64) -> f64 {
    let zp = (z * z + 2.0 * mu * depth).sqrt();
    -z * radius + ((z / zp) * (zp * radius).tan()).atan()
}

/// Closed-form square-well phase shift for any l, principal branch:
/// tan δ_l = (z ĵ_l'(za) ĵ_l(z'a) − z' ĵ_l(za) ĵ_l'(z'a)) / (z n̂_l'(za) ĵ_l(z'a) − z' n̂_l(za) ĵ_l'(z'a)).
pub fn square_well_phase(l: u32, z: f64, mu: f64, depth: f64, radius: f64) -> f64 {
    let zp = (z * z + 2.0 * mu * depth).sqrt();
    let (j, jp, n, np) = riccati(l, z * radius);
    let (ji, jip, _, _) = riccati(l, zp * radius);
    ((z * jp * ji - zp * j * jip) / (z * np * ji - zp * n * jip)).atan()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn channel(l: u32) -> RadialChannel {
        RadialChannel::with_radius(l, 100, 50.0, 1.0, 1.0).unwrap()
    }

    fn wrapped_pi(x: f64) -> f64 {
        let y = x.rem_euclid(std::f64::consts::PI);
        y.min(std::f64::consts::PI - y)
    }

    #[test]
    fn zero_potential_has_no_phase() {
        let t = phase_shifts_stationary(&channel(1), &Potential::Zero, &[0.5, 1.0, 2.0]).unwrap();
        assert!(t.delta.iter().all(|&d| d == 0.0));
    }

    #[test]
    fn square_well_s_wave_closed_form() {
        let v = Potential::SquareWell { depth: 0.5, radius: 1.0 };
        for k in 0..60 {
            let z = 0.2 + 4.8 * k as f64 / 59.0;
            let d = phase_shift_principal(0, 0.5, &v, z).unwrap();
            let exact = square_well_s_wave(z, 0.5, 0.5, 1.0);
            assert!(wrapped_pi(square_well_phase(0, z, 0.5, 0.5, 1.0) - exact) < 1e-12);
            assert!(wrapped_pi(d - exact) < 1e-7, "z={z}: {d} vs {exact}");
        }
    }

    #[test]
    fn square_well_higher_waves() {
        let (mu, v0, a) = (0.5, 1.5, 1.2);
        let v = Potential::SquareWell { depth: v0, radius: a };
        for l in 1..4 {
            for &z in &[0.3, 1.0, 2.5] {
                let exact = square_well_phase(l, z, mu, v0, a);
                let d = phase_shift_principal(l, mu, &v, z).unwrap();
                assert!(wrapped_pi(d - exact) < 1e-7, "l={l} z={z}: {d} vs {exact}");
            }
        }
    }

    #[test]
    fn unwrapped_decays_at_high_z() {
        let v = Potential::Gaussian { depth: 2.0, width: 1.0 };
        let grid: Vec<f64> = (1..=200).map(|k| 0.1 * k as f64).collect();
        let t = phase_shifts_stationary(&channel(0), &v, &grid).unwrap();
        for w in t.delta.windows(2) {
            assert!((w[1] - w[0]).abs() < 0.5);
        }
        assert!(t.delta[199].abs() < 0.1);
        assert!(t.delta[199].abs() < t.delta[100].abs());
        assert!(t.interpolate(25.0).is_err());
        let mid = t.interpolate(1.05).unwrap();
        assert!((mid - 0.5 * (t.delta[9] + t.delta[10])).abs() < 1e-3);
    }
}
