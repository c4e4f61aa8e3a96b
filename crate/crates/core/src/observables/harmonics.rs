use std::f64::consts::PI;

/// Index of (l, m) in a flat table, m ∈ [−l, l].
pub fn lm_index(l: usize, m: i64) -> usize {
    (l * l) as usize + (l as i64 + m) as usize
}

/// Real orthonormal spherical harmonics Y_lm(θ, φ) for l ≤ lmax, flattened by `lm_index`.
/// m > 0 uses cos(mφ), m < 0 uses sin(|m|φ).
pub fn real_harmonics(lmax: usize, cos_theta: f64, phi: f64, out: &mut Vec<f64>) {
    out.clear();
    out.resize((lmax + 1) * (lmax + 1), 0.0);
    let x = cos_theta.clamp(-1.0, 1.0);
    let s = (1.0 - x * x).sqrt();
    // P_l^m without the Condon-Shortley phase.
    let mut pmm = 1.0;
    for m in 0..=lmax {
        if m > 0 {
            pmm *= (2 * m - 1) as f64 * s;
        }
        let mut p_prev = 0.0;
        let mut p = pmm;
        for l in m..=lmax {
            if l == m + 1 {
                p_prev = p;
                p = x * (2 * m + 1) as f64 * pmm;
            } else if l > m + 1 {
                let next = ((2 * l - 1) as f64 * x * p - (l + m - 1) as f64 * p_prev) / (l - m) as f64;
                p_prev = p;
                p = next;
            }
            let mut ratio = 1.0;
            for k in (l - m + 1)..=(l + m) {
                ratio /= k as f64;
            }
            let n = ((2 * l + 1) as f64 / (4.0 * PI) * ratio).sqrt();
            if m == 0 {
                out[lm_index(l, 0)] = n * p;
            } else {
                let mf = m as f64;
                out[lm_index(l, m as i64)] = 2f64.sqrt() * n * p * (mf * phi).cos();
                out[lm_index(l, -(m as i64))] = 2f64.sqrt() * n * p * (mf * phi).sin();
            }
        }
    }
}

/// Real harmonics with the polar axis along x̂ and φ measured in the y-z plane from ŷ,
/// evaluated from a unit vector with precomputed normalizations.
pub struct RealHarmonics {
    lmax: usize,
    norms: Vec<f64>,
}

impl RealHarmonics {
    pub fn new(lmax: usize) -> Self {
        let mut norms = vec![0.0; (lmax + 1) * (lmax + 1)];
        for l in 0..=lmax {
            for m in 0..=l {
                let mut ratio = 1.0;
                for k in (l - m + 1)..=(l + m) {
                    ratio /= k as f64;
                }
                let n = ((2 * l + 1) as f64 / (4.0 * PI) * ratio).sqrt();
                norms[lm_index(l, m as i64)] = if m == 0 { n } else { 2f64.sqrt() * n };
            }
        }
        RealHarmonics { lmax, norms }
    }

    pub fn eval(&self, n: &nalgebra::Vector3<f64>, out: &mut Vec<f64>) {
        let lmax = self.lmax;
        out.clear();
        out.resize((lmax + 1) * (lmax + 1), 0.0);
        let x = n[0].clamp(-1.0, 1.0);
        // s^m cos(mφ), s^m sin(mφ) from (n_y + i n_z)^m, so no division by s is needed.
        let (mut cm, mut sm) = (1.0, 0.0);
        // P_m^m / s^m
        let mut pmm = 1.0;
        for m in 0..=lmax {
            if m > 0 {
                pmm *= (2 * m - 1) as f64;
                let c = cm * n[1] - sm * n[2];
                sm = cm * n[2] + sm * n[1];
                cm = c;
            }
            let mut p_prev = 0.0;
            let mut p = pmm;
            for l in m..=lmax {
                if l == m + 1 {
                    p_prev = p;
                    p = x * (2 * m + 1) as f64 * pmm;
                } else if l > m + 1 {
                    let next = ((2 * l - 1) as f64 * x * p - (l + m - 1) as f64 * p_prev) / (l - m) as f64;
                    p_prev = p;
                    p = next;
                }
                if m == 0 {
                    out[lm_index(l, 0)] = self.norms[lm_index(l, 0)] * p;
                } else {
                    let nm = self.norms[lm_index(l, m as i64)] * p;
                    out[lm_index(l, m as i64)] = nm * cm;
                    out[lm_index(l, -(m as i64))] = nm * sm;
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::super::kernel::legendre;
    use super::*;

    #[test]
    fn addition_theorem() {
        let (a, b) = ((0.3f64, 1.1f64), (-0.6f64, -2.0f64));
        let dir = |(c, p): (f64, f64)| {
            let s = (1.0 - c * c).sqrt();
            [c, s * p.cos(), s * p.sin()]
        };
        let (da, db) = (dir(a), dir(b));
        let cos_ab: f64 = da.iter().zip(&db).map(|(x, y)| x * y).sum();
        let (mut ya, mut yb) = (vec![], vec![]);
        real_harmonics(4, a.0, a.1, &mut ya);
        real_harmonics(4, b.0, b.1, &mut yb);
        let pl = legendre(4, cos_ab);
        for l in 0..=4usize {
            let sum: f64 = (-(l as i64)..=l as i64).map(|m| ya[lm_index(l, m)] * yb[lm_index(l, m)]).sum();
            assert!((sum - (2 * l + 1) as f64 / (4.0 * PI) * pl[l]).abs() < 1e-13, "l={l}");
        }
        let fast = RealHarmonics::new(4);
        let mut yf = vec![];
        fast.eval(&nalgebra::Vector3::from(da), &mut yf);
        for (a, b) in ya.iter().zip(&yf) {
            assert!((a - b).abs() < 1e-13);
        }
    }
}
