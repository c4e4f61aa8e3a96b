//! Riccati-Bessel functions ĵ_l(x) = x j_l(x) and n̂_l(x) = x y_l(x).

/// (ĵ_l, ĵ_l', n̂_l, n̂_l') at x > 0.
pub fn riccati(l: u32, x: f64) -> (f64, f64, f64, f64) {
    let (s, c) = x.sin_cos();
    // Irregular solutions: upward recurrence is stable.
    let mut n_prev = s; // n̂_{-1}
    let mut n_cur = -c; // n̂_0
    for k in 0..l {
        let next = (2 * k + 1) as f64 / x * n_cur - n_prev;
        n_prev = n_cur;
        n_cur = next;
    }
    let (j_prev, j_cur) = regular_pair(l, x);
    let lf = l as f64;
    (j_cur, j_prev - lf / x * j_cur, n_cur, n_prev - lf / x * n_cur)
}

/// (ĵ_{l-1}, ĵ_l) with ĵ_{-1} = cos x.
fn regular_pair(l: u32, x: f64) -> (f64, f64) {
    let (s, c) = x.sin_cos();
    if (l as f64) < x {
        let (mut prev, mut cur) = (c, s);
        for k in 0..l {
            let next = (2 * k + 1) as f64 / x * cur - prev;
            prev = cur;
            cur = next;
        }
        return (prev, cur);
    }
    // Miller: downward from well above l, then normalize against ĵ_0 or ĵ_1.
    let start = l as usize + 30 + x as usize;
    let mut vals = vec![0.0; start + 2];
    vals[start + 1] = 0.0;
    vals[start] = 1e-300;
    for k in (1..=start).rev() {
        vals[k - 1] = (2 * k + 1) as f64 / x * vals[k] - vals[k + 1];
        if vals[k - 1].abs() > 1e200 {
            for v in vals.iter_mut() {
                *v *= 1e-200;
            }
        }
    }
    let j1 = s / x - c;
    let scale = if s.abs() >= j1.abs() { s / vals[0] } else { j1 / vals[1] };
    let prev = if l == 0 { c } else { vals[l as usize - 1] * scale };
    (prev, vals[l as usize] * scale)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn low_orders_closed_form() {
        for &x in &[0.05, 0.3, 1.0, 2.7, 9.0, 30.0] {
            let (s, c) = (f64::sin(x), f64::cos(x));
            let (j0, j0p, n0, n0p) = riccati(0, x);
            assert!((j0 - s).abs() < 1e-14 && (j0p - c).abs() < 1e-14);
            assert!((n0 + c).abs() < 1e-14 && (n0p - s).abs() < 1e-14);
            let (j1, j1p, n1, n1p) = riccati(1, x);
            let ej1 = s / x - c;
            let ej1p = -s / (x * x) + c / x + s;
            let en1 = -c / x - s;
            let en1p = c / (x * x) + s / x - c;
            assert!((j1 - ej1).abs() < 1e-12 * ej1.abs().max(1e-3), "{x} {j1} {ej1}");
            assert!((j1p - ej1p).abs() < 1e-11 * ej1p.abs().max(1e-3));
            assert!((n1 - en1).abs() < 1e-12 * en1.abs().max(1.0));
            assert!((n1p - en1p).abs() < 1e-11 * en1p.abs().max(1.0));
        }
    }

    #[test]
    fn wronskian() {
        for l in 0..8 {
            for &x in &[0.2, 1.5, 4.0, 12.0] {
                let (j, jp, n, np) = riccati(l, x);
                // ĵ n̂' − ĵ' n̂ = 1
                assert!((j * np - jp * n - 1.0).abs() < 1e-9, "l={l} x={x}");
            }
        }
    }
}
