//! Implicit QL eigensolver for real symmetric tridiagonal matrices.

/// Eigenpairs of a symmetric tridiagonal matrix.
///
/// `vectors` is row-major with one eigenvector per row, so that the plane
/// rotations of the QL sweep touch two contiguous rows.
#[derive(Clone, Debug)]
pub struct TridiagEigen {
    pub values: Vec<f64>,
    pub vectors: Vec<f64>,
    pub n: usize,
}

impl TridiagEigen {
    pub fn vector(&self, a: usize) -> &[f64] {
        &self.vectors[a * self.n..(a + 1) * self.n]
    }
}

/// Diagonalizes the matrix with diagonal `diag` and off-diagonal `off`
/// (`off[i]` couples i and i+1). Eigenvalues come out ascending; each
/// eigenvector has its first nonzero component positive.
pub fn tql2(diag: &[f64], off: &[f64]) -> TridiagEigen {
    let n = diag.len();
    assert!(n >= 1 && off.len() + 1 == n, "off-diagonal must have n-1 entries");
    let mut d = diag.to_vec();
    let mut e = off.to_vec();
    e.push(0.0);
    let mut z = vec![0.0; n * n];
    for i in 0..n {
        z[i * n + i] = 1.0;
    }
    let eps = f64::EPSILON;
    let mut f = 0.0;
    let mut tst1: f64 = 0.0;
    for l in 0..n {
        tst1 = tst1.max(d[l].abs() + e[l].abs());
        let mut m = l;
        while m < n - 1 && e[m].abs() > eps * tst1 {
            m += 1;
        }
        if m > l {
            loop {
                let mut g = d[l];
                let mut p = (d[l + 1] - g) / (2.0 * e[l]);
                let mut r = p.hypot(1.0);
                if p < 0.0 {
                    r = -r;
                }
                d[l] = e[l] / (p + r);
                d[l + 1] = e[l] * (p + r);
                let dl1 = d[l + 1];
                let mut h = g - d[l];
                for di in d.iter_mut().skip(l + 2) {
                    *di -= h;
                }
                f += h;
                p = d[m];
                let (mut c, mut c2, mut c3) = (1.0, 1.0, 1.0);
                let el1 = e[l + 1];
                let (mut s, mut s2) = (0.0, 0.0);
                for i in (l..m).rev() {
                    c3 = c2;
                    c2 = c;
                    s2 = s;
                    g = c * e[i];
                    h = c * p;
                    r = p.hypot(e[i]);
                    e[i + 1] = s * r;
                    s = e[i] / r;
                    c = p / r;
                    p = c * d[i] - s * g;
                    d[i + 1] = h + s * (c * g + s * d[i]);
                    let (lo, hi) = z.split_at_mut((i + 1) * n);
                    let zi = &mut lo[i * n..];
                    let zj = &mut hi[..n];
                    for (a, b) in zi.iter_mut().zip(zj.iter_mut()) {
                        let t = *b;
                        *b = s * *a + c * t;
                        *a = c * *a - s * t;
                    }
                }
                p = -s * s2 * c3 * el1 * e[l] / dl1;
                e[l] = s * p;
                d[l] = c * p;
                if e[l].abs() <= eps * tst1 {
                    break;
                }
            }
        }
        d[l] += f;
        e[l] = 0.0;
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| d[a].total_cmp(&d[b]));
    let mut values = Vec::with_capacity(n);
    let mut vectors = Vec::with_capacity(n * n);
    for &a in &order {
        values.push(d[a]);
        let row = &z[a * n..(a + 1) * n];
        let sign = row.iter().find(|x| x.abs() > 1e-300).map_or(1.0, |x| x.signum());
        vectors.extend(row.iter().map(|x| x * sign));
    }
    TridiagEigen { values, vectors, n }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn second_difference_spectrum() {
        // tridiag(-1, 2, -1) has eigenvalues 2 - 2cos(kπ/(n+1)).
        let n = 40;
        let eig = tql2(&vec![2.0; n], &vec![-1.0; n - 1]);
        for (k, v) in eig.values.iter().enumerate() {
            let exact = 2.0 - 2.0 * ((k + 1) as f64 * std::f64::consts::PI / (n + 1) as f64).cos();
            assert!((v - exact).abs() < 1e-13);
        }
        // Orthonormal rows, residual of A v = λ v.
        for a in 0..n {
            let va = eig.vector(a);
            assert!(va[0] > 0.0);
            for b in 0..n {
                let dot: f64 = va.iter().zip(eig.vector(b)).map(|(x, y)| x * y).sum();
                let expected = if a == b { 1.0 } else { 0.0 };
                assert!((dot - expected).abs() < 1e-13);
            }
            for i in 0..n {
                let mut av = 2.0 * va[i];
                if i > 0 {
                    av -= va[i - 1];
                }
                if i + 1 < n {
                    av -= va[i + 1];
                }
                assert!((av - eig.values[a] * va[i]).abs() < 1e-13);
            }
        }
    }

    #[test]
    fn one_by_one_and_diagonal() {
        let e = tql2(&[3.0], &[]);
        assert_eq!(e.values, vec![3.0]);
        assert_eq!(e.vectors, vec![1.0]);
        let e = tql2(&[2.0, -1.0, 5.0], &[0.0, 0.0]);
        assert_eq!(e.values, vec![-1.0, 2.0, 5.0]);
        assert_eq!(e.vector(0), &[0.0, 1.0, 0.0]);
    }
}
