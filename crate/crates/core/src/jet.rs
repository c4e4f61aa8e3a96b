//! Second-order Taylor jets in three variables.
//!
//! A jet carries value, gradient and Hessian of a complex function at one point.
//! Differentiation lowers the order by one, so nested first-order operators are
//! evaluated exactly as long as the starting order suffices.

use std::ops::{Add, Mul, Neg, Sub};

use num_complex::Complex64 as C64;

use crate::error::{Error, Result};

const ZERO: C64 = C64 { re: 0.0, im: 0.0 };

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Jet {
    pub order: u8,
    pub v: C64,
    pub g: [C64; 3],
    pub h: [[C64; 3]; 3],
}

impl Jet {
    pub fn constant(c: C64) -> Self {
        Jet { order: 2, v: c, g: [ZERO; 3], h: [[ZERO; 3]; 3] }
    }

    pub fn zero(order: u8) -> Self {
        Jet { order, v: ZERO, g: [ZERO; 3], h: [[ZERO; 3]; 3] }
    }

    /// The coordinate function x_i at a point with value `x`.
    pub fn coordinate(i: usize, x: f64) -> Self {
        let mut j = Jet::constant(C64::new(x, 0.0));
        j.g[i] = C64::new(1.0, 0.0);
        j
    }

    pub fn real(v: f64, g: [f64; 3], h: [[f64; 3]; 3]) -> Self {
        Jet {
            order: 2,
            v: C64::new(v, 0.0),
            g: g.map(|x| C64::new(x, 0.0)),
            h: h.map(|row| row.map(|x| C64::new(x, 0.0))),
        }
    }

    pub fn scale(&self, c: C64) -> Self {
        Jet { order: self.order, v: self.v * c, g: self.g.map(|x| x * c), h: self.h.map(|r| r.map(|x| x * c)) }
    }

    /// ∂_i, lowering the order by one.
    pub fn derivative(&self, i: usize) -> Result<Self> {
        if self.order == 0 {
            return Err(Error::Domain("jet order exhausted by differentiation".into()));
        }
        let mut out = Jet::zero(self.order - 1);
        out.v = self.g[i];
        if out.order >= 1 {
            out.g = self.h[i];
        }
        Ok(out)
    }

    /// exp of the jet.
    pub fn exp(&self) -> Self {
        let e = self.v.exp();
        let mut out = Jet::zero(self.order);
        out.v = e;
        for i in 0..3 {
            out.g[i] = e * self.g[i];
            for j in 0..3 {
                out.h[i][j] = e * (self.g[i] * self.g[j] + self.h[i][j]);
            }
        }
        out
    }

    /// Zeroes the components beyond `order`.
    fn truncated(mut self, order: u8) -> Self {
        self.order = order;
        if order < 2 {
            self.h = [[ZERO; 3]; 3];
        }
        if order < 1 {
            self.g = [ZERO; 3];
        }
        self
    }
}

impl Add for Jet {
    type Output = Jet;
    fn add(self, o: Jet) -> Jet {
        let order = self.order.min(o.order);
        Jet {
            order,
            v: self.v + o.v,
            g: std::array::from_fn(|i| self.g[i] + o.g[i]),
            h: std::array::from_fn(|i| std::array::from_fn(|j| self.h[i][j] + o.h[i][j])),
        }
        .truncated(order)
    }
}

impl Neg for Jet {
    type Output = Jet;
    fn neg(self) -> Jet {
        self.scale(C64::new(-1.0, 0.0))
    }
}

impl Sub for Jet {
    type Output = Jet;
    fn sub(self, o: Jet) -> Jet {
        self + (-o)
    }
}

impl Mul for Jet {
    type Output = Jet;
    fn mul(self, o: Jet) -> Jet {
        let order = self.order.min(o.order);
        let mut out = Jet::zero(order);
        out.v = self.v * o.v;
        for i in 0..3 {
            out.g[i] = self.v * o.g[i] + self.g[i] * o.v;
            for j in 0..3 {
                out.h[i][j] = self.v * o.h[i][j] + self.g[i] * o.g[j] + self.g[j] * o.g[i] + self.h[i][j] * o.v;
            }
        }
        out.truncated(order)
    }
}

impl Mul<C64> for Jet {
    type Output = Jet;
    fn mul(self, c: C64) -> Jet {
        self.scale(c)
    }
}

/// w = √(1+u⃗²) as a jet at `u`.
pub fn gamma_jet(u: [f64; 3]) -> Jet {
    let w = (1.0 + u.iter().map(|x| x * x).sum::<f64>()).sqrt();
    let g = u.map(|x| x / w);
    let h = std::array::from_fn(|i| {
        std::array::from_fn(|j| if i == j { 1.0 / w } else { 0.0 } - u[i] * u[j] / (w * w * w))
    });
    Jet::real(w, g, h)
}

/// 1/(1+√(1+u⃗²)) as a jet at `u`.
pub fn aberration_jet(u: [f64; 3]) -> Jet {
    let w = gamma_jet(u);
    let hv = 1.0 / (1.0 + w.v.re);
    let g = std::array::from_fn(|i| -hv * hv * w.g[i].re);
    let h = std::array::from_fn(|i| {
        std::array::from_fn(|j| 2.0 * hv.powi(3) * w.g[i].re * w.g[j].re - hv * hv * w.h[i][j].re)
    });
    Jet::real(hv, g, h)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: C64, b: C64, tol: f64) -> bool {
        (a - b).norm() <= tol
    }

    #[test]
    fn product_rule_and_order() {
        let x = Jet::coordinate(0, 0.7);
        let y = Jet::coordinate(1, -0.4);
        let p = x * x * y;
        assert!(close(p.v, C64::new(0.49 * -0.4, 0.0), 1e-15));
        assert!(close(p.g[0], C64::new(2.0 * 0.7 * -0.4, 0.0), 1e-15));
        assert!(close(p.h[0][1], C64::new(1.4, 0.0), 1e-15));
        let d = p.derivative(0).unwrap().derivative(1).unwrap();
        assert_eq!(d.order, 0);
        assert!(close(d.v, C64::new(1.4, 0.0), 1e-15));
        assert!(d.derivative(2).is_err());
    }

    #[test]
    fn gamma_and_aberration_against_differences() {
        let u = [0.3, -1.2, 0.8];
        let f = |u: [f64; 3]| (1.0 + u.iter().map(|x| x * x).sum::<f64>()).sqrt();
        let hf = |u: [f64; 3]| 1.0 / (1.0 + f(u));
        let eps = 1e-4;
        for (jet, fun) in [(gamma_jet(u), &f as &dyn Fn([f64; 3]) -> f64), (aberration_jet(u), &hf)] {
            for i in 0..3 {
                let mut up = u;
                let mut dn = u;
                up[i] += eps;
                dn[i] -= eps;
                let fd = (fun(up) - fun(dn)) / (2.0 * eps);
                assert!((jet.g[i].re - fd).abs() < 1e-8);
                let fd2 = (fun(up) - 2.0 * fun(u) + fun(dn)) / (eps * eps);
                assert!((jet.h[i][i].re - fd2).abs() < 1e-5);
            }
        }
    }

    #[test]
    fn exp_of_quadratic() {
        let x = Jet::coordinate(2, 0.5);
        let e = (x * x).scale(C64::new(-1.0, 0.0)).exp();
        let v = (-0.25f64).exp();
        assert!(close(e.v, C64::new(v, 0.0), 1e-15));
        assert!(close(e.g[2], C64::new(-v, 0.0), 1e-15));
        assert!(close(e.h[2][2], C64::new(v * (1.0 - 2.0), 0.0), 1e-15));
    }
}
