use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Spherically symmetric short-range potentials.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Potential {
    Zero,
    /// −depth for r < radius.
    SquareWell { depth: f64, radius: f64 },
    /// −depth·exp(−r²/width²), cut off where it drops below 1e-16·depth.
    Gaussian { depth: f64, width: f64 },
}

const GAUSS_CUT: f64 = 1e-16;

impl Potential {
    pub fn eval(&self, r: f64) -> f64 {
        match *self {
            Potential::Zero => 0.0,
            Potential::SquareWell { depth, radius } => {
                if r < radius {
                    -depth
                } else {
                    0.0
                }
            }
            Potential::Gaussian { depth, width } => {
                if r < self.support() {
                    -depth * (-(r / width).powi(2)).exp()
                } else {
                    0.0
                }
            }
        }
    }

    /// Radius beyond which V vanishes identically.
    pub fn support(&self) -> f64 {
        match *self {
            Potential::Zero => 0.0,
            Potential::SquareWell { radius, .. } => radius,
            Potential::Gaussian { width, .. } => width * (-GAUSS_CUT.ln()).sqrt(),
        }
    }

    /// Radii where V or its derivatives jump.
    pub fn breakpoints(&self) -> Vec<f64> {
        match *self {
            Potential::Zero => vec![],
            _ => vec![self.support()],
        }
    }

    pub fn sup_norm(&self) -> f64 {
        match *self {
            Potential::Zero => 0.0,
            Potential::SquareWell { depth, .. } | Potential::Gaussian { depth, .. } => depth.abs(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let ok = match *self {
            Potential::Zero => true,
            Potential::SquareWell { depth, radius } => depth.is_finite() && radius > 0.0 && radius.is_finite(),
            Potential::Gaussian { depth, width } => depth.is_finite() && width > 0.0 && width.is_finite(),
        };
        if ok {
            Ok(())
        } else {
            Err(Error::Config(format!("invalid potential parameters {self:?}")))
        }
    }

    /// Mean of V over [a, b], exact for the square well and by Gauss-Legendre otherwise.
    pub fn cell_average(&self, a: f64, b: f64) -> f64 {
        match *self {
            Potential::Zero => 0.0,
            Potential::SquareWell { depth, radius } => {
                let inside = (radius.min(b) - a).clamp(0.0, b - a);
                -depth * inside / (b - a)
            }
            Potential::Gaussian { .. } => {
                let mut pieces = vec![a];
                pieces.extend(self.breakpoints().into_iter().filter(|&x| x > a && x < b));
                pieces.push(b);
                let mut acc = 0.0;
                for w in pieces.windows(2) {
                    let (lo, hi) = (w[0], w[1]);
                    let (mid, half) = (0.5 * (lo + hi), 0.5 * (hi - lo));
                    for (x, wt) in GL5 {
                        acc += wt * half * self.eval(mid + half * x);
                    }
                }
                acc / (b - a)
            }
        }
    }
}

const GL5: [(f64, f64); 5] = [
    (0.0, 0.568_888_888_888_888_9),
    (-0.538_469_310_105_683_1, 0.478_628_670_499_366_5),
    (0.538_469_310_105_683_1, 0.478_628_670_499_366_5),
    (-0.906_179_845_938_664_0, 0.236_926_885_056_189_1),
    (0.906_179_845_938_664_0, 0.236_926_885_056_189_1),
];
