use crate::error::{Error, Result};
use crate::fourvec::FourVector;

const RADICAND_TOL: f64 = 1e-12;

/// √((p₁·p₂)² − m₁²m₂²) with m_i² = p_i².
pub fn flux_factor(p1: &FourVector, p2: &FourVector) -> Result<f64> {
    for (i, p) in [p1, p2].into_iter().enumerate() {
        if p.t() < 0.0 || p.square() < -RADICAND_TOL * p.t().powi(2).max(1.0) {
            return Err(Error::Kinematic(format!("momentum {} is not future-pointing and causal: {:?}", i + 1, p.0)));
        }
    }
    let d = p1.dot(p2);
    let radicand = d * d - p1.square().max(0.0) * p2.square().max(0.0);
    if radicand < -RADICAND_TOL * (d * d).max(1.0) {
        return Err(Error::Kinematic(format!("negative flux radicand {radicand:e}")));
    }
    Ok(radicand.max(0.0).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::Vector3;

    #[test]
    fn examples() {
        let p1 = FourVector::new(2.0, 0.0, 0.0, 0.0);
        let p2 = FourVector::on_shell(1.5, Vector3::new(0.3, -1.2, 0.4));
        assert!((flux_factor(&p1, &p2).unwrap() - 2.0 * p2.spatial().norm()).abs() < 1e-13);
        let (e, k) = (1.25f64.sqrt(), 0.5);
        let a = FourVector::new(e, k, 0.0, 0.0);
        let b = FourVector::new(e, -k, 0.0, 0.0);
        assert!((flux_factor(&a, &b).unwrap() - 2.0 * e * k).abs() < 1e-14);
        assert_eq!(flux_factor(&p1, &FourVector::new(1.0, 0.0, 0.0, 0.0)).unwrap(), 0.0);
        assert!(flux_factor(&FourVector::new(-1.0, 0.0, 0.0, 0.0), &p1).is_err());
    }
}
