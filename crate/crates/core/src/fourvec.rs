//! Minkowski algebra with signature (+,-,-,-).

use std::ops::{Add, Index, Mul, Neg, Sub};

use nalgebra::{Matrix3, Matrix4, Vector3, Vector4};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Admissibility tolerance for four-velocities handed in from outside.
pub const VELOCITY_TOL: f64 = 1e-9;
/// Tolerance on the time row/column of a Wigner product.
pub const BLOCK_TOL: f64 = 1e-10;

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct FourVector(pub [f64; 4]);

impl FourVector {
    pub const REST: FourVector = FourVector([1.0, 0.0, 0.0, 0.0]);

    pub fn new(t: f64, x: f64, y: f64, z: f64) -> Self {
        FourVector([t, x, y, z])
    }

    pub fn from_parts(t: f64, spatial: Vector3<f64>) -> Self {
        FourVector([t, spatial.x, spatial.y, spatial.z])
    }

    /// On-shell momentum with positive energy.
    pub fn on_shell(mass: f64, p: Vector3<f64>) -> Self {
        Self::from_parts((mass * mass + p.norm_squared()).sqrt(), p)
    }

    /// Four-velocity with the given spatial part.
    pub fn velocity(u: Vector3<f64>) -> Self {
        Self::on_shell(1.0, u)
    }

    pub fn t(&self) -> f64 {
        self.0[0]
    }

    pub fn spatial(&self) -> Vector3<f64> {
        Vector3::new(self.0[1], self.0[2], self.0[3])
    }

    pub fn dot(&self, other: &FourVector) -> f64 {
        minkowski_dot(self, other)
    }

    pub fn square(&self) -> f64 {
        self.dot(self)
    }

    /// Euclidean norm of the components, used for relative tolerances.
    pub fn euclid_norm(&self) -> f64 {
        self.0.iter().map(|c| c * c).sum::<f64>().sqrt()
    }

    pub fn as_vector(&self) -> Vector4<f64> {
        Vector4::from(self.0)
    }

    pub fn from_vector(v: &Vector4<f64>) -> Self {
        FourVector([v[0], v[1], v[2], v[3]])
    }
}

impl Index<usize> for FourVector {
    type Output = f64;
    fn index(&self, i: usize) -> &f64 {
        &self.0[i]
    }
}

impl Add for FourVector {
    type Output = FourVector;
    fn add(self, o: FourVector) -> FourVector {
        FourVector(std::array::from_fn(|i| self.0[i] + o.0[i]))
    }
}

impl Sub for FourVector {
    type Output = FourVector;
    fn sub(self, o: FourVector) -> FourVector {
        FourVector(std::array::from_fn(|i| self.0[i] - o.0[i]))
    }
}

impl Neg for FourVector {
    type Output = FourVector;
    fn neg(self) -> FourVector {
        FourVector(self.0.map(|c| -c))
    }
}

impl Mul<f64> for FourVector {
    type Output = FourVector;
    fn mul(self, s: f64) -> FourVector {
        FourVector(self.0.map(|c| c * s))
    }
}

impl Mul<FourVector> for f64 {
    type Output = FourVector;
    fn mul(self, v: FourVector) -> FourVector {
        v * self
    }
}

impl std::iter::Sum for FourVector {
    fn sum<I: Iterator<Item = FourVector>>(iter: I) -> FourVector {
        iter.fold(FourVector::default(), |a, b| a + b)
    }
}

/// a⁰b⁰ − a⃗·b⃗
pub fn minkowski_dot(a: &FourVector, b: &FourVector) -> f64 {
    a.0[0] * b.0[0] - a.0[1] * b.0[1] - a.0[2] * b.0[2] - a.0[3] * b.0[3]
}

pub fn metric() -> Matrix4<f64> {
    Matrix4::from_diagonal(&Vector4::new(1.0, -1.0, -1.0, -1.0))
}

/// Checks that `u` is a future-pointing unit timelike vector.
pub fn check_velocity(u: &FourVector) -> Result<()> {
    let n = u.square();
    if (n - 1.0).abs() > VELOCITY_TOL || u.t() <= 0.0 || !n.is_finite() {
        return Err(Error::NotFourVelocity { norm_sq: n, time: u.t() });
    }
    Ok(())
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LorentzMatrix(pub Matrix4<f64>);

impl LorentzMatrix {
    pub fn identity() -> Self {
        LorentzMatrix(Matrix4::identity())
    }

    /// Rotation about `axis` by `angle` (right-handed), embedded in the spatial block.
    pub fn rotation(axis: Vector3<f64>, angle: f64) -> Self {
        let r = nalgebra::Rotation3::from_axis_angle(&nalgebra::Unit::new_normalize(axis), angle);
        Self::from_rotation(&Rotation3(*r.matrix()))
    }

    pub fn from_rotation(r: &Rotation3) -> Self {
        let mut m = Matrix4::identity();
        m.fixed_view_mut::<3, 3>(1, 1).copy_from(&r.0);
        LorentzMatrix(m)
    }

    /// The standard boost L_u taking (1,0,0,0) to u.
    pub fn boost(u: &FourVector) -> Result<Self> {
        check_velocity(u)?;
        Ok(Self::boost_spatial(&u.spatial()))
    }

    /// L_u built from the spatial part only; u⁰ is recomputed as √(1+u⃗²).
    pub fn boost_spatial(u: &Vector3<f64>) -> Self {
        let g = (1.0 + u.norm_squared()).sqrt();
        let mut m = Matrix4::identity();
        m[(0, 0)] = g;
        for i in 0..3 {
            m[(0, i + 1)] = u[i];
            m[(i + 1, 0)] = u[i];
            for j in 0..3 {
                m[(i + 1, j + 1)] += u[i] * u[j] / (1.0 + g);
            }
        }
        LorentzMatrix(m)
    }

    /// Λ⁻¹ = η Λᵀ η
    pub fn inverse(&self) -> Self {
        let eta = metric();
        LorentzMatrix(eta * self.0.transpose() * eta)
    }

    pub fn apply(&self, v: &FourVector) -> FourVector {
        FourVector::from_vector(&(self.0 * v.as_vector()))
    }

    pub fn compose(&self, other: &LorentzMatrix) -> LorentzMatrix {
        LorentzMatrix(self.0 * other.0)
    }

    /// max |ΛᵀηΛ − η|
    pub fn metric_residual(&self) -> f64 {
        let eta = metric();
        (self.0.transpose() * eta * self.0 - eta).abs().max()
    }

    pub fn is_proper_orthochronous(&self, tol: f64) -> bool {
        self.metric_residual() <= tol && (self.0.determinant() - 1.0).abs() <= tol && self.0[(0, 0)] >= 1.0 - tol
    }
}

impl Mul for LorentzMatrix {
    type Output = LorentzMatrix;
    fn mul(self, o: LorentzMatrix) -> LorentzMatrix {
        self.compose(&o)
    }
}

impl Mul<FourVector> for LorentzMatrix {
    type Output = FourVector;
    fn mul(self, v: FourVector) -> FourVector {
        self.apply(&v)
    }
}

pub fn boost_from_velocity(u: &FourVector) -> Result<LorentzMatrix> {
    LorentzMatrix::boost(u)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Rotation3(pub Matrix3<f64>);

impl Rotation3 {
    pub fn identity() -> Self {
        Rotation3(Matrix3::identity())
    }

    pub fn apply(&self, v: &Vector3<f64>) -> Vector3<f64> {
        self.0 * v
    }

    pub fn compose(&self, other: &Rotation3) -> Rotation3 {
        Rotation3(self.0 * other.0)
    }

    /// max |WᵀW − 1| together with |det W − 1|.
    pub fn orthogonality_residual(&self) -> f64 {
        let o = (self.0.transpose() * self.0 - Matrix3::identity()).abs().max();
        o.max((self.0.determinant() - 1.0).abs())
    }

    /// Rotation angle in [0, π].
    pub fn angle(&self) -> f64 {
        ((self.0.trace() - 1.0) / 2.0).clamp(-1.0, 1.0).acos()
    }
}

/// W(Λ,u) = L_{Λu}⁻¹ Λ L_u, returned as its spatial block.
pub fn wigner_rotation(lambda: &LorentzMatrix, u: &FourVector) -> Result<Rotation3> {
    let lu = LorentzMatrix::boost(u)?;
    let lam_u = lambda.apply(u);
    let l_lam_u = LorentzMatrix::boost_spatial(&lam_u.spatial());
    let w = l_lam_u.inverse().0 * lambda.0 * lu.0;
    let mut off = (w[(0, 0)] - 1.0).abs();
    for i in 1..4 {
        off = off.max(w[(0, i)].abs()).max(w[(i, 0)].abs());
    }
    if off > BLOCK_TOL * w.abs().max().max(1.0) || !off.is_finite() {
        return Err(Error::NotBlockDiagonal { residual: off });
    }
    Ok(Rotation3(w.fixed_view::<3, 3>(1, 1).into_owned()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn dot_examples() {
        let r = FourVector::REST;
        assert_eq!(minkowski_dot(&r, &r), 1.0);
        let l = FourVector::new(1.0, 1.0, 0.0, 0.0);
        assert_eq!(minkowski_dot(&l, &l), 0.0);
        let a = FourVector::new(2.0, 1.0, 0.0, 0.0);
        let b = FourVector::new(3.0, 0.0, 2.0, 0.0);
        assert_eq!(minkowski_dot(&a, &b), 6.0);
    }

    #[test]
    fn boost_at_rest_is_identity() {
        let l = LorentzMatrix::boost(&FourVector::REST).unwrap();
        assert_eq!(l.0, Matrix4::identity());
    }

    #[test]
    fn boost_along_x() {
        let s = 2f64.sqrt();
        let l = LorentzMatrix::boost(&FourVector::new(s, 1.0, 0.0, 0.0)).unwrap();
        assert_abs_diff_eq!(l.0[(0, 0)], s, epsilon = 1e-15);
        assert_abs_diff_eq!(l.0[(0, 1)], 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(l.0[(1, 0)], 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(l.0[(1, 1)], s, epsilon = 1e-15);
        assert_eq!(l.0[(2, 2)], 1.0);
        assert_eq!(l.0[(3, 3)], 1.0);
        assert_eq!(l.0[(2, 0)], 0.0);
    }

    #[test]
    fn boost_rejects_non_velocities() {
        assert!(LorentzMatrix::boost(&FourVector::new(1.0, 0.1, 0.0, 0.0)).is_err());
        assert!(LorentzMatrix::boost(&FourVector::new(-1.0, 0.0, 0.0, 0.0)).is_err());
        let u = FourVector::velocity(Vector3::new(0.3, -2.0, 1.0));
        let l = LorentzMatrix::boost(&u).unwrap();
        let img = l.apply(&FourVector::REST);
        for i in 0..4 {
            assert_abs_diff_eq!(img[i], u[i], epsilon = 1e-13);
        }
        assert!(l.is_proper_orthochronous(1e-12));
    }

    #[test]
    fn wigner_of_rotation_and_boost() {
        let r = LorentzMatrix::rotation(Vector3::new(1.0, 2.0, -0.5), 0.7);
        let w = wigner_rotation(&r, &FourVector::REST).unwrap();
        assert_abs_diff_eq!((w.0 - r.0.fixed_view::<3, 3>(1, 1)).abs().max(), 0.0, epsilon = 1e-14);

        let v = FourVector::velocity(Vector3::new(0.4, 1.1, -0.3));
        let lv = LorentzMatrix::boost(&v).unwrap();
        let w = wigner_rotation(&lv, &FourVector::REST).unwrap();
        assert_abs_diff_eq!((w.0 - Matrix3::identity()).abs().max(), 0.0, epsilon = 1e-13);
    }

    #[test]
    fn thomas_wigner_angle() {
        // Boost along x with rapidity a, then along y with rapidity b.
        let (a, b) = (0.8f64, 1.3f64);
        let l1 = LorentzMatrix::boost_spatial(&Vector3::new(a.sinh(), 0.0, 0.0));
        let l2 = LorentzMatrix::boost_spatial(&Vector3::new(0.0, b.sinh(), 0.0));
        let lam = l2 * l1;
        let w = wigner_rotation(&lam, &FourVector::REST).unwrap();
        assert!(w.orthogonality_residual() < 1e-12);
        // Oracle: decompose the product directly; its image of the rest vector fixes the boost.
        let img = lam.apply(&FourVector::REST);
        let pure = LorentzMatrix::boost_spatial(&img.spatial());
        let rot = pure.inverse().0 * lam.0;
        let direct = Rotation3(rot.fixed_view::<3, 3>(1, 1).into_owned());
        assert_abs_diff_eq!(w.angle(), direct.angle(), epsilon = 1e-12);
        // Closed form for perpendicular boosts: cos θ = (ca + cb)/(1 + ca·cb) with ca = cosh a.
        let (ca, cb) = (a.cosh(), b.cosh());
        let expected = ((ca + cb) / (1.0 + ca * cb)).acos();
        assert_abs_diff_eq!(w.angle(), expected, epsilon = 1e-12);
    }

    #[test]
    fn inconsistent_product_is_rejected() {
        let mut bad = LorentzMatrix::boost_spatial(&Vector3::new(0.5, 0.0, 0.0));
        bad.0[(0, 2)] += 1e-3;
        assert!(matches!(
            wigner_rotation(&bad, &FourVector::REST),
            Err(Error::NotBlockDiagonal { .. })
        ));
    }
}
