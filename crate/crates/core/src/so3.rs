//! The rotation group substrate: the axial-vector map between `so(3)` and
//! `R^3`, the Frobenius pairing on skew matrices, and the exponential map.
//!
//! Skew matrices are stored by their axial vector, so antisymmetry cannot be
//! broken; the dense matrix is only built on demand. Rotations are stored as
//! dense 3x3 matrices because the beam equations manipulate `R^T dR`
//! directly.

use std::ops::{Add, Mul, Neg, Sub};

use nalgebra::{Matrix3, Vector3};

use crate::error::{BeamError, Result};

pub type Vec3 = Vector3<f64>;
pub type Mat3 = Matrix3<f64>;

/// Below this angle the exponential map and its Jacobian use truncated
/// Taylor series for their coefficients.
pub const SMALL_ANGLE: f64 = 1e-6;

/// Axis `e_i`, zero-based.
pub fn unit(i: usize) -> Vec3 {
    let mut e = Vec3::zeros();
    e[i] = 1.0;
    e
}

/// Third director in reference configuration.
pub fn e3() -> Vec3 {
    Vec3::new(0.0, 0.0, 1.0)
}

/// Antisymmetric 3x3 matrix stored as its axial vector.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Skew3(Vec3);

impl Skew3 {
    pub fn zero() -> Self {
        Skew3(Vec3::zeros())
    }

    /// Dense form `[[0,-z,y],[z,0,-x],[-y,x,0]]`.
    pub fn matrix(&self) -> Mat3 {
        let (x, y, z) = (self.0.x, self.0.y, self.0.z);
        Mat3::new(0.0, -z, y, z, 0.0, -x, -y, x, 0.0)
    }

    /// `A w`, which equals `vee(A) ∧ w`.
    pub fn apply(&self, w: &Vec3) -> Vec3 {
        self.0.cross(w)
    }

    /// Matrix commutator `[A, B] = AB - BA`, itself skew.
    pub fn commutator(&self, other: &Skew3) -> Skew3 {
        skew_project(&(self.matrix() * other.matrix() - other.matrix() * self.matrix()))
    }
}

impl Add for Skew3 {
    type Output = Skew3;
    fn add(self, rhs: Skew3) -> Skew3 {
        Skew3(self.0 + rhs.0)
    }
}

impl Sub for Skew3 {
    type Output = Skew3;
    fn sub(self, rhs: Skew3) -> Skew3 {
        Skew3(self.0 - rhs.0)
    }
}

impl Neg for Skew3 {
    type Output = Skew3;
    fn neg(self) -> Skew3 {
        Skew3(-self.0)
    }
}

impl Mul<f64> for Skew3 {
    type Output = Skew3;
    fn mul(self, rhs: f64) -> Skew3 {
        Skew3(self.0 * rhs)
    }
}

/// `j^{-1}`: vector to skew matrix.
pub fn hat(u: &Vec3) -> Skew3 {
    Skew3(*u)
}

/// `j`: skew matrix to its axial vector.
pub fn vee(a: &Skew3) -> Vec3 {
    a.0
}

/// Antisymmetric part `(M - M^T)/2` of an arbitrary matrix.
pub fn skew_project(m: &Mat3) -> Skew3 {
    Skew3(Vec3::new(
        0.5 * (m[(2, 1)] - m[(1, 2)]),
        0.5 * (m[(0, 2)] - m[(2, 0)]),
        0.5 * (m[(1, 0)] - m[(0, 1)]),
    ))
}

/// `½ Tr(A^T B)` evaluated on the dense matrices.
pub fn frobenius(a: &Skew3, b: &Skew3) -> f64 {
    frobenius_dense(&a.matrix(), &b.matrix())
}

/// `½ Tr(A^T B)` for general matrices.
pub fn frobenius_dense(a: &Mat3, b: &Mat3) -> f64 {
    0.5 * (a.transpose() * b).trace()
}

/// Coefficients `(sin θ/θ, (1 - cos θ)/θ², (θ - sin θ)/θ³)` with Taylor
/// fallback near zero. The third one cancels badly well above
/// [`SMALL_ANGLE`], so its series is used up to `θ = 0.05`.
fn rodrigues_coefficients(theta: f64) -> (f64, f64, f64) {
    let t2 = theta * theta;
    let (a, b) = if theta < SMALL_ANGLE {
        (1.0 - t2 / 6.0 + t2 * t2 / 120.0, 0.5 - t2 / 24.0 + t2 * t2 / 720.0)
    } else {
        let half = (0.5 * theta).sin() / (0.5 * theta);
        (theta.sin() / theta, 0.5 * half * half)
    };
    let c = if theta < 0.05 {
        1.0 / 6.0 - t2 / 120.0 + t2 * t2 / 5040.0 - t2 * t2 * t2 / 362_880.0 + t2 * t2 * t2 * t2 / 39_916_800.0
    } else {
        (theta - theta.sin()) / (t2 * theta)
    };
    (a, b, c)
}

/// Rodrigues formula `I + a hat(w) + b hat(w)²`.
pub fn exp_so3(w: &Vec3) -> Rot3 {
    let theta = w.norm();
    let (a, b, _) = rodrigues_coefficients(theta);
    let k = hat(w).matrix();
    Rot3(Mat3::identity() + k * a + (k * k) * b)
}

/// Right Jacobian of the exponential map: `exp(x)^{-1} d exp(x) = hat(J_r(x) dx)`.
pub fn right_jacobian(x: &Vec3) -> Mat3 {
    let theta = x.norm();
    let (_, b, c) = rodrigues_coefficients(theta);
    let k = hat(x).matrix();
    Mat3::identity() - k * b + (k * k) * c
}

/// Rotation matrix; `R^T R = I` and `det R = 1` hold to [`Rot3::TOL_ORTH`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Rot3(Mat3);

impl Default for Rot3 {
    fn default() -> Self {
        Rot3::identity()
    }
}

impl Rot3 {
    pub const TOL_ORTH: f64 = 1e-10;

    pub fn identity() -> Self {
        Rot3(Mat3::identity())
    }

    pub fn new(m: Mat3) -> Result<Self> {
        let r = Rot3(m);
        let err = r.orthonormality_error();
        if err.is_finite() && err <= Self::TOL_ORTH {
            Ok(r)
        } else {
            Err(BeamError::Config(format!(
                "matrix is not a rotation (orthonormality error {err:e})"
            )))
        }
    }

    /// Wraps a matrix without checking; used to build deliberately corrupted
    /// frames and intermediate integrator values.
    pub fn from_matrix_unchecked(m: Mat3) -> Self {
        Rot3(m)
    }

    /// Rotation by `angle` about the reference axis `axis` (zero-based).
    pub fn about_axis(axis: usize, angle: f64) -> Self {
        exp_so3(&(unit(axis) * angle))
    }

    pub fn matrix(&self) -> &Mat3 {
        &self.0
    }

    pub fn transpose(&self) -> Rot3 {
        Rot3(self.0.transpose())
    }

    /// Director `d_i = R e_i` (zero-based).
    pub fn director(&self, i: usize) -> Vec3 {
        self.0.column(i).into_owned()
    }

    /// `max(|R^T R - I|_max, |det R - 1|)`.
    pub fn orthonormality_error(&self) -> f64 {
        let gram = self.0.transpose() * self.0 - Mat3::identity();
        let e = gram.iter().fold(0.0f64, |acc, v| acc.max(v.abs()));
        e.max((self.0.determinant() - 1.0).abs())
    }

    /// Nearest rotation by Newton iteration on the polar factor.
    pub fn orthonormalize(&self) -> Rot3 {
        let mut m = self.0;
        for _ in 0..8 {
            let Some(inv) = m.try_inverse() else {
                break;
            };
            let next = (m + inv.transpose()) * 0.5;
            let delta = (next - m).amax();
            m = next;
            if delta < 1e-16 {
                break;
            }
        }
        Rot3(m)
    }

    /// Re-orthonormalizes once roundoff drift becomes measurable.
    pub fn renormalized(&self) -> Rot3 {
        if self.orthonormality_error() > 1e-15 {
            self.orthonormalize()
        } else {
            *self
        }
    }

    /// Unit quaternion `(w, x, y, z)` with `w >= 0`.
    pub fn to_quaternion(&self) -> [f64; 4] {
        let m = &self.0;
        let trace = m.trace();
        let mut q = if trace > 0.0 {
            let s = 2.0 * (trace + 1.0).sqrt();
            [
                0.25 * s,
                (m[(2, 1)] - m[(1, 2)]) / s,
                (m[(0, 2)] - m[(2, 0)]) / s,
                (m[(1, 0)] - m[(0, 1)]) / s,
            ]
        } else if m[(0, 0)] > m[(1, 1)] && m[(0, 0)] > m[(2, 2)] {
            let s = 2.0 * (1.0 + m[(0, 0)] - m[(1, 1)] - m[(2, 2)]).sqrt();
            [
                (m[(2, 1)] - m[(1, 2)]) / s,
                0.25 * s,
                (m[(0, 1)] + m[(1, 0)]) / s,
                (m[(0, 2)] + m[(2, 0)]) / s,
            ]
        } else if m[(1, 1)] > m[(2, 2)] {
            let s = 2.0 * (1.0 + m[(1, 1)] - m[(0, 0)] - m[(2, 2)]).sqrt();
            [
                (m[(0, 2)] - m[(2, 0)]) / s,
                (m[(0, 1)] + m[(1, 0)]) / s,
                0.25 * s,
                (m[(1, 2)] + m[(2, 1)]) / s,
            ]
        } else {
            let s = 2.0 * (1.0 + m[(2, 2)] - m[(0, 0)] - m[(1, 1)]).sqrt();
            [
                (m[(1, 0)] - m[(0, 1)]) / s,
                (m[(0, 2)] + m[(2, 0)]) / s,
                (m[(1, 2)] + m[(2, 1)]) / s,
                0.25 * s,
            ]
        };
        let norm = q.iter().map(|c| c * c).sum::<f64>().sqrt();
        let sign = if q[0] < 0.0 { -1.0 } else { 1.0 };
        for c in q.iter_mut() {
            *c *= sign / norm;
        }
        q
    }

    /// Inverse of [`Rot3::to_quaternion`]; the input is normalized first.
    pub fn from_quaternion(q: [f64; 4]) -> Rot3 {
        let n = q.iter().map(|c| c * c).sum::<f64>().sqrt();
        let [w, x, y, z] = q.map(|c| c / n);
        Rot3(Mat3::new(
            1.0 - 2.0 * (y * y + z * z),
            2.0 * (x * y - w * z),
            2.0 * (x * z + w * y),
            2.0 * (x * y + w * z),
            1.0 - 2.0 * (x * x + z * z),
            2.0 * (y * z - w * x),
            2.0 * (x * z - w * y),
            2.0 * (y * z + w * x),
            1.0 - 2.0 * (x * x + y * y),
        ))
    }
}

impl Mul for Rot3 {
    type Output = Rot3;
    fn mul(self, rhs: Rot3) -> Rot3 {
        Rot3(self.0 * rhs.0)
    }
}

impl Mul<Vec3> for Rot3 {
    type Output = Vec3;
    fn mul(self, rhs: Vec3) -> Vec3 {
        self.0 * rhs
    }
}

impl Mul<&Vec3> for &Rot3 {
    type Output = Vec3;
    fn mul(self, rhs: &Vec3) -> Vec3 {
        self.0 * rhs
    }
}
