//! SO(3) algebra and its spin-1 unitary representation.
//!
//! Rotations are stored as validated 3×3 row-major matrices and act on
//! column vectors, `w' = R w`, with right-hand orientation: a rotation by
//! `π/2` about `ẑ` maps `x̂` to `ŷ`. Composition is matrix composition, so
//! in a product `R₂ R₁` the factor `R₁` acts first.

use nalgebra::{Matrix2, Matrix3, Vector3};
use num_complex::Complex64;

/// Orthogonality / determinant tolerance enforced on every `Rotation`.
pub const ROTATION_TOL: f64 = 1e-12;

/// Unit-norm tolerance accepted for rotation axes.
pub const AXIS_TOL: f64 = 1e-9;

#[derive(thiserror::Error, Debug, Clone, PartialEq)]
pub enum RotationError {
    #[error("rotation axis must be a unit vector (|axis| = {norm:.3e})")]
    NonUnitAxis { norm: f64 },
    #[error("matrix is not orthogonal (max |RᵀR - I| = {deviation:.3e})")]
    NotOrthogonal { deviation: f64 },
    #[error("matrix is not a proper rotation (det = {det:.6})")]
    ImproperRotation { det: f64 },
    #[error("polar projection needs det M > 0 (det = {det:.3e})")]
    DegenerateProjection { det: f64 },
}

/// A proper rotation: `RᵀR = I` and `det R = +1` within [`ROTATION_TOL`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Rotation(Matrix3<f64>);

impl Rotation {
    pub fn identity() -> Self {
        Rotation(Matrix3::identity())
    }

    /// Validates orthogonality and determinant before wrapping.
    pub fn from_matrix(m: Matrix3<f64>) -> Result<Self, RotationError> {
        let dev = (m.transpose() * m - Matrix3::identity()).abs().max();
        if dev > ROTATION_TOL {
            return Err(RotationError::NotOrthogonal { deviation: dev });
        }
        let det = m.determinant();
        if (det - 1.0).abs() > ROTATION_TOL {
            return Err(RotationError::ImproperRotation { det });
        }
        Ok(Rotation(m))
    }

    /// Wraps without validation. Callers must guarantee the invariants hold.
    pub(crate) fn from_matrix_unchecked(m: Matrix3<f64>) -> Self {
        Rotation(m)
    }

    /// Rodrigues rotation by `angle` (radians) about the unit vector `axis`.
    pub fn from_axis_angle(axis: &Vector3<f64>, angle: f64) -> Result<Self, RotationError> {
        let norm = axis.norm();
        if (norm - 1.0).abs() > AXIS_TOL {
            return Err(RotationError::NonUnitAxis { norm });
        }
        let n = axis / norm;
        let k = skew(&n);
        let m = Matrix3::identity() + angle.sin() * k + (1.0 - angle.cos()) * (k * k);
        Ok(Rotation(m))
    }

    pub fn about_x(angle: f64) -> Self {
        Self::from_axis_angle(&Vector3::x(), angle).expect("unit axis")
    }

    pub fn about_y(angle: f64) -> Self {
        Self::from_axis_angle(&Vector3::y(), angle).expect("unit axis")
    }

    pub fn about_z(angle: f64) -> Self {
        Self::from_axis_angle(&Vector3::z(), angle).expect("unit axis")
    }

    pub fn matrix(&self) -> &Matrix3<f64> {
        &self.0
    }

    pub fn apply(&self, v: &Vector3<f64>) -> Vector3<f64> {
        self.0 * v
    }

    /// Inverse rotation (= transpose).
    pub fn inverse(&self) -> Self {
        Rotation(self.0.transpose())
    }

    /// Canonical axis-angle decomposition, extracted through the unit
    /// quaternion for stability near `angle = π`. The angle lands in
    /// `[0, π]`; the axis sign carries the orientation. The identity maps
    /// to `(ẑ, 0)` by convention, and at exactly `π` either axis sign is a
    /// valid answer.
    pub fn axis_angle(&self) -> AxisAngle {
        let q = quat_from_matrix(&self.0);
        // q.0 >= 0 by construction, so the angle is at most π.
        let vec_norm = (q.1 * q.1 + q.2 * q.2 + q.3 * q.3).sqrt();
        let angle = 2.0 * vec_norm.atan2(q.0);
        if vec_norm < 1e-12 {
            return AxisAngle { axis: Vector3::z(), angle: 0.0 };
        }
        AxisAngle {
            axis: Vector3::new(q.1 / vec_norm, q.2 / vec_norm, q.3 / vec_norm),
            angle,
        }
    }

    pub fn frobenius_distance(&self, other: &Rotation) -> f64 {
        (self.0 - other.0).norm()
    }
}

impl std::ops::Mul for Rotation {
    type Output = Rotation;

    fn mul(self, rhs: Rotation) -> Rotation {
        Rotation(self.0 * rhs.0)
    }
}

/// Axis-angle form with `angle ∈ [0, π]` and a unit axis.
#[derive(Debug, Clone, Copy)]
pub struct AxisAngle {
    pub axis: Vector3<f64>,
    pub angle: f64,
}

/// Skew-symmetric matrix `[w]ₓ` with `[w]ₓ v = w × v`.
pub(crate) fn skew(w: &Vector3<f64>) -> Matrix3<f64> {
    Matrix3::new(0.0, -w.z, w.y, w.z, 0.0, -w.x, -w.y, w.x, 0.0)
}

/// Unit quaternion `(w, x, y, z)` with `w ≥ 0` from a rotation matrix,
/// using the largest-pivot branch (Shepperd's method).
pub(crate) fn quat_from_matrix(m: &Matrix3<f64>) -> (f64, f64, f64, f64) {
    let tr = m[(0, 0)] + m[(1, 1)] + m[(2, 2)];
    let (w, x, y, z);
    if tr > 0.0 {
        let s = (tr + 1.0).sqrt() * 2.0;
        w = 0.25 * s;
        x = (m[(2, 1)] - m[(1, 2)]) / s;
        y = (m[(0, 2)] - m[(2, 0)]) / s;
        z = (m[(1, 0)] - m[(0, 1)]) / s;
    } else if m[(0, 0)] > m[(1, 1)] && m[(0, 0)] > m[(2, 2)] {
        let s = (1.0 + m[(0, 0)] - m[(1, 1)] - m[(2, 2)]).sqrt() * 2.0;
        w = (m[(2, 1)] - m[(1, 2)]) / s;
        x = 0.25 * s;
        y = (m[(0, 1)] + m[(1, 0)]) / s;
        z = (m[(0, 2)] + m[(2, 0)]) / s;
    } else if m[(1, 1)] > m[(2, 2)] {
        let s = (1.0 + m[(1, 1)] - m[(0, 0)] - m[(2, 2)]).sqrt() * 2.0;
        w = (m[(0, 2)] - m[(2, 0)]) / s;
        x = (m[(0, 1)] + m[(1, 0)]) / s;
        y = 0.25 * s;
        z = (m[(1, 2)] + m[(2, 1)]) / s;
    } else {
        let s = (1.0 + m[(2, 2)] - m[(0, 0)] - m[(1, 1)]).sqrt() * 2.0;
        w = (m[(1, 0)] - m[(0, 1)]) / s;
        x = (m[(0, 2)] + m[(2, 0)]) / s;
        y = (m[(1, 2)] + m[(2, 1)]) / s;
        z = 0.25 * s;
    }
    let norm = (w * w + x * x + y * y + z * z).sqrt();
    let sign = if w < 0.0 { -1.0 } else { 1.0 };
    (sign * w / norm, sign * x / norm, sign * y / norm, sign * z / norm)
}

/// Nearest rotation to `m` in Frobenius norm (the polar factor), via SVD.
///
/// Used to repair orthogonality drift after integration steps. Requires
/// `det m > 0`; a non-positive determinant means the input has collapsed
/// past the cut locus and there is no unambiguous nearest rotation.
pub fn project_to_rotation(m: &Matrix3<f64>) -> Result<Rotation, RotationError> {
    let det = m.determinant();
    if det <= 0.0 {
        return Err(RotationError::DegenerateProjection { det });
    }
    let svd = m.svd(true, true);
    let u = svd.u.expect("svd with u");
    let vt = svd.v_t.expect("svd with v_t");
    let mut r = u * vt;
    if r.determinant() < 0.0 {
        // det m > 0 makes this unreachable in exact arithmetic; guard anyway.
        let mut u_fix = u;
        u_fix.set_column(2, &(-u.column(2)));
        r = u_fix * vt;
    }
    Ok(Rotation(r))
}

/// The spin-1 operators `S_x, S_y, S_z` in basis order `(z₋₁, z₀, z₊₁)`,
/// together with the Pauli matrices.
///
/// `S_z = diag(−1, 0, +1)`; `S_x, S_y` follow from the standard ladder
/// operators. This fixes the sign convention for the whole crate: with
/// these matrices the spin expectation values of a state reproduce the
/// Bloch map of [`crate::spinstate::bloch_vector`] verbatim, which is
/// checked by the equivariance tests.
#[derive(Debug, Clone)]
pub struct SpinOperators {
    pub sx: Matrix3<Complex64>,
    pub sy: Matrix3<Complex64>,
    pub sz: Matrix3<Complex64>,
    pub pauli_x: Matrix2<Complex64>,
    pub pauli_y: Matrix2<Complex64>,
    pub pauli_z: Matrix2<Complex64>,
}

impl SpinOperators {
    pub fn standard() -> Self {
        let c = |re: f64, im: f64| Complex64::new(re, im);
        let inv_sqrt2 = std::f64::consts::FRAC_1_SQRT_2;
        let sx = Matrix3::new(
            c(0.0, 0.0), c(inv_sqrt2, 0.0), c(0.0, 0.0),
            c(inv_sqrt2, 0.0), c(0.0, 0.0), c(inv_sqrt2, 0.0),
            c(0.0, 0.0), c(inv_sqrt2, 0.0), c(0.0, 0.0),
        );
        let sy = Matrix3::new(
            c(0.0, 0.0), c(0.0, inv_sqrt2), c(0.0, 0.0),
            c(0.0, -inv_sqrt2), c(0.0, 0.0), c(0.0, inv_sqrt2),
            c(0.0, 0.0), c(0.0, -inv_sqrt2), c(0.0, 0.0),
        );
        let sz = Matrix3::new(
            c(-1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0),
            c(0.0, 0.0), c(0.0, 0.0), c(0.0, 0.0),
            c(0.0, 0.0), c(0.0, 0.0), c(1.0, 0.0),
        );
        let pauli_x = Matrix2::new(c(0.0, 0.0), c(1.0, 0.0), c(1.0, 0.0), c(0.0, 0.0));
        let pauli_y = Matrix2::new(c(0.0, 0.0), c(0.0, -1.0), c(0.0, 1.0), c(0.0, 0.0));
        let pauli_z = Matrix2::new(c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(-1.0, 0.0));
        SpinOperators { sx, sy, sz, pauli_x, pauli_y, pauli_z }
    }

    /// `n̂ · S⃗` for a unit vector `n̂`.
    pub fn along(&self, n: &Vector3<f64>) -> Matrix3<Complex64> {
        self.sx.map(|e| e * Complex64::new(n.x, 0.0))
            + self.sy.map(|e| e * Complex64::new(n.y, 0.0))
            + self.sz.map(|e| e * Complex64::new(n.z, 0.0))
    }
}

/// The unitary `D(R) = exp(−iθ n̂·S⃗)` representing `R` on spin-1 states.
///
/// For spin 1 the generator satisfies `A³ = A` with `A = n̂·S⃗`, so the
/// exponential closes after the quadratic term:
/// `exp(−iθA) = I − i sin(θ) A + (cos(θ) − 1) A²`.
pub fn spin1_rep(r: &Rotation) -> Matrix3<Complex64> {
    let ops = SpinOperators::standard();
    let AxisAngle { axis, angle } = r.axis_angle();
    let a = ops.along(&axis);
    let a2 = a * a;
    let eye = Matrix3::<Complex64>::identity();
    eye + a.map(|e| e * Complex64::new(0.0, -angle.sin()))
        + a2.map(|e| e * Complex64::new(angle.cos() - 1.0, 0.0))
}
