//! The tangent-line model underlying the transport equations.
//!
//! Tangent lines to the unit sphere are pairs `(v̂, ±û)` of orthonormal
//! vectors (point of tangency, direction up to sign); unit tangent vectors
//! keep the sign of `û`. SU(2) covers this space four-to-one through the
//! standard double cover onto SO(3) followed by the action on a reference
//! line, and the round metric it inherits is
//! `ds² = dv̂·dv̂ + dû·dû − (v̂·dû)²`.
//!
//! SU(2) elements are stored as unit quaternions internally and exposed as
//! 2×2 complex matrices: `U = w·I + i(x σ_x + y σ_y + z σ_z)` maps to the
//! right-hand rotation by `θ` about `n̂` when `(w, x, y, z) =
//! (cos(θ/2), sin(θ/2) n̂)`.

use nalgebra::{Matrix2, Vector3};
use num_complex::Complex64;

use crate::rotations::{quat_from_matrix, Rotation};

/// Orthonormality tolerance on tangent-line frames.
pub const FRAME_TOL: f64 = 1e-9;

#[derive(thiserror::Error, Debug, Clone, PartialEq)]
pub enum LensError {
    #[error("matrix is not in SU(2) (deviation {deviation:.3e})")]
    NotSu2 { deviation: f64 },
    #[error("tangent-line frame must be orthonormal (deviation {deviation:.3e})")]
    BadFrame { deviation: f64 },
    #[error("consecutive path samples are {gap:.3} rad apart (max 0.1)")]
    SamplesTooFar { gap: f64 },
    #[error("direction sign chaining is ambiguous at sample {index} (|u·u'| = {dot:.3e})")]
    AmbiguousChaining { index: usize, dot: f64 },
    #[error("path needs at least two samples")]
    TooShort,
}

/// A tangent line to the unit sphere: point of tangency `v` and direction
/// `u`, with `(v, u)` and `(v, −u)` naming the same line.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TangentLine {
    pub v: Vector3<f64>,
    pub u: Vector3<f64>,
}

impl TangentLine {
    pub fn new(v: Vector3<f64>, u: Vector3<f64>) -> Result<Self, LensError> {
        let deviation =
            (v.norm() - 1.0).abs().max((u.norm() - 1.0).abs()).max(v.dot(&u).abs());
        if deviation > FRAME_TOL {
            return Err(LensError::BadFrame { deviation });
        }
        Ok(TangentLine { v, u })
    }

    /// Distance treating `u` and `−u` as the same direction.
    pub fn distance(&self, other: &TangentLine) -> f64 {
        let du = (self.u - other.u).norm().min((self.u + other.u).norm());
        (self.v - other.v).norm().max(du)
    }
}

/// A unit tangent vector to the sphere; unlike [`TangentLine`], the sign of
/// `u` is significant.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UnitTangent {
    pub v: Vector3<f64>,
    pub u: Vector3<f64>,
}

impl UnitTangent {
    pub fn new(v: Vector3<f64>, u: Vector3<f64>) -> Result<Self, LensError> {
        let deviation =
            (v.norm() - 1.0).abs().max((u.norm() - 1.0).abs()).max(v.dot(&u).abs());
        if deviation > FRAME_TOL {
            return Err(LensError::BadFrame { deviation });
        }
        Ok(UnitTangent { v, u })
    }
}

/// Unit quaternion repesenting an SU(2) element.
#[derive(Debug, Clone, Copy)]
struct Su2(f64, f64, f64, f64);

impl Su2 {
    fn from_matrix(m: &Matrix2<Complex64>) -> Result<Self, LensError> {
        // unitarity + unit determinant
        let id = Matrix2::<Complex64>::identity();
        let dev_unitary = (m.adjoint() * m - id).map(|e| e.norm()).max();
        let det = m[(0, 0)] * m[(1, 1)] - m[(0, 1)] * m[(1, 0)];
        let dev_det = (det - Complex64::new(1.0, 0.0)).norm();
        let deviation = dev_unitary.max(dev_det);
        if deviation > 1e-9 {
            return Err(LensError::NotSu2 { deviation });
        }
        // U = wI + i(xσx + yσy + zσz)
        let w = (m[(0, 0)].re + m[(1, 1)].re) / 2.0;
        let z = (m[(0, 0)].im - m[(1, 1)].im) / 2.0;
        let x = (m[(0, 1)].im + m[(1, 0)].im) / 2.0;
        let y = (m[(0, 1)].re - m[(1, 0)].re) / 2.0;
        let n = (w * w + x * x + y * y + z * z).sqrt();
        Ok(Su2(w / n, x / n, y / n, z / n))
    }

    fn to_matrix(self) -> Matrix2<Complex64> {
        let Su2(w, x, y, z) = self;
        Matrix2::new(
            Complex64::new(w, z),
            Complex64::new(y, x),
            Complex64::new(-y, x),
            Complex64::new(w, -z),
        )
    }

    fn mul(self, rhs: Su2) -> Su2 {
        let Su2(a0, a1, a2, a3) = self;
        let Su2(b0, b1, b2, b3) = rhs;
        Su2(
            a0 * b0 - a1 * b1 - a2 * b2 - a3 * b3,
            a0 * b1 + a1 * b0 + a2 * b3 - a3 * b2,
            a0 * b2 - a1 * b3 + a2 * b0 + a3 * b1,
            a0 * b3 + a1 * b2 - a2 * b1 + a3 * b0,
        )
    }

    fn to_rotation(self) -> Rotation {
        let Su2(w, x, y, z) = self;
        let m = nalgebra::Matrix3::new(
            1.0 - 2.0 * (y * y + z * z),
            2.0 * (x * y - z * w),
            2.0 * (x * z + y * w),
            2.0 * (x * y + z * w),
            1.0 - 2.0 * (x * x + z * z),
            2.0 * (y * z - x * w),
            2.0 * (x * z - y * w),
            2.0 * (y * z + x * w),
            1.0 - 2.0 * (x * x + y * y),
        );
        Rotation::from_matrix_unchecked(m)
    }

    fn from_rotation(r: &Rotation) -> Su2 {
        let (w, x, y, z) = quat_from_matrix(r.matrix());
        Su2(w, x, y, z)
    }
}

/// The double cover SU(2) → SO(3): `exp(i n̂·σ⃗ θ/2) ↦ R_n̂(θ)` by the
/// adjoint action. `U` and `−U` map to the same rotation.
pub fn su2_to_so3(u: &Matrix2<Complex64>) -> Result<Rotation, LensError> {
    Ok(Su2::from_matrix(u)?.to_rotation())
}

/// The action of a rotation on the reference tangent line `ℓ₀ = (ẑ, ±x̂)`:
/// `R ↦ (R ẑ, ±R x̂)`. Two-to-one: `R` and `R·R_ẑ(π)` give the same line.
pub fn tangent_line_of(r: &Rotation) -> TangentLine {
    TangentLine { v: r.apply(&Vector3::z()), u: r.apply(&Vector3::x()) }
}

/// The two circle-bundle projections: the point of tangency (a point of the
/// sphere) and the line direction (a diameter class, reported by a
/// representative).
pub fn bundle_projections(l: &TangentLine) -> (Vector3<f64>, Vector3<f64>) {
    (l.v, l.u)
}

/// The four SU(2) elements covering a tangent line: a coset of
/// `{1, iσ_z, −1, −iσ_z}` under right multiplication.
pub fn z4_preimages(l: &TangentLine) -> [Matrix2<Complex64>; 4] {
    // a rotation carrying ℓ₀ = (ẑ, ±x̂) onto (v, u)
    let frame = nalgebra::Matrix3::from_columns(&[l.u, l.v.cross(&l.u), l.v]);
    let base = crate::rotations::project_to_rotation(&frame).expect("orthonormal frame");
    let u0 = Su2::from_rotation(&base);
    let i_sigma_z = Su2(0.0, 0.0, 0.0, 1.0);
    let g1 = u0;
    let g2 = u0.mul(i_sigma_z);
    let g3 = g2.mul(i_sigma_z);
    let g4 = g3.mul(i_sigma_z);
    [g1.to_matrix(), g2.to_matrix(), g3.to_matrix(), g4.to_matrix()]
}

/// Length of a sampled tangent-line path under
/// `ds² = dv̂·dv̂ + dû·dû − (v̂·dû)²`, accumulated per interval with the
/// direction representative chained to the sign nearest the previous
/// sample.
pub fn l41_path_length(path: &[TangentLine]) -> Result<f64, LensError> {
    if path.len() < 2 {
        return Err(LensError::TooShort);
    }
    let mut length = 0.0;
    let mut u_prev = path[0].u;
    for (i, pair) in path.windows(2).enumerate() {
        let (a, b) = (&pair[0], &pair[1]);
        let dot = u_prev.dot(&b.u);
        if dot.abs() < 1e-9 {
            return Err(LensError::AmbiguousChaining { index: i + 1, dot });
        }
        let u_next = if dot >= 0.0 { b.u } else { -b.u };
        let dv = b.v - a.v;
        let du = u_next - u_prev;
        let gap = dv.norm().max(du.norm());
        if gap > 0.1 {
            return Err(LensError::SamplesTooFar { gap });
        }
        let v_mid = (a.v + b.v).normalize();
        let ds2 = dv.norm_squared() + du.norm_squared() - v_mid.dot(&du).powi(2);
        length += ds2.max(0.0).sqrt();
        u_prev = u_next;
    }
    Ok(length)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::rngs::StdRng;
    use rand::{Rng, SeedableRng};
    use std::f64::consts::PI;

    fn random_rotation(rng: &mut StdRng) -> Rotation {
        let v = Vector3::new(
            rng.gen_range(-1.0..1.0f64),
            rng.gen_range(-1.0..1.0),
            rng.gen_range(-1.0..1.0),
        )
        .normalize();
        Rotation::from_axis_angle(&v, rng.gen_range(0.0..PI)).unwrap()
    }

    fn su2_exp(n: &Vector3<f64>, theta: f64) -> Matrix2<Complex64> {
        // cos(θ/2) I + i sin(θ/2) n·σ
        let (s, c) = (theta / 2.0).sin_cos();
        Su2(c, s * n.x, s * n.y, s * n.z).to_matrix()
    }

    #[test]
    fn identity_maps_to_identity() {
        let u = Matrix2::<Complex64>::identity();
        let r = su2_to_so3(&u).unwrap();
        assert!(r.frobenius_distance(&Rotation::identity()) < 1e-14);
    }

    #[test]
    fn i_sigma_z_covers_half_turn_about_z() {
        let i = Complex64::new(0.0, 1.0);
        let u = Matrix2::new(i, Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0), -i);
        let r = su2_to_so3(&u).unwrap();
        assert!(r.frobenius_distance(&Rotation::about_z(PI)) < 1e-14);
    }

    #[test]
    fn exponential_form_covers_axis_angle() {
        let mut rng = StdRng::seed_from_u64(2);
        for _ in 0..50 {
            let n = Vector3::new(
                rng.gen_range(-1.0..1.0f64),
                rng.gen_range(-1.0..1.0),
                rng.gen_range(-1.0..1.0),
            )
            .normalize();
            let theta = rng.gen_range(0.0..2.0 * PI);
            let r = su2_to_so3(&su2_exp(&n, theta)).unwrap();
            let expect = Rotation::from_axis_angle(&n, theta).unwrap();
            assert!(r.frobenius_distance(&expect) < 1e-12);
        }
    }

    #[test]
    fn double_cover_kills_the_sign() {
        let mut rng = StdRng::seed_from_u64(3);
        for _ in 0..20 {
            let n = Vector3::new(
                rng.gen_range(-1.0..1.0f64),
                rng.gen_range(-1.0..1.0),
                rng.gen_range(-1.0..1.0),
            )
            .normalize();
            let theta = rng.gen_range(0.0..2.0 * PI);
            let u = su2_exp(&n, theta);
            let r1 = su2_to_so3(&u).unwrap();
            let r2 = su2_to_so3(&u.map(|e| -e)).unwrap();
            assert!(r1.frobenius_distance(&r2) < 1e-13);
        }
    }

    #[test]
    fn non_unitary_rejected() {
        let m = Matrix2::new(
            Complex64::new(2.0, 0.0),
            Complex64::new(0.0, 0.0),
            Complex64::new(0.0, 0.0),
            Complex64::new(0.5, 0.0),
        );
        assert!(matches!(su2_to_so3(&m), Err(LensError::NotSu2 { .. })));
    }

    #[test]
    fn reference_line_and_its_stabilizer() {
        let l0 = tangent_line_of(&Rotation::identity());
        assert!((l0.v - Vector3::z()).norm() < 1e-15);
        assert!((l0.u - Vector3::x()).norm() < 1e-15);
        let l = tangent_line_of(&Rotation::about_z(PI));
        assert!(l.distance(&l0) < 1e-12, "R_z(π) stabilizes the reference line");
    }

    #[test]
    fn tangent_line_of_quarter_x_turn() {
        let l = tangent_line_of(&Rotation::about_x(PI / 2.0));
        assert!((l.v - Vector3::new(0.0, -1.0, 0.0)).norm() < 1e-14);
        assert!((l.u - Vector3::x()).norm() < 1e-14);
    }

    #[test]
    fn projections_split_the_line() {
        let l = TangentLine::new(Vector3::z(), Vector3::x()).unwrap();
        let (point, dir) = bundle_projections(&l);
        assert_eq!(point, Vector3::z());
        assert_eq!(dir, Vector3::x());
        // lines over the same point share the first projection
        let l2 = TangentLine::new(Vector3::z(), Vector3::y()).unwrap();
        assert_eq!(bundle_projections(&l2).0, point);
        // lines with the same direction share the second projection class
        let l3 = TangentLine::new(Vector3::y(), Vector3::x()).unwrap();
        let d3 = bundle_projections(&l3).1;
        assert!((d3 - dir).norm().min((d3 + dir).norm()) < 1e-15);
    }

    #[test]
    fn projections_commute_with_rotations() {
        let mut rng = StdRng::seed_from_u64(9);
        for _ in 0..30 {
            let r = random_rotation(&mut rng);
            let l = tangent_line_of(&random_rotation(&mut rng));
            let rotated = TangentLine::new(r.apply(&l.v), r.apply(&l.u)).unwrap();
            let (p1, d1) = bundle_projections(&rotated);
            let (p0, d0) = bundle_projections(&l);
            assert!((p1 - r.apply(&p0)).norm() < 1e-12);
            let rd = r.apply(&d0);
            assert!((d1 - rd).norm().min((d1 + rd).norm()) < 1e-12);
        }
    }

    #[test]
    fn preimages_of_the_reference_line() {
        let l0 = TangentLine::new(Vector3::z(), Vector3::x()).unwrap();
        let pre = z4_preimages(&l0);
        // the coset {1, iσ_z, −1, −iσ_z} up to an overall stabilizer factor:
        // every element must be diagonal with unit-modulus entries
        for u in &pre {
            assert!(u[(0, 1)].norm() < 1e-12 && u[(1, 0)].norm() < 1e-12);
        }
    }

    #[test]
    fn preimages_cover_the_line_four_to_one() {
        let mut rng = StdRng::seed_from_u64(10);
        for _ in 0..100 {
            let l = tangent_line_of(&random_rotation(&mut rng));
            let pre = z4_preimages(&l);
            for u in &pre {
                let r = su2_to_so3(u).unwrap();
                assert!(tangent_line_of(&r).distance(&l) < 1e-9);
            }
            // pairwise distinct as SU(2) elements: U†U' = I iff Re tr = 2
            for i in 0..4 {
                for j in i + 1..4 {
                    let prod = pre[i].adjoint() * pre[j];
                    let re_tr = (prod[(0, 0)] + prod[(1, 1)]).re;
                    assert!(re_tr < 2.0 - 1e-9, "preimages {i} and {j} coincide");
                }
            }
        }
    }

    #[test]
    fn coset_property_of_preimages() {
        // exactly the coset U·{1, iσ_z, −1, −iσ_z} maps to the line of U
        let mut rng = StdRng::seed_from_u64(11);
        for _ in 0..100 {
            let r = random_rotation(&mut rng);
            let u = Su2::from_rotation(&r);
            let l = tangent_line_of(&r);
            let pre = z4_preimages(&l);
            let mut matched = [false; 4];
            let mut g = u;
            let i_sigma_z = Su2(0.0, 0.0, 0.0, 1.0);
            for _ in 0..4 {
                let gm = g.to_matrix();
                let hit = pre.iter().position(|p| {
                    let prod = p.adjoint() * gm;
                    let re_tr = (prod[(0, 0)] + prod[(1, 1)]).re;
                    re_tr > 2.0 - 1e-9
                });
                let hit = hit.expect("coset element missing from preimage set");
                assert!(!matched[hit], "coset hits a preimage twice");
                matched[hit] = true;
                g = g.mul(i_sigma_z);
            }
        }
    }

    #[test]
    fn direction_sweep_length() {
        // v fixed at ẑ, u swept a quarter turn in the x–y plane: only the
        // second metric term contributes and v·du = 0
        let n = 400;
        let path: Vec<TangentLine> = (0..=n)
            .map(|k| {
                let a = (PI / 2.0) * k as f64 / n as f64;
                TangentLine::new(Vector3::z(), Vector3::new(a.cos(), a.sin(), 0.0)).unwrap()
            })
            .collect();
        let len = l41_path_length(&path).unwrap();
        assert!((len - PI / 2.0).abs() < 1e-3, "len = {len}");
    }

    #[test]
    fn point_sweep_length() {
        // v along a quarter great circle with u parallel-transported (here
        // u is the constant normal of the plane of motion)
        let n = 400;
        let path: Vec<TangentLine> = (0..=n)
            .map(|k| {
                let a = (PI / 2.0) * k as f64 / n as f64;
                TangentLine::new(Vector3::new(a.sin(), 0.0, a.cos()), Vector3::y()).unwrap()
            })
            .collect();
        let len = l41_path_length(&path).unwrap();
        assert!((len - PI / 2.0).abs() < 1e-3, "len = {len}");
    }

    #[test]
    fn chaining_handles_representative_flips() {
        // same geometric path, but samples handed in with alternating signs
        let n = 200;
        let path: Vec<TangentLine> = (0..=n)
            .map(|k| {
                let a = (PI / 2.0) * k as f64 / n as f64;
                let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
                TangentLine::new(Vector3::z(), Vector3::new(a.cos(), a.sin(), 0.0) * sign).unwrap()
            })
            .collect();
        let len = l41_path_length(&path).unwrap();
        assert!((len - PI / 2.0).abs() < 1e-3, "len = {len}");
    }

    #[test]
    fn orthogonal_chaining_is_ambiguous() {
        let path = vec![
            TangentLine::new(Vector3::z(), Vector3::x()).unwrap(),
            TangentLine::new(Vector3::z(), Vector3::y()).unwrap(),
        ];
        assert!(matches!(l41_path_length(&path), Err(LensError::AmbiguousChaining { .. })));
    }
}
