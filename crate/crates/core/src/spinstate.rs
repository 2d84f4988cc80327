//! Spin-1 states, their first and second spin moments, the Fubini–Study
//! metric, and the chord coordinates on the state space.
//!
//! A state is a ray: all operations are invariant under multiplication by a
//! nonzero complex scalar. The chord coordinates `(r, v̂, ±û)` describe a
//! state by the length and direction of its spin vector together with a
//! transverse axis read off the spin fluctuation tensor; `r = 1` collapses
//! the transverse axis and `r = 0` leaves only the transverse axis.

use nalgebra::{Matrix3, Vector3};
use num_complex::Complex64;

use crate::rotations::{spin1_rep, Rotation, SpinOperators};

/// Width of the `r ≈ 0` and `r ≈ 1` degenerate bands in chord coordinates.
pub const CHORD_DEGENERACY_TOL: f64 = 1e-9;

/// Orthonormality tolerance on chord frames.
pub const CHORD_FRAME_TOL: f64 = 1e-9;

#[derive(thiserror::Error, Debug, Clone, PartialEq)]
pub enum StateError {
    #[error("state vector must be nonzero")]
    ZeroState,
    #[error("Bloch vector must satisfy |s| ≤ 1 (got |s| = {norm:.12})")]
    OutsideBall { norm: f64 },
    #[error("chord radius must lie in [0, 1] (got {r:.6})")]
    RadiusOutOfRange { r: f64 },
    #[error("chord frame must be orthonormal (deviation {deviation:.3e})")]
    BadChordFrame { deviation: f64 },
    #[error("chord velocity violates the frame constraints (deviation {deviation:.3e})")]
    InconsistentVelocity { deviation: f64 },
    #[error("chord coordinates are singular at r = 1")]
    SingularCoordinate,
    #[error(
        "the fiber over |s| = {norm:.6} is not a circle; use the chord parametrization instead"
    )]
    FiberNotCircle { norm: f64 },
}

/// A spin-1 pure state: a nonzero vector in C³, compared as a ray.
///
/// Amplitudes are stored in basis order `(z₋₁, z₀, z₊₁)`.
#[derive(Debug, Clone, PartialEq)]
pub struct SpinState(Vector3<Complex64>);

impl SpinState {
    pub fn new(z_m1: Complex64, z_0: Complex64, z_p1: Complex64) -> Result<Self, StateError> {
        Self::from_vector(Vector3::new(z_m1, z_0, z_p1))
    }

    pub fn from_vector(v: Vector3<Complex64>) -> Result<Self, StateError> {
        if v.norm() == 0.0 {
            return Err(StateError::ZeroState);
        }
        Ok(SpinState(v))
    }

    /// Convenience constructor for real amplitudes.
    pub fn from_real(z_m1: f64, z_0: f64, z_p1: f64) -> Result<Self, StateError> {
        Self::new(
            Complex64::new(z_m1, 0.0),
            Complex64::new(z_0, 0.0),
            Complex64::new(z_p1, 0.0),
        )
    }

    pub fn amplitudes(&self) -> &Vector3<Complex64> {
        &self.0
    }

    /// Unit-norm representative of the ray.
    pub fn normalized(&self) -> SpinState {
        SpinState(self.0 / Complex64::new(self.0.norm(), 0.0))
    }

    /// Applies a unitary, e.g. one produced by [`spin1_rep`].
    pub fn transformed(&self, u: &Matrix3<Complex64>) -> SpinState {
        SpinState(u * self.0)
    }

    /// Re/im interleaved amplitudes in basis order `(z₋₁, z₀, z₊₁)`; the
    /// wire format used by the JSON interfaces.
    pub fn to_floats(&self) -> [f64; 6] {
        [
            self.0.x.re, self.0.x.im,
            self.0.y.re, self.0.y.im,
            self.0.z.re, self.0.z.im,
        ]
    }

    pub fn from_floats(f: &[f64; 6]) -> Result<Self, StateError> {
        Self::new(
            Complex64::new(f[0], f[1]),
            Complex64::new(f[2], f[3]),
            Complex64::new(f[4], f[5]),
        )
    }
}

/// The spin expectation vector; lies in the closed unit ball.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BlochVector(Vector3<f64>);

impl BlochVector {
    pub fn new(v: Vector3<f64>) -> Result<Self, StateError> {
        let norm = v.norm();
        if norm > 1.0 + 1e-12 {
            return Err(StateError::OutsideBall { norm });
        }
        Ok(BlochVector(v))
    }

    pub fn vector(&self) -> &Vector3<f64> {
        &self.0
    }

    pub fn norm(&self) -> f64 {
        self.0.norm()
    }
}

/// Covariance matrix of the spin operators in a state: symmetric, positive
/// semi-definite, trace `2 − |s|²`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FluctuationTensor(Matrix3<f64>);

impl FluctuationTensor {
    pub fn matrix(&self) -> &Matrix3<f64> {
        &self.0
    }

    /// Eigenvalues in ascending order.
    pub fn eigenvalues(&self) -> [f64; 3] {
        let mut ev: Vec<f64> = self.0.symmetric_eigen().eigenvalues.iter().copied().collect();
        ev.sort_by(|a, b| a.partial_cmp(b).unwrap());
        [ev[0], ev[1], ev[2]]
    }
}

/// Chord coordinates `(r, v̂, ±û)` of a state.
///
/// `r v̂` is the chord center and `û` its direction; `(r, v, u)` and
/// `(r, v, −u)` are the same chord. At `r = 1` the chord degenerates to a
/// point and `u` is `None`.
#[derive(Debug, Clone, PartialEq)]
pub struct Chord {
    pub r: f64,
    pub v: Vector3<f64>,
    pub u: Option<Vector3<f64>>,
}

impl Chord {
    pub fn new(r: f64, v: Vector3<f64>, u: Vector3<f64>) -> Result<Self, StateError> {
        if !(0.0..=1.0 + CHORD_DEGENERACY_TOL).contains(&r) {
            return Err(StateError::RadiusOutOfRange { r });
        }
        let deviation = (v.norm() - 1.0)
            .abs()
            .max((u.norm() - 1.0).abs())
            .max(v.dot(&u).abs());
        if deviation > CHORD_FRAME_TOL {
            return Err(StateError::BadChordFrame { deviation });
        }
        Ok(Chord { r, v, u: Some(u) })
    }

    /// The `r = 1` chord: a single point on the sphere, no direction.
    pub fn degenerate(v: Vector3<f64>) -> Result<Self, StateError> {
        let deviation = (v.norm() - 1.0).abs();
        if deviation > CHORD_FRAME_TOL {
            return Err(StateError::BadChordFrame { deviation });
        }
        Ok(Chord { r: 1.0, v, u: None })
    }

    /// Distance treating `u` and `−u` as identical.
    pub fn distance(&self, other: &Chord) -> f64 {
        let du = match (&self.u, &other.u) {
            (Some(a), Some(b)) => (a - b).norm().min((a + b).norm()),
            (None, None) => 0.0,
            _ => f64::INFINITY,
        };
        (self.r - other.r).abs().max((self.v - other.v).norm()).max(du)
    }
}

/// Velocity in chord coordinates, paired with [`fs_speed_chord`].
#[derive(Debug, Clone, Copy)]
pub struct ChordVelocity {
    pub dr: f64,
    pub dv: Vector3<f64>,
    pub du: Vector3<f64>,
}

/// A point of the state-space fiber over an interior, noncentral Bloch
/// vector: the fiber is a circle parametrized by `theta ∈ [0, π)`.
#[derive(Debug, Clone, Copy)]
pub struct FiberPoint {
    s: Vector3<f64>,
    theta: f64,
}

impl FiberPoint {
    pub fn new(s: Vector3<f64>, theta: f64) -> Result<Self, StateError> {
        let norm = s.norm();
        if norm <= CHORD_DEGENERACY_TOL || norm >= 1.0 - CHORD_DEGENERACY_TOL {
            return Err(StateError::FiberNotCircle { norm });
        }
        Ok(FiberPoint { s, theta: theta.rem_euclid(std::f64::consts::PI) })
    }

    pub fn bloch(&self) -> &Vector3<f64> {
        &self.s
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }
}

/// The transverse direction of the reference chord state (the axis through
/// its two degenerate-rotation fixed points). Under the ladder-operator
/// conventions of [`SpinOperators::standard`] this is `ŷ`: the reference
/// state is annihilated by `S_y`, so it is invariant under every rotation
/// about `ŷ`. All chord↔state maps extend from this frame by equivariance.
pub fn chord_base_direction() -> Vector3<f64> {
    Vector3::y()
}

fn norm_sq(psi: &SpinState) -> f64 {
    psi.amplitudes().norm_squared()
}

/// Spin expectation vector of a state (representative-independent).
pub fn bloch_vector(psi: &SpinState) -> BlochVector {
    let z = psi.amplitudes();
    let cross = z.x * z.y.conj() + z.y * z.z.conj();
    let sqrt2 = std::f64::consts::SQRT_2;
    let n = norm_sq(psi);
    let v = Vector3::new(
        sqrt2 * cross.re / n,
        sqrt2 * cross.im / n,
        (z.z.norm_sqr() - z.x.norm_sqr()) / n,
    );
    // clip roundoff just outside the ball
    let norm = v.norm();
    if norm > 1.0 && norm <= 1.0 + 1e-12 {
        BlochVector(v / norm)
    } else {
        BlochVector::new(v).expect("spin expectation lies in the unit ball")
    }
}

fn expectation(psi: &SpinState, m: &Matrix3<Complex64>) -> f64 {
    let z = psi.amplitudes();
    z.dotc(&(m * z)).re / norm_sq(psi)
}

/// Spin covariance matrix of a state (representative-independent).
pub fn fluctuation_tensor(psi: &SpinState) -> FluctuationTensor {
    let ops = SpinOperators::standard();
    let s_ops = [&ops.sx, &ops.sy, &ops.sz];
    let s = bloch_vector(psi);
    let mut t = Matrix3::zeros();
    for i in 0..3 {
        for j in i..3 {
            let anti = (s_ops[i] * s_ops[j] + s_ops[j] * s_ops[i]) * Complex64::new(0.5, 0.0);
            let val = expectation(psi, &anti) - s.vector()[i] * s.vector()[j];
            t[(i, j)] = val;
            t[(j, i)] = val;
        }
    }
    FluctuationTensor(t)
}

/// Fubini–Study distance between two rays, in `[0, π/2]`.
pub fn fubini_study_distance(a: &SpinState, b: &SpinState) -> f64 {
    let ip = a.amplitudes().dotc(b.amplitudes()).norm();
    let cos = ip / (norm_sq(a) * norm_sq(b)).sqrt();
    cos.clamp(-1.0, 1.0).acos()
}

/// Eigenvalues of the fluctuation tensor as a function of `|s|`, in the
/// order (radial, larger transverse, smaller transverse):
/// `{1 − s², (1 + √(1−s²))/2, (1 − √(1−s²))/2}`.
pub fn tensor_spectrum(s_norm: f64) -> Result<[f64; 3], StateError> {
    if !(0.0..=1.0).contains(&s_norm) {
        return Err(StateError::RadiusOutOfRange { r: s_norm });
    }
    let w = (1.0 - s_norm * s_norm).max(0.0).sqrt();
    Ok([1.0 - s_norm * s_norm, (1.0 + w) / 2.0, (1.0 - w) / 2.0])
}

/// Rotation with `Q ẑ = v` and `Q ŷ = u`, for an orthonormal pair `(v, u)`.
fn frame_rotation(v: &Vector3<f64>, u: &Vector3<f64>) -> Rotation {
    let x = u.cross(v);
    let m = Matrix3::from_columns(&[x, *u, *v]);
    crate::rotations::project_to_rotation(&m).expect("orthonormal frame")
}

/// Minimal rotation carrying the measurement axis `ẑ` onto the unit
/// vector `n`: the rotation about `ẑ × n` by the angle between them.
pub fn rotation_aligning_z(n: &Vector3<f64>) -> Rotation {
    minimal_rotation_from_z(&n.normalize())
}

/// Minimal rotation carrying `ẑ` to the unit vector `n`.
pub(crate) fn minimal_rotation_from_z(n: &Vector3<f64>) -> Rotation {
    let z = Vector3::z();
    let c = n.z.clamp(-1.0, 1.0);
    if c > 1.0 - 1e-14 {
        return Rotation::identity();
    }
    if c < -1.0 + 1e-14 {
        return Rotation::about_x(std::f64::consts::PI);
    }
    let axis = z.cross(n).normalize();
    Rotation::from_axis_angle(&axis, c.acos()).expect("unit axis")
}

fn base_state(r: f64) -> Vector3<Complex64> {
    Vector3::new(
        Complex64::new(((1.0 - r) / 2.0).max(0.0).sqrt(), 0.0),
        Complex64::new(0.0, 0.0),
        Complex64::new(((1.0 + r) / 2.0).min(1.0).sqrt(), 0.0),
    )
}

/// State represented by a chord. The chord with center `r ẑ` and direction
/// equal to [`chord_base_direction`] maps to `(√((1−r)/2), 0, √((1+r)/2))`;
/// every other chord is reached by rotating that frame. Well defined as a
/// ray: the two frame choices `(v, ±u)` give the same ray.
pub fn state_from_chord(c: &Chord) -> SpinState {
    match &c.u {
        None => {
            let q = minimal_rotation_from_z(&c.v);
            SpinState(spin1_rep(&q) * base_state(1.0))
        }
        Some(u) => {
            if c.r >= 1.0 - CHORD_DEGENERACY_TOL {
                let q = minimal_rotation_from_z(&c.v);
                return SpinState(spin1_rep(&q) * base_state(1.0));
            }
            // map the base frame (ẑ, ŷ) onto (v, u)
            let q = frame_rotation(&c.v, u);
            SpinState(spin1_rep(&q) * base_state(c.r))
        }
    }
}

fn canonical_sign(mut u: Vector3<f64>) -> Vector3<f64> {
    let lead = if u.x.abs() >= u.y.abs() && u.x.abs() >= u.z.abs() {
        u.x
    } else if u.y.abs() >= u.z.abs() {
        u.y
    } else {
        u.z
    };
    if lead < 0.0 {
        u = -u;
    }
    u
}

/// Any unit vector orthogonal to `n`.
pub(crate) fn any_transverse(n: &Vector3<f64>) -> Vector3<f64> {
    let trial = if n.x.abs() < 0.9 { Vector3::x() } else { Vector3::y() };
    (trial - n * trial.dot(n)).normalize()
}

/// Chord coordinates of a state: `r = |s|`, `v = s/r`, and `u` the
/// transverse axis of the fluctuation tensor whose eigenvalue matches the
/// reference state's transverse eigenvalue `(1 − √(1−r²))/2`. At `r = 0`
/// this is the tensor's null axis, about which the state is rotation
/// invariant; at `r = 1` the chord degenerates and `u` is undefined.
pub fn chord_from_state(psi: &SpinState) -> Chord {
    let s = bloch_vector(psi);
    let r = s.norm();
    if r >= 1.0 - CHORD_DEGENERACY_TOL {
        return Chord { r, v: s.vector() / r, u: None };
    }
    let t = fluctuation_tensor(psi);
    if r <= CHORD_DEGENERACY_TOL {
        // null axis of the degenerate disk
        let eig = t.matrix().symmetric_eigen();
        let mut best = 0;
        for i in 1..3 {
            if eig.eigenvalues[i] < eig.eigenvalues[best] {
                best = i;
            }
        }
        let u = canonical_sign(eig.eigenvectors.column(best).into_owned().normalize());
        let v = any_transverse(&u);
        return Chord { r, v, u: Some(u) };
    }
    let v = s.vector() / r;
    // deflate onto the plane transverse to v and diagonalize the 2×2 block;
    // this stays stable where the radial eigenvalue crosses a transverse one
    let e1 = any_transverse(&v);
    let e2 = v.cross(&e1);
    let m = t.matrix();
    let a = e1.dot(&(m * e1));
    let b = e1.dot(&(m * e2));
    let d = e2.dot(&(m * e2));
    let half_gap = ((a - d) / 2.0).hypot(b);
    let lam_small = (a + d) / 2.0 - half_gap;
    // eigenvector of [[a, b], [b, d]] for the smaller eigenvalue
    let (c1, c2) = if (a - lam_small).abs() > (d - lam_small).abs() {
        (b, lam_small - a)
    } else {
        (lam_small - d, b)
    };
    let u = if c1.hypot(c2) < 1e-14 {
        // transverse block is isotropic only at r = 1, handled above;
        // fall back to e1 for safety
        e1
    } else {
        (e1 * c1 + e2 * c2).normalize()
    };
    Chord { r, v, u: Some(canonical_sign(u)) }
}

/// Instantaneous Fubini–Study speed of a chord path:
/// `ds² = ½(1−√(1−r²)) dv·dv + √(1−r²) (u·dv)² + (1−r²)(du·du − (v·du)²)
///  + dr²/(4(1−r²))`.
pub fn fs_speed_chord(c: &Chord, vel: &ChordVelocity) -> Result<f64, StateError> {
    let u = match &c.u {
        Some(u) => u,
        None => return Err(StateError::SingularCoordinate),
    };
    if c.r >= 1.0 - CHORD_DEGENERACY_TOL {
        return Err(StateError::SingularCoordinate);
    }
    let scale = 1.0 + vel.dv.norm() + vel.du.norm() + vel.dr.abs();
    let deviation = vel
        .dv
        .dot(&c.v)
        .abs()
        .max((u.dot(&vel.dv) + c.v.dot(&vel.du)).abs())
        .max(u.dot(&vel.du).abs());
    if deviation > CHORD_FRAME_TOL * scale {
        return Err(StateError::InconsistentVelocity { deviation });
    }
    let w = (1.0 - c.r * c.r).max(0.0).sqrt();
    let udv = u.dot(&vel.dv);
    let vdu = c.v.dot(&vel.du);
    let ds2 = 0.5 * (1.0 - w) * vel.dv.norm_squared()
        + w * udv * udv
        + w * w * (vel.du.norm_squared() - vdu * vdu)
        + vel.dr * vel.dr / (4.0 * w * w);
    Ok(ds2.max(0.0).sqrt())
}

/// The state over `s` with fiber coordinate `theta`. Every `theta` has the
/// same Bloch vector; distinct `theta ∈ [0, π)` are distinct rays.
pub fn fiber_state(f: &FiberPoint) -> SpinState {
    let r = f.s.norm();
    let phase = Complex64::from_polar(1.0, f.theta);
    let base = Vector3::new(
        Complex64::new(((1.0 - r) / 2.0).sqrt(), 0.0) * phase.conj(),
        Complex64::new(0.0, 0.0),
        Complex64::new(((1.0 + r) / 2.0).sqrt(), 0.0) * phase,
    );
    let q = minimal_rotation_from_z(&(f.s / r));
    SpinState(spin1_rep(&q) * base)
}
