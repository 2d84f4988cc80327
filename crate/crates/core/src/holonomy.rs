//! Frame transport, geometric phase, horizontal lifts, generalized solid
//! angle, and two independent cross-checking oracles.
//!
//! Along each spherical segment `v̂(t) = β_j(t)` the transverse frame and
//! its accumulated displacement solve
//!
//! ```text
//! dû/dt = −(dv̂/dt · û) v̂
//! dX/dt = (dv̂/dt v̂ᵀ − v̂ dv̂/dtᵀ) X,   X(start) = I
//! ```
//!
//! integrated here with fourth-order Runge–Kutta, per-step renormalization
//! of `û`, and periodic polar re-orthonormalization of `X`. The geometric
//! phase of a loop is the in-order product of the per-segment displacements
//! `R = R_{n+1} ⋯ R_1`; across each center visit the transverse vector is
//! carried through unchanged.

use nalgebra::{Matrix3, Vector3};

use crate::loops::{
    check_liftable, find_zeros, segment_loop, LiftabilityReport, Loop, LoopError, Rp2Path,
    Segment, Side,
};
use crate::rotations::{project_to_rotation, Rotation};
use crate::spinstate::{
    any_transverse, bloch_vector, chord_from_state, fiber_state, fubini_study_distance,
    state_from_chord, Chord, FiberPoint, SpinState,
};

#[derive(thiserror::Error, Debug)]
pub enum HolonomyError {
    #[error(transparent)]
    Loop(#[from] LoopError),
    #[error("loop is not liftable: {0}")]
    NotLiftable(LiftabilityReport),
    #[error("transport needs at least 16 steps (got {steps})")]
    TooFewSteps { steps: usize },
    #[error("seed vector must be a unit vector transverse to the segment start (deviation {deviation:.3e})")]
    NonTransverseSeed { deviation: f64 },
    #[error("initial state is inconsistent with the loop start ({reason}, deviation {deviation:.3e})")]
    InconsistentStart { reason: &'static str, deviation: f64 },
    #[error("greedy oracle supports only loops with 0 < |γ| < 1 throughout ({reason} at t = {t:.6})")]
    UnsupportedLoop { reason: &'static str, t: f64 },
    #[error("spherical polyline must be closed (gap {gap:.3e})")]
    PolylineNotClosed { gap: f64 },
    #[error("spherical polyline needs at least 3 distinct vertices")]
    PolylineTooShort,
    #[error("consecutive polyline vertices {index} and {} are antipodal; the connecting geodesic is ambiguous", index + 1)]
    AmbiguousGeodesic { index: usize },
    #[error("integration constraint drift in {what}: {deviation:.3e}")]
    ConstraintDrift { what: &'static str, deviation: f64 },
}

/// A differentiable curve on the unit sphere, the input to the transport
/// integrator. Implemented by [`Segment`] (its `β` closure) and by the
/// chained representative of an [`Rp2Path`].
pub trait SphereCurve {
    fn domain(&self) -> (f64, f64);
    fn point(&self, t: f64) -> Vector3<f64>;
    fn velocity(&self, t: f64, side: Side) -> Vector3<f64>;
    /// Interior parameter values where the velocity may jump; integration
    /// steps never straddle these.
    fn piecewise_breaks(&self) -> Vec<f64> {
        Vec::new()
    }
}

impl SphereCurve for Segment {
    fn domain(&self) -> (f64, f64) {
        Segment::domain(self)
    }

    fn point(&self, t: f64) -> Vector3<f64> {
        self.beta(t)
    }

    fn velocity(&self, t: f64, side: Side) -> Vector3<f64> {
        self.beta_dot_sided(t, side)
    }

    fn piecewise_breaks(&self) -> Vec<f64> {
        self.interior_breakpoints()
    }
}

/// Transport of a transverse frame along one spherical segment.
#[derive(Debug, Clone)]
pub struct FrameTransport {
    /// Sample times, from the segment start to its end.
    pub times: Vec<f64>,
    /// Transported transverse vector at each sample.
    pub u: Vec<Vector3<f64>>,
    /// Accumulated displacement at each sample; starts at the identity.
    pub x: Vec<Rotation>,
    /// The segment's vertical displacement `X(end)`.
    pub displacement: Rotation,
    /// `|û(end) − X(end) û(0)|`, the cross-consistency of the two
    /// transport equations.
    pub u_consistency: f64,
}

struct TransportOutcome {
    u_end: Vector3<f64>,
    x_end: Matrix3<f64>,
    samples: Option<(Vec<f64>, Vec<Vector3<f64>>, Vec<Matrix3<f64>>)>,
}

/// RK4 over the two transport equations with per-step renormalization of
/// `û` and polar re-orthonormalization of `X` every 64 steps. Steps never
/// straddle the curve's breakpoints, and stages landing exactly on a
/// sub-interval end evaluate the one-sided velocity from below.
fn integrate_transport(
    curve: &dyn SphereCurve,
    u0: &Vector3<f64>,
    steps: usize,
    store: bool,
) -> TransportOutcome {
    let (t0, t1) = curve.domain();
    let mut bounds = vec![t0];
    bounds.extend(curve.piecewise_breaks());
    bounds.push(t1);
    let total = t1 - t0;

    let mut u = *u0;
    let mut x = Matrix3::<f64>::identity();
    let mut samples = if store {
        Some((vec![t0], vec![u], vec![x]))
    } else {
        None
    };

    let mut step_count = 0usize;
    for w in bounds.windows(2) {
        let (a, b) = (w[0], w[1]);
        if b - a <= 0.0 {
            continue;
        }
        let n = ((steps as f64 * (b - a) / total).ceil() as usize).max(8);
        let h = (b - a) / n as f64;
        for k in 0..n {
            let ta = a + k as f64 * h;
            let tm = ta + 0.5 * h;
            let tb = if k == n - 1 { b } else { ta + h };
            let side_b = if k == n - 1 { Side::Below } else { Side::Above };
            let (va, da) = (curve.point(ta), curve.velocity(ta, Side::Above));
            let (vm, dm) = (curve.point(tm), curve.velocity(tm, Side::Above));
            let (vb, db) = (curve.point(tb), curve.velocity(tb, side_b));

            let gen_a = da * va.transpose() - va * da.transpose();
            let gen_m = dm * vm.transpose() - vm * dm.transpose();
            let gen_b = db * vb.transpose() - vb * db.transpose();

            // û stage derivatives
            let fu = |v: &Vector3<f64>, d: &Vector3<f64>, u: &Vector3<f64>| -v * d.dot(u);
            let k1u = fu(&va, &da, &u);
            let k2u = fu(&vm, &dm, &(u + k1u * (0.5 * h)));
            let k3u = fu(&vm, &dm, &(u + k2u * (0.5 * h)));
            let k4u = fu(&vb, &db, &(u + k3u * h));
            let mut u_new = u + (k1u + k2u * 2.0 + k3u * 2.0 + k4u) * (h / 6.0);

            // X stage derivatives
            let k1x = gen_a * x;
            let k2x = gen_m * (x + k1x * (0.5 * h));
            let k3x = gen_m * (x + k2x * (0.5 * h));
            let k4x = gen_b * (x + k3x * h);
            let mut x_new = x + (k1x + k2x * 2.0 + k3x * 2.0 + k4x) * (h / 6.0);

            // constraint repair: û stays unit and transverse to v̂
            u_new -= vb * vb.dot(&u_new);
            u_new = u_new.normalize();
            step_count += 1;
            if step_count % 64 == 0 {
                x_new = *project_to_rotation(&x_new)
                    .expect("transported frame stays near SO(3)")
                    .matrix();
            }
            u = u_new;
            x = x_new;
            if let Some((ts, us, xs)) = samples.as_mut() {
                ts.push(tb);
                us.push(u);
                xs.push(x);
            }
        }
    }
    x = *project_to_rotation(&x).expect("transported frame stays near SO(3)").matrix();
    if let Some((_, _, xs)) = samples.as_mut() {
        if let Some(last) = xs.last_mut() {
            *last = x;
        }
    }
    TransportOutcome { u_end: u, x_end: x, samples }
}

/// Transports a transverse seed `u0` along a segment's spherical
/// projection, returning the sampled frame and the segment's vertical
/// displacement.
pub fn transport_frame(
    seg: &Segment,
    u0: &Vector3<f64>,
    steps: usize,
) -> Result<FrameTransport, HolonomyError> {
    transport_curve(seg, u0, steps)
}

/// Same as [`transport_frame`] for any sphere curve.
pub fn transport_curve(
    curve: &dyn SphereCurve,
    u0: &Vector3<f64>,
    steps: usize,
) -> Result<FrameTransport, HolonomyError> {
    if steps < 16 {
        return Err(HolonomyError::TooFewSteps { steps });
    }
    let (t0, _) = curve.domain();
    let v0 = curve.point(t0);
    let deviation = (u0.norm() - 1.0).abs().max(u0.dot(&v0).abs());
    if deviation > 1e-9 {
        return Err(HolonomyError::NonTransverseSeed { deviation });
    }
    let out = integrate_transport(curve, u0, steps, true);
    let (times, u, xs) = out.samples.expect("stored");
    let displacement = Rotation::from_matrix(out.x_end)
        .map_err(|_| HolonomyError::ConstraintDrift { what: "X(end)", deviation: f64::NAN })?;
    let u_consistency = (out.u_end - displacement.apply(u0)).norm();
    let x = xs
        .into_iter()
        .map(crate::rotations::Rotation::from_matrix_unchecked)
        .collect();
    Ok(FrameTransport { times, u, x, displacement, u_consistency })
}

/// The geometric phase of a loop and its generalized-solid-angle
/// decomposition.
///
/// `rotation` maps the start representative `alpha_start` to the
/// continuation representative of the projection's endpoint, and factors
/// exactly as `R = R_{alpha_end}(omega2) · R_k(omega1)`.
#[derive(Debug, Clone)]
pub struct HolonomyResult {
    /// The SO(3) geometric phase.
    pub rotation: Rotation,
    /// Per-segment vertical displacements, in traversal order.
    pub segment_factors: Vec<Rotation>,
    /// Representative of the projected path's start.
    pub alpha_start: Vector3<f64>,
    /// Representative of the projected path's end, with the sign chosen so
    /// the decomposition below holds with `omega2 ≥ 0`.
    pub alpha_end: Vector3<f64>,
    /// Unit normal to both endpoint representatives.
    pub k: Vector3<f64>,
    /// Angle between the endpoint representatives, radians.
    pub omega1: f64,
    /// Generalized solid angle `arccos(k̂·Rk̂)`, radians in `[0, π]`.
    pub omega2: f64,
}

impl HolonomyResult {
    /// Rebuilds the rotation from the reported decomposition.
    pub fn reconstructed(&self) -> Rotation {
        let about_end = Rotation::from_axis_angle(&self.alpha_end, self.omega2).expect("unit axis");
        let about_k = Rotation::from_axis_angle(&self.k, self.omega1).expect("unit axis");
        about_end * about_k
    }
}

/// The generalized solid angle of a computed holonomy, in `[0, π]`.
pub fn generalized_solid_angle(h: &HolonomyResult) -> f64 {
    h.omega2
}

fn decompose(
    rotation: &Rotation,
    w0: &Vector3<f64>,
) -> (Vector3<f64>, Vector3<f64>, f64, f64) {
    let w1 = rotation.apply(w0);
    let c = w0.dot(&w1).clamp(-1.0, 1.0);
    let (k, omega1) = if c.abs() > 1.0 - 1e-12 {
        // endpoint representatives colinear: any transverse normal works
        let k = any_transverse(w0);
        let omega1 = if c > 0.0 { 0.0 } else { std::f64::consts::PI };
        (k, omega1)
    } else {
        (w0.cross(&w1).normalize(), c.acos())
    };
    // both sign choices of k must agree on the reported angle
    let omega2_plus = k.dot(&rotation.apply(&k)).clamp(-1.0, 1.0).acos();
    let omega2_minus = (-k).dot(&rotation.apply(&-k)).clamp(-1.0, 1.0).acos();
    debug_assert!((omega2_plus - omega2_minus).abs() < 1e-12);
    let omega2 = 0.5 * (omega2_plus + omega2_minus);
    // signed twist of R about w1 after removing the k-rotation
    let q = *rotation * Rotation::from_axis_angle(&k, -omega1).expect("unit axis");
    let e2 = w1.cross(&k);
    let signed = e2.dot(&q.apply(&k)).atan2(k.dot(&q.apply(&k)));
    let alpha_end = if signed >= 0.0 { w1 } else { -w1 };
    (alpha_end, k, omega1, omega2)
}

/// Computes the geometric phase of a liftable loop by composing the
/// per-segment vertical displacements, carrying the transverse seed through
/// each center visit unchanged.
pub fn geometric_phase(lp: &Loop, steps_per_segment: usize) -> Result<HolonomyResult, HolonomyError> {
    let report = check_liftable(lp)?;
    if !report.liftable {
        return Err(HolonomyError::NotLiftable(report));
    }
    let segments = segment_loop(lp, &report.zeros)?;
    let mut u = any_transverse(&segments[0].beta_start());
    let mut factors = Vec::with_capacity(segments.len());
    let mut rotation = Rotation::identity();
    for (i, seg) in segments.iter().enumerate() {
        let out = integrate_transport(seg, &u, steps_per_segment.max(16), false);
        let r_j = Rotation::from_matrix(out.x_end)
            .map_err(|_| HolonomyError::ConstraintDrift { what: "X(end)", deviation: f64::NAN })?;
        rotation = r_j * rotation;
        factors.push(r_j);
        u = out.u_end;
        if i + 1 < segments.len() {
            // the shared transverse vector must stay normal to the next
            // segment's start direction; measure rather than assume
            let next = segments[i + 1].beta_start();
            let drift = u.dot(&next).abs();
            if drift > 1e-6 {
                return Err(HolonomyError::ConstraintDrift {
                    what: "transverse continuity at a center visit",
                    deviation: drift,
                });
            }
            u = (u - next * u.dot(&next)).normalize();
        }
    }
    let w0 = segments[0].beta_start();
    // R w0 must land on the projected endpoint's diameter
    let end_line = segments[segments.len() - 1].beta_end();
    let landing = rotation.apply(&w0).dot(&end_line).abs();
    if 1.0 - landing > 1e-5 {
        return Err(HolonomyError::ConstraintDrift {
            what: "endpoint alignment of the composed displacement",
            deviation: 1.0 - landing,
        });
    }
    let (alpha_end, k, omega1, omega2) = decompose(&rotation, &w0);
    Ok(HolonomyResult {
        rotation,
        segment_factors: factors,
        alpha_start: w0,
        alpha_end,
        k,
        omega1,
        omega2,
    })
}

/// A sampled lift: states over the loop together with their chords.
#[derive(Debug, Clone)]
pub struct LiftPath {
    pub times: Vec<f64>,
    pub states: Vec<SpinState>,
    pub chords: Vec<Chord>,
}

impl LiftPath {
    /// Total Fubini–Study length of the sampled path.
    pub fn fs_length(&self) -> f64 {
        fs_length(&self.states)
    }
}

/// Sum of consecutive Fubini–Study distances.
pub fn fs_length(states: &[SpinState]) -> f64 {
    states.windows(2).map(|w| fubini_study_distance(&w[0], &w[1])).sum()
}

/// Tolerance on `|bloch(lift(t)) − γ(t)|` maintained by [`horizontal_lift`].
pub const TOL_LIFT: f64 = 1e-7;

/// Computes the horizontal lift of a liftable loop starting from `psi0`,
/// whose spin vector must match `γ(0)`.
///
/// The lift is assembled per segment as the chord path
/// `(|γ(t)|, β(t), û(t))` with `û` transported horizontally; across center
/// visits the transverse vector carries over unchanged. For a loop based at
/// the center, `psi0`'s symmetry axis must be normal to the outgoing
/// direction — those are exactly the states from which a continuous lift
/// exists; for a loop based on the boundary the fiber is a point and the
/// transverse seed is arbitrary.
pub fn horizontal_lift(
    lp: &Loop,
    psi0: &SpinState,
    steps: usize,
) -> Result<LiftPath, HolonomyError> {
    if steps < 16 {
        return Err(HolonomyError::TooFewSteps { steps });
    }
    let report = check_liftable(lp)?;
    if !report.liftable {
        return Err(HolonomyError::NotLiftable(report));
    }
    let segments = segment_loop(lp, &report.zeros)?;
    let s0 = bloch_vector(psi0);
    let gamma0 = lp.eval(0.0);
    let deviation = (s0.vector() - gamma0).norm();
    if deviation > 1e-8 {
        return Err(HolonomyError::InconsistentStart { reason: "spin vector differs from γ(0)", deviation });
    }
    let chord0 = chord_from_state(psi0);
    let beta0 = segments[0].beta_start();
    let mut u = match &chord0.u {
        Some(d) => {
            let radial = d.dot(&beta0).abs();
            if chord0.r <= 1e-6 && radial > 1e-6 {
                // a center state whose symmetry axis is not normal to the
                // outgoing tangent admits no continuous lift of this loop
                return Err(HolonomyError::InconsistentStart {
                    reason: "center-state axis is not transverse to the outgoing tangent",
                    deviation: radial,
                });
            }
            (d - beta0 * d.dot(&beta0)).normalize()
        }
        None => any_transverse(&beta0),
    };

    let mut times = Vec::new();
    let mut states = Vec::new();
    let mut chords = Vec::new();
    for (i, seg) in segments.iter().enumerate() {
        let out = integrate_transport(seg, &u, steps.max(16), true);
        let (ts, us, _) = out.samples.expect("stored");
        let skip = if i == 0 { 0 } else { 1 };
        for (t, uv) in ts.iter().zip(us.iter()).skip(skip) {
            let r = seg.radius(*t).min(1.0);
            let v = seg.beta(*t);
            let chord = if r >= 1.0 - crate::spinstate::CHORD_DEGENERACY_TOL {
                Chord::degenerate(v).expect("unit direction")
            } else {
                Chord::new(r, v, *uv).map_err(|_| HolonomyError::ConstraintDrift {
                    what: "chord frame along the lift",
                    deviation: uv.dot(&v).abs(),
                })?
            };
            let state = state_from_chord(&chord);
            let drift = (bloch_vector(&state).vector() - lp.eval(*t)).norm();
            if drift > TOL_LIFT {
                return Err(HolonomyError::ConstraintDrift {
                    what: "lift projection |bloch(lift) − γ|",
                    deviation: drift,
                });
            }
            times.push(*t);
            states.push(state);
            chords.push(chord);
        }
        u = out.u_end;
        if i + 1 < segments.len() {
            let next = segments[i + 1].beta_start();
            u = (u - next * u.dot(&next)).normalize();
        }
    }
    Ok(LiftPath { times, states, chords })
}

/// A canonical valid starting state for lifting a loop: the chord state
/// over `γ(0)` with a deterministic transverse direction. Over the center
/// the transverse direction is chosen normal to the outgoing tangent, as a
/// continuous lift requires.
pub fn default_start_state(lp: &Loop) -> Result<SpinState, HolonomyError> {
    let zeros = find_zeros(lp)?;
    let g0 = lp.eval(0.0);
    let r = g0.norm();
    let tol = lp.tolerances().tol_zero;
    let chord = if r < tol {
        let segs = segment_loop(lp, &zeros)?;
        let beta0 = segs[0].beta_start();
        Chord::new(0.0, beta0, any_transverse(&beta0)).expect("orthonormal frame")
    } else if r > 1.0 - crate::spinstate::CHORD_DEGENERACY_TOL {
        Chord::degenerate(g0 / r).expect("unit direction")
    } else {
        let v = g0 / r;
        Chord::new(r, v, any_transverse(&v)).expect("orthonormal frame")
    };
    Ok(state_from_chord(&chord))
}

/// Vertical displacement of a loop's projection to the space of diameters,
/// computed on the chained continuous representative in a single
/// integration pass and read off the endpoint frames of the lifted unit
/// tangent. Cross-checks [`geometric_phase`] through an independent code
/// path.
pub fn vertical_displacement_rp2(
    alpha: &Rp2Path,
    steps: usize,
) -> Result<Rotation, HolonomyError> {
    if steps < 16 {
        return Err(HolonomyError::TooFewSteps { steps });
    }
    // the chained representative must be continuous across every flip
    for &t in alpha.flips() {
        let eps = 1e-9;
        let gap = (alpha.chained(t - eps) - alpha.chained(t + eps)).norm();
        if gap > 1e-6 {
            return Err(HolonomyError::Loop(LoopError::DiscontinuousRepresentative { t, gap }));
        }
    }
    struct Chained<'a>(&'a Rp2Path);
    impl SphereCurve for Chained<'_> {
        fn domain(&self) -> (f64, f64) {
            let segs = self.0.segments();
            (segs[0].domain().0, segs[segs.len() - 1].domain().1)
        }

        fn point(&self, t: f64) -> Vector3<f64> {
            self.0.chained(t)
        }

        fn velocity(&self, t: f64, side: Side) -> Vector3<f64> {
            self.0.chained_velocity_sided(t, side)
        }

        fn piecewise_breaks(&self) -> Vec<f64> {
            let mut b = self.0.flips().to_vec();
            for seg in self.0.segments() {
                b.extend(seg.interior_breakpoints());
            }
            b.sort_by(|a, c| a.partial_cmp(c).unwrap());
            b
        }
    }
    let curve = Chained(alpha);
    let w0 = curve.point(curve.domain().0);
    let u0 = any_transverse(&w0);
    let total_steps = steps * alpha.segments().len();
    let out = integrate_transport(&curve, &u0, total_steps, false);
    let w1 = curve.point(curve.domain().1);
    let u1 = (out.u_end - w1 * w1.dot(&out.u_end)).normalize();
    // the unique rotation aligning the lifted start frame with the end frame
    let f0 = Matrix3::from_columns(&[w0, u0, w0.cross(&u0)]);
    let f1 = Matrix3::from_columns(&[w1, u1, w1.cross(&u1)]);
    let v = project_to_rotation(&(f1 * f0.transpose()))
        .map_err(|_| HolonomyError::ConstraintDrift { what: "endpoint frames", deviation: f64::NAN })?;
    Ok(v)
}

/// Brute-force horizontal lift for loops that stay strictly inside the
/// punctured ball: at each step the state hops to the Fubini–Study-nearest
/// point of the fiber over the next spin vector, located by a fixed grid in
/// the fiber coordinate followed by golden-section refinement. Independent
/// of the transport machinery.
pub fn greedy_lift_oracle(
    lp: &Loop,
    psi0: &SpinState,
    steps: usize,
    fiber_grid: usize,
) -> Result<LiftPath, HolonomyError> {
    if steps < 16 {
        return Err(HolonomyError::TooFewSteps { steps });
    }
    let grid = fiber_grid.max(8);
    let zeros = find_zeros(lp)?;
    if !zeros.interior().is_empty() || zeros.starts_at_center() {
        let t = if zeros.starts_at_center() { 0.0 } else { zeros.interior()[0] };
        return Err(HolonomyError::UnsupportedLoop { reason: "loop visits the center", t });
    }
    let s0 = bloch_vector(psi0);
    let deviation = (s0.vector() - lp.eval(0.0)).norm();
    if deviation > 1e-8 {
        return Err(HolonomyError::InconsistentStart { reason: "spin vector differs from γ(0)", deviation });
    }

    let mut times = Vec::with_capacity(steps + 1);
    let mut states = Vec::with_capacity(steps + 1);
    let mut chords = Vec::with_capacity(steps + 1);
    let mut current = psi0.normalized();
    times.push(0.0);
    chords.push(chord_from_state(&current));
    states.push(current.clone());
    for k in 1..=steps {
        let t = k as f64 / steps as f64;
        let s = lp.eval(t);
        let norm = s.norm();
        if norm >= 1.0 - 1e-9 {
            return Err(HolonomyError::UnsupportedLoop { reason: "loop touches the boundary", t });
        }
        if norm <= 1e-9 {
            return Err(HolonomyError::UnsupportedLoop { reason: "loop visits the center", t });
        }
        let dist = |theta: f64| {
            let f = FiberPoint::new(s, theta).expect("interior noncentral point");
            fubini_study_distance(&current, &fiber_state(&f))
        };
        let pi = std::f64::consts::PI;
        let mut best = (0.0, dist(0.0));
        for g in 1..grid {
            let theta = pi * g as f64 / grid as f64;
            let d = dist(theta);
            if d < best.1 {
                best = (theta, d);
            }
        }
        let (mut lo, mut hi) = (best.0 - pi / grid as f64, best.0 + pi / grid as f64);
        let phi = (5.0f64.sqrt() - 1.0) / 2.0;
        let (mut x1, mut x2) = (hi - phi * (hi - lo), lo + phi * (hi - lo));
        let (mut f1, mut f2) = (dist(x1), dist(x2));
        for _ in 0..50 {
            if f1 < f2 {
                hi = x2;
                x2 = x1;
                f2 = f1;
                x1 = hi - phi * (hi - lo);
                f1 = dist(x1);
            } else {
                lo = x1;
                x1 = x2;
                f1 = f2;
                x2 = lo + phi * (hi - lo);
                f2 = dist(x2);
            }
        }
        let theta = 0.5 * (lo + hi);
        current = fiber_state(&FiberPoint::new(s, theta).expect("interior noncentral point"));
        times.push(t);
        chords.push(chord_from_state(&current));
        states.push(current.clone());
    }
    Ok(LiftPath { times, states, chords })
}

/// Signed solid angle of a closed spherical polyline, accumulated per
/// triangle of the fan rooted at the first vertex and reduced modulo `4π`
/// into `[0, 4π)`.
///
/// Coincident consecutive vertices are skipped; antipodal consecutive
/// vertices make the connecting geodesic ambiguous and are an error.
pub fn solid_angle_oracle(polyline: &[Vector3<f64>]) -> Result<f64, HolonomyError> {
    // drop zero-length edges, including a duplicated closure point
    let mut pts: Vec<Vector3<f64>> = Vec::with_capacity(polyline.len());
    for p in polyline {
        let p = p.normalize();
        if pts.last().map_or(true, |q: &Vector3<f64>| (q - p).norm() > 1e-12) {
            pts.push(p);
        }
    }
    if pts.len() > 1 && (pts[0] - pts[pts.len() - 1]).norm() <= 1e-12 {
        pts.pop();
    }
    if pts.is_empty() {
        return Err(HolonomyError::PolylineTooShort);
    }
    if pts.len() < 3 {
        // a single repeated point (or a two-point back-and-forth) encloses
        // nothing
        return Ok(0.0);
    }
    if polyline.len() < 2 || (polyline[0] - polyline[polyline.len() - 1]).norm() > 1e-9 {
        return Err(HolonomyError::PolylineNotClosed {
            gap: (polyline[0] - polyline[polyline.len() - 1]).norm(),
        });
    }
    for i in 0..pts.len() {
        let j = (i + 1) % pts.len();
        if pts[i].dot(&pts[j]) < -1.0 + 1e-9 {
            return Err(HolonomyError::AmbiguousGeodesic { index: i });
        }
    }
    let p0 = pts[0];
    let mut total = 0.0;
    for i in 1..pts.len() - 1 {
        let (p1, p2) = (pts[i], pts[i + 1]);
        let num = p0.dot(&p1.cross(&p2));
        let den = 1.0 + p0.dot(&p1) + p1.dot(&p2) + p2.dot(&p0);
        total += 2.0 * num.atan2(den);
    }
    Ok(total.rem_euclid(4.0 * std::f64::consts::PI))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::loops::catalog;
    use crate::rotations::spin1_rep;
    use std::f64::consts::PI;

    struct TestCurve<F, G> {
        f: F,
        df: G,
        t0: f64,
        t1: f64,
    }

    impl<F, G> SphereCurve for TestCurve<F, G>
    where
        F: Fn(f64) -> Vector3<f64>,
        G: Fn(f64) -> Vector3<f64>,
    {
        fn domain(&self) -> (f64, f64) {
            (self.t0, self.t1)
        }

        fn point(&self, t: f64) -> Vector3<f64> {
            (self.f)(t)
        }

        fn velocity(&self, t: f64, _side: Side) -> Vector3<f64> {
            (self.df)(t)
        }
    }

    #[test]
    fn constant_direction_transports_trivially() {
        let curve = TestCurve {
            f: |_| Vector3::z(),
            df: |_| Vector3::zeros(),
            t0: 0.0,
            t1: 1.0,
        };
        let ft = transport_curve(&curve, &Vector3::x(), 64).unwrap();
        assert!(ft.displacement.frobenius_distance(&Rotation::identity()) < 1e-12);
        assert!((ft.u.last().unwrap() - Vector3::x()).norm() < 1e-12);
    }

    #[test]
    fn great_circle_arc_z_to_y() {
        // quarter great circle from ẑ to ŷ in the y–z plane
        let curve = TestCurve {
            f: |t: f64| Vector3::new(0.0, (PI / 2.0 * t).sin(), (PI / 2.0 * t).cos()),
            df: |t: f64| {
                Vector3::new(0.0, (PI / 2.0 * t).cos(), -(PI / 2.0 * t).sin()) * (PI / 2.0)
            },
            t0: 0.0,
            t1: 1.0,
        };
        let ft = transport_curve(&curve, &Vector3::x(), 512).unwrap();
        assert!(
            ft.displacement.frobenius_distance(&Rotation::about_x(-PI / 2.0)) < 1e-9,
            "got {:?}",
            ft.displacement
        );
        assert!(ft.u_consistency < 1e-9);
    }

    #[test]
    fn transport_rejects_bad_seeds() {
        let curve = TestCurve {
            f: |_| Vector3::z(),
            df: |_| Vector3::zeros(),
            t0: 0.0,
            t1: 1.0,
        };
        assert!(matches!(
            transport_curve(&curve, &Vector3::z(), 64),
            Err(HolonomyError::NonTransverseSeed { .. })
        ));
        assert!(matches!(
            transport_curve(&curve, &Vector3::x(), 4),
            Err(HolonomyError::TooFewSteps { .. })
        ));
    }

    #[test]
    fn gamma_a_first_segment_factor() {
        let lp = catalog::gamma_a();
        let zeros = find_zeros(&lp).unwrap();
        let segs = segment_loop(&lp, &zeros).unwrap();
        let u0 = any_transverse(&segs[0].beta_start());
        let ft = transport_frame(&segs[0], &u0, 20_000).unwrap();
        // closed form: a twist of +√3π/2 about the arrival direction after
        // the half turn of the base point
        let s3 = 3.0f64.sqrt();
        let expect = Rotation::from_axis_angle(&segs[0].beta_end(), s3 * PI / 2.0).unwrap()
            * Rotation::about_z(PI);
        assert!(
            ft.displacement.frobenius_distance(&expect) < 1e-8,
            "distance {}",
            ft.displacement.frobenius_distance(&expect)
        );
        assert!(ft.u_consistency < 1e-8);
        // the displacement carries the start direction to the end direction
        let moved = ft.displacement.apply(&segs[0].beta_start());
        assert!((moved - segs[0].beta_end()).norm() < 1e-9);
    }

    #[test]
    fn gamma_a_phase_value() {
        let h = geometric_phase(&catalog::gamma_a(), 20_000).unwrap();
        let axis = Vector3::new(0.5, 0.0, 3.0f64.sqrt() / 2.0);
        let angle = (2.0 - 3.0f64.sqrt()) * PI;
        let expect = Rotation::from_axis_angle(&axis, -angle).unwrap();
        assert!(
            h.rotation.frobenius_distance(&expect) < 1e-8,
            "distance {}",
            h.rotation.frobenius_distance(&expect)
        );
        let aa = h.rotation.axis_angle();
        assert!((aa.angle - angle).abs() < 1e-9);
        assert!((aa.axis + axis).norm() < 1e-8);
        // generalized solid angle folds the orientation away
        assert!((h.omega2 - angle).abs() < 1e-9);
        assert!(h.omega1.abs() < 1e-7);
    }

    #[test]
    fn gamma_c_and_gamma_d_phases() {
        let hc = geometric_phase(&catalog::gamma_c(), 10_000).unwrap();
        let expect_c = Rotation::about_z(-PI / 2.0) * Rotation::about_x(-PI / 2.0);
        assert!(hc.rotation.frobenius_distance(&expect_c) < 1e-8);
        let hd = geometric_phase(&catalog::gamma_d(), 10_000).unwrap();
        let expect_d = Rotation::about_x(PI / 2.0) * Rotation::about_z(-PI / 2.0);
        assert!(hd.rotation.frobenius_distance(&expect_d) < 1e-8);
        assert!((hc.omega2 - PI / 2.0).abs() < 1e-9);
        assert!((hd.omega2 - PI / 2.0).abs() < 1e-9);
        assert!((hc.omega1 - PI / 2.0).abs() < 1e-9);
    }

    #[test]
    fn constant_loop_phase_is_identity() {
        let p = Vector3::new(0.0, 0.0, 0.5);
        let lp = Loop::from_fn("rest", move |_| p, |_| Vector3::zeros()).unwrap();
        let h = geometric_phase(&lp, 100).unwrap();
        assert!(h.rotation.frobenius_distance(&Rotation::identity()) < 1e-12);
        assert!(h.omega2.abs() < 1e-9);
    }

    #[test]
    fn decomposition_reconstructs_the_rotation() {
        for lp in [
            catalog::gamma_a(),
            catalog::gamma_c(),
            catalog::gamma_d(),
            catalog::fig3b(),
            catalog::circle(0.5, 0.5).unwrap(),
        ] {
            let h = geometric_phase(&lp, 4_000).unwrap();
            assert!(
                h.rotation.frobenius_distance(&h.reconstructed()) < 1e-9,
                "{}: residual {}",
                lp.label(),
                h.rotation.frobenius_distance(&h.reconstructed())
            );
            let cos = h.k.dot(&h.rotation.apply(&h.k)).clamp(-1.0, 1.0);
            assert!((h.omega2 - cos.acos()).abs() < 1e-12);
        }
    }

    #[test]
    fn open_projection_splits_into_transfer_and_twist() {
        let h = geometric_phase(&catalog::fig3b(), 4_000).unwrap();
        assert!((h.omega1 - PI / 3.0).abs() < 1e-6, "omega1 = {}", h.omega1);
        assert!(h.rotation.frobenius_distance(&h.reconstructed()) < 1e-9);
    }

    #[test]
    fn unliftable_loop_reports_kinks() {
        match geometric_phase(&catalog::fig3c(), 1_000) {
            Err(HolonomyError::NotLiftable(report)) => {
                assert_eq!(report.kinks.len(), 1);
            }
            other => panic!("expected NotLiftable, got {other:?}"),
        }
    }

    #[test]
    fn lift_projects_back_to_the_loop() {
        for lp in [catalog::gamma_a(), catalog::gamma_c(), catalog::circle(0.5, 0.5).unwrap()] {
            let psi0 = start_state(&lp);
            let lift = horizontal_lift(&lp, &psi0, 2_000).unwrap();
            for (t, state) in lift.times.iter().zip(&lift.states) {
                let drift = (bloch_vector(state).vector() - lp.eval(*t)).norm();
                assert!(drift < TOL_LIFT, "{}: drift {drift} at t = {t}", lp.label());
            }
        }
    }

    fn start_state(lp: &Loop) -> SpinState {
        default_start_state(lp).unwrap()
    }

    #[test]
    fn constant_loop_lifts_to_a_constant_state() {
        let p = Vector3::new(0.0, 0.0, 0.5);
        let lp = Loop::from_fn("rest", move |_| p, |_| Vector3::zeros()).unwrap();
        let psi0 = start_state(&lp);
        let lift = horizontal_lift(&lp, &psi0, 64).unwrap();
        for state in &lift.states {
            assert!(fubini_study_distance(state, &psi0) < 1e-9);
        }
    }

    #[test]
    fn lift_endpoint_obeys_the_phase() {
        for lp in [catalog::gamma_a(), catalog::gamma_c(), catalog::circle(0.4, 0.3).unwrap()] {
            let h = geometric_phase(&lp, 6_000).unwrap();
            let psi0 = start_state(&lp);
            let lift = horizontal_lift(&lp, &psi0, 6_000).unwrap();
            let predicted = psi0.transformed(&spin1_rep(&h.rotation));
            let gap = fubini_study_distance(lift.states.last().unwrap(), &predicted);
            assert!(gap < 1e-5, "{}: endpoint off by {gap}", lp.label());
        }
    }

    #[test]
    fn center_start_requires_a_transverse_axis() {
        let lp = catalog::gamma_c(); // leaves the center along ẑ
        // symmetry axis along ẑ is radial, not transverse
        let bad = state_from_chord(&Chord::new(0.0, Vector3::x(), Vector3::z()).unwrap());
        assert!(matches!(
            horizontal_lift(&lp, &bad, 1_000),
            Err(HolonomyError::InconsistentStart { .. })
        ));
    }

    #[test]
    fn rp2_route_agrees_with_the_segment_route() {
        for lp in [
            catalog::gamma_a(),
            catalog::gamma_c(),
            catalog::gamma_d(),
            catalog::fig3b(),
            catalog::circle(0.3, 0.4).unwrap(),
        ] {
            let h = geometric_phase(&lp, 6_000).unwrap();
            let alpha = crate::loops::project_to_rp2(&lp).unwrap();
            let v = vertical_displacement_rp2(&alpha, 6_000).unwrap();
            assert!(
                v.frobenius_distance(&h.rotation) < 1e-6,
                "{}: routes differ by {}",
                lp.label(),
                v.frobenius_distance(&h.rotation)
            );
        }
    }

    #[test]
    fn constant_projection_displaces_trivially() {
        let p = Vector3::new(0.0, 0.0, 0.5);
        let lp = Loop::from_fn("rest", move |_| p, |_| Vector3::zeros()).unwrap();
        let alpha = crate::loops::project_to_rp2(&lp).unwrap();
        let v = vertical_displacement_rp2(&alpha, 64).unwrap();
        assert!(v.frobenius_distance(&Rotation::identity()) < 1e-12);
    }

    #[test]
    fn greedy_oracle_matches_the_transport_lift() {
        let lp = catalog::circle(0.5, 0.5).unwrap();
        let psi0 = start_state(&lp);
        let ode = horizontal_lift(&lp, &psi0, 10_000).unwrap();
        let greedy = greedy_lift_oracle(&lp, &psi0, 10_000, 64).unwrap();
        let gap = fubini_study_distance(ode.states.last().unwrap(), greedy.states.last().unwrap());
        assert!(gap < 1e-3, "oracle endpoint gap {gap}");
    }

    #[test]
    fn greedy_length_meets_the_transport_length_in_the_limit() {
        // the greedy polygon minimizes every edge, so at finite sampling it
        // undercuts the transported polygon; the shortfall must vanish
        // under refinement
        let lp = catalog::circle(0.5, 0.5).unwrap();
        let psi0 = start_state(&lp);
        let deficit = |steps: usize| {
            let ode = horizontal_lift(&lp, &psi0, steps).unwrap();
            let greedy = greedy_lift_oracle(&lp, &psi0, steps, 64).unwrap();
            (ode.fs_length() - greedy.fs_length()).max(0.0)
        };
        let coarse = deficit(1_000);
        let fine = deficit(10_000);
        assert!(fine < coarse / 5.0, "shortfall not vanishing: {coarse} -> {fine}");
        assert!(fine < 5e-5, "shortfall too large at fine sampling: {fine}");
    }

    #[test]
    fn greedy_oracle_rejects_singular_loops() {
        let psi0 = start_state(&catalog::gamma_a());
        assert!(matches!(
            greedy_lift_oracle(&catalog::gamma_a(), &psi0, 100, 16),
            Err(HolonomyError::UnsupportedLoop { .. })
        ));
        let cap = catalog::cap(PI / 4.0).unwrap();
        let psi_cap = start_state(&cap);
        assert!(matches!(
            greedy_lift_oracle(&cap, &psi_cap, 100, 16),
            Err(HolonomyError::UnsupportedLoop { .. })
        ));
    }

    #[test]
    fn solid_angle_of_polar_cap() {
        let theta0 = PI / 3.0;
        let n = 8_192;
        let pts: Vec<Vector3<f64>> = (0..=n)
            .map(|k| {
                let phi = 2.0 * PI * k as f64 / n as f64;
                Vector3::new(theta0.sin() * phi.cos(), theta0.sin() * phi.sin(), theta0.cos())
            })
            .collect();
        let omega = solid_angle_oracle(&pts).unwrap();
        let expect = 2.0 * PI * (1.0 - theta0.cos());
        assert!((omega - expect).abs() < 1e-6, "omega = {omega}");
    }

    #[test]
    fn solid_angle_of_a_point_is_zero() {
        let pts = vec![Vector3::z(); 5];
        assert_eq!(solid_angle_oracle(&pts).unwrap(), 0.0);
    }

    #[test]
    fn solid_angle_rejects_antipodal_neighbors() {
        let pts = vec![Vector3::z(), -Vector3::z(), Vector3::x(), Vector3::z()];
        assert!(matches!(
            solid_angle_oracle(&pts),
            Err(HolonomyError::AmbiguousGeodesic { .. })
        ));
    }

    #[test]
    fn circle_phase_is_a_rotation_about_the_base_direction() {
        let lp = catalog::circle(0.5, 0.5).unwrap();
        let h = geometric_phase(&lp, 8_000).unwrap();
        let beta0 = lp.eval(0.0).normalize();
        let aa = h.rotation.axis_angle();
        let align = aa.axis.dot(&beta0).abs();
        assert!(align > 1.0 - 1e-9, "axis {:?} vs β(0) {:?}", aa.axis, beta0);
        // the rotation angle equals the enclosed solid angle of the
        // projected cap, mod 2π
        let n = 4_096;
        let pts: Vec<Vector3<f64>> =
            (0..=n).map(|k| lp.eval(k as f64 / n as f64).normalize()).collect();
        let omega = solid_angle_oracle(&pts).unwrap();
        let signed = if aa.axis.dot(&beta0) > 0.0 { aa.angle } else { -aa.angle };
        let gap = (signed.rem_euclid(2.0 * PI) - omega.rem_euclid(2.0 * PI)).abs();
        assert!(gap.min(2.0 * PI - gap) < 1e-5, "angle {signed} vs solid angle {omega}");
    }
}
