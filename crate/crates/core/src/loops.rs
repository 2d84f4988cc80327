//! Loops in the Bloch ball: evaluators, center-visit detection, liftability
//! analysis, zero-to-zero segmentation, and projection to the space of
//! diameters (RP²).
//!
//! A loop is a piecewise-differentiable closed path `γ : [0,1] → B`. Visits
//! to the center split it into segments whose radial projections `β_j`
//! extend continuously to the zeros via one-sided tangent limits; the
//! projections of consecutive segments meet antipodally there.

use std::sync::Arc;

use nalgebra::Vector3;

pub mod catalog;

/// Grid resolution used for zero scanning and construction-time checks.
const SCAN_GRID: usize = 4096;

/// Times closer than this to a zero endpoint evaluate `β` and `β̇` by their
/// one-sided limits instead of the ill-conditioned quotient `γ/|γ|`.
const ZERO_GUARD: f64 = 1e-10;

/// Loop-closure tolerance `|γ(0) − γ(1)|`.
pub const TOL_CLOSE: f64 = 1e-9;

/// Detection and regularity thresholds for center visits. All three are
/// overridable (see the CLI flags of the same names).
#[derive(Debug, Clone, Copy)]
pub struct LoopTolerances {
    /// `|γ| < tol_zero` counts as a center visit (ball-radius units).
    pub tol_zero: f64,
    /// Maximum angle between one-sided tangents at a zero (radians).
    pub tol_kink: f64,
    /// Minimum one-sided speed `|γ̇|` at a zero (per unit t).
    pub tol_speed: f64,
}

impl Default for LoopTolerances {
    fn default() -> Self {
        LoopTolerances { tol_zero: 1e-8, tol_kink: 1e-6, tol_speed: 1e-8 }
    }
}

#[derive(thiserror::Error, Debug, Clone)]
pub enum LoopError {
    #[error("loop is not closed: |γ(0) − γ(1)| = {gap:.3e}")]
    NotClosed { gap: f64 },
    #[error("loop leaves the unit ball at t = {t:.6} (|γ| = {norm:.9})")]
    OutsideBall { t: f64, norm: f64 },
    #[error("invalid loop data: {reason}")]
    BadData { reason: String },
    #[error("non-isolated zero: |γ| stays below tol_zero on [{t_start:.6}, {t_end:.6}]")]
    NonIsolatedZero { t_start: f64, t_end: f64 },
    #[error("loop is not liftable: {0}")]
    NotLiftable(LiftabilityReport),
    #[error("representative path is discontinuous at t = {t:.6} (gap {gap:.3e})")]
    DiscontinuousRepresentative { t: f64, gap: f64 },
}

/// Which one-sided limit to take at a parameter value.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Below,
    Above,
}

type CurveFn = Arc<dyn Fn(f64) -> Vector3<f64> + Send + Sync>;

struct Piece {
    t0: f64,
    t1: f64,
    f: CurveFn,
    df: CurveFn,
}

struct LoopInner {
    label: String,
    pieces: Vec<Piece>,
    tols: LoopTolerances,
}

/// A closed, piecewise-differentiable path in the closed unit ball.
///
/// Cheap to clone; evaluators are immutable after construction and safe to
/// share across threads.
#[derive(Clone)]
pub struct Loop(Arc<LoopInner>);

impl std::fmt::Debug for Loop {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Loop")
            .field("label", &self.0.label)
            .field("pieces", &self.0.pieces.len())
            .finish()
    }
}

/// Building block for piecewise loops.
#[derive(Debug, Clone)]
pub enum PathPrimitive {
    /// Straight segment between two points.
    Line { from: Vector3<f64>, to: Vector3<f64> },
    /// Circular arc: `start` swept about the line through `center` with
    /// direction `axis` by the signed `angle`.
    Arc { center: Vector3<f64>, axis: Vector3<f64>, start: Vector3<f64>, angle: f64 },
}

impl Loop {
    /// Loop from a single smooth parametrization with analytic derivative.
    pub fn from_fn<F, G>(label: &str, f: F, df: G) -> Result<Loop, LoopError>
    where
        F: Fn(f64) -> Vector3<f64> + Send + Sync + 'static,
        G: Fn(f64) -> Vector3<f64> + Send + Sync + 'static,
    {
        let piece = Piece { t0: 0.0, t1: 1.0, f: Arc::new(f), df: Arc::new(df) };
        Self::from_raw_pieces(label, vec![piece], LoopTolerances::default())
    }

    /// Loop from path primitives, each taking an equal share of `[0, 1]`.
    pub fn from_primitives(label: &str, prims: &[PathPrimitive]) -> Result<Loop, LoopError> {
        let weights = vec![1.0; prims.len()];
        Self::from_primitives_weighted(label, prims, &weights)
    }

    /// Loop from path primitives with parameter shares proportional to
    /// `weights`.
    pub fn from_primitives_weighted(
        label: &str,
        prims: &[PathPrimitive],
        weights: &[f64],
    ) -> Result<Loop, LoopError> {
        if prims.is_empty() {
            return Err(LoopError::BadData { reason: "no primitives".into() });
        }
        if prims.len() != weights.len() || weights.iter().any(|&w| !(w > 0.0)) {
            return Err(LoopError::BadData { reason: "weights must be positive, one per primitive".into() });
        }
        let total: f64 = weights.iter().sum();
        let mut pieces = Vec::with_capacity(prims.len());
        let mut t0 = 0.0;
        for (prim, &w) in prims.iter().zip(weights) {
            let t1 = if std::ptr::eq(prim, prims.last().unwrap()) { 1.0 } else { t0 + w / total };
            let width = t1 - t0;
            let (f, df): (CurveFn, CurveFn) = match prim.clone() {
                PathPrimitive::Line { from, to } => {
                    let dir = to - from;
                    let start = t0;
                    let d = dir / width;
                    (
                        Arc::new(move |t: f64| from + dir * ((t - start) / width)),
                        Arc::new(move |_t: f64| d),
                    )
                }
                PathPrimitive::Arc { center, axis, start, angle } => {
                    let n = axis.norm();
                    if n < 1e-12 {
                        return Err(LoopError::BadData { reason: "arc axis must be nonzero".into() });
                    }
                    let axis = axis / n;
                    let arm = start - center;
                    let piece_start = t0;
                    let rate = angle / width;
                    let f_axis = axis;
                    let f = move |t: f64| {
                        let phi = angle * (t - piece_start) / width;
                        let rot = crate::rotations::Rotation::from_axis_angle(&f_axis, phi)
                            .expect("unit axis");
                        center + rot.apply(&arm)
                    };
                    let df = move |t: f64| {
                        let phi = angle * (t - piece_start) / width;
                        let rot = crate::rotations::Rotation::from_axis_angle(&axis, phi)
                            .expect("unit axis");
                        axis.cross(&rot.apply(&arm)) * rate
                    };
                    (Arc::new(f) as CurveFn, Arc::new(df) as CurveFn)
                }
            };
            pieces.push(Piece { t0, t1, f, df });
            t0 = t1;
        }
        Self::from_raw_pieces(label, pieces, LoopTolerances::default())
    }

    /// Loop through sampled points, cubic-Hermite interpolated with
    /// centered-difference tangents (periodic across the seam, one-sided if
    /// the seam sits at the center).
    pub fn from_samples(label: &str, samples: &[(f64, Vector3<f64>)]) -> Result<Loop, LoopError> {
        if samples.len() < 4 {
            return Err(LoopError::BadData { reason: "need at least 4 samples".into() });
        }
        let times: Vec<f64> = samples.iter().map(|s| s.0).collect();
        let points: Vec<Vector3<f64>> = samples.iter().map(|s| s.1).collect();
        if times[0].abs() > 1e-12 || (times[times.len() - 1] - 1.0).abs() > 1e-12 {
            return Err(LoopError::BadData { reason: "sample times must start at 0 and end at 1".into() });
        }
        if times.windows(2).any(|w| w[1] <= w[0]) {
            return Err(LoopError::BadData { reason: "sample times must be strictly increasing".into() });
        }
        let gap = (points[0] - points[points.len() - 1]).norm();
        if gap > TOL_CLOSE {
            return Err(LoopError::NotClosed { gap });
        }
        let k = points.len();
        let mut tangents = vec![Vector3::zeros(); k];
        for i in 1..k - 1 {
            tangents[i] = (points[i + 1] - points[i - 1]) / (times[i + 1] - times[i - 1]);
        }
        let tols = LoopTolerances::default();
        if points[0].norm() < tols.tol_zero {
            // seam at the center: tangents are one-sided (second order) so a
            // genuine corner there is preserved rather than smoothed away
            tangents[0] = one_sided_tangent(
                times[0], points[0], times[1], points[1], times[2], points[2],
            );
            tangents[k - 1] = one_sided_tangent(
                times[k - 1], points[k - 1], times[k - 2], points[k - 2], times[k - 3],
                points[k - 3],
            );
        } else {
            let wrap = (times[1] - times[0]) + (times[k - 1] - times[k - 2]);
            let m = (points[1] - points[k - 2]) / wrap;
            tangents[0] = m;
            tangents[k - 1] = m;
        }
        let spline = Arc::new(Hermite { times, points, tangents });
        let s1 = spline.clone();
        let s2 = spline.clone();
        let piece = Piece {
            t0: 0.0,
            t1: 1.0,
            f: Arc::new(move |t| s1.eval(t)),
            df: Arc::new(move |t| s2.deriv(t)),
        };
        Self::from_raw_pieces(label, vec![piece], tols)
    }

    fn from_raw_pieces(
        label: &str,
        pieces: Vec<Piece>,
        tols: LoopTolerances,
    ) -> Result<Loop, LoopError> {
        let inner = LoopInner { label: label.to_string(), pieces, tols };
        let lp = Loop(Arc::new(inner));
        let gap = (lp.eval(0.0) - lp.eval(1.0)).norm();
        if gap > TOL_CLOSE {
            return Err(LoopError::NotClosed { gap });
        }
        for k in 0..=SCAN_GRID {
            let t = k as f64 / SCAN_GRID as f64;
            let norm = lp.eval(t).norm();
            if norm > 1.0 + 1e-9 {
                return Err(LoopError::OutsideBall { t, norm });
            }
        }
        // piece joints must be continuous
        for w in lp.0.pieces.windows(2) {
            let gap = ((w[0].f)(w[0].t1) - (w[1].f)(w[1].t0)).norm();
            if gap > TOL_CLOSE {
                return Err(LoopError::BadData {
                    reason: format!("pieces disagree at t = {:.6} by {:.3e}", w[0].t1, gap),
                });
            }
        }
        Ok(lp)
    }

    /// Replaces the zero-detection tolerances.
    pub fn with_tolerances(&self, tols: LoopTolerances) -> Loop {
        let inner = LoopInner {
            label: self.0.label.clone(),
            pieces: self
                .0
                .pieces
                .iter()
                .map(|p| Piece { t0: p.t0, t1: p.t1, f: p.f.clone(), df: p.df.clone() })
                .collect(),
            tols,
        };
        Loop(Arc::new(inner))
    }

    pub fn label(&self) -> &str {
        &self.0.label
    }

    pub fn tolerances(&self) -> LoopTolerances {
        self.0.tols
    }

    fn piece_index(&self, t: f64, side: Side) -> usize {
        let pieces = &self.0.pieces;
        match side {
            Side::Above => {
                for (i, p) in pieces.iter().enumerate() {
                    if t < p.t1 || i == pieces.len() - 1 {
                        if t >= p.t0 - 1e-15 {
                            return i;
                        }
                    }
                }
                0
            }
            Side::Below => {
                for (i, p) in pieces.iter().enumerate().rev() {
                    if t > p.t0 || i == 0 {
                        if t <= p.t1 + 1e-15 {
                            return i;
                        }
                    }
                }
                pieces.len() - 1
            }
        }
    }

    pub fn eval(&self, t: f64) -> Vector3<f64> {
        let p = &self.0.pieces[self.piece_index(t, Side::Above)];
        (p.f)(t.clamp(p.t0, p.t1))
    }

    /// Derivative taking the right-hand piece at joints.
    pub fn deriv(&self, t: f64) -> Vector3<f64> {
        self.deriv_sided(t, Side::Above)
    }

    /// One-sided derivative; evaluates the adjacent piece's closed form, so
    /// it is exact at joints.
    pub fn deriv_sided(&self, t: f64, side: Side) -> Vector3<f64> {
        let p = &self.0.pieces[self.piece_index(t, side)];
        (p.df)(t.clamp(p.t0, p.t1))
    }

    /// Interior parameter values where the derivative may jump.
    pub fn breakpoints(&self) -> Vec<f64> {
        self.0.pieces[..self.0.pieces.len() - 1].iter().map(|p| p.t1).collect()
    }
}

struct Hermite {
    times: Vec<f64>,
    points: Vec<Vector3<f64>>,
    tangents: Vec<Vector3<f64>>,
}

impl Hermite {
    fn interval(&self, t: f64) -> usize {
        let t = t.clamp(0.0, 1.0);
        match self.times.binary_search_by(|x| x.partial_cmp(&t).unwrap()) {
            Ok(i) => i.min(self.times.len() - 2),
            Err(i) => i.saturating_sub(1).min(self.times.len() - 2),
        }
    }

    fn eval(&self, t: f64) -> Vector3<f64> {
        let i = self.interval(t);
        let h = self.times[i + 1] - self.times[i];
        let s = ((t - self.times[i]) / h).clamp(0.0, 1.0);
        let (s2, s3) = (s * s, s * s * s);
        self.points[i] * (2.0 * s3 - 3.0 * s2 + 1.0)
            + self.tangents[i] * (h * (s3 - 2.0 * s2 + s))
            + self.points[i + 1] * (-2.0 * s3 + 3.0 * s2)
            + self.tangents[i + 1] * (h * (s3 - s2))
    }

    fn deriv(&self, t: f64) -> Vector3<f64> {
        let i = self.interval(t);
        let h = self.times[i + 1] - self.times[i];
        let s = ((t - self.times[i]) / h).clamp(0.0, 1.0);
        let s2 = s * s;
        self.points[i] * ((6.0 * s2 - 6.0 * s) / h)
            + self.tangents[i] * (3.0 * s2 - 4.0 * s + 1.0)
            + self.points[i + 1] * ((-6.0 * s2 + 6.0 * s) / h)
            + self.tangents[i + 1] * (3.0 * s2 - 2.0 * s)
    }
}

/// The ordered center-visit times of a loop, with the endpoints `0` and `1`
/// always included.
#[derive(Debug, Clone)]
pub struct ZeroSet {
    times: Vec<f64>,
    starts_at_center: bool,
}

impl ZeroSet {
    /// All entries `a₀ = 0 < a₁ < … < a_{n+1} = 1`.
    pub fn times(&self) -> &[f64] {
        &self.times
    }

    /// The interior zeros `a₁ … a_n`.
    pub fn interior(&self) -> &[f64] {
        &self.times[1..self.times.len() - 1]
    }

    /// Whether `γ(0) = γ(1)` is itself a center visit.
    pub fn starts_at_center(&self) -> bool {
        self.starts_at_center
    }
}

/// Locates the center visits of a loop.
///
/// Interior zeros are bracketed on the derivative of `|γ|²` (they are
/// tangential minima, not sign changes) after a quadratic fit through the
/// flagged grid samples, and accepted when `|γ(t*)| < tol_zero`. A stretch
/// of parameter values pinned to the center violates the isolated-zeros
/// assumption and is an error.
pub fn find_zeros(lp: &Loop) -> Result<ZeroSet, LoopError> {
    let tols = lp.tolerances();
    let n = SCAN_GRID;
    let dt = 1.0 / n as f64;
    let m: Vec<f64> = (0..=n).map(|k| lp.eval(k as f64 * dt).norm_squared()).collect();

    // non-isolated zeros: a run of consecutive grid samples at the center
    let mut run_start: Option<usize> = None;
    for k in 0..=n {
        if m[k] < tols.tol_zero * tols.tol_zero {
            if run_start.is_none() {
                run_start = Some(k);
            }
            let start = run_start.unwrap();
            if (k - start) >= 2 && (k - start) as f64 * dt > 1e-4 {
                return Err(LoopError::NonIsolatedZero {
                    t_start: start as f64 * dt,
                    t_end: k as f64 * dt,
                });
            }
        } else {
            run_start = None;
        }
    }

    let max_speed = (0..=n)
        .map(|k| lp.deriv(k as f64 * dt).norm())
        .fold(0.0f64, f64::max)
        .max(1e-6);
    let detect = (2.0 * max_speed * dt).powi(2).max(4.0 * tols.tol_zero * tols.tol_zero);

    let mderiv = |t: f64| 2.0 * lp.eval(t).dot(&lp.deriv(t));

    let mut zeros: Vec<f64> = Vec::new();
    for k in 1..n {
        if m[k] < detect && m[k] <= m[k - 1] && m[k] <= m[k + 1] {
            let (ta, tb, tc) = ((k - 1) as f64 * dt, k as f64 * dt, (k + 1) as f64 * dt);
            // quadratic fit vertex as the initial guess
            let denom = (m[k - 1] - 2.0 * m[k] + m[k + 1]).max(1e-300);
            let vertex = tb + 0.5 * dt * (m[k - 1] - m[k + 1]) / denom;
            let guess = vertex.clamp(ta, tc);
            // bracket the minimum on d|γ|²/dt
            let (mut lo, mut hi) = (guess - dt, guess + dt);
            lo = lo.max(1e-12);
            hi = hi.min(1.0 - 1e-12);
            let mut widen = 0;
            while mderiv(lo) > 0.0 && widen < 3 && lo > 1e-12 {
                lo = (lo - dt).max(1e-12);
                widen += 1;
            }
            widen = 0;
            while mderiv(hi) < 0.0 && widen < 3 && hi < 1.0 - 1e-12 {
                hi = (hi + dt).min(1.0 - 1e-12);
                widen += 1;
            }
            if mderiv(lo) > 0.0 || mderiv(hi) < 0.0 {
                continue; // no interior minimum here
            }
            for _ in 0..80 {
                let mid = 0.5 * (lo + hi);
                if mderiv(mid) < 0.0 {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            let t_star = 0.5 * (lo + hi);
            if lp.eval(t_star).norm() < tols.tol_zero
                && t_star > 1e-9
                && t_star < 1.0 - 1e-9
                && zeros.iter().all(|&z| (z - t_star).abs() > 1e-9)
            {
                zeros.push(t_star);
            }
        }
    }
    zeros.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let mut times = Vec::with_capacity(zeros.len() + 2);
    times.push(0.0);
    times.extend(zeros);
    times.push(1.0);
    Ok(ZeroSet { times, starts_at_center: m[0].sqrt() < tols.tol_zero })
}

/// One offending center visit found by [`check_liftable`].
#[derive(Debug, Clone, Copy)]
pub struct KinkReport {
    pub t: f64,
    /// Angle between the incoming and outgoing tangents (radians).
    pub angle: f64,
}

/// Outcome of the liftability analysis.
#[derive(Debug, Clone)]
pub struct LiftabilityReport {
    pub liftable: bool,
    /// Interior zeros where the tangent direction jumps.
    pub kinks: Vec<KinkReport>,
    /// Zeros where the one-sided speed drops below `tol_speed`.
    pub stalls: Vec<f64>,
    pub zeros: ZeroSet,
}

impl std::fmt::Display for LiftabilityReport {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        if self.liftable {
            return write!(f, "liftable");
        }
        let kinks: Vec<String> = self
            .kinks
            .iter()
            .map(|k| format!("t = {:.6} (angle {:.3e} rad)", k.t, k.angle))
            .collect();
        let stalls: Vec<String> = self.stalls.iter().map(|t| format!("t = {:.6}", t)).collect();
        write!(f, "kinks at center: [{}]; stalls: [{}]", kinks.join(", "), stalls.join(", "))
    }
}

/// Checks that the loop is differentiable at every center visit, so that a
/// horizontal lift exists.
pub fn check_liftable(lp: &Loop) -> Result<LiftabilityReport, LoopError> {
    let zeros = find_zeros(lp)?;
    let tols = lp.tolerances();
    let mut kinks = Vec::new();
    let mut stalls = Vec::new();
    for &t in zeros.interior() {
        let d_in = lp.deriv_sided(t, Side::Below);
        let d_out = lp.deriv_sided(t, Side::Above);
        if d_in.norm() < tols.tol_speed || d_out.norm() < tols.tol_speed {
            stalls.push(t);
            continue;
        }
        let cosang = (d_in.dot(&d_out) / (d_in.norm() * d_out.norm())).clamp(-1.0, 1.0);
        let angle = cosang.acos();
        if angle > tols.tol_kink {
            kinks.push(KinkReport { t, angle });
        }
    }
    if zeros.starts_at_center() {
        // at the seam only one-sided differentiability is required
        if lp.deriv_sided(0.0, Side::Above).norm() < tols.tol_speed {
            stalls.push(0.0);
        }
        if lp.deriv_sided(1.0, Side::Below).norm() < tols.tol_speed {
            stalls.push(1.0);
        }
    }
    let liftable = kinks.is_empty() && stalls.is_empty();
    Ok(LiftabilityReport { liftable, kinks, stalls, zeros })
}

/// One zero-to-zero piece of a loop together with the spherical closure
/// `β_j` of its radial projection.
#[derive(Clone)]
pub struct Segment {
    lp: Loop,
    index: usize,
    t0: f64,
    t1: f64,
    starts_at_zero: bool,
    ends_at_zero: bool,
    beta_start: Vector3<f64>,
    beta_end: Vector3<f64>,
}

impl std::fmt::Debug for Segment {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Segment")
            .field("index", &self.index)
            .field("domain", &(self.t0, self.t1))
            .finish()
    }
}

impl Segment {
    /// 1-based position within the loop's segment list.
    pub fn index(&self) -> usize {
        self.index
    }

    pub fn domain(&self) -> (f64, f64) {
        (self.t0, self.t1)
    }

    pub fn starts_at_zero(&self) -> bool {
        self.starts_at_zero
    }

    pub fn ends_at_zero(&self) -> bool {
        self.ends_at_zero
    }

    /// `β` at the segment start (a one-sided tangent limit at a zero).
    pub fn beta_start(&self) -> Vector3<f64> {
        self.beta_start
    }

    pub fn beta_end(&self) -> Vector3<f64> {
        self.beta_end
    }

    /// `|γ(t)|`, the radial coordinate along the segment.
    pub fn radius(&self, t: f64) -> f64 {
        self.lp.eval(t).norm()
    }

    pub fn loop_ref(&self) -> &Loop {
        &self.lp
    }

    /// Derivative discontinuities strictly inside the segment.
    pub fn interior_breakpoints(&self) -> Vec<f64> {
        self.lp
            .breakpoints()
            .into_iter()
            .filter(|&b| b > self.t0 + 1e-12 && b < self.t1 - 1e-12)
            .collect()
    }

    /// The spherical projection `γ/|γ|`, closed by tangent limits at zeros.
    pub fn beta(&self, t: f64) -> Vector3<f64> {
        if self.starts_at_zero && t - self.t0 < ZERO_GUARD {
            return self.beta_start;
        }
        if self.ends_at_zero && self.t1 - t < ZERO_GUARD {
            return self.beta_end;
        }
        let g = self.lp.eval(t);
        let norm = g.norm();
        if norm < ZERO_GUARD {
            // interior zeros never occur inside a segment; this is roundoff
            // at a guarded endpoint
            if (t - self.t0).abs() < (self.t1 - t).abs() {
                return self.beta_start;
            }
            return self.beta_end;
        }
        g / norm
    }

    /// `dβ/dt`. Finite at the zeros: there it evaluates the curvature-based
    /// limit `±(I − ββᵀ) γ̈ / (2|γ̇|)` instead of the 0/0 quotient.
    pub fn beta_dot(&self, t: f64) -> Vector3<f64> {
        let side = if t >= self.t1 - 1e-15 { Side::Below } else { Side::Above };
        self.beta_dot_sided(t, side)
    }

    /// One-sided `dβ/dt`, exact at the loop's derivative breakpoints.
    pub fn beta_dot_sided(&self, t: f64, side: Side) -> Vector3<f64> {
        let at_start = self.starts_at_zero && t - self.t0 < ZERO_GUARD;
        let at_end = self.ends_at_zero && self.t1 - t < ZERO_GUARD;
        if at_start || at_end {
            let (tz, limit_side, sign, beta) = if at_start {
                (self.t0, Side::Above, 1.0, self.beta_start)
            } else {
                (self.t1, Side::Below, -1.0, self.beta_end)
            };
            let h = 1e-6;
            let g1 = self.lp.deriv_sided(tz, limit_side);
            let t2 = if at_start { tz + h } else { tz - h };
            let g2 = self.lp.deriv_sided(t2, limit_side);
            let gdd = (g2 - g1) / (t2 - tz);
            let transverse = gdd - beta * beta.dot(&gdd);
            return transverse * (sign / (2.0 * g1.norm()));
        }
        let g = self.lp.eval(t);
        let gd = self.lp.deriv_sided(t, side);
        let norm = g.norm();
        let beta = g / norm;
        (gd - beta * beta.dot(&gd)) / norm
    }
}

/// Splits a liftable loop at its zeros and attaches the spherical closures.
pub fn segment_loop(lp: &Loop, zeros: &ZeroSet) -> Result<Vec<Segment>, LoopError> {
    let report = check_liftable(lp)?;
    if !report.liftable {
        return Err(LoopError::NotLiftable(report));
    }
    let times = zeros.times();
    let mut segments = Vec::with_capacity(times.len() - 1);
    for j in 0..times.len() - 1 {
        let (t0, t1) = (times[j], times[j + 1]);
        let starts_at_zero = if j == 0 { zeros.starts_at_center() } else { true };
        let ends_at_zero = if j == times.len() - 2 { zeros.starts_at_center() } else { true };
        let beta_start = if starts_at_zero {
            lp.deriv_sided(t0, Side::Above).normalize()
        } else {
            lp.eval(t0).normalize()
        };
        let beta_end = if ends_at_zero {
            -lp.deriv_sided(t1, Side::Below).normalize()
        } else {
            lp.eval(t1).normalize()
        };
        segments.push(Segment {
            lp: lp.clone(),
            index: j + 1,
            t0,
            t1,
            starts_at_zero,
            ends_at_zero,
            beta_start,
            beta_end,
        });
    }
    Ok(segments)
}

/// The projection of a liftable loop to the space of diameters: the chain
/// of spherical closures `β_j` together with the antipodal flips recorded
/// at each interior zero.
#[derive(Debug, Clone)]
pub struct Rp2Path {
    segments: Vec<Segment>,
    flips: Vec<f64>,
    closed: bool,
}

impl Rp2Path {
    pub fn segments(&self) -> &[Segment] {
        &self.segments
    }

    /// Interior zeros where the representative flips by exact antipode.
    pub fn flips(&self) -> &[f64] {
        &self.flips
    }

    /// Whether the endpoint directions agree up to sign.
    pub fn closed(&self) -> bool {
        self.closed
    }

    /// The per-arc representative; discontinuous (antipodal) at flips.
    pub fn representative(&self, t: f64) -> Vector3<f64> {
        let seg = self.segment_at(t);
        seg.beta(t)
    }

    /// A globally continuous representative: the `β` chain with each flip
    /// compensated by a sign so that the path is continuous on `[0, 1]`.
    pub fn chained(&self, t: f64) -> Vector3<f64> {
        let idx = self
            .segments
            .iter()
            .position(|s| t < s.t1 || s.index == self.segments.len())
            .unwrap_or(self.segments.len() - 1);
        let sign = if idx % 2 == 0 { 1.0 } else { -1.0 };
        self.segments[idx].beta(t) * sign
    }

    pub(crate) fn chained_velocity_sided(&self, t: f64, side: Side) -> Vector3<f64> {
        // pick the segment whose closed domain contains t on the given side
        let idx = match side {
            Side::Above => self
                .segments
                .iter()
                .position(|s| t < s.t1 || s.index == self.segments.len())
                .unwrap_or(self.segments.len() - 1),
            Side::Below => self
                .segments
                .iter()
                .rposition(|s| t > s.t0 || s.index == 1)
                .unwrap_or(0),
        };
        let sign = if idx % 2 == 0 { 1.0 } else { -1.0 };
        self.segments[idx].beta_dot_sided(t, side) * sign
    }

    fn segment_at(&self, t: f64) -> &Segment {
        self.segments
            .iter()
            .find(|s| t < s.t1 || s.index == self.segments.len())
            .unwrap_or(&self.segments[self.segments.len() - 1])
    }

    /// Representative of the path's start.
    pub fn start(&self) -> Vector3<f64> {
        self.segments[0].beta_start
    }

    /// Representative of the path's end, continued through the flips.
    pub fn chained_end(&self) -> Vector3<f64> {
        let last = &self.segments[self.segments.len() - 1];
        let sign = if (self.segments.len() - 1) % 2 == 0 { 1.0 } else { -1.0 };
        last.beta_end * sign
    }
}

/// Projects a liftable loop to a continuous path of diameters.
pub fn project_to_rp2(lp: &Loop) -> Result<Rp2Path, LoopError> {
    let zeros = find_zeros(lp)?;
    let segments = segment_loop(lp, &zeros)?;
    for w in segments.windows(2) {
        let gap = (w[1].beta_start + w[0].beta_end).norm();
        if gap > 1e-8 {
            return Err(LoopError::DiscontinuousRepresentative { t: w[0].t1, gap });
        }
    }
    let start = segments[0].beta_start;
    let end = segments[segments.len() - 1].beta_end;
    let closed = 1.0 - start.dot(&end).abs() < 1e-9;
    Ok(Rp2Path { flips: zeros.interior().to_vec(), segments, closed })
}
