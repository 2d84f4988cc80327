//! Built-in loop catalog.
//!
//! The four named center-based loops, planar circles, boundary caps, and
//! the two reference shapes used by the liftability tests. All angles are
//! radians and all coordinates are ball-radius units.

use std::f64::consts::PI;

use nalgebra::Vector3;

use super::{Loop, LoopError, PathPrimitive};
use crate::rotations::Rotation;

/// Catalog entry metadata, for listings and the CLI.
#[derive(Debug, Clone, Copy)]
pub struct CatalogEntry {
    pub name: &'static str,
    pub description: &'static str,
}

pub fn entries() -> Vec<CatalogEntry> {
    vec![
        CatalogEntry {
            name: "gamma_a",
            description: "center-based cone loop: r(t) = sin(2πt), polar angle π/6, azimuth −2πt",
        },
        CatalogEntry {
            name: "gamma_b",
            description: "gamma_a rotated by π/2 about z",
        },
        CatalogEntry {
            name: "gamma_c",
            description: "radial out to z, quarter arcs z→y and y→x, radial in from x",
        },
        CatalogEntry {
            name: "gamma_d",
            description: "radial out to −x, quarter arcs −x→y and y→z, radial in from z",
        },
        CatalogEntry {
            name: "circle(rho,h)",
            description: "planar circle of radius rho at height h, counterclockwise from +z",
        },
        CatalogEntry {
            name: "cap(theta0)",
            description: "boundary circle at colatitude theta0, counterclockwise from +z",
        },
        CatalogEntry {
            name: "fig3b",
            description: "teardrop through the center; liftable, open projection",
        },
        CatalogEntry {
            name: "fig3c",
            description: "two circular lobes meeting at the center with a corner; not liftable",
        },
    ]
}

/// Cone loop based at the center: signed radius `sin(2πt)` at fixed polar
/// angle `π/6` and azimuth `−2πt`. Visits the center at `t = 0, 1/2, 1`
/// and touches the boundary at `t = 1/4, 3/4`.
pub fn gamma_a() -> Loop {
    let w = |t: f64| {
        Vector3::new(0.5 * (2.0 * PI * t).cos(), -0.5 * (2.0 * PI * t).sin(), 3.0f64.sqrt() / 2.0)
    };
    let wd = |t: f64| {
        Vector3::new(-PI * (2.0 * PI * t).sin(), -PI * (2.0 * PI * t).cos(), 0.0)
    };
    Loop::from_fn(
        "gamma_a",
        move |t| w(t) * (2.0 * PI * t).sin(),
        move |t| w(t) * (2.0 * PI * (2.0 * PI * t).cos()) + wd(t) * (2.0 * PI * t).sin(),
    )
    .expect("gamma_a is a valid loop")
}

/// `gamma_a` rotated by `π/2` about the z axis.
pub fn gamma_b() -> Loop {
    let q = Rotation::about_z(PI / 2.0);
    let base = gamma_a();
    let b2 = base.clone();
    Loop::from_fn(
        "gamma_b",
        move |t| q.apply(&base.eval(t)),
        move |t| q.apply(&b2.deriv(t)),
    )
    .expect("gamma_b is a valid loop")
}

/// Center-based square-ish loop: radial to `(0,0,1/2)`, quarter arc to
/// `(0,1/2,0)`, quarter arc to `(1/2,0,0)`, radial back to the center.
pub fn gamma_c() -> Loop {
    let z = Vector3::new(0.0, 0.0, 0.5);
    let y = Vector3::new(0.0, 0.5, 0.0);
    let x = Vector3::new(0.5, 0.0, 0.0);
    Loop::from_primitives(
        "gamma_c",
        &[
            PathPrimitive::Line { from: Vector3::zeros(), to: z },
            PathPrimitive::Arc {
                center: Vector3::zeros(),
                axis: -Vector3::x(),
                start: z,
                angle: PI / 2.0,
            },
            PathPrimitive::Arc {
                center: Vector3::zeros(),
                axis: -Vector3::z(),
                start: y,
                angle: PI / 2.0,
            },
            PathPrimitive::Line { from: x, to: Vector3::zeros() },
        ],
    )
    .expect("gamma_c is a valid loop")
}

/// Center-based companion to `gamma_c`: radial to `(−1/2,0,0)`, quarter arc
/// to `(0,1/2,0)` in the equatorial plane, quarter arc to `(0,0,1/2)`,
/// radial back to the center.
pub fn gamma_d() -> Loop {
    let mx = Vector3::new(-0.5, 0.0, 0.0);
    let y = Vector3::new(0.0, 0.5, 0.0);
    let z = Vector3::new(0.0, 0.0, 0.5);
    Loop::from_primitives(
        "gamma_d",
        &[
            PathPrimitive::Line { from: Vector3::zeros(), to: mx },
            PathPrimitive::Arc {
                center: Vector3::zeros(),
                axis: -Vector3::z(),
                start: mx,
                angle: PI / 2.0,
            },
            PathPrimitive::Arc {
                center: Vector3::zeros(),
                axis: Vector3::x(),
                start: y,
                angle: PI / 2.0,
            },
            PathPrimitive::Line { from: z, to: Vector3::zeros() },
        ],
    )
    .expect("gamma_d is a valid loop")
}

/// Planar circle of radius `rho` at height `h`, traversed counterclockwise
/// when viewed from `+z`. Requires `rho² + h² ≤ 1` and `rho > 0`.
pub fn circle(rho: f64, h: f64) -> Result<Loop, LoopError> {
    if rho <= 0.0 {
        return Err(LoopError::BadData { reason: format!("circle radius must be positive (got {rho})") });
    }
    if rho * rho + h * h > 1.0 + 1e-9 {
        return Err(LoopError::OutsideBall { t: 0.0, norm: (rho * rho + h * h).sqrt() });
    }
    Loop::from_fn(
        &format!("circle({rho},{h})"),
        move |t| Vector3::new(rho * (2.0 * PI * t).cos(), rho * (2.0 * PI * t).sin(), h),
        move |t| {
            Vector3::new(
                -2.0 * PI * rho * (2.0 * PI * t).sin(),
                2.0 * PI * rho * (2.0 * PI * t).cos(),
                0.0,
            )
        },
    )
}

/// Boundary circle at colatitude `theta0`, counterclockwise from `+z`.
/// Lies entirely on the sphere `|γ| = 1`.
pub fn cap(theta0: f64) -> Result<Loop, LoopError> {
    if !(0.0..PI).contains(&theta0) || theta0 < 1e-9 {
        return Err(LoopError::BadData {
            reason: format!("cap colatitude must lie in (0, π) (got {theta0})"),
        });
    }
    let (s, c) = theta0.sin_cos();
    Loop::from_fn(
        &format!("cap({theta0})"),
        move |t| Vector3::new(s * (2.0 * PI * t).cos(), s * (2.0 * PI * t).sin(), c),
        move |t| {
            Vector3::new(-2.0 * PI * s * (2.0 * PI * t).sin(), 2.0 * PI * s * (2.0 * PI * t).cos(), 0.0)
        },
    )
}

/// Teardrop based at the center: `γ(t) = ½ sin(πt) (cos(χt), sin(χt), 0)`
/// with `χ = π/3`. Liftable, but the outgoing and incoming tangents differ,
/// so its projection to the space of diameters is an open path.
pub fn fig3b() -> Loop {
    let chi = PI / 3.0;
    Loop::from_fn(
        "fig3b",
        move |t| {
            Vector3::new((chi * t).cos(), (chi * t).sin(), 0.0) * (0.5 * (PI * t).sin())
        },
        move |t| {
            let dir = Vector3::new((chi * t).cos(), (chi * t).sin(), 0.0);
            let ddir = Vector3::new(-(chi * t).sin(), (chi * t).cos(), 0.0) * chi;
            dir * (0.5 * PI * (PI * t).cos()) + ddir * (0.5 * (PI * t).sin())
        },
    )
    .expect("fig3b is a valid loop")
}

/// Two circular lobes meeting at the center, the second rotated by `2π/3`
/// about `z`, so the tangents at the interior center visit disagree. Not
/// liftable.
pub fn fig3c() -> Loop {
    let c1 = Vector3::new(0.25, 0.0, 0.0);
    let q = Rotation::about_z(2.0 * PI / 3.0);
    let c2 = q.apply(&c1);
    Loop::from_primitives(
        "fig3c",
        &[
            PathPrimitive::Arc {
                center: c1,
                axis: Vector3::z(),
                start: Vector3::zeros(),
                angle: 2.0 * PI,
            },
            PathPrimitive::Arc {
                center: c2,
                axis: Vector3::z(),
                start: Vector3::zeros(),
                angle: 2.0 * PI,
            },
        ],
    )
    .expect("fig3c is a valid loop")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gamma_a_matches_its_spherical_form() {
        let lp = gamma_a();
        for k in 0..=32 {
            let t = k as f64 / 32.0;
            let r = (2.0 * PI * t).sin();
            let expect = Vector3::new(
                r * (PI / 6.0).sin() * (2.0 * PI * t).cos(),
                -r * (PI / 6.0).sin() * (2.0 * PI * t).sin(),
                r * (PI / 6.0).cos(),
            );
            assert!((lp.eval(t) - expect).norm() < 1e-14);
        }
    }

    #[test]
    fn gamma_c_matches_its_piecewise_form() {
        let lp = gamma_c();
        let cases = [
            (0.1, Vector3::new(0.0, 0.0, 0.2)),
            (0.3, Vector3::new(0.0, 0.5 * (2.0 * PI * 0.05).sin(), 0.5 * (2.0 * PI * 0.05).cos())),
            (0.6, Vector3::new(0.5 * (2.0 * PI * 0.1).sin(), 0.5 * (2.0 * PI * 0.1).cos(), 0.0)),
            (0.9, Vector3::new(0.2, 0.0, 0.0)),
        ];
        for (t, expect) in cases {
            assert!((lp.eval(t) - expect).norm() < 1e-12, "t = {t}: {:?}", lp.eval(t));
        }
    }

    #[test]
    fn derivative_matches_finite_difference() {
        let h = 1e-7;
        for lp in [gamma_a(), gamma_b(), gamma_c(), gamma_d(), fig3b(), circle(0.4, 0.2).unwrap()]
        {
            for k in 1..40 {
                let t = k as f64 / 40.0 + 0.003; // avoid joints
                if t >= 1.0 {
                    continue;
                }
                let fd = (lp.eval(t + h) - lp.eval(t - h)) / (2.0 * h);
                let an = lp.deriv(t);
                assert!(
                    (fd - an).norm() < 1e-5 * (1.0 + an.norm()),
                    "{} at t = {t}: fd {fd:?} vs analytic {an:?}",
                    lp.label()
                );
            }
        }
    }

    #[test]
    fn circle_rejects_bad_parameters() {
        assert!(circle(0.0, 0.5).is_err());
        assert!(circle(0.9, 0.9).is_err());
    }

    #[test]
    fn cap_lies_on_the_boundary() {
        let lp = cap(PI / 3.0).unwrap();
        for k in 0..=16 {
            let t = k as f64 / 16.0;
            assert!((lp.eval(t).norm() - 1.0).abs() < 1e-12);
        }
    }
}
