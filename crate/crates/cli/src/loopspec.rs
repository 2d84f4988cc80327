//! Loop specification documents and the name shorthand.
//!
//! A loop is requested either by catalog name — `gamma_a`, `circle(0.5,0.5)`,
//! `cap(0.7)` — or by a JSON document:
//!
//! ```json
//! {"spec_version": 1, "type": "builtin", "name": "circle", "rho": 0.5, "h": 0.5}
//! {"spec_version": 1, "type": "samples", "closed": true, "samples": [[0.0, 0.5, 0.0, 0.1], ...]}
//! {"spec_version": 1, "type": "piecewise", "pieces": [
//!     {"kind": "line", "from": [0,0,0], "to": [0,0,0.5]},
//!     {"kind": "arc", "center": [0,0,0], "axis": [-1,0,0], "start": [0,0,0.5], "angle": 1.5707963}
//! ]}
//! ```

use bloch_holonomy::loops::{catalog, Loop, PathPrimitive};
use nalgebra::Vector3;
use serde::Deserialize;

use crate::CliError;

fn default_spec_version() -> u32 {
    1
}

fn default_closed() -> bool {
    true
}

fn default_weight() -> f64 {
    1.0
}

#[derive(Debug, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum LoopSpecBody {
    Builtin {
        name: String,
        rho: Option<f64>,
        h: Option<f64>,
        theta0: Option<f64>,
    },
    Samples {
        #[serde(default = "default_closed")]
        closed: bool,
        samples: Vec<[f64; 4]>,
    },
    Piecewise {
        pieces: Vec<PieceSpec>,
    },
}

#[derive(Debug, Deserialize)]
pub struct LoopSpec {
    #[serde(default = "default_spec_version")]
    pub spec_version: u32,
    #[serde(flatten)]
    pub body: LoopSpecBody,
}

#[derive(Debug, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum PieceSpec {
    Line {
        from: [f64; 3],
        to: [f64; 3],
        #[serde(default = "default_weight")]
        weight: f64,
    },
    Arc {
        center: [f64; 3],
        axis: [f64; 3],
        start: [f64; 3],
        angle: f64,
        #[serde(default = "default_weight")]
        weight: f64,
    },
}

fn vec3(a: &[f64; 3]) -> Vector3<f64> {
    Vector3::new(a[0], a[1], a[2])
}

fn catalog_listing() -> String {
    catalog::entries().iter().map(|e| e.name).collect::<Vec<_>>().join(", ")
}

/// Builds a loop from a JSON loop-spec document.
pub fn parse_loop_spec(document: &str) -> Result<Loop, CliError> {
    let spec: LoopSpec = serde_json::from_str(document)
        .map_err(|e| CliError::input(format!("invalid loop spec: {e}")))?;
    if spec.spec_version != 1 {
        return Err(CliError::input(format!(
            "unsupported spec_version {} (expected 1)",
            spec.spec_version
        )));
    }
    match spec.body {
        LoopSpecBody::Builtin { name, rho, h, theta0 } => builtin(&name, rho, h, theta0),
        LoopSpecBody::Samples { closed, samples } => {
            if !closed {
                return Err(CliError::input(
                    "only closed loops are supported (closed = false)".to_string(),
                ));
            }
            if samples.len() >= 2 {
                let first = &samples[0];
                let last = &samples[samples.len() - 1];
                let gap = ((first[1] - last[1]).powi(2)
                    + (first[2] - last[2]).powi(2)
                    + (first[3] - last[3]).powi(2))
                .sqrt();
                if gap > 1e-9 {
                    return Err(CliError::input(format!(
                        "sampled path is open (endpoint gap {gap:.3e}) but closed = true"
                    )));
                }
            }
            let pts: Vec<(f64, Vector3<f64>)> = samples
                .iter()
                .map(|s| (s[0], Vector3::new(s[1], s[2], s[3])))
                .collect();
            Loop::from_samples("sampled", &pts).map_err(CliError::from)
        }
        LoopSpecBody::Piecewise { pieces } => {
            if pieces.is_empty() {
                return Err(CliError::input("piecewise loop needs at least one piece".into()));
            }
            let mut prims = Vec::with_capacity(pieces.len());
            let mut weights = Vec::with_capacity(pieces.len());
            for (i, piece) in pieces.iter().enumerate() {
                match piece {
                    PieceSpec::Line { from, to, weight } => {
                        if !(*weight > 0.0) {
                            return Err(CliError::input(format!(
                                "piece {i}: weight must be positive (got {weight})"
                            )));
                        }
                        prims.push(PathPrimitive::Line { from: vec3(from), to: vec3(to) });
                        weights.push(*weight);
                    }
                    PieceSpec::Arc { center, axis, start, angle, weight } => {
                        if !(*weight > 0.0) {
                            return Err(CliError::input(format!(
                                "piece {i}: weight must be positive (got {weight})"
                            )));
                        }
                        if vec3(axis).norm() < 1e-12 {
                            return Err(CliError::input(format!("piece {i}: arc axis is zero")));
                        }
                        prims.push(PathPrimitive::Arc {
                            center: vec3(center),
                            axis: vec3(axis),
                            start: vec3(start),
                            angle: *angle,
                        });
                        weights.push(*weight);
                    }
                }
            }
            Loop::from_primitives_weighted("piecewise", &prims, &weights).map_err(CliError::from)
        }
    }
}

fn builtin(name: &str, rho: Option<f64>, h: Option<f64>, theta0: Option<f64>) -> Result<Loop, CliError> {
    match name {
        "gamma_a" => Ok(catalog::gamma_a()),
        "gamma_b" => Ok(catalog::gamma_b()),
        "gamma_c" => Ok(catalog::gamma_c()),
        "gamma_d" => Ok(catalog::gamma_d()),
        "fig3b" => Ok(catalog::fig3b()),
        "fig3c" => Ok(catalog::fig3c()),
        "circle" => {
            let rho = rho.ok_or_else(|| CliError::input("circle needs \"rho\"".into()))?;
            let h = h.ok_or_else(|| CliError::input("circle needs \"h\"".into()))?;
            catalog::circle(rho, h).map_err(CliError::from)
        }
        "cap" => {
            let theta0 = theta0.ok_or_else(|| CliError::input("cap needs \"theta0\"".into()))?;
            catalog::cap(theta0).map_err(CliError::from)
        }
        other => Err(CliError::input(format!(
            "unknown builtin loop {other:?}; catalog: {}",
            catalog_listing()
        ))),
    }
}

/// Resolves a `--loop` argument: a catalog name (with optional `(args)`)
/// or an inline JSON document.
pub fn resolve_loop_arg(arg: &str) -> Result<Loop, CliError> {
    let trimmed = arg.trim();
    if trimmed.starts_with('{') {
        return parse_loop_spec(trimmed);
    }
    if let Some(open) = trimmed.find('(') {
        let name = &trimmed[..open];
        let inner = trimmed[open..]
            .strip_prefix('(')
            .and_then(|s| s.strip_suffix(')'))
            .ok_or_else(|| CliError::input(format!("malformed loop name {trimmed:?}")))?;
        let args: Vec<f64> = inner
            .split(',')
            .map(|p| p.trim().parse::<f64>())
            .collect::<Result<_, _>>()
            .map_err(|e| CliError::input(format!("bad numeric argument in {trimmed:?}: {e}")))?;
        return match (name, args.as_slice()) {
            ("circle", [rho, h]) => builtin("circle", Some(*rho), Some(*h), None),
            ("cap", [theta0]) => builtin("cap", None, None, Some(*theta0)),
            _ => Err(CliError::input(format!(
                "unknown parametrized loop {trimmed:?}; catalog: {}",
                catalog_listing()
            ))),
        };
    }
    builtin(trimmed, None, None, None)
}
