//! Command-line driver for the Bloch-ball geometric phase engine.
//!
//! Exit codes: 0 success, 2 input error, 3 loop not liftable.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use serde_json::json;

use bloch_holonomy::loops::{catalog, LoopTolerances};
use bloch_holonomy::spinstate::{bloch_vector, SpinState};
use bloch_holonomy::tomography::{reconstruct_moments, simulate_record_set, BasisSet};
use bloch_holonomy::{
    check_liftable, default_start_state, find_zeros, geometric_phase, greedy_lift_oracle,
    horizontal_lift, project_to_rp2, vertical_displacement_rp2, Loop,
};

use bloch_holonomy_cli::output::{fmt_f64, matrix_json, rotation_json, vec3_json, Document, Format};
use bloch_holonomy_cli::{loopspec, CliError};

#[derive(Parser)]
#[command(
    name = "bloch-holonomy",
    about = "Geometric phase, horizontal lifts and generalized solid angles of loops in the Bloch ball",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct LoopArgs {
    /// Catalog name (e.g. gamma_a, circle(0.5,0.5)) or inline loop-spec JSON
    #[arg(long = "loop", value_name = "NAME|JSON")]
    loop_arg: Option<String>,
    /// Path to a loop-spec JSON document
    #[arg(long, value_name = "PATH", conflicts_with = "loop_arg")]
    loop_file: Option<PathBuf>,
    /// Center-visit detection threshold, ball-radius units
    #[arg(long, default_value_t = 1e-8)]
    tol_zero: f64,
    /// Maximum tangent mismatch at a center visit, radians
    #[arg(long, default_value_t = 1e-6)]
    tol_kink: f64,
    /// Minimum one-sided speed at a center visit, per unit t
    #[arg(long, default_value_t = 1e-8)]
    tol_speed: f64,
}

impl LoopArgs {
    fn build(&self) -> Result<Loop, CliError> {
        let lp = match (&self.loop_arg, &self.loop_file) {
            (Some(arg), None) => loopspec::resolve_loop_arg(arg)?,
            (None, Some(path)) => {
                let text = std::fs::read_to_string(path)
                    .map_err(|e| CliError::input(format!("reading {}: {e}", path.display())))?;
                loopspec::parse_loop_spec(&text)?
            }
            _ => return Err(CliError::input("provide exactly one of --loop or --loop-file".into())),
        };
        Ok(lp.with_tolerances(LoopTolerances {
            tol_zero: self.tol_zero,
            tol_kink: self.tol_kink,
            tol_speed: self.tol_speed,
        }))
    }
}

#[derive(Args)]
struct OutputArgs {
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
    /// Write the data document to a file instead of stdout
    #[arg(long, value_name = "PATH")]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Check whether a loop admits a horizontal lift; exit 3 if not
    Liftable {
        #[command(flatten)]
        loop_args: LoopArgs,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Locate the loop's center visits
    Zeros {
        #[command(flatten)]
        loop_args: LoopArgs,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Compute the SO(3) geometric phase and its solid-angle decomposition
    Phase {
        #[command(flatten)]
        loop_args: LoopArgs,
        /// Integration steps per zero-to-zero segment
        #[arg(long, default_value_t = 10_000)]
        steps: usize,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Report the generalized solid angle of a loop
    SolidAngle {
        #[command(flatten)]
        loop_args: LoopArgs,
        #[arg(long, default_value_t = 10_000)]
        steps: usize,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Sample a horizontal lift of the loop
    Lift {
        #[command(flatten)]
        loop_args: LoopArgs,
        #[arg(long, default_value_t = 10_000)]
        steps: usize,
        /// Starting state as six floats (re/im interleaved, basis z-1, z0, z+1);
        /// default: a canonical state over the loop start
        #[arg(long, value_name = "JSON", allow_hyphen_values = true)]
        state: Option<String>,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Cross-check the phase against the vertical displacement of the
    /// loop's projection to the space of diameters
    Rp2Check {
        #[command(flatten)]
        loop_args: LoopArgs,
        #[arg(long, default_value_t = 10_000)]
        steps: usize,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Compare the transported lift against the greedy length-minimizing
    /// oracle (nonsingular interior loops only)
    Oracle {
        #[command(flatten)]
        loop_args: LoopArgs,
        #[arg(long, default_value_t = 10_000)]
        steps: usize,
        /// Fiber-coordinate grid resolution for the oracle search
        #[arg(long, default_value_t = 64)]
        fiber_grid: usize,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Simulate the before/after population-measurement experiment and
    /// check that the measured tensors are related by the predicted phase
    Tomography {
        #[command(flatten)]
        loop_args: LoopArgs,
        #[arg(long, default_value_t = 10_000)]
        steps: usize,
        #[arg(long, default_value_t = 1_000_000)]
        shots: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// List the built-in loop catalog
    Catalog {
        #[command(flatten)]
        output: OutputArgs,
    },
}

fn main() {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => std::process::exit(code),
        Err(e) => {
            eprintln!("error: {e}");
            std::process::exit(e.code);
        }
    }
}

fn run(cli: Cli) -> Result<i32, CliError> {
    match cli.command {
        Command::Liftable { loop_args, output } => {
            let lp = loop_args.build()?;
            let report = check_liftable(&lp)?;
            let doc = Document::record(
                json!({
                    "loop": lp.label(),
                    "liftable": report.liftable,
                    "kinks": report.kinks.iter()
                        .map(|k| json!({"t": k.t, "angle": k.angle}))
                        .collect::<Vec<_>>(),
                    "stalls": report.stalls,
                    "zeros": report.zeros.times(),
                }),
                vec![
                    ("loop", lp.label().to_string()),
                    ("liftable", report.liftable.to_string()),
                    (
                        "kink_times",
                        report
                            .kinks
                            .iter()
                            .map(|k| fmt_f64(k.t))
                            .collect::<Vec<_>>()
                            .join(";"),
                    ),
                    (
                        "stall_times",
                        report.stalls.iter().map(|t| fmt_f64(*t)).collect::<Vec<_>>().join(";"),
                    ),
                ],
            );
            doc.emit(output.format, &output.out)?;
            Ok(if report.liftable { 0 } else { 3 })
        }
        Command::Zeros { loop_args, output } => {
            let lp = loop_args.build()?;
            let zeros = find_zeros(&lp)?;
            let doc = Document {
                json: json!({
                    "loop": lp.label(),
                    "times": zeros.times(),
                    "interior": zeros.interior(),
                    "starts_at_center": zeros.starts_at_center(),
                }),
                header: vec!["index".into(), "t".into()],
                rows: zeros
                    .times()
                    .iter()
                    .enumerate()
                    .map(|(i, t)| vec![i.to_string(), fmt_f64(*t)])
                    .collect(),
            };
            doc.emit(output.format, &output.out)?;
            Ok(0)
        }
        Command::Phase { loop_args, steps, output } => {
            let lp = loop_args.build()?;
            let h = geometric_phase(&lp, steps)?;
            let aa = h.rotation.axis_angle();
            let doc = Document::record(
                json!({
                    "loop": lp.label(),
                    "steps_per_segment": steps,
                    "rotation": rotation_json(&h.rotation),
                    "axis": vec3_json(&aa.axis),
                    "angle": aa.angle,
                    "segment_factors": h.segment_factors.iter().map(rotation_json).collect::<Vec<_>>(),
                    "alpha_start": vec3_json(&h.alpha_start),
                    "alpha_end": vec3_json(&h.alpha_end),
                    "k": vec3_json(&h.k),
                    "omega1": h.omega1,
                    "omega2": h.omega2,
                }),
                vec![
                    ("loop", lp.label().to_string()),
                    ("axis_x", fmt_f64(aa.axis.x)),
                    ("axis_y", fmt_f64(aa.axis.y)),
                    ("axis_z", fmt_f64(aa.axis.z)),
                    ("angle", fmt_f64(aa.angle)),
                    ("omega1", fmt_f64(h.omega1)),
                    ("omega2", fmt_f64(h.omega2)),
                ],
            );
            doc.emit(output.format, &output.out)?;
            Ok(0)
        }
        Command::SolidAngle { loop_args, steps, output } => {
            let lp = loop_args.build()?;
            let h = geometric_phase(&lp, steps)?;
            let aa = h.rotation.axis_angle();
            let doc = Document::record(
                json!({
                    "loop": lp.label(),
                    "generalized_solid_angle": h.omega2,
                    "omega1": h.omega1,
                    "axis": vec3_json(&aa.axis),
                    "angle": aa.angle,
                }),
                vec![
                    ("loop", lp.label().to_string()),
                    ("generalized_solid_angle", fmt_f64(h.omega2)),
                    ("omega1", fmt_f64(h.omega1)),
                ],
            );
            doc.emit(output.format, &output.out)?;
            Ok(0)
        }
        Command::Lift { loop_args, steps, state, output } => {
            let lp = loop_args.build()?;
            let psi0 = match state {
                None => default_start_state(&lp)?,
                Some(text) => parse_state(&text)?,
            };
            let lift = horizontal_lift(&lp, &psi0, steps)?;
            let mut rows = Vec::with_capacity(lift.times.len());
            let mut json_rows = Vec::with_capacity(lift.times.len());
            for ((t, state), chord) in lift.times.iter().zip(&lift.states).zip(&lift.chords) {
                let f = state.normalized().to_floats();
                let s = bloch_vector(state);
                let sv = s.vector();
                let (ux, uy, uz) = match &chord.u {
                    Some(u) => (u.x, u.y, u.z),
                    None => (f64::NAN, f64::NAN, f64::NAN),
                };
                rows.push(vec![
                    fmt_f64(*t),
                    fmt_f64(f[0]),
                    fmt_f64(f[1]),
                    fmt_f64(f[2]),
                    fmt_f64(f[3]),
                    fmt_f64(f[4]),
                    fmt_f64(f[5]),
                    fmt_f64(sv.x),
                    fmt_f64(sv.y),
                    fmt_f64(sv.z),
                    fmt_f64(chord.r),
                    fmt_f64(chord.v.x),
                    fmt_f64(chord.v.y),
                    fmt_f64(chord.v.z),
                    fmt_f64(ux),
                    fmt_f64(uy),
                    fmt_f64(uz),
                ]);
                json_rows.push(json!({
                    "t": t,
                    "state": f,
                    "s": [sv.x, sv.y, sv.z],
                    "chord": {
                        "r": chord.r,
                        "v": vec3_json(&chord.v),
                        "u": chord.u.as_ref().map(vec3_json),
                    },
                }));
            }
            let doc = Document {
                json: json!({
                    "loop": lp.label(),
                    "steps": steps,
                    "samples": json_rows,
                }),
                header: [
                    "t", "re_m1", "im_m1", "re_0", "im_0", "re_p1", "im_p1", "s_x", "s_y", "s_z",
                    "r", "v_x", "v_y", "v_z", "u_x", "u_y", "u_z",
                ]
                .iter()
                .map(|s| s.to_string())
                .collect(),
                rows,
            };
            doc.emit(output.format, &output.out)?;
            Ok(0)
        }
        Command::Rp2Check { loop_args, steps, output } => {
            let lp = loop_args.build()?;
            let h = geometric_phase(&lp, steps)?;
            let alpha = project_to_rp2(&lp)?;
            let v = vertical_displacement_rp2(&alpha, steps)?;
            let distance = h.rotation.frobenius_distance(&v);
            let doc = Document::record(
                json!({
                    "loop": lp.label(),
                    "steps": steps,
                    "phase_rotation": rotation_json(&h.rotation),
                    "rp2_displacement": rotation_json(&v),
                    "frobenius_distance": distance,
                    "projection_closed": alpha.closed(),
                }),
                vec![
                    ("loop", lp.label().to_string()),
                    ("frobenius_distance", fmt_f64(distance)),
                    ("projection_closed", alpha.closed().to_string()),
                ],
            );
            doc.emit(output.format, &output.out)?;
            Ok(0)
        }
        Command::Oracle { loop_args, steps, fiber_grid, output } => {
            let lp = loop_args.build()?;
            let psi0 = default_start_state(&lp)?;
            let transported = horizontal_lift(&lp, &psi0, steps)?;
            let greedy = greedy_lift_oracle(&lp, &psi0, steps, fiber_grid)?;
            let endpoint = bloch_holonomy::fubini_study_distance(
                transported.states.last().expect("nonempty lift"),
                greedy.states.last().expect("nonempty lift"),
            );
            let doc = Document::record(
                json!({
                    "loop": lp.label(),
                    "steps": steps,
                    "fiber_grid": fiber_grid,
                    "endpoint_fs_distance": endpoint,
                    "transport_length": transported.fs_length(),
                    "greedy_length": greedy.fs_length(),
                }),
                vec![
                    ("loop", lp.label().to_string()),
                    ("endpoint_fs_distance", fmt_f64(endpoint)),
                    ("transport_length", fmt_f64(transported.fs_length())),
                    ("greedy_length", fmt_f64(greedy.fs_length())),
                ],
            );
            doc.emit(output.format, &output.out)?;
            Ok(0)
        }
        Command::Tomography { loop_args, steps, shots, seed, output } => {
            let lp = loop_args.build()?;
            let h = geometric_phase(&lp, steps)?;
            let psi_before = default_start_state(&lp)?;
            let lift = horizontal_lift(&lp, &psi_before, steps)?;
            let psi_after = lift.states.last().expect("nonempty lift").clone();
            let basis = BasisSet::default_six();
            let before =
                reconstruct_moments(&simulate_record_set(&psi_before, &basis, shots, seed))
                    .map_err(|e| CliError::input(e.to_string()))?;
            let after =
                reconstruct_moments(&simulate_record_set(&psi_after, &basis, shots, seed.wrapping_add(1)))
                    .map_err(|e| CliError::input(e.to_string()))?;
            let conjugated = h.rotation.matrix() * before.tensor * h.rotation.matrix().transpose();
            let residual = (after.tensor - conjugated).abs().max();
            let moment_row = |label: &str, m: &bloch_holonomy::tomography::ReconstructedMoments| {
                let t = &m.tensor;
                vec![
                    label.to_string(),
                    fmt_f64(m.s_raw.x),
                    fmt_f64(m.s_raw.y),
                    fmt_f64(m.s_raw.z),
                    fmt_f64(t[(0, 0)]),
                    fmt_f64(t[(0, 1)]),
                    fmt_f64(t[(0, 2)]),
                    fmt_f64(t[(1, 1)]),
                    fmt_f64(t[(1, 2)]),
                    fmt_f64(t[(2, 2)]),
                ]
            };
            let doc = Document {
                json: json!({
                    "loop": lp.label(),
                    "shots": shots,
                    "seed": seed,
                    "predicted_rotation": rotation_json(&h.rotation),
                    "before": {
                        "s": vec3_json(&before.s_raw),
                        "tensor": matrix_json(&before.tensor),
                        "clipped": before.clipped,
                    },
                    "after": {
                        "s": vec3_json(&after.s_raw),
                        "tensor": matrix_json(&after.tensor),
                        "clipped": after.clipped,
                    },
                    "conjugation_residual": residual,
                    "shot_noise_scale": 1.0 / (shots as f64).sqrt(),
                }),
                header: ["experiment", "s_x", "s_y", "s_z", "t_xx", "t_xy", "t_xz", "t_yy", "t_yz", "t_zz"]
                    .iter()
                    .map(|s| s.to_string())
                    .collect(),
                rows: vec![moment_row("before", &before), moment_row("after", &after)],
            };
            doc.emit(output.format, &output.out)?;
            Ok(0)
        }
        Command::Catalog { output } => {
            let entries = catalog::entries();
            let doc = Document {
                json: json!(entries
                    .iter()
                    .map(|e| json!({"name": e.name, "description": e.description}))
                    .collect::<Vec<_>>()),
                header: vec!["name".into(), "description".into()],
                rows: entries
                    .iter()
                    .map(|e| vec![e.name.to_string(), format!("\"{}\"", e.description)])
                    .collect(),
            };
            doc.emit(output.format, &output.out)?;
            Ok(0)
        }
    }
}

fn parse_state(text: &str) -> Result<SpinState, CliError> {
    let floats: Vec<f64> = serde_json::from_str(text)
        .map_err(|e| CliError::input(format!("state must be a JSON array of 6 floats: {e}")))?;
    let arr: [f64; 6] = floats
        .try_into()
        .map_err(|v: Vec<f64>| CliError::input(format!("state needs 6 floats, got {}", v.len())))?;
    SpinState::from_floats(&arr).map_err(|e| CliError::input(e.to_string()))
}
