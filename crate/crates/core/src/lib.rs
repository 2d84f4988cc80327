//! Numerical engine for the non-Abelian SO(3) geometric phase carried by
//! the spin fluctuation tensor of a spin-1 state.
//!
//! Loops traversed by the spin vector inside the Bloch ball are lifted to
//! the state space by minimizing Fubini–Study length; the rotation relating
//! the lift's endpoints is the loop's geometric phase, and its generalized
//! solid angle extends the classical solid angle to loops through the
//! center of the ball.
//!
//! Module map:
//! - [`rotations`]: SO(3)/SU(2) algebra and the spin-1 representation.
//! - [`spinstate`]: states, spin moments, Fubini–Study metric, chords.
//! - [`loops`]: loop evaluators, zero detection, liftability, segmentation.
//! - [`holonomy`]: frame transport, geometric phase, lifts, solid angles.
//! - [`lens`]: the tangent-line model behind the transport equations.
//! - [`tomography`]: simulated population measurements and moment
//!   reconstruction.

pub mod holonomy;
pub mod lens;
pub mod loops;
pub mod rotations;
pub mod spinstate;
pub mod tomography;

pub use holonomy::{
    default_start_state, fs_length, generalized_solid_angle, geometric_phase, greedy_lift_oracle,
    horizontal_lift, solid_angle_oracle, transport_curve, transport_frame,
    vertical_displacement_rp2, FrameTransport, HolonomyError, HolonomyResult, LiftPath,
    SphereCurve,
};
pub use lens::{
    bundle_projections, l41_path_length, su2_to_so3, tangent_line_of, z4_preimages, LensError,
    TangentLine, UnitTangent,
};
pub use loops::{
    check_liftable, find_zeros, project_to_rp2, segment_loop, LiftabilityReport, Loop, LoopError,
    LoopTolerances, Rp2Path, Segment, Side, ZeroSet,
};
pub use rotations::{
    project_to_rotation, spin1_rep, AxisAngle, Rotation, RotationError, SpinOperators,
};
pub use spinstate::{
    bloch_vector, chord_from_state, fiber_state, fluctuation_tensor, fs_speed_chord,
    fubini_study_distance, state_from_chord, tensor_spectrum, BlochVector, Chord, ChordVelocity,
    FiberPoint, FluctuationTensor, SpinState, StateError,
};
pub use tomography::{
    reconstruct_moments, simulate_counts, simulate_record_set, BasisSet, MeasurementRecord,
    ReconstructedMoments, TomographyError,
};
