//! Simulated population measurements in rotated bases and reconstruction
//! of the spin vector and spin fluctuation tensor.
//!
//! A measurement in basis `R` separates the state into the three
//! populations of `n̂·S⃗` with `n̂ = R ẑ`; counts follow the Born
//! probabilities with multinomial shot noise. The default basis set —
//! identity plus rotations aligning the measurement axis with `x`, `y`,
//! `(x+y)/√2`, `(y+z)/√2`, `(x+z)/√2` — pins down all six independent
//! second moments; off-diagonal anticommutators come from the diagonal
//! axes via `⟨S_{(n̂₁+n̂₂)/√2}²⟩ = (⟨S₁²⟩ + ⟨S₂²⟩ + ⟨{S₁,S₂}⟩)/2`.

use nalgebra::{Matrix3, Vector3};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution};

use crate::rotations::{spin1_rep, Rotation};
use crate::spinstate::{BlochVector, SpinState};

#[derive(thiserror::Error, Debug, Clone, PartialEq)]
pub enum TomographyError {
    #[error("basis set cannot resolve all spin moments: missing measurement axis {missing}")]
    InsufficientBasis { missing: &'static str },
}

/// Counts of one simulated population measurement.
#[derive(Debug, Clone)]
pub struct MeasurementRecord {
    /// Basis rotation; the measured axis is `basis · ẑ`.
    pub basis: Rotation,
    pub shots: u64,
    /// Populations in basis order `(z₋₁, z₀, z₊₁)`; sums to `shots`.
    pub counts: [u64; 3],
    pub seed: u64,
}

impl MeasurementRecord {
    /// Measured axis `basis · ẑ`.
    pub fn axis(&self) -> Vector3<f64> {
        self.basis.apply(&Vector3::z())
    }

    /// Observed frequencies.
    pub fn frequencies(&self) -> [f64; 3] {
        let n = self.shots as f64;
        [self.counts[0] as f64 / n, self.counts[1] as f64 / n, self.counts[2] as f64 / n]
    }
}

/// An ordered list of measurement bases.
#[derive(Debug, Clone)]
pub struct BasisSet {
    pub rotations: Vec<Rotation>,
}

impl BasisSet {
    /// The six-basis default: identity (z axis) plus rotations taking the
    /// measurement axis to x, y, (x+y)/√2, (y+z)/√2 and (x+z)/√2.
    pub fn default_six() -> Self {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let axes = [
            Vector3::new(1.0, 0.0, 0.0),
            Vector3::new(0.0, 1.0, 0.0),
            Vector3::new(s, s, 0.0),
            Vector3::new(0.0, s, s),
            Vector3::new(s, 0.0, s),
        ];
        let mut rotations = vec![Rotation::identity()];
        rotations.extend(axes.iter().map(crate::spinstate::rotation_aligning_z));
        BasisSet { rotations }
    }
}

/// Born probabilities of the three populations measured in `basis`.
pub fn born_probabilities(psi: &SpinState, basis: &Rotation) -> [f64; 3] {
    let d = spin1_rep(basis);
    let rotated = d.adjoint() * psi.amplitudes();
    let n = rotated.norm_squared();
    [
        rotated.x.norm_sqr() / n,
        rotated.y.norm_sqr() / n,
        rotated.z.norm_sqr() / n,
    ]
}

fn record_rng(seed: u64, record_index: u64) -> ChaCha8Rng {
    let mut key = [0u8; 32];
    key[..8].copy_from_slice(&seed.to_le_bytes());
    key[8..16].copy_from_slice(&record_index.to_le_bytes());
    ChaCha8Rng::from_seed(key)
}

fn multinomial(rng: &mut ChaCha8Rng, shots: u64, p: &[f64; 3]) -> [u64; 3] {
    // three cells via conditional binomials
    let p0 = p[0].clamp(0.0, 1.0);
    let c0 = if p0 >= 1.0 {
        shots
    } else {
        Binomial::new(shots, p0).expect("valid probability").sample(rng)
    };
    let rest = shots - c0;
    let q = if p0 < 1.0 { (p[1] / (1.0 - p0)).clamp(0.0, 1.0) } else { 0.0 };
    let c1 = if rest == 0 {
        0
    } else if q >= 1.0 {
        rest
    } else {
        Binomial::new(rest, q).expect("valid probability").sample(rng)
    };
    [c0, c1, rest - c1]
}

/// Simulates one population measurement with multinomial shot noise.
/// Deterministic for a fixed `(seed, record index)` pair; this entry point
/// uses record index 0.
pub fn simulate_counts(
    psi: &SpinState,
    basis: &Rotation,
    shots: u64,
    seed: u64,
) -> MeasurementRecord {
    simulate_counts_indexed(psi, basis, shots, seed, 0)
}

/// As [`simulate_counts`] with an explicit record index, so batches drawn
/// from one seed stay independent and reproducible.
pub fn simulate_counts_indexed(
    psi: &SpinState,
    basis: &Rotation,
    shots: u64,
    seed: u64,
    record_index: u64,
) -> MeasurementRecord {
    let shots = shots.max(1);
    let p = born_probabilities(psi, basis);
    let mut rng = record_rng(seed, record_index);
    let counts = multinomial(&mut rng, shots, &p);
    MeasurementRecord { basis: *basis, shots, counts, seed }
}

/// Simulates the whole basis set, one record per basis, keyed by
/// `(seed, record index)`.
pub fn simulate_record_set(
    psi: &SpinState,
    basis_set: &BasisSet,
    shots: u64,
    seed: u64,
) -> Vec<MeasurementRecord> {
    basis_set
        .rotations
        .iter()
        .enumerate()
        .map(|(i, b)| simulate_counts_indexed(psi, b, shots, seed, i as u64))
        .collect()
}

/// Reconstructed first and second spin moments.
#[derive(Debug, Clone)]
pub struct ReconstructedMoments {
    /// Estimated spin vector, clipped to the unit ball if sampling noise
    /// pushed it outside.
    pub s: BlochVector,
    /// The raw, unclipped estimate.
    pub s_raw: Vector3<f64>,
    /// Whether clipping was applied.
    pub clipped: bool,
    /// Estimated spin fluctuation tensor (symmetric).
    pub tensor: Matrix3<f64>,
}

struct AxisMoments {
    first: f64,
    second: f64,
}

fn moments_from_frequencies(freq: &[f64; 3]) -> AxisMoments {
    // populations are ordered (m = −1, 0, +1)
    AxisMoments { first: freq[2] - freq[0], second: freq[2] + freq[0] }
}

/// Reconstructs `(s, T)` from records over the default-style basis set.
///
/// Per-axis first moments give the spin vector; second moments along the
/// diagonal axes recover the anticommutators, and the tensor is assembled
/// entrywise and symmetrized. Estimates are frequencies, so the result is
/// exact in the infinite-shot limit.
pub fn reconstruct_moments(
    records: &[MeasurementRecord],
) -> Result<ReconstructedMoments, TomographyError> {
    let items: Vec<(Vector3<f64>, [f64; 3])> =
        records.iter().map(|r| (r.axis(), r.frequencies())).collect();
    reconstruct_from_frequencies(&items)
}

/// Reconstruction from `(axis, populations)` pairs; used directly with
/// exact Born probabilities for infinite-shot checks.
pub fn reconstruct_from_frequencies(
    items: &[(Vector3<f64>, [f64; 3])],
) -> Result<ReconstructedMoments, TomographyError> {
    let s2 = std::f64::consts::FRAC_1_SQRT_2;
    let find = |axis: Vector3<f64>, label: &'static str| -> Result<AxisMoments, TomographyError> {
        items
            .iter()
            .find(|(a, _)| (a - axis).norm() < 1e-9)
            .map(|(_, f)| moments_from_frequencies(f))
            .ok_or(TomographyError::InsufficientBasis { missing: label })
    };
    let mx = find(Vector3::x(), "x")?;
    let my = find(Vector3::y(), "y")?;
    let mz = find(Vector3::z(), "z")?;
    let mxy = find(Vector3::new(s2, s2, 0.0), "(x+y)/sqrt2")?;
    let myz = find(Vector3::new(0.0, s2, s2), "(y+z)/sqrt2")?;
    let mxz = find(Vector3::new(s2, 0.0, s2), "(x+z)/sqrt2")?;

    let s_raw = Vector3::new(mx.first, my.first, mz.first);
    // ⟨{S_i, S_j}⟩ = 2⟨S_diag²⟩ − ⟨S_i²⟩ − ⟨S_j²⟩
    let anti_xy = 2.0 * mxy.second - mx.second - my.second;
    let anti_yz = 2.0 * myz.second - my.second - mz.second;
    let anti_xz = 2.0 * mxz.second - mx.second - mz.second;

    let mut t = Matrix3::zeros();
    t[(0, 0)] = mx.second - s_raw.x * s_raw.x;
    t[(1, 1)] = my.second - s_raw.y * s_raw.y;
    t[(2, 2)] = mz.second - s_raw.z * s_raw.z;
    t[(0, 1)] = 0.5 * anti_xy - s_raw.x * s_raw.y;
    t[(1, 0)] = t[(0, 1)];
    t[(1, 2)] = 0.5 * anti_yz - s_raw.y * s_raw.z;
    t[(2, 1)] = t[(1, 2)];
    t[(0, 2)] = 0.5 * anti_xz - s_raw.x * s_raw.z;
    t[(2, 0)] = t[(0, 2)];

    let norm = s_raw.norm();
    let (s, clipped) = if norm > 1.0 {
        (BlochVector::new(s_raw / norm).expect("unit"), true)
    } else {
        (BlochVector::new(s_raw).expect("inside ball"), false)
    };
    Ok(ReconstructedMoments { s, s_raw, clipped, tensor: t })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spinstate::{bloch_vector, fluctuation_tensor};
    use num_complex::Complex64;
    use rand::rngs::StdRng;
    use rand::Rng;
    use std::f64::consts::FRAC_1_SQRT_2;

    fn random_state(rng: &mut StdRng) -> SpinState {
        loop {
            let v = Vector3::new(
                Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)),
                Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)),
                Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)),
            );
            if v.norm() > 1e-3 {
                return SpinState::from_vector(v).unwrap();
            }
        }
    }

    #[test]
    fn eigenstate_counts_are_deterministic() {
        let psi = SpinState::from_real(0.0, 0.0, 1.0).unwrap();
        let rec = simulate_counts(&psi, &Rotation::identity(), 5_000, 7);
        assert_eq!(rec.counts, [0, 0, 5_000]);
    }

    #[test]
    fn balanced_state_splits_evenly() {
        let psi = SpinState::from_real(FRAC_1_SQRT_2, 0.0, FRAC_1_SQRT_2).unwrap();
        let rec = simulate_counts(&psi, &Rotation::identity(), 1_000_000, 3);
        let f = rec.frequencies();
        assert!(f[1] == 0.0);
        assert!((f[0] - 0.5).abs() < 5e-3);
        assert!((f[2] - 0.5).abs() < 5e-3);
    }

    #[test]
    fn fixed_seed_reproduces_counts() {
        let mut rng = StdRng::seed_from_u64(1);
        let psi = random_state(&mut rng);
        let basis = BasisSet::default_six().rotations[3];
        let a = simulate_counts(&psi, &basis, 123_456, 42);
        let b = simulate_counts(&psi, &basis, 123_456, 42);
        assert_eq!(a.counts, b.counts);
        let c = simulate_counts(&psi, &basis, 123_456, 43);
        assert_ne!(a.counts, c.counts);
    }

    #[test]
    fn record_indices_decorrelate_a_batch() {
        let psi = SpinState::from_real(0.3, 0.5, 0.2).unwrap();
        let basis = Rotation::identity();
        let a = simulate_counts_indexed(&psi, &basis, 10_000, 9, 0);
        let b = simulate_counts_indexed(&psi, &basis, 10_000, 9, 1);
        assert_ne!(a.counts, b.counts);
    }

    #[test]
    fn counts_sum_to_shots() {
        let mut rng = StdRng::seed_from_u64(2);
        for i in 0..20 {
            let psi = random_state(&mut rng);
            let rec = simulate_counts_indexed(&psi, &BasisSet::default_six().rotations[i % 6], 9_999, 5, i as u64);
            assert_eq!(rec.counts.iter().sum::<u64>(), 9_999);
        }
    }

    #[test]
    fn infinite_shot_reconstruction_is_exact() {
        let mut rng = StdRng::seed_from_u64(3);
        for _ in 0..30 {
            let psi = random_state(&mut rng);
            let items: Vec<(Vector3<f64>, [f64; 3])> = BasisSet::default_six()
                .rotations
                .iter()
                .map(|b| (b.apply(&Vector3::z()), born_probabilities(&psi, b)))
                .collect();
            let rec = reconstruct_from_frequencies(&items).unwrap();
            let s = bloch_vector(&psi);
            let t = fluctuation_tensor(&psi);
            assert!((rec.s_raw - s.vector()).norm() < 1e-12);
            assert!((rec.tensor - t.matrix()).abs().max() < 1e-12);
            assert!(!rec.clipped);
        }
    }

    #[test]
    fn missing_axis_is_a_rank_error() {
        let psi = SpinState::from_real(0.3, 0.5, 0.2).unwrap();
        let mut records = simulate_record_set(&psi, &BasisSet::default_six(), 1_000, 1);
        records.remove(4);
        assert!(matches!(
            reconstruct_moments(&records),
            Err(TomographyError::InsufficientBasis { .. })
        ));
    }

    #[test]
    fn finite_shot_reconstruction_converges() {
        let psi = SpinState::from_real(0.5, 0.1, 0.6).unwrap();
        let truth = fluctuation_tensor(&psi);
        let records = simulate_record_set(&psi, &BasisSet::default_six(), 1_000_000, 11);
        let rec = reconstruct_moments(&records).unwrap();
        assert!((rec.tensor - truth.matrix()).abs().max() < 5e-3);
    }

    #[test]
    fn clipping_is_reported() {
        // hand-build frequencies that push |s| just outside the ball
        let s2 = std::f64::consts::FRAC_1_SQRT_2;
        let items = vec![
            (Vector3::x(), [0.0, 0.0, 1.0]),
            (Vector3::y(), [0.45, 0.1, 0.45]),
            (Vector3::z(), [0.4, 0.0, 0.6]),
            (Vector3::new(s2, s2, 0.0), [0.25, 0.5, 0.25]),
            (Vector3::new(0.0, s2, s2), [0.25, 0.5, 0.25]),
            (Vector3::new(s2, 0.0, s2), [0.25, 0.5, 0.25]),
        ];
        let rec = reconstruct_from_frequencies(&items).unwrap();
        assert!(rec.clipped);
        assert!(rec.s_raw.norm() > 1.0);
        assert!(rec.s.norm() <= 1.0 + 1e-12);
    }
}
