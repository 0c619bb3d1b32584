//! Cost predictions for a config, and the capacity checks run before compute.

use anneal_lab::evolution::{PropagatorMethod, RampKind};
use anneal_lab::pauli::{MAX_DENSE_SITES, MAX_PAULI_PROJECTION_SITES};
use serde::Serialize;

use crate::config::{ExperimentConfig, ExperimentKind, SectorChoice};
use crate::CliError;

/// Dense dimension above which a warning is issued.
pub const LARGE_DENSE_DIM: usize = 4096;
/// Predicted peak memory above which a warning is issued.
pub const LARGE_MEMORY_BYTES: u64 = 4 << 30;

const COMPLEX_BYTES: u64 = 16;
const REAL_BYTES: u64 = 8;

#[derive(Clone, Debug, Serialize)]
pub struct SizeCost {
    pub n_sites: usize,
    pub full_dim: usize,
    pub sector: &'static str,
    pub dim: usize,
    pub steps_per_leg: Option<usize>,
    pub total_steps: Option<usize>,
    pub eigendecompositions: usize,
    pub pauli_projections_per_sample: Option<u64>,
    pub sample_times: Option<usize>,
    pub peak_memory_bytes: u64,
    pub within_capacity: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct CostReport {
    pub experiment: &'static str,
    pub config_hash: String,
    pub sizes: Vec<SizeCost>,
    pub warnings: Vec<String>,
}

/// Dimension of the reflection sector: `(2^N ± 2^{⌈N/2⌉})/2`, since palindromic
/// bitstrings are their own mirror images.
pub fn sector_dim(n_sites: usize, sector: SectorChoice) -> usize {
    let full = 1usize << n_sites;
    let palindromes = 1usize << n_sites.div_ceil(2);
    match sector {
        SectorChoice::Full => full,
        SectorChoice::Even => (full + palindromes) / 2,
        SectorChoice::Odd => (full - palindromes) / 2,
    }
}

/// Limit on `N` for this experiment.
fn size_limit(kind: ExperimentKind) -> usize {
    match kind {
        ExperimentKind::Scramble => MAX_PAULI_PROJECTION_SITES,
        _ => MAX_DENSE_SITES,
    }
}

/// Reports every size beyond the capacity of its experiment.
pub fn check_capacity(config: &ExperimentConfig) -> Result<(), CliError> {
    let limit = size_limit(config.experiment);
    let over: Vec<String> = config
        .resolved_sizes()
        .into_iter()
        .filter(|&n| n > limit)
        .map(|n| format!("  {}: N = {n} exceeds the limit N ≤ {limit}", config.experiment.as_str()))
        .collect();
    if over.is_empty() {
        Ok(())
    } else {
        Err(CliError::Capacity(over))
    }
}

/// Predicted dimensions, step and eigensolve counts and memory. Never refuses.
pub fn estimate(config: &ExperimentConfig) -> CostReport {
    let kind = config.experiment;
    let sector = config.effective_sector();
    let limit = size_limit(kind);
    let mut warnings = Vec::new();
    let sizes = config
        .resolved_sizes()
        .into_iter()
        .map(|n| {
            let dim = sector_dim(n, sector);
            let params = config.ramp_params(n).ok().filter(|_| kind.uses_ramp());
            let steps_per_leg = params.as_ref().map(|p| p.steps_per_leg());
            let total_steps = params.as_ref().map(|p| p.total_steps());
            let step_eigens = match (config.ramp.method, &params) {
                (PropagatorMethod::Eigen, Some(p)) => p.steps_per_leg() + usize::from(p.kind() == RampKind::Cyclic),
                _ => 0,
            };
            let d = dim as u64;
            let (eigendecompositions, peak_memory_bytes, samples, pauli) = match kind {
                ExperimentKind::Spectrum | ExperimentKind::Gaps => {
                    (config.s_values().len(), 4 * REAL_BYTES * d * d, None, None)
                }
                ExperimentKind::ScsSweep | ExperimentKind::DickeSweep => {
                    let cols = match kind {
                        ExperimentKind::ScsSweep => config.phi_values().len(),
                        _ => config.dicke_values(n).len(),
                    } as u64;
                    let dense = if step_eigens > 0 { 3 * COMPLEX_BYTES * d * d } else { 0 };
                    (step_eigens, 4 * COMPLEX_BYTES * d * cols + dense, None, None)
                }
                ExperimentKind::RampUnitaryMlsr => {
                    let checkpoints = params.as_ref().map_or(0, |p| {
                        let stride = config.checkpoint_stride.unwrap_or((p.total_steps() / 100).max(1));
                        p.total_steps().div_ceil(stride) + 1
                    });
                    (checkpoints + step_eigens, 6 * COMPLEX_BYTES * d * d, None, None)
                }
                ExperimentKind::Eigenstates => (1 + step_eigens, 6 * COMPLEX_BYTES * d * d, None, None),
                ExperimentKind::Scramble => {
                    let samples = params.as_ref().map(|p| config.sample_time_values(p).len());
                    let pauli = 4u64.pow(n as u32);
                    (step_eigens, 6 * COMPLEX_BYTES * d * d + COMPLEX_BYTES * pauli, samples, Some(pauli))
                }
            };
            let within_capacity = n <= limit;
            if !within_capacity {
                warnings.push(format!("N = {n} exceeds the {} limit N ≤ {limit}", kind.as_str()));
            }
            if kind.is_dense() && dim > LARGE_DENSE_DIM {
                warnings.push(format!(
                    "N = {n}: dense dim {dim} in {} sector; each eigendecomposition is O(d³)",
                    sector.as_str()
                ));
            }
            if let Some(p) = pauli.filter(|_| n >= MAX_PAULI_PROJECTION_SITES) {
                warnings.push(format!("N = {n}: {p} Pauli projections per sample time"));
            }
            if peak_memory_bytes > LARGE_MEMORY_BYTES {
                warnings.push(format!(
                    "N = {n}: predicted peak memory {:.1} GiB",
                    peak_memory_bytes as f64 / (1u64 << 30) as f64
                ));
            }
            SizeCost {
                n_sites: n,
                full_dim: 1 << n,
                sector: sector.as_str(),
                dim,
                steps_per_leg,
                total_steps,
                eigendecompositions,
                pauli_projections_per_sample: pauli,
                sample_times: samples,
                peak_memory_bytes,
                within_capacity,
            }
        })
        .collect();
    CostReport {
        experiment: kind.as_str(),
        config_hash: config.hash(),
        sizes,
        warnings,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn palindromes(n: usize) -> usize {
        (0..1usize << n)
            .filter(|&z| (0..n).all(|i| (z >> i) & 1 == (z >> (n - 1 - i)) & 1))
            .count()
    }

    #[test]
    fn sector_dims_match_orbit_counting() {
        for n in 1..=11 {
            let p = palindromes(n);
            let full = 1 << n;
            assert_eq!(sector_dim(n, SectorChoice::Even), p + (full - p) / 2, "N={n}");
            assert_eq!(sector_dim(n, SectorChoice::Odd), (full - p) / 2, "N={n}");
        }
        assert_eq!(sector_dim(12, SectorChoice::Even), 2080);
    }

    #[test]
    fn large_unitary_runs_warn() {
        let c = ExperimentConfig::from_json(r#"{"experiment": "ramp-unitary-mlsr", "sizes": [14]}"#).unwrap();
        let r = estimate(&c);
        assert_eq!(r.sizes[0].dim, 8256);
        assert_eq!(r.sizes[0].steps_per_leg, Some(1176));
        assert!(r.warnings.iter().any(|w| w.contains("dense dim 8256 in + sector")), "{:?}", r.warnings);
    }

    #[test]
    fn scramble_counts_pauli_projections() {
        let c = ExperimentConfig::from_json(r#"{"experiment": "scramble", "sizes": [6]}"#).unwrap();
        let r = estimate(&c);
        assert_eq!(r.sizes[0].pauli_projections_per_sample, Some(4096));
        assert_eq!(r.sizes[0].dim, 64);
        assert_eq!(r.sizes[0].total_steps, Some(432));
        assert!(r.warnings.is_empty());
    }

    #[test]
    fn capacity_is_checked_per_experiment() {
        let c = ExperimentConfig::from_json(r#"{"experiment": "scramble", "sizes": [6, 8]}"#).unwrap();
        assert_eq!(check_capacity(&c).unwrap_err().exit_code(), 3);
        assert!(!estimate(&c).sizes[1].within_capacity);
        let c = ExperimentConfig::from_json(r#"{"experiment": "gaps", "sizes": [8]}"#).unwrap();
        assert!(check_capacity(&c).is_ok());
    }
}
