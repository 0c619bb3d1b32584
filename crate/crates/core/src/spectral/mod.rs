//! Level-spacing statistics of Hermitian spectra and unitary eigenphases,
//! gap profiles along the ramp, and the adiabatic-time estimate.
//!
//! Ratios use the bounded convention `r̃ = min(Δ_j, Δ_{j+1}) / max(Δ_j, Δ_{j+1}) ∈ [0, 1]`,
//! under which Poisson spectra average `2 ln 2 − 1 ≈ 0.386`, GOE ≈ 0.535 and COE ≈ 0.529.

pub mod ensembles;

use std::f64::consts::TAU;

use faer::{Mat, Side};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{symmetric_eigenvalues, DenseOperator};
use crate::model::{parity_sector, HamiltonianSpec, Parity, RampGenerator};

/// Reference mean ratio for Gaussian orthogonal matrices.
pub const GOE_MLSR: f64 = 0.535;
/// Reference mean ratio for circular orthogonal matrices.
pub const COE_MLSR: f64 = 0.529;
/// Reference mean ratio for uncorrelated (Poisson) levels.
pub const POISSON_MLSR: f64 = 0.386;

/// Fraction of levels dropped at each spectral edge for Hermitian statistics.
pub const DEFAULT_BULK_TRIM: f64 = 0.05;

/// Relative degeneracy threshold: gaps below this times the spectral width are skipped.
pub const DEGENERACY_REL_TOL: f64 = 1e-10;

const MIN_RETAINED_LEVELS: usize = 10;

/// Sorted spectrum with its gaps and spacing ratios.
#[derive(Clone, Debug, Serialize)]
pub struct SpectrumResult {
    pub values: Vec<f64>,
    pub gaps: Vec<f64>,
    pub ratios: Vec<f64>,
    /// Adjacent-gap pairs excluded because one gap was degenerate.
    pub skipped_pairs: usize,
    pub mlsr: f64,
}

impl SpectrumResult {
    /// Fraction of candidate ratios dropped as degenerate.
    pub fn degenerate_fraction(&self) -> f64 {
        let total = self.ratios.len() + self.skipped_pairs;
        if total == 0 {
            0.0
        } else {
            self.skipped_pairs as f64 / total as f64
        }
    }

    /// Statistics of a sorted real spectrum (no wraparound).
    pub fn from_sorted(values: Vec<f64>, degeneracy_tol: f64) -> Result<Self> {
        let gaps = level_spacings(&values)?;
        let stats = spacing_ratio_stats(&gaps, degeneracy_tol)?;
        Ok(Self {
            values,
            gaps,
            mlsr: mean(&stats.ratios),
            ratios: stats.ratios,
            skipped_pairs: stats.skipped,
        })
    }

    /// Statistics of eigenphases on the circle, including the wraparound gap.
    pub fn from_phases(mut phases: Vec<f64>, degeneracy_tol: f64) -> Result<Self> {
        for p in phases.iter_mut() {
            *p = p.rem_euclid(TAU);
            if *p >= TAU {
                *p = 0.0;
            }
        }
        phases.sort_by(f64::total_cmp);
        if phases.len() < 3 {
            return Err(Error::InvalidParameter {
                name: "phases",
                reason: format!("need at least 3 eigenphases, found {}", phases.len()),
            });
        }
        let mut gaps = level_spacings(&phases)?;
        gaps.push(TAU - phases[phases.len() - 1] + phases[0]);
        // close the circle: the last pair couples the wraparound gap with the first gap
        let mut circular = gaps.clone();
        circular.push(gaps[0]);
        let stats = spacing_ratio_stats(&circular, degeneracy_tol)?;
        Ok(Self {
            values: phases,
            gaps,
            mlsr: mean(&stats.ratios),
            ratios: stats.ratios,
            skipped_pairs: stats.skipped,
        })
    }
}

/// Ratios plus the count of skipped degenerate pairs.
#[derive(Clone, Debug)]
pub struct RatioStats {
    pub ratios: Vec<f64>,
    pub skipped: usize,
}

fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}

/// Consecutive differences of a sorted spectrum.
pub fn level_spacings(values: &[f64]) -> Result<Vec<f64>> {
    if values.len() < 2 {
        return Err(Error::InvalidParameter {
            name: "values",
            reason: format!("need at least 2 levels, found {}", values.len()),
        });
    }
    if let Some(i) = values.windows(2).position(|w| w[1] < w[0]) {
        return Err(Error::Unsorted(i + 1));
    }
    Ok(values.windows(2).map(|w| w[1] - w[0]).collect())
}

/// Bounded ratios `min/max` of adjacent gaps, skipping pairs with a gap below `degeneracy_tol`.
pub fn spacing_ratios(gaps: &[f64], degeneracy_tol: f64) -> Result<Vec<f64>> {
    spacing_ratio_stats(gaps, degeneracy_tol).map(|s| s.ratios)
}

pub fn spacing_ratio_stats(gaps: &[f64], degeneracy_tol: f64) -> Result<RatioStats> {
    if gaps.len() < 2 {
        return Err(Error::InvalidParameter {
            name: "gaps",
            reason: format!("need at least 2 gaps, found {}", gaps.len()),
        });
    }
    let mut ratios = Vec::with_capacity(gaps.len() - 1);
    let mut skipped = 0;
    for w in gaps.windows(2) {
        let (a, b) = (w[0], w[1]);
        if a < degeneracy_tol || b < degeneracy_tol {
            skipped += 1;
        } else {
            ratios.push(a.min(b) / a.max(b));
        }
    }
    if ratios.is_empty() {
        return Err(Error::EmptyStatistics { skipped });
    }
    Ok(RatioStats { ratios, skipped })
}

/// Bulk statistics of a sorted spectrum: trims `bulk_trim` of the levels at each end.
pub fn bulk_statistics(values: &[f64], bulk_trim: f64) -> Result<SpectrumResult> {
    if !(0.0..0.5).contains(&bulk_trim) {
        return Err(Error::InvalidParameter {
            name: "bulk_trim",
            reason: format!("{bulk_trim} is outside [0, 0.5)"),
        });
    }
    let n = values.len();
    let cut = (bulk_trim * n as f64).floor() as usize;
    let kept = &values[cut..n - cut];
    if kept.len() < MIN_RETAINED_LEVELS {
        return Err(Error::TooFewLevels {
            retained: kept.len(),
            required: MIN_RETAINED_LEVELS,
        });
    }
    let width = values[n - 1] - values[0];
    SpectrumResult::from_sorted(kept.to_vec(), DEGENERACY_REL_TOL * width.max(f64::MIN_POSITIVE))
}

/// Mean spacing ratio over the bulk of a Hermitian operator's spectrum.
pub fn mlsr_hermitian(h: &DenseOperator, bulk_trim: f64) -> Result<f64> {
    let values = h.hermitian_eigenvalues()?;
    bulk_statistics(&values, bulk_trim).map(|r| r.mlsr)
}

/// Eigenphases `μ` of a unitary, `U|μ⟩ = e^{−iμ}|μ⟩`, in `[0, 2π)`.
pub fn eigenphases(u: &DenseOperator) -> Result<Vec<f64>> {
    Ok(u.eigenvalues()?
        .into_iter()
        .map(|z| (-z.arg()).rem_euclid(TAU))
        .collect())
}

/// Full eigenphase statistics of a unitary with the wraparound gap, no trimming.
pub fn unitary_statistics(u: &DenseOperator) -> Result<SpectrumResult> {
    SpectrumResult::from_phases(eigenphases(u)?, DEGENERACY_REL_TOL * TAU)
}

pub fn mlsr_unitary(u: &DenseOperator) -> Result<f64> {
    unitary_statistics(u).map(|r| r.mlsr)
}

/// Ground-state gap and average gap of the sector Hamiltonian at one `s`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GapPoint {
    pub s: f64,
    pub ground_gap: f64,
    pub average_gap: f64,
}

/// `Δ_0(s) = e_1 − e_0` and `Δ̄(s) = (e_max − e_min)/(d̃ − 1)` over an `s` grid.
pub fn gap_profile(spec: &HamiltonianSpec, parity: Parity, s_grid: &[f64]) -> Result<Vec<GapPoint>> {
    check_grid(s_grid)?;
    let sector = parity_sector(spec, parity)?;
    let gen = RampGenerator::new(spec, Some(&sector))?;
    s_grid
        .iter()
        .map(|&s| {
            let values = symmetric_eigenvalues(gen.dense_at(s).as_ref())?;
            let d = values.len();
            if d < 2 {
                return Err(Error::TooFewLevels { retained: d, required: 2 });
            }
            Ok(GapPoint {
                s,
                ground_gap: values[1] - values[0],
                average_gap: (values[d - 1] - values[0]) / (d - 1) as f64,
            })
        })
        .collect()
}

/// Bulk MLSR of the sector Hamiltonian on an `s` grid, as `(s, statistics)`.
pub fn mlsr_profile(
    spec: &HamiltonianSpec,
    parity: Parity,
    s_grid: &[f64],
    bulk_trim: f64,
) -> Result<Vec<(f64, Result<SpectrumResult>)>> {
    check_grid(s_grid)?;
    let sector = parity_sector(spec, parity)?;
    let gen = RampGenerator::new(spec, Some(&sector))?;
    s_grid
        .iter()
        .map(|&s| {
            let values = symmetric_eigenvalues(gen.dense_at(s).as_ref())?;
            Ok((s, bulk_statistics(&values, bulk_trim)))
        })
        .collect()
}

fn check_grid(s_grid: &[f64]) -> Result<()> {
    match s_grid.iter().find(|s| !(0.0..=1.0).contains(*s)) {
        Some(s) => Err(Error::InvalidParameter {
            name: "s_grid",
            reason: format!("{s} is outside [0, 1]"),
        }),
        None => Ok(()),
    }
}

/// Which gap enters the denominator of the adiabatic estimate.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GapChoice {
    /// Per adjacent level `k = n ± 1`: `|⟨k|∂H|n⟩| / (e_k − e_n)²`.
    #[default]
    NearestNeighbor,
    /// `max_k |⟨k|∂H|n⟩| / min_k (e_k − e_n)²` over all `k ≠ n`.
    AllLevels,
}

/// Adiabatic time scale `max_s |⟨k|∂_s H|n⟩| / Δ_n(s)²` for level `level` in the even sector.
pub fn adiabatic_time_bound(
    spec: &HamiltonianSpec,
    s_grid: &[f64],
    level: usize,
    choice: GapChoice,
) -> Result<f64> {
    check_grid(s_grid)?;
    let sector = parity_sector(spec, Parity::Even)?;
    let gen = RampGenerator::new(spec, Some(&sector))?;
    let dh = gen.derivative();
    let d = gen.dim();
    if level >= d {
        return Err(Error::InvalidParameter {
            name: "level",
            reason: format!("level {level} outside a sector of dimension {d}"),
        });
    }
    const DEGENERACY_TOL: f64 = 1e-8;
    let mut worst = 0.0f64;
    for &s in s_grid {
        let evd = gen
            .dense_at(s)
            .self_adjoint_eigen(Side::Lower)
            .map_err(|e| Error::Eigensolver(format!("{e:?}")))?;
        let values: Vec<f64> = (0..d).map(|i| evd.S()[i]).collect();
        let v = evd.U();
        let vn = v.col(level);
        let dh_vn: Mat<f64> = &dh * vn.as_mat();
        let element = |k: usize| -> f64 {
            let vk = v.col(k);
            (0..d).map(|i| vk[i] * dh_vn[(i, 0)]).sum::<f64>().abs()
        };
        let neighbors: Vec<usize> = match choice {
            GapChoice::NearestNeighbor => [level.checked_sub(1), Some(level + 1)]
                .into_iter()
                .flatten()
                .filter(|&k| k < d)
                .collect(),
            GapChoice::AllLevels => (0..d).filter(|&k| k != level).collect(),
        };
        let min_gap = neighbors
            .iter()
            .map(|&k| (values[k] - values[level]).abs())
            .fold(f64::INFINITY, f64::min);
        if min_gap < DEGENERACY_TOL {
            return Err(Error::Degenerate { level, s, gap: min_gap });
        }
        let value = match choice {
            GapChoice::NearestNeighbor => neighbors
                .iter()
                .map(|&k| element(k) / (values[k] - values[level]).powi(2))
                .fold(0.0, f64::max),
            GapChoice::AllLevels => {
                neighbors.iter().map(|&k| element(k)).fold(0.0, f64::max) / (min_gap * min_gap)
            }
        };
        worst = worst.max(value);
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{mixer_hamiltonian, HamiltonianSpec};

    #[test]
    fn spacings_examples() {
        assert_eq!(level_spacings(&[0.0, 1.0, 3.0]).unwrap(), vec![1.0, 2.0]);
        let ladder: Vec<f64> = (0..6).map(|i| 0.5 * i as f64).collect();
        assert!(level_spacings(&ladder).unwrap().iter().all(|&g| g == 0.5));
        assert!(matches!(level_spacings(&[0.0, 2.0, 1.0]), Err(Error::Unsorted(2))));
    }

    #[test]
    fn mixer_spectrum_spacings() {
        let hm = mixer_hamiltonian(&HamiltonianSpec::nearest_neighbor(3)).unwrap();
        let vals = hm.hermitian_eigenvalues().unwrap();
        let gaps = level_spacings(&vals).unwrap();
        let expected = [2.0, 0.0, 0.0, 2.0, 0.0, 0.0, 2.0];
        for (g, e) in gaps.iter().zip(expected) {
            assert!((g - e).abs() < 1e-12, "{gaps:?}");
        }
        // every adjacent pair touches a degenerate multiplet
        assert!(matches!(
            spacing_ratios(&gaps, 1e-10),
            Err(Error::EmptyStatistics { skipped: 6 })
        ));
    }

    #[test]
    fn ratio_examples() {
        assert_eq!(spacing_ratios(&[1.0, 2.0], 1e-10).unwrap(), vec![0.5]);
        assert_eq!(spacing_ratios(&[2.0, 2.0], 1e-10).unwrap(), vec![1.0]);
        let stats = spacing_ratio_stats(&[1.0, 0.0, 1.0, 3.0], 1e-10).unwrap();
        assert_eq!(stats.ratios, vec![1.0 / 3.0]);
        assert_eq!(stats.skipped, 2);
    }

    #[test]
    fn equally_spaced_phases() {
        use std::f64::consts::PI;
        let r = SpectrumResult::from_phases(vec![0.0, PI / 2.0, PI, 3.0 * PI / 2.0], 1e-12).unwrap();
        assert_eq!(r.gaps.len(), 4);
        assert_eq!(r.ratios.len(), 4);
        assert!(r.ratios.iter().all(|&x| (x - 1.0).abs() < 1e-12));
    }

    #[test]
    fn trimming_needs_enough_levels() {
        let few: Vec<f64> = (0..8).map(f64::from).collect();
        assert!(matches!(
            bulk_statistics(&few, 0.05),
            Err(Error::TooFewLevels { retained: 8, .. })
        ));
    }

    #[test]
    fn mixer_end_ground_gap_is_two() {
        let spec = HamiltonianSpec::nearest_neighbor(6);
        let p = gap_profile(&spec, Parity::Even, &[0.0]).unwrap();
        assert!((p[0].ground_gap - 2.0).abs() < 1e-10, "{p:?}");
    }

    #[test]
    fn adiabatic_bound_zero_when_derivative_vanishes() {
        // H_P = H_M cannot be written with a diagonal H_P, so use N = 1 with
        // λ = 0: H(s) = (1−s)σx and ∂H = −σx is diagonal in the eigenbasis of H(s).
        let spec = HamiltonianSpec::new(1, vec![], vec![0.0]).unwrap();
        let bound = adiabatic_time_bound(&spec, &[0.2, 0.5], 0, GapChoice::NearestNeighbor).unwrap();
        assert!(bound.abs() < 1e-12, "{bound}");
    }

    #[test]
    fn adiabatic_bound_two_level_closed_form() {
        // H(s) = (1−s)σx + sλσz; for a field a σx + b σz with tan α = a/b the
        // transition element of ∂H = λσz − σx is |−cos α − λ sin α| and the gap 2E.
        let lambda = 0.8;
        let spec = HamiltonianSpec::new(1, vec![], vec![lambda]).unwrap();
        let grid = [0.1, 0.35, 0.6, 0.9];
        let expected = grid
            .iter()
            .map(|&s| {
                let (a, b) = (1.0 - s, s * lambda);
                let e = (a * a + b * b).sqrt();
                let alpha = a.atan2(b);
                (-alpha.cos() - lambda * alpha.sin()).abs() / (4.0 * e * e)
            })
            .fold(0.0, f64::max);
        for choice in [GapChoice::NearestNeighbor, GapChoice::AllLevels] {
            let got = adiabatic_time_bound(&spec, &grid, 0, choice).unwrap();
            assert!((got - expected).abs() < 1e-12 * expected.max(1.0), "{got} vs {expected}");
        }
    }

    #[test]
    fn adiabatic_bound_rejects_degenerate_level() {
        let spec = HamiltonianSpec::nearest_neighbor(3);
        // s = 0: the even sector of Σσx has degenerate excited levels
        let err = adiabatic_time_bound(&spec, &[0.0], 1, GapChoice::NearestNeighbor).unwrap_err();
        assert!(matches!(err, Error::Degenerate { .. }), "{err}");
    }
}
