//! Eigenvectors of ramp unitaries: entanglement against mean energy, the
//! chaos-onset time along a forward ramp, and entropy scaling in energy windows.

use std::f64::consts::TAU;

use faer::linalg::solvers::DenseSolveCore;
use faer::{c64, Mat};
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::evolution::{evolve_unitary_observed, EvolveOptions, RampKind, RampParams};
use crate::linalg::{check_dim, dot, DenseOperator};
use crate::model::RampGenerator;
use crate::spectral::{unitary_statistics, COE_MLSR};
use crate::states::half_chain_entropy;

/// Phase separation below which eigenvectors are treated as one degenerate cluster.
pub const DEGENERATE_PHASE_TOL: f64 = 1e-10;

/// Observable whose expectation labels each eigenvector.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Reference {
    #[serde(rename = "HM", alias = "hm")]
    Mixer,
    #[serde(rename = "HP", alias = "hp")]
    Problem,
}

#[derive(Clone, Debug, Serialize)]
pub struct EigenRecord {
    /// `μ` with `U|μ⟩ = e^{−iμ}|μ⟩`, in `[0, 2π)`.
    pub phase: f64,
    /// `⟨μ|H_ref|μ⟩`.
    pub mean_energy: f64,
    /// `⟨μ|H_ref|μ⟩ / N`.
    pub energy_density: f64,
    pub entropy: f64,
    /// Member of a cluster of nearly equal phases; its entropy depends on the basis choice.
    pub degenerate: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct EigenProfile {
    pub n_sites: usize,
    pub reference: Reference,
    /// Sorted by phase.
    pub records: Vec<EigenRecord>,
}

impl EigenProfile {
    /// Records outside degenerate clusters.
    pub fn resolved(&self) -> impl Iterator<Item = &EigenRecord> {
        self.records.iter().filter(|r| !r.degenerate)
    }
}

/// Diagonalizes `u` (acting on the generator's space) and profiles each eigenvector.
pub fn eigenprofile(u: &DenseOperator, gen: &RampGenerator, reference: Reference) -> Result<EigenProfile> {
    let d = gen.dim();
    check_dim(d, u.dim())?;
    let evd = u
        .as_mat()
        .eigen()
        .map_err(|e| Error::Eigensolver(format!("{e:?}")))?;
    let values = evd.S();
    let vectors = evd.U();
    let n = gen.n_sites();
    let mut order: Vec<(f64, usize)> = (0..d).map(|k| ((-values[k].arg()).rem_euclid(TAU), k)).collect();
    order.sort_by(|a, b| a.0.total_cmp(&b.0));

    let mut degenerate = vec![false; d];
    for i in 0..d {
        let next = (i + 1) % d;
        let mut gap = order[next].0 - order[i].0;
        if next == 0 {
            gap += TAU;
        }
        if d > 1 && gap < DEGENERATE_PHASE_TOL {
            degenerate[i] = true;
            degenerate[next] = true;
        }
    }

    let mut records = Vec::with_capacity(d);
    for (i, &(phase, k)) in order.iter().enumerate() {
        let mut v: Vec<c64> = (0..d).map(|r| vectors[(r, k)]).collect();
        let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        v.iter_mut().for_each(|z| *z /= norm);
        let mean_energy = reference_expectation(gen, reference, &v);
        let full = match gen.sector() {
            Some(sector) => sector.embed(&v)?,
            None => v,
        };
        records.push(EigenRecord {
            phase,
            mean_energy,
            energy_density: mean_energy / n as f64,
            entropy: half_chain_entropy(&full, n)?,
            degenerate: degenerate[i],
        });
    }
    Ok(EigenProfile {
        n_sites: n,
        reference,
        records,
    })
}

fn reference_expectation(gen: &RampGenerator, reference: Reference, v: &[c64]) -> f64 {
    match reference {
        Reference::Mixer => {
            let mut hv = vec![c64::new(0.0, 0.0); v.len()];
            gen.mixer().apply(v, &mut hv);
            dot(v, &hv).re
        }
        Reference::Problem => v
            .iter()
            .zip(gen.problem_diagonal())
            .map(|(z, e)| z.norm_sqr() * e)
            .sum(),
    }
}

/// MLSR of `U(t)` at one checkpoint; `None` when every spacing pair was degenerate.
#[derive(Clone, Debug, Serialize)]
pub struct OnsetPoint {
    pub t: f64,
    pub s: f64,
    pub mlsr: Option<f64>,
}

#[derive(Clone, Debug, Serialize)]
pub struct ChaosOnset {
    /// `(t*, s(t*))`, absent if the band was never entered for good.
    pub onset: Option<(f64, f64)>,
    pub trace: Vec<OnsetPoint>,
}

/// Checkpoints that must stay in the band after the first one.
const ONSET_PERSISTENCE: usize = 3;

/// Smallest checkpoint time at which the unitary's MLSR enters
/// `[r̄_COE − band, r̄_COE + band]` and stays there for the next three checkpoints.
///
/// `stride` defaults to `q/100` steps.
pub fn chaos_onset(
    gen: &RampGenerator,
    params: &RampParams,
    band: f64,
    stride: Option<usize>,
    options: &EvolveOptions,
) -> Result<ChaosOnset> {
    if params.kind() != RampKind::Forward {
        return Err(invalid("params", "chaos onset is defined on a forward ramp"));
    }
    let stride = stride.unwrap_or((params.total_steps() / 100).max(1));
    let opts = EvolveOptions {
        checkpoint_stride: Some(stride),
        ..options.clone()
    };
    let mut trace = Vec::new();
    evolve_unitary_observed(gen, params, &opts, |cp| {
        let mlsr = match unitary_statistics(&cp.block.to_operator()) {
            Ok(r) => Some(r.mlsr),
            Err(Error::EmptyStatistics { .. }) => None,
            Err(e) => return Err(e),
        };
        trace.push(OnsetPoint { t: cp.t, s: cp.s, mlsr });
        Ok(())
    })?;
    Ok(ChaosOnset {
        onset: onset_from_trace(&trace, band),
        trace,
    })
}

/// Onset rule of [`chaos_onset`] applied to an existing MLSR trace.
pub fn onset_from_trace(trace: &[OnsetPoint], band: f64) -> Option<(f64, f64)> {
    let inside = |p: &OnsetPoint| p.mlsr.is_some_and(|r| (r - COE_MLSR).abs() <= band);
    (0..trace.len())
        .find(|&i| i + ONSET_PERSISTENCE < trace.len() && trace[i..=i + ONSET_PERSISTENCE].iter().all(inside))
        .map(|i| (trace[i].t, trace[i].s))
}

/// Least-squares fit of window-averaged entropy against `N` in one energy window.
#[derive(Clone, Debug, Serialize)]
pub struct BinFit {
    pub center: f64,
    pub half_width: f64,
    /// `(N, S̄_A, number of eigenvectors in the window)`.
    pub points: Vec<(usize, f64, usize)>,
    pub slope: f64,
    pub intercept: f64,
    /// Root-mean-square residual of the linear fit.
    pub residual: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct ScalingFit {
    pub bins: Vec<BinFit>,
}

/// Spacing of the default energy-density bin centers on `[−1, 1]`.
pub const DEFAULT_BIN_SPACING: f64 = 0.05;

/// Default bin centers `−1, −0.95, …, 1`.
pub fn default_bin_centers() -> Vec<f64> {
    let n = (2.0 / DEFAULT_BIN_SPACING).round() as usize;
    (0..=n).map(|i| -1.0 + i as f64 * DEFAULT_BIN_SPACING).collect()
}

const MIN_SIZES: usize = 3;

/// Fits `S̄_A|_{E_W}(N) = aN + b` per energy-density window.
///
/// Each window starts with half-width `initial_half_width` and doubles until it
/// holds at least one resolved eigenvector for every system size.
pub fn scaling_regression(profiles: &[EigenProfile], centers: &[f64], initial_half_width: f64) -> Result<ScalingFit> {
    let mut sizes: Vec<usize> = profiles.iter().map(|p| p.n_sites).collect();
    sizes.sort_unstable();
    sizes.dedup();
    if sizes.len() < MIN_SIZES || sizes.len() != profiles.len() {
        return Err(Error::InsufficientSizes {
            required: MIN_SIZES,
            found: sizes.len(),
        });
    }
    if initial_half_width.is_nan() || initial_half_width <= 0.0 {
        return Err(invalid("initial_half_width", format!("{initial_half_width} must be positive")));
    }
    let bins = centers
        .iter()
        .map(|&center| {
            let mut half_width = initial_half_width;
            loop {
                let points: Vec<(usize, f64, usize)> = profiles
                    .iter()
                    .map(|p| {
                        let inside: Vec<f64> = p
                            .resolved()
                            .filter(|r| (r.energy_density - center).abs() <= half_width)
                            .map(|r| r.entropy)
                            .collect();
                        let mean = inside.iter().sum::<f64>() / inside.len().max(1) as f64;
                        (p.n_sites, mean, inside.len())
                    })
                    .collect();
                if points.iter().all(|p| p.2 > 0) {
                    let (slope, intercept, residual) = linear_fit(&points);
                    return Ok(BinFit {
                        center,
                        half_width,
                        points,
                        slope,
                        intercept,
                        residual,
                    });
                }
                if half_width > 4.0 {
                    return Err(invalid("profiles", format!("no resolved eigenvectors near E_d = {center}")));
                }
                half_width *= 2.0;
            }
        })
        .collect::<Result<_>>()?;
    Ok(ScalingFit { bins })
}

fn linear_fit(points: &[(usize, f64, usize)]) -> (f64, f64, f64) {
    let k = points.len() as f64;
    let mx = points.iter().map(|p| p.0 as f64).sum::<f64>() / k;
    let my = points.iter().map(|p| p.1).sum::<f64>() / k;
    let sxx: f64 = points.iter().map(|p| (p.0 as f64 - mx).powi(2)).sum();
    let sxy: f64 = points.iter().map(|p| (p.0 as f64 - mx) * (p.1 - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let residual = (points
        .iter()
        .map(|p| (p.1 - slope * p.0 as f64 - intercept).powi(2))
        .sum::<f64>()
        / k)
        .sqrt();
    (slope, intercept, residual)
}

/// Pearson correlation coefficient.
pub fn pearson(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let cov: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let vx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    let vy: f64 = y.iter().map(|b| (b - my).powi(2)).sum();
    cov / (vx * vy).sqrt()
}

/// Reconstructs `Σ e^{−iμ_l} |μ_l⟩⟨μ_l|` from an eigendecomposition (used to check it).
pub fn spectral_reconstruction(u: &DenseOperator) -> Result<DenseOperator> {
    let evd = u
        .as_mat()
        .eigen()
        .map_err(|e| Error::Eigensolver(format!("{e:?}")))?;
    let d = u.dim();
    let v = evd.U();
    let scaled = Mat::from_fn(d, d, |i, k| v[(i, k)] * evd.S()[k]);
    let inv = v
        .partial_piv_lu()
        .inverse();
    Ok(DenseOperator::from_mat(&scaled * &inv))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{HamiltonianSpec, Parity, parity_sector};
    use crate::states::page_value;

    fn synthetic(n: usize, entropy: impl Fn(f64) -> f64) -> EigenProfile {
        let records = (0..41)
            .map(|i| {
                let e = -1.0 + 0.05 * i as f64;
                EigenRecord {
                    phase: 0.1 * i as f64,
                    mean_energy: e * n as f64,
                    energy_density: e,
                    entropy: entropy(e),
                    degenerate: false,
                }
            })
            .collect();
        EigenProfile {
            n_sites: n,
            reference: Reference::Mixer,
            records,
        }
    }

    #[test]
    fn regression_recovers_page_line() {
        let profiles: Vec<_> = [8, 10, 12].iter().map(|&n| synthetic(n, |_| page_value(n))).collect();
        let fit = scaling_regression(&profiles, &default_bin_centers(), 0.05).unwrap();
        for b in &fit.bins {
            assert!((b.slope - std::f64::consts::LN_2 / 2.0).abs() < 1e-12);
            assert!((b.intercept + 0.5).abs() < 1e-12);
            assert!(b.residual < 1e-12);
        }
    }

    #[test]
    fn regression_on_constant_entropy() {
        let profiles: Vec<_> = [6, 8, 10].iter().map(|&n| synthetic(n, |_| 0.7)).collect();
        let fit = scaling_regression(&profiles, &[0.0, 0.5], 0.05).unwrap();
        for b in &fit.bins {
            assert!(b.slope.abs() < 1e-12 && (b.intercept - 0.7).abs() < 1e-12);
        }
    }

    #[test]
    fn regression_widens_empty_bins() {
        let mut profiles: Vec<_> = [6, 8, 10].iter().map(|&n| synthetic(n, |_| 1.0)).collect();
        profiles[0].records.retain(|r| r.energy_density.abs() > 0.12);
        let fit = scaling_regression(&profiles, &[0.0], 0.05).unwrap();
        assert_eq!(fit.bins[0].half_width, 0.2);
        assert!(matches!(
            scaling_regression(&profiles[..2], &[0.0], 0.05),
            Err(Error::InsufficientSizes { .. })
        ));
    }

    #[test]
    fn diagonal_unitary_has_product_eigenvectors() {
        let spec = HamiltonianSpec::nearest_neighbor(4);
        let gen = RampGenerator::new(&spec, None).unwrap();
        let phases: Vec<f64> = (0..16).map(|k| 0.3 * k as f64 + 0.01 * (k * k) as f64).collect();
        let u = DenseOperator::from_fn(16, |i, j| {
            if i == j {
                c64::from_polar(1.0, -phases[i])
            } else {
                c64::new(0.0, 0.0)
            }
        });
        let profile = eigenprofile(&u, &gen, Reference::Problem).unwrap();
        assert_eq!(profile.records.len(), 16);
        assert!(profile.records.iter().all(|r| r.entropy < 1e-12 && !r.degenerate));
        assert!(profile.records.windows(2).all(|w| w[0].phase <= w[1].phase));
        let diag = spec.problem_diagonal();
        let (lo, hi) = diag.iter().fold((f64::MAX, f64::MIN), |a, &e| (a.0.min(e), a.1.max(e)));
        assert!(profile.records.iter().all(|r| r.mean_energy >= lo - 1e-12 && r.mean_energy <= hi + 1e-12));
    }

    #[test]
    fn identity_is_one_degenerate_cluster() {
        let spec = HamiltonianSpec::nearest_neighbor(3);
        let gen = RampGenerator::new(&spec, None).unwrap();
        let profile = eigenprofile(&DenseOperator::identity(8), &gen, Reference::Mixer).unwrap();
        assert!(profile.records.iter().all(|r| r.degenerate));
        assert_eq!(profile.resolved().count(), 0);
    }

    #[test]
    fn onset_needs_persistence() {
        let pt = |mlsr: Option<f64>| OnsetPoint { t: 0.0, s: 0.0, mlsr };
        let mut trace: Vec<OnsetPoint> = [None, Some(0.53), Some(0.4), Some(0.53), Some(0.525), Some(0.53), Some(0.531)]
            .into_iter()
            .map(pt)
            .collect();
        for (i, p) in trace.iter_mut().enumerate() {
            p.t = i as f64;
        }
        assert_eq!(onset_from_trace(&trace, 0.01), Some((3.0, 0.0)));
        assert_eq!(onset_from_trace(&trace[..6], 0.01), None);
    }

    #[test]
    fn integrable_drive_never_turns_chaotic() {
        let spec = HamiltonianSpec::new(6, vec![], vec![0.0; 6]).unwrap();
        let sector = parity_sector(&spec, Parity::Even).unwrap();
        let gen = RampGenerator::new(&spec, Some(&sector)).unwrap();
        let params = RampParams::new(RampKind::Forward, 20.0, 0.5).unwrap();
        let onset = chaos_onset(&gen, &params, 0.01, Some(2), &EvolveOptions::default()).unwrap();
        assert!(onset.onset.is_none());
        assert_eq!(onset.trace.len(), 21);
    }

    #[test]
    fn reconstruction_matches_ramp_unitary() {
        let spec = HamiltonianSpec::nearest_neighbor(5);
        let sector = parity_sector(&spec, Parity::Even).unwrap();
        let params = RampParams::new(RampKind::Forward, 5.0, 0.5).unwrap();
        let r = crate::evolution::evolve_ramp(&spec, &params, Some(&sector), &EvolveOptions::default()).unwrap();
        let rec = spectral_reconstruction(&r.unitary).unwrap();
        assert!(rec.max_abs_diff(&r.unitary) < 1e-8);
    }
}
