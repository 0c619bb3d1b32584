//! Seeded reference ensembles for calibrating the spacing-ratio statistics.

use faer::{c64, Mat};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::linalg::{symmetric_eigenvalues, DenseOperator};
use crate::spectral::{bulk_statistics, mlsr_unitary, DEFAULT_BULK_TRIM};

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Real symmetric Gaussian matrix `(A + Aᵀ)/2` with i.i.d. standard normal `A`.
pub fn goe_matrix(dim: usize, seed: u64) -> Mat<f64> {
    let mut r = rng(seed);
    let a: Mat<f64> = Mat::from_fn(dim, dim, |_, _| r.sample(StandardNormal));
    Mat::from_fn(dim, dim, |i, j| 0.5 * (a[(i, j)] + a[(j, i)]))
}

/// Sorted i.i.d. uniform levels on `[0, 1)`.
pub fn poisson_levels(dim: usize, seed: u64) -> Vec<f64> {
    let mut r = rng(seed);
    let mut v: Vec<f64> = (0..dim).map(|_| r.random::<f64>()).collect();
    v.sort_by(f64::total_cmp);
    v
}

/// Haar-random unitary from the QR decomposition of a complex Ginibre matrix,
/// with the phases of `R`'s diagonal absorbed into `Q`.
pub fn cue_matrix(dim: usize, seed: u64) -> DenseOperator {
    let mut r = rng(seed);
    let scale = std::f64::consts::FRAC_1_SQRT_2;
    let z: Mat<c64> = Mat::from_fn(dim, dim, |_, _| {
        let re: f64 = r.sample(StandardNormal);
        let im: f64 = r.sample(StandardNormal);
        c64::new(re * scale, im * scale)
    });
    let qr = z.qr();
    let q = qr.compute_Q();
    let rr = qr.R();
    let phases: Vec<c64> = (0..dim)
        .map(|j| {
            let d = rr[(j, j)];
            let n = d.norm();
            if n == 0.0 {
                c64::new(1.0, 0.0)
            } else {
                d / n
            }
        })
        .collect();
    DenseOperator::from_fn(dim, |i, j| q[(i, j)] * phases[j])
}

/// Circular orthogonal matrix `VᵀV` with `V` drawn from the CUE.
pub fn coe_matrix(dim: usize, seed: u64) -> DenseOperator {
    let v = cue_matrix(dim, seed);
    DenseOperator::from_mat(v.as_mat().transpose() * v.as_mat())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Ensemble {
    Goe,
    Poisson,
    Coe,
    Cue,
}

impl Ensemble {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::Goe => "goe",
            Self::Poisson => "poisson",
            Self::Coe => "coe",
            Self::Cue => "cue",
        }
    }

    /// MLSR of one seeded draw: bulk-trimmed levels for GOE and Poisson, all
    /// eigenphases for the circular ensembles.
    pub fn sample_mlsr(self, dim: usize, seed: u64) -> Result<f64> {
        match self {
            Self::Goe => {
                let values = symmetric_eigenvalues(goe_matrix(dim, seed).as_ref())?;
                bulk_statistics(&values, DEFAULT_BULK_TRIM).map(|r| r.mlsr)
            }
            Self::Poisson => bulk_statistics(&poisson_levels(dim, seed), DEFAULT_BULK_TRIM).map(|r| r.mlsr),
            Self::Coe => mlsr_unitary(&coe_matrix(dim, seed)),
            Self::Cue => mlsr_unitary(&cue_matrix(dim, seed)),
        }
    }
}

/// Mean MLSR over independent draws with its standard error.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EnsembleEstimate {
    pub ensemble: Ensemble,
    pub dim: usize,
    pub samples: Vec<f64>,
    pub mean: f64,
    pub std_err: f64,
}

/// Averages `n_samples` draws seeded `first_seed, first_seed + 1, …`.
pub fn estimate_mlsr(ensemble: Ensemble, dim: usize, first_seed: u64, n_samples: usize) -> Result<EnsembleEstimate> {
    if n_samples < 2 {
        return Err(invalid("n_samples", "need at least two draws for a standard error"));
    }
    let samples = (0..n_samples as u64)
        .map(|k| ensemble.sample_mlsr(dim, first_seed.wrapping_add(k)))
        .collect::<Result<Vec<_>>>()?;
    let n = n_samples as f64;
    let mean = samples.iter().sum::<f64>() / n;
    let var = samples.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    Ok(EnsembleEstimate {
        ensemble,
        dim,
        samples,
        mean,
        std_err: (var / n).sqrt(),
    })
}
