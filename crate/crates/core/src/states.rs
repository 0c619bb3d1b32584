//! Initial-state families, fidelities and half-chain entanglement entropies.
//!
//! The entanglement cut puts the `⌊N/2⌋` left-most sites (the low bits of the
//! basis index) in block `A`. Reshaping a state column-major into a
//! `2^{|A|} × 2^{N−|A|}` matrix `M` gives `ρ_A = M M†`.

use std::f64::consts::LN_2;

use faer::{c64, Mat, MatRef};
use serde::Serialize;

use crate::error::{invalid, Error, Result};
use crate::evolution::{evolve_states, EvolveOptions, RampKind, RampParams, StateBlock};
use crate::linalg::{check_dim, dot, norm_sqr, DenseOperator};
use crate::model::{parity_sector, HamiltonianSpec, Parity, ParitySector, RampGenerator};
use crate::pauli::check_dense_capacity;

/// Normalized state of an `n_sites` chain in the full computational basis.
#[derive(Clone, Debug, PartialEq)]
pub struct PureState {
    n_sites: usize,
    amplitudes: Vec<c64>,
}

const NORM_TOL: f64 = 1e-12;

impl PureState {
    pub fn new(n_sites: usize, amplitudes: Vec<c64>) -> Result<Self> {
        check_dim(1 << n_sites, amplitudes.len())?;
        let norm = norm_sqr(&amplitudes).sqrt();
        if (norm - 1.0).abs() > NORM_TOL {
            return Err(invalid("amplitudes", format!("norm {norm} differs from 1")));
        }
        Ok(Self { n_sites, amplitudes })
    }

    pub fn n_sites(&self) -> usize {
        self.n_sites
    }

    pub fn amplitudes(&self) -> &[c64] {
        &self.amplitudes
    }

    pub fn into_amplitudes(self) -> Vec<c64> {
        self.amplitudes
    }

    /// `⟨ψ|A|ψ⟩`, real part.
    pub fn expectation(&self, op: &DenseOperator) -> Result<f64> {
        Ok(op.expectation(&self.amplitudes)?.re)
    }

    /// Half-chain entanglement entropy.
    pub fn half_chain_entropy(&self) -> Result<f64> {
        half_chain_entropy(&self.amplitudes, self.n_sites)
    }
}

/// `|θ, φ⟩ = (cos(θ/2)|0⟩ + e^{iφ} sin(θ/2)|1⟩)^{⊗N}`, Bloch vector
/// `(sin θ cos φ, sin θ sin φ, cos θ)` on every site.
pub fn spin_coherent_state(theta: f64, phi: f64, n_sites: usize) -> Result<PureState> {
    check_dense_capacity("spin_coherent_state", n_sites)?;
    if !(0.0..=std::f64::consts::PI).contains(&theta) {
        return Err(invalid("theta", format!("{theta} is outside [0, π]")));
    }
    let up = c64::new((theta / 2.0).cos(), 0.0);
    let down = c64::from_polar((theta / 2.0).sin(), phi);
    let powers_up: Vec<c64> = (0..=n_sites).map(|k| up.powi(k as i32)).collect();
    let powers_down: Vec<c64> = (0..=n_sites).map(|k| down.powi(k as i32)).collect();
    let amplitudes = (0..1usize << n_sites)
        .map(|w| {
            let k = w.count_ones() as usize;
            powers_up[n_sites - k] * powers_down[k]
        })
        .collect();
    PureState::new(n_sites, amplitudes)
}

fn binomial(n: usize, k: usize) -> f64 {
    if k > n {
        return 0.0;
    }
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// Symmetric state with `k` sites in `|+⟩` and the rest in `|−⟩`, so that
/// `D_0 = |−⟩^{⊗N}` and `H_M D_k = (2k − N) D_k`.
pub fn dicke_state(k: usize, n_sites: usize) -> Result<PureState> {
    check_dense_capacity("dicke_state", n_sites)?;
    if k > n_sites {
        return Err(invalid("k", format!("{k} exceeds N = {n_sites}")));
    }
    // ⟨w|D_k⟩ ∝ Σ_j C(m, j) C(N−m, k−j) (−1)^{m−j} with m = |w|: choose j of the
    // |+⟩ factors on sites where w has a 1 and k−j on sites where it has a 0
    let by_weight: Vec<f64> = (0..=n_sites)
        .map(|m| {
            (0..=k.min(m))
                .map(|j| {
                    let sign = if (m - j) % 2 == 0 { 1.0 } else { -1.0 };
                    sign * binomial(m, j) * binomial(n_sites - m, k - j)
                })
                .sum()
        })
        .collect();
    let scale = (binomial(n_sites, k) * (1u64 << n_sites) as f64).sqrt().recip();
    let amplitudes = (0..1usize << n_sites)
        .map(|w| c64::new(by_weight[w.count_ones() as usize] * scale, 0.0))
        .collect();
    PureState::new(n_sites, amplitudes)
}

/// `|⟨ψ|χ⟩|²`.
pub fn fidelity(psi: &[c64], chi: &[c64]) -> Result<f64> {
    check_dim(psi.len(), chi.len())?;
    Ok(dot(psi, chi).norm_sqr().min(1.0))
}

/// `ρ_A = tr_B |ψ⟩⟨ψ|` for `A` the first `cut` sites.
pub fn reduced_density_matrix(psi: &[c64], n_sites: usize, cut: usize) -> Result<DenseOperator> {
    check_dim(1 << n_sites, psi.len())?;
    if cut == 0 || cut >= n_sites {
        return Err(invalid("cut", format!("{cut} is outside [1, {}]", n_sites.saturating_sub(1))));
    }
    let m = MatRef::from_column_major_slice(psi, 1 << cut, 1 << (n_sites - cut));
    Ok(DenseOperator::from_mat(m * m.adjoint()))
}

const DENSITY_TOL: f64 = 1e-8;
const EIGEN_FLOOR: f64 = 1e-14;

/// Von Neumann entropy `−Σ λ ln λ` in nats.
pub fn entanglement_entropy(rho: &DenseOperator) -> Result<f64> {
    let trace = rho.trace();
    if (trace.re - 1.0).abs() > DENSITY_TOL || trace.im.abs() > DENSITY_TOL {
        return Err(Error::InvalidDensityMatrix(format!("trace {trace}")));
    }
    let herm = rho.hermiticity_residual();
    if herm > DENSITY_TOL {
        return Err(Error::InvalidDensityMatrix(format!("hermiticity residual {herm:.3e}")));
    }
    let values = rho.hermitian_eigenvalues()?;
    if values[0] < -DENSITY_TOL {
        return Err(Error::InvalidDensityMatrix(format!("negative eigenvalue {}", values[0])));
    }
    Ok(entropy_of_spectrum(&values))
}

fn entropy_of_spectrum(values: &[f64]) -> f64 {
    values
        .iter()
        .filter(|&&l| l > EIGEN_FLOOR)
        .map(|&l| -l * l.ln())
        .sum::<f64>()
        .max(0.0)
}

/// Entropy of the `⌊N/2⌋` left-most sites of a pure state.
pub fn half_chain_entropy(psi: &[c64], n_sites: usize) -> Result<f64> {
    cut_entropy(psi, n_sites, n_sites / 2)
}

/// Entropy across an arbitrary cut, diagonalizing the smaller reduced matrix.
pub fn cut_entropy(psi: &[c64], n_sites: usize, cut: usize) -> Result<f64> {
    check_dim(1 << n_sites, psi.len())?;
    if cut == 0 || cut >= n_sites {
        return Err(invalid("cut", format!("{cut} is outside [1, {}]", n_sites.saturating_sub(1))));
    }
    let m = MatRef::from_column_major_slice(psi, 1 << cut, 1 << (n_sites - cut));
    let gram: Mat<c64> = if cut <= n_sites - cut {
        m * m.adjoint()
    } else {
        m.adjoint() * m
    };
    let values = DenseOperator::from_mat(gram).hermitian_eigenvalues()?;
    Ok(entropy_of_spectrum(&values))
}

/// Page's estimate `(N/2) ln 2 − 1/2` for the half-chain entropy of a random state.
pub fn page_value(n_sites: usize) -> f64 {
    n_sites as f64 / 2.0 * LN_2 - 0.5
}

/// Largest possible half-chain entropy, `⌊N/2⌋ ln 2`.
pub fn max_entropy(n_sites: usize) -> f64 {
    (n_sites / 2) as f64 * LN_2
}

/// One point of a spin-coherent-state sweep.
#[derive(Clone, Debug, Serialize)]
pub struct ScsRecord {
    pub phi: f64,
    /// `⟨H_M⟩/N` of the initial state.
    pub energy_density: f64,
    /// `S_A` at the end of the ramp (`T` or `2T`).
    pub entropy_final: f64,
    /// `S_A(T)` for cyclic ramps.
    pub entropy_turning: Option<f64>,
    /// `|⟨ψ(2T)|ψ(0)⟩|²` for cyclic ramps.
    pub fidelity: Option<f64>,
}

/// One Dicke state through a cyclic ramp.
#[derive(Clone, Debug, Serialize)]
pub struct DickeRecord {
    pub k: usize,
    pub energy_density: f64,
    pub entropy_forward: f64,
    pub entropy_cyclic: f64,
    pub fidelity_cyclic: f64,
}

/// Evolves even-parity initial states in the even sector.
struct SectorBatch {
    sector: ParitySector,
    gen: RampGenerator,
}

impl SectorBatch {
    fn new(spec: &HamiltonianSpec) -> Result<Self> {
        let sector = parity_sector(spec, Parity::Even)?;
        let gen = RampGenerator::new(spec, Some(&sector))?;
        Ok(Self { sector, gen })
    }

    fn project(&self, state: &PureState) -> Result<Vec<c64>> {
        let v = self.sector.project(state.amplitudes())?;
        let leak = 1.0 - norm_sqr(&v);
        if leak > 1e-10 {
            return Err(invalid("initial_state", format!("{leak:.3e} of the weight lies outside the even sector")));
        }
        Ok(v)
    }

    fn energy_density(&self, v: &[c64]) -> f64 {
        let mut hv = vec![c64::new(0.0, 0.0); v.len()];
        self.gen.mixer().apply(v, &mut hv);
        dot(v, &hv).re / self.gen.n_sites() as f64
    }

    fn entropy(&self, v: &[c64]) -> Result<f64> {
        half_chain_entropy(&self.sector.embed(v)?, self.gen.n_sites())
    }
}

/// Evolves `|π/2, φ⟩` for every `φ` in the grid and records entropies (and the
/// return fidelity for cyclic ramps).
pub fn scs_sweep(
    spec: &HamiltonianSpec,
    params: &RampParams,
    phi_grid: &[f64],
    options: &EvolveOptions,
) -> Result<Vec<ScsRecord>> {
    if phi_grid.is_empty() {
        return Err(invalid("phi_grid", "empty grid"));
    }
    let n = spec.n_sites();
    let batch = SectorBatch::new(spec)?;
    let initial: Vec<Vec<c64>> = phi_grid
        .iter()
        .map(|&phi| batch.project(&spin_coherent_state(std::f64::consts::FRAC_PI_2, phi, n)?))
        .collect::<Result<_>>()?;
    let block = StateBlock::from_columns(batch.gen.dim(), &initial)?;
    let out = evolve_states(&batch.gen, params, options, block)?;
    phi_grid
        .iter()
        .enumerate()
        .map(|(j, &phi)| {
            let fin = out.final_states.column(j);
            let cyclic = params.kind() == RampKind::Cyclic;
            Ok(ScsRecord {
                phi,
                energy_density: batch.energy_density(&initial[j]),
                entropy_final: batch.entropy(fin)?,
                entropy_turning: match &out.turning_states {
                    Some(t) => Some(batch.entropy(t.column(j))?),
                    None => None,
                },
                fidelity: if cyclic { Some(fidelity(fin, &initial[j])?) } else { None },
            })
        })
        .collect()
}

/// Runs each Dicke state `D_k` through a cyclic ramp of one-way time `T`.
pub fn dicke_sweep(
    spec: &HamiltonianSpec,
    total_time: f64,
    dt: f64,
    ks: &[usize],
    options: &EvolveOptions,
) -> Result<Vec<DickeRecord>> {
    let n = spec.n_sites();
    let params = RampParams::new(RampKind::Cyclic, total_time, dt)?;
    let batch = SectorBatch::new(spec)?;
    let initial: Vec<Vec<c64>> = ks
        .iter()
        .map(|&k| batch.project(&dicke_state(k, n)?))
        .collect::<Result<_>>()?;
    let block = StateBlock::from_columns(batch.gen.dim(), &initial)?;
    let out = evolve_states(&batch.gen, &params, options, block)?;
    let turning = out.turning_states.expect("cyclic ramps record the turning point");
    ks.iter()
        .enumerate()
        .map(|(j, &k)| {
            let fin = out.final_states.column(j);
            Ok(DickeRecord {
                k,
                energy_density: batch.energy_density(&initial[j]),
                entropy_forward: batch.entropy(turning.column(j))?,
                entropy_cyclic: batch.entropy(fin)?,
                fidelity_cyclic: fidelity(fin, &initial[j])?,
            })
        })
        .collect()
}
