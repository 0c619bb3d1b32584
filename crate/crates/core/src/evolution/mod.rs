//! Annealing schedules and time-ordered propagation of states and full unitaries.
//!
//! A ramp of `q = T_tot/Δt` steps applies `exp(−iΔt H(s_m))` for `m = 0, …, q−1`
//! by left multiplication, with `s_m` taken at the left edge of each step unless
//! midpoint sampling is requested. Step values of `s` are exact rationals `m/q₁`,
//! so the backward leg of a cyclic ramp revisits bit-identical `s` values.
//!
//! Two step evaluators are available: a matrix-free Chebyshev expansion on the
//! sparse generator (default) and dense eigendecomposition of `H(s)`. Both agree
//! to roundoff; the Chebyshev route avoids one `O(d³)` eigensolve per step.

mod chebyshev;

use std::collections::HashMap;
use std::sync::Arc;

use faer::linalg::matmul::matmul;
use faer::{c64, Accum, Mat, MatMut, MatRef, Par, Side};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{check_dim, DenseOperator};
use crate::model::{HamiltonianSpec, ParitySector, RampGenerator};

pub use chebyshev::bessel_j_sequence;
use chebyshev::ChebyshevStep;

/// Step used for state-level experiments.
pub const STATE_DT: f64 = 0.05;
/// Step used for unitary-spectrum experiments.
pub const UNITARY_DT: f64 = 0.5;

/// Default one-way ramp time `T = 3N²`.
pub fn default_total_time(n_sites: usize) -> f64 {
    3.0 * (n_sites * n_sites) as f64
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RampKind {
    /// `s: 0 → 1` over `[0, T]`.
    Forward,
    /// `s: 0 → 1 → 0` over `[0, 2T]`.
    Cyclic,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Sampling {
    /// `s` evaluated at `mΔt`.
    #[default]
    LeftEdge,
    /// `s` evaluated at `(m + ½)Δt`.
    Midpoint,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PropagatorMethod {
    #[default]
    Chebyshev,
    /// Dense `V e^{−iΔtE} Vᵀ` per step, with a bounded cache keyed by `s`.
    Eigen,
}

/// Validated ramp parameters; `T/Δt` is an integer `q₁` by construction.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct RampParams {
    kind: RampKind,
    total_time: f64,
    dt: f64,
    steps_per_leg: usize,
}

impl RampParams {
    pub fn new(kind: RampKind, total_time: f64, dt: f64) -> Result<Self> {
        if !(dt > 0.0 && dt < 1.0) {
            return Err(Error::InvalidParameter {
                name: "dt",
                reason: format!("{dt} is outside (0, 1)"),
            });
        }
        if !(total_time > 0.0 && total_time.is_finite()) {
            return Err(Error::InvalidParameter {
                name: "total_time",
                reason: format!("{total_time} must be positive and finite"),
            });
        }
        let ratio = total_time / dt;
        let steps = ratio.round();
        if (ratio - steps).abs() > 1e-9 * ratio.max(1.0) || steps < 1.0 {
            return Err(Error::NonIntegerSteps(ratio));
        }
        Ok(Self {
            kind,
            total_time,
            dt,
            steps_per_leg: steps as usize,
        })
    }

    pub fn kind(&self) -> RampKind {
        self.kind
    }

    /// One-way ramp time `T`.
    pub fn total_time(&self) -> f64 {
        self.total_time
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn steps_per_leg(&self) -> usize {
        self.steps_per_leg
    }

    /// `q = T_tot/Δt`.
    pub fn total_steps(&self) -> usize {
        match self.kind {
            RampKind::Forward => self.steps_per_leg,
            RampKind::Cyclic => 2 * self.steps_per_leg,
        }
    }

    /// `T_tot`: `T` for forward ramps, `2T` for cyclic ones.
    pub fn duration(&self) -> f64 {
        self.total_steps() as f64 * self.dt
    }

    pub fn time_at_step(&self, m: usize) -> f64 {
        m as f64 * self.dt
    }

    /// `s(t)`.
    pub fn schedule_value(&self, t: f64) -> Result<f64> {
        let end = self.duration();
        let slack = 1e-12 * end;
        if !(t >= -slack && t <= end + slack) {
            return Err(Error::InvalidParameter {
                name: "t",
                reason: format!("{t} is outside [0, {end}]"),
            });
        }
        let t = t.clamp(0.0, end);
        let tt = self.total_time;
        let s = match self.kind {
            RampKind::Forward => t / tt,
            RampKind::Cyclic if t <= tt => t / tt,
            RampKind::Cyclic => (2.0 * tt - t) / tt,
        };
        Ok(s.clamp(0.0, 1.0))
    }

    /// Exact `s` of step `m` as a ratio of integers.
    pub fn step_s(&self, m: usize, sampling: Sampling) -> f64 {
        let q1 = self.steps_per_leg;
        match sampling {
            Sampling::LeftEdge => {
                let num = if m <= q1 { m } else { 2 * q1 - m };
                num as f64 / q1 as f64
            }
            Sampling::Midpoint => {
                let h = 2 * m + 1;
                let num = if h < 2 * q1 { h } else { 4 * q1 - h };
                num as f64 / (2 * q1) as f64
            }
        }
    }
}

#[derive(Clone, Debug)]
pub struct EvolveOptions {
    pub method: PropagatorMethod,
    pub sampling: Sampling,
    /// Record a checkpoint every this many steps (plus the start and the end).
    pub checkpoint_stride: Option<usize>,
    /// For cyclic ramps without checkpoints, obtain `U(2T)` from `U(T)` through
    /// time reversal of the real symmetric generator instead of running the backward leg.
    pub time_reversal: bool,
    /// Memory cap for cached eigen-route propagators.
    pub cache_budget_bytes: usize,
}

impl Default for EvolveOptions {
    fn default() -> Self {
        Self {
            method: PropagatorMethod::Chebyshev,
            sampling: Sampling::LeftEdge,
            checkpoint_stride: None,
            time_reversal: true,
            cache_budget_bytes: 1 << 30,
        }
    }
}

/// Column-major block of `ncols` vectors of length `dim`, evolved together.
#[derive(Clone, Debug, PartialEq)]
pub struct StateBlock {
    dim: usize,
    ncols: usize,
    data: Vec<c64>,
}

impl StateBlock {
    pub fn identity(dim: usize) -> Self {
        let mut data = vec![c64::new(0.0, 0.0); dim * dim];
        for i in 0..dim {
            data[i * dim + i] = c64::new(1.0, 0.0);
        }
        Self { dim, ncols: dim, data }
    }

    pub fn from_columns(dim: usize, columns: &[Vec<c64>]) -> Result<Self> {
        let mut data = Vec::with_capacity(dim * columns.len());
        for c in columns {
            check_dim(dim, c.len())?;
            data.extend_from_slice(c);
        }
        Ok(Self {
            dim,
            ncols: columns.len(),
            data,
        })
    }

    pub fn from_operator(op: &DenseOperator) -> Self {
        let d = op.dim();
        let m = op.as_mat();
        let mut data = Vec::with_capacity(d * d);
        for j in 0..d {
            data.extend((0..d).map(|i| m[(i, j)]));
        }
        Self { dim: d, ncols: d, data }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn ncols(&self) -> usize {
        self.ncols
    }

    pub fn column(&self, j: usize) -> &[c64] {
        &self.data[j * self.dim..(j + 1) * self.dim]
    }

    pub fn columns(&self) -> impl Iterator<Item = &[c64]> {
        self.data.chunks_exact(self.dim)
    }

    pub fn as_mat(&self) -> MatRef<'_, c64> {
        MatRef::from_column_major_slice(&self.data, self.dim, self.ncols)
    }

    fn as_mat_mut(&mut self) -> MatMut<'_, c64> {
        MatMut::from_column_major_slice_mut(&mut self.data, self.dim, self.ncols)
    }

    /// The block as a square operator; panics unless `ncols == dim`.
    pub fn to_operator(&self) -> DenseOperator {
        assert_eq!(self.dim, self.ncols, "block is not square");
        DenseOperator::from_mat(self.as_mat().to_owned())
    }

    fn conjugate_in_place(&mut self) {
        for z in self.data.iter_mut() {
            *z = z.conj();
        }
    }
}

/// Stepper for `X ← exp(−iΔt H(s)) X` on one generator.
pub struct Propagator<'a> {
    gen: &'a RampGenerator,
    dt: f64,
    method: PropagatorMethod,
    cache: HashMap<u64, Arc<Mat<c64>>>,
    cache_capacity: usize,
}

impl<'a> Propagator<'a> {
    pub fn new(gen: &'a RampGenerator, dt: f64, method: PropagatorMethod) -> Self {
        Self::with_cache_budget(gen, dt, method, EvolveOptions::default().cache_budget_bytes)
    }

    pub fn with_cache_budget(gen: &'a RampGenerator, dt: f64, method: PropagatorMethod, budget_bytes: usize) -> Self {
        let d = gen.dim().max(1);
        Self {
            gen,
            dt,
            method,
            cache: HashMap::new(),
            cache_capacity: budget_bytes / (d * d * std::mem::size_of::<c64>()),
        }
    }

    pub fn dim(&self) -> usize {
        self.gen.dim()
    }

    /// Dense `exp(−iΔt H(s))`.
    pub fn step_matrix(&mut self, s: f64) -> Result<Arc<Mat<c64>>> {
        if let Some(p) = self.cache.get(&s.to_bits()) {
            return Ok(Arc::clone(p));
        }
        let p = Arc::new(real_symmetric_exponential(self.gen.dense_at(s).as_ref(), self.dt)?);
        if self.cache.len() < self.cache_capacity {
            self.cache.insert(s.to_bits(), Arc::clone(&p));
        }
        Ok(p)
    }

    pub fn step(&mut self, s: f64, block: &mut StateBlock) -> Result<()> {
        check_dim(self.dim(), block.dim)?;
        match self.method {
            PropagatorMethod::Chebyshev => {
                ChebyshevStep::new(self.gen, s, self.dt).apply(&mut block.data);
            }
            PropagatorMethod::Eigen => {
                let p = self.step_matrix(s)?;
                let mut out = Mat::<c64>::zeros(block.dim, block.ncols);
                matmul(out.as_mut(), Accum::Replace, p.as_ref(), block.as_mat(), c64::new(1.0, 0.0), Par::rayon(0));
                block.as_mat_mut().copy_from(out.as_ref());
            }
        }
        Ok(())
    }

    /// Number of Chebyshev terms used at `s` (diagnostic for cost estimates).
    pub fn chebyshev_terms(&self, s: f64) -> usize {
        ChebyshevStep::new(self.gen, s, self.dt).n_terms()
    }
}

fn real_symmetric_exponential(h: MatRef<'_, f64>, dt: f64) -> Result<Mat<c64>> {
    let evd = h
        .self_adjoint_eigen(Side::Lower)
        .map_err(|e| Error::Eigensolver(format!("{e:?}")))?;
    let d = h.nrows();
    let v = evd.U();
    let e: Vec<f64> = (0..d).map(|i| evd.S()[i]).collect();
    let vc = Mat::from_fn(d, d, |i, k| v[(i, k)] * (dt * e[k]).cos());
    let vs = Mat::from_fn(d, d, |i, k| v[(i, k)] * (dt * e[k]).sin());
    let re = &vc * v.transpose();
    let im = &vs * v.transpose();
    Ok(Mat::from_fn(d, d, |i, j| c64::new(re[(i, j)], -im[(i, j)])))
}

/// `exp(−iΔt H)` of a Hermitian operator through its eigendecomposition.
pub fn step_propagator(h: &DenseOperator, dt: f64) -> Result<DenseOperator> {
    if h.max_imag() == 0.0 {
        return Ok(DenseOperator::from_mat(real_symmetric_exponential(h.real_part().as_ref(), dt)?));
    }
    let evd = h.hermitian_eigen()?;
    let d = h.dim();
    let v = &evd.vectors;
    let scaled = Mat::from_fn(d, d, |i, k| v[(i, k)] * c64::from_polar(1.0, -dt * evd.values[k]));
    Ok(DenseOperator::from_mat(&scaled * v.adjoint()))
}

/// `A(t) = U† A U`.
pub fn heisenberg_conjugate(a: &DenseOperator, u: &DenseOperator) -> Result<DenseOperator> {
    check_dim(a.dim(), u.dim())?;
    Ok(DenseOperator::from_mat(u.as_mat().adjoint() * a.as_mat() * u.as_mat()))
}

/// Evolution operator at one checkpoint.
#[derive(Clone, Debug)]
pub struct Checkpoint {
    pub step: usize,
    pub t: f64,
    pub s: f64,
    pub unitary: DenseOperator,
}

/// View handed to checkpoint observers.
pub struct CheckpointView<'b> {
    pub step: usize,
    pub t: f64,
    pub s: f64,
    pub block: &'b StateBlock,
}

#[derive(Clone, Debug)]
pub struct RampResult {
    pub unitary: DenseOperator,
    /// `U(T)` for cyclic ramps.
    pub turning_point: Option<DenseOperator>,
    /// `s` used by each step.
    pub schedule_trace: Vec<f64>,
    pub checkpoints: Vec<Checkpoint>,
}

/// Accumulates `U(T_tot)` in the full space or a parity sector, storing checkpoints.
pub fn evolve_ramp(
    spec: &HamiltonianSpec,
    params: &RampParams,
    sector: Option<&ParitySector>,
    options: &EvolveOptions,
) -> Result<RampResult> {
    let gen = RampGenerator::new(spec, sector)?;
    let mut checkpoints = Vec::new();
    let mut result = evolve_unitary_observed(&gen, params, options, |cp| {
        checkpoints.push(Checkpoint {
            step: cp.step,
            t: cp.t,
            s: cp.s,
            unitary: cp.block.to_operator(),
        });
        Ok(())
    })?;
    result.checkpoints = checkpoints;
    Ok(result)
}

/// Like [`evolve_ramp`] on a prebuilt generator, streaming checkpoints to `observer`
/// instead of storing them.
pub fn evolve_unitary_observed(
    gen: &RampGenerator,
    params: &RampParams,
    options: &EvolveOptions,
    mut observer: impl FnMut(CheckpointView<'_>) -> Result<()>,
) -> Result<RampResult> {
    let d = gen.dim();
    let mut block = StateBlock::identity(d);
    let mut prop = Propagator::with_cache_budget(gen, params.dt, options.method, options.cache_budget_bytes);
    let q1 = params.steps_per_leg();
    let q = params.total_steps();
    let shortcut = params.kind == RampKind::Cyclic && options.time_reversal && options.checkpoint_stride.is_none();
    let schedule_trace: Vec<f64> = (0..q).map(|m| params.step_s(m, options.sampling)).collect();

    let last = if shortcut { q1 } else { q };
    let mut turning_point = None;
    run_steps(&mut prop, params, options, &schedule_trace, &mut block, 0, last, &mut observer, &mut turning_point)?;

    if shortcut {
        let forward = block.to_operator();
        let cycle = time_reversed_cycle(&mut prop, &forward, options.sampling)?;
        return Ok(RampResult {
            unitary: cycle,
            turning_point: Some(forward),
            schedule_trace,
            checkpoints: Vec::new(),
        });
    }
    Ok(RampResult {
        unitary: block.to_operator(),
        turning_point,
        schedule_trace,
        checkpoints: Vec::new(),
    })
}

#[allow(clippy::too_many_arguments)]
fn run_steps(
    prop: &mut Propagator<'_>,
    params: &RampParams,
    options: &EvolveOptions,
    schedule: &[f64],
    block: &mut StateBlock,
    from: usize,
    to: usize,
    observer: &mut impl FnMut(CheckpointView<'_>) -> Result<()>,
    turning_point: &mut Option<DenseOperator>,
) -> Result<()> {
    let q = params.total_steps();
    let q1 = params.steps_per_leg();
    let emit = |m: usize, block: &StateBlock, observer: &mut dyn FnMut(CheckpointView<'_>) -> Result<()>| -> Result<()> {
        let t = params.time_at_step(m);
        observer(CheckpointView {
            step: m,
            t,
            s: params.schedule_value(t)?,
            block,
        })
    };
    let stride = options.checkpoint_stride.filter(|&k| k > 0);
    if stride.is_some() && from == 0 {
        emit(0, block, observer)?;
    }
    for (m, &s) in schedule.iter().enumerate().take(to).skip(from) {
        prop.step(s, block)?;
        let done = m + 1;
        if params.kind == RampKind::Cyclic && done == q1 && block.dim == block.ncols {
            *turning_point = Some(block.to_operator());
        }
        if let Some(k) = stride {
            if done % k == 0 || done == q {
                emit(done, block, observer)?;
            }
        }
    }
    Ok(())
}

/// `U(2T)` from the forward-leg unitary.
///
/// For real symmetric `H(s)` every step propagator is symmetric. With left-edge
/// sampling the backward leg is `P₁ ⋯ P_{q₁−1} P_{q₁} = P̄₀ U_FWᵀ P_{q₁}`; with
/// midpoint sampling it is exactly `U_FWᵀ`.
fn time_reversed_cycle(prop: &mut Propagator<'_>, forward: &DenseOperator, sampling: Sampling) -> Result<DenseOperator> {
    let fw = forward.as_mat();
    match sampling {
        Sampling::Midpoint => Ok(DenseOperator::from_mat(fw.transpose() * fw)),
        Sampling::LeftEdge => {
            let mut y = StateBlock::from_operator(forward);
            prop.step(1.0, &mut y)?;
            let z = fw.transpose() * y.as_mat();
            let mut z = StateBlock::from_operator(&DenseOperator::from_mat(z));
            z.conjugate_in_place();
            prop.step(0.0, &mut z)?;
            z.conjugate_in_place();
            Ok(z.to_operator())
        }
    }
}

/// Final states of a ramp, plus the states at the turning point of cyclic ramps.
#[derive(Clone, Debug)]
pub struct StateEvolution {
    pub final_states: StateBlock,
    pub turning_states: Option<StateBlock>,
}

/// Evolves a batch of states through the ramp.
pub fn evolve_states(
    gen: &RampGenerator,
    params: &RampParams,
    options: &EvolveOptions,
    initial: StateBlock,
) -> Result<StateEvolution> {
    check_dim(gen.dim(), initial.dim)?;
    let mut prop = Propagator::with_cache_budget(gen, params.dt, options.method, options.cache_budget_bytes);
    let mut block = initial;
    let q1 = params.steps_per_leg();
    let mut turning_states = None;
    for m in 0..params.total_steps() {
        prop.step(params.step_s(m, options.sampling), &mut block)?;
        if params.kind == RampKind::Cyclic && m + 1 == q1 {
            turning_states = Some(block.clone());
        }
    }
    Ok(StateEvolution {
        final_states: block,
        turning_states,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{parity_sector, Parity};

    fn c(re: f64, im: f64) -> c64 {
        c64::new(re, im)
    }

    #[test]
    fn schedule_examples() {
        let f = RampParams::new(RampKind::Forward, 10.0, 0.5).unwrap();
        assert_eq!(f.schedule_value(5.0).unwrap(), 0.5);
        let cy = RampParams::new(RampKind::Cyclic, 10.0, 0.5).unwrap();
        assert_eq!(cy.schedule_value(15.0).unwrap(), 0.5);
        assert_eq!(cy.schedule_value(20.0).unwrap(), 0.0);
        assert!(cy.schedule_value(20.5).is_err());
        assert_eq!(cy.total_steps(), 40);
    }

    #[test]
    fn step_count_validation() {
        assert_eq!(RampParams::new(RampKind::Forward, 600.0, 0.05).unwrap().total_steps(), 12000);
        assert!(matches!(
            RampParams::new(RampKind::Forward, 1.0, 0.3),
            Err(Error::NonIntegerSteps(_))
        ));
        assert!(RampParams::new(RampKind::Forward, 10.0, 1.0).is_err());
    }

    #[test]
    fn backward_leg_revisits_forward_values() {
        let p = RampParams::new(RampKind::Cyclic, 7.0, 0.1).unwrap();
        let q1 = p.steps_per_leg();
        for sampling in [Sampling::LeftEdge, Sampling::Midpoint] {
            let offset = usize::from(sampling == Sampling::LeftEdge);
            for m in 0..q1 {
                let back = 2 * q1 - m - 1 + offset;
                if back < 2 * q1 {
                    assert_eq!(p.step_s(m, sampling).to_bits(), p.step_s(back, sampling).to_bits());
                }
            }
        }
        assert_eq!(p.step_s(q1, Sampling::LeftEdge), 1.0);
    }

    #[test]
    fn step_propagator_examples() {
        let z = DenseOperator::from_real_diagonal(&[1.0, -1.0]);
        let p = step_propagator(&z, 0.3).unwrap();
        assert!((p.get(0, 0) - c64::from_polar(1.0, -0.3)).norm() < 1e-15);
        assert!((p.get(1, 1) - c64::from_polar(1.0, 0.3)).norm() < 1e-15);
        assert!(p.get(0, 1).norm() < 1e-15);
        let id = step_propagator(&z, 0.0).unwrap();
        assert!(id.max_abs_diff(&DenseOperator::identity(2)) < 1e-15);
    }

    #[test]
    fn step_propagator_taylor_remainder_is_cubic() {
        let spec = HamiltonianSpec::nearest_neighbor(3);
        let h = crate::model::interpolated_hamiltonian(&spec, 0.4).unwrap();
        let h2 = &h * &h;
        let remainder = |dt: f64| {
            let approx = &(&DenseOperator::identity(8) - &h.scale(c(0.0, dt))) - &h2.scale(c(dt * dt / 2.0, 0.0));
            step_propagator(&h, dt).unwrap().max_abs_diff(&approx)
        };
        let (r1, r2) = (remainder(1e-2), remainder(5e-3));
        // halving Δt shrinks an O(Δt³) remainder eightfold
        assert!((r1 / r2 - 8.0).abs() < 0.2, "{r1} {r2}");
    }

    #[test]
    fn complex_hermitian_step() {
        // σy has a nonzero imaginary part: exp(−iθσy) = cos θ − i sin θ σy
        let sy = DenseOperator::from_fn(2, |i, j| match (i, j) {
            (0, 1) => c(0.0, -1.0),
            (1, 0) => c(0.0, 1.0),
            _ => c(0.0, 0.0),
        });
        let theta = 0.7;
        let p = step_propagator(&sy, theta).unwrap();
        assert!((p.get(0, 0) - c(theta.cos(), 0.0)).norm() < 1e-14);
        assert!((p.get(0, 1) - c(-theta.sin(), 0.0)).norm() < 1e-14);
    }

    #[test]
    fn heisenberg_single_qubit_rotation() {
        let theta = 0.37;
        let u = DenseOperator::from_real_diagonal(&[1.0, -1.0]);
        let u = step_propagator(&u, theta / 2.0).unwrap();
        let x = DenseOperator::from_fn(2, |i, j| if i != j { c(1.0, 0.0) } else { c(0.0, 0.0) });
        let y = DenseOperator::from_fn(2, |i, j| match (i, j) {
            (0, 1) => c(0.0, -1.0),
            (1, 0) => c(0.0, 1.0),
            _ => c(0.0, 0.0),
        });
        // U†XU = cos θ X − sin θ Y since i[Z/2, X] = −Y
        let got = heisenberg_conjugate(&x, &u).unwrap();
        let want = &x.scale(c(theta.cos(), 0.0)) - &y.scale(c(theta.sin(), 0.0));
        assert!(got.max_abs_diff(&want) < 1e-14);
        let id = heisenberg_conjugate(&x, &DenseOperator::identity(2)).unwrap();
        assert_eq!(id.max_abs_diff(&x), 0.0);
    }

    #[test]
    fn chebyshev_matches_eigen_step() {
        for sector in [None, Some(Parity::Even)] {
            let spec = HamiltonianSpec::nearest_neighbor(6);
            let sec = sector.map(|p| parity_sector(&spec, p).unwrap());
            let gen = RampGenerator::new(&spec, sec.as_ref()).unwrap();
            for (s, dt) in [(0.0, 0.05), (0.37, 0.5), (1.0, 0.5), (0.8, 0.95)] {
                let mut a = StateBlock::identity(gen.dim());
                let mut b = a.clone();
                Propagator::new(&gen, dt, PropagatorMethod::Chebyshev).step(s, &mut a).unwrap();
                Propagator::new(&gen, dt, PropagatorMethod::Eigen).step(s, &mut b).unwrap();
                let diff = a.to_operator().max_abs_diff(&b.to_operator());
                assert!(diff < 1e-12, "s={s} dt={dt}: {diff}");
            }
        }
    }

    #[test]
    fn cyclic_time_reversal_matches_direct_accumulation() {
        let spec = HamiltonianSpec::nearest_neighbor(5);
        let sector = parity_sector(&spec, Parity::Even).unwrap();
        let params = RampParams::new(RampKind::Cyclic, 4.0, 0.25).unwrap();
        for sampling in [Sampling::LeftEdge, Sampling::Midpoint] {
            for method in [PropagatorMethod::Chebyshev, PropagatorMethod::Eigen] {
                let base = EvolveOptions {
                    method,
                    sampling,
                    ..EvolveOptions::default()
                };
                let fast = evolve_ramp(&spec, &params, Some(&sector), &base).unwrap();
                let direct = evolve_ramp(
                    &spec,
                    &params,
                    Some(&sector),
                    &EvolveOptions {
                        time_reversal: false,
                        ..base.clone()
                    },
                )
                .unwrap();
                assert!(fast.unitary.max_abs_diff(&direct.unitary) < 1e-11);
                let tp = (fast.turning_point.unwrap(), direct.turning_point.unwrap());
                assert_eq!(tp.0.max_abs_diff(&tp.1), 0.0);
            }
        }
    }

    #[test]
    fn checkpoints_cover_start_stride_and_end() {
        let spec = HamiltonianSpec::nearest_neighbor(3);
        let params = RampParams::new(RampKind::Forward, 1.0, 0.1).unwrap();
        let opts = EvolveOptions {
            checkpoint_stride: Some(4),
            ..EvolveOptions::default()
        };
        let r = evolve_ramp(&spec, &params, None, &opts).unwrap();
        let steps: Vec<usize> = r.checkpoints.iter().map(|c| c.step).collect();
        assert_eq!(steps, vec![0, 4, 8, 10]);
        assert_eq!(r.checkpoints[0].unitary.max_abs_diff(&DenseOperator::identity(8)), 0.0);
        assert!(r.checkpoints[3].unitary.max_abs_diff(&r.unitary) == 0.0);
        assert!((r.checkpoints[1].s - 0.4).abs() < 1e-12);
    }

    #[test]
    fn states_follow_the_unitary() {
        let spec = HamiltonianSpec::nearest_neighbor(4);
        let gen = RampGenerator::new(&spec, None).unwrap();
        let params = RampParams::new(RampKind::Cyclic, 2.0, 0.1).unwrap();
        let opts = EvolveOptions::default();
        let u = evolve_unitary_observed(&gen, &params, &opts, |_| Ok(())).unwrap();
        let psi: Vec<c64> = (0..16).map(|i| c(i as f64, 1.0)).collect();
        let norm = psi.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        let psi: Vec<c64> = psi.iter().map(|z| z / norm).collect();
        let out = evolve_states(&gen, &params, &opts, StateBlock::from_columns(16, std::slice::from_ref(&psi)).unwrap()).unwrap();
        let want = u.unitary.apply(&psi).unwrap();
        for (a, b) in out.final_states.column(0).iter().zip(&want) {
            assert!((a - b).norm() < 1e-11);
        }
        let want_t = u.turning_point.unwrap().apply(&psi).unwrap();
        for (a, b) in out.turning_states.unwrap().column(0).iter().zip(&want_t) {
            assert!((a - b).norm() < 1e-11);
        }
    }
}
