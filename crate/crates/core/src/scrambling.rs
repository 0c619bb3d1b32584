//! Operator size distributions of Heisenberg-evolved operators and the Haar baseline.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::evolution::{evolve_unitary_observed, heisenberg_conjugate, EvolveOptions, RampParams};
use crate::linalg::DenseOperator;
use crate::model::{HamiltonianSpec, RampGenerator};
use crate::pauli::{collective_spin, pauli_decomposition, pauli_matrix, Axis, PauliString, MAX_PAULI_PROJECTION_SITES};

/// Relative size of the identity component below which an operator counts as traceless.
const TRACELESS_TOL: f64 = 1e-12;

/// Weights `P_k` on Pauli strings of size `k = 0..N`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SizeDistribution {
    pub probabilities: Vec<f64>,
    pub mean: f64,
    pub t: f64,
    pub label: String,
}

impl SizeDistribution {
    pub fn n_sites(&self) -> usize {
        self.probabilities.len() - 1
    }
}

/// `P_k ∝ Σ_{|Q|=k} |tr(QA)|²`, normalized to one.
///
/// For traceless `A` the identity is dropped and `P_0 = 0`; otherwise `P_0` is
/// kept and enters the normalization.
pub fn operator_size_distribution(a: &DenseOperator) -> Result<SizeDistribution> {
    let coeffs = pauli_decomposition(a)?;
    let n = a.dim().trailing_zeros() as usize;
    let mask = (1usize << n) - 1;
    let mut weights = vec![0.0f64; n + 1];
    for (idx, c) in coeffs.iter().enumerate() {
        let size = ((idx >> n) | (idx & mask)).count_ones() as usize;
        weights[size] += c.norm_sqr();
    }
    let nontrivial: f64 = weights[1..].iter().sum();
    if nontrivial + weights[0] == 0.0 {
        return Err(Error::ZeroOperator);
    }
    if weights[0] <= (TRACELESS_TOL * TRACELESS_TOL) * nontrivial {
        weights[0] = 0.0;
    }
    let total: f64 = weights.iter().sum();
    let probabilities: Vec<f64> = weights.iter().map(|w| w / total).collect();
    let mean = probabilities.iter().enumerate().map(|(k, p)| k as f64 * p).sum();
    Ok(SizeDistribution {
        probabilities,
        mean,
        t: 0.0,
        label: String::new(),
    })
}

/// Initial operators of the scrambling experiments.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum OperatorLabel {
    #[serde(rename = "sx_i0")]
    SigmaXCenter,
    #[serde(rename = "sy_i0")]
    SigmaYCenter,
    #[serde(rename = "sz_i0")]
    SigmaZCenter,
    #[serde(rename = "Sx")]
    SpinX,
    #[serde(rename = "Sy")]
    SpinY,
    #[serde(rename = "Sz")]
    SpinZ,
}

impl OperatorLabel {
    pub const ALL: [OperatorLabel; 6] = [
        Self::SigmaXCenter,
        Self::SigmaYCenter,
        Self::SigmaZCenter,
        Self::SpinX,
        Self::SpinY,
        Self::SpinZ,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Self::SigmaXCenter => "sx_i0",
            Self::SigmaYCenter => "sy_i0",
            Self::SigmaZCenter => "sz_i0",
            Self::SpinX => "Sx",
            Self::SpinY => "Sy",
            Self::SpinZ => "Sz",
        }
    }

    fn axis(self) -> Axis {
        match self {
            Self::SigmaXCenter | Self::SpinX => Axis::X,
            Self::SigmaYCenter | Self::SpinY => Axis::Y,
            Self::SigmaZCenter | Self::SpinZ => Axis::Z,
        }
    }

    /// `σ^α` on site `⌊N/2⌋`, or the collective spin `S_α`.
    pub fn operator(self, n_sites: usize) -> Result<DenseOperator> {
        match self {
            Self::SigmaXCenter | Self::SigmaYCenter | Self::SigmaZCenter => {
                pauli_matrix(&PauliString::single(n_sites, n_sites / 2, self.axis().pauli())?)
            }
            Self::SpinX | Self::SpinY | Self::SpinZ => collective_spin(self.axis(), n_sites),
        }
    }
}

impl fmt::Display for OperatorLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for OperatorLabel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|l| l.as_str().eq_ignore_ascii_case(s) && (l.as_str() == s || s.len() > 2))
            .ok_or_else(|| invalid("operator", format!("unknown operator `{s}`")))
    }
}

/// Size distributions of `U(t)† A₀ U(t)` at the requested times, which must be
/// multiples of `Δt` within the ramp. Evolution runs in the full space because
/// single-site operators mix the parity sectors.
pub fn mean_size_trace(
    spec: &HamiltonianSpec,
    params: &RampParams,
    label: OperatorLabel,
    sample_times: &[f64],
    options: &EvolveOptions,
) -> Result<Vec<SizeDistribution>> {
    let n = spec.n_sites();
    if n > MAX_PAULI_PROJECTION_SITES {
        return Err(Error::Capacity {
            what: "mean_size_trace",
            n_sites: n,
            limit: MAX_PAULI_PROJECTION_SITES,
        });
    }
    if sample_times.is_empty() {
        return Err(invalid("sample_times", "empty"));
    }
    let mut steps = sample_times
        .iter()
        .map(|&t| {
            let m = t / params.dt();
            let r = m.round();
            if !(0.0..=params.total_steps() as f64).contains(&r) || (m - r).abs() > 1e-9 * m.max(1.0) {
                return Err(invalid("sample_times", format!("{t} is not a step time of the ramp")));
            }
            Ok(r as usize)
        })
        .collect::<Result<Vec<_>>>()?;
    steps.sort_unstable();
    steps.dedup();
    let stride = steps.iter().fold(params.total_steps(), |g, &m| gcd(g, m));
    let a0 = label.operator(n)?;
    let gen = RampGenerator::new(spec, None)?;
    let opts = EvolveOptions {
        checkpoint_stride: Some(stride),
        ..options.clone()
    };
    let mut out = Vec::new();
    evolve_unitary_observed(&gen, params, &opts, |cp| {
        if steps.binary_search(&cp.step).is_err() {
            return Ok(());
        }
        let at = heisenberg_conjugate(&a0, &cp.block.to_operator())?;
        let mut dist = operator_size_distribution(&at)?;
        dist.t = cp.t;
        dist.label = label.to_string();
        out.push(dist);
        Ok(())
    })?;
    Ok(out)
}

fn gcd(a: usize, b: usize) -> usize {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

/// Mean size under a Haar-random unitary: the uniform average over non-identity
/// strings, `Σ_k k 3^k C(N,k) / (4^N − 1) = 3N 4^{N−1} / (4^N − 1)`.
pub fn haar_mean_size(n_sites: usize) -> f64 {
    let four_n = 4f64.powi(n_sites as i32);
    3.0 * n_sites as f64 * four_n / 4.0 / (four_n - 1.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pauli::{pauli_coefficient, Pauli};

    fn brute_force(a: &DenseOperator) -> Vec<f64> {
        let n = a.dim().trailing_zeros() as usize;
        let mut w = vec![0.0; n + 1];
        for q in PauliString::all(n) {
            if !q.is_identity() {
                w[q.size()] += pauli_coefficient(a, &q).unwrap().norm_sqr();
            }
        }
        let total: f64 = w.iter().sum();
        w.iter().map(|x| x / total).collect()
    }

    #[test]
    fn single_strings() {
        let x = pauli_matrix(&PauliString::single(5, 2, Pauli::X).unwrap()).unwrap();
        let d = operator_size_distribution(&x).unwrap();
        assert_eq!(d.probabilities[1], 1.0);
        assert_eq!(d.mean, 1.0);
        let zz: PauliString = "ZZ".parse().unwrap();
        let d = operator_size_distribution(&pauli_matrix(&zz).unwrap()).unwrap();
        assert!((d.probabilities[2] - 1.0).abs() < 1e-15);
        let sz = collective_spin(Axis::Z, 3).unwrap();
        let d = operator_size_distribution(&sz).unwrap();
        assert!((d.probabilities[1] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn non_traceless_keeps_identity() {
        let a = &DenseOperator::identity(4) + &pauli_matrix(&"XI".parse().unwrap()).unwrap();
        let d = operator_size_distribution(&a).unwrap();
        assert!((d.probabilities[0] - 0.5).abs() < 1e-15);
        assert!((d.probabilities[1] - 0.5).abs() < 1e-15);
        assert!(matches!(operator_size_distribution(&DenseOperator::zeros(4)), Err(Error::ZeroOperator)));
    }

    #[test]
    fn matches_brute_force_on_a_dense_operator() {
        let a = DenseOperator::from_fn(8, |i, j| {
            let re = ((i * 7 + j * 3) % 5) as f64 - 2.0;
            let im = if i == j { 0.0 } else { ((i + 2 * j) % 3) as f64 - 1.0 };
            faer::c64::new(re, im)
        });
        let h = &a + &a.adjoint();
        let traceless = &h - &DenseOperator::identity(8).scale(h.trace() / 8.0);
        let fast = operator_size_distribution(&traceless).unwrap();
        for (p, q) in fast.probabilities.iter().zip(brute_force(&traceless)) {
            assert!((p - q).abs() < 1e-12);
        }
    }

    #[test]
    fn haar_values() {
        assert!((haar_mean_size(1) - 1.0).abs() < 1e-15);
        assert!((haar_mean_size(2) - 1.6).abs() < 1e-15);
        let exact: f64 = (0..=6)
            .map(|k| {
                let binom = (0..k).fold(1.0, |acc, i| acc * (6 - i) as f64 / (i + 1) as f64);
                k as f64 * 3f64.powi(k) * binom
            })
            .sum::<f64>()
            / (4f64.powi(6) - 1.0);
        assert!((haar_mean_size(6) - exact).abs() < 1e-12);
        assert!((haar_mean_size(40) / 40.0 - 0.75).abs() < 1e-12);
    }

    #[test]
    fn labels_roundtrip() {
        for l in OperatorLabel::ALL {
            assert_eq!(l.as_str().parse::<OperatorLabel>().unwrap(), l);
        }
        assert!("Sq".parse::<OperatorLabel>().is_err());
    }

    #[test]
    fn off_grid_sample_times_are_rejected() {
        let spec = HamiltonianSpec::nearest_neighbor(3);
        let params = RampParams::new(crate::evolution::RampKind::Forward, 1.0, 0.1).unwrap();
        let opts = EvolveOptions::default();
        assert!(mean_size_trace(&spec, &params, OperatorLabel::SpinX, &[0.05], &opts).is_err());
        assert!(mean_size_trace(&spec, &params, OperatorLabel::SpinX, &[1.1], &opts).is_err());
        assert!(mean_size_trace(&spec, &params, OperatorLabel::SpinX, &[], &opts).is_err());
        let trace = mean_size_trace(&spec, &params, OperatorLabel::SpinX, &[1.0, 0.3], &opts).unwrap();
        assert_eq!(trace.len(), 2);
        assert!((trace[0].t - 0.3).abs() < 1e-12 && trace[1].t == 1.0);
    }

    #[test]
    fn trace_starts_at_size_one() {
        let spec = HamiltonianSpec::nearest_neighbor(4);
        let params = RampParams::new(crate::evolution::RampKind::Cyclic, 2.0, 0.1).unwrap();
        for label in OperatorLabel::ALL {
            let times: Vec<f64> = (0..=8).map(|i| i as f64 * 0.5).collect();
            let trace = mean_size_trace(&spec, &params, label, &times, &EvolveOptions::default()).unwrap();
            assert_eq!(trace.len(), 9);
            assert_eq!(trace[4].t, 2.0);
            assert!((trace[0].mean - 1.0).abs() < 1e-12);
            for d in &trace {
                assert!((d.probabilities.iter().sum::<f64>() - 1.0).abs() < 1e-10);
                assert_eq!(d.probabilities[0], 0.0);
            }
        }
    }
}
