//! Experiment configuration documents and their validation.

use std::f64::consts::PI;
use std::fmt;
use std::path::PathBuf;

use anneal_lab::eigenstate_analysis::Reference;
use anneal_lab::evolution::{default_total_time, PropagatorMethod, RampKind, RampParams, Sampling, STATE_DT, UNITARY_DT};
use anneal_lab::model::{HamiltonianSpec, Parity};
use anneal_lab::scrambling::OperatorLabel;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentKind {
    Spectrum,
    Gaps,
    ScsSweep,
    DickeSweep,
    RampUnitaryMlsr,
    Eigenstates,
    Scramble,
}

impl ExperimentKind {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::Spectrum => "spectrum",
            Self::Gaps => "gaps",
            Self::ScsSweep => "scs-sweep",
            Self::DickeSweep => "dicke-sweep",
            Self::RampUnitaryMlsr => "ramp-unitary-mlsr",
            Self::Eigenstates => "eigenstates",
            Self::Scramble => "scramble",
        }
    }

    /// Whether the experiment evolves through a ramp.
    pub fn uses_ramp(self) -> bool {
        !matches!(self, Self::Spectrum | Self::Gaps)
    }

    /// Whether the experiment builds dense operators on the whole Hilbert space
    /// or sector (as opposed to evolving a few state vectors).
    pub fn is_dense(self) -> bool {
        !matches!(self, Self::ScsSweep | Self::DickeSweep)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum SectorChoice {
    #[serde(rename = "+")]
    Even,
    #[serde(rename = "-")]
    Odd,
    #[serde(rename = "full")]
    Full,
}

impl SectorChoice {
    pub fn parity(self) -> Option<Parity> {
        match self {
            Self::Even => Some(Parity::Even),
            Self::Odd => Some(Parity::Odd),
            Self::Full => None,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Self::Even => "+",
            Self::Odd => "-",
            Self::Full => "full",
        }
    }
}

/// Either `{start, stop, points}` (inclusive, evenly spaced) or explicit values.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Grid {
    Range { start: f64, stop: f64, points: usize },
    Values(Vec<f64>),
}

impl Grid {
    pub fn values(&self) -> Vec<f64> {
        match self {
            Self::Values(v) => v.clone(),
            Self::Range { start, stop, points } => match points {
                0 => Vec::new(),
                1 => vec![*start],
                _ => (0..*points)
                    .map(|i| start + (stop - start) * i as f64 / (*points - 1) as f64)
                    .collect(),
            },
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RampConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kind: Option<RampKind>,
    /// One-way ramp time `T`; defaults to `3N²`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub total_time: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dt: Option<f64>,
    #[serde(default)]
    pub sampling: Sampling,
    #[serde(default)]
    pub method: PropagatorMethod,
}

fn is_false(b: &bool) -> bool {
    !*b
}

/// One experiment, possibly over several system sizes.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment: ExperimentKind,
    /// Custom couplings and fields; the nearest-neighbor chain when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub model: Option<HamiltonianSpec>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub sizes: Vec<usize>,
    /// `+` by default; scrambling always uses the full space.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sector: Option<SectorChoice>,
    #[serde(default)]
    pub ramp: RampConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub s_grid: Option<Grid>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub phi_grid: Option<Grid>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dicke_k: Option<Vec<usize>>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub operators: Vec<OperatorLabel>,
    /// Scrambling sample times in units of `T`, rounded to the step grid.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sample_times: Option<Grid>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reference: Option<Reference>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bulk_trim: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub checkpoint_stride: Option<usize>,
    #[serde(default, skip_serializing_if = "is_false")]
    pub save_checkpoints: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub onset_band: Option<f64>,
    #[serde(default)]
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output_dir: Option<PathBuf>,
}

/// A validation failure located by a dotted field path.
#[derive(Clone, Debug, PartialEq)]
pub struct Diagnostic {
    pub path: String,
    pub message: String,
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.path, self.message)
    }
}

fn diag(path: impl Into<String>, message: impl Into<String>) -> Diagnostic {
    Diagnostic {
        path: path.into(),
        message: message.into(),
    }
}

pub const DEFAULT_S_POINTS: usize = 99;
pub const DEFAULT_PHI_POINTS: usize = 21;
pub const DEFAULT_SAMPLES_PER_LEG: usize = 20;
pub const DEFAULT_ONSET_BAND: f64 = 0.01;

impl ExperimentConfig {
    /// Parses JSON, reporting the field path of the first type error.
    pub fn from_json(text: &str) -> Result<Self, Vec<Diagnostic>> {
        let de = &mut serde_json::Deserializer::from_str(text);
        let config: Self = serde_path_to_error::deserialize(de).map_err(|e| {
            let path = e.path().to_string();
            vec![diag(if path == "." { "$".into() } else { path }, e.into_inner().to_string())]
        })?;
        config.validate()?;
        Ok(config)
    }

    /// Canonical serialization, the input to [`Self::hash`].
    pub fn canonical_json(&self) -> String {
        serde_json::to_string(self).expect("configs serialize")
    }

    /// SHA-256 of the canonical serialization, hex encoded.
    pub fn hash(&self) -> String {
        hex_digest(self.canonical_json().as_bytes())
    }

    pub fn validate(&self) -> Result<(), Vec<Diagnostic>> {
        let mut out = Vec::new();
        let sizes = self.resolved_sizes();
        if sizes.is_empty() {
            out.push(diag("sizes", "at least one system size is required"));
        }
        if let Some(model) = &self.model {
            if self.sizes.iter().any(|&n| n != model.n_sites()) {
                out.push(diag("sizes", format!("must equal model.n_sites = {}", model.n_sites())));
            }
            if self.effective_sector() != SectorChoice::Full && !model.is_reflection_symmetric() {
                out.push(diag("sector", "parity sectors need a reflection-symmetric model"));
            }
        }
        for (i, &n) in self.sizes.iter().enumerate() {
            if n == 0 {
                out.push(diag(format!("sizes[{i}]"), "must be positive"));
            }
        }
        let kind = self.experiment;
        match (kind, self.sector) {
            (ExperimentKind::ScsSweep | ExperimentKind::DickeSweep, Some(s)) if s != SectorChoice::Even => {
                out.push(diag("sector", "state sweeps run in the + sector"));
            }
            (ExperimentKind::Scramble, Some(s)) if s != SectorChoice::Full => {
                out.push(diag("sector", "operator scrambling runs in the full space"));
            }
            (ExperimentKind::Spectrum | ExperimentKind::Gaps, Some(SectorChoice::Full)) => {
                out.push(diag("sector", "level statistics need a parity sector"));
            }
            _ => {}
        }
        if kind == ExperimentKind::DickeSweep && self.ramp.kind == Some(RampKind::Forward) {
            out.push(diag("ramp.kind", "the Dicke experiment is a cyclic ramp"));
        }
        if kind.uses_ramp() {
            for &n in sizes.iter().filter(|&&n| n > 0) {
                if let Err(e) = self.ramp_params(n) {
                    out.push(diag("ramp", format!("N = {n}: {e}")));
                    break;
                }
            }
        }
        if let Some(g) = &self.s_grid {
            check_grid(&mut out, "s_grid", g, Some((0.0, 1.0)));
        }
        if let Some(g) = &self.phi_grid {
            check_grid(&mut out, "phi_grid", g, None);
        }
        if let Some(g) = &self.sample_times {
            let max = if self.ramp_kind() == RampKind::Cyclic { 2.0 } else { 1.0 };
            check_grid(&mut out, "sample_times", g, Some((0.0, max)));
        }
        if let Some(ks) = &self.dicke_k {
            if ks.is_empty() {
                out.push(diag("dicke_k", "empty list"));
            }
            for &n in &sizes {
                if let Some(i) = ks.iter().position(|&k| k > n) {
                    out.push(diag(format!("dicke_k[{i}]"), format!("k must be at most N = {n}")));
                }
            }
        }
        if let Some(t) = self.bulk_trim {
            if !(0.0..0.5).contains(&t) {
                out.push(diag("bulk_trim", "must lie in [0, 0.5)"));
            }
        }
        if self.checkpoint_stride == Some(0) {
            out.push(diag("checkpoint_stride", "must be positive"));
        }
        if let Some(b) = self.onset_band {
            if b.is_nan() || b <= 0.0 {
                out.push(diag("onset_band", "must be positive"));
            }
        }
        if self.save_checkpoints && kind != ExperimentKind::RampUnitaryMlsr {
            out.push(diag("save_checkpoints", "only the ramp-unitary-mlsr experiment stores checkpoints"));
        }
        if out.is_empty() {
            Ok(())
        } else {
            Err(out)
        }
    }

    pub fn resolved_sizes(&self) -> Vec<usize> {
        match (&self.model, self.sizes.is_empty()) {
            (Some(m), true) => vec![m.n_sites()],
            _ => self.sizes.clone(),
        }
    }

    pub fn spec(&self, n: usize) -> HamiltonianSpec {
        match &self.model {
            Some(m) => m.clone(),
            None => HamiltonianSpec::nearest_neighbor(n),
        }
    }

    pub fn effective_sector(&self) -> SectorChoice {
        match self.experiment {
            ExperimentKind::Scramble => SectorChoice::Full,
            _ => self.sector.unwrap_or(SectorChoice::Even),
        }
    }

    pub fn ramp_kind(&self) -> RampKind {
        self.ramp.kind.unwrap_or(match self.experiment {
            ExperimentKind::DickeSweep | ExperimentKind::Scramble => RampKind::Cyclic,
            _ => RampKind::Forward,
        })
    }

    pub fn ramp_params(&self, n: usize) -> anneal_lab::Result<RampParams> {
        let dt = self.ramp.dt.unwrap_or(match self.experiment {
            ExperimentKind::ScsSweep | ExperimentKind::DickeSweep => STATE_DT,
            _ => UNITARY_DT,
        });
        let t = self.ramp.total_time.unwrap_or_else(|| default_total_time(n));
        RampParams::new(self.ramp_kind(), t, dt)
    }

    pub fn s_values(&self) -> Vec<f64> {
        self.s_grid
            .clone()
            .unwrap_or(Grid::Range {
                start: 0.01,
                stop: 0.99,
                points: DEFAULT_S_POINTS,
            })
            .values()
    }

    pub fn phi_values(&self) -> Vec<f64> {
        self.phi_grid
            .clone()
            .unwrap_or(Grid::Range {
                start: 0.0,
                stop: PI,
                points: DEFAULT_PHI_POINTS,
            })
            .values()
    }

    pub fn dicke_values(&self, n: usize) -> Vec<usize> {
        self.dicke_k.clone().unwrap_or_else(|| (0..=n).collect())
    }

    pub fn operator_labels(&self) -> Vec<OperatorLabel> {
        if self.operators.is_empty() {
            OperatorLabel::ALL.to_vec()
        } else {
            self.operators.clone()
        }
    }

    /// Scrambling sample times on the step grid, in absolute time.
    pub fn sample_time_values(&self, params: &RampParams) -> Vec<f64> {
        let legs = if params.kind() == RampKind::Cyclic { 2 } else { 1 };
        let fractions = match &self.sample_times {
            Some(g) => g.values(),
            None => {
                let n = DEFAULT_SAMPLES_PER_LEG * legs;
                (0..=n).map(|i| i as f64 * legs as f64 / n as f64).collect()
            }
        };
        let mut steps: Vec<usize> = fractions
            .iter()
            .map(|f| (f * params.steps_per_leg() as f64).round() as usize)
            .collect();
        steps.sort_unstable();
        steps.dedup();
        steps.into_iter().map(|m| params.time_at_step(m)).collect()
    }

    pub fn reference(&self) -> Reference {
        self.reference.unwrap_or(match self.ramp_kind() {
            RampKind::Forward => Reference::Problem,
            RampKind::Cyclic => Reference::Mixer,
        })
    }
}

fn check_grid(out: &mut Vec<Diagnostic>, path: &str, grid: &Grid, range: Option<(f64, f64)>) {
    if let Grid::Range { points: 0, .. } = grid {
        out.push(diag(format!("{path}.points"), "must be positive"));
        return;
    }
    let values = grid.values();
    if values.is_empty() {
        out.push(diag(path, "empty grid"));
    }
    for (i, v) in values.iter().enumerate() {
        let bad = !v.is_finite() || range.is_some_and(|(lo, hi)| *v < lo || *v > hi);
        if bad {
            let at = match grid {
                Grid::Values(_) => format!("{path}[{i}]"),
                Grid::Range { .. } => path.to_string(),
            };
            let msg = match range {
                Some((lo, hi)) => format!("value {v} outside [{lo}, {hi}]"),
                None => format!("value {v} is not finite"),
            };
            out.push(diag(at, msg));
            break;
        }
    }
}

pub fn hex_digest(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}
