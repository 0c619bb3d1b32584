//! Experiment execution: CSV datasets plus one `manifest.json` per run directory.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use anneal_lab::eigenstate_analysis::{
    default_bin_centers, eigenprofile, onset_from_trace, pearson, scaling_regression, OnsetPoint, DEFAULT_BIN_SPACING,
};
use anneal_lab::evolution::{evolve_unitary_observed, EvolveOptions, RampKind};
use anneal_lab::model::{parity_sector, HamiltonianSpec, ParitySector, RampGenerator};
use anneal_lab::scrambling::{haar_mean_size, mean_size_trace};
use anneal_lab::spectral::ensembles::Ensemble;
use anneal_lab::spectral::{gap_profile, mlsr_profile, unitary_statistics, DEFAULT_BULK_TRIM};
use anneal_lab::states::{dicke_sweep, page_value, scs_sweep};
use anneal_lab::{DenseOperator, Error};
use serde::{Deserialize, Serialize};

use crate::checkpoint::{write_checkpoint, CheckpointMeta, LAYOUT};
use crate::config::{hex_digest, ExperimentConfig, ExperimentKind, DEFAULT_ONSET_BAND};
use crate::estimate::check_capacity;
use crate::CliError;

pub const MANIFEST_FILE: &str = "manifest.json";
pub const CONFIG_FILE: &str = "config.json";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TaskStatus {
    pub name: String,
    pub ok: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    pub seconds: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub experiment: String,
    pub config_hash: String,
    pub tool_version: String,
    pub wall_time_seconds: f64,
    pub tasks: Vec<TaskStatus>,
    /// Paths relative to the run directory, sorted.
    pub files: Vec<String>,
}

impl RunManifest {
    pub fn succeeded(&self) -> bool {
        self.tasks.iter().all(|t| t.ok)
    }
}

/// Collects the files written by one run.
struct Output {
    dir: PathBuf,
    files: Vec<String>,
}

impl Output {
    fn csv<R: IntoIterator<Item = Vec<String>>>(&mut self, name: &str, header: &[&str], rows: R) -> Result<(), CliError> {
        let path = self.dir.join(name);
        let mut w = csv::Writer::from_path(&path)?;
        w.write_record(header)?;
        for row in rows {
            w.write_record(&row)?;
        }
        w.flush().map_err(CliError::io(&path))?;
        self.files.push(name.to_string());
        Ok(())
    }

    fn record(&mut self, path: &Path) {
        let rel = path.strip_prefix(&self.dir).unwrap_or(path);
        self.files.push(rel.to_string_lossy().into_owned());
    }
}

fn num(x: f64) -> String {
    format!("{x}")
}

fn opt(x: Option<f64>) -> String {
    x.map(num).unwrap_or_default()
}

/// Runs the configured experiment into `out_dir`. Capacity is checked before any
/// compute; failures of individual tasks are recorded in the manifest.
pub fn run(config: &ExperimentConfig, out_dir: &Path) -> Result<RunManifest, CliError> {
    config.validate().map_err(CliError::Config)?;
    check_capacity(config)?;
    let start = Instant::now();
    fs::create_dir_all(out_dir).map_err(CliError::io(out_dir))?;
    let config_path = out_dir.join(CONFIG_FILE);
    fs::write(&config_path, config.canonical_json()).map_err(CliError::io(&config_path))?;
    let mut out = Output {
        dir: out_dir.to_path_buf(),
        files: vec![CONFIG_FILE.to_string()],
    };
    let mut tasks = Vec::new();
    let sizes = config.resolved_sizes();
    let mut shared = Shared::default();
    for &n in &sizes {
        let units: Vec<Option<usize>> = match config.experiment {
            ExperimentKind::Scramble => (0..config.operator_labels().len()).map(Some).collect(),
            _ => vec![None],
        };
        for unit in units {
            let name = match unit {
                Some(i) => format!("N={n} {}", config.operator_labels()[i]),
                None => format!("N={n}"),
            };
            let t0 = Instant::now();
            let result = run_task(config, n, unit, &mut out, &mut shared);
            let status = match result {
                Ok(()) => TaskStatus {
                    name,
                    ok: true,
                    error: None,
                    seconds: t0.elapsed().as_secs_f64(),
                },
                Err(CliError::Lab(e)) if !matches!(e, Error::Io(_)) => TaskStatus {
                    name,
                    ok: false,
                    error: Some(e.to_string()),
                    seconds: t0.elapsed().as_secs_f64(),
                },
                Err(e) => return Err(e),
            };
            tasks.push(status);
        }
    }
    finish(config, &mut out, &mut shared, &mut tasks)?;
    out.files.push(MANIFEST_FILE.to_string());
    out.files.sort();
    let manifest = RunManifest {
        experiment: config.experiment.as_str().to_string(),
        config_hash: config.hash(),
        tool_version: env!("CARGO_PKG_VERSION").to_string(),
        wall_time_seconds: start.elapsed().as_secs_f64(),
        tasks,
        files: out.files,
    };
    let path = out_dir.join(MANIFEST_FILE);
    let text = serde_json::to_string_pretty(&manifest).expect("manifest serializes");
    fs::write(&path, text).map_err(CliError::io(&path))?;
    Ok(manifest)
}

/// Per-size results reduced after all tasks.
#[derive(Default)]
struct Shared {
    summary: Vec<Vec<String>>,
    profiles: Vec<anneal_lab::eigenstate_analysis::EigenProfile>,
}

fn sector_for(config: &ExperimentConfig, spec: &HamiltonianSpec) -> anneal_lab::Result<Option<ParitySector>> {
    config
        .effective_sector()
        .parity()
        .map(|p| parity_sector(spec, p))
        .transpose()
}

fn options(config: &ExperimentConfig) -> EvolveOptions {
    EvolveOptions {
        method: config.ramp.method,
        sampling: config.ramp.sampling,
        ..EvolveOptions::default()
    }
}

fn run_task(
    config: &ExperimentConfig,
    n: usize,
    unit: Option<usize>,
    out: &mut Output,
    shared: &mut Shared,
) -> Result<(), CliError> {
    let spec = config.spec(n);
    let trim = config.bulk_trim.unwrap_or(DEFAULT_BULK_TRIM);
    match config.experiment {
        ExperimentKind::Spectrum => {
            let parity = config.effective_sector().parity().expect("validated");
            let profile = mlsr_profile(&spec, parity, &config.s_values(), trim)?;
            let rows = profile
                .into_iter()
                .map(|(s, r)| match r {
                    Ok(r) => Ok(vec![num(s), num(r.mlsr), r.ratios.len().to_string(), r.skipped_pairs.to_string()]),
                    Err(Error::EmptyStatistics { skipped }) => Ok(vec![num(s), String::new(), "0".into(), skipped.to_string()]),
                    Err(e) => Err(e),
                })
                .collect::<Result<Vec<_>, _>>()?;
            out.csv(&format!("spectrum_N{n}.csv"), &["s", "mlsr", "n_ratios", "skipped_pairs"], rows)?;
            let dim = parity_sector(&spec, parity)?.dim();
            for ensemble in [Ensemble::Goe, Ensemble::Poisson] {
                let r = ensemble.sample_mlsr(dim, config.seed)?;
                shared.summary.push(vec![
                    n.to_string(),
                    ensemble.as_str().to_string(),
                    dim.to_string(),
                    config.seed.to_string(),
                    num(r),
                ]);
            }
        }
        ExperimentKind::Gaps => {
            let parity = config.effective_sector().parity().expect("validated");
            let points = gap_profile(&spec, parity, &config.s_values())?;
            out.csv(
                &format!("gaps_N{n}.csv"),
                &["s", "delta0", "delta_avg"],
                points.iter().map(|g| vec![num(g.s), num(g.ground_gap), num(g.average_gap)]),
            )?;
            let min0 = points.iter().min_by(|a, b| a.ground_gap.total_cmp(&b.ground_gap)).expect("non-empty grid");
            let minavg = points.iter().min_by(|a, b| a.average_gap.total_cmp(&b.average_gap)).expect("non-empty grid");
            shared.summary.push(vec![
                n.to_string(),
                num(min0.ground_gap),
                num(min0.s),
                num(minavg.average_gap),
                num(minavg.s),
            ]);
        }
        ExperimentKind::ScsSweep => {
            let params = config.ramp_params(n)?;
            let records = scs_sweep(&spec, &params, &config.phi_values(), &options(config))?;
            let cyclic = params.kind() == RampKind::Cyclic;
            let mut header = vec!["phi", "energy_density", "entropy_final"];
            if cyclic {
                header.extend(["entropy_turning", "fidelity"]);
            }
            let rows = records.iter().map(|r| {
                let mut row = vec![num(r.phi), num(r.energy_density), num(r.entropy_final)];
                if cyclic {
                    row.extend([opt(r.entropy_turning), opt(r.fidelity)]);
                }
                row
            });
            out.csv(&format!("scs_N{n}.csv"), &header, rows)?;
        }
        ExperimentKind::DickeSweep => {
            let params = config.ramp_params(n)?;
            let records = dicke_sweep(&spec, params.total_time(), params.dt(), &config.dicke_values(n), &options(config))?;
            out.csv(
                &format!("dicke_N{n}.csv"),
                &["k", "energy_density", "entropy_forward", "entropy_cyclic", "fidelity_cyclic"],
                records.iter().map(|r| {
                    vec![
                        r.k.to_string(),
                        num(r.energy_density),
                        num(r.entropy_forward),
                        num(r.entropy_cyclic),
                        num(r.fidelity_cyclic),
                    ]
                }),
            )?;
        }
        ExperimentKind::RampUnitaryMlsr => ramp_unitary_task(config, n, &spec, out, shared)?,
        ExperimentKind::Eigenstates => {
            let params = config.ramp_params(n)?;
            let sector = sector_for(config, &spec)?;
            let gen = RampGenerator::new(&spec, sector.as_ref())?;
            let result = evolve_unitary_observed(&gen, &params, &options(config), |_| Ok(()))?;
            let profile = eigenprofile(&result.unitary, &gen, config.reference())?;
            out.csv(
                &format!("eigen_N{n}.csv"),
                &["eigenphase", "mean_energy", "energy_density", "entropy", "degenerate"],
                profile.records.iter().map(|r| {
                    vec![
                        num(r.phase),
                        num(r.mean_energy),
                        num(r.energy_density),
                        num(r.entropy),
                        r.degenerate.to_string(),
                    ]
                }),
            )?;
            let (x, y): (Vec<f64>, Vec<f64>) = profile.resolved().map(|r| (r.mean_energy, r.entropy)).unzip();
            let mean = y.iter().sum::<f64>() / y.len().max(1) as f64;
            let mlsr = unitary_statistics(&result.unitary).ok().map(|r| r.mlsr);
            shared.summary.push(vec![
                n.to_string(),
                gen.dim().to_string(),
                opt(mlsr),
                num(mean),
                num(page_value(n)),
                num(pearson(&x, &y)),
            ]);
            shared.profiles.push(profile);
        }
        ExperimentKind::Scramble => {
            let label = config.operator_labels()[unit.expect("scramble tasks carry an operator")];
            let params = config.ramp_params(n)?;
            let times = config.sample_time_values(&params);
            let trace = mean_size_trace(&spec, &params, label, &times, &options(config))?;
            let tt = params.total_time();
            let mut long = Vec::new();
            for d in &trace {
                for (k, p) in d.probabilities.iter().enumerate() {
                    long.push(vec![num(d.t / tt), k.to_string(), num(*p)]);
                }
            }
            out.csv(&format!("osd_N{n}_{label}.csv"), &["t_over_T", "k", "P_k"], long)?;
            out.csv(
                &format!("mean_size_N{n}_{label}.csv"),
                &["t_over_T", "mu", "mu_over_N"],
                trace.iter().map(|d| vec![num(d.t / tt), num(d.mean), num(d.mean / n as f64)]),
            )?;
        }
    }
    Ok(())
}

fn ramp_unitary_task(
    config: &ExperimentConfig,
    n: usize,
    spec: &HamiltonianSpec,
    out: &mut Output,
    shared: &mut Shared,
) -> Result<(), CliError> {
    let params = config.ramp_params(n)?;
    let sector = sector_for(config, spec)?;
    let gen = RampGenerator::new(spec, sector.as_ref())?;
    let stride = config.checkpoint_stride.unwrap_or((params.total_steps() / 100).max(1));
    let opts = EvolveOptions {
        checkpoint_stride: Some(stride),
        ..options(config)
    };
    let params_hash = hex_digest(
        serde_json::json!({
            "model": spec,
            "sector": config.effective_sector(),
            "kind": params.kind(),
            "total_time": params.total_time(),
            "dt": params.dt(),
            "sampling": config.ramp.sampling,
        })
        .to_string()
        .as_bytes(),
    );
    let ckpt_dir = out.dir.join("checkpoints");
    if config.save_checkpoints {
        fs::create_dir_all(&ckpt_dir).map_err(CliError::io(&ckpt_dir))?;
    }
    let mut trace = Vec::new();
    let mut skipped = Vec::new();
    let mut written = Vec::new();
    let result = evolve_unitary_observed(&gen, &params, &opts, |cp| {
        let u = cp.block.to_operator();
        let (mlsr, skip) = match unitary_statistics(&u) {
            Ok(r) => (Some(r.mlsr), r.skipped_pairs),
            Err(Error::EmptyStatistics { skipped }) => (None, skipped),
            Err(e) => return Err(e),
        };
        trace.push((cp.step, OnsetPoint { t: cp.t, s: cp.s, mlsr }));
        skipped.push(skip);
        if config.save_checkpoints {
            let meta = CheckpointMeta {
                n_sites: n,
                sector: config.effective_sector().as_str().to_string(),
                dim: u.dim(),
                step: cp.step,
                t: cp.t,
                s: cp.s,
                params_hash: params_hash.clone(),
                layout: LAYOUT.to_string(),
            };
            let stem = ckpt_dir.join(format!("N{n}_step{:07}", cp.step));
            written.push(write_checkpoint(&stem, &u, &meta)?);
        }
        Ok(())
    })?;
    for pair in &written {
        for p in pair {
            out.record(p);
        }
    }
    let tt = params.total_time();
    out.csv(
        &format!("mlsr_trace_N{n}.csv"),
        &["step", "t", "t_over_T", "s", "mlsr", "skipped_pairs"],
        trace.iter().zip(&skipped).map(|((step, p), k)| {
            vec![step.to_string(), num(p.t), num(p.t / tt), num(p.s), opt(p.mlsr), k.to_string()]
        }),
    )?;
    let forward: Vec<OnsetPoint> = trace
        .iter()
        .filter(|(step, _)| *step <= params.steps_per_leg())
        .map(|(_, p)| p.clone())
        .collect();
    let onset = onset_from_trace(&forward, config.onset_band.unwrap_or(DEFAULT_ONSET_BAND));
    let stat = |u: &DenseOperator| unitary_statistics(u).ok().map(|r| r.mlsr);
    shared.summary.push(vec![
        n.to_string(),
        gen.dim().to_string(),
        opt(result.turning_point.as_ref().map_or_else(|| stat(&result.unitary), stat)),
        opt(result.turning_point.as_ref().and_then(|_| stat(&result.unitary))),
        opt(onset.map(|o| o.0)),
        opt(onset.map(|o| o.1)),
    ]);
    Ok(())
}

/// Cross-size outputs written after every task has run.
fn finish(
    config: &ExperimentConfig,
    out: &mut Output,
    shared: &mut Shared,
    tasks: &mut Vec<TaskStatus>,
) -> Result<(), CliError> {
    let rows = std::mem::take(&mut shared.summary);
    match config.experiment {
        ExperimentKind::Spectrum => {
            out.csv("spectrum_reference.csv", &["n_sites", "ensemble", "dim", "seed", "mlsr"], rows)?;
        }
        ExperimentKind::Gaps => {
            out.csv(
                "gaps_summary.csv",
                &["n_sites", "min_delta0", "s_min_delta0", "min_delta_avg", "s_min_delta_avg"],
                rows,
            )?;
        }
        ExperimentKind::RampUnitaryMlsr => {
            out.csv(
                "ramp_unitary_summary.csv",
                &["n_sites", "dim", "mlsr_T", "mlsr_2T", "t_star", "s_star"],
                rows,
            )?;
        }
        ExperimentKind::Eigenstates => {
            out.csv(
                "eigen_summary.csv",
                &["n_sites", "dim", "mlsr", "mean_entropy", "page_value", "pearson_energy_entropy"],
                rows,
            )?;
            if shared.profiles.len() >= 3 {
                let t0 = Instant::now();
                match scaling_regression(&shared.profiles, &default_bin_centers(), DEFAULT_BIN_SPACING / 2.0) {
                    Ok(fit) => {
                        out.csv(
                            "scaling_fit.csv",
                            &["E_d", "half_width", "a", "b", "n_points", "residual"],
                            fit.bins.iter().map(|b| {
                                vec![
                                    num(b.center),
                                    num(b.half_width),
                                    num(b.slope),
                                    num(b.intercept),
                                    b.points.iter().map(|p| p.2).sum::<usize>().to_string(),
                                    num(b.residual),
                                ]
                            }),
                        )?;
                        tasks.push(TaskStatus {
                            name: "scaling regression".into(),
                            ok: true,
                            error: None,
                            seconds: t0.elapsed().as_secs_f64(),
                        });
                    }
                    Err(e) => tasks.push(TaskStatus {
                        name: "scaling regression".into(),
                        ok: false,
                        error: Some(e.to_string()),
                        seconds: t0.elapsed().as_secs_f64(),
                    }),
                }
            }
        }
        ExperimentKind::Scramble => {
            out.csv(
                "scramble_reference.csv",
                &["n_sites", "haar_mean_size"],
                config
                    .resolved_sizes()
                    .into_iter()
                    .map(|n| vec![n.to_string(), num(haar_mean_size(n))]),
            )?;
        }
        ExperimentKind::ScsSweep | ExperimentKind::DickeSweep => {}
    }
    Ok(())
}

/// Default run directory: `runs/<experiment>-<first 12 hash digits>`.
pub fn default_out_dir(config: &ExperimentConfig) -> PathBuf {
    config
        .output_dir
        .clone()
        .unwrap_or_else(|| PathBuf::from("runs").join(format!("{}-{}", config.experiment.as_str(), &config.hash()[..12])))
}
