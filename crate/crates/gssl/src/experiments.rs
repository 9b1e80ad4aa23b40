//! Monte Carlo experiment harnesses: bandwidth convergence, reconstruction
//! error vs. label fraction, cut convergence, and empirical spectral
//! distribution convergence, plus the rate schedules tying (m, sigma) to n.

use std::collections::BTreeMap;

use ndarray::Array1;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{build_graph, cut_value, laplacian};
use crate::models::{
    overlap_integral, sublevel_mass, BoundarySpec, ModelSpec, SeedRecord,
};
use crate::numeric::pairwise_sum;
use crate::sampling::{
    cutoff_frequency, mean_error, reconstruct_bandlimited, select_labels, threshold_signal,
};
use crate::spectral::{bandwidth, eigencount, eigendecompose};

pub const SCHEMA_VERSION: u32 = 1;

/// Substream reserved for reference Monte Carlo estimates, far away from the
/// per-repetition streams.
const REFERENCE_STREAM: u64 = 1 << 48;

/// Monte Carlo sample count for reference sublevel masses.
const REFERENCE_MC_SAMPLES: usize = 1_000_000;

/// Rate-schedule parameters: m = round(m0 (log n)^y), sigma = sigma0 n^(-x/(m d)).
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct RateParams {
    pub m0: f64,
    pub sigma0: f64,
    pub x: f64,
    pub y: f64,
}

/// Nearest-integer estimator order (clamped to >= 1) and the kernel width it
/// implies for sample size n in dimension d.
pub fn rate_schedule(n: usize, params: &RateParams, d: usize) -> Result<(u32, f64)> {
    if n < 2 {
        return Err(Error::InvalidParameter(format!("n must be >= 2, got {n}")));
    }
    if params.m0 <= 0.0 || params.sigma0 <= 0.0 {
        return Err(Error::InvalidParameter("m0 and sigma0 must be positive".into()));
    }
    if !(params.y > 0.0 && params.y < 0.5) {
        return Err(Error::InvalidParameter(format!("y must lie in (0, 1/2), got {}", params.y)));
    }
    if !(params.x > 0.0 && params.x < 1.0) {
        return Err(Error::InvalidParameter(format!("x must lie in (0, 1), got {}", params.x)));
    }
    if d == 0 {
        return Err(Error::InvalidParameter("d must be >= 1".into()));
    }
    let m_real = params.m0 * (n as f64).ln().powf(params.y);
    let m = (m_real.round() as i64).max(1) as u32;
    let sigma = params.sigma0 * (n as f64).powf(-params.x / (f64::from(m) * d as f64));
    Ok((m, sigma))
}

/// Experiment configuration. One struct serves every experiment; fields not
/// used by a given experiment are ignored.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExperimentConfig {
    #[serde(flatten)]
    pub model: ModelSpec,
    pub n: usize,
    pub sigma: f64,
    /// sigma(n) = sigma * n^sigma_power across an n sweep (0 = fixed sigma)
    #[serde(default)]
    pub sigma_power: f64,
    /// estimator order for the iterated-Laplacian variant, if exercised
    #[serde(default)]
    pub m: Option<u32>,
    #[serde(default = "default_repetitions")]
    pub repetitions: usize,
    #[serde(default = "default_energy_tol")]
    pub energy_tol: f64,
    /// label fractions in (0,1), ascending (reconstruction experiment)
    #[serde(default)]
    pub label_fractions: Vec<f64>,
    pub base_seed: u64,
    #[serde(default)]
    pub rate_params: Option<RateParams>,
    /// sweep of sample sizes (bandwidth-sweep / cut experiments)
    #[serde(default)]
    pub n_sweep: Vec<usize>,
    /// evaluation grid for the spectral-distribution experiment
    #[serde(default)]
    pub t_grid: Vec<f64>,
    /// named boundary signals for the separable bandwidth experiment
    /// (preset names S1..S5); empty = the model's own boundary
    #[serde(default)]
    pub signals: Vec<String>,
}

fn default_repetitions() -> usize {
    20
}

fn default_energy_tol() -> f64 {
    1e-4
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        if self.repetitions == 0 {
            return Err(Error::Config("repetitions must be >= 1".into()));
        }
        if self.n == 0 {
            return Err(Error::Config("n must be >= 1".into()));
        }
        if self.sigma <= 0.0 {
            return Err(Error::Config("sigma must be positive".into()));
        }
        if !(0.0..1.0).contains(&self.energy_tol) {
            return Err(Error::Config("energy_tol must lie in [0,1)".into()));
        }
        let mut prev = 0.0;
        for &f in &self.label_fractions {
            if !(f > 0.0 && f < 1.0) {
                return Err(Error::Config(format!("label fraction {f} outside (0,1)")));
            }
            if f <= prev {
                return Err(Error::Config("label fractions must be strictly ascending".into()));
            }
            prev = f;
        }
        Ok(())
    }
}

/// One Monte Carlo repetition: its seed, the measured scalars keyed by
/// sweep-point label, or an error tag if the repetition failed.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RepRecord {
    pub rep: u64,
    pub seed: SeedRecord,
    #[serde(default)]
    pub values: BTreeMap<String, f64>,
    #[serde(default)]
    pub error: Option<String>,
}

/// One aggregate row: key, numeric abscissa where meaningful (fraction, t,
/// or n), mean and standard deviation over successful repetitions, and an
/// optional theoretical reference value.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Aggregate {
    pub key: String,
    pub x: Option<f64>,
    pub mean: f64,
    pub std: f64,
    pub reference: Option<f64>,
    pub reference_note: Option<String>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExperimentResult {
    pub schema_version: u32,
    pub experiment: String,
    pub config: ExperimentConfig,
    pub records: Vec<RepRecord>,
    pub aggregates: Vec<Aggregate>,
}

impl ExperimentResult {
    pub fn failed_repetitions(&self) -> usize {
        self.records.iter().filter(|r| r.error.is_some()).count()
    }

    /// An experiment fails outright when more than 5% of its repetitions
    /// errored. Results (including the error tags) remain available so
    /// partial artifacts can still be persisted.
    pub fn check_failures(&self) -> Result<()> {
        let failed = self.failed_repetitions();
        let total = self.records.len();
        if failed * 20 > total {
            return Err(Error::TooManyFailedRepetitions { failed, total });
        }
        Ok(())
    }

    /// Aggregate CSV: `key,x,mean,std,reference`.
    pub fn aggregates_csv(&self) -> String {
        let mut out = String::from("key,x,mean,std,reference\n");
        for a in &self.aggregates {
            let x = a.x.map_or(String::new(), |v| format!("{v}"));
            let r = a.reference.map_or(String::new(), |v| format!("{v}"));
            out.push_str(&format!("{},{},{},{},{}\n", a.key, x, a.mean, a.std, r));
        }
        out
    }
}

/// Recompute aggregates from per-repetition records; deterministic given the
/// records (pairwise summation in rep order).
pub fn aggregate_records(
    records: &[RepRecord],
    refs: &BTreeMap<String, (Option<f64>, Option<f64>, Option<String>)>,
) -> Vec<Aggregate> {
    let mut keys: Vec<&String> = Vec::new();
    for r in records {
        for k in r.values.keys() {
            if !keys.contains(&k) {
                keys.push(k);
            }
        }
    }
    keys.sort();
    keys.into_iter()
        .map(|k| {
            let vals: Vec<f64> = records
                .iter()
                .filter_map(|r| r.values.get(k).copied())
                .collect();
            let mean = pairwise_sum(&vals) / vals.len() as f64;
            let std = if vals.len() > 1 {
                let sq: Vec<f64> = vals.iter().map(|v| (v - mean) * (v - mean)).collect();
                (pairwise_sum(&sq) / (vals.len() - 1) as f64).sqrt()
            } else {
                0.0
            };
            let (x, reference, reference_note) =
                refs.get(k).cloned().unwrap_or((None, None, None));
            Aggregate { key: k.clone(), x, mean, std, reference, reference_note }
        })
        .collect()
}

/// Run `reps` repetitions of `body`, recording failures without dropping
/// them (see [`ExperimentResult::check_failures`] for the failure budget).
fn run_reps<F>(cfg_seed: u64, reps: usize, mut body: F) -> Vec<RepRecord>
where
    F: FnMut(u64, SeedRecord) -> Result<BTreeMap<String, f64>>,
{
    let mut records = Vec::with_capacity(reps);
    for rep in 0..reps as u64 {
        let seed = SeedRecord::with_stream(cfg_seed, rep);
        match body(rep, seed) {
            Ok(values) => records.push(RepRecord { rep, seed, values, error: None }),
            Err(e) => {
                log::warn!("repetition {rep} failed: {e}");
                records.push(RepRecord {
                    rep,
                    seed,
                    values: BTreeMap::new(),
                    error: Some(e.to_string()),
                });
            }
        }
    }
    records
}

/// Resolve the measured indicator signals for a config: named preset
/// boundaries for the separable model, the class-A indicator for the
/// nonseparable one.
fn resolve_signals(cfg: &ExperimentConfig) -> Result<Vec<(String, Option<BoundarySpec>)>> {
    match &cfg.model {
        ModelSpec::Separable(m) => {
            if cfg.signals.is_empty() {
                return Ok(vec![("S".into(), Some(m.boundary))]);
            }
            cfg.signals
                .iter()
                .map(|name| {
                    BoundarySpec::preset(name)
                        .map(|b| (name.clone(), Some(b)))
                        .ok_or_else(|| {
                            Error::Config(format!(
                                "unknown boundary {name:?}; valid names are S1..S5"
                            ))
                        })
                })
                .collect()
        }
        ModelSpec::Nonseparable(_) => Ok(vec![("A".into(), None)]),
    }
}

fn signal_for(
    dataset: &crate::models::Dataset,
    boundary: &Option<BoundarySpec>,
) -> Array1<f64> {
    match boundary {
        Some(b) => Array1::from_iter(
            b.indicator(&dataset.points).into_iter().map(f64::from),
        ),
        None => dataset.indicator_signal(),
    }
}

fn sweep_stream(sweep_idx: usize, rep: u64) -> u64 {
    ((sweep_idx as u64) << 32) | rep
}

/// Bandwidth convergence: per repetition, the threshold bandwidth of each
/// indicator signal; aggregates carry the boundary density suprema as
/// reference values. With a nonempty `n_sweep` the experiment repeats per
/// sample size and keys rows as `{signal}/n={n}` (trend study).
pub fn run_bandwidth_experiment(cfg: &ExperimentConfig) -> Result<ExperimentResult> {
    cfg.validate()?;
    let signals = resolve_signals(cfg)?;
    let n_values = if cfg.n_sweep.is_empty() { vec![cfg.n] } else { cfg.n_sweep.clone() };
    let sweeping = !cfg.n_sweep.is_empty();

    // reference suprema, computed once per signal
    let mut refs = BTreeMap::new();
    let mut sups = Vec::new();
    for (name, boundary) in &signals {
        let sup = match (&cfg.model, boundary) {
            (ModelSpec::Separable(m), Some(b)) => m.boundary_sup_density(b)?,
            (ModelSpec::Nonseparable(m), None) => m.overlap_sup_density()?,
            _ => unreachable!("signal resolution is model-consistent"),
        };
        sups.push(sup);
        for &n in &n_values {
            let key = if sweeping { format!("{name}/n={n}") } else { name.clone() };
            refs.insert(
                key,
                (
                    Some(n as f64),
                    Some(sup),
                    Some("density supremum over the boundary".into()),
                ),
            );
        }
    }

    let mut records = Vec::new();
    for (si, &n) in n_values.iter().enumerate() {
        let sigma = cfg.sigma * (n as f64).powf(cfg.sigma_power);
        let mut batch = run_reps(cfg.base_seed, cfg.repetitions, |rep, _| {
            let seed = SeedRecord::with_stream(cfg.base_seed, sweep_stream(si, rep));
            let data = cfg.model.sample(n, seed)?;
            let graph = build_graph(&data, sigma)?;
            let lap = laplacian(&graph);
            let dec = eigendecompose(lap.view())?;
            let mut values = BTreeMap::new();
            for (name, boundary) in &signals {
                let f = signal_for(&data, boundary);
                let key = if sweeping { format!("{name}/n={n}") } else { name.clone() };
                values.insert(key.clone(), bandwidth(&dec, &f, cfg.energy_tol)?);
                if let Some(m) = cfg.m {
                    values.insert(
                        format!("{key}:omega_m"),
                        crate::spectral::bandwidth_estimate(lap.view(), &f, m)?,
                    );
                }
            }
            Ok(values)
        });
        // distinguish repetitions across sweep points in the stored records
        for r in &mut batch {
            r.seed = SeedRecord::with_stream(cfg.base_seed, sweep_stream(si, r.rep));
            r.rep = sweep_stream(si, r.rep);
        }
        records.extend(batch);
    }

    Ok(ExperimentResult {
        schema_version: SCHEMA_VERSION,
        experiment: "bandwidth".into(),
        config: cfg.clone(),
        aggregates: aggregate_records(&records, &refs),
        records,
    })
}

/// Reconstruction error vs. label fraction. For each repetition and each
/// fraction rho: l = round(rho n) labels picked by pivoted elimination,
/// theta = cutoff frequency, bandlimited least-squares reconstruction,
/// thresholding, mean error over unlabeled nodes. The reference abscissa is
/// the Monte Carlo sublevel mass at the boundary density supremum.
pub fn run_reconstruction_experiment(cfg: &ExperimentConfig) -> Result<ExperimentResult> {
    cfg.validate()?;
    if cfg.label_fractions.is_empty() {
        return Err(Error::Config("label_fractions must be nonempty".into()));
    }
    let sup = cfg.model.boundary_sup_density()?;
    let reference = sublevel_mass(
        &cfg.model,
        sup,
        REFERENCE_MC_SAMPLES,
        SeedRecord::with_stream(cfg.base_seed, REFERENCE_STREAM),
    )?;

    let n = cfg.n;
    let records = run_reps(cfg.base_seed, cfg.repetitions, |_, seed| {
        let data = cfg.model.sample(n, seed)?;
        let graph = build_graph(&data, cfg.sigma)?;
        let lap = laplacian(&graph);
        let dec = eigendecompose(lap.view())?;
        let truth = data.indicator_signal();
        let mut values = BTreeMap::new();
        for &rho in &cfg.label_fractions {
            let l = ((rho * n as f64).round() as usize).clamp(1, n - 1);
            let labels = select_labels(&dec, l)?;
            let theta = cutoff_frequency(&dec, l)?;
            let y = Array1::from_iter(labels.indices.iter().map(|&i| truth[i]));
            let rec = reconstruct_bandlimited(&dec, &labels, &y, theta)?;
            if rec.rank_deficient {
                log::warn!("rank-deficient labeled submatrix at rho={rho}");
            }
            let predicted = threshold_signal(&rec.signal, 0.5);
            values.insert(fraction_key(rho), mean_error(&predicted, &truth, &labels)?);
        }
        Ok(values)
    });

    let mut refs = BTreeMap::new();
    for &rho in &cfg.label_fractions {
        refs.insert(
            fraction_key(rho),
            (
                Some(rho),
                Some(reference.mass),
                Some(format!(
                    "MC sublevel mass at boundary supremum (std err {:.2e})",
                    reference.std_error
                )),
            ),
        );
    }

    Ok(ExperimentResult {
        schema_version: SCHEMA_VERSION,
        experiment: "reconstruction".into(),
        config: cfg.clone(),
        aggregates: aggregate_records(&records, &refs),
        records,
    })
}

fn fraction_key(rho: f64) -> String {
    format!("rho={rho:.6}")
}

/// Cut convergence: per repetition the normalized cut Cut(A, A^c)/n^2 of the
/// class-A indicator, whose expectation converges to the overlap integral
/// for kernel-normalized weights as sigma -> 0, n sigma^d -> infinity. The
/// optional n sweep applies sigma(n) = sigma * n^sigma_power.
pub fn run_cut_convergence(cfg: &ExperimentConfig) -> Result<ExperimentResult> {
    cfg.validate()?;
    let spec = match &cfg.model {
        ModelSpec::Nonseparable(m) => m,
        ModelSpec::Separable(_) => {
            return Err(Error::Config(
                "cut convergence requires the nonseparable model".into(),
            ))
        }
    };
    let limit = overlap_integral(spec);
    let n_values = if cfg.n_sweep.is_empty() { vec![cfg.n] } else { cfg.n_sweep.clone() };

    let mut refs = BTreeMap::new();
    let mut records = Vec::new();
    for (si, &n) in n_values.iter().enumerate() {
        let sigma = cfg.sigma * (n as f64).powf(cfg.sigma_power);
        let key = format!("n={n}");
        refs.insert(
            key.clone(),
            (Some(n as f64), Some(limit), Some("overlap integral (quadrature)".into())),
        );
        let mut batch = run_reps(cfg.base_seed, cfg.repetitions, |rep, _| {
            let seed = SeedRecord::with_stream(cfg.base_seed, sweep_stream(si, rep));
            let data = cfg.model.sample(n, seed)?;
            let graph = build_graph(&data, sigma)?;
            let cut = cut_value(&graph, &data.indicator_signal())?;
            let mut values = BTreeMap::new();
            values.insert(key.clone(), cut / (n as f64 * n as f64));
            Ok(values)
        });
        for r in &mut batch {
            r.seed = SeedRecord::with_stream(cfg.base_seed, sweep_stream(si, r.rep));
            r.rep = sweep_stream(si, r.rep);
        }
        records.extend(batch);
    }

    Ok(ExperimentResult {
        schema_version: SCHEMA_VERSION,
        experiment: "cut".into(),
        config: cfg.clone(),
        aggregates: aggregate_records(&records, &refs),
        records,
    })
}

/// Default t-grid for the spectral-distribution experiment: 50 points in
/// (0.01, 0.65).
pub fn default_t_grid() -> Vec<f64> {
    let (lo, hi, k) = (0.01, 0.65, 50);
    (0..k)
        .map(|i| lo + (hi - lo) * (i as f64 + 0.5) / k as f64)
        .collect()
}

/// Empirical spectral distribution: per repetition, (1/n) N_L(t) over the
/// t-grid; the reference curve is the Monte Carlo sublevel mass of the
/// density at each t.
pub fn run_esd_experiment(cfg: &ExperimentConfig) -> Result<ExperimentResult> {
    cfg.validate()?;
    let grid = if cfg.t_grid.is_empty() { default_t_grid() } else { cfg.t_grid.clone() };
    if grid.iter().any(|&t| t <= 0.0) {
        // the Laplacian always has a zero eigenvalue, so (1/n)N_L(0) >= 1/n
        // while the density sublevel mass at 0 is 0; keep the grid above the
        // atom
        return Err(Error::Config("t grid must be strictly positive".into()));
    }

    let mut refs = BTreeMap::new();
    for (i, &t) in grid.iter().enumerate() {
        let mass = sublevel_mass(
            &cfg.model,
            t,
            REFERENCE_MC_SAMPLES,
            SeedRecord::with_stream(cfg.base_seed, REFERENCE_STREAM + 1 + i as u64),
        )?;
        refs.insert(
            t_key(t),
            (Some(t), Some(mass.mass), Some("MC sublevel mass".into())),
        );
    }

    let n = cfg.n;
    let records = run_reps(cfg.base_seed, cfg.repetitions, |_, seed| {
        let data = cfg.model.sample(n, seed)?;
        let graph = build_graph(&data, cfg.sigma)?;
        let dec = eigendecompose(laplacian(&graph).view())?;
        let mut values = BTreeMap::new();
        for &t in &grid {
            values.insert(t_key(t), eigencount(&dec, t) as f64 / n as f64);
        }
        Ok(values)
    });

    Ok(ExperimentResult {
        schema_version: SCHEMA_VERSION,
        experiment: "esd".into(),
        config: cfg.clone(),
        aggregates: aggregate_records(&records, &refs),
        records,
    })
}

fn t_key(t: f64) -> String {
    format!("t={t:.6}")
}
