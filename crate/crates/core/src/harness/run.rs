//! Single runs and parameter sweeps.

use std::path::{Path, PathBuf};
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::config::ExperimentConfig;
use super::output::{write_json, Cell, Csv};
use super::stats::{fit_profile_3sine, pearson_correlation, rebound_time, stationary_summary, StationarySummary, ThreeSineFit};
use crate::checkpoint::Checkpoint;
use crate::entanglement::{block_entropy, entanglement_links, entropy_profile, EntropyTable};
use crate::error::{Error, Result};
use crate::evolve::{evolve_cycles, ground_state, Cadence, EvolveOptions, ModeMatrix, PropagatorCache, Propagation};
use crate::floquet::{floquet_data, floquet_occupations, spacing_statistics, ReferenceEnsemble, SpacingOptions, SpacingStats};
use crate::lattice::single_body_matrix;
use crate::observables::{energy, mode_occupations, SineModes};
use crate::rse::entropy_approx;

/// One recorded instant.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeriesRow {
    pub cycle: usize,
    pub step: usize,
    pub time: f64,
    pub obstacle: usize,
    pub energy: Option<f64>,
    /// `S(N/2)`.
    pub entropy_half: Option<f64>,
    /// Entropy of the sites left of the obstacle; per-step cadence only.
    pub entropy_obstacle: Option<f64>,
}

/// Scalars reported for a run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub n: usize,
    pub tau: f64,
    pub samples: usize,
    pub burn_in_samples: usize,
    /// Statistics of `E/N` after burn-in.
    pub energy_per_site: Option<StationarySummary>,
    /// Statistics of `S(N/2)/N` after burn-in.
    pub entropy_per_site: Option<StationarySummary>,
    pub corr_energy_entropy: Option<f64>,
    pub r_tilde: Option<f64>,
    pub profile_fit: Option<ThreeSineFit>,
    pub rebound_time: f64,
    pub final_orthonormality_defect: f64,
}

#[derive(Debug, Clone)]
pub struct FloquetSummary {
    pub quasi: Vec<f64>,
    /// Floquet-mode occupations of the initial ground state.
    pub occupations: Vec<f64>,
    pub spacing: SpacingStats,
}

#[derive(Debug, Clone)]
pub struct ExperimentResult {
    pub config: ExperimentConfig,
    pub series: Vec<SeriesRow>,
    pub summary: Summary,
    /// Post-burn-in average of the clean-chain mode occupations.
    pub occupations: Option<Vec<f64>>,
    /// Post-burn-in average of `S(ℓ)`, `ℓ = 0..=N`.
    pub profile: Option<Vec<f64>>,
    pub floquet: Option<FloquetSummary>,
    pub links: Option<EntropyTable>,
    pub final_state: ModeMatrix,
}

/// Runs the experiment in memory.
pub fn simulate(config: &ExperimentConfig) -> Result<ExperimentResult> {
    config.validate()?;
    let params = config.params()?;
    let n = params.n();
    let cache = PropagatorCache::new(params)?;
    let gs = ground_state(&single_body_matrix(&params, None)?, params.m())?;

    let per_cycle = match config.cadence {
        Cadence::CycleStart => 1,
        Cadence::PerStep => params.positions(),
    };
    let total = config.n_cycles * per_cycle;
    let burn = (config.burn_in_fraction * total as f64).floor() as usize;
    let an = config.analyses;
    let modes = an.occupations.then(|| SineModes::new(n));
    let mut occ_sum = an.occupations.then(|| vec![0.0; n]);
    let mut prof_sum = an.profile.then(|| vec![0.0; n + 1]);
    let mut series = Vec::with_capacity(total);
    let mut failure: Option<Error> = None;

    let opts = EvolveOptions {
        cadence: config.cadence,
        reorthonormalize_every: config.reorthonormalize_every,
        propagation: Propagation::Auto,
    };
    let final_state = evolve_cycles(gs.clone(), &cache, config.n_cycles, opts, |snap| {
        if failure.is_some() {
            return;
        }
        let mut record = || -> Result<()> {
            let idx = series.len();
            let e = if an.energy { Some(energy(snap.state, snap.hamiltonian)?) } else { None };
            let (half, obs) = if an.entropy {
                let half = block_entropy(snap.state, 0..n / 2)?;
                let obs = match config.cadence {
                    Cadence::PerStep => Some(block_entropy(snap.state, 0..snap.obstacle + 1)?),
                    Cadence::CycleStart => None,
                };
                (Some(half), obs)
            } else {
                (None, None)
            };
            series.push(SeriesRow {
                cycle: snap.cycle,
                step: snap.step,
                time: snap.time,
                obstacle: snap.obstacle,
                energy: e,
                entropy_half: half,
                entropy_obstacle: obs,
            });
            if idx >= burn {
                if let (Some(sum), Some(modes)) = (occ_sum.as_mut(), modes.as_ref()) {
                    let o = mode_occupations(snap.state, modes)?;
                    sum.iter_mut().zip(o.values()).for_each(|(a, b)| *a += b);
                }
                if let Some(sum) = prof_sum.as_mut() {
                    let p = entropy_profile(snap.state);
                    sum.iter_mut().zip(&p).for_each(|(a, b)| *a += b);
                }
            }
            Ok(())
        };
        if let Err(e) = record() {
            failure = Some(e);
        }
    })?;
    if let Some(e) = failure {
        return Err(e);
    }

    let kept = (total - burn) as f64;
    let occupations = occ_sum.map(|v| v.into_iter().map(|x| x / kept).collect::<Vec<_>>());
    let profile = prof_sum.map(|v| v.into_iter().map(|x| x / kept).collect::<Vec<_>>());

    let per_site = |f: fn(&SeriesRow) -> Option<f64>| -> Option<Vec<f64>> {
        series.iter().map(|r| f(r).map(|v| v / n as f64)).collect()
    };
    let e_series = per_site(|r| r.energy);
    let s_series = per_site(|r| r.entropy_half);
    let summarize = |s: &Option<Vec<f64>>| {
        s.as_ref()
            .and_then(|v| stationary_summary(v, config.burn_in_fraction, config.histogram_bins).ok())
    };
    let energy_per_site = summarize(&e_series);
    let entropy_per_site = summarize(&s_series);
    let corr_energy_entropy = match (&e_series, &s_series) {
        (Some(e), Some(s)) => pearson_correlation(&e[burn..], &s[burn..]).ok(),
        _ => None,
    };

    let floquet = if an.floquet {
        let data = floquet_data(&cache)?;
        let occ = floquet_occupations(&data, &gs)?;
        let spacing = spacing_statistics(&data.quasi, SpacingOptions::default())?;
        Some(FloquetSummary {
            quasi: data.quasi,
            occupations: occ.0,
            spacing,
        })
    } else {
        None
    };
    let links = if an.links { Some(entanglement_links(&final_state)?) } else { None };
    let profile_fit = match &profile {
        Some(p) => Some(fit_profile_3sine(p, n)?),
        None => None,
    };

    let summary = Summary {
        n,
        tau: params.tau(),
        samples: total,
        burn_in_samples: burn,
        energy_per_site,
        entropy_per_site,
        corr_energy_entropy,
        r_tilde: floquet.as_ref().map(|f| f.spacing.r_tilde_mean),
        profile_fit,
        rebound_time: rebound_time(n, params.tau())?,
        final_orthonormality_defect: final_state.orthonormality_defect(),
    };
    Ok(ExperimentResult {
        config: config.clone(),
        series,
        summary,
        occupations,
        profile,
        floquet,
        links,
        final_state,
    })
}

fn metadata(csv: &mut Csv, cfg: &ExperimentConfig) {
    csv.meta("n", cfg.n)
        .meta("tau", cfg.tau)
        .meta("n_cycles", cfg.n_cycles)
        .meta(
            "cadence",
            match cfg.cadence {
                Cadence::PerStep => "per-step",
                Cadence::CycleStart => "cycle-start",
            },
        )
        .meta("seed", cfg.seed)
        .meta("version", env!("CARGO_PKG_VERSION"));
}

/// Writes the CSV and JSON outputs of a run into `dir`; returns the file list.
pub fn write_outputs(result: &ExperimentResult, dir: &Path) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(dir)?;
    let cfg = &result.config;
    let n = result.summary.n;
    let mut files = Vec::new();
    let mut emit = |name: &str, csv: &Csv| -> Result<()> {
        let path = dir.join(name);
        csv.write(&path)?;
        files.push(path);
        Ok(())
    };

    let mut csv = Csv::new();
    metadata(&mut csv, cfg);
    let mut header = vec!["cycle", "step", "time", "obstacle"];
    let an = cfg.analyses;
    if an.energy {
        header.extend(["energy", "energy_per_site"]);
    }
    let per_step = cfg.cadence == Cadence::PerStep;
    if an.entropy {
        header.extend(["entropy_half", "entropy_half_per_site"]);
        if per_step {
            header.push("entropy_obstacle");
        }
    }
    csv.header(&header);
    for r in &result.series {
        let mut cells: Vec<Cell> = vec![r.cycle.into(), r.step.into(), r.time.into(), r.obstacle.into()];
        if an.energy {
            cells.extend([r.energy.into(), r.energy.map(|v| v / n as f64).into()]);
        }
        if an.entropy {
            cells.extend([r.entropy_half.into(), r.entropy_half.map(|v| v / n as f64).into()]);
            if per_step {
                cells.push(r.entropy_obstacle.into());
            }
        }
        csv.row(&cells)?;
    }
    emit("series.csv", &csv)?;

    if let Some(occ) = &result.occupations {
        let modes = SineModes::new(n);
        let mut csv = Csv::new();
        metadata(&mut csv, cfg);
        csv.header(&["k", "mode_energy", "occupation"]);
        for (i, &o) in occ.iter().enumerate() {
            csv.row(&[(i + 1).into(), modes.energy(i + 1).into(), o.into()])?;
        }
        emit("occupations.csv", &csv)?;
    }

    if let Some(prof) = &result.profile {
        let mut csv = Csv::new();
        metadata(&mut csv, cfg);
        csv.header(&["ell", "entropy", "rse_approx", "three_sine_fit"]);
        let fit = result.summary.profile_fit.expect("fit accompanies profile");
        for (ell, &s) in prof.iter().enumerate() {
            let approx = entropy_approx(ell.min(n - ell), n)?;
            csv.row(&[ell.into(), s.into(), approx.into(), fit.eval(ell as f64, n).into()])?;
        }
        emit("profile.csv", &csv)?;
    }

    if let Some(fl) = &result.floquet {
        let mut csv = Csv::new();
        metadata(&mut csv, cfg);
        csv.header(&["k", "quasi_energy", "quasi_energy_times_tau", "occupation"]);
        for (k, (&q, &o)) in fl.quasi.iter().zip(&fl.occupations).enumerate() {
            csv.row(&[k.into(), q.into(), (q * cfg.tau).into(), o.into()])?;
        }
        emit("floquet.csv", &csv)?;

        let mut csv = Csv::new();
        metadata(&mut csv, cfg);
        csv.meta("r_tilde_mean", fl.spacing.r_tilde_mean);
        csv.header(&["s", "empirical_cdf", "poisson_cdf", "goe_cdf"]);
        for (s, c) in fl.spacing.empirical_cdf() {
            csv.row(&[
                s.into(),
                c.into(),
                ReferenceEnsemble::Poisson.cdf(s).into(),
                ReferenceEnsemble::Goe.cdf(s).into(),
            ])?;
        }
        emit("spacing_cdf.csv", &csv)?;
    }

    if let Some(t) = &result.links {
        emit("links.csv", &links_csv(t, Some(cfg))?)?;
        emit("link_fractions.csv", &fractions_csv(t, Some(cfg))?)?;
    }

    let summary = dir.join("summary.json");
    write_json(&summary, &result.summary)?;
    files.push(summary);

    if cfg.checkpoint {
        let path = dir.join("checkpoint.json");
        Checkpoint::new(cfg.params()?, cfg.n_cycles as u64, &result.final_state).save(&path)?;
        files.push(path);
    }
    Ok(files)
}

/// Link matrix as `i,j,link` triplets over the upper triangle.
pub fn links_csv(t: &EntropyTable, cfg: Option<&ExperimentConfig>) -> Result<Csv> {
    let mut csv = Csv::new();
    if let Some(cfg) = cfg {
        metadata(&mut csv, cfg);
    }
    csv.header(&["i", "j", "link"]);
    let n = t.n();
    for i in 0..n {
        for j in i + 1..n {
            csv.row(&[i.into(), j.into(), t.links[(i, j)].into()])?;
        }
    }
    Ok(csv)
}

pub fn fractions_csv(t: &EntropyTable, cfg: Option<&ExperimentConfig>) -> Result<Csv> {
    let mut csv = Csv::new();
    if let Some(cfg) = cfg {
        metadata(&mut csv, cfg);
    }
    csv.header(&["r", "fraction"]);
    for (r, &f) in t.fractions.iter().enumerate() {
        csv.row(&[r.into(), f.into()])?;
    }
    Ok(csv)
}

#[derive(Debug, Serialize)]
struct Manifest<'a> {
    config: &'a ExperimentConfig,
    version: &'static str,
    wall_seconds: f64,
    files: Vec<String>,
}

/// Runs the experiment and, when `output_dir` is set, writes its outputs and
/// a `manifest.json`.
pub fn run_experiment(config: &ExperimentConfig) -> Result<(ExperimentResult, Vec<PathBuf>)> {
    let start = Instant::now();
    let result = simulate(config)?;
    let Some(dir) = &config.output_dir else {
        return Ok((result, Vec::new()));
    };
    let mut files = write_outputs(&result, dir)?;
    let manifest = dir.join("manifest.json");
    write_json(
        &manifest,
        &Manifest {
            config,
            version: env!("CARGO_PKG_VERSION"),
            wall_seconds: start.elapsed().as_secs_f64(),
            files: files
                .iter()
                .filter_map(|p| p.file_name().map(|s| s.to_string_lossy().into_owned()))
                .collect(),
        },
    )?;
    files.push(manifest);
    Ok((result, files))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SweepAxis {
    Tau(Vec<f64>),
    N(Vec<usize>),
}

impl SweepAxis {
    fn len(&self) -> usize {
        match self {
            SweepAxis::Tau(v) => v.len(),
            SweepAxis::N(v) => v.len(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct SweepRow {
    pub index: usize,
    pub n: usize,
    pub tau: f64,
    pub seed: u64,
    /// The run summary, or the error message of a failed point.
    pub outcome: std::result::Result<Summary, String>,
}

/// Runs one experiment per axis value in parallel. Point `k` uses seed
/// `template.seed + k` and, if the template has an output directory, writes
/// into `point_k/` below it next to an aggregated `sweep.csv`. Failed points
/// are reported in their row rather than aborting the sweep.
pub fn sweep(template: &ExperimentConfig, axis: &SweepAxis) -> Result<Vec<SweepRow>> {
    if axis.len() == 0 {
        return Err(Error::Config("empty sweep".into()));
    }
    let configs: Vec<ExperimentConfig> = (0..axis.len())
        .map(|k| {
            let mut c = template.clone();
            match axis {
                SweepAxis::Tau(v) => c.tau = v[k],
                SweepAxis::N(v) => c.n = v[k],
            }
            c.seed = template.seed.wrapping_add(k as u64);
            c.output_dir = template.output_dir.as_ref().map(|d| d.join(format!("point_{k}")));
            c
        })
        .collect();
    let rows: Vec<SweepRow> = configs
        .par_iter()
        .enumerate()
        .map(|(index, c)| SweepRow {
            index,
            n: c.n,
            tau: c.tau,
            seed: c.seed,
            outcome: run_experiment(c).map(|(r, _)| r.summary).map_err(|e| e.to_string()),
        })
        .collect();
    if let Some(dir) = &template.output_dir {
        std::fs::create_dir_all(dir)?;
        sweep_csv(&rows)?.write(&dir.join("sweep.csv"))?;
    }
    Ok(rows)
}

pub fn sweep_csv(rows: &[SweepRow]) -> Result<Csv> {
    let mut csv = Csv::new();
    csv.meta("version", env!("CARGO_PKG_VERSION"));
    csv.header(&[
        "index",
        "n",
        "tau",
        "seed",
        "energy_per_site_mean",
        "energy_per_site_std",
        "entropy_per_site_mean",
        "entropy_per_site_std",
        "corr_energy_entropy",
        "r_tilde",
        "status",
    ]);
    for r in rows {
        let mut cells: Vec<Cell> = vec![r.index.into(), r.n.into(), r.tau.into(), Cell::Int(r.seed as i64)];
        match &r.outcome {
            Ok(s) => {
                let pick = |x: &Option<StationarySummary>| -> [Cell; 2] {
                    [x.as_ref().map(|v| v.mean).into(), x.as_ref().map(|v| v.std).into()]
                };
                cells.extend(pick(&s.energy_per_site));
                cells.extend(pick(&s.entropy_per_site));
                cells.extend([s.corr_energy_entropy.into(), s.r_tilde.into()]);
            }
            Err(_) => cells.extend(std::iter::repeat_n(Cell::Empty, 6)),
        }
        cells.push(Cell::Text(match &r.outcome {
            Ok(_) => "ok".into(),
            Err(e) => format!("error: {e}"),
        }));
        csv.row(&cells)?;
    }
    Ok(csv)
}
