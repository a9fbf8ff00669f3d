use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use stirred_vacuum::checkpoint::Checkpoint;
use stirred_vacuum::entanglement::entanglement_links;
use stirred_vacuum::evolve::{Cadence, PropagatorCache};
use stirred_vacuum::floquet::{
    floquet_data, floquet_occupations, spacing_statistics, ReferenceEnsemble, SpacingOptions, Unfolding,
};
use stirred_vacuum::harness::ensemble::{ensemble_report, write_ensemble};
use stirred_vacuum::harness::output::{write_json, Csv};
use stirred_vacuum::harness::run::{fractions_csv, links_csv, sweep_csv};
use stirred_vacuum::harness::verify::{run_checks, write_reference};
use stirred_vacuum::harness::{run_experiment, sweep, ExperimentConfig, SweepAxis};
use stirred_vacuum::{evolve::ground_state, lattice::single_body_matrix, ChainParams};

#[derive(Parser)]
#[command(name = "stirred-vacuum", version, about = "Free-fermion chain stirred by a moving obstacle")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one experiment.
    Run(RunArgs),
    /// Run one experiment per value of tau or N.
    Sweep(SweepArgs),
    /// Floquet spectrum and level statistics of one period.
    Floquet(FloquetArgs),
    /// Random Slater ensemble sampling and law checks.
    Rse(RseArgs),
    /// Entanglement links of a checkpointed state.
    Links(LinksArgs),
    /// Analytic cross-checks and reference curves.
    Verify(VerifyArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum CadenceArg {
    CycleStart,
    PerStep,
}

#[derive(Args)]
struct ConfigArgs {
    /// JSON config; flags given on the command line override it.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: u64,
    #[arg(short = 'n', long)]
    n: Option<usize>,
    #[arg(long)]
    tau: Option<f64>,
    #[arg(long)]
    cycles: Option<usize>,
    #[arg(long)]
    burn_in: Option<f64>,
    #[arg(long, value_enum)]
    cadence: Option<CadenceArg>,
    /// Re-orthonormalize every R cycles (0 disables).
    #[arg(long)]
    reorthonormalize_every: Option<usize>,
    #[arg(long)]
    bins: Option<usize>,
    #[arg(short, long)]
    out: Option<PathBuf>,
    #[arg(long)]
    no_energy: bool,
    #[arg(long)]
    no_entropy: bool,
    #[arg(long)]
    occupations: bool,
    #[arg(long)]
    profile: bool,
    #[arg(long)]
    floquet: bool,
    #[arg(long)]
    links: bool,
    #[arg(long)]
    checkpoint: bool,
}

impl ConfigArgs {
    fn resolve(&self) -> Result<ExperimentConfig, String> {
        let mut c = match &self.config {
            Some(p) => ExperimentConfig::from_json_file(p).map_err(|e| e.to_string())?,
            None => ExperimentConfig::default(),
        };
        c.seed = self.seed;
        if let Some(v) = self.n {
            c.n = v;
        }
        if let Some(v) = self.tau {
            c.tau = v;
        }
        if let Some(v) = self.cycles {
            c.n_cycles = v;
        }
        if let Some(v) = self.burn_in {
            c.burn_in_fraction = v;
        }
        if let Some(v) = self.cadence {
            c.cadence = match v {
                CadenceArg::CycleStart => Cadence::CycleStart,
                CadenceArg::PerStep => Cadence::PerStep,
            };
        }
        if let Some(v) = self.reorthonormalize_every {
            c.reorthonormalize_every = v;
        }
        if let Some(v) = self.bins {
            c.histogram_bins = v;
        }
        if self.out.is_some() {
            c.output_dir = self.out.clone();
        }
        let a = &mut c.analyses;
        a.energy &= !self.no_energy;
        a.entropy &= !self.no_entropy;
        a.occupations |= self.occupations;
        a.profile |= self.profile;
        a.floquet |= self.floquet;
        a.links |= self.links;
        c.checkpoint |= self.checkpoint;
        c.validate().map_err(|e| e.to_string())?;
        Ok(c)
    }
}

#[derive(Args)]
struct RunArgs {
    #[command(flatten)]
    config: ConfigArgs,
}

#[derive(Args)]
struct SweepArgs {
    #[command(flatten)]
    config: ConfigArgs,
    /// Comma-separated tau values.
    #[arg(long, value_delimiter = ',', conflicts_with = "ns", required_unless_present = "ns")]
    taus: Vec<f64>,
    /// Comma-separated chain lengths.
    #[arg(long, value_delimiter = ',')]
    ns: Vec<usize>,
}

#[derive(Args)]
struct FloquetArgs {
    #[arg(short = 'n', long, default_value_t = 64)]
    n: usize,
    #[arg(long)]
    tau: f64,
    /// Levels dropped at each end (default N/32).
    #[arg(long)]
    trim: Option<usize>,
    /// Unfold with a sliding window of this many spacings.
    #[arg(long)]
    window: Option<usize>,
    #[arg(short, long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct RseArgs {
    #[arg(long)]
    seed: u64,
    #[arg(short = 'n', long, default_value_t = 64)]
    n: usize,
    /// Particle number (default N/2).
    #[arg(short = 'm', long)]
    m: Option<usize>,
    #[arg(long, value_delimiter = ',', default_value = "8,16,24,32")]
    ells: Vec<usize>,
    #[arg(long, default_value_t = 2000)]
    samples: usize,
    #[arg(long, default_value_t = 40)]
    bins: usize,
    #[arg(short, long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct LinksArgs {
    checkpoint: PathBuf,
    #[arg(short, long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct VerifyArgs {
    /// Directory for the reference CSVs.
    #[arg(short, long)]
    out: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Run(a) => cmd_run(a),
        Command::Sweep(a) => cmd_sweep(a),
        Command::Floquet(a) => cmd_floquet(a),
        Command::Rse(a) => cmd_rse(a),
        Command::Links(a) => cmd_links(a),
        Command::Verify(a) => cmd_verify(a),
    };
    match outcome {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}

type CmdResult = Result<ExitCode, String>;

fn cmd_run(a: RunArgs) -> CmdResult {
    let cfg = a.config.resolve()?;
    let (result, files) = run_experiment(&cfg).map_err(|e| e.to_string())?;
    println!("{}", serde_json::to_string_pretty(&result.summary).map_err(|e| e.to_string())?);
    for f in files {
        eprintln!("wrote {}", f.display());
    }
    Ok(ExitCode::SUCCESS)
}

fn cmd_sweep(a: SweepArgs) -> CmdResult {
    let cfg = a.config.resolve()?;
    let axis = if a.ns.is_empty() { SweepAxis::Tau(a.taus) } else { SweepAxis::N(a.ns) };
    let rows = sweep(&cfg, &axis).map_err(|e| e.to_string())?;
    print!("{}", sweep_csv(&rows).map_err(|e| e.to_string())?.as_str());
    let failed = rows.iter().filter(|r| r.outcome.is_err()).count();
    if failed > 0 {
        eprintln!("{failed} of {} sweep points failed", rows.len());
        return Ok(ExitCode::FAILURE);
    }
    Ok(ExitCode::SUCCESS)
}

fn cmd_floquet(a: FloquetArgs) -> CmdResult {
    let err = |e: stirred_vacuum::Error| e.to_string();
    let params = ChainParams::new(a.n, a.tau).map_err(err)?;
    let cache = PropagatorCache::new(params).map_err(err)?;
    let data = floquet_data(&cache).map_err(err)?;
    let opts = SpacingOptions {
        edge_trim: a.trim,
        unfolding: a.window.map_or(Unfolding::Global, Unfolding::LocalWindow),
    };
    let stats = spacing_statistics(&data.quasi, opts).map_err(err)?;
    let gs = ground_state(&single_body_matrix(&params, None).map_err(err)?, params.m()).map_err(err)?;
    let occ = floquet_occupations(&data, &gs).map_err(err)?;
    println!("n = {}, tau = {}, period = {}", a.n, a.tau, data.period);
    println!(
        "mean r~ = {:.4} (Poisson {:.2}, GOE {:.2})",
        stats.r_tilde_mean,
        ReferenceEnsemble::Poisson.r_tilde_mean(),
        ReferenceEnsemble::Goe.r_tilde_mean()
    );
    if let Some(dir) = a.out {
        std::fs::create_dir_all(&dir).map_err(|e| e.to_string())?;
        let mut csv = Csv::new();
        csv.meta("n", a.n).meta("tau", a.tau).meta("r_tilde_mean", stats.r_tilde_mean);
        csv.header(&["k", "quasi_energy", "quasi_energy_times_tau", "occupation"]);
        for (k, (&q, &o)) in data.quasi.iter().zip(occ.values()).enumerate() {
            csv.row(&[k.into(), q.into(), (q * a.tau).into(), o.into()]).map_err(err)?;
        }
        csv.write(&dir.join("floquet.csv")).map_err(err)?;
        let mut csv = Csv::new();
        csv.meta("n", a.n).meta("tau", a.tau);
        csv.header(&["s", "empirical_cdf", "poisson_cdf", "goe_cdf"]);
        for (s, c) in stats.empirical_cdf() {
            csv.row(&[
                s.into(),
                c.into(),
                ReferenceEnsemble::Poisson.cdf(s).into(),
                ReferenceEnsemble::Goe.cdf(s).into(),
            ])
            .map_err(err)?;
        }
        csv.write(&dir.join("spacing_cdf.csv")).map_err(err)?;
        eprintln!("wrote {}", dir.display());
    }
    Ok(ExitCode::SUCCESS)
}

fn cmd_rse(a: RseArgs) -> CmdResult {
    let m = a.m.unwrap_or(a.n / 2);
    let (report, sample) = ensemble_report(a.n, m, &a.ells, a.samples, a.seed, a.bins).map_err(|e| e.to_string())?;
    println!("ell  mc_mean      sem      exact      approx     z");
    for b in &report.blocks {
        let chi = b.jacobi_fit.map_or(String::new(), |c| format!("  chi2 p = {:.3}", c.p_value));
        println!(
            "{:<4} {:<12.5} {:<8.5} {:<10.5} {:<10.5} {:+.2}{chi}",
            b.ell,
            b.mc_mean,
            b.mc_sem,
            b.exact,
            b.approx,
            (b.mc_mean - b.exact) / b.mc_sem
        );
    }
    if let Some(dir) = a.out {
        let files = write_ensemble(&report, &sample, a.bins, &dir).map_err(|e| e.to_string())?;
        write_json(&dir.join("rse_report.json"), &report).map_err(|e| e.to_string())?;
        for f in files {
            eprintln!("wrote {}", f.display());
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn cmd_links(a: LinksArgs) -> CmdResult {
    let err = |e: stirred_vacuum::Error| e.to_string();
    let ck = Checkpoint::load(&a.checkpoint).map_err(err)?;
    let table = entanglement_links(&ck.state().map_err(err)?).map_err(err)?;
    let fr = fractions_csv(&table, None).map_err(err)?;
    match a.out {
        Some(dir) => {
            std::fs::create_dir_all(&dir).map_err(|e| e.to_string())?;
            links_csv(&table, None).map_err(err)?.write(&dir.join("links.csv")).map_err(err)?;
            fr.write(&dir.join("link_fractions.csv")).map_err(err)?;
            eprintln!("wrote {}", dir.display());
        }
        None => print!("{}", fr.as_str()),
    }
    Ok(ExitCode::SUCCESS)
}

fn cmd_verify(a: VerifyArgs) -> CmdResult {
    let checks = run_checks().map_err(|e| e.to_string())?;
    let mut failed = 0;
    for c in &checks {
        let tag = if c.pass { "ok  " } else { "FAIL" };
        failed += usize::from(!c.pass);
        println!("{tag} {:<55} {:.2e} (tol {:.0e})", c.name, c.error, c.tolerance);
    }
    if let Some(dir) = a.out {
        for f in write_reference(&dir).map_err(|e| e.to_string())? {
            eprintln!("wrote {}", f.display());
        }
        write_json(&dir.join("verify.json"), &checks).map_err(|e| e.to_string())?;
    }
    if failed > 0 {
        eprintln!("{failed} check(s) failed");
        return Ok(ExitCode::FAILURE);
    }
    Ok(ExitCode::SUCCESS)
}
