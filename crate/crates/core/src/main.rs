use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};

use treecodes::harness::{
    run_anytime, run_complexity, run_control, run_exponents, stream, write_csv, CampaignConfig, Metadata,
};
use treecodes::treecode::{code_digest, sample_lti, write_code};

#[derive(Parser)]
#[command(name = "treecodes", version, about = "Tree-code experiments: exponents, anytime reliability, decoding complexity, closed-loop control")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// Key-value configuration file; defaults apply to missing keys.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output CSV path.
    #[arg(long)]
    out: PathBuf,
    /// Worker threads (default: all cores).
    #[arg(long)]
    workers: Option<usize>,
}

impl Common {
    fn config(&self) -> Result<CampaignConfig> {
        match &self.config {
            Some(p) => CampaignConfig::load(p).with_context(|| format!("reading {}", p.display())),
            None => Ok(CampaignConfig::default()),
        }
    }

    fn workers(&self) -> usize {
        self.workers
            .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()))
    }
}

#[derive(Subcommand)]
enum Command {
    /// Error-exponent curves over a rate grid.
    Exponents(Common),
    /// Monte Carlo error-versus-delay profile and fitted exponent.
    Anytime(Common),
    /// Distribution of decoding work at a fixed depth.
    Complexity(Common),
    /// Closed-loop control campaign.
    Control(Common),
    /// Samples a code from the ensemble and writes it in text form.
    Code(Common),
}

fn save<T: serde::Serialize>(path: &Path, meta: &Metadata, rows: &[T]) -> Result<()> {
    write_csv(path, meta, rows).with_context(|| format!("writing {}", path.display()))
}

fn steps_path(out: &Path) -> PathBuf {
    let stem = out.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    out.with_file_name(format!("{stem}.steps.csv"))
}

fn main() -> Result<()> {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match cli.command {
        Command::Exponents(c) => {
            let cfg = c.config()?;
            let (meta, rows) = run_exponents(&cfg, c.seed)?;
            save(&c.out, &meta, &rows)?;
            eprintln!("{} rates written to {}", rows.len(), c.out.display());
        }
        Command::Anytime(c) => {
            let cfg = c.config()?;
            let (meta, profile) = run_anytime(&cfg, c.seed, c.workers())?;
            save(&c.out, &meta, &profile.rows)?;
            let s = &profile.summary;
            match s.beta_hat {
                Some(b) => eprintln!("beta_hat = {b:.4} (E_J at bias {:.4}: {:.4})", s.bias, s.e_j_bias),
                None => eprintln!("too few error events to fit an exponent"),
            }
        }
        Command::Complexity(c) => {
            let cfg = c.config()?;
            let (meta, report) = run_complexity(&cfg, c.seed, c.workers())?;
            save(&c.out, &meta, &report.rows)?;
            let s = &report.summary;
            eprintln!(
                "mean W = {:.3}, rho_hat = {}, rho = {}",
                s.mean_work,
                s.rho_hat.map_or("n/a".into(), |v| format!("{v:.3}")),
                s.rho_theory.map_or("n/a".into(), |v| format!("{v:.3}")),
            );
        }
        Command::Control(c) => {
            let cfg = c.config()?;
            let (meta, report) = run_control(&cfg, c.seed, c.workers())?;
            save(&c.out, &meta, &report.trials)?;
            let steps = steps_path(&c.out);
            save(&steps, &meta, &report.steps)?;
            for s in &report.summary {
                let lqr = if s.mean_lqr < 1e6 { format!("{:.3}", s.mean_lqr) } else { format!("{:.3e}", s.mean_lqr) };
                eprintln!(
                    "k = {:2}: mean LQR {lqr}, median peak |x| {:.4}{}",
                    s.k,
                    s.median_peak,
                    s.reference_lqr.map_or(String::new(), |r| format!(" (reference {r})")),
                );
            }
        }
        Command::Code(c) => {
            let cfg = c.config()?;
            let code = sample_lti(cfg.n, cfg.k, cfg.horizon, cfg.affine, &mut stream(c.seed, "code"))?;
            write_code(&c.out, &code).with_context(|| format!("writing {}", c.out.display()))?;
            eprintln!("code {} written to {}", code_digest(&code), c.out.display());
        }
    }
    Ok(())
}
