mod commands;
mod config;

use clap::{Args, Parser, Subcommand};
use commands::Ctx;
use config::{ConfigError, RunConfig};
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "cxcdim", version, about = "Julia-set continua, antenna certificates, cxc covers and Chebyshev checks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    global: Global,
}

/// Every key of the config file is also a flag; flags win.
#[derive(Args)]
struct Global {
    /// `key = value` config file.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true)]
    seed: Option<String>,
    /// Output directory, created if missing.
    #[arg(long, global = true)]
    out: Option<String>,
    #[arg(long, global = true)]
    threads: Option<String>,
    /// Cells per side of the Julia window; a power of two.
    #[arg(long, global = true)]
    resolution: Option<String>,
    /// Polynomial as `poly: c0, c1, ..., cd`.
    #[arg(long, global = true)]
    map: Option<String>,
    #[arg(long, global = true)]
    max_iter: Option<String>,
    /// Continuum file written by `julia`, used instead of recomputing.
    #[arg(long, global = true)]
    input: Option<String>,
    #[arg(long, global = true)]
    prune_cells: Option<String>,
    #[arg(long, global = true)]
    scales: Option<String>,
    #[arg(long, global = true)]
    centers: Option<String>,
    #[arg(long, global = true)]
    c_min: Option<String>,
    #[arg(long, global = true)]
    min_radius_cells: Option<String>,
    #[arg(long, global = true)]
    box_min: Option<String>,
    #[arg(long, global = true)]
    box_max: Option<String>,
    #[arg(long, global = true)]
    depth: Option<String>,
    /// `halfplanes` or `tiles:K`.
    #[arg(long, global = true)]
    base: Option<String>,
    #[arg(long, global = true)]
    epsilon: Option<String>,
    #[arg(long, global = true)]
    samples: Option<String>,
    #[arg(long, global = true)]
    tuples: Option<String>,
    #[arg(long, global = true)]
    patch_cells: Option<String>,
    #[arg(long, global = true)]
    d_min: Option<String>,
    #[arg(long, global = true)]
    d_max: Option<String>,
    #[arg(long, global = true)]
    cheb_samples: Option<String>,
}

impl Global {
    fn overrides(&self) -> Vec<(&'static str, String)> {
        let pairs: [(&'static str, &Option<String>); 23] = [
            ("seed", &self.seed),
            ("out", &self.out),
            ("threads", &self.threads),
            ("resolution", &self.resolution),
            ("map", &self.map),
            ("max_iter", &self.max_iter),
            ("input", &self.input),
            ("prune_cells", &self.prune_cells),
            ("scales", &self.scales),
            ("centers", &self.centers),
            ("c_min", &self.c_min),
            ("min_radius_cells", &self.min_radius_cells),
            ("box_min", &self.box_min),
            ("box_max", &self.box_max),
            ("depth", &self.depth),
            ("base", &self.base),
            ("epsilon", &self.epsilon),
            ("samples", &self.samples),
            ("tuples", &self.tuples),
            ("patch_cells", &self.patch_cells),
            ("d_min", &self.d_min),
            ("d_max", &self.d_max),
            ("cheb_samples", &self.cheb_samples),
        ];
        pairs.into_iter().filter_map(|(k, v)| v.clone().map(|v| (k, v))).collect()
    }
}

#[derive(Subcommand, Clone, Copy)]
enum Command {
    /// Compute the Julia continuum; writes continuum.bin, continuum.png, julia.json.
    Julia,
    /// Circle / arc / contains-Y classification with a witness.
    Classify,
    /// Antenna scan over balls; writes JSON, CSV and an overlay PNG.
    Antenna,
    /// Box-counting dimension.
    Dim,
    /// Chebyshev suite for d_min..=d_max.
    Cheb,
    /// Cover hierarchy with axiom verdicts and distortion statistics.
    Cover,
}

impl Command {
    fn name(self) -> &'static str {
        match self {
            Command::Julia => "julia",
            Command::Classify => "classify",
            Command::Antenna => "antenna",
            Command::Dim => "dim",
            Command::Cheb => "cheb",
            Command::Cover => "cover",
        }
    }
}

fn run(cli: &Cli) -> anyhow::Result<()> {
    let cfg = RunConfig::build(cli.global.config.as_deref(), &cli.global.overrides())?;
    if let Some(n) = cfg.threads {
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global()?;
    }
    std::fs::create_dir_all(&cfg.out)?;
    let ctx = Ctx { cfg, command: cli.command.name() };
    match cli.command {
        Command::Julia => commands::julia(&ctx),
        Command::Classify => commands::classify_cmd(&ctx),
        Command::Antenna => commands::antenna(&ctx),
        Command::Dim => commands::dim(&ctx),
        Command::Cheb => commands::cheb(&ctx),
        Command::Cover => commands::cover(&ctx),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            let usage = e.downcast_ref::<ConfigError>().is_some()
                || matches!(e.downcast_ref::<cxcdim::Error>(), Some(cxcdim::Error::Parse(_)));
            ExitCode::from(if usage { 2 } else { 1 })
        }
    }
}
