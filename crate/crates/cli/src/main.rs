use clap::{Args, Parser, Subcommand, ValueEnum};
use lane_emden::bubble::Regime;
use lane_emden::greens::Configuration;
use lane_emden_cli::config::{default_schedule, Command, RunConfig, Suite, Tolerances};
use lane_emden_cli::{run, CliError, OUTPUT_DIR_ENV};
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(
    name = "lane-emden",
    version,
    about = "Nearly-critical Lane-Emden systems: bubbles, Green potentials, reduced energies and radial blow-up sweeps"
)]
struct Cli {
    #[command(subcommand)]
    command: Sub,
    /// Output directory.
    #[arg(long, global = true, env = OUTPUT_DIR_ENV, default_value = "out")]
    out: PathBuf,
    /// Integrator tolerance of the bubble and Dirichlet shots.
    #[arg(long, global = true)]
    ode_rtol: Option<f64>,
    /// Gradient tolerance of the critical-point search.
    #[arg(long, global = true)]
    newton_tol: Option<f64>,
    /// Accepted relative error of volume quadratures.
    #[arg(long, global = true)]
    quad_tol: Option<f64>,
    /// Seed of every randomized step.
    #[arg(long, global = true, default_value_t = 0x5eed)]
    seed: u64,
}

#[derive(Args, Clone)]
struct Point {
    /// Dimension.
    #[arg(long = "N")]
    n: usize,
    /// Exponent p of −Δu = v^p.
    #[arg(long)]
    p: f64,
}

#[derive(Clone, Copy, ValueEnum)]
enum RegimeArg {
    Sub,
    Serrin,
    Super,
}

#[derive(Clone, Copy, ValueEnum)]
enum SuiteArg {
    Bubble,
    Greens,
    Super,
    Serrin,
    Sub,
    All,
}

#[derive(Subcommand)]
enum Sub {
    /// Bubble profile (CSV) and its constants (JSON).
    Bubble(Point),
    /// Table of the bubble constants with their cross-checks (CSV).
    Constants(Point),
    /// Robin function, Green's function and harmonic extensions at the center.
    Greens(Point),
    /// Critical point of the reduced energy and the predicted rates.
    Reduced {
        #[command(flatten)]
        point: Point,
        /// Number of bubbles.
        #[arg(long, default_value_t = 1)]
        k: usize,
        /// Regime the exponent must lie in.
        #[arg(long, value_enum)]
        regime: Option<RegimeArg>,
        /// Starting configuration as JSON {"deltas": [...], "points": [[...], ...]}.
        #[arg(long)]
        seed_config: Option<String>,
    },
    /// Radial Dirichlet solutions along a decreasing ε schedule.
    Sweep {
        #[command(flatten)]
        point: Point,
        /// Comma-separated, strictly decreasing ε values.
        #[arg(long, value_delimiter = ',')]
        eps: Option<Vec<f64>>,
    },
    /// Acceptance battery; exits 0 only if every check passes.
    Verify {
        /// Ignored by `--suite all`.
        #[arg(long = "N", default_value_t = 4)]
        n: usize,
        #[arg(long, default_value_t = 2.5)]
        p: f64,
        #[arg(long, value_enum, default_value = "all")]
        suite: SuiteArg,
        #[arg(long, value_delimiter = ',')]
        eps: Option<Vec<f64>>,
    },
}

fn config(cli: Cli) -> Result<RunConfig, CliError> {
    let (command, n, p) = match &cli.command {
        Sub::Bubble(pt) => (Command::Bubble, pt.n, pt.p),
        Sub::Constants(pt) => (Command::Constants, pt.n, pt.p),
        Sub::Greens(pt) => (Command::Greens, pt.n, pt.p),
        Sub::Reduced { point, .. } => (Command::Reduced, point.n, point.p),
        Sub::Sweep { point, .. } => (Command::Sweep, point.n, point.p),
        Sub::Verify { n, p, .. } => (Command::Verify, *n, *p),
    };
    let mut cfg = RunConfig::new(command, n, p, cli.out);
    cfg.seed = cli.seed;
    cfg.tolerances = Tolerances {
        ode_rtol: cli.ode_rtol,
        newton_tol: cli.newton_tol,
        quad_tol: cli.quad_tol,
    };
    match cli.command {
        Sub::Reduced {
            k,
            regime,
            seed_config,
            ..
        } => {
            cfg.k = k;
            cfg.regime = regime.map(|r| match r {
                RegimeArg::Sub => Regime::Sub,
                RegimeArg::Serrin => Regime::Serrin,
                RegimeArg::Super => Regime::Super,
            });
            if let Some(s) = seed_config {
                let c: Configuration = serde_json::from_str(&s)
                    .map_err(|e| CliError::Config(format!("seed-config: {e}")))?;
                cfg.seed_config = Some(c);
            }
        }
        Sub::Sweep { eps, .. } => cfg.eps_schedule = eps.unwrap_or_else(default_schedule),
        Sub::Verify { suite, eps, .. } => {
            cfg.suite = match suite {
                SuiteArg::Bubble => Suite::Bubble,
                SuiteArg::Greens => Suite::Greens,
                SuiteArg::Super => Suite::Super,
                SuiteArg::Serrin => Suite::Serrin,
                SuiteArg::Sub => Suite::Sub,
                SuiteArg::All => Suite::All,
            };
            cfg.eps_schedule = eps.unwrap_or_else(default_schedule);
        }
        _ => {}
    }
    Ok(cfg)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = config(cli).and_then(|cfg| run(&cfg));
    match result {
        Ok(out) => {
            for l in &out.lines {
                println!("{l}");
            }
            for f in &out.files {
                println!("wrote {}", f.display());
            }
            if out.passed {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Err(e) => {
            eprintln!("lane-emden: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
