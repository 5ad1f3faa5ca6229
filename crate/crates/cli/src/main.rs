//! `conelab`: run experiments on rotationally symmetric singular metrics and
//! write CSV series, JSON summaries and verdict tables.

mod config;
mod output;
mod scenarios;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, CommandFactory, Parser, Subcommand};

use config::{Example, Scenario, ScenarioConfig};
use output::Artifacts;

const DEFAULTS: &str = "\
Defaults (override with flags or a JSON --config file):
  dim 3, seed 20240607
  curvature  cone alpha 0.5, beta 1 on a uniform grid [0.1, 3], 59 nodes
  example    --prop 2.2 with eps 0.25 on a geometric grid [1e-3, 1000], 800 nodes
             --prop 2.3 with m 1 on a geometric grid [2.5m, 1000m], 600 nodes
             --prop 2.5 with m 1, r0 3, r1 6 on a geometric grid [2.2m, 1000], 800 nodes
  mollify    cone alpha 0.5, eps 0.1,0.05,0.025, p = 2 dim, sinh-core grid (core 0.005, r_max 2, 400 nodes)
  flow       mollified positive-mass cone (cone eps 0.1), eps 0.2, background eps 0.3,
             T 5e-4, 8 outputs, sinh-core grid (core 0.05, r_max 40, 200 nodes)
  yamabe     wavy torus amp 0.2, 64 samples, tol 1e-9, q 8
  verify-all 20 random metrics

Exit status: 0 when every checked claim holds, 1 when a claim fails or a
computation errors, 2 on misuse.";

#[derive(Parser)]
#[command(name = "conelab", version, about, arg_required_else_help = true, after_help = DEFAULTS)]
struct Cli {
    /// JSON scenario configuration; flags override its fields.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, global = true, default_value = "conelab-out")]
    out: PathBuf,
    /// Seed of the randomized checks.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads for independent sweep points.
    #[arg(long, global = true, default_value_t = 1)]
    threads: usize,
    #[command(subcommand)]
    command: Option<Command>,
}

#[derive(Args, Default)]
struct Common {
    /// Dimension n.
    #[arg(long)]
    dim: Option<usize>,
    /// Mollification scales, comma separated.
    #[arg(long, value_delimiter = ',')]
    eps: Vec<f64>,
}

#[derive(Subcommand)]
enum Command {
    /// Curvature of the cone dr^2 + alpha^2 r^(2 beta) h.
    Curvature {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        alpha: Option<f64>,
        #[arg(long)]
        beta: Option<f64>,
    },
    /// Build an explicit example; writes its profile and mass report.
    Example {
        #[command(flatten)]
        common: Common,
        /// 2.2 (positive-mass cone), 2.3 (zero-area singularity) or 2.5 (glued neck).
        #[arg(long)]
        prop: Option<Example>,
        /// Mass parameter of 2.3 and 2.5.
        #[arg(long)]
        m: Option<f64>,
    },
    /// Mollify a cone near its tip over an eps sweep.
    Mollify {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        alpha: Option<f64>,
        /// Sobolev exponent of the reported norms.
        #[arg(long)]
        p: Option<f64>,
    },
    /// Run the h-flow from a mollified positive-mass cone and record the monitors.
    Flow {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        t_final: Option<f64>,
        #[arg(long)]
        outputs: Option<usize>,
    },
    /// ADM mass of an explicit example.
    Mass {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        prop: Option<Example>,
        #[arg(long)]
        m: Option<f64>,
    },
    /// Minimize the Yamabe functional on a wavy torus.
    Yamabe {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        amp: Option<f64>,
        #[arg(long)]
        samples: Option<usize>,
    },
    /// Run every acceptance criterion and write the verdict table.
    VerifyAll {
        #[arg(long)]
        random_metrics: Option<usize>,
    },
}

fn set<T>(slot: &mut T, v: Option<T>) {
    if let Some(v) = v {
        *slot = v;
    }
}

impl Command {
    fn apply(self, cfg: &mut ScenarioConfig) {
        let common = |cfg: &mut ScenarioConfig, c: Common| {
            set(&mut cfg.dim, c.dim);
            if !c.eps.is_empty() {
                cfg.eps = c.eps;
            }
        };
        let scenario = match self {
            Command::Curvature { common: c, alpha, beta } => {
                common(cfg, c);
                set(&mut cfg.alpha, alpha);
                set(&mut cfg.beta, beta);
                Scenario::Curvature
            }
            Command::Example { common: c, prop, m } => {
                common(cfg, c);
                set(&mut cfg.example, prop);
                set(&mut cfg.m, m);
                Scenario::Example
            }
            Command::Mass { common: c, prop, m } => {
                common(cfg, c);
                set(&mut cfg.example, prop);
                set(&mut cfg.m, m);
                Scenario::Mass
            }
            Command::Mollify { common: c, alpha, p } => {
                common(cfg, c);
                set(&mut cfg.alpha, alpha);
                if p.is_some() {
                    cfg.p = p;
                }
                Scenario::Mollify
            }
            Command::Flow { common: c, t_final, outputs } => {
                common(cfg, c);
                set(&mut cfg.flow.t_final, t_final);
                set(&mut cfg.flow.outputs, outputs);
                Scenario::Flow
            }
            Command::Yamabe { common: c, amp, samples } => {
                common(cfg, c);
                set(&mut cfg.torus.amp, amp);
                set(&mut cfg.torus.samples, samples);
                Scenario::Yamabe
            }
            Command::VerifyAll { random_metrics } => {
                set(&mut cfg.random_metrics, random_metrics);
                Scenario::VerifyAll
            }
        };
        cfg.scenario = Some(scenario);
    }
}

fn misuse(msg: &str) -> ExitCode {
    eprintln!("error: {msg}\n");
    eprintln!("{}", Cli::command().render_usage());
    ExitCode::from(2)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let mut cfg = match &cli.config {
        Some(p) => match ScenarioConfig::load(p) {
            Ok(c) => c,
            Err(e) => return misuse(&e),
        },
        None => ScenarioConfig::default(),
    };
    if let Some(cmd) = cli.command {
        cmd.apply(&mut cfg);
    }
    set(&mut cfg.seed, cli.seed);
    let Some(scenario) = cfg.scenario else {
        return misuse("no scenario: give a subcommand or a config with \"scenario\"");
    };
    if let Err(e) = cfg.validate() {
        return misuse(&e);
    }
    if cli.threads == 0 {
        return misuse("--threads must be at least 1");
    }
    let mut out = match Artifacts::new(&cli.out, cfg.hash()) {
        Ok(o) => o,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(1);
        }
    };
    let start = std::time::Instant::now();
    let result = match scenario {
        Scenario::Curvature => scenarios::curvature(&cfg, &mut out),
        Scenario::Example => scenarios::example(&cfg, &mut out),
        Scenario::Mollify => scenarios::mollify(&cfg, &mut out),
        Scenario::Flow => scenarios::flow(&cfg, &mut out),
        Scenario::Mass => scenarios::mass(&cfg, &mut out),
        Scenario::Yamabe => scenarios::yamabe(&cfg, &mut out),
        Scenario::VerifyAll => scenarios::verify_all(&cfg, cli.threads, &mut out),
    }
    .and_then(|ok| out.json("config.json", &cfg).map(|_| ok));
    for p in out.written() {
        eprintln!("wrote {}", p.display());
    }
    eprintln!("finished in {:.1} s", start.elapsed().as_secs_f64());
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => {
            eprintln!("some checks failed; see the summary files");
            ExitCode::from(1)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
