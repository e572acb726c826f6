use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use groundlap::consensus::Mode;
use groundlap::experiments::{
    self, Artifact, ConcentrationConfig, ConsensusOptions, ErSweepConfig, Monitor, OracleConfig,
    OutputFormat, RegularSweepConfig, RunOptions,
};
use groundlap::io::read_edge_list;
use groundlap::random::{ErParams, Model, RegularMethod, RegularParams, RegularSamplerConfig};
use groundlap::{Error, VertexSet};

const EXIT_FAILED_CHECK: u8 = 1;
const EXIT_INPUT: u8 = 2;
const EXIT_NOT_CONVERGED: u8 = 3;

/// Bounds, random-graph sweeps and consensus simulations for grounded
/// Laplacians.
#[derive(Parser)]
#[command(name = "groundlap", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// Seed for every random choice; required so runs are reproducible.
    #[arg(long)]
    seed: u64,
    /// Slack allowed on every inequality check.
    #[arg(long, default_value_t = 1e-8)]
    tol: f64,
    /// Eigen-solver residual tolerance.
    #[arg(long, default_value_t = 1e-10)]
    solver_tol: f64,
    #[arg(long, default_value_t = 500)]
    max_iter: usize,
    /// Directory for output files. Without it only the summary is printed.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Format of tabular outputs.
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
}

impl Common {
    fn run_options(&self) -> RunOptions {
        RunOptions {
            seed: self.seed,
            check_tolerance: self.tol,
            solver_tolerance: self.solver_tol,
            max_iterations: self.max_iter,
        }
    }

    fn format(&self) -> OutputFormat {
        match self.format {
            Format::Csv => OutputFormat::Csv,
            Format::Json => OutputFormat::Json,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Continuous,
    Discrete,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModelArg {
    Er,
    Regular,
}

#[derive(Clone, Copy, ValueEnum)]
enum SamplerArg {
    Auto,
    Exact,
    Stub,
}

impl SamplerArg {
    fn config(self, budget: usize) -> RegularSamplerConfig {
        let method = match self {
            SamplerArg::Auto => RegularMethod::Auto,
            SamplerArg::Exact => RegularMethod::ExactRejection,
            SamplerArg::Stub => RegularMethod::StubPairing,
        };
        RegularSamplerConfig { method, budget }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Certify every bound for one graph and grounded set.
    Analyze {
        /// Edge-list file: a header line "n m" followed by m lines "u v".
        graph: PathBuf,
        /// Grounded vertices, comma separated.
        #[arg(long, value_delimiter = ',', required = true)]
        grounded: Vec<usize>,
        #[command(flatten)]
        common: Common,
    },
    /// Two cliques joined by a bridge, grounded at the far end.
    Dumbbell {
        #[arg(long)]
        n: usize,
        #[command(flatten)]
        common: Common,
    },
    /// Monte Carlo over Erdős–Rényi graphs with random grounded sets.
    ErSweep {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        p: f64,
        /// Number of grounded vertices.
        #[arg(long, default_value_t = 3)]
        s: usize,
        #[arg(long, default_value_t = 50)]
        trials: usize,
        #[arg(long, default_value_t = 0.1)]
        epsilon: f64,
        #[command(flatten)]
        common: Common,
    },
    /// Monte Carlo over random regular graphs.
    RegularSweep {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        d: usize,
        #[arg(long, default_value_t = 1)]
        s: usize,
        #[arg(long, default_value_t = 50)]
        trials: usize,
        #[arg(long, value_enum, default_value_t = SamplerArg::Auto)]
        sampler: SamplerArg,
        /// Maximum pairing attempts per sample.
        #[arg(long, default_value_t = 10_000)]
        budget: usize,
        /// The slack in the adjacency check λ' <= 2·sqrt(d−1) + slack.
        #[arg(long, default_value_t = 1.0)]
        adjacency_slack: f64,
        #[command(flatten)]
        common: Common,
    },
    /// Degree, boundary and adjacency concentration, without eigen-solves.
    Concentration {
        #[arg(long, value_enum)]
        model: ModelArg,
        #[arg(long)]
        n: usize,
        #[arg(long, required_if_eq("model", "er"))]
        p: Option<f64>,
        #[arg(long, required_if_eq("model", "regular"))]
        d: Option<usize>,
        #[arg(long, default_value_t = 3)]
        s: usize,
        #[arg(long, default_value_t = 200)]
        trials: usize,
        #[arg(long, default_value_t = 0.1)]
        epsilon: f64,
        #[arg(long, value_enum, default_value_t = SamplerArg::Auto)]
        sampler: SamplerArg,
        #[arg(long, default_value_t = 10_000)]
        budget: usize,
        #[arg(long, default_value_t = 1.0)]
        adjacency_slack: f64,
        #[command(flatten)]
        common: Common,
    },
    /// Simulate consensus with stubborn agents and fit the convergence rate.
    Consensus {
        graph: PathBuf,
        #[arg(long, value_delimiter = ',', required = true)]
        grounded: Vec<usize>,
        /// One value per grounded vertex, in ascending vertex order.
        #[arg(
            long,
            value_delimiter = ',',
            required = true,
            allow_negative_numbers = true
        )]
        stubborn_values: Vec<f64>,
        #[arg(long, value_enum, default_value_t = ModeArg::Continuous)]
        mode: ModeArg,
        /// Discrete gain; must exceed the maximum degree. Default 2·d_max.
        #[arg(long)]
        k: Option<f64>,
        /// RK4 step. Default 0.1/d_max.
        #[arg(long)]
        dt: Option<f64>,
        /// Time (continuous) or steps (discrete). Default 30 decay times.
        #[arg(long)]
        horizon: Option<f64>,
        /// Initial floating states; random when omitted.
        #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
        initial: Option<Vec<f64>>,
        #[arg(long, default_value_t = 0.5)]
        fit_window: f64,
        #[command(flatten)]
        common: Common,
    },
    /// Cross-check every bound against exact oracles on small random graphs.
    OracleValidate {
        #[arg(long, default_value_t = 200)]
        trials: usize,
        #[arg(long, default_value_t = 4)]
        min_n: usize,
        #[arg(long, default_value_t = 12)]
        max_n: usize,
        #[command(flatten)]
        common: Common,
    },
}

/// What a subcommand produced: files to write, the summary for stdout, and
/// whether every check passed.
struct Outcome {
    artifacts: Vec<Artifact>,
    summary: String,
    monitors: Vec<Monitor>,
    pass: bool,
}

fn exit_code(err: &Error) -> u8 {
    match err {
        Error::NotConverged { .. } => EXIT_NOT_CONVERGED,
        _ => EXIT_INPUT,
    }
}

fn write_artifacts(dir: &Path, artifacts: &[Artifact]) -> Result<(), Error> {
    fs::create_dir_all(dir)?;
    for a in artifacts {
        fs::write(dir.join(&a.name), &a.contents)?;
    }
    Ok(())
}

fn run(command: Command) -> Result<(Outcome, Common), Error> {
    Ok(match command {
        Command::Analyze {
            graph,
            grounded,
            common,
        } => {
            let g = read_edge_list(&graph)?;
            let cert = experiments::analyze(g, VertexSet::new(grounded), &common.run_options())?;
            let json = cert.to_json();
            let outcome = Outcome {
                artifacts: vec![Artifact {
                    name: "certificate.json".into(),
                    contents: json.clone(),
                }],
                summary: json,
                monitors: Vec::new(),
                pass: cert.all_pass(),
            };
            (outcome, common)
        }
        Command::Dumbbell { n, common } => {
            let report = experiments::dumbbell_report(n, &common.run_options())?;
            let json = experiments::to_json(&report);
            let outcome = Outcome {
                artifacts: vec![Artifact {
                    name: "dumbbell.json".into(),
                    contents: json.clone(),
                }],
                summary: json,
                monitors: Vec::new(),
                pass: report.pass(),
            };
            (outcome, common)
        }
        Command::ErSweep {
            n,
            p,
            s,
            trials,
            epsilon,
            common,
        } => {
            let cfg = ErSweepConfig {
                params: ErParams::new(n, p)?,
                s_size: s,
                trials,
                epsilon,
            };
            let sweep = experiments::er_sweep(&cfg, &common.run_options())?;
            let outcome = Outcome {
                artifacts: sweep.artifacts("er_sweep", common.format())?,
                summary: experiments::to_json(&sweep.summary),
                monitors: sweep.summary.monitors.clone(),
                pass: sweep.all_bounds_pass(),
            };
            (outcome, common)
        }
        Command::RegularSweep {
            n,
            d,
            s,
            trials,
            sampler,
            budget,
            adjacency_slack,
            common,
        } => {
            let cfg = RegularSweepConfig {
                params: RegularParams::new(n, d)?,
                s_size: s,
                trials,
                sampler: sampler.config(budget),
                adjacency_slack,
            };
            let sweep = experiments::regular_sweep(&cfg, &common.run_options())?;
            let outcome = Outcome {
                artifacts: sweep.artifacts("regular_sweep", common.format())?,
                summary: experiments::to_json(&sweep.summary),
                monitors: sweep.summary.monitors.clone(),
                pass: sweep.all_bounds_pass(),
            };
            (outcome, common)
        }
        Command::Concentration {
            model,
            n,
            p,
            d,
            s,
            trials,
            epsilon,
            sampler,
            budget,
            adjacency_slack,
            common,
        } => {
            let (model, monitors) = match model {
                ModelArg::Er => {
                    let params = ErParams::new(n, p.expect("required by clap"))?;
                    (Model::Er(params), experiments::er_monitors(params, s))
                }
                ModelArg::Regular => {
                    let params = RegularParams::new(n, d.expect("required by clap"))?;
                    (
                        Model::Regular(params),
                        experiments::regular_monitors(params, s),
                    )
                }
            };
            let cfg = ConcentrationConfig {
                model,
                s_size: s,
                trials,
                epsilon,
                sampler: sampler.config(budget),
                adjacency_slack,
            };
            let rows = experiments::concentration_sweep(&cfg, &common.run_options())?;
            let table = match common.format() {
                OutputFormat::Csv => experiments::to_csv(&rows)?,
                OutputFormat::Json => experiments::to_json(&rows),
            };
            let outcome = Outcome {
                artifacts: vec![Artifact {
                    name: format!("concentration.{}", common.format().extension()),
                    contents: table.clone(),
                }],
                summary: table,
                monitors,
                pass: true,
            };
            (outcome, common)
        }
        Command::Consensus {
            graph,
            grounded,
            stubborn_values,
            mode,
            k,
            dt,
            horizon,
            initial,
            fit_window,
            common,
        } => {
            let g = read_edge_list(&graph)?;
            let mode = match mode {
                ModeArg::Continuous => Mode::Continuous,
                ModeArg::Discrete => Mode::Discrete,
            };
            let copts = ConsensusOptions {
                mode,
                gain: k,
                dt,
                horizon,
                fit_window,
                initial,
            };
            let run = experiments::consensus_run(
                g,
                VertexSet::new(grounded),
                stubborn_values,
                &copts,
                &common.run_options(),
            )?;
            let outcome = Outcome {
                artifacts: run.artifacts(common.format())?,
                summary: experiments::to_json(&run.report),
                monitors: run.report.monitors.clone(),
                pass: run.report.equilibrium_in_hull,
            };
            (outcome, common)
        }
        Command::OracleValidate {
            trials,
            min_n,
            max_n,
            common,
        } => {
            let cfg = OracleConfig {
                trials,
                min_n,
                max_n,
            };
            let v = experiments::oracle_validate(&cfg, &common.run_options())?;
            let outcome = Outcome {
                artifacts: v.artifacts(common.format())?,
                summary: experiments::to_json(&v.report),
                monitors: Vec::new(),
                pass: v.report.pass,
            };
            (outcome, common)
        }
    })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok((outcome, common)) => {
            for m in &outcome.monitors {
                eprintln!("{}", m.line());
            }
            if let Some(dir) = &common.out {
                if let Err(e) = write_artifacts(dir, &outcome.artifacts) {
                    eprintln!("error: {e}");
                    return ExitCode::from(EXIT_INPUT);
                }
            }
            print!("{}", outcome.summary);
            if outcome.pass {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(EXIT_FAILED_CHECK)
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
