mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use crate::commands::CliError;
use crate::config::RunConfig;

#[derive(Parser, Debug)]
#[command(name = "scatter", version, about = "Scattering maps and drift orbits near L1")]
struct Cli {
    /// Flat key=value config file; flags override its values.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    #[command(flatten)]
    flags: Flags,

    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Default)]
struct Flags {
    #[arg(long, global = true)]
    grid: Option<PathBuf>,
    #[arg(long, global = true)]
    model: Option<PathBuf>,
    #[arg(long, global = true)]
    model2: Option<PathBuf>,
    #[arg(long, global = true)]
    inner: Option<PathBuf>,
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true)]
    out_dir: Option<PathBuf>,
    #[arg(long = "fourier-degree", short = 'N', global = true)]
    fourier_degree: Option<usize>,
    #[arg(long = "newton-degree", short = 'L', global = true)]
    newton_degree: Option<usize>,
    #[arg(long, global = true)]
    fixed_point_tol: Option<f64>,
    #[arg(long, global = true)]
    max_iter: Option<usize>,
    #[arg(long, global = true)]
    integrator_tol: Option<f64>,
    #[arg(long, global = true)]
    cells_action: Option<usize>,
    #[arg(long, global = true)]
    cells_angle: Option<usize>,
    #[arg(long, global = true, allow_hyphen_values = true)]
    start_action: Option<f64>,
    #[arg(long, global = true, allow_hyphen_values = true)]
    start_angle: Option<f64>,
    #[arg(long, global = true, allow_hyphen_values = true)]
    target_action: Option<f64>,
    #[arg(long, global = true, allow_hyphen_values = true)]
    target_angle: Option<f64>,
    #[arg(long, global = true)]
    radius: Option<f64>,
    #[arg(long, global = true)]
    t_out: Option<f64>,
    #[arg(long, global = true)]
    max_steps: Option<usize>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[arg(long, global = true)]
    samples: Option<usize>,
    #[arg(long, global = true)]
    tori: Option<usize>,
    #[arg(long, global = true)]
    orbits: Option<usize>,
    #[arg(long, global = true)]
    iterations: Option<usize>,
    #[arg(long, global = true)]
    mu: Option<f64>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Fit a scattering-map model to a grid file.
    Fit {
        /// Also fit every (N, L) the grid supports and write sweep.csv.
        #[arg(long)]
        sweep: bool,
    },
    /// Apply a model to one point (start_action, start_angle).
    Apply,
    /// Iterate a model from seeds along phi = start_angle.
    Portrait,
    /// Greedy drift orbit with the first model.
    Greedy,
    /// Shortest-time drift orbit on the cell graph.
    Plan {
        /// Build the graph with the inner map only.
        #[arg(long)]
        no_transitions: bool,
        /// Also dump the cell graph to this file.
        #[arg(long)]
        graph: Option<PathBuf>,
    },
    /// Write synthetic grids, true models and the inner table.
    Synth,
    /// Print the L1 energy and linear frequencies.
    RtbpCheck,
}

impl Flags {
    fn apply(self, cfg: &mut RunConfig) {
        macro_rules! set {
            ($($f:ident),*) => { $( if let Some(v) = self.$f { cfg.$f = v; } )* };
        }
        macro_rules! set_opt {
            ($($f:ident),*) => { $( if self.$f.is_some() { cfg.$f = self.$f; } )* };
        }
        set_opt!(grid, model, model2, inner, out);
        set!(
            out_dir, fourier_degree, newton_degree, fixed_point_tol, max_iter, integrator_tol,
            cells_action, cells_angle, start_action, start_angle, target_action, target_angle,
            radius, t_out, max_steps, seed, samples, tori, orbits, iterations, mu
        );
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    let mut cfg = match &cli.config {
        Some(p) => RunConfig::load(p).map_err(CliError::input)?,
        None => RunConfig::default(),
    };
    cli.flags.apply(&mut cfg);
    cfg.validate().map_err(CliError::input)?;
    match cli.command {
        Command::Fit { sweep } => commands::fit(&cfg, sweep),
        Command::Apply => commands::apply(&cfg),
        Command::Portrait => commands::portrait(&cfg),
        Command::Greedy => commands::greedy(&cfg),
        Command::Plan {
            no_transitions,
            graph,
        } => commands::plan(&cfg, no_transitions, graph.as_deref()),
        Command::Synth => commands::synth(&cfg),
        Command::RtbpCheck => commands::rtbp_check(&cfg),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {:#}", e.error);
            ExitCode::from(e.code)
        }
    }
}
