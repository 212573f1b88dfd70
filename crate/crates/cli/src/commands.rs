use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{anyhow, Context};
use scatter_core::ifs::{InnerModel, TimeModel};
use scatter_core::io;
use scatter_core::odeint::{integrate, IntegratorConfig};
use scatter_core::planner::{
    build_cell_graph, drift_time, greedy_drift, plan_on_graph, CellGrid, DriftOrbit, PlanOptions,
};
use scatter_core::rtbp::{jacobi_constant, l1_gamma, linear_frequencies, locate_l1, MassRatio, State6};
use scatter_core::ssm::{
    apply_sm_detailed, approximation_error, error_sweep, fit_ssm, phase_portrait, ApplyOptions,
    PortraitOptions, SsmModel, DIAGNOSTIC_TOL,
};
use scatter_core::synth::{self, Channel};
use scatter_core::Error;

use crate::config::RunConfig;

pub const EXIT_FAILURE: u8 = 1;
pub const EXIT_INPUT: u8 = 2;
pub const EXIT_FIT: u8 = 3;
pub const EXIT_UNREACHABLE: u8 = 4;
pub const EXIT_LIVELOCK: u8 = 5;

#[derive(Debug)]
pub struct CliError {
    pub code: u8,
    pub error: anyhow::Error,
}

impl CliError {
    pub fn input(error: anyhow::Error) -> Self {
        Self {
            code: EXIT_INPUT,
            error,
        }
    }

    fn fit(error: Error) -> Self {
        let code = match error {
            Error::Parse { .. } | Error::Invariant { .. } | Error::Io(_) => EXIT_INPUT,
            _ => EXIT_FIT,
        };
        Self {
            code,
            error: error.into(),
        }
    }
}

impl From<Error> for CliError {
    fn from(error: Error) -> Self {
        let code = match &error {
            Error::Parse { .. }
            | Error::Invariant { .. }
            | Error::Io(_)
            | Error::InvalidConfig(_)
            | Error::InvalidMassRatio(_)
            | Error::OutOfRange(_) => EXIT_INPUT,
            Error::DuplicateNode(_) | Error::InsufficientTori { .. } | Error::DegreeTooHigh { .. } => {
                EXIT_FIT
            }
            Error::Unreachable { .. } => EXIT_UNREACHABLE,
            Error::Livelock { .. } => EXIT_LIVELOCK,
            _ => EXIT_FAILURE,
        };
        Self {
            code,
            error: error.into(),
        }
    }
}

type CmdResult = Result<(), CliError>;

fn required<'a>(p: &'a Option<PathBuf>, what: &str) -> Result<&'a Path, CliError> {
    p.as_deref()
        .ok_or_else(|| CliError::input(anyhow!("missing --{what}")))
}

fn with_path<T>(r: scatter_core::Result<T>, path: &Path) -> Result<T, CliError> {
    r.map_err(|e| {
        let mut c = CliError::from(e);
        c.error = c.error.context(format!("reading {}", path.display()));
        c
    })
}

fn output_path(cfg: &RunConfig, default_name: &str) -> PathBuf {
    cfg.out
        .clone()
        .unwrap_or_else(|| cfg.out_dir.join(default_name))
}

fn write(path: &Path, text: &str) -> CmdResult {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir)
            .with_context(|| format!("creating {}", dir.display()))
            .map_err(CliError::input)?;
    }
    fs::write(path, text)
        .with_context(|| format!("writing {}", path.display()))
        .map_err(CliError::input)
}

fn apply_options(cfg: &RunConfig) -> ApplyOptions {
    ApplyOptions {
        tol: cfg.fixed_point_tol,
        max_iter: cfg.max_iter,
    }
}

fn load_model(p: &Path) -> Result<SsmModel, CliError> {
    with_path(io::load_model(p), p)
}

fn load_inner(cfg: &RunConfig) -> Result<InnerModel, CliError> {
    match &cfg.inner {
        Some(p) => with_path(io::load_inner(p), p),
        None => Ok(InnerModel::calibrated()),
    }
}

fn time_model(cfg: &RunConfig, im: &InnerModel) -> TimeModel {
    TimeModel::from_inner(im).with_t_out(cfg.t_out)
}

fn summary(o: &DriftOrbit, tm: &TimeModel) -> String {
    let (n0, n1, n2) = o.counts();
    format!("n0={n0},n1={n1},n2={n2},t={:.6}", drift_time(o, tm))
}

pub fn fit(cfg: &RunConfig, sweep: bool) -> CmdResult {
    let path = required(&cfg.grid, "grid")?;
    let grid = with_path(io::load_grid(path), path)?;
    let model = fit_ssm(&grid, cfg.fourier_degree, cfg.newton_degree).map_err(CliError::fit)?;
    let report = approximation_error(&model, &grid, DIAGNOSTIC_TOL).map_err(CliError::fit)?;
    let out = output_path(cfg, "model.txt");
    write(&out, &io::format_model(&model))?;
    println!(
        "N={},L={},eps_I={:.3e},eps_phi={:.3e},odd_max={:.3e},omega_spread={:.3e}",
        model.fourier_degree,
        model.newton_degree,
        report.eps_action,
        report.eps_angle,
        model.meta.odd_harmonic_max,
        model.meta.omega_spread
    );
    if sweep {
        let max_n = (grid.min_samples() / 2).min(16);
        let ns: Vec<usize> = (2..=max_n).step_by(2).collect();
        let ls: Vec<usize> = (1..grid.tori.len()).collect();
        let mut text = String::from("N,L,eps_I,eps_phi\n");
        for e in error_sweep(&grid, &ns, &ls, DIAGNOSTIC_TOL) {
            let (a, p) = e
                .report
                .as_ref()
                .map_or((f64::NAN, f64::NAN), |r| (r.eps_action, r.eps_angle));
            let _ = writeln!(text, "{},{},{a:.6e},{p:.6e}", e.fourier_degree, e.newton_degree);
        }
        write(&cfg.out_dir.join("sweep.csv"), &text)?;
        print!("{text}");
    }
    Ok(())
}

pub fn apply(cfg: &RunConfig) -> CmdResult {
    let m = load_model(required(&cfg.model, "model")?)?;
    let img = apply_sm_detailed(&m, cfg.start_action, cfg.start_angle, apply_options(cfg))?;
    println!(
        "I_prime={:.16e},phi_prime={:.16e},iterations={}",
        img.action, img.angle, img.iterations
    );
    Ok(())
}

pub fn portrait(cfg: &RunConfig) -> CmdResult {
    let m = load_model(required(&cfg.model, "model")?)?;
    let opts = PortraitOptions {
        orbits: cfg.orbits,
        iterations: cfg.iterations,
        phi0: cfg.start_angle,
        apply: apply_options(cfg),
    };
    let orbits = phase_portrait(&m, &opts)?;
    let escaped = orbits.iter().filter(|o| o.escaped).count();
    let out = output_path(cfg, "portrait.csv");
    write(&out, &io::format_portrait(&orbits))?;
    println!("orbits={},escaped={escaped},file={}", orbits.len(), out.display());
    Ok(())
}

pub fn greedy(cfg: &RunConfig) -> CmdResult {
    let m = load_model(required(&cfg.model, "model")?)?;
    let im = load_inner(cfg)?;
    let tm = time_model(cfg, &im);
    let o = greedy_drift(
        &m,
        &im,
        (cfg.start_action, cfg.start_angle),
        cfg.target_action,
        cfg.max_steps,
        apply_options(cfg),
    )?;
    write(&output_path(cfg, "greedy.csv"), &io::format_orbit(&o, &tm))?;
    println!("{}", summary(&o, &tm));
    Ok(())
}

pub fn plan(cfg: &RunConfig, no_transitions: bool, graph_out: Option<&Path>) -> CmdResult {
    let im = load_inner(cfg)?;
    let tm = time_model(cfg, &im);
    let mut models = Vec::new();
    if !no_transitions {
        models.push(load_model(required(&cfg.model, "model")?)?);
        if let Some(p) = &cfg.model2 {
            models.push(load_model(p)?);
        }
    }
    let refs: Vec<&SsmModel> = models.iter().collect();
    let grid = CellGrid::new(cfg.cells_action, cfg.cells_angle, im.range().1)?;
    let opts = PlanOptions {
        radius: cfg.radius,
        livelock_bound: None,
        apply: apply_options(cfg),
    };
    let graph = build_cell_graph(&refs, &im, &tm, grid, opts.apply)?;
    if let Some(p) = graph_out {
        write(p, &io::format_graph(&graph))?;
    }
    if graph.warnings > 0 {
        eprintln!("warning: {} cells have no transition edge", graph.warnings);
    }
    let o = plan_on_graph(
        &graph,
        &refs,
        &im,
        (cfg.start_action, cfg.start_angle),
        (cfg.target_action, cfg.target_angle),
        opts,
    )?;
    write(&output_path(cfg, "orbit.csv"), &io::format_orbit(&o, &tm))?;
    println!("{}", summary(&o, &tm));
    Ok(())
}

pub fn synth(cfg: &RunConfig) -> CmdResult {
    let levels = synth::unit_levels(cfg.tori);
    for (k, channel) in [Channel::First, Channel::Second].into_iter().enumerate() {
        let m = synth::make_channel_model(channel, cfg.seed);
        let grid = synth::generate_grid(&m, &levels, cfg.samples)?;
        write(
            &cfg.out_dir.join(format!("sigma{}_grid.csv", k + 1)),
            &io::format_grid(&grid),
        )?;
        write(
            &cfg.out_dir.join(format!("sigma{}_truth.txt", k + 1)),
            &io::format_model(&m),
        )?;
    }
    write(
        &cfg.out_dir.join("inner.csv"),
        &io::format_inner(&InnerModel::calibrated()),
    )?;
    println!(
        "seed={},tori={},samples={},dir={}",
        cfg.seed,
        cfg.tori,
        cfg.samples,
        cfg.out_dir.display()
    );
    Ok(())
}

pub fn rtbp_check(cfg: &RunConfig) -> CmdResult {
    let mu = MassRatio::new(cfg.mu)?;
    let x = locate_l1(mu)?;
    let l1 = State6::at_rest([x, 0.0, 0.0]);
    let c = jacobi_constant(&l1, mu)?;
    let f = linear_frequencies(mu)?;
    // energy drift of a nearby state over half a period of the rotating frame
    let probe = State6::new(x + 0.01, 0.0, 0.005, 0.0, 0.0, 0.0);
    let int_cfg = IntegratorConfig {
        local_tol: cfg.integrator_tol,
        ..IntegratorConfig::default()
    };
    let end = integrate(&probe, mu, std::f64::consts::PI, &int_cfg)?;
    let drift = (jacobi_constant(&end, mu)? - jacobi_constant(&probe, mu)?).abs();
    println!("mu={:.16e}", mu.value());
    println!("L1_X={x:.16e}");
    println!("gamma={:.16e}", l1_gamma(mu)?);
    println!("C_L1={c:.10}");
    println!("nu_h={:.12}", f.nu_h);
    println!("nu_p={:.12}", f.nu_p);
    println!("nu_v={:.12}", f.nu_v);
    println!("jacobi_drift_pi={drift:.3e}");
    Ok(())
}
