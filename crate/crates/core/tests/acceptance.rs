//! Acceptance criteria, one line each. Exits non-zero if a criterion fails
//! that is not listed in `EXPECTED_FAIL`.

use std::f64::consts::{PI, TAU};
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use scatter_core::ifs::{apply_transition, InnerModel, StepLabel, TimeModel};
use scatter_core::odeint::{integrate, IntegratorConfig};
use scatter_core::planner::{
    dijkstra, drift_time, greedy_drift, orbit_shortest_time, CellGraph, CellGrid, DriftOrbit,
    Edge, OrbitStep, PlanOptions,
};
use scatter_core::rtbp::{jacobi_constant, locate_l1, MassRatio, State6};
use scatter_core::ssm::{
    apply_sm, apply_sm_detailed, fit_ssm, kam_first_order, locate_resonance, wrap_angle,
    ApplyOptions, SsmModel,
};
use scatter_core::synth::{self, Channel, GroundTruthSpec};

const SEED: u64 = 2024;

/// Criterion 4 asks for a peak-to-peak oscillation of 0.203003, but that
/// number is the amplitude `sqrt(a^2 + b^2)` of the dominant term, so the
/// peak-to-peak value is twice as large. It is checked as written and fails.
const EXPECTED_FAIL: &[usize] = &[4];

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn energy_anchor() -> Outcome {
    let mu = MassRatio::sun_earth();
    let x = locate_l1(mu).unwrap();
    let c = jacobi_constant(&State6::at_rest([x, 0.0, 0.0]), mu).unwrap();
    outcome(
        (c - 3.00090).abs() <= 5e-6,
        format!("C(L1) = {c:.9}, target 3.00090 +- 5e-6, X(L1) = {x:.12}"),
    )
}

fn integrator_fidelity() -> Outcome {
    let mu = MassRatio::sun_earth();
    let x = locate_l1(mu).unwrap();
    let cfg = IntegratorConfig::default();
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let (mut drift, mut rev) = (0.0f64, 0.0f64);
    for k in 0..10 {
        let d = 0.005 + 0.015 * k as f64 / 9.0;
        let (theta, z): (f64, f64) = (rng.random_range(0.0..TAU), rng.random_range(-1.0..1.0));
        let r = (1.0 - z * z).sqrt();
        let s = State6::new(
            x + d * r * theta.cos(),
            d * r * theta.sin(),
            d * z,
            0.0,
            0.0,
            0.0,
        );
        let c0 = jacobi_constant(&s, mu).unwrap();
        let fwd = integrate(&s, mu, PI, &cfg).unwrap();
        drift = drift.max((jacobi_constant(&fwd, mu).unwrap() - c0).abs());
        let back = integrate(&fwd, mu, -PI, &cfg).unwrap();
        for (a, b) in back.to_array().iter().zip(s.to_array()) {
            rev = rev.max((a - b).abs());
        }
    }
    outcome(
        drift < 1e-11 && rev <= 1e-10,
        format!("max |dC| = {drift:.2e} (< 1e-11), forward-backward = {rev:.2e} (<= 1e-10)"),
    )
}

fn max_dd_error(truth: &SsmModel, fitted: &SsmModel) -> f64 {
    let mut err = 0.0f64;
    for h in &truth.harmonics {
        let got = fitted.harmonic(h.n).unwrap();
        for (t, g) in [(&h.a, &got.a), (&h.b, &got.b)] {
            assert_eq!(&t.nodes()[..t.degree() + 1], &g.nodes()[..t.degree() + 1]);
            for l in 0..g.divided_differences().len() {
                let tv = t.divided_differences().get(l).copied().unwrap_or(0.0);
                err = err.max((g.divided_differences()[l] - tv).abs());
            }
        }
    }
    let (to, go) = (&truth.omega, &fitted.omega);
    for l in 0..go.divided_differences().len() {
        let tv = to.divided_differences().get(l).copied().unwrap_or(0.0);
        if l <= to.degree() {
            assert_eq!(to.nodes()[l], go.nodes()[l]);
        }
        err = err.max((go.divided_differences()[l] - tv).abs());
    }
    err
}

fn ssm_round_trip() -> Outcome {
    let levels = synth::unit_levels(7);
    let mut dd_err = 0.0f64;
    let (mut angle_err, mut action_err) = (0.0f64, 0.0f64);
    let truths = [
        synth::make_paper_magnitude_model(SEED),
        GroundTruthSpec::random(SEED, 4, 5, &levels)
            .unwrap()
            .build()
            .unwrap(),
    ];
    for truth in &truths {
        let grid = synth::generate_grid(truth, &levels, 128).unwrap();
        let fitted = fit_ssm(&grid, 4, 5).unwrap();
        dd_err = dd_err.max(max_dd_error(truth, &fitted));
        for t in &grid.tori {
            for s in &t.samples {
                let (ip, pp) = apply_sm(truth, t.action, s.phi, ApplyOptions::default()).unwrap();
                angle_err = angle_err.max(wrap_angle(pp - s.phi_prime).abs());
                action_err = action_err.max((ip - s.action_prime).abs());
            }
        }
    }
    outcome(
        dd_err <= 1e-9 && angle_err <= 1e-5 && action_err <= 1e-4,
        format!(
            "divided differences {dd_err:.2e} (<= 1e-9), phi' {angle_err:.2e} (<= 1e-5), I' {action_err:.2e} (<= 1e-4)"
        ),
    )
}

fn dominant_amplitude() -> Outcome {
    let m = synth::make_dominant_term_model();
    let opts = ApplyOptions::with_tol(1e-13);
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for k in 0..20_000 {
        let phi = TAU * k as f64 / 20_000.0;
        let (ip, _) = apply_sm(&m, 1.0, phi, opts).unwrap();
        lo = lo.min(ip);
        hi = hi.max(ip);
    }
    let osc = hi - lo;
    outcome(
        (osc - 0.203003).abs() <= 1e-6,
        format!(
            "I' oscillation at I = 1 is {osc:.6} (max - min), target 0.203003 +- 1e-6; amplitude {:.6}",
            osc / 2.0
        ),
    )
}

fn jacobian_det(f: impl Fn(f64, f64) -> (f64, f64), i: f64, p: f64, h: f64) -> f64 {
    let (ip, pp) = f(i + h, p);
    let (im, pm) = f(i - h, p);
    let (jp, qp) = f(i, p + h);
    let (jm, qm) = f(i, p - h);
    let di_di = (ip - im) / (2.0 * h);
    let dp_di = wrap_angle(pp - pm) / (2.0 * h);
    let di_dp = (jp - jm) / (2.0 * h);
    let dp_dp = wrap_angle(qp - qm) / (2.0 * h);
    di_di * dp_dp - di_dp * dp_di
}

fn symplecticity() -> Outcome {
    let m = synth::make_channel_model(Channel::First, SEED);
    let im = InnerModel::calibrated();
    let opts = ApplyOptions::with_tol(1e-12);
    let mut rng = ChaCha8Rng::seed_from_u64(SEED + 5);
    let (mut e_sm, mut e_tau) = (0.0f64, 0.0f64);
    for _ in 0..100 {
        let i = rng.random_range(0.5..6.0);
        let p = rng.random_range(0.0..TAU);
        let sm = |i, p| apply_sm(&m, i, p, opts).unwrap();
        let tau = |i, p| {
            let t = apply_transition(&m, &im, i, p, opts).unwrap();
            (t.action, t.angle)
        };
        e_sm = e_sm.max((jacobian_det(sm, i, p, 1e-6) - 1.0).abs());
        e_tau = e_tau.max((jacobian_det(tau, i, p, 1e-6) - 1.0).abs());
    }
    outcome(
        e_sm <= 1e-5 && e_tau <= 1e-5,
        format!("max |det - 1|: sigma {e_sm:.2e}, tau {e_tau:.2e} (<= 1e-5)"),
    )
}

fn pi_periodicity() -> Outcome {
    let m = synth::make_paper_magnitude_model(SEED);
    let opts = ApplyOptions::default();
    let mut rng = ChaCha8Rng::seed_from_u64(SEED + 6);
    let mut err = 0.0f64;
    for _ in 0..100 {
        let i = rng.random_range(0.1..7.0);
        let p = rng.random_range(0.0..TAU);
        let a = apply_sm_detailed(&m, i, p, opts).unwrap();
        let b = apply_sm_detailed(&m, i, p + PI, opts).unwrap();
        err = err
            .max((a.action - b.action).abs())
            .max(wrap_angle(b.angle - a.angle - PI).abs());
    }
    outcome(err <= 1e-12, format!("max deviation {err:.2e} (<= 1e-12)"))
}

fn brute_force(g: &CellGraph, s: usize, t: usize) -> Option<f64> {
    fn walk(g: &CellGraph, u: usize, t: usize, seen: &mut Vec<bool>, acc: f64, best: &mut f64) {
        if u == t {
            *best = best.min(acc);
            return;
        }
        for e in &g.edges[u] {
            if !seen[e.to] {
                seen[e.to] = true;
                walk(g, e.to, t, seen, acc + e.time, best);
                seen[e.to] = false;
            }
        }
    }
    let mut seen = vec![false; g.len()];
    seen[s] = true;
    let mut best = f64::INFINITY;
    walk(g, s, t, &mut seen, 0.0, &mut best);
    best.is_finite().then_some(best)
}

fn graph_search() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED + 7);
    let (mut mismatches, mut nondeterministic, mut queries) = (0, 0, 0);
    for _ in 0..20 {
        let nodes = rng.random_range(2..=8);
        let grid = CellGrid::new(1, nodes, 7.0).unwrap();
        let mut edges = vec![Vec::new(); nodes];
        for (u, out) in edges.iter_mut().enumerate() {
            for v in 0..nodes {
                if v != u && rng.random_bool(0.35) {
                    // few distinct weights so ties are common
                    let time = [1.0, 2.0, 3.0][rng.random_range(0..3)];
                    out.push(Edge {
                        to: v,
                        label: StepLabel::Inner,
                        time,
                    });
                }
            }
        }
        let g = CellGraph::from_edges(grid, edges);
        for s in 0..nodes {
            for t in 0..nodes {
                queries += 1;
                let got = dijkstra(&g, s, t);
                if format!("{got:?}") != format!("{:?}", dijkstra(&g, s, t)) {
                    nondeterministic += 1;
                }
                let ok = match (got, brute_force(&g, s, t)) {
                    (Ok(p), Some(b)) => {
                        let mut u = s;
                        let mut sum = 0.0;
                        for (from, e) in &p.edges {
                            assert_eq!(*from, u);
                            sum += e.time;
                            u = e.to;
                        }
                        u == t && sum == p.time && (p.time - b).abs() < 1e-12
                    }
                    (Err(_), None) => true,
                    _ => false,
                };
                if !ok {
                    mismatches += 1;
                }
            }
        }
    }
    outcome(
        mismatches == 0 && nondeterministic == 0,
        format!("{queries} queries on 20 graphs: {mismatches} mismatches, {nondeterministic} nondeterministic"),
    )
}

fn planner_envelope() -> Outcome {
    let m1 = synth::make_channel_model(Channel::First, SEED);
    let m2 = synth::make_channel_model(Channel::Second, SEED);
    let im = InnerModel::calibrated();
    let tm = TimeModel::default();
    let x = (1.0, 1.5);
    let y = (7.0, 1.5);
    let planned = orbit_shortest_time(
        &[&m1, &m2],
        &im,
        &tm,
        CellGrid::default(),
        x,
        y,
        PlanOptions::default(),
    );
    let greedy = greedy_drift(&m1, &im, x, 7.0, 500, ApplyOptions::default());
    match (planned, greedy) {
        (Ok(o), Ok(g)) => {
            let (t, tg) = (drift_time(&o, &tm), drift_time(&g, &tm));
            let both = o.uses(StepLabel::Tau1) && o.uses(StepLabel::Tau2);
            let (n0, n1, n2) = o.counts();
            outcome(
                t <= tg && (100.0..=500.0).contains(&t) && both,
                format!(
                    "plan n0={n0} n1={n1} n2={n2} t={t:.3}, greedy t={tg:.3}, window [100, 500], both channels: {both}"
                ),
            )
        }
        (p, g) => outcome(
            false,
            format!("plan {:?}, greedy {:?}", p.err(), g.err()),
        ),
    }
}

fn drift_formula() -> Outcome {
    let tm = TimeModel::default();
    let mut o = DriftOrbit::new((1.0, 1.5));
    let labels = std::iter::repeat_n(StepLabel::Inner, 34)
        .chain(std::iter::repeat_n(StepLabel::Tau1, 9))
        .chain(std::iter::repeat_n(StepLabel::Tau2, 8));
    for label in labels {
        o.steps.push(OrbitStep {
            label,
            action: 1.0,
            angle: 1.5,
            clipped: false,
        });
    }
    let t = drift_time(&o, &tm);
    outcome(
        (204.0..=204.9).contains(&t),
        format!("n0=34, n1+n2=17: t = {t:.4} (t_in = {:.5}, t_out = {}), window [204.0, 204.9]", tm.t_in, tm.t_out),
    )
}

fn resonance_locator() -> Outcome {
    let m = synth::make_paper_magnitude_model(SEED);
    let mut worst = 0.0f64;
    let mut found = Vec::new();
    for (p, q) in [(2u32, 3u32), (3, 4), (5, 7), (7, 10), (9, 13)] {
        let target = p as f64 / q as f64;
        let (lo, hi) = (m.omega(0.0) / PI, m.omega(m.action_max) / PI);
        if target < lo.min(hi) || target > lo.max(hi) {
            continue;
        }
        let i = locate_resonance(&m, p, q).unwrap();
        worst = worst.max((m.omega(i) * q as f64 / (PI * p as f64) - 1.0).abs());
        found.push(format!("{p}/{q}@{i:.4}"));
    }
    outcome(
        worst <= 1e-10 && found.len() == 5,
        format!("max relative error {worst:.2e} (<= 1e-10): {}", found.join(" ")),
    )
}

fn kam_residual(m: &SsmModel, action0: f64) -> f64 {
    let curve = kam_first_order(m, action0).unwrap();
    let opts = ApplyOptions::with_tol(1e-14);
    let mut p = (curve.action_at(0.0), 0.0);
    let mut r = 0.0f64;
    for _ in 0..100 {
        p = apply_sm(m, p.0, p.1, opts).unwrap();
        r = r.max((p.0 - curve.action_at(p.1)).abs());
    }
    r
}

fn kam_scaling() -> Outcome {
    let m = synth::make_paper_magnitude_model(SEED);
    let action0 = 3.3;
    let full = kam_residual(&m, action0);
    let half = kam_residual(&m.with_amplitude_scale(0.5), action0);
    let ratio = full / half;
    outcome(
        (3.0..=5.0).contains(&ratio),
        format!("I0 = {action0}: residual {full:.3e} -> {half:.3e}, ratio {ratio:.3} (in [3, 5])"),
    )
}

/// Name, check, runtime budget in seconds.
type Criterion = (&'static str, fn() -> Outcome, Option<u64>);

fn main() {
    let criteria: [Criterion; 11] = [
        ("energy anchor", energy_anchor, Some(1)),
        ("integrator fidelity", integrator_fidelity, Some(10)),
        ("SSM round trip", ssm_round_trip, Some(5)),
        ("dominant amplitude", dominant_amplitude, None),
        ("symplecticity", symplecticity, None),
        ("pi-periodicity", pi_periodicity, None),
        ("graph search", graph_search, None),
        ("planner envelope", planner_envelope, Some(30)),
        ("drift-time formula", drift_formula, None),
        ("resonance locator", resonance_locator, None),
        ("KAM residual scaling", kam_scaling, Some(5)),
    ];
    let mut failed = Vec::new();
    for (k, (name, run, limit)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let o = run();
        let elapsed = start.elapsed();
        let in_time = limit.is_none_or(|s| elapsed <= Duration::from_secs(s));
        let pass = o.pass && in_time;
        let budget = limit.map_or(String::new(), |s| format!(" / {s} s"));
        println!(
            "criterion {:>2} {:<21} {}  {} [{:.3} s{budget}]",
            k + 1,
            name,
            if pass { "PASS" } else { "FAIL" },
            o.detail,
            elapsed.as_secs_f64()
        );
        if !pass {
            failed.push(k + 1);
        }
    }
    let unexpected: Vec<usize> = failed
        .iter()
        .copied()
        .filter(|k| !EXPECTED_FAIL.contains(k))
        .collect();
    println!(
        "acceptance: {}/{} pass, failing {failed:?}, expected failures {EXPECTED_FAIL:?}",
        criteria.len() - failed.len(),
        criteria.len()
    );
    if !unexpected.is_empty() {
        println!("acceptance: unexpected failures {unexpected:?}");
        std::process::exit(1);
    }
}
