//! Drift orbits of the system `{F, tau_1, tau_2}`: the gain/loss partition,
//! the greedy orbit, the cell graph and the shortest-time orbit.

use std::cmp::Ordering;
use std::collections::{BinaryHeap, HashMap};
use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::ifs::{apply_inner, apply_transition, InnerModel, StepLabel, TimeModel};
use crate::ssm::{apply_sm_detailed, eval_derivs, normalize_half_angle, ApplyOptions, SsmModel};

/// Half-width of the neutral band of the partition.
pub const NEUTRAL_BAND: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Partition {
    Gain,
    Loss,
    Neutral,
}

/// Sign of `dLt/dphi'` at the solved image angle, that is of `I' - I`.
pub fn classify(m: &SsmModel, action: f64, phi: f64, opts: ApplyOptions) -> Result<Partition> {
    let img = apply_sm_detailed(m, action, phi, opts)?;
    let d = eval_derivs(m, action, img.angle_unwrapped).d_phi;
    Ok(if d > NEUTRAL_BAND {
        Partition::Gain
    } else if d < -NEUTRAL_BAND {
        Partition::Loss
    } else {
        Partition::Neutral
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OrbitStep {
    pub label: StepLabel,
    pub action: f64,
    pub angle: f64,
    /// Image above the top of the domain; always the last step.
    pub clipped: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DriftOrbit {
    pub start: (f64, f64),
    pub steps: Vec<OrbitStep>,
}

impl DriftOrbit {
    pub fn new(start: (f64, f64)) -> Self {
        Self {
            start,
            steps: Vec::new(),
        }
    }

    /// `(n0, n1, n2)`: inner steps and steps through each channel.
    pub fn counts(&self) -> (usize, usize, usize) {
        let mut c = (0, 0, 0);
        for s in &self.steps {
            match s.label.channel() {
                None => c.0 += 1,
                Some(1) => c.1 += 1,
                Some(_) => c.2 += 1,
            }
        }
        c
    }

    pub fn end(&self) -> (f64, f64) {
        self.steps
            .last()
            .map_or(self.start, |s| (s.action, s.angle))
    }

    pub fn uses(&self, label: StepLabel) -> bool {
        self.steps.iter().any(|s| s.label == label)
    }

    /// Appends `other`'s steps; `other` is taken to start where `self` ends.
    pub fn concat(mut self, other: &DriftOrbit) -> Self {
        self.steps.extend_from_slice(&other.steps);
        self
    }
}

/// `n0 t_in + (n1 + n2) t_out`.
pub fn drift_time(o: &DriftOrbit, tm: &TimeModel) -> f64 {
    let (n0, n1, n2) = o.counts();
    n0 as f64 * tm.t_in + (n1 + n2) as f64 * tm.t_out
}

/// Applies `sigma` whenever it strictly gains action, otherwise `F`, until
/// `I >= target`. A scattering image above the inner table ends the orbit.
pub fn greedy_drift(
    m: &SsmModel,
    im: &InnerModel,
    start: (f64, f64),
    target: f64,
    max_steps: usize,
    opts: ApplyOptions,
) -> Result<DriftOrbit> {
    let (_, top) = im.range();
    if target > top {
        return Err(Error::InvalidConfig(format!(
            "target action {target} above the domain top {top}"
        )));
    }
    let mut orbit = DriftOrbit::new(start);
    let (mut action, mut phi) = start;
    while action < target {
        if orbit.steps.len() >= max_steps {
            return Err(Error::MaxSteps {
                max_steps,
                partial: Box::new(orbit),
            });
        }
        let img = apply_sm_detailed(m, action, phi, opts)?;
        let step = if img.action > action {
            OrbitStep {
                label: StepLabel::Sigma1,
                action: img.action,
                angle: img.angle,
                clipped: img.action > top,
            }
        } else {
            let (i, p) = apply_inner(im, action, phi)?;
            OrbitStep {
                label: StepLabel::Inner,
                action: i,
                angle: p,
                clipped: false,
            }
        };
        orbit.steps.push(step);
        if step.clipped {
            break;
        }
        action = step.action;
        phi = step.angle;
    }
    Ok(orbit)
}

/// Uniform `m x n` cells over `(0, action_max] x [0, pi)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CellGrid {
    pub m: usize,
    pub n: usize,
    pub action_max: f64,
}

impl Default for CellGrid {
    fn default() -> Self {
        Self {
            m: 30,
            n: 30,
            action_max: 7.0,
        }
    }
}

impl CellGrid {
    pub fn new(m: usize, n: usize, action_max: f64) -> Result<Self> {
        if m == 0 || n == 0 || !(action_max > 0.0) {
            return Err(Error::InvalidConfig(format!(
                "cell grid {m} x {n} over (0, {action_max}]"
            )));
        }
        Ok(Self { m, n, action_max })
    }

    pub fn len(&self) -> usize {
        self.m * self.n
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn d_action(&self) -> f64 {
        self.action_max / self.m as f64
    }

    pub fn d_angle(&self) -> f64 {
        PI / self.n as f64
    }

    pub fn index(&self, row: usize, col: usize) -> usize {
        row * self.n + col
    }

    pub fn row_col(&self, cell: usize) -> (usize, usize) {
        (cell / self.n, cell % self.n)
    }

    fn col_of(&self, phi: f64) -> usize {
        ((normalize_half_angle(phi) / self.d_angle()) as usize).min(self.n - 1)
    }

    /// Cell containing `(I, phi)`, angles taken mod pi; `None` outside the
    /// action range.
    pub fn cell_of(&self, action: f64, phi: f64) -> Option<usize> {
        if !(action > 0.0) || action > self.action_max {
            return None;
        }
        let row = ((action / self.d_action()) as usize).min(self.m - 1);
        Some(self.index(row, self.col_of(phi)))
    }

    /// Like [`cell_of`](Self::cell_of) but actions above the top map to the
    /// cell containing `(action_max, phi)`.
    pub fn cell_of_clipped(&self, action: f64, phi: f64) -> Option<usize> {
        self.cell_of(action.min(self.action_max), phi)
    }

    pub fn center(&self, cell: usize) -> (f64, f64) {
        let (r, c) = self.row_col(cell);
        (
            (r as f64 + 0.5) * self.d_action(),
            (c as f64 + 0.5) * self.d_angle(),
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Edge {
    pub to: usize,
    pub label: StepLabel,
    pub time: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CellGraph {
    pub grid: CellGrid,
    /// Outgoing edges per source cell, sorted by `(to, label)`.
    pub edges: Vec<Vec<Edge>>,
    /// Cells whose transition image could not be computed.
    pub warnings: usize,
}

impl CellGraph {
    /// Graph with explicit adjacency, for tests and tools.
    pub fn from_edges(grid: CellGrid, edges: Vec<Vec<Edge>>) -> Self {
        let mut edges = edges;
        edges.resize(grid.len(), Vec::new());
        for out in &mut edges {
            out.sort_by_key(|e| (e.to, e.label));
        }
        Self {
            grid,
            edges,
            warnings: 0,
        }
    }

    pub fn len(&self) -> usize {
        self.edges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.edges.is_empty()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.iter().map(Vec::len).sum()
    }
}

/// Evaluates `F` and each transition at every cell centre. Transition `k` of
/// `transitions` is labelled `Tau{k+1}`; at most two are accepted.
pub fn build_cell_graph(
    transitions: &[&SsmModel],
    im: &InnerModel,
    tm: &TimeModel,
    grid: CellGrid,
    opts: ApplyOptions,
) -> Result<CellGraph> {
    if transitions.len() > 2 {
        return Err(Error::InvalidConfig(format!(
            "{} transition maps given, at most 2 supported",
            transitions.len()
        )));
    }
    let mut edges = Vec::with_capacity(grid.len());
    let mut warnings = 0;
    for cell in 0..grid.len() {
        let (i, p) = grid.center(cell);
        let mut out: Vec<Edge> = Vec::with_capacity(3);
        let (fi, fp) = apply_inner(im, i, p)?;
        if let Some(to) = grid.cell_of(fi, fp) {
            out.push(Edge {
                to,
                label: StepLabel::Inner,
                time: tm.t_in,
            });
        }
        for (k, m) in transitions.iter().enumerate() {
            let img = match apply_transition(m, im, i, p, opts) {
                Ok(img) => img,
                Err(Error::DomainExit { .. } | Error::NonConvergence { .. }) => {
                    warnings += 1;
                    continue;
                }
                Err(e) => return Err(e),
            };
            let Some(to) = grid.cell_of_clipped(img.action, img.angle) else {
                continue;
            };
            if out.iter().all(|e| e.to != to) {
                out.push(Edge {
                    to,
                    label: StepLabel::tau(k),
                    time: tm.t_out,
                });
            }
        }
        out.sort_by_key(|e| (e.to, e.label));
        edges.push(out);
    }
    Ok(CellGraph {
        grid,
        edges,
        warnings,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct QueueItem {
    dist: f64,
    cell: usize,
}

impl Eq for QueueItem {}

impl Ord for QueueItem {
    fn cmp(&self, other: &Self) -> Ordering {
        // min-heap on (dist, cell)
        other
            .dist
            .total_cmp(&self.dist)
            .then_with(|| other.cell.cmp(&self.cell))
    }
}

impl PartialOrd for QueueItem {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Relative slack when matching `time + dist` against a shortest distance.
const TIE_EPS: f64 = 1e-12;

/// Shortest times from every cell to one target, and the edge each cell
/// should take.
#[derive(Debug, Clone, PartialEq)]
pub struct DistanceField {
    pub target: usize,
    /// `dist[u]`: shortest time from `u` to the target, infinite if unreachable.
    pub dist: Vec<f64>,
    /// Edge minimising `time + dist[to]`, ties broken by `(to, label)`. At the
    /// target itself this is the first edge of the shortest cycle back.
    pub next: Vec<Option<Edge>>,
}

/// Single reverse Dijkstra from `target`.
pub fn reverse_dijkstra(g: &CellGraph, target: usize) -> Result<DistanceField> {
    let n = g.len();
    if target >= n {
        return Err(Error::OutOfRange(format!("cell {target} not in graph of {n}")));
    }
    let mut incoming: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n];
    for (u, out) in g.edges.iter().enumerate() {
        for e in out {
            incoming[e.to].push((u, e.time));
        }
    }
    let mut dist = vec![f64::INFINITY; n];
    let mut done = vec![false; n];
    let mut heap = BinaryHeap::new();
    dist[target] = 0.0;
    heap.push(QueueItem {
        dist: 0.0,
        cell: target,
    });
    while let Some(QueueItem { dist: d, cell: v }) = heap.pop() {
        if done[v] {
            continue;
        }
        done[v] = true;
        for &(u, w) in &incoming[v] {
            let nd = d + w;
            if nd < dist[u] {
                dist[u] = nd;
                heap.push(QueueItem { dist: nd, cell: u });
            }
        }
    }
    let next = g
        .edges
        .iter()
        .map(|out| {
            let mut best: Option<(f64, Edge)> = None;
            for e in out {
                let c = e.time + dist[e.to];
                if !c.is_finite() {
                    continue;
                }
                match best {
                    Some((b, _)) if c >= b - TIE_EPS * b.abs().max(1.0) => {}
                    _ => best = Some((c, *e)),
                }
            }
            best.map(|(_, e)| e)
        })
        .collect();
    Ok(DistanceField { target, dist, next })
}

#[derive(Debug, Clone, PartialEq)]
pub struct GraphPath {
    /// `(source cell, edge)` in order.
    pub edges: Vec<(usize, Edge)>,
    pub time: f64,
}

/// Shortest-time path from `s` to `t`.
pub fn dijkstra(g: &CellGraph, s: usize, t: usize) -> Result<GraphPath> {
    if s >= g.len() {
        return Err(Error::OutOfRange(format!("cell {s} not in graph")));
    }
    let field = reverse_dijkstra(g, t)?;
    if !field.dist[s].is_finite() {
        return Err(Error::Unreachable { from: s, to: t });
    }
    let mut edges = Vec::new();
    let mut time = 0.0;
    let mut u = s;
    while u != t {
        let e = field.next[u].expect("finite distance has a next edge");
        edges.push((u, e));
        time += e.time;
        u = e.to;
    }
    Ok(GraphPath { edges, time })
}

/// Planner settings beyond the models and the grid.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlanOptions {
    pub radius: f64,
    /// Allowed repetitions of one `(cell, label)` pair; `None` means `4 m n`.
    pub livelock_bound: Option<usize>,
    pub apply: ApplyOptions,
}

impl Default for PlanOptions {
    fn default() -> Self {
        Self {
            radius: 0.25,
            livelock_bound: None,
            apply: ApplyOptions::default(),
        }
    }
}

/// Distance in `(I, phi)` with the angle difference taken mod pi.
pub fn neighbourhood_distance(a: (f64, f64), b: (f64, f64)) -> f64 {
    let d = (a.1 - b.1).rem_euclid(PI);
    let d = d.min(PI - d);
    (a.0 - b.0).hypot(d)
}

/// Shortest-time orbit from `x` to the neighbourhood of `y`, re-planning
/// from the cell of each exact iterate.
pub fn orbit_shortest_time(
    transitions: &[&SsmModel],
    im: &InnerModel,
    tm: &TimeModel,
    grid: CellGrid,
    x: (f64, f64),
    y: (f64, f64),
    opts: PlanOptions,
) -> Result<DriftOrbit> {
    let graph = build_cell_graph(transitions, im, tm, grid, opts.apply)?;
    plan_on_graph(&graph, transitions, im, x, y, opts)
}

/// [`orbit_shortest_time`] on a prebuilt graph.
pub fn plan_on_graph(
    graph: &CellGraph,
    transitions: &[&SsmModel],
    im: &InnerModel,
    x: (f64, f64),
    y: (f64, f64),
    opts: PlanOptions,
) -> Result<DriftOrbit> {
    if !(opts.radius > 0.0) {
        return Err(Error::InvalidConfig(format!("radius {} not positive", opts.radius)));
    }
    let grid = graph.grid;
    let locate = |p: (f64, f64)| {
        grid.cell_of(p.0, p.1)
            .ok_or_else(|| Error::OutOfRange(format!("point {p:?} outside the cell grid")))
    };
    let target = locate(y)?;
    let field = reverse_dijkstra(graph, target)?;
    let bound = opts.livelock_bound.unwrap_or(4 * grid.len());
    let mut visits: HashMap<(usize, StepLabel), usize> = HashMap::new();
    let mut orbit = DriftOrbit::new(x);
    let mut p = x;
    while neighbourhood_distance(p, y) > opts.radius {
        let u = locate(p)?;
        let e = field.next[u].ok_or(Error::Unreachable {
            from: u,
            to: target,
        })?;
        let count = visits.entry((u, e.label)).or_insert(0);
        *count += 1;
        if *count > bound {
            return Err(Error::Livelock {
                cell: u,
                label: e.label.to_string(),
                visits: *count,
            });
        }
        let step = match e.label {
            StepLabel::Inner => {
                let (i, a) = apply_inner(im, p.0, p.1)?;
                OrbitStep {
                    label: e.label,
                    action: i,
                    angle: a,
                    clipped: false,
                }
            }
            label => {
                let k = label.channel().expect("transition label") - 1;
                let img = apply_transition(transitions[k], im, p.0, p.1, opts.apply)?;
                OrbitStep {
                    label,
                    action: img.action,
                    angle: img.angle,
                    clipped: img.clipped,
                }
            }
        };
        orbit.steps.push(step);
        if step.clipped {
            break;
        }
        p = (step.action, step.angle);
    }
    Ok(orbit)
}
