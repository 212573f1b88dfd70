//! Scattering-map toolkit for the spatial circular restricted three-body
//! problem near L1: the vector field and an RKF7(8) integrator, the Standard
//! Scattering Map (fit, evaluation, diagnostics), the inner and transition
//! maps, and drift-orbit planning on a cell graph.

// `!(x > 0.0)` is used on purpose so that NaN fails the check.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod ifs;
pub mod io;
pub mod newton;
pub mod odeint;
pub mod planner;
pub mod rtbp;
pub mod ssm;
pub mod synth;

pub use error::{Error, Result, Stage};
pub use ifs::{
    apply_inner, apply_transition, inner_time, InnerModel, StepLabel, TimeModel,
    TransitionImage,
};
pub use newton::{newton_interpolate, NewtonPoly};
pub use odeint::{integrate, integrate_to_section, IntegratorConfig, SectionDirection, SectionEvent};
pub use planner::{
    build_cell_graph, classify, dijkstra, drift_time, greedy_drift, orbit_shortest_time,
    CellGraph, CellGrid, DriftOrbit, Edge, OrbitStep, Partition, PlanOptions,
};
pub use rtbp::{MassRatio, State6};
pub use ssm::{apply_sm, fit_ssm, ApplyOptions, ScatteringGrid, SsmModel};
