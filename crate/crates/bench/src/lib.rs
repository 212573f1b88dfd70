//! Shared inputs for the benchmarks.

use scatter_core::ifs::InnerModel;
use scatter_core::ssm::{ScatteringGrid, SsmModel};
use scatter_core::synth::{self, Channel};

pub const SEED: u64 = 2024;

pub fn channel_models() -> (SsmModel, SsmModel) {
    (
        synth::make_channel_model(Channel::First, SEED),
        synth::make_channel_model(Channel::Second, SEED),
    )
}

pub fn synthetic_grid(samples: usize) -> ScatteringGrid {
    let (m, _) = channel_models();
    synth::generate_grid(&m, &synth::unit_levels(7), samples).expect("levels inside the domain")
}

pub fn inner() -> InnerModel {
    InnerModel::calibrated()
}
