//! Shared fixtures for the criterion benchmarks.

use oppspec_core::rng::rng_from_seed;
use oppspec_core::simkernel::{generate_trace, OccupancyTrace};
use oppspec_core::{ChannelModel, DetectorSpec, DwellSamples, ExpMixture, RadioEnv, State};

/// Link budget used by the benchmarks.
pub fn env() -> RadioEnv {
    RadioEnv {
        pt_mbs: 40.0,
        pt_fbs: 20.46,
        mbs_distance: 20.5,
        indoor_distance: 10.0,
        carrier: 2.65,
        shadow_sigma_mbs: 7.0,
        shadow_sigma_fbs: 4.0,
        noise_density: -170.0,
        bandwidth: 5e6,
    }
}

pub fn detector() -> DetectorSpec {
    DetectorSpec {
        target_pfa: 1e-3,
        sensing_time: 0.02,
        bandwidth: 5e6,
        noise_variance: 1.0,
        duty_cycle_prior: 0.5,
    }
}

/// Two-component ON/OFF channel with unit mean dwells.
pub fn channel() -> ChannelModel {
    let m = ExpMixture::new(vec![0.5, 0.5], vec![0.625, 2.5]).expect("valid mixture");
    ChannelModel::new(m.clone(), m).expect("valid channel")
}

pub fn trace(horizon: f64, seed: u64) -> OccupancyTrace {
    generate_trace(&channel(), horizon, &mut rng_from_seed(seed)).expect("trace")
}

pub fn samples(n: usize, seed: u64) -> DwellSamples {
    let m = channel().off;
    let mut rng = rng_from_seed(seed);
    DwellSamples::new((0..n).map(|_| m.sample(&mut rng)).collect(), State::Off).expect("samples")
}
