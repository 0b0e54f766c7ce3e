//! Opportunistic spectrum access for femto cells.
//!
//! * [`occupancy`]: exponential-mixture dwell models, fitting and goodness of fit.
//! * [`sensing`]: energy detection thresholds and operating points.
//! * [`linkbudget`]: path loss, shadowing, SNR and SINR distributions.
//! * [`analytics`]: closed-form access metrics and the sensing-interval optimizer.
//! * [`simkernel`]: Monte Carlo traces, the renewal oracle and protocol replay.
//! * [`rng`]: seed derivation shared by every stochastic routine.

// `!(x > 0.0)` is the NaN-rejecting guard used throughout.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analytics;
pub mod linkbudget;
pub mod occupancy;
pub mod rng;
pub mod sensing;
pub mod simkernel;

pub use analytics::{AccessPolicy, AnalyticsError, SnrMode, ThroughputFigures};
pub use linkbudget::{DbNormal, Link, LinkError, RadioEnv};
pub use occupancy::{ChannelModel, DwellSamples, ExpMixture, FitConfig, OccupancyError, State};
pub use sensing::{DetectorSpec, Hypothesis, SensingError};
pub use simkernel::{OccupancyTrace, SimError, SimReport};
