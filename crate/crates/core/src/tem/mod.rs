//! Integrate-and-fire time encoding machines.
//!
//! All three variants fire when `∫_{t_n}^{t_{n+1}} (f + b_n) dt = Δ`. They
//! differ only in the bias `b_n`:
//!
//! * constant bias `b > c`;
//! * variable bias, a per-interval constant `ε T_max + ε T_{n−1}/2 − f̂_{n−1}`;
//! * linear bias, `ε (t − t_n) − f̂_{n−1} + ε T_{n−1}/2 + μ`.
//!
//! `f̂_{n−1}` is the mean of the signal over the previous interval, which the
//! decoder can recompute from the threshold, the interval and the bias.

mod encode;
mod params;

pub use encode::{encode, firing_density, EncodeOptions, FiringDensity, FiringRecord, StateMode};
pub use params::{
    lb_bias, lb_design, running_average, vb_bias, AffineBias, BiasState, ConstParams,
    IntervalBounds, LbParams, Scheme, SchemeParams, VbParams,
};
