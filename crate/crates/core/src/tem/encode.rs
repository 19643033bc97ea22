use serde::{Deserialize, Serialize};

use super::params::{AffineBias, BiasState, Scheme, SchemeParams};
use crate::error::{Error, Result};
use crate::quantization::Codebook;
use crate::signal::BandlimitedSignal;

/// How the encoder's bias recursion sees its own past intervals.
#[derive(Debug, Clone, Default)]
pub enum StateMode {
    /// The encoder uses exact intervals; only the decoder sees quantized
    /// ones, so any state mismatch propagates.
    #[default]
    OpenLoop,
    /// The encoder updates its bias state from quantized intervals, the
    /// same values the decoder replays. The adaptive bias offset is raised
    /// by `ε·q/2`, `q` the widest quantizer cell.
    Matched(Codebook),
}

impl StateMode {
    /// Offset added to the adaptive bias under this mode.
    pub fn bias_margin(&self, params: &SchemeParams) -> f64 {
        match self {
            StateMode::OpenLoop => 0.0,
            StateMode::Matched(cb) => 0.5 * params.class().slope_bound() * cb.max_cell_width(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct EncodeOptions {
    /// Firing-time resolution of the root finder (s).
    pub resolution: f64,
    pub state: StateMode,
}

impl Default for EncodeOptions {
    fn default() -> Self {
        Self {
            resolution: 1e-12,
            state: StateMode::OpenLoop,
        }
    }
}

/// Firing times of one encoding, stored as a start time and intervals.
///
/// `t_first` is the integrator reset at the start of the encoding window;
/// the first interval runs under the history-free bias and every later one
/// under the scheme's adaptive rule.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FiringRecord {
    pub scheme: Scheme,
    pub t_first: f64,
    pub intervals: Vec<f64>,
    pub bias_trace: Vec<AffineBias>,
}

impl FiringRecord {
    /// Number of threshold crossings.
    pub fn n_firings(&self) -> usize {
        self.intervals.len()
    }

    /// `t_first` followed by every firing time.
    pub fn firing_times(&self) -> Vec<f64> {
        let mut times = Vec::with_capacity(self.intervals.len() + 1);
        let mut t = self.t_first;
        times.push(t);
        for dt in &self.intervals {
            t += dt;
            times.push(t);
        }
        times
    }

    /// Intervals produced by the adaptive rule, i.e. all but the first.
    pub fn steady_intervals(&self) -> &[f64] {
        self.intervals.get(1..).unwrap_or(&[])
    }

    pub fn firing_density(&self) -> Result<FiringDensity> {
        firing_density(self.steady_intervals())
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }
}

/// Firing rates `1/T_n` and their spread.
#[derive(Debug, Clone, PartialEq)]
pub struct FiringDensity {
    pub rates: Vec<f64>,
    pub min: f64,
    pub max: f64,
    pub spread: f64,
}

pub fn firing_density(intervals: &[f64]) -> Result<FiringDensity> {
    if intervals.is_empty() {
        return Err(Error::invalid("firing density of an empty interval list"));
    }
    let rates: Vec<f64> = intervals.iter().map(|t| 1.0 / t).collect();
    let min = rates.iter().cloned().fold(f64::INFINITY, f64::min);
    let max = rates.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    Ok(FiringDensity {
        rates,
        min,
        max,
        spread: max - min,
    })
}

/// Encodes `signal` over `[t_start, t_end]`.
///
/// Each firing is the first time the integral of `f + b_n` since the last
/// firing reaches the threshold. Crossings are bracketed on a grid of step
/// `T_min/8` and refined by safeguarded false position until the bracket is
/// below `opts.resolution` or the integral misses the threshold by at most
/// `1e-13·Δ`. Encoding stops at the last firing not after `t_end`.
pub fn encode(
    signal: &BandlimitedSignal,
    params: &SchemeParams,
    t_start: f64,
    t_end: f64,
    opts: &EncodeOptions,
) -> Result<FiringRecord> {
    if !(t_start < t_end) {
        return Err(Error::invalid(format!(
            "encode window [{t_start}, {t_end}] is empty"
        )));
    }
    if !(opts.resolution > 0.0) {
        return Err(Error::invalid("encoder resolution must be positive"));
    }
    let delta = params.threshold();
    let bounds = params.interval_bounds();
    let step = bounds.t_min / 8.0;
    let give_up = 64.0 * bounds.t_max;
    let margin = opts.state.bias_margin(params);
    let ftol = 1e-13 * delta;

    let mut intervals = Vec::new();
    let mut bias_trace = Vec::new();
    let mut state: Option<BiasState> = None;
    let mut t_n = t_start;

    loop {
        let remaining = t_end - t_n;
        if remaining <= 0.0 {
            break;
        }
        let bias = params.bias(state.as_ref(), margin);
        let mut cursor = signal.integral_cursor(t_n);
        let mut g = |s: f64| cursor.integral_to(t_n + s) + bias.integral(s) - delta;

        // bracket the crossing
        let (mut lo, mut g_lo) = (0.0, -delta);
        let mut bracket = None;
        loop {
            let hi = (lo + step).min(remaining);
            let g_hi = g(hi);
            if g_hi >= 0.0 {
                bracket = Some((lo, g_lo, hi, g_hi));
                break;
            }
            if hi >= remaining {
                break;
            }
            if hi > give_up {
                return Err(Error::Infeasible { time: t_n });
            }
            lo = hi;
            g_lo = g_hi;
        }
        let Some((lo, g_lo, hi, g_hi)) = bracket else {
            break;
        };

        let interval = refine_root(&mut g, lo, g_lo, hi, g_hi, opts.resolution, ftol);
        intervals.push(interval);
        bias_trace.push(bias);

        let seen = match &opts.state {
            StateMode::OpenLoop => interval,
            StateMode::Matched(cb) => cb.reproduce(interval),
        };
        let fhat = super::params::running_average(delta, seen, bias.integral(seen))?;
        state = Some(BiasState {
            fhat_prev: fhat,
            t_prev: seen,
        });
        t_n += interval;
    }

    Ok(FiringRecord {
        scheme: params.scheme(),
        t_first: t_start,
        intervals,
        bias_trace,
    })
}

/// Illinois false position on a sign-changing bracket `g(lo) < 0 ≤ g(hi)`,
/// falling back to bisection when the secant point leaves the bracket.
fn refine_root(
    g: &mut impl FnMut(f64) -> f64,
    mut lo: f64,
    mut g_lo: f64,
    mut hi: f64,
    mut g_hi: f64,
    resolution: f64,
    ftol: f64,
) -> f64 {
    if g_hi.abs() <= ftol {
        return hi;
    }
    let mut side = 0i8;
    let mut best = (hi, g_hi.abs());
    for iter in 0..200 {
        if hi - lo <= resolution {
            break;
        }
        let mut c = (lo * g_hi - hi * g_lo) / (g_hi - g_lo);
        // every fourth step bisects so slow one-sided convergence cannot stall
        if !(c > lo && c < hi) || iter % 4 == 3 {
            c = 0.5 * (lo + hi);
        }
        let gc = g(c);
        if gc.abs() < best.1 {
            best = (c, gc.abs());
        }
        if gc.abs() <= ftol {
            return c;
        }
        if gc < 0.0 {
            lo = c;
            g_lo = gc;
            if side == -1 {
                g_hi *= 0.5;
            }
            side = -1;
        } else {
            hi = c;
            g_hi = gc;
            if side == 1 {
                g_lo *= 0.5;
            }
            side = 1;
        }
    }
    if hi - lo <= resolution {
        0.5 * (lo + hi)
    } else {
        best.0
    }
}
