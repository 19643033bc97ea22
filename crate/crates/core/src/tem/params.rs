use serde::{Deserialize, Serialize};
use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::signal::SignalClass;

/// Which integrate-and-fire variant produced a record.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Scheme {
    /// Constant bias.
    Conv,
    /// Per-interval constant bias tracking the running average.
    Vb,
    /// Affine bias with slope `ε`, re-anchored at every firing.
    Lb,
}

impl Scheme {
    pub const ALL: [Scheme; 3] = [Scheme::Conv, Scheme::Vb, Scheme::Lb];

    /// Bitstream tag.
    pub fn tag(self) -> u8 {
        match self {
            Scheme::Conv => 0,
            Scheme::Vb => 1,
            Scheme::Lb => 2,
        }
    }

    pub fn from_tag(tag: u8) -> Option<Self> {
        match tag {
            0 => Some(Scheme::Conv),
            1 => Some(Scheme::Vb),
            2 => Some(Scheme::Lb),
            _ => None,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Scheme::Conv => "conv",
            Scheme::Vb => "vb",
            Scheme::Lb => "lb",
        }
    }
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Scheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "conv" | "cif" => Ok(Scheme::Conv),
            "vb" => Ok(Scheme::Vb),
            "lb" => Ok(Scheme::Lb),
            other => Err(Error::invalid(format!("unknown scheme '{other}'"))),
        }
    }
}

/// Worst-case firing interval range of a parameter set.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntervalBounds {
    pub t_min: f64,
    pub t_max: f64,
}

impl IntervalBounds {
    pub fn range(&self) -> f64 {
        self.t_max - self.t_min
    }

    pub fn contains(&self, t: f64, tol: f64) -> bool {
        t >= self.t_min - tol && t <= self.t_max + tol
    }
}

/// Linear-bias encoder parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LbParams {
    pub delta: f64,
    pub mu: f64,
    pub alpha: f64,
    pub beta: f64,
    pub class: SignalClass,
}

/// Threshold and bias shift guaranteeing `α·T_Nyq ≤ T_n ≤ β·T_Nyq`.
pub fn lb_design(alpha: f64, beta: f64, omega0: f64, amp_bound: f64) -> Result<LbParams> {
    let class = SignalClass::new(omega0, amp_bound)?;
    if !(alpha > 0.0) || !(beta > alpha) || !(beta <= 1.0) {
        return Err(Error::invalid(format!(
            "interval fractions must satisfy 0 < alpha < beta <= 1, got alpha = {alpha}, beta = {beta}"
        )));
    }
    let eps = class.slope_bound();
    if !(eps > 0.0) {
        return Err(Error::invalid("slope bound must be positive"));
    }
    let t = class.nyquist_period();
    let gain = (beta + alpha) / (beta - alpha);
    let mu = eps * alpha * t * gain;
    // Δ = μ·β·T_Nyq exactly, i.e. ε·α·β·T²·(β+α)/(β−α).
    let delta = mu * beta * t;
    Ok(LbParams {
        delta,
        mu,
        alpha,
        beta,
        class,
    })
}

impl LbParams {
    /// Parameters given directly as threshold and shift; `α`, `β` are
    /// derived from the worst-case bounds.
    pub fn from_threshold(delta: f64, mu: f64, class: SignalClass) -> Result<Self> {
        if !(delta > 0.0) || !(mu > 0.0) || !delta.is_finite() || !mu.is_finite() {
            return Err(Error::invalid(format!(
                "LB threshold and shift must be positive, got delta = {delta}, mu = {mu}"
            )));
        }
        let mut p = Self {
            delta,
            mu,
            alpha: 0.0,
            beta: 0.0,
            class,
        };
        let b = p.interval_bounds();
        let t = class.nyquist_period();
        p.alpha = b.t_min / t;
        p.beta = b.t_max / t;
        Ok(p)
    }

    pub fn epsilon(&self) -> f64 {
        self.class.slope_bound()
    }

    pub fn t_nyq(&self) -> f64 {
        self.class.nyquist_period()
    }

    /// `T_max = Δ/μ`; `T_min` is the positive root of
    /// `ε T² + (ε T_max + μ) T = Δ`, the fastest firing after a maximal
    /// previous interval.
    pub fn interval_bounds(&self) -> IntervalBounds {
        let eps = self.epsilon();
        let t_max = self.delta / self.mu;
        let b = eps * t_max + self.mu;
        // rationalized root, stable as ε → 0
        let t_min = 2.0 * self.delta / (b + (b * b + 4.0 * eps * self.delta).sqrt());
        IntervalBounds { t_min, t_max }
    }
}

/// Variable-bias encoder parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VbParams {
    pub delta_v: f64,
    pub class: SignalClass,
}

impl VbParams {
    pub fn new(delta_v: f64, class: SignalClass) -> Result<Self> {
        if !(delta_v > 0.0) || !delta_v.is_finite() {
            return Err(Error::invalid(format!(
                "VB threshold must be positive, got {delta_v}"
            )));
        }
        if !(class.slope_bound() > 0.0) {
            return Err(Error::invalid("VB requires a positive slope bound"));
        }
        Ok(Self { delta_v, class })
    }

    pub fn epsilon(&self) -> f64 {
        self.class.slope_bound()
    }

    /// `√(2Δ_v/ε)`.
    pub fn t_max(&self) -> f64 {
        (2.0 * self.delta_v / self.epsilon()).sqrt()
    }

    pub fn interval_bounds(&self) -> IntervalBounds {
        let t_max = self.t_max();
        IntervalBounds {
            t_min: (5f64.sqrt() - 2.0) * t_max,
            t_max,
        }
    }
}

/// Constant-bias encoder parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConstParams {
    pub delta_c: f64,
    pub bias: f64,
    pub class: SignalClass,
}

impl ConstParams {
    pub fn new(delta_c: f64, bias: f64, class: SignalClass) -> Result<Self> {
        if !(delta_c > 0.0) || !delta_c.is_finite() {
            return Err(Error::invalid(format!(
                "threshold must be positive, got {delta_c}"
            )));
        }
        if !(bias > class.amp_bound) || !bias.is_finite() {
            return Err(Error::invalid(format!(
                "constant bias {bias} must exceed the amplitude bound {}",
                class.amp_bound
            )));
        }
        Ok(Self {
            delta_c,
            bias,
            class,
        })
    }

    pub fn interval_bounds(&self) -> IntervalBounds {
        let c = self.class.amp_bound;
        IntervalBounds {
            t_min: self.delta_c / (self.bias + c),
            t_max: self.delta_c / (self.bias - c),
        }
    }
}

/// Bias on one firing interval, `b(t) = slope·(t − t_n) + offset`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AffineBias {
    pub slope: f64,
    pub offset: f64,
}

impl AffineBias {
    pub fn value_at(&self, elapsed: f64) -> f64 {
        self.slope * elapsed + self.offset
    }

    /// `∫_0^{elapsed} b`.
    pub fn integral(&self, elapsed: f64) -> f64 {
        elapsed * (0.5 * self.slope * elapsed + self.offset)
    }
}

/// Decoder-visible history carried from one interval to the next.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BiasState {
    /// Mean of `f` over the previous interval.
    pub fhat_prev: f64,
    /// Length of the previous interval.
    pub t_prev: f64,
}

/// Linear bias after a firing:
/// `b_n(t) = ε(t − t_n) − f̂_{n−1} + ε T_{n−1}/2 + μ`.
pub fn lb_bias(state: &BiasState, params: &LbParams) -> AffineBias {
    let eps = params.epsilon();
    AffineBias {
        slope: eps,
        offset: params.mu + 0.5 * eps * state.t_prev - state.fhat_prev,
    }
}

/// VB constant bias after a firing: `ε T_max + ε T_{n−1}/2 − f̂_{n−1}`.
pub fn vb_bias(state: &BiasState, params: &VbParams) -> AffineBias {
    let eps = params.epsilon();
    AffineBias {
        slope: 0.0,
        offset: eps * params.t_max() + 0.5 * eps * state.t_prev - state.fhat_prev,
    }
}

/// Mean of `f` over an interval, recovered from the threshold and the
/// integral of the bias: `(Δ − ∫b)/T`.
pub fn running_average(delta: f64, t_prev: f64, bias_integral: f64) -> Result<f64> {
    if !(t_prev > 0.0) {
        return Err(Error::invalid(format!(
            "interval must be positive, got {t_prev}"
        )));
    }
    Ok((delta - bias_integral) / t_prev)
}

/// Parameters of any of the three encoders.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "scheme", rename_all = "lowercase")]
pub enum SchemeParams {
    Conv(ConstParams),
    Vb(VbParams),
    Lb(LbParams),
}

impl SchemeParams {
    pub fn scheme(&self) -> Scheme {
        match self {
            SchemeParams::Conv(_) => Scheme::Conv,
            SchemeParams::Vb(_) => Scheme::Vb,
            SchemeParams::Lb(_) => Scheme::Lb,
        }
    }

    pub fn class(&self) -> SignalClass {
        match self {
            SchemeParams::Conv(p) => p.class,
            SchemeParams::Vb(p) => p.class,
            SchemeParams::Lb(p) => p.class,
        }
    }

    /// Firing threshold `Δ`.
    pub fn threshold(&self) -> f64 {
        match self {
            SchemeParams::Conv(p) => p.delta_c,
            SchemeParams::Vb(p) => p.delta_v,
            SchemeParams::Lb(p) => p.delta,
        }
    }

    pub fn interval_bounds(&self) -> IntervalBounds {
        match self {
            SchemeParams::Conv(p) => p.interval_bounds(),
            SchemeParams::Vb(p) => p.interval_bounds(),
            SchemeParams::Lb(p) => p.interval_bounds(),
        }
    }

    /// Bias for the next interval. `state` is `None` before the first
    /// firing; the history-free bias replaces `−f̂ + εT/2` by the class
    /// bound `c`. `margin` is added to the offset of the adaptive schemes.
    pub fn bias(&self, state: Option<&BiasState>, margin: f64) -> AffineBias {
        match (self, state) {
            (SchemeParams::Conv(p), _) => AffineBias {
                slope: 0.0,
                offset: p.bias,
            },
            (SchemeParams::Vb(p), None) => AffineBias {
                slope: 0.0,
                offset: p.epsilon() * p.t_max() + p.class.amp_bound + margin,
            },
            (SchemeParams::Vb(p), Some(s)) => {
                let mut b = vb_bias(s, p);
                b.offset += margin;
                b
            }
            (SchemeParams::Lb(p), None) => AffineBias {
                slope: p.epsilon(),
                offset: p.class.amp_bound + p.mu + margin,
            },
            (SchemeParams::Lb(p), Some(s)) => {
                let mut b = lb_bias(s, p);
                b.offset += margin;
                b
            }
        }
    }
}
