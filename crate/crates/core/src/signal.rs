//! Bounded bandlimited signals represented as finite sinc series on a
//! Nyquist-spaced grid.
//!
//! A signal is `f(t) = Σ_k a_k sinc(Ω0 (t − τ_k))` with `τ_k = origin + k·T`,
//! `T = π/Ω0` and `sinc(x) = sin(x)/x`. Because `Ω0·T = π`, every term
//! shares one `sin`/`cos` up to sign, which keeps evaluation and the closed
//! form integral cheap.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::special::si_lattice;

/// Guard coefficients placed beyond each end of the signal support.
pub const GUARD_SAMPLES: usize = 5;

/// Dense-grid oversampling used by [`BandlimitedSignal::peak`].
const PEAK_DENSITY: usize = 32;

pub fn nyquist_period(omega0: f64) -> Result<f64> {
    if !(omega0 > 0.0) || !omega0.is_finite() {
        return Err(Error::invalid(format!(
            "omega0 must be positive, got {omega0}"
        )));
    }
    Ok(PI / omega0)
}

/// Slope bound `ε = c·Ω0` of the class.
pub fn slope_bound(omega0: f64, amp_bound: f64) -> Result<f64> {
    nyquist_period(omega0)?;
    if !(amp_bound >= 0.0) {
        return Err(Error::invalid(format!(
            "amplitude bound must be non-negative, got {amp_bound}"
        )));
    }
    Ok(amp_bound * omega0)
}

/// The class of signals bounded by `c` with spectrum inside `[-Ω0, Ω0]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SignalClass {
    pub omega0: f64,
    #[serde(rename = "c")]
    pub amp_bound: f64,
}

impl SignalClass {
    pub fn new(omega0: f64, amp_bound: f64) -> Result<Self> {
        slope_bound(omega0, amp_bound)?;
        Ok(Self { omega0, amp_bound })
    }

    pub fn nyquist_period(&self) -> f64 {
        PI / self.omega0
    }

    pub fn slope_bound(&self) -> f64 {
        self.amp_bound * self.omega0
    }
}

/// Nyquist-spaced grid of sinc centers.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NyquistGrid {
    pub origin: f64,
    pub len: usize,
}

/// Grid covering `support` with one center per Nyquist period, centered on
/// the support, plus `guard` extra centers on each side.
///
/// For `[-0.45, 0.45]` at `Ω0 = 100π` this gives 90 inner centers at
/// `±0.005, ±0.015, …` and 100 centers in total.
pub fn nyquist_grid(omega0: f64, support: (f64, f64), guard: usize) -> Result<NyquistGrid> {
    let t = nyquist_period(omega0)?;
    let (ta, tb) = support;
    if !(ta < tb) {
        return Err(Error::invalid(format!("empty support [{ta}, {tb}]")));
    }
    let inner = (((tb - ta) / t) - 1e-9).ceil().max(1.0) as usize;
    let len = inner + 2 * guard;
    let center = 0.5 * (ta + tb);
    let origin = center - 0.5 * (len as f64 - 1.0) * t;
    Ok(NyquistGrid { origin, len })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SignalSpec {
    pub omega0: f64,
    #[serde(rename = "c")]
    pub amp_bound: f64,
    pub support: (f64, f64),
    pub seed: u64,
}

impl SignalSpec {
    pub fn new(omega0: f64, amp_bound: f64, support: (f64, f64), seed: u64) -> Result<Self> {
        let spec = Self {
            omega0,
            amp_bound,
            support,
            seed,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn class(&self) -> SignalClass {
        SignalClass {
            omega0: self.omega0,
            amp_bound: self.amp_bound,
        }
    }

    fn validate(&self) -> Result<()> {
        SignalClass::new(self.omega0, self.amp_bound)?;
        if !(self.amp_bound > 0.0) {
            return Err(Error::invalid("amplitude bound must be positive"));
        }
        let (ta, tb) = self.support;
        if !(ta < tb) {
            return Err(Error::invalid(format!("empty support [{ta}, {tb}]")));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BandlimitedSignal {
    omega0: f64,
    #[serde(rename = "c")]
    amp_bound: f64,
    grid_origin: f64,
    coeffs: Vec<f64>,
}

impl BandlimitedSignal {
    pub fn from_coefficients(
        omega0: f64,
        amp_bound: f64,
        grid_origin: f64,
        coeffs: Vec<f64>,
    ) -> Result<Self> {
        SignalClass::new(omega0, amp_bound)?;
        if !grid_origin.is_finite() || coeffs.iter().any(|a| !a.is_finite()) {
            return Err(Error::invalid("non-finite signal coefficients"));
        }
        Ok(Self {
            omega0,
            amp_bound,
            grid_origin,
            coeffs,
        })
    }

    /// Random member of the class: i.i.d. uniform coefficients on `[-1, 1]`
    /// over the guarded Nyquist grid, rescaled so the peak equals `c`.
    pub fn generate(spec: &SignalSpec) -> Result<Self> {
        spec.validate()?;
        let t = nyquist_period(spec.omega0)?;
        let (ta, tb) = spec.support;
        if tb - ta < t {
            return Err(Error::invalid(format!(
                "support length {} shorter than one Nyquist period {t}",
                tb - ta
            )));
        }
        let grid = nyquist_grid(spec.omega0, spec.support, GUARD_SAMPLES)?;
        let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
        let coeffs = (0..grid.len).map(|_| rng.gen_range(-1.0..=1.0)).collect();
        let mut signal = Self {
            omega0: spec.omega0,
            amp_bound: spec.amp_bound,
            grid_origin: grid.origin,
            coeffs,
        };
        let peak = signal.peak();
        if peak > 0.0 {
            let scale = spec.amp_bound / peak;
            signal.coeffs.iter_mut().for_each(|a| *a *= scale);
        }
        Ok(signal)
    }

    pub fn omega0(&self) -> f64 {
        self.omega0
    }

    pub fn amp_bound(&self) -> f64 {
        self.amp_bound
    }

    pub fn class(&self) -> SignalClass {
        SignalClass {
            omega0: self.omega0,
            amp_bound: self.amp_bound,
        }
    }

    pub fn grid_origin(&self) -> f64 {
        self.grid_origin
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn nyquist_period(&self) -> f64 {
        PI / self.omega0
    }

    /// Center of the `k`-th sinc term.
    pub fn center(&self, k: usize) -> f64 {
        self.grid_origin + k as f64 * self.nyquist_period()
    }

    /// Grid index nearest to `t` and the phase `Ω0 (t − τ_anchor)`.
    pub(crate) fn anchor(&self, t: f64) -> (usize, f64) {
        lattice_anchor(self.omega0, self.grid_origin, self.coeffs.len(), t)
    }

    pub fn evaluate(&self, t: f64) -> f64 {
        if self.coeffs.is_empty() {
            return 0.0;
        }
        let (anchor, xa) = self.anchor(t);
        let s = xa.sin();
        let mut sum = 0.0;
        for (k, a) in self.coeffs.iter().enumerate() {
            let m = k as i64 - anchor as i64;
            let term = if m == 0 {
                sinc_small(xa, s)
            } else {
                let x = xa - m as f64 * PI;
                let sx = if m % 2 == 0 { s } else { -s };
                sx / x
            };
            sum += a * term;
        }
        sum
    }

    /// Time derivative `f'(t)`.
    pub fn derivative(&self, t: f64) -> f64 {
        if self.coeffs.is_empty() {
            return 0.0;
        }
        let (anchor, xa) = self.anchor(t);
        let (s, c) = xa.sin_cos();
        let mut sum = 0.0;
        for (k, a) in self.coeffs.iter().enumerate() {
            let m = k as i64 - anchor as i64;
            let x = xa - m as f64 * PI;
            let (sx, cx) = if m % 2 == 0 { (s, c) } else { (-s, -c) };
            let d = if x.abs() < 1e-2 {
                let x2 = x * x;
                x * (-1.0 / 3.0 + x2 * (1.0 / 30.0 - x2 / 840.0))
            } else {
                (x * cx - sx) / (x * x)
            };
            sum += a * d;
        }
        sum * self.omega0
    }

    /// Fills `out[k] = Si(Ω0 (t − τ_k))`.
    pub(crate) fn si_row(&self, t: f64, out: &mut [f64]) {
        let (anchor, xa) = self.anchor(t);
        si_lattice(xa, anchor, out);
    }

    /// `∫_{t1}^{t2} f(t) dt` in closed form via the sine integral.
    pub fn integrate(&self, t1: f64, t2: f64) -> Result<f64> {
        if !(t1 <= t2) {
            return Err(Error::invalid(format!("integrate: t1 = {t1} > t2 = {t2}")));
        }
        if t1 == t2 || self.coeffs.is_empty() {
            return Ok(0.0);
        }
        let n = self.coeffs.len();
        let mut lo = vec![0.0; n];
        let mut hi = vec![0.0; n];
        self.si_row(t1, &mut lo);
        self.si_row(t2, &mut hi);
        Ok(weighted_difference(&self.coeffs, &hi, &lo) / self.omega0)
    }

    /// Running integral from a fixed start time; reuses the start-point
    /// sine integrals across many end points.
    pub fn integral_cursor(&self, start: f64) -> IntegralCursor<'_> {
        let n = self.coeffs.len();
        let mut base = vec![0.0; n];
        self.si_row(start, &mut base);
        IntegralCursor {
            signal: self,
            start,
            base,
            scratch: vec![0.0; n],
        }
    }

    /// `max |f(t)|`: scan at 32× Nyquist density, then refine each
    /// competitive local maximum by bisection on the derivative.
    pub fn peak(&self) -> f64 {
        if self.coeffs.is_empty() || self.coeffs.iter().all(|&a| a == 0.0) {
            return 0.0;
        }
        let t_nyq = self.nyquist_period();
        let h = t_nyq / PEAK_DENSITY as f64;
        let start = self.grid_origin - 10.0 * t_nyq;
        let steps = (self.coeffs.len() + 19) * PEAK_DENSITY;
        let values: Vec<f64> = (0..=steps)
            .map(|i| self.evaluate(start + i as f64 * h).abs())
            .collect();
        let grid_max = values.iter().cloned().fold(0.0, f64::max);

        let mut best = grid_max;
        for i in 1..steps {
            let v = values[i];
            if v < values[i - 1] || v < values[i + 1] || v < 0.9 * grid_max {
                continue;
            }
            let t = start + i as f64 * h;
            best = best.max(self.refine_extremum(t - h, t + h, t));
        }
        best
    }

    fn refine_extremum(&self, mut lo: f64, mut hi: f64, guess: f64) -> f64 {
        let sign = self.evaluate(guess).signum();
        let slope = |t: f64| sign * self.derivative(t);
        if !(slope(lo) >= 0.0 && slope(hi) <= 0.0) {
            return self.evaluate(guess).abs();
        }
        for _ in 0..60 {
            let mid = 0.5 * (lo + hi);
            if slope(mid) >= 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        self.evaluate(0.5 * (lo + hi)).abs()
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let raw: Self = serde_json::from_str(text)?;
        Self::from_coefficients(raw.omega0, raw.amp_bound, raw.grid_origin, raw.coeffs)
    }
}

pub struct IntegralCursor<'a> {
    signal: &'a BandlimitedSignal,
    start: f64,
    base: Vec<f64>,
    scratch: Vec<f64>,
}

impl IntegralCursor<'_> {
    pub fn start(&self) -> f64 {
        self.start
    }

    /// `∫_{start}^{t} f`, negative when `t < start`.
    pub fn integral_to(&mut self, t: f64) -> f64 {
        if t == self.start {
            return 0.0;
        }
        self.signal.si_row(t, &mut self.scratch);
        weighted_difference(&self.signal.coeffs, &self.scratch, &self.base) / self.signal.omega0
    }
}

pub(crate) fn lattice_anchor(omega0: f64, origin: f64, len: usize, t: f64) -> (usize, f64) {
    let t_nyq = PI / omega0;
    let pos = ((t - origin) / t_nyq).round();
    let anchor = pos.clamp(0.0, len.saturating_sub(1) as f64) as usize;
    let xa = omega0 * (t - (origin + anchor as f64 * t_nyq));
    (anchor, xa)
}

fn weighted_difference(w: &[f64], hi: &[f64], lo: &[f64]) -> f64 {
    w.iter()
        .zip(hi.iter().zip(lo.iter()))
        .map(|(a, (h, l))| a * (h - l))
        .sum()
}

/// `sin(x)/x` given `sin(x)`, stable near zero.
fn sinc_small(x: f64, sin_x: f64) -> f64 {
    if x.abs() < 1e-4 {
        1.0 - x * x / 6.0
    } else {
        sin_x / x
    }
}
