//! Scalar quantizers for firing intervals.
//!
//! Three codebook families share one representation: uniform cells over a
//! fixed range, Lloyd-Max codebooks trained on pooled intervals, and
//! power-law companders `x ↦ ((x − t_min)/(t_max − t_min))^p` followed by a
//! uniform quantizer in the mapped domain.
//!
//! Quantization is nearest-level. An input sitting exactly on a decision
//! boundary maps to the lower index. Inputs outside the codebook range are
//! clamped to the extreme cells and counted, never rejected.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::tem::{FiringRecord, Scheme};

pub const MAX_BITS: u8 = 16;

pub const DEFAULT_EXPONENTS: [f64; 6] = [0.25, 0.5, 1.0, 2.0, 3.0, 4.0];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CodebookKind {
    Uniform,
    LloydMax,
    Compander,
}

impl CodebookKind {
    pub fn name(self) -> &'static str {
        match self {
            CodebookKind::Uniform => "uniform",
            CodebookKind::LloydMax => "lloyd-max",
            CodebookKind::Compander => "compander",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Codebook {
    kind: CodebookKind,
    #[serde(rename = "R")]
    bits: u8,
    range: (f64, f64),
    levels: Vec<f64>,
    boundaries: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    p: Option<f64>,
}

impl Codebook {
    pub fn new(
        kind: CodebookKind,
        bits: u8,
        range: (f64, f64),
        levels: Vec<f64>,
        boundaries: Vec<f64>,
        p: Option<f64>,
    ) -> Result<Self> {
        let cb = Self {
            kind,
            bits,
            range,
            levels,
            boundaries,
            p,
        };
        cb.validate()?;
        Ok(cb)
    }

    fn validate(&self) -> Result<()> {
        check_bits(self.bits)?;
        let n = 1usize << self.bits;
        if self.levels.len() != n || self.boundaries.len() != n - 1 {
            return Err(Error::invalid(format!(
                "codebook with R = {} needs {} levels and {} boundaries, got {} and {}",
                self.bits,
                n,
                n - 1,
                self.levels.len(),
                self.boundaries.len()
            )));
        }
        if self
            .levels
            .iter()
            .chain(&self.boundaries)
            .any(|v| !v.is_finite())
        {
            return Err(Error::invalid("non-finite codebook entry"));
        }
        for i in 0..n - 1 {
            let b = self.boundaries[i];
            if !(self.levels[i] < b && b < self.levels[i + 1]) {
                return Err(Error::invalid(format!(
                    "boundary {i} = {b} does not separate levels {} and {}",
                    self.levels[i],
                    self.levels[i + 1]
                )));
            }
        }
        let (lo, hi) = self.range;
        if !(lo <= self.levels[0] && self.levels[n - 1] <= hi) {
            return Err(Error::invalid("codebook levels fall outside its range"));
        }
        if (self.kind == CodebookKind::Compander) != self.p.is_some() {
            return Err(Error::invalid(
                "compander exponent present iff kind is compander",
            ));
        }
        Ok(())
    }

    pub fn kind(&self) -> CodebookKind {
        self.kind
    }

    pub fn bits(&self) -> u8 {
        self.bits
    }

    pub fn range(&self) -> (f64, f64) {
        self.range
    }

    pub fn levels(&self) -> &[f64] {
        &self.levels
    }

    pub fn boundaries(&self) -> &[f64] {
        &self.boundaries
    }

    pub fn exponent(&self) -> Option<f64> {
        self.p
    }

    /// Index of the nearest level; boundary ties go to the lower index.
    pub fn index_of(&self, x: f64) -> usize {
        self.boundaries.partition_point(|&b| b < x)
    }

    /// The reproduction level for `x`.
    pub fn reproduce(&self, x: f64) -> f64 {
        self.levels[self.index_of(x)]
    }

    /// Widest cell, with the outer cells closed by the codebook range.
    pub fn max_cell_width(&self) -> f64 {
        let mut edges = Vec::with_capacity(self.boundaries.len() + 2);
        edges.push(self.range.0);
        edges.extend_from_slice(&self.boundaries);
        edges.push(self.range.1);
        edges.windows(2).map(|w| w[1] - w[0]).fold(0.0, f64::max)
    }

    /// Mean squared quantization error over `samples`.
    pub fn distortion(&self, samples: &[f64]) -> f64 {
        if samples.is_empty() {
            return 0.0;
        }
        let sse: f64 = samples
            .iter()
            .map(|&x| {
                let e = x - self.reproduce(x);
                e * e
            })
            .sum();
        sse / samples.len() as f64
    }

    /// JSON with sorted keys and shortest round-trip float formatting.
    pub fn to_canonical_json(&self) -> Result<String> {
        // serde_json's Map is a BTreeMap, so keys come out sorted.
        let value = serde_json::to_value(self)?;
        Ok(serde_json::to_string(&value)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let cb: Self = serde_json::from_str(text)?;
        cb.validate()?;
        Ok(cb)
    }
}

fn check_bits(bits: u8) -> Result<()> {
    if bits == 0 || bits > MAX_BITS {
        return Err(Error::invalid(format!(
            "bit budget must be in 1..={MAX_BITS}, got {bits}"
        )));
    }
    Ok(())
}

/// Pooled training intervals for one scheme.
#[derive(Debug, Clone, PartialEq)]
pub struct IntervalSamples {
    pub values: Vec<f64>,
    pub scheme: Scheme,
    pub ensemble_size: usize,
}

impl IntervalSamples {
    pub fn new(values: Vec<f64>, scheme: Scheme, ensemble_size: usize) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::invalid("no interval samples"));
        }
        if values.iter().any(|v| !(v.is_finite() && *v > 0.0)) {
            return Err(Error::invalid(
                "interval samples must be finite and positive",
            ));
        }
        Ok(Self {
            values,
            scheme,
            ensemble_size,
        })
    }

    /// Pools the steady-state intervals of an ensemble of records.
    pub fn from_records<'a>(records: impl IntoIterator<Item = &'a FiringRecord>) -> Result<Self> {
        let mut values = Vec::new();
        let mut scheme = None;
        let mut n = 0;
        for rec in records {
            if *scheme.get_or_insert(rec.scheme) != rec.scheme {
                return Err(Error::invalid("records from different schemes"));
            }
            values.extend_from_slice(rec.steady_intervals());
            n += 1;
        }
        let scheme = scheme.ok_or_else(|| Error::invalid("no records"))?;
        Self::new(values, scheme, n)
    }

    pub fn extent(&self) -> (f64, f64) {
        let lo = self.values.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = self
            .values
            .iter()
            .cloned()
            .fold(f64::NEG_INFINITY, f64::max);
        (lo, hi)
    }
}

/// Uniform quantizer: `2^R` equal cells, levels at cell midpoints.
pub fn uq_design(t_min: f64, t_max: f64, bits: u8) -> Result<Codebook> {
    check_bits(bits)?;
    if !(t_min < t_max) || !t_min.is_finite() || !t_max.is_finite() {
        return Err(Error::invalid(format!("invalid range [{t_min}, {t_max}]")));
    }
    let n = 1usize << bits;
    let w = (t_max - t_min) / n as f64;
    let levels = (0..n).map(|i| t_min + (i as f64 + 0.5) * w).collect();
    let boundaries = (1..n).map(|i| t_min + i as f64 * w).collect();
    Codebook::new(
        CodebookKind::Uniform,
        bits,
        (t_min, t_max),
        levels,
        boundaries,
        None,
    )
}

#[derive(Debug, Clone, Copy)]
pub struct LloydMaxOptions {
    /// Stop when the relative distortion decrease falls below this.
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for LloydMaxOptions {
    fn default() -> Self {
        Self {
            tol: 1e-9,
            max_iter: 500,
        }
    }
}

#[derive(Debug, Clone)]
pub struct LloydMaxDesign {
    pub codebook: Codebook,
    /// Empirical distortion of the initial levels and after each iteration.
    pub distortions: Vec<f64>,
}

pub fn lloyd_max_design(
    samples: &IntervalSamples,
    bits: u8,
    opts: LloydMaxOptions,
) -> Result<LloydMaxDesign> {
    check_bits(bits)?;
    let n = 1usize << bits;
    if samples.values.len() < n {
        return Err(Error::invalid(format!(
            "Lloyd-Max with R = {bits} needs at least {n} samples, got {}",
            samples.values.len()
        )));
    }
    let mut sorted = samples.values.clone();
    sorted.sort_by(f64::total_cmp);
    let count = sorted.len();

    let mut levels: Vec<f64> = (0..n)
        .map(|i| {
            let q = (2 * i + 1) as f64 / (2 * n) as f64;
            sorted[((q * count as f64) as usize).min(count - 1)]
        })
        .collect();
    let mut current = sorted_distortion(&sorted, &levels);
    let mut distortions = vec![current];

    for _ in 0..opts.max_iter {
        if current == 0.0 {
            break;
        }
        let cells = partition(&sorted, &levels);
        let mut next = levels.clone();
        let mut empty = Vec::new();
        for (i, cell) in cells.iter().enumerate() {
            let members = &sorted[cell.clone()];
            if members.is_empty() {
                empty.push(i);
            } else {
                next[i] = members.iter().sum::<f64>() / members.len() as f64;
            }
        }
        reseed_empty(&sorted, &cells, &mut next, &empty);
        next.sort_by(f64::total_cmp);

        let d = sorted_distortion(&sorted, &next);
        if d > current {
            // rounding-level increase at convergence
            break;
        }
        levels = next;
        let change = (current - d) / current;
        current = d;
        distortions.push(d);
        if change < opts.tol {
            break;
        }
    }

    make_strictly_increasing(&mut levels);
    let boundaries = midpoints(&levels);
    let range = (
        sorted[0].min(levels[0]),
        sorted[count - 1].max(levels[n - 1]),
    );
    let codebook = Codebook::new(
        CodebookKind::LloydMax,
        bits,
        range,
        levels,
        boundaries,
        None,
    )?;
    Ok(LloydMaxDesign {
        codebook,
        distortions,
    })
}

/// Splits the highest-distortion cells to give every empty cell a level.
fn reseed_empty(
    sorted: &[f64],
    cells: &[std::ops::Range<usize>],
    levels: &mut [f64],
    empty: &[usize],
) {
    if empty.is_empty() {
        return;
    }
    let mut sse: Vec<(f64, usize)> = cells
        .iter()
        .enumerate()
        .filter(|(_, c)| c.len() >= 2 && sorted[c.start] < sorted[c.end - 1])
        .map(|(i, c)| {
            let m = &sorted[c.clone()];
            let mean = m.iter().sum::<f64>() / m.len() as f64;
            (m.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>(), i)
        })
        .collect();
    sse.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)));
    for (&slot, &(_, donor)) in empty.iter().zip(sse.iter()) {
        let m = &sorted[cells[donor].clone()];
        let half = m.len() / 2;
        let mean = |s: &[f64]| s.iter().sum::<f64>() / s.len() as f64;
        levels[donor] = mean(&m[..half]);
        levels[slot] = mean(&m[half..]);
    }
}

/// Index ranges of `sorted` falling into each nearest-level cell.
fn partition(sorted: &[f64], levels: &[f64]) -> Vec<std::ops::Range<usize>> {
    let bounds = midpoints(levels);
    let mut cells = Vec::with_capacity(levels.len());
    let mut start = 0;
    for b in &bounds {
        let end = sorted.partition_point(|&x| x <= *b).max(start);
        cells.push(start..end);
        start = end;
    }
    cells.push(start..sorted.len());
    cells
}

fn sorted_distortion(sorted: &[f64], levels: &[f64]) -> f64 {
    let cells = partition(sorted, levels);
    let sse: f64 = cells
        .iter()
        .zip(levels)
        .map(|(c, l)| {
            sorted[c.clone()]
                .iter()
                .map(|x| (x - l) * (x - l))
                .sum::<f64>()
        })
        .sum();
    sse / sorted.len() as f64
}

fn midpoints(levels: &[f64]) -> Vec<f64> {
    levels.windows(2).map(|w| 0.5 * (w[0] + w[1])).collect()
}

fn make_strictly_increasing(levels: &mut [f64]) {
    for i in 1..levels.len() {
        if levels[i] <= levels[i - 1] {
            let step = levels[i - 1].abs().max(f64::MIN_POSITIVE) * 1e-9;
            levels[i] = levels[i - 1] + step;
        }
    }
}

/// Power-law compander codebook over `[t_min, t_max]` with exponent `p`.
pub fn compander_codebook(t_min: f64, t_max: f64, bits: u8, p: f64) -> Result<Codebook> {
    check_bits(bits)?;
    if !(p > 0.0) || !p.is_finite() {
        return Err(Error::invalid(format!(
            "compander exponent must be positive, got {p}"
        )));
    }
    if !(t_min <= t_max) || !t_min.is_finite() || !t_max.is_finite() {
        return Err(Error::invalid(format!("invalid range [{t_min}, {t_max}]")));
    }
    let degenerate = t_max == t_min;
    let t_max = if degenerate {
        t_min + t_min.abs().max(f64::MIN_POSITIVE) * 1e-6
    } else {
        t_max
    };
    let n = 1usize << bits;
    let span = t_max - t_min;
    let expand = |u: f64| t_min + span * u.powf(1.0 / p);
    let mut levels: Vec<f64> = (0..n)
        .map(|i| expand((i as f64 + 0.5) / n as f64))
        .collect();
    if degenerate {
        // all mass sits on t_min; reproduce it exactly
        levels[0] = t_min;
    }
    let boundaries = (1..n).map(|i| expand(i as f64 / n as f64)).collect();
    Codebook::new(
        CodebookKind::Compander,
        bits,
        (t_min, t_max),
        levels,
        boundaries,
        Some(p),
    )
}

/// Best power-law compander over `exponents` by empirical distortion on
/// the samples, with the range taken from the sample extremes. Ties keep
/// the earlier exponent.
pub fn compander_design(
    samples: &IntervalSamples,
    bits: u8,
    exponents: &[f64],
) -> Result<Codebook> {
    if exponents.is_empty() {
        return Err(Error::invalid("empty compander exponent grid"));
    }
    let (lo, hi) = samples.extent();
    let mut best: Option<(f64, Codebook)> = None;
    for &p in exponents {
        let cb = compander_codebook(lo, hi, bits, p)?;
        let d = cb.distortion(&samples.values);
        if best.as_ref().is_none_or(|(bd, _)| d < *bd) {
            best = Some((d, cb));
        }
    }
    Ok(best.expect("non-empty grid").1)
}

/// Quantizer indices plus the number of inputs clamped into the range.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Quantized {
    pub indices: Vec<u32>,
    pub clamped: usize,
}

pub fn quantize(intervals: &[f64], codebook: &Codebook) -> Quantized {
    let (lo, hi) = codebook.range;
    let mut clamped = 0;
    let indices = intervals
        .iter()
        .map(|&x| {
            if !(x >= lo && x <= hi) {
                clamped += 1;
            }
            codebook.index_of(x) as u32
        })
        .collect();
    Quantized { indices, clamped }
}

pub fn dequantize(indices: &[u32], codebook: &Codebook) -> Result<Vec<f64>> {
    indices
        .iter()
        .map(|&i| {
            codebook.levels.get(i as usize).copied().ok_or_else(|| {
                Error::invalid(format!(
                    "index {i} out of range for R = {} codebook",
                    codebook.bits
                ))
            })
        })
        .collect()
}

/// Outcome of choosing between the two trained non-uniform quantizers.
#[derive(Debug, Clone)]
pub struct NuqSelection {
    pub selected: Codebook,
    pub lloyd_max: Codebook,
    pub compander: Codebook,
    pub lloyd_max_nmse: f64,
    pub compander_nmse: f64,
}

impl NuqSelection {
    pub fn selected_nmse(&self) -> f64 {
        self.lloyd_max_nmse.min(self.compander_nmse)
    }
}

/// Trains a Lloyd-Max and a compander codebook on `training` and keeps the
/// one with the lower mean NMSE as scored by `evaluate` (typically the full
/// encode, quantize, replay and reconstruct pipeline over a validation
/// ensemble). Ties go to Lloyd-Max.
pub fn select_best_nuq(
    training: &IntervalSamples,
    bits: u8,
    mut evaluate: impl FnMut(&Codebook) -> Result<f64>,
) -> Result<NuqSelection> {
    let lloyd_max = lloyd_max_design(training, bits, LloydMaxOptions::default())?.codebook;
    let compander = compander_design(training, bits, &DEFAULT_EXPONENTS)?;
    let lloyd_max_nmse = evaluate(&lloyd_max)?;
    let compander_nmse = evaluate(&compander)?;
    let selected = if lloyd_max_nmse <= compander_nmse {
        lloyd_max.clone()
    } else {
        compander.clone()
    };
    Ok(NuqSelection {
        selected,
        lloyd_max,
        compander,
        lloyd_max_nmse,
        compander_nmse,
    })
}
