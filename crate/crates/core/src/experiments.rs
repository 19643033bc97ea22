//! End-to-end experiment harness: ensembles, the encode → quantize →
//! replay → reconstruct pipeline, and the CSV/JSON artifacts written by the
//! command-line tool.
//!
//! Evaluation signal `i` uses seed `base + i`; training signal `i` uses
//! `base + TRAIN_SEED_OFFSET + i`, so the two ensembles never share a seed
//! for sizes below the offset.

use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::codec::{decoder_replay, pack, unpack, Bitstream};
use crate::error::{Error, Result};
use crate::quantization::{
    dequantize, quantize, select_best_nuq, uq_design, Codebook, IntervalSamples, MAX_BITS,
};
use crate::reconstruction::{nmse, reconstruct, ReconConfig, ReconMetrics, Solver};
use crate::signal::{BandlimitedSignal, SignalClass, SignalSpec};
use crate::tem::{
    encode, ConstParams, EncodeOptions, FiringRecord, LbParams, Scheme, SchemeParams, StateMode,
    VbParams,
};

pub const TRAIN_SEED_OFFSET: u64 = 10_000;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SignalConfig {
    pub omega0: f64,
    pub c: f64,
    pub support: (f64, f64),
}

impl Default for SignalConfig {
    fn default() -> Self {
        Self {
            omega0: 100.0 * std::f64::consts::PI,
            c: 1.0,
            support: (-0.45, 0.45),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LbConfig {
    pub delta: f64,
    pub mu: f64,
}

impl Default for LbConfig {
    /// `lb_design(√2 − 1, 1)` at `Ω0 = 100π, c = 1`: `Δ = π/100`, `μ = π`.
    fn default() -> Self {
        Self {
            delta: std::f64::consts::PI / 100.0,
            mu: std::f64::consts::PI,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct VbConfig {
    pub delta_v: f64,
}

impl Default for VbConfig {
    fn default() -> Self {
        Self { delta_v: 0.0157 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ConvConfig {
    pub delta_c: f64,
    pub b: f64,
}

impl Default for ConvConfig {
    fn default() -> Self {
        Self {
            delta_c: 0.005,
            b: 1.5,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub seed: u64,
    pub train_size: usize,
    pub eval_size: usize,
    pub signal: SignalConfig,
    pub lb: LbConfig,
    pub vb: VbConfig,
    pub conv: ConvConfig,
    pub schemes: Vec<Scheme>,
    pub bits: Vec<u8>,
    pub solver: Solver,
    pub eval_guard: f64,
    pub out_dir: PathBuf,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            train_size: 100,
            eval_size: 100,
            signal: SignalConfig::default(),
            lb: LbConfig::default(),
            vb: VbConfig::default(),
            conv: ConvConfig::default(),
            schemes: Scheme::ALL.to_vec(),
            bits: (1..=8).collect(),
            solver: Solver::Direct,
            eval_guard: 0.05,
            out_dir: PathBuf::from("out"),
        }
    }
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: Self = serde_json::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_json(&fs::read_to_string(path)?)
    }

    pub fn validate(&self) -> Result<()> {
        SignalSpec::new(
            self.signal.omega0,
            self.signal.c,
            self.signal.support,
            self.seed,
        )?;
        if self.eval_size == 0 || self.train_size == 0 {
            return Err(Error::invalid("ensemble sizes must be at least 1"));
        }
        if self.eval_size as u64 > TRAIN_SEED_OFFSET {
            return Err(Error::invalid(format!(
                "eval ensemble larger than {TRAIN_SEED_OFFSET} would overlap the training seeds"
            )));
        }
        if self
            .seed
            .checked_add(TRAIN_SEED_OFFSET + self.train_size as u64)
            .is_none()
        {
            return Err(Error::invalid("seed too large for the training ensemble"));
        }
        if self.schemes.is_empty() {
            return Err(Error::invalid("no schemes selected"));
        }
        if let Some(b) = self.bits.iter().find(|&&b| b == 0 || b > MAX_BITS) {
            return Err(Error::invalid(format!(
                "bit budget {b} outside 1..={MAX_BITS}"
            )));
        }
        if !(self.eval_guard >= 0.0) {
            return Err(Error::invalid("evaluation guard must be non-negative"));
        }
        for s in &self.schemes {
            self.params(*s)?;
        }
        self.recon()?.validate()
    }

    pub fn class(&self) -> SignalClass {
        SignalClass {
            omega0: self.signal.omega0,
            amp_bound: self.signal.c,
        }
    }

    pub fn params(&self, scheme: Scheme) -> Result<SchemeParams> {
        let class = SignalClass::new(self.signal.omega0, self.signal.c)?;
        Ok(match scheme {
            Scheme::Lb => {
                SchemeParams::Lb(LbParams::from_threshold(self.lb.delta, self.lb.mu, class)?)
            }
            Scheme::Vb => SchemeParams::Vb(VbParams::new(self.vb.delta_v, class)?),
            Scheme::Conv => {
                SchemeParams::Conv(ConstParams::new(self.conv.delta_c, self.conv.b, class)?)
            }
        })
    }

    pub fn recon(&self) -> Result<ReconConfig> {
        let mut cfg = ReconConfig::for_support(self.class(), self.signal.support)?;
        cfg.solver = self.solver;
        cfg.eval_guard = self.eval_guard;
        Ok(cfg)
    }

    fn spec(&self, seed: u64) -> Result<SignalSpec> {
        SignalSpec::new(self.signal.omega0, self.signal.c, self.signal.support, seed)
    }

    pub fn eval_seeds(&self) -> Vec<u64> {
        (0..self.eval_size as u64).map(|i| self.seed + i).collect()
    }

    pub fn train_seeds(&self) -> Vec<u64> {
        (0..self.train_size as u64)
            .map(|i| self.seed + TRAIN_SEED_OFFSET + i)
            .collect()
    }

    /// SHA-256 of the canonical (sorted-key) JSON form.
    /// SHA-256 of the canonical config JSON. The output directory is left
    /// out so reruns into different directories stay byte-identical.
    pub fn hash(&self) -> Result<String> {
        let mut value = serde_json::to_value(self)?;
        if let Some(map) = value.as_object_mut() {
            map.remove("out_dir");
        }
        let canonical = serde_json::to_string(&value)?;
        Ok(hex(&Sha256::digest(canonical.as_bytes())))
    }

    /// Nyquist samples needed to cover the support.
    pub fn nyquist_count(&self) -> f64 {
        let (a, b) = self.signal.support;
        ((b - a) / self.class().nyquist_period()).round()
    }
}

fn hex(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}

/// Signals of one ensemble with their seeds.
#[derive(Debug, Clone)]
pub struct Ensemble {
    pub seeds: Vec<u64>,
    pub signals: Vec<BandlimitedSignal>,
}

impl Ensemble {
    pub fn generate(cfg: &ExperimentConfig, seeds: Vec<u64>) -> Result<Self> {
        let signals = seeds
            .par_iter()
            .map(|&s| BandlimitedSignal::generate(&cfg.spec(s)?))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { seeds, signals })
    }

    pub fn len(&self) -> usize {
        self.signals.len()
    }

    pub fn is_empty(&self) -> bool {
        self.signals.is_empty()
    }

    /// Open-loop encodings over the support.
    pub fn encode(
        &self,
        cfg: &ExperimentConfig,
        params: &SchemeParams,
    ) -> Result<Vec<FiringRecord>> {
        let (a, b) = cfg.signal.support;
        self.signals
            .par_iter()
            .map(|s| encode(s, params, a, b, &EncodeOptions::default()))
            .collect()
    }
}

/// Result of one signal through the decoder side of the pipeline.
#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub nmse_db: f64,
    pub n_firings: usize,
    pub clamped: usize,
    pub residual: f64,
    pub iterations: usize,
}

/// Quantizes (unless `codebook` is `None`), replays and reconstructs one
/// encoding, then scores it against the source signal.
pub fn run_decoder(
    signal: &BandlimitedSignal,
    record: &FiringRecord,
    params: &SchemeParams,
    codebook: Option<&Codebook>,
    recon: &ReconConfig,
    support: (f64, f64),
) -> Result<Outcome> {
    let (intervals, clamped) = match codebook {
        None => (record.intervals.clone(), 0),
        Some(cb) => {
            let q = quantize(&record.intervals, cb);
            (dequantize(&q.indices, cb)?, q.clamped)
        }
    };
    let m = decoder_replay(record.t_first, &intervals, params, &StateMode::OpenLoop)?;
    let r = reconstruct(&m, recon)?;
    Ok(Outcome {
        nmse_db: nmse(signal, &r.signal, support, recon.eval_guard)?,
        n_firings: record.n_firings(),
        clamped,
        residual: r.residual,
        iterations: r.iterations,
    })
}

/// Decoder outcomes for a whole ensemble, in ensemble order.
pub fn score_ensemble(
    ensemble: &Ensemble,
    records: &[FiringRecord],
    params: &SchemeParams,
    codebook: Option<&Codebook>,
    cfg: &ExperimentConfig,
) -> Result<Vec<Outcome>> {
    let recon = cfg.recon()?;
    ensemble
        .signals
        .par_iter()
        .zip(records.par_iter())
        .map(|(s, r)| run_decoder(s, r, params, codebook, &recon, cfg.signal.support))
        .collect()
}

pub fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Sample standard deviation (0 for fewer than two values).
pub fn std_dev(xs: &[f64]) -> f64 {
    if xs.len() < 2 {
        return 0.0;
    }
    let m = mean(xs);
    (xs.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (xs.len() - 1) as f64).sqrt()
}

#[derive(Debug, Clone, PartialEq)]
pub struct BoundsRow {
    pub scheme: Scheme,
    pub t_min: f64,
    pub t_max: f64,
    pub empirical_min: f64,
    pub empirical_max: f64,
    /// Every steady interval lies in `[t_min − 1e-9, t_max + 1e-9]`.
    pub contained: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CountsRow {
    pub scheme: Scheme,
    pub mean_firings: f64,
    pub std_firings: f64,
    pub nyquist_count: f64,
    pub oversampling: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DensityRow {
    pub scheme: Scheme,
    pub seed: u64,
    pub min_rate: f64,
    pub max_rate: f64,
    pub spread: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum QuantizerKind {
    None,
    Uq,
    Nuq,
}

impl QuantizerKind {
    pub fn name(self) -> &'static str {
        match self {
            QuantizerKind::None => "none",
            QuantizerKind::Uq => "uq",
            QuantizerKind::Nuq => "nuq",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RdRow {
    pub scheme: Scheme,
    pub quantizer: QuantizerKind,
    /// Codebook family actually used (`-` for the unquantized row).
    pub codebook: String,
    /// `None` for the unquantized reference.
    pub bits: Option<u8>,
    pub mean_nmse_db: f64,
    pub std_nmse_db: f64,
    pub mean_firings: f64,
    pub clamped: usize,
    /// Per-signal NMSE in ensemble order.
    pub per_signal: Vec<f64>,
}

/// Encodings of the evaluation ensemble, shared by the commands.
pub struct Workspace {
    pub cfg: ExperimentConfig,
    pub eval: Ensemble,
    pub records: Vec<(SchemeParams, Vec<FiringRecord>)>,
}

impl Workspace {
    pub fn new(cfg: &ExperimentConfig) -> Result<Self> {
        cfg.validate()?;
        let eval = Ensemble::generate(cfg, cfg.eval_seeds())?;
        let records = cfg
            .schemes
            .iter()
            .map(|&s| {
                let p = cfg.params(s)?;
                Ok((p, eval.encode(cfg, &p)?))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            cfg: cfg.clone(),
            eval,
            records,
        })
    }

    pub fn bounds(&self) -> Vec<BoundsRow> {
        self.records
            .iter()
            .map(|(p, recs)| {
                let b = p.interval_bounds();
                let steady = recs.iter().flat_map(|r| r.steady_intervals());
                let (lo, hi) = steady.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &t| {
                    (lo.min(t), hi.max(t))
                });
                let contained = recs
                    .iter()
                    .flat_map(|r| r.steady_intervals())
                    .all(|&t| b.contains(t, 1e-9));
                BoundsRow {
                    scheme: p.scheme(),
                    t_min: b.t_min,
                    t_max: b.t_max,
                    empirical_min: lo,
                    empirical_max: hi,
                    contained,
                }
            })
            .collect()
    }

    pub fn counts(&self) -> Vec<CountsRow> {
        let nyq = self.cfg.nyquist_count();
        self.records
            .iter()
            .map(|(p, recs)| {
                let counts: Vec<f64> = recs.iter().map(|r| r.n_firings() as f64).collect();
                let m = mean(&counts);
                CountsRow {
                    scheme: p.scheme(),
                    mean_firings: m,
                    std_firings: std_dev(&counts),
                    nyquist_count: nyq,
                    oversampling: m / nyq,
                }
            })
            .collect()
    }

    pub fn density(&self) -> Result<Vec<DensityRow>> {
        let mut rows = Vec::new();
        for (p, recs) in &self.records {
            for (seed, r) in self.eval.seeds.iter().zip(recs) {
                let d = r.firing_density()?;
                rows.push(DensityRow {
                    scheme: p.scheme(),
                    seed: *seed,
                    min_rate: d.min,
                    max_rate: d.max,
                    spread: d.spread,
                });
            }
        }
        Ok(rows)
    }

    /// Rate-distortion table: an unquantized row per scheme, then UQ over
    /// the analytic interval range and the better of the two trained NUQ
    /// codebooks at every bit budget.
    pub fn rate_distortion(&self) -> Result<Vec<RdRow>> {
        let cfg = &self.cfg;
        let train = Ensemble::generate(cfg, cfg.train_seeds())?;
        let mut rows = Vec::new();
        for (p, recs) in &self.records {
            let training = IntervalSamples::from_records(&train.encode(cfg, p)?)?;
            let score = |cb: Option<&Codebook>| score_ensemble(&self.eval, recs, p, cb, cfg);
            let mean_firings = mean(
                &recs
                    .iter()
                    .map(|r| r.n_firings() as f64)
                    .collect::<Vec<_>>(),
            );
            let row = |quantizer, codebook: &str, bits, outcomes: &[Outcome]| {
                let per_signal: Vec<f64> = outcomes.iter().map(|o| o.nmse_db).collect();
                RdRow {
                    scheme: p.scheme(),
                    quantizer,
                    codebook: codebook.to_string(),
                    bits,
                    mean_nmse_db: mean(&per_signal),
                    std_nmse_db: std_dev(&per_signal),
                    mean_firings,
                    clamped: outcomes.iter().map(|o| o.clamped).sum(),
                    per_signal,
                }
            };
            rows.push(row(QuantizerKind::None, "-", None, &score(None)?));
            let bounds = p.interval_bounds();
            for &bits in &cfg.bits {
                let uq = uq_design(bounds.t_min, bounds.t_max, bits)?;
                rows.push(row(
                    QuantizerKind::Uq,
                    uq.kind().name(),
                    Some(bits),
                    &score(Some(&uq))?,
                ));

                let mut scored: Vec<(Codebook, Vec<Outcome>)> = Vec::new();
                let sel = select_best_nuq(&training, bits, |cb| {
                    let out = score(Some(cb))?;
                    let m = mean(&out.iter().map(|o| o.nmse_db).collect::<Vec<_>>());
                    scored.push((cb.clone(), out));
                    Ok(m)
                })?;
                let (cb, out) = scored
                    .into_iter()
                    .find(|(cb, _)| *cb == sel.selected)
                    .expect("selected codebook was scored");
                rows.push(row(QuantizerKind::Nuq, cb.kind().name(), Some(bits), &out));
            }
        }
        Ok(rows)
    }
}

/// Result of a single-signal round trip through the bitstream.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RoundtripReport {
    pub scheme: Scheme,
    pub bits: u8,
    pub codebook: String,
    pub n_firings: usize,
    pub clamped: usize,
    pub stream_bytes: usize,
    /// `None` when the source signal has no energy on the scored region.
    pub nmse_db: Option<f64>,
    pub unquantized_nmse_db: Option<f64>,
    /// RMS of the reconstruction error over the scored region.
    pub error_rms: f64,
    pub metrics: ReconMetrics,
}

/// Encodes `signal`, packs it at `bits` with a NUQ codebook trained on the
/// training ensemble, decodes the bytes and reconstructs.
///
/// Returns the stream bytes, the reconstruction and the report.
pub fn roundtrip(
    cfg: &ExperimentConfig,
    signal: &BandlimitedSignal,
    scheme: Scheme,
    bits: u8,
) -> Result<(Vec<u8>, BandlimitedSignal, RoundtripReport)> {
    cfg.validate()?;
    if signal.omega0() != cfg.signal.omega0 {
        return Err(Error::invalid(format!(
            "signal bandwidth {} differs from the configured {}",
            signal.omega0(),
            cfg.signal.omega0
        )));
    }
    let params = cfg.params(scheme)?;
    let (a, b) = cfg.signal.support;
    let record = encode(signal, &params, a, b, &EncodeOptions::default())?;

    let train = Ensemble::generate(cfg, cfg.train_seeds())?;
    let train_records = train.encode(cfg, &params)?;
    let samples = IntervalSamples::from_records(&train_records)?;
    let sel = select_best_nuq(&samples, bits, |cb| {
        let out = score_ensemble(&train, &train_records, &params, Some(cb), cfg)?;
        Ok(mean(&out.iter().map(|o| o.nmse_db).collect::<Vec<_>>()))
    })?;

    let (stream, clamped) = pack(&record, &sel.selected, &params);
    let bytes = stream.to_bytes()?;
    let decoded: Bitstream = unpack(&bytes)?;
    let intervals = decoded.intervals()?;
    let m = decoder_replay(
        decoded.t_first,
        &intervals,
        &decoded.params,
        &StateMode::OpenLoop,
    )?;
    let recon = cfg.recon()?;
    let r = reconstruct(&m, &recon)?;

    let score =
        |est: &BandlimitedSignal| nmse(signal, est, cfg.signal.support, recon.eval_guard).ok();
    let nmse_db = score(&r.signal);
    let unquantized = run_decoder(signal, &record, &params, None, &recon, cfg.signal.support)
        .map(|o| o.nmse_db)
        .ok();
    let report = RoundtripReport {
        scheme,
        bits,
        codebook: sel.selected.kind().name().to_string(),
        n_firings: record.n_firings(),
        clamped,
        stream_bytes: bytes.len(),
        nmse_db,
        unquantized_nmse_db: unquantized,
        error_rms: error_rms(signal, &r.signal, cfg.signal.support, recon.eval_guard),
        metrics: ReconMetrics {
            nmse_db: nmse_db.unwrap_or(f64::NAN),
            n_firings: record.n_firings(),
            residual: r.residual,
            solver: r.solver,
            iterations: r.iterations,
        },
    };
    Ok((bytes, r.signal, report))
}

fn error_rms(a: &BandlimitedSignal, b: &BandlimitedSignal, support: (f64, f64), guard: f64) -> f64 {
    let (lo, hi) = (support.0 + guard, support.1 - guard);
    let n = ((hi - lo) / (a.nyquist_period() / 16.0)).ceil().max(1.0) as usize;
    let sum: f64 = (0..n)
        .map(|i| {
            let t = lo + (i as f64 + 0.5) * (hi - lo) / n as f64;
            let d = a.evaluate(t) - b.evaluate(t);
            d * d
        })
        .sum();
    (sum / n as f64).sqrt()
}

/// CSV text preceded by a `#` line recording the config hash and seed.
pub fn csv_with_provenance(
    cfg: &ExperimentConfig,
    header: &[&str],
    rows: &[Vec<String>],
) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header).map_err(csv_err)?;
    for r in rows {
        w.write_record(r).map_err(csv_err)?;
    }
    let body = w.into_inner().map_err(|e| Error::invalid(e.to_string()))?;
    let body = String::from_utf8(body).expect("csv output is UTF-8");
    Ok(format!(
        "# config_sha256={} seed={}\n{body}",
        cfg.hash()?,
        cfg.seed
    ))
}

fn csv_err(e: csv::Error) -> Error {
    Error::invalid(format!("csv: {e}"))
}

fn ms(t: f64) -> String {
    format!("{:.6}", t * 1e3)
}

fn num(x: f64) -> String {
    format!("{x:.6}")
}

pub fn bounds_csv(cfg: &ExperimentConfig, rows: &[BoundsRow]) -> Result<String> {
    let body: Vec<Vec<String>> = rows
        .iter()
        .map(|r| {
            vec![
                r.scheme.name().to_string(),
                ms(r.t_min),
                ms(r.t_max),
                ms(r.t_max - r.t_min),
                ms(r.empirical_min),
                ms(r.empirical_max),
                r.contained.to_string(),
            ]
        })
        .collect();
    csv_with_provenance(
        cfg,
        &[
            "scheme",
            "t_min_ms",
            "t_max_ms",
            "t_range_ms",
            "empirical_min_ms",
            "empirical_max_ms",
            "contained",
        ],
        &body,
    )
}

pub fn counts_csv(cfg: &ExperimentConfig, rows: &[CountsRow]) -> Result<String> {
    let body: Vec<Vec<String>> = rows
        .iter()
        .map(|r| {
            vec![
                r.scheme.name().to_string(),
                num(r.mean_firings),
                num(r.std_firings),
                num(r.nyquist_count),
                num(r.oversampling),
            ]
        })
        .collect();
    csv_with_provenance(
        cfg,
        &[
            "scheme",
            "mean_firings",
            "std_firings",
            "nyquist_count",
            "oversampling",
        ],
        &body,
    )
}

/// Per-signal spreads, followed by one `mean` row per scheme.
pub fn density_csv(cfg: &ExperimentConfig, rows: &[DensityRow]) -> Result<String> {
    let mut body: Vec<Vec<String>> = rows
        .iter()
        .map(|r| {
            vec![
                r.scheme.name().to_string(),
                r.seed.to_string(),
                num(r.min_rate),
                num(r.max_rate),
                num(r.spread),
            ]
        })
        .collect();
    for s in Scheme::ALL {
        let of: Vec<&DensityRow> = rows.iter().filter(|r| r.scheme == s).collect();
        if of.is_empty() {
            continue;
        }
        let m = |f: fn(&DensityRow) -> f64| mean(&of.iter().map(|r| f(r)).collect::<Vec<_>>());
        body.push(vec![
            s.name().to_string(),
            "mean".to_string(),
            num(m(|r| r.min_rate)),
            num(m(|r| r.max_rate)),
            num(m(|r| r.spread)),
        ]);
    }
    csv_with_provenance(
        cfg,
        &["scheme", "seed", "min_rate_hz", "max_rate_hz", "spread_hz"],
        &body,
    )
}

pub fn rd_csv(cfg: &ExperimentConfig, rows: &[RdRow]) -> Result<String> {
    let body: Vec<Vec<String>> = rows
        .iter()
        .map(|r| {
            vec![
                r.scheme.name().to_string(),
                r.quantizer.name().to_string(),
                r.codebook.clone(),
                r.bits.map_or("inf".to_string(), |b| b.to_string()),
                num(r.mean_nmse_db),
                num(r.std_nmse_db),
                num(r.mean_firings),
                r.clamped.to_string(),
            ]
        })
        .collect();
    csv_with_provenance(
        cfg,
        &[
            "scheme",
            "quantizer",
            "codebook",
            "R",
            "mean_nmse_db",
            "std_nmse_db",
            "mean_firings",
            "clamped",
        ],
        &body,
    )
}

/// Writes `text` to `dir/name`, creating `dir` if needed.
pub fn write_artifact(dir: &Path, name: &str, bytes: &[u8]) -> Result<PathBuf> {
    fs::create_dir_all(dir)?;
    let path = dir.join(name);
    fs::write(&path, bytes)?;
    Ok(path)
}
