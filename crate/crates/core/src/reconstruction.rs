//! Least-squares recovery of a sinc series from interval integrals.
//!
//! Each measurement `y_n = ∫_{t_n}^{t_{n+1}} f` is linear in the sinc
//! coefficients, so recovery is a linear least-squares problem over a
//! Nyquist grid. The direct solver is a truncated-SVD pseudo-inverse; the
//! iterative solver is Landweber residual correction on the same operator.

use faer::{Col, Mat};
use serde::{Deserialize, Serialize};

use crate::codec::Measurements;
use crate::error::{Error, Result};
use crate::signal::{lattice_anchor, nyquist_grid, BandlimitedSignal, SignalClass, GUARD_SAMPLES};
use crate::special::si_lattice;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Solver {
    Direct,
    Iterative,
}

impl Solver {
    pub fn name(self) -> &'static str {
        match self {
            Solver::Direct => "direct",
            Solver::Iterative => "iterative",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReconConfig {
    pub class: SignalClass,
    pub grid_origin: f64,
    pub grid_len: usize,
    pub solver: Solver,
    /// Singular values below `svd_cutoff · σ_max` are dropped.
    pub svd_cutoff: f64,
    pub max_iterations: usize,
    /// Stop the iterative solver once `‖y − Ax‖ / ‖y‖` falls below this.
    pub residual_tol: f64,
    /// Seconds trimmed from each end of the support when scoring.
    pub eval_guard: f64,
}

impl ReconConfig {
    /// Basis centered on `support` with the same guard layout used when
    /// generating random signals.
    pub fn for_support(class: SignalClass, support: (f64, f64)) -> Result<Self> {
        let grid = nyquist_grid(class.omega0, support, GUARD_SAMPLES)?;
        Ok(Self {
            class,
            grid_origin: grid.origin,
            grid_len: grid.len,
            solver: Solver::Direct,
            svd_cutoff: 1e-10,
            max_iterations: 20_000,
            residual_tol: 1e-10,
            eval_guard: 0.05,
        })
    }

    pub fn validate(&self) -> Result<()> {
        SignalClass::new(self.class.omega0, self.class.amp_bound)?;
        if self.grid_len == 0 || !self.grid_origin.is_finite() {
            return Err(Error::invalid("reconstruction grid is empty"));
        }
        if !(self.svd_cutoff > 0.0 && self.svd_cutoff < 1.0) {
            return Err(Error::invalid(format!(
                "svd cutoff must lie in (0, 1), got {}",
                self.svd_cutoff
            )));
        }
        if !(self.eval_guard >= 0.0) {
            return Err(Error::invalid("evaluation guard must be non-negative"));
        }
        if !(self.residual_tol >= 0.0) {
            return Err(Error::invalid("residual tolerance must be non-negative"));
        }
        Ok(())
    }
}

/// `A[n][k] = ∫_{t_n}^{t_{n+1}} sinc_k`, computed as a difference of sine
/// integrals.
pub fn measurement_matrix(times: &[f64], config: &ReconConfig) -> Result<Mat<f64>> {
    config.validate()?;
    if let Some(w) = times.windows(2).find(|w| !(w[1] > w[0])) {
        return Err(Error::invalid(format!(
            "firing times must increase strictly, got {} then {}",
            w[0], w[1]
        )));
    }
    let omega0 = config.class.omega0;
    let n_basis = config.grid_len;
    let rows = times.len().saturating_sub(1);
    let mut a = Mat::zeros(rows, n_basis);
    let mut prev = vec![0.0; n_basis];
    let mut next = vec![0.0; n_basis];
    for (j, &t) in times.iter().enumerate() {
        let (anchor, xa) = lattice_anchor(omega0, config.grid_origin, n_basis, t);
        si_lattice(xa, anchor, &mut next);
        if j > 0 {
            for k in 0..n_basis {
                a[(j - 1, k)] = (next[k] - prev[k]) / omega0;
            }
        }
        std::mem::swap(&mut prev, &mut next);
    }
    Ok(a)
}

/// What a solve produced besides the signal.
#[derive(Debug, Clone, PartialEq)]
pub struct Reconstruction {
    pub signal: BandlimitedSignal,
    /// `‖y − A x‖₂`.
    pub residual: f64,
    pub solver: Solver,
    /// Landweber sweeps; 0 for the direct solver.
    pub iterations: usize,
    /// Residual norm after each sweep of the iterative solver.
    pub residual_history: Vec<f64>,
}

pub fn reconstruct(measurements: &Measurements, config: &ReconConfig) -> Result<Reconstruction> {
    if measurements.integrals.is_empty() {
        return Err(Error::invalid(
            "reconstruction needs at least one measurement",
        ));
    }
    if measurements.times.len() != measurements.integrals.len() + 1 {
        return Err(Error::invalid(format!(
            "{} firing times for {} integrals",
            measurements.times.len(),
            measurements.integrals.len()
        )));
    }
    let a = measurement_matrix(&measurements.times, config)?;
    let y = Col::from_fn(measurements.integrals.len(), |i| measurements.integrals[i]);
    let (x, iterations, history) = match config.solver {
        Solver::Direct => (solve_tsvd(&a, &y, config.svd_cutoff)?, 0, Vec::new()),
        Solver::Iterative => landweber(&a, &y, config)?,
    };
    let residual = (&y - &a * &x).norm_l2();
    let signal = BandlimitedSignal::from_coefficients(
        config.class.omega0,
        config.class.amp_bound,
        config.grid_origin,
        x.iter().copied().collect(),
    )?;
    Ok(Reconstruction {
        signal,
        residual,
        solver: config.solver,
        iterations,
        residual_history: history,
    })
}

fn solve_tsvd(a: &Mat<f64>, y: &Col<f64>, cutoff: f64) -> Result<Col<f64>> {
    let svd = a
        .thin_svd()
        .map_err(|e| Error::invalid(format!("svd did not converge: {e:?}")))?;
    let sv = svd.S().column_vector();
    let sigma_max = sv.iter().cloned().fold(0.0, f64::max);
    if !(sigma_max > 0.0) {
        return Err(Error::DegenerateSystem);
    }
    let threshold = cutoff * sigma_max;
    let mut x = Col::zeros(a.ncols());
    for (i, &s) in sv.iter().enumerate() {
        if s <= threshold {
            continue;
        }
        let coef = svd.U().col(i).transpose() * y / s;
        x += svd.V().col(i) * coef;
    }
    Ok(x)
}

/// Largest singular value of `a` by power iteration on `AᵀA`.
fn spectral_norm(a: &Mat<f64>) -> f64 {
    let n = a.ncols();
    let mut v = Col::from_fn(n, |_| 1.0 / (n as f64).sqrt());
    let mut lambda = 0.0;
    for _ in 0..500 {
        let w = a.transpose() * (a * &v);
        let norm = w.norm_l2();
        if norm == 0.0 {
            return 0.0;
        }
        v = w / norm;
        let converged = (norm - lambda).abs() <= 1e-12 * norm;
        lambda = norm;
        if converged {
            break;
        }
    }
    lambda.sqrt()
}

fn landweber(
    a: &Mat<f64>,
    y: &Col<f64>,
    config: &ReconConfig,
) -> Result<(Col<f64>, usize, Vec<f64>)> {
    let sigma = spectral_norm(a);
    if !(sigma > 0.0) {
        return Err(Error::DegenerateSystem);
    }
    // slightly under 1/σ² so an underestimated σ still keeps the sweep contractive
    let step = 1.0 / (1.05 * sigma * sigma);
    let y_norm = y.norm_l2();
    let mut x = Col::zeros(a.ncols());
    let mut r = y.clone();
    let mut history = Vec::new();
    let mut iterations = 0;
    while iterations < config.max_iterations {
        if y_norm == 0.0 || r.norm_l2() <= config.residual_tol * y_norm {
            break;
        }
        x += (a.transpose() * &r) * step;
        r = y - a * &x;
        history.push(r.norm_l2());
        iterations += 1;
    }
    Ok((x, iterations, history))
}

/// `10 log10(∫|f − f̂|² / ∫|f|²)` over `support` shrunk by `guard` at each
/// end, clamped below at −200 dB. Two zero signals score the floor.
///
/// Both integrals use 4-point Gauss-Legendre panels of width `T_Nyq/64`.
pub fn nmse(
    reference: &BandlimitedSignal,
    estimate: &BandlimitedSignal,
    support: (f64, f64),
    guard: f64,
) -> Result<f64> {
    let (a, b) = (support.0 + guard, support.1 - guard);
    if !(a < b) {
        return Err(Error::invalid(format!(
            "guard {guard} leaves nothing of support [{}, {}]",
            support.0, support.1
        )));
    }
    const NODES: [f64; 4] = [
        -0.861_136_311_594_052_6,
        -0.339_981_043_584_856_3,
        0.339_981_043_584_856_3,
        0.861_136_311_594_052_6,
    ];
    const WEIGHTS: [f64; 4] = [
        0.347_854_845_137_453_8,
        0.652_145_154_862_546_1,
        0.652_145_154_862_546_1,
        0.347_854_845_137_453_8,
    ];
    // on a shared grid the error is itself a sinc series, evaluated once per node
    let diff = same_grid(reference, estimate).then(|| {
        let coeffs = reference
            .coeffs()
            .iter()
            .zip(estimate.coeffs())
            .map(|(r, e)| r - e)
            .collect();
        BandlimitedSignal::from_coefficients(
            reference.omega0(),
            reference.amp_bound(),
            reference.grid_origin(),
            coeffs,
        )
    });
    let diff = diff.transpose()?;
    let h_target = reference.nyquist_period() / 64.0;
    let panels = ((b - a) / h_target).ceil().max(1.0) as usize;
    let h = (b - a) / panels as f64;
    let (mut err, mut energy) = (0.0, 0.0);
    for p in 0..panels {
        let mid = a + (p as f64 + 0.5) * h;
        for (x, w) in NODES.iter().zip(WEIGHTS) {
            let t = mid + 0.5 * h * x;
            let f = reference.evaluate(t);
            let d = match &diff {
                Some(d) => d.evaluate(t),
                None => f - estimate.evaluate(t),
            };
            err += w * d * d;
            energy += w * f * f;
        }
    }
    if energy == 0.0 && err == 0.0 {
        return Ok(NMSE_FLOOR_DB);
    }
    if !(energy > 0.0) {
        return Err(Error::invalid(
            "reference signal has zero energy on the scored region",
        ));
    }
    Ok(db(err / energy))
}

fn same_grid(a: &BandlimitedSignal, b: &BandlimitedSignal) -> bool {
    a.omega0() == b.omega0()
        && a.coeffs().len() == b.coeffs().len()
        && (a.grid_origin() - b.grid_origin()).abs() <= 1e-12 * a.nyquist_period()
}

pub const NMSE_FLOOR_DB: f64 = -200.0;

fn db(ratio: f64) -> f64 {
    if ratio <= 0.0 {
        return NMSE_FLOOR_DB;
    }
    (10.0 * ratio.log10()).max(NMSE_FLOOR_DB)
}

/// Summary exported next to a reconstructed signal.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReconMetrics {
    pub nmse_db: f64,
    pub n_firings: usize,
    pub residual: f64,
    pub solver: Solver,
    pub iterations: usize,
}

impl ReconMetrics {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}
