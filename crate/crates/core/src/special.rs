//! Sine integral `Si(x) = ∫_0^x sin(t)/t dt`.
//!
//! Small arguments use the Maclaurin series. Beyond that the auxiliary
//! functions `f(x)`, `g(x)` are used, with
//!
//! ```text
//! Si(x) = π/2 − f(x) cos x − g(x) sin x      (x > 0)
//! ```
//!
//! `f` and `g` come from the continued fraction of `e^{ix} E1(ix)` for
//! moderate arguments and from their asymptotic series for large ones.
//! Splitting out the auxiliary pair lets callers evaluate `Si` on a
//! π-spaced lattice with a single `sin`/`cos` call (see [`si_lattice`]).

use num_complex::Complex64;
use std::f64::consts::{FRAC_PI_2, PI};

const SERIES_LIMIT: f64 = 4.0;
const ASYMPTOTIC_LIMIT: f64 = 40.0;
const CF_MAX_ITER: usize = 200;

/// Sine integral, absolute accuracy ~1e-15 over the whole real line.
pub fn si(x: f64) -> f64 {
    let ax = x.abs();
    if ax <= SERIES_LIMIT {
        return si_series(x);
    }
    let (f, g) = si_aux(ax);
    let v = FRAC_PI_2 - f * ax.cos() - g * ax.sin();
    v.copysign(x)
}

fn si_series(x: f64) -> f64 {
    let x2 = x * x;
    let mut term = x;
    let mut sum = x;
    let mut k = 1.0;
    loop {
        term *= -x2 / ((2.0 * k) * (2.0 * k + 1.0));
        let contrib = term / (2.0 * k + 1.0);
        sum += contrib;
        if contrib.abs() <= 1e-18 * sum.abs().max(1e-300) {
            break;
        }
        k += 1.0;
        if k > 60.0 {
            break;
        }
    }
    sum
}

/// Auxiliary functions `(f(x), g(x))` for `x > 0`.
///
/// Only meaningful away from the origin; callers use the series below
/// `SERIES_LIMIT`.
pub fn si_aux(x: f64) -> (f64, f64) {
    debug_assert!(x > 0.0);
    if x >= ASYMPTOTIC_LIMIT {
        aux_asymptotic(x)
    } else {
        aux_continued_fraction(x)
    }
}

fn aux_asymptotic(x: f64) -> (f64, f64) {
    let inv2 = 1.0 / (x * x);
    // f ~ 1/x Σ (-1)^k (2k)!/x^{2k},  g ~ 1/x² Σ (-1)^k (2k+1)!/x^{2k}
    let mut f_sum = 1.0;
    let mut g_sum = 1.0;
    let mut f_term = 1.0_f64;
    let mut g_term = 1.0_f64;
    for k in 1..40 {
        let kf = k as f64;
        let next_f = -f_term * (2.0 * kf - 1.0) * (2.0 * kf) * inv2;
        let next_g = -g_term * (2.0 * kf) * (2.0 * kf + 1.0) * inv2;
        if next_f.abs() >= f_term.abs() || next_g.abs() >= g_term.abs() {
            break;
        }
        f_term = next_f;
        g_term = next_g;
        f_sum += f_term;
        g_sum += g_term;
        if f_term.abs() < 1e-18 && g_term.abs() < 1e-18 {
            break;
        }
    }
    (f_sum / x, g_sum * inv2)
}

fn aux_continued_fraction(x: f64) -> (f64, f64) {
    // Modified Lentz on e^{z} E1(z), z = ix.
    let tiny = 1e-300;
    let mut b = Complex64::new(1.0, x);
    let mut c = Complex64::new(1.0 / tiny, 0.0);
    let mut d = Complex64::new(1.0, 0.0) / b;
    let mut h = d;
    for i in 2..CF_MAX_ITER {
        let a = -(((i - 1) * (i - 1)) as f64);
        b += 2.0;
        d = Complex64::new(1.0, 0.0) / (d * a + b);
        c = b + Complex64::new(a, 0.0) / c;
        let del = c * d;
        h *= del;
        if (del.re - 1.0).abs() + del.im.abs() < 1e-16 {
            break;
        }
    }
    (-h.im, h.re)
}

/// Fills `out[k] = Si(x_anchor − (k − anchor)π)` for `k = 0..out.len()`.
///
/// Pick `anchor` as the lattice point nearest the evaluation time so that
/// `x_anchor` is small; every other argument is then an exact π-shift of it
/// and shares its `sin`/`cos`.
pub fn si_lattice(x_anchor: f64, anchor: usize, out: &mut [f64]) {
    let (s0, c0) = x_anchor.sin_cos();
    for (k, slot) in out.iter_mut().enumerate() {
        let shift = k as f64 - anchor as f64;
        let x = x_anchor - shift * PI;
        let ax = x.abs();
        if ax <= SERIES_LIMIT {
            *slot = si_series(x);
            continue;
        }
        // sin/cos of x from the anchor: a shift of mπ flips sign when m is odd.
        let parity = if (k as i64 - anchor as i64).rem_euclid(2) == 0 {
            1.0
        } else {
            -1.0
        };
        let (sx, cx) = (parity * s0, parity * c0);
        let (f, g) = si_aux(ax);
        // cos|x| = cos x, sin|x| = sign(x) sin x
        let v = FRAC_PI_2 - f * cx - g * sx * x.signum();
        *slot = v.copysign(x);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    // Composite Gauss-Legendre oracle for ∫_0^x sin(t)/t dt.
    fn si_quadrature(x: f64) -> f64 {
        const NODES: [f64; 5] = [
            0.0,
            -0.538_469_310_105_683_1,
            0.538_469_310_105_683_1,
            -0.906_179_845_938_664,
            0.906_179_845_938_664,
        ];
        const WEIGHTS: [f64; 5] = [
            0.568_888_888_888_888_9,
            0.478_628_670_499_366_5,
            0.478_628_670_499_366_5,
            0.236_926_885_056_189_1,
            0.236_926_885_056_189_1,
        ];
        let panels = ((x.abs() * 20.0).ceil() as usize).max(8);
        let h = x / panels as f64;
        let mut sum = 0.0;
        for p in 0..panels {
            let mid = (p as f64 + 0.5) * h;
            for (n, w) in NODES.iter().zip(WEIGHTS.iter()) {
                let t = mid + 0.5 * h * n;
                let s = if t == 0.0 { 1.0 } else { t.sin() / t };
                sum += w * s * 0.5 * h;
            }
        }
        sum
    }

    #[test]
    fn reference_values() {
        assert!((si(1.0) - 0.946_083_070_367_183).abs() < 1e-15);
        assert!((si(PI) - 1.851_937_051_982_466_2).abs() < 1e-15);
        assert_eq!(si(0.0), 0.0);
        assert!((si(1e6) - FRAC_PI_2).abs() < 2e-6);
    }

    #[test]
    fn odd_symmetry() {
        for &x in &[0.3, 3.9, 4.1, 17.0, 39.9, 40.1, 250.0] {
            assert_eq!(si(-x), -si(x));
        }
    }

    #[test]
    fn matches_quadrature_across_regimes() {
        let mut x = 0.01;
        while x < 120.0 {
            let err = (si(x) - si_quadrature(x)).abs();
            assert!(err < 1e-13, "x = {x}: err {err}");
            x *= 1.37;
        }
    }

    #[test]
    fn continuous_at_regime_switches() {
        for &edge in &[SERIES_LIMIT, ASYMPTOTIC_LIMIT] {
            let (f, g) = aux_continued_fraction(edge);
            let via_aux = FRAC_PI_2 - f * edge.cos() - g * edge.sin();
            let direct = if edge <= SERIES_LIMIT {
                si_series(edge)
            } else {
                si(edge)
            };
            assert!(
                (via_aux - direct).abs() < 1e-14,
                "edge {edge}: {via_aux} vs {direct}"
            );
        }
        let (f1, g1) = aux_continued_fraction(ASYMPTOTIC_LIMIT + 1.0);
        let (f2, g2) = aux_asymptotic(ASYMPTOTIC_LIMIT + 1.0);
        assert!((f1 - f2).abs() < 1e-16 && (g1 - g2).abs() < 1e-16);
        assert!((f1 - 0.024_361_428_744_263_635).abs() < 1e-16);
        assert!((g1 - 0.000_592_785_332_623_062_7).abs() < 1e-17);
    }

    #[test]
    fn lattice_matches_scalar() {
        let mut out = vec![0.0; 120];
        for &xa in &[0.0, 0.7, -1.4, 1.57] {
            for &anchor in &[0usize, 13, 60, 119] {
                si_lattice(xa, anchor, &mut out);
                for (k, v) in out.iter().enumerate() {
                    let x = xa - (k as f64 - anchor as f64) * PI;
                    assert!((v - si(x)).abs() < 1e-14, "k={k} anchor={anchor} x={x}");
                }
            }
        }
    }
}
