use std::f64::consts::{PI, SQRT_2};

use proptest::prelude::*;
use temcodec::signal::{BandlimitedSignal, SignalClass, SignalSpec};
use temcodec::tem::{
    encode, lb_design, running_average, ConstParams, EncodeOptions, FiringRecord, SchemeParams,
    VbParams,
};

const W: f64 = 100.0 * PI;
const SUPPORT: (f64, f64) = (-0.45, 0.45);

fn class() -> SignalClass {
    SignalClass::new(W, 1.0).unwrap()
}

fn schemes() -> [SchemeParams; 3] {
    [
        SchemeParams::Conv(ConstParams::new(0.005, 1.5, class()).unwrap()),
        SchemeParams::Vb(VbParams::new(0.0157, class()).unwrap()),
        SchemeParams::Lb(lb_design(SQRT_2 - 1.0, 1.0, W, 1.0).unwrap()),
    ]
}

fn signal(seed: u64) -> BandlimitedSignal {
    BandlimitedSignal::generate(&SignalSpec::new(W, 1.0, SUPPORT, seed).unwrap()).unwrap()
}

fn run(s: &BandlimitedSignal, p: &SchemeParams) -> FiringRecord {
    encode(s, p, SUPPORT.0, SUPPORT.1, &EncodeOptions::default()).unwrap()
}

#[test]
fn every_firing_reaches_the_threshold() {
    for p in schemes() {
        let s = signal(1);
        let rec = run(&s, &p);
        let times = rec.firing_times();
        for (n, b) in rec.bias_trace.iter().enumerate() {
            let dt = rec.intervals[n];
            let total = s.integrate(times[n], times[n + 1]).unwrap() + b.integral(dt);
            assert!((total - p.threshold()).abs() < 1e-12, "{p:?} firing {n}");
        }
    }
}

#[test]
fn running_average_matches_integral_oracle() {
    for p in schemes() {
        for seed in 0..5 {
            let s = signal(seed);
            let rec = run(&s, &p);
            let times = rec.firing_times();
            for (n, b) in rec.bias_trace.iter().enumerate() {
                let dt = rec.intervals[n];
                let fhat = running_average(p.threshold(), dt, b.integral(dt)).unwrap();
                let oracle = s.integrate(times[n], times[n + 1]).unwrap() / dt;
                assert!(
                    (fhat * dt - oracle * dt).abs() < 1e-9,
                    "{:?} seed {seed} n {n}",
                    p.scheme()
                );
            }
        }
    }
}

#[test]
fn amplitude_bound_at_every_firing() {
    let eps = class().slope_bound();
    for p in schemes() {
        for seed in 0..5 {
            let s = signal(seed);
            let rec = run(&s, &p);
            let times = rec.firing_times();
            for n in 1..rec.intervals.len() {
                let prev = rec.intervals[n - 1];
                let fhat = s.integrate(times[n - 1], times[n]).unwrap() / prev;
                let f = s.evaluate(times[n]);
                let half = 0.5 * eps * prev;
                assert!(
                    f >= fhat - half - 1e-9 && f <= fhat + half + 1e-9,
                    "{:?} seed {seed} n {n}: f = {f}, f̂ = {fhat}, εT/2 = {half}",
                    p.scheme()
                );
            }
        }
    }
}

#[test]
fn biased_integrand_stays_positive() {
    for p in schemes() {
        for seed in 0..3 {
            let s = signal(seed);
            let rec = run(&s, &p);
            let times = rec.firing_times();
            for (n, b) in rec.bias_trace.iter().enumerate() {
                let dt = rec.intervals[n];
                let min = (0..=1000)
                    .map(|i| {
                        let e = dt * i as f64 / 1000.0;
                        s.evaluate(times[n] + e) + b.value_at(e)
                    })
                    .fold(f64::INFINITY, f64::min);
                assert!(min > 0.0, "{:?} seed {seed} n {n}: min {min}", p.scheme());
            }
        }
    }
}

#[test]
fn intervals_stay_in_closed_form_bounds() {
    for p in schemes() {
        let b = p.interval_bounds();
        for seed in 0..20 {
            let rec = run(&signal(seed), &p);
            for &t in rec.steady_intervals() {
                assert!(b.contains(t, 1e-9), "{:?} seed {seed}: {t}", p.scheme());
            }
        }
    }
}

#[test]
fn zero_signal_fixed_points() {
    let zero = BandlimitedSignal::from_coefficients(W, 1.0, 0.0, vec![0.0]).unwrap();
    // Conv: Δ_c/b; VB: (√2 − 1)·T_max; LB: the positive root of
    // εT²/2 + (μ + εT/2)T = Δ, i.e. T = (√(μ² + 4εΔ) − μ)/(2ε)
    let p = schemes();
    let eps = W;
    let lb = match p[2] {
        SchemeParams::Lb(l) => l,
        _ => unreachable!(),
    };
    let vb_tmax = (2.0 * 0.0157 / eps).sqrt();
    let expected = [
        0.005 / 1.5,
        (SQRT_2 - 1.0) * vb_tmax,
        ((lb.mu * lb.mu + 4.0 * eps * lb.delta).sqrt() - lb.mu) / (2.0 * eps),
    ];
    for (p, want) in p.iter().zip(expected) {
        let rec = run(&zero, p);
        let tail = &rec.intervals[20..];
        let mean = tail.iter().sum::<f64>() / tail.len() as f64;
        assert!(
            (mean - want).abs() < 1e-6,
            "{:?}: {mean} vs {want}",
            p.scheme()
        );
    }
    assert!((expected[0] - 3.33e-3).abs() < 5e-6);
    assert!((expected[1] - 4.14e-3).abs() < 5e-6);
    assert!((expected[2] - 6.18e-3).abs() < 5e-6);
}

proptest! {
    #[test]
    fn theorem_bounds_round_trip(alpha in 0.05f64..0.95, frac in 0.05f64..1.0) {
        let beta = alpha + (1.0 - alpha) * frac;
        prop_assume!(beta - alpha > 1e-3);
        let p = lb_design(alpha, beta, W, 1.0).unwrap();
        let b = p.interval_bounds();
        let t = PI / W;
        prop_assert!((b.t_min / (alpha * t) - 1.0).abs() < 1e-12);
        prop_assert!((b.t_max / (beta * t) - 1.0).abs() < 1e-12);
    }
}
