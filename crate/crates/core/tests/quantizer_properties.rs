use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use temcodec::quantization::{
    compander_codebook, compander_design, dequantize, lloyd_max_design, quantize, uq_design,
    Codebook, IntervalSamples, LloydMaxOptions, DEFAULT_EXPONENTS,
};
use temcodec::tem::Scheme;

/// Skewed interval-like samples on roughly [4, 8] ms.
fn samples(seed: u64, n: usize) -> IntervalSamples {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let values = (0..n)
        .map(|_| {
            let u: f64 = rng.gen();
            let v: f64 = rng.gen();
            0.004 + 0.004 * u * v.sqrt()
        })
        .collect();
    IntervalSamples::new(values, Scheme::Lb, 1).unwrap()
}

/// Nearest level by exhaustive scan; ties keep the lower index.
fn nearest(levels: &[f64], x: f64) -> usize {
    let mut best = 0;
    for (i, l) in levels.iter().enumerate() {
        if (x - l).abs() < (x - levels[best]).abs() {
            best = i;
        }
    }
    best
}

/// Cell index by exhaustive scan of the boundaries.
fn cell(boundaries: &[f64], x: f64) -> usize {
    boundaries.iter().filter(|&&b| b < x).count()
}

fn lloyd(bits: u8) -> Codebook {
    lloyd_max_design(&samples(3, 5000), bits, LloydMaxOptions::default())
        .unwrap()
        .codebook
}

#[test]
fn lloyd_max_distortion_never_increases() {
    for bits in 1..=6 {
        let d = lloyd_max_design(
            &samples(bits as u64, 4000),
            bits,
            LloydMaxOptions::default(),
        )
        .unwrap()
        .distortions;
        assert!(d.len() >= 2, "R = {bits} did not iterate");
        for w in d.windows(2) {
            assert!(w[1] <= w[0], "R = {bits}: {} then {}", w[0], w[1]);
        }
    }
}

#[test]
fn lloyd_max_levels_are_cell_centroids() {
    let s = samples(5, 8000);
    for bits in 1..=4 {
        let cb = lloyd_max_design(
            &s,
            bits,
            LloydMaxOptions {
                tol: 1e-13,
                max_iter: 5000,
            },
        )
        .unwrap()
        .codebook;
        for (i, &level) in cb.levels().iter().enumerate() {
            let members: Vec<f64> = s
                .values
                .iter()
                .copied()
                .filter(|&x| cb.index_of(x) == i)
                .collect();
            let centroid = members.iter().sum::<f64>() / members.len() as f64;
            assert!(
                (centroid - level).abs() < 1e-6 * 0.004,
                "R = {bits} level {i}"
            );
        }
    }
}

/// Lloyd iteration has a unique fixed point for log-concave densities, so
/// there it must beat the uniform quantizer on the same range.
#[test]
fn lloyd_max_beats_uniform_on_log_concave_data() {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let values = (0..5000)
        .map(|_| 0.004 + 0.002 * (rng.gen::<f64>() + rng.gen::<f64>()))
        .collect();
    let s = IntervalSamples::new(values, Scheme::Lb, 1).unwrap();
    let (lo, hi) = s.extent();
    for bits in 1..=5 {
        let lm = lloyd_max_design(&s, bits, LloydMaxOptions::default())
            .unwrap()
            .codebook;
        let uq = uq_design(lo, hi, bits).unwrap();
        let (a, b) = (lm.distortion(&s.values), uq.distortion(&s.values));
        assert!(a <= b, "R = {bits}: {a} vs {b}");
    }
}

#[test]
fn compander_design_picks_the_best_exponent() {
    let s = samples(7, 3000);
    let (lo, hi) = s.extent();
    let chosen = compander_design(&s, 3, &DEFAULT_EXPONENTS).unwrap();
    for p in DEFAULT_EXPONENTS {
        let other = compander_codebook(lo, hi, 3, p).unwrap();
        assert!(chosen.distortion(&s.values) <= other.distortion(&s.values));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(400))]

    #[test]
    fn quantizer_matches_linear_scan(x in 0.0035f64..0.0085, bits in 1u8..=6, which in 0usize..3) {
        let cb = match which {
            0 => uq_design(0.004, 0.008, bits).unwrap(),
            1 => lloyd(bits),
            _ => compander_codebook(0.004, 0.008, bits, 2.0).unwrap(),
        };
        prop_assert_eq!(cb.index_of(x), cell(cb.boundaries(), x));
        if which < 2 {
            // midpoint boundaries make the cell the nearest level
            prop_assert_eq!(cb.index_of(x), nearest(cb.levels(), x));
        }
    }

    #[test]
    fn quantizer_is_monotone(a in 0.003f64..0.009, b in 0.003f64..0.009, bits in 1u8..=8) {
        let cb = uq_design(0.004, 0.008, bits).unwrap();
        let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
        prop_assert!(cb.index_of(lo) <= cb.index_of(hi));
    }

    #[test]
    fn dequantize_inverts_on_levels(bits in 1u8..=8) {
        let cb = uq_design(0.004, 0.008, bits).unwrap();
        let q = quantize(cb.levels(), &cb);
        prop_assert_eq!(q.clamped, 0);
        prop_assert_eq!(dequantize(&q.indices, &cb).unwrap(), cb.levels().to_vec());
    }
}

#[test]
fn levels_strictly_increase_for_every_family() {
    for bits in 1..=8 {
        for cb in [
            uq_design(0.004, 0.008, bits).unwrap(),
            lloyd(bits),
            compander_codebook(0.004, 0.008, bits, 0.25).unwrap(),
        ] {
            assert!(
                cb.levels().windows(2).all(|w| w[0] < w[1]),
                "{:?} R = {bits}",
                cb.kind()
            );
        }
    }
}

#[test]
fn boundary_ties_go_to_the_lower_index() {
    let cb = uq_design(0.0, 1.0, 2).unwrap();
    assert_eq!(cb.index_of(0.25), 0);
    assert_eq!(cb.index_of(0.5), 1);
    assert_eq!(cb.index_of(0.75), 2);
}

#[test]
fn out_of_range_values_are_clamped_and_counted() {
    let cb = uq_design(0.004, 0.008, 3).unwrap();
    let q = quantize(&[0.001, 0.005, 0.02], &cb);
    assert_eq!(q.clamped, 2);
    assert_eq!(q.indices[0], 0);
    assert_eq!(q.indices[2], 7);
}

#[test]
fn canonical_json_round_trips_bit_exactly() {
    for cb in [lloyd(5), compander_codebook(0.004, 0.008, 4, 3.0).unwrap()] {
        let text = cb.to_canonical_json().unwrap();
        let back = Codebook::from_json(&text).unwrap();
        assert_eq!(back, cb);
        assert_eq!(back.to_canonical_json().unwrap(), text);
    }
}
