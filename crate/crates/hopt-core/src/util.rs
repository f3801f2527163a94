//! Small shared helpers: canonical float formatting and seeded RNG streams.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Formats a float with 17 significant digits, enough for an exact f64
/// round-trip through decimal text. Writing the parsed value again yields
/// byte-identical output, which the CSV reproducibility contract relies on.
pub fn fmt_f64(x: f64) -> String {
    format!("{:.16e}", x)
}

/// Parses a float previously written by [`fmt_f64`] (or any decimal text).
pub fn parse_f64(s: &str) -> Result<f64, std::num::ParseFloatError> {
    s.trim().parse::<f64>()
}

/// Derives an independent RNG stream from a base seed and a stream label.
/// Callers use distinct labels so that, for example, the initial design,
/// the acquisition loop, and per-tree bootstraps never share a stream.
pub fn seeded_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Mixes a base seed with a tag and counter into a fresh seed (one
/// splitmix64 round). Lets one run seed spawn unrelated sub-seeds for the
/// initial design, each acquisition, each surrogate refit, and so on.
pub fn mix_seed(seed: u64, tag: u64, counter: u64) -> u64 {
    let mut z = seed
        .wrapping_add(tag.wrapping_mul(0x9E37_79B9_7F4A_7C15))
        .wrapping_add(counter.wrapping_mul(0xBF58_476D_1CE4_E5B9));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Sample standard deviation (n-1 denominator); 0 for fewer than two values.
pub fn sample_sd(values: &[f64]) -> f64 {
    if values.len() < 2 {
        return 0.0;
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let ss = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>();
    (ss / (n - 1.0)).sqrt()
}

/// Population standard deviation (n denominator); 0 for an empty slice.
pub fn population_sd(values: &[f64]) -> f64 {
    if values.is_empty() {
        return 0.0;
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let ss = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>();
    (ss / n).sqrt()
}

/// Interpolated median: the average of the two middle elements for even
/// lengths, the middle element otherwise. The input need not be sorted.
pub fn median(values: &[f64]) -> f64 {
    assert!(!values.is_empty(), "median of empty slice");
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn float_text_round_trips_exactly() {
        for &x in &[
            0.1,
            1.0 / 3.0,
            -2.5e-17,
            6.894757e10,
            f64::MIN_POSITIVE,
            123456789.123456789,
        ] {
            let s = fmt_f64(x);
            let back = parse_f64(&s).unwrap();
            assert_eq!(x.to_bits(), back.to_bits(), "round-trip failed for {s}");
            assert_eq!(s, fmt_f64(back));
        }
    }

    #[test]
    fn rng_streams_are_independent_and_deterministic() {
        use rand::Rng;
        let a: f64 = seeded_rng(7, 1).gen();
        let b: f64 = seeded_rng(7, 2).gen();
        let a2: f64 = seeded_rng(7, 1).gen();
        assert_eq!(a.to_bits(), a2.to_bits());
        assert_ne!(a.to_bits(), b.to_bits());
    }

    #[test]
    fn mixed_seeds_differ_across_tags_and_counters() {
        assert_eq!(mix_seed(1, 2, 3), mix_seed(1, 2, 3));
        assert_ne!(mix_seed(1, 2, 3), mix_seed(1, 2, 4));
        assert_ne!(mix_seed(1, 2, 3), mix_seed(1, 3, 3));
        assert_ne!(mix_seed(1, 2, 3), mix_seed(2, 2, 3));
    }

    #[test]
    fn median_handles_even_and_odd_lengths() {
        assert_eq!(median(&[3.0, 1.0, 2.0]), 2.0);
        assert_eq!(median(&[4.0, 1.0, 3.0, 2.0]), 2.5);
        assert_eq!(median(&[5.0]), 5.0);
    }

    #[test]
    fn sds_match_hand_computation() {
        let v = [2.0, 4.0, 4.0, 4.0, 5.0, 5.0, 7.0, 9.0];
        assert!((population_sd(&v) - 2.0).abs() < 1e-12);
        assert!((sample_sd(&v) - (32.0f64 / 7.0).sqrt()).abs() < 1e-12);
        assert_eq!(sample_sd(&[1.0]), 0.0);
    }
}
