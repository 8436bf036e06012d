//! Small numeric helpers shared by several modules.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Nearest-rank percentile: the element at 1-based position `ceil(p/100 * n)`
/// of the ascending-sorted values. `p` must lie in `(0, 100]`.
pub fn nearest_rank(values: &[f64], p: f64) -> Option<f64> {
    if values.is_empty() || !(p > 0.0 && p <= 100.0) {
        return None;
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let rank = ((p / 100.0) * sorted.len() as f64).ceil() as usize;
    Some(sorted[rank.clamp(1, sorted.len()) - 1])
}

/// Median with the mean of the two central order statistics for even counts.
pub fn median(values: &[f64]) -> Option<f64> {
    if values.is_empty() {
        return None;
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let mid = sorted.len() / 2;
    Some(if sorted.len().is_multiple_of(2) {
        (sorted[mid - 1] + sorted[mid]) / 2.0
    } else {
        sorted[mid]
    })
}

/// Independent generator for `(seed, stream)`; distinct streams never overlap.
pub fn seeded_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// `%.9g`-style formatting: nine significant digits, shortest representation.
pub fn fmt_sig9(x: f64) -> String {
    if !x.is_finite() {
        return x.to_string();
    }
    let rounded: f64 = format!("{x:.8e}").parse().unwrap_or(x);
    format!("{rounded}")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn nearest_rank_matches_hand_enumeration() {
        let v: Vec<f64> = (1..=100).map(f64::from).collect();
        assert_eq!(nearest_rank(&v, 95.0), Some(95.0));
        assert_eq!(nearest_rank(&v, 100.0), Some(100.0));
        assert_eq!(nearest_rank(&v, 0.5), Some(1.0));
        let ten: Vec<f64> = (1..=10).map(f64::from).collect();
        // ceil(0.95 * 10) = 10
        assert_eq!(nearest_rank(&ten, 95.0), Some(10.0));
        assert_eq!(nearest_rank(&ten, 85.0), Some(9.0));
        assert_eq!(nearest_rank(&[], 50.0), None);
        assert_eq!(nearest_rank(&ten, 0.0), None);
    }

    #[test]
    fn median_even_and_odd() {
        assert_eq!(median(&[3.0, 1.0, 2.0]), Some(2.0));
        assert_eq!(median(&[4.0, 1.0, 2.0, 3.0]), Some(2.5));
        assert_eq!(median(&[]), None);
    }

    #[test]
    fn sig9_formatting() {
        assert_eq!(fmt_sig9(0.9), "0.9");
        assert_eq!(fmt_sig9(0.123456789123), "0.123456789");
        assert_eq!(fmt_sig9(1.0), "1");
        assert_eq!(fmt_sig9(2.0 / 3.0), "0.666666667");
    }
}
