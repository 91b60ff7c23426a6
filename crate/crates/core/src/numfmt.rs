//! Decimal precision used by every text and JSON writer in the crate.

/// Number of significant digits kept when serializing floats.
pub const SIGNIFICANT_DIGITS: usize = 12;

/// Rounds `x` to [`SIGNIFICANT_DIGITS`] significant decimal digits.
///
/// Non-finite values pass through unchanged and negative zero becomes zero.
pub fn round_sig(x: f64) -> f64 {
    if !x.is_finite() {
        return x;
    }
    if x == 0.0 {
        return 0.0;
    }
    let rounded: f64 = format!("{:.*e}", SIGNIFICANT_DIGITS - 1, x)
        .parse()
        .expect("exponent format always parses");
    if rounded == 0.0 {
        0.0
    } else {
        rounded
    }
}

/// Formats `x` at serialized precision using the shortest decimal that
/// round-trips the rounded value.
pub fn fmt_num(x: f64) -> String {
    let r = round_sig(x);
    if r == 0.0 {
        return "0".to_string();
    }
    let a = r.abs();
    if (1e-4..1e12).contains(&a) {
        format!("{r}")
    } else {
        format!("{r:e}")
    }
}

/// Rounds a fractional coordinate and wraps it back into `[0, 1)`.
///
/// Rounding can carry a value like `0.9999999999999` up to exactly `1.0`.
pub fn round_frac(x: f64) -> f64 {
    let r = round_sig(x);
    if r >= 1.0 {
        0.0
    } else {
        r
    }
}

/// Pairwise (cascade) summation; fixed association order for a given length.
pub fn pairwise_sum(values: &[f64]) -> f64 {
    const BLOCK: usize = 8;
    if values.len() <= BLOCK {
        values.iter().sum()
    } else {
        let mid = values.len() / 2;
        pairwise_sum(&values[..mid]) + pairwise_sum(&values[mid..])
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rounds_to_twelve_digits() {
        assert_eq!(round_sig(0.1 + 0.2), 0.3);
        assert_eq!(round_sig(1.0 / 3.0), 0.333333333333);
        assert_eq!(round_sig(-0.0), 0.0);
        assert_eq!(fmt_num(-0.0), "0");
        assert_eq!(fmt_num(2.23), "2.23");
        assert_eq!(fmt_num(1e-20), "1e-20");
    }

    #[test]
    fn fractional_coordinates_stay_below_one() {
        assert_eq!(round_frac(0.99999999999999), 0.0);
        assert_eq!(round_frac(0.75), 0.75);
    }

    #[test]
    fn pairwise_matches_naive_on_small_inputs() {
        let v: Vec<f64> = (0..100).map(|i| i as f64).collect();
        assert_eq!(pairwise_sum(&v), 4950.0);
        assert_eq!(pairwise_sum(&[]), 0.0);
    }
}
