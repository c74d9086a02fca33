//! Number formatting for CSV artifacts.

/// Shortest decimal that parses back to `x` exactly; exponent form for very
/// small or large magnitudes. Negative zero prints as `0`.
pub fn num(x: f64) -> String {
    let a = x.abs();
    if x == 0.0 {
        "0".into()
    } else if (1e-5..1e16).contains(&a) || !x.is_finite() {
        x.to_string()
    } else {
        format!("{x:e}")
    }
}

#[cfg(test)]
mod tests {
    use super::num;

    #[test]
    fn round_trips() {
        for x in [0.1, -2.5e-17, 1.0 / 3.0, 6.02e23, 1e-5, 123456.789, f64::MIN_POSITIVE] {
            assert_eq!(num(x).parse::<f64>().unwrap(), x);
        }
        assert_eq!(num(-0.0), "0");
        assert_eq!(num(1.5e-9), "1.5e-9");
    }
}
