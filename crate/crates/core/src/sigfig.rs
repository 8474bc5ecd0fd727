/// Formats `x` with six significant digits, switching to exponent notation
/// for very large or very small magnitudes.
pub fn sig6(x: f64) -> String {
    if x == 0.0 || !x.is_finite() {
        return format!("{x}");
    }
    let exp = x.abs().log10().floor() as i32;
    if (-5..6).contains(&exp) {
        let decimals = (5 - exp).max(0) as usize;
        format!("{x:.decimals$}")
    } else {
        format!("{x:.5e}")
    }
}

#[cfg(test)]
mod tests {
    use super::sig6;

    #[test]
    fn six_significant_digits() {
        assert_eq!(sig6(std::f64::consts::LN_2), "0.693147");
        assert_eq!(sig6(7.0 / 12.0), "0.583333");
        assert_eq!(sig6(1.0), "1.00000");
        assert_eq!(sig6(-123456.7), "-123457");
        assert_eq!(sig6(1234567.0), "1.23457e6");
        assert_eq!(sig6(12345.67), "12345.7");
        assert_eq!(sig6(3e-7), "3.00000e-7");
        assert_eq!(sig6(0.0), "0");
    }
}
