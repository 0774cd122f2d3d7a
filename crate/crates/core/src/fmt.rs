//! Number formatting shared by every writer.

/// Shortest representation that parses back to the same `f64`.
pub fn fmt_float(x: f64) -> String {
    if x == 0.0 {
        // normalize -0
        return "0".to_string();
    }
    format!("{x}")
}

/// `%g`-style formatting with six significant digits.
pub fn fmt_sig6(x: f64) -> String {
    if !x.is_finite() {
        return format!("{x}");
    }
    if x == 0.0 {
        return "0".to_string();
    }
    let exp = x.abs().log10().floor() as i32;
    // rounding can bump the exponent (999999.5 -> 1e6)
    let sci = format!("{x:.5e}");
    let exp = sci
        .split_once('e')
        .and_then(|(_, e)| e.parse::<i32>().ok())
        .unwrap_or(exp);
    if !(-4..6).contains(&exp) {
        let (mantissa, e) = sci.split_once('e').expect("scientific format");
        return format!("{}e{e}", trim_zeros(mantissa));
    }
    let decimals = (5 - exp).max(0) as usize;
    let s = format!("{x:.decimals$}");
    trim_zeros(&s)
}

/// Scientific notation with six significant digits, e.g. `9.28100e-25`.
pub fn fmt_sci6(x: f64) -> String {
    if !x.is_finite() {
        return format!("{x}");
    }
    format!("{x:.5e}")
}

fn trim_zeros(s: &str) -> String {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s.to_string()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sig6() {
        assert_eq!(fmt_sig6(0.98198050606), "0.981981");
        assert_eq!(fmt_sig6(5.0), "5");
        assert_eq!(fmt_sig6(0.17320508), "0.173205");
        assert_eq!(fmt_sig6(1234567.0), "1.23457e6");
        assert_eq!(fmt_sig6(0.0000123456789), "1.23457e-5");
        assert_eq!(fmt_sig6(-0.5), "-0.5");
        assert_eq!(fmt_sig6(999999.7), "1e6");
        assert_eq!(fmt_sig6(0.0001), "0.0001");
    }

    #[test]
    fn sci6() {
        assert_eq!(fmt_sci6(9.281e-25), "9.28100e-25");
        assert_eq!(fmt_sci6(0.476), "4.76000e-1");
    }

    #[test]
    fn float_round_trips() {
        for x in [0.1, 1.0 / 3.0, -2.5e-300, 12345.678] {
            assert_eq!(fmt_float(x).parse::<f64>().unwrap(), x);
        }
        assert_eq!(fmt_float(-0.0), "0");
    }
}
