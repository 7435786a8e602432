/// Significant digits in every emitted float.
pub const SIG_DIGITS: usize = 12;

/// C-style scientific notation with 12 significant digits, e.g.
/// `-1.23456789012e+03`.
pub fn fmt_sci(v: f64) -> String {
    if !v.is_finite() {
        return if v.is_nan() {
            "nan".to_string()
        } else if v > 0.0 {
            "inf".to_string()
        } else {
            "-inf".to_string()
        };
    }
    let s = format!("{:.*e}", SIG_DIGITS - 1, v);
    let (mantissa, exp) = s.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    let sign = if exp < 0 { '-' } else { '+' };
    format!("{mantissa}e{sign}{:02}", exp.abs())
}

/// `v` rounded to 12 significant digits.
pub fn round_sig(v: f64) -> f64 {
    if !v.is_finite() {
        return v;
    }
    fmt_sci(v).parse().expect("formatted float parses")
}

pub fn fmt_opt(v: Option<f64>) -> String {
    v.map(fmt_sci).unwrap_or_default()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn examples() {
        assert_eq!(fmt_sci(1.0), "1.00000000000e+00");
        assert_eq!(fmt_sci(-0.00123456789012345), "-1.23456789012e-03");
        assert_eq!(fmt_sci(6.02214076e23), "6.02214076000e+23");
        assert_eq!(fmt_sci(1e-300), "1.00000000000e-300");
        assert_eq!(fmt_sci(0.0), "0.00000000000e+00");
        assert_eq!(round_sig(0.1 + 0.2), 0.3);
    }
}
