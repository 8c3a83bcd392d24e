//! Locale-independent numeric formatting for CSV cells and axis labels.

/// Formats `x` with `digits` significant digits and a `.` decimal separator,
/// regardless of locale. Plain decimal notation inside 10⁻⁴..10¹²,
/// scientific outside; trailing zeros trimmed so equal values always print
/// identically.
pub fn sig(x: f64, digits: usize) -> String {
    debug_assert!(digits >= 1);
    if x == 0.0 {
        return String::from("0");
    }
    if !x.is_finite() {
        return String::from(if x.is_nan() {
            "nan"
        } else if x > 0.0 {
            "inf"
        } else {
            "-inf"
        });
    }
    let sci = format!("{x:.prec$e}", prec = digits - 1);
    let (mantissa, exp) = sci.split_once('e').expect("float format");
    let p: i32 = exp.parse().expect("float exponent");
    let neg = mantissa.starts_with('-');
    let all_digits: String = mantissa.chars().filter(|c| c.is_ascii_digit()).collect();
    let digits = {
        let trimmed = all_digits.trim_end_matches('0');
        if trimmed.is_empty() {
            "0"
        } else {
            trimmed
        }
    };
    let n = digits.len() as i32;
    let body = if (-4..=11).contains(&p) {
        if p >= n - 1 {
            format!("{digits}{}", "0".repeat((p - n + 1) as usize))
        } else if p >= 0 {
            format!("{}.{}", &digits[..=p as usize], &digits[p as usize + 1..])
        } else {
            format!("0.{}{digits}", "0".repeat((-p - 1) as usize))
        }
    } else if n == 1 {
        format!("{digits}e{p}")
    } else {
        format!("{}.{}e{p}", &digits[..1], &digits[1..])
    };
    if neg {
        format!("-{body}")
    } else {
        body
    }
}

/// Nine significant digits — the CSV cell format.
pub fn sig9(x: f64) -> String {
    sig(x, 9)
}

/// CSV cell for an optional value; absent values print as an empty field.
pub fn sig9_opt(x: Option<f64>) -> String {
    x.map(sig9).unwrap_or_default()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn covers_the_magnitude_ranges() {
        assert_eq!(sig9(0.0), "0");
        assert_eq!(sig9(-0.0), "0");
        assert_eq!(sig9(0.5), "0.5");
        assert_eq!(sig9(0.05), "0.05");
        assert_eq!(sig9(1.0), "1");
        assert_eq!(sig9(1500.0), "1500");
        assert_eq!(sig9(-2.5), "-2.5");
        assert_eq!(sig9(1.0 / 3.0), "0.333333333");
        assert_eq!(sig9(2.0 / 3.0), "0.666666667");
        assert_eq!(sig9(1.23456789012e-7), "1.23456789e-7");
        assert_eq!(sig9(9.999999999e-5), "0.0001");
        assert_eq!(sig9(-2.5e14), "-2.5e14");
        assert_eq!(sig9(1e12), "1e12");
        assert_eq!(sig9(123456789012.0), "123456789000");
    }

    #[test]
    fn respects_the_digit_budget() {
        assert_eq!(sig9(std::f64::consts::PI), "3.14159265");
        assert_eq!(sig(std::f64::consts::PI, 3), "3.14");
        assert_eq!(sig(0.05000001, 3), "0.05");
        assert_eq!(sig(2.0 / 3.0, 1), "0.7");
    }

    #[test]
    fn optional_cells_are_empty_when_absent() {
        assert_eq!(sig9_opt(None), "");
        assert_eq!(sig9_opt(Some(0.25)), "0.25");
    }
}
