//! Number formatting shared by every CSV and JSON writer.

/// Formats `x` with 12 significant digits, trimming trailing zeros.
pub fn fmt12(x: f64) -> String {
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if x == 0.0 {
        return "0".into();
    }
    let exp = x.abs().log10().floor() as i32;
    if (-5..12).contains(&exp) {
        let decimals = (11 - exp).max(0) as usize;
        let s = format!("{x:.decimals$}");
        // rounding may have bumped the exponent, e.g. 9.99999999999995 -> 10.0000000000
        trim(&s)
    } else {
        let s = format!("{x:.11e}");
        let (mant, e) = s.split_once('e').unwrap_or((&s, "0"));
        format!("{}e{}", trim(mant), e)
    }
}

fn trim(s: &str) -> String {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s.to_string()
    }
}

/// Rounds to 12 significant digits, so JSON numbers match the CSV text.
pub fn round12(x: f64) -> f64 {
    fmt12(x).parse().unwrap_or(x)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn formats() {
        assert_eq!(fmt12(5.783185962946784), "5.78318596295");
        assert_eq!(fmt12(1.0), "1");
        assert_eq!(fmt12(-0.25), "-0.25");
        assert_eq!(fmt12(1.5e-9), "1.5e-9");
        assert_eq!(fmt12(3.0e20), "3e20");
        assert_eq!(fmt12(0.0), "0");
        assert_eq!(round12(std::f64::consts::PI), 3.14159265359);
    }
}
