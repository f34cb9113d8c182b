//! Number formatting for CSV output.

/// `%.17g`: 17 significant digits, trailing zeros dropped, exponent form
/// outside `1e-5 ≤ |x| < 1e17`.
pub fn g17(x: f64) -> String {
    if x == 0.0 {
        return "0".into();
    }
    if !x.is_finite() {
        return format!("{x}");
    }
    let sci = format!("{x:.16e}");
    let (mantissa, exp) = sci.split_once('e').expect("exponent");
    let exp: i32 = exp.parse().expect("integer exponent");
    if (-5..17).contains(&exp) {
        let digits = (16 - exp) as usize;
        trim(format!("{x:.digits$}"))
    } else {
        format!("{}e{}{:02}", trim(mantissa.to_string()), if exp < 0 { '-' } else { '+' }, exp.abs())
    }
}

fn trim(s: String) -> String {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s
    }
}

#[cfg(test)]
mod tests {
    use super::g17;

    #[test]
    fn matches_printf() {
        assert_eq!(g17(0.1), "0.10000000000000001");
        assert_eq!(g17(1.0), "1");
        assert_eq!(g17(-2.5), "-2.5");
        assert_eq!(g17(1e-7), "9.9999999999999995e-08");
        assert_eq!(g17(123456.0), "123456");
        assert_eq!(g17(1e20), "1e+20");
        assert_eq!(g17(0.0), "0");
    }

    #[test]
    fn round_trips() {
        for x in [0.1, 1.0 / 3.0, -2.0f64.sqrt(), 1e-300, 6.02e23] {
            assert_eq!(g17(x).parse::<f64>().unwrap(), x);
        }
    }
}
