/// Decimal rendering with 12 significant digits, independent of locale.
///
/// Plain notation for magnitudes in `[1e-5, 1e12)`, scientific outside. Integral values
/// keep a trailing `.0`.
pub fn num(v: f64) -> String {
    if v.is_nan() {
        return "nan".into();
    }
    if v.is_infinite() {
        return if v > 0.0 { "inf" } else { "-inf" }.into();
    }
    if v == 0.0 {
        return "0.0".into();
    }
    let sci = format!("{v:.11e}");
    let (mantissa, exp) = sci.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    if (-5..12).contains(&exp) {
        trim(format!("{v:.*}", (11 - exp) as usize))
    } else {
        format!("{}e{exp}", trim(mantissa.to_string()))
    }
}

fn trim(mut s: String) -> String {
    if s.contains('.') {
        while s.ends_with('0') {
            s.pop();
        }
        if s.ends_with('.') {
            s.push('0');
        }
    } else {
        s.push_str(".0");
    }
    s
}

pub fn vector(v: &[f64]) -> String {
    let parts: Vec<String> = v.iter().map(|&x| num(x)).collect();
    format!("[{}]", parts.join(", "))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn renders_like_g12() {
        assert_eq!(num(2.0), "2.0");
        assert_eq!(num(1.9999999999999), "2.0");
        assert_eq!(num(0.797), "0.797");
        assert_eq!(num(-0.25), "-0.25");
        assert_eq!(num(1.0 / 3.0), "0.333333333333");
        assert_eq!(num(123456789012.0), "123456789012.0");
        assert_eq!(num(1e12), "1.0e12");
        assert_eq!(num(1.5e-7), "1.5e-7");
        assert_eq!(num(0.00012345), "0.00012345");
        assert_eq!(num(-0.0), "0.0");
        assert_eq!(num(9.99999999999995), "10.0");
    }
}
