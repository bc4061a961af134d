//! Locale-independent number formatting with a fixed count of significant
//! digits, and JSON values built from it.

use serde_json::{Number, Value};

/// `x` with exactly `digits` significant digits. Positional notation for
/// decimal exponents in `[-5, digits)`, scientific otherwise.
pub fn format_sig(x: f64, digits: usize) -> String {
    let digits = digits.max(1);
    if x.is_nan() {
        return "NaN".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if x == 0.0 {
        return if digits == 1 {
            "0".into()
        } else {
            format!("0.{}", "0".repeat(digits - 1))
        };
    }
    let sci = format!("{:.*e}", digits - 1, x);
    let (mantissa, exp) = sci.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    if exp < -5 || exp >= digits as i32 {
        return format!("{mantissa}e{exp}");
    }
    let (sign, mantissa) = match mantissa.strip_prefix('-') {
        Some(m) => ("-", m),
        None => ("", mantissa),
    };
    let ds: String = mantissa.chars().filter(|c| c.is_ascii_digit()).collect();
    let body = if exp >= 0 {
        let split = exp as usize + 1;
        let (int, frac) = ds.split_at(split);
        if frac.is_empty() {
            int.to_string()
        } else {
            format!("{int}.{frac}")
        }
    } else {
        format!("0.{}{ds}", "0".repeat((-exp - 1) as usize))
    };
    format!("{sign}{body}")
}

/// JSON number with `digits` significant digits; `null` when not finite.
pub fn num(x: f64, digits: usize) -> Value {
    if !x.is_finite() {
        return Value::Null;
    }
    let n: Number = format_sig(x, digits)
        .parse()
        .expect("formatted float is a JSON number");
    Value::Number(n)
}
