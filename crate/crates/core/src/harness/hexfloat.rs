//! Hexadecimal floating-point text, compatible with Python's `float.hex()`
//! and `float.fromhex()` for finite values: `0x1.8000000000000p+1` is 3.0.

use crate::error::{Error, Result};

/// Formats `x` as `[-]0x1.<13 hex digits>p<exp>` (normal) or
/// `[-]0x0.<13 hex digits>p-1022` (subnormal), `0x0.0p+0` for zero.
pub fn format_hex(x: f64) -> String {
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    let bits = x.to_bits();
    let sign = if bits >> 63 == 1 { "-" } else { "" };
    let biased = ((bits >> 52) & 0x7ff) as i64;
    let frac = bits & ((1u64 << 52) - 1);
    if biased == 0 && frac == 0 {
        return format!("{sign}0x0.0p+0");
    }
    let (lead, exp) = if biased == 0 { (0, -1022) } else { (1, biased - 1023) };
    let exp_sign = if exp < 0 { '-' } else { '+' };
    format!("{sign}0x{lead}.{frac:013x}p{exp_sign}{}", exp.abs())
}

/// Parses the output of [`format_hex`] (and the general `0x<hex>[.<hex>]p<exp>` form).
pub fn parse_hex(text: &str) -> Result<f64> {
    let bad = |reason: &str| Error::Parse {
        source_name: "hex float".into(),
        line: 0,
        reason: format!("{reason}: `{text}`"),
    };
    let t = text.trim();
    let (negative, body) = match t.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, t.strip_prefix('+').unwrap_or(t)),
    };
    let value = match body {
        "inf" | "infinity" => f64::INFINITY,
        "nan" => f64::NAN,
        _ => {
            let body = body
                .strip_prefix("0x")
                .or_else(|| body.strip_prefix("0X"))
                .ok_or_else(|| bad("missing 0x prefix"))?;
            let (mantissa, exp) = body.split_once(['p', 'P']).unwrap_or((body, "0"));
            let exp: i64 = exp.parse().map_err(|_| bad("bad exponent"))?;
            let (int_part, frac_part) = mantissa.split_once('.').unwrap_or((mantissa, ""));
            if int_part.is_empty() && frac_part.is_empty() {
                return Err(bad("empty mantissa"));
            }
            let digits: Vec<u32> = int_part
                .chars()
                .chain(frac_part.chars())
                .map(|c| c.to_digit(16).ok_or_else(|| bad("bad hex digit")))
                .collect::<Result<_>>()?;
            compose(&digits, exp - 4 * frac_part.len() as i64).ok_or_else(|| bad("value not exactly representable"))?
        }
    };
    Ok(if negative { -value } else { value })
}

/// `Σ digits · 16^k · 2^exp`, only when it is exactly representable.
fn compose(digits: &[u32], mut exp: i64) -> Option<f64> {
    // strip leading zeros, then accumulate in a u64 while it fits
    let first = digits.iter().position(|&d| d != 0);
    let Some(first) = first else { return Some(0.0) };
    let mut digits = &digits[first..];
    while digits.len() > 1 && *digits.last().expect("non-empty") == 0 {
        digits = &digits[..digits.len() - 1];
        exp += 4;
    }
    if digits.len() > 15 {
        return None;
    }
    let mut m: u64 = 0;
    for &d in digits {
        m = (m << 4) | d as u64;
    }
    // m < 2^60; normalise to at most 53 significant bits
    while m >= 1 << 53 {
        if m & 1 == 1 {
            return None;
        }
        m >>= 1;
        exp += 1;
    }
    let value = (m as f64) * pow2(exp)?;
    // the product must not have lost bits to underflow
    ((value / pow2(exp)?) == m as f64 || value.is_normal()).then_some(value)
}

fn pow2(e: i64) -> Option<f64> {
    // split so both factors stay in range
    if !(-1200..=1100).contains(&e) {
        return None;
    }
    let half = e / 2;
    Some(2f64.powi(half as i32) * 2f64.powi((e - half) as i32))
}
