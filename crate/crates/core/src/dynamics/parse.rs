use super::{ComplexPoint, PolynomialMap};
use crate::error::{Error, Result};
use num_complex::Complex64;

pub(super) fn parse_map_spec(spec: &str) -> Result<PolynomialMap> {
    let body = spec
        .trim()
        .strip_prefix("poly:")
        .ok_or_else(|| Error::Parse(format!("expected `poly: c0, c1, ...`, got `{spec}`")))?;
    let coeffs = body
        .split(',')
        .enumerate()
        .map(|(k, tok)| {
            parse_complex(tok).map_err(|e| Error::Parse(format!("coefficient {k}: {e}")))
        })
        .collect::<Result<Vec<_>>>()?;
    PolynomialMap::new(coeffs).map_err(|e| Error::Parse(e.to_string()))
}

/// Parses `a`, `bi`, `a+bi`, `a-bi`, `i`, `-i`, with optional exponents.
pub fn parse_complex(token: &str) -> std::result::Result<ComplexPoint, String> {
    let s: String = token.chars().filter(|c| !c.is_whitespace()).collect();
    if s.is_empty() {
        return Err("empty literal".into());
    }
    let num = |t: &str| -> std::result::Result<f64, String> {
        t.parse::<f64>().map_err(|_| format!("bad number `{t}` in `{s}`"))
    };
    let imag_unit = |t: &str| -> std::result::Result<f64, String> {
        match t {
            "" | "+" => Ok(1.0),
            "-" => Ok(-1.0),
            _ => num(t),
        }
    };
    let Some(head) = s.strip_suffix('i') else {
        return Ok(Complex64::new(num(&s)?, 0.0));
    };
    // Split at the last sign that is not leading and not part of an exponent.
    let bytes = head.as_bytes();
    let split = (1..bytes.len())
        .rev()
        .find(|&k| (bytes[k] == b'+' || bytes[k] == b'-') && !matches!(bytes[k - 1], b'e' | b'E'));
    let value = match split {
        Some(k) => Complex64::new(num(&head[..k])?, imag_unit(&head[k..])?),
        None => Complex64::new(0.0, imag_unit(head)?),
    };
    if value.re.is_finite() && value.im.is_finite() {
        Ok(value)
    } else {
        Err(format!("non-finite literal `{s}`"))
    }
}

pub(super) fn format_complex(c: ComplexPoint) -> String {
    if c.im == 0.0 && c.im.is_sign_positive() {
        format!("{:?}", c.re)
    } else if c.im.is_sign_negative() {
        format!("{:?}-{:?}i", c.re, -c.im)
    } else {
        format!("{:?}+{:?}i", c.re, c.im)
    }
}
