//! WebAssembly bindings for the demo page in `www/`. Every entry point
//! takes strings and returns a JSON string so the page needs no glue beyond
//! what `wasm-bindgen` generates.

use serde_json::{json, Value};
use wasm_bindgen::prelude::*;

use dwarith::dw::{accurate_add, dw_mul, parse_f64_hex, sloppy_add, DoubleWord};
use dwarith::eft::TwoSumImpl;
use dwarith::fp::{Dyadic, Float, Native};
use dwarith::lab::{check_lemma2, rel_error};
use dwarith::{Error, Result};

/// A number in decimal or hex-float notation.
fn parse_number(s: &str) -> Result<f64> {
    let s = s.trim();
    if s.contains("0x") {
        parse_f64_hex(s)
    } else {
        s.parse::<f64>()
            .ok()
            .filter(|v| v.is_finite())
            .ok_or_else(|| Error::Parse(format!("not a finite number: {s:?}")))
    }
}

/// `"hi"` or `"hi lo"`.
pub fn parse_dw(s: &str) -> Result<DoubleWord<f64>> {
    let parts: Vec<&str> = s.split(|c: char| c.is_whitespace() || c == ',').filter(|t| !t.is_empty()).collect();
    match parts.as_slice() {
        [h] => Ok(DoubleWord::new(parse_number(h)?, 0.0)),
        [h, l] => Ok(DoubleWord::new(parse_number(h)?, parse_number(l)?)),
        _ => Err(Error::Parse(format!("expected one or two numbers, got {s:?}"))),
    }
}

fn result_json(z: DoubleWord<f64>, exact: &Dyadic) -> Value {
    let err = if exact.is_zero() && z.value().is_zero() { 0.0 } else { rel_error(&z, exact) };
    let u = 2f64.powi(-53);
    json!({
        "hi": z.hi,
        "lo": z.lo,
        "hi_hex": z.hi.to_hex(),
        "lo_hex": z.lo.to_hex(),
        "exact_hex": exact.to_string(),
        "rel_error": err,
        "rel_error_over_u2": err / (u * u),
    })
}

pub fn add_json(x: &str, y: &str, algorithm: &str) -> Result<String> {
    let (x, y) = (parse_dw(x)?, parse_dw(y)?);
    let z = match algorithm {
        "sloppy" => sloppy_add(&mut Native, x, y, TwoSumImpl::Standard),
        "accurate" => accurate_add(&mut Native, x, y, TwoSumImpl::Standard),
        _ => return Err(Error::Parse(format!("unknown algorithm {algorithm:?}"))),
    };
    Ok(result_json(z, &(x.value() + y.value())).to_string())
}

pub fn mul_json(x: &str, y: &str, normalize: bool) -> Result<String> {
    let (x, y) = (parse_dw(x)?, parse_dw(y)?);
    let z = dw_mul(&mut Native, x, y, normalize, false);
    let mut v = result_json(z, &(x.value() * y.value()));
    if z.hi != 0.0 {
        v["overlap_factor"] = json!(dwarith::dw::overlap_factor(&z, 2f64.powi(-53)));
    }
    Ok(v.to_string())
}

pub fn lemma2_json(p: u32) -> Result<String> {
    let r = check_lemma2(p)?;
    Ok(json!({
        "p": r.p,
        "cases": r.cases,
        "violations": r.violation_count,
        "sharpness": r.measurements.iter().map(|m| json!({ "name": m.name, "error_over_u": m.value })).collect::<Vec<_>>(),
    })
    .to_string())
}

fn js(r: Result<String>) -> std::result::Result<String, JsError> {
    r.map_err(|e| JsError::new(&e.to_string()))
}

/// Double-word sum with the `sloppy` or `accurate` algorithm.
#[wasm_bindgen]
pub fn add(x: &str, y: &str, algorithm: &str) -> std::result::Result<String, JsError> {
    js(add_json(x, y, algorithm))
}

/// Double-word product, optionally without its final normalization.
#[wasm_bindgen]
pub fn mul(x: &str, y: &str, normalize: bool) -> std::result::Result<String, JsError> {
    js(mul_json(x, y, normalize))
}

/// Exhaustive Fast2Sum exactness check at precision `p` (4..=12).
#[wasm_bindgen]
pub fn lemma2(p: u32) -> std::result::Result<String, JsError> {
    js(lemma2_json(p))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_decimal_and_hex() {
        assert_eq!(parse_dw("1.5 0x1p-60").unwrap(), DoubleWord::new(1.5, 2f64.powi(-60)));
        assert_eq!(parse_dw("0.25").unwrap(), DoubleWord::new(0.25, 0.0));
        assert!(parse_dw("").is_err());
        assert!(parse_dw("1 2 3").is_err());
        assert!(parse_dw("nan").is_err());
    }

    #[test]
    fn add_reproduces_the_tight_case() {
        let v: Value = serde_json::from_str(
            &add_json("+0x3000000000001p-49 +0x1p-53", "-0x10000000000003p-53 +0x10bfffffffffffp-152", "sloppy").unwrap(),
        )
        .unwrap();
        let e = v["rel_error_over_u2"].as_f64().unwrap();
        assert!((2.9999999999999..=3.0).contains(&e), "{e}");
        assert!(add_json("1", "2", "fast").is_err());
    }

    #[test]
    fn mul_and_lemma2() {
        let v: Value = serde_json::from_str(&mul_json("3", "0.1", true).unwrap()).unwrap();
        assert_eq!(v["hi"].as_f64().unwrap(), 3.0 * 0.1);
        let v: Value = serde_json::from_str(&lemma2_json(6).unwrap()).unwrap();
        assert_eq!(v["violations"], 0);
        assert!(lemma2_json(40).is_err());
    }
}
