//! Map specs: inline JSON expressions, JSON files, or named constructions
//! written `name` or `name:{json params}`.

use std::path::Path;

use entrolab::constructions::{appendix_a_map, golden_twist, plateau_twist, rational_twist, square_piece, truncation_sequence, DEFAULT_M_CAP};
use entrolab::homeo::{affine, rotation_move, translation_move};
use entrolab::horseshoe::make_horseshoe;
use entrolab::{identity, HomeoExpr, HorseshoeSpec, Point, Rect};
use serde_json::Value;

use crate::CliError;

pub const NAMES: [&str; 10] = [
    "identity",
    "affine",
    "horseshoe",
    "rotation",
    "translation",
    "golden-twist",
    "rational-twist",
    "plateau-twist",
    "appendix-a",
    "appendix_a",
];

/// A resolved map with the domain its experiments sample by default: the
/// core box for horseshoes, the natural square otherwise.
#[derive(Clone, Debug)]
pub struct ResolvedMap {
    pub expr: HomeoExpr,
    pub spec: Option<HorseshoeSpec>,
    pub domain: Rect,
}

fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

fn num(params: &Value, key: &str, default: Option<f64>) -> Result<f64, CliError> {
    match params.get(key) {
        Some(v) => v.as_f64().ok_or_else(|| usage(format!("parameter {key} must be a number"))),
        None => default.ok_or_else(|| usage(format!("missing parameter {key}"))),
    }
}

fn count(params: &Value, key: &str, default: Option<usize>) -> Result<usize, CliError> {
    match params.get(key) {
        Some(v) => v.as_u64().map(|n| n as usize).ok_or_else(|| usage(format!("parameter {key} must be a non-negative integer"))),
        None => default.ok_or_else(|| usage(format!("missing parameter {key}"))),
    }
}

fn point(params: &Value, key: &str, default: Option<Point>) -> Result<Point, CliError> {
    match params.get(key) {
        Some(v) => serde_json::from_value::<[f64; 2]>(v.clone())
            .map(|[x, y]| Point::new(x, y))
            .map_err(|_| usage(format!("parameter {key} must be [x, y]"))),
        None => default.ok_or_else(|| usage(format!("missing parameter {key}"))),
    }
}

fn unit() -> Rect {
    Rect::square(0.0, 1.0).expect("unit square")
}

fn disk() -> Rect {
    Rect::square(-1.0, 1.0).expect("square")
}

fn named(name: &str, params: &Value) -> Result<ResolvedMap, CliError> {
    let plain = |expr: HomeoExpr, domain: Rect| ResolvedMap { expr, spec: None, domain };
    Ok(match name {
        "identity" => plain(identity(), unit()),
        "affine" => {
            let matrix: [[f64; 2]; 2] = serde_json::from_value(params.get("matrix").cloned().unwrap_or(Value::Null))
                .map_err(|_| usage("affine needs matrix [[a, b], [c, d]]"))?;
            plain(affine(matrix, point(params, "offset", Some(Point::ORIGIN))?)?, unit())
        }
        "horseshoe" => {
            let n = count(params, "N", Some(2))?;
            let lo = num(params, "lo", Some(1.0 / 3.0))?;
            let hi = num(params, "hi", Some(2.0 / 3.0))?;
            let r = Rect::square(lo, hi)?;
            let (expr, spec) = make_horseshoe(n, &r)?;
            let domain = spec.core.bounding_rect();
            ResolvedMap { expr, spec: Some(spec), domain }
        }
        "rotation" => {
            let c = point(params, "center", Some(Point::new(0.5, 0.5)))?;
            let expr = rotation_move(c, num(params, "angle", None)?, num(params, "r", Some(0.25))?)?;
            plain(expr, unit())
        }
        "translation" => {
            let p = point(params, "p", Some(Point::new(0.4, 0.5)))?;
            let q = point(params, "q", Some(Point::new(0.6, 0.5)))?;
            let expr = translation_move(p, q, num(params, "r1", Some(0.1))?, num(params, "r2", Some(0.3))?)?;
            plain(expr, unit())
        }
        "golden-twist" => plain(golden_twist(), disk()),
        "rational-twist" => {
            let p = count(params, "p", Some(2))? as u32;
            let q = count(params, "q", Some(5))? as u32;
            plain(rational_twist(p, q)?, disk())
        }
        "plateau-twist" => plain(plateau_twist(num(params, "turns", None)?)?, disk()),
        "appendix-a" | "appendix_a" => {
            let m = match params.get("m_max") {
                Some(_) => count(params, "m_max", None)?,
                None => count(params, "m", Some(4))?,
            };
            let cap = count(params, "cap", Some(DEFAULT_M_CAP))?;
            match params.get("from") {
                Some(_) => plain(truncation_sequence(count(params, "from", None)?, cap)?, unit()),
                None => {
                    let expr = appendix_a_map(m, None)?;
                    let (_, spec) = square_piece(m, m)?;
                    let domain = spec.core.bounding_rect();
                    ResolvedMap { expr, spec: Some(spec), domain }
                }
            }
        }
        other => return Err(usage(format!("unknown map name {other:?}; known: {}", NAMES.join(", ")))),
    })
}

/// Resolves a map spec. A leading `{` is an inline expression, a known
/// name (optionally followed by `:` and a JSON object) is a construction,
/// anything else is read as a path to an expression file.
pub fn resolve(spec: &str) -> Result<ResolvedMap, CliError> {
    let spec = spec.trim();
    if spec.starts_with('{') {
        let expr = HomeoExpr::from_json(spec).map_err(|e| usage(format!("malformed map JSON: {e}")))?;
        return Ok(ResolvedMap { expr, spec: None, domain: unit() });
    }
    let (name, params) = match spec.split_once(':') {
        Some((n, p)) if NAMES.contains(&n) => {
            let v: Value = serde_json::from_str(p).map_err(|e| usage(format!("malformed parameters for {n}: {e}")))?;
            if !v.is_object() {
                return Err(usage(format!("parameters for {n} must be a JSON object")));
            }
            (n, v)
        }
        _ if NAMES.contains(&spec) => (spec, Value::Object(Default::default())),
        _ => {
            let text = std::fs::read_to_string(Path::new(spec)).map_err(|e| usage(format!("cannot read map {spec:?}: {e}; known names: {}", NAMES.join(", "))))?;
            let expr = HomeoExpr::from_json(&text).map_err(|e| usage(format!("malformed map JSON in {spec:?}: {e}")))?;
            return Ok(ResolvedMap { expr, spec: None, domain: unit() });
        }
    };
    named(name, &params)
}
