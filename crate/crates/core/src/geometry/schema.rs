//! JSON description of bodies.
//!
//! ```json
//! {"kind": "ball", "radius": 1.5}
//! {"kind": "hpolytope", "rows": [{"a": [1, 0], "b": 1}, {"a": [-1, 0], "b": 2}]}
//! {"kind": "polygon2d", "vertices": [[1, 0], [0, 1], [-1, -1]]}
//! {"kind": "cone", "alpha": 1.4, "eps": 0.1, "radius": 30}
//! {"kind": "combination", "lambda": 0.5, "left": {...}, "right": {...}}
//! ```
//!
//! A cone without `radius` is untruncated. A pair file holds two bodies
//! under the keys `k` and `l`.

use serde::{Deserialize, Serialize};
use serde_json::Value;

use super::{lazy_combination, Body};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum BodySpec {
    Ball {
        radius: f64,
    },
    Hpolytope {
        rows: Vec<RowSpec>,
    },
    Polygon2d {
        vertices: Vec<[f64; 2]>,
    },
    Cone {
        alpha: f64,
        eps: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        radius: Option<f64>,
    },
    Combination {
        lambda: f64,
        left: Box<BodySpec>,
        right: Box<BodySpec>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RowSpec {
    pub a: Vec<f64>,
    pub b: f64,
}

fn at(path: &str, field: &str, e: Error) -> Error {
    let msg = match e {
        Error::InvalidBody(m) | Error::InvalidParams(m) => m,
        other => other.to_string(),
    };
    Error::Schema { path: join(path, field), msg }
}

impl BodySpec {
    /// Validates and builds the body; errors name the offending field,
    /// prefixed by `path`.
    pub fn to_body(&self, path: &str) -> Result<Body> {
        match self {
            BodySpec::Ball { radius } => Body::ball(*radius).map_err(|e| at(path, "radius", e)),
            BodySpec::Hpolytope { rows } => {
                Body::hpolytope(rows.iter().map(|r| (r.a.clone(), r.b)).collect()).map_err(|e| at(path, "rows", e))
            }
            BodySpec::Polygon2d { vertices } => Body::polygon(vertices.clone()).map_err(|e| at(path, "vertices", e)),
            BodySpec::Cone { alpha, eps, radius } => {
                if !(*alpha > 0.0 && *alpha < std::f64::consts::FRAC_PI_2) {
                    return Err(at(path, "alpha", Error::InvalidBody(format!("must lie in (0, pi/2), got {alpha}"))));
                }
                if !(*eps >= 0.0) {
                    return Err(at(path, "eps", Error::InvalidBody(format!("must be >= 0, got {eps}"))));
                }
                Body::cone(*alpha, *eps, radius.unwrap_or(f64::INFINITY)).map_err(|e| at(path, "radius", e))
            }
            BodySpec::Combination { lambda, left, right } => {
                if !(0.0..=1.0).contains(lambda) {
                    return Err(at(path, "lambda", Error::InvalidParams(format!("must lie in [0, 1], got {lambda}"))));
                }
                let l = left.to_body(&join(path, "left"))?;
                let r = right.to_body(&join(path, "right"))?;
                Ok(lazy_combination(*lambda, &l, &r))
            }
        }
    }

    pub fn from_body(body: &Body) -> Self {
        match body {
            Body::Ball(b) => BodySpec::Ball { radius: b.radius() },
            Body::HPolytope(h) => {
                BodySpec::Hpolytope { rows: h.rows().map(|(a, b)| RowSpec { a: a.to_vec(), b }).collect() }
            }
            Body::Polygon(p) => BodySpec::Polygon2d { vertices: p.vertices().to_vec() },
            Body::Cone(c) => {
                BodySpec::Cone { alpha: c.alpha(), eps: c.eps(), radius: c.radius().is_finite().then(|| c.radius()) }
            }
            Body::Combination(c) => BodySpec::Combination {
                lambda: c.lambda(),
                left: Box::new(Self::from_body(c.left())),
                right: Box::new(Self::from_body(c.right())),
            },
        }
    }
}

fn join(prefix: &str, field: &str) -> String {
    match (prefix.is_empty(), field.is_empty() || field == ".") {
        (_, true) => prefix.to_string(),
        (true, false) => field.to_string(),
        (false, false) => format!("{prefix}.{field}"),
    }
}

fn fields<T: serde::de::DeserializeOwned>(value: Value, path: &str) -> Result<T> {
    serde_path_to_error::deserialize(value)
        .map_err(|e| Error::Schema { path: join(path, &e.path().to_string()), msg: e.into_inner().to_string() })
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct BallFields {
    radius: f64,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct HpolytopeFields {
    rows: Vec<RowSpec>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct PolygonFields {
    vertices: Vec<[f64; 2]>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ConeFields {
    alpha: f64,
    eps: f64,
    #[serde(default)]
    radius: Option<f64>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct CombinationFields {
    lambda: f64,
    left: Value,
    right: Value,
}

// Parsed in two stages (tag, then fields) so that errors inside a variant
// keep their full field path.
fn spec_from_value(value: Value, path: &str) -> Result<BodySpec> {
    let Value::Object(mut obj) = value else {
        return Err(Error::Schema { path: join(path, ""), msg: "expected a body object".into() });
    };
    let kind = match obj.remove("kind") {
        Some(Value::String(k)) => k,
        Some(_) => return Err(Error::Schema { path: join(path, "kind"), msg: "must be a string".into() }),
        None => return Err(Error::Schema { path: join(path, "kind"), msg: "missing field".into() }),
    };
    let rest = Value::Object(obj);
    Ok(match kind.as_str() {
        "ball" => {
            let f: BallFields = fields(rest, path)?;
            BodySpec::Ball { radius: f.radius }
        }
        "hpolytope" => BodySpec::Hpolytope { rows: fields::<HpolytopeFields>(rest, path)?.rows },
        "polygon2d" => BodySpec::Polygon2d { vertices: fields::<PolygonFields>(rest, path)?.vertices },
        "cone" => {
            let f: ConeFields = fields(rest, path)?;
            BodySpec::Cone { alpha: f.alpha, eps: f.eps, radius: f.radius }
        }
        "combination" => {
            let f: CombinationFields = fields(rest, path)?;
            BodySpec::Combination {
                lambda: f.lambda,
                left: Box::new(spec_from_value(f.left, &join(path, "left"))?),
                right: Box::new(spec_from_value(f.right, &join(path, "right"))?),
            }
        }
        other => {
            return Err(Error::Schema {
                path: join(path, "kind"),
                msg: format!("unknown kind `{other}`, expected one of ball, hpolytope, polygon2d, cone, combination"),
            })
        }
    })
}

fn parse_value(json: &str) -> Result<Value> {
    serde_json::from_str(json).map_err(|e| Error::Schema { path: String::new(), msg: e.to_string() })
}

pub fn parse_body_spec(json: &str) -> Result<BodySpec> {
    spec_from_value(parse_value(json)?, "")
}

pub fn parse_body(json: &str) -> Result<Body> {
    parse_body_spec(json)?.to_body("")
}

pub fn parse_pair(json: &str) -> Result<(Body, Body)> {
    let Value::Object(mut obj) = parse_value(json)? else {
        return Err(Error::Schema { path: String::new(), msg: "expected an object with keys k and l".into() });
    };
    if let Some(extra) = obj.keys().find(|k| *k != "k" && *k != "l") {
        return Err(Error::Schema { path: extra.clone(), msg: "unknown field, expected k or l".into() });
    }
    let mut take =
        |key: &str| obj.remove(key).ok_or_else(|| Error::Schema { path: key.to_string(), msg: "missing field".into() });
    let (k, l) = (take("k")?, take("l")?);
    Ok((spec_from_value(k, "k")?.to_body("k")?, spec_from_value(l, "l")?.to_body("l")?))
}

pub fn body_to_json(body: &Body) -> String {
    serde_json::to_string(&BodySpec::from_body(body)).expect("body specs always serialize")
}
