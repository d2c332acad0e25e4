//! JSON formats for shapes, neighborhoods, configurations, crossing specs,
//! firing graphs and synthesis plans.
//!
//! Every emitted list is sorted, so equal values give identical bytes.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use serde_json::Value;
use thiserror::Error;

use sandcross::firing_graph::FiringGraph;
use sandcross::geometry::{format_rational, parse_rational, GeometryError, Point, Primitive, Rational, Shape};
use sandcross::grid::{Configuration, GridPoint, MovementVector, Neighborhood, NeighborhoodError};
use sandcross::synthesis::{CrossingPlan, PlanCase, Synthesis};
use sandcross::verify::{CrossingSpec, SpecError};

#[derive(Debug, Error)]
pub enum FormatError {
    #[error("invalid JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error("invalid rational {0:?}")]
    Rational(String),
    #[error("negative grain count at ({0}, {1})")]
    NegativeGrains(i64, i64),
    #[error("{0}")]
    Shape(#[from] GeometryError),
    #[error("{0}")]
    Neighborhood(#[from] NeighborhoodError),
    #[error("{0}")]
    Spec(#[from] SpecError),
    #[error("crossing spec needs either \"n\" or both \"width\" and \"height\"")]
    SpecSize,
    #[error("fire time listed for an arc endpoint that did not fire")]
    ArcEndpoint,
}

fn to_pretty<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("plain data serializes");
    s.push('\n');
    s
}

#[derive(Serialize, Deserialize)]
struct ConfigurationJson {
    cells: Vec<(i64, i64, i64)>,
}

pub fn configuration_to_json(c: &Configuration) -> String {
    let cells = c.iter().map(|(v, g)| (v.x, v.y, g as i64)).collect();
    to_pretty(&ConfigurationJson { cells })
}

/// Repeated cells add up.
pub fn configuration_from_json(text: &str) -> Result<Configuration, FormatError> {
    let raw: ConfigurationJson = serde_json::from_str(text)?;
    let mut c = Configuration::new();
    for (x, y, g) in raw.cells {
        if g < 0 {
            return Err(FormatError::NegativeGrains(x, y));
        }
        c.add_grains(GridPoint::new(x, y), g as u64);
    }
    Ok(c)
}

#[derive(Serialize, Deserialize)]
struct NeighborhoodJson {
    vectors: Vec<(i64, i64)>,
}

pub fn neighborhood_to_json(nb: &Neighborhood) -> String {
    let vectors = nb.vectors().iter().map(|m| (m.dx, m.dy)).collect();
    to_pretty(&NeighborhoodJson { vectors })
}

pub fn neighborhood_from_json(text: &str) -> Result<Neighborhood, FormatError> {
    let raw: NeighborhoodJson = serde_json::from_str(text)?;
    Ok(Neighborhood::new(raw.vectors.into_iter().map(|(dx, dy)| MovementVector::new(dx, dy)))?)
}

#[derive(Serialize, Deserialize)]
struct SpecJson {
    #[serde(skip_serializing_if = "Option::is_none")]
    n: Option<i64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    width: Option<i64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    height: Option<i64>,
    north: i64,
    east: i64,
    south: i64,
    west: i64,
}

pub fn spec_to_json(spec: &CrossingSpec) -> String {
    let (n, width, height) = if spec.is_square() {
        (Some(spec.width), None, None)
    } else {
        (None, Some(spec.width), Some(spec.height))
    };
    to_pretty(&SpecJson { n, width, height, north: spec.north, east: spec.east, south: spec.south, west: spec.west })
}

pub fn spec_from_json(text: &str) -> Result<CrossingSpec, FormatError> {
    let raw: SpecJson = serde_json::from_str(text)?;
    let (w, h) = match (raw.n, raw.width, raw.height) {
        (Some(n), None, None) => (n, n),
        (None, Some(w), Some(h)) => (w, h),
        _ => return Err(FormatError::SpecSize),
    };
    Ok(CrossingSpec::rect(w, h, raw.north, raw.east, raw.south, raw.west)?)
}

#[derive(Serialize, Deserialize)]
struct FiringGraphJson {
    fired: Vec<(i64, i64, u64)>,
    arcs: Vec<((i64, i64), (i64, i64))>,
}

fn graph_json(g: &FiringGraph) -> FiringGraphJson {
    FiringGraphJson {
        fired: g.fire_time.iter().map(|(v, &t)| (v.x, v.y, t)).collect(),
        arcs: g.arcs.iter().map(|(a, b)| ((a.x, a.y), (b.x, b.y))).collect(),
    }
}

fn graph_from(raw: FiringGraphJson) -> Result<FiringGraph, FormatError> {
    let fire_time: BTreeMap<GridPoint, u64> = raw.fired.into_iter().map(|(x, y, t)| (GridPoint::new(x, y), t)).collect();
    let arcs = raw
        .arcs
        .into_iter()
        .map(|((x1, y1), (x2, y2))| (GridPoint::new(x1, y1), GridPoint::new(x2, y2)))
        .collect::<std::collections::BTreeSet<_>>();
    if arcs.iter().any(|(a, b)| !fire_time.contains_key(a) || !fire_time.contains_key(b)) {
        return Err(FormatError::ArcEndpoint);
    }
    Ok(FiringGraph { fire_time, arcs })
}

pub fn firing_graph_to_json(g: &FiringGraph) -> String {
    to_pretty(&graph_json(g))
}

pub fn firing_graph_from_json(text: &str) -> Result<FiringGraph, FormatError> {
    graph_from(serde_json::from_str(text)?)
}

#[derive(Serialize, Deserialize)]
struct GraphPairJson {
    we: FiringGraphJson,
    ns: FiringGraphJson,
}

/// The west-to-east and north-to-south graphs as `{"we": .., "ns": ..}`.
pub fn graph_pair_to_json(we: &FiringGraph, ns: &FiringGraph) -> String {
    to_pretty(&GraphPairJson { we: graph_json(we), ns: graph_json(ns) })
}

pub fn graph_pair_from_json(text: &str) -> Result<(FiringGraph, FiringGraph), FormatError> {
    let raw: GraphPairJson = serde_json::from_str(text)?;
    Ok((graph_from(raw.we)?, graph_from(raw.ns)?))
}

fn rational_value(q: &Rational) -> Value {
    Value::String(format_rational(q))
}

fn point_value(p: &Point) -> Value {
    Value::Array(vec![rational_value(&p.x), rational_value(&p.y)])
}

fn rational_from(v: &Value) -> Result<Rational, FormatError> {
    let text = match v {
        Value::String(s) => s.clone(),
        Value::Number(n) if n.is_i64() => n.to_string(),
        other => return Err(FormatError::Rational(other.to_string())),
    };
    parse_rational(&text).map_err(|_| FormatError::Rational(text))
}

fn point_from(v: &Value) -> Result<Point, FormatError> {
    match v.as_array().map(Vec::as_slice) {
        Some([x, y]) => Ok(Point::new(rational_from(x)?, rational_from(y)?)),
        _ => Err(FormatError::Rational(v.to_string())),
    }
}

#[derive(Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
enum PrimitiveJson {
    Disk { c: Value, r: Value },
    Poly { v: Vec<Value> },
}

#[derive(Serialize, Deserialize)]
struct ShapeJson {
    primitives: Vec<PrimitiveJson>,
}

/// Rationals are written as `"p"` or `"p/q"` strings.
pub fn shape_to_json(shape: &Shape) -> String {
    let primitives = shape
        .primitives()
        .iter()
        .map(|p| match p {
            Primitive::Disk { center, radius } => PrimitiveJson::Disk { c: point_value(center), r: rational_value(radius) },
            Primitive::Polygon { vertices } => PrimitiveJson::Poly { v: vertices.iter().map(point_value).collect() },
        })
        .collect();
    to_pretty(&ShapeJson { primitives })
}

/// Accepts integers, decimal strings and `"p/q"` strings for coordinates.
pub fn shape_from_json(text: &str) -> Result<Shape, FormatError> {
    let raw: ShapeJson = serde_json::from_str(text)?;
    let mut prims = Vec::new();
    for p in raw.primitives {
        prims.push(match p {
            PrimitiveJson::Disk { c, r } => Primitive::disk(point_from(&c)?, rational_from(&r)?)?,
            PrimitiveJson::Poly { v } => Primitive::polygon(v.iter().map(point_from).collect::<Result<_, _>>()?)?,
        });
    }
    Ok(Shape::new(prims)?)
}

#[derive(Serialize)]
struct PlanJson {
    case: &'static str,
    h: Value,
    v_e: Value,
    s2_y: Value,
    v: Value,
    v1: Value,
    v2: Value,
    epsilon: Value,
    stage_ratios: Vec<Value>,
}

fn plan_json(plan: &CrossingPlan) -> PlanJson {
    PlanJson {
        case: match plan.case {
            PlanCase::QuadrantOne => "quadrant",
            PlanCase::Orthogonal => "orthogonal",
        },
        h: point_value(&plan.h),
        v_e: point_value(&plan.v_e),
        s2_y: point_value(&plan.s2_y),
        v: point_value(&plan.v),
        v1: point_value(&plan.v1),
        v2: point_value(&plan.v2),
        epsilon: rational_value(&plan.epsilon),
        stage_ratios: plan.stage_ratios.iter().map(rational_value).collect(),
    }
}

pub fn plan_to_json(plan: &CrossingPlan) -> String {
    to_pretty(&plan_json(plan))
}

#[derive(Serialize)]
struct SynthesisJson<'a> {
    ratio: Value,
    p: u64,
    spec: Value,
    plan: PlanJson,
    report: &'a sandcross::verify::CrossingReport,
    configuration: Value,
}

/// Everything needed to re-check a synthesized crossing, in one document.
pub fn synthesis_to_json(s: &Synthesis) -> String {
    let value = |text: String| serde_json::from_str::<Value>(&text).expect("own output parses");
    to_pretty(&SynthesisJson {
        ratio: rational_value(&s.ratio),
        p: s.neighborhood.p(),
        spec: value(spec_to_json(&s.spec)),
        plan: plan_json(&s.plan),
        report: &s.report,
        configuration: value(configuration_to_json(&s.configuration)),
    })
}

/// Reads either a bare configuration or a synthesis document.
pub fn configuration_from_any(text: &str) -> Result<Configuration, FormatError> {
    let v: Value = serde_json::from_str(text)?;
    match v.get("configuration") {
        Some(inner) => configuration_from_json(&inner.to_string()),
        None => configuration_from_json(text),
    }
}

/// Reads either a bare crossing spec or the spec of a synthesis document.
pub fn spec_from_any(text: &str) -> Result<CrossingSpec, FormatError> {
    let v: Value = serde_json::from_str(text)?;
    match v.get("spec") {
        Some(inner) => spec_from_json(&inner.to_string()),
        None => spec_from_json(text),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use sandcross::geometry::{rat, ratio};

    #[test]
    fn configuration_is_sorted() {
        let c = Configuration::from([((2, 0), 1), ((0, 5), 3), ((0, 1), 2)]);
        let text = configuration_to_json(&c);
        let compact: String = text.split_whitespace().collect();
        assert_eq!(compact, r#"{"cells":[[0,1,2],[0,5,3],[2,0,1]]}"#);
        assert_eq!(configuration_from_json(&text).unwrap(), c);
    }

    #[test]
    fn shape_accepts_numbers_and_strings() {
        let s = shape_from_json(r#"{"primitives":[{"disk":{"c":[0,"1/2"],"r":"0.25"}}]}"#).unwrap();
        assert_eq!(s, Shape::disk(Point::new(rat(0), ratio(1, 2)), ratio(1, 4)).unwrap());
        assert_eq!(shape_from_json(&shape_to_json(&s)).unwrap(), s);
    }

    #[test]
    fn spec_round_trip() {
        let spec = CrossingSpec::square(7, 3, 3, 3, 3).unwrap();
        assert_eq!(spec_from_json(&spec_to_json(&spec)).unwrap(), spec);
        let rect = CrossingSpec::rect(4, 6, 1, 2, 3, 0).unwrap();
        assert_eq!(spec_from_json(&spec_to_json(&rect)).unwrap(), rect);
        assert!(matches!(spec_from_json(r#"{"north":0,"east":0,"south":0,"west":0}"#), Err(FormatError::SpecSize)));
    }

    #[test]
    fn dangling_arc_is_rejected() {
        assert!(matches!(
            firing_graph_from_json(r#"{"fired":[[0,0,0]],"arcs":[[[0,0],[1,0]]]}"#),
            Err(FormatError::ArcEndpoint)
        ));
    }
}
