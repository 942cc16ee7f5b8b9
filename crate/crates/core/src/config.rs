//! JSON run configuration.
//!
//! ```json
//! {
//!   "spatial_dim": 1, "time_order": 1, "spatial_shift": [0], "implicit_corner": false,
//!   "stencil": [{"offset": [-1], "time_level": 0, "coeff": "1/2"}, ...],
//!   "initial": {"rows": [[{"at": [0], "value": "1"}]]},
//!   "query": {"lo": [-3], "hi": [3], "t_min": 0, "t_max": 3},
//!   "engine": "verify",
//!   "evaluator": "auto",
//!   "window": {"lo": [-10], "hi": [10]},
//!   "output": {"format": "csv", "path": "out.csv"}
//! }
//! ```
//!
//! Instead of the equation fields a preset may be named:
//! `{"preset": "heat", "r": "1/4"}` or
//! `{"preset": "random-walk", "p": "1/2", "d": "0", "q": "1/2"}`. Presets
//! default to a unit mass at the origin. `{"builtin": "delta"}` is accepted
//! for `initial` in every case. The query box may be omitted, in which case
//! it covers every point that can be nonzero up to `t_max`.

use std::fmt;
use std::path::PathBuf;

use serde::de::{self, Deserializer};
use serde::Deserialize;
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::closed_form::Evaluator;
use crate::exactnum::{format_rational, parse_rational, Rational};
use crate::lattice::{
    BoundingBox, EquationSpec, FieldRow, InitialData, LatticePoint, SpecError, StencilEntry,
};
use crate::models::{heat_spec, random_walk_spec, HeatParams, ModelError, RandomWalkParams};
use crate::oracle::Region;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("config error at {path}: {message}")]
    Schema { path: String, message: String },
    #[error("invalid config: {0}")]
    Invalid(String),
    #[error(transparent)]
    Spec(#[from] SpecError),
    #[error(transparent)]
    Model(#[from] ModelError),
}

/// A rational written as `"p/q"` or `"p"`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RationalText(pub Rational);

impl<'de> Deserialize<'de> for RationalText {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        struct Visitor;
        impl de::Visitor<'_> for Visitor {
            type Value = RationalText;

            fn expecting(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str("a rational such as \"-3/4\" or an integer")
            }

            fn visit_str<E: de::Error>(self, v: &str) -> Result<RationalText, E> {
                parse_rational(v).map(RationalText).map_err(E::custom)
            }

            fn visit_i64<E: de::Error>(self, v: i64) -> Result<RationalText, E> {
                Ok(RationalText(crate::exactnum::int(v)))
            }

            fn visit_u64<E: de::Error>(self, v: u64) -> Result<RationalText, E> {
                Ok(RationalText(Rational::from_integer(v.into())))
            }
        }
        deserializer.deserialize_any(Visitor)
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawStencilEntry {
    offset: Vec<i64>,
    #[serde(default)]
    time_level: usize,
    coeff: RationalText,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawValue {
    at: Vec<i64>,
    value: RationalText,
}

#[derive(Debug, Deserialize)]
#[serde(untagged)]
enum RawInitial {
    Builtin { builtin: String },
    Rows { rows: Vec<Vec<RawValue>> },
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawPoint {
    at: Vec<i64>,
    t: usize,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawQuery {
    lo: Option<Vec<i64>>,
    hi: Option<Vec<i64>>,
    #[serde(default)]
    t_min: usize,
    t_max: Option<usize>,
    points: Option<Vec<RawPoint>>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawWindow {
    lo: Vec<i64>,
    hi: Vec<i64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawOutput {
    #[serde(default)]
    format: OutputFormat,
    path: Option<PathBuf>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    preset: Option<String>,
    r: Option<RationalText>,
    p: Option<RationalText>,
    d: Option<RationalText>,
    q: Option<RationalText>,

    spatial_dim: Option<usize>,
    time_order: Option<usize>,
    spatial_shift: Option<Vec<i64>>,
    #[serde(default)]
    implicit_corner: bool,
    stencil: Option<Vec<RawStencilEntry>>,

    initial: Option<RawInitial>,
    query: Option<RawQuery>,
    #[serde(default)]
    engine: Engine,
    evaluator: Option<String>,
    window: Option<RawWindow>,
    output: Option<RawOutput>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Engine {
    Closed,
    Oracle,
    #[default]
    Verify,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    #[default]
    Csv,
    Json,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Query {
    Region(Region),
    Points(Vec<(LatticePoint, usize)>),
}

impl Query {
    pub fn t_max(&self) -> usize {
        match self {
            Query::Region(r) => r.t_max,
            Query::Points(pts) => pts.iter().map(|(_, t)| *t).max().unwrap_or(0),
        }
    }

    /// `(point, time)` pairs ordered by point, then time.
    pub fn pairs(&self) -> Vec<(LatticePoint, usize)> {
        match self {
            Query::Region(r) => r.iter().collect(),
            Query::Points(pts) => {
                let mut v = pts.clone();
                v.sort();
                v.dedup();
                v
            }
        }
    }

    pub fn bounds(&self) -> Option<BoundingBox> {
        match self {
            Query::Region(r) => Some(r.bounds.clone()),
            Query::Points(pts) => pts
                .iter()
                .map(|(p, _)| BoundingBox::point(p))
                .reduce(|a, b| a.union(&b)),
        }
    }
}

#[derive(Debug, Clone)]
pub struct RunConfig {
    pub spec: EquationSpec,
    pub initial: InitialData,
    pub query: Query,
    pub engine: Engine,
    pub evaluator: Evaluator,
    pub window: Option<BoundingBox>,
    pub format: OutputFormat,
    pub output_path: Option<PathBuf>,
    /// Set for heat presets with `r > 1/2`.
    pub unstable: bool,
}

const DEFAULT_T_MAX: usize = 4;

fn schema_err(path: &str, message: impl Into<String>) -> ConfigError {
    ConfigError::Schema {
        path: path.to_owned(),
        message: message.into(),
    }
}

fn required<T>(value: Option<T>, path: &str) -> Result<T, ConfigError> {
    value.ok_or_else(|| schema_err(path, "missing field"))
}

pub fn parse_config(document: &str) -> Result<RunConfig, ConfigError> {
    let mut de = serde_json::Deserializer::from_str(document);
    let raw: RawConfig = serde_path_to_error::deserialize(&mut de).map_err(|e| {
        let path = e.path().to_string();
        schema_err(&path, e.into_inner().to_string())
    })?;
    build(raw)
}

fn build(raw: RawConfig) -> Result<RunConfig, ConfigError> {
    let mut unstable = false;
    let spec = match raw.preset.as_deref() {
        Some(preset) => {
            if raw.stencil.is_some() || raw.spatial_dim.is_some() || raw.time_order.is_some() {
                return Err(ConfigError::Invalid(
                    "a preset cannot be combined with explicit equation fields".into(),
                ));
            }
            match preset {
                "heat" => {
                    let params = HeatParams::new(required(raw.r, "r")?.0)?;
                    unstable = !params.is_stable();
                    heat_spec(&params)
                }
                "random-walk" => {
                    let params = RandomWalkParams::new(
                        required(raw.p, "p")?.0,
                        required(raw.d, "d")?.0,
                        required(raw.q, "q")?.0,
                    )?;
                    random_walk_spec(&params)
                }
                other => return Err(schema_err("preset", format!("unknown preset {other:?}"))),
            }
        }
        None => {
            let dim = required(raw.spatial_dim, "spatial_dim")?;
            let stencil = required(raw.stencil, "stencil")?
                .into_iter()
                .map(|e| StencilEntry::new(e.offset, e.time_level, e.coeff.0))
                .collect();
            EquationSpec::new(
                dim,
                raw.time_order.unwrap_or(1),
                raw.spatial_shift.unwrap_or_else(|| vec![0; dim]),
                stencil,
                raw.implicit_corner,
            )?
        }
    };
    let dim = spec.spatial_dim;

    let initial = match raw.initial {
        None if raw.preset.is_some() => InitialData::single(FieldRow::delta(dim)),
        None => return Err(schema_err("initial", "missing field")),
        Some(RawInitial::Builtin { builtin }) => {
            if builtin != "delta" {
                return Err(schema_err(
                    "initial.builtin",
                    format!("unknown builtin {builtin:?}"),
                ));
            }
            let mut rows = vec![FieldRow::delta(dim)];
            rows.resize(spec.time_order, FieldRow::zero(dim));
            InitialData::new(rows)
        }
        Some(RawInitial::Rows { rows }) => {
            let mut out = Vec::with_capacity(rows.len());
            for (t, row) in rows.into_iter().enumerate() {
                let mut field = FieldRow::zero(dim);
                for (n, v) in row.into_iter().enumerate() {
                    let p = LatticePoint(v.at);
                    let current = field.get(&p).map_err(|e| {
                        schema_err(&format!("initial.rows[{t}][{n}].at"), e.to_string())
                    })?;
                    field.set(p, current + v.value.0)?;
                }
                out.push(field);
            }
            InitialData::new(out)
        }
    };
    initial.check_against(&spec)?;

    let query = build_query(raw.query, &spec, &initial)?;

    let evaluator = match raw.evaluator.as_deref() {
        None => Evaluator::Auto,
        Some(name) => Evaluator::from_name(name)
            .ok_or_else(|| schema_err("evaluator", format!("unknown evaluator {name:?}")))?,
    };

    let window = match raw.window {
        None => None,
        Some(w) => {
            if w.lo.len() != dim || w.hi.len() != dim || w.lo.iter().zip(&w.hi).any(|(l, h)| l > h)
            {
                return Err(schema_err(
                    "window",
                    "lo/hi must have one entry per axis with lo <= hi",
                ));
            }
            Some(BoundingBox::new(w.lo, w.hi))
        }
    };

    let (format, output_path) = match raw.output {
        None => (OutputFormat::Csv, None),
        Some(o) => (o.format, o.path),
    };

    Ok(RunConfig {
        spec,
        initial,
        query,
        engine: raw.engine,
        evaluator,
        window,
        format,
        output_path,
        unstable,
    })
}

fn build_query(
    raw: Option<RawQuery>,
    spec: &EquationSpec,
    initial: &InitialData,
) -> Result<Query, ConfigError> {
    let dim = spec.spatial_dim;
    let raw = raw.unwrap_or(RawQuery {
        lo: None,
        hi: None,
        t_min: 0,
        t_max: None,
        points: None,
    });
    if let Some(points) = raw.points {
        if raw.lo.is_some() || raw.hi.is_some() || raw.t_max.is_some() {
            return Err(schema_err("query", "use either points or a box, not both"));
        }
        if points.is_empty() {
            return Err(schema_err("query.points", "empty point list"));
        }
        let mut out = Vec::with_capacity(points.len());
        for (n, p) in points.into_iter().enumerate() {
            if p.at.len() != dim {
                return Err(schema_err(
                    &format!("query.points[{n}].at"),
                    format!("expected {dim} coordinates"),
                ));
            }
            out.push((LatticePoint(p.at), p.t));
        }
        return Ok(Query::Points(out));
    }
    let t_max = raw.t_max.unwrap_or(DEFAULT_T_MAX);
    if raw.t_min > t_max {
        return Err(schema_err("query.t_min", "t_min exceeds t_max"));
    }
    let bounds = match (raw.lo, raw.hi) {
        (Some(lo), Some(hi)) => {
            if lo.len() != dim || hi.len() != dim || lo.iter().zip(&hi).any(|(l, h)| l > h) {
                return Err(schema_err(
                    "query",
                    "lo/hi must have one entry per axis with lo <= hi",
                ));
            }
            BoundingBox::new(lo, hi)
        }
        (None, None) => default_bounds(spec, initial, t_max)?,
        _ => return Err(schema_err("query", "lo and hi must be given together")),
    };
    Ok(Query::Region(Region {
        bounds,
        t_min: raw.t_min,
        t_max,
    }))
}

/// Every point that can be nonzero up to `t_max`. For the implicit corner
/// form the solution spreads right without bound, so the box is cut
/// `t_max + 2` cells past the initial support.
pub fn default_bounds(
    spec: &EquationSpec,
    initial: &InitialData,
    t_max: usize,
) -> Result<BoundingBox, ConfigError> {
    let origin = || BoundingBox::point(&LatticePoint::origin(spec.spatial_dim));
    if spec.implicit_corner {
        let support = initial.support_box().unwrap_or_else(origin);
        let reach = t_max as i64 + 2;
        return Ok(support.extended(&[-1], &[reach]));
    }
    Ok(spec.influence_box(initial, t_max)?.unwrap_or_else(origin))
}

/// Stable digest of the equation and initial data.
pub fn spec_hash(spec: &EquationSpec, initial: &InitialData) -> String {
    let mut text = format!(
        "dim={};order={};shift={:?};implicit={};",
        spec.spatial_dim, spec.time_order, spec.spatial_shift, spec.implicit_corner
    );
    for e in &spec.stencil {
        text.push_str(&format!(
            "e{:?}@{}={};",
            e.offset,
            e.time_level,
            format_rational(&e.coeff)
        ));
    }
    for (t, row) in initial.rows.iter().enumerate() {
        for (p, v) in row.iter() {
            text.push_str(&format!("r{t}{:?}={};", p.0, format_rational(v)));
        }
    }
    let digest = Sha256::digest(text.as_bytes());
    digest.iter().take(8).map(|b| format!("{b:02x}")).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exactnum::{int, ratio};

    const IDENTITY: &str = r#"{
        "spatial_dim": 1,
        "stencil": [{"offset": [0], "coeff": "1"}],
        "initial": {"builtin": "delta"}
    }"#;

    #[test]
    fn minimal_document_defaults_to_verify() {
        let cfg = parse_config(IDENTITY).unwrap();
        assert_eq!(cfg.engine, Engine::Verify);
        assert_eq!(cfg.spec, EquationSpec::identity(1));
        assert_eq!(cfg.initial, InitialData::single(FieldRow::delta(1)));
        assert_eq!(cfg.evaluator, Evaluator::Auto);
        assert_eq!(cfg.format, OutputFormat::Csv);
        match cfg.query {
            Query::Region(r) => {
                assert_eq!(r.bounds, BoundingBox::new(vec![0], vec![0]));
                assert_eq!(r.t_max, DEFAULT_T_MAX);
            }
            other => panic!("unexpected query {other:?}"),
        }
    }

    #[test]
    fn zero_denominator_reports_path() {
        let doc = r#"{
            "spatial_dim": 1,
            "stencil": [{"offset": [0], "coeff": "1"}, {"offset": [1], "coeff": "1/0"}],
            "initial": {"builtin": "delta"}
        }"#;
        match parse_config(doc) {
            Err(ConfigError::Schema { path, message }) => {
                assert_eq!(path, "stencil[1].coeff");
                assert!(message.contains("zero denominator"), "{message}");
            }
            other => panic!("expected schema error, got {other:?}"),
        }
    }

    #[test]
    fn presets() {
        let cfg = parse_config(r#"{"preset": "heat", "r": "1/4", "query": {"t_max": 2}}"#).unwrap();
        assert_eq!(
            cfg.spec,
            EquationSpec::tridiagonal(ratio(1, 4), ratio(1, 2), ratio(1, 4)).unwrap()
        );
        assert!(!cfg.unstable);
        let hot = parse_config(r#"{"preset": "heat", "r": "3/4"}"#).unwrap();
        assert!(hot.unstable);
        let walk =
            parse_config(r#"{"preset": "random-walk", "p": "1/2", "d": 0, "q": "1/2"}"#).unwrap();
        assert_eq!(walk.spec.stencil[1].coeff, int(0));
        assert!(matches!(
            parse_config(r#"{"preset": "random-walk", "p": "1/2", "d": "1/2", "q": "1/2"}"#),
            Err(ConfigError::Model(_))
        ));
        assert!(matches!(
            parse_config(r#"{"preset": "heat"}"#),
            Err(ConfigError::Schema { .. })
        ));
    }

    #[test]
    fn schema_violations() {
        let unknown =
            r#"{"spatial_dim": 1, "stencil": [], "initial": {"builtin": "delta"}, "bogus": 1}"#;
        assert!(matches!(
            parse_config(unknown),
            Err(ConfigError::Schema { .. })
        ));
        let empty = r#"{"spatial_dim": 1, "stencil": [], "initial": {"builtin": "delta"}}"#;
        assert!(matches!(parse_config(empty), Err(ConfigError::Spec(_))));
        let bad_engine = r#"{"preset": "heat", "r": "1/4", "engine": "fast"}"#;
        match parse_config(bad_engine) {
            Err(ConfigError::Schema { path, .. }) => assert_eq!(path, "engine"),
            other => panic!("{other:?}"),
        }
        let wrong_rows = r#"{"spatial_dim": 1, "time_order": 2,
            "stencil": [{"offset": [0], "coeff": "1"}],
            "initial": {"rows": [[{"at": [0], "value": "1"}]]}}"#;
        assert!(parse_config(wrong_rows).is_err());
    }

    #[test]
    fn explicit_rows_and_points() {
        let doc = r#"{
            "spatial_dim": 2,
            "spatial_shift": [1, 0],
            "stencil": [{"offset": [0, 0], "coeff": "-2/6"}],
            "initial": {"rows": [[{"at": [0, 1], "value": "3"}, {"at": [2, -1], "value": "-1/2"}]]},
            "query": {"points": [{"at": [3, 1], "t": 2}, {"at": [0, 0], "t": 1}]},
            "engine": "closed",
            "output": {"format": "json"}
        }"#;
        let cfg = parse_config(doc).unwrap();
        assert_eq!(cfg.spec.stencil[0].coeff, ratio(-1, 3));
        assert_eq!(cfg.initial.rows[0].support_len(), 2);
        assert_eq!(cfg.format, OutputFormat::Json);
        let pairs = cfg.query.pairs();
        assert_eq!(pairs[0], (LatticePoint(vec![0, 0]), 1));
        assert_eq!(cfg.query.t_max(), 2);
    }

    #[test]
    fn hash_is_stable_and_discriminating() {
        let a = parse_config(IDENTITY).unwrap();
        let b = parse_config(IDENTITY).unwrap();
        assert_eq!(
            spec_hash(&a.spec, &a.initial),
            spec_hash(&b.spec, &b.initial)
        );
        let heat = parse_config(r#"{"preset": "heat", "r": "1/4"}"#).unwrap();
        assert_ne!(
            spec_hash(&a.spec, &a.initial),
            spec_hash(&heat.spec, &heat.initial)
        );
        assert_eq!(spec_hash(&a.spec, &a.initial).len(), 16);
    }
}
