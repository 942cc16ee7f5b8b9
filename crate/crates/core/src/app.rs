//! Running a configuration: value tables, verification reports and their
//! CSV/JSON renderings. The binary in `main.rs` is a thin wrapper over this.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::closed_form::ClosedForm;
use crate::combinatorics::expand_stencil_power;
use crate::config::{spec_hash, ConfigError, Engine, RunConfig};
use crate::exactnum::{format_rational, parse_rational, Rational};
use crate::lattice::{EquationSpec, FieldRow, InitialData, LatticePoint, SpecError};
use crate::models::{
    heat_profile, random_walk_distribution, HeatParams, ModelError, RandomWalkParams,
};
use crate::oracle::{
    oracle_evolve, oracle_rows, oracle_sweep_implicit, Mismatch, OracleError, VerifyReport,
};

#[derive(Debug, Error)]
pub enum AppError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Spec(#[from] SpecError),
    #[error(transparent)]
    Oracle(#[from] OracleError),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("malformed table: {0}")]
    Table(String),
}

/// Values at `(point, time)`, ordered by point and then time.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Table {
    pub dim: usize,
    pub spec_hash: String,
    pub rows: Vec<(LatticePoint, usize, Rational)>,
}

fn oracle_for(cfg: &RunConfig) -> Result<Vec<FieldRow>, AppError> {
    let t_max = cfg.query.t_max();
    let bounds = cfg.query.bounds().expect("queries are never empty");
    let rows = match &cfg.window {
        None => oracle_rows(&cfg.spec, &cfg.initial, &bounds, t_max)?,
        Some(window) => {
            if !window.contains_box(&bounds) {
                return Err(
                    OracleError::WindowTooSmall("window does not cover the query".into()).into(),
                );
            }
            match cfg.spec.implicit_coefficients() {
                Some((a, b, c)) => {
                    oracle_sweep_implicit(&a, &b, &c, &cfg.initial.rows[0], window, t_max)?
                }
                None => oracle_evolve(&cfg.spec, &cfg.initial, t_max, window)?,
            }
        }
    };
    Ok(rows)
}

fn closed_for(cfg: &RunConfig) -> Result<ClosedForm, AppError> {
    Ok(ClosedForm::new(
        cfg.evaluator,
        &cfg.spec,
        &cfg.initial,
        cfg.query.t_max() as u32,
    )?)
}

fn hash_of(cfg: &RunConfig) -> String {
    spec_hash(&cfg.spec, &cfg.initial)
}

/// Values on the query by the closed form or by the oracle. `Engine::Verify`
/// is treated as `Engine::Closed`; use [`verify`] to compare.
pub fn solve(cfg: &RunConfig, engine: Engine) -> Result<Table, AppError> {
    let pairs = cfg.query.pairs();
    let mut rows = Vec::with_capacity(pairs.len());
    if engine == Engine::Oracle {
        let grid = oracle_for(cfg)?;
        for (p, t) in pairs {
            let v = grid[t].get(&p)?;
            rows.push((p, t, v));
        }
    } else {
        let closed = closed_for(cfg)?;
        for (p, t) in pairs {
            let v = closed.value(&p, t as u32)?;
            rows.push((p, t, v));
        }
    }
    Ok(Table {
        dim: cfg.spec.spatial_dim,
        spec_hash: hash_of(cfg),
        rows,
    })
}

/// Compares the closed form with the oracle at every query pair.
pub fn verify(cfg: &RunConfig) -> Result<VerifyReport, AppError> {
    let closed = closed_for(cfg)?;
    let grid = oracle_for(cfg)?;
    let mut report = VerifyReport {
        max_time: cfg.query.t_max(),
        ..VerifyReport::default()
    };
    for (point, time) in cfg.query.pairs() {
        let got = closed.value(&point, time as u32)?;
        let expected = grid[time].get(&point)?;
        report.checked += 1;
        if got != expected {
            report.mismatches.push(Mismatch {
                point,
                time,
                closed: got,
                oracle: expected,
            });
        }
    }
    Ok(report)
}

pub fn render_report(report: &VerifyReport) -> String {
    let mut out = String::new();
    for m in &report.mismatches {
        let _ = writeln!(
            out,
            "mismatch at {} t={}: closed={} oracle={}",
            m.point,
            m.time,
            format_rational(&m.closed),
            format_rational(&m.oracle)
        );
    }
    let _ = writeln!(
        out,
        "{} checked, {} mismatches",
        report.checked,
        report.mismatches.len()
    );
    out
}

fn header(dim: usize) -> String {
    let mut cols: Vec<String> = (1..=dim).map(|k| format!("e{k}")).collect();
    cols.push("t".into());
    cols.push("value".into());
    cols.join(",")
}

pub fn render_csv(table: &Table) -> String {
    let mut out = format!("# spec-hash: {}\n{}\n", table.spec_hash, header(table.dim));
    for (p, t, v) in &table.rows {
        for c in &p.0 {
            let _ = write!(out, "{c},");
        }
        let _ = writeln!(out, "{t},{}", format_rational(v));
    }
    out
}

/// Inverse of [`render_csv`].
pub fn parse_csv(text: &str) -> Result<Table, AppError> {
    let bad = |msg: String| AppError::Table(msg);
    let mut lines = text.lines();
    let spec_hash = lines
        .next()
        .and_then(|l| l.strip_prefix("# spec-hash: "))
        .ok_or_else(|| bad("missing spec-hash comment".into()))?
        .to_owned();
    let head = lines.next().ok_or_else(|| bad("missing header".into()))?;
    let dim = head
        .split(',')
        .count()
        .checked_sub(2)
        .ok_or_else(|| bad("short header".into()))?;
    if head != header(dim) {
        return Err(bad(format!("unexpected header {head:?}")));
    }
    let mut rows = Vec::new();
    for (n, line) in lines.enumerate() {
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != dim + 2 {
            return Err(bad(format!("line {}: expected {} fields", n + 3, dim + 2)));
        }
        let coords = fields[..dim]
            .iter()
            .map(|f| f.parse::<i64>())
            .collect::<Result<Vec<_>, _>>()
            .map_err(|e| bad(format!("line {}: {e}", n + 3)))?;
        let t = fields[dim]
            .parse::<usize>()
            .map_err(|e| bad(format!("line {}: {e}", n + 3)))?;
        let v = parse_rational(fields[dim + 1]).map_err(|e| bad(format!("line {}: {e}", n + 3)))?;
        rows.push((LatticePoint(coords), t, v));
    }
    Ok(Table {
        dim,
        spec_hash,
        rows,
    })
}

#[derive(Serialize, Deserialize)]
struct JsonRow {
    point: Vec<i64>,
    t: usize,
    value: String,
}

#[derive(Serialize, Deserialize)]
struct JsonTable {
    spec_hash: String,
    spatial_dim: usize,
    rows: Vec<JsonRow>,
}

pub fn render_json(table: &Table) -> String {
    let doc = JsonTable {
        spec_hash: table.spec_hash.clone(),
        spatial_dim: table.dim,
        rows: table
            .rows
            .iter()
            .map(|(p, t, v)| JsonRow {
                point: p.0.clone(),
                t: *t,
                value: format_rational(v),
            })
            .collect(),
    };
    let mut s = serde_json::to_string_pretty(&doc).expect("plain data serializes");
    s.push('\n');
    s
}

pub fn parse_json(text: &str) -> Result<Table, AppError> {
    let doc: JsonTable = serde_json::from_str(text).map_err(|e| AppError::Table(e.to_string()))?;
    let rows = doc
        .rows
        .into_iter()
        .map(|r| {
            let v = parse_rational(&r.value).map_err(|e| AppError::Table(e.to_string()))?;
            Ok((LatticePoint(r.point), r.t, v))
        })
        .collect::<Result<Vec<_>, AppError>>()?;
    Ok(Table {
        dim: doc.spatial_dim,
        spec_hash: doc.spec_hash,
        rows,
    })
}

/// Coefficients of the `power`-th power of the stencil symbol, one line per
/// monomial: exponents of `x1..xd`, of `y`, then the coefficient.
pub fn render_expansion(spec: &EquationSpec, initial: &InitialData, power: u32) -> String {
    let dim = spec.spatial_dim;
    let mut cols: Vec<String> = (1..=dim).map(|k| format!("x{k}")).collect();
    cols.push("y".into());
    cols.push("coeff".into());
    let mut out = format!(
        "# spec-hash: {}\n{}\n",
        spec_hash(spec, initial),
        cols.join(",")
    );
    for (m, c) in expand_stencil_power(spec, power).iter() {
        for e in &m.spatial {
            let _ = write!(out, "{e},");
        }
        let _ = writeln!(out, "{},{}", m.time, format_rational(c));
    }
    out
}

fn table_from_rows(spec: &EquationSpec, initial: &InitialData, rows: &[FieldRow]) -> Table {
    let mut out: Vec<_> = rows
        .iter()
        .enumerate()
        .flat_map(|(t, row)| row.iter().map(move |(p, v)| (p.clone(), t, v.clone())))
        .collect();
    out.sort_by(|a, b| (&a.0, a.1).cmp(&(&b.0, b.1)));
    Table {
        dim: spec.spatial_dim,
        spec_hash: spec_hash(spec, initial),
        rows: out,
    }
}

/// Nonzero probabilities of a walk started at the origin, times `0..=steps`.
pub fn random_walk_table(params: &RandomWalkParams, steps: usize) -> Result<Table, AppError> {
    let rows = (0..=steps)
        .map(|j| random_walk_distribution(params, j))
        .collect::<Result<Vec<_>, _>>()?;
    let spec = crate::models::random_walk_spec(params);
    Ok(table_from_rows(
        &spec,
        &InitialData::single(FieldRow::delta(1)),
        &rows,
    ))
}

/// Nonzero temperatures from a unit spike at the origin, times `0..=steps`.
pub fn heat_table(params: &HeatParams, steps: usize) -> Result<Table, AppError> {
    let psi = FieldRow::delta(1);
    let rows = heat_profile(params, &psi, steps)?;
    let spec = crate::models::heat_spec(params);
    Ok(table_from_rows(&spec, &InitialData::single(psi), &rows))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::closed_form::Evaluator;
    use crate::config::parse_config;
    use crate::exactnum::{int, ratio};

    const TRIDIAGONAL: &str = r#"{
        "spatial_dim": 1,
        "stencil": [
            {"offset": [-1], "coeff": "1"},
            {"offset": [0], "coeff": "1"},
            {"offset": [1], "coeff": "1"}
        ],
        "initial": {"rows": [[{"at": [0], "value": "1"}, {"at": [1], "value": "2"}]]},
        "query": {"lo": [-3], "hi": [4], "t_max": 3}
    }"#;

    #[test]
    fn engines_agree_and_csv_round_trips() {
        let cfg = parse_config(TRIDIAGONAL).unwrap();
        let closed = solve(&cfg, Engine::Closed).unwrap();
        let oracle = solve(&cfg, Engine::Oracle).unwrap();
        assert_eq!(closed, oracle);
        assert_eq!(closed.rows.len(), 8 * 4);
        assert_eq!(parse_csv(&render_csv(&closed)).unwrap(), closed);
        assert_eq!(parse_json(&render_json(&closed)).unwrap(), closed);
        let report = verify(&cfg).unwrap();
        assert!(report.passed());
        assert_eq!(render_report(&report), "32 checked, 0 mismatches\n");
    }

    #[test]
    fn literal_tridiagonal_is_reported() {
        let doc = r#"{
            "spatial_dim": 1,
            "stencil": [
                {"offset": [-1], "coeff": "1"},
                {"offset": [0], "coeff": "2"},
                {"offset": [1], "coeff": "3"}
            ],
            "initial": {"builtin": "delta"},
            "query": {"points": [{"at": [0], "t": 1}]},
            "evaluator": "tridiagonal-literal"
        }"#;
        let cfg = parse_config(doc).unwrap();
        let report = verify(&cfg).unwrap();
        assert_eq!(report.mismatches.len(), 1);
        assert_eq!(report.mismatches[0].closed, int(6));
        assert_eq!(report.mismatches[0].oracle, int(2));
        assert!(render_report(&report).starts_with("mismatch at (0) t=1: closed=6 oracle=2\n"));
    }

    #[test]
    fn window_override() {
        let mut cfg = parse_config(TRIDIAGONAL).unwrap();
        cfg.window = Some(crate::lattice::BoundingBox::new(vec![-1], vec![1]));
        assert!(matches!(
            solve(&cfg, Engine::Oracle),
            Err(AppError::Oracle(OracleError::WindowTooSmall(_)))
        ));
        cfg.query = crate::config::Query::Points(vec![(LatticePoint(vec![0]), 3)]);
        cfg.window = Some(crate::lattice::BoundingBox::new(vec![-2], vec![2]));
        assert!(matches!(
            solve(&cfg, Engine::Oracle),
            Err(AppError::Oracle(OracleError::WindowOverflow {
                axis: 0,
                ..
            }))
        ));
    }

    #[test]
    fn implicit_config_verifies() {
        let doc = r#"{
            "spatial_dim": 1,
            "implicit_corner": true,
            "stencil": [
                {"offset": [-1], "time_level": 1, "coeff": "1/2"},
                {"offset": [0], "time_level": 0, "coeff": "1/3"},
                {"offset": [-1], "time_level": 0, "coeff": "-2"}
            ],
            "initial": {"rows": [[{"at": [0], "value": "1"}, {"at": [2], "value": "-1"}]]},
            "query": {"t_max": 4}
        }"#;
        let cfg = parse_config(doc).unwrap();
        assert_eq!(closed_for(&cfg).unwrap().evaluator(), Evaluator::Implicit);
        let report = verify(&cfg).unwrap();
        assert!(report.passed(), "{}", render_report(&report));
        assert!(report.checked > 0);
    }

    #[test]
    fn demos() {
        let walk = random_walk_table(&RandomWalkParams::symmetric(), 2).unwrap();
        let at_two: Vec<_> = walk
            .rows
            .iter()
            .filter(|r| r.1 == 2)
            .map(|r| r.2.clone())
            .collect();
        assert_eq!(at_two, vec![ratio(1, 4), ratio(1, 2), ratio(1, 4)]);
        let heat = heat_table(&HeatParams::new(ratio(1, 2)).unwrap(), 1).unwrap();
        assert_eq!(heat.rows.len(), 3);
    }

    #[test]
    fn expansion_listing() {
        let spec = EquationSpec::tridiagonal(int(1), int(2), int(1)).unwrap();
        let text = render_expansion(&spec, &InitialData::single(FieldRow::delta(1)), 2);
        let body: Vec<&str> = text.lines().skip(1).collect();
        assert_eq!(
            body,
            ["x1,y,coeff", "-2,2,1", "-1,2,4", "0,2,6", "1,2,4", "2,2,1"]
        );
    }
}
