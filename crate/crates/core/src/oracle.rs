//! Ground truth by direct iteration of the recurrence, plus verifiers that
//! compare the closed forms against it.

use std::collections::{BTreeMap, VecDeque};

use num_traits::Zero;
use thiserror::Error;

use crate::closed_form::{ClosedForm, Evaluator};
use crate::exactnum::Rational;
use crate::lattice::{BoundingBox, EquationSpec, FieldRow, InitialData, LatticePoint, SpecError};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum OracleError {
    #[error(transparent)]
    Spec(#[from] SpecError),
    #[error("support leaves the window on axis {axis} at time {time} (point {point})")]
    WindowOverflow {
        axis: usize,
        time: usize,
        point: LatticePoint,
    },
    #[error("window too small: {0}")]
    WindowTooSmall(String),
    #[error("missing value at {point}, time {time}")]
    MissingValue { point: LatticePoint, time: usize },
}

/// The most recent `time_order` rows of an evolution.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EvolutionState {
    /// Oldest first; `rows.back()` is the row at `time`.
    pub rows: VecDeque<FieldRow>,
    pub time: usize,
    pub window: BoundingBox,
}

impl EvolutionState {
    /// State after the initial rows, i.e. at time `k - 1`.
    pub fn start(
        spec: &EquationSpec,
        initial: &InitialData,
        window: BoundingBox,
    ) -> Result<Self, OracleError> {
        initial.check_against(spec)?;
        if window.dim() != spec.spatial_dim {
            return Err(SpecError::DimensionMismatch {
                expected: spec.spatial_dim,
                got: window.dim(),
            }
            .into());
        }
        for (t, row) in initial.rows.iter().enumerate() {
            check_inside(&window, row, t)?;
        }
        Ok(EvolutionState {
            rows: initial.rows.iter().cloned().collect(),
            time: spec.time_order - 1,
            window,
        })
    }

    pub fn newest(&self) -> &FieldRow {
        self.rows.back().expect("state holds at least one row")
    }
}

fn check_inside(window: &BoundingBox, row: &FieldRow, time: usize) -> Result<(), OracleError> {
    for (p, _) in row.iter() {
        if !window.contains(p) {
            let axis = (0..window.dim())
                .find(|&k| p.0[k] < window.lo[k] || p.0[k] > window.hi[k])
                .unwrap_or(0);
            return Err(OracleError::WindowOverflow {
                axis,
                time,
                point: p.clone(),
            });
        }
    }
    Ok(())
}

/// Advances by one time level: the new row at `e` is
/// `sum coeff * rows[level](e + offset - shift)`.
pub fn oracle_step(
    spec: &EquationSpec,
    state: &EvolutionState,
) -> Result<EvolutionState, OracleError> {
    if spec.implicit_corner {
        return Err(
            SpecError::Unsupported("implicit corner form; use oracle_sweep_implicit").into(),
        );
    }
    let mut next = FieldRow::zero(spec.spatial_dim);
    for entry in &spec.stencil {
        if entry.coeff.is_zero() {
            continue;
        }
        let displacement = spec.displacement(entry);
        for (p, v) in state.rows[entry.time_level].iter() {
            next.add_at(p.offset_by(&displacement), &entry.coeff * v);
        }
    }
    let time = state.time + 1;
    check_inside(&state.window, &next, time)?;
    let mut rows = state.rows.clone();
    rows.pop_front();
    rows.push_back(next);
    Ok(EvolutionState {
        rows,
        time,
        window: state.window.clone(),
    })
}

/// Rows for times `0..=t_max`; the first `time_order` are the inputs.
pub fn oracle_evolve(
    spec: &EquationSpec,
    initial: &InitialData,
    t_max: usize,
    window: &BoundingBox,
) -> Result<Vec<FieldRow>, OracleError> {
    let mut state = EvolutionState::start(spec, initial, window.clone())?;
    let mut out: Vec<FieldRow> = initial.rows.iter().take(t_max + 1).cloned().collect();
    while state.time < t_max {
        state = oracle_step(spec, &state)?;
        out.push(state.newest().clone());
    }
    Ok(out)
}

/// Window covering every point that can become nonzero up to `t_max`.
pub fn auto_window(
    spec: &EquationSpec,
    initial: &InitialData,
    t_max: usize,
) -> Result<BoundingBox, OracleError> {
    Ok(spec
        .influence_box(initial, t_max)?
        .unwrap_or_else(|| BoundingBox::point(&LatticePoint::origin(spec.spatial_dim))))
}

/// Left-vanishing solution of `U(i+1, j+1) = a U(i, j+1) + b U(i+1, j) + c U(i, j)`
/// on `window` (one-dimensional), rows `0..=j_max`. Each new row is swept left
/// to right from a zero at the window's left edge; values up to the right
/// edge are exact because the sweep never looks right.
pub fn oracle_sweep_implicit(
    a: &Rational,
    b: &Rational,
    c: &Rational,
    psi: &FieldRow,
    window: &BoundingBox,
    j_max: usize,
) -> Result<Vec<FieldRow>, OracleError> {
    if psi.dim() != 1 || window.dim() != 1 {
        return Err(SpecError::DimensionMismatch {
            expected: 1,
            got: if psi.dim() != 1 {
                psi.dim()
            } else {
                window.dim()
            },
        }
        .into());
    }
    let (lo, hi) = (window.lo[0], window.hi[0]);
    if let Some(support) = psi.support_box() {
        if lo >= support.lo[0] - j_max as i64 {
            return Err(OracleError::WindowTooSmall(format!(
                "left edge {lo} must lie strictly left of {}",
                support.lo[0] - j_max as i64
            )));
        }
        if support.hi[0] > hi {
            return Err(OracleError::WindowOverflow {
                axis: 0,
                time: 0,
                point: LatticePoint(vec![support.hi[0]]),
            });
        }
    }
    let mut rows = vec![psi.clone()];
    for _ in 0..j_max {
        let prev = rows.last().expect("row 0 present");
        let mut next = FieldRow::zero(1);
        let mut left = Rational::zero();
        for e in lo + 1..=hi {
            let value = a * &left
                + b * prev.value(&LatticePoint(vec![e]))
                + c * prev.value(&LatticePoint(vec![e - 1]));
            next.add_at(LatticePoint(vec![e]), value.clone());
            left = value;
        }
        rows.push(next);
    }
    Ok(rows)
}

/// Points and times to compare over.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Region {
    pub bounds: BoundingBox,
    pub t_min: usize,
    pub t_max: usize,
}

impl Region {
    pub fn iter(&self) -> impl Iterator<Item = (LatticePoint, usize)> + '_ {
        self.bounds
            .points()
            .flat_map(move |p| (self.t_min..=self.t_max).map(move |t| (p.clone(), t)))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Mismatch {
    pub point: LatticePoint,
    pub time: usize,
    pub closed: Rational,
    pub oracle: Rational,
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct VerifyReport {
    pub checked: usize,
    pub mismatches: Vec<Mismatch>,
    pub max_time: usize,
}

impl VerifyReport {
    pub fn passed(&self) -> bool {
        self.mismatches.is_empty()
    }
}

/// Oracle rows for times `0..=t_max` over a window that contains `region`.
pub fn oracle_rows(
    spec: &EquationSpec,
    initial: &InitialData,
    region_box: &BoundingBox,
    t_max: usize,
) -> Result<Vec<FieldRow>, OracleError> {
    if let Some((a, b, c)) = spec.implicit_coefficients() {
        let psi = &initial.rows[0];
        let mut window = region_box.clone();
        if let Some(support) = psi.support_box() {
            window = window.union(&support);
            window.lo[0] = window.lo[0].min(support.lo[0] - t_max as i64 - 1);
        }
        return oracle_sweep_implicit(&a, &b, &c, psi, &window, t_max);
    }
    let window = match spec.influence_box(initial, t_max)? {
        Some(influence) => influence.union(region_box),
        None => region_box.clone(),
    };
    oracle_evolve(spec, initial, t_max, &window)
}

/// Evaluates the chosen closed form and the oracle at every point of `region`
/// and records every disagreement.
pub fn verify_closed_vs_oracle(
    spec: &EquationSpec,
    initial: &InitialData,
    region: &Region,
    evaluator: Evaluator,
) -> Result<VerifyReport, OracleError> {
    let closed = ClosedForm::new(evaluator, spec, initial, region.t_max as u32)?;
    let rows = oracle_rows(spec, initial, &region.bounds, region.t_max)?;
    let mut report = VerifyReport {
        max_time: region.t_max,
        ..VerifyReport::default()
    };
    for (point, time) in region.iter() {
        let expected = rows[time].value(&point);
        let got = closed.value(&point, time as u32)?;
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

/// First point where the recurrence fails.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RecurrenceViolation {
    pub point: LatticePoint,
    pub time: usize,
    pub lhs: Rational,
    pub rhs: Rational,
}

/// Checks the defining relation at every `(point, time)` of `interior`
/// whose time is a computed (not initial) level, i.e. `time >= time_order`
/// (`time >= 1` for the implicit corner form). The relation is read with
/// `point` as the left-hand side lattice point `e + shift`.
pub fn verify_recurrence(
    values: &BTreeMap<(LatticePoint, usize), Rational>,
    spec: &EquationSpec,
    interior: &Region,
) -> Result<Option<RecurrenceViolation>, OracleError> {
    let lookup = |point: LatticePoint, time: usize| {
        values
            .get(&(point.clone(), time))
            .cloned()
            .ok_or(OracleError::MissingValue { point, time })
    };
    let k = spec.time_order;
    for (point, time) in interior.iter() {
        if time < k {
            continue;
        }
        let lhs = lookup(point.clone(), time)?;
        let mut rhs = Rational::zero();
        for entry in &spec.stencil {
            let source = point.offset_back(&spec.displacement(entry));
            let value = lookup(source, time - k + entry.time_level)?;
            rhs += &entry.coeff * value;
        }
        if lhs != rhs {
            return Ok(Some(RecurrenceViolation {
                point,
                time,
                lhs,
                rhs,
            }));
        }
    }
    Ok(None)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exactnum::{int, ratio};
    use crate::lattice::StencilEntry;

    fn delta() -> FieldRow {
        FieldRow::delta(1)
    }

    fn row(entries: &[(i64, Rational)]) -> FieldRow {
        FieldRow::from_entries(1, entries.iter().cloned()).unwrap()
    }

    fn window(lo: i64, hi: i64) -> BoundingBox {
        BoundingBox::new(vec![lo], vec![hi])
    }

    #[test]
    fn step_examples() {
        let psi = row(&[(-2, int(3)), (1, ratio(1, 2))]);
        let id = EquationSpec::identity(1);
        let state =
            EvolutionState::start(&id, &InitialData::single(psi.clone()), window(-5, 5)).unwrap();
        let next = oracle_step(&id, &state).unwrap();
        assert_eq!(next.newest(), &psi);
        assert_eq!(next.time, 1);

        let tri = EquationSpec::tridiagonal(int(1), int(2), int(3)).unwrap();
        let state =
            EvolutionState::start(&tri, &InitialData::single(delta()), window(-5, 5)).unwrap();
        let next = oracle_step(&tri, &state).unwrap();
        assert_eq!(
            next.newest(),
            &row(&[(-1, int(3)), (0, int(2)), (1, int(1))])
        );

        let heat = EquationSpec::tridiagonal(ratio(1, 4), ratio(1, 2), ratio(1, 4)).unwrap();
        let state =
            EvolutionState::start(&heat, &InitialData::single(delta()), window(-5, 5)).unwrap();
        let next = oracle_step(&heat, &state).unwrap();
        assert_eq!(
            next.newest(),
            &row(&[(-1, ratio(1, 4)), (0, ratio(1, 2)), (1, ratio(1, 4))])
        );
    }

    #[test]
    fn step_reports_overflow_axis() {
        let spec = EquationSpec::nine_point(&std::array::from_fn(|_| int(1))).unwrap();
        let init = InitialData::single(FieldRow::delta(2));
        let narrow = BoundingBox::new(vec![-3, 0], vec![3, 0]);
        let state = EvolutionState::start(&spec, &init, narrow).unwrap();
        match oracle_step(&spec, &state) {
            Err(OracleError::WindowOverflow { axis, time, .. }) => {
                assert_eq!(axis, 1);
                assert_eq!(time, 1);
            }
            other => panic!("expected overflow, got {other:?}"),
        }
    }

    #[test]
    fn evolve_examples() {
        let walk = EquationSpec::tridiagonal(ratio(1, 2), int(0), ratio(1, 2)).unwrap();
        let init = InitialData::single(delta());
        let rows = oracle_evolve(&walk, &init, 0, &window(-3, 3)).unwrap();
        assert_eq!(rows, vec![delta()]);
        let rows = oracle_evolve(&walk, &init, 2, &window(-3, 3)).unwrap();
        assert_eq!(
            rows[2],
            row(&[(-2, ratio(1, 4)), (0, ratio(1, 2)), (2, ratio(1, 4))])
        );

        let period_two = EquationSpec::two_row(&[[int(1), int(0)]], 0).unwrap();
        let init = InitialData::new(vec![delta(), FieldRow::zero(1)]);
        let rows = oracle_evolve(&period_two, &init, 3, &window(-1, 1)).unwrap();
        assert_eq!(
            rows,
            vec![delta(), FieldRow::zero(1), delta(), FieldRow::zero(1)]
        );
    }

    #[test]
    fn sweep_examples() {
        let psi = row(&[(0, int(2)), (3, int(-1))]);
        let rows =
            oracle_sweep_implicit(&int(4), &int(0), &int(0), &psi, &window(-6, 8), 3).unwrap();
        assert!(rows[1..].iter().all(FieldRow::is_zero));

        let rows =
            oracle_sweep_implicit(&int(0), &int(1), &int(1), &delta(), &window(-3, 4), 1).unwrap();
        assert_eq!(rows[1], row(&[(0, int(1)), (1, int(1))]));

        let err = oracle_sweep_implicit(&int(1), &int(1), &int(1), &delta(), &window(-2, 4), 2);
        assert!(matches!(err, Err(OracleError::WindowTooSmall(_))));
    }

    #[test]
    fn verify_identity_and_literal_tridiagonal() {
        let id = EquationSpec::identity(1);
        let init = InitialData::single(row(&[(-1, int(2)), (2, int(5))]));
        let region = Region {
            bounds: window(-4, 4),
            t_min: 0,
            t_max: 3,
        };
        let report = verify_closed_vs_oracle(&id, &init, &region, Evaluator::Auto).unwrap();
        assert!(report.passed());
        assert_eq!(report.checked, 9 * 4);

        let tri = EquationSpec::tridiagonal(int(1), int(2), int(3)).unwrap();
        let init = InitialData::single(delta());
        let region = Region {
            bounds: window(0, 0),
            t_min: 1,
            t_max: 1,
        };
        let report =
            verify_closed_vs_oracle(&tri, &init, &region, Evaluator::TridiagonalLiteral).unwrap();
        assert_eq!(
            report.mismatches,
            vec![Mismatch {
                point: LatticePoint(vec![0]),
                time: 1,
                closed: int(6),
                oracle: int(2),
            }]
        );
        let fixed = verify_closed_vs_oracle(&tri, &init, &region, Evaluator::Tridiagonal).unwrap();
        assert!(fixed.passed());
    }

    fn table(rows: &[FieldRow], bounds: &BoundingBox) -> BTreeMap<(LatticePoint, usize), Rational> {
        let mut values = BTreeMap::new();
        for (t, r) in rows.iter().enumerate() {
            for p in bounds.points() {
                values.insert((p.clone(), t), r.value(&p));
            }
        }
        values
    }

    #[test]
    fn recurrence_check_accepts_oracle_and_flags_fault() {
        let spec = EquationSpec::one_row(&[ratio(1, 3), int(2), int(-1)], 1).unwrap();
        let init = InitialData::single(row(&[(0, int(1)), (2, ratio(3, 2))]));
        let bounds = window(-10, 6);
        let rows = oracle_evolve(&spec, &init, 4, &bounds).unwrap();
        let mut values = table(&rows, &bounds);
        let interior = Region {
            bounds: window(-6, 4),
            t_min: 0,
            t_max: 4,
        };
        assert_eq!(verify_recurrence(&values, &spec, &interior).unwrap(), None);

        let key = (LatticePoint(vec![-1]), 3);
        *values.get_mut(&key).unwrap() += int(1);
        // the first broken equation in point order reads the bad value one step later
        let violation = verify_recurrence(&values, &spec, &interior)
            .unwrap()
            .unwrap();
        assert_eq!(
            (violation.point, violation.time),
            (LatticePoint(vec![-2]), 4)
        );
        let narrow = Region {
            bounds: window(-1, 4),
            t_min: 3,
            t_max: 3,
        };
        let violation = verify_recurrence(&values, &spec, &narrow).unwrap().unwrap();
        assert_eq!((violation.point, violation.time), key);

        let missing = Region {
            bounds: window(-20, -20),
            t_min: 1,
            t_max: 1,
        };
        assert!(matches!(
            verify_recurrence(&values, &spec, &missing),
            Err(OracleError::MissingValue { .. })
        ));
    }

    #[test]
    fn recurrence_check_implicit_form() {
        let spec = EquationSpec::implicit_corner(ratio(1, 2), int(-1), int(3)).unwrap();
        let psi = row(&[(0, int(1)), (1, int(2))]);
        let bounds = window(-6, 6);
        let rows =
            oracle_sweep_implicit(&ratio(1, 2), &int(-1), &int(3), &psi, &bounds, 3).unwrap();
        let values = table(&rows, &bounds);
        let interior = Region {
            bounds: window(-5, 6),
            t_min: 0,
            t_max: 3,
        };
        assert_eq!(verify_recurrence(&values, &spec, &interior).unwrap(), None);
    }

    #[test]
    fn mass_evolution() {
        let spec = EquationSpec::new(
            2,
            1,
            vec![1, 0],
            vec![
                StencilEntry::new(vec![0, 0], 0, ratio(2, 3)),
                StencilEntry::new(vec![1, -1], 0, int(-3)),
                StencilEntry::new(vec![2, 1], 0, ratio(1, 5)),
            ],
            false,
        )
        .unwrap();
        let psi = FieldRow::from_entries(2, [([0, 0], int(1)), ([1, 3], ratio(-7, 2))]).unwrap();
        let init = InitialData::single(psi);
        let rows = oracle_evolve(&spec, &init, 5, &auto_window(&spec, &init, 5).unwrap()).unwrap();
        let total = spec
            .stencil
            .iter()
            .fold(Rational::zero(), |acc, e| acc + &e.coeff);
        for w in rows.windows(2) {
            assert_eq!(w[1].total(), &total * w[0].total());
        }
        let again = oracle_evolve(&spec, &init, 5, &auto_window(&spec, &init, 5).unwrap()).unwrap();
        assert_eq!(rows, again);
        let wide = auto_window(&spec, &init, 5).unwrap().padded(4);
        assert_eq!(oracle_evolve(&spec, &init, 5, &wide).unwrap(), rows);
    }
}
