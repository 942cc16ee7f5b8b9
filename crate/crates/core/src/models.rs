//! Presets: the lattice random walk and the explicit discrete heat scheme.
//!
//! Both are the three-point equation `U(i, j+1) = a U(i-1, j) + b U(i, j) + c U(i+1, j)`.
//! Physical constraints are checked here, not in the general evaluators.

use num_traits::{One, Signed, Zero};
use thiserror::Error;

use crate::closed_form::{eval_tridiagonal, NdSolution};
use crate::exactnum::{ratio, Rational};
use crate::lattice::{EquationSpec, FieldRow, InitialData, LatticePoint, SpecError};
use crate::oracle::{auto_window, oracle_evolve, OracleError};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ModelError {
    #[error("invalid parameters: {0}")]
    Invalid(&'static str),
    #[error(transparent)]
    Spec(#[from] SpecError),
    #[error(transparent)]
    Oracle(#[from] OracleError),
    #[error("closed form and oracle disagree at {point}, time {time}")]
    CrossCheck { point: LatticePoint, time: usize },
}

/// Step probabilities: `p` to the right, `d` stay, `q` to the left.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RandomWalkParams {
    p: Rational,
    d: Rational,
    q: Rational,
}

impl RandomWalkParams {
    pub fn new(p: Rational, d: Rational, q: Rational) -> Result<Self, ModelError> {
        if p.is_negative() || d.is_negative() || q.is_negative() {
            return Err(ModelError::Invalid("probabilities must be nonnegative"));
        }
        if &p + &d + &q != Rational::one() {
            return Err(ModelError::Invalid("p + d + q must equal 1"));
        }
        Ok(RandomWalkParams { p, d, q })
    }

    pub fn symmetric() -> Self {
        RandomWalkParams {
            p: ratio(1, 2),
            d: Rational::zero(),
            q: ratio(1, 2),
        }
    }

    pub fn p(&self) -> &Rational {
        &self.p
    }

    pub fn d(&self) -> &Rational {
        &self.d
    }

    pub fn q(&self) -> &Rational {
        &self.q
    }
}

/// Conduction ratio `r`; the scheme is stable for `0 < r <= 1/2`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HeatParams {
    r: Rational,
    stable: bool,
}

impl HeatParams {
    pub fn new(r: Rational) -> Result<Self, ModelError> {
        if !r.is_positive() {
            return Err(ModelError::Invalid("r must be positive"));
        }
        let stable = r <= ratio(1, 2);
        Ok(HeatParams { r, stable })
    }

    pub fn r(&self) -> &Rational {
        &self.r
    }

    /// `false` when `r > 1/2`; such schemes are accepted but flagged.
    pub fn is_stable(&self) -> bool {
        self.stable
    }
}

/// `a(i, j+1) = p a(i-1, j) + d a(i, j) + q a(i+1, j)`.
pub fn random_walk_spec(params: &RandomWalkParams) -> EquationSpec {
    EquationSpec::tridiagonal(params.p.clone(), params.d.clone(), params.q.clone())
        .expect("probabilities summing to one are not all zero")
}

/// `U(i, j+1) - U(i, j) = r (U(i-1, j) - U(i, j)) + r (U(i+1, j) - U(i, j))`,
/// coefficients `(r, 1 - 2r, r)`.
pub fn heat_spec(params: &HeatParams) -> EquationSpec {
    let r = params.r.clone();
    let centre = Rational::one() - &r - &r;
    EquationSpec::tridiagonal(r.clone(), centre, r).expect("r > 0")
}

/// Position distribution after `j` steps from the origin, by the closed form,
/// checked against direct iteration.
pub fn random_walk_distribution(
    params: &RandomWalkParams,
    j: usize,
) -> Result<FieldRow, ModelError> {
    let spec = random_walk_spec(params);
    let start = InitialData::single(FieldRow::delta(1));
    let closed = NdSolution::new(&spec, &start.rows[0], j as u32)?.row(j as u32)?;
    let window = auto_window(&spec, &start, j)?;
    let oracle = oracle_evolve(&spec, &start, j, &window)?;
    if closed != oracle[j] {
        let point = window
            .points()
            .find(|p| closed.value_ref(p) != oracle[j].value_ref(p))
            .unwrap_or_else(|| LatticePoint::origin(1));
        return Err(ModelError::CrossCheck { point, time: j });
    }
    Ok(closed)
}

/// Temperature rows `0..=j_max` by direct iteration, with the last row
/// spot-checked against the closed form on its support.
pub fn heat_profile(
    params: &HeatParams,
    psi: &FieldRow,
    j_max: usize,
) -> Result<Vec<FieldRow>, ModelError> {
    let spec = heat_spec(params);
    let start = InitialData::single(psi.clone());
    let window = auto_window(&spec, &start, j_max)?;
    let rows = oracle_evolve(&spec, &start, j_max, &window)?;
    let last = &rows[j_max];
    let r = params.r.clone();
    let centre = Rational::one() - &r - &r;
    let probes = last
        .support_box()
        .map(|b| [b.lo[0], (b.lo[0] + b.hi[0]) / 2, b.hi[0]]);
    for i in probes.into_iter().flatten() {
        let point = LatticePoint(vec![i]);
        let closed = eval_tridiagonal(&r, &centre, &r, psi, i, j_max as u32)?;
        if closed != last.value(&point) {
            return Err(ModelError::CrossCheck { point, time: j_max });
        }
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exactnum::int;

    fn row(entries: &[(i64, Rational)]) -> FieldRow {
        FieldRow::from_entries(1, entries.iter().cloned()).unwrap()
    }

    fn coeffs(spec: &EquationSpec) -> Vec<Rational> {
        spec.stencil.iter().map(|e| e.coeff.clone()).collect()
    }

    #[test]
    fn presets_build_expected_stencils() {
        let walk = random_walk_spec(&RandomWalkParams::symmetric());
        assert_eq!(coeffs(&walk), vec![ratio(1, 2), int(0), ratio(1, 2)]);
        let lazy = RandomWalkParams::new(int(0), int(1), int(0)).unwrap();
        for j in 0..5 {
            assert_eq!(
                random_walk_distribution(&lazy, j).unwrap(),
                FieldRow::delta(1)
            );
        }
        let heat = heat_spec(&HeatParams::new(ratio(1, 4)).unwrap());
        assert_eq!(coeffs(&heat), vec![ratio(1, 4), ratio(1, 2), ratio(1, 4)]);
    }

    #[test]
    fn parameter_validation() {
        assert!(RandomWalkParams::new(ratio(1, 2), ratio(1, 2), ratio(1, 2)).is_err());
        assert!(RandomWalkParams::new(int(-1), int(1), int(1)).is_err());
        assert!(HeatParams::new(int(0)).is_err());
        assert!(HeatParams::new(ratio(1, 2)).unwrap().is_stable());
        let hot = HeatParams::new(ratio(3, 4)).unwrap();
        assert!(!hot.is_stable());
        assert!(heat_profile(&hot, &FieldRow::delta(1), 3).is_ok());
    }

    #[test]
    fn walk_distribution_examples() {
        let sym = RandomWalkParams::symmetric();
        assert_eq!(
            random_walk_distribution(&sym, 0).unwrap(),
            FieldRow::delta(1)
        );
        assert_eq!(
            random_walk_distribution(&sym, 2).unwrap(),
            row(&[(-2, ratio(1, 4)), (0, ratio(1, 2)), (2, ratio(1, 4))])
        );
        let skew = RandomWalkParams::new(ratio(1, 6), ratio(1, 3), ratio(1, 2)).unwrap();
        for j in 0..=8 {
            let dist = random_walk_distribution(&skew, j).unwrap();
            assert_eq!(dist.total(), int(1));
            assert!(dist.iter().all(|(_, v)| v.is_positive()));
        }
    }

    #[test]
    fn heat_examples() {
        let half = HeatParams::new(ratio(1, 2)).unwrap();
        let rows = heat_profile(&half, &FieldRow::delta(1), 1).unwrap();
        assert_eq!(rows[1], row(&[(-1, ratio(1, 2)), (1, ratio(1, 2))]));

        let quarter = HeatParams::new(ratio(1, 4)).unwrap();
        let rows = heat_profile(&quarter, &FieldRow::delta(1), 2).unwrap();
        assert_eq!(
            rows[2],
            row(&[
                (-2, ratio(1, 16)),
                (-1, ratio(1, 4)),
                (0, ratio(3, 8)),
                (1, ratio(1, 4)),
                (2, ratio(1, 16)),
            ])
        );
    }

    #[test]
    fn heat_total_and_symmetry() {
        let params = HeatParams::new(ratio(2, 7)).unwrap();
        let psi = row(&[(-2, int(1)), (0, int(5)), (2, int(1))]);
        let rows = heat_profile(&params, &psi, 10).unwrap();
        for r in &rows {
            assert_eq!(r.total(), int(7));
            for (p, v) in r.iter() {
                assert_eq!(&r.value(&LatticePoint(vec![-p.0[0]])), v);
            }
        }
        for w in rows.windows(2) {
            assert!(w[1].max_value() <= w[0].max_value());
        }
    }
}
