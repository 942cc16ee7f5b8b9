//! Explicit solution formulas.
//!
//! Each evaluator returns `U` at a single lattice point and time as an exact
//! finite sum over the initial data. Finite support of the initial rows is what
//! makes every bilateral sum finite.
//!
//! Three of the classical formulas only hold after a correction:
//!
//! * the tridiagonal solution needs `c^(j-m)`; the uncorrected `c^(j-n)` is
//!   kept as [`eval_tridiagonal_literal`] so the discrepancy stays reproducible;
//! * the one-row solution needs the argument shift `(m+1)j`;
//! * the implicit-corner kernel is the coefficient of `x^s y^j` in
//!   `sum_J (ax + by + cxy)^J` ([`kernel_p`]), not the product of binomials in
//!   [`kernel_p_literal`].
use num_traits::Zero;

use crate::combinatorics::{
    binomial, composition_weight, expand_stencil_power, Compositions, TermMap,
};
use crate::exactnum::{power_table, Rational};
use crate::lattice::{EquationSpec, FieldRow, InitialData, LatticePoint, SpecError};

fn check_dim(row: &FieldRow, dim: usize) -> Result<(), SpecError> {
    if row.dim() != dim {
        return Err(SpecError::DimensionMismatch {
            expected: dim,
            got: row.dim(),
        });
    }
    Ok(())
}

fn check_one_step(spec: &EquationSpec) -> Result<(), SpecError> {
    if spec.implicit_corner {
        return Err(SpecError::Unsupported(
            "implicit corner form; use eval_implicit",
        ));
    }
    if spec.time_order != 1 {
        return Err(SpecError::Unsupported(
            "one-step evaluator needs time_order 1",
        ));
    }
    Ok(())
}

fn big(n: num_bigint::BigUint) -> Rational {
    Rational::from_integer(n.into())
}

/// Sum over compositions `r` of `total` over `entries` entries of
/// `weight(r) * lookup(r)`; `lookup` returns `None` for a zero initial value so
/// the weight is only formed for contributing terms.
fn composition_sum<F>(powers: &[Vec<Rational>], total: u32, mut lookup: F) -> Rational
where
    F: FnMut(&[u32]) -> Option<Rational>,
{
    let mut acc = Rational::zero();
    let mut parts = vec![0u32; powers.len()];
    parts[powers.len() - 1] = total;
    loop {
        if let Some(value) = lookup(&parts) {
            let weight = composition_weight(&parts, powers);
            if !weight.is_zero() {
                acc += weight * value;
            }
        }
        if !Compositions::advance(&mut parts) {
            break;
        }
    }
    acc
}

/// General one-step solution in any spatial dimension:
/// `U(q, t) = sum_r multinomial(t; r) prod coeff^r Psi(q - a(r))` with
/// `a(r) = sum_e r_e (shift - offset_e)`.
pub fn eval_nd(
    spec: &EquationSpec,
    psi: &FieldRow,
    query: &LatticePoint,
    time: u32,
) -> Result<Rational, SpecError> {
    check_one_step(spec)?;
    check_dim(psi, spec.spatial_dim)?;
    if query.dim() != spec.spatial_dim {
        return Err(SpecError::DimensionMismatch {
            expected: spec.spatial_dim,
            got: query.dim(),
        });
    }
    let displacements: Vec<Vec<i64>> = spec.stencil.iter().map(|e| spec.displacement(e)).collect();
    let powers: Vec<Vec<Rational>> = spec
        .stencil
        .iter()
        .map(|e| power_table(&e.coeff, time as usize))
        .collect();
    let mut source = query.clone();
    Ok(composition_sum(&powers, time, |parts| {
        source.0.copy_from_slice(&query.0);
        for (e, &r) in parts.iter().enumerate() {
            if r == 0 {
                continue;
            }
            for (k, c) in source.0.iter_mut().enumerate() {
                *c -= i64::from(r) * displacements[e][k];
            }
        }
        psi.value_ref(&source).cloned()
    }))
}

/// Batch form of [`eval_nd`]: the collected expansion of the stencil symbol
/// is computed once per time level, after which a point costs one lookup per
/// nonzero initial value.
#[derive(Debug, Clone)]
pub struct NdSolution {
    spec: EquationSpec,
    psi: FieldRow,
    // powers[t] = P^t
    powers: Vec<TermMap>,
}

impl NdSolution {
    pub fn new(spec: &EquationSpec, psi: &FieldRow, t_max: u32) -> Result<Self, SpecError> {
        check_one_step(spec)?;
        check_dim(psi, spec.spatial_dim)?;
        let powers = (0..=t_max).map(|t| expand_stencil_power(spec, t)).collect();
        Ok(NdSolution {
            spec: spec.clone(),
            psi: psi.clone(),
            powers,
        })
    }

    pub fn t_max(&self) -> u32 {
        (self.powers.len() - 1) as u32
    }

    pub fn value(&self, query: &LatticePoint, time: u32) -> Result<Rational, SpecError> {
        if query.dim() != self.spec.spatial_dim {
            return Err(SpecError::DimensionMismatch {
                expected: self.spec.spatial_dim,
                got: query.dim(),
            });
        }
        let Some(power) = self.powers.get(time as usize) else {
            return eval_nd(&self.spec, &self.psi, query, time);
        };
        let mut exponent = crate::combinatorics::Monomial {
            spatial: vec![0; self.spec.spatial_dim],
            time: i64::from(time) * self.spec.time_order as i64,
        };
        let mut acc = Rational::zero();
        for (p, v) in self.psi.iter() {
            for k in 0..exponent.spatial.len() {
                exponent.spatial[k] = query.0[k] - p.0[k];
            }
            let c = power.coeff(&exponent);
            if !c.is_zero() {
                acc += c * v;
            }
        }
        Ok(acc)
    }

    /// Full row at `time`, supported on the translates of the expansion.
    pub fn row(&self, time: u32) -> Result<FieldRow, SpecError> {
        if time > self.t_max() {
            return Err(SpecError::Invalid(format!(
                "time {time} beyond prepared horizon {}",
                self.t_max()
            )));
        }
        let mut row = FieldRow::zero(self.spec.spatial_dim);
        for (p, v) in self.psi.iter() {
            for (m, c) in self.powers[time as usize].iter() {
                row.add_at(p.offset_by(&m.spatial), c * v);
            }
        }
        Ok(row)
    }
}

/// `U(i, j+1) = a U(i-1, j) + b U(i, j) + c U(i+1, j)` solved as
/// `sum_{m<=j} sum_{n<=m} C(j,m) C(m,n) a^n b^(m-n) c^(j-m) Psi(i+j-m-n)`.
pub fn eval_tridiagonal(
    a: &Rational,
    b: &Rational,
    c: &Rational,
    psi: &FieldRow,
    i: i64,
    j: u32,
) -> Result<Rational, SpecError> {
    tridiagonal_sum(a, b, c, psi, i, j, false)
}

/// The tridiagonal formula with the exponent of `c` taken as `j - n`, as in
/// the uncorrected formula. Does not solve the equation for `j >= 1`; kept
/// for the negative test and the CLI debug flag.
pub fn eval_tridiagonal_literal(
    a: &Rational,
    b: &Rational,
    c: &Rational,
    psi: &FieldRow,
    i: i64,
    j: u32,
) -> Result<Rational, SpecError> {
    tridiagonal_sum(a, b, c, psi, i, j, true)
}

fn tridiagonal_sum(
    a: &Rational,
    b: &Rational,
    c: &Rational,
    psi: &FieldRow,
    i: i64,
    j: u32,
    literal: bool,
) -> Result<Rational, SpecError> {
    check_dim(psi, 1)?;
    let n_max = j as usize;
    let (pa, pb, pc) = (
        power_table(a, n_max),
        power_table(b, n_max),
        power_table(c, n_max),
    );
    let j64 = i64::from(j);
    let mut acc = Rational::zero();
    for m in 0..=j64 {
        for n in 0..=m {
            let Some(value) = psi.value_ref(&LatticePoint(vec![i + j64 - m - n])) else {
                continue;
            };
            let c_exp = if literal { j64 - n } else { j64 - m };
            let weight = big(binomial(j64 as u64, m as u64) * binomial(m as u64, n as u64))
                * &pa[n as usize]
                * &pb[(m - n) as usize]
                * &pc[c_exp as usize];
            acc += weight * value;
        }
    }
    Ok(acc)
}

/// `U(i+m, j+1) = c_1 U(i, j) + ... + c_n U(i+n-1, j)` solved as
/// `sum_s multinomial(j; s) prod c_r^(s_r) Psi(i + sum r s_r - (m+1) j)`.
pub fn eval_one_row(
    coeffs: &[Rational],
    m: i64,
    psi: &FieldRow,
    i: i64,
    j: u32,
) -> Result<Rational, SpecError> {
    check_dim(psi, 1)?;
    if coeffs.is_empty() {
        return Err(SpecError::Invalid(
            "one-row equation needs at least one coefficient".into(),
        ));
    }
    let powers: Vec<Vec<Rational>> = coeffs.iter().map(|c| power_table(c, j as usize)).collect();
    let base = i - (m + 1) * i64::from(j);
    let mut point = LatticePoint(vec![0]);
    Ok(composition_sum(&powers, j, |parts| {
        let weighted: i64 = parts
            .iter()
            .enumerate()
            .map(|(r, &s)| (r as i64 + 1) * i64::from(s))
            .sum();
        point.0[0] = base + weighted;
        psi.value_ref(&point).cloned()
    }))
}

/// `Omega(k) = Psi(k) - a Psi(k-1)`.
pub fn omega(psi: &FieldRow, a: &Rational) -> Result<FieldRow, SpecError> {
    check_dim(psi, 1)?;
    Ok(psi.plus(&psi.translated(&[1]).scaled(&-a.clone())))
}

/// Coefficient of `x^s y^j` in `sum_J (ax + by + cxy)^J`:
/// `sum_{g <= min(s,j)} multinomial(s+j-g; s-g, j-g, g) a^(s-g) b^(j-g) c^g`.
pub fn kernel_p(s: u32, j: u32, a: &Rational, b: &Rational, c: &Rational) -> Rational {
    let mut acc = Rational::zero();
    for g in 0..=s.min(j) {
        let parts = [s - g, j - g, g];
        let term = big(crate::combinatorics::multinomial_of(&parts))
            * crate::exactnum::pow_u64(a, u64::from(s - g))
            * crate::exactnum::pow_u64(b, u64::from(j - g))
            * crate::exactnum::pow_u64(c, u64::from(g));
        acc += term;
    }
    acc
}

/// `p(s, t) = sum_{r<=t} C(s,t) C(t,r) a^(s-t) b^(t-r) c^t` in its
/// uncorrected form. Not a valid kernel; see the module
/// docs.
pub fn kernel_p_literal(s: u32, t: u32, a: &Rational, b: &Rational, c: &Rational) -> Rational {
    if t > s {
        return Rational::zero();
    }
    let mut acc = Rational::zero();
    for r in 0..=t {
        acc += big(binomial(s.into(), t.into()) * binomial(t.into(), r.into()))
            * crate::exactnum::pow_u64(a, u64::from(s - t))
            * crate::exactnum::pow_u64(b, u64::from(t - r))
            * crate::exactnum::pow_u64(c, u64::from(t));
    }
    acc
}

/// `U(i+1, j+1) = a U(i, j+1) + b U(i+1, j) + c U(i, j)`: the solution
/// `sum_{s >= 0} Omega(i - s) p(s, j)` that vanishes left of the initial
/// support on every row.
pub fn eval_implicit(
    a: &Rational,
    b: &Rational,
    c: &Rational,
    psi: &FieldRow,
    i: i64,
    j: u32,
) -> Result<Rational, SpecError> {
    let om = omega(psi, a)?;
    eval_implicit_with_omega(a, b, c, &om, i, j)
}

fn eval_implicit_with_omega(
    a: &Rational,
    b: &Rational,
    c: &Rational,
    om: &FieldRow,
    i: i64,
    j: u32,
) -> Result<Rational, SpecError> {
    let mut acc = Rational::zero();
    for (k, w) in om.iter() {
        let s = i - k.0[0];
        if s < 0 {
            // keys are sorted; the rest are further right
            break;
        }
        let s = u32::try_from(s)
            .map_err(|_| SpecError::Invalid(format!("kernel index {s} out of range")))?;
        let p = kernel_p(s, j, a, b, c);
        if !p.is_zero() {
            acc += p * w;
        }
    }
    Ok(acc)
}

/// Two-step equation `U(e + shift, t + 2) = sum coeff U(e + offset, t + level)`
/// with rows `Psi_0`, `Psi_1` at `t = 0, 1`.
///
/// `U(i, j)` is the coefficient of `x^i y^j` in `L(x, y) * sum_J P^J`, where
/// `L = Psi_0 + y Psi_1 - y sum_{level 1} coeff x^(shift-offset) Psi_0` and `P`
/// is the stencil symbol. A term of `P^J` has `y`-degree between `J` and `2J`,
/// so only `J` in `ceil(j/2) ..= j` reaches `y^j`; each composition is kept
/// only if its `y`-degree is exactly `j` (the `Psi_0` branch) or `j - 1` (the
/// `Psi_1` branch and its correction).
pub fn eval_two_row(
    spec: &EquationSpec,
    psi0: &FieldRow,
    psi1: &FieldRow,
    i: i64,
    j: u32,
) -> Result<Rational, SpecError> {
    if spec.implicit_corner || spec.time_order != 2 || spec.spatial_dim != 1 {
        return Err(SpecError::Unsupported(
            "two-row evaluator needs spatial_dim 1 and time_order 2",
        ));
    }
    check_dim(psi0, 1)?;
    check_dim(psi1, 1)?;
    match j {
        0 => return Ok(psi0.value(&LatticePoint(vec![i]))),
        1 => return Ok(psi1.value(&LatticePoint(vec![i]))),
        _ => {}
    }
    let entries = &spec.stencil;
    let disp: Vec<i64> = entries.iter().map(|e| spec.displacement(e)[0]).collect();
    let ydeg: Vec<u32> = entries.iter().map(|e| 2 - e.time_level as u32).collect();
    let powers: Vec<Vec<Rational>> = entries
        .iter()
        .map(|e| power_table(&e.coeff, j as usize))
        .collect();
    // Psi_1 - sum_{level 1} coeff Psi_0(. - disp), the y^1 part of L
    let mut lifted = psi1.clone();
    for (e, entry) in entries.iter().enumerate() {
        if entry.time_level == 1 {
            lifted = lifted.plus(&psi0.translated(&[disp[e]]).scaled(&-entry.coeff.clone()));
        }
    }

    let mut acc = Rational::zero();
    let mut point = LatticePoint(vec![0]);
    for (row, target) in [(psi0, j), (&lifted, j - 1)] {
        for order in target.div_ceil(2)..=target {
            acc += composition_sum(&powers, order, |parts| {
                let degree: u32 = parts.iter().zip(&ydeg).map(|(r, d)| r * d).sum();
                if degree != target {
                    return None;
                }
                let shift: i64 = parts
                    .iter()
                    .zip(&disp)
                    .map(|(&r, d)| i64::from(r) * d)
                    .sum();
                point.0[0] = i - shift;
                row.value_ref(&point).cloned()
            });
        }
    }
    Ok(acc)
}

/// Nine-point stencil in two dimensions (coefficient layout as in
/// [`EquationSpec::nine_point`]):
/// `U(i, j, k) = sum_s multinomial(k; s) prod c_r^(s_r) Psi(i - a, j - b)` with
/// `a = s1 - s3 + s4 - s6 + s7 - s9` and `b = s1 + s2 + s3 - s7 - s8 - s9`
/// (one-based `s`).
pub fn eval_ninepoint(
    c: &[Rational; 9],
    psi: &FieldRow,
    i: i64,
    j: i64,
    k: u32,
) -> Result<Rational, SpecError> {
    check_dim(psi, 2)?;
    let powers: Vec<Vec<Rational>> = c.iter().map(|x| power_table(x, k as usize)).collect();
    let mut point = LatticePoint(vec![0, 0]);
    Ok(composition_sum(&powers, k, |s| {
        let s: Vec<i64> = s.iter().map(|&x| i64::from(x)).collect();
        let a = s[0] - s[2] + s[3] - s[5] + s[6] - s[8];
        let b = s[0] + s[1] + s[2] - s[6] - s[7] - s[8];
        point.0[0] = i - a;
        point.0[1] = j - b;
        psi.value_ref(&point).cloned()
    }))
}

/// `U(i+s, j+t, k+1) = sum_{u,v} c[u][v] U(i+u, j+v, k)` (zero-based `u`, `v`):
/// `a = (s+1)k - sum (u+1) s_uv`, `b = (t+1)k - sum (v+1) s_uv`.
pub fn eval_2d_general(
    c: &[Vec<Rational>],
    s: i64,
    t: i64,
    psi: &FieldRow,
    query: (i64, i64),
    k: u32,
) -> Result<Rational, SpecError> {
    check_dim(psi, 2)?;
    let cols = c.first().map_or(0, Vec::len);
    if cols == 0 || c.iter().any(|row| row.len() != cols) {
        return Err(SpecError::Invalid(
            "coefficient matrix must be rectangular and nonempty".into(),
        ));
    }
    let flat: Vec<(i64, i64, &Rational)> = c
        .iter()
        .enumerate()
        .flat_map(|(u, row)| {
            row.iter()
                .enumerate()
                .map(move |(v, x)| (u as i64 + 1, v as i64 + 1, x))
        })
        .collect();
    let powers: Vec<Vec<Rational>> = flat
        .iter()
        .map(|(_, _, x)| power_table(x, k as usize))
        .collect();
    let k64 = i64::from(k);
    let mut point = LatticePoint(vec![0, 0]);
    Ok(composition_sum(&powers, k, |parts| {
        let mut sum_u = 0;
        let mut sum_v = 0;
        for (n, &r) in parts.iter().enumerate() {
            sum_u += flat[n].0 * i64::from(r);
            sum_v += flat[n].1 * i64::from(r);
        }
        let a = (s + 1) * k64 - sum_u;
        let b = (t + 1) * k64 - sum_v;
        point.0[0] = query.0 - a;
        point.0[1] = query.1 - b;
        psi.value_ref(&point).cloned()
    }))
}

/// Which closed form to evaluate an equation with.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Evaluator {
    /// Pick from the equation's shape: implicit, two-row, or n-dimensional.
    Auto,
    Nd,
    Tridiagonal,
    TridiagonalLiteral,
    OneRow,
    NinePoint,
    Grid2d,
    TwoRow,
    Implicit,
}

impl Evaluator {
    pub const ALL: [Evaluator; 9] = [
        Evaluator::Auto,
        Evaluator::Nd,
        Evaluator::Tridiagonal,
        Evaluator::TridiagonalLiteral,
        Evaluator::OneRow,
        Evaluator::NinePoint,
        Evaluator::Grid2d,
        Evaluator::TwoRow,
        Evaluator::Implicit,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Evaluator::Auto => "auto",
            Evaluator::Nd => "nd",
            Evaluator::Tridiagonal => "tridiagonal",
            Evaluator::TridiagonalLiteral => "tridiagonal-literal",
            Evaluator::OneRow => "one-row",
            Evaluator::NinePoint => "nine-point",
            Evaluator::Grid2d => "grid-2d",
            Evaluator::TwoRow => "two-row",
            Evaluator::Implicit => "implicit",
        }
    }

    pub fn from_name(name: &str) -> Option<Evaluator> {
        Evaluator::ALL.into_iter().find(|e| e.name() == name)
    }
}

/// Evaluator-specific parameters extracted from an [`EquationSpec`].
#[derive(Debug, Clone)]
enum Prepared {
    Nd(NdSolution),
    Tridiagonal {
        abc: [Rational; 3],
        literal: bool,
    },
    OneRow {
        coeffs: Vec<Rational>,
        m: i64,
    },
    NinePoint(Box<[Rational; 9]>),
    Grid2d {
        c: Vec<Vec<Rational>>,
        s: i64,
        t: i64,
    },
    TwoRow(EquationSpec),
    Implicit {
        abc: [Rational; 3],
        omega: FieldRow,
    },
}

/// A closed-form evaluator bound to one equation and its initial data.
#[derive(Debug, Clone)]
pub struct ClosedForm {
    evaluator: Evaluator,
    prepared: Prepared,
    initial: InitialData,
}

fn coeff_at(spec: &EquationSpec, offset: &[i64]) -> Rational {
    spec.stencil
        .iter()
        .find(|e| e.offset == offset)
        .map(|e| e.coeff.clone())
        .unwrap_or_else(Rational::zero)
}

impl ClosedForm {
    /// Binds `evaluator` to `spec`, checking that the equation has the shape
    /// the evaluator's formula is written for. `t_max` sizes the caches of
    /// the n-dimensional evaluator.
    pub fn new(
        evaluator: Evaluator,
        spec: &EquationSpec,
        initial: &InitialData,
        t_max: u32,
    ) -> Result<Self, SpecError> {
        initial.check_against(spec)?;
        let evaluator = match evaluator {
            Evaluator::Auto if spec.implicit_corner => Evaluator::Implicit,
            Evaluator::Auto if spec.time_order == 2 && spec.spatial_dim == 1 => Evaluator::TwoRow,
            Evaluator::Auto => Evaluator::Nd,
            other => other,
        };
        let explicit_one_step = !spec.implicit_corner && spec.time_order == 1;
        let all_offsets_in = |lo: i64, hi: i64| {
            spec.stencil
                .iter()
                .all(|e| e.offset.iter().all(|&o| lo <= o && o <= hi))
        };
        let unsupported = |what: &'static str| Err(SpecError::Unsupported(what));
        let prepared = match evaluator {
            Evaluator::Auto => unreachable!(),
            Evaluator::Nd => Prepared::Nd(NdSolution::new(spec, &initial.rows[0], t_max)?),
            Evaluator::Tridiagonal | Evaluator::TridiagonalLiteral => {
                if !(explicit_one_step
                    && spec.spatial_dim == 1
                    && spec.spatial_shift == [0]
                    && all_offsets_in(-1, 1))
                {
                    return unsupported("tridiagonal form needs offsets in -1..=1 and zero shift");
                }
                Prepared::Tridiagonal {
                    abc: [
                        coeff_at(spec, &[-1]),
                        coeff_at(spec, &[0]),
                        coeff_at(spec, &[1]),
                    ],
                    literal: evaluator == Evaluator::TridiagonalLiteral,
                }
            }
            Evaluator::OneRow => {
                if !(explicit_one_step && spec.spatial_dim == 1 && all_offsets_in(0, i64::MAX)) {
                    return unsupported("one-row form needs nonnegative offsets in one dimension");
                }
                let n = spec.stencil.iter().map(|e| e.offset[0]).max().unwrap_or(0) + 1;
                Prepared::OneRow {
                    coeffs: (0..n).map(|r| coeff_at(spec, &[r])).collect(),
                    m: spec.spatial_shift[0],
                }
            }
            Evaluator::NinePoint => {
                if !(explicit_one_step
                    && spec.spatial_dim == 2
                    && spec.spatial_shift == [0, 0]
                    && all_offsets_in(-1, 1))
                {
                    return unsupported(
                        "nine-point form needs 2D offsets in -1..=1 and zero shift",
                    );
                }
                let c: [Rational; 9] = std::array::from_fn(|r| {
                    coeff_at(spec, &[(r % 3) as i64 - 1, (r / 3) as i64 - 1])
                });
                Prepared::NinePoint(Box::new(c))
            }
            Evaluator::Grid2d => {
                if !(explicit_one_step && spec.spatial_dim == 2 && all_offsets_in(0, i64::MAX)) {
                    return unsupported("2D grid form needs nonnegative offsets in two dimensions");
                }
                let n = spec.stencil.iter().map(|e| e.offset[0]).max().unwrap_or(0) + 1;
                let m = spec.stencil.iter().map(|e| e.offset[1]).max().unwrap_or(0) + 1;
                let c = (0..n)
                    .map(|u| (0..m).map(|v| coeff_at(spec, &[u, v])).collect())
                    .collect();
                Prepared::Grid2d {
                    c,
                    s: spec.spatial_shift[0],
                    t: spec.spatial_shift[1],
                }
            }
            Evaluator::TwoRow => {
                if spec.implicit_corner || spec.time_order != 2 || spec.spatial_dim != 1 {
                    return unsupported("two-row form needs spatial_dim 1 and time_order 2");
                }
                Prepared::TwoRow(spec.clone())
            }
            Evaluator::Implicit => {
                let Some((a, b, c)) = spec.implicit_coefficients() else {
                    return unsupported("implicit evaluator needs the implicit corner form");
                };
                let omega = omega(&initial.rows[0], &a)?;
                Prepared::Implicit {
                    abc: [a, b, c],
                    omega,
                }
            }
        };
        Ok(ClosedForm {
            evaluator,
            prepared,
            initial: initial.clone(),
        })
    }

    pub fn evaluator(&self) -> Evaluator {
        self.evaluator
    }

    pub fn value(&self, query: &LatticePoint, time: u32) -> Result<Rational, SpecError> {
        let psi = &self.initial.rows[0];
        let expect_dim = psi.dim();
        if query.dim() != expect_dim {
            return Err(SpecError::DimensionMismatch {
                expected: expect_dim,
                got: query.dim(),
            });
        }
        let q = &query.0;
        match &self.prepared {
            Prepared::Nd(sol) => sol.value(query, time),
            Prepared::Tridiagonal {
                abc: [a, b, c],
                literal,
            } => tridiagonal_sum(a, b, c, psi, q[0], time, *literal),
            Prepared::OneRow { coeffs, m } => eval_one_row(coeffs, *m, psi, q[0], time),
            Prepared::NinePoint(c) => eval_ninepoint(c, psi, q[0], q[1], time),
            Prepared::Grid2d { c, s, t } => eval_2d_general(c, *s, *t, psi, (q[0], q[1]), time),
            Prepared::TwoRow(spec) => eval_two_row(spec, psi, &self.initial.rows[1], q[0], time),
            Prepared::Implicit {
                abc: [a, b, c],
                omega,
            } => eval_implicit_with_omega(a, b, c, omega, q[0], time),
        }
    }
}
