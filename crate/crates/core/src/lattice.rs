//! Lattice points, finite-support grid functions and equation specifications.

use std::collections::BTreeMap;
use std::fmt;

use num_traits::{One, Zero};
use thiserror::Error;

use crate::exactnum::Rational;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SpecError {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("invalid equation: {0}")]
    Invalid(String),
    #[error("evaluator does not apply to this equation: {0}")]
    Unsupported(&'static str),
}

/// A point of the spatial lattice `Z^d`. Ordered lexicographically.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct LatticePoint(pub Vec<i64>);

impl LatticePoint {
    pub fn origin(dim: usize) -> Self {
        LatticePoint(vec![0; dim])
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn coords(&self) -> &[i64] {
        &self.0
    }

    pub fn offset_by(&self, delta: &[i64]) -> LatticePoint {
        debug_assert_eq!(self.0.len(), delta.len());
        LatticePoint(self.0.iter().zip(delta).map(|(a, b)| a + b).collect())
    }

    pub fn offset_back(&self, delta: &[i64]) -> LatticePoint {
        debug_assert_eq!(self.0.len(), delta.len());
        LatticePoint(self.0.iter().zip(delta).map(|(a, b)| a - b).collect())
    }
}

impl From<Vec<i64>> for LatticePoint {
    fn from(v: Vec<i64>) -> Self {
        LatticePoint(v)
    }
}

impl From<i64> for LatticePoint {
    fn from(i: i64) -> Self {
        LatticePoint(vec![i])
    }
}

impl<const N: usize> From<[i64; N]> for LatticePoint {
    fn from(v: [i64; N]) -> Self {
        LatticePoint(v.to_vec())
    }
}

impl fmt::Display for LatticePoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (k, c) in self.0.iter().enumerate() {
            if k > 0 {
                write!(f, ",")?;
            }
            write!(f, "{c}")?;
        }
        write!(f, ")")
    }
}

/// Closed per-axis box `lo[k] ..= hi[k]`. Never empty; emptiness is `Option::None`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BoundingBox {
    pub lo: Vec<i64>,
    pub hi: Vec<i64>,
}

impl BoundingBox {
    pub fn new(lo: Vec<i64>, hi: Vec<i64>) -> Self {
        assert_eq!(lo.len(), hi.len());
        assert!(lo.iter().zip(&hi).all(|(l, h)| l <= h), "inverted box");
        BoundingBox { lo, hi }
    }

    pub fn point(p: &LatticePoint) -> Self {
        BoundingBox {
            lo: p.0.clone(),
            hi: p.0.clone(),
        }
    }

    pub fn dim(&self) -> usize {
        self.lo.len()
    }

    pub fn contains(&self, p: &LatticePoint) -> bool {
        p.dim() == self.dim()
            && p.0
                .iter()
                .zip(self.lo.iter().zip(&self.hi))
                .all(|(c, (l, h))| l <= c && c <= h)
    }

    pub fn contains_box(&self, other: &BoundingBox) -> bool {
        (0..self.dim()).all(|k| self.lo[k] <= other.lo[k] && other.hi[k] <= self.hi[k])
    }

    pub fn union(&self, other: &BoundingBox) -> BoundingBox {
        BoundingBox {
            lo: self
                .lo
                .iter()
                .zip(&other.lo)
                .map(|(a, b)| *a.min(b))
                .collect(),
            hi: self
                .hi
                .iter()
                .zip(&other.hi)
                .map(|(a, b)| *a.max(b))
                .collect(),
        }
    }

    /// Box grown by `lo_delta` (added to `lo`) and `hi_delta` (added to `hi`).
    pub fn extended(&self, lo_delta: &[i64], hi_delta: &[i64]) -> BoundingBox {
        BoundingBox {
            lo: self.lo.iter().zip(lo_delta).map(|(a, d)| a + d).collect(),
            hi: self.hi.iter().zip(hi_delta).map(|(a, d)| a + d).collect(),
        }
    }

    pub fn padded(&self, pad: i64) -> BoundingBox {
        BoundingBox {
            lo: self.lo.iter().map(|a| a - pad).collect(),
            hi: self.hi.iter().map(|a| a + pad).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.lo
            .iter()
            .zip(&self.hi)
            .map(|(l, h)| (h - l + 1) as usize)
            .product()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// All points in lexicographic order.
    pub fn points(&self) -> BoxPoints<'_> {
        BoxPoints {
            bounds: self,
            next: Some(self.lo.clone()),
        }
    }
}

pub struct BoxPoints<'a> {
    bounds: &'a BoundingBox,
    next: Option<Vec<i64>>,
}

impl Iterator for BoxPoints<'_> {
    type Item = LatticePoint;

    fn next(&mut self) -> Option<LatticePoint> {
        let current = self.next.take()?;
        let mut succ = current.clone();
        let mut axis = succ.len();
        loop {
            if axis == 0 {
                break;
            }
            axis -= 1;
            if succ[axis] < self.bounds.hi[axis] {
                succ[axis] += 1;
                self.next = Some(succ);
                break;
            }
            succ[axis] = self.bounds.lo[axis];
        }
        Some(LatticePoint(current))
    }
}

fn union_opt(a: Option<BoundingBox>, b: &BoundingBox) -> Option<BoundingBox> {
    Some(match a {
        Some(a) => a.union(b),
        None => b.clone(),
    })
}

/// One time level of a grid function with finite support. Absent points are zero.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FieldRow {
    dim: usize,
    values: BTreeMap<LatticePoint, Rational>,
}

impl FieldRow {
    pub fn zero(dim: usize) -> Self {
        FieldRow {
            dim,
            values: BTreeMap::new(),
        }
    }

    /// Unit mass at the origin.
    pub fn delta(dim: usize) -> Self {
        let mut row = FieldRow::zero(dim);
        row.values
            .insert(LatticePoint::origin(dim), Rational::one());
        row
    }

    pub fn from_entries<I, P>(dim: usize, entries: I) -> Result<Self, SpecError>
    where
        I: IntoIterator<Item = (P, Rational)>,
        P: Into<LatticePoint>,
    {
        let mut row = FieldRow::zero(dim);
        for (p, v) in entries {
            let p = p.into();
            let current = row.get(&p)?;
            row.set(p, current + v)?;
        }
        Ok(row)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    fn check_dim(&self, p: &LatticePoint) -> Result<(), SpecError> {
        if p.dim() != self.dim {
            return Err(SpecError::DimensionMismatch {
                expected: self.dim,
                got: p.dim(),
            });
        }
        Ok(())
    }

    pub fn get(&self, p: &LatticePoint) -> Result<Rational, SpecError> {
        self.check_dim(p)?;
        Ok(self.value(p))
    }

    /// Like [`FieldRow::get`] for callers that already guarantee the dimension.
    pub(crate) fn value(&self, p: &LatticePoint) -> Rational {
        self.values.get(p).cloned().unwrap_or_else(Rational::zero)
    }

    pub(crate) fn value_ref(&self, p: &LatticePoint) -> Option<&Rational> {
        self.values.get(p)
    }

    pub fn set(&mut self, p: LatticePoint, v: Rational) -> Result<(), SpecError> {
        self.check_dim(&p)?;
        if v.is_zero() {
            self.values.remove(&p);
        } else {
            self.values.insert(p, v);
        }
        Ok(())
    }

    pub(crate) fn add_at(&mut self, p: LatticePoint, v: Rational) {
        match self.values.entry(p) {
            std::collections::btree_map::Entry::Vacant(slot) => {
                if !v.is_zero() {
                    slot.insert(v);
                }
            }
            std::collections::btree_map::Entry::Occupied(mut slot) => {
                *slot.get_mut() += v;
                if slot.get().is_zero() {
                    slot.remove();
                }
            }
        }
    }

    pub fn remove(&mut self, p: &LatticePoint) {
        self.values.remove(p);
    }

    pub fn is_zero(&self) -> bool {
        self.values.is_empty()
    }

    pub fn support_len(&self) -> usize {
        self.values.len()
    }

    /// Nonzero entries in lexicographic point order.
    pub fn iter(&self) -> impl Iterator<Item = (&LatticePoint, &Rational)> {
        self.values.iter()
    }

    /// Tight per-axis bounds of the nonzero entries, `None` for the zero field.
    pub fn support_box(&self) -> Option<BoundingBox> {
        let mut points = self.values.keys();
        let first = points.next()?;
        let mut bounds = BoundingBox::point(first);
        for p in points {
            for k in 0..self.dim {
                bounds.lo[k] = bounds.lo[k].min(p.0[k]);
                bounds.hi[k] = bounds.hi[k].max(p.0[k]);
            }
        }
        Some(bounds)
    }

    pub fn total(&self) -> Rational {
        self.values
            .values()
            .fold(Rational::zero(), |acc, v| acc + v)
    }

    pub fn max_value(&self) -> Option<Rational> {
        self.values.values().max().cloned()
    }

    /// `f(p - shift)`, i.e. the field moved by `shift`.
    pub fn translated(&self, shift: &[i64]) -> FieldRow {
        FieldRow {
            dim: self.dim,
            values: self
                .values
                .iter()
                .map(|(p, v)| (p.offset_by(shift), v.clone()))
                .collect(),
        }
    }

    pub fn scaled(&self, factor: &Rational) -> FieldRow {
        let mut out = FieldRow::zero(self.dim);
        if factor.is_zero() {
            return out;
        }
        for (p, v) in &self.values {
            out.values.insert(p.clone(), v * factor);
        }
        out
    }

    pub fn plus(&self, other: &FieldRow) -> FieldRow {
        assert_eq!(self.dim, other.dim);
        let mut out = self.clone();
        for (p, v) in &other.values {
            out.add_at(p.clone(), v.clone());
        }
        out
    }
}

/// Initial rows `Ψ_0, ..., Ψ_{k-1}` for a `k`-step recurrence.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InitialData {
    pub rows: Vec<FieldRow>,
}

impl InitialData {
    pub fn single(row: FieldRow) -> Self {
        InitialData { rows: vec![row] }
    }

    pub fn new(rows: Vec<FieldRow>) -> Self {
        InitialData { rows }
    }

    pub fn check_against(&self, spec: &EquationSpec) -> Result<(), SpecError> {
        if self.rows.len() != spec.time_order {
            return Err(SpecError::Invalid(format!(
                "equation needs {} initial rows, got {}",
                spec.time_order,
                self.rows.len()
            )));
        }
        for row in &self.rows {
            if row.dim() != spec.spatial_dim {
                return Err(SpecError::DimensionMismatch {
                    expected: spec.spatial_dim,
                    got: row.dim(),
                });
            }
        }
        Ok(())
    }

    pub fn support_box(&self) -> Option<BoundingBox> {
        self.rows
            .iter()
            .filter_map(FieldRow::support_box)
            .fold(None, |acc, b| union_opt(acc, &b))
    }
}

/// One term of the update rule: `coeff * U(e + offset - shift, t + time_level)`
/// contributes to `U(e, t + time_order)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StencilEntry {
    pub offset: Vec<i64>,
    pub time_level: usize,
    pub coeff: Rational,
}

impl StencilEntry {
    pub fn new(offset: Vec<i64>, time_level: usize, coeff: Rational) -> Self {
        StencilEntry {
            offset,
            time_level,
            coeff,
        }
    }
}

/// A linear constant-coefficient partial difference equation
///
/// ```text
/// U(e + shift, t + k) = sum over entries of coeff * U(e + offset, t + time_level)
/// ```
///
/// with `k = time_order`. With `implicit_corner` set the equation is the
/// one-dimensional corner form
///
/// ```text
/// U(i+1, j+1) = a U(i, j+1) + b U(i+1, j) + c U(i, j)
/// ```
///
/// whose right-hand side touches the row being computed. Its stencil is stored
/// relative to the updated point `e = i + 1` with zero shift: `b` at offset
/// `0`, `c` at offset `-1` on the old row (`time_level 0`), and `a` at offset
/// `-1` on the new row (`time_level 1`). That is the only place a time level
/// equal to `time_order` is allowed.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EquationSpec {
    pub spatial_dim: usize,
    pub time_order: usize,
    pub spatial_shift: Vec<i64>,
    pub stencil: Vec<StencilEntry>,
    pub implicit_corner: bool,
}

impl EquationSpec {
    pub fn new(
        spatial_dim: usize,
        time_order: usize,
        spatial_shift: Vec<i64>,
        stencil: Vec<StencilEntry>,
        implicit_corner: bool,
    ) -> Result<Self, SpecError> {
        let spec = EquationSpec {
            spatial_dim,
            time_order,
            spatial_shift,
            stencil,
            implicit_corner,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<(), SpecError> {
        let invalid = |msg: String| Err(SpecError::Invalid(msg));
        if self.spatial_dim == 0 {
            return invalid("spatial_dim must be at least 1".into());
        }
        if self.time_order == 0 {
            return invalid("time_order must be at least 1".into());
        }
        if self.spatial_shift.len() != self.spatial_dim {
            return Err(SpecError::DimensionMismatch {
                expected: self.spatial_dim,
                got: self.spatial_shift.len(),
            });
        }
        if self.stencil.iter().all(|e| e.coeff.is_zero()) {
            return invalid("stencil needs at least one nonzero coefficient".into());
        }
        for (n, entry) in self.stencil.iter().enumerate() {
            if entry.offset.len() != self.spatial_dim {
                return Err(SpecError::DimensionMismatch {
                    expected: self.spatial_dim,
                    got: entry.offset.len(),
                });
            }
            let max_level = if self.implicit_corner {
                self.time_order
            } else {
                self.time_order - 1
            };
            if entry.time_level > max_level {
                return invalid(format!(
                    "stencil entry {n}: time_level {} outside 0..={max_level}",
                    entry.time_level
                ));
            }
            if self.stencil[..n]
                .iter()
                .any(|e| e.offset == entry.offset && e.time_level == entry.time_level)
            {
                return invalid(format!(
                    "stencil entry {n}: duplicate (offset {:?}, time_level {})",
                    entry.offset, entry.time_level
                ));
            }
        }
        if self.implicit_corner {
            if self.spatial_dim != 1 || self.time_order != 1 {
                return invalid("implicit_corner requires spatial_dim 1 and time_order 1".into());
            }
            if self.spatial_shift != [0] {
                return invalid("implicit_corner requires spatial_shift [0]".into());
            }
            for (n, entry) in self.stencil.iter().enumerate() {
                let slot = (entry.offset[0], entry.time_level);
                if !matches!(slot, (-1, 1) | (0, 0) | (-1, 0)) {
                    return invalid(format!(
                        "stencil entry {n}: implicit_corner allows only offset -1 @ level 1 (a), \
                         offset 0 @ level 0 (b), offset -1 @ level 0 (c)"
                    ));
                }
            }
        }
        Ok(())
    }

    /// `U(i, j+1) = a U(i-1, j) + b U(i, j) + c U(i+1, j)`.
    pub fn tridiagonal(a: Rational, b: Rational, c: Rational) -> Result<Self, SpecError> {
        EquationSpec::new(
            1,
            1,
            vec![0],
            vec![
                StencilEntry::new(vec![-1], 0, a),
                StencilEntry::new(vec![0], 0, b),
                StencilEntry::new(vec![1], 0, c),
            ],
            false,
        )
    }

    /// `U(i+m, j+1) = c_1 U(i, j) + c_2 U(i+1, j) + ... + c_n U(i+n-1, j)`.
    pub fn one_row(coeffs: &[Rational], m: i64) -> Result<Self, SpecError> {
        let stencil = coeffs
            .iter()
            .enumerate()
            .map(|(r, c)| StencilEntry::new(vec![r as i64], 0, c.clone()))
            .collect();
        EquationSpec::new(1, 1, vec![m], stencil, false)
    }

    /// `U(i+m, j+2) = sum_{r,s} c[r][s] U(i+r, j+s)` with `c` given as `n` rows
    /// of two coefficients (`s = 0, 1`).
    pub fn two_row(coeffs: &[[Rational; 2]], m: i64) -> Result<Self, SpecError> {
        let mut stencil = Vec::new();
        for level in 0..2 {
            for (r, pair) in coeffs.iter().enumerate() {
                stencil.push(StencilEntry::new(
                    vec![r as i64],
                    level,
                    pair[level].clone(),
                ));
            }
        }
        EquationSpec::new(1, 2, vec![m], stencil, false)
    }

    /// Nine-point stencil; `c[r]` multiplies `U(i + dx, j + dy)` with
    /// `dx = r % 3 - 1`, `dy = r / 3 - 1` (row-major, `c[4]` is the centre).
    pub fn nine_point(c: &[Rational; 9]) -> Result<Self, SpecError> {
        let stencil = c
            .iter()
            .enumerate()
            .map(|(r, coeff)| {
                let dx = (r % 3) as i64 - 1;
                let dy = (r / 3) as i64 - 1;
                StencilEntry::new(vec![dx, dy], 0, coeff.clone())
            })
            .collect();
        EquationSpec::new(2, 1, vec![0, 0], stencil, false)
    }

    /// `U(i+s, j+t, k+1) = sum_{u,v} c[u][v] U(i+u, j+v, k)`.
    pub fn grid_2d(c: &[Vec<Rational>], s: i64, t: i64) -> Result<Self, SpecError> {
        let mut stencil = Vec::new();
        for (u, row) in c.iter().enumerate() {
            for (v, coeff) in row.iter().enumerate() {
                stencil.push(StencilEntry::new(
                    vec![u as i64, v as i64],
                    0,
                    coeff.clone(),
                ));
            }
        }
        EquationSpec::new(2, 1, vec![s, t], stencil, false)
    }

    /// `U(i+1, j+1) = a U(i, j+1) + b U(i+1, j) + c U(i, j)`.
    pub fn implicit_corner(a: Rational, b: Rational, c: Rational) -> Result<Self, SpecError> {
        EquationSpec::new(
            1,
            1,
            vec![0],
            vec![
                StencilEntry::new(vec![-1], 1, a),
                StencilEntry::new(vec![0], 0, b),
                StencilEntry::new(vec![-1], 0, c),
            ],
            true,
        )
    }

    pub fn identity(dim: usize) -> Self {
        EquationSpec::new(
            dim,
            1,
            vec![0; dim],
            vec![StencilEntry::new(vec![0; dim], 0, Rational::one())],
            false,
        )
        .expect("identity equation is valid")
    }

    /// `(a, b, c)` of the implicit corner form, missing entries being zero.
    pub fn implicit_coefficients(&self) -> Option<(Rational, Rational, Rational)> {
        if !self.implicit_corner {
            return None;
        }
        let find = |offset: i64, level: usize| {
            self.stencil
                .iter()
                .find(|e| e.offset[0] == offset && e.time_level == level)
                .map(|e| e.coeff.clone())
                .unwrap_or_else(Rational::zero)
        };
        Some((find(-1, 1), find(0, 0), find(-1, 0)))
    }

    /// `shift - offset` per entry: the lattice displacement that one application
    /// of the entry moves mass by.
    pub fn displacement(&self, entry: &StencilEntry) -> Vec<i64> {
        self.spatial_shift
            .iter()
            .zip(&entry.offset)
            .map(|(s, o)| s - o)
            .collect()
    }

    /// Per-axis (min, max) of `offset - shift` over explicit entries.
    fn reach(&self) -> (Vec<i64>, Vec<i64>) {
        let mut lo = vec![i64::MAX; self.spatial_dim];
        let mut hi = vec![i64::MIN; self.spatial_dim];
        for entry in &self.stencil {
            for k in 0..self.spatial_dim {
                let d = entry.offset[k] - self.spatial_shift[k];
                lo[k] = lo[k].min(d);
                hi[k] = hi[k].max(d);
            }
        }
        (lo, hi)
    }

    fn check_explicit(&self) -> Result<(), SpecError> {
        if self.implicit_corner {
            Err(SpecError::Unsupported(
                "the implicit corner form has an unbounded domain of dependence",
            ))
        } else {
            Ok(())
        }
    }

    /// Box containing every point that can be nonzero at times `0..=t_max`
    /// when starting from `initial`.
    pub fn influence_box(
        &self,
        initial: &InitialData,
        t_max: usize,
    ) -> Result<Option<BoundingBox>, SpecError> {
        self.check_explicit()?;
        initial.check_against(self)?;
        let Some(support) = initial.support_box() else {
            return Ok(None);
        };
        let steps = t_max.saturating_sub(self.time_order - 1) as i64;
        let (lo, hi) = self.reach();
        // mass at e moves to e - (offset - shift)
        let grow_lo: Vec<i64> = hi.iter().map(|h| -h * steps).collect();
        let grow_hi: Vec<i64> = lo.iter().map(|l| -l * steps).collect();
        let grow_lo: Vec<i64> = grow_lo.iter().map(|g| (*g).min(0)).collect();
        let grow_hi: Vec<i64> = grow_hi.iter().map(|g| (*g).max(0)).collect();
        Ok(Some(support.extended(&grow_lo, &grow_hi)))
    }
}

/// For each initial row `t < time_order`, a box outside which that row's
/// values cannot affect `U(query, time)`; `None` when the row cannot affect it
/// at all.
pub fn domain_of_dependence(
    spec: &EquationSpec,
    query: &LatticePoint,
    time: usize,
) -> Result<Vec<Option<BoundingBox>>, SpecError> {
    spec.check_explicit()?;
    if query.dim() != spec.spatial_dim {
        return Err(SpecError::DimensionMismatch {
            expected: spec.spatial_dim,
            got: query.dim(),
        });
    }
    let k = spec.time_order;
    if time < k {
        let mut out = vec![None; k];
        out[time] = Some(BoundingBox::point(query));
        return Ok(out);
    }
    // needed[t]: box of points at time t that the query depends on
    let mut needed: Vec<Option<BoundingBox>> = vec![None; time + 1];
    needed[time] = Some(BoundingBox::point(query));
    for t in (k..=time).rev() {
        let Some(bounds) = needed[t].take() else {
            continue;
        };
        for entry in spec.stencil.iter().filter(|e| !e.coeff.is_zero()) {
            let delta: Vec<i64> = entry
                .offset
                .iter()
                .zip(&spec.spatial_shift)
                .map(|(o, s)| o - s)
                .collect();
            let moved = bounds.extended(&delta, &delta);
            let target = t - k + entry.time_level;
            needed[target] = union_opt(needed[target].take(), &moved);
        }
    }
    needed.truncate(k);
    Ok(needed)
}
