//! Test-side helpers: random instances and a reference evolution written
//! independently of the library's oracle.

#![allow(dead_code)]

use std::collections::BTreeMap;

use num_traits::Zero;
use rand::rngs::StdRng;
use rand::seq::SliceRandom;
use rand::Rng;

use pdex::exactnum::{ratio, Rational};
use pdex::lattice::{EquationSpec, FieldRow, InitialData, LatticePoint, StencilEntry};

pub type Grid = BTreeMap<Vec<i64>, Rational>;

/// Nonzero rational with numerator in [-5, 5] and denominator in [1, 5].
pub fn coeff(rng: &mut StdRng) -> Rational {
    loop {
        let num = rng.gen_range(-5..=5);
        if num != 0 {
            return ratio(num, rng.gen_range(1..=5));
        }
    }
}

/// All vectors in `[lo, hi]^dim`.
pub fn cube(dim: usize, lo: i64, hi: i64) -> Vec<Vec<i64>> {
    let mut out = vec![vec![]];
    for _ in 0..dim {
        out = out
            .into_iter()
            .flat_map(|v| {
                (lo..=hi).map(move |x| {
                    let mut w = v.clone();
                    w.push(x);
                    w
                })
            })
            .collect();
    }
    out
}

pub fn random_row(rng: &mut StdRng, dim: usize, max_len: usize, radius: i64) -> FieldRow {
    let mut cells = cube(dim, -radius, radius);
    cells.shuffle(rng);
    let len = rng.gen_range(1..=max_len.min(cells.len()));
    FieldRow::from_entries(dim, cells.into_iter().take(len).map(|p| (p, coeff(rng)))).unwrap()
}

/// One-step explicit equation with offsets in `[-1, 1]^dim`.
pub fn random_one_step(rng: &mut StdRng, dim: usize, max_stencil: usize) -> EquationSpec {
    let mut offsets = cube(dim, -1, 1);
    offsets.shuffle(rng);
    let len = rng.gen_range(1..=max_stencil.min(offsets.len()));
    let stencil = offsets
        .into_iter()
        .take(len)
        .map(|o| StencilEntry::new(o, 0, coeff(rng)))
        .collect();
    let shift = (0..dim).map(|_| rng.gen_range(-1..=1)).collect();
    EquationSpec::new(dim, 1, shift, stencil, false).unwrap()
}

pub fn to_grid(row: &FieldRow) -> Grid {
    row.iter().map(|(p, v)| (p.0.clone(), v.clone())).collect()
}

/// Rows `0..=t_max` of `U(e + shift, t + k) = sum c U(e + offset, t + level)`,
/// built by pushing each stored value forward along every stencil entry.
pub fn reference_rows(spec: &EquationSpec, initial: &InitialData, t_max: usize) -> Vec<Grid> {
    let k = spec.time_order;
    let mut rows: Vec<Grid> = initial.rows.iter().map(to_grid).collect();
    for t in k..=t_max {
        let mut next = Grid::new();
        for entry in &spec.stencil {
            let source = &rows[t - k + entry.time_level];
            for (p, v) in source {
                let target: Vec<i64> = p
                    .iter()
                    .zip(&spec.spatial_shift)
                    .zip(&entry.offset)
                    .map(|((x, s), o)| x + s - o)
                    .collect();
                *next.entry(target).or_insert_with(Rational::zero) += &entry.coeff * v;
            }
        }
        next.retain(|_, v| !v.is_zero());
        rows.push(next);
    }
    rows.truncate(t_max + 1);
    rows
}

pub fn at(grid: &Grid, p: &[i64]) -> Rational {
    grid.get(p).cloned().unwrap_or_else(Rational::zero)
}

/// `U(i, j+1) = a U(i-1, j+1) + b U(i, j) + c U(i-1, j)` swept left to right
/// from zero at `left`, rows `0..=j_max` on `left..=right`.
pub fn reference_implicit(
    a: &Rational,
    b: &Rational,
    c: &Rational,
    psi: &BTreeMap<i64, Rational>,
    left: i64,
    right: i64,
    j_max: usize,
) -> Vec<BTreeMap<i64, Rational>> {
    let get =
        |m: &BTreeMap<i64, Rational>, i: i64| m.get(&i).cloned().unwrap_or_else(Rational::zero);
    let mut rows = vec![psi.clone()];
    for j in 0..j_max {
        let mut next = BTreeMap::new();
        let mut prev_new = Rational::zero();
        for i in left..=right {
            let v = a * &prev_new + b * get(&rows[j], i) + c * get(&rows[j], i - 1);
            next.insert(i, v.clone());
            prev_new = v;
        }
        rows.push(next);
    }
    rows
}

pub fn point(coords: &[i64]) -> LatticePoint {
    LatticePoint(coords.to_vec())
}
