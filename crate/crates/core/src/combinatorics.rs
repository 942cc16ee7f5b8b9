//! Compositions, multinomial coefficients and the multinomial expansion of a
//! stencil symbol.
//!
//! The symbol of an equation is the Laurent polynomial
//!
//! ```text
//! P(x, y) = sum over entries of coeff * x^(shift - offset) * y^(time_order - time_level)
//! ```
//!
//! and `P^j` is expanded term by term: every composition `r` of `j` over the
//! stencil entries contributes `multinomial(j; r) * prod coeff^r` at spatial
//! exponent `sum r_e (shift - offset_e)` and time exponent
//! `sum r_e (time_order - time_level_e)`.

use std::collections::BTreeMap;

use num_bigint::BigUint;
use num_traits::{One, Zero};
use thiserror::Error;

use crate::exactnum::{power_table, Rational};
use crate::lattice::EquationSpec;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("composition sums to {actual}, expected {expected}")]
pub struct TotalMismatch {
    pub expected: u64,
    pub actual: u64,
}

/// Ordered tuple of nonnegative parts with a fixed sum.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Composition {
    pub parts: Vec<u32>,
    pub total: u32,
}

impl Composition {
    pub fn new(parts: Vec<u32>) -> Self {
        let total = parts.iter().sum();
        Composition { parts, total }
    }
}

/// Every composition of `total` into `parts_count` nonnegative parts, once
/// each, in increasing lexicographic order.
pub fn compositions(parts_count: usize, total: u32) -> Compositions {
    assert!(parts_count >= 1, "compositions need at least one part");
    let mut first = vec![0; parts_count];
    first[parts_count - 1] = total;
    Compositions {
        next: Some(first),
        total,
    }
}

#[derive(Debug, Clone)]
pub struct Compositions {
    next: Option<Vec<u32>>,
    total: u32,
}

impl Compositions {
    /// Advances in place; the buffer-reusing path for hot loops.
    pub(crate) fn advance(parts: &mut [u32]) -> bool {
        let n = parts.len();
        // rightmost position (not the last) whose suffix still holds mass
        let mut suffix = 0;
        for i in (0..n.saturating_sub(1)).rev() {
            suffix += parts[i + 1];
            if suffix > 0 {
                parts[i] += 1;
                for p in &mut parts[i + 1..] {
                    *p = 0;
                }
                parts[n - 1] = suffix - 1;
                return true;
            }
        }
        false
    }
}

impl Iterator for Compositions {
    type Item = Composition;

    fn next(&mut self) -> Option<Composition> {
        let current = self.next.take()?;
        let mut succ = current.clone();
        if Compositions::advance(&mut succ) {
            self.next = Some(succ);
        }
        Some(Composition {
            parts: current,
            total: self.total,
        })
    }
}

/// `total! / prod(parts!)`.
pub fn multinomial(total: u32, parts: &Composition) -> Result<BigUint, TotalMismatch> {
    let actual: u64 = parts.parts.iter().map(|&p| u64::from(p)).sum();
    if actual != u64::from(total) || parts.total != total {
        return Err(TotalMismatch {
            expected: total.into(),
            actual,
        });
    }
    Ok(multinomial_of(&parts.parts))
}

/// Multinomial coefficient of the parts (their sum is the top).
pub(crate) fn multinomial_of(parts: &[u32]) -> BigUint {
    // prod of C(running_sum, part)
    let mut acc = BigUint::one();
    let mut running: u64 = 0;
    for &part in parts {
        for k in 1..=u64::from(part) {
            acc *= running + k;
            acc /= k;
        }
        running += u64::from(part);
    }
    acc
}

pub fn binomial(n: u64, k: u64) -> BigUint {
    if k > n {
        return BigUint::zero();
    }
    let k = k.min(n - k);
    let mut acc = BigUint::one();
    for i in 1..=k {
        acc *= n - k + i;
        acc /= i;
    }
    acc
}

/// Exponent of one monomial: spatial part (one per axis) and time part.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Monomial {
    pub spatial: Vec<i64>,
    pub time: i64,
}

/// Collected `exponent -> coefficient` table of a Laurent polynomial in the
/// spatial variables and (polynomial) time variable.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TermMap {
    dim: usize,
    terms: BTreeMap<Monomial, Rational>,
}

impl TermMap {
    pub fn zero(dim: usize) -> Self {
        TermMap {
            dim,
            terms: BTreeMap::new(),
        }
    }

    pub fn one(dim: usize) -> Self {
        let mut map = TermMap::zero(dim);
        map.add_term(
            Monomial {
                spatial: vec![0; dim],
                time: 0,
            },
            Rational::one(),
        );
        map
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn add_term(&mut self, exponent: Monomial, coeff: Rational) {
        debug_assert_eq!(exponent.spatial.len(), self.dim);
        if coeff.is_zero() {
            return;
        }
        use std::collections::btree_map::Entry;
        match self.terms.entry(exponent) {
            Entry::Vacant(slot) => {
                slot.insert(coeff);
            }
            Entry::Occupied(mut slot) => {
                *slot.get_mut() += coeff;
                if slot.get().is_zero() {
                    slot.remove();
                }
            }
        }
    }

    pub fn coeff(&self, exponent: &Monomial) -> Rational {
        self.terms
            .get(exponent)
            .cloned()
            .unwrap_or_else(Rational::zero)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Monomial, &Rational)> {
        self.terms.iter()
    }

    /// Plain polynomial product, term by term.
    pub fn mul(&self, other: &TermMap) -> TermMap {
        assert_eq!(self.dim, other.dim);
        let mut out = TermMap::zero(self.dim);
        for (e1, c1) in &self.terms {
            for (e2, c2) in &other.terms {
                let exponent = Monomial {
                    spatial: e1
                        .spatial
                        .iter()
                        .zip(&e2.spatial)
                        .map(|(a, b)| a + b)
                        .collect(),
                    time: e1.time + e2.time,
                };
                out.add_term(exponent, c1 * c2);
            }
        }
        out
    }

    /// Sum of all coefficients (the value with every variable set to 1).
    pub fn eval_at_ones(&self) -> Rational {
        self.terms.values().fold(Rational::zero(), |acc, c| acc + c)
    }
}

/// Symbol `P` of a single stencil application (`expand_stencil_power(spec, 1)`).
pub fn stencil_symbol(spec: &EquationSpec) -> TermMap {
    let mut map = TermMap::zero(spec.spatial_dim);
    for entry in &spec.stencil {
        map.add_term(
            Monomial {
                spatial: spec.displacement(entry),
                time: spec.time_order as i64 - entry.time_level as i64,
            },
            entry.coeff.clone(),
        );
    }
    map
}

/// `P^j` expanded by enumerating compositions of `j` over the stencil entries.
pub fn expand_stencil_power(spec: &EquationSpec, j: u32) -> TermMap {
    let entries = &spec.stencil;
    let displacements: Vec<Vec<i64>> = entries.iter().map(|e| spec.displacement(e)).collect();
    let time_steps: Vec<i64> = entries
        .iter()
        .map(|e| spec.time_order as i64 - e.time_level as i64)
        .collect();
    let powers: Vec<Vec<Rational>> = entries
        .iter()
        .map(|e| power_table(&e.coeff, j as usize))
        .collect();
    let dim = spec.spatial_dim;

    let mut map = TermMap::zero(dim);
    let mut parts = vec![0u32; entries.len()];
    parts[entries.len() - 1] = j;
    loop {
        let weight = composition_weight(&parts, &powers);
        if !weight.is_zero() {
            let mut spatial = vec![0i64; dim];
            let mut time = 0i64;
            for (e, &r) in parts.iter().enumerate() {
                if r == 0 {
                    continue;
                }
                for (k, s) in spatial.iter_mut().enumerate() {
                    *s += i64::from(r) * displacements[e][k];
                }
                time += i64::from(r) * time_steps[e];
            }
            map.add_term(Monomial { spatial, time }, weight);
        }
        if !Compositions::advance(&mut parts) {
            break;
        }
    }
    map
}

/// `multinomial(parts) * prod powers[e][parts[e]]`, skipping the multinomial
/// when a zero coefficient kills the term.
pub(crate) fn composition_weight(parts: &[u32], powers: &[Vec<Rational>]) -> Rational {
    let mut product = Rational::one();
    for (e, &r) in parts.iter().enumerate() {
        if r == 0 {
            continue;
        }
        let factor = &powers[e][r as usize];
        if factor.is_zero() {
            return Rational::zero();
        }
        product *= factor;
    }
    let count = multinomial_of(parts);
    product * Rational::from_integer(count.into())
}
