//! Bigraded Koszul complexes K(g₁,…,g_m) over a graded free Z-module with
//! commuting multiplication operators.
//!
//! The exterior generator ε_i sits in bidegree (−1, 2·deg g_i), so the
//! differential d(ε_J ⊗ r) = Σ_i (−1)^{i−1} ε_{J∖j_i} ⊗ g_{j_i}·r raises h by one
//! and preserves q. Subsets are ordered by size, then colexicographically.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::complex::{Bidegree, ChainMap, ComplexError, IntegerChainComplex};
use crate::flag_ring::{AmbientRing, FlagRingError, GradedOperator, QuotientRing};
use crate::matrix::IntMatrix;
use crate::schur::SchurElement;

#[derive(Debug, Error)]
pub enum KoszulError {
    #[error("generator {index} is not homogeneous")]
    Inhomogeneous { index: usize },
    #[error("operator {index} does not match the module ranks")]
    RankMismatch { index: usize },
    #[error(transparent)]
    Ring(#[from] FlagRingError),
    #[error(transparent)]
    Complex(#[from] ComplexError),
}

/// A graded free module with degreewise ranks (degree counted in boxes, so the
/// q-degree is twice it) and multiplication operators.
pub trait GradedRing {
    fn ranks(&self) -> Vec<usize>;
    fn multiplication(&self, c: &SchurElement) -> Result<GradedOperator, FlagRingError>;
}

impl GradedRing for QuotientRing {
    fn ranks(&self) -> Vec<usize> {
        (0..=self.top_degree()).map(|d| self.rank(d)).collect()
    }

    fn multiplication(&self, c: &SchurElement) -> Result<GradedOperator, FlagRingError> {
        self.mult_operator(c)
    }
}

impl GradedRing for AmbientRing {
    fn ranks(&self) -> Vec<usize> {
        (0..=self.max_degree()).map(|d| self.rank(d)).collect()
    }

    fn multiplication(&self, c: &SchurElement) -> Result<GradedOperator, FlagRingError> {
        self.mult_operator(c)
    }
}

/// Everything needed to assemble a Koszul complex.
#[derive(Clone, Debug)]
pub struct KoszulSpec {
    /// Module rank per degree (boxes).
    pub ranks: Vec<usize>,
    /// Multiplication operators of g₁,…,g_m.
    pub generators: Vec<GradedOperator>,
    /// Bidegree of Λ⁰ in internal degree 0.
    pub anchor: Bidegree,
}

impl KoszulSpec {
    pub fn over_ring<R: GradedRing + Sync>(
        ring: &R,
        generators: &[SchurElement],
        anchor: Bidegree,
    ) -> Result<Self, KoszulError> {
        let generators = generators
            .par_iter()
            .enumerate()
            .map(|(i, g)| {
                if g.degree().is_err() {
                    return Err(KoszulError::Inhomogeneous { index: i + 1 });
                }
                Ok(ring.multiplication(g)?)
            })
            .collect::<Result<Vec<_>, _>>()?;
        Ok(KoszulSpec {
            ranks: ring.ranks(),
            generators,
            anchor,
        })
    }

    fn rank(&self, d: usize) -> usize {
        self.ranks.get(d).copied().unwrap_or(0)
    }

    fn check(&self) -> Result<(), KoszulError> {
        for (i, g) in self.generators.iter().enumerate() {
            let ok = (0..self.ranks.len()).all(|d| {
                let cols_ok = g.cols.get(d).copied().unwrap_or(0) == self.rank(d);
                let rows_ok = g.maps.get(d).is_none_or(|m| m.len() == self.rank(d + g.degree));
                cols_ok && rows_ok
            });
            if !ok {
                return Err(KoszulError::RankMismatch { index: i + 1 });
            }
        }
        Ok(())
    }
}

/// Subsets of {1..m} ordered by size, then colexicographically.
pub fn ordered_subsets(m: usize) -> Vec<Vec<usize>> {
    let mut all: Vec<Vec<usize>> = (0u32..1 << m)
        .map(|mask| (1..=m).filter(|i| mask & (1 << (i - 1)) != 0).collect())
        .collect();
    all.sort_by(|a: &Vec<usize>, b: &Vec<usize>| {
        a.len().cmp(&b.len()).then_with(|| a.iter().rev().cmp(b.iter().rev()))
    });
    all
}

/// One summand ε_J ⊗ R_d of a chain group, with its row offset.
#[derive(Clone, Debug)]
struct Summand {
    subset: usize,
    degree: usize,
    offset: usize,
}

struct Layout {
    subsets: Vec<Vec<usize>>,
    cells: BTreeMap<Bidegree, Vec<Summand>>,
    ranks: BTreeMap<Bidegree, usize>,
}

impl Layout {
    fn new(spec: &KoszulSpec) -> Self {
        let subsets = ordered_subsets(spec.generators.len());
        let eps_q = |j: usize| 2 * spec.generators[j - 1].degree as i64;
        let (h0, q0) = spec.anchor;
        let mut cells: BTreeMap<Bidegree, Vec<Summand>> = BTreeMap::new();
        let mut ranks: BTreeMap<Bidegree, usize> = BTreeMap::new();
        for (s, subset) in subsets.iter().enumerate() {
            for d in 0..spec.ranks.len() {
                let r = spec.rank(d);
                if r == 0 {
                    continue;
                }
                let at = (
                    h0 - subset.len() as i64,
                    q0 + subset.iter().map(|&j| eps_q(j)).sum::<i64>() + 2 * d as i64,
                );
                let total = ranks.entry(at).or_insert(0);
                cells.entry(at).or_default().push(Summand {
                    subset: s,
                    degree: d,
                    offset: *total,
                });
                *total += r;
            }
        }
        Layout { subsets, cells, ranks }
    }
}

/// The chain map ε_J ⊗ r ↦ ε_J ⊗ c·r for a ring operator c commuting with the
/// generators; it raises q by 2·deg c.
pub fn koszul_module_map(spec: &KoszulSpec, op: &GradedOperator) -> Result<ChainMap, KoszulError> {
    spec.check()?;
    let layout = Layout::new(spec);
    let shift = (0, 2 * op.degree as i64);
    let maps = layout
        .cells
        .iter()
        .filter_map(|(&(h, q), sources)| {
            let target = (h, q + shift.1);
            let targets = layout.cells.get(&target)?;
            let mut mat = IntMatrix::zeros(layout.ranks[&target], layout.ranks[&(h, q)]);
            for src in sources {
                let t_degree = src.degree + op.degree;
                let Some(tgt) = targets.iter().find(|t| t.subset == src.subset && t.degree == t_degree) else {
                    continue;
                };
                for (r, row) in op.maps[src.degree].iter().enumerate() {
                    for (c, &x) in row.iter().enumerate() {
                        if x != 0 {
                            mat.set(tgt.offset + r, src.offset + c, BigInt::from(x));
                        }
                    }
                }
            }
            Some(((h, q), mat))
        })
        .collect();
    Ok(ChainMap { shift, maps })
}

pub fn build_koszul(spec: &KoszulSpec) -> Result<IntegerChainComplex, KoszulError> {
    spec.check()?;
    let Layout {
        subsets,
        cells: layout,
        ranks,
    } = Layout::new(spec);
    let position: BTreeMap<&Vec<usize>, usize> = subsets.iter().enumerate().map(|(i, s)| (s, i)).collect();
    let diffs: BTreeMap<Bidegree, IntMatrix> = layout
        .par_iter()
        .filter_map(|(&(h, q), sources)| {
            let target = (h + 1, q);
            let rows = ranks.get(&target).copied().unwrap_or(0);
            if rows == 0 {
                return None;
            }
            let cols = ranks[&(h, q)];
            let targets = &layout[&target];
            let mut mat = IntMatrix::zeros(rows, cols);
            for src in sources {
                let subset = &subsets[src.subset];
                for (i, &j) in subset.iter().enumerate() {
                    let g = &spec.generators[j - 1];
                    let smaller: Vec<usize> = subset.iter().copied().filter(|&x| x != j).collect();
                    let t_subset = position[&smaller];
                    let t_degree = src.degree + g.degree;
                    let Some(tgt) = targets.iter().find(|t| t.subset == t_subset && t.degree == t_degree) else {
                        continue;
                    };
                    let sign: i64 = if i % 2 == 0 { 1 } else { -1 };
                    let block = &g.maps[src.degree];
                    for (r, row) in block.iter().enumerate() {
                        for (c, &x) in row.iter().enumerate() {
                            if x != 0 {
                                mat.set(tgt.offset + r, src.offset + c, BigInt::from(sign * x));
                            }
                        }
                    }
                }
            }
            Some(((h, q), mat))
        })
        .collect();
    Ok(IntegerChainComplex::new(ranks, diffs)?)
}

#[derive(Clone, Debug, Default, Serialize)]
pub struct SignAudit {
    pub subsets_checked: usize,
    pub violations: Vec<String>,
}

impl SignAudit {
    pub fn is_clean(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Formal Koszul differential: coefficients on ε_K labelled by the generator applied.
type FormalChain = BTreeMap<(Vec<usize>, usize), i64>;

/// d(ε_J) by the Leibniz rule, peeling off the first factor:
/// d(ε_j ∧ ε_K) = g_j·ε_K − ε_j ∧ d(ε_K).
fn leibniz(subset: &[usize]) -> FormalChain {
    let mut out = FormalChain::new();
    let Some((&first, rest)) = subset.split_first() else {
        return out;
    };
    *out.entry((rest.to_vec(), first)).or_insert(0) += 1;
    for ((k, g), c) in leibniz(rest) {
        // ε_first ∧ ε_k is already sorted since first < every element of rest.
        let mut merged = vec![first];
        merged.extend(k);
        *out.entry((merged, g)).or_insert(0) -= c;
    }
    out.retain(|_, c| *c != 0);
    out
}

/// Cross-checks the (−1)^{i−1} component signs against the Leibniz rule on all
/// subsets, and that every d² component cancels through commuting generators.
pub fn sign_audit(spec: &KoszulSpec) -> SignAudit {
    let m = spec.generators.len();
    let mut audit = SignAudit::default();
    for subset in ordered_subsets(m) {
        audit.subsets_checked += 1;
        let mut closed = FormalChain::new();
        for (i, &j) in subset.iter().enumerate() {
            let rest: Vec<usize> = subset.iter().copied().filter(|&x| x != j).collect();
            closed.insert((rest, j), if i % 2 == 0 { 1 } else { -1 });
        }
        if closed != leibniz(&subset) {
            audit
                .violations
                .push(format!("component signs of {subset:?} disagree with the Leibniz rule"));
        }
        for (x, &j) in subset.iter().enumerate() {
            for &k in &subset[x + 1..] {
                // Path through dropping j first, then k, and the reverse.
                let sign_j = sign_of(&subset, j) * sign_of(&without(&subset, j), k);
                let sign_k = sign_of(&subset, k) * sign_of(&without(&subset, k), j);
                if sign_j + sign_k != 0 {
                    audit
                        .violations
                        .push(format!("d² terms for {subset:?} through {j},{k} do not cancel"));
                }
                let gj = &spec.generators[j - 1];
                let gk = &spec.generators[k - 1];
                if !gj.commutes_with(gk) {
                    audit.violations.push(format!("generators {j} and {k} do not commute"));
                }
            }
        }
    }
    audit.violations.dedup();
    audit
}

fn sign_of(subset: &[usize], j: usize) -> i64 {
    let i = subset.iter().position(|&x| x == j).expect("element of subset");
    if i % 2 == 0 {
        1
    } else {
        -1
    }
}

fn without(subset: &[usize], j: usize) -> Vec<usize> {
    subset.iter().copied().filter(|&x| x != j).collect()
}

/// Multiplication by an integer on a module concentrated in degree 0, used for
/// small hand-checkable complexes.
pub fn scalar_operator(ranks: &[usize], c: i64) -> GradedOperator {
    let maps = ranks
        .iter()
        .map(|&r| {
            (0..r)
                .map(|i| (0..r).map(|j| if i == j { c } else { 0 }).collect())
                .collect()
        })
        .collect();
    GradedOperator {
        degree: 0,
        maps,
        cols: ranks.to_vec(),
    }
}
