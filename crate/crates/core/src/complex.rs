//! Bigraded chain complexes of free abelian groups, their homology, image
//! subcomplexes and induced maps on free parts.
//!
//! Differentials raise h by one and preserve q. Homology at (h,q) is
//! ker(d out of (h,q)) / im(d into (h,q)).

use std::collections::BTreeMap;
use std::fmt;

use num_traits::{One, ToPrimitive};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::laurent::BigradedSeries;
use crate::matrix::{
    column_lattice_basis, elementary_divisors, kernel_basis, smith_normal_form, solve_matrix_in_lattice, IntMatrix,
    MatrixError, PivotStrategy,
};

pub type Bidegree = (i64, i64);

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ComplexError {
    #[error("differential at {at:?} has shape {got:?}, expected {want:?}")]
    Shape {
        at: Bidegree,
        got: (usize, usize),
        want: (usize, usize),
    },
    #[error("d∘d ≠ 0 starting at {0:?}")]
    NotAComplex(Bidegree),
    #[error("map does not commute with the differential at {0:?}")]
    NotAChainMap(Bidegree),
    #[error("torsion order {0} does not fit in 64 bits")]
    TorsionOverflow(String),
    #[error(transparent)]
    Matrix(#[from] MatrixError),
}

/// A finitely generated abelian group Z^rank ⊕ ⊕ Z/dᵢ with d₁ | d₂ | … and dᵢ ≥ 2.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct AbelianGroup {
    pub rank: usize,
    pub torsion: Vec<u64>,
}

impl AbelianGroup {
    pub fn free(rank: usize) -> Self {
        AbelianGroup {
            rank,
            torsion: Vec::new(),
        }
    }

    /// Builds a group from arbitrary torsion orders, normalizing to invariant factors.
    pub fn new(rank: usize, orders: &[u64]) -> Self {
        AbelianGroup {
            rank,
            torsion: invariant_factors(orders),
        }
    }

    pub fn is_zero(&self) -> bool {
        self.rank == 0 && self.torsion.is_empty()
    }

    pub fn direct_sum(&self, other: &AbelianGroup) -> AbelianGroup {
        let mut orders = self.torsion.clone();
        orders.extend(&other.torsion);
        AbelianGroup::new(self.rank + other.rank, &orders)
    }

    /// Table style: equal orders grouped, e.g. `Z⊕Z₂⊕(Z₆)²`.
    pub fn display_grouped(&self) -> String {
        self.render(true)
    }

    /// Invariant-factor chain written out, e.g. `Z⊕Z₂⊕Z₆⊕Z₆`.
    pub fn display_chain(&self) -> String {
        self.render(false)
    }

    fn render(&self, grouped: bool) -> String {
        if self.is_zero() {
            return "0".to_string();
        }
        let mut pieces = Vec::new();
        match self.rank {
            0 => {}
            1 => pieces.push("Z".to_string()),
            r => pieces.push(format!("Z{}", superscript(r as u64))),
        }
        let mut i = 0;
        while i < self.torsion.len() {
            let d = self.torsion[i];
            let mut j = i;
            while grouped && j < self.torsion.len() && self.torsion[j] == d {
                j += 1;
            }
            let count = if grouped { j - i } else { 1 };
            if count == 1 {
                pieces.push(format!("Z{}", subscript(d)));
            } else {
                pieces.push(format!("(Z{}){}", subscript(d), superscript(count as u64)));
            }
            i += count;
        }
        pieces.join("⊕")
    }
}

impl fmt::Display for AbelianGroup {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.display_grouped())
    }
}

fn digits_with(n: u64, table: [char; 10]) -> String {
    n.to_string()
        .chars()
        .map(|c| table[c.to_digit(10).expect("decimal digit") as usize])
        .collect()
}

fn subscript(n: u64) -> String {
    digits_with(n, ['₀', '₁', '₂', '₃', '₄', '₅', '₆', '₇', '₈', '₉'])
}

fn superscript(n: u64) -> String {
    digits_with(n, ['⁰', '¹', '²', '³', '⁴', '⁵', '⁶', '⁷', '⁸', '⁹'])
}

/// Invariant factors of ⊕ Z/oᵢ (orders ≤ 1 are dropped).
pub fn invariant_factors(orders: &[u64]) -> Vec<u64> {
    use num_integer::Integer;
    // Split into prime powers, then recombine largest powers first.
    let mut by_prime: BTreeMap<u64, Vec<u64>> = BTreeMap::new();
    for &o in orders.iter().filter(|&&o| o > 1) {
        let mut n = o;
        let mut p = 2;
        while p * p <= n {
            if n % p == 0 {
                let mut pk = 1;
                while n % p == 0 {
                    n /= p;
                    pk *= p;
                }
                by_prime.entry(p).or_default().push(pk);
            }
            p += 1;
        }
        if n > 1 {
            by_prime.entry(n).or_default().push(n);
        }
    }
    let len = by_prime.values().map(Vec::len).max().unwrap_or(0);
    let mut out = vec![1u64; len];
    for powers in by_prime.values_mut() {
        powers.sort_unstable();
        // The largest power goes to the last factor.
        for (k, pk) in powers.iter().rev().enumerate() {
            let slot = len - 1 - k;
            out[slot] = out[slot].lcm(pk);
        }
    }
    out
}

/// Per-bidegree abelian groups; zero groups are never stored.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct BigradedAbelianGroup {
    cells: BTreeMap<Bidegree, AbelianGroup>,
}

impl BigradedAbelianGroup {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, at: Bidegree, g: AbelianGroup) {
        if g.is_zero() {
            return;
        }
        let merged = match self.cells.get(&at) {
            Some(old) => old.direct_sum(&g),
            None => g,
        };
        self.cells.insert(at, merged);
    }

    pub fn get(&self, at: Bidegree) -> AbelianGroup {
        self.cells.get(&at).cloned().unwrap_or_default()
    }

    pub fn cells(&self) -> impl Iterator<Item = (Bidegree, &AbelianGroup)> {
        self.cells.iter().map(|(&k, v)| (k, v))
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    pub fn shift(&self, dh: i64, dq: i64) -> Self {
        BigradedAbelianGroup {
            cells: self
                .cells
                .iter()
                .map(|(&(h, q), g)| ((h + dh, q + dq), g.clone()))
                .collect(),
        }
    }

    pub fn direct_sum(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for (at, g) in other.cells() {
            out.insert(at, g.clone());
        }
        out
    }

    pub fn total_rank(&self) -> usize {
        self.cells.values().map(|g| g.rank).sum()
    }

    /// All torsion orders across bidegrees, sorted.
    pub fn torsion_multiset(&self) -> Vec<u64> {
        let mut t: Vec<u64> = self.cells.values().flat_map(|g| g.torsion.iter().copied()).collect();
        t.sort_unstable();
        t
    }

    pub fn free_ranks(&self) -> BigradedSeries {
        self.cells.iter().map(|(&k, g)| (k, g.rank as i64)).collect()
    }

    pub fn euler_characteristic(&self) -> crate::laurent::LaurentPoly {
        self.free_ranks().euler_characteristic()
    }

    /// Collapses (h,q) to the single grading h+q.
    pub fn collapse_total(&self) -> BTreeMap<i64, AbelianGroup> {
        let mut out: BTreeMap<i64, AbelianGroup> = BTreeMap::new();
        for (&(h, q), g) in &self.cells {
            let e = out.entry(h + q).or_default();
            *e = e.direct_sum(g);
        }
        out
    }
}

/// A chain map between bigraded complexes shifting bidegrees by `shift`.
#[derive(Clone, Debug)]
pub struct ChainMap {
    pub shift: Bidegree,
    /// Matrix from C(h,q) to the target at (h,q) + shift; absent means zero.
    pub maps: BTreeMap<Bidegree, IntMatrix>,
}

#[derive(Clone, Debug, Default)]
pub struct IntegerChainComplex {
    ranks: BTreeMap<Bidegree, usize>,
    /// Differential from (h,q) to (h+1,q); absent means zero.
    diffs: BTreeMap<Bidegree, IntMatrix>,
}

impl IntegerChainComplex {
    /// Validates shapes and d∘d = 0.
    pub fn new(ranks: BTreeMap<Bidegree, usize>, diffs: BTreeMap<Bidegree, IntMatrix>) -> Result<Self, ComplexError> {
        let ranks: BTreeMap<Bidegree, usize> = ranks.into_iter().filter(|(_, r)| *r > 0).collect();
        let c = IntegerChainComplex { ranks, diffs };
        for (&(h, q), d) in &c.diffs {
            let want = (c.rank((h + 1, q)), c.rank((h, q)));
            if (d.rows(), d.cols()) != want {
                return Err(ComplexError::Shape {
                    at: (h, q),
                    got: (d.rows(), d.cols()),
                    want,
                });
            }
        }
        let bad: Option<Bidegree> = c
            .diffs
            .par_iter()
            .find_any(|(&(h, q), d)| match c.diffs.get(&(h + 1, q)) {
                Some(next) => !next.mul(d).map(|m| m.is_zero()).unwrap_or(false),
                None => false,
            })
            .map(|(&k, _)| k);
        if let Some(at) = bad {
            return Err(ComplexError::NotAComplex(at));
        }
        Ok(c)
    }

    pub fn rank(&self, at: Bidegree) -> usize {
        self.ranks.get(&at).copied().unwrap_or(0)
    }

    pub fn ranks(&self) -> &BTreeMap<Bidegree, usize> {
        &self.ranks
    }

    /// The differential out of `at`, zero-filled if absent.
    pub fn differential(&self, at: Bidegree) -> IntMatrix {
        let (h, q) = at;
        self.diffs
            .get(&at)
            .cloned()
            .unwrap_or_else(|| IntMatrix::zeros(self.rank((h + 1, q)), self.rank(at)))
    }

    pub fn shift(&self, dh: i64, dq: i64) -> Self {
        IntegerChainComplex {
            ranks: self.ranks.iter().map(|(&(h, q), &r)| ((h + dh, q + dq), r)).collect(),
            diffs: self
                .diffs
                .iter()
                .map(|(&(h, q), d)| ((h + dh, q + dq), d.clone()))
                .collect(),
        }
    }

    pub fn chain_ranks(&self) -> BigradedSeries {
        self.ranks.iter().map(|(&k, &r)| (k, r as i64)).collect()
    }

    /// Homology at every bidegree, computed in parallel.
    pub fn homology(&self) -> Result<BigradedAbelianGroup, ComplexError> {
        let cells: Vec<(Bidegree, AbelianGroup)> = self
            .ranks
            .par_iter()
            .map(|(&at, _)| self.homology_at(at).map(|g| (at, g)))
            .collect::<Result<_, _>>()?;
        let mut out = BigradedAbelianGroup::new();
        for (at, g) in cells {
            out.insert(at, g);
        }
        Ok(out)
    }

    pub fn homology_at(&self, at: Bidegree) -> Result<AbelianGroup, ComplexError> {
        let n = self.rank(at);
        if n == 0 {
            return Ok(AbelianGroup::default());
        }
        let (h, q) = at;
        let out_rank = self.diffs.get(&at).map_or(0, IntMatrix::rank);
        let in_divs = self.diffs.get(&(h - 1, q)).map(elementary_divisors).unwrap_or_default();
        let mut torsion = Vec::new();
        for d in in_divs.iter().filter(|d| !d.is_one()) {
            torsion.push(d.to_u64().ok_or_else(|| ComplexError::TorsionOverflow(d.to_string()))?);
        }
        Ok(AbelianGroup {
            rank: n - out_rank - in_divs.len(),
            torsion,
        })
    }

    /// Checks that `f` commutes with the differential: d∘f = f∘d.
    pub fn check_chain_map(&self, f: &ChainMap, target: &IntegerChainComplex) -> Result<(), ComplexError> {
        let (sh, sq) = f.shift;
        let keys: Vec<Bidegree> = self.ranks.keys().copied().collect();
        for (h, q) in keys {
            let src = (h, q);
            let tgt = (h + sh, q + sq);
            let f_here = f
                .maps
                .get(&src)
                .cloned()
                .unwrap_or_else(|| IntMatrix::zeros(target.rank(tgt), self.rank(src)));
            let f_next = f
                .maps
                .get(&(h + 1, q))
                .cloned()
                .unwrap_or_else(|| IntMatrix::zeros(target.rank((tgt.0 + 1, tgt.1)), self.rank((h + 1, q))));
            let lhs = target.differential(tgt).mul(&f_here)?;
            let rhs = f_next.mul(&self.differential(src))?;
            if lhs != rhs {
                return Err(ComplexError::NotAChainMap(src));
            }
        }
        Ok(())
    }

    /// The subcomplex im(f) ⊆ C for a chain endomorphism f, with lattice bases
    /// chosen by echelon reduction. The result lives at the target bidegrees.
    pub fn image_subcomplex(&self, f: &ChainMap, strategy: PivotStrategy, reduce: bool) -> Result<Self, ComplexError> {
        self.check_chain_map(f, self)?;
        let (sh, sq) = f.shift;
        let mut bases: BTreeMap<Bidegree, IntMatrix> = BTreeMap::new();
        for (&src, m) in &f.maps {
            let tgt = (src.0 + sh, src.1 + sq);
            let basis = column_lattice_basis(m, strategy, reduce);
            if basis.cols() > 0 {
                bases.insert(tgt, basis);
            }
        }
        let mut ranks = BTreeMap::new();
        let mut diffs = BTreeMap::new();
        for (&at, b) in &bases {
            ranks.insert(at, b.cols());
            let next = (at.0 + 1, at.1);
            if let Some(b_next) = bases.get(&next) {
                let db = self.differential(at).mul(b)?;
                diffs.insert(at, solve_matrix_in_lattice(b_next, &db)?);
            } else {
                debug_assert!(self.differential(at).mul(b).map(|m| m.is_zero()).unwrap_or(true));
            }
        }
        Self::new(ranks, diffs)
    }

    /// Lifts of a basis of the free part of homology at `at`, plus the projection
    /// from cycles (in the returned kernel coordinates) onto that free part.
    fn free_part(&self, at: Bidegree) -> Result<FreePart, ComplexError> {
        let n = self.rank(at);
        let (h, q) = at;
        let kernel = kernel_basis(&self.differential(at));
        let z = kernel.cols();
        let d_in = self.differential((h - 1, q));
        let boundaries = if z == 0 {
            IntMatrix::zeros(0, d_in.cols())
        } else {
            solve_matrix_in_lattice(&kernel, &d_in)?
        };
        let s = smith_normal_form(&boundaries);
        let r = s.rank();
        let projection = s.u.submatrix(r, z, 0, z);
        // Columns r.. of u⁻¹ lift the free generators.
        let u_inv = solve_matrix_in_lattice(&s.u, &IntMatrix::identity(z))?;
        let lifts = kernel.mul(&u_inv.submatrix(0, z, r, z))?;
        debug_assert_eq!(lifts.rows(), n);
        Ok(FreePart {
            kernel,
            projection,
            lifts,
        })
    }

    /// Matrices of the map induced by `f` on free parts of homology, per source bidegree.
    pub fn induced_on_free_homology(
        &self,
        f: &ChainMap,
        target: &IntegerChainComplex,
    ) -> Result<BTreeMap<Bidegree, IntMatrix>, ComplexError> {
        self.check_chain_map(f, target)?;
        let (sh, sq) = f.shift;
        let mut out = BTreeMap::new();
        for &src in self.ranks.keys() {
            let tgt = (src.0 + sh, src.1 + sq);
            let fs = self.free_part(src)?;
            if fs.lifts.cols() == 0 {
                continue;
            }
            let ft = target.free_part(tgt)?;
            let m = match f.maps.get(&src) {
                Some(m) if ft.projection.rows() > 0 => {
                    let images = m.mul(&fs.lifts)?;
                    let coords = solve_matrix_in_lattice(&ft.kernel, &images)?;
                    ft.projection.mul(&coords)?
                }
                _ => IntMatrix::zeros(ft.projection.rows(), fs.lifts.cols()),
            };
            out.insert(src, m);
        }
        Ok(out)
    }

    pub fn direct_sum(&self, other: &Self) -> Result<Self, ComplexError> {
        let mut ranks = self.ranks.clone();
        for (&k, &r) in &other.ranks {
            *ranks.entry(k).or_insert(0) += r;
        }
        let mut diffs = BTreeMap::new();
        let keys: std::collections::BTreeSet<Bidegree> = self.diffs.keys().chain(other.diffs.keys()).copied().collect();
        for (h, q) in keys {
            let a = self.differential((h, q));
            let b = other.differential((h, q));
            let mut m = IntMatrix::zeros(a.rows() + b.rows(), a.cols() + b.cols());
            m.set_block(0, 0, &a);
            m.set_block(a.rows(), a.cols(), &b);
            diffs.insert((h, q), m);
        }
        Self::new(ranks, diffs)
    }
}

struct FreePart {
    kernel: IntMatrix,
    projection: IntMatrix,
    lifts: IntMatrix,
}

/// Homology of 0 → Z^m → Z^n → 0 (map d) style two-term data, used by tests and small callers.
pub fn cokernel_group(d: &IntMatrix) -> AbelianGroup {
    let divs = elementary_divisors(d);
    let torsion = divs
        .iter()
        .filter(|x| !x.is_one())
        .map(|x| x.to_u64().expect("small torsion"))
        .collect();
    AbelianGroup {
        rank: d.rows() - divs.len(),
        torsion,
    }
}
