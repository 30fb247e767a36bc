//! Schur-basis arithmetic on block-symmetric rings Sym(n₁)⊗…⊗Sym(n_b).
//!
//! Products are computed with the dual Jacobi–Trudi determinant applied through
//! Pieri's rule for e_k; Littlewood–Richardson tableau counting is kept as an
//! independent engine and the two are compared in tests.

use std::collections::btree_map::Entry;
use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::hash::Hash;
use std::str::FromStr;
use std::sync::{Arc, OnceLock};

use parking_lot::RwLock;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::partition::{partitions_of, Partition};

pub type Coeff = i64;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SchurError {
    #[error("block index {index} out of range for {blocks} blocks")]
    BlockOutOfRange { index: usize, blocks: usize },
    #[error("shape mismatch: {0:?} vs {1:?}")]
    ShapeMismatch(Vec<usize>, Vec<usize>),
    #[error("block sizes {sizes:?} sum to more than N = {n}")]
    ShapeTooLarge { sizes: Vec<usize>, n: usize },
    #[error("block sizes {sizes:?} must sum to N = {n}")]
    ShapeNotFull { sizes: Vec<usize>, n: usize },
    #[error("partition {partition} has more than {bound} parts")]
    PartBound { partition: Partition, bound: usize },
    #[error("tuple has {got} partitions but the shape has {want} blocks")]
    TupleLength { got: usize, want: usize },
    #[error("element is not homogeneous")]
    Inhomogeneous,
    #[error("cannot parse Schur element: {0}")]
    Parse(String),
}

/// Sizes of the alphabets making up a block-symmetric ring, with the ambient
/// alphabet size N ≥ Σ sizes.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct BlockShape {
    sizes: Vec<usize>,
    n: usize,
}

impl BlockShape {
    pub fn new(sizes: Vec<usize>, n: usize) -> Result<Self, SchurError> {
        if sizes.iter().sum::<usize>() > n {
            return Err(SchurError::ShapeTooLarge { sizes, n });
        }
        Ok(BlockShape { sizes, n })
    }

    /// Shape whose blocks exhaust the ambient alphabet.
    pub fn full(sizes: Vec<usize>) -> Self {
        let n = sizes.iter().sum();
        BlockShape { sizes, n }
    }

    pub fn sizes(&self) -> &[usize] {
        &self.sizes
    }

    pub fn size(&self, block: usize) -> usize {
        self.sizes[block]
    }

    pub fn blocks(&self) -> usize {
        self.sizes.len()
    }

    pub fn n(&self) -> usize {
        self.n
    }

    fn check_block(&self, block: usize) -> Result<(), SchurError> {
        if block < self.sizes.len() {
            Ok(())
        } else {
            Err(SchurError::BlockOutOfRange {
                index: block,
                blocks: self.sizes.len(),
            })
        }
    }
}

/// One partition per block. Ordered by total weight, then lexicographically.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct PartitionTuple(pub Vec<Partition>);

impl PartitionTuple {
    pub fn empty(blocks: usize) -> Self {
        PartitionTuple(vec![Partition::empty(); blocks])
    }

    pub fn weight(&self) -> usize {
        self.0.iter().map(Partition::weight).sum()
    }

    pub fn parts(&self) -> &[Partition] {
        &self.0
    }
}

impl Ord for PartitionTuple {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.weight().cmp(&other.weight()).then_with(|| {
            for (a, b) in self.0.iter().zip(&other.0) {
                let c = a.parts().cmp(b.parts());
                if c.is_ne() {
                    return c;
                }
            }
            self.0.len().cmp(&other.0.len())
        })
    }
}

impl PartialOrd for PartitionTuple {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for PartitionTuple {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let blocks: Vec<String> = self
            .0
            .iter()
            .map(|p| p.parts().iter().map(|x| x.to_string()).collect::<Vec<_>>().join(","))
            .collect();
        write!(f, "s[{}]", blocks.join("|"))
    }
}

pub(crate) fn add_coeff(a: Coeff, b: Coeff) -> Coeff {
    a.checked_add(b).expect("Schur coefficient overflow")
}

pub(crate) fn mul_coeff(a: Coeff, b: Coeff) -> Coeff {
    a.checked_mul(b).expect("Schur coefficient overflow")
}

pub(crate) fn accumulate<K: Ord>(map: &mut BTreeMap<K, Coeff>, key: K, c: Coeff) {
    if c == 0 {
        return;
    }
    match map.entry(key) {
        Entry::Occupied(mut o) => {
            let v = add_coeff(*o.get(), c);
            if v == 0 {
                o.remove();
            } else {
                *o.get_mut() = v;
            }
        }
        Entry::Vacant(v) => {
            v.insert(c);
        }
    }
}

pub(crate) fn prune<K: Ord>(map: &mut BTreeMap<K, Coeff>) {
    map.retain(|_, c| *c != 0);
}

/// A finite integer combination of partition tuples.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SchurElement {
    shape: BlockShape,
    terms: BTreeMap<PartitionTuple, Coeff>,
}

impl SchurElement {
    pub fn zero(shape: &BlockShape) -> Self {
        SchurElement {
            shape: shape.clone(),
            terms: BTreeMap::new(),
        }
    }

    pub fn unit(shape: &BlockShape) -> Self {
        Self::monomial(shape, PartitionTuple::empty(shape.blocks()), 1).expect("empty tuple is always valid")
    }

    pub fn monomial(shape: &BlockShape, tuple: PartitionTuple, c: Coeff) -> Result<Self, SchurError> {
        if tuple.0.len() != shape.blocks() {
            return Err(SchurError::TupleLength {
                got: tuple.0.len(),
                want: shape.blocks(),
            });
        }
        for (p, &n) in tuple.0.iter().zip(shape.sizes()) {
            if p.len() > n {
                return Err(SchurError::PartBound {
                    partition: p.clone(),
                    bound: n,
                });
            }
        }
        let mut terms = BTreeMap::new();
        if c != 0 {
            terms.insert(tuple, c);
        }
        Ok(SchurElement {
            shape: shape.clone(),
            terms,
        })
    }

    /// s_λ placed in one block; zero if λ has too many parts for that block.
    pub fn schur_in_block(shape: &BlockShape, block: usize, lambda: &Partition) -> Result<Self, SchurError> {
        shape.check_block(block)?;
        if lambda.len() > shape.size(block) {
            return Ok(Self::zero(shape));
        }
        let mut tuple = PartitionTuple::empty(shape.blocks());
        tuple.0[block] = lambda.clone();
        Self::monomial(shape, tuple, 1)
    }

    pub fn elementary(shape: &BlockShape, block: usize, k: usize) -> Result<Self, SchurError> {
        Self::schur_in_block(shape, block, &Partition::single_column(k))
    }

    pub fn complete(shape: &BlockShape, block: usize, k: usize) -> Result<Self, SchurError> {
        Self::schur_in_block(shape, block, &Partition::single_row(k))
    }

    pub(crate) fn from_terms(shape: &BlockShape, mut terms: BTreeMap<PartitionTuple, Coeff>) -> Self {
        prune(&mut terms);
        SchurElement {
            shape: shape.clone(),
            terms,
        }
    }

    pub fn shape(&self) -> &BlockShape {
        &self.shape
    }

    pub fn terms(&self) -> &BTreeMap<PartitionTuple, Coeff> {
        &self.terms
    }

    pub fn coefficient(&self, tuple: &PartitionTuple) -> Coeff {
        self.terms.get(tuple).copied().unwrap_or(0)
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Number of boxes of every term, if homogeneous and nonzero.
    pub fn degree(&self) -> Result<Option<usize>, SchurError> {
        let mut weights = self.terms.keys().map(PartitionTuple::weight);
        let Some(first) = weights.next() else {
            return Ok(None);
        };
        if weights.all(|w| w == first) {
            Ok(Some(first))
        } else {
            Err(SchurError::Inhomogeneous)
        }
    }

    /// q-degree 2·boxes.
    pub fn q_degree(&self) -> Result<Option<usize>, SchurError> {
        Ok(self.degree()?.map(|d| 2 * d))
    }

    fn check_shape(&self, other: &SchurElement) -> Result<(), SchurError> {
        if self.shape != other.shape {
            return Err(SchurError::ShapeMismatch(
                self.shape.sizes.clone(),
                other.shape.sizes.clone(),
            ));
        }
        Ok(())
    }

    pub fn add(&self, other: &SchurElement) -> Result<SchurElement, SchurError> {
        self.check_shape(other)?;
        let mut terms = self.terms.clone();
        for (t, &c) in &other.terms {
            accumulate(&mut terms, t.clone(), c);
        }
        Ok(Self::from_terms(&self.shape, terms))
    }

    pub fn sub(&self, other: &SchurElement) -> Result<SchurElement, SchurError> {
        self.add(&other.scale(-1))
    }

    pub fn scale(&self, c: Coeff) -> SchurElement {
        let terms = self.terms.iter().map(|(t, &x)| (t.clone(), mul_coeff(x, c))).collect();
        Self::from_terms(&self.shape, terms)
    }

    fn map_block<F>(&self, block: usize, f: F) -> Result<SchurElement, SchurError>
    where
        F: Fn(&Partition, usize) -> Vec<(Partition, Coeff)>,
    {
        self.shape.check_block(block)?;
        let bound = self.shape.size(block);
        let mut terms = BTreeMap::new();
        for (t, &c) in &self.terms {
            for (nu, k) in f(&t.0[block], bound) {
                let mut nt = t.clone();
                nt.0[block] = nu;
                accumulate(&mut terms, nt, mul_coeff(c, k));
            }
        }
        Ok(Self::from_terms(&self.shape, terms))
    }

    /// Multiplication by h_k of one block.
    pub fn pieri_h(&self, k: usize, block: usize) -> Result<SchurElement, SchurError> {
        self.map_block(block, |mu, bound| {
            horizontal_strips(mu, k, bound).into_iter().map(|p| (p, 1)).collect()
        })
    }

    /// Multiplication by e_k of one block.
    pub fn pieri_e(&self, k: usize, block: usize) -> Result<SchurElement, SchurError> {
        self.map_block(block, |mu, bound| {
            vertical_strips(mu, k, bound).into_iter().map(|p| (p, 1)).collect()
        })
    }

    /// Multiplication by s_λ of one block.
    pub fn times_schur(&self, lambda: &Partition, block: usize) -> Result<SchurElement, SchurError> {
        self.map_block(block, |mu, bound| product_expansion(lambda, mu, bound).to_vec())
    }

    pub fn multiply(&self, other: &SchurElement) -> Result<SchurElement, SchurError> {
        self.check_shape(other)?;
        let mut terms = BTreeMap::new();
        for (u, &cu) in &self.terms {
            for (v, &cv) in &other.terms {
                let mut partial: Vec<(Vec<Partition>, Coeff)> = vec![(Vec::new(), mul_coeff(cu, cv))];
                for (b, &bound) in self.shape.sizes().iter().enumerate() {
                    let prod = product_expansion(&u.0[b], &v.0[b], bound);
                    let mut next = Vec::with_capacity(partial.len() * prod.len());
                    for (prefix, c) in &partial {
                        for (nu, k) in prod.iter() {
                            let mut p = prefix.clone();
                            p.push(nu.clone());
                            next.push((p, mul_coeff(*c, *k)));
                        }
                    }
                    partial = next;
                }
                for (tuple, c) in partial {
                    accumulate(&mut terms, PartitionTuple(tuple), c);
                }
            }
        }
        Ok(Self::from_terms(&self.shape, terms))
    }
}

impl fmt::Display for SchurElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (i, (t, &c)) in self.terms.iter().enumerate() {
            let sign = if c < 0 { "-" } else { "+" };
            if i == 0 {
                if c < 0 {
                    write!(f, "-")?;
                }
            } else {
                write!(f, " {sign} ")?;
            }
            if c.abs() != 1 {
                write!(f, "{}*", c.abs())?;
            }
            write!(f, "{t}")?;
        }
        Ok(())
    }
}

impl SchurElement {
    /// Parses the text form produced by `Display` into the given shape.
    pub fn parse(text: &str, shape: &BlockShape) -> Result<SchurElement, SchurError> {
        let err = |m: &str| SchurError::Parse(format!("{m} in {text:?}"));
        let s = text.trim();
        if s == "0" {
            return Ok(Self::zero(shape));
        }
        let mut terms = BTreeMap::new();
        let mut rest = s;
        let mut sign = 1;
        if let Some(r) = rest.strip_prefix('-') {
            sign = -1;
            rest = r.trim_start();
        }
        loop {
            let end = rest.find(']').ok_or_else(|| err("missing ']'"))?;
            let (term, tail) = rest.split_at(end + 1);
            let (coeff, body) = match term.split_once('*') {
                Some((c, b)) => (c.trim().parse::<Coeff>().map_err(|_| err("bad coefficient"))?, b.trim()),
                None => (1, term.trim()),
            };
            let tuple: PartitionTuple = body.parse()?;
            let mono = Self::monomial(shape, tuple, 1)?;
            let (t, _) = mono.terms.into_iter().next().expect("monomial has one term");
            accumulate(&mut terms, t, sign * coeff);
            let tail = tail.trim_start();
            if tail.is_empty() {
                break;
            }
            let (s, r) = if let Some(r) = tail.strip_prefix('+') {
                (1, r)
            } else if let Some(r) = tail.strip_prefix('-') {
                (-1, r)
            } else {
                return Err(err("expected '+' or '-'"));
            };
            sign = s;
            rest = r.trim_start();
        }
        Ok(Self::from_terms(shape, terms))
    }
}

impl FromStr for PartitionTuple {
    type Err = SchurError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let blocks = s.trim().strip_prefix("s[").and_then(|b| b.strip_suffix(']'));
        let inner = blocks.ok_or_else(|| SchurError::Parse(s.to_string()))?;
        let mut tuple = Vec::new();
        for block in inner.split('|') {
            let parts = if block.trim().is_empty() {
                Vec::new()
            } else {
                block
                    .split(',')
                    .map(|x| x.trim().parse::<usize>().map_err(|_| SchurError::Parse(s.to_string())))
                    .collect::<Result<Vec<_>, _>>()?
            };
            tuple.push(Partition::new(parts).map_err(|e| SchurError::Parse(e.to_string()))?);
        }
        Ok(PartitionTuple(tuple))
    }
}

// ---------------------------------------------------------------------------
// Single-block kernels.

/// All ν ⊇ μ with ν/μ a horizontal strip of size k and ℓ(ν) ≤ bound.
pub fn horizontal_strips(mu: &Partition, k: usize, bound: usize) -> Vec<Partition> {
    fn rec(mu: &Partition, row: usize, remaining: usize, bound: usize, cur: &mut Vec<usize>, out: &mut Vec<Partition>) {
        if remaining == 0 {
            let mut parts = cur.clone();
            parts.extend((row..=mu.len()).map(|r| mu.part(r)));
            out.push(Partition::new(parts).expect("strip keeps shape"));
            return;
        }
        if row > bound || row > mu.len() + 1 {
            return;
        }
        let base = mu.part(row);
        let cap = if row == 1 {
            remaining
        } else {
            (mu.part(row - 1) - base).min(remaining)
        };
        for add in (0..=cap).rev() {
            cur.push(base + add);
            rec(mu, row + 1, remaining - add, bound, cur, out);
            cur.pop();
        }
    }
    if mu.len() > bound {
        return Vec::new();
    }
    let mut out = Vec::new();
    rec(mu, 1, k, bound, &mut Vec::new(), &mut out);
    out
}

/// All ν ⊇ μ with ν/μ a vertical strip of size k and ℓ(ν) ≤ bound.
pub fn vertical_strips(mu: &Partition, k: usize, bound: usize) -> Vec<Partition> {
    fn rec(mu: &Partition, row: usize, remaining: usize, rows: usize, cur: &mut Vec<usize>, out: &mut Vec<Partition>) {
        if row > rows {
            if remaining == 0 {
                out.push(Partition::new(cur.clone()).expect("strip keeps shape"));
            }
            return;
        }
        if rows - row + 1 < remaining {
            return;
        }
        let base = mu.part(row);
        let prev = if row == 1 { usize::MAX } else { cur[row - 2] };
        if remaining > 0 && base < prev {
            cur.push(base + 1);
            rec(mu, row + 1, remaining - 1, rows, cur, out);
            cur.pop();
        }
        cur.push(base);
        rec(mu, row + 1, remaining, rows, cur, out);
        cur.pop();
    }
    if mu.len() > bound {
        return Vec::new();
    }
    let rows = (mu.len() + k).min(bound);
    let mut out = Vec::new();
    rec(mu, 1, k, rows, &mut Vec::new(), &mut out);
    out
}

type Expansion = Arc<Vec<(Partition, Coeff)>>;

struct Memo<K, V>(OnceLock<RwLock<HashMap<K, V>>>);

impl<K: Eq + Hash + Clone, V: Clone> Memo<K, V> {
    const fn new() -> Self {
        Memo(OnceLock::new())
    }

    fn get_or_insert_with(&self, key: K, f: impl FnOnce() -> V) -> V {
        let map = self.0.get_or_init(|| RwLock::new(HashMap::new()));
        if let Some(v) = map.read().get(&key) {
            return v.clone();
        }
        let v = f();
        map.write().entry(key).or_insert(v).clone()
    }
}

static PRODUCTS: Memo<(Partition, Partition, usize), Expansion> = Memo::new();
static SKEWS: Memo<(Partition, Partition, usize), Expansion> = Memo::new();

fn to_expansion(map: BTreeMap<Partition, Coeff>) -> Expansion {
    Arc::new(map.into_iter().filter(|(_, c)| *c != 0).collect())
}

/// Applies det[e_{a_i - i + j}... ] style determinants to a start vector, where
/// `entry(i, j)` is the index of e in row i, column j (1-based, negative = 0).
fn jacobi_trudi_apply(
    m: usize,
    entry: impl Fn(usize, usize) -> i64,
    start: BTreeMap<Partition, Coeff>,
    bound: usize,
) -> BTreeMap<Partition, Coeff> {
    // G(S) for a set S of remaining columns assigned to rows m-|S|+1..m.
    let mut memo: HashMap<u32, BTreeMap<Partition, Coeff>> = HashMap::new();
    memo.insert(0, start);
    let full: u32 = if m == 0 { 0 } else { (1u32 << m) - 1 };
    let mut masks: Vec<u32> = (1..=full).collect();
    masks.sort_by_key(|s| s.count_ones());
    for s in masks {
        let row = m - s.count_ones() as usize + 1;
        let mut acc: BTreeMap<Partition, Coeff> = BTreeMap::new();
        let mut below = 0;
        for col in 1..=m {
            let bit = 1u32 << (col - 1);
            if s & bit == 0 {
                continue;
            }
            let sign = if below % 2 == 0 { 1 } else { -1 };
            below += 1;
            let k = entry(row, col);
            if k < 0 {
                continue;
            }
            let Some(sub) = memo.get(&(s & !bit)) else { continue };
            for (mu, &c) in sub {
                for nu in vertical_strips(mu, k as usize, bound) {
                    accumulate(&mut acc, nu, sign * c);
                }
            }
        }
        prune(&mut acc);
        memo.insert(s, acc);
    }
    memo.remove(&full).unwrap_or_default()
}

/// s_λ·s_μ in Sym(bound), via the dual Jacobi–Trudi determinant of s_λ.
pub fn product_expansion(lambda: &Partition, mu: &Partition, bound: usize) -> Expansion {
    if lambda.len() > bound || mu.len() > bound {
        return Arc::new(Vec::new());
    }
    // s_λ·s_μ = s_μ·s_λ; expand the one with fewer columns.
    let (lambda, mu) = if lambda.first_part() <= mu.first_part() {
        (lambda, mu)
    } else {
        (mu, lambda)
    };
    let key = (lambda.clone(), mu.clone(), bound);
    PRODUCTS.get_or_insert_with(key, || {
        let conj = lambda.transpose();
        let m = lambda.first_part();
        let start = BTreeMap::from([(mu.clone(), 1)]);
        let out = jacobi_trudi_apply(m, |i, j| conj.part(i) as i64 - i as i64 + j as i64, start, bound);
        to_expansion(out)
    })
}

/// Skew Schur function s_{ν/α} in Sym(bound), via the skew dual Jacobi–Trudi determinant.
pub fn skew_expansion(nu: &Partition, alpha: &Partition, bound: usize) -> Expansion {
    if !nu.contains(alpha) {
        return Arc::new(Vec::new());
    }
    let key = (nu.clone(), alpha.clone(), bound);
    SKEWS.get_or_insert_with(key, || {
        let nu_c = nu.transpose();
        let alpha_c = alpha.transpose();
        let m = nu.first_part();
        let start = BTreeMap::from([(Partition::empty(), 1)]);
        let out = jacobi_trudi_apply(
            m,
            |i, j| nu_c.part(i) as i64 - alpha_c.part(j) as i64 - i as i64 + j as i64,
            start,
            bound,
        );
        to_expansion(out)
    })
}

/// c^ν_{λμ}, read off the Jacobi–Trudi product.
pub fn lr_coefficient(lambda: &Partition, mu: &Partition, nu: &Partition) -> Coeff {
    if nu.weight() != lambda.weight() + mu.weight() {
        return 0;
    }
    product_expansion(lambda, mu, nu.len())
        .iter()
        .find(|(p, _)| p == nu)
        .map(|(_, c)| *c)
        .unwrap_or(0)
}

/// Counts LR tableaux of shape ν/μ and content λ: chains of horizontal strips
/// μ = ν⁰ ⊂ … ⊂ ν^k = ν of sizes λ_i whose reverse reading word is a lattice word.
pub fn lr_coefficient_tableaux(lambda: &Partition, mu: &Partition, nu: &Partition) -> Coeff {
    if nu.weight() != lambda.weight() + mu.weight() || !nu.contains(mu) {
        return 0;
    }
    lr_tableaux_product(lambda, mu, nu.len())
        .into_iter()
        .find(|(p, _)| p == nu)
        .map(|(_, c)| c)
        .unwrap_or(0)
}

/// s_λ·s_μ in Sym(bound) by LR tableau enumeration.
pub fn lr_tableaux_product(lambda: &Partition, mu: &Partition, bound: usize) -> Vec<(Partition, Coeff)> {
    let mut out: BTreeMap<Partition, Coeff> = BTreeMap::new();
    if lambda.len() > bound || mu.len() > bound {
        return Vec::new();
    }
    // counts[i][r] = number of boxes labelled i+1 in row r+1.
    fn place(
        label: usize,
        lambda: &Partition,
        shape: Vec<usize>,
        counts: &mut Vec<Vec<usize>>,
        bound: usize,
        out: &mut BTreeMap<Partition, Coeff>,
    ) {
        if label > lambda.len() {
            let nu = Partition::new(shape).expect("strips keep shape");
            accumulate(out, nu, 1);
            return;
        }
        let size = lambda.part(label);
        let rows = (shape.len() + 1).min(bound);
        let mut strip = vec![0usize; rows];
        #[allow(clippy::too_many_arguments)]
        fn rows_rec(
            r: usize,
            remaining: usize,
            cum: usize,
            cum_prev: usize,
            label: usize,
            lambda: &Partition,
            shape: &Vec<usize>,
            strip: &mut Vec<usize>,
            counts: &mut Vec<Vec<usize>>,
            bound: usize,
            out: &mut BTreeMap<Partition, Coeff>,
        ) {
            if r == strip.len() {
                if remaining == 0 {
                    let mut next = shape.clone();
                    next.resize(strip.len(), 0);
                    for (i, s) in strip.iter().enumerate() {
                        next[i] += s;
                    }
                    while next.last() == Some(&0) {
                        next.pop();
                    }
                    counts.push(strip.clone());
                    place(label + 1, lambda, next, counts, bound, out);
                    counts.pop();
                }
                return;
            }
            let base = shape.get(r).copied().unwrap_or(0);
            let cap_shape = if r == 0 { remaining } else { shape[r - 1] - base };
            // Lattice condition against the previous label (rows strictly above r).
            let cap_lattice = if label == 1 {
                usize::MAX
            } else {
                cum_prev.saturating_sub(cum)
            };
            let cap = cap_shape.min(remaining).min(cap_lattice);
            let prev_here = if label == 1 { 0 } else { counts[label - 2][r] };
            for add in 0..=cap {
                strip[r] = add;
                rows_rec(
                    r + 1,
                    remaining - add,
                    cum + add,
                    cum_prev + prev_here,
                    label,
                    lambda,
                    shape,
                    strip,
                    counts,
                    bound,
                    out,
                );
            }
            strip[r] = 0;
        }
        // Pad earlier count rows so row indices line up.
        for c in counts.iter_mut() {
            c.resize(rows, 0);
        }
        rows_rec(0, size, 0, 0, label, lambda, &shape, &mut strip, counts, bound, out);
    }
    let mut counts = Vec::new();
    place(1, lambda, mu.parts().to_vec(), &mut counts, bound, &mut out);
    out.into_iter().filter(|(_, c)| *c != 0).collect()
}

/// Expands s_ν(A ∪ B) as Σ c^ν_{αβ} s_α(A)·s_β(B) over a two-block shape.
pub fn split_schur(nu: &Partition, size_a: usize, size_b: usize) -> SchurElement {
    let shape = BlockShape::full(vec![size_a, size_b]);
    let mut terms = BTreeMap::new();
    for (tuple, c) in split_terms(nu, &[size_a, size_b]).iter() {
        accumulate(&mut terms, PartitionTuple(tuple.clone()), *c);
    }
    SchurElement::from_terms(&shape, terms)
}

static SPLITS: Memo<(Partition, Vec<usize>), Arc<Vec<(Vec<Partition>, Coeff)>>> = Memo::new();

/// Expands s_ν of the union of alphabets with the given sizes into tuples.
pub fn split_terms(nu: &Partition, sizes: &[usize]) -> Arc<Vec<(Vec<Partition>, Coeff)>> {
    let total: usize = sizes.iter().sum();
    if nu.len() > total {
        return Arc::new(Vec::new());
    }
    let key = (nu.clone(), sizes.to_vec());
    SPLITS.get_or_insert_with(key, || {
        let mut out: BTreeMap<Vec<Partition>, Coeff> = BTreeMap::new();
        match sizes {
            [] => {
                if nu.is_empty() {
                    out.insert(Vec::new(), 1);
                }
            }
            [_] => {
                out.insert(vec![nu.clone()], 1);
            }
            [first, rest @ ..] => {
                let rest_total: usize = rest.iter().sum();
                for w in 0..=nu.weight() {
                    for alpha in partitions_of(w, *first, nu.first_part()) {
                        if !nu.contains(&alpha) {
                            continue;
                        }
                        for (beta, c) in skew_expansion(nu, &alpha, rest_total).iter() {
                            for (tail, d) in split_terms(beta, rest).iter() {
                                let mut t = Vec::with_capacity(sizes.len());
                                t.push(alpha.clone());
                                t.extend(tail.iter().cloned());
                                accumulate(&mut out, t, mul_coeff(*c, *d));
                            }
                        }
                    }
                }
            }
        }
        Arc::new(out.into_iter().filter(|(_, c)| *c != 0).collect())
    })
}

/// The image of e_m of the full alphabet in a shape whose blocks exhaust it:
/// Σ over compositions m = i₁+…+i_b of the product of e_{i_j} in block j.
pub fn split_full_elementary(m: usize, shape: &BlockShape) -> Result<SchurElement, SchurError> {
    if shape.sizes().iter().sum::<usize>() != shape.n() {
        return Err(SchurError::ShapeNotFull {
            sizes: shape.sizes().to_vec(),
            n: shape.n(),
        });
    }
    Ok(elementary_of_blocks(m, shape, &(0..shape.blocks()).collect::<Vec<_>>()))
}

/// e_m of the union of the listed blocks, expanded into single columns.
pub fn elementary_of_blocks(m: usize, shape: &BlockShape, blocks: &[usize]) -> SchurElement {
    let mut terms = BTreeMap::new();
    fn rec(
        idx: usize,
        remaining: usize,
        shape: &BlockShape,
        blocks: &[usize],
        tuple: &mut Vec<Partition>,
        terms: &mut BTreeMap<PartitionTuple, Coeff>,
    ) {
        if idx == blocks.len() {
            if remaining == 0 {
                accumulate(terms, PartitionTuple(tuple.clone()), 1);
            }
            return;
        }
        let b = blocks[idx];
        for i in 0..=remaining.min(shape.size(b)) {
            tuple[b] = Partition::single_column(i);
            rec(idx + 1, remaining - i, shape, blocks, tuple, terms);
        }
        tuple[b] = Partition::empty();
    }
    let mut tuple = vec![Partition::empty(); shape.blocks()];
    rec(0, m, shape, blocks, &mut tuple, &mut terms);
    SchurElement::from_terms(shape, terms)
}

/// h_m of the union of the listed blocks, expanded over the blocks.
pub fn complete_of_blocks(m: usize, shape: &BlockShape, blocks: &[usize]) -> SchurElement {
    let mut terms = BTreeMap::new();
    fn rec(
        idx: usize,
        remaining: usize,
        shape: &BlockShape,
        blocks: &[usize],
        tuple: &mut Vec<Partition>,
        terms: &mut BTreeMap<PartitionTuple, Coeff>,
    ) {
        if idx == blocks.len() {
            if remaining == 0 {
                accumulate(terms, PartitionTuple(tuple.clone()), 1);
            }
            return;
        }
        let b = blocks[idx];
        let max = if shape.size(b) == 0 { 0 } else { remaining };
        for i in 0..=max {
            tuple[b] = Partition::single_row(i);
            rec(idx + 1, remaining - i, shape, blocks, tuple, terms);
        }
        tuple[b] = Partition::empty();
    }
    let mut tuple = vec![Partition::empty(); shape.blocks()];
    rec(0, m, shape, blocks, &mut tuple, &mut terms);
    SchurElement::from_terms(shape, terms)
}

/// s_ν of the union of the listed blocks, expanded over the blocks.
pub fn schur_of_blocks(nu: &Partition, shape: &BlockShape, blocks: &[usize]) -> SchurElement {
    let sizes: Vec<usize> = blocks.iter().map(|&b| shape.size(b)).collect();
    let mut terms = BTreeMap::new();
    for (parts, c) in split_terms(nu, &sizes).iter() {
        let mut tuple = vec![Partition::empty(); shape.blocks()];
        for (&b, p) in blocks.iter().zip(parts) {
            tuple[b] = p.clone();
        }
        accumulate(&mut terms, PartitionTuple(tuple), *c);
    }
    SchurElement::from_terms(shape, terms)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(parts: &[usize]) -> Partition {
        Partition::new(parts.to_vec()).unwrap()
    }

    fn one_block(n: usize) -> BlockShape {
        BlockShape::full(vec![n])
    }

    fn s(shape: &BlockShape, text: &str) -> SchurElement {
        SchurElement::parse(text, shape).unwrap()
    }

    #[test]
    fn pieri_examples() {
        let sh = one_block(2);
        let s1 = s(&sh, "s[1]");
        assert_eq!(s1.pieri_h(1, 0).unwrap(), s(&sh, "s[2] + s[1,1]"));
        assert_eq!(s1.pieri_h(0, 0).unwrap(), s1);
        let unit = SchurElement::unit(&sh);
        assert_eq!(unit.pieri_h(2, 0).unwrap(), s(&sh, "s[2]"));
        assert_eq!(s1.pieri_e(1, 0).unwrap(), s(&sh, "s[2] + s[1,1]"));
        assert_eq!(s1.pieri_e(2, 0).unwrap(), s(&sh, "s[2,1]"));
        assert!(unit.pieri_e(3, 0).unwrap().is_zero());
        assert!(s1.pieri_e(1, 1).is_err());
    }

    #[test]
    fn lr_examples() {
        assert_eq!(lr_coefficient(&p(&[3, 1]), &p(&[]), &p(&[3, 1])), 1);
        assert_eq!(lr_coefficient(&p(&[1]), &p(&[1]), &p(&[2])), 1);
        assert_eq!(lr_coefficient(&p(&[1]), &p(&[1]), &p(&[1, 1])), 1);
        assert_eq!(lr_coefficient(&p(&[2, 1]), &p(&[2, 1]), &p(&[3, 2, 1])), 2);
        assert_eq!(lr_coefficient_tableaux(&p(&[2, 1]), &p(&[2, 1]), &p(&[3, 2, 1])), 2);
        assert_eq!(lr_coefficient(&p(&[2]), &p(&[1]), &p(&[2])), 0);
    }

    #[test]
    fn cube_of_s1_in_two_variables() {
        let sh = one_block(2);
        let s1 = s(&sh, "s[1]");
        let cube = s1.multiply(&s1).unwrap().multiply(&s1).unwrap();
        assert_eq!(cube, s(&sh, "s[3] + 2*s[2,1]"));
    }

    #[test]
    fn split_examples() {
        assert_eq!(split_schur(&p(&[1]), 1, 1).to_string(), "s[|1] + s[1|]");
        let h2 = split_schur(&p(&[2]), 1, 1);
        assert_eq!(h2, s(h2.shape(), "s[2|] + s[1|1] + s[|2]"));
        let e2 = split_schur(&p(&[1, 1]), 1, 1);
        assert_eq!(e2, s(e2.shape(), "s[1|1]"));
        let sh = BlockShape::full(vec![2, 1]);
        let e = split_full_elementary(2, &sh).unwrap();
        assert_eq!(e, s(&sh, "s[1,1|] + s[1|1]"));
        assert_eq!(split_full_elementary(0, &sh).unwrap(), SchurElement::unit(&sh));
        let sh11 = BlockShape::full(vec![1, 1]);
        assert_eq!(split_full_elementary(1, &sh11).unwrap(), s(&sh11, "s[1|] + s[|1]"));
        assert!(split_full_elementary(1, &BlockShape::new(vec![1], 2).unwrap()).is_err());
    }

    #[test]
    fn text_round_trip() {
        let sh = BlockShape::full(vec![2, 1]);
        let x = s(&sh, "2*s[2,1|1] - s[|] + 3*s[1|]");
        assert_eq!(x.to_string(), "-s[|] + 3*s[1|] + 2*s[2,1|1]");
        assert_eq!(s(&sh, &x.to_string()), x);
        assert_eq!(s(&sh, "0"), SchurElement::zero(&sh));
        assert!(SchurElement::parse("s[1,1,1|]", &sh).is_err());
    }

    #[test]
    fn engines_agree_small() {
        for w1 in 0..=4 {
            for w2 in 0..=4 {
                for a in partitions_of(w1, 9, 9) {
                    for b in partitions_of(w2, 9, 9) {
                        let jt = product_expansion(&a, &b, 9);
                        let lr = lr_tableaux_product(&a, &b, 9);
                        assert_eq!(jt.to_vec(), lr, "{a} * {b}");
                    }
                }
            }
        }
    }
}
