//! Cohomology rings H*(G/H) = H*(BH) / (positive-degree part of H*(BG)) for H a
//! product of unitary blocks inside G = U(N) or G = U(a)×U(N−a).
//!
//! The production route is a straightening normal form. Write A_i for the union
//! of the first i block alphabets of a group of total size n. In the quotient
//! h_k(A_i) = 0 for k > n − |A_i|, so s_μ(A_i) = 0 whenever μ₁ > n − |A_i|.
//! Expanding s_λ(X_i) = s_λ(A_i − A_{i−1}) = Σ_μ s_μ(A_i)·s_{λ/μ}(−A_{i−1})
//! rewrites any λ with λ₁ too large into terms of smaller X_i-degree. Tuples
//! with every λ_i inside box(n_i, n − |A_i|) form a basis, which `verify`
//! proves at runtime. A degreewise lattice route (HNF/SNF of the ideal) is kept
//! as an independent cross-check for small shapes.

use std::collections::{BTreeMap, HashMap};
use std::sync::{Arc, OnceLock};

use num_bigint::BigInt;
use num_traits::{One, Zero};
use parking_lot::{Mutex, RwLock};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::laurent::{poincare_flag, LaurentPoly};
use crate::matrix::{elementary_divisors, row_echelon, IntMatrix, PivotStrategy};
use crate::partition::{partitions_in_box, partitions_of, Partition};
use crate::schur::{
    accumulate, elementary_of_blocks, mul_coeff, product_expansion, skew_expansion, split_full_elementary, split_terms,
    BlockShape, Coeff, PartitionTuple, SchurElement, SchurError,
};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum FlagRingError {
    #[error("invalid subgroup: {0}")]
    InvalidSubgroup(String),
    #[error("quotient is not free: {0}")]
    NotFree(String),
    #[error("element shape {got:?} does not match ring shape {want:?}")]
    ShapeMismatch { got: Vec<usize>, want: Vec<usize> },
    #[error(transparent)]
    Schur(#[from] SchurError),
}

/// Block sizes of H together with the contiguous grouping of blocks into the
/// unitary factors of the ambient group.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SubgroupBlocks {
    blocks: Vec<usize>,
    /// Number of consecutive blocks in each ambient factor.
    groups: Vec<usize>,
}

impl SubgroupBlocks {
    /// H inside a single U(N) with N = Σ blocks.
    pub fn in_unitary(blocks: Vec<usize>) -> Self {
        let groups = vec![blocks.len()];
        SubgroupBlocks { blocks, groups }
    }

    pub fn new(blocks: Vec<usize>, groups: Vec<usize>) -> Result<Self, FlagRingError> {
        if groups.iter().sum::<usize>() != blocks.len() || groups.contains(&0) {
            return Err(FlagRingError::InvalidSubgroup(format!(
                "grouping {groups:?} does not partition {} blocks",
                blocks.len()
            )));
        }
        Ok(SubgroupBlocks { blocks, groups })
    }

    pub fn blocks(&self) -> &[usize] {
        &self.blocks
    }

    pub fn n(&self) -> usize {
        self.blocks.iter().sum()
    }

    /// Block index ranges of the ambient factors.
    pub fn group_ranges(&self) -> Vec<std::ops::Range<usize>> {
        let mut start = 0;
        self.groups
            .iter()
            .map(|&g| {
                let r = start..start + g;
                start += g;
                r
            })
            .collect()
    }

    /// Sizes of the ambient unitary factors.
    pub fn factor_sizes(&self) -> Vec<usize> {
        self.group_ranges()
            .into_iter()
            .map(|r| self.blocks[r].iter().sum())
            .collect()
    }

    pub fn shape(&self) -> BlockShape {
        BlockShape::full(self.blocks.clone())
    }

    /// Real dimension of the homogeneous space.
    pub fn dimension(&self) -> usize {
        let g: usize = self.factor_sizes().iter().map(|n| n * n).sum();
        g - self.blocks.iter().map(|b| b * b).sum::<usize>()
    }

    /// Product over factors of the flag Poincaré polynomials.
    pub fn expected_poincare(&self) -> LaurentPoly {
        self.group_ranges().into_iter().fold(LaurentPoly::one(), |acc, r| {
            let blocks = &self.blocks[r];
            let n = blocks.iter().sum();
            &acc * &poincare_flag(blocks, n).expect("blocks sum to the factor size")
        })
    }

    /// Column bound of the standard box for each block: n_factor − |A_i|.
    fn residuals(&self) -> Vec<usize> {
        let mut out = vec![0; self.blocks.len()];
        for r in self.group_ranges() {
            let n: usize = self.blocks[r.clone()].iter().sum();
            let mut used = 0;
            for i in r {
                used += self.blocks[i];
                out[i] = n - used;
            }
        }
        out
    }
}

type Coords = Arc<Vec<(usize, Coeff)>>;

/// Key for the cached rewriting relation of a block.
type RelationKey = (Partition, Vec<usize>, usize, usize);

/// A flag-manifold cohomology ring presented on the standard Schur tuples.
#[derive(Debug)]
pub struct QuotientRing {
    subgroup: SubgroupBlocks,
    shape: BlockShape,
    residuals: Vec<usize>,
    /// Standard tuples per degree (in boxes), in tuple order.
    basis: Vec<Vec<PartitionTuple>>,
    index: HashMap<PartitionTuple, usize>,
    normal_forms: RwLock<HashMap<PartitionTuple, Coords>>,
    relations: RwLock<HashMap<RelationKey, Arc<Vec<(Vec<Partition>, Coeff)>>>>,
}

impl QuotientRing {
    /// Builds the ring and proves freeness of the standard basis (see `verify`).
    pub fn build(subgroup: &SubgroupBlocks) -> Result<Self, FlagRingError> {
        let ring = Self::build_unchecked(subgroup);
        ring.verify()?;
        Ok(ring)
    }

    /// Builds the ring without the runtime freeness proof.
    pub fn build_unchecked(subgroup: &SubgroupBlocks) -> Self {
        let residuals = subgroup.residuals();
        let top = subgroup.dimension() / 2;
        let mut basis = vec![Vec::new(); top + 1];
        let mut tuples: Vec<Vec<Partition>> = vec![Vec::new()];
        for (i, &n) in subgroup.blocks.iter().enumerate() {
            let choices = partitions_in_box(n, residuals[i]);
            tuples = tuples
                .into_iter()
                .flat_map(|t| {
                    choices.iter().map(move |p| {
                        let mut t = t.clone();
                        t.push(p.clone());
                        t
                    })
                })
                .collect();
        }
        for t in tuples {
            let t = PartitionTuple(t);
            basis[t.weight()].push(t);
        }
        let mut index = HashMap::new();
        for level in basis.iter_mut() {
            level.sort();
            for (i, t) in level.iter().enumerate() {
                index.insert(t.clone(), i);
            }
        }
        QuotientRing {
            subgroup: subgroup.clone(),
            shape: subgroup.shape(),
            residuals,
            basis,
            index,
            normal_forms: RwLock::new(HashMap::new()),
            relations: RwLock::new(HashMap::new()),
        }
    }

    pub fn subgroup(&self) -> &SubgroupBlocks {
        &self.subgroup
    }

    pub fn shape(&self) -> &BlockShape {
        &self.shape
    }

    /// Top degree in boxes (half the real dimension).
    pub fn top_degree(&self) -> usize {
        self.basis.len() - 1
    }

    /// Rank in degree `d` (boxes).
    pub fn rank(&self, d: usize) -> usize {
        self.basis.get(d).map_or(0, Vec::len)
    }

    pub fn total_rank(&self) -> usize {
        self.basis.iter().map(Vec::len).sum()
    }

    pub fn basis(&self, d: usize) -> &[PartitionTuple] {
        self.basis.get(d).map_or(&[], Vec::as_slice)
    }

    /// Σ rank_d q^{2d}.
    pub fn poincare(&self) -> LaurentPoly {
        LaurentPoly::from_terms(
            self.basis
                .iter()
                .enumerate()
                .map(|(d, b)| (2 * d as i64, b.len() as i64)),
        )
    }

    /// Coordinates of an ambient tuple in the standard basis of its degree.
    pub fn normal_form(&self, t: &PartitionTuple) -> Coords {
        if let Some(&i) = self.index.get(t) {
            return Arc::new(vec![(i, 1)]);
        }
        if t.weight() > self.top_degree() {
            return Arc::new(Vec::new());
        }
        if let Some(c) = self.normal_forms.read().get(t) {
            return c.clone();
        }
        let mut acc: BTreeMap<usize, Coeff> = BTreeMap::new();
        for (u, c) in self.rewrite(t) {
            for &(i, k) in self.normal_form(&u).iter() {
                accumulate(&mut acc, i, mul_coeff(c, k));
            }
        }
        let coords: Coords = Arc::new(acc.into_iter().collect());
        self.normal_forms.write().insert(t.clone(), coords.clone());
        coords
    }

    /// One straightening step on the last non-standard block.
    fn rewrite(&self, t: &PartitionTuple) -> BTreeMap<PartitionTuple, Coeff> {
        let blocks = self.subgroup.blocks();
        let i = (0..blocks.len())
            .rev()
            .find(|&i| t.0[i].first_part() > self.residuals[i])
            .expect("non-standard tuple has an offending block");
        let range = self
            .subgroup
            .group_ranges()
            .into_iter()
            .find(|r| r.contains(&i))
            .expect("block lies in a group");
        let lower: Vec<usize> = (range.start..i).collect();
        let lower_sizes: Vec<usize> = lower.iter().map(|&j| blocks[j]).collect();
        let relation = self.relation(&t.0[i], &lower_sizes, blocks[i], self.residuals[i]);
        let mut out = BTreeMap::new();
        for (tau, c) in relation.iter() {
            // tau lists partitions for the lower blocks, then for block i.
            let mut partial: Vec<(Vec<Partition>, Coeff)> = vec![(t.0.clone(), *c)];
            partial.iter_mut().for_each(|(p, _)| p[i] = tau[lower.len()].clone());
            for (pos, &j) in lower.iter().enumerate() {
                if tau[pos].is_empty() {
                    continue;
                }
                let mut next = Vec::new();
                for (p, k) in &partial {
                    for (nu, m) in product_expansion(&p[j], &tau[pos], blocks[j]).iter() {
                        let mut q = p.clone();
                        q[j] = nu.clone();
                        next.push((q, mul_coeff(*k, *m)));
                    }
                }
                partial = next;
            }
            for (p, k) in partial {
                accumulate(&mut out, PartitionTuple(p), k);
            }
        }
        out
    }

    /// s_λ(X) ≡ Σ_{μ ⊆ λ, μ₁ ≤ r} (−1)^{|λ/μ|} s_μ(B ∪ X)·s_{λ'/μ'}(B), expanded over
    /// the lower blocks B and X.
    fn relation(
        &self,
        lambda: &Partition,
        lower_sizes: &[usize],
        size_x: usize,
        residual: usize,
    ) -> Arc<Vec<(Vec<Partition>, Coeff)>> {
        let key = (lambda.clone(), lower_sizes.to_vec(), size_x, residual);
        if let Some(r) = self.relations.read().get(&key) {
            return r.clone();
        }
        let b_total: usize = lower_sizes.iter().sum();
        let mut sizes_ax = lower_sizes.to_vec();
        sizes_ax.push(size_x);
        let conj = lambda.transpose();
        let mut acc: BTreeMap<Vec<Partition>, Coeff> = BTreeMap::new();
        for w in 0..lambda.weight() {
            for mu in partitions_of(w, lambda.len(), residual.min(lambda.first_part())) {
                if !lambda.contains(&mu) {
                    continue;
                }
                let sign = if (lambda.weight() - w).is_multiple_of(2) { 1 } else { -1 };
                let split_a = split_terms(&mu, &sizes_ax);
                if split_a.is_empty() {
                    continue;
                }
                for (kappa, c) in skew_expansion(&conj, &mu.transpose(), b_total).iter() {
                    for (gamma, d) in split_terms(kappa, lower_sizes).iter() {
                        for (beta, e) in split_a.iter() {
                            // Multiply the B-parts of beta and gamma blockwise.
                            let mut partial: Vec<(Vec<Partition>, Coeff)> =
                                vec![(Vec::new(), sign * mul_coeff(mul_coeff(*c, *d), *e))];
                            for (pos, &bound) in lower_sizes.iter().enumerate() {
                                let prod = product_expansion(&beta[pos], &gamma[pos], bound);
                                let mut next = Vec::new();
                                for (p, k) in &partial {
                                    for (nu, m) in prod.iter() {
                                        let mut q = p.clone();
                                        q.push(nu.clone());
                                        next.push((q, mul_coeff(*k, *m)));
                                    }
                                }
                                partial = next;
                            }
                            for (mut p, k) in partial {
                                p.push(beta[lower_sizes.len()].clone());
                                accumulate(&mut acc, p, k);
                            }
                        }
                    }
                }
            }
        }
        let rel = Arc::new(acc.into_iter().collect::<Vec<_>>());
        self.relations.write().insert(key, rel.clone());
        rel
    }

    /// Reduces an ambient element to a coordinate vector in its degree.
    pub fn reduce(&self, x: &SchurElement) -> Result<(usize, Vec<Coeff>), FlagRingError> {
        self.check_shape(x)?;
        let d = x.degree()?.unwrap_or(0);
        let mut v = vec![0; self.rank(d)];
        for (t, &c) in x.terms() {
            for &(i, k) in self.normal_form(t).iter() {
                v[i] = crate::schur::add_coeff(v[i], mul_coeff(c, k));
            }
        }
        Ok((d, v))
    }

    fn check_shape(&self, x: &SchurElement) -> Result<(), FlagRingError> {
        if x.shape().sizes() != self.shape.sizes() {
            return Err(FlagRingError::ShapeMismatch {
                got: x.shape().sizes().to_vec(),
                want: self.shape.sizes().to_vec(),
            });
        }
        Ok(())
    }

    /// Matrices of multiplication by a homogeneous `c`, from degree d to d + deg(c),
    /// for every degree d (boxes) of the ring.
    pub fn mult_operator(&self, c: &SchurElement) -> Result<GradedOperator, FlagRingError> {
        self.check_shape(c)?;
        let k = c.degree()?.unwrap_or(0);
        let mut maps = Vec::with_capacity(self.basis.len());
        for d in 0..self.basis.len() {
            let rows = self.rank(d + k);
            let mut m = vec![vec![0 as Coeff; self.rank(d)]; rows];
            if rows > 0 && !c.is_zero() {
                for (col, s) in self.basis[d].iter().enumerate() {
                    let x = SchurElement::monomial(&self.shape, s.clone(), 1)?;
                    let prod = c.multiply(&x)?;
                    for (t, &a) in prod.terms() {
                        for &(i, b) in self.normal_form(t).iter() {
                            m[i][col] = crate::schur::add_coeff(m[i][col], mul_coeff(a, b));
                        }
                    }
                }
            }
            maps.push(m);
        }
        let cols = (0..self.basis.len()).map(|d| self.rank(d)).collect();
        Ok(GradedOperator::new(k, maps, cols))
    }

    /// Multiplication by Σ_{p+q=i} e_p(first)·e_q(second).
    pub fn chern_action(&self, i: usize, pair: (usize, usize)) -> Result<GradedOperator, FlagRingError> {
        if pair.0 == pair.1 || pair.0 >= self.shape.blocks() || pair.1 >= self.shape.blocks() {
            return Err(FlagRingError::InvalidSubgroup(format!("bad block pair {pair:?}")));
        }
        self.mult_operator(&elementary_of_blocks(i, &self.shape, &[pair.0, pair.1]))
    }

    /// Runtime proof that the standard tuples form a Z-basis of the quotient.
    ///
    /// Straightening shows the standard tuples span. The operators of the
    /// generators e_k(X_j) computed from normal forms define a module map φ from
    /// the ambient polynomial ring onto Z^rank, provided they commute. If φ kills
    /// e_m of every ambient factor and sends each standard tuple to its own unit
    /// vector, the ideal is exactly ker φ and the quotient is free on the
    /// standard tuples.
    pub fn verify(&self) -> Result<(), FlagRingError> {
        let blocks = self.subgroup.blocks().to_vec();
        let mut gens: Vec<Vec<GradedOperator>> = Vec::new();
        for (j, &n) in blocks.iter().enumerate() {
            let mut ops = Vec::new();
            for k in 1..=n {
                ops.push(self.mult_operator(&SchurElement::elementary(&self.shape, j, k)?)?);
            }
            gens.push(ops);
        }
        let flat: Vec<&GradedOperator> = gens.iter().flatten().collect();
        for (x, a) in flat.iter().enumerate() {
            for b in &flat[x + 1..] {
                if !a.commutes_with(b) {
                    return Err(FlagRingError::NotFree("generator operators do not commute".into()));
                }
            }
        }
        let top = self.top_degree();
        // e_m of each ambient factor acts as zero.
        for range in self.subgroup.group_ranges() {
            let size: usize = blocks[range.clone()].iter().sum();
            for m in 1..=size {
                for d in 0..=top {
                    for col in 0..self.rank(d) {
                        let mut v = vec![0; self.rank(d)];
                        v[col] = 1;
                        let out = apply_elementary_of_range(&gens, range.clone(), m, d, &v);
                        if out.iter().any(|&x| x != 0) {
                            return Err(FlagRingError::NotFree(format!(
                                "e_{m} of a factor does not vanish in degree {d}"
                            )));
                        }
                    }
                }
            }
        }
        // φ(standard tuple) is its unit vector.
        for d in 0..=top {
            for (col, s) in self.basis[d].iter().enumerate() {
                let mut v = vec![1 as Coeff];
                let mut deg = 0;
                for (j, lambda) in s.0.iter().enumerate() {
                    v = apply_schur(&gens[j], lambda, deg, &v);
                    deg += lambda.weight();
                }
                let ok = v.len() == self.rank(d) && v.iter().enumerate().all(|(i, &x)| x == i64::from(i == col));
                if !ok {
                    return Err(FlagRingError::NotFree(format!("standard tuple {s} is not independent")));
                }
            }
        }
        Ok(())
    }

    /// Independent lattice check in degree `d`: the ideal lattice spanned by
    /// e_m(factor)·(ambient tuple) is saturated, has corank equal to the rank
    /// here, and is annihilated by the normal form.
    pub fn lattice_check(&self, d: usize) -> Result<(), FlagRingError> {
        let ambient = ambient_basis(&self.shape, d);
        let pos: HashMap<&PartitionTuple, usize> = ambient.iter().enumerate().map(|(i, t)| (t, i)).collect();
        let mut rows: Vec<Vec<i64>> = Vec::new();
        for range in self.subgroup.group_ranges() {
            let blocks: Vec<usize> = range.collect();
            let size: usize = blocks.iter().map(|&b| self.shape.size(b)).sum();
            for m in 1..=size.min(d) {
                let e = elementary_of_blocks(m, &self.shape, &blocks);
                for b in ambient_basis(&self.shape, d - m) {
                    let prod = e.multiply(&SchurElement::monomial(&self.shape, b, 1)?)?;
                    let mut row = vec![0; ambient.len()];
                    for (t, &c) in prod.terms() {
                        row[pos[t]] += c;
                    }
                    rows.push(row);
                }
            }
        }
        let gens = if rows.is_empty() {
            IntMatrix::zeros(0, ambient.len())
        } else {
            IntMatrix::from_rows(&rows)
        };
        let (h, _, pivots) = row_echelon(&gens, PivotStrategy::MinAbs, true);
        let divisors = elementary_divisors(&h.submatrix(0, pivots.len(), 0, h.cols()));
        if divisors.iter().any(|x| !x.is_one()) {
            return Err(FlagRingError::NotFree(format!(
                "ideal lattice not saturated in degree {d}"
            )));
        }
        if ambient.len() - pivots.len() != self.rank(d) {
            return Err(FlagRingError::NotFree(format!(
                "lattice corank {} differs from rank {} in degree {d}",
                ambient.len() - pivots.len(),
                self.rank(d)
            )));
        }
        for r in 0..pivots.len() {
            let mut v = vec![BigInt::zero(); self.rank(d)];
            for (j, t) in ambient.iter().enumerate() {
                let c = h.get(r, j);
                if c.is_zero() {
                    continue;
                }
                for &(i, k) in self.normal_form(t).iter() {
                    v[i] += c * BigInt::from(k);
                }
            }
            if v.iter().any(|x| !x.is_zero()) {
                return Err(FlagRingError::NotFree(format!("ideal element survives in degree {d}")));
            }
        }
        Ok(())
    }
}

/// Applies e_m of the union of the blocks in `range` to a vector in degree `d`.
fn apply_elementary_of_range(
    gens: &[Vec<GradedOperator>],
    range: std::ops::Range<usize>,
    m: usize,
    d: usize,
    v: &[Coeff],
) -> Vec<Coeff> {
    // Sum over compositions of m into the blocks, applying e_{i_j}(X_j) in turn.
    fn rec(
        gens: &[Vec<GradedOperator>],
        blocks: &[usize],
        remaining: usize,
        d: usize,
        v: Vec<Coeff>,
        out: &mut Vec<Coeff>,
    ) {
        let Some((&j, rest)) = blocks.split_first() else {
            if remaining == 0 {
                for (o, x) in out.iter_mut().zip(&v) {
                    *o += x;
                }
            }
            return;
        };
        for i in 0..=remaining.min(gens[j].len()) {
            let w = if i == 0 { v.clone() } else { gens[j][i - 1].apply(d, &v) };
            rec(gens, rest, remaining - i, d + i, w, out);
        }
    }
    let blocks: Vec<usize> = range.collect();
    let target = gens.iter().flatten().next().map_or(0, |g| g.rows(d + m));
    let mut out = vec![0; target];
    rec(gens, &blocks, m, d, v.to_vec(), &mut out);
    out
}

/// s_λ evaluated on the elementary operators of one block, via dual Jacobi–Trudi.
fn apply_schur(ops: &[GradedOperator], lambda: &Partition, d: usize, v: &[Coeff]) -> Vec<Coeff> {
    let m = lambda.first_part();
    if m == 0 {
        return v.to_vec();
    }
    let conj = lambda.transpose();
    let target_rows = |deg: usize| ops.first().map_or(0, |g| g.rows(deg));
    // G(S) = determinant over rows m−|S|+1..m and columns S applied to v.
    let mut memo: HashMap<u32, (usize, Vec<Coeff>)> = HashMap::new();
    memo.insert(0, (d, v.to_vec()));
    let full: u32 = (1u32 << m) - 1;
    let mut masks: Vec<u32> = (1..=full).collect();
    masks.sort_by_key(|s| s.count_ones());
    for s in masks {
        let row = m - s.count_ones() as usize + 1;
        let mut acc: Option<(usize, Vec<Coeff>)> = None;
        let mut below = 0;
        for col in 1..=m {
            let bit = 1u32 << (col - 1);
            if s & bit == 0 {
                continue;
            }
            let sign = if below % 2 == 0 { 1 } else { -1 };
            below += 1;
            let k = conj.part(row) as i64 - row as i64 + col as i64;
            let (deg, sub) = &memo[&(s & !bit)];
            let (deg, img) = match k {
                k if k < 0 => continue,
                0 => (*deg, sub.clone()),
                k if (k as usize) > ops.len() => (*deg + k as usize, vec![0; target_rows(*deg + k as usize)]),
                k => (*deg + k as usize, ops[k as usize - 1].apply(*deg, sub)),
            };
            match acc.as_mut() {
                None => acc = Some((deg, img.iter().map(|x| sign * x).collect())),
                Some((_, a)) => {
                    for (x, y) in a.iter_mut().zip(&img) {
                        *x += sign * y;
                    }
                }
            }
        }
        let weight_so_far: usize = (row..=m).map(|r| conj.part(r)).sum();
        let entry = acc.unwrap_or_else(|| (d + weight_so_far, vec![0; target_rows(d + weight_so_far)]));
        memo.insert(s, entry);
    }
    memo.remove(&full).map(|(_, v)| v).unwrap_or_default()
}

/// All ambient tuples of a given degree (boxes) in tuple order.
pub fn ambient_basis(shape: &BlockShape, d: usize) -> Vec<PartitionTuple> {
    fn rec(shape: &BlockShape, j: usize, remaining: usize, cur: &mut Vec<Partition>, out: &mut Vec<PartitionTuple>) {
        if j == shape.blocks() {
            if remaining == 0 {
                out.push(PartitionTuple(cur.clone()));
            }
            return;
        }
        let n = shape.size(j);
        let max = if n == 0 { 0 } else { remaining };
        for w in 0..=max {
            for p in partitions_of(w, n, w) {
                cur.push(p);
                rec(shape, j + 1, remaining - w, cur, out);
                cur.pop();
            }
        }
    }
    let mut out = Vec::new();
    rec(shape, 0, d, &mut Vec::new(), &mut out);
    out.sort();
    out
}

/// Degreewise integer matrices of a homogeneous operator on a graded free module.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GradedOperator {
    /// Degree raised, in boxes.
    pub degree: usize,
    /// `maps[d]` sends degree d to degree d + `degree`, as rows × cols.
    pub maps: Vec<Vec<Vec<Coeff>>>,
    /// Source rank in each degree; kept because a zero-row matrix hides it.
    pub cols: Vec<usize>,
}

impl GradedOperator {
    fn new(degree: usize, maps: Vec<Vec<Vec<Coeff>>>, cols: Vec<usize>) -> Self {
        GradedOperator { degree, maps, cols }
    }

    /// Target rank landing in degree `d`.
    pub fn rows(&self, d: usize) -> usize {
        if d < self.degree {
            return 0;
        }
        self.maps.get(d - self.degree).map_or(0, Vec::len)
    }

    pub fn matrix(&self, d: usize) -> IntMatrix {
        let m = &self.maps[d];
        IntMatrix::from_fn(m.len(), self.cols[d], |i, j| BigInt::from(m[i][j]))
    }

    pub fn apply(&self, d: usize, v: &[Coeff]) -> Vec<Coeff> {
        match self.maps.get(d) {
            Some(m) => m
                .iter()
                .map(|row| row.iter().zip(v).map(|(a, b)| mul_coeff(*a, *b)).sum())
                .collect(),
            None => Vec::new(),
        }
    }

    pub fn is_zero(&self) -> bool {
        self.maps.iter().flatten().flatten().all(|&x| x == 0)
    }

    pub fn compose(&self, first: &GradedOperator) -> GradedOperator {
        let mut maps = Vec::with_capacity(first.maps.len());
        for d in 0..first.maps.len() {
            let a = &first.maps[d];
            let mid = d + first.degree;
            let cols = first.cols[d];
            let b = self.maps.get(mid);
            let rows = b.map_or(0, Vec::len);
            let mut out = vec![vec![0; cols]; rows];
            if let Some(b) = b {
                for i in 0..rows {
                    for (k, row_a) in a.iter().enumerate() {
                        let x = b[i][k];
                        if x == 0 {
                            continue;
                        }
                        for j in 0..cols {
                            out[i][j] += x * row_a[j];
                        }
                    }
                }
            }
            maps.push(out);
        }
        GradedOperator::new(self.degree + first.degree, maps, first.cols.clone())
    }

    pub fn commutes_with(&self, other: &GradedOperator) -> bool {
        let ab = self.compose(other);
        let ba = other.compose(self);
        ab.maps.iter().zip(&ba.maps).all(|(x, y)| {
            // Empty (zero-row) and zero matrices compare equal.
            let zx = x.iter().flatten().all(|&v| v == 0);
            let zy = y.iter().flatten().all(|&v| v == 0);
            x == y || (zx && zy)
        })
    }
}

/// Builds the quotient presentation; fails if the runtime freeness proof fails.
pub fn build_quotient(subgroup: &SubgroupBlocks) -> Result<QuotientRing, FlagRingError> {
    QuotientRing::build(subgroup)
}

/// The image of e_m of the full alphabet, for callers that need the ideal generators.
pub fn ideal_generator(shape: &BlockShape, m: usize) -> Result<SchurElement, FlagRingError> {
    Ok(split_full_elementary(m, shape)?)
}

/// The polynomial ring H*(BH) truncated above a degree, as a graded free module.
#[derive(Clone, Debug)]
pub struct AmbientRing {
    shape: BlockShape,
    max_degree: usize,
    basis: Vec<Vec<PartitionTuple>>,
    index: Vec<HashMap<PartitionTuple, usize>>,
}

impl AmbientRing {
    /// Degrees 0..=max_degree (boxes).
    pub fn new(shape: &BlockShape, max_degree: usize) -> Self {
        let basis: Vec<Vec<PartitionTuple>> = (0..=max_degree).map(|d| ambient_basis(shape, d)).collect();
        let index = basis
            .iter()
            .map(|b| b.iter().enumerate().map(|(i, t)| (t.clone(), i)).collect())
            .collect();
        AmbientRing {
            shape: shape.clone(),
            max_degree,
            basis,
            index,
        }
    }

    pub fn shape(&self) -> &BlockShape {
        &self.shape
    }

    pub fn max_degree(&self) -> usize {
        self.max_degree
    }

    pub fn rank(&self, d: usize) -> usize {
        self.basis.get(d).map_or(0, Vec::len)
    }

    pub fn mult_operator(&self, c: &SchurElement) -> Result<GradedOperator, FlagRingError> {
        if c.shape().sizes() != self.shape.sizes() {
            return Err(FlagRingError::ShapeMismatch {
                got: c.shape().sizes().to_vec(),
                want: self.shape.sizes().to_vec(),
            });
        }
        let k = c.degree()?.unwrap_or(0);
        let mut maps = Vec::new();
        for d in 0..=self.max_degree {
            let rows = self.rank(d + k);
            let mut m = vec![vec![0 as Coeff; self.rank(d)]; rows];
            if rows > 0 {
                for (col, s) in self.basis[d].iter().enumerate() {
                    let prod = c.multiply(&SchurElement::monomial(&self.shape, s.clone(), 1)?)?;
                    for (t, &a) in prod.terms() {
                        let i = self.index[d + k][t];
                        m[i][col] += a;
                    }
                }
            }
            maps.push(m);
        }
        let cols = (0..=self.max_degree).map(|d| self.rank(d)).collect();
        Ok(GradedOperator::new(k, maps, cols))
    }

    /// Checks that each generator is a non-zero-divisor modulo the previous ones,
    /// degreewise through the truncation, and that every partial quotient is free.
    pub fn regularity_check(&self, generators: &[SchurElement]) -> Result<(), FlagRingError> {
        let ops: Vec<GradedOperator> = generators
            .iter()
            .map(|g| self.mult_operator(g))
            .collect::<Result<_, _>>()?;
        for i in 0..ops.len() {
            for d in 0..=self.max_degree {
                let k = ops[i].degree;
                // Ideal of the previous generators in degrees d and d + k.
                let prev_low = ideal_rows(&ops[..i], d, self.rank(d));
                let prev_high = ideal_rows(&ops[..i], d + k, self.rank(d + k));
                if d + k > self.max_degree {
                    continue;
                }
                let with_g = {
                    let mut rows = prev_high.clone();
                    let g = &ops[i].maps[d];
                    for col in 0..self.rank(d) {
                        rows.push(g.iter().map(|r| r[col]).collect());
                    }
                    rows
                };
                let r_low = rank_rows(&prev_low, self.rank(d));
                let r_high = rank_rows(&prev_high, self.rank(d + k));
                let r_with = rank_rows(&with_g, self.rank(d + k));
                if r_with - r_high != self.rank(d) - r_low {
                    return Err(FlagRingError::NotFree(format!(
                        "generator {} is a zero divisor in degree {d}",
                        i + 1
                    )));
                }
                let divs = divisors_rows(&prev_high, self.rank(d + k));
                if divs.iter().any(|x| !x.is_one()) {
                    return Err(FlagRingError::NotFree(format!("partial quotient {i} has torsion")));
                }
            }
        }
        Ok(())
    }
}

/// Rows spanning Σ_j g_j · R_{d − deg g_j}, in degree-d coordinates.
fn ideal_rows(ops: &[GradedOperator], d: usize, width: usize) -> Vec<Vec<Coeff>> {
    let mut rows = Vec::new();
    for op in ops {
        if d < op.degree {
            continue;
        }
        let Some(m) = op.maps.get(d - op.degree) else {
            continue;
        };
        for col in 0..op.cols[d - op.degree] {
            let row: Vec<Coeff> = m.iter().map(|r| r[col]).collect();
            debug_assert_eq!(row.len(), width);
            rows.push(row);
        }
    }
    rows
}

fn to_matrix(rows: &[Vec<Coeff>], width: usize) -> IntMatrix {
    if rows.is_empty() {
        return IntMatrix::zeros(0, width);
    }
    IntMatrix::from_rows(rows)
}

fn rank_rows(rows: &[Vec<Coeff>], width: usize) -> usize {
    to_matrix(rows, width).rank()
}

fn divisors_rows(rows: &[Vec<Coeff>], width: usize) -> Vec<BigInt> {
    elementary_divisors(&to_matrix(rows, width))
}

/// Verified rings shared across computations; a ring never changes once built.
pub fn cached_quotient(subgroup: &SubgroupBlocks) -> Result<Arc<QuotientRing>, FlagRingError> {
    static CACHE: OnceLock<Mutex<HashMap<SubgroupBlocks, Arc<QuotientRing>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(Default::default);
    if let Some(r) = cache.lock().get(subgroup) {
        return Ok(r.clone());
    }
    let ring = Arc::new(QuotientRing::build(subgroup)?);
    Ok(cache.lock().entry(subgroup.clone()).or_insert(ring).clone())
}
