//! Components of the SU(N) representation spaces of the unknot, Hopf link and
//! trefoil, their integral cohomology, and floating-point checks of the
//! meridian relations.
//!
//! A trefoil component is U(N)/K_l with K_l = U(l) × ΔU(m) × U(N−2a+l), m = a−l.
//! Its cohomology is computed here as Tor over H*(BU(N)) of H*(BK_l), resolving
//! H*(BK_l) over H*(B(U(l)×U(2m)×U(N−2a+l))) ⊗ Sym(m) by the Koszul complex of
//! c_k ⊗ 1 − 1 ⊗ e_k(y ⊔ y). This is a different ring and a different regular
//! sequence from the link-side summand, which quotients the full flag ring by
//! e_i(y) − e_i(z).

use std::collections::BTreeMap;
use std::f64::consts::PI;

use num_bigint::BigInt;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::complex::{AbelianGroup, Bidegree, BigradedAbelianGroup, ComplexError, IntegerChainComplex};
use crate::flag_ring::{cached_quotient, AmbientRing, FlagRingError, GradedOperator, SubgroupBlocks};
use crate::koszul::{build_koszul, KoszulError, KoszulSpec};
use crate::laurent::{poincare_flag, LaurentPoly};
use crate::link::{self, Framing, LinkError, LinkKind, LinkSpec};
use crate::matrix::IntMatrix;
use crate::schur::{BlockShape, Coeff, SchurElement, SchurError};
use crate::unitary::{meridian_phase, principal_angles, subspace_to_matrix, ComplexMatrix, NumericError};

#[derive(Debug, Error)]
pub enum RepSpaceError {
    #[error("parameters out of range: {0}")]
    Range(String),
    #[error(transparent)]
    Link(#[from] LinkError),
    #[error(transparent)]
    Ring(#[from] FlagRingError),
    #[error(transparent)]
    Schur(#[from] SchurError),
    #[error(transparent)]
    Koszul(#[from] KoszulError),
    #[error(transparent)]
    Complex(#[from] ComplexError),
    #[error(transparent)]
    Numeric(#[from] NumericError),
    #[error("cohomology check failed: {0}")]
    Mismatch(String),
}

/// Which family a component belongs to, with its index.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "lowercase")]
pub enum ComponentParams {
    Unknot,
    Hopf { k: usize },
    Trefoil { l: usize },
}

/// A component U(N)/K with K block diagonal, two blocks optionally identified.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ComponentDescriptor {
    pub n: usize,
    pub params: ComponentParams,
    blocks: Vec<usize>,
    diagonal_pair: Option<(usize, usize)>,
}

impl ComponentDescriptor {
    pub fn new(
        n: usize,
        params: ComponentParams,
        blocks: Vec<usize>,
        diagonal_pair: Option<(usize, usize)>,
    ) -> Result<Self, RepSpaceError> {
        if blocks.iter().sum::<usize>() != n {
            return Err(RepSpaceError::Range(format!("blocks {blocks:?} do not fill C^{n}")));
        }
        if let Some((i, j)) = diagonal_pair {
            if i >= j || j >= blocks.len() || blocks[i] != blocks[j] {
                return Err(RepSpaceError::Range(format!(
                    "diagonal pair {:?} invalid for blocks {blocks:?}",
                    (i, j)
                )));
            }
        }
        Ok(ComponentDescriptor {
            n,
            params,
            blocks,
            diagonal_pair,
        })
    }

    pub fn blocks(&self) -> &[usize] {
        &self.blocks
    }

    pub fn diagonal_pair(&self) -> Option<(usize, usize)> {
        self.diagonal_pair
    }

    /// The maximal-rank subgroup ∏U(blocks), before any identification.
    pub fn subgroup(&self) -> SubgroupBlocks {
        SubgroupBlocks::in_unitary(self.blocks.clone())
    }

    /// dim U(N) − dim K.
    pub fn dimension(&self) -> usize {
        let k: usize = self.blocks.iter().map(|b| b * b).sum();
        let paired = self.diagonal_pair.map_or(0, |(i, _)| self.blocks[i] * self.blocks[i]);
        self.n * self.n - (k - paired)
    }

    pub fn label(&self) -> String {
        let sizes: Vec<String> = self
            .blocks
            .iter()
            .enumerate()
            .filter_map(|(i, &b)| match self.diagonal_pair {
                Some((_, j)) if i == j => None,
                Some((p, _)) if i == p => Some(format!("ΔU({b})")),
                _ if b > 0 => Some(format!("U({b})")),
                _ => None,
            })
            .collect();
        let k = if sizes.is_empty() {
            "1".to_string()
        } else {
            sizes.join("×")
        };
        format!("U({})/{}", self.n, k)
    }
}

/// Components of the representation space, in increasing parameter order.
pub fn enumerate_components(spec: &LinkSpec) -> Result<Vec<ComponentDescriptor>, RepSpaceError> {
    spec.validate()?;
    let n = spec.n;
    match spec.link {
        LinkKind::Unknot => {
            let a = spec.labels[0];
            Ok(vec![ComponentDescriptor::new(
                n,
                ComponentParams::Unknot,
                vec![a, n - a],
                None,
            )?])
        }
        LinkKind::PositiveHopf => {
            let (a, b) = (spec.labels[0], spec.labels[1]);
            link::hopf_summand_range(n, a, b)
                .map(|k| {
                    let (blocks, _) = link::hopf_summand_data(n, a, b, k);
                    ComponentDescriptor::new(n, ComponentParams::Hopf { k }, blocks, None)
                })
                .collect()
        }
        LinkKind::RightHandedTrefoil => {
            let a = spec.labels[0];
            link::trefoil_summand_range(n, a)
                .map(|l| {
                    let (blocks, _, m) = link::trefoil_summand_data(n, a, l);
                    let pair = (m > 0).then_some((1, 2));
                    ComponentDescriptor::new(n, ComponentParams::Trefoil { l }, blocks, pair)
                })
                .collect()
        }
    }
}

/// Expected number of components, from the parameter ranges alone.
pub fn component_count(spec: &LinkSpec) -> usize {
    let n = spec.n;
    match spec.link {
        LinkKind::Unknot => 1,
        LinkKind::PositiveHopf => {
            let (a, b) = (spec.labels[0], spec.labels[1]);
            a.min(b) + 1 - (a + b).saturating_sub(n)
        }
        LinkKind::RightHandedTrefoil => {
            let a = spec.labels[0];
            a + 1 - (2 * a).saturating_sub(n)
        }
    }
}

/// Integral cohomology in a single grading.
pub type GradedGroup = BTreeMap<i64, AbelianGroup>;

/// Cohomology of a component. Without a diagonal pair this is the free flag
/// ring; with one it is the Tor computation described in the module docs.
pub fn component_cohomology(c: &ComponentDescriptor) -> Result<GradedGroup, RepSpaceError> {
    match c.diagonal_pair {
        None => {
            let ring = cached_quotient(&c.subgroup())?;
            Ok((0..=ring.top_degree())
                .filter(|&d| ring.rank(d) > 0)
                .map(|d| (2 * d as i64, AbelianGroup::free(ring.rank(d))))
                .collect())
        }
        Some(_) => Ok(collapse(&diagonal_tor(c)?)),
    }
}

fn collapse(g: &BigradedAbelianGroup) -> GradedGroup {
    g.collapse_total().into_iter().filter(|(_, x)| !x.is_zero()).collect()
}

/// Free ranks of a graded group as a polynomial in the degree.
pub fn poincare_series(g: &GradedGroup) -> LaurentPoly {
    LaurentPoly::from_terms(g.iter().map(|(&d, x)| (d, x.rank as i64)))
}

/// Sum of ranks and the multiset of torsion orders.
pub fn totals(g: &GradedGroup) -> (usize, Vec<u64>) {
    let rank = g.values().map(|x| x.rank).sum();
    let mut torsion: Vec<u64> = g.values().flat_map(|x| x.torsion.iter().copied()).collect();
    torsion.sort_unstable();
    (rank, torsion)
}

/// Blocks of the descriptor with the diagonal pair merged: (l, 2m, rest).
fn merged_blocks(c: &ComponentDescriptor) -> Result<(Vec<usize>, usize, usize), RepSpaceError> {
    let (i, j) = c
        .diagonal_pair
        .ok_or_else(|| RepSpaceError::Range("no diagonal pair".into()))?;
    if j != i + 1 {
        return Err(RepSpaceError::Range("diagonal pair must be adjacent".into()));
    }
    let m = c.blocks[i];
    let mut merged = c.blocks[..i].to_vec();
    merged.push(2 * m);
    merged.extend_from_slice(&c.blocks[j + 1..]);
    Ok((merged, i, m))
}

/// Bigraded Tor for a component with a diagonal pair: h ≤ 0 counts exterior
/// generators, q is twice the polynomial degree. Exact in every q ≤ dim + 2m,
/// which contains every total degree ≤ dim.
pub fn diagonal_tor(c: &ComponentDescriptor) -> Result<BigradedAbelianGroup, RepSpaceError> {
    let (merged, block, m) = merged_blocks(c)?;
    let left = cached_quotient(&SubgroupBlocks::in_unitary(merged))?;
    let top = (c.dimension() + 2 * m) / 2;
    let right_shape = BlockShape::full(vec![m]);
    let right = AmbientRing::new(&right_shape, top);
    let left_shape = left.shape().clone();

    let mut gens = Vec::with_capacity(2 * m);
    for k in 1..=2 * m {
        let ck = left.mult_operator(&SchurElement::elementary(&left_shape, block, k)?)?;
        // e_k of the doubled alphabet y ⊔ y.
        let mut phi = SchurElement::zero(&right_shape);
        for i in k.saturating_sub(m)..=k.min(m) {
            let ei = SchurElement::elementary(&right_shape, 0, i)?;
            let ej = SchurElement::elementary(&right_shape, 0, k - i)?;
            phi = phi.add(&ei.multiply(&ej)?)?;
        }
        let phi = right.mult_operator(&phi)?;
        gens.push(TensorOperator::difference(
            &left_ranks(&left),
            &right,
            &ck,
            &phi,
            k,
            top,
        ));
    }
    let module = TensorModule::new(&left_ranks(&left), &right, top);
    let complex = exterior_complex(&module, &gens, top)?;
    Ok(complex.homology()?)
}

fn left_ranks(ring: &crate::flag_ring::QuotientRing) -> Vec<usize> {
    (0..=ring.top_degree()).map(|d| ring.rank(d)).collect()
}

/// Degreewise layout of L ⊗ R truncated at `top`.
struct TensorModule {
    left: Vec<usize>,
    right: Vec<usize>,
    /// offsets[d][i]: start of L_i ⊗ R_{d−i} inside degree d.
    offsets: Vec<Vec<usize>>,
    ranks: Vec<usize>,
}

impl TensorModule {
    fn new(left: &[usize], right: &AmbientRing, top: usize) -> Self {
        let right: Vec<usize> = (0..=top).map(|d| right.rank(d)).collect();
        let mut offsets = Vec::with_capacity(top + 1);
        let mut ranks = Vec::with_capacity(top + 1);
        for d in 0..=top {
            let mut off = Vec::with_capacity(d + 1);
            let mut at = 0;
            for i in 0..=d {
                off.push(at);
                at += left.get(i).copied().unwrap_or(0) * right[d - i];
            }
            offsets.push(off);
            ranks.push(at);
        }
        TensorModule {
            left: left.to_vec(),
            right,
            offsets,
            ranks,
        }
    }

    fn rank(&self, d: usize) -> usize {
        self.ranks.get(d).copied().unwrap_or(0)
    }

    fn left_rank(&self, i: usize) -> usize {
        self.left.get(i).copied().unwrap_or(0)
    }

    fn index(&self, d: usize, i: usize, x: usize, y: usize) -> usize {
        self.offsets[d][i] + x * self.right[d - i] + y
    }
}

/// A homogeneous operator on the tensor module, as one dense matrix per degree.
struct TensorOperator {
    degree: usize,
    maps: Vec<Vec<Vec<Coeff>>>,
}

impl TensorOperator {
    /// (A ⊗ 1) − (1 ⊗ B) for A on the left factor and B on the right, both of degree k.
    fn difference(
        left: &[usize],
        right: &AmbientRing,
        a: &GradedOperator,
        b: &GradedOperator,
        k: usize,
        top: usize,
    ) -> Self {
        let module = TensorModule::new(left, right, top);
        let mut maps = Vec::with_capacity(top + 1);
        for d in 0..=top {
            let rows = module.rank(d + k);
            let mut m = vec![vec![0 as Coeff; module.rank(d)]; rows];
            if rows > 0 {
                for i in 0..=d {
                    let j = d - i;
                    let (li, rj) = (module.left_rank(i), module.right[j]);
                    if li == 0 || rj == 0 {
                        continue;
                    }
                    for x in 0..li {
                        for y in 0..rj {
                            let col = module.index(d, i, x, y);
                            if i + k < left.len() && module.left_rank(i + k) > 0 {
                                for (x2, row) in a.maps[i].iter().enumerate() {
                                    let v = row[x];
                                    if v != 0 {
                                        m[module.index(d + k, i + k, x2, y)][col] += v;
                                    }
                                }
                            }
                            if j + k <= top {
                                for (y2, row) in b.maps[j].iter().enumerate() {
                                    let v = row[y];
                                    if v != 0 {
                                        m[module.index(d + k, i, x, y2)][col] -= v;
                                    }
                                }
                            }
                        }
                    }
                }
            }
            maps.push(m);
        }
        TensorOperator { degree: k, maps }
    }
}

/// Koszul complex on the given operators: ε_k sits in bidegree (−1, 2·deg g_k),
/// d(ε_J ⊗ x) = Σ_{j∈J} (−1)^{#{i∈J : i<j}} ε_{J∖j} ⊗ g_j x. Only q ≤ 2·top is built.
fn exterior_complex(
    module: &TensorModule,
    gens: &[TensorOperator],
    top: usize,
) -> Result<IntegerChainComplex, RepSpaceError> {
    let r = gens.len();
    let weight = |mask: u32| -> usize { (0..r).filter(|&i| mask & (1 << i) != 0).map(|i| gens[i].degree).sum() };
    // Subsets by size, each list in increasing mask order.
    let mut by_size: Vec<Vec<u32>> = vec![Vec::new(); r + 1];
    for mask in 0..(1u32 << r) {
        by_size[mask.count_ones() as usize].push(mask);
    }
    // Summand offsets of ε_J ⊗ M_e inside the chain group at (−|J|, q).
    let layout = |s: usize, q: usize| -> (BTreeMap<u32, (usize, usize)>, usize) {
        let mut at = 0;
        let mut out = BTreeMap::new();
        for &mask in &by_size[s] {
            let w = weight(mask);
            if q >= w && q - w <= top {
                let rank = module.rank(q - w);
                if rank > 0 {
                    out.insert(mask, (q - w, at));
                    at += rank;
                }
            }
        }
        (out, at)
    };
    let mut ranks = BTreeMap::new();
    let mut diffs = BTreeMap::new();
    for half_q in 0..=top {
        let cells: Vec<_> = (0..=r).map(|s| layout(s, half_q)).collect();
        for (s, (_, total)) in cells.iter().enumerate() {
            ranks.insert((-(s as i64), 2 * half_q as i64), *total);
        }
        for s in 1..=r {
            let (src, cols) = &cells[s];
            let (dst, rows) = &cells[s - 1];
            if *cols == 0 || *rows == 0 {
                continue;
            }
            let mut d = IntMatrix::zeros(*rows, *cols);
            for (&mask, &(e, col0)) in src {
                for j in 0..r {
                    if mask & (1 << j) == 0 {
                        continue;
                    }
                    let sign: Coeff = if (mask & ((1 << j) - 1)).count_ones() % 2 == 0 {
                        1
                    } else {
                        -1
                    };
                    let Some(&(_, row0)) = dst.get(&(mask & !(1 << j))) else {
                        continue;
                    };
                    let g = &gens[j].maps[e];
                    for (i, row) in g.iter().enumerate() {
                        for (k, &v) in row.iter().enumerate() {
                            if v != 0 {
                                d.add_at(row0 + i, col0 + k, &BigInt::from(sign * v));
                            }
                        }
                    }
                }
            }
            diffs.insert((-(s as i64), 2 * half_q as i64), d);
        }
    }
    Ok(IntegerChainComplex::new(ranks, diffs)?)
}

/// The link-side Koszul homology of trefoil summand l, anchored at (0,0) so
/// that it is directly comparable with `diagonal_tor`.
pub fn trefoil_summand_unanchored(n: usize, a: usize, l: usize) -> Result<BigradedAbelianGroup, RepSpaceError> {
    let (blocks, _, m) = link::trefoil_summand_data(n, a, l);
    let ring = cached_quotient(&SubgroupBlocks::in_unitary(blocks))?;
    let shape = ring.shape().clone();
    let gens = (1..=m)
        .map(|i| Ok(SchurElement::elementary(&shape, 1, i)?.sub(&SchurElement::elementary(&shape, 2, i)?)?))
        .collect::<Result<Vec<_>, RepSpaceError>>()?;
    let spec = KoszulSpec::over_ring(ring.as_ref(), &gens, (0, 0))?;
    Ok(build_koszul(&spec)?.homology()?)
}

/// Result of comparing the two routes for one component.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct RouteComparison {
    pub params: ComponentParams,
    pub dimension: usize,
    pub top_degree: Option<i64>,
    pub bigraded_equal: bool,
}

/// Compares a trefoil component's Tor with the link-side summand cell by cell.
pub fn compare_trefoil_routes(n: usize, a: usize, l: usize) -> Result<RouteComparison, RepSpaceError> {
    let spec = LinkSpec::trefoil(n, a)?;
    let c = enumerate_components(&spec)?
        .into_iter()
        .find(|c| c.params == ComponentParams::Trefoil { l })
        .ok_or_else(|| RepSpaceError::Range(format!("l = {l} is not a component for N = {n}, a = {a}")))?;
    let link_side = trefoil_summand_unanchored(n, a, l)?;
    let rep_side = if c.diagonal_pair.is_some() {
        diagonal_tor(&c)?
    } else {
        // No identification: Tor is the flag ring in h = 0.
        let mut g = BigradedAbelianGroup::new();
        for (d, x) in component_cohomology(&c)? {
            g.insert((0, d), x);
        }
        g
    };
    let cells = |g: &BigradedAbelianGroup| -> BTreeMap<Bidegree, AbelianGroup> {
        g.cells()
            .filter(|(_, x)| !x.is_zero())
            .map(|(k, x)| (k, x.clone()))
            .collect()
    };
    let collapsed = collapse(&rep_side);
    Ok(RouteComparison {
        params: c.params,
        dimension: c.dimension(),
        top_degree: collapsed.keys().next_back().copied(),
        bigraded_equal: cells(&link_side) == cells(&rep_side),
    })
}

/// Σ over components of (rank, torsion) against the h-collapsed link homology.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct TotalSpaceCheck {
    pub components: usize,
    pub rep_rank: usize,
    pub rep_torsion: Vec<u64>,
    pub link_rank: usize,
    pub link_torsion: Vec<u64>,
}

impl TotalSpaceCheck {
    pub fn holds(&self) -> bool {
        self.rep_rank == self.link_rank && self.rep_torsion == self.link_torsion
    }
}

pub fn total_space_check(spec: &LinkSpec) -> Result<TotalSpaceCheck, RepSpaceError> {
    let comps = enumerate_components(spec)?;
    let groups = comps
        .par_iter()
        .map(component_cohomology)
        .collect::<Result<Vec<_>, _>>()?;
    let mut rep_rank = 0;
    let mut rep_torsion = Vec::new();
    for g in &groups {
        let (r, t) = totals(g);
        rep_rank += r;
        rep_torsion.extend(t);
    }
    rep_torsion.sort_unstable();
    let h = match spec.link {
        LinkKind::Unknot => link::unknot_homology(spec.n, spec.labels[0])?,
        LinkKind::PositiveHopf => link::hopf_homology(spec.n, spec.labels[0], spec.labels[1])?,
        LinkKind::RightHandedTrefoil => link::trefoil_homology(spec.n, spec.labels[0], Framing::Seifert)?,
    };
    Ok(TotalSpaceCheck {
        components: comps.len(),
        rep_rank,
        rep_torsion,
        link_rank: h.total_rank(),
        link_torsion: h.torsion_multiset(),
    })
}

/// Flag-manifold Poincaré polynomial of a component without a diagonal pair,
/// from the closed product formula.
pub fn flag_poincare(c: &ComponentDescriptor) -> Option<LaurentPoly> {
    if c.diagonal_pair.is_some() {
        return None;
    }
    poincare_flag(&c.blocks, c.n).ok()
}

/// One line of the JSON component listing.
#[derive(Clone, Debug, Serialize)]
pub struct ComponentListing {
    pub params: ComponentParams,
    pub block_sizes: Vec<usize>,
    pub diagonal_pair: Option<(usize, usize)>,
    pub dim: usize,
    pub poincare: String,
    /// Degree and torsion orders, for degrees with torsion.
    pub torsion: Vec<(i64, Vec<u64>)>,
    pub name: String,
}

pub fn describe(c: &ComponentDescriptor) -> Result<ComponentListing, RepSpaceError> {
    let g = component_cohomology(c)?;
    Ok(ComponentListing {
        params: c.params,
        block_sizes: c.blocks.clone(),
        diagonal_pair: c.diagonal_pair,
        dim: c.dimension(),
        poincare: poincare_series(&g).to_string().replace('q', "t"),
        torsion: g
            .iter()
            .filter(|(_, x)| !x.torsion.is_empty())
            .map(|(&d, x)| (d, x.torsion.clone()))
            .collect(),
        name: c.label(),
    })
}

/// Angle classes of a pair of subspaces of dimensions a, b in C^N whose
/// reflections generate a representation of the (2,m) torus link: ascending
/// angle lists of length min(a,b), each angle θ ∈ [0, π/2] with mθ ∈ Zπ, and at
/// least a+b−N zeros forced by dimension.
pub fn torus_link_angle_classes(n: usize, a: usize, b: usize, m: usize) -> Result<Vec<Vec<f64>>, RepSpaceError> {
    if a > n || b > n || m == 0 {
        return Err(RepSpaceError::Range(format!("N = {n}, a = {a}, b = {b}, m = {m}")));
    }
    let len = a.min(b);
    let forced = (a + b).saturating_sub(n);
    let values: Vec<f64> = (0..=m / 2).map(|j| j as f64 * PI / m as f64).collect();
    let mut out = Vec::new();
    // Multiplicity vectors over `values`, first entry at least `forced`.
    fn rec(idx: usize, left: usize, counts: &mut Vec<usize>, values: &[f64], forced: usize, out: &mut Vec<Vec<f64>>) {
        if idx + 1 == values.len() {
            counts.push(left);
            if counts[0] >= forced {
                out.push(
                    counts
                        .iter()
                        .zip(values)
                        .flat_map(|(&c, &v)| std::iter::repeat_n(v, c))
                        .collect(),
                );
            }
            counts.pop();
            return;
        }
        for c in (0..=left).rev() {
            counts.push(c);
            rec(idx + 1, left - c, counts, values, forced, out);
            counts.pop();
        }
    }
    rec(0, len, &mut Vec::new(), &values, forced, &mut out);
    Ok(out)
}

/// Residuals of the explicit trefoil representation for one component.
#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct BraidResidual {
    /// ‖M_A M_B M_A − M_B M_A M_B‖_max
    pub braid: f64,
    /// ‖(e^{−2aπi/N} M_B M_A)³ − Id‖_max
    pub cube: f64,
    pub unitarity: f64,
    /// Frames: orthonormality of both column frames.
    pub orthonormality: f64,
    /// M from the frame against M from the block formula.
    pub frame_match: f64,
    /// Principal angles against l zeros then π/3, over both frame layouts.
    pub angles: f64,
    /// M⁻¹ = e^{−2aπi/N} M.
    pub inverse: f64,
}

impl BraidResidual {
    pub fn max(&self) -> f64 {
        [
            self.braid,
            self.cube,
            self.unitarity,
            self.orthonormality,
            self.frame_match,
            self.angles,
            self.inverse,
        ]
        .into_iter()
        .fold(0.0, f64::max)
    }
}

fn check_trefoil_range(n: usize, a: usize, l: usize) -> Result<(), RepSpaceError> {
    if a > n || l > a || l < (2 * a).saturating_sub(n) {
        return Err(RepSpaceError::Range(format!("N = {n}, a = {a}, l = {l}")));
    }
    Ok(())
}

/// The pair of meridian images for component l, in the interleaved basis where
/// each angle-π/3 pair occupies coordinates (l+2i, l+2i+1).
pub fn trefoil_meridians(n: usize, a: usize, l: usize) -> Result<(ComplexMatrix, ComplexMatrix), RepSpaceError> {
    check_trefoil_range(n, a, l)?;
    let w = meridian_phase(n, a);
    let build = |theta: f64| {
        let (c2, s2) = ((2.0 * theta).cos(), (2.0 * theta).sin());
        let pair = ComplexMatrix::from_real_rows(&[vec![-c2, -s2], vec![-s2, c2]]).expect("square");
        let mut blocks = vec![ComplexMatrix::identity(l).scale(Complex64::new(-1.0, 0.0))];
        blocks.extend(std::iter::repeat_n(pair, a - l));
        blocks.push(ComplexMatrix::identity(n + l - 2 * a));
        ComplexMatrix::block_diagonal(&blocks).scale(w)
    };
    Ok((build(0.0), build(PI / 3.0)))
}

/// Column frames of Λ_A, Λ_B in the interleaved basis.
fn interleaved_frames(n: usize, a: usize, l: usize) -> (ComplexMatrix, ComplexMatrix) {
    let (c, s) = ((PI / 3.0).cos(), (PI / 3.0).sin());
    let frame = |tilted: bool| {
        let mut p = ComplexMatrix::zeros(n, a);
        for i in 0..l {
            p.set(i, i, Complex64::new(1.0, 0.0));
        }
        for i in 0..a - l {
            let row = l + 2 * i;
            if tilted {
                p.set(row, l + i, Complex64::new(c, 0.0));
                p.set(row + 1, l + i, Complex64::new(s, 0.0));
            } else {
                p.set(row, l + i, Complex64::new(1.0, 0.0));
            }
        }
        p
    };
    (frame(false), frame(true))
}

/// Λ_A = [Id_a; 0] and Λ_B spanned by e_1..e_l and (e_{l+i} + √3 e_{a+i})/2.
fn stacked_frames(n: usize, a: usize, l: usize) -> (ComplexMatrix, ComplexMatrix) {
    let pa = ComplexMatrix::from_fn(n, a, |i, j| Complex64::new(if i == j { 1.0 } else { 0.0 }, 0.0));
    let mut pb = ComplexMatrix::zeros(n, a);
    for j in 0..a {
        if j < l {
            pb.set(j, j, Complex64::new(1.0, 0.0));
        } else {
            let i = j - l;
            pb.set(l + i, j, Complex64::new(0.5, 0.0));
            pb.set(a + i, j, Complex64::new(3f64.sqrt() / 2.0, 0.0));
        }
    }
    (pa, pb)
}

fn expected_angles(a: usize, l: usize) -> Vec<f64> {
    (0..a).map(|i| if i < l { 0.0 } else { PI / 3.0 }).collect()
}

fn angle_error(got: &[f64], want: &[f64]) -> f64 {
    if got.len() != want.len() {
        return f64::INFINITY;
    }
    got.iter().zip(want).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

/// Builds the explicit representation for component l and measures every
/// relation it must satisfy.
pub fn verify_braid(n: usize, a: usize, l: usize) -> Result<BraidResidual, RepSpaceError> {
    check_trefoil_range(n, a, l)?;
    let (ma, mb) = trefoil_meridians(n, a, l)?;
    let aba = ma.mul(&mb)?.mul(&ma)?;
    let bab = mb.mul(&ma)?.mul(&mb)?;
    let w2 = meridian_phase(n, a).powi(2);
    let cube = mb.mul(&ma)?.scale(w2.conj()).pow(3)?;

    let (pa, pb) = interleaved_frames(n, a, l);
    let frame_match = subspace_to_matrix(&pa, n, a)?
        .distance(&ma)?
        .max(subspace_to_matrix(&pb, n, a)?.distance(&mb)?);
    let want = expected_angles(a, l);
    let mut angles = angle_error(&principal_angles(&pa, &pb)?, &want);
    let (sa, sb) = stacked_frames(n, a, l);
    angles = angles.max(angle_error(&principal_angles(&sa, &sb)?, &want));
    // The stacked frames give a conjugate representation; check it too.
    let (na, nb) = (subspace_to_matrix(&sa, n, a)?, subspace_to_matrix(&sb, n, a)?);
    let stacked_braid = na.mul(&nb)?.mul(&na)?.distance(&nb.mul(&na)?.mul(&nb)?)?;

    let identity = ComplexMatrix::identity(n);
    let mut inverse: f64 = 0.0;
    let mut unitarity: f64 = 0.0;
    for m in [&ma, &mb, &na, &nb] {
        unitarity = unitarity.max(m.unitarity_residual());
        inverse = inverse.max(m.mul(&m.scale(w2.conj()))?.distance(&identity)?);
    }
    Ok(BraidResidual {
        braid: aba.distance(&bab)?.max(stacked_braid),
        cube: cube.distance(&identity)?,
        unitarity,
        orthonormality: [&pa, &pb, &sa, &sb]
            .into_iter()
            .map(ComplexMatrix::orthonormality_residual)
            .fold(0.0, f64::max),
        frame_match,
        angles,
        inverse,
    })
}

/// verify_braid for every valid (a, l) at this N, in parallel.
pub fn verify_all_braids(n: usize) -> Result<Vec<((usize, usize), BraidResidual)>, RepSpaceError> {
    let params: Vec<(usize, usize)> = (0..=n)
        .flat_map(|a| ((2 * a).saturating_sub(n)..=a).map(move |l| (a, l)))
        .collect();
    params
        .into_par_iter()
        .map(|(a, l)| Ok(((a, l), verify_braid(n, a, l)?)))
        .collect()
}
