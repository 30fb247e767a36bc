//! Colored sl(N) homology of the unknot, the positive Hopf link and the
//! right-handed trefoil, assembled from flag-manifold rings and Koszul complexes.
//!
//! Trefoil, colour a: one summand per l in [max(2a−N,0), a], the Koszul complex
//! K(y₁−z₁,…,y_{a−l}−z_{a−l}) over H*(U(N)/U(l)×U(a−l)×U(a−l)×U(N−2a+l)).
//! Hopf link, colours (a,b): one summand per k with zero differential, the ring
//! H*(U(N)/U(k)×U(a−k)×U(b−k)×U(N−a−b+k)) placed in homological degree 2k.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::complex::{AbelianGroup, Bidegree, BigradedAbelianGroup, ChainMap, ComplexError, IntegerChainComplex};
use crate::flag_ring::{cached_quotient, AmbientRing, FlagRingError, QuotientRing, SubgroupBlocks};
use crate::koszul::{build_koszul, koszul_module_map, KoszulError, KoszulSpec};
use crate::laurent::LaurentPoly;
use crate::matrix::{IntMatrix, PivotStrategy};
use crate::partition::{partitions_of, Partition};
use crate::schur::{elementary_of_blocks, schur_of_blocks, SchurElement};

#[derive(Debug, Error)]
pub enum LinkError {
    #[error("label {label} is outside 0..={n}")]
    LabelOutOfRange { label: usize, n: usize },
    #[error("{link} takes {want} label(s), got {got}")]
    LabelCount { link: LinkKind, want: usize, got: usize },
    #[error("basepoint component {0} does not exist")]
    Basepoint(usize),
    #[error("operator index {i} exceeds the basepoint label {label}")]
    ChernIndex { i: usize, label: usize },
    #[error("truncation degree must be non-negative, got {0}")]
    Truncation(i64),
    #[error("unknown link {0:?}")]
    UnknownLink(String),
    #[error("unknown framing {0:?}")]
    UnknownFraming(String),
    #[error("equivariant check failed: {0}")]
    Resolution(String),
    #[error(transparent)]
    Ring(#[from] FlagRingError),
    #[error(transparent)]
    Koszul(#[from] KoszulError),
    #[error(transparent)]
    Complex(#[from] ComplexError),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LinkKind {
    Unknot,
    PositiveHopf,
    RightHandedTrefoil,
}

impl LinkKind {
    pub fn label_count(self) -> usize {
        match self {
            LinkKind::PositiveHopf => 2,
            _ => 1,
        }
    }
}

impl fmt::Display for LinkKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            LinkKind::Unknot => "unknot",
            LinkKind::PositiveHopf => "positive-hopf",
            LinkKind::RightHandedTrefoil => "right-handed-trefoil",
        })
    }
}

impl FromStr for LinkKind {
    type Err = LinkError;
    fn from_str(s: &str) -> Result<Self, LinkError> {
        match s {
            "unknot" => Ok(LinkKind::Unknot),
            "hopf" | "positive-hopf" => Ok(LinkKind::PositiveHopf),
            "trefoil" | "right-handed-trefoil" => Ok(LinkKind::RightHandedTrefoil),
            other => Err(LinkError::UnknownLink(other.to_string())),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Framing {
    Seifert,
    Blackboard,
}

impl fmt::Display for Framing {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Framing::Seifert => "seifert",
            Framing::Blackboard => "blackboard",
        })
    }
}

impl FromStr for Framing {
    type Err = LinkError;
    fn from_str(s: &str) -> Result<Self, LinkError> {
        match s {
            "seifert" => Ok(Framing::Seifert),
            "blackboard" => Ok(Framing::Blackboard),
            other => Err(LinkError::UnknownFraming(other.to_string())),
        }
    }
}

/// A shift h^{dh} q^{dq}.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct GradingShift {
    pub dh: i64,
    pub dq: i64,
}

impl GradingShift {
    pub fn new(dh: i64, dq: i64) -> Self {
        GradingShift { dh, dq }
    }

    pub fn then(self, other: GradingShift) -> GradingShift {
        GradingShift::new(self.dh + other.dh, self.dq + other.dq)
    }

    fn apply(self, at: Bidegree) -> Bidegree {
        (at.0 + self.dh, at.1 + self.dq)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LinkSpec {
    pub link: LinkKind,
    pub n: usize,
    pub labels: Vec<usize>,
    pub framing: Framing,
    pub reduced: bool,
    /// Component carrying the basepoint (0 or 1 for the Hopf link).
    pub basepoint: usize,
}

impl LinkSpec {
    pub fn new(link: LinkKind, n: usize, labels: Vec<usize>) -> Result<Self, LinkError> {
        let spec = LinkSpec {
            link,
            n,
            labels,
            framing: Framing::Seifert,
            reduced: false,
            basepoint: 0,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn unknot(n: usize, a: usize) -> Result<Self, LinkError> {
        Self::new(LinkKind::Unknot, n, vec![a])
    }

    pub fn hopf(n: usize, a: usize, b: usize) -> Result<Self, LinkError> {
        Self::new(LinkKind::PositiveHopf, n, vec![a, b])
    }

    pub fn trefoil(n: usize, a: usize) -> Result<Self, LinkError> {
        Self::new(LinkKind::RightHandedTrefoil, n, vec![a])
    }

    pub fn with_framing(mut self, framing: Framing) -> Self {
        self.framing = framing;
        self
    }

    pub fn with_reduced(mut self, reduced: bool) -> Self {
        self.reduced = reduced;
        self
    }

    pub fn with_basepoint(mut self, component: usize) -> Result<Self, LinkError> {
        self.basepoint = component;
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<(), LinkError> {
        let want = self.link.label_count();
        if self.labels.len() != want {
            return Err(LinkError::LabelCount {
                link: self.link,
                want,
                got: self.labels.len(),
            });
        }
        if let Some(&label) = self.labels.iter().find(|&&a| a > self.n) {
            return Err(LinkError::LabelOutOfRange { label, n: self.n });
        }
        if self.basepoint >= want {
            return Err(LinkError::Basepoint(self.basepoint));
        }
        Ok(())
    }

    /// Label of the component carrying the basepoint.
    pub fn basepoint_label(&self) -> usize {
        self.labels[self.basepoint]
    }
}

/// One direct summand of the chain-level model.
#[derive(Clone, Debug)]
pub struct Summand {
    /// "l=…" for the trefoil, "k=…" for the Hopf link.
    pub name: String,
    pub ring: Arc<QuotientRing>,
    pub koszul: KoszulSpec,
    pub complex: IntegerChainComplex,
    /// Ring blocks whose union is the alphabet of the basepoint component.
    pub basepoint_blocks: Vec<usize>,
}

/// Real dimension of U(N)/∏U(blocks).
fn flag_dim(blocks: &[usize]) -> i64 {
    let n: usize = blocks.iter().sum();
    (n * n - blocks.iter().map(|b| b * b).sum::<usize>()) as i64
}

/// Trefoil summand l: blocks, Λ⁰ anchor (unframed) and Koszul length.
pub fn trefoil_summand_data(n: usize, a: usize, l: usize) -> (Vec<usize>, Bidegree, usize) {
    let m = a - l;
    let rest = n + l - 2 * a;
    let blocks = vec![l, m, m, rest];
    let (n_, a_, l_) = (n as i64, a as i64, l as i64);
    let h0 = a_ + 2 * l_;
    let q0 = -a_ - 2 * l_ + a_ * a_ - l_ * n_ - flag_dim(&blocks) / 2;
    (blocks, (h0, q0), m)
}

/// Values of l contributing to the trefoil of colour a.
pub fn trefoil_summand_range(n: usize, a: usize) -> std::ops::RangeInclusive<usize> {
    (2 * a).saturating_sub(n)..=a
}

/// Framing correction taking the blackboard framing of the standard diagram to
/// the Seifert framing.
pub fn trefoil_framing_shift(n: usize, a: usize, framing: Framing) -> GradingShift {
    match framing {
        Framing::Blackboard => GradingShift::default(),
        Framing::Seifert => {
            let (n, a) = (n as i64, a as i64);
            GradingShift::new(-3 * a, 3 * a * (n - a + 1))
        }
    }
}

/// Hopf summand k: blocks and the q-shift of internal degree 0, in h-degree 2k.
pub fn hopf_summand_data(n: usize, a: usize, b: usize, k: usize) -> (Vec<usize>, Bidegree) {
    let blocks = vec![k, a - k, b - k, n + k - a - b];
    let (n, a, b, k) = (n as i64, a as i64, b as i64, k as i64);
    (blocks, (2 * k, (a + b) * (a + b - n - 2 * k) + 2 * k * k))
}

pub fn hopf_summand_range(n: usize, a: usize, b: usize) -> std::ops::RangeInclusive<usize> {
    (a + b).saturating_sub(n)..=a.min(b)
}

fn ring_for(blocks: Vec<usize>) -> Result<Arc<QuotientRing>, LinkError> {
    Ok(cached_quotient(&SubgroupBlocks::in_unitary(blocks))?)
}

fn summand(
    name: String,
    ring: Arc<QuotientRing>,
    generators: &[SchurElement],
    anchor: Bidegree,
    basepoint_blocks: Vec<usize>,
) -> Result<Summand, LinkError> {
    let koszul = KoszulSpec::over_ring(ring.as_ref(), generators, anchor)?;
    let complex = build_koszul(&koszul)?;
    Ok(Summand {
        name,
        ring,
        koszul,
        complex,
        basepoint_blocks,
    })
}

/// The chain-level model of a labelled link as a list of direct summands, with
/// all grading shifts (including framing) already applied.
pub fn summands(spec: &LinkSpec) -> Result<Vec<Summand>, LinkError> {
    spec.validate()?;
    let n = spec.n;
    match spec.link {
        LinkKind::Unknot => {
            let a = spec.labels[0];
            let ring = ring_for(vec![a, n - a])?;
            let anchor = (0, -((a * (n - a)) as i64));
            Ok(vec![summand("unknot".into(), ring, &[], anchor, vec![0])?])
        }
        LinkKind::PositiveHopf => {
            let (a, b) = (spec.labels[0], spec.labels[1]);
            let bp = if spec.basepoint == 0 { vec![0, 1] } else { vec![0, 2] };
            hopf_summand_range(n, a, b)
                .into_par_iter()
                .map(|k| {
                    let (blocks, anchor) = hopf_summand_data(n, a, b, k);
                    summand(format!("k={k}"), ring_for(blocks)?, &[], anchor, bp.clone())
                })
                .collect()
        }
        LinkKind::RightHandedTrefoil => {
            let a = spec.labels[0];
            let frame = trefoil_framing_shift(n, a, spec.framing);
            trefoil_summand_range(n, a)
                .into_par_iter()
                .map(|l| {
                    let (blocks, anchor, m) = trefoil_summand_data(n, a, l);
                    let ring = ring_for(blocks)?;
                    let shape = ring.shape().clone();
                    let generators = (1..=m)
                        .map(|i| {
                            let y = SchurElement::elementary(&shape, 1, i)?;
                            let z = SchurElement::elementary(&shape, 2, i)?;
                            y.sub(&z)
                        })
                        .collect::<Result<Vec<_>, _>>()
                        .map_err(FlagRingError::from)?;
                    summand(format!("l={l}"), ring, &generators, frame.apply(anchor), vec![0, 1])
                })
                .collect()
        }
    }
}

fn direct_sum_all(parts: Vec<BigradedAbelianGroup>) -> BigradedAbelianGroup {
    parts
        .into_iter()
        .fold(BigradedAbelianGroup::new(), |acc, g| acc.direct_sum(&g))
}

/// Homology of the labelled link, reduced or not.
pub fn homology(spec: &LinkSpec) -> Result<BigradedAbelianGroup, LinkError> {
    if spec.reduced {
        return reduced_homology(spec);
    }
    let parts = summands(spec)?
        .par_iter()
        .map(|s| s.complex.homology())
        .collect::<Result<Vec<_>, _>>()?;
    Ok(direct_sum_all(parts))
}

pub fn unknot_homology(n: usize, a: usize) -> Result<BigradedAbelianGroup, LinkError> {
    homology(&LinkSpec::unknot(n, a)?)
}

pub fn hopf_homology(n: usize, a: usize, b: usize) -> Result<BigradedAbelianGroup, LinkError> {
    homology(&LinkSpec::hopf(n, a, b)?)
}

pub fn trefoil_homology(n: usize, a: usize, framing: Framing) -> Result<BigradedAbelianGroup, LinkError> {
    homology(&LinkSpec::trefoil(n, a)?.with_framing(framing))
}

/// Reduced homology: the image of multiplication by the fundamental class
/// s_{box(a, N−a)} of the basepoint alphabet, shifted by q^{−a(N−a)}.
pub fn reduced_homology(spec: &LinkSpec) -> Result<BigradedAbelianGroup, LinkError> {
    let n = spec.n;
    let a = spec.basepoint_label();
    let fundamental = Partition::box_shape(a, n - a);
    let dq = -((a * (n - a)) as i64);
    let parts = summands(spec)?
        .par_iter()
        .map(|s| -> Result<BigradedAbelianGroup, LinkError> {
            let class = schur_of_blocks(&fundamental, s.ring.shape(), &s.basepoint_blocks);
            let op = s.ring.mult_operator(&class)?;
            let f = koszul_module_map(&s.koszul, &op)?;
            let image = s.complex.image_subcomplex(&f, PivotStrategy::MinAbs, true)?;
            Ok(image.homology()?.shift(0, dq))
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(direct_sum_all(parts))
}

/// Chain-level action of the i-th Chern class of the basepoint component on one
/// summand, with the induced maps on free parts of homology.
#[derive(Clone, Debug)]
pub struct SummandAction {
    pub name: String,
    pub chain_map: ChainMap,
    pub on_homology: BTreeMap<Bidegree, IntMatrix>,
}

pub fn basepoint_action(spec: &LinkSpec, i: usize) -> Result<Vec<SummandAction>, LinkError> {
    let label = spec.basepoint_label();
    if i > label {
        return Err(LinkError::ChernIndex { i, label });
    }
    summands(spec)?
        .par_iter()
        .map(|s| {
            let class = elementary_of_blocks(i, s.ring.shape(), &s.basepoint_blocks);
            let op = s.ring.mult_operator(&class)?;
            let chain_map = koszul_module_map(&s.koszul, &op)?;
            let on_homology = s.complex.induced_on_free_homology(&chain_map, &s.complex)?;
            Ok(SummandAction {
                name: s.name.clone(),
                chain_map,
                on_homology,
            })
        })
        .collect()
}

/// Equivariant Hilbert series of one trefoil summand: H*(BU(l)×BU(a−l)×BU(N−2a+l))
/// truncated at internal q-degree `truncation`, placed at the summand's anchor.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct EquivariantSeries {
    pub l: usize,
    pub h: i64,
    pub series: LaurentPoly,
}

/// Number of partitions of d with at most k parts, for d ≤ max: the Hilbert
/// function of Sym(k) in q-degree 2d.
fn sym_ranks(k: usize, max: usize) -> Vec<i64> {
    (0..=max).map(|d| partitions_of(d, k, d).len() as i64).collect()
}

fn convolve(x: &[i64], y: &[i64]) -> Vec<i64> {
    let mut out = vec![0; x.len()];
    for (i, a) in x.iter().enumerate() {
        for (j, b) in y.iter().enumerate().take(x.len() - i) {
            out[i + j] += a * b;
        }
    }
    out
}

pub fn equivariant_hilbert(
    n: usize,
    a: usize,
    framing: Framing,
    truncation: i64,
) -> Result<Vec<EquivariantSeries>, LinkError> {
    if truncation < 0 {
        return Err(LinkError::Truncation(truncation));
    }
    LinkSpec::trefoil(n, a)?;
    let max = (truncation / 2) as usize;
    let frame = trefoil_framing_shift(n, a, framing);
    Ok(trefoil_summand_range(n, a)
        .map(|l| {
            let (blocks, anchor, _) = trefoil_summand_data(n, a, l);
            let ranks = convolve(
                &convolve(&sym_ranks(blocks[0], max), &sym_ranks(blocks[1], max)),
                &sym_ranks(blocks[3], max),
            );
            let (h, q) = frame.apply(anchor);
            let series = LaurentPoly::from_terms(ranks.iter().enumerate().map(|(d, &r)| (q + 2 * d as i64, r)));
            EquivariantSeries { l, h, series }
        })
        .collect())
}

/// Runs the Koszul complex of y_i − z_i over the un-quotiented polynomial ring
/// truncated at `max_boxes`, and checks it resolves H*(BK_l): homology sits in
/// Λ⁰ only and matches the Hilbert series, in every degree unaffected by the
/// truncation.
pub fn equivariant_resolution_check(n: usize, a: usize, l: usize, max_boxes: usize) -> Result<(), LinkError> {
    let (blocks, _, m) = trefoil_summand_data(n, a, l);
    let ambient = AmbientRing::new(&crate::schur::BlockShape::full(blocks.clone()), max_boxes);
    let shape = ambient.shape().clone();
    let generators = (1..=m)
        .map(|i| SchurElement::elementary(&shape, 1, i)?.sub(&SchurElement::elementary(&shape, 2, i)?))
        .collect::<Result<Vec<_>, _>>()
        .map_err(FlagRingError::from)?;
    ambient.regularity_check(&generators)?;
    let spec = KoszulSpec::over_ring(&ambient, &generators, (0, 0))?;
    let h = build_koszul(&spec)?.homology()?;
    let expected = convolve(
        &convolve(&sym_ranks(blocks[0], max_boxes), &sym_ranks(blocks[1], max_boxes)),
        &sym_ranks(blocks[3], max_boxes),
    );
    for ((hd, q), g) in h.cells() {
        if q > 2 * max_boxes as i64 {
            continue;
        }
        if hd != 0 && !g.is_zero() {
            return Err(LinkError::Resolution(format!("homology at ({hd},{q}) outside Λ⁰")));
        }
    }
    for (d, &want) in expected.iter().enumerate() {
        let got = h.get((0, 2 * d as i64));
        if got != AbelianGroup::free(want as usize) {
            return Err(LinkError::Resolution(format!(
                "degree {d}: got {got}, expected Z^{want}"
            )));
        }
    }
    Ok(())
}

/// One cell of the JSON report.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GroupCell {
    pub h: i64,
    pub q: i64,
    pub rank: usize,
    pub torsion: Vec<u64>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct HomologyReport {
    pub link: String,
    #[serde(rename = "N")]
    pub n: usize,
    pub labels: Vec<usize>,
    pub framing: String,
    pub reduced: bool,
    pub groups: Vec<GroupCell>,
    pub euler: String,
}

impl HomologyReport {
    pub fn new(spec: &LinkSpec, groups: &BigradedAbelianGroup) -> Self {
        HomologyReport {
            link: spec.link.to_string(),
            n: spec.n,
            labels: spec.labels.clone(),
            framing: spec.framing.to_string(),
            reduced: spec.reduced,
            groups: groups
                .cells()
                .filter(|(_, g)| !g.is_zero())
                .map(|((h, q), g)| GroupCell {
                    h,
                    q,
                    rank: g.rank,
                    torsion: g.torsion.clone(),
                })
                .collect(),
            euler: groups.euler_characteristic().to_string(),
        }
    }

    /// Rebuilds the bigraded group; torsion orders are renormalized to invariant factors.
    pub fn groups(&self) -> BigradedAbelianGroup {
        let mut out = BigradedAbelianGroup::new();
        for c in &self.groups {
            out.insert((c.h, c.q), AbelianGroup::new(c.rank, &c.torsion));
        }
        out
    }
}

/// Parses a table with lines "h q rank torsion-orders…"; '#' starts a comment.
pub fn parse_table(text: &str) -> Result<BigradedAbelianGroup, String> {
    let mut out = BigradedAbelianGroup::new();
    for (no, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let fields: Vec<i64> = line
            .split_whitespace()
            .map(|f| f.parse::<i64>().map_err(|e| format!("line {}: {e}", no + 1)))
            .collect::<Result<_, _>>()?;
        if fields.len() < 3 || fields[2] < 0 || fields[3..].iter().any(|&t| t < 2) {
            return Err(format!("line {}: expected h q rank torsion…", no + 1));
        }
        let torsion: Vec<u64> = fields[3..].iter().map(|&t| t as u64).collect();
        out.insert((fields[0], fields[1]), AbelianGroup::new(fields[2] as usize, &torsion));
    }
    Ok(out)
}

/// Reference tables for the Seifert-framed trefoil, keyed by (N, a).
pub const GOLDEN_TREFOIL: [((usize, usize), &str); 4] = [
    ((4, 2), include_str!("../data/trefoil_n4_a2.txt")),
    ((5, 2), include_str!("../data/trefoil_n5_a2.txt")),
    ((6, 2), include_str!("../data/trefoil_n6_a2.txt")),
    ((6, 3), include_str!("../data/trefoil_n6_a3.txt")),
];

pub fn golden_trefoil(n: usize, a: usize) -> Option<BigradedAbelianGroup> {
    GOLDEN_TREFOIL
        .iter()
        .find(|(key, _)| *key == (n, a))
        .map(|(_, text)| parse_table(text).expect("bundled tables parse"))
}

/// Cells where two bigraded groups differ, as (bidegree, left, right).
pub fn table_differences(
    left: &BigradedAbelianGroup,
    right: &BigradedAbelianGroup,
) -> Vec<(Bidegree, AbelianGroup, AbelianGroup)> {
    let keys: std::collections::BTreeSet<Bidegree> = left.cells().chain(right.cells()).map(|(k, _)| k).collect();
    keys.into_iter()
        .filter_map(|k| {
            let (x, y) = (left.get(k), right.get(k));
            (x != y).then_some((k, x, y))
        })
        .collect()
}
