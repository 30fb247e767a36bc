//! Homological perturbation over a finite poset, for complexes of free abelian
//! groups graded by (h, q).
//!
//! Conventions: differentials raise h by one; a strong deformation retract
//! (π, ι, h) of A onto B satisfies πι = Id and ιπ − Id = dh + hd, and the side
//! conditions hι = 0, πh = 0, h² = 0.

use std::collections::{BTreeMap, HashMap};

use num_bigint::BigInt;
use thiserror::Error;

use crate::complex::{Bidegree, BigradedAbelianGroup, ComplexError, IntegerChainComplex};
use crate::matrix::IntMatrix;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum PerturbationError {
    #[error("shape mismatch at {at:?}: {what}")]
    Shape { at: Bidegree, what: String },
    #[error("maps do not compose: {0}")]
    Compose(String),
    #[error("not a complex: d² ≠ 0")]
    NotAComplex,
    #[error("identity fails: {0}")]
    Identity(&'static str),
    #[error("side condition fails: {0}")]
    SideCondition(&'static str),
    #[error("not a strict partial order: {0}")]
    Order(String),
    #[error("component between incomparable or reversed nodes {0} -> {1}")]
    Incomparable(usize, usize),
    #[error("expected {want} retracts, got {got}")]
    RetractCount { want: usize, got: usize },
    #[error("retract {0} does not start at its node complex")]
    RetractSource(usize),
    #[error(transparent)]
    Complex(#[from] ComplexError),
}

/// Ranks of a graded free abelian group; zero ranks are not stored.
pub type Ranks = BTreeMap<Bidegree, usize>;

fn rank_at(r: &Ranks, at: Bidegree) -> usize {
    r.get(&at).copied().unwrap_or(0)
}

fn normalize(r: Ranks) -> Ranks {
    r.into_iter().filter(|(_, n)| *n > 0).collect()
}

/// A homogeneous map raising h by `shift` (q is preserved).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GradedMap {
    source: Ranks,
    target: Ranks,
    shift: i64,
    /// Keyed by source bidegree; absent means zero.
    blocks: BTreeMap<Bidegree, IntMatrix>,
}

impl GradedMap {
    pub fn zero(source: &Ranks, target: &Ranks, shift: i64) -> Self {
        GradedMap {
            source: normalize(source.clone()),
            target: normalize(target.clone()),
            shift,
            blocks: BTreeMap::new(),
        }
    }

    pub fn identity(ranks: &Ranks) -> Self {
        let ranks = normalize(ranks.clone());
        let blocks = ranks.iter().map(|(&at, &n)| (at, IntMatrix::identity(n))).collect();
        GradedMap {
            source: ranks.clone(),
            target: ranks,
            shift: 0,
            blocks,
        }
    }

    pub fn new(
        source: &Ranks,
        target: &Ranks,
        shift: i64,
        blocks: BTreeMap<Bidegree, IntMatrix>,
    ) -> Result<Self, PerturbationError> {
        let mut out = Self::zero(source, target, shift);
        for (at, m) in blocks {
            out.set_block(at, m)?;
        }
        Ok(out)
    }

    pub fn source(&self) -> &Ranks {
        &self.source
    }

    pub fn target(&self) -> &Ranks {
        &self.target
    }

    pub fn shift(&self) -> i64 {
        self.shift
    }

    fn target_of(&self, (h, q): Bidegree) -> Bidegree {
        (h + self.shift, q)
    }

    pub fn set_block(&mut self, at: Bidegree, m: IntMatrix) -> Result<(), PerturbationError> {
        let want = (rank_at(&self.target, self.target_of(at)), rank_at(&self.source, at));
        if (m.rows(), m.cols()) != want {
            return Err(PerturbationError::Shape {
                at,
                what: format!("block is {}x{}, expected {}x{}", m.rows(), m.cols(), want.0, want.1),
            });
        }
        if want.0 == 0 || want.1 == 0 || m.is_zero() {
            self.blocks.remove(&at);
        } else {
            self.blocks.insert(at, m);
        }
        Ok(())
    }

    /// The block at a source bidegree, zero-filled.
    pub fn block(&self, at: Bidegree) -> IntMatrix {
        self.blocks
            .get(&at)
            .cloned()
            .unwrap_or_else(|| IntMatrix::zeros(rank_at(&self.target, self.target_of(at)), rank_at(&self.source, at)))
    }

    pub fn is_zero(&self) -> bool {
        self.blocks.is_empty()
    }

    /// self ∘ first.
    pub fn compose(&self, first: &GradedMap) -> Result<GradedMap, PerturbationError> {
        if first.target != self.source {
            return Err(PerturbationError::Compose("middle ranks differ".into()));
        }
        let mut out = Self::zero(&first.source, &self.target, first.shift + self.shift);
        for (&at, a) in &first.blocks {
            if let Some(b) = self.blocks.get(&first.target_of(at)) {
                let m = b.mul(a).map_err(|e| PerturbationError::Compose(e.to_string()))?;
                out.set_block(at, m)?;
            }
        }
        Ok(out)
    }

    fn combine(&self, other: &GradedMap, sign: i64) -> Result<GradedMap, PerturbationError> {
        if (&self.source, &self.target, self.shift) != (&other.source, &other.target, other.shift) {
            return Err(PerturbationError::Compose("summands have different types".into()));
        }
        let mut out = self.clone();
        for (&at, m) in &other.blocks {
            let m = if sign < 0 { m.neg() } else { m.clone() };
            let sum = out
                .block(at)
                .add(&m)
                .map_err(|e| PerturbationError::Compose(e.to_string()))?;
            out.set_block(at, sum)?;
        }
        Ok(out)
    }

    pub fn add(&self, other: &GradedMap) -> Result<GradedMap, PerturbationError> {
        self.combine(other, 1)
    }

    pub fn sub(&self, other: &GradedMap) -> Result<GradedMap, PerturbationError> {
        self.combine(other, -1)
    }

    pub fn neg(&self) -> GradedMap {
        let mut out = self.clone();
        for m in out.blocks.values_mut() {
            *m = m.neg();
        }
        out
    }
}

/// A bounded complex of free abelian groups with differential of h-shift +1.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FreeComplex {
    d: GradedMap,
}

impl FreeComplex {
    pub fn new(d: GradedMap) -> Result<Self, PerturbationError> {
        if d.shift != 1 || d.source != d.target {
            return Err(PerturbationError::Compose(
                "a differential is an endomorphism of h-shift 1".into(),
            ));
        }
        if !d.compose(&d)?.is_zero() {
            return Err(PerturbationError::NotAComplex);
        }
        Ok(FreeComplex { d })
    }

    /// Zero differential.
    pub fn trivial(ranks: &Ranks) -> Self {
        FreeComplex {
            d: GradedMap::zero(ranks, ranks, 1),
        }
    }

    pub fn ranks(&self) -> &Ranks {
        &self.d.source
    }

    pub fn differential(&self) -> &GradedMap {
        &self.d
    }

    pub fn to_chain_complex(&self) -> Result<IntegerChainComplex, PerturbationError> {
        Ok(IntegerChainComplex::new(self.ranks().clone(), self.d.blocks.clone())?)
    }

    pub fn homology(&self) -> Result<BigradedAbelianGroup, PerturbationError> {
        Ok(self.to_chain_complex()?.homology()?)
    }
}

/// Strong deformation retract of `source` onto `target`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Sdr {
    pub source: FreeComplex,
    pub target: FreeComplex,
    pub pi: GradedMap,
    pub iota: GradedMap,
    pub h: GradedMap,
}

impl Sdr {
    /// π = ι = Id, h = 0.
    pub fn identity(c: &FreeComplex) -> Self {
        Sdr {
            source: c.clone(),
            target: c.clone(),
            pi: GradedMap::identity(c.ranks()),
            iota: GradedMap::identity(c.ranks()),
            h: GradedMap::zero(c.ranks(), c.ranks(), -1),
        }
    }

    fn check_types(&self) -> Result<(), PerturbationError> {
        let (a, b) = (self.source.ranks(), self.target.ranks());
        let ok = self.pi.source() == a
            && self.pi.target() == b
            && self.pi.shift() == 0
            && self.iota.source() == b
            && self.iota.target() == a
            && self.iota.shift() == 0
            && self.h.source() == a
            && self.h.target() == a
            && self.h.shift() == -1;
        if ok {
            Ok(())
        } else {
            Err(PerturbationError::Compose("retract maps have the wrong types".into()))
        }
    }

    /// Chain-map property of π and ι, πι = Id and ιπ − Id = dh + hd.
    pub fn check_retract(&self) -> Result<(), PerturbationError> {
        self.check_types()?;
        let (da, db) = (&self.source.d, &self.target.d);
        if db.compose(&self.pi)? != self.pi.compose(da)? {
            return Err(PerturbationError::Identity("π is not a chain map"));
        }
        if da.compose(&self.iota)? != self.iota.compose(db)? {
            return Err(PerturbationError::Identity("ι is not a chain map"));
        }
        if self.pi.compose(&self.iota)? != GradedMap::identity(self.target.ranks()) {
            return Err(PerturbationError::Identity("πι ≠ Id"));
        }
        let lhs = self
            .iota
            .compose(&self.pi)?
            .sub(&GradedMap::identity(self.source.ranks()))?;
        let rhs = da.compose(&self.h)?.add(&self.h.compose(da)?)?;
        if lhs != rhs {
            return Err(PerturbationError::Identity("ιπ − Id ≠ dh + hd"));
        }
        Ok(())
    }

    pub fn check_side_conditions(&self) -> Result<(), PerturbationError> {
        self.check_types()?;
        if !self.h.compose(&self.iota)?.is_zero() {
            return Err(PerturbationError::SideCondition("hι ≠ 0"));
        }
        if !self.pi.compose(&self.h)?.is_zero() {
            return Err(PerturbationError::SideCondition("πh ≠ 0"));
        }
        if !self.h.compose(&self.h)?.is_zero() {
            return Err(PerturbationError::SideCondition("h² ≠ 0"));
        }
        Ok(())
    }

    /// All five identities plus the chain-map checks.
    pub fn verify(&self) -> Result<(), PerturbationError> {
        self.check_retract()?;
        self.check_side_conditions()
    }
}

/// Replaces h by h'' = −h'dh' with h' = (Id − ιπ)h(Id − ιπ).
///
/// Under ιπ − Id = dh + hd the unsigned h'dh' is a homotopy for Id − ιπ
/// instead; the sign restores the convention.
pub fn fix_side_conditions(s: &Sdr) -> Result<Sdr, PerturbationError> {
    s.check_retract()?;
    let id = GradedMap::identity(s.source.ranks());
    let q = id.sub(&s.iota.compose(&s.pi)?)?;
    let h1 = q.compose(&s.h)?.compose(&q)?;
    let h2 = h1.compose(&s.source.d)?.compose(&h1)?.neg();
    let out = Sdr { h: h2, ..s.clone() };
    out.verify()?;
    Ok(out)
}

/// A complex split over a finite poset: node complexes A_p and components
/// d_{q,p} : A_p → A_q for p < q.
#[derive(Clone, Debug)]
pub struct PosetSplitComplex {
    /// less[p][q] iff p < q.
    less: Vec<Vec<bool>>,
    nodes: Vec<FreeComplex>,
    arrows: BTreeMap<(usize, usize), GradedMap>,
}

impl PosetSplitComplex {
    /// `arrows` is keyed by (q, p) for the component A_p → A_q.
    pub fn new(
        less: Vec<Vec<bool>>,
        nodes: Vec<FreeComplex>,
        arrows: BTreeMap<(usize, usize), GradedMap>,
    ) -> Result<Self, PerturbationError> {
        let n = nodes.len();
        if less.len() != n || less.iter().any(|r| r.len() != n) {
            return Err(PerturbationError::Order("relation matrix has the wrong size".into()));
        }
        for p in 0..n {
            if less[p][p] {
                return Err(PerturbationError::Order(format!("{p} < {p}")));
            }
            for q in 0..n {
                for r in 0..n {
                    if less[p][q] && less[q][r] && !less[p][r] {
                        return Err(PerturbationError::Order(format!("{p} < {q} < {r} but not {p} < {r}")));
                    }
                }
            }
        }
        for (&(q, p), f) in &arrows {
            if p >= n || q >= n || !less[p][q] {
                return Err(PerturbationError::Incomparable(p, q));
            }
            if f.source() != nodes[p].ranks() || f.target() != nodes[q].ranks() || f.shift() != 1 {
                return Err(PerturbationError::Compose(format!(
                    "component {p} -> {q} has the wrong type"
                )));
            }
        }
        let c = PosetSplitComplex { less, nodes, arrows };
        c.total()?;
        Ok(c)
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn node(&self, p: usize) -> &FreeComplex {
        &self.nodes[p]
    }

    pub fn less(&self, p: usize, q: usize) -> bool {
        self.less[p][q]
    }

    /// d_{q,p}, including the node differential when p = q.
    pub fn component(&self, q: usize, p: usize) -> GradedMap {
        if p == q {
            return self.nodes[p].d.clone();
        }
        self.arrows
            .get(&(q, p))
            .cloned()
            .unwrap_or_else(|| GradedMap::zero(self.nodes[p].ranks(), self.nodes[q].ranks(), 1))
    }

    /// The total complex ⊕ A_p.
    pub fn total(&self) -> Result<FreeComplex, PerturbationError> {
        let ranks: Vec<&Ranks> = self.nodes.iter().map(FreeComplex::ranks).collect();
        let d = assemble(&ranks, &ranks, 1, |q, p| {
            (p == q || self.arrows.contains_key(&(q, p))).then(|| self.component(q, p))
        })?;
        FreeComplex::new(d)
    }
}

/// Direct-sum layout of a list of graded modules.
fn layout(parts: &[&Ranks]) -> (Ranks, Vec<BTreeMap<Bidegree, usize>>) {
    let mut total = Ranks::new();
    let mut offsets = Vec::with_capacity(parts.len());
    for r in parts {
        let mut off = BTreeMap::new();
        for (&at, &n) in r.iter() {
            let e = total.entry(at).or_insert(0);
            off.insert(at, *e);
            *e += n;
        }
        offsets.push(off);
    }
    (total, offsets)
}

/// Block map between direct sums from its components `f(q, p)` : part p → part q.
fn assemble(
    sources: &[&Ranks],
    targets: &[&Ranks],
    shift: i64,
    f: impl Fn(usize, usize) -> Option<GradedMap>,
) -> Result<GradedMap, PerturbationError> {
    let (src, src_off) = layout(sources);
    let (tgt, tgt_off) = layout(targets);
    let mut blocks: BTreeMap<Bidegree, IntMatrix> = BTreeMap::new();
    for (&(h, qd), &cols) in &src {
        let rows = rank_at(&tgt, (h + shift, qd));
        if rows > 0 {
            blocks.insert((h, qd), IntMatrix::zeros(rows, cols));
        }
    }
    for q in 0..targets.len() {
        for p in 0..sources.len() {
            let Some(g) = f(q, p) else { continue };
            for (&at, m) in &g.blocks {
                let r0 = tgt_off[q][&(at.0 + shift, at.1)];
                let c0 = src_off[p][&at];
                blocks
                    .get_mut(&at)
                    .expect("nonzero block implies nonzero ranks")
                    .set_block(r0, c0, m);
            }
        }
    }
    GradedMap::new(&src, &tgt, shift, blocks)
}

/// The perturbed retract of the total complex onto ⊕ B_p, with all identities
/// verified. Chains p = p₁ < … < p_k = q are summed through the memoized
/// recursion X_{q,p} = d_{q,p} + Σ_{p<r<q} d_{q,r} h_r X_{r,p}.
pub fn perturb(c: &PosetSplitComplex, retracts: &[Sdr]) -> Result<(FreeComplex, Sdr), PerturbationError> {
    let n = c.len();
    if retracts.len() != n {
        return Err(PerturbationError::RetractCount {
            want: n,
            got: retracts.len(),
        });
    }
    for (p, s) in retracts.iter().enumerate() {
        if s.source != c.nodes[p] {
            return Err(PerturbationError::RetractSource(p));
        }
        s.verify()?;
    }
    let mut memo: HashMap<(usize, usize), GradedMap> = HashMap::new();
    for p in 0..n {
        for q in 0..n {
            if c.less[p][q] {
                chain_sum(c, retracts, q, p, &mut memo)?;
            }
        }
    }
    let x = |q: usize, p: usize| memo.get(&(q, p));
    let a_ranks: Vec<&Ranks> = c.nodes.iter().map(FreeComplex::ranks).collect();
    let b_ranks: Vec<&Ranks> = retracts.iter().map(|s| s.target.ranks()).collect();

    // Each closure returns the (q, p) component, diagonal from the node retract.
    let bar_d = assemble(&b_ranks, &b_ranks, 1, |q, p| {
        if p == q {
            return Some(retracts[p].target.d.clone());
        }
        let x = x(q, p)?;
        Some(
            retracts[q]
                .pi
                .compose(x)
                .and_then(|m| m.compose(&retracts[p].iota))
                .expect("types checked"),
        )
    })?;
    let pi = assemble(&a_ranks, &b_ranks, 0, |q, p| {
        if p == q {
            return Some(retracts[p].pi.clone());
        }
        let x = x(q, p)?;
        Some(
            retracts[q]
                .pi
                .compose(x)
                .and_then(|m| m.compose(&retracts[p].h))
                .expect("types checked"),
        )
    })?;
    let iota = assemble(&b_ranks, &a_ranks, 0, |q, p| {
        if p == q {
            return Some(retracts[p].iota.clone());
        }
        let x = x(q, p)?;
        Some(
            retracts[q]
                .h
                .compose(x)
                .and_then(|m| m.compose(&retracts[p].iota))
                .expect("types checked"),
        )
    })?;
    let h = assemble(&a_ranks, &a_ranks, -1, |q, p| {
        if p == q {
            return Some(retracts[p].h.clone());
        }
        let x = x(q, p)?;
        Some(
            retracts[q]
                .h
                .compose(x)
                .and_then(|m| m.compose(&retracts[p].h))
                .expect("types checked"),
        )
    })?;
    let target = FreeComplex::new(bar_d)?;
    let sdr = Sdr {
        source: c.total()?,
        target: target.clone(),
        pi,
        iota,
        h,
    };
    sdr.verify()?;
    Ok((target, sdr))
}

fn chain_sum(
    c: &PosetSplitComplex,
    retracts: &[Sdr],
    q: usize,
    p: usize,
    memo: &mut HashMap<(usize, usize), GradedMap>,
) -> Result<GradedMap, PerturbationError> {
    if let Some(x) = memo.get(&(q, p)) {
        return Ok(x.clone());
    }
    let mut x = c.component(q, p);
    for r in 0..c.len() {
        if c.less[p][r] && c.less[r][q] {
            let inner = chain_sum(c, retracts, r, p, memo)?;
            let term = c.component(q, r).compose(&retracts[r].h)?.compose(&inner)?;
            x = x.add(&term)?;
        }
    }
    memo.insert((q, p), x.clone());
    Ok(x)
}

/// Single-entry helper for tests and small constructions.
pub fn scalar_block(c: i64) -> IntMatrix {
    IntMatrix::from_fn(1, 1, |_, _| BigInt::from(c))
}
