//! Seeded random inputs: integer matrices, unimodular changes of basis and
//! poset-split complexes with known strong deformation retracts.

use std::collections::BTreeMap;

use colorkr::complex::Bidegree;
use colorkr::matrix::IntMatrix;
use colorkr::perturbation::{FreeComplex, GradedMap, PosetSplitComplex, Ranks, Sdr};
use num_bigint::BigInt;
use rand::Rng;

pub fn random_matrix<R: Rng>(rng: &mut R, rows: usize, cols: usize, bound: i64) -> IntMatrix {
    let data: Vec<Vec<i64>> = (0..rows)
        .map(|_| (0..cols).map(|_| rng.gen_range(-bound..=bound)).collect())
        .collect();
    IntMatrix::from_fn(rows, cols, |i, j| BigInt::from(data[i][j]))
}

/// A random unimodular matrix and its inverse, as products of elementary moves.
pub fn random_unimodular<R: Rng>(rng: &mut R, n: usize) -> (IntMatrix, IntMatrix) {
    let mut u = IntMatrix::identity(n);
    let mut inv = IntMatrix::identity(n);
    if n < 2 {
        if n == 1 && rng.gen_bool(0.5) {
            u = IntMatrix::scalar(1, -1);
            inv = IntMatrix::scalar(1, -1);
        }
        return (u, inv);
    }
    for _ in 0..3 * n {
        let i = rng.gen_range(0..n);
        let mut j = rng.gen_range(0..n - 1);
        if j >= i {
            j += 1;
        }
        let c: i64 = rng.gen_range(-2..=2);
        // Row op on u: row_i += c·row_j; on the inverse: column_j −= c·column_i.
        let mut e = IntMatrix::identity(n);
        e.set(i, j, BigInt::from(c));
        let mut e_inv = IntMatrix::identity(n);
        e_inv.set(i, j, BigInt::from(-c));
        u = e.mul(&u).unwrap();
        inv = inv.mul(&e_inv).unwrap();
    }
    (u, inv)
}

fn random_map<R: Rng>(rng: &mut R, source: &Ranks, target: &Ranks, shift: i64, density: f64) -> GradedMap {
    let mut blocks = BTreeMap::new();
    for (&(h, q), &cols) in source {
        let rows = target.get(&(h + shift, q)).copied().unwrap_or(0);
        if rows > 0 && rng.gen_bool(density) {
            blocks.insert((h, q), random_matrix(rng, rows, cols, 2));
        }
    }
    GradedMap::new(source, target, shift, blocks).unwrap()
}

/// A node complex A = B ⊕ (contractible cones) with B of zero differential,
/// in a randomly changed basis, and its retract onto B.
pub fn random_node<R: Rng>(rng: &mut R, max_rank: usize) -> Sdr {
    let mut b = Ranks::new();
    let mut cones: Vec<Bidegree> = Vec::new();
    let mut a = Ranks::new();
    for h in 0..3 {
        for q in [0i64, 2] {
            if rng.gen_bool(0.5) {
                let r = rng.gen_range(1..=2.min(max_rank));
                b.insert((h, q), r);
                *a.entry((h, q)).or_insert(0) += r;
            }
        }
    }
    for _ in 0..rng.gen_range(0..=2) {
        let at = (rng.gen_range(0..3), if rng.gen_bool(0.5) { 0 } else { 2 });
        let fits = |a: &Ranks, x: Bidegree| a.get(&x).copied().unwrap_or(0) < max_rank;
        if fits(&a, at) && fits(&a, (at.0 + 1, at.1)) {
            cones.push(at);
            *a.entry(at).or_insert(0) += 1;
            *a.entry((at.0 + 1, at.1)).or_insert(0) += 1;
        }
    }
    // Coordinates: B first, then cone ends in the order they were added.
    let mut next: BTreeMap<Bidegree, usize> = b.clone();
    let mut cone_coords = Vec::new();
    for &at in &cones {
        let lo = *next.entry(at).or_insert(0);
        *next.get_mut(&at).unwrap() += 1;
        let hi_at = (at.0 + 1, at.1);
        let hi = *next.entry(hi_at).or_insert(0);
        *next.get_mut(&hi_at).unwrap() += 1;
        cone_coords.push((at, lo, hi));
    }
    let zeros = |src: &Ranks, tgt: &Ranks, shift: i64| -> BTreeMap<Bidegree, IntMatrix> {
        src.iter()
            .filter_map(|(&(h, q), &c)| {
                let r = tgt.get(&(h + shift, q)).copied().unwrap_or(0);
                (r > 0).then(|| ((h, q), IntMatrix::zeros(r, c)))
            })
            .collect()
    };
    let mut d = zeros(&a, &a, 1);
    let mut hm = zeros(&a, &a, -1);
    for &(at, lo, hi) in &cone_coords {
        d.get_mut(&at).unwrap().set(hi, lo, BigInt::from(1));
        hm.get_mut(&(at.0 + 1, at.1)).unwrap().set(lo, hi, BigInt::from(-1));
    }
    let mut pi = zeros(&a, &b, 0);
    let mut iota = zeros(&b, &a, 0);
    for (&at, &r) in &b {
        for i in 0..r {
            pi.get_mut(&at).unwrap().set(i, i, BigInt::from(1));
            iota.get_mut(&at).unwrap().set(i, i, BigInt::from(1));
        }
    }
    // Change of basis U on A: d ↦ U d U⁻¹, π ↦ π U⁻¹, ι ↦ U ι, h ↦ U h U⁻¹.
    let mut u = BTreeMap::new();
    let mut u_inv = BTreeMap::new();
    for (&at, &r) in &a {
        let (x, y) = random_unimodular(rng, r);
        u.insert(at, x);
        u_inv.insert(at, y);
    }
    let conj = |m: &BTreeMap<Bidegree, IntMatrix>, shift: i64| -> BTreeMap<Bidegree, IntMatrix> {
        m.iter()
            .map(|(&(h, q), x)| ((h, q), u[&(h + shift, q)].mul(x).unwrap().mul(&u_inv[&(h, q)]).unwrap()))
            .collect()
    };
    let d = conj(&d, 1);
    let hm = conj(&hm, -1);
    let pi: BTreeMap<_, _> = pi.iter().map(|(&at, x)| (at, x.mul(&u_inv[&at]).unwrap())).collect();
    let iota: BTreeMap<_, _> = iota.iter().map(|(&at, x)| (at, u[&at].mul(x).unwrap())).collect();
    let source = FreeComplex::new(GradedMap::new(&a, &a, 1, d).unwrap()).unwrap();
    Sdr {
        source,
        target: FreeComplex::trivial(&b),
        pi: GradedMap::new(&a, &b, 0, pi).unwrap(),
        iota: GradedMap::new(&b, &a, 0, iota).unwrap(),
        h: GradedMap::new(&a, &a, -1, hm).unwrap(),
    }
}

/// Adds dy − yd + ιzπ to h. Both terms are (anti)commutators with d that
/// vanish, the second because B has zero differential, so h stays a homotopy
/// while the side conditions usually fail.
pub fn spoil_homotopy<R: Rng>(rng: &mut R, s: &Sdr) -> Sdr {
    let r = s.source.ranks();
    let y = random_map(rng, r, r, -2, 0.7);
    let z = random_map(rng, s.target.ranks(), s.target.ranks(), -1, 0.7);
    let d = s.source.differential();
    let extra = d
        .compose(&y)
        .unwrap()
        .sub(&y.compose(d).unwrap())
        .unwrap()
        .add(&s.iota.compose(&z).unwrap().compose(&s.pi).unwrap())
        .unwrap();
    Sdr {
        h: s.h.add(&extra).unwrap(),
        ..s.clone()
    }
}

type PosetMatrix = BTreeMap<(usize, usize), GradedMap>;

fn pm_mul(x: &PosetMatrix, y: &PosetMatrix) -> PosetMatrix {
    let mut out: PosetMatrix = BTreeMap::new();
    for (&(q, r), a) in x {
        for (&(r2, p), b) in y {
            if r != r2 {
                continue;
            }
            let term = a.compose(b).unwrap();
            match out.get_mut(&(q, p)) {
                Some(acc) => *acc = acc.add(&term).unwrap(),
                None => {
                    out.insert((q, p), term);
                }
            }
        }
    }
    out
}

fn pm_add(x: &PosetMatrix, y: &PosetMatrix) -> PosetMatrix {
    let mut out = x.clone();
    for (k, b) in y {
        match out.get_mut(k) {
            Some(acc) => *acc = acc.add(b).unwrap(),
            None => {
                out.insert(*k, b.clone());
            }
        }
    }
    out
}

/// A random strict partial order on n nodes, compatible with index order.
pub fn random_poset<R: Rng>(rng: &mut R, n: usize) -> Vec<Vec<bool>> {
    let mut less = vec![vec![false; n]; n];
    for p in 0..n {
        for q in p + 1..n {
            less[p][q] = rng.gen_bool(0.5);
        }
    }
    for k in 0..n {
        for p in 0..n {
            for q in 0..n {
                if less[p][k] && less[k][q] {
                    less[p][q] = true;
                }
            }
        }
    }
    less
}

/// A poset-split complex with retracts for every node. The total differential
/// is U (D₀ + F) U⁻¹ where D₀ is the node differentials, F glues minimal to
/// maximal nodes through their retracts, and U is poset-unitriangular.
pub fn random_poset_complex<R: Rng>(rng: &mut R, max_nodes: usize, max_rank: usize) -> (PosetSplitComplex, Vec<Sdr>) {
    let n = rng.gen_range(1..=max_nodes);
    let less = random_poset(rng, n);
    let retracts: Vec<Sdr> = (0..n).map(|_| random_node(rng, max_rank)).collect();
    let ranks: Vec<Ranks> = retracts.iter().map(|s| s.source.ranks().clone()).collect();
    let minimal = |p: usize| (0..n).all(|r| !less[r][p]);
    let maximal = |p: usize| (0..n).all(|r| !less[p][r]);

    let mut d0: PosetMatrix = BTreeMap::new();
    for (p, s) in retracts.iter().enumerate() {
        d0.insert((p, p), s.source.differential().clone());
    }
    for p in 0..n {
        for q in 0..n {
            if less[p][q] && minimal(p) && maximal(q) && rng.gen_bool(0.7) {
                let phi = random_map(rng, retracts[p].target.ranks(), retracts[q].target.ranks(), 1, 0.8);
                let f = retracts[q]
                    .iota
                    .compose(&phi)
                    .unwrap()
                    .compose(&retracts[p].pi)
                    .unwrap();
                d0.insert((q, p), f);
            }
        }
    }
    let mut nil: PosetMatrix = BTreeMap::new();
    for p in 0..n {
        for q in 0..n {
            if less[p][q] && rng.gen_bool(0.6) {
                nil.insert((q, p), random_map(rng, &ranks[p], &ranks[q], 0, 0.8));
            }
        }
    }
    let mut id: PosetMatrix = BTreeMap::new();
    for (p, r) in ranks.iter().enumerate() {
        id.insert((p, p), GradedMap::identity(r));
    }
    let u = pm_add(&id, &nil);
    // U⁻¹ = Σ_k (−N)^k, finite because N is strictly poset-increasing.
    let neg: PosetMatrix = nil.iter().map(|(k, v)| (*k, v.neg())).collect();
    let mut u_inv = id.clone();
    let mut power = id;
    for _ in 0..n {
        power = pm_mul(&power, &neg);
        u_inv = pm_add(&u_inv, &power);
    }
    let total = pm_mul(&pm_mul(&u, &d0), &u_inv);
    let mut nodes = Vec::with_capacity(n);
    let mut arrows = BTreeMap::new();
    for p in 0..n {
        nodes.push(FreeComplex::new(total[&(p, p)].clone()).unwrap());
    }
    for (&(q, p), f) in &total {
        if p != q && !f.is_zero() {
            arrows.insert((q, p), f.clone());
        }
    }
    let c = PosetSplitComplex::new(less, nodes, arrows).expect("conjugated differential squares to zero");
    (c, retracts)
}
