//! Whole-suite checks shared by the acceptance harness and the integration
//! tests. Each returns a one-line summary on success and the first failure
//! otherwise.

use std::time::{Duration, Instant};

use colorkr::complex::{AbelianGroup, BigradedAbelianGroup};
use colorkr::flag_ring::{build_quotient, SubgroupBlocks};
use colorkr::laurent::{poincare_flag, LaurentPoly};
use colorkr::link::{
    self, equivariant_resolution_check, golden_trefoil, reduced_homology, table_differences, trefoil_homology, Framing,
    LinkSpec,
};
use colorkr::partition::{partitions_of, Partition};
use colorkr::perturbation::perturb;
use colorkr::repspace::{
    compare_trefoil_routes, component_cohomology, enumerate_components, torus_link_angle_classes, total_space_check,
    verify_all_braids,
};
use colorkr::schur::{split_schur, BlockShape, SchurElement};
use colorkr::unitary::{phi_matrix, subspace_to_matrix, ComplexMatrix};
use num_complex::Complex64;
use rand::Rng;

use super::oracles::{element_monomials, poly_mul, ssyt_monomials, Poly};
use super::random::random_poset_complex;

pub type Check = Result<String, String>;

pub fn single_threaded<T: Send>(f: impl FnOnce() -> T + Send) -> T {
    rayon::ThreadPoolBuilder::new()
        .num_threads(1)
        .build()
        .expect("thread pool")
        .install(f)
}

fn render_differences(left: &BigradedAbelianGroup, right: &BigradedAbelianGroup) -> Vec<String> {
    table_differences(left, right)
        .into_iter()
        .map(|((h, q), got, want)| {
            format!(
                "({h},{q}): computed {} vs table {}",
                got.display_grouped(),
                want.display_grouped()
            )
        })
        .collect()
}

/// Exact agreement with a bundled table, with the time taken.
pub fn golden_table(n: usize, a: usize) -> Result<Duration, String> {
    let want = golden_trefoil(n, a).ok_or_else(|| format!("no table for ({n},{a})"))?;
    let t = Instant::now();
    let got = trefoil_homology(n, a, Framing::Seifert).map_err(|e| e.to_string())?;
    let elapsed = t.elapsed();
    let diffs = render_differences(&got, &want);
    if diffs.is_empty() {
        Ok(elapsed)
    } else {
        Err(format!(
            "({n},{a}) differs in {} cells: {}",
            diffs.len(),
            diffs.join("; ")
        ))
    }
}

pub fn criterion_golden_n4_a2() -> Check {
    let elapsed = single_threaded(|| golden_table(4, 2))?;
    let table = golden_trefoil(4, 2).expect("bundled");
    // Displayed span: every h between the extremes, q in steps of two.
    let span = |xs: Vec<i64>, step: i64| (xs.iter().max().unwrap() - xs.iter().min().unwrap()) / step + 1;
    let columns = span(table.cells().map(|((h, _), _)| h).collect(), 1);
    let rows = span(table.cells().map(|((_, q), _)| q).collect(), 2);
    if (columns, rows) != (7, 14) {
        return Err(format!("table spans {columns} h-columns and {rows} q-rows"));
    }
    if elapsed > Duration::from_secs(10) {
        return Err(format!("took {elapsed:?} single-threaded"));
    }
    Ok(format!("all cells of the 7x14 table match, {elapsed:?} on one thread"))
}

pub fn criterion_golden_larger() -> Check {
    let t = Instant::now();
    let mut failures = Vec::new();
    for (n, a) in [(5, 2), (6, 2), (6, 3)] {
        if let Err(e) = golden_table(n, a) {
            failures.push(e);
        }
    }
    let spot = [
        ((5, 2), (-5, 34), AbelianGroup::new(0, &[10])),
        ((6, 3), (-5, 43), AbelianGroup::new(1, &[2, 6, 6])),
    ];
    for ((n, a), at, want) in spot {
        let got = trefoil_homology(n, a, Framing::Seifert)
            .map_err(|e| e.to_string())?
            .get(at);
        if got != want {
            failures.push(format!("({n},{a}) cell {at:?} is {}", got.display_grouped()));
        }
    }
    let elapsed = t.elapsed();
    if elapsed > Duration::from_secs(300) {
        failures.push(format!("took {elapsed:?}"));
    }
    if failures.is_empty() {
        Ok(format!("(5,2), (6,2), (6,3) match cell for cell, {elapsed:?}"))
    } else {
        Err(failures.join(" | "))
    }
}

pub const EULER_REF_4_2: &str = "q^30 - q^24 - 2q^22 - 2q^20 - 2q^18 + q^14 + 3q^12 + 3q^10 + 3q^8 + q^6 + q^4";
pub const EULER_REF_5_2: &str = "q^40 + q^38 + q^36 - q^32 - 3q^30 - 4q^28 - 4q^26 - 3q^24 - q^22 + q^20 + 4q^18 + 4q^16 + 5q^14 + 4q^12 + 3q^10 + q^8 + q^6";

pub fn criterion_euler_reference() -> Check {
    for ((n, a), text) in [((4, 2), EULER_REF_4_2), ((5, 2), EULER_REF_5_2)] {
        let want: LaurentPoly = text.parse().map_err(|e| format!("reference parse: {e:?}"))?;
        let got = trefoil_homology(n, a, Framing::Seifert)
            .map_err(|e| e.to_string())?
            .euler_characteristic();
        if got != want {
            return Err(format!("({n},{a}): computed {got}"));
        }
    }
    Ok("(4,2) and (5,2) equal the reference polynomials".into())
}

/// Every label pair for the Hopf link and every label for the trefoil.
pub fn rep_space_cases(max_n: usize, max_label: usize) -> Vec<LinkSpec> {
    let mut out = Vec::new();
    for n in 1..=max_n {
        for a in 0..=n.min(max_label) {
            out.push(LinkSpec::trefoil(n, a).expect("valid labels"));
            for b in 0..=n.min(max_label) {
                out.push(LinkSpec::hopf(n, a, b).expect("valid labels"));
            }
        }
    }
    out
}

pub fn criterion_routes_agree() -> Check {
    let cases = rep_space_cases(6, 3);
    let mut routes = 0;
    for spec in &cases {
        let c = total_space_check(spec).map_err(|e| e.to_string())?;
        if !c.holds() {
            return Err(format!(
                "{} N={} labels {:?}: rep side rank {} torsion {:?}, link side rank {} torsion {:?}",
                spec.link, spec.n, spec.labels, c.rep_rank, c.rep_torsion, c.link_rank, c.link_torsion
            ));
        }
        if spec.link == link::LinkKind::RightHandedTrefoil {
            for l in link::trefoil_summand_range(spec.n, spec.labels[0]) {
                let r = compare_trefoil_routes(spec.n, spec.labels[0], l).map_err(|e| e.to_string())?;
                if !r.bigraded_equal {
                    return Err(format!("N={} a={} l={l}: bigraded Tor differs", spec.n, spec.labels[0]));
                }
                routes += 1;
            }
        }
    }
    Ok(format!(
        "{} links agree in total rank and torsion; {routes} components agree bigraded",
        cases.len()
    ))
}

pub fn criterion_reduced() -> Check {
    let spec = LinkSpec::trefoil(2, 1).map_err(|e| e.to_string())?.with_reduced(true);
    let h = reduced_homology(&spec).map_err(|e| e.to_string())?;
    if h.total_rank() != 3 {
        return Err(format!("reduced (2,1) trefoil has rank {}", h.total_rank()));
    }
    let mut count = 0;
    for n in 1..=6 {
        for a in 0..=n {
            let spec = LinkSpec::unknot(n, a).map_err(|e| e.to_string())?.with_reduced(true);
            let h = reduced_homology(&spec).map_err(|e| e.to_string())?;
            let mut want = BigradedAbelianGroup::new();
            want.insert((0, 0), AbelianGroup::free(1));
            if h != want {
                return Err(format!("reduced unknot N={n} a={a} is not Z at (0,0)"));
            }
            count += 1;
        }
    }
    Ok(format!(
        "reduced trefoil (2,1) has rank 3; {count} reduced unknots are Z at (0,0)"
    ))
}

/// Σ_{i+j=k} (−1)^j e_i(A∪B) h_j(B) = e_k(A), for all |A|,|B| ≤ 4, k ≤ 6.
pub fn alphabet_splitting_suite() -> Result<usize, String> {
    let mut cases = 0;
    for sa in 0..=4 {
        for sb in 0..=4 {
            let shape = BlockShape::full(vec![sa, sb]);
            for k in 0..=6 {
                let mut lhs = SchurElement::zero(&shape);
                for i in 0..=k {
                    let j = k - i;
                    let e = split_schur(&Partition::single_column(i), sa, sb);
                    let term = e.pieri_h(j, 1).map_err(|x| x.to_string())?;
                    let term = if j % 2 == 1 { term.scale(-1) } else { term };
                    lhs = lhs.add(&term).map_err(|x| x.to_string())?;
                }
                let rhs = SchurElement::elementary(&shape, 0, k).map_err(|x| x.to_string())?;
                if lhs != rhs {
                    return Err(format!("|A|={sa} |B|={sb} k={k}: {lhs} vs {rhs}"));
                }
                cases += 1;
            }
        }
    }
    Ok(cases)
}

/// Schur products in one block of size ≤ 3 against monomial expansions, total degree ≤ 8.
pub fn ssyt_product_suite(max_degree: usize, max_block: usize) -> Result<usize, String> {
    let mut cases = 0;
    for k in 1..=max_block {
        let shape = BlockShape::full(vec![k]);
        let parts: Vec<Partition> = (0..=max_degree).flat_map(|w| partitions_of(w, k, w)).collect();
        for lambda in &parts {
            for mu in &parts {
                if lambda.weight() + mu.weight() > max_degree {
                    continue;
                }
                let x = SchurElement::schur_in_block(&shape, 0, lambda).map_err(|e| e.to_string())?;
                let y = SchurElement::schur_in_block(&shape, 0, mu).map_err(|e| e.to_string())?;
                let prod = x.multiply(&y).map_err(|e| e.to_string())?;
                let want: Poly = poly_mul(&ssyt_monomials(lambda, k), &ssyt_monomials(mu, k));
                if element_monomials(&prod, k) != want {
                    return Err(format!("s{lambda}·s{mu} in {k} variables"));
                }
                cases += 1;
            }
        }
    }
    Ok(cases)
}

pub fn s221_example() -> Result<(), String> {
    let shape = BlockShape::full(vec![3]);
    let s = SchurElement::schur_in_block(&shape, 0, &Partition::new(vec![2, 2, 1]).unwrap()).unwrap();
    let got = element_monomials(&s, 3);
    let want: Poly = [vec![2, 2, 1], vec![2, 1, 2], vec![1, 2, 2]]
        .into_iter()
        .map(|e| (e, 1))
        .collect();
    if got == want {
        Ok(())
    } else {
        Err(format!("s(2,2,1) expands to {got:?}"))
    }
}

pub fn criterion_symmetric_functions() -> Check {
    let splitting = alphabet_splitting_suite()?;
    let products = ssyt_product_suite(8, 3)?;
    s221_example()?;
    Ok(format!(
        "{splitting} alphabet-splitting identities, {products} products against tableaux, s(2,2,1) expansion"
    ))
}

/// q-degree bound of the resolution check; 8 boxes.
pub const RESOLUTION_Q_DEGREE: usize = 16;

pub fn criterion_resolution() -> Check {
    let mut count = 0;
    for n in 1..=5 {
        for a in 0..=n {
            for l in link::trefoil_summand_range(n, a) {
                equivariant_resolution_check(n, a, l, RESOLUTION_Q_DEGREE / 2)
                    .map_err(|e| format!("N={n} a={a} l={l}: {e}"))?;
                count += 1;
            }
        }
    }
    Ok(format!(
        "{count} summands resolve through q-degree {RESOLUTION_Q_DEGREE}"
    ))
}

pub fn perturbation_trials(seed: u64, trials: usize) -> Check {
    let mut rng = super::rng(seed);
    let mut reduced = 0;
    for t in 0..trials {
        let (c, retracts) = random_poset_complex(&mut rng, 5, 4);
        let (out, sdr) = perturb(&c, &retracts).map_err(|e| format!("trial {t}: {e}"))?;
        sdr.verify().map_err(|e| format!("trial {t}: {e}"))?;
        let before = c.total().and_then(|x| x.homology()).map_err(|e| e.to_string())?;
        let after = out.homology().map_err(|e| e.to_string())?;
        if before != after {
            return Err(format!("trial {t}: homology changed"));
        }
        if !out.differential().is_zero() {
            reduced += 1;
        }
    }
    Ok(format!(
        "{trials} random poset complexes, {reduced} with a nonzero reduced differential"
    ))
}

pub fn criterion_perturbation() -> Check {
    perturbation_trials(2024, 200)
}

/// A random orthonormal a-frame in C^n by Gram–Schmidt, re-orthogonalized once.
pub fn random_frame<R: Rng>(rng: &mut R, n: usize, a: usize) -> ComplexMatrix {
    let mut cols: Vec<Vec<Complex64>> = Vec::with_capacity(a);
    while cols.len() < a {
        let mut v: Vec<Complex64> = (0..n)
            .map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
            .collect();
        for _ in 0..2 {
            for c in &cols {
                let dot: Complex64 = c.iter().zip(&v).map(|(x, y)| x.conj() * y).sum();
                for (vi, ci) in v.iter_mut().zip(c) {
                    *vi -= dot * ci;
                }
            }
        }
        let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if norm > 1e-3 {
            cols.push(v.into_iter().map(|z| z / norm).collect());
        }
    }
    ComplexMatrix::from_fn(n, a, |i, j| cols[j][i])
}

pub fn criterion_numeric() -> Check {
    let mut worst: f64 = 0.0;
    let mut count = 0;
    for n in 1..=8 {
        for ((a, l), r) in verify_all_braids(n).map_err(|e| e.to_string())? {
            if r.max() > 1e-9 {
                return Err(format!("N={n} a={a} l={l}: {r:?}"));
            }
            worst = worst.max(r.max());
            count += 1;
        }
    }
    let mut rng = super::rng(99);
    for n in 1..=8 {
        for a in 0..=n {
            let p = random_frame(&mut rng, n, a);
            let m = subspace_to_matrix(&p, n, a).map_err(|e| e.to_string())?;
            let w2 = colorkr::unitary::meridian_phase(n, a).powi(2);
            let inv = m.mul(&m.scale(w2.conj())).map_err(|e| e.to_string())?;
            let res = m
                .unitarity_residual()
                .max(inv.distance(&ComplexMatrix::identity(n)).map_err(|e| e.to_string())?)
                .max(p.orthonormality_residual());
            if res > 1e-10 {
                return Err(format!("random frame N={n} a={a}: residual {res:e}"));
            }
            let standard = ComplexMatrix::from_fn(n, a, |i, j| Complex64::new(if i == j { 1.0 } else { 0.0 }, 0.0));
            let phi_res = subspace_to_matrix(&standard, n, a)
                .and_then(|m| m.distance(&phi_matrix(n, a)?))
                .map_err(|e| e.to_string())?;
            if phi_res > 1e-12 {
                return Err(format!("standard frame N={n} a={a} is not Φ_a"));
            }
            worst = worst.max(res);
        }
    }
    let mut components = 0;
    for spec in rep_space_cases(6, 3) {
        let comps = enumerate_components(&spec).map_err(|e| e.to_string())?;
        let classes = match spec.link {
            link::LinkKind::RightHandedTrefoil => torus_link_angle_classes(spec.n, spec.labels[0], spec.labels[0], 3),
            link::LinkKind::PositiveHopf => torus_link_angle_classes(spec.n, spec.labels[0], spec.labels[1], 2),
            link::LinkKind::Unknot => Ok(vec![vec![]]),
        }
        .map_err(|e| e.to_string())?;
        if classes.len() != comps.len() {
            return Err(format!(
                "{} N={} {:?}: {} components, {} angle classes",
                spec.link,
                spec.n,
                spec.labels,
                comps.len(),
                classes.len()
            ));
        }
        for c in &comps {
            let g = component_cohomology(c).map_err(|e| e.to_string())?;
            let top = g.keys().next_back().copied();
            if top != Some(c.dimension() as i64) || g[&(c.dimension() as i64)] != AbelianGroup::free(1) {
                return Err(format!(
                    "{}: top degree {top:?}, dimension {}",
                    c.label(),
                    c.dimension()
                ));
            }
            components += 1;
        }
    }
    Ok(format!(
        "{count} braid checks and random frames, worst residual {worst:.1e}; {components} components with matching counts and top degree"
    ))
}

/// Every block sequence with N ≤ 6 and every grouping into ambient factors.
pub fn all_subgroups(max_n: usize) -> Vec<SubgroupBlocks> {
    fn compositions(n: usize) -> Vec<Vec<usize>> {
        if n == 0 {
            return vec![vec![]];
        }
        (1..=n)
            .flat_map(|first| {
                compositions(n - first).into_iter().map(move |mut rest| {
                    rest.insert(0, first);
                    rest
                })
            })
            .collect()
    }
    let mut out = Vec::new();
    for n in 1..=max_n {
        for blocks in compositions(n) {
            let len = blocks.len();
            for cuts in 0..(1u32 << (len - 1)) {
                let mut groups = Vec::new();
                let mut run = 1;
                for i in 0..len - 1 {
                    if cuts & (1 << i) != 0 {
                        groups.push(run);
                        run = 1;
                    } else {
                        run += 1;
                    }
                }
                groups.push(run);
                out.push(SubgroupBlocks::new(blocks.clone(), groups).expect("groups partition the blocks"));
            }
        }
    }
    out
}

pub fn criterion_borel() -> Check {
    let subgroups = all_subgroups(6);
    for s in &subgroups {
        let ring = build_quotient(s).map_err(|e| format!("{:?}: {e}", s.blocks()))?;
        let mut want = LaurentPoly::one();
        for r in s.group_ranges() {
            let blocks = &s.blocks()[r];
            let n: usize = blocks.iter().sum();
            want = &want * &poincare_flag(blocks, n).map_err(|e| e.to_string())?;
        }
        if ring.poincare() != want {
            return Err(format!(
                "{:?} grouped {:?}: {} vs {}",
                s.blocks(),
                s.group_ranges(),
                ring.poincare(),
                want
            ));
        }
    }
    Ok(format!(
        "{} subgroups build free quotients with the flag Poincaré polynomial",
        subgroups.len()
    ))
}
