mod common;

use num_bigint::BigInt;
use num_traits::{One, Signed};
use rand::Rng;

use colorkr::flag_ring::{build_quotient, ideal_generator, AmbientRing, QuotientRing, SubgroupBlocks};
use colorkr::matrix::{determinant, IntMatrix};
use colorkr::partition::partitions_of;
use colorkr::schur::{PartitionTuple, SchurElement};
use common::checks::all_subgroups;

fn tuple_element(ring: &QuotientRing, t: &PartitionTuple) -> SchurElement {
    SchurElement::monomial(ring.shape(), t.clone(), 1).unwrap()
}

/// A random element of the ambient ring of degree d: a few tuples with small coefficients.
fn random_element<R: Rng>(rng: &mut R, ring: &QuotientRing, d: usize) -> SchurElement {
    let shape = ring.shape();
    let mut x = SchurElement::zero(shape);
    for _ in 0..3 {
        let mut parts = Vec::new();
        let mut left = d;
        for (j, &size) in shape.sizes().iter().enumerate() {
            let w = if j + 1 == shape.blocks() {
                left
            } else {
                rng.gen_range(0..=left)
            };
            let options = partitions_of(w, size, w);
            let Some(p) = options.get(rng.gen_range(0..options.len().max(1))) else {
                return x;
            };
            parts.push(p.clone());
            left -= w;
        }
        let term = SchurElement::monomial(shape, PartitionTuple(parts), rng.gen_range(-3..=3)).unwrap();
        x = x.add(&term).unwrap();
    }
    x
}

#[test]
fn top_degree_is_a_single_class() {
    for s in all_subgroups(5) {
        let ring = build_quotient(&s).unwrap();
        assert_eq!(2 * ring.top_degree(), s.dimension(), "{:?}", s.blocks());
        assert_eq!(ring.rank(ring.top_degree()), 1);
        assert_eq!(ring.rank(0), 1);
        assert_eq!(ring.poincare(), s.expected_poincare());
        assert_eq!(ring.total_rank() as i64, ring.poincare().eval_at_one());
    }
}

#[test]
fn poincare_duality_over_the_integers() {
    for blocks in [
        vec![1, 1, 1],
        vec![2, 2],
        vec![1, 2, 1],
        vec![2, 1, 2],
        vec![1, 1, 1, 1],
        vec![3, 2],
    ] {
        let ring = build_quotient(&SubgroupBlocks::in_unitary(blocks.clone())).unwrap();
        let top = ring.top_degree();
        for d in 0..=top {
            let rows: Vec<Vec<BigInt>> = ring
                .basis(d)
                .iter()
                .map(|t| {
                    let op = ring.mult_operator(&tuple_element(&ring, t)).unwrap();
                    let m = op.matrix(top - d);
                    (0..m.cols()).map(|j| m.get(0, j).clone()).collect()
                })
                .collect();
            assert_eq!(rows.len(), ring.rank(top - d));
            let pairing = IntMatrix::from_fn(rows.len(), rows.len(), |i, j| rows[i][j].clone());
            assert!(determinant(&pairing).abs().is_one(), "{blocks:?} degree {d}");
        }
    }
}

#[test]
fn ring_action_composes_like_multiplication() {
    let mut rng = common::rng(31);
    for blocks in [vec![1, 2, 1], vec![2, 2], vec![1, 1, 1, 1], vec![2, 1, 2]] {
        let ring = build_quotient(&SubgroupBlocks::in_unitary(blocks.clone())).unwrap();
        for _ in 0..15 {
            let (dx, dy) = (rng.gen_range(0..=3), rng.gen_range(0..=3));
            let x = random_element(&mut rng, &ring, dx);
            let y = random_element(&mut rng, &ring, dy);
            // Zero has no degree, so its operator has no well-defined shape.
            if x.is_zero() || y.is_zero() || x.multiply(&y).unwrap().is_zero() {
                continue;
            }
            let xy = ring.mult_operator(&x.multiply(&y).unwrap()).unwrap();
            let (ox, oy) = (ring.mult_operator(&x).unwrap(), ring.mult_operator(&y).unwrap());
            let composed = ox.compose(&oy);
            for d in 0..=ring.top_degree() {
                assert_eq!(
                    composed.matrix(d),
                    xy.matrix(d),
                    "{blocks:?}: ({x})·({y}) in degree {d}"
                );
            }
            assert!(ox.commutes_with(&oy));
        }
        for m in 1..=blocks.iter().sum() {
            assert!(ring
                .mult_operator(&ideal_generator(ring.shape(), m).unwrap())
                .unwrap()
                .is_zero());
        }
    }
}

#[test]
fn lattice_route_agrees_on_small_shapes() {
    for s in all_subgroups(4) {
        let ring = build_quotient(&s).unwrap();
        for d in 0..=ring.top_degree() {
            ring.lattice_check(d)
                .unwrap_or_else(|e| panic!("{:?} degree {d}: {e}", s.blocks()));
        }
    }
}

#[test]
fn full_alphabet_elementaries_are_regular() {
    for blocks in [vec![1, 1, 1], vec![2, 1], vec![1, 1, 1, 1], vec![2, 2]] {
        let n: usize = blocks.iter().sum();
        let ambient = AmbientRing::new(&colorkr::schur::BlockShape::full(blocks.clone()), 2 * n + 2);
        let gens: Vec<SchurElement> = (1..=n).map(|m| ideal_generator(ambient.shape(), m).unwrap()).collect();
        ambient.regularity_check(&gens).unwrap();
        // Repeating a generator makes it a zero-divisor in the quotient.
        let repeated = vec![gens[0].clone(), gens[0].clone()];
        assert!(ambient.regularity_check(&repeated).is_err(), "{blocks:?}");
    }
}
