//! Brute-force reference computations, independent of the library algorithms.

use std::collections::BTreeMap;

use colorkr::laurent::LaurentPoly;
use colorkr::matrix::IntMatrix;
use colorkr::partition::Partition;
use colorkr::schur::SchurElement;
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};

/// Exponent vector → coefficient.
pub type Poly = BTreeMap<Vec<usize>, i64>;

/// s_λ(x₁..x_k) as a sum over semistandard tableaux with entries in 1..=k.
pub fn ssyt_monomials(lambda: &Partition, k: usize) -> Poly {
    let rows: Vec<usize> = lambda.parts().to_vec();
    let cells: Vec<(usize, usize)> = rows
        .iter()
        .enumerate()
        .flat_map(|(i, &r)| (0..r).map(move |j| (i, j)))
        .collect();
    let mut filling = vec![vec![0usize; rows.first().copied().unwrap_or(0)]; rows.len()];
    let mut out = Poly::new();
    fn fill(idx: usize, cells: &[(usize, usize)], t: &mut Vec<Vec<usize>>, k: usize, out: &mut Poly) {
        if idx == cells.len() {
            let mut e = vec![0; k];
            for &(i, j) in cells {
                e[t[i][j] - 1] += 1;
            }
            *out.entry(e).or_insert(0) += 1;
            return;
        }
        let (i, j) = cells[idx];
        // Rows weakly increase, columns strictly increase.
        let lo_row = if j > 0 { t[i][j - 1] } else { 1 };
        let lo_col = if i > 0 { t[i - 1][j] + 1 } else { 1 };
        for v in lo_row.max(lo_col)..=k {
            t[i][j] = v;
            fill(idx + 1, cells, t, k, out);
        }
        t[i][j] = 0;
    }
    fill(0, &cells, &mut filling, k, &mut out);
    out
}

pub fn poly_mul(a: &Poly, b: &Poly) -> Poly {
    let mut out = Poly::new();
    for (ea, ca) in a {
        for (eb, cb) in b {
            let e: Vec<usize> = ea.iter().zip(eb).map(|(x, y)| x + y).collect();
            *out.entry(e).or_insert(0) += ca * cb;
        }
    }
    out.retain(|_, c| *c != 0);
    out
}

/// Monomial expansion of a single-block SchurElement in k variables.
pub fn element_monomials(x: &SchurElement, k: usize) -> Poly {
    let mut out = Poly::new();
    for (t, &c) in x.terms() {
        for (e, m) in ssyt_monomials(&t.parts()[0], k) {
            *out.entry(e).or_insert(0) += c * m;
        }
    }
    out.retain(|_, c| *c != 0);
    out
}

/// Exact quotient of Laurent polynomials; None if the division leaves a remainder.
pub fn laurent_div(num: &LaurentPoly, den: &LaurentPoly) -> Option<LaurentPoly> {
    let (dmin, dmax) = (den.min_degree()?, den.max_degree()?);
    let lead = den.coeff(dmax);
    let mut rem = num.clone();
    let mut quot = LaurentPoly::zero();
    while let Some(rmax) = rem.max_degree() {
        if rmax - dmax < rem.min_degree()? - dmin {
            return None;
        }
        let c = rem.coeff(rmax);
        if c % lead != 0 {
            return None;
        }
        let t = LaurentPoly::monomial(c / lead, rmax - dmax);
        rem = &rem - &(&t * den);
        quot = &quot + &t;
    }
    Some(quot)
}

/// Balanced quantum integer [n] = (qⁿ − q⁻ⁿ)/(q − q⁻¹).
pub fn qint(n: i64) -> LaurentPoly {
    assert!(n > 0, "quantum integer of a non-positive number");
    LaurentPoly::from_terms((0..n).map(|i| (n - 1 - 2 * i, 1)))
}

/// Quantum dimension of the sl(N) irreducible with Young diagram λ, by the
/// hook-content formula.
pub fn quantum_dimension(lambda: &[usize], n: usize) -> LaurentPoly {
    let conj: Vec<usize> = (0..lambda.first().copied().unwrap_or(0))
        .map(|c| lambda.iter().filter(|&&r| r > c).count())
        .collect();
    let mut num = LaurentPoly::one();
    let mut den = LaurentPoly::one();
    for (i, &r) in lambda.iter().enumerate() {
        for c in 0..r {
            num = &num * &qint(n as i64 + c as i64 - i as i64);
            den = &den * &qint((r - c + conj[c] - i - 1) as i64);
        }
    }
    laurent_div(&num, &den).expect("quantum dimensions are Laurent polynomials")
}

/// Σ_j (−1)^j q^{−3·content(λ_j)} dim_q(λ_j) over the two-column diagrams
/// λ_j = (2^{a−j}, 1^{2j}) of Λ^a ⊗ Λ^a: the trefoil's R-matrix eigenvalue sum,
/// up to a unit monomial.
pub fn trefoil_quantum_invariant(n: usize, a: usize) -> LaurentPoly {
    let mut total = LaurentPoly::zero();
    for j in 0..=a {
        if a + j > n {
            continue;
        }
        let lambda: Vec<usize> = std::iter::repeat_n(2, a - j)
            .chain(std::iter::repeat_n(1, 2 * j))
            .collect();
        let content: i64 = lambda
            .iter()
            .enumerate()
            .flat_map(|(i, &r)| (0..r).map(move |c| c as i64 - i as i64))
            .sum();
        let sign = if j % 2 == 0 { 1 } else { -1 };
        let term = &LaurentPoly::monomial(sign, -3 * content) * &quantum_dimension(&lambda, n);
        total = &total + &term;
    }
    total
}

/// k with p = q^k · r, if any.
pub fn monomial_shift(p: &LaurentPoly, r: &LaurentPoly) -> Option<i64> {
    let k = p.min_degree()? - r.min_degree()?;
    (r.shift(k) == *p).then_some(k)
}

/// Rank over Q by exact rational elimination.
pub fn rational_rank(m: &IntMatrix) -> usize {
    let mut a: Vec<Vec<BigRational>> = (0..m.rows())
        .map(|i| {
            (0..m.cols())
                .map(|j| BigRational::from_integer(m.get(i, j).clone()))
                .collect()
        })
        .collect();
    let mut rank = 0;
    for c in 0..m.cols() {
        let Some(p) = (rank..a.len()).find(|&r| !a[r][c].is_zero()) else {
            continue;
        };
        a.swap(rank, p);
        let inv = BigRational::one() / a[rank][c].clone();
        for r in 0..a.len() {
            if r != rank && !a[r][c].is_zero() {
                let f = a[r][c].clone() * &inv;
                for j in c..m.cols() {
                    let v = a[rank][j].clone() * &f;
                    a[r][j] -= v;
                }
            }
        }
        rank += 1;
    }
    rank
}

/// |det| by rational elimination.
pub fn rational_abs_det(m: &IntMatrix) -> BigInt {
    assert_eq!(m.rows(), m.cols());
    let n = m.rows();
    let mut a: Vec<Vec<BigRational>> = (0..n)
        .map(|i| (0..n).map(|j| BigRational::from_integer(m.get(i, j).clone())).collect())
        .collect();
    let mut det = BigRational::one();
    for c in 0..n {
        let Some(p) = (c..n).find(|&r| !a[r][c].is_zero()) else {
            return BigInt::zero();
        };
        a.swap(c, p);
        det *= a[c][c].clone();
        for r in c + 1..n {
            let f = a[r][c].clone() / a[c][c].clone();
            for j in c..n {
                let v = a[c][j].clone() * &f;
                a[r][j] -= v;
            }
        }
    }
    let d = det.to_integer();
    if d < BigInt::zero() {
        -d
    } else {
        d
    }
}
