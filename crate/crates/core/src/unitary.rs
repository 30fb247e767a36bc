//! Small dense complex matrices, Hermitian Jacobi eigenvalues and principal
//! angles between subspaces, for the numeric side of representation spaces.

use std::f64::consts::PI;
use std::fmt;

use num_complex::Complex64;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum NumericError {
    #[error("shape mismatch: {0}")]
    Shape(String),
    #[error("columns are not orthonormal (residual {0:e})")]
    NotOrthonormal(f64),
    #[error("matrix is not Hermitian (residual {0:e})")]
    NotHermitian(f64),
    #[error("label {a} out of range for N = {n}")]
    Range { a: usize, n: usize },
    #[error("non-finite entry")]
    NonFinite,
}

/// Row-major dense complex matrix.
#[derive(Clone, PartialEq)]
pub struct ComplexMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Complex64>,
}

impl ComplexMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        ComplexMatrix {
            rows,
            cols,
            data: vec![Complex64::new(0.0, 0.0); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        Self::from_fn(n, n, |i, j| {
            if i == j {
                Complex64::new(1.0, 0.0)
            } else {
                Complex64::new(0.0, 0.0)
            }
        })
    }

    pub fn from_fn(rows: usize, cols: usize, f: impl Fn(usize, usize) -> Complex64) -> Self {
        let data = (0..rows * cols).map(|k| f(k / cols, k % cols)).collect();
        ComplexMatrix { rows, cols, data }
    }

    pub fn diagonal(entries: &[Complex64]) -> Self {
        let n = entries.len();
        Self::from_fn(n, n, |i, j| if i == j { entries[i] } else { Complex64::new(0.0, 0.0) })
    }

    pub fn from_real_rows(rows: &[Vec<f64>]) -> Result<Self, NumericError> {
        let cols = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != cols) {
            return Err(NumericError::Shape("ragged rows".into()));
        }
        Ok(Self::from_fn(rows.len(), cols, |i, j| Complex64::new(rows[i][j], 0.0)))
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: Complex64) {
        self.data[i * self.cols + j] = v;
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }

    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self.get(j, i).conj())
    }

    pub fn mul(&self, rhs: &ComplexMatrix) -> Result<Self, NumericError> {
        if self.cols != rhs.rows {
            return Err(NumericError::Shape(format!(
                "{}x{} times {}x{}",
                self.rows, self.cols, rhs.rows, rhs.cols
            )));
        }
        let mut out = Self::zeros(self.rows, rhs.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                if a == Complex64::new(0.0, 0.0) {
                    continue;
                }
                for j in 0..rhs.cols {
                    out.data[i * rhs.cols + j] += a * rhs.get(k, j);
                }
            }
        }
        Ok(out)
    }

    pub fn add(&self, rhs: &ComplexMatrix) -> Result<Self, NumericError> {
        self.zip(rhs, |a, b| a + b)
    }

    pub fn sub(&self, rhs: &ComplexMatrix) -> Result<Self, NumericError> {
        self.zip(rhs, |a, b| a - b)
    }

    fn zip(&self, rhs: &ComplexMatrix, f: impl Fn(Complex64, Complex64) -> Complex64) -> Result<Self, NumericError> {
        if (self.rows, self.cols) != (rhs.rows, rhs.cols) {
            return Err(NumericError::Shape("elementwise operands differ in shape".into()));
        }
        let data = self.data.iter().zip(&rhs.data).map(|(a, b)| f(*a, *b)).collect();
        Ok(ComplexMatrix {
            rows: self.rows,
            cols: self.cols,
            data,
        })
    }

    pub fn scale(&self, c: Complex64) -> Self {
        ComplexMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|z| z * c).collect(),
        }
    }

    pub fn pow(&self, k: u32) -> Result<Self, NumericError> {
        let mut out = Self::identity(self.rows);
        for _ in 0..k {
            out = out.mul(self)?;
        }
        Ok(out)
    }

    /// Largest entry modulus.
    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn distance(&self, rhs: &ComplexMatrix) -> Result<f64, NumericError> {
        Ok(self.sub(rhs)?.max_abs())
    }

    /// Direct sum of square blocks.
    pub fn block_diagonal(blocks: &[ComplexMatrix]) -> Self {
        let n: usize = blocks.iter().map(|b| b.rows).sum();
        let mut out = Self::zeros(n, n);
        let mut at = 0;
        for b in blocks {
            for i in 0..b.rows {
                for j in 0..b.cols {
                    out.set(at + i, at + j, b.get(i, j));
                }
            }
            at += b.rows;
        }
        out
    }

    pub fn determinant(&self) -> Result<Complex64, NumericError> {
        if self.rows != self.cols {
            return Err(NumericError::Shape("determinant of a non-square matrix".into()));
        }
        let n = self.rows;
        let mut a = self.clone();
        let mut det = Complex64::new(1.0, 0.0);
        for c in 0..n {
            let p = (c..n)
                .max_by(|&x, &y| a.get(x, c).norm().total_cmp(&a.get(y, c).norm()))
                .expect("non-empty range");
            if a.get(p, c).norm() == 0.0 {
                return Ok(Complex64::new(0.0, 0.0));
            }
            if p != c {
                for j in 0..n {
                    let t = a.get(p, j);
                    a.set(p, j, a.get(c, j));
                    a.set(c, j, t);
                }
                det = -det;
            }
            let pivot = a.get(c, c);
            det *= pivot;
            for r in c + 1..n {
                let f = a.get(r, c) / pivot;
                for j in c..n {
                    let v = a.get(r, j) - f * a.get(c, j);
                    a.set(r, j, v);
                }
            }
        }
        Ok(det)
    }

    /// Max deviation of P*P from the identity.
    pub fn orthonormality_residual(&self) -> f64 {
        let g = self.adjoint().mul(self).expect("adjoint shapes agree");
        g.distance(&Self::identity(self.cols)).expect("square Gram matrix")
    }

    /// Max deviation of M*M from the identity.
    pub fn unitarity_residual(&self) -> f64 {
        self.orthonormality_residual()
    }
}

impl fmt::Debug for ComplexMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in 0..self.rows {
            let row: Vec<String> = (0..self.cols)
                .map(|j| {
                    let z = self.get(i, j);
                    format!("{:+.4}{:+.4}i", z.re, z.im)
                })
                .collect();
            writeln!(f, "[{}]", row.join(", "))?;
        }
        Ok(())
    }
}

pub const JACOBI_TOLERANCE: f64 = 1e-12;
pub const JACOBI_MAX_SWEEPS: usize = 60;

/// Eigenvalues of a Hermitian matrix in ascending order, by cyclic Jacobi
/// rotations. Each rotation first removes the phase of the pivot entry, then
/// applies the classical real rotation.
pub fn hermitian_eigenvalues(h: &ComplexMatrix) -> Result<Vec<f64>, NumericError> {
    let n = h.rows;
    if h.cols != n {
        return Err(NumericError::Shape("eigenvalues of a non-square matrix".into()));
    }
    if !h.is_finite() {
        return Err(NumericError::NonFinite);
    }
    let skew = h.distance(&h.adjoint())?;
    let scale = h.max_abs().max(f64::MIN_POSITIVE);
    if skew > 1e-9 * scale.max(1.0) {
        return Err(NumericError::NotHermitian(skew));
    }
    let mut a = h.clone();
    let off = |a: &ComplexMatrix| {
        let mut m: f64 = 0.0;
        for i in 0..n {
            for j in i + 1..n {
                m = m.max(a.get(i, j).norm());
            }
        }
        m
    };
    for _ in 0..JACOBI_MAX_SWEEPS {
        if off(&a) <= JACOBI_TOLERANCE * scale {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let hpq = a.get(p, q);
                let r = hpq.norm();
                if r <= f64::MIN_POSITIVE {
                    continue;
                }
                let phase = Complex64::from_polar(1.0, -hpq.arg());
                let (app, aqq) = (a.get(p, p).re, a.get(q, q).re);
                let tau = (aqq - app) / (2.0 * r);
                let t = if tau >= 0.0 {
                    1.0 / (tau + (1.0 + tau * tau).sqrt())
                } else {
                    -1.0 / (-tau + (1.0 + tau * tau).sqrt())
                };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;
                // u = diag(1, phase) · [[c, s], [−s, c]]
                let u = [
                    [Complex64::new(c, 0.0), Complex64::new(s, 0.0)],
                    [-phase * s, phase * c],
                ];
                // A ← A·u on columns p, q.
                for i in 0..n {
                    let (x, y) = (a.get(i, p), a.get(i, q));
                    a.set(i, p, x * u[0][0] + y * u[1][0]);
                    a.set(i, q, x * u[0][1] + y * u[1][1]);
                }
                // A ← u*·A on rows p, q.
                for j in 0..n {
                    let (x, y) = (a.get(p, j), a.get(q, j));
                    a.set(p, j, u[0][0].conj() * x + u[1][0].conj() * y);
                    a.set(q, j, u[0][1].conj() * x + u[1][1].conj() * y);
                }
            }
        }
    }
    let mut eig: Vec<f64> = (0..n).map(|i| a.get(i, i).re).collect();
    eig.sort_by(f64::total_cmp);
    Ok(eig)
}

/// Principal angles between the column spaces of two orthonormal frames, in
/// ascending order. Small angles come from sines of the residual B − A(A*B),
/// large ones from cosines of A*B, so both ends are accurate.
pub fn principal_angles(pa: &ComplexMatrix, pb: &ComplexMatrix) -> Result<Vec<f64>, NumericError> {
    if pa.rows != pb.rows {
        return Err(NumericError::Shape("frames live in different spaces".into()));
    }
    for p in [pa, pb] {
        let r = p.orthonormality_residual();
        if r > 1e-10 {
            return Err(NumericError::NotOrthonormal(r));
        }
    }
    let k = pa.cols.min(pb.cols);
    let cross = pa.adjoint().mul(pb)?;
    // Gram of the smaller side has the squared cosines as eigenvalues.
    let gram_c = if pa.cols <= pb.cols {
        cross.mul(&cross.adjoint())?
    } else {
        cross.adjoint().mul(&cross)?
    };
    let mut cos2 = hermitian_eigenvalues(&gram_c)?;
    cos2.reverse();
    let (small, big) = if pa.cols <= pb.cols { (pa, pb) } else { (pb, pa) };
    let residual = big.sub(&small.mul(&small.adjoint().mul(big)?)?)?;
    let sin2 = hermitian_eigenvalues(&residual.adjoint().mul(&residual)?)?;
    Ok((0..k)
        .map(|i| {
            let s2 = sin2[i].clamp(0.0, 1.0);
            if s2 < 0.5 {
                s2.sqrt().asin()
            } else {
                cos2[i].clamp(0.0, 1.0).sqrt().acos()
            }
        })
        .collect())
}

/// Φ_a = e^{aπi/N}(−Id_a ⊕ Id_{N−a}).
pub fn phi_matrix(n: usize, a: usize) -> Result<ComplexMatrix, NumericError> {
    if a > n {
        return Err(NumericError::Range { a, n });
    }
    let w = meridian_phase(n, a);
    let entries: Vec<Complex64> = (0..n).map(|i| if i < a { -w } else { w }).collect();
    Ok(ComplexMatrix::diagonal(&entries))
}

/// e^{aπi/N}.
pub fn meridian_phase(n: usize, a: usize) -> Complex64 {
    if n == 0 {
        return Complex64::new(1.0, 0.0);
    }
    Complex64::from_polar(1.0, a as f64 * PI / n as f64)
}

/// The matrix of C_a whose (−e^{aπi/N})-eigenspace is the span of the frame:
/// M = e^{aπi/N}(Id − 2PP*).
pub fn subspace_to_matrix(p: &ComplexMatrix, n: usize, a: usize) -> Result<ComplexMatrix, NumericError> {
    if p.rows != n || p.cols != a {
        return Err(NumericError::Shape(format!("expected an {n}x{a} frame")));
    }
    let r = p.orthonormality_residual();
    if r > 1e-10 {
        return Err(NumericError::NotOrthonormal(r));
    }
    let proj = p.mul(&p.adjoint())?.scale(Complex64::new(2.0, 0.0));
    Ok(ComplexMatrix::identity(n).sub(&proj)?.scale(meridian_phase(n, a)))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn phi_examples() {
        assert!(phi_matrix(3, 0).unwrap().distance(&ComplexMatrix::identity(3)).unwrap() < 1e-12);
        assert!(phi_matrix(3, 3).unwrap().distance(&ComplexMatrix::identity(3)).unwrap() < 1e-12);
        let p = phi_matrix(2, 1).unwrap();
        let want = ComplexMatrix::diagonal(&[c(0.0, -1.0), c(0.0, 1.0)]);
        assert!(p.distance(&want).unwrap() < 1e-12);
        for n in 1..=8 {
            for a in 0..=n {
                let d = phi_matrix(n, a).unwrap().determinant().unwrap();
                assert!((d - c(1.0, 0.0)).norm() < 1e-12, "det Φ for N={n} a={a}");
            }
        }
    }

    #[test]
    fn jacobi_on_a_phase_conjugated_diagonal() {
        // U diag(−1, 0.5, 2) U* with U a product of complex rotations.
        let theta: f64 = 0.7;
        let u1 = ComplexMatrix::from_fn(3, 3, |i, j| match (i, j) {
            (0, 0) | (1, 1) => c(theta.cos(), 0.0),
            (0, 1) => Complex64::from_polar(theta.sin(), 0.3),
            (1, 0) => -Complex64::from_polar(theta.sin(), -0.3),
            (2, 2) => c(1.0, 0.0),
            _ => c(0.0, 0.0),
        });
        let d = ComplexMatrix::diagonal(&[c(-1.0, 0.0), c(0.5, 0.0), c(2.0, 0.0)]);
        let h = u1.mul(&d).unwrap().mul(&u1.adjoint()).unwrap();
        let eig = hermitian_eigenvalues(&h).unwrap();
        for (x, y) in eig.iter().zip([-1.0, 0.5, 2.0]) {
            assert!((x - y).abs() < 1e-12);
        }
    }

    #[test]
    fn angle_examples() {
        let e = |i: usize| ComplexMatrix::from_fn(2, 1, |r, _| c(if r == i { 1.0 } else { 0.0 }, 0.0));
        let a = principal_angles(&e(0), &e(1)).unwrap();
        assert!((a[0] - PI / 2.0).abs() < 1e-12);
        let z = principal_angles(&e(0), &e(0)).unwrap();
        assert!(z[0].abs() < 1e-12);
    }
}
