//! Dense complex matrices and the Hermitian eigensolver.
//!
//! Matrices are small (at most a few dozen rows) and stored row-major in a
//! flat `Vec`. The eigensolver is a cyclic complex Jacobi iteration, which is
//! accurate to near machine precision at these sizes and produces an
//! orthonormal eigenbasis even for degenerate spectra.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Index, IndexMut, Mul, Sub};

use num_complex::Complex64;

use crate::error::{Error, Result};

pub type C64 = Complex64;

pub const ZERO: C64 = C64 { re: 0.0, im: 0.0 };
pub const ONE: C64 = C64 { re: 1.0, im: 0.0 };

/// Hermiticity tolerance applied by `eig_hermitian`.
pub const HERMITIAN_TOL: f64 = 1e-9;

#[derive(Clone, PartialEq)]
pub struct ComplexMatrix {
    rows: usize,
    cols: usize,
    data: Vec<C64>,
}

impl fmt::Debug for ComplexMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "ComplexMatrix {}x{} [", self.rows, self.cols)?;
        for i in 0..self.rows {
            write!(f, "  ")?;
            for j in 0..self.cols {
                let z = self[(i, j)];
                write!(f, "{:>9.5}{:+.5}i  ", z.re, z.im)?;
            }
            writeln!(f)?;
        }
        write!(f, "]")
    }
}

impl ComplexMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![ZERO; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = ONE;
        }
        m
    }

    /// Builds a matrix from row-major entries, rejecting NaN and infinities.
    pub fn from_vec(rows: usize, cols: usize, data: Vec<C64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::InvalidArgument(format!(
                "expected {} entries for a {rows}x{cols} matrix, got {}",
                rows * cols,
                data.len()
            )));
        }
        if let Some(k) = data.iter().position(|z| !(z.re.is_finite() && z.im.is_finite())) {
            return Err(Error::NonFinite {
                row: k / cols.max(1),
                col: k % cols.max(1),
            });
        }
        Ok(Self { rows, cols, data })
    }

    pub fn from_real(rows: usize, cols: usize, data: &[f64]) -> Result<Self> {
        Self::from_vec(rows, cols, data.iter().map(|&x| C64::new(x, 0.0)).collect())
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> C64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Self { rows, cols, data }
    }

    pub fn from_diagonal(diag: &[C64]) -> Self {
        let n = diag.len();
        let mut m = Self::zeros(n, n);
        for (i, &z) in diag.iter().enumerate() {
            m[(i, i)] = z;
        }
        m
    }

    pub fn from_real_diagonal(diag: &[f64]) -> Self {
        let n = diag.len();
        let mut m = Self::zeros(n, n);
        for (i, &x) in diag.iter().enumerate() {
            m[(i, i)] = C64::new(x, 0.0);
        }
        m
    }

    /// Matrix whose columns are the given vectors.
    pub fn from_columns(columns: &[Vec<C64>]) -> Self {
        let cols = columns.len();
        let rows = columns.first().map_or(0, Vec::len);
        Self::from_fn(rows, cols, |i, j| columns[j][i])
    }

    /// The rank-one operator `|v><v|`.
    pub fn outer(v: &[C64]) -> Self {
        Self::ket_bra(v, v)
    }

    /// The operator `|u><v|`.
    pub fn ket_bra(u: &[C64], v: &[C64]) -> Self {
        Self::from_fn(u.len(), v.len(), |i, j| u[i] * v[j].conj())
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn as_slice(&self) -> &[C64] {
        &self.data
    }

    pub fn column(&self, j: usize) -> Vec<C64> {
        (0..self.rows).map(|i| self[(i, j)]).collect()
    }

    pub fn diagonal(&self) -> Vec<C64> {
        (0..self.rows.min(self.cols)).map(|i| self[(i, i)]).collect()
    }

    pub fn trace(&self) -> C64 {
        self.diagonal().into_iter().sum()
    }

    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)].conj())
    }

    pub fn scale(&self, s: C64) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|&z| z * s).collect(),
        }
    }

    pub fn scale_real(&self, s: f64) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|&z| z * s).collect(),
        }
    }

    /// Checked product; the `Mul` impl panics on mismatched shapes instead.
    pub fn matmul(&self, rhs: &Self) -> Result<Self> {
        if self.cols != rhs.rows {
            return Err(Error::ShapeMismatch {
                left: self.shape(),
                right: rhs.shape(),
            });
        }
        Ok(self.mul_unchecked(rhs))
    }

    fn mul_unchecked(&self, rhs: &Self) -> Self {
        let mut out = Self::zeros(self.rows, rhs.cols);
        for i in 0..self.rows {
            let row = &self.data[i * self.cols..(i + 1) * self.cols];
            let dst = &mut out.data[i * rhs.cols..(i + 1) * rhs.cols];
            for (k, &a) in row.iter().enumerate() {
                if a == ZERO {
                    continue;
                }
                let src = &rhs.data[k * rhs.cols..(k + 1) * rhs.cols];
                for (d, &b) in dst.iter_mut().zip(src) {
                    *d += a * b;
                }
            }
        }
        out
    }

    pub fn mul_vec(&self, v: &[C64]) -> Vec<C64> {
        assert_eq!(self.cols, v.len(), "matrix-vector shape mismatch");
        (0..self.rows)
            .map(|i| {
                self.data[i * self.cols..(i + 1) * self.cols]
                    .iter()
                    .zip(v)
                    .map(|(&a, &b)| a * b)
                    .sum()
            })
            .collect()
    }

    /// `A X A^dag`.
    pub fn conjugate_by(&self, a: &Self) -> Self {
        &(a * self) * &a.adjoint()
    }

    /// Kronecker product with row index `i * rhs.rows + k`.
    pub fn kron(&self, rhs: &Self) -> Self {
        let rows = self.rows * rhs.rows;
        let cols = self.cols * rhs.cols;
        let mut out = Self::zeros(rows, cols);
        for i in 0..self.rows {
            for j in 0..self.cols {
                let a = self[(i, j)];
                if a == ZERO {
                    continue;
                }
                for k in 0..rhs.rows {
                    for l in 0..rhs.cols {
                        out[(i * rhs.rows + k, j * rhs.cols + l)] = a * rhs[(k, l)];
                    }
                }
            }
        }
        out
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Largest entrywise modulus of `self - other`.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        assert_eq!(self.shape(), other.shape(), "shape mismatch");
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    /// Largest entry of `|M - M^dag|`; infinite for non-square input.
    pub fn hermitian_deviation(&self) -> f64 {
        if !self.is_square() {
            return f64::INFINITY;
        }
        let mut dev: f64 = 0.0;
        for i in 0..self.rows {
            for j in i..self.cols {
                dev = dev.max((self[(i, j)] - self[(j, i)].conj()).norm());
            }
        }
        dev
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.hermitian_deviation() <= tol
    }

    /// Largest entry of `|U^dag U - I|`; infinite for non-square input.
    pub fn unitary_deviation(&self) -> f64 {
        if !self.is_square() {
            return f64::INFINITY;
        }
        self.isometry_deviation()
    }

    /// Largest entry of `|V^dag V - I|` for a tall or square `V`.
    pub fn isometry_deviation(&self) -> f64 {
        (&self.adjoint() * self).max_abs_diff(&Self::identity(self.cols))
    }

    pub fn is_unitary(&self, tol: f64) -> bool {
        self.unitary_deviation() <= tol
    }

    /// `(M + M^dag) / 2`.
    pub fn hermitian_part(&self) -> Self {
        let adj = self.adjoint();
        Self::from_fn(self.rows, self.cols, |i, j| (self[(i, j)] + adj[(i, j)]) * 0.5)
    }

    /// Sum of entry moduli of `self - other`.
    pub fn l1_distance(&self, other: &Self) -> Result<f64> {
        if self.shape() != other.shape() {
            return Err(Error::ShapeMismatch {
                left: self.shape(),
                right: other.shape(),
            });
        }
        Ok(self
            .data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).norm())
            .sum())
    }
}

impl Index<(usize, usize)> for ComplexMatrix {
    type Output = C64;

    fn index(&self, (i, j): (usize, usize)) -> &C64 {
        debug_assert!(i < self.rows && j < self.cols);
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for ComplexMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut C64 {
        debug_assert!(i < self.rows && j < self.cols);
        &mut self.data[i * self.cols + j]
    }
}

impl Mul for &ComplexMatrix {
    type Output = ComplexMatrix;

    fn mul(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!(self.cols, rhs.rows, "matrix product shape mismatch");
        self.mul_unchecked(rhs)
    }
}

impl Add for &ComplexMatrix {
    type Output = ComplexMatrix;

    fn add(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!(self.shape(), rhs.shape(), "matrix sum shape mismatch");
        ComplexMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a + b).collect(),
        }
    }
}

impl Sub for &ComplexMatrix {
    type Output = ComplexMatrix;

    fn sub(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!(self.shape(), rhs.shape(), "matrix difference shape mismatch");
        ComplexMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a - b).collect(),
        }
    }
}

/// Vector helpers on plain amplitude slices.
pub fn inner(u: &[C64], v: &[C64]) -> C64 {
    u.iter().zip(v).map(|(a, b)| a.conj() * b).sum()
}

pub fn norm_sqr(v: &[C64]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum()
}

/// Eigenvalues (descending) and orthonormal eigenvectors (columns) of a
/// Hermitian matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralDecomposition {
    pub eigenvalues: Vec<f64>,
    pub eigenvectors: ComplexMatrix,
}

impl SpectralDecomposition {
    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn eigenvector(&self, k: usize) -> Vec<C64> {
        self.eigenvectors.column(k)
    }

    /// `V f(Lambda) V^dag`.
    pub fn map(&self, f: impl Fn(f64) -> C64) -> ComplexMatrix {
        let n = self.dim();
        let v = &self.eigenvectors;
        let fl: Vec<C64> = self.eigenvalues.iter().map(|&l| f(l)).collect();
        ComplexMatrix::from_fn(n, n, |i, j| {
            (0..n).map(|k| v[(i, k)] * fl[k] * v[(j, k)].conj()).sum()
        })
    }

    pub fn reconstruct(&self) -> ComplexMatrix {
        self.map(|l| C64::new(l, 0.0))
    }
}

const MAX_SWEEPS: usize = 100;

/// Hermitian eigendecomposition by cyclic complex Jacobi rotations.
///
/// Eigenvalues are returned in descending order. Each eigenvector is phased so
/// its first non-negligible component is real and positive; equal eigenvalues
/// are ordered by lexicographic comparison of their eigenvectors.
pub fn eig_hermitian(m: &ComplexMatrix) -> Result<SpectralDecomposition> {
    if !m.is_square() {
        return Err(Error::NotSquare {
            rows: m.rows(),
            cols: m.cols(),
        });
    }
    let deviation = m.hermitian_deviation();
    if deviation > HERMITIAN_TOL {
        return Err(Error::NotHermitian { deviation });
    }
    Ok(jacobi_eigen(&m.hermitian_part()))
}

fn jacobi_eigen(m: &ComplexMatrix) -> SpectralDecomposition {
    let n = m.rows();
    let mut a = m.clone();
    let mut v = ComplexMatrix::identity(n);
    for i in 0..n {
        a[(i, i)] = C64::new(a[(i, i)].re, 0.0);
    }

    let scale = a.max_abs().max(f64::MIN_POSITIVE);
    for _ in 0..MAX_SWEEPS {
        let off: f64 = (0..n)
            .flat_map(|p| (p + 1..n).map(move |q| (p, q)))
            .map(|(p, q)| a[(p, q)].norm_sqr())
            .sum();
        if off.sqrt() <= 1e-15 * scale {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                rotate(&mut a, &mut v, p, q);
            }
        }
    }

    let mut pairs: Vec<(f64, Vec<C64>)> = (0..n)
        .map(|k| {
            let mut col = v.column(k);
            fix_phase(&mut col);
            (a[(k, k)].re, col)
        })
        .collect();
    pairs.sort_by(|x, y| {
        if (x.0 - y.0).abs() > 1e-12 * scale {
            y.0.partial_cmp(&x.0).unwrap_or(Ordering::Equal)
        } else {
            lexicographic(&y.1, &x.1)
        }
    });
    let eigenvalues = pairs.iter().map(|p| p.0).collect();
    let cols: Vec<Vec<C64>> = pairs.into_iter().map(|p| p.1).collect();
    SpectralDecomposition {
        eigenvalues,
        eigenvectors: ComplexMatrix::from_columns(&cols),
    }
}

// Annihilates a[p][q] with the unitary G acting on columns p and q:
// G_pp = c, G_pq = s, G_qp = -s e^{-i phi}, G_qq = c e^{-i phi}.
fn rotate(a: &mut ComplexMatrix, v: &mut ComplexMatrix, p: usize, q: usize) {
    let apq = a[(p, q)];
    let mag = apq.norm();
    if mag < 1e-300 {
        return;
    }
    let n = a.rows();
    let phase = apq / mag;
    let theta = (a[(q, q)].re - a[(p, p)].re) / (2.0 * mag);
    let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
    let t = if theta == 0.0 { 1.0 } else { t };
    let c = 1.0 / (t * t + 1.0).sqrt();
    let s = t * c;
    let e = phase.conj();

    for k in 0..n {
        let akp = a[(k, p)];
        let akq = a[(k, q)];
        a[(k, p)] = akp * c - akq * e * s;
        a[(k, q)] = akp * s + akq * e * c;
        let vkp = v[(k, p)];
        let vkq = v[(k, q)];
        v[(k, p)] = vkp * c - vkq * e * s;
        v[(k, q)] = vkp * s + vkq * e * c;
    }
    let ec = e.conj();
    for k in 0..n {
        let apk = a[(p, k)];
        let aqk = a[(q, k)];
        a[(p, k)] = apk * c - aqk * ec * s;
        a[(q, k)] = apk * s + aqk * ec * c;
    }
    a[(p, q)] = ZERO;
    a[(q, p)] = ZERO;
    a[(p, p)] = C64::new(a[(p, p)].re, 0.0);
    a[(q, q)] = C64::new(a[(q, q)].re, 0.0);
}

fn fix_phase(v: &mut [C64]) {
    if let Some(z) = v.iter().copied().find(|z| z.norm() > 1e-10) {
        let ph = z.conj() / z.norm();
        for x in v.iter_mut() {
            *x *= ph;
        }
    }
}

fn lexicographic(u: &[C64], v: &[C64]) -> Ordering {
    for (a, b) in u.iter().zip(v) {
        for (x, y) in [(a.re, b.re), (a.im, b.im)] {
            if (x - y).abs() > 1e-12 {
                return x.partial_cmp(&y).unwrap_or(Ordering::Equal);
            }
        }
    }
    Ordering::Equal
}

/// `exp(iH)` for Hermitian `H`, through its spectral decomposition.
pub fn expi_hermitian(h: &ComplexMatrix) -> Result<ComplexMatrix> {
    let eig = eig_hermitian(h)?;
    Ok(eig.map(|l| C64::from_polar(1.0, l)))
}

/// Principal square root of a positive semidefinite matrix; negative
/// eigenvalues from round-off are clamped to zero.
pub fn sqrt_psd(m: &ComplexMatrix) -> Result<ComplexMatrix> {
    let eig = eig_hermitian(m)?;
    Ok(eig.map(|l| C64::new(l.max(0.0).sqrt(), 0.0)))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pauli_x() -> ComplexMatrix {
        ComplexMatrix::from_real(2, 2, &[0.0, 1.0, 1.0, 0.0]).unwrap()
    }

    #[test]
    fn identity_spectrum() {
        let eig = eig_hermitian(&ComplexMatrix::identity(3)).unwrap();
        assert_eq!(eig.eigenvalues, vec![1.0, 1.0, 1.0]);
        assert!(eig.eigenvectors.max_abs_diff(&ComplexMatrix::identity(3)) < 1e-15);
    }

    #[test]
    fn diagonal_input_keeps_basis_vectors() {
        let m = ComplexMatrix::from_real_diagonal(&[0.25, 0.75]);
        let eig = eig_hermitian(&m).unwrap();
        assert_eq!(eig.eigenvalues, vec![0.75, 0.25]);
        assert!((eig.eigenvector(0)[1] - ONE).norm() < 1e-15);
        assert!((eig.eigenvector(1)[0] - ONE).norm() < 1e-15);
    }

    #[test]
    fn pauli_x_plus_minus() {
        let eig = eig_hermitian(&pauli_x()).unwrap();
        assert!((eig.eigenvalues[0] - 1.0).abs() < 1e-14);
        assert!((eig.eigenvalues[1] + 1.0).abs() < 1e-14);
        let r = std::f64::consts::FRAC_1_SQRT_2;
        let plus = eig.eigenvector(0);
        let minus = eig.eigenvector(1);
        assert!((plus[0].re - r).abs() < 1e-14 && (plus[1].re - r).abs() < 1e-14);
        assert!((minus[0].re - r).abs() < 1e-14 && (minus[1].re + r).abs() < 1e-14);
    }

    #[test]
    fn complex_entries_reconstruct() {
        let m = ComplexMatrix::from_vec(
            3,
            3,
            vec![
                C64::new(2.0, 0.0),
                C64::new(0.5, -1.0),
                C64::new(0.0, 0.3),
                C64::new(0.5, 1.0),
                C64::new(-1.0, 0.0),
                C64::new(0.2, 0.2),
                C64::new(0.0, -0.3),
                C64::new(0.2, -0.2),
                C64::new(0.5, 0.0),
            ],
        )
        .unwrap();
        let eig = eig_hermitian(&m).unwrap();
        assert!(eig.reconstruct().max_abs_diff(&m) < 1e-12);
        assert!(eig.eigenvectors.unitary_deviation() < 1e-12);
        assert!(eig.eigenvalues.windows(2).all(|w| w[0] >= w[1]));
    }

    #[test]
    fn rejects_non_hermitian() {
        let m = ComplexMatrix::from_real(2, 2, &[0.0, 1.0, 0.0, 0.0]).unwrap();
        assert!(matches!(eig_hermitian(&m), Err(Error::NotHermitian { .. })));
    }

    #[test]
    fn rejects_non_finite() {
        let err = ComplexMatrix::from_real(1, 2, &[0.0, f64::NAN]).unwrap_err();
        assert_eq!(err, Error::NonFinite { row: 0, col: 1 });
    }

    #[test]
    fn kron_index_convention() {
        let a = ComplexMatrix::from_real(2, 1, &[1.0, 2.0]).unwrap();
        let b = ComplexMatrix::from_real(2, 1, &[3.0, 5.0]).unwrap();
        let k = a.kron(&b);
        let got: Vec<f64> = k.as_slice().iter().map(|z| z.re).collect();
        assert_eq!(got, vec![3.0, 5.0, 6.0, 10.0]);
    }

    #[test]
    fn expi_of_pauli_x_is_rotation() {
        let u = expi_hermitian(&pauli_x().scale_real(std::f64::consts::FRAC_PI_2)).unwrap();
        // exp(i pi/2 X) = i X
        assert!(u.max_abs_diff(&pauli_x().scale(C64::new(0.0, 1.0))) < 1e-14);
    }

    #[test]
    fn l1_distance_shapes() {
        let i2 = ComplexMatrix::identity(2);
        assert_eq!(i2.l1_distance(&ComplexMatrix::zeros(2, 2)).unwrap(), 2.0);
        assert_eq!(i2.l1_distance(&i2).unwrap(), 0.0);
        assert!(i2.l1_distance(&ComplexMatrix::zeros(3, 3)).is_err());
    }
}
