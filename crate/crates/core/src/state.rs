//! Density matrices, bipartite states, pure states and the information
//! quantities defined on them. Entropies are in bits.

use crate::error::{Error, Result};
use crate::linalg::{eig_hermitian, norm_sqr, sqrt_psd, ComplexMatrix, SpectralDecomposition, C64, ZERO};

/// Tolerance for the Hermitian, PSD and unit-trace checks on density matrices.
pub const STATE_TOL: f64 = 1e-9;

/// Eigenvalues below this floor contribute nothing to entropies.
pub const EIGEN_FLOOR: f64 = 1e-12;

/// Largest joint dimension accepted by `tensor_product`.
pub const MAX_DIM: usize = 64;

#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    matrix: ComplexMatrix,
}

impl DensityMatrix {
    /// Validates Hermiticity, positivity and unit trace, each within `STATE_TOL`.
    pub fn new(matrix: ComplexMatrix) -> Result<Self> {
        if !matrix.is_square() {
            return Err(Error::NotSquare {
                rows: matrix.rows(),
                cols: matrix.cols(),
            });
        }
        let deviation = matrix.hermitian_deviation();
        if deviation > STATE_TOL {
            return Err(Error::NotHermitian { deviation });
        }
        let deviation = (matrix.trace() - C64::new(1.0, 0.0)).norm();
        if deviation > STATE_TOL {
            return Err(Error::TraceNotOne { deviation });
        }
        let eig = eig_hermitian(&matrix)?;
        let min_eigenvalue = eig.eigenvalues.last().copied().unwrap_or(0.0);
        if min_eigenvalue < -STATE_TOL {
            return Err(Error::NotPositive { min_eigenvalue });
        }
        Ok(Self { matrix })
    }

    /// Wraps a matrix already known to be a state (e.g. produced by a
    /// trace-preserving map of a validated state).
    pub(crate) fn new_unchecked(matrix: ComplexMatrix) -> Self {
        debug_assert!(matrix.is_square());
        Self { matrix }
    }

    pub fn from_diagonal(p: &[f64]) -> Result<Self> {
        check_simplex(p)?;
        Ok(Self::new_unchecked(ComplexMatrix::from_real_diagonal(p)))
    }

    pub fn maximally_mixed(d: usize) -> Self {
        Self::new_unchecked(ComplexMatrix::identity(d).scale_real(1.0 / d as f64))
    }

    pub fn dim(&self) -> usize {
        self.matrix.rows()
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> ComplexMatrix {
        self.matrix
    }

    pub fn spectrum(&self) -> SpectralDecomposition {
        eig_hermitian(&self.matrix).expect("density matrix is Hermitian")
    }

    /// Eigenvalues in descending order, with values in `[-STATE_TOL, 0)` clamped to zero.
    pub fn eigenvalues(&self) -> Vec<f64> {
        self.spectrum().eigenvalues.into_iter().map(|l| l.max(0.0)).collect()
    }

    pub fn rank(&self) -> usize {
        self.eigenvalues().iter().filter(|&&l| l > EIGEN_FLOOR).count()
    }

    /// `U rho U^dag`.
    pub fn conjugate(&self, u: &ComplexMatrix) -> Self {
        Self::new_unchecked(self.matrix.conjugate_by(u))
    }

    /// Convex combination `sum_k w_k rho_k`.
    pub fn mixture(weights: &[f64], states: &[DensityMatrix]) -> Result<Self> {
        check_simplex(weights)?;
        if weights.len() != states.len() || states.is_empty() {
            return Err(Error::InvalidArgument(
                "mixture needs one weight per component".into(),
            ));
        }
        let d = states[0].dim();
        let mut acc = ComplexMatrix::zeros(d, d);
        for (w, s) in weights.iter().zip(states) {
            if s.dim() != d {
                return Err(Error::DimensionMismatch {
                    expected: d,
                    actual: s.dim(),
                });
            }
            acc = &acc + &s.matrix.scale_real(*w);
        }
        Ok(Self::new_unchecked(acc))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Subsystem {
    A,
    B,
}

/// A state on `C^{d_A} (x) C^{d_B}` with flat index `j_A * d_B + j_B`.
#[derive(Debug, Clone, PartialEq)]
pub struct BipartiteState {
    d_a: usize,
    d_b: usize,
    state: DensityMatrix,
}

impl BipartiteState {
    pub fn new(d_a: usize, d_b: usize, state: DensityMatrix) -> Result<Self> {
        if d_a == 0 || d_b == 0 {
            return Err(Error::InvalidArgument("subsystem dimensions must be positive".into()));
        }
        if state.dim() != d_a * d_b {
            return Err(Error::DimensionMismatch {
                expected: d_a * d_b,
                actual: state.dim(),
            });
        }
        Ok(Self { d_a, d_b, state })
    }

    pub fn from_matrix(d_a: usize, d_b: usize, matrix: ComplexMatrix) -> Result<Self> {
        Self::new(d_a, d_b, DensityMatrix::new(matrix)?)
    }

    pub(crate) fn new_unchecked(d_a: usize, d_b: usize, matrix: ComplexMatrix) -> Self {
        debug_assert_eq!(matrix.rows(), d_a * d_b);
        Self {
            d_a,
            d_b,
            state: DensityMatrix::new_unchecked(matrix),
        }
    }

    /// A single-party state viewed as a bipartite state with a trivial B.
    pub fn single_party(rho: DensityMatrix) -> Self {
        let d = rho.dim();
        Self {
            d_a: d,
            d_b: 1,
            state: rho,
        }
    }

    pub fn d_a(&self) -> usize {
        self.d_a
    }

    pub fn d_b(&self) -> usize {
        self.d_b
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.d_a, self.d_b)
    }

    pub fn state(&self) -> &DensityMatrix {
        &self.state
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        self.state.matrix()
    }

    /// The `(j_A, k_A)` block of size `d_B x d_B`.
    pub fn block(&self, j: usize, k: usize) -> ComplexMatrix {
        let m = self.matrix();
        let db = self.d_b;
        ComplexMatrix::from_fn(db, db, |x, y| m[(j * db + x, k * db + y)])
    }

    pub fn partial_trace(&self, keep: Subsystem) -> DensityMatrix {
        DensityMatrix::new_unchecked(partial_trace_matrix(self.matrix(), self.d_a, self.d_b, keep))
    }

    /// Zeroes every block with `j_A != k_A`.
    pub fn dephase_a(&self) -> BipartiteState {
        let mut m = self.matrix().clone();
        let db = self.d_b;
        for r in 0..m.rows() {
            for c in 0..m.cols() {
                if r / db != c / db {
                    m[(r, c)] = ZERO;
                }
            }
        }
        Self::new_unchecked(self.d_a, self.d_b, m)
    }

    /// `(U_A (x) U_B) rho (U_A (x) U_B)^dag`; `None` means identity on that side.
    pub fn local_unitary(&self, u_a: Option<&ComplexMatrix>, u_b: Option<&ComplexMatrix>) -> BipartiteState {
        let ua = u_a.cloned().unwrap_or_else(|| ComplexMatrix::identity(self.d_a));
        let ub = u_b.cloned().unwrap_or_else(|| ComplexMatrix::identity(self.d_b));
        let u = ua.kron(&ub);
        Self::new_unchecked(self.d_a, self.d_b, self.matrix().conjugate_by(&u))
    }

    pub fn mixture(weights: &[f64], states: &[BipartiteState]) -> Result<Self> {
        let first = states
            .first()
            .ok_or_else(|| Error::InvalidArgument("empty mixture".into()))?;
        let (d_a, d_b) = first.dims();
        if let Some(s) = states.iter().find(|s| s.dims() != (d_a, d_b)) {
            return Err(Error::DimensionMismatch {
                expected: d_a * d_b,
                actual: s.d_a * s.d_b,
            });
        }
        let parts: Vec<DensityMatrix> = states.iter().map(|s| s.state.clone()).collect();
        Self::new(d_a, d_b, DensityMatrix::mixture(weights, &parts)?)
    }
}

/// Partial trace of a `(d_a d_b)`-square matrix.
pub fn partial_trace_matrix(m: &ComplexMatrix, d_a: usize, d_b: usize, keep: Subsystem) -> ComplexMatrix {
    match keep {
        Subsystem::A => ComplexMatrix::from_fn(d_a, d_a, |i, j| {
            (0..d_b).map(|k| m[(i * d_b + k, j * d_b + k)]).sum()
        }),
        Subsystem::B => ComplexMatrix::from_fn(d_b, d_b, |i, j| {
            (0..d_a).map(|k| m[(k * d_b + i, k * d_b + j)]).sum()
        }),
    }
}

/// Kronecker product of two states as a bipartite state.
pub fn tensor_product(a: &DensityMatrix, b: &DensityMatrix) -> Result<BipartiteState> {
    let dim = a.dim() * b.dim();
    if dim > MAX_DIM {
        return Err(Error::DimensionTooLarge { dim, max: MAX_DIM });
    }
    Ok(BipartiteState::new_unchecked(
        a.dim(),
        b.dim(),
        a.matrix().kron(b.matrix()),
    ))
}

#[derive(Debug, Clone, PartialEq)]
pub struct PureStateVector {
    amplitudes: Vec<C64>,
}

impl PureStateVector {
    pub fn new(amplitudes: Vec<C64>) -> Result<Self> {
        if amplitudes.is_empty() {
            return Err(Error::InvalidArgument("empty state vector".into()));
        }
        let deviation = (norm_sqr(&amplitudes) - 1.0).abs();
        if deviation > STATE_TOL {
            return Err(Error::NotNormalized { deviation });
        }
        Ok(Self { amplitudes })
    }

    /// Rescales a nonzero vector to unit norm.
    pub fn normalized(mut amplitudes: Vec<C64>) -> Result<Self> {
        let n = norm_sqr(&amplitudes).sqrt();
        if !(n > 0.0 && n.is_finite()) {
            return Err(Error::NotNormalized { deviation: 1.0 });
        }
        for z in amplitudes.iter_mut() {
            *z /= n;
        }
        Ok(Self { amplitudes })
    }

    pub fn basis(dim: usize, k: usize) -> Self {
        let mut v = vec![ZERO; dim];
        v[k] = C64::new(1.0, 0.0);
        Self { amplitudes: v }
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amplitudes
    }

    pub fn norm(&self) -> f64 {
        norm_sqr(&self.amplitudes).sqrt()
    }

    pub fn to_density(&self) -> DensityMatrix {
        DensityMatrix::new_unchecked(ComplexMatrix::outer(&self.amplitudes))
    }

    pub fn to_bipartite(&self, d_a: usize, d_b: usize) -> Result<BipartiteState> {
        if d_a * d_b != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: d_a * d_b,
                actual: self.dim(),
            });
        }
        Ok(BipartiteState::new_unchecked(d_a, d_b, ComplexMatrix::outer(&self.amplitudes)))
    }

    /// Reduced state on `A` of this vector viewed on `C^{d_a} (x) C^{d_b}`.
    pub fn reduced_a(&self, d_a: usize, d_b: usize) -> DensityMatrix {
        assert_eq!(d_a * d_b, self.dim(), "dimension mismatch");
        let v = &self.amplitudes;
        DensityMatrix::new_unchecked(ComplexMatrix::from_fn(d_a, d_a, |i, j| {
            (0..d_b).map(|k| v[i * d_b + k] * v[j * d_b + k].conj()).sum()
        }))
    }

    pub fn tensor(&self, other: &PureStateVector) -> PureStateVector {
        let mut v = Vec::with_capacity(self.dim() * other.dim());
        for a in &self.amplitudes {
            for b in &other.amplitudes {
                v.push(a * b);
            }
        }
        PureStateVector { amplitudes: v }
    }
}

/// Von Neumann entropy in bits.
pub fn von_neumann_entropy(rho: &DensityMatrix) -> f64 {
    spectrum_entropy(&rho.spectrum().eigenvalues)
}

/// Entropy of an eigenvalue list, ignoring values below `EIGEN_FLOOR`.
pub fn spectrum_entropy(eigenvalues: &[f64]) -> f64 {
    eigenvalues
        .iter()
        .filter(|&&l| l > EIGEN_FLOOR)
        .map(|&l| -l * l.log2())
        .sum::<f64>()
        .max(0.0)
}

/// Entropy of a Hermitian PSD matrix given without validation.
pub(crate) fn matrix_entropy(m: &ComplexMatrix) -> f64 {
    spectrum_entropy(&eig_hermitian(m).expect("Hermitian input").eigenvalues)
}

/// Validates that `p` lies on the probability simplex (tolerance `STATE_TOL`).
pub fn check_simplex(p: &[f64]) -> Result<()> {
    if p.is_empty() {
        return Err(Error::InvalidProbabilities("empty vector".into()));
    }
    if let Some(x) = p.iter().find(|x| !x.is_finite() || **x < -STATE_TOL) {
        return Err(Error::InvalidProbabilities(format!("entry {x} is negative or non-finite")));
    }
    let total: f64 = p.iter().sum();
    if (total - 1.0).abs() > STATE_TOL {
        return Err(Error::InvalidProbabilities(format!("entries sum to {total}")));
    }
    Ok(())
}

/// Shannon entropy in bits with `0 log 0 = 0`.
pub fn shannon_entropy(p: &[f64]) -> Result<f64> {
    check_simplex(p)?;
    Ok(shannon_unchecked(p))
}

pub(crate) fn shannon_unchecked(p: &[f64]) -> f64 {
    p.iter()
        .filter(|&&x| x > 0.0)
        .map(|&x| -x * x.log2())
        .sum::<f64>()
        .max(0.0)
}

/// Binary entropy `h(x)` in bits.
pub fn binary_entropy(x: f64) -> f64 {
    shannon_unchecked(&[x, 1.0 - x])
}

/// Squared-overlap fidelity `(tr sqrt(sqrt(rho) sigma sqrt(rho)))^2`.
pub fn fidelity(rho: &DensityMatrix, sigma: &DensityMatrix) -> Result<f64> {
    if rho.dim() != sigma.dim() {
        return Err(Error::DimensionMismatch {
            expected: rho.dim(),
            actual: sigma.dim(),
        });
    }
    Ok(fidelity_matrices(rho.matrix(), sigma.matrix()))
}

pub(crate) fn fidelity_matrices(rho: &ComplexMatrix, sigma: &ComplexMatrix) -> f64 {
    let root = sqrt_psd(rho).expect("Hermitian input");
    let inner = (&(&root * sigma) * &root).hermitian_part();
    let tr = root_trace(&eig_hermitian(&inner).expect("Hermitian input").eigenvalues);
    (tr * tr).clamp(0.0, 1.0)
}

/// `sum_k sqrt(l_k)` over a PSD spectrum; eigenvalues at roundoff level
/// are dropped since their roots would count as ~1e-8 each.
pub(crate) fn root_trace(eigenvalues: &[f64]) -> f64 {
    let top = eigenvalues.iter().cloned().fold(0.0f64, f64::max);
    let floor = 1e-15 * top.max(1e-300);
    eigenvalues.iter().filter(|&&l| l > floor).map(|l| l.sqrt()).sum()
}

/// Entrywise l1 distance `sum_ij |a_ij - b_ij|`.
pub fn l1_entrywise_distance(a: &ComplexMatrix, b: &ComplexMatrix) -> Result<f64> {
    a.l1_distance(b)
}

/// Minimal purification `sum_k sqrt(lambda_k) |v_k>|k>` with environment
/// dimension equal to the rank. System index is the slow one.
pub fn purify(rho: &DensityMatrix) -> PureStateVector {
    let eig = rho.spectrum();
    let kept: Vec<usize> = (0..eig.dim())
        .filter(|&k| eig.eigenvalues[k] > EIGEN_FLOOR)
        .collect();
    let r = kept.len().max(1);
    let d = rho.dim();
    let mut amps = vec![ZERO; d * r];
    for (e, &k) in kept.iter().enumerate() {
        let w = eig.eigenvalues[k].sqrt();
        for i in 0..d {
            amps[i * r + e] = eig.eigenvectors[(i, k)] * w;
        }
    }
    PureStateVector::normalized(amps).expect("nonzero purification")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ket(v: &[f64]) -> PureStateVector {
        PureStateVector::normalized(v.iter().map(|&x| C64::new(x, 0.0)).collect()).unwrap()
    }

    fn bell() -> BipartiteState {
        ket(&[1.0, 0.0, 0.0, 1.0]).to_bipartite(2, 2).unwrap()
    }

    #[test]
    fn tensor_of_maximally_mixed() {
        let h = DensityMatrix::maximally_mixed(2);
        let t = tensor_product(&h, &h).unwrap();
        assert!(t.matrix().max_abs_diff(DensityMatrix::maximally_mixed(4).matrix()) < 1e-15);
    }

    #[test]
    fn tensor_of_basis_states() {
        let t = tensor_product(&ket(&[1.0, 0.0]).to_density(), &ket(&[0.0, 1.0]).to_density()).unwrap();
        assert!(t.matrix().max_abs_diff(ket(&[0.0, 1.0, 0.0, 0.0]).to_density().matrix()) < 1e-15);
    }

    #[test]
    fn tensor_of_plus_and_mixed_has_quarter_cross_blocks() {
        let t = tensor_product(&ket(&[1.0, 1.0]).to_density(), &DensityMatrix::maximally_mixed(2)).unwrap();
        let quarter = ComplexMatrix::identity(2).scale_real(0.25);
        assert!(t.block(0, 1).max_abs_diff(&quarter) < 1e-15);
        assert!(t.block(1, 0).max_abs_diff(&quarter) < 1e-15);
    }

    #[test]
    fn tensor_dimension_limit() {
        let a = DensityMatrix::maximally_mixed(8);
        let b = DensityMatrix::maximally_mixed(9);
        assert_eq!(
            tensor_product(&a, &b).unwrap_err(),
            Error::DimensionTooLarge { dim: 72, max: 64 }
        );
    }

    #[test]
    fn partial_traces() {
        let a = DensityMatrix::from_diagonal(&[0.3, 0.7]).unwrap();
        let b = ket(&[1.0, 2.0]).to_density();
        let t = tensor_product(&a, &b).unwrap();
        assert!(t.partial_trace(Subsystem::A).matrix().max_abs_diff(a.matrix()) < 1e-15);
        assert!(t.partial_trace(Subsystem::B).matrix().max_abs_diff(b.matrix()) < 1e-15);
        assert!(bell()
            .partial_trace(Subsystem::A)
            .matrix()
            .max_abs_diff(DensityMatrix::maximally_mixed(2).matrix())
            < 1e-15);
        let s01 = ket(&[0.0, 1.0, 0.0, 0.0]).to_bipartite(2, 2).unwrap();
        assert!(s01.partial_trace(Subsystem::B).matrix().max_abs_diff(ket(&[0.0, 1.0]).to_density().matrix()) < 1e-15);
    }

    #[test]
    fn entropies() {
        assert!(von_neumann_entropy(&ket(&[1.0, 1.0]).to_density()).abs() < 1e-12);
        assert!((von_neumann_entropy(&DensityMatrix::maximally_mixed(2)) - 1.0).abs() < 1e-15);
        let d = DensityMatrix::from_diagonal(&[0.25, 0.75]).unwrap();
        assert!((von_neumann_entropy(&d) - 0.811278).abs() < 1e-6);
        assert_eq!(shannon_entropy(&[1.0, 0.0]).unwrap(), 0.0);
        assert_eq!(shannon_entropy(&[0.5, 0.5]).unwrap(), 1.0);
        assert!((shannon_entropy(&[0.05, 0.95]).unwrap() - 0.286397).abs() < 1e-6);
        assert!(shannon_entropy(&[0.5, 0.6]).is_err());
        assert!(shannon_entropy(&[-0.1, 1.1]).is_err());
    }

    #[test]
    fn dephasing_bell() {
        let d = bell().dephase_a();
        let expected = ComplexMatrix::from_real_diagonal(&[0.5, 0.0, 0.0, 0.5]);
        assert!(d.matrix().max_abs_diff(&expected) < 1e-15);
        assert_eq!(d.dephase_a(), d);
        assert!((l1_entrywise_distance(bell().matrix(), d.matrix()).unwrap() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn fidelity_examples() {
        let r = DensityMatrix::from_diagonal(&[0.3, 0.7]).unwrap();
        assert!((fidelity(&r, &r).unwrap() - 1.0).abs() < 1e-12);
        let z0 = ket(&[1.0, 0.0]).to_density();
        let z1 = ket(&[0.0, 1.0]).to_density();
        assert!(fidelity(&z0, &z1).unwrap().abs() < 1e-12);
        assert!((fidelity(&z0, &DensityMatrix::maximally_mixed(2)).unwrap() - 0.5).abs() < 1e-12);
        assert!(fidelity(&z0, &DensityMatrix::maximally_mixed(3)).is_err());
    }

    #[test]
    fn purification_examples() {
        let pure = ket(&[0.6, 0.8]);
        let p = purify(&pure.to_density());
        assert_eq!(p.dim(), 2);
        assert!(p.to_density().matrix().max_abs_diff(pure.to_density().matrix()) < 1e-12);

        let p = purify(&DensityMatrix::maximally_mixed(2));
        assert_eq!(p.dim(), 4);
        let back = p.to_bipartite(2, 2).unwrap().partial_trace(Subsystem::A);
        assert!(back.matrix().max_abs_diff(DensityMatrix::maximally_mixed(2).matrix()) < 1e-12);

        let p = purify(&DensityMatrix::from_diagonal(&[0.75, 0.25]).unwrap());
        let a = p.amplitudes();
        assert!((a[0].re - 0.75f64.sqrt()).abs() < 1e-12);
        assert!((a[3].re - 0.5).abs() < 1e-12);
        assert!(a[1].norm() < 1e-12 && a[2].norm() < 1e-12);
    }

    #[test]
    fn density_validation_errors() {
        let m = ComplexMatrix::from_real_diagonal(&[0.5, 0.4]);
        match DensityMatrix::new(m).unwrap_err() {
            Error::TraceNotOne { deviation } => assert!((deviation - 0.1).abs() < 1e-12),
            e => panic!("unexpected {e}"),
        }
        let m = ComplexMatrix::from_real_diagonal(&[1.5, -0.5]);
        assert!(matches!(DensityMatrix::new(m), Err(Error::NotPositive { .. })));
        let m = ComplexMatrix::from_real(2, 2, &[0.5, 0.1, 0.0, 0.5]).unwrap();
        assert!(matches!(DensityMatrix::new(m), Err(Error::NotHermitian { .. })));
        assert!(matches!(
            PureStateVector::new(vec![C64::new(1.0, 0.0), C64::new(1.0, 0.0)]),
            Err(Error::NotNormalized { .. })
        ));
    }
}
