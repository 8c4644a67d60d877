//! Constructors for free states and reference states, seeded samplers, and
//! membership tests for the incoherent-quantum hierarchy.

use std::f64::consts::FRAC_1_SQRT_2;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Exp1, StandardNormal};

use crate::error::{Error, Result};
use crate::linalg::{inner, norm_sqr, ComplexMatrix, C64, ZERO};
use crate::state::{check_simplex, BipartiteState, DensityMatrix, PureStateVector, STATE_TOL};

/// Default entrywise tolerance for `is_iq` / `is_ii`.
pub const MEMBERSHIP_TOL: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum FreeStateClass {
    Incoherent,
    II,
    IC,
    IQ,
    CQ,
    Separable,
}

/// Dimension, rank and seed for `random_density`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RandomSpec {
    pub dim: usize,
    pub rank: usize,
    pub seed: u64,
}

impl RandomSpec {
    pub fn full_rank(dim: usize, seed: u64) -> Self {
        Self { dim, rank: dim, seed }
    }
}

/// SplitMix64 step; used to derive independent per-trial seeds from a base seed.
pub fn derive_seed(base: u64, index: u64) -> u64 {
    let mut z = base
        .wrapping_add(index.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// `diag(p)`.
pub fn incoherent_state(p: &[f64]) -> Result<DensityMatrix> {
    DensityMatrix::from_diagonal(p)
}

/// `sum_j e^{i phi_j} |j> / sqrt(d)`.
pub fn maximally_coherent(phases: &[f64]) -> Result<PureStateVector> {
    if phases.is_empty() {
        return Err(Error::InvalidArgument("need at least one phase".into()));
    }
    let amp = 1.0 / (phases.len() as f64).sqrt();
    Ok(PureStateVector::new(phases.iter().map(|&p| C64::from_polar(amp, p)).collect())
        .expect("unit norm by construction"))
}

fn check_table(p: &[Vec<f64>]) -> Result<(usize, usize)> {
    let d_a = p.len();
    let d_b = p.first().map_or(0, Vec::len);
    if d_a == 0 || d_b == 0 || p.iter().any(|row| row.len() != d_b) {
        return Err(Error::InvalidProbabilities("table must be a non-empty rectangle".into()));
    }
    let flat: Vec<f64> = p.iter().flatten().copied().collect();
    check_simplex(&flat)?;
    Ok((d_a, d_b))
}

/// `sum p_{jk} |jk><jk|`.
pub fn ii_state(p: &[Vec<f64>]) -> Result<BipartiteState> {
    let (d_a, d_b) = check_table(p)?;
    let flat: Vec<f64> = p.iter().flatten().copied().collect();
    Ok(BipartiteState::new_unchecked(d_a, d_b, ComplexMatrix::from_real_diagonal(&flat)))
}

/// `(I (x) U_B) sigma_II (I (x) U_B)^dag`.
pub fn ic_state(p: &[Vec<f64>], u_b: &ComplexMatrix) -> Result<BipartiteState> {
    let ii = ii_state(p)?;
    check_unitary(u_b, ii.d_b())?;
    Ok(ii.local_unitary(None, Some(u_b)))
}

/// Block-diagonal `sum_j p_j |j><j| (x) rho_B^j`.
pub fn iq_state(p: &[f64], blocks: &[DensityMatrix]) -> Result<BipartiteState> {
    check_simplex(p)?;
    if p.len() != blocks.len() {
        return Err(Error::InvalidArgument(format!(
            "{} weights but {} blocks",
            p.len(),
            blocks.len()
        )));
    }
    let d_b = blocks[0].dim();
    let d_a = p.len();
    let mut m = ComplexMatrix::zeros(d_a * d_b, d_a * d_b);
    for (j, (w, blk)) in p.iter().zip(blocks).enumerate() {
        if blk.dim() != d_b {
            return Err(Error::DimensionMismatch {
                expected: d_b,
                actual: blk.dim(),
            });
        }
        for x in 0..d_b {
            for y in 0..d_b {
                m[(j * d_b + x, j * d_b + y)] = blk.matrix()[(x, y)] * *w;
            }
        }
    }
    Ok(BipartiteState::new_unchecked(d_a, d_b, m))
}

/// `sum_n p_n |n><n| (x) rho_B^n` for an orthonormal family `{|n>}` on A.
pub fn cq_state(p: &[f64], basis: &[Vec<C64>], blocks: &[DensityMatrix]) -> Result<BipartiteState> {
    check_simplex(p)?;
    if p.len() != basis.len() || p.len() != blocks.len() {
        return Err(Error::InvalidArgument("need one basis vector and block per weight".into()));
    }
    check_orthonormal(basis)?;
    let terms: Vec<(DensityMatrix, DensityMatrix)> = basis
        .iter()
        .zip(blocks)
        .map(|(v, b)| (DensityMatrix::new_unchecked(ComplexMatrix::outer(v)), b.clone()))
        .collect();
    separable_from_terms(p, &terms)
}

/// `sum_n p_n rho_A^n (x) rho_B^n`.
pub fn separable_state(
    weights: &[f64],
    rho_a: &[DensityMatrix],
    rho_b: &[DensityMatrix],
) -> Result<BipartiteState> {
    check_simplex(weights)?;
    if weights.len() != rho_a.len() || weights.len() != rho_b.len() {
        return Err(Error::InvalidArgument("need one A and one B state per weight".into()));
    }
    let terms: Vec<(DensityMatrix, DensityMatrix)> =
        rho_a.iter().cloned().zip(rho_b.iter().cloned()).collect();
    separable_from_terms(weights, &terms)
}

fn separable_from_terms(p: &[f64], terms: &[(DensityMatrix, DensityMatrix)]) -> Result<BipartiteState> {
    let (d_a, d_b) = (terms[0].0.dim(), terms[0].1.dim());
    let mut m = ComplexMatrix::zeros(d_a * d_b, d_a * d_b);
    for (w, (a, b)) in p.iter().zip(terms) {
        if a.dim() != d_a || b.dim() != d_b {
            return Err(Error::InvalidArgument("inconsistent component dimensions".into()));
        }
        m = &m + &a.matrix().kron(b.matrix()).scale_real(*w);
    }
    Ok(BipartiteState::new_unchecked(d_a, d_b, m))
}

/// Bell vectors in the order `Phi+, Phi-, Psi+, Psi-`.
pub fn bell_vector(k: usize) -> Result<PureStateVector> {
    let r = C64::new(FRAC_1_SQRT_2, 0.0);
    let v = match k {
        0 => [r, ZERO, ZERO, r],
        1 => [r, ZERO, ZERO, -r],
        2 => [ZERO, r, r, ZERO],
        3 => [ZERO, r, -r, ZERO],
        _ => return Err(Error::InvalidArgument(format!("Bell index {k} not in 0..4"))),
    };
    PureStateVector::new(v.to_vec())
}

pub fn bell_state(k: usize) -> Result<BipartiteState> {
    bell_vector(k)?.to_bipartite(2, 2)
}

/// `sum_k lambda_k |Bell_k><Bell_k|`.
pub fn bell_diagonal(lambda: &[f64]) -> Result<BipartiteState> {
    if lambda.len() != 4 {
        return Err(Error::InvalidProbabilities("Bell-diagonal weights need 4 entries".into()));
    }
    check_simplex(lambda)?;
    let mut m = ComplexMatrix::zeros(4, 4);
    for (k, &l) in lambda.iter().enumerate() {
        let v = bell_vector(k)?;
        m = &m + &ComplexMatrix::outer(v.amplitudes()).scale_real(l);
    }
    Ok(BipartiteState::new_unchecked(2, 2, m))
}

/// Bell-diagonal state with independent bit error `e_b` and phase error `e_p`.
pub fn bell_diagonal_errors(e_b: f64, e_p: f64) -> Result<BipartiteState> {
    bell_diagonal(&[
        (1.0 - e_b) * (1.0 - e_p),
        (1.0 - e_b) * e_p,
        e_b * (1.0 - e_p),
        e_b * e_p,
    ])
}

/// Werner state `p |Phi+><Phi+| + (1 - p) I / 4`.
pub fn werner(p: f64) -> Result<BipartiteState> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::InvalidArgument(format!("Werner weight {p} outside [0, 1]")));
    }
    let q = (1.0 - p) / 4.0;
    bell_diagonal(&[p + q, q, q, q])
}

/// Seeded random generator for states, unitaries and simplex vectors.
#[derive(Debug, Clone)]
pub struct Sampler {
    rng: ChaCha8Rng,
}

impl Sampler {
    pub fn new(seed: u64) -> Self {
        Self {
            rng: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    pub fn uniform(&mut self) -> f64 {
        self.rng.random::<f64>()
    }

    pub fn index(&mut self, n: usize) -> usize {
        self.rng.random_range(0..n)
    }

    pub fn gaussian(&mut self) -> f64 {
        self.rng.sample(StandardNormal)
    }

    pub fn complex_gaussian(&mut self) -> C64 {
        C64::new(self.gaussian(), self.gaussian()) * FRAC_1_SQRT_2
    }

    pub fn ginibre(&mut self, rows: usize, cols: usize) -> ComplexMatrix {
        ComplexMatrix::from_fn(rows, cols, |_, _| self.complex_gaussian())
    }

    /// Uniform (flat Dirichlet) point on the simplex.
    pub fn simplex(&mut self, n: usize) -> Vec<f64> {
        let e: Vec<f64> = (0..n).map(|_| self.rng.sample::<f64, _>(Exp1) + 1e-300).collect();
        let total: f64 = e.iter().sum();
        e.into_iter().map(|x| x / total).collect()
    }

    /// `G G^dag / tr(G G^dag)` with `G` a `dim x rank` Ginibre matrix.
    pub fn density(&mut self, dim: usize, rank: usize) -> DensityMatrix {
        let g = self.ginibre(dim, rank.clamp(1, dim));
        let m = (&g * &g.adjoint()).hermitian_part();
        let tr = m.trace().re;
        DensityMatrix::new_unchecked(m.scale_real(1.0 / tr))
    }

    pub fn pure(&mut self, dim: usize) -> PureStateVector {
        let v: Vec<C64> = (0..dim).map(|_| self.complex_gaussian()).collect();
        PureStateVector::normalized(v).expect("Gaussian vector is nonzero")
    }

    /// Haar unitary: Gram-Schmidt on a Ginibre matrix, which fixes the phases
    /// of the implicit `R` diagonal to be positive.
    pub fn unitary(&mut self, dim: usize) -> ComplexMatrix {
        let g = self.ginibre(dim, dim);
        let mut cols: Vec<Vec<C64>> = Vec::with_capacity(dim);
        for j in 0..dim {
            let mut v = g.column(j);
            for _ in 0..2 {
                for q in &cols {
                    let c = inner(q, &v);
                    for (x, y) in v.iter_mut().zip(q) {
                        *x -= c * y;
                    }
                }
            }
            let n = norm_sqr(&v).sqrt();
            for x in v.iter_mut() {
                *x /= n;
            }
            cols.push(v);
        }
        ComplexMatrix::from_columns(&cols)
    }

    /// Random IQ state with full-rank Ginibre blocks.
    pub fn iq_state(&mut self, d_a: usize, d_b: usize) -> BipartiteState {
        let p = self.simplex(d_a);
        let blocks: Vec<DensityMatrix> = (0..d_a).map(|_| self.density(d_b, d_b)).collect();
        iq_state(&p, &blocks).expect("valid components")
    }

    pub fn ii_state(&mut self, d_a: usize, d_b: usize) -> BipartiteState {
        let flat = self.simplex(d_a * d_b);
        let table: Vec<Vec<f64>> = flat.chunks(d_b).map(<[f64]>::to_vec).collect();
        ii_state(&table).expect("valid table")
    }

    pub fn ic_state(&mut self, d_a: usize, d_b: usize) -> BipartiteState {
        let ii = self.ii_state(d_a, d_b);
        let u = self.unitary(d_b);
        ii.local_unitary(None, Some(&u))
    }

    /// CQ state in a Haar-random A basis with random B blocks.
    pub fn cq_state(&mut self, d_a: usize, d_b: usize) -> BipartiteState {
        let p = self.simplex(d_a);
        let u = self.unitary(d_a);
        let basis: Vec<Vec<C64>> = (0..d_a).map(|k| u.column(k)).collect();
        let blocks: Vec<DensityMatrix> = (0..d_a).map(|_| self.density(d_b, d_b)).collect();
        cq_state(&p, &basis, &blocks).expect("valid components")
    }

    /// Mixture of `terms` product states with random local components of
    /// the given local ranks.
    pub fn separable_state(
        &mut self,
        d_a: usize,
        d_b: usize,
        terms: usize,
        rank_a: usize,
        rank_b: usize,
    ) -> BipartiteState {
        let w = self.simplex(terms);
        let a: Vec<DensityMatrix> = (0..terms).map(|_| self.density(d_a, rank_a)).collect();
        let b: Vec<DensityMatrix> = (0..terms).map(|_| self.density(d_b, rank_b)).collect();
        separable_state(&w, &a, &b).expect("valid components")
    }

    pub fn bipartite(&mut self, d_a: usize, d_b: usize, rank: usize) -> BipartiteState {
        let rho = self.density(d_a * d_b, rank);
        BipartiteState::new_unchecked(d_a, d_b, rho.into_matrix())
    }

    pub fn pure_bipartite(&mut self, d_a: usize, d_b: usize) -> PureStateVector {
        self.pure(d_a * d_b)
    }
}

pub fn random_density(spec: &RandomSpec) -> Result<DensityMatrix> {
    if spec.rank == 0 || spec.rank > spec.dim {
        return Err(Error::InvalidArgument(format!(
            "rank {} must lie in 1..={}",
            spec.rank, spec.dim
        )));
    }
    Ok(Sampler::new(spec.seed).density(spec.dim, spec.rank))
}

pub fn random_pure(dim: usize, seed: u64) -> PureStateVector {
    Sampler::new(seed).pure(dim)
}

pub fn haar_unitary(dim: usize, seed: u64) -> ComplexMatrix {
    Sampler::new(seed).unitary(dim)
}

/// True iff every block with `j_A != k_A` has all entry moduli `<= tol`.
pub fn is_iq(rho: &BipartiteState, tol: f64) -> bool {
    let m = rho.matrix();
    let db = rho.d_b();
    (0..m.rows()).all(|r| (0..m.cols()).all(|c| r / db == c / db || m[(r, c)].norm() <= tol))
}

/// True iff the full matrix is diagonal within `tol`.
pub fn is_ii(rho: &BipartiteState, tol: f64) -> bool {
    let m = rho.matrix();
    (0..m.rows()).all(|r| (0..m.cols()).all(|c| r == c || m[(r, c)].norm() <= tol))
}

pub(crate) fn check_unitary(u: &ComplexMatrix, dim: usize) -> Result<()> {
    if u.rows() != dim || u.cols() != dim {
        return Err(Error::DimensionMismatch {
            expected: dim,
            actual: u.rows(),
        });
    }
    let deviation = u.unitary_deviation();
    if deviation > STATE_TOL {
        return Err(Error::NotUnitary { deviation });
    }
    Ok(())
}

fn check_orthonormal(basis: &[Vec<C64>]) -> Result<()> {
    let mut deviation: f64 = 0.0;
    for (m, u) in basis.iter().enumerate() {
        for (n, v) in basis.iter().enumerate() {
            if u.len() != v.len() {
                return Err(Error::InvalidArgument("basis vectors differ in length".into()));
            }
            let target = if m == n { 1.0 } else { 0.0 };
            deviation = deviation.max((inner(u, v) - C64::new(target, 0.0)).norm());
        }
    }
    if deviation > STATE_TOL {
        return Err(Error::NotOrthonormal { deviation });
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::state::{von_neumann_entropy, Subsystem};

    fn hadamard() -> ComplexMatrix {
        ComplexMatrix::from_real(2, 2, &[FRAC_1_SQRT_2, FRAC_1_SQRT_2, FRAC_1_SQRT_2, -FRAC_1_SQRT_2])
            .unwrap()
    }

    #[test]
    fn incoherent_and_coherent() {
        assert_eq!(
            incoherent_state(&[0.2, 0.3, 0.5]).unwrap().matrix(),
            &ComplexMatrix::from_real_diagonal(&[0.2, 0.3, 0.5])
        );
        let plus = maximally_coherent(&[0.0, 0.0]).unwrap();
        assert!((plus.amplitudes()[1].re - FRAC_1_SQRT_2).abs() < 1e-15);
        let minus = maximally_coherent(&[0.0, std::f64::consts::PI]).unwrap();
        assert!((minus.amplitudes()[1].re + FRAC_1_SQRT_2).abs() < 1e-15);
        let four = maximally_coherent(&[0.0; 4]).unwrap();
        assert!(four.amplitudes().iter().all(|z| (z.re - 0.5).abs() < 1e-15));
    }

    #[test]
    fn ii_and_ic_examples() {
        let s = ii_state(&[vec![1.0, 0.0], vec![0.0, 0.0]]).unwrap();
        assert_eq!(s.matrix(), &ComplexMatrix::from_real_diagonal(&[1.0, 0.0, 0.0, 0.0]));
        let corr = vec![vec![0.5, 0.0], vec![0.0, 0.5]];
        let ic = ic_state(&corr, &hadamard()).unwrap();
        let plus = maximally_coherent(&[0.0, 0.0]).unwrap().to_density();
        let minus = maximally_coherent(&[0.0, std::f64::consts::PI]).unwrap().to_density();
        let expected = separable_state(
            &[0.5, 0.5],
            &[PureStateVector::basis(2, 0).to_density(), PureStateVector::basis(2, 1).to_density()],
            &[plus, minus],
        )
        .unwrap();
        assert!(ic.matrix().max_abs_diff(expected.matrix()) < 1e-15);
        assert!(is_iq(&ic, MEMBERSHIP_TOL));
        assert!(ic_state(&corr, &ComplexMatrix::from_real_diagonal(&[1.0, 2.0])).is_err());
    }

    #[test]
    fn bell_family() {
        let b = bell_state(0).unwrap();
        assert!((b.matrix()[(0, 3)].re - 0.5).abs() < 1e-15);
        assert_eq!(bell_diagonal(&[1.0, 0.0, 0.0, 0.0]).unwrap(), b);
        let mixed = bell_diagonal(&[0.25; 4]).unwrap();
        assert!(mixed.matrix().max_abs_diff(&ComplexMatrix::identity(4).scale_real(0.25)) < 1e-15);
        assert!(bell_state(4).is_err());
        assert!(!is_iq(&b, MEMBERSHIP_TOL));
    }

    #[test]
    fn sampler_determinism_and_validity() {
        let a = random_density(&RandomSpec { dim: 4, rank: 2, seed: 9 }).unwrap();
        let b = random_density(&RandomSpec { dim: 4, rank: 2, seed: 9 }).unwrap();
        assert_eq!(a, b);
        assert!(DensityMatrix::new(a.matrix().clone()).is_ok());
        let pure = random_density(&RandomSpec { dim: 3, rank: 1, seed: 1 }).unwrap();
        assert!(von_neumann_entropy(&pure) < 1e-8);
        let u = haar_unitary(5, 3);
        assert!(u.unitary_deviation() <= 1e-9);
        assert_eq!(u, haar_unitary(5, 3));
        assert_eq!(random_pure(3, 4), random_pure(3, 4));
    }

    #[test]
    fn iq_membership() {
        let mut s = Sampler::new(1);
        let iq = s.iq_state(3, 2);
        assert!(is_iq(&iq, MEMBERSHIP_TOL));
        assert!(!is_ii(&iq, MEMBERSHIP_TOL));
        let rho = s.bipartite(2, 3, 6);
        assert!(!is_iq(&rho, MEMBERSHIP_TOL));
        assert!(is_iq(&rho.dephase_a(), MEMBERSHIP_TOL));
        assert!(is_ii(&s.ii_state(2, 2), MEMBERSHIP_TOL));
    }

    #[test]
    fn cq_in_computational_basis_is_iq() {
        let blocks = vec![DensityMatrix::maximally_mixed(2), PureStateVector::basis(2, 1).to_density()];
        let basis = vec![vec![C64::new(1.0, 0.0), ZERO], vec![ZERO, C64::new(1.0, 0.0)]];
        let cq = cq_state(&[0.4, 0.6], &basis, &blocks).unwrap();
        assert_eq!(cq, iq_state(&[0.4, 0.6], &blocks).unwrap());
        let skew = vec![vec![C64::new(1.0, 0.0), ZERO], vec![C64::new(FRAC_1_SQRT_2, 0.0), C64::new(FRAC_1_SQRT_2, 0.0)]];
        assert!(matches!(cq_state(&[0.4, 0.6], &skew, &blocks), Err(Error::NotOrthonormal { .. })));
    }

    #[test]
    fn separable_single_term_is_product() {
        let a = DensityMatrix::from_diagonal(&[0.3, 0.7]).unwrap();
        let b = DensityMatrix::maximally_mixed(2);
        let s = separable_state(&[1.0], std::slice::from_ref(&a), std::slice::from_ref(&b)).unwrap();
        assert!(s.partial_trace(Subsystem::A).matrix().max_abs_diff(a.matrix()) < 1e-15);
    }

    #[test]
    fn derived_seeds_differ() {
        assert_ne!(derive_seed(0, 0), derive_seed(0, 1));
        assert_eq!(derive_seed(7, 3), derive_seed(7, 3));
    }
}
