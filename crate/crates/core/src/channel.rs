//! Kraus channels, separable-quantum-incoherent (SQI) channels, incoherent
//! unitaries, and seeded channel samplers.

use std::f64::consts::FRAC_1_SQRT_2;

use crate::error::{Error, Result};
use crate::factory::Sampler;
use crate::linalg::{ComplexMatrix, C64};
use crate::state::{BipartiteState, DensityMatrix};

/// Completeness tolerance for Kraus sets.
pub const COMPLETENESS_TOL: f64 = 1e-9;

/// Below this modulus a Kraus entry counts as zero.
pub const INCOHERENT_ENTRY_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq)]
pub struct KrausChannel {
    input_dim: usize,
    output_dim: usize,
    kraus: Vec<ComplexMatrix>,
}

fn completeness_deviation<'a>(dim: usize, ops: impl Iterator<Item = &'a ComplexMatrix>) -> f64 {
    let mut acc = ComplexMatrix::zeros(dim, dim);
    for k in ops {
        acc = &acc + &(&k.adjoint() * k);
    }
    acc.max_abs_diff(&ComplexMatrix::identity(dim))
}

impl KrausChannel {
    /// Validates shapes and `sum K^dag K = I` within `COMPLETENESS_TOL`.
    pub fn new(kraus: Vec<ComplexMatrix>) -> Result<Self> {
        let first = kraus
            .first()
            .ok_or_else(|| Error::InvalidArgument("a channel needs at least one Kraus operator".into()))?;
        let (output_dim, input_dim) = first.shape();
        if let Some(k) = kraus.iter().find(|k| k.shape() != (output_dim, input_dim)) {
            return Err(Error::ShapeMismatch {
                left: (output_dim, input_dim),
                right: k.shape(),
            });
        }
        let deviation = completeness_deviation(input_dim, kraus.iter());
        if deviation > COMPLETENESS_TOL {
            return Err(Error::Incomplete { deviation });
        }
        Ok(Self {
            input_dim,
            output_dim,
            kraus,
        })
    }

    pub fn identity(d: usize) -> Self {
        Self::new(vec![ComplexMatrix::identity(d)]).expect("identity is complete")
    }

    pub fn unitary(u: ComplexMatrix) -> Result<Self> {
        Self::new(vec![u])
    }

    /// Full dephasing of A: Kraus set `{|j><j| (x) I_B}`.
    pub fn dephasing_a(d_a: usize, d_b: usize) -> Self {
        let ops = (0..d_a)
            .map(|j| {
                let mut p = ComplexMatrix::zeros(d_a, d_a);
                p[(j, j)] = C64::new(1.0, 0.0);
                p.kron(&ComplexMatrix::identity(d_b))
            })
            .collect();
        Self::new(ops).expect("projectors are complete")
    }

    /// Qubit depolarizing channel `rho -> (1 - p) rho + p I / 2`.
    pub fn depolarizing_qubit(p: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::InvalidArgument(format!("depolarizing strength {p} outside [0, 1]")));
        }
        let i = C64::new(0.0, 1.0);
        let o = C64::new(0.0, 0.0);
        let l = C64::new(1.0, 0.0);
        let paulis = [
            ComplexMatrix::from_vec(2, 2, vec![o, l, l, o])?,
            ComplexMatrix::from_vec(2, 2, vec![o, -i, i, o])?,
            ComplexMatrix::from_vec(2, 2, vec![l, o, o, -l])?,
        ];
        let mut ops = vec![ComplexMatrix::identity(2).scale_real((1.0 - 0.75 * p).sqrt())];
        ops.extend(paulis.iter().map(|s| s.scale_real((p / 4.0).sqrt())));
        Self::new(ops)
    }

    pub fn input_dim(&self) -> usize {
        self.input_dim
    }

    pub fn output_dim(&self) -> usize {
        self.output_dim
    }

    pub fn kraus(&self) -> &[ComplexMatrix] {
        &self.kraus
    }

    pub fn apply_matrix(&self, rho: &ComplexMatrix) -> ComplexMatrix {
        let mut out = ComplexMatrix::zeros(self.output_dim, self.output_dim);
        for k in &self.kraus {
            out = &out + &rho.conjugate_by(k);
        }
        out.hermitian_part()
    }

    pub fn apply(&self, rho: &DensityMatrix) -> Result<DensityMatrix> {
        if rho.dim() != self.input_dim {
            return Err(Error::DimensionMismatch {
                expected: self.input_dim,
                actual: rho.dim(),
            });
        }
        Ok(DensityMatrix::new_unchecked(self.apply_matrix(rho.matrix())))
    }

    /// Applies a dimension-preserving channel on `AB`, keeping the split.
    pub fn apply_bipartite(&self, rho: &BipartiteState) -> Result<BipartiteState> {
        if self.output_dim != self.input_dim {
            return Err(Error::InvalidArgument(
                "bipartite application needs a dimension-preserving channel".into(),
            ));
        }
        let out = self.apply(rho.state())?;
        Ok(BipartiteState::new_unchecked(rho.d_a(), rho.d_b(), out.into_matrix()))
    }

    /// `(I_A (x) K)` or `(K (x) I_B)` lifted onto a bipartite system.
    pub fn lift(&self, side: crate::state::Subsystem, other_dim: usize) -> Self {
        let id = ComplexMatrix::identity(other_dim);
        let ops = self
            .kraus
            .iter()
            .map(|k| match side {
                crate::state::Subsystem::A => k.kron(&id),
                crate::state::Subsystem::B => id.kron(k),
            })
            .collect();
        Self {
            input_dim: self.input_dim * other_dim,
            output_dim: self.output_dim * other_dim,
            kraus: ops,
        }
    }
}

/// `sum_n (A_n (x) B_n) rho (A_n (x) B_n)^dag` with incoherent `A_n`.
#[derive(Debug, Clone, PartialEq)]
pub struct SqiChannel {
    d_a: usize,
    d_b: usize,
    terms: Vec<(ComplexMatrix, ComplexMatrix)>,
}

impl SqiChannel {
    pub fn new(terms: Vec<(ComplexMatrix, ComplexMatrix)>) -> Result<Self> {
        let (a0, b0) = terms
            .first()
            .ok_or_else(|| Error::InvalidArgument("an SQI channel needs at least one term".into()))?;
        let (d_a, d_b) = (a0.cols(), b0.cols());
        for (a, b) in &terms {
            if a.shape() != (d_a, d_a) || b.shape() != (d_b, d_b) {
                return Err(Error::ShapeMismatch {
                    left: (d_a, d_b),
                    right: (a.rows(), b.rows()),
                });
            }
            if !is_incoherent_kraus(a) {
                return Err(Error::NotIncoherent(format!("A-side factor {a:?}")));
            }
        }
        let joint: Vec<ComplexMatrix> = terms.iter().map(|(a, b)| a.kron(b)).collect();
        let deviation = completeness_deviation(d_a * d_b, joint.iter());
        if deviation > COMPLETENESS_TOL {
            return Err(Error::Incomplete { deviation });
        }
        Ok(Self { d_a, d_b, terms })
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.d_a, self.d_b)
    }

    pub fn terms(&self) -> &[(ComplexMatrix, ComplexMatrix)] {
        &self.terms
    }

    pub fn to_kraus(&self) -> KrausChannel {
        KrausChannel {
            input_dim: self.d_a * self.d_b,
            output_dim: self.d_a * self.d_b,
            kraus: self.terms.iter().map(|(a, b)| a.kron(b)).collect(),
        }
    }

    pub fn apply(&self, rho: &BipartiteState) -> Result<BipartiteState> {
        if rho.dims() != (self.d_a, self.d_b) {
            return Err(Error::DimensionMismatch {
                expected: self.d_a * self.d_b,
                actual: rho.d_a() * rho.d_b(),
            });
        }
        self.to_kraus().apply_bipartite(rho)
    }
}

/// True iff every column has at most one entry with modulus above
/// `INCOHERENT_ENTRY_TOL`.
pub fn is_incoherent_kraus(k: &ComplexMatrix) -> bool {
    (0..k.cols()).all(|j| (0..k.rows()).filter(|&i| k[(i, j)].norm() > INCOHERENT_ENTRY_TOL).count() <= 1)
}

/// Unitary within `1e-9` and incoherent, i.e. a phased permutation.
pub fn is_incoherent_unitary(u: &ComplexMatrix) -> bool {
    u.is_square() && u.unitary_deviation() <= COMPLETENESS_TOL && is_incoherent_kraus(u)
}

/// `U |j> = e^{i theta_j} |perm[j]>`.
#[derive(Debug, Clone, PartialEq)]
pub struct IncoherentUnitary {
    perm: Vec<usize>,
    phases: Vec<f64>,
}

impl IncoherentUnitary {
    pub fn new(perm: Vec<usize>, phases: Vec<f64>) -> Result<Self> {
        let d = perm.len();
        if phases.len() != d {
            return Err(Error::InvalidArgument("need one phase per basis index".into()));
        }
        let mut seen = vec![false; d];
        for &p in &perm {
            if p >= d || seen[p] {
                return Err(Error::InvalidArgument(format!("{perm:?} is not a permutation")));
            }
            seen[p] = true;
        }
        Ok(Self { perm, phases })
    }

    pub fn identity(d: usize) -> Self {
        Self {
            perm: (0..d).collect(),
            phases: vec![0.0; d],
        }
    }

    pub fn dim(&self) -> usize {
        self.perm.len()
    }

    pub fn permutation(&self) -> &[usize] {
        &self.perm
    }

    pub fn phases(&self) -> &[f64] {
        &self.phases
    }

    pub fn to_matrix(&self) -> ComplexMatrix {
        let d = self.dim();
        let mut m = ComplexMatrix::zeros(d, d);
        for (j, (&p, &t)) in self.perm.iter().zip(&self.phases).enumerate() {
            m[(p, j)] = C64::from_polar(1.0, t);
        }
        m
    }

    pub fn invert(&self) -> Self {
        let d = self.dim();
        let mut perm = vec![0; d];
        let mut phases = vec![0.0; d];
        for (j, (&p, &t)) in self.perm.iter().zip(&self.phases).enumerate() {
            perm[p] = j;
            phases[p] = -t;
        }
        Self { perm, phases }
    }
}

pub fn invert(u: &IncoherentUnitary) -> IncoherentUnitary {
    u.invert()
}

impl Sampler {
    /// Uniform permutation (Fisher-Yates) with uniform phases.
    pub fn incoherent_unitary(&mut self, d: usize) -> IncoherentUnitary {
        let mut perm: Vec<usize> = (0..d).collect();
        for i in (1..d).rev() {
            let j = self.index(i + 1);
            perm.swap(i, j);
        }
        let phases = (0..d).map(|_| self.uniform() * std::f64::consts::TAU).collect();
        IncoherentUnitary { perm, phases }
    }

    /// Kraus set on `C^d` with `r` operators taken from the columns of a
    /// Haar unitary on `C^d (x) C^r`: `K_k = (I (x) <k|) U (I (x) |0>)`.
    pub fn stinespring_kraus(&mut self, d: usize, r: usize) -> Vec<ComplexMatrix> {
        let u = self.unitary(d * r);
        (0..r)
            .map(|k| ComplexMatrix::from_fn(d, d, |i, j| u[(i * r + k, j * r)]))
            .collect()
    }

    /// Random SQI channel: each A factor is a phased permutation times a
    /// diagonal amplitude profile (the profiles square-sum to one per basis
    /// index), paired with its own complete Kraus set on B.
    pub fn sqi_channel(&mut self, d_a: usize, d_b: usize) -> SqiChannel {
        let n_a = 1 + self.index(3);
        // amplitude profiles c_n(i) with sum_n |c_n(i)|^2 = 1 for every i
        let mut weights = vec![vec![0.0; d_a]; n_a];
        for i in 0..d_a {
            let col = self.simplex(n_a);
            for (row, w) in weights.iter_mut().zip(col) {
                row[i] = w;
            }
        }
        let mut terms = Vec::new();
        for profile in weights {
            let u = self.incoherent_unitary(d_a).to_matrix();
            let diag: Vec<C64> = profile.iter().map(|&w| C64::new(w.sqrt(), 0.0)).collect();
            let a = &u * &ComplexMatrix::from_diagonal(&diag);
            let r = 1 + self.index(2);
            for b in self.stinespring_kraus(d_b, r) {
                terms.push((a.clone(), b));
            }
        }
        SqiChannel::new(terms).expect("SQI construction is complete by design")
    }

    /// One-round LOCC: a POVM-derived measurement `{M_k}` on A followed by a
    /// conditional unitary `U_k` on B, with Kraus terms `M_k (x) U_k`.
    pub fn one_round_locc(&mut self, d_a: usize, d_b: usize) -> KrausChannel {
        let outcomes = 1 + self.index(3);
        let measurement = self.stinespring_kraus(d_a, outcomes);
        let kraus = measurement
            .into_iter()
            .map(|m| m.kron(&self.unitary(d_b)))
            .collect();
        KrausChannel::new(kraus).expect("LOCC construction is complete")
    }
}

pub fn random_incoherent_unitary(d: usize, seed: u64) -> IncoherentUnitary {
    Sampler::new(seed).incoherent_unitary(d)
}

pub fn random_sqi_channel(d_a: usize, d_b: usize, seed: u64) -> SqiChannel {
    Sampler::new(seed).sqi_channel(d_a, d_b)
}

pub fn random_one_round_locc(d_a: usize, d_b: usize, seed: u64) -> KrausChannel {
    Sampler::new(seed).one_round_locc(d_a, d_b)
}

/// Hadamard on A tensored with identity on B; not an SQI channel.
pub fn hadamard_a(d_b: usize) -> KrausChannel {
    let h = ComplexMatrix::from_real(2, 2, &[FRAC_1_SQRT_2, FRAC_1_SQRT_2, FRAC_1_SQRT_2, -FRAC_1_SQRT_2])
        .expect("finite");
    KrausChannel::unitary(h.kron(&ComplexMatrix::identity(d_b))).expect("unitary")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::factory::{bell_state, is_iq, MEMBERSHIP_TOL};
    use crate::state::PureStateVector;

    #[test]
    fn identity_and_dephasing() {
        let rho = bell_state(0).unwrap();
        let id = KrausChannel::identity(4);
        assert!(id.apply_bipartite(&rho).unwrap().matrix().max_abs_diff(rho.matrix()) < 1e-15);
        let deph = KrausChannel::dephasing_a(2, 2).apply_bipartite(&rho).unwrap();
        assert!(deph.matrix().max_abs_diff(rho.dephase_a().matrix()) < 1e-15);
    }

    #[test]
    fn full_depolarizing_gives_maximally_mixed() {
        let ch = KrausChannel::depolarizing_qubit(1.0).unwrap();
        let out = ch.apply(&PureStateVector::basis(2, 0).to_density()).unwrap();
        assert!(out.matrix().max_abs_diff(DensityMatrix::maximally_mixed(2).matrix()) < 1e-15);
        assert!(KrausChannel::depolarizing_qubit(1.5).is_err());
    }

    #[test]
    fn incomplete_kraus_rejected() {
        let k = ComplexMatrix::identity(2).scale_real(0.5);
        assert!(matches!(KrausChannel::new(vec![k]), Err(Error::Incomplete { .. })));
        let rho = DensityMatrix::maximally_mixed(3);
        assert!(KrausChannel::identity(2).apply(&rho).is_err());
    }

    #[test]
    fn incoherent_kraus_criterion() {
        assert!(is_incoherent_kraus(&ComplexMatrix::from_real_diagonal(&[0.3, 1.0])));
        let h = hadamard_a(1).kraus()[0].clone();
        assert!(!is_incoherent_kraus(&h));
        let swap = IncoherentUnitary::new(vec![1, 0], vec![0.4, 1.0]).unwrap().to_matrix();
        assert!(is_incoherent_kraus(&swap));
        let x = ComplexMatrix::from_real(2, 2, &[0.0, 1.0, 1.0, 0.0]).unwrap();
        assert!(is_incoherent_unitary(&x));
        assert!(!is_incoherent_unitary(&h));
        let phase = ComplexMatrix::from_diagonal(&[C64::new(1.0, 0.0), C64::from_polar(1.0, std::f64::consts::FRAC_PI_3)]);
        assert!(is_incoherent_unitary(&phase));
        assert!(!is_incoherent_unitary(&ComplexMatrix::from_real_diagonal(&[0.5, 1.0])));
    }

    #[test]
    fn inverses() {
        let id = IncoherentUnitary::identity(3);
        assert_eq!(id.invert(), id);
        let swap = IncoherentUnitary::new(vec![1, 0], vec![0.0, std::f64::consts::FRAC_PI_2]).unwrap();
        let prod = &swap.to_matrix() * &swap.invert().to_matrix();
        assert!(prod.max_abs_diff(&ComplexMatrix::identity(2)) < 1e-12);
        let mut s = Sampler::new(4);
        for _ in 0..20 {
            let u = s.incoherent_unitary(4);
            let inv = invert(&u);
            assert!(is_incoherent_unitary(&inv.to_matrix()));
            assert!((&u.to_matrix() * &inv.to_matrix()).max_abs_diff(&ComplexMatrix::identity(4)) < 1e-12);
        }
        assert!(IncoherentUnitary::new(vec![0, 0], vec![0.0, 0.0]).is_err());
    }

    #[test]
    fn one_dimensional_incoherent_unitary_is_phase() {
        let u = random_incoherent_unitary(1, 8);
        assert_eq!(u.permutation(), &[0]);
        assert!(is_incoherent_unitary(&u.to_matrix()));
        assert_eq!(u, random_incoherent_unitary(1, 8));
    }

    #[test]
    fn sqi_samples_preserve_iq() {
        for seed in 0..30 {
            let ch = random_sqi_channel(3, 2, seed);
            assert_eq!(ch, random_sqi_channel(3, 2, seed));
            let sigma = Sampler::new(seed + 1000).iq_state(3, 2);
            let out = ch.apply(&sigma).unwrap();
            assert!(is_iq(&out, MEMBERSHIP_TOL));
            assert!((out.matrix().trace().re - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn unitary_sqi_term() {
        let a = IncoherentUnitary::new(vec![1, 0], vec![0.2, 0.0]).unwrap().to_matrix();
        let b = crate::factory::haar_unitary(2, 5);
        let ch = SqiChannel::new(vec![(a, b)]).unwrap();
        assert_eq!(ch.terms().len(), 1);
        let h = hadamard_a(1).kraus()[0].clone();
        assert!(matches!(
            SqiChannel::new(vec![(h, ComplexMatrix::identity(2))]),
            Err(Error::NotIncoherent(_))
        ));
    }

    #[test]
    fn locc_is_complete_and_deterministic() {
        let ch = random_one_round_locc(2, 2, 11);
        assert_eq!(ch, random_one_round_locc(2, 2, 11));
        assert_eq!(ch.input_dim(), 4);
    }
}
