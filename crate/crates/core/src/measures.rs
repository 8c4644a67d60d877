//! Basis-dependent discord measures and the coherence, discord and
//! entanglement measures built from them.
//!
//! The relative-entropy and l1 measures are evaluated in closed form. The
//! fidelity-type measures and the convex-roof constructions go through the
//! optimizer and report upper bounds.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::optimizer::{
    decomposition_from_isometry, default_ensemble_size, isometry_from_params, local_search,
    minimize_over_decompositions, minimize_over_iq_from, minimize_over_unitary_from, unitary_from_params,
    weighted_eigenvectors, BoundType, Diagnostics, OptimizerConfig, PureDecomposition,
};
use crate::factory::{derive_seed, Sampler};
use crate::linalg::{eig_hermitian, sqrt_psd, ComplexMatrix, C64};
use crate::state::{
    binary_entropy, matrix_entropy, root_trace, shannon_unchecked, tensor_product, von_neumann_entropy, BipartiteState,
    DensityMatrix, PureStateVector,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum MeasureKind {
    RelativeEntropy,
    L1,
    Geometric,
    FidelityBased,
    ConvexRoofRandomness,
}

impl MeasureKind {
    pub const ALL: [MeasureKind; 5] = [
        MeasureKind::RelativeEntropy,
        MeasureKind::L1,
        MeasureKind::Geometric,
        MeasureKind::FidelityBased,
        MeasureKind::ConvexRoofRandomness,
    ];

    /// Bound type of the basis-dependent discord of this kind.
    pub fn bound_type(self) -> BoundType {
        match self {
            MeasureKind::RelativeEntropy | MeasureKind::L1 => BoundType::Exact,
            _ => BoundType::UpperBound,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            MeasureKind::RelativeEntropy => "relative-entropy",
            MeasureKind::L1 => "l1",
            MeasureKind::Geometric => "geometric",
            MeasureKind::FidelityBased => "fidelity",
            MeasureKind::ConvexRoofRandomness => "convex-roof",
        }
    }
}

impl std::str::FromStr for MeasureKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        MeasureKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| Error::InvalidArgument(format!("unknown measure kind '{s}'")))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Certificate {
    /// Closest incoherent-quantum state.
    IqState(BipartiteState),
    /// Optimal local unitary on `A`.
    Unitary(ComplexMatrix),
    Decomposition(PureDecomposition),
    /// Decomposition with one local unitary on `A` per component.
    Roof {
        decomposition: PureDecomposition,
        unitaries: Vec<ComplexMatrix>,
    },
}

impl Certificate {
    pub fn label(&self) -> &'static str {
        match self {
            Certificate::IqState(_) => "iq-state",
            Certificate::Unitary(_) => "unitary",
            Certificate::Decomposition(_) => "decomposition",
            Certificate::Roof { .. } => "roof",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MeasureResult {
    pub kind: MeasureKind,
    pub value: f64,
    pub bound: BoundType,
    pub certificate: Option<Certificate>,
    pub diagnostics: Option<Diagnostics>,
}

impl MeasureResult {
    fn exact(kind: MeasureKind, value: f64, certificate: Option<Certificate>) -> Self {
        Self {
            kind,
            value,
            bound: BoundType::Exact,
            certificate,
            diagnostics: None,
        }
    }
}

/// `S(rho^{Adiag}) - S(rho)`.
pub fn bd_relative_entropy(rho: &BipartiteState) -> MeasureResult {
    let value = relative_entropy_value(rho);
    MeasureResult::exact(MeasureKind::RelativeEntropy, value, Some(Certificate::IqState(rho.dephase_a())))
}

fn relative_entropy_value(rho: &BipartiteState) -> f64 {
    if rho.d_a() == 1 {
        return 0.0;
    }
    let dephased = block_entropy_sum(rho);
    (dephased - matrix_entropy(rho.matrix())).max(0.0)
}

// Entropy of the A-dephased state, block by block.
fn block_entropy_sum(rho: &BipartiteState) -> f64 {
    (0..rho.d_a())
        .map(|j| {
            let b = rho.block(j, j).hermitian_part();
            matrix_entropy(&b)
        })
        .sum()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum L1Mode {
    ClosedForm,
    Numeric,
}

/// Sum of entry moduli over blocks with `j_A != k_A`; the candidate minimizer
/// is the state with `rho`'s diagonal blocks.
pub fn bd_l1_closed_form(rho: &BipartiteState) -> MeasureResult {
    let m = rho.matrix();
    let db = rho.d_b();
    let mut value = 0.0;
    for r in 0..m.rows() {
        for c in 0..m.cols() {
            if r / db != c / db {
                value += m[(r, c)].norm();
            }
        }
    }
    MeasureResult::exact(MeasureKind::L1, value, Some(Certificate::IqState(rho.dephase_a())))
}

pub fn bd_l1(rho: &BipartiteState, mode: L1Mode, cfg: &OptimizerConfig) -> Result<MeasureResult> {
    match mode {
        L1Mode::ClosedForm => Ok(bd_l1_closed_form(rho)),
        L1Mode::Numeric => {
            let target = rho.matrix().clone();
            let mut dist = |s: &BipartiteState| s.matrix().l1_distance(&target).unwrap_or(f64::INFINITY);
            let out = minimize_over_iq_from(rho.d_a(), rho.d_b(), &mut dist, &[], cfg)?;
            Ok(MeasureResult {
                kind: MeasureKind::L1,
                value: out.value,
                bound: BoundType::UpperBound,
                certificate: Some(Certificate::IqState(out.certificate)),
                diagnostics: Some(out.diagnostics),
            })
        }
    }
}

/// Fidelity against a fixed state with a precomputed square root.
struct FidelityTarget {
    root: ComplexMatrix,
}

impl FidelityTarget {
    fn new(rho: &BipartiteState) -> Self {
        Self {
            root: sqrt_psd(rho.matrix()).expect("state is Hermitian"),
        }
    }

    fn root_fidelity(&self, sigma: &ComplexMatrix) -> f64 {
        let inner = (&(&self.root * sigma) * &self.root).hermitian_part();
        root_trace(&eig_hermitian(&inner).expect("Hermitian product").eigenvalues).clamp(0.0, 1.0)
    }
}

fn fidelity_measure(rho: &BipartiteState, squared: bool, cfg: &OptimizerConfig) -> Result<MeasureResult> {
    let kind = if squared {
        MeasureKind::Geometric
    } else {
        MeasureKind::FidelityBased
    };
    let target = FidelityTarget::new(rho);
    let mut objective = |s: &BipartiteState| {
        let rf = target.root_fidelity(s.matrix());
        if squared {
            1.0 - rf * rf
        } else {
            1.0 - rf
        }
    };
    let starts = [rho.dephase_a()];
    let out = minimize_over_iq_from(rho.d_a(), rho.d_b(), &mut objective, &starts, cfg)?;
    Ok(MeasureResult {
        kind,
        value: out.value.max(0.0),
        bound: BoundType::UpperBound,
        certificate: Some(Certificate::IqState(out.certificate)),
        diagnostics: Some(out.diagnostics),
    })
}

/// `1 - max F(rho, sigma_IQ)`.
pub fn bd_geometric(rho: &BipartiteState, cfg: &OptimizerConfig) -> Result<MeasureResult> {
    fidelity_measure(rho, true, cfg)
}

/// `1 - max sqrt(F(rho, sigma_IQ))`.
pub fn bd_fidelity(rho: &BipartiteState, cfg: &OptimizerConfig) -> Result<MeasureResult> {
    fidelity_measure(rho, false, cfg)
}

/// Shannon entropy of the A-basis marginal `p_j = sum_k |<j k|psi>|^2`.
pub fn local_randomness(psi: &PureStateVector, d_a: usize, d_b: usize) -> Result<f64> {
    if d_a * d_b != psi.dim() {
        return Err(Error::DimensionMismatch {
            expected: d_a * d_b,
            actual: psi.dim(),
        });
    }
    Ok(local_randomness_unchecked(psi.amplitudes(), d_b))
}

fn local_randomness_unchecked(amps: &[C64], d_b: usize) -> f64 {
    let p: Vec<f64> = amps.chunks(d_b).map(|c| c.iter().map(|z| z.norm_sqr()).sum()).collect();
    shannon_unchecked(&p)
}

/// Convex roof of local randomness over pure-state decompositions.
pub fn bd_convex_roof_randomness(rho: &BipartiteState, cfg: &OptimizerConfig) -> Result<MeasureResult> {
    let d_b = rho.d_b();
    let mut per_pure = |s: &PureStateVector| local_randomness_unchecked(s.amplitudes(), d_b);
    let out = minimize_over_decompositions(rho, &mut per_pure, cfg.ensemble_size, cfg)?;
    Ok(MeasureResult {
        kind: MeasureKind::ConvexRoofRandomness,
        value: out.value.max(0.0),
        bound: BoundType::UpperBound,
        certificate: Some(Certificate::Decomposition(out.certificate)),
        diagnostics: Some(out.diagnostics),
    })
}

/// Basis-dependent discord of the given kind.
pub fn bd(rho: &BipartiteState, kind: MeasureKind, cfg: &OptimizerConfig) -> Result<MeasureResult> {
    match kind {
        MeasureKind::RelativeEntropy => Ok(bd_relative_entropy(rho)),
        MeasureKind::L1 => Ok(bd_l1_closed_form(rho)),
        MeasureKind::Geometric => bd_geometric(rho, cfg),
        MeasureKind::FidelityBased => bd_fidelity(rho, cfg),
        MeasureKind::ConvexRoofRandomness => bd_convex_roof_randomness(rho, cfg),
    }
}

fn bd_value(rho: &BipartiteState, kind: MeasureKind, cfg: &OptimizerConfig) -> f64 {
    match kind {
        MeasureKind::RelativeEntropy => relative_entropy_value(rho),
        MeasureKind::L1 => bd_l1_closed_form(rho).value,
        _ => bd(rho, kind, cfg).map_or(f64::NAN, |r| r.value),
    }
}

/// Coherence of `rho_a` as the basis-dependent discord of `rho_a (x) rho_b`;
/// without `rho_b` the partner system is one-dimensional.
pub fn coherence(
    rho_a: &DensityMatrix,
    kind: MeasureKind,
    rho_b: Option<&DensityMatrix>,
    cfg: &OptimizerConfig,
) -> Result<MeasureResult> {
    let joint = match rho_b {
        Some(b) => tensor_product(rho_a, b)?,
        None => BipartiteState::single_party(rho_a.clone()),
    };
    bd(&joint, kind, cfg)
}

/// Unitary mapping the eigenbasis of `rho_A` onto the computational basis.
fn marginal_eigenbasis(rho: &BipartiteState) -> ComplexMatrix {
    let marginal = crate::state::partial_trace_matrix(rho.matrix(), rho.d_a(), rho.d_b(), crate::state::Subsystem::A);
    eig_hermitian(&marginal.hermitian_part())
        .expect("Hermitian marginal")
        .eigenvectors
        .adjoint()
}

/// Minimum over local unitaries `U_A` of the basis-dependent discord of
/// `(U_A (x) I) rho (U_A (x) I)^dag`. The first restart starts from the
/// eigenbasis of `rho_A`.
pub fn discord(rho: &BipartiteState, kind: MeasureKind, cfg: &OptimizerConfig) -> Result<MeasureResult> {
    let inner = cfg.inner();
    let mut objective = |u: &ComplexMatrix| bd_value(&rho.local_unitary(Some(u), None), kind, &inner);
    let starts = [marginal_eigenbasis(rho)];
    let out = minimize_over_unitary_from(rho.d_a(), &mut objective, &starts, cfg)?;
    Ok(MeasureResult {
        kind,
        value: out.value.max(0.0),
        bound: BoundType::UpperBound,
        certificate: Some(Certificate::Unitary(out.certificate)),
        diagnostics: Some(out.diagnostics),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum RoofMode {
    /// Outer decomposition search with an inner unitary search per component.
    Nested,
    /// One search over the decomposition and all component unitaries at once.
    Joint,
}

/// Convex roof of discord; nested search.
pub fn entanglement(rho: &BipartiteState, kind: MeasureKind, cfg: &OptimizerConfig) -> Result<MeasureResult> {
    entanglement_with_mode(rho, kind, RoofMode::Nested, cfg)
}

pub fn entanglement_with_mode(
    rho: &BipartiteState,
    kind: MeasureKind,
    mode: RoofMode,
    cfg: &OptimizerConfig,
) -> Result<MeasureResult> {
    match mode {
        RoofMode::Nested => entanglement_nested(rho, kind, cfg),
        RoofMode::Joint => entanglement_joint(rho, kind, cfg),
    }
}

fn pure_discord(
    psi: &PureStateVector,
    d_a: usize,
    d_b: usize,
    kind: MeasureKind,
    cfg: &OptimizerConfig,
) -> Result<(f64, ComplexMatrix)> {
    let state = psi.to_bipartite(d_a, d_b)?;
    let res = discord(&state, kind, cfg)?;
    let u = match res.certificate {
        Some(Certificate::Unitary(u)) => u,
        _ => unreachable!("discord certifies with a unitary"),
    };
    Ok((res.value, u))
}

fn entanglement_nested(rho: &BipartiteState, kind: MeasureKind, cfg: &OptimizerConfig) -> Result<MeasureResult> {
    let (d_a, d_b) = rho.dims();
    let inner = cfg.inner();
    let mut failure: Option<Error> = None;
    let mut per_pure = |psi: &PureStateVector| match pure_discord(psi, d_a, d_b, kind, &inner) {
        Ok((v, _)) => v,
        Err(e) => {
            failure.get_or_insert(e);
            f64::NAN
        }
    };
    let out = minimize_over_decompositions(rho, &mut per_pure, cfg.ensemble_size, cfg);
    if let Some(e) = failure {
        return Err(e);
    }
    let out = out?;
    let mut unitaries = Vec::with_capacity(out.certificate.len());
    for s in &out.certificate.states {
        unitaries.push(pure_discord(s, d_a, d_b, kind, &inner)?.1);
    }
    Ok(MeasureResult {
        kind,
        value: out.value.max(0.0),
        bound: BoundType::UpperBound,
        certificate: Some(Certificate::Roof {
            decomposition: out.certificate,
            unitaries,
        }),
        diagnostics: Some(out.diagnostics),
    })
}

fn entanglement_joint(rho: &BipartiteState, kind: MeasureKind, cfg: &OptimizerConfig) -> Result<MeasureResult> {
    cfg.validate()?;
    let (d_a, d_b) = rho.dims();
    let inner = cfg.inner();
    let ensemble = weighted_eigenvectors(rho.matrix());
    let rank = ensemble.len();
    let m = cfg.ensemble_size.unwrap_or_else(|| default_ensemble_size(rank));
    if m < rank {
        return Err(Error::EnsembleTooSmall { ensemble: m, rank });
    }
    let n_dec = m * m;
    let n_u = d_a * d_a;
    let n = n_dec + m * n_u;

    let realize = |base: &[ComplexMatrix], x: &[f64]| -> (PureDecomposition, Vec<ComplexMatrix>) {
        let v = isometry_from_params(&base[0], rank, &x[..n_dec]);
        let dec = decomposition_from_isometry(&ensemble, &v);
        let us = (0..m)
            .map(|e| &base[1 + e] * &unitary_from_params(d_a, &x[n_dec + e * n_u..n_dec + (e + 1) * n_u]))
            .collect();
        (dec, us)
    };
    let evaluate = |dec: &PureDecomposition, us: &[ComplexMatrix]| -> f64 {
        dec.probabilities
            .iter()
            .zip(&dec.states)
            .zip(us)
            .map(|((p, s), u)| {
                let st = BipartiteState::new_unchecked(d_a, d_b, ComplexMatrix::outer(s.amplitudes()));
                p * bd_value(&st.local_unitary(Some(u), None), kind, &inner)
            })
            .sum()
    };

    // (value, restart, coordinates, base point, final step)
    type Best = (f64, usize, Vec<f64>, Vec<ComplexMatrix>, f64);
    let mut best: Option<Best> = None;
    let mut evaluations = 0;
    for r in 0..cfg.restarts {
        let mut s = Sampler::new(derive_seed(cfg.seed, r as u64));
        let base: Vec<ComplexMatrix> = if r == 0 {
            let first = ComplexMatrix::identity(m);
            let dec = decomposition_from_isometry(&ensemble, &ComplexMatrix::from_fn(m, rank, |i, j| first[(i, j)]));
            let mut b = vec![first];
            for e in 0..m {
                b.push(match dec.states.get(e) {
                    Some(psi) => marginal_eigenbasis(
                        &BipartiteState::new_unchecked(d_a, d_b, ComplexMatrix::outer(psi.amplitudes())),
                    ),
                    None => ComplexMatrix::identity(d_a),
                });
            }
            b
        } else {
            let mut b = vec![s.unitary(m)];
            b.extend((0..m).map(|_| s.unitary(d_a)));
            b
        };
        let res = local_search(
            &mut |x| {
                let (dec, us) = realize(&base, x);
                evaluate(&dec, &us)
            },
            &vec![0.0; n],
            cfg.max_iterations,
            cfg.tolerance,
            0.4,
        );
        evaluations += res.evaluations;
        if !res.value.is_finite() {
            return Err(Error::Optimizer("joint roof objective is not finite".into()));
        }
        if best.as_ref().is_none_or(|b| res.value < b.0) {
            best = Some((res.value, r, res.x, base, res.final_step));
        }
    }
    let (_, best_restart, x, base, final_step) = best.expect("restarts >= 1");
    let (decomposition, unitaries) = realize(&base, &x);
    let value = evaluate(&decomposition, &unitaries);
    Ok(MeasureResult {
        kind,
        value: value.max(0.0),
        bound: BoundType::UpperBound,
        certificate: Some(Certificate::Roof {
            decomposition,
            unitaries: unitaries.into_iter().take(m).collect(),
        }),
        diagnostics: Some(Diagnostics {
            restarts_used: cfg.restarts,
            best_restart,
            final_step,
            evaluations,
        }),
    })
}

/// Entropy of the reduced state on `A` of a bipartite pure state.
pub fn schmidt_entropy(psi: &PureStateVector, d_a: usize, d_b: usize) -> f64 {
    von_neumann_entropy(&psi.reduced_a(d_a, d_b))
}

/// Two-qubit concurrence from the spin-flipped spectrum.
pub fn wootters_concurrence(rho: &BipartiteState) -> Result<f64> {
    if rho.dims() != (2, 2) {
        return Err(Error::InvalidArgument(format!(
            "concurrence needs a two-qubit state, got {:?}",
            rho.dims()
        )));
    }
    let m = rho.matrix();
    // sigma_y (x) sigma_y is real with anti-diagonal (-1, 1, 1, -1)
    let flip = ComplexMatrix::from_real(4, 4, &[
        0.0, 0.0, 0.0, -1.0, //
        0.0, 0.0, 1.0, 0.0, //
        0.0, 1.0, 0.0, 0.0, //
        -1.0, 0.0, 0.0, 0.0,
    ])?;
    let conj = ComplexMatrix::from_fn(4, 4, |i, j| m[(i, j)].conj());
    let tilde = &(&flip * &conj) * &flip;
    let root = sqrt_psd(m)?;
    let inner = (&(&root * &tilde) * &root).hermitian_part();
    let mut l: Vec<f64> = eig_hermitian(&inner)?
        .eigenvalues
        .into_iter()
        .map(|x| x.max(0.0).sqrt())
        .collect();
    l.sort_by(|a, b| b.total_cmp(a));
    Ok((l[0] - l[1] - l[2] - l[3]).max(0.0))
}

/// Two-qubit entanglement of formation `h((1 + sqrt(1 - C^2)) / 2)`.
pub fn wootters_eof(rho: &BipartiteState) -> Result<f64> {
    let c = wootters_concurrence(rho)?;
    Ok(binary_entropy((1.0 + (1.0 - c * c).max(0.0).sqrt()) / 2.0))
}

/// Coherence, basis-dependent discord, discord and entanglement with one
/// shared distance kind.
#[derive(Debug, Clone, PartialEq)]
pub struct UnifiedReport {
    pub coherence: MeasureResult,
    pub bd: MeasureResult,
    pub discord: MeasureResult,
    pub entanglement: MeasureResult,
}

pub fn unified_table(
    rho_a: &DensityMatrix,
    rho_ab: &BipartiteState,
    kind: MeasureKind,
    cfg: &OptimizerConfig,
) -> Result<UnifiedReport> {
    Ok(UnifiedReport {
        coherence: coherence(rho_a, kind, None, cfg)?,
        bd: bd(rho_ab, kind, cfg)?,
        discord: discord(rho_ab, kind, cfg)?,
        entanglement: entanglement(rho_ab, kind, cfg)?,
    })
}
