//! Multi-restart derivative-free minimization over the unitary group, the
//! set of incoherent-quantum states, and pure-state decompositions.
//!
//! Every search space is mapped onto unconstrained real coordinates and
//! handed to a Nelder-Mead simplex search. Each restart has its own base
//! point (a Haar unitary, a Ginibre block set, ...) derived from the base
//! seed and the restart index, so adding restarts never changes the earlier
//! ones and the reported minimum is monotone in the restart count.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::factory::{derive_seed, Sampler};
use crate::linalg::{eig_hermitian, expi_hermitian, sqrt_psd, ComplexMatrix, C64, ZERO};
use crate::state::{BipartiteState, PureStateVector, EIGEN_FLOOR};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OptimizerConfig {
    pub restarts: usize,
    /// Simplex iterations allowed per restart.
    pub max_iterations: usize,
    /// Convergence tolerance on the spread of objective values.
    pub tolerance: f64,
    pub seed: u64,
    /// Ensemble size for convex-roof searches; `None` uses the state rank.
    pub ensemble_size: Option<usize>,
    /// Restarts for searches nested inside an outer objective.
    pub inner_restarts: usize,
    pub inner_max_iterations: usize,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        Self {
            restarts: 16,
            max_iterations: 2000,
            tolerance: 1e-7,
            seed: 0,
            ensemble_size: None,
            inner_restarts: 2,
            inner_max_iterations: 200,
        }
    }
}

impl OptimizerConfig {
    pub fn validate(&self) -> Result<()> {
        if self.restarts == 0 || self.inner_restarts == 0 {
            return Err(Error::InvalidArgument("restarts must be at least 1".into()));
        }
        if !(self.tolerance > 0.0 && self.tolerance.is_finite()) {
            return Err(Error::InvalidArgument(format!("tolerance {} must be positive", self.tolerance)));
        }
        Ok(())
    }

    /// Configuration handed to searches nested inside an outer objective.
    pub fn inner(&self) -> OptimizerConfig {
        OptimizerConfig {
            restarts: self.inner_restarts,
            max_iterations: self.inner_max_iterations,
            seed: derive_seed(self.seed, 0x1_0000),
            ..self.clone()
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum BoundType {
    Exact,
    UpperBound,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Diagnostics {
    pub restarts_used: usize,
    pub best_restart: usize,
    pub final_step: f64,
    pub evaluations: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OptimizationOutcome<C> {
    pub value: f64,
    pub certificate: C,
    pub bound: BoundType,
    pub diagnostics: Diagnostics,
}

/// A pure-state ensemble `{p_e, |psi_e>}`.
#[derive(Debug, Clone, PartialEq)]
pub struct PureDecomposition {
    pub probabilities: Vec<f64>,
    pub states: Vec<PureStateVector>,
}

impl PureDecomposition {
    /// `sum_e p_e |psi_e><psi_e|`.
    pub fn density(&self) -> ComplexMatrix {
        let d = self.states.first().map_or(0, PureStateVector::dim);
        let mut m = ComplexMatrix::zeros(d, d);
        for (p, s) in self.probabilities.iter().zip(&self.states) {
            m = &m + &ComplexMatrix::outer(s.amplitudes()).scale_real(*p);
        }
        m
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LocalSearchResult {
    pub x: Vec<f64>,
    pub value: f64,
    pub iterations: usize,
    pub evaluations: usize,
    /// Largest vertex distance from the best vertex in the final simplex.
    pub final_step: f64,
}

/// Nelder-Mead simplex search with dimension-adaptive coefficients.
///
/// After the simplex collapses the search is restarted around the best point
/// with the original step, until a cycle improves by less than `tolerance` or
/// the iteration budget is spent. Non-finite objective values are treated as
/// `+inf`.
pub fn local_search(
    objective: &mut dyn FnMut(&[f64]) -> f64,
    x0: &[f64],
    max_iterations: usize,
    tolerance: f64,
    initial_step: f64,
) -> LocalSearchResult {
    let n = x0.len();
    let evals = std::cell::Cell::new(0usize);
    let mut f = |x: &[f64]| {
        evals.set(evals.get() + 1);
        let v = objective(x);
        if v.is_finite() {
            v
        } else {
            f64::INFINITY
        }
    };
    let mut best_x = x0.to_vec();
    let mut best_f = f(&best_x);
    if n == 0 {
        return LocalSearchResult {
            x: best_x,
            value: best_f,
            iterations: 0,
            evaluations: evals.get(),
            final_step: 0.0,
        };
    }

    let (alpha, gamma, rho, sigma) = if n <= 2 {
        (1.0, 2.0, 0.5, 0.5)
    } else {
        let nf = n as f64;
        (1.0, 1.0 + 2.0 / nf, 0.75 - 0.5 / nf, 1.0 - 1.0 / nf)
    };

    let mut iterations = 0usize;
    let mut final_step = initial_step;
    for _cycle in 0..16 {
        if iterations >= max_iterations {
            break;
        }
        let start_f = best_f;
        let mut simplex: Vec<Vec<f64>> = vec![best_x.clone()];
        let mut values = vec![best_f];
        for i in 0..n {
            let mut v = best_x.clone();
            v[i] += initial_step;
            values.push(f(&v));
            simplex.push(v);
        }
        let mut order: Vec<usize> = (0..=n).collect();
        while iterations < max_iterations {
            order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
            let (ib, iw, is) = (order[0], order[n], order[n - 1]);
            if values[iw] - values[ib] <= tolerance {
                break;
            }
            iterations += 1;
            let mut centroid = vec![0.0; n];
            for &k in &order[..n] {
                for (c, x) in centroid.iter_mut().zip(&simplex[k]) {
                    *c += x / n as f64;
                }
            }
            let along = |t: f64, from: &[f64]| -> Vec<f64> {
                centroid.iter().zip(from).map(|(c, w)| c + t * (c - w)).collect()
            };
            let xr = along(alpha, &simplex[iw]);
            let fr = f(&xr);
            if fr < values[ib] {
                let xe = along(alpha * gamma, &simplex[iw]);
                let fe = f(&xe);
                if fe < fr {
                    simplex[iw] = xe;
                    values[iw] = fe;
                } else {
                    simplex[iw] = xr;
                    values[iw] = fr;
                }
                continue;
            }
            if fr < values[is] {
                simplex[iw] = xr;
                values[iw] = fr;
                continue;
            }
            let (xc, fc, accept) = if fr < values[iw] {
                let xc = along(alpha * rho, &simplex[iw]);
                let fc = f(&xc);
                let ok = fc <= fr;
                (xc, fc, ok)
            } else {
                let xc = along(-rho, &simplex[iw]);
                let fc = f(&xc);
                let ok = fc < values[iw];
                (xc, fc, ok)
            };
            if accept {
                simplex[iw] = xc;
                values[iw] = fc;
                continue;
            }
            let xb = simplex[ib].clone();
            for k in 0..=n {
                if k == ib {
                    continue;
                }
                for (x, b) in simplex[k].iter_mut().zip(&xb) {
                    *x = b + sigma * (*x - b);
                }
                values[k] = f(&simplex[k]);
            }
        }
        let ib = (0..=n).min_by(|&a, &b| values[a].total_cmp(&values[b])).unwrap_or(0);
        final_step = simplex
            .iter()
            .map(|v| v.iter().zip(&simplex[ib]).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt())
            .fold(0.0, f64::max);
        if values[ib] < best_f {
            best_f = values[ib];
            best_x = simplex[ib].clone();
        }
        if start_f - best_f <= tolerance {
            break;
        }
    }
    LocalSearchResult {
        x: best_x,
        value: best_f,
        iterations,
        evaluations: evals.get(),
        final_step,
    }
}

/// Hermitian generator from `d^2` real coordinates: `d` diagonal entries,
/// then `(re, im)` of each upper-triangular entry in row order.
pub fn hermitian_from_params(d: usize, h: &[f64]) -> ComplexMatrix {
    assert_eq!(h.len(), d * d, "need d^2 generator coordinates");
    let mut m = ComplexMatrix::zeros(d, d);
    for i in 0..d {
        m[(i, i)] = C64::new(h[i], 0.0);
    }
    let mut k = d;
    for i in 0..d {
        for j in i + 1..d {
            let z = C64::new(h[k], h[k + 1]);
            m[(i, j)] = z;
            m[(j, i)] = z.conj();
            k += 2;
        }
    }
    m
}

/// `exp(iH(h))`.
pub fn unitary_from_params(d: usize, h: &[f64]) -> ComplexMatrix {
    if h.iter().all(|&x| x == 0.0) {
        return ComplexMatrix::identity(d);
    }
    expi_hermitian(&hermitian_from_params(d, h)).expect("generator is Hermitian")
}

/// First `r` columns of `base * exp(iH(h))`.
pub fn isometry_from_params(base: &ComplexMatrix, r: usize, h: &[f64]) -> ComplexMatrix {
    let m = base.rows();
    let u = base * &unitary_from_params(m, h);
    ComplexMatrix::from_fn(m, r, |i, j| u[(i, j)])
}

/// Shared restart driver: restart `r` starts from coordinates `0` around the
/// base point `base(r)`; `realize` maps (base, coordinates) to a candidate.
#[allow(clippy::too_many_arguments)]
fn multistart<S, C>(
    cfg: &OptimizerConfig,
    n_params: usize,
    step: f64,
    mut base: impl FnMut(usize) -> Result<S>,
    mut realize: impl FnMut(&S, &[f64]) -> C,
    objective: &mut dyn FnMut(&C) -> f64,
) -> Result<OptimizationOutcome<C>> {
    cfg.validate()?;
    let mut best: Option<(f64, usize, C, f64)> = None;
    let mut evaluations = 0usize;
    let x0 = vec![0.0; n_params];
    for r in 0..cfg.restarts {
        let b = base(r)?;
        let first = objective(&realize(&b, &x0));
        evaluations += 1;
        if !first.is_finite() {
            return Err(Error::Optimizer(format!(
                "objective evaluated to {first} at the start of restart {r}"
            )));
        }
        let res = local_search(
            &mut |x| objective(&realize(&b, x)),
            &x0,
            cfg.max_iterations,
            cfg.tolerance,
            step,
        );
        evaluations += res.evaluations;
        let better = best.as_ref().is_none_or(|(v, ..)| res.value < *v);
        if better {
            let cert = realize(&b, &res.x);
            best = Some((res.value, r, cert, res.final_step));
        }
    }
    let (_, best_restart, certificate, final_step) = best.expect("at least one restart");
    let value = objective(&certificate);
    if !value.is_finite() {
        return Err(Error::Optimizer(format!("objective evaluated to {value} at the optimum")));
    }
    Ok(OptimizationOutcome {
        value,
        certificate,
        bound: BoundType::UpperBound,
        diagnostics: Diagnostics {
            restarts_used: cfg.restarts,
            best_restart,
            final_step,
            evaluations: evaluations + 1,
        },
    })
}

const UNITARY_STEP: f64 = 0.4;
const FACTOR_STEP: f64 = 0.25;

/// Minimizes `objective` over `U(d)` with `U = U_r exp(iH)`, where `U_r` is
/// `starts[r]` for the first restarts and a seeded Haar unitary afterwards.
pub fn minimize_over_unitary_from(
    d: usize,
    objective: &mut dyn FnMut(&ComplexMatrix) -> f64,
    starts: &[ComplexMatrix],
    cfg: &OptimizerConfig,
) -> Result<OptimizationOutcome<ComplexMatrix>> {
    if let Some(s) = starts.iter().find(|s| s.shape() != (d, d)) {
        return Err(Error::DimensionMismatch {
            expected: d,
            actual: s.rows(),
        });
    }
    multistart(
        cfg,
        d * d,
        UNITARY_STEP,
        |r| {
            Ok(starts
                .get(r)
                .cloned()
                .unwrap_or_else(|| Sampler::new(derive_seed(cfg.seed, r as u64)).unitary(d)))
        },
        |base, h| base * &unitary_from_params(d, h),
        objective,
    )
}

pub fn minimize_over_unitary(
    d: usize,
    objective: &mut dyn FnMut(&ComplexMatrix) -> f64,
    cfg: &OptimizerConfig,
) -> Result<OptimizationOutcome<ComplexMatrix>> {
    minimize_over_unitary_from(d, objective, &[], cfg)
}

/// IQ state `blockdiag(W_j W_j^dag) / sum_j tr(W_j W_j^dag)`.
fn iq_from_factors(d_a: usize, d_b: usize, factors: &[ComplexMatrix]) -> BipartiteState {
    let n = d_a * d_b;
    let mut m = ComplexMatrix::zeros(n, n);
    let mut total = 0.0;
    for (j, w) in factors.iter().enumerate() {
        let g = w * &w.adjoint();
        total += g.trace().re;
        for x in 0..d_b {
            for y in 0..d_b {
                m[(j * d_b + x, j * d_b + y)] = g[(x, y)];
            }
        }
    }
    let m = if total > 0.0 {
        m.scale_real(1.0 / total)
    } else {
        ComplexMatrix::identity(n).scale_real(1.0 / n as f64)
    };
    BipartiteState::new_unchecked(d_a, d_b, m.hermitian_part())
}

fn offset_factors(base: &[ComplexMatrix], d_b: usize, x: &[f64]) -> Vec<ComplexMatrix> {
    base.iter()
        .enumerate()
        .map(|(j, w)| {
            let off = j * 2 * d_b * d_b;
            ComplexMatrix::from_fn(d_b, d_b, |r, c| {
                let k = off + 2 * (r * d_b + c);
                w[(r, c)] + C64::new(x[k], x[k + 1])
            })
        })
        .collect()
}

/// Minimizes `distance(sigma)` over incoherent-quantum states `sigma`.
/// `starts` seeds the first restarts; later restarts use Ginibre factors.
pub fn minimize_over_iq_from(
    d_a: usize,
    d_b: usize,
    distance: &mut dyn FnMut(&BipartiteState) -> f64,
    starts: &[BipartiteState],
    cfg: &OptimizerConfig,
) -> Result<OptimizationOutcome<BipartiteState>> {
    let mut start_factors = Vec::with_capacity(starts.len());
    for s in starts {
        if s.dims() != (d_a, d_b) {
            return Err(Error::DimensionMismatch {
                expected: d_a * d_b,
                actual: s.d_a() * s.d_b(),
            });
        }
        let f: Result<Vec<ComplexMatrix>> = (0..d_a).map(|j| sqrt_psd(&s.block(j, j).hermitian_part())).collect();
        start_factors.push(f?);
    }
    multistart(
        cfg,
        2 * d_a * d_b * d_b,
        FACTOR_STEP,
        |r| {
            Ok(start_factors.get(r).cloned().unwrap_or_else(|| {
                let mut s = Sampler::new(derive_seed(cfg.seed, r as u64));
                (0..d_a).map(|_| s.ginibre(d_b, d_b)).collect()
            }))
        },
        |base, x| iq_from_factors(d_a, d_b, &offset_factors(base, d_b, x)),
        distance,
    )
}

pub fn minimize_over_iq(
    d_a: usize,
    d_b: usize,
    distance: &mut dyn FnMut(&BipartiteState) -> f64,
    cfg: &OptimizerConfig,
) -> Result<OptimizationOutcome<BipartiteState>> {
    minimize_over_iq_from(d_a, d_b, distance, &[], cfg)
}

/// Spectral ensemble of a state: `sqrt(lambda_k) |v_k>` for eigenvalues above
/// `EIGEN_FLOOR`.
pub(crate) fn weighted_eigenvectors(rho: &ComplexMatrix) -> Vec<Vec<C64>> {
    let eig = eig_hermitian(rho).expect("Hermitian state");
    (0..eig.dim())
        .filter(|&k| eig.eigenvalues[k] > EIGEN_FLOOR)
        .map(|k| {
            let w = eig.eigenvalues[k].sqrt();
            eig.eigenvector(k).into_iter().map(|z| z * w).collect()
        })
        .collect()
}

/// Decomposition `|psi~_e> = sum_k V_ek sqrt(lambda_k) |v_k>` for an `m x r`
/// isometry `V`; components with weight below `EIGEN_FLOOR` are dropped.
pub fn decomposition_from_isometry(ensemble: &[Vec<C64>], v: &ComplexMatrix) -> PureDecomposition {
    let dim = ensemble.first().map_or(0, Vec::len);
    let mut probabilities = Vec::with_capacity(v.rows());
    let mut states = Vec::with_capacity(v.rows());
    for e in 0..v.rows() {
        let mut psi = vec![ZERO; dim];
        for (k, vec_k) in ensemble.iter().enumerate() {
            let c = v[(e, k)];
            for (p, x) in psi.iter_mut().zip(vec_k) {
                *p += c * x;
            }
        }
        let w: f64 = psi.iter().map(|z| z.norm_sqr()).sum();
        if w < EIGEN_FLOOR {
            continue;
        }
        probabilities.push(w);
        states.push(PureStateVector::normalized(psi).expect("nonzero component"));
    }
    PureDecomposition { probabilities, states }
}

/// Default convex-roof ensemble size for a state of the given rank.
pub fn default_ensemble_size(rank: usize) -> usize {
    rank.max(1)
}

/// Minimizes `sum_e p_e per_pure(psi_e)` over pure-state decompositions of
/// `rho` with `m` components, parameterized through the mixing theorem.
pub fn minimize_over_decompositions(
    rho: &BipartiteState,
    per_pure: &mut dyn FnMut(&PureStateVector) -> f64,
    ensemble_size: Option<usize>,
    cfg: &OptimizerConfig,
) -> Result<OptimizationOutcome<PureDecomposition>> {
    let ensemble = weighted_eigenvectors(rho.matrix());
    let rank = ensemble.len();
    let m = ensemble_size.unwrap_or_else(|| default_ensemble_size(rank));
    if m < rank {
        return Err(Error::EnsembleTooSmall { ensemble: m, rank });
    }
    let mut roof = |dec: &PureDecomposition| -> f64 {
        dec.probabilities
            .iter()
            .zip(&dec.states)
            .map(|(p, s)| p * per_pure(s))
            .sum()
    };
    if m == 1 {
        cfg.validate()?;
        let dec = decomposition_from_isometry(&ensemble, &ComplexMatrix::identity(1));
        let value = roof(&dec);
        if !value.is_finite() {
            return Err(Error::Optimizer(format!("objective evaluated to {value}")));
        }
        return Ok(OptimizationOutcome {
            value,
            certificate: dec,
            bound: BoundType::UpperBound,
            diagnostics: Diagnostics {
                restarts_used: 0,
                best_restart: 0,
                final_step: 0.0,
                evaluations: 1,
            },
        });
    }
    multistart(
        cfg,
        m * m,
        UNITARY_STEP,
        |r| {
            Ok(if r == 0 {
                ComplexMatrix::identity(m)
            } else {
                Sampler::new(derive_seed(cfg.seed, r as u64)).unitary(m)
            })
        },
        |base, h| decomposition_from_isometry(&ensemble, &isometry_from_params(base, rank, h)),
        &mut roof,
    )
}
