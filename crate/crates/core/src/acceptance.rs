//! Acceptance table: each criterion recomputes its checks from seeded
//! samples and compares them with analytic oracles.

use std::time::Instant;

use serde::Serialize;

use crate::channel::is_incoherent_unitary;
use crate::factory::{bell_diagonal_errors, derive_seed, maximally_coherent, werner, Sampler};
use crate::linalg::ComplexMatrix;
use crate::measures::{
    bd_l1, bd_l1_closed_form, bd_relative_entropy, coherence, discord, entanglement, schmidt_entropy, wootters_eof,
    L1Mode, MeasureKind,
};
use crate::optimizer::OptimizerConfig;
use crate::qkd::{bb84_reference_rate, conditional_entropy_za_e, devetak_winter_rate, QkdSetup};
use crate::state::{BipartiteState, DensityMatrix};

/// One compared quantity: `computed` must not exceed `tolerance`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub label: String,
    /// Worst deviation from the expected value over all samples.
    pub computed: f64,
    pub expected: String,
    pub tolerance: f64,
    pub pass: bool,
}

impl Check {
    fn new(label: &str, computed: f64, expected: &str, tolerance: f64) -> Self {
        Self {
            label: label.to_string(),
            computed,
            expected: expected.to_string(),
            tolerance,
            pass: computed <= tolerance,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CriterionRow {
    pub id: usize,
    pub name: String,
    pub checks: Vec<Check>,
    pub seconds: f64,
    pub time_limit: Option<f64>,
    pub pass: bool,
}

impl CriterionRow {
    /// `[PASS] 3 name: label computed <= tol; ... (1.2 s / 10 s)`.
    pub fn summary_line(&self) -> String {
        let checks: Vec<String> = self
            .checks
            .iter()
            .map(|c| format!("{} {:.3e} <= {:.0e}", c.label, c.computed, c.tolerance))
            .collect();
        let limit = self.time_limit.map_or_else(String::new, |t| format!(" / {t} s"));
        format!(
            "[{}] {:>2} {}: {} ({:.2} s{})",
            if self.pass { "PASS" } else { "FAIL" },
            self.id,
            self.name,
            checks.join("; "),
            self.seconds,
            limit
        )
    }
}

fn row(id: usize, name: &str, limit: Option<f64>, run: impl FnOnce() -> Vec<Check>) -> CriterionRow {
    let start = Instant::now();
    let checks = run();
    let seconds = start.elapsed().as_secs_f64();
    let pass = checks.iter().all(|c| c.pass) && limit.is_none_or(|t| seconds < t);
    CriterionRow {
        id,
        name: name.to_string(),
        checks,
        seconds,
        time_limit: limit,
        pass,
    }
}

const BASE_SEED: u64 = 0x5eed_2024;

fn sampler(criterion: u64) -> Sampler {
    Sampler::new(derive_seed(BASE_SEED, criterion))
}

fn small_dims(s: &mut Sampler) -> (usize, usize) {
    (2 + s.index(2), 1 + s.index(3))
}

/// Optimizer settings for the convex-roof criterion.
pub fn roof_config() -> OptimizerConfig {
    OptimizerConfig {
        restarts: 3,
        max_iterations: 2000,
        tolerance: 1e-8,
        inner_restarts: 1,
        inner_max_iterations: 10,
        ..OptimizerConfig::default()
    }
}

pub fn iq_vanishing() -> CriterionRow {
    row(1, "IQ states have zero BD", Some(5.0), || {
        let mut s = sampler(1);
        let (mut re, mut l1) = (0.0f64, 0.0f64);
        for _ in 0..200 {
            let (d_a, d_b) = small_dims(&mut s);
            let iq = s.iq_state(d_a, d_b);
            re = re.max(bd_relative_entropy(&iq).value);
            l1 = l1.max(bd_l1_closed_form(&iq).value);
        }
        vec![
            Check::new("relative-entropy max", re, "0", 1e-10),
            Check::new("l1 max", l1, "0", 1e-10),
        ]
    })
}

pub fn sqi_monotonicity() -> CriterionRow {
    row(2, "BD non-increasing under SQI channels", Some(20.0), || {
        let mut s = sampler(2);
        let mut worst = f64::NEG_INFINITY;
        for _ in 0..200 {
            let (d_a, d_b) = small_dims(&mut s);
            let rank = 1 + s.index(d_a * d_b);
            let rho = s.bipartite(d_a, d_b, rank);
            let ch = s.sqi_channel(d_a, d_b);
            let out = ch.apply(&rho).expect("dims match");
            worst = worst.max(bd_relative_entropy(&out).value - bd_relative_entropy(&rho).value);
        }
        vec![Check::new("max increase", worst, "<= 0", 1e-8)]
    })
}

pub fn local_invariance() -> CriterionRow {
    row(3, "BD invariant under incoherent (x) arbitrary unitaries", Some(10.0), || {
        let mut s = sampler(3);
        let (mut re, mut l1) = (0.0f64, 0.0f64);
        for _ in 0..100 {
            let (d_a, d_b) = small_dims(&mut s);
            let rho = s.bipartite(d_a, d_b, d_a * d_b);
            let u_a = s.incoherent_unitary(d_a).to_matrix();
            let u_b = s.unitary(d_b);
            let moved = rho.local_unitary(Some(&u_a), Some(&u_b));
            re = re.max((bd_relative_entropy(&moved).value - bd_relative_entropy(&rho).value).abs());
            l1 = l1.max((bd_l1_closed_form(&moved).value - bd_l1_closed_form(&rho).value).abs());
        }
        vec![
            Check::new("relative-entropy drift", re, "0", 1e-8),
            Check::new("l1 drift", l1, "0", 1e-8),
        ]
    })
}

pub fn coherence_consistency() -> CriterionRow {
    row(4, "coherence is BD of a product state", None, || {
        let cfg = OptimizerConfig::default();
        let kind = MeasureKind::RelativeEntropy;
        let mut s = sampler(4);
        let half = DensityMatrix::maximally_mixed(2);
        let mut spread = 0.0f64;
        for _ in 0..100 {
            let d = 2 + s.index(2);
            let (rank_a, rank_b) = (1 + s.index(d), 1 + s.index(2));
            let rho_a = s.density(d, rank_a);
            let rho_b = s.density(2, rank_b);
            let vals = [None, Some(&half), Some(&rho_b)]
                .map(|b| coherence(&rho_a, kind, b, &cfg).expect("closed form").value);
            let hi = vals.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            let lo = vals.iter().cloned().fold(f64::INFINITY, f64::min);
            spread = spread.max(hi - lo);
        }
        let plus = maximally_coherent(&[0.0, 0.0]).expect("phases").to_density();
        let c_plus = coherence(&plus, kind, None, &cfg).expect("closed form").value;
        vec![
            Check::new("spread over partners", spread, "0", 1e-9),
            Check::new("|C(+) - 1|", (c_plus - 1.0).abs(), "1", 1e-9),
        ]
    })
}

pub fn discord_oracle() -> CriterionRow {
    row(5, "discord matches Schmidt entropy and vanishes on CQ", Some(180.0), || {
        let cfg = OptimizerConfig {
            restarts: 16,
            ..OptimizerConfig::default()
        };
        let kind = MeasureKind::RelativeEntropy;
        let mut s = sampler(5);
        let mut pure_dev = 0.0f64;
        for _ in 0..50 {
            let psi = s.pure_bipartite(2, 2);
            let rho = psi.to_bipartite(2, 2).expect("dims");
            let d = discord(&rho, kind, &cfg).expect("optimizer").value;
            pure_dev = pure_dev.max((d - schmidt_entropy(&psi, 2, 2)).abs());
        }
        let mut cq = 0.0f64;
        for _ in 0..50 {
            let rho = s.cq_state(2, 2);
            cq = cq.max(discord(&rho, kind, &cfg).expect("optimizer").value);
        }
        vec![
            Check::new("pure |D - S|", pure_dev, "Schmidt entropy", 1e-5),
            Check::new("CQ max", cq, "0", 1e-6),
        ]
    })
}

pub fn entanglement_oracle() -> CriterionRow {
    row(6, "entanglement matches two-qubit EoF", Some(600.0), || {
        let cfg = roof_config();
        let kind = MeasureKind::RelativeEntropy;
        let mut checks = Vec::new();
        for p in [0.4, 0.5, 0.7, 0.9, 1.0] {
            let w = werner(p).expect("p in range");
            let oracle = wootters_eof(&w).expect("two qubits");
            let e = entanglement(&w, kind, &cfg).expect("optimizer").value;
            checks.push(Check::new(&format!("werner({p})"), (e - oracle).abs(), &format!("{oracle:.4}"), 5e-3));
        }
        let mut s = sampler(6);
        let mut sep = 0.0f64;
        for _ in 0..25 {
            let terms = 1 + s.index(4);
            let (rank_a, rank_b) = (1 + s.index(2), 1 + s.index(2));
            let rho = s.separable_state(2, 2, terms, rank_a, rank_b);
            sep = sep.max(entanglement(&rho, kind, &cfg).expect("optimizer").value);
        }
        checks.push(Check::new("separable max", sep, "0", 5e-3));
        checks
    })
}

pub fn purification_paths() -> CriterionRow {
    row(7, "S(Z_A|E) agrees across purification paths", Some(30.0), || {
        let mut s = sampler(7);
        let mut gap = 0.0f64;
        for _ in 0..100 {
            let (d_a, d_b) = (1 + s.index(3), 1 + s.index(3));
            let rank = 1 + s.index(d_a * d_b);
            let rho = s.bipartite(d_a, d_b, rank);
            gap = gap.max(conditional_entropy_za_e(&QkdSetup::new(rho)).1);
        }
        vec![Check::new("max gap", gap, "0", 1e-8)]
    })
}

/// Error grid `{0, 0.01, ..., 0.25}`.
pub fn error_grid() -> Vec<f64> {
    (0..=25).map(|k| k as f64 / 100.0).collect()
}

fn key_rate(e_b: f64, e_p: f64) -> f64 {
    devetak_winter_rate(&QkdSetup::new(bell_diagonal_errors(e_b, e_p).expect("grid point"))).key_rate
}

pub fn key_rate_oracle() -> CriterionRow {
    row(8, "key rate on Bell-diagonal states", Some(5.0), || {
        let grid = error_grid();
        let mut dev = 0.0f64;
        for (i, &e) in grid.iter().enumerate() {
            // equal errors, plus the mirrored pair for independent e_b, e_p
            for (e_b, e_p) in [(e, e), (e, grid[grid.len() - 1 - i])] {
                dev = dev.max((key_rate(e_b, e_p) - bb84_reference_rate(e_b, e_p).expect("grid")).abs());
            }
        }
        let point = (key_rate(0.05, 0.05) - 0.427206).abs();
        vec![
            Check::new("grid max |K - ref|", dev, "1 - h(e_b) - h(e_p)", 1e-8),
            Check::new("|K(0.05, 0.05) - 0.427206|", point, "0.427206", 1e-6),
        ]
    })
}

pub fn incoherent_unitary_lemmas() -> CriterionRow {
    row(9, "inverse incoherent unitaries", Some(5.0), || {
        let cfg = OptimizerConfig::default();
        let mut s = sampler(9);
        let mut not_incoherent = 0.0;
        let mut drift = 0.0f64;
        for _ in 0..100 {
            let d = 2 + s.index(3);
            let u = s.incoherent_unitary(d);
            let inv = u.invert().to_matrix();
            let prod = &u.to_matrix() * &inv;
            if !is_incoherent_unitary(&inv) || prod.max_abs_diff(&ComplexMatrix::identity(d)) > 1e-12 {
                not_incoherent += 1.0;
            }
            let rank = 1 + s.index(d);
            let rho = s.density(d, rank);
            let c0 = coherence(&rho, MeasureKind::RelativeEntropy, None, &cfg).expect("closed form").value;
            for w in [u.to_matrix(), inv] {
                let c = coherence(&rho.conjugate(&w), MeasureKind::RelativeEntropy, None, &cfg)
                    .expect("closed form")
                    .value;
                drift = drift.max((c - c0).abs());
            }
        }
        vec![
            Check::new("non-incoherent inverses", not_incoherent, "0", 0.0),
            Check::new("coherence drift", drift, "0", 1e-9),
        ]
    })
}

pub fn l1_closed_form() -> CriterionRow {
    row(10, "l1 closed form matches the optimizer", Some(120.0), || {
        let cfg = OptimizerConfig {
            restarts: 8,
            max_iterations: 4000,
            tolerance: 1e-12,
            ..OptimizerConfig::default()
        };
        let mut s = sampler(10);
        let mut dev = 0.0f64;
        for _ in 0..25 {
            let rank = 1 + s.index(4);
            let rho: BipartiteState = s.bipartite(2, 2, rank);
            let numeric = bd_l1(&rho, L1Mode::Numeric, &cfg).expect("optimizer").value;
            dev = dev.max((numeric - bd_l1_closed_form(&rho).value).abs());
        }
        vec![Check::new("max |closed - numeric|", dev, "0", 1e-4)]
    })
}

pub fn criteria() -> Vec<(usize, fn() -> CriterionRow)> {
    vec![
        (1, iq_vanishing),
        (2, sqi_monotonicity),
        (3, local_invariance),
        (4, coherence_consistency),
        (5, discord_oracle),
        (6, entanglement_oracle),
        (7, purification_paths),
        (8, key_rate_oracle),
        (9, incoherent_unitary_lemmas),
        (10, l1_closed_form),
    ]
}

pub fn run_all() -> Vec<CriterionRow> {
    criteria().into_iter().map(|(_, f)| f()).collect()
}
