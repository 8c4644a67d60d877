//! Seeded property suites for the measure axioms and the unitary lemmas.
//!
//! Every trial draws from its own sampler seeded with
//! `derive_seed(seed, trial)`, so a failure can be replayed from the seed in
//! its record.

use serde::Serialize;

use crate::channel::{hadamard_a, is_incoherent_unitary, SqiChannel};
use crate::error::{Error, Result};
use crate::factory::{derive_seed, is_iq, Sampler, MEMBERSHIP_TOL};
use crate::linalg::ComplexMatrix;
use crate::measures::{
    bd_l1_closed_form, bd_relative_entropy, coherence, discord, entanglement, schmidt_entropy, wootters_eof,
    MeasureKind,
};
use crate::optimizer::OptimizerConfig;
use crate::state::{tensor_product, BipartiteState, DensityMatrix};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Suite {
    Bd,
    Coherence,
    Discord,
    Entanglement,
    Lemmas,
    All,
}

impl Suite {
    pub const EACH: [Suite; 5] = [Suite::Bd, Suite::Coherence, Suite::Discord, Suite::Entanglement, Suite::Lemmas];

    pub fn name(self) -> &'static str {
        match self {
            Suite::Bd => "bd",
            Suite::Coherence => "coherence",
            Suite::Discord => "discord",
            Suite::Entanglement => "entanglement",
            Suite::Lemmas => "lemmas",
            Suite::All => "all",
        }
    }

    /// Closed-form suites run 200 trials, optimizer suites 25.
    pub fn default_trials(self) -> usize {
        match self {
            Suite::Discord | Suite::Entanglement => 25,
            _ => 200,
        }
    }
}

impl std::str::FromStr for Suite {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Suite::EACH
            .into_iter()
            .chain([Suite::All])
            .find(|k| k.name() == s)
            .ok_or_else(|| Error::InvalidArgument(format!("unknown suite '{s}'")))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Failure {
    pub check: String,
    pub seed: u64,
    pub witness: Vec<f64>,
    /// Amount by which the bound was exceeded.
    pub margin: f64,
}

/// A BD increase produced by a deliberately non-SQI channel.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OutOfClass {
    pub channel: String,
    pub seed: u64,
    pub before: f64,
    pub after: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SuiteReport {
    pub suite: String,
    pub trials: usize,
    pub checks: Vec<String>,
    pub failures: Vec<Failure>,
    pub out_of_class: Vec<OutOfClass>,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SuiteOptions {
    /// `None` uses the suite default.
    pub trials: Option<usize>,
    pub seed: u64,
    /// Also apply a Hadamard on A and record the resulting BD increase.
    pub adversarial: bool,
    pub optimizer: OptimizerConfig,
}

impl Default for SuiteOptions {
    fn default() -> Self {
        Self {
            trials: None,
            seed: 0,
            adversarial: false,
            optimizer: OptimizerConfig {
                restarts: 3,
                tolerance: 1e-8,
                inner_restarts: 1,
                inner_max_iterations: 10,
                ..OptimizerConfig::default()
            },
        }
    }
}

struct Recorder {
    checks: Vec<String>,
    failures: Vec<Failure>,
    out_of_class: Vec<OutOfClass>,
}

impl Recorder {
    fn new() -> Self {
        Self {
            checks: Vec::new(),
            failures: Vec::new(),
            out_of_class: Vec::new(),
        }
    }

    fn register(&mut self, check: &str) {
        if !self.checks.iter().any(|c| c == check) {
            self.checks.push(check.to_string());
        }
    }

    /// Records a failure when `excess > 0`.
    fn bound(&mut self, check: &str, seed: u64, excess: f64, witness: &[f64]) {
        self.register(check);
        if excess > 0.0 || excess.is_nan() {
            self.failures.push(Failure {
                check: check.to_string(),
                seed,
                witness: witness.to_vec(),
                margin: excess,
            });
        }
    }

    fn error(&mut self, check: &str, seed: u64, err: &Error) {
        self.register(check);
        self.failures.push(Failure {
            check: format!("{check}: {err}"),
            seed,
            witness: Vec::new(),
            margin: f64::NAN,
        });
    }

    fn finish(self, suite: Suite, trials: usize) -> SuiteReport {
        SuiteReport {
            suite: suite.name().to_string(),
            trials,
            pass: self.failures.is_empty(),
            checks: self.checks,
            failures: self.failures,
            out_of_class: self.out_of_class,
        }
    }
}

pub fn run_suite(suite: Suite, opts: &SuiteOptions) -> Result<SuiteReport> {
    if opts.trials == Some(0) {
        return Err(Error::InvalidArgument("trials must be at least 1".into()));
    }
    opts.optimizer.validate()?;
    if suite == Suite::All {
        let parts: Vec<SuiteReport> = Suite::EACH
            .into_iter()
            .map(|s| run_suite(s, opts))
            .collect::<Result<_>>()?;
        let mut rec = Recorder::new();
        let mut trials = 0;
        for p in parts {
            trials += p.trials;
            rec.checks.extend(p.checks.into_iter().map(|c| format!("{}/{c}", p.suite)));
            rec.failures.extend(p.failures.into_iter().map(|mut f| {
                f.check = format!("{}/{}", p.suite, f.check);
                f
            }));
            rec.out_of_class.extend(p.out_of_class);
        }
        return Ok(rec.finish(Suite::All, trials));
    }
    let trials = opts.trials.unwrap_or_else(|| suite.default_trials());
    let mut rec = Recorder::new();
    for t in 0..trials {
        let seed = derive_seed(opts.seed, t as u64);
        let mut s = Sampler::new(seed);
        match suite {
            Suite::Bd => bd_trial(&mut rec, &mut s, seed, opts.adversarial),
            Suite::Coherence => coherence_trial(&mut rec, &mut s, seed),
            Suite::Discord => discord_trial(&mut rec, &mut s, seed, &opts.optimizer),
            Suite::Entanglement => entanglement_trial(&mut rec, &mut s, seed, &opts.optimizer),
            Suite::Lemmas => lemma_trial(&mut rec, &mut s, seed),
            Suite::All => unreachable!(),
        }
    }
    Ok(rec.finish(suite, trials))
}

fn dims(s: &mut Sampler) -> (usize, usize) {
    (2 + s.index(2), 1 + s.index(3))
}

fn any_rank(s: &mut Sampler, d: usize) -> DensityMatrix {
    let rank = 1 + s.index(d);
    s.density(d, rank)
}

fn random_state(s: &mut Sampler, d_a: usize, d_b: usize) -> BipartiteState {
    let rank = 1 + s.index(d_a * d_b);
    s.bipartite(d_a, d_b, rank)
}

/// Product of incoherent Kraus sets on A and on B.
fn doubly_incoherent_channel(s: &mut Sampler, d_a: usize, d_b: usize) -> SqiChannel {
    let side = |s: &mut Sampler, d: usize| -> Vec<ComplexMatrix> {
        s.sqi_channel(d, 1)
            .terms()
            .iter()
            .map(|(a, b)| a.scale(b[(0, 0)]))
            .collect()
    };
    let a = side(s, d_a);
    let b = side(s, d_b);
    let terms = a
        .iter()
        .flat_map(|ka| b.iter().map(move |kb| (ka.clone(), kb.clone())))
        .collect();
    SqiChannel::new(terms).expect("product of complete incoherent sets")
}

const EXACT_TOL: f64 = 1e-8;
const VANISH_TOL: f64 = 1e-10;

fn bd_trial(rec: &mut Recorder, s: &mut Sampler, seed: u64, adversarial: bool) {
    let (d_a, d_b) = dims(s);
    let iq = s.iq_state(d_a, d_b);
    let (re, l1) = (bd_relative_entropy(&iq).value, bd_l1_closed_form(&iq).value);
    rec.bound("vanishing-on-iq", seed, re.max(l1) - VANISH_TOL, &[re, l1]);

    let rho = random_state(s, d_a, d_b);
    let v = bd_relative_entropy(&rho).value;
    if v > 1e-6 {
        rec.bound("positive-implies-not-iq", seed, if is_iq(&rho, MEMBERSHIP_TOL) { v } else { 0.0 }, &[v]);
    }

    let ch = s.sqi_channel(d_a, d_b);
    let out = ch.apply(&rho).expect("dims match");
    let after = bd_relative_entropy(&out).value;
    rec.bound("sqi-monotone-relative-entropy", seed, after - v - EXACT_TOL, &[v, after]);

    // entrywise l1 is contractive only for incoherent factors on both sides
    let ch = doubly_incoherent_channel(s, d_a, d_b);
    let (l0, l1_after) = (bd_l1_closed_form(&rho).value, bd_l1_closed_form(&ch.apply(&rho).expect("dims")).value);
    rec.bound("incoherent-monotone-l1", seed, l1_after - l0 - EXACT_TOL, &[l0, l1_after]);

    let u_a = s.incoherent_unitary(d_a).to_matrix();
    let u_b = s.unitary(d_b);
    let moved = rho.local_unitary(Some(&u_a), Some(&u_b));
    let drift = (bd_relative_entropy(&moved).value - v).abs();
    rec.bound("local-unitary-invariance-relative-entropy", seed, drift - EXACT_TOL, &[v, drift]);
    let w_b = s.incoherent_unitary(d_b).to_matrix();
    let moved = rho.local_unitary(Some(&u_a), Some(&w_b));
    let drift = (bd_l1_closed_form(&moved).value - l0).abs();
    rec.bound("incoherent-unitary-invariance-l1", seed, drift - EXACT_TOL, &[l0, drift]);

    if adversarial {
        // |0><0| (x) rho_B is IQ; a Hadamard on A makes it coherent
        let rho_b = any_rank(s, d_b);
        let free = tensor_product(&DensityMatrix::from_diagonal(&[1.0, 0.0]).expect("simplex"), &rho_b)
            .expect("small dims");
        let before = bd_relative_entropy(&free).value;
        let after = bd_relative_entropy(&hadamard_a(d_b).apply_bipartite(&free).expect("dims")).value;
        if after > before + EXACT_TOL {
            rec.out_of_class.push(OutOfClass {
                channel: "hadamard-a".into(),
                seed,
                before,
                after,
            });
        }
    }
}

fn coherence_trial(rec: &mut Recorder, s: &mut Sampler, seed: u64) {
    let cfg = OptimizerConfig::default();
    let kind = MeasureKind::RelativeEntropy;
    let c = |rho: &DensityMatrix| coherence(rho, kind, None, &cfg).expect("closed form").value;
    let d = 2 + s.index(3);
    let diag = DensityMatrix::from_diagonal(&s.simplex(d)).expect("simplex");
    rec.bound("vanishing-on-diagonal", seed, c(&diag) - VANISH_TOL, &[c(&diag)]);

    let rank = 1 + s.index(d);
    let rho = s.density(d, rank);
    let c0 = c(&rho);
    let ch = s.sqi_channel(d, 1);
    let out = ch.apply(&BipartiteState::single_party(rho.clone())).expect("dims");
    let c1 = c(out.state());
    rec.bound("incoherent-monotone", seed, c1 - c0 - EXACT_TOL, &[c0, c1]);

    let sigma = any_rank(s, d);
    let p = s.uniform();
    let mix = DensityMatrix::mixture(&[p, 1.0 - p], &[rho.clone(), sigma.clone()]).expect("same dim");
    let convex = p * c0 + (1.0 - p) * c(&sigma);
    rec.bound("convex", seed, c(&mix) - convex - EXACT_TOL, &[c(&mix), convex]);

    let partner = any_rank(s, 2);
    let with_b = coherence(&rho, kind, Some(&partner), &cfg).expect("closed form").value;
    rec.bound("partner-independent", seed, (with_b - c0).abs() - 1e-9, &[c0, with_b]);
}

fn discord_trial(rec: &mut Recorder, s: &mut Sampler, seed: u64, cfg: &OptimizerConfig) {
    let kind = MeasureKind::RelativeEntropy;
    let cfg = OptimizerConfig { seed, ..cfg.clone() };
    let cq = s.cq_state(2, 2);
    match discord(&cq, kind, &cfg) {
        Ok(r) => rec.bound("vanishing-on-cq", seed, r.value - 1e-6, &[r.value]),
        Err(e) => rec.error("vanishing-on-cq", seed, &e),
    }

    let psi = s.pure_bipartite(2, 2);
    let schmidt = schmidt_entropy(&psi, 2, 2);
    let u_a = s.unitary(2);
    let u_b = s.unitary(2);
    let rho = psi.to_bipartite(2, 2).expect("dims");
    for (check, state) in [
        ("pure-equals-schmidt", rho.clone()),
        ("pure-after-local-unitaries", rho.local_unitary(Some(&u_a), Some(&u_b))),
    ] {
        match discord(&state, kind, &cfg) {
            Ok(r) => rec.bound(check, seed, (r.value - schmidt).abs() - 1e-5, &[r.value, schmidt]),
            Err(e) => rec.error(check, seed, &e),
        }
    }

    let mixed = random_state(s, 2, 2);
    let bd = bd_relative_entropy(&mixed).value;
    match discord(&mixed, kind, &cfg) {
        Ok(r) => rec.bound("discord-below-bd", seed, r.value - bd - 1e-9, &[r.value, bd]),
        Err(e) => rec.error("discord-below-bd", seed, &e),
    }
}

fn entanglement_trial(rec: &mut Recorder, s: &mut Sampler, seed: u64, cfg: &OptimizerConfig) {
    let kind = MeasureKind::RelativeEntropy;
    let cfg = OptimizerConfig { seed, ..cfg.clone() };
    let e = |rho: &BipartiteState| entanglement(rho, kind, &cfg).map(|r| r.value);

    let terms = 1 + s.index(4);
    let (ra, rb) = (1 + s.index(2), 1 + s.index(2));
    let sep = s.separable_state(2, 2, terms, ra, rb);
    match e(&sep) {
        Ok(v) => rec.bound("vanishing-on-separable", seed, v - 5e-3, &[v]),
        Err(err) => rec.error("vanishing-on-separable", seed, &err),
    }

    let psi = s.pure_bipartite(2, 2);
    let schmidt = schmidt_entropy(&psi, 2, 2);
    match e(&psi.to_bipartite(2, 2).expect("dims")) {
        Ok(v) => rec.bound("pure-equals-schmidt", seed, (v - schmidt).abs() - 1e-5, &[v, schmidt]),
        Err(err) => rec.error("pure-equals-schmidt", seed, &err),
    }

    let rank = 2 + s.index(3);
    let rho = s.bipartite(2, 2, rank);
    let oracle = wootters_eof(&rho).expect("two qubits");
    let value = match e(&rho) {
        Ok(v) => v,
        Err(err) => return rec.error("matches-eof", seed, &err),
    };
    rec.bound("matches-eof", seed, (value - oracle).abs() - 5e-3, &[value, oracle]);
    let disc = discord(&rho, kind, &cfg).map_or(f64::NAN, |r| r.value);
    let bd = bd_relative_entropy(&rho).value;
    rec.bound("ordering", seed, (value - disc - 5e-3).max(disc - bd - 1e-9), &[value, disc, bd]);

    let locc = s.one_round_locc(2, 2);
    let out = locc.apply_bipartite(&rho).expect("dims");
    match e(&out) {
        Ok(after) => rec.bound("locc-monotone", seed, after - value - 5e-3, &[value, after]),
        Err(err) => rec.error("locc-monotone", seed, &err),
    }
}

fn lemma_trial(rec: &mut Recorder, s: &mut Sampler, seed: u64) {
    let d = 2 + s.index(3);
    let u = s.incoherent_unitary(d);
    let m = u.to_matrix();
    let inv = u.invert().to_matrix();

    // a unitary channel has a single Kraus operator up to phase: any
    // isometric remix of {U} gives multiples of U
    let mix = s.unitary(2);
    let remixed = [m.scale(mix[(0, 0)]), m.scale(mix[(1, 0)])];
    let dev = remixed
        .iter()
        .map(|k| {
            let overlap = m.adjoint().matmul(k).expect("square").trace() / d as f64;
            k.max_abs_diff(&m.scale(overlap))
        })
        .fold(0.0f64, f64::max);
    rec.bound("unitary-kraus-unique", seed, dev - 1e-12, &[dev]);

    let not_inc = if is_incoherent_unitary(&inv) { 0.0 } else { 1.0 };
    let id_dev = (&m * &inv).max_abs_diff(&ComplexMatrix::identity(d));
    rec.bound("inverse-is-incoherent", seed, not_inc + id_dev - 1e-12, &[not_inc, id_dev]);

    let cfg = OptimizerConfig::default();
    let rho = any_rank(s, d);
    for kind in [MeasureKind::RelativeEntropy, MeasureKind::L1] {
        let c0 = coherence(&rho, kind, None, &cfg).expect("closed form").value;
        for w in [&m, &inv] {
            let c1 = coherence(&rho.conjugate(w), kind, None, &cfg).expect("closed form").value;
            rec.bound(&format!("coherence-invariant-{}", kind.name()), seed, (c1 - c0).abs() - 1e-9, &[c0, c1]);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn quick(trials: usize) -> SuiteOptions {
        SuiteOptions {
            trials: Some(trials),
            seed: 7,
            ..SuiteOptions::default()
        }
    }

    #[test]
    fn closed_form_suites_pass() {
        for suite in [Suite::Bd, Suite::Coherence, Suite::Lemmas] {
            let r = run_suite(suite, &quick(50)).unwrap();
            assert!(r.pass, "{suite:?}: {:?}", r.failures);
            assert_eq!(r.trials, 50);
            assert!(r.out_of_class.is_empty());
        }
    }

    #[test]
    fn optimizer_suites_pass() {
        for suite in [Suite::Discord, Suite::Entanglement] {
            let r = run_suite(suite, &quick(2)).unwrap();
            assert!(r.pass, "{suite:?}: {:?}", r.failures);
        }
    }

    #[test]
    fn adversarial_hadamard_is_out_of_class() {
        let opts = SuiteOptions {
            adversarial: true,
            ..quick(10)
        };
        let r = run_suite(Suite::Bd, &opts).unwrap();
        assert!(r.pass);
        assert!(!r.out_of_class.is_empty());
        assert!(r.out_of_class.iter().all(|o| o.after > o.before));
    }

    #[test]
    fn rejects_zero_trials() {
        assert!(run_suite(Suite::Bd, &quick(0)).is_err());
        assert!("nope".parse::<Suite>().is_err());
        assert_eq!("all".parse::<Suite>().unwrap(), Suite::All);
    }

    #[test]
    fn deterministic_under_seed() {
        let a = run_suite(Suite::Coherence, &quick(5)).unwrap();
        let b = run_suite(Suite::Coherence, &quick(5)).unwrap();
        assert_eq!(a, b);
    }
}
