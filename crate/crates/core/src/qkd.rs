//! Devetak-Winter key rates for a known bipartite state.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::factory::check_unitary;
use crate::linalg::{ComplexMatrix, ZERO};
use crate::state::{binary_entropy, matrix_entropy, purify, shannon_unchecked, BipartiteState};

/// A state together with the key-generation bases. `z_a` and `z_b` rotate
/// the measurement bases onto the computational basis.
#[derive(Debug, Clone, PartialEq)]
pub struct QkdSetup {
    state: BipartiteState,
    z_a: ComplexMatrix,
    z_b: ComplexMatrix,
}

impl QkdSetup {
    /// Computational-basis measurements on both sides.
    pub fn new(state: BipartiteState) -> Self {
        let (d_a, d_b) = state.dims();
        Self {
            state,
            z_a: ComplexMatrix::identity(d_a),
            z_b: ComplexMatrix::identity(d_b),
        }
    }

    pub fn with_bases(state: BipartiteState, z_a: ComplexMatrix, z_b: ComplexMatrix) -> Result<Self> {
        check_unitary(&z_a, state.d_a())?;
        check_unitary(&z_b, state.d_b())?;
        Ok(Self { state, z_a, z_b })
    }

    pub fn state(&self) -> &BipartiteState {
        &self.state
    }

    pub fn bases(&self) -> (&ComplexMatrix, &ComplexMatrix) {
        (&self.z_a, &self.z_b)
    }

    /// `(Z_A (x) Z_B) rho (Z_A (x) Z_B)^dag`.
    pub fn rotated_state(&self) -> BipartiteState {
        self.state.local_unitary(Some(&self.z_a), Some(&self.z_b))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct KeyRateReport {
    pub key_rate: f64,
    pub s_za_e: f64,
    /// `S(Z_A|E)` evaluated on an explicit purification.
    pub s_za_e_purified: f64,
    pub s_za_zb: f64,
    pub consistency_gap: f64,
}

/// `S(Z_A|E)` as `S(rho^{Adiag}) - S(rho)`, with the gap to the value
/// obtained from a purification `|psi_ABE>`.
pub fn conditional_entropy_za_e(setup: &QkdSetup) -> (f64, f64) {
    let rho = setup.rotated_state();
    let direct = dephased_entropy(&rho) - matrix_entropy(rho.matrix());
    let purified = purified_path(&rho);
    (direct, (direct - purified).abs())
}

fn dephased_entropy(rho: &BipartiteState) -> f64 {
    (0..rho.d_a()).map(|j| matrix_entropy(&rho.block(j, j).hermitian_part())).sum()
}

// S(rho_AE^{Adiag}) - S(rho_E) from the purification amplitudes psi[(a, b, e)].
fn purified_path(rho: &BipartiteState) -> f64 {
    let (d_a, d_b) = rho.dims();
    let psi = purify(rho.state());
    let r = psi.dim() / (d_a * d_b);
    let amp = psi.amplitudes();
    let at = |a: usize, b: usize, e: usize| amp[(a * d_b + b) * r + e];

    let mut rho_e = ComplexMatrix::zeros(r, r);
    let mut joint = 0.0;
    for a in 0..d_a {
        // E-block of rho_AE for A outcome a
        let mut block = ComplexMatrix::zeros(r, r);
        for e in 0..r {
            for f in 0..r {
                let mut s = ZERO;
                for b in 0..d_b {
                    s += at(a, b, e) * at(a, b, f).conj();
                }
                block[(e, f)] = s;
            }
        }
        joint += matrix_entropy(&block);
        rho_e = &rho_e + &block;
    }
    joint - matrix_entropy(&rho_e)
}

/// `H(j_A, j_B) - H(j_B)` for the joint measurement distribution.
pub fn conditional_entropy_za_zb(setup: &QkdSetup) -> f64 {
    let rho = setup.rotated_state();
    let (d_a, d_b) = rho.dims();
    let joint: Vec<f64> = rho.matrix().diagonal().iter().map(|z| z.re.max(0.0)).collect();
    let marginal: Vec<f64> = (0..d_b).map(|b| (0..d_a).map(|a| joint[a * d_b + b]).sum()).collect();
    shannon_unchecked(&joint) - shannon_unchecked(&marginal)
}

/// `K = S(Z_A|E) - S(Z_A|Z_B)`. Negative rates are returned as they are.
pub fn devetak_winter_rate(setup: &QkdSetup) -> KeyRateReport {
    let (s_za_e, gap) = conditional_entropy_za_e(setup);
    let s_za_zb = conditional_entropy_za_zb(setup);
    let s_za_e_purified = purified_path(&setup.rotated_state());
    KeyRateReport {
        key_rate: s_za_e - s_za_zb,
        s_za_e,
        s_za_e_purified,
        s_za_zb,
        consistency_gap: gap,
    }
}

/// `1 - h(e_b) - h(e_p)` for independent bit and phase errors.
pub fn bb84_reference_rate(e_b: f64, e_p: f64) -> Result<f64> {
    for (name, e) in [("e_b", e_b), ("e_p", e_p)] {
        if !(0.0..=0.5).contains(&e) {
            return Err(Error::InvalidArgument(format!("{name} = {e} is outside [0, 0.5]")));
        }
    }
    Ok(1.0 - binary_entropy(e_b) - binary_entropy(e_p))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::factory::{bell_diagonal, bell_diagonal_errors, bell_state, Sampler};
    use crate::measures::bd_relative_entropy;
    use crate::state::DensityMatrix;

    #[test]
    fn bell_rate() {
        let r = devetak_winter_rate(&QkdSetup::new(bell_state(0).unwrap()));
        assert!((r.key_rate - 1.0).abs() < 1e-10);
        assert!(r.s_za_zb.abs() < 1e-12);
        assert!(r.consistency_gap < 1e-8);
    }

    #[test]
    fn maximally_mixed_rate_is_negative() {
        let s = BipartiteState::new(2, 2, DensityMatrix::maximally_mixed(4)).unwrap();
        let r = devetak_winter_rate(&QkdSetup::new(s));
        assert!(r.s_za_e.abs() < 1e-10);
        assert!((r.s_za_zb - 1.0).abs() < 1e-12);
        assert!((r.key_rate + 1.0).abs() < 1e-10);
    }

    #[test]
    fn bell_diagonal_values() {
        let l = [0.4, 0.3, 0.2, 0.1];
        let (v, gap) = conditional_entropy_za_e(&QkdSetup::new(bell_diagonal(&l).unwrap()));
        let expected = 1.0 + binary_entropy(0.7) - shannon_unchecked(&l);
        assert!((v - expected).abs() < 1e-10);
        assert!(gap < 1e-8);
        let zz = conditional_entropy_za_zb(&QkdSetup::new(bell_diagonal_errors(0.1, 0.0).unwrap()));
        assert!((zz - binary_entropy(0.1)).abs() < 1e-12);
    }

    #[test]
    fn reference_rate() {
        assert_eq!(bb84_reference_rate(0.0, 0.0).unwrap(), 1.0);
        assert!((bb84_reference_rate(0.5, 0.5).unwrap() + 1.0).abs() < 1e-15);
        assert!((bb84_reference_rate(0.05, 0.05).unwrap() - 0.4272060857680875).abs() < 1e-12);
        assert!(bb84_reference_rate(0.6, 0.0).is_err());
        assert!(bb84_reference_rate(0.0, -0.1).is_err());
        let r = devetak_winter_rate(&QkdSetup::new(bell_diagonal_errors(0.05, 0.05).unwrap()));
        assert!((r.key_rate - 0.4272060857680875).abs() < 1e-9);
    }

    #[test]
    fn iq_state_has_no_za_e() {
        let iq = Sampler::new(4).iq_state(3, 2);
        let (v, gap) = conditional_entropy_za_e(&QkdSetup::new(iq));
        assert!(v.abs() < 1e-9 && gap < 1e-8);
    }

    #[test]
    fn matches_relative_entropy_discord() {
        let mut s = Sampler::new(9);
        for _ in 0..10 {
            let rho = s.bipartite(3, 2, 4);
            let (v, gap) = conditional_entropy_za_e(&QkdSetup::new(rho.clone()));
            assert!((v - bd_relative_entropy(&rho).value).abs() < 1e-12);
            assert!(gap < 1e-8, "{gap}");
        }
    }

    #[test]
    fn rejects_non_unitary_basis() {
        let z = ComplexMatrix::identity(2).scale_real(2.0);
        assert!(QkdSetup::with_bases(bell_state(0).unwrap(), z, ComplexMatrix::identity(2)).is_err());
    }
}
