//! Spin-flipped state, DDSE, and Wootters concurrence of two-qubit states.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::qlinalg::{general_eigvals, kron, sigma_y, Operator};

/// Largest imaginary part tolerated on an eigenvalue of `ρρ̃`.
pub const REALNESS_TOL: f64 = 1e-8;
/// Negative eigenvalues of `ρρ̃` down to this value are clamped to zero.
pub const NEGATIVE_CLAMP: f64 = -1e-10;

/// How the eigenvalues of `ρρ̃` enter the difference.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DdseForm {
    /// `√λ1 − √λ2 − √λ3 − √λ4`, equal to the concurrence when positive.
    #[default]
    Rooted,
    /// `λ1 − λ2 − λ3 − λ4`, kept for comparison only.
    Unrooted,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EntanglementSample {
    pub time: f64,
    pub ddse: f64,
    pub concurrence: f64,
    /// Eigenvalues of `ρρ̃`, clamped to ≥ 0 and sorted descending.
    pub lambdas: [f64; 4],
}

fn sigma_yy() -> Operator {
    kron(&sigma_y(), &sigma_y()).expect("2x2 operands")
}

/// `ρ̃ = (σy⊗σy) ρ* (σy⊗σy)`.
pub fn spin_flip(rho: &Operator) -> Result<Operator> {
    require_two_qubit(rho)?;
    let yy = sigma_yy();
    Ok(yy * rho.conj() * yy)
}

fn require_two_qubit(rho: &Operator) -> Result<()> {
    if rho.dim() != 4 {
        return Err(Error::InvalidConfig(format!("two-qubit state must be 4x4, got {0}x{0}", rho.dim())));
    }
    Ok(())
}

/// Eigenvalues of `ρρ̃` after the realness check, clamped and sorted descending.
pub fn spin_flip_eigenvalues(rho: &Operator) -> Result<[f64; 4]> {
    let product = *rho * spin_flip(rho)?;
    let eig = general_eigvals(&product)?;
    let mut lambdas = [0.0; 4];
    for (slot, z) in lambdas.iter_mut().zip(eig) {
        if z.im.abs() >= REALNESS_TOL || z.re < NEGATIVE_CLAMP {
            return Err(Error::NumericalFailure(format!(
                "eigenvalue {z} of rho*rho_tilde is not a non-negative real; the state is not a valid density matrix"
            )));
        }
        *slot = z.re.max(0.0);
    }
    lambdas.sort_by(|a, b| b.total_cmp(a));
    Ok(lambdas)
}

fn difference(lambdas: &[f64; 4], form: DdseForm) -> f64 {
    let v = match form {
        DdseForm::Rooted => lambdas.map(f64::sqrt),
        DdseForm::Unrooted => *lambdas,
    };
    v[0] - v[1] - v[2] - v[3]
}

/// Difference of the descending-sorted square-rooted eigenvalues of `ρρ̃`.
pub fn ddse(rho: &Operator) -> Result<f64> {
    ddse_with(rho, DdseForm::Rooted)
}

pub fn ddse_with(rho: &Operator, form: DdseForm) -> Result<f64> {
    Ok(difference(&spin_flip_eigenvalues(rho)?, form))
}

/// `C(ρ) = max(0, √λ1 − √λ2 − √λ3 − √λ4)`.
pub fn concurrence(rho: &Operator) -> Result<f64> {
    Ok(ddse(rho)?.max(0.0))
}

/// DDSE and concurrence at one time point. The concurrence always uses the
/// rooted form; `form` only selects how the reported DDSE is built.
pub fn sample(time: f64, rho: &Operator, form: DdseForm) -> Result<EntanglementSample> {
    let lambdas = spin_flip_eigenvalues(rho)?;
    let rooted = difference(&lambdas, DdseForm::Rooted);
    Ok(EntanglementSample { time, ddse: difference(&lambdas, form), concurrence: rooted.max(0.0), lambdas })
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex64;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    fn bell() -> Operator {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        Operator::projector(&[c(s), c(0.0), c(0.0), c(s)]).unwrap()
    }

    fn werner(p: f64) -> Operator {
        bell().scale_real(p) + Operator::identity(4).scale_real((1.0 - p) / 4.0)
    }

    #[test]
    fn spin_flip_examples() {
        assert!(spin_flip(&bell()).unwrap().max_diff(&bell()) < 1e-15);
        let mixed = Operator::identity(4).scale_real(0.25);
        assert!(spin_flip(&mixed).unwrap().max_diff(&mixed) < 1e-15);
        let up_up = Operator::projector(&[c(1.0), c(0.0), c(0.0), c(0.0)]).unwrap();
        let down_down = Operator::projector(&[c(0.0), c(0.0), c(0.0), c(1.0)]).unwrap();
        assert!(spin_flip(&up_up).unwrap().max_diff(&down_down) < 1e-15);
        assert!(spin_flip(&Operator::identity(2)).is_err());
    }

    #[test]
    fn ddse_examples() {
        assert!((ddse(&bell()).unwrap() - 1.0).abs() < 1e-12);
        let up_up = Operator::projector(&[c(1.0), c(0.0), c(0.0), c(0.0)]).unwrap();
        assert_eq!(ddse(&up_up).unwrap(), 0.0);
        let mixed = Operator::identity(4).scale_real(0.25);
        assert!((ddse(&mixed).unwrap() + 0.5).abs() < 1e-12);
        assert_eq!(concurrence(&mixed).unwrap(), 0.0);
        // Unrooted form for I/4: 1/16 − 3/16.
        assert!((ddse_with(&mixed, DdseForm::Unrooted).unwrap() + 0.125).abs() < 1e-12);
    }

    #[test]
    fn werner_states() {
        for k in 0..=5 {
            let p = k as f64 * 0.2;
            let want = ((3.0 * p - 1.0) / 2.0).max(0.0);
            assert!((concurrence(&werner(p)).unwrap() - want).abs() < 1e-10, "p={p}");
        }
        assert!((concurrence(&werner(0.5)).unwrap() - 0.25).abs() < 1e-12);
    }

    #[test]
    fn invalid_state_is_rejected() {
        // Non-positive "state" whose ρρ̃ = diag(0.2, −0.15, −0.15, 0.2).
        let bad = Operator::diag_real(&[1.0, -0.5, 0.3, 0.2]).unwrap();
        assert!(matches!(ddse(&bad), Err(Error::NumericalFailure(_))));
    }

    #[test]
    fn sample_reports_both_forms() {
        let s = sample(3.0, &werner(0.8), DdseForm::Unrooted).unwrap();
        assert!((s.concurrence - 0.7).abs() < 1e-10);
        assert!(s.lambdas.windows(2).all(|w| w[0] >= w[1]));
        let l = s.lambdas;
        assert!((s.ddse - (l[0] - l[1] - l[2] - l[3])).abs() < 1e-15);
    }
}
