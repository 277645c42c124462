//! Closed-form checks run by `stq validate`.

use num_complex::Complex64;
use serde::Serialize;

use crate::bath::{dephasing_exponent, tabulate_kernel, BathParams, BathSpec, Topology};
use crate::entanglement::concurrence;
use crate::error::Result;
use crate::model::{DeviceParams, PulseSchedule, J12_EXP};
use crate::qlinalg::Operator;
use crate::redfield::{evolve, IntegratorConfig};

#[derive(Debug, Clone, Serialize)]
pub struct OracleCheck {
    pub name: &'static str,
    pub max_error: f64,
    pub tolerance: f64,
    pub passed: bool,
}

impl OracleCheck {
    fn new(name: &'static str, max_error: f64, tolerance: f64) -> Self {
        OracleCheck { name, max_error, tolerance, passed: max_error <= tolerance }
    }
}

fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

/// Single qubit, σz coupling, no Hamiltonian: coherence vs `e^{−Γ(t)}` over 400 ns.
pub fn pure_dephasing(cfg: &IntegratorConfig) -> Result<OracleCheck> {
    let p = BathParams { eta: 3e-5, omega_c: 20.0, temperature: 50.0 };
    let spec = BathSpec::new(Topology::Independent, p.eta, p.omega_c, p.temperature);
    let s = PulseSchedule::constant(DeviceParams::zero(), 400.0)?;
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let rho0 = Operator::projector(&[c(h), c(0.0), c(h), c(0.0)])?;
    let traj = evolve(&rho0, &s, &spec, cfg, 5.0)?;
    let mut worst: f64 = 0.0;
    for (t, rho) in traj.times.iter().zip(&traj.states) {
        let want = 0.5 * (-dephasing_exponent(*t, &p)?).exp();
        worst = worst.max((rho[(0, 2)] - want).norm() / want);
    }
    Ok(OracleCheck::new("pure dephasing coherence vs exp(-Gamma), relative", worst, 1e-3))
}

/// η = 0 entangling evolution from `|++⟩`: concurrence = |sin(J12 t / 2)|.
pub fn closed_system(cfg: &IntegratorConfig) -> Result<OracleCheck> {
    let params = DeviceParams { dbz1: 0.0, dbz2: 0.0, ..DeviceParams::default() };
    let s = PulseSchedule::constant(params, 400.0)?;
    let spec = BathSpec::new(Topology::Independent, 0.0, 20.0, 50.0);
    let rho0 = Operator::projector(&[c(0.5); 4])?;
    let traj = evolve(&rho0, &s, &spec, cfg, 1.0)?;
    let mut worst: f64 = 0.0;
    for (t, rho) in traj.times.iter().zip(&traj.states) {
        worst = worst.max((concurrence(rho)? - (0.5 * J12_EXP * t).sin().abs()).abs());
    }
    Ok(OracleCheck::new("closed-system concurrence vs |sin(J12 t/2)|", worst, 1e-6))
}

/// Zero-temperature kernel vs `η ω_c² / (1 + iω_c τ)²` for τ ≤ 10 ns.
pub fn vacuum_kernel(cfg: &IntegratorConfig) -> Result<OracleCheck> {
    let p = BathParams { eta: 3e-5, omega_c: 20.0, temperature: 0.0 };
    let k = tabulate_kernel(&p, cfg.kernel_dtau, cfg.eps_trunc)?;
    let mut worst: f64 = 0.0;
    for (i, v) in k.values.iter().enumerate() {
        let tau = i as f64 * k.dtau;
        if tau > 10.0 {
            break;
        }
        let d = Complex64::new(1.0, p.omega_c * tau);
        let exact = p.eta * p.omega_c * p.omega_c / (d * d);
        worst = worst.max((v - exact).norm() / exact.norm());
    }
    Ok(OracleCheck::new("T = 0 kernel vs closed form, relative", worst, 1e-6))
}

/// Werner states `p|Φ+⟩⟨Φ+| + (1−p)I/4`: concurrence `max(0, (3p − 1)/2)`.
pub fn werner() -> Result<OracleCheck> {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let bell = Operator::projector(&[c(s), c(0.0), c(0.0), c(s)])?;
    let mut worst: f64 = 0.0;
    for k in 0..=5 {
        let p = 0.2 * k as f64;
        let rho = bell.scale_real(p) + Operator::identity(4).scale_real((1.0 - p) / 4.0);
        worst = worst.max((concurrence(&rho)? - ((3.0 * p - 1.0) / 2.0).max(0.0)).abs());
    }
    Ok(OracleCheck::new("Werner-state concurrence", worst, 1e-10))
}

/// All checks; the integrator settings apply to the dynamical ones.
pub fn run_all(cfg: &IntegratorConfig) -> Result<Vec<OracleCheck>> {
    Ok(vec![pure_dephasing(cfg)?, closed_system(cfg)?, vacuum_kernel(cfg)?, werner()?])
}
