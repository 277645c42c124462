//! Time-local second-order master equation in the interaction picture.
//!
//! For coupling operators `A_α` (interaction picture) and bath correlation
//! function `C`, the generator is
//!
//! ```text
//! dρ_I/dt = −Σ_α { [A_α(t), Λ_α(t) ρ_I] − [A_α(t), ρ_I Λ_α(t)†] },
//! Λ_α(t)  = ∫₀^{min(t, τ_max)} C(τ) A_α(t − τ) dτ,
//! ```
//!
//! integrated with fixed-step RK4 from the start of the schedule. Samples are
//! stored in the Schrödinger picture.

mod memory;

use serde::{Deserialize, Serialize};

use crate::bath::{coupling_operators, tabulate_kernel, BathSpec, CorrelationKernel, EPS_TRUNC_DEFAULT};
use crate::error::{Error, Result};
use crate::model::{CompiledSchedule, PulseSchedule, TIME_EPS};
use crate::qlinalg::{herm_eig, Operator};

use memory::{memory_direct, CouplingMemory, SegmentTables};

/// Trace and Hermiticity errors tolerated before a run is aborted.
pub const DIAGNOSTIC_LIMIT: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct IntegratorConfig {
    /// RK4 step, ns.
    pub dt: f64,
    /// Kernel grid spacing, ns; must not exceed `dt`.
    pub kernel_dtau: f64,
    pub eps_trunc: f64,
    /// Use the full memory window `τ_max` from `t = 0`.
    pub markov_mode: bool,
}

impl Default for IntegratorConfig {
    fn default() -> Self {
        IntegratorConfig { dt: 0.01, kernel_dtau: 0.005, eps_trunc: EPS_TRUNC_DEFAULT, markov_mode: false }
    }
}

impl IntegratorConfig {
    pub fn validate(&self) -> Result<()> {
        if !self.dt.is_finite() || self.dt <= 0.0 {
            return Err(Error::InvalidConfig(format!("dt must be positive, got {}", self.dt)));
        }
        if self.kernel_dtau.is_nan() || self.kernel_dtau <= 0.0 || self.kernel_dtau > self.dt * (1.0 + 1e-12) {
            return Err(Error::InvalidConfig(format!(
                "kernel_dtau must lie in (0, dt], got {} with dt = {}",
                self.kernel_dtau, self.dt
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Diagnostics {
    pub trace_error: f64,
    pub hermiticity_error: f64,
    pub min_eigenvalue: f64,
}

impl Diagnostics {
    pub fn of(rho: &Operator) -> Result<Self> {
        let min_eigenvalue = herm_eig(&rho.hermitian_part())?.values.last().copied().unwrap_or(0.0);
        Ok(Diagnostics {
            trace_error: (rho.trace() - 1.0).norm(),
            hermiticity_error: rho.hermiticity_error(),
            min_eigenvalue,
        })
    }
}

#[derive(Debug, Clone)]
pub struct Trajectory {
    /// Observable times (ns), zero at the start of the entangling phase.
    pub times: Vec<f64>,
    /// Schrödinger-picture states.
    pub states: Vec<Operator>,
    pub diagnostics: Vec<Diagnostics>,
    /// Memory horizon of each bath kernel (ns).
    pub kernel_tau_max: Vec<f64>,
}

/// Precomputed generator of the master equation for one schedule and bath.
#[derive(Debug, Clone)]
pub struct MasterEquation {
    schedule: CompiledSchedule,
    kernels: Vec<CorrelationKernel>,
    couplings: Vec<(Operator, CouplingMemory)>,
    tables: Vec<SegmentTables>,
    markov: bool,
}

impl MasterEquation {
    /// Tabulates one kernel per bath and builds the generator.
    pub fn new(schedule: &PulseSchedule, spec: &BathSpec, cfg: &IntegratorConfig) -> Result<Self> {
        spec.validate()?;
        cfg.validate()?;
        let kernels = (0..spec.bath_count())
            .map(|b| tabulate_kernel(&spec.params(b), cfg.kernel_dtau, cfg.eps_trunc))
            .collect::<Result<Vec<_>>>()?;
        Self::with_kernels(schedule, spec, kernels, cfg)
    }

    /// Builds the generator from already tabulated kernels, one per bath.
    pub fn with_kernels(
        schedule: &PulseSchedule,
        spec: &BathSpec,
        kernels: Vec<CorrelationKernel>,
        cfg: &IntegratorConfig,
    ) -> Result<Self> {
        cfg.validate()?;
        if kernels.len() != spec.bath_count() {
            return Err(Error::InvalidConfig(format!(
                "{} kernels supplied for {} baths",
                kernels.len(),
                spec.bath_count()
            )));
        }
        for k in &kernels {
            if (k.dtau - cfg.kernel_dtau).abs() > 1e-12 * cfg.kernel_dtau || k.values.len() < 2 {
                return Err(Error::InvalidConfig(format!(
                    "kernel spacing {} ns does not match integrator kernel_dtau {} ns",
                    k.dtau, cfg.kernel_dtau
                )));
            }
        }
        let compiled = CompiledSchedule::new(schedule)?;
        let n_seg = compiled.frames().len();
        let mut tables = Vec::with_capacity(n_seg * kernels.len());
        for kernel in &kernels {
            for frame in compiled.frames() {
                tables.push(SegmentTables::build(frame, kernel));
            }
        }
        let couplings = coupling_operators(spec.topology)
            .into_iter()
            .map(|c| (c.operator, CouplingMemory::new(&compiled, &c.operator, c.bath, c.bath * n_seg)))
            .collect();
        Ok(MasterEquation { schedule: compiled, kernels, couplings, tables, markov: cfg.markov_mode })
    }

    pub fn schedule(&self) -> &CompiledSchedule {
        &self.schedule
    }

    pub fn kernels(&self) -> &[CorrelationKernel] {
        &self.kernels
    }

    fn tau_up(&self, t: f64, kernel: &CorrelationKernel) -> f64 {
        if self.markov {
            kernel.tau_max
        } else {
            t.clamp(0.0, kernel.tau_max)
        }
    }

    fn assemble(a_t: &Operator, lambda: &Operator, rho: &Operator) -> Operator {
        // −([A, Λρ] − [A, ρΛ†]) = −(X + X†) with X = [A, Λρ].
        let x = a_t.commutator(&(*lambda * *rho));
        -(x + x.adjoint())
    }

    /// `dρ_I/dt` at internal time `t`.
    pub fn rhs(&self, t: f64, rho_i: &Operator) -> Result<Operator> {
        self.schedule.check_time(t)?;
        Ok(self.rhs_unchecked(t, rho_i))
    }

    fn rhs_unchecked(&self, t: f64, rho_i: &Operator) -> Operator {
        let mut out = Operator::zeros(4);
        for (_, mem) in &self.couplings {
            let kernel = &self.kernels[mem.bath()];
            let a_t = mem.coupling_at(&self.schedule, t);
            let lambda = mem.memory(t, self.tau_up(t, kernel), self.markov, kernel, &self.tables);
            out = out + Self::assemble(&a_t, &lambda, rho_i);
        }
        out
    }

    /// Same generator with `Λ` evaluated by direct quadrature of
    /// `C(τ) U†(t−τ) a U(t−τ)` on the kernel grid. Slow; used as a cross-check.
    pub fn rhs_direct(&self, t: f64, rho_i: &Operator) -> Result<Operator> {
        self.schedule.check_time(t)?;
        let mut out = Operator::zeros(4);
        for (a, mem) in &self.couplings {
            let kernel = &self.kernels[mem.bath()];
            let a_t = self.schedule.interaction_picture(a, t)?;
            let lambda = memory_direct(&self.schedule, a, t, self.tau_up(t, kernel), kernel);
            out = out + Self::assemble(&a_t, &lambda, rho_i);
        }
        Ok(out)
    }

    /// `Λ_α(t)` for coupling term `index`, exposed for inspection and tests.
    pub fn memory_operator(&self, index: usize, t: f64) -> Option<Operator> {
        let (_, mem) = self.couplings.get(index)?;
        let kernel = &self.kernels[mem.bath()];
        Some(mem.memory(t, self.tau_up(t, kernel), self.markov, kernel, &self.tables))
    }

    pub fn memory_operator_direct(&self, index: usize, t: f64) -> Option<Operator> {
        let (a, mem) = self.couplings.get(index)?;
        let kernel = &self.kernels[mem.bath()];
        Some(memory_direct(&self.schedule, a, t, self.tau_up(t, kernel), kernel))
    }

    fn rk4_step(&self, t: f64, h: f64, y: &Operator) -> Operator {
        let k1 = self.rhs_unchecked(t, y);
        let k2 = self.rhs_unchecked(t + 0.5 * h, &(*y + k1.scale_real(0.5 * h)));
        let k3 = self.rhs_unchecked(t + 0.5 * h, &(*y + k2.scale_real(0.5 * h)));
        let k4 = self.rhs_unchecked(t + h, &(*y + k3.scale_real(h)));
        *y + (k1 + (k2 + k3).scale_real(2.0) + k4).scale_real(h / 6.0)
    }

    /// `ρ = U(t) ρ_I U†(t)` at internal time `t`.
    pub fn to_schrodinger(&self, rho_i: &Operator, t: f64) -> Result<Operator> {
        let u = self.schedule.propagator(t)?;
        Ok(u * *rho_i * u.adjoint())
    }

    /// Integrates from internal time 0 to the end of the schedule, sampling at
    /// observable times `0, sample_every, 2·sample_every, …`.
    pub fn evolve(&self, rho0: &Operator, dt: f64, sample_every: f64) -> Result<Trajectory> {
        validate_state(rho0)?;
        if !sample_every.is_finite() || sample_every <= 0.0 {
            return Err(Error::InvalidConfig(format!("sample interval must be positive, got {sample_every}")));
        }
        if dt.is_nan() || dt <= 0.0 {
            return Err(Error::InvalidConfig(format!("dt must be positive, got {dt}")));
        }
        let total = self.schedule.total_duration();
        let shift = self.schedule.origin_shift();

        let mut samples = Vec::new();
        let mut k = 0usize;
        loop {
            let t = shift + k as f64 * sample_every;
            if t > total + TIME_EPS {
                break;
            }
            samples.push(t.min(total));
            k += 1;
        }
        let mut breakpoints: Vec<(f64, bool)> = self.schedule.frames().iter().map(|f| (f.end, false)).collect();
        breakpoints.extend(samples.iter().map(|&t| (t, true)));
        breakpoints.sort_by(|a, b| a.0.total_cmp(&b.0));

        let mut traj = Trajectory {
            times: Vec::with_capacity(samples.len()),
            states: Vec::with_capacity(samples.len()),
            diagnostics: Vec::with_capacity(samples.len()),
            kernel_tau_max: self.kernels.iter().map(|k| k.tau_max).collect(),
        };
        let mut rho = *rho0;
        let mut t = 0.0;
        for (target, is_sample) in breakpoints {
            let span = target - t;
            if span > TIME_EPS {
                let steps = (span / dt - 1e-9).ceil().max(1.0) as usize;
                let h = span / steps as f64;
                for i in 0..steps {
                    let ti = t + i as f64 * h;
                    rho = self.rk4_step(ti, h, &rho);
                }
                t = target;
            }
            if is_sample {
                let state = self.to_schrodinger(&rho, t)?;
                let diag = Diagnostics::of(&state)?;
                if diag.trace_error > DIAGNOSTIC_LIMIT || diag.hermiticity_error > DIAGNOSTIC_LIMIT {
                    return Err(Error::Diagnostics {
                        time: t - shift,
                        trace_error: diag.trace_error,
                        hermiticity_error: diag.hermiticity_error,
                        limit: DIAGNOSTIC_LIMIT,
                    });
                }
                traj.times.push(t - shift);
                traj.states.push(state);
                traj.diagnostics.push(diag);
            }
        }
        Ok(traj)
    }
}

/// Checks that `rho` is a 4×4 Hermitian, unit-trace, positive semidefinite matrix.
pub fn validate_state(rho: &Operator) -> Result<()> {
    if rho.dim() != 4 {
        return Err(Error::InvalidConfig(format!("state must be 4x4, got {0}x{0}", rho.dim())));
    }
    if rho.hermiticity_error() > 1e-10 {
        return Err(Error::InvalidConfig("state is not Hermitian".into()));
    }
    if (rho.trace() - 1.0).norm() > 1e-10 {
        return Err(Error::InvalidConfig(format!("state trace is {}, expected 1", rho.trace())));
    }
    let min = herm_eig(rho)?.values[3];
    if min < -1e-10 {
        return Err(Error::InvalidConfig(format!("state has negative eigenvalue {min:e}")));
    }
    Ok(())
}

/// One-shot generator evaluation; builds the kernels and tables on every call.
pub fn rhs(t: f64, rho_i: &Operator, s: &PulseSchedule, spec: &BathSpec, cfg: &IntegratorConfig) -> Result<Operator> {
    MasterEquation::new(s, spec, cfg)?.rhs(t, rho_i)
}

/// Integrates the master equation over the whole schedule.
pub fn evolve(
    rho0: &Operator,
    s: &PulseSchedule,
    spec: &BathSpec,
    cfg: &IntegratorConfig,
    sample_every: f64,
) -> Result<Trajectory> {
    MasterEquation::new(s, spec, cfg)?.evolve(rho0, cfg.dt, sample_every)
}

/// `ρ = U(t) ρ_I U†(t)` for internal time `t`.
pub fn to_schrodinger(rho_i: &Operator, s: &PulseSchedule, t: f64) -> Result<Operator> {
    let u = CompiledSchedule::new(s)?.propagator(t)?;
    Ok(u * *rho_i * u.adjoint())
}

/// `|↑↑⟩⟨↑↑|`, the state both qubits are initialized in.
pub fn initial_state() -> Operator {
    let mut rho = Operator::zeros(4);
    rho[(0, 0)] = num_complex::Complex64::new(1.0, 0.0);
    rho
}
