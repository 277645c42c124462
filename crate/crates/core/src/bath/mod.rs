//! Ohmic dephasing baths: spectral density, thermal correlation function,
//! the tabulated memory kernel, and the pure-dephasing decay exponent.

mod quadrature;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::qlinalg::{kron, sigma_z, Operator};

pub use quadrature::{gauss_legendre, FrequencyRule};

/// Boltzmann constant over ħ in rad·ns⁻¹·mK⁻¹.
///
/// k_B = 1.380649e-23 J/K and ħ = 1.054571817e-34 J·s give
/// k_B/ħ = 1.309203e11 s⁻¹K⁻¹ = 130.9203 ns⁻¹K⁻¹ = 0.1309203 ns⁻¹mK⁻¹.
pub const KB_OVER_HBAR: f64 = 0.130_920_3;

/// Frequency integrals run over `[0, CUTOFF_MULTIPLE·ω_c]`, where `e^{−28} < 1e−12`.
pub const CUTOFF_MULTIPLE: f64 = 28.0;

/// Default kernel truncation threshold relative to `|C(0)|`.
pub const EPS_TRUNC_DEFAULT: f64 = 1e-6;

/// Number of consecutive sub-threshold samples required before truncating.
pub const TRUNCATION_WINDOW: usize = 10;

/// Hard cap on the kernel memory (ns).
pub const KERNEL_TAU_CAP: f64 = 1e4;

/// Relative (to `∫|integrand|`) change allowed when the panel width is halved.
const QUADRATURE_TOL: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Topology {
    /// Both qubits couple through `σz⊗I + I⊗σz` to one shared bath.
    Common,
    /// Each qubit couples through its own `σz` to its own bath.
    Independent,
}

/// Parameters of a single Ohmic bath.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BathParams {
    /// Dimensionless coupling.
    pub eta: f64,
    /// Cutoff frequency, rad/ns.
    pub omega_c: f64,
    /// Temperature, mK.
    pub temperature: f64,
}

impl BathParams {
    pub fn validate(&self) -> Result<()> {
        if !self.eta.is_finite() || self.eta < 0.0 {
            return Err(Error::InvalidConfig(format!("eta must be finite and >= 0, got {}", self.eta)));
        }
        if !self.omega_c.is_finite() || self.omega_c <= 0.0 {
            return Err(Error::InvalidConfig(format!("omega_c must be positive, got {}", self.omega_c)));
        }
        if !self.temperature.is_finite() || self.temperature < 0.0 {
            return Err(Error::InvalidConfig(format!("temperature must be >= 0 mK, got {}", self.temperature)));
        }
        Ok(())
    }

    /// `k_B T / ħ` in rad/ns.
    pub fn thermal_frequency(&self) -> f64 {
        KB_OVER_HBAR * self.temperature
    }

    fn upper_frequency(&self) -> f64 {
        CUTOFF_MULTIPLE * self.omega_c
    }
}

/// Bath topology plus Ohmic parameters. For the independent topology the
/// second qubit's bath uses `bath2` when given, otherwise the same parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BathSpec {
    pub topology: Topology,
    pub eta: f64,
    pub omega_c: f64,
    /// Temperature, mK.
    pub temperature: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bath2: Option<BathParams>,
}

impl BathSpec {
    pub fn new(topology: Topology, eta: f64, omega_c: f64, temperature: f64) -> Self {
        BathSpec { topology, eta, omega_c, temperature, bath2: None }
    }

    pub fn primary(&self) -> BathParams {
        BathParams { eta: self.eta, omega_c: self.omega_c, temperature: self.temperature }
    }

    pub fn bath_count(&self) -> usize {
        match self.topology {
            Topology::Common => 1,
            Topology::Independent => 2,
        }
    }

    pub fn params(&self, bath: usize) -> BathParams {
        match (bath, self.bath2) {
            (1, Some(p)) => p,
            _ => self.primary(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.primary().validate()?;
        if let Some(p) = self.bath2 {
            if self.topology == Topology::Common {
                return Err(Error::InvalidConfig("bath2 override requires the independent topology".into()));
            }
            p.validate()?;
        }
        Ok(())
    }
}

/// `J(ω) = η ω e^{−ω/ω_c}`.
pub fn spectral_density(omega: f64, eta: f64, omega_c: f64) -> Result<f64> {
    if omega.is_nan() || omega < 0.0 {
        return Err(Error::Domain(format!("spectral density needs omega >= 0, got {omega}")));
    }
    Ok(ohmic(omega, eta, omega_c))
}

#[inline]
fn ohmic(omega: f64, eta: f64, omega_c: f64) -> f64 {
    eta * omega * (-omega / omega_c).exp()
}

/// `coth(ω / 2kT)`, equal to 1 at zero temperature.
#[inline]
fn thermal_factor(omega: f64, kt: f64) -> f64 {
    if kt <= 0.0 {
        return 1.0;
    }
    let x = omega / (2.0 * kt);
    if x > 20.0 {
        1.0
    } else if x < 1e-4 {
        1.0 / x + x / 3.0
    } else {
        1.0 / x.tanh()
    }
}

/// `J(ω)·coth(ω/2kT)`, finite as ω → 0.
#[inline]
fn weighted_density(omega: f64, p: &BathParams, kt: f64) -> f64 {
    if kt > 0.0 && omega < 1e-4 * kt {
        // η ω coth(ω/2kT) → 2 η kT
        return p.eta * (-omega / p.omega_c).exp() * (2.0 * kt + omega * omega / (6.0 * kt));
    }
    ohmic(omega, p.eta, p.omega_c) * thermal_factor(omega, kt)
}

/// Upper end of the doubling chunk that contains `tau` (chunks `[0,1]`, `(1,2]`, `(2,4]`, ...).
fn chunk_upper(tau: f64) -> f64 {
    if tau <= 1.0 {
        1.0
    } else {
        2f64.powi(tau.log2().ceil() as i32)
    }
}

fn correlation_rule(p: &BathParams, tau_upper: f64, refine: f64) -> FrequencyRule {
    let width = (0.5 * p.omega_c).min(2.0 * std::f64::consts::PI / tau_upper) / refine;
    FrequencyRule::build(p.upper_frequency(), width, p.thermal_frequency())
}

/// Node data for `C(τ) = Σ w J coth cos ωτ − i Σ w J sin ωτ`.
struct CorrelationNodes {
    omega: Vec<f64>,
    real_weight: Vec<f64>,
    imag_weight: Vec<f64>,
}

impl CorrelationNodes {
    fn new(rule: &FrequencyRule, p: &BathParams) -> Self {
        let kt = p.thermal_frequency();
        let mut out = CorrelationNodes {
            omega: Vec::with_capacity(rule.nodes.len()),
            real_weight: Vec::with_capacity(rule.nodes.len()),
            imag_weight: Vec::with_capacity(rule.nodes.len()),
        };
        for &(w, wt) in &rule.nodes {
            out.omega.push(w);
            out.real_weight.push(wt * weighted_density(w, p, kt));
            out.imag_weight.push(wt * ohmic(w, p.eta, p.omega_c));
        }
        out
    }

    fn eval(&self, tau: f64) -> Complex64 {
        let mut acc = Complex64::new(0.0, 0.0);
        for ((&w, &a), &b) in self.omega.iter().zip(&self.real_weight).zip(&self.imag_weight) {
            let (s, c) = (w * tau).sin_cos();
            acc.re += a * c;
            acc.im -= b * s;
        }
        acc
    }

    /// L1 magnitude of the integrand, the scale for quadrature error checks.
    fn magnitude(&self) -> f64 {
        self.real_weight.iter().map(|a| a.abs()).sum::<f64>() + self.imag_weight.iter().map(|b| b.abs()).sum::<f64>()
    }

    /// `C(τ_k)` for `τ_k = (first + k)·dtau`, `k < count`, via phase recurrence.
    fn eval_grid(&self, first: usize, count: usize, dtau: f64) -> Vec<Complex64> {
        const RESYNC: usize = 64;
        let mut re = vec![0.0; count];
        let mut im = vec![0.0; count];
        for ((&w, &a), &b) in self.omega.iter().zip(&self.real_weight).zip(&self.imag_weight) {
            let step = Complex64::from_polar(1.0, -w * dtau);
            let mut z = Complex64::new(0.0, 0.0);
            for k in 0..count {
                if k % RESYNC == 0 {
                    z = Complex64::from_polar(1.0, -w * ((first + k) as f64 * dtau));
                } else {
                    z *= step;
                }
                re[k] += a * z.re;
                im[k] += b * z.im;
            }
        }
        re.into_iter().zip(im).map(|(r, i)| Complex64::new(r, i)).collect()
    }
}

fn check_refinement(coarse: Complex64, fine: Complex64, scale: f64, what: &str) -> Result<()> {
    let change = (coarse - fine).norm();
    if change > QUADRATURE_TOL * scale.max(f64::MIN_POSITIVE) {
        return Err(Error::NumericalFailure(format!(
            "{what}: quadrature did not converge (change {change:.3e} on refinement, scale {scale:.3e})"
        )));
    }
    Ok(())
}

/// Thermal two-time bath function
/// `C(τ) = ∫₀^∞ dω J(ω) [coth(ω/2kT) cos ωτ − i sin ωτ]`, with `C(−τ) = C(τ)*`.
pub fn correlation_function(tau: f64, p: &BathParams) -> Result<Complex64> {
    p.validate()?;
    if !tau.is_finite() {
        return Err(Error::Domain(format!("tau must be finite, got {tau}")));
    }
    if tau < 0.0 {
        return correlation_function(-tau, p).map(|c| c.conj());
    }
    let upper = chunk_upper(tau);
    let nodes = CorrelationNodes::new(&correlation_rule(p, upper, 1.0), p);
    let value = nodes.eval(tau);
    let fine = CorrelationNodes::new(&correlation_rule(p, upper, 2.0), p).eval(tau);
    check_refinement(value, fine, nodes.magnitude(), "correlation function")?;
    Ok(value)
}

/// `C(τ)` sampled on `τ_k = k·dtau` up to the truncation horizon `tau_max`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorrelationKernel {
    pub dtau: f64,
    pub values: Vec<Complex64>,
    pub tau_max: f64,
}

impl CorrelationKernel {
    /// Number of grid intervals, `values.len() − 1`.
    pub fn intervals(&self) -> usize {
        self.values.len() - 1
    }

    /// Linear interpolation of `C` for `0 ≤ τ ≤ tau_max`; zero beyond.
    pub fn interpolate(&self, tau: f64) -> Complex64 {
        if tau < 0.0 {
            return self.interpolate(-tau).conj();
        }
        let x = tau / self.dtau;
        let k = x.floor() as usize;
        if k >= self.intervals() {
            return if k == self.intervals() && (x - k as f64) < 1e-9 {
                self.values[k]
            } else {
                Complex64::new(0.0, 0.0)
            };
        }
        let f = x - k as f64;
        self.values[k] * (1.0 - f) + self.values[k + 1] * f
    }
}

/// Tabulates `C` on a uniform grid until `|C|` stays below
/// `eps_trunc·|C(0)|` for [`TRUNCATION_WINDOW`] consecutive samples.
pub fn tabulate_kernel(p: &BathParams, dtau: f64, eps_trunc: f64) -> Result<CorrelationKernel> {
    p.validate()?;
    if !dtau.is_finite() || dtau <= 0.0 {
        return Err(Error::InvalidConfig(format!("kernel dtau must be positive, got {dtau}")));
    }
    if dtau > 0.1 / p.omega_c * (1.0 + 1e-12) {
        return Err(Error::InvalidConfig(format!(
            "kernel dtau {dtau} ns does not resolve the cutoff (needs <= 0.1/omega_c = {} ns)",
            0.1 / p.omega_c
        )));
    }
    if !(eps_trunc > 0.0 && eps_trunc < 1.0) {
        return Err(Error::InvalidConfig(format!("eps_trunc must lie in (0, 1), got {eps_trunc}")));
    }

    let mut values: Vec<Complex64> = Vec::new();
    let mut threshold = 0.0;
    let mut quiet = 0usize;
    let mut chunk_lo = 0.0_f64;
    loop {
        let upper = chunk_upper(chunk_lo + 0.5 * dtau);
        if chunk_lo >= KERNEL_TAU_CAP {
            return Err(Error::InvalidConfig(format!(
                "correlation kernel did not decay below {eps_trunc:e}·|C(0)| within {KERNEL_TAU_CAP} ns"
            )));
        }
        let first = values.len();
        let last = (upper / dtau + 1e-9).floor() as usize;
        let count = last + 1 - first;
        let nodes = CorrelationNodes::new(&correlation_rule(p, upper, 1.0), p);
        let chunk = nodes.eval_grid(first, count, dtau);

        // Certify the rule at the far end of the chunk.
        let tau_end = last as f64 * dtau;
        let fine = CorrelationNodes::new(&correlation_rule(p, upper, 2.0), p).eval(tau_end);
        check_refinement(nodes.eval(tau_end), fine, nodes.magnitude(), "kernel tabulation")?;

        for c in chunk {
            if values.is_empty() {
                threshold = eps_trunc * c.norm();
                if c.im.abs() > 1e-12 * c.norm() {
                    return Err(Error::NumericalFailure(format!("Im C(0) = {:e} is not zero", c.im)));
                }
            } else if c.norm() <= threshold {
                quiet += 1;
            } else {
                quiet = 0;
            }
            values.push(c);
            if quiet >= TRUNCATION_WINDOW {
                let tau_max = (values.len() - 1) as f64 * dtau;
                return Ok(CorrelationKernel { dtau, values, tau_max });
            }
        }
        chunk_lo = upper;
    }
}

/// System side of one coupling term and the bath it couples to.
#[derive(Debug, Clone, Copy)]
pub struct Coupling {
    pub operator: Operator,
    pub bath: usize,
}

/// Coupling operators for a topology. Distinct baths are uncorrelated, so the
/// independent case contributes no cross terms.
pub fn coupling_operators(topology: Topology) -> Vec<Coupling> {
    let i2 = Operator::identity(2);
    let zi = kron(&sigma_z(), &i2).expect("2x2 operands");
    let iz = kron(&i2, &sigma_z()).expect("2x2 operands");
    match topology {
        Topology::Common => vec![Coupling { operator: zi + iz, bath: 0 }],
        Topology::Independent => vec![Coupling { operator: zi, bath: 0 }, Coupling { operator: iz, bath: 1 }],
    }
}

/// Pure-dephasing decay exponent
/// `Γ(t) = 4 ∫₀^∞ dω J(ω) coth(ω/2kT) (1 − cos ωt) / ω²`.
///
/// A single qubit coupled through `σz` with no system Hamiltonian keeps its
/// populations while its coherence decays as `e^{−Γ(t)}`.
pub fn dephasing_exponent(t: f64, p: &BathParams) -> Result<f64> {
    p.validate()?;
    if !t.is_finite() || t < 0.0 {
        return Err(Error::Domain(format!("dephasing exponent needs t >= 0, got {t}")));
    }
    if t == 0.0 {
        return Ok(0.0);
    }
    let kt = p.thermal_frequency();
    let integrand = |w: f64| {
        let s = (0.5 * w * t).sin();
        4.0 * weighted_density(w, p, kt) * 2.0 * s * s / (w * w)
    };
    let rule = |refine: f64| {
        let width = (0.5 * p.omega_c).min(2.0 * std::f64::consts::PI / t) / refine;
        FrequencyRule::build(p.upper_frequency(), width, kt)
    };
    let coarse = rule(1.0).integrate(integrand);
    let fine = rule(2.0).integrate(integrand);
    check_refinement(Complex64::new(coarse, 0.0), Complex64::new(fine, 0.0), coarse.abs(), "dephasing exponent")?;
    Ok(coarse)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params(eta: f64, omega_c: f64, temperature: f64) -> BathParams {
        BathParams { eta, omega_c, temperature }
    }

    /// Zero-temperature closed form `η ω_c² / (1 + i ω_c τ)²`.
    fn c_vacuum(tau: f64, eta: f64, wc: f64) -> Complex64 {
        let d = Complex64::new(1.0, wc * tau);
        Complex64::new(eta * wc * wc, 0.0) / (d * d)
    }

    #[test]
    fn spectral_density_examples() {
        assert_eq!(spectral_density(0.0, 3e-5, 20.0).unwrap(), 0.0);
        let v = spectral_density(20.0, 3e-5, 20.0).unwrap();
        assert!((v - 3e-5 * 20.0 * (-1.0f64).exp()).abs() < 1e-18);
        assert!((v - 2.207e-4).abs() < 1e-7);
        // Maximum sits at ω = ω_c.
        let grid: Vec<f64> = (0..4001).map(|k| k as f64 * 0.01).collect();
        let best = grid.iter().copied().max_by(|a, b| {
            spectral_density(*a, 1.0, 20.0).unwrap().total_cmp(&spectral_density(*b, 1.0, 20.0).unwrap())
        });
        assert!((best.unwrap() - 20.0).abs() < 1e-9);
        assert!(matches!(spectral_density(-1.0, 1.0, 1.0), Err(Error::Domain(_))));
    }

    #[test]
    fn vacuum_correlation_matches_closed_form() {
        let p = params(3e-5, 20.0, 0.0);
        for tau in [0.0, 0.01, 0.05, 0.3, 1.0, 2.5, 7.0, 10.0] {
            let num = correlation_function(tau, &p).unwrap();
            let exact = c_vacuum(tau, p.eta, p.omega_c);
            assert!((num - exact).norm() <= 1e-6 * exact.norm(), "tau={tau}: {num} vs {exact}");
        }
        let c0 = correlation_function(0.0, &p).unwrap();
        assert!((c0.re - 3e-5 * 400.0).abs() < 1e-12 && c0.im == 0.0);
    }

    #[test]
    fn imaginary_part_is_temperature_independent() {
        for tau in [0.02, 0.4, 3.0] {
            let cold = correlation_function(tau, &params(3e-5, 20.0, 0.0)).unwrap();
            let warm = correlation_function(tau, &params(3e-5, 20.0, 200.0)).unwrap();
            assert!((cold.im - warm.im).abs() < 1e-12 * cold.norm().max(warm.norm()));
        }
    }

    #[test]
    fn high_temperature_limit() {
        // kT/ħ ≈ 1309 rad/ns ≫ ω_c = 20 rad/ns.
        let p = params(1e-4, 20.0, 1e4);
        let kt = p.thermal_frequency();
        for tau in [0.0, 0.05, 0.2] {
            let num = correlation_function(tau, &p).unwrap().re;
            let approx = 2.0 * p.eta * kt * p.omega_c / (1.0 + (p.omega_c * tau).powi(2));
            assert!((num - approx).abs() < 0.02 * approx, "tau={tau}: {num} vs {approx}");
        }
    }

    #[test]
    fn hermitian_symmetry() {
        let p = params(3e-5, 20.0, 50.0);
        for tau in [0.1, 1.7] {
            let a = correlation_function(tau, &p).unwrap();
            let b = correlation_function(-tau, &p).unwrap();
            assert_eq!(a, b.conj());
        }
    }

    #[test]
    fn real_part_at_zero_grows_with_temperature() {
        let mut last = 0.0;
        for t in [0.0, 10.0, 50.0, 100.0, 200.0] {
            let c = correlation_function(0.0, &params(3e-5, 20.0, t)).unwrap().re;
            assert!(c >= last);
            last = c;
        }
    }

    #[test]
    fn kernel_truncation_vacuum() {
        let p = params(3e-5, 20.0, 0.0);
        let k = tabulate_kernel(&p, 0.005, 1e-6).unwrap();
        assert!((k.values[0].re - p.eta * 400.0).abs() < 1e-12);
        assert!(k.values.last().unwrap().norm() <= 1e-6 * k.values[0].norm());
        // |C|/|C(0)| = 1/(1 + ω_c²τ²) crosses 1e-6 at τ ≈ 50 ns.
        assert!(k.tau_max > 49.9 && k.tau_max < 50.2, "tau_max {}", k.tau_max);
        for idx in [1usize, 7, 400, 2000, 9000] {
            let tau = idx as f64 * k.dtau;
            let exact = c_vacuum(tau, p.eta, p.omega_c);
            assert!((k.values[idx] - exact).norm() < 1e-6 * exact.norm().max(1e-3 * k.values[0].norm()));
        }
    }

    #[test]
    fn kernel_matches_pointwise_evaluation() {
        let p = params(3e-5, 20.0, 50.0);
        let k = tabulate_kernel(&p, 0.005, 1e-6).unwrap();
        // The ohmic low-frequency tail gives Re C ≈ 2ηkT/(ω_c τ²) at large τ,
        // which crosses 1e-6·|C(0)| near 40 ns.
        assert!(k.tau_max > 25.0 && k.tau_max < 45.0, "tau_max {}", k.tau_max);
        for idx in [0usize, 3, 150, k.intervals()] {
            let direct = correlation_function(idx as f64 * k.dtau, &p).unwrap();
            assert!((direct - k.values[idx]).norm() <= 1e-10 * k.values[0].norm());
        }
    }

    #[test]
    fn kernel_config_errors() {
        let p = params(3e-5, 20.0, 50.0);
        assert!(matches!(tabulate_kernel(&p, 0.01, 1e-6), Err(Error::InvalidConfig(_))));
        assert!(matches!(tabulate_kernel(&p, 0.0, 1e-6), Err(Error::InvalidConfig(_))));
        assert!(matches!(tabulate_kernel(&p, 0.005, 0.0), Err(Error::InvalidConfig(_))));
        assert!(tabulate_kernel(&params(-1.0, 20.0, 0.0), 0.005, 1e-6).is_err());
    }

    #[test]
    fn zero_coupling_kernel_is_zero() {
        let k = tabulate_kernel(&params(0.0, 20.0, 50.0), 0.005, 1e-6).unwrap();
        assert!(k.values.iter().all(|c| c.norm() == 0.0));
        assert_eq!(k.values.len(), TRUNCATION_WINDOW + 1);
    }

    #[test]
    fn coupling_operator_examples() {
        let ind = coupling_operators(Topology::Independent);
        assert_eq!(ind.len(), 2);
        assert_eq!((ind[0].bath, ind[1].bath), (0, 1));
        assert_eq!((ind[0].operator.adjoint() * ind[1].operator).trace().norm(), 0.0);

        let common = coupling_operators(Topology::Common);
        assert_eq!(common.len(), 1);
        let ev = crate::qlinalg::herm_eig(&common[0].operator).unwrap().values;
        assert_eq!(ev, vec![2.0, 0.0, 0.0, -2.0]);

        let zz = kron(&sigma_z(), &sigma_z()).unwrap();
        for c in ind.iter().chain(common.iter()) {
            assert_eq!(c.operator.commutator(&zz).max_abs(), 0.0);
        }
    }

    #[test]
    fn dephasing_exponent_vacuum_closed_form() {
        let p = params(3e-5, 20.0, 0.0);
        assert_eq!(dephasing_exponent(0.0, &p).unwrap(), 0.0);
        for t in [0.01, 0.5, 10.0, 150.0, 400.0] {
            let g = dephasing_exponent(t, &p).unwrap();
            let exact = 2.0 * p.eta * (1.0 + (p.omega_c * t).powi(2)).ln();
            assert!((g - exact).abs() < 1e-9 * exact, "t={t}: {g} vs {exact}");
        }
        assert!(dephasing_exponent(-1.0, &p).is_err());
    }

    #[test]
    fn dephasing_exponent_is_monotone() {
        let p = params(3e-5, 20.0, 50.0);
        let mut last = 0.0;
        for k in 0..=40 {
            let g = dephasing_exponent(k as f64 * 10.0, &p).unwrap();
            assert!(g >= last);
            last = g;
        }
    }

    #[test]
    fn bath_spec_overrides() {
        let mut s = BathSpec::new(Topology::Independent, 3e-5, 20.0, 50.0);
        assert_eq!(s.params(1), s.primary());
        s.bath2 = Some(params(1e-5, 20.0, 10.0));
        assert_eq!(s.params(1).eta, 1e-5);
        assert_eq!(s.params(0).eta, 3e-5);
        s.topology = Topology::Common;
        assert!(s.validate().is_err());
    }
}
