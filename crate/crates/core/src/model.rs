//! Two-qubit S-T0 Hamiltonian and the piecewise-constant pulse schedule.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::qlinalg::{herm_eig, kron, sigma_x, sigma_z, unitary_from_eig, HermEig, Operator};

/// Exchange splitting of qubit 1 during the entangling phase, 2π·280 MHz.
pub const J1_DEFAULT: f64 = 2.0 * PI * 0.280;
/// Exchange splitting of qubit 2 during the entangling phase, 2π·320 MHz.
pub const J2_DEFAULT: f64 = 2.0 * PI * 0.320;
/// Inter-qubit coupling that maximizes entanglement at 150 ns.
pub const J12_EXP: f64 = PI / 150.0;
/// Static field gradient, 2π·31.25 MHz.
pub const DBZ_DEFAULT: f64 = 2.0 * PI * 31.25e-3;

/// Slack used when comparing times against segment boundaries (ns).
pub(crate) const TIME_EPS: f64 = 1e-9;

/// Device parameters for one schedule segment, all in rad/ns.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DeviceParams {
    pub j1: f64,
    pub j2: f64,
    pub j12: f64,
    pub dbz1: f64,
    pub dbz2: f64,
}

impl Default for DeviceParams {
    fn default() -> Self {
        DeviceParams { j1: J1_DEFAULT, j2: J2_DEFAULT, j12: J12_EXP, dbz1: DBZ_DEFAULT, dbz2: DBZ_DEFAULT }
    }
}

impl DeviceParams {
    pub fn zero() -> Self {
        DeviceParams { j1: 0.0, j2: 0.0, j12: 0.0, dbz1: 0.0, dbz2: 0.0 }
    }

    pub fn validate(&self) -> Result<()> {
        let fields = [("j1", self.j1), ("j2", self.j2), ("j12", self.j12), ("dbz1", self.dbz1), ("dbz2", self.dbz2)];
        for (name, v) in fields {
            if !v.is_finite() {
                return Err(Error::InvalidConfig(format!("{name} must be finite, got {v}")));
            }
        }
        for (name, v) in &fields[..3] {
            if *v < 0.0 {
                return Err(Error::InvalidConfig(format!("{name} must be non-negative, got {v}")));
            }
        }
        Ok(())
    }
}

/// `H = ½[J1 σz⊗I + J2 I⊗σz + (J12/2)(σz⊗σz − σz⊗I − I⊗σz) + ½(ΔBz,1 σx⊗I + ΔBz,2 I⊗σx)]`.
pub fn build_hamiltonian(p: &DeviceParams) -> Result<Operator> {
    p.validate()?;
    let i2 = Operator::identity(2);
    let zi = kron(&sigma_z(), &i2)?;
    let iz = kron(&i2, &sigma_z())?;
    let zz = kron(&sigma_z(), &sigma_z())?;
    let xi = kron(&sigma_x(), &i2)?;
    let ix = kron(&i2, &sigma_x())?;

    let h = zi.scale_real(p.j1)
        + iz.scale_real(p.j2)
        + (zz - zi - iz).scale_real(p.j12 / 2.0)
        + (xi.scale_real(p.dbz1) + ix.scale_real(p.dbz2)).scale_real(0.5);
    Ok(h.scale_real(0.5))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Segment {
    /// Duration in ns, strictly positive.
    pub duration: f64,
    pub params: DeviceParams,
}

/// Ordered piecewise-constant segments. Internal time starts at 0 with the
/// first segment; user-facing time is `t_internal − origin_shift`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PulseSchedule {
    pub segments: Vec<Segment>,
    pub origin_shift: f64,
}

impl PulseSchedule {
    pub fn new(segments: Vec<Segment>, origin_shift: f64) -> Result<Self> {
        if segments.is_empty() {
            return Err(Error::InvalidConfig("schedule needs at least one segment".into()));
        }
        for (k, s) in segments.iter().enumerate() {
            if !s.duration.is_finite() || s.duration <= 0.0 {
                return Err(Error::InvalidConfig(format!("segment {k} duration must be positive, got {}", s.duration)));
            }
            s.params.validate()?;
        }
        let sched = PulseSchedule { segments, origin_shift };
        if !origin_shift.is_finite() || origin_shift < 0.0 || origin_shift > sched.total_duration() + TIME_EPS {
            return Err(Error::InvalidConfig(format!("origin shift {origin_shift} outside the schedule")));
        }
        Ok(sched)
    }

    /// A single segment with constant parameters and no preparation phase.
    pub fn constant(params: DeviceParams, duration: f64) -> Result<Self> {
        Self::new(vec![Segment { duration, params }], 0.0)
    }

    pub fn total_duration(&self) -> f64 {
        self.segments.iter().map(|s| s.duration).sum()
    }

    /// Internal start time of every segment, plus the end time as the last entry.
    pub fn boundaries(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.segments.len() + 1);
        let mut t = 0.0;
        out.push(t);
        for s in &self.segments {
            t += s.duration;
            out.push(t);
        }
        out
    }
}

/// Preparation rotation followed by the entangling phase.
///
/// The preparation segment has all exchange couplings off and a gradient
/// `π / t_prep` on both qubits, which rotates each spin by exactly π/2 about
/// x. The entangling segment uses `base.j1`, `base.j2`, the gradients of
/// `base`, and `J12 = r_scale · base.j12` (so `base.j12` plays the role of the
/// reference coupling, [`J12_EXP`] by default). `origin_shift = t_prep`.
pub fn standard_schedule(t_prep: f64, r_scale: f64, base: &DeviceParams, horizon: f64) -> Result<PulseSchedule> {
    for (name, v) in [("t_prep", t_prep), ("r_scale", r_scale), ("horizon", horizon)] {
        if !v.is_finite() || v <= 0.0 {
            return Err(Error::InvalidConfig(format!("{name} must be positive and finite, got {v}")));
        }
    }
    base.validate()?;
    let gradient = PI / t_prep;
    let prep = DeviceParams { j1: 0.0, j2: 0.0, j12: 0.0, dbz1: gradient, dbz2: gradient };
    let entangle = DeviceParams { j12: r_scale * base.j12, ..*base };
    PulseSchedule::new(
        vec![Segment { duration: t_prep, params: prep }, Segment { duration: horizon, params: entangle }],
        t_prep,
    )
}

/// Per-segment spectral data used to evaluate propagators in O(d²).
#[derive(Debug, Clone)]
pub struct SegmentFrame {
    pub start: f64,
    pub end: f64,
    pub eig: HermEig,
    /// `U(start)`.
    pub u_start: Operator,
}

impl SegmentFrame {
    /// `exp(−i H (t − start)) U(start)`; also valid outside `[start, end]`.
    pub fn propagator(&self, t: f64) -> Operator {
        unitary_from_eig(&self.eig, t - self.start) * self.u_start
    }
}

/// A schedule with every segment diagonalized once.
#[derive(Debug, Clone)]
pub struct CompiledSchedule {
    frames: Vec<SegmentFrame>,
    total: f64,
    origin_shift: f64,
}

impl CompiledSchedule {
    pub fn new(s: &PulseSchedule) -> Result<Self> {
        let mut frames = Vec::with_capacity(s.segments.len());
        let mut u = Operator::identity(4);
        let mut start = 0.0;
        for seg in &s.segments {
            let h = build_hamiltonian(&seg.params)?;
            let eig = herm_eig(&h)?;
            let end = start + seg.duration;
            let frame = SegmentFrame { start, end, eig, u_start: u };
            u = frame.propagator(end);
            frames.push(frame);
            start = end;
        }
        Ok(CompiledSchedule { frames, total: start, origin_shift: s.origin_shift })
    }

    pub fn frames(&self) -> &[SegmentFrame] {
        &self.frames
    }

    pub fn total_duration(&self) -> f64 {
        self.total
    }

    pub fn origin_shift(&self) -> f64 {
        self.origin_shift
    }

    pub fn check_time(&self, t: f64) -> Result<()> {
        if !t.is_finite() || t < -TIME_EPS || t > self.total + TIME_EPS {
            return Err(Error::Domain(format!("time {t} ns outside schedule [0, {}]", self.total)));
        }
        Ok(())
    }

    /// Index of the segment governing time `t`; times before 0 map to the
    /// first segment and times past the end to the last one.
    pub fn segment_index(&self, t: f64) -> usize {
        self.frames.partition_point(|f| f.end <= t).min(self.frames.len() - 1)
    }

    pub fn propagator(&self, t: f64) -> Result<Operator> {
        self.check_time(t)?;
        Ok(self.propagator_unchecked(t))
    }

    pub(crate) fn propagator_unchecked(&self, t: f64) -> Operator {
        self.frames[self.segment_index(t)].propagator(t)
    }

    /// `U†(t) a U(t)`.
    pub fn interaction_picture(&self, a: &Operator, t: f64) -> Result<Operator> {
        let u = self.propagator(t)?;
        Ok(u.adjoint() * *a * u)
    }
}

/// Time-ordered propagator from internal time 0 to `t`.
pub fn propagator(s: &PulseSchedule, t: f64) -> Result<Operator> {
    CompiledSchedule::new(s)?.propagator(t)
}

/// Propagator from `t1` to `t2`: `U(t2) U(t1)†`.
pub fn propagator_between(s: &PulseSchedule, t1: f64, t2: f64) -> Result<Operator> {
    let c = CompiledSchedule::new(s)?;
    Ok(c.propagator(t2)? * c.propagator(t1)?.adjoint())
}

pub fn coupling_in_interaction_picture(s: &PulseSchedule, a: &Operator, t: f64) -> Result<Operator> {
    if a.dim() != 4 {
        return Err(Error::InvalidConfig(format!("coupling operator must be 4x4, got {0}x{0}", a.dim())));
    }
    CompiledSchedule::new(s)?.interaction_picture(a, t)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qlinalg::{unitarity_error, Operator};
    use num_complex::Complex64;

    fn zi() -> Operator {
        kron(&sigma_z(), &Operator::identity(2)).unwrap()
    }

    #[test]
    fn hamiltonian_examples() {
        let h = build_hamiltonian(&DeviceParams::zero()).unwrap();
        assert_eq!(h.max_abs(), 0.0);

        let b = 0.37;
        let h = build_hamiltonian(&DeviceParams { dbz1: b, dbz2: b, ..DeviceParams::zero() }).unwrap();
        let ev = herm_eig(&h).unwrap().values;
        for (a, w) in ev.iter().zip([b / 2.0, 0.0, 0.0, -b / 2.0]) {
            assert!((a - w).abs() < 1e-14, "{ev:?}");
        }

        let p = DeviceParams { j1: 1.3, j2: 0.4, j12: 0.25, dbz1: 0.0, dbz2: 0.0 };
        let h = build_hamiltonian(&p).unwrap();
        assert!((h[(0, 0)].re - 0.5 * (p.j1 + p.j2 - p.j12 / 2.0)).abs() < 1e-15);
        for i in 0..4 {
            for j in 0..4 {
                if i != j {
                    assert_eq!(h[(i, j)], Complex64::new(0.0, 0.0));
                }
            }
        }
    }

    #[test]
    fn invalid_params_rejected() {
        let p = DeviceParams { j1: -1.0, ..DeviceParams::zero() };
        assert!(matches!(build_hamiltonian(&p), Err(Error::InvalidConfig(_))));
        let p = DeviceParams { dbz2: f64::NAN, ..DeviceParams::zero() };
        assert!(build_hamiltonian(&p).is_err());
        // Negative gradients are allowed (field direction).
        let p = DeviceParams { dbz2: -0.2, ..DeviceParams::zero() };
        assert!(build_hamiltonian(&p).is_ok());
    }

    #[test]
    fn standard_schedule_examples() {
        let s = standard_schedule(8.0, 1.0, &DeviceParams::default(), 400.0).unwrap();
        assert_eq!(s.segments.len(), 2);
        assert_eq!(s.origin_shift, 8.0);
        assert!((s.segments[1].params.j12 - PI / 150.0).abs() < 1e-15);
        assert!((s.segments[1].params.j1 - 2.0 * PI * 0.280).abs() < 1e-15);
        assert!((s.segments[1].params.j2 - 2.0 * PI * 0.320).abs() < 1e-15);
        assert!((s.segments[0].params.dbz1 - PI / 8.0).abs() < 1e-15);
        assert_eq!(s.segments[0].params.j1, 0.0);

        let s = standard_schedule(8.0, 50.0, &DeviceParams::default(), 400.0).unwrap();
        assert!((s.segments[1].params.j12 - 50.0 * PI / 150.0).abs() < 1e-14);

        for bad in [(0.0, 1.0, 400.0), (8.0, -1.0, 400.0), (8.0, 1.0, 0.0), (f64::NAN, 1.0, 1.0)] {
            assert!(matches!(
                standard_schedule(bad.0, bad.1, &DeviceParams::default(), bad.2),
                Err(Error::InvalidConfig(_))
            ));
        }
    }

    #[test]
    fn propagator_examples() {
        let s = standard_schedule(8.0, 1.0, &DeviceParams::default(), 400.0).unwrap();
        assert!(propagator(&s, 0.0).unwrap().max_diff(&Operator::identity(4)) < 1e-15);
        assert!(matches!(propagator(&s, 500.0), Err(Error::Domain(_))));
        assert!(matches!(propagator(&s, -1.0), Err(Error::Domain(_))));

        // Calibrated preparation: |↑↑⟩ → equal-weight superposition.
        let u = propagator(&s, 8.0).unwrap();
        for i in 0..4 {
            assert!((u[(i, 0)].norm() - 0.5).abs() < 1e-12);
        }
        assert!(unitarity_error(&propagator(&s, 213.7).unwrap()) < 1e-10);

        let z = PulseSchedule::constant(DeviceParams::zero(), 10.0).unwrap();
        for t in [0.0, 3.3, 10.0] {
            assert!(propagator(&z, t).unwrap().max_diff(&Operator::identity(4)) < 1e-15);
        }
    }

    #[test]
    fn propagator_composes() {
        let s = standard_schedule(8.0, 3.0, &DeviceParams::default(), 100.0).unwrap();
        for (t1, t2) in [(1.0, 5.0), (3.0, 50.0), (20.0, 99.0)] {
            let lhs = propagator(&s, t2).unwrap();
            let rhs = propagator_between(&s, t1, t2).unwrap() * propagator(&s, t1).unwrap();
            assert!(lhs.max_diff(&rhs) < 1e-9);
        }
    }

    #[test]
    fn interaction_picture_examples() {
        let s = standard_schedule(8.0, 1.0, &DeviceParams::default(), 400.0).unwrap();
        let a = zi();
        assert!(coupling_in_interaction_picture(&s, &a, 0.0).unwrap().max_diff(&a) < 1e-15);
        let at = coupling_in_interaction_picture(&s, &a, 123.4).unwrap();
        assert!((at.norm() - a.norm()).abs() < 1e-12);

        let diag_only = DeviceParams { dbz1: 0.0, dbz2: 0.0, ..DeviceParams::default() };
        let s = PulseSchedule::constant(diag_only, 50.0).unwrap();
        for t in [0.0, 7.0, 49.0] {
            assert!(coupling_in_interaction_picture(&s, &a, t).unwrap().max_diff(&a) < 1e-14);
        }
        assert!(coupling_in_interaction_picture(&s, &sigma_z(), 1.0).is_err());
    }

    #[test]
    fn segment_lookup() {
        let s = standard_schedule(8.0, 1.0, &DeviceParams::default(), 400.0).unwrap();
        let c = CompiledSchedule::new(&s).unwrap();
        assert_eq!(c.segment_index(-3.0), 0);
        assert_eq!(c.segment_index(7.99), 0);
        assert_eq!(c.segment_index(8.0), 1);
        assert_eq!(c.segment_index(408.0), 1);
        assert_eq!(c.segment_index(1e6), 1);
    }
}
