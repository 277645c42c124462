//! Memory integrals `Λ(t) = ∫₀^{τ_up} C(τ) A(t − τ) dτ` over a piecewise-constant schedule.
//!
//! Within segment `j` the interaction-picture coupling is
//! `A(s) = W† (ã ∘ Φ(s − s_j)) W` with `W = V† U(s_j)`, `ã = V† a V` and
//! `Φ_mn(Δ) = e^{i(E_m − E_n)Δ}`. The τ-integral of each matrix element is then
//! `e^{iω(t − s_j)} ∫ C(τ) e^{−iωτ} dτ`, which is read from cumulative
//! trapezoid tables `G_ω(τ)` built once per segment and Bohr frequency.

use num_complex::Complex64;

use crate::bath::CorrelationKernel;
use crate::model::{CompiledSchedule, SegmentFrame};
use crate::qlinalg::Operator;

/// Relative distance to a grid point below which `τ` is snapped onto the grid.
const GRID_SNAP: f64 = 1e-7;

fn cis(phase: f64) -> Complex64 {
    Complex64::from_polar(1.0, phase)
}

/// Cumulative transforms `G_mn(τ_k) = ∫₀^{τ_k} C(τ) e^{−iω_mn τ} dτ` for one
/// segment and one bath.
#[derive(Debug, Clone)]
pub(crate) struct SegmentTables {
    energies: [f64; 4],
    tables: Vec<Vec<Complex64>>,
}

impl SegmentTables {
    pub fn build(frame: &SegmentFrame, kernel: &CorrelationKernel) -> Self {
        let mut energies = [0.0; 4];
        energies.copy_from_slice(&frame.eig.values);
        let n = kernel.values.len();
        let h = kernel.dtau;
        let mut tables = Vec::with_capacity(16);
        for m in 0..4 {
            for nn in 0..4 {
                let omega = energies[m] - energies[nn];
                let step = cis(-omega * h);
                let mut phase = Complex64::new(1.0, 0.0);
                let mut table = Vec::with_capacity(n);
                let mut acc = Complex64::new(0.0, 0.0);
                let mut prev = kernel.values[0];
                table.push(acc);
                for k in 1..n {
                    if k % 64 == 0 {
                        phase = cis(-omega * k as f64 * h);
                    } else {
                        phase *= step;
                    }
                    let cur = kernel.values[k] * phase;
                    acc += (prev + cur) * (0.5 * h);
                    table.push(acc);
                    prev = cur;
                }
                tables.push(table);
            }
        }
        SegmentTables { energies, tables }
    }

    /// `G_mn(τ)` for all 16 pairs. Off-grid points add a partial trapezoid
    /// panel using the linearly interpolated kernel.
    fn cumulative(&self, kernel: &CorrelationKernel, tau: f64, out: &mut [Complex64; 16]) {
        let h = kernel.dtau;
        let x = tau / h;
        let nearest = x.round();
        if (x - nearest).abs() < GRID_SNAP {
            let k = (nearest as usize).min(kernel.intervals());
            for (o, t) in out.iter_mut().zip(&self.tables) {
                *o = t[k];
            }
            return;
        }
        let k = (x.floor() as usize).min(kernel.intervals());
        let tau_k = k as f64 * h;
        let c_k = kernel.values[k];
        let c_tau = kernel.interpolate(tau);
        let width = tau - tau_k;
        // e^{−iω_mn τ} = e^{−iE_m τ} e^{iE_n τ}
        let at_k: [Complex64; 4] = self.energies.map(|e| cis(-e * tau_k));
        let at_tau: [Complex64; 4] = self.energies.map(|e| cis(-e * tau));
        for m in 0..4 {
            for n in 0..4 {
                let idx = 4 * m + n;
                let f_k = c_k * at_k[m] * at_k[n].conj();
                let f_tau = c_tau * at_tau[m] * at_tau[n].conj();
                out[idx] = self.tables[idx][k] + (f_k + f_tau) * (0.5 * width);
            }
        }
    }
}

/// Precomputed data for one coupling operator on one segment.
#[derive(Debug, Clone)]
struct SegmentCoupling {
    start: f64,
    end: f64,
    /// `W = V† U(s_j)`.
    w: Operator,
    /// `ã = V† a V` in the segment eigenbasis.
    a_tilde: Operator,
    energies: [f64; 4],
    tables: usize,
}

/// Everything needed to evaluate `A(t)` and `Λ(t)` for one coupling term.
#[derive(Debug, Clone)]
pub(crate) struct CouplingMemory {
    segments: Vec<SegmentCoupling>,
    bath: usize,
}

impl CouplingMemory {
    pub fn new(schedule: &CompiledSchedule, a: &Operator, bath: usize, tables_offset: usize) -> Self {
        let segments = schedule
            .frames()
            .iter()
            .enumerate()
            .map(|(j, f)| {
                let v = f.eig.vectors;
                let mut energies = [0.0; 4];
                energies.copy_from_slice(&f.eig.values);
                SegmentCoupling {
                    start: f.start,
                    end: f.end,
                    w: v.adjoint() * f.u_start,
                    a_tilde: v.adjoint() * *a * v,
                    energies,
                    tables: tables_offset + j,
                }
            })
            .collect();
        CouplingMemory { segments, bath }
    }

    pub fn bath(&self) -> usize {
        self.bath
    }

    fn phases(energies: &[f64; 4], delta: f64) -> Operator {
        let p: [Complex64; 4] = energies.map(|e| cis(e * delta));
        let mut m = Operator::zeros(4);
        for i in 0..4 {
            for j in 0..4 {
                m[(i, j)] = p[i] * p[j].conj();
            }
        }
        m
    }

    /// `A(t) = U†(t) a U(t)`.
    pub fn coupling_at(&self, schedule: &CompiledSchedule, t: f64) -> Operator {
        let seg = &self.segments[schedule.segment_index(t)];
        let inner = seg.a_tilde.hadamard(&Self::phases(&seg.energies, t - seg.start));
        seg.w.adjoint() * inner * seg.w
    }

    /// `Λ(t)` with the τ-integral truncated at `tau_up`. In Markov mode the
    /// first segment is extended to negative times so the window is always full.
    pub fn memory(
        &self,
        t: f64,
        tau_up: f64,
        markov: bool,
        kernel: &CorrelationKernel,
        tables: &[SegmentTables],
    ) -> Operator {
        let mut lambda = Operator::zeros(4);
        let mut g_hi = [Complex64::new(0.0, 0.0); 16];
        let mut g_lo = [Complex64::new(0.0, 0.0); 16];
        let last = self.segments.len() - 1;
        for (j, seg) in self.segments.iter().enumerate().rev() {
            let end = if j == last { f64::INFINITY } else { seg.end };
            let start = if j == 0 && markov { f64::NEG_INFINITY } else { seg.start };
            let tau_a = (t - end).max(0.0);
            let tau_b = (t - start).min(tau_up);
            if tau_a >= tau_up {
                break;
            }
            if tau_b <= tau_a {
                continue;
            }
            let tab = &tables[seg.tables];
            tab.cumulative(kernel, tau_b, &mut g_hi);
            if tau_a > 0.0 {
                tab.cumulative(kernel, tau_a, &mut g_lo);
            } else {
                g_lo = [Complex64::new(0.0, 0.0); 16];
            }
            let phase = Self::phases(&seg.energies, t - seg.start);
            let mut inner = Operator::zeros(4);
            for m in 0..4 {
                for n in 0..4 {
                    let idx = 4 * m + n;
                    inner[(m, n)] = seg.a_tilde[(m, n)] * phase[(m, n)] * (g_hi[idx] - g_lo[idx]);
                }
            }
            lambda = lambda + seg.w.adjoint() * inner * seg.w;
        }
        lambda
    }
}

/// Reference quadrature of `Λ(t)`: samples `C(τ_k) A(t − τ_k)` with exact
/// propagators on the kernel grid and applies the trapezoid rule, plus a
/// partial panel when `tau_up` is off-grid.
pub(crate) fn memory_direct(
    schedule: &CompiledSchedule,
    a: &Operator,
    t: f64,
    tau_up: f64,
    kernel: &CorrelationKernel,
) -> Operator {
    let h = kernel.dtau;
    let coupling = |tau: f64| {
        let u = schedule.propagator_unchecked(t - tau);
        u.adjoint() * *a * u
    };
    let x = tau_up / h;
    let (full, rest) = if (x - x.round()).abs() < GRID_SNAP {
        (x.round() as usize, 0.0)
    } else {
        (x.floor() as usize, tau_up - x.floor() * h)
    };
    let mut lambda = Operator::zeros(4);
    if full > 0 {
        for k in 0..=full {
            let w = if k == 0 || k == full { 0.5 * h } else { h };
            lambda = lambda + coupling(k as f64 * h).scale(kernel.values[k] * w);
        }
    }
    if rest > 0.0 {
        let tau_k = full as f64 * h;
        let f_k = coupling(tau_k).scale(kernel.values[full]);
        let f_end = coupling(tau_up).scale(kernel.interpolate(tau_up));
        lambda = lambda + (f_k + f_end).scale_real(0.5 * rest);
    }
    lambda
}
