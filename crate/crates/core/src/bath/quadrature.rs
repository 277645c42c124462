//! Composite Gauss-Legendre rules on `[0, W]` for the bath frequency integrals.

use std::f64::consts::PI;

/// Nodes and weights of the `n`-point Gauss-Legendre rule on `[-1, 1]`.
pub fn gauss_legendre(n: usize) -> Vec<(f64, f64)> {
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let kf = k as f64;
                let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
                p0 = p1;
                p1 = p2;
            }
            dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        out.push((x, 2.0 / ((1.0 - x * x) * dp * dp)));
    }
    out
}

const NODES_PER_PANEL: usize = 10;

/// A fixed set of quadrature nodes `(ω, weight)`.
#[derive(Debug, Clone)]
pub struct FrequencyRule {
    pub nodes: Vec<(f64, f64)>,
}

impl FrequencyRule {
    /// Panels no wider than `max_width` covering `[0, upper]`. When `kt > 0`
    /// panels near the origin are additionally limited to `π·kT` so the
    /// imaginary-axis poles of `coth(ω / 2kT)` stay well outside each panel.
    pub fn build(upper: f64, max_width: f64, kt: f64) -> Self {
        let gl = gauss_legendre(NODES_PER_PANEL);
        let mut nodes = Vec::new();
        let mut a = 0.0;
        while a < upper {
            let mut h = max_width;
            if kt > 0.0 {
                h = h.min((PI * kt).max(0.5 * a));
            }
            let b = (a + h).min(upper);
            let half = 0.5 * (b - a);
            let mid = 0.5 * (a + b);
            for &(x, w) in &gl {
                nodes.push((mid + half * x, half * w));
            }
            a = b;
        }
        FrequencyRule { nodes }
    }

    pub fn integrate<F: Fn(f64) -> f64>(&self, f: F) -> f64 {
        self.nodes.iter().map(|&(x, w)| w * f(x)).sum()
    }
}
