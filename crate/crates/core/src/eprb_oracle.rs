//! Semi-analytic cross-check of the paired-photon engine.
//!
//! The generator's per-event densities are known in closed form: the
//! polarizer responds with `P(x|α,ξ) = [1 + x·cos 2(α−ξ)]/2` and the time
//! tag is uniform on `[0, T0 sin⁴ 2(ξ−α)]`. Conditioning on the coincidence
//! window therefore reduces to an exact two-uniform overlap probability, and
//! the post-selected correlation becomes a one-dimensional integral over the
//! source angle ξ (the pair carries ξ and ξ + π/2). This module evaluates
//! that integral by deterministic quadrature, independently of the
//! event-by-event code path it validates.

use serde::{Deserialize, Serialize};
use std::f64::consts::TAU;

use crate::error::{Error, Result};

/// Coincidence window used by the quadrature.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Window {
    /// W → 0 limit: the window indicator collapses to the overlap kernel
    /// `2W / max(λ₁, λ₂)`; the factor 2W cancels in the normalization.
    ZeroLimit,
    /// Finite window width in nanoseconds.
    Width(f64),
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OracleConfig {
    /// Quadrature nodes on the ξ axis; at least 64.
    #[serde(default = "default_grid")]
    pub grid_points: usize,
    pub window: Window,
    #[serde(default = "default_t0")]
    pub t0_ns: f64,
}

fn default_grid() -> usize {
    4096
}

fn default_t0() -> f64 {
    2000.0
}

impl OracleConfig {
    pub fn validate(&self) -> Result<()> {
        if self.grid_points < 64 {
            return Err(Error::InvalidParameter {
                name: "grid_points",
                value: self.grid_points as f64,
                reason: "quadrature needs at least 64 nodes",
            });
        }
        if let Window::Width(w) = self.window {
            if w < 0.0 {
                return Err(Error::InvalidParameter {
                    name: "window",
                    value: w,
                    reason: "window width cannot be negative",
                });
            }
        }
        if self.t0_ns <= 0.0 {
            return Err(Error::InvalidParameter {
                name: "t0_ns",
                value: self.t0_ns,
                reason: "time-tag scale must be positive",
            });
        }
        Ok(())
    }
}

/// Polarizer response density `P(x|α,ξ) = [1 + x·cos 2(α−ξ)] / 2`.
pub fn polarizer_prob(x: i8, alpha: f64, xi: f64) -> f64 {
    debug_assert!(x == 1 || x == -1);
    0.5 * (1.0 + x as f64 * (2.0 * (alpha - xi)).cos())
}

/// Probability that two independent uniforms t₁ ∈ [0, λ₁], t₂ ∈ [0, λ₂]
/// land within `w` of each other; exact band-area formula with the
/// degenerate point-mass cases handled explicitly.
pub fn overlap_prob(lambda1: f64, lambda2: f64, w: f64) -> f64 {
    debug_assert!(lambda1 >= 0.0 && lambda2 >= 0.0 && w >= 0.0);
    let (a, b) = if lambda1 <= lambda2 {
        (lambda1, lambda2)
    } else {
        (lambda2, lambda1)
    };
    if a == 0.0 {
        if b == 0.0 {
            return 1.0; // both tags are exactly zero
        }
        return (w.min(b)) / b; // point mass against one uniform
    }
    if w >= b {
        return 1.0;
    }
    // Complement: corner triangles clipped to the a×b rectangle.
    let tri = |long: f64, short: f64| -> f64 {
        // area of {v − u > w} within [0, short] × [0, long]
        if w >= long {
            return 0.0;
        }
        let u_star = short.min(long - w);
        u_star * (long - w) - 0.5 * u_star * u_star
    };
    let outside = tri(b, a) + tri(a, b);
    (1.0 - outside / (a * b)).clamp(0.0, 1.0)
}

/// Delay scale λ(ξ′) = T0 sin⁴(2ξ′).
fn delay_scale(t0: f64, xi_prime: f64) -> f64 {
    t0 * (2.0 * xi_prime).sin().powi(2).powi(2)
}

/// Window kernel at source angle ξ for settings (α₁, α₂).
fn window_kernel(cfg: &OracleConfig, alpha1: f64, alpha2: f64, xi: f64) -> Result<f64> {
    let l1 = delay_scale(cfg.t0_ns, xi - alpha1);
    let l2 = delay_scale(cfg.t0_ns, xi - alpha2);
    match cfg.window {
        Window::Width(w) => Ok(overlap_prob(l1, l2, w)),
        Window::ZeroLimit => {
            let m = l1.max(l2);
            if m == 0.0 {
                // Both delay scales vanish on this node; the limiting measure
                // is singular here and the node weight is unbounded.
                return Err(Error::SingularQuadratureNode);
            }
            Ok(1.0 / m)
        }
    }
}

/// Joint outcome probabilities P(x₁, x₂ | α₁, α₂) after window
/// post-selection, as [P₊₊, P₊₋, P₋₊, P₋₋].
pub fn oracle_probabilities(alpha1: f64, alpha2: f64, cfg: &OracleConfig) -> Result<[f64; 4]> {
    cfg.validate()?;
    let n = cfg.grid_points;
    let h = TAU / n as f64;
    let mut weight = 0.0;
    let mut joint = [0.0f64; 4];
    for k in 0..n {
        // Midpoint nodes keep the sin⁴ zeros off the grid.
        let xi = (k as f64 + 0.5) * h;
        let k_w = window_kernel(cfg, alpha1, alpha2, xi)?;
        if k_w == 0.0 {
            continue;
        }
        weight += k_w;
        // Particle 2 carries ξ + π/2.
        let xi2 = xi + std::f64::consts::FRAC_PI_2;
        for (slot, (x1, x2)) in [(1, 1), (1, -1), (-1, 1), (-1, -1)].iter().enumerate() {
            joint[slot] += k_w * polarizer_prob(*x1, alpha1, xi) * polarizer_prob(*x2, alpha2, xi2);
        }
    }
    if weight == 0.0 {
        return Err(Error::VanishingDensity);
    }
    Ok(joint.map(|j| j / weight))
}

/// Post-selected two-particle correlation
/// `E = Σ x₁x₂ P(x₁,x₂|α₁,α₂)` by quadrature.
pub fn oracle_correlation(alpha1: f64, alpha2: f64, cfg: &OracleConfig) -> Result<f64> {
    let p = oracle_probabilities(alpha1, alpha2, cfg)?;
    Ok(p[0] - p[1] - p[2] + p[3])
}
