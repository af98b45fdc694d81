//! Learning-machine components.
//!
//! Both components share one update rule: an internal register `p` moves
//! toward each incoming message `e` as `p ← γp + (1−γ)e` with `0 < γ < 1`.
//! The register is a convex combination of everything the machine has seen,
//! so it learns the running average of its input at a pace set by `γ`.
//!
//! * [`ThresholdDetector`] — turns messages into clicks: after updating `p`
//!   it emits a click when `|p|²` exceeds a fresh uniform number.
//! * [`BeamSplitter`] — routes spinor messengers between two ports using
//!   per-port intensity and message registers combined through the lossless
//!   two-port transfer (`√T` transmitted, `i√R` reflected).

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::types::{SpinorMessage, UnitVec2};

/// Adaptive threshold detector: internal vector `p`, memory `γ`, and click
/// bookkeeping. `p` starts at the origin — no preferred direction before data.
#[derive(Debug, Clone)]
pub struct ThresholdDetector {
    p: [f64; 2],
    gamma: f64,
    clicks: u64,
    arrivals: u64,
}

impl ThresholdDetector {
    pub fn new(gamma: f64) -> Self {
        assert!(
            gamma > 0.0 && gamma < 1.0,
            "detector memory must lie in (0,1), got {gamma}"
        );
        ThresholdDetector {
            p: [0.0, 0.0],
            gamma,
            clicks: 0,
            arrivals: 0,
        }
    }

    pub fn internal(&self) -> [f64; 2] {
        self.p
    }

    pub fn clicks(&self) -> u64 {
        self.clicks
    }

    pub fn arrivals(&self) -> u64 {
        self.arrivals
    }

    /// `p ← γp + (1−γ)e`; counts the arrival.
    pub fn update(&mut self, e: UnitVec2) {
        let g = self.gamma;
        self.p[0] = g * self.p[0] + (1.0 - g) * e.x;
        self.p[1] = g * self.p[1] + (1.0 - g) * e.y;
        self.arrivals += 1;
    }

    /// Threshold decision for the message just absorbed: clicks when
    /// `|p|² > r`. The messenger is consumed either way. Call after
    /// [`ThresholdDetector::update`].
    pub fn click(&mut self, r: f64) -> bool {
        let fired = self.p[0] * self.p[0] + self.p[1] * self.p[1] > r;
        if fired {
            self.clicks += 1;
        }
        fired
    }

    /// Update-then-threshold for one messenger.
    pub fn process(&mut self, e: UnitVec2, r: f64) -> bool {
        self.update(e);
        self.click(r)
    }
}

/// Relaxation rate `Γ = (1−γ)/(τγ)` of the continuum limit of the update
/// rule, `∂p/∂t = −Γp + Γe(t)`, for event spacing `τ`.
pub fn relaxation_rate(gamma: f64, tau: f64) -> Result<f64> {
    if !(gamma > 0.0 && gamma < 1.0) {
        return Err(Error::InvalidParameter {
            name: "gamma",
            value: gamma,
            reason: "memory parameter must lie in (0,1)",
        });
    }
    if tau <= 0.0 {
        return Err(Error::InvalidParameter {
            name: "tau",
            value: tau,
            reason: "event spacing must be positive",
        });
    }
    Ok((1.0 - gamma) / (tau * gamma))
}

/// Exit port of a beam splitter, also used to label its inputs.
pub type Port = usize;

/// Event-based beam splitter for spinor messengers.
///
/// Per port it keeps an intensity register `w` (learned arrival fraction) and
/// a message register `u` (learned mean message), both updated with the γ
/// rule. The arriving message feeds its own port's amplitude directly; the
/// opposite port contributes its stored message, unit-normalized, weighted by
/// `√w`. The two amplitudes mix through `b0 = √T·a0 + i√R·a1`,
/// `b1 = i√R·a0 + √T·a1`, the messenger is routed with probability
/// `|b_k|²/(|b0|²+|b1|²)` and leaves carrying the normalized `b` of its port.
#[derive(Debug, Clone)]
pub struct BeamSplitter {
    reflectance: f64,
    gamma: f64,
    w: [f64; 2],
    u: [[Complex64; 2]; 2],
}

impl BeamSplitter {
    pub fn new(reflectance: f64, gamma: f64) -> Self {
        assert!(
            (0.0..=1.0).contains(&reflectance),
            "reflectance must lie in [0,1], got {reflectance}"
        );
        assert!(
            gamma > 0.0 && gamma < 1.0,
            "beam-splitter memory must lie in (0,1), got {gamma}"
        );
        BeamSplitter {
            reflectance,
            gamma,
            w: [0.0, 0.0],
            u: [[Complex64::new(0.0, 0.0); 2]; 2],
        }
    }

    pub fn intensity_registers(&self) -> [f64; 2] {
        self.w
    }

    /// Routes one messenger arriving at `in_port`, consuming one uniform
    /// number `r`. Returns the exit port and the outgoing message.
    ///
    /// Cold start (all registers still zero): routed by the bare (T, R)
    /// probabilities, message passed through unchanged.
    pub fn route(&mut self, msg: &SpinorMessage, in_port: Port, r: f64) -> (Port, SpinorMessage) {
        debug_assert!(in_port < 2);
        let g = self.gamma;
        let other = 1 - in_port;

        self.w[in_port] = g * self.w[in_port] + (1.0 - g);
        self.w[other] *= g;
        self.u[in_port][0] = g * self.u[in_port][0] + (1.0 - g) * msg.up;
        self.u[in_port][1] = g * self.u[in_port][1] + (1.0 - g) * msg.down;

        let mut a = [[Complex64::new(0.0, 0.0); 2]; 2];
        a[in_port] = [
            self.w[in_port].sqrt() * msg.up,
            self.w[in_port].sqrt() * msg.down,
        ];
        let stored = self.u[other];
        let stored_norm = (stored[0].norm_sqr() + stored[1].norm_sqr()).sqrt();
        if stored_norm > 0.0 {
            let scale = self.w[other].sqrt() / stored_norm;
            a[other] = [scale * stored[0], scale * stored[1]];
        }

        let t_amp = Complex64::new((1.0 - self.reflectance).sqrt(), 0.0);
        let r_amp = Complex64::new(0.0, self.reflectance.sqrt());
        let b0 = [
            t_amp * a[0][0] + r_amp * a[1][0],
            t_amp * a[0][1] + r_amp * a[1][1],
        ];
        let b1 = [
            r_amp * a[0][0] + t_amp * a[1][0],
            r_amp * a[0][1] + t_amp * a[1][1],
        ];
        let i0 = b0[0].norm_sqr() + b0[1].norm_sqr();
        let i1 = b1[0].norm_sqr() + b1[1].norm_sqr();
        let total = i0 + i1;

        if total == 0.0 {
            // Cold start: no learned registers yet.
            let transmit = r < 1.0 - self.reflectance;
            let port = if transmit { in_port } else { other };
            return (port, *msg);
        }

        let (port, b, intensity) = if r < i0 / total {
            (0, b0, i0)
        } else {
            (1, b1, i1)
        };
        let scale = 1.0 / intensity.sqrt();
        let out = SpinorMessage {
            up: scale * b[0],
            down: scale * b[1],
            ..*msg
        };
        (port, out)
    }
}
