//! Angles and the two message types carried by messengers.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::TAU;

/// Tolerance on unit-norm invariants for freshly constructed messages.
pub const UNIT_NORM_TOL: f64 = 1e-12;

/// Plane angle in radians. Angles are stored as given; [`Angle::canonical`]
/// folds into `[0, 2π)` where a canonical representative is needed.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Angle(f64);

impl Angle {
    pub fn new(radians: f64) -> Self {
        Angle(radians)
    }

    pub fn from_degrees(degrees: f64) -> Self {
        Angle(degrees.to_radians())
    }

    pub fn radians(self) -> f64 {
        self.0
    }

    pub fn degrees(self) -> f64 {
        self.0.to_degrees()
    }

    /// Canonical representative in `[0, 2π)`.
    pub fn canonical(self) -> Self {
        Angle(self.0.rem_euclid(TAU))
    }
}

impl From<f64> for Angle {
    fn from(radians: f64) -> Self {
        Angle(radians)
    }
}

/// Unit vector in the plane: the message `(cos 2πft, sin 2πft)` carried by a
/// photon messenger, and the internal vector of a threshold detector.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UnitVec2 {
    pub x: f64,
    pub y: f64,
}

impl UnitVec2 {
    /// Panics if `(x, y)` is off the unit circle by more than [`UNIT_NORM_TOL`].
    pub fn new(x: f64, y: f64) -> Self {
        let norm2 = x * x + y * y;
        assert!(
            (norm2 - 1.0).abs() <= UNIT_NORM_TOL,
            "not a unit vector: |v|^2 = {norm2}"
        );
        UnitVec2 { x, y }
    }

    /// Unit vector at the given phase: `(cos φ, sin φ)`.
    pub fn from_phase(phase: f64) -> Self {
        UnitVec2 {
            x: phase.cos(),
            y: phase.sin(),
        }
    }
}

/// Axis labels for spinor rotations.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Axis {
    X,
    Y,
    Z,
}

/// Message carried by a neutron messenger: a two-component complex spinor
/// `(e^{iψ1} cos θ/2, e^{iψ2} sin θ/2)` encoding the magnetic moment, plus the
/// time of flight `t` and the internal clock frequency `f` (ψ_i = 2πft + δ_i).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpinorMessage {
    pub up: Complex64,
    pub down: Complex64,
    /// Time of flight since emission.
    pub tof: f64,
    /// Internal oscillator frequency.
    pub freq: f64,
}

impl SpinorMessage {
    /// Spin-up message with zero time of flight.
    pub fn spin_up(freq: f64) -> Self {
        SpinorMessage {
            up: Complex64::new(1.0, 0.0),
            down: Complex64::new(0.0, 0.0),
            tof: 0.0,
            freq,
        }
    }

    pub fn norm_sqr(&self) -> f64 {
        self.up.norm_sqr() + self.down.norm_sqr()
    }

    pub fn is_unit(&self) -> bool {
        (self.norm_sqr() - 1.0).abs() <= UNIT_NORM_TOL
    }

    /// Rotation `exp(-i·(angle/2)·σ_axis)` of the spin part.
    pub fn rotated(&self, axis: Axis, angle: Angle) -> Self {
        let half = 0.5 * angle.radians();
        let (c, s) = (half.cos(), half.sin());
        let (up, down) = match axis {
            Axis::X => {
                // [[cos, -i sin], [-i sin, cos]]
                let i_s = Complex64::new(0.0, -s);
                (c * self.up + i_s * self.down, i_s * self.up + c * self.down)
            }
            Axis::Y => {
                // [[cos, -sin], [sin, cos]]
                (c * self.up - s * self.down, s * self.up + c * self.down)
            }
            Axis::Z => (
                Complex64::from_polar(1.0, -half) * self.up,
                Complex64::from_polar(1.0, half) * self.down,
            ),
        };
        SpinorMessage { up, down, ..*self }
    }

    /// Advances the internal clock by `χ / 2πf`, multiplying both components
    /// by `e^{iχ}`.
    pub fn phase_shifted(&self, chi: Angle) -> Self {
        let rot = Complex64::from_polar(1.0, chi.radians());
        SpinorMessage {
            up: rot * self.up,
            down: rot * self.down,
            tof: self.tof + chi.radians() / (TAU * self.freq),
            ..*self
        }
    }

    /// Squared projection on spin-up along z.
    pub fn up_weight(&self) -> f64 {
        self.up.norm_sqr()
    }
}
