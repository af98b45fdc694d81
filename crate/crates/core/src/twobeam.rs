//! Two-source interference built one detection event at a time.
//!
//! Two coherent line sources of width `a`, separated center-to-center by `d`,
//! emit messengers toward a semicircular screen of radius `X` tiled by
//! adaptive threshold detectors. Lengths are in units of `c/f` (both set to 1
//! by default), so one unit is one wavelength.
//!
//! Each messenger carries the phase vector `(cos 2πft, sin 2πft)` of its own
//! time of flight. Exactly one detector absorbs it; that detector updates its
//! register and decides whether to click. No detector sees any other
//! messenger's state, and the source waits until the messenger is destroyed —
//! the run is locally causal by construction.

use serde::{Deserialize, Serialize};

use crate::dlm::ThresholdDetector;
use crate::error::{Error, Result};
use crate::stream::RngStream;
use crate::types::{Angle, UnitVec2};

/// Substream roles within one run.
const STREAM_EMISSION: u64 = 0;
const STREAM_DETECTORS: u64 = 1;

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TwoBeamConfig {
    /// Source width, units of c/f.
    pub a: f64,
    /// Center-to-center source distance, units of c/f.
    pub d: f64,
    /// Screen radius, units of c/f.
    #[serde(rename = "screen_radius")]
    pub screen_radius: f64,
    /// Messenger frequency; 1 in the standard parameterization.
    #[serde(default = "one")]
    pub frequency: f64,
    /// Messenger velocity; 1 in the standard parameterization.
    #[serde(default = "one")]
    pub velocity: f64,
    /// Detector memory.
    pub gamma: f64,
    /// Number of detectors tiling the semicircle; odd, so θ = 0 is a center.
    #[serde(default = "default_detectors")]
    pub n_detectors: usize,
    pub events_total: u64,
    pub seed: u64,
}

fn one() -> f64 {
    1.0
}

fn default_detectors() -> usize {
    181
}

impl TwoBeamConfig {
    /// Standard configuration: a = c/f, d = 5c/f, X = 100c/f, γ = 0.99,
    /// 181 detectors receiving 10⁴ messengers on average.
    pub fn standard(seed: u64) -> Self {
        TwoBeamConfig {
            a: 1.0,
            d: 5.0,
            screen_radius: 100.0,
            frequency: 1.0,
            velocity: 1.0,
            gamma: 0.99,
            n_detectors: 181,
            events_total: 181 * 10_000,
            seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let check = |ok: bool, name: &'static str, value: f64, reason: &'static str| {
            if ok {
                Ok(())
            } else {
                Err(Error::InvalidParameter {
                    name,
                    value,
                    reason,
                })
            }
        };
        check(self.a > 0.0, "a", self.a, "source width must be positive")?;
        check(
            self.d >= 0.0,
            "d",
            self.d,
            "source distance cannot be negative",
        )?;
        check(
            self.screen_radius > self.d / 2.0 + self.a / 2.0,
            "screen_radius",
            self.screen_radius,
            "sources must lie inside the screen",
        )?;
        check(
            self.gamma > 0.0 && self.gamma < 1.0,
            "gamma",
            self.gamma,
            "detector memory must lie in (0,1)",
        )?;
        check(
            self.n_detectors % 2 == 1,
            "n_detectors",
            self.n_detectors as f64,
            "detector count must be odd so θ=0 is a detector center",
        )?;
        check(
            self.frequency > 0.0,
            "frequency",
            self.frequency,
            "must be positive",
        )?;
        check(
            self.velocity > 0.0,
            "velocity",
            self.velocity,
            "must be positive",
        )?;
        Ok(())
    }
}

/// Per-detector tallies of one run.
#[derive(Debug, Clone, Serialize)]
pub struct DetectorCounts {
    /// Angular detector centers, radians, ascending over (−π/2, π/2).
    pub centers_rad: Vec<f64>,
    pub arrivals: Vec<u64>,
    pub clicks: Vec<u64>,
    pub events_total: u64,
}

impl DetectorCounts {
    pub fn total_clicks(&self) -> u64 {
        self.clicks.iter().sum()
    }

    /// Ratio of detected to emitted messengers — the overall detection
    /// efficiency of the configuration, not of the detector model.
    pub fn detected_ratio(&self) -> f64 {
        self.total_clicks() as f64 / self.events_total as f64
    }
}

/// One emission: position `y` drawn uniformly from the two source segments
/// (each with probability 1/2), direction `β` uniform on (−π/2, π/2).
pub fn sample_emission(stream: &mut RngStream, cfg: &TwoBeamConfig) -> (f64, Angle) {
    let center = if stream.coin() {
        -cfg.d / 2.0
    } else {
        cfg.d / 2.0
    };
    let y = center + stream.uniform_in(-cfg.a / 2.0, cfg.a / 2.0);
    let beta = stream.uniform_in(-std::f64::consts::FRAC_PI_2, std::f64::consts::FRAC_PI_2);
    (y, Angle::new(beta))
}

/// Angular position θ where a messenger leaving `(0, y)` under direction β
/// meets the circle of radius `X`:
/// `sin θ = (y cos²β + sin β √(X² − y² cos²β)) / X`.
pub fn hit_angle(y: f64, beta: Angle, screen_radius: f64) -> Result<Angle> {
    if y.abs() >= screen_radius {
        return Err(Error::InvalidParameter {
            name: "y",
            value: y,
            reason: "emission point must lie strictly inside the screen",
        });
    }
    let b = beta.radians();
    let cos_b = b.cos();
    let sin_theta = (y * cos_b * cos_b
        + b.sin() * (screen_radius * screen_radius - y * y * cos_b * cos_b).sqrt())
        / screen_radius;
    Ok(Angle::new(sin_theta.clamp(-1.0, 1.0).asin()))
}

/// Time of flight from `(0, y)` to the screen point at angle θ:
/// `t = √(X² − 2 y X sin θ + y²) / c`.
pub fn flight_time(y: f64, theta: Angle, screen_radius: f64, velocity: f64) -> f64 {
    let s = theta.radians().sin();
    (screen_radius * screen_radius - 2.0 * y * screen_radius * s + y * y).sqrt() / velocity
}

/// Message encoding a time of flight: `(cos 2πft, sin 2πft)`.
pub fn message_of(t: f64, frequency: f64) -> UnitVec2 {
    UnitVec2::from_phase(std::f64::consts::TAU * frequency * t)
}

/// Index of the detector whose angular window contains θ. Bins of width
/// π/n tile [−π/2, π/2]; nearest center wins.
pub fn detector_index(theta: Angle, n_detectors: usize) -> usize {
    let width = std::f64::consts::PI / n_detectors as f64;
    let half = (n_detectors - 1) as f64 / 2.0;
    let idx = (theta.radians() / width + half).round() as isize;
    idx.clamp(0, n_detectors as isize - 1) as usize
}

/// Detector centers on the uniform angular grid.
pub fn detector_centers(n_detectors: usize) -> Vec<f64> {
    let width = std::f64::consts::PI / n_detectors as f64;
    let half = (n_detectors - 1) as f64 / 2.0;
    (0..n_detectors)
        .map(|j| (j as f64 - half) * width)
        .collect()
}

/// Runs the full experiment: emit → propagate → one detector updates and
/// decides → messenger destroyed; repeated `events_total` times.
pub fn run_twobeam(cfg: &TwoBeamConfig) -> Result<DetectorCounts> {
    cfg.validate()?;
    let mut emission = RngStream::new(cfg.seed, STREAM_EMISSION);
    let mut thresholds = RngStream::new(cfg.seed, STREAM_DETECTORS);
    let mut detectors: Vec<ThresholdDetector> = (0..cfg.n_detectors)
        .map(|_| ThresholdDetector::new(cfg.gamma))
        .collect();

    for _ in 0..cfg.events_total {
        let (y, beta) = sample_emission(&mut emission, cfg);
        let theta = hit_angle(y, beta, cfg.screen_radius)?;
        let t = flight_time(y, theta, cfg.screen_radius, cfg.velocity);
        let e = message_of(t, cfg.frequency);
        let j = detector_index(theta, cfg.n_detectors);
        detectors[j].process(e, thresholds.uniform());
    }

    Ok(DetectorCounts {
        centers_rad: detector_centers(cfg.n_detectors),
        arrivals: detectors.iter().map(|d| d.arrivals()).collect(),
        clicks: detectors.iter().map(|d| d.clicks()).collect(),
        events_total: cfg.events_total,
    })
}

/// Same run with the adaptive detectors replaced by plain counters (every
/// arrival clicks). Used to demonstrate that the counters alone produce no
/// fringes.
pub fn run_twobeam_counters(cfg: &TwoBeamConfig) -> Result<DetectorCounts> {
    cfg.validate()?;
    let mut emission = RngStream::new(cfg.seed, STREAM_EMISSION);
    let mut arrivals = vec![0u64; cfg.n_detectors];
    for _ in 0..cfg.events_total {
        let (y, beta) = sample_emission(&mut emission, cfg);
        let theta = hit_angle(y, beta, cfg.screen_radius)?;
        arrivals[detector_index(theta, cfg.n_detectors)] += 1;
    }
    Ok(DetectorCounts {
        centers_rad: detector_centers(cfg.n_detectors),
        clicks: arrivals.clone(),
        arrivals,
        events_total: cfg.events_total,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use std::f64::consts::{FRAC_PI_2, FRAC_PI_6, PI};

    /// Independent geometric oracle: intersect the ray
    /// `(0, y) + s (cos β, sin β)` with the circle `x² + y² = X²` by solving
    /// the quadratic in the path length `s`, then read the hit point.
    fn ray_circle_oracle(y: f64, beta: f64, radius: f64) -> (f64, f64) {
        // s² + 2 s y sin β + y² − X² = 0, forward root.
        let half_b = y * beta.sin();
        let s = -half_b + (half_b * half_b - (y * y - radius * radius)).sqrt();
        let hit = (s * beta.cos(), y + s * beta.sin());
        let theta = hit.1.atan2(hit.0);
        (theta, s)
    }

    #[test]
    fn on_axis_ray_hits_center() {
        let th = hit_angle(0.0, Angle::new(0.0), 100.0).unwrap();
        assert_abs_diff_eq!(th.radians(), 0.0);
    }

    #[test]
    fn central_emission_angle_passes_through() {
        let th = hit_angle(0.0, Angle::new(FRAC_PI_6), 100.0).unwrap();
        assert_abs_diff_eq!(th.radians(), FRAC_PI_6, epsilon = 1e-12);
    }

    #[test]
    fn hit_angle_matches_ray_circle_oracle() {
        let (theta, _) = ray_circle_oracle(2.5, 0.1, 100.0);
        let th = hit_angle(2.5, Angle::new(0.1), 100.0).unwrap();
        assert_abs_diff_eq!(th.radians(), theta, epsilon = 1e-10);

        for &(y, beta) in &[(2.9, -1.2), (-2.3, 0.7), (0.4, 1.5), (-2.0, -0.01)] {
            let (theta, _) = ray_circle_oracle(y, beta, 100.0);
            let th = hit_angle(y, Angle::new(beta), 100.0).unwrap();
            assert_abs_diff_eq!(th.radians(), theta, epsilon = 1e-10);
        }
    }

    #[test]
    fn hit_angle_rejects_outside_screen() {
        assert!(hit_angle(100.0, Angle::new(0.0), 100.0).is_err());
        assert!(hit_angle(-101.0, Angle::new(0.0), 100.0).is_err());
    }

    #[test]
    fn flight_time_radial_and_grazing() {
        assert_abs_diff_eq!(flight_time(0.0, Angle::new(0.3), 100.0, 1.0), 100.0);
        // y = X sin θ degenerates to t = X cos θ / c.
        let theta = 0.02f64;
        let y = 100.0 * theta.sin();
        assert_abs_diff_eq!(
            flight_time(y, Angle::new(theta), 100.0, 1.0),
            100.0 * theta.cos(),
            epsilon = 1e-10
        );
    }

    #[test]
    fn flight_time_equals_ray_path_length() {
        let (theta, s) = ray_circle_oracle(2.5, 0.1, 100.0);
        assert_abs_diff_eq!(
            flight_time(2.5, Angle::new(theta), 100.0, 1.0),
            s,
            epsilon = 1e-10
        );
    }

    #[test]
    fn message_phases() {
        let e = message_of(0.0, 1.0);
        assert_abs_diff_eq!(e.x, 1.0);
        assert_abs_diff_eq!(e.y, 0.0);
        let e = message_of(0.25, 1.0);
        assert_abs_diff_eq!(e.x, 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(e.y, 1.0);
        let e = message_of(0.5, 1.0);
        assert_abs_diff_eq!(e.x, -1.0);
        assert_abs_diff_eq!(e.y, 0.0, epsilon = 1e-15);
    }

    #[test]
    fn emission_support_is_the_two_sources() {
        let cfg = TwoBeamConfig::standard(3);
        let mut s = RngStream::new(3, 0);
        let n = 200_000;
        let mut beta_sum = 0.0;
        let mut left = 0u64;
        for _ in 0..n {
            let (y, beta) = sample_emission(&mut s, &cfg);
            assert!(
                (2.0..=3.0).contains(&y.abs()),
                "emission at y={y} outside both sources"
            );
            if y < 0.0 {
                left += 1;
            }
            beta_sum += beta.radians();
        }
        // β symmetric: mean within 3σ of 0 (σ_β = π/√12).
        let se = PI / 12f64.sqrt() / (n as f64).sqrt();
        assert!((beta_sum / n as f64).abs() < 3.0 * se);
        // Each source feeds half the emissions.
        let frac = left as f64 / n as f64;
        assert!((frac - 0.5).abs() < 0.01);
    }

    #[test]
    fn detector_grid_tiles_semicircle() {
        let centers = detector_centers(181);
        assert_eq!(centers.len(), 181);
        assert_abs_diff_eq!(centers[90], 0.0);
        assert!(centers[0] > -FRAC_PI_2 && centers[180] < FRAC_PI_2);
        // Every θ in range maps to the nearest center.
        for k in 0..1000 {
            let theta = -FRAC_PI_2 + (k as f64 + 0.5) * PI / 1000.0;
            let j = detector_index(Angle::new(theta), 181);
            assert!((theta - centers[j]).abs() <= PI / 181.0 / 2.0 + 1e-12);
        }
    }

    #[test]
    fn config_validation() {
        let mut cfg = TwoBeamConfig::standard(1);
        cfg.n_detectors = 180;
        assert!(cfg.validate().is_err());
        let mut cfg = TwoBeamConfig::standard(1);
        cfg.a = 0.0;
        assert!(cfg.validate().is_err());
        let mut cfg = TwoBeamConfig::standard(1);
        cfg.gamma = 1.0;
        assert!(cfg.validate().is_err());
        // Single merged source (d = 0) is a valid degenerate configuration.
        let mut cfg = TwoBeamConfig::standard(1);
        cfg.d = 0.0;
        assert!(cfg.validate().is_ok());
    }

    #[test]
    fn every_messenger_hits_exactly_one_detector() {
        let mut cfg = TwoBeamConfig::standard(11);
        cfg.events_total = 20_000;
        let counts = run_twobeam(&cfg).unwrap();
        assert_eq!(counts.arrivals.iter().sum::<u64>(), cfg.events_total);
        for (k, (&c, &a)) in counts.clicks.iter().zip(&counts.arrivals).enumerate() {
            assert!(c <= a, "detector {k}: clicks {c} > arrivals {a}");
        }
    }

    /// Setup is symmetric under y → −y, β → −β: mirror detectors agree
    /// within Poisson fluctuations.
    #[test]
    fn counts_mirror_symmetric() {
        let mut cfg = TwoBeamConfig::standard(19);
        cfg.events_total = 362_000;
        let counts = run_twobeam(&cfg).unwrap();
        let n = cfg.n_detectors;
        for j in 0..n / 2 {
            let (a, b) = (counts.clicks[j] as f64, counts.clicks[n - 1 - j] as f64);
            let band = 5.0 * (a + b).sqrt().max(1.0);
            assert!(
                (a - b).abs() <= band,
                "detectors {j}/{}: {a} vs {b} exceeds 5σ",
                n - 1 - j
            );
        }
    }

    /// A single point-like source has no second path: the click profile
    /// carries no phase structure.
    #[test]
    fn single_source_profile_is_smooth() {
        let cfg = TwoBeamConfig {
            a: 1e-6,
            d: 0.0,
            screen_radius: 100.0,
            frequency: 1.0,
            velocity: 1.0,
            gamma: 0.99,
            n_detectors: 181,
            events_total: 362_000,
            seed: 23,
        };
        let counts = run_twobeam(&cfg).unwrap();
        // Neighboring detectors see nearly identical flight times, so clicks
        // vary smoothly: compare each detector with the mean of its
        // neighbors, Poisson scale.
        let c = &counts.clicks;
        for j in 1..c.len() - 1 {
            let local = (c[j - 1] + c[j + 1]) as f64 / 2.0;
            let diff = (c[j] as f64 - local).abs();
            assert!(
                diff <= 6.0 * local.sqrt().max(1.0),
                "detector {j} deviates from neighbours: {} vs {local}",
                c[j]
            );
        }
    }

    #[test]
    fn rerun_is_bit_identical() {
        let mut cfg = TwoBeamConfig::standard(42);
        cfg.events_total = 10_000;
        let a = run_twobeam(&cfg).unwrap();
        let b = run_twobeam(&cfg).unwrap();
        assert_eq!(a.clicks, b.clicks);
        assert_eq!(a.arrivals, b.arrivals);
    }

    /// Runs racing on sibling threads reproduce the single-threaded result:
    /// streams are isolated per run.
    #[test]
    fn concurrent_runs_do_not_interfere() {
        let mut cfg = TwoBeamConfig::standard(7);
        cfg.events_total = 20_000;
        let serial = run_twobeam(&cfg).unwrap();
        let handles: Vec<_> = (0..4)
            .map(|_| {
                let cfg = cfg.clone();
                std::thread::spawn(move || run_twobeam(&cfg).unwrap())
            })
            .collect();
        for h in handles {
            let parallel = h.join().unwrap();
            assert_eq!(parallel.clicks, serial.clicks);
        }
    }
}
