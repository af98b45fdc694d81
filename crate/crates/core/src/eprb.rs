//! Paired-photon experiment with switched polarizer settings and time tags.
//!
//! A source emits pairs carrying orthogonal random polarizations. Each
//! particle travels to one of two stations where, using only local inputs —
//! the carried angle, the station's randomly switched setting, and local
//! randomness — a modulator rotates the polarization, a polarizing beam
//! splitter produces ±1, and the detection is stamped with a
//! polarization-dependent random delay. The two stations never read each
//! other's variables; locality is enforced by the code structure
//! ([`station_detect`] is a pure function of one station's inputs).
//!
//! Detectors here are ideal counters: every particle produces a record. The
//! interesting statistics appear downstream, when records are post-selected
//! by a time-coincidence window (see [`crate::analysis`]).

use serde::{Deserialize, Serialize};
use std::f64::consts::FRAC_PI_2;

use crate::error::{Error, Result};
use crate::stream::RngStream;
use crate::types::Angle;

/// Substream roles within one run: the source and each station own one
/// stream, so regenerating one station never perturbs the others.
const STREAM_SOURCE: u64 = 0;
const STREAM_STATION_1: u64 = 1;
const STREAM_STATION_2: u64 = 2;

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EprbConfig {
    /// Station-1 settings (radians).
    pub a: f64,
    pub a_prime: f64,
    /// Station-2 settings (radians).
    pub b: f64,
    pub b_prime: f64,
    /// Time-tag scale, nanoseconds.
    #[serde(default = "default_t0")]
    pub t0_ns: f64,
    pub pairs: u64,
    pub seed: u64,
}

fn default_t0() -> f64 {
    2000.0
}

impl EprbConfig {
    /// Canonical settings a = 0, a′ = π/4, b = π/8, b′ = 3π/8, shifted by
    /// `theta` on station 1.
    pub fn canonical(theta: f64, pairs: u64, seed: u64) -> Self {
        EprbConfig {
            a: theta,
            a_prime: std::f64::consts::FRAC_PI_4 + theta,
            b: std::f64::consts::PI / 8.0,
            b_prime: 3.0 * std::f64::consts::PI / 8.0,
            t0_ns: 2000.0,
            pairs,
            seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.pairs == 0 {
            return Err(Error::InvalidParameter {
                name: "pairs",
                value: 0.0,
                reason: "must generate at least one pair",
            });
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

/// One detection at one station.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EventRecord {
    /// Which detector fired: +1 or −1.
    pub x: i8,
    /// Time tag, nanoseconds, in [0, T0].
    pub t_ns: f64,
    /// Setting in effect, radians (one of the two configured values).
    pub alpha_rad: f64,
    /// Pair index.
    pub n: u64,
}

/// Ordered per-station record list; both stations log every pair.
#[derive(Debug, Clone, Default)]
pub struct StationLog {
    pub records: Vec<EventRecord>,
}

impl StationLog {
    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }
}

/// Source emission: polarization angle ξ uniform on [0, 2π). Particle 1
/// carries ξ, particle 2 carries ξ + π/2 — orthogonal by construction.
pub fn emit_pair(stream: &mut RngStream) -> Angle {
    Angle::new(stream.uniform_in(0.0, std::f64::consts::TAU))
}

/// Angle carried by the particle heading to `station` (1 or 2).
pub fn carried_angle(xi: Angle, station: u8) -> Angle {
    Angle::new(xi.radians() + (station - 1) as f64 * FRAC_PI_2)
}

/// Fair binary setting choice.
pub fn choose_setting(stream: &mut RngStream, s0: Angle, s1: Angle) -> Angle {
    if stream.coin() {
        s0
    } else {
        s1
    }
}

/// Modulator rotation of the particle heading to `station`, as a function of
/// the source angle ξ: the carried angle ξ + (i−1)π/2 becomes
/// ξ′ = ξ + (i−1)π/2 − α.
pub fn eom_rotate(xi: Angle, station: u8, alpha: Angle) -> Angle {
    Angle::new(carried_angle(xi, station).radians() - alpha.radians())
}

/// Polarizing beam splitter: +1 iff `r ≤ cos²ξ′`. Reproduces the Malus
/// distribution event by event.
pub fn pbs_outcome(xi_prime: Angle, r: f64) -> i8 {
    if r <= xi_prime.radians().cos().powi(2) {
        1
    } else {
        -1
    }
}

/// Time tag `t = T0 · sin⁴(2ξ′) · r′`: a delay drawn uniformly from
/// `[0, T0 sin⁴ 2ξ′]`.
pub fn time_tag(xi_prime: Angle, t0_ns: f64, r_prime: f64) -> f64 {
    t0_ns * (2.0 * xi_prime.radians()).sin().powi(4) * r_prime
}

/// Everything one station does to one particle, from its own inputs only.
pub fn station_detect(
    xi: Angle,
    station: u8,
    setting: Angle,
    r: f64,
    r_prime: f64,
    t0_ns: f64,
) -> (i8, f64) {
    let xi_prime = eom_rotate(xi, station, setting);
    (pbs_outcome(xi_prime, r), time_tag(xi_prime, t0_ns, r_prime))
}

/// Generates both station logs for `cfg.pairs` pairs.
pub fn run_eprb(cfg: &EprbConfig) -> Result<(StationLog, StationLog)> {
    cfg.validate()?;
    let mut source = RngStream::new(cfg.seed, STREAM_SOURCE);
    let mut st1 = RngStream::new(cfg.seed, STREAM_STATION_1);
    let mut st2 = RngStream::new(cfg.seed, STREAM_STATION_2);

    let mut log1 = StationLog::default();
    let mut log2 = StationLog::default();
    log1.records.reserve(cfg.pairs as usize);
    log2.records.reserve(cfg.pairs as usize);

    for n in 0..cfg.pairs {
        let xi = emit_pair(&mut source);

        let alpha1 = choose_setting(&mut st1, Angle::new(cfg.a), Angle::new(cfg.a_prime));
        let (x1, t1) = station_detect(xi, 1, alpha1, st1.uniform(), st1.uniform(), cfg.t0_ns);
        log1.records.push(EventRecord {
            x: x1,
            t_ns: t1,
            alpha_rad: alpha1.radians(),
            n,
        });

        let alpha2 = choose_setting(&mut st2, Angle::new(cfg.b), Angle::new(cfg.b_prime));
        let (x2, t2) = station_detect(xi, 2, alpha2, st2.uniform(), st2.uniform(), cfg.t0_ns);
        log2.records.push(EventRecord {
            x: x2,
            t_ns: t2,
            alpha_rad: alpha2.radians(),
            n,
        });
    }

    Ok((log1, log2))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use std::f64::consts::{FRAC_PI_4, PI, TAU};

    #[test]
    fn emitted_angles_uniform() {
        let mut s = RngStream::new(2, 0);
        let bins = 16;
        let mut hist = vec![0u64; bins];
        let n = 1_000_000;
        for _ in 0..n {
            let xi = emit_pair(&mut s).radians();
            assert!((0.0..TAU).contains(&xi));
            hist[(xi / TAU * bins as f64) as usize] += 1;
        }
        // χ² against uniform: 15 dof, 5σ-ish ceiling ~ 50.
        let expect = n as f64 / bins as f64;
        let chi2: f64 = hist
            .iter()
            .map(|&h| (h as f64 - expect).powi(2) / expect)
            .sum();
        assert!(chi2 < 50.0, "chi2 = {chi2}");
    }

    #[test]
    fn pair_polarizations_orthogonal() {
        for xi in [0.0, 0.3, 2.0, 5.9] {
            let xi = Angle::new(xi);
            let d = carried_angle(xi, 2).radians() - carried_angle(xi, 1).radians();
            assert_abs_diff_eq!(d, FRAC_PI_2);
        }
    }

    #[test]
    fn emission_is_deterministic_per_seed() {
        let a: Vec<f64> = {
            let mut s = RngStream::new(5, 0);
            (0..100).map(|_| emit_pair(&mut s).radians()).collect()
        };
        let b: Vec<f64> = {
            let mut s = RngStream::new(5, 0);
            (0..100).map(|_| emit_pair(&mut s).radians()).collect()
        };
        assert_eq!(a, b);
    }

    #[test]
    fn setting_choice_is_fair_and_degenerate_safe() {
        let mut s = RngStream::new(3, 0);
        let n = 100_000;
        let mut first = 0u64;
        for _ in 0..n {
            if choose_setting(&mut s, Angle::new(0.0), Angle::new(1.0)).radians() == 0.0 {
                first += 1;
            }
        }
        let f = first as f64 / n as f64;
        assert!((f - 0.5).abs() < 0.01, "frequency {f}");

        for _ in 0..100 {
            assert_eq!(
                choose_setting(&mut s, Angle::new(0.7), Angle::new(0.7)).radians(),
                0.7
            );
        }
    }

    #[test]
    fn station_choices_uncorrelated() {
        let mut s1 = RngStream::new(9, 1);
        let mut s2 = RngStream::new(9, 2);
        let n = 100_000;
        let mut sum1 = 0i64;
        let mut sum2 = 0i64;
        let mut prod = 0i64;
        for _ in 0..n {
            let c1 = if s1.coin() { 1 } else { -1 };
            let c2 = if s2.coin() { 1 } else { -1 };
            sum1 += c1;
            sum2 += c2;
            prod += c1 * c2;
        }
        let rho = (prod as f64 / n as f64) - (sum1 as f64 / n as f64) * (sum2 as f64 / n as f64);
        assert!(rho.abs() < 0.01, "correlation {rho}");
    }

    #[test]
    fn eom_rotation_arithmetic() {
        assert_abs_diff_eq!(
            eom_rotate(Angle::new(0.4), 1, Angle::new(0.4)).radians(),
            0.0
        );
        // Station 2: the carried π/2 offset and the modulator cancel.
        assert_abs_diff_eq!(
            eom_rotate(Angle::new(0.0), 2, Angle::new(FRAC_PI_2)).radians(),
            0.0
        );
        assert_abs_diff_eq!(
            eom_rotate(Angle::new(0.3), 1, Angle::new(0.1)).radians(),
            0.2,
            epsilon = 1e-15
        );
    }

    #[test]
    fn pbs_extremes() {
        let mut s = RngStream::new(1, 0);
        for _ in 0..1000 {
            assert_eq!(pbs_outcome(Angle::new(0.0), s.uniform()), 1);
            assert_eq!(pbs_outcome(Angle::new(FRAC_PI_2), s.uniform()), -1);
        }
    }

    /// Malus frequency at ξ′ = π/3: cos²(π/3) = 1/4.
    #[test]
    fn pbs_malus_frequency() {
        let mut s = RngStream::new(4, 0);
        let n = 100_000;
        let mut plus = 0u64;
        for _ in 0..n {
            if pbs_outcome(Angle::new(PI / 3.0), s.uniform()) == 1 {
                plus += 1;
            }
        }
        let f = plus as f64 / n as f64;
        assert!((f - 0.25).abs() < 0.01, "+1 frequency {f}");
    }

    #[test]
    fn time_tag_support() {
        let mut s = RngStream::new(6, 0);
        // ξ′ = 0: no retardation at all.
        for _ in 0..100 {
            assert_eq!(time_tag(Angle::new(0.0), 2000.0, s.uniform()), 0.0);
        }
        // ξ′ = π/4: delay uniform on [0, T0]; check the mean.
        let n = 100_000;
        let mut sum = 0.0;
        for _ in 0..n {
            sum += time_tag(Angle::new(FRAC_PI_4), 2000.0, s.uniform());
        }
        let mean = sum / n as f64;
        let se = 2000.0 / 12f64.sqrt() / (n as f64).sqrt();
        assert!((mean - 1000.0).abs() < 3.0 * se, "mean {mean}");
        // ξ′ = π/8: ceiling T0·sin⁴(π/4) = T0/4.
        let mut max: f64 = 0.0;
        for _ in 0..n {
            max = max.max(time_tag(Angle::new(PI / 8.0), 2000.0, s.uniform()));
        }
        assert!(max <= 500.0, "max delay {max}");
        assert!(max > 490.0, "support not filled: max {max}");
    }

    #[test]
    fn records_respect_ranges() {
        let cfg = EprbConfig::canonical(0.0, 100_000, 12);
        let (log1, log2) = run_eprb(&cfg).unwrap();
        assert_eq!(log1.len(), log2.len());
        for rec in log1.records.iter().chain(&log2.records) {
            assert!(rec.x == 1 || rec.x == -1);
            assert!((0.0..=cfg.t0_ns).contains(&rec.t_ns));
        }
    }

    /// Station 1's log is a function of the source and its own stream only:
    /// changing station 2's settings leaves it bitwise unchanged.
    #[test]
    fn station_one_log_is_local() {
        let mut cfg = EprbConfig::canonical(0.0, 100_000, 31);
        let (log1_a, _) = run_eprb(&cfg).unwrap();
        cfg.b = 1.234;
        cfg.b_prime = 2.345;
        let (log1_b, _) = run_eprb(&cfg).unwrap();
        assert_eq!(log1_a.records, log1_b.records);
    }
}
