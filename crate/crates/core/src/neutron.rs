//! Single-neutron interferometer with spin analysis.
//!
//! Spin-up neutrons enter a splitter, travel two paths that rotate the
//! magnetic moment by ∓π/2 about y (path 0 also carries the phase shifter χ),
//! recombine at a second splitter, and only the cross-port output — the beam
//! whose two path contributions carry equal weight — is analyzed: a spin
//! rotator turns the moment by α about x and an analyzer passes the neutron
//! when its spin-up projection beats a fresh uniform number. Neutrons leaving
//! through the other port are discarded undetected.
//!
//! With the settings held fixed the pass counts reproduce the spin–path
//! correlation `E(α,χ) = cos(α+χ)`; drawing χ anew for every neutron wipes
//! half the fringe contrast away and the CHSH combination drops below 2.

use serde::{Deserialize, Serialize};
use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};

use crate::dlm::BeamSplitter;
use crate::error::{Error, Result};
use crate::stream::RngStream;
use crate::types::{Angle, Axis, SpinorMessage};

/// Whether χ is held fixed for a whole run or redrawn per neutron from the
/// predetermined set.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ChiMode {
    Fixed,
    PerEventRandom,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NeutronConfig {
    /// Spin-rotator angle α, radians.
    pub alpha: f64,
    /// Path phase difference χ, radians.
    pub chi: f64,
    /// Splitter memory.
    #[serde(default = "default_gamma")]
    pub gamma: f64,
    /// Splitter reflectance.
    #[serde(default = "default_reflectance")]
    pub reflectance: f64,
    /// Incident neutrons counted per setting.
    #[serde(default = "default_counts")]
    pub counts_per_setting: u64,
    /// Incident neutrons discarded before counting starts.
    #[serde(default = "default_warmup")]
    pub warmup: u64,
    pub seed: u64,
    #[serde(default = "default_chi_mode")]
    pub chi_mode: ChiMode,
}

fn default_gamma() -> f64 {
    0.99
}

fn default_reflectance() -> f64 {
    0.2
}

fn default_counts() -> u64 {
    10_000
}

fn default_warmup() -> u64 {
    1000
}

fn default_chi_mode() -> ChiMode {
    ChiMode::Fixed
}

impl NeutronConfig {
    pub fn standard(alpha: f64, chi: f64, seed: u64) -> Self {
        NeutronConfig {
            alpha,
            chi,
            gamma: 0.99,
            reflectance: 0.2,
            counts_per_setting: 10_000,
            warmup: 1000,
            seed,
            chi_mode: ChiMode::Fixed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.reflectance > 0.0 && self.reflectance < 1.0) {
            return Err(Error::InvalidParameter {
                name: "reflectance",
                value: self.reflectance,
                reason: "must lie in (0,1)",
            });
        }
        if !(self.gamma > 0.0 && self.gamma < 1.0) {
            return Err(Error::InvalidParameter {
                name: "gamma",
                value: self.gamma,
                reason: "must lie in (0,1)",
            });
        }
        if self.counts_per_setting == 0 {
            return Err(Error::InvalidParameter {
                name: "counts_per_setting",
                value: 0.0,
                reason: "must count at least one neutron",
            });
        }
        Ok(())
    }
}

/// Internal clock frequency of the messengers; both paths share the same
/// base flight time, so only the shifter phase χ differentiates them.
const NEUTRON_FREQ: f64 = 1.0;

/// Analyzer: passes iff the spin-up weight exceeds `r`.
pub fn analyzer_select(msg: &SpinorMessage, r: f64) -> bool {
    msg.up_weight() > r
}

/// The two-splitter interferometer with its learned registers.
struct Interferometer {
    entry: BeamSplitter,
    exit: BeamSplitter,
}

impl Interferometer {
    fn new(cfg: &NeutronConfig) -> Self {
        Interferometer {
            entry: BeamSplitter::new(cfg.reflectance, cfg.gamma),
            exit: BeamSplitter::new(cfg.reflectance, cfg.gamma),
        }
    }

    /// Sends one spin-up neutron through entry splitter, path optics with
    /// phase χ, and exit splitter. Returns the beam message if the neutron
    /// leaves through the analyzed cross port, `None` if it is lost.
    fn transit(&mut self, chi: f64, stream: &mut RngStream) -> Option<SpinorMessage> {
        let msg = SpinorMessage::spin_up(NEUTRON_FREQ);
        let (path, msg) = self.entry.route(&msg, 0, stream.uniform());
        // Path-dependent moment turner: −π/2 about y on path 0, +π/2 on
        // path 1; the phase shifter sits in path 0.
        let msg = if path == 0 {
            msg.rotated(Axis::Y, Angle::new(-FRAC_PI_2))
                .phase_shifted(Angle::new(chi))
        } else {
            msg.rotated(Axis::Y, Angle::new(FRAC_PI_2))
        };
        let (port, msg) = self.exit.route(&msg, path, stream.uniform());
        // Cross port carries the balanced recombination and is the one
        // sent to the analyzer.
        (port == 1).then_some(msg)
    }
}

/// Pass/loss bookkeeping of one setting run.
#[derive(Debug, Clone, Copy, Default, Serialize)]
pub struct SettingCounts {
    pub incident: u64,
    /// Neutrons that reached the analyzed beam.
    pub analyzed: u64,
    /// Neutrons passed by the analyzer (the recorded count N).
    pub passed: u64,
}

/// Runs one fixed-(α, χ) block: warm-up neutrons are discarded, then
/// `counts_per_setting` incident neutrons are counted. Per-event-random χ
/// produces binned counts instead; see [`run_neutron_random_chi`].
pub fn run_neutron(cfg: &NeutronConfig) -> Result<SettingCounts> {
    cfg.validate()?;
    if cfg.chi_mode != ChiMode::Fixed {
        return Err(Error::InvalidParameter {
            name: "chi_mode",
            value: f64::NAN,
            reason: "a single count block needs a fixed χ; random χ is binned per χ value",
        });
    }
    let mut stream = RngStream::new(cfg.seed, 0);
    Ok(run_setting(cfg, cfg.alpha, cfg.chi, &mut stream))
}

fn run_setting(cfg: &NeutronConfig, alpha: f64, chi: f64, stream: &mut RngStream) -> SettingCounts {
    let mut interferometer = Interferometer::new(cfg);
    for _ in 0..cfg.warmup {
        if let Some(msg) = interferometer.transit(chi, stream) {
            let rotated = msg.rotated(Axis::X, Angle::new(alpha));
            let _ = analyzer_select(&rotated, stream.uniform());
        }
    }
    let mut counts = SettingCounts::default();
    for _ in 0..cfg.counts_per_setting {
        counts.incident += 1;
        if let Some(msg) = interferometer.transit(chi, stream) {
            counts.analyzed += 1;
            let rotated = msg.rotated(Axis::X, Angle::new(alpha));
            if analyzer_select(&rotated, stream.uniform()) {
                counts.passed += 1;
            }
        }
    }
    counts
}

/// Per-neutron-random χ block at fixed α: χ is drawn uniformly from
/// `chi_set` for every incident neutron and the counts are binned by the χ
/// in effect. Every bin receives `counts_per_setting` incident neutrons in
/// expectation.
pub fn run_neutron_random_chi(
    cfg: &NeutronConfig,
    alpha: f64,
    chi_set: &[f64],
    stream: &mut RngStream,
) -> Vec<SettingCounts> {
    assert!(!chi_set.is_empty());
    let mut interferometer = Interferometer::new(cfg);
    let k = chi_set.len();
    let pick = |stream: &mut RngStream| (stream.uniform() * k as f64) as usize % k;
    for _ in 0..cfg.warmup {
        let chi = chi_set[pick(stream)];
        if let Some(msg) = interferometer.transit(chi, stream) {
            let rotated = msg.rotated(Axis::X, Angle::new(alpha));
            let _ = analyzer_select(&rotated, stream.uniform());
        }
    }
    let mut bins = vec![SettingCounts::default(); k];
    let total = cfg.counts_per_setting * k as u64;
    for _ in 0..total {
        let j = pick(stream);
        bins[j].incident += 1;
        if let Some(msg) = interferometer.transit(chi_set[j], stream) {
            bins[j].analyzed += 1;
            let rotated = msg.rotated(Axis::X, Angle::new(alpha));
            if analyzer_select(&rotated, stream.uniform()) {
                bins[j].passed += 1;
            }
        }
    }
    bins
}

/// Correlation from the four counts N(α,χ), N(α+π,χ+π), N(α+π,χ), N(α,χ+π):
/// `E = (N + N_pp − N_p0 − N_0p) / sum`.
pub fn neutron_correlation(n: u64, n_pp: u64, n_p0: u64, n_0p: u64) -> Result<f64> {
    let sum = n + n_pp + n_p0 + n_0p;
    if sum == 0 {
        return Err(Error::ZeroCounts);
    }
    Ok((n as f64 + n_pp as f64 - n_p0 as f64 - n_0p as f64) / sum as f64)
}

/// One measured grid point: the four counts and their correlation.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct CorrelationPoint {
    pub alpha: f64,
    pub chi: f64,
    pub n: u64,
    pub n_pp: u64,
    pub n_p0: u64,
    pub n_0p: u64,
    pub e: f64,
}

/// Measures E(α,χ) from four independent fixed-setting runs, each with a
/// fresh warmed interferometer. `stream_base` spaces the substreams; four
/// ids are consumed.
pub fn measure_correlation(
    cfg: &NeutronConfig,
    alpha: f64,
    chi: f64,
    stream_base: u64,
) -> Result<CorrelationPoint> {
    cfg.validate()?;
    let corners = [
        (alpha, chi),
        (alpha + PI, chi + PI),
        (alpha + PI, chi),
        (alpha, chi + PI),
    ];
    let mut n = [0u64; 4];
    for (k, &(a, c)) in corners.iter().enumerate() {
        let mut stream = RngStream::new(cfg.seed, stream_base + k as u64);
        n[k] = run_setting(cfg, a, c, &mut stream).passed;
    }
    Ok(CorrelationPoint {
        alpha,
        chi,
        n: n[0],
        n_pp: n[1],
        n_p0: n[2],
        n_0p: n[3],
        e: neutron_correlation(n[0], n[1], n[2], n[3])?,
    })
}

/// Measures E on an α × χ grid. Stream ids advance by 4 per point.
pub fn correlation_grid(
    cfg: &NeutronConfig,
    alphas: &[f64],
    chis: &[f64],
) -> Result<Vec<CorrelationPoint>> {
    let mut points = Vec::with_capacity(alphas.len() * chis.len());
    let mut base = 0u64;
    for &alpha in alphas {
        for &chi in chis {
            points.push(measure_correlation(cfg, alpha, chi, base)?);
            base += 4;
        }
    }
    Ok(points)
}

/// E grid in per-event-random χ mode: one run per α over the χ set, counts
/// binned by the χ in effect. The χ set must be closed under adding π
/// so that every correlation has its four counts.
pub fn correlation_grid_random_chi(
    cfg: &NeutronConfig,
    alphas: &[f64],
    chis: &[f64],
) -> Result<Vec<CorrelationPoint>> {
    let k = chis.len();
    let index_of = |angle: f64| -> Result<usize> {
        let two_pi = std::f64::consts::TAU;
        let target = angle.rem_euclid(two_pi);
        chis.iter()
            .position(|&c| {
                let d = (c.rem_euclid(two_pi) - target).abs();
                d < 1e-9 || (two_pi - d) < 1e-9
            })
            .ok_or(Error::InvalidParameter {
                name: "chis",
                value: angle,
                reason: "χ set must contain χ+π for every χ",
            })
    };

    // One random-χ run per needed α (the grid αs plus their π offsets).
    let mut alpha_runs: Vec<(f64, Vec<SettingCounts>)> = Vec::new();
    let find_or_run = |alpha: f64, runs: &mut Vec<(f64, Vec<SettingCounts>)>| -> usize {
        let two_pi = std::f64::consts::TAU;
        let target = alpha.rem_euclid(two_pi);
        if let Some(i) = runs.iter().position(|&(a, _)| {
            let d = (a.rem_euclid(two_pi) - target).abs();
            d < 1e-9 || (two_pi - d) < 1e-9
        }) {
            return i;
        }
        let id = runs.len() as u64;
        let mut stream = RngStream::new(cfg.seed, id);
        let bins = run_neutron_random_chi(cfg, alpha, chis, &mut stream);
        runs.push((alpha, bins));
        runs.len() - 1
    };

    let mut points = Vec::with_capacity(alphas.len() * k);
    for &alpha in alphas {
        let i0 = find_or_run(alpha, &mut alpha_runs);
        let i1 = find_or_run(alpha + PI, &mut alpha_runs);
        for (j, &chi) in chis.iter().enumerate() {
            let jp = index_of(chi + PI)?;
            let n = alpha_runs[i0].1[j].passed;
            let n_pp = alpha_runs[i1].1[jp].passed;
            let n_p0 = alpha_runs[i1].1[j].passed;
            let n_0p = alpha_runs[i0].1[jp].passed;
            points.push(CorrelationPoint {
                alpha,
                chi,
                n,
                n_pp,
                n_p0,
                n_0p,
                e: neutron_correlation(n, n_pp, n_p0, n_0p)?,
            });
        }
    }
    Ok(points)
}

/// The CHSH combination S = E(α,χ) − E(α,χ′) + E(α′,χ) + E(α′,χ′) at the
/// settings that maximize it for E = cos(α+χ):
/// α = 0, χ = π/4, α′ = −π/2, χ′ = 3π/4 (value 2√2 at full contrast).
pub const SMAX_SETTINGS: (f64, f64, f64, f64) = (0.0, FRAC_PI_4, -FRAC_PI_2, 3.0 * FRAC_PI_4);

/// Measures S at [`SMAX_SETTINGS`] from four correlation measurements.
pub fn measure_smax(cfg: &NeutronConfig) -> Result<f64> {
    let (alpha, chi, alpha_p, chi_p) = SMAX_SETTINGS;
    let e = [
        measure_correlation(cfg, alpha, chi, 0)?.e,
        measure_correlation(cfg, alpha, chi_p, 4)?.e,
        measure_correlation(cfg, alpha_p, chi, 8)?.e,
        measure_correlation(cfg, alpha_p, chi_p, 12)?.e,
    ];
    Ok(crate::analysis::chsh(e[0], e[1], e[2], e[3]))
}

/// Least-squares amplitude of measured correlations against cos(α+χ).
pub fn fit_cos_amplitude(points: &[CorrelationPoint]) -> f64 {
    let mut num = 0.0;
    let mut den = 0.0;
    for p in points {
        let model = (p.alpha + p.chi).cos();
        num += p.e * model;
        den += model * model;
    }
    num / den
}
