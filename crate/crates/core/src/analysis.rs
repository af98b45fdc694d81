//! Post-selection and statistics over station logs and detector counts.
//!
//! Everything here is a pure function over immutable inputs: coincidence
//! counting under a time window, pair correlations, the CHSH combination,
//! window sweeps, time-tag difference histograms, and the single-parameter
//! fringe fit.

use serde::Serialize;
use std::collections::BTreeMap;
use std::f64::consts::FRAC_PI_4;

use crate::eprb::StationLog;
use crate::error::{Error, Result};
use crate::twobeam::DetectorCounts;
use crate::types::Angle;

/// How station-1 and station-2 records are paired before applying the
/// coincidence window.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum PairingMode {
    /// Pair record `n` with record `n`: the generator's ground truth.
    SameIndex,
    /// Laboratory-style greedy matching on time order: scan station-1
    /// events by time tag and match each to the earliest unmatched
    /// station-2 event within the window. Each event contributes at most
    /// once. Ties at equal |Δt| resolve toward the earlier station-2 index.
    TimeOrdered,
}

/// 2×2 coincidence counts for one setting pair.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct PairCounts {
    pub c_pp: u64,
    pub c_pm: u64,
    pub c_mp: u64,
    pub c_mm: u64,
}

impl PairCounts {
    pub fn total(&self) -> u64 {
        self.c_pp + self.c_pm + self.c_mp + self.c_mm
    }

    fn add(&mut self, x1: i8, x2: i8) {
        match (x1 > 0, x2 > 0) {
            (true, true) => self.c_pp += 1,
            (true, false) => self.c_pm += 1,
            (false, true) => self.c_mp += 1,
            (false, false) => self.c_mm += 1,
        }
    }
}

/// Coincidence counts grouped by (α₁, α₂) setting pair.
#[derive(Debug, Clone, Default)]
pub struct CoincidenceCounts {
    /// Keyed by the exact bit patterns of the two setting angles, so lookup
    /// never depends on float tolerance; settings come verbatim from configs.
    pairs: BTreeMap<(u64, u64), PairCounts>,
    total: u64,
}

impl CoincidenceCounts {
    fn add(&mut self, alpha1: f64, alpha2: f64, x1: i8, x2: i8) {
        self.pairs
            .entry((alpha1.to_bits(), alpha2.to_bits()))
            .or_default()
            .add(x1, x2);
        self.total += 1;
    }

    pub fn total(&self) -> u64 {
        self.total
    }

    pub fn for_pair(&self, alpha1: f64, alpha2: f64) -> Option<&PairCounts> {
        self.pairs.get(&(alpha1.to_bits(), alpha2.to_bits()))
    }

    /// Setting pairs in deterministic order with their counts.
    pub fn iter(&self) -> impl Iterator<Item = ((f64, f64), &PairCounts)> {
        self.pairs
            .iter()
            .map(|(&(a1, a2), c)| ((f64::from_bits(a1), f64::from_bits(a2)), c))
    }
}

/// Counts coincidences between two logs under window `W` (ns; `f64::INFINITY`
/// accepts every pairing). `SameIndex` requires equal-length logs.
pub fn count_coincidences(
    log1: &StationLog,
    log2: &StationLog,
    window_ns: f64,
    mode: PairingMode,
) -> Result<CoincidenceCounts> {
    let mut counts = CoincidenceCounts::default();
    match mode {
        PairingMode::SameIndex => {
            if log1.len() != log2.len() {
                return Err(Error::LogLengthMismatch {
                    left: log1.len(),
                    right: log2.len(),
                });
            }
            for (r1, r2) in log1.records.iter().zip(&log2.records) {
                if (r1.t_ns - r2.t_ns).abs() <= window_ns {
                    counts.add(r1.alpha_rad, r2.alpha_rad, r1.x, r2.x);
                }
            }
        }
        PairingMode::TimeOrdered => {
            for (i, j) in time_ordered_matches(log1, log2, window_ns) {
                let r1 = &log1.records[i];
                let r2 = &log2.records[j];
                counts.add(r1.alpha_rad, r2.alpha_rad, r1.x, r2.x);
            }
        }
    }
    Ok(counts)
}

/// The greedy unique matching behind [`PairingMode::TimeOrdered`], exposed
/// so the pairing can be audited: returns `(station-1 index, station-2
/// index)` pairs; no index appears twice.
pub fn time_ordered_matches(
    log1: &StationLog,
    log2: &StationLog,
    window_ns: f64,
) -> Vec<(usize, usize)> {
    let mut order1: Vec<usize> = (0..log1.len()).collect();
    let mut order2: Vec<usize> = (0..log2.len()).collect();
    // Stable sort keeps the index order among equal tags, which the
    // earliest-partner tie-break relies on.
    order1.sort_by(|&i, &j| log1.records[i].t_ns.total_cmp(&log1.records[j].t_ns));
    order2.sort_by(|&i, &j| log2.records[i].t_ns.total_cmp(&log2.records[j].t_ns));

    let mut matches = Vec::new();
    let mut lo = 0usize;
    for &i in &order1 {
        let r1 = &log1.records[i];
        // Earliest unmatched station-2 event within the window.
        while lo < order2.len() && log2.records[order2[lo]].t_ns < r1.t_ns - window_ns {
            lo += 1;
        }
        if lo < order2.len() {
            let j = order2[lo];
            if (log2.records[j].t_ns - r1.t_ns).abs() <= window_ns {
                matches.push((i, j));
                lo += 1;
            }
        }
    }
    matches
}

/// Correlation `E = (C₊₊ + C₋₋ − C₊₋ − C₋₊) / total` of one setting pair.
pub fn correlation(c: &PairCounts) -> Result<f64> {
    let total = c.total();
    if total == 0 {
        return Err(Error::ZeroCounts);
    }
    Ok((c.c_pp as f64 + c.c_mm as f64 - c.c_pm as f64 - c.c_mp as f64) / total as f64)
}

/// CHSH combination `S = E(a,b) − E(a,b′) + E(a′,b) + E(a′,b′)`.
pub fn chsh(e_ab: f64, e_ab_prime: f64, e_a_prime_b: f64, e_a_prime_b_prime: f64) -> f64 {
    e_ab - e_ab_prime + e_a_prime_b + e_a_prime_b_prime
}

/// Correlation for a specific setting pair out of grouped counts.
pub fn correlation_for(counts: &CoincidenceCounts, alpha1: f64, alpha2: f64) -> Result<f64> {
    let c = counts
        .for_pair(alpha1, alpha2)
        .ok_or(Error::NoCoincidences { alpha1, alpha2 })?;
    correlation(c).map_err(|_| Error::NoCoincidences { alpha1, alpha2 })
}

/// CHSH value of logs taken with settings {a, a′} × {b, b′}.
pub fn chsh_of_logs(
    log1: &StationLog,
    log2: &StationLog,
    settings: (f64, f64, f64, f64),
    window_ns: f64,
    mode: PairingMode,
) -> Result<f64> {
    let (a, a_prime, b, b_prime) = settings;
    let counts = count_coincidences(log1, log2, window_ns, mode)?;
    Ok(chsh(
        correlation_for(&counts, a, b)?,
        correlation_for(&counts, a, b_prime)?,
        correlation_for(&counts, a_prime, b)?,
        correlation_for(&counts, a_prime, b_prime)?,
    ))
}

/// |S| as a function of the window width.
#[derive(Debug, Clone, Serialize)]
pub struct WindowSweepResult {
    /// (W in ns, |S|) with W strictly increasing.
    pub points: Vec<(f64, f64)>,
}

/// Sweeps the coincidence window over `windows_ns` (must be strictly
/// increasing) on logs taken with the canonical settings a = 0, a′ = π/4,
/// b = π/8, b′ = 3π/8.
pub fn window_sweep(
    log1: &StationLog,
    log2: &StationLog,
    windows_ns: &[f64],
) -> Result<WindowSweepResult> {
    if windows_ns.is_empty() {
        return Err(Error::InvalidParameter {
            name: "windows_ns",
            value: 0.0,
            reason: "window list must be nonempty",
        });
    }
    if let Some(w) = windows_ns.windows(2).find(|w| w[0] >= w[1]) {
        return Err(Error::InvalidParameter {
            name: "windows_ns",
            value: w[1],
            reason: "window list must be strictly increasing",
        });
    }
    let settings = (
        0.0,
        FRAC_PI_4,
        std::f64::consts::PI / 8.0,
        3.0 * std::f64::consts::PI / 8.0,
    );
    let mut points = Vec::with_capacity(windows_ns.len());
    for &w in windows_ns {
        let s = chsh_of_logs(log1, log2, settings, w, PairingMode::SameIndex)?;
        points.push((w, s.abs()));
    }
    Ok(WindowSweepResult { points })
}

/// Mean outcome over records carrying the given setting.
pub fn singles_average(log: &StationLog, setting: Angle) -> Result<f64> {
    let bits = setting.radians().to_bits();
    let mut sum = 0i64;
    let mut count = 0u64;
    for r in &log.records {
        if r.alpha_rad.to_bits() == bits {
            sum += r.x as i64;
            count += 1;
        }
    }
    if count == 0 {
        return Err(Error::EmptySelection);
    }
    Ok(sum as f64 / count as f64)
}

/// Histogram of same-index time-tag differences t₁ − t₂ on a symmetric range.
#[derive(Debug, Clone, Serialize)]
pub struct TimeTagHistogram {
    pub bin_ns: f64,
    /// Center of the first bin, ns; bins ascend from here.
    pub first_center_ns: f64,
    pub counts: Vec<u64>,
}

impl TimeTagHistogram {
    pub fn bin_center(&self, k: usize) -> f64 {
        self.first_center_ns + k as f64 * self.bin_ns
    }

    /// Index of the bin centered at zero.
    pub fn zero_bin(&self) -> usize {
        (-self.first_center_ns / self.bin_ns).round() as usize
    }
}

/// Bins t₁ − t₂ over all same-index pairs (every pair coincides at W = ∞).
/// Bin 0 of the symmetric grid is centered on zero.
pub fn timetag_histogram(
    log1: &StationLog,
    log2: &StationLog,
    bin_ns: f64,
) -> Result<TimeTagHistogram> {
    if bin_ns <= 0.0 {
        return Err(Error::InvalidParameter {
            name: "bin_ns",
            value: bin_ns,
            reason: "bin width must be positive",
        });
    }
    if log1.len() != log2.len() {
        return Err(Error::LogLengthMismatch {
            left: log1.len(),
            right: log2.len(),
        });
    }
    let max_abs = log1
        .records
        .iter()
        .zip(&log2.records)
        .map(|(a, b)| (a.t_ns - b.t_ns).abs())
        .fold(0.0f64, f64::max);
    let half_bins = (max_abs / bin_ns).ceil() as usize;
    let n_bins = 2 * half_bins + 1;
    let mut counts = vec![0u64; n_bins];
    for (a, b) in log1.records.iter().zip(&log2.records) {
        let k = ((a.t_ns - b.t_ns) / bin_ns).round() as isize + half_bins as isize;
        counts[k.clamp(0, n_bins as isize - 1) as usize] += 1;
    }
    Ok(TimeTagHistogram {
        bin_ns,
        first_center_ns: -(half_bins as f64) * bin_ns,
        counts,
    })
}

/// Normalized two-source intensity
/// `I/A = sinc²(q a sinθ / 2) · cos²(q d sinθ / 2)`,
/// with the θ = 0 value taken by the series limit sinc(0) = 1.
pub fn fraunhofer_intensity(theta: Angle, wavenumber: f64, a: f64, d: f64) -> f64 {
    let s = theta.radians().sin();
    let xa = wavenumber * a * s / 2.0;
    let xd = wavenumber * d * s / 2.0;
    sinc(xa).powi(2) * xd.cos().powi(2)
}

fn sinc(x: f64) -> f64 {
    if x.abs() < 1e-4 {
        // series: 1 − x²/6 + x⁴/120
        1.0 - x * x / 6.0 + x.powi(4) / 120.0
    } else {
        x.sin() / x
    }
}

/// Closed-form linear least squares of counts against a one-parameter model:
/// `A = Σ(model·counts) / Σ(model²)`; the returned residual is the RMS of
/// `counts − A·model` normalized by the peak count.
pub fn fit_amplitude(counts: &DetectorCounts, model: &[f64]) -> Result<(f64, f64)> {
    assert_eq!(counts.clicks.len(), model.len(), "model length mismatch");
    let mm: f64 = model.iter().map(|m| m * m).sum();
    if mm == 0.0 {
        return Err(Error::DegenerateModel);
    }
    let mc: f64 = model
        .iter()
        .zip(&counts.clicks)
        .map(|(m, &c)| m * c as f64)
        .sum();
    let amplitude = mc / mm;
    let peak = counts.clicks.iter().copied().max().unwrap_or(0) as f64;
    if peak == 0.0 {
        return Err(Error::DegenerateModel);
    }
    let ss: f64 = model
        .iter()
        .zip(&counts.clicks)
        .map(|(m, &c)| (c as f64 - amplitude * m).powi(2))
        .sum();
    let rms = (ss / model.len() as f64).sqrt() / peak;
    Ok((amplitude, rms))
}

/// Per-θ model values for a detector grid, for use with [`fit_amplitude`].
pub fn fraunhofer_model(centers_rad: &[f64], wavenumber: f64, a: f64, d: f64) -> Vec<f64> {
    centers_rad
        .iter()
        .map(|&t| fraunhofer_intensity(Angle::new(t), wavenumber, a, d))
        .collect()
}
