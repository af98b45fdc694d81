//! Executes one resolved run configuration and writes its artifacts.

use std::f64::consts::TAU;
use std::path::Path;

use anyhow::{bail, Context, Result};
use serde::Serialize;
use serde_json::json;

use evq_core::analysis::{
    self, correlation_for, count_coincidences, fit_amplitude, fraunhofer_model, timetag_histogram,
    window_sweep, PairingMode,
};
use evq_core::eprb::{run_eprb, EprbConfig, StationLog};
use evq_core::eprb_oracle::{oracle_correlation, OracleConfig, Window};
use evq_core::neutron::{
    correlation_grid_random_chi, fit_cos_amplitude, measure_correlation, measure_smax, ChiMode,
    CorrelationPoint, NeutronConfig,
};
use evq_core::twobeam::{run_twobeam, TwoBeamConfig};

use crate::config::{chi_mode_of, Params, RunConfig};
use crate::report::{fmt9, write_json, CsvWriter};

/// Runs the configured experiment into `cfg.output_dir`. The manifest is
/// written first; data files appear as they are produced, so failed runs
/// leave their partial outputs behind for inspection.
pub fn execute(cfg: &RunConfig, threads: Option<usize>) -> Result<()> {
    std::fs::create_dir_all(&cfg.output_dir)
        .with_context(|| format!("cannot create {}", cfg.output_dir.display()))?;
    write_json(&cfg.output_dir.join("manifest.json"), cfg)?;

    match threads {
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .context("cannot build worker pool")?;
            pool.install(|| dispatch(cfg))
        }
        None => dispatch(cfg),
    }
}

fn dispatch(cfg: &RunConfig) -> Result<()> {
    let dir = cfg.output_dir.as_path();
    match &cfg.params {
        Params::TwoBeam(p) => twobeam(cfg, p, dir),
        Params::Eprb(p) => eprb(cfg, p, dir),
        Params::EprbSweep(p) => eprb_sweep(cfg, p, dir),
        Params::EprbOracle(p) => eprb_oracle(cfg, p, dir),
        Params::Neutron(p) => neutron(cfg, p, dir),
        Params::NeutronGrid(p) => neutron_grid(cfg, p, dir),
    }
}

#[derive(Serialize)]
struct TwoBeamSummary {
    #[serde(rename = "A_fit")]
    a_fit: f64,
    rms_residual: f64,
    detected_ratio: f64,
}

fn twobeam(cfg: &RunConfig, p: &crate::config::TwoBeamParams, dir: &Path) -> Result<()> {
    let core = TwoBeamConfig {
        a: p.a,
        d: p.d,
        screen_radius: p.screen_radius,
        frequency: 1.0,
        velocity: 1.0,
        gamma: p.gamma,
        n_detectors: p.n_detectors,
        events_total: p.events_total,
        seed: cfg.seed,
    };
    let counts = run_twobeam(&core)?;

    let mut csv = CsvWriter::create(
        &dir.join("detector_counts.csv"),
        "theta_deg,arrivals,clicks",
    )?;
    for j in 0..counts.centers_rad.len() {
        csv.row(&[
            fmt9(counts.centers_rad[j].to_degrees()),
            counts.arrivals[j].to_string(),
            counts.clicks[j].to_string(),
        ])?;
    }
    csv.finish()?;

    let q = TAU; // c = f = 1
    let model = fraunhofer_model(&counts.centers_rad, q, core.a, core.d);
    let (a_fit, rms_residual) = fit_amplitude(&counts, &model)?;
    write_json(
        &dir.join("summary.json"),
        &TwoBeamSummary {
            a_fit,
            rms_residual,
            detected_ratio: counts.detected_ratio(),
        },
    )
}

fn write_station_log(path: &Path, log: &StationLog) -> Result<()> {
    let mut csv = CsvWriter::create(path, "n,x,t_ns,alpha_rad")?;
    for r in &log.records {
        csv.row(&[
            r.n.to_string(),
            r.x.to_string(),
            fmt9(r.t_ns),
            fmt9(r.alpha_rad),
        ])?;
    }
    csv.finish()
}

fn eprb(cfg: &RunConfig, p: &crate::config::EprbParams, dir: &Path) -> Result<()> {
    if p.write_logs && p.theta_offsets_deg.len() != 1 {
        bail!("write_logs needs exactly one theta offset");
    }
    let offsets: Vec<f64> = p.theta_offsets_deg.iter().map(|d| d.to_radians()).collect();
    let base = EprbConfig {
        a: p.a_deg.to_radians(),
        a_prime: p.a_prime_deg.to_radians(),
        b: p.b_deg.to_radians(),
        b_prime: p.b_prime_deg.to_radians(),
        t0_ns: p.t0_ns,
        pairs: p.pairs,
        seed: cfg.seed,
    };

    struct PairRow {
        alpha1: f64,
        alpha2: f64,
        e: f64,
        n_coinc: u64,
    }
    struct ThetaRun {
        theta: f64,
        s: f64,
        correlations: Vec<PairRow>,
    }

    // Offsets shift the station-1 settings; every point reuses the run seed.
    use rayon::prelude::*;
    let runs: Vec<ThetaRun> = offsets
        .par_iter()
        .map(|&theta| -> Result<_> {
            let cfg_t = EprbConfig {
                a: base.a + theta,
                a_prime: base.a_prime + theta,
                ..base.clone()
            };
            let (log1, log2) = run_eprb(&cfg_t)?;
            let counts = count_coincidences(&log1, &log2, p.window_ns, PairingMode::SameIndex)?;
            let mut correlations = Vec::new();
            let mut s = 0.0;
            for (i, (a1, a2)) in [
                (cfg_t.a, cfg_t.b),
                (cfg_t.a, cfg_t.b_prime),
                (cfg_t.a_prime, cfg_t.b),
                (cfg_t.a_prime, cfg_t.b_prime),
            ]
            .into_iter()
            .enumerate()
            {
                let e = correlation_for(&counts, a1, a2)?;
                let n_coinc = counts.for_pair(a1, a2).map(|c| c.total()).unwrap_or(0);
                correlations.push(PairRow {
                    alpha1: a1,
                    alpha2: a2,
                    e,
                    n_coinc,
                });
                s += if i == 1 { -e } else { e };
            }
            if p.write_logs {
                write_station_log(&dir.join("station1.csv"), &log1)?;
                write_station_log(&dir.join("station2.csv"), &log2)?;
            }
            Ok(ThetaRun {
                theta,
                s,
                correlations,
            })
        })
        .collect::<Result<_>>()?;

    let mut csv = CsvWriter::create(
        &dir.join("correlations.csv"),
        "theta_deg,alpha1_rad,alpha2_rad,E,n_coinc",
    )?;
    for run in &runs {
        for row in &run.correlations {
            csv.row(&[
                fmt9(run.theta.to_degrees()),
                fmt9(row.alpha1),
                fmt9(row.alpha2),
                fmt9(row.e),
                row.n_coinc.to_string(),
            ])?;
        }
    }
    csv.finish()?;

    let mut csv = CsvWriter::create(&dir.join("s_curve.csv"), "theta_deg,S")?;
    for run in &runs {
        csv.row(&[fmt9(run.theta.to_degrees()), fmt9(run.s)])?;
    }
    csv.finish()?;

    let s_values: Vec<serde_json::Value> = runs
        .iter()
        .map(|run| json!({ "theta_deg": run.theta.to_degrees(), "S": run.s }))
        .collect();
    write_json(
        &dir.join("summary.json"),
        &json!({
            "window_ns": p.window_ns,
            "S": s_values,
            "S_theta0": runs.first().map(|run| run.s),
        }),
    )
}

fn eprb_sweep(cfg: &RunConfig, p: &crate::config::EprbSweepParams, dir: &Path) -> Result<()> {
    let core = EprbConfig::canonical(0.0, p.pairs, cfg.seed);
    let core = EprbConfig {
        t0_ns: p.t0_ns,
        ..core
    };
    let (log1, log2) = run_eprb(&core)?;
    let sweep = window_sweep(&log1, &log2, &p.windows_ns)?;

    let mut csv = CsvWriter::create(&dir.join("sweep.csv"), "W_ns,S_abs")?;
    for &(w, s) in &sweep.points {
        csv.row(&[fmt9(w), fmt9(s)])?;
    }
    csv.finish()?;

    if let Some(bin) = p.hist_bin_ns {
        let hist = timetag_histogram(&log1, &log2, bin)?;
        let mut csv = CsvWriter::create(&dir.join("timetag_hist.csv"), "dt_ns,count")?;
        for (k, &c) in hist.counts.iter().enumerate() {
            csv.row(&[fmt9(hist.bin_center(k)), c.to_string()])?;
        }
        csv.finish()?;
    }

    // Headline values: |S| at the smallest window and the 2-crossing, when
    // the sweep brackets one.
    let crossing = sweep
        .points
        .windows(2)
        .find(|w| w[0].1 > 2.0 && w[1].1 <= 2.0)
        .map(|w| {
            let ((w0, s0), (w1, s1)) = (w[0], w[1]);
            w0 + (s0 - 2.0) * (w1 - w0) / (s0 - s1)
        });
    write_json(
        &dir.join("summary.json"),
        &json!({
            "points": sweep.points,
            "S_abs_first": sweep.points.first().map(|&(_, s)| s),
            "crossing_of_2_ns": crossing,
        }),
    )
}

fn eprb_oracle(cfg: &RunConfig, p: &crate::config::EprbOracleParams, dir: &Path) -> Result<()> {
    let mut rows = Vec::new();
    for &w in &p.windows_ns {
        let window = if w == 0.0 {
            Window::ZeroLimit
        } else {
            Window::Width(w)
        };
        let oracle_cfg = OracleConfig {
            grid_points: p.grid_points,
            window,
            t0_ns: p.t0_ns,
        };
        for pair in &p.angle_pairs_deg {
            let (a1, a2) = (pair[0].to_radians(), pair[1].to_radians());
            let e = oracle_correlation(a1, a2, &oracle_cfg)?;
            rows.push(json!({
                "alpha1": a1,
                "alpha2": a2,
                "W": w,
                "E_oracle": e,
            }));
        }
    }
    write_json(&dir.join("oracle.json"), &rows)?;
    write_json(
        &dir.join("summary.json"),
        &json!({ "rows": rows.len(), "seed_unused": cfg.seed }),
    )
}

fn neutron_csv(path: &Path, points: &[CorrelationPoint]) -> Result<()> {
    let mut csv = CsvWriter::create(path, "alpha_rad,chi_rad,N,N_pp,N_p0,N_0p,E")?;
    for p in points {
        csv.row(&[
            fmt9(p.alpha),
            fmt9(p.chi),
            p.n.to_string(),
            p.n_pp.to_string(),
            p.n_p0.to_string(),
            p.n_0p.to_string(),
            fmt9(p.e),
        ])?;
    }
    csv.finish()
}

fn neutron_core_config(
    seed: u64,
    gamma: f64,
    reflectance: f64,
    counts_per_setting: u64,
    warmup: u64,
    chi_mode: ChiMode,
) -> NeutronConfig {
    NeutronConfig {
        alpha: 0.0,
        chi: 0.0,
        gamma,
        reflectance,
        counts_per_setting,
        warmup,
        seed,
        chi_mode,
    }
}

fn neutron(cfg: &RunConfig, p: &crate::config::NeutronParams, dir: &Path) -> Result<()> {
    let mode = chi_mode_of(&p.chi_mode)?;
    let core = neutron_core_config(
        cfg.seed,
        p.gamma,
        p.reflectance,
        p.counts_per_setting,
        p.warmup,
        mode,
    );
    let (alpha, chi) = (p.alpha_deg.to_radians(), p.chi_deg.to_radians());
    let point = match mode {
        ChiMode::Fixed => measure_correlation(&core, alpha, chi, 0)?,
        ChiMode::PerEventRandom => {
            // The predetermined set for a single point: the four χ corners.
            let chis = vec![chi, chi + std::f64::consts::PI];
            correlation_grid_random_chi(&core, &[alpha], &chis)?[0]
        }
    };
    neutron_csv(&dir.join("neutron.csv"), &[point])?;
    write_json(
        &dir.join("summary.json"),
        &json!({
            "E": point.e,
            "gamma": p.gamma,
            "cos_alpha_plus_chi": (alpha + chi).cos(),
        }),
    )
}

fn neutron_grid(cfg: &RunConfig, p: &crate::config::NeutronGridParams, dir: &Path) -> Result<()> {
    let mode = chi_mode_of(&p.chi_mode)?;
    let core = neutron_core_config(
        cfg.seed,
        p.gamma,
        p.reflectance,
        p.counts_per_setting,
        p.warmup,
        mode,
    );
    let alphas: Vec<f64> = (0..p.n_alpha)
        .map(|k| k as f64 * TAU / p.n_alpha as f64)
        .collect();
    let chis: Vec<f64> = (0..p.n_chi)
        .map(|k| k as f64 * TAU / p.n_chi as f64)
        .collect();

    let points = match mode {
        ChiMode::Fixed => {
            // Grid points are independent runs; fan out, order preserved.
            use rayon::prelude::*;
            let indexed: Vec<(usize, f64, f64)> = alphas
                .iter()
                .enumerate()
                .flat_map(|(i, &a)| {
                    chis.iter()
                        .enumerate()
                        .map(move |(j, &c)| (i * p.n_chi + j, a, c))
                })
                .collect();
            indexed
                .par_iter()
                .map(|&(idx, a, c)| measure_correlation(&core, a, c, 4 * idx as u64))
                .collect::<evq_core::Result<Vec<_>>>()?
        }
        ChiMode::PerEventRandom => correlation_grid_random_chi(&core, &alphas, &chis)?,
    };

    neutron_csv(&dir.join("neutron.csv"), &points)?;

    let amplitude = fit_cos_amplitude(&points);
    let max_dev = points
        .iter()
        .map(|pt| (pt.e - (pt.alpha + pt.chi).cos()).abs())
        .fold(0.0f64, f64::max);
    let s_max = match mode {
        ChiMode::Fixed => measure_smax(&core)?,
        ChiMode::PerEventRandom => {
            let chis = vec![
                std::f64::consts::FRAC_PI_4,
                3.0 * std::f64::consts::FRAC_PI_4,
                5.0 * std::f64::consts::FRAC_PI_4,
                7.0 * std::f64::consts::FRAC_PI_4,
            ];
            let alphas = vec![0.0, -std::f64::consts::FRAC_PI_2];
            let pts = correlation_grid_random_chi(&core, &alphas, &chis)?;
            let e_of = |alpha: f64, chi: f64| {
                pts.iter()
                    .find(|q| q.alpha == alpha && q.chi == chi)
                    .map(|q| q.e)
                    .unwrap_or(f64::NAN)
            };
            analysis::chsh(
                e_of(0.0, std::f64::consts::FRAC_PI_4),
                e_of(0.0, 3.0 * std::f64::consts::FRAC_PI_4),
                e_of(-std::f64::consts::FRAC_PI_2, std::f64::consts::FRAC_PI_4),
                e_of(
                    -std::f64::consts::FRAC_PI_2,
                    3.0 * std::f64::consts::FRAC_PI_4,
                ),
            )
        }
    };

    write_json(
        &dir.join("summary.json"),
        &json!({
            "gamma": p.gamma,
            "S_max": s_max,
            "cos_fit_amplitude": amplitude,
            "max_abs_dev_from_cos": max_dev,
        }),
    )
}
