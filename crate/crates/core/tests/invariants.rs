//! Cross-module statistical invariants at realistic run scales.

use std::f64::consts::{FRAC_PI_4, PI, TAU};

use evq_core::analysis::{
    correlation_for, count_coincidences, fit_amplitude, fraunhofer_model, singles_average,
    timetag_histogram, PairingMode,
};
use evq_core::eprb::{run_eprb, EprbConfig};
use evq_core::twobeam::{run_twobeam_counters, TwoBeamConfig};
use evq_core::types::Angle;

/// Singles averages vanish for every setting and carry no dependence on the
/// remote station's setting.
#[test]
fn eprb_singles_unbiased_and_local() {
    let cfg = EprbConfig::canonical(0.0, 300_000, 2);
    let (log1, log2) = run_eprb(&cfg).unwrap();

    for (log, settings) in [(&log1, [cfg.a, cfg.a_prime]), (&log2, [cfg.b, cfg.b_prime])] {
        for s in settings {
            let n = log.records.iter().filter(|r| r.alpha_rad == s).count() as f64;
            let mean = singles_average(log, Angle::new(s)).unwrap();
            assert!(
                mean.abs() < 5.0 / n.sqrt(),
                "setting {s}: singles average {mean} with n = {n}"
            );
        }
    }

    // Station-1 average conditioned on the remote setting: the two
    // conditional means agree within 5σ of their combined error.
    for s1 in [cfg.a, cfg.a_prime] {
        let mut by_remote = [(0i64, 0u64); 2];
        for (r1, r2) in log1.records.iter().zip(&log2.records) {
            if r1.alpha_rad == s1 {
                let k = usize::from(r2.alpha_rad == cfg.b_prime);
                by_remote[k].0 += r1.x as i64;
                by_remote[k].1 += 1;
            }
        }
        let (m0, m1) = (
            by_remote[0].0 as f64 / by_remote[0].1 as f64,
            by_remote[1].0 as f64 / by_remote[1].1 as f64,
        );
        let se = (1.0 / by_remote[0].1 as f64 + 1.0 / by_remote[1].1 as f64).sqrt();
        assert!(
            (m0 - m1).abs() < 5.0 * se,
            "remote dependence at setting {s1}: {m0} vs {m1}"
        );
    }
}

/// At small W the correlation depends only on the setting difference.
#[test]
fn eprb_correlation_rotationally_invariant() {
    let delta = FRAC_PI_4;
    let mut values = Vec::new();
    for (k, offset) in [0.0, 0.4, 1.1].into_iter().enumerate() {
        let cfg = EprbConfig {
            a: offset,
            a_prime: offset + 1.0, // filler second settings
            b: offset + delta,
            b_prime: offset + delta + 1.0,
            t0_ns: 2000.0,
            pairs: 600_000,
            seed: 40 + k as u64,
        };
        let (log1, log2) = run_eprb(&cfg).unwrap();
        let counts = count_coincidences(&log1, &log2, 2.0, PairingMode::SameIndex).unwrap();
        let e = correlation_for(&counts, cfg.a, cfg.b).unwrap();
        let n = counts.for_pair(cfg.a, cfg.b).unwrap().total() as f64;
        values.push((e, ((1.0 - e * e) / n).sqrt()));
    }
    for window in values.windows(2) {
        let ((e0, s0), (e1, s1)) = (window[0], window[1]);
        let se = (s0 * s0 + s1 * s1).sqrt();
        assert!(
            (e0 - e1).abs() < 5.0 * se,
            "rotated runs disagree: {e0} vs {e1} (5σ = {})",
            5.0 * se
        );
    }
}

/// The time-tag difference distribution of generated pairs is sharply
/// peaked at zero and keeps visible mass in its tails.
#[test]
fn eprb_timetag_differences_peaked_with_tails() {
    let cfg = EprbConfig::canonical(0.0, 300_000, 3);
    let (log1, log2) = run_eprb(&cfg).unwrap();
    let hist = timetag_histogram(&log1, &log2, 20.0).unwrap();
    let zero = hist.zero_bin();
    let modal = hist
        .counts
        .iter()
        .enumerate()
        .max_by_key(|&(_, c)| *c)
        .map(|(k, _)| k)
        .unwrap();
    assert_eq!(modal, zero, "mode must sit at the zero bin");

    let total: u64 = hist.counts.iter().sum();
    let tail: u64 = hist
        .counts
        .iter()
        .enumerate()
        .filter(|(k, _)| k.abs_diff(zero) > 5)
        .map(|(_, &c)| c)
        .sum();
    assert_eq!(total, cfg.pairs);
    assert!(
        tail as f64 > 0.01 * total as f64,
        "tails too thin: {tail} of {total}"
    );
}

/// Plain counters see only the smooth flux profile: fitting the fringed
/// intensity model to their counts fails loudly.
#[test]
fn twobeam_counters_show_no_fringes() {
    let cfg = TwoBeamConfig::standard(4);
    let counts = run_twobeam_counters(&cfg).unwrap();
    assert_eq!(counts.total_clicks(), cfg.events_total);
    let model = fraunhofer_model(&counts.centers_rad, TAU, cfg.a, cfg.d);
    let (_, rms) = fit_amplitude(&counts, &model).unwrap();
    assert!(rms > 0.5, "counter profile fitted the fringes: rms = {rms}");
}

/// Mirror detectors agree for the counter profile too (pure geometry).
#[test]
fn twobeam_counter_profile_mirror_symmetric() {
    let mut cfg = TwoBeamConfig::standard(5);
    cfg.events_total = 362_000;
    let counts = run_twobeam_counters(&cfg).unwrap();
    let n = cfg.n_detectors;
    for j in 0..n / 2 {
        let (a, b) = (counts.clicks[j] as f64, counts.clicks[n - 1 - j] as f64);
        assert!(
            (a - b).abs() <= 5.0 * (a + b).sqrt().max(1.0),
            "detectors {j}/{}: {a} vs {b}",
            n - 1 - j
        );
    }
}

/// Window sweep |S| values are reproducible and strictly tied to their
/// window list (spot determinism at integration scale).
#[test]
fn eprb_sweep_deterministic() {
    let cfg = EprbConfig::canonical(0.0, 50_000, 6);
    let windows = [2.0, 20.0, 200.0];
    let (l1a, l2a) = run_eprb(&cfg).unwrap();
    let (l1b, l2b) = run_eprb(&cfg).unwrap();
    let a = evq_core::analysis::window_sweep(&l1a, &l2a, &windows).unwrap();
    let b = evq_core::analysis::window_sweep(&l1b, &l2b, &windows).unwrap();
    assert_eq!(a.points, b.points);
    assert!(a.points.windows(2).all(|w| w[0].0 < w[1].0));
}

/// E(a, b) at the opposite-sign corner: parallel settings at W → small give
/// strong anticorrelation (sanity anchor for the sign conventions).
#[test]
fn eprb_parallel_settings_anticorrelated() {
    let cfg = EprbConfig {
        a: 0.3,
        a_prime: 0.3 + PI / 2.0,
        b: 0.3,
        b_prime: 0.3 + PI / 2.0,
        t0_ns: 2000.0,
        pairs: 400_000,
        seed: 7,
    };
    let (log1, log2) = run_eprb(&cfg).unwrap();
    let counts = count_coincidences(&log1, &log2, 2.0, PairingMode::SameIndex).unwrap();
    let e = correlation_for(&counts, cfg.a, cfg.b).unwrap();
    assert!(e < -0.9, "E(a,a) = {e}, expected ≈ −1 at small W");
}
