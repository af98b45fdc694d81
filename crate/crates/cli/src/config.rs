//! Config-file schema. Angles cross this boundary in degrees and are
//! converted to radians immediately; unknown keys anywhere are rejected.

use std::path::PathBuf;

use anyhow::{bail, Context};
use serde::{Deserialize, Serialize};

pub const EXPERIMENTS: [&str; 6] = [
    "twobeam",
    "eprb",
    "eprb_sweep",
    "eprb_oracle",
    "neutron",
    "neutron_grid",
];

/// First parsing pass: just enough to learn which experiment is requested.
#[derive(Debug, Deserialize)]
struct Probe {
    experiment: String,
    #[allow(dead_code)]
    #[serde(default)]
    seed: Option<u64>,
    #[allow(dead_code)]
    #[serde(default)]
    output_dir: Option<PathBuf>,
    #[allow(dead_code)]
    params: Option<toml::Value>,
}

/// Full document for one experiment type. Parsed from the original text so
/// that errors keep line and column information.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct Doc<P> {
    experiment: String,
    seed: u64,
    #[serde(default)]
    output_dir: Option<PathBuf>,
    params: P,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TwoBeamParams {
    /// Source width, units of c/f.
    pub a: f64,
    /// Center-to-center source distance, units of c/f.
    pub d: f64,
    /// Screen radius, units of c/f.
    pub screen_radius: f64,
    #[serde(default = "default_gamma")]
    pub gamma: f64,
    #[serde(default = "default_detectors")]
    pub n_detectors: usize,
    pub events_total: u64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EprbParams {
    pub a_deg: f64,
    pub a_prime_deg: f64,
    pub b_deg: f64,
    pub b_prime_deg: f64,
    #[serde(default = "default_t0")]
    pub t0_ns: f64,
    pub pairs: u64,
    /// Coincidence window used for the reported correlations.
    #[serde(default = "default_window")]
    pub window_ns: f64,
    /// Station-1 setting offsets; one S value is reported per offset.
    #[serde(default = "default_thetas")]
    pub theta_offsets_deg: Vec<f64>,
    /// Write the full station logs (only valid for a single offset).
    #[serde(default)]
    pub write_logs: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EprbSweepParams {
    pub pairs: u64,
    #[serde(default = "default_t0")]
    pub t0_ns: f64,
    /// Strictly increasing window widths, ns.
    pub windows_ns: Vec<f64>,
    /// When set, also write the time-tag difference histogram.
    #[serde(default)]
    pub hist_bin_ns: Option<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EprbOracleParams {
    #[serde(default = "default_grid")]
    pub grid_points: usize,
    #[serde(default = "default_t0")]
    pub t0_ns: f64,
    /// Window widths, ns; 0 selects the W → 0 limit.
    pub windows_ns: Vec<f64>,
    pub angle_pairs_deg: Vec<[f64; 2]>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NeutronParams {
    pub alpha_deg: f64,
    pub chi_deg: f64,
    #[serde(default = "default_gamma")]
    pub gamma: f64,
    #[serde(default = "default_reflectance")]
    pub reflectance: f64,
    #[serde(default = "default_counts")]
    pub counts_per_setting: u64,
    #[serde(default = "default_warmup")]
    pub warmup: u64,
    #[serde(default = "default_chi_mode")]
    pub chi_mode: String,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NeutronGridParams {
    #[serde(default = "default_grid_n")]
    pub n_alpha: usize,
    #[serde(default = "default_grid_n")]
    pub n_chi: usize,
    #[serde(default = "default_gamma")]
    pub gamma: f64,
    #[serde(default = "default_reflectance")]
    pub reflectance: f64,
    #[serde(default = "default_counts")]
    pub counts_per_setting: u64,
    #[serde(default = "default_warmup")]
    pub warmup: u64,
    #[serde(default = "default_chi_mode")]
    pub chi_mode: String,
}

fn default_gamma() -> f64 {
    0.99
}
fn default_detectors() -> usize {
    181
}
fn default_t0() -> f64 {
    2000.0
}
fn default_window() -> f64 {
    2.0
}
fn default_thetas() -> Vec<f64> {
    vec![0.0]
}
fn default_grid() -> usize {
    4096
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
fn default_chi_mode() -> String {
    "fixed".into()
}
fn default_grid_n() -> usize {
    8
}

#[derive(Debug, Clone, Serialize)]
#[serde(untagged)]
pub enum Params {
    TwoBeam(TwoBeamParams),
    Eprb(EprbParams),
    EprbSweep(EprbSweepParams),
    EprbOracle(EprbOracleParams),
    Neutron(NeutronParams),
    NeutronGrid(NeutronGridParams),
}

/// Fully resolved run configuration: what the manifest echoes.
#[derive(Debug, Clone, Serialize)]
pub struct RunConfig {
    pub experiment: String,
    pub seed: u64,
    pub output_dir: PathBuf,
    pub params: Params,
}

pub fn chi_mode_of(name: &str) -> anyhow::Result<evq_core::neutron::ChiMode> {
    match name {
        "fixed" => Ok(evq_core::neutron::ChiMode::Fixed),
        "per_event_random" => Ok(evq_core::neutron::ChiMode::PerEventRandom),
        other => bail!("unknown chi_mode `{other}`; valid values: fixed, per_event_random"),
    }
}

/// Parses a config file; `seed_override` and `out_override` come from the
/// command line and win over the file.
pub fn load(
    text: &str,
    seed_override: Option<u64>,
    out_override: Option<PathBuf>,
) -> anyhow::Result<RunConfig> {
    let probe: Probe =
        toml::from_str(text).context("config file is not a valid run description")?;

    macro_rules! typed {
        ($variant:ident, $ty:ty) => {{
            let doc: Doc<$ty> = toml::from_str(text)?;
            (doc.seed, doc.output_dir, Params::$variant(doc.params))
        }};
    }

    let (seed, output_dir, params) = match probe.experiment.as_str() {
        "twobeam" => typed!(TwoBeam, TwoBeamParams),
        "eprb" => typed!(Eprb, EprbParams),
        "eprb_sweep" => typed!(EprbSweep, EprbSweepParams),
        "eprb_oracle" => typed!(EprbOracle, EprbOracleParams),
        "neutron" => typed!(Neutron, NeutronParams),
        "neutron_grid" => typed!(NeutronGrid, NeutronGridParams),
        other => bail!(
            "unknown experiment `{other}`; valid experiments: {}",
            EXPERIMENTS.join(", ")
        ),
    };

    let output_dir = match (out_override, output_dir) {
        (Some(dir), _) => dir,
        (None, Some(dir)) => dir,
        (None, None) => bail!("no output directory: set `output_dir` in the config or pass --out"),
    };

    Ok(RunConfig {
        experiment: probe.experiment,
        seed: seed_override.unwrap_or(seed),
        output_dir,
        params,
    })
}

/// One line per experiment for `evq list`.
pub fn describe_experiments() -> String {
    let rows = [
        (
            "twobeam",
            "two-source interference on a semicircular screen",
            "a, d, screen_radius, gamma, n_detectors, events_total",
        ),
        (
            "eprb",
            "paired-photon run; S per station-1 offset",
            "a_deg, a_prime_deg, b_deg, b_prime_deg, t0_ns, pairs, window_ns, theta_offsets_deg, write_logs",
        ),
        (
            "eprb_sweep",
            "|S| vs coincidence window at the canonical settings",
            "pairs, t0_ns, windows_ns, hist_bin_ns",
        ),
        (
            "eprb_oracle",
            "quadrature correlations of the paired-photon model",
            "grid_points, t0_ns, windows_ns (0 = W→0 limit), angle_pairs_deg",
        ),
        (
            "neutron",
            "single spin–path correlation point E(α,χ)",
            "alpha_deg, chi_deg, gamma, reflectance, counts_per_setting, warmup, chi_mode",
        ),
        (
            "neutron_grid",
            "E(α,χ) grid with CHSH maximum",
            "n_alpha, n_chi, gamma, reflectance, counts_per_setting, warmup, chi_mode",
        ),
    ];
    let mut out = String::from("available experiments:\n");
    for (name, what, params) in rows {
        out.push_str(&format!(
            "  {name:<13}{what}\n               params: {params}\n"
        ));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_minimal_twobeam() {
        let text = r#"
experiment = "twobeam"
seed = 7
output_dir = "out"

[params]
a = 1.0
d = 5.0
screen_radius = 100.0
events_total = 1000
"#;
        let cfg = load(text, None, None).unwrap();
        assert_eq!(cfg.experiment, "twobeam");
        assert_eq!(cfg.seed, 7);
        match cfg.params {
            Params::TwoBeam(p) => {
                assert_eq!(p.n_detectors, 181);
                assert_eq!(p.gamma, 0.99);
            }
            _ => panic!("wrong variant"),
        }
    }

    #[test]
    fn rejects_unknown_keys_with_location() {
        let text = r#"
experiment = "twobeam"
seed = 7
output_dir = "out"

[params]
a = 1.0
d = 5.0
screen_radius = 100.0
events_total = 1000
banana = 3
"#;
        let err = format!("{:?}", load(text, None, None).unwrap_err());
        assert!(err.contains("banana"), "{err}");
    }

    #[test]
    fn rejects_unknown_experiment_listing_the_valid_set() {
        let text = "experiment = \"warp\"\nseed = 1\noutput_dir = \"out\"\n[params]\n";
        let err = format!("{:#}", load(text, None, None).unwrap_err());
        for name in EXPERIMENTS {
            assert!(err.contains(name), "{err}");
        }
    }

    #[test]
    fn overrides_win() {
        let text = r#"
experiment = "neutron"
seed = 3
output_dir = "from_file"
[params]
alpha_deg = 0.0
chi_deg = 45.0
"#;
        let cfg = load(text, Some(99), Some(PathBuf::from("cli_dir"))).unwrap();
        assert_eq!(cfg.seed, 99);
        assert_eq!(cfg.output_dir, PathBuf::from("cli_dir"));
    }
}
