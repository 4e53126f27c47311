//! Flag groups shared by the subcommands and their resolution into library types.

use std::fmt;
use std::path::{Path, PathBuf};

use clap::{Args, ValueEnum};
use serde::{Deserialize, Serialize};

use sawtooth::device::{fixture, fixture_source, load_device_model, DeviceModel};
use sawtooth::MapParams;

pub const SCHEMA_VERSION: u32 = 1;

/// Directory searched for `<name>.json` device files before the bundled set.
pub const DEVICE_DIR_ENV: &str = "SAWTOOTH_DEVICE_DIR";

/// Bad flags or config: reported with exit status 2.
#[derive(Debug)]
pub struct UsageError(pub String);

impl fmt::Display for UsageError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

pub fn usage(msg: impl Into<String>) -> anyhow::Error {
    UsageError(msg.into()).into()
}

#[derive(Debug, Clone, Args)]
pub struct MapArgs {
    /// Number of qubits
    #[arg(long, default_value_t = 3)]
    pub n: u32,
    /// Momentum-period integer, T = 2 pi L / 2^n
    #[arg(long = "L", id = "L", allow_negative_numbers = true, conflicts_with_all = ["k", "T"])]
    pub l: Option<i64>,
    /// Chaos parameter K = k T
    #[arg(long = "K", id = "K", allow_negative_numbers = true, conflicts_with_all = ["k", "T"])]
    pub chaos: Option<f64>,
    /// Kick strength (with --T instead of --L/--K)
    #[arg(long = "k", id = "k", allow_negative_numbers = true, requires = "T")]
    pub kick: Option<f64>,
    /// Kick period (with --k)
    #[arg(long = "T", id = "T", allow_negative_numbers = true, requires = "k")]
    pub period: Option<f64>,
}

impl MapArgs {
    pub fn resolve(&self) -> anyhow::Result<MapParams> {
        let p = match (self.kick, self.period) {
            (Some(k), Some(t)) => MapParams::from_kick(self.n, k, t),
            _ => MapParams::from_chaos(self.n, self.l.unwrap_or(7), self.chaos.unwrap_or(1.5)),
        };
        p.map_err(|e| usage(e.to_string()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Noiseless,
    Noisy,
}

#[derive(Debug, Clone, Args)]
pub struct OutputArgs {
    /// Output directory; nothing is written when absent
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
}

/// Experiment settings read by `localize --config`. Every field is optional;
/// flags given on the command line take precedence.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    pub n: Option<u32>,
    #[serde(rename = "L")]
    pub l: Option<i64>,
    #[serde(rename = "K")]
    pub chaos: Option<f64>,
    pub k: Option<f64>,
    #[serde(rename = "T")]
    pub period: Option<f64>,
    pub m0: Option<i64>,
    pub steps: Option<usize>,
    pub mode: Option<Mode>,
    /// Device name, or a path relative to the config file
    pub device: Option<String>,
    pub shots: Option<u64>,
    pub repetitions: Option<u64>,
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
    pub format: Option<Format>,
}

impl ConfigFile {
    pub fn load(path: &Path) -> anyhow::Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| usage(format!("{}: {e}", path.display())))?;
        let mut cfg: ConfigFile = serde_json::from_str(&text).map_err(|e| usage(format!("{}: {e}", path.display())))?;
        if let (Some(dev), Some(dir)) = (&cfg.device, path.parent()) {
            let local = dir.join(dev);
            if local.is_file() {
                cfg.device = Some(local.to_string_lossy().into_owned());
            }
        }
        Ok(cfg)
    }
}

/// A device and where it came from.
#[derive(Debug, Clone, Serialize)]
pub struct ResolvedDevice {
    pub source: String,
    pub model: DeviceModel,
}

pub fn device_dir() -> Option<PathBuf> {
    std::env::var_os(DEVICE_DIR_ENV)
        .filter(|v| !v.is_empty())
        .map(PathBuf::from)
}

/// A file path, then `<name>.json` in the device directory, then a bundled
/// fixture of that name.
pub fn resolve_device(spec: &str) -> anyhow::Result<ResolvedDevice> {
    let path = Path::new(spec);
    if path.is_file() {
        return load_file(path);
    }
    if let Some(dir) = device_dir() {
        let candidate = dir.join(format!("{spec}.json"));
        if candidate.is_file() {
            return load_file(&candidate);
        }
    }
    match (fixture(spec), fixture_source(spec)) {
        (Some(model), Some(_)) => Ok(ResolvedDevice {
            source: format!("bundled:{spec}"),
            model,
        }),
        _ => Err(usage(format!(
            "device '{spec}' is neither a file nor a known device name"
        ))),
    }
}

pub fn load_file(path: &Path) -> anyhow::Result<ResolvedDevice> {
    let text = std::fs::read_to_string(path).map_err(|e| usage(format!("{}: {e}", path.display())))?;
    let model = load_device_model(&text).map_err(|e| usage(format!("{}: {e}", path.display())))?;
    Ok(ResolvedDevice {
        source: path.display().to_string(),
        model,
    })
}
