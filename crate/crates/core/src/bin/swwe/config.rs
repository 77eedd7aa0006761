use std::fs;
use std::path::Path;

use clap::{Args, ValueEnum};
use serde::{Deserialize, Serialize};
use swwe_core::model::FlowConfig;
use swwe_core::sat::PenaltyOverride;
use swwe_core::sbp::DissipationScaling;
use swwe_core::scenarios::ScenarioKind;
use swwe_core::{Result, SwweError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RegimeArg {
    Sub,
    Critical,
    Super,
}

impl RegimeArg {
    fn default_multiple(self) -> f64 {
        match self {
            RegimeArg::Sub => 0.5,
            RegimeArg::Critical => 1.0,
            RegimeArg::Super => 2.0,
        }
    }

    fn admits(self, multiple: f64) -> bool {
        let m = multiple.abs();
        match self {
            RegimeArg::Sub => m < 1.0,
            RegimeArg::Critical => m == 1.0,
            RegimeArg::Super => m > 1.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ScaleArg {
    Half,
    Full,
}

impl From<ScaleArg> for DissipationScaling {
    fn from(s: ScaleArg) -> Self {
        match s {
            ScaleArg::Half => DissipationScaling::Half,
            ScaleArg::Full => DissipationScaling::Full,
        }
    }
}

fn non_negative(s: &str) -> std::result::Result<f64, String> {
    let v: f64 = s.parse().map_err(|e| format!("{e}"))?;
    if !(v.is_finite() && v >= 0.0) {
        return Err(format!("must be a finite number >= 0, got {s}"));
    }
    Ok(v)
}

/// Options shared by every command. Anything not given falls back to the
/// config file, then to the built-in defaults.
#[derive(Debug, Clone, Default, Args)]
pub struct CommonArgs {
    /// TOML file with the same keys as the long options (snake_case); a
    /// run manifest is accepted as well.
    #[arg(long)]
    pub config: Option<std::path::PathBuf>,
    /// Gravitational acceleration g.
    #[arg(long)]
    pub gravity: Option<f64>,
    /// Mean depth H.
    #[arg(long)]
    pub depth: Option<f64>,
    /// Flow regime; picks U = 0.5, 1 or 2 times sqrt(gH) unless
    /// --u-multiple is given.
    #[arg(long, value_enum)]
    pub regime: Option<RegimeArg>,
    /// U = r * sqrt(gH).
    #[arg(long, allow_negative_numbers = true)]
    pub u_multiple: Option<f64>,
    /// Number of intervals (N + 1 nodes).
    #[arg(long)]
    pub n: Option<usize>,
    /// Dissipation strength alpha >= 0.
    #[arg(long, value_parser = non_negative, allow_negative_numbers = true, conflicts_with = "alpha_scaled")]
    pub alpha: Option<f64>,
    /// alpha = c * (|U| + sqrt(gH)).
    #[arg(long, value_parser = non_negative, allow_negative_numbers = true)]
    pub alpha_scaled: Option<f64>,
    /// Weight of alpha in front of the dissipation operator: alpha/2 (half)
    /// or alpha (full).
    #[arg(long, value_enum)]
    pub dissipation_scale: Option<ScaleArg>,
    /// CFL number.
    #[arg(long)]
    pub cr: Option<f64>,
    /// Final time.
    #[arg(long)]
    pub t_final: Option<f64>,
    /// smooth-pulse, step-pulse, mms or zero-random.
    #[arg(long, value_parser = parse_scenario)]
    pub scenario: Option<ScenarioKind>,
    /// Output directory (default swwe-<command>).
    #[arg(long)]
    pub out_dir: Option<std::path::PathBuf>,
    /// Comma-separated output times.
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    pub snapshots: Option<Vec<f64>>,
    /// Comma-separated resolutions for `converge`.
    #[arg(long, value_delimiter = ',')]
    pub resolutions: Option<Vec<usize>>,
    /// Seed for the zero-random initial state.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Record the energy every this many steps.
    #[arg(long)]
    pub record_interval: Option<usize>,
    /// Random states per property check in `verify`.
    #[arg(long)]
    pub samples: Option<usize>,
    /// Reflection coefficient at x = 0 (sub-critical only).
    #[arg(long, allow_negative_numbers = true)]
    pub gamma0: Option<f64>,
    /// Reflection coefficient at x = L (sub-critical only).
    #[arg(long, allow_negative_numbers = true)]
    pub gamma1: Option<f64>,
    /// Penalty overrides; checked against the stability bounds.
    #[arg(long, allow_negative_numbers = true)]
    pub tau01: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub tau02: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub taun1: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub taun2: Option<f64>,
}

fn parse_scenario(s: &str) -> std::result::Result<ScenarioKind, String> {
    s.parse().map_err(|e: SwweError| e.to_string())
}

/// Config file contents; every key optional.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct FileConfig {
    gravity: Option<f64>,
    depth: Option<f64>,
    regime: Option<RegimeArg>,
    u_multiple: Option<f64>,
    n: Option<usize>,
    alpha: Option<f64>,
    alpha_scaled: Option<f64>,
    dissipation_scale: Option<DissipationScaling>,
    cr: Option<f64>,
    t_final: Option<f64>,
    scenario: Option<ScenarioKind>,
    snapshots: Option<Vec<f64>>,
    resolutions: Option<Vec<usize>>,
    seed: Option<u64>,
    record_interval: Option<usize>,
    samples: Option<usize>,
    gamma0: Option<f64>,
    gamma1: Option<f64>,
    tau01: Option<f64>,
    tau02: Option<f64>,
    taun1: Option<f64>,
    taun2: Option<f64>,
}

fn read_file_config(path: &Path) -> Result<FileConfig> {
    let text = fs::read_to_string(path).map_err(|e| SwweError::InvalidConfig {
        field: "config",
        reason: format!("{}: {e}", path.display()),
    })?;
    let value: toml::Table = text.parse().map_err(|e: toml::de::Error| SwweError::InvalidConfig {
        field: "config",
        reason: format!("{}: {}", path.display(), e.message()),
    })?;
    // manifests keep the settings under [config]
    let table = match value.get("config") {
        Some(toml::Value::Table(t)) => t.clone(),
        _ => value,
    };
    table.try_into().map_err(|e: toml::de::Error| SwweError::InvalidConfig {
        field: "config",
        reason: format!("{}: {}", path.display(), e.message()),
    })
}

/// Which command the settings are for; drives the defaults.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Simulate,
    Converge,
    Verify,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Simulate => "simulate",
            Command::Converge => "converge",
            Command::Verify => "verify",
        }
    }
}

/// Fully resolved settings; written to the manifest.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Settings {
    pub gravity: f64,
    pub depth: f64,
    pub u_multiple: f64,
    pub n: usize,
    pub alpha: f64,
    pub dissipation_scale: DissipationScaling,
    pub cr: f64,
    pub t_final: f64,
    pub scenario: ScenarioKind,
    pub snapshots: Vec<f64>,
    pub resolutions: Vec<usize>,
    pub seed: u64,
    pub record_interval: usize,
    pub samples: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gamma0: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gamma1: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tau01: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tau02: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub taun1: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub taun2: Option<f64>,
}

pub const DEFAULT_RESOLUTIONS: [usize; 6] = [64, 128, 256, 512, 1024, 2048];

impl Settings {
    pub fn resolve(cmd: Command, args: &CommonArgs) -> Result<Self> {
        let file = match &args.config {
            Some(p) => read_file_config(p)?,
            None => FileConfig::default(),
        };
        macro_rules! pick {
            ($field:ident) => {
                args.$field.clone().or(file.$field.clone())
            };
        }

        let gravity = pick!(gravity).unwrap_or(9.8);
        let depth = pick!(depth).unwrap_or(1.0);
        let regime = pick!(regime);
        let u_multiple = match (pick!(u_multiple), regime) {
            (Some(r), Some(reg)) if !reg.admits(r) => {
                return Err(SwweError::InvalidConfig {
                    field: "u_multiple",
                    reason: format!("U = {r} sqrt(gH) is not {reg:?} flow"),
                })
            }
            (Some(r), _) => r,
            (None, Some(reg)) => reg.default_multiple(),
            (None, None) => 0.5,
        };
        let flow = FlowConfig::with_froude(gravity, depth, u_multiple)?;

        let scenario = pick!(scenario).unwrap_or(match cmd {
            Command::Simulate => ScenarioKind::SmoothPulse,
            _ => ScenarioKind::Mms,
        });
        let pulse = matches!(scenario, ScenarioKind::SmoothPulse | ScenarioKind::StepPulse);

        // --alpha on the command line beats alpha_scaled in the file and
        // the other way round
        let alpha = match (args.alpha, args.alpha_scaled) {
            (Some(a), _) => a,
            (None, Some(c)) => c * flow.max_speed(),
            (None, None) => match (file.alpha, file.alpha_scaled) {
                (Some(_), Some(_)) => {
                    return Err(SwweError::InvalidConfig {
                        field: "alpha",
                        reason: "give either alpha or alpha_scaled, not both".into(),
                    })
                }
                (Some(a), None) => a,
                (None, Some(c)) => c * flow.max_speed(),
                (None, None) => 0.0,
            },
        };
        if !(alpha.is_finite() && alpha >= 0.0) {
            return Err(SwweError::InvalidConfig {
                field: "alpha",
                reason: format!("must be finite and >= 0, got {alpha}"),
            });
        }

        let settings = Settings {
            gravity,
            depth,
            u_multiple,
            n: pick!(n).unwrap_or(if pulse { 2048 } else { 64 }),
            alpha,
            dissipation_scale: args
                .dissipation_scale
                .map(DissipationScaling::from)
                .or(file.dissipation_scale)
                .unwrap_or_default(),
            cr: pick!(cr).unwrap_or(0.25),
            t_final: pick!(t_final).unwrap_or(if pulse && cmd == Command::Simulate { 3.02 } else { 0.1 }),
            scenario,
            snapshots: pick!(snapshots).unwrap_or_default(),
            resolutions: pick!(resolutions).unwrap_or_else(|| DEFAULT_RESOLUTIONS.to_vec()),
            seed: pick!(seed).unwrap_or(0),
            record_interval: pick!(record_interval).unwrap_or(1),
            samples: pick!(samples).unwrap_or(1000),
            gamma0: pick!(gamma0),
            gamma1: pick!(gamma1),
            tau01: pick!(tau01),
            tau02: pick!(tau02),
            taun1: pick!(taun1),
            taun2: pick!(taun2),
        };
        if settings.n < 2 {
            return Err(SwweError::InvalidConfig {
                field: "n",
                reason: format!("need at least 2 intervals, got {}", settings.n),
            });
        }
        Ok(settings)
    }

    pub fn flow(&self) -> Result<FlowConfig> {
        FlowConfig::with_froude(self.gravity, self.depth, self.u_multiple)
    }

    pub fn penalties(&self) -> PenaltyOverride {
        PenaltyOverride {
            gamma0: self.gamma0,
            gamma1: self.gamma1,
            tau01: self.tau01,
            tau02: self.tau02,
            taun1: self.taun1,
            taun2: self.taun2,
        }
    }
}
