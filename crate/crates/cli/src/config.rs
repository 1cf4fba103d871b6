use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use clap::ValueEnum;
use pendulum_core::{BoundaryClass, ForceFunction, ForceSpec, IntegrationOptions, SpectrumOptions};
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    Solve,
    WindingScan,
    Count,
    Construct,
    ZsCheck,
    Oracle,
    Verify,
}

/// Catalog id plus parameters. Config files may give parameters as numbers
/// or strings.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpecConfig {
    pub id: String,
    #[serde(default)]
    pub params: BTreeMap<String, Value>,
    /// Upper end of the λ search for this entry (verify only).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lambda_max: Option<f64>,
}

impl SpecConfig {
    pub fn new(id: &str) -> Self {
        Self {
            id: id.to_string(),
            ..Self::default()
        }
    }

    pub fn to_spec(&self) -> ForceSpec {
        let mut spec = ForceSpec::new(&self.id);
        for (key, value) in &self.params {
            let text = match value {
                Value::String(s) => s.clone(),
                other => other.to_string(),
            };
            spec.params.insert(key.clone(), text);
        }
        spec
    }
}

/// Everything a run needs. Loaded from one JSON document; command-line
/// flags override individual fields.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub command: Option<Command>,
    pub potential: Option<SpecConfig>,
    pub curve: Option<SpecConfig>,
    /// Entries checked by `verify`; absent means the full catalog.
    pub catalog: Option<Vec<SpecConfig>>,
    pub half_width: Option<f64>,
    pub tol: Option<f64>,
    pub lambda_min: Option<f64>,
    pub lambda_max: Option<f64>,
    pub tol_lambda: Option<f64>,
    pub scan_points: Option<usize>,
    /// Samples in winding scans.
    pub points: Option<usize>,
    /// Grid size for eigenfunction and trajectory output.
    pub grid_points: Option<usize>,
    /// Interior points of the finite-difference oracle.
    pub oracle_points: Option<usize>,
    pub levels: Option<usize>,
    pub phase: Option<f64>,
    pub seed: Option<u64>,
    /// Random λ pairs per catalog entry in the monotonicity suite.
    pub pairs: Option<usize>,
    pub out: Option<PathBuf>,
    pub threads: Option<usize>,
}

fn config_error(msg: impl Into<String>) -> CliError {
    CliError::Config(msg.into())
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = fs::read_to_string(path).map_err(|e| config_error(format!("reading {}: {e}", path.display())))?;
        serde_json::from_str(&text).map_err(|e| config_error(format!("parsing {}: {e}", path.display())))
    }

    pub fn validate(&self) -> Result<(), CliError> {
        let positive = |name: &str, v: Option<f64>| match v {
            Some(x) if !(x > 0.0 && x.is_finite()) => Err(config_error(format!("{name} must be positive, got {x}"))),
            _ => Ok(()),
        };
        positive("half_width", self.half_width)?;
        positive("tol", self.tol)?;
        positive("tol_lambda", self.tol_lambda)?;
        positive("lambda_max", self.lambda_max)?;
        if let Some(lo) = self.lambda_min {
            if !(lo >= 0.0) {
                return Err(config_error(format!("lambda_min must be >= 0, got {lo}")));
            }
            if let Some(hi) = self.lambda_max {
                if hi <= lo {
                    return Err(config_error(format!("lambda range [{lo}, {hi}] is empty")));
                }
            }
        }
        for (name, v, min) in [
            ("scan_points", self.scan_points, 2),
            ("points", self.points, 1),
            ("grid_points", self.grid_points, 3),
            ("oracle_points", self.oracle_points, 3),
            ("threads", self.threads, 1),
        ] {
            if let Some(n) = v {
                if n < min {
                    return Err(config_error(format!("{name} must be at least {min}, got {n}")));
                }
            }
        }
        if let Some(phase) = self.phase {
            if !phase.is_finite() {
                return Err(config_error("phase must be finite"));
            }
        }
        for spec in self
            .potential
            .iter()
            .chain(self.curve.iter())
            .chain(self.catalog.iter().flatten())
        {
            if let Some(lambda_bar) = spec
                .to_spec()
                .number("lambda_bar")
                .map_err(|e| config_error(e.to_string()))?
            {
                if !(0.0..1.0).contains(&lambda_bar) {
                    return Err(config_error(format!("lambda_bar must lie in [0, 1), got {lambda_bar}")));
                }
            }
        }
        Ok(())
    }

    pub fn out_dir(&self) -> PathBuf {
        self.out.clone().unwrap_or_else(|| PathBuf::from("pendulum-out"))
    }

    pub fn potential_spec(&self) -> Result<ForceSpec, CliError> {
        self.potential
            .as_ref()
            .map(SpecConfig::to_spec)
            .ok_or_else(|| config_error("no potential given (use --potential or the `potential` config field)"))
    }

    pub fn force(&self) -> Result<ForceFunction, CliError> {
        ForceFunction::from_spec(&self.potential_spec()?).map_err(CliError::from)
    }

    pub fn integration(&self, force: &ForceFunction) -> IntegrationOptions {
        let mut opts = IntegrationOptions::for_force(force);
        if let Some(l) = self.half_width {
            opts.half_width = l;
        }
        if let Some(tol) = self.tol {
            opts.tol = tol;
        }
        opts
    }

    pub fn spectrum(&self, force: &ForceFunction) -> SpectrumOptions {
        let mut opts = SpectrumOptions::for_force(force);
        opts.integration = self.integration(force);
        if let Some(t) = self.tol_lambda {
            opts.tol_lambda = t;
        }
        if let Some(n) = self.scan_points {
            opts.scan_points = n;
        }
        opts
    }

    /// λ search range. Well-shaped forces default to (0, 1]; anything else
    /// needs an explicit upper end.
    pub fn lambda_range(&self, force: &ForceFunction) -> Result<(f64, f64), CliError> {
        let lo = self.lambda_min.unwrap_or(0.0);
        let hi = match (self.lambda_max, force.boundary_class()) {
            (Some(hi), _) => hi,
            (None, BoundaryClass::WellShaped) => 1.0,
            (None, _) => return Err(config_error(format!("{} needs --lambda-max", force.label()))),
        };
        if hi <= lo {
            return Err(config_error(format!("lambda range [{lo}, {hi}] is empty")));
        }
        Ok((lo, hi))
    }

    pub fn grid_points(&self) -> usize {
        self.grid_points.unwrap_or(4001)
    }

    pub fn oracle_points(&self) -> usize {
        self.oracle_points.unwrap_or(4000)
    }

    pub fn seed(&self) -> u64 {
        self.seed.unwrap_or(0)
    }
}

/// Applies `--param key=value` overrides on top of a (possibly absent) spec.
/// A new id discards the parameters that came with the old one.
pub fn override_spec(base: Option<SpecConfig>, id: Option<&str>, params: &[(String, String)]) -> Option<SpecConfig> {
    let mut spec = match (base, id) {
        (Some(b), Some(id)) if b.id == id => b,
        (_, Some(id)) => SpecConfig::new(id),
        (b, None) => b?,
    };
    for (k, v) in params {
        spec.params.insert(k.clone(), Value::String(v.clone()));
    }
    Some(spec)
}

pub fn parse_param(raw: &str) -> Result<(String, String), String> {
    let (k, v) = raw
        .split_once('=')
        .ok_or_else(|| format!("expected key=value, got `{raw}`"))?;
    let k = k.trim();
    if k.is_empty() {
        return Err(format!("empty key in `{raw}`"));
    }
    Ok((k.to_string(), v.trim().to_string()))
}
