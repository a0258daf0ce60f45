//! Scenario files, `--set` overrides and sweep specifications.

use std::path::{Path, PathBuf};

use pla_delay::channel::{Deployment, GridSpec};
use pla_delay::scenario::{
    AnalysisOptions, Attack, EvePlacement, Experiment, NkModel, PlaSetting, VarianceModel, DEFAULT_ACTIVE,
    DEFAULT_N_FRAME,
};
use pla_delay::snc::MomentMatching;
use serde::{Deserialize, Serialize};

use crate::error::{CliError, Result};

/// Seed used when neither the scenario nor `--seed` sets one.
pub const DEFAULT_SEED: u64 = 20_190_601;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScenarioFile {
    pub deployment: DeploymentBlock,
    pub link: LinkBlock,
    pub pla: PlaSetting,
    pub attack: AttackBlock,
    pub snc: SncBlock,
    pub sim: SimBlock,
    pub detect: DetectBlock,
}

impl Default for ScenarioFile {
    /// Baseline for D12 of the reference grid at a 1% false-alarm target.
    fn default() -> Self {
        Self {
            deployment: DeploymentBlock::default(),
            link: LinkBlock::default(),
            pla: PlaSetting::FalseAlarm { p_fa: 1e-2 },
            attack: AttackBlock::default(),
            snc: SncBlock::default(),
            sim: SimBlock::default(),
            detect: DetectBlock::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DeploymentBlock {
    /// Deployment file written by `pla-delay deployment`; when absent the
    /// grid below is used. Relative paths resolve against the scenario file.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub file: Option<PathBuf>,
    pub grid: GridSpec,
    pub n_rx: usize,
    pub rice_k_db: f64,
    pub corr: f64,
}

impl Default for DeploymentBlock {
    fn default() -> Self {
        Self {
            file: None,
            grid: GridSpec::default(),
            n_rx: 4,
            rice_k_db: 6.0,
            corr: 0.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LinkBlock {
    pub tagged: String,
    pub active: Vec<String>,
    pub n_frame: u32,
}

impl Default for LinkBlock {
    fn default() -> Self {
        Self {
            tagged: "D12".into(),
            active: DEFAULT_ACTIVE.iter().map(|s| s.to_string()).collect(),
            n_frame: DEFAULT_N_FRAME,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum AttackKind {
    #[default]
    Baseline,
    Sybil,
    Disassociation,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AttackBlock {
    pub kind: AttackKind,
    /// Attacker placement; also the impersonator for `detect`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub eve: Option<EvePlacement>,
    /// Number of Sybil identities, taken in id order from the inactive
    /// devices unless `targets` lists them.
    pub n_sybil: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub targets: Option<Vec<String>>,
    pub p_attack: f64,
    pub k_rc: u32,
}

impl Default for AttackBlock {
    fn default() -> Self {
        Self {
            kind: AttackKind::Baseline,
            eve: None,
            n_sybil: 0,
            targets: None,
            p_attack: 0.0,
            k_rc: 4,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SncBlock {
    /// Target utilization of the attack-free service.
    pub utilization: f64,
    /// Explicit arrival rate in bits per frame; overrides `utilization`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
    pub epsilon: f64,
    /// Delays reported by `delay`; an empty range reports w_ε only.
    pub w_min: u64,
    pub w_max: u64,
    pub moment_matching: MomentMatching,
    pub variance: VarianceModel,
    pub nk_model: NkModel,
}

impl Default for SncBlock {
    fn default() -> Self {
        Self {
            utilization: 0.5,
            alpha: None,
            epsilon: 1e-6,
            w_min: 1,
            w_max: 0,
            moment_matching: MomentMatching::default(),
            variance: VarianceModel::default(),
            nk_model: NkModel::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimBlock {
    pub frames: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub warmup: Option<u64>,
    #[serde(with = "seed_repr")]
    pub seed: u64,
    pub replications: u32,
    pub max_w: usize,
    /// Add simulated violation probabilities to `delay` rows.
    pub overlay: bool,
}

/// TOML integers are signed, so seeds above `i64::MAX` are written as
/// strings. Either form is read back.
mod seed_repr {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(seed: &u64, s: S) -> Result<S::Ok, S::Error> {
        match i64::try_from(*seed) {
            Ok(v) => s.serialize_i64(v),
            Err(_) => s.serialize_str(&seed.to_string()),
        }
    }

    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Repr {
        Int(u64),
        Text(String),
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<u64, D::Error> {
        match Repr::deserialize(d)? {
            Repr::Int(v) => Ok(v),
            Repr::Text(t) => t.trim().parse().map_err(serde::de::Error::custom),
        }
    }
}

impl Default for SimBlock {
    fn default() -> Self {
        Self {
            frames: 1_000_000,
            warmup: None,
            seed: DEFAULT_SEED,
            replications: 1,
            max_w: pla_delay::sim::DEFAULT_MAX_W,
            overlay: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DetectBlock {
    /// Legitimate devices to test; empty means the tagged device.
    pub devices: Vec<String>,
    /// Paired Monte Carlo draws per row; 0 skips the estimate.
    pub mc_samples: u64,
}

impl Default for DetectBlock {
    fn default() -> Self {
        Self {
            devices: Vec::new(),
            mc_samples: 100_000,
        }
    }
}

impl ScenarioFile {
    /// Parses a scenario, reporting the offending line and field on error.
    pub fn parse(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        let mut sc = Self::parse(&text).map_err(|e| match e {
            CliError::Config(m) => CliError::Config(format!("{}: {m}", path.display())),
            other => other,
        })?;
        if let Some(f) = &sc.deployment.file {
            if f.is_relative() {
                if let Some(dir) = path.parent() {
                    sc.deployment.file = Some(dir.join(f));
                }
            }
        }
        Ok(sc)
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| CliError::Config(e.to_string()))
    }

    /// Applies `key=value` overrides, where `key` is a dotted path such as
    /// `pla.p_fa` or one of the sweep aliases.
    pub fn with_overrides<'a>(&self, sets: impl IntoIterator<Item = (&'a str, OverrideValue)>) -> Result<Self> {
        let mut tree = toml::Value::try_from(self).map_err(|e| CliError::Config(e.to_string()))?;
        for (key, value) in sets {
            set_path(&mut tree, resolve_alias(key), value)?;
        }
        let text = toml::to_string(&tree).map_err(|e| CliError::Config(e.to_string()))?;
        toml::from_str(&text).map_err(|e| CliError::Config(format!("after overrides: {e}")))
    }

    pub fn deployment(&self) -> Result<Deployment> {
        let b = &self.deployment;
        let mut dep = match &b.file {
            Some(path) => {
                let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
                toml::from_str::<Deployment>(&text)
                    .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?
            }
            None => Deployment::grid(b.grid, b.n_rx, b.rice_k_db, b.corr)?,
        };
        dep.array.n_rx = b.n_rx;
        dep.rice_k_db = b.rice_k_db;
        dep.corr = b.corr;
        dep.validate()?;
        Ok(dep)
    }

    /// The attacker, required by `detect` and by both attacks.
    pub fn eve(&self) -> Result<&EvePlacement> {
        self.attack
            .eve
            .as_ref()
            .ok_or_else(|| CliError::Config("attack.eve is required for this command".into()))
    }

    pub fn experiment(&self) -> Result<Experiment> {
        let deployment = self.deployment()?;
        let mut ex = Experiment::new(deployment, &self.link.tagged, self.pla);
        ex.active = self.link.active.clone();
        ex.n_frame = self.link.n_frame;
        ex.options = AnalysisOptions {
            matching: self.snc.moment_matching,
            variance: self.snc.variance,
            nk: self.snc.nk_model,
            ..AnalysisOptions::default()
        };
        ex.attack = match self.attack.kind {
            AttackKind::Baseline => Attack::None,
            AttackKind::Sybil => {
                let eve = self.eve()?.clone();
                let targets = match &self.attack.targets {
                    Some(t) => {
                        if t.len() < self.attack.n_sybil {
                            return Err(CliError::Config(format!(
                                "attack.targets lists {} ids but n_sybil = {}",
                                t.len(),
                                self.attack.n_sybil
                            )));
                        }
                        t[..self.attack.n_sybil].to_vec()
                    }
                    None => {
                        let c = ex.sybil_candidates(&eve);
                        if c.len() < self.attack.n_sybil {
                            return Err(CliError::Config(format!(
                                "only {} inactive devices available, n_sybil = {}",
                                c.len(),
                                self.attack.n_sybil
                            )));
                        }
                        c[..self.attack.n_sybil].to_vec()
                    }
                };
                Attack::Sybil { eve, targets }
            }
            AttackKind::Disassociation => Attack::Disassociation {
                eve: self.eve()?.clone(),
                p_attack: self.attack.p_attack,
                k_rc: self.attack.k_rc,
            },
        };
        ex.validate()?;
        Ok(ex)
    }
}

/// Short names accepted by `--sweep` and `--set`.
pub fn resolve_alias(key: &str) -> &str {
    match key {
        "k_rice" => "deployment.rice_k_db",
        "k_rice_e" => "attack.eve.rice_k_db",
        "n_rx" => "deployment.n_rx",
        "rho" | "corr" => "deployment.corr",
        "aoa" => "attack.eve.aoa",
        "d_e" => "attack.eve.distance",
        "p_fa" => "pla.p_fa",
        "n_sybil" => "attack.n_sybil",
        "p_attack" => "attack.p_attack",
        "k_rc" => "attack.k_rc",
        "u" => "snc.utilization",
        "epsilon" => "snc.epsilon",
        other => other,
    }
}

/// Right-hand side of an override.
#[derive(Debug, Clone, PartialEq)]
pub enum OverrideValue {
    /// TOML literal text, e.g. `1e-3`, `"D4"` or `[1.0, 2.0]`. Bare words
    /// are taken as strings.
    Literal(String),
    Number(f64),
}

impl OverrideValue {
    fn into_toml(self, existing: Option<&toml::Value>) -> Result<toml::Value> {
        let v = match self {
            Self::Number(x) => toml::Value::Float(x),
            Self::Literal(text) => match toml::from_str::<toml::Table>(&format!("v = {text}")) {
                Ok(mut t) => t.remove("v").expect("parsed key"),
                Err(_) => toml::Value::String(text),
            },
        };
        // Keep the type of the field being replaced so that `n_rx=8.0`
        // and `p_fa=1` both deserialize.
        Ok(match (existing, v) {
            (Some(toml::Value::Integer(_)), toml::Value::Float(x)) => {
                if x.fract() != 0.0 || !x.is_finite() {
                    return Err(CliError::Config(format!("expected an integer, got {x}")));
                }
                toml::Value::Integer(x as i64)
            }
            (Some(toml::Value::Float(_)), toml::Value::Integer(i)) => toml::Value::Float(i as f64),
            (_, v) => v,
        })
    }
}

fn set_path(tree: &mut toml::Value, key: &str, value: OverrideValue) -> Result<()> {
    let parts: Vec<&str> = key.split('.').collect();
    if parts.iter().any(|p| p.is_empty()) {
        return Err(CliError::Config(format!("bad key {key:?}")));
    }
    let mut node = tree;
    for p in &parts[..parts.len() - 1] {
        let table = node
            .as_table_mut()
            .ok_or_else(|| CliError::Config(format!("{key}: {p} is not a table")))?;
        node = table
            .entry(p.to_string())
            .or_insert_with(|| toml::Value::Table(toml::Table::new()));
    }
    let table = node
        .as_table_mut()
        .ok_or_else(|| CliError::Config(format!("{key}: parent is not a table")))?;
    let last = parts[parts.len() - 1];
    let v = value.into_toml(table.get(last))?;
    table.insert(last.to_string(), v);
    Ok(())
}

/// Parses `key=value`.
pub fn parse_set(arg: &str) -> Result<(String, OverrideValue)> {
    let (k, v) = arg
        .split_once('=')
        .ok_or_else(|| CliError::Config(format!("--set expects key=value, got {arg:?}")))?;
    Ok((k.trim().to_string(), OverrideValue::Literal(v.trim().to_string())))
}

#[derive(Debug, Clone, PartialEq)]
pub struct Sweep {
    /// Name as given on the command line.
    pub var: String,
    pub values: Vec<f64>,
}

impl Sweep {
    /// `var=start:stop:steps`, with an optional `:log` suffix for
    /// logarithmic spacing. `steps` counts points, endpoints included.
    pub fn parse(arg: &str) -> Result<Self> {
        let bad = || CliError::Config(format!("--sweep expects var=start:stop:steps[:log], got {arg:?}"));
        let (var, range) = arg.split_once('=').ok_or_else(bad)?;
        let fields: Vec<&str> = range.split(':').collect();
        if !(3..=4).contains(&fields.len()) || var.trim().is_empty() {
            return Err(bad());
        }
        let start: f64 = fields[0].trim().parse().map_err(|_| bad())?;
        let stop: f64 = fields[1].trim().parse().map_err(|_| bad())?;
        let steps: usize = fields[2].trim().parse().map_err(|_| bad())?;
        let log = match fields.get(3).map(|s| s.trim()) {
            None | Some("lin") => false,
            Some("log") => true,
            Some(_) => return Err(bad()),
        };
        if steps == 0 || !start.is_finite() || !stop.is_finite() {
            return Err(bad());
        }
        if log && !(start > 0.0 && stop > 0.0) {
            return Err(CliError::Config("log sweeps need positive endpoints".into()));
        }
        let values = (0..steps)
            .map(|i| {
                let f = if steps == 1 { 0.0 } else { i as f64 / (steps - 1) as f64 };
                let v = if log {
                    (start.ln() + f * (stop.ln() - start.ln())).exp()
                } else {
                    start + f * (stop - start)
                };
                round_significant(v)
            })
            .collect();
        Ok(Self {
            var: var.trim().to_string(),
            values,
        })
    }
}

/// Drops the rounding noise of the grid arithmetic (12 significant digits).
fn round_significant(x: f64) -> f64 {
    format!("{x:.11e}").parse().unwrap_or(x)
}
