//! Run configuration: defaults, `key = value` files and flag overrides.

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use stegdist_core::{CostFunction, DistributionModel, LOG2_3};

/// Environment variable consulted when no seed is configured.
pub const SEED_ENV: &str = "STEGDIST_SEED";

const KEYS: [&str; 12] = [
    "cost", "model", "alpha", "sigma", "group_n", "seed", "in", "out", "format", "timing", "csv",
    "changes",
];

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Format {
    Csv,
    Json,
}

impl FromStr for Format {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            other => Err(format!("unknown format {other:?} (expected csv or json)")),
        }
    }
}

impl fmt::Display for Format {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Format::Csv => "csv",
            Format::Json => "json",
        })
    }
}

/// Fully resolved settings for one run.
#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub costs: Vec<CostFunction>,
    pub models: Vec<DistributionModel>,
    pub alpha: f64,
    pub sigma: f64,
    pub group_n: usize,
    pub seed: u64,
    pub inputs: Vec<PathBuf>,
    pub out: PathBuf,
    pub format: Format,
    /// Record wall-clock times in reports (makes reports non-reproducible).
    pub timing: bool,
    /// Also write CSV dumps of cost maps.
    pub csv: bool,
    /// Also write change-map images.
    pub changes: bool,
}

/// Raw settings before validation; later layers override earlier ones.
#[derive(Clone, Debug, Default)]
pub struct Settings {
    values: BTreeMap<String, String>,
    inputs: Vec<String>,
}

impl Settings {
    pub fn set(&mut self, key: &str, value: impl Into<String>) -> Result<(), String> {
        if !KEYS.contains(&key) {
            return Err(format!("unknown configuration key {key:?}"));
        }
        let value = value.into();
        if key == "in" {
            self.inputs.push(value);
        } else {
            self.values.insert(key.to_owned(), value);
        }
        Ok(())
    }

    pub fn set_inputs(&mut self, inputs: Vec<String>) {
        self.inputs = inputs;
    }

    pub fn has(&self, key: &str) -> bool {
        self.values.contains_key(key)
    }

    /// Parses `key = value` lines; `#` starts a comment line and `in` may repeat.
    pub fn parse(text: &str) -> Result<Self, String> {
        let mut settings = Settings::default();
        for (n, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| format!("line {}: expected key = value", n + 1))?;
            settings
                .set(key.trim().replace('-', "_").as_str(), value.trim())
                .map_err(|e| format!("line {}: {e}", n + 1))?;
        }
        Ok(settings)
    }

    pub fn load(path: &Path) -> Result<Self, String> {
        let text = std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
        Self::parse(&text).map_err(|e| format!("{}: {e}", path.display()))
    }

    /// Overlays `other` on top of `self`. A non-empty input list replaces ours.
    pub fn merge(&mut self, other: Settings) {
        self.values.extend(other.values);
        if !other.inputs.is_empty() {
            self.inputs = other.inputs;
        }
    }

    fn get<T: FromStr>(&self, key: &str, default: T) -> Result<T, String>
    where
        T::Err: fmt::Display,
    {
        match self.values.get(key) {
            None => Ok(default),
            Some(raw) => raw
                .parse()
                .map_err(|e| format!("invalid value {raw:?} for {key}: {e}")),
        }
    }

    fn flag(&self, key: &str) -> Result<bool, String> {
        match self.values.get(key).map(|v| v.to_ascii_lowercase()) {
            None => Ok(false),
            Some(v) if matches!(v.as_str(), "true" | "1" | "yes") => Ok(true),
            Some(v) if matches!(v.as_str(), "false" | "0" | "no") => Ok(false),
            Some(v) => Err(format!("invalid boolean {v:?} for {key}")),
        }
    }

    /// Validates and resolves the settings. `env_seed` is the fallback
    /// used when no layer set `seed`.
    pub fn resolve(&self, env_seed: Option<&str>) -> Result<RunConfig, String> {
        let sigma: f64 = self.get("sigma", 1.0)?;
        let costs = parse_list(
            self.values.get("cost").map_or("hill", String::as_str),
            |name| {
                name.parse::<CostFunction>().map(|c| match c {
                    CostFunction::SUniward { .. } => CostFunction::SUniward { sigma },
                    other => other,
                })
            },
        )?;
        let models = match self.values.get("model").map(String::as_str) {
            Some("all") => DistributionModel::ALL.to_vec(),
            other => parse_list(other.unwrap_or("linear"), str::parse::<DistributionModel>)?,
        };
        let alpha: f64 = self.get("alpha", 0.3)?;
        if !(0.0..=LOG2_3).contains(&alpha) {
            return Err(format!("alpha {alpha} outside [0, log2 3]"));
        }
        if costs
            .iter()
            .any(|c| matches!(c, CostFunction::SUniward { .. }))
            && !(sigma > 0.0)
        {
            return Err(format!("sigma must be positive, got {sigma}"));
        }
        let group_n: usize = self.get("group_n", 1)?;
        if group_n == 0 {
            return Err("group_n must be at least 1".into());
        }
        let seed = match (self.values.get("seed"), env_seed) {
            (Some(raw), _) => raw
                .parse()
                .map_err(|e| format!("invalid seed {raw:?}: {e}"))?,
            (None, Some(raw)) => raw
                .trim()
                .parse()
                .map_err(|e| format!("invalid {SEED_ENV} {raw:?}: {e}"))?,
            (None, None) => 0,
        };
        Ok(RunConfig {
            costs,
            models,
            alpha,
            sigma,
            group_n,
            seed,
            inputs: self.inputs.iter().map(PathBuf::from).collect(),
            out: PathBuf::from(self.values.get("out").map_or(".", String::as_str)),
            format: self.get("format", Format::Csv)?,
            timing: self.flag("timing")?,
            csv: self.flag("csv")?,
            changes: self.flag("changes")?,
        })
    }
}

fn parse_list<T>(raw: &str, parse: impl Fn(&str) -> Result<T, String>) -> Result<Vec<T>, String> {
    let items = raw
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(parse)
        .collect::<Result<Vec<_>, _>>()?;
    if items.is_empty() {
        return Err(format!("empty list {raw:?}"));
    }
    Ok(items)
}

impl RunConfig {
    /// The resolved configuration as a config file that reproduces the run.
    pub fn to_manifest(&self, command: &str) -> String {
        let join = |names: Vec<String>| names.join(",");
        let mut out = String::from("# stegdist run manifest\n");
        out.push_str(&format!("# command = {command}\n"));
        out.push_str(&format!(
            "cost = {}\n",
            join(self.costs.iter().map(|c| c.name().to_owned()).collect())
        ));
        out.push_str(&format!(
            "model = {}\n",
            join(self.models.iter().map(|m| m.name().to_owned()).collect())
        ));
        out.push_str(&format!("alpha = {}\n", self.alpha));
        out.push_str(&format!("sigma = {}\n", self.sigma));
        out.push_str(&format!("group_n = {}\n", self.group_n));
        out.push_str(&format!("seed = {}\n", self.seed));
        for input in &self.inputs {
            out.push_str(&format!("in = {}\n", input.display()));
        }
        out.push_str(&format!("out = {}\n", self.out.display()));
        out.push_str(&format!("format = {}\n", self.format));
        out.push_str(&format!("timing = {}\n", self.timing));
        out.push_str(&format!("csv = {}\n", self.csv));
        out.push_str(&format!("changes = {}\n", self.changes));
        out
    }

    pub fn single_cost(&self) -> Result<CostFunction, String> {
        match self.costs.as_slice() {
            [c] => Ok(*c),
            _ => Err("this command takes exactly one cost function".into()),
        }
    }

    pub fn single_model(&self) -> Result<DistributionModel, String> {
        match self.models.as_slice() {
            [m] => Ok(*m),
            _ => Err("this command takes exactly one distribution model".into()),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults() {
        let cfg = Settings::default().resolve(None).unwrap();
        assert_eq!(cfg.costs, vec![CostFunction::Hill]);
        assert_eq!(cfg.models, vec![DistributionModel::Linear]);
        assert_eq!(cfg.alpha, 0.3);
        assert_eq!(cfg.sigma, 1.0);
        assert_eq!(cfg.group_n, 1);
        assert_eq!(cfg.seed, 0);
        assert_eq!(cfg.format, Format::Csv);
    }

    #[test]
    fn file_then_flags() {
        let mut base = Settings::parse(
            "# comment\ncost = suniward\nmodel = all\nalpha = 0.5\nsigma = 2\nseed = 9\nin = a.pgm\nin = b.pgm\n",
        )
        .unwrap();
        let mut flags = Settings::default();
        flags.set("alpha", "0.1").unwrap();
        base.merge(flags);
        let cfg = base.resolve(Some("77")).unwrap();
        assert_eq!(cfg.costs, vec![CostFunction::SUniward { sigma: 2.0 }]);
        assert_eq!(cfg.models.len(), 4);
        assert_eq!(cfg.alpha, 0.1);
        assert_eq!(cfg.seed, 9);
        assert_eq!(
            cfg.inputs,
            vec![PathBuf::from("a.pgm"), PathBuf::from("b.pgm")]
        );
    }

    #[test]
    fn env_seed_is_a_fallback() {
        assert_eq!(Settings::default().resolve(Some("123")).unwrap().seed, 123);
        assert!(Settings::default().resolve(Some("x")).is_err());
    }

    #[test]
    fn validation() {
        let bad = |text: &str| Settings::parse(text).and_then(|s| s.resolve(None)).is_err();
        assert!(bad("alpha = 1.6"));
        assert!(bad("alpha = -0.1"));
        assert!(bad("group_n = 0"));
        assert!(bad("cost = suniward\nsigma = 0"));
        assert!(bad("cost = hugo"));
        assert!(bad("model = gauss"));
        assert!(bad("format = xml"));
        assert!(bad("colour = red"));
        assert!(bad("just a line"));
        assert!(!bad("cost = hill\nsigma = 0"));
    }

    #[test]
    fn manifest_round_trip() {
        let settings = Settings::parse(
            "cost = hill,suniward\nmodel = exp,poly\nalpha = 0.7\ngroup_n = 3\nseed = 5\nin = x/y.pgm\nout = results\nformat = json\nchanges = true\n",
        )
        .unwrap();
        let cfg = settings.resolve(None).unwrap();
        let again = Settings::parse(&cfg.to_manifest("embed"))
            .unwrap()
            .resolve(None)
            .unwrap();
        assert_eq!(cfg, again);
    }
}
