use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use super::CliError;
use crate::code::LogicalReadout;
use crate::experiments::{ConventionChoice, RunMode};
use crate::noise::DeviceParams;
use crate::parallel::Execution;

/// Inclusive `start:stop:count` grid.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct GridSpec {
    pub start: f64,
    pub stop: f64,
    pub count: usize,
}

impl GridSpec {
    pub const fn new(start: f64, stop: f64, count: usize) -> Self {
        Self { start, stop, count }
    }

    pub fn values(&self) -> Vec<f64> {
        if self.count == 1 {
            return vec![self.start];
        }
        let span = self.stop - self.start;
        (0..self.count).map(|i| self.start + span * i as f64 / (self.count - 1) as f64).collect()
    }
}

impl FromStr for GridSpec {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let parts: Vec<&str> = s.split(':').collect();
        let [a, b, n] = parts.as_slice() else {
            return Err(format!("grid {s:?} is not start:stop:count"));
        };
        let num = |v: &str| v.trim().parse::<f64>().map_err(|_| format!("grid {s:?}: {v:?} is not a number"));
        let (start, stop) = (num(a)?, num(b)?);
        let count: usize =
            n.trim().parse().map_err(|_| format!("grid {s:?}: count {n:?} is not a positive integer"))?;
        if count == 0 || !start.is_finite() || !stop.is_finite() {
            return Err(format!("grid {s:?} is empty or not finite"));
        }
        if count > 1 && stop <= start {
            return Err(format!("grid {s:?} is not increasing"));
        }
        Ok(Self { start, stop, count })
    }
}

impl fmt::Display for GridSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}:{}", self.start, self.stop, self.count)
    }
}

impl TryFrom<String> for GridSpec {
    type Error = String;

    fn try_from(s: String) -> Result<Self, String> {
        s.parse()
    }
}

impl From<GridSpec> for String {
    fn from(g: GridSpec) -> String {
        g.to_string()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Experiment {
    Bell,
    SingleRoundQec,
    MultiRoundQec,
    NaturalDephasing,
    Encoding,
}

impl Experiment {
    const ALL: [Experiment; 5] =
        [Self::Bell, Self::SingleRoundQec, Self::MultiRoundQec, Self::NaturalDephasing, Self::Encoding];

    pub fn name(self) -> &'static str {
        match self {
            Self::Bell => "bell",
            Self::SingleRoundQec => "single_round_qec",
            Self::MultiRoundQec => "multi_round_qec",
            Self::NaturalDephasing => "natural_dephasing",
            Self::Encoding => "encoding",
        }
    }

    fn default_variant(self) -> Option<&'static str> {
        match self {
            Self::SingleRoundQec | Self::NaturalDephasing => Some("qec"),
            _ => None,
        }
    }

    fn default_grid(self) -> Option<GridSpec> {
        match self {
            Self::SingleRoundQec | Self::MultiRoundQec => Some(GridSpec::new(0.0, 0.5, 11)),
            Self::NaturalDephasing => Some(GridSpec::new(0.0, 40.0, 21)),
            _ => None,
        }
    }

    fn default_mode(self) -> RunMode {
        match self {
            Self::NaturalDephasing => RunMode::MonteCarlo,
            _ => RunMode::Exact,
        }
    }
}

impl FromStr for Experiment {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        Self::ALL.into_iter().find(|e| e.name() == s).ok_or_else(|| {
            let names: Vec<_> = Self::ALL.iter().map(|e| e.name()).collect();
            format!("unknown experiment {s:?} (expected one of {})", names.join(", "))
        })
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OutputFormat {
    #[default]
    Csv,
    Json,
}

/// Everything needed to reproduce a run. Fields left empty in a config file
/// take the experiment's defaults; the sidecar always holds the resolved form.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub experiment: Experiment,
    #[serde(default)]
    pub variant: Option<String>,
    /// `p_e` grid, or storage times in ms for natural dephasing.
    #[serde(default)]
    pub grid: Option<GridSpec>,
    #[serde(default)]
    pub rounds: Option<u32>,
    /// Data-qubit pair (`0..3`) for the entanglement experiment.
    #[serde(default)]
    pub pair: Option<[usize; 2]>,
    #[serde(default = "default_trials")]
    pub trials: u64,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub mode: Option<RunMode>,
    #[serde(default)]
    pub convention: ConventionChoice,
    #[serde(default)]
    pub readout: LogicalReadout,
    #[serde(default)]
    pub execution: Execution,
    #[serde(default)]
    pub params: Option<DeviceParams>,
    #[serde(default)]
    pub output: Option<PathBuf>,
    #[serde(default)]
    pub format: OutputFormat,
}

fn default_trials() -> u64 {
    10_000
}

impl RunConfig {
    pub fn new(experiment: Experiment) -> Self {
        Self {
            experiment,
            variant: None,
            grid: None,
            rounds: None,
            pair: None,
            trials: default_trials(),
            seed: 0,
            mode: None,
            convention: ConventionChoice::default(),
            readout: LogicalReadout::default(),
            execution: Execution::default(),
            params: None,
            output: None,
            format: OutputFormat::default(),
        }
    }

    /// Reads a config file, or the `config` member of a sidecar.
    pub fn from_json(text: &str) -> Result<Self, CliError> {
        let mut value: Value = serde_json::from_str(text).map_err(|e| CliError::Config(format!("config: {e}")))?;
        if let Some(inner) = value.get_mut("config") {
            value = inner.take();
        }
        serde_json::from_value(value).map_err(|e| CliError::Config(format!("config: {e}")))
    }

    /// Fills every unset field with the experiment default and checks the result.
    pub fn resolve(mut self, default_dir: Option<PathBuf>) -> Result<Self, CliError> {
        let exp = self.experiment;
        let bad = |field: &str, msg: String| CliError::Config(format!("{field}: {msg}"));
        match (exp.default_variant(), &self.variant) {
            (None, Some(v)) => return Err(bad("variant", format!("{} takes no variant (got {v:?})", exp.name()))),
            (Some(d), None) => self.variant = Some(d.to_string()),
            _ => {}
        }
        match (exp.default_grid(), self.grid) {
            (None, Some(_)) => return Err(bad("grid", format!("{} takes no grid", exp.name()))),
            (Some(d), None) => self.grid = Some(d),
            _ => {}
        }
        match (exp, self.rounds) {
            (Experiment::MultiRoundQec, None) => self.rounds = Some(3),
            (Experiment::MultiRoundQec, Some(_)) | (_, None) => {}
            (_, Some(_)) => return Err(bad("rounds", format!("{} takes no rounds", exp.name()))),
        }
        match (exp, self.pair) {
            (Experiment::Bell, None) => self.pair = Some([0, 1]),
            (Experiment::Bell, Some(_)) | (_, None) => {}
            (_, Some(_)) => return Err(bad("pair", format!("{} takes no pair", exp.name()))),
        }
        self.mode.get_or_insert(exp.default_mode());
        if self.trials == 0 {
            return Err(bad("trials", "must be at least 1".into()));
        }
        let params = self.params.get_or_insert_with(|| match exp {
            Experiment::NaturalDephasing => DeviceParams::natural_dephasing(),
            _ => DeviceParams::calibrated(),
        });
        params.validate().map_err(|e| bad("params", e.to_string()))?;
        if self.output.is_none() {
            let mut name = exp.name().to_string();
            if let Some(v) = &self.variant {
                name = format!("{name}_{v}");
            }
            if let Some(n) = self.rounds {
                name = format!("{name}_{n}rounds");
            }
            let ext = match self.format {
                OutputFormat::Csv => "csv",
                OutputFormat::Json => "json",
            };
            self.output = Some(default_dir.unwrap_or_default().join(format!("{name}.{ext}")));
        }
        Ok(self)
    }
}

/// A device preset by name.
pub fn device_preset(name: &str) -> Result<DeviceParams, CliError> {
    match name {
        "calibrated" => Ok(DeviceParams::calibrated()),
        "ideal" => Ok(DeviceParams::ideal()),
        "natural_dephasing" => Ok(DeviceParams::natural_dephasing()),
        _ => Err(CliError::Config(format!("device: unknown preset {name:?} (calibrated, ideal, natural_dephasing)"))),
    }
}

/// Applies `key=value` overrides. Arrays are comma separated; `none`
/// clears an optional field.
pub fn apply_overrides(params: &DeviceParams, overrides: &[String]) -> Result<DeviceParams, CliError> {
    let mut value = serde_json::to_value(params).expect("device parameters serialize");
    let map = value.as_object_mut().expect("struct serializes to an object");
    for item in overrides {
        let (key, raw) = parse_assignment(item)?;
        if !map.contains_key(key) {
            return Err(CliError::Config(format!("param: unknown device parameter `{key}`")));
        }
        map.insert(key.to_string(), parse_value(key, raw)?);
    }
    let out: DeviceParams = serde_json::from_value(value).map_err(|e| CliError::Config(format!("param: {e}")))?;
    out.validate().map_err(|e| CliError::Config(format!("param: {e}")))?;
    Ok(out)
}

pub(crate) fn parse_assignment(item: &str) -> Result<(&str, &str), CliError> {
    item.split_once('=')
        .map(|(k, v)| (k.trim(), v.trim()))
        .filter(|(k, _)| !k.is_empty())
        .ok_or_else(|| CliError::Config(format!("param: {item:?} is not key=value")))
}

fn parse_value(key: &str, raw: &str) -> Result<Value, CliError> {
    if raw.eq_ignore_ascii_case("none") {
        return Ok(Value::Null);
    }
    let num = |v: &str| {
        v.trim()
            .parse::<f64>()
            .map(Value::from)
            .map_err(|_| CliError::Config(format!("param: `{key}` value {v:?} is not a number")))
    };
    if raw.contains(',') {
        Ok(Value::Array(raw.split(',').map(num).collect::<Result<_, _>>()?))
    } else {
        num(raw)
    }
}

pub(crate) fn parse_readout(s: &str) -> Result<LogicalReadout, CliError> {
    match s {
        "mean" | "permutation_mean" => Ok(LogicalReadout::PermutationMean),
        _ => match s.parse::<usize>() {
            Ok(k) if k < 3 => Ok(LogicalReadout::Qubit(k)),
            _ => Err(CliError::Config(format!("readout: {s:?} is not mean, 0, 1 or 2"))),
        },
    }
}

pub(crate) fn parse_pair(s: &str) -> Result<[usize; 2], CliError> {
    let v: Vec<usize> = s
        .split(',')
        .map(|p| p.trim().parse::<usize>())
        .collect::<Result<_, _>>()
        .map_err(|_| CliError::Config(format!("pair: {s:?} is not two qubit indices")))?;
    match v.as_slice() {
        [a, b] if a != b && *a < 3 && *b < 3 => Ok([*a, *b]),
        _ => Err(CliError::Config(format!("pair: {s:?} must name two distinct qubits in 0..3"))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grids() {
        let g: GridSpec = "0:0.5:11".parse().unwrap();
        let v = g.values();
        assert_eq!(v.len(), 11);
        assert_eq!((v[0], v[10]), (0.0, 0.5));
        assert_eq!("0.2:0.2:1".parse::<GridSpec>().unwrap().values(), vec![0.2]);
        for bad in ["0:1", "0:1:0", "1:0:3", "a:1:2", "0:1:-2"] {
            assert!(bad.parse::<GridSpec>().is_err(), "{bad}");
        }
        assert_eq!(g.to_string().parse::<GridSpec>().unwrap(), g);
    }

    #[test]
    fn overrides() {
        let p = apply_overrides(
            &DeviceParams::calibrated(),
            &["f0_readout=0.9".into(), "t1_qubit=none".into(), "p_in=0,0,0.1".into()],
        )
        .unwrap();
        assert_eq!(p.f0_readout, 0.9);
        assert_eq!(p.t1_qubit, None);
        assert_eq!(p.p_in, [0.0, 0.0, 0.1]);
        for bad in ["nope=1", "f0_readout=2", "p_in=1,2", "f0_readout"] {
            assert!(apply_overrides(&DeviceParams::calibrated(), &[bad.into()]).is_err(), "{bad}");
        }
    }

    #[test]
    fn resolution_fills_defaults_and_rejects_extras() {
        let c = RunConfig::new(Experiment::MultiRoundQec).resolve(None).unwrap();
        assert_eq!(c.rounds, Some(3));
        assert_eq!(c.mode, Some(RunMode::Exact));
        assert_eq!(c.output, Some(PathBuf::from("multi_round_qec_3rounds.csv")));
        let mut bad = RunConfig::new(Experiment::Encoding);
        bad.grid = Some(GridSpec::new(0.0, 1.0, 2));
        assert!(matches!(bad.resolve(None), Err(CliError::Config(m)) if m.starts_with("grid")));
        let nd = RunConfig::new(Experiment::NaturalDephasing).resolve(None).unwrap();
        assert_eq!(nd.params, Some(DeviceParams::natural_dephasing()));
    }

    #[test]
    fn sidecar_and_plain_config_parse() {
        let c = RunConfig::new(Experiment::Bell).resolve(None).unwrap();
        let plain = serde_json::to_string(&c).unwrap();
        let wrapped = format!("{{\"version\":\"x\",\"config\":{plain}}}");
        assert_eq!(RunConfig::from_json(&plain).unwrap(), c);
        assert_eq!(RunConfig::from_json(&wrapped).unwrap(), c);
        assert!(RunConfig::from_json("{\"experiment\":\"bell\",\"typo\":1}").is_err());
    }
}
