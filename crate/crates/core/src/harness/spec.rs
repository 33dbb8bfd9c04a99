//! Experiment specification files.
//!
//! One `key = value` pair per line, `#` starts a comment, blank lines are
//! ignored, and every key may appear at most once. Lists are comma
//! separated; numeric lists also accept `start:step:stop` (inclusive).
//!
//! ```text
//! system.n_t = 32            system.n_r = 8
//! system.users = 1           system.subcarriers = 1
//! system.streams = 3         system.n_rf_t = 3        system.n_rf_r = 3
//! structure.eta = 1          structure.n_c = 10
//! channel.clusters = 5       channel.rays = 10        channel.spread_deg = 10
//! channel.taps = 1           channel.tx_array = linear | planar:RxC
//! channel.rx_array = linear  channel.spacing = 0.5
//! experiment.algorithms = fully-digital, dps-full, mo-altmin
//! experiment.snr_db = -10:5:10
//! experiment.trials = 100    experiment.seed = 1
//! sweep.variable = n_rf | n_c | eta | snr
//! sweep.values = 3, 4, 5
//! output.path = results.csv  output.format = csv      output.timing = true
//! algo.<id>.<option> = value
//! ```

use std::collections::BTreeMap;
use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::channel::{ArrayGeometry, ChannelParams};
use crate::dps::KmeansOptions;
use crate::error::{Error, Result};
use crate::model::{HybridConfig, Implementation, Mapping};
use crate::sps::AltMinOptions;

/// Registered design algorithms.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum AlgorithmId {
    FullyDigital,
    Omp,
    MoAltMin,
    PeRelaxation,
    SpsPartial,
    DpsFull,
    DpsPartialFixed,
    DpsPartialGreedy,
    DpsPartialKmeans,
    Fps,
}

impl AlgorithmId {
    pub const ALL: [AlgorithmId; 10] = [
        AlgorithmId::FullyDigital,
        AlgorithmId::Omp,
        AlgorithmId::MoAltMin,
        AlgorithmId::PeRelaxation,
        AlgorithmId::SpsPartial,
        AlgorithmId::DpsFull,
        AlgorithmId::DpsPartialFixed,
        AlgorithmId::DpsPartialGreedy,
        AlgorithmId::DpsPartialKmeans,
        AlgorithmId::Fps,
    ];

    pub fn name(self) -> &'static str {
        match self {
            AlgorithmId::FullyDigital => "fully-digital",
            AlgorithmId::Omp => "omp",
            AlgorithmId::MoAltMin => "mo-altmin",
            AlgorithmId::PeRelaxation => "pe-relaxation",
            AlgorithmId::SpsPartial => "sps-partial",
            AlgorithmId::DpsFull => "dps-full",
            AlgorithmId::DpsPartialFixed => "dps-partial-fixed",
            AlgorithmId::DpsPartialGreedy => "dps-partial-greedy",
            AlgorithmId::DpsPartialKmeans => "dps-partial-kmeans",
            AlgorithmId::Fps => "fps",
        }
    }

    /// Whether the algorithm follows `structure.eta`; the others have a fixed mapping.
    pub fn group_capable(self) -> bool {
        matches!(
            self,
            AlgorithmId::Omp | AlgorithmId::MoAltMin | AlgorithmId::PeRelaxation | AlgorithmId::DpsFull | AlgorithmId::Fps
        )
    }

    /// Hardware realization and mapping, `None` for the fully digital baseline.
    pub fn structure(self, eta: usize, n_c: usize) -> Option<(Implementation, Mapping)> {
        let grouped = if eta == 1 { Mapping::Fully } else { Mapping::Group(eta) };
        Some(match self {
            AlgorithmId::FullyDigital => return None,
            AlgorithmId::Omp | AlgorithmId::MoAltMin | AlgorithmId::PeRelaxation => (Implementation::Sps, grouped),
            AlgorithmId::SpsPartial => (Implementation::Sps, Mapping::Partially),
            AlgorithmId::DpsFull => (Implementation::Dps, grouped),
            AlgorithmId::DpsPartialFixed | AlgorithmId::DpsPartialGreedy | AlgorithmId::DpsPartialKmeans => {
                (Implementation::Dps, Mapping::Partially)
            }
            AlgorithmId::Fps => (Implementation::Fps { n_c }, grouped),
        })
    }

    fn options(self) -> &'static [&'static str] {
        match self {
            AlgorithmId::MoAltMin => &["max_outer", "tolerance", "cg_steps", "armijo", "backtrack", "max_backtracks"],
            AlgorithmId::SpsPartial | AlgorithmId::Fps => &["max_outer", "tolerance"],
            AlgorithmId::Omp => &["oversample"],
            AlgorithmId::DpsPartialKmeans => &["max_sweeps"],
            _ => &[],
        }
    }
}

impl fmt::Display for AlgorithmId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for AlgorithmId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|a| a.name() == s)
            .ok_or_else(|| Error::InvalidConfig(format!("unknown algorithm `{s}`")))
    }
}

/// An algorithm and its tuning options.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AlgorithmSpec {
    pub id: AlgorithmId,
    pub altmin: AltMinOptions,
    /// DFT grid oversampling appended to the OMP codebook; 0 keeps path responses only.
    pub oversample: usize,
    pub kmeans: KmeansOptions,
}

impl AlgorithmSpec {
    pub fn new(id: AlgorithmId) -> Self {
        Self { id, altmin: AltMinOptions::default(), oversample: 0, kmeans: KmeansOptions::default() }
    }
}

/// Array sizes, user count and RF-chain budget.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SystemSpec {
    pub n_t: usize,
    pub n_r: usize,
    pub users: usize,
    pub subcarriers: usize,
    pub streams: usize,
    pub n_rf_t: usize,
    pub n_rf_r: usize,
}

impl SystemSpec {
    /// Hybrid configuration seen by one algorithm.
    pub fn config(&self, implementation: Implementation, mapping: Mapping) -> HybridConfig {
        HybridConfig {
            n_t: self.n_t,
            n_r: self.n_r,
            users: self.users,
            subcarriers: self.subcarriers,
            streams: self.streams,
            n_rf_t: self.n_rf_t,
            n_rf_r: self.n_rf_r,
            mapping,
            implementation,
        }
    }
}

/// Group count and fixed-phase bank size shared by the group-capable algorithms.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StructureSpec {
    pub eta: usize,
    pub n_c: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SweepVariable {
    NRf,
    NC,
    Eta,
    Snr,
}

impl SweepVariable {
    pub fn name(self) -> &'static str {
        match self {
            SweepVariable::NRf => "n_rf",
            SweepVariable::NC => "n_c",
            SweepVariable::Eta => "eta",
            SweepVariable::Snr => "snr",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepSpec {
    pub variable: SweepVariable,
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum OutputFormat {
    Csv,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OutputSpec {
    pub path: Option<PathBuf>,
    pub format: OutputFormat,
    /// Record wall time; when off the `ms` column is 0 so outputs are byte-stable.
    pub timing: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentSpec {
    pub system: SystemSpec,
    pub structure: StructureSpec,
    /// Channel statistics; the seed is replaced per trial.
    pub channel: ChannelParams,
    pub tx_array: ArrayGeometry,
    pub rx_array: ArrayGeometry,
    pub algorithms: Vec<AlgorithmSpec>,
    pub snr_db: Vec<f64>,
    pub sweep: Option<SweepSpec>,
    pub trials: usize,
    pub seed: u64,
    pub output: OutputSpec,
}

/// One point of the swept variable: the system, structure and SNR grid it implies.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepPoint {
    pub value: Option<f64>,
    pub system: SystemSpec,
    pub structure: StructureSpec,
    pub snr_db: Vec<f64>,
}

impl ExperimentSpec {
    pub fn parse(text: &str) -> Result<Self> {
        let mut entries = BTreeMap::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let (key, value) = content
                .split_once('=')
                .ok_or_else(|| Error::SpecParse { line, message: format!("expected `key = value`, got `{content}`") })?;
            let (key, value) = (key.trim().to_string(), value.trim().to_string());
            if key.is_empty() {
                return Err(Error::SpecParse { line, message: "empty key".into() });
            }
            if entries.insert(key.clone(), (line, value)).is_some() {
                return Err(Error::SpecParse { line, message: format!("duplicate key `{key}`") });
            }
        }
        let spec = Reader { entries }.build()?;
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(Error::InvalidConfig("trials must be positive".into()));
        }
        if self.algorithms.is_empty() {
            return Err(Error::InvalidConfig("no algorithms listed".into()));
        }
        if self.snr_db.is_empty() || self.snr_db.iter().any(|s| !s.is_finite()) {
            return Err(Error::InvalidConfig("SNR grid must be a nonempty list of finite values".into()));
        }
        self.channel.validate()?;
        self.tx_array.validate()?;
        self.rx_array.validate()?;
        if self.tx_array.count != self.system.n_t || self.rx_array.count != self.system.n_r {
            return Err(Error::InvalidConfig("array sizes disagree with system.n_t / system.n_r".into()));
        }
        if self.channel.subcarriers != self.system.subcarriers {
            return Err(Error::InvalidConfig("channel subcarriers disagree with the system".into()));
        }
        self.algorithms.iter().try_for_each(|a| a.altmin.validate())?;
        if let Some(sweep) = &self.sweep {
            if sweep.values.is_empty() {
                return Err(Error::InvalidConfig("sweep.values is empty".into()));
            }
        }
        for point in self.points(true)? {
            self.validate_point(&point)?;
        }
        Ok(())
    }

    fn validate_point(&self, p: &SweepPoint) -> Result<()> {
        let s = &p.system;
        for a in &self.algorithms {
            let Some((implementation, mapping)) = a.id.structure(p.structure.eta, p.structure.n_c) else {
                s.config(Implementation::Sps, Mapping::Fully).validate()?;
                continue;
            };
            s.config(implementation, mapping).validate()?;
            if let Mapping::Group(eta) = mapping {
                if s.n_r % eta != 0 || s.n_rf_r % eta != 0 {
                    return Err(Error::InvalidConfig(format!(
                        "group count {eta} must divide N_r={} and N_RF_r={}",
                        s.n_r, s.n_rf_r
                    )));
                }
            }
        }
        Ok(())
    }

    /// The configurations to evaluate; `with_sweep = false` ignores the sweep section.
    pub fn points(&self, with_sweep: bool) -> Result<Vec<SweepPoint>> {
        let base = SweepPoint { value: None, system: self.system, structure: self.structure, snr_db: self.snr_db.clone() };
        let Some(sweep) = self.sweep.as_ref().filter(|_| with_sweep) else {
            return Ok(vec![base]);
        };
        sweep
            .values
            .iter()
            .map(|&v| {
                let mut p = SweepPoint { value: Some(v), ..base.clone() };
                match sweep.variable {
                    SweepVariable::NRf => p.system.n_rf_t = count(v, "n_rf")?,
                    SweepVariable::NC => p.structure.n_c = count(v, "n_c")?,
                    SweepVariable::Eta => p.structure.eta = count(v, "eta")?,
                    SweepVariable::Snr => {
                        if !v.is_finite() {
                            return Err(Error::InvalidConfig("sweep SNR must be finite".into()));
                        }
                        p.snr_db = vec![v];
                    }
                }
                Ok(p)
            })
            .collect()
    }
}

fn count(v: f64, what: &str) -> Result<usize> {
    if v >= 1.0 && v.fract() == 0.0 && v < 1e9 {
        Ok(v as usize)
    } else {
        Err(Error::InvalidConfig(format!("sweep value {v} is not a valid {what}")))
    }
}

struct Reader {
    entries: BTreeMap<String, (usize, String)>,
}

impl Reader {
    fn take(&mut self, key: &str) -> Option<(usize, String)> {
        self.entries.remove(key)
    }

    fn parsed<T: FromStr>(&mut self, key: &str, default: T) -> Result<T> {
        match self.take(key) {
            None => Ok(default),
            Some((line, v)) => v
                .parse()
                .map_err(|_| Error::SpecParse { line, message: format!("`{key}`: cannot parse `{v}`") }),
        }
    }

    fn required<T: FromStr>(&mut self, key: &str) -> Result<T> {
        let (line, v) = self
            .take(key)
            .ok_or_else(|| Error::SpecParse { line: 0, message: format!("missing required key `{key}`") })?;
        v.parse().map_err(|_| Error::SpecParse { line, message: format!("`{key}`: cannot parse `{v}`") })
    }

    fn list(&mut self, key: &str) -> Result<Option<Vec<f64>>> {
        self.take(key)
            .map(|(line, v)| parse_list(&v).map_err(|message| Error::SpecParse { line, message }))
            .transpose()
    }

    fn array(&mut self, key: &str, count: usize, spacing: f64) -> Result<ArrayGeometry> {
        let geometry = match self.take(key) {
            None => ArrayGeometry::linear(count),
            Some((line, v)) => parse_array(&v, count).map_err(|message| Error::SpecParse { line, message })?,
        };
        Ok(geometry.with_spacing(spacing))
    }

    fn build(mut self) -> Result<ExperimentSpec> {
        let system = SystemSpec {
            n_t: self.required("system.n_t")?,
            n_r: self.required("system.n_r")?,
            users: self.parsed("system.users", 1)?,
            subcarriers: self.parsed("system.subcarriers", 1)?,
            streams: self.parsed("system.streams", 1)?,
            n_rf_t: self.required("system.n_rf_t")?,
            n_rf_r: self.required("system.n_rf_r")?,
        };
        let structure = StructureSpec { eta: self.parsed("structure.eta", 1)?, n_c: self.parsed("structure.n_c", 10)? };
        let defaults = ChannelParams::default();
        let channel = ChannelParams {
            n_clusters: self.parsed("channel.clusters", defaults.n_clusters)?,
            n_rays: self.parsed("channel.rays", defaults.n_rays)?,
            angle_spread_deg: self.parsed("channel.spread_deg", defaults.angle_spread_deg)?,
            subcarriers: system.subcarriers,
            delay_taps: self.parsed("channel.taps", defaults.delay_taps)?,
            seed: 0,
        };
        let spacing = self.parsed("channel.spacing", 0.5)?;
        let tx_array = self.array("channel.tx_array", system.n_t, spacing)?;
        let rx_array = self.array("channel.rx_array", system.n_r, spacing)?;

        let (line, names) = self
            .take("experiment.algorithms")
            .ok_or_else(|| Error::SpecParse { line: 0, message: "missing required key `experiment.algorithms`".into() })?;
        let mut algorithms: Vec<AlgorithmSpec> = Vec::new();
        for name in names.split(',').map(str::trim).filter(|s| !s.is_empty()) {
            let id: AlgorithmId =
                name.parse().map_err(|e: Error| Error::SpecParse { line, message: e.to_string() })?;
            if algorithms.iter().any(|a| a.id == id) {
                return Err(Error::SpecParse { line, message: format!("algorithm `{name}` listed twice") });
            }
            algorithms.push(AlgorithmSpec::new(id));
        }
        for a in &mut algorithms {
            let prefix = format!("algo.{}.", a.id);
            for opt in a.id.options() {
                let key = format!("{prefix}{opt}");
                match *opt {
                    "max_outer" => a.altmin.max_outer = self.parsed(&key, a.altmin.max_outer)?,
                    "tolerance" => a.altmin.tolerance = self.parsed(&key, a.altmin.tolerance)?,
                    "cg_steps" => a.altmin.cg_steps = self.parsed(&key, a.altmin.cg_steps)?,
                    "armijo" => a.altmin.armijo = self.parsed(&key, a.altmin.armijo)?,
                    "backtrack" => a.altmin.backtrack = self.parsed(&key, a.altmin.backtrack)?,
                    "max_backtracks" => a.altmin.max_backtracks = self.parsed(&key, a.altmin.max_backtracks)?,
                    "oversample" => a.oversample = self.parsed(&key, a.oversample)?,
                    "max_sweeps" => a.kmeans.max_sweeps = self.parsed(&key, a.kmeans.max_sweeps)?,
                    _ => unreachable!("option table out of sync"),
                }
            }
        }

        let snr_db = self.list("experiment.snr_db")?.unwrap_or_else(|| (-15..=15).step_by(5).map(f64::from).collect());
        let trials = self.parsed("experiment.trials", 1)?;
        let seed = self.parsed("experiment.seed", 0)?;

        let variable = self.take("sweep.variable");
        let values = self.take("sweep.values");
        let sweep = match (variable, values) {
            (None, None) => None,
            (Some((line, v)), values) => {
                let variable = match v.as_str() {
                    "n_rf" => SweepVariable::NRf,
                    "n_c" => SweepVariable::NC,
                    "eta" => SweepVariable::Eta,
                    "snr" => SweepVariable::Snr,
                    other => {
                        return Err(Error::SpecParse { line, message: format!("unknown sweep variable `{other}`") })
                    }
                };
                let values = match values {
                    None => Vec::new(),
                    Some((line, v)) => parse_list(&v).map_err(|message| Error::SpecParse { line, message })?,
                };
                Some(SweepSpec { variable, values })
            }
            (None, Some((line, _))) => {
                return Err(Error::SpecParse { line, message: "`sweep.values` without `sweep.variable`".into() })
            }
        };

        let path = self.take("output.path").map(|(_, p)| PathBuf::from(p));
        let format = match self.take("output.format") {
            None => OutputFormat::Csv,
            Some((_, f)) if f == "csv" => OutputFormat::Csv,
            Some((line, f)) => return Err(Error::SpecParse { line, message: format!("unsupported format `{f}`") }),
        };
        let timing = self.parsed("output.timing", true)?;

        if let Some((key, (line, _))) = self.entries.into_iter().next() {
            return Err(Error::SpecParse { line, message: format!("unknown key `{key}`") });
        }
        Ok(ExperimentSpec {
            system,
            structure,
            channel,
            tx_array,
            rx_array,
            algorithms,
            snr_db,
            sweep,
            trials,
            seed,
            output: OutputSpec { path, format, timing },
        })
    }
}

fn parse_list(v: &str) -> std::result::Result<Vec<f64>, String> {
    let num = |s: &str| s.trim().parse::<f64>().map_err(|_| format!("`{}` is not a number", s.trim()));
    let parts: Vec<&str> = v.split(':').collect();
    if parts.len() == 3 {
        let (start, step, stop) = (num(parts[0])?, num(parts[1])?, num(parts[2])?);
        if !(step > 0.0) || stop < start {
            return Err(format!("range `{v}` needs a positive step and start <= stop"));
        }
        let n = ((stop - start) / step + 1e-9).floor() as usize;
        return Ok((0..=n).map(|i| start + step * i as f64).collect());
    }
    v.split(',').filter(|s| !s.trim().is_empty()).map(num).collect()
}

fn parse_array(v: &str, count: usize) -> std::result::Result<ArrayGeometry, String> {
    if v == "linear" {
        return Ok(ArrayGeometry::linear(count));
    }
    let dims = v.strip_prefix("planar:").ok_or_else(|| format!("unknown array `{v}`"))?;
    let (r, c) = dims.split_once('x').ok_or_else(|| format!("planar array needs `RxC`, got `{dims}`"))?;
    let rows: usize = r.trim().parse().map_err(|_| format!("bad row count `{r}`"))?;
    let cols: usize = c.trim().parse().map_err(|_| format!("bad column count `{c}`"))?;
    if rows * cols != count {
        return Err(format!("planar {rows}x{cols} does not hold {count} antennas"));
    }
    Ok(ArrayGeometry::planar(rows, cols))
}

#[cfg(test)]
mod tests {
    use super::*;

    const BASE: &str = "
        system.n_t = 16
        system.n_r = 4
        system.streams = 2
        system.n_rf_t = 4
        system.n_rf_r = 2
        experiment.algorithms = fully-digital, dps-full, mo-altmin
        experiment.snr_db = -10:5:10   # inclusive
        algo.mo-altmin.max_outer = 20
    ";

    #[test]
    fn parses_defaults_and_ranges() {
        let s = ExperimentSpec::parse(BASE).unwrap();
        assert_eq!(s.snr_db, vec![-10.0, -5.0, 0.0, 5.0, 10.0]);
        assert_eq!(s.algorithms[2].altmin.max_outer, 20);
        assert_eq!(s.structure, StructureSpec { eta: 1, n_c: 10 });
        assert_eq!(s.trials, 1);
        assert!(s.output.timing);
        assert_eq!(s.points(true).unwrap().len(), 1);
    }

    #[test]
    fn default_snr_grid() {
        let text = BASE.replace("experiment.snr_db = -10:5:10   # inclusive", "");
        let s = ExperimentSpec::parse(&text).unwrap();
        assert_eq!(s.snr_db, vec![-15.0, -10.0, -5.0, 0.0, 5.0, 10.0, 15.0]);
    }

    #[test]
    fn rejects_unknown_and_duplicate_keys() {
        for extra in ["system.bogus = 1", "system.n_t = 16", "algo.dps-full.max_outer = 3", "no equals sign"] {
            let err = ExperimentSpec::parse(&format!("{BASE}\n{extra}")).unwrap_err();
            assert_eq!(err.tag(), "spec-parse", "{extra}");
        }
    }

    #[test]
    fn unknown_algorithm_reports_its_line() {
        let err = ExperimentSpec::parse(&BASE.replace("mo-altmin\n", "magic\n")).unwrap_err();
        assert!(matches!(err, Error::SpecParse { line: 7, .. }), "{err:?}");
    }

    #[test]
    fn sweep_points_override_one_field() {
        let s = ExperimentSpec::parse(&format!("{BASE}\nsweep.variable = n_rf\nsweep.values = 4, 6, 8")).unwrap();
        let pts = s.points(true).unwrap();
        assert_eq!(pts.iter().map(|p| p.system.n_rf_t).collect::<Vec<_>>(), vec![4, 6, 8]);
        assert_eq!(s.points(false).unwrap()[0].system.n_rf_t, 4);
        let s = ExperimentSpec::parse(&format!("{BASE}\nsweep.variable = snr\nsweep.values = 3")).unwrap();
        assert_eq!(s.points(true).unwrap()[0].snr_db, vec![3.0]);
    }

    #[test]
    fn empty_or_invalid_sweeps_fail_validation() {
        let err = ExperimentSpec::parse(&format!("{BASE}\nsweep.variable = eta\nsweep.values =")).unwrap_err();
        assert_eq!(err.tag(), "invalid-config");
        let err = ExperimentSpec::parse(&format!("{BASE}\nsweep.variable = eta\nsweep.values = 3")).unwrap_err();
        assert_eq!(err.tag(), "invalid-config");
        let err = ExperimentSpec::parse(&format!("{BASE}\nsweep.variable = n_rf\nsweep.values = 1")).unwrap_err();
        assert_eq!(err.tag(), "invalid-config");
    }

    #[test]
    fn planar_arrays_must_fit() {
        let s = ExperimentSpec::parse(&format!("{BASE}\nchannel.tx_array = planar:4x4")).unwrap();
        assert_eq!(s.tx_array.kind, crate::channel::ArrayKind::Planar { rows: 4, cols: 4 });
        assert!(ExperimentSpec::parse(&format!("{BASE}\nchannel.tx_array = planar:4x3")).is_err());
    }
}
