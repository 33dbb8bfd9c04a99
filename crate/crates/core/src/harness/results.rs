//! Result rows and their CSV form.
//!
//! Columns, in order:
//! `algorithm,structure,sweep,snr_db,trial,se_bps_hz,residual,iters,ms,phase_shifters,switches`.
//! `sweep` is `-` outside a sweep. `trial` is a trial index, `mean` or
//! `stderr`. A failed design puts `error:<tag>` in `se_bps_hz` and leaves
//! `residual`, `iters` and `ms` empty. Floats use the shortest representation
//! that parses back to the same value.

use std::fmt::Write as _;

use crate::error::{Error, Result};

pub const CSV_HEADER: &str = "algorithm,structure,sweep,snr_db,trial,se_bps_hz,residual,iters,ms,phase_shifters,switches";

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum TrialLabel {
    Index(usize),
    Mean,
    StdErr,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Outcome {
    Ok { se: f64, residual: f64, iters: f64, ms: f64 },
    Failed(String),
}

#[derive(Debug, Clone, PartialEq)]
pub struct ResultRow {
    pub algorithm: String,
    pub structure: String,
    pub sweep: Option<f64>,
    pub snr_db: f64,
    pub trial: TrialLabel,
    pub outcome: Outcome,
    pub phase_shifters: usize,
    pub switches: usize,
}

impl ResultRow {
    pub fn se(&self) -> Option<f64> {
        match self.outcome {
            Outcome::Ok { se, .. } => Some(se),
            Outcome::Failed(_) => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct ExperimentResult {
    pub rows: Vec<ResultRow>,
}

impl ExperimentResult {
    /// Aggregate rows for one algorithm at one `(sweep, snr)` point.
    pub fn mean_rows(&self) -> impl Iterator<Item = &ResultRow> {
        self.rows.iter().filter(|r| r.trial == TrialLabel::Mean)
    }

    /// Mean SE of `algorithm` at `(sweep, snr)`, if that aggregate succeeded.
    pub fn mean_se(&self, algorithm: &str, sweep: Option<f64>, snr_db: f64) -> Option<f64> {
        self.mean_rows()
            .find(|r| r.algorithm == algorithm && r.sweep == sweep && r.snr_db == snr_db)
            .and_then(ResultRow::se)
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::with_capacity(64 * (self.rows.len() + 1));
        out.push_str(CSV_HEADER);
        out.push('\n');
        for r in &self.rows {
            let sweep = r.sweep.map_or("-".to_string(), |v| v.to_string());
            let trial = match r.trial {
                TrialLabel::Index(i) => i.to_string(),
                TrialLabel::Mean => "mean".into(),
                TrialLabel::StdErr => "stderr".into(),
            };
            let (se, residual, iters, ms) = match &r.outcome {
                Outcome::Ok { se, residual, iters, ms } => {
                    (se.to_string(), residual.to_string(), iters.to_string(), ms.to_string())
                }
                Outcome::Failed(tag) => (format!("error:{tag}"), String::new(), String::new(), String::new()),
            };
            let _ = writeln!(
                out,
                "{},{},{sweep},{},{trial},{se},{residual},{iters},{ms},{},{}",
                r.algorithm, r.structure, r.snr_db, r.phase_shifters, r.switches
            );
        }
        out
    }

    pub fn from_csv(text: &str) -> Result<Self> {
        let mut lines = text.lines();
        match lines.next() {
            Some(h) if h.trim_end() == CSV_HEADER => {}
            Some(h) => return Err(Error::Schema(format!("unexpected header `{h}`"))),
            None => return Err(Error::Schema("empty result file".into())),
        }
        let rows = lines
            .enumerate()
            .filter(|(_, l)| !l.trim().is_empty())
            .map(|(i, l)| parse_row(l).map_err(|m| Error::Schema(format!("row {}: {m}", i + 1))))
            .collect::<Result<_>>()?;
        Ok(Self { rows })
    }
}

fn parse_row(line: &str) -> std::result::Result<ResultRow, String> {
    let f: Vec<&str> = line.trim_end().split(',').collect();
    if f.len() != 11 {
        return Err(format!("expected 11 fields, found {}", f.len()));
    }
    let num = |s: &str| s.parse::<f64>().map_err(|_| format!("`{s}` is not a number"));
    let int = |s: &str| s.parse::<usize>().map_err(|_| format!("`{s}` is not a count"));
    let sweep = if f[2] == "-" { None } else { Some(num(f[2])?) };
    let trial = match f[4] {
        "mean" => TrialLabel::Mean,
        "stderr" => TrialLabel::StdErr,
        s => TrialLabel::Index(int(s)?),
    };
    let outcome = match f[5].strip_prefix("error:") {
        Some(tag) => Outcome::Failed(tag.to_string()),
        None => Outcome::Ok { se: num(f[5])?, residual: num(f[6])?, iters: num(f[7])?, ms: num(f[8])? },
    };
    Ok(ResultRow {
        algorithm: f[0].to_string(),
        structure: f[1].to_string(),
        sweep,
        snr_db: num(f[3])?,
        trial,
        outcome,
        phase_shifters: int(f[9])?,
        switches: int(f[10])?,
    })
}

/// Mean and standard error rows over the successful trials of one group of
/// rows sharing algorithm, structure, sweep value and SNR.
pub(crate) fn aggregate(group: &[&ResultRow]) -> [ResultRow; 2] {
    let first = group[0];
    let ok: Vec<[f64; 4]> = group
        .iter()
        .filter_map(|r| match r.outcome {
            Outcome::Ok { se, residual, iters, ms } => Some([se, residual, iters, ms]),
            Outcome::Failed(_) => None,
        })
        .collect();
    let row = |trial, outcome| ResultRow { trial, outcome, ..first.clone() };
    if ok.is_empty() {
        let tag = "no-successful-trials".to_string();
        return [row(TrialLabel::Mean, Outcome::Failed(tag.clone())), row(TrialLabel::StdErr, Outcome::Failed(tag))];
    }
    let n = ok.len() as f64;
    let mut mean = [0.0; 4];
    for v in &ok {
        for (m, x) in mean.iter_mut().zip(v) {
            *m += x;
        }
    }
    mean.iter_mut().for_each(|m| *m /= n);
    let mut se = [0.0; 4];
    if ok.len() > 1 {
        for v in &ok {
            for ((s, x), m) in se.iter_mut().zip(v).zip(&mean) {
                *s += (x - m).powi(2);
            }
        }
        se.iter_mut().for_each(|s| *s = (*s / (n - 1.0)).sqrt() / n.sqrt());
    }
    let pack = |v: [f64; 4]| Outcome::Ok { se: v[0], residual: v[1], iters: v[2], ms: v[3] };
    [row(TrialLabel::Mean, pack(mean)), row(TrialLabel::StdErr, pack(se))]
}

#[cfg(test)]
mod tests {
    use super::*;

    fn row(trial: TrialLabel, outcome: Outcome) -> ResultRow {
        ResultRow {
            algorithm: "dps-full".into(),
            structure: "DPS-fully".into(),
            sweep: Some(2.0),
            snr_db: -7.5,
            trial,
            outcome,
            phase_shifters: 48,
            switches: 0,
        }
    }

    #[test]
    fn csv_round_trip_is_exact() {
        let r = ExperimentResult {
            rows: vec![
                row(TrialLabel::Index(0), Outcome::Ok { se: 0.1 + 0.2, residual: 1e-300, iters: 3.0, ms: 0.0 }),
                row(TrialLabel::Index(1), Outcome::Failed("rank-deficient".into())),
                ResultRow { sweep: None, ..row(TrialLabel::Mean, Outcome::Ok { se: 7.25, residual: 0.5, iters: 2.5, ms: 1.75 }) },
            ],
        };
        let text = r.to_csv();
        assert!(text.contains(",error:rank-deficient,,,,48,0"));
        assert_eq!(ExperimentResult::from_csv(&text).unwrap(), r);
    }

    #[test]
    fn schema_mismatches_are_reported() {
        assert_eq!(ExperimentResult::from_csv("a,b\n").unwrap_err().tag(), "schema");
        let bad = format!("{CSV_HEADER}\nx,y,-,0,0,1,0,1,0,1\n");
        assert_eq!(ExperimentResult::from_csv(&bad).unwrap_err().tag(), "schema");
    }

    #[test]
    fn aggregate_skips_failures() {
        let a = row(TrialLabel::Index(0), Outcome::Ok { se: 1.0, residual: 0.0, iters: 1.0, ms: 0.0 });
        let b = row(TrialLabel::Index(1), Outcome::Ok { se: 3.0, residual: 0.0, iters: 1.0, ms: 0.0 });
        let c = row(TrialLabel::Index(2), Outcome::Failed("numerical".into()));
        let [m, s] = aggregate(&[&a, &b, &c]);
        assert_eq!(m.se(), Some(2.0));
        assert!((s.se().unwrap() - 1.0).abs() < 1e-15);
        let [m, _] = aggregate(&[&c]);
        assert_eq!(m.outcome, Outcome::Failed("no-successful-trials".into()));
    }
}
