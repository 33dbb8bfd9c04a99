//! Side-by-side comparison of result files.

use std::collections::BTreeSet;
use std::fmt::Write as _;

use super::results::{ExperimentResult, ResultRow};
use crate::error::{Error, Result};

pub const COMPARE_HEADER: &str =
    "sweep,snr_db,left,right,se_left,se_right,delta_se,phase_shifters_left,switches_left,phase_shifters_right,switches_right";

#[derive(Debug, Clone, PartialEq)]
pub struct CompareRow {
    pub sweep: Option<f64>,
    pub snr_db: f64,
    /// `<file label>:<algorithm>`.
    pub left: String,
    pub right: String,
    pub se_left: f64,
    pub se_right: f64,
    /// `se_left − se_right`.
    pub delta: f64,
    pub bill_left: (usize, usize),
    pub bill_right: (usize, usize),
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct CompareTable {
    pub rows: Vec<CompareRow>,
}

impl CompareTable {
    pub fn to_csv(&self) -> String {
        let mut out = format!("{COMPARE_HEADER}\n");
        for r in &self.rows {
            let sweep = r.sweep.map_or("-".to_string(), |v| v.to_string());
            let _ = writeln!(
                out,
                "{sweep},{},{},{},{},{},{},{},{},{},{}",
                r.snr_db,
                r.left,
                r.right,
                r.se_left,
                r.se_right,
                r.delta,
                r.bill_left.0,
                r.bill_left.1,
                r.bill_right.0,
                r.bill_right.1
            );
        }
        out
    }
}

/// Join every later file against the first on `(sweep, snr)` using mean rows.
///
/// Algorithms present in both files are paired by name; when the files share
/// no algorithm every pair of algorithms is compared.
pub fn compare(inputs: &[(String, ExperimentResult)]) -> Result<CompareTable> {
    let [(base_label, base), others @ ..] = inputs else {
        return Err(Error::InvalidConfig("compare needs at least two result files".into()));
    };
    if others.is_empty() {
        return Err(Error::InvalidConfig("compare needs at least two result files".into()));
    }
    let mut rows = Vec::new();
    for (label, other) in others {
        let keys = |r: &ExperimentResult| -> BTreeSet<(String, String)> {
            r.mean_rows().map(|row| (fmt_key(row.sweep), row.snr_db.to_string())).collect()
        };
        let (kb, ko) = (keys(base), keys(other));
        if kb.intersection(&ko).next().is_none() {
            return Err(Error::Join(format!("`{base_label}` and `{label}` share no (sweep, snr) point")));
        }
        let names = |r: &ExperimentResult| -> Vec<String> {
            let mut seen = Vec::new();
            for row in r.mean_rows() {
                if !seen.contains(&row.algorithm) {
                    seen.push(row.algorithm.clone());
                }
            }
            seen
        };
        let (nb, no) = (names(base), names(other));
        let shared: Vec<&String> = nb.iter().filter(|n| no.contains(n)).collect();
        let pairs: Vec<(&String, &String)> = if shared.is_empty() {
            nb.iter().flat_map(|a| no.iter().map(move |b| (a, b))).collect()
        } else {
            shared.iter().map(|&n| (n, n)).collect()
        };
        for a in base.mean_rows() {
            for (left, right) in pairs.iter().filter(|(l, _)| **l == a.algorithm) {
                let Some(b) = other
                    .mean_rows()
                    .find(|b| b.algorithm == **right && b.sweep == a.sweep && b.snr_db == a.snr_db)
                else {
                    continue;
                };
                let (Some(sa), Some(sb)) = (a.se(), b.se()) else { continue };
                rows.push(CompareRow {
                    sweep: a.sweep,
                    snr_db: a.snr_db,
                    left: format!("{base_label}:{left}"),
                    right: format!("{label}:{right}"),
                    se_left: sa,
                    se_right: sb,
                    delta: sa - sb,
                    bill_left: bill(a),
                    bill_right: bill(b),
                });
            }
        }
    }
    Ok(CompareTable { rows })
}

fn fmt_key(sweep: Option<f64>) -> String {
    sweep.map_or("-".into(), |v| v.to_string())
}

fn bill(r: &ResultRow) -> (usize, usize) {
    (r.phase_shifters, r.switches)
}
