//! Dynamic antenna-to-RF-chain mapping for the partially-connected DPS
//! structure: choose disjoint sets `D_j` covering all antennas to maximize
//! `Σ_j λ_1(Σ_{i∈D_j} y_i y_i^H)`.

use serde::{Deserialize, Serialize};

use super::partial::{gather_rows, group_fit};
use crate::error::{Error, Result};
use crate::linalg::{CMat, CVec};
use crate::model::contiguous_partition;

/// Disjoint antenna index sets, one per RF chain.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MappingSets {
    sets: Vec<Vec<usize>>,
}

impl MappingSets {
    /// Sets are stored sorted; each must be nonempty.
    pub fn new(mut sets: Vec<Vec<usize>>) -> Result<Self> {
        for (j, s) in sets.iter_mut().enumerate() {
            if s.is_empty() {
                return Err(Error::EmptyGroup(j));
            }
            s.sort_unstable();
        }
        Ok(Self { sets })
    }

    /// Contiguous balanced groups, the fixed partially-connected mapping.
    pub fn fixed(n_t: usize, n_rf: usize) -> Result<Self> {
        if n_rf == 0 || n_rf > n_t {
            return Err(Error::InvalidConfig(format!("cannot map {n_t} antennas onto {n_rf} chains")));
        }
        Self::new(contiguous_partition(n_t, n_rf).into_iter().map(|r| r.collect()).collect())
    }

    pub fn sets(&self) -> &[Vec<usize>] {
        &self.sets
    }

    /// Check the sets partition `0..n_t`.
    pub fn validate(&self, n_t: usize) -> Result<()> {
        let mut seen = vec![false; n_t];
        for (j, set) in self.sets.iter().enumerate() {
            if set.is_empty() {
                return Err(Error::EmptyGroup(j));
            }
            for &i in set {
                if i >= n_t || seen[i] {
                    return Err(Error::InvalidConfig(format!("antenna {i} is out of range or mapped twice")));
                }
                seen[i] = true;
            }
        }
        if let Some(i) = seen.iter().position(|&s| !s) {
            return Err(Error::InvalidConfig(format!("antenna {i} is not mapped")));
        }
        Ok(())
    }

    /// Chain index of every antenna.
    pub fn owners(&self, n_t: usize) -> Vec<usize> {
        let mut owner = vec![usize::MAX; n_t];
        for (j, set) in self.sets.iter().enumerate() {
            for &i in set {
                owner[i] = j;
            }
        }
        owner
    }

    fn from_owners(owner: &[usize], n_rf: usize) -> Self {
        let mut sets = vec![Vec::new(); n_rf];
        for (i, &j) in owner.iter().enumerate() {
            sets[j].push(i);
        }
        Self { sets }
    }
}

fn set_energy(f_opt: &CMat, set: &[usize]) -> Result<f64> {
    Ok(group_fit(&gather_rows(f_opt, set))?.energy)
}

/// `Σ_j λ_1(Σ_{i∈D_j} y_i y_i^H)` where `y_i` is row `i` of `f_opt`, transposed.
pub fn mapping_objective(f_opt: &CMat, mapping: &MappingSets) -> Result<f64> {
    mapping.sets().iter().map(|s| set_energy(f_opt, s)).sum()
}

fn by_descending_norm(f_opt: &CMat) -> Vec<usize> {
    let norms: Vec<f64> = f_opt.row_iter().map(|r| r.norm_squared()).collect();
    let mut order: Vec<usize> = (0..f_opt.nrows()).collect();
    order.sort_by(|&a, &b| norms[b].total_cmp(&norms[a]).then(a.cmp(&b)));
    order
}

/// Greedy dynamic mapping.
///
/// The `n_rf` largest-norm rows seed one set each; the remaining rows, in
/// descending norm order, join the set whose top eigenvalue grows the most
/// (lowest chain index on ties). If the fixed contiguous mapping scores
/// higher on this instance it is returned instead.
pub fn dynamic_mapping_greedy(f_opt: &CMat, n_rf: usize) -> Result<MappingSets> {
    let n_t = f_opt.nrows();
    let fixed = MappingSets::fixed(n_t, n_rf)?;
    let order = by_descending_norm(f_opt);
    let mut sets: Vec<Vec<usize>> = order[..n_rf].iter().map(|&i| vec![i]).collect();
    let mut energy: Vec<f64> = sets.iter().map(|s| set_energy(f_opt, s)).collect::<Result<_>>()?;
    for &i in &order[n_rf..] {
        let mut best = (f64::NEG_INFINITY, 0, 0.0);
        for (j, set) in sets.iter().enumerate() {
            let mut trial = set.clone();
            trial.push(i);
            let e = set_energy(f_opt, &trial)?;
            let gain = e - energy[j];
            if gain > best.0 {
                best = (gain, j, e);
            }
        }
        sets[best.1].push(i);
        energy[best.1] = best.2;
    }
    let greedy = MappingSets::new(sets)?;
    if mapping_objective(f_opt, &fixed)? > mapping_objective(f_opt, &greedy)? {
        return Ok(fixed);
    }
    Ok(greedy)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KmeansOptions {
    pub max_sweeps: usize,
}

impl Default for KmeansOptions {
    fn default() -> Self {
        Self { max_sweeps: 100 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct KmeansOutcome {
    pub mapping: MappingSets,
    /// Objective before the first sweep and after every sweep.
    pub trace: Vec<f64>,
    pub sweeps: usize,
}

/// Modified K-means dynamic mapping, warm-started from the greedy mapping.
///
/// Centroids are the principal eigenvectors of each set's outer-product sum;
/// each row moves to the centroid maximizing `|y_i^H x_j|²`, staying put on
/// ties. A set left empty is refilled with the worst-fitting row of a set
/// that can spare one. The objective never decreases.
pub fn dynamic_mapping_kmeans(f_opt: &CMat, n_rf: usize, opts: &KmeansOptions) -> Result<KmeansOutcome> {
    let start = dynamic_mapping_greedy(f_opt, n_rf)?;
    kmeans_from(f_opt, start, opts)
}

pub fn kmeans_from(f_opt: &CMat, start: MappingSets, opts: &KmeansOptions) -> Result<KmeansOutcome> {
    let n_t = f_opt.nrows();
    start.validate(n_t)?;
    let n_rf = start.sets().len();
    let mut current = start;
    let mut objective = mapping_objective(f_opt, &current)?;
    let mut trace = vec![objective];
    let mut sweeps = 0;
    while sweeps < opts.max_sweeps {
        sweeps += 1;
        // Right singular direction per set; |y_i^H x_j|² = |row_i · v_j|².
        let centroids: Vec<CVec> = current
            .sets()
            .iter()
            .map(|s| group_fit(&gather_rows(f_opt, s)).map(|fit| fit.direction.adjoint()))
            .collect::<Result<_>>()?;
        let owner = current.owners(n_t);
        let mut next = owner.clone();
        let mut fit = vec![0.0; n_t];
        for i in 0..n_t {
            let row = f_opt.row(i);
            let score = |j: usize| (&row * &centroids[j])[(0, 0)].norm_sqr();
            let mut best = owner[i];
            let mut best_score = score(best);
            for j in 0..n_rf {
                let s = score(j);
                if s > best_score {
                    best = j;
                    best_score = s;
                }
            }
            next[i] = best;
            fit[i] = best_score;
        }
        refill_empty(&mut next, &fit, n_rf);
        if next == owner {
            break;
        }
        let candidate = MappingSets::from_owners(&next, n_rf);
        let value = mapping_objective(f_opt, &candidate)?;
        if value < objective {
            // Only reachable through rounding; keep the better partition.
            break;
        }
        current = candidate;
        objective = value;
        trace.push(objective);
    }
    Ok(KmeansOutcome { mapping: current, trace, sweeps })
}

fn refill_empty(owner: &mut [usize], fit: &[f64], n_rf: usize) {
    loop {
        let mut counts = vec![0usize; n_rf];
        for &j in owner.iter() {
            counts[j] += 1;
        }
        let Some(empty) = counts.iter().position(|&c| c == 0) else { return };
        let worst = (0..owner.len())
            .filter(|&i| counts[owner[i]] > 1)
            .min_by(|&a, &b| fit[a].total_cmp(&fit[b]).then(a.cmp(&b)));
        match worst {
            Some(i) => owner[i] = empty,
            None => return,
        }
    }
}
