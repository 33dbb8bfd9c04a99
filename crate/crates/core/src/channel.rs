//! Antenna array responses and clustered mm-wave channel realizations.
//!
//! Each delay tap carries a subset of the clusters (assigned round-robin),
//! and every cluster contributes `n_rays` rays with complex Gaussian gains and
//! Laplacian angular offsets around a uniformly drawn center. Frequency-domain
//! matrices follow from the taps by a length-`F` DFT.

use std::f64::consts::{PI, TAU};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{cis, CMat, CVec, C64};
use crate::random::{complex_gaussian, laplacian};

/// Cap on the total number of complex entries a single `ChannelSet` may hold.
pub const DEFAULT_ELEMENT_CAP: u128 = 1 << 28;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum ArrayKind {
    Linear,
    Planar { rows: usize, cols: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ArrayGeometry {
    pub kind: ArrayKind,
    pub count: usize,
    /// Element spacing in wavelengths.
    pub spacing: f64,
}

impl ArrayGeometry {
    pub fn linear(count: usize) -> Self {
        Self { kind: ArrayKind::Linear, count, spacing: 0.5 }
    }

    pub fn planar(rows: usize, cols: usize) -> Self {
        Self { kind: ArrayKind::Planar { rows, cols }, count: rows * cols, spacing: 0.5 }
    }

    pub fn with_spacing(mut self, spacing: f64) -> Self {
        self.spacing = spacing;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.count == 0 {
            return Err(Error::InvalidConfig("array needs at least one antenna".into()));
        }
        if !(self.spacing > 0.0) || !self.spacing.is_finite() {
            return Err(Error::InvalidConfig(format!("array spacing {} must be positive", self.spacing)));
        }
        if let ArrayKind::Planar { rows, cols } = self.kind {
            if rows * cols != self.count {
                return Err(Error::InvalidConfig(format!(
                    "planar dims {rows}x{cols} do not multiply to {}",
                    self.count
                )));
            }
        }
        Ok(())
    }
}

fn linear_steering(count: usize, spacing: f64, angle: f64) -> impl Iterator<Item = C64> {
    let step = TAU * spacing * angle.sin();
    (0..count).map(move |n| cis(step * n as f64))
}

/// Unit-norm far-field steering vector.
///
/// Linear arrays use phase `2π·spacing·n·sin(azimuth)`; planar arrays are the
/// Kronecker product of a row-axis vector steered by azimuth and a column-axis
/// vector steered by elevation. Elevation is ignored for linear arrays.
pub fn array_response(geometry: &ArrayGeometry, azimuth: f64, elevation: f64) -> CVec {
    let scale = 1.0 / (geometry.count as f64).sqrt();
    match geometry.kind {
        ArrayKind::Linear => CVec::from_iterator(
            geometry.count,
            linear_steering(geometry.count, geometry.spacing, azimuth).map(|z| z * scale),
        ),
        ArrayKind::Planar { rows, cols } => {
            let a: Vec<C64> = linear_steering(rows, geometry.spacing, azimuth).collect();
            let e: Vec<C64> = linear_steering(cols, geometry.spacing, elevation).collect();
            CVec::from_iterator(
                geometry.count,
                a.iter().flat_map(|&x| e.iter().map(move |&y| x * y * scale)),
            )
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChannelParams {
    pub n_clusters: usize,
    pub n_rays: usize,
    /// Per-ray angular spread around the cluster center, in degrees.
    pub angle_spread_deg: f64,
    pub subcarriers: usize,
    pub delay_taps: usize,
    pub seed: u64,
}

impl Default for ChannelParams {
    fn default() -> Self {
        Self { n_clusters: 5, n_rays: 10, angle_spread_deg: 10.0, subcarriers: 1, delay_taps: 1, seed: 0 }
    }
}

impl ChannelParams {
    pub fn validate(&self) -> Result<()> {
        if self.n_clusters == 0 || self.n_rays == 0 {
            return Err(Error::InvalidConfig("need at least one cluster and one ray".into()));
        }
        if self.subcarriers == 0 || self.delay_taps == 0 || self.delay_taps > self.subcarriers {
            return Err(Error::InvalidConfig(format!(
                "delay taps must satisfy 1 <= D <= F (D={}, F={})",
                self.delay_taps, self.subcarriers
            )));
        }
        if !(self.angle_spread_deg >= 0.0) {
            return Err(Error::InvalidConfig("angle spread must be nonnegative".into()));
        }
        Ok(())
    }
}

/// One propagation path of one user.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Path {
    pub tap: usize,
    pub gain: C64,
    pub aod_azimuth: f64,
    pub aod_elevation: f64,
    pub aoa_azimuth: f64,
    pub aoa_elevation: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ChannelSet {
    /// `matrices[k][f]` is the `N_r × N_t` channel of user `k` on subcarrier `f`.
    pub matrices: Vec<Vec<CMat>>,
    pub paths: Vec<Vec<Path>>,
    pub params: ChannelParams,
    pub tx: ArrayGeometry,
    pub rx: ArrayGeometry,
}

impl ChannelSet {
    pub fn users(&self) -> usize {
        self.matrices.len()
    }

    pub fn subcarriers(&self) -> usize {
        self.params.subcarriers
    }

    pub fn n_t(&self) -> usize {
        self.tx.count
    }

    pub fn n_r(&self) -> usize {
        self.rx.count
    }

    pub fn get(&self, user: usize, subcarrier: usize) -> &CMat {
        &self.matrices[user][subcarrier]
    }

    /// Build a channel set directly from matrices, without path metadata.
    pub fn from_matrices(matrices: Vec<Vec<CMat>>) -> Result<Self> {
        let first = matrices
            .first()
            .and_then(|m| m.first())
            .ok_or_else(|| Error::InvalidConfig("empty channel set".into()))?;
        let (n_r, n_t) = first.shape();
        let f = matrices[0].len();
        for user in &matrices {
            if user.len() != f || user.iter().any(|h| h.shape() != (n_r, n_t)) {
                return Err(Error::DimensionMismatch("inconsistent channel matrix shapes".into()));
            }
        }
        Ok(Self {
            paths: vec![Vec::new(); matrices.len()],
            params: ChannelParams { subcarriers: f, delay_taps: 1, ..ChannelParams::default() },
            tx: ArrayGeometry::linear(n_t),
            rx: ArrayGeometry::linear(n_r),
            matrices,
        })
    }

    /// Transmit array responses of every path of every user, as columns.
    pub fn tx_responses(&self) -> Vec<CVec> {
        self.paths
            .iter()
            .flatten()
            .map(|p| array_response(&self.tx, p.aod_azimuth, p.aod_elevation))
            .collect()
    }

    /// Receive array responses of one user's paths.
    pub fn rx_responses(&self, user: usize) -> Vec<CVec> {
        self.paths[user]
            .iter()
            .map(|p| array_response(&self.rx, p.aoa_azimuth, p.aoa_elevation))
            .collect()
    }
}

/// Draw a clustered channel for `users` users, deterministic in `params.seed`.
pub fn generate_channels(
    params: &ChannelParams,
    tx: &ArrayGeometry,
    rx: &ArrayGeometry,
    users: usize,
) -> Result<ChannelSet> {
    generate_channels_capped(params, tx, rx, users, DEFAULT_ELEMENT_CAP)
}

pub fn generate_channels_capped(
    params: &ChannelParams,
    tx: &ArrayGeometry,
    rx: &ArrayGeometry,
    users: usize,
    cap: u128,
) -> Result<ChannelSet> {
    params.validate()?;
    tx.validate()?;
    rx.validate()?;
    if users == 0 {
        return Err(Error::InvalidConfig("need at least one user".into()));
    }
    let elements = tx.count as u128 * rx.count as u128 * users as u128 * params.subcarriers as u128;
    if elements > cap {
        return Err(Error::DimensionOverflow { elements, cap });
    }

    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let n_paths = params.n_clusters * params.n_rays;
    let gamma = ((tx.count * rx.count) as f64 / n_paths as f64).sqrt();
    let spread = params.angle_spread_deg.to_radians();
    let taps = params.delay_taps;
    let f_count = params.subcarriers;

    let mut matrices = Vec::with_capacity(users);
    let mut all_paths = Vec::with_capacity(users);
    for _ in 0..users {
        let mut tap_mats = vec![CMat::zeros(rx.count, tx.count); taps];
        let mut paths = Vec::with_capacity(n_paths);
        for cluster in 0..params.n_clusters {
            let tap = cluster % taps;
            let aod_c = rng.random::<f64>() * TAU;
            let aoa_c = rng.random::<f64>() * TAU;
            let eod_c = rng.random::<f64>() * TAU;
            let eoa_c = rng.random::<f64>() * TAU;
            for _ in 0..params.n_rays {
                let path = Path {
                    tap,
                    gain: complex_gaussian(&mut rng),
                    aod_azimuth: aod_c + laplacian(&mut rng, spread),
                    aoa_azimuth: aoa_c + laplacian(&mut rng, spread),
                    aod_elevation: eod_c + laplacian(&mut rng, spread),
                    aoa_elevation: eoa_c + laplacian(&mut rng, spread),
                };
                let a_t = array_response(tx, path.aod_azimuth, path.aod_elevation);
                let a_r = array_response(rx, path.aoa_azimuth, path.aoa_elevation);
                tap_mats[tap] += (a_r * a_t.adjoint()) * (path.gain * gamma);
                paths.push(path);
            }
        }
        let per_carrier: Vec<CMat> = if taps == 1 {
            vec![tap_mats[0].clone(); f_count]
        } else {
            (0..f_count)
                .map(|f| {
                    tap_mats.iter().enumerate().fold(CMat::zeros(rx.count, tx.count), |acc, (d, h)| {
                        acc + h * cis(-2.0 * PI * (f * d) as f64 / f_count as f64)
                    })
                })
                .collect()
        };
        matrices.push(per_carrier);
        all_paths.push(paths);
    }

    Ok(ChannelSet { matrices, paths: all_paths, params: params.clone(), tx: *tx, rx: *rx })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{frob_sq, singular_values};

    #[test]
    fn single_antenna_response_is_one() {
        let v = array_response(&ArrayGeometry::linear(1), 0.7, 0.0);
        assert_eq!(v.len(), 1);
        assert!((v[0] - C64::new(1.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn broadside_has_no_phase_progression() {
        let v = array_response(&ArrayGeometry::linear(4), 0.0, 0.0);
        for z in v.iter() {
            assert!((z - C64::new(0.5, 0.0)).norm() < 1e-15);
        }
    }

    #[test]
    fn endfire_half_wavelength_pair_is_antiphase() {
        let v = array_response(&ArrayGeometry::linear(2), PI / 2.0, 0.0);
        // Phase step 2π·0.5·sin(π/2) = π.
        let ratio = v[1] / v[0];
        assert!((ratio - C64::new(-1.0, 0.0)).norm() < 1e-12);
        assert!((v.norm() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn planar_response_is_unit_norm_kronecker() {
        let g = ArrayGeometry::planar(3, 4);
        let v = array_response(&g, 0.3, -1.1);
        assert_eq!(v.len(), 12);
        assert!((v.norm() - 1.0).abs() < 1e-14);
        let a = array_response(&ArrayGeometry::linear(3), 0.3, 0.0);
        let e = array_response(&ArrayGeometry::linear(4), -1.1, 0.0);
        let kron = a.kronecker(&e);
        assert!((kron - v).norm() < 1e-14);
    }

    #[test]
    fn invalid_geometries_are_rejected() {
        assert!(ArrayGeometry::linear(0).validate().is_err());
        assert!(ArrayGeometry::linear(4).with_spacing(0.0).validate().is_err());
        let bad = ArrayGeometry { kind: ArrayKind::Planar { rows: 2, cols: 3 }, count: 7, spacing: 0.5 };
        assert!(bad.validate().is_err());
    }

    #[test]
    fn flat_fading_carriers_are_identical() {
        let params = ChannelParams { subcarriers: 4, delay_taps: 1, seed: 9, ..Default::default() };
        let set = generate_channels(&params, &ArrayGeometry::linear(8), &ArrayGeometry::linear(2), 2).unwrap();
        for user in &set.matrices {
            for h in &user[1..] {
                assert_eq!(h, &user[0]);
            }
        }
    }

    #[test]
    fn same_seed_same_channels() {
        let params = ChannelParams { subcarriers: 4, delay_taps: 2, seed: 77, ..Default::default() };
        let tx = ArrayGeometry::linear(8);
        let rx = ArrayGeometry::linear(4);
        let a = generate_channels(&params, &tx, &rx, 3).unwrap();
        let b = generate_channels(&params, &tx, &rx, 3).unwrap();
        assert_eq!(a, b);
        let c = generate_channels(&ChannelParams { seed: 78, ..params }, &tx, &rx, 3).unwrap();
        assert_ne!(a.matrices, c.matrices);
    }

    #[test]
    fn frequency_selective_channels_follow_tap_dft() {
        let params = ChannelParams { n_clusters: 2, n_rays: 1, subcarriers: 4, delay_taps: 2, seed: 5, ..Default::default() };
        let tx = ArrayGeometry::linear(4);
        let rx = ArrayGeometry::linear(2);
        let set = generate_channels(&params, &tx, &rx, 1).unwrap();
        let gamma = (8.0f64 / 2.0).sqrt();
        let taps: Vec<CMat> = (0..2)
            .map(|d| {
                let p = &set.paths[0][d];
                assert_eq!(p.tap, d);
                array_response(&rx, p.aoa_azimuth, p.aoa_elevation)
                    * array_response(&tx, p.aod_azimuth, p.aod_elevation).adjoint()
                    * (p.gain * gamma)
            })
            .collect();
        for f in 0..4 {
            let expect = &taps[0] + &taps[1] * cis(-2.0 * PI * f as f64 / 4.0);
            assert!((expect - set.get(0, f)).norm() < 1e-12);
        }
        assert!((set.get(0, 0) - set.get(0, 1)).norm() > 1e-6);
    }

    #[test]
    fn invalid_tap_count_rejected() {
        let params = ChannelParams { subcarriers: 2, delay_taps: 3, ..Default::default() };
        let g = ArrayGeometry::linear(4);
        assert!(matches!(generate_channels(&params, &g, &g, 1), Err(Error::InvalidConfig(_))));
    }

    #[test]
    fn dimension_guard_trips() {
        let params = ChannelParams { subcarriers: 8, ..Default::default() };
        let g = ArrayGeometry::linear(16);
        let err = generate_channels_capped(&params, &g, &g, 4, 1000).unwrap_err();
        assert!(matches!(err, Error::DimensionOverflow { elements: 8192, cap: 1000 }));
    }

    #[test]
    fn path_rich_channels_are_full_rank() {
        let tx = ArrayGeometry::linear(16);
        let rx = ArrayGeometry::linear(4);
        for seed in 0..20 {
            let params = ChannelParams { seed, ..Default::default() };
            let set = generate_channels(&params, &tx, &rx, 1).unwrap();
            let s = singular_values(set.get(0, 0)).unwrap();
            assert!(*s.last().unwrap() > 1e-10, "seed {seed}: {s:?}");
        }
    }

    #[test]
    fn mean_energy_matches_normalization() {
        // Monte Carlo check of E‖H‖_F² = N_t·N_r on the 64×16 setup.
        let tx = ArrayGeometry::linear(64);
        let rx = ArrayGeometry::linear(16);
        let draws = 10_000;
        let total: f64 = (0..draws)
            .map(|seed| {
                let params = ChannelParams { seed, ..Default::default() };
                frob_sq(generate_channels(&params, &tx, &rx, 1).unwrap().get(0, 0))
            })
            .sum();
        let mean = total / draws as f64;
        assert!((mean - 1024.0).abs() < 0.05 * 1024.0, "mean {mean}");
    }
}
