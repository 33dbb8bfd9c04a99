//! Hybrid beamforming data model: configurations, connectivity masks, analog
//! networks for the three hardware implementations, and component counting.

use std::f64::consts::TAU;
use std::fmt;
use std::ops::Range;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{cis, CMat, CVec, C64};

/// How RF chains are wired to antennas.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Mapping {
    Fully,
    Partially,
    /// `η` block-diagonal groups of RF chains and antennas.
    Group(usize),
}

/// Hardware realization of each analog network entry.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Implementation {
    /// One adaptive phase shifter per connection, `|F_RF(i,j)| = 1`.
    Sps,
    /// Two adaptive phase shifters summed per connection, `|F_RF(i,j)| <= 2`.
    Dps,
    /// `n_c` shared fixed phase shifters feeding a switch network.
    Fps { n_c: usize },
}

impl fmt::Display for Mapping {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Mapping::Fully => write!(f, "fully"),
            Mapping::Partially => write!(f, "partially"),
            Mapping::Group(eta) => write!(f, "group{eta}"),
        }
    }
}

impl fmt::Display for Implementation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Implementation::Sps => write!(f, "SPS"),
            Implementation::Dps => write!(f, "DPS"),
            Implementation::Fps { n_c } => write!(f, "FPS{n_c}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HybridConfig {
    pub n_t: usize,
    pub n_r: usize,
    pub users: usize,
    pub subcarriers: usize,
    /// Streams per user per subcarrier.
    pub streams: usize,
    pub n_rf_t: usize,
    pub n_rf_r: usize,
    pub mapping: Mapping,
    pub implementation: Implementation,
}

impl HybridConfig {
    /// Number of columns of the stacked fully digital precoder, `K·N_s·F`.
    pub fn total_streams(&self) -> usize {
        self.users * self.streams * self.subcarriers
    }

    /// Group count implied by the mapping on the transmit side.
    pub fn eta(&self) -> usize {
        match self.mapping {
            Mapping::Fully => 1,
            Mapping::Partially => self.n_rf_t,
            Mapping::Group(eta) => eta,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidConfig(m));
        if [self.n_t, self.n_r, self.users, self.subcarriers, self.streams, self.n_rf_t, self.n_rf_r]
            .contains(&0)
        {
            return bad("all dimensions must be positive".into());
        }
        let ks = self.users * self.streams;
        if !(ks <= self.n_rf_t && self.n_rf_t < self.n_t) {
            return bad(format!(
                "need K·N_s <= N_RF_t < N_t, got {ks} <= {} < {}",
                self.n_rf_t, self.n_t
            ));
        }
        if !(self.streams <= self.n_rf_r && self.n_rf_r <= self.n_r) {
            return bad(format!(
                "need N_s <= N_RF_r <= N_r, got {} <= {} <= {}",
                self.streams, self.n_rf_r, self.n_r
            ));
        }
        if let Mapping::Group(eta) = self.mapping {
            if eta == 0 || self.n_rf_t % eta != 0 || self.n_t % eta != 0 {
                return bad(format!("group count {eta} must divide N_RF_t={} and N_t={}", self.n_rf_t, self.n_t));
            }
        }
        if let Implementation::Fps { n_c } = self.implementation {
            if n_c == 0 {
                return bad("FPS needs at least one fixed phase shifter".into());
            }
        }
        Ok(())
    }
}

/// Split `0..n` into `parts` contiguous ranges whose sizes differ by at most one
/// (larger ranges first).
pub fn contiguous_partition(n: usize, parts: usize) -> Vec<Range<usize>> {
    let base = n / parts;
    let extra = n % parts;
    let mut start = 0;
    (0..parts)
        .map(|p| {
            let len = base + usize::from(p < extra);
            let r = start..start + len;
            start += len;
            r
        })
        .collect()
}

/// Binary connectivity pattern between antennas (rows) and RF chains (columns).
#[derive(Debug, Clone, PartialEq)]
pub struct Connectivity {
    allowed: DMatrix<bool>,
}

impl Connectivity {
    pub fn fully(n_t: usize, n_rf: usize) -> Self {
        Self { allowed: DMatrix::from_element(n_t, n_rf, true) }
    }

    /// `eta` equal contiguous groups; `eta` must divide both dimensions.
    pub fn groups(n_t: usize, n_rf: usize, eta: usize) -> Result<Self> {
        if eta == 0 || n_t % eta != 0 || n_rf % eta != 0 {
            return Err(Error::InvalidConfig(format!(
                "group count {eta} must divide N_t={n_t} and N_RF={n_rf}"
            )));
        }
        Ok(Self::blocks(&contiguous_partition(n_t, eta), &contiguous_partition(n_rf, eta)))
    }

    /// One RF chain per contiguous antenna group, group sizes balanced.
    pub fn partial(n_t: usize, n_rf: usize) -> Result<Self> {
        if n_rf == 0 || n_rf > n_t {
            return Err(Error::InvalidConfig(format!("cannot split {n_t} antennas over {n_rf} chains")));
        }
        Ok(Self::blocks(&contiguous_partition(n_t, n_rf), &contiguous_partition(n_rf, n_rf)))
    }

    pub fn blocks(rows: &[Range<usize>], cols: &[Range<usize>]) -> Self {
        let n_t = rows.last().map_or(0, |r| r.end);
        let n_rf = cols.last().map_or(0, |r| r.end);
        let mut allowed = DMatrix::from_element(n_t, n_rf, false);
        for (r, c) in rows.iter().zip(cols) {
            for i in r.clone() {
                for j in c.clone() {
                    allowed[(i, j)] = true;
                }
            }
        }
        Self { allowed }
    }

    /// Each antenna attached to the single RF chain whose set contains it.
    pub fn from_sets(n_t: usize, sets: &[Vec<usize>]) -> Self {
        let mut allowed = DMatrix::from_element(n_t, sets.len(), false);
        for (j, set) in sets.iter().enumerate() {
            for &i in set {
                allowed[(i, j)] = true;
            }
        }
        Self { allowed }
    }

    pub fn for_config(config: &HybridConfig) -> Result<Self> {
        match config.mapping {
            Mapping::Fully => Ok(Self::fully(config.n_t, config.n_rf_t)),
            Mapping::Partially => Self::partial(config.n_t, config.n_rf_t),
            Mapping::Group(eta) => Self::groups(config.n_t, config.n_rf_t, eta),
        }
    }

    pub fn n_t(&self) -> usize {
        self.allowed.nrows()
    }

    pub fn n_rf(&self) -> usize {
        self.allowed.ncols()
    }

    pub fn allows(&self, antenna: usize, chain: usize) -> bool {
        self.allowed[(antenna, chain)]
    }

    pub fn chains_of(&self, antenna: usize) -> Vec<usize> {
        (0..self.n_rf()).filter(|&j| self.allowed[(antenna, j)]).collect()
    }

    pub fn as_matrix(&self) -> &DMatrix<bool> {
        &self.allowed
    }

    /// Zero every entry of `m` that the mask disallows.
    pub fn apply(&self, m: &mut CMat) {
        for ((z, &ok), _) in m.iter_mut().zip(self.allowed.iter()).zip(0..) {
            if !ok {
                *z = C64::new(0.0, 0.0);
            }
        }
    }
}

/// Normalized fixed phase shifter vector `c = [e^{jθ_1}, …, e^{jθ_Nc}]^T / sqrt(N_c)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhaseBank {
    pub phases: Vec<f64>,
}

impl PhaseBank {
    pub fn new(phases: Vec<f64>) -> Result<Self> {
        if phases.is_empty() {
            return Err(Error::InvalidConfig("phase bank needs at least one phase".into()));
        }
        Ok(Self { phases })
    }

    /// Uniform grid `θ_i = 2π(i−1)/n_c`.
    pub fn uniform(n_c: usize) -> Result<Self> {
        Self::new((0..n_c).map(|i| TAU * i as f64 / n_c as f64).collect())
    }

    pub fn len(&self) -> usize {
        self.phases.len()
    }

    pub fn is_empty(&self) -> bool {
        self.phases.is_empty()
    }

    pub fn vector(&self) -> CVec {
        let s = 1.0 / (self.len() as f64).sqrt();
        CVec::from_iterator(self.len(), self.phases.iter().map(|&t| cis(t) * s))
    }

    /// `C = blkdiag(c, …, c)` with `n_rf` copies; shape `(N_c·n_rf) × n_rf`.
    pub fn block_matrix(&self, n_rf: usize) -> CMat {
        let c = self.vector();
        let n_c = self.len();
        let mut m = CMat::zeros(n_c * n_rf, n_rf);
        for j in 0..n_rf {
            m.view_mut((j * n_c, j), (n_c, 1)).copy_from(&c);
        }
        m
    }
}

/// Binary switch states `S ∈ {0,1}^{N_t × N_c·N_RF}`; column `j·N_c + n`
/// routes fixed phase `n` of RF chain `j`.
#[derive(Debug, Clone, PartialEq)]
pub struct SwitchMatrix {
    pub bits: DMatrix<u8>,
}

impl SwitchMatrix {
    pub fn zeros(n_t: usize, width: usize) -> Self {
        Self { bits: DMatrix::zeros(n_t, width) }
    }

    pub fn to_complex(&self) -> CMat {
        self.bits.map(|b| C64::new(b as f64, 0.0))
    }

    pub fn active(&self) -> usize {
        self.bits.iter().filter(|&&b| b == 1).count()
    }
}

/// Implementation-specific parametrization of the analog matrix.
#[derive(Debug, Clone, PartialEq)]
pub enum AnalogPayload {
    Sps { phases: DMatrix<f64> },
    Dps { first: DMatrix<f64>, second: DMatrix<f64> },
    Fps { switches: SwitchMatrix, bank: PhaseBank },
}

#[derive(Debug, Clone, PartialEq)]
pub struct AnalogNetwork {
    matrix: CMat,
    mask: Connectivity,
    payload: AnalogPayload,
}

/// Tolerance used when checking the DPS amplitude bound and reconstruction.
pub const DPS_TOL: f64 = 1e-12;

impl AnalogNetwork {
    /// Unit-modulus entries `e^{jθ}` on the mask, zero elsewhere.
    pub fn sps(phases: DMatrix<f64>, mask: Connectivity) -> Result<Self> {
        check_shape(phases.shape(), &mask)?;
        let mut phases = phases;
        for (t, &ok) in phases.iter_mut().zip(mask.allowed.iter()) {
            if !ok {
                *t = 0.0;
            }
        }
        let matrix = CMat::from_fn(mask.n_t(), mask.n_rf(), |i, j| {
            if mask.allows(i, j) { cis(phases[(i, j)]) } else { C64::new(0.0, 0.0) }
        });
        Ok(Self { matrix, mask, payload: AnalogPayload::Sps { phases } })
    }

    /// Split every masked entry of `entries` into two unit-modulus terms.
    pub fn dps(entries: &CMat, mask: Connectivity) -> Result<Self> {
        check_shape(entries.shape(), &mask)?;
        let (n_t, n_rf) = entries.shape();
        let mut first = DMatrix::zeros(n_t, n_rf);
        let mut second = DMatrix::zeros(n_t, n_rf);
        let mut matrix = CMat::zeros(n_t, n_rf);
        for i in 0..n_t {
            for j in 0..n_rf {
                if !mask.allows(i, j) {
                    continue;
                }
                let (phi, theta) = crate::dps::phase_split(entries[(i, j)])?;
                first[(i, j)] = phi;
                second[(i, j)] = theta;
                matrix[(i, j)] = cis(phi) + cis(theta);
            }
        }
        Ok(Self { matrix, mask, payload: AnalogPayload::Dps { first, second } })
    }

    /// `F_RF = S·C`; switch bits outside the mask are cleared first.
    pub fn fps(switches: SwitchMatrix, bank: PhaseBank, mask: Connectivity) -> Result<Self> {
        let n_c = bank.len();
        if switches.bits.nrows() != mask.n_t() || switches.bits.ncols() != n_c * mask.n_rf() {
            return Err(Error::DimensionMismatch(format!(
                "switch matrix {:?} does not fit N_t={} × N_c·N_RF={}",
                switches.bits.shape(),
                mask.n_t(),
                n_c * mask.n_rf()
            )));
        }
        let mut switches = switches;
        for i in 0..mask.n_t() {
            for j in 0..mask.n_rf() {
                if !mask.allows(i, j) {
                    for n in 0..n_c {
                        switches.bits[(i, j * n_c + n)] = 0;
                    }
                }
            }
        }
        let matrix = switches.to_complex() * bank.block_matrix(mask.n_rf());
        Ok(Self { matrix, mask, payload: AnalogPayload::Fps { switches, bank } })
    }

    pub fn matrix(&self) -> &CMat {
        &self.matrix
    }

    pub fn mask(&self) -> &Connectivity {
        &self.mask
    }

    pub fn payload(&self) -> &AnalogPayload {
        &self.payload
    }

    pub fn n_t(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn n_rf(&self) -> usize {
        self.matrix.ncols()
    }

    /// Verify mask discipline and the implementation's entry constraints.
    pub fn check(&self) -> Result<()> {
        let viol = |m: String| Err(Error::Numerical(m));
        for i in 0..self.n_t() {
            for j in 0..self.n_rf() {
                let z = self.matrix[(i, j)];
                if !self.mask.allows(i, j) {
                    if z != C64::new(0.0, 0.0) {
                        return viol(format!("entry ({i},{j}) outside the mask is nonzero"));
                    }
                    continue;
                }
                match &self.payload {
                    AnalogPayload::Sps { .. } => {
                        if (z.norm() - 1.0).abs() > 1e-12 {
                            return viol(format!("SPS entry ({i},{j}) has modulus {}", z.norm()));
                        }
                    }
                    AnalogPayload::Dps { first, second } => {
                        let sum = cis(first[(i, j)]) + cis(second[(i, j)]);
                        if z.norm() > 2.0 + DPS_TOL || (sum - z).norm() > DPS_TOL {
                            return viol(format!("DPS entry ({i},{j}) is not a valid phase pair"));
                        }
                    }
                    AnalogPayload::Fps { .. } => {}
                }
            }
        }
        if let AnalogPayload::Fps { switches, bank } = &self.payload {
            if switches.bits.iter().any(|&b| b > 1) {
                return viol("switch matrix is not binary".into());
            }
            let sc = switches.to_complex() * bank.block_matrix(self.n_rf());
            if crate::linalg::max_abs(&(sc - &self.matrix)) > 1e-15 {
                return viol("FPS matrix differs from S·C".into());
            }
        }
        Ok(())
    }
}

fn check_shape(shape: (usize, usize), mask: &Connectivity) -> Result<()> {
    if shape != (mask.n_t(), mask.n_rf()) {
        return Err(Error::DimensionMismatch(format!(
            "analog matrix {shape:?} does not match mask {:?}",
            (mask.n_t(), mask.n_rf())
        )));
    }
    Ok(())
}

/// An analog network and the stacked digital matrix it feeds.
#[derive(Debug, Clone, PartialEq)]
pub struct BeamformerPair {
    pub analog: AnalogNetwork,
    pub digital: CMat,
}

impl BeamformerPair {
    pub fn new(analog: AnalogNetwork, digital: CMat) -> Result<Self> {
        if analog.n_rf() != digital.nrows() {
            return Err(Error::DimensionMismatch(format!(
                "analog has {} RF chains but digital has {} rows",
                analog.n_rf(),
                digital.nrows()
            )));
        }
        Ok(Self { analog, digital })
    }

    pub fn product(&self) -> CMat {
        self.analog.matrix() * &self.digital
    }

    /// Columns of the product belonging to one `(user, subcarrier)` block.
    pub fn block(&self, index: usize, width: usize) -> CMat {
        self.analog.matrix() * self.digital.columns(index * width, width)
    }
}

/// Solver output: the designed pair plus convergence diagnostics.
#[derive(Debug, Clone, PartialEq)]
pub struct Design {
    pub pair: BeamformerPair,
    /// Squared approximation residual after each iteration, when iterative.
    pub trace: Vec<f64>,
    pub iterations: usize,
    /// Non-fatal conditions worth surfacing, e.g. a repeated OMP atom.
    pub flags: Vec<String>,
}

impl Design {
    pub fn one_shot(pair: BeamformerPair) -> Self {
        Self { pair, trace: Vec::new(), iterations: 1, flags: Vec::new() }
    }
}

/// Analog network component counts.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct HardwareBill {
    pub phase_shifters: usize,
    pub switches: usize,
    pub rf_chains: usize,
}

/// Transmit-side component counts for a configuration.
pub fn hardware_bill(config: &HybridConfig) -> HardwareBill {
    let n_t = config.n_t;
    let n_rf = config.n_rf_t;
    // Connections per antenna: all chains, chains of one group, or one chain.
    let connections = match config.mapping {
        Mapping::Fully => n_rf * n_t,
        Mapping::Partially => n_t,
        Mapping::Group(eta) => n_rf * n_t / eta,
    };
    let (phase_shifters, switches) = match config.implementation {
        Implementation::Sps => (connections, 0),
        Implementation::Dps => (2 * connections, 0),
        Implementation::Fps { n_c } => (n_c, n_c * connections),
    };
    HardwareBill { phase_shifters, switches, rf_chains: n_rf }
}

/// Fully digital transmitters need no analog network.
pub fn digital_bill(config: &HybridConfig) -> HardwareBill {
    HardwareBill { phase_shifters: 0, switches: 0, rf_chains: config.n_t }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::FRAC_PI_2;

    fn cfg(n_t: usize, n_rf: usize, mapping: Mapping, implementation: Implementation) -> HybridConfig {
        HybridConfig {
            n_t,
            n_r: 16,
            users: 1,
            subcarriers: 1,
            streams: 1,
            n_rf_t: n_rf,
            n_rf_r: 2,
            mapping,
            implementation,
        }
    }

    #[test]
    fn quoted_phase_shifter_counts() {
        let sps = hardware_bill(&cfg(144, 8, Mapping::Fully, Implementation::Sps));
        let dps = hardware_bill(&cfg(144, 8, Mapping::Fully, Implementation::Dps));
        assert_eq!(sps.phase_shifters, 1152);
        assert_eq!(dps.phase_shifters, 2304);
        assert_eq!(sps.switches + dps.switches, 0);
    }

    #[test]
    fn table_formulas() {
        let b = hardware_bill(&cfg(64, 4, Mapping::Group(2), Implementation::Fps { n_c: 10 }));
        assert_eq!((b.phase_shifters, b.switches, b.rf_chains), (10, 1280, 4));
        let b = hardware_bill(&cfg(64, 4, Mapping::Fully, Implementation::Fps { n_c: 10 }));
        assert_eq!((b.phase_shifters, b.switches), (10, 2560));
        assert_eq!(hardware_bill(&cfg(64, 4, Mapping::Partially, Implementation::Sps)).phase_shifters, 64);
        assert_eq!(hardware_bill(&cfg(64, 4, Mapping::Partially, Implementation::Dps)).phase_shifters, 128);
        assert_eq!(hardware_bill(&cfg(64, 4, Mapping::Group(2), Implementation::Sps)).phase_shifters, 128);
        // Group with η = N_RF is the partially-connected count.
        assert_eq!(
            hardware_bill(&cfg(64, 4, Mapping::Group(4), Implementation::Fps { n_c: 3 })),
            hardware_bill(&cfg(64, 4, Mapping::Partially, Implementation::Fps { n_c: 3 }))
        );
    }

    #[test]
    fn config_invariants() {
        let mut c = cfg(32, 4, Mapping::Group(2), Implementation::Sps);
        c.streams = 2;
        c.users = 2;
        assert!(c.validate().is_ok());
        c.users = 3;
        assert!(c.validate().is_err());
        c.users = 2;
        c.mapping = Mapping::Group(3);
        assert!(c.validate().is_err());
        c.mapping = Mapping::Fully;
        c.n_rf_t = 32;
        assert!(c.validate().is_err());
        c.n_rf_t = 4;
        c.implementation = Implementation::Fps { n_c: 0 };
        assert!(c.validate().is_err());
    }

    #[test]
    fn partition_is_balanced() {
        let p = contiguous_partition(32, 3);
        assert_eq!(p, vec![0..11, 11..22, 22..32]);
        assert_eq!(contiguous_partition(8, 4), vec![0..2, 2..4, 4..6, 6..8]);
    }

    #[test]
    fn group_equals_partial_at_eta_nrf() {
        let g = Connectivity::groups(16, 4, 4).unwrap();
        let p = Connectivity::partial(16, 4).unwrap();
        assert_eq!(g, p);
        assert_eq!(Connectivity::groups(16, 4, 1).unwrap(), Connectivity::fully(16, 4));
    }

    #[test]
    fn bank_vector_has_unit_norm() {
        assert_eq!(PhaseBank::uniform(1).unwrap().phases, vec![0.0]);
        let q = PhaseBank::uniform(4).unwrap().phases;
        for (got, want) in q.iter().zip([0.0, FRAC_PI_2, std::f64::consts::PI, 3.0 * FRAC_PI_2]) {
            assert!((got - want).abs() < 1e-15);
        }
        let c = PhaseBank::uniform(10).unwrap().vector();
        assert!((c.norm() - 1.0).abs() < 1e-15);
        let big = PhaseBank::uniform(3).unwrap().block_matrix(2);
        assert_eq!(big.shape(), (6, 2));
        assert_eq!(big[(3, 0)], C64::new(0.0, 0.0));
    }

    #[test]
    fn sps_network_respects_mask() {
        let mask = Connectivity::partial(6, 2).unwrap();
        let phases = DMatrix::from_fn(6, 2, |i, j| (i + 3 * j) as f64);
        let net = AnalogNetwork::sps(phases, mask).unwrap();
        net.check().unwrap();
        assert_eq!(net.matrix()[(0, 1)], C64::new(0.0, 0.0));
        assert!((net.matrix()[(4, 1)].norm() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn fps_network_is_switch_times_bank() {
        let bank = PhaseBank::uniform(3).unwrap();
        let mut s = SwitchMatrix::zeros(4, 6);
        s.bits[(0, 0)] = 1;
        s.bits[(0, 4)] = 1;
        s.bits[(3, 2)] = 1;
        s.bits[(3, 5)] = 1;
        let net = AnalogNetwork::fps(s, bank.clone(), Connectivity::groups(4, 2, 2).unwrap()).unwrap();
        net.check().unwrap();
        // Row 0 belongs to group 0, so the chain-1 switch is cleared.
        assert_eq!(net.matrix()[(0, 1)], C64::new(0.0, 0.0));
        let c = bank.vector();
        assert!((net.matrix()[(3, 1)] - c[2]).norm() < 1e-15);
        assert_eq!(net.matrix()[(3, 0)], C64::new(0.0, 0.0));
    }
}
