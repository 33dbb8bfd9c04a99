//! Hybrid analog/digital beamforming for mm-wave MIMO.
//!
//! The crate designs an analog network `F_RF` and a digital matrix `F_BB`
//! whose product approximates a fully digital beamformer, for three hardware
//! implementations (single phase shifters, double phase shifters, fixed phase
//! shifters with switches) and three mappings (fully, partially and group
//! connected). A Monte-Carlo harness evaluates designs by spectral efficiency
//! over clustered channels.

pub mod channel;
pub mod digital;
pub mod dps;
mod error;
pub mod fps;
pub mod group;
pub mod harness;
pub mod linalg;
pub mod metrics;
pub mod model;
pub mod random;
pub mod sps;

pub use channel::{
    array_response, generate_channels, generate_channels_capped, ArrayGeometry, ArrayKind, ChannelParams,
    ChannelSet, Path,
};
pub use digital::{fully_digital_beamformer, fully_digital_combiners};
pub use dps::{
    dps_full_solve, dps_partial_solve, dynamic_mapping_greedy, dynamic_mapping_kmeans, phase_split, MappingSets,
};
pub use error::{Error, Result};
pub use fps::{fps_altmin, fps_saturation_sweep, FpsProblem};
pub use group::{group_connected_solve, InnerSolver};
pub use linalg::{CMat, CVec, C64};
pub use metrics::{approximation_residual, power_normalize, spectral_efficiency, spectral_efficiency_hybrid, SpectralEfficiency};
pub use model::{
    hardware_bill, AnalogNetwork, AnalogPayload, BeamformerPair, Connectivity, Design, HardwareBill, HybridConfig,
    Implementation, Mapping, PhaseBank, SwitchMatrix,
};
pub use sps::{mo_altmin, omp_hybrid, pe_relaxation, sps_partial_altmin, AltMinOptions, OmpCodebook};
