//! Double-phase-shifter designs: every analog entry is the sum of two
//! unit-modulus phase shifter outputs, so any amplitude up to 2 is reachable.

mod full;
mod mapping;
mod partial;
mod split;

pub use full::{dps_full_solve, principal_factors};
pub use mapping::{kmeans_from, 
    dynamic_mapping_greedy, dynamic_mapping_kmeans, mapping_objective, KmeansOptions, KmeansOutcome,
    MappingSets,
};
pub use partial::{dps_partial_solve, group_fit};
pub use split::phase_split;
