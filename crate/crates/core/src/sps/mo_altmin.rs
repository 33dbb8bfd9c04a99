use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::manifold::{analog_objective, euclidean_gradient, retract, riemannian_gradient, ManifoldState};
use super::phases_of;
use crate::error::{Error, Result};
use crate::linalg::{cis, frob_sq, lstsq, re_inner, CMat, C64};
use crate::metrics::normalize_design;
use crate::model::{AnalogNetwork, BeamformerPair, Connectivity, Design};
use crate::random::uniform_phases;

/// Shared stopping and line-search controls for the alternating solvers.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AltMinOptions {
    pub max_outer: usize,
    /// Stop when the relative decrease of one outer iteration falls below this.
    pub tolerance: f64,
    /// Conjugate-gradient steps per analog update.
    pub cg_steps: usize,
    /// Sufficient-decrease constant of the Armijo test.
    pub armijo: f64,
    pub backtrack: f64,
    pub max_backtracks: usize,
    pub seed: u64,
}

impl Default for AltMinOptions {
    fn default() -> Self {
        Self {
            max_outer: 200,
            tolerance: 1e-6,
            cg_steps: 50,
            armijo: 1e-4,
            backtrack: 0.5,
            max_backtracks: 30,
            seed: 0,
        }
    }
}

impl AltMinOptions {
    pub fn validate(&self) -> Result<()> {
        if !(self.tolerance > 0.0) || self.max_outer == 0 || self.cg_steps == 0 || self.max_backtracks == 0 {
            return Err(Error::InvalidConfig("AltMin tolerance and iteration caps must be positive".into()));
        }
        if !(self.backtrack > 0.0 && self.backtrack < 1.0) || !(self.armijo > 0.0 && self.armijo < 1.0) {
            return Err(Error::InvalidConfig("line-search factors must lie in (0, 1)".into()));
        }
        Ok(())
    }
}

/// MO-AltMin from random phases drawn with `opts.seed`, power-normalized.
pub fn mo_altmin(f_opt: &CMat, n_rf: usize, opts: &AltMinOptions) -> Result<Design> {
    normalize_design(mo_altmin_raw(f_opt, n_rf, opts)?)
}

pub fn mo_altmin_raw(f_opt: &CMat, n_rf: usize, opts: &AltMinOptions) -> Result<Design> {
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let init = uniform_phases(&mut rng, f_opt.nrows(), n_rf).map(cis);
    mo_altmin_from(f_opt, init, opts)
}

/// MO-AltMin from a given unit-modulus starting point, without normalization.
///
/// Alternates the least-squares digital update with Riemannian conjugate
/// gradient (Polak-Ribière+, projection transport, Armijo backtracking) on the
/// analog matrix. `trace` holds the objective after every half-step.
pub fn mo_altmin_from(f_opt: &CMat, init: CMat, opts: &AltMinOptions) -> Result<Design> {
    opts.validate()?;
    if init.nrows() != f_opt.nrows() {
        return Err(Error::DimensionMismatch("initial analog matrix row count".into()));
    }
    let n_rf = init.ncols();
    let mut x = retract(&init);
    let mut trace = Vec::new();
    let floor = 1e-28 * frob_sq(f_opt);
    let mut digital = lstsq(&x, f_opt)?;
    let mut prev = analog_objective(f_opt, &x, &digital);
    trace.push(prev);
    let mut iterations = 0;
    let mut flags = Vec::new();
    while iterations < opts.max_outer && prev > floor {
        iterations += 1;
        let (next_x, stalled) = conjugate_gradient(f_opt, x, &digital, opts);
        x = next_x;
        trace.push(analog_objective(f_opt, &x, &digital));
        digital = lstsq(&x, f_opt)?;
        let obj = analog_objective(f_opt, &x, &digital);
        trace.push(obj);
        let decrease = (prev - obj) / prev;
        prev = obj;
        if stalled {
            flags.push(format!("line search stalled at outer iteration {iterations}"));
        }
        if decrease < opts.tolerance {
            break;
        }
    }
    let analog = AnalogNetwork::sps(phases_of(&x), Connectivity::fully(f_opt.nrows(), n_rf))?;
    Ok(Design { pair: BeamformerPair::new(analog, digital)?, trace, iterations, flags })
}

/// Up to `opts.cg_steps` Riemannian CG steps on `X ↦ ‖F − X·B‖²`. Returns the
/// final point and whether the line search gave up.
fn conjugate_gradient(f_opt: &CMat, x0: CMat, digital: &CMat, opts: &AltMinOptions) -> (CMat, bool) {
    let mut f_val = analog_objective(f_opt, &x0, digital);
    let g0 = riemannian_gradient(&x0, &euclidean_gradient(f_opt, &x0, digital));
    let mut state = ManifoldState { direction: -g0.clone(), gradient: g0, point: x0 };
    for _ in 0..opts.cg_steps {
        let g_sq = frob_sq(&state.gradient);
        if g_sq <= 1e-30 * f_val.max(1e-300) || f_val == 0.0 {
            return (state.point, false);
        }
        let mut slope = re_inner(&state.gradient, &state.direction);
        if slope >= 0.0 {
            state.direction = -state.gradient.clone();
            slope = -g_sq;
        }
        // Exact minimizer of the ambient quadratic along the direction.
        let db = &state.direction * digital;
        let curvature = frob_sq(&db);
        let residual = f_opt - &state.point * digital;
        let mut step = if curvature > 0.0 { re_inner(&db, &residual) / curvature } else { 1.0 };
        if !(step > 0.0) || !step.is_finite() {
            step = 1.0;
        }
        let mut accepted = None;
        for _ in 0..opts.max_backtracks {
            let cand = retract(&(&state.point + &state.direction * C64::new(step, 0.0)));
            let val = analog_objective(f_opt, &cand, digital);
            if val <= f_val + opts.armijo * step * slope {
                accepted = Some((cand, val));
                break;
            }
            step *= opts.backtrack;
        }
        let Some((next, val)) = accepted else {
            return (state.point, true);
        };
        let g_new = riemannian_gradient(&next, &euclidean_gradient(f_opt, &next, digital));
        let g_old_t = riemannian_gradient(&next, &state.gradient);
        let d_old_t = riemannian_gradient(&next, &state.direction);
        let beta = (re_inner(&g_new, &(&g_new - &g_old_t)) / g_sq).max(0.0);
        state.direction = &d_old_t * C64::new(beta, 0.0) - &g_new;
        state.gradient = g_new;
        state.point = next;
        let improvement = f_val - val;
        f_val = val;
        if improvement <= 1e-14 * f_val {
            break;
        }
    }
    (state.point, false)
}
