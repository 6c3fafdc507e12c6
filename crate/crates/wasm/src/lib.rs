//! Browser bindings for the demo page in `www/`. Everything is one
//! dimensional and returns flat `f64` arrays for plotting.

use normflate::besov::block_norms;
use normflate::correlation::DriftPath;
use normflate::gfs::{
    build_adversarial_pair, sample_control_pair, sample_real_gfs, GfsSpec, StreamKey, TrialStreams, VarianceProfile,
};
use normflate::solver::{self, antisym2, asymmetry_witness, drift_direction, SolveConfig};
use normflate::spectral::{synthesize_on, SpectralField, TorusGrid};
use wasm_bindgen::prelude::*;

fn js_err(e: normflate::Error) -> JsError {
    JsError::new(&e.to_string())
}

fn scalar_sample(cutoff: usize, gamma: f64, seed: u64) -> Result<SpectralField, JsError> {
    let grid = TorusGrid::for_radius(1, cutoff.max(1)).map_err(js_err)?;
    sample_real_gfs(&VarianceProfile::power(gamma, cutoff as f64), grid, StreamKey::new(seed, 0)).map_err(js_err)
}

/// Point values of a real sample with `sigma^2 = |k|^gamma`, on `points`
/// equispaced points of `[0, 2 pi)`.
#[wasm_bindgen]
pub fn sample_field(cutoff: usize, gamma: f64, seed: u64, points: usize) -> Result<Vec<f64>, JsError> {
    let f = scalar_sample(cutoff, gamma, seed)?;
    let values = synthesize_on(&f, points.max(f.grid().modes())).map_err(js_err)?;
    Ok(values.component(0).to_vec())
}

/// `sup |Delta_ell f|` for `ell = -1, 0, 1, ...` of the same sample.
#[wasm_bindgen]
pub fn block_sup_norms(cutoff: usize, gamma: f64, seed: u64) -> Result<Vec<f64>, JsError> {
    let f = scalar_sample(cutoff, gamma, seed)?;
    Ok(block_norms(&f, f64::INFINITY).map_err(js_err)?.iter().map(|b| b.lp).collect())
}

/// Solves the two-component antisymmetric equation from white-noise data at
/// cutoff `n` up to `T = (log n)^{-m}` and returns `[t, |Pi_0 u_t|, |I_t|]`
/// triples. `adversarial` selects the rotated pair, otherwise the pair is
/// independent and `I_t` is reported as zero.
#[wasm_bindgen]
pub fn zero_mode_path(n: usize, m: f64, seed: u64, adversarial: bool) -> Result<Vec<f64>, JsError> {
    let n = n.max(2);
    let spec = antisym2(1);
    let w = asymmetry_witness(&spec).expect("antisym2 is asymmetric");
    let grid = TorusGrid::for_radius(1, n).map_err(js_err)?;
    let profile = VarianceProfile::white(n as f64);
    let gfs = GfsSpec::uniform(grid, profile.clone(), 2);
    let streams = TrialStreams::new(seed, 0, 2);
    let (x, y) = if adversarial {
        build_adversarial_pair(&gfs, w.a, w.b, &streams)
    } else {
        sample_control_pair(&gfs, &streams)
    }
    .map_err(js_err)?;
    let t_end = (n as f64).ln().powf(-m);
    let cfg = SolveConfig::for_cutoff(t_end, n as f64, solver::DEFAULT_STEP_CONSTANT);
    let traj = solver::solve(&(&x + &y), &spec, &cfg).map_err(js_err)?;
    let drift = DriftPath::new(&profile, 1, drift_direction(&spec, w));
    let stride = (traj.path_times.len() / 400).max(1);
    let mut out = Vec::new();
    for j in (0..traj.path_times.len()).step_by(stride) {
        let t = traj.path_times[j];
        out.push(t);
        out.push(solver::norm(&traj.zero_mode_path[j]));
        out.push(if adversarial { drift.i_norm(t) } else { 0.0 });
    }
    Ok(out)
}
