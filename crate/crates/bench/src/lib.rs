//! Shared parameter sets for the benchmarks.

use optosqueeze_core::{CavityParams, SteadyState};

/// Deep bad-cavity regime with `n_ba = 1e2`.
pub fn bad_cavity() -> (CavityParams, SteadyState) {
    let params = CavityParams::new(1e3, 1e-3, 1.0).with_n_th(0.5);
    let g = (1e2 * params.gamma * params.gamma_m).sqrt();
    let steady = SteadyState::with_effective_couplings(&params, g, g * params.gamma / 2.0)
        .expect("valid couplings");
    (params, steady)
}

/// Sideband-resolved settings used for the detuning sweeps.
pub fn sweep_regime() -> (CavityParams, SteadyState) {
    let params = CavityParams::new(0.3, 1e-5, 1.0);
    let steady = SteadyState::with_effective_couplings(&params, 0.36, -0.09)
        .expect("valid couplings");
    (params, steady)
}
