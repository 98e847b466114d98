//! Linear stability of the fluctuation dynamics over the state `(X, Y, Q, P)`.
//!
//! Two channels decide stability independently: a Routh table on the
//! characteristic polynomial and the largest real part among its roots. A
//! disagreement between them is reported, never resolved silently.

mod roots;
mod routh;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::model::{CavityParams, CouplingKind, SteadyState};

pub use roots::{max_real_part, polynomial_roots};
pub use routh::{routh_hurwitz, RouthVerdict};

/// Points whose dominant real part is within this fraction of `omega_m` of
/// zero are marginal: neither channel is trusted there.
pub const MARGINAL_FRACTION: f64 = 1e-9;

/// Relative bisection tolerance on unstable-interval endpoints.
pub const ENDPOINT_TOLERANCE: f64 = 1e-3;

pub const DEFAULT_SWEEP_POINTS: usize = 2001;

/// Real 4x4 drift matrix over `(X, Y, Q, P)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DriftMatrix {
    pub entries: [[f64; 4]; 4],
    /// `None` for matrices not assembled from a cavity model.
    pub coupling_kind: Option<CouplingKind>,
    /// Rate scale used for the marginal band (the mechanical frequency).
    pub rate_scale: f64,
}

impl DriftMatrix {
    pub fn from_entries(entries: [[f64; 4]; 4]) -> Self {
        Self { entries, coupling_kind: None, rate_scale: 1.0 }
    }

    pub fn trace(&self) -> f64 {
        (0..4).map(|i| self.entries[i][i]).sum()
    }
}

/// Assembles the drift matrix.
///
/// Dispersive coupling feeds `Q` into `Y` and `X` into the force on `P`;
/// dissipative coupling feeds `Q` into `X` and `Y` into the force on `P`.
/// The dissipative form is linear in the detuning. Mixed coupling sums the
/// two sets of entries.
pub fn drift_matrix(params: &CavityParams, steady: &SteadyState, kind: CouplingKind) -> DriftMatrix {
    let half = params.gamma / 2.0;
    let d = params.delta;
    let wm = params.omega_m;
    let (g_w, g_g) = steady.couplings_for(kind);
    let entries = [
        [-half, -d, g_g, 0.0],
        [d, -half, g_w, 0.0],
        [0.0, 0.0, 0.0, wm],
        [g_w, g_g, -wm, -params.gamma_m],
    ];
    DriftMatrix { entries, coupling_kind: Some(kind), rate_scale: wm }
}

/// Coefficients of `det(sI - A)` in descending powers, by Faddeev-LeVerrier.
pub fn characteristic_polynomial(drift: &DriftMatrix) -> [f64; 5] {
    let a = &drift.entries;
    let mut coeffs = [0.0; 5];
    coeffs[0] = 1.0;
    let mut m = [[0.0; 4]; 4];
    for k in 1..=4 {
        // M_k = A M_{k-1} + c_{k-1} I
        let mut next = [[0.0; 4]; 4];
        for i in 0..4 {
            for j in 0..4 {
                next[i][j] = (0..4).map(|l| a[i][l] * m[l][j]).sum::<f64>();
            }
            next[i][i] += coeffs[k - 1];
        }
        m = next;
        let trace_am: f64 = (0..4).map(|i| (0..4).map(|l| a[i][l] * m[l][i]).sum::<f64>()).sum();
        coeffs[k] = -trace_am / k as f64;
    }
    coeffs
}

/// Largest real part of the eigenvalues, from the roots of the
/// characteristic polynomial.
pub fn eigen_oracle(drift: &DriftMatrix) -> Result<f64> {
    max_real_part(&characteristic_polynomial(drift))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StabilityReport {
    pub char_poly: [f64; 5],
    pub routh: RouthVerdict,
    pub rh_stable: bool,
    pub max_re_eig: f64,
    /// `|max_re_eig|` is inside the marginal band.
    pub marginal: bool,
    /// Both channels give the same verdict. Always true at marginal points.
    pub method_agreement: bool,
}

impl StabilityReport {
    /// Verdict of the eigenvalue channel.
    pub fn eig_stable(&self) -> bool {
        self.max_re_eig < 0.0
    }
}

pub fn analyze(drift: &DriftMatrix) -> Result<StabilityReport> {
    let char_poly = characteristic_polynomial(drift);
    let routh = routh_hurwitz(&char_poly);
    let max_re_eig = max_real_part(&char_poly)?;
    let marginal = max_re_eig.abs() <= MARGINAL_FRACTION * drift.rate_scale;
    let method_agreement = marginal || routh.is_stable() == (max_re_eig < 0.0);
    Ok(StabilityReport {
        char_poly,
        routh,
        rh_stable: routh.is_stable(),
        max_re_eig,
        marginal,
        method_agreement,
    })
}

/// Small-detuning stability boundary.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Threshold {
    /// The boundary detuning. Positive means blue detunings beyond it are
    /// unstable, negative means red detunings beyond it are.
    Critical(f64),
    /// No coupling: stable for every small detuning.
    StableForSmallDetunings,
}

impl Threshold {
    pub fn value(self) -> Option<f64> {
        match self {
            Threshold::Critical(v) => Some(v),
            Threshold::StableForSmallDetunings => None,
        }
    }
}

fn active_coupling(steady: &SteadyState, kind: CouplingKind) -> Result<(f64, f64)> {
    match kind {
        CouplingKind::Dispersive => Ok((steady.g_omega, 1.0)),
        CouplingKind::Dissipative => Ok((steady.g_gamma, -1.0)),
        CouplingKind::Mixed => Err(Error::Unsupported(
            "small-detuning thresholds exist only for a single coupling kind".into(),
        )),
    }
}

/// Closed-form small-detuning threshold
/// `omega_m (gamma/G)^2 (gamma/omega_m) Q [1 + 4Q (omega_m/gamma)^3 + 16 (omega_m/gamma)^4]`
/// with `Q = gamma_m / omega_m`.
///
/// For dissipative coupling the threshold is mirrored to red detuning with
/// `G = G_gamma`.
pub fn threshold_small_detuning(
    params: &CavityParams,
    steady: &SteadyState,
    kind: CouplingKind,
) -> Result<Threshold> {
    let (g, sign) = active_coupling(steady, kind)?;
    if g == 0.0 {
        return Ok(Threshold::StableForSmallDetunings);
    }
    let wm = params.omega_m;
    let q = params.gamma_m / wm;
    let r = wm / params.gamma;
    let bracket = 1.0 + 4.0 * q * r.powi(3) + 16.0 * r.powi(4);
    let value = wm * (params.gamma / g).powi(2) * (params.gamma / wm) * q * bracket;
    Ok(Threshold::Critical(sign * value))
}

/// Zero of the third Hurwitz determinant of the drift matrix, kept to first
/// order in the detuning:
/// `gamma gamma_m (gamma^2 + 2 gamma gamma_m + 4 omega_m^2)^2 / (16 G^2 omega_m (gamma + gamma_m)^2)`.
///
/// This is the exact linearisation of the Routh conditions for the assembled
/// matrices, so it tracks the swept boundary closely.
pub fn threshold_linear_routh(
    params: &CavityParams,
    steady: &SteadyState,
    kind: CouplingKind,
) -> Result<Threshold> {
    let (g, sign) = active_coupling(steady, kind)?;
    if g == 0.0 {
        return Ok(Threshold::StableForSmallDetunings);
    }
    let (gm, gmm, wm) = (params.gamma, params.gamma_m, params.omega_m);
    let inner = gm * gm + 2.0 * gm * gmm + 4.0 * wm * wm;
    let value = gm * gmm * inner * inner / (16.0 * g * g * wm * (gm + gmm).powi(2));
    Ok(Threshold::Critical(sign * value))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepPoint {
    pub delta: f64,
    pub report: StabilityReport,
}

/// Maximal run of unstable sweep points, endpoints refined by bisection.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UnstableInterval {
    pub lower: f64,
    pub upper: f64,
    /// False when the endpoint is the edge of the swept range.
    pub lower_refined: bool,
    pub upper_refined: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DetuningSweep {
    pub coupling_kind: CouplingKind,
    pub points: Vec<SweepPoint>,
    pub intervals: Vec<UnstableInterval>,
}

impl DetuningSweep {
    /// Points where the two channels disagree outside the marginal band.
    pub fn disagreements(&self) -> impl Iterator<Item = &SweepPoint> {
        self.points.iter().filter(|p| !p.report.method_agreement)
    }
}

/// `n` evenly spaced values from `lo` to `hi` inclusive.
pub(crate) fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![lo];
    }
    let step = (hi - lo) / (n - 1) as f64;
    (0..n).map(|i| if i == n - 1 { hi } else { lo + step * i as f64 }).collect()
}

/// Sweeps the detuning with the effective couplings of `steady` held fixed.
///
/// Each point is analysed by both channels. Unstable intervals follow the
/// eigenvalue channel; interior endpoints are bisected to
/// [`ENDPOINT_TOLERANCE`] relative accuracy.
pub fn sweep_detuning(
    params: &CavityParams,
    steady: &SteadyState,
    kind: CouplingKind,
    delta_range: (f64, f64),
    n_points: usize,
) -> Result<DetuningSweep> {
    let (lo, hi) = delta_range;
    if n_points < 2 {
        return Err(Error::InvalidGrid(format!("a sweep needs at least 2 points, got {n_points}")));
    }
    if !lo.is_finite() || !hi.is_finite() || lo >= hi {
        return Err(Error::InvalidGrid(format!("detuning range must satisfy min < max, got [{lo}, {hi}]")));
    }

    let analyze_at = |delta: f64| analyze(&drift_matrix(&params.with_delta(delta), steady, kind));

    let points = linspace(lo, hi, n_points)
        .into_par_iter()
        .map(|delta| analyze_at(delta).map(|report| SweepPoint { delta, report }))
        .collect::<Result<Vec<_>>>()?;

    let unstable_at = |delta: f64| -> Result<bool> { Ok(analyze_at(delta)?.max_re_eig > 0.0) };
    let bisect = |mut stable: f64, mut unstable: f64| -> Result<f64> {
        let floor = 1e-12 * (hi - lo);
        for _ in 0..200 {
            let width = (unstable - stable).abs();
            let mid = 0.5 * (stable + unstable);
            if width <= ENDPOINT_TOLERANCE * mid.abs() || width <= floor {
                break;
            }
            if unstable_at(mid)? {
                unstable = mid;
            } else {
                stable = mid;
            }
        }
        Ok(0.5 * (stable + unstable))
    };

    let mut intervals = Vec::new();
    let mut i = 0;
    while i < points.len() {
        if points[i].report.max_re_eig <= 0.0 {
            i += 1;
            continue;
        }
        let start = i;
        while i + 1 < points.len() && points[i + 1].report.max_re_eig > 0.0 {
            i += 1;
        }
        let end = i;
        let (lower, lower_refined) = if start == 0 {
            (points[0].delta, false)
        } else {
            (bisect(points[start - 1].delta, points[start].delta)?, true)
        };
        let (upper, upper_refined) = if end == points.len() - 1 {
            (points[end].delta, false)
        } else {
            (bisect(points[end + 1].delta, points[end].delta)?, true)
        };
        intervals.push(UnstableInterval { lower, upper, lower_refined, upper_refined });
        i += 1;
    }

    Ok(DetuningSweep { coupling_kind: kind, points, intervals })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{steady_state, CavityParams};
    use approx::assert_relative_eq;

    fn kilda() -> (CavityParams, SteadyState) {
        let p = CavityParams::new(0.3, 1e-5, 1.0);
        let s = SteadyState::with_effective_couplings(&p, 1.2 * 0.3, -0.3 * 0.3).unwrap();
        (p, s)
    }

    #[test]
    fn char_poly_examples() {
        let mut minus_i = [[0.0; 4]; 4];
        let mut diag = [[0.0; 4]; 4];
        for i in 0..4 {
            minus_i[i][i] = -1.0;
            diag[i][i] = -(i as f64 + 1.0);
        }
        assert_eq!(characteristic_polynomial(&DriftMatrix::from_entries(minus_i)), [1.0, 4.0, 6.0, 4.0, 1.0]);
        assert_eq!(characteristic_polynomial(&DriftMatrix::from_entries(diag)), [1.0, 10.0, 35.0, 50.0, 24.0]);
    }

    #[test]
    fn decoupled_matrix() {
        let p = CavityParams::new(0.7, 0.01, 1.0);
        let s = steady_state(&p).unwrap();
        let a = drift_matrix(&p, &s, CouplingKind::Dispersive);
        let c = characteristic_polynomial(&a);
        // (s + g/2)^2 (s^2 + gm s + wm^2)
        let h = 0.35;
        let want = [1.0, 2.0 * h + 0.01, h * h + 2.0 * h * 0.01 + 1.0, h * h * 0.01 + 2.0 * h, h * h];
        for (x, y) in c.iter().zip(want) {
            assert_relative_eq!(*x, y, max_relative = 1e-13);
        }
        assert_relative_eq!(eigen_oracle(&a).unwrap(), -0.005, max_relative = 1e-9);
    }

    #[test]
    fn minus_identity_oracle() {
        let mut m = [[0.0; 4]; 4];
        for (i, row) in m.iter_mut().enumerate() {
            row[i] = -1.0;
        }
        let v = eigen_oracle(&DriftMatrix::from_entries(m)).unwrap();
        assert!((v + 1.0).abs() < 1e-3);
    }

    #[test]
    fn kilda_dispersive_entries() {
        let (p, s) = kilda();
        let a = drift_matrix(&p, &s, CouplingKind::Dispersive).entries;
        assert_eq!(a[0], [-0.15, 0.0, 0.0, 0.0]);
        assert_eq!(a[1], [0.0, -0.15, 0.36, 0.0]);
        assert_eq!(a[2], [0.0, 0.0, 0.0, 1.0]);
        assert_eq!(a[3], [0.36, 0.0, -1.0, -1e-5]);
    }

    #[test]
    fn trace_is_coupling_independent() {
        let (p, s) = kilda();
        for kind in [CouplingKind::Dispersive, CouplingKind::Dissipative, CouplingKind::Mixed] {
            for d in [-0.2, 0.0, 0.05] {
                let a = drift_matrix(&p.with_delta(d), &s, kind);
                assert_relative_eq!(a.trace(), -0.3 - 1e-5, max_relative = 1e-15);
                assert_relative_eq!(characteristic_polynomial(&a)[1], 0.3 + 1e-5, max_relative = 1e-14);
            }
        }
    }

    #[test]
    fn kilda_blue_detuning_is_unstable() {
        let (p, s) = kilda();
        let r = analyze(&drift_matrix(&p.with_delta(1e-2), &s, CouplingKind::Dispersive)).unwrap();
        assert!(r.max_re_eig > 0.0);
        assert!(!r.rh_stable);
        assert!(r.method_agreement);
    }

    #[test]
    fn resonant_drive_is_stable_up_to_strong_coupling() {
        let p = CavityParams::new(0.3, 1e-5, 1.0);
        for k in 1..=20 {
            let g = 0.1 * k as f64 * 0.3;
            let s = SteadyState::with_effective_couplings(&p, g, g).unwrap();
            for kind in [CouplingKind::Dispersive, CouplingKind::Dissipative] {
                let r = analyze(&drift_matrix(&p, &s, kind)).unwrap();
                assert!(r.max_re_eig < 0.0 && r.rh_stable, "G = {g}, {kind}");
            }
        }
    }

    #[test]
    fn swap_relabels_matrices() {
        let p = CavityParams::new(0.4, 1e-3, 1.0);
        let g = 0.21;
        let d = 0.013;
        let diss = drift_matrix(&p.with_delta(d), &SteadyState::with_effective_couplings(&p, 0.0, g).unwrap(), CouplingKind::Dissipative);
        let disp = drift_matrix(&p.with_delta(-d), &SteadyState::with_effective_couplings(&p, g, 0.0).unwrap(), CouplingKind::Dispersive);
        let perm = [1, 0, 2, 3];
        for i in 0..4 {
            for j in 0..4 {
                assert_eq!(diss.entries[perm[i]][perm[j]], disp.entries[i][j]);
            }
        }
    }

    #[test]
    fn threshold_formula_values() {
        let (p, s) = kilda();
        let t = threshold_small_detuning(&p, &s, CouplingKind::Dispersive).unwrap().value().unwrap();
        // (1/1.44) * 0.3 * 1e-5 * (1 + 4e-5/0.027 + 16/0.0081)
        let want = (1.0 / 1.44) * 0.3 * 1e-5 * (1.0 + 4e-5 / 0.027 + 16.0 / 0.0081);
        assert_relative_eq!(t, want, max_relative = 1e-12);
        assert!((t - 4.1e-3).abs() < 0.02 * 4.1e-3);

        let half = SteadyState::with_effective_couplings(&p, 0.18, 0.0).unwrap();
        let t2 = threshold_small_detuning(&p, &half, CouplingKind::Dispersive).unwrap().value().unwrap();
        assert_relative_eq!(t2, 4.0 * t, max_relative = 1e-12);

        let td = threshold_small_detuning(&p, &s, CouplingKind::Dissipative).unwrap().value().unwrap();
        assert!(td < 0.0);

        let zero = SteadyState::with_effective_couplings(&p, 0.0, 0.0).unwrap();
        assert_eq!(
            threshold_small_detuning(&p, &zero, CouplingKind::Dispersive).unwrap(),
            Threshold::StableForSmallDetunings
        );
        assert!(threshold_small_detuning(&p, &s, CouplingKind::Mixed).is_err());
    }

    #[test]
    fn linear_routh_threshold_tracks_sweep() {
        let (p, s) = kilda();
        let t = threshold_linear_routh(&p, &s, CouplingKind::Dispersive).unwrap().value().unwrap();
        let sweep = sweep_detuning(&p, &s, CouplingKind::Dispersive, (0.0, 2e-3), 201).unwrap();
        assert_eq!(sweep.intervals.len(), 1);
        let onset = sweep.intervals[0].lower;
        assert!((onset - t).abs() < 2e-3 * t, "onset {onset} vs {t}");
    }

    #[test]
    fn sweep_rejects_bad_ranges() {
        let (p, s) = kilda();
        assert!(sweep_detuning(&p, &s, CouplingKind::Dispersive, (0.1, -0.1), 10).is_err());
        assert!(sweep_detuning(&p, &s, CouplingKind::Dispersive, (-0.1, 0.1), 1).is_err());
    }

    #[test]
    fn sweep_endpoints_meet_tolerance() {
        let (p, s) = kilda();
        let sweep = sweep_detuning(&p, &s, CouplingKind::Dissipative, (-0.1, 0.1), 401).unwrap();
        assert_eq!(sweep.intervals.len(), 1);
        let iv = sweep.intervals[0];
        assert!(!iv.lower_refined && iv.upper_refined);
        let step = ENDPOINT_TOLERANCE * iv.upper.abs();
        let inside = analyze(&drift_matrix(&p.with_delta(iv.upper - step), &s, CouplingKind::Dissipative)).unwrap();
        let outside = analyze(&drift_matrix(&p.with_delta(iv.upper + step), &s, CouplingKind::Dissipative)).unwrap();
        assert!(inside.max_re_eig > 0.0 && outside.max_re_eig < 0.0);
    }
}
