//! Output-field noise spectra and homodyne squeezing.
//!
//! Inputs are ordered `(X_in, Y_in, Q_in)` and outputs `(X_out, Y_out)`. The
//! optical input quadratures carry no 1/2 prefactor, unlike the intracavity
//! ones, so the vacuum level of an output quadrature is 1.

use std::f64::consts::PI;

use nalgebra::{Matrix4, Matrix4x3};
use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::model::{susceptibility, CavityParams, CouplingKind, SteadyState};
use crate::stability::drift_matrix;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// Linear map from input noise quadratures to output field quadratures at one
/// frequency.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseTransfer {
    pub omega: f64,
    /// Rows `(X_out, Y_out)`, columns `(X_in, Y_in, Q_in)`.
    pub matrix: [[Complex64; 3]; 2],
    pub coupling_kind: CouplingKind,
    /// False for mixed coupling or nonzero detuning, where no closed-form
    /// result backs the solver.
    pub validated: bool,
}

/// Which transfer relations to evaluate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TransferModel {
    /// Full linear solve, exact in `omega / gamma`.
    General,
    /// Closed-form relations to lowest order in `omega / gamma`.
    BadCavity,
}

impl TransferModel {
    pub fn as_str(self) -> &'static str {
        match self {
            TransferModel::General => "general",
            TransferModel::BadCavity => "bad_cavity",
        }
    }
}

/// Input noise correlations `<u_a(w) u_b(w')> = N_ab delta(w + w')`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InputCorrelator {
    pub n_th: f64,
}

impl InputCorrelator {
    pub fn new(n_th: f64) -> Self {
        Self { n_th }
    }

    /// Vacuum optical block with `<X_in Y_in> = i`, `<Y_in X_in> = -i`, and the
    /// thermal mechanical entry `n_th + 1/2`.
    pub fn matrix(&self) -> [[Complex64; 3]; 3] {
        let i = Complex64::new(0.0, 1.0);
        [[ONE, i, ZERO], [-i, ONE, ZERO], [ZERO, ZERO, Complex64::new(self.n_th + 0.5, 0.0)]]
    }
}

fn require_resonance(params: &CavityParams) -> Result<()> {
    if params.delta != 0.0 {
        return Err(Error::DetuningUnsupported { delta: params.delta });
    }
    Ok(())
}

/// Bad-cavity dispersive relations: `X_out = X_in` and
/// `Y_out = Y_in + (4G/sqrt(gamma)) chi [sqrt(gamma_m) Q_in + (G/sqrt(gamma)) X_in]`.
pub fn transfer_dispersive_badcavity(
    omega: f64,
    steady: &SteadyState,
    params: &CavityParams,
) -> Result<NoiseTransfer> {
    require_resonance(params)?;
    let chi = susceptibility(omega, params).value;
    let g = steady.g_omega;
    let sg = params.gamma.sqrt();
    let k = 4.0 * g / sg * chi;
    Ok(NoiseTransfer {
        omega,
        matrix: [[ONE, ZERO, ZERO], [k * (g / sg), ONE, k * params.gamma_m.sqrt()]],
        coupling_kind: CouplingKind::Dispersive,
        validated: true,
    })
}

/// Bad-cavity dissipative relations: `Y_out = Y_in` and
/// `X_out = X_in + (4 G b / sqrt(gamma)) chi [sqrt(gamma_m) Q_in + (G b / sqrt(gamma)) Y_in]`
/// with `b = 2 i omega / gamma`.
pub fn transfer_dissipative_badcavity(
    omega: f64,
    steady: &SteadyState,
    params: &CavityParams,
) -> Result<NoiseTransfer> {
    require_resonance(params)?;
    let chi = susceptibility(omega, params).value;
    let sg = params.gamma.sqrt();
    let gb = steady.g_gamma * beta(omega, params.gamma);
    let k = 4.0 * gb / sg * chi;
    Ok(NoiseTransfer {
        omega,
        matrix: [[ONE, k * gb / sg, k * params.gamma_m.sqrt()], [ZERO, ONE, ZERO]],
        coupling_kind: CouplingKind::Dissipative,
        validated: true,
    })
}

/// `2 i omega / gamma`.
pub fn beta(omega: f64, gamma: f64) -> Complex64 {
    Complex64::new(0.0, 2.0 * omega / gamma)
}

pub fn transfer_badcavity(
    omega: f64,
    steady: &SteadyState,
    params: &CavityParams,
    kind: CouplingKind,
) -> Result<NoiseTransfer> {
    match kind {
        CouplingKind::Dispersive => transfer_dispersive_badcavity(omega, steady, params),
        CouplingKind::Dissipative => transfer_dissipative_badcavity(omega, steady, params),
        CouplingKind::Mixed => Err(Error::Unsupported(
            "no closed-form bad-cavity relations for mixed coupling".into(),
        )),
    }
}

/// Response of the internal state `(X, Y, Q, P)` to the inputs
/// `(X_in, Y_in, Q_in)`, from `(-i omega I - A) v = B u`.
///
/// `A` is the drift matrix. `B` injects `sqrt(gamma)/2` of each optical input
/// into its intracavity quadrature and `sqrt(gamma_m) Q_in` into the force on
/// `P`. Dissipative coupling adds the direct vacuum drive `-G_gamma Y_in /
/// sqrt(gamma)` to that force.
pub fn state_response(
    omega: f64,
    steady: &SteadyState,
    params: &CavityParams,
    kind: CouplingKind,
) -> Result<[[Complex64; 3]; 4]> {
    let drift = drift_matrix(params, steady, kind);
    let (_, g_g) = steady.couplings_for(kind);
    let sg = params.gamma.sqrt();

    let system = Matrix4::from_fn(|i, j| {
        let diag = if i == j { Complex64::new(0.0, -omega) } else { ZERO };
        diag - drift.entries[i][j]
    });
    let mut input = Matrix4x3::<Complex64>::zeros();
    input[(0, 0)] = Complex64::new(sg / 2.0, 0.0);
    input[(1, 1)] = Complex64::new(sg / 2.0, 0.0);
    input[(3, 1)] = Complex64::new(-g_g / sg, 0.0);
    input[(3, 2)] = Complex64::new(params.gamma_m.sqrt(), 0.0);

    let scale = system.iter().map(|z| z.norm()).fold(0.0, f64::max);
    let lu = system.lu();
    let u = lu.u();
    let smallest_pivot = (0..4).map(|i| u[(i, i)].norm()).fold(f64::INFINITY, f64::min);
    if smallest_pivot.is_nan() || smallest_pivot <= 1e-14 * scale {
        return Err(Error::Singular { omega });
    }
    let v = lu.solve(&input).ok_or(Error::Singular { omega })?;
    if v.iter().any(|z| !z.is_finite()) {
        return Err(Error::Singular { omega });
    }
    Ok(std::array::from_fn(|i| std::array::from_fn(|j| v[(i, j)])))
}

/// Noise transfer from the full linear solve.
///
/// Output relations: `X_out = 2 sqrt(gamma) X - (4 G_gamma / sqrt(gamma)) Q - X_in`
/// and `Y_out = 2 sqrt(gamma) Y - Y_in`.
pub fn transfer_general(
    omega: f64,
    steady: &SteadyState,
    params: &CavityParams,
    kind: CouplingKind,
) -> Result<NoiseTransfer> {
    let v = state_response(omega, steady, params, kind)?;
    let (_, g_g) = steady.couplings_for(kind);
    let sg = params.gamma.sqrt();
    let mut matrix = [[ZERO; 3]; 2];
    for col in 0..3 {
        matrix[0][col] = 2.0 * sg * v[0][col] - 4.0 * g_g / sg * v[2][col];
        matrix[1][col] = 2.0 * sg * v[1][col];
    }
    matrix[0][0] -= ONE;
    matrix[1][1] -= ONE;
    Ok(NoiseTransfer {
        omega,
        matrix,
        coupling_kind: kind,
        validated: kind != CouplingKind::Mixed && params.delta == 0.0,
    })
}

pub fn transfer(
    model: TransferModel,
    omega: f64,
    steady: &SteadyState,
    params: &CavityParams,
    kind: CouplingKind,
) -> Result<NoiseTransfer> {
    match model {
        TransferModel::General => transfer_general(omega, steady, params, kind),
        TransferModel::BadCavity => transfer_badcavity(omega, steady, params, kind),
    }
}

/// `C_ij = sum_ab T_ia(w) N_ab T_jb(-w)`: the unsymmetrised output correlator.
pub fn output_correlator(
    plus: &NoiseTransfer,
    minus: &NoiseTransfer,
    correlator: &InputCorrelator,
) -> [[Complex64; 2]; 2] {
    let n = correlator.matrix();
    let mut c = [[ZERO; 2]; 2];
    for (i, row) in c.iter_mut().enumerate() {
        for (j, cij) in row.iter_mut().enumerate() {
            for (ta, n_row) in plus.matrix[i].iter().zip(&n) {
                for (n_ab, tb) in n_row.iter().zip(&minus.matrix[j]) {
                    *cij += ta * n_ab * tb;
                }
            }
        }
    }
    c
}

/// Real symmetric 2x2 covariance whose quadratic form is the frequency-even
/// spectrum: `S(w, theta) = u^T C u` with `u = (cos theta, sin theta)`.
pub fn symmetrized_covariance(
    plus: &NoiseTransfer,
    minus: &NoiseTransfer,
    correlator: &InputCorrelator,
) -> [[f64; 2]; 2] {
    let cp = output_correlator(plus, minus, correlator);
    let cm = output_correlator(minus, plus, correlator);
    let mut out = [[0.0; 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            out[i][j] = 0.25 * (cp[i][j] + cp[j][i] + cm[i][j] + cm[j][i]).re;
        }
    }
    out
}

/// Whether to keep only the frequency-even part of a spectrum.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SpectrumMode {
    /// `Re [S(w) + S(-w)] / 2`.
    Even,
    /// `S(w)` as is, for diagnostics. Contains the odd part.
    Raw,
}

/// Homodyne spectrum of `Z = X_out cos theta + Y_out sin theta`.
pub fn szz(
    theta: f64,
    plus: &NoiseTransfer,
    minus: &NoiseTransfer,
    correlator: &InputCorrelator,
    mode: SpectrumMode,
) -> f64 {
    let u = [theta.cos(), theta.sin()];
    match mode {
        SpectrumMode::Even => {
            let c = symmetrized_covariance(plus, minus, correlator);
            quadratic_form(&c, u)
        }
        SpectrumMode::Raw => {
            let c = output_correlator(plus, minus, correlator);
            let mut s = ZERO;
            for i in 0..2 {
                for j in 0..2 {
                    s += u[i] * u[j] * c[i][j];
                }
            }
            s.re
        }
    }
}

fn quadratic_form(c: &[[f64; 2]; 2], u: [f64; 2]) -> f64 {
    u[0] * u[0] * c[0][0] + 2.0 * u[0] * u[1] * c[0][1] + u[1] * u[1] * c[1][1]
}

/// Angle reduced to `[0, pi)`.
fn wrap_angle(theta: f64) -> f64 {
    let t = theta.rem_euclid(PI);
    if t >= PI { 0.0 } else { t }
}

/// Result of minimising the even spectrum over the homodyne angle.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Squeeze {
    /// Smallest eigenvalue of the symmetrised output covariance.
    pub s_min: f64,
    /// Minimising angle in `[0, pi)`.
    pub theta_opt: f64,
    /// Largest eigenvalue (the anti-squeezed quadrature).
    pub s_max: f64,
    /// The same minimum from `base - (N^2/2) / (sqrt(M^2 + N^2) + M)`.
    pub s_min_closed_form: f64,
}

/// Quadratic angle-dependence of the even spectrum in the labelling of the
/// coupling kind, `S = base + M sin^2 + N sin cos` (dispersive) or
/// `S = base + M cos^2 - N sin cos` (dissipative, the X/Y swap).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SqueezeTerms {
    pub base: f64,
    pub m: f64,
    pub n: f64,
}

pub fn squeeze_terms(cov: &[[f64; 2]; 2], kind: CouplingKind) -> SqueezeTerms {
    match kind {
        CouplingKind::Dissipative => SqueezeTerms {
            base: cov[1][1],
            m: cov[0][0] - cov[1][1],
            n: -2.0 * cov[0][1],
        },
        CouplingKind::Dispersive | CouplingKind::Mixed => SqueezeTerms {
            base: cov[0][0],
            m: cov[1][1] - cov[0][0],
            n: 2.0 * cov[0][1],
        },
    }
}

/// `base - (N^2 / 2) / (sqrt(M^2 + N^2) + M)`.
pub fn closed_form_minimum(terms: SqueezeTerms) -> f64 {
    let SqueezeTerms { base, m, n } = terms;
    let root = m.hypot(n);
    if root + m > 0.0 {
        base - 0.5 * n * n / (root + m)
    } else {
        // M <= 0 and N == 0: the base quadrature is the anti-squeezed one.
        base + m
    }
}

pub fn optimal_squeeze(
    plus: &NoiseTransfer,
    minus: &NoiseTransfer,
    correlator: &InputCorrelator,
) -> Squeeze {
    let c = symmetrized_covariance(plus, minus, correlator);
    let (a, b, d) = (c[0][0], c[0][1], c[1][1]);
    let mean = 0.5 * (a + d);
    let radius = (0.5 * (a - d)).hypot(b);
    // Major axis at 0.5 atan2(2b, a - d); the minimum is perpendicular to it.
    let major = 0.5 * (2.0 * b).atan2(a - d);
    Squeeze {
        s_min: mean - radius,
        theta_opt: wrap_angle(major + 0.5 * PI),
        s_max: mean + radius,
        s_min_closed_form: closed_form_minimum(squeeze_terms(&c, plus.coupling_kind)),
    }
}

/// Limiting squeezing `(n_th + 1/2) / (n + n_th + 1/2)`.
pub fn s_limit(n_ba_like: f64, n_th: f64) -> f64 {
    (n_th + 0.5) / (n_ba_like + n_th + 0.5)
}

/// Near-resonance approximation of the minimised spectrum at offset
/// `delta = omega_m - omega`:
/// `S_0 + [n_ba / (n_ba + n_th + 1/2)] / (1 + (2 delta / gamma_m)^2)`.
pub fn lorentzian_sm(delta: f64, n_ba: f64, n_th: f64, gamma_m: f64) -> f64 {
    let total = n_ba + n_th + 0.5;
    let x = 2.0 * delta / gamma_m;
    (n_th + 0.5) / total + n_ba / total / (1.0 + x * x)
}

/// Optomechanical cooperativity.
///
/// Dispersive: `G_omega^2 / (gamma_m gamma)`. Dissipative:
/// `G_gamma^2 / (gamma_m gamma) (2 omega / gamma)^2`, which needs `omega`.
/// Mixed coupling returns the sum of the two (exploratory).
pub fn cooperativity(
    params: &CavityParams,
    steady: &SteadyState,
    kind: CouplingKind,
    omega: Option<f64>,
) -> Result<f64> {
    let norm = params.gamma_m * params.gamma;
    let dispersive = steady.g_omega.powi(2) / norm;
    let dissipative = |w: Option<f64>| -> Result<f64> {
        let w = w.ok_or_else(|| {
            Error::Unsupported("dissipative cooperativity needs a frequency".into())
        })?;
        Ok(steady.g_gamma.powi(2) / norm * (2.0 * w / params.gamma).powi(2))
    };
    match kind {
        CouplingKind::Dispersive => Ok(dispersive),
        CouplingKind::Dissipative => dissipative(omega),
        CouplingKind::Mixed => Ok(dispersive + dissipative(omega)?),
    }
}

/// Cooperativity read back from a transfer matrix through the mechanical
/// noise column of the readout quadrature: `|T_rQ|^2 / (16 gamma_m^2 |chi|^2)`.
///
/// The readout row is `Y_out` for dispersive and `X_out` for dissipative
/// coupling.
pub fn readout_cooperativity(transfer: &NoiseTransfer, params: &CavityParams) -> Result<f64> {
    let row = match transfer.coupling_kind {
        CouplingKind::Dispersive => 1,
        CouplingKind::Dissipative => 0,
        CouplingKind::Mixed => {
            return Err(Error::Unsupported("readout row is ambiguous for mixed coupling".into()))
        }
    };
    let chi = susceptibility(transfer.omega, params).value;
    Ok(transfer.matrix[row][2].norm_sqr() / (16.0 * params.gamma_m.powi(2) * chi.norm_sqr()))
}

/// Ratio of the optical vacuum drive reaching the mechanics under
/// dissipative coupling to that under dispersive coupling, at equal effective
/// coupling. Equals `|2 omega / gamma|` for the linearised model.
///
/// Measured on the mechanical row of the full state response: the norm of
/// its optical-input columns.
pub fn backaction_reduction_factor(omega: f64, params: &CavityParams) -> Result<f64> {
    require_resonance(params)?;
    let g = (params.gamma * params.gamma_m).sqrt();
    let steady = SteadyState { a0: ONE, g_omega: g, g_gamma: g };
    let drive = |kind| -> Result<f64> {
        let v = state_response(omega, &steady, params, kind)?;
        Ok((v[2][0].norm_sqr() + v[2][1].norm_sqr()).sqrt())
    };
    Ok(drive(CouplingKind::Dissipative)? / drive(CouplingKind::Dispersive)?)
}

/// Tabulated spectra over a frequency grid.
#[derive(Debug, Clone, PartialEq)]
pub struct SqueezeSpectrum {
    pub grid: Vec<f64>,
    pub thetas: Vec<f64>,
    /// `s_zz[k][i]` is the even spectrum at `thetas[k]` and `grid[i]`.
    pub s_zz: Vec<Vec<f64>>,
    pub s_min: Vec<f64>,
    pub theta_opt: Vec<f64>,
    pub s_min_closed_form: Vec<f64>,
    /// Cooperativity of the active coupling at each frequency.
    pub n_ba_like: Vec<f64>,
    pub coupling_kind: CouplingKind,
    pub model: TransferModel,
    pub validated: bool,
}

/// Evaluates the even spectra, their minimum and optimal angle on `grid`.
///
/// Frequencies are independent and evaluated in parallel; results keep grid
/// order.
pub fn squeeze_spectrum(
    params: &CavityParams,
    steady: &SteadyState,
    kind: CouplingKind,
    model: TransferModel,
    grid: &[f64],
    thetas: &[f64],
) -> Result<SqueezeSpectrum> {
    params.validate()?;
    let correlator = InputCorrelator::new(params.n_th);
    struct Row {
        s_zz: Vec<f64>,
        squeeze: Squeeze,
        n_ba: f64,
        validated: bool,
    }
    let rows = grid
        .par_iter()
        .map(|&w| -> Result<Row> {
            let plus = transfer(model, w, steady, params, kind)?;
            let minus = transfer(model, -w, steady, params, kind)?;
            let cov = symmetrized_covariance(&plus, &minus, &correlator);
            Ok(Row {
                s_zz: thetas.iter().map(|&t| quadratic_form(&cov, [t.cos(), t.sin()])).collect(),
                squeeze: optimal_squeeze(&plus, &minus, &correlator),
                n_ba: cooperativity(params, steady, kind, Some(w))?,
                validated: plus.validated && minus.validated,
            })
        })
        .collect::<Result<Vec<_>>>()?;

    Ok(SqueezeSpectrum {
        grid: grid.to_vec(),
        thetas: thetas.to_vec(),
        s_zz: (0..thetas.len()).map(|k| rows.iter().map(|r| r.s_zz[k]).collect()).collect(),
        s_min: rows.iter().map(|r| r.squeeze.s_min).collect(),
        theta_opt: rows.iter().map(|r| r.squeeze.theta_opt).collect(),
        s_min_closed_form: rows.iter().map(|r| r.squeeze.s_min_closed_form).collect(),
        n_ba_like: rows.iter().map(|r| r.n_ba).collect(),
        coupling_kind: kind,
        model,
        validated: rows.iter().all(|r| r.validated),
    })
}

/// Default frequency grid: 501 points clustered logarithmically within
/// `omega_m +- 50 gamma_m`, merged with 301 linear points over
/// `[omega_m / 2, 2 omega_m]`.
pub fn default_frequency_grid(params: &CavityParams) -> Vec<f64> {
    let wm = params.omega_m;
    let span = 50.0 * params.gamma_m;
    let mut grid = vec![wm];
    for k in 0..250 {
        let offset = span * 10f64.powf(-4.0 + 4.0 * k as f64 / 249.0);
        grid.push(wm - offset);
        grid.push(wm + offset);
    }
    grid.extend(crate::stability::linspace(0.5 * wm, 2.0 * wm, 301));
    grid.retain(|w| *w > 0.0);
    grid.sort_by(|a, b| a.total_cmp(b));
    grid.dedup_by(|a, b| (*a - *b).abs() <= 1e-12 * b.abs());
    grid
}
