//! Physical parameters, classical steady state and mechanical response.

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Which optomechanical coupling channel is active.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CouplingKind {
    /// Mirror position shifts the cavity resonance.
    Dispersive,
    /// Mirror position modulates the cavity decay rate.
    Dissipative,
    /// Both channels summed. Exploratory only: results are marked unvalidated.
    Mixed,
}

impl CouplingKind {
    pub fn as_str(self) -> &'static str {
        match self {
            CouplingKind::Dispersive => "dispersive",
            CouplingKind::Dissipative => "dissipative",
            CouplingKind::Mixed => "mixed",
        }
    }
}

impl fmt::Display for CouplingKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for CouplingKind {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "dispersive" => Ok(CouplingKind::Dispersive),
            "dissipative" => Ok(CouplingKind::Dissipative),
            "mixed" => Ok(CouplingKind::Mixed),
            other => Err(format!(
                "unknown coupling kind `{other}` (expected dispersive, dissipative or mixed)"
            )),
        }
    }
}

/// Rates, frequencies, couplings and drive of the cavity.
///
/// Rates are angular (rad/s, or any consistent unit). `drive_amplitude` is the
/// classical input amplitude in sqrt(photons per unit time) and is real by
/// convention, which fixes the phase reference of the quadratures.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CavityParams {
    /// Optical (cavity) decay rate.
    pub gamma: f64,
    /// Mechanical decay rate.
    pub gamma_m: f64,
    /// Mechanical resonance frequency.
    pub omega_m: f64,
    /// Laser detuning from the cavity, laser minus cavity. Positive is blue.
    pub delta: f64,
    /// Bare dispersive coupling per zero-point displacement.
    pub g_omega: f64,
    /// Bare dissipative coupling per zero-point displacement.
    pub g_gamma: f64,
    pub drive_amplitude: f64,
    /// Thermal occupancy of the mechanical bath.
    pub n_th: f64,
}

impl CavityParams {
    /// Undriven, uncoupled, resonant cavity at zero temperature.
    pub fn new(gamma: f64, gamma_m: f64, omega_m: f64) -> Self {
        Self {
            gamma,
            gamma_m,
            omega_m,
            delta: 0.0,
            g_omega: 0.0,
            g_gamma: 0.0,
            drive_amplitude: 0.0,
            n_th: 0.0,
        }
    }

    pub fn with_delta(mut self, delta: f64) -> Self {
        self.delta = delta;
        self
    }

    pub fn with_n_th(mut self, n_th: f64) -> Self {
        self.n_th = n_th;
        self
    }

    pub fn with_couplings(mut self, g_omega: f64, g_gamma: f64) -> Self {
        self.g_omega = g_omega;
        self.g_gamma = g_gamma;
        self
    }

    pub fn with_drive(mut self, drive_amplitude: f64) -> Self {
        self.drive_amplitude = drive_amplitude;
        self
    }

    pub fn validate(&self) -> Result<()> {
        fn finite(name: &'static str, v: f64) -> Result<()> {
            if v.is_finite() {
                Ok(())
            } else {
                Err(Error::InvalidParameter { name, reason: format!("must be finite, got {v}") })
            }
        }
        fn positive(name: &'static str, v: f64) -> Result<()> {
            finite(name, v)?;
            if v > 0.0 {
                Ok(())
            } else {
                Err(Error::InvalidParameter { name, reason: format!("must be > 0, got {v}") })
            }
        }

        positive("gamma", self.gamma)?;
        positive("gamma_m", self.gamma_m)?;
        positive("omega_m", self.omega_m)?;
        finite("delta", self.delta)?;
        finite("g_omega", self.g_omega)?;
        finite("g_gamma", self.g_gamma)?;
        finite("drive_amplitude", self.drive_amplitude)?;
        finite("n_th", self.n_th)?;
        if self.gamma_m >= self.omega_m {
            return Err(Error::InvalidParameter {
                name: "gamma_m",
                reason: format!(
                    "mechanics must be underdamped (gamma_m < omega_m), got gamma_m = {} >= omega_m = {}",
                    self.gamma_m, self.omega_m
                ),
            });
        }
        if self.drive_amplitude < 0.0 {
            return Err(Error::InvalidParameter {
                name: "drive_amplitude",
                reason: format!("must be >= 0, got {}", self.drive_amplitude),
            });
        }
        if self.n_th < 0.0 {
            return Err(Error::InvalidParameter {
                name: "n_th",
                reason: format!("must be >= 0, got {}", self.n_th),
            });
        }
        Ok(())
    }

    /// The same system expressed in units where `omega_m == 1`.
    ///
    /// Rates and couplings divide by `omega_m`; the drive amplitude, a square
    /// root of a rate, divides by `sqrt(omega_m)`.
    pub fn normalized(&self) -> CavityParams {
        let w = self.omega_m;
        CavityParams {
            gamma: self.gamma / w,
            gamma_m: self.gamma_m / w,
            omega_m: 1.0,
            delta: self.delta / w,
            g_omega: self.g_omega / w,
            g_gamma: self.g_gamma / w,
            drive_amplitude: self.drive_amplitude / w.sqrt(),
            n_th: self.n_th,
        }
    }
}

/// Classical intracavity amplitude and the effective couplings it produces.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SteadyState {
    pub a0: Complex64,
    /// Effective dispersive coupling `2 g_omega |a0|`.
    pub g_omega: f64,
    /// Effective dissipative coupling `g_gamma |a0|`.
    pub g_gamma: f64,
}

impl SteadyState {
    /// Steady state of `params` with the effective couplings replaced.
    ///
    /// Useful when a model is specified by its effective couplings directly.
    /// `a0` still follows from the drive, so the couplings no longer need to
    /// equal `2 g_omega |a0|` and `g_gamma |a0|`.
    pub fn with_effective_couplings(params: &CavityParams, g_omega: f64, g_gamma: f64) -> Result<Self> {
        let mut steady = steady_state(params)?;
        steady.g_omega = g_omega;
        steady.g_gamma = g_gamma;
        Ok(steady)
    }

    /// Effective coupling of the active channel(s), as `(dispersive, dissipative)`.
    pub fn couplings_for(&self, kind: CouplingKind) -> (f64, f64) {
        match kind {
            CouplingKind::Dispersive => (self.g_omega, 0.0),
            CouplingKind::Dissipative => (0.0, self.g_gamma),
            CouplingKind::Mixed => (self.g_omega, self.g_gamma),
        }
    }
}

/// Lowest-order steady state: `(gamma/2 - i delta) a0 = sqrt(gamma) A0`.
pub fn steady_state(params: &CavityParams) -> Result<SteadyState> {
    if params.gamma.is_nan() || params.gamma <= 0.0 {
        return Err(Error::InvalidParameter {
            name: "gamma",
            reason: format!("must be > 0, got {}", params.gamma),
        });
    }
    let denom = Complex64::new(params.gamma / 2.0, -params.delta);
    let a0 = Complex64::new(params.gamma.sqrt() * params.drive_amplitude, 0.0) / denom;
    let amp = a0.norm();
    Ok(SteadyState { a0, g_omega: 2.0 * params.g_omega * amp, g_gamma: params.g_gamma * amp })
}

/// Mechanical susceptibility at one frequency.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Susceptibility {
    pub value: Complex64,
}

impl Susceptibility {
    pub fn inverse(&self) -> Complex64 {
        self.value.inv()
    }
}

/// `chi(omega)^-1 = (omega_m^2 - omega^2 - i gamma_m omega) / omega_m`.
pub fn susceptibility(omega: f64, params: &CavityParams) -> Susceptibility {
    let wm = params.omega_m;
    let inv = Complex64::new(wm * wm - omega * omega, -params.gamma_m * omega) / wm;
    Susceptibility { value: inv.inv() }
}

/// Bose-Einstein occupancy `1 / (exp(quantum / T) - 1)`.
///
/// `temperature` and `quantum` (the mechanical energy quantum) must share an
/// energy unit. Zero temperature gives zero occupancy.
pub fn thermal_occupancy(temperature: f64, quantum: f64) -> f64 {
    if temperature <= 0.0 {
        return 0.0;
    }
    (quantum / temperature).exp_m1().recip()
}
