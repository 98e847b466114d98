//! Routh-Hurwitz test on the coefficients of a real polynomial.

/// Outcome of the Routh table.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RouthVerdict {
    /// Every root has a strictly negative real part.
    Stable,
    /// At least one root has a positive real part.
    Unstable,
    /// A zero pivot or a vanishing row appeared and no sign change was found:
    /// roots sit on (or numerically at) the imaginary axis.
    Marginal,
}

impl RouthVerdict {
    pub fn is_stable(self) -> bool {
        self == RouthVerdict::Stable
    }
}

/// Pivots below this fraction of the local row scale count as zero.
const ZERO_PIVOT: f64 = 16.0 * f64::EPSILON;
/// Relative size of the replacement for a zero pivot.
const EPSILON_PIVOT: f64 = 1e-9;

/// Builds the Routh table for `coeffs` (descending powers) and reads the
/// number of sign changes in its first column.
///
/// A zero first-column entry is replaced by a small positive multiple of the
/// row scale. A row that vanishes entirely is replaced by the derivative of
/// the auxiliary polynomial formed from the row above. Either event makes the
/// result [`RouthVerdict::Marginal`] unless a sign change proves instability.
pub fn routh_hurwitz(coeffs: &[f64]) -> RouthVerdict {
    let Some(first) = coeffs.iter().position(|c| *c != 0.0) else {
        return RouthVerdict::Marginal;
    };
    let sign = coeffs[first].signum();
    let poly: Vec<f64> = coeffs[first..].iter().map(|c| c * sign).collect();
    let degree = poly.len() - 1;
    if degree == 0 {
        return RouthVerdict::Stable;
    }

    let width = degree / 2 + 1;
    let mut upper: Vec<f64> = (0..width).map(|j| poly.get(2 * j).copied().unwrap_or(0.0)).collect();
    let mut lower: Vec<f64> = (0..width).map(|j| poly.get(2 * j + 1).copied().unwrap_or(0.0)).collect();

    let mut marginal = false;
    let mut first_column = vec![upper[0]];

    // `upper` corresponds to power `degree - row`; rows run down to power 0.
    for row in 1..=degree {
        let scale = upper.iter().chain(lower.iter()).fold(0.0_f64, |m, v| m.max(v.abs()));
        if lower.iter().all(|v| v.abs() <= ZERO_PIVOT * scale) {
            // Auxiliary polynomial from `upper`, whose powers step by two
            // starting at `degree - row + 1`.
            marginal = true;
            let top_power = degree + 1 - row;
            lower = upper
                .iter()
                .enumerate()
                .map(|(j, v)| {
                    let power = top_power as i64 - 2 * j as i64;
                    if power > 0 {
                        v * power as f64
                    } else {
                        0.0
                    }
                })
                .collect();
        }
        let scale = upper.iter().chain(lower.iter()).fold(0.0_f64, |m, v| m.max(v.abs()));
        if lower[0].abs() <= ZERO_PIVOT * scale {
            marginal = true;
            lower[0] = EPSILON_PIVOT * scale.max(f64::MIN_POSITIVE);
        }
        first_column.push(lower[0]);
        if row == degree {
            break;
        }
        let next: Vec<f64> = (0..width)
            .map(|j| {
                let a = upper.get(j + 1).copied().unwrap_or(0.0);
                let b = lower.get(j + 1).copied().unwrap_or(0.0);
                (lower[0] * a - upper[0] * b) / lower[0]
            })
            .collect();
        upper = std::mem::replace(&mut lower, next);
    }

    let sign_changes = first_column.windows(2).filter(|w| (w[0] > 0.0) != (w[1] > 0.0)).count();
    if sign_changes > 0 {
        RouthVerdict::Unstable
    } else if marginal {
        RouthVerdict::Marginal
    } else {
        RouthVerdict::Stable
    }
}
