//! Simultaneous polynomial root finding (Aberth-Ehrlich) with Newton polish.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};

const MAX_ITERATIONS: usize = 500;

/// Evaluates `p(z)` and `p'(z)` by Horner's scheme.
///
/// Coefficients are in descending powers.
fn eval_with_derivative(coeffs: &[f64], z: Complex64) -> (Complex64, Complex64) {
    let mut p = Complex64::new(coeffs[0], 0.0);
    let mut dp = Complex64::new(0.0, 0.0);
    for &c in &coeffs[1..] {
        dp = dp * z + p;
        p = p * z + c;
    }
    (p, dp)
}

/// Rounding-error bound on evaluating `p` at `z`: `sum |a_i| |z|^i`.
fn eval_bound(coeffs: &[f64], z: Complex64) -> f64 {
    let r = z.norm();
    coeffs.iter().fold(0.0, |acc, c| acc * r + c.abs())
}

/// All complex roots of a real polynomial given in descending powers.
///
/// Iteration stops once every root is either stationary to rounding or has a
/// residual at the rounding level of the evaluation, which also covers
/// multiple roots where convergence is only linear. Fails with
/// [`Error::NoConvergence`] rather than returning unconverged roots.
pub fn polynomial_roots(coeffs: &[f64]) -> Result<Vec<Complex64>> {
    let first = coeffs.iter().position(|c| *c != 0.0).ok_or_else(|| {
        Error::Unsupported("the zero polynomial has no well-defined roots".into())
    })?;
    let lead = coeffs[first];
    let monic: Vec<f64> = coeffs[first..].iter().map(|c| c / lead).collect();
    let degree = monic.len() - 1;
    if degree == 0 {
        return Ok(Vec::new());
    }

    // Initial guesses on a circle bounded by the Fujiwara radius, with an
    // irrational angular offset so that no guess sits on the real axis.
    let radius = monic[1..]
        .iter()
        .enumerate()
        .map(|(i, c)| (c.abs()).powf(1.0 / (i + 1) as f64))
        .fold(0.0_f64, f64::max)
        .max(f64::MIN_POSITIVE.sqrt());
    let mut roots: Vec<Complex64> = (0..degree)
        .map(|k| Complex64::from_polar(radius, 2.0 * PI * k as f64 / degree as f64 + 0.4))
        .collect();

    let eps = f64::EPSILON;
    let mut converged = vec![false; degree];
    let mut iterations = 0;
    while converged.iter().any(|c| !c) {
        if iterations == MAX_ITERATIONS {
            return Err(Error::NoConvergence { iterations });
        }
        iterations += 1;
        for k in 0..degree {
            if converged[k] {
                continue;
            }
            let z = roots[k];
            let (p, dp) = eval_with_derivative(&monic, z);
            if p.norm() <= 8.0 * eps * eval_bound(&monic, z) {
                converged[k] = true;
                continue;
            }
            let ratio = p / dp;
            let repulsion: Complex64 = roots
                .iter()
                .enumerate()
                .filter(|(j, _)| *j != k)
                .map(|(_, zj)| (z - zj).inv())
                .sum();
            let step = ratio / (Complex64::new(1.0, 0.0) - ratio * repulsion);
            if !step.is_finite() {
                return Err(Error::NoConvergence { iterations });
            }
            roots[k] = z - step;
            if step.norm() <= 4.0 * eps * roots[k].norm() {
                converged[k] = true;
            }
        }
    }

    for root in roots.iter_mut() {
        polish(&monic, root);
    }
    Ok(roots)
}

/// A few Newton steps, each kept only if it lowers the residual.
fn polish(coeffs: &[f64], root: &mut Complex64) {
    for _ in 0..3 {
        let (p, dp) = eval_with_derivative(coeffs, *root);
        if dp.norm() == 0.0 {
            return;
        }
        let candidate = *root - p / dp;
        let (pc, _) = eval_with_derivative(coeffs, candidate);
        if pc.is_finite() && pc.norm() < p.norm() {
            *root = candidate;
        } else {
            return;
        }
    }
}

/// Largest real part among the roots.
pub fn max_real_part(coeffs: &[f64]) -> Result<f64> {
    Ok(polynomial_roots(coeffs)?.iter().map(|z| z.re).fold(f64::NEG_INFINITY, f64::max))
}
