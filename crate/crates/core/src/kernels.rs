//! Helmholtz fundamental solution `G_α(r) = e^{iαr}/(4πr)` and its pieces.

use std::f64::consts::PI;

use crate::{BemError, CVec3, Complex64, Result, Vec3};

/// Below this value of `αr` the smooth remainder is summed as a series.
pub const TAU_SWITCH: f64 = 0.5;

/// Series length giving a truncation error below `1e-16` at `αr = TAU_SWITCH`.
pub const DEFAULT_TAYLOR_TERMS: usize = 16;

const FOUR_PI_INV: f64 = 1.0 / (4.0 * PI);

/// Wavenumbers of the exterior and conducting regions.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WaveParams {
    pub alpha: f64,
    pub beta: f64,
    pub taylor_terms: usize,
}

impl WaveParams {
    pub fn new(alpha: f64, beta: f64) -> Result<Self> {
        if !(alpha > 0.0 && alpha.is_finite()) {
            return Err(BemError::InvalidArgument(format!("alpha must be positive, got {alpha}")));
        }
        if !(beta > 0.0 && beta.is_finite()) {
            return Err(BemError::InvalidArgument(format!("beta must be positive, got {beta}")));
        }
        Ok(WaveParams { alpha, beta, taylor_terms: DEFAULT_TAYLOR_TERMS })
    }
}

/// `e^{iαr}/(4πr)`.
pub fn helmholtz_kernel(alpha: f64, r: f64) -> Result<Complex64> {
    if !(r > 0.0) {
        return Err(BemError::Coincident);
    }
    Ok(green(alpha, r))
}

/// Unchecked kernel for quadrature loops where `r > 0` is guaranteed.
#[inline(always)]
pub fn green(alpha: f64, r: f64) -> Complex64 {
    let (s, c) = (alpha * r).sin_cos();
    Complex64::new(c, s) * (FOUR_PI_INV / r)
}

/// Splits `G_α` into the Laplace part `1/(4πr)` and the bounded remainder.
///
/// The singular part is `+∞` at `r = 0`.
pub fn kernel_split(alpha: f64, r: f64) -> (f64, Complex64) {
    kernel_split_terms(alpha, r, DEFAULT_TAYLOR_TERMS)
}

pub fn kernel_split_terms(alpha: f64, r: f64, terms: usize) -> (f64, Complex64) {
    let singular = if r > 0.0 { FOUR_PI_INV / r } else { f64::INFINITY };
    (singular, smooth_part(alpha, r, terms))
}

/// `(e^{iαr} − 1)/(4πr)`, equal to `iα/(4π)` at `r = 0`.
pub fn smooth_part(alpha: f64, r: f64, terms: usize) -> Complex64 {
    if (alpha * r).abs() < TAU_SWITCH {
        smooth_series(alpha, r, terms)
    } else {
        smooth_closed(alpha, r)
    }
}

/// `(iα/4π) Σ_k (iαr)^k / (k+1)!`, summed by Horner from the tail.
fn smooth_series(alpha: f64, r: f64, terms: usize) -> Complex64 {
    let iz = Complex64::new(0.0, alpha * r);
    let mut sum = Complex64::new(0.0, 0.0);
    for k in (0..terms.max(2)).rev() {
        sum = Complex64::new(1.0, 0.0) + sum * iz / (k as f64 + 2.0);
    }
    Complex64::new(0.0, alpha * FOUR_PI_INV) * sum
}

fn smooth_closed(alpha: f64, r: f64) -> Complex64 {
    let z = alpha * r;
    // e^{iz} − 1 = −2 sin²(z/2) + i sin z avoids cancellation in the real part.
    let h = (0.5 * z).sin();
    Complex64::new(-2.0 * h * h, z.sin()) * (FOUR_PI_INV / r)
}

/// `grad_x G_α(|x − y|) = (iαr − 1) e^{iαr} (x − y) / (4π r³)`.
pub fn kernel_gradient(alpha: f64, x: &Vec3, y: &Vec3) -> Result<CVec3> {
    let d = x - y;
    let r = d.norm();
    if !(r > 0.0) {
        return Err(BemError::Coincident);
    }
    let g = gradient_factor(alpha, r);
    Ok(d.map(|c| g * c))
}

/// Scalar factor `(iαr − 1) e^{iαr} / (4π r³)` multiplying `x − y`.
#[inline(always)]
pub fn gradient_factor(alpha: f64, r: f64) -> Complex64 {
    let (s, c) = (alpha * r).sin_cos();
    Complex64::new(-1.0, alpha * r) * Complex64::new(c, s) * (FOUR_PI_INV / (r * r * r))
}
