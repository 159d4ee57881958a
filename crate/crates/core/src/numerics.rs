//! Standard normal special functions and a bracketing bisection solver.

use std::f64::consts::{FRAC_1_SQRT_2, PI};

use crate::error::{Error, Result};

/// 1/sqrt(2*pi)
const INV_SQRT_2PI: f64 = 0.398_942_280_401_432_7;

/// Above this argument the Mills ratio is evaluated by continued fraction.
const MILLS_CF_THRESHOLD: f64 = 30.0;
const MILLS_CF_TERMS: usize = 64;

/// Controls for [`bisect`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BisectionSpec {
    pub lo: f64,
    pub hi: f64,
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_iter: usize,
}

impl BisectionSpec {
    pub fn new(lo: f64, hi: f64, abs_tol: f64, rel_tol: f64, max_iter: usize) -> Result<Self> {
        let spec = BisectionSpec {
            lo,
            hi,
            abs_tol,
            rel_tol,
            max_iter,
        };
        spec.validate()?;
        Ok(spec)
    }

    /// Same tolerances on a new interval.
    pub fn with_bounds(&self, lo: f64, hi: f64) -> Result<Self> {
        Self::new(lo, hi, self.abs_tol, self.rel_tol, self.max_iter)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.lo.is_finite() && self.hi.is_finite() && self.lo < self.hi) {
            return Err(Error::Domain(format!(
                "bisection interval [{}, {}] must be finite with lo < hi",
                self.lo, self.hi
            )));
        }
        if !(self.abs_tol > 0.0) {
            return Err(Error::Domain("abs_tol must be > 0".into()));
        }
        if !(self.rel_tol >= 0.0) {
            return Err(Error::Domain("rel_tol must be >= 0".into()));
        }
        if self.max_iter < 1 {
            return Err(Error::Domain("max_iter must be >= 1".into()));
        }
        Ok(())
    }
}

impl Default for BisectionSpec {
    /// Watt-scale tolerances on the unit interval.
    fn default() -> Self {
        BisectionSpec {
            lo: 0.0,
            hi: 1.0,
            abs_tol: 1e-12,
            rel_tol: 1e-10,
            max_iter: 200,
        }
    }
}

pub fn std_normal_pdf(z: f64) -> f64 {
    INV_SQRT_2PI * (-0.5 * z * z).exp()
}

/// Standard normal CDF through the complementary error function, which keeps
/// full relative precision in the lower tail.
pub fn std_normal_cdf(z: f64) -> f64 {
    0.5 * libm::erfc(-z * FRAC_1_SQRT_2)
}

/// Upper tail `1 - Phi(z)` without cancellation.
pub fn std_normal_sf(z: f64) -> f64 {
    0.5 * libm::erfc(z * FRAC_1_SQRT_2)
}

/// Mills ratio `(1 - Phi(z)) / phi(z)` of the standard normal.
///
/// For `z > 30` both numerator and denominator are below 1e-195 and
/// underflow shortly after, so the Laplace continued fraction
/// `1/(z + 1/(z + 2/(z + 3/(z + ...))))` is used instead. For very negative
/// `z` the ratio overflows to `+inf`.
pub fn mills_ratio(z: f64) -> f64 {
    if z > MILLS_CF_THRESHOLD {
        let mut t = z;
        for k in (1..=MILLS_CF_TERMS).rev() {
            t = z + k as f64 / t;
        }
        1.0 / t
    } else {
        std_normal_sf(z) / std_normal_pdf(z)
    }
}

/// Finds `x` in `[spec.lo, spec.hi]` with `f(x) = target` for strictly
/// increasing `f`.
///
/// Terminates once the bracket width is below `abs_tol + rel_tol * |x|`.
pub fn bisect<F>(f: F, target: f64, spec: &BisectionSpec) -> Result<f64>
where
    F: Fn(f64) -> f64,
{
    spec.validate()?;
    let (mut lo, mut hi) = (spec.lo, spec.hi);
    let (f_lo, f_hi) = (f(lo), f(hi));
    if !(f_lo <= target && target <= f_hi) {
        return Err(Error::Bracket { target, f_lo, f_hi });
    }
    if f_lo == target {
        return Ok(lo);
    }
    if f_hi == target {
        return Ok(hi);
    }
    for _ in 0..spec.max_iter {
        let mid = lo + 0.5 * (hi - lo);
        if hi - lo <= spec.abs_tol + spec.rel_tol * mid.abs() {
            return Ok(mid);
        }
        let f_mid = f(mid);
        if f_mid == target {
            return Ok(mid);
        }
        if f_mid < target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Err(Error::NoConvergence {
        iterations: spec.max_iter,
    })
}

/// `sqrt(pi/2)`, the Mills ratio at zero.
pub fn mills_ratio_at_zero() -> f64 {
    (PI / 2.0).sqrt()
}
