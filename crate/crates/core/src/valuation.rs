//! Relay candidates' private valuations and their virtual valuations.
//!
//! A candidate's valuation is the smallest total source power that makes
//! relaying break even for it. Seen from the source, only the small-scale
//! fading `H` of the candidate-to-AP link is unknown, so the valuation is
//! `p_si + k / H` with `H` lognormal. Everything below works with the
//! standardized fading coordinate `z = ln(H) / sigma_ln`, where
//! `H = k / (v - p_si)`; large valuations correspond to negative `z`.

use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::numerics::{bisect, mills_ratio, std_normal_pdf, std_normal_sf, BisectionSpec};

/// Cap on the number of bracket doublings in [`ValuationModel::inverse_virtual_valuation`].
const MAX_BRACKET_DOUBLINGS: i32 = 128;

/// Minimum total source power that lets a candidate cover its own relay
/// transmission from harvested energy.
pub fn min_inducement_power(p_si: f64, p_i: f64, alpha: f64, a_r: f64, h_si: f64) -> Result<f64> {
    for (name, v) in [
        ("p_si", p_si),
        ("p_i", p_i),
        ("alpha", alpha),
        ("a_r", a_r),
        ("h_si", h_si),
    ] {
        if !(v > 0.0) {
            return Err(Error::Domain(format!("{name} must be > 0, got {v}")));
        }
    }
    if alpha > 1.0 {
        return Err(Error::Domain(format!("alpha must be <= 1, got {alpha}")));
    }
    Ok(p_si + p_i / (alpha * a_r * h_si))
}

/// A realized valuation in watts.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct Valuation(pub f64);

impl Valuation {
    pub fn value(self) -> f64 {
        self.0
    }
}

/// The source's belief about one candidate's valuation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ValuationModel {
    /// Source-to-candidate communication power (W).
    pub p_si: f64,
    /// `gamma_th * noise / (H_PL,i * alpha * A_r * H_si)` (W).
    pub k: f64,
    /// Natural-log standard deviation of the candidate's fading gain.
    pub sigma_ln: f64,
}

impl ValuationModel {
    pub fn new(p_si: f64, k: f64, sigma_ln: f64) -> Result<Self> {
        for (name, v) in [("p_si", p_si), ("k", k), ("sigma_ln", sigma_ln)] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::Domain(format!(
                    "valuation model needs {name} > 0, got {v}"
                )));
            }
        }
        Ok(ValuationModel { p_si, k, sigma_ln })
    }

    /// Builds the model from the physical quantities the source knows.
    ///
    /// `rx_power` is `gamma_th * noise_power`; `h_pl_i` is the deterministic
    /// path loss of the candidate-to-AP link.
    pub fn from_physical(
        rx_power: f64,
        h_si: f64,
        h_pl_i: f64,
        alpha: f64,
        a_r: f64,
        sigma_ln: f64,
    ) -> Result<Self> {
        for (name, v) in [
            ("rx_power", rx_power),
            ("h_si", h_si),
            ("h_pl_i", h_pl_i),
            ("alpha", alpha),
            ("a_r", a_r),
        ] {
            if !(v > 0.0) {
                return Err(Error::Domain(format!("{name} must be > 0, got {v}")));
            }
        }
        Self::new(
            rx_power / h_si,
            rx_power / (h_pl_i * alpha * a_r * h_si),
            sigma_ln,
        )
    }

    /// Valuation produced by a fading realization `h_ss`.
    pub fn valuation_of_fading(&self, h_ss: f64) -> f64 {
        self.p_si + self.k / h_ss
    }

    fn check_support(&self, v: f64) -> Result<()> {
        if v > self.p_si && v.is_finite() {
            Ok(())
        } else {
            Err(Error::Support {
                value: v,
                p_si: self.p_si,
            })
        }
    }

    /// Standardized fading coordinate of valuation `v`; caller checks support.
    fn z_of(&self, v: f64) -> f64 {
        (self.k / (v - self.p_si)).ln() / self.sigma_ln
    }

    /// Fading realization that yields valuation `v`.
    pub fn hss_of_valuation(&self, v: f64) -> Result<f64> {
        self.check_support(v)?;
        Ok(self.k / (v - self.p_si))
    }

    pub fn pdf(&self, v: f64) -> f64 {
        if !(v > self.p_si) || v.is_infinite() {
            return 0.0;
        }
        std_normal_pdf(self.z_of(v)) / (self.sigma_ln * (v - self.p_si))
    }

    /// `P(V <= v)`, which is the upper tail of the fading coordinate.
    pub fn cdf(&self, v: f64) -> f64 {
        if !(v > self.p_si) {
            return 0.0;
        }
        if v.is_infinite() {
            return 1.0;
        }
        std_normal_sf(self.z_of(v))
    }

    /// `c(v) = v + F(v)/f(v)`, evaluated as `v + sigma_ln (v - p_si) R(z)`
    /// with `R` the Mills ratio.
    pub fn virtual_valuation(&self, v: f64) -> Result<f64> {
        self.check_support(v)?;
        Ok(self.virtual_unchecked(v))
    }

    fn virtual_unchecked(&self, v: f64) -> f64 {
        let z = self.z_of(v);
        v + self.sigma_ln * (v - self.p_si) * mills_ratio(z)
    }

    /// `dc/dv = 2 + R(z) (sigma_ln - z)`.
    pub fn virtual_valuation_derivative(&self, v: f64) -> Result<f64> {
        self.check_support(v)?;
        let z = self.z_of(v);
        Ok(2.0 + mills_ratio(z) * (self.sigma_ln - z))
    }

    /// Solves `c(s) = target` for `s` by bisection.
    ///
    /// The bracket starts at `[p_si (1 + 1e-15) + 1e-18, p_si + k]` and the
    /// upper end is pushed to `p_si + 2^m k` until it covers the target.
    /// Targets below the virtual value of the lower end return the lower end.
    pub fn inverse_virtual_valuation(&self, target: f64, spec: &BisectionSpec) -> Result<f64> {
        if !(target > self.p_si) || target.is_nan() {
            return Err(Error::Range {
                target,
                p_si: self.p_si,
            });
        }
        let lower = self.p_si * (1.0 + 1e-15) + 1e-18;
        if self.virtual_unchecked(lower) >= target {
            return Ok(lower);
        }
        let mut m = 0;
        let mut upper = self.p_si + self.k;
        while self.virtual_unchecked(upper) < target {
            m += 1;
            if m > MAX_BRACKET_DOUBLINGS {
                return Err(Error::NoConvergence {
                    iterations: MAX_BRACKET_DOUBLINGS as usize,
                });
            }
            upper = self.p_si + 2f64.powi(m) * self.k;
        }
        let spec = spec.with_bounds(lower, upper)?;
        bisect(|s| self.virtual_unchecked(s), target, &spec)
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Valuation {
        let z: f64 = rng.sample(StandardNormal);
        Valuation(self.valuation_of_fading((self.sigma_ln * z).exp()))
    }
}
