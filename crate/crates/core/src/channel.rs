//! Reference path loss with lognormal fading, and SNR-derived powers.
//!
//! All powers are in watts. Channel coefficients are linear power gains.

use std::f64::consts::LN_10;

use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};

/// Path-loss and shadow-fading parameters of one link class.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChannelParams {
    pub pl_intercept_db: f64,
    pub pl_exponent: f64,
    pub fading_std_db: f64,
}

impl ChannelParams {
    /// Line-of-sight defaults (0 dB intercept, exponent 2.5, 8.66 dB fading).
    pub const LOS: ChannelParams = ChannelParams {
        pl_intercept_db: 0.0,
        pl_exponent: 2.5,
        fading_std_db: 8.66,
    };

    /// Non-line-of-sight defaults (-25 dB intercept, exponent 5.76, 9.06 dB fading).
    pub const NLOS: ChannelParams = ChannelParams {
        pl_intercept_db: -25.0,
        pl_exponent: 5.76,
        fading_std_db: 9.06,
    };

    pub fn new(pl_intercept_db: f64, pl_exponent: f64, fading_std_db: f64) -> Result<Self> {
        let p = ChannelParams {
            pl_intercept_db,
            pl_exponent,
            fading_std_db,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !self.pl_intercept_db.is_finite() {
            return Err(Error::Domain("path loss intercept must be finite".into()));
        }
        if !(self.pl_exponent > 0.0 && self.pl_exponent.is_finite()) {
            return Err(Error::Domain("path loss exponent must be > 0".into()));
        }
        if !(self.fading_std_db >= 0.0 && self.fading_std_db.is_finite()) {
            return Err(Error::Domain("fading std must be >= 0".into()));
        }
        Ok(())
    }

    /// Copy with the fading standard deviation multiplied by `gamma`.
    pub fn with_fading_scale(&self, gamma: f64) -> ChannelParams {
        ChannelParams {
            fading_std_db: self.fading_std_db * gamma,
            ..*self
        }
    }

    /// Natural-log standard deviation of the fading gain.
    pub fn sigma_ln(&self) -> f64 {
        fading_sigma_ln(self.fading_std_db)
    }
}

/// SNR threshold, receiver noise and transmit power cap.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinkBudget {
    /// Linear SNR threshold.
    pub gamma_th: f64,
    /// Noise power in watts.
    pub noise_power: f64,
    /// Maximum source transmit power in watts.
    pub p_max: f64,
}

impl LinkBudget {
    pub fn new(gamma_th: f64, noise_power: f64, p_max: f64) -> Result<Self> {
        let b = LinkBudget {
            gamma_th,
            noise_power,
            p_max,
        };
        b.validate()?;
        Ok(b)
    }

    /// Builds a budget from configuration units: dB threshold, dBm noise, mW cap.
    pub fn from_config_units(gamma_th_db: f64, noise_dbm: f64, p_max_mw: f64) -> Result<Self> {
        Self::new(
            db_to_linear(gamma_th_db),
            dbm_to_watts(noise_dbm),
            p_max_mw * 1e-3,
        )
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("gamma_th", self.gamma_th),
            ("noise_power", self.noise_power),
            ("p_max", self.p_max),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::Domain(format!("{name} must be > 0, got {v}")));
            }
        }
        Ok(())
    }

    /// `gamma_th * noise_power`, the received power every link must reach.
    pub fn required_rx_power(&self) -> f64 {
        self.gamma_th * self.noise_power
    }
}

impl Default for LinkBudget {
    /// 33.18 dB threshold, -75 dBm noise, 100 mW cap.
    fn default() -> Self {
        LinkBudget::from_config_units(33.18, -75.0, 100.0).expect("default budget is valid")
    }
}

pub fn db_to_linear(x_db: f64) -> f64 {
    10f64.powf(x_db / 10.0)
}

pub fn linear_to_db(x: f64) -> f64 {
    10.0 * x.log10()
}

pub fn dbm_to_watts(x_dbm: f64) -> f64 {
    db_to_linear(x_dbm) * 1e-3
}

/// Converts a dB-domain fading standard deviation into the standard
/// deviation of the natural log of the linear gain.
pub fn fading_sigma_ln(fading_std_db: f64) -> f64 {
    LN_10 / 10.0 * fading_std_db
}

/// Deterministic path-loss gain at distance `d` (metres).
pub fn path_loss_linear(params: &ChannelParams, d: f64) -> Result<f64> {
    check_distance(d)?;
    Ok(db_to_linear(path_loss_db(params, d)))
}

fn path_loss_db(params: &ChannelParams, d: f64) -> f64 {
    params.pl_intercept_db - 10.0 * params.pl_exponent * d.log10()
}

fn check_distance(d: f64) -> Result<()> {
    if d > 0.0 && d.is_finite() {
        Ok(())
    } else {
        Err(Error::Domain(format!("link distance must be > 0, got {d}")))
    }
}

/// Draws one channel coefficient: path loss times a lognormal fading gain.
///
/// The fading term is subtracted in dB, so the gain is `exp(-sigma_ln * Z)`.
pub fn sample_channel<R: Rng + ?Sized>(params: &ChannelParams, d: f64, rng: &mut R) -> Result<f64> {
    let pl = path_loss_linear(params, d)?;
    let z: f64 = rng.sample(StandardNormal);
    Ok(pl * (-params.sigma_ln() * z).exp())
}

/// Transmit power needed to meet the SNR threshold over a link with gain `h`.
pub fn required_power(budget: &LinkBudget, h: f64) -> Result<f64> {
    if !(h > 0.0) {
        return Err(Error::Domain(format!(
            "channel coefficient must be > 0, got {h}"
        )));
    }
    Ok(budget.gamma_th * budget.noise_power / h)
}

/// Power harvested by a receiver from `p_wpt` watts of WPT signal.
pub fn harvested_power(alpha: f64, p_wpt: f64, a_r: f64, h_si: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&alpha) {
        return Err(Error::Domain(format!(
            "alpha must lie in [0, 1], got {alpha}"
        )));
    }
    if !(p_wpt >= 0.0) {
        return Err(Error::Domain(format!(
            "WPT power must be >= 0, got {p_wpt}"
        )));
    }
    if !(a_r > 0.0) {
        return Err(Error::Domain(format!("aperture must be > 0, got {a_r}")));
    }
    if !(h_si > 0.0) {
        return Err(Error::Domain(format!(
            "channel coefficient must be > 0, got {h_si}"
        )));
    }
    Ok(alpha * p_wpt * a_r * h_si)
}
