//! Closed-form secrecy-rate machinery: binary entropy, Gaussian CDF,
//! erasure/error channel rates and the two scheme bounds.

use crate::classifier::{MisclassProfile, TdmDetectionProfile};
use crate::error::{Error, Result};
use crate::model::GeometryConfig;
use serde::{Deserialize, Serialize};

/// Forward-error-correction assumption for the legitimate link.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum FecMode {
    /// Raw hard-decision error probability.
    Off,
    /// Coding is assumed to clean the legitimate link whenever the
    /// received SNR is at or above `snr_threshold`.
    Ideal { snr_threshold: f64 },
}

impl Default for FecMode {
    fn default() -> Self {
        FecMode::Ideal { snr_threshold: 0.0 }
    }
}

const CLAMP: f64 = 1e-9;

/// Binary entropy in bits, with `0 log 0 = 0`. Arguments within `1e-9`
/// of `[0, 1]` are clamped; anything farther out is a hard error so
/// rounding noise and logic bugs stay distinguishable.
pub fn binary_entropy(p: f64) -> Result<f64> {
    if !(-CLAMP..=1.0 + CLAMP).contains(&p) {
        return Err(Error::Domain(format!("entropy argument {p} outside [0,1]")));
    }
    let p = p.clamp(0.0, 1.0);
    if p == 0.0 || p == 1.0 {
        return Ok(0.0);
    }
    Ok(-p * p.log2() - (1.0 - p) * (1.0 - p).log2())
}

/// Standard normal CDF.
pub fn phi(x: f64) -> f64 {
    0.5 * libm::erfc(-x / std::f64::consts::SQRT_2)
}

/// Hard-decision symbol error probability on the legitimate link:
/// `1 - phi(sqrt(rho / d^alpha))`, or zero under ideal FEC at or above
/// its SNR threshold.
pub fn legit_error_prob(rho: f64, d_ab: f64, alpha: f64, fec: FecMode) -> Result<f64> {
    if !(d_ab > 0.0) {
        return Err(Error::Domain(format!("d_ab must be > 0, got {d_ab}")));
    }
    if !(rho >= 0.0) {
        return Err(Error::Domain(format!("rho must be >= 0, got {rho}")));
    }
    let snr = rho / d_ab.powf(alpha);
    if let FecMode::Ideal { snr_threshold } = fec {
        if snr >= snr_threshold {
            return Ok(0.0);
        }
    }
    Ok(1.0 - phi(snr.sqrt()))
}

/// Rate of a binary channel with erasure fraction `alpha_erase` and
/// conditional error probability `p_e`:
/// `(1 - alpha_erase)(1 - H(p_e))`.
pub fn erasure_channel_rate(alpha_erase: f64, p_e: f64) -> Result<f64> {
    if !(-CLAMP..=1.0 + CLAMP).contains(&alpha_erase) {
        return Err(Error::Domain(format!("erasure fraction {alpha_erase} outside [0,1]")));
    }
    Ok((1.0 - alpha_erase.clamp(0.0, 1.0)) * (1.0 - binary_entropy(p_e)?))
}

/// All intermediate quantities of the TDM (one-way with randomized
/// feedback) bound.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RateBreakdownTdm {
    pub alpha_m: f64,
    pub alpha_e: f64,
    pub p_e_m: f64,
    pub p_e_e: f64,
    pub r_m: f64,
    pub r_e: f64,
    /// `[r_m - r_e]^+`, before the 0.5 time-division factor and max-min.
    pub r_s: f64,
}

/// All intermediate quantities of the two-way randomized-scheduling bound.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RateBreakdownTwoWay {
    pub r_m: f64,
    pub d_a: f64,
    pub d_b: f64,
    pub p_e_ea: f64,
    pub p_e_eb: f64,
    pub r_ea: f64,
    pub r_eb: f64,
    /// `[r_m - max(r_ea, r_eb)]^+`.
    pub r_s: f64,
}

/// TDM secrecy-rate breakdown at feedback probability `beta`.
pub fn tdm_bounds(
    beta: f64,
    prof: &TdmDetectionProfile,
    geom: &GeometryConfig,
    rho_min: f64,
    fec: FecMode,
) -> Result<RateBreakdownTdm> {
    if !(0.0..=1.0).contains(&beta) {
        return Err(Error::Domain(format!("beta = {beta} outside [0,1]")));
    }
    prof.validate()?;
    let p_m = prof.p_m.clamp(0.0, 1.0);
    let p_f = prof.p_f.clamp(0.0, 1.0);

    let alpha_m = beta;
    let p_e_m = legit_error_prob(rho_min, geom.d_ab, geom.alpha, fec)?;
    let r_m = erasure_channel_rate(alpha_m, p_e_m)?;

    let alpha_e = beta * (1.0 - p_m) + (1.0 - beta) * p_f;
    let err_mass = beta * p_m * prof.p_e_given_m;
    let p_e_e = if 1.0 - alpha_e <= 0.0 {
        if err_mass > 1e-12 {
            return Err(Error::Contract(format!(
                "alpha_e = 1 with nonzero eavesdropper error mass {err_mass}"
            )));
        }
        0.0
    } else {
        err_mass / (1.0 - alpha_e)
    };
    let r_e = erasure_channel_rate(alpha_e, p_e_e)?;
    Ok(RateBreakdownTdm { alpha_m, alpha_e, p_e_m, p_e_e, r_m, r_e, r_s: (r_m - r_e).max(0.0) })
}

/// Two-way secrecy-rate breakdown at transmit probability `p_t`.
pub fn twoway_bounds(
    p_t: f64,
    prof: &MisclassProfile,
    geom: &GeometryConfig,
    rho_min: f64,
    fec: FecMode,
) -> Result<RateBreakdownTwoWay> {
    if !(0.0..=1.0).contains(&p_t) {
        return Err(Error::Domain(format!("p_t = {p_t} outside [0,1]")));
    }
    prof.validate()?;

    let both = p_t * p_t;
    let solo = p_t * (1.0 - p_t);

    let p_e_m = legit_error_prob(rho_min, geom.d_ab, geom.alpha, fec)?;
    let r_m = solo * (1.0 - binary_entropy(p_e_m)?);

    let d_a = both * prof.concurrent.to_a + solo * prof.bob_solo.to_a + solo * prof.alice_solo.to_a;
    let d_b = both * prof.concurrent.to_b + solo * prof.alice_solo.to_b + solo * prof.bob_solo.to_b;
    let p_e_ea =
        both * prof.concurrent.to_a * prof.err_concurrent_to_a + 0.5 * solo * prof.bob_solo.to_a;
    let p_e_eb =
        both * prof.concurrent.to_b * prof.err_concurrent_to_b + 0.5 * solo * prof.alice_solo.to_b;

    for (name, err, mass) in [("A", p_e_ea, d_a), ("B", p_e_eb, d_b)] {
        if err > mass + 1e-9 {
            return Err(Error::Contract(format!(
                "inconsistent profile: error mass {err} exceeds attribution mass {mass} for {name}"
            )));
        }
    }

    let sub_rate = |mass: f64, err: f64| -> Result<f64> {
        if mass <= 0.0 {
            Ok(0.0)
        } else {
            Ok(mass * (1.0 - binary_entropy((err / mass).min(1.0))?))
        }
    };
    let r_ea = sub_rate(d_a, p_e_ea)?;
    let r_eb = sub_rate(d_b, p_e_eb)?;

    Ok(RateBreakdownTwoWay {
        r_m,
        d_a,
        d_b,
        p_e_ea,
        p_e_eb,
        r_ea,
        r_eb,
        r_s: (r_m - r_ea.max(r_eb)).max(0.0),
    })
}
