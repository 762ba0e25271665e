//! Lossy, noisy Gaussian channel `x' = √η (x + x_N) + √(1−η) x₀`.
//!
//! The excess noise `χ` is referred to the channel input: Bob sees `ηχ`.

use nalgebra::Matrix2;

use crate::error::{invalid, Error, Result};
use crate::gaussian::{symplectic_eigenvalues, TwoModeCM};

/// Fiber attenuation used for distance conversion.
pub const FIBER_DB_PER_KM: f64 = 0.2;

/// Transmittance and input-referred excess noise.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChannelParams {
    pub eta: f64,
    pub chi: f64,
}

impl Default for ChannelParams {
    fn default() -> Self {
        Self { eta: 1.0, chi: 0.0 }
    }
}

impl ChannelParams {
    pub fn new(eta: f64, chi: f64) -> Result<Self> {
        let p = Self { eta, chi };
        p.validate()?;
        Ok(p)
    }

    pub fn pure_loss(eta: f64) -> Result<Self> {
        Self::new(eta, 0.0)
    }

    pub fn from_attenuation_db(db: f64, chi: f64) -> Result<Self> {
        Self::new(eta_from_db(db)?, chi)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.eta > 0.0 && self.eta <= 1.0) {
            return Err(invalid(
                "eta",
                format!("must lie in (0, 1], got {}", self.eta),
            ));
        }
        if !(self.chi >= 0.0) || !self.chi.is_finite() {
            return Err(invalid("chi", format!("must be ≥ 0, got {}", self.chi)));
        }
        Ok(())
    }
}

/// Sends Bob's mode through the channel.
pub fn apply_channel(cm: &TwoModeCM, params: &ChannelParams) -> Result<TwoModeCM> {
    params.validate()?;
    let eta = params.eta;
    let id = Matrix2::identity();
    let out = TwoModeCM {
        a: cm.a,
        b: (cm.b + id * params.chi) * eta + id * (1.0 - eta),
        c: cm.c * eta.sqrt(),
    };
    symplectic_eigenvalues(&out)?;
    Ok(out)
}

/// Brightness surviving the channel.
pub fn detected_mean_photon(n_bar: f64, eta: f64) -> f64 {
    eta * n_bar
}

/// Loss in dB, `−10 log₁₀ η`.
pub fn attenuation_db(eta: f64) -> Result<f64> {
    if !(eta > 0.0) || eta > 1.0 {
        return Err(Error::Domain(format!(
            "transmittance must lie in (0, 1], got {eta}"
        )));
    }
    Ok(-10.0 * eta.log10())
}

pub fn eta_from_db(db: f64) -> Result<f64> {
    if !(db >= 0.0) || !db.is_finite() {
        return Err(Error::Domain(format!(
            "attenuation must be ≥ 0 dB, got {db}"
        )));
    }
    Ok(10f64.powf(-db / 10.0))
}

pub fn distance_km(db: f64) -> f64 {
    db / FIBER_DB_PER_KM
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gaussian::log_negativity;

    fn epr(v: f64) -> TwoModeCM {
        let c = (v * v - 1.0).sqrt();
        TwoModeCM::standard_form(v, v, c, -c)
    }

    #[test]
    fn perfect_channel_is_identity() {
        let cm = epr(3.0);
        assert_eq!(apply_channel(&cm, &ChannelParams::default()).unwrap(), cm);
    }

    #[test]
    fn full_loss_limit_gives_vacuum() {
        let out = apply_channel(&epr(5.0), &ChannelParams::pure_loss(1e-15).unwrap()).unwrap();
        assert!((out.b - Matrix2::identity()).abs().max() < 1e-13);
        assert!(out.c.abs().max() < 1e-6);
        assert!(apply_channel(&epr(5.0), &ChannelParams { eta: 0.0, chi: 0.0 }).is_err());
    }

    #[test]
    fn half_loss_on_epr() {
        let out = apply_channel(&epr(3.0), &ChannelParams::pure_loss(0.5).unwrap()).unwrap();
        assert!((out.b - Matrix2::identity() * 2.0).abs().max() < 1e-14);
        assert!((out.c - Matrix2::new(2.0, 0.0, 0.0, -2.0)).abs().max() < 1e-14);
        assert!(log_negativity(&out).unwrap() > 0.0);
    }

    #[test]
    fn excess_noise_is_input_referred() {
        let out = apply_channel(
            &TwoModeCM::vacuum(),
            &ChannelParams::new(0.25, 0.2).unwrap(),
        )
        .unwrap();
        assert!((out.b[(0, 0)] - (1.0 + 0.25 * 0.2)).abs() < 1e-15);
    }

    #[test]
    fn photon_scaling() {
        assert_eq!(detected_mean_photon(7.0, 1.0), 7.0);
        assert_eq!(detected_mean_photon(0.0, 0.3), 0.0);
        assert_eq!(detected_mean_photon(100.0, 0.25), 25.0);
    }

    #[test]
    fn decibels() {
        assert_eq!(attenuation_db(1.0).unwrap(), 0.0);
        assert!((attenuation_db(0.1).unwrap() - 10.0).abs() < 1e-12);
        assert!(attenuation_db(0.0).is_err());
        assert!(attenuation_db(-0.5).is_err());
        assert!((eta_from_db(10.0).unwrap() - 0.1).abs() < 1e-15);
        assert!((distance_km(36.0) - 180.0).abs() < 1e-12);
        for db in [0.0, 3.0, 17.5, 60.0] {
            let back = attenuation_db(eta_from_db(db).unwrap()).unwrap();
            assert!((back - db).abs() < 1e-10);
        }
    }

    #[test]
    fn rejects_bad_params() {
        assert!(ChannelParams::new(1.5, 0.0).is_err());
        assert!(ChannelParams::new(0.5, -0.1).is_err());
        assert!(ChannelParams::new(0.5, f64::NAN).is_err());
    }
}
