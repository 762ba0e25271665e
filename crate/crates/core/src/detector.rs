//! Analytic model of a multimode homodyne detector receiving bright light.
//!
//! `M` signal modes overlap the local oscillator; `N` further bright modes do
//! not and reach the photodiodes only through imperfect mode filtering
//! (intensity weight `ε`). Their self-interference with vacuum adds noise
//! proportional to their brightness, aggregated in
//! `ε_tot² = N·ε² / (M·α²)`.

use crate::error::{invalid, Error, Result};

/// Photon-number statistics of a bright mode at the detector.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum PhotonStatistics {
    /// `Var(n) = n̄(n̄ + 1)`; one arm of a twin beam.
    #[default]
    Thermal,
    /// `Var(n) = n̄`.
    Coherent,
}

impl PhotonStatistics {
    pub fn number_variance(self, n_bar: f64) -> f64 {
        match self {
            PhotonStatistics::Thermal => n_bar * (n_bar + 1.0),
            PhotonStatistics::Coherent => n_bar,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            PhotonStatistics::Thermal => "thermal",
            PhotonStatistics::Coherent => "coherent",
        }
    }
}

impl std::str::FromStr for PhotonStatistics {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "thermal" => Ok(Self::Thermal),
            "coherent" => Ok(Self::Coherent),
            other => Err(format!("expected `thermal` or `coherent`, got `{other}`")),
        }
    }
}

/// Parameters of the multimode homodyne detector.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DetectorConfig {
    /// Signal modes matched to a LO mode (`M ≥ 1`).
    pub matched: u32,
    /// Bright modes without a LO partner (`N ≥ 0`).
    pub unmatched: u32,
    /// Mode-filtration inefficiency applied to unmatched intensities.
    pub epsilon: f64,
    /// Classical LO amplitude per mode.
    pub alpha: f64,
    /// LO phase; 0 measures x, π/2 measures p.
    pub phi: f64,
    /// Beamsplitter transmittance seen by matched modes.
    pub t_a: f64,
    /// Beamsplitter transmittance seen by unmatched modes.
    pub t_b: f64,
    pub photon_stats: PhotonStatistics,
    /// Count the channel excess-noise photons (`ηχ/2` per mode) in the
    /// brightness driving the mismatch noise at Bob. Off by default.
    pub count_excess_noise_photons: bool,
}

impl Default for DetectorConfig {
    fn default() -> Self {
        Self {
            matched: 1,
            unmatched: 0,
            epsilon: 0.0,
            alpha: 1.0,
            phi: 0.0,
            t_a: 0.5,
            t_b: 0.5,
            photon_stats: PhotonStatistics::Thermal,
            count_excess_noise_photons: false,
        }
    }
}

impl DetectorConfig {
    /// Balanced detector with the given mode structure.
    pub fn balanced(matched: u32, unmatched: u32, epsilon: f64, alpha: f64) -> Result<Self> {
        let cfg = Self {
            matched,
            unmatched,
            epsilon,
            alpha,
            ..Self::default()
        };
        cfg.validate()?;
        Ok(cfg)
    }

    /// Balanced detector whose filtration inefficiency is chosen so that
    /// `ε_tot` takes the requested value for the given `M`, `N` and `α`.
    pub fn with_eps_tot(matched: u32, unmatched: u32, eps_tot: f64, alpha: f64) -> Result<Self> {
        if !(eps_tot >= 0.0) || !eps_tot.is_finite() {
            return Err(invalid("eps_tot", format!("must be ≥ 0, got {eps_tot}")));
        }
        let epsilon = if eps_tot == 0.0 {
            0.0
        } else {
            if unmatched == 0 {
                return Err(invalid(
                    "modes_unmatched",
                    "ε_tot > 0 needs at least one unmatched mode",
                ));
            }
            eps_tot * alpha * (f64::from(matched) / f64::from(unmatched)).sqrt()
        };
        Self::balanced(matched, unmatched, epsilon, alpha)
    }

    pub fn with_transmittances(mut self, t_a: f64, t_b: f64) -> Result<Self> {
        self.t_a = t_a;
        self.t_b = t_b;
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        if self.matched == 0 {
            return Err(invalid("modes_matched", "need at least one matched mode"));
        }
        if !(0.0..=1.0).contains(&self.epsilon) {
            return Err(invalid(
                "epsilon",
                format!("must lie in [0, 1], got {}", self.epsilon),
            ));
        }
        if !(self.alpha > 0.0) || !self.alpha.is_finite() {
            return Err(invalid("alpha", format!("must be > 0, got {}", self.alpha)));
        }
        if !self.phi.is_finite() {
            return Err(invalid("phi", "must be finite"));
        }
        for (field, t) in [("t_a", self.t_a), ("t_b", self.t_b)] {
            if !(t > 0.0 && t < 1.0) {
                return Err(invalid(field, format!("must lie in (0, 1), got {t}")));
            }
        }
        Ok(())
    }

    pub fn is_balanced(&self) -> bool {
        self.t_a == 0.5 && self.t_b == 0.5
    }

    pub fn eps_tot(&self) -> f64 {
        epsilon_tot(self)
    }

    pub fn g(&self) -> Result<f64> {
        g_coefficient(self.t_a)
    }
}

/// Moments of the light reaching the detector.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModeStatistics {
    /// Quadrature variance of a matched signal mode (SNU).
    pub var_x: f64,
    /// Mean photon number per unmatched mode.
    pub n_bar: f64,
    /// Photon-number variance per unmatched mode.
    pub var_n: f64,
}

impl ModeStatistics {
    pub fn new(var_x: f64, n_bar: f64, stats: PhotonStatistics) -> Self {
        Self {
            var_x,
            n_bar,
            var_n: stats.number_variance(n_bar),
        }
    }

    pub fn thermal(var_x: f64, n_bar: f64) -> Self {
        Self::new(var_x, n_bar, PhotonStatistics::Thermal)
    }
}

/// `ε_tot = √(N ε² / (M α²))`.
pub fn epsilon_tot(config: &DetectorConfig) -> f64 {
    let n = f64::from(config.unmatched);
    let m = f64::from(config.matched);
    config.epsilon * (n / m).sqrt() / config.alpha
}

/// Normalized quadrature variance behind a balanced detector.
pub fn balanced_variance(stats: &ModeStatistics, eps_tot: f64) -> f64 {
    stats.var_x + eps_tot * eps_tot * stats.n_bar
}

/// Noise added by the unmatched modes, in SNU, for a possibly unbalanced
/// detector.
pub fn mismatch_noise(config: &DetectorConfig, n_bar: f64, var_n: f64) -> Result<f64> {
    let e2 = config.eps_tot().powi(2);
    if config.is_balanced() {
        return Ok(e2 * n_bar);
    }
    let (ta, tb) = (config.t_a, config.t_b);
    let denom = ta * (1.0 - ta);
    if denom == 0.0 {
        return Err(Error::Division(format!("T_a = {ta} leaves no gain")));
    }
    let bracket = tb * (1.0 - tb) * n_bar + (tb - ta).powi(2) * var_n;
    Ok(e2 / denom * bracket)
}

/// Normalized variance behind an unbalanced detector with gain
/// `g = T_a/(1−T_a)` on the second photodiode.
pub fn unbalanced_variance(stats: &ModeStatistics, config: &DetectorConfig) -> Result<f64> {
    let ta = config.t_a;
    if ta <= 0.0 || ta >= 1.0 {
        return Err(Error::Division(format!("T_a = {ta} must lie in (0, 1)")));
    }
    let e2 = config.eps_tot().powi(2);
    let tb = config.t_b;
    let bracket = tb * (1.0 - tb) * stats.n_bar + (tb - ta).powi(2) * stats.var_n;
    Ok(stats.var_x + e2 / (ta * (1.0 - ta)) * bracket)
}

/// Gain that cancels the matched-mode intensity in `n₁ − g·n₂`.
pub fn g_coefficient(t_a: f64) -> Result<f64> {
    if t_a >= 1.0 {
        return Err(Error::Division(format!("g undefined at T_a = {t_a}")));
    }
    if !(t_a > 0.0) {
        return Err(Error::Domain(format!("T_a must be > 0, got {t_a}")));
    }
    Ok(t_a / (1.0 - t_a))
}

/// Photons per mode at which squeezing `v_s` is no longer visible.
pub fn squeezing_vanish_threshold(v_s: f64, eps_tot: f64) -> Result<f64> {
    if !(v_s > 0.0 && v_s < 1.0) {
        return Err(Error::Domain(format!(
            "squeezed variance must lie in (0, 1), got {v_s}"
        )));
    }
    if !(eps_tot > 0.0) || !eps_tot.is_finite() {
        return Err(Error::Domain(format!("ε_tot must be > 0, got {eps_tot}")));
    }
    Ok((1.0 - v_s) / (eps_tot * eps_tot))
}
