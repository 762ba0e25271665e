//! Shared states of the prepare-and-measure and entanglement-based schemes.
//!
//! Both are described by the same two-mode squeezed vacuum: the P&M source
//! (squeezing `V_S = 1/V`, Gaussian modulation up to `1/V_S`) is only a view
//! of the EPR matrix with Alice's detector taken as ideal.

use nalgebra::Matrix2;

use crate::channel::{apply_channel, detected_mean_photon, ChannelParams};
use crate::detector::{mismatch_noise, DetectorConfig};
use crate::error::{invalid, Error, Result};
use crate::gaussian::{log_negativity, signed_log_negativity, symplectic_eigenvalues, TwoModeCM};
use crate::search::{bisect, logspace};

/// Brightness and mode structure of the source.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SourceParams {
    /// Mean photon number per mode.
    pub n_bar: f64,
    pub matched: u32,
    pub unmatched: u32,
    /// Brightness of the unmatched modes when it differs from `n_bar`.
    pub unmatched_n_bar: Option<f64>,
}

impl SourceParams {
    pub fn new(n_bar: f64, matched: u32, unmatched: u32) -> Result<Self> {
        let s = Self {
            n_bar,
            matched,
            unmatched,
            unmatched_n_bar: None,
        };
        s.validate()?;
        Ok(s)
    }

    /// Per-mode brightness from the total photon number per beam.
    pub fn from_n_tot(n_tot: f64, matched: u32, unmatched: u32) -> Result<Self> {
        let modes = f64::from(matched) + f64::from(unmatched);
        if modes == 0.0 {
            return Err(invalid("modes_matched", "source has no modes"));
        }
        Self::new(n_tot / modes, matched, unmatched)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.n_bar >= 0.0) || !self.n_bar.is_finite() {
            return Err(invalid("n_bar", format!("must be ≥ 0, got {}", self.n_bar)));
        }
        if let Some(u) = self.unmatched_n_bar {
            if !(u >= 0.0) || !u.is_finite() {
                return Err(invalid("unmatched_n_bar", format!("must be ≥ 0, got {u}")));
            }
        }
        Ok(())
    }

    pub fn with_n_bar(&self, n_bar: f64) -> Self {
        Self { n_bar, ..*self }
    }

    /// EPR quadrature variance `V = 2n̄ + 1`.
    pub fn v(&self) -> f64 {
        2.0 * self.n_bar + 1.0
    }

    /// Squeezed variance of the equivalent P&M source.
    pub fn v_s(&self) -> f64 {
        1.0 / self.v()
    }

    pub fn n_tot(&self) -> f64 {
        (f64::from(self.matched) + f64::from(self.unmatched)) * self.n_bar
    }

    pub fn unmatched_brightness(&self) -> f64 {
        self.unmatched_n_bar.unwrap_or(self.n_bar)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SchemeKind {
    /// Detector noise at Bob only.
    #[default]
    PrepareAndMeasure,
    /// Alice's local homodyne detector is bright-light limited too.
    EprBased,
}

impl SchemeKind {
    pub fn name(self) -> &'static str {
        match self {
            SchemeKind::PrepareAndMeasure => "pm",
            SchemeKind::EprBased => "epr",
        }
    }
}

impl std::str::FromStr for SchemeKind {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "pm" | "prepare-and-measure" => Ok(Self::PrepareAndMeasure),
            "epr" | "epr-based" => Ok(Self::EprBased),
            other => Err(format!("expected `pm` or `epr`, got `{other}`")),
        }
    }
}

/// Twin-beam covariance matrix with `n_bar` photons per mode.
pub fn epr_cm(n_bar: f64) -> Result<TwoModeCM> {
    if !(n_bar >= 0.0) || !n_bar.is_finite() {
        return Err(invalid("n_bar", format!("must be ≥ 0, got {n_bar}")));
    }
    let v = 2.0 * n_bar + 1.0;
    let c = 2.0 * (n_bar * (n_bar + 1.0)).sqrt();
    Ok(TwoModeCM::standard_form(v, v, c, -c))
}

/// Covariance matrix shared by Alice and Bob, including the bright-light
/// detector noise attributed to the channel.
pub fn shared_cm(
    source: &SourceParams,
    ch: &ChannelParams,
    det: &DetectorConfig,
    scheme: SchemeKind,
) -> Result<TwoModeCM> {
    source.validate()?;
    det.validate()?;
    let mut cm = apply_channel(&epr_cm(source.n_bar)?, ch)?;

    let unmatched = source.unmatched_brightness();
    let mut at_bob = detected_mean_photon(unmatched, ch.eta);
    if det.count_excess_noise_photons {
        at_bob += 0.5 * ch.eta * ch.chi;
    }
    let bob_noise = mismatch_noise(det, at_bob, det.photon_stats.number_variance(at_bob))?;
    cm.b += Matrix2::identity() * bob_noise;

    if scheme == SchemeKind::EprBased {
        let alice_noise =
            mismatch_noise(det, unmatched, det.photon_stats.number_variance(unmatched))?;
        cm.a += Matrix2::identity() * alice_noise;
    }

    symplectic_eigenvalues(&cm)?;
    Ok(cm)
}

/// Closed-form brightness at which a symmetric twin beam stops being
/// entangled behind two noisy balanced detectors.
pub fn entanglement_break_threshold(eps_tot: f64) -> Result<f64> {
    if !(eps_tot > 0.0) || !eps_tot.is_finite() {
        return Err(Error::Domain(format!("ε_tot must be > 0, got {eps_tot}")));
    }
    let e2 = eps_tot * eps_tot;
    Ok(1.0 / (e2 * (1.0 + e2 / 4.0)))
}

/// Relative tolerance of the numeric break-point search.
pub const BREAK_SEARCH_RTOL: f64 = 1e-10;

/// Locates the smallest `n̄` above which `E_N` vanishes, by scanning a
/// logarithmic grid and bisecting the first sign change of `−log₂ ν̃₋`.
pub fn entanglement_break_numeric(
    source: &SourceParams,
    ch: &ChannelParams,
    det: &DetectorConfig,
    scheme: SchemeKind,
) -> Result<f64> {
    let witness = |ln_n: f64| -> Result<f64> {
        let s = source.with_n_bar(ln_n.exp());
        signed_log_negativity(&shared_cm(&s, ch, det, scheme)?)
    };
    let grid = logspace(1e-6, 1e12, 181);
    let mut prev: Option<(f64, f64)> = None;
    for n in grid {
        let x = n.ln();
        let w = witness(x)?;
        if let Some((px, pw)) = prev {
            if pw > 0.0 && w <= 0.0 {
                let root = bisect(witness, px, x, BREAK_SEARCH_RTOL)?;
                return Ok(root.exp());
            }
        }
        prev = Some((x, w));
    }
    Err(Error::Domain(
        "no entanglement break found for n̄ in [1e-6, 1e12]".into(),
    ))
}

/// Logarithmic negativity along a grid of total photon numbers per beam.
pub fn entanglement_curve(
    n_tot_grid: &[f64],
    source: &SourceParams,
    ch: &ChannelParams,
    det: &DetectorConfig,
    scheme: SchemeKind,
) -> Result<Vec<(f64, f64)>> {
    if n_tot_grid.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(invalid("n_tot", "grid must be strictly increasing"));
    }
    n_tot_grid
        .iter()
        .map(|&n_tot| {
            let s = SourceParams::from_n_tot(n_tot, source.matched, source.unmatched)?;
            let s = SourceParams {
                unmatched_n_bar: source.unmatched_n_bar,
                ..s
            };
            Ok((n_tot, log_negativity(&shared_cm(&s, ch, det, scheme)?)?))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::search::slope_sign_changes;

    fn det(eps_tot: f64) -> DetectorConfig {
        DetectorConfig::with_eps_tot(500, 500, eps_tot, 1.0).unwrap()
    }

    fn src(n_bar: f64) -> SourceParams {
        SourceParams::new(n_bar, 500, 500).unwrap()
    }

    #[test]
    fn epr_cm_examples() {
        assert_eq!(epr_cm(0.0).unwrap(), TwoModeCM::vacuum());
        let cm = epr_cm(1.0).unwrap();
        assert_eq!(cm.a[(0, 0)], 3.0);
        assert!((cm.c[(0, 0)] - 8f64.sqrt()).abs() < 1e-15);
        let s = symplectic_eigenvalues(&cm).unwrap();
        assert!((s.nu_plus - 1.0).abs() < 1e-12 && (s.nu_minus - 1.0).abs() < 1e-12);
        assert!((log_negativity(&cm).unwrap() - 2.5431).abs() < 1e-4);
        assert!(epr_cm(-1.0).is_err());
    }

    #[test]
    fn source_views() {
        let s = SourceParams::new(4.0, 3, 7).unwrap();
        assert_eq!(s.v(), 9.0);
        assert_eq!(s.v_s(), 1.0 / 9.0);
        assert_eq!(s.n_tot(), 40.0);
        assert_eq!(SourceParams::from_n_tot(40.0, 3, 7).unwrap().n_bar, 4.0);
    }

    #[test]
    fn ideal_everything_leaves_epr_unchanged() {
        let cm = shared_cm(
            &src(2.5),
            &ChannelParams::default(),
            &det(0.0),
            SchemeKind::EprBased,
        )
        .unwrap();
        assert_eq!(cm, epr_cm(2.5).unwrap());
    }

    #[test]
    fn symmetric_noisy_epr_at_threshold_is_separable() {
        let eps = 1e-2;
        let n = entanglement_break_threshold(eps).unwrap();
        let v = 2.0 * n + 1.0 + eps * eps * n;
        let c = 2.0 * (n * (n + 1.0)).sqrt();
        let cm = TwoModeCM::standard_form(v, v, c, -c);
        assert!(log_negativity(&cm).unwrap() < 1e-6);
        let cm = shared_cm(
            &src(n),
            &ChannelParams::default(),
            &det(eps),
            SchemeKind::EprBased,
        )
        .unwrap();
        assert!(log_negativity(&cm).unwrap() < 1e-6);
    }

    #[test]
    fn threshold_values() {
        let t = entanglement_break_threshold(1e-2).unwrap();
        assert!((t - 9999.750006249844).abs() < 1e-8);
        assert_eq!(entanglement_break_threshold(2.0).unwrap(), 0.125);
        assert!(entanglement_break_threshold(0.0).is_err());
    }

    #[test]
    fn threshold_ignores_pure_loss() {
        for eps in [0.05, 0.1, 0.2] {
            let closed = entanglement_break_threshold(eps).unwrap();
            for eta in [0.1, 0.5, 0.9] {
                let n = entanglement_break_numeric(
                    &src(1.0),
                    &ChannelParams::pure_loss(eta).unwrap(),
                    &det(eps),
                    SchemeKind::EprBased,
                )
                .unwrap();
                assert!(
                    ((n - closed) / closed).abs() < 1e-6,
                    "eps={eps} eta={eta}: {n} vs {closed}"
                );
            }
        }
    }

    #[test]
    fn schemes_agree_without_alice_noise() {
        let ch = ChannelParams::new(0.4, 0.03).unwrap();
        for (n, eps) in [(3.0, 0.0), (0.0, 0.1)] {
            let pm = shared_cm(&src(n), &ch, &det(eps), SchemeKind::PrepareAndMeasure).unwrap();
            let epr = shared_cm(&src(n), &ch, &det(eps), SchemeKind::EprBased).unwrap();
            assert_eq!(pm, epr);
        }
    }

    #[test]
    fn curve_without_mismatch_is_increasing() {
        let grid = logspace(1.0, 1e6, 40);
        let curve = entanglement_curve(
            &grid,
            &src(0.0),
            &ChannelParams::pure_loss(0.5).unwrap(),
            &det(0.0),
            SchemeKind::EprBased,
        )
        .unwrap();
        assert!(curve.windows(2).all(|w| w[1].1 > w[0].1));
    }

    #[test]
    fn curve_has_interior_peak_with_mismatch() {
        let grid = logspace(1.0, 1e9, 200);
        let peak = |eps: f64| {
            let curve = entanglement_curve(
                &grid,
                &src(0.0),
                &ChannelParams::pure_loss(0.5).unwrap(),
                &det(eps),
                SchemeKind::EprBased,
            )
            .unwrap();
            let values: Vec<f64> = curve.iter().map(|p| p.1).collect();
            assert_eq!(slope_sign_changes(&values), 1);
            let imax = values
                .iter()
                .enumerate()
                .fold(0, |best, (i, v)| if *v > values[best] { i } else { best });
            grid[imax]
        };
        assert!(peak(0.1) < peak(1e-2));
    }

    #[test]
    fn curve_rejects_unsorted_grid() {
        let r = entanglement_curve(
            &[1.0, 1.0],
            &src(0.0),
            &ChannelParams::default(),
            &det(0.0),
            SchemeKind::EprBased,
        );
        assert!(r.is_err());
    }

    #[test]
    fn scheme_names_parse() {
        assert_eq!(
            "pm".parse::<SchemeKind>().unwrap(),
            SchemeKind::PrepareAndMeasure
        );
        assert_eq!("epr".parse::<SchemeKind>().unwrap(), SchemeKind::EprBased);
        assert!("bb84".parse::<SchemeKind>().is_err());
    }
}
