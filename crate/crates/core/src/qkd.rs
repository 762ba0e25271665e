//! Asymptotic key rate under collective attacks with reverse reconciliation.
//!
//! `K = β I_AB − χ_BE`, with both parties homodyning x and Eve holding the
//! purification of all untrusted noise, including the bright-light detector
//! noise at Bob.

use crate::channel::{eta_from_db, ChannelParams};
use crate::detector::DetectorConfig;
use crate::error::{invalid, Error, Result};
use crate::gaussian::{
    condition_on_homodyne, entropy_g, single_mode_symplectic, symplectic_eigenvalues, Party,
    Quadrature, TwoModeCM,
};
use crate::protocols::{shared_cm, SchemeKind, SourceParams};
use crate::search::{bisect, golden_section_max, logspace, slope_sign_changes};

/// Reconciliation efficiency of current error-correcting codes.
pub const DEFAULT_BETA: f64 = 0.97;

/// Information quantities at one parameter point (bits per channel use).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KeyRateResult {
    pub i_ab: f64,
    pub chi_be: f64,
    pub key_rate: f64,
    pub beta: f64,
}

/// Shannon information between Alice's and Bob's x outcomes.
pub fn mutual_information(cm: &TwoModeCM) -> Result<f64> {
    symplectic_eigenvalues(cm)?;
    let b = cm.b[(0, 0)];
    let cond = b - cm.c[(0, 0)].powi(2) / cm.a[(0, 0)];
    if !(cond > 0.0) {
        return Err(Error::Degenerate(format!(
            "conditional variance V_B|A = {cond:e}"
        )));
    }
    Ok(0.5 * (b / cond).log2())
}

/// Holevo bound on Eve's information about Bob's x outcome.
pub fn holevo_bound(cm: &TwoModeCM) -> Result<f64> {
    let spec = symplectic_eigenvalues(cm)?;
    let cond = condition_on_homodyne(cm, Party::Bob, Quadrature::X)?;
    let nu_c = single_mode_symplectic(&cond)?;
    Ok(entropy_g(spec.nu_plus)? + entropy_g(spec.nu_minus)? - entropy_g(nu_c)?)
}

/// Evaluates both information quantities on an already assembled state.
pub fn key_rate_from_cm(cm: &TwoModeCM, beta: f64) -> Result<KeyRateResult> {
    check_beta(beta)?;
    let i_ab = mutual_information(cm)?;
    let chi_be = holevo_bound(cm)?;
    Ok(KeyRateResult {
        i_ab,
        chi_be,
        key_rate: beta * i_ab - chi_be,
        beta,
    })
}

/// Key rate of the squeezed-state P&M protocol (ideal detection at Alice).
pub fn key_rate(
    source: &SourceParams,
    ch: &ChannelParams,
    det: &DetectorConfig,
    beta: f64,
) -> Result<KeyRateResult> {
    check_beta(beta)?;
    let cm = shared_cm(source, ch, det, SchemeKind::PrepareAndMeasure)?;
    key_rate_from_cm(&cm, beta)
}

fn check_beta(beta: f64) -> Result<()> {
    if !(beta > 0.0 && beta <= 1.0) {
        return Err(invalid("beta", format!("must lie in (0, 1], got {beta}")));
    }
    Ok(())
}

/// Search settings for [`max_tolerable_attenuation`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AttenuationSearch {
    /// Upper end of the search range.
    pub max_db: f64,
    /// Coarse grid step used to bracket the crossing.
    pub step_db: f64,
    /// Final bracket width.
    pub tol_db: f64,
}

impl Default for AttenuationSearch {
    fn default() -> Self {
        Self {
            max_db: 60.0,
            step_db: 0.5,
            // well below the 0.01 dB plotting resolution; keeps |K| at the
            // reported point under 1e-6
            tol_db: 1e-6,
        }
    }
}

/// Outcome of a loss-threshold search.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum AttenuationThreshold {
    /// `K` crosses zero at `db`. `monotone` records whether `K` was
    /// non-increasing on the coarse grid up to the crossing.
    Finite { db: f64, monotone: bool },
    /// Still secure at the end of the search range.
    BeyondRange { max_db: f64 },
    /// No key even over a lossless channel.
    NeverSecure,
}

impl AttenuationThreshold {
    pub fn db(&self) -> Option<f64> {
        match self {
            AttenuationThreshold::Finite { db, .. } => Some(*db),
            _ => None,
        }
    }
}

pub fn key_rate_at_db(
    source: &SourceParams,
    det: &DetectorConfig,
    chi: f64,
    beta: f64,
    db: f64,
) -> Result<KeyRateResult> {
    let ch = ChannelParams::new(eta_from_db(db)?, chi)?;
    key_rate(source, &ch, det, beta)
}

/// Largest channel loss (dB) with a positive key.
pub fn max_tolerable_attenuation(
    source: &SourceParams,
    det: &DetectorConfig,
    chi: f64,
    beta: f64,
    search: &AttenuationSearch,
) -> Result<AttenuationThreshold> {
    if !(search.max_db > 0.0 && search.step_db > 0.0 && search.tol_db > 0.0) {
        return Err(invalid(
            "search",
            "range, step and tolerance must be positive",
        ));
    }
    let k = |db: f64| key_rate_at_db(source, det, chi, beta, db).map(|r| r.key_rate);
    let k0 = k(0.0)?;
    if k0 <= 0.0 {
        return Ok(AttenuationThreshold::NeverSecure);
    }
    let steps = (search.max_db / search.step_db).ceil() as usize;
    let mut prev = (0.0, k0);
    let mut monotone = true;
    for i in 1..=steps {
        let db = (i as f64 * search.step_db).min(search.max_db);
        let kv = k(db)?;
        if kv <= 0.0 {
            let root = bisect(k, prev.0, db, search.tol_db)?;
            return Ok(AttenuationThreshold::Finite { db: root, monotone });
        }
        if kv > prev.1 {
            monotone = false;
        }
        prev = (db, kv);
    }
    Ok(AttenuationThreshold::BeyondRange {
        max_db: search.max_db,
    })
}

/// Result of the brightness optimization.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhotonOptimum {
    pub n_bar: f64,
    pub key_rate: f64,
    /// False when the coarse profile was not unimodal and the grid argmax
    /// was returned instead of a refined optimum.
    pub unimodal: bool,
}

const COARSE_POINTS: usize = 65;

/// Relative tolerance of the golden-section refinement in `n̄`.
pub const OPTIMUM_RTOL: f64 = 1e-4;

/// Maximizes `K` over the per-mode brightness in `[n_min, n_max]`.
pub fn optimal_photon_number(
    ch: &ChannelParams,
    det: &DetectorConfig,
    beta: f64,
    source: &SourceParams,
    n_min: f64,
    n_max: f64,
) -> Result<PhotonOptimum> {
    if !(n_min > 0.0 && n_max > n_min) || !n_max.is_finite() {
        return Err(invalid(
            "n_range",
            format!("need 0 < n_min < n_max, got [{n_min}, {n_max}]"),
        ));
    }
    let k = |n: f64| key_rate(&source.with_n_bar(n), ch, det, beta).map(|r| r.key_rate);
    let grid = logspace(n_min, n_max, COARSE_POINTS);
    let values = grid.iter().map(|&n| k(n)).collect::<Result<Vec<_>>>()?;
    let imax = values
        .iter()
        .enumerate()
        .fold(0, |best, (i, v)| if *v > values[best] { i } else { best });

    let rises_then_falls = {
        let changes = slope_sign_changes(&values);
        changes == 0 || (changes == 1 && imax > 0 && imax + 1 < values.len())
    };
    if !rises_then_falls {
        return Ok(PhotonOptimum {
            n_bar: grid[imax],
            key_rate: values[imax],
            unimodal: false,
        });
    }

    let lo = grid[imax.saturating_sub(1)].ln();
    let hi = grid[(imax + 1).min(grid.len() - 1)].ln();
    let (x, kx) = golden_section_max(|x| k(x.exp()), lo, hi, OPTIMUM_RTOL)?;
    let (n_bar, key) = if kx >= values[imax] {
        (x.exp(), kx)
    } else {
        (grid[imax], values[imax])
    };
    Ok(PhotonOptimum {
        n_bar,
        key_rate: key,
        unimodal: true,
    })
}
