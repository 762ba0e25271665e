//! Detector-model-versus-oracle comparison grid.

use super::{oracle_normalized_variance, InputState, OracleConfig};
use crate::detector::{mismatch_noise, DetectorConfig};
use crate::error::Result;

/// A comparison passes when `|z| ≤ Z_LIMIT`.
pub const Z_LIMIT: f64 = 3.0;

/// One unbalanced configuration added to the grid.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UnbalancedCase {
    pub t_a: f64,
    pub t_b: f64,
    pub n_bar: f64,
    pub matched: u32,
    pub unmatched: u32,
    pub epsilon: f64,
    pub alpha: f64,
}

/// Axes of the validation grid. Every balanced point feeds thermal light of
/// the same brightness into matched and unmatched modes.
#[derive(Debug, Clone, PartialEq)]
pub struct GridSpec {
    pub n_bar_values: Vec<f64>,
    pub epsilon_values: Vec<f64>,
    pub matched_values: Vec<u32>,
    pub unmatched_values: Vec<u32>,
    pub alpha: f64,
    pub samples: u64,
    pub unbalanced: Vec<UnbalancedCase>,
    pub unbalanced_samples: u64,
    pub seed: u64,
}

impl Default for GridSpec {
    fn default() -> Self {
        let case = |alpha| UnbalancedCase {
            t_a: 0.51,
            t_b: 0.49,
            n_bar: 100.0,
            matched: 1,
            unmatched: 1,
            epsilon: 1.0,
            alpha,
        };
        Self {
            n_bar_values: vec![0.0, 1.0, 10.0, 100.0],
            epsilon_values: vec![0.1, 1.0],
            matched_values: vec![1, 2, 4],
            unmatched_values: vec![1, 2, 4],
            alpha: 1.0,
            samples: 1_000_000,
            // ε_tot = 0.1 and ε_tot = 1
            unbalanced: vec![case(10.0), case(1.0)],
            unbalanced_samples: 10_000_000,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ValidationPoint {
    pub label: String,
    pub config: OracleConfig,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ValidationRow {
    pub label: String,
    pub analytic: f64,
    pub value: f64,
    pub stderr: f64,
    pub z: f64,
    pub warning: Option<String>,
}

impl ValidationRow {
    pub fn passed(&self) -> bool {
        self.z.abs() <= Z_LIMIT
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ValidationReport {
    pub rows: Vec<ValidationRow>,
}

impl ValidationReport {
    pub fn passed(&self) -> bool {
        self.rows.iter().all(ValidationRow::passed)
    }

    pub fn max_abs_z(&self) -> f64 {
        self.rows.iter().map(|r| r.z.abs()).fold(0.0, f64::max)
    }
}

fn point_seed(base: u64, index: usize) -> u64 {
    base.wrapping_add((index as u64 + 1).wrapping_mul(0x9E37_79B9_7F4A_7C15))
}

fn thermal(n_bar: f64) -> InputState {
    if n_bar == 0.0 {
        InputState::Vacuum
    } else {
        InputState::Thermal { n_bar }
    }
}

/// Expands a grid specification into oracle runs.
pub fn default_grid(spec: &GridSpec) -> Result<Vec<ValidationPoint>> {
    let mut points = Vec::new();
    for &n in &spec.n_bar_values {
        for &eps in &spec.epsilon_values {
            for &m in &spec.matched_values {
                for &u in &spec.unmatched_values {
                    let det = DetectorConfig::balanced(m, u, eps, spec.alpha)?;
                    let config = OracleConfig::new(det, thermal(n), thermal(n))
                        .with_samples(spec.samples)
                        .with_seed(point_seed(spec.seed, points.len()));
                    points.push(ValidationPoint {
                        label: format!(
                            "balanced n_bar={n} eps={eps} M={m} N={u} alpha={}",
                            spec.alpha
                        ),
                        config,
                    });
                }
            }
        }
    }
    for c in &spec.unbalanced {
        let det = DetectorConfig::balanced(c.matched, c.unmatched, c.epsilon, c.alpha)?
            .with_transmittances(c.t_a, c.t_b)?;
        let config = OracleConfig::new(det, thermal(c.n_bar), thermal(c.n_bar))
            .with_samples(spec.unbalanced_samples)
            .with_seed(point_seed(spec.seed, points.len()));
        points.push(ValidationPoint {
            label: format!(
                "unbalanced T_a={} T_b={} n_bar={} eps={} M={} N={} alpha={}",
                c.t_a, c.t_b, c.n_bar, c.epsilon, c.matched, c.unmatched, c.alpha
            ),
            config,
        });
    }
    Ok(points)
}

/// Closed-form normalized variance for an oracle configuration.
pub fn analytic_variance(cfg: &OracleConfig) -> Result<f64> {
    let det = &cfg.detector;
    let signal = cfg.matched_state.quadrature_variance(det.phi);
    let u = &cfg.unmatched_state;
    Ok(signal + mismatch_noise(det, u.mean_photons(), u.photon_variance())?)
}

/// Runs every point and compares it with `analytic`.
pub fn validate_grid<F>(points: &[ValidationPoint], analytic: F) -> Result<ValidationReport>
where
    F: Fn(&OracleConfig) -> Result<f64>,
{
    let mut rows = Vec::with_capacity(points.len());
    for p in points {
        let expected = analytic(&p.config)?;
        let est = oracle_normalized_variance(&p.config)?;
        let diff = est.value - expected;
        let z = if est.stderr > 0.0 {
            diff / est.stderr
        } else if diff.abs() <= 1e-9 * expected.abs().max(1.0) {
            0.0
        } else {
            f64::INFINITY.copysign(diff)
        };
        rows.push(ValidationRow {
            label: p.label.clone(),
            analytic: expected,
            value: est.value,
            stderr: est.stderr,
            z,
            warning: est.warning,
        });
    }
    Ok(ValidationReport { rows })
}
