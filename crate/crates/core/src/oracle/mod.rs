//! Phase-space Monte-Carlo model of the multimode homodyne detector.
//!
//! Every input mode is drawn from its Wigner distribution, the LO is a
//! deterministic amplitude `α e^{iφ}`, and each sample is propagated through
//! the coupling beamsplitter to the photon-number difference `n₁ − g·n₂`.
//! Nothing here uses the closed-form detector noise; the module exists to
//! check it.
//!
//! Symmetric ordering shifts `⟨|β|²⟩` by 1/2 and `Var |β|²` by 1/4 for every
//! Gaussian mode. These offsets do not depend on the signal, so they cancel
//! between the signal run and the blocked run. Both runs are driven by the
//! same normal deviates, which also makes their difference far less noisy
//! than two independent estimates.

mod dump;
mod validate;

pub use dump::{decode_dump, encode_dump, read_dump, write_dump, DUMP_HEADER_LEN, DUMP_MAGIC};
pub use validate::{
    analytic_variance, default_grid, validate_grid, GridSpec, UnbalancedCase, ValidationPoint,
    ValidationReport, ValidationRow, Z_LIMIT,
};

use nalgebra::Complex;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use crate::detector::{g_coefficient, DetectorConfig};
use crate::error::{invalid, Result};

/// Default number of photocurrent samples.
pub const DEFAULT_SAMPLES: u64 = 1_000_000;
/// Default number of independently seeded batches.
pub const DEFAULT_BATCHES: u32 = 100;
/// Smallest sample count accepted for a variance estimate.
pub const MIN_SAMPLES: u64 = 10_000;

/// Gaussian single-mode input state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum InputState {
    Vacuum,
    Thermal {
        n_bar: f64,
    },
    /// Coherent state with complex amplitude `re + i·im`.
    Coherent {
        re: f64,
        im: f64,
    },
    /// Squeezed in x (`Var x = v_s`, `Var p = 1/v_s`), displaced by
    /// `(mean_x, mean_p)` in quadrature units.
    Squeezed {
        v_s: f64,
        mean_x: f64,
        mean_p: f64,
    },
}

/// First and second moments of a Gaussian mode without x–p correlation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaussianMoments {
    pub mean_x: f64,
    pub mean_p: f64,
    pub var_x: f64,
    pub var_p: f64,
}

impl InputState {
    pub fn moments(&self) -> GaussianMoments {
        match *self {
            InputState::Vacuum => GaussianMoments {
                mean_x: 0.0,
                mean_p: 0.0,
                var_x: 1.0,
                var_p: 1.0,
            },
            InputState::Thermal { n_bar } => {
                let v = 2.0 * n_bar + 1.0;
                GaussianMoments {
                    mean_x: 0.0,
                    mean_p: 0.0,
                    var_x: v,
                    var_p: v,
                }
            }
            InputState::Coherent { re, im } => GaussianMoments {
                mean_x: 2.0 * re,
                mean_p: 2.0 * im,
                var_x: 1.0,
                var_p: 1.0,
            },
            InputState::Squeezed {
                v_s,
                mean_x,
                mean_p,
            } => GaussianMoments {
                mean_x,
                mean_p,
                var_x: v_s,
                var_p: 1.0 / v_s,
            },
        }
    }

    pub fn validate(&self, field: &'static str) -> Result<()> {
        let ok = match *self {
            InputState::Vacuum => true,
            InputState::Thermal { n_bar } => n_bar >= 0.0 && n_bar.is_finite(),
            InputState::Coherent { re, im } => re.is_finite() && im.is_finite(),
            InputState::Squeezed {
                v_s,
                mean_x,
                mean_p,
            } => v_s > 0.0 && v_s.is_finite() && mean_x.is_finite() && mean_p.is_finite(),
        };
        if ok {
            Ok(())
        } else {
            Err(invalid(field, format!("invalid input state {self:?}")))
        }
    }

    /// Mean photon number (normal ordered).
    pub fn mean_photons(&self) -> f64 {
        let m = self.moments();
        (m.var_x + m.var_p + m.mean_x.powi(2) + m.mean_p.powi(2) - 2.0) / 4.0
    }

    /// Photon-number variance of the Gaussian state.
    pub fn photon_variance(&self) -> f64 {
        let m = self.moments();
        (m.var_x.powi(2) + m.var_p.powi(2)) / 8.0 - 0.25
            + (m.var_x * m.mean_x.powi(2) + m.var_p * m.mean_p.powi(2)) / 4.0
    }

    /// Variance of `x cos φ + p sin φ`.
    pub fn quadrature_variance(&self, phi: f64) -> f64 {
        let m = self.moments();
        m.var_x * phi.cos().powi(2) + m.var_p * phi.sin().powi(2)
    }
}

/// Detector plus the states fed into it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OracleConfig {
    pub detector: DetectorConfig,
    pub matched_state: InputState,
    pub unmatched_state: InputState,
    pub samples: u64,
    pub seed: u64,
    pub batches: u32,
}

impl OracleConfig {
    pub fn new(detector: DetectorConfig, matched: InputState, unmatched: InputState) -> Self {
        Self {
            detector,
            matched_state: matched,
            unmatched_state: unmatched,
            samples: DEFAULT_SAMPLES,
            seed: 0,
            batches: DEFAULT_BATCHES,
        }
    }

    pub fn with_samples(mut self, samples: u64) -> Self {
        self.samples = samples;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn validate(&self) -> Result<()> {
        self.detector.validate()?;
        self.matched_state.validate("matched_state")?;
        self.unmatched_state.validate("unmatched_state")?;
        if self.samples < MIN_SAMPLES {
            return Err(invalid(
                "samples",
                format!("need at least {MIN_SAMPLES}, got {}", self.samples),
            ));
        }
        if self.batches < 2 || u64::from(self.batches) > self.samples {
            return Err(invalid(
                "batches",
                format!("need 2 ≤ batches ≤ samples, got {}", self.batches),
            ));
        }
        Ok(())
    }

    /// Shot-noise reference `Var(Δ⁰) = M α² T_a/(1−T_a)` of the blocked
    /// detector. Reduces to `M α²` when balanced.
    pub fn shot_noise_reference(&self) -> Result<f64> {
        let d = &self.detector;
        Ok(f64::from(d.matched) * d.alpha * d.alpha * g_coefficient(d.t_a)?)
    }

    fn batch_sizes(&self) -> Vec<u64> {
        let b = u64::from(self.batches);
        let base = self.samples / b;
        let extra = self.samples % b;
        (0..b).map(|i| base + u64::from(i < extra)).collect()
    }
}

fn batch_rng(seed: u64, batch: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(batch);
    rng
}

/// Per-sample propagation through the coupling beamsplitter.
#[derive(Debug, Clone)]
struct Photodetection {
    matched: usize,
    unmatched: usize,
    sig_a: GaussianMoments,
    sig_b: GaussianMoments,
    lo: Complex<f64>,
    ta: (f64, f64),
    tb: (f64, f64),
    epsilon: f64,
    g: f64,
}

fn draw(m: &GaussianMoments, z1: f64, z2: f64) -> Complex<f64> {
    // a = (x + i p) / 2
    Complex::new(
        0.5 * (m.mean_x + m.var_x.sqrt() * z1),
        0.5 * (m.mean_p + m.var_p.sqrt() * z2),
    )
}

impl Photodetection {
    fn new(cfg: &OracleConfig) -> Result<Self> {
        let d = &cfg.detector;
        Ok(Self {
            matched: d.matched as usize,
            unmatched: d.unmatched as usize,
            sig_a: cfg.matched_state.moments(),
            sig_b: cfg.unmatched_state.moments(),
            lo: Complex::from_polar(d.alpha, d.phi),
            ta: (d.t_a.sqrt(), (1.0 - d.t_a).sqrt()),
            tb: (d.t_b.sqrt(), (1.0 - d.t_b).sqrt()),
            epsilon: d.epsilon,
            g: g_coefficient(d.t_a)?,
        })
    }

    /// Photocurrent difference with the signal present and with every signal
    /// mode replaced by vacuum, from the same normal deviates.
    fn sample_pair<R: Rng>(&self, rng: &mut R) -> (f64, f64) {
        let vac = InputState::Vacuum.moments();
        let (st, sr) = self.ta;
        let (mut n1, mut n2) = (0.0, 0.0);
        let (mut n1_0, mut n2_0) = (0.0, 0.0);
        for _ in 0..self.matched {
            let z1: f64 = rng.sample(StandardNormal);
            let z2: f64 = rng.sample(StandardNormal);
            let a = draw(&self.sig_a, z1, z2);
            let a0 = draw(&vac, z1, z2);
            n1 += (a * st + self.lo * sr).norm_sqr();
            n2 += (-a * sr + self.lo * st).norm_sqr();
            n1_0 += (a0 * st + self.lo * sr).norm_sqr();
            n2_0 += (-a0 * sr + self.lo * st).norm_sqr();
        }
        let (bt, br) = self.tb;
        let (mut u1, mut u2) = (0.0, 0.0);
        let (mut u1_0, mut u2_0) = (0.0, 0.0);
        for _ in 0..self.unmatched {
            let z1: f64 = rng.sample(StandardNormal);
            let z2: f64 = rng.sample(StandardNormal);
            let z3: f64 = rng.sample(StandardNormal);
            let z4: f64 = rng.sample(StandardNormal);
            let b = draw(&self.sig_b, z1, z2);
            let b0 = draw(&vac, z1, z2);
            let v = draw(&vac, z3, z4);
            u1 += (b * bt + v * br).norm_sqr();
            u2 += (-b * br + v * bt).norm_sqr();
            u1_0 += (b0 * bt + v * br).norm_sqr();
            u2_0 += (-b0 * br + v * bt).norm_sqr();
        }
        let e = self.epsilon;
        let signal = (n1 + e * u1) - self.g * (n2 + e * u2);
        let blocked = (n1_0 + e * u1_0) - self.g * (n2_0 + e * u2_0);
        (signal, blocked)
    }
}

/// Stream of signal-present photocurrent samples `n₁ − g·n₂`, in batch order.
pub struct PhotocurrentStream {
    model: Photodetection,
    seed: u64,
    sizes: Vec<u64>,
    batch: usize,
    left_in_batch: u64,
    rng: ChaCha8Rng,
}

impl Iterator for PhotocurrentStream {
    type Item = f64;

    fn next(&mut self) -> Option<f64> {
        while self.left_in_batch == 0 {
            self.batch += 1;
            if self.batch >= self.sizes.len() {
                return None;
            }
            self.left_in_batch = self.sizes[self.batch];
            self.rng = batch_rng(self.seed, self.batch as u64);
        }
        self.left_in_batch -= 1;
        Some(self.model.sample_pair(&mut self.rng).0)
    }

    fn size_hint(&self) -> (usize, Option<usize>) {
        let rest: u64 = self.left_in_batch + self.sizes.iter().skip(self.batch + 1).sum::<u64>();
        let rest = rest as usize;
        (rest, Some(rest))
    }
}

/// Raw photocurrent samples for `config`.
pub fn sample_photocurrent(config: &OracleConfig) -> Result<PhotocurrentStream> {
    config.validate()?;
    let sizes = config.batch_sizes();
    Ok(PhotocurrentStream {
        model: Photodetection::new(config)?,
        seed: config.seed,
        left_in_batch: sizes[0],
        sizes,
        batch: 0,
        rng: batch_rng(config.seed, 0),
    })
}

/// Normalized variance estimate.
#[derive(Debug, Clone, PartialEq)]
pub struct OracleEstimate {
    /// `(Var Δ − Var Δ⁰) / Var_shot + 1`, SNU.
    pub value: f64,
    pub stderr: f64,
    pub samples_used: u64,
    pub warning: Option<String>,
}

/// Streaming moments with Chan's pairwise merge.
#[derive(Debug, Clone, Copy, Default)]
struct Moments {
    n: f64,
    mean: f64,
    m2: f64,
}

impl Moments {
    fn from_slice(xs: &[f64]) -> Self {
        let n = xs.len() as f64;
        let mean = xs.iter().sum::<f64>() / n;
        let m2 = xs.iter().map(|x| (x - mean).powi(2)).sum();
        Self { n, mean, m2 }
    }

    fn merge(self, o: Self) -> Self {
        if self.n == 0.0 {
            return o;
        }
        let n = self.n + o.n;
        let d = o.mean - self.mean;
        Self {
            n,
            mean: self.mean + d * o.n / n,
            m2: self.m2 + o.m2 + d * d * self.n * o.n / n,
        }
    }

    fn variance(&self) -> f64 {
        self.m2 / (self.n - 1.0)
    }
}

#[derive(Debug, Clone, Copy, Default)]
struct BatchStats {
    signal: Moments,
    blocked: Moments,
    /// `q = (Δ − Δ̄)² − (Δ⁰ − Δ̄⁰)²`; its spread is the fourth-moment
    /// error of the variance difference.
    q: Moments,
}

fn run_batch(model: &Photodetection, seed: u64, batch: u64, size: u64) -> BatchStats {
    let mut rng = batch_rng(seed, batch);
    let mut sig = Vec::with_capacity(size as usize);
    let mut blk = Vec::with_capacity(size as usize);
    for _ in 0..size {
        let (s, b) = model.sample_pair(&mut rng);
        sig.push(s);
        blk.push(b);
    }
    let signal = Moments::from_slice(&sig);
    let blocked = Moments::from_slice(&blk);
    let q: Vec<f64> = sig
        .iter()
        .zip(&blk)
        .map(|(s, b)| (s - signal.mean).powi(2) - (b - blocked.mean).powi(2))
        .collect();
    BatchStats {
        signal,
        blocked,
        q: Moments::from_slice(&q),
    }
}

fn run(config: &OracleConfig) -> Result<(BatchStats, f64)> {
    config.validate()?;
    let model = Photodetection::new(config)?;
    let sizes = config.batch_sizes();
    let batches: Vec<BatchStats> = sizes
        .par_iter()
        .enumerate()
        .map(|(i, &n)| run_batch(&model, config.seed, i as u64, n))
        .collect();
    let total = batches
        .into_iter()
        .fold(BatchStats::default(), |acc, b| BatchStats {
            signal: acc.signal.merge(b.signal),
            blocked: acc.blocked.merge(b.blocked),
            q: acc.q.merge(b.q),
        });
    Ok((total, config.shot_noise_reference()?))
}

/// Normalized quadrature variance measured by the simulated detector.
pub fn oracle_normalized_variance(config: &OracleConfig) -> Result<OracleEstimate> {
    let (stats, shot) = run(config)?;
    let diff = stats.signal.variance() - stats.blocked.variance();
    let value = diff / shot + 1.0;
    let stderr = (stats.q.variance() / stats.q.n).sqrt() / shot;

    let d = &config.detector;
    let expects_noise =
        d.epsilon > 0.0 && d.unmatched > 0 && config.unmatched_state.mean_photons() > 0.0;
    let mismatch = value - config.matched_state.quadrature_variance(d.phi);
    let warning = (expects_noise && stderr > 0.1 * mismatch.abs()).then(|| {
        format!(
            "insufficient samples: stderr {stderr:.3e} exceeds 10% of the mismatch-noise term {mismatch:.3e}"
        )
    });
    Ok(OracleEstimate {
        value,
        stderr,
        samples_used: config.samples,
        warning,
    })
}

/// One line of a convergence study.
#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceRow {
    pub samples: u64,
    pub value: f64,
    pub stderr: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceReport {
    pub rows: Vec<ConvergenceRow>,
    /// Every consecutive stderr ratio lies within a factor 1.5 of the
    /// `√(n_i / n_{i+1})` law.
    pub follows_sqrt_law: bool,
}

/// Re-runs the estimator at each sample count of `schedule`.
pub fn convergence_report(config: &OracleConfig, schedule: &[u64]) -> Result<ConvergenceReport> {
    if schedule.windows(2).any(|w| w[1] <= w[0]) {
        return Err(invalid("schedule", "sample counts must increase"));
    }
    let rows = schedule
        .iter()
        .map(|&n| {
            let est = oracle_normalized_variance(&config.with_samples(n))?;
            Ok(ConvergenceRow {
                samples: n,
                value: est.value,
                stderr: est.stderr,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let follows_sqrt_law = rows.windows(2).all(|w| {
        let ideal = (w[0].samples as f64 / w[1].samples as f64).sqrt();
        let ratio = w[1].stderr / w[0].stderr;
        ratio / ideal <= 1.5 && ideal / ratio <= 1.5
    });
    Ok(ConvergenceReport {
        rows,
        follows_sqrt_law,
    })
}

/// Phase-space mean of `(x² + p²)/4` for one mode, with its standard error.
/// Exceeds the quantum mean photon number by the ordering offset 1/2.
pub fn phase_space_photon_mean(state: &InputState, samples: u64, seed: u64) -> (f64, f64) {
    let m = state.moments();
    let mut rng = batch_rng(seed, 0);
    let vals: Vec<f64> = (0..samples)
        .map(|_| {
            let z1: f64 = rng.sample(StandardNormal);
            let z2: f64 = rng.sample(StandardNormal);
            draw(&m, z1, z2).norm_sqr()
        })
        .collect();
    let mo = Moments::from_slice(&vals);
    (mo.mean, (mo.variance() / mo.n).sqrt())
}
