//! Command implementations. Each returns a [`Report`] ready for rendering.

use rayon::prelude::*;

use brightcv_core::channel::{attenuation_db, distance_km, eta_from_db};
use brightcv_core::detector::{
    balanced_variance, mismatch_noise, squeezing_vanish_threshold, ModeStatistics,
};
use brightcv_core::gaussian::{log_negativity, signed_log_negativity};
use brightcv_core::oracle::{
    default_grid, validate_grid, GridSpec, OracleConfig, ValidationReport,
};
use brightcv_core::protocols::{
    entanglement_break_numeric, entanglement_break_threshold, shared_cm,
};
use brightcv_core::qkd::{
    key_rate, key_rate_at_db, max_tolerable_attenuation, optimal_photon_number,
    AttenuationThreshold,
};
use brightcv_core::search::bisect;

use crate::error::{CliError, Result};
use crate::output::{Cell, Report, CONVENTIONS, GENERATOR};
use crate::settings::{Command, Settings, SweepParam, ThresholdKind};

/// Outcome of a command: the report, plus a validation failure that should
/// be signalled after the report is written.
pub struct Outcome {
    pub report: Report,
    pub failure: Option<CliError>,
}

pub fn execute(command: Command, settings: &Settings) -> Result<Outcome> {
    let (columns, rows, failure) = match command {
        Command::SweepKeyRate => (KEY_RATE_COLUMNS.to_vec(), sweep_key_rate(settings)?, None),
        Command::SweepEntanglement => (
            ENTANGLEMENT_COLUMNS.to_vec(),
            sweep_entanglement(settings)?,
            None,
        ),
        Command::Threshold(kind) => (
            THRESHOLD_COLUMNS.to_vec(),
            vec![threshold(kind, settings)?],
            None,
        ),
        Command::OptimizeN => (OPTIMUM_COLUMNS.to_vec(), vec![optimize_n(settings)?], None),
        Command::OracleValidate => {
            let report = oracle_validate(settings)?;
            let failed = report.rows.iter().filter(|r| !r.passed()).count();
            let failure = (failed > 0).then_some(CliError::OracleFailed {
                failed,
                total: report.rows.len(),
            });
            (ORACLE_COLUMNS.to_vec(), oracle_rows(&report), failure)
        }
    };
    Ok(Outcome {
        report: Report {
            header: header(command, settings),
            columns,
            rows,
        },
        failure,
    })
}

fn header(command: Command, settings: &Settings) -> Vec<(String, String)> {
    let mut h = vec![
        ("generator".to_string(), GENERATOR.to_string()),
        ("command".to_string(), command.name().to_string()),
    ];
    if let Command::Threshold(kind) = command {
        h.push(("kind".into(), kind.name().into()));
    }
    h.extend(
        settings
            .entries(command)
            .into_iter()
            .map(|(k, v)| (k.to_string(), v)),
    );
    h.extend(
        CONVENTIONS
            .iter()
            .map(|(k, v)| (k.to_string(), v.to_string())),
    );
    h
}

/// One grid point of a sweep with the swept value substituted.
struct Point {
    n_bar: f64,
    eta: f64,
    eps_tot: f64,
    chi: f64,
}

fn point(s: &Settings, x: f64) -> Result<Point> {
    let mut p = Point {
        n_bar: s.n_bar,
        eta: s.eta,
        eps_tot: s.eps_tot,
        chi: s.chi,
    };
    match s.sweep.param {
        SweepParam::AttenuationDb => p.eta = eta_from_db(x)?,
        SweepParam::NBar => p.n_bar = x,
        SweepParam::NTot => p.n_bar = x / modes(s),
        SweepParam::EpsTot => p.eps_tot = x,
        SweepParam::Chi => p.chi = x,
    }
    Ok(p)
}

fn modes(s: &Settings) -> f64 {
    f64::from(s.modes_matched) + f64::from(s.modes_unmatched)
}

const KEY_RATE_COLUMNS: &[&str] = &[
    "attenuation_db",
    "distance_km",
    "n_bar",
    "n_tot",
    "eps_tot",
    "chi",
    "i_ab",
    "chi_be",
    "key_rate",
];

fn sweep_key_rate(s: &Settings) -> Result<Vec<Vec<Cell>>> {
    s.sweep
        .values()
        .par_iter()
        .map(|&x| {
            let p = point(s, x)?;
            let r = key_rate(
                &s.source(p.n_bar)?,
                &s.channel(p.eta, p.chi)?,
                &s.detector(p.eps_tot)?,
                s.beta,
            )?;
            let db = attenuation_db(p.eta)?;
            Ok(vec![
                Cell::Num(db),
                Cell::Num(distance_km(db)),
                Cell::Num(p.n_bar),
                Cell::Num(p.n_bar * modes(s)),
                Cell::Num(p.eps_tot),
                Cell::Num(p.chi),
                Cell::Num(r.i_ab),
                Cell::Num(r.chi_be),
                Cell::Num(r.key_rate),
            ])
        })
        .collect()
}

const ENTANGLEMENT_COLUMNS: &[&str] = &[
    "n_tot",
    "n_bar",
    "attenuation_db",
    "eta",
    "eps_tot",
    "chi",
    "log_negativity",
];

fn sweep_entanglement(s: &Settings) -> Result<Vec<Vec<Cell>>> {
    s.sweep
        .values()
        .par_iter()
        .map(|&x| {
            let p = point(s, x)?;
            let cm = shared_cm(
                &s.source(p.n_bar)?,
                &s.channel(p.eta, p.chi)?,
                &s.detector(p.eps_tot)?,
                s.scheme,
            )?;
            Ok(vec![
                Cell::Num(p.n_bar * modes(s)),
                Cell::Num(p.n_bar),
                Cell::Num(attenuation_db(p.eta)?),
                Cell::Num(p.eta),
                Cell::Num(p.eps_tot),
                Cell::Num(p.chi),
                Cell::Num(log_negativity(&cm)?),
            ])
        })
        .collect()
}

const THRESHOLD_COLUMNS: &[&str] = &[
    "kind",
    "status",
    "closed_form",
    "numeric",
    "relative_difference",
    "value_at_threshold",
    "distance_km",
    "monotone",
];

fn relative(a: f64, b: f64) -> Cell {
    Cell::Num((a - b).abs() / a.abs().max(b.abs()))
}

/// Root of `V_S + ε_tot² n̄ = 1`, found by doubling then bisection.
fn squeezing_numeric(v_s: f64, eps_tot: f64) -> Result<f64> {
    let excess = |n: f64| -> brightcv_core::Result<f64> {
        Ok(balanced_variance(&ModeStatistics::thermal(v_s, n), eps_tot) - 1.0)
    };
    let mut hi = 1.0;
    while excess(hi)? <= 0.0 {
        hi *= 2.0;
        if !hi.is_finite() {
            return Err(brightcv_core::Error::Domain("squeezing never vanishes".into()).into());
        }
    }
    Ok(bisect(excess, 0.0, hi, 1e-13 * hi)?)
}

fn threshold(kind: ThresholdKind, s: &Settings) -> Result<Vec<Cell>> {
    let name = Cell::Text(kind.name().into());
    let finite = Cell::Text("finite".into());
    Ok(match kind {
        ThresholdKind::Squeezing => {
            let closed = squeezing_vanish_threshold(s.v_s, s.eps_tot)?;
            let numeric = squeezing_numeric(s.v_s, s.eps_tot)?;
            let at = balanced_variance(&ModeStatistics::thermal(s.v_s, closed), s.eps_tot);
            vec![
                name,
                finite,
                Cell::Num(closed),
                Cell::Num(numeric),
                relative(closed, numeric),
                Cell::Num(at),
                Cell::Empty,
                Cell::Empty,
            ]
        }
        ThresholdKind::Entanglement => {
            let closed = entanglement_break_threshold(s.eps_tot)?;
            let ch = s.channel(s.eta, s.chi)?;
            let det = s.detector(s.eps_tot)?;
            let src = s.source(s.n_bar)?;
            let numeric = entanglement_break_numeric(&src, &ch, &det, s.scheme)?;
            let witness =
                signed_log_negativity(&shared_cm(&src.with_n_bar(numeric), &ch, &det, s.scheme)?)?;
            vec![
                name,
                finite,
                Cell::Num(closed),
                Cell::Num(numeric),
                relative(closed, numeric),
                Cell::Num(witness),
                Cell::Empty,
                Cell::Empty,
            ]
        }
        ThresholdKind::Attenuation => {
            let src = s.source(s.n_bar)?;
            let det = s.detector(s.eps_tot)?;
            match max_tolerable_attenuation(&src, &det, s.chi, s.beta, &s.search)? {
                AttenuationThreshold::Finite { db, monotone } => {
                    let k = key_rate_at_db(&src, &det, s.chi, s.beta, db)?.key_rate;
                    vec![
                        name,
                        finite,
                        Cell::Empty,
                        Cell::Num(db),
                        Cell::Empty,
                        Cell::Num(k),
                        Cell::Num(distance_km(db)),
                        Cell::Bool(monotone),
                    ]
                }
                AttenuationThreshold::BeyondRange { max_db } => {
                    let k = key_rate_at_db(&src, &det, s.chi, s.beta, max_db)?.key_rate;
                    vec![
                        name,
                        Cell::Text("beyond_range".into()),
                        Cell::Empty,
                        Cell::Num(max_db),
                        Cell::Empty,
                        Cell::Num(k),
                        Cell::Num(distance_km(max_db)),
                        Cell::Empty,
                    ]
                }
                AttenuationThreshold::NeverSecure => {
                    let k = key_rate_at_db(&src, &det, s.chi, s.beta, 0.0)?.key_rate;
                    vec![
                        name,
                        Cell::Text("never_secure".into()),
                        Cell::Empty,
                        Cell::Empty,
                        Cell::Empty,
                        Cell::Num(k),
                        Cell::Empty,
                        Cell::Empty,
                    ]
                }
            }
        }
    })
}

const OPTIMUM_COLUMNS: &[&str] = &[
    "n_bar_opt",
    "n_tot_opt",
    "key_rate_opt",
    "unimodal",
    "attenuation_db",
    "distance_km",
];

fn optimize_n(s: &Settings) -> Result<Vec<Cell>> {
    let ch = s.channel(s.eta, s.chi)?;
    let det = s.detector(s.eps_tot)?;
    let opt = optimal_photon_number(&ch, &det, s.beta, &s.source(s.n_bar)?, s.n_min, s.n_max)?;
    let db = attenuation_db(s.eta)?;
    Ok(vec![
        Cell::Num(opt.n_bar),
        Cell::Num(opt.n_bar * modes(s)),
        Cell::Num(opt.key_rate),
        Cell::Bool(opt.unimodal),
        Cell::Num(db),
        Cell::Num(distance_km(db)),
    ])
}

const ORACLE_COLUMNS: &[&str] = &[
    "label", "analytic", "oracle", "stderr", "z", "passed", "warning",
];

fn oracle_validate(s: &Settings) -> Result<ValidationReport> {
    let o = &s.oracle;
    let defaults = GridSpec::default();
    let spec = GridSpec {
        n_bar_values: o.n_bar_values.clone(),
        epsilon_values: o.epsilon_values.clone(),
        matched_values: o.matched_values.clone(),
        unmatched_values: o.unmatched_values.clone(),
        alpha: o.alpha,
        samples: o.samples,
        unbalanced: if o.unbalanced {
            defaults.unbalanced
        } else {
            Vec::new()
        },
        unbalanced_samples: o.unbalanced_samples,
        seed: s.seed.unwrap_or_default(),
    };
    let points = default_grid(&spec)?;
    let scale = o.mismatch_scale;
    let analytic = |c: &OracleConfig| {
        let d = &c.detector;
        let u = &c.unmatched_state;
        Ok(c.matched_state.quadrature_variance(d.phi)
            + scale * mismatch_noise(d, u.mean_photons(), u.photon_variance())?)
    };
    Ok(validate_grid(&points, analytic)?)
}

fn oracle_rows(report: &ValidationReport) -> Vec<Vec<Cell>> {
    report
        .rows
        .iter()
        .map(|r| {
            vec![
                Cell::Text(r.label.clone()),
                Cell::Num(r.analytic),
                Cell::Num(r.value),
                Cell::Num(r.stderr),
                Cell::Num(r.z),
                Cell::Bool(r.passed()),
                r.warning.clone().map_or(Cell::Empty, Cell::Text),
            ]
        })
        .collect()
}
