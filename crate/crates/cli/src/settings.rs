//! Typed run parameters resolved from configuration text and overrides.

use std::str::FromStr;

use brightcv_core::channel::{attenuation_db, eta_from_db};
use brightcv_core::detector::{DetectorConfig, PhotonStatistics};
use brightcv_core::protocols::{SchemeKind, SourceParams};
use brightcv_core::qkd::{AttenuationSearch, DEFAULT_BETA};
use brightcv_core::ChannelParams;

use crate::config::ConfigMap;
use crate::error::{CliError, Result};

/// What a run computes. Together with [`Settings`] it fully determines the
/// output.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    SweepKeyRate,
    SweepEntanglement,
    Threshold(ThresholdKind),
    OptimizeN,
    OracleValidate,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum ThresholdKind {
    Squeezing,
    Entanglement,
    Attenuation,
}

impl ThresholdKind {
    pub fn name(self) -> &'static str {
        match self {
            ThresholdKind::Squeezing => "squeezing",
            ThresholdKind::Entanglement => "entanglement",
            ThresholdKind::Attenuation => "attenuation",
        }
    }
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::SweepKeyRate => "sweep-key-rate",
            Command::SweepEntanglement => "sweep-entanglement",
            Command::Threshold(_) => "threshold",
            Command::OptimizeN => "optimize-n",
            Command::OracleValidate => "oracle-validate",
        }
    }

    pub fn from_parts(command: &str, kind: Option<&str>) -> Result<Self> {
        Ok(match command {
            "sweep-key-rate" => Command::SweepKeyRate,
            "sweep-entanglement" => Command::SweepEntanglement,
            "optimize-n" => Command::OptimizeN,
            "oracle-validate" => Command::OracleValidate,
            "threshold" => {
                let kind = kind.ok_or_else(|| CliError::config("kind", "missing"))?;
                let kind = <ThresholdKind as clap::ValueEnum>::from_str(kind, false)
                    .map_err(|e| CliError::config("kind", e))?;
                Command::Threshold(kind)
            }
            other => {
                return Err(CliError::config(
                    "command",
                    format!("unknown command `{other}`"),
                ))
            }
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepParam {
    AttenuationDb,
    NBar,
    NTot,
    EpsTot,
    Chi,
}

impl SweepParam {
    pub fn name(self) -> &'static str {
        match self {
            SweepParam::AttenuationDb => "attenuation_db",
            SweepParam::NBar => "n_bar",
            SweepParam::NTot => "n_tot",
            SweepParam::EpsTot => "eps_tot",
            SweepParam::Chi => "chi",
        }
    }
}

impl FromStr for SweepParam {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        Ok(match s {
            "attenuation_db" => SweepParam::AttenuationDb,
            "n_bar" => SweepParam::NBar,
            "n_tot" => SweepParam::NTot,
            "eps_tot" => SweepParam::EpsTot,
            "chi" => SweepParam::Chi,
            other => {
                return Err(format!(
                    "expected attenuation_db, n_bar, n_tot, eps_tot or chi, got `{other}`"
                ))
            }
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Spacing {
    Linear,
    Log,
}

impl FromStr for Spacing {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "linear" => Ok(Spacing::Linear),
            "log" => Ok(Spacing::Log),
            other => Err(format!("expected `linear` or `log`, got `{other}`")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepSpec {
    pub param: SweepParam,
    pub start: f64,
    pub stop: f64,
    pub points: usize,
    pub spacing: Spacing,
}

impl SweepSpec {
    pub fn values(&self) -> Vec<f64> {
        match self.spacing {
            Spacing::Linear => brightcv_core::search::linspace(self.start, self.stop, self.points),
            Spacing::Log => brightcv_core::search::logspace(self.start, self.stop, self.points),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OracleSettings {
    pub n_bar_values: Vec<f64>,
    pub epsilon_values: Vec<f64>,
    pub matched_values: Vec<u32>,
    pub unmatched_values: Vec<u32>,
    pub alpha: f64,
    pub samples: u64,
    pub unbalanced: bool,
    pub unbalanced_samples: u64,
    /// Multiplies the analytic mismatch noise; anything but 1 is a negative
    /// control that must make validation fail.
    pub mismatch_scale: f64,
}

/// Fully resolved parameters of one run.
#[derive(Debug, Clone, PartialEq)]
pub struct Settings {
    pub n_bar: f64,
    pub modes_matched: u32,
    pub modes_unmatched: u32,
    pub unmatched_n_bar: Option<f64>,
    pub eps_tot: f64,
    pub alpha: f64,
    pub t_a: f64,
    pub t_b: f64,
    pub photon_stats: PhotonStatistics,
    pub count_excess_noise_photons: bool,
    pub eta: f64,
    pub chi: f64,
    pub beta: f64,
    pub scheme: SchemeKind,
    pub sweep: SweepSpec,
    pub v_s: f64,
    pub n_min: f64,
    pub n_max: f64,
    pub search: AttenuationSearch,
    pub oracle: OracleSettings,
    pub seed: Option<u64>,
}

/// Every key accepted in configuration files and `--set` overrides.
pub const KNOWN_KEYS: &[&str] = &[
    "n_bar",
    "modes_matched",
    "modes_unmatched",
    "unmatched_n_bar",
    "eps_tot",
    "alpha",
    "t_a",
    "t_b",
    "photon_stats",
    "count_excess_noise_photons",
    "eta",
    "attenuation_db",
    "chi",
    "beta",
    "scheme",
    "sweep",
    "start",
    "stop",
    "points",
    "spacing",
    "v_s",
    "n_min",
    "n_max",
    "max_db",
    "step_db",
    "tol_db",
    "oracle.n_bar_values",
    "oracle.epsilon_values",
    "oracle.matched_values",
    "oracle.unmatched_values",
    "oracle.alpha",
    "oracle.samples",
    "oracle.unbalanced",
    "oracle.unbalanced_samples",
    "oracle.mismatch_scale",
    "seed",
];

struct Reader<'a> {
    map: &'a ConfigMap,
}

impl Reader<'_> {
    fn raw(&self, key: &str) -> Option<&str> {
        self.map.get(key).map(String::as_str)
    }

    fn get<T: FromStr>(&self, key: &str, default: T) -> Result<T>
    where
        T::Err: std::fmt::Display,
    {
        match self.raw(key) {
            None => Ok(default),
            Some(v) => v
                .parse()
                .map_err(|e: T::Err| CliError::config(key, format!("`{v}`: {e}"))),
        }
    }

    fn list<T: FromStr>(&self, key: &str, default: Vec<T>) -> Result<Vec<T>>
    where
        T::Err: std::fmt::Display,
    {
        let Some(v) = self.raw(key) else {
            return Ok(default);
        };
        let items = v
            .split(',')
            .map(|s| {
                s.trim()
                    .parse()
                    .map_err(|e: T::Err| CliError::config(key, format!("`{}`: {e}", s.trim())))
            })
            .collect::<Result<Vec<T>>>()?;
        if items.is_empty() {
            return Err(CliError::config(key, "empty list"));
        }
        Ok(items)
    }
}

fn join<T: std::fmt::Debug>(xs: &[T]) -> String {
    xs.iter()
        .map(|x| format!("{x:?}"))
        .collect::<Vec<_>>()
        .join(",")
}

impl Settings {
    pub fn resolve(command: Command, map: &ConfigMap) -> Result<Self> {
        if let Some(key) = map.keys().find(|k| !KNOWN_KEYS.contains(&k.as_str())) {
            return Err(CliError::config(key.as_str(), "unknown key"));
        }
        let r = Reader { map };

        let eta = match (r.raw("eta"), r.raw("attenuation_db")) {
            (Some(_), Some(_)) => {
                return Err(CliError::config(
                    "eta",
                    "set either `eta` or `attenuation_db`, not both",
                ))
            }
            (_, Some(_)) => eta_from_db(r.get("attenuation_db", 0.0)?)
                .map_err(|e| CliError::config("attenuation_db", e.to_string()))?,
            _ => r.get("eta", 1.0)?,
        };

        let default_scheme = match command {
            Command::SweepEntanglement | Command::Threshold(ThresholdKind::Entanglement) => {
                SchemeKind::EprBased
            }
            _ => SchemeKind::PrepareAndMeasure,
        };
        let default_sweep = match command {
            Command::SweepEntanglement => SweepSpec {
                param: SweepParam::NTot,
                start: 1.0,
                stop: 1e8,
                points: 161,
                spacing: Spacing::Log,
            },
            _ => SweepSpec {
                param: SweepParam::AttenuationDb,
                start: 0.0,
                stop: 60.0,
                points: 121,
                spacing: Spacing::Linear,
            },
        };
        let sweep = SweepSpec {
            param: r.get("sweep", default_sweep.param)?,
            start: r.get("start", default_sweep.start)?,
            stop: r.get("stop", default_sweep.stop)?,
            points: r.get("points", default_sweep.points)?,
            spacing: r.get("spacing", default_sweep.spacing)?,
        };
        let search_default = AttenuationSearch::default();

        let unmatched_n_bar = match r.raw("unmatched_n_bar") {
            None | Some("auto") => None,
            Some(_) => Some(r.get("unmatched_n_bar", 0.0)?),
        };

        let s = Settings {
            n_bar: r.get("n_bar", 10.0)?,
            modes_matched: r.get("modes_matched", 500)?,
            modes_unmatched: r.get("modes_unmatched", 500)?,
            unmatched_n_bar,
            eps_tot: r.get("eps_tot", 1e-2)?,
            alpha: r.get("alpha", 1.0)?,
            t_a: r.get("t_a", 0.5)?,
            t_b: r.get("t_b", 0.5)?,
            photon_stats: r.get("photon_stats", PhotonStatistics::Thermal)?,
            count_excess_noise_photons: r.get("count_excess_noise_photons", false)?,
            eta,
            chi: r.get("chi", 0.0)?,
            beta: r.get("beta", DEFAULT_BETA)?,
            scheme: r.get("scheme", default_scheme)?,
            sweep,
            v_s: r.get("v_s", 0.1)?,
            n_min: r.get("n_min", 1e-2)?,
            n_max: r.get("n_max", 1e6)?,
            search: AttenuationSearch {
                max_db: r.get("max_db", search_default.max_db)?,
                step_db: r.get("step_db", search_default.step_db)?,
                tol_db: r.get("tol_db", search_default.tol_db)?,
            },
            oracle: OracleSettings {
                n_bar_values: r.list("oracle.n_bar_values", vec![0.0, 1.0, 10.0, 100.0])?,
                epsilon_values: r.list("oracle.epsilon_values", vec![0.1, 1.0])?,
                matched_values: r.list("oracle.matched_values", vec![1, 2, 4])?,
                unmatched_values: r.list("oracle.unmatched_values", vec![1, 2, 4])?,
                alpha: r.get("oracle.alpha", 1.0)?,
                samples: r.get("oracle.samples", 1_000_000)?,
                unbalanced: r.get("oracle.unbalanced", true)?,
                unbalanced_samples: r.get("oracle.unbalanced_samples", 10_000_000)?,
                mismatch_scale: r.get("oracle.mismatch_scale", 1.0)?,
            },
            seed: match r.raw("seed") {
                None => None,
                Some(_) => Some(r.get("seed", 0u64)?),
            },
        };
        s.check(command)?;
        Ok(s)
    }

    fn check(&self, command: Command) -> Result<()> {
        let sw = &self.sweep;
        if matches!(command, Command::SweepKeyRate | Command::SweepEntanglement) {
            if sw.points < 2 {
                return Err(CliError::config("points", "need at least 2 points"));
            }
            if !(sw.start.is_finite() && sw.stop.is_finite()) {
                return Err(CliError::config("start", "range must be finite"));
            }
            if sw.spacing == Spacing::Log && !(sw.start > 0.0 && sw.stop > 0.0) {
                return Err(CliError::config(
                    "spacing",
                    "log spacing needs positive endpoints",
                ));
            }
        }
        if command == Command::OracleValidate && self.seed.is_none() {
            return Err(CliError::config(
                "seed",
                "oracle runs need an explicit --seed",
            ));
        }
        // surface parameter errors before any work is done
        self.source(self.n_bar)?;
        self.detector(self.eps_tot)?;
        self.channel(self.eta, self.chi)?;
        Ok(())
    }

    pub fn source(&self, n_bar: f64) -> Result<SourceParams> {
        let mut s = SourceParams::new(n_bar, self.modes_matched, self.modes_unmatched)?;
        s.unmatched_n_bar = self.unmatched_n_bar;
        s.validate()?;
        Ok(s)
    }

    pub fn detector(&self, eps_tot: f64) -> Result<DetectorConfig> {
        let mut d = DetectorConfig::with_eps_tot(
            self.modes_matched,
            self.modes_unmatched,
            eps_tot,
            self.alpha,
        )?
        .with_transmittances(self.t_a, self.t_b)?;
        d.photon_stats = self.photon_stats;
        d.count_excess_noise_photons = self.count_excess_noise_photons;
        Ok(d)
    }

    pub fn channel(&self, eta: f64, chi: f64) -> Result<ChannelParams> {
        Ok(ChannelParams::new(eta, chi)?)
    }

    pub fn attenuation_db(&self) -> f64 {
        attenuation_db(self.eta).unwrap_or(f64::INFINITY)
    }

    /// Parameters that influence `command`, in a fixed order, formatted so
    /// that they parse back to identical values.
    pub fn entries(&self, command: Command) -> Vec<(&'static str, String)> {
        let mut out: Vec<(&'static str, String)> = Vec::new();
        let model = |out: &mut Vec<(&'static str, String)>| {
            out.push(("n_bar", format!("{:?}", self.n_bar)));
            out.push(("modes_matched", self.modes_matched.to_string()));
            out.push(("modes_unmatched", self.modes_unmatched.to_string()));
            out.push((
                "unmatched_n_bar",
                self.unmatched_n_bar
                    .map_or("auto".into(), |v| format!("{v:?}")),
            ));
            out.push(("eps_tot", format!("{:?}", self.eps_tot)));
            out.push(("alpha", format!("{:?}", self.alpha)));
            out.push(("t_a", format!("{:?}", self.t_a)));
            out.push(("t_b", format!("{:?}", self.t_b)));
            out.push(("photon_stats", self.photon_stats.name().into()));
            out.push((
                "count_excess_noise_photons",
                self.count_excess_noise_photons.to_string(),
            ));
            out.push(("eta", format!("{:?}", self.eta)));
            out.push(("chi", format!("{:?}", self.chi)));
            out.push(("beta", format!("{:?}", self.beta)));
            out.push(("scheme", self.scheme.name().into()));
        };
        match command {
            Command::SweepKeyRate | Command::SweepEntanglement => {
                model(&mut out);
                let sw = &self.sweep;
                out.push(("sweep", sw.param.name().into()));
                out.push(("start", format!("{:?}", sw.start)));
                out.push(("stop", format!("{:?}", sw.stop)));
                out.push(("points", sw.points.to_string()));
                let spacing = match sw.spacing {
                    Spacing::Linear => "linear",
                    Spacing::Log => "log",
                };
                out.push(("spacing", spacing.into()));
            }
            Command::Threshold(ThresholdKind::Squeezing) => {
                out.push(("eps_tot", format!("{:?}", self.eps_tot)));
                out.push(("v_s", format!("{:?}", self.v_s)));
            }
            Command::Threshold(ThresholdKind::Entanglement) => model(&mut out),
            Command::Threshold(ThresholdKind::Attenuation) => {
                model(&mut out);
                out.push(("max_db", format!("{:?}", self.search.max_db)));
                out.push(("step_db", format!("{:?}", self.search.step_db)));
                out.push(("tol_db", format!("{:?}", self.search.tol_db)));
            }
            Command::OptimizeN => {
                model(&mut out);
                out.push(("n_min", format!("{:?}", self.n_min)));
                out.push(("n_max", format!("{:?}", self.n_max)));
            }
            Command::OracleValidate => {
                let o = &self.oracle;
                out.push(("oracle.n_bar_values", join(&o.n_bar_values)));
                out.push(("oracle.epsilon_values", join(&o.epsilon_values)));
                out.push(("oracle.matched_values", join(&o.matched_values)));
                out.push(("oracle.unmatched_values", join(&o.unmatched_values)));
                out.push(("oracle.alpha", format!("{:?}", o.alpha)));
                out.push(("oracle.samples", o.samples.to_string()));
                out.push(("oracle.unbalanced", o.unbalanced.to_string()));
                out.push((
                    "oracle.unbalanced_samples",
                    o.unbalanced_samples.to_string(),
                ));
                out.push(("oracle.mismatch_scale", format!("{:?}", o.mismatch_scale)));
                if let Some(seed) = self.seed {
                    out.push(("seed", seed.to_string()));
                }
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn map(pairs: &[(&str, &str)]) -> ConfigMap {
        pairs
            .iter()
            .map(|(k, v)| (k.to_string(), v.to_string()))
            .collect()
    }

    #[test]
    fn defaults_resolve() {
        let s = Settings::resolve(Command::SweepKeyRate, &ConfigMap::new()).unwrap();
        assert_eq!(s.eta, 1.0);
        assert_eq!(s.sweep.param, SweepParam::AttenuationDb);
        assert_eq!(s.scheme, SchemeKind::PrepareAndMeasure);
        let e = Settings::resolve(Command::SweepEntanglement, &ConfigMap::new()).unwrap();
        assert_eq!(e.sweep.spacing, Spacing::Log);
        assert_eq!(e.scheme, SchemeKind::EprBased);
    }

    #[test]
    fn entries_round_trip() {
        let m = map(&[
            ("eta", "0.9"),
            ("n_bar", "1e-7"),
            ("chi", "0.05"),
            ("sweep", "n_tot"),
            ("spacing", "log"),
            ("start", "1"),
            ("stop", "1e8"),
        ]);
        let s = Settings::resolve(Command::SweepKeyRate, &m).unwrap();
        let back: ConfigMap = s
            .entries(Command::SweepKeyRate)
            .into_iter()
            .map(|(k, v)| (k.to_string(), v))
            .collect();
        assert_eq!(Settings::resolve(Command::SweepKeyRate, &back).unwrap(), s);
    }

    #[test]
    fn errors_name_the_field() {
        let err = Settings::resolve(Command::SweepKeyRate, &map(&[("chi", "lots")])).unwrap_err();
        assert!(err.to_string().contains("chi"), "{err}");
        let err = Settings::resolve(Command::SweepKeyRate, &map(&[("bogus", "1")])).unwrap_err();
        assert!(err.to_string().contains("bogus"));
        let err = Settings::resolve(Command::SweepKeyRate, &map(&[("eta", "1.5")])).unwrap_err();
        assert!(err.to_string().contains("eta"), "{err}");
        assert_eq!(err.exit_code(), 1);
        let err = Settings::resolve(Command::OracleValidate, &ConfigMap::new()).unwrap_err();
        assert!(err.to_string().contains("seed"));
        assert!(Settings::resolve(
            Command::SweepKeyRate,
            &map(&[("eta", "1"), ("attenuation_db", "3")])
        )
        .is_err());
    }
}
