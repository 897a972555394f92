//! Configuration files, experiment data and output writers.
//!
//! Configs are TOML documents keyed by section, e.g.
//!
//! ```toml
//! physical.D = 3.66e-4
//! physical.sigma_coeff = 10.0
//! run.N = 100
//! integrator.rel_tol = 1e-8
//! ```
//!
//! Every key is optional; missing keys take the dense-rubber calibration values.

use std::fmt::Write as _;
use std::fs;
use std::io::Read;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::analysis::{ComparisonReport, ExperimentSeries, FitResult, FitMode, Material, Measurement};
use crate::engine::{uniform_times, RunConfig, RunResult, DEFAULT_OUTPUT_SAMPLES};
use crate::error::{Error, Result};
use crate::integrator::{IntegratorOptions, Method};
use crate::params::{PhysicalParams, Reservoir, SwellingLaw};

/// Format with 12 significant digits.
pub fn fmt_sig(x: f64) -> String {
    format!("{x:.11e}")
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PhysicalSection {
    #[serde(rename = "D")]
    pub diffusivity: f64,
    pub beta: f64,
    pub a0: f64,
    pub s0: f64,
    pub m0: f64,
    /// Constant reservoir concentration; ignored when `b_series` is given.
    pub b: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub b_series: Option<Vec<[f64; 2]>>,
    #[serde(rename = "H")]
    pub henry: f64,
    /// Divisor `c` in `sigma(s) = s / c`; `inf` turns swelling off.
    pub sigma_coeff: f64,
    pub ell: f64,
    pub x_ref: f64,
    pub m_ref: f64,
    #[serde(rename = "T")]
    pub observation_time: f64,
}

impl Default for PhysicalSection {
    fn default() -> Self {
        let p = PhysicalParams::dense_rubber();
        let b = match p.reservoir {
            Reservoir::Constant(b) => b,
            Reservoir::PiecewiseLinear(_) => unreachable!(),
        };
        Self {
            diffusivity: p.diffusivity,
            beta: p.absorption_rate,
            a0: p.kinetic_coeff,
            s0: p.initial_front,
            m0: p.initial_concentration,
            b,
            b_series: None,
            henry: p.henry,
            sigma_coeff: p.swelling.divisor(),
            ell: p.max_length,
            x_ref: p.x_ref,
            m_ref: p.m_ref,
            observation_time: p.observation_time,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunSection {
    #[serde(rename = "N")]
    pub nodes: usize,
    /// Evenly spaced front samples over `[0, T]`, used when `output_times` is absent.
    pub output_samples: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub output_times: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub profile_times: Option<Vec<f64>>,
}

impl Default for RunSection {
    fn default() -> Self {
        Self {
            nodes: 100,
            output_samples: DEFAULT_OUTPUT_SAMPLES,
            output_times: None,
            profile_times: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct IntegratorSection {
    /// `adaptive` or `rk4`.
    pub method: String,
    pub rel_tol: f64,
    pub abs_tol: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub max_step: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub initial_step: Option<f64>,
    /// Dimensionless step for `rk4`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub step: Option<f64>,
}

impl Default for IntegratorSection {
    fn default() -> Self {
        let o = IntegratorOptions::default();
        Self {
            method: "adaptive".into(),
            rel_tol: o.rel_tol,
            abs_tol: o.abs_tol,
            max_step: o.max_step,
            initial_step: o.initial_step,
            step: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ConfigFile {
    pub physical: PhysicalSection,
    pub run: RunSection,
    pub integrator: IntegratorSection,
}

const FOAM_PRESET: &str = "physical.a0 = 2000.0\nphysical.sigma_coeff = 50.0\n";

impl ConfigFile {
    pub fn parse(text: &str) -> Result<Self> {
        Self::parse_with(text, &[])
    }

    /// Parse and then apply `key=value` overrides with dotted keys.
    pub fn parse_with(text: &str, overrides: &[String]) -> Result<Self> {
        let mut table: toml::Table = text
            .parse()
            .map_err(|e: toml::de::Error| Error::Config(one_line(&e.to_string())))?;
        for item in overrides {
            apply_override(&mut table, item)?;
        }
        toml::Value::Table(table)
            .try_into()
            .map_err(|e: toml::de::Error| Error::Config(one_line(&e.to_string())))
    }

    /// `dense`, `foam`, or a path to a TOML file.
    pub fn load(source: &str, overrides: &[String]) -> Result<Self> {
        let text = match source {
            "dense" => String::new(),
            "foam" => FOAM_PRESET.to_string(),
            path => fs::read_to_string(path)
                .map_err(|e| Error::Config(format!("cannot read config `{path}`: {e}")))?,
        };
        Self::parse_with(&text, overrides)
    }

    pub fn preset(material: Material) -> Self {
        match material {
            Material::Dense => Self::default(),
            Material::Foam => Self::parse(FOAM_PRESET).expect("foam preset parses"),
        }
    }

    pub fn physical_params(&self) -> Result<PhysicalParams> {
        let p = &self.physical;
        let reservoir = match &p.b_series {
            Some(knots) => Reservoir::piecewise_linear(knots.iter().map(|k| (k[0], k[1])).collect())?,
            None => Reservoir::Constant(p.b),
        };
        let params = PhysicalParams {
            diffusivity: p.diffusivity,
            absorption_rate: p.beta,
            kinetic_coeff: p.a0,
            initial_front: p.s0,
            initial_concentration: p.m0,
            reservoir,
            henry: p.henry,
            swelling: SwellingLaw::linear(p.sigma_coeff)?,
            max_length: p.ell,
            x_ref: p.x_ref,
            m_ref: p.m_ref,
            observation_time: p.observation_time,
        };
        params.validate()?;
        Ok(params)
    }

    pub fn integrator_options(&self) -> Result<IntegratorOptions> {
        let i = &self.integrator;
        let method = match (i.method.as_str(), i.step) {
            ("adaptive", None) => Method::Adaptive,
            ("adaptive", Some(_)) => {
                return Err(Error::Config("integrator.step only applies to method = \"rk4\"".into()))
            }
            ("rk4", Some(step)) => Method::FixedRk4 { step },
            ("rk4", None) => return Err(Error::Config("method = \"rk4\" needs integrator.step".into())),
            (other, _) => {
                return Err(Error::Config(format!(
                    "unknown integrator.method `{other}` (adaptive|rk4)"
                )))
            }
        };
        let opts = IntegratorOptions {
            rel_tol: i.rel_tol,
            abs_tol: i.abs_tol,
            max_step: i.max_step,
            initial_step: i.initial_step,
            method,
        };
        opts.validate()?;
        Ok(opts)
    }

    pub fn run_config(&self) -> Result<RunConfig> {
        let physical = self.physical_params()?;
        let t_end = physical.observation_time;
        let mut cfg = RunConfig::new(physical);
        cfg.nodes = self.run.nodes;
        cfg.integrator = self.integrator_options()?;
        cfg.output_times = match &self.run.output_times {
            Some(t) => t.clone(),
            None => {
                if self.run.output_samples < 2 {
                    return Err(Error::invalid("run.output_samples", "need at least 2"));
                }
                uniform_times(t_end, self.run.output_samples)
            }
        };
        if let Some(t) = &self.run.profile_times {
            cfg.profile_times = t.clone();
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }
}

fn one_line(s: &str) -> String {
    s.split_whitespace().collect::<Vec<_>>().join(" ")
}

fn apply_override(table: &mut toml::Table, item: &str) -> Result<()> {
    let (key, raw) = item
        .split_once('=')
        .ok_or_else(|| Error::Config(format!("override `{item}` is not key=value")))?;
    let key = key.trim();
    let value = parse_value(raw.trim())?;
    let mut parts: Vec<&str> = key.split('.').collect();
    let leaf = parts.pop().filter(|l| !l.is_empty()).ok_or_else(|| Error::Config(format!("empty key in `{item}`")))?;
    let mut cur = table;
    for part in parts {
        let entry = cur
            .entry(part.to_string())
            .or_insert_with(|| toml::Value::Table(toml::Table::new()));
        cur = entry
            .as_table_mut()
            .ok_or_else(|| Error::Config(format!("`{part}` in `{key}` is not a section")))?;
    }
    cur.insert(leaf.to_string(), value);
    Ok(())
}

fn parse_value(raw: &str) -> Result<toml::Value> {
    let doc: toml::Table = format!("v = {raw}")
        .parse()
        .or_else(|_| format!("v = \"{raw}\"").parse())
        .map_err(|e: toml::de::Error| Error::Config(one_line(&e.to_string())))?;
    Ok(doc["v"].clone())
}

/// Read the semicolon-separated experiment file into dense and foam series.
pub fn ingest_experiment(path: impl AsRef<Path>) -> Result<(ExperimentSeries, ExperimentSeries)> {
    let file = fs::File::open(path.as_ref())
        .map_err(|e| Error::Data(format!("cannot open {}: {e}", path.as_ref().display())))?;
    parse_experiment(file)
}

pub fn parse_experiment(reader: impl Read) -> Result<(ExperimentSeries, ExperimentSeries)> {
    let mut rdr = csv::ReaderBuilder::new()
        .delimiter(b';')
        .trim(csv::Trim::All)
        .from_reader(reader);
    let headers = rdr.headers()?.clone();
    let col = |name: &str| -> Result<usize> {
        headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| Error::Data(format!("experiment file has no `{name}` column")))
    };
    let [t, fr, ff, lr, lf, ar, af] = ["t", "FR", "FF", "LR", "LF", "AR", "AF"].map(col);
    let (t, fr, ff, lr, lf, ar, af) = (t?, fr?, ff?, lr?, lf?, ar?, af?);

    let mut dense = Vec::new();
    let mut foam = Vec::new();
    for (row, rec) in rdr.records().enumerate() {
        let rec = rec?;
        let cell = |i: usize| -> Result<f64> {
            let s = rec.get(i).unwrap_or("");
            s.parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| Error::Data(format!("row {}: `{s}` is not a number", row + 2)))
        };
        let time = cell(t)?;
        dense.push(Measurement {
            t: time,
            front: cell(fr)?,
            length: cell(lr)?,
            area: cell(ar)?,
        });
        foam.push(Measurement {
            t: time,
            front: cell(ff)?,
            length: cell(lf)?,
            area: cell(af)?,
        });
    }
    Ok((
        ExperimentSeries::new(Material::Dense, dense)?,
        ExperimentSeries::new(Material::Foam, foam)?,
    ))
}

pub fn front_csv(result: &RunResult) -> String {
    let mut out = String::from("t,s\n");
    for p in &result.front_curve {
        let _ = writeln!(out, "{},{}", fmt_sig(p.t), fmt_sig(p.s));
    }
    out
}

pub fn profiles_csv(result: &RunResult) -> String {
    let mut out = String::from("t,x,m\n");
    for prof in &result.profiles {
        for (x, m) in prof.x.iter().zip(&prof.m) {
            let _ = writeln!(out, "{},{},{}", fmt_sig(prof.t), fmt_sig(*x), fmt_sig(*m));
        }
    }
    out
}

/// Config echo preceded by the derived groups as comments; loadable as a config.
pub fn run_meta(config: &ConfigFile, result: &RunResult) -> String {
    let g = &result.groups;
    let mut out = String::new();
    let _ = writeln!(out, "# Bi = {}", fmt_sig(g.biot));
    let _ = writeln!(out, "# A0 = {}", fmt_sig(g.thiele));
    let _ = writeln!(out, "# T* = {}", fmt_sig(g.end_time));
    let _ = writeln!(out, "# h0 = {}", fmt_sig(g.initial_front));
    let _ = writeln!(out, "# termination = {:?}", result.termination());
    let _ = writeln!(
        out,
        "# steps accepted = {}, rejected = {}",
        result.trajectory.stats.accepted, result.trajectory.stats.rejected
    );
    out.push_str(&config.to_toml());
    out
}

pub fn fit_csv(fit: &FitResult) -> String {
    let mode = match fit.mode {
        FitMode::ThroughOrigin => "through_origin",
        FitMode::WithIntercept => "with_intercept",
    };
    format!(
        "gamma,intercept,mode,t_min,t_max,rmse_log,n_points\n{},{},{},{},{},{},{}\n",
        fmt_sig(fit.gamma),
        fmt_sig(fit.intercept),
        mode,
        fmt_sig(fit.window.0),
        fmt_sig(fit.window.1),
        fmt_sig(fit.rmse_log),
        fit.n_points
    )
}

/// Per-point rows; summary statistics follow as `#` comment lines.
pub fn compare_csv(report: &ComparisonReport) -> String {
    let mut out = String::from("t,measured,simulated,error\n");
    for p in &report.points {
        let (sim, err) = match (p.simulated, p.error()) {
            (Some(s), Some(e)) => (fmt_sig(s), fmt_sig(e)),
            _ => (String::new(), String::new()),
        };
        let _ = writeln!(out, "{},{},{},{}", fmt_sig(p.t), fmt_sig(p.measured), sim, err);
    }
    let _ = writeln!(out, "# material = {}", report.material);
    let _ = writeln!(out, "# max_abs_error = {}", fmt_sig(report.max_abs_error));
    let _ = writeln!(out, "# rmse = {}", fmt_sig(report.rmse));
    if !report.flagged.is_empty() {
        let t: Vec<String> = report.flagged.iter().map(|t| t.to_string()).collect();
        let _ = writeln!(out, "# beyond simulated span: {}", t.join(" "));
    }
    out
}

/// Read a `t,s` front curve as written by [`front_csv`].
pub fn read_front_csv(path: impl AsRef<Path>) -> Result<Vec<(f64, f64)>> {
    let mut rdr = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .from_path(path.as_ref())?;
    let headers = rdr.headers()?.clone();
    let t = headers.iter().position(|h| h == "t");
    let s = headers.iter().position(|h| h == "s");
    let (Some(t), Some(s)) = (t, s) else {
        return Err(Error::Data("front file needs `t` and `s` columns".into()));
    };
    let mut curve = Vec::new();
    for rec in rdr.records() {
        let rec = rec?;
        let num = |i: usize| -> Result<f64> {
            let v = rec.get(i).unwrap_or("");
            v.parse()
                .map_err(|_| Error::Data(format!("`{v}` is not a number")))
        };
        curve.push((num(t)?, num(s)?));
    }
    Ok(curve)
}

#[cfg(test)]
mod tests {
    use super::*;

    const TABLE2: &str = "t;FR;FF;LR;LF;AR;AF\n\
        0;0;0;20;20;340;340\n\
        3.5;1;5;21;25;420;550\n\
        10;2;6;21;28;420;700\n\
        30;2;7;22;31;462;837\n\
        150;2;7;24;31;576;961\n\
        300;2;7;25;31;625;961\n";

    #[test]
    fn experiment_rows() {
        let (dense, foam) = parse_experiment(TABLE2.as_bytes()).unwrap();
        assert_eq!(dense.len(), 6);
        assert_eq!(foam.len(), 6);
        let d = dense.records()[2];
        assert_eq!((d.t, d.front, d.length, d.area), (10.0, 2.0, 21.0, 420.0));
        let f = foam.records()[2];
        assert_eq!((f.t, f.front, f.length, f.area), (10.0, 6.0, 28.0, 700.0));
    }

    #[test]
    fn permuted_header() {
        let permuted = "AF;t;LR;FF;AR;FR;LF\n\
            340;0;20;0;340;0;20\n\
            700;10;21;6;420;2;28\n\
            700;20;21;6;420;2;28\n";
        let (dense, foam) = parse_experiment(permuted.as_bytes()).unwrap();
        let d = dense.records()[1];
        assert_eq!((d.t, d.front, d.length, d.area), (10.0, 2.0, 21.0, 420.0));
        let f = foam.records()[1];
        assert_eq!((f.t, f.front, f.length, f.area), (10.0, 6.0, 28.0, 700.0));
    }

    #[test]
    fn malformed_experiment() {
        assert!(parse_experiment("t;FR;FF;LR;LF;AR\n0;0;0;20;20;340\n".as_bytes()).is_err());
        let bad = "t;FR;FF;LR;LF;AR;AF\n0;0;0;20;20;340;340\n3;x;5;21;25;420;550\n";
        assert!(matches!(parse_experiment(bad.as_bytes()), Err(Error::Data(_))));
        let back = "t;FR;FF;LR;LF;AR;AF\n0;0;0;20;20;340;340\n3;1;5;21;25;420;550\n2;1;5;21;25;420;550\n";
        assert!(parse_experiment(back.as_bytes()).is_err());
    }

    #[test]
    fn defaults_are_calibration_values() {
        let cfg = ConfigFile::parse("").unwrap();
        assert_eq!(cfg.physical_params().unwrap(), PhysicalParams::dense_rubber());
        let run = cfg.run_config().unwrap();
        assert_eq!(run.nodes, 100);
        assert_eq!(run.output_times.len(), DEFAULT_OUTPUT_SAMPLES);
        assert_eq!(run.integrator, IntegratorOptions::default());
    }

    #[test]
    fn dotted_and_sectioned_keys() {
        let a = ConfigFile::parse("physical.a0 = 1000.0\nrun.N = 50\n").unwrap();
        let b = ConfigFile::parse("[physical]\na0 = 1000.0\n[run]\nN = 50\n").unwrap();
        assert_eq!(a, b);
        assert_eq!(a.physical.a0, 1000.0);
        assert_eq!(a.run.nodes, 50);
    }

    #[test]
    fn unknown_keys_rejected() {
        assert!(matches!(ConfigFile::parse("physical.Dx = 1.0"), Err(Error::Config(_))));
        assert!(matches!(ConfigFile::parse("solver.N = 1"), Err(Error::Config(_))));
        assert!(ConfigFile::parse_with("", &["run.bogus=3".into()]).is_err());
    }

    #[test]
    fn overrides() {
        let sets: Vec<String> = [
            "physical.a0=500",
            "physical.sigma_coeff = inf",
            "integrator.method=rk4",
            "integrator.step=1e-6",
        ]
        .map(String::from)
        .to_vec();
        let cfg = ConfigFile::parse_with("physical.a0 = 100.0", &sets).unwrap();
        assert_eq!(cfg.physical.a0, 500.0);
        assert!(cfg.physical.sigma_coeff.is_infinite());
        assert_eq!(cfg.integrator_options().unwrap().method, Method::FixedRk4 { step: 1e-6 });
    }

    #[test]
    fn echo_round_trips() {
        let cfg = ConfigFile::parse_with(
            "physical.sigma_coeff = inf\nrun.profile_times = [10.0, 20.0]\n",
            &["physical.b_series=[[0.0, 1.0], [20.0, 0.5]]".into()],
        )
        .unwrap();
        let again = ConfigFile::parse(&cfg.to_toml()).unwrap();
        assert_eq!(cfg, again);
        assert_eq!(cfg.run_config().unwrap(), again.run_config().unwrap());
    }

    #[test]
    fn foam_preset() {
        let cfg = ConfigFile::load("foam", &[]).unwrap();
        assert_eq!(cfg.physical_params().unwrap(), PhysicalParams::foam_rubber());
        assert_eq!(ConfigFile::preset(Material::Foam), cfg);
    }

    #[test]
    fn bad_integrator_method() {
        let cfg = ConfigFile::parse("integrator.method = \"euler\"").unwrap();
        assert!(cfg.run_config().is_err());
        let cfg = ConfigFile::parse("integrator.method = \"rk4\"").unwrap();
        assert!(cfg.run_config().is_err());
    }

    #[test]
    fn twelve_digits() {
        assert_eq!(fmt_sig(2.0), "2.00000000000e0");
        assert_eq!(fmt_sig(1.0 / 3.0), "3.33333333333e-1");
    }
}
