//! Power-law characterization of front curves and comparison with measurements.

use std::fmt;

use crate::engine::SweepOutcome;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Material {
    Dense,
    Foam,
}

impl fmt::Display for Material {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Material::Dense => "dense",
            Material::Foam => "foam",
        })
    }
}

impl std::str::FromStr for Material {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "dense" | "rubber" => Ok(Material::Dense),
            "foam" => Ok(Material::Foam),
            other => Err(Error::Config(format!("unknown material `{other}` (dense|foam)"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Measurement {
    /// Time (min).
    pub t: f64,
    /// Diffusion front (mm).
    pub front: f64,
    /// Submerged length (mm).
    pub length: f64,
    /// Swollen submerged area (mm²).
    pub area: f64,
}

/// Measured front positions for one material.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentSeries {
    pub material: Material,
    records: Vec<Measurement>,
}

impl ExperimentSeries {
    /// Times must be strictly increasing and the first record must be `(0, 0)`.
    pub fn new(material: Material, records: Vec<Measurement>) -> Result<Self> {
        let first = records
            .first()
            .ok_or_else(|| Error::Data("experiment series is empty".into()))?;
        if first.t != 0.0 || first.front != 0.0 {
            return Err(Error::Data(format!(
                "first record must be t = 0 with front 0, got ({}, {})",
                first.t, first.front
            )));
        }
        check_increasing(&records)?;
        Ok(Self { material, records })
    }

    /// Append a later measurement, e.g. a long-time check point.
    pub fn push(&mut self, record: Measurement) -> Result<()> {
        let last = self.records[self.records.len() - 1];
        if !(record.t > last.t) {
            return Err(Error::Data(format!(
                "appended record at t = {} does not follow t = {}",
                record.t, last.t
            )));
        }
        self.records.push(record);
        Ok(())
    }

    pub fn records(&self) -> &[Measurement] {
        &self.records
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }
}

fn check_increasing(records: &[Measurement]) -> Result<()> {
    for w in records.windows(2) {
        if !(w[1].t > w[0].t) {
            return Err(Error::Data(format!(
                "measurement times must increase: {} then {}",
                w[0].t, w[1].t
            )));
        }
    }
    Ok(())
}

/// Time window for fitting; defaults skip the transient before 1 min.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FitWindow {
    pub t_min: f64,
    pub t_max: f64,
}

impl Default for FitWindow {
    fn default() -> Self {
        Self {
            t_min: 1.0,
            t_max: f64::INFINITY,
        }
    }
}

impl FitWindow {
    pub fn new(t_min: f64, t_max: f64) -> Self {
        Self { t_min, t_max }
    }

    pub fn contains(&self, t: f64) -> bool {
        t >= self.t_min && t <= self.t_max
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum FitMode {
    /// `log s = gamma log t`, i.e. `s = t^gamma` exactly.
    #[default]
    ThroughOrigin,
    /// `log s = gamma log t + log c`.
    WithIntercept,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FitResult {
    pub gamma: f64,
    /// Fitted `log c`; zero in [`FitMode::ThroughOrigin`].
    pub intercept: f64,
    pub mode: FitMode,
    /// Actual time span of the points used.
    pub window: (f64, f64),
    pub rmse_log: f64,
    pub n_points: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FrontRegime {
    SubDiffusive,
    Diffusive,
    SuperDiffusive,
}

/// Compare the exponent with the classical square-root law.
pub fn classify(gamma: f64) -> FrontRegime {
    if gamma > 0.5 {
        FrontRegime::SuperDiffusive
    } else if gamma < 0.5 {
        FrontRegime::SubDiffusive
    } else {
        FrontRegime::Diffusive
    }
}

/// Least-squares fit of `log s` against `log t` over the window.
pub fn fit_power_law(curve: &[(f64, f64)], window: FitWindow, mode: FitMode) -> Result<FitResult> {
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    let mut span = (f64::INFINITY, f64::NEG_INFINITY);
    for &(t, s) in curve.iter().filter(|(t, _)| window.contains(*t)) {
        if !(t > 0.0) || !(s > 0.0) {
            return Err(Error::Fit(format!(
                "window contains a non-positive point (t = {t}, s = {s})"
            )));
        }
        span = (span.0.min(t), span.1.max(t));
        xs.push(t.ln());
        ys.push(s.ln());
    }
    let n = xs.len();
    if n < 3 {
        return Err(Error::Fit(format!("need at least 3 points in the window, got {n}")));
    }

    let (gamma, intercept) = match mode {
        FitMode::ThroughOrigin => {
            let sxx: f64 = xs.iter().map(|x| x * x).sum();
            let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| x * y).sum();
            if sxx == 0.0 {
                return Err(Error::Fit("all window points sit at t = 1".into()));
            }
            (sxy / sxx, 0.0)
        }
        FitMode::WithIntercept => {
            let nf = n as f64;
            let mx = xs.iter().sum::<f64>() / nf;
            let my = ys.iter().sum::<f64>() / nf;
            let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
            let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
            if sxx == 0.0 {
                return Err(Error::Fit("window points share a single time".into()));
            }
            let g = sxy / sxx;
            (g, my - g * mx)
        }
    };
    if !gamma.is_finite() {
        return Err(Error::Fit("fitted exponent is not finite".into()));
    }

    let sse: f64 = xs
        .iter()
        .zip(&ys)
        .map(|(x, y)| {
            let r = y - (gamma * x + intercept);
            r * r
        })
        .sum();
    Ok(FitResult {
        gamma,
        intercept,
        mode,
        window: span,
        rmse_log: (sse / n as f64).sqrt(),
        n_points: n,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ComparisonPoint {
    pub t: f64,
    pub measured: f64,
    /// `None` when `t` lies outside the simulated span.
    pub simulated: Option<f64>,
}

impl ComparisonPoint {
    pub fn error(&self) -> Option<f64> {
        self.simulated.map(|s| s - self.measured)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ComparisonReport {
    pub material: Material,
    pub points: Vec<ComparisonPoint>,
    pub max_abs_error: f64,
    pub rmse: f64,
    /// Measurement times beyond the simulated span.
    pub flagged: Vec<f64>,
}

/// Linear interpolation of `curve` (sorted by `t`) at `t`.
pub fn interpolate_front(curve: &[(f64, f64)], t: f64) -> Option<f64> {
    let first = curve.first()?;
    let last = curve.last()?;
    if t < first.0 || t > last.0 {
        return None;
    }
    let i = curve.partition_point(|(tc, _)| *tc < t);
    if curve[i].0 == t {
        return Some(curve[i].1);
    }
    let (t0, s0) = curve[i - 1];
    let (t1, s1) = curve[i];
    Some(s0 + (s1 - s0) * (t - t0) / (t1 - t0))
}

pub fn compare(curve: &[(f64, f64)], series: &ExperimentSeries) -> Result<ComparisonReport> {
    if series.is_empty() {
        return Err(Error::Data("experiment series is empty".into()));
    }
    if curve.windows(2).any(|w| w[1].0 <= w[0].0) {
        return Err(Error::Data("front curve times must be strictly increasing".into()));
    }
    let points: Vec<ComparisonPoint> = series
        .records()
        .iter()
        .map(|r| ComparisonPoint {
            t: r.t,
            measured: r.front,
            simulated: interpolate_front(curve, r.t),
        })
        .collect();
    let errors: Vec<f64> = points.iter().filter_map(|p| p.error()).collect();
    if errors.is_empty() {
        return Err(Error::Data("no measurement falls inside the simulated span".into()));
    }
    let max_abs_error = errors.iter().fold(0.0_f64, |m, e| m.max(e.abs()));
    let rmse = (errors.iter().map(|e| e * e).sum::<f64>() / errors.len() as f64).sqrt();
    let flagged = points
        .iter()
        .filter(|p| p.simulated.is_none())
        .map(|p| p.t)
        .collect();
    Ok(ComparisonReport {
        material: series.material,
        points,
        max_abs_error,
        rmse,
        flagged,
    })
}

/// Exponents indexed by `(a0, sigma divisor)`.
#[derive(Debug, Clone, PartialEq)]
pub struct GammaTable {
    pub kinetic_coeffs: Vec<f64>,
    pub sigma_divisors: Vec<f64>,
    /// `gammas[i][j]` for `kinetic_coeffs[i]`, `sigma_divisors[j]`.
    pub gammas: Vec<Vec<f64>>,
    pub window: FitWindow,
    pub mode: FitMode,
}

impl GammaTable {
    pub fn get(&self, kinetic_coeff: f64, sigma_divisor: f64) -> Option<f64> {
        let i = self.kinetic_coeffs.iter().position(|a| *a == kinetic_coeff)?;
        let j = self.sigma_divisors.iter().position(|c| *c == sigma_divisor)?;
        Some(self.gammas[i][j])
    }

    /// Rows are `a0`, columns are `sigma(s) = s/c`, one header row.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("a0\\sigma");
        for c in &self.sigma_divisors {
            out.push_str(&format!(",s/{c}"));
        }
        out.push('\n');
        for (a, row) in self.kinetic_coeffs.iter().zip(&self.gammas) {
            out.push_str(&format!("{a}"));
            for g in row {
                out.push(',');
                out.push_str(&crate::io::fmt_sig(*g));
            }
            out.push('\n');
        }
        out
    }
}

fn push_unique(v: &mut Vec<f64>, x: f64) {
    if !v.contains(&x) {
        v.push(x);
    }
}

/// Fit every sweep point and arrange the exponents as a table. The grid must
/// be a full product and every point must have succeeded.
pub fn gamma_table(outcomes: &[SweepOutcome], window: FitWindow, mode: FitMode) -> Result<GammaTable> {
    let mut kinetic = Vec::new();
    let mut sigma = Vec::new();
    for o in outcomes {
        push_unique(&mut kinetic, o.point.kinetic_coeff);
        push_unique(&mut sigma, o.point.sigma_divisor);
    }
    let mut gammas = vec![vec![f64::NAN; sigma.len()]; kinetic.len()];
    let mut filled = vec![vec![false; sigma.len()]; kinetic.len()];
    for o in outcomes {
        let res = o.result.as_ref().map_err(|e| {
            Error::Fit(format!(
                "sweep point a0 = {}, c = {} failed: {e}",
                o.point.kinetic_coeff, o.point.sigma_divisor
            ))
        })?;
        let i = kinetic.iter().position(|a| *a == o.point.kinetic_coeff).unwrap();
        let j = sigma.iter().position(|c| *c == o.point.sigma_divisor).unwrap();
        if filled[i][j] {
            return Err(Error::Fit("duplicate grid point".into()));
        }
        gammas[i][j] = fit_power_law(&res.front_pairs(), window, mode)?.gamma;
        filled[i][j] = true;
    }
    if filled.iter().flatten().any(|f| !f) {
        return Err(Error::Fit("sweep grid is not a full product".into()));
    }
    Ok(GammaTable {
        kinetic_coeffs: kinetic,
        sigma_divisors: sigma,
        gammas,
        window,
        mode,
    })
}
