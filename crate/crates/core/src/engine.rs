//! Full runs: physical configuration to physical front curve and profiles.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::fem::{assemble, FemSystem, Mesh};
use crate::integrator::{integrate, IntegratorConfig, IntegratorOptions, Termination, Trajectory};
use crate::params::{nondimensionalize, to_physical, DimensionlessParams, PhysicalParams, Profile, SwellingLaw};

/// Default number of evenly spaced front samples over `[0, T]`.
pub const DEFAULT_OUTPUT_SAMPLES: usize = 4001;

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub physical: PhysicalParams,
    /// Node count `N`.
    pub nodes: usize,
    pub integrator: IntegratorOptions,
    /// Physical times (min) at which the front is reported.
    pub output_times: Vec<f64>,
    /// Physical times (min) at which full concentration profiles are kept.
    pub profile_times: Vec<f64>,
}

impl RunConfig {
    /// `N = 100`, default tolerances, uniform output grid and four profiles.
    pub fn new(physical: PhysicalParams) -> Self {
        let t_end = physical.observation_time;
        Self {
            physical,
            nodes: 100,
            integrator: IntegratorOptions::default(),
            output_times: uniform_times(t_end, DEFAULT_OUTPUT_SAMPLES),
            profile_times: (1..=4).map(|i| t_end * i as f64 / 4.0).collect(),
        }
    }

    pub fn dense_rubber() -> Self {
        Self::new(PhysicalParams::dense_rubber())
    }

    pub fn foam_rubber() -> Self {
        Self::new(PhysicalParams::foam_rubber())
    }

    /// Change the observation time and rebuild the default time grids.
    pub fn with_observation_time(mut self, t_end: f64, samples: usize) -> Self {
        self.physical.observation_time = t_end;
        self.output_times = uniform_times(t_end, samples);
        self.profile_times = (1..=4).map(|i| t_end * i as f64 / 4.0).collect();
        self
    }

    pub fn validate(&self) -> Result<()> {
        self.physical.validate()?;
        Mesh::new(self.nodes)?;
        self.integrator.validate()?;
        let t_end = self.physical.observation_time;
        for (name, times) in [
            ("output_times", &self.output_times),
            ("profile_times", &self.profile_times),
        ] {
            if times.windows(2).any(|w| w[1] <= w[0]) {
                return Err(Error::invalid(name, "must be strictly increasing"));
            }
            if times.iter().any(|t| !(*t >= 0.0 && *t <= t_end)) {
                return Err(Error::invalid(name, format!("must lie within [0, {t_end}]")));
            }
        }
        if self.output_times.is_empty() {
            return Err(Error::invalid("output_times", "need at least one output time"));
        }
        Ok(())
    }
}

/// `count` evenly spaced times over `[0, t_end]`, ending exactly at `t_end`.
pub fn uniform_times(t_end: f64, count: usize) -> Vec<f64> {
    let count = count.max(2);
    (0..count)
        .map(|i| {
            if i + 1 == count {
                t_end
            } else {
                t_end * i as f64 / (count - 1) as f64
            }
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FrontPoint {
    /// Time (min).
    pub t: f64,
    /// Front position (mm).
    pub s: f64,
}

#[derive(Debug, Clone)]
pub struct RunResult {
    pub config: RunConfig,
    pub groups: DimensionlessParams,
    pub front_curve: Vec<FrontPoint>,
    pub profiles: Vec<Profile>,
    pub trajectory: Trajectory,
}

impl RunResult {
    pub fn termination(&self) -> Termination {
        self.trajectory.termination
    }

    /// Front curve as `(t, s)` pairs.
    pub fn front_pairs(&self) -> Vec<(f64, f64)> {
        self.front_curve.iter().map(|p| (p.t, p.s)).collect()
    }

    pub fn final_front(&self) -> f64 {
        self.front_curve.last().map(|p| p.s).unwrap_or(f64::NAN)
    }
}

/// Pieces shared by [`run`] and tests that restart integration mid-run.
pub fn prepare(cfg: &RunConfig) -> Result<(DimensionlessParams, FemSystem)> {
    cfg.validate()?;
    let groups = nondimensionalize(&cfg.physical)?;
    let sys = assemble(Mesh::new(cfg.nodes)?)?;
    Ok((groups, sys))
}

pub fn run(cfg: &RunConfig) -> Result<RunResult> {
    let (groups, sys) = prepare(cfg)?;
    let p = &cfg.physical;
    let to_tau = |t: f64| t / p.time_scale();

    let mut physical_times: Vec<f64> = cfg
        .output_times
        .iter()
        .chain(&cfg.profile_times)
        .copied()
        .collect();
    physical_times.sort_by(f64::total_cmp);
    physical_times.dedup();
    let mut sample_taus: Vec<f64> = physical_times.iter().map(|t| to_tau(*t)).collect();
    // exact end point; t_end / time_scale and T D / x_ref² can differ in the last ulp
    if let Some(last) = sample_taus.last_mut() {
        if *physical_times.last().unwrap() == p.observation_time {
            *last = groups.end_time;
        } else {
            *last = last.min(groups.end_time);
        }
    }

    let icfg = IntegratorConfig::new(cfg.integrator, groups.end_time, sample_taus);
    let trajectory = integrate(&sys, &groups, &icfg)?;

    let sample_index = |t: f64| -> Option<usize> {
        let i = physical_times.binary_search_by(|x| x.total_cmp(&t)).ok()?;
        (i < trajectory.samples.len()).then_some(i)
    };

    let front_curve = cfg
        .output_times
        .iter()
        .filter_map(|t| {
            sample_index(*t).map(|i| FrontPoint {
                t: *t,
                s: p.x_ref * trajectory.samples[i].front,
            })
        })
        .collect();

    let profiles = cfg
        .profile_times
        .iter()
        .filter_map(|t| sample_index(*t).map(|i| (t, &trajectory.samples[i])))
        .map(|(t, s)| {
            to_physical(s.tau, &s.alpha, s.front, p).map(|mut prof| {
                prof.t = *t;
                prof
            })
        })
        .collect::<Result<Vec<_>>>()?;

    Ok(RunResult {
        config: cfg.clone(),
        groups,
        front_curve,
        profiles,
        trajectory,
    })
}

/// One point of a kinetic/swelling parameter grid.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridPoint {
    pub kinetic_coeff: f64,
    pub sigma_divisor: f64,
}

impl GridPoint {
    pub fn new(kinetic_coeff: f64, sigma_divisor: f64) -> Self {
        Self {
            kinetic_coeff,
            sigma_divisor,
        }
    }

    pub fn apply(&self, base: &RunConfig) -> Result<RunConfig> {
        let mut cfg = base.clone();
        cfg.physical.kinetic_coeff = self.kinetic_coeff;
        cfg.physical.swelling = SwellingLaw::linear(self.sigma_divisor)?;
        Ok(cfg)
    }
}

/// Cartesian product in row-major order (`a0` outer, `sigma` inner).
pub fn product_grid(kinetic: &[f64], sigma: &[f64]) -> Vec<GridPoint> {
    kinetic
        .iter()
        .flat_map(|a| sigma.iter().map(move |c| GridPoint::new(*a, *c)))
        .collect()
}

#[derive(Debug)]
pub struct SweepOutcome {
    pub point: GridPoint,
    pub result: Result<RunResult>,
}

/// Run every grid point. Points execute in parallel; results keep grid order
/// and a failing point does not abort the others.
pub fn sweep(grid: &[GridPoint], base: &RunConfig) -> Result<Vec<SweepOutcome>> {
    if grid.is_empty() {
        return Err(Error::invalid("grid", "sweep grid is empty"));
    }
    Ok(grid
        .par_iter()
        .map(|point| SweepOutcome {
            point: *point,
            result: point.apply(base).and_then(|cfg| run(&cfg)),
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn short(cfg: RunConfig) -> RunConfig {
        RunConfig {
            nodes: 20,
            ..cfg.with_observation_time(1.0, 11)
        }
    }

    #[test]
    fn starts_at_initial_front() {
        let res = run(&short(RunConfig::dense_rubber())).unwrap();
        assert_eq!(res.front_curve[0], FrontPoint { t: 0.0, s: 0.01 });
        assert_eq!(res.front_curve.len(), 11);
        assert_eq!(res.profiles.len(), 4);
        assert!(res.front_curve.windows(2).all(|w| w[1].s >= w[0].s));
        assert_eq!(res.termination(), Termination::Completed);
    }

    #[test]
    fn rejects_out_of_range_times() {
        let mut cfg = short(RunConfig::dense_rubber());
        cfg.output_times.push(2.0);
        assert!(run(&cfg).is_err());
        let mut cfg = short(RunConfig::dense_rubber());
        cfg.nodes = 1;
        assert!(run(&cfg).is_err());
    }

    #[test]
    fn empty_sweep_is_rejected() {
        assert!(sweep(&[], &RunConfig::dense_rubber()).is_err());
    }

    #[test]
    fn front_stops_at_sample_length() {
        let mut cfg = short(RunConfig::dense_rubber());
        cfg.physical.max_length = 0.05;
        let res = run(&cfg).unwrap();
        assert!(matches!(res.termination(), Termination::FrontReachedEll { .. }));
        assert!(res.front_curve.len() < 11);
        assert!(res.front_curve.iter().all(|p| p.s < 0.05));
    }

    #[test]
    fn grid_order() {
        let g = product_grid(&[1.0, 2.0], &[10.0, 20.0, 30.0]);
        assert_eq!(g.len(), 6);
        assert_eq!(g[1], GridPoint::new(1.0, 20.0));
        assert_eq!(g[3], GridPoint::new(2.0, 10.0));
    }
}
