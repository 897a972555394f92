//! Physical and dimensionless model parameters.
//!
//! Physical units follow the laboratory convention: lengths in mm, times in
//! minutes, concentrations in gram/mm³. The dimensionless system uses
//!
//! ```text
//! z = x / x_ref,   tau = t D / x_ref²,   u = m / m_ref,   h = s / x_ref
//! ```
//!
//! and the fixed-domain coordinate `y = z / h(tau)` on `[0, 1]`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Swelling law `sigma(s) = s / c` with `s` in mm and `sigma` in gram/mm³.
///
/// The coefficient is kept as a divisor; `c = +inf` switches swelling off.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SwellingLaw {
    divisor: f64,
}

impl SwellingLaw {
    pub fn linear(divisor: f64) -> Result<Self> {
        if divisor.is_nan() || divisor <= 0.0 {
            return Err(Error::invalid(
                "sigma_coeff",
                format!("must be positive or +inf, got {divisor}"),
            ));
        }
        Ok(Self { divisor })
    }

    /// `sigma ≡ 0`, the classical one-phase Stefan problem with kinetic condition.
    pub fn none() -> Self {
        Self {
            divisor: f64::INFINITY,
        }
    }

    pub fn divisor(&self) -> f64 {
        self.divisor
    }

    pub fn eval(&self, front_mm: f64) -> f64 {
        front_mm / self.divisor
    }
}

/// Diffusant concentration in the reservoir at the lower surface, `b(t)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Reservoir {
    Constant(f64),
    /// Knots `(t min, b)` with linear interpolation and constant extension.
    PiecewiseLinear(Vec<(f64, f64)>),
}

impl Reservoir {
    pub fn piecewise_linear(knots: Vec<(f64, f64)>) -> Result<Self> {
        if knots.is_empty() {
            return Err(Error::invalid("b", "time series needs at least one knot"));
        }
        if knots.iter().any(|(t, b)| !t.is_finite() || !b.is_finite()) {
            return Err(Error::invalid("b", "time series contains non-finite values"));
        }
        if knots.windows(2).any(|w| w[1].0 <= w[0].0) {
            return Err(Error::invalid("b", "knot times must be strictly increasing"));
        }
        Ok(Reservoir::PiecewiseLinear(knots))
    }

    pub fn eval(&self, t: f64) -> f64 {
        match self {
            Reservoir::Constant(b) => *b,
            Reservoir::PiecewiseLinear(knots) => {
                let first = knots[0];
                let last = knots[knots.len() - 1];
                if t <= first.0 {
                    return first.1;
                }
                if t >= last.0 {
                    return last.1;
                }
                let i = knots.partition_point(|(tk, _)| *tk <= t);
                let (t0, b0) = knots[i - 1];
                let (t1, b1) = knots[i];
                b0 + (b1 - b0) * (t - t0) / (t1 - t0)
            }
        }
    }

    fn validate(&self) -> Result<()> {
        match self {
            Reservoir::Constant(b) if !b.is_finite() => {
                Err(Error::invalid("b", format!("must be finite, got {b}")))
            }
            Reservoir::Constant(_) => Ok(()),
            Reservoir::PiecewiseLinear(knots) => {
                Reservoir::piecewise_linear(knots.clone()).map(|_| ())
            }
        }
    }
}

/// Dimensional model inputs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhysicalParams {
    /// Diffusivity `D` (mm²/min).
    pub diffusivity: f64,
    /// Absorption rate `beta` (mm/min).
    pub absorption_rate: f64,
    /// Kinetic coefficient `a0` of the front law (mm⁴/min/gram).
    pub kinetic_coeff: f64,
    /// Initial front position `s0` (mm).
    pub initial_front: f64,
    /// Initial diffusant concentration `m0` (gram/mm³).
    pub initial_concentration: f64,
    pub reservoir: Reservoir,
    /// Henry's constant `H`.
    pub henry: f64,
    pub swelling: SwellingLaw,
    /// Maximum sample length `ell` (mm).
    pub max_length: f64,
    pub x_ref: f64,
    pub m_ref: f64,
    /// Observation time `T` (min).
    pub observation_time: f64,
}

impl PhysicalParams {
    /// Dense EPDM rubber calibration values.
    pub fn dense_rubber() -> Self {
        Self {
            diffusivity: 3.66e-4,
            absorption_rate: 0.564,
            kinetic_coeff: 500.0,
            initial_front: 0.01,
            initial_concentration: 0.1,
            reservoir: Reservoir::Constant(1.0),
            henry: 2.5,
            swelling: SwellingLaw { divisor: 10.0 },
            max_length: 20.0,
            x_ref: 10.0,
            m_ref: 0.1,
            observation_time: 40.0,
        }
    }

    /// Foam rubber: same matrix, faster front kinetics and weaker swelling resistance.
    pub fn foam_rubber() -> Self {
        Self {
            kinetic_coeff: 2000.0,
            swelling: SwellingLaw { divisor: 50.0 },
            ..Self::dense_rubber()
        }
    }

    pub fn validate(&self) -> Result<()> {
        positive("D", self.diffusivity)?;
        positive("a0", self.kinetic_coeff)?;
        positive("H", self.henry)?;
        positive("m_ref", self.m_ref)?;
        positive("x_ref", self.x_ref)?;
        positive("T", self.observation_time)?;
        positive("ell", self.max_length)?;
        if !(self.absorption_rate >= 0.0 && self.absorption_rate.is_finite()) {
            return Err(Error::invalid("beta", "must be finite and non-negative"));
        }
        if !(self.initial_concentration >= 0.0 && self.initial_concentration.is_finite()) {
            return Err(Error::invalid("m0", "must be finite and non-negative"));
        }
        if !(self.initial_front > 0.0 && self.initial_front < self.max_length) {
            return Err(Error::invalid(
                "s0",
                format!(
                    "need 0 < s0 < ell, got s0 = {}, ell = {}",
                    self.initial_front, self.max_length
                ),
            ));
        }
        if self.initial_front > self.x_ref {
            return Err(Error::invalid("s0", "initial front must not exceed x_ref"));
        }
        SwellingLaw::linear(self.swelling.divisor)?;
        self.reservoir.validate()
    }

    /// Diffusive time scale `x_ref² / D` in minutes.
    pub fn time_scale(&self) -> f64 {
        self.x_ref * self.x_ref / self.diffusivity
    }
}

fn positive(name: &str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Error::invalid(name, format!("must be finite and positive, got {v}")))
    }
}

/// Derived dimensionless groups and scaled data.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DimensionlessParams {
    /// Mass-transfer Biot number `beta x_ref / D`.
    pub biot: f64,
    /// Thiele modulus `(x_ref / D) m_ref a0`.
    pub thiele: f64,
    pub henry: f64,
    /// `h0 = s0 / x_ref`.
    pub initial_front: f64,
    /// Initial nodal value `m0 / m_ref`.
    pub initial_concentration: f64,
    /// `T* = T D / x_ref²`.
    pub end_time: f64,
    /// `ell / x_ref`.
    pub max_length: f64,
    /// Slope of `sigma*(h) = sigma(x_ref h) / m_ref`; zero when swelling is off.
    pub swelling_slope: f64,
    reservoir: Reservoir,
    time_scale: f64,
    m_ref: f64,
}

impl DimensionlessParams {
    /// `b*(tau) = b(t_ref tau) / m_ref`.
    pub fn reservoir(&self, tau: f64) -> f64 {
        self.reservoir.eval(self.time_scale * tau) / self.m_ref
    }

    pub fn swelling(&self, h: f64) -> f64 {
        self.swelling_slope * h
    }

    /// Minutes per unit of dimensionless time.
    pub fn time_scale(&self) -> f64 {
        self.time_scale
    }

    /// Equilibrium concentration `b*/H` for a constant reservoir.
    pub fn equilibrium_concentration(&self, tau: f64) -> f64 {
        self.reservoir(tau) / self.henry
    }
}

pub fn nondimensionalize(p: &PhysicalParams) -> Result<DimensionlessParams> {
    p.validate()?;
    let h0 = p.initial_front / p.x_ref;
    // x_ref * (1/c) / m_ref, written so that c = +inf gives exactly zero
    let swelling_slope = p.swelling.eval(p.x_ref) / p.m_ref;
    Ok(DimensionlessParams {
        biot: p.absorption_rate * p.x_ref / p.diffusivity,
        thiele: (p.x_ref / p.diffusivity) * p.m_ref * p.kinetic_coeff,
        henry: p.henry,
        initial_front: h0,
        initial_concentration: p.initial_concentration / p.m_ref,
        end_time: p.observation_time * p.diffusivity / (p.x_ref * p.x_ref),
        max_length: p.max_length / p.x_ref,
        swelling_slope,
        reservoir: p.reservoir.clone(),
        time_scale: p.time_scale(),
        m_ref: p.m_ref,
    })
}

/// Concentration profile on the physical moving grid `x_j = s y_j`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Profile {
    /// Physical time (min).
    pub t: f64,
    /// Front position (mm).
    pub front: f64,
    pub x: Vec<f64>,
    /// Concentration (gram/mm³) at each `x`.
    pub m: Vec<f64>,
}

impl Profile {
    /// Piecewise-linear reconstruction of `m(x)` for `x` in `[0, s]`.
    pub fn concentration_at(&self, x: f64) -> Option<f64> {
        if !(0.0..=self.front).contains(&x) {
            return None;
        }
        let n = self.m.len();
        let y = (x / self.front) * (n - 1) as f64;
        let j = (y.floor() as usize).min(n - 2);
        let w = y - j as f64;
        Some((1.0 - w) * self.m[j] + w * self.m[j + 1])
    }
}

/// Map a dimensionless state back to physical time, front and concentration.
pub fn to_physical(tau: f64, alpha: &[f64], h: f64, p: &PhysicalParams) -> Result<Profile> {
    if !(h > 0.0) {
        return Err(Error::invalid("h", format!("front must be positive, got {h}")));
    }
    if alpha.len() < 2 {
        return Err(Error::invalid("alpha", "need at least two nodal values"));
    }
    let front = p.x_ref * h;
    let last = (alpha.len() - 1) as f64;
    let x = (0..alpha.len())
        .map(|j| front * j as f64 / last)
        .collect();
    let m = alpha.iter().map(|a| p.m_ref * a).collect();
    Ok(Profile {
        t: tau * p.time_scale(),
        front,
        x,
        m,
    })
}
