//! Moving-boundary simulation of diffusant penetration into swelling rubber.
//!
//! The front `s(t)` moves by the kinetic law `s' = a0 (m(t, s) - sigma(s))`
//! while the diffusant obeys the heat equation behind it with a Robin inflow
//! condition at `x = 0`. The problem is mapped onto `[0, 1]`, discretized with
//! linear finite elements and integrated as an ODE system.
//!
//! ```no_run
//! use swellfront::{analysis, engine::{run, RunConfig}};
//!
//! let res = run(&RunConfig::dense_rubber()).unwrap();
//! let fit = analysis::fit_power_law(
//!     &res.front_pairs(),
//!     analysis::FitWindow::default(),
//!     analysis::FitMode::default(),
//! )
//! .unwrap();
//! println!("s(40 min) = {} mm, gamma = {}", res.final_front(), fit.gamma);
//! ```

pub mod analysis;
pub mod engine;
pub mod error;
pub mod fem;
pub mod integrator;
pub mod io;
pub mod params;
pub mod tridiag;

pub use error::{Error, Result};
pub use params::{nondimensionalize, DimensionlessParams, PhysicalParams, SwellingLaw};
