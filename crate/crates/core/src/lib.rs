//! Energy-stable summation-by-parts finite volume solver for the
//! one-dimensional linearized shallow water equations
//!
//! ```text
//!   h_t + U h_x + H u_x = 0
//!   u_t + g h_x + U u_x = 0
//! ```
//!
//! with weakly imposed (SAT) characteristic boundary conditions in the
//! sub-critical, critical and super-critical regimes.
//!
//! ```
//! use swwe_core::model::FlowConfig;
//! use swwe_core::sbp::Grid;
//! use swwe_core::scenarios::mms_scenario;
//! use swwe_core::solver::{run, RunParams};
//!
//! let cfg = FlowConfig::with_froude(9.8, 1.0, 0.5).unwrap();
//! let scenario = mms_scenario(&cfg);
//! let grid = Grid::uniform(64, scenario.domain_length).unwrap();
//! let result = run(&scenario, &grid, &cfg, &RunParams::default()).unwrap();
//! assert_eq!(result.final_state.t, 0.1);
//! ```

pub mod analysis;
pub mod error;
pub mod model;
pub mod sat;
pub mod sbp;
pub mod scenarios;
pub mod solver;
pub mod verify;

pub use error::{Result, SwweError};
pub use model::{FlowConfig, Regime};
pub use solver::{RunParams, RunResult, State};
