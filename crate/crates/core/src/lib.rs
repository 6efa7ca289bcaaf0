//! Joint design of transmit and receive waveforms for linear modulation of an
//! improper-complex stationary symbol sequence over a band-limited channel
//! with additive proper-complex cyclostationary interference-plus-noise.
//!
//! The library works entirely in the frequency domain on a paired-bin grid
//! over the half Nyquist interval. For each candidate transmit spectrum it
//! derives the minimum-MSE widely linear receiver (one filter for the
//! received signal, one for its conjugate) in closed form, reduces the MSE to
//! a scalar per-bin expression through the impropriety frequency function,
//! and solves the remaining energy-allocation problem with a multiplier line
//! search combined with per-bin alternating updates. A seeded time-domain
//! Monte Carlo simulator cross-checks the analytic MSE and transmit power.
//!
//! Module map:
//! - [`numerics`]: small dense complex Cholesky/Jacobi kernels
//! - [`spectra`]: frequency grid, variable-length spectrum samples, matrix
//!   spectral densities, augmentation
//! - [`scenario`]: sources, channels, interference, budgets, JSON schema
//! - [`link`]: per-bin model assembly shared by both optimization stages
//! - [`receiver`]: widely linear receiver and the two MSE evaluators
//! - [`transmitter`]: energy allocation and transmit-spectrum assembly
//! - [`simulate`]: seeded Monte Carlo validation and tap export
//! - [`design`]: one-call end-to-end orchestration
//! - [`random`]: seeded scenario sampling for self-checks
//!
//! # Example
//!
//! Design the waveforms for an improper source facing one data-like
//! interferer, and confirm the conjugate receiver branch is in use:
//!
//! ```
//! use jointwave_core::design::{design_link, DesignOptions};
//! use jointwave_core::scenario::ScenarioConfig;
//!
//! let config = ScenarioConfig::from_json(r#"{
//!     "grid": {"b_times_t": 0.625, "n": 32},
//!     "source": {"var_i": 0.9, "var_q": 0.1},
//!     "channel": {"type": "flat", "gain": 1.0},
//!     "noise": {"source_esn0_db": 5.0,
//!               "interferers": [{"rolloff": 0.25, "esn0_db": 10.0}]},
//!     "power": {}
//! }"#).unwrap();
//! let scenario = config.into_scenario(&mut |_| Err("no tables".into())).unwrap();
//!
//! let design = design_link(&scenario, &DesignOptions::default()).unwrap();
//! assert!(design.tx.analytic_mse > 0.0 && design.tx.analytic_mse < 1.0);
//! assert!(design.rx.max_w2() > 1e-3, "impropriety activates the conjugate branch");
//! assert!(design.tx.kkt.stationarity_rel <= 1e-8);
//! ```

// validation guards use `!(x > 0.0)` on purpose: NaN must fail them
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod design;
pub mod link;
pub mod numerics;
pub mod random;
pub mod receiver;
pub mod scenario;
pub mod simulate;
pub mod spectra;
pub mod transmitter;

pub use numerics::C64;
