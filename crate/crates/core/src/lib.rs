//! Bernstein-type operators that reproduce the shifted logarithm
//! `ln_mu(x) = ln(1 + mu + x)` on `[0, 1]`, with their error analysis,
//! shape diagnostics, and a denoiser for multiplicative distortion.
//!
//! ```
//! use logbern_core::{function::ln_mu_function, operators::logarithmic, warp::Mu};
//!
//! let mu = Mu::new(1.0).unwrap();
//! let f = ln_mu_function(mu);
//! let v = logarithmic(&f, mu, 50, 0.3).unwrap();
//! assert!((v - f.eval(0.3)).abs() < 1e-12);
//! ```

pub mod analysis;
pub mod denoise;
pub mod error;
pub mod function;
pub mod numerics;
pub mod operators;
pub mod shape;
pub mod suites;
pub mod warp;

pub use error::{Error, Result};
pub use function::{AnalyticFunction, Grid, GridFunction};
pub use operators::{LogApproximant, LogarithmicOperator, OperatorSpec};
pub use warp::{Mu, WarpContext};
