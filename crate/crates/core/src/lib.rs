//! Occupation-kernel dynamic mode decomposition for continuous-time systems.
//!
//! Given trajectories `γ_1 … γ_M` of an unknown system `ẋ = f(x)`, the crate
//! builds the occupation-kernel Gram matrix `G_r`, the kernel-difference Gram
//! matrix `G_d` and the endpoint displacements `D`, and from them
//!
//! * the finite-rank representation `G_r⁺ G_d` of the Liouville operator and
//!   its singular values and functions ([`operator`], [`estimators`]),
//! * the SLDMD vector-field model `f̂(x) = D G_r⁺ r(x)` and the regularized
//!   occupation kernel regression model `A (G_r + λI) = D` ([`estimators`]),
//! * a regularization sweep comparing the two on a known system ([`sweep`]).
//!
//! ```
//! use liouville_dmd::dynamics::{generate_dataset, DatasetSpec, EvalGrid, OdeSystem};
//! use liouville_dmd::estimators::fit_sldmd;
//! use liouville_dmd::kernel::KernelParams;
//! use liouville_dmd::operator::GramPack;
//! use liouville_dmd::trajectory::QuadratureSpec;
//!
//! let spec = DatasetSpec {
//!     system: OdeSystem::linear_decay(1),
//!     grid: EvalGrid::cube(-1.0, 1.0, 1, 8).unwrap(),
//!     duration: 1.0,
//!     dt: 0.01,
//!     noise_std: 0.0,
//!     seed: 0,
//! };
//! let k = KernelParams::new(5.0).unwrap();
//! let pack = GramPack::assemble(generate_dataset(&spec).unwrap(), k, k, QuadratureSpec::SIMPSON).unwrap();
//! let model = fit_sldmd(&pack, None).unwrap();
//! let f = model.eval(&[0.5]).unwrap();
//! assert!((f[0] + 0.5).abs() < 1e-2);
//! ```

pub mod cli;
pub mod config;
pub mod dynamics;
pub mod error;
pub mod estimators;
pub mod io;
pub mod kernel;
pub mod operator;
pub mod sweep;
pub mod trajectory;

pub use error::{Error, Result};
