//! Exact simple valuations on finite posets.
//!
//! The crate realizes the valuations monad at desk scale: finite posets
//! stand in for dcpo's, upper sets for Scott-open sets, and simple
//! valuations `Σ wᵢ δ_{xᵢ}` with rational weights for subprobability
//! valuations. On top of that sit Choquet integration, the monad operations
//! with their commutativity checks, push-forwards of CDF-described
//! valuations on `[0,1]` along dyadic step maps, and a small probabilistic
//! language whose programs denote simple valuations.
//!
//! All arithmetic is exact; every identity is checked with `==`.

#[cfg(feature = "cli")]
pub mod cli;
pub mod error;
pub mod flow;
pub mod formats;
pub mod gen;
pub mod integration;
pub mod interval;
pub mod lang;
pub mod monad;
pub mod poset;
pub mod rational;
pub mod suite;
pub mod valuation;
pub mod workspace;

pub use error::{Error, Result};
pub use integration::{integrate, integrate_riemann_oracle, Integrand};
pub use interval::{lebesgue, pushforward, Cdf, StepMap};
pub use monad::{fubini_check, kleisli_ext, BiIntegrand, KleisliMap, ProductSpace};
pub use poset::{FinitePoset, MonotoneMap, PosetRef, UpperSet};
pub use rational::{MassValue, Q};
pub use valuation::{dirac, make_simple, SimpleValuation};
pub use workspace::Workspace;
