//! Decentralized binary detection.
//!
//! Sensors observe conditionally i.i.d. data, quantize it with
//! likelihood-ratio threshold policies and send one action each to a fusion
//! center that applies the MAP rule. The crate computes exact Bayes risks in
//! rational arithmetic, Monte Carlo estimates, risks of randomized
//! (exchangeable) teams under two fusion-information regimes, Chernoff error
//! exponents with a finite-N lower bound, and optimal team designs.
//!
//! ```
//! use detkit::evaluate::{exact_risk, Fusion, Prob};
//! use detkit::example1::{kernel_a, kernel_b, model};
//! use detkit::models::Prior;
//! use detkit::numeric::ratio;
//! use detkit::policies::TeamPolicy;
//!
//! let team = TeamPolicy::new(vec![kernel_a(), kernel_b()]).unwrap();
//! let report = exact_risk(&team, &Fusion::Map, &model(), &Prior::uniform()).unwrap();
//! assert_eq!(report.risk, Prob::Exact(ratio(19, 90)));
//! ```

pub mod cli;
pub mod error;
pub mod evaluate;
pub mod example1;
pub mod exponent;
pub mod fusion;
pub mod io;
pub mod models;
pub mod numeric;
pub mod optimize;
pub mod policies;

pub use error::{Error, Result};
pub use evaluate::{exact_risk, mc_risk, mixture_risk, Fusion, McConfig, Prob, RiskReport};
pub use exponent::{chernoff_exponent, exponent_lower_bound, ChernoffResult};
pub use fusion::{FusionInfo, FusionTable};
pub use models::{FiniteObservationModel, GaussianShift, Hypothesis, ObservationModel, Prior};
pub use numeric::Rational;
pub use policies::{SensorKernel, TeamMixture, TeamPolicy, ThresholdPolicy};

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/models.md")]
    mod models {}
    #[doc = include_str!("../../../book/src/fusion.md")]
    mod fusion {}
    #[doc = include_str!("../../../book/src/mixtures.md")]
    mod mixtures {}
    #[doc = include_str!("../../../book/src/exponents.md")]
    mod exponents {}
    #[doc = include_str!("../../../book/src/design.md")]
    mod design {}
    #[doc = include_str!("../../../book/src/monte-carlo.md")]
    mod monte_carlo {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
}
