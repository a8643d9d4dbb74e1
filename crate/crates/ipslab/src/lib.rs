//! Event-driven simulation and condition checking for neighbor-dependent
//! nucleotide substitution processes superimposed with a cut-and-paste
//! (circular permutation) mechanism on a finite ring.
//!
//! The crate is organized around the pipeline
//!
//! * [`alphabet`] / [`ring`]: the four-letter alphabet, admissible total
//!   orders, ring configurations and the circular permutation `sigma`;
//! * [`rates`]: substitution-rate models (the RN+YpR family and a generic
//!   partition representation) plus the cut-and-paste kernel;
//! * [`checker`]: closed-form ergodicity and attractiveness conditions,
//!   evaluated symbolically into a structured report;
//! * [`sim`]: exact continuous-time simulation of the superimposed process,
//!   the two-copy basic coupling, and stationary statistics;
//! * [`dual`]: the dominating branching process and the backward dual-set
//!   process, with extinction estimation;
//! * [`analytics`]: closed-form stationary first moments and residual
//!   checks of the moment system against simulated measures.

pub mod alphabet;
pub mod analytics;
pub mod checker;
pub mod dual;
pub mod error;
pub mod kernel;
pub mod parallel;
pub mod rates;
pub mod ring;
pub mod sim;

pub use alphabet::{AlphabetOrder, Nucleotide, OrderId};
pub use error::Error;
pub use kernel::CutPasteKernel;
pub use rates::{DerivedConstants, GenericRateModel, QMatrix, RnYprParams};
pub use ring::{CoupledConfig, RingConfig};

pub type Result<T> = std::result::Result<T, Error>;
