//! Distributed function computation over multiple access channels.
//!
//! Joint pmfs and kernels over named alphabets, information measures,
//! characteristic graphs and colorings, MAC models, a feasibility checker for
//! separated source/channel codes, and closed-form and Monte Carlo scheme
//! evaluations.

pub mod channels;
pub mod cli;
pub mod error;
pub mod feasibility;
pub mod func;
pub mod graph;
pub mod info;
pub mod presets;
pub mod prob;
pub mod schemes;

pub use error::{Error, Result};
pub use prob::{Alphabet, JointPmf, Kernel};
