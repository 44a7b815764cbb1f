//! Numerical model of a four-qubit superconducting processor built around a
//! shared bus resonator.
//!
//! - [`hilbert`]: composite-space linear algebra.
//! - [`dynamics`]: Jaynes-Cummings evolution, swap spectroscopy, rapid entanglement.
//! - [`circuits`]: ideal gates and the compiled factoring circuits.
//! - [`tomography`]: state tomography and entanglement metrics.
//! - [`noise`]: amplitude-damping and dephasing channels.
//! - [`harness`]: experiment orchestration and output files.

pub mod circuits;
pub mod dynamics;
pub mod error;
pub mod harness;
pub mod hilbert;
pub mod noise;
pub mod states;
pub mod tomography;

pub use error::{Error, Result};

/// Map over a slice, in parallel when the `parallel` feature is on.
/// Results keep input order.
pub(crate) fn par_map<T, R, F>(items: &[T], f: F) -> Vec<R>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> R + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        items.par_iter().map(f).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        items.iter().map(f).collect()
    }
}
