//! Numerical laboratory for Lorentz, Besov–Lorentz and Triebel–Lizorkin–Lorentz spaces.
//!
//! The crate is organised bottom-up:
//!
//! * [`measure`] holds grid functions, rearrangements and Lorentz quasi-norms.
//! * [`seq`] adds sequence norms `ℓ^q(L^{p,r})`, `L^{p,r}(ℓ^q)` and their embedding predicate.
//! * [`lp`] performs the Littlewood–Paley decomposition and builds moment-vanishing kernels.
//! * [`oracle`] decides embeddings between Besov and Triebel–Lizorkin–Lorentz spaces.
//! * [`families`] constructs the test functions that certify failures and bounds.
//! * [`triangle`] evaluates triangle-inequality constants and searches for extremizers.
//! * [`io`] reads and writes grid functions and ratio tables.

pub mod error;
pub mod ext;
pub mod families;
pub mod io;
pub mod lp;
pub mod measure;
pub mod oracle;
pub mod quadrature;
pub mod seq;
pub mod triangle;

pub use error::{LabError, Result};

/// Environment variable capping the number of worker threads.
pub const THREADS_ENV: &str = "LORLAB_THREADS";

/// Sizes the global worker pool from `LORLAB_THREADS` when it is set, and
/// returns the number of workers in use.
///
/// Has no effect once the global pool exists.
pub fn init_threads() -> Result<usize> {
    if let Ok(raw) = std::env::var(THREADS_ENV) {
        let n: usize = raw
            .trim()
            .parse()
            .ok()
            .filter(|&n| n > 0)
            .ok_or_else(|| LabError::InvalidParameter(format!("{THREADS_ENV}={raw:?} is not a positive integer")))?;
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    Ok(rayon::current_num_threads())
}
