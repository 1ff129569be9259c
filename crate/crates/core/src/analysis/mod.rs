//! Analysis procedures that run on measured or synthetic tables.

mod expfit;
mod hpbw;
mod hpi;
mod localize;
mod metrics;
mod savgol;

pub use expfit::{fit_exponential, ExpFit, FIT_TOLERANCE, MAX_ITERATIONS};
pub use hpbw::{azimuth_cut, hpbw, hpbw_by_side, HALF_POWER_DB};
pub use hpi::{hpi_reconstruct, Pattern3D};
pub use localize::{localize_aoa, AoaEstimate};
pub use metrics::nmse;
pub use savgol::{savitzky_golay, SgFilterSpec};
