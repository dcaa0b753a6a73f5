//! Destination-side detection algorithms.

mod basic;
mod covariance;
mod msdd;
mod oracle;
mod sphere;

pub use basic::{detect_cdd, detect_coherent};
pub use covariance::{build_covariance, CovarianceModel};
pub use msdd::{detect_msdd_exhaustive, msdd_metric, msdd_metric_dense, msdd_metric_sh};
pub use oracle::ml_oracle_mc;
pub use sphere::{detect_msdsd, detect_msdsd_joint, SphereDiagnostics};

use crate::error::{Error, Result};
use crate::network::RxBlock;
use crate::numerics::Vec2;

/// N consecutive received blocks treated as one joint detection problem.
/// The last block anchors the differential chain: its space-time matrix is
/// pinned to the identity, and the N-1 codewords between consecutive blocks
/// are the decision variables.
#[derive(Clone, Debug)]
pub struct DetectionWindow {
    y: Vec<Vec2>,
}

impl DetectionWindow {
    pub fn new(y: Vec<Vec2>) -> Result<DetectionWindow> {
        if y.len() < 2 {
            return Err(Error::Domain(format!(
                "detection window needs at least 2 blocks, got {}",
                y.len()
            )));
        }
        Ok(DetectionWindow { y })
    }

    /// Window over `rx[start .. start+n]`.
    pub fn from_rx(rx: &[RxBlock], start: usize, n: usize) -> Result<DetectionWindow> {
        if start + n > rx.len() {
            return Err(Error::Domain(format!(
                "window [{start}, {}) exceeds the {} received blocks",
                start + n,
                rx.len()
            )));
        }
        DetectionWindow::new(rx[start..start + n].iter().map(|b| b.y).collect())
    }

    /// Window length N in blocks.
    pub fn len(&self) -> usize {
        self.y.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    #[inline]
    pub fn y(&self, i: usize) -> &Vec2 {
        &self.y[i]
    }
}
