//! Spatially scalable coded caching over MDS-coded multipoint multicast.
//!
//! The crate is split along the layers of the delivery system:
//!
//! * [`coded_caching`]: centralized cache placement, XOR multicast delivery
//!   and the systematic MDS layer that spreads the multicast codeword over
//!   `N_E` edge nodes, any `L` of which suffice.
//! * [`geometry`]: Poisson network sampling, ordered-distance laws and the
//!   local-average SIR (exact and Campbell-approximated).
//! * [`phy_sim`]: Monte Carlo physical layer with partial zero-forcing (PZF)
//!   and PZF with successive interference cancellation.
//! * [`specfun`]: special functions used by the closed forms.
//! * [`analysis`]: Laplace transforms, Euler-series CDF inversion, SIR CDFs,
//!   average rates and analytic outage.
//! * [`planner`]: delivery latency and selection of the macro-diversity order.

pub mod analysis;
pub mod coded_caching;
pub mod curve;
pub mod error;
pub mod geometry;
pub mod montecarlo;
pub mod phy_sim;
pub mod planner;
pub mod quad;
pub mod specfun;
pub mod stats;

pub use error::{Error, Result};

/// Receive processing applied by the typical user.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
pub enum Receiver {
    /// Linear partial zero-forcing on the `L` nearest edge nodes.
    #[serde(rename = "pzf")]
    Pzf,
    /// PZF with successive cancellation, strongest stream first.
    #[serde(rename = "pzf-sic")]
    PzfSic,
}

impl Receiver {
    pub fn as_str(&self) -> &'static str {
        match self {
            Receiver::Pzf => "pzf",
            Receiver::PzfSic => "pzf-sic",
        }
    }
}

impl std::str::FromStr for Receiver {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "pzf" => Ok(Receiver::Pzf),
            "pzf-sic" | "sic" => Ok(Receiver::PzfSic),
            other => Err(Error::InvalidParameter(format!(
                "unknown receiver `{other}` (expected pzf or pzf-sic)"
            ))),
        }
    }
}

impl std::fmt::Display for Receiver {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}
