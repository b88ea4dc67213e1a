//! Fidelity (AIM, AUM, PGI, PGU) and stability (RIS) metrics, top-K
//! selection and AUC-over-K aggregation.

mod curve;
mod fidelity;
mod stability;
mod topk;

use core::fmt;
use core::str::FromStr;

pub use curve::{curve_and_auc, curve_for_mode, MetricCurve};
pub use fidelity::{aim, aum, pgi, pgu, FidelityConfig};
pub use stability::{ris, StabilityConfig};
pub use topk::{bottom_k, mask, top_k, TopKMode};

use crate::error::{input_err, Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Metric {
    Aim,
    Aum,
    Pgi,
    Pgu,
    Ris,
}

impl Metric {
    pub const ALL: [Metric; 5] = [Metric::Aim, Metric::Aum, Metric::Pgi, Metric::Pgu, Metric::Ris];

    pub fn name(self) -> &'static str {
        match self {
            Metric::Aim => "aim",
            Metric::Aum => "aum",
            Metric::Pgi => "pgi",
            Metric::Pgu => "pgu",
            Metric::Ris => "ris",
        }
    }

    pub fn higher_is_better(self) -> bool {
        matches!(self, Metric::Aum | Metric::Pgi)
    }

    /// `↑` for higher-is-better, `↓` otherwise.
    pub fn arrow(self) -> &'static str {
        if self.higher_is_better() {
            "↑"
        } else {
            "↓"
        }
    }

    /// RIS has no K axis; the others are curves over K = 1..d.
    pub fn has_k_curve(self) -> bool {
        self != Metric::Ris
    }

    pub fn better(self, a: f64, b: f64) -> bool {
        if self.higher_is_better() {
            a > b
        } else {
            a < b
        }
    }
}

impl fmt::Display for Metric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Metric {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Metric::ALL
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| input_err!("unknown metric '{s}' (expected one of aim, aum, pgi, pgu, ris)"))
    }
}
