use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// Rejection sampling could not place every point; the exclusion radius
    /// is too large for the requested count on this disk.
    #[error(
        "cannot place {count} points with exclusion radius {exclusion_radius} \
         on a disk of radius {radius} after {redraws} redraws"
    )]
    PlacementInfeasible {
        count: usize,
        exclusion_radius: f64,
        radius: f64,
        redraws: usize,
    },

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("could not bracket outage target {epsilon_hat} within [{lower:e}, {upper:e}]")]
    BracketFailure {
        epsilon_hat: f64,
        lower: f64,
        upper: f64,
    },

    #[error("no completed trials to aggregate")]
    EmptyAggregate,
}

impl Error {
    pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Self {
        Self::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }

    /// Re-labels a parameter error with the caller's name for the value.
    pub(crate) fn renamed(self, name: &'static str) -> Self {
        match self {
            Self::InvalidParameter { reason, .. } => Self::InvalidParameter { name, reason },
            other => other,
        }
    }
}
