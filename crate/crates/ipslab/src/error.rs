use crate::alphabet::OrderId;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("ring size {0} is too small (minimum 3)")]
    RingTooSmall(usize),

    #[error("configuration sizes do not match: {0} vs {1}")]
    SizeMismatch(usize, usize),

    #[error("site {site} out of range for ring of {n} sites")]
    SiteOutOfRange { site: usize, n: usize },

    #[error("permuted segment of {len} sites does not fit on a ring of {n} sites")]
    SegmentTooLong { len: usize, n: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("invalid configuration letter {0:?}")]
    InvalidLetter(char),

    #[error("initial configurations are not ordered under {0}")]
    UnorderedInitial(OrderId),

    #[error("attractiveness does not hold for order {0}, precondition violated")]
    NotAttractive(OrderId),

    #[error("event budget of {0} events exceeded before the horizon")]
    EventBudgetExceeded(u64),

    #[error("generator matrix is not irreducible enough to determine a unique invariant law")]
    ReducibleGenerator,

    #[error("internal consistency violation: {0}")]
    Internal(String),
}
