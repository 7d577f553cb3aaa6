use thiserror::Error;

use crate::model::NodeIndex;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("extension degree m={0} is outside 1..=16")]
    FieldDegree(u32),
    #[error("polynomial {poly:#b} is not an irreducible polynomial of degree {m}")]
    ReduciblePolynomial { m: u32, poly: u32 },
    #[error("value {value} is not an element of GF(2^{m})")]
    ElementOutOfRange { value: u16, m: u32 },
    #[error("division by zero")]
    DivisionByZero,
    #[error("invalid code parameters: {0}")]
    InvalidParams(String),
    #[error("GF(2^{m}) has {available} nonzero elements, need at least n={needed}")]
    FieldTooSmall {
        m: u32,
        available: usize,
        needed: usize,
    },
    #[error(
        "no nonzero coefficient in GF(2^{m}) makes every {q}-node subset full rank; \
         a field with more than {sufficient} elements is guaranteed to work"
    )]
    SearchExhausted { m: u32, q: usize, sufficient: u128 },
    #[error("{subsets} thick-column subsets exceed the exhaustive check cap of {cap}")]
    SubsetCapExceeded { subsets: u128, cap: u128 },
    #[error("coefficient c0 has not been set")]
    CoefficientUnset,
    #[error("coefficient c0 must be nonzero")]
    ZeroCoefficient,
    #[error("index out of range: {0}")]
    IndexOutOfRange(String),
    #[error("singular matrix")]
    Singular,
    #[error("dimension mismatch: expected {expected}, got {got}")]
    Length { expected: usize, got: usize },
    #[error("expected {expected} distinct nodes, got {got}")]
    NodeCount { expected: usize, got: usize },
    #[error("node {0} supplied more than once")]
    DuplicateNode(NodeIndex),
    #[error("helper {0} is the failed node")]
    HelperIsFailed(NodeIndex),
    #[error("packet from helper {helper} does not carry exactly the helper rows of {failed}")]
    PacketRows {
        helper: NodeIndex,
        failed: NodeIndex,
    },
}
