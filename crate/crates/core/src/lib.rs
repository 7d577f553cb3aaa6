pub mod codec;
pub mod error;
pub mod field;
pub mod linalg;
pub mod model;
pub mod parity;
pub mod repair;

pub use codec::{
    check_codeword, decode_from_k, encode, verify_mds, CodewordArray, Decoder, MdsReport, Message,
};
pub use error::{Error, Result};
pub use field::{FieldElem, FieldSpec, IndexRing};
pub use linalg::Matrix;
pub use model::{CodeParams, NodeIndex, RowIndex};
pub use parity::{build_hmds, build_system, find_c0, Constraint, ParityCheckSystem, Term};
pub use repair::{
    bandwidth_report, helper_extract, repair_node, BandwidthReport, HelperPacket, RepairPlan,
    RepairResult,
};

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/fields.md")]
    mod fields {}
    #[doc = include_str!("../../../book/src/geometry.md")]
    mod geometry {}
    #[doc = include_str!("../../../book/src/parity.md")]
    mod parity {}
    #[doc = include_str!("../../../book/src/codec.md")]
    mod codec {}
    #[doc = include_str!("../../../book/src/repair.md")]
    mod repair {}
}
