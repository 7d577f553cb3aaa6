//! Binary shard layout.
//!
//! ```text
//! offset size field
//!      0    4 magic "MSRC"
//!      4    1 version (1)
//!      5    1 q
//!      6    1 t
//!      7    1 m
//!      8    2 reduction polynomial, low 16 bits, LE
//!     10    2 c0, LE
//!     12    1 node class i
//!     13    1 node theta
//!     14    4 stripe count, LE
//!     18    8 original file length in bytes, LE
//!     26      stripe 0 .. stripe_count-1, each alpha symbols x 2 bytes LE
//! ```
//!
//! The leading `x^m` term of the polynomial is implied by `m`, which is what
//! lets the degree-16 polynomial fit in two bytes.

use msrcode::NodeIndex;

use crate::error::CliError;

pub const MAGIC: [u8; 4] = *b"MSRC";
pub const VERSION: u8 = 1;
pub const HEADER_LEN: usize = 26;
/// Bytes per stored symbol.
pub const SYMBOL_BYTES: usize = 2;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ShardHeader {
    pub q: u8,
    pub t: u8,
    pub m: u8,
    /// Full polynomial mask, leading term included.
    pub reduction_poly: u32,
    pub c0: u16,
    pub node_i: u8,
    pub node_theta: u8,
    pub stripe_count: u32,
    pub file_length: u64,
}

impl ShardHeader {
    pub fn node(&self) -> NodeIndex {
        NodeIndex {
            class: self.node_i as usize,
            theta: self.node_theta as usize,
        }
    }

    pub fn to_bytes(&self) -> [u8; HEADER_LEN] {
        let mut b = [0u8; HEADER_LEN];
        b[0..4].copy_from_slice(&MAGIC);
        b[4] = VERSION;
        b[5] = self.q;
        b[6] = self.t;
        b[7] = self.m;
        b[8..10].copy_from_slice(&((self.reduction_poly & 0xffff) as u16).to_le_bytes());
        b[10..12].copy_from_slice(&self.c0.to_le_bytes());
        b[12] = self.node_i;
        b[13] = self.node_theta;
        b[14..18].copy_from_slice(&self.stripe_count.to_le_bytes());
        b[18..26].copy_from_slice(&self.file_length.to_le_bytes());
        b
    }

    pub fn from_bytes(b: &[u8]) -> Result<Self, CliError> {
        if b.len() < HEADER_LEN {
            return Err(CliError::Format(format!(
                "shard header is {} bytes, need {HEADER_LEN}",
                b.len()
            )));
        }
        if b[0..4] != MAGIC {
            return Err(CliError::Format("bad shard magic".into()));
        }
        if b[4] != VERSION {
            return Err(CliError::Format(format!(
                "unsupported shard version {}",
                b[4]
            )));
        }
        let m = b[7];
        if !(1..=16).contains(&m) {
            return Err(CliError::Format(format!("shard header m={m} out of range")));
        }
        let low = u16::from_le_bytes([b[8], b[9]]) as u32;
        let reduction_poly = if m == 16 { low | 1 << 16 } else { low };
        Ok(ShardHeader {
            q: b[5],
            t: b[6],
            m,
            reduction_poly,
            c0: u16::from_le_bytes([b[10], b[11]]),
            node_i: b[12],
            node_theta: b[13],
            stripe_count: u32::from_le_bytes(b[14..18].try_into().unwrap()),
            file_length: u64::from_le_bytes(b[18..26].try_into().unwrap()),
        })
    }

    /// Byte offset of symbol `row` of stripe `stripe`.
    pub fn symbol_offset(alpha: usize, stripe: u64, row: usize) -> u64 {
        HEADER_LEN as u64 + (stripe * alpha as u64 + row as u64) * SYMBOL_BYTES as u64
    }
}

/// Canonical shard file name for a node.
pub fn shard_file_name(node: NodeIndex) -> String {
    format!("shard_{}_{}.msr", node.class, node.theta)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> ShardHeader {
        ShardHeader {
            q: 2,
            t: 3,
            m: 7,
            reduction_poly: 0x83,
            c0: 1,
            node_i: 3,
            node_theta: 1,
            stripe_count: 37450,
            file_length: 1 << 20,
        }
    }

    #[test]
    fn layout_is_bit_exact() {
        let b = sample().to_bytes();
        assert_eq!(b.len(), 26);
        assert_eq!(
            b,
            [
                b'M', b'S', b'R', b'C', 1, 2, 3, 7, 0x83, 0, 1, 0, 3, 1, 0x4a, 0x92, 0, 0, 0, 0,
                0x10, 0, 0, 0, 0, 0
            ]
        );
        assert_eq!(ShardHeader::from_bytes(&b).unwrap(), sample());
    }

    #[test]
    fn degree_16_poly_round_trips() {
        let h = ShardHeader {
            m: 16,
            reduction_poly: 0x1100B,
            c0: 0xfffe,
            ..sample()
        };
        let b = h.to_bytes();
        assert_eq!(&b[8..10], &[0x0b, 0x10]);
        assert_eq!(ShardHeader::from_bytes(&b).unwrap(), h);
    }

    #[test]
    fn rejects_bad_headers() {
        let mut b = sample().to_bytes();
        assert!(ShardHeader::from_bytes(&b[..25]).is_err());
        b[0] = b'X';
        assert!(ShardHeader::from_bytes(&b).is_err());
        let mut b = sample().to_bytes();
        b[4] = 2;
        assert!(ShardHeader::from_bytes(&b).is_err());
        let mut b = sample().to_bytes();
        b[7] = 17;
        assert!(ShardHeader::from_bytes(&b).is_err());
    }

    #[test]
    fn offsets() {
        assert_eq!(ShardHeader::symbol_offset(8, 0, 0), 26);
        assert_eq!(ShardHeader::symbol_offset(8, 1, 3), 26 + 2 * 11);
        assert_eq!(
            shard_file_name(NodeIndex { class: 2, theta: 0 }),
            "shard_2_0.msr"
        );
    }
}
