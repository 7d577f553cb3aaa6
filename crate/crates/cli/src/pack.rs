//! File bytes <-> m-bit message symbols.
//!
//! The file is read as a little-endian bitstream (bit `j` of the stream is
//! bit `j % 8` of byte `j / 8`) and cut into consecutive `m`-bit symbols.
//! At `m = 16` a symbol is simply a little-endian `u16` pair of bytes.

use msrcode::FieldElem;

/// Cuts `data` into exactly `count` symbols of `m` bits, zero-padding.
pub fn bytes_to_symbols(data: &[u8], m: u32, count: usize) -> Vec<FieldElem> {
    let mask = (1u32 << m) - 1;
    let mut out = Vec::with_capacity(count);
    let mut acc: u64 = 0;
    let mut bits = 0u32;
    let mut bytes = data.iter();
    while out.len() < count {
        while bits < m {
            acc |= (*bytes.next().unwrap_or(&0) as u64) << bits;
            bits += 8;
        }
        out.push(FieldElem((acc as u32 & mask) as u16));
        acc >>= m;
        bits -= m;
    }
    out
}

/// Inverse of [`bytes_to_symbols`], keeping the first `len` bytes.
pub fn symbols_to_bytes(symbols: &[FieldElem], m: u32, len: usize) -> Vec<u8> {
    let mut out = Vec::with_capacity(len);
    let mut acc: u64 = 0;
    let mut bits = 0u32;
    for s in symbols {
        acc |= (s.value() as u64) << bits;
        bits += m;
        while bits >= 8 {
            if out.len() == len {
                return out;
            }
            out.push(acc as u8);
            acc >>= 8;
            bits -= 8;
        }
    }
    if bits > 0 && out.len() < len {
        out.push(acc as u8);
    }
    out.resize(len, 0);
    out
}

/// Number of `symbols_per_stripe`-symbol stripes needed for `len` bytes.
pub fn stripes_for(len: u64, m: u32, symbols_per_stripe: usize) -> u64 {
    let bits = len * 8;
    let per = symbols_per_stripe as u64 * m as u64;
    bits.div_ceil(per)
}
