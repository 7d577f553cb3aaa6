//! Plain-text `key=value` manifest.
//!
//! `msr init` writes the code parameters only; `msr encode` adds the stripe
//! count, file length and one CRC-32 per shard:
//!
//! ```text
//! q=2
//! t=3
//! m=7
//! reduction_poly=0x83
//! c0=1
//! stripe_count=37450
//! file_length=1048576
//! shard.1.0=5f1d2c3a
//! ```
//!
//! Blank lines and lines starting with `#` are ignored.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use msrcode::{CodeParams, FieldElem, FieldSpec, NodeIndex};

use crate::error::CliError;
use crate::shard::ShardHeader;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Manifest {
    pub q: usize,
    pub t: usize,
    pub m: u32,
    pub reduction_poly: u32,
    pub c0: u16,
    pub stripe_count: Option<u32>,
    pub file_length: Option<u64>,
    pub checksums: BTreeMap<NodeIndex, u32>,
}

fn parse_int<T: TryFrom<u64>>(key: &str, v: &str) -> Result<T, CliError> {
    let parsed = match v.strip_prefix("0x") {
        Some(hex) => u64::from_str_radix(hex, 16),
        None => v.parse::<u64>(),
    };
    parsed
        .ok()
        .and_then(|x| T::try_from(x).ok())
        .ok_or_else(|| CliError::Format(format!("manifest: bad value for {key}: {v:?}")))
}

impl Manifest {
    /// Parameters only, as written by `init`.
    pub fn from_params(p: &CodeParams) -> Result<Self, CliError> {
        Ok(Manifest {
            q: p.q,
            t: p.t,
            m: p.field.degree(),
            reduction_poly: p.field.reduction_poly(),
            c0: p.c0()?.value(),
            stripe_count: None,
            file_length: None,
            checksums: BTreeMap::new(),
        })
    }

    /// Rebuilds the code parameters. The stored `c0` is taken as is; use
    /// `verify` to check it.
    pub fn params(&self) -> Result<CodeParams, CliError> {
        let field = FieldSpec::with_poly(self.m, self.reduction_poly)?;
        let p = CodeParams::with_field(self.q, self.t, field)?;
        Ok(p.with_c0(FieldElem(self.c0))?)
    }

    pub fn parse(text: &str) -> Result<Self, CliError> {
        let mut kv = BTreeMap::new();
        let mut checksums = BTreeMap::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (k, v) = line.split_once('=').ok_or_else(|| {
                CliError::Format(format!("manifest line {}: expected key=value", lineno + 1))
            })?;
            let (k, v) = (k.trim(), v.trim());
            if let Some(node) = k.strip_prefix("shard.") {
                let (i, theta) = node
                    .split_once('.')
                    .ok_or_else(|| CliError::Format(format!("manifest: bad shard key {k:?}")))?;
                let node = NodeIndex {
                    class: parse_int(k, i)?,
                    theta: parse_int(k, theta)?,
                };
                let sum = u32::from_str_radix(v, 16)
                    .map_err(|_| CliError::Format(format!("manifest: bad checksum {v:?}")))?;
                checksums.insert(node, sum);
            } else if kv.insert(k.to_string(), v.to_string()).is_some() {
                return Err(CliError::Format(format!("manifest: duplicate key {k}")));
            }
        }
        let get = |k: &str| {
            kv.get(k)
                .ok_or_else(|| CliError::Format(format!("manifest: missing key {k}")))
        };
        let opt = |k: &str| kv.get(k);
        Ok(Manifest {
            q: parse_int("q", get("q")?)?,
            t: parse_int("t", get("t")?)?,
            m: parse_int("m", get("m")?)?,
            reduction_poly: parse_int("reduction_poly", get("reduction_poly")?)?,
            c0: parse_int("c0", get("c0")?)?,
            stripe_count: opt("stripe_count")
                .map(|v| parse_int("stripe_count", v))
                .transpose()?,
            file_length: opt("file_length")
                .map(|v| parse_int("file_length", v))
                .transpose()?,
            checksums,
        })
    }

    pub fn render(&self) -> String {
        let mut s = String::new();
        writeln!(s, "q={}", self.q).unwrap();
        writeln!(s, "t={}", self.t).unwrap();
        writeln!(s, "m={}", self.m).unwrap();
        writeln!(s, "reduction_poly={:#x}", self.reduction_poly).unwrap();
        writeln!(s, "c0={}", self.c0).unwrap();
        if let Some(n) = self.stripe_count {
            writeln!(s, "stripe_count={n}").unwrap();
        }
        if let Some(n) = self.file_length {
            writeln!(s, "file_length={n}").unwrap();
        }
        for (nd, sum) in &self.checksums {
            writeln!(s, "shard.{}.{}={sum:08x}", nd.class, nd.theta).unwrap();
        }
        s
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        Self::parse(&text)
    }

    pub fn save(&self, path: &Path) -> Result<(), CliError> {
        std::fs::write(path, self.render()).map_err(|e| CliError::io(path, e))
    }

    /// Header this manifest implies for `node`.
    pub fn header_for(&self, node: NodeIndex) -> ShardHeader {
        ShardHeader {
            q: self.q as u8,
            t: self.t as u8,
            m: self.m as u8,
            reduction_poly: self.reduction_poly,
            c0: self.c0,
            node_i: node.class as u8,
            node_theta: node.theta as u8,
            stripe_count: self.stripe_count.unwrap_or(0),
            file_length: self.file_length.unwrap_or(0),
        }
    }

    /// Checks that `h` belongs to the stripe set this manifest describes.
    pub fn check_header(&self, h: &ShardHeader) -> Result<(), CliError> {
        let want = self.header_for(h.node());
        if *h != want {
            return Err(CliError::Mismatch(format!(
                "shard {} header {h:?} disagrees with manifest {want:?}",
                h.node()
            )));
        }
        Ok(())
    }
}
