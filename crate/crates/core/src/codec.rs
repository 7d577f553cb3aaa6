//! Systematic encoding, data collection from any `k` nodes, and an
//! end-to-end MDS check.
//!
//! The message fills the first `k` nodes (classes `1..t`) node by node, each
//! node in row-ordinal order. The last `q` nodes (class `t`) hold parity:
//! with `H = [H_S | H_P]` split by node set, the parity symbols are
//! `p = H_P^-1 H_S s` (characteristic two, so no sign flip).

use std::collections::BTreeMap;

use itertools::Itertools;
use rand::Rng;

use crate::error::{Error, Result};
use crate::field::FieldElem;
use crate::linalg::Matrix;
use crate::model::{CodeParams, NodeIndex, RowIndex};
use crate::parity::ParityCheckSystem;

/// `B = k * alpha` message symbols.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Message {
    payload: Vec<FieldElem>,
}

impl Message {
    pub fn new(payload: Vec<FieldElem>, p: &CodeParams) -> Result<Self> {
        if payload.len() != p.file_size {
            return Err(Error::Length {
                expected: p.file_size,
                got: payload.len(),
            });
        }
        Ok(Message { payload })
    }

    pub fn zero(p: &CodeParams) -> Self {
        Message {
            payload: vec![FieldElem::ZERO; p.file_size],
        }
    }

    pub fn random(p: &CodeParams, rng: &mut impl Rng) -> Self {
        let size = p.field.size();
        Message {
            payload: (0..p.file_size)
                .map(|_| FieldElem(rng.gen_range(0..size) as u16))
                .collect(),
        }
    }

    pub fn payload(&self) -> &[FieldElem] {
        &self.payload
    }

    pub fn into_payload(self) -> Vec<FieldElem> {
        self.payload
    }
}

/// The `alpha x n` codeword, stored node-major so each node's content is a
/// contiguous slice in row-ordinal order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CodewordArray {
    params: CodeParams,
    symbols: Vec<FieldElem>,
}

impl CodewordArray {
    pub fn zero(p: &CodeParams) -> Self {
        CodewordArray {
            params: p.clone(),
            symbols: vec![FieldElem::ZERO; p.n * p.alpha],
        }
    }

    /// Wraps node-major symbols (`n * alpha` of them).
    pub fn from_symbols(p: &CodeParams, symbols: Vec<FieldElem>) -> Result<Self> {
        if symbols.len() != p.n * p.alpha {
            return Err(Error::Length {
                expected: p.n * p.alpha,
                got: symbols.len(),
            });
        }
        Ok(CodewordArray {
            params: p.clone(),
            symbols,
        })
    }

    pub fn params(&self) -> &CodeParams {
        &self.params
    }

    pub fn symbols(&self) -> &[FieldElem] {
        &self.symbols
    }

    pub fn get(&self, row: &RowIndex, node: NodeIndex) -> FieldElem {
        let p = &self.params;
        self.symbols[p.node_to_ordinal(node) * p.alpha + p.row_to_ordinal(row)]
    }

    pub fn set(&mut self, row: &RowIndex, node: NodeIndex, v: FieldElem) {
        let p = &self.params;
        let i = p.node_to_ordinal(node) * p.alpha + p.row_to_ordinal(row);
        self.symbols[i] = v;
    }

    /// Everything node `nd` stores.
    pub fn node(&self, nd: NodeIndex) -> &[FieldElem] {
        let a = self.params.alpha;
        let o = self.params.node_to_ordinal(nd);
        &self.symbols[o * a..(o + 1) * a]
    }

    /// Contents of the given nodes, keyed by node.
    pub fn select(&self, nodes: &[NodeIndex]) -> BTreeMap<NodeIndex, Vec<FieldElem>> {
        nodes
            .iter()
            .map(|&nd| (nd, self.node(nd).to_vec()))
            .collect()
    }
}

fn systematic_nodes(p: &CodeParams) -> Vec<NodeIndex> {
    p.nodes().take(p.k).collect()
}

fn parity_nodes(p: &CodeParams) -> Vec<NodeIndex> {
    p.nodes().skip(p.k).collect()
}

/// `H_P^-1 H_S`, cached on the system.
fn encoder_matrix(sys: &ParityCheckSystem) -> Result<&Matrix> {
    if let Some(m) = sys.encoder.get() {
        return Ok(m);
    }
    let p = sys.params();
    let hs = sys.thick_submatrix(&systematic_nodes(p));
    let hp = sys.thick_submatrix(&parity_nodes(p));
    let g = hp.inverse(&p.field)?.mul(&p.field, &hs);
    Ok(sys.encoder.get_or_init(|| g))
}

/// Systematic encoding of one stripe.
pub fn encode(msg: &Message, sys: &ParityCheckSystem) -> Result<CodewordArray> {
    let p = sys.params();
    p.c0()?;
    if msg.payload.len() != p.file_size {
        return Err(Error::Length {
            expected: p.file_size,
            got: msg.payload.len(),
        });
    }
    let parity = encoder_matrix(sys)?.mul_vec(&p.field, &msg.payload);
    let mut symbols = msg.payload.clone();
    symbols.extend(parity);
    CodewordArray::from_symbols(p, symbols)
}

/// True iff every parity check sums to zero. Evaluates the term lists
/// directly rather than the flattened matrix.
pub fn check_codeword(arr: &CodewordArray, sys: &ParityCheckSystem) -> bool {
    let f = &sys.params().field;
    sys.constraints().iter().all(|con| {
        con.terms
            .iter()
            .fold(FieldElem::ZERO, |acc, t| {
                f.add(acc, f.mul(t.coeff, arr.get(&t.row, t.node)))
            })
            .is_zero()
    })
}

/// Precomputed recovery of the `q` missing nodes from a fixed set of `k`
/// available ones: `missing = H_M^-1 H_A available`.
#[derive(Debug, Clone)]
pub struct Decoder {
    available: Vec<NodeIndex>,
    missing: Vec<NodeIndex>,
    recover: Option<Matrix>,
}

impl Decoder {
    pub fn new(sys: &ParityCheckSystem, available: &[NodeIndex]) -> Result<Self> {
        let p = sys.params();
        let mut avail = available.to_vec();
        avail.sort();
        if let Some(w) = avail.windows(2).find(|w| w[0] == w[1]) {
            return Err(Error::DuplicateNode(w[0]));
        }
        if avail.len() != p.k {
            return Err(Error::NodeCount {
                expected: p.k,
                got: avail.len(),
            });
        }
        for nd in &avail {
            NodeIndex::new(nd.class, nd.theta, p)?;
        }
        let missing: Vec<NodeIndex> = p.nodes().filter(|nd| !avail.contains(nd)).collect();
        let recover = if missing.iter().all(|nd| nd.class == p.t) {
            // all systematic nodes present
            None
        } else {
            let hm = sys.thick_submatrix(&missing);
            let ha = sys.thick_submatrix(&avail);
            Some(hm.inverse(&p.field)?.mul(&p.field, &ha))
        };
        Ok(Decoder {
            available: avail,
            missing,
            recover,
        })
    }

    pub fn available(&self) -> &[NodeIndex] {
        &self.available
    }

    pub fn missing(&self) -> &[NodeIndex] {
        &self.missing
    }

    /// True if the message can be read off without solving.
    pub fn is_systematic(&self) -> bool {
        self.recover.is_none()
    }

    /// Rebuilds the message from the available nodes' contents, given in
    /// the order of [`available`](Self::available).
    pub fn decode(&self, p: &CodeParams, contents: &[&[FieldElem]]) -> Result<Message> {
        if contents.len() != self.available.len() {
            return Err(Error::NodeCount {
                expected: self.available.len(),
                got: contents.len(),
            });
        }
        for c in contents {
            if c.len() != p.alpha {
                return Err(Error::Length {
                    expected: p.alpha,
                    got: c.len(),
                });
            }
        }
        let mut by_node: Vec<Option<&[FieldElem]>> = vec![None; p.n];
        for (nd, c) in self.available.iter().zip(contents) {
            by_node[p.node_to_ordinal(*nd)] = Some(c);
        }
        let recovered = match &self.recover {
            None => Vec::new(),
            Some(m) => {
                let flat: Vec<FieldElem> = contents.concat();
                m.mul_vec(&p.field, &flat)
            }
        };
        let mut payload = Vec::with_capacity(p.file_size);
        for (ord, slot) in by_node.iter().enumerate().take(p.k) {
            match slot {
                Some(c) => payload.extend_from_slice(c),
                None => {
                    let nd = p.ordinal_to_node(ord)?;
                    let pos = self.missing.iter().position(|&m| m == nd).expect("missing");
                    payload.extend_from_slice(&recovered[pos * p.alpha..(pos + 1) * p.alpha]);
                }
            }
        }
        Message::new(payload, p)
    }
}

/// Recovers the message from exactly `k` nodes.
pub fn decode_from_k(
    available: &BTreeMap<NodeIndex, Vec<FieldElem>>,
    sys: &ParityCheckSystem,
) -> Result<Message> {
    let nodes: Vec<NodeIndex> = available.keys().copied().collect();
    let dec = Decoder::new(sys, &nodes)?;
    let contents: Vec<&[FieldElem]> = dec
        .available()
        .iter()
        .map(|nd| available[nd].as_slice())
        .collect();
    dec.decode(sys.params(), &contents)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MdsReport {
    /// Number of `k`-subsets tried.
    pub subsets: usize,
    pub trials: usize,
    /// Failed (subset, message) pairs.
    pub failures: usize,
    /// Set when the systematic encoder itself could not be built.
    pub encoder_singular: bool,
}

impl MdsReport {
    pub fn passed(&self) -> bool {
        self.failures == 0 && !self.encoder_singular
    }
}

/// Encodes `trials` random messages and decodes each from every `k`-subset
/// of nodes.
pub fn verify_mds(sys: &ParityCheckSystem, trials: usize, rng: &mut impl Rng) -> MdsReport {
    let p = sys.params();
    let subsets: Vec<Vec<NodeIndex>> = p.nodes().combinations(p.k).collect();
    let mut report = MdsReport {
        subsets: subsets.len(),
        trials,
        failures: 0,
        encoder_singular: false,
    };
    if trials == 0 {
        return report;
    }
    let mut codewords = Vec::with_capacity(trials);
    for _ in 0..trials {
        let msg = Message::random(p, rng);
        match encode(&msg, sys) {
            Ok(cw) => codewords.push((msg, cw)),
            Err(_) => {
                report.encoder_singular = true;
                report.failures = subsets.len() * trials;
                return report;
            }
        }
    }
    for subset in &subsets {
        let Ok(dec) = Decoder::new(sys, subset) else {
            report.failures += trials;
            continue;
        };
        for (msg, cw) in &codewords {
            let contents: Vec<&[FieldElem]> =
                dec.available().iter().map(|&nd| cw.node(nd)).collect();
            match dec.decode(p, &contents) {
                Ok(m) if &m == msg => {}
                _ => report.failures += 1,
            }
        }
    }
    report
}
