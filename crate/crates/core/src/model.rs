//! Code parameters and the two index spaces of the codeword array.
//!
//! A codeword is an `alpha x n` array. Rows are indexed by t-tuples over
//! Z_q ([`RowIndex`]), nodes by pairs `(i, theta)` with a class `i` in
//! `1..=t` ([`NodeIndex`]). Both have a canonical flat ordinal:
//!
//! * rows are lexicographic with `x_1` most significant,
//! * nodes are class-major, `(i - 1) * q + theta`.
//!
//! The flattened parity-check matrix puts symbol `(x, node)` in column
//! `node_ordinal * alpha + row_ordinal`.

use std::fmt;

use crate::error::{Error, Result};
use crate::field::{FieldElem, FieldSpec, IndexRing};

/// All dimensions of one code instance.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CodeParams {
    pub q: usize,
    pub t: usize,
    /// Number of nodes, `t * q`.
    pub n: usize,
    /// Dimension in node units, `(t - 1) * q`.
    pub k: usize,
    /// Helpers contacted during repair, `n - 1`.
    pub d: usize,
    /// Sub-packetization, `q^t`.
    pub alpha: usize,
    /// Symbols each helper sends during repair, `q^(t-1)`.
    pub beta: usize,
    /// Message length in symbols, `k * alpha`.
    pub file_size: usize,
    pub field: FieldSpec,
    c0: Option<FieldElem>,
}

impl CodeParams {
    /// Builds parameters over GF(2^m) with the default polynomial.
    pub fn new(q: usize, t: usize, m: u32) -> Result<Self> {
        Self::with_field(q, t, FieldSpec::new(m)?)
    }

    pub fn with_field(q: usize, t: usize, field: FieldSpec) -> Result<Self> {
        if q < 2 {
            return Err(Error::InvalidParams(format!(
                "q={q}: need q >= 2 so that nonzero shifts exist"
            )));
        }
        if t < 2 {
            return Err(Error::InvalidParams(format!("t={t}: need t >= 2")));
        }
        let overflow = || Error::InvalidParams(format!("q={q}, t={t} overflows"));
        let alpha = q.checked_pow(t as u32).ok_or_else(overflow)?;
        let n = t.checked_mul(q).ok_or_else(overflow)?;
        let k = (t - 1) * q;
        let file_size = k.checked_mul(alpha).ok_or_else(overflow)?;
        if field.order() < n {
            return Err(Error::FieldTooSmall {
                m: field.degree(),
                available: field.order(),
                needed: n,
            });
        }
        Ok(CodeParams {
            q,
            t,
            n,
            k,
            d: n - 1,
            alpha,
            beta: alpha / q,
            file_size,
            field,
            c0: None,
        })
    }

    /// The shifted-entry coefficient, once set.
    pub fn c0(&self) -> Result<FieldElem> {
        self.c0.ok_or(Error::CoefficientUnset)
    }

    pub fn c0_opt(&self) -> Option<FieldElem> {
        self.c0
    }

    /// Sets the shifted-entry coefficient. Zero is rejected.
    pub fn set_c0(&mut self, c0: FieldElem) -> Result<()> {
        if c0.is_zero() {
            return Err(Error::ZeroCoefficient);
        }
        self.field.elem(c0.value())?;
        self.c0 = Some(c0);
        Ok(())
    }

    pub fn with_c0(mut self, c0: FieldElem) -> Result<Self> {
        self.set_c0(c0)?;
        Ok(self)
    }

    pub fn ring(&self) -> IndexRing {
        IndexRing::new(self.q).expect("q >= 2 checked at construction")
    }

    /// Number of parity checks, `q^(t+1) = (n - k) * alpha`.
    pub fn constraint_count(&self) -> usize {
        self.q * self.alpha
    }

    /// Number of parity nodes, `n - k = q`.
    pub fn parity_nodes(&self) -> usize {
        self.n - self.k
    }

    /// Repair bandwidth in symbols, `d * beta`.
    pub fn repair_bandwidth(&self) -> usize {
        self.d * self.beta
    }

    pub fn rate(&self) -> f64 {
        self.k as f64 / self.n as f64
    }

    pub fn node(&self, i: usize, theta: usize) -> Result<NodeIndex> {
        NodeIndex::new(i, theta, self)
    }

    pub fn nodes(&self) -> impl Iterator<Item = NodeIndex> + '_ {
        (0..self.n).map(move |o| self.ordinal_to_node(o).expect("in range"))
    }

    pub fn rows(&self) -> impl Iterator<Item = RowIndex> + '_ {
        (0..self.alpha).map(move |o| self.ordinal_to_row(o).expect("in range"))
    }

    pub fn row_to_ordinal(&self, x: &RowIndex) -> usize {
        x.coords.iter().fold(0, |acc, &c| acc * self.q + c)
    }

    pub fn ordinal_to_row(&self, ord: usize) -> Result<RowIndex> {
        if ord >= self.alpha {
            return Err(Error::IndexOutOfRange(format!(
                "row ordinal {ord} >= alpha={}",
                self.alpha
            )));
        }
        let mut coords = vec![0; self.t];
        let mut rest = ord;
        for c in coords.iter_mut().rev() {
            *c = rest % self.q;
            rest /= self.q;
        }
        Ok(RowIndex { coords })
    }

    pub fn node_to_ordinal(&self, nd: NodeIndex) -> usize {
        (nd.class - 1) * self.q + nd.theta
    }

    pub fn ordinal_to_node(&self, ord: usize) -> Result<NodeIndex> {
        if ord >= self.n {
            return Err(Error::IndexOutOfRange(format!(
                "node ordinal {ord} >= n={}",
                self.n
            )));
        }
        Ok(NodeIndex {
            class: ord / self.q + 1,
            theta: ord % self.q,
        })
    }

    /// Position of coordinate `j` (1-based) in a row ordinal: `q^(t - j)`.
    pub(crate) fn row_stride(&self, j: usize) -> usize {
        self.q.pow((self.t - j) as u32)
    }

    /// Coordinate `j` (1-based) of the row with the given ordinal.
    pub(crate) fn row_coord(&self, row_ord: usize, j: usize) -> usize {
        row_ord / self.row_stride(j) % self.q
    }

    /// Row ordinals of the helper rows for `failed = (i0, theta0)`: every row
    /// with `x_{i0} = theta0`, ascending.
    pub fn gamma_ordinals(&self, failed: NodeIndex) -> Vec<usize> {
        (0..self.alpha)
            .filter(|&o| self.row_coord(o, failed.class) == failed.theta)
            .collect()
    }

    /// The helper rows for `failed`, ascending by ordinal.
    pub fn gamma_rows(&self, failed: NodeIndex) -> Vec<RowIndex> {
        self.gamma_ordinals(failed)
            .into_iter()
            .map(|o| self.ordinal_to_row(o).expect("in range"))
            .collect()
    }
}

/// A row `(x_1, ..., x_t)` of the codeword array.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct RowIndex {
    coords: Vec<usize>,
}

impl RowIndex {
    pub fn new(coords: Vec<usize>, p: &CodeParams) -> Result<Self> {
        if coords.len() != p.t || coords.iter().any(|&c| c >= p.q) {
            return Err(Error::IndexOutOfRange(format!(
                "row {coords:?} for q={}, t={}",
                p.q, p.t
            )));
        }
        Ok(RowIndex { coords })
    }

    pub fn coords(&self) -> &[usize] {
        &self.coords
    }

    /// Coordinate `j`, 1-based to match node classes.
    pub fn coord(&self, j: usize) -> usize {
        self.coords[j - 1]
    }

    /// This row with coordinate `j` (1-based) replaced by `x_j - delta`.
    pub fn shifted(&self, j: usize, delta: usize, ring: IndexRing) -> RowIndex {
        let mut coords = self.coords.clone();
        coords[j - 1] = ring.sub(coords[j - 1], delta);
        RowIndex { coords }
    }
}

impl fmt::Debug for RowIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (j, c) in self.coords.iter().enumerate() {
            if j > 0 {
                write!(f, ",")?;
            }
            write!(f, "{c}")?;
        }
        write!(f, ")")
    }
}

/// A node `(i, theta)`: class `i` in `1..=t`, position `theta` in `[0, q)`.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct NodeIndex {
    pub class: usize,
    pub theta: usize,
}

impl NodeIndex {
    pub fn new(class: usize, theta: usize, p: &CodeParams) -> Result<Self> {
        if !(1..=p.t).contains(&class) || theta >= p.q {
            return Err(Error::IndexOutOfRange(format!(
                "node ({class},{theta}) for q={}, t={}",
                p.q, p.t
            )));
        }
        Ok(NodeIndex { class, theta })
    }
}

impl fmt::Debug for NodeIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{})", self.class, self.theta)
    }
}

impl fmt::Display for NodeIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{})", self.class, self.theta)
    }
}
