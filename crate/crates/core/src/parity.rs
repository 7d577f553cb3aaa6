//! The parity-check system `H = J0 + c0 * E` and the search for `c0`.
//!
//! For every row `x` there is one row-parity (`delta = 0`) over the `n`
//! symbols of row `x`, and for every `delta` in `1..q` one delta-parity that
//! adds `t` shifted entries: for each class `j`, the symbol of node
//! `(j, x_j)` at the row obtained from `x` by replacing `x_j` with
//! `x_j - delta`.
//!
//! In-row coefficients come from a Vandermonde matrix `hmds` (`q x n`, the
//! parity-check matrix of an MDS code of length `n` and redundancy `q`):
//! constraint `(delta, x)` uses row `delta` of `hmds`. Every shifted entry
//! carries the same scalar `c0`. Flattened, the in-row part is exactly
//! `hmds ⊗ I_alpha` and the shifted part is `c0` times a 0/1 matrix `E`.
//!
//! `c0 = 0` always gives a matrix whose every `q`-node restriction is
//! invertible, but it is not a valid code coefficient: the shifted entries
//! are what makes single-node repair possible. [`find_c0`] scans nonzero
//! candidates in ascending order and keeps the first one for which every
//! `q`-node restriction stays full rank.

use std::sync::OnceLock;

use itertools::Itertools;

use crate::error::{Error, Result};
use crate::field::FieldElem;
use crate::linalg::Matrix;
use crate::model::{CodeParams, NodeIndex, RowIndex};

/// Default cap on the number of thick-column subsets checked exhaustively.
pub const DEFAULT_SUBSET_CAP: u128 = 1_000_000;

/// One summand `coeff * C(row; node)` of a parity check.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Term {
    pub row: RowIndex,
    pub node: NodeIndex,
    pub coeff: FieldElem,
}

/// A single parity check. `delta == 0` is a row-parity.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Constraint {
    pub delta: usize,
    pub anchor_row: RowIndex,
    pub terms: Vec<Term>,
}

impl Constraint {
    pub fn is_row_parity(&self) -> bool {
        self.delta == 0
    }

    /// The shifted terms, i.e. those off the anchor row.
    pub fn shifted_terms(&self) -> impl Iterator<Item = &Term> {
        self.terms.iter().filter(move |t| t.row != self.anchor_row)
    }
}

/// The full set of `q^(t+1)` parity checks of one code instance.
#[derive(Debug)]
pub struct ParityCheckSystem {
    params: CodeParams,
    shift_coeff: FieldElem,
    hmds: Matrix,
    constraints: Vec<Constraint>,
    flat: OnceLock<Matrix>,
    pub(crate) encoder: OnceLock<Matrix>,
}

/// `q x n` Vandermonde matrix with `hmds[r][j] = a_j^r`, `a_j = g^(j+1)`.
pub fn build_hmds(p: &CodeParams) -> Result<Matrix> {
    let f = &p.field;
    if f.order() < p.n {
        return Err(Error::FieldTooSmall {
            m: f.degree(),
            available: f.order(),
            needed: p.n,
        });
    }
    let rows = (0..p.q)
        .map(|r| (0..p.n).map(|j| f.pow(f.exp(j + 1), r as u64)).collect())
        .collect();
    Ok(Matrix::from_rows(rows))
}

/// 0/1 support of the shifted entries, in flattened layout. Computed
/// directly from the index arithmetic, independent of [`build_system`].
pub fn shift_support(p: &CodeParams) -> Matrix {
    let mut e = Matrix::zeros(p.constraint_count(), p.n * p.alpha);
    for delta in 1..p.q {
        for row in 0..p.alpha {
            for j in 1..=p.t {
                let xj = p.row_coord(row, j);
                let shifted = (xj + p.q - delta) % p.q;
                let shifted_row = row - xj * p.row_stride(j) + shifted * p.row_stride(j);
                let node = (j - 1) * p.q + xj;
                e[(delta * p.alpha + row, node * p.alpha + shifted_row)] = FieldElem::ONE;
            }
        }
    }
    e
}

/// Assembles every constraint for shift coefficient `c`. `c = 0` drops the
/// shifted entries and is meant for rank experiments only; the returned
/// system carries `c` as its `c0` when it is nonzero.
pub fn build_system(p: &CodeParams, c: FieldElem) -> Result<ParityCheckSystem> {
    p.field.elem(c.value())?;
    let hmds = build_hmds(p)?;
    let ring = p.ring();
    let mut params = p.clone();
    if !c.is_zero() {
        params.set_c0(c)?;
    }
    let mut constraints = Vec::with_capacity(p.constraint_count());
    for delta in 0..p.q {
        for anchor_row in p.rows() {
            let mut terms = Vec::with_capacity(p.n + p.t);
            if delta != 0 && !c.is_zero() {
                for j in 1..=p.t {
                    let xj = anchor_row.coord(j);
                    terms.push(Term {
                        row: anchor_row.shifted(j, delta, ring),
                        node: NodeIndex {
                            class: j,
                            theta: xj,
                        },
                        coeff: c,
                    });
                }
            }
            for node in p.nodes() {
                terms.push(Term {
                    row: anchor_row.clone(),
                    node,
                    coeff: hmds[(delta, p.node_to_ordinal(node))],
                });
            }
            constraints.push(Constraint {
                delta,
                anchor_row,
                terms,
            });
        }
    }
    Ok(ParityCheckSystem {
        params,
        shift_coeff: c,
        hmds,
        constraints,
        flat: OnceLock::new(),
        encoder: OnceLock::new(),
    })
}

impl ParityCheckSystem {
    /// Builds the final system for parameters whose `c0` is already set.
    pub fn new(p: &CodeParams) -> Result<Self> {
        build_system(p, p.c0()?)
    }

    pub fn params(&self) -> &CodeParams {
        &self.params
    }

    pub fn hmds(&self) -> &Matrix {
        &self.hmds
    }

    /// The coefficient on shifted entries (zero for a rank-test system).
    pub fn shift_coeff(&self) -> FieldElem {
        self.shift_coeff
    }

    pub fn constraints(&self) -> &[Constraint] {
        &self.constraints
    }

    /// The constraint `(delta, anchor)` by row ordinal.
    pub fn constraint(&self, delta: usize, anchor_ordinal: usize) -> &Constraint {
        &self.constraints[delta * self.params.alpha + anchor_ordinal]
    }

    /// Flat column of symbol `(row, node)`: `node_ordinal * alpha + row_ordinal`.
    pub fn column_of(&self, row: &RowIndex, node: NodeIndex) -> usize {
        let p = &self.params;
        p.node_to_ordinal(node) * p.alpha + p.row_to_ordinal(row)
    }

    /// The dense `q^(t+1) x n*alpha` matrix, vectorised node by node.
    ///
    /// Panics if two terms of one constraint land on the same column; the
    /// construction guarantees they never do.
    pub fn flatten(&self) -> &Matrix {
        self.flat.get_or_init(|| {
            let p = &self.params;
            let mut h = Matrix::zeros(p.constraint_count(), p.n * p.alpha);
            for (r, con) in self.constraints.iter().enumerate() {
                for term in &con.terms {
                    let col = self.column_of(&term.row, term.node);
                    assert!(
                        h[(r, col)].is_zero(),
                        "terms of constraint {r} collide at column {col}"
                    );
                    h[(r, col)] = term.coeff;
                }
            }
            h
        })
    }

    /// Columns of the flattened matrix belonging to `nodes`, node-major.
    pub fn thick_submatrix(&self, nodes: &[NodeIndex]) -> Matrix {
        let p = &self.params;
        let cols: Vec<usize> = nodes
            .iter()
            .flat_map(|&nd| {
                let base = p.node_to_ordinal(nd) * p.alpha;
                base..base + p.alpha
            })
            .collect();
        self.flatten().select_columns(&cols)
    }

    /// Checks every `q`-node restriction for full rank. Returns the first
    /// failing subset (in lexicographic node-ordinal order), if any.
    pub fn first_rank_deficient_subset(&self, cap: u128) -> Result<Option<Vec<NodeIndex>>> {
        let p = &self.params;
        let total = binomial(p.n as u128, p.q as u128);
        if total > cap {
            return Err(Error::SubsetCapExceeded {
                subsets: total,
                cap,
            });
        }
        let full = p.constraint_count();
        let nodes: Vec<NodeIndex> = p.nodes().collect();
        for subset in nodes.into_iter().combinations(p.q) {
            if self.thick_submatrix(&subset).rank(&p.field) != full {
                return Ok(Some(subset));
            }
        }
        Ok(None)
    }

    /// True iff every `q`-node restriction is full rank.
    pub fn is_mds(&self) -> Result<bool> {
        Ok(self
            .first_rank_deficient_subset(DEFAULT_SUBSET_CAP)?
            .is_none())
    }
}

/// `C(n, k)` without overflow for the sizes used here.
pub fn binomial(n: u128, k: u128) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    (0..k).fold(1u128, |acc, i| acc * (n - i) / (i + 1))
}

/// Field size above which a valid `c0` is guaranteed to exist:
/// `C(n, k) * q^t * (q - 1) + 1`.
pub fn sufficient_field_size(p: &CodeParams) -> u128 {
    binomial(p.n as u128, p.k as u128) * p.alpha as u128 * (p.q as u128 - 1) + 1
}

/// Smallest nonzero `c` for which every `q`-node restriction of
/// `J0 + c * E` is full rank.
pub fn find_c0(p: &CodeParams) -> Result<FieldElem> {
    find_c0_with_cap(p, DEFAULT_SUBSET_CAP)
}

pub fn find_c0_with_cap(p: &CodeParams, cap: u128) -> Result<FieldElem> {
    let total = binomial(p.n as u128, p.q as u128);
    if total > cap {
        return Err(Error::SubsetCapExceeded {
            subsets: total,
            cap,
        });
    }
    for c in p.field.nonzero_elements() {
        let sys = build_system(p, c)?;
        if sys.first_rank_deficient_subset(cap)?.is_none() {
            return Ok(c);
        }
    }
    Err(Error::SearchExhausted {
        m: p.field.degree(),
        q: p.q,
        sufficient: sufficient_field_size(p),
    })
}
