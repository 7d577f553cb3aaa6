//! Help-by-transfer repair of a single node from all `n - 1` survivors.
//!
//! To rebuild node `(i0, theta0)` every helper sends its symbols on the
//! helper rows `Gamma = { x : x_{i0} = theta0 }`, `beta = q^(t-1)` symbols,
//! copied verbatim. Repair then runs in two phases:
//!
//! 1. For each `x` in `Gamma` the row-parity anchored at `x` has a single
//!    unknown, the failed node's symbol at `x`.
//! 2. For each `x` in `Gamma` and each `delta` in `1..q`, the delta-parity
//!    anchored at `x` has a single unknown: the failed node's symbol at `x`
//!    with coordinate `i0` replaced by `theta0 - delta`. Every other term sits
//!    on a row of `Gamma` and is either a helper symbol or a phase-1 output.
//!
//! The shifts of phase 2 reach each of the `alpha - beta` rows outside
//! `Gamma` exactly once. [`RepairPlan`] compiles both phases once per failed
//! node and checks these facts while doing so.

use std::collections::BTreeSet;

use crate::error::{Error, Result};
use crate::field::FieldElem;
use crate::model::{CodeParams, NodeIndex, RowIndex};
use crate::parity::ParityCheckSystem;

/// What a helper sends: its stored symbols on the helper rows of `failed`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HelperPacket {
    pub helper: NodeIndex,
    pub failed: NodeIndex,
    /// `(row, symbol)` in ascending row-ordinal order.
    pub entries: Vec<(RowIndex, FieldElem)>,
}

impl HelperPacket {
    pub fn symbols(&self) -> impl Iterator<Item = FieldElem> + '_ {
        self.entries.iter().map(|(_, v)| *v)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RepairResult {
    pub node: NodeIndex,
    /// The rebuilt node content, row-ordinal order.
    pub symbols: Vec<FieldElem>,
    /// Symbols received from helpers.
    pub downloaded_total: usize,
}

/// Copies the helper-row symbols out of one helper's stored content.
pub fn helper_extract(
    content: &[FieldElem],
    helper: NodeIndex,
    failed: NodeIndex,
    p: &CodeParams,
) -> Result<HelperPacket> {
    if helper == failed {
        return Err(Error::HelperIsFailed(helper));
    }
    NodeIndex::new(helper.class, helper.theta, p)?;
    NodeIndex::new(failed.class, failed.theta, p)?;
    if content.len() != p.alpha {
        return Err(Error::Length {
            expected: p.alpha,
            got: content.len(),
        });
    }
    let entries = p
        .gamma_ordinals(failed)
        .into_iter()
        .map(|o| (p.ordinal_to_row(o).expect("in range"), content[o]))
        .collect();
    Ok(HelperPacket {
        helper,
        failed,
        entries,
    })
}

/// Where a known symbol comes from during repair.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Source {
    /// Position `pos` (in Gamma order) of the packet from helper `slot`.
    Helper { slot: usize, pos: usize },
    /// A symbol of the failed node already rebuilt, by row ordinal.
    Rebuilt(usize),
}

#[derive(Clone, Debug)]
struct Step {
    target: usize,
    /// Inverse of the unknown's coefficient.
    scale: FieldElem,
    sources: Vec<(Source, FieldElem)>,
}

/// Solve order for one failed node, independent of the data.
#[derive(Clone, Debug)]
pub struct RepairPlan {
    failed: NodeIndex,
    /// Helper nodes in node-ordinal order; packet `slot` refers to this.
    helpers: Vec<NodeIndex>,
    gamma: Vec<usize>,
    steps: Vec<Step>,
    phase_one_len: usize,
}

impl RepairPlan {
    pub fn new(sys: &ParityCheckSystem, failed: NodeIndex) -> Result<Self> {
        let p = sys.params();
        NodeIndex::new(failed.class, failed.theta, p)?;
        let c0 = p.c0()?;
        let f = &p.field;
        let helpers: Vec<NodeIndex> = p.nodes().filter(|&nd| nd != failed).collect();
        let gamma = p.gamma_ordinals(failed);
        let mut gamma_pos = vec![usize::MAX; p.alpha];
        for (i, &o) in gamma.iter().enumerate() {
            gamma_pos[o] = i;
        }
        let mut rebuilt = vec![false; p.alpha];

        let compile = |delta: usize, anchor: usize, rebuilt: &mut Vec<bool>| -> Step {
            let con = sys.constraint(delta, anchor);
            let mut unknown = None;
            let mut sources = Vec::with_capacity(con.terms.len());
            for term in &con.terms {
                let row = p.row_to_ordinal(&term.row);
                if term.node == failed {
                    if rebuilt[row] {
                        sources.push((Source::Rebuilt(row), term.coeff));
                    } else {
                        assert!(
                            unknown.is_none(),
                            "two unknowns in constraint ({delta}, {anchor})"
                        );
                        unknown = Some((row, term.coeff));
                    }
                } else {
                    let pos = gamma_pos[row];
                    assert!(
                        pos != usize::MAX,
                        "constraint ({delta}, {anchor}) references helper row {row} outside Gamma"
                    );
                    let slot = helpers
                        .iter()
                        .position(|&h| h == term.node)
                        .expect("helper");
                    sources.push((Source::Helper { slot, pos }, term.coeff));
                }
            }
            let (target, coeff) = unknown.expect("constraint has an unknown");
            rebuilt[target] = true;
            Step {
                target,
                scale: f.inv(coeff).expect("coefficients are nonzero"),
                sources,
            }
        };

        let mut steps = Vec::with_capacity(p.alpha);
        for &x in &gamma {
            let step = compile(0, x, &mut rebuilt);
            debug_assert_eq!(step.target, x);
            steps.push(step);
        }
        let phase_one_len = steps.len();
        for delta in 1..p.q {
            for &x in &gamma {
                let step = compile(delta, x, &mut rebuilt);
                debug_assert_eq!(
                    sys.constraint(delta, x)
                        .terms
                        .iter()
                        .find(|t| t.node == failed && p.row_to_ordinal(&t.row) == step.target)
                        .map(|t| t.coeff),
                    Some(c0)
                );
                steps.push(step);
            }
        }
        let targets: BTreeSet<usize> = steps.iter().map(|s| s.target).collect();
        assert_eq!(
            targets.len(),
            p.alpha,
            "repair must write every row exactly once"
        );
        assert_eq!(steps.len(), p.alpha);

        Ok(RepairPlan {
            failed,
            helpers,
            gamma,
            steps,
            phase_one_len,
        })
    }

    pub fn failed(&self) -> NodeIndex {
        self.failed
    }

    /// Helpers in the order [`execute`](Self::execute) expects their symbols.
    pub fn helpers(&self) -> &[NodeIndex] {
        &self.helpers
    }

    /// Row ordinals each helper must send, ascending.
    pub fn gamma(&self) -> &[usize] {
        &self.gamma
    }

    /// Row ordinals written by phase 1 followed by phase 2, in solve order.
    pub fn targets(&self) -> impl Iterator<Item = usize> + '_ {
        self.steps.iter().map(|s| s.target)
    }

    pub fn phase_one_len(&self) -> usize {
        self.phase_one_len
    }

    /// Runs the plan. `helper_symbols[slot]` is the Gamma-ordered symbol list
    /// from `helpers()[slot]`.
    pub fn execute(
        &self,
        p: &CodeParams,
        helper_symbols: &[&[FieldElem]],
    ) -> Result<Vec<FieldElem>> {
        if helper_symbols.len() != self.helpers.len() {
            return Err(Error::NodeCount {
                expected: self.helpers.len(),
                got: helper_symbols.len(),
            });
        }
        for s in helper_symbols {
            if s.len() != self.gamma.len() {
                return Err(Error::Length {
                    expected: self.gamma.len(),
                    got: s.len(),
                });
            }
        }
        let f = &p.field;
        let mut out = vec![FieldElem::ZERO; p.alpha];
        for step in &self.steps {
            let sum = step
                .sources
                .iter()
                .fold(FieldElem::ZERO, |acc, &(src, coeff)| {
                    let v = match src {
                        Source::Helper { slot, pos } => helper_symbols[slot][pos],
                        Source::Rebuilt(row) => out[row],
                    };
                    f.add(acc, f.mul(coeff, v))
                });
            out[step.target] = f.mul(sum, step.scale);
        }
        Ok(out)
    }
}

/// Rebuilds `failed` from one packet per surviving node.
pub fn repair_node(
    failed: NodeIndex,
    packets: &[HelperPacket],
    sys: &ParityCheckSystem,
) -> Result<RepairResult> {
    let p = sys.params();
    if packets.len() != p.d {
        return Err(Error::NodeCount {
            expected: p.d,
            got: packets.len(),
        });
    }
    let plan = RepairPlan::new(sys, failed)?;
    let gamma_rows: Vec<RowIndex> = plan
        .gamma()
        .iter()
        .map(|&o| p.ordinal_to_row(o).expect("in range"))
        .collect();
    let mut by_slot: Vec<Option<Vec<FieldElem>>> = vec![None; plan.helpers().len()];
    let mut downloaded_total = 0;
    for pkt in packets {
        if pkt.helper == failed {
            return Err(Error::HelperIsFailed(failed));
        }
        let slot = plan
            .helpers()
            .iter()
            .position(|&h| h == pkt.helper)
            .ok_or_else(|| Error::IndexOutOfRange(format!("helper {}", pkt.helper)))?;
        if by_slot[slot].is_some() {
            return Err(Error::DuplicateNode(pkt.helper));
        }
        let rows_match = pkt.failed == failed
            && pkt.entries.len() == gamma_rows.len()
            && pkt
                .entries
                .iter()
                .zip(&gamma_rows)
                .all(|((r, _), g)| r == g);
        if !rows_match {
            return Err(Error::PacketRows {
                helper: pkt.helper,
                failed,
            });
        }
        downloaded_total += pkt.entries.len();
        by_slot[slot] = Some(pkt.symbols().collect());
    }
    let symbols: Vec<&[FieldElem]> = by_slot
        .iter()
        .map(|s| s.as_deref().expect("every helper present"))
        .collect();
    let symbols = plan.execute(p, &symbols)?;
    Ok(RepairResult {
        node: failed,
        symbols,
        downloaded_total,
    })
}

/// Repair traffic for one node, compared with downloading the whole file.
#[derive(Clone, Debug, PartialEq)]
pub struct BandwidthReport {
    /// Symbols per helper, `beta`.
    pub per_helper: usize,
    /// `d * beta`.
    pub total: usize,
    /// `B = k * alpha`, the cost of a naive decode-and-re-encode repair.
    pub naive: usize,
    pub ratio: f64,
}

pub fn bandwidth_report(p: &CodeParams) -> BandwidthReport {
    let total = p.repair_bandwidth();
    BandwidthReport {
        per_helper: p.beta,
        total,
        naive: p.file_size,
        ratio: total as f64 / p.file_size as f64,
    }
}
