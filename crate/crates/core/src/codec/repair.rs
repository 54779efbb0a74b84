//! Optimal-access repair of a single node.
//!
//! To rebuild node `(x0, y0)`, every helper sends its symbols on the planes
//! `R = {z : z_{y0} = x0}`: exactly `β = q^(t-1)` stored symbols, no helper-side
//! arithmetic. Nodes that are neither helpers nor the failed node are aloof;
//! their symbols on `R` are solved for alongside the failed node's, planes
//! ordered by intersection score with the aloof set.

use crate::cube::{Codeword, NodeId, NodeSet, PlaneGroup, PlaneIndex};
use crate::error::{Error, Result};
use crate::gf2m::Gf;

use super::plan::{PlanBuilder, RecoveryPlan};
use super::MsrCode;

/// The symbols one helper transmitted, verbatim, with the plane each came from.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HelperPayload {
    pub helper: NodeId,
    pub symbols: Vec<(PlaneIndex, Gf)>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RepairTrace {
    pub failed: NodeId,
    pub helpers: Vec<NodeId>,
    pub aloof: Vec<NodeId>,
    pub payload: Vec<HelperPayload>,
}

impl RepairTrace {
    /// Total symbols downloaded, `d·β` for a well-formed repair.
    pub fn downloaded(&self) -> usize {
        self.payload.iter().map(|p| p.symbols.len()).sum()
    }
}

#[derive(Debug, Clone)]
pub struct RepairPlan {
    code: MsrCode,
    failed: NodeId,
    helpers: Vec<NodeId>,
    aloof: Vec<NodeId>,
    planes: Vec<PlaneIndex>,
    plan: RecoveryPlan,
}

impl RepairPlan {
    pub(super) fn new(code: &MsrCode, failed: NodeId, helpers: &[NodeId]) -> Result<Self> {
        let p = *code.params();
        if !code.is_real(failed) {
            return Err(Error::InvalidHelpers(format!(
                "failed node {failed} is not a stored node"
            )));
        }
        let mut helpers = helpers.to_vec();
        helpers.sort_by_key(|n| n.id(p.q));
        helpers.dedup();
        if helpers.len() != p.d {
            return Err(Error::InvalidHelpers(format!(
                "repair needs d = {} distinct helpers, got {}",
                p.d,
                helpers.len()
            )));
        }
        if let Some(v) = helpers.iter().find(|&&h| !code.is_real(h)) {
            return Err(Error::InvalidHelpers(format!(
                "helper {v} is not a stored node"
            )));
        }
        if helpers.contains(&failed) {
            return Err(Error::InvalidHelpers(format!(
                "failed node {failed} listed as a helper"
            )));
        }

        let aloof: Vec<NodeId> = code
            .real_nodes()
            .filter(|n| *n != failed && !helpers.contains(n))
            .collect();
        debug_assert_eq!(aloof.len(), p.r - p.q);
        let aloof_set = NodeSet::from_nodes(p.q, p.t, aloof.iter().copied());

        let planes: Vec<PlaneIndex> = (0..p.alpha)
            .map(PlaneIndex)
            .filter(|z| z.digit(failed.y, p.q) == failed.x)
            .collect();
        debug_assert_eq!(planes.len(), p.beta);

        // known up front: helper symbols on R and every virtual symbol
        let mut known = vec![false; p.n_base * p.alpha];
        for h in &helpers {
            for z in &planes {
                known[h.id(p.q) * p.alpha + z.0] = true;
            }
        }
        for v in code.virtual_nodes() {
            let start = v.id(p.q) * p.alpha;
            known[start..start + p.alpha].fill(true);
        }

        let builder = PlanBuilder::new(&p, code.thetas(), known);
        let cells = |group: &PlaneGroup| {
            let mut out = Vec::with_capacity(p.r * group.len());
            for &a in &group.planes {
                for x in 0..p.q {
                    out.push(failed.id(p.q) * p.alpha + a.substitute(failed.y, x, p.q).0);
                }
                for e in &aloof {
                    out.push(e.id(p.q) * p.alpha + a.0);
                }
            }
            out
        };
        let (plan, known) = builder.build(&aloof_set, &planes, cells)?;
        let start = failed.id(p.q) * p.alpha;
        if known[start..start + p.alpha].iter().any(|&k| !k) {
            return Err(Error::Internal(format!(
                "repair of {failed} leaves symbols unrecovered"
            )));
        }
        Ok(RepairPlan {
            code: code.clone(),
            failed,
            helpers,
            aloof,
            planes,
            plan,
        })
    }

    pub fn failed(&self) -> NodeId {
        self.failed
    }

    pub fn helpers(&self) -> &[NodeId] {
        &self.helpers
    }

    pub fn aloof(&self) -> &[NodeId] {
        &self.aloof
    }

    /// The planes every helper reads, in increasing ordinal order.
    pub fn planes(&self) -> &[PlaneIndex] {
        &self.planes
    }

    pub fn steps(&self) -> usize {
        self.plan.steps.len()
    }

    pub fn max_system(&self) -> usize {
        self.plan.max_system()
    }

    /// Runs the repair. `read` is called exactly once for each helper and each
    /// plane of [`Self::planes`], and for nothing else.
    pub fn run<E: From<Error>>(
        &self,
        mut read: impl FnMut(NodeId, PlaneIndex) -> Result<Gf, E>,
    ) -> Result<(Vec<Gf>, RepairTrace), E> {
        let p = self.code.params();
        let mut scratch = Codeword::zeros(*p);
        let mut payload = Vec::with_capacity(self.helpers.len());
        for &helper in &self.helpers {
            let mut symbols = Vec::with_capacity(self.planes.len());
            for &z in &self.planes {
                let v = read(helper, z)?;
                scratch.set(helper, z, v);
                symbols.push((z, v));
            }
            payload.push(HelperPayload { helper, symbols });
        }
        self.plan.apply(self.code.thetas(), &mut scratch);
        let repaired = scratch.node(self.failed).to_vec();
        Ok((
            repaired,
            RepairTrace {
                failed: self.failed,
                helpers: self.helpers.clone(),
                aloof: self.aloof.clone(),
                payload,
            },
        ))
    }
}
