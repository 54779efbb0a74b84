//! Systematic encoding, erasure decoding and single-node repair.
//!
//! Node layout: ids `0..k` hold the message, ids `k..n` the parities, and ids
//! `n..q·t` are the virtual nodes of a shortened code (always zero).

mod plan;
mod repair;

use std::sync::{Arc, OnceLock};

pub use self::repair::{HelperPayload, RepairPlan, RepairTrace};

use self::plan::{PlanBuilder, RecoveryPlan};
use crate::cube::{h_entry, Codeword, NodeId, NodeSet, PlaneGroup, PlaneIndex};
use crate::error::{Error, Result};
use crate::gf2m::{Field, Gf};
use crate::params::{CodeParams, ThetaTable};
use crate::solver::GfMatrix;

/// A codeword with some nodes missing.
#[derive(Debug, Clone)]
pub struct ErasureState {
    codeword: Codeword,
    erased: Vec<NodeId>,
}

impl ErasureState {
    /// Marks `erased` as unavailable. Their stored symbols are zeroed so no
    /// decoder can read them by accident.
    pub fn new(mut codeword: Codeword, erased: impl IntoIterator<Item = NodeId>) -> Self {
        let mut erased: Vec<NodeId> = erased.into_iter().collect();
        erased.sort_by_key(|n| n.id(codeword.params().q));
        erased.dedup();
        codeword.erase(erased.iter().copied());
        ErasureState { codeword, erased }
    }

    pub fn erased(&self) -> &[NodeId] {
        &self.erased
    }

    pub fn codeword(&self) -> &Codeword {
        &self.codeword
    }

    pub fn is_known(&self, node: NodeId) -> bool {
        !self.erased.contains(&node)
    }
}

/// The code for one `(n, k, d)` triple: parameters, field and θ table.
#[derive(Debug, Clone)]
pub struct MsrCode {
    params: CodeParams,
    table: ThetaTable,
    encoder: OnceLock<Arc<DecodePlan>>,
}

impl MsrCode {
    pub fn new(n: usize, k: usize, d: usize) -> Result<Self> {
        let params = CodeParams::derive(n, k, d)?;
        let field = Arc::new(Field::new(params.m)?);
        let table = ThetaTable::assign(&params, field)?;
        Ok(Self::from_parts(params, table))
    }

    /// Pairs parameters with an arbitrary θ table, e.g. a deliberately broken one.
    pub fn with_table(params: CodeParams, table: ThetaTable) -> Result<Self> {
        if table.q() != params.q || table.t() != params.t || table.field().degree() != params.m {
            return Err(Error::DimensionMismatch(
                "θ table does not match the code parameters".into(),
            ));
        }
        Ok(Self::from_parts(params, table))
    }

    fn from_parts(params: CodeParams, table: ThetaTable) -> Self {
        MsrCode {
            params,
            table,
            encoder: OnceLock::new(),
        }
    }

    pub fn params(&self) -> &CodeParams {
        &self.params
    }

    pub fn thetas(&self) -> &ThetaTable {
        &self.table
    }

    pub fn field(&self) -> &Field {
        self.table.field()
    }

    pub fn node(&self, id: usize) -> NodeId {
        NodeId::from_id(id, self.params.q)
    }

    pub fn real_nodes(&self) -> impl Iterator<Item = NodeId> + '_ {
        (0..self.params.n).map(|id| self.node(id))
    }

    pub fn systematic_nodes(&self) -> impl Iterator<Item = NodeId> + '_ {
        (0..self.params.k).map(|id| self.node(id))
    }

    pub fn parity_nodes(&self) -> impl Iterator<Item = NodeId> + '_ {
        (self.params.k..self.params.n).map(|id| self.node(id))
    }

    pub fn virtual_nodes(&self) -> impl Iterator<Item = NodeId> + '_ {
        (self.params.n..self.params.n_base).map(|id| self.node(id))
    }

    pub fn is_real(&self, node: NodeId) -> bool {
        node.x < self.params.q && node.y < self.params.t && node.id(self.params.q) < self.params.n
    }

    fn check_real(&self, nodes: &[NodeId]) -> Result<()> {
        match nodes.iter().find(|&&n| !self.is_real(n)) {
            Some(n) => Err(Error::InvalidParameters(format!(
                "node {n} (id {}) is not one of the {} stored nodes",
                n.id(self.params.q),
                self.params.n
            ))),
            None => Ok(()),
        }
    }

    /// Places `k·α` message symbols on the systematic nodes and fills the parities.
    pub fn encode(&self, message: &[Gf]) -> Result<Codeword> {
        let p = &self.params;
        if message.len() != p.message_len() {
            return Err(Error::DimensionMismatch(format!(
                "message must hold k·α = {} symbols, got {}",
                p.message_len(),
                message.len()
            )));
        }
        let mut cw = Codeword::zeros(*p);
        for (i, chunk) in message.chunks(p.alpha).enumerate() {
            cw.node_mut(self.node(i)).copy_from_slice(chunk);
        }
        let plan = match self.encoder.get() {
            Some(plan) => plan.clone(),
            None => {
                let parities: Vec<NodeId> = self.parity_nodes().collect();
                let plan = Arc::new(self.decode_plan(&parities)?);
                self.encoder.get_or_init(|| plan).clone()
            }
        };
        plan.apply(&mut cw);
        Ok(cw)
    }

    /// The message symbols held by the systematic nodes.
    pub fn message(&self, cw: &Codeword) -> Vec<Gf> {
        self.systematic_nodes()
            .flat_map(|n| cw.node(n).iter().copied())
            .collect()
    }

    /// Recovers every erased node by solving plane groups in order of
    /// increasing intersection score.
    pub fn decode(&self, state: &ErasureState) -> Result<Codeword> {
        let mut cw = state.codeword().clone();
        if state.erased().is_empty() {
            return Ok(cw);
        }
        self.decode_plan(state.erased())?.apply(&mut cw);
        Ok(cw)
    }

    /// Builds the solve sequence for an erasure pattern; reusable across stripes.
    pub fn decode_plan(&self, erased: &[NodeId]) -> Result<DecodePlan> {
        let p = &self.params;
        self.check_real(erased)?;
        let mut set = NodeSet::from_nodes(p.q, p.t, erased.iter().copied());
        let count = set.len();
        if count > p.r {
            return Err(Error::Unrecoverable {
                erased: count,
                max: p.r,
            });
        }
        // Square systems need exactly r unknown nodes: treat some available
        // nodes as unknown too, virtual ones first, then the highest ids.
        let mut padded = count;
        for id in (0..p.n_base).rev() {
            if padded == p.r {
                break;
            }
            if set.insert(self.node(id)) {
                padded += 1;
            }
        }
        let solving: Vec<NodeId> = set.iter().collect();

        let mut known = vec![true; p.n_base * p.alpha];
        for node in &solving {
            let start = node.id(p.q) * p.alpha;
            known[start..start + p.alpha].fill(false);
        }
        let builder = PlanBuilder::new(p, &self.table, known);
        let cells = |group: &PlaneGroup| {
            group
                .planes
                .iter()
                .flat_map(|&a| solving.iter().map(move |&e| (e, a)))
                .map(|(e, a)| e.id(p.q) * p.alpha + a.0)
                .collect()
        };
        let scope: Vec<PlaneIndex> = (0..p.alpha).map(PlaneIndex).collect();
        let (plan, known) = builder.build(&set, &scope, cells)?;
        if known.iter().any(|&k| !k) {
            return Err(Error::Internal(
                "decode plan leaves cells unrecovered".into(),
            ));
        }
        let mut erased: Vec<NodeId> = erased.to_vec();
        erased.sort_by_key(|n| n.id(p.q));
        erased.dedup();
        Ok(DecodePlan {
            table: self.table.clone(),
            erased,
            solving,
            plan,
        })
    }

    /// Reference decoder: one global system built from the materialized
    /// parity-check matrix, with no sequential structure.
    pub fn decode_naive(&self, state: &ErasureState) -> Result<Codeword> {
        let p = &self.params;
        let f = self.field();
        let erased = state.erased();
        self.check_real(erased)?;
        if erased.len() > p.r {
            return Err(Error::Unrecoverable {
                erased: erased.len(),
                max: p.r,
            });
        }
        let mut cw = state.codeword().clone();
        if erased.is_empty() {
            return Ok(cw);
        }
        let unknown: Vec<(NodeId, PlaneIndex)> = erased
            .iter()
            .flat_map(|&e| (0..p.alpha).map(move |z| (e, PlaneIndex(z))))
            .collect();
        let known_nodes: Vec<NodeId> = (0..p.n_base)
            .map(|id| self.node(id))
            .filter(|n| !erased.contains(n))
            .collect();

        let rows = p.r * p.alpha;
        let mut a = GfMatrix::zeros(rows, unknown.len());
        let mut b = vec![Gf::ZERO; rows];
        for plane in 0..p.alpha {
            for j in 0..p.r {
                let row = plane * p.r + j;
                let ap = PlaneIndex(plane);
                for (c, &(node, z)) in unknown.iter().enumerate() {
                    a[(row, c)] = h_entry(&self.table, j, ap, node.x, node.y, z);
                }
                for &node in &known_nodes {
                    for z in 0..p.alpha {
                        let h = h_entry(&self.table, j, ap, node.x, node.y, PlaneIndex(z));
                        if !h.is_zero() {
                            b[row] += f.mul(h, cw.get(node, PlaneIndex(z)));
                        }
                    }
                }
            }
        }
        let x = a.solve_full_rank(f, &b).map_err(|e| match e {
            Error::SingularMatrix { column } => Error::Internal(format!(
                "erased columns of H are rank deficient at column {column}"
            )),
            other => other,
        })?;
        for (&(node, z), v) in unknown.iter().zip(x) {
            cw.set(node, z, v);
        }
        Ok(cw)
    }

    /// Plans the repair of `failed` from exactly `d` helpers.
    pub fn repair_plan(&self, failed: NodeId, helpers: &[NodeId]) -> Result<RepairPlan> {
        RepairPlan::new(self, failed, helpers)
    }

    /// Repairs `failed` reading only the helper symbols the repair needs from `codeword`.
    pub fn repair(
        &self,
        codeword: &Codeword,
        failed: NodeId,
        helpers: &[NodeId],
    ) -> Result<(Vec<Gf>, RepairTrace)> {
        self.repair_plan(failed, helpers)?
            .run(|node, plane| Ok::<_, Error>(codeword.get(node, plane)))
    }
}

/// A reusable decode for one erasure pattern.
#[derive(Debug, Clone)]
pub struct DecodePlan {
    table: ThetaTable,
    erased: Vec<NodeId>,
    solving: Vec<NodeId>,
    plan: RecoveryPlan,
}

impl DecodePlan {
    pub fn erased(&self) -> &[NodeId] {
        &self.erased
    }

    /// Nodes recomputed by the plan: the erased ones plus padding up to `r`.
    pub fn solving(&self) -> &[NodeId] {
        &self.solving
    }

    pub fn steps(&self) -> usize {
        self.plan.steps.len()
    }

    /// Largest joint system, `r·|Z|` for the biggest plane group.
    pub fn max_system(&self) -> usize {
        self.plan.max_system()
    }

    /// Number of groups solved at each intersection score.
    pub fn groups_per_level(&self) -> Vec<usize> {
        let top = self.plan.steps.iter().map(|s| s.level).max().unwrap_or(0);
        let mut out = vec![0; top + 1];
        for s in &self.plan.steps {
            out[s.level] += 1;
        }
        out
    }

    /// Group leaders in processing order, with their score and size.
    pub fn schedule(&self) -> Vec<(usize, PlaneIndex, usize)> {
        self.plan
            .steps
            .iter()
            .map(|s| (s.level, s.leader, s.planes))
            .collect()
    }

    /// Overwrites the erased nodes of `cw` with recovered values.
    pub fn apply(&self, cw: &mut Codeword) {
        self.plan.apply(&self.table, cw);
    }
}
