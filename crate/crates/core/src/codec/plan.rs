//! Sequential recovery plans.
//!
//! A plan is the ordered list of linear solves that recovers a set of unknown
//! cells. Planes are visited by increasing intersection score with a grouping
//! node set; planes of one [`PlaneGroup`] share a square system whose
//! right-hand side only references cells that are stored or were recovered
//! at a lower score. Each step keeps a dense transfer matrix from the known
//! cells it reads to the unknown cells it writes, so applying a plan to many
//! stripes costs one matrix-vector product per step.

use std::collections::HashMap;
use std::sync::Arc;

use crate::cube::{
    intersection_score, parity_terms, plane_group, Codeword, NodeId, NodeSet, PlaneGroup,
    PlaneIndex,
};
use crate::error::{Error, Result};
use crate::gf2m::Gf;
use crate::params::{CodeParams, ThetaTable};
use crate::solver::GfMatrix;

#[derive(Debug, Clone)]
pub(crate) struct Step {
    pub level: usize,
    pub leader: PlaneIndex,
    pub planes: usize,
    unknowns: Vec<usize>,
    knowns: Vec<usize>,
    /// `unknowns × knowns`
    transfer: GfMatrix,
}

#[derive(Debug, Clone)]
pub(crate) struct RecoveryPlan {
    pub steps: Vec<Step>,
}

impl RecoveryPlan {
    pub fn apply(&self, table: &ThetaTable, cw: &mut Codeword) {
        let f = table.field();
        let mut values = Vec::new();
        for step in &self.steps {
            values.clear();
            values.extend(step.knowns.iter().map(|&c| cw.get_cell(c)));
            for (i, &cell) in step.unknowns.iter().enumerate() {
                let v = step
                    .transfer
                    .row(i)
                    .iter()
                    .zip(&values)
                    .fold(Gf::ZERO, |acc, (&a, &b)| acc + f.mul(a, b));
                cw.set_cell(cell, v);
            }
        }
    }

    /// Largest square system solved by any step.
    pub fn max_system(&self) -> usize {
        self.steps
            .iter()
            .map(|s| s.unknowns.len())
            .max()
            .unwrap_or(0)
    }
}

pub(crate) struct PlanBuilder<'a> {
    params: &'a CodeParams,
    table: &'a ThetaTable,
    known: Vec<bool>,
    inverses: HashMap<GfMatrix, Arc<GfMatrix>>,
}

impl<'a> PlanBuilder<'a> {
    pub fn new(params: &'a CodeParams, table: &'a ThetaTable, known: Vec<bool>) -> Self {
        debug_assert_eq!(known.len(), params.n_base * params.alpha);
        PlanBuilder {
            params,
            table,
            known,
            inverses: HashMap::new(),
        }
    }

    pub fn cell(&self, node: NodeId, plane: PlaneIndex) -> usize {
        node.id(self.params.q) * self.params.alpha + plane.0
    }

    /// Plans the recovery over `scope`, grouping by `grouping`. `unknowns`
    /// lists the cells a plane group solves for.
    pub fn build(
        mut self,
        grouping: &NodeSet,
        scope: &[PlaneIndex],
        unknowns: impl Fn(&PlaneGroup) -> Vec<usize>,
    ) -> Result<(RecoveryPlan, Vec<bool>)> {
        let (q, t) = (self.params.q, self.params.t);
        let mut in_scope = vec![false; self.params.alpha];
        for z in scope {
            in_scope[z.0] = true;
        }
        let mut done = vec![false; self.params.alpha];
        let mut by_level: Vec<Vec<PlaneIndex>> = vec![Vec::new(); t + 1];
        let mut sorted = scope.to_vec();
        sorted.sort_unstable();
        for z in sorted {
            by_level[intersection_score(grouping, z, t)].push(z);
        }

        let mut steps = Vec::new();
        for (level, planes) in by_level.iter().enumerate() {
            for &z in planes {
                if done[z.0] {
                    continue;
                }
                let group = plane_group(grouping, z, q, t);
                for p in &group.planes {
                    if !in_scope[p.0] || done[p.0] {
                        return Err(Error::Internal(format!(
                            "plane group led by {} leaves the plane scope",
                            group.leader().0
                        )));
                    }
                    done[p.0] = true;
                }
                let cells = unknowns(&group);
                steps.push(self.step(level, &group, cells)?);
            }
        }
        Ok((RecoveryPlan { steps }, self.known))
    }

    fn step(&mut self, level: usize, group: &PlaneGroup, unknowns: Vec<usize>) -> Result<Step> {
        let f = self.table.field();
        let r = self.params.r;
        let rows = r * group.len();
        if rows != unknowns.len() {
            return Err(Error::Internal(format!(
                "group led by plane {} has {} equations for {} unknowns",
                group.leader().0,
                rows,
                unknowns.len()
            )));
        }
        let col_of: HashMap<usize, usize> =
            unknowns.iter().enumerate().map(|(i, &c)| (c, i)).collect();
        let mut known_col: HashMap<usize, usize> = HashMap::new();
        let mut knowns = Vec::new();
        let mut system = GfMatrix::zeros(rows, unknowns.len());
        // rhs coefficients, grown column by column as known cells appear
        let mut rhs_entries: Vec<Vec<(usize, Gf)>> = vec![Vec::new(); rows];

        for (pi, &a) in group.planes.iter().enumerate() {
            for term in parity_terms(self.table, a) {
                let cell = self.cell(term.node, term.plane);
                let mut coeff = term.scale;
                for j in 0..r {
                    let row = pi * r + j;
                    if let Some(&c) = col_of.get(&cell) {
                        system[(row, c)] += coeff;
                    } else if self.known[cell] {
                        let next = knowns.len();
                        let k = *known_col.entry(cell).or_insert(next);
                        if k == next {
                            knowns.push(cell);
                        }
                        rhs_entries[row].push((k, coeff));
                    } else {
                        return Err(Error::Internal(format!(
                            "plane {} references A{};{} before it is recovered",
                            a.0, term.node, term.plane.0
                        )));
                    }
                    coeff = f.mul(coeff, term.base);
                }
            }
        }

        let inverse = match self.inverses.get(&system) {
            Some(inv) => inv.clone(),
            None => {
                let inv = Arc::new(system.inverse(f).map_err(|e| {
                    Error::Internal(format!(
                        "group system at score {level} led by plane {} is not invertible ({e})",
                        group.leader().0
                    ))
                })?);
                self.inverses.insert(system, inv.clone());
                inv
            }
        };

        let mut rhs = GfMatrix::zeros(rows, knowns.len());
        for (row, entries) in rhs_entries.into_iter().enumerate() {
            for (k, coeff) in entries {
                rhs[(row, k)] += coeff;
            }
        }
        // sum of all terms is zero, so unknown part = known part in characteristic two
        let transfer = inverse.mul(f, &rhs)?;

        for &cell in &unknowns {
            self.known[cell] = true;
        }
        Ok(Step {
            level,
            leader: group.leader(),
            planes: group.len(),
            unknowns,
            knowns,
            transfer,
        })
    }
}
