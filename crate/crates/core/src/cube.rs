//! The `(q·t) × q^t` codeword cube and the parity-check structure over it.
//!
//! Node `(x, y)` has id `q·y + x`. Plane `z = (z_0, …, z_{t-1})` has ordinal
//! `Σ z_y q^y`, so `z_0` is the least significant digit.

use std::fmt;

use crate::error::{Error, Result};
use crate::gf2m::Gf;
use crate::params::{CodeParams, ThetaTable};
use crate::solver::GfMatrix;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct NodeId {
    pub x: usize,
    pub y: usize,
}

impl NodeId {
    pub fn new(x: usize, y: usize) -> Self {
        NodeId { x, y }
    }

    pub fn from_id(id: usize, q: usize) -> Self {
        NodeId {
            x: id % q,
            y: id / q,
        }
    }

    pub fn id(self, q: usize) -> usize {
        q * self.y + self.x
    }
}

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{})", self.x, self.y)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PlaneIndex(pub usize);

impl PlaneIndex {
    pub fn from_digits(digits: &[usize], q: usize) -> Self {
        PlaneIndex(digits.iter().rev().fold(0, |acc, &z| acc * q + z))
    }

    pub fn ordinal(self) -> usize {
        self.0
    }

    pub fn digits(self, q: usize, t: usize) -> Vec<usize> {
        let mut rest = self.0;
        (0..t)
            .map(|_| {
                let z = rest % q;
                rest /= q;
                z
            })
            .collect()
    }

    #[inline]
    pub fn digit(self, y: usize, q: usize) -> usize {
        (self.0 / q.pow(y as u32)) % q
    }

    /// `z(y, x)`: the plane with digit `y` replaced by `x`.
    #[inline]
    pub fn substitute(self, y: usize, x: usize, q: usize) -> Self {
        let place = q.pow(y as u32);
        let old = (self.0 / place) % q;
        PlaneIndex(self.0 - old * place + x * place)
    }
}

/// A set of nodes of the base code, stored as a membership mask.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NodeSet {
    q: usize,
    members: Vec<bool>,
}

impl NodeSet {
    pub fn empty(q: usize, t: usize) -> Self {
        NodeSet {
            q,
            members: vec![false; q * t],
        }
    }

    pub fn from_nodes(q: usize, t: usize, nodes: impl IntoIterator<Item = NodeId>) -> Self {
        let mut set = Self::empty(q, t);
        for node in nodes {
            set.insert(node);
        }
        set
    }

    pub fn insert(&mut self, node: NodeId) -> bool {
        let slot = &mut self.members[node.id(self.q)];
        !std::mem::replace(slot, true)
    }

    #[inline]
    pub fn contains(&self, x: usize, y: usize) -> bool {
        self.members[self.q * y + x]
    }

    pub fn contains_node(&self, node: NodeId) -> bool {
        self.contains(node.x, node.y)
    }

    pub fn len(&self) -> usize {
        self.members.iter().filter(|&&b| b).count()
    }

    pub fn is_empty(&self) -> bool {
        !self.members.iter().any(|&b| b)
    }

    /// Members in increasing id order.
    pub fn iter(&self) -> impl Iterator<Item = NodeId> + '_ {
        self.members
            .iter()
            .enumerate()
            .filter(|(_, &b)| b)
            .map(|(id, _)| NodeId::from_id(id, self.q))
    }

    /// Members of one y-section, by x.
    pub fn section(&self, y: usize) -> Vec<usize> {
        (0..self.q).filter(|&x| self.contains(x, y)).collect()
    }
}

/// `IS(E, z) = |{y : (z_y, y) ∈ E}|`.
pub fn intersection_score(erased: &NodeSet, z: PlaneIndex, t: usize) -> usize {
    let q = erased.q;
    let mut rest = z.0;
    let mut score = 0;
    for y in 0..t {
        if erased.contains(rest % q, y) {
            score += 1;
        }
        rest /= q;
    }
    score
}

/// Planes whose parity equations are solved jointly.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PlaneGroup {
    /// Candidate digits per section.
    pub sections: Vec<Vec<usize>>,
    /// Cartesian product of `sections`, in increasing ordinal order.
    pub planes: Vec<PlaneIndex>,
    pub score: usize,
}

impl PlaneGroup {
    pub fn len(&self) -> usize {
        self.planes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.planes.is_empty()
    }

    /// Minimal member ordinal; identifies the group within its level.
    pub fn leader(&self) -> PlaneIndex {
        self.planes[0]
    }
}

/// Section `y` expands to every erased `x` when `(z_y, y)` is erased, else stays `{z_y}`.
pub fn plane_group(erased: &NodeSet, z: PlaneIndex, q: usize, t: usize) -> PlaneGroup {
    let sections: Vec<Vec<usize>> = (0..t)
        .map(|y| {
            let zy = z.digit(y, q);
            if erased.contains(zy, y) {
                erased.section(y)
            } else {
                vec![zy]
            }
        })
        .collect();
    let mut planes = vec![0usize];
    let mut place = 1usize;
    for digits in &sections {
        planes = planes
            .iter()
            .flat_map(|&base| digits.iter().map(move |&x| base + x * place))
            .collect();
        place *= q;
    }
    planes.sort_unstable();
    PlaneGroup {
        sections,
        planes: planes.into_iter().map(PlaneIndex).collect(),
        score: intersection_score(erased, z, t),
    }
}

/// The full codeword: `α` symbols for each of the `q·t` base nodes.
#[derive(Clone, PartialEq, Eq)]
pub struct Codeword {
    params: CodeParams,
    symbols: Vec<Gf>,
}

impl fmt::Debug for Codeword {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Codeword")
            .field("params", &self.params)
            .field("symbols", &self.symbols.len())
            .finish()
    }
}

impl Codeword {
    pub fn zeros(params: CodeParams) -> Self {
        Codeword {
            params,
            symbols: vec![Gf::ZERO; params.n_base * params.alpha],
        }
    }

    /// Wraps node-major symbols (`node_id · α + plane`).
    pub fn from_symbols(params: CodeParams, symbols: Vec<Gf>) -> Result<Self> {
        if symbols.len() != params.n_base * params.alpha {
            return Err(Error::DimensionMismatch(format!(
                "codeword needs {} symbols, got {}",
                params.n_base * params.alpha,
                symbols.len()
            )));
        }
        Ok(Codeword { params, symbols })
    }

    pub fn params(&self) -> &CodeParams {
        &self.params
    }

    pub fn symbols(&self) -> &[Gf] {
        &self.symbols
    }

    #[inline]
    pub fn cell(&self, node: NodeId, plane: PlaneIndex) -> usize {
        node.id(self.params.q) * self.params.alpha + plane.0
    }

    #[inline]
    pub fn get(&self, node: NodeId, plane: PlaneIndex) -> Gf {
        self.symbols[self.cell(node, plane)]
    }

    #[inline]
    pub fn set(&mut self, node: NodeId, plane: PlaneIndex, value: Gf) {
        let c = self.cell(node, plane);
        self.symbols[c] = value;
    }

    #[inline]
    pub(crate) fn get_cell(&self, cell: usize) -> Gf {
        self.symbols[cell]
    }

    #[inline]
    pub(crate) fn set_cell(&mut self, cell: usize, value: Gf) {
        self.symbols[cell] = value;
    }

    /// The `α` symbols stored on one node.
    pub fn node(&self, node: NodeId) -> &[Gf] {
        let start = node.id(self.params.q) * self.params.alpha;
        &self.symbols[start..start + self.params.alpha]
    }

    pub fn node_mut(&mut self, node: NodeId) -> &mut [Gf] {
        let start = node.id(self.params.q) * self.params.alpha;
        &mut self.symbols[start..start + self.params.alpha]
    }

    /// Zeroes every symbol of the given nodes.
    pub fn erase(&mut self, nodes: impl IntoIterator<Item = NodeId>) {
        for node in nodes {
            self.node_mut(node).fill(Gf::ZERO);
        }
    }
}

/// One term of a parity equation for plane `a`: coefficient `scale · base^j`
/// multiplies `A(node; plane)` in equation `j`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ParityTerm {
    pub node: NodeId,
    pub plane: PlaneIndex,
    pub scale: Gf,
    pub base: Gf,
}

/// Terms of the parity equations of plane `a`, in-plane symbols first, then
/// the out-of-plane symbols `A(a_y, y; a(y, x))` for `x ≠ a_y`.
pub fn parity_terms(table: &ThetaTable, a: PlaneIndex) -> Vec<ParityTerm> {
    let (q, t) = (table.q(), table.t());
    let mut terms = Vec::with_capacity(q * t * 2);
    for y in 0..t {
        let ay = a.digit(y, q);
        for x in 0..q {
            terms.push(ParityTerm {
                node: NodeId::new(x, y),
                plane: a,
                scale: Gf::ONE,
                base: table.theta(x, y, ay),
            });
        }
    }
    for y in 0..t {
        let ay = a.digit(y, q);
        for x in (0..q).filter(|&x| x != ay) {
            terms.push(ParityTerm {
                node: NodeId::new(ay, y),
                plane: a.substitute(y, x, q),
                scale: table.gamma_coeff(x, ay),
                base: table.theta(ay, y, x),
            });
        }
    }
    terms
}

/// Entry of the `rα × nα` parity-check matrix at row `(j, a)`, column `(x, y; z)`.
pub fn h_entry(
    table: &ThetaTable,
    j: usize,
    a: PlaneIndex,
    x: usize,
    y: usize,
    z: PlaneIndex,
) -> Gf {
    let q = table.q();
    let f = table.field();
    let zy = z.digit(y, q);
    if a == z {
        f.pow(table.theta(x, y, zy), j as u64)
    } else if zy != x && a == z.substitute(y, x, q) {
        f.mul(
            table.gamma_coeff(zy, x),
            f.pow(table.theta(x, y, zy), j as u64),
        )
    } else {
        Gf::ZERO
    }
}

/// Materializes the columns of H for `(node, plane)` pairs, all `r·α` rows.
/// Row `(j, a)` sits at `a·r + j`.
pub fn h_columns(
    params: &CodeParams,
    table: &ThetaTable,
    columns: &[(NodeId, PlaneIndex)],
) -> GfMatrix {
    let rows = params.r * params.alpha;
    let mut h = GfMatrix::zeros(rows, columns.len());
    for a in 0..params.alpha {
        for j in 0..params.r {
            for (c, &(node, z)) in columns.iter().enumerate() {
                h[(a * params.r + j, c)] = h_entry(table, j, PlaneIndex(a), node.x, node.y, z);
            }
        }
    }
    h
}

/// Whether the codeword satisfies every parity equation.
pub fn check_parity(c: &Codeword, table: &ThetaTable) -> bool {
    let p = c.params();
    let f = table.field();
    (0..p.alpha).all(|a| {
        let terms = parity_terms(table, PlaneIndex(a));
        (0..p.r).all(|j| {
            let mut acc = Gf::ZERO;
            for term in &terms {
                let coeff = f.mul(term.scale, f.pow(term.base, j as u64));
                acc += f.mul(coeff, c.get(term.node, term.plane));
            }
            acc.is_zero()
        })
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gf2m::Field;
    use std::sync::Arc;

    fn table(n: usize, k: usize, d: usize) -> (CodeParams, ThetaTable) {
        let p = CodeParams::derive(n, k, d).unwrap();
        let f = Arc::new(Field::new(p.m).unwrap());
        (p, ThetaTable::assign(&p, f).unwrap())
    }

    #[test]
    fn node_id_is_y_major() {
        assert_eq!(NodeId::new(1, 2).id(3), 7);
        assert_eq!(NodeId::from_id(7, 3), NodeId::new(1, 2));
        for id in 0..12 {
            assert_eq!(NodeId::from_id(id, 4).id(4), id);
        }
    }

    #[test]
    fn plane_sub_examples() {
        let z = PlaneIndex::from_digits(&[3, 2, 3, 1, 0], 4);
        let w = z.substitute(1, 0, 4);
        assert_eq!(w.digits(4, 5), vec![3, 0, 3, 1, 0]);
        assert_eq!(z.substitute(2, z.digit(2, 4), 4), z);
        assert_eq!(PlaneIndex(3).digits(2, 2), vec![1, 1]);
        assert_eq!(PlaneIndex(3).substitute(0, 0, 2), PlaneIndex(2));
    }

    #[test]
    fn digits_round_trip() {
        for q in 2usize..=4 {
            for ord in 0..q.pow(4_u32) {
                let z = PlaneIndex(ord);
                assert_eq!(PlaneIndex::from_digits(&z.digits(q, 4), q), z);
            }
        }
    }

    #[test]
    fn intersection_score_examples() {
        let empty = NodeSet::empty(2, 2);
        for z in 0..4 {
            assert_eq!(intersection_score(&empty, PlaneIndex(z), 2), 0);
        }
        let one = NodeSet::from_nodes(2, 2, [NodeId::new(1, 0)]);
        assert_eq!(
            intersection_score(&one, PlaneIndex::from_digits(&[1, 0], 2), 2),
            1
        );
        let e = NodeSet::from_nodes(
            2,
            2,
            [NodeId::new(0, 0), NodeId::new(0, 1), NodeId::new(1, 1)],
        );
        assert_eq!(
            intersection_score(&e, PlaneIndex::from_digits(&[0, 1], 2), 2),
            2
        );
    }

    #[test]
    fn plane_group_examples() {
        let e = NodeSet::from_nodes(2, 2, [NodeId::new(0, 1), NodeId::new(1, 1)]);
        let g = plane_group(&e, PlaneIndex::from_digits(&[0, 1], 2), 2, 2);
        let want: Vec<_> = [[0, 0], [0, 1]]
            .iter()
            .map(|d| PlaneIndex::from_digits(d, 2))
            .collect();
        assert_eq!(g.planes, want);
        assert_eq!(g.score, 1);

        let e = NodeSet::from_nodes(2, 3, [NodeId::new(1, 0)]);
        let z = PlaneIndex::from_digits(&[0, 1, 1], 2);
        let g = plane_group(&e, z, 2, 3);
        assert_eq!(g.planes, vec![z]);
        assert_eq!(g.score, 0);

        let e = NodeSet::from_nodes(
            3,
            2,
            [NodeId::new(0, 0), NodeId::new(1, 0), NodeId::new(2, 1)],
        );
        let g = plane_group(&e, PlaneIndex::from_digits(&[0, 2], 3), 3, 2);
        assert_eq!(g.sections, vec![vec![0, 1], vec![2]]);
        assert_eq!(g.len(), 2);
    }

    #[test]
    fn group_members_share_score() {
        let q = 3;
        let t = 3;
        let e = NodeSet::from_nodes(
            q,
            t,
            [
                NodeId::new(0, 0),
                NodeId::new(2, 0),
                NodeId::new(1, 1),
                NodeId::new(1, 2),
            ],
        );
        for z in 0..q.pow(t as u32) {
            let g = plane_group(&e, PlaneIndex(z), q, t);
            let expected: usize = g.sections.iter().map(Vec::len).product();
            assert_eq!(g.len(), expected);
            for &p in &g.planes {
                assert_eq!(intersection_score(&e, p, t), g.score);
                assert_eq!(plane_group(&e, p, q, t), g);
            }
        }
    }

    #[test]
    fn h_entry_cases() {
        let (p, tb) = table(6, 3, 4);
        let z = PlaneIndex::from_digits(&[0, 1, 0], 2);
        for y in 0..p.t {
            for x in 0..p.q {
                assert_eq!(h_entry(&tb, 0, z, x, y, z), Gf::ONE);
            }
        }
        // x = 1 > z_0 = 0: coefficient γ_{0,1}... on the column side it is γ_{z_y,x}
        let a = z.substitute(0, 1, 2);
        let f = tb.field();
        assert_eq!(
            h_entry(&tb, 2, a, 1, 0, z),
            f.mul(tb.gamma(), f.pow(tb.theta(1, 0, 0), 2))
        );
        // z_1 = 1 > x = 0 gives coefficient 1
        let a = z.substitute(1, 0, 2);
        assert_eq!(h_entry(&tb, 1, a, 0, 1, z), tb.theta(0, 1, 1));
        // two differing digits
        let far = z.substitute(0, 1, 2).substitute(2, 1, 2);
        for x in 0..2 {
            for y in 0..3 {
                assert_eq!(h_entry(&tb, 1, far, x, y, z), Gf::ZERO);
            }
        }
    }

    #[test]
    fn columns_touch_own_plane_and_one_neighbour() {
        let (p, tb) = table(8, 4, 7);
        for id in 0..p.n_base {
            let node = NodeId::from_id(id, p.q);
            for z in 0..p.alpha {
                let blocks = (0..p.alpha)
                    .filter(|&a| {
                        (0..p.r).any(|j| {
                            !h_entry(&tb, j, PlaneIndex(a), node.x, node.y, PlaneIndex(z)).is_zero()
                        })
                    })
                    .count();
                let own = if PlaneIndex(z).digit(node.y, p.q) == node.x {
                    1
                } else {
                    2
                };
                assert_eq!(blocks, own);
                assert!(blocks <= p.q);
            }
        }
    }

    #[test]
    fn parity_terms_agree_with_h() {
        // the per-plane parity terms must be the transpose view of the H columns
        let (p, tb) = table(6, 3, 5);
        let f = tb.field();
        for a in 0..p.alpha {
            let terms = parity_terms(&tb, PlaneIndex(a));
            for j in 0..p.r {
                let mut row = vec![Gf::ZERO; p.n_base * p.alpha];
                for term in &terms {
                    let c = term.node.id(p.q) * p.alpha + term.plane.0;
                    row[c] += f.mul(term.scale, f.pow(term.base, j as u64));
                }
                for id in 0..p.n_base {
                    let node = NodeId::from_id(id, p.q);
                    for z in 0..p.alpha {
                        assert_eq!(
                            row[id * p.alpha + z],
                            h_entry(&tb, j, PlaneIndex(a), node.x, node.y, PlaneIndex(z))
                        );
                    }
                }
            }
        }
    }

    #[test]
    fn zero_word_is_a_codeword() {
        let (p, tb) = table(6, 3, 4);
        assert!(check_parity(&Codeword::zeros(p), &tb));
        let mut c = Codeword::zeros(p);
        c.set(NodeId::new(1, 1), PlaneIndex(3), Gf(1));
        assert!(!check_parity(&c, &tb));
    }
}
