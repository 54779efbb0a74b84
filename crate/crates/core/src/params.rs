//! Code parameters and the θ coefficient table.
//!
//! A user-facing `(n, k, d)` triple maps onto a base code with `n_base = q·t`
//! nodes, `q = d - k + 1` and `t = ⌈n/q⌉`. The `Δ = q·t - n` surplus nodes are
//! virtual: they always hold zeros and never leave the library.

use std::collections::HashSet;
use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::gf2m::{Field, Gf, MAX_DEGREE, MIN_DEGREE};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct CodeParams {
    /// Repair degree gap `d - k + 1`, one of 2, 3, 4.
    pub q: usize,
    /// Number of y-sections, `⌈n/q⌉`.
    pub t: usize,
    /// Parity count `n - k`.
    pub r: usize,
    /// Node count of the unshortened code, `q·t`.
    pub n_base: usize,
    /// Virtual zero nodes, `q·t - n`.
    pub delta: usize,
    pub n: usize,
    pub k: usize,
    pub d: usize,
    /// Sub-packetization `q^t`: symbols per node.
    pub alpha: usize,
    /// Symbols sent by each helper during repair, `q^(t-1)`.
    pub beta: usize,
    /// Field degree; symbols live in GF(2^m).
    pub m: u32,
    /// θ values drawn from the subgroup per section (1 for q=2, else 3).
    pub w: usize,
}

impl CodeParams {
    /// Validates `(n, k, d)` and derives every other parameter.
    pub fn derive(n: usize, k: usize, d: usize) -> Result<Self> {
        if k < 1 || k >= n {
            return Err(Error::InvalidParameters(format!(
                "need 1 <= k < n, got n={n} k={k}"
            )));
        }
        if d > n - 1 {
            return Err(Error::InvalidParameters(format!(
                "d={d} exceeds n-1={}",
                n - 1
            )));
        }
        if d < k + 1 || d > k + 3 {
            return Err(Error::UnsupportedParameters(format!(
                "d={d} must lie in [k+1, k+3] = [{}, {}]",
                k + 1,
                k + 3
            )));
        }
        let q = d - k + 1;
        let r = n - k;
        if r < q {
            return Err(Error::InvalidParameters(format!(
                "r={r} is smaller than q={q}"
            )));
        }
        let t = n.div_ceil(q);
        if t < 2 {
            return Err(Error::InvalidParameters(format!(
                "n={n} gives t={t}; at least two sections are needed"
            )));
        }
        let n_base = q * t;
        let alpha = checked_pow(q, t)?;
        let m = select_field(q, t)?;
        Ok(CodeParams {
            q,
            t,
            r,
            n_base,
            delta: n_base - n,
            n,
            k,
            d,
            alpha,
            beta: alpha / q,
            m,
            w: theta_width(q),
        })
    }

    /// Whether the base code was shortened.
    pub fn is_shortened(&self) -> bool {
        self.delta > 0
    }

    /// Symbols carried by one stripe of user data, `k·α`.
    pub fn message_len(&self) -> usize {
        self.k * self.alpha
    }

    /// Total symbols downloaded to repair one node, `d·β`.
    pub fn repair_bandwidth(&self) -> usize {
        self.d * self.beta
    }
}

impl fmt::Display for CodeParams {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "(n={}, k={}, d={}) q={} t={} r={} alpha={} beta={} delta={} Q=2^{}",
            self.n,
            self.k,
            self.d,
            self.q,
            self.t,
            self.r,
            self.alpha,
            self.beta,
            self.delta,
            self.m
        )
    }
}

fn checked_pow(q: usize, t: usize) -> Result<usize> {
    u32::try_from(t)
        .ok()
        .and_then(|t| q.checked_pow(t))
        .filter(|&a| a <= 1 << 24)
        .ok_or_else(|| Error::UnsupportedScale(format!("sub-packetization {q}^{t} is too large")))
}

fn theta_width(q: usize) -> usize {
    if q == 2 {
        1
    } else {
        3
    }
}

/// Smallest even `m` with `2^m >= 6t+2` (q=2) or `2^m >= 18t+2` (q=3,4),
/// and a cube subgroup of size greater than `w·t`.
pub fn select_field(q: usize, t: usize) -> Result<u32> {
    if !(2..=4).contains(&q) {
        return Err(Error::UnsupportedParameters(format!(
            "q={q} must be 2, 3 or 4"
        )));
    }
    if t < 2 {
        return Err(Error::InvalidParameters(format!(
            "t={t} must be at least 2"
        )));
    }
    let w = theta_width(q) as u64;
    let t = t as u64;
    let floor = if q == 2 { 6 * t + 2 } else { 18 * t + 2 };
    (MIN_DEGREE..=MAX_DEGREE)
        .step_by(2)
        .find(|&m| {
            let size = 1u64 << m;
            size >= floor && (size - 1) / 3 > w * t
        })
        .ok_or_else(|| {
            Error::UnsupportedScale(format!(
                "q={q}, t={t} needs a field larger than GF(2^{MAX_DEGREE})"
            ))
        })
}

/// `γ_{x,x'}`: γ below the diagonal index, 0 on it, 1 above it.
pub fn gamma_coeff(gamma: Gf, x: usize, x_prime: usize) -> Gf {
    use std::cmp::Ordering::*;
    match x.cmp(&x_prime) {
        Less => gamma,
        Equal => Gf::ZERO,
        Greater => Gf::ONE,
    }
}

/// Which `θ_{i,y}` sits at row `z`, column `x` of Θ_y for `z > x`.
/// Entries above the diagonal are γ times the transposed entry.
fn lower_index(q: usize, z: usize, x: usize) -> usize {
    debug_assert!(z > x);
    match q {
        2 => 1,
        3 => [[0, 0, 0], [1, 0, 0], [2, 3, 0]][z][x],
        4 => [[0, 0, 0, 0], [1, 0, 0, 0], [2, 3, 0, 0], [3, 2, 1, 0]][z][x],
        _ => unreachable!("q is validated to lie in 2..=4"),
    }
}

/// All coefficients `θ_{x,y;z}` of the parity-check matrix, plus γ.
#[derive(Clone, PartialEq, Eq)]
pub struct ThetaTable {
    field: Arc<Field>,
    q: usize,
    t: usize,
    w: usize,
    gamma: Gf,
    /// `base[y][i]` is `θ_{i,y}`; index 0 is the diagonal value.
    base: Vec<Vec<Gf>>,
    /// Flattened `Θ_y(z, x)` at `(y·q + z)·q + x`.
    entries: Vec<Gf>,
}

impl fmt::Debug for ThetaTable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ThetaTable")
            .field("q", &self.q)
            .field("t", &self.t)
            .field("gamma", &self.gamma)
            .field("base", &self.base)
            .finish()
    }
}

impl ThetaTable {
    /// Deterministic assignment from the cube subgroup of GF(2^m):
    /// `θ_{i,y} = G[w·y + i - 1]`, `θ_{0,y} = γ²·G[y]`, `γ = λ`.
    pub fn assign(params: &CodeParams, field: Arc<Field>) -> Result<Self> {
        if field.degree() != params.m {
            return Err(Error::InvalidParameters(format!(
                "field GF(2^{}) does not match parameters (m={})",
                field.degree(),
                params.m
            )));
        }
        let cosets = field.cosets();
        if cosets.g.len() <= params.w * params.t {
            return Err(Error::Internal(format!(
                "subgroup of size {} cannot host {} distinct coefficients",
                cosets.g.len(),
                params.w * params.t
            )));
        }
        let gamma = field.primitive();
        let gamma2 = field.mul(gamma, gamma);
        let base = (0..params.t)
            .map(|y| {
                let mut row = Vec::with_capacity(params.w + 1);
                row.push(field.mul(gamma2, cosets.g[y]));
                row.extend((1..=params.w).map(|i| cosets.g[params.w * y + i - 1]));
                row
            })
            .collect();
        let table = Self::from_base(field, params.q, params.t, gamma, base)?;
        let violations = table.violations();
        if !violations.is_empty() {
            return Err(Error::Internal(format!(
                "θ assignment violates: {}",
                violations.join("; ")
            )));
        }
        Ok(table)
    }

    /// Builds Θ_y from arbitrary base values without checking any invariant.
    /// `base[y]` must hold `w + 1` values, `θ_{0,y}` first.
    pub fn from_base(
        field: Arc<Field>,
        q: usize,
        t: usize,
        gamma: Gf,
        base: Vec<Vec<Gf>>,
    ) -> Result<Self> {
        if !(2..=4).contains(&q) {
            return Err(Error::UnsupportedParameters(format!("q={q}")));
        }
        let w = theta_width(q);
        if base.len() != t || base.iter().any(|row| row.len() != w + 1) {
            return Err(Error::DimensionMismatch(format!(
                "expected {t} sections of {} base values",
                w + 1
            )));
        }
        let mut entries = vec![Gf::ZERO; t * q * q];
        for (y, row) in base.iter().enumerate() {
            for z in 0..q {
                for x in 0..q {
                    let v = match z.cmp(&x) {
                        std::cmp::Ordering::Equal => row[0],
                        std::cmp::Ordering::Greater => row[lower_index(q, z, x)],
                        std::cmp::Ordering::Less => field.mul(gamma, row[lower_index(q, x, z)]),
                    };
                    entries[(y * q + z) * q + x] = v;
                }
            }
        }
        Ok(ThetaTable {
            field,
            q,
            t,
            w,
            gamma,
            base,
            entries,
        })
    }

    pub fn field(&self) -> &Field {
        &self.field
    }

    pub fn field_arc(&self) -> &Arc<Field> {
        &self.field
    }

    pub fn gamma(&self) -> Gf {
        self.gamma
    }

    pub fn q(&self) -> usize {
        self.q
    }

    pub fn t(&self) -> usize {
        self.t
    }

    pub fn w(&self) -> usize {
        self.w
    }

    /// `θ_{i,y}`, with `i = 0` the diagonal value.
    pub fn base(&self, i: usize, y: usize) -> Gf {
        self.base[y][i]
    }

    /// `θ_{x,y;z} = Θ_y(z, x)`.
    #[inline]
    pub fn theta(&self, x: usize, y: usize, z: usize) -> Gf {
        self.entries[(y * self.q + z) * self.q + x]
    }

    /// Returns a copy with a single `θ_{x,y;z}` overwritten (used for negative controls).
    pub fn with_entry(&self, x: usize, y: usize, z: usize, value: Gf) -> Self {
        let mut out = self.clone();
        out.entries[(y * self.q + z) * self.q + x] = value;
        out
    }

    /// Returns a copy with `θ_{i,y}` replaced and Θ_y rebuilt from the base values.
    pub fn with_base(&self, i: usize, y: usize, value: Gf) -> Self {
        let mut base = self.base.clone();
        base[y][i] = value;
        Self::from_base(self.field.clone(), self.q, self.t, self.gamma, base)
            .expect("shape is unchanged")
    }

    pub fn gamma_coeff(&self, x: usize, x_prime: usize) -> Gf {
        gamma_coeff(self.gamma, x, x_prime)
    }

    pub fn check_diagonal(&self) -> Vec<String> {
        let mut out = Vec::new();
        for y in 0..self.t {
            for x in 0..self.q {
                if self.theta(x, y, x) != self.base[y][0] {
                    out.push(format!("diagonal θ_{{{x},{y};{x}}} != θ_{{0,{y}}}"));
                }
            }
        }
        out
    }

    pub fn check_reciprocity(&self) -> Vec<String> {
        let mut out = Vec::new();
        for y in 0..self.t {
            for z in 0..self.q {
                for x in z + 1..self.q {
                    let want = self.field.mul(self.gamma, self.theta(z, y, x));
                    if self.theta(x, y, z) != want {
                        out.push(format!("θ_{{{x},{y};{z}}} != γ·θ_{{{z},{y};{x}}}"));
                    }
                }
            }
        }
        out
    }

    /// `{θ_{x,y;i}, θ_{i,y;x}, θ_{x,y;x} : i ≠ x}` must hold `2q - 1` distinct values.
    pub fn check_node_distinct(&self) -> Vec<String> {
        let mut out = Vec::new();
        for y in 0..self.t {
            for x in 0..self.q {
                let mut seen = HashSet::new();
                seen.insert(self.theta(x, y, x));
                let mut ok = true;
                for i in (0..self.q).filter(|&i| i != x) {
                    ok &= seen.insert(self.theta(x, y, i));
                    ok &= seen.insert(self.theta(i, y, x));
                }
                if !ok {
                    out.push(format!("coefficients around node ({x},{y}) repeat"));
                }
            }
        }
        out
    }

    /// `{θ_{i,y}, γθ_{i,y}, θ_{0,y} : i ∈ [w], y}` must be pairwise distinct.
    pub fn check_global_distinct(&self) -> Vec<String> {
        let mut seen: HashSet<Gf> = HashSet::new();
        let mut dups = Vec::new();
        for y in 0..self.t {
            let mut values = vec![(self.base[y][0], format!("θ_{{0,{y}}}"))];
            for i in 1..=self.w {
                let v = self.base[y][i];
                values.push((v, format!("θ_{{{i},{y}}}")));
                values.push((self.field.mul(self.gamma, v), format!("γθ_{{{i},{y}}}")));
            }
            for (v, name) in values {
                if !seen.insert(v) {
                    dups.push(format!("{name} = {v} repeats an earlier coefficient"));
                }
            }
        }
        dups
    }

    /// All invariant violations, empty when the table is sound.
    pub fn violations(&self) -> Vec<String> {
        let mut out = self.check_diagonal();
        out.extend(self.check_reciprocity());
        out.extend(self.check_node_distinct());
        out.extend(self.check_global_distinct());
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn table(n: usize, k: usize, d: usize) -> (CodeParams, ThetaTable) {
        let p = CodeParams::derive(n, k, d).unwrap();
        let f = Arc::new(Field::new(p.m).unwrap());
        let t = ThetaTable::assign(&p, f).unwrap();
        (p, t)
    }

    #[test]
    fn derive_examples() {
        let p = CodeParams::derive(6, 3, 4).unwrap();
        assert_eq!((p.q, p.t, p.delta, p.alpha, p.beta), (2, 3, 0, 8, 4));
        let p = CodeParams::derive(5, 2, 3).unwrap();
        assert_eq!((p.q, p.t, p.delta, p.r), (2, 3, 1, 3));
        assert!(p.is_shortened());
        let p = CodeParams::derive(8, 4, 7).unwrap();
        assert_eq!((p.q, p.t, p.delta, p.alpha, p.beta), (4, 2, 0, 16, 4));
    }

    #[test]
    fn derive_rejects_bad_triples() {
        assert!(matches!(
            CodeParams::derive(10, 3, 8),
            Err(Error::UnsupportedParameters(_))
        ));
        assert!(matches!(
            CodeParams::derive(10, 3, 3),
            Err(Error::UnsupportedParameters(_))
        ));
        assert!(matches!(
            CodeParams::derive(4, 2, 4),
            Err(Error::InvalidParameters(_))
        ));
        assert!(matches!(
            CodeParams::derive(4, 4, 5),
            Err(Error::InvalidParameters(_))
        ));
        assert!(matches!(
            CodeParams::derive(4, 0, 1),
            Err(Error::InvalidParameters(_))
        ));
    }

    #[test]
    fn msr_identities_hold() {
        for n in 3..=14 {
            for k in 1..n {
                for d in k + 1..=(k + 3).min(n - 1) {
                    let p = CodeParams::derive(n, k, d).unwrap();
                    assert_eq!(p.alpha, p.q.pow(n.div_ceil(p.q) as u32));
                    assert_eq!(p.alpha, (p.d - p.k + 1) * p.beta);
                    assert_eq!(p.k + p.r + p.delta, p.n_base);
                    assert!(p.r >= p.q);
                    if p.k >= 2 {
                        assert!(p.repair_bandwidth() < p.message_len(), "{p}");
                    }
                }
            }
        }
    }

    #[test]
    fn select_field_examples() {
        assert_eq!(select_field(2, 2).unwrap(), 4);
        assert_eq!(select_field(3, 2).unwrap(), 6);
        assert_eq!(select_field(2, 3).unwrap(), 6);
        assert_eq!(select_field(4, 4).unwrap(), 8);
        assert!(matches!(
            select_field(5, 2),
            Err(Error::UnsupportedParameters(_))
        ));
        assert!(matches!(
            select_field(4, 5000),
            Err(Error::UnsupportedScale(_))
        ));
    }

    #[test]
    fn gamma_rule() {
        let g = Gf(7);
        assert_eq!(gamma_coeff(g, 1, 2), g);
        assert_eq!(gamma_coeff(g, 2, 2), Gf::ZERO);
        assert_eq!(gamma_coeff(g, 3, 1), Gf::ONE);
    }

    #[test]
    fn theta_matrix_shapes() {
        let (_, tb) = table(4, 2, 3);
        let f = tb.field();
        let g = tb.gamma();
        for y in 0..2 {
            assert_eq!(tb.theta(1, y, 0), f.mul(g, tb.base(1, y)));
            assert_eq!(tb.theta(0, y, 1), tb.base(1, y));
        }

        let (_, tb) = table(8, 4, 7);
        let f = tb.field();
        for y in 0..2 {
            assert_eq!(tb.theta(3, y, 2), f.mul(tb.gamma(), tb.base(1, y)));
            assert_eq!(tb.theta(2, y, 3), tb.base(1, y));
            // rows of Θ_y for q = 4, written out
            let b = |i| tb.base(i, y);
            let gb = |i| f.mul(tb.gamma(), tb.base(i, y));
            let rows = [
                [b(0), gb(1), gb(2), gb(3)],
                [b(1), b(0), gb(3), gb(2)],
                [b(2), b(3), b(0), gb(1)],
                [b(3), b(2), b(1), b(0)],
            ];
            for (z, row) in rows.iter().enumerate() {
                for (x, v) in row.iter().enumerate() {
                    assert_eq!(tb.theta(x, y, z), *v, "Θ_{y}({z},{x})");
                }
            }
        }

        let (_, tb) = table(6, 3, 5);
        let f = tb.field();
        for y in 0..2 {
            let b = |i| tb.base(i, y);
            let gb = |i| f.mul(tb.gamma(), tb.base(i, y));
            let rows = [
                [b(0), gb(1), gb(2)],
                [b(1), b(0), gb(3)],
                [b(2), b(3), b(0)],
            ];
            for (z, row) in rows.iter().enumerate() {
                for (x, v) in row.iter().enumerate() {
                    assert_eq!(tb.theta(x, y, z), *v);
                }
            }
        }
    }

    #[test]
    fn assignment_uses_subgroup_and_coset() {
        let (p, tb) = table(6, 3, 5);
        let f = tb.field();
        let c = f.cosets();
        let g2 = f.mul(tb.gamma(), tb.gamma());
        for y in 0..p.t {
            assert_eq!(tb.base(0, y), f.mul(g2, c.g[y]));
            assert!(c.gamma2_g.contains(&tb.base(0, y)));
            for i in 1..=p.w {
                assert_eq!(tb.base(i, y), c.g[p.w * y + i - 1]);
            }
        }
    }

    #[test]
    fn invariants_hold_across_desk_scale() {
        for q in 2..=4 {
            for t in 2..=6 {
                let m = select_field(q, t).unwrap();
                let f = Arc::new(Field::new(m).unwrap());
                // n = q·t, k = n - q: smallest valid r for this q
                let n = q * t;
                let p = CodeParams::derive(n, n - q, n - 1).unwrap();
                assert_eq!((p.q, p.t), (q, t));
                let tb = ThetaTable::assign(&p, f).unwrap();
                assert!(tb.violations().is_empty());
                for y in 0..t {
                    for x in 0..q {
                        assert_eq!(tb.theta(x, y, x), tb.base(0, y));
                    }
                }
            }
        }
    }

    #[test]
    fn duplicated_theta_is_reported() {
        let (_, tb) = table(6, 3, 4);
        let bad = tb.with_base(1, 1, tb.base(1, 0));
        assert!(!bad.check_global_distinct().is_empty());
        assert!(bad.check_diagonal().is_empty());

        let bad = tb.with_entry(1, 0, 0, tb.base(0, 0));
        assert!(!bad.check_node_distinct().is_empty());
        assert!(!bad.check_reciprocity().is_empty());
    }
}
