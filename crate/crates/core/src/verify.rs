//! Exhaustive desk-scale checks of a code instance.
//!
//! * MDS: every `r`-subset of stored nodes gives full-rank erased columns of
//!   H and decodes a random codeword exactly.
//! * Repair: every (failed node, helper set) pair rebuilds the node while each
//!   helper sends exactly `β` stored symbols from the planes `z_{y0} = x0`.
//! * θ table: the structural invariants plus subgroup/coset membership.
//! * Base-case determinants: elimination against closed-form factorizations.
//!
//! When an enumeration exceeds the budget it is replaced by uniform sampling
//! with the seed recorded in the report.

use std::fmt;
use std::time::{Duration, Instant};

use itertools::Itertools;
use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::codec::{ErasureState, MsrCode};
use crate::cube::{h_columns, Codeword, NodeId, PlaneIndex};
use crate::error::Result;
use crate::gf2m::{Field, Gf};
use crate::params::{CodeParams, ThetaTable};
use crate::solver::GfMatrix;

pub const DEFAULT_BUDGET: usize = 100_000;
pub const DEFAULT_SEED: u64 = 0x6d73_7263;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct VerifyOptions {
    /// Maximum number of patterns enumerated before switching to sampling.
    pub budget: usize,
    pub seed: u64,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        VerifyOptions {
            budget: DEFAULT_BUDGET,
            seed: DEFAULT_SEED,
        }
    }
}

impl VerifyOptions {
    pub fn exhaustive() -> Self {
        VerifyOptions {
            budget: usize::MAX,
            ..Self::default()
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    /// Pattern counts on success; a reproducible counterexample on failure.
    pub detail: String,
}

#[derive(Debug, Clone)]
pub struct VerificationReport {
    pub params: CodeParams,
    pub checks: Vec<Check>,
    pub elapsed: Duration,
    /// Seed used when some enumeration was sampled instead of exhaustive.
    pub sampled: Option<u64>,
}

impl VerificationReport {
    fn new(params: CodeParams) -> Self {
        VerificationReport {
            params,
            checks: Vec::new(),
            elapsed: Duration::ZERO,
            sampled: None,
        }
    }

    fn push(&mut self, name: &str, passed: bool, detail: impl Into<String>) {
        self.checks.push(Check {
            name: name.to_string(),
            passed,
            detail: detail.into(),
        });
    }

    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn failures(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| !c.passed)
    }

    pub fn merge(&mut self, other: VerificationReport) {
        self.checks.extend(other.checks);
        self.elapsed += other.elapsed;
        self.sampled = self.sampled.or(other.sampled);
    }

    /// One tab-separated `name status detail` line per check.
    pub fn to_lines(&self) -> String {
        self.checks
            .iter()
            .map(|c| {
                format!(
                    "{}\t{}\t{}\n",
                    c.name,
                    if c.passed { "PASS" } else { "FAIL" },
                    c.detail
                )
            })
            .collect()
    }
}

impl fmt::Display for VerificationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "verification of {}", self.params)?;
        if let Some(seed) = self.sampled {
            writeln!(f, "  (sampled, seed {seed:#x})")?;
        }
        for c in &self.checks {
            let mark = if c.passed { "ok  " } else { "FAIL" };
            writeln!(f, "  [{mark}] {:<24} {}", c.name, c.detail)?;
        }
        let failed = self.failures().count();
        write!(
            f,
            "{} checks, {} failed, {:.2?}",
            self.checks.len(),
            failed,
            self.elapsed
        )
    }
}

fn binomial(n: usize, k: usize) -> u128 {
    if k > n {
        return 0;
    }
    (0..k as u128).fold(1u128, |acc, i| acc * (n as u128 - i) / (i + 1))
}

/// All k-subsets of `items`, or `budget` uniformly sampled ones.
fn subsets(
    items: &[usize],
    k: usize,
    budget: usize,
    rng: &mut ChaCha8Rng,
) -> (Vec<Vec<usize>>, bool) {
    if binomial(items.len(), k) <= budget as u128 {
        (items.iter().copied().combinations(k).collect(), false)
    } else {
        let picks = (0..budget)
            .map(|_| {
                let mut s: Vec<usize> = sample(rng, items.len(), k)
                    .into_iter()
                    .map(|i| items[i])
                    .collect();
                s.sort_unstable();
                s
            })
            .collect();
        (picks, true)
    }
}

fn random_codeword(code: &MsrCode, rng: &mut ChaCha8Rng) -> Result<Codeword> {
    let size = code.field().size();
    let msg: Vec<Gf> = (0..code.params().message_len())
        .map(|_| Gf(rng.gen_range(0..size) as u16))
        .collect();
    code.encode(&msg)
}

fn ids(nodes: &[usize]) -> String {
    format!("{{{}}}", nodes.iter().join(","))
}

/// Every `r`-erasure pattern: full-rank erased columns of H, and exact decoding.
pub fn verify_mds(code: &MsrCode, opts: &VerifyOptions) -> VerificationReport {
    let start = Instant::now();
    let p = *code.params();
    let f = code.field();
    let mut report = VerificationReport::new(p);
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);

    let nodes: Vec<usize> = (0..p.n).collect();
    let (patterns, sampled) = subsets(&nodes, p.r, opts.budget, &mut rng);
    if sampled {
        report.sampled = Some(opts.seed);
    }

    let mut rank_fail = None;
    for e in &patterns {
        let cols: Vec<(NodeId, PlaneIndex)> = e
            .iter()
            .flat_map(|&id| (0..p.alpha).map(move |z| (code.node(id), PlaneIndex(z))))
            .collect();
        let rank = h_columns(&p, code.thetas(), &cols).rank(f);
        if rank != cols.len() {
            rank_fail = Some(format!("E={}: rank {rank} < {}", ids(e), cols.len()));
            break;
        }
    }
    report.push(
        "mds.rank",
        rank_fail.is_none(),
        rank_fail
            .unwrap_or_else(|| format!("{} patterns, rank {} each", patterns.len(), p.r * p.alpha)),
    );

    let decode_fail = match random_codeword(code, &mut rng) {
        Err(e) => Some(format!("encoding failed: {e}")),
        Ok(cw) => patterns.iter().find_map(|e| {
            let state = ErasureState::new(cw.clone(), e.iter().map(|&id| code.node(id)));
            match code.decode(&state) {
                Ok(out) if out == cw => None,
                Ok(_) => Some(format!("E={}: decoded word differs", ids(e))),
                Err(err) => Some(format!("E={}: {err}", ids(e))),
            }
        }),
    };
    report.push(
        "mds.decode",
        decode_fail.is_none(),
        decode_fail.unwrap_or_else(|| format!("{} patterns decoded exactly", patterns.len())),
    );
    report.elapsed = start.elapsed();
    report
}

/// Every failed node with every helper set of size `d`.
pub fn verify_repair(code: &MsrCode, opts: &VerifyOptions) -> VerificationReport {
    let start = Instant::now();
    let p = *code.params();
    let mut report = VerificationReport::new(p);
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed ^ 0x5eed);

    let cw = match random_codeword(code, &mut rng) {
        Ok(cw) => cw,
        Err(e) => {
            report.push("repair.exact", false, format!("encoding failed: {e}"));
            report.elapsed = start.elapsed();
            return report;
        }
    };

    let per_node_budget = (opts.budget / p.n).max(1);
    let mut cases = 0usize;
    let mut exact_fail = None;
    let mut access_fail = None;
    'outer: for failed_id in 0..p.n {
        let failed = code.node(failed_id);
        let others: Vec<usize> = (0..p.n).filter(|&i| i != failed_id).collect();
        let (sets, sampled) = subsets(&others, p.d, per_node_budget, &mut rng);
        if sampled {
            report.sampled = Some(opts.seed);
        }
        for hs in sets {
            cases += 1;
            let helpers: Vec<NodeId> = hs.iter().map(|&i| code.node(i)).collect();
            let mut lost = cw.clone();
            lost.erase([failed]);
            let (rebuilt, trace) = match code.repair(&lost, failed, &helpers) {
                Ok(out) => out,
                Err(e) => {
                    exact_fail = Some(format!("failed={failed_id} H={}: {e}", ids(&hs)));
                    break 'outer;
                }
            };
            if rebuilt != cw.node(failed) {
                exact_fail = Some(format!("failed={failed_id} H={}: wrong symbols", ids(&hs)));
                break 'outer;
            }
            if access_fail.is_none() {
                for hp in &trace.payload {
                    let ok = hp.symbols.len() == p.beta
                        && hp.symbols.iter().all(|&(z, v)| {
                            z.digit(failed.y, p.q) == failed.x && v == cw.get(hp.helper, z)
                        });
                    if !ok {
                        access_fail = Some(format!(
                            "failed={failed_id} H={}: helper {} sent {} symbols",
                            ids(&hs),
                            hp.helper.id(p.q),
                            hp.symbols.len()
                        ));
                    }
                }
            }
        }
    }
    report.push(
        "repair.exact",
        exact_fail.is_none(),
        exact_fail.unwrap_or_else(|| format!("{cases} (failed, helper set) cases")),
    );
    report.push(
        "repair.access",
        access_fail.is_none(),
        access_fail.unwrap_or_else(|| format!("{} verbatim symbols per helper", p.beta)),
    );
    if p.k >= 2 {
        report.push(
            "repair.bandwidth",
            p.repair_bandwidth() < p.message_len(),
            format!(
                "d·β = {} vs k·α = {}",
                p.repair_bandwidth(),
                p.message_len()
            ),
        );
    }
    report.elapsed = start.elapsed();
    report
}

/// Block layout of the single-section base matrix: `(θ index, Γ applied)`
/// per block, `None` for a zero block.
type Layout = &'static [&'static [Option<(usize, bool)>]];

const BASE_1: Layout = &[&[Some((1, false))], &[Some((1, true))]];
const BASE_2: Layout = &[
    &[Some((1, false)), Some((2, false)), None],
    &[Some((1, true)), None, Some((3, false))],
    &[None, Some((2, true)), Some((3, true))],
];
const BASE_3: Layout = &[
    &[
        Some((1, false)),
        Some((2, false)),
        Some((3, false)),
        None,
        None,
        None,
    ],
    &[
        Some((1, true)),
        None,
        None,
        None,
        Some((2, false)),
        Some((3, false)),
    ],
    &[
        None,
        Some((2, true)),
        None,
        Some((1, false)),
        None,
        Some((3, true)),
    ],
    &[
        None,
        None,
        Some((3, true)),
        Some((1, true)),
        Some((2, true)),
        None,
    ],
];

/// The reduced matrix for `e` erasures in one section (`e = 1, 2, 3`), with
/// `V = [v(γθ), v(θ)]` blocks of height `e` and `Γ = diag(γ, 1)`.
/// `thetas[i - 1]` is `θ_i`.
pub fn base_case_matrix(f: &Field, gamma: Gf, thetas: &[Gf], e: usize) -> GfMatrix {
    let layout = match e {
        1 => BASE_1,
        2 => BASE_2,
        3 => BASE_3,
        _ => panic!("base case defined for 1..=3 erasures, got {e}"),
    };
    let block_cols = layout[0].len();
    let mut m = GfMatrix::zeros(layout.len() * e, block_cols * 2);
    for (br, blocks) in layout.iter().enumerate() {
        for (bc, block) in blocks.iter().enumerate() {
            let Some((i, with_gamma)) = *block else {
                continue;
            };
            let theta = thetas[i - 1];
            let left = f.mul(gamma, theta);
            for d in 0..e {
                let mut a = f.pow(left, d as u64);
                let b = f.pow(theta, d as u64);
                if with_gamma {
                    a = f.mul(a, gamma);
                }
                m[(br * e + d, bc * 2)] = a;
                m[(br * e + d, bc * 2 + 1)] = b;
            }
        }
    }
    m
}

/// Closed-form determinant of [`base_case_matrix`] (characteristic two, so
/// every difference is a sum).
pub fn base_case_closed_form(f: &Field, gamma: Gf, thetas: &[Gf], e: usize) -> Gf {
    let one_g = Gf::ONE + gamma;
    let prod = |xs: &[Gf]| xs.iter().fold(Gf::ONE, |acc, &x| f.mul(acc, x));
    match e {
        1 => one_g,
        2 => {
            let (t1, t2, t3) = (thetas[0], thetas[1], thetas[2]);
            prod(&[gamma, f.pow(one_g, 4), t1, t2 + t1, t2 + t3])
        }
        3 => {
            let (t1, t2, t3) = (thetas[0], thetas[1], thetas[2]);
            let g = |x| f.mul(gamma, x);
            prod(&[
                f.pow(gamma, 4),
                f.pow(one_g, 6),
                f.pow(t1 + t2, 2),
                f.pow(t1 + t3, 2),
                f.pow(t2 + t3, 4),
                t1 + g(t3),
                g(t1) + t3,
                t1 + g(t2),
                g(t1) + t2,
            ])
        }
        _ => panic!("base case defined for 1..=3 erasures, got {e}"),
    }
}

/// Elimination determinant of the single-section base matrix against its closed
/// form, on the table's own θ values and on `trials` random draws.
pub fn verify_base_determinants(code: &MsrCode, trials: usize, seed: u64) -> VerificationReport {
    let start = Instant::now();
    let p = *code.params();
    let table = code.thetas();
    let f = table.field();
    let gamma = table.gamma();
    let e = p.q - 1;
    let mut report = VerificationReport::new(p);

    let mut table_fail = None;
    let mut nonzero = true;
    for y in 0..p.t {
        let thetas: Vec<Gf> = (1..=table.w()).map(|i| table.base(i, y)).collect();
        let det = base_case_matrix(f, gamma, &thetas, e)
            .determinant(f)
            .expect("square");
        let closed = base_case_closed_form(f, gamma, &thetas, e);
        if det != closed {
            table_fail = Some(format!(
                "y={y} θ={thetas:?}: elimination {det} vs closed form {closed}"
            ));
            break;
        }
        nonzero &= !det.is_zero();
    }
    report.push(
        "base_det.table",
        table_fail.is_none(),
        table_fail.unwrap_or_else(|| format!("M(1,{e}) matches for all {} sections", p.t)),
    );
    report.push(
        "base_det.nonzero",
        nonzero,
        if nonzero {
            "table determinants are nonzero".to_string()
        } else {
            "zero determinant on the table".to_string()
        },
    );

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut random_fail = None;
    for _ in 0..trials {
        let thetas: Vec<Gf> = (0..3)
            .map(|_| Gf(rng.gen_range(1..f.size()) as u16))
            .collect();
        let det = base_case_matrix(f, gamma, &thetas, e)
            .determinant(f)
            .expect("square");
        let closed = base_case_closed_form(f, gamma, &thetas, e);
        if det != closed {
            random_fail = Some(format!(
                "θ={thetas:?}: elimination {det} vs closed form {closed}"
            ));
            break;
        }
    }
    report.push(
        "base_det.random",
        random_fail.is_none(),
        random_fail.unwrap_or_else(|| format!("{trials} random draws (seed {seed:#x})")),
    );
    report.elapsed = start.elapsed();
    report
}

/// Structural θ invariants, plus membership of the base values in the
/// subgroup `G` (θ_{i,y}) and the coset `γ²G` (θ_{0,y}).
pub fn verify_thetas(table: &ThetaTable, params: &CodeParams) -> VerificationReport {
    let start = Instant::now();
    let mut report = VerificationReport::new(*params);
    let named = [
        ("theta.diagonal", table.check_diagonal()),
        ("theta.reciprocity", table.check_reciprocity()),
        ("theta.node_distinct", table.check_node_distinct()),
        ("theta.global_distinct", table.check_global_distinct()),
    ];
    for (name, problems) in named {
        let ok = problems.is_empty();
        report.push(
            name,
            ok,
            if ok {
                "holds".to_string()
            } else {
                problems.join("; ")
            },
        );
    }

    let f = table.field();
    // λ^j lies in G iff j ≡ 0 (mod 3), in γ²G iff j ≡ 2, with γ = λ
    let coset = |v: Gf| f.log(v).ok().map(|l| l % 3);
    let mut problems = Vec::new();
    if table.gamma() != f.primitive() {
        problems.push(format!(
            "γ = {} is not the primitive element",
            table.gamma()
        ));
    }
    for y in 0..table.t() {
        if coset(table.base(0, y)) != Some(2) {
            problems.push(format!("θ_{{0,{y}}} = {} not in γ²G", table.base(0, y)));
        }
        for i in 1..=table.w() {
            if coset(table.base(i, y)) != Some(0) {
                problems.push(format!("θ_{{{i},{y}}} = {} not in G", table.base(i, y)));
            }
        }
    }
    let ok = problems.is_empty();
    report.push(
        "theta.cosets",
        ok,
        if ok {
            "base values drawn from G and γ²G".to_string()
        } else {
            problems.join("; ")
        },
    );
    report.elapsed = start.elapsed();
    report
}

/// Runs every check above.
pub fn verify_all(code: &MsrCode, opts: &VerifyOptions, trials: usize) -> VerificationReport {
    let mut report = verify_thetas(code.thetas(), code.params());
    report.merge(verify_base_determinants(code, trials, opts.seed));
    report.merge(verify_mds(code, opts));
    report.merge(verify_repair(code, opts));
    report
}
