//! Isomorph-free exhaustive generation of partial r-differential posets.
//!
//! Rank extensions are the 0/1 matrices M with column Gram M^t M = UD + rI;
//! rows are generated in nonincreasing bitmask order (breaking row-permutation
//! symmetry) with entrywise residual pruning, and the forced observation that
//! while the highest unfinished column has positive residual every further
//! row must contain it. Children are deduplicated by a canonical form; since
//! truncation preserves isomorphism, children of distinct parent classes are
//! never isomorphic and deduplication stays local to one parent.

use std::collections::HashSet;

use num_bigint::BigInt;
use num_traits::{One, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::{GradedGraph, GraphKind};
use crate::matrix::IntMatrix;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum EnumerateError {
    #[error("rank {rank} has {size} vertices, beyond the 64-column limit")]
    RankTooWide { rank: usize, size: usize },
    #[error("only 0/1 posets with a minimum can be enumerated: {0}")]
    NotAPoset(String),
    #[error("class budget {budget} exceeded at rank {rank}")]
    BudgetExceeded { budget: usize, rank: usize },
}

/// Bit-packed partial poset: one u64 bitmask per vertex listing its lower
/// covers. Ranks are limited to 64 vertices, ample for the target censuses.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct CompactPoset {
    pub rank_sizes: Vec<u32>,
    pub up: Vec<Vec<u64>>,
}

impl CompactPoset {
    pub fn point() -> Self {
        CompactPoset {
            rank_sizes: vec![1],
            up: Vec::new(),
        }
    }

    pub fn top_rank(&self) -> usize {
        self.rank_sizes.len() - 1
    }

    pub fn from_graph(g: &GradedGraph) -> Result<Self, EnumerateError> {
        if g.kind != GraphKind::Poset {
            return Err(EnumerateError::NotAPoset("graph kind".into()));
        }
        for (n, &p) in g.rank_sizes.iter().enumerate() {
            if p > 64 {
                return Err(EnumerateError::RankTooWide { rank: n, size: p });
            }
        }
        let mut up = Vec::with_capacity(g.up.len());
        for u in &g.up {
            let mut rows = Vec::with_capacity(u.rows());
            for i in 0..u.rows() {
                let mut mask = 0u64;
                for j in 0..u.cols() {
                    if u[(i, j)].is_one() {
                        mask |= 1 << j;
                    }
                }
                rows.push(mask);
            }
            up.push(rows);
        }
        Ok(CompactPoset {
            rank_sizes: g.rank_sizes.iter().map(|&p| p as u32).collect(),
            up,
        })
    }

    pub fn to_graph(&self, r: u32) -> GradedGraph {
        let rank_sizes: Vec<usize> = self.rank_sizes.iter().map(|&p| p as usize).collect();
        let up = self
            .up
            .iter()
            .enumerate()
            .map(|(n, rows)| {
                IntMatrix::from_fn(rank_sizes[n + 1], rank_sizes[n], |i, j| {
                    if rows[i] >> j & 1 == 1 {
                        BigInt::one()
                    } else {
                        BigInt::zero()
                    }
                })
            })
            .collect();
        GradedGraph::new(GraphKind::Poset, r, rank_sizes, up, None)
            .expect("compact poset is a valid graph")
    }
}

/// Target Gram matrix UD + rI over the top rank of a parent.
fn gram_target(parent: &CompactPoset, r: u32) -> Vec<Vec<i32>> {
    let p = *parent.rank_sizes.last().unwrap() as usize;
    let mut target = vec![vec![0i32; p]; p];
    if let Some(top_up) = parent.up.last() {
        for j in 0..p {
            for k in 0..p {
                target[j][k] = (top_up[j] & top_up[k]).count_ones() as i32;
            }
        }
    }
    for (j, row) in target.iter_mut().enumerate() {
        row[j] += r as i32;
    }
    target
}

struct GramSearch<F: FnMut(&[u64])> {
    p: usize,
    residual: Vec<Vec<i32>>,
    rows: Vec<u64>,
    emit: F,
}

impl<F: FnMut(&[u64])> GramSearch<F> {
    fn run(target: Vec<Vec<i32>>, emit: F) {
        let p = target.len();
        // only the diagonal and upper triangle are tracked
        let mut residual = target;
        for j in 0..p {
            for k in 0..j {
                residual[j][k] = 0;
            }
        }
        let mut search = GramSearch {
            p,
            residual,
            rows: Vec::new(),
            emit,
        };
        search.recurse(u64::MAX);
    }

    fn recurse(&mut self, max_mask: u64) {
        let Some(b) = (0..self.p).rev().find(|&j| self.residual[j][j] > 0) else {
            if self
                .residual
                .iter()
                .all(|row| row.iter().all(|&e| e == 0))
            {
                (self.emit)(&self.rows);
            }
            return;
        };
        // residual pair counts can never exceed the remaining row counts of
        // either column; columns above b are already closed
        for j in 0..self.p {
            for k in j + 1..self.p {
                let pair = self.residual[j][k];
                if pair > 0
                    && (pair > self.residual[j][j]
                        || pair > self.residual[k][k]
                        || k > b
                        || (j > b && self.residual[j][j] == 0))
                {
                    return;
                }
            }
        }
        if 1u64 << b > max_mask {
            return;
        }
        // every row until column b closes must contain b; the rest of the
        // support comes from columns still paired with b
        let candidates: Vec<usize> = (0..b)
            .rev()
            .filter(|&j| self.residual[j][j] > 0 && self.residual[j][b] > 0)
            .collect();
        let mut chosen = Vec::new();
        self.subsets(b, &candidates, 0, &mut chosen, max_mask);
    }

    fn subsets(
        &mut self,
        b: usize,
        candidates: &[usize],
        idx: usize,
        chosen: &mut Vec<usize>,
        max_mask: u64,
    ) {
        if idx == candidates.len() {
            let mut mask = 1u64 << b;
            for &j in chosen.iter() {
                mask |= 1 << j;
            }
            if mask > max_mask {
                return;
            }
            self.apply(b, chosen, -1);
            self.rows.push(mask);
            self.recurse(mask);
            self.rows.pop();
            self.apply(b, chosen, 1);
            return;
        }
        let j = candidates[idx];
        // include j first so masks are produced in decreasing order
        let compatible = chosen.iter().all(|&x| self.residual[j.min(x)][j.max(x)] > 0);
        if compatible {
            chosen.push(j);
            self.subsets(b, candidates, idx + 1, chosen, max_mask);
            chosen.pop();
        }
        self.subsets(b, candidates, idx + 1, chosen, max_mask);
    }

    fn apply(&mut self, b: usize, chosen: &[usize], delta: i32) {
        let mut support: Vec<usize> = chosen.to_vec();
        support.push(b);
        for (a, &x) in support.iter().enumerate() {
            self.residual[x][x] += delta;
            for &y in support.iter().skip(a + 1) {
                self.residual[x.min(y)][x.max(y)] += delta;
            }
        }
    }
}

/// All one-rank extensions of a parent as raw sorted-row bitmask matrices.
pub fn raw_extensions(parent: &CompactPoset, r: u32) -> Vec<Vec<u64>> {
    let mut out = Vec::new();
    GramSearch::run(gram_target(parent, r), |rows| out.push(rows.to_vec()));
    out
}

fn permute_bits(mask: u64, perm: &[u32]) -> u64 {
    let mut out = 0u64;
    for (new, &old) in perm.iter().enumerate() {
        if mask >> old & 1 == 1 {
            out |= 1 << new;
        }
    }
    out
}

/// Canonical labeling by individualization-refinement with automorphism
/// pruning. Colors are within-rank ordered partitions refined to equitability
/// by lower/upper neighbor color multisets; non-discrete cells are split by
/// individualizing each member in turn, and branches reachable from an
/// already-explored sibling by a discovered automorphism are skipped. The
/// certificate is the least concatenated up-matrix encoding over all leaves.
struct CanonSearch<'a> {
    cp: &'a CompactPoset,
    sizes: Vec<usize>,
    best: Option<(Vec<u8>, Vec<Vec<u32>>)>,
    /// rank-preserving automorphisms discovered as equal-certificate leaves
    autos: Vec<Vec<Vec<u32>>>,
    nodes: usize,
}

type Colors = Vec<Vec<u32>>;

impl<'a> CanonSearch<'a> {
    fn new(cp: &'a CompactPoset) -> Self {
        CanonSearch {
            cp,
            sizes: cp.rank_sizes.iter().map(|&p| p as usize).collect(),
            best: None,
            autos: Vec::new(),
            nodes: 0,
        }
    }

    /// Equitable refinement; new color ids follow (old color, signature)
    /// order, so splits are isomorphism-invariant.
    fn refine(&self, colors: &mut Colors) {
        let nr = self.sizes.len();
        loop {
            let mut changed = false;
            for n in 0..nr {
                let mut sigs: Vec<(Vec<u32>, usize)> = (0..self.sizes[n])
                    .map(|v| {
                        let mut sig = vec![colors[n][v]];
                        if n > 0 {
                            let mut down: Vec<u32> = (0..self.sizes[n - 1])
                                .filter(|&w| self.cp.up[n - 1][v] >> w & 1 == 1)
                                .map(|w| colors[n - 1][w])
                                .collect();
                            down.sort_unstable();
                            sig.push(u32::MAX);
                            sig.extend(down);
                        }
                        if n + 1 < nr {
                            let mut upc: Vec<u32> = (0..self.sizes[n + 1])
                                .filter(|&u| self.cp.up[n][u] >> v & 1 == 1)
                                .map(|u| colors[n + 1][u])
                                .collect();
                            upc.sort_unstable();
                            sig.push(u32::MAX);
                            sig.extend(upc);
                        }
                        (sig, v)
                    })
                    .collect();
                sigs.sort();
                let mut current = 0u32;
                for i in 0..sigs.len() {
                    if i > 0 && sigs[i].0 != sigs[i - 1].0 {
                        current += 1;
                    }
                    let v = sigs[i].1;
                    if colors[n][v] != current {
                        colors[n][v] = current;
                        changed = true;
                    }
                }
            }
            if !changed {
                return;
            }
        }
    }

    fn first_non_singleton(&self, colors: &Colors) -> Option<(usize, Vec<usize>)> {
        for n in 0..self.sizes.len() {
            let mut counts = vec![0u32; self.sizes[n]];
            for &c in &colors[n] {
                counts[c as usize] += 1;
            }
            if let Some(cell) = (0..self.sizes[n]).find(|&c| counts[c] > 1) {
                let members = (0..self.sizes[n])
                    .filter(|&v| colors[n][v] as usize == cell)
                    .collect();
                return Some((n, members));
            }
        }
        None
    }

    /// perms[n][position] = vertex, read off a discrete coloring.
    fn labeling(&self, colors: &Colors) -> Vec<Vec<u32>> {
        colors
            .iter()
            .enumerate()
            .map(|(n, rank_colors)| {
                let mut perm = vec![0u32; self.sizes[n]];
                for (v, &c) in rank_colors.iter().enumerate() {
                    perm[c as usize] = v as u32;
                }
                perm
            })
            .collect()
    }

    fn certificate(&self, perms: &[Vec<u32>]) -> Vec<u8> {
        let mut out = Vec::new();
        for (k, rows) in self.cp.up.iter().enumerate() {
            for pos in 0..rows.len() {
                let mask = permute_bits(rows[perms[k + 1][pos] as usize], &perms[k]);
                out.extend_from_slice(&mask.to_be_bytes());
            }
        }
        out
    }

    fn search(&mut self, mut colors: Colors, individualized: &mut Vec<(usize, usize)>) {
        self.nodes += 1;
        assert!(self.nodes < 5_000_000, "canonical search out of budget");
        self.refine(&mut colors);
        let Some((n, cell)) = self.first_non_singleton(&colors) else {
            let perms = self.labeling(&colors);
            let cert = self.certificate(&perms);
            match &self.best {
                None => self.best = Some((cert, perms)),
                Some((best_cert, best_perms)) => {
                    if cert < *best_cert {
                        self.best = Some((cert, perms));
                    } else if cert == *best_cert {
                        // equal leaves give an automorphism: v -> best(cur(v))
                        let auto: Vec<Vec<u32>> = (0..self.sizes.len())
                            .map(|k| {
                                let cur = &perms[k];
                                let mut inv_cur = vec![0u32; cur.len()];
                                for (pos, &v) in cur.iter().enumerate() {
                                    inv_cur[v as usize] = pos as u32;
                                }
                                (0..cur.len() as u32)
                                    .map(|v| best_perms[k][inv_cur[v as usize] as usize])
                                    .collect()
                            })
                            .collect();
                        self.autos.push(auto);
                    }
                }
            }
            return;
        };
        // orbits of the automorphisms fixing every individualized vertex
        let mut orbit: Vec<usize> = (0..self.sizes[n]).collect();
        for auto in &self.autos {
            let fixes_prefix = individualized
                .iter()
                .all(|&(rk, v)| auto[rk][v] as usize == v);
            if !fixes_prefix {
                continue;
            }
            for v in 0..self.sizes[n] {
                let w = auto[n][v] as usize;
                union(&mut orbit, v, w);
            }
        }
        let mut tried_roots: Vec<usize> = Vec::new();
        for &v in &cell {
            let root = find(&mut orbit, v);
            if tried_roots.contains(&root) {
                continue;
            }
            tried_roots.push(root);
            let mut branch = colors.clone();
            individualize(&mut branch[n], v);
            individualized.push((n, v));
            self.search(branch, individualized);
            individualized.pop();
        }
    }
}

fn find(parent: &mut [usize], mut x: usize) -> usize {
    while parent[x] != x {
        parent[x] = parent[parent[x]];
        x = parent[x];
    }
    x
}

fn union(parent: &mut [usize], a: usize, b: usize) {
    let ra = find(parent, a);
    let rb = find(parent, b);
    if ra != rb {
        parent[ra.max(rb)] = ra.min(rb);
    }
}

/// Splits v out of its cell, placing it first.
fn individualize(rank_colors: &mut [u32], v: usize) {
    let old = rank_colors[v];
    for c in rank_colors.iter_mut() {
        if *c > old {
            *c += 1;
        }
    }
    for (w, c) in rank_colors.iter_mut().enumerate() {
        if *c == old && w != v {
            *c += 1;
        }
    }
}

/// Canonical form of a partial poset under rank-preserving isomorphism.
/// Returns the certificate bytes together with the relabeled poset.
pub fn canonical_form(cp: &CompactPoset) -> (Vec<u8>, CompactPoset) {
    assert_eq!(cp.rank_sizes[0], 1, "canonical form needs a minimum element");
    let mut search = CanonSearch::new(cp);
    let colors: Colors = search.sizes.iter().map(|&p| vec![0u32; p]).collect();
    search.search(colors, &mut Vec::new());
    let (cert, perms) = search.best.expect("at least one leaf");
    let mut bytes = Vec::new();
    bytes.extend_from_slice(&(cp.rank_sizes.len() as u32).to_be_bytes());
    for &p in &cp.rank_sizes {
        bytes.extend_from_slice(&p.to_be_bytes());
    }
    bytes.extend_from_slice(&cert);
    let canonical = CompactPoset {
        rank_sizes: cp.rank_sizes.clone(),
        up: cp
            .up
            .iter()
            .enumerate()
            .map(|(k, rows)| {
                (0..rows.len())
                    .map(|pos| permute_bits(rows[perms[k + 1][pos] as usize], &perms[k]))
                    .collect()
            })
            .collect(),
    };
    (bytes, canonical)
}

/// A canonical representative of an isomorphism class of partial posets.
#[derive(Debug, Clone)]
pub struct PartialPosetClass {
    pub graph: GradedGraph,
    pub canon: Vec<u8>,
}

impl PartialPosetClass {
    pub fn from_graph(g: &GradedGraph) -> Result<Self, EnumerateError> {
        let compact = CompactPoset::from_graph(g)?;
        let report = g.validate_differential(g.r, g.top_rank());
        if !report.passed() {
            return Err(EnumerateError::NotAPoset(format!(
                "not partial {}-differential: {}",
                g.r,
                report.failure.map(|f| f.reason).unwrap_or_default()
            )));
        }
        let (canon, canonical) = canonical_form(&compact);
        Ok(PartialPosetClass {
            graph: canonical.to_graph(g.r),
            canon,
        })
    }
}

/// One-rank extensions of a parent class, deduplicated up to isomorphism
/// and returned as canonical representatives sorted by canonical key.
fn extend_classes(parent: &CompactPoset, r: u32) -> Vec<(Vec<u8>, CompactPoset)> {
    let mut seen: HashSet<Vec<u8>> = HashSet::new();
    let mut out: Vec<(Vec<u8>, CompactPoset)> = Vec::new();
    GramSearch::run(gram_target(parent, r), |rows| {
        let mut child = parent.clone();
        child.rank_sizes.push(rows.len() as u32);
        child.up.push(rows.to_vec());
        let (canon, canonical) = canonical_form(&child);
        if seen.insert(canon.clone()) {
            out.push((canon, canonical));
        }
    });
    out.sort_by(|a, b| a.0.cmp(&b.0));
    out
}

/// Public form of [`extend_classes`] over graph-level classes.
pub fn extensions(class: &PartialPosetClass, r: u32) -> Result<Vec<PartialPosetClass>, EnumerateError> {
    let compact = CompactPoset::from_graph(&class.graph)?;
    Ok(extend_classes(&compact, r)
        .into_iter()
        .map(|(canon, cp)| PartialPosetClass {
            graph: cp.to_graph(r),
            canon,
        })
        .collect())
}

#[derive(Debug, Clone, Default)]
pub struct CensusOptions {
    /// Keep the top-rank class representatives in the result.
    pub keep_top_classes: bool,
    /// Abort (flagging the result incomplete) past this many classes per rank.
    pub class_budget: Option<usize>,
    /// Write per-rank canonical keys (hex, sorted) into this directory.
    pub store_dir: Option<std::path::PathBuf>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Anomaly {
    pub rank_sizes: Vec<u32>,
    pub deltas: Vec<i64>,
}

#[derive(Debug)]
pub struct CensusResult {
    pub r: u32,
    pub max_rank: usize,
    pub counts: Vec<u64>,
    pub complete: bool,
    /// Rank-size vectors of every class at the deepest completed rank.
    pub top_rank_vectors: Vec<Vec<u32>>,
    pub top_classes: Option<Vec<PartialPosetClass>>,
}

/// Exhaustive rank-by-rank census of partial r-differential posets up to
/// rank-preserving isomorphism. Deterministic regardless of thread count:
/// parents are processed in canonical order and children are merged in
/// parent order.
pub fn census(r: u32, max_rank: usize, options: &CensusOptions) -> std::io::Result<CensusResult> {
    let mut current: Vec<(Vec<u8>, CompactPoset)> = {
        let point = CompactPoset::point();
        let (canon, canonical) = canonical_form(&point);
        vec![(canon, canonical)]
    };
    let mut counts = vec![1u64];
    let mut complete = true;
    if let Some(dir) = &options.store_dir {
        std::fs::create_dir_all(dir)?;
        write_store(dir, 0, &current)?;
    }
    for n in 0..max_rank {
        let children: Vec<Vec<(Vec<u8>, CompactPoset)>> = current
            .par_iter()
            .map(|(_, parent)| extend_classes(parent, r))
            .collect();
        current = children.into_iter().flatten().collect();
        counts.push(current.len() as u64);
        if let Some(dir) = &options.store_dir {
            write_store(dir, n + 1, &current)?;
        }
        if let Some(budget) = options.class_budget {
            if current.len() > budget {
                complete = false;
                break;
            }
        }
    }
    let top_rank_vectors: Vec<Vec<u32>> = current
        .iter()
        .map(|(_, cp)| cp.rank_sizes.clone())
        .collect();
    let top_classes = options.keep_top_classes.then(|| {
        current
            .iter()
            .map(|(canon, cp)| PartialPosetClass {
                graph: cp.to_graph(r),
                canon: canon.clone(),
            })
            .collect()
    });
    Ok(CensusResult {
        r,
        max_rank,
        counts,
        complete,
        top_rank_vectors,
        top_classes,
    })
}

fn write_store(
    dir: &std::path::Path,
    rank: usize,
    classes: &[(Vec<u8>, CompactPoset)],
) -> std::io::Result<()> {
    use std::io::Write;
    let mut keys: Vec<String> = classes
        .iter()
        .map(|(canon, _)| canon.iter().map(|b| format!("{b:02x}")).collect())
        .collect();
    keys.sort();
    let mut file = std::fs::File::create(dir.join(format!("rank_{rank}.keys")))?;
    for key in keys {
        writeln!(file, "{key}")?;
    }
    Ok(())
}

/// Classes whose first differences of rank sizes are not weakly increasing.
pub fn scan_rank_anomalies(result: &CensusResult) -> Vec<Anomaly> {
    result
        .top_rank_vectors
        .iter()
        .filter_map(|sizes| {
            let deltas: Vec<i64> = (1..sizes.len())
                .map(|i| sizes[i] as i64 - sizes[i - 1] as i64)
                .collect();
            deltas
                .windows(2)
                .any(|w| w[0] > w[1])
                .then(|| Anomaly {
                    rank_sizes: sizes.clone(),
                    deltas,
                })
        })
        .collect()
}
