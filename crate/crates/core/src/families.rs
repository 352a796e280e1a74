//! Constructors for the concrete posets and graphs under study.
//!
//! Within a rank, partitions are ordered descending-lexicographically and
//! Fibonacci words lexicographically with 1_1 < ... < 1_r < 2. Smith forms do
//! not depend on these orders, but displayed fixture matrices do.

use std::collections::HashMap;

use num_bigint::BigInt;
use num_traits::{One, Zero};

use crate::graph::{DualPair, GradedGraph, GraphError, GraphKind};
use crate::matrix::IntMatrix;

/// A number partition: weakly decreasing positive parts.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Partition(pub Vec<u32>);

impl Partition {
    pub fn weight(&self) -> u32 {
        self.0.iter().sum()
    }

    /// Partitions obtained by adding one cell to the Ferrers diagram.
    pub fn covers_above(&self) -> Vec<Partition> {
        let parts = &self.0;
        let mut out = Vec::new();
        for i in 0..parts.len() {
            if i == 0 || parts[i] < parts[i - 1] {
                let mut next = parts.clone();
                next[i] += 1;
                out.push(Partition(next));
            }
        }
        let mut next = parts.clone();
        next.push(1);
        out.push(Partition(next));
        out
    }

    /// Partitions obtained by removing one cell.
    pub fn covers_below(&self) -> Vec<Partition> {
        let parts = &self.0;
        let mut out = Vec::new();
        for i in 0..parts.len() {
            if i + 1 == parts.len() || parts[i] > parts[i + 1] {
                let mut prev = parts.clone();
                prev[i] -= 1;
                if prev[i] == 0 {
                    prev.remove(i);
                }
                out.push(Partition(prev));
            }
        }
        out
    }

    pub fn display(&self) -> String {
        if self.0.is_empty() {
            "()".to_string()
        } else {
            self.0
                .iter()
                .map(|p| p.to_string())
                .collect::<Vec<_>>()
                .join(",")
        }
    }
}

/// All partitions of `n` in descending lexicographic order.
pub fn partitions_desc_lex(n: u32) -> Vec<Partition> {
    fn rec(remaining: u32, cap: u32, prefix: &mut Vec<u32>, out: &mut Vec<Partition>) {
        if remaining == 0 {
            out.push(Partition(prefix.clone()));
            return;
        }
        let first = remaining.min(cap);
        for part in (1..=first).rev() {
            prefix.push(part);
            rec(remaining - part, part, prefix, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    rec(n, n, &mut Vec::new(), &mut out);
    out
}

/// Strict partitions of `n` (distinct parts) in descending lexicographic order.
pub fn strict_partitions_desc_lex(n: u32) -> Vec<Partition> {
    fn rec(remaining: u32, cap: u32, prefix: &mut Vec<u32>, out: &mut Vec<Partition>) {
        if remaining == 0 {
            out.push(Partition(prefix.clone()));
            return;
        }
        let first = remaining.min(cap);
        for part in (1..=first).rev() {
            prefix.push(part);
            rec(remaining - part, part - 1, prefix, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    rec(n, n, &mut Vec::new(), &mut out);
    out
}

fn cover_graph<T: std::hash::Hash + Eq + Clone>(
    kind: GraphKind,
    r: u32,
    ranks: Vec<Vec<T>>,
    covers_below: impl Fn(&T) -> Vec<T>,
    label: impl Fn(&T) -> String,
) -> GradedGraph {
    let rank_sizes: Vec<usize> = ranks.iter().map(|v| v.len()).collect();
    let index: Vec<HashMap<&T, usize>> = ranks
        .iter()
        .map(|v| v.iter().enumerate().map(|(i, t)| (t, i)).collect())
        .collect();
    let mut up = Vec::with_capacity(ranks.len().saturating_sub(1));
    for n in 0..ranks.len() - 1 {
        let mut m = IntMatrix::zero(rank_sizes[n + 1], rank_sizes[n]);
        for (i, v) in ranks[n + 1].iter().enumerate() {
            for lower in covers_below(v) {
                let j = index[n][&lower];
                m[(i, j)] = BigInt::one();
            }
        }
        up.push(m);
    }
    let labels = ranks
        .iter()
        .map(|v| v.iter().map(&label).collect())
        .collect();
    GradedGraph::new(kind, r, rank_sizes, up, Some(labels)).expect("constructed graph is valid")
}

/// Young's lattice of number partitions through the given rank.
pub fn young(max_rank: u32) -> GradedGraph {
    let ranks: Vec<Vec<Partition>> = (0..=max_rank).map(partitions_desc_lex).collect();
    cover_graph(
        GraphKind::Poset,
        1,
        ranks,
        |p| p.covers_below(),
        |p| p.display(),
    )
}

/// Componentwise-order Cartesian product of two graded posets.
///
/// Rank n of the product is blocks (i, n-i) for i = 0..=n, each block the
/// pairs (a, b) with the first factor's index major.
pub fn cartesian_product(g: &GradedGraph, h: &GradedGraph, max_rank: u32) -> GradedGraph {
    assert!(
        g.rank_sizes[0] == 1 && h.rank_sizes[0] == 1,
        "product factors need a minimum element"
    );
    let max_rank = max_rank as usize;
    assert!(
        g.top_rank() >= max_rank && h.top_rank() >= max_rank,
        "factors too short for requested rank"
    );
    let block_offsets = |n: usize| -> Vec<usize> {
        let mut offs = vec![0usize];
        for i in 0..=n {
            offs.push(offs[i] + g.rank_sizes[i] * h.rank_sizes[n - i]);
        }
        offs
    };
    let mut rank_sizes = Vec::with_capacity(max_rank + 1);
    for n in 0..=max_rank {
        rank_sizes.push(*block_offsets(n).last().unwrap());
    }
    let mut up = Vec::with_capacity(max_rank);
    for n in 0..max_rank {
        let offs_lo = block_offsets(n);
        let offs_hi = block_offsets(n + 1);
        let mut m = IntMatrix::zero(rank_sizes[n + 1], rank_sizes[n]);
        for i in 0..=n {
            let pg = g.rank_sizes[i];
            let ph = h.rank_sizes[n - i];
            // (a, b) -> (a, b') via h's up map: block i -> block i
            let hu = h.up_matrix(n - i).expect("rank in range");
            for a in 0..pg {
                for bi in 0..hu.rows() {
                    for bj in 0..ph {
                        if !hu[(bi, bj)].is_zero() {
                            let row = offs_hi[i] + a * hu.rows() + bi;
                            let col = offs_lo[i] + a * ph + bj;
                            m[(row, col)] = hu[(bi, bj)].clone();
                        }
                    }
                }
            }
            // (a, b) -> (a', b) via g's up map: block i -> block i+1
            let gu = g.up_matrix(i).expect("rank in range");
            for ai in 0..gu.rows() {
                for aj in 0..pg {
                    if !gu[(ai, aj)].is_zero() {
                        for b in 0..ph {
                            let row = offs_hi[i + 1] + ai * ph + b;
                            let col = offs_lo[i] + aj * ph + b;
                            m[(row, col)] = gu[(ai, aj)].clone();
                        }
                    }
                }
            }
        }
        up.push(m);
    }
    let kind = if g.kind == GraphKind::Poset && h.kind == GraphKind::Poset {
        GraphKind::Poset
    } else {
        GraphKind::Graph
    };
    GradedGraph::new(kind, g.r + h.r, rank_sizes, up, None).expect("product graph is valid")
}

/// The r-fold Cartesian power of Young's lattice.
pub fn young_power(r: u32, max_rank: u32) -> GradedGraph {
    assert!(r >= 1);
    let y = young(max_rank);
    let mut acc = y.clone();
    for _ in 1..r {
        acc = cartesian_product(&acc, &y, max_rank);
    }
    acc
}

/// A word over the alphabet 1_1 < ... < 1_r < 2, stored as letter codes
/// 1..=r for the light letters and r+1 for the heavy one.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct FibWord(pub Vec<u8>);

impl FibWord {
    pub fn rank(&self, r: u8) -> u32 {
        self.0
            .iter()
            .map(|&c| if c == r + 1 { 2u32 } else { 1 })
            .sum()
    }

    pub fn display(&self, r: u8) -> String {
        self.0
            .iter()
            .map(|&c| {
                if c == r + 1 {
                    "2".to_string()
                } else if r == 1 {
                    "1".to_string()
                } else {
                    format!("1_{c}")
                }
            })
            .collect::<Vec<_>>()
            .join("")
    }

    /// Words covered by this one: change a 2 with only 2s to its left into
    /// any 1_i, or delete the first light letter.
    fn covers_below(&self, r: u8) -> Vec<FibWord> {
        let two = r + 1;
        let mut out = Vec::new();
        for pos in 0..self.0.len() {
            if self.0[pos] != two {
                break;
            }
            for i in 1..=r {
                let mut w = self.0.clone();
                w[pos] = i;
                out.push(FibWord(w));
            }
        }
        if let Some(pos) = self.0.iter().position(|&c| c != two) {
            let mut w = self.0.clone();
            w.remove(pos);
            out.push(FibWord(w));
        }
        out
    }
}

fn fib_words_of_rank(r: u8, n: u32) -> Vec<FibWord> {
    if n == 0 {
        return vec![FibWord(Vec::new())];
    }
    let mut out = Vec::new();
    for first in 1..=r {
        for w in fib_words_of_rank(r, n - 1) {
            let mut v = Vec::with_capacity(w.0.len() + 1);
            v.push(first);
            v.extend_from_slice(&w.0);
            out.push(FibWord(v));
        }
    }
    if n >= 2 {
        for w in fib_words_of_rank(r, n - 2) {
            let mut v = Vec::with_capacity(w.0.len() + 1);
            v.push(r + 1);
            v.extend_from_slice(&w.0);
            out.push(FibWord(v));
        }
    }
    out
}

/// The Fibonacci r-differential poset Z(r) truncated at `max_rank`.
pub fn fibonacci(r: u32, max_rank: u32) -> GradedGraph {
    assert!((1..=63).contains(&r), "r out of supported range");
    let r8 = r as u8;
    let ranks: Vec<Vec<FibWord>> = (0..=max_rank).map(|n| fib_words_of_rank(r8, n)).collect();
    cover_graph(
        GraphKind::Poset,
        r,
        ranks,
        |w| w.covers_below(r8),
        |w| w.display(r8),
    )
}

/// One-point poset of rank 0, the seed for Wagner extension.
pub fn point(r: u32) -> GradedGraph {
    GradedGraph::new(GraphKind::Poset, r, vec![1], Vec::new(), None).expect("point is valid")
}

/// Extends a partial r-differential poset by one rank: a starred copy of
/// rank n-1 wired to common upper covers, then r pendants over each top
/// vertex. The pendant block of the new up matrix is r stacked identities.
pub fn wagner_extend(g: &GradedGraph) -> Result<GradedGraph, GraphError> {
    let r = g.r;
    let top = g.top_rank();
    let report = g.validate_differential(r, top);
    if !report.passed() {
        return Err(GraphError::Invalid(format!(
            "input is not partial {r}-differential: {}",
            report.failure.map(|f| f.reason).unwrap_or_default()
        )));
    }
    let p_top = g.rank_sizes[top];
    let p_prev = if top == 0 { 0 } else { g.rank_sizes[top - 1] };
    let new_size = p_prev + (r as usize) * p_top;
    let mut m = IntMatrix::zero(new_size, p_top);
    if top > 0 {
        let u_prev = &g.up[top - 1];
        // starred vertex v* covers exactly the top vertices covering v
        for v in 0..p_prev {
            for x in 0..p_top {
                if !u_prev[(x, v)].is_zero() {
                    m[(v, x)] = BigInt::one();
                }
            }
        }
    }
    for x in 0..p_top {
        for copy in 0..r as usize {
            m[(p_prev + copy * p_top + x, x)] = BigInt::one();
        }
    }
    let mut rank_sizes = g.rank_sizes.clone();
    rank_sizes.push(new_size);
    let mut up = g.up.clone();
    up.push(m);
    let labels = g.labels.as_ref().map(|ls| {
        let mut ls = ls.clone();
        let mut new_labels = Vec::with_capacity(new_size);
        for v in 0..p_prev {
            new_labels.push(format!("{}*", ls[top - 1][v]));
        }
        for copy in 0..r as usize {
            for x in 0..p_top {
                new_labels.push(format!("{}+{}", ls[top][x], copy + 1));
            }
        }
        ls.push(new_labels);
        ls
    });
    GradedGraph::new(GraphKind::Poset, r, rank_sizes, up, labels)
}

/// Edge-weight rule for shifted shapes: the weight of a cover depends only
/// on whether the added cell is on the shifted diagonal (a new part 1).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EdgeRule {
    pub diagonal: u8,
    pub off_diagonal: u8,
}

impl EdgeRule {
    pub const ONES: EdgeRule = EdgeRule {
        diagonal: 1,
        off_diagonal: 1,
    };
    pub const DOUBLE_OFF_DIAGONAL: EdgeRule = EdgeRule {
        diagonal: 1,
        off_diagonal: 2,
    };
}

/// The graded graph of shifted shapes (strict partitions) with the given
/// edge-weight rule; all-ones weights give the shifted-shapes lattice.
pub fn shifted_graph(rule: EdgeRule, max_rank: u32) -> GradedGraph {
    let ranks: Vec<Vec<Partition>> = (0..=max_rank).map(strict_partitions_desc_lex).collect();
    let rank_sizes: Vec<usize> = ranks.iter().map(|v| v.len()).collect();
    let index: Vec<HashMap<&Partition, usize>> = ranks
        .iter()
        .map(|v| v.iter().enumerate().map(|(i, t)| (t, i)).collect())
        .collect();
    let mut up = Vec::new();
    for n in 0..ranks.len() - 1 {
        let mut m = IntMatrix::zero(rank_sizes[n + 1], rank_sizes[n]);
        for (j, lower) in ranks[n].iter().enumerate() {
            // add a cell: extend an existing part (off-diagonal cell) or
            // open a new part of size 1 (diagonal cell)
            for i in 0..lower.0.len() {
                if i == 0 || lower.0[i] + 1 < lower.0[i - 1] {
                    let mut next = lower.0.clone();
                    next[i] += 1;
                    let row = index[n + 1][&Partition(next)];
                    m[(row, j)] = BigInt::from(rule.off_diagonal);
                }
            }
            if lower.0.last().map_or(true, |&p| p > 1) {
                let mut next = lower.0.clone();
                next.push(1);
                let row = index[n + 1][&Partition(next)];
                m[(row, j)] = BigInt::from(rule.diagonal);
            }
        }
        up.push(m);
    }
    let labels = ranks
        .iter()
        .map(|v| v.iter().map(|p| p.display()).collect())
        .collect();
    let kind = if rule == EdgeRule::ONES {
        GraphKind::Poset
    } else {
        GraphKind::Graph
    };
    GradedGraph::new(kind, 1, rank_sizes, up, Some(labels)).expect("shifted graph is valid")
}

/// The displayed DU_7 of the shifted-shape pair, rows and columns in
/// ascending lex order (421, 43, 52, 61, 7).
pub fn shifted_du7_fixture() -> IntMatrix {
    IntMatrix::from_rows(&[
        &[4, 2, 2, 0, 0],
        &[1, 3, 2, 0, 0],
        &[1, 2, 5, 2, 0],
        &[0, 0, 2, 4, 2],
        &[0, 0, 0, 1, 3],
    ])
}

/// Calibrates the shifted-shape edge convention: among the four candidate
/// (up, down) weight rules with unit diagonal weights, exactly one satisfies
/// DU - UD = I through rank 8 and reproduces the DU_7 fixture up to a
/// simultaneous row/column permutation.
pub fn calibrate_shifted_rules() -> (EdgeRule, EdgeRule) {
    let candidates = [EdgeRule::ONES, EdgeRule::DOUBLE_OFF_DIAGONAL];
    let mut winner = None;
    for up_rule in candidates {
        for down_rule in candidates {
            let pair = shifted_pair_with_rules(up_rule, down_rule, 8);
            if !pair.validate(8).passed() {
                continue;
            }
            let du7 = pair.du(7).expect("rank in range");
            if equal_up_to_simultaneous_permutation(&du7, &shifted_du7_fixture()) {
                assert!(winner.is_none(), "shifted-shape calibration is not unique");
                winner = Some((up_rule, down_rule));
            }
        }
    }
    winner.expect("no shifted-shape convention matches")
}

pub fn equal_up_to_simultaneous_permutation(a: &IntMatrix, b: &IntMatrix) -> bool {
    if a.rows() != b.rows() || a.cols() != b.cols() || !a.is_square() {
        return false;
    }
    let n = a.rows();
    let mut perm: Vec<usize> = (0..n).collect();
    permute_search(a, b, &mut perm, 0)
}

fn permute_search(a: &IntMatrix, b: &IntMatrix, perm: &mut Vec<usize>, k: usize) -> bool {
    let n = perm.len();
    if k == n {
        return true;
    }
    for idx in k..n {
        perm.swap(k, idx);
        let ok = (0..=k)
            .all(|i| a[(perm[i], perm[k])] == b[(i, k)] && a[(perm[k], perm[i])] == b[(k, i)]);
        if ok && permute_search(a, b, perm, k + 1) {
            return true;
        }
        perm.swap(k, idx);
    }
    false
}

/// The dual graded graph pair on shifted shapes with the calibrated default
/// convention (up edges all one, down edges doubled off the diagonal).
pub fn shifted_shapes_pair(max_rank: u32) -> DualPair {
    static RULES: std::sync::OnceLock<(EdgeRule, EdgeRule)> = std::sync::OnceLock::new();
    let (up_rule, down_rule) = *RULES.get_or_init(calibrate_shifted_rules);
    shifted_pair_with_rules(up_rule, down_rule, max_rank)
}

pub fn shifted_pair_with_rules(up_rule: EdgeRule, down_rule: EdgeRule, max_rank: u32) -> DualPair {
    let g1 = shifted_graph(up_rule, max_rank);
    let g2 = shifted_graph(down_rule, max_rank);
    DualPair::new(1, g1, g2).expect("rank sizes agree")
}

/// Order on partitions of n used for the complete-homogeneous basis:
/// partitions with no part 1 first (descending lex), then recursively the
/// order for n-1 with a part 1 appended.
pub fn h_basis_order(n: u32) -> Vec<Partition> {
    if n == 0 {
        return vec![Partition(Vec::new())];
    }
    let mut out: Vec<Partition> = partitions_desc_lex(n)
        .into_iter()
        .filter(|p| p.0.last().map_or(true, |&x| x > 1))
        .collect();
    for mut p in h_basis_order(n - 1) {
        p.0.push(1);
        out.push(p);
    }
    out
}

/// Matrix of DU_n + kI on the h-basis, no-part-1 partitions first.
///
/// DU sends h_lambda to h_lambda plus the sum over parts of h with that part
/// decremented and a part 1 appended; equal parts merge into a coefficient.
pub fn young_du_h_basis(n: u32, k: i64) -> IntMatrix {
    assert!(n >= 1);
    let order = h_basis_order(n);
    let index: HashMap<&Partition, usize> =
        order.iter().enumerate().map(|(i, p)| (p, i)).collect();
    let mut m = IntMatrix::zero(order.len(), order.len());
    for (col, lambda) in order.iter().enumerate() {
        m[(col, col)] = BigInt::from(k + 1);
        for i in 0..lambda.0.len() {
            if i > 0 && lambda.0[i] == lambda.0[i - 1] {
                continue; // equal parts give one image; multiplicity below
            }
            let mult = lambda.0.iter().filter(|&&x| x == lambda.0[i]).count();
            let mut image = lambda.0.clone();
            image[i] -= 1;
            if image[i] == 0 {
                image.remove(i);
            }
            image.push(1);
            image.sort_unstable_by(|a, b| b.cmp(a));
            let row = index[&Partition(image)];
            let v = &m[(row, col)] + BigInt::from(mult as u64);
            m[(row, col)] = v;
        }
    }
    m
}

/// Exhibits the unitriangular p_{n-1} x p_{n-1} submatrix of DU_n + kI in
/// the lex-ordered irreducible basis: rows indexed by (mu_1+1, mu_2, ...)
/// and columns by (mu, 1) as mu runs over partitions of n-1. Verifies the
/// unit diagonal and vanishing upper triangle, certifying that at least
/// p_{n-1} Smith entries are 1 for every shift k.
pub fn ones_in_s_basis_bound(n: u32) -> usize {
    assert!(n >= 2);
    let rank_n = partitions_desc_lex(n);
    let index: HashMap<&Partition, usize> =
        rank_n.iter().enumerate().map(|(i, p)| (p, i)).collect();
    let mus = partitions_desc_lex(n - 1);
    let rows: Vec<usize> = mus
        .iter()
        .map(|mu| {
            let mut p = mu.0.clone();
            if p.is_empty() {
                p.push(1);
            } else {
                p[0] += 1;
            }
            index[&Partition(p)]
        })
        .collect();
    let cols: Vec<usize> = mus
        .iter()
        .map(|mu| {
            let mut p = mu.0.clone();
            p.push(1);
            index[&Partition(p)]
        })
        .collect();
    let du = young(n + 1).du(n as usize).expect("rank in range");
    for (a, &ri) in rows.iter().enumerate() {
        for (b, &cj) in cols.iter().enumerate() {
            if a == b {
                assert!(
                    ri != cj && du[(ri, cj)].is_one(),
                    "submatrix diagonal not unit at mu={:?}",
                    mus[a]
                );
            } else if b > a {
                assert!(
                    ri != cj && du[(ri, cj)].is_zero(),
                    "submatrix upper entry nonzero at ({:?},{:?})",
                    mus[a],
                    mus[b]
                );
            }
        }
    }
    mus.len()
}

/// Rank sizes of a graded graph as u64 (convenience for predictions).
pub fn rank_sizes_u64(g: &GradedGraph) -> Vec<u64> {
    g.rank_sizes.iter().map(|&p| p as u64).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::smith::snf;
    use num_traits::ToPrimitive;

    /// Independent partition-count oracle (DP over largest allowed part).
    fn partition_count(n: usize) -> u64 {
        let mut table = vec![vec![0u64; n + 1]; n + 1];
        for row in table.iter_mut() {
            row[0] = 1;
        }
        for cap in 1..=n {
            for m in 1..=n {
                table[cap][m] = table[cap - 1][m] + if m >= cap { table[cap][m - cap] } else { 0 };
            }
        }
        table[n][n]
    }

    #[test]
    fn young_rank_sizes_match_partition_numbers() {
        let y = young(10);
        let expect: Vec<usize> = (0..=10).map(|n| partition_count(n) as usize).collect();
        assert_eq!(y.rank_sizes, expect);
        assert_eq!(y.rank_sizes, vec![1, 1, 2, 3, 5, 7, 11, 15, 22, 30, 42]);
    }

    #[test]
    fn young_cover_fixtures() {
        let p = Partition(vec![2, 1]);
        let above: Vec<Vec<u32>> = p.covers_above().into_iter().map(|q| q.0).collect();
        assert_eq!(above, vec![vec![3, 1], vec![2, 2], vec![2, 1, 1]]);
        assert!(young(8).validate_differential(1, 8).passed());
    }

    #[test]
    fn partitions_are_desc_lex() {
        let ps: Vec<Vec<u32>> = partitions_desc_lex(5).into_iter().map(|p| p.0).collect();
        assert_eq!(
            ps,
            vec![
                vec![5],
                vec![4, 1],
                vec![3, 2],
                vec![3, 1, 1],
                vec![2, 2, 1],
                vec![2, 1, 1, 1],
                vec![1, 1, 1, 1, 1],
            ]
        );
        assert_eq!(partitions_desc_lex(0), vec![Partition(Vec::new())]);
    }

    #[test]
    fn product_rank_sizes_convolve() {
        let y = young(5);
        let yy = cartesian_product(&y, &y, 5);
        // coefficient-wise square of the partition generating function
        let mut convolved: Vec<usize> = Vec::new();
        for n in 0..=5usize {
            convolved.push(
                (0..=n)
                    .map(|i| y.rank_sizes[i] * y.rank_sizes[n - i])
                    .sum(),
            );
        }
        assert_eq!(yy.rank_sizes, convolved);
        assert_eq!(yy.rank_sizes, vec![1, 2, 5, 10, 20, 36]);
        assert!(yy.validate_differential(2, 5).passed());
    }

    #[test]
    fn product_with_point_is_identity() {
        let y = young(4);
        let p = point(0);
        // the point only has rank 0, so the product truncates there; extend
        // the point trivially instead by taking the product the other way
        let same = cartesian_product(&y, &p, 0);
        assert_eq!(same.rank_sizes, vec![1]);
        // a one-point rank-0 factor times Y through rank 4 equals Y when the
        // point is padded out as the trivial chain of empty ranks is not
        // representable; check the algebra instead on rank 0..=4 blocks
        let yy = cartesian_product(&y, &y, 4);
        for n in 0..4 {
            assert_eq!(
                yy.up_matrix(n).unwrap().cols(),
                yy.rank_sizes[n],
                "shape sanity at {n}"
            );
        }
    }

    #[test]
    fn fibonacci_rank_sizes() {
        let z1 = fibonacci(1, 7);
        assert_eq!(z1.rank_sizes, vec![1, 1, 2, 3, 5, 8, 13, 21]);
        let z2 = fibonacci(2, 5);
        assert_eq!(z2.rank_sizes, vec![1, 2, 5, 12, 29, 70]);
        for n in 1..z2.top_rank() {
            assert_eq!(
                z2.rank_sizes[n + 1],
                z2.rank_sizes[n - 1] + 2 * z2.rank_sizes[n]
            );
        }
        assert!(z1.validate_differential(1, 7).passed());
        assert!(z2.validate_differential(2, 5).passed());
    }

    #[test]
    fn fibonacci_up_maps_have_recursive_block_form() {
        // U_n = [I; ...; I; U_{n-1}^t] in lex order: r identity blocks from
        // the light-letter prefixes, then the down map from the 2-prefix.
        for r in [1u32, 2] {
            let z = fibonacci(r, 5);
            for n in 2..=4usize {
                let u = z.up_matrix(n).unwrap();
                let p_n = z.rank_sizes[n];
                let p_prev = z.rank_sizes[n - 1];
                let d = z.up_matrix(n - 1).unwrap().transpose();
                assert_eq!(u.rows(), r as usize * p_n + p_prev);
                for block in 0..r as usize {
                    for i in 0..p_n {
                        for j in 0..p_n {
                            let expect = i64::from(i == j);
                            assert_eq!(
                                u[(block * p_n + i, j)].to_i64().unwrap(),
                                expect,
                                "identity block {block} at ({i},{j}), n={n}, r={r}"
                            );
                        }
                    }
                }
                for i in 0..p_prev {
                    for j in 0..p_n {
                        assert_eq!(u[(r as usize * p_n + i, j)], d[(i, j)], "D block, n={n}");
                    }
                }
            }
        }
    }

    #[test]
    fn fibonacci_z2_up1_is_5_by_2() {
        let z2 = fibonacci(2, 2);
        let u = z2.up_matrix(1).unwrap();
        assert_eq!((u.rows(), u.cols()), (5, 2));
    }

    #[test]
    fn wagner_extension_fixtures() {
        let mut g = point(1);
        g = wagner_extend(&g).unwrap();
        assert_eq!(g.rank_sizes, vec![1, 1]);
        g = wagner_extend(&g).unwrap();
        assert_eq!(g.rank_sizes, vec![1, 1, 2]);
        assert!(g.validate_differential(1, 2).passed());

        let mut h = point(2);
        h = wagner_extend(&h).unwrap();
        assert_eq!(h.rank_sizes, vec![1, 2]);
        h = wagner_extend(&h).unwrap();
        assert_eq!(h.rank_sizes, vec![1, 2, 5]);
        assert!(h.validate_differential(2, 2).passed());

        // pendant block of the new top is r stacked identities
        let u = h.up_matrix(1).unwrap();
        for copy in 0..2usize {
            for x in 0..2usize {
                for y in 0..2usize {
                    let expect = i64::from(x == y);
                    assert_eq!(u[(1 + copy * 2 + x, y)].to_i64().unwrap(), expect);
                }
            }
        }
    }

    #[test]
    fn shifted_rank_sizes_and_delta_dip() {
        let pair = shifted_shapes_pair(9);
        assert_eq!(pair.rank_sizes(), &[1, 1, 1, 2, 2, 3, 4, 5, 6, 8]);
        // delta p_4 = 0 < 1 = delta p_3
        assert_eq!(pair.rank_sizes()[4] - pair.rank_sizes()[3], 0);
        assert!(pair.validate(9).passed());
    }

    #[test]
    fn shifted_du7_matches_fixture_up_to_order_reversal() {
        let pair = shifted_shapes_pair(8);
        let du7 = pair.du(7).unwrap();
        // our ranks are descending lex; the displayed fixture is ascending
        let n = du7.rows();
        let reversed = IntMatrix::from_fn(n, n, |i, j| du7[(n - 1 - i, n - 1 - j)].clone());
        assert_eq!(reversed, shifted_du7_fixture());
        assert_eq!(
            snf(&du7, false)
                .diagonal
                .iter()
                .map(|s| s.to_i64().unwrap())
                .collect::<Vec<_>>(),
            vec![1, 1, 1, 2, 120]
        );
    }

    #[test]
    fn shifted_calibration_is_unique() {
        let (up_rule, down_rule) = calibrate_shifted_rules();
        assert_eq!(up_rule, EdgeRule::ONES);
        assert_eq!(down_rule, EdgeRule::DOUBLE_OFF_DIAGONAL);
        // the transposed convention validates but does not match the fixture
        let other = shifted_pair_with_rules(EdgeRule::DOUBLE_OFF_DIAGONAL, EdgeRule::ONES, 8);
        assert!(other.validate(8).passed());
        assert!(!equal_up_to_simultaneous_permutation(
            &other.du(7).unwrap(),
            &shifted_du7_fixture()
        ));
    }

    #[test]
    fn h_basis_order_and_fixture_matrix() {
        let order: Vec<Vec<u32>> = h_basis_order(5).into_iter().map(|p| p.0).collect();
        assert_eq!(
            order,
            vec![
                vec![5],
                vec![3, 2],
                vec![4, 1],
                vec![2, 2, 1],
                vec![3, 1, 1],
                vec![2, 1, 1, 1],
                vec![1, 1, 1, 1, 1],
            ]
        );
        for k in [0i64, 1, -5] {
            let m = young_du_h_basis(5, k);
            let expect = IntMatrix::from_rows(&[
                &[k + 1, 0, 0, 0, 0, 0, 0],
                &[0, k + 1, 0, 0, 0, 0, 0],
                &[1, 0, k + 2, 0, 0, 0, 0],
                &[0, 1, 0, k + 2, 0, 0, 0],
                &[0, 1, 1, 0, k + 3, 0, 0],
                &[0, 0, 0, 2, 1, k + 4, 0],
                &[0, 0, 0, 0, 0, 1, k + 6],
            ]);
            assert_eq!(m, expect, "k={k}");
        }
        // the 1x1 case: DU(h_1) = 2 h_1
        assert_eq!(young_du_h_basis(1, 0), IntMatrix::from_rows(&[&[2]]));
    }

    #[test]
    fn h_basis_snf_agrees_with_s_basis() {
        let y = young(9);
        for n in 1..=8u32 {
            for k in [-2i64, 0, 1, 3] {
                let via_h = snf(&young_du_h_basis(n, k), false);
                let du = y.du(n as usize).unwrap();
                let via_s = snf(&du.add_scalar_identity(&BigInt::from(k)), false);
                assert_eq!(via_h.diagonal, via_s.diagonal, "n={n} k={k}");
            }
        }
    }

    #[test]
    fn s_basis_unitriangular_bound() {
        assert_eq!(ones_in_s_basis_bound(2), 1);
        assert_eq!(ones_in_s_basis_bound(5), 5);
        assert_eq!(ones_in_s_basis_bound(6), 7);
    }
}
