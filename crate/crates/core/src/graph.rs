//! Graded graphs, up/down operators, and differential-poset validation.
//!
//! A graph is stored as its rank sizes together with one up-multiplicity
//! matrix per rank; a differential poset is the 0/1 case with `D = U^t`.
//! Everything is truncated at a finite top rank, and "r-differential" always
//! means "partial r-differential through the top rank".

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::matrix::IntMatrix;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum GraphError {
    #[error("rank {rank} out of range (top rank {top})")]
    RankOutOfRange { rank: usize, top: usize },
    #[error("up[{rank}] has shape {got_rows}x{got_cols}, expected {want_rows}x{want_cols}")]
    UpShape {
        rank: usize,
        got_rows: usize,
        got_cols: usize,
        want_rows: usize,
        want_cols: usize,
    },
    #[error("negative multiplicity at rank {rank}, entry ({row},{col})")]
    NegativeMultiplicity { rank: usize, row: usize, col: usize },
    #[error("poset invariant violated: {0}")]
    PosetInvariant(String),
    #[error("dual pair rank sizes differ at rank {0}")]
    PairRankMismatch(usize),
    #[error("no pure chain extension at rank {0}; input is not differential")]
    NoPureChain(usize),
    #[error("{0}")]
    Invalid(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GraphKind {
    /// 0/1 multiplicities, a minimum element, every vertex has a lower cover.
    Poset,
    /// Arbitrary nonnegative multiplicities.
    Graph,
}

/// A graded graph truncated at a finite top rank.
///
/// `up[n]` is the `p_{n+1} x p_n` matrix of edge multiplicities between
/// ranks n and n+1. The differential parameter `r` travels with the graph;
/// it is validated, never inferred.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GradedGraph {
    pub kind: GraphKind,
    pub r: u32,
    pub rank_sizes: Vec<usize>,
    pub up: Vec<IntMatrix>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub labels: Option<Vec<Vec<String>>>,
}

impl GradedGraph {
    pub fn new(
        kind: GraphKind,
        r: u32,
        rank_sizes: Vec<usize>,
        up: Vec<IntMatrix>,
        labels: Option<Vec<Vec<String>>>,
    ) -> Result<Self, GraphError> {
        let g = GradedGraph {
            kind,
            r,
            rank_sizes,
            up,
            labels,
        };
        g.check_shape()?;
        Ok(g)
    }

    fn check_shape(&self) -> Result<(), GraphError> {
        if self.rank_sizes.is_empty() {
            return Err(GraphError::Invalid("at least one rank required".into()));
        }
        if self.up.len() + 1 != self.rank_sizes.len() {
            return Err(GraphError::Invalid(format!(
                "{} up matrices for {} ranks",
                self.up.len(),
                self.rank_sizes.len()
            )));
        }
        for (n, u) in self.up.iter().enumerate() {
            if u.rows() != self.rank_sizes[n + 1] || u.cols() != self.rank_sizes[n] {
                return Err(GraphError::UpShape {
                    rank: n,
                    got_rows: u.rows(),
                    got_cols: u.cols(),
                    want_rows: self.rank_sizes[n + 1],
                    want_cols: self.rank_sizes[n],
                });
            }
            for i in 0..u.rows() {
                for j in 0..u.cols() {
                    if u[(i, j)].is_negative() {
                        return Err(GraphError::NegativeMultiplicity {
                            rank: n,
                            row: i,
                            col: j,
                        });
                    }
                }
            }
        }
        if let Some(labels) = &self.labels {
            if labels.len() != self.rank_sizes.len()
                || labels
                    .iter()
                    .zip(&self.rank_sizes)
                    .any(|(l, &p)| l.len() != p)
            {
                return Err(GraphError::Invalid("label shape mismatch".into()));
            }
        }
        if self.kind == GraphKind::Poset {
            if self.rank_sizes[0] != 1 {
                return Err(GraphError::PosetInvariant(
                    "a poset has a unique minimum (p_0 = 1)".into(),
                ));
            }
            for (n, u) in self.up.iter().enumerate() {
                for i in 0..u.rows() {
                    let mut covers = 0usize;
                    for j in 0..u.cols() {
                        let e = &u[(i, j)];
                        if !e.is_zero() && !e.is_one() {
                            return Err(GraphError::PosetInvariant(format!(
                                "multiplicity {} at rank {} entry ({},{})",
                                e, n, i, j
                            )));
                        }
                        if e.is_one() {
                            covers += 1;
                        }
                    }
                    if covers == 0 {
                        return Err(GraphError::PosetInvariant(format!(
                            "vertex {} at rank {} has no lower cover",
                            i,
                            n + 1
                        )));
                    }
                }
            }
        }
        Ok(())
    }

    /// Highest rank present.
    pub fn top_rank(&self) -> usize {
        self.rank_sizes.len() - 1
    }

    pub fn rank_size(&self, n: usize) -> usize {
        self.rank_sizes[n]
    }

    pub fn up_matrix(&self, n: usize) -> Result<&IntMatrix, GraphError> {
        self.up.get(n).ok_or(GraphError::RankOutOfRange {
            rank: n,
            top: self.top_rank(),
        })
    }

    /// DU_n = D_{n+1} U_n = U_n^t U_n.
    pub fn du(&self, n: usize) -> Result<IntMatrix, GraphError> {
        Ok(self.up_matrix(n)?.gram_ata())
    }

    /// UD_n = U_{n-1} D_n = U_{n-1} U_{n-1}^t, with UD_0 = 0.
    pub fn ud(&self, n: usize) -> Result<IntMatrix, GraphError> {
        if n > self.top_rank() {
            return Err(GraphError::RankOutOfRange {
                rank: n,
                top: self.top_rank(),
            });
        }
        if n == 0 {
            return Ok(IntMatrix::zero(self.rank_sizes[0], self.rank_sizes[0]));
        }
        Ok(self.up[n - 1].gram_aat())
    }

    /// Checks DU_i - UD_i = rI for 0 <= i < through_rank.
    pub fn validate_differential(&self, r: u32, through_rank: usize) -> DifferentialReport {
        if through_rank > self.top_rank() {
            return DifferentialReport {
                r,
                through_rank,
                failure: Some(DifferentialFailure {
                    rank: self.top_rank(),
                    row: 0,
                    col: 0,
                    got: BigInt::zero(),
                    expected: BigInt::zero(),
                    reason: format!(
                        "graph has top rank {}, cannot check through {}",
                        self.top_rank(),
                        through_rank
                    ),
                }),
            };
        }
        for i in 0..through_rank {
            let du = self.up[i].gram_ata();
            let ud = if i == 0 {
                IntMatrix::zero(self.rank_sizes[0], self.rank_sizes[0])
            } else {
                self.up[i - 1].gram_aat()
            };
            if let Some(f) = first_defect(&du, &ud, r, i) {
                return DifferentialReport {
                    r,
                    through_rank,
                    failure: Some(f),
                };
            }
        }
        DifferentialReport {
            r,
            through_rank,
            failure: None,
        }
    }

    /// Saturated chain from the minimum in which every element covers at
    /// most one element. Exists in every differential poset.
    pub fn find_pure_chain(&self, n: usize) -> Result<Vec<(usize, usize)>, GraphError> {
        if n > self.top_rank() {
            return Err(GraphError::RankOutOfRange {
                rank: n,
                top: self.top_rank(),
            });
        }
        let mut chain = vec![(0usize, 0usize)];
        let mut current = 0usize;
        for rank in 0..n {
            let u = &self.up[rank];
            let next = (0..u.rows()).find(|&v| {
                if u[(v, current)].is_zero() {
                    return false;
                }
                let lower_covers = (0..u.cols()).filter(|&w| !u[(v, w)].is_zero()).count();
                lower_covers <= 1
            });
            match next {
                Some(v) => {
                    chain.push((rank + 1, v));
                    current = v;
                }
                None => return Err(GraphError::NoPureChain(rank)),
            }
        }
        Ok(chain)
    }

    pub fn label(&self, rank: usize, index: usize) -> Option<&str> {
        self.labels
            .as_ref()
            .and_then(|l| l.get(rank))
            .and_then(|l| l.get(index))
            .map(|s| s.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DifferentialFailure {
    pub rank: usize,
    pub row: usize,
    pub col: usize,
    #[serde(with = "crate::matrix::bigint_string")]
    pub got: BigInt,
    #[serde(with = "crate::matrix::bigint_string")]
    pub expected: BigInt,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DifferentialReport {
    pub r: u32,
    pub through_rank: usize,
    pub failure: Option<DifferentialFailure>,
}

impl DifferentialReport {
    pub fn passed(&self) -> bool {
        self.failure.is_none()
    }
}

fn first_defect(
    du: &IntMatrix,
    ud: &IntMatrix,
    r: u32,
    rank: usize,
) -> Option<DifferentialFailure> {
    let rb = BigInt::from(r);
    for i in 0..du.rows() {
        for j in 0..du.cols() {
            let got = &du[(i, j)] - &ud[(i, j)];
            let expected = if i == j { rb.clone() } else { BigInt::zero() };
            if got != expected {
                return Some(DifferentialFailure {
                    rank,
                    row: i,
                    col: j,
                    got,
                    expected,
                    reason: format!("DU_{rank} - UD_{rank} differs from {r}I at ({i},{j})"),
                });
            }
        }
    }
    None
}

/// A pair of graded graphs on the same vertex ranks: U comes from `g1`
/// and D is the transpose of `g2`'s up maps.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DualPair {
    pub r: u32,
    pub g1: GradedGraph,
    pub g2: GradedGraph,
}

impl DualPair {
    pub fn new(r: u32, g1: GradedGraph, g2: GradedGraph) -> Result<Self, GraphError> {
        if g1.rank_sizes != g2.rank_sizes {
            let rank = g1
                .rank_sizes
                .iter()
                .zip(&g2.rank_sizes)
                .position(|(a, b)| a != b)
                .unwrap_or(g1.rank_sizes.len().min(g2.rank_sizes.len()));
            return Err(GraphError::PairRankMismatch(rank));
        }
        Ok(DualPair { r, g1, g2 })
    }

    pub fn top_rank(&self) -> usize {
        self.g1.top_rank()
    }

    pub fn rank_sizes(&self) -> &[usize] {
        &self.g1.rank_sizes
    }

    /// DU_n = D_{n+1} U_n with U from g1 and D from g2 transposed.
    pub fn du(&self, n: usize) -> Result<IntMatrix, GraphError> {
        let u = self.g1.up_matrix(n)?;
        let d_t = self.g2.up_matrix(n)?;
        Ok(d_t.transposed_mul(u))
    }

    /// UD_n = U_{n-1} D_n, zero at n = 0.
    pub fn ud(&self, n: usize) -> Result<IntMatrix, GraphError> {
        if n > self.top_rank() {
            return Err(GraphError::RankOutOfRange {
                rank: n,
                top: self.top_rank(),
            });
        }
        if n == 0 {
            let p0 = self.g1.rank_sizes[0];
            return Ok(IntMatrix::zero(p0, p0));
        }
        let u = self.g1.up_matrix(n - 1)?;
        let d_t = self.g2.up_matrix(n - 1)?;
        Ok(u.mul(&d_t.transpose()))
    }

    /// Checks the duality DU_i - UD_i = rI through the given rank.
    pub fn validate(&self, through_rank: usize) -> DifferentialReport {
        for i in 0..through_rank.min(self.top_rank()) {
            let du = self.du(i).expect("rank in range");
            let ud = self.ud(i).expect("rank in range");
            if let Some(f) = first_defect(&du, &ud, self.r, i) {
                return DifferentialReport {
                    r: self.r,
                    through_rank,
                    failure: Some(f),
                };
            }
        }
        DifferentialReport {
            r: self.r,
            through_rank,
            failure: None,
        }
    }
}

/// JSON envelope for either a single graph or a dual pair.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Subject {
    Pair(DualPair),
    Graph(GradedGraph),
}

#[cfg(test)]
mod tests {
    use super::*;

    // Young's lattice through rank 3, ranks ordered (), (1), (2)>(11),
    // (3)>(21)>(111) in descending lex.
    fn young3() -> GradedGraph {
        GradedGraph::new(
            GraphKind::Poset,
            1,
            vec![1, 1, 2, 3],
            vec![
                IntMatrix::from_rows(&[&[1]]),
                IntMatrix::from_rows(&[&[1], &[1]]),
                IntMatrix::from_rows(&[&[1, 0], &[1, 1], &[0, 1]]),
            ],
            None,
        )
        .unwrap()
    }

    #[test]
    fn du_fixtures() {
        let y = young3();
        assert_eq!(y.du(2).unwrap(), IntMatrix::from_rows(&[&[2, 1], &[1, 2]]));
        let u1 = y.up_matrix(1).unwrap();
        assert_eq!((u1.rows(), u1.cols()), (2, 1));
        assert!(y.up_matrix(3).is_err());
    }

    #[test]
    fn validation_passes_and_fails() {
        let y = young3();
        assert!(y.validate_differential(1, 3).passed());
        // doubled bottom edge: DU_0 = 4 != 0 + 1
        let doubled = GradedGraph::new(
            GraphKind::Graph,
            1,
            vec![1, 1],
            vec![IntMatrix::from_rows(&[&[2]])],
            None,
        )
        .unwrap();
        let report = doubled.validate_differential(1, 1);
        assert_eq!(report.failure.unwrap().rank, 0);
    }

    #[test]
    fn poset_invariants_rejected() {
        let bad = GradedGraph::new(
            GraphKind::Poset,
            1,
            vec![1, 1],
            vec![IntMatrix::from_rows(&[&[2]])],
            None,
        );
        assert!(matches!(bad, Err(GraphError::PosetInvariant(_))));
    }

    #[test]
    fn pure_chain_in_young() {
        let y = young3();
        let chain = y.find_pure_chain(3).unwrap();
        assert_eq!(chain.len(), 4);
        for (step, window) in chain.windows(2).enumerate() {
            let (_, lo) = window[0];
            let (rank, hi) = window[1];
            assert_eq!(rank, step + 1);
            let u = y.up_matrix(step).unwrap();
            assert!(u[(hi, lo)].is_one(), "consecutive entries must be covers");
            let lower = (0..u.cols()).filter(|&w| !u[(hi, w)].is_zero()).count();
            assert!(lower <= 1, "chain vertex with more than one lower cover");
        }
        assert_eq!(y.find_pure_chain(0).unwrap(), vec![(0, 0)]);
    }

    #[test]
    fn json_round_trip() {
        let y = young3();
        let text = serde_json::to_string(&y).unwrap();
        let back: GradedGraph = serde_json::from_str(&text).unwrap();
        assert_eq!(y, back);
        let subject: Subject = serde_json::from_str(&text).unwrap();
        assert!(matches!(subject, Subject::Graph(_)));
    }
}
