//! Predictions driven by rank sizes alone: spectra of DU/UD, parametrized
//! Smith entries, their integer specializations, ones counts, and the
//! closed-form last entry for the tower posets.
//!
//! Throughout, `delta p_n = p_n - p_{n-1}` with `p_k = 0` for negative k.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum PredictError {
    #[error("rank sizes only reach {have}, need {need}")]
    NotEnoughRanks { have: usize, need: usize },
    #[error("second-difference hypothesis fails at rank {rank}: delta p_{rank} < delta p_{}", rank - 1)]
    HypothesisViolated { rank: usize },
}

/// Product of monic linear factors (t + root)^mult over Z.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FactoredPoly {
    pub factors: Vec<Factor>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Factor {
    pub root: i64,
    pub mult: u32,
}

impl FactoredPoly {
    pub fn one() -> Self {
        FactoredPoly {
            factors: Vec::new(),
        }
    }

    pub fn from_roots(roots: impl IntoIterator<Item = i64>) -> Self {
        let mut counts: BTreeMap<i64, u32> = BTreeMap::new();
        for r in roots {
            *counts.entry(r).or_insert(0) += 1;
        }
        FactoredPoly {
            factors: counts
                .into_iter()
                .map(|(root, mult)| Factor { root, mult })
                .collect(),
        }
    }

    pub fn is_one(&self) -> bool {
        self.factors.is_empty()
    }

    pub fn degree(&self) -> u32 {
        self.factors.iter().map(|f| f.mult).sum()
    }

    pub fn eval(&self, k: i64) -> BigInt {
        let mut acc = BigInt::one();
        for f in &self.factors {
            acc *= BigInt::from(k + f.root).pow(f.mult);
        }
        acc
    }

    /// Multiset inclusion of factors, the divisibility order used here.
    pub fn divides(&self, other: &FactoredPoly) -> bool {
        self.factors.iter().all(|f| {
            other
                .factors
                .iter()
                .any(|g| g.root == f.root && g.mult >= f.mult)
        })
    }
}

impl std::fmt::Display for FactoredPoly {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        if self.is_one() {
            return write!(f, "1");
        }
        for (i, fac) in self.factors.iter().enumerate() {
            if i > 0 {
                write!(f, "*")?;
            }
            match fac.root.cmp(&0) {
                std::cmp::Ordering::Equal => write!(f, "(t)")?,
                std::cmp::Ordering::Greater => write!(f, "(t+{})", fac.root)?,
                std::cmp::Ordering::Less => write!(f, "(t{})", fac.root)?,
            }
            if fac.mult > 1 {
                write!(f, "^{}", fac.mult)?;
            }
        }
        Ok(())
    }
}

/// The shifted factorial l!_{r,t} = (r l + t)(r(l-1) + t) ... (r + t),
/// with the empty product for l <= 0.
pub fn shifted_factorial(l: i64, r: u32) -> FactoredPoly {
    if l <= 0 {
        return FactoredPoly::one();
    }
    FactoredPoly::from_roots((1..=l).map(|j| r as i64 * j))
}

/// Integer value of l!_{r,k}.
pub fn shifted_factorial_at(l: i64, r: u32, k: i64) -> BigInt {
    shifted_factorial(l, r).eval(k)
}

/// Conjectured parametrized Smith entries s_1(t) <= ... <= s_{p_n}(t).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PredictedSmith {
    pub r: u32,
    pub n: usize,
    pub entries: Vec<FactoredPoly>,
}

impl PredictedSmith {
    pub fn chain_holds(&self) -> bool {
        self.entries.windows(2).all(|w| w[0].divides(&w[1]))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OperatorSide {
    Du,
    Ud,
}

/// Eigenvalue offsets with multiplicities, summing to p_n.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SpectrumTable {
    pub pairs: Vec<(i64, u64)>,
}

impl SpectrumTable {
    /// det(op + kI) as the product over the spectrum.
    pub fn det_at(&self, k: i64) -> BigInt {
        let mut acc = BigInt::one();
        for &(offset, mult) in &self.pairs {
            acc *= BigInt::from(k + offset).pow(mult as u32);
        }
        acc
    }

    pub fn total_multiplicity(&self) -> u64 {
        self.pairs.iter().map(|&(_, m)| m).sum()
    }
}

fn delta(rank_sizes: &[u64], n: i64) -> i64 {
    let p = |m: i64| -> i64 {
        if m < 0 {
            0
        } else {
            rank_sizes[m as usize] as i64
        }
    };
    p(n) - p(n - 1)
}

fn require_ranks(rank_sizes: &[u64], n: usize) -> Result<(), PredictError> {
    if rank_sizes.len() <= n {
        Err(PredictError::NotEnoughRanks {
            have: rank_sizes.len().saturating_sub(1),
            need: n,
        })
    } else {
        Ok(())
    }
}

/// Spectrum of DU_n (offsets r(i+1)) or UD_n (offsets ri), multiplicity
/// delta p_{n-i} for i = 0..=n.
pub fn spectrum(
    rank_sizes: &[u64],
    r: u32,
    n: usize,
    which: OperatorSide,
) -> Result<SpectrumTable, PredictError> {
    require_ranks(rank_sizes, n)?;
    let pairs = (0..=n as i64)
        .map(|i| {
            let offset = match which {
                OperatorSide::Du => r as i64 * (i + 1),
                OperatorSide::Ud => r as i64 * i,
            };
            (offset, delta(rank_sizes, n as i64 - i).max(0) as u64)
        })
        .collect();
    Ok(SpectrumTable { pairs })
}

/// Parametrized Smith entries for DU_n + tI from the rank sizes:
/// s_{p_n+1-j}(t) is the product of (t + r(i+1)) over i with
/// delta p_{n-i} >= j, an empty product being 1.
pub fn predicted_entries(rank_sizes: &[u64], r: u32, n: usize) -> Result<PredictedSmith, PredictError> {
    require_ranks(rank_sizes, n)?;
    let p_n = rank_sizes[n];
    let mut entries = vec![FactoredPoly::one(); p_n as usize];
    for j in 1..=p_n as i64 {
        let roots: Vec<i64> = (0..=n as i64)
            .filter(|&i| delta(rank_sizes, n as i64 - i) >= j)
            .map(|i| r as i64 * (i + 1))
            .collect();
        entries[(p_n as i64 - j) as usize] = FactoredPoly::from_roots(roots);
    }
    Ok(PredictedSmith {
        r,
        n,
        entries,
    })
}

/// The same prediction recompiled from second differences: p_{n-1} unit
/// entries, shifted factorials (i+1)!_{r,t} with multiplicity given by the
/// second differences, and one top entry — (n+1)!_{r,t} for r >= 2,
/// (n+1+t)(n-1)!_{1,t} for r = 1. Requires the first differences
/// delta p_1 <= ... <= delta p_n; the anomalous rank-9 classes violate it.
pub fn predicted_entries_by_second_differences(
    rank_sizes: &[u64],
    r: u32,
    n: usize,
) -> Result<PredictedSmith, PredictError> {
    require_ranks(rank_sizes, n)?;
    for m in 2..=n as i64 {
        if delta(rank_sizes, m) < delta(rank_sizes, m - 1) {
            return Err(PredictError::HypothesisViolated { rank: m as usize });
        }
    }
    let p_n = rank_sizes[n];
    let p0 = rank_sizes[0] as i64;
    let mut entries = Vec::with_capacity(p_n as usize);
    for j in (1..=p_n as i64).rev() {
        // monotone deltas make {i <= n-1 : delta p_{n-i} >= j} a prefix
        let m_j = (0..n as i64)
            .take_while(|&i| delta(rank_sizes, n as i64 - i) >= j)
            .count() as i64;
        let mut poly = shifted_factorial(m_j, r);
        if p0 >= j {
            poly = FactoredPoly::from_roots(
                poly.factors
                    .iter()
                    .flat_map(|f| std::iter::repeat(f.root).take(f.mult as usize))
                    .chain(std::iter::once(r as i64 * (n as i64 + 1))),
            );
        }
        entries.push(poly);
    }
    Ok(PredictedSmith {
        r,
        n,
        entries,
    })
}

fn factorize_small(mut v: u64) -> Vec<(u64, u32)> {
    let mut out = Vec::new();
    let mut d = 2u64;
    while d * d <= v {
        if v % d == 0 {
            let mut e = 0;
            while v % d == 0 {
                v /= d;
                e += 1;
            }
            out.push((d, e));
        }
        d += 1;
    }
    if v > 1 {
        out.push((v, 1));
    }
    out
}

/// Specializes the predicted entries at t = k and renormalizes into a valid
/// Smith diagonal: absolute values, unit collapse, and a per-prime
/// redistribution of exponents that restores the divisibility chain.
pub fn specialize(ps: &PredictedSmith, k: i64) -> Vec<BigInt> {
    let mut zero_count = 0usize;
    let mut factored: Vec<BTreeMap<u64, u32>> = Vec::new();
    for entry in &ps.entries {
        let mut primes: BTreeMap<u64, u32> = BTreeMap::new();
        let mut is_zero = false;
        for f in &entry.factors {
            let v = k + f.root;
            if v == 0 {
                is_zero = true;
                break;
            }
            for (p, e) in factorize_small(v.unsigned_abs()) {
                *primes.entry(p).or_insert(0) += e * f.mult;
            }
        }
        if is_zero {
            zero_count += 1;
        } else {
            factored.push(primes);
        }
    }
    let nonzero = factored.len();
    let mut exps: BTreeMap<u64, Vec<u32>> = BTreeMap::new();
    for (idx, primes) in factored.iter().enumerate() {
        for (&p, &e) in primes {
            exps.entry(p).or_insert_with(|| vec![0; nonzero])[idx] = e;
        }
    }
    let mut diag = vec![BigInt::one(); nonzero];
    for (p, mut es) in exps {
        es.sort_unstable();
        for (i, e) in es.into_iter().enumerate() {
            if e > 0 {
                diag[i] *= BigInt::from(p).pow(e);
            }
        }
    }
    diag.extend(std::iter::repeat(BigInt::zero()).take(zero_count));
    diag
}

/// Predicted number of ones in the Smith form of DU_n + kI: the rank size
/// p_n minus the largest multiplicity attained by a non-unit eigenvalue.
///
/// Under monotone first differences this collapses, for n >= 3, to the
/// two-case closed formula ([`predicted_ones_closed`]); at n <= 2 the
/// closed formula overshoots because small eigenvalue multiplicities stop
/// dominating the constant multiplicity of the top eigenvalue.
pub fn predicted_ones(rank_sizes: &[u64], r: u32, k: i64, n: usize) -> Result<u64, PredictError> {
    let table = spectrum(rank_sizes, r, n, OperatorSide::Du)?;
    let max_nonunit = table
        .pairs
        .iter()
        .filter(|&&(offset, _)| (k + offset).abs() != 1)
        .map(|&(_, mult)| mult)
        .max()
        .unwrap_or(0);
    Ok(rank_sizes[n] - max_nonunit)
}

/// The closed two-case (three for (r,k) = (2,-3)) ones-count formula.
pub fn predicted_ones_closed(rank_sizes: &[u64], r: u32, k: i64, n: usize) -> Result<u64, PredictError> {
    require_ranks(rank_sizes, n)?;
    let p = |m: i64| -> u64 {
        if m < 0 {
            0
        } else {
            rank_sizes[m as usize]
        }
    };
    let n = n as i64;
    let rk = r as i64 + k;
    Ok(if rk == 1 || rk == -1 {
        if (r, k) == (2, -3) {
            p(n) - p(n - 2) + p(n - 3)
        } else {
            p(n) - p(n - 1) + p(n - 2)
        }
    } else {
        p(n - 1)
    })
}

/// Predicted last Smith entry of DU_n + kI for the tower posets Y^r:
/// (n+1)!_{r,k} for r >= 2 and (n-1)!_{1,k} (n+1+k) for r = 1, reported
/// nonnegative; the singular cases come out as zero on their own.
pub fn predicted_last_entry(r: u32, k: i64, n: usize) -> BigInt {
    let n = n as i64;
    let v = if r >= 2 {
        shifted_factorial_at(n + 1, r, k)
    } else {
        shifted_factorial_at(n - 1, 1, k) * BigInt::from(n + 1 + k)
    };
    v.abs()
}
