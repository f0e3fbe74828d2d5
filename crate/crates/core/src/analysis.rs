//! Boundedness, counting formulas and control-cost aggregation.

use std::collections::{BTreeMap, HashMap};

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use serde::{Serialize, Serializer};

use crate::error::{Error, Result};
use crate::log2;
use crate::routing::RoutePlan;
use crate::verify::generate::ENUMERATION_LIMIT;
use crate::Permutation;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct Boundedness {
    /// Largest displacement `|π(i) - i|`.
    pub k_exact: usize,
    /// Smallest power of two at least `k_exact` (1 for `k_exact <= 1`).
    #[serde(rename = "K")]
    pub k: usize,
}

pub fn boundedness(p: &Permutation) -> Boundedness {
    let k_exact = p.max_displacement();
    Boundedness {
        k_exact,
        k: k_exact.max(1).next_power_of_two(),
    }
}

fn factorial(n: usize) -> BigUint {
    (1..=n).fold(BigUint::one(), |acc, i| acc * i)
}

fn pow(base: usize, exp: usize) -> BigUint {
    num_traits::pow(BigUint::from(base), exp)
}

/// `K! (K+1)^(n-K)` evaluated exactly. `K` is 0 or a power of two with
/// `K <= n/2`.
pub fn count_k_bounded_formula(n: usize, k: usize) -> Result<BigUint> {
    if k > n / 2 || (k != 0 && !k.is_power_of_two()) {
        return Err(Error::OutOfDomain(format!(
            "the closed form takes K = 0 or a power of two up to n/2; got n={n}, K={k}"
        )));
    }
    Ok(factorial(k) * pow(k + 1, n - k))
}

/// Number of permutations of `n` with displacement at most `k`, by
/// backtracking over the set of values already placed (memoised).
pub fn count_k_bounded_exhaustive(n: usize, k: usize) -> Result<BigUint> {
    if n > ENUMERATION_LIMIT {
        return Err(Error::BudgetExceeded {
            n,
            limit: ENUMERATION_LIMIT,
        });
    }
    fn count(mask: u32, n: usize, k: usize, memo: &mut HashMap<u32, u64>) -> u64 {
        let i = mask.count_ones() as usize;
        if i == n {
            return 1;
        }
        if let Some(&c) = memo.get(&mask) {
            return c;
        }
        let total = (0..n)
            .filter(|&v| mask & (1 << v) == 0 && v.abs_diff(i) <= k)
            .map(|v| count(mask | (1 << v), n, k, memo))
            .sum();
        memo.insert(mask, total);
        total
    }
    Ok(BigUint::from(count(0, n, k, &mut HashMap::new())))
}

fn serialize_big<S: Serializer>(v: &Option<BigUint>, s: S) -> std::result::Result<S::Ok, S::Error> {
    match v {
        None => s.serialize_none(),
        Some(x) => match x.to_u128() {
            Some(small) => s.serialize_u128(small),
            None => s.serialize_str(&x.to_string()),
        },
    }
}

/// Closed-form and exhaustive counts of `K`-bounded permutations side by side.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CountReport {
    pub n: usize,
    #[serde(rename = "K")]
    pub k: usize,
    #[serde(serialize_with = "serialize_big")]
    pub formula_count: Option<BigUint>,
    #[serde(serialize_with = "serialize_big")]
    pub exhaustive_count: Option<BigUint>,
    /// `None` unless both counts are present.
    pub agrees: Option<bool>,
}

impl CountReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("count report serializes")
    }
}

/// Evaluate the closed form (when `k` is in its domain) and, if asked,
/// the exhaustive count.
pub fn count_report(n: usize, k: usize, exhaustive: bool) -> Result<CountReport> {
    let formula_count = count_k_bounded_formula(n, k).ok();
    let exhaustive_count = if exhaustive {
        Some(count_k_bounded_exhaustive(n, k)?)
    } else {
        None
    };
    let agrees = match (&formula_count, &exhaustive_count) {
        (Some(f), Some(e)) => Some(f == e),
        _ => None,
    };
    Ok(CountReport {
        n,
        k,
        formula_count,
        exhaustive_count,
        agrees,
    })
}

/// `K! (K+1)^(n-K) - (K/2)! ((K+2)/2)^(n-K/2)` for `2 <= K <= n/2`.
pub fn p_k(n: usize, k: usize) -> Result<BigInt> {
    if k < 2 || !k.is_power_of_two() || k > n / 2 {
        return Err(Error::OutOfDomain(format!(
            "P_K needs 2 <= K <= n/2, K a power of two; got n={n}, K={k}"
        )));
    }
    let h = k / 2;
    let a = BigInt::from(factorial(k) * pow(k + 1, n - k));
    let b = BigInt::from(factorial(h) * pow((k + 2) / 2, n - h));
    Ok(a - b)
}

/// `(n/4)! (n/4 + 1)^(3n/4)`.
pub fn p_n(n: usize) -> BigUint {
    factorial(n / 4) * pow(n / 4 + 1, 3 * n / 4)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AverageComplexity {
    pub as_printed: BigRational,
    pub normalized: BigRational,
}

/// `1 + 2n Σ_{K=2,4,..,n/4} P_K log K + n (2 log n - 1)(n! - P_n)`, and the
/// same divided by `n!`.
pub fn average_control_complexity(n: usize) -> Result<AverageComplexity> {
    let m = crate::topology::check_size(n, 4)?;
    if n > 16 {
        return Err(Error::OutOfDomain(format!(
            "average complexity is evaluated for n <= 16, got {n}"
        )));
    }
    let mut sum = BigInt::zero();
    let mut k = 2;
    while k <= n / 4 {
        sum += p_k(n, k)? * BigInt::from(log2(k));
        k *= 2;
    }
    let fact = BigInt::from(factorial(n));
    let rest = &fact - BigInt::from(p_n(n));
    let value = BigInt::one() + BigInt::from(2 * n) * sum + BigInt::from(n * (2 * m - 1)) * rest;
    let as_printed = BigRational::from_integer(value);
    let normalized = &as_printed / BigRational::from_integer(fact);
    Ok(AverageComplexity {
        as_printed,
        normalized,
    })
}

/// Terminal-visit statistics of plans sharing a `k_used` value.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CostGroup {
    pub k_used: Option<usize>,
    pub plans: usize,
    pub mean_visits: f64,
    pub max_visits: usize,
    pub mean_overhead: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CostSummary {
    pub plans: usize,
    pub mean_visits: f64,
    pub max_visits: usize,
    pub groups: Vec<CostGroup>,
}

fn group(k_used: Option<usize>, plans: &[&RoutePlan]) -> CostGroup {
    let count = plans.len().max(1) as f64;
    CostGroup {
        k_used,
        plans: plans.len(),
        mean_visits: plans.iter().map(|p| p.cost.terminal_visits).sum::<usize>() as f64 / count,
        max_visits: plans
            .iter()
            .map(|p| p.cost.terminal_visits)
            .max()
            .unwrap_or(0),
        mean_overhead: plans.iter().map(|p| p.cost.overhead).sum::<usize>() as f64 / count,
    }
}

pub fn control_cost_summary(plans: &[RoutePlan]) -> CostSummary {
    let mut by_k: BTreeMap<Option<usize>, Vec<&RoutePlan>> = BTreeMap::new();
    for p in plans {
        by_k.entry(p.k_used).or_default().push(p);
    }
    let all: Vec<&RoutePlan> = plans.iter().collect();
    let total = group(None, &all);
    CostSummary {
        plans: plans.len(),
        mean_visits: total.mean_visits,
        max_visits: total.max_visits,
        groups: by_k.into_iter().map(|(k, ps)| group(k, &ps)).collect(),
    }
}

impl CostSummary {
    /// One CSV row per `k_used` group.
    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        for g in &self.groups {
            w.serialize(g)
                .map_err(|e| Error::OutOfDomain(e.to_string()))?;
        }
        let bytes = w
            .into_inner()
            .map_err(|e| Error::OutOfDomain(e.to_string()))?;
        Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
    }
}
