//! Line relabelings between networks.
//!
//! Perfect shuffles rotate the address bits of a line number, so any
//! composition of them permutes address bits. The search here ranges over
//! all address-bit permutations and returns the first (in lexicographic
//! order of bit images) under which two column lists coincide.

use serde::Serialize;

use super::{build_benes, check_size, k_benes_core_columns, Column, Network};
use crate::error::{Error, Result};
use crate::log2;

/// Line relabeling induced by a permutation of address bits:
/// bit `b` of the source line becomes bit `bits[b]` of the target line.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct BitRelabeling {
    bits: Vec<usize>,
}

impl BitRelabeling {
    pub fn identity(m: usize) -> Self {
        Self {
            bits: (0..m).collect(),
        }
    }

    pub fn bits(&self) -> &[usize] {
        &self.bits
    }

    pub fn forward(&self, x: usize) -> usize {
        self.bits
            .iter()
            .enumerate()
            .fold(0, |acc, (b, &t)| acc | (((x >> b) & 1) << t))
    }

    pub fn inverse(&self, y: usize) -> usize {
        self.bits
            .iter()
            .enumerate()
            .fold(0, |acc, (b, &t)| acc | (((y >> t) & 1) << b))
    }

    /// `map[x] = forward(x)` for every line.
    pub fn line_map(&self) -> Vec<usize> {
        (0..1usize << self.bits.len())
            .map(|x| self.forward(x))
            .collect()
    }
}

fn columns_agree(a: &Column, b: &Column, sigma: &BitRelabeling) -> bool {
    (0..a.lines()).all(|x| b.partner(sigma.forward(x)) == a.partner(x).map(|p| sigma.forward(p)))
}

/// Find an address-bit permutation `σ` such that, column by column, `σ`
/// maps the pairs of `a` onto the pairs of `b` (and unpaired lines onto
/// unpaired lines). Both lists must span the same `n = 2^m` lines.
pub fn find_bit_relabeling(a: &[Column], b: &[Column]) -> Option<BitRelabeling> {
    if a.len() != b.len() {
        return None;
    }
    let n = match a.first() {
        Some(c) => c.lines(),
        None => return Some(BitRelabeling::identity(0)),
    };
    if !n.is_power_of_two() || b.iter().chain(a).any(|c| c.lines() != n) {
        return None;
    }
    let m = log2(n);
    let a_dims: Vec<_> = a.iter().map(Column::dimension_bit).collect();
    let b_dims: Vec<_> = b.iter().map(Column::dimension_bit).collect();
    // A bit permutation maps dimension columns to dimension columns.
    if a_dims
        .iter()
        .zip(&b_dims)
        .any(|(x, y)| x.is_some() != y.is_some())
    {
        return None;
    }

    struct Search<'a> {
        m: usize,
        a: &'a [Column],
        b: &'a [Column],
        a_dims: Vec<Option<usize>>,
        b_dims: Vec<Option<usize>>,
        bits: Vec<usize>,
        used: Vec<bool>,
    }

    impl Search<'_> {
        fn run(&mut self, t: usize) -> bool {
            if t == self.m {
                let sigma = BitRelabeling {
                    bits: self.bits.clone(),
                };
                return self
                    .a
                    .iter()
                    .zip(self.b)
                    .all(|(x, y)| columns_agree(x, y, &sigma));
            }
            for target in 0..self.m {
                if self.used[target] {
                    continue;
                }
                let consistent = self
                    .a_dims
                    .iter()
                    .zip(&self.b_dims)
                    .all(|(&da, &db)| da != Some(t) || db == Some(target));
                if !consistent {
                    continue;
                }
                self.used[target] = true;
                self.bits.push(target);
                if self.run(t + 1) {
                    return true;
                }
                self.bits.pop();
                self.used[target] = false;
            }
            false
        }
    }

    let mut search = Search {
        m,
        a,
        b,
        a_dims,
        b_dims,
        bits: Vec::with_capacity(m),
        used: vec![false; m],
    };
    search.run(0).then_some(BitRelabeling { bits: search.bits })
}

/// As [`find_bit_relabeling`], additionally requiring bypass edges to map
/// onto bypass edges.
pub fn find_network_relabeling(a: &Network, b: &Network) -> Option<BitRelabeling> {
    if a.n() != b.n() || a.bypass_edges().len() != b.bypass_edges().len() {
        return None;
    }
    let sigma = find_bit_relabeling(a.columns(), b.columns())?;
    let mut mapped: Vec<_> = a
        .bypass_edges()
        .iter()
        .map(|e| {
            let mut e = *e;
            e.from.line = sigma.forward(e.from.line);
            e.to.line = sigma.forward(e.to.line);
            e
        })
        .collect();
    mapped.sort();
    let mut expected = b.bypass_edges().to_vec();
    expected.sort();
    (mapped == expected).then_some(sigma)
}

/// Outcome of the band relabeling check for one `(n, k)`.
#[derive(Clone, Debug, Serialize)]
pub struct Property1Report {
    pub n: usize,
    pub k: usize,
    pub holds: bool,
    /// Address-bit images of the relabeling (K-Benes line -> Benes line).
    pub bit_map: Option<Vec<usize>>,
    /// The same relabeling as a table over lines.
    pub line_map: Option<Vec<usize>>,
}

/// The first `log k + 1` and last `log k` columns of the `n`-line Benes.
pub(crate) fn benes_outer_columns(n: usize, k: usize) -> Result<Vec<Column>> {
    let benes = build_benes(n)?;
    let depth = benes.depth();
    let kappa = log2(k);
    Ok((0..=kappa)
        .chain(depth - kappa..depth)
        .map(|c| benes.column(c).clone())
        .collect())
}

/// Relabeling from K-Benes lines (bands contiguous) to canonical Benes
/// lines under which the K-Benes without its odd band-exchange column
/// coincides with the outer Benes columns. Defined for `1 <= k <= n/2`.
pub(crate) fn band_relabeling(n: usize, k: usize) -> Option<BitRelabeling> {
    let outer = benes_outer_columns(n, k).ok()?;
    let core = k_benes_core_columns(n, k);
    find_bit_relabeling(&core, &outer)
}

/// Check that the first `log k + 1` and the last `log k` columns of the
/// `n`-line Benes are isomorphic to the K-Benes with its odd band-exchange
/// column removed. Accepts `1 <= k <= n/2`; `k` must be a power of two.
pub fn check_property1(n: usize, k: usize) -> Result<Property1Report> {
    check_size(n, 2)?;
    if k == 0 || !k.is_power_of_two() || k > n / 2 {
        return Err(Error::InvalidBandWidth { n, k });
    }
    let sigma = band_relabeling(n, k);
    Ok(Property1Report {
        n,
        k,
        holds: sigma.is_some(),
        line_map: sigma.as_ref().map(BitRelabeling::line_map),
        bit_map: sigma.map(|s| s.bits),
    })
}
