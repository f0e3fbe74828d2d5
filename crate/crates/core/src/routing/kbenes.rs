//! Band routing on the K-Benes.
//!
//! The matching and routing stages take their settings from the outer
//! `log k` levels of the looping algorithm, run on the canonical Benes and
//! carried over through the line relabeling that embeds the K-Benes (minus
//! its odd band-exchange column) into the Benes. After the matching stage
//! every migrating input sits at the same offset as an oppositely migrating
//! input of the neighbouring band, and the band-exchange columns swap those
//! pairs on their migration marks alone.

use std::collections::BTreeSet;

use serde::Serialize;

use super::looping::run_looping;
use super::{
    count_set, empty_table, ensure_kind, ensure_size, settings_from_table, ControlCost, RoutePlan,
    StateTable, SwitchState,
};
use crate::error::{Error, Result};
use crate::log2;
use crate::topology::relabel::band_relabeling;
use crate::topology::{BitRelabeling, Network, NetworkKind};
use crate::Permutation;

/// Migrating and stationary inputs of every band.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct BandDecomposition {
    pub k: usize,
    pub bands: usize,
    /// `up[i]`: inputs of band `i` bound for band `i - 1`.
    pub up: Vec<BTreeSet<usize>>,
    /// `down[i]`: inputs of band `i` bound for band `i + 1`.
    pub down: Vec<BTreeSet<usize>>,
    pub stationary: Vec<BTreeSet<usize>>,
}

impl BandDecomposition {
    /// Inputs entering band `i` from above equal those leaving it upwards,
    /// and likewise below.
    pub fn balanced(&self) -> bool {
        (1..self.bands).all(|i| self.up[i].len() == self.down[i - 1].len())
            && self.up.first().is_none_or(BTreeSet::is_empty)
            && self.down.last().is_none_or(BTreeSet::is_empty)
    }
}

fn check_band_width(n: usize, k: usize, max: usize) -> Result<()> {
    if k == 0 || !k.is_power_of_two() || k > max {
        return Err(Error::InvalidBandWidth { n, k });
    }
    Ok(())
}

/// Split the inputs of a `k`-bounded permutation into bands of `k` lines.
pub fn decompose_bands(p: &Permutation, k: usize) -> Result<BandDecomposition> {
    let n = p.len();
    check_band_width(n, k, n)?;
    p.ensure_k_bounded(k)?;
    let bands = n / k;
    let mut d = BandDecomposition {
        k,
        bands,
        up: vec![BTreeSet::new(); bands],
        down: vec![BTreeSet::new(); bands],
        stationary: vec![BTreeSet::new(); bands],
    };
    for (j, &t) in p.as_slice().iter().enumerate() {
        let (from, to) = (j / k, t / k);
        let set = match to.cmp(&from) {
            std::cmp::Ordering::Less => &mut d.up[from],
            std::cmp::Ordering::Greater => &mut d.down[from],
            std::cmp::Ordering::Equal => &mut d.stationary[from],
        };
        set.insert(j);
    }
    Ok(d)
}

/// The relabeling from K-Benes lines to Benes lines for one `(n, k)`.
#[derive(Clone, Debug)]
pub struct BandEmbedding {
    n: usize,
    k: usize,
    sigma: BitRelabeling,
}

impl BandEmbedding {
    /// Valid for `n >= 4` and `1 <= k <= n/2`.
    pub fn new(n: usize, k: usize) -> Result<Self> {
        crate::topology::check_size(n, 4)?;
        check_band_width(n, k, n / 2)?;
        let sigma = band_relabeling(n, k).ok_or_else(|| {
            Error::TheoremViolation(format!("no band embedding for n={n}, k={k}"))
        })?;
        Ok(Self { n, k, sigma })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn relabeling(&self) -> &BitRelabeling {
        &self.sigma
    }

    /// Run the looping levels that fix the matching and routing stages.
    pub fn matching_stage(&self, p: &Permutation) -> Result<MatchingStage> {
        if p.len() != self.n {
            return Err(Error::SizeMismatch {
                expected: self.n,
                found: p.len(),
            });
        }
        p.ensure_k_bounded(self.k)?;
        let (n, k) = (self.n, self.k);
        let kappa = log2(k);
        let m = log2(n);
        let sigma = &self.sigma;
        let benes_p = p.relabel(|x| sigma.forward(x));
        let run = run_looping(benes_p.as_slice(), kappa);

        let mut matching_cross = vec![vec![false; n]; kappa];
        let mut routing_cross = vec![vec![false; n]; kappa];
        let first_routing = 2 * m - 1 - kappa;
        for d in &run.decisions {
            let bit = (m - 1).abs_diff(d.column);
            let a = sigma.inverse(d.position);
            let b = sigma.inverse(d.position ^ (1 << bit));
            let target = if d.column < kappa {
                &mut matching_cross[d.column]
            } else {
                &mut routing_cross[d.column - first_routing]
            };
            target[a] = d.cross;
            target[b] = d.cross;
        }

        let mut trajectory = vec![(0..n).collect::<Vec<_>>()];
        for (c, cross) in matching_cross.iter().enumerate() {
            let next = trajectory[c]
                .iter()
                .map(|&y| if cross[y] { y ^ (1 << c) } else { y })
                .collect();
            trajectory.push(next);
        }

        let residuals = run
            .residual
            .into_iter()
            .map(|(base, local)| {
                let lines = (0..local.len()).map(|x| sigma.inverse(base + x)).collect();
                (lines, local)
            })
            .collect();

        Ok(MatchingStage {
            n,
            k,
            permutation: p.clone(),
            matching_cross,
            routing_cross,
            trajectory,
            residuals,
            terminal_visits: run.visits,
        })
    }
}

/// Matching and routing stage settings of one permutation, in K-Benes lines.
#[derive(Clone, Debug)]
pub struct MatchingStage {
    n: usize,
    k: usize,
    permutation: Permutation,
    /// `[column][line]`: whether the switch on `line` crosses.
    matching_cross: Vec<Vec<bool>>,
    routing_cross: Vec<Vec<bool>>,
    /// `[stage][input]`: line occupied after `stage` matching columns.
    trajectory: Vec<Vec<usize>>,
    /// Per inner Benes block: its lines (K-Benes numbering) and the local
    /// permutation the looping run left for it.
    residuals: Vec<(Vec<usize>, Vec<usize>)>,
    terminal_visits: usize,
}

impl MatchingStage {
    pub fn k(&self) -> usize {
        self.k
    }

    pub fn terminal_visits(&self) -> usize {
        self.terminal_visits
    }

    /// Number of matching columns, `log k`.
    pub fn stages(&self) -> usize {
        self.matching_cross.len()
    }

    pub fn matching_cross(&self, column: usize, line: usize) -> bool {
        self.matching_cross[column][line]
    }

    pub fn routing_cross(&self, column: usize, line: usize) -> bool {
        self.routing_cross[column][line]
    }

    /// Line occupied by `input` after `stage` matching columns.
    pub fn line_after(&self, stage: usize, input: usize) -> usize {
        self.trajectory[stage][input]
    }

    /// Line occupied by `input` at the output of its matching network.
    pub fn position(&self, input: usize) -> usize {
        self.trajectory[self.stages()][input]
    }

    /// Offset of `input` within its band at the matching-network output.
    pub fn offset(&self, input: usize) -> usize {
        self.position(input) % self.k
    }

    /// `occupant[line]` = input at `line` after the matching stage.
    pub fn occupants(&self) -> Vec<usize> {
        let mut occ = vec![0; self.n];
        for (input, &line) in self.trajectory[self.stages()].iter().enumerate() {
            occ[line] = input;
        }
        occ
    }

    /// Pairs `(a, b)` where `a` migrates from band `i` down to `i + 1`, `b`
    /// migrates from `i + 1` up to `i`, and both leave their matching
    /// networks at the same offset. Fails if some migrating input has no
    /// such partner.
    pub fn positional_partners(&self) -> Result<Vec<(usize, usize)>> {
        let k = self.k;
        let p = &self.permutation;
        let occ = self.occupants();
        let mut pairs = Vec::new();
        for (input, &line) in self.trajectory[self.stages()].iter().enumerate() {
            let band = input / k;
            let dest = p.apply(input) / k;
            let partner_line = if dest == band + 1 {
                line + k
            } else if dest + 1 == band {
                line - k
            } else {
                continue;
            };
            let partner = occ[partner_line];
            if p.apply(partner) / k != band {
                return Err(Error::TheoremViolation(format!(
                    "input {input} leaves its matching network at offset {} with no matching partner",
                    line % k
                )));
            }
            if dest == band + 1 {
                pairs.push((input, partner));
            }
        }
        Ok(pairs)
    }

    /// Check that moving each migrating input to its destination band at
    /// unchanged offset reproduces the subpermutations the looping run left
    /// for the inner Benes blocks.
    pub fn agrees_with_residuals(&self) -> bool {
        let occ = self.occupants();
        let k = self.k;
        self.residuals.iter().all(|(lines, local)| {
            lines.iter().zip(local).all(|(&from, &to)| {
                let target = lines[to];
                let input = occ[from];
                target % k == from % k && target / k == self.permutation.apply(input) / k
            })
        })
    }
}

/// Routes permutations on one K-Benes network.
#[derive(Clone, Debug)]
pub struct KBenesRouter<'a> {
    net: &'a Network,
    embedding: BandEmbedding,
}

impl<'a> KBenesRouter<'a> {
    pub fn new(net: &'a Network) -> Result<Self> {
        ensure_kind(net, NetworkKind::KBenes)?;
        let k = net
            .k()
            .ok_or(Error::InvalidBandWidth { n: net.n(), k: 0 })?;
        Ok(Self {
            net,
            embedding: BandEmbedding::new(net.n(), k)?,
        })
    }

    pub(crate) fn with_embedding(net: &'a Network, embedding: BandEmbedding) -> Self {
        Self { net, embedding }
    }

    pub fn k(&self) -> usize {
        self.embedding.k
    }

    pub fn route(&self, p: &Permutation) -> Result<RoutePlan> {
        let net = self.net;
        ensure_size(net, p)?;
        let k = self.k();
        let kappa = log2(k);
        let stage = self.embedding.matching_stage(p)?;
        let mut table = empty_table(net);

        let fill = |table: &mut StateTable, column: usize, cross: &[bool]| {
            for (i, s) in net.column(column).switches().iter().enumerate() {
                table[column][i] = SwitchState::from_cross(cross[s.lines()[0]]);
            }
        };
        for c in 0..kappa {
            fill(&mut table, c, &stage.matching_cross[c]);
            fill(&mut table, kappa + 2 + c, &stage.routing_cross[c]);
        }

        let mut occ = stage.occupants();
        for column in [kappa, kappa + 1] {
            for (i, s) in net.column(column).switches().iter().enumerate() {
                let [a, b] = s.lines();
                let down = p.apply(occ[a]) / k > a / k;
                let up = p.apply(occ[b]) / k < b / k;
                if down != up {
                    return Err(Error::TheoremViolation(format!(
                        "band-exchange switch ({column}, {a}) has an unmatched migrating input"
                    )));
                }
                if down {
                    occ.swap(a, b);
                }
                table[column][i] = SwitchState::from_cross(down);
            }
        }
        if let Some(line) = (0..net.n()).find(|&l| p.apply(occ[l]) / k != l / k) {
            return Err(Error::TheoremViolation(format!(
                "input {} left the band exchange outside its destination band",
                occ[line]
            )));
        }
        if !stage.agrees_with_residuals() {
            return Err(Error::TheoremViolation(
                "band exchange disagrees with the looping residuals".into(),
            ));
        }

        Ok(RoutePlan {
            network: net.id(),
            permutation: p.clone(),
            k_used: Some(k),
            settings: settings_from_table(net, &table),
            bypass: Vec::new(),
            cost: ControlCost {
                terminal_visits: stage.terminal_visits,
                overhead: net.n(),
                switches_set: count_set(&table),
            },
        })
    }
}

/// Route a `k`-bounded permutation through the K-Benes `net`.
pub fn k_benes_route(net: &Network, p: &Permutation) -> Result<RoutePlan> {
    KBenesRouter::new(net)?.route(p)
}
