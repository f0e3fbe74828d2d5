use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::Permutation;

/// Largest `n` the enumerator accepts.
pub const ENUMERATION_LIMIT: usize = 12;

fn check_family(n: usize, k: usize) -> Result<usize> {
    if n < 4 || !n.is_power_of_two() {
        return Err(Error::InvalidSize { n, min: 4 });
    }
    if k == 0 || !k.is_power_of_two() || k > n / 4 {
        return Err(Error::InvalidBandWidth { n, k });
    }
    Ok(n / k)
}

fn swap_bands(n: usize, k: usize, first_bands: impl Iterator<Item = usize>) -> Permutation {
    let mut map: Vec<usize> = (0..n).collect();
    for band in first_bands {
        for j in band * k..(band + 1) * k {
            map[j] = j + k;
            map[j + k] = j;
        }
    }
    Permutation::new(map).expect("band swaps form a permutation")
}

/// Every even band moves down one band and its odd neighbour moves up.
pub fn gen_pi1(n: usize, k: usize) -> Result<Permutation> {
    let bands = check_family(n, k)?;
    Ok(swap_bands(n, k, (0..bands).step_by(2)))
}

/// Every interior even band moves up one band and the odd band above it
/// moves down; the first and last bands stay put.
pub fn gen_pi2(n: usize, k: usize) -> Result<Permutation> {
    let bands = check_family(n, k)?;
    Ok(swap_bands(n, k, (1..bands - 1).step_by(2)))
}

/// `inner` applied to the lines of band `band`, identity elsewhere.
pub fn gen_pi3(n: usize, k: usize, inner: &Permutation, band: usize) -> Result<Permutation> {
    let bands = check_family(n, k)?;
    if inner.len() != k {
        return Err(Error::SizeMismatch {
            expected: k,
            found: inner.len(),
        });
    }
    if band >= bands {
        return Err(Error::OutOfDomain(format!("band {band} of {bands}")));
    }
    let mut map: Vec<usize> = (0..n).collect();
    for (j, &t) in inner.as_slice().iter().enumerate() {
        map[band * k + j] = band * k + t;
    }
    Permutation::new(map)
}

/// Random permutation with displacement at most `k`, built position by
/// position with shuffled candidate order and backtracking. Deterministic
/// for a given seed; not exactly uniform over the class.
pub fn gen_random_k_bounded(n: usize, k: usize, seed: u64) -> Permutation {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut map = vec![0; n];
    let mut used = vec![false; n];

    fn fill(
        i: usize,
        k: usize,
        map: &mut [usize],
        used: &mut [bool],
        rng: &mut ChaCha8Rng,
    ) -> bool {
        let n = map.len();
        if i == n {
            return true;
        }
        // A value left behind the window can never be placed later.
        let mut candidates: Vec<usize> = match i.checked_sub(k) {
            Some(low) if !used[low] => vec![low],
            _ => (i.saturating_sub(k)..=(i + k).min(n - 1))
                .filter(|&v| !used[v])
                .collect(),
        };
        candidates.shuffle(rng);
        for v in candidates {
            map[i] = v;
            used[v] = true;
            if fill(i + 1, k, map, used, rng) {
                return true;
            }
            used[v] = false;
        }
        false
    }

    let found = fill(0, k, &mut map, &mut used, &mut rng);
    debug_assert!(found);
    Permutation::new(map).expect("filled positions form a permutation")
}

/// Lexicographic stream of all permutations of `n` with displacement at
/// most `k`.
pub fn enumerate_k_bounded(n: usize, k: usize) -> Result<KBoundedPermutations> {
    if n > ENUMERATION_LIMIT {
        return Err(Error::BudgetExceeded {
            n,
            limit: ENUMERATION_LIMIT,
        });
    }
    Ok(KBoundedPermutations {
        n,
        k,
        map: vec![0; n],
        used: vec![false; n],
        next_try: vec![0; n + 1],
        depth: 0,
        done: n == 0,
    })
}

#[derive(Clone, Debug)]
pub struct KBoundedPermutations {
    n: usize,
    k: usize,
    map: Vec<usize>,
    used: Vec<bool>,
    /// Smallest value still to be tried at each position.
    next_try: Vec<usize>,
    depth: usize,
    done: bool,
}

impl KBoundedPermutations {
    fn candidate(&self, i: usize) -> Option<usize> {
        let from = self.next_try[i].max(i.saturating_sub(self.k));
        if i >= self.k && !self.used[i - self.k] {
            return (from <= i - self.k).then_some(i - self.k);
        }
        (from..=(i + self.k).min(self.n - 1)).find(|&v| !self.used[v])
    }

    fn retreat(&mut self) -> bool {
        if self.depth == 0 {
            self.done = true;
            return false;
        }
        self.depth -= 1;
        let v = self.map[self.depth];
        self.used[v] = false;
        self.next_try[self.depth] = v + 1;
        true
    }
}

impl Iterator for KBoundedPermutations {
    type Item = Permutation;

    fn next(&mut self) -> Option<Permutation> {
        if self.done {
            return None;
        }
        if self.depth == self.n && !self.retreat() {
            return None;
        }
        loop {
            let i = self.depth;
            match self.candidate(i) {
                Some(v) => {
                    self.map[i] = v;
                    self.used[v] = true;
                    self.depth += 1;
                    self.next_try[self.depth] = 0;
                    if self.depth == self.n {
                        return Some(Permutation::new(self.map.clone()).expect("bijection"));
                    }
                }
                None => {
                    if !self.retreat() {
                        return None;
                    }
                }
            }
        }
    }
}
