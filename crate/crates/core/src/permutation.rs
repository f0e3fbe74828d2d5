use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A bijection on `[0, n)`, stored as its image table: `map[i] = π(i)`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "Vec<usize>", into = "Vec<usize>")]
pub struct Permutation {
    map: Vec<usize>,
}

impl Permutation {
    pub fn new(map: Vec<usize>) -> Result<Self> {
        let n = map.len();
        if n == 0 {
            return Err(Error::InvalidPermutation("empty permutation".into()));
        }
        let mut source = vec![None; n];
        for (i, &v) in map.iter().enumerate() {
            if v >= n {
                return Err(Error::InvalidPermutation(format!(
                    "image {v} of input {i} is out of range for n={n}"
                )));
            }
            if let Some(first) = source[v] {
                return Err(Error::InvalidPermutation(format!(
                    "duplicate image {v} (inputs {first} and {i})"
                )));
            }
            source[v] = Some(i);
        }
        Ok(Self { map })
    }

    pub fn identity(n: usize) -> Self {
        Self {
            map: (0..n).collect(),
        }
    }

    /// `π(i) = n - 1 - i`.
    pub fn reversal(n: usize) -> Self {
        Self {
            map: (0..n).rev().collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.map.len()
    }

    pub fn is_empty(&self) -> bool {
        self.map.is_empty()
    }

    #[inline]
    pub fn apply(&self, i: usize) -> usize {
        self.map[i]
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.map
    }

    pub fn inverse(&self) -> Self {
        let mut inv = vec![0; self.map.len()];
        for (i, &v) in self.map.iter().enumerate() {
            inv[v] = i;
        }
        Self { map: inv }
    }

    /// `max |π(i) - i|`.
    pub fn max_displacement(&self) -> usize {
        self.map
            .iter()
            .enumerate()
            .map(|(i, &v)| i.abs_diff(v))
            .max()
            .unwrap_or(0)
    }

    /// First input whose displacement exceeds `k`, if any.
    pub fn first_violation(&self, k: usize) -> Option<usize> {
        self.map
            .iter()
            .enumerate()
            .position(|(i, &v)| i.abs_diff(v) > k)
    }

    pub fn is_k_bounded(&self, k: usize) -> bool {
        self.first_violation(k).is_none()
    }

    pub(crate) fn ensure_k_bounded(&self, k: usize) -> Result<()> {
        match self.first_violation(k) {
            None => Ok(()),
            Some(input) => Err(Error::NotKBounded {
                k,
                input,
                output: self.map[input],
            }),
        }
    }

    /// Conjugate by a line relabeling: returns `σ ∘ π ∘ σ⁻¹`.
    pub fn relabel(&self, sigma: impl Fn(usize) -> usize) -> Self {
        let mut map = vec![0; self.map.len()];
        for (i, &v) in self.map.iter().enumerate() {
            map[sigma(i)] = sigma(v);
        }
        Self { map }
    }

    pub fn into_vec(self) -> Vec<usize> {
        self.map
    }
}

impl TryFrom<Vec<usize>> for Permutation {
    type Error = Error;

    fn try_from(map: Vec<usize>) -> Result<Self> {
        Self::new(map)
    }
}

impl From<Permutation> for Vec<usize> {
    fn from(p: Permutation) -> Self {
        p.map
    }
}

/// Comma-separated images of `0..n`, e.g. `"4,5,0,6,1,2,7,3"`.
impl FromStr for Permutation {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let map = s
            .split(',')
            .map(str::trim)
            .filter(|t| !t.is_empty())
            .map(|t| {
                t.parse::<usize>()
                    .map_err(|_| Error::InvalidPermutation(format!("not a line number: {t:?}")))
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(map)
    }
}

impl fmt::Display for Permutation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, v) in self.map.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{v}")?;
        }
        Ok(())
    }
}
