//! Permutations of `{0, …, n-1}` stored as image vectors.
//!
//! `p.apply(j) = p[j]`; composition follows `(ρσ)(j) = ρ(σ(j))`.

use std::fmt;

use crate::error::{Error, Result};

#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Permutation(Vec<usize>);

impl Permutation {
    pub fn identity(n: usize) -> Self {
        Self((0..n).collect())
    }

    pub fn from_images(images: Vec<usize>) -> Result<Self> {
        let n = images.len();
        let mut seen = vec![false; n];
        for &i in &images {
            if i >= n || seen[i] {
                return Err(Error::InvalidParameter(format!(
                    "{images:?} is not a permutation of 0..{n}"
                )));
            }
            seen[i] = true;
        }
        Ok(Self(images))
    }

    /// Adjacent transposition exchanging `j` and `j + 1` (0-based).
    pub fn transposition(n: usize, j: usize) -> Self {
        assert!(j + 1 < n, "transposition index out of range");
        let mut v: Vec<usize> = (0..n).collect();
        v.swap(j, j + 1);
        Self(v)
    }

    /// Total inversion `j ↦ n - 1 - j`.
    pub fn reversal(n: usize) -> Self {
        Self((0..n).rev().collect())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn images(&self) -> &[usize] {
        &self.0
    }

    #[inline]
    pub fn apply(&self, j: usize) -> usize {
        self.0[j]
    }

    pub fn compose(&self, other: &Self) -> Self {
        assert_eq!(self.len(), other.len());
        Self(other.0.iter().map(|&j| self.0[j]).collect())
    }

    pub fn inverse(&self) -> Self {
        let mut inv = vec![0; self.len()];
        for (j, &i) in self.0.iter().enumerate() {
            inv[i] = j;
        }
        Self(inv)
    }

    pub fn is_identity(&self) -> bool {
        self.0.iter().enumerate().all(|(j, &i)| i == j)
    }

    pub fn sign(&self) -> i32 {
        let inversions = (0..self.len())
            .flat_map(|l| ((l + 1)..self.len()).map(move |k| (l, k)))
            .filter(|&(l, k)| self.0[l] > self.0[k])
            .count();
        if inversions % 2 == 0 {
            1
        } else {
            -1
        }
    }

    /// All `n!` permutations in lexicographic order of their image vectors.
    pub fn all(n: usize) -> Vec<Self> {
        let mut out = Vec::new();
        let mut current: Vec<usize> = (0..n).collect();
        loop {
            out.push(Self(current.clone()));
            // next lexicographic permutation
            let Some(i) = (1..n).rev().find(|&i| current[i - 1] < current[i]) else {
                break;
            };
            let j = (i..n).rev().find(|&j| current[j] > current[i - 1]).unwrap();
            current.swap(i - 1, j);
            current[i..].reverse();
        }
        out
    }

    /// Stable sorting permutation: `keys[p(0)] <= keys[p(1)] <= …`, ties in index order.
    pub fn sorting<T: PartialOrd>(keys: &[T]) -> Self {
        let mut idx: Vec<usize> = (0..keys.len()).collect();
        idx.sort_by(|&a, &b| keys[a].partial_cmp(&keys[b]).expect("unordered key"));
        Self(idx)
    }
}

impl fmt::Debug for Permutation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Perm{:?}", self.0)
    }
}

pub fn factorial(n: usize) -> f64 {
    (1..=n).map(|k| k as f64).product()
}

pub fn binomial(n: usize, k: usize) -> usize {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    (0..k).fold(1usize, |acc, i| acc * (n - i) / (i + 1))
}
