//! Permutations in one-line notation.
//!
//! A [`Perm`] of degree `n` is a bijection of `{1..n}`, stored as the vector
//! of images: `images[k-1]` is the image of `k`. All permutations in this
//! crate are 1-based. Composition follows the function convention:
//! `a.compose(&b)` applies `b` first, then `a`.

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum PermError {
    #[error("images {0:?} are not a bijection of 1..{1}")]
    NotABijection(Vec<usize>, usize),
    #[error("degree mismatch: left has degree {0}, right has degree {1}")]
    DegreeMismatch(usize, usize),
    #[error("point {point} out of range for degree {degree}")]
    OutOfRange { point: usize, degree: usize },
}

/// Element of the symmetric group `S_n`, one-line notation, 1-based.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Perm {
    images: Vec<usize>,
}

impl Perm {
    /// Identity of `S_n`. `S_0` and `S_1` are trivial groups.
    pub fn identity(n: usize) -> Self {
        Perm {
            images: (1..=n).collect(),
        }
    }

    /// Builds a permutation from its one-line image vector, validating bijectivity.
    pub fn from_images(images: Vec<usize>) -> Result<Self, PermError> {
        let n = images.len();
        let mut seen = vec![false; n];
        for &im in &images {
            if im < 1 || im > n || seen[im - 1] {
                return Err(PermError::NotABijection(images.clone(), n));
            }
            seen[im - 1] = true;
        }
        Ok(Perm { images })
    }

    /// The transposition `(a b)` in `S_n`.
    pub fn transposition(n: usize, a: usize, b: usize) -> Result<Self, PermError> {
        for &p in &[a, b] {
            if p < 1 || p > n {
                return Err(PermError::OutOfRange { point: p, degree: n });
            }
        }
        let mut images: Vec<usize> = (1..=n).collect();
        images.swap(a - 1, b - 1);
        Ok(Perm { images })
    }

    pub fn degree(&self) -> usize {
        self.images.len()
    }

    pub fn images(&self) -> &[usize] {
        &self.images
    }

    /// Image of `k` under the permutation.
    pub fn apply(&self, k: usize) -> usize {
        self.images[k - 1]
    }

    /// Preimage of `k`.
    pub fn apply_inverse(&self, k: usize) -> usize {
        self.images.iter().position(|&im| im == k).unwrap() + 1
    }

    pub fn is_identity(&self) -> bool {
        self.images.iter().enumerate().all(|(i, &im)| im == i + 1)
    }

    /// `self ∘ other`: applies `other` first, then `self`.
    pub fn compose(&self, other: &Perm) -> Perm {
        assert_eq!(
            self.degree(),
            other.degree(),
            "composition requires equal degrees"
        );
        Perm {
            images: other.images.iter().map(|&k| self.images[k - 1]).collect(),
        }
    }

    pub fn inverse(&self) -> Perm {
        let mut images = vec![0; self.images.len()];
        for (i, &im) in self.images.iter().enumerate() {
            images[im - 1] = i + 1;
        }
        Perm { images }
    }

    /// Lexicographic rank of the one-line vector among all of `S_n` (0-based).
    pub fn lex_rank(&self) -> usize {
        let n = self.degree();
        let mut rank = 0;
        let mut factorial = 1;
        for k in 1..=n {
            factorial *= k;
        }
        for i in 0..n {
            factorial /= n - i;
            let smaller = self.images[i + 1..]
                .iter()
                .filter(|&&x| x < self.images[i])
                .count();
            rank += smaller * factorial;
        }
        rank
    }

    /// Inverse of [`Perm::lex_rank`].
    pub fn from_lex_rank(n: usize, mut rank: usize) -> Perm {
        let mut factorial: usize = (1..n).product::<usize>().max(1);
        let mut pool: Vec<usize> = (1..=n).collect();
        let mut images = Vec::with_capacity(n);
        for i in 0..n {
            let idx = rank / factorial;
            rank %= factorial;
            images.push(pool.remove(idx));
            if i + 1 < n {
                factorial /= n - 1 - i;
            }
        }
        Perm { images }
    }
}

/// Block embedding of `S_n × S_m` into `S_{n+m}`: `p` permutes the first `n`
/// points and `q` the last `m`, shifted by `n`.
pub fn block_embed(p: &Perm, q: &Perm) -> Perm {
    let n = p.degree();
    let mut images: Vec<usize> = Vec::with_capacity(n + q.degree());
    images.extend(p.images().iter().copied());
    images.extend(q.images().iter().map(|&im| im + n));
    Perm { images }
}

/// Iterator over all of `S_n` in lexicographic order of the image vectors.
pub fn all_perms(n: usize) -> impl Iterator<Item = Perm> {
    let total: usize = (1..=n).product::<usize>().max(1);
    (0..total).map(move |r| Perm::from_lex_rank(n, r))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn identity_and_inverse() {
        let p = Perm::from_images(vec![3, 1, 4, 2]).unwrap();
        assert_eq!(p.compose(&p.inverse()), Perm::identity(4));
        assert_eq!(p.inverse().compose(&p), Perm::identity(4));
        assert!(Perm::identity(0).is_identity());
    }

    #[test]
    fn compose_applies_right_factor_first() {
        // (1 2) ∘ (2 3) sends 3 -> 2 -> 1.
        let a = Perm::transposition(3, 1, 2).unwrap();
        let b = Perm::transposition(3, 2, 3).unwrap();
        let c = a.compose(&b);
        assert_eq!(c.apply(3), 1);
        assert_eq!(c.images(), &[2, 3, 1]);
    }

    #[test]
    fn rejects_non_bijections() {
        assert!(Perm::from_images(vec![1, 1]).is_err());
        assert!(Perm::from_images(vec![0, 2]).is_err());
        assert!(Perm::from_images(vec![3, 1]).is_err());
    }

    #[test]
    fn lex_rank_roundtrip_s4() {
        for rank in 0..24 {
            let p = Perm::from_lex_rank(4, rank);
            assert_eq!(p.lex_rank(), rank);
        }
        assert_eq!(Perm::from_lex_rank(0, 0), Perm::identity(0));
        let mut seen = std::collections::HashSet::new();
        for p in all_perms(4) {
            assert!(seen.insert(p));
        }
        assert_eq!(seen.len(), 24);
    }

    #[test]
    fn block_embed_examples() {
        let swap2 = Perm::from_images(vec![2, 1]).unwrap();
        assert_eq!(
            block_embed(&Perm::identity(2), &swap2).images(),
            &[1, 2, 4, 3]
        );
        assert_eq!(block_embed(&swap2, &swap2).images(), &[2, 1, 4, 3]);
        assert_eq!(
            block_embed(&Perm::identity(3), &Perm::identity(2)),
            Perm::identity(5)
        );
    }

    proptest! {
        #[test]
        fn group_laws(ra in 0usize..720, rb in 0usize..720, rc in 0usize..720) {
            let (a, b, c) = (
                Perm::from_lex_rank(6, ra),
                Perm::from_lex_rank(6, rb),
                Perm::from_lex_rank(6, rc),
            );
            prop_assert_eq!(a.compose(&b).compose(&c), a.compose(&b.compose(&c)));
            prop_assert_eq!(a.compose(&Perm::identity(6)), a.clone());
            prop_assert_eq!(a.compose(&a.inverse()), Perm::identity(6));
        }
    }
}
