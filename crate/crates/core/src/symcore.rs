//! Symmetric-group arithmetic for self-gluings.
//!
//! The reindexing permutation `ρ_{i,j} ∈ S_n` sends `i ↦ n-1`, `j ↦ n` and is
//! order-preserving elsewhere; it converts a gluing of legs `i, j` into the
//! gluing of the last two legs. Everything else in this module is the
//! combinatorics of pairs of such gluings: the unique coset decomposition of
//! an arbitrary permutation against the `ρ` representatives, the reindexing
//! identity coupling two `ρ`s, and the fiber-swap involution `ι` on ordered
//! gluing pairs together with its quotient `φ` onto unordered pairs.

use crate::perm::{block_embed, Perm};
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum SymError {
    #[error("epsilon requires a < b and c distinct from both, got a={a}, b={b}, c={c}")]
    BadEpsilonArgs { a: usize, b: usize, c: usize },
    #[error("rho requires 1 <= i < j <= n, got n={n}, i={i}, j={j}")]
    BadRhoArgs { n: usize, i: usize, j: usize },
    #[error("expected distinct indices i<j, k<l within 1..={n}, got ({i},{j},{k},{l})")]
    BadTuple {
        n: usize,
        i: usize,
        j: usize,
        k: usize,
        l: usize,
    },
    #[error("ordered gluing pair requires 1 <= a < b <= n and 1 <= c < d <= n-2, got n={n}, ({a},{b},{c},{d})")]
    BadOrderedPair {
        n: usize,
        a: usize,
        b: usize,
        c: usize,
        d: usize,
    },
    #[error("coset decomposition needs degree >= 2, got {0}")]
    DegreeTooSmall(usize),
    #[error(transparent)]
    Perm(#[from] crate::perm::PermError),
}

/// Offset `ε_{a,b}(c)`: how many of `a, b` lie below `c`.
pub fn epsilon(a: usize, b: usize, c: usize) -> Result<usize, SymError> {
    if a == 0 || b == 0 || c == 0 || a >= b || c == a || c == b {
        return Err(SymError::BadEpsilonArgs { a, b, c });
    }
    Ok(if c < a {
        0
    } else if c < b {
        1
    } else {
        2
    })
}

/// The permutation `ρ_{i,j} ∈ S_n`: `i ↦ n-1`, `j ↦ n`, `k ↦ k - ε_{i,j}(k)` else.
pub fn rho(n: usize, i: usize, j: usize) -> Result<Perm, SymError> {
    if i == 0 || i >= j || j > n {
        return Err(SymError::BadRhoArgs { n, i, j });
    }
    let mut images = Vec::with_capacity(n);
    for k in 1..=n {
        images.push(if k == i {
            n - 1
        } else if k == j {
            n
        } else {
            k - epsilon(i, j, k)?
        });
    }
    Ok(Perm::from_images(images).expect("rho is a bijection"))
}

/// The `(n,m)`-shuffle `σ_{n,m} ∈ S_{n+m}`: adds `m` to `1..n` and subtracts
/// `n` from `n+1..n+m`.
pub fn shuffle(n: usize, m: usize) -> Perm {
    let images = (1..=n + m)
        .map(|k| if k <= n { k + m } else { k - n })
        .collect();
    Perm::from_images(images).expect("shuffle is a bijection")
}

/// The unique factorization of `t ∈ S_n` against the coset representatives
/// `σ̂ · ρ_{k,l}`:
///
/// `t = swap^eps ∘ embed(sigma_hat) ∘ ρ_{k,l}`
///
/// where `swap = (n-1 n)`, `sigma_hat ∈ S_{n-2}` is embedded to fix `n-1` and
/// `n`, composition applies the right factor first, and `k < l`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CosetDecomposition {
    pub sigma_hat: Perm,
    pub k: usize,
    pub l: usize,
    pub eps: bool,
}

/// Decomposes `t ∈ S_n` (`n >= 2`) into [`CosetDecomposition`] form. The
/// glued pair is recovered as `{k, l} = {t⁻¹(n-1), t⁻¹(n)}`, with `eps`
/// recording whether they arrive out of order.
pub fn coset_decompose(t: &Perm) -> Result<CosetDecomposition, SymError> {
    let n = t.degree();
    if n < 2 {
        return Err(SymError::DegreeTooSmall(n));
    }
    let a = t.apply_inverse(n - 1);
    let b = t.apply_inverse(n);
    let eps = a > b;
    let (k, l) = if eps { (b, a) } else { (a, b) };
    let r = rho(n, k, l)?;
    // sigma_hat = swap^eps ∘ t ∘ rho(k,l)^{-1}, restricted to 1..n-2.
    let mut full = t.compose(&r.inverse());
    if eps {
        full = Perm::transposition(n, n - 1, n)?.compose(&full);
    }
    debug_assert_eq!(full.apply(n - 1), n - 1);
    debug_assert_eq!(full.apply(n), n);
    let sigma_hat = Perm::from_images(full.images()[..n - 2].to_vec())
        .expect("restriction to the fixed block is a bijection");
    Ok(CosetDecomposition { sigma_hat, k, l, eps })
}

/// Rebuilds the permutation from its [`CosetDecomposition`]; two-sided inverse
/// of [`coset_decompose`].
pub fn coset_compose(d: &CosetDecomposition) -> Result<Perm, SymError> {
    let n = d.sigma_hat.degree() + 2;
    let r = rho(n, d.k, d.l)?;
    let mut t = block_embed(&d.sigma_hat, &Perm::identity(2)).compose(&r);
    if d.eps {
        t = Perm::transposition(n, n - 1, n)?.compose(&t);
    }
    Ok(t)
}

/// The reindexed 4-tuple `(ρ_{k,l}(i), ρ_{k,l}(j), ρ_{i,j}(k), ρ_{i,j}(l))`
/// appearing in the identity
/// `ρ_{k',l'} ∘ ρ_{i,j} = (n-1 n-3)(n-2 n) ∘ ρ_{i',j'} ∘ ρ_{k,l}`.
pub fn reindex_primes(
    n: usize,
    i: usize,
    j: usize,
    k: usize,
    l: usize,
) -> Result<(usize, usize, usize, usize), SymError> {
    let distinct = i != k && i != l && j != k && j != l;
    if !distinct || i == 0 || k == 0 || i >= j || k >= l || j > n || l > n {
        return Err(SymError::BadTuple { n, i, j, k, l });
    }
    let rho_kl = rho(n, k, l)?;
    let rho_ij = rho(n, i, j)?;
    Ok((rho_kl.apply(i), rho_kl.apply(j), rho_ij.apply(k), rho_ij.apply(l)))
}

/// An ordered pair of self-gluings over color `n`: glue legs `a < b <= n`
/// first, then legs `c < d <= n-2` of the survivors.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct OrderedGluingPair {
    pub n: usize,
    pub a: usize,
    pub b: usize,
    pub c: usize,
    pub d: usize,
}

impl OrderedGluingPair {
    pub fn new(n: usize, a: usize, b: usize, c: usize, d: usize) -> Result<Self, SymError> {
        if a == 0 || c == 0 || a >= b || b > n || c >= d || d + 2 > n {
            return Err(SymError::BadOrderedPair { n, a, b, c, d });
        }
        Ok(OrderedGluingPair { n, a, b, c, d })
    }
}

/// All ordered gluing pairs over color `n`, in lexicographic order.
/// `|O_n| = C(n,2) · C(n-2,2)`; empty for `n < 4`.
pub fn all_ordered_pairs(n: usize) -> Vec<OrderedGluingPair> {
    let mut out = Vec::new();
    if n < 4 {
        return out;
    }
    for a in 1..=n {
        for b in a + 1..=n {
            for c in 1..=n - 2 {
                for d in c + 1..=n - 2 {
                    out.push(OrderedGluingPair { n, a, b, c, d });
                }
            }
        }
    }
    out
}

/// An unordered pair of self-gluings: the orbit of a 4-tuple of distinct legs
/// under swapping within each pair and swapping the two pairs. Stored as the
/// lexicographically least orbit member.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct UnorderedGluingClass {
    pub n: usize,
    pub representative: (usize, usize, usize, usize),
}

impl UnorderedGluingClass {
    /// Canonicalizes `(i,j,k,l)` (distinct, within `1..=n`) to the lex-least
    /// member of its orbit.
    pub fn new(n: usize, i: usize, j: usize, k: usize, l: usize) -> Result<Self, SymError> {
        let entries = [i, j, k, l];
        if entries.iter().any(|&x| x == 0 || x > n) {
            return Err(SymError::BadTuple { n, i, j, k, l });
        }
        if i == j || i == k || i == l || j == k || j == l || k == l {
            return Err(SymError::BadTuple { n, i, j, k, l });
        }
        let first = (i.min(j), i.max(j));
        let second = (k.min(l), k.max(l));
        let (p, q) = if first <= second {
            (first, second)
        } else {
            (second, first)
        };
        Ok(UnorderedGluingClass {
            n,
            representative: (p.0, p.1, q.0, q.1),
        })
    }

    /// The orbit member `(i,j,k,l)` with `i<j`, `k<l` and `j > l`, as used to
    /// index one relation per class.
    pub fn rep_second_larger(&self) -> (usize, usize, usize, usize) {
        let (i, j, k, l) = self.representative;
        if j > l {
            (i, j, k, l)
        } else {
            (k, l, i, j)
        }
    }
}

/// All unordered gluing classes over color `n`. `|U_n| = 3 · C(n,4)`.
pub fn all_unordered_classes(n: usize) -> Vec<UnorderedGluingClass> {
    let mut out = Vec::new();
    if n < 4 {
        return out;
    }
    for i in 1..=n {
        for j in i + 1..=n {
            for k in i + 1..=n {
                for l in k + 1..=n {
                    if k != j && l != j {
                        out.push(UnorderedGluingClass {
                            n,
                            representative: (i, j, k, l),
                        });
                    }
                }
            }
        }
    }
    out.sort();
    out
}

/// Quotient map from ordered to unordered pairs: with
/// `k = ρ_{a,b}⁻¹(c)` and `l = ρ_{a,b}⁻¹(d)`, the class of `(a,b,k,l)`.
pub fn phi(o: &OrderedGluingPair) -> UnorderedGluingClass {
    let r = rho(o.n, o.a, o.b).expect("ordered pair invariants");
    let k = r.apply_inverse(o.c);
    let l = r.apply_inverse(o.d);
    UnorderedGluingClass::new(o.n, o.a, o.b, k, l).expect("tuple entries are distinct")
}

/// The fiber-swap involution on ordered pairs: the unique other ordered pair
/// with the same `φ`-image. Gluing the same two leg pairs in the other order.
pub fn iota(o: &OrderedGluingPair) -> OrderedGluingPair {
    let r = rho(o.n, o.a, o.b).expect("ordered pair invariants");
    let k = r.apply_inverse(o.c);
    let l = r.apply_inverse(o.d);
    let r_kl = rho(o.n, k, l).expect("k < l within range");
    OrderedGluingPair::new(o.n, k, l, r_kl.apply(o.a), r_kl.apply(o.b))
        .expect("iota lands in the ordered pairs")
}

/// Shifts every leg of an ordered pair up by `n`, landing in color `n + m`.
pub fn pair_shift(n: usize, o: &OrderedGluingPair) -> OrderedGluingPair {
    OrderedGluingPair::new(o.n + n, o.a + n, o.b + n, o.c + n, o.d + n)
        .expect("shift preserves the ordered pair invariants")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::perm::all_perms;
    use std::collections::HashSet;

    #[test]
    fn epsilon_cases() {
        assert_eq!(epsilon(2, 5, 1).unwrap(), 0);
        assert_eq!(epsilon(2, 5, 3).unwrap(), 1);
        assert_eq!(epsilon(2, 5, 7).unwrap(), 2);
        assert!(epsilon(2, 5, 2).is_err());
        assert!(epsilon(2, 5, 5).is_err());
        assert!(epsilon(5, 2, 1).is_err());
    }

    #[test]
    fn rho_examples() {
        assert_eq!(rho(4, 1, 3).unwrap().images(), &[3, 1, 4, 2]);
        assert_eq!(rho(4, 1, 2).unwrap().images(), &[3, 4, 1, 2]);
        for n in 2..=6 {
            assert!(rho(n, n - 1, n).unwrap().is_identity());
        }
        assert!(rho(4, 3, 3).is_err());
        assert!(rho(4, 2, 5).is_err());
    }

    #[test]
    fn rho_is_bijection_up_to_12() {
        for n in 2..=12 {
            for i in 1..=n {
                for j in i + 1..=n {
                    // Construction validates bijectivity internally.
                    let r = rho(n, i, j).unwrap();
                    assert_eq!(r.apply(i), n - 1);
                    assert_eq!(r.apply(j), n);
                }
            }
        }
    }

    #[test]
    fn shuffle_examples() {
        assert_eq!(shuffle(2, 3).images(), &[4, 5, 1, 2, 3]);
        assert!(shuffle(0, 4).is_identity());
        for n in 0..=4 {
            for m in 0..=4 {
                assert!(shuffle(n, m).compose(&shuffle(m, n)).is_identity());
            }
        }
    }

    #[test]
    fn coset_decompose_examples() {
        let d = coset_decompose(&rho(4, 1, 3).unwrap()).unwrap();
        assert_eq!(
            d,
            CosetDecomposition {
                sigma_hat: Perm::identity(2),
                k: 1,
                l: 3,
                eps: false
            }
        );

        let t = Perm::from_images(vec![2, 1, 3, 4]).unwrap();
        let d = coset_decompose(&t).unwrap();
        assert_eq!(d.sigma_hat.images(), &[2, 1]);
        assert_eq!((d.k, d.l, d.eps), (3, 4, false));

        // rho(4,1,3) followed by the value swap (3 4).
        let t = Perm::transposition(4, 3, 4)
            .unwrap()
            .compose(&rho(4, 1, 3).unwrap());
        let d = coset_decompose(&t).unwrap();
        assert_eq!(
            d,
            CosetDecomposition {
                sigma_hat: Perm::identity(2),
                k: 1,
                l: 3,
                eps: true
            }
        );
    }

    #[test]
    fn coset_bijection_exhaustive() {
        // coset_compose ∘ coset_decompose = id on S_n, and decompose ∘ compose = id
        // on the parameter set, for n <= 7.
        for n in 2..=7 {
            let mut seen = HashSet::new();
            for t in all_perms(n) {
                let d = coset_decompose(&t).unwrap();
                assert_eq!(coset_compose(&d).unwrap(), t);
                assert!(seen.insert((d.sigma_hat.clone(), d.k, d.l, d.eps)));
            }
            let order: usize = (1..=n).product();
            assert_eq!(seen.len(), order);
        }
    }

    #[test]
    fn reindex_examples() {
        assert_eq!(reindex_primes(4, 1, 2, 3, 4).unwrap(), (1, 2, 1, 2));
        assert_eq!(reindex_primes(6, 1, 2, 5, 6).unwrap(), (1, 2, 3, 4));
        assert!(reindex_primes(6, 1, 2, 2, 5).is_err());
    }

    #[test]
    fn reindex_role_swap_returns_start() {
        // Swapping the roles of (i,j) and (k,l) reindexes back to the start.
        for n in 4..=7 {
            for i in 1..=n {
                for j in i + 1..=n {
                    for k in 1..=n {
                        for l in k + 1..=n {
                            if [k, l].contains(&i) || [k, l].contains(&j) {
                                continue;
                            }
                            let (ip, jp, kp, lp) = reindex_primes(n, i, j, k, l).unwrap();
                            let (kpp, lpp, ipp, jpp) = reindex_primes(n, k, l, i, j).unwrap();
                            assert_eq!((ip, jp, kp, lp), (ipp, jpp, kpp, lpp));
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn phi_examples() {
        let o = OrderedGluingPair::new(4, 1, 2, 1, 2).unwrap();
        assert_eq!(phi(&o).representative, (1, 2, 3, 4));
        let o = OrderedGluingPair::new(4, 3, 4, 1, 2).unwrap();
        assert_eq!(phi(&o).representative, (1, 2, 3, 4));

        let image: HashSet<_> = all_ordered_pairs(5).iter().map(phi).collect();
        assert_eq!(all_ordered_pairs(5).len(), 30);
        assert_eq!(image.len(), 15);
    }

    #[test]
    fn iota_examples() {
        let o = OrderedGluingPair::new(4, 1, 2, 1, 2).unwrap();
        let i = iota(&o);
        assert_eq!((i.a, i.b, i.c, i.d), (3, 4, 1, 2));
        for o in all_ordered_pairs(6) {
            let t = iota(&o);
            assert_ne!(t, o);
            assert_eq!(iota(&t), o);
            assert_eq!(phi(&t), phi(&o));
        }
    }

    #[test]
    fn pair_counts_and_shift() {
        for n in 4..=10 {
            let on = all_ordered_pairs(n).len();
            let un = all_unordered_classes(n).len();
            let c2 = n * (n - 1) / 2;
            let c2m = (n - 2) * (n - 3) / 2;
            assert_eq!(on, c2 * c2m);
            assert_eq!(un, on / 2);
        }
        let o = OrderedGluingPair::new(4, 1, 2, 1, 2).unwrap();
        assert_eq!(pair_shift(0, &o), o);
        let s = pair_shift(2, &o);
        assert_eq!((s.n, s.a, s.b, s.c, s.d), (6, 3, 4, 3, 4));
        for n in 0..=4 {
            for o in all_ordered_pairs(4) {
                assert_eq!(pair_shift(n, &iota(&o)), iota(&pair_shift(n, &o)));
            }
        }
    }

    #[test]
    fn unordered_class_canonical_rep_is_stable() {
        for cls in all_unordered_classes(6) {
            let (i, j, k, l) = cls.representative;
            for (a, b, c, d) in [
                (i, j, k, l),
                (j, i, l, k),
                (k, l, i, j),
                (l, k, j, i),
                (k, l, j, i),
            ] {
                assert_eq!(UnorderedGluingClass::new(6, a, b, c, d).unwrap(), cls);
            }
            let (ri, rj, rk, rl) = cls.rep_second_larger();
            assert!(ri < rj && rk < rl && rj > rl);
        }
    }
}
