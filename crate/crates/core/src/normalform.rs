//! Matching normal forms.
//!
//! Every rewrite class of elements has a canonical representative in which
//! all mergers sit at the leaf side (a left comb over the inputs in index
//! order), all gluings sit above them, and a single permutation acts at the
//! root. Such a representative is determined by the permutation together
//! with the set of glued leg pairs, recorded in global leg coordinates: input
//! `i`'s legs occupy the flat range `off_i + 1 ..= off_i + v_i` with
//! `off_i = v_1 + … + v_{i-1}`.
//!
//! In odd mode gluings anticommute, so a class is determined only up to sign;
//! the sign of an element is the parity of the permutation sorting its
//! gluing pairs, read root-to-leaf, into ascending lex order (the denotation
//! applies pairs in descending order, so its root-to-leaf reading is
//! ascending). Branch transfers past mergers carry no relation sign; the
//! crossing parities are accounted for by the reading order itself.

use crate::perm::{Perm, PermError};
use crate::symcore::{coset_decompose, rho, SymError};
use crate::trees::{infer_type, Element, PureTree, SignedElement, TreeError};
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Even,
    Odd,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum NfError {
    #[error("modes differ: {0:?} vs {1:?}")]
    ModeMismatch(Mode, Mode),
    #[error("color mismatch: expected {expected}, got {got}")]
    ColorMismatch { expected: usize, got: usize },
    #[error("input index {0} out of range 1..={1}")]
    InputIndex(usize, usize),
    #[error("degree mismatch: expected {expected}, got {got}")]
    DegreeMismatch { expected: usize, got: usize },
    #[error("matching is not a set of disjoint pairs within 1..={0}")]
    BadMatching(usize),
    #[error("output color {output} does not equal {total} - 2*{pairs}")]
    OutputColor {
        output: usize,
        total: usize,
        pairs: usize,
    },
    #[error("sign must be +1 in even mode")]
    EvenSign,
    #[error(transparent)]
    Tree(#[from] TreeError),
    #[error(transparent)]
    Sym(#[from] SymError),
    #[error(transparent)]
    Perm(#[from] PermError),
}

/// Canonical class representative: `sign · sigma ∘ (gluings of `matching`) ∘
/// (left comb of the inputs)`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct NormalForm {
    pub mode: Mode,
    pub inputs: Vec<usize>,
    pub output: usize,
    pub sign: i8,
    pub sigma: Perm,
    pub matching: Vec<(usize, usize)>,
}

impl NormalForm {
    pub fn new(
        mode: Mode,
        inputs: Vec<usize>,
        sign: i8,
        sigma: Perm,
        mut matching: Vec<(usize, usize)>,
    ) -> Result<NormalForm, NfError> {
        let total: usize = inputs.iter().sum();
        let mut seen = vec![false; total];
        for pair in matching.iter_mut() {
            if pair.0 > pair.1 {
                *pair = (pair.1, pair.0);
            }
            for &leg in [pair.0, pair.1].iter() {
                if leg == 0 || leg > total || seen[leg - 1] {
                    return Err(NfError::BadMatching(total));
                }
                seen[leg - 1] = true;
            }
        }
        matching.sort();
        let output = total - 2 * matching.len();
        if sigma.degree() != output {
            return Err(NfError::DegreeMismatch {
                expected: output,
                got: sigma.degree(),
            });
        }
        if !matches!(sign, 1 | -1) || (mode == Mode::Even && sign != 1) {
            return Err(NfError::EvenSign);
        }
        Ok(NormalForm {
            mode,
            inputs,
            output,
            sign,
            sigma,
            matching,
        })
    }

    pub fn identity_on(mode: Mode, color: usize) -> NormalForm {
        NormalForm {
            mode,
            inputs: vec![color],
            output: color,
            sign: 1,
            sigma: Perm::identity(color),
            matching: vec![],
        }
    }

    fn offsets(&self) -> Vec<usize> {
        offsets_of(&self.inputs)
    }

    /// Global legs not glued by the matching, ascending.
    fn survivors(&self) -> Vec<usize> {
        let total: usize = self.inputs.iter().sum();
        let mut dead = vec![false; total + 1];
        for &(a, b) in &self.matching {
            dead[a] = true;
            dead[b] = true;
        }
        (1..=total).filter(|&g| !dead[g]).collect()
    }

    /// Same class with the sign flipped (odd mode).
    pub fn negated(mut self) -> NormalForm {
        self.sign = -self.sign;
        self
    }

    /// Equality of the underlying class data ignoring sign.
    pub fn eq_up_to_sign(&self, other: &NormalForm) -> bool {
        self.mode == other.mode
            && self.inputs == other.inputs
            && self.sigma == other.sigma
            && self.matching == other.matching
    }
}

fn offsets_of(inputs: &[usize]) -> Vec<usize> {
    let mut off = Vec::with_capacity(inputs.len());
    let mut acc = 0;
    for &v in inputs {
        off.push(acc);
        acc += v;
    }
    off
}

fn inversion_parity(pairs: &[(usize, usize)]) -> i8 {
    let mut inversions = 0usize;
    for x in 0..pairs.len() {
        for y in x + 1..pairs.len() {
            if pairs[x] > pairs[y] {
                inversions += 1;
            }
        }
    }
    if inversions % 2 == 0 {
        1
    } else {
        -1
    }
}

struct Partial {
    /// Surviving global legs, ascending; the leg of rank `t` (1-based) sits
    /// at output position `sigma(t)`.
    survivors: Vec<usize>,
    sigma: Perm,
    /// Glued pairs in root-to-leaf (depth-first) order.
    pairs: Vec<(usize, usize)>,
}

/// Structural-recursion normalizer. Gluing indices are translated through
/// the accumulated permutation via the coset decomposition; merger children
/// are combined blockwise; surviving legs are mapped back to the original
/// global legs.
pub fn normalize(e: &Element, mode: Mode) -> Result<NormalForm, NfError> {
    let ty = infer_type(&e.tree)?;
    let offsets = offsets_of(&ty.inputs);

    fn rec(tree: &PureTree, offsets: &[usize]) -> Result<Partial, NfError> {
        match tree {
            PureTree::Leaf { index, color } => {
                let off = offsets[index - 1];
                Ok(Partial {
                    survivors: (off + 1..=off + color).collect(),
                    sigma: Perm::identity(*color),
                    pairs: vec![],
                })
            }
            PureTree::Gluing { i, j, child } => {
                let p = rec(child, offsets)?;
                let n = p.sigma.degree();
                let d = coset_decompose(&rho(n, *i, *j)?.compose(&p.sigma))?;
                let g1 = p.survivors[d.k - 1];
                let g2 = p.survivors[d.l - 1];
                let mut survivors = p.survivors;
                survivors.remove(d.l - 1);
                survivors.remove(d.k - 1);
                let mut pairs = vec![(g1.min(g2), g1.max(g2))];
                pairs.extend(p.pairs);
                Ok(Partial {
                    survivors,
                    sigma: d.sigma_hat,
                    pairs,
                })
            }
            PureTree::Merger { left, right } => {
                let pl = rec(left, offsets)?;
                let pr = rec(right, offsets)?;
                let nl = pl.sigma.degree();
                let mut tagged: Vec<(usize, usize)> = Vec::new();
                for (rank, &g) in pl.survivors.iter().enumerate() {
                    tagged.push((g, pl.sigma.apply(rank + 1)));
                }
                for (rank, &g) in pr.survivors.iter().enumerate() {
                    tagged.push((g, nl + pr.sigma.apply(rank + 1)));
                }
                tagged.sort();
                let survivors: Vec<usize> = tagged.iter().map(|&(g, _)| g).collect();
                let sigma = Perm::from_images(tagged.iter().map(|&(_, pos)| pos).collect())?;
                let mut pairs = pl.pairs;
                pairs.extend(pr.pairs);
                Ok(Partial {
                    survivors,
                    sigma,
                    pairs,
                })
            }
        }
    }

    let p = rec(&e.tree, &offsets)?;
    let sigma = e.sigma.compose(&p.sigma);
    let sign = match mode {
        Mode::Even => 1,
        Mode::Odd => inversion_parity(&p.pairs),
    };
    NormalForm::new(mode, ty.inputs, sign, sigma, p.pairs)
}

/// Normalizes a signed element, folding its sign into the result.
pub fn normalize_signed(se: &SignedElement, mode: Mode) -> Result<NormalForm, NfError> {
    let mut nf = normalize(&se.0, mode)?;
    nf.sign *= se.1;
    if mode == Mode::Even {
        nf.sign = 1;
    }
    Ok(nf)
}

/// The canonical element of a normal form: a left comb of the inputs, one
/// gluing per matching pair applied leaves-to-root in descending lex order
/// (indices re-expressed in the surviving-leg labeling), and `sigma` at the
/// root. The accompanying sign is the normal form's own.
pub fn denote(nf: &NormalForm) -> Result<SignedElement, NfError> {
    let total: usize = nf.inputs.iter().sum();
    if nf.inputs.is_empty() {
        return Err(NfError::InputIndex(0, 0));
    }
    let mut tree = PureTree::leaf(1, nf.inputs[0]);
    for (idx, &color) in nf.inputs.iter().enumerate().skip(1) {
        tree = PureTree::merger(tree, PureTree::leaf(idx + 1, color))?;
    }
    let mut alive: Vec<usize> = (1..=total).collect();
    let mut pairs = nf.matching.clone();
    pairs.sort();
    for &(a, b) in pairs.iter().rev() {
        let ca = alive.binary_search(&a).map_err(|_| NfError::BadMatching(total))? + 1;
        let cb = alive.binary_search(&b).map_err(|_| NfError::BadMatching(total))? + 1;
        tree = PureTree::gluing(ca, cb, tree)?;
        alive.retain(|&g| g != a && g != b);
    }
    Ok((Element::new(nf.sigma.clone(), tree)?, nf.sign))
}

/// Operadic composition `outer ∘_i inner` computed directly on normal-form
/// data; agrees with grafting the denotations and renormalizing.
pub fn compose_at(outer: &NormalForm, i: usize, inner: &NormalForm) -> Result<NormalForm, NfError> {
    if outer.mode != inner.mode {
        return Err(NfError::ModeMismatch(outer.mode, inner.mode));
    }
    let r = outer.inputs.len();
    if i == 0 || i > r {
        return Err(NfError::InputIndex(i, r));
    }
    if outer.inputs[i - 1] != inner.output {
        return Err(NfError::ColorMismatch {
            expected: outer.inputs[i - 1],
            got: inner.output,
        });
    }

    let mut inputs: Vec<usize> = Vec::with_capacity(r + inner.inputs.len() - 1);
    inputs.extend_from_slice(&outer.inputs[..i - 1]);
    inputs.extend_from_slice(&inner.inputs);
    inputs.extend_from_slice(&outer.inputs[i..]);
    let new_off = offsets_of(&inputs);
    let outer_off = outer.offsets();
    let inner_total: usize = inner.inputs.iter().sum();

    // New flat position of an inner leg: inner input k lands at slot i-1+k.
    let inner_to_new = |leg: usize| -> usize {
        let mut k = 0;
        let ioff = offsets_of(&inner.inputs);
        while k + 1 < inner.inputs.len() && leg > ioff[k] + inner.inputs[k] {
            k += 1;
        }
        new_off[i - 1 + k] + (leg - ioff[k])
    };
    // New flat position of an outer leg on input j != i.
    let outer_to_new = |leg: usize| -> usize {
        let mut j = 0;
        while j + 1 < outer.inputs.len() && leg > outer_off[j] + outer.inputs[j] {
            j += 1;
        }
        debug_assert_ne!(j + 1, i);
        let slot = if j + 1 < i { j } else { j + inner.inputs.len() - 1 };
        new_off[slot] + (leg - outer_off[j])
    };

    // Outer legs on input i are realized by inner's surviving legs.
    let inner_surv = inner.survivors();
    let realize = |leg: usize| -> usize {
        let on_i = leg > outer_off[i - 1] && leg <= outer_off[i - 1] + outer.inputs[i - 1];
        if on_i {
            let p = leg - outer_off[i - 1];
            let rank = inner.sigma.apply_inverse(p);
            inner_to_new(inner_surv[rank - 1])
        } else {
            outer_to_new(leg)
        }
    };

    let mut pairs: Vec<(usize, usize)> = Vec::new();
    for &(a, b) in &outer.matching {
        let (x, y) = (realize(a), realize(b));
        pairs.push((x.min(y), x.max(y)));
    }
    for &(a, b) in &inner.matching {
        let (x, y) = (inner_to_new(a), inner_to_new(b));
        pairs.push((x.min(y), x.max(y)));
    }

    let sign = match outer.mode {
        Mode::Even => 1,
        Mode::Odd => outer.sign * inner.sign * inversion_parity(&pairs),
    };

    // Survivor routing: outer survivors keep outer's output positions.
    let mut tagged: Vec<(usize, usize)> = Vec::new();
    for (rank, &leg) in outer.survivors().iter().enumerate() {
        tagged.push((realize(leg), outer.sigma.apply(rank + 1)));
    }
    tagged.sort();
    let sigma = Perm::from_images(tagged.iter().map(|&(_, pos)| pos).collect())?;
    debug_assert_eq!(
        inputs.iter().sum::<usize>(),
        outer.inputs.iter().sum::<usize>() + inner_total - inner.output
    );
    NormalForm::new(outer.mode, inputs, sign, sigma, pairs)
}

/// A group action on a normal form.
#[derive(Debug, Clone)]
pub enum Action {
    /// Left action of the output color's group: relabels output legs.
    Left(Perm),
    /// Right action on one input: relabels that input's legs.
    Right { input: usize, perm: Perm },
    /// Input relabeling: input `k` becomes input `perm(k)`.
    Relabel(Perm),
}

/// Applies a group action; agrees with decorating the denotation and
/// renormalizing.
pub fn act(nf: &NormalForm, action: &Action) -> Result<NormalForm, NfError> {
    match action {
        Action::Left(s) => {
            if s.degree() != nf.output {
                return Err(NfError::DegreeMismatch {
                    expected: nf.output,
                    got: s.degree(),
                });
            }
            Ok(NormalForm {
                sigma: s.compose(&nf.sigma),
                ..nf.clone()
            })
        }
        Action::Right { input, perm } => {
            let r = nf.inputs.len();
            if *input == 0 || *input > r {
                return Err(NfError::InputIndex(*input, r));
            }
            if perm.degree() != nf.inputs[*input - 1] {
                return Err(NfError::DegreeMismatch {
                    expected: nf.inputs[*input - 1],
                    got: perm.degree(),
                });
            }
            let off = nf.offsets()[*input - 1];
            let v = nf.inputs[*input - 1];
            // Acted leg x corresponds to original leg phi(x).
            let phi_inv = |leg: usize| -> usize {
                if leg > off && leg <= off + v {
                    off + perm.apply_inverse(leg - off)
                } else {
                    leg
                }
            };
            transport(nf, nf.inputs.clone(), phi_inv)
        }
        Action::Relabel(pi) => {
            let r = nf.inputs.len();
            if pi.degree() != r {
                return Err(NfError::DegreeMismatch {
                    expected: r,
                    got: pi.degree(),
                });
            }
            let mut inputs = vec![0; r];
            for k in 1..=r {
                inputs[pi.apply(k) - 1] = nf.inputs[k - 1];
            }
            let old_off = nf.offsets();
            let new_off = offsets_of(&inputs);
            let old_inputs = nf.inputs.clone();
            let to_new = move |leg: usize| -> usize {
                let mut k = 0;
                while k + 1 < old_inputs.len() && leg > old_off[k] + old_inputs[k] {
                    k += 1;
                }
                new_off[pi.apply(k + 1) - 1] + (leg - old_off[k])
            };
            transport(nf, inputs, to_new)
        }
    }
}

/// Rebuilds a normal form after a relabeling of the global legs. `to_new`
/// maps original legs to acted legs.
fn transport(
    nf: &NormalForm,
    inputs: Vec<usize>,
    to_new: impl Fn(usize) -> usize,
) -> Result<NormalForm, NfError> {
    let pairs: Vec<(usize, usize)> = nf
        .matching
        .iter()
        .map(|&(a, b)| {
            let (x, y) = (to_new(a), to_new(b));
            (x.min(y), x.max(y))
        })
        .collect();
    let sign = match nf.mode {
        Mode::Even => 1,
        Mode::Odd => nf.sign * inversion_parity(&pairs),
    };
    let mut tagged: Vec<(usize, usize)> = Vec::new();
    for (rank, &leg) in nf.survivors().iter().enumerate() {
        tagged.push((to_new(leg), nf.sigma.apply(rank + 1)));
    }
    tagged.sort();
    let sigma = Perm::from_images(tagged.iter().map(|&(_, pos)| pos).collect())?;
    NormalForm::new(nf.mode, inputs, sign, sigma, pairs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::trees::RawTree;

    fn glue_chain(pairs: &[(usize, usize)], leaf_color: usize) -> Element {
        // Builds xi[p_k]...xi[p_1](x1:c), first listed applied first (topmost).
        let mut tree = PureTree::leaf(1, leaf_color);
        for &(i, j) in pairs {
            tree = PureTree::gluing(i, j, tree).unwrap();
        }
        Element::from_tree(tree)
    }

    #[test]
    fn normalize_gluing_chain() {
        // xi[1,2](xi[1,2](x1:4)): both pairs in original leg labels.
        let e = glue_chain(&[(1, 2), (1, 2)], 4);
        let nf = normalize(&e, Mode::Even).unwrap();
        assert_eq!(nf.matching, vec![(1, 2), (3, 4)]);
        assert_eq!(nf.output, 0);
        assert_eq!(nf.sign, 1);

        // xi[1,2](xi[3,4](x1:4)): same class.
        let e2 = glue_chain(&[(3, 4), (1, 2)], 4);
        let nf2 = normalize(&e2, Mode::Even).unwrap();
        assert_eq!(nf, nf2);

        // Odd mode: equal up to an explicit sign flip.
        let o1 = normalize(&e, Mode::Odd).unwrap();
        let o2 = normalize(&e2, Mode::Odd).unwrap();
        assert!(o1.eq_up_to_sign(&o2));
        assert_eq!(o1.sign * o2.sign, -1);
    }

    #[test]
    fn denote_roundtrip() {
        let nf = NormalForm::new(
            Mode::Even,
            vec![4],
            1,
            Perm::identity(0),
            vec![(1, 2), (3, 4)],
        )
        .unwrap();
        let (el, sign) = denote(&nf).unwrap();
        assert_eq!(sign, 1);
        // Descending order: {3,4} applied topmost, then survivors 1,2.
        assert_eq!(el.tree, glue_chain(&[(3, 4), (1, 2)], 4).tree);
        assert_eq!(normalize(&el, Mode::Even).unwrap(), nf);

        let bare = NormalForm::identity_on(Mode::Even, 3);
        let (el, _) = denote(&bare).unwrap();
        assert_eq!(el.tree, PureTree::leaf(1, 3));

        let sigma = Perm::from_images(vec![2, 1, 4, 3]).unwrap();
        let m = NormalForm::new(Mode::Even, vec![2, 2], 1, sigma.clone(), vec![]).unwrap();
        let (el, _) = denote(&m).unwrap();
        assert_eq!(el.sigma, sigma);
        assert_eq!(
            el.tree,
            PureTree::merger(PureTree::leaf(1, 2), PureTree::leaf(2, 2)).unwrap()
        );
    }

    #[test]
    fn denote_normalize_identity_over_modes() {
        for mode in [Mode::Even, Mode::Odd] {
            for sign in [1i8, -1] {
                if mode == Mode::Even && sign == -1 {
                    continue;
                }
                let nf = NormalForm::new(
                    mode,
                    vec![2, 3],
                    sign,
                    Perm::from_images(vec![1]).unwrap(),
                    vec![(1, 3), (2, 4)],
                )
                .unwrap();
                let se = denote(&nf).unwrap();
                assert_eq!(normalize_signed(&se, mode).unwrap(), nf);
            }
        }
    }

    #[test]
    fn normalize_merger_with_decorations() {
        // Purified m(x1:2, xi[1,2](x2:4)) with a block decoration.
        let swap = Perm::from_images(vec![2, 1]).unwrap();
        let glued = RawTree::gluing(1, 2, RawTree::leaf(2, 4))
            .unwrap()
            .decorate(&swap)
            .unwrap();
        let raw = RawTree::merger_ordered(RawTree::leaf(1, 2), glued);
        let e = crate::trees::purify(&raw).unwrap();
        let nf = normalize(&e, Mode::Even).unwrap();
        assert_eq!(nf.inputs, vec![2, 4]);
        assert_eq!(nf.matching, vec![(3, 4)]);
        assert_eq!(nf.sigma.images(), &[1, 2, 4, 3]);
    }

    #[test]
    fn compose_unit_laws() {
        let id2 = NormalForm::identity_on(Mode::Even, 2);
        let m = NormalForm::new(
            Mode::Even,
            vec![2, 2],
            1,
            Perm::from_images(vec![3, 1, 4, 2]).unwrap(),
            vec![],
        )
        .unwrap();
        assert_eq!(compose_at(&m, 1, &id2).unwrap(), m);
        assert_eq!(compose_at(&m, 2, &id2).unwrap(), m);
        let wrap = NormalForm::identity_on(Mode::Even, 4);
        assert_eq!(compose_at(&wrap, 1, &m).unwrap(), m);
    }

    #[test]
    fn compose_merger_nfs() {
        let outer = NormalForm::new(Mode::Even, vec![2, 2], 1, Perm::identity(4), vec![]).unwrap();
        let inner = NormalForm::new(Mode::Even, vec![1, 1], 1, Perm::identity(2), vec![]).unwrap();
        let c = compose_at(&outer, 1, &inner).unwrap();
        assert_eq!(c.inputs, vec![1, 1, 2]);
        assert_eq!(c.matching, vec![]);
        assert!(c.sigma.is_identity());
    }

    #[test]
    fn compose_color_mismatch() {
        let outer = NormalForm::new(Mode::Even, vec![2, 2], 1, Perm::identity(4), vec![]).unwrap();
        let inner = NormalForm::identity_on(Mode::Even, 3);
        assert!(matches!(
            compose_at(&outer, 1, &inner),
            Err(NfError::ColorMismatch { .. })
        ));
    }

    #[test]
    fn left_action_composes_sigma() {
        let nf = NormalForm::new(
            Mode::Even,
            vec![2, 2],
            1,
            Perm::from_images(vec![2, 1, 3, 4]).unwrap(),
            vec![],
        )
        .unwrap();
        let id = act(&nf, &Action::Left(Perm::identity(4))).unwrap();
        assert_eq!(id, nf);
        let s = Perm::from_images(vec![4, 3, 2, 1]).unwrap();
        let acted = act(&nf, &Action::Left(s.clone())).unwrap();
        assert_eq!(acted.sigma, s.compose(&nf.sigma));
    }
}
