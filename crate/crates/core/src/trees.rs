//! Labeled trees over the two generator families.
//!
//! A [`PureTree`] is a rooted tree whose unary vertices carry gluing labels
//! `xi[i,j]` and whose binary vertices are mergers with branches stored in
//! least-leaf order. Leaves are the inputs, labeled bijectively `1..r`, each
//! carrying a color. An [`Element`] pairs a pure tree with a root permutation;
//! by the coset representatives of [`crate::symcore`], every decorated tree
//! rewrites uniquely into this form ([`purify`]).
//!
//! [`local_rewrite`] implements the single-edge moves generating the
//! equivalence on elements: swapping two adjacent gluings (through the
//! involution `ι`), transferring a branch between a merger and a gluing, and
//! the merger associativity move. Rewrites preserve type and bigrade. When a
//! merger move forces a branch re-sort, the resulting block shuffle is pushed
//! into the root permutation.

use crate::perm::{block_embed, Perm};
use crate::symcore::{coset_decompose, iota, rho, shuffle, OrderedGluingPair, SymError};
use std::fmt;
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum TreeError {
    #[error("vertex at path {path:?}: gluing pair ({i},{j}) invalid for input color {color}")]
    BadGluing {
        path: Vec<u8>,
        i: usize,
        j: usize,
        color: usize,
    },
    #[error("vertex at path {path:?}: branches out of least-leaf order (left min {left_min}, right min {right_min})")]
    BranchOrder {
        path: Vec<u8>,
        left_min: usize,
        right_min: usize,
    },
    #[error("vertex at path {path:?}: decoration degree {got} does not match output color {expected}")]
    DecorationDegree {
        path: Vec<u8>,
        got: usize,
        expected: usize,
    },
    #[error("leaf indices must be exactly 1..{expected}, saw {got:?}")]
    LeafIndices { expected: usize, got: Vec<usize> },
    #[error("root permutation degree {got} does not match output color {expected}")]
    RootDegree { got: usize, expected: usize },
    #[error("edge id {0} is not an internal edge")]
    EdgeNotInternal(usize),
    #[error(transparent)]
    Sym(#[from] SymError),
}

/// Generator label carried by an internal vertex.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum GenLabel {
    /// `xi[i,j]` on input color `n`, output `n - 2`. Requires `1 <= i < j <= n`, `n >= 2`.
    SelfGluing { n: usize, i: usize, j: usize },
    /// Merger of colors `n` and `m`, output `n + m`.
    Merger { n: usize, m: usize },
}

/// A pure labeled tree: gluing and merger vertices, no permutation
/// decorations, branches in least-leaf order.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum PureTree {
    Leaf {
        index: usize,
        color: usize,
    },
    Gluing {
        i: usize,
        j: usize,
        child: Box<PureTree>,
    },
    Merger {
        left: Box<PureTree>,
        right: Box<PureTree>,
    },
}

impl PureTree {
    pub fn leaf(index: usize, color: usize) -> PureTree {
        PureTree::Leaf { index, color }
    }

    pub fn gluing(i: usize, j: usize, child: PureTree) -> Result<PureTree, TreeError> {
        let color = child.output_color();
        if i == 0 || i >= j || j > color {
            return Err(TreeError::BadGluing {
                path: vec![],
                i,
                j,
                color,
            });
        }
        Ok(PureTree::Gluing {
            i,
            j,
            child: Box::new(child),
        })
    }

    pub fn merger(left: PureTree, right: PureTree) -> Result<PureTree, TreeError> {
        let (lm, rm) = (left.min_leaf(), right.min_leaf());
        if lm >= rm {
            return Err(TreeError::BranchOrder {
                path: vec![],
                left_min: lm,
                right_min: rm,
            });
        }
        Ok(PureTree::Merger {
            left: Box::new(left),
            right: Box::new(right),
        })
    }

    pub fn output_color(&self) -> usize {
        match self {
            PureTree::Leaf { color, .. } => *color,
            PureTree::Gluing { child, .. } => child.output_color() - 2,
            PureTree::Merger { left, right } => left.output_color() + right.output_color(),
        }
    }

    pub fn min_leaf(&self) -> usize {
        match self {
            PureTree::Leaf { index, .. } => *index,
            PureTree::Gluing { child, .. } => child.min_leaf(),
            PureTree::Merger { left, .. } => left.min_leaf(),
        }
    }

    /// Number of gluing vertices (the `s` of the bigrade).
    pub fn gluing_count(&self) -> usize {
        match self {
            PureTree::Leaf { .. } => 0,
            PureTree::Gluing { child, .. } => 1 + child.gluing_count(),
            PureTree::Merger { left, right } => left.gluing_count() + right.gluing_count(),
        }
    }

    /// Number of merger vertices (the `m` of the bigrade).
    pub fn merger_count(&self) -> usize {
        match self {
            PureTree::Leaf { .. } => 0,
            PureTree::Gluing { child, .. } => child.merger_count(),
            PureTree::Merger { left, right } => 1 + left.merger_count() + right.merger_count(),
        }
    }

    fn collect_leaves(&self, out: &mut Vec<(usize, usize)>) {
        match self {
            PureTree::Leaf { index, color } => out.push((*index, *color)),
            PureTree::Gluing { child, .. } => child.collect_leaves(out),
            PureTree::Merger { left, right } => {
                left.collect_leaves(out);
                right.collect_leaves(out);
            }
        }
    }

    /// Leaves in tree (depth-first) order as `(index, color)` pairs.
    pub fn leaves(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        self.collect_leaves(&mut out);
        out
    }

    /// Paths of the internal vertices in depth-first pre-order. Path entries
    /// are branch directions (0 = only/left child, 1 = right child); the root
    /// has the empty path.
    pub fn internal_vertex_paths(&self) -> Vec<Vec<u8>> {
        let mut out = Vec::new();
        fn walk(t: &PureTree, path: &mut Vec<u8>, out: &mut Vec<Vec<u8>>) {
            match t {
                PureTree::Leaf { .. } => {}
                PureTree::Gluing { child, .. } => {
                    out.push(path.clone());
                    path.push(0);
                    walk(child, path, out);
                    path.pop();
                }
                PureTree::Merger { left, right } => {
                    out.push(path.clone());
                    path.push(0);
                    walk(left, path, out);
                    path.pop();
                    path.push(1);
                    walk(right, path, out);
                    path.pop();
                }
            }
        }
        walk(self, &mut Vec::new(), &mut out);
        out
    }

    /// Internal edge ids: the depth-first index of the vertex above each
    /// edge. The root (id 0) has no edge below it.
    pub fn internal_edges(&self) -> Vec<usize> {
        (1..self.internal_vertex_paths().len()).collect()
    }
}

impl fmt::Display for PureTree {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PureTree::Leaf { index, color } => write!(f, "x{index}:{color}"),
            PureTree::Gluing { i, j, child } => write!(f, "xi[{i},{j}]({child})"),
            PureTree::Merger { left, right } => write!(f, "m({left}, {right})"),
        }
    }
}

/// A basis element of the free operad: a root permutation acting on the
/// output of a pure tree.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Element {
    pub sigma: Perm,
    pub tree: PureTree,
}

impl Element {
    pub fn new(sigma: Perm, tree: PureTree) -> Result<Element, TreeError> {
        if sigma.degree() != tree.output_color() {
            return Err(TreeError::RootDegree {
                got: sigma.degree(),
                expected: tree.output_color(),
            });
        }
        Ok(Element { sigma, tree })
    }

    pub fn from_tree(tree: PureTree) -> Element {
        let sigma = Perm::identity(tree.output_color());
        Element { sigma, tree }
    }
}

impl fmt::Display for Element {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.sigma.is_identity() {
            write!(f, "{}", self.tree)
        } else {
            let images: Vec<String> = self.sigma.images().iter().map(|x| x.to_string()).collect();
            write!(f, "p[{}]({})", images.join(" "), self.tree)
        }
    }
}

/// Type and bigrade of a tree: input colors in leaf-index order, output
/// color, and the generator counts `(s, m)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TreeType {
    pub inputs: Vec<usize>,
    pub output: usize,
    pub gluings: usize,
    pub mergers: usize,
}

impl TreeType {
    pub fn total_input_color(&self) -> usize {
        self.inputs.iter().sum()
    }
}

/// Computes the type of a pure tree, validating color consistency, gluing
/// bounds, branch order, and the leaf labeling.
pub fn infer_type(tree: &PureTree) -> Result<TreeType, TreeError> {
    fn walk(t: &PureTree, path: &mut Vec<u8>) -> Result<usize, TreeError> {
        match t {
            PureTree::Leaf { color, .. } => Ok(*color),
            PureTree::Gluing { i, j, child } => {
                path.push(0);
                let color = walk(child, path)?;
                path.pop();
                if *i == 0 || i >= j || *j > color || color < 2 {
                    return Err(TreeError::BadGluing {
                        path: path.clone(),
                        i: *i,
                        j: *j,
                        color,
                    });
                }
                Ok(color - 2)
            }
            PureTree::Merger { left, right } => {
                let (lm, rm) = (left.min_leaf(), right.min_leaf());
                if lm >= rm {
                    return Err(TreeError::BranchOrder {
                        path: path.clone(),
                        left_min: lm,
                        right_min: rm,
                    });
                }
                path.push(0);
                let lc = walk(left, path)?;
                path.pop();
                path.push(1);
                let rc = walk(right, path)?;
                path.pop();
                Ok(lc + rc)
            }
        }
    }
    let output = walk(tree, &mut Vec::new())?;
    let mut leaves = tree.leaves();
    leaves.sort();
    let indices: Vec<usize> = leaves.iter().map(|&(i, _)| i).collect();
    if indices != (1..=leaves.len()).collect::<Vec<_>>() {
        return Err(TreeError::LeafIndices {
            expected: leaves.len(),
            got: indices,
        });
    }
    Ok(TreeType {
        inputs: leaves.into_iter().map(|(_, c)| c).collect(),
        output,
        gluings: tree.gluing_count(),
        mergers: tree.merger_count(),
    })
}

// ---------------------------------------------------------------------------
// Decorated trees and purification
// ---------------------------------------------------------------------------

/// A tree whose every vertex additionally carries a left permutation
/// decoration of its output color. The underlying labels satisfy the same
/// invariants as [`PureTree`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RawTree {
    pub decor: Perm,
    pub node: RawNode,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum RawNode {
    Leaf {
        index: usize,
        color: usize,
    },
    Gluing {
        i: usize,
        j: usize,
        child: Box<RawTree>,
    },
    Merger {
        left: Box<RawTree>,
        right: Box<RawTree>,
    },
}

impl RawTree {
    pub fn leaf(index: usize, color: usize) -> RawTree {
        RawTree {
            decor: Perm::identity(color),
            node: RawNode::Leaf { index, color },
        }
    }

    pub fn gluing(i: usize, j: usize, child: RawTree) -> Result<RawTree, TreeError> {
        let color = child.output_color();
        if i == 0 || i >= j || j > color {
            return Err(TreeError::BadGluing {
                path: vec![],
                i,
                j,
                color,
            });
        }
        Ok(RawTree {
            decor: Perm::identity(color - 2),
            node: RawNode::Gluing {
                i,
                j,
                child: Box::new(child),
            },
        })
    }

    /// Merger of two branches in the given order. If the order violates the
    /// least-leaf invariant the branches are swapped and the block shuffle
    /// re-expressing the original leg order becomes the decoration.
    pub fn merger_ordered(first: RawTree, second: RawTree) -> RawTree {
        let (a, b) = (first.output_color(), second.output_color());
        if first.min_leaf() < second.min_leaf() {
            RawTree {
                decor: Perm::identity(a + b),
                node: RawNode::Merger {
                    left: Box::new(first),
                    right: Box::new(second),
                },
            }
        } else {
            RawTree {
                decor: shuffle(b, a),
                node: RawNode::Merger {
                    left: Box::new(second),
                    right: Box::new(first),
                },
            }
        }
    }

    /// Composes an additional left decoration onto this vertex.
    pub fn decorate(mut self, perm: &Perm) -> Result<RawTree, TreeError> {
        if perm.degree() != self.decor.degree() {
            return Err(TreeError::DecorationDegree {
                path: vec![],
                got: perm.degree(),
                expected: self.decor.degree(),
            });
        }
        self.decor = perm.compose(&self.decor);
        Ok(self)
    }

    pub fn from_pure(tree: &PureTree) -> RawTree {
        match tree {
            PureTree::Leaf { index, color } => RawTree::leaf(*index, *color),
            PureTree::Gluing { i, j, child } => RawTree {
                decor: Perm::identity(tree.output_color()),
                node: RawNode::Gluing {
                    i: *i,
                    j: *j,
                    child: Box::new(RawTree::from_pure(child)),
                },
            },
            PureTree::Merger { left, right } => RawTree {
                decor: Perm::identity(tree.output_color()),
                node: RawNode::Merger {
                    left: Box::new(RawTree::from_pure(left)),
                    right: Box::new(RawTree::from_pure(right)),
                },
            },
        }
    }

    pub fn from_element(e: &Element) -> RawTree {
        let mut raw = RawTree::from_pure(&e.tree);
        raw.decor = e.sigma.compose(&raw.decor);
        raw
    }

    pub fn output_color(&self) -> usize {
        match &self.node {
            RawNode::Leaf { color, .. } => *color,
            RawNode::Gluing { child, .. } => child.output_color() - 2,
            RawNode::Merger { left, right } => left.output_color() + right.output_color(),
        }
    }

    pub fn min_leaf(&self) -> usize {
        match &self.node {
            RawNode::Leaf { index, .. } => *index,
            RawNode::Gluing { child, .. } => child.min_leaf(),
            RawNode::Merger { left, .. } => left.min_leaf(),
        }
    }

    /// Paths of all non-root vertices (internal and leaves), each of which
    /// carries a decoration that can be pushed down.
    pub fn pushable_paths(&self) -> Vec<Vec<u8>> {
        let mut out = Vec::new();
        fn walk(t: &RawTree, path: &mut Vec<u8>, out: &mut Vec<Vec<u8>>) {
            if !path.is_empty() {
                out.push(path.clone());
            }
            match &t.node {
                RawNode::Leaf { .. } => {}
                RawNode::Gluing { child, .. } => {
                    path.push(0);
                    walk(child, path, out);
                    path.pop();
                }
                RawNode::Merger { left, right } => {
                    path.push(0);
                    walk(left, path, out);
                    path.pop();
                    path.push(1);
                    walk(right, path, out);
                    path.pop();
                }
            }
        }
        walk(self, &mut Vec::new(), &mut out);
        out
    }
}

/// Rewrites a decorated tree into its unique `(root permutation, pure tree)`
/// form by pushing every decoration toward the root. The result does not
/// depend on the order in which decorations are pushed; this recursion uses
/// leaves-first order.
pub fn purify(raw: &RawTree) -> Result<Element, TreeError> {
    fn rec(raw: &RawTree, path: &mut Vec<u8>) -> Result<(Perm, PureTree), TreeError> {
        let out = raw.output_color();
        if raw.decor.degree() != out {
            return Err(TreeError::DecorationDegree {
                path: path.clone(),
                got: raw.decor.degree(),
                expected: out,
            });
        }
        match &raw.node {
            RawNode::Leaf { index, color } => {
                Ok((raw.decor.clone(), PureTree::leaf(*index, *color)))
            }
            RawNode::Gluing { i, j, child } => {
                path.push(0);
                let (delta, tc) = rec(child, path)?;
                path.pop();
                let n = tc.output_color();
                if *i == 0 || i >= j || *j > n {
                    return Err(TreeError::BadGluing {
                        path: path.clone(),
                        i: *i,
                        j: *j,
                        color: n,
                    });
                }
                let d = coset_decompose(&rho(n, *i, *j)?.compose(&delta))?;
                Ok((
                    raw.decor.compose(&d.sigma_hat),
                    PureTree::Gluing {
                        i: d.k,
                        j: d.l,
                        child: Box::new(tc),
                    },
                ))
            }
            RawNode::Merger { left, right } => {
                let (lm, rm) = (left.min_leaf(), right.min_leaf());
                if lm >= rm {
                    return Err(TreeError::BranchOrder {
                        path: path.clone(),
                        left_min: lm,
                        right_min: rm,
                    });
                }
                path.push(0);
                let (dl, tl) = rec(left, path)?;
                path.pop();
                path.push(1);
                let (dr, tr) = rec(right, path)?;
                path.pop();
                Ok((
                    raw.decor.compose(&block_embed(&dl, &dr)),
                    PureTree::Merger {
                        left: Box::new(tl),
                        right: Box::new(tr),
                    },
                ))
            }
        }
    }
    let (sigma, tree) = rec(raw, &mut Vec::new())?;
    infer_type(&tree)?;
    Element::new(sigma, tree)
}

/// Pushes the decoration at the vertex addressed by `path` down onto its
/// parent, in place. Exposed so order-independence of [`purify`] can be
/// exercised edge order by edge order.
pub fn push_down_at(raw: &mut RawTree, path: &[u8]) -> Result<(), TreeError> {
    assert!(!path.is_empty(), "cannot push at the root");
    if path.len() > 1 {
        let child = match &mut raw.node {
            RawNode::Gluing { child, .. } => child,
            RawNode::Merger { left, right } => {
                if path[0] == 0 {
                    left
                } else {
                    right
                }
            }
            RawNode::Leaf { .. } => unreachable!("path descends through a leaf"),
        };
        return push_down_at(child, &path[1..]);
    }
    // path addresses a direct child of `raw`.
    match &mut raw.node {
        RawNode::Leaf { .. } => unreachable!("path descends through a leaf"),
        RawNode::Gluing { i, j, child } => {
            let n = child.output_color();
            let sigma = std::mem::replace(&mut child.decor, Perm::identity(n));
            let d = coset_decompose(&rho(n, *i, *j)?.compose(&sigma))?;
            *i = d.k;
            *j = d.l;
            raw.decor = raw.decor.compose(&d.sigma_hat);
        }
        RawNode::Merger { left, right } => {
            let (ln, rn) = (left.output_color(), right.output_color());
            if path[0] == 0 {
                let sigma = std::mem::replace(&mut left.decor, Perm::identity(ln));
                raw.decor = raw.decor.compose(&block_embed(&sigma, &Perm::identity(rn)));
            } else {
                let sigma = std::mem::replace(&mut right.decor, Perm::identity(rn));
                raw.decor = raw.decor.compose(&block_embed(&Perm::identity(ln), &sigma));
            }
        }
    }
    Ok(())
}

/// Purifies by pushing decorations down in the given vertex order. The order
/// must be admissible: a vertex is pushed only after every vertex above it.
pub fn purify_with_order(raw: &RawTree, order: &[Vec<u8>]) -> Result<Element, TreeError> {
    let mut work = raw.clone();
    for path in order {
        push_down_at(&mut work, path)?;
    }
    fn strip(raw: &RawTree) -> PureTree {
        match &raw.node {
            RawNode::Leaf { index, color } => PureTree::leaf(*index, *color),
            RawNode::Gluing { i, j, child } => PureTree::Gluing {
                i: *i,
                j: *j,
                child: Box::new(strip(child)),
            },
            RawNode::Merger { left, right } => PureTree::Merger {
                left: Box::new(strip(left)),
                right: Box::new(strip(right)),
            },
        }
    }
    for p in work.pushable_paths() {
        let mut cursor = &work;
        for &d in &p {
            cursor = match &cursor.node {
                RawNode::Gluing { child, .. } => child,
                RawNode::Merger { left, right } => {
                    if d == 0 {
                        left
                    } else {
                        right
                    }
                }
                RawNode::Leaf { .. } => unreachable!(),
            };
        }
        debug_assert!(cursor.decor.is_identity(), "push order was not admissible");
    }
    Element::new(work.decor.clone(), strip(&work))
}

/// All admissible push-down orders of `raw` (linear extensions of the
/// above-first constraint). Exponential; intended for small trees.
pub fn all_push_orders(raw: &RawTree) -> Vec<Vec<Vec<u8>>> {
    let paths = raw.pushable_paths();
    let mut orders = Vec::new();
    let mut current: Vec<usize> = Vec::new();
    let mut used = vec![false; paths.len()];
    fn is_prefix(shorter: &[u8], longer: &[u8]) -> bool {
        longer.len() > shorter.len() && longer[..shorter.len()] == *shorter
    }
    fn extend(
        paths: &[Vec<u8>],
        used: &mut Vec<bool>,
        current: &mut Vec<usize>,
        orders: &mut Vec<Vec<Vec<u8>>>,
    ) {
        if current.len() == paths.len() {
            orders.push(current.iter().map(|&i| paths[i].clone()).collect());
            return;
        }
        for cand in 0..paths.len() {
            if used[cand] {
                continue;
            }
            // Every vertex strictly above must already be pushed.
            let blocked = (0..paths.len())
                .any(|other| !used[other] && is_prefix(&paths[cand], &paths[other]));
            if blocked {
                continue;
            }
            used[cand] = true;
            current.push(cand);
            extend(paths, used, current, orders);
            current.pop();
            used[cand] = false;
        }
    }
    extend(&paths, &mut used, &mut current, &mut orders);
    orders
}

// ---------------------------------------------------------------------------
// Tree-level operadic operations
// ---------------------------------------------------------------------------

/// Grafts `inner` onto leaf `i` of `outer`, renumbering inputs so that
/// `inner`'s inputs take slots `i .. i+s-1` and later inputs of `outer` shift
/// up. The result is a decorated tree; purify to land back in element form.
pub fn graft_raw(outer: &Element, i: usize, inner: &Element) -> Result<RawTree, TreeError> {
    let inner_arity = infer_type(&inner.tree)?.inputs.len();
    fn rebuild(
        t: &PureTree,
        i: usize,
        inner_arity: usize,
        inner: &Element,
    ) -> Result<RawTree, TreeError> {
        match t {
            PureTree::Leaf { index, color } => {
                if *index == i {
                    let mut raw = renumber_raw(&inner.tree, &|k| i - 1 + k);
                    raw = raw.decorate(&inner.sigma)?;
                    debug_assert_eq!(raw.output_color(), *color);
                    Ok(raw)
                } else {
                    let index = if *index < i {
                        *index
                    } else {
                        *index + inner_arity - 1
                    };
                    Ok(RawTree::leaf(index, *color))
                }
            }
            PureTree::Gluing { i: a, j: b, child } => {
                RawTree::gluing(*a, *b, rebuild(child, i, inner_arity, inner)?)
            }
            PureTree::Merger { left, right } => Ok(RawTree::merger_ordered(
                rebuild(left, i, inner_arity, inner)?,
                rebuild(right, i, inner_arity, inner)?,
            )),
        }
    }
    let raw = rebuild(&outer.tree, i, inner_arity, inner)?;
    raw.decorate(&outer.sigma)
}

/// Renumbers leaf indices by `f`, re-sorting merger branches where the
/// renumbering breaks least-leaf order.
fn renumber_raw(t: &PureTree, f: &impl Fn(usize) -> usize) -> RawTree {
    match t {
        PureTree::Leaf { index, color } => RawTree::leaf(f(*index), *color),
        PureTree::Gluing { i, j, child } => RawTree {
            decor: Perm::identity(t.output_color()),
            node: RawNode::Gluing {
                i: *i,
                j: *j,
                child: Box::new(renumber_raw(child, f)),
            },
        },
        PureTree::Merger { left, right } => {
            RawTree::merger_ordered(renumber_raw(left, f), renumber_raw(right, f))
        }
    }
}

/// Relabels the inputs of an element by `pi` (input `k` becomes input
/// `pi(k)`), as a decorated tree.
pub fn relabel_inputs_raw(e: &Element, pi: &Perm) -> Result<RawTree, TreeError> {
    let raw = renumber_raw(&e.tree, &|k| pi.apply(k));
    raw.decorate(&e.sigma)
}

/// Applies a right action on input `i` (relabeling that input's legs by
/// `tau`), as a decorated tree.
pub fn decorate_input_raw(e: &Element, i: usize, tau: &Perm) -> Result<RawTree, TreeError> {
    fn rebuild(t: &PureTree, i: usize, tau: &Perm) -> Result<RawTree, TreeError> {
        match t {
            PureTree::Leaf { index, color } => {
                let leaf = RawTree::leaf(*index, *color);
                if *index == i {
                    leaf.decorate(tau)
                } else {
                    Ok(leaf)
                }
            }
            PureTree::Gluing { i: a, j: b, child } => {
                RawTree::gluing(*a, *b, rebuild(child, i, tau)?)
            }
            PureTree::Merger { left, right } => Ok(RawTree::merger_ordered(
                rebuild(left, i, tau)?,
                rebuild(right, i, tau)?,
            )),
        }
    }
    rebuild(&e.tree, i, tau)?.decorate(&e.sigma)
}

// ---------------------------------------------------------------------------
// Local rewrites
// ---------------------------------------------------------------------------

/// Result of a single-edge rewrite: the rewritten element and the sign the
/// move carries in odd mode (gluing swaps are odd, branch transfers count the
/// gluings they cross).
pub type SignedElement = (Element, i8);

/// A single-edge rewrite in full detail. `resorted` records whether the move
/// had to re-sort merger branches, pushing a block shuffle toward the root.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Rewrite {
    pub element: Element,
    pub sign: i8,
    pub resorted: bool,
}

/// Applies the local move at the internal edge identified by `edge` (the
/// depth-first index of the vertex above the edge). Returns `Ok(None)` for a
/// gluing-below-merger edge whose glued pair spans both branches: no relation
/// instance applies there.
pub fn local_rewrite(e: &Element, edge: usize) -> Result<Option<Element>, TreeError> {
    Ok(local_rewrite_signed(e, edge)?.map(|(el, _)| el))
}

/// As [`local_rewrite`], also reporting the odd-mode sign of the move.
pub fn local_rewrite_signed(e: &Element, edge: usize) -> Result<Option<SignedElement>, TreeError> {
    Ok(local_rewrite_detailed(e, edge)?.map(|r| (r.element, r.sign)))
}

/// As [`local_rewrite`], reporting the sign and the resort flag.
pub fn local_rewrite_detailed(e: &Element, edge: usize) -> Result<Option<Rewrite>, TreeError> {
    let paths = e.tree.internal_vertex_paths();
    if edge == 0 || edge >= paths.len() {
        return Err(TreeError::EdgeNotInternal(edge));
    }
    let path = &paths[edge];
    match rewrite_along(&e.tree, path)? {
        None => Ok(None),
        Some((tree, twist, sign, resorted)) => {
            let sigma = e.sigma.compose(&twist);
            Ok(Some(Rewrite {
                element: Element::new(sigma, tree)?,
                sign,
                resorted,
            }))
        }
    }
}

/// Every single-edge rewrite of `e`, deduplicated.
pub fn neighbors(e: &Element) -> Result<Vec<Element>, TreeError> {
    let mut out: Vec<Element> = neighbors_signed(e)?.into_iter().map(|(el, _)| el).collect();
    out.sort();
    out.dedup();
    Ok(out)
}

/// Rewrites with their odd signs, one entry per rewritable internal edge.
pub fn neighbors_signed(e: &Element) -> Result<Vec<SignedElement>, TreeError> {
    let mut out = Vec::new();
    for edge in e.tree.internal_edges() {
        if let Some(se) = local_rewrite_signed(e, edge)? {
            out.push(se);
        }
    }
    Ok(out)
}

fn parity(count: usize) -> i8 {
    if count % 2 == 0 {
        1
    } else {
        -1
    }
}

/// Rewrites the subtree at the edge addressed by `path` (relative to `tree`),
/// returning the new subtree, the permutation twist emitted at its output,
/// and the odd sign.
fn rewrite_along(
    tree: &PureTree,
    path: &[u8],
) -> Result<Option<(PureTree, Perm, i8, bool)>, TreeError> {
    if path.len() == 1 {
        return apply_case(tree, path[0]);
    }
    match tree {
        PureTree::Leaf { .. } => unreachable!("path descends through a leaf"),
        PureTree::Gluing { i, j, child } => {
            let Some((sub, twist, sign, resorted)) = rewrite_along(child, &path[1..])? else {
                return Ok(None);
            };
            if twist.is_identity() {
                return Ok(Some((
                    PureTree::Gluing {
                        i: *i,
                        j: *j,
                        child: Box::new(sub),
                    },
                    Perm::identity(twist.degree() - 2),
                    sign,
                    resorted,
                )));
            }
            let n = twist.degree();
            let d = coset_decompose(&rho(n, *i, *j)?.compose(&twist))?;
            Ok(Some((
                PureTree::Gluing {
                    i: d.k,
                    j: d.l,
                    child: Box::new(sub),
                },
                d.sigma_hat,
                sign,
                resorted,
            )))
        }
        PureTree::Merger { left, right } => {
            let (ln, rn) = (left.output_color(), right.output_color());
            if path[0] == 0 {
                let Some((sub, twist, sign, resorted)) = rewrite_along(left, &path[1..])? else {
                    return Ok(None);
                };
                Ok(Some((
                    PureTree::Merger {
                        left: Box::new(sub),
                        right: right.clone(),
                    },
                    block_embed(&twist, &Perm::identity(rn)),
                    sign,
                    resorted,
                )))
            } else {
                let Some((sub, twist, sign, resorted)) = rewrite_along(right, &path[1..])? else {
                    return Ok(None);
                };
                Ok(Some((
                    PureTree::Merger {
                        left: left.clone(),
                        right: Box::new(sub),
                    },
                    block_embed(&Perm::identity(ln), &twist),
                    sign,
                    resorted,
                )))
            }
        }
    }
}

/// The local move at the edge joining `u` (below) to its child in direction
/// `dir` (above).
fn apply_case(u: &PureTree, dir: u8) -> Result<Option<(PureTree, Perm, i8, bool)>, TreeError> {
    let out_color = u.output_color();
    match u {
        PureTree::Leaf { .. } => unreachable!("leaves have no children"),
        PureTree::Gluing {
            i: ku,
            j: lu,
            child,
        } => match child.as_ref() {
            // Two adjacent gluings: swap through the involution.
            PureTree::Gluing {
                i: iw,
                j: jw,
                child: grand,
            } => {
                let n = grand.output_color();
                let o = OrderedGluingPair::new(n, *iw, *jw, *ku, *lu)?;
                let t = iota(&o);
                let inner = PureTree::gluing(t.a, t.b, grand.as_ref().clone())?;
                let outer = PureTree::gluing(t.c, t.d, inner)?;
                Ok(Some((outer, Perm::identity(out_color), -1, false)))
            }
            // Gluing below a merger: pull the gluing up onto the branch that
            // contains both glued legs, if there is one.
            PureTree::Merger { left, right } => {
                let a = left.output_color();
                if *lu <= a {
                    let new_left = PureTree::gluing(*ku, *lu, left.as_ref().clone())?;
                    let tree = PureTree::merger(new_left, right.as_ref().clone())?;
                    Ok(Some((tree, Perm::identity(out_color), 1, false)))
                } else if *ku > a {
                    let new_right = PureTree::gluing(*ku - a, *lu - a, right.as_ref().clone())?;
                    let sign = parity(left.gluing_count());
                    let tree = PureTree::merger(left.as_ref().clone(), new_right)?;
                    Ok(Some((tree, Perm::identity(out_color), sign, false)))
                } else {
                    Ok(None)
                }
            }
            PureTree::Leaf { .. } => unreachable!("edge paths end at internal vertices"),
        },
        PureTree::Merger { left, right } => {
            let child = if dir == 0 { left } else { right };
            match child.as_ref() {
                // Gluing above a merger: push it below.
                PureTree::Gluing {
                    i: iw,
                    j: jw,
                    child: grand,
                } => {
                    if dir == 0 {
                        let merged =
                            PureTree::merger(grand.as_ref().clone(), right.as_ref().clone())?;
                        let tree = PureTree::gluing(*iw, *jw, merged)?;
                        Ok(Some((tree, Perm::identity(out_color), 1, false)))
                    } else {
                        let nl = left.output_color();
                        let sign = parity(left.gluing_count());
                        let merged =
                            PureTree::merger(left.as_ref().clone(), grand.as_ref().clone())?;
                        let tree = PureTree::gluing(iw + nl, jw + nl, merged)?;
                        Ok(Some((tree, Perm::identity(out_color), sign, false)))
                    }
                }
                // Merger above a merger: associativity move.
                PureTree::Merger {
                    left: c_left,
                    right: c_right,
                } => {
                    if dir == 0 {
                        let (bq, br, c) = (c_left.as_ref(), c_right.as_ref(), right.as_ref());
                        if br.min_leaf() < c.min_leaf() {
                            let inner = PureTree::merger(br.clone(), c.clone())?;
                            let tree = PureTree::merger(bq.clone(), inner)?;
                            Ok(Some((tree, Perm::identity(out_color), 1, false)))
                        } else {
                            // Regrouping forces a branch re-sort; the block
                            // shuffle restoring the leg order moves to the root.
                            let (q, r, s) =
                                (bq.output_color(), br.output_color(), c.output_color());
                            let inner = PureTree::merger(c.clone(), br.clone())?;
                            let tree = PureTree::merger(bq.clone(), inner)?;
                            let twist =
                                block_embed(&Perm::identity(q), &shuffle(s, r));
                            let sign = parity(br.gluing_count() * c.gluing_count());
                            Ok(Some((tree, twist, sign, true)))
                        }
                    } else {
                        let (c, bq, br) = (left.as_ref(), c_left.as_ref(), c_right.as_ref());
                        let inner = PureTree::merger(c.clone(), bq.clone())?;
                        let tree = PureTree::merger(inner, br.clone())?;
                        Ok(Some((tree, Perm::identity(out_color), 1, false)))
                    }
                }
                PureTree::Leaf { .. } => unreachable!("edge paths end at internal vertices"),
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn leaf(i: usize, c: usize) -> PureTree {
        PureTree::leaf(i, c)
    }

    #[test]
    fn infer_type_examples() {
        let t = leaf(1, 5);
        let ty = infer_type(&t).unwrap();
        assert_eq!((ty.inputs.as_slice(), ty.output), (&[5][..], 5));
        assert_eq!((ty.gluings, ty.mergers), (0, 0));

        let t = PureTree::gluing(
            1,
            2,
            PureTree::merger(leaf(1, 2), leaf(2, 2)).unwrap(),
        )
        .unwrap();
        let ty = infer_type(&t).unwrap();
        assert_eq!((ty.inputs.as_slice(), ty.output), (&[2, 2][..], 2));
        assert_eq!((ty.gluings, ty.mergers), (1, 1));

        let t = PureTree::gluing(1, 2, PureTree::gluing(1, 2, leaf(1, 4)).unwrap()).unwrap();
        let ty = infer_type(&t).unwrap();
        assert_eq!((ty.inputs.as_slice(), ty.output), (&[4][..], 0));
        assert_eq!((ty.gluings, ty.mergers), (2, 0));
    }

    #[test]
    fn infer_type_rejects_bad_labels() {
        let bad = PureTree::Gluing {
            i: 3,
            j: 2,
            child: Box::new(leaf(1, 4)),
        };
        assert!(matches!(
            infer_type(&bad),
            Err(TreeError::BadGluing { .. })
        ));
        let bad = PureTree::Merger {
            left: Box::new(leaf(2, 1)),
            right: Box::new(leaf(1, 1)),
        };
        assert!(matches!(
            infer_type(&bad),
            Err(TreeError::BranchOrder { .. })
        ));
        let bad = PureTree::merger(leaf(1, 1), leaf(3, 1)).unwrap();
        assert!(matches!(
            infer_type(&bad),
            Err(TreeError::LeafIndices { .. })
        ));
    }

    #[test]
    fn purify_corolla_decorations() {
        // A decorated gluing corolla keeps its decoration at the root.
        let sigma = Perm::from_images(vec![2, 1]).unwrap();
        let raw = RawTree::gluing(1, 2, RawTree::leaf(1, 4))
            .unwrap()
            .decorate(&sigma)
            .unwrap();
        let e = purify(&raw).unwrap();
        assert_eq!(e.sigma, sigma);
        assert_eq!(e.tree, PureTree::gluing(1, 2, leaf(1, 4)).unwrap());

        let sigma = Perm::from_images(vec![3, 1, 2, 4]).unwrap();
        let raw = RawTree::merger_ordered(RawTree::leaf(1, 2), RawTree::leaf(2, 2))
            .decorate(&sigma)
            .unwrap();
        let e = purify(&raw).unwrap();
        assert_eq!(e.sigma, sigma);
    }

    #[test]
    fn purify_pushes_branch_decoration_into_block() {
        // Merger of (x1:2, xi[1,2](x2:4)) with (1 2) decorating the gluing vertex.
        let swap = Perm::from_images(vec![2, 1]).unwrap();
        let glued = RawTree::gluing(1, 2, RawTree::leaf(2, 4))
            .unwrap()
            .decorate(&swap)
            .unwrap();
        let raw = RawTree::merger_ordered(RawTree::leaf(1, 2), glued);
        let e = purify(&raw).unwrap();
        assert_eq!(e.sigma.images(), &[1, 2, 4, 3]);
        assert_eq!(
            e.tree,
            PureTree::merger(
                leaf(1, 2),
                PureTree::gluing(1, 2, leaf(2, 4)).unwrap()
            )
            .unwrap()
        );
    }

    #[test]
    fn purify_is_idempotent_on_pure_trees() {
        let t = PureTree::gluing(
            1,
            3,
            PureTree::merger(leaf(1, 2), leaf(2, 2)).unwrap(),
        )
        .unwrap();
        let e = purify(&RawTree::from_pure(&t)).unwrap();
        assert!(e.sigma.is_identity());
        assert_eq!(e.tree, t);
    }

    #[test]
    fn merger_ordered_resorts_with_shuffle() {
        // m(x2:3, x1:2) written out of order: the decoration restores the
        // written leg order x2-legs-first.
        let raw = RawTree::merger_ordered(RawTree::leaf(2, 3), RawTree::leaf(1, 2));
        let e = purify(&raw).unwrap();
        // x2's three legs come first, so x1's legs shift past them.
        assert_eq!(e.sigma, shuffle(2, 3));
        assert_eq!(
            e.tree,
            PureTree::merger(leaf(1, 2), leaf(2, 3)).unwrap()
        );
    }

    #[test]
    fn rewrite_gluing_chain_is_involution() {
        // xi[1,2](xi[1,2](x1:4)) <-> xi[1,2](xi[3,4](x1:4))
        let e = Element::from_tree(
            PureTree::gluing(1, 2, PureTree::gluing(1, 2, leaf(1, 4)).unwrap()).unwrap(),
        );
        let (r, sign) = local_rewrite_signed(&e, 1).unwrap().unwrap();
        assert_eq!(sign, -1);
        assert_eq!(
            r.tree,
            PureTree::gluing(1, 2, PureTree::gluing(3, 4, leaf(1, 4)).unwrap()).unwrap()
        );
        assert!(r.sigma.is_identity());
        let (back, sign2) = local_rewrite_signed(&r, 1).unwrap().unwrap();
        assert_eq!(sign2, -1);
        assert_eq!(back, e);
        assert_eq!(neighbors(&e).unwrap().len(), 1);
    }

    #[test]
    fn rewrite_branch_transfer() {
        // m(x1:2, xi[1,2](x2:4)) -> xi[3,4](m(x1:2, x2:4))
        let tree = PureTree::merger(
            leaf(1, 2),
            PureTree::gluing(1, 2, leaf(2, 4)).unwrap(),
        )
        .unwrap();
        let e = Element::from_tree(tree);
        let (r, sign) = local_rewrite_signed(&e, 1).unwrap().unwrap();
        assert_eq!(sign, 1);
        assert_eq!(
            r.tree,
            PureTree::gluing(3, 4, PureTree::merger(leaf(1, 2), leaf(2, 4)).unwrap()).unwrap()
        );
        assert!(r.sigma.is_identity());
        let (back, _) = local_rewrite_signed(&r, 1).unwrap().unwrap();
        assert_eq!(back, e);
    }

    #[test]
    fn rewrite_spanning_pair_has_no_move() {
        // xi[1,3] over m(x1:2, x2:2): the glued pair spans both branches.
        let tree = PureTree::gluing(
            1,
            3,
            PureTree::merger(leaf(1, 2), leaf(2, 2)).unwrap(),
        )
        .unwrap();
        let e = Element::from_tree(tree);
        assert_eq!(local_rewrite_signed(&e, 1).unwrap(), None);
        assert!(neighbors(&e).unwrap().is_empty());
    }

    #[test]
    fn rewrite_merger_associativity() {
        // m(m(x1:1, x2:2), x3:2) -> m(x1:1, m(x2:2, x3:2))
        let tree = PureTree::merger(
            PureTree::merger(leaf(1, 1), leaf(2, 2)).unwrap(),
            leaf(3, 2),
        )
        .unwrap();
        let e = Element::from_tree(tree);
        let (r, sign) = local_rewrite_signed(&e, 1).unwrap().unwrap();
        assert_eq!(sign, 1);
        assert_eq!(
            r.tree,
            PureTree::merger(
                leaf(1, 1),
                PureTree::merger(leaf(2, 2), leaf(3, 2)).unwrap()
            )
            .unwrap()
        );
        assert!(r.sigma.is_identity());
        let (back, _) = local_rewrite_signed(&r, 1).unwrap().unwrap();
        assert_eq!(back, e);
        assert_eq!(neighbors(&e).unwrap().len(), 1);
    }

    #[test]
    fn rewrite_misaligned_associativity_twists_root() {
        // m(m(x1, x3), x2): regrouping pairs x3 with x2, forcing a re-sort.
        let tree = PureTree::merger(
            PureTree::merger(leaf(1, 1), leaf(3, 2)).unwrap(),
            leaf(2, 3),
        )
        .unwrap();
        let e = Element::from_tree(tree);
        let (r, sign) = local_rewrite_signed(&e, 1).unwrap().unwrap();
        assert_eq!(sign, 1);
        assert_eq!(
            r.tree,
            PureTree::merger(
                leaf(1, 1),
                PureTree::merger(leaf(2, 3), leaf(3, 2)).unwrap()
            )
            .unwrap()
        );
        // Twist re-expresses legs (x1, x3, x2) in terms of (x1, x2, x3).
        assert_eq!(r.sigma, block_embed(&Perm::identity(1), &shuffle(3, 2)));
    }

    #[test]
    fn rewrites_preserve_type_and_bigrade() {
        let tree = PureTree::gluing(
            2,
            3,
            PureTree::merger(
                leaf(1, 2),
                PureTree::gluing(1, 2, leaf(2, 4)).unwrap(),
            )
            .unwrap(),
        )
        .unwrap();
        let e = Element::from_tree(tree);
        let ty = infer_type(&e.tree).unwrap();
        for edge in e.tree.internal_edges() {
            if let Some(r) = local_rewrite(&e, edge).unwrap() {
                assert_eq!(infer_type(&r.tree).unwrap(), ty);
            }
        }
    }

    #[test]
    fn edge_errors() {
        let e = Element::from_tree(PureTree::gluing(1, 2, leaf(1, 2)).unwrap());
        assert!(matches!(
            local_rewrite(&e, 0),
            Err(TreeError::EdgeNotInternal(0))
        ));
        assert!(matches!(
            local_rewrite(&e, 1),
            Err(TreeError::EdgeNotInternal(1))
        ));
        assert!(neighbors(&e).unwrap().is_empty());
    }

    #[test]
    fn purify_order_independent_small() {
        let swap = Perm::from_images(vec![2, 1]).unwrap();
        let glued = RawTree::gluing(1, 2, RawTree::leaf(2, 4))
            .unwrap()
            .decorate(&swap)
            .unwrap();
        let inner = RawTree::merger_ordered(
            RawTree::leaf(1, 2).decorate(&swap).unwrap(),
            glued,
        );
        let raw = RawTree::gluing(2, 3, inner)
            .unwrap()
            .decorate(&Perm::from_images(vec![2, 1]).unwrap())
            .unwrap();
        let reference = purify(&raw).unwrap();
        let orders = all_push_orders(&raw);
        assert!(orders.len() > 1);
        for order in orders {
            assert_eq!(purify_with_order(&raw, &order).unwrap(), reference);
        }
    }

    #[test]
    fn purify_left_equivariance() {
        let raw = RawTree::gluing(
            1,
            3,
            RawTree::merger_ordered(RawTree::leaf(1, 2), RawTree::leaf(2, 2)),
        )
        .unwrap();
        let base = purify(&raw).unwrap();
        let tau = Perm::from_images(vec![2, 1]).unwrap();
        let acted = purify(&raw.decorate(&tau).unwrap()).unwrap();
        assert_eq!(acted.sigma, tau.compose(&base.sigma));
        assert_eq!(acted.tree, base.tree);
    }
}
