//! Brute-force ground truth.
//!
//! [`enumerate_pure`] lists every pure tree of a type and bigrade exactly
//! once. [`closure`] unions the full component of elements under single-edge
//! rewrites with a parity-weighted union-find, flagging sign inconsistencies
//! in odd mode. [`count_expected`] is the closed-form class count the closure
//! is measured against. [`RationalMatrix`] and [`relation_span_rank`] compute
//! exact ranks of relation spans over the rationals.

use crate::normalform::Mode;
use crate::perm::Perm;
use crate::trees::{local_rewrite_signed, Element, PureTree, TreeError};
use num_rational::BigRational;
use num_traits::{One, Zero};
use std::collections::{BTreeMap, HashMap, HashSet};
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum OracleError {
    #[error("universe of {required} elements exceeds the resource limit {limit}")]
    ResourceLimit { required: usize, limit: usize },
    #[error(transparent)]
    Tree(#[from] TreeError),
}

/// Default cap on closure universes and rank component bases.
pub const DEFAULT_LIMIT: usize = 1_000_000;

/// All pure trees of the given type and bigrade, each exactly once, in a
/// deterministic order. Empty when the combination is impossible.
pub fn enumerate_pure(inputs: &[usize], output: usize, s: usize, m: usize) -> Vec<PureTree> {
    let total: usize = inputs.iter().sum();
    if inputs.is_empty() || m + 1 != inputs.len() || total < 2 * s || total - 2 * s != output {
        return Vec::new();
    }
    let leaves: Vec<(usize, usize)> = (1..=inputs.len()).zip(inputs.iter().copied()).collect();
    enum_rec(&leaves, s)
}

fn enum_rec(leaves: &[(usize, usize)], s: usize) -> Vec<PureTree> {
    let total: usize = leaves.iter().map(|&(_, c)| c).sum();
    if total < 2 * s {
        return Vec::new();
    }
    let out_color = total - 2 * s;
    let mut results = Vec::new();
    if leaves.len() == 1 && s == 0 {
        results.push(PureTree::leaf(leaves[0].0, leaves[0].1));
        return results;
    }
    // Root gluing over a subtree with one gluing fewer.
    if s >= 1 {
        for child in enum_rec(leaves, s - 1) {
            for i in 1..=out_color + 2 {
                for j in i + 1..=out_color + 2 {
                    results.push(
                        PureTree::gluing(i, j, child.clone()).expect("indices in range"),
                    );
                }
            }
        }
    }
    // Root merger: the first branch takes the least leaf.
    if leaves.len() >= 2 {
        let rest = leaves.len() - 1;
        for mask in 0..(1u32 << rest) {
            let mut first = vec![leaves[0]];
            let mut second = Vec::new();
            for (bit, &leaf) in leaves[1..].iter().enumerate() {
                if mask & (1 << bit) != 0 {
                    first.push(leaf);
                } else {
                    second.push(leaf);
                }
            }
            if second.is_empty() {
                continue;
            }
            let first_total: usize = first.iter().map(|&(_, c)| c).sum();
            let second_total: usize = second.iter().map(|&(_, c)| c).sum();
            for s1 in 0..=s {
                let s2 = s - s1;
                if first_total < 2 * s1 || second_total < 2 * s2 {
                    continue;
                }
                for t1 in enum_rec(&first, s1) {
                    for t2 in enum_rec(&second, s2) {
                        results.push(
                            PureTree::merger(t1.clone(), t2).expect("least leaf in first branch"),
                        );
                    }
                }
            }
        }
    }
    results
}

/// The closed-form class count for a component: `v0! ·` (number of ways to
/// match `s` disjoint leg pairs among the `N` input legs). `None` when the
/// type and bigrade are structurally impossible.
pub fn count_expected(inputs: &[usize], output: usize, s: usize, m: usize) -> Option<u64> {
    let total: usize = inputs.iter().sum();
    if inputs.is_empty() || m + 1 != inputs.len() || total < 2 * s || total - 2 * s != output {
        return None;
    }
    Some(factorial(output) * matchings_count(total, s))
}

pub fn factorial(n: usize) -> u64 {
    (1..=n as u64).product::<u64>().max(1)
}

/// Number of sets of `s` disjoint unordered pairs on `n` points.
pub fn matchings_count(n: usize, s: usize) -> u64 {
    let mut count = 1u64;
    let mut remaining = n as u64;
    for _ in 0..s {
        count *= remaining * (remaining - 1) / 2;
        remaining -= 2;
    }
    count / factorial(s)
}

// ---------------------------------------------------------------------------
// Rewrite closure
// ---------------------------------------------------------------------------

/// The rewrite closure of one component: every element of the given type and
/// bigrade, partitioned into connected components of the single-edge rewrite
/// graph. In odd mode every element carries a sign relative to its class
/// root; `consistent` is false when some cycle forces an element to equal its
/// own negative.
pub struct ClassPartition {
    pub mode: Mode,
    pub inputs: Vec<usize>,
    pub output: usize,
    pub gluings: usize,
    pub mergers: usize,
    pub consistent: bool,
    trees: Vec<PureTree>,
    tree_index: HashMap<PureTree, usize>,
    perm_count: usize,
    root: Vec<u32>,
    sign_to_root: Vec<i8>,
    n_classes: usize,
}

impl ClassPartition {
    pub fn len(&self) -> usize {
        self.trees.len() * self.perm_count
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn n_classes(&self) -> usize {
        self.n_classes
    }

    pub fn element(&self, idx: usize) -> Element {
        let tree = self.trees[idx / self.perm_count].clone();
        let sigma = Perm::from_lex_rank(self.output, idx % self.perm_count);
        Element { sigma, tree }
    }

    pub fn n_trees(&self) -> usize {
        self.trees.len()
    }

    pub fn tree(&self, tree_idx: usize) -> &PureTree {
        &self.trees[tree_idx]
    }

    /// Number of root permutations per tree (`v0!`).
    pub fn perm_count(&self) -> usize {
        self.perm_count
    }

    pub fn index_of(&self, e: &Element) -> Option<usize> {
        let t = self.tree_index.get(&e.tree)?;
        Some(t * self.perm_count + e.sigma.lex_rank())
    }

    /// Class representative index of element `idx`.
    pub fn class_of(&self, idx: usize) -> usize {
        self.root[idx] as usize
    }

    /// Sign of element `idx` relative to its class representative.
    pub fn sign_of(&self, idx: usize) -> i8 {
        self.sign_to_root[idx]
    }
}

struct ParityUnionFind {
    parent: Vec<u32>,
    parity: Vec<u8>,
    rank: Vec<u8>,
    consistent: bool,
}

impl ParityUnionFind {
    fn new(n: usize) -> Self {
        ParityUnionFind {
            parent: (0..n as u32).collect(),
            parity: vec![0; n],
            rank: vec![0; n],
            consistent: true,
        }
    }

    fn find(&mut self, x: u32) -> (u32, u8) {
        let mut root = x;
        let mut par = 0u8;
        while self.parent[root as usize] != root {
            par ^= self.parity[root as usize];
            root = self.parent[root as usize];
        }
        // Path compression, re-anchoring parities at the root.
        let mut cur = x;
        let mut cur_par = par;
        while self.parent[cur as usize] != root {
            let next = self.parent[cur as usize];
            let next_par = cur_par ^ self.parity[cur as usize];
            self.parent[cur as usize] = root;
            self.parity[cur as usize] = cur_par;
            cur = next;
            cur_par = next_par;
        }
        (root, par)
    }

    /// Joins `x` and `y` under the constraint `value(y) = value(x) XOR rel`.
    fn union(&mut self, x: u32, y: u32, rel: u8) {
        let (rx, px) = self.find(x);
        let (ry, py) = self.find(y);
        if rx == ry {
            if px ^ py != rel {
                self.consistent = false;
            }
            return;
        }
        let (big, small, parity) = if self.rank[rx as usize] >= self.rank[ry as usize] {
            (rx, ry, px ^ rel ^ py)
        } else {
            (ry, rx, px ^ rel ^ py)
        };
        self.parent[small as usize] = big;
        self.parity[small as usize] = parity;
        if self.rank[big as usize] == self.rank[small as usize] {
            self.rank[big as usize] += 1;
        }
    }
}

/// Exhausts the component of the given type and bigrade and unions elements
/// along every single-edge rewrite.
pub fn closure(
    inputs: &[usize],
    output: usize,
    s: usize,
    m: usize,
    mode: Mode,
    limit: usize,
) -> Result<ClassPartition, OracleError> {
    let trees = enumerate_pure(inputs, output, s, m);
    let perm_count = factorial(output) as usize;
    let universe = trees.len() * perm_count;
    if universe > limit {
        return Err(OracleError::ResourceLimit {
            required: universe,
            limit,
        });
    }
    let tree_index: HashMap<PureTree, usize> = trees
        .iter()
        .enumerate()
        .map(|(i, t)| (t.clone(), i))
        .collect();
    let mut uf = ParityUnionFind::new(universe);
    // A rewrite of (sigma, t) at an edge is (sigma ∘ twist, t_e) with the
    // twist independent of sigma, so each edge is resolved once per tree.
    struct Move {
        target_tree: usize,
        twist: Option<Perm>,
        rel: u8,
    }
    for (ti, tree) in trees.iter().enumerate() {
        let base = Element::from_tree(tree.clone());
        let mut moves = Vec::new();
        for edge in tree.internal_edges() {
            if let Some((e2, sgn)) = local_rewrite_signed(&base, edge)? {
                let target_tree = *tree_index
                    .get(&e2.tree)
                    .expect("rewrites preserve type and bigrade");
                let rel = match mode {
                    Mode::Even => 0,
                    Mode::Odd => u8::from(sgn < 0),
                };
                let twist = (!e2.sigma.is_identity()).then_some(e2.sigma);
                moves.push(Move {
                    target_tree,
                    twist,
                    rel,
                });
            }
        }
        for pr in 0..perm_count {
            let idx = ti * perm_count + pr;
            let mut sigma: Option<Perm> = None;
            for mv in &moves {
                let jdx = match &mv.twist {
                    None => mv.target_tree * perm_count + pr,
                    Some(twist) => {
                        let s = sigma
                            .get_or_insert_with(|| Perm::from_lex_rank(output, pr));
                        mv.target_tree * perm_count + s.compose(twist).lex_rank()
                    }
                };
                uf.union(idx as u32, jdx as u32, mv.rel);
            }
        }
    }

    let mut root = vec![0u32; universe];
    let mut sign_to_root = vec![1i8; universe];
    let mut distinct_roots = HashSet::new();
    for idx in 0..universe {
        let (r, p) = uf.find(idx as u32);
        root[idx] = r;
        sign_to_root[idx] = if p == 0 { 1 } else { -1 };
        distinct_roots.insert(r);
    }
    let n_classes = distinct_roots.len();
    Ok(ClassPartition {
        mode,
        inputs: inputs.to_vec(),
        output,
        gluings: s,
        mergers: m,
        consistent: uf.consistent,
        trees,
        tree_index,
        perm_count,
        root,
        sign_to_root,
        n_classes,
    })
}

// ---------------------------------------------------------------------------
// Exact rational rank
// ---------------------------------------------------------------------------

/// A sparse row: nonzero entries sorted by column.
pub type Row = Vec<(usize, BigRational)>;

/// Row-echelon accumulator over the rationals. Entries stay normalized after
/// every elimination step; rank is the number of pivot rows.
pub struct RationalMatrix {
    ncols: usize,
    pivots: BTreeMap<usize, Row>,
}

impl RationalMatrix {
    pub fn new(ncols: usize) -> Self {
        RationalMatrix {
            ncols,
            pivots: BTreeMap::new(),
        }
    }

    pub fn rank(&self) -> usize {
        self.pivots.len()
    }

    pub fn ncols(&self) -> usize {
        self.ncols
    }

    /// Reduces `row` against the pivots and installs the remainder as a new
    /// pivot. Returns true when the rank grew.
    pub fn insert_row(&mut self, row: Row) -> bool {
        let mut row = row;
        loop {
            row.retain(|(_, c)| !c.is_zero());
            let Some(&(lead, _)) = row.first() else {
                return false;
            };
            debug_assert!(lead < self.ncols);
            match self.pivots.get(&lead) {
                None => {
                    let lead_coeff = row[0].1.clone();
                    for (_, c) in row.iter_mut() {
                        *c /= lead_coeff.clone();
                    }
                    self.pivots.insert(lead, row);
                    return true;
                }
                Some(pivot) => {
                    let coeff = row[0].1.clone();
                    row = row_sub_scaled(&row, pivot, &coeff);
                }
            }
        }
    }

    /// Whether `row` lies in the span of the inserted rows.
    pub fn contains(&self, row: Row) -> bool {
        let mut row = row;
        loop {
            row.retain(|(_, c)| !c.is_zero());
            let Some(&(lead, _)) = row.first() else {
                return true;
            };
            match self.pivots.get(&lead) {
                None => return false,
                Some(pivot) => {
                    let coeff = row[0].1.clone();
                    row = row_sub_scaled(&row, pivot, &coeff);
                }
            }
        }
    }
}

/// `row - coeff * pivot`, merging sorted sparse entries.
fn row_sub_scaled(row: &Row, pivot: &Row, coeff: &BigRational) -> Row {
    let mut out = Vec::with_capacity(row.len() + pivot.len());
    let (mut a, mut b) = (0, 0);
    while a < row.len() || b < pivot.len() {
        if b >= pivot.len() || (a < row.len() && row[a].0 < pivot[b].0) {
            out.push(row[a].clone());
            a += 1;
        } else if a >= row.len() || pivot[b].0 < row[a].0 {
            out.push((pivot[b].0, -coeff * &pivot[b].1));
            b += 1;
        } else {
            let c = &row[a].1 - coeff * &pivot[b].1;
            if !c.is_zero() {
                out.push((row[a].0, c));
            }
            a += 1;
            b += 1;
        }
    }
    out
}

/// One of the three quadratic relation families.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RelationFamily {
    /// Two gluings on one input of color `n`.
    GluingGluing { n: usize },
    /// A gluing against a merger of colors `n, m`.
    GluingMerger { n: usize, m: usize },
    /// Two mergers of colors `n, m, l`.
    MergerMerger { n: usize, m: usize, l: usize },
}

impl RelationFamily {
    /// Type and bigrade of the weight-2 component the relations live in.
    pub fn component(&self) -> (Vec<usize>, usize, usize, usize) {
        match *self {
            RelationFamily::GluingGluing { n } => (vec![n], n - 4, 2, 0),
            RelationFamily::GluingMerger { n, m } => (vec![n, m], n + m - 2, 1, 1),
            RelationFamily::MergerMerger { n, m, l } => (vec![n, m, l], n + m + l, 0, 2),
        }
    }
}

/// Index of the element basis of one weight-2 component.
pub struct ComponentBasis {
    pub elements: Vec<Element>,
    index: HashMap<Element, usize>,
}

impl ComponentBasis {
    pub fn new(inputs: &[usize], output: usize, s: usize, m: usize) -> Self {
        let mut elements = Vec::new();
        for tree in enumerate_pure(inputs, output, s, m) {
            for pr in 0..factorial(output) as usize {
                elements.push(Element {
                    sigma: Perm::from_lex_rank(output, pr),
                    tree: tree.clone(),
                });
            }
        }
        let index = elements
            .iter()
            .enumerate()
            .map(|(i, e)| (e.clone(), i))
            .collect();
        ComponentBasis { elements, index }
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn index_of(&self, e: &Element) -> Option<usize> {
        self.index.get(e).copied()
    }

    /// The sparse row `a - b`.
    pub fn difference_row(&self, a: &Element, b: &Element) -> Row {
        let ia = self.index_of(a).expect("element lies in the component");
        let ib = self.index_of(b).expect("element lies in the component");
        match ia.cmp(&ib) {
            std::cmp::Ordering::Equal => vec![],
            std::cmp::Ordering::Less => vec![
                (ia, BigRational::one()),
                (ib, -BigRational::one()),
            ],
            std::cmp::Ordering::Greater => vec![
                (ib, -BigRational::one()),
                (ia, BigRational::one()),
            ],
        }
    }
}

/// Exact rank over the rationals of the span of the family's defining
/// relation orbit (all left, right, and input-relabeling actions) inside the
/// element basis of its weight-2 component.
pub fn relation_span_rank(family: RelationFamily, limit: usize) -> Result<usize, OracleError> {
    let (basis, rows) = relation_orbit_rows(family, limit)?;
    let mut mat = RationalMatrix::new(basis.len());
    for row in rows {
        mat.insert_row(row);
    }
    Ok(mat.rank())
}

/// The component basis together with every orbit relation vector, deduplicated.
pub fn relation_orbit_rows(
    family: RelationFamily,
    limit: usize,
) -> Result<(ComponentBasis, Vec<Row>), OracleError> {
    let (inputs, output, s, m) = family.component();
    let basis = ComponentBasis::new(&inputs, output, s, m);
    if basis.len() > limit {
        return Err(OracleError::ResourceLimit {
            required: basis.len(),
            limit,
        });
    }
    let mut seen: HashSet<(usize, usize)> = HashSet::new();
    let mut rows = Vec::new();
    let mut push = |basis: &ComponentBasis, e1: Element, e2: Element| {
        let (Some(i1), Some(i2)) = (basis.index_of(&e1), basis.index_of(&e2)) else {
            panic!("relation instance leaves its component");
        };
        if i1 == i2 {
            return;
        }
        let key = (i1.min(i2), i1.max(i2));
        if seen.insert(key) {
            rows.push(basis.difference_row(&e1, &e2));
        }
    };

    use crate::perm::all_perms;
    use crate::trees::{purify, RawTree};

    match family {
        RelationFamily::GluingGluing { n } => {
            assert!(n >= 4);
            let flip = Perm::transposition(n, n - 1, n - 3)
                .unwrap()
                .compose(&Perm::transposition(n, n - 2, n).unwrap());
            for sigma_hat in all_perms(n - 4) {
                for tau in all_perms(n) {
                    let chain = |leaf_decor: &Perm| -> Element {
                        let leaf = RawTree::leaf(1, n).decorate(leaf_decor).unwrap();
                        let inner = RawTree::gluing(n - 1, n, leaf).unwrap();
                        let outer = RawTree::gluing(n - 3, n - 2, inner)
                            .unwrap()
                            .decorate(&sigma_hat)
                            .unwrap();
                        purify(&outer).unwrap()
                    };
                    push(&basis, chain(&tau), chain(&flip.compose(&tau)));
                }
            }
        }
        RelationFamily::GluingMerger { n, m } => {
            let total = n + m;
            for sigma in all_perms(total - 2) {
                for tau1 in all_perms(n) {
                    for tau2 in all_perms(m) {
                        let l1 = || RawTree::leaf(1, n).decorate(&tau1).unwrap();
                        let l2 = || RawTree::leaf(2, m).decorate(&tau2).unwrap();
                        if m >= 2 {
                            // Glue the last two legs, which lie on the second input.
                            let t1 = RawTree::gluing(
                                total - 1,
                                total,
                                RawTree::merger_ordered(l1(), l2()),
                            )
                            .unwrap()
                            .decorate(&sigma)
                            .unwrap();
                            let t2 = RawTree::merger_ordered(
                                l1(),
                                RawTree::gluing(m - 1, m, l2()).unwrap(),
                            )
                            .decorate(&sigma)
                            .unwrap();
                            push(&basis, purify(&t1).unwrap(), purify(&t2).unwrap());
                        }
                        if n >= 2 {
                            // Input-relabeled instance: the merger takes the
                            // second input first.
                            let t1 = RawTree::gluing(
                                total - 1,
                                total,
                                RawTree::merger_ordered(l2(), l1()),
                            )
                            .unwrap()
                            .decorate(&sigma)
                            .unwrap();
                            let t2 = RawTree::merger_ordered(
                                l2(),
                                RawTree::gluing(n - 1, n, l1()).unwrap(),
                            )
                            .decorate(&sigma)
                            .unwrap();
                            push(&basis, purify(&t1).unwrap(), purify(&t2).unwrap());
                        }
                    }
                }
            }
        }
        RelationFamily::MergerMerger { n, m, l } => {
            let colors = [n, m, l];
            let total = n + m + l;
            for sigma in all_perms(total) {
                for roles in [
                    [1usize, 2, 3],
                    [1, 3, 2],
                    [2, 1, 3],
                    [2, 3, 1],
                    [3, 1, 2],
                    [3, 2, 1],
                ] {
                    let leaf = |r: usize| RawTree::leaf(r, colors[r - 1]);
                    let t1 = RawTree::merger_ordered(
                        RawTree::merger_ordered(leaf(roles[0]), leaf(roles[1])),
                        leaf(roles[2]),
                    )
                    .decorate(&sigma)
                    .unwrap();
                    let t2 = RawTree::merger_ordered(
                        leaf(roles[0]),
                        RawTree::merger_ordered(leaf(roles[1]), leaf(roles[2])),
                    )
                    .decorate(&sigma)
                    .unwrap();
                    push(&basis, purify(&t1).unwrap(), purify(&t2).unwrap());
                }
            }
        }
    }
    Ok((basis, rows))
}

/// The explicit relation bases, one vector per listed basis element: the
/// `ι`-paired gluing differences over classes with second pair larger, the
/// two branch families of gluing-merger differences, and the two regrouping
/// families of merger differences.
pub fn prop_basis_rows(family: RelationFamily) -> Result<(ComponentBasis, Vec<Row>), OracleError> {
    use crate::perm::all_perms;
    use crate::symcore::{all_unordered_classes, reindex_primes};
    use crate::trees::{purify, RawTree};

    let (inputs, output, s, m) = family.component();
    let basis = ComponentBasis::new(&inputs, output, s, m);
    let mut rows = Vec::new();
    match family {
        RelationFamily::GluingGluing { n } => {
            for sigma_hat in all_perms(n - 4) {
                for cls in all_unordered_classes(n) {
                    let (i, j, k, l) = cls.rep_second_larger();
                    let (ip, jp, kp, lp) = reindex_primes(n, i, j, k, l).unwrap();
                    let chain = |upper: (usize, usize), lower: (usize, usize)| -> Element {
                        let inner =
                            PureTree::gluing(upper.0, upper.1, PureTree::leaf(1, n)).unwrap();
                        let tree = PureTree::gluing(lower.0, lower.1, inner).unwrap();
                        Element::new(sigma_hat.clone(), tree).unwrap()
                    };
                    rows.push(basis.difference_row(
                        &chain((i, j), (kp, lp)),
                        &chain((k, l), (ip, jp)),
                    ));
                }
            }
        }
        RelationFamily::GluingMerger { n, m } => {
            let total = n + m;
            for sigma in all_perms(total - 2) {
                let comb = || {
                    PureTree::merger(PureTree::leaf(1, n), PureTree::leaf(2, m)).unwrap()
                };
                for i in 1..=n {
                    for j in i + 1..=n {
                        let below = PureTree::gluing(i, j, comb()).unwrap();
                        let above = PureTree::merger(
                            PureTree::gluing(i, j, PureTree::leaf(1, n)).unwrap(),
                            PureTree::leaf(2, m),
                        )
                        .unwrap();
                        rows.push(basis.difference_row(
                            &Element::new(sigma.clone(), below).unwrap(),
                            &Element::new(sigma.clone(), above).unwrap(),
                        ));
                    }
                }
                for k in 1..=m {
                    for l in k + 1..=m {
                        let below = PureTree::gluing(k + n, l + n, comb()).unwrap();
                        let above = PureTree::merger(
                            PureTree::leaf(1, n),
                            PureTree::gluing(k, l, PureTree::leaf(2, m)).unwrap(),
                        )
                        .unwrap();
                        rows.push(basis.difference_row(
                            &Element::new(sigma.clone(), below).unwrap(),
                            &Element::new(sigma.clone(), above).unwrap(),
                        ));
                    }
                }
            }
        }
        RelationFamily::MergerMerger { n, m, l } => {
            let colors = [n, m, l];
            for sigma in all_perms(n + m + l) {
                for roles in [[1usize, 2, 3], [1, 3, 2]] {
                    let leaf = |r: usize| RawTree::leaf(r, colors[r - 1]);
                    let t1 = RawTree::merger_ordered(
                        RawTree::merger_ordered(leaf(roles[0]), leaf(roles[1])),
                        leaf(roles[2]),
                    )
                    .decorate(&sigma)
                    .unwrap();
                    let t2 = RawTree::merger_ordered(
                        leaf(roles[0]),
                        RawTree::merger_ordered(leaf(roles[1]), leaf(roles[2])),
                    )
                    .decorate(&sigma)
                    .unwrap();
                    rows.push(basis.difference_row(&purify(&t1).unwrap(), &purify(&t2).unwrap()));
                }
            }
        }
    }
    Ok((basis, rows))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn enumerate_pure_counts() {
        assert_eq!(enumerate_pure(&[4], 0, 2, 0).len(), 6);
        assert_eq!(enumerate_pure(&[3, 2], 5, 0, 1).len(), 1);
        assert_eq!(enumerate_pure(&[4], 2, 1, 1).len(), 0);
        // Three regroupings of three inputs.
        assert_eq!(enumerate_pure(&[1, 1, 1], 3, 0, 2).len(), 3);
        // 15 shapes on four inputs.
        assert_eq!(enumerate_pure(&[1, 1, 1, 1], 4, 0, 3).len(), 15);
    }

    #[test]
    fn enumerate_pure_is_duplicate_free() {
        let trees = enumerate_pure(&[2, 2], 2, 1, 1);
        let set: HashSet<_> = trees.iter().cloned().collect();
        assert_eq!(set.len(), trees.len());
        assert_eq!(trees.len(), 8);
    }

    #[test]
    fn count_expected_examples() {
        assert_eq!(count_expected(&[4], 0, 2, 0), Some(3));
        assert_eq!(count_expected(&[6], 0, 3, 0), Some(15));
        assert_eq!(count_expected(&[2, 3], 5, 0, 1), Some(120));
        assert_eq!(count_expected(&[4], 2, 1, 1), None);
        assert_eq!(count_expected(&[8], 2, 3, 0), Some(8 * 7 * 6 * 5 * 4 * 3 / 48 * 2));
    }

    #[test]
    fn closure_examples() {
        let part = closure(&[4], 0, 2, 0, Mode::Even, DEFAULT_LIMIT).unwrap();
        assert_eq!(part.len(), 6);
        assert_eq!(part.n_classes(), 3);

        let part = closure(&[4], 0, 2, 0, Mode::Odd, DEFAULT_LIMIT).unwrap();
        assert_eq!(part.n_classes(), 3);
        assert!(part.consistent);

        let part = closure(&[1, 1], 2, 0, 1, Mode::Even, DEFAULT_LIMIT).unwrap();
        assert_eq!(part.n_classes(), 2);
    }

    #[test]
    fn closure_respects_limit() {
        assert!(matches!(
            closure(&[4], 0, 2, 0, Mode::Even, 5),
            Err(OracleError::ResourceLimit { required: 6, limit: 5 })
        ));
    }

    #[test]
    fn closure_merger_only_mixes_root_permutations() {
        // Three inputs: classes must collapse to (n+m+l)!, which requires the
        // regrouping move to twist the root permutation.
        let part = closure(&[1, 2, 3], 6, 0, 2, Mode::Even, DEFAULT_LIMIT).unwrap();
        assert_eq!(part.len(), 3 * 720);
        assert_eq!(part.n_classes(), 720);
    }

    #[test]
    fn rational_matrix_rank() {
        let one = || BigRational::one();
        let mut m = RationalMatrix::new(3);
        assert!(m.insert_row(vec![(0, one()), (1, one())]));
        assert!(m.insert_row(vec![(1, one()), (2, one())]));
        assert!(!m.insert_row(vec![(0, one()), (2, -one())]));
        assert!(m.contains(vec![(0, one()), (2, -one())]));
        assert!(!m.contains(vec![(0, one())]));
        assert_eq!(m.rank(), 2);
    }

    #[test]
    fn gluing_gluing_rank_small() {
        let rank = relation_span_rank(RelationFamily::GluingGluing { n: 4 }, DEFAULT_LIMIT)
            .unwrap();
        assert_eq!(rank, 3);
    }

    #[test]
    fn merger_merger_rank_small() {
        let rank = relation_span_rank(
            RelationFamily::MergerMerger { n: 1, m: 1, l: 1 },
            DEFAULT_LIMIT,
        )
        .unwrap();
        assert_eq!(rank, 12);
    }
}
