//! Executable verification of the calculus.
//!
//! Each `check_*` function exhaustively exercises one identity or counting
//! statement at desk scale and returns a machine-readable [`Report`]. All
//! checks are deterministic; failures carry the offending parameters in
//! their detail rows.

use crate::normalform::{
    act, compose_at, denote, normalize, normalize_signed, Action, Mode, NfError,
};
use crate::oracle::{
    closure, count_expected, enumerate_pure, factorial, matchings_count, prop_basis_rows,
    relation_orbit_rows, OracleError, RationalMatrix, RelationFamily,
};
use crate::perm::{block_embed, Perm};
use crate::symcore::{
    all_ordered_pairs, all_unordered_classes, iota, pair_shift, phi, reindex_primes, rho,
    OrderedGluingPair, SymError, UnorderedGluingClass,
};
use crate::trees::{
    decorate_input_raw, graft_raw, infer_type, local_rewrite_detailed, purify, purify_with_order,
    relabel_inputs_raw, Element, PureTree, RawNode, RawTree, TreeError,
};
use num_rational::BigRational;
use num_traits::{One, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use std::collections::{HashMap, HashSet};
use std::time::Instant;
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum VerifyError {
    #[error("expected bigrade {expected:?}, got {got:?}")]
    WrongBigrade {
        expected: (usize, usize),
        got: (usize, usize),
    },
    #[error(transparent)]
    Tree(#[from] TreeError),
    #[error(transparent)]
    Sym(#[from] SymError),
    #[error(transparent)]
    Perm(#[from] crate::perm::PermError),
    #[error(transparent)]
    Oracle(#[from] OracleError),
    #[error(transparent)]
    Nf(#[from] NfError),
}

/// Shadow of a weight-3 element with two gluings and one merger: the root
/// permutation together with the unordered gluing class read off after
/// shifting both gluing pairs into merged-leg coordinates.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Shadow21 {
    pub sigma: Perm,
    pub cls: UnorderedGluingClass,
}

/// Shadow of a weight-3 element with one gluing and two mergers: the root
/// permutation together with the gluing pair in merged-leg coordinates.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Shadow12 {
    pub sigma: Perm,
    pub pair: (usize, usize),
}

/// Outcome of one check, serializable as
/// `{check, anchor, params, pass, details, elapsed_ms}`.
#[derive(Debug, Clone, Serialize)]
pub struct Report {
    pub check: String,
    pub anchor: String,
    pub params: serde_json::Value,
    pub pass: bool,
    pub details: Vec<Detail>,
    pub elapsed_ms: u128,
}

#[derive(Debug, Clone, Serialize)]
pub struct Detail {
    #[serde(rename = "type")]
    pub ty: String,
    pub bigrade: String,
    pub lhs: String,
    pub rhs: String,
}

impl Detail {
    fn new(ty: String, bigrade: String, lhs: impl ToString, rhs: impl ToString) -> Detail {
        Detail {
            ty,
            bigrade,
            lhs: lhs.to_string(),
            rhs: rhs.to_string(),
        }
    }

    pub fn holds(&self) -> bool {
        self.lhs == self.rhs
    }
}

fn fmt_type(inputs: &[usize], output: usize) -> String {
    let ins: Vec<String> = inputs.iter().map(|v| v.to_string()).collect();
    format!("({};{})", ins.join(","), output)
}

fn fmt_bigrade(s: usize, m: usize) -> String {
    format!("({s},{m})")
}

fn finish(
    check: &str,
    anchor: &str,
    params: serde_json::Value,
    details: Vec<Detail>,
    start: Instant,
) -> Report {
    let pass = details.iter().all(Detail::holds);
    Report {
        check: check.to_string(),
        anchor: anchor.to_string(),
        params,
        pass,
        details,
        elapsed_ms: start.elapsed().as_millis(),
    }
}

/// Ordered color vectors with `parts` entries, each at least 1, summing to
/// `total`.
pub fn compositions(total: usize, parts: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    if parts == 0 {
        if total == 0 {
            out.push(vec![]);
        }
        return out;
    }
    fn rec(rem: usize, parts: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if parts == 1 {
            if rem >= 1 {
                cur.push(rem);
                out.push(cur.clone());
                cur.pop();
            }
            return;
        }
        for v in 1..=rem.saturating_sub(parts - 1) {
            cur.push(v);
            rec(rem - v, parts - 1, cur, out);
            cur.pop();
        }
    }
    rec(total, parts, &mut Vec::new(), &mut out);
    out
}

// ---------------------------------------------------------------------------
// Shadows
// ---------------------------------------------------------------------------

fn gluing_chain(mut t: &PureTree) -> (Vec<(usize, usize)>, &PureTree) {
    let mut chain = Vec::new();
    while let PureTree::Gluing { i, j, child } = t {
        chain.push((*i, *j));
        t = child;
    }
    (chain, t)
}

/// Shadow of a bigrade-(2,1) element. Of the two gluing vertices, the one
/// farther from the root plays the first role; a gluing on the merger's
/// second branch has its pair shifted by the first branch's color.
pub fn shadow21(e: &Element) -> Result<Shadow21, VerifyError> {
    let ty = infer_type(&e.tree)?;
    if (ty.gluings, ty.mergers) != (2, 1) {
        return Err(VerifyError::WrongBigrade {
            expected: (2, 1),
            got: (ty.gluings, ty.mergers),
        });
    }
    let (below, merger) = gluing_chain(&e.tree);
    let PureTree::Merger { left, right } = merger else {
        unreachable!("bigrade (2,1) has one merger below the gluing chain");
    };
    let (br1, _) = gluing_chain(left);
    let (br2, _) = gluing_chain(right);
    let shift = left.output_color();
    let total = ty.total_input_color();
    let (u, chi_u, w, chi_w) = match (below.len(), br1.len(), br2.len()) {
        (2, 0, 0) => (below[1], 0, below[0], 0),
        (1, 1, 0) => (br1[0], 0, below[0], 0),
        (1, 0, 1) => (br2[0], shift, below[0], 0),
        (0, 2, 0) => (br1[1], 0, br1[0], 0),
        (0, 0, 2) => (br2[1], shift, br2[0], shift),
        (0, 1, 1) => (br1[0], 0, br2[0], shift),
        _ => unreachable!("two gluings distribute over at most two chains"),
    };
    let o = OrderedGluingPair::new(total, u.0 + chi_u, u.1 + chi_u, w.0 + chi_w, w.1 + chi_w)?;
    Ok(Shadow21 {
        sigma: e.sigma.clone(),
        cls: phi(&o),
    })
}

/// Shadow of a bigrade-(1,2) element: the gluing pair shifted by the first
/// branch color of every merger below it that carries it on the second
/// branch.
pub fn shadow12(e: &Element) -> Result<Shadow12, VerifyError> {
    let ty = infer_type(&e.tree)?;
    if (ty.gluings, ty.mergers) != (1, 2) {
        return Err(VerifyError::WrongBigrade {
            expected: (1, 2),
            got: (ty.gluings, ty.mergers),
        });
    }
    fn locate(t: &PureTree, chi: usize) -> Option<(usize, usize, usize)> {
        match t {
            PureTree::Leaf { .. } => None,
            PureTree::Gluing { i, j, .. } => Some((*i, *j, chi)),
            PureTree::Merger { left, right } => {
                locate(left, chi).or_else(|| locate(right, chi + left.output_color()))
            }
        }
    }
    let (u1, u2, chi) = locate(&e.tree, 0).expect("bigrade (1,2) has one gluing");
    Ok(Shadow12 {
        sigma: e.sigma.clone(),
        pair: (u1 + chi, u2 + chi),
    })
}

/// Shadow invariance under every same-permutation single-edge rewrite of
/// every bigrade-(2,1) and -(1,2) pure tree within the bound. Regrouping
/// moves that re-sort branches change the root permutation and have no
/// same-permutation counterpart; they are counted and skipped.
pub fn check_shadows(max_total_color: usize, limit: usize) -> Result<Report, VerifyError> {
    let start = Instant::now();
    let mut details = Vec::new();
    let mut skipped_resorting = 0usize;
    let mut budget = 0usize;
    for total in 4..=max_total_color {
        for inputs in compositions(total, 2) {
            let output = total - 4;
            let trees = enumerate_pure(&inputs, output, 2, 1);
            budget += trees.len();
            if budget > limit {
                return Err(OracleError::ResourceLimit {
                    required: budget,
                    limit,
                }
                .into());
            }
            let (mut checked, mut equal) = (0usize, 0usize);
            for tree in trees {
                let e = Element::from_tree(tree);
                let base = shadow21(&e)?;
                for edge in e.tree.internal_edges() {
                    if let Some(r) = local_rewrite_detailed(&e, edge)? {
                        assert!(
                            !r.resorted && r.element.sigma.is_identity(),
                            "single-merger rewrites never re-sort branches"
                        );
                        checked += 1;
                        if shadow21(&r.element)? == base {
                            equal += 1;
                        }
                    }
                }
            }
            details.push(Detail::new(
                fmt_type(&inputs, output),
                fmt_bigrade(2, 1),
                equal,
                checked,
            ));
        }
    }
    for total in 3..=max_total_color {
        for inputs in compositions(total, 3) {
            let output = total - 2;
            let trees = enumerate_pure(&inputs, output, 1, 2);
            budget += trees.len();
            if budget > limit {
                return Err(OracleError::ResourceLimit {
                    required: budget,
                    limit,
                }
                .into());
            }
            let (mut checked, mut equal) = (0usize, 0usize);
            for tree in trees {
                let e = Element::from_tree(tree);
                let base = shadow12(&e)?;
                for edge in e.tree.internal_edges() {
                    if let Some(r) = local_rewrite_detailed(&e, edge)? {
                        if r.resorted {
                            skipped_resorting += 1;
                        } else {
                            debug_assert!(r.element.sigma.is_identity());
                            checked += 1;
                            if shadow12(&r.element)? == base {
                                equal += 1;
                            }
                        }
                    }
                }
            }
            details.push(Detail::new(
                fmt_type(&inputs, output),
                fmt_bigrade(1, 2),
                equal,
                checked,
            ));
        }
    }
    Ok(finish(
        "shadows",
        "shadow of (sigma,t) is unchanged by every same-permutation single-edge rewrite; gluing swaps are absorbed by phi o iota = phi",
        serde_json::json!({
            "max_total_color": max_total_color,
            "skipped_resorting_rewrites": skipped_resorting,
        }),
        details,
        start,
    ))
}

// ---------------------------------------------------------------------------
// Identity and structure checks
// ---------------------------------------------------------------------------

/// Exhaustively verifies
/// `rho(n-2,k',l') ∘ rho(n,i,j) = (n-1 n-3)(n-2 n) ∘ rho(n-2,i',j') ∘ rho(n,k,l)`
/// for all distinct `i<j`, `k<l` within `1..=n`, `4 <= n <= max_n`.
pub fn check_rho_identity(max_n: usize) -> Result<Report, VerifyError> {
    let start = Instant::now();
    let mut details = Vec::new();
    for n in 4..=max_n {
        let (mut checked, mut holds) = (0usize, 0usize);
        let flip =
            Perm::transposition(n, n - 1, n - 3)?.compose(&Perm::transposition(n, n - 2, n)?);
        let id2 = Perm::identity(2);
        for i in 1..=n {
            for j in i + 1..=n {
                for k in 1..=n {
                    for l in k + 1..=n {
                        if [k, l].contains(&i) || [k, l].contains(&j) {
                            continue;
                        }
                        let (ip, jp, kp, lp) = reindex_primes(n, i, j, k, l)?;
                        let lhs = block_embed(&rho(n - 2, kp, lp)?, &id2).compose(&rho(n, i, j)?);
                        let rhs = flip
                            .compose(&block_embed(&rho(n - 2, ip, jp)?, &id2))
                            .compose(&rho(n, k, l)?);
                        checked += 1;
                        if lhs == rhs {
                            holds += 1;
                        }
                    }
                }
            }
        }
        details.push(Detail::new(format!("n={n}"), String::new(), holds, checked));
    }
    Ok(finish(
        "rho-identity",
        "rho(n-2,k',l') rho(n,i,j) = (n-1 n-3)(n-2 n) rho(n-2,i',j') rho(n,k,l)",
        serde_json::json!({ "max_n": max_n }),
        details,
        start,
    ))
}

/// Structure of the fiber-swap involution: fixed-point free, squares to the
/// identity, compatible with the quotient map and with leg shifts; pair
/// counts `|O_n| = C(n,2)C(n-2,2)` and `|U_n| = |O_n|/2`.
pub fn check_iota_structure(max_n: usize) -> Result<Report, VerifyError> {
    let start = Instant::now();
    let mut details = Vec::new();
    for n in 4..=max_n {
        let ordered = all_ordered_pairs(n);
        let classes = all_unordered_classes(n);
        let mut good = 0usize;
        for o in &ordered {
            let t = iota(o);
            if t != *o && iota(&t) == *o && phi(&t) == phi(o) {
                good += 1;
            }
        }
        details.push(Detail::new(
            format!("n={n} involution"),
            String::new(),
            good,
            ordered.len(),
        ));
        let c2 = n * (n - 1) / 2;
        let c2m = (n - 2) * (n - 3) / 2;
        details.push(Detail::new(
            format!("n={n} |O_n|"),
            String::new(),
            ordered.len(),
            c2 * c2m,
        ));
        details.push(Detail::new(
            format!("n={n} |U_n|"),
            String::new(),
            classes.len(),
            ordered.len() / 2,
        ));
        let image: HashSet<_> = ordered.iter().map(phi).collect();
        details.push(Detail::new(
            format!("n={n} phi image"),
            String::new(),
            image.len(),
            classes.len(),
        ));
    }
    for m in 4..=6.min(max_n) {
        let (mut good, mut total) = (0usize, 0usize);
        for shift in 0..=4usize {
            for o in all_ordered_pairs(m) {
                total += 1;
                if pair_shift(shift, &iota(&o)) == iota(&pair_shift(shift, &o)) {
                    good += 1;
                }
            }
        }
        details.push(Detail::new(
            format!("m={m} shift commutes"),
            String::new(),
            good,
            total,
        ));
    }
    Ok(finish(
        "iota-structure",
        "iota is a fixed-point-free involution with phi o iota = phi; leg shifts commute with iota",
        serde_json::json!({ "max_n": max_n }),
        details,
        start,
    ))
}

// ---------------------------------------------------------------------------
// Counting checks
// ---------------------------------------------------------------------------

/// Closure class counts against the closed formulas: gluing chains
/// `(n; n-2s)` give `n!/(2^s s!)` classes; merger-only components give
/// `(sum v_i)!`.
pub fn check_class_counts(
    chain_max_n: usize,
    chain_max_s: usize,
    merger_max_total: usize,
    limit: usize,
) -> Result<Report, VerifyError> {
    let start = Instant::now();
    let mut details = Vec::new();
    for n in 1..=chain_max_n {
        for s in 0..=chain_max_s.min(n / 2) {
            let part = closure(&[n], n - 2 * s, s, 0, Mode::Even, limit)?;
            let expected = factorial(n) / (2u64.pow(s as u32) * factorial(s));
            details.push(Detail::new(
                fmt_type(&[n], n - 2 * s),
                fmt_bigrade(s, 0),
                part.n_classes(),
                expected,
            ));
        }
    }
    for total in 1..=merger_max_total {
        for r in 1..=total {
            for inputs in compositions(total, r) {
                let part = closure(&inputs, total, 0, r - 1, Mode::Even, limit)?;
                details.push(Detail::new(
                    fmt_type(&inputs, total),
                    fmt_bigrade(0, r - 1),
                    part.n_classes(),
                    factorial(total),
                ));
            }
        }
    }
    Ok(finish(
        "class-counts",
        "gluing-chain classes number n!/(2^s s!); merger-only classes number (sum v_i)!",
        serde_json::json!({
            "chain_max_n": chain_max_n,
            "chain_max_s": chain_max_s,
            "merger_max_total": merger_max_total,
        }),
        details,
        start,
    ))
}

/// The four weight-3 bigrade families: closure class count equals the
/// independent matching normal-form count, certifying injectivity of the
/// normal-form surjection at weight 3.
pub fn check_diamond(max_total_color: usize, limit: usize) -> Result<Report, VerifyError> {
    let start = Instant::now();
    let mut details = Vec::new();
    let run = |inputs: &[usize], s: usize, details: &mut Vec<Detail>| -> Result<(), VerifyError> {
        let total: usize = inputs.iter().sum();
        let m = inputs.len() - 1;
        if total < 2 * s {
            return Ok(());
        }
        let output = total - 2 * s;
        if enumerate_pure(inputs, output, s, m).is_empty() {
            return Ok(());
        }
        let part = closure(inputs, output, s, m, Mode::Even, limit)?;
        let expected = factorial(output) * matchings_count(total, s);
        details.push(Detail::new(
            fmt_type(inputs, output),
            fmt_bigrade(s, m),
            part.n_classes(),
            expected,
        ));
        Ok(())
    };
    for n in 6..=max_total_color {
        run(&[n], 3, &mut details)?;
    }
    for total in 4..=max_total_color {
        for inputs in compositions(total, 2) {
            run(&inputs, 2, &mut details)?;
        }
    }
    for total in 3..=max_total_color {
        for inputs in compositions(total, 3) {
            run(&inputs, 1, &mut details)?;
        }
    }
    for total in 4..=max_total_color {
        for inputs in compositions(total, 4) {
            run(&inputs, 0, &mut details)?;
        }
    }
    Ok(finish(
        "diamond-weight-3",
        "weight-3 closure class counts equal matching normal-form counts in all four bigrade families",
        serde_json::json!({ "max_total_color": max_total_color }),
        details,
        start,
    ))
}

/// Signed closure: odd-mode sign assignments are consistent and odd class
/// counts equal even class counts on every component of weight at most 3.
pub fn check_odd_even(max_total_color: usize, limit: usize) -> Result<Report, VerifyError> {
    let start = Instant::now();
    let mut details = Vec::new();
    for total in 1..=max_total_color {
        for r in 1..=total.min(4) {
            for inputs in compositions(total, r) {
                let m = r - 1;
                for s in 0..=(3usize.saturating_sub(m)).min(total / 2) {
                    let output = total - 2 * s;
                    if enumerate_pure(&inputs, output, s, m).is_empty() {
                        continue;
                    }
                    let even = closure(&inputs, output, s, m, Mode::Even, limit)?;
                    let odd = closure(&inputs, output, s, m, Mode::Odd, limit)?;
                    details.push(Detail::new(
                        fmt_type(&inputs, output),
                        fmt_bigrade(s, m),
                        format!("classes={} consistent={}", odd.n_classes(), odd.consistent),
                        format!("classes={} consistent=true", even.n_classes()),
                    ));
                }
            }
        }
    }
    Ok(finish(
        "odd-even-dimensions",
        "signed closure is consistent and odd class counts equal even class counts at weight <= 3",
        serde_json::json!({ "max_total_color": max_total_color }),
        details,
        start,
    ))
}

// ---------------------------------------------------------------------------
// Relation ranks
// ---------------------------------------------------------------------------

/// Exact ranks of the three relation-family spans against their basis
/// cardinalities, plus containment and independence of the explicit bases.
pub fn check_relation_ranks(
    gluing_max_n: usize,
    gluing_merger_max_total: usize,
    merger_max_total: usize,
    limit: usize,
) -> Result<Report, VerifyError> {
    let start = Instant::now();
    let mut details = Vec::new();

    let run = |family: RelationFamily,
                   expected: u64,
                   details: &mut Vec<Detail>|
     -> Result<(), VerifyError> {
        let (inputs, output, s, m) = family.component();
        let (basis, rows) = relation_orbit_rows(family, limit)?;
        let mut mat = RationalMatrix::new(basis.len());
        for row in rows {
            mat.insert_row(row);
        }
        details.push(Detail::new(
            fmt_type(&inputs, output),
            format!("{} rank", fmt_bigrade(s, m)),
            mat.rank(),
            expected,
        ));
        let (_, basis_rows) = prop_basis_rows(family)?;
        details.push(Detail::new(
            fmt_type(&inputs, output),
            format!("{} basis size", fmt_bigrade(s, m)),
            basis_rows.len(),
            expected,
        ));
        let contained = basis_rows
            .iter()
            .filter(|r| mat.contains((*r).clone()))
            .count();
        details.push(Detail::new(
            fmt_type(&inputs, output),
            format!("{} basis contained", fmt_bigrade(s, m)),
            contained,
            basis_rows.len(),
        ));
        let mut indep = RationalMatrix::new(basis.len());
        let mut independent = 0usize;
        for row in basis_rows.iter() {
            if indep.insert_row(row.clone()) {
                independent += 1;
            }
        }
        details.push(Detail::new(
            fmt_type(&inputs, output),
            format!("{} basis independent", fmt_bigrade(s, m)),
            independent,
            basis_rows.len(),
        ));
        Ok(())
    };

    for n in 4..=gluing_max_n {
        run(
            RelationFamily::GluingGluing { n },
            factorial(n) / 8,
            &mut details,
        )?;
    }
    for total in 2..=gluing_merger_max_total {
        for inputs in compositions(total, 2) {
            let (n, m) = (inputs[0], inputs[1]);
            let expected =
                factorial(n + m - 2) * ((n * (n - 1) / 2 + m * (m - 1) / 2) as u64);
            run(RelationFamily::GluingMerger { n, m }, expected, &mut details)?;
        }
    }
    for total in 3..=merger_max_total {
        for inputs in compositions(total, 3) {
            let (n, m, l) = (inputs[0], inputs[1], inputs[2]);
            run(
                RelationFamily::MergerMerger { n, m, l },
                2 * factorial(total),
                &mut details,
            )?;
        }
    }
    Ok(finish(
        "relation-ranks",
        "relation spans have ranks n!/8, (n+m-2)!(C(n,2)+C(m,2)) and 2(n+m+l)!; the listed bases are contained and independent",
        serde_json::json!({
            "gluing_max_n": gluing_max_n,
            "gluing_merger_max_total": gluing_merger_max_total,
            "merger_max_total": merger_max_total,
        }),
        details,
        start,
    ))
}

// ---------------------------------------------------------------------------
// Purification bijection
// ---------------------------------------------------------------------------

/// Order-independence of purification, the decorated-tree count formula
/// `|F(v̄)| = v0! · |pure trees|`, and a direct fiber check on small types.
pub fn check_pure_bijection(max_total_color: usize, limit: usize) -> Result<Report, VerifyError> {
    let start = Instant::now();
    let mut details = Vec::new();
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);

    // Order independence on shapes with at most 4 vertices: decorations
    // range over the non-root internal vertices (exhaustively when the space
    // is small, sampled otherwise), push orders over all admissible
    // linearizations of those vertices.
    let (mut orders_checked, mut orders_agree) = (0usize, 0usize);
    for total in 1..=max_total_color.min(6) {
        for r in 1..=total {
            for inputs in compositions(total, r) {
                let m = r - 1;
                for s in 0..=(4usize.saturating_sub(m)).min(total / 2) {
                    for tree in enumerate_pure(&inputs, total - 2 * s, s, m) {
                        let raw = RawTree::from_pure(&tree);
                        let paths: Vec<Vec<u8>> = internal_paths(&raw)
                            .into_iter()
                            .filter(|p| !p.is_empty())
                            .collect();
                        let degrees: Vec<usize> =
                            paths.iter().map(|p| color_at(&raw, p)).collect();
                        let space: u64 = degrees.iter().map(|&d| factorial(d)).product();
                        let tuples: Vec<Vec<usize>> = if space <= 2000 {
                            decoration_tuples(&degrees)
                        } else {
                            (0..100)
                                .map(|_| {
                                    degrees
                                        .iter()
                                        .map(|&d| rng.gen_range(0..factorial(d) as usize))
                                        .collect()
                                })
                                .collect()
                        };
                        let orders = linear_extensions(&paths);
                        for tuple in tuples {
                            let mut decorated = raw.clone();
                            for (path, &rank) in paths.iter().zip(tuple.iter()) {
                                let degree = color_at(&raw, path);
                                set_decor(&mut decorated, path, Perm::from_lex_rank(degree, rank));
                            }
                            let reference = purify(&decorated)?;
                            for order in &orders {
                                orders_checked += 1;
                                if purify_with_order(&decorated, order)? == reference {
                                    orders_agree += 1;
                                }
                            }
                        }
                    }
                }
            }
        }
    }
    details.push(Detail::new(
        "push-order independence".into(),
        String::new(),
        orders_agree,
        orders_checked,
    ));

    // Count formula for every type within the bound.
    for total in 1..=max_total_color {
        for r in 1..=total {
            for inputs in compositions(total, r) {
                let m = r - 1;
                for s in 0..=(total / 2) {
                    let output = total - 2 * s;
                    let trees = enumerate_pure(&inputs, output, s, m);
                    if trees.is_empty() {
                        continue;
                    }
                    if trees.len() > limit {
                        return Err(OracleError::ResourceLimit {
                            required: trees.len(),
                            limit,
                        }
                        .into());
                    }
                    let mut formula = BigRational::zero();
                    for t in &trees {
                        formula += decorated_count_weight(t);
                    }
                    let expected = BigRational::from_integer(
                        (factorial(output) * trees.len() as u64).into(),
                    );
                    details.push(Detail::new(
                        fmt_type(&inputs, output),
                        fmt_bigrade(s, m),
                        formula.to_string(),
                        expected.to_string(),
                    ));
                }
            }
        }
    }

    // Direct fiber check on small types: enumerate every decorated tree,
    // purify, and verify image count and uniform fiber sizes.
    for total in 1..=4usize.min(max_total_color) {
        for r in 1..=total {
            for inputs in compositions(total, r) {
                let m = r - 1;
                for s in 0..=(total / 2) {
                    let output = total - 2 * s;
                    let trees = enumerate_pure(&inputs, output, s, m);
                    if trees.is_empty() {
                        continue;
                    }
                    let mut images: HashMap<Element, u64> = HashMap::new();
                    for t in &trees {
                        let raw = RawTree::from_pure(t);
                        let paths = internal_paths(&raw);
                        let degrees: Vec<usize> =
                            paths.iter().map(|p| color_at(&raw, p)).collect();
                        for tuple in decoration_tuples(&degrees) {
                            let mut decorated = raw.clone();
                            for (path, &rank) in paths.iter().zip(tuple.iter()) {
                                let degree = color_at(&raw, path);
                                set_decor(&mut decorated, path, Perm::from_lex_rank(degree, rank));
                            }
                            *images.entry(purify(&decorated)?).or_insert(0) += 1;
                        }
                    }
                    let expected_images = factorial(output) * trees.len() as u64;
                    // Each image's fiber is the edge group of its own shape.
                    let fibers_ok = images
                        .iter()
                        .all(|(el, &c)| c == edge_group_order(&el.tree));
                    details.push(Detail::new(
                        fmt_type(&inputs, output),
                        format!("{} direct", fmt_bigrade(s, m)),
                        format!("images={} fibers_uniform={}", images.len(), fibers_ok),
                        format!("images={expected_images} fibers_uniform=true"),
                    ));
                }
            }
        }
    }

    Ok(finish(
        "purify-bijection",
        "purification is push-order independent; decorated-tree counts equal v0! times the pure-tree count",
        serde_json::json!({ "max_total_color": max_total_color }),
        details,
        start,
    ))
}

/// All orderings of `paths` in which every vertex precedes the vertices
/// below it (proper prefixes come later).
fn linear_extensions(paths: &[Vec<u8>]) -> Vec<Vec<Vec<u8>>> {
    fn is_proper_prefix(shorter: &[u8], longer: &[u8]) -> bool {
        longer.len() > shorter.len() && longer[..shorter.len()] == *shorter
    }
    fn extend(
        paths: &[Vec<u8>],
        used: &mut Vec<bool>,
        current: &mut Vec<usize>,
        out: &mut Vec<Vec<Vec<u8>>>,
    ) {
        if current.len() == paths.len() {
            out.push(current.iter().map(|&i| paths[i].clone()).collect());
            return;
        }
        for cand in 0..paths.len() {
            if used[cand] {
                continue;
            }
            let blocked = (0..paths.len())
                .any(|other| !used[other] && is_proper_prefix(&paths[cand], &paths[other]));
            if blocked {
                continue;
            }
            used[cand] = true;
            current.push(cand);
            extend(paths, used, current, out);
            current.pop();
            used[cand] = false;
        }
    }
    let mut out = Vec::new();
    extend(
        paths,
        &mut vec![false; paths.len()],
        &mut Vec::new(),
        &mut out,
    );
    out
}

fn internal_paths(raw: &RawTree) -> Vec<Vec<u8>> {
    let mut out = vec![vec![]];
    out.extend(
        raw.pushable_paths()
            .into_iter()
            .filter(|p| !is_leaf_at(raw, p)),
    );
    out
}

fn node_at<'a>(raw: &'a RawTree, path: &[u8]) -> &'a RawTree {
    let mut cur = raw;
    for &d in path {
        cur = match &cur.node {
            RawNode::Gluing { child, .. } => child,
            RawNode::Merger { left, right } => {
                if d == 0 {
                    left
                } else {
                    right
                }
            }
            RawNode::Leaf { .. } => unreachable!("path descends through a leaf"),
        };
    }
    cur
}

fn is_leaf_at(raw: &RawTree, path: &[u8]) -> bool {
    matches!(node_at(raw, path).node, RawNode::Leaf { .. })
}

fn color_at(raw: &RawTree, path: &[u8]) -> usize {
    node_at(raw, path).output_color()
}

fn set_decor(raw: &mut RawTree, path: &[u8], perm: Perm) {
    let mut cur = raw;
    for &d in path {
        cur = match &mut cur.node {
            RawNode::Gluing { child, .. } => child,
            RawNode::Merger { left, right } => {
                if d == 0 {
                    left
                } else {
                    right
                }
            }
            RawNode::Leaf { .. } => unreachable!("path descends through a leaf"),
        };
    }
    cur.decor = perm;
}

fn decoration_tuples(degrees: &[usize]) -> Vec<Vec<usize>> {
    let mut out = vec![vec![]];
    for &d in degrees {
        let order = factorial(d) as usize;
        let mut next = Vec::with_capacity(out.len() * order);
        for tuple in &out {
            for rank in 0..order {
                let mut t = tuple.clone();
                t.push(rank);
                next.push(t);
            }
        }
        out = next;
    }
    out
}

/// Contribution of one pure tree to the decorated-tree count: generator-set
/// sizes over the edge group, split evenly over the shape's gluing labels.
fn decorated_count_weight(t: &PureTree) -> BigRational {
    fn big(n: u64) -> BigRational {
        BigRational::from_integer(n.into())
    }
    fn rec(t: &PureTree, acc: &mut BigRational, is_root: bool) {
        match t {
            PureTree::Leaf { .. } => {}
            PureTree::Gluing { child, .. } => {
                let n = child.output_color();
                *acc *= big(factorial(n) / 2);
                *acc /= big((n * (n - 1) / 2) as u64);
                if !is_root {
                    *acc /= big(factorial(t.output_color()));
                }
                rec(child, acc, false);
            }
            PureTree::Merger { left, right } => {
                *acc *= big(factorial(t.output_color()));
                if !is_root {
                    *acc /= big(factorial(t.output_color()));
                }
                rec(left, acc, false);
                rec(right, acc, false);
            }
        }
    }
    if matches!(t, PureTree::Leaf { .. }) {
        return big(factorial(t.output_color()));
    }
    let mut acc = BigRational::one();
    rec(t, &mut acc, true);
    acc
}

/// Order of the edge group of one pure tree: the product of the factorials
/// of the internal edge colors.
fn edge_group_order(t: &PureTree) -> u64 {
    fn rec(t: &PureTree, is_root: bool) -> u64 {
        let own = if is_root || matches!(t, PureTree::Leaf { .. }) {
            1
        } else {
            factorial(t.output_color())
        };
        match t {
            PureTree::Leaf { .. } => 1,
            PureTree::Gluing { child, .. } => own * rec(child, false),
            PureTree::Merger { left, right } => own * rec(left, false) * rec(right, false),
        }
    }
    rec(t, true)
}

// ---------------------------------------------------------------------------
// Normalizer agreement
// ---------------------------------------------------------------------------

/// The normalizer induces a bijection between rewrite classes and normal
/// forms on every component within the bounds, in both modes; odd signs
/// agree with the closure's relative sign assignment.
pub fn check_normalizer(
    max_total_color: usize,
    max_weight: usize,
    limit: usize,
) -> Result<Report, VerifyError> {
    let start = Instant::now();
    let mut details = Vec::new();
    for total in 1..=max_total_color {
        for r in 1..=total.min(max_weight + 1) {
            for inputs in compositions(total, r) {
                let m = r - 1;
                for s in 0..=(max_weight.saturating_sub(m)).min(total / 2) {
                    let output = total - 2 * s;
                    if enumerate_pure(&inputs, output, s, m).is_empty() {
                        continue;
                    }
                    for mode in [Mode::Even, Mode::Odd] {
                        let part = closure(&inputs, output, s, m, mode, limit)?;
                        let mut class_rep: HashMap<
                            usize,
                            (Perm, Vec<(usize, usize)>, i8, usize),
                        > = HashMap::new();
                        let mut well_defined = true;
                        let mut distinct: HashSet<(Perm, Vec<(usize, usize)>)> = HashSet::new();
                        for ti in 0..part.n_trees() {
                            // The normalizer is left-equivariant by
                            // construction, so one pass per tree suffices.
                            let base =
                                normalize(&Element::from_tree(part.tree(ti).clone()), mode)?;
                            for pr in 0..part.perm_count() {
                                let idx = ti * part.perm_count() + pr;
                                let sigma =
                                    Perm::from_lex_rank(output, pr).compose(&base.sigma);
                                let root = part.class_of(idx);
                                distinct.insert((sigma.clone(), base.matching.clone()));
                                match class_rep.get(&root) {
                                    None => {
                                        class_rep.insert(
                                            root,
                                            (sigma, base.matching.clone(), base.sign, idx),
                                        );
                                    }
                                    Some((rs, rm, rsign, rep_idx)) => {
                                        let same = *rs == sigma && *rm == base.matching;
                                        let sign_ok = match mode {
                                            Mode::Even => base.sign == 1,
                                            Mode::Odd => {
                                                base.sign * rsign
                                                    == part.sign_of(idx)
                                                        * part.sign_of(*rep_idx)
                                            }
                                        };
                                        if !same || !sign_ok {
                                            well_defined = false;
                                        }
                                    }
                                }
                            }
                        }
                        let expected = count_expected(&inputs, output, s, m).unwrap_or_default();
                        details.push(Detail::new(
                            fmt_type(&inputs, output),
                            format!("{} {:?}", fmt_bigrade(s, m), mode),
                            format!(
                                "classes={} normal_forms={} constant_on_classes={} consistent={}",
                                part.n_classes(),
                                distinct.len(),
                                well_defined,
                                part.consistent,
                            ),
                            format!(
                                "classes={expected} normal_forms={expected} constant_on_classes=true consistent=true"
                            ),
                        ));
                    }
                }
            }
        }
    }
    Ok(finish(
        "normalizer-bijection",
        "rewrite classes and matching normal forms are in bijection; odd signs agree with the signed closure",
        serde_json::json!({
            "max_total_color": max_total_color,
            "max_weight": max_weight,
        }),
        details,
        start,
    ))
}

/// Randomized agreement of [`compose_at`] and [`act`] with the
/// graft-then-normalize oracle, plus associativity and bigrade additivity.
pub fn check_normalizer_random(cases: usize, seed: u64) -> Result<Report, VerifyError> {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (mut compose_ok, mut compose_n) = (0usize, 0usize);
    let (mut act_ok, mut act_n) = (0usize, 0usize);
    let (mut assoc_ok, mut assoc_n) = (0usize, 0usize);
    let mut additive_ok = 0usize;

    for _ in 0..cases {
        let mode = if rng.gen_bool(0.5) { Mode::Even } else { Mode::Odd };
        let outer_el = random_element(&mut rng, None);
        let outer_ty = infer_type(&outer_el.tree)?;
        let i = rng.gen_range(1..=outer_ty.inputs.len());
        let inner_el = random_element(&mut rng, Some(outer_ty.inputs[i - 1]));
        let outer = normalize(&outer_el, mode)?;
        let inner = normalize(&inner_el, mode)?;
        let (outer_den, outer_sign) = denote(&outer)?;
        let (inner_den, inner_sign) = denote(&inner)?;

        compose_n += 1;
        let direct = compose_at(&outer, i, &inner)?;
        let grafted = purify(&graft_raw(&outer_den, i, &inner_den)?)?;
        let via_tree = normalize_signed(&(grafted, outer_sign * inner_sign), mode)?;
        if direct == via_tree {
            compose_ok += 1;
        }
        if direct.matching.len() == outer.matching.len() + inner.matching.len()
            && direct.inputs.len() == outer.inputs.len() + inner.inputs.len() - 1
        {
            additive_ok += 1;
        }

        // Group actions against the decorated-denotation oracle.
        act_n += 3;
        let s = random_perm(&mut rng, outer.output);
        let left = act(&outer, &Action::Left(s.clone()))?;
        let left_tree = normalize_signed(
            &(
                purify(&RawTree::from_element(&outer_den).decorate(&s)?)?,
                outer_sign,
            ),
            mode,
        )?;
        if left == left_tree {
            act_ok += 1;
        }
        let tau = random_perm(&mut rng, outer.inputs[i - 1]);
        let right = act(
            &outer,
            &Action::Right {
                input: i,
                perm: tau.clone(),
            },
        )?;
        let right_tree = normalize_signed(
            &(purify(&decorate_input_raw(&outer_den, i, &tau)?)?, outer_sign),
            mode,
        )?;
        if right == right_tree {
            act_ok += 1;
        }
        let pi = random_perm(&mut rng, outer.inputs.len());
        let relabeled = act(&outer, &Action::Relabel(pi.clone()))?;
        let relabeled_tree = normalize_signed(
            &(purify(&relabel_inputs_raw(&outer_den, &pi)?)?, outer_sign),
            mode,
        )?;
        if relabeled == relabeled_tree {
            act_ok += 1;
        }

        // Associativity instance (a o_1 b) o_1 c = a o_1 (b o_1 c).
        assoc_n += 1;
        let b = normalize(&random_element(&mut rng, Some(outer.inputs[0])), mode)?;
        let c = normalize(&random_element(&mut rng, Some(b.inputs[0])), mode)?;
        let lhs = compose_at(&compose_at(&outer, 1, &b)?, 1, &c)?;
        let rhs = compose_at(&outer, 1, &compose_at(&b, 1, &c)?)?;
        if lhs == rhs {
            assoc_ok += 1;
        }
    }

    let details = vec![
        Detail::new(
            "compose vs graft oracle".into(),
            String::new(),
            compose_ok,
            compose_n,
        ),
        Detail::new("actions vs tree oracle".into(), String::new(), act_ok, act_n),
        Detail::new(
            "composition associativity".into(),
            String::new(),
            assoc_ok,
            assoc_n,
        ),
        Detail::new(
            "bigrade additivity".into(),
            String::new(),
            additive_ok,
            compose_n,
        ),
    ];
    Ok(finish(
        "normalizer-random",
        "composition and actions on normal forms agree with grafting the denotations and renormalizing",
        serde_json::json!({ "cases": cases, "seed": seed }),
        details,
        start,
    ))
}

fn random_perm(rng: &mut ChaCha8Rng, degree: usize) -> Perm {
    Perm::from_lex_rank(degree, rng.gen_range(0..factorial(degree) as usize))
}

/// A small random element, optionally with a prescribed output color.
fn random_element(rng: &mut ChaCha8Rng, output: Option<usize>) -> Element {
    loop {
        let r = rng.gen_range(1..=3usize);
        let inputs: Vec<usize> = (0..r).map(|_| rng.gen_range(1..=3usize)).collect();
        let total: usize = inputs.iter().sum();
        let s = match output {
            Some(v0) => {
                if total < v0 || (total - v0) % 2 != 0 {
                    continue;
                }
                (total - v0) / 2
            }
            None => rng.gen_range(0..=(total / 2).min(2)),
        };
        let v0 = total - 2 * s;
        let trees = enumerate_pure(&inputs, v0, s, r - 1);
        if trees.is_empty() {
            continue;
        }
        let tree = trees[rng.gen_range(0..trees.len())].clone();
        return Element {
            sigma: random_perm(rng, v0),
            tree,
        };
    }
}

/// Runs every check, scaled by `max` (the weight-3 total-color bound).
pub fn check_all(max: usize, limit: usize, seed: u64) -> Result<Vec<Report>, VerifyError> {
    let max = max.max(4);
    Ok(vec![
        check_rho_identity(max + 1)?,
        check_iota_structure(max + 2)?,
        check_pure_bijection(max - 1, limit)?,
        check_class_counts(max, 3, max.saturating_sub(2).max(2), limit)?,
        check_diamond(max, limit)?,
        check_shadows(max - 1, limit)?,
        check_odd_even(max, limit)?,
        check_normalizer(max - 1, 4, limit)?,
        check_normalizer_random(200, seed)?,
        check_relation_ranks(6.min(max), 6.min(max), 5.min(max), limit)?,
    ])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::trees::local_rewrite_signed;

    fn leaf(i: usize, c: usize) -> PureTree {
        PureTree::leaf(i, c)
    }

    #[test]
    fn shadow21_examples() {
        // Both gluings below the merger.
        let tree = PureTree::gluing(
            1,
            2,
            PureTree::gluing(1, 2, PureTree::merger(leaf(1, 2), leaf(2, 2)).unwrap()).unwrap(),
        )
        .unwrap();
        let e = Element::from_tree(tree);
        let sh = shadow21(&e).unwrap();
        assert_eq!(sh.cls.representative, (1, 2, 3, 4));
        assert!(sh.sigma.is_identity());

        // The gluing-swap rewrite keeps the shadow.
        let r = local_rewrite_signed(&e, 1).unwrap().unwrap().0;
        assert_eq!(shadow21(&r).unwrap(), sh);
    }

    #[test]
    fn shadow12_examples() {
        // Gluing at the root below both mergers: no shift.
        let tree = PureTree::gluing(
            1,
            2,
            PureTree::merger(PureTree::merger(leaf(1, 1), leaf(2, 1)).unwrap(), leaf(3, 2))
                .unwrap(),
        )
        .unwrap();
        assert_eq!(shadow12(&Element::from_tree(tree)).unwrap().pair, (1, 2));

        // Gluing on the second branch: shifted by the first branch color.
        let tree = PureTree::merger(
            PureTree::merger(leaf(1, 1), leaf(2, 1)).unwrap(),
            PureTree::gluing(1, 2, leaf(3, 2)).unwrap(),
        )
        .unwrap();
        assert_eq!(shadow12(&Element::from_tree(tree)).unwrap().pair, (3, 4));
    }

    #[test]
    fn shadow_rejects_wrong_bigrade() {
        let e = Element::from_tree(PureTree::gluing(1, 2, leaf(1, 4)).unwrap());
        assert!(matches!(
            shadow21(&e),
            Err(VerifyError::WrongBigrade { .. })
        ));
        assert!(matches!(
            shadow12(&e),
            Err(VerifyError::WrongBigrade { .. })
        ));
    }

    #[test]
    fn shadow_mutation_detected() {
        // A chi shift that is off by one breaks invariance across a
        // branch-transfer rewrite.
        let tree = PureTree::merger(
            leaf(1, 2),
            PureTree::gluing(1, 2, leaf(2, 4)).unwrap(),
        )
        .unwrap();
        let glued_twice = PureTree::gluing(1, 2, tree).unwrap();
        let e = Element::from_tree(glued_twice);
        let sh = shadow21(&e).unwrap();
        // Pull the branch gluing below the merger.
        let paths = e.tree.internal_vertex_paths();
        let edge = paths.iter().position(|p| p.len() == 2).unwrap();
        let r = local_rewrite_signed(&e, edge).unwrap().unwrap().0;
        assert_eq!(shadow21(&r).unwrap(), sh);
        // Shifting the branch pair by one instead of the branch color
        // produces a different class.
        let (u1, u2) = (1usize, 2usize);
        let bad = OrderedGluingPair::new(6, u1 + 1, u2 + 1, 1, 2).unwrap();
        assert_ne!(phi(&bad), sh.cls);
    }

    #[test]
    fn rho_identity_small_and_mutated() {
        let report = check_rho_identity(5).unwrap();
        assert!(report.pass);
        // Dropping the double transposition breaks the identity.
        let n = 4;
        let (i, j, k, l) = (1, 2, 3, 4);
        let (ip, jp, kp, lp) = reindex_primes(n, i, j, k, l).unwrap();
        let lhs = block_embed(&rho(n - 2, kp, lp).unwrap(), &Perm::identity(2))
            .compose(&rho(n, i, j).unwrap());
        let mutated = block_embed(&rho(n - 2, ip, jp).unwrap(), &Perm::identity(2))
            .compose(&rho(n, k, l).unwrap());
        assert_ne!(lhs, mutated);
    }

    #[test]
    fn iota_structure_small() {
        assert!(check_iota_structure(6).unwrap().pass);
    }

    #[test]
    fn diamond_tiny() {
        let report = check_diamond(4, 1_000_000).unwrap();
        assert!(report.pass, "{:?}", report.details);
        let d = report
            .details
            .iter()
            .find(|d| d.ty == "(2,2;0)")
            .expect("type (2,2;0) covered");
        assert_eq!(d.lhs, "3");
    }

    #[test]
    fn odd_even_tiny() {
        assert!(check_odd_even(4, 1_000_000).unwrap().pass);
    }

    #[test]
    fn shadows_tiny() {
        assert!(check_shadows(5, 1_000_000).unwrap().pass);
    }

    #[test]
    fn class_counts_tiny() {
        assert!(check_class_counts(5, 2, 4, 1_000_000).unwrap().pass);
    }

    #[test]
    fn bijection_tiny() {
        assert!(check_pure_bijection(4, 1_000_000).unwrap().pass);
    }

    #[test]
    fn normalizer_tiny() {
        assert!(check_normalizer(4, 3, 1_000_000).unwrap().pass);
    }

    #[test]
    fn normalizer_random_small() {
        let report = check_normalizer_random(25, 7).unwrap();
        assert!(report.pass, "{:?}", report.details);
    }

    #[test]
    fn ranks_tiny() {
        let report = check_relation_ranks(4, 4, 4, 1_000_000).unwrap();
        assert!(report.pass, "{:?}", report.details);
    }
}
