//! Surface expression language.
//!
//! Grammar (whitespace-insensitive):
//!
//! ```text
//! expr := leaf
//!       | "xi" "[" INT "," INT "]" "(" expr ")"
//!       | "m" "(" expr "," expr ")"
//!       | "p" "[" INT {" " INT} "]" "(" expr ")"
//! leaf := "x" INT ":" INT
//! ```
//!
//! An expression denotes a decorated tree: `p[..]` is a left permutation
//! decoration, `m` a merger whose written argument order fixes the leg order,
//! `xi[i,j]` a self-gluing. [`expr_to_raw`] validates leaf labeling, gluing
//! bounds and decoration degrees; the CLI purifies the result before any
//! further processing.

use crate::perm::Perm;
use crate::trees::{Element, PureTree, RawTree, TreeError};
use std::fmt;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Expr {
    Leaf {
        index: usize,
        color: usize,
    },
    Xi {
        i: usize,
        j: usize,
        inner: Box<Expr>,
    },
    Merge {
        left: Box<Expr>,
        right: Box<Expr>,
    },
    PermApp {
        images: Vec<usize>,
        inner: Box<Expr>,
    },
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ExprError {
    #[error("syntax error at byte {offset}: {message}")]
    Syntax { offset: usize, message: String },
    #[error("validation error: {0}")]
    Validation(String),
    #[error(transparent)]
    Tree(#[from] TreeError),
}

// ---------------------------------------------------------------------------
// Parsing
// ---------------------------------------------------------------------------

struct Parser<'a> {
    text: &'a [u8],
    pos: usize,
}

impl<'a> Parser<'a> {
    fn err<T>(&self, message: impl Into<String>) -> Result<T, ExprError> {
        Err(ExprError::Syntax {
            offset: self.pos,
            message: message.into(),
        })
    }

    fn skip_ws(&mut self) {
        while self.pos < self.text.len() && self.text[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.text.get(self.pos).copied()
    }

    fn expect(&mut self, byte: u8) -> Result<(), ExprError> {
        self.skip_ws();
        if self.text.get(self.pos) == Some(&byte) {
            self.pos += 1;
            Ok(())
        } else {
            self.err(format!("expected '{}'", byte as char))
        }
    }

    fn integer(&mut self) -> Result<usize, ExprError> {
        self.skip_ws();
        let start = self.pos;
        while self.pos < self.text.len() && self.text[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        if self.pos == start {
            return self.err("expected an integer");
        }
        std::str::from_utf8(&self.text[start..self.pos])
            .unwrap()
            .parse()
            .or_else(|_| self.err("integer out of range"))
    }

    fn expr(&mut self) -> Result<Expr, ExprError> {
        match self.peek() {
            Some(b'x') if self.text[self.pos..].starts_with(b"xi") => {
                self.pos += 2;
                self.expect(b'[')?;
                let i = self.integer()?;
                self.expect(b',')?;
                let j = self.integer()?;
                self.expect(b']')?;
                self.expect(b'(')?;
                let inner = self.expr()?;
                self.expect(b')')?;
                Ok(Expr::Xi {
                    i,
                    j,
                    inner: Box::new(inner),
                })
            }
            Some(b'x') => {
                self.pos += 1;
                let index = self.integer()?;
                self.expect(b':')?;
                let color = self.integer()?;
                Ok(Expr::Leaf { index, color })
            }
            Some(b'm') => {
                self.pos += 1;
                self.expect(b'(')?;
                let left = self.expr()?;
                self.expect(b',')?;
                let right = self.expr()?;
                self.expect(b')')?;
                Ok(Expr::Merge {
                    left: Box::new(left),
                    right: Box::new(right),
                })
            }
            Some(b'p') => {
                self.pos += 1;
                self.expect(b'[')?;
                let mut images = Vec::new();
                loop {
                    self.skip_ws();
                    if self.text.get(self.pos) == Some(&b']') {
                        self.pos += 1;
                        break;
                    }
                    images.push(self.integer()?);
                }
                self.expect(b'(')?;
                let inner = self.expr()?;
                self.expect(b')')?;
                Ok(Expr::PermApp {
                    images,
                    inner: Box::new(inner),
                })
            }
            Some(c) => self.err(format!("unexpected character '{}'", c as char)),
            None => self.err("unexpected end of input"),
        }
    }
}

/// Parses an expression, reporting syntax errors with byte offsets. The
/// result is structurally checked by [`expr_to_raw`].
pub fn parse(text: &str) -> Result<Expr, ExprError> {
    let mut p = Parser {
        text: text.as_bytes(),
        pos: 0,
    };
    let e = p.expr()?;
    p.skip_ws();
    if p.pos != p.text.len() {
        return p.err("trailing input");
    }
    Ok(e)
}

// ---------------------------------------------------------------------------
// Printing
// ---------------------------------------------------------------------------

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Leaf { index, color } => write!(f, "x{index}:{color}"),
            Expr::Xi { i, j, inner } => write!(f, "xi[{i},{j}]({inner})"),
            Expr::Merge { left, right } => write!(f, "m({left}, {right})"),
            Expr::PermApp { images, inner } => {
                let imgs: Vec<String> = images.iter().map(|x| x.to_string()).collect();
                write!(f, "p[{}]({})", imgs.join(" "), inner)
            }
        }
    }
}

/// Canonical rendering; `parse(print(e)) == e`.
pub fn print(e: &Expr) -> String {
    e.to_string()
}

// ---------------------------------------------------------------------------
// Validation and conversions
// ---------------------------------------------------------------------------

/// Converts a parsed expression into a decorated tree, validating the
/// invariants: leaf indices used exactly once and covering `1..=r`, gluing
/// pairs within the subexpression color, decoration degrees matching.
pub fn expr_to_raw(e: &Expr) -> Result<RawTree, ExprError> {
    fn rec(e: &Expr) -> Result<RawTree, ExprError> {
        match e {
            Expr::Leaf { index, color } => {
                if *index == 0 {
                    return Err(ExprError::Validation(
                        "leaf indices are 1-based; x0 is not a leaf".into(),
                    ));
                }
                Ok(RawTree::leaf(*index, *color))
            }
            Expr::Xi { i, j, inner } => {
                let child = rec(inner)?;
                let color = child.output_color();
                if *i == 0 || i >= j || *j > color {
                    return Err(ExprError::Validation(format!(
                        "gluing pair ({i},{j}) requires 1 <= i < j <= {color} (the subexpression color)"
                    )));
                }
                Ok(RawTree::gluing(*i, *j, child)?)
            }
            Expr::Merge { left, right } => {
                let l = rec(left)?;
                let r = rec(right)?;
                Ok(RawTree::merger_ordered(l, r))
            }
            Expr::PermApp { images, inner } => {
                let child = rec(inner)?;
                let color = child.output_color();
                if images.len() != color {
                    return Err(ExprError::Validation(format!(
                        "permutation degree {} does not match the subexpression color {color}",
                        images.len()
                    )));
                }
                let perm = Perm::from_images(images.clone())
                    .map_err(|e| ExprError::Validation(format!("invalid permutation: {e}")))?;
                Ok(child.decorate(&perm)?)
            }
        }
    }
    let raw = rec(e)?;
    // Leaf labeling: indices 1..=r, each exactly once.
    fn leaves(raw: &RawTree, out: &mut Vec<usize>) {
        match &raw.node {
            crate::trees::RawNode::Leaf { index, .. } => out.push(*index),
            crate::trees::RawNode::Gluing { child, .. } => leaves(child, out),
            crate::trees::RawNode::Merger { left, right } => {
                leaves(left, out);
                leaves(right, out);
            }
        }
    }
    let mut indices = Vec::new();
    leaves(&raw, &mut indices);
    let mut sorted = indices.clone();
    sorted.sort_unstable();
    if sorted != (1..=indices.len()).collect::<Vec<_>>() {
        return Err(ExprError::Validation(format!(
            "leaf indices must be exactly 1..={}, saw {indices:?}",
            indices.len()
        )));
    }
    Ok(raw)
}

/// Canonical expression of an element: the pure tree wrapped in its root
/// permutation when nontrivial.
pub fn element_to_expr(e: &Element) -> Expr {
    fn tree(t: &PureTree) -> Expr {
        match t {
            PureTree::Leaf { index, color } => Expr::Leaf {
                index: *index,
                color: *color,
            },
            PureTree::Gluing { i, j, child } => Expr::Xi {
                i: *i,
                j: *j,
                inner: Box::new(tree(child)),
            },
            PureTree::Merger { left, right } => Expr::Merge {
                left: Box::new(tree(left)),
                right: Box::new(tree(right)),
            },
        }
    }
    let t = tree(&e.tree);
    if e.sigma.is_identity() {
        t
    } else {
        Expr::PermApp {
            images: e.sigma.images().to_vec(),
            inner: Box::new(t),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_examples() {
        assert_eq!(
            parse("xi[1,2](x1:4)").unwrap(),
            Expr::Xi {
                i: 1,
                j: 2,
                inner: Box::new(Expr::Leaf { index: 1, color: 4 })
            }
        );
        assert_eq!(
            parse("m(x1:2, xi[1,2](x2:4))").unwrap(),
            Expr::Merge {
                left: Box::new(Expr::Leaf { index: 1, color: 2 }),
                right: Box::new(Expr::Xi {
                    i: 1,
                    j: 2,
                    inner: Box::new(Expr::Leaf { index: 2, color: 4 })
                })
            }
        );
        assert_eq!(
            parse("  p[2 1] ( x1:2 )").unwrap(),
            Expr::PermApp {
                images: vec![2, 1],
                inner: Box::new(Expr::Leaf { index: 1, color: 2 })
            }
        );
    }

    #[test]
    fn parse_errors_carry_offsets() {
        let err = parse("xi[1,2](x1:4").unwrap_err();
        assert!(matches!(err, ExprError::Syntax { offset: 12, .. }), "{err}");
        let err = parse("q(x1:1)").unwrap_err();
        assert!(matches!(err, ExprError::Syntax { offset: 0, .. }));
        assert!(parse("x1:1 x2:1").is_err());
    }

    #[test]
    fn validation_errors() {
        let e = parse("xi[3,2](x1:4)").unwrap();
        assert!(matches!(expr_to_raw(&e), Err(ExprError::Validation(_))));
        let e = parse("xi[1,5](x1:4)").unwrap();
        assert!(matches!(expr_to_raw(&e), Err(ExprError::Validation(_))));
        let e = parse("p[2 1](x1:3)").unwrap();
        assert!(matches!(expr_to_raw(&e), Err(ExprError::Validation(_))));
        let e = parse("m(x1:1, x1:1)").unwrap();
        assert!(matches!(expr_to_raw(&e), Err(ExprError::Validation(_))));
        let e = parse("m(x1:1, x3:1)").unwrap();
        assert!(matches!(expr_to_raw(&e), Err(ExprError::Validation(_))));
    }

    #[test]
    fn print_roundtrip() {
        for text in [
            "xi[1,2](x1:4)",
            "m(x1:2, xi[1,2](x2:4))",
            "p[2 1](m(x2:1, x1:1))",
            "xi[1,2](xi[3,4](x1:6))",
        ] {
            let e = parse(text).unwrap();
            assert_eq!(parse(&print(&e)).unwrap(), e);
        }
    }

    #[test]
    fn element_roundtrip_through_text() {
        use crate::normalform::{normalize, Mode};
        use crate::trees::purify;
        let e = parse("p[2 1](m(x2:1, x1:1))").unwrap();
        let el = purify(&expr_to_raw(&e).unwrap()).unwrap();
        let text = print(&element_to_expr(&el));
        let el2 = purify(&expr_to_raw(&parse(&text).unwrap()).unwrap()).unwrap();
        assert_eq!(el, el2);
        assert_eq!(
            normalize(&el, Mode::Even).unwrap(),
            normalize(&el2, Mode::Even).unwrap()
        );
    }
}
