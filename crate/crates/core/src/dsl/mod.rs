//! Textual constitutive laws.
//!
//! A law is a `;`-separated list of scalar expressions over the jet
//! coordinates `x[i]`, `y[j]`, `yA[j][i]`, `yB[j][i]`, `yC[j][i][k]`
//! (1-based indices), evaluated with exact forward-mode derivatives.

mod eval;
mod parser;

pub use eval::{evaluate, CoordLayout, LawEvaluation};
pub use parser::parse_components;

use crate::error::{Error, Result};

/// Jet coordinate reference with zero-based indices.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Var {
    X(usize),
    Y(usize),
    A(usize, usize),
    B(usize, usize),
    C(usize, usize, usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
    Pow,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Func {
    Exp,
    Log,
    Sin,
    Cos,
    Sqrt,
}

impl Func {
    pub fn name(self) -> &'static str {
        match self {
            Func::Exp => "exp",
            Func::Log => "log",
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Sqrt => "sqrt",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Num(f64),
    Var(Var),
    Neg(Box<Expr>),
    Bin(BinOp, Box<Expr>, Box<Expr>),
    Call(Func, Box<Expr>),
}

/// A parsed law W with `d` output components over dimension `n`.
#[derive(Debug, Clone, PartialEq)]
pub struct LawExpr {
    pub n: usize,
    pub components: Vec<Expr>,
}

impl LawExpr {
    pub fn out_dim(&self) -> usize {
        self.components.len()
    }
}

/// Parse a law and check the component count against the expected `d`.
pub fn parse_law(text: &str, n: usize, d: usize) -> Result<LawExpr> {
    let law = parse_components(text, n)?;
    if law.out_dim() != d {
        return Err(Error::Parse {
            line: 1,
            col: 1,
            message: format!("expected {d} components, found {}", law.out_dim()),
        });
    }
    Ok(law)
}

// Precedence levels for printing: + - at 1, * / at 2, ^ at 3, unary at 4.
fn precedence(e: &Expr) -> u8 {
    match e {
        Expr::Bin(BinOp::Add | BinOp::Sub, ..) => 1,
        Expr::Bin(BinOp::Mul | BinOp::Div, ..) => 2,
        Expr::Bin(BinOp::Pow, ..) => 3,
        Expr::Neg(_) => 4,
        Expr::Num(v) if *v < 0.0 => 4,
        _ => 5,
    }
}

fn write_expr(out: &mut String, e: &Expr, min_prec: u8) {
    let p = precedence(e);
    let need_parens = p < min_prec;
    if need_parens {
        out.push('(');
    }
    match e {
        Expr::Num(v) => out.push_str(&format!("{v:?}")),
        Expr::Var(v) => match *v {
            Var::X(i) => out.push_str(&format!("x[{}]", i + 1)),
            Var::Y(j) => out.push_str(&format!("y[{}]", j + 1)),
            Var::A(j, i) => out.push_str(&format!("yA[{}][{}]", j + 1, i + 1)),
            Var::B(j, i) => out.push_str(&format!("yB[{}][{}]", j + 1, i + 1)),
            Var::C(j, i, k) => out.push_str(&format!("yC[{}][{}][{}]", j + 1, i + 1, k + 1)),
        },
        Expr::Neg(inner) => {
            out.push('-');
            write_expr(out, inner, 4);
        }
        Expr::Bin(op, l, r) => {
            let (sym, lp, rp) = match op {
                BinOp::Add => (" + ", 1, 2),
                BinOp::Sub => (" - ", 1, 2),
                BinOp::Mul => (" * ", 2, 3),
                BinOp::Div => (" / ", 2, 3),
                // right-associative; the base must bind at unary level
                BinOp::Pow => ("^", 4, 3),
            };
            write_expr(out, l, lp);
            out.push_str(sym);
            write_expr(out, r, rp);
        }
        Expr::Call(f, arg) => {
            out.push_str(f.name());
            out.push('(');
            write_expr(out, arg, 0);
            out.push(')');
        }
    }
    if need_parens {
        out.push(')');
    }
}

/// Render a law back to source text; `parse` of the result is the identity
/// on ASTs.
pub fn print_law(law: &LawExpr) -> String {
    let mut out = String::new();
    for (i, c) in law.components.iter().enumerate() {
        if i > 0 {
            out.push_str(" ; ");
        }
        write_expr(&mut out, c, 0);
    }
    out
}

/// Named synthetic laws used throughout the test and acceptance suites.
pub fn catalog(name: &str, n: usize) -> Result<LawExpr> {
    let mut parts: Vec<String> = Vec::new();
    match name {
        "uniform_frame" => {
            for j in 1..=n {
                for i in 1..=n {
                    parts.push(format!("yA[{j}][{i}]"));
                }
            }
        }
        "fgm_axis" => {
            parts.push(format!("x[{n}]"));
            for j in 1..=n {
                for i in 1..=n {
                    parts.push(format!("yA[{j}][{i}]"));
                }
            }
        }
        "strict_cosserat" => {
            for j in 1..=n {
                for i in 1..=n {
                    parts.push(format!("yA[{j}][{i}] - yB[{j}][{i}]"));
                }
            }
        }
        "prolonged" => {
            for j in 1..=n {
                for i in 1..=n {
                    parts.push(format!("yA[{j}][{i}] - yB[{j}][{i}]"));
                }
            }
            for j in 1..=n {
                for i in 1..=n {
                    for k in 1..=n {
                        parts.push(format!("yC[{j}][{i}][{k}] - yC[{j}][{k}][{i}]"));
                    }
                }
            }
        }
        other => return Err(Error::UnknownLaw(other.to_string())),
    }
    parse_components(&parts.join(" ; "), n)
}

/// Catalog names accepted by [`catalog`].
pub const CATALOG_NAMES: [&str; 4] = ["uniform_frame", "fgm_axis", "strict_cosserat", "prolonged"];
