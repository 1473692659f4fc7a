//! Forward-mode evaluation of laws with exact first derivatives.
//!
//! Each scalar is carried as a dual number with one derivative slot per jet
//! coordinate, so a single AST walk yields the value and the full gradient
//! with no truncation error beyond floating point.

use super::{BinOp, Expr, Func, LawExpr};
use crate::error::{Error, Result};
use crate::jet::Jet;
use crate::tensor::Tensor3;

/// Flattened layout of the jet coordinates:
/// `[x (n) | y (n) | yA (n^2, row-major) | yB (n^2) | yC (n^3, (j,i,k))]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CoordLayout {
    pub n: usize,
}

impl CoordLayout {
    pub fn new(n: usize) -> Self {
        CoordLayout { n }
    }

    pub fn total(&self) -> usize {
        let n = self.n;
        2 * n + 2 * n * n + n * n * n
    }

    pub fn x(&self, i: usize) -> usize {
        i
    }

    pub fn y(&self, j: usize) -> usize {
        self.n + j
    }

    pub fn a(&self, j: usize, i: usize) -> usize {
        2 * self.n + j * self.n + i
    }

    pub fn b(&self, j: usize, i: usize) -> usize {
        2 * self.n + self.n * self.n + j * self.n + i
    }

    pub fn c(&self, j: usize, i: usize, k: usize) -> usize {
        2 * self.n + 2 * self.n * self.n + Tensor3::flat(self.n, j, i, k)
    }

    pub fn pack(&self, g: &Jet) -> Vec<f64> {
        let n = self.n;
        let mut out = Vec::with_capacity(self.total());
        out.extend(g.x.iter());
        out.extend(g.y.iter());
        for j in 0..n {
            for i in 0..n {
                out.push(g.a[(j, i)]);
            }
        }
        for j in 0..n {
            for i in 0..n {
                out.push(g.b[(j, i)]);
            }
        }
        out.extend(g.c.as_slice());
        out
    }
}

/// W(g) together with the gradient of every component with respect to every
/// jet coordinate, in [`CoordLayout`] order.
#[derive(Debug, Clone)]
pub struct LawEvaluation {
    pub layout: CoordLayout,
    pub value: Vec<f64>,
    grads: Vec<Vec<f64>>,
}

impl LawEvaluation {
    pub fn out_dim(&self) -> usize {
        self.value.len()
    }

    pub fn gradient(&self, component: usize) -> &[f64] {
        &self.grads[component]
    }

    pub fn d_x(&self, a: usize, i: usize) -> f64 {
        self.grads[a][self.layout.x(i)]
    }

    pub fn d_y(&self, a: usize, j: usize) -> f64 {
        self.grads[a][self.layout.y(j)]
    }

    pub fn d_a(&self, a: usize, j: usize, i: usize) -> f64 {
        self.grads[a][self.layout.a(j, i)]
    }

    pub fn d_b(&self, a: usize, j: usize, i: usize) -> f64 {
        self.grads[a][self.layout.b(j, i)]
    }

    pub fn d_c(&self, a: usize, j: usize, i: usize, k: usize) -> f64 {
        self.grads[a][self.layout.c(j, i, k)]
    }

    /// Frobenius norm of the full derivative, all components and blocks.
    pub fn grad_norm(&self) -> f64 {
        self.grads
            .iter()
            .flat_map(|g| g.iter())
            .map(|v| v * v)
            .sum::<f64>()
            .sqrt()
    }
}

struct Dual {
    v: f64,
    g: Vec<f64>,
}

impl Dual {
    fn constant(v: f64, dims: usize) -> Dual {
        Dual {
            v,
            g: vec![0.0; dims],
        }
    }

    fn variable(v: f64, slot: usize, dims: usize) -> Dual {
        let mut g = vec![0.0; dims];
        g[slot] = 1.0;
        Dual { v, g }
    }

    fn lift(mut self, f: f64, df: f64) -> Dual {
        for gi in &mut self.g {
            *gi *= df;
        }
        Dual { v: f, g: self.g }
    }
}

fn domain_error(e: &Expr, reason: impl Into<String>) -> Error {
    Error::Domain {
        expr: super::print_law(&LawExpr {
            n: 0,
            components: vec![e.clone()],
        }),
        reason: reason.into(),
    }
}

fn eval_expr(e: &Expr, coords: &[f64], layout: &CoordLayout) -> Result<Dual> {
    let dims = layout.total();
    match e {
        Expr::Num(v) => Ok(Dual::constant(*v, dims)),
        Expr::Var(var) => {
            let slot = match *var {
                super::Var::X(i) => layout.x(i),
                super::Var::Y(j) => layout.y(j),
                super::Var::A(j, i) => layout.a(j, i),
                super::Var::B(j, i) => layout.b(j, i),
                super::Var::C(j, i, k) => layout.c(j, i, k),
            };
            Ok(Dual::variable(coords[slot], slot, dims))
        }
        Expr::Neg(inner) => {
            let mut d = eval_expr(inner, coords, layout)?;
            d.v = -d.v;
            for gi in &mut d.g {
                *gi = -*gi;
            }
            Ok(d)
        }
        Expr::Bin(op, l, r) => {
            let a = eval_expr(l, coords, layout)?;
            let b = eval_expr(r, coords, layout)?;
            match op {
                BinOp::Add => {
                    let mut g = a.g;
                    for (gi, bi) in g.iter_mut().zip(&b.g) {
                        *gi += bi;
                    }
                    Ok(Dual { v: a.v + b.v, g })
                }
                BinOp::Sub => {
                    let mut g = a.g;
                    for (gi, bi) in g.iter_mut().zip(&b.g) {
                        *gi -= bi;
                    }
                    Ok(Dual { v: a.v - b.v, g })
                }
                BinOp::Mul => {
                    let mut g = a.g;
                    for (gi, bi) in g.iter_mut().zip(&b.g) {
                        *gi = *gi * b.v + a.v * bi;
                    }
                    Ok(Dual { v: a.v * b.v, g })
                }
                BinOp::Div => {
                    if b.v == 0.0 {
                        return Err(domain_error(e, "division by zero"));
                    }
                    let mut g = a.g;
                    let inv = 1.0 / b.v;
                    for (gi, bi) in g.iter_mut().zip(&b.g) {
                        *gi = (*gi - a.v * inv * bi) * inv;
                    }
                    Ok(Dual { v: a.v * inv, g })
                }
                BinOp::Pow => {
                    let exp_is_const = b.g.iter().all(|v| *v == 0.0);
                    if exp_is_const && b.v.fract() == 0.0 && b.v.abs() < 1e9 {
                        let k = b.v as i32;
                        if a.v == 0.0 && k < 0 {
                            return Err(domain_error(e, "zero raised to a negative power"));
                        }
                        let f = a.v.powi(k);
                        let df = if k == 0 { 0.0 } else { k as f64 * a.v.powi(k - 1) };
                        Ok(a.lift(f, df))
                    } else {
                        if a.v <= 0.0 {
                            return Err(domain_error(
                                e,
                                "non-integer power of a non-positive base",
                            ));
                        }
                        let f = a.v.powf(b.v);
                        let mut g = a.g;
                        let da = b.v * a.v.powf(b.v - 1.0);
                        let db = f * a.v.ln();
                        for (gi, bi) in g.iter_mut().zip(&b.g) {
                            *gi = *gi * da + bi * db;
                        }
                        Ok(Dual { v: f, g })
                    }
                }
            }
        }
        Expr::Call(f, arg) => {
            let a = eval_expr(arg, coords, layout)?;
            match f {
                Func::Exp => {
                    let v = a.v.exp();
                    Ok(a.lift(v, v))
                }
                Func::Log => {
                    if a.v <= 0.0 {
                        return Err(domain_error(e, "log of a non-positive value"));
                    }
                    let inv = 1.0 / a.v;
                    let v = a.v.ln();
                    Ok(a.lift(v, inv))
                }
                Func::Sin => {
                    let (s, c) = a.v.sin_cos();
                    Ok(a.lift(s, c))
                }
                Func::Cos => {
                    let (s, c) = a.v.sin_cos();
                    Ok(a.lift(c, -s))
                }
                Func::Sqrt => {
                    if a.v < 0.0 {
                        return Err(domain_error(e, "sqrt of a negative value"));
                    }
                    if a.v == 0.0 {
                        return Err(domain_error(e, "sqrt derivative singular at zero"));
                    }
                    let v = a.v.sqrt();
                    Ok(a.lift(v, 0.5 / v))
                }
            }
        }
    }
}

/// Evaluate W at a jet: value plus exact forward-mode first derivatives.
pub fn evaluate(law: &LawExpr, g: &Jet) -> Result<LawEvaluation> {
    assert_eq!(
        law.n,
        g.dim(),
        "law dimension does not match jet dimension"
    );
    let layout = CoordLayout::new(law.n);
    let coords = layout.pack(g);
    let mut value = Vec::with_capacity(law.out_dim());
    let mut grads = Vec::with_capacity(law.out_dim());
    for comp in &law.components {
        let d = eval_expr(comp, &coords, &layout)?;
        value.push(d.v);
        grads.push(d.g);
    }
    Ok(LawEvaluation {
        layout,
        value,
        grads,
    })
}
