//! Pointwise symmetry analysis of a law: assembly of the linear systems for
//! left-invariant coefficient vectors, their holonomic restriction, and the
//! sampled solver that extracts the solution spaces at a body point.

use nalgebra::{DMatrix, DVector};

use crate::dsl::{evaluate, LawExpr};
use crate::error::{Error, Result};
use crate::jet::{compose, Jet, TangentJet};
use crate::numerics::{self, column_space, nullspace, Subspace};
use crate::rng::Rng;
use crate::tensor::Tensor3;

/// Column layout of the unknown coefficient vector in the full system:
/// `[theta (n) | thetaA (n^2, (l,i)) | thetaB (n^2) | thetaC (n^3, (l,i,k))]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CoefficientVector {
    pub n: usize,
}

impl CoefficientVector {
    pub fn new(n: usize) -> Self {
        CoefficientVector { n }
    }

    pub fn len(&self) -> usize {
        let n = self.n;
        n + 2 * n * n + n * n * n
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn theta(&self, i: usize) -> usize {
        i
    }

    pub fn a(&self, l: usize, i: usize) -> usize {
        self.n + l * self.n + i
    }

    pub fn b(&self, l: usize, i: usize) -> usize {
        self.n + self.n * self.n + l * self.n + i
    }

    pub fn c(&self, l: usize, i: usize, k: usize) -> usize {
        self.n + 2 * self.n * self.n + Tensor3::flat(self.n, l, i, k)
    }
}

/// Column layout of the holonomic unknowns:
/// `[theta (n) | D (n^2, (l,i)) | S (n * n(n+1)/2, (l, {i,k}) with i <= k)]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct HolonomicCoefficientVector {
    pub n: usize,
}

impl HolonomicCoefficientVector {
    pub fn new(n: usize) -> Self {
        HolonomicCoefficientVector { n }
    }

    pub fn sym_count(&self) -> usize {
        self.n * (self.n + 1) / 2
    }

    pub fn len(&self) -> usize {
        let n = self.n;
        n + n * n + n * self.sym_count()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn theta(&self, i: usize) -> usize {
        i
    }

    pub fn d(&self, l: usize, i: usize) -> usize {
        self.n + l * self.n + i
    }

    /// Index of the symmetric pair {i, k}; arguments in either order.
    pub fn s(&self, l: usize, i: usize, k: usize) -> usize {
        let (i, k) = if i <= k { (i, k) } else { (k, i) };
        let pair = i * self.n - i * (i + 1) / 2 + k;
        self.n + self.n * self.n + l * self.sym_count() + pair
    }
}

/// The p x q matrix taking a holonomic coefficient vector to the full one:
/// theta passes through, D feeds both thetaA and thetaB, S feeds thetaC
/// symmetrically.
pub fn embedding_matrix(n: usize) -> DMatrix<f64> {
    let full = CoefficientVector::new(n);
    let hol = HolonomicCoefficientVector::new(n);
    let mut e = DMatrix::zeros(full.len(), hol.len());
    for i in 0..n {
        e[(full.theta(i), hol.theta(i))] = 1.0;
    }
    for l in 0..n {
        for i in 0..n {
            e[(full.a(l, i), hol.d(l, i))] = 1.0;
            e[(full.b(l, i), hol.d(l, i))] = 1.0;
        }
    }
    for l in 0..n {
        for i in 0..n {
            for k in 0..n {
                e[(full.c(l, i, k), hol.s(l, i, k))] = 1.0;
            }
        }
    }
    e
}

fn check_source(expected: &DVector<f64>, g: &Jet) -> Result<()> {
    if (expected - &g.x).amax() > crate::jet::TOL_MATCH {
        return Err(Error::SourceMismatch {
            expected: expected.iter().copied().collect(),
            found: g.x.iter().copied().collect(),
        });
    }
    Ok(())
}

/// Rows of the invariance system at the given jets, all sourced at `x`.
/// One row per jet and law component; columns follow [`CoefficientVector`].
pub fn assemble_nonholonomic(
    law: &LawExpr,
    x: &DVector<f64>,
    jets: &[Jet],
) -> Result<DMatrix<f64>> {
    let n = law.n;
    let d = law.out_dim();
    let cols = CoefficientVector::new(n);
    let mut m = DMatrix::zeros(jets.len() * d, cols.len());
    for (gi, g) in jets.iter().enumerate() {
        check_source(x, g)?;
        let ev = evaluate(law, g)?;
        for a in 0..d {
            let row = gi * d + a;
            for i in 0..n {
                m[(row, cols.theta(i))] = -ev.d_x(a, i);
            }
            for l in 0..n {
                for i in 0..n {
                    let mut va = 0.0;
                    let mut vb = 0.0;
                    for j in 0..n {
                        va += g.a[(j, l)] * ev.d_a(a, j, i);
                        vb += g.b[(j, l)] * ev.d_b(a, j, i);
                        for k in 0..n {
                            va += g.c[(j, l, k)] * ev.d_c(a, j, i, k);
                            vb += g.c[(j, k, l)] * ev.d_c(a, j, k, i);
                        }
                    }
                    m[(row, cols.a(l, i))] = va;
                    m[(row, cols.b(l, i))] = vb;
                }
            }
            for l in 0..n {
                for i in 0..n {
                    for k in 0..n {
                        let mut v = 0.0;
                        for j in 0..n {
                            v += g.a[(j, l)] * ev.d_c(a, j, i, k);
                        }
                        m[(row, cols.c(l, i, k))] = v;
                    }
                }
            }
        }
    }
    Ok(m)
}

/// Rows of the invariance system restricted to the holonomic subgroupoid;
/// columns follow [`HolonomicCoefficientVector`]. Equals the full system
/// multiplied by [`embedding_matrix`] at holonomic jets.
pub fn assemble_holonomic(law: &LawExpr, x: &DVector<f64>, jets: &[Jet]) -> Result<DMatrix<f64>> {
    let n = law.n;
    let full = assemble_nonholonomic(law, x, jets)?;
    Ok(full * embedding_matrix(n))
}

/// Draw a jet from `x` to a random nearby target; the square blocks are
/// perturbed identities resampled until safely invertible.
pub fn sample_jet_at(x: &DVector<f64>, rng: &mut Rng) -> Jet {
    let n = x.len();
    let y = DVector::from_fn(n, |i, _| x[i] + rng.unit());
    let block = |rng: &mut Rng| loop {
        let m = DMatrix::from_fn(n, n, |j, i| {
            let base = if j == i { 1.0 } else { 0.0 };
            base + 0.3 * rng.unit()
        });
        let sv = m.singular_values();
        if sv.min() >= 0.1 {
            return m;
        }
    };
    let a = block(rng);
    let b = block(rng);
    let mut c = Tensor3::zeros(n);
    for v in c.as_mut_slice() {
        *v = rng.unit();
    }
    Jet {
        x: x.clone(),
        y,
        a,
        b,
        c,
    }
}

/// Like [`sample_jet_at`] but restricted to the holonomic subgroupoid:
/// equal square blocks and a symmetric second-order block.
pub fn sample_holonomic_jet_at(x: &DVector<f64>, rng: &mut Rng) -> Jet {
    let mut g = sample_jet_at(x, rng);
    let n = g.dim();
    g.b = g.a.clone();
    for j in 0..n {
        for i in 0..n {
            for k in (i + 1)..n {
                let v = g.c[(j, i, k)];
                g.c[(j, k, i)] = v;
            }
        }
    }
    g
}

/// Tuning knobs of the sampled pointwise solver.
#[derive(Debug, Clone, Copy)]
pub struct SolverConfig {
    pub seed: u64,
    /// Relative singular-value cutoff for rank decisions.
    pub rel_tol: f64,
    /// Target row count per batch, as a multiple of the unknown count.
    pub rows_per_unknown: usize,
    pub max_batches: usize,
    /// Consecutive batches with unchanged nullspace dimension required to
    /// declare the rank saturated.
    pub stable_batches: usize,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            seed: 0,
            rel_tol: numerics::DEFAULT_REL_TOL,
            rows_per_unknown: 4,
            max_batches: 20,
            stable_batches: 3,
        }
    }
}

/// Solution spaces of the invariance systems at one body point.
#[derive(Debug, Clone)]
pub struct DistributionSample {
    pub point: DVector<f64>,
    /// Nullspace of the full system, ambient dim n + 2n^2 + n^3.
    pub null_nh: Subspace,
    /// Nullspace of the holonomic system, ambient dim n + n^2 + n*n(n+1)/2.
    pub null_h: Subspace,
    /// theta components reachable by full solutions, ambient dim n.
    pub base_nh: Subspace,
    /// theta components reachable by holonomic solutions.
    pub base_h: Subspace,
    pub sample_count: usize,
    pub rank_saturated: bool,
}

fn base_projection(null: &Subspace, n: usize, rel_tol: f64) -> Subspace {
    let theta_rows = null.basis.rows(0, n).into_owned();
    column_space(&theta_rows, rel_tol)
}

/// Solve both invariance systems at `x` by accumulating batches of random
/// jets until the nullspace dimension stops changing.
pub fn solve_point(law: &LawExpr, x: &DVector<f64>, config: &SolverConfig) -> Result<DistributionSample> {
    let n = law.n;
    let d = law.out_dim();
    let p = CoefficientVector::new(n).len();
    let jets_per_batch = (config.rows_per_unknown * p).div_ceil(d).max(1);
    let mut rng = Rng::new(config.seed);

    let mut rows_nh: Vec<DMatrix<f64>> = Vec::new();
    let mut rows_h: Vec<DMatrix<f64>> = Vec::new();
    let mut last_dims: Option<(usize, usize)> = None;
    let mut stable = 0usize;
    let mut sample_count = 0usize;
    let mut saturated = false;
    let mut null_nh = None;
    let mut null_h = None;

    let e = embedding_matrix(n);
    for _ in 0..config.max_batches {
        let jets: Vec<Jet> = (0..jets_per_batch).map(|_| sample_jet_at(x, &mut rng)).collect();
        sample_count += jets.len();
        let batch = assemble_nonholonomic(law, x, &jets)?;
        rows_h.push(&batch * &e);
        rows_nh.push(batch);

        let a_nh = stack_rows(&rows_nh);
        let a_h = stack_rows(&rows_h);
        let ns_nh = nullspace(&a_nh, config.rel_tol);
        let ns_h = nullspace(&a_h, config.rel_tol);
        let dims = (ns_nh.dim(), ns_h.dim());
        if last_dims == Some(dims) {
            stable += 1;
        } else {
            stable = 1;
        }
        last_dims = Some(dims);
        null_nh = Some(ns_nh);
        null_h = Some(ns_h);
        if stable >= config.stable_batches {
            saturated = true;
            break;
        }
    }

    let null_nh = null_nh.expect("at least one batch");
    let null_h = null_h.expect("at least one batch");
    let base_nh = base_projection(&null_nh, n, config.rel_tol);
    let base_h = base_projection(&null_h, n, config.rel_tol);
    Ok(DistributionSample {
        point: x.clone(),
        null_nh,
        null_h,
        base_nh,
        base_h,
        sample_count,
        rank_saturated: saturated,
    })
}

fn stack_rows(parts: &[DMatrix<f64>]) -> DMatrix<f64> {
    let cols = parts[0].ncols();
    let rows = parts.iter().map(|m| m.nrows()).sum();
    let mut out = DMatrix::zeros(rows, cols);
    let mut at = 0;
    for m in parts {
        out.view_mut((at, 0), (m.nrows(), cols)).copy_from(m);
        at += m.nrows();
    }
    out
}

/// Left-invariant field value at `g` for a coefficient vector `v` in
/// [`CoefficientVector`] layout; the target coordinate does not move.
pub fn admissible_field_at(g: &Jet, v: &DVector<f64>) -> TangentJet {
    let n = g.dim();
    let cols = CoefficientVector::new(n);
    assert_eq!(v.len(), cols.len());
    let dx = DVector::from_fn(n, |i, _| v[cols.theta(i)]);
    let da = DMatrix::from_fn(n, n, |j, i| {
        (0..n).map(|l| g.a[(j, l)] * v[cols.a(l, i)]).sum()
    });
    let db = DMatrix::from_fn(n, n, |j, i| {
        (0..n).map(|l| g.b[(j, l)] * v[cols.b(l, i)]).sum()
    });
    let dc = Tensor3::from_fn(n, |j, i, k| {
        let mut s = 0.0;
        for l in 0..n {
            s += g.c[(j, l, k)] * v[cols.a(l, i)];
            s += g.c[(j, i, l)] * v[cols.b(l, k)];
            s += g.a[(j, l)] * v[cols.c(l, i, k)];
        }
        s
    });
    TangentJet {
        base: g.clone(),
        dx,
        dy: DVector::zeros(n),
        da,
        db,
        dc,
    }
}

/// Directional derivative of the law at the base of `t` along `t`, one value
/// per component.
pub fn directional_derivative(law: &LawExpr, t: &TangentJet) -> Result<Vec<f64>> {
    let n = law.n;
    let ev = evaluate(law, &t.base)?;
    let mut out = Vec::with_capacity(law.out_dim());
    for a in 0..law.out_dim() {
        let mut s = 0.0;
        for i in 0..n {
            s += ev.d_x(a, i) * t.dx[i];
            s += ev.d_y(a, i) * t.dy[i];
        }
        for j in 0..n {
            for i in 0..n {
                s += ev.d_a(a, j, i) * t.da[(j, i)];
                s += ev.d_b(a, j, i) * t.db[(j, i)];
                for k in 0..n {
                    s += ev.d_c(a, j, i, k) * t.dc[(j, i, k)];
                }
            }
        }
        out.push(s);
    }
    Ok(out)
}

/// Probe whether `g` is a material isomorphism for the law: W(f . g) must
/// agree with W(f) for random jets f sourced at the target of `g`. Returns
/// the verdict and the largest relative deviation seen.
pub fn is_material_isomorphism(
    law: &LawExpr,
    g: &Jet,
    probes: usize,
    seed: u64,
    tol: f64,
) -> Result<(bool, f64)> {
    let mut rng = Rng::new(seed);
    let mut worst: f64 = 0.0;
    for _ in 0..probes {
        let f = sample_jet_at(&g.y, &mut rng);
        let moved = compose(&f, g)?;
        let w_f = evaluate(law, &f)?.value;
        let w_moved = evaluate(law, &moved)?.value;
        let mut scale: f64 = 1.0;
        for v in &w_f {
            scale = scale.max(v.abs());
        }
        for (u, v) in w_moved.iter().zip(&w_f) {
            worst = worst.max((u - v).abs() / scale);
        }
    }
    Ok((worst <= tol, worst))
}
