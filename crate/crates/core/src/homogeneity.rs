//! Polynomial collocation for the homogeneity equation: solve for a matrix
//! of polynomials P^l_i(x, y), grade the residual, build the induced section
//! of jets, and test the same question leaf by leaf.

use nalgebra::{DMatrix, DVector};

use crate::dsl::{evaluate, LawExpr};
use crate::error::Result;
use crate::field::BodyGrid;
use crate::foliation::LeafLabeling;
use crate::jet::Jet;
use crate::material::{is_material_isomorphism, sample_jet_at};
use crate::numerics::least_squares;
use crate::rng::Rng;
use crate::tensor::Tensor3;

/// Monomial exponents over the 2n variables (x_1..x_n, y_1..y_n).
type Mono = Vec<u32>;

fn monomials(vars: usize, degree: u32) -> Vec<Mono> {
    fn rec(vars: usize, budget: u32, prefix: &mut Mono, out: &mut Vec<Mono>) {
        if prefix.len() == vars {
            out.push(prefix.clone());
            return;
        }
        for e in 0..=budget {
            prefix.push(e);
            rec(vars, budget - e, prefix, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    rec(vars, degree, &mut Vec::new(), &mut out);
    out.sort();
    out
}

fn mono_eval(m: &Mono, vals: &[f64]) -> f64 {
    m.iter()
        .zip(vals)
        .map(|(e, v)| v.powi(*e as i32))
        .product()
}

/// d(mono)/d(var v).
fn mono_d1(m: &Mono, vals: &[f64], v: usize) -> f64 {
    if m[v] == 0 {
        return 0.0;
    }
    let mut e = m.clone();
    e[v] -= 1;
    m[v] as f64 * mono_eval(&e, vals)
}

/// d2(mono)/d(var v)d(var w).
fn mono_d2(m: &Mono, vals: &[f64], v: usize, w: usize) -> f64 {
    if m[v] == 0 {
        return 0.0;
    }
    let mut e = m.clone();
    e[v] -= 1;
    let factor = m[v] as f64;
    factor * mono_d1(&e, vals, w)
}

/// Matrix of polynomials P^l_i in (x, y), stored as one coefficient per
/// (l, i, monomial) triple.
#[derive(Debug, Clone)]
pub struct HomogeneityAnsatz {
    pub n: usize,
    pub degree: u32,
    pub monos: Vec<Mono>,
    /// Coefficients in (l, i, monomial) order; length n * n * monos.len().
    pub coeffs: DVector<f64>,
}

impl HomogeneityAnsatz {
    pub fn zero(n: usize, degree: u32) -> Self {
        let monos = monomials(2 * n, degree);
        let count = n * n * monos.len();
        HomogeneityAnsatz {
            n,
            degree,
            monos,
            coeffs: DVector::zeros(count),
        }
    }

    pub fn coeff_count(&self) -> usize {
        self.n * self.n * self.monos.len()
    }

    pub fn slot(&self, l: usize, i: usize, mono: usize) -> usize {
        (l * self.n + i) * self.monos.len() + mono
    }

    fn vals(&self, x: &DVector<f64>, y: &DVector<f64>) -> Vec<f64> {
        x.iter().chain(y.iter()).copied().collect()
    }

    pub fn eval(&self, x: &DVector<f64>, y: &DVector<f64>) -> DMatrix<f64> {
        let vals = self.vals(x, y);
        DMatrix::from_fn(self.n, self.n, |l, i| {
            self.monos
                .iter()
                .enumerate()
                .map(|(t, m)| self.coeffs[self.slot(l, i, t)] * mono_eval(m, &vals))
                .sum()
        })
    }

    /// dP^l_i/dx^k (axis = k) or /dy^k (axis = n + k).
    pub fn d1(&self, x: &DVector<f64>, y: &DVector<f64>, l: usize, i: usize, axis: usize) -> f64 {
        let vals = self.vals(x, y);
        self.monos
            .iter()
            .enumerate()
            .map(|(t, m)| self.coeffs[self.slot(l, i, t)] * mono_d1(m, &vals, axis))
            .sum()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HomogeneityVerdict {
    Homogeneous,
    NotHomogeneousAtDegree,
    Inconclusive,
}

impl HomogeneityVerdict {
    pub fn as_str(self) -> &'static str {
        match self {
            HomogeneityVerdict::Homogeneous => "homogeneous",
            HomogeneityVerdict::NotHomogeneousAtDegree => "not_homogeneous_at_degree",
            HomogeneityVerdict::Inconclusive => "inconclusive",
        }
    }
}

#[derive(Debug, Clone)]
pub struct HomogeneityReport {
    pub ansatz: HomogeneityAnsatz,
    /// Relative RMS residual of the collocated equation rows.
    pub residual: f64,
    /// Residual split per coordinate direction.
    pub per_k: Vec<f64>,
    pub verdict: HomogeneityVerdict,
    /// Worst isomorphism-probe deviation of section jets between point
    /// pairs, when that check was run.
    pub section_deviation: Option<f64>,
}

#[derive(Debug, Clone, Copy)]
pub struct HomogeneityOptions {
    pub degree: u32,
    pub tol_hom: f64,
    pub jets_per_point: usize,
    pub seed: u64,
    /// Adds the optional coupling of the second-order block to an extra
    /// polynomial unknown field; off by default.
    pub extended: bool,
}

impl Default for HomogeneityOptions {
    fn default() -> Self {
        HomogeneityOptions {
            degree: 2,
            tol_hom: 1e-8,
            jets_per_point: 3,
            seed: 5,
            extended: false,
        }
    }
}

/// One affine row block of the equation at jet `g` in coordinate direction
/// `k`: for each law component, the residual is `row . coeffs + constant`.
/// The polynomial is differentiated at (source, target) of the jet.
pub fn homogeneity_residual_rows(
    law: &LawExpr,
    g: &Jet,
    ansatz: &HomogeneityAnsatz,
    k: usize,
) -> Result<(DMatrix<f64>, DVector<f64>)> {
    let n = law.n;
    let d = law.out_dim();
    let ev = evaluate(law, g)?;
    let vals: Vec<f64> = g.x.iter().chain(g.y.iter()).copied().collect();
    let m = ansatz.monos.len();
    let mut rows = DMatrix::zeros(d, ansatz.coeff_count());
    let mut consts = DVector::zeros(d);
    for a in 0..d {
        consts[a] = ev.d_x(a, k);
        for l in 0..n {
            for i in 0..n {
                let mut first = 0.0;
                let mut second = vec![0.0; m];
                for j in 0..n {
                    first += g.a[(j, l)] * ev.d_a(a, j, i);
                    for mm in 0..n {
                        let w = g.a[(j, l)] * ev.d_c(a, j, i, mm);
                        if w != 0.0 {
                            for (t, mono) in ansatz.monos.iter().enumerate() {
                                second[t] += w
                                    * (mono_d2(mono, &vals, k, mm)
                                        + mono_d2(mono, &vals, k, n + mm));
                            }
                        }
                    }
                }
                for (t, mono) in ansatz.monos.iter().enumerate() {
                    rows[(a, ansatz.slot(l, i, t))] +=
                        first * mono_d1(mono, &vals, k) + second[t];
                }
            }
        }
    }
    Ok((rows, consts))
}

struct Collocation {
    rows: Vec<(DVector<f64>, f64, usize)>,
    anchors: Vec<(DVector<f64>, f64)>,
}

fn direction_rows(
    law: &LawExpr,
    g: &Jet,
    ansatz: &HomogeneityAnsatz,
    dir: &DVector<f64>,
    tag: usize,
    out: &mut Collocation,
) -> Result<()> {
    let n = law.n;
    let d = law.out_dim();
    let mut acc_rows = DMatrix::zeros(d, ansatz.coeff_count());
    let mut acc_consts = DVector::zeros(d);
    for k in 0..n {
        if dir[k] == 0.0 {
            continue;
        }
        let (r, c) = homogeneity_residual_rows(law, g, ansatz, k)?;
        acc_rows += r * dir[k];
        acc_consts += c * dir[k];
    }
    for a in 0..d {
        out.rows
            .push((acc_rows.row(a).transpose(), acc_consts[a], tag));
    }
    Ok(())
}

fn anchor_rows(ansatz: &HomogeneityAnsatz, x: &DVector<f64>, out: &mut Collocation) {
    let n = ansatz.n;
    let vals: Vec<f64> = x.iter().chain(x.iter()).copied().collect();
    for l in 0..n {
        for i in 0..n {
            let mut row = DVector::zeros(ansatz.coeff_count());
            for (t, mono) in ansatz.monos.iter().enumerate() {
                row[ansatz.slot(l, i, t)] = mono_eval(mono, &vals);
            }
            let target = if l == i { 1.0 } else { 0.0 };
            out.anchors.push((row, -target));
        }
    }
}

fn solve_collocation(
    coll: &Collocation,
    ansatz: HomogeneityAnsatz,
    n_dirs: usize,
    tol_hom: f64,
) -> HomogeneityReport {
    let p = ansatz.coeff_count();
    let total = coll.rows.len() + coll.anchors.len();
    let mut a = DMatrix::zeros(total, p);
    let mut b = DVector::zeros(total);
    for (r, (row, c, _)) in coll.rows.iter().enumerate() {
        a.row_mut(r).copy_from(&row.transpose());
        b[r] = *c;
    }
    for (r, (row, c)) in coll.anchors.iter().enumerate() {
        let at = coll.rows.len() + r;
        a.row_mut(at).copy_from(&row.transpose());
        b[at] = *c;
    }
    let (sol, _) = least_squares(&a, &b);

    // grade only the equation rows, relative to their own scale
    let mut rms_res = 0.0;
    let mut rms_const = 0.0;
    let mut rms_row = 0.0;
    let mut per_k_sq = vec![0.0f64; n_dirs.max(1)];
    let mut per_k_count = vec![0usize; n_dirs.max(1)];
    for (row, c, tag) in &coll.rows {
        let r = row.dot(&sol) + *c;
        rms_res += r * r;
        rms_const += c * c;
        rms_row += row.norm_squared() / p.max(1) as f64;
        per_k_sq[*tag] += r * r;
        per_k_count[*tag] += 1;
    }
    let count = coll.rows.len().max(1) as f64;
    let scale = (rms_const / count)
        .sqrt()
        .max((rms_row / count).sqrt())
        .max(f64::MIN_POSITIVE);
    let residual = (rms_res / count).sqrt() / scale;
    let per_k: Vec<f64> = per_k_sq
        .iter()
        .zip(&per_k_count)
        .map(|(s, c)| {
            if *c == 0 {
                0.0
            } else {
                (s / *c as f64).sqrt() / scale
            }
        })
        .collect();
    let verdict = if coll.rows.is_empty() || residual <= tol_hom {
        HomogeneityVerdict::Homogeneous
    } else if residual > 100.0 * tol_hom {
        HomogeneityVerdict::NotHomogeneousAtDegree
    } else {
        HomogeneityVerdict::Inconclusive
    };
    let mut ansatz = ansatz;
    ansatz.coeffs = sol;
    HomogeneityReport {
        ansatz,
        residual,
        per_k,
        verdict,
        section_deviation: None,
    }
}

/// Collocate the equation over all grid points, all coordinate directions
/// and a few random jets per point, then least-squares for the polynomial.
pub fn solve_homogeneity(
    law: &LawExpr,
    grid: &BodyGrid,
    opts: &HomogeneityOptions,
) -> Result<HomogeneityReport> {
    let n = law.n;
    let ansatz = HomogeneityAnsatz::zero(n, opts.degree);
    let mut coll = Collocation {
        rows: Vec::new(),
        anchors: Vec::new(),
    };
    for pt in 0..grid.len() {
        let x = grid.point(pt);
        let mut rng = Rng::derive(opts.seed, pt as u64);
        for _ in 0..opts.jets_per_point {
            let g = sample_jet_at(&x, &mut rng);
            for k in 0..n {
                let mut dir = DVector::zeros(n);
                dir[k] = 1.0;
                direction_rows(law, &g, &ansatz, &dir, k, &mut coll)?;
            }
        }
        anchor_rows(&ansatz, &x, &mut coll);
    }
    Ok(solve_collocation(&coll, ansatz, n, opts.tol_hom))
}

/// The jet of the solved section from `x` to `y`: frame block P(x, y), base
/// block identity, second-order block from the combined x- and y-derivative
/// of P.
pub fn homogeneous_section_at(
    ansatz: &HomogeneityAnsatz,
    x: &DVector<f64>,
    y: &DVector<f64>,
) -> Result<Jet> {
    let n = ansatz.n;
    let p = ansatz.eval(x, y);
    let c = Tensor3::from_fn(n, |j, i, k| {
        ansatz.d1(x, y, j, i, k) + ansatz.d1(x, y, j, i, n + k)
    });
    Jet::new(
        x.clone(),
        y.clone(),
        p,
        DMatrix::identity(n, n),
        c,
    )
}

/// Run the homogeneity solve separately on each leaf, with collocation
/// directions restricted to the leaf's fibre basis, and verify the solved
/// section between same-leaf point pairs with the isomorphism probe.
pub fn leafwise_homogeneity(
    law: &LawExpr,
    labeling: &LeafLabeling,
    opts: &HomogeneityOptions,
    fibres: &[crate::numerics::Subspace],
) -> Result<Vec<HomogeneityReport>> {
    let n = law.n;
    let grid = &labeling.grid;
    let mut out = Vec::with_capacity(labeling.leaf_count);
    for leaf in 0..labeling.leaf_count {
        let points = labeling.leaf_points(leaf);
        let ansatz = HomogeneityAnsatz::zero(n, opts.degree);
        let mut coll = Collocation {
            rows: Vec::new(),
            anchors: Vec::new(),
        };
        let dim = labeling.leaf_dims[leaf];
        for &pt in &points {
            let x = grid.point(pt);
            let fibre = &fibres[pt];
            let mut rng = Rng::derive(opts.seed, pt as u64);
            for _ in 0..opts.jets_per_point {
                let g = sample_jet_at(&x, &mut rng);
                for dcol in 0..fibre.dim() {
                    let dir: DVector<f64> = fibre.basis.column(dcol).into_owned();
                    direction_rows(law, &g, &ansatz, &dir, dcol.min(n - 1), &mut coll)?;
                }
            }
            anchor_rows(&ansatz, &x, &mut coll);
        }
        let mut report = solve_collocation(&coll, ansatz, dim.max(1), opts.tol_hom);
        if report.verdict == HomogeneityVerdict::Homogeneous && points.len() > 1 {
            let mut worst: f64 = 0.0;
            let pairs = points.len().min(5);
            for s in 0..pairs {
                let from = grid.point(points[s]);
                let to = grid.point(points[(s + 1) % points.len()]);
                let section = homogeneous_section_at(&report.ansatz, &from, &to)?;
                let (_, dev) =
                    is_material_isomorphism(law, &section, 8, opts.seed ^ 0xabcd, opts.tol_hom)?;
                worst = worst.max(dev);
            }
            report.section_deviation = Some(worst);
        }
        out.push(report);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dsl::{catalog, parse_components};

    fn unit_grid(n: usize, counts: usize) -> BodyGrid {
        BodyGrid::new(
            DVector::from_element(n, 0.0),
            DVector::from_element(n, 1.0),
            vec![counts; n],
        )
        .unwrap()
    }

    #[test]
    fn monomial_basis_counts() {
        // C(2n + d, d) monomials in 2n variables up to total degree d
        assert_eq!(monomials(4, 1).len(), 5);
        assert_eq!(monomials(4, 2).len(), 15);
        assert_eq!(monomials(6, 2).len(), 28);
    }

    #[test]
    fn monomial_derivatives_match_finite_differences() {
        let monos = monomials(4, 3);
        let vals = [0.3, -0.7, 1.2, 0.5];
        let h = 1e-5;
        for m in &monos {
            for v in 0..4 {
                let mut plus = vals;
                let mut minus = vals;
                plus[v] += h;
                minus[v] -= h;
                let fd = (mono_eval(m, &plus) - mono_eval(m, &minus)) / (2.0 * h);
                assert!(
                    (fd - mono_d1(m, &vals, v)).abs() < 1e-6,
                    "d1 mismatch on {m:?} axis {v}"
                );
                for w in 0..4 {
                    let fd2 = (mono_d1(m, &plus, w) - mono_d1(m, &minus, w)) / (2.0 * h);
                    assert!(
                        (fd2 - mono_d2(m, &vals, v, w)).abs() < 1e-5,
                        "d2 mismatch on {m:?} axes {v},{w}"
                    );
                }
            }
        }
    }

    #[test]
    fn constant_law_is_homogeneous() {
        let law = parse_components("1", 2).unwrap();
        let r = solve_homogeneity(&law, &unit_grid(2, 3), &HomogeneityOptions::default()).unwrap();
        assert_eq!(r.verdict, HomogeneityVerdict::Homogeneous);
    }

    #[test]
    fn frame_law_solves_to_identity_polynomial() {
        let law = catalog("uniform_frame", 2).unwrap();
        let r = solve_homogeneity(&law, &unit_grid(2, 4), &HomogeneityOptions::default()).unwrap();
        assert_eq!(r.verdict, HomogeneityVerdict::Homogeneous);
        assert!(r.residual <= 1e-10, "residual {}", r.residual);
        let p = r.ansatz.eval(
            &DVector::from_vec(vec![0.3, 0.9]),
            &DVector::from_vec(vec![0.8, 0.1]),
        );
        assert!((p - DMatrix::identity(2, 2)).amax() < 1e-6);
    }

    #[test]
    fn graded_law_fails_at_every_degree() {
        let law = catalog("fgm_axis", 2).unwrap();
        for degree in 1..=4 {
            let opts = HomogeneityOptions {
                degree,
                ..HomogeneityOptions::default()
            };
            let r = solve_homogeneity(&law, &unit_grid(2, 3), &opts).unwrap();
            assert_eq!(
                r.verdict,
                HomogeneityVerdict::NotHomogeneousAtDegree,
                "degree {degree}: residual {}",
                r.residual
            );
        }
    }

    #[test]
    fn section_of_constant_identity_ansatz() {
        let mut ansatz = HomogeneityAnsatz::zero(2, 1);
        let const_mono = ansatz.monos.iter().position(|m| m.iter().all(|e| *e == 0)).unwrap();
        for l in 0..2 {
            let slot = ansatz.slot(l, l, const_mono);
            ansatz.coeffs[slot] = 1.0;
        }
        let g = homogeneous_section_at(
            &ansatz,
            &DVector::from_vec(vec![0.0, 0.0]),
            &DVector::from_vec(vec![1.0, 2.0]),
        )
        .unwrap();
        assert_eq!(g.a, DMatrix::identity(2, 2));
        assert_eq!(g.b, DMatrix::identity(2, 2));
        assert_eq!(g.c.norm_inf(), 0.0);
    }
}
