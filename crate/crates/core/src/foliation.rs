//! Decompose the grid into leaves of the base solution-space field and
//! check that flows of admissible fields stay material.

use nalgebra::DVector;

use crate::dsl::LawExpr;
use crate::error::{Error, Result};
use crate::field::{BodyGrid, FieldReport};
use crate::jet::{identity_jet, Jet, TangentJet};
use crate::material::{admissible_field_at, is_material_isomorphism, CoefficientVector};
use crate::numerics::Subspace;
use crate::tensor::Tensor3;

/// Which solution-space family the leaves are built from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LeafFamily {
    Full,
    Holonomic,
}

#[derive(Debug, Clone, Copy)]
pub struct FoliationConfig {
    /// Angular tolerance (radians) for a neighbor step to count as lying in
    /// the base fibre.
    pub tol_angle: f64,
    /// Streamline step; defaults to half the smallest grid spacing.
    pub h_int: Option<f64>,
    /// Step cap per direction when tracing representative curves.
    pub max_curve_steps: usize,
}

impl Default for FoliationConfig {
    fn default() -> Self {
        FoliationConfig {
            tol_angle: 1e-3,
            h_int: None,
            max_curve_steps: 400,
        }
    }
}

/// Connected-component decomposition of the grid along the base fibres.
#[derive(Debug, Clone)]
pub struct LeafLabeling {
    pub grid: BodyGrid,
    /// Leaf label per grid point; `None` marks quarantined singular points.
    pub label: Vec<Option<usize>>,
    pub leaf_count: usize,
    /// Fibre dimension per leaf.
    pub leaf_dims: Vec<usize>,
    /// Grid points whose fibre dimension differs from a neighbor's.
    pub singular_points: Vec<usize>,
    /// One traced streamline per leaf (single point for 0-dim leaves).
    pub curves: Vec<Vec<DVector<f64>>>,
    pub warnings: Vec<String>,
}

impl LeafLabeling {
    /// Grid point indices belonging to a leaf.
    pub fn leaf_points(&self, leaf: usize) -> Vec<usize> {
        self.label
            .iter()
            .enumerate()
            .filter(|(_, l)| **l == Some(leaf))
            .map(|(i, _)| i)
            .collect()
    }
}

struct UnionFind {
    parent: Vec<usize>,
}

impl UnionFind {
    fn new(n: usize) -> Self {
        UnionFind {
            parent: (0..n).collect(),
        }
    }

    fn find(&mut self, i: usize) -> usize {
        let mut root = i;
        while self.parent[root] != root {
            root = self.parent[root];
        }
        let mut at = i;
        while self.parent[at] != root {
            let next = self.parent[at];
            self.parent[at] = root;
            at = next;
        }
        root
    }

    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            self.parent[ra.max(rb)] = ra.min(rb);
        }
    }
}

fn fibre<'a>(report: &'a FieldReport, family: LeafFamily, point: usize) -> &'a Subspace {
    match family {
        LeafFamily::Full => &report.samples[point].base_nh,
        LeafFamily::Holonomic => &report.samples[point].base_h,
    }
}

/// Group grid points into leaves: neighbors are joined when the step between
/// them lies in the base fibre at both endpoints and the fibre dimensions
/// agree. Points adjacent to a dimension jump are reported singular and left
/// unlabeled.
pub fn label_leaves(
    report: &FieldReport,
    family: LeafFamily,
    cfg: &FoliationConfig,
) -> Result<LeafLabeling> {
    let grid = &report.grid;
    let total = grid.len();
    let dim_at = |i: usize| fibre(report, family, i).dim();

    let mut singular = Vec::new();
    for i in 0..total {
        if grid.neighbors(i).iter().any(|&j| dim_at(j) != dim_at(i)) {
            singular.push(i);
        }
    }
    let is_singular = {
        let mut mask = vec![false; total];
        for &i in &singular {
            mask[i] = true;
        }
        mask
    };

    let mut uf = UnionFind::new(total);
    for u in 0..total {
        if is_singular[u] {
            continue;
        }
        for v in grid.neighbors(u) {
            if v < u || is_singular[v] {
                continue;
            }
            let step = grid.point(v) - grid.point(u);
            let in_u = fibre(report, family, u).sin_angle(&step) < cfg.tol_angle;
            let in_v = fibre(report, family, v).sin_angle(&step) < cfg.tol_angle;
            if in_u && in_v {
                uf.union(u, v);
            }
        }
    }

    // compact labels in grid order
    let mut label = vec![None; total];
    let mut leaf_dims = Vec::new();
    let mut root_label = std::collections::HashMap::new();
    for i in 0..total {
        if is_singular[i] {
            continue;
        }
        let root = uf.find(i);
        let l = *root_label.entry(root).or_insert_with(|| {
            leaf_dims.push(dim_at(i));
            leaf_dims.len() - 1
        });
        label[i] = Some(l);
    }
    let leaf_count = leaf_dims.len();

    let mut warnings = Vec::new();
    if !singular.is_empty() {
        warnings.push(format!(
            "singular points present: fibre dimension jumps at grid points {singular:?}"
        ));
    }

    let mut curves = Vec::with_capacity(leaf_count);
    for l in 0..leaf_count {
        let rep = label.iter().position(|v| *v == Some(l)).expect("leaf nonempty");
        curves.push(trace_curve(report, family, rep, cfg));
    }

    Ok(LeafLabeling {
        grid: grid.clone(),
        label,
        leaf_count,
        leaf_dims,
        singular_points: singular,
        curves,
        warnings,
    })
}

fn nearest_grid_point(grid: &BodyGrid, x: &DVector<f64>) -> usize {
    let mut idx = Vec::with_capacity(grid.dim());
    for axis in 0..grid.dim() {
        let h = grid.spacing(axis);
        let i = if h == 0.0 {
            0
        } else {
            (((x[axis] - grid.lo[axis]) / h).round() as isize)
                .clamp(0, grid.counts[axis] as isize - 1) as usize
        };
        idx.push(i);
    }
    grid.flat_index(&idx)
}

/// Streamline of the first fibre direction through the representative point,
/// traced both ways with RK4; direction continuity is kept by projecting the
/// previous direction onto the fibre at the nearest grid point.
fn trace_curve(
    report: &FieldReport,
    family: LeafFamily,
    rep: usize,
    cfg: &FoliationConfig,
) -> Vec<DVector<f64>> {
    let grid = &report.grid;
    let start = grid.point(rep);
    let start_fibre = fibre(report, family, rep);
    if start_fibre.dim() == 0 {
        return vec![start];
    }
    let h = cfg.h_int.unwrap_or_else(|| {
        let mut s = f64::INFINITY;
        for axis in 0..grid.dim() {
            let sp = grid.spacing(axis);
            if sp > 0.0 {
                s = s.min(sp);
            }
        }
        if s.is_finite() {
            s / 2.0
        } else {
            0.1
        }
    });
    let seed_dir: DVector<f64> = start_fibre.basis.column(0).into_owned();

    let direction = |x: &DVector<f64>, prev: &DVector<f64>| -> Option<DVector<f64>> {
        let f = fibre(report, family, nearest_grid_point(grid, x));
        let proj = f.project(prev);
        let norm = proj.norm();
        if norm < 1e-9 {
            None
        } else {
            Some(proj / norm)
        }
    };

    let march = |sign: f64| -> Vec<DVector<f64>> {
        let mut out = Vec::new();
        let mut x = start.clone();
        let mut prev = &seed_dir * sign;
        for _ in 0..cfg.max_curve_steps {
            let k1 = match direction(&x, &prev) {
                Some(d) => d,
                None => break,
            };
            let k2 = match direction(&(&x + &k1 * (h / 2.0)), &k1) {
                Some(d) => d,
                None => break,
            };
            let k3 = match direction(&(&x + &k2 * (h / 2.0)), &k2) {
                Some(d) => d,
                None => break,
            };
            let k4 = match direction(&(&x + &k3 * h), &k3) {
                Some(d) => d,
                None => break,
            };
            let next = &x + (k1.clone() + k2 * 2.0 + k3 * 2.0 + &k4) * (h / 6.0);
            if !grid.contains(&next) {
                break;
            }
            prev = k4;
            x = next;
            out.push(x.clone());
        }
        out
    };

    let back = march(-1.0);
    let fwd = march(1.0);
    let mut curve: Vec<DVector<f64>> = back.into_iter().rev().collect();
    curve.push(start);
    curve.extend(fwd);
    curve
}

/// Result of integrating an admissible field and probing materiality along
/// the way.
#[derive(Debug, Clone)]
pub struct FlowCheck {
    /// Worst relative deviation of the isomorphism probe over all steps.
    pub max_deviation: f64,
    /// Sine of the angle of the coefficient vector against the solution
    /// space at the start point.
    pub admissibility_gap: f64,
    pub steps: usize,
}

#[derive(Debug, Clone, Copy)]
pub struct FlowConfig {
    pub probes: usize,
    pub seed: u64,
    pub iso_tol: f64,
}

impl Default for FlowConfig {
    fn default() -> Self {
        FlowConfig {
            probes: 16,
            seed: 1,
            iso_tol: 1e-7,
        }
    }
}

fn add_scaled(g: &Jet, t: &TangentJet, s: f64) -> Jet {
    let n = g.dim();
    Jet {
        x: &g.x + &t.dx * s,
        y: &g.y + &t.dy * s,
        a: &g.a + &t.da * s,
        b: &g.b + &t.db * s,
        c: Tensor3::from_fn(n, |j, i, k| g.c[(j, i, k)] + s * t.dc[(j, i, k)]),
    }
}

/// Integrate the admissible field of a fixed coefficient vector from the
/// identity jet at `x` and probe materiality at every step. The source must
/// stay inside `boundary`.
pub fn flow_containment_check(
    law: &LawExpr,
    c: &DVector<f64>,
    x: &DVector<f64>,
    solution_space: &Subspace,
    boundary: &BodyGrid,
    t_max: f64,
    steps: usize,
    cfg: &FlowConfig,
) -> Result<FlowCheck> {
    let n = law.n;
    assert_eq!(c.len(), CoefficientVector::new(n).len());
    let admissibility_gap = solution_space.sin_angle(c);

    let h = t_max / steps as f64;
    let mut g = identity_jet(x);
    let mut worst: f64 = 0.0;
    for step in 0..=steps {
        let (ok, dev) = is_material_isomorphism(law, &g, cfg.probes, cfg.seed, cfg.iso_tol)?;
        let _ = ok;
        worst = worst.max(dev);
        if step == steps {
            break;
        }
        let k1 = admissible_field_at(&g, c);
        let k2 = admissible_field_at(&add_scaled(&g, &k1, h / 2.0), c);
        let k3 = admissible_field_at(&add_scaled(&g, &k2, h / 2.0), c);
        let k4 = admissible_field_at(&add_scaled(&g, &k3, h), c);
        let mut next = g.clone();
        for (t, w) in [(&k1, 1.0), (&k2, 2.0), (&k3, 2.0), (&k4, 1.0)] {
            next = add_scaled(&next, t, w * h / 6.0);
        }
        if !boundary.contains(&next.x) {
            return Err(Error::FlowLeftGrid {
                x: next.x.iter().copied().collect(),
                t: (step + 1) as f64 * h,
            });
        }
        g = next;
    }
    Ok(FlowCheck {
        max_deviation: worst,
        admissibility_gap,
        steps,
    })
}
