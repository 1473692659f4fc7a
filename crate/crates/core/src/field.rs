//! Grid sweep: run the pointwise solver over a rectangular grid of body
//! points and classify the whole body from the per-point solution spaces.

use nalgebra::DVector;

use crate::dsl::LawExpr;
use crate::error::{Error, Result};
use crate::jet::{identity_jet, Jet};
use crate::material::{
    embedding_matrix, is_material_isomorphism, solve_point, DistributionSample, SolverConfig,
};
use crate::numerics::{column_space, subspace_compare, SubspaceRelation};
use crate::rng::Rng;

/// Rectangular point lattice over a box, enumerated lexicographically with
/// the last axis fastest.
#[derive(Debug, Clone, PartialEq)]
pub struct BodyGrid {
    pub lo: DVector<f64>,
    pub hi: DVector<f64>,
    pub counts: Vec<usize>,
}

impl BodyGrid {
    pub fn new(lo: DVector<f64>, hi: DVector<f64>, counts: Vec<usize>) -> Result<BodyGrid> {
        let n = lo.len();
        if hi.len() != n || counts.len() != n {
            return Err(Error::DimensionMismatch(format!(
                "grid lo/hi/counts lengths {} / {} / {}",
                n,
                hi.len(),
                counts.len()
            )));
        }
        for i in 0..n {
            if !(lo[i] < hi[i]) {
                return Err(Error::DimensionMismatch(format!(
                    "grid box must satisfy lo < hi on axis {} (got {} .. {})",
                    i + 1,
                    lo[i],
                    hi[i]
                )));
            }
            if counts[i] == 0 {
                return Err(Error::DimensionMismatch(format!(
                    "grid count on axis {} must be positive",
                    i + 1
                )));
            }
        }
        Ok(BodyGrid { lo, hi, counts })
    }

    pub fn dim(&self) -> usize {
        self.lo.len()
    }

    pub fn len(&self) -> usize {
        self.counts.iter().product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn spacing(&self, axis: usize) -> f64 {
        if self.counts[axis] > 1 {
            (self.hi[axis] - self.lo[axis]) / (self.counts[axis] - 1) as f64
        } else {
            0.0
        }
    }

    pub fn multi_index(&self, flat: usize) -> Vec<usize> {
        let n = self.dim();
        let mut idx = vec![0; n];
        let mut rest = flat;
        for axis in (0..n).rev() {
            idx[axis] = rest % self.counts[axis];
            rest /= self.counts[axis];
        }
        idx
    }

    pub fn flat_index(&self, idx: &[usize]) -> usize {
        let mut flat = 0;
        for axis in 0..self.dim() {
            flat = flat * self.counts[axis] + idx[axis];
        }
        flat
    }

    pub fn point(&self, flat: usize) -> DVector<f64> {
        let idx = self.multi_index(flat);
        DVector::from_fn(self.dim(), |axis, _| {
            self.lo[axis] + idx[axis] as f64 * self.spacing(axis)
        })
    }

    /// Axis-aligned grid neighbors (up to 2n of them).
    pub fn neighbors(&self, flat: usize) -> Vec<usize> {
        let idx = self.multi_index(flat);
        let mut out = Vec::new();
        for axis in 0..self.dim() {
            if idx[axis] > 0 {
                let mut m = idx.clone();
                m[axis] -= 1;
                out.push(self.flat_index(&m));
            }
            if idx[axis] + 1 < self.counts[axis] {
                let mut m = idx.clone();
                m[axis] += 1;
                out.push(self.flat_index(&m));
            }
        }
        out
    }

    pub fn contains(&self, x: &DVector<f64>) -> bool {
        (0..self.dim()).all(|i| x[i] >= self.lo[i] - 1e-12 && x[i] <= self.hi[i] + 1e-12)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Classification {
    SmoothlyUniform,
    NonUniform,
    UniformSecondGrade,
    Mixed,
}

impl Classification {
    pub fn as_str(self) -> &'static str {
        match self {
            Classification::SmoothlyUniform => "smoothly_uniform",
            Classification::NonUniform => "non_uniform",
            Classification::UniformSecondGrade => "uniform_second_grade",
            Classification::Mixed => "mixed",
        }
    }
}

/// Sweep configuration: per-point solver settings plus the comparison
/// tolerance for solution-space equality and a worker-thread cap.
#[derive(Debug, Clone, Copy)]
pub struct FieldConfig {
    pub solver: SolverConfig,
    /// Principal-angle tolerance for subspace equality tests.
    pub compare_tol: f64,
    pub threads: usize,
}

impl Default for FieldConfig {
    fn default() -> Self {
        FieldConfig {
            solver: SolverConfig::default(),
            compare_tol: 1e-6,
            threads: 1,
        }
    }
}

/// Per-point results plus the body-level classification.
#[derive(Debug, Clone)]
pub struct FieldReport {
    pub grid: BodyGrid,
    pub samples: Vec<DistributionSample>,
    /// Base-projection dimension of the full solution space, per point.
    pub dims_nh: Vec<usize>,
    /// Base-projection dimension of the holonomic solution space, per point.
    pub dims_h: Vec<usize>,
    /// Per point: embedded holonomic solutions span the full solution space.
    pub second_grade_equal: Vec<bool>,
    pub classification: Classification,
    pub warnings: Vec<String>,
}

fn solve_indices(
    law: &LawExpr,
    grid: &BodyGrid,
    cfg: &FieldConfig,
    indices: &[usize],
) -> Result<Vec<(usize, DistributionSample)>> {
    let mut out = Vec::with_capacity(indices.len());
    for &i in indices {
        let mut solver = cfg.solver;
        solver.seed = Rng::derive(cfg.solver.seed, i as u64).next_u64();
        let x = grid.point(i);
        out.push((i, solve_point(law, &x, &solver)?));
    }
    Ok(out)
}

/// Run the pointwise solver at every grid point (optionally on several
/// threads; the result does not depend on the thread count) and classify.
pub fn analyze_grid(law: &LawExpr, grid: &BodyGrid, cfg: &FieldConfig) -> Result<FieldReport> {
    let n = law.n;
    if grid.dim() != n {
        return Err(Error::DimensionMismatch(format!(
            "grid dimension {} but law dimension {n}",
            grid.dim()
        )));
    }
    let total = grid.len();
    let threads = cfg.threads.max(1).min(total.max(1));
    let mut samples: Vec<Option<DistributionSample>> = vec![None; total];
    if threads <= 1 {
        for (i, s) in solve_indices(law, grid, cfg, &(0..total).collect::<Vec<_>>())? {
            samples[i] = Some(s);
        }
    } else {
        let chunks: Vec<Vec<usize>> = (0..threads)
            .map(|t| (0..total).filter(|i| i % threads == t).collect())
            .collect();
        let results = std::thread::scope(|scope| {
            let handles: Vec<_> = chunks
                .iter()
                .map(|chunk| scope.spawn(move || solve_indices(law, grid, cfg, chunk)))
                .collect();
            handles
                .into_iter()
                .map(|h| h.join().expect("worker panicked"))
                .collect::<Vec<_>>()
        });
        for r in results {
            for (i, s) in r? {
                samples[i] = Some(s);
            }
        }
    }
    let samples: Vec<DistributionSample> = samples.into_iter().map(|s| s.unwrap()).collect();

    let e = embedding_matrix(n);
    let mut dims_nh = Vec::with_capacity(total);
    let mut dims_h = Vec::with_capacity(total);
    let mut second = Vec::with_capacity(total);
    let mut warnings = Vec::new();
    for (i, s) in samples.iter().enumerate() {
        dims_nh.push(s.base_nh.dim());
        dims_h.push(s.base_h.dim());
        let embedded = column_space(&(&e * &s.null_h.basis), cfg.solver.rel_tol);
        let rel = subspace_compare(&embedded, &s.null_nh, cfg.compare_tol)?;
        second.push(rel == SubspaceRelation::Equal);
        if !s.rank_saturated {
            warnings.push(format!(
                "rank not saturated at grid point {} ({:?})",
                i,
                s.point.as_slice()
            ));
        }
    }

    let all_full_nh = dims_nh.iter().all(|d| *d == n);
    let all_full_h = dims_h.iter().all(|d| *d == n);
    let all_below = dims_nh.iter().all(|d| *d < n);
    let all_equal = second.iter().all(|b| *b);
    let classification = if all_full_nh {
        if all_full_h && all_equal {
            Classification::UniformSecondGrade
        } else {
            Classification::SmoothlyUniform
        }
    } else if all_below {
        Classification::NonUniform
    } else {
        let offenders: Vec<usize> = dims_nh
            .iter()
            .enumerate()
            .filter(|(_, d)| **d < n)
            .map(|(i, _)| i)
            .collect();
        warnings.push(format!(
            "mixed classification: base dimension below {n} at grid points {offenders:?}"
        ));
        Classification::Mixed
    };

    Ok(FieldReport {
        grid: grid.clone(),
        samples,
        dims_nh,
        dims_h,
        second_grade_equal: second,
        classification,
        warnings,
    })
}

/// Apply the material-isomorphism probe to a list of candidate symmetries
/// at `x` (jets with both endpoints at `x`).
pub fn symmetry_probe(
    law: &LawExpr,
    x: &DVector<f64>,
    candidates: &[Jet],
    probes: usize,
    seed: u64,
    tol: f64,
) -> Result<Vec<bool>> {
    let mut out = Vec::with_capacity(candidates.len());
    for g in candidates {
        let gap = (&g.x - x).amax().max((&g.y - x).amax());
        if gap > crate::jet::TOL_MATCH {
            return Err(Error::SourceTargetMismatch {
                gap,
                tol: crate::jet::TOL_MATCH,
            });
        }
        let (ok, _) = is_material_isomorphism(law, g, probes, seed, tol)?;
        out.push(ok);
    }
    Ok(out)
}

/// Convenience: the identity candidate, always a symmetry.
pub fn identity_candidate(x: &DVector<f64>) -> Jet {
    identity_jet(x)
}
