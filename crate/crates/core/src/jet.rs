//! Elements of the second-order non-holonomic groupoid in local coordinates,
//! with the structure maps, the holonomic subgroupoid test and the tangent
//! of left translation.
//!
//! A jet from x to y carries three blocks besides the endpoints:
//! an n x n frame block `a` (y^j_i), an n x n base block `b` (y^j_{,i}) and
//! an n x n x n second-order block `c` (y^j_{i,k}, index order (j, i, k)).

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::tensor::Tensor3;

/// Source/target matching tolerance in the infinity norm.
pub const TOL_MATCH: f64 = 1e-9;

/// A matrix block counts as singular when smallest/largest singular value
/// drops below this ratio.
pub const SINGULAR_RATIO: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct Jet {
    pub x: DVector<f64>,
    pub y: DVector<f64>,
    /// Frame block y^j_i, row j, column i.
    pub a: DMatrix<f64>,
    /// Base block y^j_{,i}.
    pub b: DMatrix<f64>,
    /// Second-order block y^j_{i,k}.
    pub c: Tensor3,
}

/// A tangent vector at `base`, in the coordinate basis of the jet charts.
#[derive(Debug, Clone)]
pub struct TangentJet {
    pub base: Jet,
    pub dx: DVector<f64>,
    pub dy: DVector<f64>,
    pub da: DMatrix<f64>,
    pub db: DMatrix<f64>,
    pub dc: Tensor3,
}

fn singular_ratio(m: &DMatrix<f64>) -> f64 {
    let sv = m.singular_values();
    let max = sv.max();
    if max == 0.0 {
        0.0
    } else {
        sv.min() / max
    }
}

fn check_block(m: &DMatrix<f64>, name: &'static str) -> Result<()> {
    if m.iter().any(|v| !v.is_finite()) {
        return Err(Error::SingularJet {
            block: name,
            ratio: f64::NAN,
        });
    }
    let ratio = singular_ratio(m);
    if ratio < SINGULAR_RATIO {
        return Err(Error::SingularJet { block: name, ratio });
    }
    Ok(())
}

impl Jet {
    pub fn new(
        x: DVector<f64>,
        y: DVector<f64>,
        a: DMatrix<f64>,
        b: DMatrix<f64>,
        c: Tensor3,
    ) -> Result<Jet> {
        let n = x.len();
        assert!(n >= 2, "body dimension must be at least 2");
        assert_eq!(y.len(), n);
        assert_eq!(a.nrows(), n);
        assert_eq!(b.nrows(), n);
        assert_eq!(c.n(), n);
        check_block(&a, "frame")?;
        check_block(&b, "base")?;
        if !x.iter().chain(y.iter()).all(|v| v.is_finite()) || !c.is_finite() {
            return Err(Error::DimensionMismatch("non-finite jet entries".into()));
        }
        Ok(Jet { x, y, a, b, c })
    }

    pub fn dim(&self) -> usize {
        self.x.len()
    }

    pub fn source(&self) -> &DVector<f64> {
        &self.x
    }

    pub fn target(&self) -> &DVector<f64> {
        &self.y
    }

    /// Largest entry-wise difference over all coordinate blocks.
    pub fn max_diff(&self, other: &Jet) -> f64 {
        let mut m: f64 = 0.0;
        m = m.max((&self.x - &other.x).amax());
        m = m.max((&self.y - &other.y).amax());
        m = m.max((&self.a - &other.a).amax());
        m = m.max((&self.b - &other.b).amax());
        for (u, v) in self.c.as_slice().iter().zip(other.c.as_slice()) {
            m = m.max((u - v).abs());
        }
        m
    }
}

/// The identity jet at x: (x; x, I, I, 0).
pub fn identity_jet(x: &DVector<f64>) -> Jet {
    let n = x.len();
    Jet {
        x: x.clone(),
        y: x.clone(),
        a: DMatrix::identity(n, n),
        b: DMatrix::identity(n, n),
        c: Tensor3::zeros(n),
    }
}

fn check_match(source: &DVector<f64>, target: &DVector<f64>) -> Result<()> {
    let gap = (source - target).amax();
    if gap > TOL_MATCH {
        return Err(Error::SourceTargetMismatch {
            gap,
            tol: TOL_MATCH,
        });
    }
    Ok(())
}

/// Groupoid product g . f, defined when alpha(g) = beta(f).
pub fn compose(g: &Jet, f: &Jet) -> Result<Jet> {
    let n = g.dim();
    assert_eq!(f.dim(), n);
    check_match(&g.x, &f.y)?;
    check_block(&g.a, "frame")?;
    check_block(&g.b, "base")?;
    check_block(&f.a, "frame")?;
    check_block(&f.b, "base")?;

    let a = &g.a * &f.a;
    let b = &g.b * &f.b;
    let c = Tensor3::from_fn(n, |j, i, k| {
        let mut v = 0.0;
        for r in 0..n {
            for m in 0..n {
                v += g.c[(j, r, m)] * f.a[(r, i)] * f.b[(m, k)];
            }
        }
        for m in 0..n {
            v += g.a[(j, m)] * f.c[(m, i, k)];
        }
        v
    });
    Ok(Jet {
        x: f.x.clone(),
        y: g.y.clone(),
        a,
        b,
        c,
    })
}

/// Groupoid inverse: compose(g, inverse(g)) = identity at beta(g).
pub fn inverse(g: &Jet) -> Result<Jet> {
    let n = g.dim();
    check_block(&g.a, "frame")?;
    check_block(&g.b, "base")?;
    let a_inv = g.a.clone().try_inverse().ok_or(Error::SingularJet {
        block: "frame",
        ratio: 0.0,
    })?;
    let b_inv = g.b.clone().try_inverse().ok_or(Error::SingularJet {
        block: "base",
        ratio: 0.0,
    })?;
    // h^m_{i,k} = -(a^-1)^m_j c^j_{r,l} (a^-1)^r_i (b^-1)^l_k
    let c = Tensor3::from_fn(n, |m, i, k| {
        let mut v = 0.0;
        for j in 0..n {
            for r in 0..n {
                for l in 0..n {
                    v -= a_inv[(m, j)] * g.c[(j, r, l)] * a_inv[(r, i)] * b_inv[(l, k)];
                }
            }
        }
        v
    });
    Ok(Jet {
        x: g.y.clone(),
        y: g.x.clone(),
        a: a_inv,
        b: b_inv,
        c,
    })
}

/// Push a tangent vector at h = base(v) forward along h -> g . h.
///
/// This is the differential of the composition in its second argument; the
/// target coordinate of the composite is constant, so dy maps to zero.
pub fn left_translate_tangent(g: &Jet, v: &TangentJet) -> Result<TangentJet> {
    let n = g.dim();
    let h = &v.base;
    check_match(&g.x, &h.y)?;
    let base = compose(g, h)?;
    let da = &g.a * &v.da;
    let db = &g.b * &v.db;
    let dc = Tensor3::from_fn(n, |j, i, k| {
        let mut val = 0.0;
        for r in 0..n {
            for m in 0..n {
                val += g.c[(j, r, m)] * (v.da[(r, i)] * h.b[(m, k)] + h.a[(r, i)] * v.db[(m, k)]);
            }
        }
        for m in 0..n {
            val += g.a[(j, m)] * v.dc[(m, i, k)];
        }
        val
    });
    Ok(TangentJet {
        base,
        dx: v.dx.clone(),
        dy: DVector::zeros(n),
        da,
        db,
        dc,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ProjectionMode {
    /// Frame projection: keeps the y^j_i block.
    Frame,
    /// Base projection: keeps the y^j_{,i} block.
    Base,
}

/// Project to the 1-jet groupoid; a groupoid morphism in either mode.
pub fn project_to_1jets(g: &Jet, mode: ProjectionMode) -> (DVector<f64>, DVector<f64>, DMatrix<f64>) {
    let m = match mode {
        ProjectionMode::Frame => g.a.clone(),
        ProjectionMode::Base => g.b.clone(),
    };
    (g.x.clone(), g.y.clone(), m)
}

/// Membership test for the holonomic subgroupoid: equal frame and base
/// blocks and c symmetric in its lower indices.
pub fn is_holonomic(g: &Jet, tol: f64) -> bool {
    let n = g.dim();
    if (&g.a - &g.b).amax() > tol {
        return false;
    }
    for j in 0..n {
        for i in 0..n {
            for k in (i + 1)..n {
                if (g.c[(j, i, k)] - g.c[(j, k, i)]).abs() > tol {
                    return false;
                }
            }
        }
    }
    true
}

impl TangentJet {
    pub fn zero(base: Jet) -> TangentJet {
        let n = base.dim();
        TangentJet {
            base,
            dx: DVector::zeros(n),
            dy: DVector::zeros(n),
            da: DMatrix::zeros(n, n),
            db: DMatrix::zeros(n, n),
            dc: Tensor3::zeros(n),
        }
    }

    /// Largest component over all blocks.
    pub fn norm_inf(&self) -> f64 {
        let mut m = self.dx.amax().max(self.dy.amax());
        m = m.max(self.da.amax()).max(self.db.amax());
        m.max(self.dc.norm_inf())
    }

    pub fn scaled(&self, s: f64) -> TangentJet {
        TangentJet {
            base: self.base.clone(),
            dx: &self.dx * s,
            dy: &self.dy * s,
            da: &self.da * s,
            db: &self.db * s,
            dc: Tensor3::from_fn(self.base.dim(), |j, i, k| self.dc[(j, i, k)] * s),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn vec2(a: f64, b: f64) -> DVector<f64> {
        DVector::from_vec(vec![a, b])
    }

    #[test]
    fn identity_has_trivial_blocks() {
        let e = identity_jet(&DVector::from_vec(vec![0.0, 0.0, 0.0]));
        assert_eq!(e.y, e.x);
        assert_eq!(e.a, DMatrix::identity(3, 3));
        assert_eq!(e.b, DMatrix::identity(3, 3));
        assert_eq!(e.c.norm_inf(), 0.0);
    }

    #[test]
    fn identity_is_self_inverse() {
        let e = identity_jet(&vec2(0.3, -1.2));
        let inv = inverse(&e).unwrap();
        assert!(e.max_diff(&inv) < 1e-15);
    }

    #[test]
    fn hand_checked_product_n2() {
        // g: (1,0) -> (2,0), f: (0,0) -> (1,0); frame blocks multiply.
        let g = Jet::new(
            vec2(1.0, 0.0),
            vec2(2.0, 0.0),
            DMatrix::from_row_slice(2, 2, &[2.0, 0.0, 0.0, 1.0]),
            DMatrix::identity(2, 2),
            Tensor3::zeros(2),
        )
        .unwrap();
        let f = Jet::new(
            vec2(0.0, 0.0),
            vec2(1.0, 0.0),
            DMatrix::from_row_slice(2, 2, &[1.0, 1.0, 0.0, 1.0]),
            DMatrix::identity(2, 2),
            Tensor3::zeros(2),
        )
        .unwrap();
        let p = compose(&g, &f).unwrap();
        assert_eq!(p.a, DMatrix::from_row_slice(2, 2, &[2.0, 2.0, 0.0, 1.0]));
        assert_eq!(p.b, DMatrix::identity(2, 2));
        assert_eq!(p.c.norm_inf(), 0.0);
    }

    #[test]
    fn compose_rejects_mismatched_endpoints() {
        let g = identity_jet(&vec2(1.0, 0.0));
        let f = identity_jet(&vec2(0.0, 0.0));
        assert!(matches!(
            compose(&g, &f),
            Err(Error::SourceTargetMismatch { .. })
        ));
    }

    #[test]
    fn singular_block_is_rejected() {
        let r = Jet::new(
            vec2(0.0, 0.0),
            vec2(0.0, 0.0),
            DMatrix::from_row_slice(2, 2, &[1.0, 1.0, 1.0, 1.0]),
            DMatrix::identity(2, 2),
            Tensor3::zeros(2),
        );
        assert!(matches!(r, Err(Error::SingularJet { .. })));
    }

    #[test]
    fn holonomic_detects_c_asymmetry() {
        let x = vec2(0.0, 0.0);
        let mut g = identity_jet(&x);
        assert!(is_holonomic(&g, 1e-12));
        g.c[(0, 0, 1)] = 1.0;
        assert!(!is_holonomic(&g, 1e-12));
    }

    #[test]
    fn projection_modes_differ_when_blocks_differ() {
        let mut g = identity_jet(&vec2(0.0, 0.0));
        g.a[(0, 1)] = 0.5;
        let (_, _, fa) = project_to_1jets(&g, ProjectionMode::Frame);
        let (_, _, fb) = project_to_1jets(&g, ProjectionMode::Base);
        assert_ne!(fa, fb);
    }
}
