//! The sampled pointwise solver against hand-eliminated solution spaces,
//! cross-seed stability, the embedding factorization and the isomorphism
//! probe.

use matdist_core::dsl::{catalog, parse_components};
use matdist_core::jet::identity_jet;
use matdist_core::material::{
    assemble_holonomic, assemble_nonholonomic, embedding_matrix, is_material_isomorphism,
    sample_jet_at, solve_point, CoefficientVector, HolonomicCoefficientVector, SolverConfig,
};
use matdist_core::numerics::{column_space, subspace_compare, SubspaceRelation};
use matdist_core::rng::Rng;
use nalgebra::{DMatrix, DVector};

fn cfg(seed: u64) -> SolverConfig {
    SolverConfig {
        seed,
        ..SolverConfig::default()
    }
}

fn point(n: usize, seed: u64) -> DVector<f64> {
    let mut rng = Rng::new(seed);
    DVector::from_fn(n, |_, _| rng.unit())
}

/// Hand elimination for the frame law: every sampled jet forces the thetaA
/// block to vanish and nothing else, so the solution space is exactly
/// {thetaA = 0} and its theta projection is everything.
#[test]
fn frame_law_solution_space_by_hand() {
    for n in [2usize, 3] {
        let law = catalog("uniform_frame", n).unwrap();
        let x = point(n, 31);
        let s = solve_point(&law, &x, &cfg(1)).unwrap();
        assert!(s.rank_saturated);
        let p = CoefficientVector::new(n).len();
        assert_eq!(s.null_nh.dim(), p - n * n);
        assert_eq!(s.base_nh.dim(), n);

        // the hand space: all unit vectors outside the thetaA block
        let cols = CoefficientVector::new(n);
        let mut in_a = vec![false; p];
        for l in 0..n {
            for i in 0..n {
                in_a[cols.a(l, i)] = true;
            }
        }
        let free: Vec<usize> = (0..p).filter(|s| !in_a[*s]).collect();
        let mut hand = DMatrix::zeros(p, free.len());
        for (col, slot) in free.iter().enumerate() {
            hand[(*slot, col)] = 1.0;
        }
        let hand = column_space(&hand, 1e-10);
        assert_eq!(
            subspace_compare(&s.null_nh, &hand, 1e-6).unwrap(),
            SubspaceRelation::Equal
        );
    }
}

/// The graded law adds a single constant x-row, eliminating the last theta
/// component on top of the frame-law constraints.
#[test]
fn graded_law_solution_space_by_hand() {
    for n in [2usize, 3] {
        let law = catalog("fgm_axis", n).unwrap();
        let x = point(n, 77);
        let s = solve_point(&law, &x, &cfg(2)).unwrap();
        let p = CoefficientVector::new(n).len();
        assert_eq!(s.null_nh.dim(), p - n * n - 1);
        assert_eq!(s.base_nh.dim(), n - 1);
        // theta_n is dead: the base projection is orthogonal to e_n
        let mut e_last = DVector::zeros(n);
        e_last[n - 1] = 1.0;
        assert!(s.base_nh.project(&e_last).norm() < 1e-8);
    }
}

/// Full-rank x-gradient law: all theta components die, base dimension 0.
#[test]
fn full_rank_x_law_kills_the_base() {
    let n = 2;
    let text = "x[1] ; x[2] ; yA[1][1] ; yA[1][2] ; yA[2][1] ; yA[2][2]";
    let law = parse_components(text, n).unwrap();
    let s = solve_point(&law, &point(n, 5), &cfg(3)).unwrap();
    assert_eq!(s.base_nh.dim(), 0);
    assert_eq!(s.base_h.dim(), 0);
}

/// Constant law: zero system, everything solves.
#[test]
fn constant_law_solution_space_is_everything() {
    let n = 2;
    let law = parse_components("1", n).unwrap();
    let x = point(n, 9);
    let s = solve_point(&law, &x, &cfg(4)).unwrap();
    assert_eq!(s.null_nh.dim(), CoefficientVector::new(n).len());
    assert_eq!(s.null_h.dim(), HolonomicCoefficientVector::new(n).len());
    assert_eq!(s.base_nh.dim(), n);
}

/// Holonomic restriction of the relative-rotation law: generic samples
/// force the D block to zero, theta and S stay free.
#[test]
fn cosserat_law_holonomic_space_by_hand() {
    let n = 2;
    let law = catalog("strict_cosserat", n).unwrap();
    let x = point(n, 13);
    let s = solve_point(&law, &x, &cfg(6)).unwrap();
    let q = HolonomicCoefficientVector::new(n).len();
    assert_eq!(s.null_h.dim(), q - n * n);
    assert_eq!(s.base_h.dim(), n);
    let cols = HolonomicCoefficientVector::new(n);
    // every basis vector has zero D block
    for col in 0..s.null_h.dim() {
        for l in 0..n {
            for i in 0..n {
                assert!(s.null_h.basis[(cols.d(l, i), col)].abs() < 1e-8);
            }
        }
    }
}

#[test]
fn nullspaces_agree_across_seeds() {
    for name in ["uniform_frame", "fgm_axis", "strict_cosserat", "prolonged"] {
        let law = catalog(name, 2).unwrap();
        let x = point(2, 55);
        let a = solve_point(&law, &x, &cfg(1000)).unwrap();
        let b = solve_point(&law, &x, &cfg(2000)).unwrap();
        assert!(a.rank_saturated && b.rank_saturated);
        assert_eq!(
            subspace_compare(&a.null_nh, &b.null_nh, 1e-6).unwrap(),
            SubspaceRelation::Equal,
            "{name}: cross-seed nullspace mismatch"
        );
        assert_eq!(
            subspace_compare(&a.null_h, &b.null_h, 1e-6).unwrap(),
            SubspaceRelation::Equal
        );
    }
}

#[test]
fn holonomic_assembly_factors_through_the_embedding() {
    for n in [2usize, 3] {
        let e = embedding_matrix(n);
        let mut rng = Rng::new(21);
        for name in ["uniform_frame", "prolonged"] {
            let law = catalog(name, n).unwrap();
            let x = point(n, 3 * n as u64);
            let jets: Vec<_> = (0..5)
                .map(|_| matdist_core::material::sample_holonomic_jet_at(&x, &mut rng))
                .collect();
            let a_h = assemble_holonomic(&law, &x, &jets).unwrap();
            let a_nh = assemble_nonholonomic(&law, &x, &jets).unwrap();
            assert!((a_h - a_nh * &e).amax() <= 1e-12);
        }
    }
}

#[test]
fn embedded_holonomic_solutions_are_full_solutions() {
    for name in ["uniform_frame", "fgm_axis", "strict_cosserat", "prolonged"] {
        let law = catalog(name, 2).unwrap();
        let x = point(2, 8);
        let s = solve_point(&law, &x, &cfg(12)).unwrap();
        let e = embedding_matrix(2);
        let embedded = column_space(&(&e * &s.null_h.basis), 1e-8);
        let rel = subspace_compare(&embedded, &s.null_nh, 1e-6).unwrap();
        assert!(
            rel == SubspaceRelation::Equal || rel == SubspaceRelation::USubsetV,
            "{name}: embedded space not contained"
        );
    }
}

#[test]
fn constant_law_has_strictly_larger_full_space() {
    let n = 2;
    let law = parse_components("1", n).unwrap();
    let s = solve_point(&law, &point(n, 2), &cfg(5)).unwrap();
    let e = embedding_matrix(n);
    let embedded = column_space(&(&e * &s.null_h.basis), 1e-8);
    assert!(embedded.dim() < s.null_nh.dim());
    assert_eq!(
        subspace_compare(&embedded, &s.null_nh, 1e-6).unwrap(),
        SubspaceRelation::USubsetV
    );
}

#[test]
fn doubling_the_law_keeps_the_solution_spaces() {
    let n = 2;
    let law = catalog("fgm_axis", n).unwrap();
    let text = "2.0 * x[2] ; 2.0 * yA[1][1] ; 2.0 * yA[1][2] ; 2.0 * yA[2][1] ; 2.0 * yA[2][2]";
    let doubled = parse_components(text, n).unwrap();
    let x = point(n, 4);
    let a = solve_point(&law, &x, &cfg(7)).unwrap();
    let b = solve_point(&doubled, &x, &cfg(7)).unwrap();
    assert_eq!(
        subspace_compare(&a.null_nh, &b.null_nh, 1e-6).unwrap(),
        SubspaceRelation::Equal
    );
}

#[test]
fn isomorphism_probe_on_frame_law() {
    let n = 2;
    let law = catalog("uniform_frame", n).unwrap();
    let x = point(n, 61);
    let e = identity_jet(&x);
    let (ok, dev) = is_material_isomorphism(&law, &e, 20, 3, 1e-9).unwrap();
    assert!(ok);
    assert_eq!(dev, 0.0);

    // identity frame block with arbitrary other blocks: still material
    let mut rng = Rng::new(23);
    let mut g = sample_jet_at(&x, &mut rng);
    g.a = DMatrix::identity(n, n);
    let (ok, _) = is_material_isomorphism(&law, &g, 20, 3, 1e-9).unwrap();
    assert!(ok);

    // scaled frame block: rejected
    let mut bad = sample_jet_at(&x, &mut rng);
    bad.a = DMatrix::identity(n, n) * 2.0;
    let (ok, dev) = is_material_isomorphism(&law, &bad, 20, 3, 1e-9).unwrap();
    assert!(!ok);
    assert!(dev > 1e-3);
}

#[test]
fn constant_law_accepts_every_jet() {
    let law = parse_components("1", 2).unwrap();
    let mut rng = Rng::new(2);
    for _ in 0..10 {
        let x = DVector::from_fn(2, |_, _| rng.unit());
        let g = sample_jet_at(&x, &mut rng);
        let (ok, dev) = is_material_isomorphism(&law, &g, 10, 8, 1e-12).unwrap();
        assert!(ok);
        assert_eq!(dev, 0.0);
    }
}

#[test]
fn base_dim_bounded_and_nullspace_floor() {
    for name in ["uniform_frame", "fgm_axis", "prolonged"] {
        let law = catalog(name, 2).unwrap();
        let s = solve_point(&law, &point(2, 14), &cfg(9)).unwrap();
        let p = CoefficientVector::new(2).len();
        assert!(s.base_nh.dim() <= 2);
        assert!(s.null_nh.dim() >= p.saturating_sub(s.sample_count * law.out_dim()));
    }
}

#[test]
fn sampling_is_deterministic() {
    let x = point(3, 1);
    let mut r1 = Rng::new(5);
    let mut r2 = Rng::new(5);
    for _ in 0..10 {
        let a = sample_jet_at(&x, &mut r1);
        let b = sample_jet_at(&x, &mut r2);
        assert_eq!(a.max_diff(&b), 0.0);
    }
}

#[test]
fn field_values_are_left_invariant() {
    use matdist_core::jet::{compose, left_translate_tangent};
    use matdist_core::material::admissible_field_at;
    let n = 2;
    let p = CoefficientVector::new(n).len();
    let mut rng = Rng::new(314);
    for _ in 0..200 {
        let x = DVector::from_fn(n, |_, _| rng.unit());
        let h = sample_jet_at(&x, &mut rng);
        let g = sample_jet_at(&h.y, &mut rng);
        let c = DVector::from_fn(p, |_, _| rng.unit());
        let at_h = admissible_field_at(&h, &c);
        let pushed = left_translate_tangent(&g, &at_h).unwrap();
        let direct = admissible_field_at(&compose(&g, &h).unwrap(), &c);
        let scale = 1.0 + direct.norm_inf();
        assert!((&pushed.dx - &direct.dx).amax() / scale < 1e-10);
        assert!((&pushed.da - &direct.da).amax() / scale < 1e-10);
        assert!((&pushed.db - &direct.db).amax() / scale < 1e-10);
        for j in 0..n {
            for i in 0..n {
                for k in 0..n {
                    assert!(
                        (pushed.dc[(j, i, k)] - direct.dc[(j, i, k)]).abs() / scale < 1e-10
                    );
                }
            }
        }
    }
}
