//! Properties of solved homogeneity sections (cocycle, derivative
//! consistency, isomorphism probes) and flow containment of admissible
//! fields.

use matdist_core::dsl::{catalog, parse_components};
use matdist_core::field::{analyze_grid, BodyGrid, Classification, FieldConfig};
use matdist_core::foliation::{
    flow_containment_check, label_leaves, FlowConfig, FoliationConfig, LeafFamily,
};
use matdist_core::homogeneity::{
    homogeneous_section_at, leafwise_homogeneity, solve_homogeneity, HomogeneityOptions,
    HomogeneityVerdict,
};
use matdist_core::jet::compose;
use matdist_core::material::{
    is_material_isomorphism, solve_point, CoefficientVector, SolverConfig,
};
use matdist_core::Error;
use nalgebra::DVector;

fn unit_grid(n: usize, counts: usize) -> BodyGrid {
    BodyGrid::new(
        DVector::from_element(n, 0.0),
        DVector::from_element(n, 1.0),
        vec![counts; n],
    )
    .unwrap()
}

#[test]
fn solved_section_satisfies_the_cocycle_rule() {
    let law = catalog("uniform_frame", 2).unwrap();
    let r = solve_homogeneity(&law, &unit_grid(2, 4), &HomogeneityOptions::default()).unwrap();
    assert_eq!(r.verdict, HomogeneityVerdict::Homogeneous);
    let pts = [
        DVector::from_vec(vec![0.1, 0.2]),
        DVector::from_vec(vec![0.7, 0.4]),
        DVector::from_vec(vec![0.3, 0.9]),
    ];
    let [x, z, y] = pts;
    let first = homogeneous_section_at(&r.ansatz, &x, &z).unwrap();
    let second = homogeneous_section_at(&r.ansatz, &z, &y).unwrap();
    let direct = homogeneous_section_at(&r.ansatz, &x, &y).unwrap();
    let composed = compose(&second, &first).unwrap();
    assert!(
        composed.max_diff(&direct) < 1e-9,
        "cocycle gap {:.3e}",
        composed.max_diff(&direct)
    );
}

#[test]
fn section_second_order_block_matches_finite_differences() {
    let law = catalog("uniform_frame", 2).unwrap();
    let r = solve_homogeneity(&law, &unit_grid(2, 4), &HomogeneityOptions::default()).unwrap();
    let x = DVector::from_vec(vec![0.25, 0.6]);
    let y = DVector::from_vec(vec![0.8, 0.15]);
    let g = homogeneous_section_at(&r.ansatz, &x, &y).unwrap();
    let h = 1e-5;
    for k in 0..2 {
        let mut xp = x.clone();
        let mut yp = y.clone();
        let mut xm = x.clone();
        let mut ym = y.clone();
        xp[k] += h;
        yp[k] += h;
        xm[k] -= h;
        ym[k] -= h;
        let fd = (r.ansatz.eval(&xp, &yp) - r.ansatz.eval(&xm, &ym)) / (2.0 * h);
        for j in 0..2 {
            for i in 0..2 {
                assert!((fd[(j, i)] - g.c[(j, i, k)]).abs() < 1e-6);
            }
        }
    }
}

#[test]
fn homogeneous_sections_are_material_isomorphisms() {
    let law = catalog("uniform_frame", 2).unwrap();
    let opts = HomogeneityOptions::default();
    let r = solve_homogeneity(&law, &unit_grid(2, 4), &opts).unwrap();
    assert_eq!(r.verdict, HomogeneityVerdict::Homogeneous);
    let pairs = [
        (vec![0.0, 0.0], vec![1.0, 1.0]),
        (vec![0.2, 0.9], vec![0.5, 0.5]),
        (vec![1.0, 0.0], vec![0.0, 1.0]),
    ];
    for (from, to) in pairs {
        let g = homogeneous_section_at(
            &r.ansatz,
            &DVector::from_vec(from),
            &DVector::from_vec(to),
        )
        .unwrap();
        let (ok, dev) = is_material_isomorphism(&law, &g, 16, 3, 100.0 * opts.tol_hom).unwrap();
        assert!(ok, "section rejected with deviation {dev:.3e}");
    }
}

#[test]
fn homogeneous_implies_smoothly_uniform() {
    for name in ["uniform_frame", "fgm_axis", "strict_cosserat", "prolonged"] {
        let law = catalog(name, 2).unwrap();
        let grid = unit_grid(2, 3);
        let hom = solve_homogeneity(&law, &grid, &HomogeneityOptions::default()).unwrap();
        if hom.verdict == HomogeneityVerdict::Homogeneous {
            let field = analyze_grid(&law, &grid, &FieldConfig::default()).unwrap();
            assert!(
                field.classification == Classification::SmoothlyUniform
                    || field.classification == Classification::UniformSecondGrade,
                "{name}: homogeneous but classified {:?}",
                field.classification
            );
        }
    }
}

#[test]
fn leaves_of_graded_law_are_homogeneous() {
    let law = catalog("fgm_axis", 2).unwrap();
    let grid = unit_grid(2, 5);
    let field = analyze_grid(&law, &grid, &FieldConfig::default()).unwrap();
    let labeling = label_leaves(&field, LeafFamily::Full, &FoliationConfig::default()).unwrap();
    assert_eq!(labeling.leaf_count, 5);
    let fibres: Vec<_> = field.samples.iter().map(|s| s.base_nh.clone()).collect();
    let reports =
        leafwise_homogeneity(&law, &labeling, &HomogeneityOptions::default(), &fibres).unwrap();
    for (leaf, r) in reports.iter().enumerate() {
        assert_eq!(
            r.verdict,
            HomogeneityVerdict::Homogeneous,
            "leaf {leaf} residual {:.3e}",
            r.residual
        );
        if let Some(dev) = r.section_deviation {
            assert!(dev < 1e-6, "leaf {leaf} section deviation {dev:.3e}");
        }
    }
}

fn theta_vector(n: usize, axis: usize, value: f64) -> DVector<f64> {
    let cols = CoefficientVector::new(n);
    let mut c = DVector::zeros(cols.len());
    c[cols.theta(axis)] = value;
    c
}

#[test]
fn admissible_flow_stays_material() {
    let n = 2;
    let law = catalog("uniform_frame", n).unwrap();
    let x = DVector::from_vec(vec![0.0, 0.0]);
    let box_ = BodyGrid::new(
        DVector::from_element(n, -1.0),
        DVector::from_element(n, 1.0),
        vec![3; n],
    )
    .unwrap();
    let s = solve_point(&law, &x, &SolverConfig::default()).unwrap();
    let c = theta_vector(n, 0, 1.0);
    let check =
        flow_containment_check(&law, &c, &x, &s.null_nh, &box_, 0.5, 20, &FlowConfig::default())
            .unwrap();
    assert!(check.admissibility_gap < 1e-8);
    assert!(
        check.max_deviation <= 1e-8,
        "deviation {:.3e}",
        check.max_deviation
    );
}

#[test]
fn inadmissible_flow_is_detected() {
    let n = 2;
    let law = catalog("fgm_axis", n).unwrap();
    let x = DVector::from_vec(vec![0.0, 0.0]);
    let box_ = BodyGrid::new(
        DVector::from_element(n, -1.0),
        DVector::from_element(n, 1.0),
        vec![3; n],
    )
    .unwrap();
    let s = solve_point(&law, &x, &SolverConfig::default()).unwrap();
    let c = theta_vector(n, 1, 1.0);
    let check =
        flow_containment_check(&law, &c, &x, &s.null_nh, &box_, 0.5, 20, &FlowConfig::default())
            .unwrap();
    assert!(check.admissibility_gap > 0.5);
    assert!(
        check.max_deviation >= 1e-3,
        "negative control too quiet: {:.3e}",
        check.max_deviation
    );
}

#[test]
fn constant_law_flow_never_deviates() {
    let n = 2;
    let law = parse_components("1", n).unwrap();
    let x = DVector::from_vec(vec![0.0, 0.0]);
    let box_ = BodyGrid::new(
        DVector::from_element(n, -1.0),
        DVector::from_element(n, 1.0),
        vec![3; n],
    )
    .unwrap();
    let s = solve_point(&law, &x, &SolverConfig::default()).unwrap();
    let mut c = theta_vector(n, 0, 1.0);
    c[5] = 0.3;
    let check =
        flow_containment_check(&law, &c, &x, &s.null_nh, &box_, 0.5, 10, &FlowConfig::default())
            .unwrap();
    assert_eq!(check.max_deviation, 0.0);
}

#[test]
fn escaping_flow_raises_an_error() {
    let n = 2;
    let law = catalog("uniform_frame", n).unwrap();
    let x = DVector::from_vec(vec![0.0, 0.0]);
    let tiny = BodyGrid::new(
        DVector::from_element(n, -0.1),
        DVector::from_element(n, 0.1),
        vec![2; n],
    )
    .unwrap();
    let s = solve_point(&law, &x, &SolverConfig::default()).unwrap();
    let c = theta_vector(n, 0, 1.0);
    let r = flow_containment_check(&law, &c, &x, &s.null_nh, &tiny, 0.5, 20, &FlowConfig::default());
    assert!(matches!(r, Err(Error::FlowLeftGrid { .. })));
}
