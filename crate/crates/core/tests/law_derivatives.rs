//! The forward-mode gradients of parsed laws against central differences
//! over the packed jet coordinates.

use matdist_core::dsl::{catalog, evaluate, parse_components, CoordLayout, LawExpr, CATALOG_NAMES};
use matdist_core::jet::Jet;
use matdist_core::material::sample_jet_at;
use matdist_core::rng::Rng;
use matdist_core::tensor::Tensor3;
use nalgebra::{DMatrix, DVector};

fn unpack(layout: CoordLayout, coords: &[f64]) -> Jet {
    let n = layout.n;
    Jet {
        x: DVector::from_fn(n, |i, _| coords[layout.x(i)]),
        y: DVector::from_fn(n, |j, _| coords[layout.y(j)]),
        a: DMatrix::from_fn(n, n, |j, i| coords[layout.a(j, i)]),
        b: DMatrix::from_fn(n, n, |j, i| coords[layout.b(j, i)]),
        c: Tensor3::from_fn(n, |j, i, k| coords[layout.c(j, i, k)]),
    }
}

fn check_law(law: &LawExpr, jets: usize, seed: u64) {
    let n = law.n;
    let layout = CoordLayout::new(n);
    let mut rng = Rng::new(seed);
    let h = 1e-5;
    for _ in 0..jets {
        let x = DVector::from_fn(n, |_, _| rng.unit());
        let g = sample_jet_at(&x, &mut rng);
        let ev = evaluate(law, &g).unwrap();
        let coords = layout.pack(&g);
        for slot in 0..layout.total() {
            let mut plus = coords.clone();
            let mut minus = coords.clone();
            plus[slot] += h;
            minus[slot] -= h;
            let vp = evaluate(law, &unpack(layout, &plus)).unwrap().value;
            let vm = evaluate(law, &unpack(layout, &minus)).unwrap().value;
            for a in 0..law.out_dim() {
                let fd = (vp[a] - vm[a]) / (2.0 * h);
                let exact = ev.gradient(a)[slot];
                let scale = 1.0 + exact.abs();
                assert!(
                    (fd - exact).abs() / scale < 1e-6,
                    "slot {slot} component {a}: fd {fd} vs {exact}"
                );
            }
        }
    }
}

#[test]
fn catalog_laws_match_central_differences() {
    for name in CATALOG_NAMES {
        for n in [2usize, 3] {
            let law = catalog(name, n).unwrap();
            check_law(&law, 8, 0x1234 + n as u64);
        }
    }
}

#[test]
fn nonlinear_law_matches_central_differences() {
    let law = parse_components(
        "sin(x[1]) * yA[1][2] + exp(yB[2][2] / 2.0) - yC[2][1][2]^3 ; sqrt(yA[1][1]^2 + 4.0)",
        2,
    )
    .unwrap();
    check_law(&law, 25, 99);
}

#[test]
fn row_scaling_preserves_gradient_direction() {
    let law = catalog("strict_cosserat", 2).unwrap();
    let text = (1..=2)
        .flat_map(|j| (1..=2).map(move |i| format!("2.0 * (yA[{j}][{i}] - yB[{j}][{i}])")))
        .collect::<Vec<_>>()
        .join(" ; ");
    let doubled = parse_components(&text, 2).unwrap();
    let mut rng = Rng::new(17);
    let x = DVector::from_fn(2, |_, _| rng.unit());
    let g = sample_jet_at(&x, &mut rng);
    let e1 = evaluate(&law, &g).unwrap();
    let e2 = evaluate(&doubled, &g).unwrap();
    for a in 0..law.out_dim() {
        for (u, v) in e1.gradient(a).iter().zip(e2.gradient(a)) {
            assert!((2.0 * u - v).abs() < 1e-12);
        }
    }
}
