use proptest::prelude::*;

use sbm_embed::family::ETA_TOL;
use sbm_embed::{
    classify, edge_density, embed, eta_alt, eta_of, family_of, member_at, predict_baseline, predict_interpolated,
    sample_members, Family, Graphon, RegionTag,
};

/// Strict middle-regime graphons away from the regime boundaries and from q = 1/2.
fn middle_graphon() -> impl Strategy<Value = Graphon> {
    (0.2f64..0.8, 0.05f64..0.95, 0.05f64..0.95, 0.05f64..0.95)
        .prop_filter("strict middle regime", |&(_, p, q, r)| {
            let reg = classify(p, q, r, 1e-3).unwrap();
            reg.tag == RegionTag::Middle && !reg.boundary_dense && !reg.boundary_sparse && (q - 0.5).abs() > 0.02
        })
        .prop_map(|(a, p, q, r)| Graphon::new(a, p, q, r).unwrap())
}

fn family(g: &Graphon) -> Family {
    family_of(&embed(g).unwrap().gram, g.a).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn members_share_the_gram(g in middle_graphon()) {
        let f = family(&g);
        let mut total = 0.0;
        for j in 0..20 {
            let m = member_at(&f, f.delta_min * j as f64 / 20.0).unwrap();
            total += embed(&m).unwrap().gram.max_abs_diff(&f.gram);
        }
        prop_assert!(total / 20.0 <= 1e-4);
    }

    #[test]
    fn eta_forms_agree_on_interior_members(g in middle_graphon()) {
        let f = family(&g);
        for (delta, m) in sample_members(&f, 9).unwrap() {
            if delta == 0.0 || delta == f.delta_min {
                continue;
            }
            let e1 = eta_of(&f.gram, f.a).unwrap();
            let e2 = eta_alt(&f.gram, &m).unwrap();
            prop_assert!((e1 - e2).abs() <= 1e-8, "{} vs {} at delta {}", e1, e2, delta);
        }
    }

    #[test]
    fn anchor_is_densest_and_density_is_monotone(g in middle_graphon()) {
        let f = family(&g);
        let members = sample_members(&f, 15).unwrap();
        prop_assert!(members.iter().all(|(_, m)| m.p <= f.anchor.p + 1e-15));
        if f.density_slope().abs() > ETA_TOL {
            let dens: Vec<f64> = members.iter().map(|(_, m)| edge_density(m)).collect();
            prop_assert!(dens.windows(2).all(|w| w[1] < w[0]), "{:?}", dens);
        }
        // sign coherence
        prop_assert_eq!(f.gram.k2 <= 0.0, f.s_fam > 0.0);
        prop_assert_eq!(f.gram.k2 < 0.0, f.anchor.q < 0.5);
    }

    #[test]
    fn baseline_is_a_fixed_point(g in middle_graphon()) {
        let k = embed(&g).unwrap().gram;
        let [p, q, r] = predict_baseline(&k);
        let again = predict_baseline(&embed(&Graphon::new(g.a, p, q, r).unwrap()).unwrap().gram);
        for (x, y) in [p, q, r].iter().zip(again) {
            prop_assert!((x - y).abs() < 1e-6);
        }
    }

    #[test]
    fn interpolation_preserves_the_representation(g in middle_graphon(), t in 0.0f64..=1.0) {
        let k = embed(&g).unwrap().gram;
        let (m, _) = predict_interpolated(&k, g.a, &g, t).unwrap();
        let km = embed(&m).unwrap().gram;
        prop_assert!(km.max_abs_diff(&k) < 1e-5, "{:?} vs {:?}", km, k);
    }
}
