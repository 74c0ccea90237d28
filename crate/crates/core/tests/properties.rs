mod common;

use latpat::analysis::{
    assemble_homogeneous_jacobian, checkerboard_block_union, classify_checkerboard, classify_instability,
    find_homogeneous_fixed_point, find_period_two, Tolerances, Verdict,
};
use latpat::config::{RunConfig, SweepSpec};
use latpat::graph::ContactGraph;
use latpat::model::{CellModel, Characteristic};
use latpat::sim::{min_signed_gap, network_rhs};
use proptest::prelude::*;

use common::*;

fn graph_strategy() -> impl Strategy<Value = ContactGraph> {
    (any::<u64>(), 2usize..=30, 0.0f64..0.4, any::<bool>()).prop_map(|(seed, n, p, bip)| {
        let mut r = rng(seed);
        if bip {
            random_bipartite(&mut r, n, p)
        } else {
            random_connected(&mut r, n, p)
        }
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn walk_matrix_is_stochastic_with_unit_top_eigenvalue(g in graph_strategy()) {
        let spec = g.spectrum().unwrap();
        for i in 0..g.node_count() {
            prop_assert!((spec.p.row(i).sum() - 1.0).abs() <= 1e-12);
        }
        prop_assert!((spec.lambda_max() - 1.0).abs() <= 1e-9);
        prop_assert!(spec.eigenvalues.windows(2).all(|w| w[0] >= w[1]));
        prop_assert!(spec.max_residual() <= 1e-9);
        // trace of P is zero without self-loops
        prop_assert!(spec.eigenvalues.iter().sum::<f64>().abs() <= 1e-9);
    }

    #[test]
    fn bipartite_spectrum_is_symmetric(seed in any::<u64>(), n in 2usize..=20, p in 0.0f64..0.5) {
        let g = random_bipartite(&mut rng(seed), n, p);
        let spec = g.spectrum().unwrap();
        let mut neg: Vec<f64> = spec.eigenvalues.iter().map(|l| -l).collect();
        neg.reverse();
        prop_assert!(max_abs_diff(&neg, &spec.eigenvalues) <= 1e-9);
        prop_assert!((spec.lambda_min() + 1.0).abs() <= 1e-9);
    }

    #[test]
    fn bipartition_matches_bfs(g in graph_strategy()) {
        let oracle = two_colour(&g);
        prop_assert_eq!(g.bipartition().is_some(), oracle.is_some());
        if let (Some(bp), Some(side)) = (g.bipartition(), oracle) {
            let member = bp.membership(g.node_count());
            for &(i, j) in g.edges() {
                prop_assert_ne!(member[i], member[j]);
                prop_assert_ne!(side[i], side[j]);
            }
            prop_assert_eq!(bp.set_i.len() + bp.set_i_prime.len(), g.node_count());
        }
    }

    #[test]
    fn edge_list_round_trips(g in graph_strategy()) {
        prop_assert_eq!(ContactGraph::parse_edge_list(&g.to_edge_list()).unwrap(), g);
    }

    #[test]
    fn kronecker_assembly_matches_cellwise_jacobian(seed in any::<u64>(), cells in 2usize..=7, n in 1usize..=3) {
        let mut r = rng(seed);
        let g = random_connected(&mut r, cells, 0.3);
        let lin = random_lin(&mut r, n, 1);
        let p = walk_matrix(&g);
        let lib = assemble_homogeneous_jacobian(&p, &lin.a, &lin.b, &lin.c).unwrap();
        let direct = network_jacobian(&p, &vec![&lin; cells]);
        prop_assert!((lib - direct).amax() <= 1e-14);
    }

    #[test]
    fn block_union_has_full_multiplicity(seed in any::<u64>(), cells in 2usize..=10, n in 1usize..=3) {
        let mut r = rng(seed);
        let g = random_bipartite(&mut r, cells, 0.4);
        let bp = g.bipartition().unwrap();
        let (l1, l2) = (random_lin(&mut r, n, 1), random_lin(&mut r, n, 1));
        let spec = g.spectrum().unwrap();
        let union = checkerboard_block_union(&spec.eigenvalues, &bp, &l1, &l2).unwrap();
        prop_assert_eq!(union.len(), cells * n);
        let side = bp.membership(cells);
        let lins: Vec<_> = side.iter().map(|&s| if s { &l1 } else { &l2 }).collect();
        let d = matching_distance(&eig(&network_jacobian(&walk_matrix(&g), &lins)), &union);
        prop_assert!(d <= 1e-6, "distance {}", d);
    }

    #[test]
    fn homogeneous_state_is_network_steady_state(a in 0.5f64..20.0, p in 1.0f64..4.0, g in graph_strategy()) {
        let m = latpat::model::Cascade::new(
            vec![1.0, 1.0],
            vec![
                latpat::model::Stage::Hill(latpat::model::HillParams::inhibiting(a, 1.0, p).unwrap()),
                latpat::model::Stage::Linear { slope: 1.0 },
            ],
        ).unwrap();
        let hs = find_homogeneous_fixed_point(&Characteristic::new(&m), &Tolerances::default()).unwrap();
        let x: Vec<f64> = (0..g.node_count()).flat_map(|_| hs.x_star.clone()).collect();
        let f = network_rhs(&g, &m, &x).unwrap();
        prop_assert!(f.iter().all(|v| v.abs() <= 1e-9));
        // T nonincreasing and T(u*) = u*
        prop_assert!(hs.t_prime[(0, 0)] <= 0.0);
    }

    #[test]
    fn orbit_exists_iff_slope_exceeds_one(a in 0.5f64..20.0) {
        // T(u) = a/(1+u^2): a nontrivial period-two orbit appears once |T'(u*)| > 1
        let m = square_cascade(a);
        let c = Characteristic::new(&m);
        let tol = Tolerances::default();
        let hs = find_homogeneous_fixed_point(&c, &tol).unwrap();
        prop_assume!((hs.rho - 1.0).abs() > 1e-3);
        let orbit = find_period_two(&c, &tol).unwrap();
        prop_assert_eq!(orbit.is_some(), hs.rho > 1.0);
        if let Some(o) = orbit {
            // u1 u2 = 1 and u1 + u2 = a on this family
            prop_assert!((o.u1[0] * o.u2[0] - 1.0).abs() <= 1e-8);
            prop_assert!((o.u1[0] + o.u2[0] - a).abs() <= 1e-8);
            prop_assert!(o.residual <= 1e-10);
            prop_assert!((o.rho_product - 4.0 / (a * a)).abs() <= 1e-8);
        }
    }

    #[test]
    fn characteristic_derivative_matches_differences(frac in 0.05f64..0.95, a in 1.0f64..10.0) {
        // inputs range over outputs, which lie in [0, a]
        let u = frac * a;
        let m = square_cascade(a);
        let c = Characteristic::new(&m);
        let h = 1e-5;
        let fd = (c.t(&[u + h]).unwrap()[0] - c.t(&[u - h]).unwrap()[0]) / (2.0 * h);
        let exact = -2.0 * a * u / (1.0 + u * u).powi(2);
        let analytic = c.t_prime(&[u]).unwrap()[(0, 0)];
        prop_assert!((analytic - exact).abs() <= 1e-9 * exact.abs().max(1.0));
        prop_assert!((fd - exact).abs() <= 1e-6 * exact.abs().max(1e-3));
    }

    #[test]
    fn verdict_margins_have_the_right_sign(l in -1.0f64..1.0, rho in 0.0f64..5.0) {
        let (v, margin) = classify_instability(l, rho, 1e-9);
        prop_assert!((margin - (-1.0 - l * rho)).abs() <= 1e-15);
        match v {
            Verdict::Unstable => prop_assert!(margin > 0.0),
            Verdict::CriterionNotMet => prop_assert!(margin < 0.0),
            Verdict::Inconclusive => prop_assert!(margin.abs() < 1e-9),
            Verdict::Stable => prop_assert!(false, "instability test never says stable"),
        }
        let (v, margin) = classify_checkerboard(rho, 1e-9);
        prop_assert_eq!(v == Verdict::Stable, margin >= 1e-9);
    }

    #[test]
    fn signed_gap_is_antisymmetric(seed in any::<u64>(), len in 1usize..12) {
        use rand::Rng;
        let mut r = rng(seed);
        let a: Vec<f64> = (0..len).map(|_| r.random_range(-1.0..1.0)).collect();
        let signs: Vec<f64> = (0..len).map(|_| if r.random::<bool>() { 1.0 } else { -1.0 }).collect();
        let (_, self_gap) = min_signed_gap(&signs, &a, &a);
        prop_assert_eq!(self_gap, 0.0);
        let b: Vec<f64> = a.iter().zip(&signs).map(|(x, s)| x + s * r.random_range(0.0..1.0)).collect();
        prop_assert!(min_signed_gap(&signs, &a, &b).1 >= 0.0);
        let flipped: Vec<f64> = signs.iter().map(|s| -s).collect();
        prop_assert!(min_signed_gap(&flipped, &a, &b).1 <= 0.0);
    }

    #[test]
    fn sweep_values_are_evenly_spaced(lo in -10.0f64..10.0, width in 0.0f64..10.0, steps in 1usize..50) {
        let s = SweepSpec { key: "k".into(), lo, hi: lo + width, steps };
        let v = s.values();
        prop_assert_eq!(v.len(), steps);
        prop_assert_eq!(v[0], lo);
        if steps > 1 {
            prop_assert!((v[steps - 1] - (lo + width)).abs() <= 1e-12);
        }
    }
}

#[test]
fn notch_model_invariants() {
    let m = notch();
    let c = Characteristic::new(&m);
    let hs = find_homogeneous_fixed_point(&c, &Tolerances::default()).unwrap();
    // x3 relaxes to beta/gamma and y = (x2, x1)
    assert!((hs.x_star[2] - m.x3_star()).abs() <= 1e-9);
    let mut y = vec![0.0; 2];
    m.output(&hs.x_star, &mut y);
    assert_eq!(y, vec![hs.x_star[1], hs.x_star[0]]);
    assert!(max_abs_diff(&y, &hs.u_star) <= 1e-9);
    // T' is entrywise nonpositive: inputs and outputs share the orthant
    assert!(hs.t_prime.iter().all(|&v| v <= 1e-12));
}

#[test]
fn config_overrides_round_trip() {
    let text = std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/../../configs/cascade.toml")).unwrap();
    let cfg = RunConfig::from_toml_str(&text).unwrap();
    let back = RunConfig::from_table(cfg.to_table().unwrap()).unwrap();
    assert_eq!(back, cfg);
    let swept = cfg.with_value("model.gammas[1]", 2.0).unwrap();
    assert_ne!(swept, cfg);
    assert!(cfg.with_value("model.gammas[7]", 2.0).is_err());
    assert!(cfg.with_value("model.stages[0].p", 0.5).is_err());
}
