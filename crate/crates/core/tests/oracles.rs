mod common;

use num_rational::BigRational;

use cutcert::certify::{make_paired_instance, PAIRING_TOLERANCE};
use cutcert::conic::SolverSettings;
use cutcert::cover::{fcc_restricted, mc_restricted};
use cutcert::graph::{cut_incidence, kneser_graph, laplacian_adjoint, SymMatrix, WeightedGraph};
use cutcert::pipeline::kneser_mc;
use cutcert::sampling::{sample_hyperplane_shores, Rng, ALPHA_GW};
use cutcert::sanitize::representation_sanitize;

use common::{all_shores, brute_mc, dyadic, petersen_by_hand, random_graph, rational, rational_fcc, rng, to_f64};

fn q(num: i64, den: i64) -> BigRational {
    BigRational::new(num.into(), den.into())
}

fn unit_fcc(g: &WeightedGraph) -> BigRational {
    rational_fcc(g, &vec![rational(1.0); g.m()])
}

#[test]
fn exact_oracle_known_values() {
    assert_eq!(unit_fcc(&WeightedGraph::complete(3)), q(3, 2));
    assert_eq!(unit_fcc(&WeightedGraph::complete(4)), q(3, 2));
    assert_eq!(unit_fcc(&WeightedGraph::cycle(5)), q(5, 4));
    assert_eq!(unit_fcc(&WeightedGraph::unweighted(4, [(0, 1), (0, 2), (0, 3)]).unwrap()), q(1, 1));
    assert_eq!(brute_mc(&WeightedGraph::cycle(5), &[1.0; 5]), 4.0);
    assert_eq!(brute_mc(&WeightedGraph::complete(4), &[1.0; 6]), 4.0);
}

#[test]
fn petersen_constructions_agree() {
    assert_eq!(petersen_by_hand().edges().len(), 15);
    let a = WeightedGraph::petersen();
    let b = petersen_by_hand();
    assert_eq!(brute_mc(&a, &[1.0; 15]), 12.0);
    assert_eq!(brute_mc(&b, &[1.0; 15]), 12.0);
    assert_eq!(a.degrees(), vec![3; 10]);
    assert_eq!(unit_fcc(&a), unit_fcc(&b));
}

#[test]
fn kneser_formula_matches_enumeration() {
    for n in 4..=6 {
        let g = kneser_graph(n);
        assert_eq!(kneser_mc(n).unwrap() as f64, brute_mc(&g, &vec![1.0; g.m()]), "n = {n}");
    }
}

#[test]
fn restricted_solvers_match_oracles_on_full_enumeration() {
    let mut r = rng(31);
    for trial in 0..60 {
        let n = 2 + trial % 5;
        let g = random_graph(n, &mut r);
        let w = dyadic(g.m(), &mut r, true);
        let z = dyadic(g.m(), &mut r, trial % 3 == 0);
        let f = all_shores(n);
        assert_eq!(mc_restricted(&f, &g, &w).unwrap().1, brute_mc(&g, &w));
        let exact = to_f64(&rational_fcc(&g, &z.iter().map(|v| rational(*v)).collect::<Vec<_>>()));
        let cover = fcc_restricted(&f, &g, &z).unwrap().feasible().unwrap();
        assert!((cover.value - exact).abs() <= 1e-9 * exact.max(1.0), "trial {trial}: {} vs {exact}", cover.value);
    }
}

#[test]
fn expected_cut_beats_the_gw_fraction() {
    let g = WeightedGraph::complete(3);
    let y = SymMatrix::from_row_slice(3, 3, &[1.0, -0.5, -0.5, -0.5, 1.0, -0.5, -0.5, -0.5, 1.0]);
    let rep = representation_sanitize(&y, &g, &[1.0; 3], 0.0).unwrap();
    let t = 100_000;
    let shores = sample_hyperplane_shores(&rep.r, t, &mut Rng::new(12));
    let mut freq = [0.0; 3];
    for s in shores.shores() {
        for (f, x) in freq.iter_mut().zip(cut_incidence(&g, s).unwrap()) {
            *f += x / t as f64;
        }
    }
    let target: Vec<f64> = laplacian_adjoint(&g, &y).unwrap().iter().map(|v| ALPHA_GW * 0.25 * v).collect();
    for (p, bound) in freq.iter().zip(&target) {
        let se = (p * (1.0 - p) / t as f64).sqrt();
        assert!(*p >= bound - 3.0 * se, "{p} < {bound}");
        assert!((p - 2.0 / 3.0).abs() <= 3.0 * se + 1e-3);
    }
}

#[test]
fn pairing_threshold_only_drops_small_entries() {
    let mut r = rng(3);
    for _ in 0..5 {
        let g = random_graph(7, &mut r);
        let w = dyadic(g.m(), &mut r, false);
        let gamma = 0.05;
        let paired = make_paired_instance(&g, &w, gamma, &SolverSettings::with_tolerance(PAIRING_TOLERANCE)).unwrap();
        let sol = paired.solve.as_ref().unwrap();
        let y = cutcert::linalg::unsvec(&sol.y, g.n());
        let raw: Vec<f64> = laplacian_adjoint(&g, &y).unwrap().iter().map(|v| 0.25 * v).collect();
        let top = raw.iter().fold(0.0_f64, |a, &b| a.max(b));
        for (z, r) in paired.z.iter().zip(&raw) {
            if *r > gamma * top {
                assert_eq!(z, r);
            } else {
                assert_eq!(*z, 0.0);
            }
        }
        assert!((paired.mu - 1.0).abs() <= 1e-4);
    }
}

#[test]
fn zero_weights_pair_to_zero() {
    let g = WeightedGraph::complete(4);
    let paired = make_paired_instance(&g, &[0.0; 6], 1e-6, &SolverSettings::default()).unwrap();
    assert_eq!((paired.rho, paired.mu), (0.0, 0.0));
    assert!(paired.z.iter().all(|z| *z == 0.0));
}
