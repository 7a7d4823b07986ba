use kaczmarz::datagen::{gen_clustered_system, gen_gaussian_system, GenSpec};
use kaczmarz::linalg::{
    condition_number_gram, dot, distance_sq, least_norm_solve, norm2, orthogonality_value, spectral_norm,
};
use kaczmarz::{
    build_cluster_paving, build_random_paving, cluster_rows, solve, DenseMatrix, JlSketch, LinearSystem, Method, RowPaving,
    Solver, SolverConfig,
};
use proptest::prelude::*;

fn matrix(max_rows: usize, max_cols: usize) -> impl Strategy<Value = DenseMatrix> {
    (1..=max_rows, 1..=max_cols).prop_flat_map(|(r, c)| {
        proptest::collection::vec(-10.0f64..10.0, r * c).prop_map(move |d| DenseMatrix::new(r, c, d).unwrap())
    })
}

fn clustered(n: usize, p: usize, k: usize, seed: u64) -> LinearSystem {
    gen_clustered_system(&GenSpec {
        n,
        p,
        k,
        spread: 0.1,
        noise_sigma: 0.0,
        seed,
    })
    .unwrap()
    .system
}

fn assert_partition(paving: &RowPaving, n: usize) {
    let mut seen = vec![0usize; n];
    for b in paving.blocks() {
        assert!(!b.is_empty());
        for &i in b {
            seen[i] += 1;
        }
    }
    assert!(seen.iter().all(|&c| c == 1), "{seen:?}");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn spectral_norm_bounded_by_one_and_inf_norms(m in matrix(8, 8)) {
        let s = spectral_norm(&m).unwrap();
        prop_assert!(s * s <= m.norm_1() * m.norm_inf() * (1.0 + 1e-12) + 1e-300);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn least_norm_solve_reproduces_consistent_rhs(m in matrix(8, 8), seed in any::<u64>()) {
        let z: Vec<f64> = (0..m.n_cols()).map(|j| ((seed >> (j % 60)) & 0xff) as f64 / 64.0 - 2.0).collect();
        let r = m.matvec(&z).unwrap();
        let zp = least_norm_solve(&m, &r).unwrap();
        let back = m.matvec(&zp).unwrap();
        let scale = 1.0 + norm2(&r);
        prop_assert!(distance_sq(&back, &r).sqrt() <= 1e-9 * scale);
    }

    #[test]
    fn orthogonality_value_is_scale_invariant(m in matrix(6, 6), c in prop_oneof![-1e3f64..-1e-3, 1e-3f64..1e3]) {
        prop_assume!(m.n_rows() >= 2 && m.rows().all(|r| norm2(r) > 1e-3));
        let a = orthogonality_value(&m).unwrap();
        let b = orthogonality_value(&m.scaled(c)).unwrap();
        prop_assert!((a - b).abs() <= 1e-12, "{a} vs {b}");
    }

    #[test]
    fn gram_condition_number_at_least_one(m in matrix(6, 6)) {
        if let Ok(c) = condition_number_gram(&m) {
            prop_assert!(c >= 1.0);
        }
    }

    #[test]
    fn clustering_is_reproducible_and_cost_monotone(seed in 0u64..1000, k in 1usize..6) {
        let sys = clustered(120, 10, 4, seed);
        let c1 = cluster_rows(sys.a(), sys.b(), k, seed, 50).unwrap();
        let c2 = cluster_rows(sys.a(), sys.b(), k, seed, 50).unwrap();
        prop_assert_eq!(c1.assignments(), c2.assignments());
        for w in c1.cost_trace().windows(2) {
            prop_assert!(w[1] <= w[0] + 1e-9 * (1.0 + w[0]), "{:?}", c1.cost_trace());
        }
    }

    #[test]
    fn furthest_cluster_ignores_positive_rescaling(seed in 0u64..1000, l in 0usize..4, c in 1e-3f64..1e3) {
        let sys = clustered(80, 8, 4, seed);
        let cl = cluster_rows(sys.a(), sys.b(), 4, seed, 50).unwrap();
        let x: Vec<f64> = (0..8).map(|j| (j as f64 - 3.0) * 0.1).collect();
        let mut rows: Vec<Vec<f64>> = cl.centroids().rows().map(|r| r.to_vec()).collect();
        let mut cb = cl.centroid_b().to_vec();
        rows[l].iter_mut().for_each(|v| *v *= c);
        cb[l] *= c;
        let scaled = kaczmarz::RowClustering::from_parts(cl.assignments().to_vec(), DenseMatrix::from_rows(&rows).unwrap(), cb).unwrap();
        prop_assert_eq!(cl.furthest_cluster(&x).unwrap(), scaled.furthest_cluster(&x).unwrap());
    }

    #[test]
    fn pavings_partition_rows(seed in 0u64..1000, n in 5usize..60, bs in 1usize..8, k in 1usize..5) {
        let sys = clustered(n.max(k), 5, k.min(5), seed);
        let m = sys.n();
        let rp = build_random_paving(sys.a(), bs.min(m), seed).unwrap();
        assert_partition(&rp, m);
        let cl = cluster_rows(sys.a(), sys.b(), k.min(m), seed, 20).unwrap();
        let cp = build_cluster_paving(sys.a(), &cl, seed).unwrap();
        assert_partition(&cp, m);
    }

    #[test]
    fn generation_is_pure_and_consistent(seed in any::<u64>(), n in 4usize..60, p in 2usize..12, k in 1usize..4) {
        let spec = GenSpec { n, p, k: k.min(n).min(p), spread: 0.1, noise_sigma: 0.0, seed };
        let g1 = gen_clustered_system(&spec).unwrap();
        let g2 = gen_clustered_system(&spec).unwrap();
        prop_assert_eq!(&g1, &g2);
        let x = g1.system.x_star().unwrap();
        prop_assert!(g1.system.relative_residual(x) <= 1e-12);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn block_steps_are_non_expansive(seed in 0u64..10_000, cluster in any::<bool>()) {
        let sys = clustered(60, 8, 3, seed);
        let x_star = sys.x_star().unwrap().to_vec();
        let method = if cluster { Method::RkaClusterBlock } else { Method::RkaBlock };
        let cfg = SolverConfig { max_iters: 80, residual_tol: 1e-300, cluster_count: 3, seed, ..SolverConfig::new(method) };
        let mut s = Solver::new(&sys, &cfg).unwrap();
        let mut prev = distance_sq(s.x(), &x_star).sqrt();
        while !s.is_done() {
            s.step().unwrap();
            let now = distance_sq(s.x(), &x_star).sqrt();
            prop_assert!(now <= prev + 1e-12, "{now} > {prev}");
            prev = now;
        }
    }

    #[test]
    fn solvers_started_at_the_solution_stay_there(seed in 0u64..10_000) {
        let sys = clustered(50, 6, 2, seed);
        let x_star = sys.x_star().unwrap().to_vec();
        for method in Method::ALL {
            let cfg = SolverConfig {
                max_iters: 30,
                residual_tol: 1e-300,
                cluster_count: 2,
                seed,
                x0: Some(x_star.clone()),
                ..SolverConfig::new(method)
            };
            let mut s = Solver::new(&sys, &cfg).unwrap();
            while !s.is_done() {
                s.step().unwrap();
                prop_assert!(distance_sq(s.x(), &x_star).sqrt() <= 1e-12, "{method}");
            }
        }
    }

    #[test]
    fn solvers_are_deterministic(seed in 0u64..10_000) {
        let sys = gen_gaussian_system(40, 6, seed).unwrap();
        for method in Method::ALL {
            let cfg = SolverConfig { max_iters: 50, cluster_count: 2, seed, ..SolverConfig::new(method) };
            let a = solve(&sys, &cfg).unwrap();
            let b = solve(&sys, &cfg).unwrap();
            prop_assert_eq!(&a.x, &b.x);
            prop_assert_eq!(
                a.trace.iter().map(|r| (r.iteration, r.residual.to_bits(), r.selected)).collect::<Vec<_>>(),
                b.trace.iter().map(|r| (r.iteration, r.residual.to_bits(), r.selected)).collect::<Vec<_>>()
            );
        }
    }
}

#[test]
fn sketched_inner_product_is_unbiased() {
    let p = 30;
    let u: Vec<f64> = (0..p).map(|j| ((j * 7 % 11) as f64 - 5.0) / 5.0).collect();
    let v: Vec<f64> = (0..p).map(|j| ((j * 3 % 13) as f64 - 6.0) / 6.0).collect();
    let a = DenseMatrix::from_rows(&[u.clone(), v.clone()]).unwrap();
    let samples: Vec<f64> = (0..1000u64)
        .map(|seed| {
            let s = JlSketch::build(&a, 12, seed).unwrap();
            dot(s.sketched_rows().row(0), s.sketched_rows().row(1))
        })
        .collect();
    let mean = kaczmarz::stats::mean(&samples);
    let se = kaczmarz::stats::std_error(&samples);
    let exact = dot(&u, &v);
    assert!((mean - exact).abs() <= 3.0 * se, "mean {mean} vs {exact}, se {se}");
}
