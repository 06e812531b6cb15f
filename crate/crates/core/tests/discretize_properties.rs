use proptest::prelude::*;

use hardgrid::discretize::{
    build_graph, canonical_allocate, degree_bound, discretization_error_factor, CanonicalPointSet, ExplicitPointSet,
    PointSet,
};
use hardgrid::model::{Fugacities, InteractionMatrix, ModelSpec, Region};
use hardgrid::rng;
use rand::Rng;

fn pairwise_model(d: usize, ell: f64, q: usize, dist: &[f64]) -> ModelSpec {
    let mut m = vec![0.0; q * q];
    let mut k = 0;
    for i in 0..q {
        for j in i..q {
            m[i * q + j] = dist[k];
            m[j * q + i] = dist[k];
            k += 1;
        }
    }
    ModelSpec::new(Region::new(d, ell).unwrap(), InteractionMatrix::new(q, m).unwrap(), Fugacities::new(vec![1.0; q]).unwrap())
        .unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn random_graphs_match_all_pairs(
        d in 1usize..=3,
        q in 1usize..=3,
        n in 1usize..=200,
        dist in prop::collection::vec(0.0f64..0.6, 6),
        seed in any::<u64>(),
    ) {
        let model = pairwise_model(d, 1.0, q, &dist);
        let pts = ExplicitPointSet::random(model.region().clone(), n, seed);
        let hc = build_graph(&model, &PointSet::Explicit(pts.clone())).unwrap();
        let g = hc.to_graph();
        prop_assert_eq!(g.num_vertices(), q * n);
        let lam = model.interaction();
        let mut expected = 0;
        for x in 0..n {
            for y in 0..n {
                let d2: f64 = pts.point(x).iter().zip(pts.point(y)).map(|(a, b)| (a - b) * (a - b)).sum();
                for i in 0..q {
                    for j in 0..q {
                        let (u, v) = (hc.vertex(x, i), hc.vertex(y, j));
                        if u >= v {
                            continue;
                        }
                        let t = lam.get(i, j);
                        let edge = d2 < t * t;
                        expected += usize::from(edge);
                        prop_assert_eq!(g.has_edge(u, v), edge, "x {} y {} types {} {}", x, y, i, j);
                        prop_assert_eq!(g.has_edge(v, u), edge);
                    }
                }
            }
        }
        prop_assert_eq!(g.num_edges(), expected);
    }

    #[test]
    fn canonical_vertex_count(d in 1usize..=3, q in 1usize..=3, cells in 1u64..=12, r in 0.0f64..0.3) {
        let model = pairwise_model(d, 1.0, q, &[2.0 * r; 6]);
        let grid = CanonicalPointSet::with_cells_per_axis(model.region().clone(), cells).unwrap();
        let hc = build_graph(&model, &PointSet::Canonical(grid)).unwrap();
        prop_assert_eq!(hc.num_vertices() as u64, q as u64 * cells.pow(d as u32));
    }

    #[test]
    fn degree_bounds_hold_when_flagged(d in 1usize..=2, q in 1usize..=2, cells in 4u64..=60, dist in prop::collection::vec(0.3f64..1.2, 3), gamma in 0.5f64..4.0) {
        let model = pairwise_model(d, 3.0, q, &dist);
        let grid = CanonicalPointSet::with_cells_per_axis(model.region().clone(), cells).unwrap();
        let bound = degree_bound(&model, grid.resolution(), gamma);
        prop_assume!(bound.valid);
        let hc = build_graph(&model, &PointSet::Canonical(grid.clone())).unwrap();
        for x in 0..grid.len() {
            for i in 0..q {
                for j in 0..q {
                    prop_assert!(hc.type_degree(x, i, j) as f64 <= bound.bounds[i * q + j]);
                }
            }
        }
    }

    #[test]
    fn error_factor_monotone(n in 1000.0f64..1e6, dn in 0.0f64..1e6, delta in 0.0f64..0.25, dd in 0.0f64..0.25, eps in 0.0f64..0.1, de in 0.0f64..0.1) {
        let model = ModelSpec::hard_sphere(2, 2.0, 0.2, 0.5).unwrap();
        let f = |n: f64, delta: f64, eps: f64| discretization_error_factor(&model, n, delta, eps).unwrap();
        let base = f(n, delta, eps);
        prop_assert!(f(n, delta + dd, eps) >= base);
        prop_assert!(f(n, delta, eps + de) >= base);
        prop_assert!(f(n + dn, delta, eps) <= base);
    }
}

#[test]
fn canonical_allocation_is_within_a_cell() {
    let mut r = rng::stream(1, rng::domain::TRIAL, 0);
    for d in 1..=3 {
        for rho in [1.0, 3.0, 10.0, 37.0] {
            let region = Region::new(d, 2.0).unwrap();
            let grid = CanonicalPointSet::new(region, rho).unwrap();
            for _ in 0..10_000 {
                let y: Vec<f64> = (0..d).map(|_| r.random::<f64>() * 2.0).collect();
                let x = canonical_allocate(&y, rho);
                let d2: f64 = y.iter().zip(&x).map(|(a, b)| (a - b) * (a - b)).sum();
                assert!(d2.sqrt() <= (d as f64).sqrt() / rho + 1e-12);
                // the preimage of each point is one box of volume vol / |X|
                assert!(x.iter().zip(&y).all(|(a, b)| a <= b && b - a < 1.0 / rho + 1e-12));
            }
            let cell = rho.powi(-(d as i32));
            assert!((cell - 2f64.powi(d as i32) / grid.len() as f64).abs() < 1e-12);
        }
    }
}
