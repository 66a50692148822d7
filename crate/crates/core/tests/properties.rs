use lipreg_core::ann::build_index;
use lipreg_core::bounds::{self, BoundParams};
use lipreg_core::extension::{build_predictor, exact_extension, extend_from};
use lipreg_core::net::{build_net, NetHierarchy};
use lipreg_core::solver::{self, PackingCoveringProgram, SparseMatrix, Status};
use lipreg_core::spanner::build_spanner;
use lipreg_core::srm::smooth_certificate;
use lipreg_core::*;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};

fn plane(points: &[(f64, f64)]) -> Dataset<Minkowski> {
    let pts = points.iter().map(|&(a, b)| vec![a, b]).collect();
    Dataset::new(Minkowski(Norm::L2), pts, vec![0.0; points.len()]).unwrap()
}

fn points(max: usize) -> impl Strategy<Value = Vec<(f64, f64)>> {
    prop::collection::vec((0.0..1.0f64, 0.0..1.0f64), 2..max)
}

fn report() -> bounds::RiskReport {
    let p = BoundParams::new(10, 1.0, Loss::Absolute, 1.0, 0.05, 0.1).unwrap();
    bounds::total_bound(0.0, &p, 0.1).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn net_is_separated_and_covering(pts in points(60), radius in 0.01..0.8f64) {
        let d = plane(&pts);
        let net = build_net(&d, radius);
        for (a, &i) in net.iter().enumerate() {
            for &j in &net[a + 1..] {
                prop_assert!(d.dist(i, j) > radius);
            }
        }
        for x in 0..d.len() {
            prop_assert!(net.iter().any(|&z| d.dist(x, z) <= radius));
        }
    }

    #[test]
    fn hierarchy_levels_nest(pts in points(60)) {
        let d = plane(&pts);
        let h = NetHierarchy::build(d.len(), |a, b| d.dist(a, b));
        for level in 0..h.top_level() {
            let upper = h.members(level + 1);
            prop_assert!(upper.iter().all(|z| h.members(level).contains(z)));
        }
        for level in 0..=h.top_level() {
            let r = h.radius(level);
            let m = h.members(level);
            for x in 0..d.len() {
                prop_assert!(m.iter().any(|&z| d.dist(x, z) <= r));
            }
            for (a, &i) in m.iter().enumerate() {
                for &j in &m[a + 1..] {
                    prop_assert!(d.dist(i, j) > r);
                }
            }
        }
        for x in 0..d.len() {
            if let (Some(t), Some(p)) = (h.item_top(x), h.parent(x)) {
                prop_assert!(h.members(t + 1).contains(&p));
                prop_assert!(d.dist(x, p) <= h.radius(t + 1));
            }
        }
    }

    #[test]
    fn ann_matches_linear_scan(pts in points(80), eps in 0.01..0.5f64, qx in 0.0..1.0f64, qy in 0.0..1.0f64) {
        let d = plane(&pts);
        let subset: Vec<usize> = (0..d.len()).step_by(2).collect();
        let index = build_index(&d, &subset, eps).unwrap();
        let x = vec![qx, qy];
        let (id, got) = index.query(&x);
        let best = subset.iter().map(|&i| d.dist_to(&x, i)).fold(f64::INFINITY, f64::min);
        prop_assert!(subset.contains(&id));
        prop_assert!(got <= (1.0 + eps) * best + 1e-12);
    }

    #[test]
    fn extension_keeps_the_lipschitz_constant(
        pts in points(30),
        values in prop::collection::vec(0.0..1.0f64, 30),
        qx in -0.5..1.5f64,
        qy in -0.5..1.5f64,
    ) {
        let d = plane(&pts);
        let n = d.len();
        let values = &values[..n];
        let mut lip = 0.0f64;
        for i in 0..n {
            for j in 0..n {
                if d.dist(i, j) > 0.0 {
                    lip = lip.max((values[i] - values[j]).abs() / d.dist(i, j));
                }
            }
        }
        let x = vec![qx, qy];
        let y = exact_extension(&d, values, &x);
        for i in 0..n {
            prop_assert!((y - values[i]).abs() <= lip * d.dist_to(&x, i) + 1e-9);
        }
    }

    #[test]
    fn solver_answers_are_verifiable(seed in any::<u64>(), beta in 0.05..0.5f64) {
        let mut r = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let d = r.gen_range(1..8);
        let rows = |r: &mut rand_chacha::ChaCha8Rng, m: usize| -> Vec<Vec<(usize, f64)>> {
            (0..m)
                .map(|_| (0..d).filter_map(|j| r.gen_bool(0.6).then(|| (j, r.gen_range(0.1..1.0)))).collect())
                .collect()
        };
        let (mp, mc) = (r.gen_range(1..8), r.gen_range(1..8));
        let prows = rows(&mut r, mp);
        let crows: Vec<Vec<(usize, f64)>> = rows(&mut r, mc).into_iter().filter(|row| !row.is_empty()).collect();
        let p: Vec<f64> = prows.iter().map(|_| r.gen_range(0.1..2.0)).collect();
        let c: Vec<f64> = crows.iter().map(|_| r.gen_range(0.0..2.0)).collect();
        let prog = PackingCoveringProgram::new(
            SparseMatrix::from_rows(d, &prows), p.clone(), SparseMatrix::from_rows(d, &crows), c.clone(), beta,
        ).unwrap();
        let dot = |row: &[(usize, f64)], x: &[f64]| row.iter().map(|&(j, a)| a * x[j]).sum::<f64>();
        match solver::solve(&prog).unwrap().status {
            Status::Feasible(x) => {
                prop_assert!(x.iter().all(|v| *v >= 0.0));
                for (row, rhs) in prows.iter().zip(&p) {
                    prop_assert!(dot(row, &x) <= (1.0 + beta) * rhs * (1.0 + 1e-12));
                }
                for (row, rhs) in crows.iter().zip(&c) {
                    prop_assert!(dot(row, &x) >= *rhs);
                }
            }
            Status::Infeasible(cert) => {
                prop_assert!(cert.packing.iter().chain(&cert.covering).all(|v| *v >= 0.0));
                let mut up = vec![0.0; d];
                for (row, u) in prows.iter().zip(&cert.packing) {
                    for &(j, a) in row {
                        up[j] += u * a;
                    }
                }
                for (row, z) in crows.iter().zip(&cert.covering) {
                    for &(j, a) in row {
                        up[j] -= z * a;
                    }
                }
                prop_assert!(up.iter().all(|g| *g >= -1e-12));
                let pu: f64 = p.iter().zip(&cert.packing).map(|(a, b)| a * b).sum();
                let cz: f64 = c.iter().zip(&cert.covering).map(|(a, b)| a * b).sum();
                prop_assert!(pu < cz);
            }
        }
    }

    #[test]
    fn invert_eps_falls_with_n(n in 2u64..1_000_000_000, lip in 0.0..10.0f64, ddim in 0.0..3.0f64, q in 1u32..=2) {
        let loss = Loss::from_exponent(q).unwrap();
        let p = BoundParams::new(n, lip, loss, ddim, 0.05, 0.0).unwrap();
        prop_assert!(bounds::invert_eps(&p.with_n(2 * n)) <= bounds::invert_eps(&p));
    }

    #[test]
    fn normalizing_twice_changes_nothing(pts in points(40)) {
        let once = plane(&pts).normalize_diameter().unwrap();
        prop_assert!((once.diameter().unwrap() - 1.0).abs() < 1e-12);
        let twice = plane(&pts).normalize_diameter().unwrap().normalize_diameter().unwrap();
        for i in 0..once.len() {
            for j in 0..once.len() {
                prop_assert!((once.dist(i, j) - twice.dist(i, j)).abs() < 1e-12);
            }
        }
    }
}

fn line(xs: &[f64], ys: &[f64]) -> Dataset<Minkowski> {
    Dataset::new(Minkowski(Norm::L2), xs.iter().map(|&x| vec![x]).collect(), ys.to_vec()).unwrap()
}

#[test]
fn certificate_of_a_lipschitz_hypothesis_is_itself() {
    let xs: Vec<f64> = (0..50).map(|i| i as f64 / 49.0).collect();
    let values: Vec<f64> = xs.iter().map(|x| 0.2 + 0.5 * x).collect();
    let d = line(&xs, &values);
    let h = Hypothesis::from_parts(values, 0.5, Loss::Absolute, 0.1, report()).unwrap();
    let cert = smooth_certificate(&d, &h);
    assert!(cert.sup_distance <= 1e-12);
    assert!(cert.lipschitz <= cert.budget + 1e-12);
}

#[test]
fn a_spike_breaks_the_certificate() {
    let xs: Vec<f64> = (0..50).map(|i| i as f64 / 49.0).collect();
    let mut values: Vec<f64> = xs.iter().map(|x| 0.2 + 0.5 * x).collect();
    values[25] += 0.3;
    let d = line(&xs, &values);
    let h = Hypothesis::from_parts(values, 0.5, Loss::Absolute, 0.1, report()).unwrap();
    assert!(smooth_certificate(&d, &h).sup_distance > 0.1);
}

#[test]
fn two_point_extension() {
    let d = line(&[0.0, 1.0], &[0.2, 0.8]);
    let values = [0.2, 0.8];
    // Slope 0.6 through both samples.
    assert!((exact_extension(&d, &values, &vec![0.25]) - 0.35).abs() < 1e-12);
    // Distances 2 and 1: slope 0.6/3, value 0.2 + 0.2·2.
    assert!((exact_extension(&d, &values, &vec![2.0]) - 0.6).abs() < 1e-12);
    assert_eq!(extend_from(&[0.0, 1.0], &values), 0.2);
    let predictor = build_predictor(&d, &values, 0.1).unwrap();
    for x in [-1.0, 0.0, 0.25, 0.5, 0.9, 2.0] {
        let exact = exact_extension(&d, &values, &vec![x]);
        assert!((predictor.predict(&vec![x]) - exact).abs() <= 0.1 + 1e-12);
    }
}

#[test]
fn spanner_degree_shrinks_as_delta_grows() {
    let deltas = [0.1, 0.2, 0.4];
    let mut degrees: Vec<Vec<usize>> = vec![Vec::new(); deltas.len()];
    for seed in 0..7 {
        let mut r = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let pts: Vec<(f64, f64)> = (0..200).map(|_| (r.gen(), r.gen())).collect();
        let d = plane(&pts).normalize_diameter().unwrap();
        for (k, &delta) in deltas.iter().enumerate() {
            degrees[k].push(build_spanner(&d, delta).unwrap().max_degree());
        }
    }
    let medians: Vec<usize> = degrees
        .into_iter()
        .map(|mut v| {
            v.sort();
            v[v.len() / 2]
        })
        .collect();
    assert!(medians.windows(2).all(|w| w[1] <= w[0]), "{medians:?}");
}
