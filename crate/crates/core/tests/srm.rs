use lipreg_core::srm::*;
use lipreg_core::spanner::build_spanner;
use lipreg_core::{Dataset, Loss, Minkowski, Norm};

fn line(xs: &[f64], ys: &[f64]) -> Dataset<Minkowski> {
    Dataset::new(Minkowski(Norm::L1), xs.iter().map(|&x| vec![x]).collect(), ys.to_vec()).unwrap()
}

#[test]
fn two_point_program_row_audit() {
    let d = line(&[0.0, 1.0], &[0.0, 1.0]);
    let sp = build_spanner(&d, 0.1).unwrap();
    let prog = build_erm_program(&d, &sp, 1.0, 0.5, Loss::Absolute, 0.1).unwrap();
    let c = prog.row_counts();
    assert_eq!((c.negation, c.edge, c.loss, c.objective), (4, 2, 2, 1));
    assert_eq!(prog.program().num_rows(), 9);
}

#[test]
fn single_point_has_no_edge_rows() {
    let d = line(&[0.0], &[0.3]);
    let sp = build_spanner(&d, 0.1).unwrap();
    let prog = build_erm_program(&d, &sp, 0.0, 0.5, Loss::Absolute, 0.1).unwrap();
    assert_eq!(prog.row_counts().edge, 0);
    let ErmSolution::Feasible(v) = solve_erm(&prog).unwrap() else { panic!("infeasible") };
    assert!(v.objective <= 0.5 * (1.0 + prog.beta()) + 1e-12);
}

#[test]
fn quadratic_tangent_grid_at_quarter_eta() {
    assert_eq!(program::tangent_grid(0.25), vec![0.0, 0.25, 0.5, 0.75, 1.0]);
    let d = line(&[0.0, 1.0], &[0.0, 0.9]);
    let sp = build_spanner(&d, 0.1).unwrap();
    let prog = build_erm_program(&d, &sp, 1.0, 1.0, Loss::Squared, 0.25).unwrap();
    assert!(prog.program().cover_rhs().iter().all(|&c| c >= 0.0));
    // y = 0: the lower family 2a·0 − a² + ½ is negative from a = 0.75 on.
    // y = 0.9: the upper family −1.8a − a² + ½ + 2a(1+β) is negative from a = 1.
    assert_eq!(prog.row_counts().loss, (3 + 4) + (5 + 3));
    assert!(build_erm_program(&d, &sp, 1.0, 1.0, Loss::Squared, 0.3).is_err());
}

#[test]
fn constant_labels_fit_exactly() {
    let d = line(&[0.0, 0.3, 0.6, 1.0], &[0.5; 4]);
    let sp = build_spanner(&d, 0.05).unwrap();
    let mut ctx = SearchContext::default();
    let found = search_r(&d, &sp, 0.0, Loss::Absolute, 0.05, &mut ctx).unwrap();
    assert!((found.r - 0.5).abs() <= 0.1 + 1e-12);
    assert!(empirical_risk(d.labels(), &found.solution.values, Loss::Absolute) <= 0.01);
}

#[test]
fn two_point_feasibility_threshold() {
    let d = line(&[0.0, 1.0], &[0.0, 1.0]);
    let sp = build_spanner(&d, 0.05).unwrap();
    let feasible = build_erm_program(&d, &sp, 1.0, 0.5, Loss::Absolute, 0.05).unwrap();
    let ErmSolution::Feasible(v) = solve_erm(&feasible).unwrap() else { panic!("expected feasible") };
    assert!(empirical_risk(d.labels(), &v.values, Loss::Absolute) <= 0.01);
    let tight = build_erm_program(&d, &sp, 1.0, 0.4, Loss::Absolute, 0.05).unwrap();
    assert!(matches!(solve_erm(&tight).unwrap(), ErmSolution::Infeasible { .. }));
}

#[test]
fn two_point_half_lipschitz_risk() {
    let d = line(&[0.0, 1.0], &[0.0, 1.0]);
    let sp = build_spanner(&d, 0.05).unwrap();
    let eta = 0.05;
    let mut ctx = SearchContext::default();
    let found = search_r(&d, &sp, 0.5, Loss::Absolute, eta, &mut ctx).unwrap();
    let risk = empirical_risk(d.labels(), &found.solution.values, Loss::Absolute);
    assert!((found.r - 0.75).abs() <= 2.0 * eta + 1e-12, "r* = {}", found.r);
    assert!(risk >= 0.25 - 1e-6 && risk <= 0.25 + 2.0 * eta, "risk {risk}");
    let at_one = search_r(&d, &sp, 1.0, Loss::Absolute, eta, &mut ctx).unwrap();
    assert!((at_one.r - 0.5).abs() <= 2.0 * eta + 1e-12);
    assert!(at_one.r <= found.r);
}
