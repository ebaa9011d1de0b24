//! Property tests of the loss calculus and duality layer.

use l0pd_core::{dual, inner, Hyperparams, LossModel, ProblemData};
use proptest::prelude::*;

fn losses() -> impl Strategy<Value = LossModel> {
    prop_oneof![
        Just(LossModel::Square),
        Just(LossModel::Logistic),
        (0.2f64..2.0).prop_map(|g| LossModel::huber(g).unwrap()),
    ]
}

fn label_for(loss: LossModel) -> BoxedStrategy<f64> {
    match loss {
        LossModel::Square => (-3.0f64..3.0).boxed(),
        LossModel::Logistic => prop_oneof![Just(0.0), Just(1.0)].boxed(),
        LossModel::Huber { .. } => prop_oneof![Just(-1.0), Just(1.0)].boxed(),
    }
}

/// Strictly interior feasible dual value for the conjugate, parameterized by
/// `t in [0, 1)`.
fn feasible_alpha(loss: LossModel, y: f64, t: f64) -> f64 {
    match loss {
        LossModel::Square => 10.0 * (t - 0.5),
        // a + y in (0, 1)
        LossModel::Logistic => (1e-4 + t * (1.0 - 2e-4)) - y,
        // y a in (-1, 0)
        LossModel::Huber { .. } => y * (-1e-6 - t * (1.0 - 2e-6)),
    }
}

fn loss_label_alpha() -> impl Strategy<Value = (LossModel, f64, f64)> {
    losses().prop_flat_map(|loss| {
        (label_for(loss), 0.0f64..1.0).prop_map(move |(y, t)| (loss, y, feasible_alpha(loss, y, t)))
    })
}

fn hyperparams() -> impl Strategy<Value = Hyperparams> {
    (0.0f64..1.0, 0.0f64..1.0, 0.01f64..2.0)
        .prop_map(|(l0, l1, l2)| Hyperparams::new(l0, l1, l2).unwrap())
}

/// Loss, weights, small random problem with valid labels, a primal vector,
/// and a feasible dual vector.
fn scenario(
) -> impl Strategy<Value = (LossModel, Hyperparams, ProblemData, Vec<f64>, Vec<f64>)> {
    (losses(), hyperparams()).prop_flat_map(|(loss, hp)| {
        (1usize..5, 1usize..5).prop_flat_map(move |(n, p)| {
            (
                prop::collection::vec(-2.0f64..2.0, n * p),
                prop::collection::vec(label_for(loss), n),
                prop::collection::vec(-1.5f64..1.5, p),
                prop::collection::vec(0.0f64..1.0, n),
            )
                .prop_map(move |(x, y, beta, ts)| {
                    let alpha: Vec<f64> = ts
                        .iter()
                        .zip(&y)
                        .map(|(&t, &yi)| feasible_alpha(loss, yi, t))
                        .collect();
                    let data = ProblemData::from_rows(n, p, &x, y).unwrap();
                    (loss, hp, data, beta, alpha)
                })
        })
    })
}

/// Two-stage grid maximization of `a u - l(u; y)` over `u`.
fn conjugate_by_grid(loss: LossModel, a: f64, y: f64) -> f64 {
    let mut best = f64::NEG_INFINITY;
    let mut best_u = 0.0;
    let scan = |lo: f64, hi: f64, steps: usize, best: &mut f64, best_u: &mut f64| {
        for k in 0..=steps {
            let u = lo + (hi - lo) * k as f64 / steps as f64;
            let v = a * u - loss.value(u, y).unwrap();
            if v > *best {
                *best = v;
                *best_u = u;
            }
        }
    };
    scan(-25.0, 25.0, 10_000, &mut best, &mut best_u);
    let (lo, hi) = (best_u - 0.01, best_u + 0.01);
    scan(lo, hi, 4_000, &mut best, &mut best_u);
    best
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn fenchel_young_inequality((loss, y, a) in loss_label_alpha(), u in -10.0f64..10.0) {
        let lhs = loss.value(u, y).unwrap() + loss.conjugate_value(a, y).unwrap();
        prop_assert!(lhs - a * u >= -1e-10, "violated: {} < {}", lhs, a * u);
    }

    #[test]
    fn conjugate_matches_grid_maximization((loss, y, a) in loss_label_alpha()) {
        // keep the square-loss maximizer u* = a + y inside the scanned range
        if let LossModel::Square = loss {
            prop_assume!((a + y).abs() < 20.0);
        }
        let exact = loss.conjugate_value(a, y).unwrap();
        let grid = conjugate_by_grid(loss, a, y);
        prop_assert!((exact - grid).abs() < 1e-4, "exact {exact}, grid {grid}");
    }

    #[test]
    fn conjugate_derivative_matches_finite_differences((loss, y, a) in loss_label_alpha()) {
        let h = 1e-6;
        if !(loss.is_feasible(a - h, y) && loss.is_feasible(a + h, y)) {
            return Ok(());
        }
        let d = loss.conjugate_derivative(a, y).unwrap();
        let fd = (loss.conjugate_value(a + h, y).unwrap()
            - loss.conjugate_value(a - h, y).unwrap())
            / (2.0 * h);
        let tol = 1e-5 * d.abs().max(1.0);
        prop_assert!((d - fd).abs() < tol, "d {d}, fd {fd}");
    }

    #[test]
    fn projection_is_idempotent_and_feasible(loss in losses(), t in 0.0f64..1.0, raw in -10.0f64..10.0) {
        let y = match loss {
            LossModel::Square => 4.0 * (t - 0.5),
            LossModel::Logistic => f64::from(t > 0.5),
            LossModel::Huber { .. } => if t > 0.5 { 1.0 } else { -1.0 },
        };
        let a = loss.project_feasible(raw, y);
        prop_assert!(loss.is_feasible(a, y));
        prop_assert_eq!(loss.project_feasible(a, y), a);
        prop_assert!(loss.conjugate_value(a, y).is_ok());
    }

    #[test]
    fn weak_duality((loss, hp, data, beta, alpha) in scenario()) {
        let gap = dual::duality_gap(&beta, &alpha, &data, &hp, loss).unwrap();
        prop_assert!(gap >= -1e-10, "gap {gap}");
    }

    #[test]
    fn link_is_monotone_thresholding(hp in hyperparams(), e in -5.0f64..5.0) {
        let b = dual::primal_from_dual_scalar(e, &hp);
        if e.abs() < hp.eta0() {
            prop_assert_eq!(b, 0.0);
        } else {
            let expected = e.abs() - hp.lambda1() / (2.0 * hp.lambda2());
            prop_assert!((b.abs() - expected).abs() < 1e-12);
            prop_assert!(b * e >= 0.0);
        }
    }

    #[test]
    fn psi_identity_holds(hp in hyperparams(), etas in prop::collection::vec(-5.0f64..5.0, 1..8)) {
        let beta = dual::primal_from_dual(&etas, &hp);
        let psi_sum: f64 = etas.iter().map(|&e| dual::psi(e, &hp)).sum();
        let l2: f64 = beta.iter().map(|b| b * b).sum();
        let l0 = beta.iter().filter(|b| **b != 0.0).count() as f64;
        prop_assert!((psi_sum - (-hp.lambda2() * l2 + hp.lambda0() * l0)).abs() < 1e-10);
    }

    #[test]
    fn square_dual_objective_routes_agree((loss, hp, data, _beta, alpha) in scenario()) {
        prop_assume!(loss == LossModel::Square);
        let d1 = dual::dual_objective(&alpha, &data, &hp, LossModel::Square).unwrap();
        let d2 = dual::dual_objective_square(&alpha, &data, &hp).unwrap();
        prop_assert!((d1 - d2).abs() <= 1e-12 * (1.0 + d1.abs()));
    }

    #[test]
    fn gap_identity_at_linked_beta((loss, hp, data, _beta, alpha) in scenario()) {
        let e = dual::eta(&alpha, &data, &hp).unwrap();
        let beta = dual::primal_from_dual(&e, &hp);
        let g1 = dual::duality_gap(&beta, &alpha, &data, &hp, loss).unwrap();
        let g2 = dual::gap_via_conjugates(&beta, &alpha, &data, loss).unwrap();
        prop_assert!((g1 - g2).abs() < 1e-10 * (1.0 + g1.abs()), "g1 {g1}, g2 {g2}");
    }

    #[test]
    fn super_gradient_matches_finite_differences((loss, hp, data, _beta, alpha) in scenario()) {
        let h = 1e-7;
        let e = dual::eta(&alpha, &data, &hp).unwrap();
        // skip configurations near the Psi kink, where D is non-smooth
        prop_assume!(e.iter().all(|ej| (ej.abs() - hp.eta0()).abs() > 1e-3));
        let beta = dual::primal_from_dual(&e, &hp);
        let g = dual::super_gradient(&beta, &alpha, &data, loss).unwrap();
        for i in 0..data.n() {
            let mut ap = alpha.clone();
            let mut am = alpha.clone();
            ap[i] += h;
            am[i] -= h;
            if !(loss.is_feasible(ap[i], data.y()[i]) && loss.is_feasible(am[i], data.y()[i])) {
                continue;
            }
            let dp = dual::dual_objective(&ap, &data, &hp, loss).unwrap();
            let dm = dual::dual_objective(&am, &data, &hp, loss).unwrap();
            let fd = (dp - dm) / (2.0 * h);
            let tol = 1e-4 * g[i].abs().max(1.0);
            prop_assert!((g[i] - fd).abs() < tol, "i {i}: g {}, fd {fd}", g[i]);
        }
    }

    #[test]
    fn cd_pass_never_increases_primal((loss, hp, data, beta, _alpha) in scenario()) {
        prop_assume!(loss == LossModel::Square);
        let before = dual::primal_objective(&beta, &data, &hp, LossModel::Square).unwrap();
        let after_beta = inner::cd_pass(&beta, &data, &hp).unwrap();
        let after = dual::primal_objective(&after_beta, &data, &hp, LossModel::Square).unwrap();
        prop_assert!(after <= before + 1e-12, "before {before}, after {after}");
    }

    #[test]
    fn ball_radius_inverts_gap(gap in 0.0f64..10.0, gamma in 0.1f64..5.0) {
        let r = dual::ball_radius(gap, gamma).unwrap();
        prop_assert!((0.5 * gamma * r * r - gap).abs() < 1e-10);
    }
}
