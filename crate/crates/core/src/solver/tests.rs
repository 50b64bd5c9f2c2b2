use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::*;
use crate::ilp::{feasible, LinearConstraint, Variable};
use crate::paql::{GlobalOp, Sense};

fn model(n: usize, upper: u64, sense: Sense, objective: Vec<f64>, rows: Vec<(Vec<f64>, GlobalOp, f64)>) -> IlpModel {
    IlpModel {
        variables: (0..n)
            .map(|tuple_id| Variable {
                tuple_id,
                lower: 0,
                upper: Some(upper),
            })
            .collect(),
        constraints: rows
            .into_iter()
            .map(|(coefficients, op, rhs)| LinearConstraint {
                coefficients,
                op,
                rhs,
                source: None,
            })
            .collect(),
        sense,
        objective,
    }
}

fn cfg() -> SolverConfig {
    SolverConfig::default()
}

#[test]
fn brute_force_small_example() {
    let m = model(3, 1, Sense::Maximize, vec![1.0, 2.0, 3.0], vec![(vec![1.0; 3], GlobalOp::Le, 2.0)]);
    let r = brute_force(&m).unwrap();
    assert_eq!(r.status, SolveStatus::Optimal);
    assert_eq!(r.solution.unwrap(), vec![0, 1, 1]);
    assert_eq!(r.objective, Some(5.0));
    assert_eq!(r.stats.nodes, 8);
    let b = solve(&m, &cfg()).unwrap();
    assert_eq!(b.objective, Some(5.0));
}

#[test]
fn infeasible_count() {
    let m = model(2, 1, Sense::Maximize, vec![0.0; 2], vec![(vec![1.0; 2], GlobalOp::Eq, 5.0)]);
    assert_eq!(brute_force(&m).unwrap().status, SolveStatus::Infeasible);
    let m = model(2, 1, Sense::Maximize, vec![0.0; 2], vec![(vec![1.0; 2], GlobalOp::Eq, 3.0)]);
    let r = solve(&m, &cfg()).unwrap();
    assert_eq!(r.status, SolveStatus::Infeasible);
    assert!(r.solution.is_none());
}

#[test]
fn vacuous_objective_returns_zero_vector() {
    let m = model(4, 1, Sense::Maximize, vec![0.0; 4], vec![]);
    for r in [solve(&m, &cfg()).unwrap(), brute_force(&m).unwrap()] {
        assert_eq!(r.status, SolveStatus::Optimal);
        assert_eq!(r.objective, Some(0.0));
        assert_eq!(r.solution.unwrap(), vec![0; 4]);
    }
}

#[test]
fn minimize_positive_costs_is_zero() {
    let m = model(3, 4, Sense::Minimize, vec![1.0, 2.0, 0.5], vec![]);
    let r = brute_force(&m).unwrap();
    assert_eq!(r.solution.unwrap(), vec![0; 3]);
    assert_eq!(solve(&m, &cfg()).unwrap().objective, Some(0.0));
}

#[test]
fn meal_planner_fixture() {
    let kcal = vec![0.9, 0.9, 0.7, 1.2, 0.3];
    let fat = vec![0.2, 0.1, 0.3, 0.5, 0.1];
    let m = model(
        5,
        1,
        Sense::Minimize,
        fat.clone(),
        vec![
            (vec![1.0; 5], GlobalOp::Eq, 3.0),
            (kcal.clone(), GlobalOp::Ge, 2.0),
            (kcal.clone(), GlobalOp::Le, 2.5),
        ],
    );
    // oracle: every 3-subset
    let mut best = f64::INFINITY;
    for a in 0..5 {
        for b in a + 1..5 {
            for c in b + 1..5 {
                let k = kcal[a] + kcal[b] + kcal[c];
                if (2.0..=2.5 + 1e-12).contains(&k) {
                    best = best.min(fat[a] + fat[b] + fat[c]);
                }
            }
        }
    }
    let r = solve(&m, &cfg()).unwrap();
    assert_eq!(r.status, SolveStatus::Optimal);
    assert!((r.objective.unwrap() - best).abs() < 1e-9);
    assert!(feasible(&m, r.solution.as_ref().unwrap()).unwrap());
}

#[test]
fn brute_force_rejects_large_space() {
    let m = model(30, 1, Sense::Maximize, vec![0.0; 30], vec![]);
    assert!(matches!(brute_force(&m), Err(SolverError::SearchSpaceTooLarge { .. })));
}

#[test]
fn infinite_bounds_are_rejected() {
    let mut m = model(2, 1, Sense::Maximize, vec![1.0; 2], vec![]);
    m.variables[1].upper = None;
    assert_eq!(solve(&m, &cfg()).unwrap_err(), SolverError::InfiniteBound { var: 1 });
    assert!(lp_relax(&m).is_err());
}

#[test]
fn lp_relaxation_examples() {
    let m = model(1, 10, Sense::Maximize, vec![1.0], vec![(vec![1.0], GlobalOp::Le, 2.5)]);
    let lp = lp_relax(&m).unwrap();
    assert_eq!(lp.status, LpStatus::Optimal);
    assert!((lp.objective - 2.5).abs() < 1e-9);
    assert!((lp.solution[0] - 2.5).abs() < 1e-9);

    let m = model(2, 1, Sense::Maximize, vec![1.0; 2], vec![(vec![1.0; 2], GlobalOp::Le, 2.0)]);
    let lp = lp_relax(&m).unwrap();
    assert!((lp.objective - 2.0).abs() < 1e-9);
    assert_eq!(solve(&m, &cfg()).unwrap().objective, Some(2.0));

    let m = model(2, 1, Sense::Maximize, vec![1.0; 2], vec![(vec![1.0; 2], GlobalOp::Ge, 3.0)]);
    assert_eq!(lp_relax(&m).unwrap().status, LpStatus::Infeasible);
}

#[test]
fn node_limit_reports_time_limit() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let n = 25;
    let w: Vec<f64> = (0..n).map(|_| rng.random_range(1.0..10.0)).collect();
    let v: Vec<f64> = (0..n).map(|_| rng.random_range(1.0..10.0)).collect();
    let m = model(n, 1, Sense::Maximize, v, vec![(w, GlobalOp::Le, 40.0)]);
    let cfg = SolverConfig {
        node_limit: Some(2),
        ..cfg()
    };
    assert_eq!(solve(&m, &cfg).unwrap().status, SolveStatus::TimeLimit);
}

fn random_model(rng: &mut ChaCha8Rng) -> IlpModel {
    let n = rng.random_range(1..=6);
    let k = rng.random_range(0..=3);
    let upper = rng.random_range(1..=3);
    let sense = if rng.random_bool(0.5) { Sense::Maximize } else { Sense::Minimize };
    let coef = |rng: &mut ChaCha8Rng| (rng.random_range(-50..=50) as f64) / 10.0;
    let objective = (0..n).map(|_| coef(rng)).collect();
    let rows = (0..k)
        .map(|_| {
            let op = [GlobalOp::Le, GlobalOp::Ge, GlobalOp::Eq][rng.random_range(0..3)];
            let a: Vec<f64> = (0..n).map(|_| coef(rng)).collect();
            let rhs = if op == GlobalOp::Eq {
                // reachable equality right-hand side
                a.iter().map(|c| c * rng.random_range(0..=upper) as f64).sum()
            } else {
                coef(rng) * 2.0
            };
            (a, op, rhs)
        })
        .collect();
    model(n, upper, sense, objective, rows)
}

#[test]
fn lp_bound_dominates_integer_optimum() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut checked = 0;
    while checked < 100 {
        let m = random_model(&mut rng);
        let exact = brute_force(&m).unwrap();
        let lp = lp_relax(&m).unwrap();
        let Some(opt) = exact.objective else {
            continue;
        };
        assert_eq!(lp.status, LpStatus::Optimal);
        match m.sense {
            Sense::Maximize => assert!(lp.objective >= opt - 1e-9, "{} < {opt}", lp.objective),
            Sense::Minimize => assert!(lp.objective <= opt + 1e-9, "{} > {opt}", lp.objective),
        }
        checked += 1;
    }
}

#[test]
fn deterministic_for_fixed_seed() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..20 {
        let m = random_model(&mut rng);
        let cfg = SolverConfig { seed: 9, ..cfg() };
        let a = solve(&m, &cfg).unwrap();
        let b = solve(&m, &cfg).unwrap();
        assert_eq!(a.status, b.status);
        assert_eq!(a.solution, b.solution);
        assert_eq!(a.objective.map(f64::to_bits), b.objective.map(f64::to_bits));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]
    #[test]
    fn branch_and_bound_matches_enumeration(seed in any::<u64>(), tie_seed in 0u64..3) {
        let m = random_model(&mut ChaCha8Rng::seed_from_u64(seed));
        let exact = brute_force(&m).unwrap();
        let got = solve(&m, &SolverConfig { seed: tie_seed, ..cfg() }).unwrap();
        prop_assert_eq!(got.status, exact.status);
        if let (Some(a), Some(b)) = (got.objective, exact.objective) {
            prop_assert!((a - b).abs() <= 1e-6_f64.max(1e-9 * b.abs()), "{} vs {}", a, b);
            prop_assert!(feasible(&m, got.solution.as_ref().unwrap()).unwrap());
        }
    }
}

/// Every integer point of the box, in lexicographic order.
fn box_points(n: usize, upper: u64) -> Vec<Vec<u64>> {
    let mut out = vec![vec![]];
    for _ in 0..n {
        out = out
            .into_iter()
            .flat_map(|p| {
                (0..=upper).map(move |v| {
                    let mut q = p.clone();
                    q.push(v);
                    q
                })
            })
            .collect();
    }
    out
}

#[test]
fn gomory_cuts_keep_integer_points_and_cut_the_relaxation() {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    let mut cuts_seen = 0;
    for _ in 0..400 {
        let m = random_model(&mut rng);
        let data = simplex::LpData::new(&m);
        let lo = vec![0.0; m.num_vars()];
        let up: Vec<f64> = m.variables.iter().map(|v| v.upper.unwrap() as f64).collect();
        let (lp, cuts) = data.solve_and_cut(&lo, &up, None, 8).unwrap();
        let points: Vec<Vec<u64>> = box_points(m.num_vars(), m.variables[0].upper.unwrap())
            .into_iter()
            .filter(|x| feasible(&m, x).unwrap())
            .collect();
        for cut in &cuts {
            cuts_seen += 1;
            let at = |x: &[f64]| cut.coef.iter().zip(x).map(|(c, v)| c * v).sum::<f64>();
            assert!(at(&lp.x) < cut.rhs, "cut does not separate the relaxation");
            for x in &points {
                let xf: Vec<f64> = x.iter().map(|&v| v as f64).collect();
                assert!(at(&xf) >= cut.rhs - 1e-9, "cut removes integer point {x:?}");
            }
        }
    }
    assert!(cuts_seen > 50, "only {cuts_seen} cuts generated");
}

#[test]
fn appended_cuts_only_tighten_the_bound() {
    let mut rng = ChaCha8Rng::seed_from_u64(22);
    for _ in 0..200 {
        let m = random_model(&mut rng);
        let data = simplex::LpData::new(&m);
        let lo = vec![0.0; m.num_vars()];
        let up: Vec<f64> = m.variables.iter().map(|v| v.upper.unwrap() as f64).collect();
        let (lp, cuts) = data.solve_and_cut(&lo, &up, None, 8).unwrap();
        if cuts.is_empty() {
            continue;
        }
        let tighter = data.with_cuts(&cuts);
        assert_eq!(tighter.rows(), data.rows() + cuts.len());
        let again = tighter.solve(&lo, &up, None).unwrap();
        if again.status == LpStatus::Optimal {
            // minimization form: the bound can only rise
            assert!(again.objective >= lp.objective - 1e-9);
        }
    }
}
