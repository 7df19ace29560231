mod common;

use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use common::{cnf_instance, Shape};
use nrals::formula::{parse_smt2, verify_model, Assignment, Atom, CmpKind, Literal, Problem};
use nrals::numeric::{Rational, Value};
use nrals::poly::{Monomial, Polynomial, RealVar};
use nrals::search::{solve, Answer, SearchParams, ValueMode};

fn problem(seed: u64, degree: u32) -> Option<Problem> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let s = Shape {
        reals: 3,
        bools: 1,
        clauses: 6,
        degree,
        max_lits: 2,
    };
    parse_smt2(&cnf_instance(&mut rng, &s))
        .ok()
        .map(|s| s.problem)
}

/// Strict multilinear constraints: `<`, `>` and `distinct` over products of distinct variables.
fn strict_multilinear(seed: u64) -> Problem {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut text = String::new();
    for i in 0..4 {
        text += &format!("(declare-fun x{i} () Real)\n");
    }
    for _ in 0..6 {
        let mut lits = Vec::new();
        for _ in 0..rng.gen_range(1..=2) {
            let mut terms = Vec::new();
            for _ in 0..rng.gen_range(1..=3) {
                let mut vs: Vec<usize> = (0..4).collect();
                vs.shuffle(&mut rng);
                vs.truncate(rng.gen_range(1..=2));
                let c = rng.gen_range(1..=4);
                let vars: Vec<String> = vs.iter().map(|v| format!("x{v}")).collect();
                terms.push(format!("(* {c} {})", vars.join(" ")));
            }
            let op = *["<", ">", "distinct"].choose(&mut rng).unwrap();
            let k: i64 = rng.gen_range(0..=5);
            lits.push(format!("({op} (+ {} 0) (- {k}))", terms.join(" ")));
        }
        text += &format!("(assert (or {} false))\n", lits.join(" "));
    }
    parse_smt2(&text).unwrap().problem
}

fn params(seed: u64, steps: u64) -> SearchParams {
    SearchParams {
        seed,
        max_steps: Some(steps),
        t1: 20,
        t2: 5,
        ..SearchParams::default()
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn relaxed_atoms_are_implied_by_the_originals(
        cs in prop::collection::vec(-5i64..6, 1..4), kind in 0u8..3, x in -20i64..21, d in 1i64..5, e in 1i64..1000,
    ) {
        let p = Polynomial::from_terms(cs.iter().enumerate().map(|(i, &c)| {
            let m = if i == 0 { Monomial::one() } else { Monomial::from_powers(vec![(RealVar(0), i as u32)]) };
            (m, Rational::from_integer(c.into()))
        }));
        prop_assume!(!p.is_constant());
        let kind = [CmpKind::Ge, CmpKind::Le, CmpKind::Eq][kind as usize];
        let lit = Literal::pos(Atom::cmp(p, kind));
        let relaxed = Literal { relaxed: true, ..lit.clone() };
        let asg = Assignment { bools: Vec::new(), reals: vec![Value::ratio(x, d)] };
        let eps = Rational::new(1.into(), e.into());
        if lit.eval(&asg, &eps).unwrap() {
            prop_assert!(relaxed.eval(&asg, &eps).unwrap());
        }
    }

    #[test]
    fn same_seed_same_run(seed in any::<u64>(), run_seed in any::<u64>(), degree in 1u32..3) {
        let Some(p) = problem(seed, degree) else { return Ok(()) };
        let a = solve(&p, &params(run_seed, 300));
        let b = solve(&p, &params(run_seed, 300));
        prop_assert_eq!(a.answer, b.answer);
        prop_assert_eq!(a.model, b.model);
        prop_assert_eq!(a.stats, b.stats);
    }

    #[test]
    fn sat_answers_carry_exact_models(seed in any::<u64>(), run_seed in any::<u64>(), mode in 0u8..3) {
        let Some(p) = problem(seed, 2) else { return Ok(()) };
        let mode = [ValueMode::Relaxation, ValueMode::Threshold, ValueMode::FullOrder][mode as usize];
        let r = solve(&p, &SearchParams { mode, ..params(run_seed, 400) });
        match r.answer {
            Answer::Sat => {
                let m = r.model.unwrap();
                prop_assert!(verify_model(&p.clauses, &m));
            }
            Answer::Unknown => prop_assert!(r.model.is_none()),
        }
    }

    #[test]
    fn restart_counters_follow_the_thresholds(seed in any::<u64>(), run_seed in any::<u64>()) {
        let Some(p) = problem(seed, 2) else { return Ok(()) };
        let ps = params(run_seed, 500);
        let s = solve(&p, &ps).stats;
        prop_assert!(s.steps <= 500);
        let restarts = s.minor_restarts + s.major_restarts;
        prop_assert!(restarts <= s.steps / ps.t1 + s.rejected_models);
        // every t2-th restart is a major one
        prop_assert_eq!(s.major_restarts, restarts / ps.t2);
        prop_assert!(s.restores <= s.relaxations);
    }

    #[test]
    fn strict_multilinear_instances_never_relax(seed in any::<u64>(), run_seed in any::<u64>()) {
        let p = strict_multilinear(seed);
        let r = solve(&p, &params(run_seed, 400));
        prop_assert_eq!(r.stats.relaxations, 0);
        if r.answer == Answer::Sat {
            prop_assert!(verify_model(&p.clauses, r.model.as_ref().unwrap()));
        }
    }
}
