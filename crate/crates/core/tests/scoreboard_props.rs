mod common;

use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use common::{cnf_instance, Shape};
use nrals::formula::{parse_smt2, Assignment, Problem};
use nrals::numeric::{Rational, Value};
use nrals::poly::RealVar;
use nrals::scoreboard::{BTreeStore, MoveKind, Preference, Scoreboard, SortedVecStore};

fn eps() -> Rational {
    Rational::new(1.into(), 10_000.into())
}

fn problem(seed: u64) -> Option<Problem> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let s = Shape {
        reals: 3,
        bools: 2,
        clauses: 8,
        degree: 2,
        max_lits: 3,
    };
    let p = parse_smt2(&cnf_instance(&mut rng, &s)).ok()?.problem;
    p.clauses
        .iter()
        .all(|c| !c.literals.is_empty())
        .then_some(p)
}

fn start(p: &Problem, vals: &[(i64, i64)], bits: u8) -> Assignment {
    let mut a = Assignment::initial(p.num_bools(), p.num_reals());
    for (i, v) in a.reals.iter_mut().enumerate() {
        let (n, d) = vals[i % vals.len()];
        *v = Value::ratio(n, d);
    }
    for (i, b) in a.bools.iter_mut().enumerate() {
        *b = bits >> i & 1 == 1;
    }
    a
}

fn board(p: &Problem, a: Assignment, weights: &[u64], incremental: bool) -> Scoreboard {
    let mut sb: Scoreboard = Scoreboard::new(p.clauses.clone(), a, eps(), incremental);
    let w = (0..p.clauses.len())
        .map(|i| weights[i % weights.len()])
        .collect();
    sb.set_weights(w);
    sb
}

/// Weighted change in satisfied clauses when `x` takes `v`.
fn direct_score(p: &Problem, a: &Assignment, w: &[u64], x: RealVar, v: &Value) -> i64 {
    let mut b = a.clone();
    b.reals[x.index()] = v.clone();
    let e = eps();
    p.clauses
        .iter()
        .zip(w)
        .map(|(c, &w)| {
            let before = c.eval(a, &e).unwrap() as i64;
            let after = c.eval(&b, &e).unwrap() as i64;
            (after - before) * w as i64
        })
        .sum()
}

fn vals() -> impl Strategy<Value = Vec<(i64, i64)>> {
    prop::collection::vec((-3i64..4, 1i64..3), 3)
}

fn weights() -> impl Strategy<Value = Vec<u64>> {
    prop::collection::vec(1u64..6, 1..9)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(96))]

    #[test]
    fn region_scores_match_direct_evaluation(seed in any::<u64>(), v in vals(), bits in any::<u8>(), w in weights()) {
        let Some(p) = problem(seed) else { return Ok(()) };
        let a = start(&p, &v, bits);
        let mut sb = board(&p, a.clone(), &w, true);
        let weights = sb.weights().to_vec();
        for i in 0..p.num_reals() {
            let x = RealVar(i as u32);
            if sb.is_blocked(x) {
                continue;
            }
            let regions = sb.regions(x).to_vec();
            prop_assert!(regions.iter().filter(|r| r.current).count() == 1);
            for r in &regions {
                prop_assert!(r.interval.contains(&r.value));
                prop_assert_eq!(r.score, direct_score(&p, &a, &weights, x, &r.value), "region {:?}", r.interval);
                if r.current {
                    prop_assert_eq!(r.score, 0);
                }
            }
        }
    }

    #[test]
    fn boundary_deltas_sum_to_the_last_region(seed in any::<u64>(), v in vals(), bits in any::<u8>(), w in weights()) {
        let Some(p) = problem(seed) else { return Ok(()) };
        let mut sb = board(&p, start(&p, &v, bits), &w, true);
        let weights = sb.weights().to_vec();
        for i in 0..p.num_reals() {
            let x = RealVar(i as u32);
            if sb.is_blocked(x) {
                continue;
            }
            let (s0, bs) = sb.combined(x);
            for pair in bs.windows(2) {
                prop_assert!(pair[0] <= pair[1]);
            }
            let total: i64 = bs.iter().map(|b| if b.is_make { weights[b.cid] as i64 } else { -(weights[b.cid] as i64) }).sum();
            let regions = sb.regions(x);
            prop_assert_eq!(regions.first().unwrap().score, s0);
            prop_assert_eq!(regions.last().unwrap().score, s0 + total);
        }
    }

    #[test]
    fn best_move_changes_unsat_weight_by_its_score(seed in any::<u64>(), v in vals(), bits in any::<u8>(), w in weights(), rs in any::<u64>()) {
        let Some(p) = problem(seed) else { return Ok(()) };
        let mut sb = board(&p, start(&p, &v, bits), &w, true);
        let mut rng = ChaCha8Rng::seed_from_u64(rs);
        let pref = Preference::plain(eps());
        for _ in 0..5 {
            let Some(mv) = sb.best_move(&pref, &mut rng) else { break };
            let before = sb.unsat_weight() as i64;
            match mv.kind {
                MoveKind::Flip(b) => sb.flip(b),
                MoveKind::Real { var, value, .. } => {
                    if !value.is_rational() {
                        break;
                    }
                    sb.assign(var, value);
                }
            }
            prop_assert_eq!(sb.unsat_weight() as i64, before - mv.score);
            prop_assert!(sb.audit().is_ok());
        }
    }

    #[test]
    fn incremental_and_naive_boards_agree(
        seed in any::<u64>(), v in vals(), bits in any::<u8>(), w in weights(),
        moves in prop::collection::vec((0usize..3, -4i64..5, 1i64..3), 1..8),
    ) {
        let Some(p) = problem(seed) else { return Ok(()) };
        let a = start(&p, &v, bits);
        let mut inc = board(&p, a.clone(), &w, true);
        let mut naive = board(&p, a.clone(), &w, false);
        let mut tree: Scoreboard<BTreeStore> = Scoreboard::new(p.clauses.clone(), a, eps(), true);
        tree.set_weights(inc.weights().to_vec());
        for (i, n, d) in moves {
            let x = RealVar((i % p.num_reals()) as u32);
            for sb in [&mut inc, &mut naive] {
                sb.assign(x, Value::ratio(n, d));
            }
            tree.assign(x, Value::ratio(n, d));
            prop_assert_eq!(inc.unsat_weight(), naive.unsat_weight());
            for j in 0..p.num_reals() {
                let y = RealVar(j as u32);
                prop_assert_eq!(inc.is_blocked(y), naive.is_blocked(y));
                if !inc.is_blocked(y) {
                    prop_assert_eq!(inc.regions(y).to_vec(), naive.regions(y).to_vec());
                    prop_assert_eq!(inc.regions(y).to_vec(), tree.regions(y).to_vec());
                }
            }
        }
        prop_assert!(inc.audit().is_ok());
    }
}

#[test]
fn empty_board_is_satisfied() {
    let mut sb: Scoreboard<SortedVecStore> =
        Scoreboard::new(Vec::new(), Assignment::default(), eps(), true);
    assert!(sb.all_sat());
    assert_eq!(sb.unsat_weight(), 0);
    assert!(sb
        .best_move(&Preference::plain(eps()), &mut ChaCha8Rng::seed_from_u64(0))
        .is_none());
}
