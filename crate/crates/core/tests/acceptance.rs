//! Acceptance criteria. Runs without the libtest harness and prints one
//! PASS/FAIL line per criterion; exits nonzero if any fails.

mod common;

use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::{Arc, Mutex};
use std::time::{Duration, Instant};

use num_traits::{One, Zero};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use nrals::driver::{self, RunConfig};
use nrals::formula::ast_eval::eval_script;
use nrals::formula::{parse_smt2, verify_model, Assignment, Atom, Clause, CmpKind, Literal};
use nrals::numeric::{Rational, Value};
use nrals::poly::univariate::UnivariatePoly;
use nrals::poly::{Polynomial, RealVar};
use nrals::roots::{feasible_set, isolate_roots, restriction, sturm_count};
use nrals::scoreboard::{boundaries_for, combine, Boundary, Scoreboard, SortedVecStore};
use nrals::search::{Answer, Search, SearchParams, ValueMode};

use common::Shape;

type Outcome = Result<String, String>;
type Criterion = (u32, &'static str, Duration, fn() -> Outcome);

fn q(n: i64, d: i64) -> Rational {
    Rational::new(n.into(), d.into())
}

fn eps() -> Rational {
    q(1, 10000)
}

fn suite_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures/suite")
}

#[derive(Clone, Default)]
struct Buf(Arc<Mutex<Vec<u8>>>);

impl Write for Buf {
    fn write(&mut self, b: &[u8]) -> std::io::Result<usize> {
        self.0.lock().unwrap().extend_from_slice(b);
        Ok(b.len())
    }
    fn flush(&mut self) -> std::io::Result<()> {
        Ok(())
    }
}

impl Buf {
    fn bytes(&self) -> Vec<u8> {
        self.0.lock().unwrap().clone()
    }
}

fn var(i: u32) -> Polynomial {
    Polynomial::var(RealVar(i))
}

fn c1_worked_examples() -> Outcome {
    // x^2 + y^2 <= 1, x + y < 1, x + z > 0 at x = y = z = 1 with weights 1, 3, 2
    let one = Polynomial::int(1);
    let clauses = vec![
        Clause::new(vec![Literal::pos(Atom::cmp(
            var(0).mul(&var(0)).add(&var(1).mul(&var(1))).sub(&one),
            CmpKind::Le,
        ))]),
        Clause::new(vec![Literal::neg(Atom::cmp(
            var(0).add(&var(1)).sub(&one),
            CmpKind::Ge,
        ))]),
        Clause::new(vec![Literal::neg(Atom::cmp(
            var(0).add(&var(2)),
            CmpKind::Le,
        ))]),
    ];
    let weights = [1u64, 3, 2];
    let mut asg = Assignment {
        bools: vec![],
        reals: vec![Value::int(1); 3],
    };
    let x = RealVar(0);
    let bd = |v: i64, open: bool, make: bool, one_based: usize| {
        Boundary::new(Value::int(v), open, make, one_based - 1)
    };

    let parts: Vec<_> = clauses
        .iter()
        .enumerate()
        .map(|(c, cls)| boundaries_for(x, cls, c, &asg, &eps()))
        .collect();
    let (start, bs) = combine(parts.iter().zip(weights));
    let want = vec![
        bd(-1, true, true, 3),
        bd(0, false, true, 1),
        bd(0, false, false, 2),
        bd(0, true, false, 1),
    ];
    if (start, &bs) != (1, &want) {
        return Err(format!("combined state {start} {bs:?}"));
    }

    let mut sb: Scoreboard = Scoreboard::new(clauses.clone(), asg.clone(), eps(), true);
    sb.set_weights(weights.to_vec());
    if sb.combined(x) != (1, want) {
        return Err("scoreboard disagrees with combine".into());
    }
    let map: Vec<(String, i64)> = sb
        .regions(x)
        .iter()
        .map(|r| (r.interval.to_string(), r.score))
        .collect();
    let want_map = [
        ("(-inf, -1]", 1),
        ("(-1, 0)", 3),
        ("[0, 0]", 1),
        ("(0, +inf)", 0),
    ]
    .map(|(s, k)| (s.to_string(), k));
    if map != want_map {
        return Err(format!("interval map {map:?}"));
    }

    sb.assign(RealVar(1), Value::int(-2));
    let after = (-2, vec![bd(-1, true, true, 3), bd(3, false, false, 2)]);
    if sb.combined(x) != after {
        return Err(format!("after move {:?}", sb.combined(x)));
    }
    asg.reals[1] = Value::int(-2);
    let parts: Vec<_> = clauses
        .iter()
        .enumerate()
        .map(|(c, cls)| boundaries_for(x, cls, c, &asg, &eps()))
        .collect();
    if combine(parts.iter().zip(weights)) != after {
        return Err("from-scratch state after move differs".into());
    }
    Ok("examples reproduced exactly".into())
}

fn lockstep(src: &str, seed: u64, steps: u64) -> Result<u64, String> {
    let script = parse_smt2(src).map_err(|e| e.to_string())?;
    let params = SearchParams {
        seed,
        max_steps: Some(steps),
        ..SearchParams::default()
    };
    let Ok(mut inc) = Search::<SortedVecStore>::new(&script.problem, params.clone()) else {
        return Ok(0);
    };
    let mut naive = Search::<SortedVecStore>::new(
        &script.problem,
        SearchParams {
            incremental: false,
            ..params
        },
    )
    .expect("same preprocessing");
    let (ti, tn) = (Buf::default(), Buf::default());
    inc.set_trace(Box::new(ti.clone()));
    naive.set_trace(Box::new(tn.clone()));
    let nreals = script.problem.num_reals();
    loop {
        let (a, b) = (inc.iterate(), naive.iterate());
        if a != b || ti.bytes() != tn.bytes() {
            return Err(format!("traces diverge at step {}", inc.stats().steps));
        }
        if a.is_some() {
            return Ok(inc.stats().steps);
        }
        let pref = inc.preference();
        let sb = inc.scoreboard();
        sb.audit()
            .map_err(|e| format!("step {}: {e}", naive.stats().steps))?;
        let nb = naive.scoreboard();
        for i in 0..nreals {
            let x = RealVar(i as u32);
            if sb.combined(x) != nb.combined(x) || sb.regions(x) != nb.regions(x) {
                return Err(format!("scores of x{i} differ"));
            }
        }
        let m1 = sb.best_move(&pref, &mut ChaCha8Rng::seed_from_u64(9));
        let m2 = nb.best_move(&pref, &mut ChaCha8Rng::seed_from_u64(9));
        if m1 != m2 {
            return Err(format!("best moves differ: {m1:?} vs {m2:?}"));
        }
    }
}

fn c2_incremental_equals_naive() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let n = 50;
    let mut steps = 0;
    for i in 0..n {
        let shape = Shape {
            reals: rng.gen_range(2..=8),
            bools: rng.gen_range(0..=2),
            clauses: rng.gen_range(4..=20),
            degree: 3,
            max_lits: 3,
        };
        let src = common::cnf_instance(&mut rng, &shape);
        steps += lockstep(&src, i, 1000).map_err(|e| format!("instance {i}: {e}\n{src}"))?;
    }
    Ok(format!(
        "{n} instances, traces of up to 1000 steps, {steps} steps audited"
    ))
}

fn random_univariate_poly<R: Rng>(rng: &mut R) -> Polynomial {
    // degree <= 4 in x0 with coefficients mixing x1 and x2
    let mut p = Polynomial::zero();
    for d in 0..=rng.gen_range(1..=4u32) {
        if rng.gen_bool(0.3) && d > 0 {
            continue;
        }
        let mut c = Polynomial::int(rng.gen_range(-4..=4));
        if rng.gen_bool(0.4) {
            c = c.add(&var(rng.gen_range(1..3)));
        }
        let mut t = c;
        for _ in 0..d {
            t = t.mul(&var(0));
        }
        p = p.add(&t);
    }
    if p.is_zero() {
        var(0)
    } else {
        p
    }
}

fn c3_feasible_set_oracle() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let x = RealVar(0);
    let triples = 500;
    let mut probes_total = 0usize;
    for t in 0..triples {
        let p = random_univariate_poly(&mut rng);
        let kind = *[CmpKind::Ge, CmpKind::Le, CmpKind::Eq]
            .choose(&mut rng)
            .unwrap();
        let mut lit = if rng.gen_bool(0.7) {
            Literal::pos(Atom::cmp(p.clone(), kind))
        } else {
            Literal::neg(Atom::cmp(p.clone(), kind))
        };
        if lit.is_relaxable() && rng.gen_bool(0.3) {
            lit.relaxed = true;
        }
        let mut asg = Assignment {
            bools: vec![],
            reals: (0..3)
                .map(|_| Value::ratio(rng.gen_range(-20..=20), rng.gen_range(1..=4)))
                .collect(),
        };
        let f = feasible_set(&lit, &asg, x, &eps()).map_err(|e| format!("triple {t}: {e}"))?;
        let mut probes: Vec<Value> = (0..1000)
            .map(|_| {
                let scale = *[1i64, 10, 1000].choose(&mut rng).unwrap();
                Value::ratio(
                    rng.gen_range(-10 * scale..=10 * scale),
                    rng.gen_range(1..=scale.min(100)),
                )
            })
            .collect();
        for shift in [Rational::zero(), eps(), -eps()] {
            let iso = restriction(lit.poly().unwrap(), &asg.reals, x, &shift)
                .map_err(|e| e.to_string())?;
            for r in &iso.roots {
                probes.push(r.clone());
                match r {
                    Value::Rational(r) => {
                        for d in [q(1, 1_000_000), q(1, 1_000_000_000)] {
                            probes.push(Value::Rational(r + &d));
                            probes.push(Value::Rational(r - &d));
                        }
                    }
                    Value::Algebraic(a) => {
                        let a = a.refine(&q(1, 1_000_000_000));
                        probes.push(Value::Rational(a.lo().clone()));
                        probes.push(Value::Rational(a.hi().clone()));
                    }
                }
            }
        }
        for v in probes {
            asg.reals[0] = v.clone();
            let direct = lit.eval(&asg, &eps()).map_err(|e| e.to_string())?;
            if f.contains(&v) != direct {
                return Err(format!(
                    "triple {t}: {lit:?} at {v}: set says {}, literal says {direct}",
                    f.contains(&v)
                ));
            }
            probes_total += 1;
        }
    }
    Ok(format!("{triples} triples, {probes_total} probes agree"))
}

fn c4_root_isolation_oracle() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let cases = 200;
    for case in 0..cases {
        // known roots as (f64 position, exact factor)
        let mut roots: Vec<(f64, Option<Rational>, UnivariatePoly)> = Vec::new();
        let mut p = UnivariatePoly::constant(Rational::from_integer(rng.gen_range(1..=3).into()));
        let close = |roots: &[(f64, Option<Rational>, UnivariatePoly)], v: f64| {
            roots.iter().any(|r| (r.0 - v).abs() < 1e-3)
        };
        for _ in 0..rng.gen_range(0..=3) {
            let r = q(rng.gen_range(-30..=30), rng.gen_range(1..=5));
            let f = num_traits::ToPrimitive::to_f64(&r).unwrap();
            if close(&roots, f) {
                continue;
            }
            let lin = UnivariatePoly::linear_root(&r);
            p = p.mul(&lin);
            roots.push((f, Some(r), lin));
        }
        for _ in 0..rng.gen_range(0..=2) {
            // (x - a)^2 - d with d not a square of a rational, or (x - a)^2 + d
            let a = q(rng.gen_range(-10..=10), rng.gen_range(1..=3));
            let d = *[2i64, 3, 5, 6, 7, 10, 11].choose(&mut rng).unwrap();
            let real = rng.gen_bool(0.75);
            let quad = UnivariatePoly::from_coeffs(vec![
                &a * &a + Rational::from_integer(if real { -d } else { d }.into()),
                Rational::from_integer((-2).into()) * &a,
                Rational::one(),
            ]);
            if real {
                let af = num_traits::ToPrimitive::to_f64(&a).unwrap();
                let s = (d as f64).sqrt();
                if close(&roots, af - s) || close(&roots, af + s) {
                    continue;
                }
                roots.push((af - s, None, quad.clone()));
                roots.push((af + s, None, quad.clone()));
            }
            p = p.mul(&quad);
        }
        roots.sort_by(|a, b| a.0.total_cmp(&b.0));
        let iso = isolate_roots(&p).map_err(|e| e.to_string())?;
        if iso.roots.len() != roots.len() {
            return Err(format!(
                "case {case}: {} roots, expected {}",
                iso.roots.len(),
                roots.len()
            ));
        }
        for (got, (_, exact, factor)) in iso.roots.iter().zip(&roots) {
            match (got, exact) {
                (Value::Rational(g), Some(e)) if g == e => {}
                (Value::Algebraic(a), None) => {
                    if factor.sign_at(a.lo()) == factor.sign_at(a.hi()) {
                        return Err(format!("case {case}: interval misses its root"));
                    }
                    if sturm_count(&p, a.lo(), a.hi()).map_err(|e| e.to_string())? != 1 {
                        return Err(format!("case {case}: interval not isolating"));
                    }
                }
                _ => return Err(format!("case {case}: root {got} mismatches")),
            }
        }
    }
    Ok(format!("{cases} products"))
}

fn solve_file(path: &Path, params: SearchParams) -> Result<(bool, nrals::search::Stats), String> {
    let text = std::fs::read_to_string(path).map_err(|e| e.to_string())?;
    let script = parse_smt2(&text).map_err(|e| e.to_string())?;
    let Ok(mut s) = Search::<SortedVecStore>::new(&script.problem, params) else {
        return Ok((false, Default::default()));
    };
    let r = s.run();
    if r.answer == Answer::Sat {
        let m = r.model.as_ref().ok_or("sat without model")?;
        if !verify_model(&script.problem.clauses, m) || eval_script(&script, m) != Ok(true) {
            return Err(format!("{}: model fails verification", path.display()));
        }
    }
    Ok((r.answer == Answer::Sat, r.stats))
}

fn c5_curated_suite() -> Outcome {
    let files = driver::suite_files(&suite_dir()).map_err(|e| e.to_string())?;
    let mut solved = 0;
    let mut unsolved = Vec::new();
    for f in &files {
        let params = SearchParams {
            seed: 0,
            time_limit: Some(Duration::from_secs(10)),
            ..SearchParams::default()
        };
        if solve_file(f, params)?.0 {
            solved += 1;
        } else {
            unsolved.push(f.file_name().unwrap().to_string_lossy().into_owned());
        }
    }
    let msg = format!(
        "{solved}/{} solved, models verified; unsolved {unsolved:?}",
        files.len()
    );
    if files.len() >= 30 && solved * 10 >= files.len() * 9 {
        Ok(msg)
    } else {
        Err(msg)
    }
}

fn eq_files() -> Vec<PathBuf> {
    driver::suite_files(&suite_dir())
        .unwrap()
        .into_iter()
        .filter(|p| p.file_name().unwrap().to_string_lossy().starts_with("eq_"))
        .collect()
}

fn c6_relaxation() -> Outcome {
    let files = eq_files();
    let mut relaxed_runs = 0;
    for f in &files {
        for seed in 0..3 {
            let (_, stats) = solve_file(
                f,
                SearchParams {
                    seed,
                    max_steps: Some(100_000),
                    ..SearchParams::default()
                },
            )?;
            if stats.slack_violations > 0 {
                return Err(format!(
                    "{}: complex value assigned under relaxation",
                    f.display()
                ));
            }
            relaxed_runs += usize::from(stats.relaxations > 0);
        }
    }
    let mut counts = Vec::new();
    for mode in [
        ValueMode::Relaxation,
        ValueMode::Threshold,
        ValueMode::FullOrder,
    ] {
        let mut n = 0;
        for f in &files {
            let params = SearchParams {
                mode,
                max_steps: Some(100_000),
                ..SearchParams::default()
            };
            n += usize::from(solve_file(f, params)?.0);
        }
        counts.push(n);
    }
    let msg = format!(
        "(a) no complex moves under relaxation, {relaxed_runs} runs relaxed; (b) solved relaxation {} threshold {} full-order {} of {}",
        counts[0],
        counts[1],
        counts[2],
        files.len()
    );
    if counts[1] <= counts[0] {
        Ok(msg)
    } else {
        Err(msg)
    }
}

fn dense_instance() -> String {
    (7..)
        .map(dense_candidate)
        .find(|src| {
            nrals::formula::preprocess::preprocess(&parse_smt2(src).unwrap().problem.clauses)
                .is_ok()
        })
        .unwrap()
}

fn dense_candidate(seed: u64) -> String {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let shape = Shape {
        reals: 12,
        bools: 0,
        clauses: 60,
        degree: 2,
        max_lits: 3,
    };
    common::cnf_instance(&mut rng, &shape)
}

fn steps_per_second(src: &str, incremental: bool, steps: u64) -> Result<f64, String> {
    let script = parse_smt2(src).map_err(|e| e.to_string())?;
    let params = SearchParams {
        seed: 1,
        max_steps: Some(steps),
        incremental,
        ..SearchParams::default()
    };
    let mut s =
        Search::<SortedVecStore>::new(&script.problem, params).map_err(|_| "contradiction")?;
    let t = Instant::now();
    let r = s.run();
    if r.stats.steps != steps {
        return Err(format!("stopped after {} steps", r.stats.steps));
    }
    Ok(steps as f64 / t.elapsed().as_secs_f64())
}

fn c7_incremental_speedup() -> Outcome {
    let src = dense_instance();
    let steps = 10_000;
    let inc = steps_per_second(&src, true, steps)?;
    let naive = steps_per_second(&src, false, steps)?;
    let msg = format!(
        "incremental {inc:.0} steps/s, naive {naive:.0} steps/s, ratio {:.2}",
        inc / naive
    );
    if inc >= 2.0 * naive {
        Ok(msg)
    } else {
        Err(msg)
    }
}

fn c8_determinism() -> Outcome {
    let dir = std::env::temp_dir().join(format!("nrals-acceptance-{}", std::process::id()));
    std::fs::create_dir_all(&dir).map_err(|e| e.to_string())?;
    let files = driver::suite_files(&suite_dir()).map_err(|e| e.to_string())?;
    let mut compared = 0;
    for f in &files {
        let mut traces = Vec::new();
        for (k, incremental) in [(0, true), (1, true), (2, false)] {
            let path = dir.join(format!("trace{k}"));
            let config = RunConfig {
                params: SearchParams {
                    seed: 5,
                    max_steps: Some(3000),
                    incremental,
                    ..SearchParams::default()
                },
                verify: true,
                trace: Some(path.clone()),
                ..RunConfig::default()
            };
            let run = driver::run_file(f, &config);
            traces.push((
                run.record.answer,
                std::fs::read(&path).map_err(|e| e.to_string())?,
            ));
        }
        if traces[0] != traces[1] {
            return Err(format!(
                "{}: traces differ between identical runs",
                f.display()
            ));
        }
        if traces[0] != traces[2] {
            return Err(format!("{}: naive scoring changes the trace", f.display()));
        }
        compared += 1;
    }
    let _ = std::fs::remove_dir_all(&dir);
    Ok(format!(
        "{compared} instances, identical traces across runs and scoring modes"
    ))
}

fn c9_soundness_fuzz() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let n = 10_000;
    let mut sat = 0;
    for i in 0..n {
        let shape = Shape {
            reals: rng.gen_range(1..=3),
            bools: rng.gen_range(0..=2),
            clauses: rng.gen_range(1..=4),
            degree: 2,
            max_lits: 2,
        };
        let src = if i % 2 == 0 {
            common::nested_instance(&mut rng, &shape)
        } else {
            common::cnf_instance(&mut rng, &shape)
        };
        let script = parse_smt2(&src).map_err(|e| format!("{e}\n{src}"))?;
        let params = SearchParams {
            seed: i,
            max_steps: Some(150),
            ..SearchParams::default()
        };
        let Ok(mut s) = Search::<SortedVecStore>::new(&script.problem, params) else {
            continue;
        };
        let r = s.run();
        if r.answer == Answer::Sat {
            let m = r.model.as_ref().ok_or("sat without model")?;
            if eval_script(&script, m) != Ok(true) {
                return Err(format!(
                    "instance {i}: model rejected by AST evaluation\n{src}"
                ));
            }
            sat += 1;
        }
    }
    Ok(format!("{n} instances, {sat} sat, zero discrepancies"))
}

fn main() {
    let criteria: [Criterion; 9] = [
        (
            1,
            "worked examples",
            Duration::from_secs(1),
            c1_worked_examples,
        ),
        (
            2,
            "incremental equals naive",
            Duration::from_secs(120),
            c2_incremental_equals_naive,
        ),
        (
            3,
            "feasible-set oracle",
            Duration::from_secs(120),
            c3_feasible_set_oracle,
        ),
        (
            4,
            "root-isolation oracle",
            Duration::from_secs(60),
            c4_root_isolation_oracle,
        ),
        (5, "curated suite", Duration::MAX, c5_curated_suite),
        (6, "relaxation behaviour", Duration::MAX, c6_relaxation),
        (
            7,
            "incremental speedup",
            Duration::MAX,
            c7_incremental_speedup,
        ),
        (8, "determinism", Duration::MAX, c8_determinism),
        (9, "soundness fuzz", Duration::MAX, c9_soundness_fuzz),
    ];
    let only: Vec<u32> = std::env::args()
        .skip(1)
        .filter_map(|a| a.parse().ok())
        .collect();
    let mut failed = 0;
    for (id, name, limit, run) in criteria {
        if !only.is_empty() && !only.contains(&id) {
            continue;
        }
        let t = Instant::now();
        let mut outcome = run();
        let took = t.elapsed();
        if outcome.is_ok() && took > limit {
            outcome = Err(format!("took {took:.2?}, limit {limit:?}"));
        }
        let (tag, detail) = match &outcome {
            Ok(d) => ("PASS", d),
            Err(d) => ("FAIL", d),
        };
        println!("criterion {id} ({name}): {tag} [{took:.2?}] {detail}");
        failed += usize::from(outcome.is_err());
    }
    std::io::stdout().flush().unwrap();
    if failed > 0 {
        std::process::exit(1);
    }
}
