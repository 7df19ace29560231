//! Local search with relaxation of constraints, look-ahead for stuck
//! literals and two-level restarts.

pub mod stuck;

use std::io::Write;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::formula::preprocess::{preprocess, Preprocessed};
use crate::formula::{verify_model, Assignment, BoolVar, Clause, Problem};
use crate::numeric::{Rational, Value};
use crate::poly::RealVar;
use crate::scoreboard::{
    BoundaryStore, ClauseId, Move, MoveKind, Preference, Scoreboard, SortedVecStore, ValueOrder,
};

/// How assignments of complex values are handled.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum ValueMode {
    /// Relax the constraints that force complex values.
    #[default]
    Relaxation,
    /// No relaxation; prefer values within the threshold.
    Threshold,
    /// No relaxation; rank values by complexity before score.
    FullOrder,
}

#[derive(Clone, Debug)]
pub struct SearchParams {
    pub sp: f64,
    pub t1: u64,
    pub t2: u64,
    pub eps_v: Rational,
    pub eps_p: Rational,
    pub max_steps: Option<u64>,
    pub time_limit: Option<Duration>,
    pub seed: u64,
    pub incremental: bool,
    pub mode: ValueMode,
    /// Relax only for values more complex than every other assigned value.
    pub relax_needs_every: bool,
}

impl Default for SearchParams {
    fn default() -> Self {
        SearchParams {
            sp: 0.006,
            t1: 100,
            t2: 100,
            eps_v: Rational::new(1.into(), 10000.into()),
            eps_p: Rational::new(1.into(), 10000.into()),
            max_steps: None,
            time_limit: None,
            seed: 0,
            incremental: true,
            mode: ValueMode::Relaxation,
            relax_needs_every: true,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Answer {
    Sat,
    Unknown,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Stats {
    pub steps: u64,
    pub minor_restarts: u64,
    pub major_restarts: u64,
    /// Relaxation events, each covering the clauses of one move.
    pub relaxations: u64,
    pub restores: u64,
    /// Moves assigning a value beyond the threshold while relaxation was
    /// active.
    pub slack_violations: u64,
    /// Candidate models rejected by the final check.
    pub rejected_models: u64,
}

#[derive(Clone, Debug)]
pub struct SolveResult {
    pub answer: Answer,
    /// Model of every variable of the problem, when sat.
    pub model: Option<Assignment>,
    pub stats: Stats,
}

/// State of one search run.
pub struct Search<S: BoundaryStore = SortedVecStore> {
    params: SearchParams,
    original: Vec<Clause>,
    pre: Preprocessed,
    real_names: Vec<String>,
    bool_names: Vec<String>,
    sb: Scoreboard<S>,
    rng: ChaCha8Rng,
    use_slack: bool,
    exclude_infeasible: bool,
    non_improving: u64,
    best_unsat: u64,
    minors_since_major: u64,
    stats: Stats,
    started: Instant,
    trace: Option<Box<dyn Write + Send>>,
    model: Option<Assignment>,
}

/// Preprocesses and runs the search to completion.
pub fn solve(problem: &Problem, params: &SearchParams) -> SolveResult {
    match Search::<SortedVecStore>::new(problem, params.clone()) {
        Ok(mut s) => s.run(),
        Err(_) => SolveResult {
            answer: Answer::Unknown,
            model: None,
            stats: Stats::default(),
        },
    }
}

impl<S: BoundaryStore> Search<S> {
    pub fn new(
        problem: &Problem,
        params: SearchParams,
    ) -> Result<Search<S>, crate::formula::preprocess::Contradiction> {
        let pre = preprocess(&problem.clauses)?;
        let asg = Assignment::initial(problem.num_bools(), problem.num_reals());
        let sb = Scoreboard::new(
            pre.clauses.clone(),
            asg,
            params.eps_p.clone(),
            params.incremental,
        );
        let best_unsat = sb.unsat_weight();
        Ok(Search {
            rng: ChaCha8Rng::seed_from_u64(params.seed),
            use_slack: params.mode == ValueMode::Relaxation,
            params,
            original: problem.clauses.clone(),
            pre,
            real_names: problem.real_names.clone(),
            bool_names: problem.bool_names.clone(),
            sb,
            exclude_infeasible: false,
            non_improving: 0,
            best_unsat,
            minors_since_major: 0,
            stats: Stats::default(),
            started: Instant::now(),
            trace: None,
            model: None,
        })
    }

    /// Writes one line per event: `step var old new score` for moves, and
    /// `step relax|restore|minor|major ...` otherwise.
    pub fn set_trace(&mut self, w: Box<dyn Write + Send>) {
        self.trace = Some(w);
    }

    pub fn scoreboard(&mut self) -> &mut Scoreboard<S> {
        &mut self.sb
    }

    pub fn stats(&self) -> &Stats {
        &self.stats
    }

    pub fn use_slack(&self) -> bool {
        self.use_slack
    }

    pub fn exclude_infeasible(&self) -> bool {
        self.exclude_infeasible
    }

    pub fn run(&mut self) -> SolveResult {
        self.started = Instant::now();
        loop {
            if let Some(answer) = self.iterate() {
                if let Some(t) = &mut self.trace {
                    let _ = t.flush();
                }
                return SolveResult {
                    answer,
                    model: self.model.take(),
                    stats: self.stats.clone(),
                };
            }
        }
    }

    /// One pass of the main loop; `Some` once the search is over.
    pub fn iterate(&mut self) -> Option<Answer> {
        if self.sb.all_sat() && self.use_slack {
            self.restore();
        }
        if self.sb.all_sat() {
            if self.finish() {
                return Some(Answer::Sat);
            }
            self.stats.rejected_models += 1;
            self.minor_restart();
        }
        if self.params.max_steps.is_some_and(|m| self.stats.steps >= m) {
            return Some(Answer::Unknown);
        }
        if self.stats.steps.is_multiple_of(256)
            && self
                .params
                .time_limit
                .is_some_and(|t| self.started.elapsed() >= t)
        {
            return Some(Answer::Unknown);
        }
        if self.non_improving >= self.params.t1 {
            if self.params.mode == ValueMode::Relaxation {
                self.use_slack = true;
            }
            self.minor_restart();
        }
        self.step();
        None
    }

    pub fn preference(&self) -> Preference {
        Preference {
            order: match self.params.mode {
                ValueMode::Relaxation => ValueOrder::ScoreFirst,
                ValueMode::Threshold => ValueOrder::Threshold,
                ValueMode::FullOrder => ValueOrder::FullOrder,
            },
            eps_v: self.params.eps_v.clone(),
            slack: self.use_slack,
            relax_needs_every: self.params.relax_needs_every,
            exclude_infeasible: self.exclude_infeasible,
        }
    }

    fn step(&mut self) {
        self.stats.steps += 1;
        if self.sb.all_sat() {
            self.perturb_any();
            self.non_improving += 1;
            return;
        }
        let pref = self.preference();
        match self.sb.best_move(&pref, &mut self.rng) {
            Some(m) if m.score > 0 => self.perform(m),
            _ => {
                self.sb.paws_update(self.params.sp, &mut self.rng);
                let mut moved = false;
                for _ in 0..3 {
                    let c = self.random_unsat();
                    if let Some(m) = self.sb.critical_move(c, &pref, &mut self.rng) {
                        self.perform(m);
                        moved = true;
                        break;
                    }
                }
                if !moved {
                    self.heuristic_move();
                }
            }
        }
        let w = self.sb.unsat_weight();
        if w < self.best_unsat {
            self.best_unsat = w;
            self.non_improving = 0;
        } else {
            self.non_improving += 1;
        }
    }

    fn random_unsat(&mut self) -> ClauseId {
        let u = self.sb.unsat_clauses();
        u[self.rng.gen_range(0..u.len())]
    }

    fn perform(&mut self, m: Move) {
        if m.relax {
            let MoveKind::Real { cids, .. } = &m.kind else {
                unreachable!("only real moves relax")
            };
            let mut n = 0;
            for &c in cids {
                n += self.sb.relax_clause(c);
            }
            debug_assert!(n > 0);
            self.stats.relaxations += 1;
            let ids: Vec<String> = cids.iter().map(|c| c.to_string()).collect();
            self.log(format_args!("relax {}", ids.join(",")));
            return;
        }
        match m.kind {
            MoveKind::Flip(b) => self.flip(b, m.score),
            MoveKind::Real { var, value, .. } => self.assign(var, value, m.score),
        }
    }

    fn assign(&mut self, x: RealVar, v: Value, score: i64) {
        if self.use_slack && v.exceeds_threshold(&self.params.eps_v) {
            self.stats.slack_violations += 1;
        }
        if self.trace.is_some() {
            let old = self.sb.assignment().reals[x.index()].to_string();
            let name = self.real_names[x.index()].clone();
            self.log(format_args!("{name} {old} {v} {score}"));
        }
        self.sb.assign(x, v);
    }

    fn flip(&mut self, b: BoolVar, score: i64) {
        if self.trace.is_some() {
            let old = self.sb.assignment().bools[b.index()];
            let name = self.bool_names[b.index()].clone();
            self.log(format_args!("{name} {old} {} {score}", !old));
        }
        self.sb.flip(b);
    }

    /// Moves a variable of a random unsatisfied clause without a critical move.
    fn heuristic_move(&mut self) {
        let c = self.random_unsat();
        let cls = &self.sb.clauses()[c];
        let arith: Vec<usize> = (0..cls.literals.len())
            .filter(|&i| cls.literals[i].poly().is_some())
            .collect();
        if arith.is_empty() {
            let bs = self.sb.clause_bools(c);
            let b = bs[self.rng.gen_range(0..bs.len())];
            let score = self.sb.bool_flip_score(b);
            self.flip(b, score);
            return;
        }
        let lit = cls.literals[arith[self.rng.gen_range(0..arith.len())]].clone();
        let reals = &self.sb.assignment().reals;
        let xs = stuck::movable_vars(&lit, reals);
        if xs.is_empty() {
            let vars = lit.poly().expect("comparison").vars();
            let x = vars[self.rng.gen_range(0..vars.len())];
            let v = Value::int(self.rng.gen_range(-10..=10));
            self.assign(x, v, 0);
            return;
        }
        let x = xs[self.rng.gen_range(0..xs.len())];
        let x0 = reals[x.index()].clone();
        let mut cands = stuck::candidate_values(&x0, self.sb.allowed_set(x), &mut self.rng);
        if self.use_slack {
            cands.retain(|v| !v.exceeds_threshold(&self.params.eps_v));
        }
        if self.exclude_infeasible {
            if let Some(a) = self.sb.allowed_set(x) {
                let kept: Vec<Value> = cands.iter().filter(|v| a.contains(v)).cloned().collect();
                if !kept.is_empty() {
                    cands = kept;
                }
            }
        }
        if cands.is_empty() {
            cands.push(Value::int(self.rng.gen_range(-10..=10)));
        }
        let v = stuck::lookahead_pick(
            &lit,
            x,
            &cands,
            self.sb.assignment(),
            &self.params.eps_p,
            &mut self.rng,
        );
        self.assign(x, v, 0);
    }

    fn restore(&mut self) {
        let n = self.sb.restore();
        if n > 0 {
            self.stats.restores += 1;
            self.log(format_args!("restore {n}"));
        }
        self.use_slack = false;
        self.non_improving = 0;
        self.best_unsat = self.sb.unsat_weight();
    }

    /// Extends the assignment to eliminated variables and checks it exactly
    /// against the input clauses.
    fn finish(&mut self) -> bool {
        let mut asg = self.sb.assignment().clone();
        if !self.pre.extend_model(&mut asg) || !verify_model(&self.original, &asg) {
            return false;
        }
        self.model = Some(asg);
        true
    }

    fn minor_restart(&mut self) {
        self.minors_since_major += 1;
        if self.minors_since_major >= self.params.t2 {
            self.major_restart();
            return;
        }
        self.stats.minor_restarts += 1;
        self.exclude_infeasible = !self.exclude_infeasible;
        self.log(format_args!("minor"));
        if !self.sb.all_sat() {
            let c = self.random_unsat();
            let xs: Vec<RealVar> = self.sb.clause_reals(c).collect();
            let bs = self.sb.clause_bools(c).to_vec();
            let k = self.rng.gen_range(0..xs.len() + bs.len());
            if k < xs.len() {
                let v = Value::int(self.rng.gen_range(-10..=10));
                self.assign(xs[k], v, 0);
            } else {
                let b = bs[k - xs.len()];
                if self.rng.gen_bool(0.5) {
                    let score = self.sb.bool_flip_score(b);
                    self.flip(b, score);
                }
            }
        } else {
            self.perturb_any();
        }
        self.non_improving = 0;
        self.best_unsat = self.sb.unsat_weight();
    }

    fn perturb_any(&mut self) {
        let (nr, nb) = {
            let a = self.sb.assignment();
            (a.reals.len(), a.bools.len())
        };
        if nr + nb == 0 {
            return;
        }
        let k = self.rng.gen_range(0..nr + nb);
        if k < nr {
            let v = Value::int(self.rng.gen_range(-10..=10));
            self.assign(RealVar(k as u32), v, 0);
        } else {
            let b = BoolVar((k - nr) as u32);
            let score = self.sb.bool_flip_score(b);
            self.flip(b, score);
        }
    }

    fn major_restart(&mut self) {
        self.stats.major_restarts += 1;
        self.minors_since_major = 0;
        self.log(format_args!("major"));
        let mut asg = self.sb.assignment().clone();
        for v in &mut asg.reals {
            *v = Value::int(self.rng.gen_range(-10..=10));
        }
        for b in &mut asg.bools {
            *b = self.rng.gen_bool(0.5);
        }
        self.sb.restore();
        self.sb.reset_weights();
        self.sb.set_assignment(asg);
        self.use_slack = self.params.mode == ValueMode::Relaxation;
        self.non_improving = 0;
        self.best_unsat = self.sb.unsat_weight();
    }

    fn log(&mut self, args: std::fmt::Arguments<'_>) {
        if let Some(t) = &mut self.trace {
            let _ = writeln!(t, "{} {}", self.stats.steps, args);
        }
    }
}
