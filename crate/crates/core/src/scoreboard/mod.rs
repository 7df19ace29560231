//! Make-break scores of moves, kept as per-clause boundary sets and updated
//! incrementally as the assignment changes.

mod store;

use std::cmp::{Ordering, Reverse};

use rand::Rng;

use crate::formula::{Assignment, BoolVar, Clause};
use crate::numeric::{
    cmp_complexity, simplest_rational_in, Complexity, ComplexityOrder, Rational, Value,
};
use crate::poly::RealVar;
use crate::roots::{clause_feasible_set, unit_infeasible_set, Interval, IntervalSet};

pub use store::{BTreeStore, BoundaryStore, SortedVecStore};

pub type ClauseId = usize;

/// A change of score for one variable caused by one clause: crossing `val`
/// from below adds (`is_make`) or removes the clause weight. An open
/// boundary takes effect just after `val`, a closed one at `val` itself.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Boundary {
    pub val: Value,
    pub is_open: bool,
    pub is_make: bool,
    pub cid: ClauseId,
}

impl Boundary {
    pub fn new(val: Value, is_open: bool, is_make: bool, cid: ClauseId) -> Boundary {
        Boundary {
            val,
            is_open,
            is_make,
            cid,
        }
    }
}

impl Ord for Boundary {
    fn cmp(&self, other: &Self) -> Ordering {
        self.val
            .cmp(&other.val)
            .then(self.is_open.cmp(&other.is_open))
            .then(self.cid.cmp(&other.cid))
            .then(self.is_make.cmp(&other.is_make))
    }
}

impl PartialOrd for Boundary {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Score information of one variable with respect to one clause.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct VarClauseScore {
    /// Score for large negative values, in units of the clause weight.
    pub start: i8,
    pub boundaries: Vec<Boundary>,
    /// Feasible set of the clause for the variable; `None` when the clause
    /// cannot be restricted to it, which blocks moves of the variable.
    pub feasible: Option<IntervalSet>,
    pub dirty: bool,
}

impl VarClauseScore {
    pub fn start_score(&self, weight: u64) -> i64 {
        i64::from(self.start) * weight as i64
    }

    fn from_feasible(f: IntervalSet, sat: bool, cid: ClauseId) -> VarClauseScore {
        let start = match (sat, f.contains_neg_inf()) {
            (false, true) => 1,
            (true, false) => -1,
            _ => 0,
        };
        let mut boundaries = Vec::with_capacity(2 * f.intervals().len());
        for iv in f.intervals() {
            if let Some(lo) = &iv.lo {
                boundaries.push(Boundary::new(lo.clone(), iv.lo_open, true, cid));
            }
            if let Some(hi) = &iv.hi {
                boundaries.push(Boundary::new(hi.clone(), !iv.hi_open, false, cid));
            }
        }
        boundaries.sort();
        VarClauseScore {
            start,
            boundaries,
            feasible: Some(f),
            dirty: false,
        }
    }

    fn unavailable(dirty: bool) -> VarClauseScore {
        VarClauseScore {
            start: 0,
            boundaries: Vec::new(),
            feasible: None,
            dirty,
        }
    }
}

/// Start score and boundaries of `x` with respect to clause `cid`.
pub fn boundaries_for(
    x: RealVar,
    cls: &Clause,
    cid: ClauseId,
    asg: &Assignment,
    eps_p: &Rational,
) -> VarClauseScore {
    let sat = cls.eval(asg, eps_p).unwrap_or(false);
    entry_for(x, cls, cid, asg, sat, eps_p)
}

fn entry_for(
    x: RealVar,
    cls: &Clause,
    cid: ClauseId,
    asg: &Assignment,
    sat: bool,
    eps_p: &Rational,
) -> VarClauseScore {
    match clause_feasible_set(cls, asg, x, eps_p) {
        Ok(f) => VarClauseScore::from_feasible(f, sat, cid),
        Err(_) => VarClauseScore::unavailable(false),
    }
}

/// Sums the weighted start scores and merges the boundary sets.
pub fn combine<'a>(
    parts: impl IntoIterator<Item = (&'a VarClauseScore, u64)>,
) -> (i64, Vec<Boundary>) {
    let mut start = 0;
    let mut all = Vec::new();
    for (p, w) in parts {
        start += p.start_score(w);
        all.extend(p.boundaries.iter().cloned());
    }
    all.sort();
    (start, all)
}

/// A maximal interval of constant make-break score.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Region {
    pub interval: Interval,
    pub score: i64,
    /// Simplest value in the interval.
    pub value: Value,
    /// Clauses with a boundary at the point, for one-point regions.
    pub cids: Vec<ClauseId>,
    /// Whether the variable's current value lies here.
    pub current: bool,
}

impl Region {
    pub fn is_point(&self) -> bool {
        self.interval.is_point()
    }
}

/// Recovers the score of every interval by walking the ordered boundaries.
pub fn traverse<'a>(
    start: i64,
    boundaries: impl IntoIterator<Item = &'a Boundary>,
    weight: impl Fn(ClauseId) -> u64,
    current: Option<&Value>,
) -> Vec<Region> {
    let mut pieces: Vec<(Interval, i64, Vec<ClauseId>)> = Vec::new();
    let mut push = |iv: Interval, score: i64, cids: Vec<ClauseId>| match pieces.last_mut() {
        Some(last) if last.1 == score => {
            last.0.hi = iv.hi;
            last.0.hi_open = iv.hi_open;
            last.2.clear();
        }
        _ => pieces.push((iv, score, cids)),
    };
    let delta = |b: &Boundary| {
        let w = weight(b.cid) as i64;
        if b.is_make {
            w
        } else {
            -w
        }
    };
    let mut score = start;
    let mut prev: Option<Value> = None;
    let mut it = boundaries.into_iter().peekable();
    while let Some(first) = it.next() {
        let v = first.val.clone();
        let mut group = vec![first];
        while let Some(b) = it.next_if(|b| b.val == v) {
            group.push(b);
        }
        push(
            Interval::new(prev.take(), true, Some(v.clone()), true),
            score,
            Vec::new(),
        );
        score += group
            .iter()
            .filter(|b| !b.is_open)
            .map(|b| delta(b))
            .sum::<i64>();
        let mut cids: Vec<ClauseId> = group.iter().map(|b| b.cid).collect();
        cids.sort_unstable();
        cids.dedup();
        push(Interval::point(v.clone()), score, cids);
        score += group
            .iter()
            .filter(|b| b.is_open)
            .map(|b| delta(b))
            .sum::<i64>();
        prev = Some(v);
    }
    push(Interval::new(prev, true, None, true), score, Vec::new());
    pieces
        .into_iter()
        .map(|(interval, score, cids)| {
            let value = if interval.is_point() {
                interval.lo.clone().expect("point")
            } else {
                let r = simplest_rational_in(
                    interval.lo.as_ref(),
                    interval.lo_open,
                    interval.hi.as_ref(),
                    interval.hi_open,
                );
                Value::Rational(r.expect("nonempty interval"))
            };
            let current = current.is_some_and(|c| interval.contains(c));
            Region {
                interval,
                score,
                value,
                cids,
                current,
            }
        })
        .collect()
}

/// How candidate values are ranked.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum ValueOrder {
    /// Highest score; simpler values break ties.
    #[default]
    ScoreFirst,
    /// Among improving moves, values within the complexity threshold first.
    Threshold,
    /// Among improving moves, simplest value first, then score.
    FullOrder,
}

/// Filters and ranking applied when choosing a move.
#[derive(Clone, Debug)]
pub struct Preference {
    pub order: ValueOrder,
    pub eps_v: Rational,
    /// Values beyond the threshold are never assigned; a one-point move to
    /// such a value may instead ask for relaxation.
    pub slack: bool,
    /// Relaxation requires the value to be more complex than every other
    /// assigned value, rather than some.
    pub relax_needs_every: bool,
    /// Avoid values in a variable's single-variable infeasible set.
    pub exclude_infeasible: bool,
}

impl Preference {
    pub fn plain(eps_v: Rational) -> Preference {
        Preference {
            order: ValueOrder::ScoreFirst,
            eps_v,
            slack: false,
            relax_needs_every: true,
            exclude_infeasible: false,
        }
    }
}

type Key = (bool, bool, Reverse<Complexity>, i64, Reverse<Complexity>);

impl Preference {
    fn key(&self, score: i64, value: &Value, critical: bool) -> Key {
        let improving = !critical && score > 0;
        let cx = value.complexity();
        let none = Reverse(Complexity::Irrational);
        match self.order {
            ValueOrder::ScoreFirst => (false, false, none.clone(), score, Reverse(cx)),
            ValueOrder::Threshold => (
                improving,
                !value.exceeds_threshold(&self.eps_v),
                none,
                score,
                Reverse(cx),
            ),
            ValueOrder::FullOrder => (improving, false, Reverse(cx), score, none),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum MoveKind {
    Flip(BoolVar),
    Real {
        var: RealVar,
        value: Value,
        one_point: bool,
        cids: Vec<ClauseId>,
    },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Move {
    pub kind: MoveKind,
    pub score: i64,
    /// Relax the contributing clauses instead of assigning the value.
    pub relax: bool,
}

struct Selection {
    best: Option<(Key, Move)>,
    ties: u32,
}

impl Selection {
    fn new() -> Selection {
        Selection {
            best: None,
            ties: 0,
        }
    }

    fn offer<R: Rng + ?Sized>(&mut self, key: Key, mv: impl FnOnce() -> Move, rng: &mut R) {
        let ord = match &self.best {
            None => Ordering::Greater,
            Some((k, _)) => key.cmp(k),
        };
        match ord {
            Ordering::Greater => {
                self.best = Some((key, mv()));
                self.ties = 1;
            }
            Ordering::Equal => {
                self.ties += 1;
                if rng.gen_range(0..self.ties) == 0 {
                    self.best = Some((key, mv()));
                }
            }
            Ordering::Less => {}
        }
    }
}

#[derive(Clone, Debug, Default)]
struct VarScore<S> {
    store: S,
    regions: Option<Vec<Region>>,
    dirty: usize,
    blocked: usize,
}

/// Clause status, weights and cached per-variable score information for
/// the current assignment.
pub struct Scoreboard<S: BoundaryStore = SortedVecStore> {
    clauses: Vec<Clause>,
    weights: Vec<u64>,
    asg: Assignment,
    eps_p: Rational,
    incremental: bool,
    lit_true: Vec<Vec<bool>>,
    sat_count: Vec<usize>,
    unsat: Vec<ClauseId>,
    unsat_pos: Vec<usize>,
    unsat_weight: u64,
    real_occ: Vec<Vec<ClauseId>>,
    bool_occ: Vec<Vec<ClauseId>>,
    clause_slots: Vec<Vec<(RealVar, usize)>>,
    clause_bools: Vec<Vec<BoolVar>>,
    real_unsat: Vec<usize>,
    bool_unsat: Vec<usize>,
    entries: Vec<Vec<VarClauseScore>>,
    vars: Vec<VarScore<S>>,
    allowed: Vec<Option<IntervalSet>>,
    recomputed: u64,
}

const NOT_UNSAT: usize = usize::MAX;

impl<S: BoundaryStore> Scoreboard<S> {
    pub fn new(
        clauses: Vec<Clause>,
        asg: Assignment,
        eps_p: Rational,
        incremental: bool,
    ) -> Scoreboard<S> {
        let (nr, nb, m) = (asg.reals.len(), asg.bools.len(), clauses.len());
        let mut real_occ = vec![Vec::new(); nr];
        let mut bool_occ = vec![Vec::new(); nb];
        let mut clause_slots = Vec::with_capacity(m);
        let mut clause_bools = Vec::with_capacity(m);
        let mut entries: Vec<Vec<VarClauseScore>> = vec![Vec::new(); nr];
        let mut infeasible: Vec<Option<IntervalSet>> = vec![None; nr];
        for (c, cls) in clauses.iter().enumerate() {
            let mut slots = Vec::new();
            for x in cls.real_vars() {
                slots.push((x, real_occ[x.index()].len()));
                real_occ[x.index()].push(c);
                entries[x.index()].push(VarClauseScore::unavailable(true));
            }
            clause_slots.push(slots);
            let bs = cls.bool_vars();
            for b in &bs {
                bool_occ[b.index()].push(c);
            }
            clause_bools.push(bs);
            if let Ok((x, inf)) = unit_infeasible_set(cls) {
                let slot = &mut infeasible[x.index()];
                *slot = Some(slot.take().map_or(inf.clone(), |s| s.union(&inf)));
            }
        }
        let vars = entries
            .iter()
            .map(|e| VarScore {
                dirty: e.len(),
                ..VarScore::default()
            })
            .collect();
        let mut sb = Scoreboard {
            weights: vec![1; m],
            lit_true: clauses
                .iter()
                .map(|c| vec![false; c.literals.len()])
                .collect(),
            sat_count: vec![0; m],
            unsat: Vec::new(),
            unsat_pos: vec![NOT_UNSAT; m],
            unsat_weight: 0,
            clauses,
            asg,
            eps_p,
            incremental,
            real_occ,
            bool_occ,
            clause_slots,
            clause_bools,
            real_unsat: vec![0; nr],
            bool_unsat: vec![0; nb],
            entries,
            vars,
            allowed: infeasible
                .into_iter()
                .map(|s| s.map(|s| s.complement()))
                .collect(),
            recomputed: 0,
        };
        for c in 0..m {
            sb.refresh(c, |_| true);
        }
        sb
    }

    pub fn clauses(&self) -> &[Clause] {
        &self.clauses
    }

    pub fn assignment(&self) -> &Assignment {
        &self.asg
    }

    pub fn eps_p(&self) -> &Rational {
        &self.eps_p
    }

    pub fn weights(&self) -> &[u64] {
        &self.weights
    }

    pub fn is_incremental(&self) -> bool {
        self.incremental
    }

    pub fn is_sat(&self, c: ClauseId) -> bool {
        self.sat_count[c] > 0
    }

    pub fn unsat_clauses(&self) -> &[ClauseId] {
        &self.unsat
    }

    pub fn unsat_weight(&self) -> u64 {
        self.unsat_weight
    }

    pub fn all_sat(&self) -> bool {
        self.unsat.is_empty()
    }

    pub fn real_occurrences(&self, x: RealVar) -> &[ClauseId] {
        &self.real_occ[x.index()]
    }

    pub fn clause_reals(&self, c: ClauseId) -> impl Iterator<Item = RealVar> + '_ {
        self.clause_slots[c].iter().map(|&(x, _)| x)
    }

    pub fn clause_bools(&self, c: ClauseId) -> &[BoolVar] {
        &self.clause_bools[c]
    }

    /// Values allowed by the single-variable clauses over `x`, if any.
    pub fn allowed_set(&self, x: RealVar) -> Option<&IntervalSet> {
        self.allowed[x.index()].as_ref()
    }

    /// Number of per-clause entries recomputed so far.
    pub fn recomputed(&self) -> u64 {
        self.recomputed
    }

    pub fn relaxed_literals(&self) -> usize {
        self.clauses
            .iter()
            .flat_map(|c| &c.literals)
            .filter(|l| l.relaxed)
            .count()
    }

    pub fn set_weights(&mut self, weights: Vec<u64>) {
        assert_eq!(weights.len(), self.clauses.len());
        assert!(weights.iter().all(|&w| w >= 1));
        self.weights = weights;
        self.unsat_weight = self.unsat.iter().map(|&c| self.weights[c]).sum();
        self.stale_all();
    }

    pub fn reset_weights(&mut self) {
        self.set_weights(vec![1; self.clauses.len()]);
    }

    /// Assigns `v` to `x` and updates everything sharing a clause with it.
    pub fn assign(&mut self, x: RealVar, v: Value) {
        self.asg.reals[x.index()] = v;
        let occ = self.real_occ[x.index()].clone();
        for &c in &occ {
            if self.refresh(c, |l| l.contains_var(x)) {
                self.mark_clause(c);
            } else {
                self.mark_sharing(c, x);
            }
        }
        self.after_change(&occ);
    }

    pub fn flip(&mut self, b: BoolVar) {
        self.asg.bools[b.index()] ^= true;
        let occ = self.bool_occ[b.index()].clone();
        for &c in &occ {
            self.refresh(c, |l| l.bool_var() == Some(b));
            self.mark_clause(c);
        }
        self.after_change(&occ);
    }

    /// Replaces the whole assignment.
    pub fn set_assignment(&mut self, asg: Assignment) {
        assert_eq!(asg.reals.len(), self.asg.reals.len());
        assert_eq!(asg.bools.len(), self.asg.bools.len());
        self.asg = asg;
        let all: Vec<ClauseId> = (0..self.clauses.len()).collect();
        for &c in &all {
            self.refresh(c, |_| true);
            self.mark_clause(c);
        }
        self.after_change(&all);
    }

    /// Switches every non-negated comparison of clause `c` to its relaxed
    /// form; returns how many literals changed.
    pub fn relax_clause(&mut self, c: ClauseId) -> usize {
        let mut n = 0;
        for l in &mut self.clauses[c].literals {
            if l.is_relaxable() && !l.relaxed {
                l.relaxed = true;
                n += 1;
            }
        }
        if n > 0 {
            self.refresh(c, |_| true);
            self.mark_clause(c);
            self.after_change(&[c]);
        }
        n
    }

    /// Returns every relaxed literal to its original form.
    pub fn restore(&mut self) -> usize {
        let mut touched = Vec::new();
        let mut n = 0;
        for (c, cls) in self.clauses.iter_mut().enumerate() {
            let k = cls.literals.iter().filter(|l| l.relaxed).count();
            if k > 0 {
                cls.literals.iter_mut().for_each(|l| l.relaxed = false);
                touched.push(c);
                n += k;
            }
        }
        for &c in &touched {
            self.refresh(c, |_| true);
            self.mark_clause(c);
        }
        self.after_change(&touched);
        n
    }

    /// One weighting step at a local minimum: with probability `sp` every
    /// satisfied clause heavier than 1 loses one unit, otherwise every
    /// unsatisfied clause gains one. Returns true for the increase branch.
    pub fn paws_update<R: Rng + ?Sized>(&mut self, sp: f64, rng: &mut R) -> bool {
        let smooth = rng.gen_bool(sp);
        let mut touched = Vec::new();
        if smooth {
            for c in 0..self.clauses.len() {
                if self.sat_count[c] > 0 && self.weights[c] > 1 {
                    self.weights[c] -= 1;
                    touched.push(c);
                }
            }
        } else {
            for &c in &self.unsat {
                self.weights[c] += 1;
                self.unsat_weight += 1;
                touched.push(c);
            }
        }
        if self.incremental {
            for &c in &touched {
                for &(y, _) in &self.clause_slots[c] {
                    self.vars[y.index()].regions = None;
                }
            }
        } else {
            self.invalidate_all();
        }
        !smooth
    }

    /// Total weight of clauses made satisfied minus made unsatisfied by
    /// flipping `b`.
    pub fn bool_flip_score(&self, b: BoolVar) -> i64 {
        let mut score = 0;
        for &c in &self.bool_occ[b.index()] {
            let (mut now, mut after) = (0, 0);
            for (i, l) in self.clauses[c].literals.iter().enumerate() {
                if l.bool_var() == Some(b) {
                    now += usize::from(self.lit_true[c][i]);
                    after += usize::from(!self.lit_true[c][i]);
                }
            }
            let before = self.sat_count[c];
            let new = before - now + after;
            let w = self.weights[c] as i64;
            if before == 0 && new > 0 {
                score += w;
            } else if before > 0 && new == 0 {
                score -= w;
            }
        }
        score
    }

    /// Per-clause entries of `x`, brought up to date.
    pub fn entries(&mut self, x: RealVar) -> &[VarClauseScore] {
        self.flush(x);
        &self.entries[x.index()]
    }

    /// Weighted start score and ordered boundary union of `x`.
    pub fn combined(&mut self, x: RealVar) -> (i64, Vec<Boundary>) {
        self.flush(x);
        (self.start_of(x), self.vars[x.index()].store.to_vec())
    }

    /// Score regions of `x` from left to right.
    pub fn regions(&mut self, x: RealVar) -> &[Region] {
        self.ensure_regions(x);
        self.vars[x.index()].regions.as_deref().expect("computed")
    }

    /// Whether some clause of `x` cannot be restricted to `x`.
    pub fn is_blocked(&mut self, x: RealVar) -> bool {
        self.flush(x);
        self.vars[x.index()].blocked > 0
    }

    /// The best move among flips of booleans and moves of reals occurring in
    /// unsatisfied clauses.
    pub fn best_move<R: Rng + ?Sized>(&mut self, pref: &Preference, rng: &mut R) -> Option<Move> {
        let xs: Vec<RealVar> = (0..self.vars.len())
            .filter(|&i| self.real_unsat[i] > 0)
            .map(|i| RealVar(i as u32))
            .collect();
        for &x in &xs {
            self.ensure_regions(x);
        }
        let mut sel = Selection::new();
        for &x in &xs {
            self.offer_regions(x, None, pref, &mut sel, rng);
        }
        let one = Value::int(1);
        for i in 0..self.bool_unsat.len() {
            if self.bool_unsat[i] > 0 {
                let b = BoolVar(i as u32);
                let score = self.bool_flip_score(b);
                sel.offer(
                    pref.key(score, &one, false),
                    || Move {
                        kind: MoveKind::Flip(b),
                        score,
                        relax: false,
                    },
                    rng,
                );
            }
        }
        sel.best.map(|(_, m)| m)
    }

    /// The best move that satisfies clause `c`, of any score.
    pub fn critical_move<R: Rng + ?Sized>(
        &mut self,
        c: ClauseId,
        pref: &Preference,
        rng: &mut R,
    ) -> Option<Move> {
        let xs: Vec<RealVar> = self.clause_reals(c).collect();
        for &x in &xs {
            self.ensure_regions(x);
        }
        let mut sel = Selection::new();
        for &x in &xs {
            self.offer_regions(x, Some(c), pref, &mut sel, rng);
        }
        let one = Value::int(1);
        for &b in &self.clause_bools[c] {
            let score = self.bool_flip_score(b);
            sel.offer(
                pref.key(score, &one, true),
                || Move {
                    kind: MoveKind::Flip(b),
                    score,
                    relax: false,
                },
                rng,
            );
        }
        sel.best.map(|(_, m)| m)
    }

    /// Whether some other variable of a clause of `x` holds an irrational
    /// value. Assigning `x` an irrational value is then refused, so that no
    /// clause ever involves two irrational values.
    pub fn irrational_neighbour(&self, x: RealVar) -> bool {
        self.real_occ[x.index()].iter().any(|&c| {
            self.clause_slots[c]
                .iter()
                .any(|&(y, _)| y != x && !self.asg.reals[y.index()].is_rational())
        })
    }

    /// Whether `value` for `x` is strictly more complex than every (or,
    /// without `every`, some) other assigned value.
    pub fn more_complex_than_assigned(&self, x: RealVar, value: &Value, every: bool) -> bool {
        let mut others = self
            .asg
            .reals
            .iter()
            .enumerate()
            .filter(|&(i, _)| i != x.index())
            .map(|(_, v)| v);
        let succ = |v: &Value| cmp_complexity(value, v) == ComplexityOrder::Succ;
        if every {
            others.all(succ)
        } else {
            let mut others = others.peekable();
            others.peek().is_none() || others.any(succ)
        }
    }

    fn offer_regions<R: Rng + ?Sized>(
        &self,
        x: RealVar,
        only: Option<ClauseId>,
        pref: &Preference,
        sel: &mut Selection,
        rng: &mut R,
    ) {
        let vs = &self.vars[x.index()];
        if vs.blocked > 0 {
            return;
        }
        let target = only.map(|c| {
            let &(_, k) = self.clause_slots[c]
                .iter()
                .find(|(y, _)| *y == x)
                .expect("x occurs in c");
            self.entries[x.index()][k]
                .feasible
                .as_ref()
                .expect("not blocked")
        });
        let allowed = if pref.exclude_infeasible {
            self.allowed[x.index()].as_ref()
        } else {
            None
        };
        for r in vs.regions.as_deref().expect("computed") {
            if r.current || target.is_some_and(|f| !f.contains(&r.value)) {
                continue;
            }
            let value = match allowed {
                Some(a) => match simplest_allowed(r, a) {
                    Some(v) => v,
                    None => continue,
                },
                None => r.value.clone(),
            };
            if !value.is_rational() && self.irrational_neighbour(x) {
                continue;
            }
            let mut relax = false;
            if pref.slack && value.exceeds_threshold(&pref.eps_v) {
                let eligible = r.is_point()
                    && self.more_complex_than_assigned(x, &value, pref.relax_needs_every)
                    && r.cids.iter().any(|&c| {
                        self.clauses[c]
                            .literals
                            .iter()
                            .any(|l| l.is_relaxable() && !l.relaxed)
                    });
                if !eligible {
                    continue;
                }
                relax = true;
            }
            let key = pref.key(r.score, &value, only.is_some());
            sel.offer(
                key,
                || Move {
                    kind: MoveKind::Real {
                        var: x,
                        value,
                        one_point: r.is_point(),
                        cids: r.cids.clone(),
                    },
                    score: r.score,
                    relax,
                },
                rng,
            );
        }
    }

    fn start_of(&self, x: RealVar) -> i64 {
        self.entries[x.index()]
            .iter()
            .zip(&self.real_occ[x.index()])
            .map(|(e, &c)| e.start_score(self.weights[c]))
            .sum()
    }

    fn ensure_regions(&mut self, x: RealVar) {
        self.flush(x);
        if self.vars[x.index()].regions.is_none() {
            let start = self.start_of(x);
            let weights = &self.weights;
            let regions = traverse(
                start,
                self.vars[x.index()].store.iter(),
                |c| weights[c],
                Some(&self.asg.reals[x.index()]),
            );
            self.vars[x.index()].regions = Some(regions);
        }
    }

    /// Recomputes the dirty entries of `x`.
    fn flush(&mut self, x: RealVar) {
        let i = x.index();
        if self.vars[i].dirty == 0 {
            return;
        }
        for k in 0..self.real_occ[i].len() {
            if !self.entries[i][k].dirty {
                continue;
            }
            let c = self.real_occ[i][k];
            let fresh = entry_for(
                x,
                &self.clauses[c],
                c,
                &self.asg,
                self.sat_count[c] > 0,
                &self.eps_p,
            );
            self.recomputed += 1;
            let vs = &mut self.vars[i];
            let old = std::mem::replace(&mut self.entries[i][k], fresh);
            for b in &old.boundaries {
                let removed = vs.store.remove(b);
                debug_assert!(removed);
            }
            for b in &self.entries[i][k].boundaries {
                vs.store.insert(b.clone());
            }
        }
        self.vars[i].blocked = self.entries[i]
            .iter()
            .filter(|e| e.feasible.is_none())
            .count();
        self.vars[i].dirty = 0;
        self.vars[i].regions = None;
    }

    /// Re-evaluates the literals of `c` selected by `which` and updates the
    /// clause status.
    /// Re-evaluates the literals of `c` selected by `which`; true if any
    /// changed truth value.
    fn refresh(&mut self, c: ClauseId, which: impl Fn(&crate::formula::Literal) -> bool) -> bool {
        let was_sat = self.sat_count[c] > 0;
        let mut count = self.sat_count[c];
        let mut flipped = false;
        for (i, l) in self.clauses[c].literals.iter().enumerate() {
            if which(l) {
                let t = l.eval(&self.asg, &self.eps_p).unwrap_or(false);
                if t != self.lit_true[c][i] {
                    flipped = true;
                    if t {
                        count += 1;
                    } else {
                        count -= 1;
                    }
                    self.lit_true[c][i] = t;
                }
            }
        }
        self.sat_count[c] = count;
        let now_sat = count > 0;
        let first = self.unsat_pos[c] == NOT_UNSAT && !was_sat;
        if now_sat == was_sat && !first {
            return flipped;
        }
        if now_sat {
            if self.unsat_pos[c] != NOT_UNSAT {
                self.remove_unsat(c);
            }
        } else if self.unsat_pos[c] == NOT_UNSAT {
            self.unsat_pos[c] = self.unsat.len();
            self.unsat.push(c);
            self.unsat_weight += self.weights[c];
            for &(y, _) in &self.clause_slots[c] {
                self.real_unsat[y.index()] += 1;
            }
            for &b in &self.clause_bools[c] {
                self.bool_unsat[b.index()] += 1;
            }
        }
        flipped
    }

    fn remove_unsat(&mut self, c: ClauseId) {
        let pos = self.unsat_pos[c];
        self.unsat.swap_remove(pos);
        if let Some(&moved) = self.unsat.get(pos) {
            self.unsat_pos[moved] = pos;
        }
        self.unsat_pos[c] = NOT_UNSAT;
        self.unsat_weight -= self.weights[c];
        for &(y, _) in &self.clause_slots[c] {
            self.real_unsat[y.index()] -= 1;
        }
        for &b in &self.clause_bools[c] {
            self.bool_unsat[b.index()] -= 1;
        }
    }

    /// Marks the entries of `c` whose variable shares a literal with `x`;
    /// with no literal changing truth value the others stay valid.
    fn mark_sharing(&mut self, c: ClauseId, x: RealVar) {
        let lits = &self.clauses[c].literals;
        for &(y, k) in &self.clause_slots[c] {
            if y != x && !lits.iter().any(|l| l.contains_var(x) && l.contains_var(y)) {
                continue;
            }
            let e = &mut self.entries[y.index()][k];
            if !e.dirty {
                e.dirty = true;
                self.vars[y.index()].dirty += 1;
            }
            self.vars[y.index()].regions = None;
        }
    }

    fn mark_clause(&mut self, c: ClauseId) {
        for &(y, k) in &self.clause_slots[c] {
            let e = &mut self.entries[y.index()][k];
            if !e.dirty {
                e.dirty = true;
                self.vars[y.index()].dirty += 1;
            }
            self.vars[y.index()].regions = None;
        }
    }

    fn after_change(&mut self, touched: &[ClauseId]) {
        if !self.incremental {
            self.invalidate_all();
            return;
        }
        let mut ys: Vec<RealVar> = touched
            .iter()
            .flat_map(|&c| self.clause_slots[c].iter().map(|&(y, _)| y))
            .collect();
        ys.sort_unstable();
        ys.dedup();
        for y in ys {
            if self.real_unsat[y.index()] > 0 {
                self.ensure_regions(y);
            }
        }
    }

    fn stale_all(&mut self) {
        for v in &mut self.vars {
            v.regions = None;
        }
    }

    fn invalidate_all(&mut self) {
        for (i, es) in self.entries.iter_mut().enumerate() {
            for e in es.iter_mut() {
                if !e.dirty {
                    e.dirty = true;
                    self.vars[i].dirty += 1;
                }
            }
            self.vars[i].regions = None;
        }
    }

    /// Brings every variable up to date and compares all cached information
    /// with a computation from scratch.
    pub fn audit(&mut self) -> Result<(), String> {
        let zero_asg = &self.asg;
        for (c, cls) in self.clauses.iter().enumerate() {
            let sat = cls.eval(zero_asg, &self.eps_p).unwrap_or(false);
            if sat != (self.sat_count[c] > 0) || sat == (self.unsat_pos[c] != NOT_UNSAT) {
                return Err(format!("status of clause {c}"));
            }
        }
        let w: u64 = self.unsat.iter().map(|&c| self.weights[c]).sum();
        if w != self.unsat_weight {
            return Err("unsatisfied weight".into());
        }
        for i in 0..self.vars.len() {
            let x = RealVar(i as u32);
            self.ensure_regions(x);
            let fresh: Vec<VarClauseScore> = self.real_occ[i]
                .iter()
                .map(|&c| boundaries_for(x, &self.clauses[c], c, &self.asg, &self.eps_p))
                .collect();
            if fresh != self.entries[i] {
                return Err(format!(
                    "entries of x{i}: cached {:?} fresh {:?}",
                    self.entries[i], fresh
                ));
            }
            let (start, merged) = combine(
                fresh
                    .iter()
                    .zip(&self.real_occ[i])
                    .map(|(e, &c)| (e, self.weights[c])),
            );
            if merged != self.vars[i].store.to_vec() {
                return Err(format!("boundary union of x{i}"));
            }
            let blocked = fresh.iter().filter(|e| e.feasible.is_none()).count();
            if blocked != self.vars[i].blocked {
                return Err(format!("blocked count of x{i}"));
            }
            let regions = traverse(
                start,
                &merged,
                |c| self.weights[c],
                Some(&self.asg.reals[i]),
            );
            if Some(&regions) != self.vars[i].regions.as_ref() {
                return Err(format!("regions of x{i}"));
            }
        }
        Ok(())
    }
}

/// Simplest value of the region that lies in `allowed`.
fn simplest_allowed(r: &Region, allowed: &IntervalSet) -> Option<Value> {
    if allowed.contains(&r.value) {
        return Some(r.value.clone());
    }
    let part = IntervalSet::from_intervals(vec![r.interval.clone()]).intersect(allowed);
    part.intervals()
        .iter()
        .map(|iv| {
            if iv.is_point() {
                iv.lo.clone().expect("point")
            } else {
                let r =
                    simplest_rational_in(iv.lo.as_ref(), iv.lo_open, iv.hi.as_ref(), iv.hi_open);
                Value::Rational(r.expect("nonempty interval"))
            }
        })
        .min_by(|a, b| a.complexity().cmp(&b.complexity()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formula::{Atom, CmpKind, Literal};
    use crate::poly::Polynomial;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn v(i: u32) -> Polynomial {
        Polynomial::var(RealVar(i))
    }

    fn b(val: i64, open: bool, make: bool, cid: ClauseId) -> Boundary {
        Boundary::new(Value::int(val), open, make, cid)
    }

    fn unit(l: Literal) -> Clause {
        Clause::new(vec![l])
    }

    /// x^2 + y^2 <= 1, x + y < 1, x + z > 0 at x = y = z = 1, weights 1, 3, 2.
    fn example() -> Scoreboard {
        let one = Polynomial::int(1);
        let clauses = vec![
            unit(Literal::pos(Atom::cmp(
                v(0).mul(&v(0)).add(&v(1).mul(&v(1))).sub(&one),
                CmpKind::Le,
            ))),
            unit(Literal::neg(Atom::cmp(
                v(0).add(&v(1)).sub(&one),
                CmpKind::Ge,
            ))),
            unit(Literal::neg(Atom::cmp(v(0).add(&v(2)), CmpKind::Le))),
        ];
        let asg = Assignment {
            bools: vec![],
            reals: vec![Value::int(1); 3],
        };
        let mut sb = Scoreboard::new(clauses, asg, Rational::new(1.into(), 10000.into()), true);
        sb.set_weights(vec![1, 3, 2]);
        sb
    }

    #[test]
    fn per_clause_boundaries() {
        let mut sb = example();
        let e = sb.entries(RealVar(0)).to_vec();
        assert_eq!(
            (e[0].start_score(1), e[0].boundaries.clone()),
            (0, vec![b(0, false, true, 0), b(0, true, false, 0)])
        );
        assert_eq!(
            (e[1].start_score(3), e[1].boundaries.clone()),
            (3, vec![b(0, false, false, 1)])
        );
        assert_eq!(
            (e[2].start_score(2), e[2].boundaries.clone()),
            (-2, vec![b(-1, true, true, 2)])
        );
    }

    #[test]
    fn combined_and_intervals() {
        let mut sb = example();
        let (start, bs) = sb.combined(RealVar(0));
        assert_eq!(start, 1);
        assert_eq!(
            bs,
            vec![
                b(-1, true, true, 2),
                b(0, false, true, 0),
                b(0, false, false, 1),
                b(0, true, false, 0)
            ]
        );
        let got: Vec<(String, i64)> = sb
            .regions(RealVar(0))
            .iter()
            .map(|r| (r.interval.to_string(), r.score))
            .collect();
        let want = [
            ("(-inf, -1]", 1),
            ("(-1, 0)", 3),
            ("[0, 0]", 1),
            ("(0, +inf)", 0),
        ];
        assert_eq!(got, want.map(|(s, k)| (s.to_string(), k)));
    }

    #[test]
    fn best_move_of_example() {
        let mut sb = example();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let m = sb
            .best_move(
                &Preference::plain(Rational::new(1.into(), 10000.into())),
                &mut rng,
            )
            .unwrap();
        assert_eq!(m.score, 3);
        // y into (-inf, 0) ties with x and has the simpler value
        assert_eq!(
            m.kind,
            MoveKind::Real {
                var: RealVar(1),
                value: Value::int(-1),
                one_point: false,
                cids: vec![]
            }
        );
        let top = sb
            .regions(RealVar(0))
            .iter()
            .max_by_key(|r| r.score)
            .unwrap()
            .clone();
        assert_eq!(
            (top.interval.to_string(), top.score, top.value),
            ("(-1, 0)".to_string(), 3, Value::ratio(-1, 2))
        );
    }

    #[test]
    fn update_after_move() {
        let mut sb = example();
        sb.audit().unwrap();
        let before = sb.recomputed();
        sb.assign(RealVar(1), Value::int(-2));
        // z shares no clause with y
        assert!(!sb.entries[2][0].dirty);
        assert_eq!(
            sb.combined(RealVar(0)),
            (-2, vec![b(-1, true, true, 2), b(3, false, false, 1)])
        );
        assert_eq!(sb.recomputed() - before, 4);
        sb.audit().unwrap();
    }

    #[test]
    fn moving_unused_variable_changes_nothing() {
        let mut sb = example();
        let clauses = sb.clauses().to_vec();
        let asg = Assignment {
            bools: vec![],
            reals: vec![Value::int(1); 4],
        };
        let mut sb2: Scoreboard = Scoreboard::new(clauses, asg, sb.eps_p().clone(), true);
        sb2.set_weights(vec![1, 3, 2]);
        sb2.audit().unwrap();
        let n = sb2.recomputed();
        sb2.assign(RealVar(3), Value::int(5));
        assert_eq!(sb2.recomputed(), n);
        assert_eq!(sb.combined(RealVar(0)), sb2.combined(RealVar(0)));
    }

    #[test]
    fn sqrt2_one_point_move() {
        let two = Polynomial::int(2);
        let cls = vec![unit(Literal::pos(Atom::cmp(
            v(0).mul(&v(0)).sub(&two),
            CmpKind::Eq,
        )))];
        let asg = Assignment {
            bools: vec![],
            reals: vec![Value::zero()],
        };
        let mut sb: Scoreboard =
            Scoreboard::new(cls, asg, Rational::new(1.into(), 10000.into()), true);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let m = sb
            .best_move(
                &Preference::plain(Rational::new(1.into(), 10000.into())),
                &mut rng,
            )
            .unwrap();
        let MoveKind::Real {
            value,
            one_point,
            cids,
            ..
        } = m.kind
        else {
            panic!("real move expected")
        };
        assert!(one_point);
        assert_eq!(cids, vec![0]);
        assert!(!value.is_rational());
        assert!((value.to_f64().abs() - 2f64.sqrt()).abs() < 1e-9);
    }

    fn bool_board(clauses: Vec<Clause>, bools: Vec<bool>) -> Scoreboard {
        Scoreboard::new(
            clauses,
            Assignment {
                bools,
                reals: vec![],
            },
            Rational::from_integer(0.into()),
            true,
        )
    }

    fn bl(i: u32, neg: bool) -> Literal {
        Literal {
            atom: Atom::Bool(BoolVar(i)),
            negated: neg,
            relaxed: false,
        }
    }

    #[test]
    fn flip_scores() {
        let mut sb = bool_board(vec![unit(bl(0, false))], vec![false]);
        sb.set_weights(vec![2]);
        assert_eq!(sb.bool_flip_score(BoolVar(0)), 2);

        // flipping b breaks {b} (weight 3) and makes {!b, c} (weight 1)
        let mut sb = bool_board(
            vec![
                unit(bl(0, false)),
                Clause::new(vec![bl(0, true), bl(1, false)]),
            ],
            vec![true, false],
        );
        sb.set_weights(vec![3, 1]);
        assert_eq!(sb.bool_flip_score(BoolVar(0)), -2);

        let sb = bool_board(vec![unit(bl(0, false))], vec![true, true]);
        assert_eq!(sb.bool_flip_score(BoolVar(1)), 0);
    }

    /// Rng whose Bernoulli draws all come out as `hit`.
    struct Fixed(bool);

    impl rand::RngCore for Fixed {
        fn next_u32(&mut self) -> u32 {
            self.next_u64() as u32
        }
        fn next_u64(&mut self) -> u64 {
            if self.0 {
                0
            } else {
                u64::MAX
            }
        }
        fn fill_bytes(&mut self, dest: &mut [u8]) {
            dest.fill(if self.0 { 0 } else { 0xff });
        }
        fn try_fill_bytes(&mut self, dest: &mut [u8]) -> Result<(), rand::Error> {
            self.fill_bytes(dest);
            Ok(())
        }
    }

    #[test]
    fn paws_branches() {
        let mut sb = bool_board(
            vec![unit(bl(0, false)), unit(bl(1, false))],
            vec![true, false],
        );
        sb.set_weights(vec![1, 3]);
        assert!(sb.paws_update(0.006, &mut Fixed(false)));
        assert_eq!(sb.weights(), &[1, 4]);
        assert_eq!(sb.unsat_weight(), 4);

        let mut sb = bool_board(
            vec![unit(bl(0, false)), unit(bl(1, false))],
            vec![true, true],
        );
        sb.set_weights(vec![1, 3]);
        assert!(!sb.paws_update(0.006, &mut Fixed(true)));
        assert_eq!(sb.weights(), &[1, 2]);
    }

    #[test]
    fn relaxing_and_restoring() {
        let two = Polynomial::int(2);
        let cls = vec![unit(Literal::pos(Atom::cmp(
            v(0).mul(&v(0)).sub(&two),
            CmpKind::Eq,
        )))];
        let asg = Assignment {
            bools: vec![],
            reals: vec![Value::ratio(239, 169)],
        };
        let mut sb: Scoreboard =
            Scoreboard::new(cls, asg, Rational::new(1.into(), 10000.into()), true);
        assert!(!sb.all_sat());
        assert_eq!(sb.relax_clause(0), 1);
        assert!(sb.all_sat());
        assert_eq!(sb.relax_clause(0), 0);
        sb.audit().unwrap();
        assert_eq!(sb.restore(), 1);
        assert!(!sb.all_sat());
        sb.audit().unwrap();
    }

    #[test]
    fn stores_agree() {
        let mut a = example();
        let mut bt: Scoreboard<BTreeStore> = Scoreboard::new(
            a.clauses().to_vec(),
            a.assignment().clone(),
            a.eps_p().clone(),
            true,
        );
        bt.set_weights(vec![1, 3, 2]);
        for x in 0..3 {
            assert_eq!(a.combined(RealVar(x)), bt.combined(RealVar(x)));
            assert_eq!(a.regions(RealVar(x)), bt.regions(RealVar(x)));
        }
        bt.assign(RealVar(1), Value::int(-2));
        bt.audit().unwrap();
    }
}
