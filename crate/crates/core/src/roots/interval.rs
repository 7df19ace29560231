use std::cmp::Ordering;
use std::fmt;

use crate::numeric::{cmp_value, Value};

/// Interval of the real line; `None` endpoints are infinite and always open.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Interval {
    pub lo: Option<Value>,
    pub lo_open: bool,
    pub hi: Option<Value>,
    pub hi_open: bool,
}

impl Interval {
    pub fn full() -> Interval {
        Interval {
            lo: None,
            lo_open: true,
            hi: None,
            hi_open: true,
        }
    }

    pub fn point(v: Value) -> Interval {
        Interval {
            lo: Some(v.clone()),
            lo_open: false,
            hi: Some(v),
            hi_open: false,
        }
    }

    pub fn new(lo: Option<Value>, lo_open: bool, hi: Option<Value>, hi_open: bool) -> Interval {
        Interval {
            lo_open: lo_open || lo.is_none(),
            hi_open: hi_open || hi.is_none(),
            lo,
            hi,
        }
    }

    pub fn is_point(&self) -> bool {
        match (&self.lo, &self.hi) {
            (Some(a), Some(b)) => cmp_value(a, b) == Ordering::Equal,
            _ => false,
        }
    }

    pub fn is_empty(&self) -> bool {
        match (&self.lo, &self.hi) {
            (Some(a), Some(b)) => match cmp_value(a, b) {
                Ordering::Less => false,
                Ordering::Equal => self.lo_open || self.hi_open,
                Ordering::Greater => true,
            },
            _ => false,
        }
    }

    pub fn contains(&self, v: &Value) -> bool {
        let above = match &self.lo {
            None => true,
            Some(l) => match cmp_value(l, v) {
                Ordering::Less => true,
                Ordering::Equal => !self.lo_open,
                Ordering::Greater => false,
            },
        };
        above
            && match &self.hi {
                None => true,
                Some(h) => match cmp_value(v, h) {
                    Ordering::Less => true,
                    Ordering::Equal => !self.hi_open,
                    Ordering::Greater => false,
                },
            }
    }
}

impl fmt::Display for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let l = if self.lo_open { '(' } else { '[' };
        let r = if self.hi_open { ')' } else { ']' };
        let lo = self
            .lo
            .as_ref()
            .map_or("-inf".to_string(), |v| v.to_string());
        let hi = self
            .hi
            .as_ref()
            .map_or("+inf".to_string(), |v| v.to_string());
        write!(f, "{l}{lo}, {hi}{r}")
    }
}

/// Sorted, pairwise disjoint, maximally merged intervals.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct IntervalSet {
    intervals: Vec<Interval>,
}

impl IntervalSet {
    pub fn empty() -> IntervalSet {
        IntervalSet {
            intervals: Vec::new(),
        }
    }

    pub fn full() -> IntervalSet {
        IntervalSet {
            intervals: vec![Interval::full()],
        }
    }

    pub fn point(v: Value) -> IntervalSet {
        IntervalSet {
            intervals: vec![Interval::point(v)],
        }
    }

    pub fn from_intervals(intervals: Vec<Interval>) -> IntervalSet {
        let intervals: Vec<Interval> = intervals.into_iter().filter(|i| !i.is_empty()).collect();
        let cuts = cuts_of(intervals.iter());
        let mem = membership(&intervals, &cuts);
        rebuild(&cuts, &mem)
    }

    pub fn intervals(&self) -> &[Interval] {
        &self.intervals
    }

    pub fn is_empty(&self) -> bool {
        self.intervals.is_empty()
    }

    pub fn is_full(&self) -> bool {
        self.intervals.len() == 1
            && self.intervals[0].lo.is_none()
            && self.intervals[0].hi.is_none()
    }

    pub fn contains(&self, v: &Value) -> bool {
        let i = self.intervals.partition_point(|iv| match &iv.hi {
            None => false,
            Some(h) => match cmp_value(h, v) {
                Ordering::Less => true,
                Ordering::Equal => iv.hi_open,
                Ordering::Greater => false,
            },
        });
        self.intervals.get(i).is_some_and(|iv| iv.contains(v))
    }

    /// Whether arbitrarily negative values belong to the set.
    pub fn contains_neg_inf(&self) -> bool {
        self.intervals.first().is_some_and(|i| i.lo.is_none())
    }

    pub fn contains_pos_inf(&self) -> bool {
        self.intervals.last().is_some_and(|i| i.hi.is_none())
    }

    pub fn union(&self, other: &IntervalSet) -> IntervalSet {
        self.combine(other, |a, b| a || b)
    }

    pub fn intersect(&self, other: &IntervalSet) -> IntervalSet {
        self.combine(other, |a, b| a && b)
    }

    pub fn complement(&self) -> IntervalSet {
        let cuts = cuts_of(self.intervals.iter());
        let mem: Vec<bool> = membership(&self.intervals, &cuts)
            .into_iter()
            .map(|m| !m)
            .collect();
        rebuild(&cuts, &mem)
    }

    fn combine(&self, other: &IntervalSet, f: impl Fn(bool, bool) -> bool) -> IntervalSet {
        let cuts = cuts_of(self.intervals.iter().chain(other.intervals.iter()));
        let a = membership(&self.intervals, &cuts);
        let b = membership(&other.intervals, &cuts);
        let mem: Vec<bool> = a.into_iter().zip(b).map(|(x, y)| f(x, y)).collect();
        rebuild(&cuts, &mem)
    }

    /// Builds a set from the sign pattern of a polynomial: `cuts` are its
    /// sorted roots, `members[2i]` says whether the open gap left of `cuts[i]`
    /// belongs (the last entry covers the gap right of every root), and
    /// `members[2i + 1]` whether `cuts[i]` itself belongs.
    pub fn from_pieces(cuts: &[Value], members: &[bool]) -> IntervalSet {
        assert_eq!(members.len(), 2 * cuts.len() + 1);
        rebuild(cuts, members)
    }
}

impl fmt::Display for IntervalSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.intervals.is_empty() {
            return f.write_str("{}");
        }
        for (i, iv) in self.intervals.iter().enumerate() {
            if i > 0 {
                f.write_str(" u ")?;
            }
            write!(f, "{iv}")?;
        }
        Ok(())
    }
}

fn cuts_of<'a>(intervals: impl Iterator<Item = &'a Interval>) -> Vec<Value> {
    let mut cuts: Vec<Value> = intervals
        .flat_map(|i| i.lo.iter().chain(i.hi.iter()).cloned())
        .collect();
    cuts.sort_by(cmp_value);
    cuts.dedup_by(|a, b| cmp_value(a, b) == Ordering::Equal);
    cuts
}

fn cut_index(cuts: &[Value], v: &Value) -> usize {
    cuts.binary_search_by(|c| cmp_value(c, v))
        .expect("endpoint is a cut")
}

/// Membership of each elementary piece; pieces alternate gap, point, gap, ...
fn membership(intervals: &[Interval], cuts: &[Value]) -> Vec<bool> {
    let k = cuts.len();
    let mut mem = vec![false; 2 * k + 1];
    for iv in intervals {
        let start = match &iv.lo {
            None => 0,
            Some(l) => {
                let a = cut_index(cuts, l);
                if iv.lo_open {
                    2 * a + 2
                } else {
                    2 * a + 1
                }
            }
        };
        let end = match &iv.hi {
            None => 2 * k,
            Some(h) => {
                let b = cut_index(cuts, h);
                if iv.hi_open {
                    2 * b
                } else {
                    2 * b + 1
                }
            }
        };
        if start <= end {
            mem[start..=end].iter_mut().for_each(|m| *m = true);
        }
    }
    mem
}

fn rebuild(cuts: &[Value], mem: &[bool]) -> IntervalSet {
    let k = cuts.len();
    let mut intervals = Vec::new();
    let mut i = 0;
    while i < mem.len() {
        if !mem[i] {
            i += 1;
            continue;
        }
        let s = i;
        while i + 1 < mem.len() && mem[i + 1] {
            i += 1;
        }
        let e = i;
        let (lo, lo_open) = if s == 0 {
            (None, true)
        } else if s % 2 == 1 {
            (Some(cuts[(s - 1) / 2].clone()), false)
        } else {
            (Some(cuts[s / 2 - 1].clone()), true)
        };
        let (hi, hi_open) = if e == 2 * k {
            (None, true)
        } else if e % 2 == 1 {
            (Some(cuts[(e - 1) / 2].clone()), false)
        } else {
            (Some(cuts[e / 2].clone()), true)
        };
        intervals.push(Interval {
            lo,
            lo_open,
            hi,
            hi_open,
        });
        i += 1;
    }
    IntervalSet { intervals }
}
