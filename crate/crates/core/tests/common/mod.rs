#![allow(dead_code)]

use rand::seq::SliceRandom;
use rand::Rng;

pub struct Shape {
    pub reals: usize,
    pub bools: usize,
    pub clauses: usize,
    pub degree: u32,
    pub max_lits: usize,
}

fn term<R: Rng>(rng: &mut R, reals: usize, degree: u32) -> String {
    let c: i64 = *[-3, -2, -1, 1, 2, 3, 5].choose(rng).unwrap();
    let d = rng.gen_range(0..=degree);
    let mut factors: Vec<String> = (0..d)
        .map(|_| format!("x{}", rng.gen_range(0..reals)))
        .collect();
    if c != 1 || factors.is_empty() {
        factors.insert(
            0,
            if c < 0 {
                format!("(- {})", -c)
            } else {
                c.to_string()
            },
        );
    }
    if factors.len() == 1 {
        factors.pop().unwrap()
    } else {
        format!("(* {})", factors.join(" "))
    }
}

pub fn poly<R: Rng>(rng: &mut R, reals: usize, degree: u32) -> String {
    let n = rng.gen_range(1..=3);
    let ts: Vec<String> = (0..n).map(|_| term(rng, reals, degree)).collect();
    if ts.len() == 1 {
        ts[0].clone()
    } else {
        format!("(+ {})", ts.join(" "))
    }
}

fn arith_atom<R: Rng>(rng: &mut R, reals: usize, degree: u32) -> String {
    let op = *["<", "<=", ">", ">=", "=", "distinct"].choose(rng).unwrap();
    let op = if op == "distinct" && rng.gen_bool(0.7) {
        "<"
    } else {
        op
    };
    let rhs = rng.gen_range(-6..=6);
    let rhs = if rhs < 0 {
        format!("(- {})", -rhs)
    } else {
        rhs.to_string()
    };
    format!("({op} {} {rhs})", poly(rng, reals, degree))
}

fn literal<R: Rng>(rng: &mut R, s: &Shape) -> String {
    let atom = if s.bools > 0 && rng.gen_bool(0.25) {
        format!("b{}", rng.gen_range(0..s.bools))
    } else {
        arith_atom(rng, s.reals, s.degree)
    };
    if rng.gen_bool(0.3) {
        format!("(not {atom})")
    } else {
        atom
    }
}

fn header(s: &Shape) -> String {
    let mut out = String::from("(set-logic QF_NRA)\n");
    for i in 0..s.reals {
        out += &format!("(declare-fun x{i} () Real)\n");
    }
    for i in 0..s.bools {
        out += &format!("(declare-fun b{i} () Bool)\n");
    }
    out
}

/// Random CNF instance as SMT-LIB text.
pub fn cnf_instance<R: Rng>(rng: &mut R, s: &Shape) -> String {
    let mut out = header(s);
    for _ in 0..s.clauses {
        let k = rng.gen_range(1..=s.max_lits);
        let lits: Vec<String> = (0..k).map(|_| literal(rng, s)).collect();
        if k == 1 {
            out += &format!("(assert {})\n", lits[0]);
        } else {
            out += &format!("(assert (or {}))\n", lits.join(" "));
        }
    }
    out + "(check-sat)\n"
}

fn formula<R: Rng>(rng: &mut R, s: &Shape, depth: u32) -> String {
    if depth == 0 || rng.gen_bool(0.35) {
        return literal(rng, s);
    }
    let a = formula(rng, s, depth - 1);
    let b = formula(rng, s, depth - 1);
    match rng.gen_range(0..7) {
        0 => format!("(and {a} {b})"),
        1 => format!("(or {a} {b})"),
        2 => format!("(=> {a} {b})"),
        3 => format!("(xor {a} {b})"),
        4 => format!("(not {a})"),
        5 => {
            let c = formula(rng, s, depth - 1);
            format!("(ite {a} {b} {c})")
        }
        _ => format!(
            "(let ((t {})) (or (> t 0) {a}))",
            poly(rng, s.reals, s.degree)
        ),
    }
}

/// Random instance with nested connectives, `let` and `ite`.
pub fn nested_instance<R: Rng>(rng: &mut R, s: &Shape) -> String {
    let mut out = header(s);
    for _ in 0..s.clauses {
        out += &format!("(assert {})\n", formula(rng, s, 3));
    }
    out + "(check-sat)\n"
}
