//! Model output in `get-model` style.

use std::fmt::Write;

use super::sexpr::SExpr;
use super::{Assignment, Problem};
use crate::numeric::{smt_rational, Value};
use crate::poly::univariate::write_smt_poly;

/// SMT-LIB term for a value; irrational values carry an approximation comment.
pub fn value_to_smt(v: &Value) -> (String, Option<String>) {
    match v {
        Value::Rational(r) => (smt_rational(r), None),
        Value::Algebraic(a) => {
            let mut s = String::from("(root-obj ");
            write_smt_poly(&mut s, a.minpoly(), "x").expect("string write");
            write!(s, " {})", a.root_index()).expect("string write");
            (s, Some(format!("~{}", v.to_f64())))
        }
    }
}

/// `(model (define-fun x () Real 3.0) ...)` over the user's variables.
pub fn format_model(problem: &Problem, asg: &Assignment) -> String {
    let mut out = String::from("(model\n");
    for (i, name) in problem
        .real_names
        .iter()
        .enumerate()
        .take(problem.num_user_reals)
    {
        let (term, note) = value_to_smt(&asg.reals[i]);
        let name = SExpr::Symbol(name.clone());
        match note {
            None => writeln!(out, "  (define-fun {name} () Real {term})"),
            Some(n) => writeln!(out, "  (define-fun {name} () Real {term}) ; {n}"),
        }
        .expect("string write");
    }
    for (i, name) in problem
        .bool_names
        .iter()
        .enumerate()
        .take(problem.num_user_bools)
    {
        let name = SExpr::Symbol(name.clone());
        writeln!(out, "  (define-fun {name} () Bool {})", asg.bools[i]).expect("string write");
    }
    out.push_str(")\n");
    out
}
