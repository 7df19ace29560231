//! Local search for quantifier-free nonlinear real arithmetic.

pub mod driver;
pub mod formula;
pub mod numeric;
pub mod poly;
pub mod roots;
pub mod scoreboard;
pub mod search;
