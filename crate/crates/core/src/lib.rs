// Negated comparisons are used on purpose: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod clt;
pub mod error;
pub mod json;
pub mod lambert;
pub mod limits;
pub mod model;
pub mod ode;
pub mod simulate;
