//! Confidence intervals for regression targets that remain valid after the
//! model was chosen by exhaustive best-subset search under AIC, BIC or AICc.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod criteria;
pub mod error;
pub mod geometry;
pub mod harness;
pub mod inference;
pub mod intervals;
pub mod model;
pub mod normal;
pub mod truncnorm;
