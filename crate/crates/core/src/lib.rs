//! Random geometric graphs, bounded-degree spanning trees and the two-step
//! embedding of such trees into `G_d(n, r)` near its universality threshold.

// Negated comparisons reject NaN along with out-of-range values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod decompose;
pub mod embed;
pub mod geometry;
pub mod harness;
pub mod rgg;
pub mod trees;
