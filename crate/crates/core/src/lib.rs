// NaN-rejecting `!(x < y)` checks are intentional.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod chain;
pub mod densmat;
pub mod entropy_flow;
pub mod error;
mod exact;
pub mod fermion;
pub mod linalg;
pub mod photon;
pub mod sampling;
pub mod spin_half;
pub mod tol;
pub mod vector;
pub mod verify;
