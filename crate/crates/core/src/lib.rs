//! Dynamic range mode engine.
//!
//! The crate is `no_std` (it needs `alloc`). It provides:
//!
//! * [`collections`]: the order-maintenance sequence with stable handles, rank-keyed
//!   occurrence and pair trees, and journaled count/minimum forests.
//! * [`mpq`]: min-plus query structures that answer `min_{k ∉ S} A[i][k] + B[k][j]`
//!   for a forbidden set `S` supplied at query time, most of them with a witness `k`.
//! * [`dynamic`]: the dynamic range mode structure built on top of them.
//! * [`balance`]: the exponent calculator used to pick default thresholds.
#![cfg_attr(not(test), no_std)]

extern crate alloc;

pub mod balance;
mod checksum;
pub mod collections;
pub mod dynamic;
pub mod matrix;
pub mod mpq;

pub use checksum::Checksum;
pub use collections::{ElementHandle, OrderTree};
pub use dynamic::{DynamicMode, ModeConfig, ModeError};
pub use matrix::{IndexSet, Matrix};
