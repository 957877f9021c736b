//! Exact computation with subgroup tests over free groups.
//!
//! The crate provides:
//! - reduced words and Stallings core graphs for finitely generated subgroups
//!   ([`words`], [`stallings`]),
//! - finite actions, their stabilizer statistics and distances ([`actions`]),
//! - subgroup tests with exact rational values ([`subgroup_test`]),
//! - sandwich bounds on sofic/ergodic values via exact linear programming over
//!   pseudo-subgroup polytopes and enumeration of finite actions ([`hierarchy`]),
//! - tailored non-local games, permutation strategies and the game-to-test
//!   compiler with its stability rounding pipeline ([`games`], [`perm`],
//!   [`compiler`]).
//!
//! All numeric results are exact rationals; nothing in the public API emits
//! floating point.

pub mod actions;
pub mod compiler;
pub mod error;
pub mod formats;
pub mod games;
pub mod hierarchy;
pub mod lp;
pub mod perm;
pub mod rational;
pub mod stallings;
pub mod words;

pub use error::{Error, Result};
pub use rational::Q;
