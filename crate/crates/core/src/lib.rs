//! Intensity-efficient allocations of indivisible objects.
//!
//! Agents report strict ordinal preference intensities over pairs of
//! objects. Canonically normalised, these become rank maps that can be
//! compared across agents. An allocation is intensity-efficient when it is
//! Pareto efficient and no other Pareto-efficient allocation resolves every
//! "flipped" pair of agents in favour of the agent who cares more.

pub mod cli;
pub mod efficiency;
pub mod enumerate;
pub mod io;
pub mod model;
pub mod perm;
pub mod verify;
