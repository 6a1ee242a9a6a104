// Index-style loops mirror the matrix notation throughout.
#![allow(clippy::needless_range_loop)]

//! Classical stochastic finite state machines, tight-binding quantum models,
//! and the explicit maps between them.

pub mod bridge;
pub mod fsm;
pub mod linalg;
pub mod quantum;
pub mod verify;
pub mod wannier;
