//! Simulated-CONGEST minimum cut toolkit.
//!
//! The crate has three layers:
//!
//! * a deterministic synchronous message-passing simulator with per-edge
//!   bandwidth limits and round/message accounting ([`congest`]), plus
//!   reusable distributed primitives over it ([`protocols`]);
//! * a distributed algorithm that, given a rooted spanning tree `T` of a
//!   weighted graph `G`, makes every node learn the weight of the cut
//!   separating its subtree from the rest, in O(sqrt(n) + D) rounds
//!   ([`fragments`] + [`onecut`]);
//! * a centralized greedy tree-packing / sampling driver that combines
//!   per-tree subtree-cut minima into a global minimum-cut estimate
//!   ([`packing`]), with brute-force reference implementations in
//!   [`oracle`].

pub mod congest;
pub mod fragments;
pub mod generate;
pub mod graph;
pub mod onecut;
pub mod oracle;
pub mod packing;
pub mod protocols;
