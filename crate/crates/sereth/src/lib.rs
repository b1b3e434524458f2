//! Deterministic single-node blockchain simulator for a marked key/value
//! contract, with a pending-pool view service and miner policies built on it.
//!
//! The contract keeps a hash-mark chain over its stored value; pending set
//! transactions extend the chain inside the transaction pool, and the view
//! layer serializes them into a read-uncommitted (mark, value) pair that
//! clients can pin their transactions to.

pub mod chain;
pub mod clients;
pub mod experiments;
pub mod hms;
pub mod metrics;
pub mod primitives;
pub mod raa;
