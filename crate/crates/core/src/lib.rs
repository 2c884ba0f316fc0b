//! SPARQL parsing and canonical serialization, query-log analysis and
//! dataset split algorithms. `no_std` with `alloc`.
#![no_std]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod analysis;
pub mod digest;
pub mod preprocess;
pub mod split;
pub mod sparql;
