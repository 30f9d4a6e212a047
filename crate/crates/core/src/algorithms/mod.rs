//! Upper-bound algorithms as metered control programs.

mod chase;
mod disj;
mod join;
mod keysort;
mod load_solve;
pub mod records;

pub use chase::{
    chase_alphabet, chase_indices, verify_chase_certificate, zigzag_chase_table, ChaseCertificate,
    ChaseIndices,
};
pub use disj::{disj_alphabet, disj_chunked, disj_trivial, DisjChunked, DisjTrivial};
pub use join::{
    enumerate_virtual, join_via_sort, Enumerate, JoinViaSort, SortMerge, VirtualConsumer,
    VirtualExpandedTape, VirtualItem,
};
pub use keysort::{keysort_scan, KeySort};
pub use load_solve::{join_emptiness, load_and_solve, relpair_alphabet, Decider, LoadAndSolve};
