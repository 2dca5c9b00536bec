//! Synthesis and design-space exploration for resonant compute-in-memory
//! (rCiM) SRAM arrays.
//!
//! The crate is `no_std` (it needs `alloc`). File formats, the command line
//! and thread pools live in the `rcim` companion crate.
//!
//! Pipeline, bottom to top:
//!
//! - [`aig`]: and-inverter graphs with structural hashing, cuts, MFFCs.
//! - [`netlist`]: the generic gate-level form the parsers produce.
//! - [`npn`]: NPN canonicalization and the 4-input rewriting library.
//! - [`transforms`]: balance / rewrite / refactor / resubstitute, recipes.
//! - [`techmap`]: covering with in-memory NAND2 / NOR2 / NOT.
//! - [`topology`]: macro geometry and the feasibility rule.
//! - [`mapper`]: placement and a cycle-accurate schedule.
//! - [`sim`]: a functional simulator that executes schedules.
//! - [`cost`]: the energy / latency / power model and calibration.
//! - [`explore`]: the end-to-end driver that picks a topology.

#![no_std]
#![forbid(unsafe_code)]

extern crate alloc;

pub mod aig;
pub mod cost;
pub mod explore;
pub mod gen;
pub mod mapper;
pub mod netlist;
pub mod npn;
pub mod sim;
pub mod techmap;
pub mod topology;
pub mod transforms;
pub mod truth;

pub(crate) type FxHashMap<K, V> = hashbrown::HashMap<K, V, core::hash::BuildHasherDefault<rustc_hash::FxHasher>>;
pub(crate) type FxHashSet<K> = hashbrown::HashSet<K, core::hash::BuildHasherDefault<rustc_hash::FxHasher>>;

pub use aig::{Aig, Lit, NodeId};
pub use netlist::RawNetlist;
pub use topology::{Topology, TopologyLibrary};
