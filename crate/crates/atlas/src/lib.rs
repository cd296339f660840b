//! Lattice-theoretic machinery for K3 surfaces with finite automorphism
//! group: hyperbolic Néron-Severi lattices, exact enumeration of
//! `(-2)`-curve classes, elliptic fibrations, projective model descriptors,
//! nef-cone Hilbert bases, discriminant groups, and the induced-chamber
//! census inside `U + E8 + E8`.
//!
//! The built-in catalogue ([`catalogue::catalogue`]) carries the 118
//! Néron-Severi lattices of K3 surfaces with finite automorphism group and
//! their ground-truth annotations; `atlas verify` replays the classification
//! against it.

pub mod ample;
pub mod catalogue;
pub mod chamber;
pub mod cones;
pub mod curves;
pub mod discriminant;
pub mod dot;
pub mod fibration;
pub mod lattice;
pub mod linalg;
pub mod linsys;
pub mod report;
pub mod shortvec;
pub mod snf;

pub use lattice::{GramLattice, Int, LatticeError, LatticeSpec, Vector};
