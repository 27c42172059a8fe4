//! Shared fixtures for the benchmark suite.

use lln_core::dist::DiscreteDistribution;
use lln_core::rational::{rat, rat_int};

/// A 12-atom law with mixed denominators, representative of the randomized
/// acceptance suite.
pub fn twelve_atom_law() -> DiscreteDistribution {
    let atoms: Vec<_> = (1..=12)
        .map(|k| (rat(2 * k - 13, 2), rat_int(k)))
        .collect();
    let total: i64 = (1..=12).sum();
    let atoms = atoms
        .into_iter()
        .map(|(v, m)| (v, m / rat_int(total)))
        .collect();
    DiscreteDistribution::new(atoms).expect("valid fixture")
}
