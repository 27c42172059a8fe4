//! Finite discrete distributions with exact rational atoms, and finite
//! de Finetti mixing families built from them.
//!
//! A [`DiscreteDistribution`] is the law of a single summand: an ordered list
//! of `(value, mass)` atoms with strictly positive masses that sum to one
//! exactly. A [`MixingFamily`] is a finite mixture of such laws; each entry is
//! one class of the tail partition, so conditional statistics become plain
//! per-component computations and "in probability" statements become exact
//! weight-mass accounting.
//!
//! Both types are immutable after construction and cheap to share.

use std::fmt;

use num_traits::{Signed, Zero};
use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

use crate::rational::{format_rational, parse_rational, Rational};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum DistError {
    #[error("atom list is empty")]
    EmptyAtoms,
    #[error("atom at value {0} has non-positive mass {1}")]
    NonPositiveMass(String, String),
    #[error("masses sum to {0}, expected 1")]
    MassNotOne(String),
    #[error("mixture entry list is empty")]
    EmptyEntries,
    #[error("mixture entry {0} has non-positive weight {1}")]
    NonPositiveWeight(usize, String),
    #[error("mixture weights sum to {0}, expected 1")]
    WeightNotOne(String),
}

/// Whether a tail probability counts the boundary atom: `P(|h| > t)` for
/// [`Strict`](TailConvention::Strict), `P(|h| >= t)` for
/// [`Nonstrict`](TailConvention::Nonstrict).
///
/// The truncation indicator `|h| <= t` is always closed; the convention only
/// moves the tail side. Constructions that pin mass exactly at a threshold
/// need the nonstrict form.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TailConvention {
    Strict,
    Nonstrict,
}

/// Finite law with exact rational atom values and masses.
///
/// Invariants: values strictly increasing, masses strictly positive,
/// masses sum to exactly one.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DiscreteDistribution {
    atoms: Vec<(Rational, Rational)>,
}

impl DiscreteDistribution {
    /// Build a distribution from raw `(value, mass)` pairs.
    ///
    /// Equal values are merged by summing their masses, merged atoms with
    /// zero mass are dropped, and the result is sorted by value.
    pub fn new(atoms: Vec<(Rational, Rational)>) -> Result<Self, DistError> {
        if atoms.is_empty() {
            return Err(DistError::EmptyAtoms);
        }
        let mut atoms = atoms;
        atoms.sort_by(|a, b| a.0.cmp(&b.0));
        let mut merged: Vec<(Rational, Rational)> = Vec::with_capacity(atoms.len());
        for (value, mass) in atoms {
            match merged.last_mut() {
                Some((v, m)) if *v == value => *m += mass,
                _ => merged.push((value, mass)),
            }
        }
        merged.retain(|(_, m)| !m.is_zero());
        if merged.is_empty() {
            return Err(DistError::MassNotOne("0".into()));
        }
        for (v, m) in &merged {
            if !m.is_positive() {
                return Err(DistError::NonPositiveMass(
                    format_rational(v),
                    format_rational(m),
                ));
            }
        }
        let total: Rational = merged.iter().map(|(_, m)| m.clone()).sum();
        if !num_traits::One::is_one(&total) {
            return Err(DistError::MassNotOne(format_rational(&total)));
        }
        Ok(Self { atoms: merged })
    }

    /// Degenerate law concentrated at `value`.
    pub fn point_mass(value: Rational) -> Self {
        Self {
            atoms: vec![(value, Rational::from_integer(1.into()))],
        }
    }

    pub fn atoms(&self) -> &[(Rational, Rational)] {
        &self.atoms
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// `E(h^k)`, exact.
    pub fn moment(&self, k: u32) -> Rational {
        self.atoms
            .iter()
            .map(|(v, m)| pow_rational(v, k) * m)
            .sum()
    }

    pub fn mean(&self) -> Rational {
        self.moment(1)
    }

    /// Largest `|value|` carrying mass.
    pub fn support_bound(&self) -> Rational {
        self.atoms
            .iter()
            .map(|(v, _)| v.abs())
            .max()
            .expect("non-empty by invariant")
    }

    /// `E(h^k * 1{|h| <= cutoff})`, exact. The indicator is always closed.
    pub fn truncated_moment(&self, cutoff: &Rational, k: u32) -> Rational {
        self.atoms
            .iter()
            .filter(|(v, _)| v.abs() <= *cutoff)
            .map(|(v, m)| pow_rational(v, k) * m)
            .sum()
    }

    /// `P(|h| > cutoff)` or `P(|h| >= cutoff)` per the convention.
    pub fn tail_mass(&self, cutoff: &Rational, conv: TailConvention) -> Rational {
        self.atoms
            .iter()
            .filter(|(v, _)| match conv {
                TailConvention::Strict => v.abs() > *cutoff,
                TailConvention::Nonstrict => v.abs() >= *cutoff,
            })
            .map(|(_, m)| m.clone())
            .sum()
    }

    /// Mass at `-x` equals mass at `x` for every atom.
    pub fn is_symmetric(&self) -> bool {
        let n = self.atoms.len();
        (0..n).all(|i| {
            let (v, m) = &self.atoms[i];
            let (w, u) = &self.atoms[n - 1 - i];
            *v == -w && m == u
        })
    }

    /// Exact law of `X - X'` for independent `X, X' ~ self`.
    ///
    /// Convolution over all atom pairs; the result is symmetric about zero
    /// and conserves total mass exactly.
    pub fn symmetrize(&self) -> DiscreteDistribution {
        let mut atoms = Vec::with_capacity(self.atoms.len() * self.atoms.len());
        for (v1, m1) in &self.atoms {
            for (v2, m2) in &self.atoms {
                atoms.push((v1 - v2, m1 * m2));
            }
        }
        DiscreteDistribution::new(atoms).expect("convolution of a valid law is valid")
    }

    /// Distinct positive values `|v|` in increasing order; knot set for the
    /// piecewise-exact integral transforms.
    pub fn abs_value_knots(&self) -> Vec<Rational> {
        let mut knots: Vec<Rational> = self
            .atoms
            .iter()
            .filter(|(v, _)| !v.is_zero())
            .map(|(v, _)| v.abs())
            .collect();
        knots.sort();
        knots.dedup();
        knots
    }
}

impl fmt::Display for DiscreteDistribution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (i, (v, m)) in self.atoms.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "({}, {})", format_rational(v), format_rational(m))?;
        }
        write!(f, "}}")
    }
}

fn pow_rational(v: &Rational, k: u32) -> Rational {
    let mut acc = Rational::from_integer(1.into());
    for _ in 0..k {
        acc *= v;
    }
    acc
}

/// Finite de Finetti mixture: weighted components, weights summing to one.
///
/// Component `i` is the conditional law of one term given the `i`-th class of
/// the (finite) tail partition; the weight is the class probability.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MixingFamily {
    entries: Vec<(Rational, DiscreteDistribution)>,
    label: String,
}

impl MixingFamily {
    pub fn new(
        entries: Vec<(Rational, DiscreteDistribution)>,
        label: impl Into<String>,
    ) -> Result<Self, DistError> {
        if entries.is_empty() {
            return Err(DistError::EmptyEntries);
        }
        for (i, (w, _)) in entries.iter().enumerate() {
            if !w.is_positive() {
                return Err(DistError::NonPositiveWeight(i, format_rational(w)));
            }
        }
        let total: Rational = entries.iter().map(|(w, _)| w.clone()).sum();
        if !num_traits::One::is_one(&total) {
            return Err(DistError::WeightNotOne(format_rational(&total)));
        }
        Ok(Self {
            entries,
            label: label.into(),
        })
    }

    /// Single-component family, equivalent to the classical (i.i.d.) case.
    pub fn degenerate(component: DiscreteDistribution, label: impl Into<String>) -> Self {
        Self {
            entries: vec![(Rational::from_integer(1.into()), component)],
            label: label.into(),
        }
    }

    pub fn entries(&self) -> &[(Rational, DiscreteDistribution)] {
        &self.entries
    }

    pub fn weights(&self) -> impl Iterator<Item = &Rational> {
        self.entries.iter().map(|(w, _)| w)
    }

    pub fn components(&self) -> impl Iterator<Item = &DiscreteDistribution> {
        self.entries.iter().map(|(_, d)| d)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn label(&self) -> &str {
        &self.label
    }
}

// JSON wire format: {"atoms": [["value", "mass"], ...]} with canonical
// rational strings, and {"label": ..., "entries": [["weight", dist], ...]}.

impl Serialize for DiscreteDistribution {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        #[derive(Serialize)]
        struct Wire<'a> {
            atoms: Vec<[String; 2]>,
            #[serde(skip)]
            _marker: std::marker::PhantomData<&'a ()>,
        }
        let atoms = self
            .atoms
            .iter()
            .map(|(v, m)| [format_rational(v), format_rational(m)])
            .collect();
        Wire {
            atoms,
            _marker: std::marker::PhantomData,
        }
        .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for DiscreteDistribution {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        struct Wire {
            atoms: Vec<[String; 2]>,
        }
        let wire = Wire::deserialize(deserializer)?;
        let mut atoms = Vec::with_capacity(wire.atoms.len());
        for [v, m] in wire.atoms {
            let value = parse_rational(&v).map_err(D::Error::custom)?;
            let mass = parse_rational(&m).map_err(D::Error::custom)?;
            atoms.push((value, mass));
        }
        DiscreteDistribution::new(atoms).map_err(D::Error::custom)
    }
}

impl Serialize for MixingFamily {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        #[derive(Serialize)]
        struct Wire<'a> {
            label: &'a str,
            entries: Vec<(String, &'a DiscreteDistribution)>,
        }
        let entries = self
            .entries
            .iter()
            .map(|(w, d)| (format_rational(w), d))
            .collect();
        Wire {
            label: &self.label,
            entries,
        }
        .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for MixingFamily {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        struct Wire {
            label: String,
            entries: Vec<(String, DiscreteDistribution)>,
        }
        let wire = Wire::deserialize(deserializer)?;
        let mut entries = Vec::with_capacity(wire.entries.len());
        for (w, d) in wire.entries {
            let weight = parse_rational(&w).map_err(D::Error::custom)?;
            entries.push((weight, d));
        }
        MixingFamily::new(entries, wire.label).map_err(D::Error::custom)
    }
}
