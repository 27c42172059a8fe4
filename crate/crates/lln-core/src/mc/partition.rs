//! Equivalent measure change on a finite partition.
//!
//! The density is `dQ/dP = sum_j alpha_j 1{A_j} / sum_j alpha_j P(A_j)` for
//! nested sets `A_1 ⊆ A_2 ⊆ ...` given as cell-index prefixes. With exact
//! rational cell masses the new measure is a probability exactly, and the
//! `L^1(Q)` norms of a finite function family are finite sums.

use num_traits::{Signed, Zero};

use super::McError;
use crate::rational::Rational;

/// Finite partition with nested prefix sets and their mixing weights.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PartitionModel {
    /// `(mass, tag)` per cell; masses must be positive and sum to one.
    pub cells: Vec<(Rational, String)>,
    /// `A_j` = the first `prefixes[j]` cells; nondecreasing, each in
    /// `1..=cells.len()`.
    pub prefixes: Vec<usize>,
    /// One positive weight per nested set.
    pub alphas: Vec<Rational>,
}

impl PartitionModel {
    pub fn validate(&self) -> Result<(), McError> {
        if self.cells.is_empty() {
            return Err(McError::InvalidNesting("no cells".into()));
        }
        let total: Rational = self.cells.iter().map(|(m, _)| m.clone()).sum();
        if !num_traits::One::is_one(&total) {
            return Err(McError::InvalidNesting(format!(
                "cell masses sum to {total}, expected 1"
            )));
        }
        if self.cells.iter().any(|(m, _)| !m.is_positive()) {
            return Err(McError::InvalidNesting("non-positive cell mass".into()));
        }
        if self.prefixes.is_empty() || self.prefixes.len() != self.alphas.len() {
            return Err(McError::InvalidNesting(
                "need one alpha per nested set".into(),
            ));
        }
        let mut prev = 0usize;
        for &p in &self.prefixes {
            if p < 1 || p > self.cells.len() || p < prev {
                return Err(McError::InvalidNesting(format!(
                    "prefix {p} breaks the nesting"
                )));
            }
            prev = p;
        }
        if self.alphas.iter().any(|a| !a.is_positive()) {
            return Err(McError::InvalidNesting("non-positive alpha".into()));
        }
        Ok(())
    }

    /// `P(A_j)` for the `j`-th nested set (0-based).
    pub fn set_mass(&self, j: usize) -> Rational {
        self.cells[..self.prefixes[j]]
            .iter()
            .map(|(m, _)| m.clone())
            .sum()
    }
}

/// The density values and induced masses of the changed measure.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MeasureChange {
    /// `dQ/dP` per cell.
    pub densities: Vec<Rational>,
    /// `Q`-mass per cell; sums to one exactly.
    pub q_masses: Vec<Rational>,
    /// Normalizer `sum_j alpha_j P(A_j)`.
    pub normalizer: Rational,
}

/// Exact per-cell density of `dQ/dP` and the induced cell masses.
pub fn measure_change_density(model: &PartitionModel) -> Result<MeasureChange, McError> {
    model.validate()?;
    let normalizer: Rational = model
        .alphas
        .iter()
        .enumerate()
        .map(|(j, a)| a * model.set_mass(j))
        .sum();
    let mut densities = Vec::with_capacity(model.cells.len());
    for (i, _) in model.cells.iter().enumerate() {
        let covering: Rational = model
            .prefixes
            .iter()
            .zip(&model.alphas)
            .filter(|(&p, _)| i < p)
            .map(|(_, a)| a.clone())
            .sum();
        densities.push(covering / &normalizer);
    }
    let q_masses: Vec<Rational> = model
        .cells
        .iter()
        .zip(&densities)
        .map(|((m, _), d)| m * d)
        .collect();
    debug_assert!(num_traits::One::is_one(&q_masses.iter().cloned().sum::<Rational>()));
    Ok(MeasureChange {
        densities,
        q_masses,
        normalizer,
    })
}

/// `sup_n E_Q |f_n|` for a finite function family given per-cell values,
/// plus whether the alpha-sizing rule
/// `alpha_j * sup_n E_P((1 + |f_n|) 1{A_j}) <= 1/j^2` holds for every `j`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct L1UnderQ {
    pub sup: Rational,
    pub sizing_ok: bool,
    /// `alpha_j * sup_n E_P((1 + |f_n|) 1{A_j})` per nested set.
    pub sizing_values: Vec<Rational>,
}

/// Evaluate the `L^1(Q)` supremum of a function family.
///
/// `values[n][i]` is the value of the `n`-th function on the `i`-th cell;
/// every row must cover all cells.
pub fn l1_under_q(model: &PartitionModel, values: &[Vec<Rational>]) -> Result<L1UnderQ, McError> {
    let change = measure_change_density(model)?;
    for row in values {
        if row.len() != model.cells.len() {
            return Err(McError::InvalidNesting(format!(
                "function row has {} values for {} cells",
                row.len(),
                model.cells.len()
            )));
        }
    }
    let sup = values
        .iter()
        .map(|row| {
            row.iter()
                .zip(&change.q_masses)
                .map(|(v, q)| v.abs() * q)
                .sum::<Rational>()
        })
        .max()
        .unwrap_or_else(Rational::zero);

    let one = Rational::from_integer(1.into());
    let mut sizing_values = Vec::with_capacity(model.prefixes.len());
    let mut sizing_ok = true;
    for (j, (&prefix, alpha)) in model.prefixes.iter().zip(&model.alphas).enumerate() {
        let sup_norm = values
            .iter()
            .map(|row| {
                row[..prefix]
                    .iter()
                    .zip(&model.cells[..prefix])
                    .map(|(v, (m, _))| (&one + v.abs()) * m)
                    .sum::<Rational>()
            })
            .max()
            .unwrap_or_else(Rational::zero);
        let scaled = alpha * sup_norm;
        let j_big = Rational::from_integer(((j + 1) * (j + 1)).into());
        if &scaled * j_big > one {
            sizing_ok = false;
        }
        sizing_values.push(scaled);
    }
    Ok(L1UnderQ {
        sup,
        sizing_ok,
        sizing_values,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{rat, rat_int};

    fn two_cell_model() -> PartitionModel {
        PartitionModel {
            cells: vec![(rat(1, 2), "a".into()), (rat(1, 2), "b".into())],
            prefixes: vec![1, 2],
            alphas: vec![rat(1, 2), rat(1, 2)],
        }
    }

    #[test]
    fn identity_when_single_full_set() {
        let model = PartitionModel {
            cells: vec![(rat(1, 3), "a".into()), (rat(2, 3), "b".into())],
            prefixes: vec![2],
            alphas: vec![rat_int(1)],
        };
        let change = measure_change_density(&model).unwrap();
        assert_eq!(change.densities, vec![rat_int(1), rat_int(1)]);
        assert_eq!(change.q_masses, vec![rat(1, 3), rat(2, 3)]);
    }

    #[test]
    fn two_cell_example() {
        let change = measure_change_density(&two_cell_model()).unwrap();
        assert_eq!(change.densities, vec![rat(4, 3), rat(2, 3)]);
        assert_eq!(change.q_masses, vec![rat(2, 3), rat(1, 3)]);
        let total: Rational = change.q_masses.iter().cloned().sum();
        assert_eq!(total, rat_int(1));
    }

    #[test]
    fn q_mass_always_normalizes() {
        let model = PartitionModel {
            cells: vec![
                (rat(1, 4), "a".into()),
                (rat(1, 4), "b".into()),
                (rat(1, 2), "c".into()),
            ],
            prefixes: vec![1, 2, 3],
            alphas: vec![rat(1, 7), rat(2, 7), rat(4, 7)],
        };
        let change = measure_change_density(&model).unwrap();
        let total: Rational = change.q_masses.iter().cloned().sum();
        assert_eq!(total, rat_int(1));
    }

    #[test]
    fn rejects_bad_nesting() {
        let mut model = two_cell_model();
        model.prefixes = vec![2, 1];
        assert!(matches!(
            measure_change_density(&model),
            Err(McError::InvalidNesting(_))
        ));
        let mut model = two_cell_model();
        model.prefixes = vec![0, 2];
        assert!(measure_change_density(&model).is_err());
        let mut model = two_cell_model();
        model.alphas = vec![rat(1, 2)];
        assert!(measure_change_density(&model).is_err());
    }

    #[test]
    fn l1_constant_and_zero_families() {
        let model = two_cell_model();
        let zero = vec![vec![rat_int(0), rat_int(0)]];
        assert_eq!(l1_under_q(&model, &zero).unwrap().sup, rat_int(0));
        let constant = vec![vec![rat_int(-3), rat_int(-3)]];
        assert_eq!(l1_under_q(&model, &constant).unwrap().sup, rat_int(3));
    }

    #[test]
    fn sizing_flag_contrast_on_growing_family() {
        // Three functions with a hump marching right and growing; the sized
        // alphas keep sup E_Q|f_n| bounded, uniform alphas do not satisfy
        // the sizing rule.
        let cells = vec![
            (rat(1, 2), "c1".into()),
            (rat(1, 4), "c2".into()),
            (rat(1, 4), "c3".into()),
        ];
        let values = vec![
            vec![rat_int(2), rat_int(0), rat_int(0)],
            vec![rat_int(0), rat_int(8), rat_int(0)],
            vec![rat_int(0), rat_int(0), rat_int(32)],
        ];
        // alpha_j = (1/j^2) / sup_n E_P((1+|f_n|) 1{A_j}), exactly at the cap.
        let mut alphas = Vec::new();
        for (j, prefix) in [1usize, 2, 3].iter().enumerate() {
            let sup_norm: Rational = values
                .iter()
                .map(|row| {
                    row[..*prefix]
                        .iter()
                        .zip(&cells[..*prefix])
                        .map(|(v, (m, _)): (&Rational, &(Rational, String))| {
                            (rat_int(1) + v.abs()) * m
                        })
                        .sum::<Rational>()
                })
                .max()
                .unwrap();
            alphas.push(Rational::new(1.into(), (((j + 1) * (j + 1)) as i64).into()) / sup_norm);
        }
        let sized = PartitionModel {
            cells: cells.clone(),
            prefixes: vec![1, 2, 3],
            alphas,
        };
        let sized_result = l1_under_q(&sized, &values).unwrap();
        assert!(sized_result.sizing_ok);

        let uniform = PartitionModel {
            cells,
            prefixes: vec![1, 2, 3],
            alphas: vec![rat(1, 3), rat(1, 3), rat(1, 3)],
        };
        let uniform_result = l1_under_q(&uniform, &values).unwrap();
        assert!(!uniform_result.sizing_ok);
        assert!(uniform_result.sup > sized_result.sup);
    }
}
