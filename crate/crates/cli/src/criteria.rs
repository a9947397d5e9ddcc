//! The four comparison criteria of a selection.

use robust_submod_core::{local_worst_case, Result, SimplexDistribution, Subset, TaskFamily};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Criteria {
    /// `sum_i Q_i f_i(S)`
    pub reference: f64,
    /// `min_i f_i(S)`
    pub worst_task: f64,
    /// `sum_i P*_i f_i(S)` with `P*` the KL-tilted worst case around `Q`.
    pub local_worst_case: f64,
    pub elapsed: f64,
}

pub fn criteria_of(values: &[f64], q: &SimplexDistribution, lambda: f64, elapsed: f64) -> Result<Criteria> {
    let p = local_worst_case(values, q, lambda)?;
    Ok(Criteria {
        reference: q.expectation(values),
        worst_task: values.iter().copied().fold(f64::INFINITY, f64::min),
        local_worst_case: p.expectation(values),
        elapsed,
    })
}

pub fn evaluate_criteria<T: TaskFamily>(
    family: &T,
    q: &SimplexDistribution,
    lambda: f64,
    selection: &Subset,
    elapsed: f64,
) -> Result<Criteria> {
    criteria_of(&family.evaluate(selection), q, lambda, elapsed)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn equal_values_collapse_the_criteria() {
        let q = SimplexDistribution::new(vec![0.2, 0.5, 0.3]).unwrap();
        let c = criteria_of(&[0.4; 3], &q, 0.1, 0.0).unwrap();
        assert!((c.reference - 0.4).abs() < 1e-15);
        assert!((c.worst_task - 0.4).abs() < 1e-15);
        assert!((c.local_worst_case - 0.4).abs() < 1e-15);
    }

    #[test]
    fn large_lambda_recovers_the_reference() {
        let q = SimplexDistribution::new(vec![0.1, 0.6, 0.3]).unwrap();
        let c = criteria_of(&[0.9, 0.2, 0.5], &q, 1e6, 0.0).unwrap();
        assert!((c.local_worst_case - c.reference).abs() < 1e-6);
    }
}
