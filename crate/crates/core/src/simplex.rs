//! Discrete distributions on the probability simplex and the closed-form
//! quantities of the KL-regularized inner minimization
//!
//! ```text
//! min_{P in simplex}  sum_i P_i f_i + lambda * KL(P || Q)
//! ```
//!
//! whose minimizer is the exponential tilt `P*_i ∝ Q_i exp(-f_i / lambda)` and
//! whose value is `-lambda * log sum_i Q_i exp(-f_i / lambda)`.
//!
//! All exponentials are shifted by the smallest `f_i` on the support of `Q`, so
//! `f_i / lambda` may be arbitrarily large without overflow.

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use rand_distr::{Distribution, Exp1};

use crate::error::{domain, Error, Result};

/// Absolute per-entry tolerance for distribution equality and the unit-sum invariant.
pub const DISTRIBUTION_TOLERANCE: f64 = 1e-12;

/// A point of the probability simplex: nonnegative weights summing to one.
#[derive(Clone, Debug, PartialEq)]
pub struct SimplexDistribution {
    weights: Vec<f64>,
}

impl SimplexDistribution {
    /// Normalizes nonnegative `weights` onto the simplex.
    pub fn new(weights: Vec<f64>) -> Result<Self> {
        if weights.is_empty() {
            return Err(domain("distribution must have at least one entry"));
        }
        if let Some(w) = weights.iter().find(|w| !w.is_finite() || **w < 0.0) {
            return Err(domain(format!("distribution entry {w} is not a finite nonnegative number")));
        }
        let total: f64 = weights.iter().sum();
        if total <= 0.0 {
            return Err(domain("distribution weights are all zero"));
        }
        let mut weights: Vec<f64> = weights.into_iter().map(|w| w / total).collect();
        // One compensating pass brings the sum to 1 within a few ulps.
        let residual = 1.0 - weights.iter().sum::<f64>();
        if residual != 0.0 {
            let (imax, _) =
                weights.iter().enumerate().fold((0, f64::MIN), |acc, (i, &w)| if w > acc.1 { (i, w) } else { acc });
            weights[imax] = (weights[imax] + residual).max(0.0);
        }
        Ok(SimplexDistribution { weights })
    }

    pub fn uniform(n: usize) -> Result<Self> {
        Self::new(vec![1.0; n])
    }

    pub fn one_hot(n: usize, index: usize) -> Result<Self> {
        if index >= n {
            return Err(domain(format!("one-hot index {index} out of range for dimension {n}")));
        }
        let mut w = vec![0.0; n];
        w[index] = 1.0;
        Self::new(w)
    }

    /// Draws a point uniformly from the simplex (flat Dirichlet).
    pub fn sample_uniform<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Result<Self> {
        let draws: Vec<f64> = (0..n).map(|_| Exp1.sample(rng)).collect();
        Self::new(draws)
    }

    pub fn dim(&self) -> usize {
        self.weights.len()
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn min_weight(&self) -> f64 {
        self.weights.iter().copied().fold(f64::INFINITY, f64::min)
    }

    /// Entrywise equality within `tol`.
    pub fn approx_eq(&self, other: &SimplexDistribution, tol: f64) -> bool {
        self.dim() == other.dim() && self.weights.iter().zip(&other.weights).all(|(a, b)| (a - b).abs() <= tol)
    }

    /// Indices of the `count` largest weights, largest first (ties by lower index).
    pub fn top_indices(&self, count: usize) -> Vec<usize> {
        let mut idx: Vec<usize> = (0..self.dim()).collect();
        idx.sort_by(|&a, &b| self.weights[b].total_cmp(&self.weights[a]).then(a.cmp(&b)));
        idx.truncate(count);
        idx
    }

    /// `sum_i w_i * values_i`.
    pub fn expectation(&self, values: &[f64]) -> f64 {
        self.weights.iter().zip(values).map(|(w, v)| w * v).sum()
    }
}

/// Comma-separated weights at 17 significant digits.
impl fmt::Display for SimplexDistribution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, w) in self.weights.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{w:.16e}")?;
        }
        Ok(())
    }
}

impl FromStr for SimplexDistribution {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let weights = s
            .split(',')
            .enumerate()
            .map(|(i, tok)| {
                tok.trim().parse::<f64>().map_err(|e| Error::Format {
                    row: 1,
                    column: i + 1,
                    message: format!("invalid weight {tok:?}: {e}"),
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(weights)
    }
}

fn check_dims(values: &[f64], q: &SimplexDistribution) -> Result<()> {
    if values.len() != q.dim() {
        return Err(domain(format!(
            "task values have dimension {} but the distribution has {}",
            values.len(),
            q.dim()
        )));
    }
    Ok(())
}

fn check_lambda(lambda: f64) -> Result<()> {
    if !(lambda > 0.0) || !lambda.is_finite() {
        return Err(domain(format!("regularization weight must be positive and finite, got {lambda}")));
    }
    Ok(())
}

/// `KL(P || Q)` with `0 log 0 = 0`.
pub fn kl_divergence(p: &SimplexDistribution, q: &SimplexDistribution) -> Result<f64> {
    if p.dim() != q.dim() {
        return Err(domain(format!("dimension mismatch: {} vs {}", p.dim(), q.dim())));
    }
    let mut total = 0.0;
    for (i, (&pi, &qi)) in p.weights.iter().zip(&q.weights).enumerate() {
        if pi == 0.0 {
            continue;
        }
        if qi == 0.0 {
            return Err(domain(format!("infinite divergence: P[{i}] = {pi} but Q[{i}] = 0")));
        }
        total += pi * (pi / qi).ln();
    }
    Ok(total.max(0.0))
}

/// Tilted weights `Q_i exp(-(f_i - m) / lambda)` where `m` is the smallest value on
/// the support of `Q`, together with `m` and `log(sum_i tilted_i / sum_i Q_i)`.
///
/// The log-normalizer is accumulated through `expm1`/`ln_1p` so that it stays
/// accurate when `lambda` is large and every exponent is close to zero.
fn tilted(values: &[f64], q: &SimplexDistribution, lambda: f64) -> (Vec<f64>, f64, f64) {
    let shift = values.iter().zip(&q.weights).filter(|(_, &w)| w > 0.0).map(|(&v, _)| v).fold(f64::INFINITY, f64::min);
    let mut w = Vec::with_capacity(values.len());
    let (mut mass, mut excess) = (0.0, 0.0);
    for (&v, &qi) in values.iter().zip(&q.weights) {
        if qi > 0.0 {
            let d = (-(v - shift) / lambda).exp_m1();
            w.push(qi + qi * d);
            mass += qi;
            excess += qi * d;
        } else {
            w.push(0.0);
        }
    }
    (w, shift, (excess / mass).ln_1p())
}

/// The minimizer `P*` of `sum_i P_i f_i + lambda KL(P || Q)` over the simplex.
pub fn local_worst_case(values: &[f64], q: &SimplexDistribution, lambda: f64) -> Result<SimplexDistribution> {
    check_lambda(lambda)?;
    check_dims(values, q)?;
    let (w, _, _) = tilted(values, q, lambda);
    SimplexDistribution::new(w)
}

/// The optimal value of the inner minimization, `-lambda log sum_i Q_i exp(-f_i / lambda)`.
pub fn kl_robust_value(values: &[f64], q: &SimplexDistribution, lambda: f64) -> Result<f64> {
    check_lambda(lambda)?;
    check_dims(values, q)?;
    let (_, shift, log_z) = tilted(values, q, lambda);
    Ok(shift - lambda * log_z)
}

/// The KL radius `R` of the ball whose worst case is attained at multiplier `lambda`:
/// `R = KL(P*(lambda) || Q)`, evaluated through the dual relation
/// `R = -log sum Q e^{-f/lambda} - E_{P*}[f] / lambda`.
pub fn radius_for_lambda(values: &[f64], q: &SimplexDistribution, lambda: f64) -> Result<f64> {
    check_lambda(lambda)?;
    check_dims(values, q)?;
    let (w, shift, log_z) = tilted(values, q, lambda);
    let z: f64 = w.iter().sum();
    let tilted_mean: f64 = w.iter().zip(values).map(|(wi, v)| wi * (v - shift)).sum::<f64>() / z;
    Ok((-log_z - tilted_mean / lambda).max(0.0))
}

/// Geometric weighting of `window` observations, oldest first:
/// `Gamma_1 = gamma^w + (1-gamma) gamma^(w-1)` and `Gamma_t = (1-gamma) gamma^(w-t)` for `t >= 2`,
/// with `0^0 = 1`.
pub fn geometric_reference(gamma: f64, window: usize) -> Result<SimplexDistribution> {
    if !(0.0..=1.0).contains(&gamma) {
        return Err(domain(format!("discount must lie in [0, 1], got {gamma}")));
    }
    if window == 0 {
        return Err(domain("window must contain at least one step"));
    }
    let w = window as i32;
    let mut weights: Vec<f64> = (1..=w).map(|t| (1.0 - gamma) * gamma.powi(w - t)).collect();
    weights[0] += gamma.powi(w);
    SimplexDistribution::new(weights)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn dist(w: &[f64]) -> SimplexDistribution {
        SimplexDistribution::new(w.to_vec()).unwrap()
    }

    /// Minimum of the inner objective over a grid of step `1/m` on the simplex,
    /// by min-plus convolution over coordinates (every grid vertex is covered).
    fn grid_min(values: &[f64], q: &[f64], lambda: f64, m: usize) -> f64 {
        let term = |i: usize, k: usize| {
            let p = k as f64 / m as f64;
            if p == 0.0 {
                0.0
            } else {
                p * values[i] + lambda * p * (p / q[i]).ln()
            }
        };
        let mut best: Vec<f64> = (0..=m).map(|k| term(0, k)).collect();
        for i in 1..values.len() {
            let mut next = vec![f64::INFINITY; m + 1];
            for (s, slot) in next.iter_mut().enumerate() {
                for k in 0..=s {
                    let v = best[s - k] + term(i, k);
                    if v < *slot {
                        *slot = v;
                    }
                }
            }
            best = next;
        }
        best[m]
    }

    fn inner_objective(p: &[f64], values: &[f64], q: &[f64], lambda: f64) -> f64 {
        p.iter()
            .zip(values)
            .zip(q)
            .map(|((&pi, &f), &qi)| if pi == 0.0 { 0.0 } else { pi * f + lambda * pi * (pi / qi).ln() })
            .sum()
    }

    #[test]
    fn normalization_examples() {
        assert_eq!(dist(&[1.0, 1.0, 1.0, 1.0]).weights(), &[0.25; 4]);
        let paper_q = [0.022, 0.267, 0.088, 0.087, 0.183, 0.353];
        let q = dist(&paper_q);
        for (a, b) in q.weights().iter().zip(paper_q) {
            assert_abs_diff_eq!(*a, b, epsilon = 1e-15);
        }
        assert_eq!(dist(&[2.0, 0.0, 0.0]).weights(), &[1.0, 0.0, 0.0]);
    }

    #[test]
    fn rejects_invalid_weights() {
        assert!(matches!(SimplexDistribution::new(vec![1.0, -0.1]), Err(Error::Domain(_))));
        assert!(matches!(SimplexDistribution::new(vec![0.0, 0.0]), Err(Error::Domain(_))));
        assert!(matches!(SimplexDistribution::new(vec![]), Err(Error::Domain(_))));
    }

    #[test]
    fn display_round_trips() {
        let q = dist(&[0.1, 0.2, 0.7]);
        let parsed: SimplexDistribution = q.to_string().parse().unwrap();
        assert_eq!(parsed, q);
    }

    #[test]
    fn kl_examples() {
        let q = dist(&[0.3, 0.7]);
        assert_eq!(kl_divergence(&q, &q).unwrap(), 0.0);
        let one_hot = dist(&[1.0, 0.0]);
        let uniform = dist(&[0.5, 0.5]);
        assert_abs_diff_eq!(kl_divergence(&one_hot, &uniform).unwrap(), 2f64.ln(), epsilon = 1e-15);
        // Term-by-term: 0.7311 ln(1.4622) + 0.2689 ln(0.5378).
        let p = dist(&[0.7311, 0.2689]);
        let expected = 0.7311 * (0.7311f64 / 0.5).ln() + 0.2689 * (0.2689f64 / 0.5).ln();
        assert_abs_diff_eq!(kl_divergence(&p, &uniform).unwrap(), expected, epsilon = 1e-15);
    }

    #[test]
    fn kl_infinite_divergence_is_an_error() {
        let p = dist(&[0.5, 0.5]);
        let q = dist(&[1.0, 0.0]);
        assert!(matches!(kl_divergence(&p, &q), Err(Error::Domain(_))));
    }

    #[test]
    fn worst_case_examples() {
        let q = dist(&[0.2, 0.3, 0.5]);
        let p = local_worst_case(&[0.4, 0.4, 0.4], &q, 0.1).unwrap();
        assert!(p.approx_eq(&q, 1e-15));

        let uniform = dist(&[0.5, 0.5]);
        let p = local_worst_case(&[0.0, 1.0], &uniform, 1.0).unwrap();
        let e = (-1f64).exp();
        assert_abs_diff_eq!(p.weights()[0], 1.0 / (1.0 + e), epsilon = 1e-15);
        assert_abs_diff_eq!(p.weights()[1], e / (1.0 + e), epsilon = 1e-15);
        // Grid oracle over P = (x, 1-x), step 1e-4.
        let (mut best_x, mut best_v) = (0.0, f64::INFINITY);
        for k in 0..=10_000 {
            let x = k as f64 * 1e-4;
            let v = inner_objective(&[x, 1.0 - x], &[0.0, 1.0], &[0.5, 0.5], 1.0);
            if v < best_v {
                best_v = v;
                best_x = x;
            }
        }
        assert_abs_diff_eq!(p.weights()[0], best_x, epsilon = 1e-4);

        let p = local_worst_case(&[0.0, 1.0], &uniform, 1e6).unwrap();
        assert!(p.approx_eq(&uniform, 1e-6));

        assert!(matches!(local_worst_case(&[0.0, 1.0], &uniform, 0.0), Err(Error::Domain(_))));
        assert!(matches!(local_worst_case(&[0.0], &uniform, 1.0), Err(Error::Domain(_))));
    }

    #[test]
    fn extreme_ratios_do_not_overflow() {
        let q = dist(&[0.5, 0.5]);
        let p = local_worst_case(&[0.0, 1.0], &q, 1e-4).unwrap();
        assert_eq!(p.weights(), &[1.0, 0.0]);
        let g = kl_robust_value(&[0.3, 1.0], &q, 1e-4).unwrap();
        assert_abs_diff_eq!(g, 0.3 + 1e-4 * 2f64.ln(), epsilon = 1e-12);
        // Zero-mass tasks never dominate the shift.
        let q = dist(&[0.0, 1.0]);
        assert_abs_diff_eq!(kl_robust_value(&[0.0, 100.0], &q, 1e-3).unwrap(), 100.0, epsilon = 1e-12);
    }

    #[test]
    fn radius_examples() {
        let q = dist(&[0.1, 0.6, 0.3]);
        assert_abs_diff_eq!(radius_for_lambda(&[0.7; 3], &q, 0.5).unwrap(), 0.0, epsilon = 1e-15);
        assert!(radius_for_lambda(&[0.0, 0.5, 1.0], &q, 1e6).unwrap() <= 1e-6);
        let uniform = dist(&[0.5, 0.5]);
        let r = radius_for_lambda(&[0.0, 1.0], &uniform, 1.0).unwrap();
        // Independent side: KL of the analytic tilt against Q.
        let e = (-1f64).exp();
        let (a, b) = (1.0 / (1.0 + e), e / (1.0 + e));
        let kl = a * (a / 0.5).ln() + b * (b / 0.5).ln();
        assert_abs_diff_eq!(r, kl, epsilon = 1e-14);
        assert!(radius_for_lambda(&[0.0, 1.0], &uniform, -1.0).is_err());
    }

    #[test]
    fn geometric_reference_examples() {
        for w in 1..6 {
            let g = geometric_reference(0.0, w).unwrap();
            assert_eq!(g, SimplexDistribution::one_hot(w, w - 1).unwrap());
            let g = geometric_reference(1.0, w).unwrap();
            assert_eq!(g, SimplexDistribution::one_hot(w, 0).unwrap());
        }
        // Expansion of gamma^3 f1 + (1-gamma)(gamma^2 f1 + gamma f2 + f3) at gamma = 1/2.
        let g = geometric_reference(0.5, 3).unwrap();
        let expanded = [0.125 + 0.5 * 0.25, 0.5 * 0.5, 0.5];
        for (a, b) in g.weights().iter().zip(expanded) {
            assert_abs_diff_eq!(*a, b, epsilon = 1e-15);
        }
        assert!(geometric_reference(1.5, 3).is_err());
        assert!(geometric_reference(-0.1, 3).is_err());
        assert!(geometric_reference(0.5, 0).is_err());
    }

    #[test]
    fn geometric_reference_sums_to_one_on_grid() {
        for k in 0..=100 {
            let gamma = k as f64 / 100.0;
            for w in 1..=12 {
                let g = geometric_reference(gamma, w).unwrap();
                assert!((g.weights().iter().sum::<f64>() - 1.0).abs() <= DISTRIBUTION_TOLERANCE);
            }
        }
    }

    fn instance() -> impl Strategy<Value = (Vec<f64>, Vec<f64>, f64)> {
        (1usize..=6).prop_flat_map(|n| {
            (
                prop::collection::vec(0.0f64..1.0, n),
                prop::collection::vec(0.01f64..1.0, n),
                prop::sample::select(vec![0.05, 0.1, 0.3, 1.0, 3.0]),
            )
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(1000))]

        #[test]
        fn worst_case_is_a_distribution((f, q, lambda) in instance()) {
            let q = SimplexDistribution::new(q).unwrap();
            let p = local_worst_case(&f, &q, lambda).unwrap();
            prop_assert!(p.weights().iter().all(|&w| w >= 0.0));
            prop_assert!((p.weights().iter().sum::<f64>() - 1.0).abs() <= DISTRIBUTION_TOLERANCE);
        }

        #[test]
        fn worst_case_beats_every_grid_vertex((f, q, lambda) in instance()) {
            let q = SimplexDistribution::new(q).unwrap();
            let p = local_worst_case(&f, &q, lambda).unwrap();
            let at_p = inner_objective(p.weights(), &f, q.weights(), lambda);
            prop_assert!(at_p <= grid_min(&f, q.weights(), lambda, 100) + 1e-9);
        }

        #[test]
        fn kl_nonnegative_and_zero_only_on_equality(
            a in prop::collection::vec(0.0f64..1.0, 4),
            b in prop::collection::vec(0.01f64..1.0, 4),
        ) {
            prop_assume!(a.iter().sum::<f64>() > 0.0);
            let p = SimplexDistribution::new(a).unwrap();
            let q = SimplexDistribution::new(b).unwrap();
            let kl = kl_divergence(&p, &q).unwrap();
            prop_assert!(kl >= 0.0);
            prop_assert_eq!(kl_divergence(&q, &q).unwrap(), 0.0);
            if !p.approx_eq(&q, 1e-6) {
                prop_assert!(kl > 0.0);
            }
        }

        #[test]
        fn radius_nonincreasing_in_lambda(
            f in prop::collection::vec(0.0f64..1.0, 2..6),
            seed_q in prop::collection::vec(0.05f64..1.0, 6),
        ) {
            let q = SimplexDistribution::new(seed_q[..f.len()].to_vec()).unwrap();
            let mut sorted = f.clone();
            sorted.sort_by(f64::total_cmp);
            prop_assume!(sorted.windows(2).all(|w| w[1] - w[0] > 1e-6));
            let ladder = [0.01, 0.03, 0.1, 0.3, 1.0, 3.0, 10.0, 100.0];
            let radii: Vec<f64> = ladder.iter().map(|&l| radius_for_lambda(&f, &q, l).unwrap()).collect();
            for w in radii.windows(2) {
                prop_assert!(w[1] <= w[0] + 1e-12, "{:?}", radii);
            }
        }

        #[test]
        fn radius_equals_kl_of_tilt((f, q, lambda) in instance()) {
            let q = SimplexDistribution::new(q).unwrap();
            let p = local_worst_case(&f, &q, lambda).unwrap();
            let r = radius_for_lambda(&f, &q, lambda).unwrap();
            prop_assert!((r - kl_divergence(&p, &q).unwrap()).abs() <= 1e-10);
        }
    }
}
