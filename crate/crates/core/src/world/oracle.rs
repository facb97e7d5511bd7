//! Exact length values and success probabilities of a generator.
//!
//! With `phi(s) = E[gamma^L(s)]` (L counts the remaining emissions, EOS
//! included) the value function is `V(s) = -(1 - phi(s))` and
//!
//! ```text
//! phi(s) = gamma * sum_x p(x | s) * phi(next(s, x)),   phi(terminal) = 1.
//! ```
//!
//! Success probabilities solve the undiscounted hitting system with
//! `h = 1` on success states and `h = 0` on the other terminals.

use super::generator::MarkovGenerator;
use crate::error::{Error, Result};
use crate::horizon::DiscountSpec;

/// Largest system solved by dense elimination; larger ones use Gauss-Seidel.
pub const DENSE_LIMIT: usize = 2000;

const ITER_TOL: f64 = 1e-14;
const MAX_SWEEPS: usize = 1_000_000;

/// Exact per-state quantities for one generator under one discount.
#[derive(Debug, Clone, PartialEq)]
pub struct ValueOracle {
    pub phi: Vec<f64>,
    pub value: Vec<f64>,
    pub success_prob: Vec<f64>,
}

impl ValueOracle {
    /// Largest residual of the `phi` fixed-point equation over non-terminal
    /// states.
    pub fn max_phi_residual(&self, gen: &MarkovGenerator, spec: &DiscountSpec) -> f64 {
        gen.non_terminal_states()
            .map(|s| {
                let rhs: f64 = gen.edges(s).map(|(_, p, n)| p * self.phi[n]).sum();
                (self.phi[s] - spec.gamma() * rhs).abs()
            })
            .fold(0.0, f64::max)
    }
}

/// Solves for the exact value function and success probabilities.
pub fn exact_value(gen: &MarkovGenerator, spec: &DiscountSpec) -> Result<ValueOracle> {
    let n = gen.num_states();
    let mut phi_boundary = vec![0.0; n];
    let mut succ_boundary = vec![0.0; n];
    for s in 0..n {
        if gen.is_terminal(s) {
            phi_boundary[s] = 1.0;
            succ_boundary[s] = if gen.is_success(s) { 1.0 } else { 0.0 };
        }
    }
    let phi = solve_absorbing(gen, spec.gamma(), &phi_boundary)?;
    let success_prob = solve_absorbing(gen, 1.0, &succ_boundary)?
        .into_iter()
        .map(|h| h.clamp(0.0, 1.0))
        .collect();
    let value = phi.iter().map(|f| -(1.0 - f)).collect();
    Ok(ValueOracle {
        phi,
        value,
        success_prob,
    })
}

/// Solves `x(s) = scale * sum_x p(x|s) x(next)` on non-terminal states with
/// `x = boundary` on terminal states.
fn solve_absorbing(gen: &MarkovGenerator, scale: f64, boundary: &[f64]) -> Result<Vec<f64>> {
    let interior: Vec<usize> = gen.non_terminal_states().collect();
    let mut out = boundary.to_vec();
    if interior.is_empty() {
        return Ok(out);
    }
    let solved = if interior.len() <= DENSE_LIMIT {
        solve_dense(gen, scale, boundary, &interior)?
    } else {
        solve_gauss_seidel(gen, scale, boundary, &interior)?
    };
    for (&s, x) in interior.iter().zip(solved) {
        out[s] = x;
    }
    Ok(out)
}

fn solve_dense(
    gen: &MarkovGenerator,
    scale: f64,
    boundary: &[f64],
    interior: &[usize],
) -> Result<Vec<f64>> {
    let m = interior.len();
    let mut index = vec![usize::MAX; gen.num_states()];
    for (i, &s) in interior.iter().enumerate() {
        index[s] = i;
    }
    // Row-major [A | b] with A = I - scale * P_interior.
    let w = m + 1;
    let mut a = vec![0.0; m * w];
    for (i, &s) in interior.iter().enumerate() {
        a[i * w + i] += 1.0;
        for (_, p, next) in gen.edges(s) {
            if gen.is_terminal(next) {
                a[i * w + m] += scale * p * boundary[next];
            } else {
                a[i * w + index[next]] -= scale * p;
            }
        }
    }
    // Gaussian elimination with partial pivoting.
    for col in 0..m {
        let pivot = (col..m)
            .max_by(|&x, &y| a[x * w + col].abs().total_cmp(&a[y * w + col].abs()))
            .expect("non-empty range");
        if a[pivot * w + col].abs() < 1e-300 {
            return Err(Error::NonAbsorbing(format!(
                "singular system at state {}",
                interior[col]
            )));
        }
        if pivot != col {
            for k in 0..w {
                a.swap(col * w + k, pivot * w + k);
            }
        }
        let diag = a[col * w + col];
        for row in col + 1..m {
            let factor = a[row * w + col] / diag;
            if factor == 0.0 {
                continue;
            }
            for k in col..w {
                a[row * w + k] -= factor * a[col * w + k];
            }
        }
    }
    let mut x = vec![0.0; m];
    for row in (0..m).rev() {
        let mut acc = a[row * w + m];
        for k in row + 1..m {
            acc -= a[row * w + k] * x[k];
        }
        x[row] = acc / a[row * w + row];
    }
    if x.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonAbsorbing("non-finite solution".into()));
    }
    Ok(x)
}

fn solve_gauss_seidel(
    gen: &MarkovGenerator,
    scale: f64,
    boundary: &[f64],
    interior: &[usize],
) -> Result<Vec<f64>> {
    let mut x = boundary.to_vec();
    for _ in 0..MAX_SWEEPS {
        let mut delta: f64 = 0.0;
        for &s in interior {
            let mut self_p = 0.0;
            let mut rhs = 0.0;
            for (_, p, next) in gen.edges(s) {
                if next == s {
                    self_p += p;
                } else {
                    rhs += p * x[next];
                }
            }
            let updated = scale * rhs / (1.0 - scale * self_p);
            if !updated.is_finite() {
                return Err(Error::NonAbsorbing(format!("iteration diverged at state {s}")));
            }
            delta = delta.max((updated - x[s]).abs());
            x[s] = updated;
        }
        if delta < ITER_TOL {
            return Ok(interior.iter().map(|&s| x[s]).collect());
        }
    }
    Err(Error::NonAbsorbing(
        "Gauss-Seidel did not converge".to_string(),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    #[test]
    fn one_step_chain() {
        let g = fixtures::deterministic_chain(1);
        let spec = DiscountSpec::new(0.5).unwrap();
        let o = exact_value(&g, &spec).unwrap();
        let s = g.start_state("p").unwrap();
        assert!((o.phi[s] - 0.5).abs() < 1e-15);
        assert!((o.value[s] + 0.5).abs() < 1e-15);
    }

    #[test]
    fn three_step_chain_matches_return_target() {
        let g = fixtures::deterministic_chain(3);
        let spec = DiscountSpec::new(0.5).unwrap();
        let o = exact_value(&g, &spec).unwrap();
        let s = g.start_state("p").unwrap();
        assert!((o.value[s] + 0.875).abs() < 1e-15);
        assert!((o.value[s] - spec.return_target(3)).abs() < 1e-15);
        for t in 0..g.num_states() {
            if g.is_terminal(t) {
                assert_eq!(o.value[t], 0.0);
                assert_eq!(o.phi[t], 1.0);
            }
        }
    }

    #[test]
    fn geometric_closed_form() {
        // EOS prob p each step: phi = gamma p / (1 - gamma (1 - p)).
        let (p, gamma) = (0.2, 0.9);
        let g = fixtures::geometric(p);
        let o = exact_value(&g, &DiscountSpec::new(gamma).unwrap()).unwrap();
        let s = g.start_state("p").unwrap();
        let expected = gamma * p / (1.0 - gamma * (1.0 - p));
        assert!((o.phi[s] - expected).abs() < 1e-14);
    }

    #[test]
    fn residual_and_success_bounds() {
        let g = fixtures::ten_state();
        let spec = DiscountSpec::new(0.9).unwrap();
        let o = exact_value(&g, &spec).unwrap();
        assert!(o.max_phi_residual(&g, &spec) <= 1e-10);
        for s in 0..g.num_states() {
            assert!((0.0..=1.0).contains(&o.success_prob[s]));
            if g.is_terminal(s) {
                let want = if g.is_success(s) { 1.0 } else { 0.0 };
                assert_eq!(o.success_prob[s], want);
            }
        }
    }

    #[test]
    fn gauss_seidel_agrees_with_dense() {
        let g = fixtures::two_path();
        let spec = DiscountSpec::new(0.95).unwrap();
        let interior: Vec<usize> = g.non_terminal_states().collect();
        let mut boundary = vec![0.0; g.num_states()];
        for s in 0..g.num_states() {
            if g.is_terminal(s) {
                boundary[s] = 1.0;
            }
        }
        let dense = solve_dense(&g, spec.gamma(), &boundary, &interior).unwrap();
        let iter = solve_gauss_seidel(&g, spec.gamma(), &boundary, &interior).unwrap();
        for (a, b) in dense.iter().zip(&iter) {
            assert!((a - b).abs() < 1e-12);
        }
    }
}
