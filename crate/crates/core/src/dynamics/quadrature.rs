//! Nodes and weights for averaging over a zero-mean Gaussian.

use nalgebra::{DMatrix, SymmetricEigen};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

/// Largest node count served by quadrature; beyond it samples are drawn.
pub const MAX_QUADRATURE_NODES: usize = 64;

/// Gauss–Hermite rule for the standard normal weight (probabilists'
/// convention), by Golub–Welsch. Weights sum to one. Nodes are ascending.
pub fn gauss_hermite(n: usize) -> Vec<(f64, f64)> {
    assert!(n >= 1, "at least one node is required");
    if n == 1 {
        return vec![(0.0, 1.0)];
    }
    let jacobi = DMatrix::from_fn(n, n, |i, j| {
        if i + 1 == j || j + 1 == i {
            (i.max(j) as f64).sqrt()
        } else {
            0.0
        }
    });
    let eig = SymmetricEigen::new(jacobi);
    let mut rule: Vec<(f64, f64)> = (0..n)
        .map(|k| (eig.eigenvalues[k], eig.eigenvectors[(0, k)].powi(2)))
        .collect();
    rule.sort_by(|a, b| a.0.total_cmp(&b.0));
    // Symmetrize away eigen-solver noise.
    for k in 0..n / 2 {
        let x = 0.5 * (rule[n - 1 - k].0 - rule[k].0);
        let w = 0.5 * (rule[n - 1 - k].1 + rule[k].1);
        rule[k] = (-x, w);
        rule[n - 1 - k] = (x, w);
    }
    if n % 2 == 1 {
        rule[n / 2].0 = 0.0;
    }
    let total: f64 = rule.iter().map(|r| r.1).sum();
    rule.iter().map(|&(x, w)| (x, w / total)).collect()
}

/// Draws from N(0, sigma²) with equal weights.
pub fn monte_carlo_normal(n: usize, sigma: f64, seed: u64) -> Vec<(f64, f64)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let normal = Normal::new(0.0, 1.0).expect("unit normal");
    let w = 1.0 / n as f64;
    (0..n).map(|_| (sigma * normal.sample(&mut rng), w)).collect()
}

/// Nodes for N(0, sigma²): quadrature up to 64 nodes, seeded Monte Carlo
/// beyond. A zero width collapses to a single unshifted node.
pub fn gaussian_nodes(n: usize, sigma: f64, seed: u64) -> Vec<(f64, f64)> {
    if sigma == 0.0 {
        return vec![(0.0, 1.0)];
    }
    if n <= MAX_QUADRATURE_NODES {
        gauss_hermite(n)
            .into_iter()
            .map(|(x, w)| (sigma * x, w))
            .collect()
    } else {
        monte_carlo_normal(n, sigma, seed)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn double_factorial(k: u32) -> f64 {
        (1..=k).rev().step_by(2).map(|x| x as f64).product()
    }

    #[test]
    fn moments_of_standard_normal() {
        for n in [2usize, 5, 21, 64] {
            let rule = gauss_hermite(n);
            for p in 0..(2 * n as u32).min(24) {
                let m: f64 = rule.iter().map(|(x, w)| w * x.powi(p as i32)).sum();
                let scale: f64 = rule.iter().map(|(x, w)| w * x.abs().powi(p as i32)).sum();
                let exact = if p % 2 == 1 { 0.0 } else if p == 0 { 1.0 } else { double_factorial(p - 1) };
                assert!(
                    (m - exact).abs() <= 1e-9 * scale.max(1.0),
                    "n={n} p={p} got {m} want {exact}"
                );
            }
        }
    }

    #[test]
    fn three_node_rule_is_known() {
        let r = gauss_hermite(3);
        assert!((r[2].0 - 3f64.sqrt()).abs() < 1e-13);
        assert!((r[1].1 - 2.0 / 3.0).abs() < 1e-13);
        assert!((r[0].1 - 1.0 / 6.0).abs() < 1e-13);
    }

    #[test]
    fn monte_carlo_is_seeded() {
        assert_eq!(monte_carlo_normal(100, 2.0, 7), monte_carlo_normal(100, 2.0, 7));
        assert_ne!(monte_carlo_normal(100, 2.0, 7), monte_carlo_normal(100, 2.0, 8));
        let s = gaussian_nodes(5000, 2.0, 3);
        let var: f64 = s.iter().map(|(x, w)| w * x * x).sum();
        assert!((var - 4.0).abs() < 0.3);
    }
}
