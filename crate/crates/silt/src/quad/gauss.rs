//! Gauss-Legendre nodes and weights, computed at first use.
//!
//! Nodes are the roots of the Legendre polynomial `P_n`, found by
//! Newton iteration from the Chebyshev-like starting guesses
//! `cos(pi (k - 1/4) / (n + 1/2))`; weights follow from
//! `w = 2 / ((1 - x^2) P_n'(x)^2)`.  Computing them here instead of
//! pasting tables keeps the rule order easy to change and leaves no
//! opaque constants to audit.

use std::sync::OnceLock;

/// Value and derivative of the Legendre polynomial `P_n` at `x`, via
/// the three-term recurrence.
fn legendre(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    // P_n'(x) = n (x P_n - P_{n-1}) / (x^2 - 1)
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Nodes (ascending) and weights of the `n`-point rule on `[-1, 1]`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 2);
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for k in 0..n.div_ceil(2) {
        let mut x = (std::f64::consts::PI * (k as f64 + 0.75) / (n as f64 + 0.5)).cos();
        // Newton; converges in a handful of steps from these guesses.
        for _ in 0..100 {
            let (p, d) = legendre(n, x);
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre(n, x);
        let w = 2.0 / ((1.0 - x * x) * d * d);
        // k = 0 converges to the largest root; fill both symmetric slots.
        nodes[k] = -x.abs();
        nodes[n - 1 - k] = x.abs();
        weights[k] = w;
        weights[n - 1 - k] = w;
    }
    if n % 2 == 1 {
        nodes[n / 2] = 0.0;
    }
    (nodes, weights)
}

pub struct RulePair {
    pub nodes_hi: Vec<f64>,
    pub weights_hi: Vec<f64>,
    pub nodes_lo: Vec<f64>,
    pub weights_lo: Vec<f64>,
}

/// The embedded 15/7 point pair used by the 1D adaptive driver.
pub fn rule_15_7() -> &'static RulePair {
    static PAIR: OnceLock<RulePair> = OnceLock::new();
    PAIR.get_or_init(|| {
        let (nodes_hi, weights_hi) = gauss_legendre(15);
        let (nodes_lo, weights_lo) = gauss_legendre(7);
        RulePair {
            nodes_hi,
            weights_hi,
            nodes_lo,
            weights_lo,
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn nodes_are_legendre_roots() {
        for n in [2, 7, 15, 20] {
            let (nodes, weights) = gauss_legendre(n);
            for &x in &nodes {
                let (p, _) = legendre(n, x);
                assert!(p.abs() < 1e-13, "P_{n} at node {x} is {p}");
            }
            let total: f64 = weights.iter().sum();
            assert!((total - 2.0).abs() < 1e-14);
            // ascending, symmetric
            for w in nodes.windows(2) {
                assert!(w[0] < w[1]);
            }
            for k in 0..n {
                assert!((nodes[k] + nodes[n - 1 - k]).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn degree_of_exactness() {
        // n-point Gauss integrates x^m exactly for m <= 2n-1.
        let (nodes, weights) = gauss_legendre(7);
        for m in 0..=13u32 {
            let q: f64 = nodes
                .iter()
                .zip(&weights)
                .map(|(&x, &w)| w * x.powi(m as i32))
                .sum();
            let exact = if m % 2 == 0 {
                2.0 / (f64::from(m) + 1.0)
            } else {
                0.0
            };
            assert!(
                (q - exact).abs() < 1e-14,
                "degree {m}: quad {q} vs exact {exact}"
            );
        }
    }

    #[test]
    fn fifteen_point_on_smooth_function() {
        let (nodes, weights) = gauss_legendre(15);
        // int_{-1}^{1} exp(x) dx = e - 1/e
        let q: f64 = nodes.iter().zip(&weights).map(|(&x, &w)| w * x.exp()).sum();
        let exact = 1.0_f64.exp() - (-1.0_f64).exp();
        assert!((q - exact).abs() < 1e-15 * exact);
    }
}
