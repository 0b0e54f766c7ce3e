//! Gauss–Hermite quadrature for expectations over dB-normal variables.

use std::f64::consts::PI;
use std::sync::OnceLock;

/// Number of nodes used for every expectation in this crate.
pub const NODES: usize = 64;

/// Nodes and weights for `∫ e^{-x²} f(x) dx`, nodes ascending.
pub fn gauss_hermite(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    let m = n.div_ceil(2);
    let pim4 = PI.powf(-0.25);
    let mut z = 0.0f64;
    for i in 0..m {
        // Standard initial guesses for the largest roots, then extrapolation.
        z = match i {
            0 => (2.0 * n as f64 + 1.0).sqrt() - 1.85575 * (2.0 * n as f64 + 1.0).powf(-1.0 / 6.0),
            1 => z - 1.14 * (n as f64).powf(0.426) / z,
            2 => 1.86 * z - 0.86 * x[0],
            3 => 1.91 * z - 0.91 * x[1],
            _ => 2.0 * z - x[i - 2],
        };
        let mut pp = 0.0;
        for _ in 0..100 {
            // Orthonormal Hermite recurrence.
            let mut p1 = pim4;
            let mut p2 = 0.0;
            for j in 0..n {
                let p3 = p2;
                p2 = p1;
                p1 = z * (2.0 / (j + 1) as f64).sqrt() * p2
                    - (j as f64 / (j + 1) as f64).sqrt() * p3;
            }
            pp = (2.0 * n as f64).sqrt() * p2;
            let dz = p1 / pp;
            z -= dz;
            if dz.abs() <= 1e-15 * z.abs().max(1.0) {
                break;
            }
        }
        x[i] = z;
        x[n - 1 - i] = -z;
        w[i] = 2.0 / (pp * pp);
        w[n - 1 - i] = w[i];
    }
    x.reverse();
    w.reverse();
    (x, w)
}

fn table() -> &'static (Vec<f64>, Vec<f64>) {
    static TABLE: OnceLock<(Vec<f64>, Vec<f64>)> = OnceLock::new();
    TABLE.get_or_init(|| gauss_hermite(NODES))
}

/// `E[f(X)]` for `X ~ N(mean, sigma²)`.
pub fn normal_expectation(mean: f64, sigma: f64, f: impl Fn(f64) -> f64) -> f64 {
    let (x, w) = table();
    let s = std::f64::consts::SQRT_2 * sigma;
    x.iter()
        .zip(w)
        .map(|(&xi, &wi)| wi * f(mean + s * xi))
        .sum::<f64>()
        / PI.sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn weights_sum_to_sqrt_pi_and_nodes_are_roots() {
        let (x, w) = gauss_hermite(NODES);
        assert!((w.iter().sum::<f64>() / PI.sqrt() - 1.0).abs() < 1e-13);
        assert!(x.windows(2).all(|p| p[0] < p[1]));
        assert!((x[0] + x[NODES - 1]).abs() < 1e-12);
    }

    #[test]
    fn gaussian_moments_exact() {
        let m = |k: i32| normal_expectation(0.0, 1.0, |x| x.powi(k));
        assert!(m(1).abs() < 1e-13);
        assert!((m(2) - 1.0).abs() < 1e-12);
        assert!((m(4) - 3.0).abs() < 1e-11);
        assert!((m(6) - 15.0).abs() < 1e-10);
        let e = normal_expectation(0.3, 0.7, f64::exp);
        assert!((e / (0.3f64 + 0.245).exp() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn small_rule_matches_tabulated() {
        let (x, w) = gauss_hermite(3);
        assert!((x[2] - 1.224_744_871_391_589).abs() < 1e-14);
        assert!((w[1] - 1.181_635_900_603_677).abs() < 1e-14);
    }
}
