//! Integer-order Bessel functions of the first kind.

use std::f64::consts::PI;

/// J_n(y) from the trapezoidal rule on the periodic integral
/// J_n(y) = (1/2π) ∫₀^{2π} cos(nθ − y sin θ) dθ.
///
/// The integrand is entire and periodic, so the rule converges exponentially
/// once the node count exceeds |y| + |n| by a margin.
pub fn bessel_j(n: i32, y: f64) -> f64 {
    if !y.is_finite() {
        return f64::NAN;
    }
    let nodes = 64 + 2 * (y.abs().ceil() as usize) + 2 * n.unsigned_abs() as usize;
    let h = 2.0 * PI / nodes as f64;
    let nf = n as f64;
    let sum: f64 = (0..nodes)
        .map(|k| {
            let theta = k as f64 * h;
            (nf * theta - y * theta.sin()).cos()
        })
        .sum();
    sum / nodes as f64
}

/// Factor N·J_N(y)/y entering the N-photon Rabi frequency, with the y → 0
/// limit taken analytically (1/2 for N = 1, 0 for N ≥ 2).
pub fn bessel_rabi_factor(photons: u32, y: f64) -> f64 {
    let n = photons as f64;
    if y.abs() < 1e-4 {
        // leading two terms of N·J_N(y)/y = (N/y)·Σ_k (−1)^k (y/2)^{2k+N} / (k!(k+N)!)
        let lead = n * (0.5f64).powi(photons as i32) / factorial(photons);
        let next = -n * (0.5f64).powi(photons as i32 + 2) / factorial(photons + 1);
        return lead * y.powi(photons as i32 - 1) + next * y.powi(photons as i32 + 1);
    }
    n * bessel_j(photons as i32, y) / y
}

fn factorial(n: u32) -> f64 {
    (1..=n).map(f64::from).product()
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Ascending power series, the independent reference.
    fn series(n: u32, y: f64) -> f64 {
        let mut term = (0.5 * y).powi(n as i32) / factorial(n);
        let mut sum = term;
        for k in 1..80 {
            term *= -(0.25 * y * y) / (k as f64 * (k + n) as f64);
            sum += term;
        }
        sum
    }

    #[test]
    fn tabulated_values() {
        // Abramowitz & Stegun, Table 9.1
        assert!((bessel_j(0, 1.0) - 0.765_197_686_557_966_6).abs() < 1e-14);
        assert!((bessel_j(1, 1.0) - 0.440_050_585_744_933_5).abs() < 1e-14);
        assert!((bessel_j(2, 1.0) - 0.114_903_484_931_900_5).abs() < 1e-14);
        assert!((bessel_j(1, 5.0) - (-0.327_579_137_591_465_2)).abs() < 1e-14);
    }

    #[test]
    fn agrees_with_power_series() {
        for n in 1..=3 {
            for i in 0..200 {
                let y = -10.0 + 0.1 * i as f64;
                assert!((bessel_j(n as i32, y) - series(n, y)).abs() < 1e-12, "n={n} y={y}");
            }
        }
    }

    #[test]
    fn rabi_factor_limits() {
        assert!((bessel_rabi_factor(1, 0.0) - 0.5).abs() < 1e-15);
        assert_eq!(bessel_rabi_factor(2, 0.0), 0.0);
        assert_eq!(bessel_rabi_factor(3, 0.0), 0.0);
        assert!((bessel_rabi_factor(1, 1.0) - 0.440_050_585_744_933_5).abs() < 1e-12);
    }

    #[test]
    fn rabi_factor_continuous_across_cutover() {
        for n in 1..=3 {
            for &y in &[0.99e-4, 1.01e-4, -0.99e-4, -1.01e-4] {
                let exact = n as f64 * series(n, y) / y;
                assert!((bessel_rabi_factor(n, y) - exact).abs() < 1e-11, "n={n} y={y}");
            }
        }
    }
}
