//! Orthonormal spherical harmonics with the Condon-Shortley phase, and
//! Gauss-Legendre quadrature nodes on `cos(theta)`.
//!
//! `Y_kq(theta, phi) = P_kq(cos theta) e^{i q phi}` where `P_kq` is the fully
//! normalized associated Legendre function. Columns of fixed `q` are generated
//! by the standard three-term recursion in `k`; the seed `P_qq ~ sin^q` is
//! carried as a mantissa plus a natural-log exponent so high orders do not
//! underflow before the recursion has grown them back.

use std::f64::consts::PI;

const RESCALE_ABOVE: f64 = 1e150;

/// `P_kq(x)` for `k = q..=k_max` at fixed `q >= 0`, with `x = cos(theta)`.
pub fn legendre_column(q: usize, k_max: usize, x: f64) -> Vec<f64> {
    if q > k_max {
        return Vec::new();
    }
    let sin = (1.0 - x * x).max(0.0).sqrt();
    // ln|P_qq| = ln(1/sqrt(4 pi)) + sum_{i=1}^{q} ln(sqrt((2i+1)/(2i)) sin)
    let mut ln_scale = -0.5 * (4.0 * PI).ln();
    if q > 0 {
        if sin == 0.0 {
            return vec![0.0; k_max - q + 1];
        }
        for i in 1..=q {
            let i = i as f64;
            ln_scale += 0.5 * ((2.0 * i + 1.0) / (2.0 * i)).ln() + sin.ln();
        }
    }
    let sign = if q.is_multiple_of(2) { 1.0 } else { -1.0 };

    let mut out = Vec::with_capacity(k_max - q + 1);
    let mut prev2 = 0.0;
    let mut prev1 = sign;
    let emit = |v: f64, ln_scale: f64| -> f64 {
        if v == 0.0 {
            0.0
        } else {
            (v.abs().ln() + ln_scale).exp().copysign(v)
        }
    };
    out.push(emit(prev1, ln_scale));
    let qf = q as f64;
    for k in q + 1..=k_max {
        let kf = k as f64;
        let a = ((4.0 * kf * kf - 1.0) / (kf * kf - qf * qf)).sqrt();
        let current = if k == q + 1 {
            (2.0 * qf + 3.0).sqrt() * x * prev1
        } else {
            let km1 = kf - 1.0;
            let b = ((km1 * km1 - qf * qf) / (4.0 * km1 * km1 - 1.0)).sqrt();
            a * (x * prev1 - b * prev2)
        };
        prev2 = prev1;
        prev1 = current;
        if prev1.abs() > RESCALE_ABOVE {
            prev1 /= RESCALE_ABOVE;
            prev2 /= RESCALE_ABOVE;
            ln_scale += RESCALE_ABOVE.ln();
        }
        out.push(emit(prev1, ln_scale));
    }
    out
}

/// Nodes (descending in `x`, i.e. ascending in `theta`) and weights of the
/// `n`-point Gauss-Legendre rule on `[-1, 1]`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre_with_derivative(n, x);
        if d != 0.0 {
            dp = d;
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = x;
        nodes[n - 1 - i] = -x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let k = k as f64;
        let p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
    }
    let n = n as f64;
    (p1, n * (x * p1 - p0) / (x * x - 1.0))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn low_order_closed_forms() {
        let x: f64 = 0.3;
        let s = (1.0 - x * x).sqrt();
        let c00 = legendre_column(0, 2, x);
        assert!((c00[0] - 1.0 / (4.0 * PI).sqrt()).abs() < 1e-15);
        assert!((c00[1] - (3.0 / (4.0 * PI)).sqrt() * x).abs() < 1e-15);
        assert!((c00[2] - (5.0 / (16.0 * PI)).sqrt() * (3.0 * x * x - 1.0)).abs() < 1e-15);
        let c11 = legendre_column(1, 2, x);
        assert!((c11[0] + (3.0 / (8.0 * PI)).sqrt() * s).abs() < 1e-15);
        assert!((c11[1] + (15.0 / (8.0 * PI)).sqrt() * s * x).abs() < 1e-15);
        let c22 = legendre_column(2, 2, x);
        assert!((c22[0] - (15.0 / (32.0 * PI)).sqrt() * s * s).abs() < 1e-15);
    }

    #[test]
    fn quadrature_integrates_polynomials() {
        let (x, w) = gauss_legendre(7);
        assert!((w.iter().sum::<f64>() - 2.0).abs() < 1e-14);
        let int_x12: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(12)).sum();
        assert!((int_x12 - 2.0 / 13.0).abs() < 1e-14);
        assert!(x.windows(2).all(|p| p[0] > p[1]));
    }

    #[test]
    fn columns_are_orthonormal() {
        let (x, w) = gauss_legendre(40);
        for q in [0usize, 3, 17] {
            let cols: Vec<Vec<f64>> = x.iter().map(|&xi| legendre_column(q, 30, xi)).collect();
            for a in 0..=(30 - q) {
                for b in 0..=(30 - q) {
                    let integral: f64 = (0..x.len())
                        .map(|i| w[i] * cols[i][a] * cols[i][b])
                        .sum::<f64>()
                        * 2.0
                        * PI;
                    let expected = if a == b { 1.0 } else { 0.0 };
                    assert!(
                        (integral - expected).abs() < 1e-12,
                        "q={q} a={a} b={b}: {integral}"
                    );
                }
            }
        }
    }

    #[test]
    fn high_order_stays_normalized() {
        // P_qq ~ sin^8000 underflows f64 over most of the sphere, but
        // P_{10000, 8000} is O(1) where sin(theta) > 0.8.
        let (q, k) = (8000, 10_000);
        let (x, w) = gauss_legendre(k + 1);
        let norm: f64 = x
            .iter()
            .zip(&w)
            .map(|(&xi, wi)| wi * legendre_column(q, k, xi)[k - q].powi(2))
            .sum::<f64>()
            * 2.0
            * PI;
        assert!((norm - 1.0).abs() < 1e-8, "{norm}");
    }
}
