//! Real symmetric tridiagonal matrices: full spectrum by implicit-shift QL,
//! and the lowest eigenpair by Sturm bisection plus shifted inverse iteration.

use crate::error::{Error, Result};

const MAX_QL_SWEEPS: usize = 64;

#[derive(Clone, Debug, PartialEq)]
pub struct SymTridiagonal {
    diag: Vec<f64>,
    off: Vec<f64>,
}

impl SymTridiagonal {
    /// `off[i]` is the element coupling rows `i` and `i + 1`.
    pub fn new(diag: Vec<f64>, off: Vec<f64>) -> Result<Self> {
        if diag.is_empty() || off.len() + 1 != diag.len() {
            return Err(Error::Domain(format!(
                "tridiagonal shape mismatch: {} diagonal, {} off-diagonal",
                diag.len(),
                off.len()
            )));
        }
        Ok(Self { diag, off })
    }

    pub fn dim(&self) -> usize {
        self.diag.len()
    }

    pub fn diag(&self) -> &[f64] {
        &self.diag
    }

    pub fn off(&self) -> &[f64] {
        &self.off
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        let n = self.dim();
        let mut y: Vec<f64> = self.diag.iter().zip(x).map(|(d, v)| d * v).collect();
        for i in 0..n - 1 {
            y[i] += self.off[i] * x[i + 1];
            y[i + 1] += self.off[i] * x[i];
        }
        y
    }

    /// Gershgorin interval containing the whole spectrum.
    pub fn gershgorin(&self) -> (f64, f64) {
        let n = self.dim();
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for i in 0..n {
            let left = if i > 0 { self.off[i - 1].abs() } else { 0.0 };
            let right = if i + 1 < n { self.off[i].abs() } else { 0.0 };
            lo = lo.min(self.diag[i] - left - right);
            hi = hi.max(self.diag[i] + left + right);
        }
        (lo, hi)
    }

    /// Number of eigenvalues strictly below `x` (Sturm sequence count).
    pub fn count_below(&self, x: f64) -> usize {
        let tiny = f64::MIN_POSITIVE.sqrt();
        let mut count = 0;
        let mut q = self.diag[0] - x;
        if q < 0.0 {
            count += 1;
        }
        for i in 1..self.dim() {
            let denom = if q.abs() < tiny { tiny.copysign(q) } else { q };
            q = self.diag[i] - x - self.off[i - 1] * self.off[i - 1] / denom;
            if q < 0.0 {
                count += 1;
            }
        }
        count
    }

    /// All eigenvalues, ascending.
    pub fn eigenvalues(&self) -> Result<Vec<f64>> {
        let mut d = self.diag.clone();
        let mut e = self.off.clone();
        e.push(0.0);
        ql_implicit(&mut d, &mut e)?;
        d.sort_by(f64::total_cmp);
        Ok(d)
    }

    /// Smallest eigenvalue to within a few ulps, by bisection on the Sturm count.
    pub fn lowest_eigenvalue(&self) -> f64 {
        let (mut lo, mut hi) = self.gershgorin();
        let width = (hi - lo).max(f64::MIN_POSITIVE);
        lo -= 1e-12 * width;
        hi += 1e-12 * width;
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if self.count_below(mid) >= 1 {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        0.5 * (lo + hi)
    }

    /// Lowest eigenpair with a unit-norm eigenvector.
    ///
    /// The shift sits just below the bisected eigenvalue so the shifted matrix
    /// is positive definite and the LDL^T solve needs no pivoting; each
    /// inverse-iteration step then contracts the error by `delta / gap`.
    pub fn lowest_eigenpair(&self, seed: Option<&[f64]>) -> Result<(f64, Vec<f64>)> {
        let n = self.dim();
        if n == 1 {
            return Ok((self.diag[0], vec![1.0]));
        }
        let lambda = self.lowest_eigenvalue();
        let (lo, hi) = self.gershgorin();
        let scale = (hi - lo).abs().max(lambda.abs()).max(1e-300);
        let shift = lambda - 1e-10 * scale;

        let mut x: Vec<f64> = match seed {
            Some(s) if s.len() == n && s.iter().any(|v| *v != 0.0) => s.to_vec(),
            _ => (0..n).map(|i| 1.0 + 1e-3 * (i as f64 / n as f64)).collect(),
        };
        normalize(&mut x);
        let factor = ldl_factor(&self.diag, &self.off, shift)?;
        for _ in 0..8 {
            let mut y = ldl_solve(&factor, &self.off, &x);
            normalize(&mut y);
            let change = y
                .iter()
                .zip(&x)
                .map(|(a, b)| (a - b).abs())
                .fold(0.0, f64::max);
            x = y;
            if change < 1e-15 {
                break;
            }
        }
        let hx = self.mul_vec(&x);
        let rayleigh: f64 = hx.iter().zip(&x).map(|(a, b)| a * b).sum();
        if !rayleigh.is_finite() {
            return Err(Error::Numerical(
                "inverse iteration produced non-finite values".into(),
            ));
        }
        Ok((rayleigh, x))
    }

    /// `||H x - lambda x||_2`.
    pub fn residual(&self, lambda: f64, x: &[f64]) -> f64 {
        self.mul_vec(x)
            .iter()
            .zip(x)
            .map(|(hx, v)| (hx - lambda * v).powi(2))
            .sum::<f64>()
            .sqrt()
    }
}

fn normalize(x: &mut [f64]) {
    let n = x.iter().map(|v| v * v).sum::<f64>().sqrt();
    x.iter_mut().for_each(|v| *v /= n);
}

/// Pivots of `H - shift = L D L^T`.
fn ldl_factor(diag: &[f64], off: &[f64], shift: f64) -> Result<Vec<f64>> {
    let mut d = Vec::with_capacity(diag.len());
    d.push(diag[0] - shift);
    for i in 1..diag.len() {
        let prev = d[i - 1];
        if prev == 0.0 || !prev.is_finite() {
            return Err(Error::Numerical(
                "singular pivot in shifted factorization".into(),
            ));
        }
        d.push(diag[i] - shift - off[i - 1] * off[i - 1] / prev);
    }
    Ok(d)
}

fn ldl_solve(pivots: &[f64], off: &[f64], b: &[f64]) -> Vec<f64> {
    let n = b.len();
    // L has unit diagonal and subdiagonal off[i-1] / pivots[i-1].
    let mut y = b.to_vec();
    for i in 1..n {
        y[i] -= off[i - 1] / pivots[i - 1] * y[i - 1];
    }
    let mut x = vec![0.0; n];
    x[n - 1] = y[n - 1] / pivots[n - 1];
    for i in (0..n - 1).rev() {
        x[i] = (y[i] - off[i] * x[i + 1]) / pivots[i];
    }
    x
}

/// Implicit-shift QL on the diagonal `d` and off-diagonal `e` (with
/// `e[n-1] = 0`); leaves the eigenvalues in `d`, unsorted.
fn ql_implicit(d: &mut [f64], e: &mut [f64]) -> Result<()> {
    let n = d.len();
    for l in 0..n {
        let mut sweeps = 0;
        loop {
            let mut m = l;
            while m + 1 < n {
                let dd = d[m].abs() + d[m + 1].abs();
                if e[m].abs() <= f64::EPSILON * dd {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            sweeps += 1;
            if sweeps > MAX_QL_SWEEPS {
                return Err(Error::Numerical(format!(
                    "QL iteration did not converge for eigenvalue {l}"
                )));
            }
            let mut g = (d[l + 1] - d[l]) / (2.0 * e[l]);
            let mut r = g.hypot(1.0);
            g = d[m] - d[l] + e[l] / (g + r.copysign(g));
            let (mut s, mut c, mut p) = (1.0, 1.0, 0.0);
            let mut deflated = false;
            let mut i = m;
            while i > l {
                i -= 1;
                let f = s * e[i];
                let b = c * e[i];
                r = f.hypot(g);
                e[i + 1] = r;
                if r == 0.0 {
                    d[i + 1] -= p;
                    e[m] = 0.0;
                    deflated = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = d[i + 1] - p;
                r = (d[i] - g) * s + 2.0 * c * b;
                p = s * r;
                d[i + 1] = g + p;
                g = c * r - b;
            }
            if deflated {
                continue;
            }
            d[l] -= p;
            e[l] = g;
            e[m] = 0.0;
        }
    }
    if d.iter().any(|v| !v.is_finite()) {
        return Err(Error::Numerical(
            "QL iteration produced non-finite eigenvalues".into(),
        ));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::DMatrix;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn dense(t: &SymTridiagonal) -> DMatrix<f64> {
        let n = t.dim();
        DMatrix::from_fn(n, n, |i, j| {
            if i == j {
                t.diag()[i]
            } else if i + 1 == j {
                t.off()[i]
            } else if j + 1 == i {
                t.off()[j]
            } else {
                0.0
            }
        })
    }

    fn random_matrix(rng: &mut ChaCha8Rng, n: usize) -> SymTridiagonal {
        let diag = (0..n).map(|_| rng.gen_range(-5.0..5.0)).collect();
        let off = (0..n - 1).map(|_| rng.gen_range(-2.0..2.0)).collect();
        SymTridiagonal::new(diag, off).unwrap()
    }

    #[test]
    fn spectrum_matches_dense_solver() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for n in [1, 2, 3, 7, 20, 41] {
            let t = random_matrix(&mut rng, n);
            let ours = t.eigenvalues().unwrap();
            let mut reference: Vec<f64> = dense(&t)
                .symmetric_eigen()
                .eigenvalues
                .iter()
                .copied()
                .collect();
            reference.sort_by(f64::total_cmp);
            for (a, b) in ours.iter().zip(&reference) {
                assert!((a - b).abs() < 1e-11, "n={n}: {a} vs {b}");
            }
        }
    }

    #[test]
    fn sturm_count_brackets_spectrum() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let t = random_matrix(&mut rng, 15);
        let ev = t.eigenvalues().unwrap();
        for (k, w) in ev.windows(2).enumerate() {
            let mid = 0.5 * (w[0] + w[1]);
            assert_eq!(t.count_below(mid), k + 1);
        }
    }

    #[test]
    fn lowest_pair_has_small_residual() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for n in [2, 5, 30, 101] {
            let t = random_matrix(&mut rng, n);
            let (lambda, v) = t.lowest_eigenpair(None).unwrap();
            let ev = t.eigenvalues().unwrap();
            assert!((lambda - ev[0]).abs() < 1e-11);
            assert!(t.residual(lambda, &v) < 1e-11);
        }
    }

    #[test]
    fn diagonal_matrix_spectrum() {
        let t = SymTridiagonal::new(vec![3.0, -1.0, 2.0], vec![0.0, 0.0]).unwrap();
        assert_eq!(t.eigenvalues().unwrap(), vec![-1.0, 2.0, 3.0]);
    }

    #[test]
    fn shape_is_checked() {
        assert!(SymTridiagonal::new(vec![1.0, 2.0], vec![]).is_err());
        assert!(SymTridiagonal::new(vec![], vec![]).is_err());
    }
}
