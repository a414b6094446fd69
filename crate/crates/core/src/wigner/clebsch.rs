//! Clebsch-Gordan coefficients `<j1 m1; j2 m2 | J M>` (Condon-Shortley phase)
//! from the Racah single-sum formula, evaluated with log-factorials.

use crate::error::{domain, Result};
use crate::spin::ln_factorials;

/// Half-integer quantum numbers held as twice their value.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Doubled {
    pub j1: i64,
    pub m1: i64,
    pub j2: i64,
    pub m2: i64,
    pub j: i64,
    pub m: i64,
}

fn doubled(x: f64, name: &str) -> Result<i64> {
    let twice = 2.0 * x;
    if !twice.is_finite() || twice != twice.round() {
        return Err(domain(format!("{name} = {x} is not a half-integer")));
    }
    Ok(twice as i64)
}

fn check_pair(tj: i64, tm: i64, name: &str) -> Result<()> {
    if tj < 0 {
        return Err(domain(format!("{name} must be non-negative")));
    }
    if tm.abs() > tj || (tj - tm) % 2 != 0 {
        return Err(domain(format!(
            "projection {} invalid for {name} = {}",
            tm as f64 / 2.0,
            tj as f64 / 2.0
        )));
    }
    Ok(())
}

/// `<j1 m1; j2 m2 | j m>`. Selection-rule violations give 0; malformed
/// quantum numbers give a domain error.
pub fn clebsch_gordan(j1: f64, m1: f64, j2: f64, m2: f64, j: f64, m: f64) -> Result<f64> {
    let q = Doubled {
        j1: doubled(j1, "j1")?,
        m1: doubled(m1, "m1")?,
        j2: doubled(j2, "j2")?,
        m2: doubled(m2, "m2")?,
        j: doubled(j, "J")?,
        m: doubled(m, "M")?,
    };
    check_pair(q.j1, q.m1, "j1")?;
    check_pair(q.j2, q.m2, "j2")?;
    check_pair(q.j, q.m, "J")?;
    let table = LnFactorial::new(((q.j1 + q.j2 + q.j) / 2 + 2) as usize);
    Ok(table.clebsch_gordan(q))
}

pub(crate) struct LnFactorial(Vec<f64>);

impl LnFactorial {
    pub(crate) fn new(max: usize) -> Self {
        Self(ln_factorials(max))
    }

    fn at(&self, k: i64) -> f64 {
        self.0[k as usize]
    }

    /// Quantum numbers must already be well-formed.
    pub(crate) fn clebsch_gordan(&self, q: Doubled) -> f64 {
        if q.m1 + q.m2 != q.m {
            return 0.0;
        }
        if q.j < (q.j1 - q.j2).abs() || q.j > q.j1 + q.j2 || (q.j1 + q.j2 + q.j) % 2 != 0 {
            return 0.0;
        }
        // Integer combinations appearing in the Racah formula.
        let a = (q.j1 + q.j2 - q.j) / 2;
        let b = (q.j1 - q.m1) / 2;
        let c = (q.j2 + q.m2) / 2;
        let d = (q.j - q.j2 + q.m1) / 2;
        let e = (q.j - q.j1 - q.m2) / 2;
        let prefactor = 0.5
            * (((q.j + 1) as f64).ln()
                + self.at((q.j + q.j1 - q.j2) / 2)
                + self.at((q.j - q.j1 + q.j2) / 2)
                + self.at(a)
                - self.at((q.j1 + q.j2 + q.j) / 2 + 1)
                + self.at((q.j + q.m) / 2)
                + self.at((q.j - q.m) / 2)
                + self.at((q.j1 - q.m1) / 2)
                + self.at((q.j1 + q.m1) / 2)
                + self.at((q.j2 - q.m2) / 2)
                + self.at((q.j2 + q.m2) / 2));
        let k_min = 0.max(-d).max(-e);
        let k_max = a.min(b).min(c);
        let mut sum = NeumaierSum::default();
        for k in k_min..=k_max {
            let ln_den = self.at(k)
                + self.at(a - k)
                + self.at(b - k)
                + self.at(c - k)
                + self.at(d + k)
                + self.at(e + k);
            let term = (prefactor - ln_den).exp();
            sum.add(if k % 2 == 0 { term } else { -term });
        }
        sum.total()
    }
}

#[derive(Default)]
struct NeumaierSum {
    sum: f64,
    compensation: f64,
}

impl NeumaierSum {
    fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.compensation += (self.sum - t) + x;
        } else {
            self.compensation += (x - t) + self.sum;
        }
        self.sum = t;
    }

    fn total(&self) -> f64 {
        self.sum + self.compensation
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn scalar_coupling_is_identity() {
        for (j, m) in [(0.0, 0.0), (0.5, -0.5), (3.0, 2.0), (4.5, 1.5)] {
            assert!((clebsch_gordan(j, m, 0.0, 0.0, j, m).unwrap() - 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn singlet_and_quintet_values() {
        let singlet = clebsch_gordan(0.5, 0.5, 0.5, -0.5, 0.0, 0.0).unwrap();
        assert!((singlet - 0.5f64.sqrt()).abs() < 1e-15);
        let swapped = clebsch_gordan(0.5, -0.5, 0.5, 0.5, 0.0, 0.0).unwrap();
        assert!((swapped + 0.5f64.sqrt()).abs() < 1e-15);
        let quintet = clebsch_gordan(1.0, 1.0, 1.0, -1.0, 2.0, 0.0).unwrap();
        assert!((quintet - (1.0f64 / 6.0).sqrt()).abs() < 1e-15);
    }

    #[test]
    fn selection_rules_give_zero() {
        assert_eq!(clebsch_gordan(1.0, 1.0, 1.0, 0.0, 2.0, 0.0).unwrap(), 0.0);
        assert_eq!(clebsch_gordan(1.0, 0.0, 1.0, 0.0, 3.0, 0.0).unwrap(), 0.0);
        // <1 0; 1 0 | 1 0> vanishes by parity.
        assert!(clebsch_gordan(1.0, 0.0, 1.0, 0.0, 1.0, 0.0).unwrap().abs() < 1e-15);
    }

    #[test]
    fn malformed_numbers_are_errors() {
        assert!(clebsch_gordan(1.0, 2.0, 1.0, 0.0, 1.0, 2.0).is_err());
        assert!(clebsch_gordan(0.3, 0.3, 1.0, 0.0, 1.0, 0.0).is_err());
        assert!(clebsch_gordan(1.0, 0.5, 1.0, 0.0, 1.0, 0.5).is_err());
    }
}
