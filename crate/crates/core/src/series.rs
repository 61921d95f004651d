//! Truncated power series in a small parameter `e`, the Taylor-mode
//! representation used for high-order derivatives of closed-form exponents.
//!
//! Exponents are expanded as `f(lambda (1 + e))`, so coefficient `m` equals
//! `f^{(m)}(lambda) lambda^m / m!`. That normalisation keeps coefficients
//! bounded where raw derivatives would overflow.

use std::ops::{Add, Mul, Neg, Sub};

use crate::special::ln_gamma;

#[derive(Debug, Clone, PartialEq)]
pub struct Series {
    pub c: Vec<f64>,
}

impl Series {
    pub fn zeros(n: usize) -> Self {
        Self { c: vec![0.0; n] }
    }

    pub fn constant(v: f64, n: usize) -> Self {
        let mut s = Self::zeros(n);
        if n > 0 {
            s.c[0] = v;
        }
        s
    }

    /// `a + b e`
    pub fn linear(a: f64, b: f64, n: usize) -> Self {
        let mut s = Self::constant(a, n);
        if n > 1 {
            s.c[1] = b;
        }
        s
    }

    pub fn len(&self) -> usize {
        self.c.len()
    }

    pub fn is_empty(&self) -> bool {
        self.c.is_empty()
    }

    pub fn scale(mut self, k: f64) -> Self {
        for v in &mut self.c {
            *v *= k;
        }
        self
    }

    /// `exp(a + b e)`, coefficients formed in log space so that huge `|b|`
    /// combined with tiny `exp(a)` neither overflows nor underflows early.
    pub fn exp_linear(a: f64, b: f64, n: usize) -> Self {
        let mut s = Self::zeros(n);
        let lb = b.abs().ln();
        for m in 0..n {
            let ln = a + m as f64 * lb - ln_gamma(m as f64 + 1.0);
            let sign = if b < 0.0 && m % 2 == 1 { -1.0 } else { 1.0 };
            s.c[m] = if m == 0 { a.exp() } else { sign * ln.exp() };
        }
        s
    }

    /// `(1 + e)^p` by the binomial recurrence.
    pub fn one_plus_e_pow(p: f64, n: usize) -> Self {
        let mut s = Self::zeros(n);
        let mut c = 1.0;
        for m in 0..n {
            s.c[m] = c;
            c *= (p - m as f64) / (m as f64 + 1.0);
        }
        s
    }

    /// Reciprocal; panics if the constant term is zero.
    pub fn recip(&self) -> Self {
        let n = self.len();
        let a0 = self.c[0];
        assert!(a0 != 0.0, "series reciprocal of zero constant term");
        let mut r = Self::zeros(n);
        r.c[0] = 1.0 / a0;
        for m in 1..n {
            let mut acc = 0.0;
            for i in 1..=m {
                acc += self.c[i] * r.c[m - i];
            }
            r.c[m] = -acc / a0;
        }
        r
    }

    pub fn div(&self, other: &Self) -> Self {
        let n = self.len();
        let b0 = other.c[0];
        assert!(b0 != 0.0, "series division by zero constant term");
        let mut q = Self::zeros(n);
        for m in 0..n {
            let mut acc = self.c[m];
            for i in 1..=m {
                acc -= other.c[i] * q.c[m - i];
            }
            q.c[m] = acc / b0;
        }
        q
    }

    /// Derivative with respect to `e`, truncated to the same length.
    fn deriv(&self) -> Self {
        let n = self.len();
        let mut d = Self::zeros(n);
        for m in 1..n {
            d.c[m - 1] = m as f64 * self.c[m];
        }
        d
    }

    pub fn exp(&self) -> Self {
        // s' = a' s
        let n = self.len();
        let mut s = Self::zeros(n);
        s.c[0] = self.c[0].exp();
        for m in 1..n {
            let mut acc = 0.0;
            for i in 1..=m {
                acc += i as f64 * self.c[i] * s.c[m - i];
            }
            s.c[m] = acc / m as f64;
        }
        s
    }

    pub fn ln(&self) -> Self {
        // l' = a' / a
        let n = self.len();
        let a0 = self.c[0];
        assert!(a0 > 0.0, "series log of nonpositive constant term");
        let q = self.deriv().div(self);
        let mut l = Self::zeros(n);
        l.c[0] = a0.ln();
        for m in 1..n {
            l.c[m] = q.c[m - 1] / m as f64;
        }
        l
    }

    /// `a^p` for a series with positive constant term.
    pub fn powf(&self, p: f64) -> Self {
        // m a0 b_m = sum_{i=1}^m (p i - (m - i)) a_i b_{m-i}
        let n = self.len();
        let a0 = self.c[0];
        assert!(a0 > 0.0, "series power of nonpositive constant term");
        let mut b = Self::zeros(n);
        b.c[0] = a0.powf(p);
        for m in 1..n {
            let mut acc = 0.0;
            for i in 1..=m {
                acc += (p * i as f64 - (m - i) as f64) * self.c[i] * b.c[m - i];
            }
            b.c[m] = acc / (m as f64 * a0);
        }
        b
    }
}

impl Add for &Series {
    type Output = Series;
    fn add(self, rhs: &Series) -> Series {
        Series {
            c: self.c.iter().zip(&rhs.c).map(|(a, b)| a + b).collect(),
        }
    }
}

impl Sub for &Series {
    type Output = Series;
    fn sub(self, rhs: &Series) -> Series {
        Series {
            c: self.c.iter().zip(&rhs.c).map(|(a, b)| a - b).collect(),
        }
    }
}

impl Neg for Series {
    type Output = Series;
    fn neg(self) -> Series {
        self.scale(-1.0)
    }
}

impl Mul for &Series {
    type Output = Series;
    fn mul(self, rhs: &Series) -> Series {
        let n = self.len().min(rhs.len());
        let mut out = Series::zeros(n);
        for m in 0..n {
            out.c[m] = (0..=m).map(|i| self.c[i] * rhs.c[m - i]).sum();
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn assert_series_eq(a: &Series, b: &Series, tol: f64) {
        for (m, (x, y)) in a.c.iter().zip(&b.c).enumerate() {
            assert!((x - y).abs() <= tol * (1.0 + y.abs()), "coef {m}: {x} vs {y}");
        }
    }

    #[test]
    fn exp_ln_roundtrip() {
        let a = Series { c: vec![1.3, -0.4, 0.25, 0.1, -0.05, 0.02, 0.0, 0.01] };
        assert_series_eq(&a.ln().exp(), &a, 1e-14);
        assert_series_eq(&a.exp().ln(), &a, 1e-14);
    }

    #[test]
    fn div_inverts_mul() {
        let a = Series { c: vec![2.0, 1.0, -0.5, 0.3, 0.0, 0.7] };
        let b = Series { c: vec![0.5, 0.2, 0.1, -0.1, 0.05, 0.0] };
        assert_series_eq(&(&a * &b).div(&b), &a, 1e-13);
        assert_series_eq(&(&a.recip() * &a), &Series::constant(1.0, 6), 1e-14);
    }

    #[test]
    fn powf_matches_binomial_and_exp_log() {
        let n = 40;
        let p = 0.37;
        let lin = Series::linear(1.0, 1.0, n);
        assert_series_eq(&lin.powf(p), &Series::one_plus_e_pow(p, n), 1e-13);
        let a = Series { c: vec![1.5, 0.3, -0.2, 0.1] };
        assert_series_eq(&a.powf(-1.7), &a.ln().scale(-1.7).exp(), 1e-13);
    }

    #[test]
    fn exp_linear_matches_exp_of_linear() {
        let n = 30;
        let generic = Series::linear(-2.0, -3.0, n).exp();
        let logspace = Series::exp_linear(-2.0, -3.0, n);
        assert_series_eq(&logspace, &generic, 1e-13);
        // no overflow where the naive recurrence would build e^{-1000} * 1000^m / m!
        let big = Series::exp_linear(-1000.0, -1000.0, 600);
        assert!(big.c.iter().all(|v| v.is_finite()));
        let expect = -(-1000.0 + 599.0 * 1000f64.ln() - ln_gamma(600.0)).exp();
        assert!(expect.abs() > 1e-60);
        assert_relative_eq!(big.c[599], expect, max_relative = 1e-12);
    }
}
