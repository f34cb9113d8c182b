//! Dense univariate polynomials with `f64` coefficients.

use serde::Serialize;

/// Polynomial `c[0] + c[1] t + c[2] t^2 + ...`.
#[derive(Debug, Clone, PartialEq, Default, Serialize)]
pub struct Poly {
    coeffs: Vec<f64>,
}

impl Poly {
    pub fn new(coeffs: Vec<f64>) -> Self {
        Self { coeffs }
    }

    pub fn zero() -> Self {
        Self { coeffs: vec![] }
    }

    pub fn constant(c: f64) -> Self {
        Self { coeffs: vec![c] }
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    /// Horner evaluation.
    pub fn eval(&self, t: f64) -> f64 {
        self.coeffs.iter().rev().fold(0.0, |acc, &c| acc * t + c)
    }

    /// k-th derivative evaluated at `t`.
    pub fn eval_deriv(&self, t: f64, k: usize) -> f64 {
        let mut acc = 0.0;
        for (i, &c) in self.coeffs.iter().enumerate().skip(k).rev() {
            let falling: f64 = (0..k).map(|j| (i - j) as f64).product();
            acc = acc * t + c * falling;
        }
        acc
    }

    pub fn derivative(&self) -> Poly {
        Poly::new(
            self.coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(i, &c)| c * i as f64)
                .collect(),
        )
    }

    /// Re-expands `p(t)` as a polynomial in `h` where `t = origin + scale * h`.
    pub fn recentered(&self, origin: f64, scale: f64) -> Poly {
        let n = self.coeffs.len();
        // Taylor coefficients about `origin`: p^(k)(origin) / k!
        let mut out = Vec::with_capacity(n);
        let mut factorial = 1.0;
        let mut scale_pow = 1.0;
        for k in 0..n {
            if k > 0 {
                factorial *= k as f64;
                scale_pow *= scale;
            }
            out.push(self.eval_deriv(origin, k) / factorial * scale_pow);
        }
        Poly::new(out)
    }

    pub fn scaled(&self, factor: f64) -> Poly {
        Poly::new(self.coeffs.iter().map(|c| c * factor).collect())
    }

    pub fn add(&self, other: &Poly) -> Poly {
        let n = self.coeffs.len().max(other.coeffs.len());
        Poly::new(
            (0..n)
                .map(|i| {
                    self.coeffs.get(i).copied().unwrap_or(0.0)
                        + other.coeffs.get(i).copied().unwrap_or(0.0)
                })
                .collect(),
        )
    }

    pub fn sub(&self, other: &Poly) -> Poly {
        self.add(&other.scaled(-1.0))
    }

    pub fn mul(&self, other: &Poly) -> Poly {
        if self.coeffs.is_empty() || other.coeffs.is_empty() {
            return Poly::zero();
        }
        let mut out = vec![0.0; self.coeffs.len() + other.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            for (j, b) in other.coeffs.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        Poly::new(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn derivatives_of_cubic() {
        // 1 + 2t - t^2 + t^3/3
        let p = Poly::new(vec![1.0, 2.0, -1.0, 1.0 / 3.0]);
        assert_eq!(p.eval(0.0), 1.0);
        assert!((p.eval_deriv(2.0, 1) - (2.0 - 4.0 + 4.0)).abs() < 1e-14);
        assert!((p.eval_deriv(2.0, 2) - (-2.0 + 4.0)).abs() < 1e-14);
        assert!((p.eval_deriv(2.0, 3) - 2.0).abs() < 1e-14);
        assert_eq!(p.eval_deriv(2.0, 4), 0.0);
        assert!((p.derivative().eval(1.5) - p.eval_deriv(1.5, 1)).abs() < 1e-14);
    }

    #[test]
    fn recentering_preserves_values() {
        let p = Poly::new(vec![0.5, -1.0, 0.25, 2.0, -0.75]);
        let q = p.recentered(1.3, 0.4);
        for h in [-1.0, 0.0, 0.3, 2.0] {
            assert!((q.eval(h) - p.eval(1.3 + 0.4 * h)).abs() < 1e-12);
        }
    }

    #[test]
    fn product() {
        let p = Poly::new(vec![1.0, 1.0]);
        let q = p.mul(&p).mul(&p);
        assert_eq!(q.coeffs(), &[1.0, 3.0, 3.0, 1.0]);
    }
}
