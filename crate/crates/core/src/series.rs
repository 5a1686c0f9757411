//! Truncated complex power series and two-component (C^2-valued) series.

use crate::scalar::{Cx, Real};
use num_traits::{One, Zero};

/// Truncated power series `sum_{k<=order} c_k z^k`.
#[derive(Clone, Debug, PartialEq)]
pub struct Series<T = f64> {
    pub coeffs: Vec<Cx<T>>,
}

impl<T: Real> Series<T> {
    pub fn zeros(order: usize) -> Self {
        Self { coeffs: vec![Cx::zero(); order + 1] }
    }

    pub fn from_coeffs(coeffs: Vec<Cx<T>>) -> Self {
        Self { coeffs }
    }

    pub fn constant(c: Cx<T>, order: usize) -> Self {
        let mut s = Self::zeros(order);
        s.coeffs[0] = c;
        s
    }

    pub fn order(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn eval(&self, z: Cx<T>) -> Cx<T> {
        self.coeffs.iter().rev().fold(Cx::zero(), |acc, &c| acc * z + c)
    }

    pub fn eval_derivative(&self, z: Cx<T>) -> Cx<T> {
        let mut acc = Cx::zero();
        for (k, &c) in self.coeffs.iter().enumerate().skip(1).rev() {
            acc = acc * z + c * T::lit(k as f64);
        }
        acc
    }

    pub fn add(&self, other: &Self) -> Self {
        let n = self.coeffs.len().max(other.coeffs.len());
        let mut out = Vec::with_capacity(n);
        for k in 0..n {
            let a = self.coeffs.get(k).copied().unwrap_or_else(Cx::zero);
            let b = other.coeffs.get(k).copied().unwrap_or_else(Cx::zero);
            out.push(a + b);
        }
        Self { coeffs: out }
    }

    pub fn scale(&self, s: Cx<T>) -> Self {
        Self { coeffs: self.coeffs.iter().map(|&c| c * s).collect() }
    }

    /// Product truncated at `order`.
    pub fn mul_trunc(&self, other: &Self, order: usize) -> Self {
        let mut out = vec![Cx::zero(); order + 1];
        for (i, &a) in self.coeffs.iter().enumerate().take(order + 1) {
            if a.is_zero() {
                continue;
            }
            for (j, &b) in other.coeffs.iter().enumerate().take(order + 1 - i) {
                out[i + j] = out[i + j] + a * b;
            }
        }
        Self { coeffs: out }
    }

    /// Evaluate a polynomial (low-to-high coefficients) on this series.
    pub fn poly_compose(&self, poly: &[Cx<T>], order: usize) -> Self {
        let mut acc = Self::zeros(order);
        for &c in poly.iter().rev() {
            acc = acc.mul_trunc(self, order);
            acc.coeffs[0] = acc.coeffs[0] + c;
        }
        acc
    }

    /// `self ∘ inner` where `inner(0) = 0`.
    pub fn compose(&self, inner: &Self, order: usize) -> Self {
        debug_assert!(inner.coeffs.first().map_or(true, |c| c.norm() < T::lit(1e-12)));
        let mut acc = Self::zeros(order);
        for &c in self.coeffs.iter().rev() {
            acc = acc.mul_trunc(inner, order);
            acc.coeffs[0] = acc.coeffs[0] + c;
        }
        acc
    }

    /// Compositional inverse of a series with zero constant term and nonzero
    /// linear term, to the same order.
    pub fn reversion(&self) -> Option<Self> {
        let order = self.order();
        let b1 = *self.coeffs.get(1)?;
        if b1.is_zero() {
            return None;
        }
        // r = z / b1 initially; fix orders one at a time
        let mut r = Self::zeros(order);
        if order >= 1 {
            r.coeffs[1] = b1.inv();
        }
        for k in 2..=order {
            let comp = self.compose(&r, k);
            // coefficient k must vanish; linear response is b1 * r_k
            let err = comp.coeffs[k];
            r.coeffs[k] = r.coeffs[k] - err / b1;
        }
        Some(r)
    }

    /// Index of the first coefficient whose modulus exceeds `tol`.
    pub fn valuation(&self, tol: T) -> Option<usize> {
        self.coeffs.iter().position(|c| c.norm() > tol)
    }
}

/// Two-component series `zeta -> (X(zeta), Y(zeta))`.
#[derive(Clone, Debug, PartialEq)]
pub struct VecSeries<T = f64> {
    pub x: Series<T>,
    pub y: Series<T>,
}

impl<T: Real> VecSeries<T> {
    pub fn zeros(order: usize) -> Self {
        Self { x: Series::zeros(order), y: Series::zeros(order) }
    }

    pub fn order(&self) -> usize {
        self.x.order()
    }

    pub fn eval(&self, z: Cx<T>) -> [Cx<T>; 2] {
        [self.x.eval(z), self.y.eval(z)]
    }

    pub fn eval_derivative(&self, z: Cx<T>) -> [Cx<T>; 2] {
        [self.x.eval_derivative(z), self.y.eval_derivative(z)]
    }

    pub fn coeff(&self, k: usize) -> [Cx<T>; 2] {
        [self.x.coeffs[k], self.y.coeffs[k]]
    }

    pub fn set_coeff(&mut self, k: usize, v: [Cx<T>; 2]) {
        self.x.coeffs[k] = v[0];
        self.y.coeffs[k] = v[1];
    }

    /// Rescale the variable: `zeta -> s * zeta`.
    pub fn rescaled(&self, s: Cx<T>) -> Self {
        let mut out = self.clone();
        let mut sk = Cx::one();
        for k in 0..=self.order() {
            out.x.coeffs[k] = out.x.coeffs[k] * sk;
            out.y.coeffs[k] = out.y.coeffs[k] * sk;
            sk = sk * s;
        }
        out
    }
}

/// Euclidean norm of a C^2 vector.
pub fn norm2<T: Real>(v: [Cx<T>; 2]) -> T {
    (v[0].norm_sqr() + v[1].norm_sqr()).sqrt()
}
