use crate::scalar::{Cx, Real};
use num_complex::Complex;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

/// Complex polynomial stored low-to-high degree.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound(serialize = "T: Serialize", deserialize = "T: Deserialize<'de>"))]
pub struct Polynomial<T = f64> {
    coeffs: Vec<Cx<T>>,
}

impl<T: Real> Polynomial<T> {
    pub fn new(mut coeffs: Vec<Cx<T>>) -> Self {
        while coeffs.len() > 1 && coeffs.last().map_or(false, |c| c.is_zero()) {
            coeffs.pop();
        }
        if coeffs.is_empty() {
            coeffs.push(Cx::zero());
        }
        Self { coeffs }
    }

    pub fn from_real(coeffs: &[f64]) -> Self {
        Self::new(coeffs.iter().map(|&c| Complex::new(T::lit(c), T::zero())).collect())
    }

    pub fn coeffs(&self) -> &[Cx<T>] {
        &self.coeffs
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn leading(&self) -> Cx<T> {
        *self.coeffs.last().unwrap()
    }

    pub fn is_monic(&self) -> bool {
        self.leading() == Cx::one()
    }

    pub fn is_real(&self) -> bool {
        self.coeffs.iter().all(|c| c.im == T::zero())
    }

    pub fn eval(&self, z: Cx<T>) -> Cx<T> {
        self.coeffs.iter().rev().fold(Cx::zero(), |acc, &c| acc * z + c)
    }

    /// Value and first derivative by Horner.
    pub fn eval_with_derivative(&self, z: Cx<T>) -> (Cx<T>, Cx<T>) {
        let mut p = Cx::zero();
        let mut dp = Cx::zero();
        for &c in self.coeffs.iter().rev() {
            dp = dp * z + p;
            p = p * z + c;
        }
        (p, dp)
    }

    pub fn derivative(&self) -> Self {
        if self.coeffs.len() <= 1 {
            return Self::new(vec![Cx::zero()]);
        }
        let coeffs = self
            .coeffs
            .iter()
            .enumerate()
            .skip(1)
            .map(|(k, &c)| c * T::lit(k as f64))
            .collect();
        Self::new(coeffs)
    }

    /// Taylor coefficients about `z0`: `p(z0 + w) = sum_k t_k w^k`.
    pub fn taylor_at(&self, z0: Cx<T>) -> Vec<Cx<T>> {
        // repeated synthetic division
        let mut work = self.coeffs.clone();
        let n = work.len();
        let mut out = Vec::with_capacity(n);
        for k in 0..n {
            let mut acc = Cx::zero();
            for j in (k..n).rev() {
                acc = acc * z0 + work[j];
                work[j] = acc;
            }
            out.push(work[k]);
        }
        out
    }

    /// Sum of moduli of all coefficients below the leading one.
    pub fn lower_modulus_sum(&self) -> T {
        self.coeffs[..self.degree()]
            .iter()
            .fold(T::zero(), |acc, c| acc + c.norm())
    }

    /// Subtract a constant (used for preimage equations `p(z) = w`).
    pub fn shifted(&self, w: Cx<T>) -> Self {
        let mut coeffs = self.coeffs.clone();
        coeffs[0] = coeffs[0] - w;
        Self::new(coeffs)
    }

    /// All roots by Aberth-Ehrlich simultaneous iteration.
    pub fn roots(&self) -> Vec<Cx<T>> {
        let n = self.degree();
        if n == 0 {
            return Vec::new();
        }
        let lead = self.leading();
        let monic: Vec<Cx<T>> = self.coeffs.iter().map(|&c| c / lead).collect();
        let monic = Polynomial { coeffs: monic };
        if n == 1 {
            return vec![-monic.coeffs[0]];
        }
        // Cauchy bound for the initial circle
        let bound = T::one()
            + monic.coeffs[..n]
                .iter()
                .fold(T::zero(), |acc, c| acc.max(c.norm()));
        let r = bound * T::lit(0.5) + T::lit(0.1);
        let mut z: Vec<Cx<T>> = (0..n)
            .map(|k| {
                let th = T::TAU() * T::lit(k as f64 + 0.25) / T::lit(n as f64) + T::lit(0.4);
                Complex::new(r * th.cos(), r * th.sin())
            })
            .collect();
        let tol = T::epsilon() * T::lit(4.0);
        for _ in 0..500 {
            let mut max_step = T::zero();
            for i in 0..n {
                let (p, dp) = monic.eval_with_derivative(z[i]);
                if p.is_zero() {
                    continue;
                }
                let ratio = p / dp;
                let mut s = Cx::zero();
                for j in 0..n {
                    if j != i {
                        let diff = z[i] - z[j];
                        if !diff.is_zero() {
                            s = s + diff.inv();
                        }
                    }
                }
                let step: Cx<T> = ratio / (Cx::<T>::one() - ratio * s);
                if step.re.is_finite() && step.im.is_finite() {
                    z[i] = z[i] - step;
                    let rel = step.norm() / (T::one() + z[i].norm());
                    max_step = max_step.max(rel);
                }
            }
            if max_step < tol {
                break;
            }
        }
        // light Newton polish
        for zi in z.iter_mut() {
            for _ in 0..3 {
                let (p, dp) = monic.eval_with_derivative(*zi);
                if dp.is_zero() {
                    break;
                }
                let step = p / dp;
                if !(step.re.is_finite() && step.im.is_finite()) {
                    break;
                }
                *zi = *zi - step;
            }
        }
        z
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::c64;

    #[test]
    fn horner_and_derivative_agree() {
        let p = Polynomial::<f64>::from_real(&[-6.0, 0.0, 1.0]);
        let (v, dv) = p.eval_with_derivative(c64(3.0, 0.0));
        assert_eq!(v, c64(3.0, 0.0));
        assert_eq!(dv, c64(6.0, 0.0));
        assert_eq!(p.derivative().eval(c64(3.0, 0.0)), dv);
    }

    #[test]
    fn taylor_shift_reproduces_values() {
        let p = Polynomial::<f64>::new(vec![c64(1.0, 2.0), c64(-3.0, 0.5), c64(0.0, 1.0), c64(1.0, 0.0)]);
        let z0 = c64(0.3, -0.7);
        let t = p.taylor_at(z0);
        let w = c64(0.11, 0.05);
        let direct = p.eval(z0 + w);
        let via = t.iter().rev().fold(c64(0.0, 0.0), |acc, &c| acc * w + c);
        assert!((direct - via).norm() < 1e-13);
    }

    #[test]
    fn roots_of_cubic() {
        // (z - 1)(z + 2)(z - i)
        let p = Polynomial::<f64>::new(vec![
            c64(0.0, 2.0),
            c64(-2.0, -1.0),
            c64(1.0, -1.0),
            c64(1.0, 0.0),
        ]);
        let mut roots = p.roots();
        roots.sort_by(|a, b| a.re.partial_cmp(&b.re).unwrap());
        let expect = [c64(-2.0, 0.0), c64(0.0, 1.0), c64(1.0, 0.0)];
        for (r, e) in roots.iter().zip(expect.iter()) {
            assert!((r - e).norm() < 1e-12, "{r} vs {e}");
        }
    }
}
