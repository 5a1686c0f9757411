//! Hénon-type maps `f(x, y) = (p(x) - a*y, x)` and their differentials.

use crate::error::QxError;
use crate::poly::Polynomial;
use crate::scalar::{Cx, Real};
use crate::series::{Series, VecSeries};
use num_complex::Complex;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound(serialize = "T: Serialize", deserialize = "T: Deserialize<'de>"))]
pub struct ComplexPoint<T = f64> {
    pub x: Cx<T>,
    pub y: Cx<T>,
}

impl<T: Real> ComplexPoint<T> {
    pub fn new(x: Cx<T>, y: Cx<T>) -> Self {
        Self { x, y }
    }

    pub fn real(x: f64, y: f64) -> Self {
        Self::new(Complex::new(T::lit(x), T::zero()), Complex::new(T::lit(y), T::zero()))
    }

    pub fn is_finite(&self) -> bool {
        self.x.re.is_finite() && self.x.im.is_finite() && self.y.re.is_finite() && self.y.im.is_finite()
    }

    pub fn sup_norm(&self) -> T {
        self.x.norm().max(self.y.norm())
    }

    pub fn dist_sup(&self, other: &Self) -> T {
        (self.x - other.x).norm().max((self.y - other.y).norm())
    }

    pub fn dist(&self, other: &Self) -> T {
        ((self.x - other.x).norm_sqr() + (self.y - other.y).norm_sqr()).sqrt()
    }

    pub fn as_array(&self) -> [Cx<T>; 2] {
        [self.x, self.y]
    }

    pub fn from_array(v: [Cx<T>; 2]) -> Self {
        Self::new(v[0], v[1])
    }

    pub fn conj(&self) -> Self {
        Self::new(self.x.conj(), self.y.conj())
    }
}

/// 2x2 complex matrix, row major.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Mat2<T = f64> {
    pub m: [[Cx<T>; 2]; 2],
}

impl<T: Real> Mat2<T> {
    pub fn identity() -> Self {
        Self { m: [[Cx::one(), Cx::zero()], [Cx::zero(), Cx::one()]] }
    }

    pub fn det(&self) -> Cx<T> {
        self.m[0][0] * self.m[1][1] - self.m[0][1] * self.m[1][0]
    }

    pub fn trace(&self) -> Cx<T> {
        self.m[0][0] + self.m[1][1]
    }

    pub fn mul(&self, o: &Self) -> Self {
        let a = &self.m;
        let b = &o.m;
        Self {
            m: [
                [a[0][0] * b[0][0] + a[0][1] * b[1][0], a[0][0] * b[0][1] + a[0][1] * b[1][1]],
                [a[1][0] * b[0][0] + a[1][1] * b[1][0], a[1][0] * b[0][1] + a[1][1] * b[1][1]],
            ],
        }
    }

    pub fn apply(&self, v: [Cx<T>; 2]) -> [Cx<T>; 2] {
        [
            self.m[0][0] * v[0] + self.m[0][1] * v[1],
            self.m[1][0] * v[0] + self.m[1][1] * v[1],
        ]
    }

    /// Eigenvalues ordered by decreasing modulus. The smaller one is
    /// recovered as `det / larger` so it keeps full relative accuracy.
    pub fn eigenvalues_with_det(&self, det: Cx<T>) -> (Cx<T>, Cx<T>) {
        let tr = self.trace();
        let half = T::lit(0.5);
        let disc = (tr * tr * half * half - det).sqrt();
        let l1 = tr * half + disc;
        let l2 = tr * half - disc;
        let big = if l1.norm() >= l2.norm() { l1 } else { l2 };
        if big.is_zero() {
            return (Cx::zero(), Cx::zero());
        }
        (big, det / big)
    }

    /// Unit eigenvector for eigenvalue `lambda`.
    pub fn eigenvector(&self, lambda: Cx<T>) -> [Cx<T>; 2] {
        let a = &self.m;
        let v1 = [a[0][1], lambda - a[0][0]];
        let v2 = [lambda - a[1][1], a[1][0]];
        let n1 = (v1[0].norm_sqr() + v1[1].norm_sqr()).sqrt();
        let n2 = (v2[0].norm_sqr() + v2[1].norm_sqr()).sqrt();
        let (v, n) = if n1 >= n2 { (v1, n1) } else { (v2, n2) };
        if n == T::zero() {
            return [Cx::one(), Cx::zero()];
        }
        [v[0] / n, v[1] / n]
    }

    /// Solve `self * v = b`. Entries are rescaled first so that huge
    /// matrices (high powers of a multiplier) do not overflow the determinant.
    pub fn solve(&self, b: [Cx<T>; 2]) -> Option<[Cx<T>; 2]> {
        let s = self.m.iter().flatten().fold(T::zero(), |m, v| m.max(v.norm()));
        if s == T::zero() || !s.is_finite() {
            return None;
        }
        let inv = s.recip();
        let a: Vec<Cx<T>> = self.m.iter().flatten().map(|v| *v * inv).collect();
        let det = a[0] * a[3] - a[1] * a[2];
        if det.is_zero() {
            return None;
        }
        let b = [b[0] * inv, b[1] * inv];
        Some([(a[3] * b[0] - a[1] * b[1]) / det, (a[0] * b[1] - a[2] * b[0]) / det])
    }
}

/// Polynomial diffeomorphism `(x, y) -> (p(x) - a*y, x)` with `p` monic.
#[derive(Clone, Debug, PartialEq)]
pub struct HenonMap<T = f64> {
    p: Polynomial<T>,
    a: Cx<T>,
    real: bool,
}

impl<T: Real> HenonMap<T> {
    pub fn new(p_coeffs: Vec<Cx<T>>, a: Cx<T>) -> Result<Self, QxError> {
        let p = Polynomial::new(p_coeffs);
        if p.degree() < 2 {
            return Err(QxError::InvalidMap(format!("degree {} < 2", p.degree())));
        }
        if !p.is_monic() {
            return Err(QxError::InvalidMap("polynomial must be monic".into()));
        }
        if a.is_zero() {
            return Err(QxError::InvalidMap("Jacobian constant a must be nonzero".into()));
        }
        let real = p.is_real() && a.im == T::zero();
        Ok(Self { p, a, real })
    }

    /// `p(x) = x^2 + c`.
    pub fn quadratic(c: f64, a: f64) -> Self {
        Self::new(
            vec![Cx::new(T::lit(c), T::zero()), Cx::zero(), Cx::one()],
            Cx::new(T::lit(a), T::zero()),
        )
        .expect("quadratic Henon map is valid for a != 0")
    }

    pub fn p(&self) -> &Polynomial<T> {
        &self.p
    }

    pub fn a(&self) -> Cx<T> {
        self.a
    }

    pub fn degree(&self) -> usize {
        self.p.degree()
    }

    pub fn is_real(&self) -> bool {
        self.real
    }

    pub fn evaluate(&self, q: &ComplexPoint<T>) -> ComplexPoint<T> {
        ComplexPoint::new(self.p.eval(q.x) - self.a * q.y, q.x)
    }

    pub fn inverse(&self, q: &ComplexPoint<T>) -> ComplexPoint<T> {
        ComplexPoint::new(q.y, (self.p.eval(q.y) - q.x) / self.a)
    }

    pub fn iterate(&self, q: &ComplexPoint<T>, n: usize) -> ComplexPoint<T> {
        let mut z = *q;
        for _ in 0..n {
            z = self.evaluate(&z);
        }
        z
    }

    pub fn jacobian(&self, q: &ComplexPoint<T>) -> Mat2<T> {
        let (_, dp) = self.p.eval_with_derivative(q.x);
        Mat2 { m: [[dp, -self.a], [Cx::one(), Cx::zero()]] }
    }

    pub fn inverse_jacobian(&self, q: &ComplexPoint<T>) -> Mat2<T> {
        let (_, dp) = self.p.eval_with_derivative(q.y);
        Mat2 { m: [[Cx::zero(), Cx::one()], [-self.a.inv(), dp / self.a]] }
    }

    /// Closed-form escape radius: for `|u| >= max(R, |v|)`,
    /// `|p(u) - a v| >= |u|^{d-1} (|u| - c - |a|) >= 2|u|`,
    /// where `c` is the modulus sum of the non-leading coefficients.
    pub fn escape_radius(&self) -> T {
        let c = self.p.lower_modulus_sum();
        (c + self.a.norm() + T::lit(2.0)).max(T::one())
    }

    /// Escape radius for the inverse map, whose growing coordinate is `y`
    /// with `|y'| = |p(y) - x| / |a|`.
    pub fn inverse_escape_radius(&self) -> T {
        let c = self.p.lower_modulus_sum();
        (c + T::one() + T::lit(2.0) * self.a.norm()).max(T::one()).max(self.escape_radius())
    }

    /// The doubling test `|p(u) - a v| >= 2|u|` for a single point of the
    /// half-cone `|u| >= max(R, |v|)`.
    pub fn doubling_holds(&self, u: Cx<T>, v: Cx<T>) -> bool {
        (self.p.eval(u) - self.a * v).norm() >= T::lit(2.0) * u.norm()
    }

    pub fn filtration(&self) -> EscapeFiltration<T> {
        EscapeFiltration { radius: self.escape_radius().max(self.inverse_escape_radius()) }
    }

    pub fn conj_symmetric(&self) -> bool {
        self.real
    }
}

/// Regions `V`, `V+` and `V-` of the standard filtration. With the map
/// convention here the forward-growing coordinate is `x`, so
/// `V+ = {|x| >= max(R, |y|)}` and `V- = {|y| >= max(R, |x|)}`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EscapeFiltration<T = f64> {
    pub radius: T,
}

impl<T: Real> EscapeFiltration<T> {
    pub fn in_v(&self, q: &ComplexPoint<T>) -> bool {
        q.x.norm() <= self.radius && q.y.norm() <= self.radius
    }

    pub fn in_v_plus(&self, q: &ComplexPoint<T>) -> bool {
        let ax = q.x.norm();
        ax >= self.radius && ax >= q.y.norm()
    }

    pub fn in_v_minus(&self, q: &ComplexPoint<T>) -> bool {
        let ay = q.y.norm();
        ay >= self.radius && ay >= q.x.norm()
    }
}

/// A holomorphic self-map of C^2 that can be composed with power series.
/// Used so the unstable (forward) and stable (inverse) series solvers share
/// one implementation.
pub trait PlaneMap<T: Real> {
    fn apply(&self, q: &ComplexPoint<T>) -> ComplexPoint<T>;
    fn differential(&self, q: &ComplexPoint<T>) -> Mat2<T>;
    fn apply_series(&self, s: &VecSeries<T>, order: usize) -> VecSeries<T>;
}

/// Forward direction of a Hénon map.
pub struct Forward<'a, T: Real>(pub &'a HenonMap<T>);
/// Inverse direction of a Hénon map.
pub struct Backward<'a, T: Real>(pub &'a HenonMap<T>);

impl<'a, T: Real> PlaneMap<T> for Forward<'a, T> {
    fn apply(&self, q: &ComplexPoint<T>) -> ComplexPoint<T> {
        self.0.evaluate(q)
    }
    fn differential(&self, q: &ComplexPoint<T>) -> Mat2<T> {
        self.0.jacobian(q)
    }
    fn apply_series(&self, s: &VecSeries<T>, order: usize) -> VecSeries<T> {
        let px = s.x.poly_compose(self.0.p.coeffs(), order);
        let x = px.add(&s.y.scale(-self.0.a));
        VecSeries { x: trunc(x, order), y: trunc(s.x.clone(), order) }
    }
}

impl<'a, T: Real> PlaneMap<T> for Backward<'a, T> {
    fn apply(&self, q: &ComplexPoint<T>) -> ComplexPoint<T> {
        self.0.inverse(q)
    }
    fn differential(&self, q: &ComplexPoint<T>) -> Mat2<T> {
        self.0.inverse_jacobian(q)
    }
    fn apply_series(&self, s: &VecSeries<T>, order: usize) -> VecSeries<T> {
        let py = s.y.poly_compose(self.0.p.coeffs(), order);
        let ainv = self.0.a.inv();
        let y = py.add(&s.x.scale(-Cx::one())).scale(ainv);
        VecSeries { x: trunc(s.y.clone(), order), y: trunc(y, order) }
    }
}

fn trunc<T: Real>(mut s: Series<T>, order: usize) -> Series<T> {
    s.coeffs.resize(order + 1, Cx::zero());
    s
}
