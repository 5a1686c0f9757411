//! Periodic cycles of `x_{i+1} + a x_{i-1} = p(x_i)` by parameter
//! continuation from `p(x) = x^d, a = 0`.
//!
//! The orbit system in the `x`-coordinates covers Hénon maps
//! (`y_i = x_{i-1}`) and, with `a = 0`, one-variable polynomials. The start
//! cycles of `x -> x^d` are known in closed form; each one is tracked along
//! `tau(s) = s + i*beta*s*(1-s)`, a complex detour that generically avoids the
//! finitely many parameters where cycles collide. Rotations of a start cycle
//! track to rotations of the same target cycle, so one representative per
//! start orbit suffices.

use crate::poly::Polynomial;
use crate::scalar::{c64, C64};
use nalgebra::{DMatrix, DVector};
use num_traits::Zero;
use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ContinuationConfig {
    /// Imaginary detour amplitude of the parameter path.
    pub beta: f64,
    pub initial_step: f64,
    pub max_step: f64,
    pub min_step: f64,
    /// Newton tolerance used by the corrector and the final polish.
    pub polish_tol: f64,
}

impl Default for ContinuationConfig {
    fn default() -> Self {
        Self { beta: 0.618_033_988_749_895, initial_step: 0.01, max_step: 0.05, min_step: 1e-13, polish_tol: 1e-13 }
    }
}

/// Target of the continuation: `p` monic, coupling `a` (zero for 1-D).
#[derive(Clone, Debug)]
pub struct OrbitSystem {
    p: Polynomial<f64>,
    a: C64,
    d: usize,
}

#[derive(Clone, Debug)]
pub struct TrackedCycle {
    /// `x`-coordinates of the cycle.
    pub xs: Vec<C64>,
    /// Max modulus of the orbit equations after polishing.
    pub residual: f64,
    /// The path reached `s = 1` without falling below the minimum step.
    pub clean_path: bool,
}

impl OrbitSystem {
    pub fn new(p: Polynomial<f64>, a: C64) -> Self {
        let d = p.degree();
        Self { p, a, d }
    }

    fn p_tau(&self, x: C64, tau: C64) -> (C64, C64) {
        // x^d + tau (p(x) - x^d)
        let (pv, dp) = self.p.eval_with_derivative(x);
        let xd1 = x.powu(self.d as u32 - 1);
        let xd = xd1 * x;
        let dxd = xd1 * self.d as f64;
        (xd + tau * (pv - xd), dxd + tau * (dp - dxd))
    }

    fn residual(&self, xs: &[C64], tau: C64) -> DVector<C64> {
        let n = xs.len();
        let a = self.a * tau;
        DVector::from_iterator(
            n,
            (0..n).map(|i| {
                let (pv, _) = self.p_tau(xs[i], tau);
                xs[(i + 1) % n] + a * xs[(i + n - 1) % n] - pv
            }),
        )
    }

    fn jacobian(&self, xs: &[C64], tau: C64) -> DMatrix<C64> {
        let n = xs.len();
        let a = self.a * tau;
        let mut j = DMatrix::from_element(n, n, C64::zero());
        for i in 0..n {
            let (_, dp) = self.p_tau(xs[i], tau);
            j[(i, (i + 1) % n)] += c64(1.0, 0.0);
            j[(i, (i + n - 1) % n)] += a;
            j[(i, i)] -= dp;
        }
        j
    }

    fn d_tau(&self, xs: &[C64]) -> DVector<C64> {
        let n = xs.len();
        DVector::from_iterator(
            n,
            (0..n).map(|i| {
                let x = xs[i];
                let xd = x.powu(self.d as u32);
                self.a * xs[(i + n - 1) % n] - (self.p.eval(x) - xd)
            }),
        )
    }

    fn tangent(&self, xs: &[C64], s: f64, beta: f64) -> Option<DVector<C64>> {
        let tau = tau_at(s, beta);
        let dtau = c64(1.0, beta * (1.0 - 2.0 * s));
        let rhs = -self.d_tau(xs) * dtau;
        self.jacobian(xs, tau).lu().solve(&rhs)
    }

    fn newton(&self, xs: &mut Vec<C64>, tau: C64, tol: f64, max_iter: usize) -> Option<(usize, f64)> {
        let mut first = None;
        for it in 0..max_iter {
            let r = self.residual(xs, tau);
            let dx = self.jacobian(xs, tau).lu().solve(&(-r))?;
            let scale = 1.0 + xs.iter().fold(0.0f64, |m, x| m.max(x.norm()));
            let step = dx.iter().fold(0.0f64, |m, v| m.max(v.norm())) / scale;
            if !step.is_finite() {
                return None;
            }
            for (x, v) in xs.iter_mut().zip(dx.iter()) {
                *x += v;
            }
            first.get_or_insert(step);
            if step <= tol {
                return Some((it + 1, first.unwrap()));
            }
        }
        None
    }

    fn max_residual(&self, xs: &[C64]) -> f64 {
        self.residual(xs, c64(1.0, 0.0)).iter().fold(0.0f64, |m, v| m.max(v.norm()))
    }

    /// Track one start cycle to the target system.
    pub fn track(&self, start: &[C64], cfg: &ContinuationConfig) -> TrackedCycle {
        let mut xs = start.to_vec();
        let mut s = 0.0f64;
        let mut h = cfg.initial_step;
        let mut clean = true;
        let mut successes = 0usize;
        while s < 1.0 {
            if h < cfg.min_step {
                clean = false;
                break;
            }
            let step = h.min(1.0 - s);
            let Some(k1) = self.tangent(&xs, s, cfg.beta) else {
                h *= 0.5;
                continue;
            };
            let mid: Vec<C64> = xs.iter().zip(k1.iter()).map(|(x, v)| x + v * step).collect();
            let Some(k2) = self.tangent(&mid, s + step, cfg.beta) else {
                h *= 0.5;
                continue;
            };
            let mut pred: Vec<C64> =
                xs.iter().zip(k1.iter().zip(k2.iter())).map(|(x, (a, b))| x + (a + b) * (0.5 * step)).collect();
            let tau = tau_at(s + step, cfg.beta);
            match self.newton(&mut pred, tau, 1e-11, 4) {
                Some((iters, first)) if first < 1e-3 && iters <= 3 => {
                    xs = pred;
                    s += step;
                    successes += 1;
                    if successes >= 3 {
                        h = (h * 2.0).min(cfg.max_step);
                        successes = 0;
                    }
                }
                _ => {
                    h *= 0.5;
                    successes = 0;
                }
            }
        }
        // final polish at tau = 1
        let one = c64(1.0, 0.0);
        let mut polished = xs.clone();
        if self.newton(&mut polished, one, cfg.polish_tol, 60).is_some() {
            xs = polished;
        } else {
            // singular endpoint: damped iterations, keep the best iterate
            let mut best = xs.clone();
            let mut best_r = self.max_residual(&best);
            let mut cur = xs.clone();
            for _ in 0..200 {
                let r = self.residual(&cur, one);
                let Some(dx) = self.jacobian(&cur, one).lu().solve(&(-r)) else { break };
                for (x, v) in cur.iter_mut().zip(dx.iter()) {
                    *x += v;
                }
                let rr = self.max_residual(&cur);
                if rr < best_r {
                    best_r = rr;
                    best = cur.clone();
                }
                if !rr.is_finite() {
                    break;
                }
            }
            xs = best;
        }
        let residual = self.max_residual(&xs);
        TrackedCycle { xs, residual, clean_path: clean }
    }

    /// Refine a cycle at the target by Newton (used for cached or seeded
    /// cycles).
    pub fn polish(&self, xs: &mut Vec<C64>, tol: f64) -> bool {
        self.newton(xs, c64(1.0, 0.0), tol, 60).is_some()
    }

    /// All cycles of exact period `n`, one representative per start orbit.
    pub fn cycles_of_period(&self, n: usize, cfg: &ContinuationConfig) -> Vec<TrackedCycle> {
        start_cycles(self.d, n).iter().map(|st| self.track(st, cfg)).collect()
    }
}

fn tau_at(s: f64, beta: f64) -> C64 {
    c64(s, beta * s * (1.0 - s))
}

/// Start cycles of `x -> x^d` with exact period `n`: one representative of
/// each orbit of `k -> d*k mod (d^n - 1)`, plus the fixed point 0 for `n = 1`.
pub fn start_cycles(d: usize, n: usize) -> Vec<Vec<C64>> {
    let modulus = (d as u128).pow(n as u32) - 1;
    let mut out = Vec::new();
    if n == 1 {
        out.push(vec![c64(0.0, 0.0)]);
    }
    let mut seen = vec![false; modulus as usize];
    for k in 0..modulus {
        if seen[k as usize] {
            continue;
        }
        let mut orbit = vec![k];
        let mut j = (k * d as u128) % modulus;
        while j != k {
            orbit.push(j);
            j = (j * d as u128) % modulus;
        }
        for &o in &orbit {
            seen[o as usize] = true;
        }
        if orbit.len() != n {
            continue;
        }
        let xs = orbit
            .iter()
            .map(|&o| {
                let th = std::f64::consts::TAU * (o as f64) / (modulus as f64);
                c64(th.cos(), th.sin())
            })
            .collect();
        out.push(xs);
    }
    out
}

/// Necklace count of exact-period-`n` cycles of a degree-`d` map.
pub fn exact_period_cycle_count(d: usize, n: usize) -> usize {
    let mut points = 0i64;
    for m in 1..=n {
        if n % m == 0 {
            points += mobius(n / m) * (d as i64).pow(m as u32);
        }
    }
    (points / n as i64) as usize
}

fn mobius(mut n: usize) -> i64 {
    let mut result = 1;
    let mut p = 2;
    while p * p <= n {
        if n % p == 0 {
            n /= p;
            if n % p == 0 {
                return 0;
            }
            result = -result;
        }
        p += 1;
    }
    if n > 1 {
        result = -result;
    }
    result
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn start_cycle_counts_match_necklaces() {
        for n in 1..=8 {
            assert_eq!(start_cycles(2, n).len(), exact_period_cycle_count(2, n), "n={n}");
        }
        assert_eq!(start_cycles(3, 2).len(), exact_period_cycle_count(3, 2));
    }

    #[test]
    fn chebyshev_fixed_points() {
        let sys = OrbitSystem::new(Polynomial::from_real(&[-2.0, 0.0, 1.0]), c64(0.0, 0.0));
        let mut xs: Vec<f64> = sys
            .cycles_of_period(1, &ContinuationConfig::default())
            .iter()
            .map(|c| c.xs[0].re)
            .collect();
        xs.sort_by(|a, b| a.partial_cmp(b).unwrap());
        assert!((xs[0] + 1.0).abs() < 1e-12 && (xs[1] - 2.0).abs() < 1e-12, "{xs:?}");
    }
}
