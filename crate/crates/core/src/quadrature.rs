//! Gauss–Legendre rules at arbitrary precision.

use std::collections::HashMap;
use std::sync::{Arc, LazyLock, Mutex};

use rug::Float;

use crate::error::{Error, Result};
use crate::precision::Real;

/// Nodes and weights of an `order`-point Gauss–Legendre rule on `[-1, 1]`.
#[derive(Debug)]
pub struct GaussLegendre {
    order: usize,
    nodes: Vec<Real>,
    weights: Vec<Real>,
}

type RuleCache = Mutex<HashMap<(usize, u32), Arc<GaussLegendre>>>;

static RULES: LazyLock<RuleCache> = LazyLock::new(|| Mutex::new(HashMap::new()));

impl GaussLegendre {
    /// Memoized rule for `(order, prec)`.
    pub fn new(order: usize, prec: u32) -> Result<Arc<GaussLegendre>> {
        if order == 0 {
            return Err(Error::InvalidInput(
                "quadrature order must be positive".into(),
            ));
        }
        if let Some(rule) = RULES
            .lock()
            .expect("rule cache poisoned")
            .get(&(order, prec))
        {
            return Ok(rule.clone());
        }
        let rule = Arc::new(Self::compute(order, prec)?);
        RULES
            .lock()
            .expect("rule cache poisoned")
            .insert((order, prec), rule.clone());
        Ok(rule)
    }

    fn compute(order: usize, prec: u32) -> Result<GaussLegendre> {
        let work = prec + 32;
        let tol = Real::from_float(Float::with_val(work, Float::i_exp(1, -(prec as i32) - 8)));
        let half = order.div_ceil(2);
        let mut pos_nodes = Vec::with_capacity(half);
        let mut pos_weights = Vec::with_capacity(half);
        for i in 0..half {
            let guess = (std::f64::consts::PI * (i as f64 + 0.75) / (order as f64 + 0.5)).cos();
            let mut x = Real::from_f64(guess, work);
            let mut converged = false;
            for _ in 0..200 {
                let (p, dp) = legendre_with_derivative(order, &x);
                let dx = &p / &dp;
                x -= &dx;
                if dx.abs() <= tol {
                    converged = true;
                    break;
                }
            }
            if !converged {
                return Err(Error::Convergence {
                    what: "Gauss-Legendre node refinement",
                    iterations: 200,
                    tail_bound: "Newton step above tolerance".into(),
                });
            }
            let (_, dp) = legendre_with_derivative(order, &x);
            let w = Real::from_int(2, work) / ((1 - x.square()) * dp.square());
            pos_nodes.push(x.with_prec(prec));
            pos_weights.push(w.with_prec(prec));
        }
        // pos_nodes run from near +1 inward; mirror to an ascending list.
        let mut nodes = Vec::with_capacity(order);
        let mut weights = Vec::with_capacity(order);
        for (x, w) in pos_nodes.iter().zip(&pos_weights) {
            nodes.push(-x);
            weights.push(w.clone());
        }
        let skip_center = order % 2 == 1;
        for (idx, (x, w)) in pos_nodes.iter().zip(&pos_weights).enumerate().rev() {
            if skip_center && idx == half - 1 {
                continue;
            }
            nodes.push(x.clone());
            weights.push(w.clone());
        }
        if skip_center {
            nodes[half - 1] = Real::zero(prec);
        }
        Ok(GaussLegendre {
            order,
            nodes,
            weights,
        })
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn nodes(&self) -> &[Real] {
        &self.nodes
    }

    pub fn weights(&self) -> &[Real] {
        &self.weights
    }

    /// Nodes and weights mapped affinely onto `[lo, hi]`.
    pub fn mapped(&self, lo: &Real, hi: &Real) -> Vec<(Real, Real)> {
        let half_width = (hi - lo) / 2;
        let center = (hi + lo) / 2;
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(x, w)| (&center + &(&half_width * x), &half_width * w))
            .collect()
    }

    pub fn integrate<F: Fn(&Real) -> Real>(&self, lo: &Real, hi: &Real, f: F) -> Real {
        let prec = lo.prec().max(hi.prec());
        let mut acc = Real::zero(prec);
        for (x, w) in self.mapped(lo, hi) {
            acc += &w * &f(&x);
        }
        acc
    }

    /// Composite rule over `panels` equal sub-intervals.
    pub fn integrate_composite<F: Fn(&Real) -> Real>(
        &self,
        lo: &Real,
        hi: &Real,
        panels: usize,
        f: F,
    ) -> Real {
        let panels = panels.max(1);
        let width = (hi - lo) / panels as i64;
        let mut acc = Real::zero(lo.prec().max(hi.prec()));
        for k in 0..panels {
            let a = lo + &(&width * k as i64);
            let b = &a + &width;
            acc += self.integrate(&a, &b, &f);
        }
        acc
    }
}

/// `(P_n(x), P_n'(x))` for the Legendre polynomial of degree `n`.
fn legendre_with_derivative(n: usize, x: &Real) -> (Real, Real) {
    let mut p_prev = Real::one(x.prec());
    let mut p = x.clone();
    for k in 1..n {
        let k = k as i64;
        let next = (&(x * &p) * (2 * k + 1) - &(&p_prev * k)) / (k + 1);
        p_prev = std::mem::replace(&mut p, next);
    }
    if n == 0 {
        return (Real::one(x.prec()), Real::zero(x.prec()));
    }
    let dp = (&(x * &p) - &p_prev) * n as i64 / (x.square() - 1);
    (p, dp)
}
