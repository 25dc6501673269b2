//! Monic orthogonal polynomials for the gap weight: recurrence coefficients
//! `β_j(a)`, norms `h_j(a)`, Hankel determinants, edge values `P_n(±a)` and
//! the sub-leading coefficient `p(n, a)`.
//!
//! The recurrence data comes from the Chebyshev moment recursion. That route
//! is exponentially ill-conditioned in `n`, so every table is built twice at
//! two precision levels and only accepted once consecutive levels agree on
//! the policy's target number of digits.

use crate::error::{Error, Result};
use crate::precision::{agreement_digits, PrecisionPolicy, Real};
use crate::weight::{moments, GapWeight};

/// `β_j(a)` and `h_j(a)` for `j = 0 ..= n_max`, with `β_0 = 0`.
#[derive(Debug, Clone)]
pub struct RecurrenceTable {
    a: Real,
    n_max: usize,
    beta: Vec<Real>,
    h: Vec<Real>,
    certified_digits: Option<u32>,
    working_bits: u32,
    escalations: u32,
}

impl RecurrenceTable {
    pub fn a(&self) -> &Real {
        &self.a
    }

    pub fn n_max(&self) -> usize {
        self.n_max
    }

    pub fn beta(&self, j: usize) -> &Real {
        &self.beta[j]
    }

    pub fn betas(&self) -> &[Real] {
        &self.beta
    }

    pub fn h(&self, j: usize) -> &Real {
        &self.h[j]
    }

    pub fn norms(&self) -> &[Real] {
        &self.h
    }

    /// Digits certified by two-level agreement; `None` for single-level builds.
    pub fn certified_digits(&self) -> Option<u32> {
        self.certified_digits
    }

    pub fn working_bits(&self) -> u32 {
        self.working_bits
    }

    /// Number of precision levels beyond the first certification pair.
    pub fn escalations(&self) -> u32 {
        self.escalations
    }

    fn check_index(&self, n: usize) -> Result<()> {
        if n > self.n_max {
            return Err(Error::InvalidInput(format!(
                "index {n} exceeds table n_max {}",
                self.n_max
            )));
        }
        Ok(())
    }
}

/// Build a certified table for `a` and `n_max`.
pub fn build_table(a: &Real, n_max: usize, policy: &PrecisionPolicy) -> Result<RecurrenceTable> {
    policy.validate()?;
    if n_max < 1 {
        return Err(Error::InvalidInput("n_max must be at least 1".into()));
    }
    let mut bits = policy.working_bits(n_max);
    let mut lower = build_table_at(a, n_max, bits);
    let mut escalations = 0u32;
    let mut best_digits = 0u32;
    loop {
        let upper_bits = policy.escalate(bits);
        if upper_bits > policy.max_bits {
            return Err(match lower {
                Err(e @ Error::IllConditioned { .. }) => e,
                _ => Error::PrecisionExhausted {
                    certified_digits: best_digits,
                    max_bits: policy.max_bits,
                },
            });
        }
        let upper = build_table_at(a, n_max, upper_bits)?;
        if let Ok(lo) = &lower {
            let digits = table_agreement(lo, &upper);
            best_digits = best_digits.max(digits);
            if digits >= policy.target_certified_digits {
                return Ok(RecurrenceTable {
                    certified_digits: Some(digits),
                    escalations,
                    ..upper
                });
            }
        }
        lower = Ok(upper);
        bits = upper_bits;
        escalations += 1;
    }
}

/// Single-level build at `bits` (no certification).
pub fn build_table_at(a: &Real, n_max: usize, bits: u32) -> Result<RecurrenceTable> {
    let w = GapWeight::new(a, bits)?;
    let mu = moments(&w, 2 * n_max + 1)?;
    let (beta, h) = chebyshev_even(&mu, n_max + 1, bits)?;
    Ok(RecurrenceTable {
        a: w.a().clone(),
        n_max,
        beta,
        h,
        certified_digits: None,
        working_bits: bits,
        escalations: 0,
    })
}

/// Chebyshev's algorithm specialised to a symmetric weight: the odd moments
/// vanish, so every `α_k = 0` and the modified moments satisfy
/// `σ_{k,l} = σ_{k-1,l+1} - β_{k-1} σ_{k-2,l}`, with `h_k = σ_{k,k}`.
fn chebyshev_even(mu: &[Real], count: usize, bits: u32) -> Result<(Vec<Real>, Vec<Real>)> {
    let width = 2 * count;
    let mut prev: Vec<Real> = vec![Real::zero(bits); width];
    let mut cur: Vec<Real> = mu.iter().take(width).cloned().collect();
    cur.resize(width, Real::zero(bits));
    let mut beta = vec![Real::zero(bits)];
    let mut h = vec![cur[0].clone()];
    if !h[0].is_positive() {
        return Err(Error::IllConditioned { index: 0, bits });
    }
    for k in 1..count {
        let mut next = vec![Real::zero(bits); width];
        let beta_prev = &beta[k - 1];
        for l in k..(width - k) {
            next[l] = &cur[l + 1] - &(beta_prev * &prev[l]);
        }
        if !next[k].is_positive() {
            return Err(Error::IllConditioned { index: k, bits });
        }
        beta.push(&next[k] / &cur[k - 1]);
        h.push(next[k].clone());
        prev = std::mem::replace(&mut cur, next);
    }
    Ok((beta, h))
}

/// Smallest agreement, in digits, across the `β_j` and `h_j` of two builds.
pub fn table_agreement(lo: &RecurrenceTable, hi: &RecurrenceTable) -> u32 {
    let betas = lo.beta.iter().zip(&hi.beta).skip(1);
    let norms = lo.h.iter().zip(&hi.h);
    betas
        .chain(norms)
        .map(|(x, y)| agreement_digits(x, y))
        .min()
        .unwrap_or(0)
}

/// `P_n` and `P_{n-1}` evaluated at the gap edge `+a`.
#[derive(Debug, Clone)]
pub struct EdgeEval {
    pub n: usize,
    pub pn_at_a: Real,
    pub pnm1_at_a: Real,
}

impl EdgeEval {
    /// Values at `-a` by parity: `P_k(-a) = (-1)^k P_k(a)`.
    pub fn at_minus_a(&self) -> (Real, Real) {
        let flip = |k: usize, v: &Real| if k % 2 == 1 { -v } else { v.clone() };
        let pnm1 = if self.n == 0 {
            self.pnm1_at_a.clone()
        } else {
            flip(self.n - 1, &self.pnm1_at_a)
        };
        (flip(self.n, &self.pn_at_a), pnm1)
    }
}

/// `(P_n(x), P_{n-1}(x))` by the forward three-term recurrence
/// `P_{k+1} = x P_k - β_k P_{k-1}`, `P_0 = 1`, `P_{-1} = 0`.
pub fn eval_monic(table: &RecurrenceTable, n: usize, x: &Real) -> Result<(Real, Real)> {
    table.check_index(n)?;
    let prec = table.working_bits;
    let x = x.with_prec(prec);
    let mut p_prev = Real::zero(prec);
    let mut p = Real::one(prec);
    for k in 0..n {
        let next = &(&x * &p) - &(&table.beta[k] * &p_prev);
        p_prev = std::mem::replace(&mut p, next);
    }
    Ok((p, p_prev))
}

/// All edge values `P_0(a) ..= P_{n_max}(a)`.
pub fn edge_values(table: &RecurrenceTable) -> Vec<Real> {
    let prec = table.working_bits;
    let a = &table.a;
    let mut out = Vec::with_capacity(table.n_max + 1);
    let mut p_prev = Real::zero(prec);
    let mut p = Real::one(prec);
    out.push(p.clone());
    for k in 0..table.n_max {
        let next = &(a * &p) - &(&table.beta[k] * &p_prev);
        p_prev = std::mem::replace(&mut p, next);
        out.push(p.clone());
    }
    out
}

pub fn edge_eval(table: &RecurrenceTable, n: usize) -> Result<EdgeEval> {
    let (pn_at_a, pnm1_at_a) = eval_monic(table, n, &table.a)?;
    Ok(EdgeEval {
        n,
        pn_at_a,
        pnm1_at_a,
    })
}

/// The coefficient of `x^{n-2}` in `P_n`.
#[derive(Debug, Clone)]
pub struct SubleadingCoeff {
    pub n: usize,
    pub p: Real,
}

/// `p(n, a) = -Σ_{j<n} β_j(a)`.
pub fn subleading(table: &RecurrenceTable, n: usize) -> Result<SubleadingCoeff> {
    table.check_index(n)?;
    let sum = Real::sum(&table.beta[..n], table.working_bits);
    Ok(SubleadingCoeff { n, p: -sum })
}

/// `D_n(a) = h_0 h_1 ⋯ h_{n-1}`, the `n × n` Hankel determinant of the moments.
pub fn hankel_det(table: &RecurrenceTable, n: usize) -> Result<Real> {
    if n > table.n_max + 1 {
        return Err(Error::InvalidInput(format!(
            "Hankel order {n} needs norms beyond n_max {}",
            table.n_max
        )));
    }
    let mut d = Real::one(table.working_bits);
    for hj in &table.h[..n] {
        d *= hj;
    }
    Ok(d)
}
