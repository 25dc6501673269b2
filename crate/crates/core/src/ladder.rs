//! Boundary quantities `R_n(a)`, `r_n(a)`, `σ_n(a)` of the ladder operators
//! and the algebraic identities tying them to `β_n` and `p(n, a)`.

use crate::error::{Error, Result};
use crate::orthopoly::{edge_values, RecurrenceTable};
use crate::precision::Real;
use crate::residual::{relative, ResidualReport, Tolerances};

/// `|P_n(a)|` below this fraction of the recurrence terms that produced it
/// counts as a zero at the gap edge.
pub const EDGE_ZERO_RATIO: f64 = 1e-20;

/// Minimum `|z² - a²|` for supplementary-condition samples.
pub const POLE_MARGIN: f64 = 1e-3;

#[derive(Debug, Clone)]
pub struct LadderState {
    pub n: usize,
    pub a: Real,
    pub big_r: Real,
    pub r: Real,
    pub beta: Real,
    pub sigma: Real,
    pub p: Real,
    pub h: Real,
    pub pn_at_a: Real,
}

impl LadderState {
    pub fn rational_pair(&self) -> RationalPair {
        RationalPair {
            n: self.n,
            a: self.a.clone(),
            big_r: self.big_r.clone(),
            r: self.r.clone(),
        }
    }
}

/// `A_n(z) = 2 + a R_n / (z² - a²)` and `B_n(z) = r_n z / (z² - a²)`.
#[derive(Debug, Clone)]
pub struct RationalPair {
    pub n: usize,
    a: Real,
    big_r: Real,
    r: Real,
}

impl RationalPair {
    pub fn a_of_z(&self, z: &Real) -> Real {
        2 + &(&self.a * &self.big_r) / &(z.square() - self.a.square())
    }

    pub fn b_of_z(&self, z: &Real) -> Real {
        &(&self.r * z) / &(z.square() - self.a.square())
    }
}

/// States for `n = 0 ..= table.n_max`, without the edge-zero check.
fn states_unchecked(table: &RecurrenceTable) -> Vec<LadderState> {
    let prec = table.working_bits();
    let a = table.a().clone();
    let w0 = (-a.square()).exp();
    let edges = edge_values(table);
    let mut out = Vec::with_capacity(table.n_max() + 1);
    let mut sigma = Real::zero(prec);
    let mut p = Real::zero(prec);
    for n in 0..=table.n_max() {
        let pn = &edges[n];
        let big_r = &(2 * &(&w0 * &pn.square())) / table.h(n);
        let r = if n == 0 {
            Real::zero(prec)
        } else {
            &(2 * &(&w0 * &(pn * &edges[n - 1]))) / table.h(n - 1)
        };
        out.push(LadderState {
            n,
            a: a.clone(),
            big_r: big_r.clone(),
            r,
            beta: table.beta(n).clone(),
            sigma: sigma.clone(),
            p: p.clone(),
            h: table.h(n).clone(),
            pn_at_a: pn.clone(),
        });
        sigma -= &big_r;
        p -= table.beta(n);
    }
    out
}

/// Edge-zero test for `P_n(a)`, `a > 0`. At `a = 0` the odd polynomials
/// vanish exactly by parity and no check applies.
fn edge_check(table: &RecurrenceTable, edges: &[Real], n: usize) -> Result<()> {
    if n < 2 || table.a().is_zero() {
        return Ok(());
    }
    let scale = (table.a() * &edges[n - 1]).abs() + (table.beta(n - 1) * &edges[n - 2]).abs();
    let ratio = &edges[n].abs() / &scale;
    if ratio.to_f64() < EDGE_ZERO_RATIO {
        return Err(Error::EdgeZero {
            n,
            ratio: ratio.to_sci(6),
        });
    }
    Ok(())
}

/// The state at `n`, refusing cells where `P_n(a)` or `P_{n-1}(a)` sits on a zero.
pub fn ladder_state(table: &RecurrenceTable, n: usize) -> Result<LadderState> {
    if n > table.n_max() {
        return Err(Error::InvalidInput(format!(
            "index {n} exceeds table n_max {}",
            table.n_max()
        )));
    }
    let edges = edge_values(table);
    edge_check(table, &edges, n)?;
    if n >= 1 {
        edge_check(table, &edges, n - 1)?;
    }
    Ok(states_unchecked(table).swap_remove(n))
}

/// All states `0 ..= n_max`; fails on the first edge zero.
pub fn ladder_states(table: &RecurrenceTable) -> Result<Vec<LadderState>> {
    let edges = edge_values(table);
    for n in 0..=table.n_max() {
        edge_check(table, &edges, n)?;
    }
    Ok(states_unchecked(table))
}

/// Per-cell states; a cell touching an edge zero carries the error instead.
pub fn ladder_states_per_cell(table: &RecurrenceTable) -> Vec<Result<LadderState>> {
    let edges = edge_values(table);
    let checks: Vec<Result<()>> = (0..=table.n_max())
        .map(|n| edge_check(table, &edges, n))
        .collect();
    states_unchecked(table)
        .into_iter()
        .enumerate()
        .map(|(n, s)| {
            checks[n].clone()?;
            if n >= 1 {
                checks[n - 1].clone()?;
            }
            Ok(s)
        })
        .collect()
}

fn require_positive_gap(a: &Real) -> Result<()> {
    if !a.is_positive() {
        return Err(Error::Domain(
            "residual checks need a > 0 (R_n vanishes for odd n at a = 0)".into(),
        ));
    }
    Ok(())
}

/// The coefficient identities for `n = 0 ..= n_last`. `states` must be
/// consecutive from `n = 0` and reach `n_last + 1`.
pub fn residual_identities(
    states: &[LadderState],
    n_last: usize,
    tol: &Tolerances,
) -> Result<ResidualReport> {
    if states.len() < n_last + 2 || states.iter().enumerate().any(|(i, s)| s.n != i) {
        return Err(Error::InvalidInput(format!(
            "identity checks up to n = {n_last} need consecutive states 0..={}",
            n_last + 1
        )));
    }
    let a = &states[0].a;
    require_positive_gap(a)?;
    let prec = states[0].r.prec();
    let mut rep = ResidualReport::new();
    let mut sum_r = Real::zero(prec);
    for n in 0..=n_last {
        let s = &states[n];
        let next = &states[n + 1];
        let nn = n as i64;
        let (big_r, r) = (&s.big_r, &s.r);
        let sum_big_r = -&s.sigma;
        let r2 = r.square();
        let r2_over_r = &r2 / big_r;
        let n_plus_r_big_r = &(nn + r) * big_r;

        rep.push(
            tol,
            "r_ladder",
            n,
            a,
            relative(&[next.r.clone(), r.clone(), -(a * big_r)]),
        );
        rep.push(
            tol,
            "beta_r",
            n,
            a,
            relative(&[s.beta.clone(), Real::ratio(-nn, 2, prec), -(r / 2)]),
        );
        if n >= 1 {
            let prev = &states[n - 1];
            rep.push(
                tol,
                "r_square",
                n,
                a,
                relative(&[r2.clone(), -(&s.beta * &(big_r * &prev.big_r))]),
            );
        }
        rep.push(
            tol,
            "sum_r",
            n,
            a,
            relative(&[a * &sum_big_r, -(2 * &sum_r), -r]),
        );
        let sum_big_r_terms = [
            sum_big_r.clone(),
            2 * &(a * r),
            -&n_plus_r_big_r,
            -(2 * &r2_over_r),
        ];
        rep.push(tol, "sum_R", n, a, relative(&sum_big_r_terms));
        let mut corrected = sum_big_r_terms.to_vec();
        corrected.push(&r2 / a);
        rep.push(tol, "sum_R.corrected", n, a, relative(&corrected));

        let quarter = Real::ratio(1, 4, prec);
        let p_terms = [
            -&s.p,
            Real::ratio(-nn * (nn - 1), 4, prec),
            &(&quarter + &(a.square() / 2)) * r,
            -(&(a / 4) * &n_plus_r_big_r),
            -(&(a / 2) * &r2_over_r),
        ];
        rep.push(tol, "p_closed", n, a, relative(&p_terms));
        let mut corrected = p_terms.to_vec();
        corrected.push(&r2 / 4);
        rep.push(tol, "p_closed.corrected", n, a, relative(&corrected));

        rep.push(
            tol,
            "sigma_step",
            n,
            a,
            relative(&[big_r.clone(), -&s.sigma, next.sigma.clone()]),
        );

        if n >= 1 && !r.is_positive() {
            rep.warn(format!(
                "r_{n}({}) = {} is not positive",
                a.to_sci(8),
                r.to_sci(8)
            ));
        }
        sum_r += r;
    }
    Ok(rep)
}

/// Default sample points `{±0.37, ±2.1, 3.7, 10}`, each pushed outward until
/// it clears the pole margin around `±a`.
pub fn default_z_samples(a: &Real) -> Vec<Real> {
    let prec = a.prec();
    ["0.37", "-0.37", "2.1", "-2.1", "3.7", "10"]
        .iter()
        .map(|s| {
            let mut z = Real::parse(s, prec).expect("static literal");
            let step = Real::parse("0.05", prec).expect("static literal");
            while (z.square() - a.square()).abs().to_f64() <= 10.0 * POLE_MARGIN {
                z = if z.is_negative() {
                    &z - &step
                } else {
                    &z + &step
                };
            }
            z
        })
        .collect()
}

/// Pointwise residuals of the three supplementary conditions at state `n`.
/// `prev` is required for `n ≥ 1`.
pub fn residual_supplementary(
    prev: Option<&LadderState>,
    cur: &LadderState,
    next: &LadderState,
    z_samples: &[Real],
    tol: &Tolerances,
) -> Result<ResidualReport> {
    let a = &cur.a;
    require_positive_gap(a)?;
    if next.n != cur.n + 1 || (cur.n >= 1 && prev.map(|p| p.n + 1) != Some(cur.n)) {
        return Err(Error::InvalidInput(
            "supplementary conditions need states n-1, n, n+1".into(),
        ));
    }
    let n = cur.n;
    let prec = cur.r.prec();
    let cur_pair = cur.rational_pair();
    let next_pair = next.rational_pair();
    let prev_pair = prev.map(LadderState::rational_pair);
    let mut rep = ResidualReport::new();
    for z in z_samples {
        let z = z.with_prec(prec);
        let gap = z.square() - a.square();
        if gap.abs().to_f64() <= POLE_MARGIN {
            return Err(Error::SampleNearPole { z: z.to_sci(12) });
        }
        let b_n = cur_pair.b_of_z(&z);
        let b_next = next_pair.b_of_z(&z);
        let a_n = cur_pair.a_of_z(&z);
        let a_next = next_pair.a_of_z(&z);
        let two_z = 2 * &z;

        rep.push(
            tol,
            "s1",
            n,
            a,
            relative(&[b_next.clone(), b_n.clone(), -(&z * &a_n), two_z.clone()]),
        );

        let mut s2 = vec![
            Real::one(prec),
            &z * &b_next,
            -(&z * &b_n),
            -(&next.beta * &a_next),
        ];
        // β_0 = 0 removes the A_{-1} term at n = 0.
        let a_prev = prev_pair.as_ref().map(|p| p.a_of_z(&z));
        if let Some(a_prev) = &a_prev {
            s2.push(&cur.beta * a_prev);
        }
        rep.push(tol, "s2", n, a, relative(&s2));

        let mut s2p = vec![
            b_n.square(),
            &two_z * &b_n,
            Real::from_int(2 * n as i64, prec),
            -(&(a * &cur.sigma) / &gap),
        ];
        if let Some(a_prev) = &a_prev {
            s2p.push(-(&cur.beta * &(&a_n * a_prev)));
        }
        rep.push(tol, "s2_prime", n, a, relative(&s2p));
    }
    Ok(rep)
}
