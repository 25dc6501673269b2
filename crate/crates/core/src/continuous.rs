//! Differential identities in the gap half-width `a`, checked pointwise with
//! central finite differences on a fine grid at high precision.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::fredholm::log_hankel_at_zero;
use crate::ladder::{ladder_states, LadderState};
use crate::orthopoly::{build_table_at, table_agreement};
use crate::precision::{bits_to_digits, PrecisionPolicy, Real};
use crate::residual::{relative, relative_product, ResidualReport, Tolerances};

pub const DEFAULT_FD_STEP: &str = "1e-8";
pub const DEFAULT_HALFWIDTH: usize = 3;

/// Relative bound on the finite-difference error estimate above which a
/// derivative is rejected.
pub const DEFAULT_FD_TOLERANCE: f64 = 1e-20;

/// Grid working precision: at least 700 bits and 200 bits above the policy's
/// working precision for `n_max`.
pub fn default_grid_bits(n_max: usize, policy: &PrecisionPolicy) -> u32 {
    (policy.working_bits(n_max) + 200).max(700)
}

#[derive(Debug, Clone)]
pub struct FdResult {
    pub value: Real,
    /// `|seven-point - five-point|`.
    pub error_estimate: Real,
}

impl FdResult {
    /// Fails when the error estimate exceeds `tolerance · max(1, |value|)`.
    pub fn checked(self, tolerance: f64) -> Result<FdResult> {
        let scale = self.value.abs().to_f64().max(1.0);
        let est = self.error_estimate.to_f64();
        if !(est <= tolerance * scale) {
            return Err(Error::InaccurateDerivative {
                estimate: self.error_estimate.to_sci(4),
                tolerance: format!("{:.1e}", tolerance * scale),
            });
        }
        Ok(self)
    }
}

const D1_7: [i64; 7] = [-1, 9, -45, 0, 45, -9, 1];
const D1_5: [i64; 5] = [1, -8, 0, 8, -1];
const D2_7: [i64; 7] = [2, -27, 270, -490, 270, -27, 2];
const D2_5: [i64; 5] = [-1, 16, -30, 16, -1];

fn stencil(samples: &[Real], weights: &[i64]) -> Real {
    let mid = samples.len() / 2;
    let half = weights.len() / 2;
    let prec = samples[mid].prec();
    let mut acc = Real::zero(prec);
    for (k, w) in weights.iter().enumerate() {
        if *w != 0 {
            acc += &samples[mid - half + k] * *w;
        }
    }
    acc
}

/// Central derivative of order 1 or 2 from equally spaced samples centred on
/// the middle entry (at least seven). The seven-point value is returned; the
/// five-point value only feeds the error estimate.
pub fn fd_derivative(samples: &[Real], step: &Real, order: u8) -> Result<FdResult> {
    if samples.len() < 7 || samples.len() % 2 == 0 {
        return Err(Error::InvalidInput(
            "finite differences need an odd number (>= 7) of samples".into(),
        ));
    }
    let (seven, five) = match order {
        1 => (
            stencil(samples, &D1_7) / (step * 60),
            stencil(samples, &D1_5) / (step * 12),
        ),
        2 => {
            let h2 = step.square();
            (
                stencil(samples, &D2_7) / (&h2 * 180),
                stencil(samples, &D2_5) / (&h2 * 12),
            )
        }
        _ => {
            return Err(Error::InvalidInput(format!(
                "derivative order {order} unsupported"
            )))
        }
    };
    let error_estimate = (&seven - &five).abs();
    Ok(FdResult {
        value: seven,
        error_estimate,
    })
}

/// Nodes `a₀ + k h`, `|k| ≤ halfwidth`, each with a full recurrence table,
/// ladder states and `ln D_n`.
#[derive(Debug, Clone)]
pub struct AGrid {
    pub a0: Real,
    pub h: Real,
    pub halfwidth: usize,
    pub n_max: usize,
    pub bits: u32,
    pub nodes: Vec<Real>,
    pub states: Vec<Vec<LadderState>>,
    /// `ln D_n(a_k)` for `n = 0 ..= n_max + 1`.
    pub log_d: Vec<Vec<Real>>,
    /// Agreement between the centre table and a rebuild at twice the bits.
    pub center_certified_digits: u32,
}

impl AGrid {
    pub fn build(a0: &Real, h: &Real, n_max: usize, bits: u32) -> Result<AGrid> {
        Self::build_with_halfwidth(a0, h, n_max, bits, DEFAULT_HALFWIDTH)
    }

    pub fn build_with_halfwidth(
        a0: &Real,
        h: &Real,
        n_max: usize,
        bits: u32,
        halfwidth: usize,
    ) -> Result<AGrid> {
        if halfwidth < 3 {
            return Err(Error::InvalidInput(
                "stencil half-width must be at least 3".into(),
            ));
        }
        if !h.is_positive() {
            return Err(Error::InvalidInput("grid step must be positive".into()));
        }
        let a0 = a0.with_prec(bits);
        let h = h.with_prec(bits);
        let hw = halfwidth as i64;
        if !(&a0 - &(&h * hw)).is_positive() {
            return Err(Error::Domain(format!(
                "grid leaves a > 0: a0 = {}, h = {}",
                a0.to_sci(8),
                h.to_sci(4)
            )));
        }
        let n_max = n_max.max(1);
        let nodes: Vec<Real> = (-hw..=hw).map(|k| &a0 + &(&h * k)).collect();
        let built: Vec<Result<(Vec<LadderState>, Vec<Real>)>> = nodes
            .par_iter()
            .map(|a| {
                let table = build_table_at(a, n_max, bits)?;
                let states = ladder_states(&table)?;
                let mut log_d = vec![Real::zero(bits)];
                for j in 0..=n_max {
                    let next = log_d[j].clone() + table.h(j).ln();
                    log_d.push(next);
                }
                Ok((states, log_d))
            })
            .collect();
        let mut states = Vec::with_capacity(nodes.len());
        let mut log_d = Vec::with_capacity(nodes.len());
        for b in built {
            let (s, d) = b?;
            states.push(s);
            log_d.push(d);
        }
        let center = build_table_at(&a0, n_max, bits)?;
        let check = build_table_at(&a0, n_max, 2 * bits)?;
        Ok(AGrid {
            a0,
            h,
            halfwidth,
            n_max,
            bits,
            nodes,
            states,
            log_d,
            center_certified_digits: table_agreement(&center, &check),
        })
    }

    pub fn center(&self) -> usize {
        self.halfwidth
    }

    fn series<F: Fn(&LadderState) -> Real>(&self, n: usize, f: F) -> Vec<Real> {
        self.states.iter().map(|s| f(&s[n])).collect()
    }

    fn derivative(&self, samples: &[Real], order: u8, fd_tol: Option<f64>) -> Result<Real> {
        let res = fd_derivative(samples, &self.h, order)?;
        let res = match fd_tol {
            Some(t) => res.checked(t)?,
            None => res,
        };
        Ok(res.value)
    }
}

/// Everything the differential identities need at the grid centre.
#[derive(Debug, Clone)]
pub struct CenterData {
    pub n: usize,
    pub a: Real,
    pub r: Real,
    pub r1: Real,
    pub r2: Real,
    pub big_r: Real,
    pub big_r1: Real,
    pub big_r2: Real,
    pub big_r_prev: Real,
    pub sigma: Real,
    pub s1: Real,
    pub s2: Real,
    pub h: Real,
    pub h1: Real,
    pub beta: Real,
    pub beta1: Real,
    pub p1: Real,
    pub log_d1: Real,
    pub log_p1: Real,
}

pub fn center_data(grid: &AGrid, n: usize, fd_tol: Option<f64>) -> Result<CenterData> {
    if n > grid.n_max {
        return Err(Error::InvalidInput(format!(
            "index {n} exceeds grid n_max {}",
            grid.n_max
        )));
    }
    let c = grid.center();
    let st = &grid.states[c][n];
    let d = |v: Vec<Real>, order: u8| grid.derivative(&v, order, fd_tol);
    let r_s = grid.series(n, |s| s.r.clone());
    let big_r_s = grid.series(n, |s| s.big_r.clone());
    let sigma_s = grid.series(n, |s| s.sigma.clone());
    let log_d_s: Vec<Real> = grid.log_d.iter().map(|v| v[n].clone()).collect();
    let log_d0 = log_hankel_at_zero(n, grid.bits);
    let log_p_s: Vec<Real> = log_d_s.iter().map(|v| v - &log_d0).collect();
    Ok(CenterData {
        n,
        a: st.a.clone(),
        r: st.r.clone(),
        r1: d(r_s.clone(), 1)?,
        r2: d(r_s, 2)?,
        big_r: st.big_r.clone(),
        big_r1: d(big_r_s.clone(), 1)?,
        big_r2: d(big_r_s, 2)?,
        big_r_prev: if n == 0 {
            Real::zero(grid.bits)
        } else {
            grid.states[c][n - 1].big_r.clone()
        },
        sigma: st.sigma.clone(),
        s1: d(sigma_s.clone(), 1)?,
        s2: d(sigma_s, 2)?,
        h: st.h.clone(),
        h1: d(grid.series(n, |s| s.h.clone()), 1)?,
        beta: st.beta.clone(),
        beta1: d(grid.series(n, |s| s.beta.clone()), 1)?,
        p1: d(grid.series(n, |s| s.p.clone()), 1)?,
        log_d1: d(log_d_s, 1)?,
        log_p1: d(log_p_s, 1)?,
    })
}

/// `h'/h = -R_n`, `(ln β_n)' = R_{n-1} - R_n`, `(ln D_n)' = σ_n`,
/// `p' = a r_n - (n + r_n) R_n / 2` and the `β_n'` relation after lowering
/// the index with `r_{n+1} = aR_n - r_n`, `β_{n+1}R_{n+1} = (aR_n - r_n)²/R_n`.
pub fn residual_derivative_identities(cd: &CenterData, tol: &Tolerances) -> ResidualReport {
    let (n, a) = (cd.n, &cd.a);
    let nn = n as i64;
    let mut rep = ResidualReport::new();
    rep.push(
        tol,
        "dlog_h",
        n,
        a,
        relative(&[cd.h1.clone(), &cd.h * &cd.big_r]),
    );
    if n >= 1 {
        rep.push(
            tol,
            "dlog_beta",
            n,
            a,
            relative(&[
                cd.beta1.clone(),
                -(&cd.beta * &cd.big_r_prev),
                &cd.beta * &cd.big_r,
            ]),
        );
    }
    rep.push(
        tol,
        "dlog_D",
        n,
        a,
        relative(&[cd.log_d1.clone(), -&cd.sigma]),
    );
    rep.push(
        tol,
        "dp",
        n,
        a,
        relative(&[
            cd.p1.clone(),
            -(a * &cd.r),
            &(&(nn + &cd.r) * &cd.big_r) / 2,
        ]),
    );
    if n >= 1 {
        let lowered = &(a * &cd.big_r) - &cd.r;
        rep.push(
            tol,
            "dbeta",
            n,
            a,
            relative(&[
                cd.beta1.clone(),
                -(2 * &(a * &cd.r)),
                &a.square() * &cd.big_r,
                &cd.beta * &cd.big_r,
                -(&lowered.square() / &cd.big_r),
            ]),
        );
    }
    rep
}

/// Riccati equations for `r_n` and `R_n`.
pub fn residual_riccati(cd: &CenterData, tol: &Tolerances) -> ResidualReport {
    let (n, a) = (cd.n, &cd.a);
    let nn = n as i64;
    let (r, big_r) = (&cd.r, &cd.big_r);
    let mut rep = ResidualReport::new();
    if n >= 1 {
        rep.push(
            tol,
            "riccati_r",
            n,
            a,
            relative(&[
                cd.r1.clone(),
                -(2 * &(&r.square() / big_r)),
                &(nn + r) * big_r,
            ]),
        );
    }
    let printed = [
        cd.big_r1.clone(),
        -(4 * r),
        -big_r.square(),
        2 * &(a * big_r),
    ];
    rep.push(tol, "riccati_R", n, a, relative(&printed));
    // R' = (2a - R)(2r - aR)/a
    let corrected = [
        cd.big_r1.clone(),
        -(4 * r),
        2 * &(a * big_r),
        2 * &(&(r * big_r) / a),
        -big_r.square(),
    ];
    rep.push(tol, "riccati_R.corrected", n, a, relative(&corrected));
    rep
}

fn piv_printed_terms(a: &Real, n: usize, y: &Real, y1: &Real, y2: &Real) -> Vec<Real> {
    let nn = n as i64;
    vec![
        y2.clone(),
        -(&y1.square() / &(2 * y)),
        -(2 * &(&(&a.square() - (1 + 2 * nn)) * y)),
        4 * &(a * &y.square()),
        -(&(3 * &y.powi(3)) / 2),
    ]
}

/// Second-order equation for `R_n` from eliminating `r_n` between the
/// `r`-Riccati equation and `R' = (2a - R)(2r - aR)/a`, cleared of denominators.
fn piv_corrected_terms(a: &Real, n: usize, y: &Real, y1: &Real, y2: &Real) -> Vec<Real> {
    let nn = n as i64;
    let a2 = a.square();
    let (y2p, y3, y4, y5) = (y.square(), y.powi(3), y.powi(4), y.powi(5));
    let y1s = y1.square();
    vec![
        &(&(y2 * a) * y) * &(y - &(2 * a)),
        -(a * &y5),
        5 * &(&a2 * &y4),
        -(&y4 * (2 * nn + 1)),
        -(8 * &(&(&a2 * a) * &y3)),
        8 * &(&(a * nn) * &y3),
        4 * &(a * &y3),
        &y2p * y1,
        4 * &(&a2.square() * &y2p),
        -(8 * &(&(&a2 * nn) * &y2p)),
        -(4 * &(&a2 * &y2p)),
        -(&(a * y) * &y1s),
        &a2 * &y1s,
    ]
}

/// Second-order equation for `R_n`, in the displayed form and in the
/// reflected variable `y(b) = R_n(-b)` at `b = -a`.
pub fn residual_painleve4(cd: &CenterData, tol: &Tolerances) -> ResidualReport {
    let (n, a) = (cd.n, &cd.a);
    let (y, y1, y2) = (&cd.big_r, &cd.big_r1, &cd.big_r2);
    let mut rep = ResidualReport::new();
    rep.push(
        tol,
        "painleve4",
        n,
        a,
        relative(&piv_printed_terms(a, n, y, y1, y2)),
    );
    rep.push(
        tol,
        "painleve4.corrected",
        n,
        a,
        relative(&piv_corrected_terms(a, n, y, y1, y2)),
    );
    // Standard form with β = 0, α = 1 + 2n, evaluated at b = -a where
    // y = R_n(a), y' = -R_n'(a), y'' = R_n''(a).
    let b = -a;
    let yb1 = -y1;
    let alpha = (1 + 2 * n) as i64;
    let standard = vec![
        y2.clone(),
        -(&yb1.square() / &(2 * y)),
        -(2 * &(&(&b.square() - alpha) * y)),
        -(4 * &(&b * &y.square())),
        -(&(3 * &y.powi(3)) / 2),
    ];
    rep.push(tol, "painleve4_reflected", n, a, relative(&standard));
    rep.push(
        tol,
        "painleve4_reflected.corrected",
        n,
        a,
        relative(&piv_corrected_terms(&-&b, n, y, &-&yb1, y2)),
    );
    rep
}

/// The `σ_n` chain: `σ' = 2r`, the `(aσ)'` elimination, the two linear
/// relations for `R_n` and `1/R_n`, their product, and the second-order
/// second-degree equation for `σ_n`.
pub fn residual_sigma_form(cd: &CenterData, tol: &Tolerances) -> ResidualReport {
    let (n, a) = (cd.n, &cd.a);
    let nn = n as i64;
    let (r, big_r, sigma) = (&cd.r, &cd.big_r, &cd.sigma);
    let (s1, s2, r1) = (&cd.s1, &cd.s2, &cd.r1);
    let r2 = r.square();
    let r2_over_a = &r2 / a;
    let two_ar = 2 * &(a * r);
    let mut rep = ResidualReport::new();

    rep.push(tol, "sigma_prime", n, a, relative(&[s1.clone(), -(2 * r)]));
    rep.push(
        tol,
        "sigma_prime.corrected",
        n,
        a,
        relative(&[s1.clone(), -(2 * r), &r2 / &a.square()]),
    );
    if n == 0 {
        return rep;
    }

    let n_plus_r_big_r = &(nn + r) * big_r;
    let a_sigma_prime = [sigma / 4, &(a * s1) / 4];
    let mut elim = a_sigma_prime.to_vec();
    elim.extend([
        -(&a.square() * r),
        &(a / 2) * &(&r2 / big_r),
        &(a / 4) * &n_plus_r_big_r,
    ]);
    rep.push(tol, "sigma_elim", n, a, relative(&elim));
    let mut elim = a_sigma_prime.to_vec();
    elim.extend([-(a * r), &r2 / &(2 * big_r), &n_plus_r_big_r / 4]);
    rep.push(tol, "sigma_elim.corrected", n, a, relative(&elim));

    let lin1 = vec![4 * &(&r2 / big_r), -&two_ar, sigma.clone(), -r1];
    let lin2 = vec![2 * &n_plus_r_big_r, -&two_ar, sigma.clone(), r1.clone()];
    rep.push(tol, "sigma_linear_1", n, a, relative(&lin1));
    rep.push(tol, "sigma_linear_2", n, a, relative(&lin2));
    for (name, mut terms) in [
        ("sigma_linear_1.corrected", lin1),
        ("sigma_linear_2.corrected", lin2),
    ] {
        terms.push(-&r2_over_a);
        rep.push(tol, name, n, a, relative(&terms));
    }

    let lhs = 8 * &(&(nn + r) * &r2);
    rep.push(
        tol,
        "sigma_product",
        n,
        a,
        relative(&[lhs.clone(), -(&two_ar - sigma).square(), r1.square()]),
    );
    let x = &(&two_ar + &r2_over_a) - sigma;
    rep.push(
        tol,
        "sigma_product.corrected",
        n,
        a,
        relative(&[lhs, -x.square(), r1.square()]),
    );

    rep.push(
        tol,
        "sigma_form",
        n,
        a,
        relative(&[
            s2.square(),
            -(4 * &(&(a * s1) - sigma).square()),
            4 * &(&s1.square() * &(s1 + 2 * nn)),
        ]),
    );
    rep.push(
        tol,
        "sigma_form.corrected",
        n,
        a,
        sigma_form_corrected(a, n, sigma, s1, s2),
    );
    rep
}

/// With `σ' = 2r - r²/a²`, `r` is a root of `x² - 2a²x + a²σ' = 0`; for each
/// root the product relation with `r' = (σ'' - 2x²/a³) / (2 - 2x/a²)` is
/// cleared of its denominator and the product over both roots is returned.
fn sigma_form_corrected(a: &Real, n: usize, sigma: &Real, s1: &Real, s2: &Real) -> Real {
    let a2 = a.square();
    let a3 = &a2 * a;
    let mut radicand = &a2.square() - &(&a2 * s1);
    if radicand.is_negative() {
        radicand = Real::zero(radicand.prec());
    }
    let root = radicand.sqrt();
    let factor = |x: Real| -> Vec<Real> {
        let x2 = x.square();
        let d = 2 - &(2 * &(&x / &a2));
        let d2 = d.square();
        let num = s2 - &(2 * &(&x2 / &a3));
        let y = &(&(2 * &(a * &x)) + &(&x2 / a)) - sigma;
        vec![
            &d2 * &(8 * &(&(n as i64 + &x) * &x2)),
            -(&d2 * &y.square()),
            num.square(),
        ]
    };
    relative_product(&[factor(&a2 + &root), factor(&a2 - &root)])
}

/// Second-degree equation for `v_n = -2r_n - 2n/3`, plus the discriminant
/// of the `R_n` solve of the `r`-Riccati equation.
pub fn residual_chazy(cd: &CenterData, tol: &Tolerances) -> ResidualReport {
    let (n, a) = (cd.n, &cd.a);
    let mut rep = ResidualReport::new();
    if n == 0 {
        return rep;
    }
    let nn = n as i64;
    let (r, r1, r2) = (&cd.r, &cd.r1, &cd.r2);
    let third = |k: i64| Real::ratio(k, 3, r.prec());
    let v = &(-(2 * r)) - &third(2 * nn);
    let v1 = -(2 * r1);
    let v2 = -(2 * r2);
    let left = Real::sum(&[v2, -(6 * &v.square()), third(8 * nn * nn)], r.prec()).square();
    let right = &(4 * &a.square())
        * &Real::sum(
            &[
                v1.square(),
                -(4 * &v.powi(3)),
                &third(16 * nn * nn) * &v,
                Real::ratio(64 * nn * nn * nn, 27, r.prec()),
            ],
            r.prec(),
        );
    rep.push(tol, "chazy", n, a, relative(&[left, -right]));

    // Eliminating R_n between the r-Riccati equation and
    // R' = (2a - R)(2r - aR)/a gives this second-degree relation.
    let (a2, a4) = (a.square(), a.powi(4));
    let (rs, r3, r4, r5) = (r.square(), r.powi(3), r.powi(4), r.powi(5));
    let (r1s, r2s) = (r1.square(), r2.square());
    let n2 = nn * nn;
    let terms = [
        32 * &(&(&a4 * nn) * &rs),
        32 * &(&a4 * &r3),
        4 * &(&a4 * &r1s),
        -(64 * &(&(&a2 * n2) * &rs)),
        -(128 * &(&(&a2 * nn) * &r3)),
        -(16 * &(&(&(&a2 * nn) * r) * r2)),
        -(80 * &(&a2 * &r4)),
        -(24 * &(&(&a2 * &rs) * r2)),
        8 * &(&(&a2 * r) * &r1s),
        -(&a2 * &r2s),
        32 * &(&r4 * nn),
        32 * &r5,
        4 * &(&rs * &r1s),
    ];
    rep.push(tol, "chazy.corrected", n, a, relative(&terms));

    let solve = (2 * &(&(nn + r) * &cd.big_r)) + r1;
    for (name, shift) in [
        ("discriminant", a.clone()),
        ("discriminant.corrected", Real::from_int(nn, r.prec())),
    ] {
        let delta_terms = [r1s.clone(), 8 * &(&rs * &(r + &shift))];
        let delta = Real::sum(&delta_terms, r.prec());
        if delta.is_negative() {
            rep.warn(format!(
                "{name}: Δ_{n}({}) = {} < 0",
                a.to_sci(8),
                delta.to_sci(6)
            ));
        }
        rep.push(
            tol,
            name,
            n,
            a,
            relative(&[
                delta_terms[0].clone(),
                delta_terms[1].clone(),
                -solve.square(),
            ]),
        );
    }
    rep
}

/// `d/da ln P(n, a) = σ_n(a)` with `P = D_n(a) / D_n(0)`.
pub fn residual_sigma_prob_link(cd: &CenterData, tol: &Tolerances) -> ResidualReport {
    let mut rep = ResidualReport::new();
    rep.push(
        tol,
        "sigma_prob_link",
        cd.n,
        &cd.a,
        relative(&[cd.log_p1.clone(), -&cd.sigma]),
    );
    rep
}

/// Every continuous residual at `(n, a₀)`.
pub fn residual_continuous(
    grid: &AGrid,
    n: usize,
    fd_tol: Option<f64>,
    tol: &Tolerances,
) -> Result<ResidualReport> {
    let cd = center_data(grid, n, fd_tol)?;
    let mut rep = residual_derivative_identities(&cd, tol);
    rep.merge(residual_riccati(&cd, tol));
    rep.merge(residual_painleve4(&cd, tol));
    rep.merge(residual_sigma_form(&cd, tol));
    rep.merge(residual_chazy(&cd, tol));
    rep.merge(residual_sigma_prob_link(&cd, tol));
    Ok(rep)
}

/// `log10(residual)` against `log10(h)` for one residual name.
#[derive(Debug, Clone)]
pub struct ConvergenceStudy {
    pub name: String,
    pub points: Vec<(f64, f64)>,
    /// Least-squares slope over points above the precision floor.
    pub slope: Option<f64>,
}

/// Rebuild the grid at each step in `steps` and fit the log-log slope of
/// every continuous residual. Points within 30 digits of the working
/// precision are treated as the precision floor and left out of the fit.
pub fn convergence_study(
    a0: &Real,
    n: usize,
    steps: &[Real],
    bits: u32,
) -> Result<Vec<ConvergenceStudy>> {
    let tol = Tolerances::new();
    let floor = -(bits_to_digits(bits) as f64) + 30.0;
    let reports: Vec<Result<ResidualReport>> = steps
        .par_iter()
        .map(|h| {
            let grid = AGrid::build(a0, h, n + 1, bits)?;
            residual_continuous(&grid, n, None, &tol)
        })
        .collect();
    let reports: Vec<ResidualReport> = reports.into_iter().collect::<Result<_>>()?;
    let mut out = Vec::new();
    for entry in &reports[0].entries {
        let name = entry.name.clone();
        let points: Vec<(f64, f64)> = steps
            .iter()
            .zip(&reports)
            .filter_map(|(h, rep)| {
                rep.named(&name)
                    .next()
                    .map(|e| (h.log10_abs(), e.residual.log10_abs()))
            })
            .collect();
        let usable: Vec<(f64, f64)> = points
            .iter()
            .copied()
            .filter(|(_, y)| y.is_finite() && *y > floor)
            .collect();
        let slope = least_squares_slope(&usable);
        out.push(ConvergenceStudy {
            name,
            points,
            slope,
        });
    }
    Ok(out)
}

fn least_squares_slope(points: &[(f64, f64)]) -> Option<f64> {
    if points.len() < 2 {
        return None;
    }
    let k = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / k;
    let my = points.iter().map(|p| p.1).sum::<f64>() / k;
    let sxx: f64 = points.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    if sxx == 0.0 {
        return None;
    }
    Some(sxy / sxx)
}
