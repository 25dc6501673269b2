//! Difference equations in `n`: forward iteration of the second-order
//! equation for `r_n`, its modified discrete Painlevé II normal form, the
//! quadratic for `r_n` in terms of `R_n R_{n-1}`, and the second-degree
//! difference equations for `σ_n` and `R_n`.

use crate::error::{Error, Result};
use crate::ladder::LadderState;
use crate::precision::Real;
use crate::residual::{relative, relative_product, ResidualReport, Tolerances};
use crate::weight::{seed_r1, GapWeight};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OrbitSource {
    Iterated,
    Direct,
}

#[derive(Debug, Clone)]
pub struct DiscreteOrbit {
    pub a: Real,
    pub r_seq: Vec<Real>,
    pub source: OrbitSource,
}

impl DiscreteOrbit {
    pub fn direct(states: &[LadderState]) -> DiscreteOrbit {
        DiscreteOrbit {
            a: states[0].a.clone(),
            r_seq: states.iter().map(|s| s.r.clone()).collect(),
            source: OrbitSource::Direct,
        }
    }
}

/// Parameters of the modified discrete Painlevé II form realised by
/// `y_n = -2 r_n / a²`: `m = 0`, `λ = 1`, `z_n = -2n / a²`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ModifiedDP2Params {
    pub m: i64,
    pub lambda: i64,
}

impl ModifiedDP2Params {
    pub const REALISED: ModifiedDP2Params = ModifiedDP2Params { m: 0, lambda: 1 };

    pub fn z_n(&self, n: usize, a: &Real) -> Real {
        Real::from_int(-2 * n as i64, a.prec()) / a.square()
    }
}

/// Degeneracy threshold `10^{-digits/2}` for a given number of certified digits.
pub fn degeneracy_threshold(certified_digits: u32) -> f64 {
    10f64.powi(-(certified_digits as i32) / 2)
}

/// `|x| / max(|terms|)`: how close a sum of the given terms came to cancelling.
fn relative_size(x: &Real, terms: &[&Real]) -> f64 {
    let scale = Real::max_abs(terms.iter().copied());
    if scale.is_zero() {
        return 0.0;
    }
    (x.abs() / scale).to_f64()
}

/// Iterate `r_{n+1} = -r_n + 2a² r_n² / ((n + r_n)(r_n + r_{n-1}))` from
/// `r_0 = 0`, `r_1 = a R_0(a)` up to `r_{n_last}`.
pub fn iterate_rd2(a: &Real, n_last: usize, prec: u32, threshold: f64) -> Result<DiscreteOrbit> {
    if !a.is_positive() {
        return Err(Error::Domain("forward iteration needs a > 0".into()));
    }
    let w = GapWeight::new(a, prec)?;
    let a = w.a().clone();
    let a2 = a.square();
    let mut r = vec![Real::zero(prec), seed_r1(&w)?];
    for n in 1..n_last {
        let nn = Real::from_int(n as i64, prec);
        let left = &nn + &r[n];
        let right = &r[n] + &r[n - 1];
        let small =
            relative_size(&left, &[&nn, &r[n]]).min(relative_size(&right, &[&r[n], &r[n - 1]]));
        if left.is_zero() || right.is_zero() || small < threshold {
            return Err(Error::DegenerateDenominator {
                n,
                relative: format!("{small:.3e}"),
            });
        }
        let next = -&r[n] + &(&(2 * &(&a2 * &r[n].square())) / &(&left * &right));
        r.push(next);
    }
    r.truncate(n_last + 1);
    Ok(DiscreteOrbit {
        a,
        r_seq: r,
        source: OrbitSource::Iterated,
    })
}

/// `(r_{n+1} + r_n)(n + r_n)(r_n + r_{n-1}) = 2a² r_n²`.
pub fn residual_rd2(r_prev: &Real, r: &Real, r_next: &Real, a: &Real, n: usize) -> Real {
    let lhs = &(&(r_next + r) * &(n as i64 + r)) * &(r + r_prev);
    relative(&[lhs, -(2 * &(&a.square() * &r.square()))])
}

/// `-4y_n² = (y_{n+1} + y_n)(y_n + y_{n-1})(y_n - 2n/a²)` with `y = -2r/a²`.
pub fn residual_mdp2(
    r_prev: &Real,
    r: &Real,
    r_next: &Real,
    a: &Real,
    n: usize,
    threshold: f64,
) -> Result<Real> {
    let a2 = a.square();
    let y = |v: &Real| -(2 * v) / &a2;
    let (ym, y0, yp) = (y(r_prev), y(r), y(r_next));
    let shift = Real::from_int(2 * n as i64, a.prec()) / &a2;
    let denom = &y0 - &shift;
    let small = relative_size(&denom, &[&y0, &shift]);
    if denom.is_zero() || (n > 0 && small < threshold) {
        return Err(Error::DegenerateDenominator {
            n,
            relative: format!("{small:.3e}"),
        });
    }
    let rhs = &(&(&yp + &y0) * &(&y0 + &ym)) * &denom;
    Ok(relative(&[4 * &y0.square(), rhs]))
}

/// `(σ_n-σ_{n+1})(σ_{n-1}-σ_n)(2a+σ_{n+1}-σ_{n-1})(2an+σ_n) = 2[σ_n + n(σ_{n-1}-σ_{n+1})]²`.
pub fn residual_sd2(s_prev: &Real, s: &Real, s_next: &Real, a: &Real, n: usize) -> Real {
    let nn = n as i64;
    let lhs = &(&(&(s - s_next) * &(s_prev - s)) * &(&(2 * a) + &(s_next - s_prev)))
        * &(&(2 * &(a * nn)) + s);
    let bracket = s + &(&(s_prev - s_next) * nn);
    relative(&[lhs, -(2 * &bracket.square())])
}

/// Second-order relation for `σ_n` obtained by eliminating `r_n` between
/// `2r² = (n + r) R_n R_{n-1}` and
/// `-σ_n + 2ar + r²/a - (n + r) R_n - 2r²/R_n = 0`, with `R_n = σ_n - σ_{n+1}`
/// and `R_{n-1} = σ_{n-1} - σ_n`. Evaluated as the product of the second
/// expression over both roots of the first.
pub fn residual_sd2_corrected(s_prev: &Real, s: &Real, s_next: &Real, a: &Real, n: usize) -> Real {
    let big_r = s - s_next;
    let rr = &big_r * &(s_prev - s);
    let disc = (&rr.square() + &(&rr * (8 * n as i64))).sqrt();
    let factor = |x: Real| -> Vec<Real> {
        let x2 = x.square();
        vec![
            -s,
            2 * &(a * &x),
            &x2 / a,
            -(&(n as i64 + &x) * &big_r),
            -(2 * &(&x2 / &big_r)),
        ]
    };
    let plus = factor((&rr + &disc) / 4);
    let minus = factor((&rr - &disc) / 4);
    relative_product(&[plus, minus])
}

/// The second-degree difference equation for `R_n`.
pub fn residual_big_r_d2(r_prev: &Real, r: &Real, r_next: &Real, a: &Real, n: usize) -> Real {
    let nn = n as i64;
    let lhs =
        &(&(&(r_prev * r_next) * &(&(r * r_prev) + 8 * nn)) * &(&(r_next * r) + (8 * nn + 8)));
    let a_r = a * r;
    let bracket = Real::sum(
        &[
            8 * &(r * &a.square()),
            &(r * r_prev) * r_next,
            -(4 * &(&(&a_r + (nn + 1)) * r_next)),
            -(4 * &(&(&a_r + nn) * r_prev)),
        ],
        r.prec(),
    );
    relative(&[lhs.clone(), -bracket.square()])
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Branch {
    Plus,
    Minus,
}

#[derive(Debug, Clone)]
pub struct BranchSelection {
    pub sign: Branch,
    /// Relative mismatch of the selected root.
    pub matched: Real,
    /// Relative mismatch of the other root.
    pub other: Real,
    /// Relative residual of `x₊ x₋ = -(n/2) R_n R_{n-1}`.
    pub vieta: Real,
}

/// Pick the sign in `r_n = (RR ± √RR √(8n + RR)) / 4`, `RR = R_n R_{n-1}`,
/// that reproduces `r_true` to within `tolerance` (relative).
pub fn branch_select_rrq(
    big_r: &Real,
    big_r_prev: &Real,
    n: usize,
    r_true: &Real,
    tolerance: &Real,
) -> Result<BranchSelection> {
    let rr = big_r * big_r_prev;
    if !rr.is_positive() {
        return Err(Error::Domain("R_n R_{n-1} must be positive".into()));
    }
    let root = &rr.sqrt() * &(&rr + (8 * n as i64)).sqrt();
    let plus = (&rr + &root) / 4;
    let minus = (&rr - &root) / 4;
    let mismatch = |x: &Real| relative(&[x.clone(), -r_true]);
    let (mp, mm) = (mismatch(&plus), mismatch(&minus));
    let vieta = relative(&[&plus * &minus, &rr * &Real::ratio(n as i64, 2, rr.prec())]);
    let (sign, matched, other) = if mp <= mm {
        (Branch::Plus, mp, mm)
    } else {
        (Branch::Minus, mm, mp)
    };
    if matched > *tolerance {
        return Err(Error::BranchInconsistency {
            n,
            plus: mismatch(&plus).to_sci(6),
            minus: mismatch(&minus).to_sci(6),
        });
    }
    Ok(BranchSelection {
        sign,
        matched,
        other,
        vieta,
    })
}

/// Discrete-suite residuals for `n = 1 ..= n_last`; `states` must run
/// consecutively from 0 to at least `n_last + 1`. When `orbit` is given its
/// entries are compared with the direct `r_n`.
pub fn residual_discrete(
    states: &[LadderState],
    n_last: usize,
    orbit: Option<&DiscreteOrbit>,
    threshold: f64,
    tol: &Tolerances,
) -> Result<ResidualReport> {
    if states.len() < n_last + 2 || states.iter().enumerate().any(|(i, s)| s.n != i) {
        return Err(Error::InvalidInput(format!(
            "discrete checks up to n = {n_last} need consecutive states 0..={}",
            n_last + 1
        )));
    }
    let a = &states[0].a;
    if !a.is_positive() {
        return Err(Error::Domain("discrete checks need a > 0".into()));
    }
    let mut rep = ResidualReport::new();
    if let Some(orbit) = orbit {
        for (n, (it, st)) in orbit.r_seq.iter().zip(states).enumerate().take(n_last + 1) {
            let err = if st.r.is_zero() {
                it.abs()
            } else {
                (it - &st.r).abs() / st.r.abs()
            };
            rep.push(tol, "r_orbit", n, a, err);
        }
    }
    let mut signs = Vec::new();
    for n in 1..=n_last {
        let (p, c, x) = (&states[n - 1], &states[n], &states[n + 1]);
        rep.push(
            tol,
            "r_difference",
            n,
            a,
            residual_rd2(&p.r, &c.r, &x.r, a, n),
        );
        match residual_mdp2(&p.r, &c.r, &x.r, a, n, threshold) {
            Ok(v) => rep.push(tol, "mdp2", n, a, v),
            Err(e) => {
                rep.push(tol, "mdp2", n, a, Real::from_int(1, 64));
                rep.warn(format!("mdp2 at n = {n}: {e}"));
            }
        }
        rep.push(
            tol,
            "sigma_difference",
            n,
            a,
            residual_sd2(&p.sigma, &c.sigma, &x.sigma, a, n),
        );
        rep.push(
            tol,
            "sigma_difference.corrected",
            n,
            a,
            residual_sd2_corrected(&p.sigma, &c.sigma, &x.sigma, a, n),
        );
        rep.push(
            tol,
            "R_difference",
            n,
            a,
            residual_big_r_d2(&p.big_r, &c.big_r, &x.big_r, a, n),
        );
        // Select against an unbounded tolerance so the report carries the actual
        // mismatch; the verdict then comes from the configured tolerance.
        let unbounded = Real::from_f64(f64::MAX, 64);
        match branch_select_rrq(&c.big_r, &p.big_r, n, &c.r, &unbounded) {
            Ok(sel) => {
                if sel.matched > tol.get("r_quadratic") {
                    rep.warn(format!(
                        "branch selection at n = {n}: best branch misses r_{n} by {}",
                        sel.matched.to_sci(6)
                    ));
                } else {
                    signs.push(sel.sign);
                }
                rep.push(tol, "r_quadratic", n, a, sel.matched);
                rep.push(tol, "r_quadratic_vieta", n, a, sel.vieta);
            }
            Err(e) => {
                let nan = Real::from_f64(f64::NAN, 64);
                rep.push(tol, "r_quadratic", n, a, nan.clone());
                rep.push(tol, "r_quadratic_vieta", n, a, nan);
                rep.warn(format!("branch selection at n = {n}: {e}"));
            }
        }
    }
    if let Some(first) = signs.first() {
        if signs.iter().any(|s| s != first) {
            rep.warn(format!(
                "quadratic branch switches with n at a = {}: {signs:?}",
                a.to_sci(8)
            ));
        }
    }
    Ok(rep)
}
