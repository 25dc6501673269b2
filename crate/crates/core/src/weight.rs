//! The gap-deformed Hermite weight `w(x) = e^{-x²} χ(|x| > a)`, its power
//! moments and the closed-form seeds `h_0(a)`, `R_0(a)`, `r_1(a)`.

use crate::error::{Error, Result};
use crate::precision::{erfc, upper_incomplete_gamma, Real};

/// Weight `e^{-x²}` restricted to `(-∞, -a] ∪ [a, ∞)`; `a = 0` is the
/// undeformed Hermite weight.
#[derive(Debug, Clone)]
pub struct GapWeight {
    a: Real,
    prec: u32,
}

impl GapWeight {
    pub fn new(a: &Real, prec: u32) -> Result<GapWeight> {
        if a.is_negative() || !a.is_finite() {
            return Err(Error::Domain(format!(
                "gap half-width must be finite and >= 0, got {}",
                a.to_sci(12)
            )));
        }
        Ok(GapWeight {
            a: a.with_prec(prec),
            prec,
        })
    }

    pub fn a(&self) -> &Real {
        &self.a
    }

    pub fn prec(&self) -> u32 {
        self.prec
    }

    /// `w_0(a) = e^{-a²}`.
    pub fn edge_weight(&self) -> Real {
        (-self.a.square()).exp()
    }
}

/// `μ_k(a) = ∫ x^k w(x) dx`: zero for odd `k`, `Γ((k+1)/2, a²)` for even `k`.
pub fn moment(k: usize, w: &GapWeight) -> Result<Real> {
    if k % 2 == 1 {
        return Ok(Real::zero(w.prec));
    }
    let s = Real::ratio(k as i64 + 1, 2, w.prec);
    upper_incomplete_gamma(&s, &w.a.square(), w.prec)
}

/// `μ_0 ..= μ_{k_max}` in one pass. Only `μ_0` goes through the incomplete
/// gamma evaluation; the even moments then follow from the upward recurrence
/// `Γ(s + 1, x) = s Γ(s, x) + x^s e^{-x}`, whose terms are all positive.
pub fn moments(w: &GapWeight, k_max: usize) -> Result<Vec<Real>> {
    let prec = w.prec;
    let work = prec + 32;
    let x = w.a.with_prec(work).square();
    let mut even = upper_incomplete_gamma(&Real::ratio(1, 2, work), &x, work)?;
    // x^{m + 1/2} e^{-x} for m = 0, built incrementally.
    let mut power = &w.a.with_prec(work) * &(-&x).exp();
    let mut out = Vec::with_capacity(k_max + 1);
    for k in 0..=k_max {
        if k % 2 == 1 {
            out.push(Real::zero(prec));
            continue;
        }
        out.push(even.with_prec(prec));
        let m = (k / 2) as i64;
        // s = m + 1/2
        even = &even * &Real::ratio(2 * m + 1, 2, work) + &power;
        power *= &x;
    }
    Ok(out)
}

/// `R_0(a) = 2 e^{-a²} / (√π erfc(a)) = e^{-a²} / ∫_a^∞ e^{-x²} dx`.
pub fn seed_big_r0(w: &GapWeight) -> Result<Real> {
    let work = w.prec + 16;
    let a = w.a.with_prec(work);
    let num = 2 * (-a.square()).exp();
    let den = Real::sqrt_pi(work) * erfc(&a, work)?;
    Ok((num / den).with_prec(w.prec))
}

/// `r_1(a) = a R_0(a)`, the forward-iteration seed (zero at `a = 0`).
pub fn seed_r1(w: &GapWeight) -> Result<Real> {
    Ok(&w.a * &seed_big_r0(w)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::precision::agreement_digits;

    fn weight(a: &str) -> GapWeight {
        GapWeight::new(&Real::parse(a, 400).unwrap(), 400).unwrap()
    }

    #[test]
    fn odd_moments_vanish() {
        for a in ["0", "0.5", "2"] {
            assert!(moment(1, &weight(a)).unwrap().is_zero());
            assert!(moment(7, &weight(a)).unwrap().is_zero());
        }
    }

    #[test]
    fn zeroth_moment_at_zero_is_sqrt_pi() {
        let m = moment(0, &weight("0")).unwrap();
        assert!(agreement_digits(&m, &Real::sqrt_pi(400)) >= 118);
    }

    #[test]
    fn batch_matches_single_evaluation() {
        for a in ["0", "0.3", "1", "2.5"] {
            let w = weight(a);
            let batch = moments(&w, 16).unwrap();
            for (k, m) in batch.iter().enumerate() {
                let single = moment(k, &w).unwrap();
                if k % 2 == 1 {
                    assert!(m.is_zero());
                } else {
                    assert!(agreement_digits(m, &single) >= 110, "a={a} k={k}");
                }
            }
        }
    }

    #[test]
    fn negative_gap_rejected() {
        assert!(GapWeight::new(&Real::from_int(-1, 64), 128).is_err());
    }

    #[test]
    fn seeds_at_zero() {
        let w = weight("0");
        let r0 = seed_big_r0(&w).unwrap();
        let expected = Real::from_int(2, 400) / Real::sqrt_pi(400);
        assert!(agreement_digits(&r0, &expected) >= 118);
        assert!(seed_r1(&w).unwrap().is_zero());
    }

    #[test]
    fn seed_r1_is_a_times_r0() {
        let w = weight("1.25");
        let lhs = seed_r1(&w).unwrap();
        let rhs = w.a() * &seed_big_r0(&w).unwrap();
        assert_eq!(lhs, rhs);
    }
}
