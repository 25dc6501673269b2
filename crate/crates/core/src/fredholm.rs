//! Gap probability `P(n, a)` by two independent routes: the Hankel ratio
//! `∏ h_j(a) / h_j(0)` and the finite-rank determinant `det(I - G)` where
//! `G_lm = ∫_{-a}^{a} φ_l φ_m` over orthonormal Hermite functions.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::linalg::determinant;
use crate::orthopoly::{build_table, hankel_det};
use crate::precision::{PrecisionPolicy, Real};
use crate::quadrature::GaussLegendre;

/// Default working precision for the determinant route.
pub const FREDHOLM_BITS: u32 = 512;

/// Relative disagreement between quadrature orders `q` and `2q` above which
/// the overlap determinant is rejected.
pub const QUADRATURE_TOLERANCE: f64 = 1e-30;

/// `h_j(0) = j! √π / 2^j`, the monic Hermite norms.
pub fn hermite_norm_at_zero(j: usize, prec: u32) -> Real {
    let mut v = Real::sqrt_pi(prec);
    for k in 1..=j as i64 {
        v = v * k / 2;
    }
    v
}

/// `ln D_n(0) = Σ_{j<n} ln h_j(0)`.
pub fn log_hankel_at_zero(n: usize, prec: u32) -> Real {
    let mut acc = Real::zero(prec);
    for j in 0..n {
        acc += hermite_norm_at_zero(j, prec).ln();
    }
    acc
}

/// `φ_0 ..= φ_{l_max}` at `x` by the orthonormal recurrence
/// `φ_{k+1} = √(2/(k+1)) x φ_k - √(k/(k+1)) φ_{k-1}`.
pub fn orthonormal_hermite_all(l_max: usize, x: &Real, prec: u32) -> Vec<Real> {
    let x = x.with_prec(prec);
    let pi = Real::pi(prec);
    let phi0 = &(-(x.square() / 2)).exp() / &pi.sqrt().sqrt();
    let mut out = Vec::with_capacity(l_max + 1);
    out.push(phi0);
    if l_max >= 1 {
        let phi1 = &(&Real::from_int(2, prec).sqrt() * &x) * &out[0];
        out.push(phi1);
    }
    for k in 1..l_max {
        let kk = k as i64;
        let c1 = Real::ratio(2, kk + 1, prec).sqrt();
        let c0 = Real::ratio(kk, kk + 1, prec).sqrt();
        let next = &(&(&c1 * &x) * &out[k]) - &(&c0 * &out[k - 1]);
        out.push(next);
    }
    out
}

pub fn orthonormal_hermite_eval(l: usize, x: &Real, prec: u32) -> Real {
    orthonormal_hermite_all(l, x, prec).swap_remove(l)
}

/// `G_lm = ∫_{-a}^{a} φ_l φ_m dx` for `l, m < n`.
#[derive(Debug, Clone)]
pub struct OverlapMatrix {
    pub n: usize,
    pub a: Real,
    pub order: usize,
    pub g: Vec<Vec<Real>>,
}

impl OverlapMatrix {
    pub fn build(n: usize, a: &Real, order: usize, prec: u32) -> Result<OverlapMatrix> {
        if n == 0 {
            return Err(Error::InvalidInput("overlap matrix needs n >= 1".into()));
        }
        let rule = GaussLegendre::new(order, prec)?;
        let a = a.with_prec(prec);
        let points = rule.mapped(&-&a, &a);
        let phis: Vec<Vec<Real>> = points
            .par_iter()
            .map(|(x, _)| orthonormal_hermite_all(n - 1, x, prec))
            .collect();
        let upper: Vec<Vec<Real>> = (0..n)
            .into_par_iter()
            .map(|l| {
                (l..n)
                    .map(|m| {
                        let mut acc = Real::zero(prec);
                        for ((_, w), phi) in points.iter().zip(&phis) {
                            acc += &(w * &phi[l]) * &phi[m];
                        }
                        acc
                    })
                    .collect()
            })
            .collect();
        let rows: Vec<Vec<Real>> = (0..n)
            .map(|l| {
                (0..n)
                    .map(|m| {
                        let (i, j) = if l <= m { (l, m) } else { (m, l) };
                        upper[i][j - i].clone()
                    })
                    .collect()
            })
            .collect();
        Ok(OverlapMatrix {
            n,
            a,
            order,
            g: rows,
        })
    }

    /// `det(I - G)`.
    pub fn gap_determinant(&self) -> Real {
        let prec = self.a.prec();
        let m: Vec<Vec<Real>> = self
            .g
            .iter()
            .enumerate()
            .map(|(l, row)| {
                row.iter()
                    .enumerate()
                    .map(|(k, v)| if k == l { 1 - v } else { -v })
                    .map(|v| v.with_prec(prec))
                    .collect()
            })
            .collect();
        determinant(m)
    }
}

pub fn default_quad_order(n: usize) -> usize {
    40 + 4 * n
}

/// `det(I - G)` at quadrature orders `q` and `2q`; the `2q` value is returned
/// once the two agree to [`QUADRATURE_TOLERANCE`].
pub fn gap_probability_fredholm(n: usize, a: &Real, quad_order: usize, prec: u32) -> Result<Real> {
    if !a.is_positive() {
        return Err(Error::Domain("determinant route needs a > 0".into()));
    }
    let coarse = OverlapMatrix::build(n, a, quad_order, prec)?.gap_determinant();
    let fine = OverlapMatrix::build(n, a, 2 * quad_order, prec)?.gap_determinant();
    let discrepancy = (&coarse - &fine).abs() / fine.abs();
    if !(discrepancy.to_f64() <= QUADRATURE_TOLERANCE) {
        return Err(Error::QuadratureNonConvergence {
            order: quad_order,
            doubled: 2 * quad_order,
            discrepancy: discrepancy.to_sci(6),
        });
    }
    Ok(fine)
}

/// `∏_{j<n} h_j(a) / h_j(0)`.
pub fn gap_probability_hankel(n: usize, a: &Real, policy: &PrecisionPolicy) -> Result<Real> {
    if n == 0 {
        return Err(Error::InvalidInput("gap probability needs n >= 1".into()));
    }
    let table = build_table(a, n.max(2) - 1, policy)?;
    let prec = table.working_bits();
    let d = hankel_det(&table, n)?;
    let mut d0 = Real::one(prec);
    for j in 0..n {
        d0 *= hermite_norm_at_zero(j, prec);
    }
    Ok(d / d0)
}

#[derive(Debug, Clone)]
pub struct ProbabilityRecord {
    pub n: usize,
    pub a: Real,
    pub p_hankel: Real,
    /// `None` at `a = 0`, where the determinant route is skipped.
    pub p_fredholm: Option<Real>,
    pub discrepancy: Option<Real>,
}

pub fn probability_record(
    n: usize,
    a: &Real,
    policy: &PrecisionPolicy,
    quad_order: Option<usize>,
    prec: u32,
) -> Result<ProbabilityRecord> {
    let p_hankel = gap_probability_hankel(n, a, policy)?;
    let (p_fredholm, discrepancy) = if a.is_zero() {
        (None, None)
    } else {
        let q = quad_order.unwrap_or_else(|| default_quad_order(n));
        let pf = gap_probability_fredholm(n, a, q, prec)?;
        let d = (&p_hankel - &pf).abs() / p_hankel.abs();
        (Some(pf), Some(d))
    };
    Ok(ProbabilityRecord {
        n,
        a: a.clone(),
        p_hankel,
        p_fredholm,
        discrepancy,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::precision::{agreement_digits, erf, erfc};

    #[test]
    fn low_order_hermite_functions() {
        let prec = 256;
        let quarter_pi = Real::pi(prec).sqrt().sqrt();
        let phi0 = orthonormal_hermite_eval(0, &Real::zero(prec), prec);
        assert!(agreement_digits(&phi0, &quarter_pi.recip()) >= 70);
        let one = Real::one(prec);
        let phi1 = orthonormal_hermite_eval(1, &one, prec);
        let expected =
            &(&Real::from_int(2, prec).sqrt() / &quarter_pi) * &Real::ratio(-1, 2, prec).exp();
        assert!(agreement_digits(&phi1, &expected) >= 70);
    }

    #[test]
    fn normalisation_by_quadrature() {
        let prec = 256;
        let lim = Real::from_int(12, prec);
        let rule = GaussLegendre::new(60, prec).unwrap();
        let norm = rule.integrate_composite(&-&lim, &lim, 8, |x| {
            orthonormal_hermite_eval(5, x, prec).square()
        });
        assert!(agreement_digits(&norm, &Real::one(prec)) >= 30);
    }

    #[test]
    fn single_function_overlap_is_erf() {
        let a = Real::parse("0.9", 512).unwrap();
        let g = OverlapMatrix::build(1, &a, 44, 512).unwrap();
        assert!(agreement_digits(&g.g[0][0], &erf(&a, 512).unwrap()) >= 40);
        let p = gap_probability_fredholm(1, &a, 44, 512).unwrap();
        assert!(agreement_digits(&p, &erfc(&a, 512).unwrap()) >= 40);
    }

    #[test]
    fn overlap_parity_and_symmetry() {
        let a = Real::one(512);
        let g = OverlapMatrix::build(6, &a, 64, 512).unwrap();
        for l in 0..6 {
            assert!(g.g[l][l].is_positive());
            for m in 0..6 {
                assert_eq!(g.g[l][m], g.g[m][l]);
                if (l + m) % 2 == 1 {
                    assert!(g.g[l][m].is_zero() || g.g[l][m].log10_abs() < -100.0);
                }
            }
        }
    }

    #[test]
    fn hankel_route_closed_forms() {
        let policy = PrecisionPolicy::default();
        let zero = Real::zero(256);
        assert!(
            agreement_digits(
                &gap_probability_hankel(5, &zero, &policy).unwrap(),
                &Real::one(256)
            ) >= 70
        );
        let a = Real::one(512);
        let p1 = gap_probability_hankel(1, &a, &policy).unwrap();
        assert!(agreement_digits(&p1, &erfc(&a, 512).unwrap()) >= 100);
    }

    #[test]
    fn routes_agree() {
        let a = Real::parse("0.8", 512).unwrap();
        let rec = probability_record(4, &a, &PrecisionPolicy::default(), None, 512).unwrap();
        assert!(rec.discrepancy.unwrap().to_f64() < 1e-12);
        let rec0 = probability_record(5, &Real::zero(256), &PrecisionPolicy::default(), None, 512)
            .unwrap();
        assert!(rec0.p_fredholm.is_none());
    }

    #[test]
    fn coarse_quadrature_is_reported() {
        let a = Real::from_int(3, 512);
        let err = gap_probability_fredholm(8, &a, 4, 512).unwrap_err();
        assert!(matches!(err, Error::QuadratureNonConvergence { .. }));
    }
}
