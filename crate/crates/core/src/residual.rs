//! Named residuals with tolerances and verdicts.
//!
//! Every residual is reported in relative form: the identity is written as a
//! sum of terms that must vanish, and the magnitude of the sum is divided by
//! the largest term magnitude.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::precision::Real;

/// Relative residual `|Σ t| / max |t|`; zero when every term is zero.
pub fn relative(terms: &[Real]) -> Real {
    let prec = terms.iter().map(Real::prec).max().unwrap_or(64);
    let scale = Real::max_abs(terms);
    if scale.is_zero() {
        return Real::zero(prec);
    }
    Real::sum(terms, prec).abs() / scale
}

/// Relative residual of a product of factors, each given by its terms.
pub fn relative_product(factors: &[Vec<Real>]) -> Real {
    let prec = factors
        .iter()
        .flat_map(|f| f.iter().map(Real::prec))
        .max()
        .unwrap_or(64);
    let mut out = Real::one(prec);
    for f in factors {
        out *= relative(f);
    }
    out
}

#[derive(Debug, Clone)]
pub struct ResidualEntry {
    pub name: String,
    pub n: usize,
    pub a: Real,
    pub residual: Real,
    pub tolerance: Real,
    pub pass: bool,
}

/// Entries for one or more `(n, a)` cells plus non-fatal observations.
#[derive(Debug, Clone, Default)]
pub struct ResidualReport {
    pub entries: Vec<ResidualEntry>,
    pub warnings: Vec<String>,
}

impl ResidualReport {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(
        &mut self,
        tolerances: &Tolerances,
        name: &str,
        n: usize,
        a: &Real,
        residual: Real,
    ) {
        let tolerance = tolerances.get(name);
        let pass = residual.is_finite() && residual <= tolerance;
        self.entries.push(ResidualEntry {
            name: name.to_string(),
            n,
            a: a.clone(),
            residual,
            tolerance,
            pass,
        });
    }

    pub fn warn(&mut self, message: String) {
        self.warnings.push(message);
    }

    pub fn merge(&mut self, other: ResidualReport) {
        self.entries.extend(other.entries);
        self.warnings.extend(other.warnings);
    }

    pub fn all_pass(&self) -> bool {
        self.entries.iter().all(|e| e.pass)
    }

    pub fn failures(&self) -> impl Iterator<Item = &ResidualEntry> {
        self.entries.iter().filter(|e| !e.pass)
    }

    /// Entries whose name matches exactly.
    pub fn named<'a>(&'a self, name: &'a str) -> impl Iterator<Item = &'a ResidualEntry> + 'a {
        self.entries.iter().filter(move |e| e.name == name)
    }

    /// Largest residual among entries whose name matches.
    pub fn worst(&self, name: &str) -> Option<&ResidualEntry> {
        self.entries
            .iter()
            .filter(|e| e.name == name)
            .max_by(|x, y| {
                x.residual
                    .partial_cmp(&y.residual)
                    .unwrap_or(std::cmp::Ordering::Equal)
            })
    }
}

/// Residual name → tolerance, with per-suite defaults, explicit overrides
/// and a `*` wildcard override.
#[derive(Debug, Clone, Default)]
pub struct Tolerances {
    overrides: BTreeMap<String, Real>,
}

const CONTINUOUS: &[&str] = &[
    "dlog_h",
    "dlog_beta",
    "dlog_D",
    "dp",
    "dbeta",
    "riccati_r",
    "riccati_R",
    "painleve4",
    "painleve4_reflected",
    "sigma_prime",
    "sigma_elim",
    "sigma_linear_1",
    "sigma_linear_2",
    "sigma_product",
    "sigma_form",
    "chazy",
    "discriminant",
    "sigma_prob_link",
];

impl Tolerances {
    pub fn new() -> Self {
        Self::default()
    }

    /// Override one name, or every name with `*`.
    pub fn set(&mut self, name: &str, value: Real) {
        self.overrides.insert(name.to_string(), value);
    }

    /// Parse `name=value`.
    pub fn set_from_str(&mut self, spec: &str) -> Result<()> {
        let (name, value) = spec
            .split_once('=')
            .ok_or_else(|| Error::InvalidInput(format!("tolerance `{spec}` is not name=value")))?;
        let value = Real::parse(value.trim(), 128)?;
        if value.is_negative() {
            return Err(Error::InvalidInput(format!(
                "negative tolerance in `{spec}`"
            )));
        }
        self.set(name.trim(), value);
        Ok(())
    }

    pub fn get(&self, name: &str) -> Real {
        if let Some(v) = self.overrides.get(name) {
            return v.clone();
        }
        if let Some(v) = self.overrides.get("*") {
            return v.clone();
        }
        Real::parse(&format!("1e-{}", default_exponent(name)), 128).expect("static literal")
    }
}

fn default_exponent(name: &str) -> u32 {
    let base = name.split('.').next().unwrap_or(name);
    match base {
        "r_orbit" => 25,
        "prob_routes" => 12,
        "prob_erfc" => 30,
        b if CONTINUOUS.contains(&b) => 20,
        _ => 30,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn relative_of_cancelling_terms() {
        let t = [Real::from_int(3, 128), Real::from_int(-3, 128)];
        assert!(relative(&t).is_zero());
        let t = [Real::from_int(4, 128), Real::from_int(-3, 128)];
        assert_eq!(relative(&t).to_f64(), 0.25);
        assert!(relative(&[Real::zero(64)]).is_zero());
    }

    #[test]
    fn tolerance_defaults_and_overrides() {
        let mut tol = Tolerances::new();
        assert!((tol.get("r_ladder").log10_abs() + 30.0).abs() < 1e-9);
        assert!((tol.get("chazy.corrected").log10_abs() + 20.0).abs() < 1e-9);
        assert!((tol.get("prob_routes").log10_abs() + 12.0).abs() < 1e-9);
        tol.set_from_str("chazy=1e-5").unwrap();
        assert!((tol.get("chazy").log10_abs() + 5.0).abs() < 1e-9);
        tol.set_from_str("*=1e-99").unwrap();
        assert!((tol.get("r_ladder").log10_abs() + 99.0).abs() < 1e-9);
        assert!((tol.get("chazy").log10_abs() + 5.0).abs() < 1e-9);
        assert!(tol.set_from_str("chazy").is_err());
        assert!(tol.set_from_str("chazy=-1").is_err());
    }

    #[test]
    fn report_verdicts() {
        let tol = Tolerances::new();
        let a = Real::one(128);
        let mut rep = ResidualReport::new();
        rep.push(&tol, "r_ladder", 1, &a, Real::parse("1e-40", 128).unwrap());
        assert!(rep.all_pass());
        rep.push(&tol, "r_ladder", 2, &a, Real::parse("1e-10", 128).unwrap());
        assert!(!rep.all_pass());
        assert_eq!(rep.failures().count(), 1);
        assert_eq!(rep.worst("r_ladder").unwrap().n, 2);
    }
}
