//! Python bindings. Every real number crosses the boundary as a decimal
//! string so no precision is lost; wrap them in `mpmath.mpf` or `float`
//! as needed.

use gue_gap_core::continuous::{
    default_grid_bits, residual_continuous, AGrid, DEFAULT_FD_TOLERANCE,
};
use gue_gap_core::discrete::{degeneracy_threshold, iterate_rd2, residual_discrete};
use gue_gap_core::ladder::{
    default_z_samples, ladder_states, residual_identities, residual_supplementary,
};
use gue_gap_core::{Real, ResidualReport, Result as CoreResult, Tolerances};

/// Bits used to hold decimal inputs before rounding to a working precision.
pub const INPUT_BITS: u32 = 4096;

/// Significant digits used when returning values that carry no certificate.
pub const DEFAULT_DIGITS: usize = 40;

pub fn parse(text: &str) -> CoreResult<Real> {
    Real::parse(text.trim(), INPUT_BITS)
}

/// Residual reports for the named suites at one gap value; `n_max` is the
/// highest index checked.
pub fn run_suites(
    a: &Real,
    n_max: usize,
    suites: &[&str],
    policy: &gue_gap_core::PrecisionPolicy,
    fd_h: &Real,
    tol: &Tolerances,
) -> CoreResult<ResidualReport> {
    let mut rep = ResidualReport::new();
    let wants = |s: &str| suites.contains(&s) || suites.contains(&"all");
    if wants("identities") || wants("supplementary") || wants("discrete") {
        let table = gue_gap_core::orthopoly::build_table(a, n_max + 1, policy)?;
        let states = ladder_states(&table)?;
        if wants("identities") {
            rep.merge(residual_identities(&states, n_max, tol)?);
        }
        if wants("supplementary") {
            let z = default_z_samples(&states[0].a);
            for n in 0..=n_max {
                let prev = n.checked_sub(1).map(|k| &states[k]);
                rep.merge(residual_supplementary(
                    prev,
                    &states[n],
                    &states[n + 1],
                    &z,
                    tol,
                )?);
            }
        }
        if wants("discrete") {
            let threshold = degeneracy_threshold(table.certified_digits().unwrap_or(0));
            let orbit = iterate_rd2(&states[0].a, n_max, table.working_bits(), threshold).ok();
            rep.merge(residual_discrete(
                &states,
                n_max,
                orbit.as_ref(),
                threshold,
                tol,
            )?);
        }
    }
    if wants("continuous") {
        let bits = default_grid_bits(n_max + 1, policy);
        let grid = AGrid::build(a, fd_h, n_max + 1, bits)?;
        for n in 1..=n_max {
            rep.merge(residual_continuous(
                &grid,
                n,
                Some(DEFAULT_FD_TOLERANCE),
                tol,
            )?);
        }
    }
    Ok(rep)
}

#[pyo3::pymodule]
mod gue_gap {
    use std::collections::BTreeMap;

    use pyo3::create_exception;
    use pyo3::exceptions::PyValueError;
    use pyo3::prelude::*;

    use gue_gap_core::fredholm::{probability_record, FREDHOLM_BITS};
    use gue_gap_core::ladder::{ladder_state, LadderState as CoreState};
    use gue_gap_core::orthopoly::{build_table, subleading, RecurrenceTable as CoreTable};
    use gue_gap_core::precision::{erfc as core_erfc, upper_incomplete_gamma as core_gamma};
    use gue_gap_core::{Error, Real, Tolerances};

    use super::{parse, run_suites, DEFAULT_DIGITS};

    create_exception!(gue_gap, GapError, PyValueError);

    fn py_err(e: Error) -> PyErr {
        GapError::new_err(e.to_string())
    }

    fn real(text: &str) -> PyResult<Real> {
        parse(text).map_err(py_err)
    }

    /// Working-precision schedule for table builds.
    #[pyclass(module = "gue_gap", from_py_object)]
    #[derive(Clone)]
    struct PrecisionPolicy {
        inner: gue_gap_core::PrecisionPolicy,
    }

    #[pymethods]
    impl PrecisionPolicy {
        #[new]
        #[pyo3(signature = (base_bits=512, bits_per_n=32, target_digits=40, max_bits=16384))]
        fn new(
            base_bits: u32,
            bits_per_n: u32,
            target_digits: u32,
            max_bits: u32,
        ) -> PyResult<Self> {
            let inner = gue_gap_core::PrecisionPolicy {
                base_bits,
                bits_per_n,
                target_certified_digits: target_digits,
                max_bits,
                ..Default::default()
            };
            inner.validate().map_err(py_err)?;
            Ok(PrecisionPolicy { inner })
        }

        #[getter]
        fn base_bits(&self) -> u32 {
            self.inner.base_bits
        }

        #[getter]
        fn bits_per_n(&self) -> u32 {
            self.inner.bits_per_n
        }

        #[getter]
        fn target_digits(&self) -> u32 {
            self.inner.target_certified_digits
        }

        #[getter]
        fn max_bits(&self) -> u32 {
            self.inner.max_bits
        }

        fn __repr__(&self) -> String {
            format!(
                "PrecisionPolicy(base_bits={}, bits_per_n={}, target_digits={}, max_bits={})",
                self.inner.base_bits,
                self.inner.bits_per_n,
                self.inner.target_certified_digits,
                self.inner.max_bits
            )
        }
    }

    fn policy_or_default(policy: Option<PrecisionPolicy>) -> gue_gap_core::PrecisionPolicy {
        policy.map(|p| p.inner).unwrap_or_default()
    }

    /// Ladder quantities at one `(n, a)`.
    #[pyclass(module = "gue_gap", get_all)]
    struct LadderState {
        n: usize,
        a: String,
        big_r: String,
        r: String,
        beta: String,
        sigma: String,
        p: String,
        h: String,
        pn_at_a: String,
    }

    impl LadderState {
        fn from_core(s: &CoreState, digits: usize) -> Self {
            let f = |x: &Real| x.to_sci(digits);
            LadderState {
                n: s.n,
                a: f(&s.a),
                big_r: f(&s.big_r),
                r: f(&s.r),
                beta: f(&s.beta),
                sigma: f(&s.sigma),
                p: f(&s.p),
                h: f(&s.h),
                pn_at_a: f(&s.pn_at_a),
            }
        }
    }

    #[pymethods]
    impl LadderState {
        fn __repr__(&self) -> String {
            format!(
                "LadderState(n={}, a={}, R={}, r={}, sigma={})",
                self.n, self.a, self.big_r, self.r, self.sigma
            )
        }
    }

    /// Certified recurrence coefficients and norms for the gap weight.
    #[pyclass(module = "gue_gap")]
    struct RecurrenceTable {
        inner: CoreTable,
    }

    impl RecurrenceTable {
        fn digits(&self) -> usize {
            self.inner
                .certified_digits()
                .map_or(DEFAULT_DIGITS, |d| d as usize)
        }
    }

    #[pymethods]
    impl RecurrenceTable {
        #[new]
        #[pyo3(signature = (a, n_max, policy=None))]
        fn new(
            py: Python<'_>,
            a: &str,
            n_max: usize,
            policy: Option<PrecisionPolicy>,
        ) -> PyResult<Self> {
            let a = real(a)?;
            let policy = policy_or_default(policy);
            let inner = py
                .detach(|| build_table(&a, n_max, &policy))
                .map_err(py_err)?;
            Ok(RecurrenceTable { inner })
        }

        #[getter]
        fn n_max(&self) -> usize {
            self.inner.n_max()
        }

        #[getter]
        fn certified_digits(&self) -> Option<u32> {
            self.inner.certified_digits()
        }

        #[getter]
        fn working_bits(&self) -> u32 {
            self.inner.working_bits()
        }

        #[getter]
        fn escalations(&self) -> u32 {
            self.inner.escalations()
        }

        fn betas(&self) -> Vec<String> {
            let d = self.digits();
            self.inner.betas().iter().map(|b| b.to_sci(d)).collect()
        }

        fn norms(&self) -> Vec<String> {
            let d = self.digits();
            self.inner.norms().iter().map(|h| h.to_sci(d)).collect()
        }

        fn ladder_state(&self, n: usize) -> PyResult<LadderState> {
            let s = ladder_state(&self.inner, n).map_err(py_err)?;
            Ok(LadderState::from_core(&s, self.digits()))
        }

        /// Coefficient of `x^{n-2}` in `P_n`.
        fn subleading(&self, n: usize) -> PyResult<String> {
            Ok(subleading(&self.inner, n)
                .map_err(py_err)?
                .p
                .to_sci(self.digits()))
        }

        fn __repr__(&self) -> String {
            format!(
                "RecurrenceTable(a={}, n_max={}, certified_digits={:?})",
                self.inner.a().to_sci(12),
                self.inner.n_max(),
                self.inner.certified_digits()
            )
        }
    }

    /// `P(n, a)` by both routes, as a dict of decimal strings. The
    /// determinant route is skipped (value `None`) at `a = 0`.
    #[pyfunction]
    #[pyo3(signature = (n, a, policy=None, digits=40))]
    fn gap_probability(
        py: Python<'_>,
        n: usize,
        a: &str,
        policy: Option<PrecisionPolicy>,
        digits: usize,
    ) -> PyResult<BTreeMap<&'static str, Option<String>>> {
        let a = real(a)?;
        let policy = policy_or_default(policy);
        let rec = py
            .detach(|| probability_record(n, &a, &policy, None, FREDHOLM_BITS))
            .map_err(py_err)?;
        Ok(BTreeMap::from([
            ("p_hankel", Some(rec.p_hankel.to_sci(digits))),
            ("p_fredholm", rec.p_fredholm.map(|p| p.to_sci(digits))),
            ("discrepancy", rec.discrepancy.map(|d| d.to_sci(6))),
        ]))
    }

    /// Residual checks at one gap value. Returns a list of dicts with keys
    /// `name, n, a, residual, tolerance, pass`.
    #[pyfunction]
    #[pyo3(signature = (a, n_max, suites=vec!["identities".to_string()], tolerances=BTreeMap::new(), policy=None, fd_h="1e-8"))]
    fn verify(
        py: Python<'_>,
        a: &str,
        n_max: usize,
        suites: Vec<String>,
        tolerances: BTreeMap<String, String>,
        policy: Option<PrecisionPolicy>,
        fd_h: &str,
    ) -> PyResult<Vec<BTreeMap<&'static str, Py<PyAny>>>> {
        let a = real(a)?;
        let h = real(fd_h)?;
        let mut tol = Tolerances::new();
        for (name, value) in &tolerances {
            tol.set_from_str(&format!("{name}={value}"))
                .map_err(py_err)?;
        }
        let policy = policy_or_default(policy);
        let names: Vec<&str> = suites.iter().map(String::as_str).collect();
        let rep = py
            .detach(|| run_suites(&a, n_max, &names, &policy, &h, &tol))
            .map_err(py_err)?;
        rep.entries
            .iter()
            .map(|e| {
                Ok(BTreeMap::from([
                    (
                        "name",
                        e.name.clone().into_pyobject(py)?.into_any().unbind(),
                    ),
                    ("n", e.n.into_pyobject(py)?.into_any().unbind()),
                    ("a", e.a.to_sci(12).into_pyobject(py)?.into_any().unbind()),
                    (
                        "residual",
                        e.residual.to_sci(6).into_pyobject(py)?.into_any().unbind(),
                    ),
                    (
                        "tolerance",
                        e.tolerance.to_sci(6).into_pyobject(py)?.into_any().unbind(),
                    ),
                    (
                        "pass",
                        e.pass.into_pyobject(py)?.to_owned().into_any().unbind(),
                    ),
                ]))
            })
            .collect()
    }

    #[pyfunction]
    #[pyo3(signature = (x, bits=256))]
    fn erfc(x: &str, bits: u32) -> PyResult<String> {
        let v = core_erfc(&real(x)?, bits).map_err(py_err)?;
        Ok(v.to_sci(gue_gap_core::precision::bits_to_digits(bits) as usize))
    }

    #[pyfunction]
    #[pyo3(signature = (s, x, bits=256))]
    fn upper_incomplete_gamma(s: &str, x: &str, bits: u32) -> PyResult<String> {
        let v = core_gamma(&real(s)?, &real(x)?, bits).map_err(py_err)?;
        Ok(v.to_sci(gue_gap_core::precision::bits_to_digits(bits) as usize))
    }

    #[pymodule_init]
    fn init(m: &Bound<'_, PyModule>) -> PyResult<()> {
        m.add("GapError", m.py().get_type::<GapError>())?;
        m.add("__version__", env!("CARGO_PKG_VERSION"))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use gue_gap_core::PrecisionPolicy;

    #[test]
    fn suites_report_named_entries() {
        let a = parse("1").unwrap();
        let h = parse("1e-8").unwrap();
        let rep = run_suites(
            &a,
            3,
            &["identities", "discrete"],
            &PrecisionPolicy::default(),
            &h,
            &Tolerances::new(),
        )
        .unwrap();
        assert!(rep.named("r_ladder").count() > 0);
        assert!(rep.named("mdp2").count() > 0);
        assert_eq!(rep.named("chazy").count(), 0);
    }

    #[test]
    fn zero_gap_refused_by_suites() {
        let a = parse("0").unwrap();
        let h = parse("1e-8").unwrap();
        assert!(run_suites(
            &a,
            3,
            &["identities"],
            &PrecisionPolicy::default(),
            &h,
            &Tolerances::new()
        )
        .is_err());
    }
}
