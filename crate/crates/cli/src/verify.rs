use std::collections::BTreeSet;
use std::io::Write;

use rayon::prelude::*;
use serde::Serialize;

use gue_gap_core::continuous::{
    default_grid_bits, residual_continuous, AGrid, DEFAULT_FD_TOLERANCE,
};
use gue_gap_core::discrete::{degeneracy_threshold, iterate_rd2, residual_discrete};
use gue_gap_core::fredholm::{probability_record, FREDHOLM_BITS};
use gue_gap_core::ladder::{
    default_z_samples, ladder_states, residual_identities, residual_supplementary,
};
use gue_gap_core::orthopoly::build_table;
use gue_gap_core::precision::erfc;
use gue_gap_core::{PrecisionPolicy, Real, ResidualEntry, ResidualReport, Tolerances};

use crate::config::{canonical, Forms, RunConfig, Suite};
use crate::CliError;

pub const RESIDUAL_DIGITS: usize = 6;

pub struct VerifyPlan<'a> {
    pub grid: &'a [Real],
    pub n_max: usize,
    pub policy: &'a PrecisionPolicy,
    pub fd_h: &'a Real,
    pub tolerances: &'a Tolerances,
    pub suites: Vec<Suite>,
}

/// Result of running the suites for one gap value.
pub struct CellOutcome {
    pub report: ResidualReport,
    pub errors: Vec<String>,
}

fn table_suites(plan: &VerifyPlan, a: &Real, out: &mut CellOutcome) -> gue_gap_core::Result<()> {
    let wants = |s: Suite| plan.suites.contains(&s);
    if !(wants(Suite::Identities) || wants(Suite::Supplementary) || wants(Suite::Discrete)) {
        return Ok(());
    }
    let n_last = plan.n_max;
    let table = build_table(a, n_last + 1, plan.policy)?;
    let states = ladder_states(&table)?;
    let tol = plan.tolerances;
    if wants(Suite::Identities) {
        out.report.merge(residual_identities(&states, n_last, tol)?);
    }
    if wants(Suite::Supplementary) {
        let z = default_z_samples(&states[0].a);
        for n in 0..=n_last {
            let prev = n.checked_sub(1).map(|k| &states[k]);
            out.report.merge(residual_supplementary(
                prev,
                &states[n],
                &states[n + 1],
                &z,
                tol,
            )?);
        }
    }
    if wants(Suite::Discrete) {
        let threshold = degeneracy_threshold(table.certified_digits().unwrap_or(0));
        let orbit = iterate_rd2(&states[0].a, n_last, table.working_bits(), threshold);
        if let Err(e) = &orbit {
            out.errors
                .push(format!("discrete orbit at a = {}: {e}", canonical(a)));
        }
        out.report.merge(residual_discrete(
            &states,
            n_last,
            orbit.as_ref().ok(),
            threshold,
            tol,
        )?);
    }
    Ok(())
}

fn continuous_suite(
    plan: &VerifyPlan,
    a: &Real,
    out: &mut CellOutcome,
) -> gue_gap_core::Result<()> {
    let bits = default_grid_bits(plan.n_max + 1, plan.policy);
    let grid = AGrid::build(a, plan.fd_h, plan.n_max + 1, bits)?;
    for n in 1..=plan.n_max {
        match residual_continuous(&grid, n, Some(DEFAULT_FD_TOLERANCE), plan.tolerances) {
            Ok(rep) => out.report.merge(rep),
            Err(e) => out
                .errors
                .push(format!("continuous at n = {n}, a = {}: {e}", canonical(a))),
        }
    }
    Ok(())
}

fn oracle_suite(plan: &VerifyPlan, a: &Real, out: &mut CellOutcome) {
    for n in 1..=plan.n_max.max(1) {
        match probability_record(n, a, plan.policy, None, FREDHOLM_BITS) {
            Ok(rec) => {
                let a_work = a.with_prec(FREDHOLM_BITS);
                if let Some(d) = rec.discrepancy {
                    out.report
                        .push(plan.tolerances, "prob_routes", n, &a_work, d);
                }
                if n == 1 {
                    match erfc(&a_work, FREDHOLM_BITS) {
                        Ok(exact) => {
                            let mut worst = (&rec.p_hankel - &exact).abs() / &exact;
                            if let Some(pf) = &rec.p_fredholm {
                                worst = worst.max((pf - &exact).abs() / &exact);
                            }
                            out.report
                                .push(plan.tolerances, "prob_erfc", n, &a_work, worst);
                        }
                        Err(e) => out
                            .errors
                            .push(format!("erfc at a = {}: {e}", canonical(a))),
                    }
                }
            }
            Err(e) => out
                .errors
                .push(format!("oracle at n = {n}, a = {}: {e}", canonical(a))),
        }
    }
}

fn run_cell(plan: &VerifyPlan, a: &Real) -> CellOutcome {
    let mut out = CellOutcome {
        report: ResidualReport::new(),
        errors: Vec::new(),
    };
    if let Err(e) = table_suites(plan, a, &mut out) {
        out.errors
            .push(format!("table suites at a = {}: {e}", canonical(a)));
    }
    if plan.suites.contains(&Suite::Continuous) {
        if let Err(e) = continuous_suite(plan, a, &mut out) {
            out.errors
                .push(format!("continuous at a = {}: {e}", canonical(a)));
        }
    }
    if plan.suites.contains(&Suite::Oracle) {
        oracle_suite(plan, a, &mut out);
    }
    out
}

/// Run every requested suite over the grid; cells are merged in grid order.
pub fn run(plan: &VerifyPlan) -> CellOutcome {
    let cells: Vec<CellOutcome> = plan.grid.par_iter().map(|a| run_cell(plan, a)).collect();
    let mut all = CellOutcome {
        report: ResidualReport::new(),
        errors: Vec::new(),
    };
    for c in cells {
        all.report.merge(c.report);
        all.errors.extend(c.errors);
    }
    all
}

/// Keep the requested variants of equations that have a `.corrected` companion.
pub fn select_forms(entries: &[ResidualEntry], forms: Forms) -> Vec<&ResidualEntry> {
    let corrected: BTreeSet<&str> = entries
        .iter()
        .filter_map(|e| e.name.strip_suffix(".corrected"))
        .collect();
    entries
        .iter()
        .filter(|e| match forms {
            Forms::Both => true,
            Forms::Printed => !e.name.ends_with(".corrected"),
            Forms::Corrected => !corrected.contains(e.name.as_str()),
        })
        .collect()
}

#[derive(Serialize)]
pub struct JsonEntry {
    pub name: String,
    pub n: usize,
    pub a: String,
    pub residual: String,
    pub tolerance: String,
    pub pass: bool,
}

impl From<&ResidualEntry> for JsonEntry {
    fn from(e: &ResidualEntry) -> Self {
        JsonEntry {
            name: e.name.clone(),
            n: e.n,
            a: canonical(&e.a),
            residual: e.residual.to_sci(RESIDUAL_DIGITS),
            tolerance: e.tolerance.to_sci(RESIDUAL_DIGITS),
            pass: e.pass,
        }
    }
}

pub fn write_json(out: &mut dyn Write, entries: &[&ResidualEntry]) -> Result<(), CliError> {
    let rows: Vec<JsonEntry> = entries.iter().map(|e| JsonEntry::from(*e)).collect();
    serde_json::to_writer_pretty(&mut *out, &rows)?;
    writeln!(out)?;
    Ok(())
}

pub fn write_csv(
    out: &mut dyn Write,
    config: &RunConfig,
    entries: &[&ResidualEntry],
) -> Result<(), CliError> {
    writeln!(out, "{}", config.header())?;
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["name", "n", "a", "residual", "tolerance", "pass"])?;
    for e in entries {
        let j = JsonEntry::from(*e);
        w.write_record([
            j.name,
            j.n.to_string(),
            j.a,
            j.residual,
            j.tolerance,
            j.pass.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn entry(name: &str) -> ResidualEntry {
        ResidualEntry {
            name: name.into(),
            n: 1,
            a: Real::one(64),
            residual: Real::zero(64),
            tolerance: Real::one(64),
            pass: true,
        }
    }

    #[test]
    fn form_selection() {
        let entries = vec![entry("sum_R"), entry("sum_R.corrected"), entry("r_ladder")];
        let names = |f| -> Vec<String> {
            select_forms(&entries, f)
                .iter()
                .map(|e| e.name.clone())
                .collect()
        };
        assert_eq!(names(Forms::Printed), ["sum_R", "r_ladder"]);
        assert_eq!(names(Forms::Corrected), ["sum_R.corrected", "r_ladder"]);
        assert_eq!(names(Forms::Both).len(), 3);
    }
}
