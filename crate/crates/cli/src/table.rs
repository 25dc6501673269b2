use std::io::Write;

use rayon::prelude::*;

use gue_gap_core::fredholm::hermite_norm_at_zero;
use gue_gap_core::ladder::ladder_states_per_cell;
use gue_gap_core::orthopoly::{build_table, edge_values};
use gue_gap_core::{PrecisionPolicy, Real};

use crate::config::{canonical, RunConfig};
use crate::CliError;

pub const COLUMNS: [&str; 11] = [
    "n", "a", "beta", "h", "Pn_at_a", "p", "R", "r", "sigma", "prob", "status",
];

/// One CSV row, numbers already formatted.
#[derive(Debug, Clone, PartialEq)]
pub struct Row {
    pub n: usize,
    pub a: String,
    pub values: Option<[String; 8]>,
    pub status: String,
}

impl Row {
    fn record(&self) -> Vec<String> {
        let mut out = vec![self.n.to_string(), self.a.clone()];
        match &self.values {
            Some(v) => out.extend(v.iter().cloned()),
            None => out.extend(std::iter::repeat_n(String::new(), 8)),
        }
        out.push(self.status.clone());
        out
    }
}

fn failed_rows(a: &str, n_max: usize, status: String) -> Vec<Row> {
    (0..=n_max)
        .map(|n| Row {
            n,
            a: a.to_string(),
            values: None,
            status: status.clone(),
        })
        .collect()
}

/// Rows `n = 0 ..= n_max` for one gap value. Failures are recorded in the
/// status column rather than aborting the sweep.
pub fn rows_for(a: &Real, n_max: usize, policy: &PrecisionPolicy, max_digits: u32) -> Vec<Row> {
    let a_text = canonical(a);
    let table = match build_table(a, n_max.max(1), policy) {
        Ok(t) => t,
        Err(e) => return failed_rows(&a_text, n_max, format!("error: {e}")),
    };
    let digits = table.certified_digits().unwrap_or(0).min(max_digits).max(1) as usize;
    let prec = table.working_bits();
    let edges = edge_values(&table);
    let states = ladder_states_per_cell(&table);
    let mut prob = Real::one(prec);
    let mut rows = Vec::with_capacity(n_max + 1);
    for (n, state) in states.into_iter().enumerate().take(n_max + 1) {
        let fmt = |x: &Real| x.to_sci(digits);
        let row = match state {
            Ok(s) => Row {
                n,
                a: a_text.clone(),
                values: Some([
                    fmt(&s.beta),
                    fmt(&s.h),
                    fmt(&edges[n]),
                    fmt(&s.p),
                    fmt(&s.big_r),
                    fmt(&s.r),
                    fmt(&s.sigma),
                    fmt(&prob),
                ]),
                status: "ok".into(),
            },
            Err(e) => Row {
                n,
                a: a_text.clone(),
                values: None,
                status: format!("error: {e}"),
            },
        };
        rows.push(row);
        prob = &prob * &(table.h(n) / &hermite_norm_at_zero(n, prec));
    }
    rows
}

pub fn sweep(grid: &[Real], n_max: usize, policy: &PrecisionPolicy, max_digits: u32) -> Vec<Row> {
    let per_a: Vec<Vec<Row>> = grid
        .par_iter()
        .map(|a| rows_for(a, n_max, policy, max_digits))
        .collect();
    per_a.into_iter().flatten().collect()
}

pub fn write_csv(out: &mut dyn Write, config: &RunConfig, rows: &[Row]) -> Result<(), CliError> {
    writeln!(out, "{}", config.header())?;
    let mut w = csv::Writer::from_writer(out);
    w.write_record(COLUMNS)?;
    for row in rows {
        w.write_record(row.record())?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::parse_real;

    #[test]
    fn first_rows_use_the_seeds() {
        let rows = rows_for(
            &parse_real("1").unwrap(),
            2,
            &PrecisionPolicy::default(),
            40,
        );
        assert_eq!(rows.len(), 3);
        let v0 = rows[0].values.as_ref().unwrap();
        assert_eq!(v0[5], "0");
        assert_eq!(v0[6], "0");
        assert!(v0[7].starts_with("1.000"));
        assert!(rows.iter().all(|r| r.status == "ok"));
    }

    #[test]
    fn zero_gap_probability_is_one() {
        let rows = rows_for(&Real::zero(64), 3, &PrecisionPolicy::default(), 40);
        for r in &rows {
            let v = r.values.as_ref().unwrap();
            assert!(v[7].starts_with("1.0000"), "{}", v[7]);
        }
    }

    #[test]
    fn policy_failure_lands_in_status() {
        let policy = PrecisionPolicy {
            base_bits: 64,
            bits_per_n: 0,
            max_bits: 128,
            ..PrecisionPolicy::default()
        };
        let rows = rows_for(&parse_real("2").unwrap(), 30, &policy, 40);
        assert_eq!(rows.len(), 31);
        assert!(rows
            .iter()
            .all(|r| r.values.is_none() && r.status.starts_with("error")));
    }
}
