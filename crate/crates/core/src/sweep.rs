//! Parameter sweeps over the altruistic ratio and the effective altruism
//! level, with CSV output at 12 significant digits.

use std::io::{Read, Write};

use rayon::prelude::*;
use serde::Deserialize;

use crate::analysis::AnalysisSummary;
use crate::equilibrium::{solve_equilibrium, CaseLabel};
use crate::error::{domain, Error, Result};
use crate::grid::span;
use crate::model::{DelayProfile, OnRamp};
use crate::Scalar;

/// Significant digits written to CSV cells.
pub const CSV_DIGITS: usize = 12;

/// One equilibrium evaluated at `(alpha, beta_e)` with `e = 1`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SweepRow<T> {
    pub alpha: T,
    pub beta_e: T,
    pub x_hat_b: T,
    pub case_label: CaseLabel,
    pub j_soc: T,
    pub delays: DelayProfile<T>,
}

fn check_step<T: Scalar>(step: T) -> Result<()> {
    if step > T::zero() && step <= T::lit(0.1) {
        Ok(())
    } else {
        Err(domain("step", step, "(0, 0.1]"))
    }
}

fn evaluate<T: Scalar>(
    ramp: &OnRamp<T>,
    summary: &AnalysisSummary<T>,
    points: Vec<(T, T)>,
) -> Result<Vec<SweepRow<T>>> {
    points
        .into_par_iter()
        .map(|(alpha, beta_e)| {
            let eq = solve_equilibrium(ramp, summary, alpha, beta_e, T::one())?;
            Ok(SweepRow {
                alpha,
                beta_e,
                x_hat_b: eq.x_hat_b,
                case_label: eq.case_label,
                j_soc: eq.social_delay,
                delays: eq.delays,
            })
        })
        .collect()
}

/// For each `beta` in order, the curve `alpha = 0, step, ..., 1`.
pub fn sweep_alpha<T: Scalar>(
    ramp: &OnRamp<T>,
    summary: &AnalysisSummary<T>,
    betas: &[T],
    step: T,
) -> Result<Vec<SweepRow<T>>> {
    summary.require_in_g()?;
    check_step(step)?;
    let alphas = span(T::zero(), T::one(), step);
    let points = betas
        .iter()
        .flat_map(|&b| alphas.iter().map(move |&a| (a, b)))
        .collect();
    evaluate(ramp, summary, points)
}

/// For each `alpha` in order, the curve `beta_e = 0, step, ..., beta_e_max`.
pub fn sweep_beta_e<T: Scalar>(
    ramp: &OnRamp<T>,
    summary: &AnalysisSummary<T>,
    alphas: &[T],
    beta_e_max: T,
    step: T,
) -> Result<Vec<SweepRow<T>>> {
    summary.require_in_g()?;
    check_step(step)?;
    if !(beta_e_max > T::zero() && beta_e_max.is_finite()) {
        return Err(domain("beta_e_max", beta_e_max, "(0, inf)"));
    }
    let levels = span(T::zero(), beta_e_max, step);
    let points = alphas
        .iter()
        .flat_map(|&a| levels.iter().map(move |&b| (a, b)))
        .collect();
    evaluate(ramp, summary, points)
}

/// Formats like C's `%.{digits}g`.
pub fn format_significant(x: f64, digits: usize) -> String {
    if x == 0.0 {
        return "0".to_string();
    }
    if !x.is_finite() {
        return x.to_string();
    }
    let digits = digits.max(1);
    let sci = format!("{:.*e}", digits - 1, x);
    let (mantissa, exp) = sci.split_once('e').expect("exponent marker");
    let exp: i32 = exp.parse().expect("integer exponent");
    if exp < -4 || exp >= digits as i32 {
        format!(
            "{}e{}{:02}",
            trim_zeros(mantissa),
            if exp < 0 { '-' } else { '+' },
            exp.abs()
        )
    } else {
        let decimals = (digits as i32 - 1 - exp) as usize;
        trim_zeros(&format!("{:.*}", decimals, x)).to_string()
    }
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

fn csv_writer<W: Write>(out: W) -> csv::Writer<W> {
    csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(out)
}

fn num<T: Scalar>(x: T) -> String {
    format_significant(x.as_f64(), CSV_DIGITS)
}

fn csv_err(e: csv::Error) -> Error {
    Error::Io(e.to_string())
}

/// Writes `beta,alpha,x_hat_b,case,j_soc`.
pub fn write_alpha_csv<T: Scalar, W: Write>(rows: &[SweepRow<T>], out: W) -> Result<()> {
    let mut w = csv_writer(out);
    w.write_record(["beta", "alpha", "x_hat_b", "case", "j_soc"])
        .map_err(csv_err)?;
    for r in rows {
        w.write_record([
            num(r.beta_e),
            num(r.alpha),
            num(r.x_hat_b),
            r.case_label.to_string(),
            num(r.j_soc),
        ])
        .map_err(csv_err)?;
    }
    w.flush().map_err(|e| Error::Io(e.to_string()))
}

/// Writes `alpha,beta_e,x_hat_b,case,j_soc`.
pub fn write_beta_e_csv<T: Scalar, W: Write>(rows: &[SweepRow<T>], out: W) -> Result<()> {
    let mut w = csv_writer(out);
    w.write_record(["alpha", "beta_e", "x_hat_b", "case", "j_soc"])
        .map_err(csv_err)?;
    for r in rows {
        w.write_record([
            num(r.alpha),
            num(r.beta_e),
            num(r.x_hat_b),
            r.case_label.to_string(),
            num(r.j_soc),
        ])
        .map_err(csv_err)?;
    }
    w.flush().map_err(|e| Error::Io(e.to_string()))
}

/// A parsed CSV row from either sweep schema.
#[derive(Clone, Debug, PartialEq, Deserialize)]
pub struct CsvRecord {
    #[serde(alias = "beta")]
    pub beta_e: f64,
    pub alpha: f64,
    pub x_hat_b: f64,
    #[serde(rename = "case")]
    pub case_label: CaseLabel,
    pub j_soc: f64,
}

/// Reads a file produced by [`write_alpha_csv`] or [`write_beta_e_csv`].
pub fn read_sweep_csv<R: Read>(input: R) -> Result<Vec<CsvRecord>> {
    csv::Reader::from_reader(input)
        .deserialize()
        .collect::<std::result::Result<Vec<CsvRecord>, _>>()
        .map_err(csv_err)
}
