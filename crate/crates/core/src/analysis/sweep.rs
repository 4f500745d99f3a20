use std::io::Write;

use rayon::prelude::*;
use serde::Serialize;

use super::information::info_bound_with;
use super::profile::profile;
use super::theorem::verify_with_profile;
use crate::error::Result;
use crate::protocol::{Database, Scenario, SessionOptions};
use crate::strategies::BobStrategy;

/// Trade-off between detection and information at one parameter value.
#[derive(Debug, Clone, Serialize)]
pub struct TradeoffPoint {
    pub parameter: f64,
    pub epsilon: f64,
    pub min_pass_a: f64,
    pub min_pass_b: f64,
    pub chi_bits: f64,
    pub min_fidelity: f64,
    pub fid_bound_rhs: f64,
    pub info_bound_simple: f64,
    pub info_bound_sharp: f64,
    pub vacuous: bool,
    pub theorem_holds: bool,
}

/// A grid point; failures are kept and the sweep goes on.
#[derive(Debug, Clone, Serialize)]
pub struct SweepRow {
    pub parameter: f64,
    pub point: std::result::Result<TradeoffPoint, String>,
}

pub const CSV_HEADER: &str = "parameter,epsilon,min_pass_a,min_pass_b,chi_bits,min_fidelity,fid_bound_rhs,info_bound_simple,info_bound_sharp,vacuous_flag";

/// Full analysis of one strategy.
pub fn tradeoff_point(parameter: f64, strategy: &BobStrategy, db: &Database, opts: &SessionOptions) -> Result<TradeoffPoint> {
    let p = profile(strategy, db, opts)?;
    let report = verify_with_profile(strategy, db, &p)?;
    let info = info_bound_with(&p, &report.sigma_star)?;
    Ok(TradeoffPoint {
        parameter,
        epsilon: report.epsilon,
        min_pass_a: p.min_pass_in(Scenario::A),
        min_pass_b: p.min_pass_in(Scenario::B),
        chi_bits: info.chi,
        min_fidelity: report.min_fidelity,
        fid_bound_rhs: report.fidelity_rhs,
        info_bound_simple: info.bound_simple,
        info_bound_sharp: info.bound_sharp,
        vacuous: report.vacuous,
        theorem_holds: report.all_hold,
    })
}

/// Evaluates `family(param)` over `grid` in parallel; rows keep grid order.
pub fn sweep<F>(family: F, grid: &[f64], db: &Database, opts: &SessionOptions) -> Vec<SweepRow>
where
    F: Fn(f64) -> Result<BobStrategy> + Sync,
{
    grid.par_iter()
        .map(|&x| SweepRow {
            parameter: x,
            point: family(x)
                .and_then(|s| tradeoff_point(x, &s, db, opts))
                .map_err(|e| e.to_string()),
        })
        .collect()
}

/// `%.12g`-style formatting.
pub fn fmt_sig(x: f64) -> String {
    const DIGITS: i32 = 12;
    if x.is_nan() {
        return "NaN".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if x == 0.0 {
        return "0".into();
    }
    let sci = format!("{:.*e}", (DIGITS - 1) as usize, x);
    let (mantissa, exp) = sci.split_once('e').expect("exponent");
    let exp: i32 = exp.parse().expect("integer exponent");
    if (-5..DIGITS).contains(&exp) {
        let fixed = format!("{:.*}", (DIGITS - 1 - exp).max(0) as usize, x);
        trim_zeros(&fixed)
    } else {
        format!("{}e{}{:02}", trim_zeros(mantissa), if exp < 0 { '-' } else { '+' }, exp.abs())
    }
}

fn trim_zeros(s: &str) -> String {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s.to_string()
    }
}

/// Writes rows as CSV; failed rows carry NaN and the flag `error`.
pub fn write_csv<W: Write>(rows: &[SweepRow], mut out: W) -> std::io::Result<()> {
    writeln!(out, "{CSV_HEADER}")?;
    for row in rows {
        match &row.point {
            Ok(p) => {
                let vals = [
                    p.parameter,
                    p.epsilon,
                    p.min_pass_a,
                    p.min_pass_b,
                    p.chi_bits,
                    p.min_fidelity,
                    p.fid_bound_rhs,
                    p.info_bound_simple,
                    p.info_bound_sharp,
                ];
                let cells: Vec<String> = vals.iter().map(|v| fmt_sig(*v)).collect();
                writeln!(out, "{},{}", cells.join(","), p.vacuous)?;
            }
            Err(_) => {
                writeln!(out, "{}{},error", fmt_sig(row.parameter), ",NaN".repeat(8))?;
            }
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn significant_digits() {
        assert_eq!(fmt_sig(0.5), "0.5");
        assert_eq!(fmt_sig(1.0 / 3.0), "0.333333333333");
        assert_eq!(fmt_sig(2.0f64.sqrt() * 1e-7), "1.41421356237e-07");
        assert_eq!(fmt_sig(123456789012345.0), "1.23456789012e+14");
        assert_eq!(fmt_sig(-2.0), "-2");
        assert_eq!(fmt_sig(0.0), "0");
    }
}
