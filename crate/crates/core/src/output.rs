//! CSV emission of trajectories and DE convergence traces.
//!
//! Numbers are printed with 12 significant digits in `%g` style so that the
//! bytes are stable for a fixed run.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use csv::{Terminator, WriterBuilder};

use crate::error::Result;
use crate::planner::Trajectory;

pub const TRAJECTORY_HEADER: [&str; 14] = [
    "step",
    "t1_deg",
    "t2_deg",
    "t3_deg",
    "x",
    "y",
    "z",
    "dist_to_goal",
    "delta_PE",
    "KE",
    "A_vd",
    "total_cost",
    "min_clearance",
    "threat_flag",
];

pub const TRACE_HEADER: [&str; 3] = ["step", "iteration", "best_cost"];

const SIGNIFICANT: i32 = 12;

/// `%.12g` formatting.
pub fn format_sig(x: f64) -> String {
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf" } else { "-inf" }.into();
    }
    if x == 0.0 {
        return "0".into();
    }
    let sci = format!("{:.*e}", (SIGNIFICANT - 1) as usize, x);
    let (mantissa, exp) = sci.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    if !(-5..SIGNIFICANT).contains(&exp) {
        let m = trim_fraction(mantissa);
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{m}e{sign}{:02}", exp.abs())
    } else {
        let digits = (SIGNIFICANT - 1 - exp).max(0) as usize;
        trim_fraction(&format!("{x:.digits$}")).to_string()
    }
}

fn trim_fraction(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

fn csv_writer<W: Write>(out: W) -> csv::Writer<W> {
    WriterBuilder::new()
        .terminator(Terminator::Any(b'\n'))
        .from_writer(out)
}

pub fn write_trajectory_to<W: Write>(trajectory: &Trajectory, out: W) -> Result<()> {
    let mut w = csv_writer(out);
    w.write_record(TRAJECTORY_HEADER)?;
    for r in &trajectory.records {
        let [t1, t2, t3] = r.config.to_degrees();
        let p = r.end_effector;
        let c = r.cost;
        let mut row = vec![r.step.to_string()];
        row.extend(
            [
                t1,
                t2,
                t3,
                p.x,
                p.y,
                p.z,
                c.distance,
                c.delta_potential,
                c.kinetic,
                c.avoidance,
                c.total,
                r.min_gap(),
            ]
            .map(format_sig),
        );
        row.push(u8::from(r.threat).to_string());
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

/// One row per (planned step, DE generation) with the best-so-far cost.
pub fn write_trace_to<W: Write>(trajectory: &Trajectory, out: W) -> Result<()> {
    let mut w = csv_writer(out);
    w.write_record(TRACE_HEADER)?;
    for r in trajectory.records.iter().skip(1) {
        for (g, cost) in r.history.iter().enumerate() {
            w.write_record([r.step.to_string(), (g + 1).to_string(), format_sig(*cost)])?;
        }
    }
    w.flush()?;
    Ok(())
}

pub fn write_trajectory(trajectory: &Trajectory, path: impl AsRef<Path>) -> Result<()> {
    let mut out = BufWriter::new(File::create(path)?);
    write_trajectory_to(trajectory, &mut out)?;
    out.flush()?;
    Ok(())
}

pub fn write_trace(trajectory: &Trajectory, path: impl AsRef<Path>) -> Result<()> {
    let mut out = BufWriter::new(File::create(path)?);
    write_trace_to(trajectory, &mut out)?;
    out.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn significant_digit_formatting() {
        assert_eq!(format_sig(0.0), "0");
        assert_eq!(format_sig(1.0), "1");
        assert_eq!(format_sig(-2.5), "-2.5");
        assert_eq!(format_sig(std::f64::consts::PI), "3.14159265359");
        assert_eq!(format_sig(10000.05), "10000.05");
        assert_eq!(format_sig(1.0 / 3.0), "0.333333333333");
        assert_eq!(format_sig(1.5e-7), "1.5e-07");
        assert_eq!(format_sig(123456789012345.0), "1.23456789012e+14");
        assert_eq!(format_sig(0.0001234), "0.0001234");
        assert_eq!(format_sig(f64::INFINITY), "inf");
        assert_eq!(format_sig(9.999999999999999), "10");
    }
}
