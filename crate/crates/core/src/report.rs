//! CSV files produced and consumed by the harness.
//!
//! Floating-point fields are written with 17 significant digits in the
//! shortest of fixed or scientific notation (C's `%.17g`), which
//! round-trips every `f64` exactly. Integer fields are written as integers.

use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::experiments::{ExperimentReport, ReportRow, SweepKind, Trajectory};
use crate::filter::FilterOutput;

pub const SWEEP_Q_HEADER: [&str; 9] = [
    "q_prop",
    "mean_rmse",
    "se_rmse",
    "mean_rmsd",
    "se_rmsd",
    "mean_ess",
    "mean_unique_frac",
    "trials",
    "seed",
];

pub const SWEEP_PARTICLES_HEADER: [&str; 10] = [
    "n_particles",
    "q_prop",
    "mean_rmse",
    "se_rmse",
    "mean_rmsd",
    "se_rmsd",
    "mean_ess",
    "mean_unique_frac",
    "trials",
    "seed",
];

pub const TRAJECTORY_HEADER: [&str; 3] = ["k", "x_true", "y"];

pub const FILTER_HEADER: [&str; 6] = ["k", "x_true", "y", "x_hat", "ess", "unique_ancestors"];

/// Formats `x` like C's `%.17g`.
pub fn format_f64(x: f64) -> String {
    if x == 0.0 {
        return if x.is_sign_negative() {
            "-0".into()
        } else {
            "0".into()
        };
    }
    if !x.is_finite() {
        return if x.is_nan() {
            "NaN".into()
        } else if x > 0.0 {
            "inf".into()
        } else {
            "-inf".into()
        };
    }
    let sci = format!("{:.16e}", x);
    let (mantissa, exp) = sci.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    if (-5..17).contains(&exp) {
        let fixed = format!("{:.*}", (16 - exp) as usize, x);
        trim_fraction(&fixed).to_string()
    } else {
        format!("{}e{}", trim_fraction(mantissa), exp)
    }
}

fn trim_fraction(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

fn writer<W: Write>(w: W) -> csv::Writer<W> {
    csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(w)
}

fn csv_io(path: &Path, e: csv::Error) -> Error {
    match e.into_kind() {
        csv::ErrorKind::Io(source) => Error::Io {
            path: path.to_path_buf(),
            source,
        },
        other => Error::Parse {
            path: path.to_path_buf(),
            message: format!("{other:?}"),
        },
    }
}

fn create(path: &Path) -> Result<File> {
    File::create(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn open(path: &Path) -> Result<File> {
    File::open(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

pub fn report_header(kind: SweepKind) -> &'static [&'static str] {
    match kind {
        SweepKind::Q => &SWEEP_Q_HEADER,
        SweepKind::Particles => &SWEEP_PARTICLES_HEADER,
    }
}

fn row_fields(kind: SweepKind, r: &ReportRow) -> Vec<String> {
    let mut fields = Vec::with_capacity(10);
    if kind == SweepKind::Particles {
        fields.push(r.n_particles.to_string());
    }
    fields.extend(
        [
            r.q_prop,
            r.mean_rmse,
            r.se_rmse,
            r.mean_rmsd,
            r.se_rmsd,
            r.mean_ess,
            r.mean_unique_frac,
        ]
        .map(format_f64),
    );
    fields.push(r.trials.to_string());
    fields.push(r.seed.to_string());
    fields
}

/// Writes a report as CSV to any writer.
pub fn write_report<W: Write>(report: &ExperimentReport, out: W) -> csv::Result<()> {
    let mut w = writer(out);
    w.write_record(report_header(report.kind))?;
    for r in &report.rows {
        w.write_record(row_fields(report.kind, r))?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_report_csv(report: &ExperimentReport, path: &Path) -> Result<()> {
    write_report(report, create(path)?).map_err(|e| csv_io(path, e))
}

fn parse_field<T: std::str::FromStr>(path: &Path, line: usize, name: &str, s: &str) -> Result<T> {
    s.parse().map_err(|_| Error::Parse {
        path: path.to_path_buf(),
        message: format!("line {line}: column '{name}': cannot parse '{s}'"),
    })
}

/// Reads a report written by [`write_report_csv`]. The sweep kind is taken
/// from the header; `n_particles` defaults to `default_n` for `sweep-q`
/// files, which do not carry it.
pub fn read_report<R: Read>(input: R, path: &Path, default_n: usize) -> Result<ExperimentReport> {
    let mut rdr = csv::Reader::from_reader(input);
    let header: Vec<String> = rdr
        .headers()
        .map_err(|e| csv_io(path, e))?
        .iter()
        .map(str::to_string)
        .collect();
    let kind = if header == SWEEP_Q_HEADER {
        SweepKind::Q
    } else if header == SWEEP_PARTICLES_HEADER {
        SweepKind::Particles
    } else {
        return Err(Error::Parse {
            path: path.to_path_buf(),
            message: format!("unrecognized report header: {}", header.join(",")),
        });
    };
    let names = report_header(kind);
    let mut rows = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(|e| csv_io(path, e))?;
        let line = i + 2;
        let f = |c: usize| -> Result<f64> { parse_field(path, line, names[c], &rec[c]) };
        let off = usize::from(kind == SweepKind::Particles);
        rows.push(ReportRow {
            n_particles: if off == 1 {
                parse_field(path, line, names[0], &rec[0])?
            } else {
                default_n
            },
            q_prop: f(off)?,
            mean_rmse: f(off + 1)?,
            se_rmse: f(off + 2)?,
            mean_rmsd: f(off + 3)?,
            se_rmsd: f(off + 4)?,
            mean_ess: f(off + 5)?,
            mean_unique_frac: f(off + 6)?,
            trials: parse_field(path, line, names[off + 7], &rec[off + 7])?,
            seed: parse_field(path, line, names[off + 8], &rec[off + 8])?,
        });
    }
    Ok(ExperimentReport {
        kind,
        rows,
        underflow_steps: 0,
    })
}

pub fn read_report_csv(path: &Path, default_n: usize) -> Result<ExperimentReport> {
    read_report(open(path)?, path, default_n)
}

pub fn write_trajectory<W: Write>(traj: &Trajectory, out: W) -> csv::Result<()> {
    let mut w = writer(out);
    w.write_record(TRAJECTORY_HEADER)?;
    for (i, (x, y)) in traj.true_states.iter().zip(&traj.observations).enumerate() {
        w.write_record([(i + 1).to_string(), format_f64(*x), format_f64(*y)])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_trajectory_csv(traj: &Trajectory, path: &Path) -> Result<()> {
    write_trajectory(traj, create(path)?).map_err(|e| csv_io(path, e))
}

/// Observations and, when present, true states read from a trajectory CSV.
///
/// Requires a `y` column; `x_true` is optional and `k` is ignored.
#[derive(Debug, Clone, PartialEq)]
pub struct ObservedTrajectory {
    pub true_states: Option<Vec<f64>>,
    pub observations: Vec<f64>,
}

pub fn read_trajectory_csv(path: &Path) -> Result<ObservedTrajectory> {
    let mut rdr = csv::Reader::from_reader(open(path)?);
    let header = rdr.headers().map_err(|e| csv_io(path, e))?.clone();
    let y_col = header
        .iter()
        .position(|h| h == "y")
        .ok_or_else(|| Error::Parse {
            path: path.to_path_buf(),
            message: "missing 'y' column".into(),
        })?;
    let x_col = header.iter().position(|h| h == "x_true");
    let mut ys = Vec::new();
    let mut xs = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(|e| csv_io(path, e))?;
        ys.push(parse_field(path, i + 2, "y", &rec[y_col])?);
        if let Some(c) = x_col {
            xs.push(parse_field(path, i + 2, "x_true", &rec[c])?);
        }
    }
    if ys.is_empty() {
        return Err(Error::Parse {
            path: path.to_path_buf(),
            message: "no observations".into(),
        });
    }
    Ok(ObservedTrajectory {
        true_states: x_col.map(|_| xs),
        observations: ys,
    })
}

/// Per-step filter output. `x_true` is left empty when unknown.
pub fn write_filter<W: Write>(
    input: &ObservedTrajectory,
    output: &FilterOutput,
    out: W,
) -> csv::Result<()> {
    let mut w = writer(out);
    w.write_record(FILTER_HEADER)?;
    for (i, (est, d)) in output.estimates.iter().zip(&output.diagnostics).enumerate() {
        let x_true = input
            .true_states
            .as_ref()
            .map(|xs| format_f64(xs[i]))
            .unwrap_or_default();
        w.write_record([
            (i + 1).to_string(),
            x_true,
            format_f64(input.observations[i]),
            format_f64(*est),
            format_f64(d.ess),
            d.unique_ancestors.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_filter_csv(
    input: &ObservedTrajectory,
    output: &FilterOutput,
    path: &Path,
) -> Result<()> {
    write_filter(input, output, create(path)?).map_err(|e| csv_io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn formatting() {
        assert_eq!(format_f64(8.0), "8");
        assert_eq!(format_f64(3.2), "3.2000000000000002");
        assert_eq!(format_f64(0.1), "0.10000000000000001");
        assert_eq!(format_f64(-2.5), "-2.5");
        assert_eq!(format_f64(1e-7), "9.9999999999999995e-8");
        assert_eq!(format_f64(1e20), "1e20");
        assert_eq!(format_f64(0.0), "0");
    }

    fn row(q: f64) -> ReportRow {
        ReportRow {
            n_particles: 50,
            q_prop: q,
            mean_rmse: q * 3.1,
            se_rmse: 0.01,
            mean_rmsd: 1.0 / q,
            se_rmsd: 0.02,
            mean_ess: 12.5,
            mean_unique_frac: 0.4,
            trials: 7,
            seed: u64::MAX,
        }
    }

    #[test]
    fn empty_report_is_header_only() {
        let mut buf = Vec::new();
        let r = ExperimentReport {
            kind: SweepKind::Q,
            rows: vec![],
            underflow_steps: 0,
        };
        write_report(&r, &mut buf).unwrap();
        assert_eq!(
            String::from_utf8(buf).unwrap(),
            SWEEP_Q_HEADER.join(",") + "\n"
        );
    }

    #[test]
    fn line_count() {
        let r = ExperimentReport {
            kind: SweepKind::Q,
            rows: (0..36).map(|i| row(0.5 + 0.1 * i as f64)).collect(),
            underflow_steps: 0,
        };
        let mut buf = Vec::new();
        write_report(&r, &mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap().lines().count(), 37);
    }

    #[test]
    fn unknown_header_rejected() {
        let data = b"a,b\n1,2\n";
        assert!(read_report(&data[..], Path::new("x.csv"), 50).is_err());
    }

    proptest! {
        #[test]
        fn f64_round_trips(bits in any::<u64>()) {
            let x = f64::from_bits(bits);
            prop_assume!(x.is_finite());
            let back: f64 = format_f64(x).parse().unwrap();
            prop_assert_eq!(back.to_bits(), x.to_bits());
        }

        #[test]
        fn report_round_trips(
            qs in proptest::collection::vec(0.01f64..10.0, 0..20),
            particles in any::<bool>(),
        ) {
            let kind = if particles { SweepKind::Particles } else { SweepKind::Q };
            let r = ExperimentReport { kind, rows: qs.iter().map(|&q| row(q)).collect(), underflow_steps: 0 };
            let mut buf = Vec::new();
            write_report(&r, &mut buf).unwrap();
            let back = read_report(&buf[..], Path::new("mem"), 50).unwrap();
            prop_assert_eq!(back, r);
        }
    }
}
