//! CSV form of an iteration trace.
//!
//! RFC 4180 with CRLF line ends. Floats are written as the shortest decimal
//! that parses back to the same value; NaN (a quantity not defined on that
//! row) is an empty field.

use csv::{Terminator, WriterBuilder};

use crate::engine::{IterationTrace, TraceRow};
use crate::error::{Error, Result};

pub fn header(ambient_dim: usize, r: usize) -> Vec<String> {
    let mut h = vec!["n".to_string(), "beta".to_string()];
    h.extend((0..ambient_dim).map(|i| format!("x{i}")));
    h.extend(["d_oracle", "s", "gamma", "t", "lyap_slack"].map(String::from));
    h.extend((1..=r).map(|i| format!("res_{i}")));
    h.push("d_u_w".into());
    h
}

pub fn format_float(v: f64) -> String {
    if v.is_nan() {
        String::new()
    } else {
        format!("{v:?}")
    }
}

fn record(row: &TraceRow, r: usize) -> Vec<String> {
    let mut rec = vec![row.n.to_string(), format_float(row.beta)];
    rec.extend(row.x.iter().map(|&v| format_float(v)));
    rec.extend([row.d_oracle, row.s, row.gamma, row.t, row.lyap_slack].map(format_float));
    if row.residuals.len() == r {
        rec.extend(row.residuals.iter().map(|&v| format_float(v)));
    } else {
        rec.extend(std::iter::repeat_n(String::new(), r));
    }
    rec.push(format_float(row.d_u_w));
    rec
}

pub fn to_csv_bytes(trace: &IterationTrace) -> Result<Vec<u8>> {
    let io = |e: csv::Error| Error::Io(e.to_string());
    let mut w = WriterBuilder::new()
        .terminator(Terminator::CRLF)
        .from_writer(Vec::new());
    w.write_record(header(trace.ambient_dim, trace.r)).map_err(io)?;
    for row in &trace.rows {
        w.write_record(record(row, trace.r)).map_err(io)?;
    }
    w.into_inner().map_err(|e| Error::Io(e.to_string()))
}

/// Parses a float field written by [`format_float`].
pub fn parse_float(field: &str) -> Result<f64> {
    if field.is_empty() {
        return Ok(f64::NAN);
    }
    field
        .parse()
        .map_err(|_| Error::Io(format!("bad float field {field:?}")))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn row(n: usize, x: Vec<f64>, residuals: Vec<f64>) -> TraceRow {
        TraceRow {
            n,
            beta: 0.1,
            x,
            d_oracle: 1e-20,
            s: f64::NAN,
            gamma: 0.3,
            t: -0.0,
            lyap_slack: f64::NAN,
            residuals,
            d_u_w: 1.0 / 3.0,
        }
    }

    #[test]
    fn header_layout() {
        let h = header(3, 2);
        assert_eq!(
            h,
            [
                "n",
                "beta",
                "x0",
                "x1",
                "x2",
                "d_oracle",
                "s",
                "gamma",
                "t",
                "lyap_slack",
                "res_1",
                "res_2",
                "d_u_w"
            ]
        );
    }

    #[test]
    fn floats_round_trip() {
        for v in [0.1, 1.0 / 3.0, 1e-20, -2.5e300, std::f64::consts::FRAC_1_SQRT_2, 5e-324] {
            assert_eq!(parse_float(&format_float(v)).unwrap(), v);
        }
        assert!(parse_float(&format_float(f64::NAN)).unwrap().is_nan());
    }

    #[test]
    fn csv_layout() {
        let trace = IterationTrace {
            ambient_dim: 1,
            r: 2,
            stride: 1,
            rows: vec![row(1, vec![0.5], vec![1.0, 0.0]), row(2, vec![0.25], vec![])],
        };
        let text = String::from_utf8(to_csv_bytes(&trace).unwrap()).unwrap();
        let lines: Vec<&str> = text.split("\r\n").collect();
        assert_eq!(lines[0], "n,beta,x0,d_oracle,s,gamma,t,lyap_slack,res_1,res_2,d_u_w");
        assert_eq!(lines[1], "1,0.1,0.5,1e-20,,0.3,-0.0,,1.0,0.0,0.3333333333333333");
        assert_eq!(lines[2], "2,0.1,0.25,1e-20,,0.3,-0.0,,,,0.3333333333333333");
        assert_eq!(lines[3], "");
    }
}
