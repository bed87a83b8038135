use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const TRACE_CSV_HEADER: &str = "iter,res_w,res_u,phi_w,gap_uw,mse,elapsed_ms";

/// Diagnostics of one C-SALSA pass.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TraceRecord {
    pub iter: usize,
    /// `‖B w_k − y‖₂`
    pub res_w: f64,
    /// `‖B u_k − y‖₂`
    pub res_u: f64,
    /// `φ(w_k)`
    pub phi_w: f64,
    /// `‖u_k − w_k‖₂`
    pub gap_uw: f64,
    /// `‖B u_k − y − v_k‖₂`; kept in memory, not exported.
    #[serde(skip)]
    pub gap_v: f64,
    pub mse: Option<f64>,
    pub elapsed_ms: f64,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct SolverTrace {
    pub records: Vec<TraceRecord>,
}

impl SolverTrace {
    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn last(&self) -> Option<&TraceRecord> {
        self.records.last()
    }

    /// First iteration whose `res_w` is within `bound`.
    pub fn first_feasible(&self, bound: f64) -> Option<usize> {
        self.records
            .iter()
            .find(|r| r.res_w <= bound)
            .map(|r| r.iter)
    }

    pub fn min_res_w(&self) -> Option<f64> {
        self.records.iter().map(|r| r.res_w).reduce(f64::min)
    }

    /// CSV with 17 significant digits per float; missing MSE is an empty field.
    pub fn to_csv(&self) -> String {
        let mut out = String::with_capacity(64 * (self.records.len() + 1));
        out.push_str(TRACE_CSV_HEADER);
        out.push('\n');
        for r in &self.records {
            let mse = r.mse.map(fmt_float).unwrap_or_default();
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{}",
                r.iter,
                fmt_float(r.res_w),
                fmt_float(r.res_u),
                fmt_float(r.phi_w),
                fmt_float(r.gap_uw),
                mse,
                fmt_float(r.elapsed_ms)
            );
        }
        out
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_csv()).map_err(|e| Error::io(path, e))
    }

    pub fn parse_csv(text: &str) -> Result<Self> {
        let mut lines = text.lines();
        match lines.next() {
            Some(h) if h.trim() == TRACE_CSV_HEADER => {}
            other => {
                return Err(Error::Format(format!("unexpected trace header {other:?}")));
            }
        }
        let mut records = Vec::new();
        for (lineno, line) in lines.enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            let fields: Vec<&str> = line.split(',').collect();
            if fields.len() != 7 {
                return Err(Error::Format(format!(
                    "trace line {} has {} fields",
                    lineno + 2,
                    fields.len()
                )));
            }
            let num = |s: &str| -> Result<f64> {
                s.parse().map_err(|_| {
                    Error::Format(format!("bad number {s:?} on trace line {}", lineno + 2))
                })
            };
            records.push(TraceRecord {
                iter: fields[0]
                    .parse()
                    .map_err(|_| Error::Format(format!("bad iteration on line {}", lineno + 2)))?,
                res_w: num(fields[1])?,
                res_u: num(fields[2])?,
                phi_w: num(fields[3])?,
                gap_uw: num(fields[4])?,
                gap_v: f64::NAN,
                mse: if fields[5].is_empty() {
                    None
                } else {
                    Some(num(fields[5])?)
                },
                elapsed_ms: num(fields[6])?,
            });
        }
        Ok(Self { records })
    }
}

pub(crate) fn fmt_float(x: f64) -> String {
    format!("{x:.16e}")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_round_trip_is_exact() {
        let trace = SolverTrace {
            records: vec![
                TraceRecord {
                    iter: 1,
                    res_w: 0.1 + 0.2,
                    res_u: 1.0 / 3.0,
                    phi_w: 12345.678901234567,
                    gap_uw: 1e-300,
                    gap_v: 0.0,
                    mse: None,
                    elapsed_ms: 2.5,
                },
                TraceRecord {
                    iter: 2,
                    res_w: std::f64::consts::PI,
                    res_u: 2.0,
                    phi_w: 0.0,
                    gap_uw: 5e-17,
                    gap_v: 0.0,
                    mse: Some(6.79023e-7),
                    elapsed_ms: 3.0,
                },
            ],
        };
        let csv = trace.to_csv();
        assert!(csv.starts_with("iter,res_w,res_u,phi_w,gap_uw,mse,elapsed_ms\n"));
        let back = SolverTrace::parse_csv(&csv).unwrap();
        for (a, b) in back.records.iter().zip(&trace.records) {
            assert_eq!(a.res_w.to_bits(), b.res_w.to_bits());
            assert_eq!(a.res_u.to_bits(), b.res_u.to_bits());
            assert_eq!(a.phi_w.to_bits(), b.phi_w.to_bits());
            assert_eq!(a.gap_uw.to_bits(), b.gap_uw.to_bits());
            assert_eq!(a.mse, b.mse);
        }
    }
}
