//! CSV tables and two-column plot series.
//!
//! Reals are written with 17 significant digits (`{:.16e}`), which
//! round-trips every `f64`.

use std::fmt::Write as _;

use crate::dynamics::RunRecord;
use crate::experiments::{ConsistencyTable, ConvergenceTable};

pub const CONVERGENCE_HEADER: &str = "N,linf_theta,mean_dist_Hm1,std_dist,mean_dist_L2H1m,paths,seconds";
pub const RECORD_HEADER: &str = "t,l2_norm,h1_seminorm,dissipation,budget";
pub const CONSISTENCY_HEADER: &str = "dt,mean_sup,std_sup,paths";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Csv,
    Plotdata,
}

#[derive(Debug, Clone, Copy)]
pub enum Report<'a> {
    Record(&'a RunRecord),
    Convergence(&'a ConvergenceTable),
    Consistency(&'a ConsistencyTable),
}

/// `x` with 17 significant digits.
pub fn real(x: f64) -> String {
    format!("{x:.16e}")
}

fn csv(header: &str, rows: impl Iterator<Item = Vec<String>>) -> String {
    let mut out = String::from(header);
    out.push('\n');
    for row in rows {
        out.push_str(&row.join(","));
        out.push('\n');
    }
    out
}

fn series(xs: &[f64], ys: &[f64], x_name: &str, y_name: &str) -> String {
    let mut out = format!("# {x_name} {y_name}\n");
    for (x, y) in xs.iter().zip(ys) {
        writeln!(out, "{} {}", real(*x), real(*y)).expect("writing to a String");
    }
    out
}

impl Report<'_> {
    /// Output files as `(name, contents)` pairs.
    pub fn render(&self, format: Format) -> Vec<(String, String)> {
        match (self, format) {
            (Report::Record(r), Format::Csv) => {
                let budget = r.budget();
                let rows = (0..r.times.len()).map(|i| {
                    vec![real(r.times[i]), real(r.l2_norms[i]), real(r.h1_seminorms[i]), real(r.dissipation[i]), real(budget[i])]
                });
                vec![("record.csv".into(), csv(RECORD_HEADER, rows))]
            }
            (Report::Record(r), Format::Plotdata) => vec![
                ("l2_norm.dat".into(), series(&r.times, &r.l2_norms, "t", "l2_norm")),
                ("h1_seminorm.dat".into(), series(&r.times, &r.h1_seminorms, "t", "h1_seminorm")),
                ("dissipation.dat".into(), series(&r.times, &r.dissipation, "t", "dissipation")),
                ("budget.dat".into(), series(&r.times, &r.budget(), "t", "budget")),
            ],
            (Report::Convergence(t), Format::Csv) => {
                let rows = t.rows.iter().map(|r| {
                    vec![
                        r.n.to_string(),
                        real(r.linf_theta),
                        real(r.mean_dist_hm),
                        real(r.std_dist),
                        real(r.mean_dist_l2h),
                        r.paths.to_string(),
                        real(r.seconds),
                    ]
                });
                vec![("table.csv".into(), csv(CONVERGENCE_HEADER, rows))]
            }
            (Report::Convergence(t), Format::Plotdata) => {
                let linf: Vec<f64> = t.rows.iter().map(|r| r.linf_theta).collect();
                let hm: Vec<f64> = t.rows.iter().map(|r| r.mean_dist_hm).collect();
                let l2h: Vec<f64> = t.rows.iter().map(|r| r.mean_dist_l2h).collect();
                vec![
                    ("mean_dist_Hm1.dat".into(), series(&linf, &hm, "linf_theta", "mean_dist_Hm1")),
                    ("mean_dist_L2H1m.dat".into(), series(&linf, &l2h, "linf_theta", "mean_dist_L2H1m")),
                ]
            }
            (Report::Consistency(t), Format::Csv) => {
                let rows = t.rows.iter().map(|r| vec![real(r.dt), real(r.mean_sup), real(r.std_sup), r.paths.to_string()]);
                vec![("consistency.csv".into(), csv(CONSISTENCY_HEADER, rows))]
            }
            (Report::Consistency(t), Format::Plotdata) => {
                let dt: Vec<f64> = t.rows.iter().map(|r| r.dt).collect();
                let m: Vec<f64> = t.rows.iter().map(|r| r.mean_sup).collect();
                vec![("mean_sup.dat".into(), series(&dt, &m, "dt", "mean_sup"))]
            }
        }
    }
}
