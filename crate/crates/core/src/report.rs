//! Tabular and JSON artifacts.
//!
//! Every table is a header plus rows of optional numbers; a missing value
//! is written as an empty cell. Floats use the shortest round-trip form so
//! identical runs produce identical bytes.

use std::io::Write;

use serde::Serialize;

use crate::dist::StrengthDistribution;
use crate::error::{Error, Result};
use crate::mc::SampleRecord;
use crate::mesh::FishnetMesh;
use crate::models::{p_delta, ModelKind, ModelParams};
use crate::solver::LinkStressField;
use crate::stats::{histogram, ystar, EmpiricalDistribution};

pub type Cell = Option<f64>;

#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub headers: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new<S: Into<String>>(headers: impl IntoIterator<Item = S>) -> Self {
        Self {
            headers: headers.into_iter().map(Into::into).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.headers.len());
        self.rows.push(row);
    }

    pub fn column(&self, name: &str) -> Option<Vec<Cell>> {
        let k = self.headers.iter().position(|h| h == name)?;
        Some(self.rows.iter().map(|r| r[k]).collect())
    }

    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        out.write_record(&self.headers).map_err(csv_err)?;
        for row in &self.rows {
            out.write_record(row.iter().map(|c| c.map(fmt_num).unwrap_or_default()))
                .map_err(csv_err)?;
        }
        out.flush()?;
        Ok(())
    }
}

fn csv_err(e: csv::Error) -> Error {
    Error::Io(std::io::Error::other(e))
}

fn fmt_num(v: f64) -> String {
    if v.is_nan() {
        String::new()
    } else if v.fract() == 0.0 && v.abs() < 1e15 {
        format!("{}", v as i64)
    } else {
        format!("{v:?}")
    }
}

fn finite(v: f64) -> Cell {
    v.is_finite().then_some(v)
}

pub fn write_json<W: Write, T: Serialize + ?Sized>(mut w: W, value: &T) -> Result<()> {
    serde_json::to_writer_pretty(&mut w, value)?;
    w.write_all(b"\n")?;
    Ok(())
}

/// `sample_id, peak_stress, r_p, total_failures`.
pub fn samples_table(records: &[SampleRecord]) -> Table {
    let mut t = Table::new(["sample_id", "peak_stress", "r_p", "total_failures"]);
    for r in records {
        t.push(vec![
            Some(r.sample_id as f64),
            Some(r.peak_stress),
            Some(r.failures_before_peak as f64),
            Some(r.total_failures as f64),
        ]);
    }
    t
}

/// `k, displacement, nominal_stress` of one recorded event curve.
pub fn curve_table(record: &SampleRecord) -> Table {
    let mut t = Table::new(["k", "displacement", "nominal_stress"]);
    for (k, e) in record.curve.iter().enumerate() {
        t.push(vec![Some(k as f64), Some(e.displacement), Some(e.nominal_stress)]);
    }
    t
}

/// Empirical CDF at every order statistic next to the model curves:
/// `sigma, Pf_emp, Ystar_emp, Pf_<model>..., Ystar_<model>...`.
pub fn cdf_table(e: &EmpiricalDistribution, p1: &StrengthDistribution, params: &ModelParams, models: &[ModelKind]) -> Table {
    let mut headers = vec!["sigma".to_string(), "Pf_emp".into(), "Ystar_emp".into()];
    headers.extend(models.iter().map(|m| format!("Pf_{}", m.name())));
    headers.extend(models.iter().map(|m| format!("Ystar_{}", m.name())));
    let mut t = Table::new(headers);
    for (s, p) in e.points() {
        let mut row = vec![Some(s), Some(p), ystar(p).ok()];
        let evals: Vec<_> = models.iter().map(|m| m.eval(p1, params, s)).collect();
        row.extend(evals.iter().map(|v| Some(v.pf)));
        row.extend(evals.iter().map(|v| finite(v.ln_hazard)));
        t.push(row);
    }
    t
}

/// `bin_center, density`.
pub fn hist_table(e: &EmpiricalDistribution, bins: usize) -> Result<Table> {
    let mut t = Table::new(["bin_center", "density"]);
    for (c, d) in histogram(e, bins)? {
        t.push(vec![Some(c), Some(d)]);
    }
    Ok(t)
}

/// `link_id, tail_i, tail_j, head_i, head_j, sigma, eta`.
pub fn eta_table(mesh: &FishnetMesh, field: &LinkStressField) -> Table {
    let mut t = Table::new(["link_id", "tail_i", "tail_j", "head_i", "head_j", "sigma", "eta"]);
    let nodes = mesh.nodes();
    for (l, link) in mesh.links().iter().enumerate() {
        let (a, b) = (nodes[link.tail], nodes[link.head]);
        t.push(vec![
            Some(l as f64),
            Some(a.i as f64),
            Some(a.j as f64),
            Some(b.i as f64),
            Some(b.j as f64),
            Some(field.sigma[l]),
            Some(field.eta[l]),
        ]);
    }
    t
}

pub const MODEL_COLUMNS: [ModelKind; 4] = [ModelKind::WeakestLink, ModelKind::TwoTerm, ModelKind::ThreeTerm, ModelKind::Bundle];

/// `sigma, P1, Pf_<model>..., P_delta, Ystar_<model>...` over a stress grid.
pub fn models_table(p1: &StrengthDistribution, params: &ModelParams, sigmas: &[f64]) -> Table {
    let mut headers = vec!["sigma".to_string(), "P1".into()];
    headers.extend(MODEL_COLUMNS.iter().map(|m| format!("Pf_{}", m.name())));
    headers.push("P_delta".into());
    headers.extend(MODEL_COLUMNS.iter().map(|m| format!("Ystar_{}", m.name())));
    let mut t = Table::new(headers);
    for &s in sigmas {
        let evals: Vec<_> = MODEL_COLUMNS.iter().map(|m| m.eval(p1, params, s)).collect();
        let mut row = vec![Some(s), Some(p1.fail_prob(s))];
        row.extend(evals.iter().map(|v| Some(v.pf)));
        row.push(p_delta(p1, params.eta_a, params.nu1, s).ok());
        row.extend(evals.iter().map(|v| finite(v.ln_hazard)));
        t.push(row);
    }
    t
}
