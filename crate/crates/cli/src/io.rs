//! Text formats read and written by the command-line tool.
//!
//! Decimals are written with the shortest representation that parses back to
//! the same `f64`.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use cmc_core::sampler::FeasibleSample;
use cmc_core::simulator::ScenarioBatch;
use cmc_core::{
    ChiDistribution, ModelParams, NondeteriorationProbs, Observation, QMatrix, RatingPanel, TraceRecord,
    TransitionMatrix,
};
use serde::{Deserialize, Serialize};

use crate::error::{CliError, Result};

fn reader(path: &Path, headers: bool) -> Result<csv::Reader<fs::File>> {
    let file = fs::File::open(path).map_err(|e| CliError::io(path, e))?;
    Ok(csv::ReaderBuilder::new()
        .has_headers(headers)
        .trim(csv::Trim::All)
        .comment(Some(b'#'))
        .from_reader(file))
}

pub fn write_file(path: &Path, contents: &str) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    }
    fs::write(path, contents).map_err(|e| CliError::io(path, e))
}

#[derive(Debug, Deserialize)]
struct PanelRow {
    company_id: String,
    sector: usize,
    year: i64,
    rating: usize,
}

/// Raw observations of a panel file with header `company_id,sector,year,rating`.
pub fn read_observations(path: &Path) -> Result<Vec<Observation>> {
    let mut rdr = reader(path, true)?;
    let headers = rdr.headers().map_err(|e| CliError::parse(path, e))?.clone();
    if headers.is_empty() {
        return Err(CliError::parse(path, "empty panel file"));
    }
    let want = ["company_id", "sector", "year", "rating"];
    if headers.iter().ne(want) {
        return Err(CliError::parse(path, format!("expected header {}", want.join(","))));
    }
    let mut out = Vec::new();
    for row in rdr.deserialize::<PanelRow>() {
        let row = row.map_err(|e| CliError::parse(path, e))?;
        out.push(Observation { company: row.company_id, sector: row.sector, period: row.year, rating: row.rating });
    }
    if out.is_empty() {
        return Err(CliError::parse(path, "panel has no observations"));
    }
    Ok(out)
}

/// Reads a panel over `classes` non-default classes; when `classes` is
/// `None` the highest rating present is taken as default.
pub fn read_panel(path: &Path, classes: Option<usize>) -> Result<RatingPanel> {
    let obs = read_observations(path)?;
    let classes = match classes {
        Some(m) => m,
        None => obs.iter().map(|o| o.rating).max().unwrap_or(1).saturating_sub(1).max(1),
    };
    Ok(RatingPanel::new(obs, classes)?)
}

pub fn format_panel(panel: &RatingPanel) -> String {
    let mut s = String::from("company_id,sector,year,rating\n");
    for o in panel.observations() {
        let _ = writeln!(s, "{},{},{},{}", o.company, o.sector, o.period, o.rating);
    }
    s
}

fn parse_f64(path: &Path, field: &str) -> Result<f64> {
    field
        .parse::<f64>()
        .map_err(|_| CliError::parse(path, format!("not a number: {field:?}")))
}

/// Square matrix CSV without header.
pub fn read_matrix(path: &Path) -> Result<TransitionMatrix<f64>> {
    let mut rdr = reader(path, false)?;
    let mut rows = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(|e| CliError::parse(path, e))?;
        rows.push(rec.iter().map(|f| parse_f64(path, f)).collect::<Result<Vec<f64>>>()?);
    }
    if rows.is_empty() {
        return Err(CliError::parse(path, "empty matrix file"));
    }
    Ok(TransitionMatrix::new(rows)?)
}

fn join(values: &[f64]) -> String {
    values.iter().map(f64::to_string).collect::<Vec<_>>().join(",")
}

pub fn format_matrix(p: &TransitionMatrix<f64>) -> String {
    p.rows().iter().map(|r| join(r) + "\n").collect()
}

/// `bitmask_index,probability` lines in ascending index order.
pub fn format_chi(chi: &ChiDistribution<f64>) -> String {
    chi.probs().iter().enumerate().map(|(k, p)| format!("{k},{p}\n")).collect()
}

pub fn read_chi(path: &Path, np: &NondeteriorationProbs<f64>) -> Result<ChiDistribution<f64>> {
    let mut rdr = reader(path, false)?;
    let mut probs = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(|e| CliError::parse(path, e))?;
        if rec.len() != 2 {
            return Err(CliError::parse(path, "expected bitmask_index,probability"));
        }
        let k: usize = rec[0].parse().map_err(|_| CliError::parse(path, format!("bad index {:?}", &rec[0])))?;
        if k != probs.len() {
            return Err(CliError::parse(path, format!("index {k} out of order")));
        }
        probs.push(parse_f64(path, &rec[1])?);
    }
    Ok(ChiDistribution::new(probs, np)?)
}

/// Estimation result document.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultFile {
    /// `M` rows of `S` switching probabilities.
    pub q: Vec<Vec<f64>>,
    pub chi: Vec<f64>,
    /// `null` when the likelihood is not finite.
    pub loglik: Option<f64>,
    pub method: String,
    pub seed: u64,
    pub iterations: usize,
}

impl ResultFile {
    pub fn new(params: &ModelParams<f64>, loglik: f64, method: &str, seed: u64, iterations: usize) -> Self {
        ResultFile {
            q: params.q.rows(),
            chi: params.chi.probs().to_vec(),
            loglik: loglik.is_finite().then_some(loglik),
            method: method.to_string(),
            seed,
            iterations,
        }
    }

    pub fn params(&self, np: &NondeteriorationProbs<f64>) -> cmc_core::Result<ModelParams<f64>> {
        let classes = self.q.len();
        let sectors = self.q.first().map_or(0, Vec::len);
        if self.q.iter().any(|r| r.len() != sectors) {
            return Err(cmc_core::CmcError::InvalidParams("ragged q rows".into()));
        }
        let q = QMatrix::new(classes, sectors, self.q.concat())?;
        let chi = ChiDistribution::new(self.chi.clone(), np)?;
        ModelParams::new(q, chi)
    }
}

pub fn format_result(r: &ResultFile) -> String {
    serde_json::to_string_pretty(r).expect("result serializes") + "\n"
}

pub fn read_result(path: &Path) -> Result<ResultFile> {
    let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    serde_json::from_str(&text).map_err(|e| CliError::parse(path, e))
}

pub fn format_trace(trace: &[TraceRecord<f64>]) -> String {
    let mut s = String::from("iteration,best,mean,variance\n");
    for r in trace {
        let _ = writeln!(s, "{},{},{},{}", r.iteration, r.best, r.mean, r.variance);
    }
    s
}

/// `replication,company,period,rating`; period 0 holds the initial ratings.
pub fn format_scenarios(batch: &ScenarioBatch, companies: &[String]) -> String {
    let mut s = String::with_capacity(batch.len() * 16 + 32);
    s.push_str("replication,company,period,rating\n");
    for r in 0..batch.replications {
        for (c, name) in companies.iter().enumerate() {
            for t in 0..=batch.periods {
                let _ = writeln!(s, "{r},{name},{t},{}", batch.rating(r, c, t));
            }
        }
    }
    s
}

fn chi_header(first: &str, dim: usize) -> String {
    let mut s = String::from(first);
    for k in 0..dim {
        let _ = write!(s, ",chi_{k}");
    }
    s.push('\n');
    s
}

/// Every point of the feasible sample with its direction (empty for the
/// centroid) and line parameter.
pub fn format_samples(sample: &FeasibleSample<f64>) -> String {
    let dim = sample.centroid.probs().len();
    let mut s = chi_header("sample,direction,lambda", dim);
    for (i, (chi, prov)) in sample.samples.chi_samples.iter().zip(&sample.samples.provenance).enumerate() {
        let dir = prov.direction.map(|d| d.to_string()).unwrap_or_default();
        let _ = writeln!(s, "{i},{dir},{},{}", prov.lambda, join(chi.probs()));
    }
    s
}

pub fn format_vertices(vertices: &[ChiDistribution<f64>]) -> String {
    let dim = vertices.first().map_or(0, |v| v.probs().len());
    let mut s = chi_header("vertex", dim);
    for (i, v) in vertices.iter().enumerate() {
        let _ = writeln!(s, "{i},{}", join(v.probs()));
    }
    s
}

/// Reads back a samples file as plain probability vectors.
pub fn read_samples(path: &Path) -> Result<Vec<Vec<f64>>> {
    let mut rdr = reader(path, true)?;
    let mut out = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(|e| CliError::parse(path, e))?;
        out.push(rec.iter().skip(3).map(|f| parse_f64(path, f)).collect::<Result<Vec<f64>>>()?);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn shortest_decimal_round_trips() {
        for x in [0.1, 1.0 / 3.0, 0.9191, 1e-17, 0.30000000000000004, 0.0] {
            let s = x.to_string();
            assert_eq!(s.parse::<f64>().unwrap(), x);
        }
    }

    #[test]
    fn chi_lines() {
        let np = NondeteriorationProbs::new(vec![0.25]).unwrap();
        let chi = ChiDistribution::new(vec![0.75, 0.25], &np).unwrap();
        assert_eq!(format_chi(&chi), "0,0.75\n1,0.25\n");
    }

    #[test]
    fn null_loglik_when_not_finite() {
        let np = NondeteriorationProbs::new(vec![0.25]).unwrap();
        let params = ModelParams::new(QMatrix::filled(1, 1, 0.5).unwrap(), ChiDistribution::independent(&np)).unwrap();
        let r = ResultFile::new(&params, f64::NEG_INFINITY, "pso", 1, 0);
        assert!(format_result(&r).contains("\"loglik\": null"));
    }
}
