//! Canonical report serialization: JSON with sorted keys and CSV with a
//! verdict footer, both byte-deterministic for identical inputs.
//!
//! Rationals render in canonical lowest terms, floats with Rust's shortest
//! round-trip formatting, so reruns diff clean.

use serde_json::{json, Map, Value};

use crate::exch::ExchReport;
use crate::feller::{ConditionReport, Verdict};
use crate::mc::MCEstimate;
use crate::rational::{format_rational, Rational};

fn rational_array(xs: &[Rational]) -> Value {
    Value::Array(xs.iter().map(|x| Value::String(format_rational(x))).collect())
}

impl ConditionReport {
    pub fn to_json(&self) -> Value {
        let mut series = Map::new();
        for (name, values) in &self.series {
            series.insert(name.clone(), rational_array(values));
        }
        let mut verdicts = Map::new();
        for (name, verdict) in &self.verdicts {
            verdicts.insert(name.clone(), Value::String(verdict.as_str().into()));
        }
        json!({
            "grid": rational_array(&self.grid),
            "series": series,
            "verdicts": verdicts,
            "threshold": format_rational(&self.threshold),
            "window": self.window,
        })
    }

    pub fn to_json_string(&self) -> String {
        serde_json::to_string_pretty(&self.to_json()).expect("report is valid json")
    }

    /// One row per grid point, one column per series; verdicts and the
    /// verdict-rule parameters in `#`-prefixed footer lines.
    pub fn to_csv(&self) -> String {
        let names: Vec<&String> = self.series.keys().collect();
        let mut out = String::from("t");
        for name in &names {
            out.push(',');
            out.push_str(name);
        }
        out.push('\n');
        for (i, t) in self.grid.iter().enumerate() {
            out.push_str(&format_rational(t));
            for name in &names {
                out.push(',');
                out.push_str(&format_rational(&self.series[*name][i]));
            }
            out.push('\n');
        }
        push_verdict_footer(
            &mut out,
            &self.threshold,
            self.window,
            self.verdicts.iter().map(|(k, v)| (k.as_str(), *v)),
        );
        out
    }
}

impl ExchReport {
    pub fn to_json(&self) -> Value {
        let mut series = Map::new();
        for (name, values) in &self.series {
            series.insert(name.clone(), rational_array(values));
        }
        let mut verdicts = Map::new();
        for (name, verdict) in &self.verdicts {
            verdicts.insert(name.clone(), Value::String(verdict.as_str().into()));
        }
        json!({
            "grid": rational_array(&self.grid),
            "weights": rational_array(&self.weights),
            "exceedance": series,
            "verdicts": verdicts,
            "stat_threshold": format_rational(&self.stat_threshold),
            "prob_threshold": format_rational(&self.prob_threshold),
            "window": self.window,
        })
    }

    pub fn to_json_string(&self) -> String {
        serde_json::to_string_pretty(&self.to_json()).expect("report is valid json")
    }

    /// Exceedance probabilities, one row per grid point.
    pub fn to_csv(&self) -> String {
        let names: Vec<&String> = self.series.keys().collect();
        let mut out = String::from("t");
        for name in &names {
            out.push(',');
            out.push_str(name);
        }
        out.push('\n');
        for (i, t) in self.grid.iter().enumerate() {
            out.push_str(&format_rational(t));
            for name in &names {
                out.push(',');
                out.push_str(&format_rational(&self.series[*name][i]));
            }
            out.push('\n');
        }
        push_verdict_footer(
            &mut out,
            &self.prob_threshold,
            self.window,
            self.verdicts.iter().map(|(k, v)| (k.as_str(), *v)),
        );
        out
    }

    /// Long format with the component dimension explicit:
    /// `series,t,component,weight,value`.
    pub fn to_long_csv(&self) -> String {
        let mut out = String::from("series,t,component,weight,value\n");
        for (name, per_grid) in &self.component_values {
            for (i, t) in self.grid.iter().enumerate() {
                for (c, value) in per_grid[i].iter().enumerate() {
                    out.push_str(&format!(
                        "{},{},{},{},{}\n",
                        name,
                        format_rational(t),
                        c,
                        format_rational(&self.weights[c]),
                        format_rational(value),
                    ));
                }
            }
        }
        out
    }
}

fn push_verdict_footer<'a>(
    out: &mut String,
    threshold: &Rational,
    window: usize,
    verdicts: impl Iterator<Item = (&'a str, Verdict)>,
) {
    out.push_str(&format!("# threshold,{}\n", format_rational(threshold)));
    out.push_str(&format!("# window,{window}\n"));
    for (name, verdict) in verdicts {
        out.push_str(&format!("# verdict,{name},{}\n", verdict.as_str()));
    }
}

/// Deterministic shortest round-trip rendering for floats in CSV output.
pub fn fmt_f64(x: f64) -> String {
    format!("{x}")
}

/// One row of the simulation/bounds results table.
#[derive(Debug, Clone)]
pub struct SimulationRow {
    pub experiment: String,
    pub n: u64,
    pub eps: Rational,
    pub estimate: MCEstimate,
    pub seed: u64,
}

pub const SIMULATION_HEADER: &str = "experiment,N,eps,estimate,stderr,ci_low,ci_high,reps,seed";

/// Results CSV: fixed column set, one row per estimate. Raw hit counts ride
/// along in the JSON rendering instead of widening this table.
pub fn simulation_csv(rows: &[SimulationRow]) -> String {
    let mut out = String::from(SIMULATION_HEADER);
    out.push('\n');
    for row in rows {
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{},{}\n",
            row.experiment,
            row.n,
            format_rational(&row.eps),
            fmt_f64(row.estimate.value),
            fmt_f64(row.estimate.stderr),
            fmt_f64(row.estimate.ci_low),
            fmt_f64(row.estimate.ci_high),
            row.estimate.reps,
            row.seed,
        ));
    }
    out
}

/// JSON object for one estimate, including the raw count.
pub fn estimate_json(est: &MCEstimate) -> Value {
    json!({
        "value": est.value,
        "stderr": est.stderr,
        "ci_low": est.ci_low,
        "ci_high": est.ci_high,
        "hits": est.hits,
        "reps": est.reps,
    })
}
