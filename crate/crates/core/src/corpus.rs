//! The shipped pp-formula corpus and the per-formula soundness run used by
//! tests and `selftest`.

use std::collections::BTreeSet;

use serde::Serialize;

use crate::coeff_field::FiniteField;
use crate::formula::{parse_pp, PPFormula};
use crate::model_checker::{compare, CompareReport, SamplerConfig};
use crate::qe_engine::{eliminate, Mode, QeError, Trace};
use crate::series_field::Lattice;
use crate::text::Ctx;

pub const SHIPPED: &str = include_str!("../corpus/qe_corpus.lv");

/// Rule names (and Υ-comparison outcomes) the corpus must exercise.
pub const REQUIRED: &[&str] = &[
    "normalizeI",
    "sep",
    "sepequation",
    "degree-reduce",
    "cas1:i",
    "cas1:ii",
    "cas2",
    "cas3:0",
    "cas3:1",
    "cas6",
    "cas_constante",
    "caseA",
    "caseA′",
    "caseB",
    "caseB′",
    "tf",
];

#[derive(Debug, Clone)]
pub struct Entry {
    pub name: String,
    pub field: String,
    pub formula: String,
}

impl Entry {
    pub fn ctx(&self) -> Result<Ctx, String> {
        let f = FiniteField::from_spec(&self.field).map_err(|e| e.to_string())?;
        Ok(Ctx::new(f, Lattice::Full))
    }

    pub fn parse(&self) -> Result<(Ctx, PPFormula), String> {
        let ctx = self.ctx()?;
        let phi = parse_pp(&self.formula, &ctx).map_err(|e| format!("{}: {}", self.name, e))?;
        Ok((ctx, phi))
    }
}

/// Lines `name | p^k | formula`; `#` starts a comment.
pub fn parse_corpus(src: &str) -> Result<Vec<Entry>, String> {
    let mut out = vec![];
    for (i, line) in src.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let parts: Vec<&str> = line.splitn(3, '|').map(str::trim).collect();
        if parts.len() != 3 {
            return Err(format!("line {}: expected `name | field | formula`", i + 1));
        }
        out.push(Entry { name: parts[0].into(), field: parts[1].into(), formula: parts[2].into() });
    }
    Ok(out)
}

pub fn shipped() -> Vec<Entry> {
    parse_corpus(SHIPPED).expect("shipped corpus parses")
}

/// Rule names with the branch taken by the Υ comparisons that have one.
pub fn coverage_keys(trace: &Trace) -> BTreeSet<String> {
    let mut keys = BTreeSet::new();
    for s in &trace.steps {
        keys.insert(s.rule.clone());
        match s.rule.as_str() {
            "cas1" => {
                keys.insert(format!("cas1:{}", s.thresholds["branch"]));
            }
            "cas3" | "caseB′" | "caseB" | "cas2" => {
                if let Some(i) = s.thresholds.get("index") {
                    keys.insert(format!("{}:{}", s.rule, i));
                }
            }
            _ => {}
        }
    }
    keys
}

/// Case B separability degrees must drop strictly, per variable.
pub fn sepdeg_decreasing(trace: &Trace) -> bool {
    let mut last: Option<(String, usize)> = None;
    for s in trace.steps.iter().filter(|s| s.rule == "cas2" || s.rule == "caseB") {
        if s.thresholds.get("case").is_some() {
            continue;
        }
        if let Some((v, d)) = &last {
            if *v == s.var && s.sepdeg[0] >= *d {
                return false;
            }
        }
        last = Some((s.var.clone(), s.sepdeg[0]));
    }
    true
}

#[derive(Debug, Clone, Serialize)]
pub struct EntryReport {
    pub name: String,
    pub formula: String,
    pub result: String,
    pub rules: Vec<String>,
    pub sepdeg_decreasing: bool,
    /// Output mentions only free variables of the input.
    pub quantifier_free: bool,
    pub modes_agree_on_model_output: bool,
    pub compare: CompareReport,
    #[serde(skip)]
    pub coverage: BTreeSet<String>,
}

impl EntryReport {
    pub fn sound(&self) -> bool {
        self.sepdeg_decreasing
            && self.quantifier_free
            && self.modes_agree_on_model_output
            && self.compare.disagree() == 0
            && self.compare.tf_premise_violations == 0
    }
}

/// Eliminates in both modes and compares the torsion-free run against the
/// model checker.
pub fn run_entry(e: &Entry, cfg: &SamplerConfig) -> Result<EntryReport, String> {
    let (ctx, phi) = e.parse()?;
    let err = |x: QeError| format!("{}: {}", e.name, x);
    let tf = eliminate(&phi, &ctx, &Mode::TorsionFree).map_err(err)?;
    let tt = eliminate(&phi, &ctx, &Mode::TTor).map_err(err)?;
    let free = phi.free_vars();
    let rep = compare(&tf, cfg);
    let mut coverage = coverage_keys(&tf.trace);
    coverage.extend(coverage_keys(&tt.trace));
    Ok(EntryReport {
        name: e.name.clone(),
        formula: e.formula.clone(),
        result: tf.qf.to_string(),
        rules: tf.trace.rules().into_iter().map(String::from).collect(),
        sepdeg_decreasing: sepdeg_decreasing(&tf.trace) && sepdeg_decreasing(&tt.trace),
        quantifier_free: tf.qf.vars().is_subset(&free) && tt.qf.vars().is_subset(&free),
        modes_agree_on_model_output: tf.model_qf.atoms == tt.model_qf.atoms && tf.model_qf.falsum == tt.model_qf.falsum,
        compare: rep,
        coverage,
    })
}
