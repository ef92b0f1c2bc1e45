use std::fmt::Write;

use serde::Serialize;

use crate::error::{QmargError, Result};
use crate::gpc::PinningReport;
use crate::harmonium::{NonPoint, ScanSummary};
use crate::schubert::{HerschZwahlenReport, InequalityVerdict};
use crate::selection::SelectionReport;

pub fn to_json<T: Serialize>(value: &T) -> Result<String> {
    let mut s = serde_json::to_string_pretty(value).map_err(|e| QmargError::Parse(e.to_string()))?;
    s.push('\n');
    Ok(s)
}

/// 17 significant digits.
fn g17(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn scan_csv(summary: &ScanSummary) -> String {
    let mut s = String::from("kappa,D,hf_dist,eps6,norm_deficit\n");
    for p in &summary.points {
        let _ = writeln!(s, "{},{},{},{},{}", g17(p.kappa), g17(p.d), g17(p.hf_dist), g17(p.eps6), g17(p.norm_deficit));
    }
    s
}

pub fn non_curve_csv(curve: &[NonPoint]) -> String {
    let d = curve.first().map_or(0, |p| p.lambdas.len());
    let mut s = String::from("kappa");
    for i in 1..=d {
        let _ = write!(s, ",lambda{i}");
    }
    s.push_str(",eps6,norm_deficit\n");
    for p in curve {
        s.push_str(&g17(p.kappa));
        for l in &p.lambdas {
            s.push(',');
            s.push_str(&g17(*l));
        }
        let _ = writeln!(s, ",{},{}", g17(p.eps6), g17(p.norm_deficit));
    }
    s
}

/// Scan settings and fitted exponents without the per-point spectra.
#[derive(Serialize)]
pub struct ScanSummaryView {
    pub n: usize,
    pub basis_size: usize,
    pub nodes: usize,
    pub points: usize,
    pub kappa_min: f64,
    pub kappa_max: f64,
    pub slope_d: Option<f64>,
    pub slope_hf: Option<f64>,
    pub floor_reached: bool,
}

impl From<&ScanSummary> for ScanSummaryView {
    fn from(s: &ScanSummary) -> Self {
        Self {
            n: s.n,
            basis_size: s.basis_size,
            nodes: s.nodes,
            points: s.points.len(),
            kappa_min: s.points.iter().map(|p| p.kappa).fold(f64::INFINITY, f64::min),
            kappa_max: s.points.iter().map(|p| p.kappa).fold(f64::NEG_INFINITY, f64::max),
            slope_d: s.slope_d,
            slope_hf: s.slope_hf,
            floor_reached: s.floor_reached,
        }
    }
}

pub fn pinning_text(r: &PinningReport) -> String {
    let mut s = format!("setting (N, d) = ({}, {}), pin tolerance {:e}\n", r.n, r.d, r.pin_tol);
    for v in &r.values {
        let _ = writeln!(s, "{:<14} {:>6}  {:+.16e}", v.label, format!("{:?}", v.kind).to_lowercase(), v.value);
    }
    let _ = writeln!(s, "D = {:.16e} ({})", r.min_inequality_value, r.min_inequality_label);
    let _ = writeln!(s, "hartree-fock distance = {:.16e}", r.hf_distance);
    if let Some(w) = r.truncation_weight {
        let _ = writeln!(s, "truncation weight = {w:.16e}");
    }
    let _ = writeln!(s, "pinned: {}", if r.saturated.is_empty() { "none".into() } else { r.saturated.join(", ") });
    for q in &r.quasipinned {
        let labels = if q.labels.is_empty() { "none".into() } else { q.labels.join(", ") };
        let _ = writeln!(s, "quasipinned below {:e}: {labels}", q.threshold);
    }
    if !r.violations.is_empty() {
        let _ = writeln!(s, "VIOLATED: {}", r.violations.join(", "));
    }
    s
}

pub fn selection_text(r: &SelectionReport) -> String {
    let sat = if r.saturated.is_empty() { "none".into() } else { r.saturated.join(", ") };
    let mut s = format!("setting (N, d) = ({}, {}), saturated: {sat}\n", r.n, r.d);
    let _ = writeln!(s, "{} determinants:", r.ansatz.len());
    for det in &r.ansatz {
        let labels: Vec<String> = det.iter().map(usize::to_string).collect();
        let _ = writeln!(s, "  |{}>", labels.join(","));
    }
    if let Some(lemma) = &r.lemma {
        for l in lemma {
            let verdict = match l.consistent {
                Some(true) => "consistent",
                Some(false) => "INCONSISTENT",
                None => "degenerate occupations, not decided",
            };
            let _ = writeln!(s, "lemma {}: value {:.3e}, residual {:.3e}, {verdict}", l.label, l.constraint_value, l.residual);
        }
    }
    if let Some(w) = r.out_of_support_weight {
        let _ = writeln!(s, "weight outside ansatz = {w:.16e}");
    }
    s
}

pub fn hz_text(results: &[HerschZwahlenReport], all_passed: bool) -> String {
    let mut s = String::new();
    for r in results {
        let min = r.min_sampled.map_or("-".to_string(), |m| format!("{m:+.12e}"));
        let _ = writeln!(
            s,
            "{} target {:+.12e} candidate {:+.12e} min sampled {min} {}",
            r.pi,
            r.target,
            r.candidate_value,
            if r.passed { "ok" } else { "FAIL" }
        );
    }
    let _ = writeln!(s, "{}", if all_passed { "all sequences passed" } else { "some sequences FAILED" });
    s
}

pub fn ineq_text(v: &InequalityVerdict) -> String {
    let mut s = format!("pi = {}, sigma = {}, d_A = {}, d_B = {}, samples = {}\n", v.pi, v.sigma, v.d_a, v.d_b, v.samples);
    match &v.witness {
        None => {
            let _ = writeln!(s, "never violated (max lhs - rhs = {:+.6e})", v.max_excess);
        }
        Some(w) => {
            let _ = writeln!(s, "violated at trial {} ({} state): lhs {:.12e} > rhs {:.12e}", w.trial, if w.pure { "pure" } else { "mixed" }, w.lhs, w.rhs);
            let _ = writeln!(s, "lambda_A = {:?}", w.lambda_a);
            let _ = writeln!(s, "lambda_AB = {:?}", w.lambda_ab);
        }
    }
    s
}
