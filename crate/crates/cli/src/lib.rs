//! Batch commands over the tutor engine. Each command returns its standard
//! output, or a failure carrying the process exit code.

use std::fmt;

use logex_core::diagnose::{diagnose, DiagnosisRecord, Mode, StepSubmission};
use logex_core::exercise::{content_hash, load_exercises, validate_set, ExerciseError};
use logex_core::policy::FeedbackPolicy;
use logex_core::session::{parse_log, split_sessions, MetricsReport, Session};
use logex_core::state::{ChainDirection, Step};
use logex_core::strategy::{solve_normal_form, solve_proof, NormalForm, ProofError};
use logex_core::{parse, Formula};

pub const EXIT_USAGE: u8 = 1;
pub const EXIT_PARSE: u8 = 2;
pub const EXIT_SEMANTIC: u8 = 3;
pub const EXIT_MALFORMED_LOG: u8 = 4;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Failure {
    pub code: u8,
    pub message: String,
}

impl Failure {
    fn new(code: u8, message: impl Into<String>) -> Self {
        Failure {
            code,
            message: message.into(),
        }
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

pub type Output = Result<String, Failure>;

fn formula(label: &str, text: &str) -> Result<Formula, Failure> {
    parse(text).map_err(|e| Failure::new(EXIT_PARSE, format!("{label}: {e}")))
}

fn step_line(out: &mut String, prefix: &str, step: &Step) {
    let rule = step.rule_id().unwrap_or("-");
    let rtl = match step {
        Step::Rule(app) if app.direction == logex_core::rules::RuleDirection::RightToLeft => " (right to left)",
        _ => "",
    };
    out.push_str(&format!("{prefix}{rule}{rtl}\t{}\n", step.after()));
}

/// One line per strategy step: rule id, then the new formula.
pub fn solve(text: &str, nf: NormalForm) -> Output {
    let start = formula("formula", text)?;
    let d = solve_normal_form(&start, nf);
    let mut out = String::new();
    for s in &d.steps {
        step_line(&mut out, "", s);
    }
    Ok(out)
}

/// Forward steps from the left formula, then backward steps from the right
/// formula, each line prefixed with its direction.
pub fn prove(lhs: &str, rhs: &str) -> Output {
    let (l, r) = (formula("left formula", lhs)?, formula("right formula", rhs)?);
    let proof = solve_proof(&l, &r).map_err(|e| match e {
        ProofError::NotEquivalent(v) => {
            let cex: Vec<String> = v.iter().map(|(a, b)| format!("{a}={}", u8::from(b))).collect();
            Failure::new(
                EXIT_SEMANTIC,
                format!("the formulas are not equivalent; they differ at {}", cex.join(" ")),
            )
        }
        other => Failure::new(EXIT_SEMANTIC, other.to_string()),
    })?;
    let mut out = String::new();
    for s in &proof.forward {
        step_line(&mut out, "forward\t", s);
    }
    for s in &proof.backward {
        step_line(&mut out, "backward\t", s);
    }
    Ok(out)
}

/// Arguments of `check`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CheckArgs {
    pub before: String,
    pub after: String,
    pub rule: Option<String>,
    pub strict: bool,
    pub direction: ChainDirection,
    pub policy: FeedbackPolicy,
}

/// The diagnosis record of one step, as the service would report it
/// without exercise-dependent advisories.
pub fn check_record(args: &CheckArgs) -> Result<DiagnosisRecord, Failure> {
    let before = formula("before", &args.before)?;
    let diag = diagnose(&StepSubmission {
        before,
        after_text: args.after.clone(),
        claimed_rule: args.rule.clone(),
        mode: if args.strict { Mode::Strict } else { Mode::Lenient },
        direction: args.direction,
    });
    Ok(args.policy.apply(diag).record())
}

pub fn check(args: &CheckArgs) -> Output {
    let record = check_record(args)?;
    Ok(serde_json::to_string(&record).expect("records serialize") + "\n")
}

pub fn policy_from_toml(text: &str) -> Result<FeedbackPolicy, Failure> {
    toml::from_str(text).map_err(|e| Failure::new(EXIT_USAGE, format!("policy file: {e}")))
}

/// Loads and validates an exercise file.
pub fn validate_exercises(text: &str) -> Output {
    let set = load_exercises(text)
        .and_then(|set| validate_set(&set).map(|()| set))
        .map_err(|e| {
            let code = match &e {
                ExerciseError::Malformed { .. } | ExerciseError::Syntax(_) => EXIT_PARSE,
                ExerciseError::Invalid { source, .. } if matches!(**source, ExerciseError::Syntax(_)) => EXIT_PARSE,
                _ => EXIT_SEMANTIC,
            };
            Failure::new(code, e.to_string())
        })?;
    let mut out = String::new();
    for ex in &set {
        let steps = ex.worked_length().unwrap_or_default();
        out.push_str(&format!(
            "{}\t{}\t{}\t{steps} steps\n",
            ex.id,
            ex.kind.as_str(),
            serde_json::to_value(ex.difficulty).unwrap().as_str().unwrap_or_default()
        ));
    }
    out.push_str(&format!("{} exercises, sha256 {}\n", set.len(), content_hash(text)));
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Metric {
    Errors,
    Time,
    Efficiency,
    Completion,
}

impl Metric {
    pub fn columns(self) -> &'static [&'static str] {
        match self {
            Metric::Errors => &["session", "exercise", "kind", "accepted", "errors", "error_fraction"],
            Metric::Time => &["session", "exercise", "kind", "accepted", "minutes_per_step", "partial"],
            Metric::Efficiency => &["session", "exercise", "kind", "accepted", "required", "completed", "efficiency"],
            Metric::Completion => &["session", "kind", "exercises", "completion_ratio", "error_count"],
        }
    }
}

/// Shortest of up to four decimals, keeping one: 1.0, 0.5, 0.3333.
pub fn number(x: f64) -> String {
    let s = format!("{x:.4}");
    let s = s.trim_end_matches('0');
    if s.ends_with('.') {
        format!("{s}0")
    } else {
        s.to_string()
    }
}

fn opt(x: Option<f64>) -> String {
    x.map(number).unwrap_or_default()
}

fn rows(report: &MetricsReport, metric: Metric) -> Vec<Vec<String>> {
    let s = &report.session;
    if metric == Metric::Completion {
        return report
            .sets
            .iter()
            .map(|set| {
                vec![
                    s.clone(),
                    set.kind.as_str().to_string(),
                    set.exercises.to_string(),
                    opt(set.completion_ratio),
                    set.error_count.to_string(),
                ]
            })
            .collect();
    }
    report
        .exercises
        .iter()
        .map(|e| {
            let mut row = vec![s.clone(), e.exercise.clone(), e.kind.as_str().to_string(), e.accepted.to_string()];
            match metric {
                Metric::Errors => row.extend([e.errors.to_string(), opt(e.error_fraction)]),
                Metric::Time => row.extend([opt(e.time_per_correct_step), e.time_partial.to_string()]),
                Metric::Efficiency => {
                    row.extend([e.required.to_string(), e.completed.to_string(), opt(e.efficiency)])
                }
                Metric::Completion => unreachable!(),
            }
            row
        })
        .collect()
}

fn table(header: &[&str], rows: &[Vec<String>]) -> String {
    let mut widths: Vec<usize> = header.iter().map(|h| h.len()).collect();
    for r in rows {
        for (w, c) in widths.iter_mut().zip(r) {
            *w = (*w).max(c.chars().count().max(1));
        }
    }
    let line = |cells: Vec<&str>| {
        let padded: Vec<String> = cells
            .iter()
            .zip(&widths)
            .map(|(c, w)| {
                let c = if c.is_empty() { "-" } else { c };
                format!("{c:<w$}")
            })
            .collect();
        padded.join("  ").trim_end().to_string() + "\n"
    };
    let mut out = line(header.to_vec());
    for r in rows {
        out.push_str(&line(r.iter().map(String::as_str).collect()));
    }
    out
}

fn csv_text(header: &[&str], rows: &[Vec<String>]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header).expect("in-memory write");
    for r in rows {
        w.write_record(r).expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8 cells")
}

/// Replays every session of a log and tabulates one metric, sessions in id
/// order.
pub fn analyze(log: &str, metric: Metric, csv: bool) -> Output {
    let events =
        parse_log(log).map_err(|(line, e)| Failure::new(EXIT_MALFORMED_LOG, format!("line {line}: {e}")))?;
    let mut all = Vec::new();
    for (id, evs) in split_sessions(&events) {
        let s = Session::replay(&evs)
            .map_err(|e| Failure::new(EXIT_MALFORMED_LOG, format!("session `{id}`: {e}")))?;
        all.extend(rows(&s.metrics(), metric));
    }
    Ok(if csv {
        csv_text(metric.columns(), &all)
    } else {
        table(metric.columns(), &all)
    })
}
