//! Running scenarios and rendering the resulting tables.

use std::fmt::Write as _;

use crate::convolution::ConvolutionSpec;
use crate::error::{Error, Result};
use crate::family::PowerSeriesFamily;
use crate::nb::{self, FitRequest, NbParams, RRule, TauEstimate};
use crate::oracle::{self, ValidationReport};
use crate::poisson::{self, StepConstant};
use crate::report::{BoundEntry, BoundReport};
use crate::scenario::{Format, Method, Scenario};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RunOptions {
    pub eps: f64,
    pub certify: bool,
    pub support_cap: usize,
}

impl Default for RunOptions {
    fn default() -> Self {
        Self {
            eps: crate::DEFAULT_EPS,
            certify: false,
            support_cap: oracle::DEFAULT_SUPPORT_CAP,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Value(BoundEntry),
    Infeasible(String),
}

impl Cell {
    pub fn value(&self) -> Option<f64> {
        match self {
            Self::Value(e) => Some(e.value),
            Self::Infeasible(_) => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Row {
    pub n: usize,
    pub cells: Vec<Cell>,
    pub certification: Option<ValidationReport>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ResultTable {
    pub name: String,
    pub family: PowerSeriesFamily,
    pub columns: Vec<String>,
    pub rows: Vec<Row>,
    pub r_rule: RRule,
    pub eps: f64,
}

impl ResultTable {
    pub fn column(&self, name: &str) -> Option<Vec<Option<f64>>> {
        let idx = self.columns.iter().position(|c| c == name)?;
        Some(self.rows.iter().map(|r| r.cells[idx].value()).collect())
    }

    /// True when no cell has a value.
    pub fn all_infeasible(&self) -> bool {
        self.rows
            .iter()
            .flat_map(|r| r.cells.iter())
            .all(|c| matches!(c, Cell::Infeasible(_)))
    }

    pub fn violations(&self) -> usize {
        self.rows
            .iter()
            .filter_map(|r| r.certification.as_ref())
            .map(|c| c.violations.len())
            .sum()
    }
}

/// Lazily computed per-row state shared by the methods.
struct RowContext<'a> {
    spec: &'a ConvolutionSpec,
    r: f64,
    eps: f64,
    two: Option<Result<NbParams>>,
    tau: Option<Result<TauEstimate>>,
}

impl RowContext<'_> {
    fn two_moment(&mut self) -> Result<NbParams> {
        self.two
            .get_or_insert_with(|| nb::fit_params(self.spec, FitRequest::TwoMoment))
            .clone()
    }

    fn tau(&mut self) -> Result<TauEstimate> {
        let (spec, eps) = (self.spec, self.eps);
        self.tau
            .get_or_insert_with(|| nb::tau_upper(spec, eps))
            .clone()
    }
}

fn resolve(method: Method, family: PowerSeriesFamily, prefer: bool, rule: RRule) -> Method {
    if !prefer {
        return method;
    }
    match (method, family) {
        (Method::Poisson, PowerSeriesFamily::Geometric) => Method::PoissonEqn,
        (Method::Poisson, PowerSeriesFamily::Bernoulli) => Method::PoissonBer,
        (Method::NbOne, PowerSeriesFamily::Geometric) => Method::NbEqn1,
        (Method::NbOne, PowerSeriesFamily::Bernoulli) if rule == RRule::N => Method::NbQwqw,
        (Method::NbTwo, PowerSeriesFamily::Geometric) => Method::NbEqn2,
        _ => method,
    }
}

fn evaluate(method: Method, ctx: &mut RowContext<'_>) -> Result<BoundEntry> {
    let spec = ctx.spec;
    let eps = ctx.eps;
    match method {
        Method::Poisson => poisson::poisson_bound_matched(spec, eps),
        Method::PoissonBh => {
            poisson::poisson_bound_general(spec, spec.mean(), eps, StepConstant::BarbourHall)
        }
        Method::PoissonCrude => poisson::poisson_bound_crude(spec, spec.mean()),
        Method::PoissonEqn => poisson::poisson_eqn(spec),
        Method::PoissonBer => poisson::poisson_ber(spec),
        Method::NbOne => {
            let params = nb::fit_params(spec, FitRequest::OneMoment { r: ctx.r })?;
            nb::nb_bound_one(spec, &params, eps)
        }
        Method::NbTwo => {
            let params = ctx.two_moment()?;
            let tau = ctx.tau()?;
            nb::nb_bound_two(spec, &params, &tau, eps)
        }
        Method::NbEqn1 => nb::nb_eqn1(spec, ctx.r),
        Method::NbEqn2 => nb::nb_eqn2(spec),
        Method::NbQwqw => nb::nb_qwqw(spec),
    }
}

/// Computes one row per `n`. Methods that fail for a row become
/// [`Cell::Infeasible`]; the run carries on.
pub fn run_scenario(scenario: &Scenario, opts: &RunOptions) -> Result<ResultTable> {
    crate::instance::check_eps(opts.eps)?;
    let mut rows = Vec::with_capacity(scenario.n_values.len());
    for &n in &scenario.n_values {
        let spec = ConvolutionSpec::from_params(scenario.family, &scenario.params_for(n))?;
        let mut ctx = RowContext {
            spec: &spec,
            r: scenario.nb_r_rule.resolve(n),
            eps: opts.eps,
            two: None,
            tau: None,
        };
        let cells: Vec<Cell> = scenario
            .methods
            .iter()
            .map(|&m| {
                let m = resolve(
                    m,
                    scenario.family,
                    scenario.prefer_closed_forms,
                    scenario.nb_r_rule,
                );
                match evaluate(m, &mut ctx) {
                    Ok(entry) => Cell::Value(entry),
                    Err(e) => Cell::Infeasible(e.to_string()),
                }
            })
            .collect();
        let certification = if opts.certify {
            let mut report = BoundReport::new(spec.mean());
            for cell in &cells {
                if let Cell::Value(e) = cell {
                    report.push(e.clone());
                }
            }
            Some(oracle::certify(
                &spec,
                &[report],
                opts.eps,
                opts.support_cap,
            )?)
        } else {
            None
        };
        rows.push(Row {
            n,
            cells,
            certification,
        });
    }
    Ok(ResultTable {
        name: scenario.name.clone(),
        family: scenario.family,
        columns: scenario.methods.iter().map(|m| m.to_string()).collect(),
        rows,
        r_rule: scenario.nb_r_rule,
        eps: opts.eps,
    })
}

/// Seven significant digits; tiny values switch to scientific notation.
pub fn format_value(v: f64) -> String {
    if v == 0.0 {
        return "0".to_string();
    }
    let mag = v.abs().log10().floor() as i32;
    if mag < -4 {
        return format!("{v:.6e}");
    }
    let decimals = (6 - mag).max(0) as usize;
    format!("{v:.decimals$}")
}

const INFEASIBLE: &str = "—";

pub fn emit(table: &ResultTable, format: Format) -> String {
    match format {
        Format::Csv => emit_csv(table),
        Format::Markdown => emit_markdown(table),
    }
}

fn emit_csv(table: &ResultTable) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "n,{}", table.columns.join(","));
    for row in &table.rows {
        let cells: Vec<String> = row
            .cells
            .iter()
            .map(|c| {
                c.value()
                    .map_or_else(|| INFEASIBLE.to_string(), format_value)
            })
            .collect();
        let _ = writeln!(out, "{},{}", row.n, cells.join(","));
    }
    out
}

fn emit_markdown(table: &ResultTable) -> String {
    let mut out = String::new();
    let rule = match table.r_rule {
        RRule::N => "n".to_string(),
        RRule::NOver5 => "n/5".to_string(),
        RRule::Fixed(r) => format_value(r),
    };
    let _ = writeln!(out, "### {}\n", table.name);
    let _ = writeln!(
        out,
        "family: {}; Poisson lambda = E S_n; one-moment r = {rule}; eps = {:e}\n",
        table.family, table.eps
    );
    let _ = writeln!(out, "| n | {} |", table.columns.join(" | "));
    let _ = writeln!(out, "|---|{}", "---|".repeat(table.columns.len()));
    let mut notes = Vec::new();
    for row in &table.rows {
        let cells: Vec<String> = row
            .cells
            .iter()
            .zip(&table.columns)
            .map(|(c, col)| match c {
                Cell::Value(e) if e.certified => format_value(e.value),
                Cell::Value(e) => {
                    notes.push(format!(
                        "{col} at n = {}: not certified ({})",
                        row.n,
                        e.note.as_deref().unwrap_or("no reason given")
                    ));
                    format!("{}[{}]", format_value(e.value), notes.len())
                }
                Cell::Infeasible(why) => {
                    notes.push(format!("{col} at n = {}: {why}", row.n));
                    format!("{INFEASIBLE}[{}]", notes.len())
                }
            })
            .collect();
        let _ = writeln!(out, "| {} | {} |", row.n, cells.join(" | "));
    }
    if !notes.is_empty() {
        out.push('\n');
        for (i, note) in notes.iter().enumerate() {
            let _ = writeln!(out, "[{}] {note}", i + 1);
        }
    }
    let certified: Vec<&Row> = table
        .rows
        .iter()
        .filter(|r| r.certification.is_some())
        .collect();
    if !certified.is_empty() {
        let _ = writeln!(out, "\nOracle check:\n");
        for row in certified {
            let c = row.certification.as_ref().expect("filtered");
            let status = match (&c.skipped, c.violations.len()) {
                (Some(why), _) => format!("skipped ({why})"),
                (None, 0) => format!("{} bounds dominate the exact distance", c.checks.len()),
                (None, v) => format!("{v} VIOLATION(S)"),
            };
            let _ = writeln!(out, "- n = {}: {status}", row.n);
        }
    }
    out
}

/// Writes `text` to `path`, mapping the error.
pub fn write_output(path: &str, text: &str) -> Result<()> {
    std::fs::write(path, text).map_err(|e| Error::Io(format!("{path}: {e}")))
}
