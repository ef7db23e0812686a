//! Scenario files: a line-oriented description of a table run.
//!
//! ```text
//! # comment
//! name = table2
//! family = geometric
//! range 1-10 theta 0.20
//! range 11-20 theta 0.18
//! n_values = 10, 20
//! methods = poisson, nb_one, nb_two
//! nb_r_rule = n            # n | n/5 | <number>
//! closed_forms = prefer    # prefer | never
//! format = markdown        # csv | markdown
//! output = table2.md       # optional
//! ```
//!
//! `thetas = a, b, c` lists one parameter per summand instead of ranges.
//! For Bernoulli summands the parameter is the success probability.

use std::fmt::{self, Write as _};
use std::path::Path;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::family::PowerSeriesFamily;
use crate::instance::PsdInstance;
use crate::nb::RRule;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    /// General Poisson bound at `lambda = E S_n`.
    Poisson,
    /// Same with the `(1 - e^{-lambda})/lambda` step constant.
    PoissonBh,
    PoissonCrude,
    PoissonEqn,
    PoissonBer,
    NbOne,
    NbTwo,
    NbEqn1,
    NbEqn2,
    NbQwqw,
}

impl Method {
    pub const ALL: [Method; 10] = [
        Method::Poisson,
        Method::PoissonBh,
        Method::PoissonCrude,
        Method::PoissonEqn,
        Method::PoissonBer,
        Method::NbOne,
        Method::NbTwo,
        Method::NbEqn1,
        Method::NbEqn2,
        Method::NbQwqw,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Self::Poisson => "poisson",
            Self::PoissonBh => "poisson_bh",
            Self::PoissonCrude => "poisson_crude",
            Self::PoissonEqn => "poisson_eqn",
            Self::PoissonBer => "poisson_ber",
            Self::NbOne => "nb_one",
            Self::NbTwo => "nb_two",
            Self::NbEqn1 => "nb_eqn1",
            Self::NbEqn2 => "nb_eqn2",
            Self::NbQwqw => "nb_qwqw",
        }
    }
}

impl FromStr for Method {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        Self::ALL
            .into_iter()
            .find(|m| m.as_str() == s)
            .ok_or_else(|| format!("unknown method `{s}`"))
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Format {
    #[default]
    Csv,
    Markdown,
}

impl FromStr for Format {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "csv" => Ok(Self::Csv),
            "markdown" | "md" => Ok(Self::Markdown),
            _ => Err(format!("unknown format `{s}`")),
        }
    }
}

impl fmt::Display for Format {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Csv => "csv",
            Self::Markdown => "markdown",
        })
    }
}

/// Summands `start..=end` (1-based) share `value`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThetaRange {
    pub start: usize,
    pub end: usize,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Schedule {
    Ranges(Vec<ThetaRange>),
    Explicit(Vec<f64>),
}

impl Schedule {
    fn len(&self) -> usize {
        match self {
            Self::Ranges(r) => r.last().map_or(0, |r| r.end),
            Self::Explicit(v) => v.len(),
        }
    }

    /// Parameters of the first `n` summands.
    pub fn prefix(&self, n: usize) -> Vec<f64> {
        match self {
            Self::Explicit(v) => v[..n.min(v.len())].to_vec(),
            Self::Ranges(ranges) => ranges
                .iter()
                .flat_map(|r| std::iter::repeat_n(r.value, r.end - r.start + 1))
                .take(n)
                .collect(),
        }
    }

    fn values(&self) -> Vec<f64> {
        match self {
            Self::Explicit(v) => v.clone(),
            Self::Ranges(r) => r.iter().map(|r| r.value).collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub name: String,
    pub family: PowerSeriesFamily,
    pub schedule: Schedule,
    pub n_values: Vec<usize>,
    pub methods: Vec<Method>,
    pub nb_r_rule: RRule,
    /// Use family closed forms for `poisson`, `nb_one`, `nb_two` when one exists.
    pub prefer_closed_forms: bool,
    pub format: Format,
    pub output: Option<String>,
}

fn parse_err(line: usize, msg: impl Into<String>) -> Error {
    Error::Parse {
        line,
        msg: msg.into(),
    }
}

fn parse_list<T: FromStr>(line: usize, raw: &str, what: &str) -> Result<Vec<T>> {
    raw.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| {
            s.parse::<T>()
                .map_err(|_| parse_err(line, format!("invalid {what} `{s}`")))
        })
        .collect()
}

fn parse_rule(line: usize, raw: &str) -> Result<RRule> {
    match raw {
        "n" => Ok(RRule::N),
        "n/5" => Ok(RRule::NOver5),
        _ => match raw.parse::<f64>() {
            Ok(r) if r.is_finite() && r > 0.0 => Ok(RRule::Fixed(r)),
            _ => Err(parse_err(line, format!("invalid nb_r_rule `{raw}`"))),
        },
    }
}

fn parse_range(line: usize, rest: &str) -> Result<ThetaRange> {
    let bad = || parse_err(line, "expected `range <a>-<b> theta <value>`");
    let mut parts = rest.split_whitespace();
    let span = parts.next().ok_or_else(bad)?;
    if parts.next() != Some("theta") {
        return Err(bad());
    }
    let value: f64 = parts.next().ok_or_else(bad)?.parse().map_err(|_| bad())?;
    if parts.next().is_some() {
        return Err(bad());
    }
    let (a, b) = span.split_once('-').ok_or_else(bad)?;
    let start: usize = a.parse().map_err(|_| bad())?;
    let end: usize = b.parse().map_err(|_| bad())?;
    if start == 0 || end < start {
        return Err(parse_err(line, format!("empty or zero-based range {span}")));
    }
    Ok(ThetaRange { start, end, value })
}

impl Scenario {
    pub fn parse(text: &str) -> Result<Self> {
        let mut name = None;
        let mut family = None;
        let mut ranges: Vec<(usize, ThetaRange)> = Vec::new();
        let mut thetas = None;
        let mut n_values = None;
        let mut methods = None;
        let mut rule = None;
        let mut prefer = None;
        let mut format = None;
        let mut output = None;
        let mut last_line = 0;

        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            last_line = line;
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            if let Some(rest) = content.strip_prefix("range ") {
                ranges.push((line, parse_range(line, rest)?));
                continue;
            }
            let (key, value) = content.split_once('=').ok_or_else(|| {
                parse_err(line, format!("expected `key = value`, got `{content}`"))
            })?;
            let (key, value) = (key.trim(), value.trim());
            fn set<T>(slot: &mut Option<T>, v: T, line: usize, key: &str) -> Result<()> {
                if slot.replace(v).is_some() {
                    return Err(parse_err(line, format!("duplicate key `{key}`")));
                }
                Ok(())
            }
            match key {
                "name" => set(&mut name, value.to_string(), line, key)?,
                "family" => {
                    let f = PowerSeriesFamily::from_name(value)
                        .ok_or_else(|| parse_err(line, format!("unknown family `{value}`")))?;
                    set(&mut family, f, line, key)?
                }
                "thetas" => set(
                    &mut thetas,
                    parse_list::<f64>(line, value, "theta")?,
                    line,
                    key,
                )?,
                "n_values" => set(
                    &mut n_values,
                    parse_list::<usize>(line, value, "n")?,
                    line,
                    key,
                )?,
                "methods" => set(
                    &mut methods,
                    parse_list::<Method>(line, value, "method")?,
                    line,
                    key,
                )?,
                "nb_r_rule" => set(&mut rule, parse_rule(line, value)?, line, key)?,
                "closed_forms" => {
                    let v = match value {
                        "prefer" => true,
                        "never" => false,
                        _ => {
                            return Err(parse_err(line, format!("invalid closed_forms `{value}`")))
                        }
                    };
                    set(&mut prefer, v, line, key)?
                }
                "format" => {
                    let f = value.parse::<Format>().map_err(|m| parse_err(line, m))?;
                    set(&mut format, f, line, key)?
                }
                "output" => set(&mut output, value.to_string(), line, key)?,
                _ => return Err(parse_err(line, format!("unknown key `{key}`"))),
            }
        }

        let end = last_line.max(1);
        let family = family.ok_or_else(|| parse_err(end, "missing `family`"))?;
        let schedule = match (ranges.is_empty(), thetas) {
            (false, Some(_)) => {
                return Err(parse_err(
                    end,
                    "use either `range` lines or `thetas`, not both",
                ))
            }
            (false, None) => {
                let mut expected = 1;
                for (line, r) in &ranges {
                    if r.start != expected {
                        return Err(parse_err(
                            *line,
                            format!("range starts at {} but {expected} was expected", r.start),
                        ));
                    }
                    expected = r.end + 1;
                }
                Schedule::Ranges(ranges.into_iter().map(|(_, r)| r).collect())
            }
            (true, Some(t)) if !t.is_empty() => Schedule::Explicit(t),
            _ => return Err(parse_err(end, "empty schedule")),
        };
        let n_values = n_values.ok_or_else(|| parse_err(end, "missing `n_values`"))?;
        if n_values.is_empty() || n_values.contains(&0) {
            return Err(parse_err(end, "n_values must be positive"));
        }
        let max_n = *n_values.iter().max().unwrap_or(&0);
        if max_n > schedule.len() {
            return Err(parse_err(
                end,
                format!(
                    "schedule covers {} summands but n = {max_n} was requested",
                    schedule.len()
                ),
            ));
        }
        for v in schedule.values() {
            PsdInstance::from_param(family, v)?;
        }
        let methods =
            methods.unwrap_or_else(|| vec![Method::Poisson, Method::NbOne, Method::NbTwo]);
        if methods.is_empty() {
            return Err(parse_err(end, "no methods listed"));
        }

        Ok(Self {
            name: name.unwrap_or_else(|| "scenario".to_string()),
            family,
            schedule,
            n_values,
            methods,
            nb_r_rule: rule.unwrap_or_else(|| RRule::default_for(family)),
            prefer_closed_forms: prefer.unwrap_or(false),
            format: format.unwrap_or_default(),
            output,
        })
    }

    pub fn from_path(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
        Self::parse(&text)
    }

    /// Serializes back to the scenario format; `parse(to_text(s)) == s`.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let join = |v: Vec<String>| v.join(", ");
        let _ = writeln!(out, "name = {}", self.name);
        let _ = writeln!(out, "family = {}", self.family);
        match &self.schedule {
            Schedule::Ranges(ranges) => {
                for r in ranges {
                    let _ = writeln!(out, "range {}-{} theta {}", r.start, r.end, r.value);
                }
            }
            Schedule::Explicit(v) => {
                let _ = writeln!(
                    out,
                    "thetas = {}",
                    join(v.iter().map(f64::to_string).collect())
                );
            }
        }
        let _ = writeln!(
            out,
            "n_values = {}",
            join(self.n_values.iter().map(usize::to_string).collect())
        );
        let _ = writeln!(
            out,
            "methods = {}",
            join(self.methods.iter().map(|m| m.to_string()).collect())
        );
        let rule = match self.nb_r_rule {
            RRule::N => "n".to_string(),
            RRule::NOver5 => "n/5".to_string(),
            RRule::Fixed(r) => r.to_string(),
        };
        let _ = writeln!(out, "nb_r_rule = {rule}");
        let _ = writeln!(
            out,
            "closed_forms = {}",
            if self.prefer_closed_forms {
                "prefer"
            } else {
                "never"
            }
        );
        let _ = writeln!(out, "format = {}", self.format);
        if let Some(o) = &self.output {
            let _ = writeln!(out, "output = {o}");
        }
        out
    }

    /// Parameters of the first `n` summands.
    pub fn params_for(&self, n: usize) -> Vec<f64> {
        self.schedule.prefix(n)
    }
}

/// Geometric sums, parameters stepped down from 0.20 to 0.02.
pub const TABLE2: &str = include_str!("../scenarios/table2.scenario");
/// Shifted logarithmic sums on the same schedule.
pub const TABLE3: &str = include_str!("../scenarios/table3.scenario");

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bundled_table2() {
        let s = Scenario::parse(TABLE2).unwrap();
        assert_eq!(s.family, PowerSeriesFamily::Geometric);
        let Schedule::Ranges(r) = &s.schedule else {
            panic!("expected ranges")
        };
        assert_eq!(r.len(), 10);
        assert_eq!(
            r[0],
            ThetaRange {
                start: 1,
                end: 10,
                value: 0.2
            }
        );
        assert_eq!(
            r[9],
            ThetaRange {
                start: 401,
                end: 500,
                value: 0.02
            }
        );
        assert_eq!(s.nb_r_rule, RRule::N);
        let p = s.params_for(20);
        assert_eq!(p.len(), 20);
        assert_eq!((p[9], p[10]), (0.2, 0.18));
    }

    #[test]
    fn bundled_table3() {
        let s = Scenario::parse(TABLE3).unwrap();
        assert_eq!(s.family, PowerSeriesFamily::LogarithmicShifted);
        assert_eq!(s.nb_r_rule, RRule::NOver5);
        assert_eq!(
            s.params_for(500),
            Scenario::parse(TABLE2).unwrap().params_for(500)
        );
    }

    #[test]
    fn round_trip_bundled() {
        for text in [TABLE2, TABLE3] {
            let s = Scenario::parse(text).unwrap();
            assert_eq!(Scenario::parse(&s.to_text()).unwrap(), s);
        }
    }

    #[test]
    fn explicit_thetas() {
        let s = Scenario::parse(
            "family = bernoulli\nthetas = 0.1, 0.2, 0.3\nn_values = 2, 3\nnb_r_rule = 4.5\n",
        )
        .unwrap();
        assert_eq!(s.params_for(2), vec![0.1, 0.2]);
        assert_eq!(s.nb_r_rule, RRule::Fixed(4.5));
        assert_eq!(Scenario::parse(&s.to_text()).unwrap(), s);
    }

    fn line_of(text: &str) -> usize {
        match Scenario::parse(text) {
            Err(Error::Parse { line, .. }) => line,
            other => panic!("expected parse error, got {other:?}"),
        }
    }

    #[test]
    fn parse_errors_carry_lines() {
        assert_eq!(line_of("family = geometric\nn_values = 1\n"), 2);
        assert_eq!(line_of("family = geometric\nbogus = 1\n"), 2);
        assert_eq!(line_of("family = nope\n"), 1);
        assert_eq!(
            line_of("family = geometric\nrange 1-5 theta 0.1\nrange 7-9 theta 0.1\nn_values = 5\n"),
            3
        );
        assert_eq!(line_of("family = geometric\nrange 1-5 theta\n"), 2);
        assert_eq!(line_of("family = geometric\nmethods = poisson, magic\n"), 2);
        assert_eq!(line_of("family = geometric\nfamily = geometric\n"), 2);
    }

    #[test]
    fn too_short_schedule() {
        assert!(matches!(
            Scenario::parse("family = geometric\nrange 1-5 theta 0.1\nn_values = 6\n"),
            Err(Error::Parse { .. })
        ));
    }

    #[test]
    fn out_of_domain_theta() {
        assert!(matches!(
            Scenario::parse("family = geometric\nrange 1-5 theta 1.5\nn_values = 5\n"),
            Err(Error::Domain { .. })
        ));
    }
}
