//! Report types shared by the solving subcommands, with JSON and text
//! renderings.

use std::collections::BTreeMap;

use nomlet::matching::{env_text, DagMatchReport};
use nomlet::unify::Stats;
use nomlet::{Failure, MatchReport, Matcher, Unifier, UnifyReport};
use serde::Serialize;

#[derive(Serialize)]
pub struct Solution {
    pub sigma: Vec<[String; 2]>,
    pub freshness: Vec<[String; 2]>,
    pub fixpoints: Vec<[String; 2]>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub envs: Vec<[String; 2]>,
}

impl Solution {
    fn from_unifier(u: &Unifier) -> Solution {
        Solution {
            sigma: u.sigma.entries().iter().map(|(x, e)| [x.to_string(), e.to_string()]).collect(),
            freshness: u.freshness.iter().map(|(a, x)| [a.to_string(), x.to_string()]).collect(),
            fixpoints: u.fixpoints.iter().map(|(x, p)| [x.to_string(), p.to_string()]).collect(),
            envs: Vec::new(),
        }
    }

    fn from_matcher(m: &Matcher) -> Solution {
        Solution {
            sigma: m.exprs.iter().map(|(x, e)| [x.to_string(), e.to_string()]).collect(),
            freshness: Vec::new(),
            fixpoints: Vec::new(),
            envs: m.envs.iter().map(|(x, e)| [x.to_string(), env_text(e)]).collect(),
        }
    }
}

#[derive(Serialize, Default)]
pub struct StatsOut {
    pub branches: usize,
    pub rule_counts: BTreeMap<String, usize>,
    pub max_fixpoint_eqs: usize,
}

impl From<&Stats> for StatsOut {
    fn from(s: &Stats) -> StatsOut {
        StatsOut { branches: s.branches, rule_counts: s.rule_counts.clone(), max_fixpoint_eqs: s.max_fixpoint_eqs }
    }
}

#[derive(Serialize)]
pub struct SolveReport {
    pub status: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub failure: Option<&'static str>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub unifiers: Option<Vec<Solution>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub matchers: Option<Vec<Solution>>,
    pub stats: StatsOut,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub trace: Vec<String>,
    #[serde(skip)]
    text: Vec<String>,
}

fn status(solvable: bool) -> &'static str {
    if solvable {
        "solvable"
    } else {
        "unsolvable"
    }
}

fn main_failure(failures: &BTreeMap<Failure, usize>) -> Option<&'static str> {
    failures.iter().max_by(|a, b| a.1.cmp(b.1).then(b.0.cmp(a.0))).map(|(f, _)| f.name())
}

impl SolveReport {
    pub fn is_solvable(&self) -> bool {
        self.status == "solvable"
    }

    pub fn from_unify(r: UnifyReport) -> SolveReport {
        SolveReport {
            status: status(r.is_solvable()),
            failure: if r.is_solvable() { None } else { r.main_failure().map(Failure::name) },
            unifiers: Some(r.unifiers.iter().map(Solution::from_unifier).collect()),
            matchers: None,
            stats: (&r.stats).into(),
            trace: r.trace,
            text: r.unifiers.iter().map(|u| u.to_string()).collect(),
        }
    }

    pub fn from_match(r: MatchReport) -> SolveReport {
        SolveReport {
            status: status(r.is_solvable()),
            failure: if r.is_solvable() { None } else { main_failure(&r.failures) },
            unifiers: None,
            matchers: Some(r.matchers.iter().map(Solution::from_matcher).collect()),
            stats: StatsOut { branches: r.branches, ..StatsOut::default() },
            trace: r.trace,
            text: r.matchers.iter().map(|m| m.to_string()).collect(),
        }
    }

    pub fn from_dag(r: DagMatchReport) -> SolveReport {
        let expanded = r.expanded();
        SolveReport {
            status: status(r.is_solvable()),
            failure: if r.is_solvable() { None } else { main_failure(&r.failures) },
            unifiers: None,
            matchers: Some(expanded.iter().map(Solution::from_matcher).collect()),
            stats: (&r.stats).into(),
            trace: r.trace,
            text: expanded.iter().map(|m| m.to_string()).collect(),
        }
    }

    pub fn render(&self, json: bool) -> String {
        if json {
            return serde_json::to_string_pretty(self).expect("serializable") + "\n";
        }
        let kind = if self.unifiers.is_some() { "unifier" } else { "matcher" };
        let mut out = String::new();
        match self.failure {
            Some(f) => out.push_str(&format!("unsolvable ({f})\n")),
            None if self.is_solvable() => out.push_str(&format!("solvable: {} {kind}(s)\n", self.text.len())),
            None => out.push_str("unsolvable\n"),
        }
        for (i, t) in self.text.iter().enumerate() {
            out.push_str(&format!("{kind} {}: {t}\n", i + 1));
        }
        out.push_str(&format!(
            "branches: {}, max fixpoint equations: {}\n",
            self.stats.branches, self.stats.max_fixpoint_eqs
        ));
        if !self.stats.rule_counts.is_empty() {
            let rules: Vec<String> = self.stats.rule_counts.iter().map(|(k, v)| format!("{k}={v}")).collect();
            out.push_str(&format!("rules: {}\n", rules.join(" ")));
        }
        for line in &self.trace {
            out.push_str(&format!("trace: {line}\n"));
        }
        out
    }
}
