//! JSON documents for problems, lotteries, and reports.
//!
//! Problem file layout:
//!
//! ```json
//! {
//!   "agents": ["a1", "a2"],
//!   "objects": ["o1", "o2"],
//!   "bundles": [[1, 0], [0, 1]],
//!   "preferences": { "a1": [0, 1], "a2": [1, 0] },
//!   "partition": [["a1", "a2"]],
//!   "feasible": { "unitDemandSimpleCapacity": { "q": [1, 1] } }
//! }
//! ```
//!
//! Preferences list bundle indices, best first. Instead of `partition`,
//! `"byPreference": true` groups agents with identical orders; with neither,
//! every agent is its own group. `feasible` is one of `explicit` (a list of
//! matrices), `linearCaps` (`caps` with `weights` matrices of `"p/q"` or
//! `"INELIGIBLE"` and a `bound`, plus optional `unitDemand` and
//! `nullObject`), or `unitDemandSimpleCapacity`. Every probability and bound
//! is an exact fraction string.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::efficiency::EfficiencyReport;
use crate::error::{Error, Result};
use crate::feasibility::{Cap, ExplicitSet, FeasibleSet, LinearCaps, PureAssignment, SimpleCapacity, Weight};
use crate::lottery::{marginals, Lottery};
use crate::problem::{Bundle, EqualsPartition, PreferenceOrder, Problem};
use crate::rational::{self, Rational};

const INELIGIBLE: &str = "INELIGIBLE";

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct ProblemFile {
    pub agents: Vec<String>,
    pub objects: Vec<String>,
    pub bundles: Vec<Vec<u32>>,
    pub preferences: BTreeMap<String, Vec<usize>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub partition: Option<Vec<Vec<String>>>,
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub by_preference: bool,
    pub feasible: FeasibleSpec,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub enum FeasibleSpec {
    Explicit(Vec<Vec<Vec<u32>>>),
    LinearCaps(LinearCapsSpec),
    UnitDemandSimpleCapacity(CapacitySpec),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct LinearCapsSpec {
    pub caps: Vec<CapSpec>,
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub unit_demand: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub null_object: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CapSpec {
    pub weights: Vec<Vec<String>>,
    pub bound: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CapacitySpec {
    pub q: Vec<u32>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LotteryEntry {
    pub assignment: Vec<Vec<u32>>,
    pub probability: String,
}

fn at(origin: &str, field: &str) -> String {
    format!("{origin}: {field}")
}

impl ProblemFile {
    pub fn parse(text: &str, origin: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::parse(origin, e.to_string()))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("problem files always serialize")
    }

    pub fn to_problem(&self, origin: &str) -> Result<Problem> {
        let agent_index = |label: &str, field: &str| {
            self.agents
                .iter()
                .position(|a| a == label)
                .ok_or_else(|| Error::parse(at(origin, field), format!("unknown agent {label}")))
        };
        let objects = self.objects.len();
        let universe: Vec<Bundle> = self.bundles.iter().map(|b| Bundle(b.clone())).collect();

        for label in self.preferences.keys() {
            agent_index(label, "preferences")?;
        }
        let preferences = self
            .agents
            .iter()
            .map(|a| {
                let ranking = self
                    .preferences
                    .get(a)
                    .ok_or_else(|| Error::parse(at(origin, "preferences"), format!("no order for {a}")))?;
                PreferenceOrder::new(ranking.clone(), universe.len())
                    .map_err(|e| Error::parse(at(origin, &format!("preferences.{a}")), e.to_string()))
            })
            .collect::<Result<Vec<_>>>()?;

        let partition = match (&self.partition, self.by_preference) {
            (Some(_), true) => {
                return Err(Error::parse(origin, "give either partition or byPreference, not both"));
            }
            (Some(groups), false) => {
                let groups = groups
                    .iter()
                    .map(|g| {
                        g.iter()
                            .map(|l| agent_index(l, "partition"))
                            .collect::<Result<Vec<_>>>()
                    })
                    .collect::<Result<Vec<_>>>()?;
                EqualsPartition::new(groups, self.agents.len())
                    .map_err(|e| Error::parse(at(origin, "partition"), e.to_string()))?
            }
            (None, true) => EqualsPartition::by_preference(&preferences),
            (None, false) => EqualsPartition::singletons(self.agents.len()),
        };

        let feasible = match &self.feasible {
            FeasibleSpec::Explicit(members) => {
                let members = members
                    .iter()
                    .map(|m| PureAssignment::from_rows(m.clone()))
                    .collect::<Result<Vec<_>>>()
                    .map_err(|e| Error::parse(at(origin, "feasible.explicit"), e.to_string()))?;
                FeasibleSet::Explicit(
                    ExplicitSet::new(members)
                        .map_err(|e| Error::parse(at(origin, "feasible.explicit"), e.to_string()))?,
                )
            }
            FeasibleSpec::LinearCaps(spec) => {
                let caps = spec
                    .caps
                    .iter()
                    .enumerate()
                    .map(|(i, c)| {
                        let field = format!("feasible.linearCaps.caps[{i}]");
                        let weights = c
                            .weights
                            .iter()
                            .map(|row| row.iter().map(|w| parse_weight(w)).collect::<Result<Vec<_>>>())
                            .collect::<Result<Vec<_>>>()
                            .map_err(|e| Error::parse(at(origin, &field), e.to_string()))?;
                        let bound =
                            rational::parse(&c.bound).map_err(|e| Error::parse(at(origin, &field), e.to_string()))?;
                        Cap::new(weights, bound).map_err(|e| Error::parse(at(origin, &field), e.to_string()))
                    })
                    .collect::<Result<Vec<_>>>()?;
                let null_object = match &spec.null_object {
                    None => None,
                    Some(label) => Some(self.objects.iter().position(|o| o == label).ok_or_else(|| {
                        Error::parse(
                            at(origin, "feasible.linearCaps.nullObject"),
                            format!("unknown object {label}"),
                        )
                    })?),
                };
                FeasibleSet::LinearCaps(
                    LinearCaps::new(self.agents.len(), objects, caps, spec.unit_demand, null_object)
                        .map_err(|e| Error::parse(at(origin, "feasible.linearCaps"), e.to_string()))?,
                )
            }
            FeasibleSpec::UnitDemandSimpleCapacity(spec) => FeasibleSet::UnitDemandSimpleCapacity(
                SimpleCapacity::new(spec.q.clone())
                    .map_err(|e| Error::parse(at(origin, "feasible.unitDemandSimpleCapacity"), e.to_string()))?,
            ),
        };

        Problem::new(
            self.agents.clone(),
            self.objects.clone(),
            universe,
            preferences,
            partition,
            feasible,
        )
    }

    /// The file describing `p`, with its partition written out explicitly.
    pub fn from_problem(p: &Problem) -> Self {
        let label = |a: &usize| p.agent_label(*a).to_string();
        let feasible = match p.feasible() {
            FeasibleSet::Explicit(set) => FeasibleSpec::Explicit(set.members().map(|y| y.rows()).collect()),
            FeasibleSet::LinearCaps(lc) => FeasibleSpec::LinearCaps(LinearCapsSpec {
                caps: lc
                    .caps()
                    .iter()
                    .map(|c| CapSpec {
                        weights: c
                            .weights()
                            .iter()
                            .map(|row| row.iter().map(format_weight).collect())
                            .collect(),
                        bound: rational::format(c.bound()),
                    })
                    .collect(),
                unit_demand: lc.unit_demand(),
                null_object: lc.null_object().map(|o| p.object_labels()[o].clone()),
            }),
            FeasibleSet::UnitDemandSimpleCapacity(cap) => FeasibleSpec::UnitDemandSimpleCapacity(CapacitySpec {
                q: cap.capacities().to_vec(),
            }),
        };
        ProblemFile {
            agents: p.agent_labels().to_vec(),
            objects: p.object_labels().to_vec(),
            bundles: p.universe().iter().map(|b| b.0.clone()).collect(),
            preferences: (0..p.agent_count())
                .map(|a| (p.agent_label(a).to_string(), p.preference(a).ranking().to_vec()))
                .collect(),
            partition: Some(
                p.partition()
                    .groups()
                    .iter()
                    .map(|g| g.iter().map(label).collect())
                    .collect(),
            ),
            by_preference: false,
            feasible,
        }
    }
}

fn parse_weight(text: &str) -> Result<Weight> {
    if text == INELIGIBLE {
        Ok(Weight::Ineligible)
    } else {
        rational::parse(text).map(Weight::Coef)
    }
}

fn format_weight(w: &Weight) -> String {
    match w {
        Weight::Ineligible => INELIGIBLE.into(),
        Weight::Coef(c) => rational::format(c),
    }
}

pub fn parse_problem(text: &str, origin: &str) -> Result<Problem> {
    ProblemFile::parse(text, origin)?.to_problem(origin)
}

pub fn load_problem(path: &Path) -> Result<Problem> {
    let origin = path.display().to_string();
    let text = std::fs::read_to_string(path).map_err(|e| Error::parse(&origin, e.to_string()))?;
    parse_problem(&text, &origin)
}

pub fn parse_lottery_entries(text: &str, origin: &str) -> Result<Vec<LotteryEntry>> {
    serde_json::from_str(text).map_err(|e| Error::parse(origin, e.to_string()))
}

pub fn lottery_from_entries(entries: &[LotteryEntry], origin: &str, p: &Problem) -> Result<Lottery> {
    let pairs = entries
        .iter()
        .enumerate()
        .map(|(i, e)| {
            let field = at(origin, &format!("[{i}]"));
            let y =
                PureAssignment::from_rows(e.assignment.clone()).map_err(|err| Error::parse(&field, err.to_string()))?;
            let prob = rational::parse(&e.probability).map_err(|err| Error::parse(&field, err.to_string()))?;
            Ok((y, prob))
        })
        .collect::<Result<Vec<_>>>()?;
    Lottery::new(pairs, p)
}

pub fn parse_lottery(text: &str, origin: &str, p: &Problem) -> Result<Lottery> {
    lottery_from_entries(&parse_lottery_entries(text, origin)?, origin, p)
}

pub fn load_lottery(path: &Path, p: &Problem) -> Result<Lottery> {
    let origin = path.display().to_string();
    let text = std::fs::read_to_string(path).map_err(|e| Error::parse(&origin, e.to_string()))?;
    parse_lottery(&text, &origin, p)
}

pub fn lottery_entries(sigma: &Lottery) -> Vec<LotteryEntry> {
    sigma
        .support()
        .map(|(y, prob)| LotteryEntry {
            assignment: y.rows(),
            probability: rational::format(prob),
        })
        .collect()
}

pub fn lottery_json(sigma: &Lottery) -> Value {
    serde_json::to_value(lottery_entries(sigma)).expect("lottery entries serialize")
}

/// Object label for unit bundles, `-` for the zero bundle, counts otherwise.
pub fn bundle_label(p: &Problem, bundle: usize) -> String {
    let b = p.bundle(bundle);
    if b.is_zero() {
        return "-".into();
    }
    if b.total() == 1 {
        let o = b.counts().iter().position(|&c| c == 1).expect("one unit");
        return p.object_labels()[o].clone();
    }
    b.to_string()
}

pub fn marginals_json(sigma: &Lottery, p: &Problem) -> Value {
    let ms = marginals(sigma, p);
    Value::Array(
        ms.iter()
            .map(|m| {
                let dist: Vec<Value> = (0..p.universe().len())
                    .filter(|&b| !num_traits::Zero::is_zero(m.probability(b)))
                    .map(|b| {
                        json!({
                            "bundle": p.bundle(b).counts(),
                            "label": bundle_label(p, b),
                            "probability": rational::format(m.probability(b)),
                        })
                    })
                    .collect();
                json!({ "agent": p.agent_label(m.agent), "distribution": dist })
            })
            .collect(),
    )
}

/// Agents by rows, universe bundles by columns, exact fractions.
pub fn marginal_table(sigma: &Lottery, p: &Problem) -> String {
    let ms = marginals(sigma, p);
    let mut cells: Vec<Vec<String>> = Vec::with_capacity(ms.len() + 1);
    let mut header = vec![String::new()];
    header.extend((0..p.universe().len()).map(|b| bundle_label(p, b)));
    cells.push(header);
    for m in &ms {
        let mut row = vec![p.agent_label(m.agent).to_string()];
        row.extend(m.dist().iter().map(rational::format));
        cells.push(row);
    }
    render(&cells)
}

fn render(cells: &[Vec<String>]) -> String {
    let cols = cells.iter().map(Vec::len).max().unwrap_or(0);
    let widths: Vec<usize> = (0..cols)
        .map(|c| {
            cells
                .iter()
                .filter_map(|r| r.get(c))
                .map(|s| s.chars().count())
                .max()
                .unwrap_or(0)
        })
        .collect();
    let mut out = String::new();
    for row in cells {
        let line: Vec<String> = row
            .iter()
            .enumerate()
            .map(|(c, s)| format!("{s:>w$}", w = widths[c]))
            .collect();
        let _ = writeln!(out, "{}", line.join("  ").trim_end());
    }
    out
}

pub fn report_json(report: &EfficiencyReport) -> Value {
    json!({
        "ee": report.ee,
        "oe": report.oe,
        "re": report.re,
        "rankValue": rational::format(&report.rank_value),
        "optimalRank": report.optimal_rank,
        "eeWitness": report.ee_witness.as_ref().map(|w| json!({
            "member": w.member.rows(),
            "dominator": w.dominator.rows(),
        })),
        "oeWitness": report.oe_witness.as_ref().map(lottery_json),
        "reWitness": report.re_witness.as_ref().map(|y| y.rows()),
    })
}

pub fn rational_json(value: &Rational) -> Value {
    Value::String(rational::format(value))
}

#[cfg(test)]
mod tests {
    use super::*;

    const SMALL: &str = r#"{
        "agents": ["a1", "a2"],
        "objects": ["o1", "o2"],
        "bundles": [[1, 0], [0, 1]],
        "preferences": { "a1": [0, 1], "a2": [0, 1] },
        "partition": [["a1", "a2"]],
        "feasible": { "unitDemandSimpleCapacity": { "q": [1, 1] } }
    }"#;

    #[test]
    fn parses_and_round_trips() {
        let p = parse_problem(SMALL, "small").unwrap();
        assert_eq!(p.agent_count(), 2);
        assert!(p.partition().are_equals(0, 1));
        let file = ProblemFile::from_problem(&p);
        let again = parse_problem(&file.to_json(), "again").unwrap();
        assert_eq!(p, again);
    }

    #[test]
    fn unknown_labels_name_the_field() {
        let bad = SMALL.replace(r#"[["a1", "a2"]]"#, r#"[["a1", "a9"]]"#);
        match parse_problem(&bad, "bad.json") {
            Err(Error::Parse { path, message }) => {
                assert_eq!(path, "bad.json: partition");
                assert!(message.contains("a9"));
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn syntax_errors_carry_line_numbers() {
        let err = parse_problem("{\n \"agents\": [,]\n}", "x.json").unwrap_err();
        assert!(err.to_string().contains("line 2"), "{err}");
    }

    #[test]
    fn caps_round_trip_with_ineligible_cells() {
        let text = r#"{
            "agents": ["a1", "a2"],
            "objects": ["o0", "o1"],
            "bundles": [[0, 0], [1, 0], [0, 1]],
            "preferences": { "a1": [2, 1, 0], "a2": [2, 1, 0] },
            "feasible": { "linearCaps": {
                "caps": [ { "weights": [["0", "1"], ["0", "INELIGIBLE"]], "bound": "1/2" } ],
                "unitDemand": true,
                "nullObject": "o0"
            } }
        }"#;
        let file = ProblemFile::parse(text, "caps").unwrap();
        let p = file.to_problem("caps").unwrap();
        let back = ProblemFile::from_problem(&p);
        assert_eq!(back.feasible, file.feasible);
    }

    #[test]
    fn lottery_round_trip() {
        let p = parse_problem(SMALL, "small").unwrap();
        let text = r#"[
            { "assignment": [[1, 0], [0, 1]], "probability": "1/3" },
            { "assignment": [[0, 1], [1, 0]], "probability": "2/3" }
        ]"#;
        let sigma = parse_lottery(text, "l", &p).unwrap();
        let again = parse_lottery(&lottery_json(&sigma).to_string(), "l2", &p).unwrap();
        assert_eq!(sigma, again);
        let table = marginal_table(&sigma, &p);
        assert!(table.contains("a1  1/3  2/3"), "{table}");
    }
}
