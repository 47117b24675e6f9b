use std::io::{Read, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Deserialize;
use serde_json::{json, Value};

use ete_assign::efficiency::{
    ee_violation, is_oe, is_re, rank_value, solve_re, solve_re_matching, EfficiencyReport, RankTable,
};
use ete_assign::ete::{check_ete, ete_reassign, GeneratorMode};
use ete_assign::feasibility::{EnumerationBudget, FeasibleSet};
use ete_assign::io::{self, parse_lottery, parse_problem};
use ete_assign::lottery::Lottery;
use ete_assign::mechanisms::{run_pipeline, serial_dictatorship, PriorityList};
use ete_assign::problem::{audit_assumption1, audit_assumption2, Assumption2Report, PreferenceOrder, Problem};
use ete_assign::rational;
use ete_assign::repro::reproduce;
use ete_assign::strategy::{find_manipulation, ListSelection, Mechanism, MisreportScope, PartitionRule};
use ete_assign::Error;

#[derive(Parser)]
#[command(
    name = "ete-assign",
    version,
    about = "Probabilistic assignment with equal treatment of equals"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Candidate matrices examined before enumeration gives up.
    #[arg(long, global = true, default_value_t = 1_000_000)]
    budget: usize,
    /// Feasible matrices kept before enumeration gives up.
    #[arg(long, global = true, default_value_t = 100_000)]
    retain: usize,
    /// Bijections used by the reassignment.
    #[arg(long, global = true, value_enum, default_value_t = Mode::Cyclic)]
    mode: Mode,
    #[arg(long, global = true, value_enum, default_value_t = Format::Table)]
    format: Format,
}

#[derive(Clone, Copy, ValueEnum)]
enum Mode {
    Cyclic,
    Full,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Table,
}

#[derive(Clone, Copy, ValueEnum)]
enum MechanismKind {
    Sd,
    Pipeline,
}

#[derive(Subcommand)]
enum Command {
    /// Check both standing assumptions and classify the feasible set.
    Audit { problem: PathBuf },
    /// Run serial dictatorship or the full pipeline.
    Run {
        problem: PathBuf,
        #[arg(long, value_enum, default_value_t = MechanismKind::Pipeline)]
        mechanism: MechanismKind,
        /// Priority list as comma-separated agent labels.
        #[arg(long, value_delimiter = ',')]
        alpha: Vec<String>,
    },
    /// Verify properties of a lottery. With no flags, checks all four.
    Check {
        problem: PathBuf,
        lottery: PathBuf,
        #[command(flatten)]
        flags: CheckFlags,
    },
    /// Print the ETE reassignment of a lottery.
    Ete { problem: PathBuf, lottery: PathBuf },
    /// Minimum expected total rank and the pure assignments attaining it.
    Re {
        problem: PathBuf,
        /// Use min-cost matching (unit demand with simple capacities only).
        #[arg(long)]
        matching: bool,
    },
    /// Search for a profitable misreport against the file's preferences.
    Manipulate {
        problem: PathBuf,
        /// JSON list of {"partition": [[labels]], "alpha": [labels]} entries.
        #[arg(long)]
        table: Option<PathBuf>,
        /// Candidate misreport as comma-separated bundle indices; repeatable.
        /// Without any, every strict order is tried.
        #[arg(long = "candidate")]
        candidates: Vec<String>,
        /// Keep the file's partition instead of grouping identical reports.
        #[arg(long)]
        fixed_partition: bool,
    },
    /// Rebuild a worked example and compare with its published values.
    Repro {
        /// 1 to 6, or "all".
        example: String,
    },
}

#[derive(Args)]
struct CheckFlags {
    #[arg(long)]
    ete: bool,
    #[arg(long)]
    ee: bool,
    #[arg(long)]
    oe: bool,
    #[arg(long)]
    re: bool,
}

struct Outcome {
    json: Value,
    text: String,
    positive: bool,
}

fn read_source(path: &Path) -> Result<(String, String), Error> {
    let origin = path.display().to_string();
    let text = if origin == "-" {
        let mut s = String::new();
        std::io::stdin().read_to_string(&mut s).map_err(|e| Error::Parse {
            path: origin.clone(),
            message: e.to_string(),
        })?;
        s
    } else {
        std::fs::read_to_string(path).map_err(|e| Error::Parse {
            path: origin.clone(),
            message: e.to_string(),
        })?
    };
    Ok((text, origin))
}

fn load_problem(path: &Path) -> Result<Problem, Error> {
    let (text, origin) = read_source(path)?;
    parse_problem(&text, &origin)
}

fn load_lottery(path: &Path, p: &Problem) -> Result<Lottery, Error> {
    let (text, origin) = read_source(path)?;
    parse_lottery(&text, &origin, p)
}

fn verdict(ok: bool) -> &'static str {
    if ok {
        "pass"
    } else {
        "fail"
    }
}

fn audit(p: &Problem, budget: EnumerationBudget) -> Result<Outcome, Error> {
    let a1 = audit_assumption1(p);
    let a2 = audit_assumption2(p, budget)?;
    let ub = p.feasible().check_general_upper_bounds(p, budget)?;
    let per_object = match p.feasible().check_per_object_upper_bounds(p, budget) {
        Ok(r) => Some(r),
        Err(Error::EnumerationBudgetExceeded(_)) => None,
        Err(e) => return Err(e),
    };
    let family = match p.feasible() {
        FeasibleSet::Explicit(_) => "explicit",
        FeasibleSet::LinearCaps(_) => "linearCaps",
        FeasibleSet::UnitDemandSimpleCapacity(_) => "unitDemandSimpleCapacity",
    };

    let mut text = String::new();
    let a1_detail = a1
        .violation
        .map(|(n, a, b)| format!(" (group {n}: {} and {} differ)", p.agent_label(a.0), p.agent_label(b.0)))
        .unwrap_or_default();
    text.push_str(&format!("assumption 1: {}{a1_detail}\n", verdict(a1.passed())));
    let a2_detail = match &a2 {
        Assumption2Report::Pass => String::new(),
        Assumption2Report::StructuralPass => " (structural)".into(),
        Assumption2Report::Fail { assignment, a, b } => {
            format!(
                " (swapping {} and {} in {assignment})",
                p.agent_label(a.0),
                p.agent_label(b.0)
            )
        }
    };
    text.push_str(&format!("assumption 2: {}{a2_detail}\n", verdict(a2.passed())));
    let ub_detail = match &ub.witness {
        Some((y, lower)) => format!(" ({y} feasible, {lower} not)"),
        None if ub.structural => " (structural)".into(),
        None => String::new(),
    };
    text.push_str(&format!("general upper bounds: {}{ub_detail}\n", ub.holds));
    match &per_object {
        Some(r) => text.push_str(&format!(
            "per-object upper bounds: {} (columns closed: {}, columns combine: {})\n",
            r.holds(),
            r.columns_downward_closed,
            r.columns_combine_freely
        )),
        None => text.push_str("per-object upper bounds: not decided within budget\n"),
    }
    text.push_str(&format!("feasible family: {family}\n"));

    let json = json!({
        "assumption1": { "pass": a1.passed(), "violation": a1.violation.map(|(n, a, b)| json!({
            "group": n, "a": p.agent_label(a.0), "b": p.agent_label(b.0)
        })) },
        "assumption2": { "pass": a2.passed(), "structural": matches!(a2, Assumption2Report::StructuralPass),
            "witness": match &a2 {
                Assumption2Report::Fail { assignment, a, b } => json!({
                    "assignment": assignment.rows(), "a": p.agent_label(a.0), "b": p.agent_label(b.0)
                }),
                _ => Value::Null,
            } },
        "generalUpperBounds": { "holds": ub.holds, "structural": ub.structural,
            "witness": ub.witness.as_ref().map(|(y, l)| json!({ "feasible": y.rows(), "missing": l.rows() })) },
        "perObjectUpperBounds": per_object.as_ref().map(|r| json!({
            "holds": r.holds(),
            "columnsDownwardClosed": r.columns_downward_closed,
            "columnsCombineFreely": r.columns_combine_freely,
        })),
        "family": family,
    });
    Ok(Outcome {
        json,
        text,
        // exact unit demand is not downward closed, but serial dictatorship
        // handles it through partial feasibility
        positive: a1.passed() && a2.passed() && (ub.holds || family == "unitDemandSimpleCapacity"),
    })
}

fn efficiency_section(sigma: &Lottery, p: &Problem, budget: EnumerationBudget) -> Result<(Value, String), Error> {
    let ys = p.feasible().enumerate(p, budget)?;
    let report = EfficiencyReport::evaluate(sigma, &ys, p)?;
    let text = format!(
        "EE: {}  OE: {}  RE: {}  R: {} (minimum {})\n",
        report.ee,
        report.oe,
        report.re,
        rational::format(&report.rank_value),
        report.optimal_rank
    );
    Ok((io::report_json(&report), text))
}

fn run(
    p: &Problem,
    kind: MechanismKind,
    alpha: &[String],
    mode: GeneratorMode,
    budget: EnumerationBudget,
) -> Result<Outcome, Error> {
    let alpha = if alpha.is_empty() {
        PriorityList::identity(p.agent_count())
    } else {
        PriorityList::from_labels(p, alpha)?
    };
    let sigma = match kind {
        MechanismKind::Sd => Lottery::point_mass(serial_dictatorship(p, &alpha, budget)?, p)?,
        MechanismKind::Pipeline => run_pipeline(p, &alpha, mode, budget)?,
    };
    let ete = check_ete(&sigma, p).is_none();
    let (report, report_text) = efficiency_section(&sigma, p, budget)?;
    let text = format!("{}\nETE: {ete}\n{report_text}", io::marginal_table(&sigma, p));
    Ok(Outcome {
        json: json!({
            "lottery": io::lottery_json(&sigma),
            "marginals": io::marginals_json(&sigma, p),
            "ete": ete,
            "efficiency": report,
        }),
        text,
        positive: true,
    })
}

fn check(p: &Problem, sigma: &Lottery, flags: &CheckFlags, budget: EnumerationBudget) -> Result<Outcome, Error> {
    let all = !(flags.ete || flags.ee || flags.oe || flags.re);
    let mut json = serde_json::Map::new();
    let mut text = String::new();
    let mut positive = true;
    if all || flags.ete {
        let w = check_ete(sigma, p);
        positive &= w.is_none();
        match &w {
            None => text.push_str("ETE\n"),
            Some(v) => text.push_str(&format!(
                "not ETE: {} and {} differ at bundle {}\n",
                p.agent_label(v.a.0),
                p.agent_label(v.b.0),
                io::bundle_label(p, v.bundle)
            )),
        }
        json.insert(
            "ete".into(),
            json!({ "holds": w.is_none(), "witness": w.map(|v| json!({
                "a": p.agent_label(v.a.0), "b": p.agent_label(v.b.0), "bundle": p.bundle(v.bundle).counts()
            })) }),
        );
    }
    if all || flags.ee || flags.oe || flags.re {
        let ys = p.feasible().enumerate(p, budget)?;
        if all || flags.ee {
            let w = ee_violation(sigma, &ys, p);
            positive &= w.is_none();
            match &w {
                None => text.push_str("EE\n"),
                Some(v) => text.push_str(&format!("not EE: {} is dominated by {}\n", v.member, v.dominator)),
            }
            json.insert(
                "ee".into(),
                json!({ "holds": w.is_none(), "witness": w.map(|v| json!({
                    "member": v.member.rows(), "dominator": v.dominator.rows()
                })) }),
            );
        }
        if all || flags.oe {
            let v = is_oe(sigma, &ys, p)?;
            positive &= v.is_efficient();
            match v.witness() {
                None => text.push_str("OE\n"),
                Some(w) => text.push_str(&format!("not OE, dominated by:\n{}", io::marginal_table(w, p))),
            }
            json.insert(
                "oe".into(),
                json!({ "holds": v.is_efficient(), "witness": v.witness().map(io::lottery_json) }),
            );
        }
        if all || flags.re {
            let optimum = solve_re(&ys, p)?;
            let ok = is_re(sigma, &optimum, p);
            positive &= ok;
            let value = rank_value(sigma, &RankTable::new(p), p);
            text.push_str(&format!(
                "{}: R = {}, minimum {}\n",
                if ok { "RE" } else { "not RE" },
                rational::format(&value),
                optimum.value
            ));
            json.insert(
                "re".into(),
                json!({ "holds": ok, "rankValue": rational::format(&value), "optimalRank": optimum.value }),
            );
        }
    }
    Ok(Outcome {
        json: Value::Object(json),
        text,
        positive,
    })
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct TableEntry {
    partition: Vec<Vec<String>>,
    alpha: Vec<String>,
}

fn load_table(path: &Path, p: &Problem) -> Result<ListSelection, Error> {
    let (text, origin) = read_source(path)?;
    let entries: Vec<TableEntry> = serde_json::from_str(&text).map_err(|e| Error::Parse {
        path: origin.clone(),
        message: e.to_string(),
    })?;
    let mut map = std::collections::BTreeMap::new();
    for e in entries {
        let mut groups = e
            .partition
            .iter()
            .map(|g| {
                let mut ids = g
                    .iter()
                    .map(|l| {
                        p.agent_by_label(l).map(|a| a.0).ok_or_else(|| Error::Parse {
                            path: origin.clone(),
                            message: format!("unknown agent {l}"),
                        })
                    })
                    .collect::<Result<Vec<_>, _>>()?;
                ids.sort_unstable();
                Ok(ids)
            })
            .collect::<Result<Vec<_>, Error>>()?;
        groups.sort();
        map.insert(groups, PriorityList::from_labels(p, &e.alpha)?);
    }
    Ok(ListSelection::Table(map))
}

fn manipulate(
    p: &Problem,
    table: Option<&Path>,
    candidates: &[String],
    fixed: bool,
    mode: GeneratorMode,
    budget: EnumerationBudget,
) -> Result<Outcome, Error> {
    let selection = match table {
        Some(path) => load_table(path, p)?,
        None => ListSelection::GroupIndexOrder,
    };
    let scope = if candidates.is_empty() {
        MisreportScope::All
    } else {
        let orders = candidates
            .iter()
            .map(|c| {
                let ranking = c
                    .split_whitespace()
                    .flat_map(|s| s.split(','))
                    .filter(|s| !s.is_empty())
                    .map(|s| {
                        s.parse::<usize>().map_err(|e| Error::Parse {
                            path: "--candidate".into(),
                            message: e.to_string(),
                        })
                    })
                    .collect::<Result<Vec<_>, _>>()?;
                PreferenceOrder::new(ranking, p.universe().len())
            })
            .collect::<Result<Vec<_>, _>>()?;
        MisreportScope::Candidates(orders)
    };
    let mechanism = Mechanism {
        partition: if fixed {
            PartitionRule::Fixed
        } else {
            PartitionRule::ByPreference
        },
        selection,
        mode,
        budget,
    };
    let truth = p.preferences().to_vec();
    let finding = find_manipulation(&truth, p, &mechanism, &scope)?;
    let dist = |d: &[ete_assign::Rational]| d.iter().map(rational::format).collect::<Vec<_>>();
    let (json, text) = match &finding {
        None => (
            json!({ "finding": null }),
            "no profitable misreport found\n".to_string(),
        ),
        Some(f) => (
            json!({ "finding": {
                "manipulator": p.agent_label(f.manipulator.0),
                "misreport": f.misreport.ranking(),
                "truthful": dist(f.truthful.dist()),
                "manipulated": dist(f.manipulated.dist()),
                "verdict": format!("{:?}", f.verdict),
            } }),
            format!(
                "{} gains by reporting {:?}\n  truthful:    {}\n  manipulated: {}\n",
                p.agent_label(f.manipulator.0),
                f.misreport.ranking(),
                dist(f.truthful.dist()).join(" "),
                dist(f.manipulated.dist()).join(" ")
            ),
        ),
    };
    Ok(Outcome {
        json,
        text,
        // a finding is the negative verdict for strategy-proofness
        positive: finding.is_none(),
    })
}

fn repro(which: &str) -> Result<Outcome, Error> {
    let examples: Vec<u8> = if which == "all" {
        (1..=6).collect()
    } else {
        vec![which
            .parse()
            .map_err(|_| Error::Unsupported(format!("unknown example {which}")))?]
    };
    let mut text = String::new();
    let mut results = Vec::new();
    let mut positive = true;
    for n in examples {
        let r = reproduce(n)?;
        positive &= r.passed();
        text.push_str(&r.to_string());
        results.push(json!({
            "example": n,
            "passed": r.passed(),
            "checks": r.checks.iter().map(|c| json!({
                "name": c.name, "passed": c.passed, "detail": c.detail
            })).collect::<Vec<_>>(),
        }));
    }
    Ok(Outcome {
        json: Value::Array(results),
        text,
        positive,
    })
}

fn dispatch(cli: &Cli) -> Result<Outcome, Error> {
    let budget = EnumerationBudget {
        max_tested: cli.budget,
        max_retained: cli.retain,
    };
    let mode = match cli.mode {
        Mode::Cyclic => GeneratorMode::Cyclic,
        Mode::Full => GeneratorMode::Full,
    };
    match &cli.command {
        Command::Audit { problem } => audit(&load_problem(problem)?, budget),
        Command::Run {
            problem,
            mechanism,
            alpha,
        } => run(&load_problem(problem)?, *mechanism, alpha, mode, budget),
        Command::Check {
            problem,
            lottery,
            flags,
        } => {
            let p = load_problem(problem)?;
            let sigma = load_lottery(lottery, &p)?;
            check(&p, &sigma, flags, budget)
        }
        Command::Ete { problem, lottery } => {
            let p = load_problem(problem)?;
            let sigma = load_lottery(lottery, &p)?;
            let out = ete_reassign(&sigma, &p, mode, budget)?;
            Ok(Outcome {
                json: json!({ "lottery": io::lottery_json(&out), "marginals": io::marginals_json(&out, &p) }),
                text: io::marginal_table(&out, &p),
                positive: true,
            })
        }
        Command::Re { problem, matching } => {
            let p = load_problem(problem)?;
            let solution = if *matching {
                solve_re_matching(&p)?
            } else {
                solve_re(&p.feasible().enumerate(&p, budget)?, &p)?
            };
            let mut text = format!("minimum total rank: {}\n", solution.value);
            for y in &solution.optimal {
                text.push_str(&format!("  {y}\n"));
            }
            Ok(Outcome {
                json: json!({
                    "optimalRank": solution.value,
                    "optimal": solution.optimal.iter().map(|y| y.rows()).collect::<Vec<_>>(),
                }),
                text,
                positive: true,
            })
        }
        Command::Manipulate {
            problem,
            table,
            candidates,
            fixed_partition,
        } => manipulate(
            &load_problem(problem)?,
            table.as_deref(),
            candidates,
            *fixed_partition,
            mode,
            budget,
        ),
        Command::Repro { example } => repro(example),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(&cli) {
        Ok(out) => {
            let text = match cli.format {
                Format::Json => serde_json::to_string_pretty(&out.json).expect("json output") + "\n",
                Format::Table => out.text,
            };
            // a closed pipe downstream is not an error of ours
            let _ = std::io::stdout().write_all(text.as_bytes());
            if out.positive {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            match e {
                Error::EnumerationBudgetExceeded(_) => ExitCode::from(3),
                _ => ExitCode::from(2),
            }
        }
    }
}
