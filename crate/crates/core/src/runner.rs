//! Command dispatch and report rendering for scenario files.

use std::fmt::{self, Write as _};
use std::str::FromStr;
use std::time::{Duration, Instant};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::distill::{distillation_report, DistillationReport};
use crate::entropy::{holevo_chi, von_neumann_entropy, BipartiteEnsemble};
use crate::error::{Error, Result};
use crate::linalg::{partial_trace, Party};
use crate::protocol::{
    audit_rounds, bound_suite, chain_mutual_information, flat_mutual_information, run_protocol,
    AdaptiveSchedule, BoundReport, ChainInformation, ProtocolTranscript, RoundAudit,
};
use crate::scenario::{generate_random_scenario, MeasureSpec, Resolved, ScenarioFile, ScenarioKind, Tolerances};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    BoundsVerify,
    ProtocolRun,
    DistillReport,
    Entropy,
}

impl Command {
    pub fn as_str(self) -> &'static str {
        match self {
            Command::BoundsVerify => "bounds-verify",
            Command::ProtocolRun => "protocol-run",
            Command::DistillReport => "distill-report",
            Command::Entropy => "entropy",
        }
    }
}

impl fmt::Display for Command {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Command {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "bounds-verify" => Ok(Command::BoundsVerify),
            "protocol-run" => Ok(Command::ProtocolRun),
            "distill-report" => Ok(Command::DistillReport),
            "entropy" => Ok(Command::Entropy),
            other => Err(Error::Unsupported(format!("unknown command `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RunOptions {
    pub seed: u64,
    pub trials: usize,
    /// Slack tolerance; `None` uses the scenario's own.
    pub tol: Option<f64>,
}

impl Default for RunOptions {
    fn default() -> Self {
        RunOptions {
            seed: 0,
            trials: 1,
            tol: None,
        }
    }
}

/// One comparison. `pass` is `slack ≥ −threshold` unless noted otherwise.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub bound: f64,
    pub measured: f64,
    pub slack: f64,
    pub threshold: f64,
    pub pass: bool,
}

impl Check {
    fn slack(name: impl Into<String>, bound: f64, measured: f64, slack: f64, threshold: f64) -> Self {
        Check {
            name: name.into(),
            bound,
            measured,
            slack: slack + 0.0,
            threshold,
            pass: slack >= -threshold,
        }
    }

    /// `bound ≥ measured` up to `threshold`.
    fn upper(name: impl Into<String>, bound: f64, measured: f64, threshold: f64) -> Self {
        Check::slack(name, bound, measured, bound - measured, threshold)
    }

    /// `|bound − measured| ≤ threshold`.
    fn agree(name: impl Into<String>, expected: f64, measured: f64, threshold: f64) -> Self {
        Check::slack(name, expected, measured, -(expected - measured).abs(), threshold)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NodeSummary {
    pub path: Vec<String>,
    /// Party measuring at this node; absent at leaves.
    pub measuring: Option<Party>,
    pub probability: f64,
    /// Posterior `p(x | path)`.
    pub posterior: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TranscriptSummary {
    pub depth: usize,
    pub nodes: Vec<NodeSummary>,
    pub chain: ChainInformation,
    pub flat_mutual_information: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EntropySummary {
    #[serde(rename = "S")]
    pub s: f64,
    #[serde(rename = "S_A")]
    pub s_a: f64,
    #[serde(rename = "S_B")]
    pub s_b: f64,
    pub chi: f64,
    pub chi_a: f64,
    pub chi_b: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialReport {
    pub trial: usize,
    /// Seed the trial was generated from; only set for random scenarios.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    pub scenario: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub bounds: Option<BoundReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub audit: Option<Vec<RoundAudit>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub transcript: Option<TranscriptSummary>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub distillation: Option<DistillationReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub entropies: Option<EntropySummary>,
    pub checks: Vec<Check>,
    pub pass: bool,
}

/// Output of [`run_scenario`]. The wall time is kept out of the JSON form
/// so that reports are byte-identical across runs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub scenario: String,
    pub kind: ScenarioKind,
    pub command: Command,
    pub seed: u64,
    pub trials: usize,
    pub tol: f64,
    pub results: Vec<TrialReport>,
    pub pass: bool,
    #[serde(skip)]
    pub wall_time: Duration,
}

impl RunReport {
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }

    pub fn failures(&self) -> usize {
        self.results
            .iter()
            .flat_map(|t| &t.checks)
            .filter(|c| !c.pass)
            .count()
    }

    pub fn to_table(&self) -> String {
        render_table(self)
    }
}

struct Context<'a> {
    command: Command,
    measures: MeasureSpec,
    tolerances: Tolerances,
    tol: f64,
    name: &'a str,
}

/// Runs `command` on a parsed scenario.
pub fn run_scenario(scenario: &ScenarioFile, command: Command, opts: &RunOptions) -> Result<RunReport> {
    let start = Instant::now();
    let resolved = scenario.resolve()?;
    let tol = opts.tol.unwrap_or(scenario.tolerances.slack);
    if !(tol.is_finite() && tol >= 0.0) {
        return Err(Error::Unsupported(format!("tolerance must be a finite nonnegative number, got {tol}")));
    }
    let ctx = Context {
        command,
        measures: scenario.measures,
        tolerances: scenario.tolerances,
        tol,
        name: &scenario.name,
    };

    let results = match &resolved {
        Resolved::Random(spec) => {
            let trials = opts.trials.max(1);
            let mut out: Vec<TrialReport> = (0..trials)
                .into_par_iter()
                .map(|t| -> Result<TrialReport> {
                    let seed = opts.seed.wrapping_add(t as u64);
                    let generated = generate_random_scenario(seed, spec)?;
                    let inner = Context {
                        name: &generated.name,
                        ..ctx
                    };
                    let mut r = run_resolved(&inner, &generated.resolve()?)?;
                    r.trial = t;
                    r.seed = Some(seed);
                    Ok(r)
                })
                .collect::<Result<_>>()?;
            out.sort_by_key(|r| r.trial);
            out
        }
        other => vec![run_resolved(&ctx, other)?],
    };

    let pass = results.iter().all(|r| r.pass);
    Ok(RunReport {
        scenario: scenario.name.clone(),
        kind: scenario.kind,
        command,
        seed: opts.seed,
        trials: results.len(),
        tol,
        results,
        pass,
        wall_time: start.elapsed(),
    })
}

fn empty_trial(name: &str) -> TrialReport {
    TrialReport {
        trial: 0,
        seed: None,
        scenario: name.to_string(),
        bounds: None,
        audit: None,
        transcript: None,
        distillation: None,
        entropies: None,
        checks: Vec::new(),
        pass: true,
    }
}

fn run_resolved(ctx: &Context<'_>, resolved: &Resolved) -> Result<TrialReport> {
    let mut r = empty_trial(ctx.name);
    match resolved {
        Resolved::Protocol {
            ensemble,
            schedule,
            depth,
        } => run_protocol_scenario(ctx, ensemble, schedule, *depth, &mut r)?,
        Resolved::BellDiagonal { spec, state } => match ctx.command {
            Command::BoundsVerify | Command::DistillReport => {
                let rep = distillation_report(state, Some(spec))?;
                if ctx.command == Command::BoundsVerify {
                    r.checks = distillation_checks(&rep, spec.d, ctx);
                }
                r.distillation = Some(rep);
            }
            Command::Entropy => {
                let ens = BipartiteEnsemble::new(vec![(1.0, state.clone())])?;
                r.entropies = Some(entropy_summary(&ens)?);
            }
            Command::ProtocolRun => {
                return Err(Error::Unsupported(
                    "protocol-run needs an ensemble or protocol scenario".into(),
                ))
            }
        },
        Resolved::Random(_) => unreachable!("random scenarios are expanded by the caller"),
    }
    r.pass = r.checks.iter().all(|c| c.pass);
    Ok(r)
}

fn run_protocol_scenario(
    ctx: &Context<'_>,
    ensemble: &BipartiteEnsemble,
    schedule: &AdaptiveSchedule,
    depth: usize,
    r: &mut TrialReport,
) -> Result<()> {
    match ctx.command {
        Command::Entropy => {
            r.entropies = Some(entropy_summary(ensemble)?);
        }
        Command::DistillReport => {
            r.distillation = Some(distillation_report(&ensemble.average_state(), None)?);
        }
        Command::ProtocolRun => {
            let t = run_protocol(ensemble, schedule, depth)?;
            t.check(ctx.tolerances.validation)?;
            r.transcript = Some(transcript_summary(&t));
        }
        Command::BoundsVerify => {
            let t = run_protocol(ensemble, schedule, depth)?;
            t.check(ctx.tolerances.validation)?;
            let bounds = bound_suite(&t, ctx.measures.input, ctx.measures.output)?;
            let audit = audit_rounds(&t)?;
            r.checks = protocol_checks(&t, &bounds, &audit, ctx);
            r.bounds = Some(bounds);
            r.audit = Some(audit);
        }
    }
    Ok(())
}

fn protocol_checks(t: &ProtocolTranscript, b: &BoundReport, audit: &[RoundAudit], ctx: &Context<'_>) -> Vec<Check> {
    let mut checks: Vec<Check> = b
        .bounds()
        .into_iter()
        .map(|(name, bound, slack)| Check::slack(name, bound, b.i_locc, slack, ctx.tol))
        .collect();
    checks.push(Check::upper("holevo", b.chi_global, b.i_locc, ctx.tol));
    checks.push(Check::agree(
        "chain_rule",
        flat_mutual_information(t),
        b.i_locc,
        ctx.tolerances.validation,
    ));
    for a in audit {
        let k = a.round;
        checks.push(Check::slack(
            format!("lemma1[{k}]"),
            a.chi_before - a.chi_after,
            a.information,
            a.lemma1_slack,
            ctx.tol,
        ));
        checks.push(Check::agree(
            format!("distant_marginal[{k}]"),
            0.0,
            a.fact_ii_deviation,
            ctx.tolerances.validation,
        ));
        checks.push(Check::slack(
            format!("entropy_drop[{k}]"),
            a.acting_entropy_drop,
            a.distant_entropy_drop,
            a.fact_iii_slack,
            ctx.tol,
        ));
    }
    checks
}

fn distillation_checks(rep: &DistillationReport, d: usize, ctx: &Context<'_>) -> Vec<Check> {
    let mut checks = Vec::new();
    let log_d = (d as f64).log2();
    if let Some(cf) = &rep.bell_diagonal_closed_forms {
        checks.push(Check::agree("D_P_closed_form", cf.dp, rep.dp_bound, ctx.tol));
        checks.push(Check::agree("D_Pprime_closed_form", cf.dpprime, rep.dpprime_bound, ctx.tol));
    }
    let local_dev = [rep.s_a, rep.s_b, rep.s_bar_a]
        .iter()
        .map(|s| (s - log_d).abs())
        .fold(0.0, f64::max);
    checks.push(Check::agree("maximal_local_entropy", log_d, log_d - local_dev, ctx.tolerances.validation));
    let mut positive = Check::upper("D_Pprime_positive", rep.dpprime_bound, 0.0, 0.0);
    positive.pass = rep.dpprime_bound > 0.0;
    checks.push(positive);
    checks
}

fn entropy_summary(ens: &BipartiteEnsemble) -> Result<EntropySummary> {
    let avg = ens.average_state();
    Ok(EntropySummary {
        s: von_neumann_entropy(&avg)?,
        s_a: von_neumann_entropy(&partial_trace(&avg, Party::B))?,
        s_b: von_neumann_entropy(&partial_trace(&avg, Party::A))?,
        chi: holevo_chi(ens)?,
        chi_a: holevo_chi(&ens.marginal(Party::A))?,
        chi_b: holevo_chi(&ens.marginal(Party::B))?,
    })
}

fn transcript_summary(t: &ProtocolTranscript) -> TranscriptSummary {
    TranscriptSummary {
        depth: t.depth(),
        nodes: t
            .nodes()
            .into_iter()
            .map(|n| NodeSummary {
                path: n.path.clone(),
                measuring: n.next_party(),
                probability: n.probability,
                posterior: n.ensemble.probabilities(),
            })
            .collect(),
        chain: chain_mutual_information(t),
        flat_mutual_information: flat_mutual_information(t),
    }
}

fn fmt_num(x: f64) -> String {
    if x.is_infinite() {
        if x > 0.0 { "+inf".into() } else { "-inf".into() }
    } else {
        // adding 0.0 turns −0 into +0
        format!("{:.10}", x + 0.0)
    }
}

fn render_table(rep: &RunReport) -> String {
    let mut out = String::new();
    let _ = writeln!(
        out,
        "scenario: {}  command: {}  seed: {}  trials: {}  tol: {:e}",
        rep.scenario, rep.command, rep.seed, rep.trials, rep.tol
    );
    for tr in &rep.results {
        let _ = write!(out, "\n[trial {}] {}", tr.trial, tr.scenario);
        if let Some(s) = tr.seed {
            let _ = write!(out, " (seed {s})");
        }
        out.push('\n');
        if let Some(b) = &tr.bounds {
            let _ = writeln!(
                out,
                "I_locc = {}  E_in = {}  E_out = {}  S_A = {}  S_B = {}",
                fmt_num(b.i_locc),
                fmt_num(b.e_in_avg),
                fmt_num(b.e_out_avg),
                fmt_num(b.s_a),
                fmt_num(b.s_b)
            );
        }
        if let Some(d) = &tr.distillation {
            let rows = [
                ("S", d.s),
                ("S_A", d.s_a),
                ("S_B", d.s_b),
                ("S_bar_A", d.s_bar_a),
                ("D_P_bound", d.dp_bound),
                ("D_Pprime_bound", d.dpprime_bound),
                ("r_max", d.r_max),
                ("hashing_yield", d.hashing_yield),
                ("min_pt_eigenvalue", d.min_pt_eigenvalue),
            ];
            for (k, v) in rows {
                let _ = writeln!(out, "{k:<18} {}", fmt_num(v));
            }
            let _ = writeln!(out, "{:<18} {}", "ppt", d.ppt);
            let _ = writeln!(out, "{:<18} {}", "degenerate", d.degenerate_spectrum);
        }
        if let Some(e) = &tr.entropies {
            for (k, v) in [("S", e.s), ("S_A", e.s_a), ("S_B", e.s_b), ("chi", e.chi), ("chi_A", e.chi_a), ("chi_B", e.chi_b)] {
                let _ = writeln!(out, "{k:<6} {}", fmt_num(v));
            }
        }
        if let Some(t) = &tr.transcript {
            let _ = writeln!(out, "{:<20} {:>6} {:>14}  posterior", "path", "next", "probability");
            for n in &t.nodes {
                let path = if n.path.is_empty() { "()".to_string() } else { n.path.join(",") };
                let party = n.measuring.map_or("-".to_string(), |p| p.to_string());
                let post: Vec<String> = n.posterior.iter().map(|p| format!("{p:.6}")).collect();
                let _ = writeln!(out, "{path:<20} {party:>6} {:>14.10}  [{}]", n.probability, post.join(", "));
            }
            let per: Vec<String> = t.chain.per_round.iter().map(|x| fmt_num(*x)).collect();
            let _ = writeln!(out, "I per round: [{}]", per.join(", "));
            let _ = writeln!(out, "I total: {}  (flat: {})", fmt_num(t.chain.total), fmt_num(t.flat_mutual_information));
        }
        if !tr.checks.is_empty() {
            let w = tr.checks.iter().map(|c| c.name.len()).max().unwrap_or(5).max(5);
            let _ = writeln!(
                out,
                "{:<w$}  {:>16}  {:>16}  {:>16}  status",
                "check", "bound", "measured", "slack"
            );
            for c in &tr.checks {
                let _ = writeln!(
                    out,
                    "{:<w$}  {:>16}  {:>16}  {:>16}  {}",
                    c.name,
                    fmt_num(c.bound),
                    fmt_num(c.measured),
                    format!("{:.3e}", c.slack),
                    if c.pass { "PASS" } else { "FAIL" }
                );
            }
        }
    }
    let _ = writeln!(
        out,
        "\n{}: {} failing check(s); wall time {:.3} ms",
        if rep.pass { "PASS" } else { "FAIL" },
        rep.failures(),
        rep.wall_time.as_secs_f64() * 1e3
    );
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    const PHI_XX: &str = r#"{
      "name": "phi-pm-xx", "kind": "protocol", "dims": [2, 2],
      "ensemble": [
        {"probability": 0.5, "pure": [[0.7071067811865476, 0], [0, 0], [0, 0], [0.7071067811865476, 0]]},
        {"probability": 0.5, "pure": [[0.7071067811865476, 0], [0, 0], [0, 0], [-0.7071067811865476, 0]]}
      ],
      "protocol": {"depth": 2, "steps": [
        {"party": "A", "instrument": {"basis": "x"}},
        {"party": "B", "instrument": {"basis": "x"}}
      ]}
    }"#;

    #[test]
    fn saturating_scenario_passes() {
        let s = ScenarioFile::parse(PHI_XX).unwrap();
        let rep = run_scenario(&s, Command::BoundsVerify, &RunOptions::default()).unwrap();
        assert!(rep.pass);
        let b = rep.results[0].bounds.as_ref().unwrap();
        assert!((b.i_locc - 1.0).abs() < 1e-9);
        assert!((b.bound_ghyama - 1.0).abs() < 1e-9);
        assert!(rep.to_table().contains("ghyama"));
    }

    #[test]
    fn unknown_command() {
        assert!("foo".parse::<Command>().is_err());
        assert_eq!("entropy".parse::<Command>().unwrap(), Command::Entropy);
    }

    #[test]
    fn json_is_deterministic() {
        let s = ScenarioFile::parse(PHI_XX).unwrap();
        let a = run_scenario(&s, Command::ProtocolRun, &RunOptions::default()).unwrap();
        let b = run_scenario(&s, Command::ProtocolRun, &RunOptions::default()).unwrap();
        assert_eq!(a.to_json(), b.to_json());
    }

    #[test]
    fn random_trials_sorted() {
        let text = r#"{"name": "sweep", "kind": "random",
            "generator": {"n_members": [2, 4], "dims": [2, 2], "protocol_depth": [1, 3],
                          "instrument_family": "projective_random_basis"}}"#;
        let s = ScenarioFile::parse(text).unwrap();
        let opts = RunOptions { seed: 7, trials: 5, tol: None };
        let rep = run_scenario(&s, Command::BoundsVerify, &opts).unwrap();
        let idx: Vec<usize> = rep.results.iter().map(|r| r.trial).collect();
        assert_eq!(idx, vec![0, 1, 2, 3, 4]);
        assert_eq!(rep.results[2].seed, Some(9));
        assert!(rep.pass, "{}", rep.to_table());
    }
}
