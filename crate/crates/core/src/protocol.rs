//! Multi-round local measurement protocols with classical communication.
//!
//! A protocol is a sequence of local instruments, each chosen from the full
//! outcome history so far. Running one against an ensemble produces a
//! [`ProtocolTranscript`]: the exact outcome tree with path probabilities and
//! the posterior ensemble at every node. Everything downstream (mutual
//! information, output entanglement, the bound suite and the per-round
//! audits) is evaluated on that tree without sampling.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::entropy::{entanglement, holevo_chi, BipartiteEnsemble, MeasureSelector};
use crate::error::{Error, Result};
use crate::linalg::{c, partial_trace_matrix, CMatrix, DensityOperator, Party, C64};

/// Outcomes with probability below this are dropped from the tree.
pub const PRUNE_THRESHOLD: f64 = 1e-12;

/// Tolerance on `‖Σ K†K − I‖_max`.
pub const COMPLETENESS_TOL: f64 = 1e-9;

/// Member weights `p_x · tr(K ρ_x K†)` below this make the posterior weight
/// exactly zero.
const MEMBER_CUTOFF: f64 = 1e-15;

/// A local measurement with outcome-labelled Kraus operators.
#[derive(Debug, Clone, PartialEq)]
pub struct KrausInstrument {
    party: Party,
    outcomes: Vec<(String, CMatrix)>,
}

/// Named single-party measurement bases.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NamedBasis {
    /// Computational basis, any dimension; labels `"0"`, `"1"`, ...
    Z,
    /// Qubit `|±⟩`; labels `"+"`, `"-"`.
    X,
    /// Qubit `|±i⟩`; labels `"+i"`, `"-i"`.
    Y,
}

impl KrausInstrument {
    pub fn new(party: Party, outcomes: Vec<(String, CMatrix)>) -> Result<Self> {
        let d = outcomes.first().ok_or(Error::EmptyInstrument)?.1.rows();
        if let Some((label, k)) = outcomes.iter().find(|(_, k)| !k.is_square() || k.rows() != d) {
            return Err(Error::DimensionMismatch(format!(
                "Kraus operator `{label}` is {}x{}, expected {d}x{d}",
                k.rows(),
                k.cols()
            )));
        }
        let sum = outcomes
            .iter()
            .fold(CMatrix::zeros(d, d), |acc, (_, k)| &acc + &(&k.adjoint() * k));
        let dev = sum.max_abs_diff(&CMatrix::identity(d));
        if dev > COMPLETENESS_TOL {
            return Err(Error::IncompleteInstrument(dev));
        }
        Ok(KrausInstrument { party, outcomes })
    }

    /// Rank-one projective measurement `{|v⟩⟨v|}` onto an orthonormal basis.
    pub fn projective(party: Party, basis: &[Vec<C64>], labels: Option<Vec<String>>) -> Result<Self> {
        let labels = labels.unwrap_or_else(|| (0..basis.len()).map(|i| i.to_string()).collect());
        if labels.len() != basis.len() {
            return Err(Error::DimensionMismatch(format!(
                "{} labels for {} basis vectors",
                labels.len(),
                basis.len()
            )));
        }
        let outcomes = labels
            .into_iter()
            .zip(basis)
            .map(|(l, v)| (l, CMatrix::projector(v)))
            .collect();
        KrausInstrument::new(party, outcomes)
    }

    pub fn named(party: Party, basis: NamedBasis, dim: usize) -> Result<Self> {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let (vectors, labels): (Vec<Vec<C64>>, Vec<&str>) = match basis {
            NamedBasis::Z => {
                let vecs: Vec<Vec<C64>> = (0..dim)
                    .map(|i| (0..dim).map(|j| c(if i == j { 1.0 } else { 0.0 }, 0.0)).collect())
                    .collect();
                let labels: Vec<String> = (0..dim).map(|i| i.to_string()).collect();
                return KrausInstrument::projective(party, &vecs, Some(labels));
            }
            _ if dim != 2 => {
                return Err(Error::DimensionMismatch(format!(
                    "basis {basis:?} is defined for qubits only, party dimension is {dim}"
                )))
            }
            NamedBasis::X => (
                vec![vec![c(s, 0.0), c(s, 0.0)], vec![c(s, 0.0), c(-s, 0.0)]],
                vec!["+", "-"],
            ),
            NamedBasis::Y => (
                vec![vec![c(s, 0.0), c(0.0, s)], vec![c(s, 0.0), c(0.0, -s)]],
                vec!["+i", "-i"],
            ),
        };
        KrausInstrument::projective(party, &vectors, Some(labels.into_iter().map(String::from).collect()))
    }

    pub fn party(&self) -> Party {
        self.party
    }

    pub fn dim(&self) -> usize {
        self.outcomes[0].1.rows()
    }

    pub fn outcomes(&self) -> &[(String, CMatrix)] {
        &self.outcomes
    }

    fn embedded(&self, kraus: &CMatrix, dim_a: usize, dim_b: usize) -> CMatrix {
        match self.party {
            Party::A => kraus.kron(&CMatrix::identity(dim_b)),
            Party::B => CMatrix::identity(dim_a).kron(kraus),
        }
    }
}

/// One surviving outcome of a measurement on an ensemble.
#[derive(Debug, Clone, PartialEq)]
pub struct Branch {
    pub label: String,
    pub probability: f64,
    pub posterior: BipartiteEnsemble,
}

/// Applies `instr` to every member of `ens`.
///
/// Members whose weight vanishes under an outcome keep their prior state with
/// posterior probability exactly zero, so member indices stay aligned with
/// the prior ensemble.
pub fn measure_branch(ens: &BipartiteEnsemble, instr: &KrausInstrument) -> Result<Vec<Branch>> {
    let (da, db) = ens.dims();
    let d = ens.dim_of(instr.party);
    if instr.dim() != d {
        return Err(Error::DimensionMismatch(format!(
            "instrument acts on dimension {}, party {} has dimension {d}",
            instr.dim(),
            instr.party
        )));
    }

    let mut raw = Vec::with_capacity(instr.outcomes.len());
    for (label, kraus) in &instr.outcomes {
        let k = instr.embedded(kraus, da, db);
        let mut weights = Vec::with_capacity(ens.len());
        let mut states = Vec::with_capacity(ens.len());
        for (p, rho) in ens.members() {
            let sigma = k.sandwich(rho.matrix());
            let tr = sigma.trace().re.max(0.0);
            weights.push(p * tr);
            states.push((sigma, tr));
        }
        let p_out: f64 = weights.iter().sum();
        raw.push((label, p_out, weights, states));
    }

    let kept: f64 = raw.iter().filter(|r| r.1 >= PRUNE_THRESHOLD).map(|r| r.1).sum();
    let mut branches = Vec::new();
    for (label, p_out, weights, states) in raw {
        if p_out < PRUNE_THRESHOLD {
            continue;
        }
        let live: f64 = weights.iter().filter(|w| **w > MEMBER_CUTOFF).sum();
        let members = weights
            .iter()
            .zip(states)
            .zip(ens.members())
            .map(|((&w, (sigma, tr)), (_, prior))| {
                if w > MEMBER_CUTOFF {
                    (w / live, DensityOperator::from_matrix_unchecked(sigma.scale_re(1.0 / tr), da, db))
                } else {
                    (0.0, prior.clone())
                }
            })
            .collect();
        branches.push(Branch {
            label: label.clone(),
            probability: p_out / kept,
            posterior: BipartiteEnsemble::from_parts_unchecked(da, db, members),
        });
    }
    Ok(branches)
}

/// Picks the next instrument from the outcome history; this is where
/// classical communication enters.
pub trait InstrumentChooser {
    fn choose(&self, history: &[String]) -> Option<KrausInstrument>;
}

impl<F> InstrumentChooser for F
where
    F: Fn(&[String]) -> Option<KrausInstrument>,
{
    fn choose(&self, history: &[String]) -> Option<KrausInstrument> {
        self(history)
    }
}

/// Per-round default instruments plus exact-history overrides.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct AdaptiveSchedule {
    pub steps: Vec<KrausInstrument>,
    pub overrides: BTreeMap<Vec<String>, KrausInstrument>,
}

impl AdaptiveSchedule {
    pub fn fixed(steps: Vec<KrausInstrument>) -> Self {
        AdaptiveSchedule {
            steps,
            overrides: BTreeMap::new(),
        }
    }
}

impl InstrumentChooser for AdaptiveSchedule {
    fn choose(&self, history: &[String]) -> Option<KrausInstrument> {
        self.overrides
            .get(history)
            .or_else(|| self.steps.get(history.len()))
            .cloned()
    }
}

/// A node of the outcome tree.
#[derive(Debug, Clone, PartialEq)]
pub struct TranscriptNode {
    /// Outcome labels from the root.
    pub path: Vec<String>,
    /// Probability of the whole path.
    pub probability: f64,
    /// Posterior ensemble `{p_{x|path}, ρ_{x|path}}`.
    pub ensemble: BipartiteEnsemble,
    /// Party whose measurement produced this node; `None` at the root.
    pub party: Option<Party>,
    pub children: Vec<TranscriptNode>,
}

impl TranscriptNode {
    /// Party measuring at this node, if it has children.
    pub fn next_party(&self) -> Option<Party> {
        self.children.first().and_then(|c| c.party)
    }

    /// Children paired with their probability conditioned on this node.
    pub fn conditional_children(&self) -> impl Iterator<Item = (f64, &TranscriptNode)> {
        self.children.iter().map(move |c| (c.probability / self.probability, c))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProtocolTranscript {
    root: TranscriptNode,
    depth: usize,
}

impl ProtocolTranscript {
    pub fn root(&self) -> &TranscriptNode {
        &self.root
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    /// All nodes at `depth`, in depth-first order.
    pub fn nodes_at(&self, depth: usize) -> Vec<&TranscriptNode> {
        fn walk<'a>(n: &'a TranscriptNode, d: usize, out: &mut Vec<&'a TranscriptNode>) {
            if n.path.len() == d {
                out.push(n);
            } else {
                n.children.iter().for_each(|c| walk(c, d, out));
            }
        }
        let mut out = Vec::new();
        walk(&self.root, depth, &mut out);
        out
    }

    pub fn leaves(&self) -> Vec<&TranscriptNode> {
        self.nodes_at(self.depth)
    }

    /// Every node, depth-first, root first.
    pub fn nodes(&self) -> Vec<&TranscriptNode> {
        fn walk<'a>(n: &'a TranscriptNode, out: &mut Vec<&'a TranscriptNode>) {
            out.push(n);
            n.children.iter().for_each(|c| walk(c, out));
        }
        let mut out = Vec::new();
        walk(&self.root, &mut out);
        out
    }

    /// Checks the tree invariants: sibling probabilities add up to the
    /// parent's, every posterior is normalized and leaves sum to one.
    pub fn check(&self, tol: f64) -> Result<()> {
        for node in self.nodes() {
            let probs = node.ensemble.probabilities();
            let s: f64 = probs.iter().sum();
            if (s - 1.0).abs() > tol || probs.iter().any(|p| *p < 0.0) {
                return Err(Error::Inconsistent(format!(
                    "posterior at {:?} sums to {s}",
                    node.path
                )));
            }
            if !node.children.is_empty() {
                let cs: f64 = node.children.iter().map(|c| c.probability).sum();
                if (cs - node.probability).abs() > tol {
                    return Err(Error::Inconsistent(format!(
                        "children of {:?} sum to {cs}, parent has {}",
                        node.path, node.probability
                    )));
                }
            }
        }
        let total: f64 = self.leaves().iter().map(|l| l.probability).sum();
        if (total - 1.0).abs() > tol {
            return Err(Error::Inconsistent(format!("leaf probabilities sum to {total}")));
        }
        Ok(())
    }
}

/// Runs `depth` rounds, asking `chooser` for an instrument at every
/// reachable history.
pub fn run_protocol<C: InstrumentChooser + ?Sized>(
    ens: &BipartiteEnsemble,
    chooser: &C,
    depth: usize,
) -> Result<ProtocolTranscript> {
    fn grow<C: InstrumentChooser + ?Sized>(node: &mut TranscriptNode, chooser: &C, depth: usize) -> Result<()> {
        if node.path.len() == depth {
            return Ok(());
        }
        let instr = chooser
            .choose(&node.path)
            .ok_or_else(|| Error::ChooserUndefined(node.path.clone()))?;
        for branch in measure_branch(&node.ensemble, &instr)? {
            let mut path = node.path.clone();
            path.push(branch.label);
            let mut child = TranscriptNode {
                path,
                probability: node.probability * branch.probability,
                ensemble: branch.posterior,
                party: Some(instr.party()),
                children: Vec::new(),
            };
            grow(&mut child, chooser, depth)?;
            node.children.push(child);
        }
        Ok(())
    }

    let mut root = TranscriptNode {
        path: Vec::new(),
        probability: 1.0,
        ensemble: ens.clone(),
        party: None,
        children: Vec::new(),
    };
    grow(&mut root, chooser, depth)?;
    Ok(ProtocolTranscript { root, depth })
}

/// `−Σ p log₂ p` over strictly positive entries.
fn plogp(p: impl IntoIterator<Item = f64>) -> f64 {
    p.into_iter().filter(|&x| x > 0.0).map(|x| -x * x.log2()).sum()
}

fn label_entropy(node: &TranscriptNode) -> f64 {
    plogp(node.ensemble.members().iter().map(|m| m.0))
}

/// Round-by-round mutual information between the ensemble label and the
/// outcome record.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChainInformation {
    /// `I(X; Y_k | Y_1 … Y_{k−1})` for `k = 1..=n`.
    pub per_round: Vec<f64>,
    /// Sum of the per-round terms.
    pub total: f64,
}

/// Chain-rule mutual information computed from conditional label entropies
/// along the tree.
pub fn chain_mutual_information(t: &ProtocolTranscript) -> ChainInformation {
    let cond_entropy = |k: usize| -> f64 {
        t.nodes_at(k)
            .iter()
            .map(|n| n.probability * label_entropy(n))
            .sum()
    };
    let per_round: Vec<f64> = (1..=t.depth())
        .map(|k| cond_entropy(k - 1) - cond_entropy(k))
        .collect();
    ChainInformation {
        // an empty f64 sum is −0
        total: per_round.iter().sum::<f64>() + 0.0,
        per_round,
    }
}

/// Joint distribution `p(x, leaf)`, one row per leaf in depth-first order.
pub fn joint_distribution(t: &ProtocolTranscript) -> Vec<Vec<f64>> {
    t.leaves()
        .iter()
        .map(|l| l.ensemble.members().iter().map(|m| l.probability * m.0).collect())
        .collect()
}

/// `H(X) + H(Y) − H(X, Y)` on the flattened joint distribution.
pub fn flat_mutual_information(t: &ProtocolTranscript) -> f64 {
    let joint = joint_distribution(t);
    let n_x = joint.first().map_or(0, Vec::len);
    let px: Vec<f64> = (0..n_x).map(|x| joint.iter().map(|r| r[x]).sum()).collect();
    let py: Vec<f64> = joint.iter().map(|r| r.iter().sum()).collect();
    plogp(px) + plogp(py) - plogp(joint.into_iter().flatten())
}

/// `Σ_leaves p_leaf · E(Σ_x p_{x|leaf} ρ_{x|leaf})`.
pub fn average_output_entanglement(t: &ProtocolTranscript, sel: MeasureSelector) -> Result<f64> {
    t.leaves()
        .iter()
        .map(|l| Ok(l.probability * entanglement(&l.ensemble.average_state(), sel)?))
        .sum()
}

/// `Σ_x p_x 𝓔(ρ_x)`.
pub fn average_input_entanglement(ens: &BipartiteEnsemble, sel: MeasureSelector) -> Result<f64> {
    ens.members()
        .iter()
        .filter(|(p, _)| *p > 0.0)
        .map(|(p, rho)| Ok(p * entanglement(rho, sel)?))
        .sum()
}

/// Bound minus measured information, per inequality.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Slacks {
    pub sei: f64,
    pub asol: Option<f64>,
    pub asol25: Option<f64>,
    pub asol1: f64,
    pub ghyama: f64,
}

/// Extracted versus unused information against the fixed budget
/// `N − 𝓔̄_in`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Complementarity {
    pub extracted: f64,
    pub unused: f64,
    pub budget: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    #[serde(rename = "I_locc")]
    pub i_locc: f64,
    #[serde(rename = "per_round_I")]
    pub per_round_i: Vec<f64>,
    #[serde(rename = "E_out_avg")]
    pub e_out_avg: f64,
    #[serde(rename = "E_in_avg")]
    pub e_in_avg: f64,
    #[serde(rename = "N_qubits")]
    pub n_qubits: f64,
    #[serde(rename = "S_A")]
    pub s_a: f64,
    #[serde(rename = "S_B")]
    pub s_b: f64,
    /// Holevo quantity of the global ensemble.
    pub chi_global: f64,
    pub bound_sei: f64,
    /// `None` for depth-0 transcripts.
    pub bound_asol: Option<f64>,
    pub bound_asol25: Option<f64>,
    pub bound_asol1: f64,
    pub bound_ghyama: f64,
    pub slacks: Slacks,
    pub complementarity: Complementarity,
}

impl BoundReport {
    /// `(name, bound, slack)` for every bound that applies.
    pub fn bounds(&self) -> Vec<(&'static str, f64, f64)> {
        let mut out = vec![("sei", self.bound_sei, self.slacks.sei)];
        if let (Some(b), Some(s)) = (self.bound_asol, self.slacks.asol) {
            out.push(("asol", b, s));
        }
        if let (Some(b), Some(s)) = (self.bound_asol25, self.slacks.asol25) {
            out.push(("asol25", b, s));
        }
        out.push(("asol1", self.bound_asol1, self.slacks.asol1));
        out.push(("ghyama", self.bound_ghyama, self.slacks.ghyama));
        out
    }

    pub fn min_slack(&self) -> f64 {
        self.bounds().iter().map(|b| b.2).fold(f64::INFINITY, f64::min)
    }
}

/// Returns the party if every element agrees.
fn uniform_party(parties: impl IntoIterator<Item = Option<Party>>) -> Option<Party> {
    let mut it = parties.into_iter();
    let first = it.next().flatten()?;
    it.all(|p| p == Some(first)).then_some(first)
}

fn marginal_entropy(node: &TranscriptNode, party: Party) -> f64 {
    node.ensemble.average_marginal_entropy(party)
}

/// Evaluates every LOCC bound on the transcript.
///
/// The last-step terms are keyed on the recorded acting parties. With `L`
/// the party of the final round, `asol` subtracts the other party's mean
/// member entropy and the leaf-average marginal entropy on `L`'s side;
/// `asol25` subtracts `L`'s mean member entropy and the average marginal
/// entropy on the other side one round earlier. If the final round's party
/// differs between branches, both orientations are valid bounds and the
/// smaller one is reported.
pub fn bound_suite(
    t: &ProtocolTranscript,
    sel_in: MeasureSelector,
    sel_out: MeasureSelector,
) -> Result<BoundReport> {
    let root = &t.root().ensemble;
    let (da, db) = root.dims();
    let s_a = root.average_marginal_entropy(Party::A);
    let s_b = root.average_marginal_entropy(Party::B);
    let mean = |z: Party| root.mean_member_entropy(z);
    let max_mean = mean(Party::A).max(mean(Party::B));
    let n_qubits = ((da * db) as f64).log2();

    let chain = chain_mutual_information(t);
    let i_locc = chain.total;
    let e_out = average_output_entanglement(t, sel_out)?;
    let e_in = average_input_entanglement(root, sel_in)?;

    let (asol, asol25) = if t.depth() == 0 {
        (None, None)
    } else {
        let leaves = t.leaves();
        let asol_for = |w: Party| -> f64 {
            let tail: f64 = leaves
                .iter()
                .map(|l| l.probability * marginal_entropy(l, w.other()))
                .sum();
            s_a + s_b - mean(w) - tail
        };
        let asol = match uniform_party(leaves.iter().map(|l| l.party)) {
            Some(last) => asol_for(last.other()),
            None => asol_for(Party::A).min(asol_for(Party::B)),
        };

        let penultimate = t.nodes_at(t.depth() - 1);
        let asol25_for = |w: Party| -> f64 {
            let tail: f64 = penultimate
                .iter()
                .map(|v| {
                    if v.next_party() == Some(w) {
                        v.probability * marginal_entropy(v, w.other())
                    } else {
                        v.children
                            .iter()
                            .map(|c| c.probability * marginal_entropy(c, w.other()))
                            .sum()
                    }
                })
                .sum();
            s_a + s_b - mean(w) - tail
        };
        let asol25 = match uniform_party(penultimate.iter().map(|v| v.next_party())) {
            Some(last) => asol25_for(last),
            None => asol25_for(Party::A).min(asol25_for(Party::B)),
        };
        (Some(asol), Some(asol25))
    };

    let sei = s_a + s_b - max_mean;
    let asol1 = sei - e_out;
    let ghyama = n_qubits - e_in - e_out;

    Ok(BoundReport {
        i_locc,
        per_round_i: chain.per_round,
        e_out_avg: e_out,
        e_in_avg: e_in,
        n_qubits,
        s_a,
        s_b,
        chi_global: holevo_chi(root)?,
        bound_sei: sei,
        bound_asol: asol,
        bound_asol25: asol25,
        bound_asol1: asol1,
        bound_ghyama: ghyama,
        slacks: Slacks {
            sei: sei - i_locc,
            asol: asol.map(|b| b - i_locc),
            asol25: asol25.map(|b| b - i_locc),
            asol1: asol1 - i_locc,
            ghyama: ghyama - i_locc,
        },
        complementarity: Complementarity {
            extracted: i_locc,
            unused: e_out,
            budget: n_qubits - e_in,
        },
    })
}

/// Per-round consistency record.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RoundAudit {
    pub round: usize,
    /// Acting party, or `None` when it differs between branches.
    pub party: Option<Party>,
    /// `I_k`.
    pub information: f64,
    /// Acting-side Holevo quantity before the round, averaged over nodes.
    pub chi_before: f64,
    /// Acting-side Holevo quantity after the round, averaged over outcomes.
    pub chi_after: f64,
    /// `chi_before − chi_after − I_k`; nonnegative up to rounding.
    pub lemma1_slack: f64,
    /// Largest entrywise change of the distant party's average marginal.
    pub fact_ii_deviation: f64,
    /// Drop of the acting party's mean member entropy.
    pub acting_entropy_drop: f64,
    /// Drop of the distant party's mean member entropy.
    pub distant_entropy_drop: f64,
    /// `acting_entropy_drop − distant_entropy_drop`; nonnegative up to rounding.
    pub fact_iii_slack: f64,
}

fn mean_member_entropy_at(node: &TranscriptNode, party: Party) -> f64 {
    node.ensemble.mean_member_entropy(party)
}

/// Audits every round of the transcript.
pub fn audit_rounds(t: &ProtocolTranscript) -> Result<Vec<RoundAudit>> {
    let (da, db) = t.root().ensemble.dims();
    let mut out = Vec::with_capacity(t.depth());
    for k in 1..=t.depth() {
        let parents = t.nodes_at(k - 1);
        let mut info = 0.0;
        let mut chi_before = 0.0;
        let mut chi_after = 0.0;
        let mut dev: f64 = 0.0;
        let mut acting_drop = 0.0;
        let mut distant_drop = 0.0;
        for v in &parents {
            let Some(z) = v.next_party() else { continue };
            let distant = z.other();
            info += v.probability * label_entropy(v);
            chi_before += v.probability * holevo_chi(&v.ensemble.marginal(z))?;
            acting_drop += v.probability * mean_member_entropy_at(v, z);
            distant_drop += v.probability * mean_member_entropy_at(v, distant);

            let before = partial_trace_matrix(v.ensemble.average_state().matrix(), da, db, distant);
            let mut after = CMatrix::zeros(before.rows(), before.cols());
            for (pc, child) in v.conditional_children() {
                info -= child.probability * label_entropy(child);
                chi_after += child.probability * holevo_chi(&child.ensemble.marginal(z))?;
                acting_drop -= child.probability * mean_member_entropy_at(child, z);
                distant_drop -= child.probability * mean_member_entropy_at(child, distant);
                let m = partial_trace_matrix(child.ensemble.average_state().matrix(), da, db, distant);
                after = &after + &m.scale_re(pc);
            }
            dev = dev.max(before.max_abs_diff(&after));
        }
        out.push(RoundAudit {
            round: k,
            party: uniform_party(parents.iter().map(|v| v.next_party())),
            information: info,
            chi_before,
            chi_after,
            lemma1_slack: chi_before - chi_after - info,
            fact_ii_deviation: dev,
            acting_entropy_drop: acting_drop,
            distant_entropy_drop: distant_drop,
            fact_iii_slack: acting_drop - distant_drop,
        });
    }
    Ok(out)
}
