//! JSON scenario files and seeded random scenario generation.
//!
//! Complex numbers are `[re, im]` pairs, matrices are row-major nested
//! arrays. See `docs/scenario-format.md` for the full schema.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Exp1, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::distill::{bell_diagonal, BellDiagonalSpec};
use crate::entropy::{BipartiteEnsemble, MeasureSelector};
use crate::error::{Error, Result};
use crate::linalg::{c, validate_density, CMatrix, DensityOperator, Party, C64, DEFAULT_TOL};
use crate::protocol::{AdaptiveSchedule, KrausInstrument, NamedBasis};

/// `[re, im]`.
pub type ComplexJson = [f64; 2];

fn to_c64(z: &ComplexJson) -> C64 {
    c(z[0], z[1])
}

fn from_c64(z: C64) -> ComplexJson {
    [z.re, z.im]
}

fn matrix_from_json(rows: &[Vec<ComplexJson>], field: &str) -> Result<CMatrix> {
    let rows: Vec<Vec<C64>> = rows.iter().map(|r| r.iter().map(to_c64).collect()).collect();
    CMatrix::from_rows(&rows).map_err(|e| Error::scenario(field, e.to_string()))
}

pub fn matrix_to_json(m: &CMatrix) -> Vec<Vec<ComplexJson>> {
    m.to_rows()
        .into_iter()
        .map(|r| r.into_iter().map(from_c64).collect())
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScenarioKind {
    /// A fixed ensemble; bound checks run on the depth-0 transcript.
    Ensemble,
    /// A fixed ensemble plus an adaptive measurement protocol.
    Protocol,
    /// A Bell-diagonal state given by its weights.
    BellDiagonal,
    /// A generator spec; each trial draws a protocol scenario from the seed.
    Random,
}

/// One ensemble member: exactly one of `pure` or `matrix`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MemberSpec {
    pub probability: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pure: Option<Vec<ComplexJson>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub matrix: Option<Vec<Vec<ComplexJson>>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KrausSpec {
    pub label: String,
    pub matrix: Vec<Vec<ComplexJson>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InstrumentSpec {
    /// Named basis: `"z"`, `"x"` or `"y"`.
    Basis(NamedBasis),
    /// Orthonormal basis vectors; outcome labels are `"0"`, `"1"`, ...
    Projective(Vec<Vec<ComplexJson>>),
    /// Explicit Kraus operators.
    Kraus(Vec<KrausSpec>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StepSpec {
    pub party: Party,
    pub instrument: InstrumentSpec,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OverrideSpec {
    pub history: Vec<String>,
    pub party: Party,
    pub instrument: InstrumentSpec,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProtocolSpec {
    pub depth: usize,
    /// Default instrument for each round.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub steps: Vec<StepSpec>,
    /// Instruments for specific outcome histories; these win over `steps`.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub overrides: Vec<OverrideSpec>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MeasureSpec {
    #[serde(default)]
    pub input: MeasureSelector,
    #[serde(default)]
    pub output: MeasureSelector,
}

impl Default for MeasureSpec {
    fn default() -> Self {
        MeasureSpec {
            input: MeasureSelector::Auto,
            output: MeasureSelector::Auto,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Tolerances {
    /// Used for state validation, fact-(ii) and chain-rule checks.
    #[serde(default = "default_validation_tol")]
    pub validation: f64,
    /// Used for bound slacks.
    #[serde(default = "default_slack_tol")]
    pub slack: f64,
}

fn default_validation_tol() -> f64 {
    DEFAULT_TOL
}

fn default_slack_tol() -> f64 {
    1e-7
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            validation: default_validation_tol(),
            slack: default_slack_tol(),
        }
    }
}

/// A fixed count or an inclusive `[min, max]` range.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum CountRange {
    Exact(usize),
    Range([usize; 2]),
}

impl CountRange {
    pub fn bounds(self) -> (usize, usize) {
        match self {
            CountRange::Exact(n) => (n, n),
            CountRange::Range([lo, hi]) => (lo, hi),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InstrumentFamily {
    /// A Haar-random local projective basis at every reachable history.
    ProjectiveRandomBasis,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeneratorSpec {
    pub n_members: CountRange,
    pub dims: [usize; 2],
    pub protocol_depth: CountRange,
    pub instrument_family: InstrumentFamily,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioFile {
    pub name: String,
    pub kind: ScenarioKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dims: Option<[usize; 2]>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub ensemble: Vec<MemberSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub protocol: Option<ProtocolSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bell_diagonal: Option<BellDiagonalSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub generator: Option<GeneratorSpec>,
    #[serde(default)]
    pub measures: MeasureSpec,
    #[serde(default)]
    pub tolerances: Tolerances,
}

/// A scenario turned into module-level values.
#[derive(Debug, Clone, PartialEq)]
pub enum Resolved {
    Protocol {
        ensemble: BipartiteEnsemble,
        schedule: AdaptiveSchedule,
        depth: usize,
    },
    BellDiagonal {
        spec: BellDiagonalSpec,
        state: DensityOperator,
    },
    Random(GeneratorSpec),
}

impl ScenarioFile {
    /// Parses JSON; syntax errors carry line and column.
    pub fn parse(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("scenario serializes");
        s.push('\n');
        s
    }

    fn dims(&self) -> Result<(usize, usize)> {
        match self.dims {
            Some([a, b]) if a > 0 && b > 0 => Ok((a, b)),
            Some(_) => Err(Error::scenario("dims", "dimensions must be positive")),
            None => Err(Error::scenario("dims", "missing")),
        }
    }

    fn resolve_ensemble(&self) -> Result<BipartiteEnsemble> {
        let (da, db) = self.dims()?;
        let tol = self.tolerances.validation;
        if self.ensemble.is_empty() {
            return Err(Error::scenario("ensemble", "needs at least one member"));
        }
        let mut members = Vec::with_capacity(self.ensemble.len());
        for (i, m) in self.ensemble.iter().enumerate() {
            let at = |f: &str| format!("ensemble[{i}].{f}");
            let state = match (&m.pure, &m.matrix) {
                (Some(v), None) => {
                    let v: Vec<C64> = v.iter().map(to_c64).collect();
                    let nrm: f64 = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
                    if (nrm - 1.0).abs() > tol {
                        return Err(Error::scenario(at("pure"), format!("vector norm {nrm} is not 1")));
                    }
                    DensityOperator::pure(&v, da, db).map_err(|e| Error::scenario(at("pure"), e.to_string()))?
                }
                (None, Some(rows)) => {
                    let mat = matrix_from_json(rows, &at("matrix"))?;
                    validate_density(mat, da, db, tol).map_err(|e| Error::scenario(at("matrix"), e.to_string()))?
                }
                _ => return Err(Error::scenario(format!("ensemble[{i}]"), "give exactly one of `pure` or `matrix`")),
            };
            members.push((m.probability, state));
        }
        BipartiteEnsemble::new(members).map_err(|e| Error::scenario("ensemble", e.to_string()))
    }

    fn resolve_schedule(&self, protocol: &ProtocolSpec) -> Result<AdaptiveSchedule> {
        let (da, db) = self.dims()?;
        let dim = |p: Party| if p == Party::A { da } else { db };
        let mut schedule = AdaptiveSchedule::default();
        for (i, s) in protocol.steps.iter().enumerate() {
            let field = format!("protocol.steps[{i}].instrument");
            schedule
                .steps
                .push(build_instrument(s.party, &s.instrument, dim(s.party), &field)?);
        }
        let mut overrides = BTreeMap::new();
        for (i, o) in protocol.overrides.iter().enumerate() {
            let field = format!("protocol.overrides[{i}]");
            if o.history.len() >= protocol.depth {
                return Err(Error::scenario(
                    format!("{field}.history"),
                    format!("history of length {} exceeds protocol depth {}", o.history.len(), protocol.depth),
                ));
            }
            let instr = build_instrument(o.party, &o.instrument, dim(o.party), &format!("{field}.instrument"))?;
            if overrides.insert(o.history.clone(), instr).is_some() {
                return Err(Error::scenario(format!("{field}.history"), "duplicate history"));
            }
        }
        schedule.overrides = overrides;
        Ok(schedule)
    }

    /// Builds module-level values; errors name the offending field.
    pub fn resolve(&self) -> Result<Resolved> {
        match self.kind {
            ScenarioKind::Ensemble => Ok(Resolved::Protocol {
                ensemble: self.resolve_ensemble()?,
                schedule: AdaptiveSchedule::default(),
                depth: 0,
            }),
            ScenarioKind::Protocol => {
                let protocol = self
                    .protocol
                    .as_ref()
                    .ok_or_else(|| Error::scenario("protocol", "missing"))?;
                Ok(Resolved::Protocol {
                    ensemble: self.resolve_ensemble()?,
                    schedule: self.resolve_schedule(protocol)?,
                    depth: protocol.depth,
                })
            }
            ScenarioKind::BellDiagonal => {
                let spec = self
                    .bell_diagonal
                    .clone()
                    .ok_or_else(|| Error::scenario("bell_diagonal", "missing"))?;
                if let Some([a, b]) = self.dims {
                    if a != spec.d || b != spec.d {
                        return Err(Error::scenario("dims", format!("must be [{0}, {0}] for d = {0}", spec.d)));
                    }
                }
                let state = bell_diagonal(&spec).map_err(|e| Error::scenario("bell_diagonal", e.to_string()))?;
                Ok(Resolved::BellDiagonal { spec, state })
            }
            ScenarioKind::Random => {
                let g = self
                    .generator
                    .clone()
                    .ok_or_else(|| Error::scenario("generator", "missing"))?;
                check_generator(&g)?;
                Ok(Resolved::Random(g))
            }
        }
    }
}

fn build_instrument(party: Party, spec: &InstrumentSpec, dim: usize, field: &str) -> Result<KrausInstrument> {
    let wrap = |e: Error| Error::scenario(field, e.to_string());
    match spec {
        InstrumentSpec::Basis(b) => KrausInstrument::named(party, *b, dim).map_err(wrap),
        InstrumentSpec::Projective(vectors) => {
            let basis: Vec<Vec<C64>> = vectors.iter().map(|v| v.iter().map(to_c64).collect()).collect();
            if basis.iter().any(|v| v.len() != dim) || basis.len() != dim {
                return Err(Error::scenario(field, format!("need {dim} basis vectors of length {dim}")));
            }
            KrausInstrument::projective(party, &basis, None).map_err(wrap)
        }
        InstrumentSpec::Kraus(ops) => {
            let mut outcomes = Vec::with_capacity(ops.len());
            for (i, k) in ops.iter().enumerate() {
                outcomes.push((k.label.clone(), matrix_from_json(&k.matrix, &format!("{field}.kraus[{i}].matrix"))?));
            }
            KrausInstrument::new(party, outcomes).map_err(wrap)
        }
    }
}

fn check_generator(g: &GeneratorSpec) -> Result<()> {
    let (lo, hi) = g.n_members.bounds();
    if lo == 0 {
        return Err(Error::scenario("generator.n_members", "must be at least 1"));
    }
    if lo > hi {
        return Err(Error::scenario("generator.n_members", "empty range"));
    }
    let (dlo, dhi) = g.protocol_depth.bounds();
    if dlo > dhi {
        return Err(Error::scenario("generator.protocol_depth", "empty range"));
    }
    if g.dims != [2, 2] {
        return Err(Error::Unsupported(format!(
            "random scenarios support dims [2, 2] only (got {:?}); the output measure needs two qubits",
            g.dims
        )));
    }
    Ok(())
}

fn gaussian_unit_vector(rng: &mut ChaCha8Rng, n: usize) -> Vec<C64> {
    loop {
        let v: Vec<C64> = (0..n)
            .map(|_| c(rng.sample(StandardNormal), rng.sample(StandardNormal)))
            .collect();
        let nrm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if nrm > 1e-6 {
            return v.into_iter().map(|z| z / nrm).collect();
        }
    }
}

fn vector_json(v: &[C64]) -> Vec<ComplexJson> {
    v.iter().copied().map(from_c64).collect()
}

/// Draws a protocol scenario: Haar-like pure members, a random point of the
/// probability simplex, a random acting party per round and a random local
/// projective basis at every reachable history. Deterministic in `seed`.
pub fn generate_random_scenario(seed: u64, spec: &GeneratorSpec) -> Result<ScenarioFile> {
    check_generator(spec)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (lo, hi) = spec.n_members.bounds();
    let n_members = rng.gen_range(lo..=hi);
    let (dlo, dhi) = spec.protocol_depth.bounds();
    let depth = rng.gen_range(dlo..=dhi);
    let [da, db] = spec.dims;

    let weights: Vec<f64> = (0..n_members).map(|_| rng.sample::<f64, _>(Exp1)).collect();
    let total: f64 = weights.iter().sum();
    let ensemble = weights
        .iter()
        .map(|w| MemberSpec {
            probability: w / total,
            pure: Some(vector_json(&gaussian_unit_vector(&mut rng, da * db))),
            matrix: None,
        })
        .collect();

    let parties: Vec<Party> = (0..depth)
        .map(|_| if rng.gen_bool(0.5) { Party::A } else { Party::B })
        .collect();
    let mut overrides = Vec::new();
    let mut histories: Vec<Vec<String>> = vec![Vec::new()];
    for party in parties {
        let d = if party == Party::A { da } else { db };
        let mut next = Vec::new();
        for h in histories {
            let v = gaussian_unit_vector(&mut rng, d);
            // qubit: the orthogonal complement of v is (−v₁*, v₀*)
            let w = vec![-v[1].conj(), v[0].conj()];
            overrides.push(OverrideSpec {
                history: h.clone(),
                party,
                instrument: InstrumentSpec::Projective(vec![vector_json(&v), vector_json(&w)]),
            });
            for label in ["0", "1"] {
                let mut h2 = h.clone();
                h2.push(label.to_string());
                next.push(h2);
            }
        }
        histories = next;
    }

    Ok(ScenarioFile {
        name: format!("random-{seed}"),
        kind: ScenarioKind::Protocol,
        dims: Some(spec.dims),
        ensemble,
        protocol: Some(ProtocolSpec {
            depth,
            steps: Vec::new(),
            overrides,
        }),
        bell_diagonal: None,
        generator: None,
        measures: MeasureSpec::default(),
        tolerances: Tolerances::default(),
    })
}
