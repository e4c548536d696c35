//! Distillation-yield bounds for protocols that distinguish the spectral
//! decomposition of many copies of a state.
//!
//! With `S = S(ρ)`, `S_A`, `S_B` the local entropies and `S̄_A` the mean
//! local entropy of the eigenvectors of `ρ`:
//!
//! - full distinguishing: `D_P ≤ S_A + S_B − S − S̄_A`;
//! - distinguishing a fraction `r = m₁/m` of the copies while consuming the
//!   rest: `r ≤ (S_A + S_B − S̄_A) / (S + S̄_A)` and `D_P′ ≤ r · S̄_A`.
//!
//! For Bell-diagonal states both reduce to closed forms in `log₂ d` and the
//! Shannon entropy of the Bell weights.

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::entropy::{entropy_bits, entropy_unchecked, is_ppt, shannon_entropy};
use crate::error::{Error, Result};
use crate::linalg::{
    c, canonical_basis, fix_phase, hermitian_eig, inner, partial_trace_matrix, CMatrix,
    DensityOperator, Party, C64,
};

/// Eigenvalues at or below this are left out of the spectral ensemble.
const DROP_EIGENVALUE: f64 = 1e-12;

/// Below this, `S + S̄_A` makes the `r` constraint vacuous.
const VACUOUS_DENOMINATOR: f64 = 1e-12;

/// The `d²` generalized Bell states `(I ⊗ X^a Z^b)|Φ_d⟩`, index `a·d + b`,
/// with `|Φ_d⟩ = Σ_j |jj⟩/√d`, `X|j⟩ = |j+1⟩` and `Z|j⟩ = ω^j |j⟩`.
///
/// For `d = 2` the order is `Φ+, Φ−, Ψ+, Ψ−`.
pub fn bell_states(d: usize) -> Vec<Vec<C64>> {
    let norm = 1.0 / (d as f64).sqrt();
    let omega = std::f64::consts::TAU / d as f64;
    let mut out = Vec::with_capacity(d * d);
    for a in 0..d {
        for b in 0..d {
            let mut v = vec![c(0.0, 0.0); d * d];
            for j in 0..d {
                let phase = C64::from_polar(norm, omega * ((b * j) % d) as f64);
                v[j * d + (j + a) % d] = phase;
            }
            out.push(v);
        }
    }
    out
}

/// Weights over the generalized Bell basis of `C^d ⊗ C^d`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BellDiagonalSpec {
    pub d: usize,
    pub probs: Vec<f64>,
}

impl BellDiagonalSpec {
    pub fn new(d: usize, probs: Vec<f64>) -> Result<Self> {
        let spec = BellDiagonalSpec { d, probs };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if self.d < 2 {
            return Err(Error::DimensionMismatch(format!("local dimension {} < 2", self.d)));
        }
        if self.probs.len() != self.d * self.d {
            return Err(Error::DimensionMismatch(format!(
                "{} weights for d = {}, expected {}",
                self.probs.len(),
                self.d,
                self.d * self.d
            )));
        }
        shannon_entropy(&self.probs).map(|_| ())
    }

    /// Shannon entropy of the weights, which is `S(ρ)`.
    pub fn entropy(&self) -> Result<f64> {
        shannon_entropy(&self.probs)
    }
}

/// `Σ_k probs[k] |B_k⟩⟨B_k|`.
pub fn bell_diagonal(spec: &BellDiagonalSpec) -> Result<DensityOperator> {
    spec.validate()?;
    let d = spec.d;
    let mut m = CMatrix::zeros(d * d, d * d);
    for (p, v) in spec.probs.iter().zip(bell_states(d)) {
        if *p > 0.0 {
            m = &m + &CMatrix::projector(&v).scale_re(*p);
        }
    }
    Ok(DensityOperator::from_matrix_unchecked(m, d, d))
}

/// Eigen-decomposition `{p_i, |ψ_i⟩}` of a state, zero eigenvalues dropped.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralEnsemble {
    pub dim_a: usize,
    pub dim_b: usize,
    pub members: Vec<(f64, Vec<C64>)>,
    /// Some eigen-gap among the kept eigenvalues is below the degeneracy gap,
    /// so `S̄_A` depends on the chosen basis.
    pub degenerate: bool,
}

/// Spectral ensemble of `rho`.
///
/// Degenerate clusters use the canonical basis from
/// [`hermitian_eig`](crate::linalg::hermitian_eig), except that when
/// `d_A = d_B` any generalized Bell state lying inside the cluster is taken
/// first. Bell-diagonal states therefore always decompose into Bell states.
pub fn spectral_ensemble(rho: &DensityOperator) -> Result<SpectralEnsemble> {
    let mut spectrum = hermitian_eig(rho.matrix(), f64::INFINITY)?;
    let (da, db) = rho.dims();
    let bells = (da == db).then(|| bell_states(da));

    let mut degenerate = false;
    for cluster in spectrum.clusters() {
        if cluster.len() < 2 {
            continue;
        }
        if spectrum.eigenvalues[cluster.start] > DROP_EIGENVALUE {
            degenerate = true;
        }
        let vectors = spectrum.eigenvectors[cluster.clone()].to_vec();
        let preferred: Vec<Vec<C64>> = bells
            .iter()
            .flatten()
            .filter(|b| {
                let weight: f64 = vectors.iter().map(|v| inner(v, b).norm_sqr()).sum();
                weight > 1.0 - 1e-8
            })
            .cloned()
            .collect();
        if preferred.is_empty() {
            continue;
        }
        for (slot, mut v) in cluster.zip(canonical_basis(&vectors, &preferred)) {
            fix_phase(&mut v);
            spectrum.eigenvectors[slot] = v;
        }
    }

    let kept: Vec<(f64, Vec<C64>)> = spectrum
        .eigenvalues
        .iter()
        .zip(spectrum.eigenvectors)
        .rev()
        .filter(|(l, _)| **l > DROP_EIGENVALUE)
        .map(|(l, v)| (*l, v))
        .collect();
    let total: f64 = kept.iter().map(|m| m.0).sum();
    Ok(SpectralEnsemble {
        dim_a: da,
        dim_b: db,
        members: kept.into_iter().map(|(l, v)| (l / total, v)).collect(),
        degenerate,
    })
}

fn local_entropy_of(psi: &[C64], da: usize, db: usize, party: Party) -> f64 {
    entropy_unchecked(&partial_trace_matrix(&CMatrix::projector(psi), da, db, party))
}

/// `S̄_A = Σ_i p_i S(tr_B |ψ_i⟩⟨ψ_i|)`; fails if the B-side value differs by
/// more than 1e-9.
pub fn mean_local_entropy(se: &SpectralEnsemble) -> Result<f64> {
    let side = |party| -> f64 {
        se.members
            .iter()
            .map(|(p, psi)| p * local_entropy_of(psi, se.dim_a, se.dim_b, party))
            .sum()
    };
    let (a, b) = (side(Party::A), side(Party::B));
    if (a - b).abs() > 1e-9 {
        return Err(Error::Inconsistent(format!("mean local entropy A = {a}, B = {b}")));
    }
    Ok(a)
}

/// The entropies every distillation bound is built from.
#[derive(Debug, Clone, Copy, PartialEq)]
struct Entropies {
    s: f64,
    s_a: f64,
    s_b: f64,
    s_bar: f64,
}

impl Entropies {
    fn of(rho: &DensityOperator, se: &SpectralEnsemble) -> Result<Self> {
        Ok(Entropies {
            s: entropy_bits(se.members.iter().map(|m| m.0)),
            s_a: entropy_unchecked(&rho.partial_trace(Party::A)),
            s_b: entropy_unchecked(&rho.partial_trace(Party::B)),
            s_bar: mean_local_entropy(se)?,
        })
    }

    fn dp(&self) -> f64 {
        self.s_a + self.s_b - self.s - self.s_bar
    }

    /// `(bound, r_max)`, both `+∞` when the constraint is vacuous.
    fn dpprime(&self) -> (f64, f64) {
        let denom = self.s + self.s_bar;
        if denom < VACUOUS_DENOMINATOR {
            return (f64::INFINITY, f64::INFINITY);
        }
        let r = (self.s_a + self.s_b - self.s_bar) / denom;
        (r * self.s_bar, r)
    }
}

/// `D_P ≤ S_A + S_B − S − S̄_A`, raw (may be negative).
pub fn dp_bound(rho: &DensityOperator) -> Result<f64> {
    Ok(Entropies::of(rho, &spectral_ensemble(rho)?)?.dp())
}

/// `(D_P′ bound, r_max)`; `+∞` sentinels when `S + S̄_A` vanishes.
pub fn dpprime_bound(rho: &DensityOperator) -> Result<(f64, f64)> {
    Ok(Entropies::of(rho, &spectral_ensemble(rho)?)?.dpprime())
}

/// `(log₂ d − H(probs), max(0, ·))`.
pub fn dp_bound_bell(spec: &BellDiagonalSpec) -> Result<(f64, f64)> {
    let raw = (spec.d as f64).log2() - spec.entropy()?;
    Ok((raw, raw.max(0.0)))
}

/// `(log₂ d)² / (log₂ d + H(probs))`.
pub fn dpprime_bound_bell(spec: &BellDiagonalSpec) -> Result<f64> {
    let l = (spec.d as f64).log2();
    Ok(l * l / (l + spec.entropy()?))
}

/// Serializes non-finite bounds as the string `"+inf"`.
pub mod sentinel {
    use super::*;

    pub fn serialize<S: Serializer>(v: &f64, s: S) -> std::result::Result<S::Ok, S::Error> {
        if v.is_infinite() && *v > 0.0 {
            s.serialize_str("+inf")
        } else {
            s.serialize_f64(*v)
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<f64, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Num(f64),
            Str(String),
        }
        match Raw::deserialize(d)? {
            Raw::Num(x) => Ok(x),
            Raw::Str(s) if s == "+inf" => Ok(f64::INFINITY),
            Raw::Str(s) => Err(serde::de::Error::custom(format!("unexpected bound `{s}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BellClosedForms {
    /// `log₂ d − S`.
    #[serde(rename = "D_P")]
    pub dp: f64,
    /// `(log₂ d)² / (log₂ d + S)`.
    #[serde(rename = "D_Pprime")]
    pub dpprime: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DistillationReport {
    #[serde(rename = "S")]
    pub s: f64,
    #[serde(rename = "S_A")]
    pub s_a: f64,
    #[serde(rename = "S_B")]
    pub s_b: f64,
    #[serde(rename = "S_bar_A")]
    pub s_bar_a: f64,
    /// Raw `S_A + S_B − S − S̄_A`.
    #[serde(rename = "D_P_bound")]
    pub dp_bound: f64,
    #[serde(rename = "D_Pprime_bound", with = "sentinel")]
    pub dpprime_bound: f64,
    #[serde(with = "sentinel")]
    pub r_max: f64,
    pub bell_diagonal_closed_forms: Option<BellClosedForms>,
    /// Yield of a protocol that reveals all errors, clamped at zero.
    pub hashing_yield: f64,
    pub hashing_yield_raw: f64,
    pub ppt: bool,
    pub min_pt_eigenvalue: f64,
    pub degenerate_spectrum: bool,
}

/// Full distillation report for `rho`; pass `bell` when `rho` was built from
/// a Bell-diagonal spec to get the closed forms alongside.
pub fn distillation_report(rho: &DensityOperator, bell: Option<&BellDiagonalSpec>) -> Result<DistillationReport> {
    let se = spectral_ensemble(rho)?;
    let e = Entropies::of(rho, &se)?;
    let (dpprime, r_max) = e.dpprime();
    let closed = bell
        .map(|spec| -> Result<BellClosedForms> {
            Ok(BellClosedForms {
                dp: dp_bound_bell(spec)?.0,
                dpprime: dpprime_bound_bell(spec)?,
            })
        })
        .transpose()?;
    let hashing_raw = closed.as_ref().map_or(e.dp(), |c| c.dp);
    let (ppt, min_pt) = is_ppt(rho);
    Ok(DistillationReport {
        s: e.s,
        s_a: e.s_a,
        s_b: e.s_b,
        s_bar_a: e.s_bar,
        dp_bound: e.dp(),
        dpprime_bound: dpprime,
        r_max,
        bell_diagonal_closed_forms: closed,
        hashing_yield: hashing_raw.max(0.0),
        hashing_yield_raw: hashing_raw,
        ppt,
        min_pt_eigenvalue: min_pt,
        degenerate_spectrum: se.degenerate,
    })
}
