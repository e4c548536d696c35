//! Entropies, Holevo quantities and the entanglement measures used for the
//! input and output entanglement terms. All logarithms are base 2.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{
    c, hermitian_eig, hermitian_eigenvalues, partial_trace_matrix, partial_transpose, CMatrix,
    DensityOperator, Party, DEFAULT_TOL,
};

/// Eigenvalues (and probabilities) below this count as exact zeros inside
/// entropy sums.
pub const ZERO_CUTOFF: f64 = 1e-12;

/// A state counts as pure when `tr ρ² ≥ 1 − PURITY_TOL`.
pub const PURITY_TOL: f64 = 1e-9;

/// Minimum partial-transpose eigenvalue still classified as PPT.
pub const PPT_TOL: f64 = 1e-9;

/// `−Σ p log₂ p` without validation; entries below [`ZERO_CUTOFF`] are skipped.
pub(crate) fn entropy_bits(p: impl IntoIterator<Item = f64>) -> f64 {
    let h: f64 = p
        .into_iter()
        .filter(|&x| x > ZERO_CUTOFF)
        .map(|x| -x * x.log2())
        .sum();
    h.max(0.0)
}

fn check_distribution(p: &[f64]) -> Result<()> {
    if p.is_empty() {
        return Err(Error::InvalidProbabilities("empty distribution".into()));
    }
    if let Some(x) = p.iter().find(|x| x.is_nan() || **x < 0.0) {
        return Err(Error::InvalidProbabilities(format!("negative or NaN entry {x}")));
    }
    let sum: f64 = p.iter().sum();
    if (sum - 1.0).abs() > DEFAULT_TOL {
        return Err(Error::InvalidProbabilities(format!("entries sum to {sum}")));
    }
    Ok(())
}

/// Shannon entropy in bits, with `0·log₂0 = 0`.
pub fn shannon_entropy(p: &[f64]) -> Result<f64> {
    check_distribution(p)?;
    Ok(entropy_bits(p.iter().copied()))
}

/// Entropy of a Hermitian matrix known to be a state up to rounding.
pub(crate) fn entropy_unchecked(m: &CMatrix) -> f64 {
    let vals = hermitian_eigenvalues(&m.hermitian_part(), f64::INFINITY)
        .expect("Hermitian part is Hermitian");
    entropy_bits(vals)
}

/// von Neumann entropy `S(ρ) = −tr ρ log₂ ρ` of a density operator or of a
/// reduced (single-party) density matrix.
pub fn von_neumann_entropy<M: AsRef<CMatrix> + ?Sized>(rho: &M) -> Result<f64> {
    let m = rho.as_ref();
    let vals = hermitian_eigenvalues(m, DEFAULT_TOL)?;
    let tr_dev = (m.trace() - c(1.0, 0.0)).norm();
    if tr_dev > DEFAULT_TOL {
        return Err(Error::TraceDeviation(tr_dev));
    }
    if vals[0] < -DEFAULT_TOL {
        return Err(Error::NegativeEigenvalue(vals[0]));
    }
    Ok(entropy_bits(vals))
}

/// Anything that can be read as a list of weighted states.
pub trait Ensemble {
    fn weighted_states(&self) -> Vec<(f64, &CMatrix)>;
}

fn average_of(states: &[(f64, &CMatrix)]) -> CMatrix {
    let n = states[0].1.rows();
    states
        .iter()
        .fold(CMatrix::zeros(n, n), |acc, (p, m)| &acc + &m.scale_re(*p))
}

/// Holevo quantity `χ = S(Σ p_x ρ_x) − Σ p_x S(ρ_x)`.
pub fn holevo_chi<E: Ensemble + ?Sized>(ens: &E) -> Result<f64> {
    let states = ens.weighted_states();
    if states.is_empty() {
        return Err(Error::InvalidEnsemble("no members".into()));
    }
    let avg = average_of(&states);
    let mean: f64 = states
        .iter()
        .filter(|(p, _)| *p > 0.0)
        .map(|(p, m)| p * entropy_unchecked(m))
        .sum();
    Ok(entropy_unchecked(&avg) - mean)
}

fn validate_probabilities(p: &[f64]) -> Result<()> {
    check_distribution(p).map_err(|e| match e {
        Error::InvalidProbabilities(msg) => Error::InvalidEnsemble(msg),
        other => other,
    })
}

/// Weighted list `{p_x, ρ_x^{AB}}` sharing one pair of dimensions.
#[derive(Debug, Clone, PartialEq)]
pub struct BipartiteEnsemble {
    dim_a: usize,
    dim_b: usize,
    members: Vec<(f64, DensityOperator)>,
}

impl BipartiteEnsemble {
    pub fn new(members: Vec<(f64, DensityOperator)>) -> Result<Self> {
        let first = members
            .first()
            .ok_or_else(|| Error::InvalidEnsemble("no members".into()))?;
        let dims = first.1.dims();
        if let Some((i, _)) = members.iter().enumerate().find(|(_, m)| m.1.dims() != dims) {
            return Err(Error::InvalidEnsemble(format!(
                "member {i} has dims {:?}, expected {dims:?}",
                members[i].1.dims()
            )));
        }
        let probs: Vec<f64> = members.iter().map(|m| m.0).collect();
        validate_probabilities(&probs)?;
        Ok(BipartiteEnsemble {
            dim_a: dims.0,
            dim_b: dims.1,
            members,
        })
    }

    pub(crate) fn from_parts_unchecked(dim_a: usize, dim_b: usize, members: Vec<(f64, DensityOperator)>) -> Self {
        BipartiteEnsemble {
            dim_a,
            dim_b,
            members,
        }
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.dim_a, self.dim_b)
    }

    pub fn dim_of(&self, party: Party) -> usize {
        match party {
            Party::A => self.dim_a,
            Party::B => self.dim_b,
        }
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn members(&self) -> &[(f64, DensityOperator)] {
        &self.members
    }

    pub fn probabilities(&self) -> Vec<f64> {
        self.members.iter().map(|m| m.0).collect()
    }

    /// `Σ_x p_x ρ_x`.
    pub fn average_state(&self) -> DensityOperator {
        let states: Vec<(f64, &CMatrix)> = self.members.iter().map(|(p, r)| (*p, r.matrix())).collect();
        DensityOperator::from_matrix_unchecked(average_of(&states), self.dim_a, self.dim_b)
    }

    /// `{p_x, tr_{other}(ρ_x)}`.
    pub fn marginal(&self, party: Party) -> MarginalEnsemble {
        MarginalEnsemble {
            members: self
                .members
                .iter()
                .map(|(p, r)| (*p, partial_trace_matrix(r.matrix(), self.dim_a, self.dim_b, party)))
                .collect(),
        }
    }

    /// `Σ_x p_x S(ρ_x^Z)`.
    pub fn mean_member_entropy(&self, party: Party) -> f64 {
        self.members
            .iter()
            .filter(|(p, _)| *p > 0.0)
            .map(|(p, r)| p * entropy_unchecked(&partial_trace_matrix(r.matrix(), self.dim_a, self.dim_b, party)))
            .sum()
    }

    /// `S(tr_{other} Σ_x p_x ρ_x)`.
    pub fn average_marginal_entropy(&self, party: Party) -> f64 {
        entropy_unchecked(&self.average_state().partial_trace(party))
    }
}

impl Ensemble for BipartiteEnsemble {
    fn weighted_states(&self) -> Vec<(f64, &CMatrix)> {
        self.members.iter().map(|(p, r)| (*p, r.matrix())).collect()
    }
}

/// Single-party ensemble, e.g. one side of a [`BipartiteEnsemble`].
#[derive(Debug, Clone, PartialEq)]
pub struct MarginalEnsemble {
    members: Vec<(f64, CMatrix)>,
}

impl MarginalEnsemble {
    pub fn new(members: Vec<(f64, CMatrix)>) -> Result<Self> {
        let n = members
            .first()
            .map(|m| m.1.rows())
            .ok_or_else(|| Error::InvalidEnsemble("no members".into()))?;
        for (i, (_, m)) in members.iter().enumerate() {
            if !m.is_square() || m.rows() != n {
                return Err(Error::InvalidEnsemble(format!("member {i} has mismatched shape")));
            }
            crate::linalg::validate_density(m.clone(), n, 1, DEFAULT_TOL)?;
        }
        let probs: Vec<f64> = members.iter().map(|m| m.0).collect();
        validate_probabilities(&probs)?;
        Ok(MarginalEnsemble { members })
    }

    pub fn members(&self) -> &[(f64, CMatrix)] {
        &self.members
    }

    pub fn average(&self) -> CMatrix {
        let states: Vec<(f64, &CMatrix)> = self.members.iter().map(|(p, m)| (*p, m)).collect();
        average_of(&states)
    }
}

impl Ensemble for MarginalEnsemble {
    fn weighted_states(&self) -> Vec<(f64, &CMatrix)> {
        self.members.iter().map(|(p, m)| (*p, m)).collect()
    }
}

/// Which entanglement measure stands in for `E` / `𝓔`.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MeasureSelector {
    /// `S(tr_B ρ)`, pure states only.
    EntropyOfEntanglementPure,
    /// Wootters entanglement of formation, `2 ⊗ 2` only.
    EofTwoQubit,
    /// Pure states use the entropy of entanglement, mixed `2 ⊗ 2` states the
    /// entanglement of formation; anything else is unavailable.
    #[default]
    Auto,
}

pub fn is_pure(rho: &DensityOperator) -> bool {
    rho.purity() >= 1.0 - PURITY_TOL
}

fn sqrt_psd(m: &CMatrix) -> CMatrix {
    let s = hermitian_eig(&m.hermitian_part(), f64::INFINITY).expect("Hermitian part is Hermitian");
    let n = s.dim();
    let mut out = CMatrix::zeros(n, n);
    for (lambda, v) in s.eigenvalues.iter().zip(&s.eigenvectors) {
        let r = lambda.max(0.0).sqrt();
        for i in 0..n {
            for j in 0..n {
                out[(i, j)] += v[i] * v[j].conj() * r;
            }
        }
    }
    out
}

/// Two-qubit concurrence `max(0, λ₁−λ₂−λ₃−λ₄)` where `λ_i` are the
/// decreasing square roots of the eigenvalues of `√ρ ρ̃ √ρ` and
/// `ρ̃ = (σ_y⊗σ_y) ρ* (σ_y⊗σ_y)` in the computational basis.
pub fn concurrence(rho: &DensityOperator) -> Result<f64> {
    if rho.dims() != (2, 2) {
        return Err(Error::MeasureUnavailable(format!(
            "concurrence needs a 2x2 system, got {:?}",
            rho.dims()
        )));
    }
    let sy = CMatrix::from_rows(&[vec![c(0.0, 0.0), c(0.0, -1.0)], vec![c(0.0, 1.0), c(0.0, 0.0)]])
        .expect("2x2");
    let yy = sy.kron(&sy);
    let flipped = &(&yy * &rho.matrix().conj()) * &yy;
    let root = sqrt_psd(rho.matrix());
    let r = &(&root * &flipped) * &root;
    let mut lambdas: Vec<f64> = hermitian_eigenvalues(&r.hermitian_part(), f64::INFINITY)
        .expect("Hermitian part is Hermitian")
        .into_iter()
        .map(|mu| mu.max(0.0).sqrt())
        .collect();
    lambdas.sort_by(|a, b| b.total_cmp(a));
    let c = lambdas[0] - lambdas[1] - lambdas[2] - lambdas[3];
    Ok(c.clamp(0.0, 1.0))
}

/// `h((1 + √(1 − C²)) / 2)`.
pub fn eof_from_concurrence(conc: f64) -> f64 {
    let conc = conc.clamp(0.0, 1.0);
    let x = (1.0 + (1.0 - conc * conc).max(0.0).sqrt()) / 2.0;
    entropy_bits([x, 1.0 - x])
}

/// Entanglement of `rho` in bits under the chosen measure.
pub fn entanglement(rho: &DensityOperator, selector: MeasureSelector) -> Result<f64> {
    let (da, db) = rho.dims();
    let cap = (da.min(db) as f64).log2();
    let pure = is_pure(rho);
    let value = match selector {
        MeasureSelector::EntropyOfEntanglementPure => {
            if !pure {
                return Err(Error::MeasureUnavailable(format!(
                    "entropy of entanglement needs a pure state (purity {})",
                    rho.purity()
                )));
            }
            entropy_unchecked(&rho.partial_trace(Party::A))
        }
        MeasureSelector::EofTwoQubit => eof_from_concurrence(concurrence(rho)?),
        MeasureSelector::Auto => {
            if pure {
                entropy_unchecked(&rho.partial_trace(Party::A))
            } else if (da, db) == (2, 2) {
                eof_from_concurrence(concurrence(rho)?)
            } else {
                return Err(Error::MeasureUnavailable(format!(
                    "no measure for a mixed state with dims ({da}, {db})"
                )));
            }
        }
    };
    Ok(value.clamp(0.0, cap))
}

/// PPT classification against `partial_transpose(ρ, B)`; returns the flag
/// and the minimum eigenvalue of the partial transpose.
pub fn is_ppt(rho: &DensityOperator) -> (bool, f64) {
    let pt = partial_transpose(rho, Party::B);
    let min = hermitian_eigenvalues(&pt, f64::INFINITY).expect("partial transpose is Hermitian")[0];
    (min >= -PPT_TOL, min)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{validate_density, C64};
    use approx::assert_abs_diff_eq;

    fn ket(v: &[f64]) -> Vec<C64> {
        v.iter().map(|&x| c(x, 0.0)).collect()
    }

    fn bell(kind: &str) -> DensityOperator {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let v = match kind {
            "phi+" => ket(&[s, 0.0, 0.0, s]),
            "phi-" => ket(&[s, 0.0, 0.0, -s]),
            "psi+" => ket(&[0.0, s, s, 0.0]),
            _ => ket(&[0.0, s, -s, 0.0]),
        };
        DensityOperator::pure(&v, 2, 2).unwrap()
    }

    #[test]
    fn shannon_values() {
        assert_abs_diff_eq!(shannon_entropy(&[0.5, 0.5]).unwrap(), 1.0, epsilon = 1e-15);
        assert_eq!(shannon_entropy(&[1.0, 0.0]).unwrap(), 0.0);
        // oracle: -0.9 log2 0.9 - 0.1 log2 0.1
        let direct = -(0.9f64 * 0.9f64.log2()) - 0.1 * 0.1f64.log2();
        assert_abs_diff_eq!(shannon_entropy(&[0.9, 0.1]).unwrap(), direct, epsilon = 1e-15);
        assert_abs_diff_eq!(direct, 0.4690, epsilon = 1e-4);
    }

    #[test]
    fn shannon_rejects_bad_input() {
        assert!(shannon_entropy(&[1.2, -0.2]).is_err());
        assert!(shannon_entropy(&[0.5, 0.4]).is_err());
    }

    #[test]
    fn von_neumann_values() {
        let half = CMatrix::from_diagonal(&[0.5, 0.5]);
        assert_abs_diff_eq!(von_neumann_entropy(&half).unwrap(), 1.0, epsilon = 1e-14);
        assert_abs_diff_eq!(von_neumann_entropy(&bell("psi-")).unwrap(), 0.0, epsilon = 1e-12);
        let spectrum = [0.7, 0.1, 0.1, 0.1];
        let oracle: f64 = spectrum.iter().map(|p: &f64| -p * p.log2()).sum();
        let m = &(&bell("phi+").matrix().scale_re(0.7) + &bell("phi-").matrix().scale_re(0.1))
            + &(&bell("psi+").matrix().scale_re(0.1) + &bell("psi-").matrix().scale_re(0.1));
        assert_abs_diff_eq!(von_neumann_entropy(&m).unwrap(), oracle, epsilon = 1e-12);
        assert_abs_diff_eq!(oracle, 1.3568, epsilon = 1e-4);
    }

    #[test]
    fn von_neumann_rejects_invalid() {
        assert!(von_neumann_entropy(&CMatrix::from_diagonal(&[0.5, 0.2])).is_err());
        assert!(von_neumann_entropy(&CMatrix::from_diagonal(&[1.5, -0.5])).is_err());
    }

    #[test]
    fn holevo_examples() {
        let zero = CMatrix::from_diagonal(&[1.0, 0.0]);
        let one = CMatrix::from_diagonal(&[0.0, 1.0]);
        let ens = MarginalEnsemble::new(vec![(0.5, zero.clone()), (0.5, one)]).unwrap();
        assert_abs_diff_eq!(holevo_chi(&ens).unwrap(), 1.0, epsilon = 1e-14);

        let same = MarginalEnsemble::new(vec![(0.3, zero.clone()), (0.7, zero.clone())]).unwrap();
        assert_abs_diff_eq!(holevo_chi(&same).unwrap(), 0.0, epsilon = 1e-14);

        let s = std::f64::consts::FRAC_1_SQRT_2;
        let plus = CMatrix::projector(&ket(&[s, s]));
        let ens = MarginalEnsemble::new(vec![(0.5, zero), (0.5, plus)]).unwrap();
        // oracle: eigenvalues of the average are (1 ± 1/√2)/2
        let l1 = (1.0 + s) / 2.0;
        let oracle = -(l1 * l1.log2()) - (1.0 - l1) * (1.0 - l1).log2();
        assert_abs_diff_eq!(holevo_chi(&ens).unwrap(), oracle, epsilon = 1e-12);
        assert_abs_diff_eq!(oracle, 0.6008, epsilon = 1e-4);
    }

    #[test]
    fn ensemble_rejects_bad_probabilities_and_dims() {
        let a = bell("phi+");
        assert!(BipartiteEnsemble::new(vec![(0.5, a.clone()), (0.6, a.clone())]).is_err());
        assert!(BipartiteEnsemble::new(vec![]).is_err());
        let q = DensityOperator::maximally_mixed(2, 1);
        assert!(BipartiteEnsemble::new(vec![(0.5, a), (0.5, q)]).is_err());
    }

    #[test]
    fn entanglement_examples() {
        assert_abs_diff_eq!(entanglement(&bell("phi+"), MeasureSelector::Auto).unwrap(), 1.0, epsilon = 1e-12);
        let prod = DensityOperator::pure(&ket(&[0.6, 0.8, 0.0, 0.0]), 2, 2).unwrap();
        assert_abs_diff_eq!(entanglement(&prod, MeasureSelector::Auto).unwrap(), 0.0, epsilon = 1e-12);

        let werner = &bell("psi-").matrix().scale_re(0.5) + &CMatrix::identity(4).scale_re(0.125);
        let werner = validate_density(werner, 2, 2, 1e-9).unwrap();
        assert_abs_diff_eq!(concurrence(&werner).unwrap(), 0.25, epsilon = 1e-12);
        let eof = entanglement(&werner, MeasureSelector::Auto).unwrap();
        assert_abs_diff_eq!(eof, 0.1176, epsilon = 1e-3);
        assert_abs_diff_eq!(eof, eof_from_concurrence(0.25), epsilon = 1e-12);
    }

    #[test]
    fn measure_availability() {
        let mixed3 = DensityOperator::maximally_mixed(3, 2);
        assert!(matches!(
            entanglement(&mixed3, MeasureSelector::Auto),
            Err(Error::MeasureUnavailable(_))
        ));
        assert!(matches!(
            entanglement(&mixed3, MeasureSelector::EofTwoQubit),
            Err(Error::MeasureUnavailable(_))
        ));
        let mixed2 = DensityOperator::maximally_mixed(2, 2);
        assert!(matches!(
            entanglement(&mixed2, MeasureSelector::EntropyOfEntanglementPure),
            Err(Error::MeasureUnavailable(_))
        ));
        // pure states of any dims are fine
        let s = 1.0 / 3f64.sqrt();
        let max3 = DensityOperator::pure(&ket(&[s, 0.0, 0.0, 0.0, s, 0.0, 0.0, 0.0, s]), 3, 3).unwrap();
        assert_abs_diff_eq!(
            entanglement(&max3, MeasureSelector::Auto).unwrap(),
            3f64.log2(),
            epsilon = 1e-12
        );
    }

    #[test]
    fn ppt_examples() {
        let (ppt, min) = is_ppt(&bell("phi+"));
        assert!(!ppt);
        assert_abs_diff_eq!(min, -0.5, epsilon = 1e-12);
        let (ppt, min) = is_ppt(&DensityOperator::maximally_mixed(2, 2));
        assert!(ppt);
        assert_abs_diff_eq!(min, 0.25, epsilon = 1e-14);
        let cl = validate_density(CMatrix::from_diagonal(&[0.5, 0.0, 0.0, 0.5]), 2, 2, 1e-9).unwrap();
        let (ppt, min) = is_ppt(&cl);
        assert!(ppt);
        assert_abs_diff_eq!(min, 0.0, epsilon = 1e-14);
    }
}
