//! Numerical workbench for bipartite quantum ensembles.
//!
//! The crate simulates multi-round local measurement protocols with
//! classical communication (LOCC), computes the mutual information they
//! extract, and checks it against Holevo-type upper bounds built from local
//! entropies and input/output entanglement. It also evaluates
//! distillation-yield bounds for protocols that work by distinguishing the
//! spectral decomposition of many copies of a state, with closed forms for
//! Bell-diagonal states.
//!
//! Module map:
//! - [`linalg`]: dense complex matrices, density operators, partial trace and
//!   transpose, Hermitian eigendecomposition.
//! - [`entropy`]: Shannon and von Neumann entropies, Holevo quantities,
//!   entanglement measures, PPT test.
//! - [`protocol`]: Kraus instruments, outcome trees, chain-rule mutual
//!   information, the bound suite and per-round audits.
//! - [`distill`]: spectral ensembles, Bell-diagonal states and distillation
//!   yield bounds.
//! - [`scenario`] and [`runner`]: JSON scenario files, random scenario
//!   generation and report emission for the command-line tool.

pub mod distill;
pub mod entropy;
pub mod error;
pub mod linalg;
pub mod protocol;
pub mod runner;
pub mod scenario;

pub use distill::{
    bell_diagonal, bell_states, dp_bound, dp_bound_bell, dpprime_bound, dpprime_bound_bell,
    distillation_report, mean_local_entropy, spectral_ensemble, BellDiagonalSpec,
    DistillationReport, SpectralEnsemble,
};
pub use entropy::{
    concurrence, entanglement, holevo_chi, is_ppt, shannon_entropy, von_neumann_entropy,
    BipartiteEnsemble, Ensemble, MarginalEnsemble, MeasureSelector,
};
pub use error::{Error, Result};
pub use linalg::{
    hermitian_eig, partial_trace, partial_transpose, partial_transpose_matrix, validate_density, CMatrix, DensityOperator,
    HermitianSpectrum, Party, C64,
};
pub use protocol::{
    audit_rounds, average_input_entanglement, average_output_entanglement, bound_suite,
    chain_mutual_information, measure_branch, run_protocol, AdaptiveSchedule, Branch,
    BoundReport, InstrumentChooser, KrausInstrument, ProtocolTranscript, RoundAudit,
    TranscriptNode,
};
pub use runner::{run_scenario, Check, Command, RunOptions, RunReport, TrialReport};
pub use scenario::{generate_random_scenario, GeneratorSpec, Resolved, ScenarioFile, ScenarioKind};
