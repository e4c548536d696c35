#![allow(dead_code)]

use std::path::PathBuf;

use locc_bounds::scenario::{CountRange, GeneratorSpec, InstrumentFamily};
use locc_bounds::{run_scenario, Command, RunOptions, ScenarioFile};

pub struct GoldenCase {
    pub scenario: &'static str,
    pub command: &'static str,
    pub seed: u64,
    pub trials: usize,
}

impl GoldenCase {
    pub fn golden_name(&self) -> String {
        format!(
            "{}.{}.seed{}.trials{}.json",
            self.scenario.trim_end_matches(".json"),
            self.command,
            self.seed,
            self.trials
        )
    }

    pub fn args(&self) -> Vec<String> {
        vec![
            self.command.to_string(),
            scenario_path(self.scenario).display().to_string(),
            "--seed".into(),
            self.seed.to_string(),
            "--trials".into(),
            self.trials.to_string(),
            "--format".into(),
            "json".into(),
        ]
    }

    pub fn render(&self) -> String {
        let text = std::fs::read_to_string(scenario_path(self.scenario)).unwrap();
        let scenario = ScenarioFile::parse(&text).unwrap();
        let opts = RunOptions {
            seed: self.seed,
            trials: self.trials,
            tol: None,
        };
        run_scenario(&scenario, self.command.parse::<Command>().unwrap(), &opts)
            .unwrap()
            .to_json()
    }
}

pub const GOLDEN_CASES: &[GoldenCase] = &[
    GoldenCase { scenario: "phi_pm_x_then_x.json", command: "bounds-verify", seed: 0, trials: 1 },
    GoldenCase { scenario: "phi_pm_x_then_x.json", command: "protocol-run", seed: 0, trials: 1 },
    GoldenCase { scenario: "four_bell.json", command: "bounds-verify", seed: 0, trials: 1 },
    GoldenCase { scenario: "four_bell.json", command: "entropy", seed: 0, trials: 1 },
    GoldenCase { scenario: "bell_diagonal_0.9.json", command: "bounds-verify", seed: 0, trials: 1 },
    GoldenCase { scenario: "bell_diagonal_0.9.json", command: "distill-report", seed: 0, trials: 1 },
    GoldenCase { scenario: "maximally_mixed.json", command: "distill-report", seed: 0, trials: 1 },
    GoldenCase { scenario: "maximally_mixed.json", command: "entropy", seed: 0, trials: 1 },
    GoldenCase { scenario: "random_sweep.json", command: "bounds-verify", seed: 0, trials: 4 },
];

pub fn crate_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
}

pub fn scenario_path(name: &str) -> PathBuf {
    crate_dir().join("scenarios").join(name)
}

pub fn golden_path(case: &GoldenCase) -> PathBuf {
    crate_dir().join("tests").join("golden").join(case.golden_name())
}

/// The generator used by the randomized suites.
pub fn sweep_spec() -> GeneratorSpec {
    GeneratorSpec {
        n_members: CountRange::Range([2, 4]),
        dims: [2, 2],
        protocol_depth: CountRange::Range([1, 3]),
        instrument_family: InstrumentFamily::ProjectiveRandomBasis,
    }
}
