//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any
//! failure. Reference values come from oracles written here, independent of
//! the library code paths they check.

mod common;

use std::process::Command as Process;
use std::time::Instant;

use locc_bounds::distill::{dp_bound, dpprime_bound, dpprime_bound_bell};
use locc_bounds::entropy::MeasureSelector;
use locc_bounds::protocol::ProtocolTranscript;
use locc_bounds::scenario::Resolved;
use locc_bounds::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

// ---- oracles ----

fn shannon_bits(p: &[f64]) -> f64 {
    p.iter().filter(|&&x| x > 0.0).map(|&x| -x * x.log2()).sum()
}

fn binary_entropy(x: f64) -> f64 {
    shannon_bits(&[x, 1.0 - x])
}

/// Entropy of entanglement of a two-qubit pure state from the 2×2
/// coefficient matrix `M`: Schmidt weights are the eigenvalues of `M M†`,
/// i.e. `(1 ± √(1 − 4|det M|²)) / 2` for a normalized state.
fn pure_state_entanglement_oracle(psi: &[C64]) -> f64 {
    let norm: f64 = psi.iter().map(|z| z.norm_sqr()).sum();
    let det = (psi[0] * psi[3] - psi[1] * psi[2]).norm_sqr() / (norm * norm);
    let disc = (1.0 - 4.0 * det).max(0.0).sqrt();
    binary_entropy((1.0 + disc) / 2.0)
}

/// Flat `I(X; leaf)` from the leaf posteriors.
fn flat_information_oracle(t: &ProtocolTranscript) -> f64 {
    let leaves = t.leaves();
    let n_x = t.root().ensemble.len();
    let mut px = vec![0.0; n_x];
    let mut py = Vec::new();
    let mut joint = Vec::new();
    for leaf in leaves {
        py.push(leaf.probability);
        for (x, (p, _)) in leaf.ensemble.members().iter().enumerate() {
            px[x] += leaf.probability * p;
            joint.push(leaf.probability * p);
        }
    }
    shannon_bits(&px) + shannon_bits(&py) - shannon_bits(&joint)
}

fn random_unit(rng: &mut ChaCha8Rng, n: usize) -> Vec<C64> {
    let v: Vec<C64> = (0..n)
        .map(|_| C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
        .collect();
    let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    v.into_iter().map(|z| z / norm).collect()
}

fn random_simplex(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    let w: Vec<f64> = (0..n).map(|_| -rng.gen_range(1e-12f64..1.0).ln()).collect();
    let s: f64 = w.iter().sum();
    w.into_iter().map(|x| x / s).collect()
}

/// Orthonormalizes the columns of an `n × n` complex matrix (row-major).
fn gram_schmidt_columns(g: &[C64], n: usize) -> Vec<C64> {
    let mut q = g.to_vec();
    for j in 0..n {
        for k in 0..j {
            let dot: C64 = (0..n).map(|i| q[i * n + k].conj() * q[i * n + j]).sum();
            for i in 0..n {
                let sub = dot * q[i * n + k];
                q[i * n + j] -= sub;
            }
        }
        let norm = (0..n).map(|i| q[i * n + j].norm_sqr()).sum::<f64>().sqrt();
        for i in 0..n {
            q[i * n + j] /= norm;
        }
    }
    q
}

/// Convex-roof search for the entanglement of formation of a two-qubit
/// state given as `Σ_j λ_j |e_j⟩⟨e_j|`. Every pure-state decomposition into
/// four terms is `|ψ_i⟩ = Σ_j U_ij √λ_j |e_j⟩` for a unitary `U`; the search
/// draws random unitaries and hill-climbs on the average entanglement.
fn convex_roof_oracle(eigen: &[(f64, Vec<C64>)], rng: &mut ChaCha8Rng) -> f64 {
    let n = eigen.len();
    let average = |u: &[C64]| -> f64 {
        (0..n)
            .map(|i| {
                let psi: Vec<C64> = (0..4)
                    .map(|k| (0..n).map(|j| u[i * n + j] * eigen[j].0.sqrt() * eigen[j].1[k]).sum())
                    .collect();
                let weight: f64 = psi.iter().map(|z| z.norm_sqr()).sum();
                if weight < 1e-15 {
                    0.0
                } else {
                    weight * pure_state_entanglement_oracle(&psi)
                }
            })
            .sum()
    };
    let mut best = f64::INFINITY;
    for _restart in 0..12 {
        let mut g: Vec<C64> = (0..n * n)
            .map(|_| C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
            .collect();
        let mut current = average(&gram_schmidt_columns(&g, n));
        let mut step = 0.3;
        for _ in 0..4000 {
            let trial: Vec<C64> = g
                .iter()
                .map(|z| z + C64::new(rng.gen_range(-step..step), rng.gen_range(-step..step)))
                .collect();
            let value = average(&gram_schmidt_columns(&trial, n));
            if value < current {
                current = value;
                g = trial;
            } else {
                step = (step * 0.997).max(1e-4);
            }
        }
        best = best.min(current);
    }
    best
}

// ---- criteria ----

fn random_protocols() -> Vec<ProtocolTranscript> {
    (0..200u64)
        .map(|seed| {
            let scenario = generate_random_scenario(seed, &common::sweep_spec()).expect("generator");
            let Resolved::Protocol { ensemble, schedule, depth } = scenario.resolve().expect("resolve") else {
                unreachable!("generator emits protocol scenarios")
            };
            run_protocol(&ensemble, &schedule, depth).expect("protocol runs")
        })
        .collect()
}

fn criterion_1(transcripts: &[ProtocolTranscript]) -> Outcome {
    let start = Instant::now();
    let mut min_bound = f64::INFINITY;
    let mut min_lemma = f64::INFINITY;
    let mut min_fact = f64::INFINITY;
    let mut counts = (0usize, 0usize);
    for t in transcripts {
        let members = t.root().ensemble.len();
        if !(2..=4).contains(&members) || !(1..=3).contains(&t.depth()) {
            return outcome(false, format!("generator out of range: {members} members, depth {}", t.depth()));
        }
        let report = match bound_suite(t, MeasureSelector::Auto, MeasureSelector::Auto) {
            Ok(r) => r,
            Err(e) => return outcome(false, format!("bound suite failed: {e}")),
        };
        let bounds = report.bounds();
        counts.0 += bounds.len();
        for (_, _, slack) in bounds {
            min_bound = min_bound.min(slack);
        }
        for a in audit_rounds(t).expect("audit") {
            counts.1 += 1;
            min_lemma = min_lemma.min(a.lemma1_slack);
            min_fact = min_fact.min(a.fact_iii_slack);
        }
    }
    let elapsed = start.elapsed().as_secs_f64();
    let pass = min_bound >= -1e-7 && min_lemma >= -1e-7 && min_fact >= -1e-7 && elapsed < 60.0;
    outcome(
        pass,
        format!(
            "200 scenarios, {} bound slacks (min {min_bound:.3e}), {} rounds (min lemma-1 {min_lemma:.3e}, min fact-iii {min_fact:.3e}), {elapsed:.2} s",
            counts.0, counts.1
        ),
    )
}

fn criterion_2() -> Outcome {
    let text = std::fs::read_to_string(common::scenario_path("phi_pm_x_then_x.json")).unwrap();
    let scenario = ScenarioFile::parse(&text).unwrap();
    let report = run_scenario(&scenario, locc_bounds::Command::BoundsVerify, &RunOptions::default()).unwrap();
    let b = report.results[0].bounds.as_ref().unwrap();
    // N = 2 qubits, each member is maximally entangled, outputs are product
    let expected_ghyama = 2.0 - 1.0 - 0.0;
    let pass = (b.i_locc - 1.0).abs() <= 1e-9
        && (b.bound_ghyama - expected_ghyama).abs() <= 1e-9
        && (b.n_qubits - b.e_in_avg - b.e_out_avg - b.bound_ghyama).abs() <= 1e-12
        && report.pass;
    outcome(
        pass,
        format!(
            "I_locc = {:.12}, N - E_in - E_out = {} - {:.12} - {:.12} = {:.12}",
            b.i_locc, b.n_qubits, b.e_in_avg, b.e_out_avg, b.bound_ghyama
        ),
    )
}

fn criterion_3(rng: &mut ChaCha8Rng) -> Outcome {
    let mut worst: f64 = 0.0;
    for _ in 0..50 {
        let probs = random_simplex(rng, 4);
        let spec = BellDiagonalSpec::new(2, probs.clone()).unwrap();
        let got = dp_bound(&bell_diagonal(&spec).unwrap()).unwrap();
        worst = worst.max((got - (1.0 - shannon_bits(&probs))).abs());
    }
    let fixed = BellDiagonalSpec::new(2, vec![0.9, 0.1, 0.0, 0.0]).unwrap();
    let value = dp_bound(&bell_diagonal(&fixed).unwrap()).unwrap();
    let oracle = 1.0 - binary_entropy(0.9);
    let pass = worst <= 1e-7 && (value - 0.5310).abs() <= 1e-4 && (value - oracle).abs() <= 1e-7;
    outcome(
        pass,
        format!("50 specs max |dev| {worst:.3e}; (0.9, 0.1, 0, 0) -> {value:.6} (oracle {oracle:.6})"),
    )
}

fn criterion_4(rng: &mut ChaCha8Rng) -> Outcome {
    let (mixed, _) = dpprime_bound(&DensityOperator::maximally_mixed(2, 2)).unwrap();
    let mut worst: f64 = 0.0;
    for i in 0..100 {
        let d = if i % 2 == 0 { 2 } else { 3 };
        let probs = random_simplex(rng, d * d);
        let spec = BellDiagonalSpec::new(d, probs.clone()).unwrap();
        let (generic, _) = dpprime_bound(&bell_diagonal(&spec).unwrap()).unwrap();
        let log_d = (d as f64).log2();
        let oracle = log_d * log_d / (log_d + shannon_bits(&probs));
        let closed = dpprime_bound_bell(&spec).unwrap();
        worst = worst.max((generic - closed).abs()).max((generic - oracle).abs());
    }
    let pass = (mixed - 0.3333).abs() <= 1e-4 && mixed > 0.0 && worst <= 1e-7;
    outcome(
        pass,
        format!("maximally mixed 2x2 -> {mixed:.6}; 100 specs (d = 2, 3) max |generic - closed| {worst:.3e}"),
    )
}

fn criterion_5(rng: &mut ChaCha8Rng) -> Outcome {
    let mut worst: f64 = 0.0;
    for _ in 0..1000 {
        // uniform in the Bloch ball
        let (x, y, z) = loop {
            let v: (f64, f64, f64) = (rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
            if v.0 * v.0 + v.1 * v.1 + v.2 * v.2 <= 1.0 {
                break v;
            }
        };
        let r = (x * x + y * y + z * z).sqrt();
        let m = CMatrix::from_rows(&[
            vec![C64::new((1.0 + z) / 2.0, 0.0), C64::new(x / 2.0, -y / 2.0)],
            vec![C64::new(x / 2.0, y / 2.0), C64::new((1.0 - z) / 2.0, 0.0)],
        ])
        .unwrap();
        let got = von_neumann_entropy(&m).unwrap();
        worst = worst.max((got - binary_entropy((1.0 + r) / 2.0)).abs());
    }
    outcome(worst <= 1e-9, format!("1000 qubits max |dev| {worst:.3e}"))
}

fn criterion_6(rng: &mut ChaCha8Rng) -> Outcome {
    let mut worst: f64 = 0.0;
    for _ in 0..500 {
        let psi = random_unit(rng, 4);
        let rho = DensityOperator::pure(&psi, 2, 2).unwrap();
        let eof = entanglement(&rho, MeasureSelector::EofTwoQubit).unwrap();
        worst = worst.max((eof - pure_state_entanglement_oracle(&psi)).abs());
    }

    // ½|Ψ−⟩⟨Ψ−| + ½ I/4: Ψ− at weight 5/8, the other Bell states at 1/8
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let r = |x: f64| C64::new(x, 0.0);
    let bell = [
        vec![r(0.0), r(s), r(-s), r(0.0)],
        vec![r(s), r(0.0), r(0.0), r(s)],
        vec![r(s), r(0.0), r(0.0), r(-s)],
        vec![r(0.0), r(s), r(s), r(0.0)],
    ];
    let weights = [0.625, 0.125, 0.125, 0.125];
    let eigen: Vec<(f64, Vec<C64>)> = weights.iter().copied().zip(bell.iter().cloned()).collect();
    let matrix = eigen
        .iter()
        .fold(CMatrix::zeros(4, 4), |acc, (w, v)| &acc + &CMatrix::projector(v).scale_re(*w));
    let werner = validate_density(matrix, 2, 2, 1e-9).unwrap();
    let eof = entanglement(&werner, MeasureSelector::EofTwoQubit).unwrap();
    let roof = convex_roof_oracle(&eigen, rng);
    let pass = worst <= 1e-7
        && (eof - 0.1176).abs() <= 1e-3
        && (roof - 0.1176).abs() <= 1e-3
        && roof >= eof - 1e-9;
    outcome(
        pass,
        format!("500 pure states max |dev| {worst:.3e}; Werner EoF {eof:.6}, convex-roof search {roof:.6}"),
    )
}

fn criterion_7(transcripts: &[ProtocolTranscript]) -> Outcome {
    let mut worst: f64 = 0.0;
    for t in transcripts {
        let tree = chain_mutual_information(t).total;
        worst = worst.max((tree - flat_information_oracle(t)).abs());
    }
    outcome(worst <= 1e-9, format!("{} protocols max |tree - flat| {worst:.3e}", transcripts.len()))
}

fn criterion_8() -> Outcome {
    let bin = env!("CARGO_BIN_EXE_locc-bounds");
    let mut mismatches = Vec::new();
    for case in common::GOLDEN_CASES {
        let args = case.args();
        let first = Process::new(bin).args(&args).output().expect("binary runs");
        let second = Process::new(bin).args(&args).output().expect("binary runs");
        let golden = std::fs::read(common::golden_path(case)).unwrap_or_default();
        if first.status.code() != Some(0) || first.stdout != second.stdout || first.stdout != golden {
            mismatches.push(case.golden_name());
        }
    }
    outcome(
        mismatches.is_empty(),
        if mismatches.is_empty() {
            format!("{} golden reports reproduced byte-for-byte", common::GOLDEN_CASES.len())
        } else {
            format!("mismatch: {}", mismatches.join(", "))
        },
    )
}

fn main() {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    let transcripts = random_protocols();
    let results = [
        ("randomized bound suite", criterion_1(&transcripts)),
        ("saturation witness", criterion_2()),
        ("hashing saturation", criterion_3(&mut rng)),
        ("P' nonvacuity", criterion_4(&mut rng)),
        ("entropy oracle equivalence", criterion_5(&mut rng)),
        ("measure consistency", criterion_6(&mut rng)),
        ("chain rule", criterion_7(&transcripts)),
        ("CLI determinism", criterion_8()),
    ];
    let mut failed = 0;
    for (i, (name, o)) in results.iter().enumerate() {
        if !o.pass {
            failed += 1;
        }
        println!("{} [{}] {name}: {}", if o.pass { "PASS" } else { "FAIL" }, i + 1, o.detail);
    }
    println!("{} of {} criteria passed", results.len() - failed, results.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
