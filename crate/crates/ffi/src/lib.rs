//! C ABI over `locc-bounds`.
//!
//! States and ensembles are opaque heap handles created by `lb_*_new`
//! functions and released with the matching `lb_*_free`. Every fallible
//! function returns an [`LbStatus`]; on failure a message is available from
//! [`lb_last_error_message`] on the same thread. Panics are caught at the
//! boundary and reported as `LB_STATUS_PANIC`.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use locc_bounds::entropy::{entanglement, is_ppt, MeasureSelector};
use locc_bounds::{
    bell_diagonal, distillation_report, holevo_chi, partial_trace, run_scenario, validate_density,
    von_neumann_entropy, BellDiagonalSpec, BipartiteEnsemble, CMatrix, Command, DensityOperator, Error, Party,
    RunOptions, ScenarioFile, C64,
};

/// Result codes. `LB_STATUS_OK` is zero.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LbStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    DimensionMismatch = 3,
    InvalidState = 4,
    InvalidProbabilities = 5,
    MeasureUnavailable = 6,
    InvalidInstrument = 7,
    ParseError = 8,
    ScenarioError = 9,
    Unsupported = 10,
    Inconsistent = 11,
    Panic = 99,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LbParty {
    A = 0,
    B = 1,
}

fn party_from_code(code: u32) -> Result<Party, Failure> {
    match code {
        c if c == LbParty::A as u32 => Ok(Party::A),
        c if c == LbParty::B as u32 => Ok(Party::B),
        other => Err(invalid(format!("unknown party code {other}"))),
    }
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LbMeasure {
    Auto = 0,
    EntropyOfEntanglementPure = 1,
    EofTwoQubit = 2,
}

fn measure_from_code(code: u32) -> Result<MeasureSelector, Failure> {
    match code {
        c if c == LbMeasure::Auto as u32 => Ok(MeasureSelector::Auto),
        c if c == LbMeasure::EntropyOfEntanglementPure as u32 => Ok(MeasureSelector::EntropyOfEntanglementPure),
        c if c == LbMeasure::EofTwoQubit as u32 => Ok(MeasureSelector::EofTwoQubit),
        other => Err(invalid(format!("unknown measure code {other}"))),
    }
}

/// Distillation-yield bounds of a state. Infinite bounds are `INFINITY`.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct LbDistillationReport {
    pub s: f64,
    pub s_a: f64,
    pub s_b: f64,
    pub s_bar_a: f64,
    pub dp_bound: f64,
    pub dpprime_bound: f64,
    pub r_max: f64,
    pub hashing_yield: f64,
    pub min_pt_eigenvalue: f64,
    pub ppt: bool,
    pub degenerate_spectrum: bool,
}

/// Opaque bipartite density operator.
pub struct LbDensity(DensityOperator);

/// Opaque ensemble of bipartite states.
pub struct LbEnsemble(BipartiteEnsemble);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_last_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn clear_last_error() {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
}

struct Failure(LbStatus, String);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let status = match &e {
            Error::DimensionMismatch(_) => LbStatus::DimensionMismatch,
            Error::NotHermitian(_) | Error::TraceDeviation(_) | Error::NegativeEigenvalue(_) => LbStatus::InvalidState,
            Error::InvalidProbabilities(_) | Error::InvalidEnsemble(_) => LbStatus::InvalidProbabilities,
            Error::MeasureUnavailable(_) => LbStatus::MeasureUnavailable,
            Error::IncompleteInstrument(_) | Error::EmptyInstrument | Error::ChooserUndefined(_) => {
                LbStatus::InvalidInstrument
            }
            Error::Inconsistent(_) => LbStatus::Inconsistent,
            Error::Scenario { .. } => LbStatus::ScenarioError,
            Error::Parse(_) => LbStatus::ParseError,
            Error::Unsupported(_) => LbStatus::Unsupported,
        };
        Failure(status, e.to_string())
    }
}

fn null(what: &str) -> Failure {
    Failure(LbStatus::NullPointer, format!("`{what}` is null"))
}

fn invalid(msg: impl Into<String>) -> Failure {
    Failure(LbStatus::InvalidArgument, msg.into())
}

fn guard(f: impl FnOnce() -> Result<(), Failure>) -> LbStatus {
    clear_last_error();
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => LbStatus::Ok,
        Ok(Err(Failure(status, msg))) => {
            set_last_error(msg);
            status
        }
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            set_last_error(format!("panic: {msg}"));
            LbStatus::Panic
        }
    }
}

unsafe fn out_ref<'a, T>(p: *mut T, what: &str) -> Result<&'a mut T, Failure> {
    p.as_mut().ok_or_else(|| null(what))
}

unsafe fn handle<'a, T>(p: *const T, what: &str) -> Result<&'a T, Failure> {
    p.as_ref().ok_or_else(|| null(what))
}

/// Reads `n` complex numbers from split real/imaginary arrays; `im` may be null.
unsafe fn complex_slice(re: *const f64, im: *const f64, n: usize) -> Result<Vec<C64>, Failure> {
    if re.is_null() {
        return Err(null("re"));
    }
    let re = std::slice::from_raw_parts(re, n);
    let im = if im.is_null() { None } else { Some(std::slice::from_raw_parts(im, n)) };
    Ok((0..n).map(|i| C64::new(re[i], im.map_or(0.0, |v| v[i]))).collect())
}

fn checked_dim(dim_a: usize, dim_b: usize) -> Result<usize, Failure> {
    if dim_a == 0 || dim_b == 0 {
        return Err(invalid("dimensions must be positive"));
    }
    dim_a
        .checked_mul(dim_b)
        .filter(|n| n.checked_mul(*n).is_some())
        .ok_or_else(|| invalid("dimensions overflow"))
}

/// Message for the last failed call on this thread, or null. The pointer
/// stays valid until the next `lb_*` call on the same thread.
#[no_mangle]
pub extern "C" fn lb_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn lb_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Validates a `(dim_a·dim_b)²` row-major matrix as a density operator.
///
/// # Safety
/// `re` (and `im` unless null) must point to `(dim_a·dim_b)²` doubles;
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn lb_density_new(
    re: *const f64,
    im: *const f64,
    dim_a: usize,
    dim_b: usize,
    tol: f64,
    out: *mut *mut LbDensity,
) -> LbStatus {
    guard(|| {
        let out = out_ref(out, "out")?;
        let n = checked_dim(dim_a, dim_b)?;
        if !(tol.is_finite() && tol >= 0.0) {
            return Err(invalid("tolerance must be finite and nonnegative"));
        }
        let data = complex_slice(re, im, n * n)?;
        let m = CMatrix::from_fn(n, n, |i, j| data[i * n + j]);
        let rho = validate_density(m, dim_a, dim_b, tol)?;
        *out = Box::into_raw(Box::new(LbDensity(rho)));
        Ok(())
    })
}

/// `|ψ⟩⟨ψ|` for a vector of length `dim_a·dim_b`; normalized on the way in.
///
/// # Safety
/// `re` (and `im` unless null) must point to `dim_a·dim_b` doubles; `out`
/// must be writable.
#[no_mangle]
pub unsafe extern "C" fn lb_density_pure(
    re: *const f64,
    im: *const f64,
    dim_a: usize,
    dim_b: usize,
    out: *mut *mut LbDensity,
) -> LbStatus {
    guard(|| {
        let out = out_ref(out, "out")?;
        let n = checked_dim(dim_a, dim_b)?;
        let psi = complex_slice(re, im, n)?;
        *out = Box::into_raw(Box::new(LbDensity(DensityOperator::pure(&psi, dim_a, dim_b)?)));
        Ok(())
    })
}

/// Bell-diagonal state on `d ⊗ d` with weights `probs[a·d + b]`.
///
/// # Safety
/// `probs` must point to `len` doubles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn lb_density_bell_diagonal(
    d: usize,
    probs: *const f64,
    len: usize,
    out: *mut *mut LbDensity,
) -> LbStatus {
    guard(|| {
        let out = out_ref(out, "out")?;
        if probs.is_null() {
            return Err(null("probs"));
        }
        let p = std::slice::from_raw_parts(probs, len).to_vec();
        let spec = BellDiagonalSpec::new(d, p)?;
        *out = Box::into_raw(Box::new(LbDensity(bell_diagonal(&spec)?)));
        Ok(())
    })
}

/// Releases a state; null is a no-op.
///
/// # Safety
/// `rho` must be null or a handle from this library not yet freed.
#[no_mangle]
pub unsafe extern "C" fn lb_density_free(rho: *mut LbDensity) {
    if !rho.is_null() {
        drop(Box::from_raw(rho));
    }
}

/// # Safety
/// `rho` must be a live handle; the outputs must be writable.
#[no_mangle]
pub unsafe extern "C" fn lb_density_dims(rho: *const LbDensity, dim_a: *mut usize, dim_b: *mut usize) -> LbStatus {
    guard(|| {
        let (a, b) = handle(rho, "rho")?.0.dims();
        *out_ref(dim_a, "dim_a")? = a;
        *out_ref(dim_b, "dim_b")? = b;
        Ok(())
    })
}

/// Copies the matrix into row-major `re`/`im` buffers of `(dim_a·dim_b)²` doubles.
///
/// # Safety
/// `rho` must be a live handle; `re` and `im` must each hold `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn lb_density_matrix(rho: *const LbDensity, re: *mut f64, im: *mut f64, len: usize) -> LbStatus {
    guard(|| {
        let m = handle(rho, "rho")?.0.matrix();
        let data = m.as_slice();
        if len < data.len() {
            return Err(invalid(format!("buffers hold {len} entries, need {}", data.len())));
        }
        if re.is_null() || im.is_null() {
            return Err(null("re/im"));
        }
        let re = std::slice::from_raw_parts_mut(re, data.len());
        let im = std::slice::from_raw_parts_mut(im, data.len());
        for (k, z) in data.iter().enumerate() {
            re[k] = z.re;
            im[k] = z.im;
        }
        Ok(())
    })
}

/// Von Neumann entropy in bits.
///
/// # Safety
/// `rho` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn lb_density_entropy(rho: *const LbDensity, out: *mut f64) -> LbStatus {
    guard(|| {
        let rho = handle(rho, "rho")?;
        *out_ref(out, "out")? = von_neumann_entropy(&rho.0)?;
        Ok(())
    })
}

/// Entropy of the reduced state of `party` (an `LbParty` value).
///
/// # Safety
/// `rho` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn lb_density_marginal_entropy(rho: *const LbDensity, party: u32, out: *mut f64) -> LbStatus {
    guard(|| {
        let rho = handle(rho, "rho")?;
        *out_ref(out, "out")? = von_neumann_entropy(&partial_trace(&rho.0, party_from_code(party)?))?;
        Ok(())
    })
}

/// PPT test; `min_eigenvalue` receives the smallest eigenvalue of the partial transpose.
///
/// # Safety
/// `rho` must be a live handle; the outputs must be writable.
#[no_mangle]
pub unsafe extern "C" fn lb_density_is_ppt(rho: *const LbDensity, ppt: *mut bool, min_eigenvalue: *mut f64) -> LbStatus {
    guard(|| {
        let (flag, min) = is_ppt(&handle(rho, "rho")?.0);
        *out_ref(ppt, "ppt")? = flag;
        *out_ref(min_eigenvalue, "min_eigenvalue")? = min;
        Ok(())
    })
}

/// Entanglement in ebits under `measure` (an `LbMeasure` value).
///
/// # Safety
/// `rho` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn lb_density_entanglement(rho: *const LbDensity, measure: u32, out: *mut f64) -> LbStatus {
    guard(|| {
        let rho = handle(rho, "rho")?;
        *out_ref(out, "out")? = entanglement(&rho.0, measure_from_code(measure)?)?;
        Ok(())
    })
}

/// # Safety
/// `rho` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn lb_density_distillation_report(
    rho: *const LbDensity,
    out: *mut LbDistillationReport,
) -> LbStatus {
    guard(|| {
        let r = distillation_report(&handle(rho, "rho")?.0, None)?;
        *out_ref(out, "out")? = LbDistillationReport {
            s: r.s,
            s_a: r.s_a,
            s_b: r.s_b,
            s_bar_a: r.s_bar_a,
            dp_bound: r.dp_bound,
            dpprime_bound: r.dpprime_bound,
            r_max: r.r_max,
            hashing_yield: r.hashing_yield,
            min_pt_eigenvalue: r.min_pt_eigenvalue,
            ppt: r.ppt,
            degenerate_spectrum: r.degenerate_spectrum,
        };
        Ok(())
    })
}

/// Builds an ensemble from `n` probabilities and states; the states are
/// copied, so the caller keeps ownership of its handles.
///
/// # Safety
/// `probs` and `states` must point to `n` entries each, every state a live
/// handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn lb_ensemble_new(
    probs: *const f64,
    states: *const *const LbDensity,
    n: usize,
    out: *mut *mut LbEnsemble,
) -> LbStatus {
    guard(|| {
        let out = out_ref(out, "out")?;
        if probs.is_null() || states.is_null() {
            return Err(null("probs/states"));
        }
        let probs = std::slice::from_raw_parts(probs, n);
        let states = std::slice::from_raw_parts(states, n);
        let mut members = Vec::with_capacity(n);
        for (i, (&p, &s)) in probs.iter().zip(states).enumerate() {
            members.push((p, handle(s, &format!("states[{i}]"))?.0.clone()));
        }
        *out = Box::into_raw(Box::new(LbEnsemble(BipartiteEnsemble::new(members)?)));
        Ok(())
    })
}

/// # Safety
/// `ens` must be null or a handle from this library not yet freed.
#[no_mangle]
pub unsafe extern "C" fn lb_ensemble_free(ens: *mut LbEnsemble) {
    if !ens.is_null() {
        drop(Box::from_raw(ens));
    }
}

/// Holevo quantity of the global ensemble.
///
/// # Safety
/// `ens` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn lb_ensemble_holevo(ens: *const LbEnsemble, out: *mut f64) -> LbStatus {
    guard(|| {
        *out_ref(out, "out")? = holevo_chi(&handle(ens, "ens")?.0)?;
        Ok(())
    })
}

/// Holevo quantity of the reduced ensemble held by `party` (an `LbParty` value).
///
/// # Safety
/// `ens` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn lb_ensemble_marginal_holevo(ens: *const LbEnsemble, party: u32, out: *mut f64) -> LbStatus {
    guard(|| {
        *out_ref(out, "out")? = holevo_chi(&handle(ens, "ens")?.0.marginal(party_from_code(party)?))?;
        Ok(())
    })
}

/// Runs a command (`"bounds-verify"`, `"protocol-run"`, `"distill-report"`,
/// `"entropy"`) on a scenario given as JSON text. The JSON report is
/// returned in `out_json` (free with [`lb_string_free`]) and `out_pass`
/// tells whether every check passed. A NaN `tol` uses the scenario's own.
///
/// # Safety
/// `scenario_json` and `command` must be NUL-terminated; the outputs must
/// be writable.
#[no_mangle]
pub unsafe extern "C" fn lb_run_scenario_json(
    scenario_json: *const c_char,
    command: *const c_char,
    seed: u64,
    trials: usize,
    tol: f64,
    out_json: *mut *mut c_char,
    out_pass: *mut bool,
) -> LbStatus {
    guard(|| {
        let out_json = out_ref(out_json, "out_json")?;
        let out_pass = out_ref(out_pass, "out_pass")?;
        if scenario_json.is_null() || command.is_null() {
            return Err(null("scenario_json/command"));
        }
        let text = CStr::from_ptr(scenario_json)
            .to_str()
            .map_err(|_| invalid("scenario is not UTF-8"))?;
        let command: Command = CStr::from_ptr(command)
            .to_str()
            .map_err(|_| invalid("command is not UTF-8"))?
            .parse()?;
        let scenario = ScenarioFile::parse(text)?;
        let opts = RunOptions {
            seed,
            trials,
            tol: if tol.is_nan() { None } else { Some(tol) },
        };
        let report = run_scenario(&scenario, command, &opts)?;
        *out_pass = report.pass;
        *out_json = CString::new(report.to_json())
            .map_err(|_| invalid("report contains NUL"))?
            .into_raw();
        Ok(())
    })
}

/// Releases a string returned by this library; null is a no-op.
///
/// # Safety
/// `s` must be null or a string from this library not yet freed.
#[no_mangle]
pub unsafe extern "C" fn lb_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}
