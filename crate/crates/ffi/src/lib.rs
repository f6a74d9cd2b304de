//! C interface to `smaa_induce`.
//!
//! Every fallible function returns an [`SmaaStatus`]. On failure the
//! message is kept per thread and read with [`smaa_last_error_message`].
//! Handles are opaque and must be released with their `_free` function.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;
use std::slice;

use smaa_induce::harness::MethodSpec;
use smaa_induce::indices::{pwi, rai};
use smaa_induce::inference::{InferenceConfig, InferenceResult, NlConfig};
use smaa_induce::metrics::{ks_equal, ks_greater, KsResult};
use smaa_induce::model::Provenance;
use smaa_induce::sampler::{sample_weight_space, SamplerConfig};
use smaa_induce::{Error, MassDistribution, OmegaSample, PerformanceMatrix, PreferenceInfo, WeightVector};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SmaaStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    DimensionMismatch = 3,
    Infeasible = 4,
    Numerical = 5,
    Parse = 6,
    Io = 7,
    /// The requested value does not exist for this result.
    NotAvailable = 8,
    BufferTooSmall = 9,
    Panic = 10,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SmaaStatement {
    CertainStrict = 0,
    CertainIndifferent = 1,
    UncertainStrict = 2,
    UncertainIndifferent = 3,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SmaaKsVariant {
    Equal = 0,
    /// The first sample sits on smaller values.
    Greater = 1,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SmaaKsResult {
    pub statistic: f64,
    pub p_value: f64,
    pub h: u8,
}

/// Performance matrix plus the statements attached to it.
pub struct SmaaProblem {
    perf: PerformanceMatrix,
    prefs: PreferenceInfo,
}

/// A sample of weight vectors.
pub struct SmaaSample {
    omega: OmegaSample,
}

/// Outcome of one inference call.
pub struct SmaaResult {
    inner: InferenceResult,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).expect("interior nul removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(e: &Error) -> SmaaStatus {
    match e {
        Error::DimensionMismatch { .. } => SmaaStatus::DimensionMismatch,
        Error::Infeasible | Error::Incompatible { .. } => SmaaStatus::Infeasible,
        Error::Numerical(_) | Error::Unbounded | Error::DegeneratePolytope { .. } | Error::NonConvergence { .. } => {
            SmaaStatus::Numerical
        }
        Error::Parse(_) => SmaaStatus::Parse,
        Error::Io(_) => SmaaStatus::Io,
        _ => SmaaStatus::InvalidArgument,
    }
}

fn fail(status: SmaaStatus, msg: impl Into<String>) -> SmaaStatus {
    set_error(msg.into());
    status
}

/// Runs `f`, turning errors and panics into a status plus the thread's
/// last error message.
fn guard(f: impl FnOnce() -> Result<(), SmaaStatus>) -> SmaaStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => SmaaStatus::Ok,
        Ok(Err(s)) => s,
        Err(p) => {
            let msg = p
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| p.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panic".into());
            fail(SmaaStatus::Panic, format!("internal panic: {msg}"))
        }
    }
}

fn lib<T>(r: smaa_induce::Result<T>) -> Result<T, SmaaStatus> {
    r.map_err(|e| fail(status_of(&e), e.to_string()))
}

unsafe fn get<'a, T>(p: *const T) -> Result<&'a T, SmaaStatus> {
    p.as_ref().ok_or_else(|| fail(SmaaStatus::NullPointer, "null handle"))
}

unsafe fn get_mut<'a, T>(p: *mut T) -> Result<&'a mut T, SmaaStatus> {
    p.as_mut().ok_or_else(|| fail(SmaaStatus::NullPointer, "null handle"))
}

unsafe fn input<'a>(p: *const f64, len: usize) -> Result<&'a [f64], SmaaStatus> {
    if len == 0 {
        return Ok(&[]);
    }
    if p.is_null() {
        return Err(fail(SmaaStatus::NullPointer, "null input buffer"));
    }
    Ok(slice::from_raw_parts(p, len))
}

unsafe fn output<'a>(p: *mut f64, len: usize, needed: usize) -> Result<&'a mut [f64], SmaaStatus> {
    if p.is_null() {
        return Err(fail(SmaaStatus::NullPointer, "null output buffer"));
    }
    if len < needed {
        return Err(fail(SmaaStatus::BufferTooSmall, format!("buffer holds {len} values, {needed} needed")));
    }
    Ok(slice::from_raw_parts_mut(p, needed))
}

unsafe fn store<T>(out: *mut *mut T, value: T) -> Result<(), SmaaStatus> {
    if out.is_null() {
        return Err(fail(SmaaStatus::NullPointer, "null output handle"));
    }
    *out = Box::into_raw(Box::new(value));
    Ok(())
}

/// Message of the last failure on this thread, or null. Valid until the
/// next failing call on the same thread.
#[no_mangle]
pub extern "C" fn smaa_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

#[no_mangle]
pub extern "C" fn smaa_clear_error() {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
}

/// Library version as a static string.
#[no_mangle]
pub extern "C" fn smaa_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// New problem over a row-major `m × n` matrix of gain-type evaluations.
///
/// # Safety
/// `values` must point to `m * n` doubles and `out` to writable storage.
#[no_mangle]
pub unsafe extern "C" fn smaa_problem_new(
    values: *const f64,
    m: usize,
    n: usize,
    out: *mut *mut SmaaProblem,
) -> SmaaStatus {
    guard(|| {
        let Some(total) = m.checked_mul(n).filter(|&t| t > 0) else {
            return Err(fail(SmaaStatus::InvalidArgument, "matrix must have at least one entry"));
        };
        let data = input(values, total)?;
        let rows = data.chunks(n).map(<[f64]>::to_vec).collect();
        let perf = lib(PerformanceMatrix::from_rows(rows))?;
        store(out, SmaaProblem { perf, prefs: PreferenceInfo::default() })
    })
}

/// # Safety
/// `problem` must come from [`smaa_problem_new`] and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn smaa_problem_free(problem: *mut SmaaProblem) {
    if !problem.is_null() {
        drop(Box::from_raw(problem));
    }
}

/// Records a pairwise statement about alternatives `a` and `b` (zero-based).
///
/// # Safety
/// `problem` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn smaa_problem_add_statement(
    problem: *mut SmaaProblem,
    kind: SmaaStatement,
    a: usize,
    b: usize,
) -> SmaaStatus {
    guard(|| {
        let p = get_mut(problem)?;
        let mut prefs = p.prefs.clone();
        match kind {
            SmaaStatement::CertainStrict => prefs.certain_strict.push((a, b)),
            SmaaStatement::CertainIndifferent => prefs.certain_indiff.push((a, b)),
            SmaaStatement::UncertainStrict => prefs.uncertain_strict.push((a, b)),
            SmaaStatement::UncertainIndifferent => prefs.uncertain_indiff.push((a, b)),
        }
        lib(prefs.validate(p.perf.num_alternatives()))?;
        p.prefs = prefs;
        Ok(())
    })
}

/// Records `(a, b)` preferred to `(c, d)` in intensity, certain or uncertain.
///
/// # Safety
/// `problem` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn smaa_problem_add_intensity(
    problem: *mut SmaaProblem,
    certain: bool,
    a: usize,
    b: usize,
    c: usize,
    d: usize,
) -> SmaaStatus {
    guard(|| {
        let p = get_mut(problem)?;
        let mut prefs = p.prefs.clone();
        let list = if certain { &mut prefs.certain_intensity } else { &mut prefs.uncertain_intensity };
        list.push(((a, b), (c, d)));
        lib(prefs.validate(p.perf.num_alternatives()))?;
        p.prefs = prefs;
        Ok(())
    })
}

/// Draws `count` weight vectors uniformly from the weights compatible with
/// the problem's certain statements (the whole simplex when there are none).
///
/// # Safety
/// `problem` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn smaa_sample_weights(
    problem: *const SmaaProblem,
    count: usize,
    seed: u64,
    out: *mut *mut SmaaSample,
) -> SmaaStatus {
    guard(|| {
        let p = get(problem)?;
        if count == 0 {
            return Err(fail(SmaaStatus::InvalidArgument, "count must be positive"));
        }
        let omega = lib(sample_weight_space(&p.perf, Some(&p.prefs), count, &SamplerConfig::with_seed(seed)))?;
        store(out, SmaaSample { omega })
    })
}

/// Wraps caller-supplied weight vectors, row-major `count × n`.
///
/// # Safety
/// `weights` must point to `count * n` doubles and `out` be writable.
#[no_mangle]
pub unsafe extern "C" fn smaa_sample_from_weights(
    weights: *const f64,
    count: usize,
    n: usize,
    out: *mut *mut SmaaSample,
) -> SmaaStatus {
    guard(|| {
        let Some(total) = count.checked_mul(n).filter(|&t| t > 0) else {
            return Err(fail(SmaaStatus::InvalidArgument, "sample must be non-empty"));
        };
        let data = input(weights, total)?;
        let functions = lib(data.chunks(n).map(|r| WeightVector::new(r.to_vec())).collect())?;
        let omega = lib(OmegaSample::new(functions, Provenance::External))?;
        store(out, SmaaSample { omega })
    })
}

/// # Safety
/// `sample` must be a live handle or null.
#[no_mangle]
pub unsafe extern "C" fn smaa_sample_len(sample: *const SmaaSample) -> usize {
    sample.as_ref().map_or(0, |s| s.omega.len())
}

/// # Safety
/// `sample` must be a live handle or null.
#[no_mangle]
pub unsafe extern "C" fn smaa_sample_dim(sample: *const SmaaSample) -> usize {
    sample.as_ref().map_or(0, |s| s.omega.dim())
}

/// Copies the weights row-major into `buf`, which holds `len` doubles.
///
/// # Safety
/// `sample` must be a live handle and `buf` point to `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn smaa_sample_copy_weights(sample: *const SmaaSample, buf: *mut f64, len: usize) -> SmaaStatus {
    guard(|| {
        let s = get(sample)?;
        let dst = output(buf, len, s.omega.len() * s.omega.dim())?;
        for (chunk, w) in dst.chunks_mut(s.omega.dim()).zip(s.omega.functions()) {
            chunk.copy_from_slice(w.as_slice());
        }
        Ok(())
    })
}

/// # Safety
/// `sample` must come from this library and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn smaa_sample_free(sample: *mut SmaaSample) {
    if !sample.is_null() {
        drop(Box::from_raw(sample));
    }
}

/// Infers masses over `sample` with the method named by `method`, e.g.
/// `"ssor"`, `"acg_pl@arme"` or `"acg_nl@unkn"`. `dist_samples` is the
/// number of distributions averaged by the LP-based methods.
///
/// # Safety
/// Handles must be live, `method` a nul-terminated string, `out` writable.
#[no_mangle]
pub unsafe extern "C" fn smaa_infer(
    problem: *const SmaaProblem,
    sample: *const SmaaSample,
    method: *const c_char,
    dist_samples: usize,
    seed: u64,
    out: *mut *mut SmaaResult,
) -> SmaaStatus {
    guard(|| {
        let p = get(problem)?;
        let s = get(sample)?;
        if method.is_null() {
            return Err(fail(SmaaStatus::NullPointer, "null method name"));
        }
        let name = CStr::from_ptr(method)
            .to_str()
            .map_err(|_| fail(SmaaStatus::InvalidArgument, "method name is not UTF-8"))?;
        let spec: MethodSpec = lib(name.parse())?;
        if dist_samples == 0 {
            return Err(fail(SmaaStatus::InvalidArgument, "dist_samples must be positive"));
        }
        let cfg = InferenceConfig { dist_samples, sampler: SamplerConfig::with_seed(seed), ..Default::default() };
        let inner = lib(spec.infer(&s.omega, &p.perf, &p.prefs, &cfg, &NlConfig::default()))?;
        store(out, SmaaResult { inner })
    })
}

/// # Safety
/// `result` must be a live handle or null.
#[no_mangle]
pub unsafe extern "C" fn smaa_result_len(result: *const SmaaResult) -> usize {
    result.as_ref().map_or(0, |r| r.inner.masses.len())
}

/// # Safety
/// `result` must be a live handle and `buf` point to `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn smaa_result_masses(result: *const SmaaResult, buf: *mut f64, len: usize) -> SmaaStatus {
    guard(|| {
        let r = get(result)?;
        let masses = r.inner.masses.as_slice();
        output(buf, len, masses.len())?.copy_from_slice(masses);
        Ok(())
    })
}

/// Whether the statements hold strictly under the returned masses' LP.
///
/// # Safety
/// `result` must be a live handle or null.
#[no_mangle]
pub unsafe extern "C" fn smaa_result_compatible(result: *const SmaaResult) -> bool {
    result.as_ref().is_some_and(|r| r.inner.compatible)
}

/// Optimal slack of the compatibility LP. `NotAvailable` for methods
/// without one or when the LP was infeasible.
///
/// # Safety
/// `result` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn smaa_result_epsilon(result: *const SmaaResult, out: *mut f64) -> SmaaStatus {
    guard(|| {
        let r = get(result)?;
        let eps = r.inner.epsilon_star.ok_or_else(|| fail(SmaaStatus::NotAvailable, "no LP slack for this result"))?;
        *output(out, 1, 1)?.first_mut().expect("one slot") = eps;
        Ok(())
    })
}

/// Result as a JSON string owned by the caller; release it with
/// [`smaa_string_free`]. Null on failure.
///
/// # Safety
/// `result` must be a live handle or null.
#[no_mangle]
pub unsafe extern "C" fn smaa_result_to_json(result: *const SmaaResult) -> *mut c_char {
    let Some(r) = result.as_ref() else {
        set_error("null handle".into());
        return ptr::null_mut();
    };
    CString::new(r.inner.to_json()).map_or(ptr::null_mut(), CString::into_raw)
}

/// # Safety
/// `result` must come from [`smaa_infer`] and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn smaa_result_free(result: *mut SmaaResult) {
    if !result.is_null() {
        drop(Box::from_raw(result));
    }
}

/// # Safety
/// `s` must come from this library and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn smaa_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Rank acceptability (`rai[r * m + a]`) and pairwise winning
/// (`pwi[a * m + b]`) indices of `masses` over `sample`. Either output may
/// be null to skip it; each needs `m * m` slots.
///
/// # Safety
/// Handles must be live, `masses` point to `len` doubles, outputs to `m * m`.
#[no_mangle]
pub unsafe extern "C" fn smaa_indices(
    problem: *const SmaaProblem,
    sample: *const SmaaSample,
    masses: *const f64,
    len: usize,
    rai_out: *mut f64,
    pwi_out: *mut f64,
) -> SmaaStatus {
    guard(|| {
        let p = get(problem)?;
        let s = get(sample)?;
        let dist = lib(MassDistribution::new(input(masses, len)?.to_vec()))?;
        let m = p.perf.num_alternatives();
        if !rai_out.is_null() {
            let r = lib(rai(&s.omega, &dist, &p.perf))?;
            let dst = output(rai_out, m * m, m * m)?;
            for k in 0..m {
                dst[k * m..(k + 1) * m].copy_from_slice(r.rank_row(k));
            }
        }
        if !pwi_out.is_null() {
            let q = lib(pwi(&s.omega, &dist, &p.perf))?;
            let dst = output(pwi_out, m * m, m * m)?;
            for a in 0..m {
                for b in 0..m {
                    dst[a * m + b] = q.get(a, b);
                }
            }
        }
        Ok(())
    })
}

/// Two-sample Kolmogorov-Smirnov test at level `alpha`.
///
/// # Safety
/// `x` and `y` must point to `nx` and `ny` doubles; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn smaa_ks_test(
    x: *const f64,
    nx: usize,
    y: *const f64,
    ny: usize,
    alpha: f64,
    variant: SmaaKsVariant,
    out: *mut SmaaKsResult,
) -> SmaaStatus {
    guard(|| {
        let (a, b) = (input(x, nx)?, input(y, ny)?);
        let res: KsResult = match variant {
            SmaaKsVariant::Equal => lib(ks_equal(a, b, alpha))?,
            SmaaKsVariant::Greater => lib(ks_greater(a, b, alpha))?,
        };
        let dst = out.as_mut().ok_or_else(|| fail(SmaaStatus::NullPointer, "null output"))?;
        *dst = SmaaKsResult { statistic: res.statistic, p_value: res.p_value, h: res.h };
        Ok(())
    })
}
