//! C interface to `bosonvalid`.
//!
//! Objects cross the boundary as opaque handles (`BvUnitary`, `BvSample`)
//! that the caller releases with the matching `*_free` function. Every
//! fallible call returns a `BvStatus`; on failure a message for the calling
//! thread is available from `bv_last_error_message`. Mode indices are
//! 0-based throughout. Matrices are row-major with `U[out][in]`.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::PathBuf;
use std::ptr;

use bosonvalid::clustering::{
    Algorithm, ClusteringConfig, InitStrategy, DEFAULT_K, DEFAULT_MAX_ITER,
    DEFAULT_MIN_CLUSTER_SIZE, DEFAULT_OUTLIER_FRACTION, DEFAULT_VOTING_TRIALS,
};
use bosonvalid::fock::{Metric, ModeOccupation};
use bosonvalid::sampler::{
    haar_random_unitary, permanent, transition_probability, EventSample, Matrix, McmcConfig,
    Method, Model, SampleSource, UnitaryMatrix,
};
use bosonvalid::validation::{chi_square_pvalue, validate, Verdict};
use bosonvalid::Error;
use num_complex::Complex64;

/// Result code of every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BvStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidDimension = 2,
    UnsupportedState = 3,
    InvalidParameter = 4,
    Capacity = 5,
    InfeasibleK = 6,
    HaltingFailure = 7,
    DegenerateStructure = 8,
    InsufficientData = 9,
    Coverage = 10,
    Parse = 11,
    Io = 12,
    Panic = 99,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BvModel {
    Indistinguishable = 0,
    Distinguishable = 1,
    MeanField = 2,
    Uniform = 3,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BvMethod {
    Exact = 0,
    Mcmc = 1,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BvAlgorithm {
    Bubble = 0,
    Hierarchical = 1,
    Kmeans = 2,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BvMetric {
    L1 = 1,
    L2 = 2,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BvInit {
    Uniform = 0,
    KmeansPlusPlus = 1,
    Hierarchical = 2,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BvVerdict {
    Compatible = 0,
    Incompatible = 1,
}

/// Clustering settings; obtain defaults from `bv_clustering_config_default`.
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct BvClusteringConfig {
    pub algorithm: BvAlgorithm,
    pub k: usize,
    pub radius: f64,
    pub outlier_fraction: f64,
    pub min_cluster_size: usize,
    pub max_iter: usize,
    pub metric: BvMetric,
    pub init: BvInit,
    pub voting_trials: usize,
}

/// Outcome of a compatibility test. Statistic, dof and p-value are those
/// of the first voting trial.
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct BvTestResult {
    pub statistic: f64,
    pub dof: usize,
    pub p_value: f64,
    pub verdict: BvVerdict,
    pub compatible_votes: usize,
    pub trials: usize,
}

/// Opaque interferometer handle.
pub struct BvUnitary(UnitaryMatrix);

/// Opaque event-sample handle.
pub struct BvSample(EventSample);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).expect("no interior NUL");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(e: &Error) -> BvStatus {
    match e {
        Error::InvalidDimension(_) => BvStatus::InvalidDimension,
        Error::UnsupportedState(_) => BvStatus::UnsupportedState,
        Error::InvalidParameter(_) => BvStatus::InvalidParameter,
        Error::Capacity(_) => BvStatus::Capacity,
        Error::InfeasibleK { .. } => BvStatus::InfeasibleK,
        Error::HaltingFailure(_) => BvStatus::HaltingFailure,
        Error::DegenerateStructure(_) => BvStatus::DegenerateStructure,
        Error::InsufficientData(_) => BvStatus::InsufficientData,
        Error::Coverage(_) => BvStatus::Coverage,
        Error::Parse(_) | Error::Json(_) => BvStatus::Parse,
        Error::Io(_) => BvStatus::Io,
    }
}

enum Fail {
    Null(&'static str),
    Lib(Error),
}

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        Fail::Lib(e)
    }
}

/// Runs `f`, converting errors and panics into a status code.
fn guard(f: impl FnOnce() -> Result<(), Fail>) -> BvStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => BvStatus::Ok,
        Ok(Err(Fail::Null(what))) => {
            set_error(format!("null pointer passed for {what}"));
            BvStatus::NullPointer
        }
        Ok(Err(Fail::Lib(e))) => {
            set_error(e.to_string());
            status_of(&e)
        }
        Err(_) => {
            set_error("internal panic".into());
            BvStatus::Panic
        }
    }
}

unsafe fn deref<'a, T>(p: *const T, what: &'static str) -> Result<&'a T, Fail> {
    p.as_ref().ok_or(Fail::Null(what))
}

unsafe fn slice<'a, T>(p: *const T, len: usize, what: &'static str) -> Result<&'a [T], Fail> {
    if len == 0 {
        return Ok(&[]);
    }
    if p.is_null() {
        return Err(Fail::Null(what));
    }
    Ok(std::slice::from_raw_parts(p, len))
}

unsafe fn out_ptr<'a, T>(p: *mut T, what: &'static str) -> Result<&'a mut T, Fail> {
    p.as_mut().ok_or(Fail::Null(what))
}

unsafe fn path(p: *const c_char) -> Result<PathBuf, Fail> {
    if p.is_null() {
        return Err(Fail::Null("path"));
    }
    let s = CStr::from_ptr(p)
        .to_str()
        .map_err(|_| Error::Parse("path is not valid UTF-8".into()))?;
    Ok(PathBuf::from(s))
}

fn model(m: BvModel) -> Model {
    match m {
        BvModel::Indistinguishable => Model::Indistinguishable,
        BvModel::Distinguishable => Model::Distinguishable,
        BvModel::MeanField => Model::MeanField,
        BvModel::Uniform => Model::Uniform,
    }
}

fn config(c: &BvClusteringConfig) -> ClusteringConfig {
    ClusteringConfig {
        algorithm: match c.algorithm {
            BvAlgorithm::Bubble => Algorithm::Bubble,
            BvAlgorithm::Hierarchical => Algorithm::Hierarchical,
            BvAlgorithm::Kmeans => Algorithm::KMeans,
        },
        k: c.k,
        radius: c.radius,
        outlier_fraction: c.outlier_fraction,
        min_cluster_size: c.min_cluster_size,
        max_iter: c.max_iter,
        metric: match c.metric {
            BvMetric::L1 => Metric::L1,
            BvMetric::L2 => Metric::L2,
        },
        init: match c.init {
            BvInit::Uniform => InitStrategy::UniformRandom,
            BvInit::KmeansPlusPlus => InitStrategy::KMeansPlusPlus,
            BvInit::Hierarchical => InitStrategy::Hierarchical,
        },
        voting_trials: c.voting_trials,
    }
}

/// Message describing the last failure on this thread, or NULL. The string
/// stays valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn bv_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn bv_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// K-means++ with 11-vote majority, k = 25, L2.
#[no_mangle]
pub extern "C" fn bv_clustering_config_default() -> BvClusteringConfig {
    BvClusteringConfig {
        algorithm: BvAlgorithm::Kmeans,
        k: DEFAULT_K,
        radius: 2.0,
        outlier_fraction: DEFAULT_OUTLIER_FRACTION,
        min_cluster_size: DEFAULT_MIN_CLUSTER_SIZE,
        max_iter: DEFAULT_MAX_ITER,
        metric: BvMetric::L2,
        init: BvInit::KmeansPlusPlus,
        voting_trials: DEFAULT_VOTING_TRIALS,
    }
}

/// Permanent of the `n × n` complex matrix given by row-major real and
/// imaginary parts.
///
/// # Safety
/// `re` and `im` must point to `n * n` doubles; `out_re`, `out_im` must be
/// writable.
#[no_mangle]
pub unsafe extern "C" fn bv_permanent(
    n: usize,
    re: *const f64,
    im: *const f64,
    out_re: *mut f64,
    out_im: *mut f64,
) -> BvStatus {
    guard(|| {
        let re = slice(re, n * n, "re")?;
        let im = slice(im, n * n, "im")?;
        let data = re
            .iter()
            .zip(im)
            .map(|(&a, &b)| Complex64::new(a, b))
            .collect();
        let p = permanent(&Matrix::from_vec(n, n, data)?)?;
        *out_ptr(out_re, "out_re")? = p.re;
        *out_ptr(out_im, "out_im")? = p.im;
        Ok(())
    })
}

/// Haar-random `m × m` unitary.
///
/// # Safety
/// `out` must be writable; release the handle with `bv_unitary_free`.
#[no_mangle]
pub unsafe extern "C" fn bv_unitary_haar(
    m: usize,
    seed: u64,
    out: *mut *mut BvUnitary,
) -> BvStatus {
    guard(|| {
        let slot = out_ptr(out, "out")?;
        let u = haar_random_unitary(m, seed)?;
        *slot = Box::into_raw(Box::new(BvUnitary(u)));
        Ok(())
    })
}

/// Unitary from row-major real and imaginary parts; rejected unless
/// unitary to 1e-10.
///
/// # Safety
/// `re` and `im` must point to `m * m` doubles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn bv_unitary_from_parts(
    m: usize,
    re: *const f64,
    im: *const f64,
    out: *mut *mut BvUnitary,
) -> BvStatus {
    guard(|| {
        let slot = out_ptr(out, "out")?;
        let re = slice(re, m * m, "re")?;
        let im = slice(im, m * m, "im")?;
        let data = re
            .iter()
            .zip(im)
            .map(|(&a, &b)| Complex64::new(a, b))
            .collect();
        let u = UnitaryMatrix::new(Matrix::from_vec(m, m, data)?)?;
        *slot = Box::into_raw(Box::new(BvUnitary(u)));
        Ok(())
    })
}

/// # Safety
/// `p` must be a NUL-terminated path; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn bv_unitary_read(p: *const c_char, out: *mut *mut BvUnitary) -> BvStatus {
    guard(|| {
        let slot = out_ptr(out, "out")?;
        let u = UnitaryMatrix::read(&path(p)?)?;
        *slot = Box::into_raw(Box::new(BvUnitary(u)));
        Ok(())
    })
}

/// # Safety
/// `u` must be a live handle and `p` a NUL-terminated path.
#[no_mangle]
pub unsafe extern "C" fn bv_unitary_write(u: *const BvUnitary, p: *const c_char) -> BvStatus {
    guard(|| {
        deref(u, "unitary")?.0.write(&path(p)?)?;
        Ok(())
    })
}

/// Number of modes, or 0 for a NULL handle.
///
/// # Safety
/// `u` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn bv_unitary_modes(u: *const BvUnitary) -> usize {
    u.as_ref().map_or(0, |u| u.0.m())
}

/// # Safety
/// `u` must be NULL or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn bv_unitary_free(u: *mut BvUnitary) {
    if !u.is_null() {
        drop(Box::from_raw(u));
    }
}

unsafe fn state(
    modes: *const usize,
    n: usize,
    m: usize,
    what: &'static str,
) -> Result<ModeOccupation, Fail> {
    Ok(ModeOccupation::from_modes(slice(modes, n, what)?, m)?)
}

/// Probability of `n` photons entering `input_modes` and leaving in
/// `output_modes` (collision-free, 0-based) under `model`
/// (indistinguishable or distinguishable).
///
/// # Safety
/// `u` must be a live handle; both mode arrays must hold `n` entries.
#[no_mangle]
pub unsafe extern "C" fn bv_transition_probability(
    u: *const BvUnitary,
    input_modes: *const usize,
    output_modes: *const usize,
    n: usize,
    model_: BvModel,
    out: *mut f64,
) -> BvStatus {
    guard(|| {
        let u = &deref(u, "unitary")?.0;
        let s = state(input_modes, n, u.m(), "input_modes")?;
        let t = state(output_modes, n, u.m(), "output_modes")?;
        *out_ptr(out, "out")? = transition_probability(u, &s, &t, model(model_))?;
        Ok(())
    })
}

/// Draws `events` output events for photons in `input_modes` (0-based).
///
/// # Safety
/// `u` must be a live handle, `input_modes` must hold `n` entries and `out`
/// must be writable; release the sample with `bv_sample_free`.
#[no_mangle]
pub unsafe extern "C" fn bv_sample_draw(
    u: *const BvUnitary,
    input_modes: *const usize,
    n: usize,
    model_: BvModel,
    method: BvMethod,
    events: usize,
    seed: u64,
    out: *mut *mut BvSample,
) -> BvStatus {
    guard(|| {
        let slot = out_ptr(out, "out")?;
        let u = &deref(u, "unitary")?.0;
        let input = state(input_modes, n, u.m(), "input_modes")?;
        let method = match method {
            BvMethod::Exact => Method::Exact,
            BvMethod::Mcmc => Method::Mcmc,
        };
        let source = SampleSource::new(
            u.clone(),
            input,
            model(model_),
            method,
            McmcConfig::default(),
        )?;
        *slot = Box::into_raw(Box::new(BvSample(source.draw(events, seed)?)));
        Ok(())
    })
}

/// # Safety
/// `p` must be a NUL-terminated path; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn bv_sample_read(p: *const c_char, out: *mut *mut BvSample) -> BvStatus {
    guard(|| {
        let slot = out_ptr(out, "out")?;
        let s = EventSample::read(&path(p)?)?;
        *slot = Box::into_raw(Box::new(BvSample(s)));
        Ok(())
    })
}

/// # Safety
/// `s` must be a live handle and `p` a NUL-terminated path.
#[no_mangle]
pub unsafe extern "C" fn bv_sample_write(s: *const BvSample, p: *const c_char) -> BvStatus {
    guard(|| {
        deref(s, "sample")?.0.write(&path(p)?)?;
        Ok(())
    })
}

/// Number of events, or 0 for a NULL handle.
///
/// # Safety
/// `s` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn bv_sample_len(s: *const BvSample) -> usize {
    s.as_ref().map_or(0, |s| s.0.len())
}

/// Photons per event, or 0 for a NULL handle.
///
/// # Safety
/// `s` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn bv_sample_photons(s: *const BvSample) -> usize {
    s.as_ref().map_or(0, |s| s.0.n())
}

/// Modes of the interferometer, or 0 for a NULL handle.
///
/// # Safety
/// `s` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn bv_sample_modes(s: *const BvSample) -> usize {
    s.as_ref().map_or(0, |s| s.0.m())
}

/// Copies the occupied modes (0-based, ascending) of event `index` into
/// `out_modes`, which must have room for `bv_sample_photons(s)` entries.
///
/// # Safety
/// `s` must be a live handle; `out_modes` must be writable as described.
#[no_mangle]
pub unsafe extern "C" fn bv_sample_event(
    s: *const BvSample,
    index: usize,
    out_modes: *mut usize,
) -> BvStatus {
    guard(|| {
        let s = &deref(s, "sample")?.0;
        let e = s.events().get(index).ok_or_else(|| {
            Error::InvalidParameter(format!("event {index} out of range for {} events", s.len()))
        })?;
        if out_modes.is_null() {
            return Err(Fail::Null("out_modes"));
        }
        let dst = std::slice::from_raw_parts_mut(out_modes, s.n());
        dst.copy_from_slice(&e.modes());
        Ok(())
    })
}

/// # Safety
/// `s` must be NULL or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn bv_sample_free(s: *mut BvSample) {
    if !s.is_null() {
        drop(Box::from_raw(s));
    }
}

/// Learns a structure on `reference` and tests `candidate` against it.
/// K-means with more than one voting trial uses majority voting.
///
/// # Safety
/// Handles must be live; `cfg` and `out` must be valid pointers.
#[no_mangle]
pub unsafe extern "C" fn bv_compatibility_test(
    reference: *const BvSample,
    candidate: *const BvSample,
    cfg: *const BvClusteringConfig,
    alpha: f64,
    seed: u64,
    out: *mut BvTestResult,
) -> BvStatus {
    guard(|| {
        let r = &deref(reference, "reference")?.0;
        let c = &deref(candidate, "candidate")?.0;
        let cfg = config(deref(cfg, "config")?);
        let slot = out_ptr(out, "out")?;
        let v = validate(r, c, &cfg, alpha, seed)?;
        let first = &v.trials[0];
        *slot = BvTestResult {
            statistic: first.statistic,
            dof: first.dof,
            p_value: first.p_value,
            verdict: match v.verdict {
                Verdict::Compatible => BvVerdict::Compatible,
                Verdict::Incompatible => BvVerdict::Incompatible,
            },
            compatible_votes: v.compatible_votes,
            trials: v.trials.len(),
        };
        Ok(())
    })
}

/// Upper-tail probability of the χ² distribution.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn bv_chi_square_pvalue(
    statistic: f64,
    dof: usize,
    out: *mut f64,
) -> BvStatus {
    guard(|| {
        *out_ptr(out, "out")? = chi_square_pvalue(statistic, dof)?;
        Ok(())
    })
}
