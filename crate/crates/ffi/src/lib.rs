//! C ABI over `onebit_emr`.
//!
//! Every fallible function returns an [`EmrStatus`] and writes its result
//! through an out-pointer. On failure a message is kept per thread and can
//! be read with [`emr_last_error_message`]. Scenarios and frames are opaque
//! handles owned by the caller and released with their `_free` function.

use std::cell::RefCell;
use std::ffi::{c_char, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use onebit_emr::cost::{checked_flop_count, checked_transistor_count, CostScheme};
use onebit_emr::detector::{emr_full, emr_one_bit_from_signs, threshold, ThresholdScheme, ThresholdSpec};
use onebit_emr::montecarlo::{estimate_rate, tags, Detector, Statistic, StreamPlan};
use onebit_emr::numerics::{chi_square_quantile, std_normal_quantile, RngStream};
use onebit_emr::quantizer::{full_res_scm, one_bit_quantize};
use onebit_emr::signal::{generate_frame, ComplexFrame, ScenarioConfig};
use onebit_emr::EmrError;

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EmrStatus {
    Ok = 0,
    NullPointer = 1,
    Domain = 2,
    Degenerate = 3,
    DimensionMismatch = 4,
    InvalidConfig = 5,
    Io = 6,
    Overflow = 7,
    Panic = 8,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EmrThresholdScheme {
    FullRes = 0,
    OneBitExact = 1,
    OneBitNormal = 2,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EmrStatistic {
    FullRes = 0,
    OneBit = 1,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EmrCostScheme {
    EightBit = 0,
    OneBit = 1,
}

/// Opaque sensing scenario.
pub struct EmrScenario(ScenarioConfig);

/// Opaque `m x n` complex snapshot matrix.
pub struct EmrFrame(ComplexFrame);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_last_error(msg: String) {
    let msg = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(msg));
}

fn status_of(e: &EmrError) -> EmrStatus {
    match e {
        EmrError::Domain(_) => EmrStatus::Domain,
        EmrError::Degenerate(_) => EmrStatus::Degenerate,
        EmrError::DimensionMismatch { .. } => EmrStatus::DimensionMismatch,
        EmrError::InvalidConfig(_) => EmrStatus::InvalidConfig,
        EmrError::Io(_) => EmrStatus::Io,
    }
}

struct Failure(EmrStatus, String);

impl From<EmrError> for Failure {
    fn from(e: EmrError) -> Self {
        Failure(status_of(&e), e.to_string())
    }
}

fn null(what: &str) -> Failure {
    Failure(EmrStatus::NullPointer, format!("{what} is null"))
}

/// Runs `f`, translating errors and panics into a status code.
fn guard(f: impl FnOnce() -> Result<(), Failure>) -> EmrStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => EmrStatus::Ok,
        Ok(Err(Failure(status, msg))) => {
            set_last_error(msg);
            status
        }
        Err(_) => {
            set_last_error("internal panic".into());
            EmrStatus::Panic
        }
    }
}

/// # Safety
/// `out` must be null or valid for a write of `T`.
unsafe fn write_out<T>(out: *mut T, value: T, what: &str) -> Result<(), Failure> {
    if out.is_null() {
        return Err(null(what));
    }
    out.write(value);
    Ok(())
}

/// Message for the last failing call on this thread, or null. The pointer
/// stays valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn emr_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn emr_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Standard normal quantile of `p` in (0, 1).
///
/// # Safety
/// `out` must be valid for writing one `double`.
#[no_mangle]
pub unsafe extern "C" fn emr_std_normal_quantile(p: f64, out: *mut f64) -> EmrStatus {
    guard(|| write_out(out, std_normal_quantile(p)?, "out"))
}

/// Quantile of the chi-square law with `q` degrees of freedom.
///
/// # Safety
/// `out` must be valid for writing one `double`.
#[no_mangle]
pub unsafe extern "C" fn emr_chi_square_quantile(p: f64, q: u64, out: *mut f64) -> EmrStatus {
    guard(|| write_out(out, chi_square_quantile(p, q)?, "out"))
}

/// Closed-form CFAR threshold for `m` antennas, `n` samples and false-alarm
/// target `epsilon`.
///
/// # Safety
/// `out` must be valid for writing one `double`.
#[no_mangle]
pub unsafe extern "C" fn emr_threshold(
    m: usize,
    n: usize,
    epsilon: f64,
    scheme: EmrThresholdScheme,
    out: *mut f64,
) -> EmrStatus {
    let scheme = match scheme {
        EmrThresholdScheme::FullRes => ThresholdScheme::FullRes,
        EmrThresholdScheme::OneBitExact => ThresholdScheme::OneBitExact,
        EmrThresholdScheme::OneBitNormal => ThresholdScheme::OneBitNormal,
    };
    guard(|| write_out(out, threshold(&ThresholdSpec::new(m, n, epsilon, scheme)?)?, "out"))
}

/// Flop and transistor counts. Fails with `Overflow` when a count does not
/// fit in 64 bits.
///
/// # Safety
/// `flops` and `transistors` must each be valid for writing one `uint64_t`.
#[no_mangle]
pub unsafe extern "C" fn emr_cost(
    scheme: EmrCostScheme,
    m: u64,
    n: u64,
    flops: *mut u64,
    transistors: *mut u64,
) -> EmrStatus {
    let scheme = match scheme {
        EmrCostScheme::EightBit => CostScheme::EightBit,
        EmrCostScheme::OneBit => CostScheme::OneBit,
    };
    guard(|| {
        let narrow = |v: Option<u128>| {
            v.and_then(|v| u64::try_from(v).ok())
                .ok_or_else(|| Failure(EmrStatus::Overflow, format!("{scheme} counts for m={m}, n={n} exceed 64 bits")))
        };
        let f = narrow(checked_flop_count(scheme, m, n))?;
        let t = narrow(checked_transistor_count(scheme, m, n))?;
        write_out(flops, f, "flops")?;
        write_out(transistors, t, "transistors")
    })
}

unsafe fn new_scenario(cfg: ScenarioConfig, out: *mut *mut EmrScenario) -> Result<(), Failure> {
    cfg.validate()?;
    write_out(out, Box::into_raw(Box::new(EmrScenario(cfg))), "out")
}

/// Noise-only scenario with unit noise power.
///
/// # Safety
/// `out` must be valid for writing one pointer.
#[no_mangle]
pub unsafe extern "C" fn emr_scenario_noise_only(m: usize, n: usize, out: *mut *mut EmrScenario) -> EmrStatus {
    guard(|| new_scenario(ScenarioConfig::noise_only(m, n), out))
}

/// One primary user at `angle` radians and `snr_db`, unit noise power.
///
/// # Safety
/// `out` must be valid for writing one pointer.
#[no_mangle]
pub unsafe extern "C" fn emr_scenario_single_pu(
    m: usize,
    n: usize,
    snr_db: f64,
    angle: f64,
    out: *mut *mut EmrScenario,
) -> EmrStatus {
    guard(|| new_scenario(ScenarioConfig::single_pu(m, n, snr_db, angle), out))
}

/// # Safety
/// `scenario` must be null or a handle from an `emr_scenario_*` constructor
/// that has not been freed.
#[no_mangle]
pub unsafe extern "C" fn emr_scenario_free(scenario: *mut EmrScenario) {
    if !scenario.is_null() {
        drop(Box::from_raw(scenario));
    }
}

/// Draws one frame of `scenario` from the random stream
/// `(master_seed, stream_id)`.
///
/// # Safety
/// `scenario` must be a live handle; `out` must be valid for writing one
/// pointer.
#[no_mangle]
pub unsafe extern "C" fn emr_frame_generate(
    scenario: *const EmrScenario,
    master_seed: u64,
    stream_id: u64,
    out: *mut *mut EmrFrame,
) -> EmrStatus {
    guard(|| {
        let s = scenario.as_ref().ok_or_else(|| null("scenario"))?;
        let frame = generate_frame(&s.0, &mut RngStream::new(master_seed, stream_id))?;
        write_out(out, Box::into_raw(Box::new(EmrFrame(frame))), "out")
    })
}

/// Frame from row-major real and imaginary planes of `m * n` doubles each.
///
/// # Safety
/// `re` and `im` must each point to `m * n` readable doubles; `out` must be
/// valid for writing one pointer.
#[no_mangle]
pub unsafe extern "C" fn emr_frame_from_planes(
    m: usize,
    n: usize,
    re: *const f64,
    im: *const f64,
    out: *mut *mut EmrFrame,
) -> EmrStatus {
    guard(|| {
        if re.is_null() || im.is_null() {
            return Err(null("re/im"));
        }
        let len = m.checked_mul(n).ok_or_else(|| Failure(EmrStatus::Overflow, "m * n overflows".into()))?;
        let re = std::slice::from_raw_parts(re, len).to_vec();
        let im = std::slice::from_raw_parts(im, len).to_vec();
        let frame = ComplexFrame::from_planes(m, n, re, im)?;
        write_out(out, Box::into_raw(Box::new(EmrFrame(frame))), "out")
    })
}

/// # Safety
/// `frame` must be null or a live frame handle.
#[no_mangle]
pub unsafe extern "C" fn emr_frame_free(frame: *mut EmrFrame) {
    if !frame.is_null() {
        drop(Box::from_raw(frame));
    }
}

/// EMR statistic of a frame, one-bit or full resolution.
///
/// # Safety
/// `frame` must be a live handle; `out` must be valid for writing one
/// `double`.
#[no_mangle]
pub unsafe extern "C" fn emr_frame_statistic(
    frame: *const EmrFrame,
    statistic: EmrStatistic,
    out: *mut f64,
) -> EmrStatus {
    guard(|| {
        let f = &frame.as_ref().ok_or_else(|| null("frame"))?.0;
        let value = match statistic {
            EmrStatistic::OneBit => emr_one_bit_from_signs(&one_bit_quantize(f)),
            EmrStatistic::FullRes => emr_full(&full_res_scm(f)?)?,
        };
        write_out(out, value, "out")
    })
}

/// Monte Carlo estimate of `P(statistic > threshold)` over `trials` frames
/// of `scenario`: a false-alarm rate for noise-only scenarios, a detection
/// rate otherwise. Deterministic in `master_seed` for any `workers`.
///
/// # Safety
/// `scenario` must be a live handle; `rate` must be valid for writing one
/// `double`.
#[no_mangle]
pub unsafe extern "C" fn emr_estimate_rate(
    scenario: *const EmrScenario,
    statistic: EmrStatistic,
    threshold: f64,
    trials: usize,
    master_seed: u64,
    workers: usize,
    rate: *mut f64,
) -> EmrStatus {
    guard(|| {
        let s = &scenario.as_ref().ok_or_else(|| null("scenario"))?.0;
        let statistic = match statistic {
            EmrStatistic::OneBit => Statistic::OneBit,
            EmrStatistic::FullRes => Statistic::FullRes,
        };
        let plan = StreamPlan::new(master_seed, tags::AD_HOC, 0);
        let r = estimate_rate(s, Detector { statistic, threshold }, trials, plan, workers.max(1))?;
        write_out(rate, r.rate, "rate")
    })
}
