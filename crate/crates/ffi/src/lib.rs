//! C ABI for the dynlend solvers.
//!
//! Objects cross the boundary as opaque handles that the caller frees with the
//! matching `*_free` function. Every fallible call returns a [`DlStatus`]; on
//! failure the message is kept per thread and can be read with
//! [`dl_last_error`]. Panics are caught and reported as `DL_STATUS_PANIC`.

use std::cell::RefCell;
use std::ffi::{c_char, CStr};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use dynlend::demand::{solve_d_star, DemandFunction};
use dynlend::endo_policy::{ge_constant_elasticity, threshold_endo, EndoParams};
use dynlend::exo_policy::{le_trajectory_exo, threshold_exo, uniform_closed_form, ExoModel, ExoParams};
use dynlend::income_dist::IncomeDistribution;
use dynlend::mc_sim::{simulate_cohort, SimConfig, SimPolicy};
use dynlend::value_fn::ViConfig;
use dynlend::Error;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DlStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    InvalidParameter = 3,
    Domain = 4,
    NoBracket = 5,
    NonConvergence = 6,
    Regime = 7,
    Assumption = 8,
    Config = 9,
    Io = 10,
    BufferTooSmall = 11,
    Panic = 12,
}

/// Income distribution handle.
pub struct DlDistribution(IncomeDistribution);

/// Demand curve handle.
pub struct DlDemand(DemandFunction);

/// Solved fixed-discount model handle.
pub struct DlExoModel(ExoModel);

/// Closed-form solution for uniform income.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct DlUniformClosedForm {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    /// Policy slope below the threshold.
    pub m: f64,
    pub n: f64,
    pub x_bar: f64,
}

/// Grand Experiment: first offer `(y0, d0)`, then `(y_inf, d_inf)` forever.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct DlGePolicy {
    pub y0: f64,
    pub d0: f64,
    pub y_inf: f64,
    pub d_inf: f64,
    pub x_bar: f64,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct DlSimSummary {
    pub n_paths: u64,
    pub mean_npv: f64,
    pub std_error: f64,
    pub balked: u64,
    pub never_defaulted: u64,
}

/// Per-node series of a solved model.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DlSeries {
    Grid = 0,
    Value = 1,
    Policy = 2,
}

thread_local! {
    static LAST_ERROR: RefCell<String> = const { RefCell::new(String::new()) };
}

struct Failure(DlStatus, String);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let status = match &e {
            Error::InvalidParameter(_) => DlStatus::InvalidParameter,
            Error::Domain(_) => DlStatus::Domain,
            Error::NoBracket { .. } => DlStatus::NoBracket,
            Error::NonConvergence { .. } => DlStatus::NonConvergence,
            Error::Regime { .. } => DlStatus::Regime,
            Error::Assumption(_) => DlStatus::Assumption,
            Error::Config(_) => DlStatus::Config,
            Error::Io(_) => DlStatus::Io,
        };
        Failure(status, e.to_string())
    }
}

fn null(what: &str) -> Failure {
    Failure(DlStatus::NullPointer, format!("{what} is null"))
}

fn guard<F: FnOnce() -> Result<(), Failure>>(f: F) -> DlStatus {
    let (status, msg) = match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => (DlStatus::Ok, String::new()),
        Ok(Err(Failure(s, m))) => (s, m),
        Err(p) => {
            let m = p
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| p.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panic".into());
            (DlStatus::Panic, m)
        }
    };
    LAST_ERROR.with(|e| *e.borrow_mut() = msg);
    status
}

unsafe fn read_str<'a>(s: *const c_char) -> Result<&'a str, Failure> {
    if s.is_null() {
        return Err(null("string argument"));
    }
    CStr::from_ptr(s).to_str().map_err(|e| Failure(DlStatus::InvalidUtf8, e.to_string()))
}

unsafe fn handle<'a, T>(p: *const T, what: &str) -> Result<&'a T, Failure> {
    p.as_ref().ok_or_else(|| null(what))
}

unsafe fn write<T>(out: *mut T, value: T) -> Result<(), Failure> {
    if out.is_null() {
        return Err(null("output pointer"));
    }
    out.write(value);
    Ok(())
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn dl_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Copies the calling thread's last error message into `buf`.
///
/// Returns the buffer size needed including the terminating NUL; the copy is
/// truncated when `cap` is smaller. An empty message means the last call
/// succeeded.
///
/// # Safety
/// `buf` must be null or valid for `cap` bytes.
#[no_mangle]
pub unsafe extern "C" fn dl_last_error(buf: *mut c_char, cap: usize) -> usize {
    LAST_ERROR.with(|e| {
        let msg = e.borrow();
        let bytes = msg.as_bytes();
        if !buf.is_null() && cap > 0 {
            let n = bytes.len().min(cap - 1);
            ptr::copy_nonoverlapping(bytes.as_ptr(), buf.cast::<u8>(), n);
            *buf.add(n) = 0;
        }
        bytes.len() + 1
    })
}

/// Parses a distribution from JSON such as `{"kind":"beta","params":{"a":2,"b":2}}`.
///
/// # Safety
/// `json` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn dl_distribution_from_json(json: *const c_char, out: *mut *mut DlDistribution) -> DlStatus {
    guard(|| {
        let dist = IncomeDistribution::from_json(read_str(json)?)?;
        write(out, Box::into_raw(Box::new(DlDistribution(dist))))
    })
}

/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn dl_distribution_uniform(out: *mut *mut DlDistribution) -> DlStatus {
    guard(|| write(out, Box::into_raw(Box::new(DlDistribution(IncomeDistribution::uniform())))))
}

/// # Safety
/// `dist` must be null or a handle from this library not yet freed.
#[no_mangle]
pub unsafe extern "C" fn dl_distribution_free(dist: *mut DlDistribution) {
    if !dist.is_null() {
        drop(Box::from_raw(dist));
    }
}

/// Survival `P(income >= x)`.
///
/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn dl_distribution_survival(dist: *const DlDistribution, x: f64, out: *mut f64) -> DlStatus {
    guard(|| write(out, handle(dist, "distribution")?.0.survival(x)))
}

/// `G(x) = x f(x) / S(x)`.
///
/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn dl_distribution_g_value(dist: *const DlDistribution, x: f64, out: *mut f64) -> DlStatus {
    guard(|| write(out, handle(dist, "distribution")?.0.g_value(x)?))
}

/// Parses a demand curve from JSON such as `{"kind":"exponential","params":{"rate":3}}`.
///
/// # Safety
/// `json` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn dl_demand_from_json(json: *const c_char, out: *mut *mut DlDemand) -> DlStatus {
    guard(|| {
        let demand = DemandFunction::from_json(read_str(json)?)?;
        write(out, Box::into_raw(Box::new(DlDemand(demand))))
    })
}

/// `s(d) = d^alpha`.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn dl_demand_constant_elasticity(alpha: f64, out: *mut *mut DlDemand) -> DlStatus {
    guard(|| {
        let demand = DemandFunction::constant_elasticity(alpha)?;
        write(out, Box::into_raw(Box::new(DlDemand(demand))))
    })
}

/// # Safety
/// `demand` must be null or a handle from this library not yet freed.
#[no_mangle]
pub unsafe extern "C" fn dl_demand_free(demand: *mut DlDemand) {
    if !demand.is_null() {
        drop(Box::from_raw(demand));
    }
}

/// Long-run discount factor `d*`.
///
/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn dl_solve_d_star(demand: *const DlDemand, rho: f64, out: *mut f64) -> DlStatus {
    guard(|| write(out, solve_d_star(&handle(demand, "demand")?.0, rho)?))
}

/// Experimentation threshold with a fixed discount `d`.
///
/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn dl_threshold_exo(dist: *const DlDistribution, rho: f64, d: f64, out: *mut f64) -> DlStatus {
    guard(|| {
        let params = ExoParams::new(rho, d)?;
        write(out, threshold_exo(&handle(dist, "distribution")?.0, &params)?)
    })
}

/// Experimentation threshold with an endogenous discount.
///
/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn dl_threshold_endo(
    dist: *const DlDistribution,
    demand: *const DlDemand,
    rho: f64,
    out: *mut f64,
) -> DlStatus {
    guard(|| {
        let params = EndoParams::new(rho, handle(demand, "demand")?.0.clone())?;
        write(out, threshold_endo(&handle(dist, "distribution")?.0, &params)?)
    })
}

/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn dl_uniform_closed_form(rho: f64, d: f64, out: *mut DlUniformClosedForm) -> DlStatus {
    guard(|| {
        let cf = uniform_closed_form(&ExoParams::new(rho, d)?)?;
        write(out, DlUniformClosedForm { a: cf.a, b: cf.b, c: cf.c, m: cf.m, n: cf.n, x_bar: cf.x_bar })
    })
}

/// Grand Experiment for a constant-elasticity demand and no income signal.
///
/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn dl_ge_constant_elasticity(
    dist: *const DlDistribution,
    demand: *const DlDemand,
    rho: f64,
    out: *mut DlGePolicy,
) -> DlStatus {
    guard(|| {
        let params = EndoParams::new(rho, handle(demand, "demand")?.0.clone())?;
        let ge = ge_constant_elasticity(&handle(dist, "distribution")?.0, &params)?;
        write(out, DlGePolicy { y0: ge.y0, d0: ge.d0, y_inf: ge.y_inf, d_inf: ge.d_inf, x_bar: ge.x_bar })
    })
}

/// Solves the fixed-discount model by value iteration. `grid_size` or `tol`
/// of 0 selects the default.
///
/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn dl_exo_model_solve(
    dist: *const DlDistribution,
    rho: f64,
    d: f64,
    grid_size: usize,
    tol: f64,
    out: *mut *mut DlExoModel,
) -> DlStatus {
    guard(|| {
        let mut cfg = ViConfig::default();
        if grid_size > 0 {
            cfg.grid_size = grid_size;
        }
        if tol > 0.0 {
            cfg.tol = tol;
        }
        let model = ExoModel::solve(&handle(dist, "distribution")?.0, &ExoParams::new(rho, d)?, &cfg)?;
        write(out, Box::into_raw(Box::new(DlExoModel(model))))
    })
}

/// # Safety
/// `model` must be null or a handle from this library not yet freed.
#[no_mangle]
pub unsafe extern "C" fn dl_exo_model_free(model: *mut DlExoModel) {
    if !model.is_null() {
        drop(Box::from_raw(model));
    }
}

/// Number of grid nodes; 0 for a null handle.
///
/// # Safety
/// `model` must be null or valid.
#[no_mangle]
pub unsafe extern "C" fn dl_exo_model_len(model: *const DlExoModel) -> usize {
    model.as_ref().map_or(0, |m| m.0.vf.len())
}

/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn dl_exo_model_x_bar(model: *const DlExoModel, out: *mut f64) -> DlStatus {
    guard(|| write(out, handle(model, "model")?.0.x_bar))
}

/// Expected NPV with no income information.
///
/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn dl_exo_model_dynamic_npv(model: *const DlExoModel, out: *mut f64) -> DlStatus {
    guard(|| write(out, handle(model, "model")?.0.dynamic_npv()))
}

/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn dl_exo_model_value_at(model: *const DlExoModel, x: f64, out: *mut f64) -> DlStatus {
    guard(|| write(out, handle(model, "model")?.0.value(x)))
}

/// Copies one per-node series into `buf`, which must hold
/// `dl_exo_model_len(model)` values.
///
/// # Safety
/// `buf` must be valid for `cap` doubles.
#[no_mangle]
pub unsafe extern "C" fn dl_exo_model_copy(
    model: *const DlExoModel,
    series: DlSeries,
    buf: *mut f64,
    cap: usize,
) -> DlStatus {
    guard(|| {
        let vf = &handle(model, "model")?.0.vf;
        let src: &[f64] = match series {
            DlSeries::Grid => vf.points(),
            DlSeries::Value => &vf.values,
            DlSeries::Policy => &vf.policy,
        };
        if buf.is_null() {
            return Err(null("buffer"));
        }
        if cap < src.len() {
            return Err(Failure(DlStatus::BufferTooSmall, format!("need {} values, got {cap}", src.len())));
        }
        ptr::copy_nonoverlapping(src.as_ptr(), buf, src.len());
        Ok(())
    })
}

/// Monte Carlo replay of the model's Lean Experimentation policy.
///
/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn dl_exo_model_simulate(
    model: *const DlExoModel,
    n_paths: usize,
    seed: u64,
    antithetic: bool,
    out: *mut DlSimSummary,
) -> DlStatus {
    guard(|| {
        let m = &handle(model, "model")?.0;
        let cfg = SimConfig { n_paths, seed, antithetic, rho: m.params.rho, ..SimConfig::default() };
        let traj = le_trajectory_exo(m, 0.0, cfg.horizon);
        let r = simulate_cohort(&m.dist, &SimPolicy::exogenous(&traj, m.params.d)?, &cfg)?;
        write(
            out,
            DlSimSummary {
                n_paths: r.n_paths as u64,
                mean_npv: r.mean_npv,
                std_error: r.std_error,
                balked: r.balked,
                never_defaulted: r.never_defaulted,
            },
        )
    })
}
