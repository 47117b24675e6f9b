//! C interface to `ete_assign`.
//!
//! Problems and lotteries cross the boundary as opaque handles created from
//! JSON and released with their `_free` functions. Every fallible call
//! returns an [`EteStatus`]; on failure, [`ete_last_error`] describes the
//! most recent error on the calling thread. Strings returned through out
//! parameters are owned by the caller and released with [`ete_string_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use ete_assign::efficiency::{is_oe, is_re, solve_re};
use ete_assign::ete::{check_ete, ete_reassign, GeneratorMode};
use ete_assign::feasibility::EnumerationBudget;
use ete_assign::io;
use ete_assign::mechanisms::{run_pipeline, PriorityList};
use ete_assign::{Error, Lottery, Problem};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EteStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    Parse = 3,
    InvalidInput = 4,
    BudgetExceeded = 5,
    AssumptionViolated = 6,
    NotConsecutiveEquals = 7,
    NotDownwardClosed = 8,
    Unsupported = 9,
    Panic = 10,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EteMode {
    Cyclic = 0,
    Full = 1,
}

/// An instance together with the enumeration budget used for it.
pub struct EteProblem {
    problem: Problem,
    budget: EnumerationBudget,
}

pub struct EteLottery {
    lottery: Lottery,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_last_error(message: String) {
    let c = CString::new(message.replace('\0', " ")).expect("nul bytes removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(e: &Error) -> EteStatus {
    match e {
        Error::Parse { .. } => EteStatus::Parse,
        Error::EnumerationBudgetExceeded(_) => EteStatus::BudgetExceeded,
        Error::AssumptionViolated { .. } => EteStatus::AssumptionViolated,
        Error::NotConsecutiveEquals(_) => EteStatus::NotConsecutiveEquals,
        Error::NotDownwardClosed(_) | Error::InfeasibleStart => EteStatus::NotDownwardClosed,
        Error::Unsupported(_) => EteStatus::Unsupported,
        _ => EteStatus::InvalidInput,
    }
}

enum Failure {
    Status(EteStatus, String),
    Lib(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Lib(e)
    }
}

fn guard(f: impl FnOnce() -> Result<(), Failure>) -> EteStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => EteStatus::Ok,
        Ok(Err(Failure::Status(s, m))) => {
            set_last_error(m);
            s
        }
        Ok(Err(Failure::Lib(e))) => {
            set_last_error(e.to_string());
            status_of(&e)
        }
        Err(_) => {
            set_last_error("internal panic".into());
            EteStatus::Panic
        }
    }
}

unsafe fn str_arg<'a>(s: *const c_char, name: &str) -> Result<&'a str, Failure> {
    if s.is_null() {
        return Err(Failure::Status(EteStatus::NullPointer, format!("{name} is null")));
    }
    CStr::from_ptr(s)
        .to_str()
        .map_err(|_| Failure::Status(EteStatus::InvalidUtf8, format!("{name} is not UTF-8")))
}

unsafe fn ref_arg<'a, T>(p: *const T, name: &str) -> Result<&'a T, Failure> {
    p.as_ref()
        .ok_or_else(|| Failure::Status(EteStatus::NullPointer, format!("{name} is null")))
}

fn out_arg<T>(p: *mut T, name: &str) -> Result<(), Failure> {
    if p.is_null() {
        Err(Failure::Status(EteStatus::NullPointer, format!("{name} is null")))
    } else {
        Ok(())
    }
}

fn mode_of(mode: EteMode) -> GeneratorMode {
    match mode {
        EteMode::Cyclic => GeneratorMode::Cyclic,
        EteMode::Full => GeneratorMode::Full,
    }
}

fn into_c_string(s: String) -> *mut c_char {
    CString::new(s).expect("JSON has no nul bytes").into_raw()
}

/// Message for the last failed call on this thread, or null. The pointer is
/// valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn ete_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// # Safety
/// `s` must be null or a string returned by this library.
#[no_mangle]
pub unsafe extern "C" fn ete_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// # Safety
/// `json` must be a nul-terminated string and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn ete_problem_from_json(json: *const c_char, out: *mut *mut EteProblem) -> EteStatus {
    guard(|| {
        out_arg(out, "out")?;
        let text = str_arg(json, "json")?;
        let problem = io::parse_problem(text, "<json>")?;
        *out = Box::into_raw(Box::new(EteProblem {
            problem,
            budget: EnumerationBudget::default(),
        }));
        Ok(())
    })
}

/// # Safety
/// `p` must be null or a handle from [`ete_problem_from_json`] not yet freed.
#[no_mangle]
pub unsafe extern "C" fn ete_problem_free(p: *mut EteProblem) {
    if !p.is_null() {
        drop(Box::from_raw(p));
    }
}

/// # Safety
/// `p` must be a live problem handle.
#[no_mangle]
pub unsafe extern "C" fn ete_problem_set_budget(
    p: *mut EteProblem,
    max_tested: usize,
    max_retained: usize,
) -> EteStatus {
    guard(|| {
        let p = p
            .as_mut()
            .ok_or_else(|| Failure::Status(EteStatus::NullPointer, "problem is null".into()))?;
        p.budget = EnumerationBudget {
            max_tested,
            max_retained,
        };
        Ok(())
    })
}

/// # Safety
/// `p` must be a live problem handle; `agents` and `objects` writable.
#[no_mangle]
pub unsafe extern "C" fn ete_problem_dimensions(
    p: *const EteProblem,
    agents: *mut usize,
    objects: *mut usize,
) -> EteStatus {
    guard(|| {
        let p = ref_arg(p, "problem")?;
        out_arg(agents, "agents")?;
        out_arg(objects, "objects")?;
        *agents = p.problem.agent_count();
        *objects = p.problem.object_count();
        Ok(())
    })
}

/// # Safety
/// `p` must be a live problem handle, `json` a nul-terminated string and
/// `out` writable.
#[no_mangle]
pub unsafe extern "C" fn ete_lottery_from_json(
    p: *const EteProblem,
    json: *const c_char,
    out: *mut *mut EteLottery,
) -> EteStatus {
    guard(|| {
        let p = ref_arg(p, "problem")?;
        out_arg(out, "out")?;
        let text = str_arg(json, "json")?;
        let lottery = io::parse_lottery(text, "<json>", &p.problem)?;
        *out = Box::into_raw(Box::new(EteLottery { lottery }));
        Ok(())
    })
}

/// # Safety
/// `l` must be null or a lottery handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn ete_lottery_free(l: *mut EteLottery) {
    if !l.is_null() {
        drop(Box::from_raw(l));
    }
}

/// Writes the lottery as a JSON list of `{assignment, probability}`.
///
/// # Safety
/// `l` must be a live lottery handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn ete_lottery_to_json(l: *const EteLottery, out: *mut *mut c_char) -> EteStatus {
    guard(|| {
        let l = ref_arg(l, "lottery")?;
        out_arg(out, "out")?;
        *out = into_c_string(io::lottery_json(&l.lottery).to_string());
        Ok(())
    })
}

/// Writes every agent's marginal as JSON, probabilities as exact fractions.
///
/// # Safety
/// Handles must be live and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn ete_lottery_marginals_json(
    p: *const EteProblem,
    l: *const EteLottery,
    out: *mut *mut c_char,
) -> EteStatus {
    guard(|| {
        let p = ref_arg(p, "problem")?;
        let l = ref_arg(l, "lottery")?;
        out_arg(out, "out")?;
        *out = into_c_string(io::marginals_json(&l.lottery, &p.problem).to_string());
        Ok(())
    })
}

/// Serial dictatorship along `alpha` (agent indices, highest priority
/// first) followed by the reassignment.
///
/// # Safety
/// `p` must be a live problem handle, `alpha` point to `len` indices and
/// `out` be writable.
#[no_mangle]
pub unsafe extern "C" fn ete_run_pipeline(
    p: *const EteProblem,
    alpha: *const usize,
    len: usize,
    mode: EteMode,
    out: *mut *mut EteLottery,
) -> EteStatus {
    guard(|| {
        let p = ref_arg(p, "problem")?;
        out_arg(out, "out")?;
        if alpha.is_null() && len > 0 {
            return Err(Failure::Status(EteStatus::NullPointer, "alpha is null".into()));
        }
        let order = if len == 0 {
            Vec::new()
        } else {
            std::slice::from_raw_parts(alpha, len).to_vec()
        };
        let list = PriorityList::new(order, p.problem.agent_count())?;
        let lottery = run_pipeline(&p.problem, &list, mode_of(mode), p.budget)?;
        *out = Box::into_raw(Box::new(EteLottery { lottery }));
        Ok(())
    })
}

/// # Safety
/// Handles must be live and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn ete_reassign_lottery(
    p: *const EteProblem,
    l: *const EteLottery,
    mode: EteMode,
    out: *mut *mut EteLottery,
) -> EteStatus {
    guard(|| {
        let p = ref_arg(p, "problem")?;
        let l = ref_arg(l, "lottery")?;
        out_arg(out, "out")?;
        let lottery = ete_reassign(&l.lottery, &p.problem, mode_of(mode), p.budget)?;
        *out = Box::into_raw(Box::new(EteLottery { lottery }));
        Ok(())
    })
}

/// # Safety
/// Handles must be live and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn ete_is_ete(p: *const EteProblem, l: *const EteLottery, out: *mut bool) -> EteStatus {
    guard(|| {
        let p = ref_arg(p, "problem")?;
        let l = ref_arg(l, "lottery")?;
        out_arg(out, "out")?;
        *out = check_ete(&l.lottery, &p.problem).is_none();
        Ok(())
    })
}

/// # Safety
/// Handles must be live and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn ete_is_oe(p: *const EteProblem, l: *const EteLottery, out: *mut bool) -> EteStatus {
    guard(|| {
        let p = ref_arg(p, "problem")?;
        let l = ref_arg(l, "lottery")?;
        out_arg(out, "out")?;
        let ys = p.problem.feasible().enumerate(&p.problem, p.budget)?;
        *out = is_oe(&l.lottery, &ys, &p.problem)?.is_efficient();
        Ok(())
    })
}

/// # Safety
/// Handles must be live and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn ete_is_re(p: *const EteProblem, l: *const EteLottery, out: *mut bool) -> EteStatus {
    guard(|| {
        let p = ref_arg(p, "problem")?;
        let l = ref_arg(l, "lottery")?;
        out_arg(out, "out")?;
        let ys = p.problem.feasible().enumerate(&p.problem, p.budget)?;
        let optimum = solve_re(&ys, &p.problem)?;
        *out = is_re(&l.lottery, &optimum, &p.problem);
        Ok(())
    })
}
