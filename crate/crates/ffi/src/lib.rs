//! C ABI over `ucl-core`.
//!
//! Every function returns a [`UclStatus`]; results come back through out
//! pointers. On failure [`ucl_last_error`] describes what went wrong on the
//! calling thread. Handles are opaque and must be released with their
//! matching `*_free` function.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};

use ucl_core::data::TeamId;
use ucl_core::draw::{self, DrawError, DrawInput, DrawOptions, Schedule};
use ucl_core::elo::{expected_score, EloParams, EloState, MatchResult};
use ucl_core::glm::{self, DesignMatrix, FitError, ModelReport, RegressionModel};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum UclStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidInput = 2,
    /// The model could not be fitted (separation, singular design, one class).
    FitFailed = 3,
    /// No schedule satisfies the draw rules.
    Infeasible = 4,
    SearchLimit = 5,
    OutOfRange = 6,
    Panic = 7,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: impl Into<String>) {
    let msg = msg.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(msg).ok());
}

fn fail(status: UclStatus, msg: impl Into<String>) -> UclStatus {
    set_error(msg);
    status
}

/// Runs `f`, turning panics into [`UclStatus::Panic`].
fn guard(f: impl FnOnce() -> UclStatus) -> UclStatus {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(s) => s,
        Err(_) => fail(UclStatus::Panic, "internal panic"),
    }
}

fn fit_status(e: FitError) -> UclStatus {
    let s = match e {
        FitError::Design(_) | FitError::NonFinite { .. } => UclStatus::InvalidInput,
        _ => UclStatus::FitFailed,
    };
    fail(s, e.to_string())
}

fn draw_status(e: DrawError) -> UclStatus {
    let s = match e {
        DrawError::Infeasible { .. } => UclStatus::Infeasible,
        DrawError::SearchLimit { .. } => UclStatus::SearchLimit,
        _ => UclStatus::InvalidInput,
    };
    fail(s, e.to_string())
}

unsafe fn slice<'a, T>(p: *const T, n: usize) -> Option<&'a [T]> {
    if n == 0 {
        Some(&[])
    } else if p.is_null() {
        None
    } else {
        Some(std::slice::from_raw_parts(p, n))
    }
}

/// Message for the last failed call on this thread, or NULL. The pointer
/// stays valid until the next call into this library from the same thread.
#[no_mangle]
pub extern "C" fn ucl_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(std::ptr::null(), |s| s.as_ptr()))
}

// ---- Elo ----

/// Elo settings. The margin-of-victory table is fixed to the library default.
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct UclEloParams {
    pub scale: f64,
    pub k_factor: f64,
    pub home_advantage: f64,
    pub initial_rating: f64,
}

impl From<UclEloParams> for EloParams {
    fn from(p: UclEloParams) -> Self {
        EloParams {
            scale: p.scale,
            k_factor: p.k_factor,
            home_advantage: p.home_advantage,
            initial_rating: p.initial_rating,
            ..EloParams::default()
        }
    }
}

#[no_mangle]
pub extern "C" fn ucl_elo_params_default() -> UclEloParams {
    let p = EloParams::default();
    UclEloParams {
        scale: p.scale,
        k_factor: p.k_factor,
        home_advantage: p.home_advantage,
        initial_rating: p.initial_rating,
    }
}

/// Expected score of the home side.
///
/// # Safety
/// `out` must be NULL or point to writable memory for one double.
#[no_mangle]
pub unsafe extern "C" fn ucl_expected_score(
    params: UclEloParams,
    r_home: f64,
    r_away: f64,
    neutral: bool,
    out: *mut f64,
) -> UclStatus {
    guard(|| {
        if out.is_null() {
            return fail(UclStatus::NullPointer, "out is NULL");
        }
        let p = EloParams::from(params);
        if let Err(e) = p.validate() {
            return fail(UclStatus::InvalidInput, e.to_string());
        }
        match expected_score(r_home, r_away, &p, neutral) {
            Ok(w) => {
                *out = w;
                UclStatus::Ok
            }
            Err(e) => fail(UclStatus::InvalidInput, e.to_string()),
        }
    })
}

/// Ratings of both sides after one match.
///
/// # Safety
/// `new_home` and `new_away` must be NULL or point to writable doubles.
#[no_mangle]
pub unsafe extern "C" fn ucl_elo_update(
    params: UclEloParams,
    r_home: f64,
    r_away: f64,
    home_goals: u32,
    away_goals: u32,
    neutral: bool,
    new_home: *mut f64,
    new_away: *mut f64,
) -> UclStatus {
    guard(|| {
        if new_home.is_null() || new_away.is_null() {
            return fail(UclStatus::NullPointer, "output pointer is NULL");
        }
        let p = EloParams::from(params);
        if let Err(e) = p.validate() {
            return fail(UclStatus::InvalidInput, e.to_string());
        }
        let (h, a): (TeamId, TeamId) = ("home".into(), "away".into());
        let mut state = EloState::default();
        state.ratings.insert(h.clone(), r_home);
        state.ratings.insert(a.clone(), r_away);
        match state.update(&h, &a, MatchResult::from_goals(home_goals, away_goals), &p, neutral) {
            Ok((next, _)) => {
                *new_home = next.rating(&h, &p);
                *new_away = next.rating(&a, &p);
                UclStatus::Ok
            }
            Err(e) => fail(UclStatus::InvalidInput, e.to_string()),
        }
    })
}

// ---- logistic regression ----

/// A fitted binary logistic model.
pub struct UclLogit {
    model: RegressionModel,
    report: ModelReport,
}

/// Fits `y ~ 1 + x` where `x` is row-major with `n_features` columns.
/// Coefficient 0 is the intercept; coefficient `j + 1` belongs to column `j`.
///
/// # Safety
/// `x` must hold `n_rows * n_features` doubles and `y` `n_rows` bytes (0 or 1);
/// `out` must point to writable memory for one handle.
#[no_mangle]
pub unsafe extern "C" fn ucl_logit_fit(
    x: *const f64,
    y: *const u8,
    n_rows: usize,
    n_features: usize,
    out: *mut *mut UclLogit,
) -> UclStatus {
    guard(|| {
        if out.is_null() {
            return fail(UclStatus::NullPointer, "out is NULL");
        }
        *out = std::ptr::null_mut();
        let Some(cells) = n_rows.checked_mul(n_features) else {
            return fail(UclStatus::InvalidInput, "design too large");
        };
        let (Some(x), Some(y)) = (slice(x, cells), slice(y, n_rows)) else {
            return fail(UclStatus::NullPointer, "x or y is NULL");
        };
        let names: Vec<String> = (1..=n_features).map(|j| format!("x{j}")).collect();
        let columns: Vec<Vec<f64>> = (0..n_features)
            .map(|j| (0..n_rows).map(|i| x[i * n_features + j]).collect())
            .collect();
        let features: Vec<(&str, &[f64])> = names.iter().map(String::as_str).zip(columns.iter().map(Vec::as_slice)).collect();
        let result = DesignMatrix::binary(&features, y).and_then(|d| {
            let model = glm::fit_logistic(&d)?;
            let report = ModelReport::new(&model, &d)?;
            Ok(UclLogit { model, report })
        });
        match result {
            Ok(m) => {
                *out = Box::into_raw(Box::new(m));
                UclStatus::Ok
            }
            Err(e) => fit_status(e),
        }
    })
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct UclCoefficient {
    pub estimate: f64,
    pub std_error: f64,
    pub z: f64,
    pub p_value: f64,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct UclFitSummary {
    pub n: usize,
    pub log_lik_null: f64,
    pub log_lik_fit: f64,
    pub cox_snell_r2: f64,
    pub nagelkerke_r2: f64,
    /// NaN when undefined.
    pub mcfadden_r2: f64,
    /// Percent classified correctly at cut 0.5.
    pub classification_rate: f64,
    pub auc: f64,
}

/// Number of coefficients, intercept included. Returns 0 for NULL.
///
/// # Safety
/// `model` must be NULL or a live handle from [`ucl_logit_fit`].
#[no_mangle]
pub unsafe extern "C" fn ucl_logit_n_coefficients(model: *const UclLogit) -> usize {
    model.as_ref().map_or(0, |m| m.model.equations[0].coefficients.len())
}

/// # Safety
/// `model` must be NULL or a live handle; `out` NULL or writable.
#[no_mangle]
pub unsafe extern "C" fn ucl_logit_coefficient(
    model: *const UclLogit,
    index: usize,
    out: *mut UclCoefficient,
) -> UclStatus {
    guard(|| {
        let (Some(m), Some(out)) = (model.as_ref(), out.as_mut()) else {
            return fail(UclStatus::NullPointer, "model or out is NULL");
        };
        match m.model.equations[0].coefficients.get(index) {
            Some(c) => {
                *out = UclCoefficient {
                    estimate: c.estimate,
                    std_error: c.std_error,
                    z: c.z,
                    p_value: c.p_value,
                };
                UclStatus::Ok
            }
            None => fail(UclStatus::OutOfRange, format!("coefficient {index} does not exist")),
        }
    })
}

/// # Safety
/// `model` must be NULL or a live handle; `out` NULL or writable.
#[no_mangle]
pub unsafe extern "C" fn ucl_logit_summary(model: *const UclLogit, out: *mut UclFitSummary) -> UclStatus {
    guard(|| {
        let (Some(m), Some(out)) = (model.as_ref(), out.as_mut()) else {
            return fail(UclStatus::NullPointer, "model or out is NULL");
        };
        let r = &m.report;
        *out = UclFitSummary {
            n: r.n,
            log_lik_null: r.log_lik_null,
            log_lik_fit: r.log_lik_fit,
            cox_snell_r2: r.cox_snell_r2,
            nagelkerke_r2: r.nagelkerke_r2,
            mcfadden_r2: r.mcfadden_r2.unwrap_or(f64::NAN),
            classification_rate: r.classification_rate,
            auc: r.auc.first().map_or(f64::NAN, |a| a.1),
        };
        UclStatus::Ok
    })
}

/// # Safety
/// `model` must be NULL or a handle from [`ucl_logit_fit`] not yet freed.
#[no_mangle]
pub unsafe extern "C" fn ucl_logit_free(model: *mut UclLogit) {
    if !model.is_null() {
        drop(Box::from_raw(model));
    }
}

/// Area under the ROC curve; ties between classes count one half.
///
/// # Safety
/// `scores` and `labels` must hold `n` values; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ucl_roc_auc(scores: *const f64, labels: *const u8, n: usize, out: *mut f64) -> UclStatus {
    guard(|| {
        let (Some(s), Some(l)) = (slice(scores, n), slice(labels, n)) else {
            return fail(UclStatus::NullPointer, "scores or labels is NULL");
        };
        if out.is_null() {
            return fail(UclStatus::NullPointer, "out is NULL");
        }
        let labels: Vec<bool> = l.iter().map(|&v| v != 0).collect();
        match glm::roc_auc(s, &labels) {
            Ok(a) => {
                *out = a;
                UclStatus::Ok
            }
            // only bad input can make the area undefined
            Err(e) => fail(UclStatus::InvalidInput, e.to_string()),
        }
    })
}

// ---- draw ----

/// A drawn schedule together with the pots it was drawn from.
pub struct UclSchedule {
    input: DrawInput,
    schedule: Schedule,
    names: Vec<(CString, CString)>,
    exceptions_used: bool,
}

#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct UclFixture {
    /// Owned by the schedule handle; valid until it is freed.
    pub home: *const c_char,
    pub away: *const c_char,
    pub away_pot: usize,
}

unsafe fn run_draw(input: DrawInput, seed: u64, node_limit: u64, out: *mut *mut UclSchedule) -> UclStatus {
    let mut options = DrawOptions::default();
    if node_limit > 0 {
        options.node_limit = node_limit;
    }
    match draw::draw_with(&input, seed, options) {
        Ok(o) => {
            let names = o
                .schedule
                .fixtures
                .iter()
                .map(|f| {
                    let c = |s: &str| CString::new(s).unwrap_or_default();
                    (c(f.home.as_str()), c(f.away.as_str()))
                })
                .collect();
            *out = Box::into_raw(Box::new(UclSchedule {
                input,
                schedule: o.schedule,
                names,
                exceptions_used: o.exceptions_used,
            }));
            UclStatus::Ok
        }
        Err(e) => draw_status(e),
    }
}

/// Draws the bundled 36-club league. `node_limit` 0 keeps the default.
///
/// # Safety
/// `out` must point to writable memory for one handle.
#[no_mangle]
pub unsafe extern "C" fn ucl_draw_league(seed: u64, node_limit: u64, out: *mut *mut UclSchedule) -> UclStatus {
    guard(|| {
        if out.is_null() {
            return fail(UclStatus::NullPointer, "out is NULL");
        }
        *out = std::ptr::null_mut();
        run_draw(DrawInput::league_2024(), seed, node_limit, out)
    })
}

/// Draws from a `club,pot,association` CSV given as a NUL-terminated string.
///
/// # Safety
/// `pots_csv` must be a valid C string; `out` writable for one handle.
#[no_mangle]
pub unsafe extern "C" fn ucl_draw_from_csv(
    pots_csv: *const c_char,
    allow_exception: bool,
    seed: u64,
    node_limit: u64,
    out: *mut *mut UclSchedule,
) -> UclStatus {
    guard(|| {
        if out.is_null() || pots_csv.is_null() {
            return fail(UclStatus::NullPointer, "pots_csv or out is NULL");
        }
        *out = std::ptr::null_mut();
        match draw::parse_pots(CStr::from_ptr(pots_csv).to_bytes(), allow_exception) {
            Ok(input) => run_draw(input, seed, node_limit, out),
            Err(e) => draw_status(e),
        }
    })
}

/// Number of fixtures. Returns 0 for NULL.
///
/// # Safety
/// `s` must be NULL or a live schedule handle.
#[no_mangle]
pub unsafe extern "C" fn ucl_schedule_len(s: *const UclSchedule) -> usize {
    s.as_ref().map_or(0, |s| s.schedule.fixtures.len())
}

/// # Safety
/// `s` must be NULL or a live schedule handle; `out` NULL or writable.
#[no_mangle]
pub unsafe extern "C" fn ucl_schedule_fixture(s: *const UclSchedule, index: usize, out: *mut UclFixture) -> UclStatus {
    guard(|| {
        let (Some(s), Some(out)) = (s.as_ref(), out.as_mut()) else {
            return fail(UclStatus::NullPointer, "schedule or out is NULL");
        };
        match (s.schedule.fixtures.get(index), s.names.get(index)) {
            (Some(f), Some((h, a))) => {
                *out = UclFixture {
                    home: h.as_ptr(),
                    away: a.as_ptr(),
                    away_pot: f.away_pot,
                };
                UclStatus::Ok
            }
            _ => fail(UclStatus::OutOfRange, format!("fixture {index} does not exist")),
        }
    })
}

/// Whether the draw had to allow same-association fixtures.
///
/// # Safety
/// `s` must be NULL or a live schedule handle.
#[no_mangle]
pub unsafe extern "C" fn ucl_schedule_exceptions_used(s: *const UclSchedule) -> bool {
    s.as_ref().is_some_and(|s| s.exceptions_used)
}

/// Re-checks the schedule against the rules of its pots. `violations`
/// receives the number of broken rules.
///
/// # Safety
/// `s` must be NULL or a live schedule handle; `violations` NULL or writable.
#[no_mangle]
pub unsafe extern "C" fn ucl_schedule_validate(s: *const UclSchedule, violations: *mut usize) -> UclStatus {
    guard(|| {
        let (Some(s), Some(out)) = (s.as_ref(), violations.as_mut()) else {
            return fail(UclStatus::NullPointer, "schedule or violations is NULL");
        };
        *out = draw::validate(&s.input, &s.schedule).violations.len();
        UclStatus::Ok
    })
}

/// # Safety
/// `s` must be NULL or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn ucl_schedule_free(s: *mut UclSchedule) {
    if !s.is_null() {
        drop(Box::from_raw(s));
    }
}
