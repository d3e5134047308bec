//! C ABI for the qmqkd simulator.
//!
//! Objects are opaque handles created by `*_new`/`*_run` style functions and
//! released with the matching `*_free`. Every fallible call returns a
//! [`QmStatus`]; on failure [`qm_last_error_message`] describes the error on
//! the calling thread.

use std::cell::RefCell;
use std::ffi::{c_char, c_int, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};

use qmqkd::config::ScenarioConfig;
use qmqkd::interferometer::{fading_scan, interference_power, random_link, visibility, LinkSpec};
use qmqkd::optics::MirrorKind;
use qmqkd::qkd::{calibrate, simulate_session, SessionResult};
use qmqkd::su2::{Complex, JonesVector, Matrix2c};
use qmqkd::Error;

/// Status code returned by every fallible function.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QmStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    Config = 3,
    Calibration = 4,
    Io = 5,
    OutOfRange = 6,
    Panic = 7,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QmMirrorKind {
    QwpReflector = 0,
    FaradayMirror = 1,
    PlainMirror = 2,
}

impl From<QmMirrorKind> for MirrorKind {
    fn from(k: QmMirrorKind) -> Self {
        match k {
            QmMirrorKind::QwpReflector => MirrorKind::QwpReflector,
            QmMirrorKind::FaradayMirror => MirrorKind::FaradayMirror,
            QmMirrorKind::PlainMirror => MirrorKind::PlainMirror,
        }
    }
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct QmFadingSummary {
    pub samples: usize,
    pub min: f64,
    pub mean: f64,
    pub p5: f64,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct QmSessionBin {
    pub t_s: f64,
    pub phase_error: f64,
    pub qber: f64,
    pub rate_bps: f64,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct QmSessionSummary {
    pub bins: usize,
    pub mean_qber: f64,
    pub std_qber: f64,
    pub mean_rate_bps: f64,
    pub std_rate_bps: f64,
}

/// An interferometric link (opaque).
pub struct QmLink(LinkSpec);

/// A scenario configuration (opaque).
pub struct QmScenario(ScenarioConfig);

/// A finished session (opaque).
pub struct QmSession(SessionResult);

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: impl Into<String>) {
    let msg = CString::new(msg.into().replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = msg);
}

fn status_of(e: &Error) -> QmStatus {
    match e {
        Error::InvalidArgument(_) => QmStatus::InvalidArgument,
        Error::Config(_) => QmStatus::Config,
        Error::Calibration(_) => QmStatus::Calibration,
        Error::Io(_) => QmStatus::Io,
    }
}

/// Runs `f`, converting errors and panics into status codes.
fn guard(f: impl FnOnce() -> Result<(), (QmStatus, String)>) -> QmStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            set_error("");
            QmStatus::Ok
        }
        Ok(Err((status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("internal panic");
            QmStatus::Panic
        }
    }
}

fn core<T>(r: qmqkd::Result<T>) -> Result<T, (QmStatus, String)> {
    r.map_err(|e| (status_of(&e), e.to_string()))
}

fn null(what: &str) -> (QmStatus, String) {
    (QmStatus::NullPointer, format!("{what} is null"))
}

unsafe fn deref<'a, T>(p: *const T, what: &str) -> Result<&'a T, (QmStatus, String)> {
    p.as_ref().ok_or_else(|| null(what))
}

unsafe fn write<T>(out: *mut T, value: T, what: &str) -> Result<(), (QmStatus, String)> {
    if out.is_null() {
        return Err(null(what));
    }
    out.write(value);
    Ok(())
}

unsafe fn write_handle<T>(out: *mut *mut T, value: T) -> Result<(), (QmStatus, String)> {
    if out.is_null() {
        return Err(null("out"));
    }
    out.write(Box::into_raw(Box::new(value)));
    Ok(())
}

unsafe fn c_str<'a>(p: *const c_char, what: &str) -> Result<&'a str, (QmStatus, String)> {
    if p.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| (QmStatus::InvalidArgument, format!("{what} is not UTF-8")))
}

/// Message for the last failed call on this thread; empty after a success.
/// The pointer stays valid until the next call on this thread.
#[no_mangle]
pub extern "C" fn qm_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Library version, a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn qm_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Link with identity channel and the given fiber birefringence of the four
/// arms (Alice long, Alice short, Bob long, Bob short).
///
/// # Safety
/// `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn qm_link_new(
    scheme: QmMirrorKind,
    delta_alice_long: f64,
    delta_alice_short: f64,
    delta_bob_long: f64,
    delta_bob_short: f64,
    out: *mut *mut QmLink,
) -> QmStatus {
    guard(|| {
        let deltas = [delta_alice_long, delta_alice_short, delta_bob_long, delta_bob_short];
        let link = LinkSpec::uniform(scheme.into(), deltas, Matrix2c::identity());
        core(link.validate())?;
        write_handle(out, QmLink(link))
    })
}

/// Link with a Haar-random channel and random arm parameters; identical to
/// sample `index` of a fading scan seeded with `seed`.
///
/// # Safety
/// `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn qm_link_random(
    scheme: QmMirrorKind,
    seed: u64,
    index: u64,
    out: *mut *mut QmLink,
) -> QmStatus {
    guard(|| write_handle(out, QmLink(random_link(scheme.into(), seed, index))))
}

/// # Safety
/// `link` must come from this library and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn qm_link_free(link: *mut QmLink) {
    if !link.is_null() {
        drop(Box::from_raw(link));
    }
}

/// Sets the phase shifter in Alice's long arm.
///
/// # Safety
/// `link` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn qm_link_set_phase_shift(link: *mut QmLink, phase: f64) -> QmStatus {
    guard(|| {
        let link = link.as_mut().ok_or_else(|| null("link"))?;
        if !phase.is_finite() {
            return Err((QmStatus::InvalidArgument, "phase must be finite".into()));
        }
        link.0.alice_long.phase_shift = phase;
        Ok(())
    })
}

/// Output power at Bob for the input field `(ex, ey)`.
///
/// # Safety
/// `link` must be a live handle and `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn qm_link_interference_power(
    link: *const QmLink,
    ex_re: f64,
    ex_im: f64,
    ey_re: f64,
    ey_im: f64,
    out: *mut f64,
) -> QmStatus {
    guard(|| {
        let link = deref(link, "link")?;
        let e = JonesVector::new(Complex::new(ex_re, ex_im), Complex::new(ey_re, ey_im));
        if !e.is_finite() {
            return Err((QmStatus::InvalidArgument, "input field must be finite".into()));
        }
        write(out, interference_power(&link.0, &e), "out")
    })
}

/// Worst-case fringe visibility over input polarizations.
///
/// # Safety
/// `link` must be a live handle and `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn qm_link_visibility(link: *const QmLink, sweep_points: usize, out: *mut f64) -> QmStatus {
    guard(|| {
        let link = deref(link, "link")?;
        write(out, core(visibility(&link.0, sweep_points))?, "out")
    })
}

/// Visibility statistics of `samples` random links.
///
/// # Safety
/// `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn qm_fading_scan(
    scheme: QmMirrorKind,
    samples: usize,
    seed: u64,
    out: *mut QmFadingSummary,
) -> QmStatus {
    guard(|| {
        let s = core(fading_scan(scheme.into(), samples, seed))?.summary;
        write(out, QmFadingSummary { samples: s.samples, min: s.min, mean: s.mean, p5: s.p5 }, "out")
    })
}

/// Runs the identity suite; `*all_pass` is 1 when every residual is within
/// `tol`, and `*failures` counts the failing identities.
///
/// # Safety
/// `all_pass` and `failures` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn qm_algebra_check(
    tol: f64,
    samples: usize,
    seed: u64,
    all_pass: *mut c_int,
    failures: *mut usize,
) -> QmStatus {
    guard(|| {
        if tol.is_nan() || tol <= 0.0 || samples < 3 {
            return Err((QmStatus::InvalidArgument, "need tol > 0 and samples >= 3".into()));
        }
        let checks = qmqkd::cli::run_checks(tol, samples, seed);
        let failed = checks.iter().filter(|c| !c.pass).count();
        write(all_pass, c_int::from(failed == 0), "all_pass")?;
        write(failures, failed, "failures")
    })
}

/// Parses a scenario from TOML text.
///
/// # Safety
/// `toml` must be a NUL-terminated string and `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn qm_scenario_from_toml(toml: *const c_char, out: *mut *mut QmScenario) -> QmStatus {
    guard(|| {
        let cfg = core(ScenarioConfig::from_toml(c_str(toml, "toml")?))?;
        write_handle(out, QmScenario(cfg))
    })
}

/// Loads a bundled preset (`paper-50km`, `paper-100km`, `fading-demo`).
///
/// # Safety
/// `name` must be a NUL-terminated string and `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn qm_scenario_preset(name: *const c_char, out: *mut *mut QmScenario) -> QmStatus {
    guard(|| {
        let name = c_str(name, "name")?;
        let cfg = ScenarioConfig::preset(name).ok_or_else(|| (QmStatus::Config, format!("unknown preset {name}")))?;
        write_handle(out, QmScenario(cfg))
    })
}

/// # Safety
/// `scenario` must come from this library and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn qm_scenario_free(scenario: *mut QmScenario) {
    if !scenario.is_null() {
        drop(Box::from_raw(scenario));
    }
}

/// Fits detector and visibility parameters in place and disables further
/// calibration on the scenario.
///
/// # Safety
/// `scenario` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn qm_scenario_calibrate(scenario: *mut QmScenario) -> QmStatus {
    guard(|| {
        let cfg = &mut scenario.as_mut().ok_or_else(|| null("scenario"))?.0;
        let report = core(calibrate(&cfg.source, &cfg.detector, &cfg.protocol, &cfg.drift, &cfg.calibration.targets))?;
        cfg.detector = report.detector;
        cfg.protocol = report.protocol;
        cfg.calibration.enabled = false;
        Ok(())
    })
}

/// Simulates a session. Calibration runs first when the scenario enables it.
///
/// # Safety
/// `scenario` must be a live handle and `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn qm_session_run(scenario: *const QmScenario, out: *mut *mut QmSession) -> QmStatus {
    guard(|| {
        let mut cfg = deref(scenario, "scenario")?.0.clone();
        if cfg.calibration.enabled {
            let report = core(calibrate(&cfg.source, &cfg.detector, &cfg.protocol, &cfg.drift, &cfg.calibration.targets))?;
            cfg.detector = report.detector;
            cfg.protocol = report.protocol;
        }
        let res = core(simulate_session(
            &cfg.source,
            &cfg.channel,
            &cfg.detector,
            &cfg.protocol,
            &cfg.drift,
            &cfg.session_options(),
        ))?;
        write_handle(out, QmSession(res))
    })
}

/// # Safety
/// `session` must come from this library and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn qm_session_free(session: *mut QmSession) {
    if !session.is_null() {
        drop(Box::from_raw(session));
    }
}

/// Number of bins; 0 for a null handle.
///
/// # Safety
/// `session` must be a live handle or null.
#[no_mangle]
pub unsafe extern "C" fn qm_session_len(session: *const QmSession) -> usize {
    session.as_ref().map_or(0, |s| s.0.bins.len())
}

/// # Safety
/// `session` must be a live handle and `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn qm_session_bin(session: *const QmSession, index: usize, out: *mut QmSessionBin) -> QmStatus {
    guard(|| {
        let s = deref(session, "session")?;
        let b = s.0.bins.get(index).ok_or_else(|| {
            (QmStatus::OutOfRange, format!("bin {index} out of range (len {})", s.0.bins.len()))
        })?;
        write(out, QmSessionBin { t_s: b.t_s, phase_error: b.phase_error, qber: b.qber, rate_bps: b.rate_bps }, "out")
    })
}

/// # Safety
/// `session` must be a live handle and `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn qm_session_summary(session: *const QmSession, out: *mut QmSessionSummary) -> QmStatus {
    guard(|| {
        let s = &deref(session, "session")?.0.summary;
        write(
            out,
            QmSessionSummary {
                bins: s.bins,
                mean_qber: s.mean_qber,
                std_qber: s.std_qber,
                mean_rate_bps: s.mean_rate_bps,
                std_rate_bps: s.std_rate_bps,
            },
            "out",
        )
    })
}
