//! C interface to the bilgamma engine.
//!
//! Models and solved measures are opaque heap handles released with their
//! `*_free` function. Every fallible call returns a [`BgStatus`] and writes
//! its result through an out-pointer; on failure the out-pointer is left
//! untouched and [`bg_last_error`] describes the problem. Panics never cross
//! the boundary.

use std::cell::RefCell;
use std::ffi::{c_char, c_int, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};

use bilgamma::hedging::{hedge_delta, HedgeSettings};
use bilgamma::measures::{solve, MeasureKind, MeasureParams, MeasureSolution, SolverSettings};
use bilgamma::pricer::{implied_vol, lewis_price, ContourSettings, OptionKind, OptionSpec};
use bilgamma::{BilateralGamma, Error, Market, RiskNeutralLaw};

/// Result code of every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BgStatus {
    Ok = 0,
    /// An argument is outside its domain.
    InvalidArgument = 1,
    NullPointer = 2,
    /// The requested measure does not exist for these parameters.
    NoSolution = 3,
    /// A numerical scheme missed its tolerance.
    Convergence = 4,
    /// The operation is not available for this measure.
    Unsupported = 5,
    /// Internal error; the library state is unaffected.
    Panic = 6,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BgMeasureKind {
    Esscher = 0,
    Memm = 1,
    BilateralEsscher = 2,
    /// Needs the exponent `p > 1`.
    POptimal = 3,
    MinimalMartingale = 4,
}

/// Parameters of one bilateral Gamma law.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct BgParams {
    pub alpha_plus: f64,
    pub lambda_plus: f64,
    pub alpha_minus: f64,
    pub lambda_minus: f64,
}

/// Summary of a solved measure.
///
/// `theta_plus`/`theta_minus` hold Θ for Esscher and ϑ for the minimal
/// entropy measure (twice), the tilt pair for bilateral and p-optimal
/// measures, and `c` for the minimal martingale measure.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BgMeasureInfo {
    pub kind: BgMeasureKind,
    pub theta_plus: f64,
    pub theta_minus: f64,
    /// Relative entropy or p-distance; NaN when not defined.
    pub objective: f64,
    /// Bilateral Gamma components of the risk-neutral law; 0 for the
    /// minimal entropy measure, whose law is not in the class.
    pub n_components: usize,
}

/// Physical model and market.
pub struct BgModel {
    params: BilateralGamma,
    market: Market,
}

/// A solved martingale measure together with the market it was solved for.
pub struct BgMeasure {
    solution: MeasureSolution,
    market: Market,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: &str) {
    let text = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = text);
}

fn status_of(e: &Error) -> BgStatus {
    match e {
        Error::NoSolution(_) | Error::NoMartingaleMeasure(_) => BgStatus::NoSolution,
        Error::Unsupported(_) => BgStatus::Unsupported,
        Error::Convergence(_) => BgStatus::Convergence,
        Error::GridPoint { source, .. } => status_of(source),
        _ => BgStatus::InvalidArgument,
    }
}

/// Runs `f` behind a panic guard and translates errors into status codes.
fn guard(f: impl FnOnce() -> Result<(), (BgStatus, String)>) -> BgStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => BgStatus::Ok,
        Ok(Err((status, msg))) => {
            set_error(&msg);
            status
        }
        Err(payload) => {
            let msg = payload
                .downcast_ref::<String>()
                .map(String::as_str)
                .or_else(|| payload.downcast_ref::<&str>().copied())
                .unwrap_or("unknown panic");
            set_error(&format!("internal error: {msg}"));
            BgStatus::Panic
        }
    }
}

fn lib(e: Error) -> (BgStatus, String) {
    (status_of(&e), e.to_string())
}

fn null(name: &str) -> (BgStatus, String) {
    (BgStatus::NullPointer, format!("{name} is null"))
}

unsafe fn get<'a, T>(p: *const T, name: &str) -> Result<&'a T, (BgStatus, String)> {
    p.as_ref().ok_or_else(|| null(name))
}

unsafe fn put<T>(out: *mut T, value: T) {
    out.write(value);
}

fn option_kind(is_put: c_int) -> OptionKind {
    if is_put != 0 {
        OptionKind::Put
    } else {
        OptionKind::Call
    }
}

/// Creates a model. Rates are per unit of model time with `r ≥ q ≥ 0`.
///
/// # Safety
/// `out` must be null or valid for writing one pointer.
#[no_mangle]
pub unsafe extern "C" fn bg_model_new(
    params: BgParams,
    r: f64,
    q: f64,
    s0: f64,
    out: *mut *mut BgModel,
) -> BgStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let p = BilateralGamma::new(params.alpha_plus, params.lambda_plus, params.alpha_minus, params.lambda_minus)
            .map_err(lib)?;
        let market = Market::new(r, q, s0).map_err(lib)?;
        put(out, Box::into_raw(Box::new(BgModel { params: p, market })));
        Ok(())
    })
}

/// Releases a model. Null is ignored.
///
/// # Safety
/// `model` must be null or a pointer from [`bg_model_new`] not yet freed.
#[no_mangle]
pub unsafe extern "C" fn bg_model_free(model: *mut BgModel) {
    if !model.is_null() {
        drop(Box::from_raw(model));
    }
}

/// Cumulant `Ψ(z) = ln E[e^{zX₁}]` for `z ∈ (−λ⁻, λ⁺)`.
///
/// # Safety
/// `model` must be a live handle and `out` valid for writing.
#[no_mangle]
pub unsafe extern "C" fn bg_model_cumulant(model: *const BgModel, z: f64, out: *mut f64) -> BgStatus {
    guard(|| {
        let m = get(model, "model")?;
        if out.is_null() {
            return Err(null("out"));
        }
        put(out, m.params.cumulant(z).map_err(lib)?);
        Ok(())
    })
}

/// Solves for a martingale measure with default solver settings. `kind` is
/// a `BgMeasureKind` value; `p` is read only for the p-optimal measure.
///
/// # Safety
/// `model` must be a live handle and `out` valid for writing one pointer.
#[no_mangle]
pub unsafe extern "C" fn bg_solve_measure(
    model: *const BgModel,
    kind: c_int,
    p: f64,
    out: *mut *mut BgMeasure,
) -> BgStatus {
    guard(|| {
        let m = get(model, "model")?;
        if out.is_null() {
            return Err(null("out"));
        }
        const ESSCHER: c_int = BgMeasureKind::Esscher as c_int;
        const MEMM: c_int = BgMeasureKind::Memm as c_int;
        const BILATERAL: c_int = BgMeasureKind::BilateralEsscher as c_int;
        const P_OPTIMAL: c_int = BgMeasureKind::POptimal as c_int;
        const MMM: c_int = BgMeasureKind::MinimalMartingale as c_int;
        let kind = match kind {
            ESSCHER => MeasureKind::Esscher,
            MEMM => MeasureKind::Memm,
            BILATERAL => MeasureKind::BilateralEsscher,
            P_OPTIMAL => {
                if !(p > 1.0 && p.is_finite()) {
                    return Err((BgStatus::InvalidArgument, format!("p must exceed 1, got {p}")));
                }
                MeasureKind::POptimal(p)
            }
            MMM => MeasureKind::MinimalMartingale,
            other => return Err((BgStatus::InvalidArgument, format!("unknown measure kind {other}"))),
        };
        let solution = solve(kind, &m.params, &m.market, &SolverSettings::default()).map_err(lib)?;
        put(
            out,
            Box::into_raw(Box::new(BgMeasure {
                solution,
                market: m.market,
            })),
        );
        Ok(())
    })
}

/// Releases a measure. Null is ignored.
///
/// # Safety
/// `measure` must be null or a pointer from [`bg_solve_measure`] not yet freed.
#[no_mangle]
pub unsafe extern "C" fn bg_measure_free(measure: *mut BgMeasure) {
    if !measure.is_null() {
        drop(Box::from_raw(measure));
    }
}

/// # Safety
/// `measure` must be a live handle and `out` valid for writing.
#[no_mangle]
pub unsafe extern "C" fn bg_measure_info(measure: *const BgMeasure, out: *mut BgMeasureInfo) -> BgStatus {
    guard(|| {
        let m = get(measure, "measure")?;
        if out.is_null() {
            return Err(null("out"));
        }
        let sol = &m.solution;
        let (kind, tp, tm) = match (sol.kind, sol.params) {
            (MeasureKind::Esscher, MeasureParams::Esscher { theta }) => (BgMeasureKind::Esscher, theta, theta),
            (MeasureKind::Memm, MeasureParams::Memm { theta }) => (BgMeasureKind::Memm, theta, theta),
            (MeasureKind::POptimal(_), MeasureParams::Bilateral { theta_plus, theta_minus }) => {
                (BgMeasureKind::POptimal, theta_plus, theta_minus)
            }
            (_, MeasureParams::Bilateral { theta_plus, theta_minus }) => {
                (BgMeasureKind::BilateralEsscher, theta_plus, theta_minus)
            }
            (_, MeasureParams::MinimalMartingale { c }) => (BgMeasureKind::MinimalMartingale, c, c),
            (kind, params) => unreachable!("{kind} solved with {params:?}"),
        };
        put(
            out,
            BgMeasureInfo {
                kind,
                theta_plus: tp,
                theta_minus: tm,
                objective: sol.objective.unwrap_or(f64::NAN),
                n_components: sol.law.components().map_or(0, <[_]>::len),
            },
        );
        Ok(())
    })
}

/// Parameters of component `index` of the risk-neutral law.
///
/// # Safety
/// `measure` must be a live handle and `out` valid for writing.
#[no_mangle]
pub unsafe extern "C" fn bg_measure_component(measure: *const BgMeasure, index: usize, out: *mut BgParams) -> BgStatus {
    guard(|| {
        let m = get(measure, "measure")?;
        if out.is_null() {
            return Err(null("out"));
        }
        let comps = m.solution.law.components().map_err(lib)?;
        let c = comps.get(index).ok_or_else(|| {
            (
                BgStatus::InvalidArgument,
                format!("component {index} out of range, the law has {}", comps.len()),
            )
        })?;
        put(
            out,
            BgParams {
                alpha_plus: c.alpha_plus(),
                lambda_plus: c.lambda_plus(),
                alpha_minus: c.alpha_minus(),
                lambda_minus: c.lambda_minus(),
            },
        );
        Ok(())
    })
}

/// European option price under the measure, with the default contour.
/// Fails with [`BgStatus::Unsupported`] for the minimal entropy measure.
///
/// # Safety
/// `measure` must be a live handle and `out` valid for writing.
#[no_mangle]
pub unsafe extern "C" fn bg_price(
    measure: *const BgMeasure,
    strike: f64,
    maturity: f64,
    is_put: c_int,
    out: *mut f64,
) -> BgStatus {
    guard(|| {
        let m = get(measure, "measure")?;
        if out.is_null() {
            return Err(null("out"));
        }
        if let RiskNeutralLaw::TiltedLevy { .. } = m.solution.law {
            return Err((
                BgStatus::Unsupported,
                "option prices under the minimal entropy measure are not available".into(),
            ));
        }
        let opt = OptionSpec::new(strike, maturity, option_kind(is_put)).map_err(lib)?;
        put(out, lewis_price(&m.solution.law, &m.market, &opt, &ContourSettings::default()).map_err(lib)?);
        Ok(())
    })
}

/// Black-Scholes implied volatility of an option price.
///
/// # Safety
/// `out` must be valid for writing.
#[no_mangle]
pub unsafe extern "C" fn bg_implied_vol(
    is_put: c_int,
    price: f64,
    s0: f64,
    strike: f64,
    maturity: f64,
    r: f64,
    q: f64,
    out: *mut f64,
) -> BgStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        put(out, implied_vol(option_kind(is_put), price, s0, strike, maturity, r, q).map_err(lib)?);
        Ok(())
    })
}

/// Quadratic hedge ratio at time `t` and spot `spot` under the minimal
/// martingale measure of the model.
///
/// # Safety
/// `model` must be a live handle and `out` valid for writing.
#[no_mangle]
pub unsafe extern "C" fn bg_hedge_delta(
    model: *const BgModel,
    strike: f64,
    maturity: f64,
    t: f64,
    spot: f64,
    is_put: c_int,
    out: *mut f64,
) -> BgStatus {
    guard(|| {
        let m = get(model, "model")?;
        if out.is_null() {
            return Err(null("out"));
        }
        let sol = solve(MeasureKind::MinimalMartingale, &m.params, &m.market, &SolverSettings::default()).map_err(lib)?;
        let MeasureParams::MinimalMartingale { c } = sol.params else {
            unreachable!("minimal martingale solve returns its constant")
        };
        let opt = OptionSpec::new(strike, maturity, option_kind(is_put)).map_err(lib)?;
        put(
            out,
            hedge_delta(&m.params, c, &m.market, &opt, t, spot, &HedgeSettings::default()).map_err(lib)?,
        );
        Ok(())
    })
}

/// Message of the last failed call on this thread, or an empty string. The
/// pointer stays valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn bg_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn bg_version() -> *const c_char {
    static VERSION: &CStr = match CStr::from_bytes_with_nul(concat!(env!("CARGO_PKG_VERSION"), "\0").as_bytes()) {
        Ok(v) => v,
        Err(_) => panic!("version contains NUL"),
    };
    VERSION.as_ptr()
}
