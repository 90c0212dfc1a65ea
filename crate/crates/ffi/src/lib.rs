//! C ABI over `anyon-core`.
//!
//! Every object crosses the boundary as an opaque handle that the caller
//! releases with the matching `*_free`. Fallible calls return an
//! [`AnyonStatus`]; the message of the last failure on the calling thread is
//! available from [`anyon_last_error`]. Panics never unwind into C.

use std::cell::RefCell;
use std::ffi::{c_char, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use anyon_core::bethe::{solve_ground_state, BetheState};
use anyon_core::circulant::ProfileSpec;
use anyon_core::pipeline::{run_point, GridSpec, Method, RunOptions};
use anyon_core::rdm::{InnerSpec, RdmMatrix};
use anyon_core::spectrum::OccupationSpectrum;
use anyon_core::wavefn::WavefnEvaluator;
use anyon_core::{Error, ModelParams};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AnyonStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    SolverFailure = 3,
    IntegrationFailure = 4,
    NumericFailure = 5,
    OutOfRange = 6,
    Panic = 7,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AnyonMethod {
    Circulant = 0,
    Nystrom = 1,
}

/// Physical parameters; `c` is ignored when `hardcore` is set.
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct AnyonParams {
    pub n: u32,
    pub length: f64,
    pub c: f64,
    pub kappa: f64,
    pub hardcore: bool,
}

/// Discretization; fill with [`anyon_grid_default`] and adjust.
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct AnyonGrid {
    pub method: AnyonMethod,
    pub outer_panels: u32,
    pub outer_order: u32,
    pub profile_panels: u32,
    pub profile_order: u32,
    pub modes: u32,
    pub inner_panels: u32,
    pub inner_order: u32,
}

/// Solved Bethe state with its wavefunction evaluator.
pub struct AnyonState {
    evaluator: WavefnEvaluator,
}

/// Normalized one-body density matrix on the outer grid.
pub struct AnyonRdm {
    rdm: RdmMatrix,
}

/// Natural occupations and entropy.
pub struct AnyonSpectrum {
    spectrum: OccupationSpectrum,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: String) {
    let msg = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = msg);
}

fn status_of(e: &Error) -> AnyonStatus {
    match e {
        Error::InvalidArgument(_) | Error::Parse(_) => AnyonStatus::InvalidArgument,
        Error::SolverFailure { .. } => AnyonStatus::SolverFailure,
        Error::IntegrationFailure(_) => AnyonStatus::IntegrationFailure,
        _ => AnyonStatus::NumericFailure,
    }
}

/// Runs `f`, records any error message and converts panics.
fn guard(f: impl FnOnce() -> Result<(), (AnyonStatus, String)>) -> AnyonStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => AnyonStatus::Ok,
        Ok(Err((status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("internal panic".into());
            AnyonStatus::Panic
        }
    }
}

fn core_err(e: Error) -> (AnyonStatus, String) {
    (status_of(&e), e.to_string())
}

fn null(what: &str) -> (AnyonStatus, String) {
    (AnyonStatus::NullPointer, format!("{what} is null"))
}

fn model_params(p: &AnyonParams) -> Result<ModelParams, Error> {
    let n = p.n as usize;
    if p.hardcore {
        ModelParams::hardcore(n, p.length, p.kappa)
    } else {
        ModelParams::new(n, p.length, p.c, p.kappa)
    }
}

fn grid_spec(g: &AnyonGrid) -> Result<GridSpec, Error> {
    let d = GridSpec::default();
    let method = match g.method {
        AnyonMethod::Circulant => Method::Circulant,
        AnyonMethod::Nystrom => Method::Nystrom,
    };
    let spec = GridSpec {
        method,
        outer_panels: g.outer_panels as usize,
        outer_order: g.outer_order as usize,
        profile: ProfileSpec {
            panels: g.profile_panels as usize,
            order: g.profile_order as usize,
            modes: g.modes as usize,
            ..d.profile
        },
        inner: InnerSpec {
            panels: g.inner_panels as usize,
            order: g.inner_order as usize,
            ..d.inner
        },
    };
    if spec.outer_panels < 1 || spec.outer_order < 1 {
        return Err(Error::InvalidArgument(
            "outer grid needs panels >= 1 and order >= 1".into(),
        ));
    }
    spec.profile.validate()?;
    spec.inner.validate()?;
    Ok(spec)
}

/// Message of the last failed call on this thread; empty if none. Valid
/// until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn anyon_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Default discretization.
///
/// # Safety
/// `out` must be null or point to writable memory for one `AnyonGrid`.
#[no_mangle]
pub unsafe extern "C" fn anyon_grid_default(out: *mut AnyonGrid) -> AnyonStatus {
    guard(|| {
        let out = out.as_mut().ok_or_else(|| null("out"))?;
        let d = GridSpec::default();
        *out = AnyonGrid {
            method: AnyonMethod::Circulant,
            outer_panels: d.outer_panels as u32,
            outer_order: d.outer_order as u32,
            profile_panels: d.profile.panels as u32,
            profile_order: d.profile.order as u32,
            modes: d.profile.modes as u32,
            inner_panels: d.inner.panels as u32,
            inner_order: d.inner.order as u32,
        };
        Ok(())
    })
}

/// Solves the Bethe equations for the ground state.
///
/// # Safety
/// `params` must point to a valid `AnyonParams` and `out` to writable storage
/// for one pointer. On success `*out` owns a state to be released with
/// [`anyon_state_free`].
#[no_mangle]
pub unsafe extern "C" fn anyon_solve(params: *const AnyonParams, out: *mut *mut AnyonState) -> AnyonStatus {
    guard(|| {
        let params = params.as_ref().ok_or_else(|| null("params"))?;
        let out = out.as_mut().ok_or_else(|| null("out"))?;
        *out = ptr::null_mut();
        let p = model_params(params).map_err(core_err)?;
        let state = solve_ground_state(&p).map_err(core_err)?;
        let evaluator = WavefnEvaluator::new(&state).map_err(core_err)?;
        *out = Box::into_raw(Box::new(AnyonState { evaluator }));
        Ok(())
    })
}

fn state_ref<'a>(state: *const AnyonState) -> Result<&'a BetheState, (AnyonStatus, String)> {
    // SAFETY: callers pass handles from `anyon_solve` or null
    unsafe { state.as_ref() }
        .map(|s| s.evaluator.state())
        .ok_or_else(|| null("state"))
}

/// Copies up to `len` quasi-momenta into `buf` and stores the particle
/// number in `count`.
///
/// # Safety
/// `state` must be a live handle, `buf` must hold `len` doubles (or be null
/// when `len` is 0) and `count` must be writable.
#[no_mangle]
pub unsafe extern "C" fn anyon_state_quasi_momenta(
    state: *const AnyonState,
    buf: *mut f64,
    len: usize,
    count: *mut usize,
) -> AnyonStatus {
    guard(|| {
        let s = state_ref(state)?;
        let count = count.as_mut().ok_or_else(|| null("count"))?;
        *count = s.quasi_momenta.len();
        if len > 0 {
            if buf.is_null() {
                return Err(null("buf"));
            }
            let n = len.min(s.quasi_momenta.len());
            ptr::copy_nonoverlapping(s.quasi_momenta.as_ptr(), buf, n);
        }
        Ok(())
    })
}

/// Ground-state energy `Σ k²`.
///
/// # Safety
/// `state` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn anyon_state_energy(state: *const AnyonState, out: *mut f64) -> AnyonStatus {
    guard(|| {
        let s = state_ref(state)?;
        *out.as_mut().ok_or_else(|| null("out"))? = s.energy;
        Ok(())
    })
}

/// Unnormalized `ψ(x₁, …, x_N)` with coordinates in `[0, L]`.
///
/// # Safety
/// `state` must be a live handle, `x` must hold `n` doubles and `re`, `im`
/// must be writable.
#[no_mangle]
pub unsafe extern "C" fn anyon_state_psi(
    state: *const AnyonState,
    x: *const f64,
    n: usize,
    re: *mut f64,
    im: *mut f64,
) -> AnyonStatus {
    guard(|| {
        let st = state.as_ref().ok_or_else(|| null("state"))?;
        if x.is_null() {
            return Err(null("x"));
        }
        let (re, im) = (
            re.as_mut().ok_or_else(|| null("re"))?,
            im.as_mut().ok_or_else(|| null("im"))?,
        );
        let ev = &st.evaluator;
        if n != ev.n() {
            return Err((
                AnyonStatus::InvalidArgument,
                format!("expected {} coordinates, got {n}", ev.n()),
            ));
        }
        let x = std::slice::from_raw_parts(x, n);
        let l = ev.length();
        if x.iter().any(|v| !(0.0..=l).contains(v)) {
            return Err((AnyonStatus::OutOfRange, format!("coordinates must lie in [0, {l}]")));
        }
        let v = ev.eval_psi(x);
        (*re, *im) = (v.re, v.im);
        Ok(())
    })
}

/// # Safety
/// `state` must be null or a handle from [`anyon_solve`] not yet freed.
#[no_mangle]
pub unsafe extern "C" fn anyon_state_free(state: *mut AnyonState) {
    if !state.is_null() {
        drop(Box::from_raw(state));
    }
}

/// Full pipeline for one point. Either output may be null to discard it.
///
/// # Safety
/// `params` and `grid` must point to valid structs; `rdm` and `spectrum`
/// must each be null or writable storage for one pointer. Returned handles
/// are released with [`anyon_rdm_free`] and [`anyon_spectrum_free`].
#[no_mangle]
pub unsafe extern "C" fn anyon_run(
    params: *const AnyonParams,
    grid: *const AnyonGrid,
    rdm: *mut *mut AnyonRdm,
    spectrum: *mut *mut AnyonSpectrum,
) -> AnyonStatus {
    guard(|| {
        let params = params.as_ref().ok_or_else(|| null("params"))?;
        let grid = grid.as_ref().ok_or_else(|| null("grid"))?;
        let mut rdm = rdm.as_mut();
        let mut spectrum = spectrum.as_mut();
        rdm.iter_mut().for_each(|r| **r = ptr::null_mut());
        spectrum.iter_mut().for_each(|s| **s = ptr::null_mut());
        let opts = RunOptions {
            grid: grid_spec(grid).map_err(core_err)?,
            c_eff_cap: None,
        };
        let p = model_params(params).map_err(core_err)?;
        let out = run_point(&p, &opts).map_err(|e| (status_of(&e.source), e.to_string()))?;
        if let Some(r) = rdm {
            *r = Box::into_raw(Box::new(AnyonRdm { rdm: out.rdm }));
        }
        if let Some(s) = spectrum {
            *s = Box::into_raw(Box::new(AnyonSpectrum { spectrum: out.spectrum }));
        }
        Ok(())
    })
}

/// Number of grid nodes `M`.
///
/// # Safety
/// `rdm` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn anyon_rdm_dim(rdm: *const AnyonRdm, out: *mut usize) -> AnyonStatus {
    guard(|| {
        let r = rdm.as_ref().ok_or_else(|| null("rdm"))?;
        *out.as_mut().ok_or_else(|| null("out"))? = r.rdm.dim();
        Ok(())
    })
}

/// Node `x_i` and weight `w_i` of the outer grid.
///
/// # Safety
/// `rdm` must be a live handle; `x` and `w` writable.
#[no_mangle]
pub unsafe extern "C" fn anyon_rdm_node(rdm: *const AnyonRdm, i: usize, x: *mut f64, w: *mut f64) -> AnyonStatus {
    guard(|| {
        let r = &rdm.as_ref().ok_or_else(|| null("rdm"))?.rdm;
        if i >= r.dim() {
            return Err((AnyonStatus::OutOfRange, format!("node {i} out of {}", r.dim())));
        }
        *x.as_mut().ok_or_else(|| null("x"))? = r.grid.nodes[i];
        *w.as_mut().ok_or_else(|| null("w"))? = r.grid.weights[i];
        Ok(())
    })
}

/// `ρ₁(x_i, x_j)`, normalized to unit weighted trace.
///
/// # Safety
/// `rdm` must be a live handle; `re` and `im` writable.
#[no_mangle]
pub unsafe extern "C" fn anyon_rdm_entry(
    rdm: *const AnyonRdm,
    i: usize,
    j: usize,
    re: *mut f64,
    im: *mut f64,
) -> AnyonStatus {
    guard(|| {
        let r = &rdm.as_ref().ok_or_else(|| null("rdm"))?.rdm;
        if i >= r.dim() || j >= r.dim() {
            return Err((AnyonStatus::OutOfRange, format!("entry ({i}, {j}) out of {}", r.dim())));
        }
        let v = r.get(i, j);
        *re.as_mut().ok_or_else(|| null("re"))? = v.re;
        *im.as_mut().ok_or_else(|| null("im"))? = v.im;
        Ok(())
    })
}

/// # Safety
/// `rdm` must be null or a handle from [`anyon_run`] not yet freed.
#[no_mangle]
pub unsafe extern "C" fn anyon_rdm_free(rdm: *mut AnyonRdm) {
    if !rdm.is_null() {
        drop(Box::from_raw(rdm));
    }
}

/// Von Neumann entropy in bits.
///
/// # Safety
/// `spectrum` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn anyon_spectrum_entropy(spectrum: *const AnyonSpectrum, out: *mut f64) -> AnyonStatus {
    guard(|| {
        let s = spectrum.as_ref().ok_or_else(|| null("spectrum"))?;
        *out.as_mut().ok_or_else(|| null("out"))? = s.spectrum.entropy;
        Ok(())
    })
}

/// Copies up to `len` occupations, descending, into `buf` and stores the
/// number retained in `count`.
///
/// # Safety
/// `spectrum` must be a live handle, `buf` must hold `len` doubles (or be
/// null when `len` is 0) and `count` must be writable.
#[no_mangle]
pub unsafe extern "C" fn anyon_spectrum_occupations(
    spectrum: *const AnyonSpectrum,
    buf: *mut f64,
    len: usize,
    count: *mut usize,
) -> AnyonStatus {
    guard(|| {
        let s = &spectrum.as_ref().ok_or_else(|| null("spectrum"))?.spectrum;
        *count.as_mut().ok_or_else(|| null("count"))? = s.occupations.len();
        if len > 0 {
            if buf.is_null() {
                return Err(null("buf"));
            }
            let n = len.min(s.occupations.len());
            ptr::copy_nonoverlapping(s.occupations.as_ptr(), buf, n);
        }
        Ok(())
    })
}

/// # Safety
/// `spectrum` must be null or a handle from [`anyon_run`] not yet freed.
#[no_mangle]
pub unsafe extern "C" fn anyon_spectrum_free(spectrum: *mut AnyonSpectrum) {
    if !spectrum.is_null() {
        drop(Box::from_raw(spectrum));
    }
}
