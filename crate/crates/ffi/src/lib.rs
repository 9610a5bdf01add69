//! C ABI for `trimspec`.
//!
//! Objects are opaque heap handles released with their `*_free` function.
//! Every fallible call returns a [`TsStatus`]; on failure the message is
//! available through [`ts_last_error`] on the same thread. Outputs are only
//! written on success. Panics are caught at the boundary and reported as
//! [`TsStatus::Panic`].

use std::cell::RefCell;
use std::collections::HashMap;
use std::ffi::{c_char, c_void, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::slice;

use trimspec::bounds::{self, ModelParams};
use trimspec::hamiltonian::{assemble, LatticeOperator, Mode, Potential};
use trimspec::lattice::{self, BoxRegion, TrimPattern};
use trimspec::spectra::{self, PfOptions};
use trimspec::Error;

/// Status codes returned by every fallible function.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TsStatus {
    Ok = 0,
    InvalidArgument = 1,
    EmptyDomain = 2,
    Domain = 3,
    Solver = 4,
    Evaluation = 5,
    NotImplemented = 6,
    Size = 7,
    Internal = 8,
    NullPointer = 9,
    BufferTooSmall = 10,
    Panic = 11,
}

/// Which finite-volume operator to assemble.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TsMode {
    /// `H` on every site of the box.
    Full = 0,
    /// `H_Γ` on the box sites outside `Γ`.
    Trimmed = 1,
    /// `H + t χ_Γ` on every site of the box.
    Penalized = 2,
}

/// Opaque trimming pattern `Γ`.
pub struct TsPattern(TrimPattern);

/// Opaque potential `V`.
pub struct TsPotential(Potential);

/// Opaque assembled operator.
pub struct TsOperator(LatticeOperator);

/// `V(x)` callback: `x` points at `dim` coordinates.
pub type TsPotentialFn = Option<unsafe extern "C" fn(x: *const i64, dim: usize, user_data: *mut c_void) -> f64>;

/// Lower bound on `κ` and the penalty values attached to it.
#[repr(C)]
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct TsKappa {
    pub s0: f64,
    pub z: f64,
    pub kappa_lb: f64,
    pub witness_s: f64,
    pub optimal_s: f64,
    pub kappa_opt: f64,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

fn status_of(e: &Error) -> TsStatus {
    match e {
        Error::InvalidArgument(_) => TsStatus::InvalidArgument,
        Error::EmptyDomain(_) => TsStatus::EmptyDomain,
        Error::Domain(_) => TsStatus::Domain,
        Error::Solver { .. } => TsStatus::Solver,
        Error::Evaluation(_) => TsStatus::Evaluation,
        Error::NotImplemented(_) => TsStatus::NotImplemented,
        Error::Size(_) => TsStatus::Size,
        Error::Internal(_) => TsStatus::Internal,
    }
}

enum Fail {
    Lib(Error),
    Null(&'static str),
    Buffer(usize, usize),
}

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        Fail::Lib(e)
    }
}

/// Run `f`, translate its failure into a status and record the message.
fn guard(f: impl FnOnce() -> Result<(), Fail>) -> TsStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            set_error("");
            TsStatus::Ok
        }
        Ok(Err(Fail::Lib(e))) => {
            set_error(&e.to_string());
            status_of(&e)
        }
        Ok(Err(Fail::Null(name))) => {
            set_error(&format!("null pointer: {name}"));
            TsStatus::NullPointer
        }
        Ok(Err(Fail::Buffer(need, got))) => {
            set_error(&format!("buffer holds {got} values, {need} needed"));
            TsStatus::BufferTooSmall
        }
        Err(p) => {
            let msg = p
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| p.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            set_error(&format!("panic: {msg}"));
            TsStatus::Panic
        }
    }
}

unsafe fn out_ref<'a, T>(p: *mut T, name: &'static str) -> Result<&'a mut T, Fail> {
    p.as_mut().ok_or(Fail::Null(name))
}

unsafe fn in_ref<'a, T>(p: *const T, name: &'static str) -> Result<&'a T, Fail> {
    p.as_ref().ok_or(Fail::Null(name))
}

unsafe fn in_slice<'a, T>(p: *const T, n: usize, name: &'static str) -> Result<&'a [T], Fail> {
    if n == 0 {
        Ok(&[])
    } else if p.is_null() {
        Err(Fail::Null(name))
    } else {
        Ok(slice::from_raw_parts(p, n))
    }
}

fn boxed<T>(v: T) -> *mut T {
    Box::into_raw(Box::new(v))
}

/// Message of the last failed call on this thread, empty after a success.
/// The pointer stays valid until the next call into the library on this thread.
#[no_mangle]
pub extern "C" fn ts_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn ts_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// `K_* = K` for odd `K`, `K + 1` for even `K`.
///
/// # Safety
/// `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn ts_k_star(k: u64, out: *mut u64) -> TsStatus {
    guard(|| {
        let out = out_ref(out, "out")?;
        *out = lattice::k_star(k)?;
        Ok(())
    })
}

/// Sublattice pattern `K Z^d`.
///
/// # Safety
/// `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn ts_pattern_sublattice(dim: usize, k: u64, out: *mut *mut TsPattern) -> TsStatus {
    guard(|| {
        let out = out_ref(out, "out")?;
        *out = boxed(TsPattern(TrimPattern::sublattice(dim, k)?));
        Ok(())
    })
}

/// `K`-periodic pattern given by `n_sites` representatives in `[0, K)^d`,
/// stored row by row in `sites` (`n_sites * dim` coordinates). `q` is the
/// claimed density constant `Q`.
///
/// # Safety
/// `sites` must hold `n_sites * dim` values; `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn ts_pattern_periodic(
    dim: usize,
    period: u64,
    sites: *const i64,
    n_sites: usize,
    q: u64,
    out: *mut *mut TsPattern,
) -> TsStatus {
    guard(|| {
        let out = out_ref(out, "out")?;
        let coords = in_slice(sites, n_sites.saturating_mul(dim), "sites")?;
        let reps = if dim == 0 { Vec::new() } else { coords.chunks(dim).map(<[i64]>::to_vec).collect() };
        *out = boxed(TsPattern(TrimPattern::periodic(dim, period, reps, q)?));
        Ok(())
    })
}

/// Whether `x` (`dim` coordinates) lies in `Γ`.
///
/// # Safety
/// `pattern` must come from a pattern constructor; `x` must hold the
/// pattern's dimension in coordinates; `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn ts_pattern_contains(pattern: *const TsPattern, x: *const i64, out: *mut bool) -> TsStatus {
    guard(|| {
        let g = &in_ref(pattern, "pattern")?.0;
        let x = in_slice(x, g.dim(), "x")?;
        *out_ref(out, "out")? = g.contains(x);
        Ok(())
    })
}

/// Release a pattern. Null is ignored.
///
/// # Safety
/// `pattern` must be null or come from a pattern constructor, freed once.
#[no_mangle]
pub unsafe extern "C" fn ts_pattern_free(pattern: *mut TsPattern) {
    if !pattern.is_null() {
        drop(Box::from_raw(pattern));
    }
}

/// `V = 0`.
///
/// # Safety
/// `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn ts_potential_zero(out: *mut *mut TsPotential) -> TsStatus {
    guard(|| {
        *out_ref(out, "out")? = boxed(TsPotential(Potential::Zero));
        Ok(())
    })
}

/// `K`-periodic potential; `values` lists `K^d` entries lexicographically over `[0, K)^d`.
///
/// # Safety
/// `values` must hold `n_values` entries; `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn ts_potential_periodic(
    dim: usize,
    period: u64,
    values: *const f64,
    n_values: usize,
    out: *mut *mut TsPotential,
) -> TsStatus {
    guard(|| {
        let out = out_ref(out, "out")?;
        let v = in_slice(values, n_values, "values")?.to_vec();
        *out = boxed(TsPotential(Potential::periodic(dim, period, v)?));
        Ok(())
    })
}

/// Finitely supported potential: `V(sites[i]) = values[i]`, zero elsewhere.
///
/// # Safety
/// `sites` must hold `n * dim` coordinates and `values` `n` entries;
/// `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn ts_potential_explicit(
    dim: usize,
    sites: *const i64,
    values: *const f64,
    n: usize,
    out: *mut *mut TsPotential,
) -> TsStatus {
    guard(|| {
        let out = out_ref(out, "out")?;
        if dim == 0 {
            return Err(Error::InvalidArgument("need dim >= 1".into()).into());
        }
        let coords = in_slice(sites, n.saturating_mul(dim), "sites")?;
        let vals = in_slice(values, n, "values")?;
        let map: HashMap<Vec<i64>, f64> = coords.chunks(dim).map(<[i64]>::to_vec).zip(vals.iter().copied()).collect();
        *out = boxed(TsPotential(Potential::explicit(map)?));
        Ok(())
    })
}

struct Callback {
    f: unsafe extern "C" fn(*const i64, usize, *mut c_void) -> f64,
    user_data: *mut c_void,
}

// The caller promises the callback and its data may be used from any thread.
unsafe impl Send for Callback {}
unsafe impl Sync for Callback {}

impl Callback {
    fn call(&self, x: &[i64]) -> f64 {
        unsafe { (self.f)(x.as_ptr(), x.len(), self.user_data) }
    }
}

/// Potential given by a C callback. The callback may run concurrently on
/// several threads and must stay valid while the handle or any operator
/// built from it is alive. Non-finite values are reported as evaluation errors.
///
/// # Safety
/// `f` must be callable with the documented arguments; `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn ts_potential_callback(
    f: TsPotentialFn,
    user_data: *mut c_void,
    out: *mut *mut TsPotential,
) -> TsStatus {
    guard(|| {
        let out = out_ref(out, "out")?;
        let f = f.ok_or(Fail::Null("f"))?;
        let cb = Callback { f, user_data };
        *out = boxed(TsPotential(Potential::callback(move |x| cb.call(x))));
        Ok(())
    })
}

/// Release a potential. Null is ignored.
///
/// # Safety
/// `potential` must be null or come from a potential constructor, freed once.
#[no_mangle]
pub unsafe extern "C" fn ts_potential_free(potential: *mut TsPotential) {
    if !potential.is_null() {
        drop(Box::from_raw(potential));
    }
}

/// Assemble the operator on the box of side `side` around `center`.
///
/// `center` may be null for the origin. `potential` may be null for `V = 0`.
/// `pattern` may be null only in full mode. `t` is read in penalized mode.
///
/// # Safety
/// Non-null pointers must be valid: `center` for `dim` values, handles from
/// their constructors, `out` for writes.
#[no_mangle]
pub unsafe extern "C" fn ts_operator_new(
    dim: usize,
    center: *const i64,
    side: f64,
    open: bool,
    potential: *const TsPotential,
    pattern: *const TsPattern,
    mode: TsMode,
    t: f64,
    out: *mut *mut TsOperator,
) -> TsStatus {
    guard(|| {
        let out = out_ref(out, "out")?;
        let center = if center.is_null() { vec![0; dim] } else { in_slice(center, dim, "center")?.to_vec() };
        let region = BoxRegion::new(center, side, open)?;
        let zero = Potential::Zero;
        let v = potential.as_ref().map_or(&zero, |p| &p.0);
        let g = pattern.as_ref().map(|p| &p.0);
        let mode = match mode {
            TsMode::Full => Mode::Full,
            TsMode::Trimmed => Mode::Trimmed,
            TsMode::Penalized => Mode::Penalized(t),
        };
        *out = boxed(TsOperator(assemble(&region, v, g, mode)?));
        Ok(())
    })
}

/// Release an operator. Null is ignored.
///
/// # Safety
/// `op` must be null or come from [`ts_operator_new`], freed once.
#[no_mangle]
pub unsafe extern "C" fn ts_operator_free(op: *mut TsOperator) {
    if !op.is_null() {
        drop(Box::from_raw(op));
    }
}

/// Number of sites in the operator domain.
///
/// # Safety
/// `op` must come from [`ts_operator_new`]; `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn ts_operator_size(op: *const TsOperator, out: *mut usize) -> TsStatus {
    guard(|| {
        let op = &in_ref(op, "op")?.0;
        *out_ref(out, "out")? = op.n();
        Ok(())
    })
}

/// Coordinates of domain site `index`, written to `coords` (`dim` values).
///
/// # Safety
/// `op` must come from [`ts_operator_new`]; `coords` must hold `len` values.
#[no_mangle]
pub unsafe extern "C" fn ts_operator_site(op: *const TsOperator, index: usize, coords: *mut i64, len: usize) -> TsStatus {
    guard(|| {
        let op = &in_ref(op, "op")?.0;
        let site = op
            .sites()
            .get(index)
            .ok_or_else(|| Error::InvalidArgument(format!("site index {index} out of range 0..{}", op.n())))?;
        if len < site.len() {
            return Err(Fail::Buffer(site.len(), len));
        }
        if coords.is_null() {
            return Err(Fail::Null("coords"));
        }
        slice::from_raw_parts_mut(coords, site.len()).copy_from_slice(site);
        Ok(())
    })
}

/// Matrix entry `H[i][j]` in domain indices.
///
/// # Safety
/// `op` must come from [`ts_operator_new`]; `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn ts_operator_entry(op: *const TsOperator, i: usize, j: usize, out: *mut f64) -> TsStatus {
    guard(|| {
        let op = &in_ref(op, "op")?.0;
        if i >= op.n() || j >= op.n() {
            return Err(Error::InvalidArgument(format!("index ({i}, {j}) out of range for n = {}", op.n())).into());
        }
        *out_ref(out, "out")? = op.get(i, j);
        Ok(())
    })
}

/// Lowest eigenvalue to tolerance `tol`.
///
/// # Safety
/// `op` must come from [`ts_operator_new`]; `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn ts_ground_energy(op: *const TsOperator, tol: f64, out: *mut f64) -> TsStatus {
    guard(|| {
        let op = &in_ref(op, "op")?.0;
        let out = out_ref(out, "out")?;
        *out = spectra::ground_energy(op, tol)?;
        Ok(())
    })
}

/// Strictly positive normalized ground state. `psi` receives `n` values in
/// domain order; `ucp_holds` (may be null) reports the unique-continuation checks.
///
/// # Safety
/// `op` must come from [`ts_operator_new`]; `psi` must hold `len` values;
/// `energy` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn ts_ground_state(
    op: *const TsOperator,
    tol: f64,
    psi: *mut f64,
    len: usize,
    energy: *mut f64,
    ucp_holds: *mut bool,
) -> TsStatus {
    guard(|| {
        let op = &in_ref(op, "op")?.0;
        let energy = out_ref(energy, "energy")?;
        if len < op.n() {
            return Err(Fail::Buffer(op.n(), len));
        }
        if psi.is_null() {
            return Err(Fail::Null("psi"));
        }
        let opts = PfOptions { tol, ..PfOptions::default() };
        let gs = spectra::ground_state_pf(op, &opts)?;
        slice::from_raw_parts_mut(psi, gs.vector.len()).copy_from_slice(&gs.vector);
        *energy = gs.energy;
        if let Some(u) = ucp_holds.as_mut() {
            *u = gs.ucp.holds();
        }
        Ok(())
    })
}

/// Number of eigenvalues in the closed interval `[a, b]`.
///
/// # Safety
/// `op` must come from [`ts_operator_new`]; `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn ts_count_eigs(op: *const TsOperator, a: f64, b: f64, out: *mut usize) -> TsStatus {
    guard(|| {
        let op = &in_ref(op, "op")?.0;
        let out = out_ref(out, "out")?;
        *out = spectra::count_eigs(op, a, b)?.count;
        Ok(())
    })
}

fn params(d: usize, k: u64, q: u64, spread: f64, e0: f64) -> Result<ModelParams, Fail> {
    Ok(ModelParams::new(d, k, q, spread, e0)?)
}

/// Closed-form lower bound on `E_Γ(H) - E_∅(H)`.
///
/// # Safety
/// `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn ts_delta_lower(d: usize, k: u64, q: u64, spread: f64, out: *mut f64) -> TsStatus {
    guard(|| {
        let out = out_ref(out, "out")?;
        *out = bounds::delta_lower(&params(d, k, q, spread, 0.0)?)?;
        Ok(())
    })
}

/// Lower bound on `E(t) - E_∅(H)` for the penalty `t >= 0`.
///
/// # Safety
/// `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn ts_delta_t_lower(d: usize, k: u64, q: u64, spread: f64, t: f64, out: *mut f64) -> TsStatus {
    guard(|| {
        let out = out_ref(out, "out")?;
        *out = bounds::delta_t_lower(&params(d, k, q, spread, 0.0)?, t)?;
        Ok(())
    })
}

/// Lower bound on `κ(H, Γ, E1)` for `E0 < E1 < E0 + delta_lower`.
///
/// # Safety
/// `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn ts_kappa_lower(
    d: usize,
    k: u64,
    q: u64,
    spread: f64,
    e0: f64,
    e1: f64,
    out: *mut TsKappa,
) -> TsStatus {
    guard(|| {
        let out = out_ref(out, "out")?;
        let b = bounds::kappa_lower(&params(d, k, q, spread, e0)?, e1)?;
        *out = TsKappa {
            s0: b.s0,
            z: b.z,
            kappa_lb: b.kappa_lb,
            witness_s: b.witness_s,
            optimal_s: b.optimal_s,
            kappa_opt: b.kappa_opt,
        };
        Ok(())
    })
}
