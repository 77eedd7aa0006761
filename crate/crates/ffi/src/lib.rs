//! C ABI for `swwe-core`.
//!
//! Every fallible function returns a [`SwweStatus`]; on failure a message is
//! kept per thread and can be read with [`swwe_last_error_message`].
//! Simulations are opaque handles created by [`swwe_simulation_new`] and
//! released by [`swwe_simulation_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use swwe_core::analysis::l2_error;
use swwe_core::model::{reflection_coefficients, spectral_data, Direction, FlowConfig, FlowKind};
use swwe_core::sbp::{DissipationScaling, Grid};
use swwe_core::scenarios::{Scenario, ScenarioKind};
use swwe_core::solver::{Discretization, Simulation};
use swwe_core::SwweError;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SwweStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    InvalidConfig = 3,
    Inconsistent = 4,
    Regime = 5,
    Inadmissible = 6,
    Layout = 7,
    Grid = 8,
    Shape = 9,
    Diverged = 10,
    Panic = 11,
}

impl From<&SwweError> for SwweStatus {
    fn from(e: &SwweError) -> Self {
        match e {
            SwweError::InvalidConfig { .. } => SwweStatus::InvalidConfig,
            SwweError::Inconsistent(_) => SwweStatus::Inconsistent,
            SwweError::Regime { .. } => SwweStatus::Regime,
            SwweError::Inadmissible(_) => SwweStatus::Inadmissible,
            SwweError::Layout { .. } => SwweStatus::Layout,
            SwweError::Grid(_) => SwweStatus::Grid,
            SwweError::Shape { .. } => SwweStatus::Shape,
            SwweError::Diverged { .. } => SwweStatus::Diverged,
        }
    }
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SwweFlowKind {
    SubCritical = 0,
    Critical = 1,
    SuperCritical = 2,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SwweScenario {
    SmoothPulse = 0,
    StepPulse = 1,
    Mms = 2,
    ZeroRandom = 3,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SwweDissipationScale {
    Half = 0,
    Full = 1,
}

/// Linearization state: gravity `g`, mean depth `H`, mean velocity `U`.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SwweFlow {
    pub gravity: f64,
    pub depth: f64,
    pub velocity: f64,
}

/// Scaled eigenvalues and the orthonormal eigenvector matrix, row-major
/// (`s[0] s[1]` is the first row).
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SwweSpectral {
    pub kind: SwweFlowKind,
    /// Sign of `U`: -1, 0 or 1.
    pub direction: i32,
    pub lambda1: f64,
    pub lambda2: f64,
    pub c: f64,
    pub d: f64,
    pub s: [f64; 4],
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SwweRunOptions {
    /// Number of intervals; the grid has `n + 1` nodes.
    pub n: usize,
    pub alpha: f64,
    pub dissipation_scale: SwweDissipationScale,
    pub cr: f64,
    pub scenario: SwweScenario,
    /// Seed for the random scenario.
    pub seed: u64,
}

/// Opaque simulation handle.
pub struct SwweSimulation {
    sim: Simulation,
    scenario: Scenario,
    grid: Grid,
}

thread_local! {
    static LAST_ERROR: RefCell<String> = const { RefCell::new(String::new()) };
}

fn set_error(msg: String) {
    LAST_ERROR.with(|e| *e.borrow_mut() = msg);
}

fn fail(status: SwweStatus, msg: impl Into<String>) -> SwweStatus {
    set_error(msg.into());
    status
}

fn guard<F>(f: F) -> SwweStatus
where
    F: FnOnce() -> Result<(), SwweStatus>,
{
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => SwweStatus::Ok,
        Ok(Err(s)) => s,
        Err(p) => {
            let msg = p
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| p.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panic".into());
            fail(SwweStatus::Panic, msg)
        }
    }
}

fn core<T>(r: swwe_core::Result<T>) -> Result<T, SwweStatus> {
    r.map_err(|e| fail(SwweStatus::from(&e), e.to_string()))
}

unsafe fn read<'a, T>(p: *const T, name: &str) -> Result<&'a T, SwweStatus> {
    p.as_ref()
        .ok_or_else(|| fail(SwweStatus::NullPointer, format!("{name} is null")))
}

unsafe fn write<T>(p: *mut T, v: T, name: &str) -> Result<(), SwweStatus> {
    if p.is_null() {
        return Err(fail(SwweStatus::NullPointer, format!("{name} is null")));
    }
    p.write(v);
    Ok(())
}

fn flow(f: &SwweFlow) -> Result<FlowConfig, SwweStatus> {
    core(FlowConfig::new(f.gravity, f.depth, f.velocity))
}

/// Copy the message of the last failed call on this thread into `buf`
/// (NUL-terminated, truncated to `len`). Returns the full message length
/// including the terminator; pass `buf = NULL` to query it.
///
/// # Safety
/// `buf` must be null or valid for `len` bytes.
#[no_mangle]
pub unsafe extern "C" fn swwe_last_error_message(buf: *mut c_char, len: usize) -> usize {
    LAST_ERROR.with(|e| {
        let msg = e.borrow();
        let bytes = msg.as_bytes();
        if !buf.is_null() && len > 0 {
            let n = bytes.len().min(len - 1);
            ptr::copy_nonoverlapping(bytes.as_ptr(), buf.cast::<u8>(), n);
            *buf.add(n) = 0;
        }
        bytes.len() + 1
    })
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn swwe_version() -> *const c_char {
    static VERSION: &CStr = match CStr::from_bytes_with_nul(concat!(env!("CARGO_PKG_VERSION"), "\0").as_bytes()) {
        Ok(v) => v,
        Err(_) => panic!("version contains NUL"),
    };
    VERSION.as_ptr()
}

/// # Safety
/// `flow` and `out` must be null or valid pointers.
#[no_mangle]
pub unsafe extern "C" fn swwe_spectral_data(flow_: *const SwweFlow, out: *mut SwweSpectral) -> SwweStatus {
    guard(|| {
        let cfg = flow(read(flow_, "flow")?)?;
        let sd = core(spectral_data(&cfg))?;
        let kind = match sd.regime.kind {
            FlowKind::SubCritical => SwweFlowKind::SubCritical,
            FlowKind::Critical => SwweFlowKind::Critical,
            FlowKind::SuperCritical => SwweFlowKind::SuperCritical,
        };
        let direction = match sd.regime.direction {
            Direction::Negative => -1,
            Direction::Zero => 0,
            Direction::Positive => 1,
        };
        let v = SwweSpectral {
            kind,
            direction,
            lambda1: sd.lambda1,
            lambda2: sd.lambda2,
            c: sd.c,
            d: sd.d,
            s: [sd.s[0][0], sd.s[0][1], sd.s[1][0], sd.s[1][1]],
        };
        write(out, v, "out")
    })
}

/// Reflection coefficients for sub-critical flow; other regimes return
/// `SWWE_STATUS_REGIME`.
///
/// # Safety
/// All pointers must be null or valid.
#[no_mangle]
pub unsafe extern "C" fn swwe_reflection_coefficients(
    flow_: *const SwweFlow,
    gamma0: *mut f64,
    gamma1: *mut f64,
) -> SwweStatus {
    guard(|| {
        let cfg = flow(read(flow_, "flow")?)?;
        let rc = core(reflection_coefficients(&cfg))?;
        write(gamma0, rc.gamma0, "gamma0")?;
        write(gamma1, rc.gamma1, "gamma1")
    })
}

/// Set up a simulation of `options.scenario` with the default penalties at
/// `t = 0`. On success `*out` owns a handle for [`swwe_simulation_free`].
///
/// # Safety
/// All pointers must be null or valid.
#[no_mangle]
pub unsafe extern "C" fn swwe_simulation_new(
    flow_: *const SwweFlow,
    options: *const SwweRunOptions,
    out: *mut *mut SwweSimulation,
) -> SwweStatus {
    guard(|| {
        if out.is_null() {
            return Err(fail(SwweStatus::NullPointer, "out is null"));
        }
        *out = ptr::null_mut();
        let cfg = flow(read(flow_, "flow")?)?;
        let opts = *read(options, "options")?;
        let kind = match opts.scenario {
            SwweScenario::SmoothPulse => ScenarioKind::SmoothPulse,
            SwweScenario::StepPulse => ScenarioKind::StepPulse,
            SwweScenario::Mms => ScenarioKind::Mms,
            SwweScenario::ZeroRandom => ScenarioKind::ZeroRandom,
        };
        let scaling = match opts.dissipation_scale {
            SwweDissipationScale::Half => DissipationScaling::Half,
            SwweDissipationScale::Full => DissipationScaling::Full,
        };
        let scenario = core(kind.build(&cfg, opts.seed))?;
        let grid = core(Grid::uniform(opts.n, scenario.domain_length))?;
        let disc = core(Discretization::with_default_penalties(&cfg, grid.clone(), opts.alpha, scaling))?;
        let data = core(scenario.boundary_data(&disc.spectral))?;
        let initial = scenario.initial_state(&grid);
        let sim = core(Simulation::new(disc, data, scenario.forcing.clone(), initial, opts.cr))?;
        *out = Box::into_raw(Box::new(SwweSimulation { sim, scenario, grid }));
        Ok(())
    })
}

/// Release a handle; null is ignored.
///
/// # Safety
/// `sim` must be null or a handle from [`swwe_simulation_new`] that has not
/// been freed.
#[no_mangle]
pub unsafe extern "C" fn swwe_simulation_free(sim: *mut SwweSimulation) {
    if !sim.is_null() {
        drop(Box::from_raw(sim));
    }
}

unsafe fn handle<'a>(sim: *const SwweSimulation) -> Result<&'a SwweSimulation, SwweStatus> {
    read(sim, "simulation")
}

/// Integrate to `t_target`; the last step is shortened to land on it.
///
/// # Safety
/// `sim` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn swwe_simulation_advance(sim: *mut SwweSimulation, t_target: f64) -> SwweStatus {
    guard(|| {
        let s = sim
            .as_mut()
            .ok_or_else(|| fail(SwweStatus::NullPointer, "simulation is null"))?;
        if !t_target.is_finite() {
            return Err(fail(SwweStatus::InvalidArgument, "t_target must be finite"));
        }
        core(s.sim.advance_to(t_target))
    })
}

/// Number of grid nodes (`n + 1`); 0 for a null handle.
///
/// # Safety
/// `sim` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn swwe_simulation_nodes(sim: *const SwweSimulation) -> usize {
    sim.as_ref().map_or(0, |s| s.grid.len())
}

/// # Safety
/// `sim` and `out` must be null or valid.
#[no_mangle]
pub unsafe extern "C" fn swwe_simulation_time(sim: *const SwweSimulation, out: *mut f64) -> SwweStatus {
    guard(|| write(out, handle(sim)?.sim.time(), "out"))
}

/// Copy nodes, depth and velocity perturbations into caller buffers of
/// `len` entries each (`len` must equal the node count). Any of the three
/// buffers may be null to skip it.
///
/// # Safety
/// Non-null buffers must be valid for `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn swwe_simulation_copy_state(
    sim: *const SwweSimulation,
    x: *mut f64,
    h: *mut f64,
    u: *mut f64,
    len: usize,
) -> SwweStatus {
    guard(|| {
        let s = handle(sim)?;
        let m = s.grid.len();
        if len != m {
            return Err(fail(
                SwweStatus::Shape,
                format!("buffers hold {len} values, simulation has {m} nodes"),
            ));
        }
        let state = s.sim.state();
        for (dst, src) in [(x, s.grid.nodes()), (h, state.h()), (u, state.u())] {
            if !dst.is_null() {
                ptr::copy_nonoverlapping(src.as_ptr(), dst, m);
            }
        }
        Ok(())
    })
}

/// Discrete energy `sum |I_i| (g h_i^2 + H u_i^2)` of the current state.
///
/// # Safety
/// `sim` and `out` must be null or valid.
#[no_mangle]
pub unsafe extern "C" fn swwe_simulation_energy(sim: *const SwweSimulation, out: *mut f64) -> SwweStatus {
    guard(|| write(out, handle(sim)?.sim.energy(), "out"))
}

/// Volume-weighted L2 errors against the exact solution at the current
/// time; `SWWE_STATUS_INVALID_ARGUMENT` if the scenario has none.
///
/// # Safety
/// All pointers must be null or valid.
#[no_mangle]
pub unsafe extern "C" fn swwe_simulation_l2_error(
    sim: *const SwweSimulation,
    h_error: *mut f64,
    u_error: *mut f64,
) -> SwweStatus {
    guard(|| {
        let s = handle(sim)?;
        let exact = s
            .scenario
            .exact
            .as_ref()
            .ok_or_else(|| fail(SwweStatus::InvalidArgument, "scenario has no exact solution"))?;
        let state = s.sim.state();
        let (eh, eu) = core(l2_error(state, &**exact, &s.grid, state.t))?;
        write(h_error, eh, "h_error")?;
        write(u_error, eu, "u_error")
    })
}
