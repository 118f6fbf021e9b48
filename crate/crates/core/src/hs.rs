//! Phase-plane dynamics of centered Hamiltonian-stationary profiles.
//!
//! A centered foliated Lagrangian is Hamiltonian-stationary exactly when
//! its profile curve satisfies
//!
//!   alpha' = C / r^{n-1} - n sin(alpha) / r,   r' = cos(alpha),
//!
//! where C >= 0 is the flux constant r^{n-1} (n phi' + alpha'). The
//! system conserves E = 2 r^n sin(alpha) - C r^2; the value of E sorts
//! orbits into the type I / II / III families. Fixed points sit at
//! alpha = pi/2 (mod 2 pi), r = (C/n)^{1/(n-2)}, on the critical level
//! E0 = (C/n)^{n/(n-2)} (2 - n).

use std::f64::consts::PI;

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::ode::{self, OdeOpts, OdeStatus};
use crate::profile::{CurveFn, CurveJet, ProfileCurve};
use crate::quad;

/// Radius below which integration stops with a puncture event.
pub const R_FLOOR: f64 = 1e-9;

/// Radius above which integration stops with an escape event.
pub const R_CAP: f64 = 1e6;

/// Allowed energy drift along a trajectory, relative to max(1, |E|).
pub const DRIFT_BOUND: f64 = 1e-8;

/// |k| below this over the whole grid marks a flat orbit rather than a
/// sequence of sign changes.
pub const FLAT_K_TOL: f64 = 1e-9;

/// Dimension and flux constant of the phase-plane system.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct HsParams {
    n: usize,
    c: f64,
    reversed: bool,
}

impl HsParams {
    /// A negative flux constant is normalized to C >= 0 by reversing the
    /// arclength parameter, which shifts alpha by pi; `reversed` records
    /// that the caller's states live in the reversed frame.
    pub fn new(n: usize, c: f64) -> Result<Self> {
        if n < 3 {
            return Err(Error::DimensionTooSmall(n));
        }
        if !c.is_finite() {
            return Err(Error::BadFlux(c));
        }
        Ok(Self { n, c: c.abs(), reversed: c < 0.0 })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Flux constant, always >= 0.
    pub fn c(&self) -> f64 {
        self.c
    }

    pub fn reversed(&self) -> bool {
        self.reversed
    }
}

/// Phase-plane state. `alpha` is not reduced mod 2 pi, so winding orbits
/// keep a continuous angle.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct HsState {
    pub alpha: f64,
    pub r: f64,
}

impl HsState {
    pub fn new(alpha: f64, r: f64) -> Self {
        Self { alpha, r }
    }
}

/// (alpha', r') of the phase-plane system.
pub fn hs_rhs(state: HsState, params: &HsParams) -> Result<(f64, f64)> {
    if state.r <= 0.0 {
        return Err(Error::NonPositiveRadius(state.r));
    }
    let n = params.n as f64;
    let alpha_dot = params.c / state.r.powi(params.n as i32 - 1) - n * state.alpha.sin() / state.r;
    Ok((alpha_dot, state.alpha.cos()))
}

/// First integral E = 2 r^n sin(alpha) - C r^2.
pub fn energy(state: HsState, params: &HsParams) -> f64 {
    2.0 * state.r.powi(params.n as i32) * state.alpha.sin() - params.c * state.r * state.r
}

/// Turning curvature k = C / r^{n-1} - (n-1) sin(alpha) / r of the
/// profile curve through `state`; alpha' = k - sin(alpha) / r.
pub fn curvature(state: HsState, params: &HsParams) -> Result<f64> {
    if state.r <= 0.0 {
        return Err(Error::NonPositiveRadius(state.r));
    }
    let nm1 = params.n as f64 - 1.0;
    Ok(params.c / state.r.powi(params.n as i32 - 1) - nm1 * state.alpha.sin() / state.r)
}

/// The unique interior fixed point (pi/2, (C/n)^{1/(n-2)}) and its
/// energy E0 = (C/n)^{n/(n-2)} (2-n). C = 0 has no interior fixed point
/// (the orbits are then special-Lagrangian profiles).
pub fn fixed_points(params: &HsParams) -> Result<(HsState, f64)> {
    if params.c <= 0.0 {
        return Err(Error::NoFixedPoint);
    }
    let n = params.n as f64;
    let base = params.c / n;
    let r_bar = base.powf(1.0 / (n - 2.0));
    let e0 = base.powf(n / (n - 2.0)) * (2.0 - n);
    let state = HsState { alpha: PI / 2.0, r: r_bar };
    debug_assert!(
        (energy(state, params) - e0).abs() <= 1e-12 * e0.abs().max(1.0),
        "fixed-point energy {} vs E0 {}",
        energy(state, params),
        e0
    );
    Ok((state, e0))
}

/// Connected-component tags of an energy level set.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum OrbitTag {
    FixedPoint,
    /// Unbounded, no inflections.
    TypeI,
    /// Unbounded with a dip through sin(alpha) < 0; two inflections.
    TypeII,
    /// Bounded spiraloid winding in alpha.
    TypeIII,
    /// On the E0 level: orbits asymptotic to the fixed points.
    Critical,
}

impl std::fmt::Display for OrbitTag {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let name = match self {
            OrbitTag::FixedPoint => "fixed-point",
            OrbitTag::TypeI => "type-I",
            OrbitTag::TypeII => "type-II",
            OrbitTag::TypeIII => "type-III",
            OrbitTag::Critical => "critical",
        };
        f.write_str(name)
    }
}

/// Component tags of one energy level, bounded-in-r component first
/// when there are two.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EnergyClass {
    pub components: Vec<OrbitTag>,
}

impl EnergyClass {
    pub fn contains(&self, tag: OrbitTag) -> bool {
        self.components.contains(&tag)
    }
}

impl std::fmt::Display for EnergyClass {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let mut first = true;
        for tag in &self.components {
            if !first {
                f.write_str(" + ")?;
            }
            write!(f, "{tag}")?;
            first = false;
        }
        Ok(())
    }
}

/// Sorts an energy level into orbit types: E >= 0 is a single type I
/// component, E < E0 a single type II, E in (E0, 0) splits into a
/// bounded type III and an unbounded type I component, and the E0 level
/// itself carries the fixed points and the critical orbits joining them.
pub fn classify(params: &HsParams, e: f64) -> Result<EnergyClass> {
    let (_, e0) = fixed_points(params)?;
    let components = if e >= 0.0 {
        vec![OrbitTag::TypeI]
    } else if (e - e0).abs() <= 1e-12 * e0.abs().max(1.0) {
        vec![OrbitTag::FixedPoint, OrbitTag::Critical]
    } else if e < e0 {
        vec![OrbitTag::TypeII]
    } else {
        vec![OrbitTag::TypeIII, OrbitTag::TypeI]
    };
    Ok(EnergyClass { components })
}

/// Zero set of the turning curvature in the phase plane:
/// r = (C / ((n-1) sin alpha))^{1/(n-2)} where sin(alpha) > 0.
#[derive(Clone, Copy, Debug)]
pub struct InflectionLocus {
    params: HsParams,
    /// Least radius on the locus, attained at alpha = pi/2.
    pub r1: f64,
    /// Energy of the locus point (pi/2, r1); for n = 3 this is 0 and
    /// the locus coincides with the E = 0 level set.
    pub e1: f64,
}

impl InflectionLocus {
    pub fn r_at(&self, alpha: f64) -> Result<f64> {
        let sa = alpha.sin();
        if sa <= 0.0 {
            return Err(Error::Config(format!(
                "inflection locus needs sin(alpha) > 0, got alpha = {alpha}"
            )));
        }
        let n = self.params.n as f64;
        Ok((self.params.c / ((n - 1.0) * sa)).powf(1.0 / (n - 2.0)))
    }
}

pub fn inflection_locus(params: &HsParams) -> Result<InflectionLocus> {
    if params.c <= 0.0 {
        return Err(Error::NoFixedPoint);
    }
    let n = params.n as f64;
    let r1 = (params.c / (n - 1.0)).powf(1.0 / (n - 2.0));
    let e1 = 2.0 * r1.powi(params.n as i32) - params.c * r1 * r1;
    let locus = InflectionLocus { params: *params, r1, e1 };
    if params.n > 3 {
        let (_, e0) = fixed_points(params)?;
        debug_assert!(e0 < e1 && e1 < 0.0, "E1 = {e1} outside (E0, 0) = ({e0}, 0)");
    } else {
        // n = 3: on the locus r = C / (2 sin alpha) the energy
        // 2 r^3 sin(alpha) - C r^2 = r^2 (2 r sin(alpha) - C) vanishes.
        debug_assert!(e1.abs() <= 1e-12 * params.c.abs().max(1.0));
    }
    Ok(locus)
}

/// Why a trajectory stopped where it did.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Termination {
    /// Covered the requested span.
    Completed,
    /// Radius fell to the puncture floor.
    RadiusFloor { s: f64 },
    /// Radius exceeded the escape cap.
    RadiusCap { s: f64 },
    /// Step budget ran out first.
    StepLimit { s: f64 },
}

/// An integrated orbit with dense output.
#[derive(Clone, Debug)]
pub struct HsTrajectory {
    sol: ode::OdeSolution,
    params: HsParams,
    e0: f64,
    energy_drift: f64,
    termination: Termination,
}

impl HsTrajectory {
    pub fn params(&self) -> &HsParams {
        &self.params
    }

    /// Energy at the initial state.
    pub fn energy(&self) -> f64 {
        self.e0
    }

    /// Max |E(s) - E(0)| over the accepted grid.
    pub fn energy_drift(&self) -> f64 {
        self.energy_drift
    }

    pub fn termination(&self) -> Termination {
        self.termination
    }

    /// Covered span in increasing order.
    pub fn s_span(&self) -> (f64, f64) {
        self.sol.s_span()
    }

    /// Anchor of the initial state.
    pub fn s_start(&self) -> f64 {
        self.sol.s0
    }

    /// Last covered parameter (equals the event location on early stops).
    pub fn s_end(&self) -> f64 {
        self.sol.s_last
    }

    pub fn state_at(&self, s: f64) -> Result<HsState> {
        let y = self.sol.eval(s)?;
        Ok(HsState { alpha: y[0], r: y[1] })
    }

    pub fn last_state(&self) -> HsState {
        HsState { alpha: self.sol.y_last[0], r: self.sol.y_last[1] }
    }

    /// Accepted grid points (s, state), starting at the initial state.
    pub fn grid(&self) -> Vec<(f64, HsState)> {
        let mut out = Vec::with_capacity(self.sol.steps.len() + 1);
        out.push((self.sol.s0, HsState { alpha: self.sol.y0[0], r: self.sol.y0[1] }));
        for step in &self.sol.steps {
            let s = step.s1();
            let y = step.eval(s);
            out.push((s, HsState { alpha: y[0], r: y[1] }));
        }
        out
    }

    /// Parameter values where g(s, state) crosses zero.
    pub fn crossings<G: Fn(f64, HsState) -> f64>(&self, g: G) -> Vec<f64> {
        self.sol
            .crossings(&|s, y: &[f64]| g(s, HsState { alpha: y[0], r: y[1] }))
    }

    /// Distance from the final state to the fixed point, with the angle
    /// reduced mod 2 pi; used to label asymptotic approach along
    /// critical orbits.
    pub fn final_fixed_point_distance(&self) -> Result<f64> {
        let (fp, _) = fixed_points(&self.params)?;
        let last = self.last_state();
        let mut da = (last.alpha - fp.alpha) % (2.0 * PI);
        if da > PI {
            da -= 2.0 * PI;
        } else if da < -PI {
            da += 2.0 * PI;
        }
        let dr = last.r - fp.r;
        Ok((da * da + dr * dr).sqrt())
    }
}

/// Integrates the phase-plane system over `s_span` = (start, end) with
/// the default radius window [R_FLOOR, R_CAP].
pub fn integrate(
    params: &HsParams,
    initial: HsState,
    s_span: (f64, f64),
    tol: f64,
) -> Result<HsTrajectory> {
    integrate_bounded(params, initial, s_span, tol, R_FLOOR, R_CAP)
}

/// Same with an explicit radius window; the solve stops with a recorded
/// termination reason when r leaves it.
///
/// A start whose vector field vanishes to machine precision is held
/// constant: the fixed point is a hyperbolic saddle, so integrating
/// through the rounding residue of cos(pi/2) would otherwise amplify a
/// ~1e-16 representation artifact into an escape along the unstable
/// manifold by s ~ 20.
pub fn integrate_bounded(
    params: &HsParams,
    initial: HsState,
    s_span: (f64, f64),
    tol: f64,
    r_floor: f64,
    r_cap: f64,
) -> Result<HsTrajectory> {
    if initial.r <= 0.0 {
        return Err(Error::NonPositiveRadius(initial.r));
    }
    if tol < 1e-12 {
        return Err(Error::Config(format!("tolerance {tol:e} below the 1e-12 floor")));
    }
    if !(r_floor > 0.0 && r_floor < r_cap) {
        return Err(Error::Config(format!("bad radius window [{r_floor}, {r_cap}]")));
    }
    let (da0, dr0) = hs_rhs(initial, params)?;
    if da0.abs() <= 1e-13 && dr0.abs() <= 1e-13 {
        let sol = ode::OdeSolution {
            steps: Vec::new(),
            s0: s_span.0,
            y0: vec![initial.alpha, initial.r],
            s_last: s_span.1,
            y_last: vec![initial.alpha, initial.r],
            status: OdeStatus::ReachedEnd,
            n_accepted: 0,
            n_rejected: 0,
        };
        return Ok(HsTrajectory {
            sol,
            params: *params,
            e0: energy(initial, params),
            energy_drift: 0.0,
            termination: Termination::Completed,
        });
    }
    let p = *params;
    let rhs = move |_s: f64, y: &[f64]| -> Result<Vec<f64>> {
        let (da, dr) = hs_rhs(HsState { alpha: y[0], r: y[1] }, &p)?;
        Ok(vec![da, dr])
    };
    let floor_ev = move |_s: f64, y: &[f64]| y[1] - r_floor;
    let cap_ev = move |_s: f64, y: &[f64]| y[1] - r_cap;
    let events: [Box<dyn Fn(f64, &[f64]) -> f64>; 2] = [Box::new(floor_ev), Box::new(cap_ev)];
    let opts = OdeOpts { atol: tol, rtol: tol, ..OdeOpts::default() };
    // Newton projection onto the energy level after each accepted step;
    // without it the grid drift grows secularly with the span and with r
    // (dE is badly conditioned at large radii). Skipped near the fixed
    // point where the gradient vanishes.
    let e0 = energy(initial, params);
    let project = move |_s: f64, y: &mut [f64]| -> bool {
        let mut moved = false;
        for _ in 0..3 {
            let (alpha, r) = (y[0], y[1]);
            if r <= 0.0 {
                break;
            }
            let (sa, ca) = alpha.sin_cos();
            let rn = r.powi(p.n as i32);
            let g = 2.0 * rn * sa - p.c * r * r - e0;
            if g.abs() <= 1e-14 * e0.abs().max(1.0) {
                break;
            }
            let ga = 2.0 * rn * ca;
            let gr = 2.0 * (p.n as f64) * rn / r * sa - 2.0 * p.c * r;
            let norm2 = ga * ga + gr * gr;
            if norm2 <= 1e-20 {
                break;
            }
            let scale = g / norm2;
            let r_new = r - scale * gr;
            if r_new <= 0.0 {
                break;
            }
            y[0] = alpha - scale * ga;
            y[1] = r_new;
            moved = true;
        }
        moved
    };
    let sol = ode::integrate_projected(
        &rhs,
        s_span.0,
        &[initial.alpha, initial.r],
        s_span.1,
        &opts,
        &events,
        project,
    )?;

    let termination = match sol.status {
        OdeStatus::ReachedEnd => Termination::Completed,
        OdeStatus::Event { index: 0, s } => Termination::RadiusFloor { s },
        OdeStatus::Event { index: _, s } => Termination::RadiusCap { s },
        OdeStatus::MaxSteps => Termination::StepLimit { s: sol.s_last },
    };
    let mut drift = 0.0f64;
    for step in &sol.steps {
        let y = step.eval(step.s1());
        let e = energy(HsState { alpha: y[0], r: y[1] }, params);
        drift = drift.max((e - e0).abs());
    }
    let e_last = energy(HsState { alpha: sol.y_last[0], r: sol.y_last[1] }, params);
    drift = drift.max((e_last - e0).abs());
    if drift >= DRIFT_BOUND * e0.abs().max(1.0) {
        return Err(Error::Integration(format!(
            "energy drift {drift:e} exceeds {:e} (E = {e0})",
            DRIFT_BOUND * e0.abs().max(1.0)
        )));
    }
    Ok(HsTrajectory { sol, params: *params, e0, energy_drift: drift, termination })
}

/// Inflection scan along a trajectory.
#[derive(Clone, Debug)]
pub struct InflectionReport {
    /// Parameter values where k changes sign, refined on dense output.
    pub zeros: Vec<f64>,
    /// Sup of |k| over the sample grid.
    pub sup_abs_k: f64,
    /// k vanishes identically (within FLAT_K_TOL); `zeros` is then empty.
    pub identically_zero: bool,
}

/// Locates sign changes of the turning curvature k along the orbit. A
/// uniformly tiny k (the n = 3, E = 0 orbits) is reported as flat
/// rather than as spurious crossings.
pub fn count_inflections(traj: &HsTrajectory) -> InflectionReport {
    let (lo, hi) = traj.s_span();
    let params = *traj.params();
    let k_of = |st: HsState| -> f64 {
        curvature(st, &params).unwrap_or(f64::NAN)
    };
    let mut sup = 0.0f64;
    let samples = 257;
    for i in 0..samples {
        let s = lo + (hi - lo) * (i as f64) / ((samples - 1) as f64);
        if let Ok(st) = traj.state_at(s) {
            sup = sup.max(k_of(st).abs());
        }
    }
    for (_, st) in traj.grid() {
        sup = sup.max(k_of(st).abs());
    }
    if sup < FLAT_K_TOL {
        return InflectionReport { zeros: Vec::new(), sup_abs_k: sup, identically_zero: true };
    }
    let zeros = traj.crossings(|_s, st| k_of(st));
    InflectionReport { zeros, sup_abs_k: sup, identically_zero: false }
}

/// Profile curve carried by an integrated orbit: r and alpha come from
/// the dense output, phi from quadrature of sin(alpha)/r.
struct HsCurve {
    traj: HsTrajectory,
    phi0: f64,
    /// phi at each accepted grid point, in integration order.
    phi_knots: Vec<f64>,
}

impl HsCurve {
    fn build(traj: HsTrajectory, phi0: f64) -> Result<Self> {
        if let Termination::RadiusFloor { s } = traj.termination() {
            return Err(Error::RadiusVanishes(s));
        }
        let steps = &traj.sol.steps;
        let mut phi_knots = Vec::with_capacity(steps.len() + 1);
        let mut phi = phi0;
        phi_knots.push(phi);
        for step in steps {
            let f = |s: f64| {
                let y = step.eval(s);
                y[0].sin() / y[1]
            };
            // The span may end mid-step on an event; clip the panel.
            let s1 = clip_to_span(step.s1(), traj.sol.s0, traj.sol.s_last);
            phi += quad::gauss5(&f, step.s0, s1);
            phi_knots.push(phi);
            if s1 != step.s1() {
                break;
            }
        }
        Ok(Self { traj, phi0, phi_knots })
    }

    fn phi_at(&self, s: f64) -> Result<f64> {
        let steps = &self.traj.sol.steps;
        if steps.is_empty() {
            // Constant state (equilibrium or point span).
            let y = &self.traj.sol.y0;
            return Ok(self.phi0 + (s - self.traj.sol.s0) * y[0].sin() / y[1]);
        }
        let forward = steps[0].h > 0.0;
        let idx = steps
            .partition_point(|st| if forward { st.s1() < s } else { st.s1() > s })
            .min(self.phi_knots.len() - 2)
            .min(steps.len() - 1);
        let step = &steps[idx];
        let f = |t: f64| {
            let y = step.eval(t);
            y[0].sin() / y[1]
        };
        Ok(self.phi_knots[idx] + quad::gauss5(&f, step.s0, s))
    }
}

fn clip_to_span(s: f64, a: f64, b: f64) -> f64 {
    if a <= b {
        s.clamp(a, b)
    } else {
        s.clamp(b, a)
    }
}

impl CurveFn for HsCurve {
    fn domain(&self) -> (f64, f64) {
        self.traj.s_span()
    }

    fn jet(&self, s: f64) -> Result<CurveJet> {
        let st = self.traj.state_at(s)?;
        let phi = self.phi_at(s)?;
        let (sa, ca) = st.alpha.sin_cos();
        let (alpha_dot, _) = hs_rhs(st, self.traj.params())?;
        let r = st.r;
        Ok(CurveJet {
            r,
            phi,
            dr: ca,
            dphi: sa / r,
            d2r: -sa * alpha_dot,
            d2phi: ca * alpha_dot / r - sa * ca / (r * r),
        })
    }

    fn curvature_rate(&self, s: f64) -> Result<f64> {
        let st = self.traj.state_at(s)?;
        let params = self.traj.params();
        let (sa, ca) = st.alpha.sin_cos();
        let (alpha_dot, _) = hs_rhs(st, params)?;
        let r = st.r;
        let nm1 = params.n() as f64 - 1.0;
        let leaf_rate = ca * alpha_dot / r - sa * ca / (r * r);
        Ok(-nm1 * params.c() * ca / r.powi(params.n() as i32) - nm1 * leaf_rate)
    }
}

/// Wraps a trajectory as a profile curve with phi(s) = phi0 + integral
/// of sin(alpha)/r. Fails with a singularity error if the orbit ran
/// into the radius floor.
pub fn curve_from_hs_trajectory(traj: &HsTrajectory, phi0: f64) -> Result<ProfileCurve> {
    HsCurve::build(traj.clone(), phi0).map(|c| ProfileCurve::new(Arc::new(c)))
}
