//! Total variation of phase along stationary profile curves, planar
//! self-intersection detection, and the catalog of solution families.
//!
//! The phase swept by an orbit of the profile ODE is Phi = int sin(alpha)/r ds.
//! On the level set E = 2 r^n sin(alpha) - C r^2 the integral collapses to
//! one-dimensional quadratures in the scaled radius x or in alpha; this
//! module evaluates them with the endpoint singularities removed and
//! classifies each orbit into one of five families by energy and, where
//! the phase budget permits, by embeddedness of the plane curve.

use std::collections::{HashMap, HashSet};
use std::f64::consts::{FRAC_PI_2, PI};

use crate::error::{Error, Result};
use crate::hs::{self, HsParams, HsState, HsTrajectory, OrbitTag};
use crate::profile::ProfileCurve;
use crate::quad::{self, Improper};
use crate::roots;

/// A phase integral that accumulates this many radians is reported
/// divergent rather than refined further.
pub const PHASE_CAP: f64 = 1e4;
/// The scaled-flux parameter lambda = C / (2 r0^{n-2}) this close to its
/// critical value n/2 is treated as sitting on the divergent level.
const LAMBDA_MARGIN: f64 = 1e-9;
/// Absolute tolerance per adaptive quadrature call.
const QUAD_TOL: f64 = 1e-10;
/// Tail-increment threshold for the doubling truncation of improper
/// integrals.
const TAIL_TOL: f64 = 1e-9;
/// Relative residual allowed when a radius is recovered from the first
/// integral by root finding.
const ENERGY_RESIDUAL: f64 = 1e-10;

/// A computed total variation of phase.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum PhaseValue {
    Finite(f64),
    Divergent,
}

impl PhaseValue {
    pub fn finite(self) -> Option<f64> {
        match self {
            PhaseValue::Finite(v) => Some(v),
            PhaseValue::Divergent => None,
        }
    }

    pub fn is_divergent(self) -> bool {
        matches!(self, PhaseValue::Divergent)
    }
}

impl std::fmt::Display for PhaseValue {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            PhaseValue::Finite(v) => write!(f, "{v}"),
            PhaseValue::Divergent => write!(f, "divergent"),
        }
    }
}

/// Phase integral with an error bound and, for orbits that dip below
/// sin(alpha) = 0, the signed pieces.
#[derive(Clone, Copy, Debug)]
pub struct PhaseResult {
    pub value: PhaseValue,
    /// Bound on quadrature plus truncation error; infinite when the
    /// value is divergent.
    pub error_estimate: f64,
    /// (positive piece, negative piece); the total is their sum.
    pub pieces: Option<(f64, f64)>,
}

impl PhaseResult {
    fn divergent() -> Self {
        Self { value: PhaseValue::Divergent, error_estimate: f64::INFINITY, pieces: None }
    }

    fn finite(v: f64, err: f64) -> Self {
        Self { value: PhaseValue::Finite(v), error_estimate: err, pieces: None }
    }

    pub fn total(&self) -> Option<f64> {
        self.value.finite()
    }
}

/// Error bound for a finite improper quadrature: at most 65 adaptive
/// calls at QUAD_TOL each, the truncated tail below TAIL_TOL with a
/// geometric decay margin, plus accumulated roundoff.
fn quadrature_err(v: f64) -> f64 {
    65.0 * QUAD_TOL + 2.0 * TAIL_TOL + 1e-12 * v.abs()
}

fn binomial(n: usize, k: usize) -> f64 {
    let mut acc = 1.0f64;
    for i in 0..k {
        acc = acc * (n - i) as f64 / (i + 1) as f64;
    }
    acc
}

/// lambda = C / (2 r^{n-2}).
fn lambda_at(params: &HsParams, r: f64) -> f64 {
    params.c() / (2.0 * r.powi(params.n() as i32 - 2))
}

/// Phase of an orbit with sin(alpha) > 0 throughout, over both halves.
///
/// With x = r/r0 the integral is 2 int_1^inf (dx/x) q/sqrt(1-q^2) for
/// q = (lambda(x^2-1)+1)/x^n. The substitution x = 1 + u^2 removes the
/// inverse-square-root endpoint: 1 - q = u^2 B(u)/x^n with
/// B(u) = sum_{k=1..n} C(n,k) u^{2k-2} - lambda(2 + u^2), every
/// coefficient of B positive for lambda < n/2, so no cancellation is
/// left near u = 0 and the integrand becomes
/// 4 q x^{n/2-1} / (sqrt(B) sqrt(1+q)).
pub fn phi_type1(params: &HsParams, r0: f64) -> Result<PhaseResult> {
    if r0 <= 0.0 {
        return Err(Error::NonPositiveRadius(r0));
    }
    let n = params.n();
    let lam = lambda_at(params, r0);
    if lam >= 0.5 * n as f64 - LAMBDA_MARGIN {
        return Ok(PhaseResult::divergent());
    }
    let g = move |u: f64| {
        let u2 = u * u;
        let x = 1.0 + u2;
        let q = (lam * (x * x - 1.0) + 1.0) / x.powi(n as i32);
        let mut b = -lam * (2.0 + u2);
        let mut pw = 1.0;
        for k in 1..=n {
            b += binomial(n, k) * pw;
            pw *= u2;
        }
        4.0 * q * x.powf(0.5 * n as f64 - 1.0) / (b.sqrt() * (1.0 + q).sqrt())
    };
    match quad::to_infinity(&g, 0.0, 1.0, QUAD_TOL, TAIL_TOL, PHASE_CAP)? {
        Improper::Divergent => Ok(PhaseResult::divergent()),
        Improper::Value(v) => Ok(PhaseResult::finite(v, quadrature_err(v))),
    }
}

/// Tail of the type-I phase integral beyond a finite scaled radius, in
/// the raw x variable (no endpoint singularity away from x = 1). Used to
/// close truncated trajectory integrations.
pub fn phi_type1_tail(params: &HsParams, r0: f64, x_from: f64) -> Result<f64> {
    let n = params.n() as i32;
    let lam = lambda_at(params, r0);
    let f = move |x: f64| {
        let q = (lam * (x * x - 1.0) + 1.0) / x.powi(n);
        2.0 * q / (x * (1.0 - q * q).sqrt())
    };
    match quad::to_infinity(&f, x_from, x_from, QUAD_TOL, TAIL_TOL, PHASE_CAP)? {
        Improper::Divergent => Err(Error::Quadrature("tail did not converge".into())),
        Improper::Value(v) => Ok(v),
    }
}

/// Radius on the level set at a dip angle (sin(alpha) < 0). The level
/// function is strictly decreasing in r there, so the root is unique.
fn dip_radius(params: &HsParams, e: f64, alpha: f64) -> Result<f64> {
    let sa = alpha.sin();
    let c = params.c();
    let n = params.n() as i32;
    if e >= 0.0 {
        return Err(Error::NoRadiusOnBranch { e, alpha });
    }
    let r_zero = (-e / c).sqrt();
    if sa >= 0.0 {
        return Ok(r_zero);
    }
    let g = |r: f64| 2.0 * r.powi(n) * sa - c * r * r - e;
    roots::brent(&g, 1e-12 * r_zero, r_zero, 1e-14 * (1.0 + r_zero), 200)
}

/// Radius of the bounded component at an angle with sin(alpha) > 0:
/// the smaller root, below the fold radius (C/(n sin a))^{1/(n-2)}.
fn bounded_radius(params: &HsParams, e: f64, alpha: f64) -> Result<f64> {
    let sa = alpha.sin();
    let c = params.c();
    let n = params.n();
    if e >= 0.0 {
        return Err(Error::NoRadiusOnBranch { e, alpha });
    }
    let r_zero = (-e / c).sqrt();
    if sa <= 1e-14 {
        return Ok(r_zero);
    }
    let r_fold = (c / (n as f64 * sa)).powf(1.0 / (n as f64 - 2.0));
    let g = |r: f64| 2.0 * r.powi(n as i32) * sa - c * r * r - e;
    if g(r_fold) >= 0.0 {
        return Err(Error::NoRadiusOnBranch { e, alpha });
    }
    roots::brent(&g, 1e-12 * r_fold.min(r_zero), r_fold, 1e-14 * (1.0 + r_fold), 200)
}

/// Outer radius at sin(alpha) = 1: the largest root of
/// 2 r^n - C r^2 - E = 0. For E >= 0 it is the only positive root; for
/// E in (E0, 0) it is the unbounded component's minimum radius.
fn outer_radius(params: &HsParams, e: f64) -> Result<f64> {
    let c = params.c();
    let n = params.n() as i32;
    let g = |r: f64| 2.0 * r.powi(n) - c * r * r - e;
    let mut lo = if c > 0.0 { (c / params.n() as f64).powf(1.0 / (n as f64 - 2.0)) } else { 1e-9 };
    if g(lo) > 0.0 {
        // C = 0 or degenerate window; fall back to a tiny bracket start.
        lo = 1e-12;
        if g(lo) > 0.0 {
            return Err(Error::NoRadiusOnBranch { e, alpha: FRAC_PI_2 });
        }
    }
    let mut hi = 2.0 * lo.max(1.0);
    for _ in 0..200 {
        if g(hi) > 0.0 {
            break;
        }
        hi *= 2.0;
    }
    roots::brent(&g, lo, hi, 1e-14 * (1.0 + hi), 200)
}

/// d phi / d alpha along a level set with the radius supplied per angle.
/// NaN poisons the enclosing quadrature when the root goes bad, which
/// surfaces as a quadrature error instead of a silent wrong value.
fn phase_rate(params: &HsParams, e: f64, alpha: f64, r: Result<f64>) -> f64 {
    let sa = alpha.sin();
    if sa.abs() < 1e-14 {
        return 0.0;
    }
    let r = match r {
        Ok(r) => r,
        Err(_) => return f64::NAN,
    };
    let c = params.c();
    let n = params.n();
    let residual = 2.0 * r.powi(n as i32) * sa - c * r * r - e;
    if residual.abs() > ENERGY_RESIDUAL * e.abs().max(1.0) {
        return f64::NAN;
    }
    let t = r.powi(n as i32 - 2) * sa;
    t / (c - n as f64 * t)
}

/// Dip contribution int_pi^{2pi} d phi, negative throughout.
fn phi_minus(params: &HsParams, e: f64) -> Result<f64> {
    let f = |a: f64| phase_rate(params, e, a, dip_radius(params, e, a));
    quad::adaptive(&f, PI, 2.0 * PI, QUAD_TOL)
}

/// Phase pieces of an orbit below the critical energy: E = -C r1^2 with
/// r1 the radius at the sin(alpha) = 0 crossings. The positive piece is
/// carried by the two unbounded arms, the negative by the dip between
/// them.
pub fn phi_type2(params: &HsParams, r1: f64) -> Result<PhaseResult> {
    if r1 <= 0.0 {
        return Err(Error::NonPositiveRadius(r1));
    }
    let n = params.n();
    let c = params.c();
    if c <= 0.0 {
        return Err(Error::Config("a sub-critical orbit needs a positive flux constant".into()));
    }
    let e = -c * r1 * r1;
    let (_, e0) = hs::fixed_points(params)?;
    if e >= e0 {
        return Err(Error::Config(format!(
            "E = {e} is not below the critical level E0 = {e0}"
        )));
    }
    let lam = lambda_at(params, r1);
    // q = lambda (x^2-1)/x^n vanishes at x = 1, so the u-substitution
    // needs no endpoint series here; it just concentrates nodes where
    // the arc bends.
    let g = move |u: f64| {
        let x = 1.0 + u * u;
        let q = lam * (x * x - 1.0) / x.powi(n as i32);
        let d = (1.0 - q) * (1.0 + q);
        4.0 * u * q / (x * d.sqrt())
    };
    let plus = match quad::to_infinity(&g, 0.0, 1.0, QUAD_TOL, TAIL_TOL, PHASE_CAP)? {
        Improper::Divergent => return Ok(PhaseResult::divergent()),
        Improper::Value(v) => v,
    };
    let minus = phi_minus(params, e)?;
    let total = plus + minus;
    Ok(PhaseResult {
        value: PhaseValue::Finite(total),
        error_estimate: quadrature_err(plus) + QUAD_TOL + 1e-12 * minus.abs(),
        pieces: Some((plus, minus)),
    })
}

/// Arclength of one winding of the bounded component, from the period
/// integral of 1/alpha' over a full turn. A few percent of accuracy is
/// enough: the integration span built on it is retried with doubling.
fn type3_period(params: &HsParams, e: f64) -> f64 {
    let c = params.c();
    let n = params.n();
    let integrand = |a: f64| -> f64 {
        let sa = a.sin();
        let r = if sa > 0.0 { bounded_radius(params, e, a) } else { dip_radius(params, e, a) };
        let r = match r {
            Ok(r) => r,
            Err(_) => return 0.0,
        };
        r.powi(n as i32 - 1) / (c - n as f64 * r.powi(n as i32 - 2) * sa)
    };
    let panels = 256;
    let h = 2.0 * PI / panels as f64;
    let mut total = 0.0;
    for i in 0..panels {
        total += quad::gauss5(&integrand, h * i as f64, h * (i + 1) as f64);
    }
    total
}

/// Integrates the bounded component from its widest point
/// (alpha = pi/2, r = r_a) until alpha has advanced by
/// `turns` * 2 pi + pi/2.
fn integrate_type3(params: &HsParams, e: f64, turns: f64) -> Result<HsTrajectory> {
    let ra = bounded_radius(params, e, FRAC_PI_2)?;
    let target = FRAC_PI_2 + turns * 2.0 * PI;
    let mut span = (turns + 0.25) * type3_period(params, e) * 1.2 + 1.0;
    for _ in 0..4 {
        if span > 1e5 {
            break;
        }
        let traj = hs::integrate(params, HsState::new(FRAC_PI_2, ra), (0.0, span), 1e-12)?;
        if traj.last_state().alpha >= target {
            return Ok(traj);
        }
        span *= 2.0;
    }
    Err(Error::Integration(format!(
        "bounded orbit at E = {e} did not complete {turns} windings within the span budget"
    )))
}

/// Phase pieces of a bounded orbit (E0 < E < 0) over one winding of the
/// parameter alpha, which increases strictly along the component. The
/// positive piece collects alpha in [pi/2, pi] and [2pi, 2pi + pi/2],
/// the negative piece the dip between them.
pub fn phi_type3(params: &HsParams, e: f64) -> Result<PhaseResult> {
    let (_, e0) = hs::fixed_points(params)?;
    if !(e > e0 && e < 0.0) {
        return Err(Error::Config(format!(
            "E = {e} lies outside the bounded-orbit band ({e0}, 0)"
        )));
    }
    let traj = integrate_type3(params, e, 1.0)?;
    // alpha must be a parameter: strictly increasing along the orbit.
    let grid = traj.grid();
    for w in grid.windows(2) {
        if w[1].1.alpha <= w[0].1.alpha {
            return Err(Error::Config(
                "alpha is not monotone along the supplied component".into(),
            ));
        }
    }
    let s_of = |target: f64| -> Result<f64> {
        let hits = traj.crossings(|_, st| st.alpha - target);
        hits.first().copied().ok_or_else(|| {
            Error::Integration(format!("orbit never reached alpha = {target}"))
        })
    };
    let s_pi = s_of(PI)?;
    let s_2pi = s_of(2.0 * PI)?;
    let s_end = s_of(2.0 * PI + FRAC_PI_2)?;
    let curve = hs::curve_from_hs_trajectory(&traj, 0.0)?;
    let phi_at = |s: f64| -> Result<f64> { Ok(curve.jet(s)?.phi) };
    let p0 = phi_at(traj.s_start())?;
    let p1 = phi_at(s_pi)?;
    let p2 = phi_at(s_2pi)?;
    let p3 = phi_at(s_end)?;
    let plus = (p1 - p0) + (p3 - p2);
    let minus = p2 - p1;
    let total = plus + minus;
    Ok(PhaseResult {
        value: PhaseValue::Finite(total),
        error_estimate: 1e-7 + 1e-9 * total.abs(),
        pieces: Some((plus, minus)),
    })
}

/// Transverse self-intersections of the plane curve gamma = r e^{i phi}
/// over `s_span`, as parameter pairs (s1, s2) with s1 < s2.
///
/// The curve is flattened to a polyline at `resolution` points per unit
/// of parameter (at least 2), candidate segment pairs are collected on a
/// uniform grid keyed by segment bounding boxes, proper crossings are
/// confirmed by orientation tests, and every hit is sharpened by a 2-D
/// Newton iteration on gamma(s1) - gamma(s2) to 1e-9. Non-adjacent
/// duplicates of one geometric crossing are merged.
pub fn detect_self_intersection(
    curve: &ProfileCurve,
    s_span: (f64, f64),
    resolution: f64,
) -> Result<Vec<(f64, f64)>> {
    let (lo, hi) = s_span;
    if !(hi > lo) {
        return Err(Error::Config(format!("empty parameter span [{lo}, {hi}]")));
    }
    let res = resolution.max(2.0);
    let count = ((hi - lo) * res).ceil() as usize + 1;
    let count = count.clamp(8, 2_000_000);
    let step = (hi - lo) / (count - 1) as f64;
    let mut pts = Vec::with_capacity(count);
    for i in 0..count {
        let s = lo + step * i as f64;
        pts.push(curve.plane_point(s.min(hi))?);
    }
    let nseg = count - 1;
    let mut max_len: f64 = 0.0;
    for i in 0..nseg {
        let dx = pts[i + 1][0] - pts[i][0];
        let dy = pts[i + 1][1] - pts[i][1];
        max_len = max_len.max(dx.hypot(dy));
    }
    if max_len == 0.0 {
        return Ok(Vec::new());
    }
    let cell = max_len * 1.000001;
    let mut buckets: HashMap<(i64, i64), Vec<usize>> = HashMap::new();
    for i in 0..nseg {
        let (x0, x1) = minmax(pts[i][0], pts[i + 1][0]);
        let (y0, y1) = minmax(pts[i][1], pts[i + 1][1]);
        let (cx0, cx1) = ((x0 / cell).floor() as i64, (x1 / cell).floor() as i64);
        let (cy0, cy1) = ((y0 / cell).floor() as i64, (y1 / cell).floor() as i64);
        for cx in cx0..=cx1 {
            for cy in cy0..=cy1 {
                buckets.entry((cx, cy)).or_default().push(i);
            }
        }
    }
    let mut candidates: HashSet<(usize, usize)> = HashSet::new();
    for ids in buckets.values() {
        for (k, &i) in ids.iter().enumerate() {
            for &j in &ids[k + 1..] {
                let (a, b) = if i < j { (i, j) } else { (j, i) };
                if b - a <= 1 {
                    continue; // consecutive segments share an endpoint
                }
                candidates.insert((a, b));
            }
        }
    }
    let mut found: Vec<(f64, f64)> = Vec::new();
    let min_gap = 2.0 * step;
    for (i, j) in candidates {
        if !segments_cross(pts[i], pts[i + 1], pts[j], pts[j + 1]) {
            continue;
        }
        let (ti, tj) = crossing_parameters(pts[i], pts[i + 1], pts[j], pts[j + 1]);
        let s_guess = lo + step * (i as f64 + ti);
        let t_guess = lo + step * (j as f64 + tj);
        if let Some((s, t)) = refine_crossing(curve, s_guess, t_guess, (lo, hi)) {
            if t - s > min_gap {
                found.push((s, t));
            }
        }
    }
    found.sort_by(|a, b| a.0.total_cmp(&b.0));
    let merge_tol = 0.75 * step.max(1e-9);
    let mut merged: Vec<(f64, f64)> = Vec::new();
    for cand in found {
        let dup = merged
            .iter()
            .any(|&(s, t)| (s - cand.0).abs() < merge_tol && (t - cand.1).abs() < merge_tol);
        if !dup {
            merged.push(cand);
        }
    }
    Ok(merged)
}

fn minmax(a: f64, b: f64) -> (f64, f64) {
    if a <= b {
        (a, b)
    } else {
        (b, a)
    }
}

fn cross2(ox: f64, oy: f64, ax: f64, ay: f64, bx: f64, by: f64) -> f64 {
    (ax - ox) * (by - oy) - (ay - oy) * (bx - ox)
}

/// Proper (interior-to-interior) crossing test.
fn segments_cross(p0: [f64; 2], p1: [f64; 2], q0: [f64; 2], q1: [f64; 2]) -> bool {
    let o1 = cross2(p0[0], p0[1], p1[0], p1[1], q0[0], q0[1]);
    let o2 = cross2(p0[0], p0[1], p1[0], p1[1], q1[0], q1[1]);
    let o3 = cross2(q0[0], q0[1], q1[0], q1[1], p0[0], p0[1]);
    let o4 = cross2(q0[0], q0[1], q1[0], q1[1], p1[0], p1[1]);
    o1 * o2 < 0.0 && o3 * o4 < 0.0
}

/// Fractional positions of the crossing on each segment.
fn crossing_parameters(p0: [f64; 2], p1: [f64; 2], q0: [f64; 2], q1: [f64; 2]) -> (f64, f64) {
    let rx = p1[0] - p0[0];
    let ry = p1[1] - p0[1];
    let sx = q1[0] - q0[0];
    let sy = q1[1] - q0[1];
    let den = rx * sy - ry * sx;
    let qpx = q0[0] - p0[0];
    let qpy = q0[1] - p0[1];
    ((qpx * sy - qpy * sx) / den, (qpx * ry - qpy * rx) / den)
}

/// Newton iteration on gamma(s) - gamma(t) = 0 from a polyline estimate.
fn refine_crossing(
    curve: &ProfileCurve,
    s0: f64,
    t0: f64,
    span: (f64, f64),
) -> Option<(f64, f64)> {
    let mut s = s0;
    let mut t = t0;
    for _ in 0..40 {
        let a = curve.jet(s).ok()?;
        let b = curve.jet(t).ok()?;
        let (sa, ca) = a.phi.sin_cos();
        let (sb, cb) = b.phi.sin_cos();
        let fx = a.r * ca - b.r * cb;
        let fy = a.r * sa - b.r * sb;
        let scale = 1.0 + a.r.abs().max(b.r.abs());
        if fx.hypot(fy) < 1e-11 * scale {
            return if s < t { Some((s, t)) } else { Some((t, s)) };
        }
        // d gamma / ds in the plane.
        let j00 = a.dr * ca - a.r * sa * a.dphi;
        let j10 = a.dr * sa + a.r * ca * a.dphi;
        let j01 = -(b.dr * cb - b.r * sb * b.dphi);
        let j11 = -(b.dr * sb + b.r * cb * b.dphi);
        let det = j00 * j11 - j01 * j10;
        if det.abs() < 1e-14 * scale * scale {
            return None; // tangential contact, not a transverse crossing
        }
        let ds = (fx * j11 - fy * j01) / det;
        let dt = (fy * j00 - fx * j10) / det;
        s -= ds;
        t -= dt;
        if s < span.0 || s > span.1 || t < span.0 || t > span.1 {
            return None;
        }
    }
    None
}

/// Rational closure test: the nearest continued-fraction convergent p/q
/// of phi/(2 pi) with q <= max_den, accepted within `tol`. A closed
/// profile returns after q windings having turned p full times.
pub fn closure_ratio(phi: f64, tol: f64, max_den: i64) -> Option<(i64, i64)> {
    let t = phi / (2.0 * PI);
    if !t.is_finite() {
        return None;
    }
    let mut x = t;
    let (mut h0, mut h1) = (1i64, x.floor() as i64);
    let (mut k0, mut k1) = (0i64, 1i64);
    let mut frac = x - x.floor();
    for _ in 0..48 {
        if k1 > max_den {
            break;
        }
        if (t - h1 as f64 / k1 as f64).abs() <= tol {
            return Some((h1, k1));
        }
        if frac.abs() < 1e-15 {
            break;
        }
        x = 1.0 / frac;
        let a = x.floor();
        frac = x - a;
        let a = a as i64;
        let h2 = a.checked_mul(h1)?.checked_add(h0)?;
        let k2 = a.checked_mul(k1)?.checked_add(k0)?;
        h0 = h1;
        h1 = h2;
        k0 = k1;
        k1 = k2;
    }
    None
}

/// The five solution families.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Family {
    StandardEmbedding,
    BoundedSpiraloid,
    UnboundedSpiraloid,
    CatenoidType,
    ClosedNonStandard,
}

impl std::fmt::Display for Family {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let name = match self {
            Family::StandardEmbedding => "StandardEmbedding",
            Family::BoundedSpiraloid => "BoundedSpiraloid",
            Family::UnboundedSpiraloid => "UnboundedSpiraloid",
            Family::CatenoidType => "CatenoidType",
            Family::ClosedNonStandard => "ClosedNonStandard",
        };
        f.write_str(name)
    }
}

/// Embeddedness of the plane profile curve, as far as the finite-span
/// detector and the phase budget can certify it.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Embedded {
    Yes,
    No,
    Unknown,
}

impl std::fmt::Display for Embedded {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Embedded::Yes => "true",
            Embedded::No => "false",
            Embedded::Unknown => "unknown",
        })
    }
}

/// Either an energy level or a concrete phase-plane state. An energy in
/// the band (E0, 0) selects the bounded component; pass a state to pick
/// the unbounded one. At the critical level an energy alone selects the
/// fixed point itself.
#[derive(Clone, Copy, Debug)]
pub enum CatalogInput {
    Energy(f64),
    State(HsState),
}

/// Profile closing after `windings` turns of the orbit parameter while
/// the plane angle advances `turns` full revolutions.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Closure {
    pub turns: i64,
    pub windings: i64,
}

/// One catalog row.
#[derive(Clone, Debug)]
pub struct CatalogEntry {
    pub family: Family,
    pub embedded: Embedded,
    pub phi: PhaseResult,
    /// Witness parameter pairs from the self-intersection detector over
    /// the representative span (empty when the detector was not run or
    /// found nothing).
    pub self_intersections: Vec<(f64, f64)>,
    pub closure: Option<Closure>,
}

/// Distance in the phase plane with the angle reduced mod 2 pi.
fn fixed_point_distance(state: HsState, fp: HsState) -> f64 {
    let mut da = (state.alpha - fp.alpha) % (2.0 * PI);
    if da > PI {
        da -= 2.0 * PI;
    } else if da < -PI {
        da += 2.0 * PI;
    }
    da.hypot(state.r - fp.r)
}

/// Detector sweep over an unbounded orbit on the level set of `e`:
/// starts on the incoming arm just inside `r_big`, runs forward through
/// the bend until the outgoing arm exits through `r_big`, and reports
/// crossings of the realized plane curve. Orbits that dip below
/// sin(alpha) = 0 enter with alpha below -pi so the dip is traversed on
/// the (-pi, 0) branch; the others enter just below pi.
fn unbounded_sweep_crossings(
    params: &HsParams,
    e: f64,
    r_big: f64,
    dips: bool,
) -> Result<Vec<(f64, f64)>> {
    let r_start = 0.999 * r_big;
    let q = (e + params.c() * r_start * r_start) / (2.0 * r_start.powi(params.n() as i32));
    let alpha0 = if dips { -PI - q.asin() } else { PI - q.asin() };
    let span = 4.0 * r_big + 20.0;
    // 1e-12: the drift guard scales with dE/dr ~ 3 C r, so looser
    // tolerances trip it on wide sweeps.
    let traj = hs::integrate_bounded(
        params,
        HsState::new(alpha0, r_start),
        (0.0, span),
        1e-12,
        1e-9,
        r_big,
    )?;
    let curve = hs::curve_from_hs_trajectory(&traj, 0.0)?;
    let (lo, hi) = (traj.s_start(), traj.s_end());
    detect_self_intersection(&curve, (lo, hi), 24.0)
}

fn embedded_verdict(phi: &PhaseResult, crossings: &[(f64, f64)]) -> Embedded {
    if !crossings.is_empty() {
        return Embedded::No;
    }
    // A clean sweep plus a total turning below one revolution leaves no
    // room for the far arms to wrap back over each other.
    match phi.total() {
        Some(v) if v.abs() < 2.0 * PI => Embedded::Yes,
        _ => Embedded::Unknown,
    }
}

/// Entry for an orbit whose arms run to infinity. E >= 0 and the
/// unbounded piece of the (E0, 0) band stay on one positive-sine arch;
/// below the critical energy the orbit dips through sin(alpha) < 0
/// between the arms.
fn catenoid_entry(params: &HsParams, e: f64) -> Result<CatalogEntry> {
    let dips = if params.c() > 0.0 { e < hs::fixed_points(params)?.1 } else { false };
    let (phi, r_scale) = if dips {
        let r1 = (-e / params.c()).sqrt();
        (phi_type2(params, r1)?, r1)
    } else {
        let r0 = outer_radius(params, e)?;
        (phi_type1(params, r0)?, r0)
    };
    let r_big = (6.0 * r_scale).max(8.0);
    let crossings = unbounded_sweep_crossings(params, e, r_big, dips)?;
    let embedded = embedded_verdict(&phi, &crossings);
    Ok(CatalogEntry {
        family: Family::CatenoidType,
        embedded,
        phi,
        self_intersections: crossings,
        closure: None,
    })
}

/// Entry for the bounded component of the (E0, 0) band.
fn closed_entry(params: &HsParams, e: f64) -> Result<CatalogEntry> {
    let phi = phi_type3(params, e)?;
    let closure = phi.total().and_then(|v| {
        closure_ratio(v, 1e-8, 64).map(|(p, q)| Closure { turns: p, windings: q })
    });
    // Consecutive windings of the loop overlap, shifted by the phase per
    // winding; sweep a bit over two windings to expose the crossings.
    let traj = integrate_type3(params, e, 2.2)?;
    let curve = hs::curve_from_hs_trajectory(&traj, 0.0)?;
    let crossings =
        detect_self_intersection(&curve, (traj.s_start(), traj.s_end()), 48.0)?;
    let embedded = if crossings.is_empty() { Embedded::Unknown } else { Embedded::No };
    Ok(CatalogEntry {
        family: Family::ClosedNonStandard,
        embedded,
        phi,
        self_intersections: crossings,
        closure,
    })
}

/// Entry for a critical-energy piece away from the fixed point: the
/// orbit spirals onto the circle of radius r_bar, accumulating unbounded
/// phase, so Phi is divergent by construction.
fn spiraloid_entry(params: &HsParams, state: HsState, fp: HsState) -> Result<CatalogEntry> {
    let bounded = state.r < fp.r;
    // Walk backward first so one forward solve covers both directions.
    let reach = 12.0 + 16.0 * fp.r;
    let back = hs::integrate(params, state, (0.0, -reach), 1e-12)?;
    let start = back.last_state();
    let s_lo = back.s_end();
    let traj = hs::integrate(params, start, (s_lo, reach), 1e-12)?;
    let curve = hs::curve_from_hs_trajectory(&traj, 0.0)?;
    let crossings =
        detect_self_intersection(&curve, (traj.s_start(), traj.s_end()), 32.0)?;
    let embedded = if crossings.is_empty() { Embedded::Unknown } else { Embedded::No };
    Ok(CatalogEntry {
        family: if bounded { Family::BoundedSpiraloid } else { Family::UnboundedSpiraloid },
        embedded,
        phi: PhaseResult::divergent(),
        self_intersections: crossings,
        closure: None,
    })
}

/// Maps an orbit to its catalog family with phase data and an
/// embeddedness verdict.
pub fn classify_catalog(params: &HsParams, input: CatalogInput) -> Result<CatalogEntry> {
    let e = match input {
        CatalogInput::Energy(e) => e,
        CatalogInput::State(st) => hs::energy(st, params),
    };
    if params.c() == 0.0 {
        // Zero flux: every non-degenerate orbit is the minimal
        // catenoid-type profile with lambda = 0.
        if e <= 0.0 {
            return Err(Error::Config(
                "zero flux and nonpositive energy leave no phase data (flat profile)".into(),
            ));
        }
        return catenoid_entry(params, e);
    }
    let class = hs::classify(params, e)?;
    if class.contains(OrbitTag::FixedPoint) {
        let (fp, _) = hs::fixed_points(params)?;
        let on_fixed_point = match input {
            CatalogInput::Energy(_) => true,
            CatalogInput::State(st) => fixed_point_distance(st, fp) < 1e-6,
        };
        if on_fixed_point {
            // The profile is the circle r = r_bar: one full turn of
            // phase per closed loop, embedded exactly.
            return Ok(CatalogEntry {
                family: Family::StandardEmbedding,
                embedded: Embedded::Yes,
                phi: PhaseResult::finite(2.0 * PI, 0.0),
                self_intersections: Vec::new(),
                closure: Some(Closure { turns: 1, windings: 1 }),
            });
        }
        let state = match input {
            CatalogInput::State(st) => st,
            CatalogInput::Energy(_) => unreachable!(),
        };
        return spiraloid_entry(params, state, fp);
    }
    if class.contains(OrbitTag::TypeIII) {
        let (fp, _) = hs::fixed_points(params)?;
        let bounded = match input {
            CatalogInput::Energy(_) => true,
            CatalogInput::State(st) => st.r < fp.r,
        };
        return if bounded { closed_entry(params, e) } else { catenoid_entry(params, e) };
    }
    catenoid_entry(params, e)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::profile::{CurveFn, CurveJet};
    use std::sync::Arc;

    fn params(n: usize, c: f64) -> HsParams {
        HsParams::new(n, c).unwrap()
    }

    /// r0 realizing a given lambda = C / (2 r0^{n-2}).
    fn r0_for_lambda(n: usize, c: f64, lam: f64) -> f64 {
        (c / (2.0 * lam)).powf(1.0 / (n as f64 - 2.0))
    }

    fn finite(res: &PhaseResult) -> f64 {
        res.total().expect("expected a finite phase")
    }

    #[test]
    fn type1_matches_closed_form_at_zero_flux() {
        for n in [3usize, 4, 5] {
            let p = params(n, 0.0);
            for r0 in [0.3, 1.0, 7.5] {
                let res = phi_type1(&p, r0).unwrap();
                let v = finite(&res);
                assert!(
                    (v - PI / n as f64).abs() < 1e-7,
                    "n = {n}, r0 = {r0}: {v} vs {}",
                    PI / n as f64
                );
            }
        }
    }

    #[test]
    fn type1_frozen_values() {
        // Reference values from 40-digit quadrature of the
        // alpha-parameterized integral, an independent route.
        let cases: [(usize, f64, f64); 7] = [
            (3, 0.75, 2.4674418999329545),
            // lambda = 1 is the zero-energy orbit: exactly pi / (n - 2).
            (3, 1.0, PI),
            (3, 1.2, 3.9003431639698002),
            (3, 1.4, 5.3464531661591692),
            (3, 1.4999, 13.419038905827204),
            (4, 1.0, FRAC_PI_2),
            (4, 1.9, 3.471932150004101),
        ];
        for (n, lam, want) in cases {
            let p = params(n, 3.0);
            let r0 = r0_for_lambda(n, 3.0, lam);
            let v = finite(&phi_type1(&p, r0).unwrap());
            assert!((v - want).abs() < 5e-8, "n = {n}, lambda = {lam}: {v} vs {want}");
        }
        let p = params(5, 3.0);
        let v = finite(&phi_type1(&p, r0_for_lambda(5, 3.0, 2.0)).unwrap());
        assert!((v - 1.7700807652467862).abs() < 5e-8, "n = 5, lambda = 2: {v}");
    }

    #[test]
    fn type1_diverging_parameter_is_flagged() {
        let p = params(3, 3.0);
        // r0 = 1 sits exactly on lambda = n/2.
        let res = phi_type1(&p, 1.0).unwrap();
        assert!(res.value.is_divergent());
        assert!(res.error_estimate.is_infinite());
        assert!(res.total().is_none());
        let res = phi_type1(&p, 0.9).unwrap();
        assert!(res.value.is_divergent());
        assert!(matches!(phi_type1(&p, 0.0), Err(Error::NonPositiveRadius(_))));
    }

    #[test]
    fn type1_monotone_decreasing_in_r0() {
        let p = params(3, 3.0);
        let mut prev = f64::INFINITY;
        for i in 0..10 {
            let r0 = 1.02 + 0.35 * i as f64;
            let v = finite(&phi_type1(&p, r0).unwrap());
            assert!(v < prev, "phase must shrink as the neck widens: r0 = {r0}");
            assert!(v > PI / 3.0, "phase stays above the zero-flux floor");
            prev = v;
        }
    }

    #[test]
    fn type1_quadrature_matches_trajectory() {
        let p = params(3, 3.0);
        let r0 = 2.0;
        let quad_v = finite(&phi_type1(&p, r0).unwrap());
        let traj = hs::integrate_bounded(
            &p,
            HsState::new(FRAC_PI_2, r0),
            (0.0, 40.0),
            1e-12,
            1e-9,
            25.0,
        )
        .unwrap();
        let curve = hs::curve_from_hs_trajectory(&traj, 0.0).unwrap();
        let half = curve.jet(traj.s_end()).unwrap().phi;
        let exit = traj.last_state();
        // The orbit is symmetric about its neck, so the outgoing half
        // doubles to the full phase; the tail integrand already covers
        // both arms.
        let tail = phi_type1_tail(&p, r0, exit.r / r0).unwrap();
        let traj_v = 2.0 * half + tail;
        assert!(
            (quad_v - traj_v).abs() < 1e-5,
            "quadrature {quad_v} vs trajectory {traj_v}"
        );
    }

    #[test]
    fn type2_frozen_pieces() {
        // (n, C, r1, plus, minus) frozen from 40-digit quadrature.
        let cases = [
            (3usize, 3.0, 1.0, 2.2139576166885544, -0.34443506344317242),
            (4, 3.0, 1.0, 0.78063443114972764, -0.2848611514147155),
            (3, 3.0, (10_000.0f64 / 3.0).sqrt(), 0.034641906970823956, -0.93725451723502481),
        ];
        for (n, c, r1, want_plus, want_minus) in cases {
            let p = params(n, c);
            let res = phi_type2(&p, r1).unwrap();
            let (plus, minus) = res.pieces.expect("dipping orbit reports pieces");
            assert!((plus - want_plus).abs() < 1e-7, "n = {n}: plus {plus} vs {want_plus}");
            assert!(
                (minus - want_minus).abs() < 1e-7,
                "n = {n}: minus {minus} vs {want_minus}"
            );
            assert!((finite(&res) - (plus + minus)).abs() < 1e-12);
        }
    }

    #[test]
    fn type2_rejects_bad_input() {
        let p = params(3, 3.0);
        // r1 = 1/sqrt(3) puts E exactly on the critical level.
        assert!(phi_type2(&p, 1.0 / 3.0f64.sqrt()).is_err());
        assert!(phi_type2(&p, 0.5).is_err());
        assert!(matches!(phi_type2(&p, -1.0), Err(Error::NonPositiveRadius(_))));
        assert!(phi_type2(&params(3, 0.0), 1.0).is_err());
    }

    #[test]
    fn type2_piece_trends_across_energies() {
        let p = params(3, 3.0);
        // E = -C r1^2 on a deepening grid; frozen endpoints from the
        // independent oracle.
        let energies = [-1.5, -3.0, -6.0, -30.0, -1e4];
        let mut plus_prev = f64::INFINITY;
        let mut minus_prev = 0.0;
        let mut plus_all = Vec::new();
        let mut minus_all = Vec::new();
        for e in energies {
            let r1 = (-e / 3.0f64).sqrt();
            let (plus, minus) = phi_type2(&p, r1).unwrap().pieces.unwrap();
            assert!(plus > 0.0 && minus < 0.0);
            // The dip stays inside one -pi/n wedge at every depth.
            assert!(minus > -PI / 3.0);
            // Both pieces shrink toward their limits as E drops.
            assert!(plus < plus_prev, "plus piece must decrease with E");
            assert!(minus < minus_prev, "minus piece must decrease with E");
            plus_prev = plus;
            minus_prev = minus;
            plus_all.push(plus);
            minus_all.push(minus);
        }
        assert!((plus_all[0] - 3.6803690833626352).abs() < 1e-7);
        assert!((minus_all[0] - -0.28110285656986515).abs() < 1e-7);
        assert!((plus_all[3] - 0.6379813740161231).abs() < 1e-7);
        assert!((minus_all[3] - -0.57065670563285871).abs() < 1e-7);
        // Deep energies: the positive piece dies off entirely and the
        // total turns negative, approaching -pi/n from above.
        assert!(plus_all[4] < 0.05);
        let total_deep = plus_all[4] + minus_all[4];
        assert!(total_deep < 0.0 && total_deep > -PI / 3.0);
    }

    #[test]
    fn type3_frozen_pieces() {
        // (n, C, E, plus, minus) frozen from 40-digit quadrature of the
        // branch-root integrals.
        let cases = [
            (3usize, 3.0, -0.5, 0.52828321183417869, -0.19402766633979257, 3e-6),
            (3, 3.0, -0.9, 1.4180090035526486, -0.23830281697017787, 3e-6),
            (3, 3.0, -0.2, 0.24178750552396699, -0.13666947597153759, 3e-6),
            (3, 3.0, -0.999, 4.0443789237315615, -0.24673845867879209, 1e-5),
            (4, 3.0, -0.5, 0.15432295981540197, -0.08885423965049062, 3e-6),
            (4, 3.0, -1.1, 1.1758430459298561, -0.1597405815360218, 3e-6),
        ];
        for (n, c, e, want_plus, want_minus, tol) in cases {
            let p = params(n, c);
            let res = phi_type3(&p, e).unwrap();
            let (plus, minus) = res.pieces.expect("winding orbit reports pieces");
            assert!(
                (plus - want_plus).abs() < tol,
                "n = {n}, E = {e}: plus {plus} vs {want_plus}"
            );
            assert!(
                (minus - want_minus).abs() < tol,
                "n = {n}, E = {e}: minus {minus} vs {want_minus}"
            );
            assert!(plus > 0.0 && minus < 0.0 && plus > -minus);
        }
    }

    #[test]
    fn type3_trends_toward_band_edges() {
        let p = params(3, 3.0);
        let mut prev_plus = 0.0;
        for e in [-0.05, -0.2, -0.5, -0.9, -0.999] {
            let (plus, minus) = phi_type3(&p, e).unwrap().pieces.unwrap();
            // Toward E0 the positive piece grows without bound while the
            // dip piece stays pinned inside (-pi/n, 0).
            assert!(plus > prev_plus);
            assert!(minus < 0.0 && minus > -PI / 3.0);
            prev_plus = plus;
        }
    }

    #[test]
    fn type3_rejects_outside_band() {
        let p = params(3, 3.0);
        assert!(phi_type3(&p, -1.0).is_err());
        assert!(phi_type3(&p, 0.0).is_err());
        assert!(phi_type3(&p, -1.3).is_err());
        assert!(phi_type3(&p, 2.0).is_err());
    }

    #[test]
    fn detector_straight_line_is_clean() {
        let line = ProfileCurve::vertical_line(1.0, 6.0);
        let hits = detect_self_intersection(&line, (-5.5, 5.5), 16.0).unwrap();
        assert!(hits.is_empty());
    }

    /// Figure eight c(t) = (3 + cos t, sin t cos t): one transverse
    /// crossing at (3, 0), hit at t = pi/2 and 3 pi/2.
    struct FigureEight;

    impl CurveFn for FigureEight {
        fn domain(&self) -> (f64, f64) {
            (0.0, 2.0 * PI)
        }

        fn jet(&self, s: f64) -> crate::error::Result<CurveJet> {
            let (st, ct) = s.sin_cos();
            let x = 3.0 + ct;
            let y = st * ct;
            let dx = -st;
            let dy = (2.0 * s).cos();
            let ddx = -ct;
            let ddy = -2.0 * (2.0 * s).sin();
            let r = x.hypot(y);
            let dr = (x * dx + y * dy) / r;
            let dphi = (x * dy - y * dx) / (r * r);
            let d2r = (dx * dx + dy * dy + x * ddx + y * ddy - dr * dr) / r;
            let d2phi = (x * ddy - y * ddx) / (r * r) - 2.0 * dr * dphi / r;
            Ok(CurveJet { r, phi: y.atan2(x), dr, dphi, d2r, d2phi })
        }
    }

    #[test]
    fn detector_pins_figure_eight_crossing() {
        let curve = ProfileCurve::new(Arc::new(FigureEight));
        let hits = detect_self_intersection(&curve, (0.0, 2.0 * PI), 64.0).unwrap();
        assert_eq!(hits.len(), 1, "hits: {hits:?}");
        let (s, t) = hits[0];
        assert!((s - FRAC_PI_2).abs() < 1e-6);
        assert!((t - 3.0 * FRAC_PI_2).abs() < 1e-6);
    }

    #[test]
    fn detector_reports_dip_crossing_witnesses() {
        // Orbit through (alpha, r) = (-pi - asin(q), 8) with
        // q = 3 (64 - 1) / (2 * 512), which sits exactly on E = -3.
        let p = params(3, 3.0);
        let q: f64 = 0.1845703125;
        let start = HsState::new(-PI - q.asin(), 8.0);
        assert!((hs::energy(start, &p) + 3.0).abs() < 1e-12);
        let traj = hs::integrate_bounded(&p, start, (0.0, 40.0), 1e-12, 1e-9, 8.2).unwrap();
        let curve = hs::curve_from_hs_trajectory(&traj, 0.0).unwrap();
        let hits =
            detect_self_intersection(&curve, (traj.s_start(), traj.s_end()), 32.0).unwrap();
        assert!(!hits.is_empty(), "the dipping orbit must cross itself");
        for (s1, s2) in hits {
            let a = traj.state_at(s1).unwrap();
            let b = traj.state_at(s2).unwrap();
            // Crossings sit on the dip's mirror axis: equal radii and
            // angles pairing to -pi (3 pi modulo the double cover).
            assert!((a.r - b.r).abs() < 1e-6, "radii {} vs {}", a.r, b.r);
            let sum = a.alpha + b.alpha - 3.0 * PI;
            let wrapped = sum - 4.0 * PI * (sum / (4.0 * PI)).round();
            assert!(wrapped.abs() < 1e-6, "angle sum defect {wrapped}");
        }
    }

    #[test]
    fn closure_ratio_finds_small_denominators() {
        let got = closure_ratio(2.0 * PI * 3.0 / 7.0, 1e-8, 64).unwrap();
        assert_eq!(got, (3, 7));
        assert_eq!(closure_ratio(2.0 * PI, 1e-8, 64).unwrap(), (1, 1));
        assert_eq!(closure_ratio(5.0 * PI, 1e-8, 64).unwrap(), (5, 2));
        assert_eq!(closure_ratio(-2.0 * PI / 3.0, 1e-8, 64).unwrap(), (-1, 3));
        assert!(closure_ratio(2.0 * PI * 0.123456789, 1e-8, 64).is_none());
        assert!(closure_ratio(f64::NAN, 1e-8, 64).is_none());
    }

    #[test]
    fn classify_fixed_point_is_standard() {
        let p = params(3, 3.0);
        for input in [
            CatalogInput::Energy(-1.0),
            CatalogInput::State(HsState::new(FRAC_PI_2, 1.0)),
            CatalogInput::State(HsState::new(FRAC_PI_2 + 2.0 * PI, 1.0 + 1e-8)),
        ] {
            let entry = classify_catalog(&p, input).unwrap();
            assert_eq!(entry.family, Family::StandardEmbedding);
            assert_eq!(entry.embedded, Embedded::Yes);
            assert_eq!(entry.closure, Some(Closure { turns: 1, windings: 1 }));
            assert!((finite(&entry.phi) - 2.0 * PI).abs() < 1e-12);
            assert!(entry.self_intersections.is_empty());
        }
    }

    #[test]
    fn classify_families_across_energy_band() {
        let p = params(3, 3.0);

        let high = classify_catalog(&p, CatalogInput::Energy(4.0)).unwrap();
        assert_eq!(high.family, Family::CatenoidType);
        assert!((finite(&high.phi) - 2.4674418999329545).abs() < 1e-6);
        assert_eq!(high.embedded, Embedded::Yes, "hits: {:?}", high.self_intersections);

        let dipping = classify_catalog(&p, CatalogInput::Energy(-3.0)).unwrap();
        assert_eq!(dipping.family, Family::CatenoidType);
        assert!((finite(&dipping.phi) - 1.8695225532453819).abs() < 1e-6);
        assert_eq!(dipping.embedded, Embedded::No);
        assert!(!dipping.self_intersections.is_empty());

        let closed = classify_catalog(&p, CatalogInput::Energy(-0.5)).unwrap();
        assert_eq!(closed.family, Family::ClosedNonStandard);
        assert!((finite(&closed.phi) - 0.33425554549438612).abs() < 1e-5);
        assert_eq!(closed.embedded, Embedded::No);
        assert!(!closed.self_intersections.is_empty());
        assert_eq!(closed.closure, None);

        // States on the critical level away from the fixed point, on
        // either side of r_bar = 1.
        let inner = classify_catalog(&p, CatalogInput::State(HsState::new(-FRAC_PI_2, 0.5)))
            .unwrap();
        assert_eq!(inner.family, Family::BoundedSpiraloid);
        assert!(inner.phi.value.is_divergent());

        let outer_state = HsState::new((11.0f64 / 16.0).asin(), 2.0);
        assert!((hs::energy(outer_state, &p) + 1.0).abs() < 1e-12);
        let outer = classify_catalog(&p, CatalogInput::State(outer_state)).unwrap();
        assert_eq!(outer.family, Family::UnboundedSpiraloid);
        assert!(outer.phi.value.is_divergent());

        // The unbounded piece of the same energy band stays
        // catenoid-type.
        let wide = classify_catalog(&p, CatalogInput::State(HsState::new(FRAC_PI_2, 1.4)))
            .unwrap();
        assert!(hs::energy(HsState::new(FRAC_PI_2, 1.4), &p) > -1.0);
        assert_eq!(wide.family, Family::CatenoidType);
    }

    #[test]
    fn classify_zero_flux() {
        let p = params(3, 0.0);
        let entry = classify_catalog(&p, CatalogInput::Energy(2.0)).unwrap();
        assert_eq!(entry.family, Family::CatenoidType);
        assert!((finite(&entry.phi) - PI / 3.0).abs() < 1e-7);
        assert_eq!(entry.embedded, Embedded::Yes);
        assert!(classify_catalog(&p, CatalogInput::Energy(-1.0)).is_err());
    }

    #[test]
    fn error_estimates_respect_scale() {
        let p = params(3, 3.0);
        for res in [
            phi_type1(&p, 2.0).unwrap(),
            phi_type1(&p, 1.0001).unwrap(),
            phi_type2(&p, 2.0).unwrap(),
            phi_type3(&p, -0.5).unwrap(),
        ] {
            let v = finite(&res);
            assert!(res.error_estimate < 1e-6 * v.abs().max(1.0), "estimate too loose: {res:?}");
        }
    }

    #[test]
    fn display_names_are_exact() {
        assert_eq!(Family::StandardEmbedding.to_string(), "StandardEmbedding");
        assert_eq!(Family::BoundedSpiraloid.to_string(), "BoundedSpiraloid");
        assert_eq!(Family::UnboundedSpiraloid.to_string(), "UnboundedSpiraloid");
        assert_eq!(Family::CatenoidType.to_string(), "CatenoidType");
        assert_eq!(Family::ClosedNonStandard.to_string(), "ClosedNonStandard");
        assert_eq!(Embedded::Yes.to_string(), "true");
        assert_eq!(Embedded::Unknown.to_string(), "unknown");
        assert_eq!(PhaseValue::Divergent.to_string(), "divergent");
        assert_eq!(PhaseValue::Finite(1.5).to_string(), "1.5");
    }
}
