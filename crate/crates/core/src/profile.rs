//! Profile curves and foliation specifications.
//!
//! A profile curve gamma(s) = r(s) e^{i phi(s)} lives in the punctured
//! plane and is parameterized by arclength, so cos(alpha) = r' and
//! sin(alpha) = r phi' for the angle alpha between the radial ray and
//! the tangent. A `FoliatedSpec` pairs such a curve with a center
//! velocity W(s) in R^n; together they generate the immersion
//!
//!   l(s, x) = r(s) e^{i phi(s)} x + V(s),  V(s) = integral of e^{i phi} W,
//!
//! of an n-manifold foliated by round (n-1)-spheres.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::geom::ComplexPoint;
use crate::ode;
use crate::quad;

/// Absolute tolerance for the cached center-drift integral V(s).
pub const DRIFT_TOL: f64 = 1e-12;

/// Arclength defect |r'^2 + r^2 phi'^2 - 1| flagged by `check_arclength`.
pub const ARCLENGTH_TOL: f64 = 1e-8;

/// Jet of a profile curve at one parameter value.
#[derive(Clone, Copy, Debug)]
pub struct CurveJet {
    pub r: f64,
    pub phi: f64,
    pub dr: f64,
    pub dphi: f64,
    pub d2r: f64,
    pub d2phi: f64,
}

/// A C^2 curve in polar form. `curvature_rate` is the s-derivative of
/// the tangent-angle curvature k; the default central-difference
/// fallback is O(h^4) and is overridden with closed forms by every
/// preset and by integrator-backed curves.
pub trait CurveFn: Send + Sync {
    fn domain(&self) -> (f64, f64);
    fn jet(&self, s: f64) -> Result<CurveJet>;

    fn curvature_rate(&self, s: f64) -> Result<f64> {
        let (lo, hi) = self.domain();
        let margin = (s - lo).min(hi - s);
        if margin <= 0.0 {
            return Err(Error::Config(
                "curvature rate needs an interior neighborhood of s".into(),
            ));
        }
        let h = 1e-3f64.min(0.45 * margin);
        let k = |t: f64| -> Result<f64> { Ok(point_from_jet(t, self.jet(t)?).k) };
        Ok((k(s - 2.0 * h)? - 8.0 * k(s - h)? + 8.0 * k(s + h)? - k(s + 2.0 * h)?)
            / (12.0 * h))
    }
}

/// Full pointwise data of a profile curve.
#[derive(Clone, Copy, Debug)]
pub struct ProfilePoint {
    pub s: f64,
    pub r: f64,
    pub phi: f64,
    pub dr: f64,
    pub dphi: f64,
    pub d2r: f64,
    pub d2phi: f64,
    /// Angle from the radial ray to the tangent; principal value for
    /// closed-form curves, continuous for integrator-backed ones.
    pub alpha: f64,
    pub sin_alpha: f64,
    pub cos_alpha: f64,
    /// Tangent direction theta = phi + alpha.
    pub theta: f64,
    /// Curvature k = d theta / ds.
    pub k: f64,
}

impl ProfilePoint {
    /// alpha' = k - sin(alpha)/r.
    pub fn alpha_rate(&self) -> f64 {
        self.k - self.sin_alpha / self.r
    }

    /// d/ds of sin(alpha)/r.
    pub fn leaf_rate(&self) -> f64 {
        self.cos_alpha * self.alpha_rate() / self.r
            - self.sin_alpha * self.cos_alpha / (self.r * self.r)
    }
}

pub(crate) fn point_from_jet(s: f64, j: CurveJet) -> ProfilePoint {
    let x = j.dr;
    let y = j.r * j.dphi;
    let s2 = x * x + y * y;
    let len = s2.sqrt();
    let alpha = y.atan2(x);
    // Derivative of atan2(y, x) along the curve.
    let xd = j.d2r;
    let yd = j.dr * j.dphi + j.r * j.d2phi;
    let alpha_dot = (yd * x - y * xd) / s2;
    ProfilePoint {
        s,
        r: j.r,
        phi: j.phi,
        dr: j.dr,
        dphi: j.dphi,
        d2r: j.d2r,
        d2phi: j.d2phi,
        alpha,
        sin_alpha: y / len,
        cos_alpha: x / len,
        theta: j.phi + alpha,
        k: j.dphi + alpha_dot,
    }
}

/// Shared handle to a profile curve.
#[derive(Clone)]
pub struct ProfileCurve {
    inner: Arc<dyn CurveFn>,
}

impl std::fmt::Debug for ProfileCurve {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let (lo, hi) = self.domain();
        write!(f, "ProfileCurve {{ domain: [{lo}, {hi}] }}")
    }
}

impl ProfileCurve {
    pub fn new(inner: Arc<dyn CurveFn>) -> Self {
        Self { inner }
    }

    pub fn domain(&self) -> (f64, f64) {
        self.inner.domain()
    }

    pub fn contains(&self, s: f64) -> bool {
        let (lo, hi) = self.domain();
        let pad = 1e-9 * (hi - lo).abs().max(1.0);
        s >= lo - pad && s <= hi + pad
    }

    pub fn jet(&self, s: f64) -> Result<CurveJet> {
        let (lo, hi) = self.domain();
        if !self.contains(s) {
            return Err(Error::OutsideDomain { s, lo, hi });
        }
        self.inner.jet(s)
    }

    pub fn eval(&self, s: f64) -> Result<ProfilePoint> {
        Ok(point_from_jet(s, self.jet(s)?))
    }

    pub fn curvature_rate(&self, s: f64) -> Result<f64> {
        let (lo, hi) = self.domain();
        if !self.contains(s) {
            return Err(Error::OutsideDomain { s, lo, hi });
        }
        self.inner.curvature_rate(s)
    }

    /// gamma(s) as a point of C = R^2.
    pub fn plane_point(&self, s: f64) -> Result<[f64; 2]> {
        let j = self.jet(s)?;
        Ok([j.r * j.phi.cos(), j.r * j.phi.sin()])
    }

    // Closed-form presets.

    /// Unit circle r = 1, phi = s.
    pub fn unit_circle() -> Self {
        Self::circle(1.0)
    }

    /// Circle of radius rho about the origin, arclength speed: phi = s / rho.
    pub fn circle(rho: f64) -> Self {
        Self::new(Arc::new(Circle { rho }))
    }

    /// Ray from the origin at fixed argument phi0; r = s on [0, length].
    pub fn ray(phi0: f64, length: f64) -> Self {
        Self::new(Arc::new(Ray { phi0, length }))
    }

    /// Vertical line gamma(s) = c + i s traced by arclength; r never
    /// drops below c > 0. The n = 3 Hamiltonian-stationary catenoid
    /// profile.
    pub fn vertical_line(c: f64, half_span: f64) -> Self {
        Self::new(Arc::new(VerticalLine { c, half_span }))
    }

    /// Curve with prescribed turning rate k(s): integrates
    /// theta' = k, r' = cos(theta - phi), phi' = sin(theta - phi) / r.
    /// `rate` must return (k, dk/ds).
    pub fn from_turning_rate<K>(
        rate: K,
        r0: f64,
        phi0: f64,
        alpha0: f64,
        domain: (f64, f64),
        tol: f64,
    ) -> Result<Self>
    where
        K: Fn(f64) -> (f64, f64) + Send + Sync + 'static,
    {
        TurningCurve::build(rate, r0, phi0, alpha0, domain, tol).map(|tc| Self::new(Arc::new(tc)))
    }
}

struct Circle {
    rho: f64,
}

impl CurveFn for Circle {
    fn domain(&self) -> (f64, f64) {
        (-8.0 * std::f64::consts::PI * self.rho, 8.0 * std::f64::consts::PI * self.rho)
    }

    fn jet(&self, s: f64) -> Result<CurveJet> {
        Ok(CurveJet {
            r: self.rho,
            phi: s / self.rho,
            dr: 0.0,
            dphi: 1.0 / self.rho,
            d2r: 0.0,
            d2phi: 0.0,
        })
    }

    fn curvature_rate(&self, _s: f64) -> Result<f64> {
        Ok(0.0)
    }
}

struct Ray {
    phi0: f64,
    length: f64,
}

impl CurveFn for Ray {
    fn domain(&self) -> (f64, f64) {
        (0.0, self.length)
    }

    fn jet(&self, s: f64) -> Result<CurveJet> {
        Ok(CurveJet { r: s, phi: self.phi0, dr: 1.0, dphi: 0.0, d2r: 0.0, d2phi: 0.0 })
    }

    fn curvature_rate(&self, _s: f64) -> Result<f64> {
        Ok(0.0)
    }
}

struct VerticalLine {
    c: f64,
    half_span: f64,
}

impl CurveFn for VerticalLine {
    fn domain(&self) -> (f64, f64) {
        (-self.half_span, self.half_span)
    }

    fn jet(&self, s: f64) -> Result<CurveJet> {
        let c = self.c;
        let r2 = c * c + s * s;
        let r = r2.sqrt();
        Ok(CurveJet {
            r,
            phi: s.atan2(c),
            dr: s / r,
            dphi: c / r2,
            d2r: c * c / (r2 * r),
            d2phi: -2.0 * c * s / (r2 * r2),
        })
    }

    fn curvature_rate(&self, _s: f64) -> Result<f64> {
        Ok(0.0)
    }
}

/// Integrator-backed curve with exact first-order relations: the jet
/// reports r' = cos(alpha) and phi' = sin(alpha)/r from the dense
/// (r, phi, theta) interpolant, so the arclength identity holds to
/// machine precision even though (r, phi, theta) carry O(tol)
/// integration error.
struct TurningCurve<K> {
    rate: K,
    sol: ode::OdeSolution,
    /// Second half of the domain when integration ran both ways from s0.
    sol_back: Option<ode::OdeSolution>,
    domain: (f64, f64),
}

impl<K: Fn(f64) -> (f64, f64) + Send + Sync> TurningCurve<K> {
    fn build(
        rate: K,
        r0: f64,
        phi0: f64,
        alpha0: f64,
        domain: (f64, f64),
        tol: f64,
    ) -> Result<Self> {
        let (lo, hi) = domain;
        if !(lo < hi) {
            return Err(Error::Config(format!("empty turning-curve domain [{lo}, {hi}]")));
        }
        if r0 <= 0.0 {
            return Err(Error::NonPositiveRadius(r0));
        }
        let opts = ode::OdeOpts { atol: tol, rtol: tol, ..ode::OdeOpts::default() };
        let rhs = |s: f64, y: &[f64]| -> Result<Vec<f64>> {
            let (r, phi, theta) = (y[0], y[1], y[2]);
            if r <= 0.0 {
                return Err(Error::NonPositiveRadius(r));
            }
            let a = theta - phi;
            Ok(vec![a.cos(), a.sin() / r, rate(s).0])
        };
        let floor = |_s: f64, y: &[f64]| y[0] - 1e-9;
        let y0 = [r0, phi0, phi0 + alpha0];
        let fwd = ode::integrate(&rhs, lo, &y0, hi, &opts, &[floor])?;
        if fwd.status != ode::OdeStatus::ReachedEnd {
            return Err(Error::Integration(format!(
                "turning curve hit the puncture before covering [{lo}, {hi}]: {:?}",
                fwd.status
            )));
        }
        Ok(Self { rate, sol: fwd, sol_back: None, domain })
    }

    fn state(&self, s: f64) -> Result<[f64; 3]> {
        let sol = match &self.sol_back {
            Some(back) if s < self.sol.s0 => back,
            _ => &self.sol,
        };
        let y = sol.eval(s)?;
        Ok([y[0], y[1], y[2]])
    }
}

impl<K: Fn(f64) -> (f64, f64) + Send + Sync> CurveFn for TurningCurve<K> {
    fn domain(&self) -> (f64, f64) {
        self.domain
    }

    fn jet(&self, s: f64) -> Result<CurveJet> {
        let [r, phi, theta] = self.state(s)?;
        let a = theta - phi;
        let (sin_a, cos_a) = a.sin_cos();
        let dphi = sin_a / r;
        let alpha_dot = (self.rate)(s).0 - dphi;
        Ok(CurveJet {
            r,
            phi,
            dr: cos_a,
            dphi,
            d2r: -sin_a * alpha_dot,
            d2phi: cos_a * alpha_dot / r - sin_a * cos_a / (r * r),
        })
    }

    fn curvature_rate(&self, s: f64) -> Result<f64> {
        Ok((self.rate)(s).1)
    }
}

/// Jet of the center velocity W(s) in R^n.
#[derive(Clone, Debug)]
pub struct CenterJet {
    pub w: Vec<f64>,
    pub dw: Vec<f64>,
    pub d2w: Vec<f64>,
}

pub trait CenterFn: Send + Sync {
    fn dim(&self) -> usize;
    fn jet(&self, s: f64) -> CenterJet;
    fn is_identically_zero(&self) -> bool {
        false
    }
}

/// Shared handle to a center velocity.
#[derive(Clone)]
pub struct CenterVelocity {
    inner: Arc<dyn CenterFn>,
}

impl std::fmt::Debug for CenterVelocity {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "CenterVelocity {{ dim: {} }}", self.dim())
    }
}

impl CenterVelocity {
    pub fn new(inner: Arc<dyn CenterFn>) -> Self {
        Self { inner }
    }

    pub fn zero(n: usize) -> Self {
        Self::new(Arc::new(ZeroCenter { n }))
    }

    pub fn constant(w: Vec<f64>) -> Self {
        Self::new(Arc::new(ConstCenter { w }))
    }

    /// W(s) = sum over terms of a cos(omega s) + b sin(omega s).
    pub fn trig(n: usize, terms: Vec<TrigTerm>) -> Result<Self> {
        for t in &terms {
            if t.cos_amp.len() != n || t.sin_amp.len() != n {
                return Err(Error::DimensionMismatch { expected: n, got: t.cos_amp.len() });
            }
        }
        Ok(Self::new(Arc::new(TrigCenter { n, terms })))
    }

    pub fn dim(&self) -> usize {
        self.inner.dim()
    }

    pub fn jet(&self, s: f64) -> CenterJet {
        self.inner.jet(s)
    }

    pub fn is_identically_zero(&self) -> bool {
        self.inner.is_identically_zero()
    }
}

struct ZeroCenter {
    n: usize,
}

impl CenterFn for ZeroCenter {
    fn dim(&self) -> usize {
        self.n
    }

    fn jet(&self, _s: f64) -> CenterJet {
        CenterJet { w: vec![0.0; self.n], dw: vec![0.0; self.n], d2w: vec![0.0; self.n] }
    }

    fn is_identically_zero(&self) -> bool {
        true
    }
}

struct ConstCenter {
    w: Vec<f64>,
}

impl CenterFn for ConstCenter {
    fn dim(&self) -> usize {
        self.w.len()
    }

    fn jet(&self, _s: f64) -> CenterJet {
        let n = self.w.len();
        CenterJet { w: self.w.clone(), dw: vec![0.0; n], d2w: vec![0.0; n] }
    }

    fn is_identically_zero(&self) -> bool {
        self.w.iter().all(|c| *c == 0.0)
    }
}

#[derive(Clone, Debug)]
pub struct TrigTerm {
    pub omega: f64,
    pub cos_amp: Vec<f64>,
    pub sin_amp: Vec<f64>,
}

struct TrigCenter {
    n: usize,
    terms: Vec<TrigTerm>,
}

impl CenterFn for TrigCenter {
    fn dim(&self) -> usize {
        self.n
    }

    fn jet(&self, s: f64) -> CenterJet {
        let mut w = vec![0.0; self.n];
        let mut dw = vec![0.0; self.n];
        let mut d2w = vec![0.0; self.n];
        for t in &self.terms {
            let (sn, cs) = (t.omega * s).sin_cos();
            let om = t.omega;
            for i in 0..self.n {
                let a = t.cos_amp[i];
                let b = t.sin_amp[i];
                w[i] += a * cs + b * sn;
                dw[i] += om * (b * cs - a * sn);
                d2w[i] += -om * om * (a * cs + b * sn);
            }
        }
        CenterJet { w, dw, d2w }
    }
}

/// Prefix table for V(s) = integral of e^{i phi} W from s0.
#[derive(Debug)]
struct DriftTable {
    /// Panel boundaries, ascending, covering the curve domain.
    knots: Vec<f64>,
    /// Cumulative integral from knots[0] to each knot, as 2n reals
    /// (re_1..re_n, im_1..im_n).
    prefix: Vec<Vec<f64>>,
    /// Offset so that V(s0) = 0.
    base: Vec<f64>,
}

/// A foliation specification: sphere dimension, profile curve, center
/// velocity, and the anchor s0 where the leaf-center drift vanishes.
/// Immutable and cheap to clone; safe to share across threads.
#[derive(Debug, Clone)]
pub struct FoliatedSpec {
    n: usize,
    curve: ProfileCurve,
    center: CenterVelocity,
    s0: f64,
    drift: Arc<Option<DriftTable>>,
}

impl FoliatedSpec {
    pub fn new(n: usize, curve: ProfileCurve, center: CenterVelocity, s0: f64) -> Result<Self> {
        if n < 3 {
            return Err(Error::DimensionTooSmall(n));
        }
        if center.dim() != n {
            return Err(Error::DimensionMismatch { expected: n, got: center.dim() });
        }
        if !curve.contains(s0) {
            let (lo, hi) = curve.domain();
            return Err(Error::OutsideDomain { s: s0, lo, hi });
        }
        let drift = if center.is_identically_zero() {
            None
        } else {
            Some(DriftTable::build(&curve, &center, n, s0)?)
        };
        Ok(Self { n, curve, center, s0, drift: Arc::new(drift) })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn curve(&self) -> &ProfileCurve {
        &self.curve
    }

    pub fn center(&self) -> &CenterVelocity {
        &self.center
    }

    pub fn s0(&self) -> f64 {
        self.s0
    }

    pub fn is_centered(&self) -> bool {
        self.drift.is_none()
    }

    /// V(s): accumulated drift of the leaf centers.
    pub fn drift(&self, s: f64) -> Result<ComplexPoint> {
        match self.drift.as_ref() {
            None => Ok(ComplexPoint::zero(self.n)),
            Some(table) => table.eval(&self.curve, &self.center, self.n, s),
        }
    }

    // Preset specifications.

    /// The unit-sphere product immersion e^{is} x.
    pub fn standard_circle(n: usize) -> Result<Self> {
        Self::new(n, ProfileCurve::unit_circle(), CenterVelocity::zero(n), 0.0)
    }

    /// Centered circle of radius rho.
    pub fn centered_circle(n: usize, rho: f64) -> Result<Self> {
        if !(rho > 0.0) {
            return Err(Error::Config(format!("circle radius must be positive, got {rho}")));
        }
        Self::new(n, ProfileCurve::circle(rho), CenterVelocity::zero(n), 0.0)
    }

    /// Ray through the origin with constant center velocity w e_1;
    /// a flat (totally geodesic) example.
    pub fn line(n: usize, phi0: f64, w: f64) -> Result<Self> {
        let mut wv = vec![0.0; n];
        wv[0] = w;
        Self::new(n, ProfileCurve::ray(phi0, 20.0), CenterVelocity::constant(wv), 0.0)
    }

    /// Circle profile of radius rho whose leaf centers run around a
    /// circle as well: constant W = (b / rho) e_1.
    pub fn epicycloid(n: usize, rho: f64, b: f64) -> Result<Self> {
        if !(rho > 0.0) {
            return Err(Error::Config(format!("circle radius must be positive, got {rho}")));
        }
        let mut wv = vec![0.0; n];
        wv[0] = b / rho;
        Self::new(n, ProfileCurve::circle(rho), CenterVelocity::constant(wv), 0.0)
    }

    /// The n = 3 Lagrangian catenoid profile gamma(s) = c + i s.
    pub fn catenoid3(c: f64) -> Result<Self> {
        if !(c > 0.0) {
            return Err(Error::Config(format!("catenoid waist must be positive, got {c}")));
        }
        Self::new(3, ProfileCurve::vertical_line(c, 20.0), CenterVelocity::zero(3), 0.0)
    }
}

impl DriftTable {
    fn build(curve: &ProfileCurve, center: &CenterVelocity, n: usize, s0: f64) -> Result<Self> {
        let (lo, hi) = curve.domain();
        let width = hi - lo;
        let panels = ((width * 4.0).ceil() as usize).clamp(8, 4096);
        let mut knots = Vec::with_capacity(panels + 1);
        for i in 0..=panels {
            knots.push(lo + width * (i as f64) / (panels as f64));
        }
        let integrand = |t: f64| -> Vec<f64> {
            let phi = match curve.jet(t) {
                Ok(j) => j.phi,
                Err(_) => f64::NAN,
            };
            let (sn, cs) = phi.sin_cos();
            let cj = center.jet(t);
            let mut out = Vec::with_capacity(2 * n);
            out.extend(cj.w.iter().map(|w| w * cs));
            out.extend(cj.w.iter().map(|w| w * sn));
            out
        };
        let mut prefix = vec![vec![0.0; 2 * n]];
        for i in 0..panels {
            let inc = quad::adaptive_vec(&integrand, knots[i], knots[i + 1], 2 * n, DRIFT_TOL)?;
            let last = prefix.last().unwrap();
            prefix.push((0..2 * n).map(|j| last[j] + inc[j]).collect());
        }
        let mut table = Self { knots, prefix, base: vec![0.0; 2 * n] };
        let at_s0 = table.raw(curve, center, n, s0)?;
        table.base = at_s0;
        Ok(table)
    }

    fn raw(
        &self,
        curve: &ProfileCurve,
        center: &CenterVelocity,
        n: usize,
        s: f64,
    ) -> Result<Vec<f64>> {
        let idx = match self.knots.binary_search_by(|k| k.total_cmp(&s)) {
            Ok(i) => i.min(self.knots.len() - 1),
            Err(i) => i.saturating_sub(1).min(self.knots.len() - 2),
        };
        let integrand = |t: f64| -> Vec<f64> {
            let phi = match curve.jet(t) {
                Ok(j) => j.phi,
                Err(_) => f64::NAN,
            };
            let (sn, cs) = phi.sin_cos();
            let cj = center.jet(t);
            let mut out = Vec::with_capacity(2 * n);
            out.extend(cj.w.iter().map(|w| w * cs));
            out.extend(cj.w.iter().map(|w| w * sn));
            out
        };
        let inc = quad::adaptive_vec(&integrand, self.knots[idx], s, 2 * n, DRIFT_TOL)?;
        Ok((0..2 * n).map(|j| self.prefix[idx][j] + inc[j]).collect())
    }

    fn eval(
        &self,
        curve: &ProfileCurve,
        center: &CenterVelocity,
        n: usize,
        s: f64,
    ) -> Result<ComplexPoint> {
        let raw = self.raw(curve, center, n, s)?;
        let re: Vec<f64> = (0..n).map(|i| raw[i] - self.base[i]).collect();
        let im: Vec<f64> = (0..n).map(|i| raw[n + i] - self.base[n + i]).collect();
        Ok(ComplexPoint { re, im })
    }
}

/// Report from sampling the arclength identity over a curve.
#[derive(Clone, Copy, Debug)]
pub struct ArclengthReport {
    pub sup_defect: f64,
    pub worst_s: f64,
    pub pass: bool,
}

/// Samples |r'^2 + r^2 phi'^2 - 1| on a uniform grid.
pub fn check_arclength(curve: &ProfileCurve, samples: usize) -> Result<ArclengthReport> {
    let (lo, hi) = curve.domain();
    let m = samples.max(2);
    let mut sup = 0.0f64;
    let mut worst = lo;
    for i in 0..m {
        let s = lo + (hi - lo) * (i as f64) / ((m - 1) as f64);
        let j = curve.jet(s)?;
        let defect = (j.dr * j.dr + j.r * j.r * j.dphi * j.dphi - 1.0).abs();
        if defect > sup {
            sup = defect;
            worst = s;
        }
    }
    Ok(ArclengthReport { sup_defect: sup, worst_s: worst, pass: sup <= ARCLENGTH_TOL })
}

#[cfg(test)]
mod tests {
    use super::*;

    const PI: f64 = std::f64::consts::PI;

    #[test]
    fn unit_circle_point_data() {
        let c = ProfileCurve::unit_circle();
        let p = c.eval(0.7).unwrap();
        assert!((p.r - 1.0).abs() < 1e-15);
        assert!((p.sin_alpha - 1.0).abs() < 1e-15);
        assert!(p.cos_alpha.abs() < 1e-15);
        assert!((p.alpha - PI / 2.0).abs() < 1e-15);
        assert!((p.k - 1.0).abs() < 1e-15);
        assert!(c.curvature_rate(0.7).unwrap().abs() < 1e-15);
    }

    #[test]
    fn ray_is_straight_and_radial() {
        let c = ProfileCurve::ray(0.3, 10.0);
        let p = c.eval(2.0).unwrap();
        assert!((p.alpha).abs() < 1e-15);
        assert!(p.k.abs() < 1e-15);
        assert!((p.r - 2.0).abs() < 1e-15);
        assert!((p.phi - 0.3).abs() < 1e-15);
    }

    #[test]
    fn vertical_line_profile_matches_catenoid_values() {
        let c = ProfileCurve::vertical_line(1.0, 20.0);
        let p0 = c.eval(0.0).unwrap();
        assert!((p0.r - 1.0).abs() < 1e-15);
        assert!(p0.phi.abs() < 1e-15);
        assert!((p0.sin_alpha - 1.0).abs() < 1e-15);
        assert!(p0.cos_alpha.abs() < 1e-15);
        assert!(p0.k.abs() < 1e-14);
        let p1 = c.eval(1.0).unwrap();
        assert!((p1.r - 2f64.sqrt()).abs() < 1e-15);
        assert!((p1.alpha - PI / 4.0).abs() < 1e-15);
        assert!(p1.k.abs() < 1e-14, "line has zero curvature, got {}", p1.k);
    }

    #[test]
    fn presets_are_arclength_parameterized() {
        for curve in [
            ProfileCurve::unit_circle(),
            ProfileCurve::circle(2.5),
            ProfileCurve::ray(1.0, 10.0),
            ProfileCurve::vertical_line(0.7, 20.0),
        ] {
            let rep = check_arclength(&curve, 257).unwrap();
            assert!(rep.pass, "sup defect {:e} at s = {}", rep.sup_defect, rep.worst_s);
        }
    }

    #[test]
    fn domain_is_closed_and_enforced() {
        let c = ProfileCurve::ray(0.0, 5.0);
        assert!(c.eval(0.0).is_ok());
        assert!(c.eval(5.0).is_ok());
        match c.eval(5.1) {
            Err(Error::OutsideDomain { .. }) => {}
            other => panic!("expected domain error, got {other:?}"),
        }
    }

    #[test]
    fn turning_rate_curve_reproduces_circle() {
        // k = 1 with matching initial angle traces the unit circle.
        let c = ProfileCurve::from_turning_rate(
            |_s| (1.0, 0.0),
            1.0,
            0.0,
            PI / 2.0,
            (0.0, 6.0),
            1e-12,
        )
        .unwrap();
        let p = c.eval(5.0).unwrap();
        assert!((p.r - 1.0).abs() < 1e-9, "r = {}", p.r);
        assert!((p.k - 1.0).abs() < 1e-9);
        let rep = check_arclength(&c, 301).unwrap();
        assert!(rep.pass, "defect {:e}", rep.sup_defect);
    }

    #[test]
    fn fd_curvature_rate_fallback_matches_closed_form() {
        // Wrap the catenoid profile without its curvature_rate override.
        struct Bare(ProfileCurve);
        impl CurveFn for Bare {
            fn domain(&self) -> (f64, f64) {
                self.0.domain()
            }
            fn jet(&self, s: f64) -> Result<CurveJet> {
                self.0.jet(s)
            }
        }
        let bare = ProfileCurve::new(Arc::new(Bare(ProfileCurve::vertical_line(1.0, 20.0))));
        let rate = bare.curvature_rate(0.5).unwrap();
        assert!(rate.abs() < 1e-10, "FD rate {rate:e}");
    }

    #[test]
    fn spec_construction_validates() {
        assert!(FoliatedSpec::standard_circle(2).is_err());
        assert!(FoliatedSpec::standard_circle(3).is_ok());
        assert!(FoliatedSpec::catenoid3(0.0).is_err());
        let spec = FoliatedSpec::line(4, 0.0, 0.5).unwrap();
        assert_eq!(spec.n(), 4);
        assert!(!spec.is_centered());
    }

    #[test]
    fn drift_of_centered_spec_vanishes() {
        let spec = FoliatedSpec::standard_circle(3).unwrap();
        let v = spec.drift(1.0).unwrap();
        assert_eq!(v.norm(), 0.0);
    }

    #[test]
    fn drift_integrates_constant_center_on_ray() {
        // phi = 0 along the ray, so V(s) = integral of W = w (s - s0) e_1.
        let spec = FoliatedSpec::line(3, 0.0, 0.5).unwrap();
        let v = spec.drift(3.0).unwrap();
        assert!((v.re[0] - 0.5 * 3.0).abs() < 1e-11, "{}", v.re[0]);
        assert!(v.im[0].abs() < 1e-12);
        assert!(v.re[1].abs() < 1e-12);
        // V(s0) = 0 by construction.
        let v0 = spec.drift(0.0).unwrap();
        assert!(v0.norm() < 1e-12);
    }

    #[test]
    fn drift_on_circle_with_constant_center_is_closed_form() {
        // On the unit circle V(s) = integral e^{it} w e_1 dt
        //                        = w (sin s + i (1 - cos s)) e_1.
        let spec = FoliatedSpec::epicycloid(3, 1.0, 0.7).unwrap();
        let s = 1.3;
        let v = spec.drift(s).unwrap();
        assert!((v.re[0] - 0.7 * s.sin()).abs() < 1e-11);
        assert!((v.im[0] - 0.7 * (1.0 - s.cos())).abs() < 1e-11);
    }

    #[test]
    fn trig_center_jets_are_consistent() {
        let cv = CenterVelocity::trig(
            3,
            vec![TrigTerm {
                omega: 1.7,
                cos_amp: vec![0.3, 0.0, -0.2],
                sin_amp: vec![0.0, 0.5, 0.1],
            }],
        )
        .unwrap();
        let s = 0.4;
        let j = cv.jet(s);
        let h = 1e-6;
        let jp = cv.jet(s + h);
        let jm = cv.jet(s - h);
        for i in 0..3 {
            let fd = (jp.w[i] - jm.w[i]) / (2.0 * h);
            assert!((fd - j.dw[i]).abs() < 1e-8);
            let fd2 = (jp.w[i] - 2.0 * j.w[i] + jm.w[i]) / (h * h);
            assert!((fd2 - j.d2w[i]).abs() < 1e-4);
        }
    }
}
