//! Finite-difference oracles that cross-check the closed forms.
//!
//! Positions come from `eval_immersion` alone; every derivative here is
//! a central difference, so none of the analytic derivative formulas
//! under test feed their own verification. Where a projection frame is
//! unavoidable (curvature coefficients are frame coefficients) the
//! frame is the closed-form one, which the Gram and determinant checks
//! validate independently at a far tighter tolerance.

use crate::error::{Error, Result};
use crate::foliation::{self, FrameData};
use crate::geom::{self, ComplexPoint, SphereDirection, TangentFrame};
use crate::profile::FoliatedSpec;
use crate::sample::{self, Site};

/// Steps for first and second finite differences.
#[derive(Clone, Copy, Debug)]
pub struct FdConfig {
    pub h_first: f64,
    pub h_second: f64,
}

impl Default for FdConfig {
    fn default() -> Self {
        Self { h_first: 1e-5, h_second: 1e-3 }
    }
}

impl FdConfig {
    pub fn new(h_first: f64, h_second: f64) -> Result<Self> {
        if !(h_first > 0.0 && h_first < 1e-2) {
            return Err(Error::Config(format!("first-derivative step out of range: {h_first}")));
        }
        if !(h_second > 0.0) {
            return Err(Error::Config(format!("second-derivative step not positive: {h_second}")));
        }
        Ok(Self { h_first, h_second })
    }
}

/// Position-only view of an immersed family. The oracles differentiate
/// this numerically; the twist wrapper corrupts it for negative
/// controls.
pub trait Immersion {
    fn dim(&self) -> usize;
    fn domain(&self) -> (f64, f64);
    fn position(&self, s: f64, x: &[f64]) -> Result<ComplexPoint>;
}

impl Immersion for FoliatedSpec {
    fn dim(&self) -> usize {
        self.n()
    }

    fn domain(&self) -> (f64, f64) {
        self.curve().domain()
    }

    fn position(&self, s: f64, x: &[f64]) -> Result<ComplexPoint> {
        let dir = SphereDirection::normalized(x.to_vec())?;
        foliation::eval_immersion(self, s, &dir)
    }
}

/// Rotates the imaginary part of the image in its first coordinate
/// plane. That is R-linear but not complex-linear, so it destroys the
/// Lagrangian property while keeping positions smooth.
pub struct ImaginaryTwist<'a> {
    pub spec: &'a FoliatedSpec,
    pub angle: f64,
}

impl Immersion for ImaginaryTwist<'_> {
    fn dim(&self) -> usize {
        self.spec.n()
    }

    fn domain(&self) -> (f64, f64) {
        self.spec.curve().domain()
    }

    fn position(&self, s: f64, x: &[f64]) -> Result<ComplexPoint> {
        let mut p = self.spec.position(s, x)?;
        let (sn, cs) = self.angle.sin_cos();
        let (a, b) = (p.im[0], p.im[1]);
        p.im[0] = cs * a - sn * b;
        p.im[1] = sn * a + cs * b;
        Ok(p)
    }
}

/// Point of the great circle through x with initial velocity v.
fn geodesic(x: &[f64], v: &[f64], t: f64) -> Vec<f64> {
    let (sn, cs) = t.sin_cos();
    x.iter().zip(v).map(|(a, b)| cs * a + sn * b).collect()
}

/// Numerical tangents: l_s followed by the leaf pushforwards l_* v_j.
#[derive(Clone, Debug)]
pub struct FdTangents {
    pub tangents: Vec<ComplexPoint>,
    pub one_sided: bool,
}

pub fn fd_tangents<I: Immersion + ?Sized>(
    im: &I,
    s: f64,
    x: &SphereDirection,
    cfg: &FdConfig,
) -> Result<FdTangents> {
    let h = cfg.h_first;
    let (lo, hi) = im.domain();
    let xv = x.coords();
    let mut one_sided = false;
    let ell_s = if s - h >= lo && s + h <= hi {
        im.position(s + h, xv)?.sub(&im.position(s - h, xv)?).scale(0.5 / h)
    } else if s + 2.0 * h <= hi {
        one_sided = true;
        let f0 = im.position(s, xv)?;
        let f1 = im.position(s + h, xv)?;
        let f2 = im.position(s + 2.0 * h, xv)?;
        f1.scale(4.0).add_scaled(-3.0, &f0).add_scaled(-1.0, &f2).scale(0.5 / h)
    } else if s - 2.0 * h >= lo {
        one_sided = true;
        let f0 = im.position(s, xv)?;
        let f1 = im.position(s - h, xv)?;
        let f2 = im.position(s - 2.0 * h, xv)?;
        f0.scale(3.0).add_scaled(-4.0, &f1).add_scaled(1.0, &f2).scale(0.5 / h)
    } else {
        return Err(Error::OutsideDomain { s, lo, hi });
    };
    let frame = geom::tangent_frame(x);
    let mut tangents = Vec::with_capacity(frame.dim());
    tangents.push(ell_s);
    for v in &frame.v {
        let p = im.position(s, &geodesic(xv, v, h))?;
        let m = im.position(s, &geodesic(xv, v, -h))?;
        tangents.push(p.sub(&m).scale(0.5 / h));
    }
    Ok(FdTangents { tangents, one_sided })
}

/// Sup/rms summary of a pointwise residual sweep.
#[derive(Clone, Debug)]
pub struct ResidualReport {
    pub sup_norm: f64,
    pub rms: f64,
    pub witness_s: f64,
    pub witness_x: Vec<f64>,
    pub samples: usize,
    pub skipped: usize,
}

struct Accumulator {
    sup: f64,
    sum_sq: f64,
    count: usize,
    skipped: usize,
    witness: Option<(f64, Vec<f64>)>,
}

impl Accumulator {
    fn new() -> Self {
        Self { sup: 0.0, sum_sq: 0.0, count: 0, skipped: 0, witness: None }
    }

    fn record(&mut self, site: &Site, value: f64) {
        self.count += 1;
        self.sum_sq += value * value;
        if value >= self.sup || self.witness.is_none() {
            self.sup = self.sup.max(value);
            self.witness = Some((site.s, site.x.coords().to_vec()));
        }
    }

    fn skip(&mut self) {
        self.skipped += 1;
    }

    fn finish(self) -> ResidualReport {
        let (witness_s, witness_x) = self.witness.unwrap_or((f64::NAN, Vec::new()));
        ResidualReport {
            sup_norm: self.sup,
            rms: (self.sum_sq / self.count.max(1) as f64).sqrt(),
            witness_s,
            witness_x,
            samples: self.count,
            skipped: self.skipped,
        }
    }
}

/// Sup of |omega(t_a, t_b)| over all FD tangent pairs at every site;
/// zero up to FD noise exactly when the leaves span isotropic planes.
pub fn check_lagrangian<I: Immersion + ?Sized>(
    im: &I,
    plan: &[Site],
    cfg: &FdConfig,
) -> Result<ResidualReport> {
    let mut acc = Accumulator::new();
    for site in plan {
        let t = fd_tangents(im, site.s, &site.x, cfg)?;
        let mut worst = 0.0f64;
        for a in 0..t.tangents.len() {
            for b in (a + 1)..t.tangents.len() {
                worst = worst.max(t.tangents[a].symplectic(&t.tangents[b]).abs());
            }
        }
        acc.record(site, worst);
    }
    Ok(acc.finish())
}

/// Max absolute gap between the closed-form metric and the FD Gram
/// matrix, relative to the largest metric entry.
pub fn metric_vs_gram_defect(
    spec: &FoliatedSpec,
    s: f64,
    x: &SphereDirection,
    cfg: &FdConfig,
) -> Result<f64> {
    let t = fd_tangents(spec, s, x, cfg)?.tangents;
    let g = FrameData::at(spec, s, x)?.metric_matrix();
    let scale = g.iter().flatten().fold(0.0f64, |m, v| m.max(v.abs())).max(1e-30);
    let mut worst = 0.0f64;
    for i in 0..t.len() {
        for j in 0..t.len() {
            worst = worst.max((t[i].dot_real(&t[j]) - g[i][j]).abs());
        }
    }
    Ok(worst / scale)
}

/// Orthonormality of the closed-form frame coefficients measured
/// against the FD Gram matrix instead of the closed-form metric.
pub fn frame_vs_gram_defect(
    spec: &FoliatedSpec,
    s: f64,
    x: &SphereDirection,
    cfg: &FdConfig,
) -> Result<f64> {
    let t = fd_tangents(spec, s, x, cfg)?.tangents;
    let fd = FrameData::at(spec, s, x)?;
    let n = spec.n();
    let mut coef = vec![vec![0.0; n]; n];
    coef[0][0] = fd.a_factor;
    for j in 1..n {
        coef[0][j] = fd.b_factors[j - 1];
        coef[j][j] = 1.0 / fd.profile.r;
    }
    let gram: Vec<Vec<f64>> =
        (0..n).map(|i| (0..n).map(|j| t[i].dot_real(&t[j])).collect()).collect();
    let mut worst = 0.0f64;
    for a in 0..n {
        for b in 0..n {
            let mut acc = 0.0;
            for i in 0..n {
                for j in 0..n {
                    acc += coef[a][i] * gram[i][j] * coef[b][j];
                }
            }
            let target = if a == b { 1.0 } else { 0.0 };
            worst = worst.max((acc - target).abs());
        }
    }
    Ok(worst)
}

/// |e^{i beta} - det_C(U)| where U orthonormalizes the FD tangents by
/// real Gram-Schmidt (orientation-preserving, so the phasors must
/// agree for a Lagrangian plane).
pub fn angle_vs_det_defect(
    spec: &FoliatedSpec,
    s: f64,
    x: &SphereDirection,
    cfg: &FdConfig,
) -> Result<f64> {
    let t = fd_tangents(spec, s, x, cfg)?.tangents;
    let mut basis: Vec<ComplexPoint> = Vec::with_capacity(t.len());
    for v in t {
        let mut u = v;
        for b in &basis {
            let c = u.dot_real(b);
            u = u.add_scaled(-c, b);
        }
        let norm = u.norm();
        if norm < 1e-12 {
            return Err(Error::RootFinding("degenerate FD tangent basis".into()));
        }
        basis.push(u.scale(1.0 / norm));
    }
    let cols: Vec<_> = basis.iter().map(|b| b.column()).collect();
    let det = geom::complex_det(&cols);
    let (c, sn) = foliation::angle_phasor(spec, s, x)?;
    Ok(((det.re - c).powi(2) + (det.im - sn).powi(2)).sqrt())
}

/// Raw second partials of the position in the chart (s, geodesic
/// directions v_j): S[0][0] = l_ss, S[0][j] mixed, S[j][k] leaf pairs
/// via polarization. Only their normal parts are meaningful.
fn second_table<I: Immersion + ?Sized>(
    im: &I,
    s: f64,
    frame: &TangentFrame,
    cfg: &FdConfig,
) -> Result<Vec<Vec<ComplexPoint>>> {
    let n = frame.dim();
    let h = cfg.h_second;
    let x = &frame.x;
    let base = im.position(s, x)?;
    let mut table = vec![vec![ComplexPoint::zero(n); n]; n];
    let pp = im.position(s + h, x)?;
    let pm = im.position(s - h, x)?;
    table[0][0] = pp.add(&pm).add_scaled(-2.0, &base).scale(1.0 / (h * h));
    for j in 1..n {
        let v = &frame.v[j - 1];
        let qpp = im.position(s + h, &geodesic(x, v, h))?;
        let qpm = im.position(s + h, &geodesic(x, v, -h))?;
        let qmp = im.position(s - h, &geodesic(x, v, h))?;
        let qmm = im.position(s - h, &geodesic(x, v, -h))?;
        let mixed = qpp.sub(&qpm).sub(&qmp).add(&qmm).scale(0.25 / (h * h));
        table[0][j] = mixed.clone();
        table[j][0] = mixed;
        let gp = im.position(s, &geodesic(x, v, h))?;
        let gm = im.position(s, &geodesic(x, v, -h))?;
        table[j][j] = gp.add(&gm).add_scaled(-2.0, &base).scale(1.0 / (h * h));
    }
    let inv_rt2 = std::f64::consts::FRAC_1_SQRT_2;
    for j in 1..n {
        for k in (j + 1)..n {
            let vj = &frame.v[j - 1];
            let vk = &frame.v[k - 1];
            let plus: Vec<f64> = vj.iter().zip(vk).map(|(a, b)| (a + b) * inv_rt2).collect();
            let minus: Vec<f64> = vj.iter().zip(vk).map(|(a, b)| (a - b) * inv_rt2).collect();
            let quad = |u: &[f64]| -> Result<ComplexPoint> {
                let gp = im.position(s, &geodesic(x, u, h))?;
                let gm = im.position(s, &geodesic(x, u, -h))?;
                Ok(gp.add(&gm).add_scaled(-2.0, &base).scale(1.0 / (h * h)))
            };
            let s_jk = quad(&plus)?.sub(&quad(&minus)?).scale(0.5);
            table[j][k] = s_jk.clone();
            table[k][j] = s_jk;
        }
    }
    Ok(table)
}

/// Curvature read off numerically: coefficients of n J H on the
/// orthonormal pushforwards, the mean curvature vector, and the
/// worst asymmetry of C(u, v, w) = <h(u, v), J l_* w>.
#[derive(Clone, Debug)]
pub struct OracleCurvature {
    pub a: f64,
    pub aj: Vec<f64>,
    pub h_vec: ComplexPoint,
    pub symmetry_defect: f64,
}

pub fn oracle_mean_curvature(
    spec: &FoliatedSpec,
    s: f64,
    x: &SphereDirection,
    cfg: &FdConfig,
) -> Result<OracleCurvature> {
    let fd = FrameData::at(spec, s, x)?;
    let n = spec.n();
    let table = second_table(spec, s, &fd.frame, cfg)?;
    let mut coef = vec![vec![0.0; n]; n];
    coef[0][0] = fd.a_factor;
    for j in 1..n {
        coef[0][j] = fd.b_factors[j - 1];
        coef[j][j] = 1.0 / fd.profile.r;
    }
    let mut jn: Vec<ComplexPoint> = Vec::with_capacity(n);
    jn.push(fd.push_e1.j());
    for pe in &fd.push_ej {
        jn.push(pe.j());
    }
    let mut c = vec![vec![vec![0.0; n]; n]; n];
    let mut scale = 0.0f64;
    for a in 0..n {
        for b in a..n {
            let mut d = ComplexPoint::zero(n);
            for i in 0..n {
                for k in 0..n {
                    let w = coef[a][i] * coef[b][k];
                    if w != 0.0 {
                        d = d.add_scaled(w, &table[i][k]);
                    }
                }
            }
            for cc in 0..n {
                let val = d.dot_real(&jn[cc]);
                c[a][b][cc] = val;
                c[b][a][cc] = val;
                scale = scale.max(val.abs());
            }
        }
    }
    let mut defect = 0.0f64;
    for a in 0..n {
        for b in 0..n {
            for cc in 0..n {
                defect = defect.max((c[a][b][cc] - c[a][cc][b]).abs());
            }
        }
    }
    let defect = defect / scale.max(1.0);
    let coeffs: Vec<f64> =
        (0..n).map(|cc| -(0..n).map(|a| c[a][a][cc]).sum::<f64>()).collect();
    let mut h = ComplexPoint::zero(n);
    for (cc, jn_c) in jn.iter().enumerate() {
        h = h.add_scaled(-coeffs[cc] / n as f64, jn_c);
    }
    Ok(OracleCurvature {
        a: coeffs[0],
        aj: coeffs[1..].to_vec(),
        h_vec: h,
        symmetry_defect: defect,
    })
}

/// Normal-coordinate chart at a site: y = (sigma, u_2..u_n) maps to
/// (s + sigma, cos|u| x + sin|u| u-hat).
struct Chart<'a> {
    spec: &'a FoliatedSpec,
    s: f64,
    frame: TangentFrame,
}

impl Chart<'_> {
    fn dim(&self) -> usize {
        self.frame.dim()
    }

    fn sphere_at(&self, u: &[f64]) -> Result<SphereDirection> {
        let t2: f64 = u.iter().map(|a| a * a).sum();
        let t = t2.sqrt();
        let (cs, sinc) = if t < 1e-8 { (1.0 - 0.5 * t2, 1.0 - t2 / 6.0) } else { (t.cos(), t.sin() / t) };
        let mut pt = geom::scaled(&self.frame.x, cs);
        for (uj, v) in u.iter().zip(&self.frame.v) {
            pt = geom::axpy(&pt, sinc * uj, v);
        }
        SphereDirection::normalized(pt)
    }

    fn position(&self, y: &[f64]) -> Result<ComplexPoint> {
        let xv = self.sphere_at(&y[1..])?;
        foliation::eval_immersion(self.spec, self.s + y[0], &xv)
    }

    fn beta(&self, y: &[f64]) -> Result<f64> {
        let xv = self.sphere_at(&y[1..])?;
        foliation::lagrangian_angle(self.spec, self.s + y[0], &xv)
    }

    fn gram(&self, y: &[f64], h: f64) -> Result<Vec<Vec<f64>>> {
        let n = self.dim();
        let mut tang = Vec::with_capacity(n);
        for i in 0..n {
            let mut yp = y.to_vec();
            yp[i] += h;
            let mut ym = y.to_vec();
            ym[i] -= h;
            tang.push(self.position(&yp)?.sub(&self.position(&ym)?).scale(0.5 / h));
        }
        Ok((0..n).map(|i| (0..n).map(|j| tang[i].dot_real(&tang[j])).collect()).collect())
    }

    /// Components F_i = sqrt(g) g^{ij} d_j beta of the gradient flux.
    fn flux(&self, y: &[f64], h: f64) -> Result<Vec<f64>> {
        let n = self.dim();
        let gram = self.gram(y, h)?;
        let (inv, det) = geom::inverse_and_det(&gram)?;
        if det <= 0.0 {
            return Err(Error::RootFinding("chart metric degenerate".into()));
        }
        let base = self.beta(y)?;
        let mut grad = vec![0.0; n];
        for (i, g) in grad.iter_mut().enumerate() {
            let mut yp = y.to_vec();
            yp[i] += h;
            let mut ym = y.to_vec();
            ym[i] -= h;
            let bp = foliation::unwrap_angle(base, self.beta(&yp)?);
            let bm = foliation::unwrap_angle(base, self.beta(&ym)?);
            *g = (bp - bm) * 0.5 / h;
        }
        let sq = det.sqrt();
        Ok((0..n).map(|i| sq * geom::dot(&inv[i], &grad)).collect())
    }

    /// -(1/sqrt g) d_i F_i at the chart origin with outer step h2.
    fn divergence(&self, h1: f64, h2: f64) -> Result<f64> {
        let n = self.dim();
        let origin = vec![0.0; n];
        let mut acc = 0.0;
        for i in 0..n {
            let mut yp = origin.clone();
            yp[i] = h2;
            let mut ym = origin.clone();
            ym[i] = -h2;
            let fp = self.flux(&yp, h1)?;
            let fm = self.flux(&ym, h1)?;
            acc += (fp[i] - fm[i]) * 0.5 / h2;
        }
        let (_, det0) = geom::inverse_and_det(&self.gram(&origin, h1)?)?;
        Ok(-acc / det0.sqrt())
    }
}

/// Richardson-extrapolated divergence-form Laplacian of the angle.
#[derive(Clone, Copy, Debug)]
pub struct LaplaceEstimate {
    pub value: f64,
    pub coarse: f64,
    pub error_estimate: f64,
}

pub fn oracle_laplace_beltrami(
    spec: &FoliatedSpec,
    s: f64,
    x: &SphereDirection,
    cfg: &FdConfig,
) -> Result<LaplaceEstimate> {
    let chart = Chart { spec, s, frame: geom::tangent_frame(x) };
    let coarse = chart.divergence(cfg.h_first, cfg.h_second)?;
    let fine = chart.divergence(cfg.h_first, 0.5 * cfg.h_second)?;
    let value = (4.0 * fine - coarse) / 3.0;
    Ok(LaplaceEstimate { value, coarse, error_estimate: ((fine - coarse) / 3.0).abs() })
}

/// Riemannian norm of the FD gradient of the angle.
pub fn beta_gradient_norm(
    spec: &FoliatedSpec,
    s: f64,
    x: &SphereDirection,
    cfg: &FdConfig,
) -> Result<f64> {
    let chart = Chart { spec, s, frame: geom::tangent_frame(x) };
    let n = chart.dim();
    let origin = vec![0.0; n];
    let gram = chart.gram(&origin, cfg.h_first)?;
    let (inv, _) = geom::inverse_and_det(&gram)?;
    let base = chart.beta(&origin)?;
    let mut grad = vec![0.0; n];
    for (i, g) in grad.iter_mut().enumerate() {
        let mut yp = origin.clone();
        yp[i] = cfg.h_first;
        let mut ym = origin.clone();
        ym[i] = -cfg.h_first;
        let bp = foliation::unwrap_angle(base, chart.beta(&yp)?);
        let bm = foliation::unwrap_angle(base, chart.beta(&ym)?);
        *g = (bp - bm) * 0.5 / cfg.h_first;
    }
    let mut q = 0.0;
    for i in 0..n {
        for j in 0..n {
            q += inv[i][j] * grad[i] * grad[j];
        }
    }
    Ok(q.max(0.0).sqrt())
}

/// Sup of |grad beta| over the plan; zero exactly on special
/// Lagrangians. Sites where the angle is undefined are skipped and
/// counted.
pub fn residual_special_lagrangian(
    spec: &FoliatedSpec,
    plan: &[Site],
    cfg: &FdConfig,
) -> Result<ResidualReport> {
    let mut acc = Accumulator::new();
    for site in plan {
        match beta_gradient_norm(spec, site.s, &site.x, cfg) {
            Ok(v) => acc.record(site, v),
            Err(Error::AngleUndefined { .. }) => acc.skip(),
            Err(e) => return Err(e),
        }
    }
    Ok(acc.finish())
}

fn normal_projection(v: &ComplexPoint, fd: &FrameData) -> ComplexPoint {
    let mut out = ComplexPoint::zero(v.dim());
    let j1 = fd.push_e1.j();
    out = out.add_scaled(v.dot_real(&j1), &j1);
    for pe in &fd.push_ej {
        let jn = pe.j();
        out = out.add_scaled(v.dot_real(&jn), &jn);
    }
    out
}

/// Sup of ||H + lambda X-perp|| with H from the FD curvature oracle
/// and X-perp the normal projection of the full position (center
/// integral included).
pub fn residual_self_similar(
    spec: &FoliatedSpec,
    lambda: f64,
    plan: &[Site],
    cfg: &FdConfig,
) -> Result<ResidualReport> {
    let mut acc = Accumulator::new();
    for site in plan {
        let oc = oracle_mean_curvature(spec, site.s, &site.x, cfg)?;
        let fd = FrameData::at(spec, site.s, &site.x)?;
        let pos = foliation::eval_immersion(spec, site.s, &site.x)?;
        let xperp = normal_projection(&pos, &fd);
        acc.record(site, oc.h_vec.add_scaled(lambda, &xperp).norm());
    }
    Ok(acc.finish())
}

/// Sup of ||H - V-perp|| for a constant ambient velocity V.
pub fn residual_translator(
    spec: &FoliatedSpec,
    vvec: &ComplexPoint,
    plan: &[Site],
    cfg: &FdConfig,
) -> Result<ResidualReport> {
    let mut acc = Accumulator::new();
    for site in plan {
        let oc = oracle_mean_curvature(spec, site.s, &site.x, cfg)?;
        let fd = FrameData::at(spec, site.s, &site.x)?;
        let vperp = normal_projection(vvec, &fd);
        acc.record(site, oc.h_vec.sub(&vperp).norm());
    }
    Ok(acc.finish())
}

/// Violation threshold for the pointwise linear condition below.
pub const STAR_TOL: f64 = 1e-10;

/// Data of the pointwise condition <b, xi> + r <B x, xi> = 0 over
/// orthonormal pairs (x, xi).
#[derive(Clone, Debug)]
pub struct StarInstance {
    b: Vec<f64>,
    bmat: Vec<Vec<f64>>,
}

impl StarInstance {
    pub fn new(b: Vec<f64>, bmat: Vec<Vec<f64>>) -> Result<Self> {
        let n = b.len();
        if bmat.len() != n || bmat.iter().any(|row| row.len() != n) {
            return Err(Error::DimensionMismatch { expected: n, got: bmat.len() });
        }
        for i in 0..n {
            for j in (i + 1)..n {
                if (bmat[i][j] - bmat[j][i]).abs() > 1e-12 {
                    return Err(Error::Config(format!("matrix not symmetric at ({i},{j})")));
                }
            }
        }
        Ok(Self { b, bmat })
    }

    pub fn dim(&self) -> usize {
        self.b.len()
    }

    pub fn b(&self) -> &[f64] {
        &self.b
    }

    pub fn bmat(&self) -> &[Vec<f64>] {
        &self.bmat
    }

    /// b vanishes and the matrix is a multiple of the identity, both
    /// within 1e-10; the shape the condition forces.
    pub fn is_scalar_form(&self) -> bool {
        let n = self.dim();
        if self.b.iter().any(|v| v.abs() > STAR_TOL) {
            return false;
        }
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for i in 0..n {
            lo = lo.min(self.bmat[i][i]);
            hi = hi.max(self.bmat[i][i]);
            for j in 0..n {
                if i != j && self.bmat[i][j].abs() > STAR_TOL {
                    return false;
                }
            }
        }
        hi - lo < STAR_TOL
    }

    fn value(&self, r: f64, x: &[f64], xi: &[f64]) -> f64 {
        let n = self.dim();
        let mut bx = vec![0.0; n];
        for i in 0..n {
            bx[i] = geom::dot(&self.bmat[i], x);
        }
        geom::dot(&self.b, xi) + r * geom::dot(&bx, xi)
    }
}

#[derive(Clone, Debug)]
pub enum StarVerdict {
    Holds,
    Violated { x: Vec<f64>, xi: Vec<f64>, value: f64 },
}

impl StarVerdict {
    pub fn holds(&self) -> bool {
        matches!(self, StarVerdict::Holds)
    }
}

/// Tests the condition on structured axis probes (they detect any b
/// component, off-diagonal entry, or diagonal spread) and then on
/// seeded quasi-uniform orthonormal pairs; returns the first
/// violating pair.
pub fn check_star_condition(inst: &StarInstance, r: f64, samples: usize) -> Result<StarVerdict> {
    let n = inst.dim();
    if !(r > 0.0) {
        return Err(Error::Config(format!("leaf radius must be positive, got {r}")));
    }
    if samples < n * n {
        return Err(Error::Config(format!("need at least n^2 = {} samples, got {samples}", n * n)));
    }
    let axis = |i: usize| -> Vec<f64> {
        let mut e = vec![0.0; n];
        e[i] = 1.0;
        e
    };
    let verdict = |x: Vec<f64>, xi: Vec<f64>| -> Option<StarVerdict> {
        let v = inst.value(r, &x, &xi);
        (v.abs() > STAR_TOL).then_some(StarVerdict::Violated { x, xi, value: v })
    };
    for i in 0..n {
        for j in 0..n {
            if i == j {
                continue;
            }
            for sign in [1.0, -1.0] {
                if let Some(v) = verdict(geom::scaled(&axis(i), sign), axis(j)) {
                    return Ok(v);
                }
            }
        }
    }
    let inv_rt2 = std::f64::consts::FRAC_1_SQRT_2;
    for i in 0..n {
        for j in (i + 1)..n {
            let x = geom::axpy(&axis(i), 1.0, &axis(j));
            let xi = geom::axpy(&axis(i), -1.0, &axis(j));
            if let Some(v) =
                verdict(geom::scaled(&x, inv_rt2), geom::scaled(&xi, inv_rt2))
            {
                return Ok(v);
            }
        }
    }
    let mut rng = sample::rng(0x5f3c_9ad1);
    for _ in 0..samples {
        let (x, xi) = sample::orthonormal_pair(&mut rng, n);
        if let Some(v) = verdict(x, xi) {
            return Ok(v);
        }
    }
    Ok(StarVerdict::Holds)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn generic_x(n: usize) -> SphereDirection {
        SphereDirection::normalized((0..n).map(|i| 1.0 - 0.4 * i as f64).collect()).unwrap()
    }

    #[test]
    fn fd_tangent_matches_circle_velocity() {
        // l(s, x) = e^{is} x, so l_s = i e^{is} x.
        let spec = FoliatedSpec::standard_circle(3).unwrap();
        let cfg = FdConfig::default();
        let x = generic_x(3);
        let s = 0.7;
        let t = fd_tangents(&spec, s, &x, &cfg).unwrap();
        assert!(!t.one_sided);
        let expect = ComplexPoint::from_polar_direction(1.0, s, x.coords()).j();
        assert!(t.tangents[0].sub(&expect).norm() < 1e-9);
    }

    #[test]
    fn fd_leaf_tangents_match_pushforwards() {
        let spec = FoliatedSpec::catenoid3(1.0).unwrap();
        let cfg = FdConfig::default();
        let x = generic_x(3);
        let s = 0.8;
        let t = fd_tangents(&spec, s, &x, &cfg).unwrap();
        let fd = FrameData::at(&spec, s, &x).unwrap();
        assert!(t.tangents[0].sub(&fd.ell_s).norm() < 1e-9);
        for (num, closed) in t.tangents[1..].iter().zip(&fd.push_vj) {
            assert!(num.sub(closed).norm() < 1e-9);
        }
    }

    #[test]
    fn endpoint_uses_one_sided_stencil() {
        let spec = FoliatedSpec::line(3, 0.3, 0.4).unwrap();
        let cfg = FdConfig::default();
        let x = generic_x(3);
        let (lo, _) = spec.curve().domain();
        let t = fd_tangents(&spec, lo, &x, &cfg).unwrap();
        assert!(t.one_sided);
        // The line is affine in s, so even one-sided FD is exact.
        let fd = FrameData::at(&spec, 1.0, &x).unwrap();
        assert!(t.tangents[0].sub(&fd.ell_s).norm() < 1e-8);
    }

    #[test]
    fn isotropy_defect_small_on_true_specs() {
        let cfg = FdConfig::default();
        let spec = FoliatedSpec::epicycloid(3, 1.3, 0.6).unwrap();
        let plan = sample::plan(&spec, 21, 30, 0.05);
        let rep = check_lagrangian(&spec, &plan, &cfg).unwrap();
        assert!(rep.sup_norm < 1e-8, "sup {}", rep.sup_norm);
        assert!(rep.rms <= rep.sup_norm);

        let mut r = sample::rng(5);
        let spec = sample::random_spec(&mut r, 4).unwrap();
        let plan = sample::plan(&spec, 22, 30, 0.05);
        let rep = check_lagrangian(&spec, &plan, &cfg).unwrap();
        assert!(rep.sup_norm < 1e-8, "sup {}", rep.sup_norm);
    }

    #[test]
    fn twisted_image_fails_isotropy() {
        let cfg = FdConfig::default();
        let spec = FoliatedSpec::epicycloid(3, 1.3, 0.6).unwrap();
        let twisted = ImaginaryTwist { spec: &spec, angle: 0.05 };
        let plan = sample::plan(&spec, 23, 20, 0.05);
        let rep = check_lagrangian(&twisted, &plan, &cfg).unwrap();
        assert!(rep.sup_norm >= 1e-4, "sup {}", rep.sup_norm);
    }

    #[test]
    fn metric_and_frame_match_gram() {
        let cfg = FdConfig::default();
        let mut r = sample::rng(9);
        for n in [3usize, 5] {
            let spec = sample::random_spec(&mut r, n).unwrap();
            let x = generic_x(n);
            let s = 0.6;
            assert!(metric_vs_gram_defect(&spec, s, &x, &cfg).unwrap() < 1e-6);
            assert!(frame_vs_gram_defect(&spec, s, &x, &cfg).unwrap() < 1e-9);
        }
    }

    #[test]
    fn angle_agrees_with_fd_determinant() {
        let cfg = FdConfig::default();
        let specs = [
            FoliatedSpec::standard_circle(3).unwrap(),
            FoliatedSpec::epicycloid(4, 1.2, 0.5).unwrap(),
            FoliatedSpec::catenoid3(1.0).unwrap(),
        ];
        for spec in &specs {
            let x = generic_x(spec.n());
            let d = angle_vs_det_defect(spec, 0.9, &x, &cfg).unwrap();
            assert!(d < 1e-6, "defect {d}");
        }
    }

    #[test]
    fn circle_curvature_coefficients() {
        let spec = FoliatedSpec::standard_circle(3).unwrap();
        let cfg = FdConfig::default();
        let x = generic_x(3);
        let oc = oracle_mean_curvature(&spec, 0.4, &x, &cfg).unwrap();
        assert!((oc.a + 3.0).abs() < 1e-4, "a {}", oc.a);
        for aj in &oc.aj {
            assert!(aj.abs() < 1e-6);
        }
        assert!(oc.symmetry_defect < 1e-4);
        // H = -e^{is} x on the unit circle.
        let expect = ComplexPoint::from_polar_direction(1.0, 0.4, x.coords()).scale(-1.0);
        assert!(oc.h_vec.sub(&expect).norm() < 1e-4);
    }

    #[test]
    fn centered_specs_have_no_leaf_curvature_components() {
        let spec = FoliatedSpec::catenoid3(1.0).unwrap();
        let cfg = FdConfig::default();
        let oc = oracle_mean_curvature(&spec, 0.7, &generic_x(3), &cfg).unwrap();
        for aj in &oc.aj {
            assert!(aj.abs() < 1e-6);
        }
    }

    #[test]
    fn oracle_curvature_matches_closed_form() {
        let cfg = FdConfig::default();
        let mut r = sample::rng(31);
        for n in [3usize, 4] {
            let spec = sample::random_spec(&mut r, n).unwrap();
            let x = generic_x(n);
            let s = 0.8;
            let oc = oracle_mean_curvature(&spec, s, &x, &cfg).unwrap();
            let (cd, h) = foliation::mean_curvature(&spec, s, &x).unwrap();
            let scale = cd.a.abs().max(1.0);
            assert!((oc.a - cd.a).abs() / scale < 1e-4, "a {} vs {}", oc.a, cd.a);
            for (num, closed) in oc.aj.iter().zip(&cd.aj) {
                assert!((num - closed).abs() / scale < 1e-4);
            }
            assert!(oc.h_vec.sub(&h).norm() < 1e-4);
            assert!(oc.symmetry_defect < 1e-4);
        }
    }

    #[test]
    fn laplacian_vanishes_on_circle() {
        let spec = FoliatedSpec::standard_circle(3).unwrap();
        let cfg = FdConfig::default();
        let est = oracle_laplace_beltrami(&spec, 0.3, &generic_x(3), &cfg).unwrap();
        assert!(est.value.abs() < 1e-6, "laplacian {}", est.value);
    }

    #[test]
    fn laplacian_matches_centered_closed_form() {
        let spec = FoliatedSpec::catenoid3(1.0).unwrap();
        let cfg = FdConfig::default();
        let x = generic_x(3);
        let s = 0.4;
        let est = oracle_laplace_beltrami(&spec, s, &x, &cfg).unwrap();
        let closed = foliation::laplace_beta(&spec, s, &x).unwrap();
        assert!((est.value - closed).abs() < 1e-6, "{} vs {closed}", est.value);
    }

    #[test]
    fn laplacian_matches_closed_form_with_center() {
        let cfg = FdConfig::default();
        let mut r = sample::rng(77);
        let spec = sample::random_spec(&mut r, 3).unwrap();
        let x = generic_x(3);
        let s = 1.1;
        let est = oracle_laplace_beltrami(&spec, s, &x, &cfg).unwrap();
        let closed = foliation::laplace_beta(&spec, s, &x).unwrap();
        let rel = (est.value - closed).abs() / closed.abs().max(1.0);
        assert!(rel < 1e-3, "oracle {} closed {closed}", est.value);
    }

    #[test]
    fn angle_gradient_residuals() {
        let cfg = FdConfig::default();
        // beta = n s + pi/2 on the standard circle: |grad beta| = n.
        let spec = FoliatedSpec::standard_circle(3).unwrap();
        let plan = sample::plan(&spec, 41, 10, 0.05);
        let rep = residual_special_lagrangian(&spec, &plan, &cfg).unwrap();
        assert!((rep.sup_norm - 3.0).abs() < 1e-5, "sup {}", rep.sup_norm);
        assert!(rep.skipped == 0);

        // The flat example has constant angle.
        let spec = FoliatedSpec::line(3, 0.2, 0.5).unwrap();
        let plan = sample::plan(&spec, 42, 10, 0.5);
        let rep = residual_special_lagrangian(&spec, &plan, &cfg).unwrap();
        assert!(rep.sup_norm < 1e-10, "sup {}", rep.sup_norm);
    }

    #[test]
    fn shrinker_and_translator_residuals() {
        let cfg = FdConfig::default();
        let spec = FoliatedSpec::standard_circle(3).unwrap();
        let plan = sample::plan(&spec, 51, 6, 0.05);
        let shrink = residual_self_similar(&spec, 1.0, &plan, &cfg).unwrap();
        assert!(shrink.sup_norm < 1e-6, "sup {}", shrink.sup_norm);
        let bare = residual_self_similar(&spec, 0.0, &plan, &cfg).unwrap();
        assert!((bare.sup_norm - 1.0).abs() < 1e-4);

        let line = FoliatedSpec::line(3, 0.2, 0.5).unwrap();
        let lplan = sample::plan(&line, 52, 6, 0.5);
        let min = residual_translator(&line, &ComplexPoint::zero(3), &lplan, &cfg).unwrap();
        assert!(min.sup_norm < 1e-8, "sup {}", min.sup_norm);
        for lambda in [0.0, 0.7] {
            let rep = residual_self_similar(&line, lambda, &lplan, &cfg).unwrap();
            assert!(rep.sup_norm < 1e-8);
        }

        let cat = FoliatedSpec::catenoid3(1.0).unwrap();
        let cplan = sample::plan(&cat, 53, 6, 0.05);
        let rep = residual_translator(&cat, &ComplexPoint::zero(3), &cplan, &cfg).unwrap();
        assert!(rep.sup_norm > 0.1, "catenoid is not minimal, sup {}", rep.sup_norm);
    }

    #[test]
    fn star_condition_scalar_form_holds() {
        let n = 4;
        let mut bmat = vec![vec![0.0; n]; n];
        for (i, row) in bmat.iter_mut().enumerate() {
            row[i] = 2.5;
        }
        let inst = StarInstance::new(vec![0.0; n], bmat).unwrap();
        assert!(inst.is_scalar_form());
        assert!(check_star_condition(&inst, 1.3, 2 * n * n).unwrap().holds());
    }

    #[test]
    fn star_condition_detects_offset() {
        let n = 3;
        let mut b = vec![0.0; n];
        b[0] = 1.0;
        let mut bmat = vec![vec![0.0; n]; n];
        for (i, row) in bmat.iter_mut().enumerate() {
            row[i] = 1.0;
        }
        let inst = StarInstance::new(b, bmat).unwrap();
        assert!(!inst.is_scalar_form());
        match check_star_condition(&inst, 0.8, n * n).unwrap() {
            StarVerdict::Violated { value, .. } => assert!((value - 1.0).abs() < 1e-12),
            StarVerdict::Holds => panic!("offset instance must violate"),
        }
    }

    #[test]
    fn star_condition_detects_diagonal_spread() {
        let n = 4;
        let mut bmat = vec![vec![0.0; n]; n];
        let diag = [1.0, 2.0, 1.0, 1.0];
        for (i, row) in bmat.iter_mut().enumerate() {
            row[i] = diag[i];
        }
        let inst = StarInstance::new(vec![0.0; n], bmat).unwrap();
        let r = 0.9;
        match check_star_condition(&inst, r, n * n).unwrap() {
            StarVerdict::Violated { x, xi, value } => {
                // First catching probe is x=(e1+e2)/sqrt2, xi=(e1-e2)/sqrt2
                // with value r (B11 - B22)/2 = -r/2.
                assert!((value + 0.5 * r).abs() < 1e-12, "value {value}");
                assert!((x[0] - xi[0]).abs() < 1e-12);
                assert!((x[1] + xi[1]).abs() < 1e-12);
            }
            StarVerdict::Holds => panic!("spread instance must violate"),
        }
    }

    #[test]
    fn star_condition_validates_inputs() {
        let inst = StarInstance::new(vec![0.0; 3], vec![vec![0.0; 3]; 3]).unwrap();
        assert!(check_star_condition(&inst, 0.0, 9).is_err());
        assert!(check_star_condition(&inst, 1.0, 3).is_err());
        let mut skew = vec![vec![0.0; 3]; 3];
        skew[0][1] = 1.0;
        assert!(StarInstance::new(vec![0.0; 3], skew).is_err());
    }
}
