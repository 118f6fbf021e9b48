//! Adaptive quadrature: Gauss-Kronrod 7-15 with interval bisection,
//! plus a doubling scheme for integrals over half-infinite ranges.

use crate::error::{Error, Result};

/// Kronrod abscissae (positive half, descending); the odd-indexed
/// entries are the embedded 7-point Gauss nodes.
const XGK: [f64; 8] = [
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144838258730,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.0,
];

const WGK: [f64; 8] = [
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
];

const WG: [f64; 4] = [
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
];

/// One Kronrod-15 panel; returns (kronrod, |kronrod - gauss|).
fn qk15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut resk = WGK[7] * fc;
    let mut resg = WG[3] * fc;
    for j in 0..7 {
        let x = h * XGK[j];
        let f1 = f(c - x);
        let f2 = f(c + x);
        resk += WGK[j] * (f1 + f2);
        if j % 2 == 1 {
            resg += WG[(j - 1) / 2] * (f1 + f2);
        }
    }
    (resk * h, ((resk - resg) * h).abs())
}

/// Adaptive Gauss-Kronrod integration to an absolute tolerance.
/// Bisects the worst panel until the summed error estimate is below
/// `abs_tol` or the panel budget is exhausted.
pub fn adaptive<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, abs_tol: f64) -> Result<f64> {
    if a == b {
        return Ok(0.0);
    }
    const MAX_PANELS: usize = 4096;
    // (err, a, b, value); worst panel found by linear scan, counts stay small.
    let mut panels: Vec<(f64, f64, f64, f64)> = Vec::new();
    let (v, e) = qk15(f, a, b);
    panels.push((e, a, b, v));
    loop {
        let err_sum: f64 = panels.iter().map(|p| p.0).sum();
        if err_sum <= abs_tol {
            return Ok(panels.iter().map(|p| p.3).sum());
        }
        if panels.len() >= MAX_PANELS {
            return Err(Error::Quadrature(format!(
                "error {err_sum:e} above tolerance {abs_tol:e} after {MAX_PANELS} panels"
            )));
        }
        let worst = panels
            .iter()
            .enumerate()
            .max_by(|x, y| x.1 .0.total_cmp(&y.1 .0))
            .map(|(i, _)| i)
            .unwrap();
        let (_, pa, pb, _) = panels.swap_remove(worst);
        let mid = 0.5 * (pa + pb);
        if mid <= pa || mid >= pb {
            return Err(Error::Quadrature("panel collapsed below machine width".into()));
        }
        let (v1, e1) = qk15(f, pa, mid);
        let (v2, e2) = qk15(f, mid, pb);
        panels.push((e1, pa, mid, v1));
        panels.push((e2, mid, pb, v2));
    }
}

/// Vector-valued Kronrod-15 panel.
fn qk15_vec<F: Fn(f64) -> Vec<f64>>(f: &F, a: f64, b: f64, dim: usize) -> (Vec<f64>, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut resk: Vec<f64> = fc.iter().map(|v| WGK[7] * v).collect();
    let mut resg: Vec<f64> = fc.iter().map(|v| WG[3] * v).collect();
    for j in 0..7 {
        let x = h * XGK[j];
        let f1 = f(c - x);
        let f2 = f(c + x);
        for i in 0..dim {
            resk[i] += WGK[j] * (f1[i] + f2[i]);
            if j % 2 == 1 {
                resg[i] += WG[(j - 1) / 2] * (f1[i] + f2[i]);
            }
        }
    }
    let mut err = 0.0f64;
    for i in 0..dim {
        resk[i] *= h;
        err = err.max((resk[i] - resg[i] * h).abs());
    }
    (resk, err)
}

/// Componentwise adaptive integration of a vector integrand; the error
/// target applies to the worst component.
pub fn adaptive_vec<F: Fn(f64) -> Vec<f64>>(
    f: &F,
    a: f64,
    b: f64,
    dim: usize,
    abs_tol: f64,
) -> Result<Vec<f64>> {
    if a == b {
        return Ok(vec![0.0; dim]);
    }
    const MAX_PANELS: usize = 2048;
    let mut panels: Vec<(f64, f64, f64, Vec<f64>)> = Vec::new();
    let (v, e) = qk15_vec(f, a, b, dim);
    panels.push((e, a, b, v));
    loop {
        let err_sum: f64 = panels.iter().map(|p| p.0).sum();
        if err_sum <= abs_tol {
            let mut total = vec![0.0; dim];
            for p in &panels {
                for i in 0..dim {
                    total[i] += p.3[i];
                }
            }
            return Ok(total);
        }
        if panels.len() >= MAX_PANELS {
            return Err(Error::Quadrature(format!(
                "vector quadrature error {err_sum:e} above {abs_tol:e} after {MAX_PANELS} panels"
            )));
        }
        let worst = panels
            .iter()
            .enumerate()
            .max_by(|x, y| x.1 .0.total_cmp(&y.1 .0))
            .map(|(i, _)| i)
            .unwrap();
        let (_, pa, pb, _) = panels.swap_remove(worst);
        let mid = 0.5 * (pa + pb);
        if mid <= pa || mid >= pb {
            return Err(Error::Quadrature("panel collapsed below machine width".into()));
        }
        let (v1, e1) = qk15_vec(f, pa, mid, dim);
        let (v2, e2) = qk15_vec(f, mid, pb, dim);
        panels.push((e1, pa, mid, v1));
        panels.push((e2, mid, pb, v2));
    }
}

/// Fixed 5-point Gauss-Legendre panel; exact through degree 9.
pub fn gauss5<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> f64 {
    const X: [f64; 2] = [0.538469310105683091, 0.906179845938663993];
    const W: [f64; 2] = [0.478628670499366468, 0.236926885056189088];
    const W0: f64 = 0.568888888888888889;
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let mut acc = W0 * f(c);
    for j in 0..2 {
        acc += W[j] * (f(c - h * X[j]) + f(c + h * X[j]));
    }
    acc * h
}

/// Outcome of an integral over [a, infinity).
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Improper {
    Value(f64),
    /// Partial sums exceeded the divergence cap.
    Divergent,
}

/// Integrates f over [a, infinity) by doubling the truncation point
/// until the tail increment drops below `tail_tol`. Partial sums
/// passing `divergence_cap` are reported as `Divergent` rather than
/// ground out to the panel budget.
pub fn to_infinity<F: Fn(f64) -> f64>(
    f: &F,
    a: f64,
    span0: f64,
    abs_tol: f64,
    tail_tol: f64,
    divergence_cap: f64,
) -> Result<Improper> {
    let mut hi = a + span0;
    let mut total = adaptive(f, a, hi, abs_tol)?;
    let mut incs = (f64::INFINITY, f64::INFINITY);
    for _ in 0..64 {
        let next = a + 2.0 * (hi - a);
        let inc = adaptive(f, hi, next, abs_tol)?;
        total += inc;
        hi = next;
        if total.abs() > divergence_cap {
            return Ok(Improper::Divergent);
        }
        if inc.abs() < tail_tol {
            return Ok(Improper::Value(total));
        }
        incs = (incs.1, inc.abs());
    }
    // Budget exhausted. A logarithmic tail keeps adding a fixed amount
    // per doubling; treat a non-decaying increment as divergence.
    if incs.1 >= 0.5 * incs.0 {
        return Ok(Improper::Divergent);
    }
    Err(Error::Quadrature("tail increments never fell below tolerance".into()))
}
