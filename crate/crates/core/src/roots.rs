//! Scalar root bracketing.

use crate::error::{Error, Result};

/// Finds a root of `f` inside [a, b] by Brent's method (bisection
/// safeguarding inverse-quadratic and secant steps). The endpoints must
/// straddle zero; `tol` is an absolute tolerance on the abscissa.
pub fn brent<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, tol: f64, max_iter: usize) -> Result<f64> {
    let mut a = a;
    let mut b = b;
    let mut fa = f(a);
    let mut fb = f(b);
    if fa == 0.0 {
        return Ok(a);
    }
    if fb == 0.0 {
        return Ok(b);
    }
    if !(fa.is_finite() && fb.is_finite()) {
        return Err(Error::RootFinding(format!(
            "non-finite bracket values f({a}) = {fa}, f({b}) = {fb}"
        )));
    }
    if fa.signum() == fb.signum() {
        return Err(Error::RootFinding(format!(
            "no sign change on [{a}, {b}]: f = ({fa:e}, {fb:e})"
        )));
    }
    let mut c = a;
    let mut fc = fa;
    let mut d = b - a;
    let mut e = d;
    for _ in 0..max_iter {
        if fb.signum() == fc.signum() {
            c = a;
            fc = fa;
            d = b - a;
            e = d;
        }
        if fc.abs() < fb.abs() {
            a = b;
            b = c;
            c = a;
            fa = fb;
            fb = fc;
            fc = fa;
        }
        let tol1 = 2.0 * f64::EPSILON * b.abs() + 0.5 * tol;
        let xm = 0.5 * (c - b);
        if xm.abs() <= tol1 || fb == 0.0 {
            return Ok(b);
        }
        if e.abs() >= tol1 && fa.abs() > fb.abs() {
            // Attempt an interpolation step.
            let s = fb / fa;
            let (mut p, mut q) = if a == c {
                (2.0 * xm * s, 1.0 - s)
            } else {
                let q0 = fa / fc;
                let r = fb / fc;
                (
                    s * (2.0 * xm * q0 * (q0 - r) - (b - a) * (r - 1.0)),
                    (q0 - 1.0) * (r - 1.0) * (s - 1.0),
                )
            };
            if p > 0.0 {
                q = -q;
            }
            p = p.abs();
            let min1 = 3.0 * xm * q - (tol1 * q).abs();
            let min2 = (e * q).abs();
            if 2.0 * p < min1.min(min2) {
                e = d;
                d = p / q;
            } else {
                d = xm;
                e = d;
            }
        } else {
            d = xm;
            e = d;
        }
        a = b;
        fa = fb;
        b += if d.abs() > tol1 { d } else { tol1.copysign(xm) };
        fb = f(b);
        if !fb.is_finite() {
            return Err(Error::RootFinding(format!("f({b}) is not finite")));
        }
    }
    Err(Error::RootFinding(format!(
        "no convergence on [{a}, {b}] after {max_iter} iterations"
    )))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn finds_cosine_zero() {
        let r = brent(&|x: f64| x.cos(), 1.0, 2.0, 1e-14, 100).unwrap();
        assert!((r - std::f64::consts::FRAC_PI_2).abs() < 1e-13);
    }

    #[test]
    fn finds_cubic_root_with_flat_approach() {
        let r = brent(&|x: f64| (x - 0.3).powi(3), -1.0, 1.0, 1e-12, 200).unwrap();
        assert!((r - 0.3).abs() < 1e-4, "{r}");
    }

    #[test]
    fn endpoint_roots_return_immediately() {
        let r = brent(&|x: f64| x, 0.0, 1.0, 1e-14, 100).unwrap();
        assert_eq!(r, 0.0);
    }

    #[test]
    fn rejects_unbracketed_interval() {
        assert!(brent(&|x: f64| x * x + 1.0, -1.0, 1.0, 1e-14, 100).is_err());
    }

    #[test]
    fn tight_bracket_around_steep_root() {
        let f = |x: f64| (50.0 * (x - 0.123456)).tanh();
        let r = brent(&f, 0.0, 1.0, 1e-15, 200).unwrap();
        assert!((r - 0.123456).abs() < 1e-12, "{r}");
    }
}
