//! Deterministic sample plans for verification sweeps.
//!
//! Everything here is seeded: the same seed yields the same plan, so
//! oracle sweeps and CI runs are reproducible. Arclength values come
//! from a golden-ratio sequence (low discrepancy beats i.i.d. for
//! sup-norm sweeps); sphere directions are seeded Gaussian normals.

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::Result;
use crate::geom::{self, SphereDirection};
use crate::profile::{CenterVelocity, FoliatedSpec, ProfileCurve, TrigTerm};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Uniform point on the unit sphere of R^n.
pub fn sphere_point<R: Rng>(rng: &mut R, n: usize) -> SphereDirection {
    loop {
        let v: Vec<f64> = (0..n).map(|_| rng.sample(StandardNormal)).collect();
        if let Ok(x) = SphereDirection::normalized(v) {
            return x;
        }
    }
}

/// Orthonormal pair (x, xi) in R^n.
pub fn orthonormal_pair<R: Rng>(rng: &mut R, n: usize) -> (Vec<f64>, Vec<f64>) {
    loop {
        let x = sphere_point(rng, n);
        let raw: Vec<f64> = (0..n).map(|_| rng.sample(StandardNormal)).collect();
        let proj = geom::dot(&raw, x.coords());
        let orth = geom::axpy(&raw, -proj, x.coords());
        let norm = geom::norm(&orth);
        if norm > 1e-6 {
            let xi = geom::scaled(&orth, 1.0 / norm);
            return (x.coords().to_vec(), xi);
        }
    }
}

/// First `count` points of the golden-ratio sequence in [0, 1).
pub fn golden_sequence(count: usize) -> Vec<f64> {
    const INV_PHI: f64 = 0.618_033_988_749_894_9;
    (1..=count).map(|i| (i as f64 * INV_PHI).fract()).collect()
}

/// Arclength values spread over the curve domain, inset by `margin`
/// on both ends so finite-difference stencils stay inside.
pub fn s_values(domain: (f64, f64), count: usize, margin: f64) -> Vec<f64> {
    let (lo, hi) = domain;
    let a = lo + margin;
    let b = hi - margin;
    golden_sequence(count).into_iter().map(|u| a + (b - a) * u).collect()
}

/// One evaluation site of a sweep.
#[derive(Clone, Debug)]
pub struct Site {
    pub s: f64,
    pub x: SphereDirection,
}

/// Deterministic (s, x) sites for a spec.
pub fn plan(spec: &FoliatedSpec, seed: u64, count: usize, margin: f64) -> Vec<Site> {
    let mut r = rng(seed);
    let n = spec.n();
    s_values(spec.curve().domain(), count, margin)
        .into_iter()
        .map(|s| Site { s, x: sphere_point(&mut r, n) })
        .collect()
}

/// Seeded spec with a closed-form curve and a one- or two-term
/// trigonometric center velocity. Curves stay well away from the
/// puncture so 1/r quantities are tame.
pub fn random_spec<R: Rng>(rng: &mut R, n: usize) -> Result<FoliatedSpec> {
    let curve = if rng.random::<f64>() < 0.5 {
        ProfileCurve::circle(0.8 + 1.2 * rng.random::<f64>())
    } else {
        ProfileCurve::vertical_line(0.7 + 0.8 * rng.random::<f64>(), 20.0)
    };
    let terms = 1 + (rng.random::<f64>() < 0.4) as usize;
    let mut trig = Vec::with_capacity(terms);
    for _ in 0..terms {
        let amp = |r: &mut R| -> Vec<f64> {
            (0..n).map(|_| 0.5 * (r.random::<f64>() - 0.5)).collect()
        };
        trig.push(TrigTerm {
            omega: 0.3 + 1.2 * rng.random::<f64>(),
            cos_amp: amp(rng),
            sin_amp: amp(rng),
        });
    }
    // Cap sup_s |W| at 0.6 so e^{i alpha} + <W,x> stays away from zero
    // and the angle is defined at every sample.
    let bound: f64 = trig.iter().map(|t| geom::norm(&t.cos_amp) + geom::norm(&t.sin_amp)).sum();
    if bound > 0.6 {
        let f = 0.6 / bound;
        for t in &mut trig {
            t.cos_amp = geom::scaled(&t.cos_amp, f);
            t.sin_amp = geom::scaled(&t.sin_amp, f);
        }
    }
    let center = CenterVelocity::trig(n, trig)?;
    FoliatedSpec::new(n, curve, center, 0.0)
}

/// Seeded centered spec (zero center velocity).
pub fn random_centered_spec<R: Rng>(rng: &mut R, n: usize) -> Result<FoliatedSpec> {
    let curve = if rng.random::<f64>() < 0.5 {
        ProfileCurve::circle(0.8 + 1.2 * rng.random::<f64>())
    } else {
        ProfileCurve::vertical_line(0.7 + 0.8 * rng.random::<f64>(), 20.0)
    };
    FoliatedSpec::new(n, curve, CenterVelocity::zero(n), 0.0)
}
