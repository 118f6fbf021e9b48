//! Embedded Runge-Kutta integration: Dormand-Prince 5(4) with PI step
//! control, quartic dense output, and event location on the dense
//! interpolant. Steps may run in either s-direction.

use crate::error::{Error, Result};

const C: [f64; 7] = [0.0, 0.2, 0.3, 0.8, 8.0 / 9.0, 1.0, 1.0];

const A: [[f64; 6]; 6] = [
    [0.2, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];

/// Fifth-order solution weights (row 7 of A; the pair is FSAL).
const B5: [f64; 6] = A[5];

/// b5 - b4, used for the embedded error estimate.
const E: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];

/// Dense-output weights for the quartic interpolant.
const D: [f64; 7] = [
    -12715105075.0 / 11282082432.0,
    0.0,
    87487479700.0 / 32700410799.0,
    -10690763975.0 / 1880347072.0,
    701980252875.0 / 199316789632.0,
    -1453857185.0 / 822651844.0,
    69997945.0 / 29380423.0,
];

#[derive(Clone, Copy, Debug)]
pub struct OdeOpts {
    pub atol: f64,
    pub rtol: f64,
    /// First step size guess; derived from the slope at s0 when None.
    pub h0: Option<f64>,
    pub h_max: f64,
    pub max_steps: usize,
}

impl Default for OdeOpts {
    fn default() -> Self {
        Self { atol: 1e-10, rtol: 1e-10, h0: None, h_max: f64::INFINITY, max_steps: 1_000_000 }
    }
}

/// One accepted step with its interpolation polynomial.
#[derive(Clone, Debug)]
pub struct DenseStep {
    pub s0: f64,
    pub h: f64,
    /// rcont[0..5]: quartic coefficients per state component.
    rcont: [Vec<f64>; 5],
}

impl DenseStep {
    pub fn s1(&self) -> f64 {
        self.s0 + self.h
    }

    pub fn contains(&self, s: f64) -> bool {
        let t = (s - self.s0) / self.h;
        (-1e-12..=1.0 + 1e-12).contains(&t)
    }

    pub fn eval(&self, s: f64) -> Vec<f64> {
        let th = (s - self.s0) / self.h;
        let th1 = 1.0 - th;
        (0..self.rcont[0].len())
            .map(|i| {
                self.rcont[0][i]
                    + th * (self.rcont[1][i]
                        + th1 * (self.rcont[2][i]
                            + th * (self.rcont[3][i] + th1 * self.rcont[4][i])))
            })
            .collect()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum OdeStatus {
    ReachedEnd,
    /// Stopped where event function `index` crossed zero.
    Event { index: usize, s: f64 },
    MaxSteps,
}

#[derive(Clone, Debug)]
pub struct OdeSolution {
    pub steps: Vec<DenseStep>,
    pub s0: f64,
    pub y0: Vec<f64>,
    pub s_last: f64,
    pub y_last: Vec<f64>,
    pub status: OdeStatus,
    pub n_accepted: usize,
    pub n_rejected: usize,
}

impl OdeSolution {
    pub fn s_span(&self) -> (f64, f64) {
        if self.s0 <= self.s_last {
            (self.s0, self.s_last)
        } else {
            (self.s_last, self.s0)
        }
    }

    /// Dense-output evaluation anywhere on the covered span.
    pub fn eval(&self, s: f64) -> Result<Vec<f64>> {
        let (lo, hi) = self.s_span();
        if !(lo - 1e-9..=hi + 1e-9).contains(&s) {
            return Err(Error::OutsideDomain { s, lo, hi });
        }
        if self.steps.is_empty() {
            return Ok(self.y0.clone());
        }
        // Steps are ordered in integration direction; binary search on s0.
        let forward = self.steps[0].h > 0.0;
        let idx = self
            .steps
            .partition_point(|st| if forward { st.s1() < s } else { st.s1() > s })
            .min(self.steps.len() - 1);
        Ok(self.steps[idx].eval(s))
    }

    /// All solutions of g(s, y(s)) = 0, located by sign changes at step
    /// endpoints followed by bisection on the dense interpolant.
    pub fn crossings<G: Fn(f64, &[f64]) -> f64>(&self, g: &G) -> Vec<f64> {
        let mut out = Vec::new();
        let mut ga = g(self.s0, &self.y0);
        for step in &self.steps {
            let sb = step.s1();
            let gb = g(sb, &step.eval(sb));
            if ga == 0.0 {
                out.push(step.s0);
            } else if ga.signum() != gb.signum() && gb != 0.0 {
                out.push(bisect_on_step(step, g, step.s0, sb));
            }
            ga = gb;
        }
        if ga == 0.0 {
            out.push(self.s_last);
        }
        out
    }
}

fn bisect_on_step<G: Fn(f64, &[f64]) -> f64>(step: &DenseStep, g: &G, mut a: f64, mut b: f64) -> f64 {
    let mut ga = g(a, &step.eval(a));
    for _ in 0..100 {
        let m = 0.5 * (a + b);
        if m == a || m == b {
            break;
        }
        let gm = g(m, &step.eval(m));
        if gm == 0.0 {
            return m;
        }
        if ga.signum() == gm.signum() {
            a = m;
            ga = gm;
        } else {
            b = m;
        }
    }
    0.5 * (a + b)
}

fn wrms(err: &[f64], y0: &[f64], y1: &[f64], atol: f64, rtol: f64) -> f64 {
    let n = err.len() as f64;
    let sum: f64 = err
        .iter()
        .enumerate()
        .map(|(i, e)| {
            let sc = atol + rtol * y0[i].abs().max(y1[i].abs());
            (e / sc) * (e / sc)
        })
        .sum();
    (sum / n).sqrt()
}

/// Integrates y' = rhs(s, y) from s0 to s_end. The solve stops early at
/// the first sign change of any event function, refined on the dense
/// interpolant to ~1e-13 in s.
pub fn integrate<F, G>(
    rhs: F,
    s0: f64,
    y0: &[f64],
    s_end: f64,
    opts: &OdeOpts,
    events: &[G],
) -> Result<OdeSolution>
where
    F: Fn(f64, &[f64]) -> Result<Vec<f64>>,
    G: Fn(f64, &[f64]) -> f64,
{
    integrate_projected(rhs, s0, y0, s_end, opts, events, |_s: f64, _y: &mut [f64]| false)
}

/// `integrate` with a post-step projector: after each accepted step the
/// endpoint may be nudged back onto an invariant manifold (the
/// projector returns whether it moved the state). The dense interpolant
/// targets the projected endpoint and the next step restarts from a
/// fresh slope there, so the displacement, on the order of the local
/// error, never accumulates into secular drift of the invariant.
pub fn integrate_projected<F, G, P>(
    rhs: F,
    s0: f64,
    y0: &[f64],
    s_end: f64,
    opts: &OdeOpts,
    events: &[G],
    project: P,
) -> Result<OdeSolution>
where
    F: Fn(f64, &[f64]) -> Result<Vec<f64>>,
    G: Fn(f64, &[f64]) -> f64,
    P: Fn(f64, &mut [f64]) -> bool,
{
    let dim = y0.len();
    let dir = (s_end - s0).signum();
    let mut sol = OdeSolution {
        steps: Vec::new(),
        s0,
        y0: y0.to_vec(),
        s_last: s0,
        y_last: y0.to_vec(),
        status: OdeStatus::ReachedEnd,
        n_accepted: 0,
        n_rejected: 0,
    };
    if s_end == s0 || dir == 0.0 {
        return Ok(sol);
    }

    let mut s = s0;
    let mut y = y0.to_vec();
    let mut k1 = rhs(s, &y)?;
    let mut g_prev: Vec<f64> = events.iter().map(|g| g(s, &y)).collect();

    let span = (s_end - s0).abs();
    let mut h = match opts.h0 {
        Some(h0) => h0.abs().min(span).min(opts.h_max) * dir,
        None => {
            let slope = k1.iter().map(|v| v.abs()).fold(0.0f64, f64::max).max(1e-8);
            (1e-2 / slope).min(span * 0.1).min(opts.h_max).max(1e-10) * dir
        }
    };

    const SAFE: f64 = 0.9;
    const BETA: f64 = 0.04;
    const EXPO1: f64 = 0.2 - BETA * 0.75;
    const FACC1: f64 = 5.0; // max step increase
    const FACC2: f64 = 0.1; // max step decrease
    let mut facold = 1e-4f64;

    let mut ks: [Vec<f64>; 7] = [
        k1.clone(),
        vec![0.0; dim],
        vec![0.0; dim],
        vec![0.0; dim],
        vec![0.0; dim],
        vec![0.0; dim],
        vec![0.0; dim],
    ];

    for _ in 0..opts.max_steps {
        let remaining = s_end - s;
        if remaining * dir <= 1e-14 * span.max(1.0) {
            sol.status = OdeStatus::ReachedEnd;
            sol.s_last = s;
            sol.y_last = y;
            return Ok(sol);
        }
        if (h / remaining) > 1.0 || remaining.abs() < h.abs() {
            h = remaining;
        }

        ks[0] = k1.clone();
        // A stage probe outside the rhs domain (event boundaries are
        // located only after a full step) rejects the step instead of
        // aborting the solve.
        let mut stage_failed = false;
        for stage in 1..7 {
            let mut ys = y.clone();
            for (j, kj) in ks.iter().enumerate().take(stage) {
                let a = A[stage - 1][j];
                if a != 0.0 {
                    for i in 0..dim {
                        ys[i] += h * a * kj[i];
                    }
                }
            }
            match rhs(s + C[stage] * h, &ys) {
                Ok(k) => ks[stage] = k,
                Err(_) => {
                    stage_failed = true;
                    break;
                }
            }
        }
        if stage_failed {
            sol.n_rejected += 1;
            h *= 0.5;
            if h.abs() < 1e-14 * s.abs().max(1.0) {
                return Err(Error::Integration(format!(
                    "step size collapsed at s = {s} (right-hand side left its domain)"
                )));
            }
            continue;
        }
        // Stage 7 used y1 (FSAL): ys at stage 6 is already the candidate y1.
        let mut y1 = y.clone();
        for (j, kj) in ks.iter().enumerate().take(6) {
            if B5[j] != 0.0 {
                for i in 0..dim {
                    y1[i] += h * B5[j] * kj[i];
                }
            }
        }
        let mut err_vec = vec![0.0; dim];
        for (j, kj) in ks.iter().enumerate() {
            if E[j] != 0.0 {
                for i in 0..dim {
                    err_vec[i] += h * E[j] * kj[i];
                }
            }
        }
        let err = wrms(&err_vec, &y, &y1, opts.atol, opts.rtol);

        let fac11 = err.powf(EXPO1);
        if err <= 1.0 {
            // Accept; build the dense interpolant.
            let fac = (fac11 / facold.powf(BETA) / SAFE).clamp(1.0 / FACC1, 1.0 / FACC2);
            facold = err.max(1e-4);
            let moved = project(s + h, &mut y1);
            let dy: Vec<f64> = (0..dim).map(|i| y1[i] - y[i]).collect();
            let rcont = [
                y.clone(),
                dy.clone(),
                (0..dim).map(|i| h * ks[0][i] - dy[i]).collect::<Vec<f64>>(),
                (0..dim)
                    .map(|i| dy[i] - h * ks[6][i] - (h * ks[0][i] - dy[i]))
                    .collect::<Vec<f64>>(),
                (0..dim)
                    .map(|i| h * (0..7).map(|j| D[j] * ks[j][i]).sum::<f64>())
                    .collect::<Vec<f64>>(),
            ];
            let step = DenseStep { s0: s, h, rcont };

            // Event check on the fresh step.
            let s_next = s + h;
            let y_next = y1.clone();
            let g_next: Vec<f64> = events.iter().map(|g| g(s_next, &y_next)).collect();
            for (idx, (ga, gb)) in g_prev.iter().zip(&g_next).enumerate() {
                if ga.signum() != gb.signum() && *ga != 0.0 {
                    let ev = |ss: f64, yy: &[f64]| events[idx](ss, yy);
                    let s_hit = bisect_on_step(&step, &ev, s, s_next);
                    let y_hit = step.eval(s_hit);
                    sol.steps.push(step);
                    sol.s_last = s_hit;
                    sol.y_last = y_hit;
                    sol.status = OdeStatus::Event { index: idx, s: s_hit };
                    sol.n_accepted += 1;
                    return Ok(sol);
                }
            }

            sol.steps.push(step);
            sol.n_accepted += 1;
            s = s_next;
            y = y_next;
            k1 = if moved { rhs(s, &y)? } else { ks[6].clone() };
            g_prev = g_next;

            h = (h / fac).clamp(-opts.h_max, opts.h_max);
            if h == 0.0 {
                return Err(Error::Integration("step size underflow".into()));
            }
        } else {
            sol.n_rejected += 1;
            h /= (fac11 / SAFE).min(FACC1);
            if h.abs() < 1e-14 * s.abs().max(1.0) {
                return Err(Error::Integration(format!(
                    "step size collapsed at s = {s} (error ratio {err:.3e})"
                )));
            }
        }
    }
    sol.status = OdeStatus::MaxSteps;
    sol.s_last = s;
    sol.y_last = y;
    Ok(sol)
}
