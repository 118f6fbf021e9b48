//! Implementations of the six subcommands. Each returns rendered text
//! plus a process exit code; the caller handles output routing.

use std::f64::consts::FRAC_PI_4;
use std::fmt::Write as _;

use spherelag::error::{Error, Result};
use spherelag::foliation::{self, CurvatureData};
use spherelag::geom::SphereDirection;
use spherelag::hs::{self, HsParams, HsState};
use spherelag::mesh::{self, fmt_f64, PortraitGrid};
use spherelag::phase::{self, CatalogEntry, CatalogInput};
use spherelag::report;
use spherelag::roots;

use crate::config::RunConfig;

pub struct CmdOutput {
    pub text: String,
    pub code: i32,
}

impl CmdOutput {
    fn ok(text: String) -> Self {
        Self { text, code: 0 }
    }
}

fn need<T: Copy>(v: Option<T>, flag: &str) -> Result<T> {
    v.ok_or_else(|| Error::Config(format!("missing required --{flag}")))
}

fn float_or_nan(v: Option<f64>) -> String {
    match v {
        Some(x) => fmt_f64(x),
        None => "nan".into(),
    }
}

pub fn eval(cfg: &RunConfig) -> Result<CmdOutput> {
    let spec = cfg.build_spec()?;
    let s = need(cfg.s, "s")?;
    let coords = cfg.x.clone().ok_or_else(|| Error::Config("missing required --x".into()))?;
    if coords.len() != spec.n() {
        return Err(Error::DimensionMismatch { expected: spec.n(), got: coords.len() });
    }
    let x = SphereDirection::normalized(coords)?;

    let l = foliation::eval_immersion(&spec, s, &x)?;
    let beta = foliation::lagrangian_angle(&spec, s, &x)?;
    let data = CurvatureData::at(&spec, s, &x)?;

    let join = |vals: &[f64]| vals.iter().map(|v| fmt_f64(*v)).collect::<Vec<_>>().join(",");
    let mut out = String::new();
    let _ = writeln!(out, "n = {}", spec.n());
    let _ = writeln!(out, "s = {}", fmt_f64(s));
    let _ = writeln!(out, "x = {}", join(x.coords()));
    let _ = writeln!(out, "l_re = {}", join(&l.re));
    let _ = writeln!(out, "l_im = {}", join(&l.im));
    let _ = writeln!(out, "beta = {}", fmt_f64(beta));
    let _ = writeln!(out, "a = {}", fmt_f64(data.a));
    let _ = writeln!(out, "a_j = {}", join(&data.aj));
    let _ = writeln!(out, "f = {}", fmt_f64(data.f));
    Ok(CmdOutput::ok(out))
}

pub fn verify(cfg: &RunConfig) -> Result<CmdOutput> {
    let spec = cfg.build_spec()?;
    log::info!("verifying preset over {} sample sites, seed {}", cfg.count, cfg.seed);
    let report = report::verify_spec(&spec, cfg.seed, cfg.count)?;
    let code = if report.pass { 0 } else { 2 };
    Ok(CmdOutput { text: report.to_json() + "\n", code })
}

pub fn hs_solve(cfg: &RunConfig) -> Result<CmdOutput> {
    let params = HsParams::new(need(cfg.n, "n")?, need(cfg.c, "C")?)?;
    let alpha0 = need(cfg.alpha0, "alpha0")?;
    let r0 = need(cfg.r0, "r0")?;
    if r0 <= 0.0 {
        return Err(Error::NonPositiveRadius(r0));
    }
    let init = HsState::new(alpha0, r0);
    let traj = hs::integrate_bounded(
        &params,
        init,
        (0.0, cfg.smax),
        cfg.tol,
        hs::R_FLOOR,
        hs::R_CAP,
    )?;
    log::info!(
        "integrated to s = {} ({} grid points), energy drift {:.3e}",
        traj.s_end(),
        traj.grid().len(),
        traj.energy_drift()
    );

    let mut out = String::from("s,alpha,r,E,k\n");
    for (s, state) in traj.grid() {
        let e = hs::energy(state, &params);
        let k = hs::curvature(state, &params)?;
        let _ = writeln!(
            out,
            "{},{},{},{},{}",
            fmt_f64(s),
            fmt_f64(state.alpha),
            fmt_f64(state.r),
            fmt_f64(e),
            fmt_f64(k)
        );
    }
    Ok(CmdOutput::ok(out))
}

fn entry_row(out: &mut String, e: f64, entry: &CatalogEntry) {
    let (plus, minus) = match entry.phi.pieces {
        Some((p, m)) => (Some(p), Some(m)),
        None => (None, None),
    };
    let _ = writeln!(
        out,
        "{},{},{},{},{},{},{}",
        fmt_f64(e),
        entry.family,
        float_or_nan(entry.phi.total()),
        float_or_nan(plus),
        float_or_nan(minus),
        u8::from(entry.phi.value.is_divergent()),
        entry.self_intersections.len()
    );
}

pub fn phase(cfg: &RunConfig) -> Result<CmdOutput> {
    let params = HsParams::new(need(cfg.n, "n")?, need(cfg.c, "C")?)?;
    if cfg.portrait {
        return portrait(cfg, &params);
    }
    let energies = match cfg.table {
        Some(t) => t.energies(),
        None => vec![need(cfg.e, "E")?],
    };
    let mut out = String::from(
        "E,class,phi_total,phi_plus,phi_minus,divergent_flag,self_intersections\n",
    );
    for e in energies {
        let entry = phase::classify_catalog(&params, CatalogInput::Energy(e))?;
        entry_row(&mut out, e, &entry);
    }
    Ok(CmdOutput::ok(out))
}

fn portrait(cfg: &RunConfig, params: &HsParams) -> Result<CmdOutput> {
    let grid = PortraitGrid::standard(params)?;
    let data = mesh::phase_portrait_data(params, &cfg.levels, &grid)?;
    let mut out = String::from("kind,e,polyline,alpha,r\n");
    for level in &data.levels {
        for (i, line) in level.polylines.iter().enumerate() {
            for pt in line {
                let _ = writeln!(
                    out,
                    "contour,{},{i},{},{}",
                    fmt_f64(level.e),
                    fmt_f64(pt[0]),
                    fmt_f64(pt[1])
                );
            }
        }
    }
    let (_, e0) = hs::fixed_points(params)?;
    for fp in &data.fixed_points {
        let _ = writeln!(
            out,
            "fixed_point,{},0,{},{}",
            fmt_f64(e0),
            fmt_f64(fp[0]),
            fmt_f64(fp[1])
        );
    }
    Ok(CmdOutput::ok(out))
}

pub fn mesh_cmd(cfg: &RunConfig) -> Result<CmdOutput> {
    let spec = cfg.build_spec()?;
    let mesh = match cfg.points {
        Some(per_s) => mesh::point_table(&spec, cfg.s_steps, per_s, cfg.seed)?,
        None => mesh::sample_mesh(&spec, cfg.s_steps, cfg.sphere_steps)?,
    };
    log::info!("sampled {} vertices, {} faces", mesh.vertex_count(), mesh.faces.len());
    Ok(CmdOutput::ok(mesh::render_mesh(&mesh, cfg.format)))
}

/// Critical-level state at alpha = pi/4: the first integral there reads
/// sqrt(2) r^n - C r^2 = E0, with one root on each side of r_bar.
fn critical_state(params: &HsParams, fp: HsState, e0: f64, outer: bool) -> Result<HsState> {
    let f = |r: f64| {
        2.0 * FRAC_PI_4.sin() * r.powi(params.n() as i32) - params.c() * r * r - e0
    };
    let tol = 1e-15 * fp.r.max(1.0);
    let r = if outer {
        let mut hi = 2.0 * fp.r;
        while f(hi) <= 0.0 {
            hi *= 2.0;
            if hi > 1e9 {
                return Err(Error::RootFinding("no outer critical radius".into()));
            }
        }
        roots::brent(&f, fp.r, hi, tol, 200)?
    } else {
        roots::brent(&f, 1e-9 * fp.r, fp.r, tol, 200)?
    };
    Ok(HsState::new(FRAC_PI_4, r))
}

pub fn catalog(cfg: &RunConfig) -> Result<CmdOutput> {
    let params = HsParams::new(need(cfg.n, "n")?, need(cfg.c, "C")?)?;
    if params.c() == 0.0 {
        return Err(Error::Config(
            "field C: the family sweep needs a nonzero flux constant".into(),
        ));
    }
    let (fp, e0) = hs::fixed_points(&params)?;
    let inputs = [
        ("energy", CatalogInput::Energy(e0)),
        ("state", CatalogInput::State(critical_state(&params, fp, e0, false)?)),
        ("state", CatalogInput::State(critical_state(&params, fp, e0, true)?)),
        ("energy", CatalogInput::Energy(4.0 * e0.abs().max(1.0))),
        ("energy", CatalogInput::Energy(0.5 * e0)),
    ];

    let mut out = String::from(
        "family,input,E,phi_total,phi_plus,phi_minus,divergent_flag,embedded,\
         self_intersections,closure\n",
    );
    for (kind, input) in inputs {
        let e = match input {
            CatalogInput::Energy(e) => e,
            CatalogInput::State(st) => hs::energy(st, &params),
        };
        log::info!("classifying {kind} input at E = {e}");
        let entry = phase::classify_catalog(&params, input)?;
        let (plus, minus) = match entry.phi.pieces {
            Some((p, m)) => (Some(p), Some(m)),
            None => (None, None),
        };
        let closure = match &entry.closure {
            Some(c) => format!("{}/{}", c.windings, c.turns),
            None => "none".into(),
        };
        let _ = writeln!(
            out,
            "{},{kind},{},{},{},{},{},{},{},{closure}",
            entry.family,
            fmt_f64(e),
            float_or_nan(entry.phi.total()),
            float_or_nan(plus),
            float_or_nan(minus),
            u8::from(entry.phi.value.is_divergent()),
            entry.embedded,
            entry.self_intersections.len()
        );
    }
    Ok(CmdOutput::ok(out))
}
