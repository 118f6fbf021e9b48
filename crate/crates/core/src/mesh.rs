//! Discretization and file output: sphere-swept meshes of the immersion
//! (n = 3), point tables for any n, PLY/CSV writers, and marching-squares
//! contour data for the phase plane.

use std::collections::HashMap;
use std::f64::consts::{FRAC_PI_2, PI};
use std::fmt::Write as _;
use std::io::Write as _;
use std::path::Path;

use crate::error::{Error, Result};
use crate::foliation::{eval_immersion, lagrangian_angle};
use crate::geom::SphereDirection;
use crate::hs::{self, HsParams};
use crate::profile::FoliatedSpec;
use crate::sample;

/// Triangle area below this is treated as degenerate and dropped.
const AREA_FLOOR: f64 = 1e-14;

/// Vertex soup with optional triangulation. Every vertex row is the
/// 2n-real immersion point, with its parameter s and Lagrangian angle
/// beta stored alongside.
#[derive(Clone, Debug, Default)]
pub struct Mesh {
    pub n: usize,
    pub vertices: Vec<Vec<f64>>,
    pub faces: Vec<[usize; 3]>,
    pub s: Vec<f64>,
    pub beta: Vec<f64>,
}

impl Mesh {
    pub fn vertex_count(&self) -> usize {
        self.vertices.len()
    }

    /// Face indices in range and no near-zero-area triangles.
    pub fn validate(&self) -> Result<()> {
        let count = self.vertices.len();
        if self.s.len() != count || self.beta.len() != count {
            return Err(Error::Config("attribute arrays out of step with vertices".into()));
        }
        for f in &self.faces {
            if f.iter().any(|&i| i >= count) {
                return Err(Error::Config(format!("face {f:?} indexes past {count} vertices")));
            }
            if triangle_area(&self.vertices[f[0]], &self.vertices[f[1]], &self.vertices[f[2]])
                <= AREA_FLOOR
            {
                return Err(Error::Config(format!("face {f:?} is degenerate")));
            }
        }
        Ok(())
    }
}

fn triangle_area(a: &[f64], b: &[f64], c: &[f64]) -> f64 {
    let mut uu = 0.0;
    let mut vv = 0.0;
    let mut uv = 0.0;
    for i in 0..a.len() {
        let u = b[i] - a[i];
        let v = c[i] - a[i];
        uu += u * u;
        vv += v * v;
        uv += u * v;
    }
    0.5 * (uu * vv - uv * uv).max(0.0).sqrt()
}

/// Evenly spaced s values over the curve domain, inset far enough from
/// the endpoints to stay strictly inside. A symmetric domain keeps
/// s = 0 on every odd-count grid.
fn s_grid(spec: &FoliatedSpec, s_steps: usize) -> Vec<f64> {
    let (lo, hi) = spec.curve().domain();
    let inset = 1e-9 * (hi - lo).max(1.0);
    let (a, b) = (lo + inset, hi - inset);
    if s_steps == 1 {
        return vec![0.5 * (a + b)];
    }
    (0..s_steps).map(|i| a + (b - a) * i as f64 / (s_steps - 1) as f64).collect()
}

/// UV grid on S^2: poles plus sphere_steps azimuths on sphere_steps - 1
/// latitude rings.
fn sphere_grid(sphere_steps: usize) -> Vec<SphereDirection> {
    let m = sphere_steps;
    let mut dirs = Vec::with_capacity(m * (m - 1) + 2);
    dirs.push(SphereDirection::new(vec![0.0, 0.0, 1.0]).unwrap());
    for i in 1..m {
        let theta = PI * i as f64 / m as f64;
        let (st, ct) = theta.sin_cos();
        for j in 0..m {
            let psi = 2.0 * PI * j as f64 / m as f64;
            let (sp, cp) = psi.sin_cos();
            dirs.push(SphereDirection::normalized(vec![st * cp, st * sp, ct]).unwrap());
        }
    }
    dirs.push(SphereDirection::new(vec![0.0, 0.0, -1.0]).unwrap());
    dirs
}

/// Triangulates one spherical shell laid out as by `sphere_grid`,
/// offsetting all indices by `base`.
fn shell_faces(sphere_steps: usize, base: usize, out: &mut Vec<[usize; 3]>) {
    let m = sphere_steps;
    let ring = |i: usize, j: usize| base + 1 + (i - 1) * m + (j % m);
    let south = base + 1 + (m - 1) * m;
    for j in 0..m {
        out.push([base, ring(1, j), ring(1, j + 1)]);
    }
    for i in 1..m - 1 {
        for j in 0..m {
            let (a, b) = (ring(i, j), ring(i, j + 1));
            let (c, d) = (ring(i + 1, j + 1), ring(i + 1, j));
            out.push([a, b, c]);
            out.push([a, c, d]);
        }
    }
    for j in 0..m {
        out.push([south, ring(m - 1, j + 1), ring(m - 1, j)]);
    }
}

/// Sweeps a UV sphere grid along s_steps parameter values and
/// triangulates each shell. Vertices go through the same immersion
/// evaluation as point queries; near-degenerate triangles are dropped.
pub fn sample_mesh(spec: &FoliatedSpec, s_steps: usize, sphere_steps: usize) -> Result<Mesh> {
    if spec.n() != 3 {
        return Err(Error::Config(format!(
            "triangulated meshes need n = 3 leaves (got n = {}); export a point table instead",
            spec.n()
        )));
    }
    if s_steps == 0 || sphere_steps < 3 {
        return Err(Error::Config(
            "mesh sampling needs s_steps >= 1 and sphere_steps >= 3".into(),
        ));
    }
    let dirs = sphere_grid(sphere_steps);
    let mut mesh = Mesh { n: 3, ..Default::default() };
    let mut faces = Vec::new();
    for (shell, s) in s_grid(spec, s_steps).into_iter().enumerate() {
        let base = shell * dirs.len();
        for x in &dirs {
            let p = eval_immersion(spec, s, x)?;
            let mut row = Vec::with_capacity(6);
            row.extend_from_slice(&p.re);
            row.extend_from_slice(&p.im);
            mesh.vertices.push(row);
            mesh.s.push(s);
            mesh.beta.push(lagrangian_angle(spec, s, x)?);
        }
        shell_faces(sphere_steps, base, &mut faces);
    }
    mesh.faces = faces
        .into_iter()
        .filter(|f| {
            triangle_area(&mesh.vertices[f[0]], &mesh.vertices[f[1]], &mesh.vertices[f[2]])
                > AREA_FLOOR
        })
        .collect();
    Ok(mesh)
}

/// Point-table sampling for any n: `per_s` seeded random directions at
/// each of `s_steps` parameter values, no faces.
pub fn point_table(spec: &FoliatedSpec, s_steps: usize, per_s: usize, seed: u64) -> Result<Mesh> {
    if s_steps == 0 || per_s == 0 {
        return Err(Error::Config("point table needs s_steps >= 1 and per_s >= 1".into()));
    }
    let n = spec.n();
    let mut rng = sample::rng(seed);
    let mut mesh = Mesh { n, ..Default::default() };
    for s in s_grid(spec, s_steps) {
        for _ in 0..per_s {
            let x = sample::sphere_point(&mut rng, n);
            let p = eval_immersion(spec, s, &x)?;
            let mut row = Vec::with_capacity(2 * n);
            row.extend_from_slice(&p.re);
            row.extend_from_slice(&p.im);
            mesh.vertices.push(row);
            mesh.s.push(s);
            mesh.beta.push(lagrangian_angle(spec, s, &x)?);
        }
    }
    Ok(mesh)
}

/// 17-significant-digit decimal: the shortest form guaranteed to
/// round-trip any finite f64.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MeshFormat {
    PlyAscii,
    Csv,
}

impl std::str::FromStr for MeshFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "ply_ascii" | "ply" => Ok(MeshFormat::PlyAscii),
            "csv" => Ok(MeshFormat::Csv),
            other => Err(Error::Config(format!(
                "unknown mesh format {other:?}; use ply_ascii or csv"
            ))),
        }
    }
}

fn io_ctx(path: &Path, err: std::io::Error) -> Error {
    Error::Io(std::io::Error::new(err.kind(), format!("{}: {err}", path.display())))
}

pub fn write_mesh(mesh: &Mesh, path: &Path, format: MeshFormat) -> Result<()> {
    let body = render_mesh(mesh, format);
    let mut file = std::fs::File::create(path).map_err(|e| io_ctx(path, e))?;
    file.write_all(body.as_bytes()).map_err(|e| io_ctx(path, e))?;
    Ok(())
}

pub fn render_mesh(mesh: &Mesh, format: MeshFormat) -> String {
    match format {
        MeshFormat::PlyAscii => render_ply(mesh),
        MeshFormat::Csv => render_csv(mesh),
    }
}

fn render_ply(mesh: &Mesh) -> String {
    let mut out = String::new();
    out.push_str("ply\nformat ascii 1.0\n");
    let _ = writeln!(out, "element vertex {}", mesh.vertices.len());
    for i in 1..=2 * mesh.n {
        let _ = writeln!(out, "property float64 x{i}");
    }
    out.push_str("property float64 s\nproperty float64 beta\n");
    let _ = writeln!(out, "element face {}", mesh.faces.len());
    out.push_str("property list uchar int vertex_indices\nend_header\n");
    for (i, row) in mesh.vertices.iter().enumerate() {
        for v in row {
            out.push_str(&fmt_f64(*v));
            out.push(' ');
        }
        out.push_str(&fmt_f64(mesh.s[i]));
        out.push(' ');
        out.push_str(&fmt_f64(mesh.beta[i]));
        out.push('\n');
    }
    for f in &mesh.faces {
        let _ = writeln!(out, "3 {} {} {}", f[0], f[1], f[2]);
    }
    out
}

fn render_csv(mesh: &Mesh) -> String {
    let mut out = String::new();
    for i in 1..=2 * mesh.n {
        let _ = write!(out, "x{i},");
    }
    out.push_str("s,beta\n");
    for (i, row) in mesh.vertices.iter().enumerate() {
        for v in row {
            out.push_str(&fmt_f64(*v));
            out.push(',');
        }
        out.push_str(&fmt_f64(mesh.s[i]));
        out.push(',');
        out.push_str(&fmt_f64(mesh.beta[i]));
        out.push('\n');
    }
    out
}

/// CSV sample table of a profile curve: evenly spaced s against the
/// polar data and curvature.
pub fn render_curve_csv(curve: &crate::profile::ProfileCurve, count: usize) -> Result<String> {
    if count == 0 {
        return Err(Error::Config("curve table needs count >= 1".into()));
    }
    let (lo, hi) = curve.domain();
    let inset = 1e-9 * (hi - lo).max(1.0);
    let (a, b) = (lo + inset, hi - inset);
    let mut out = String::from("s,r,phi,alpha,k\n");
    for i in 0..count {
        let s = if count == 1 {
            0.5 * (a + b)
        } else {
            a + (b - a) * i as f64 / (count - 1) as f64
        };
        let p = curve.eval(s)?;
        let alpha = p.sin_alpha.atan2(p.cos_alpha);
        for v in [s, p.r, p.phi, alpha, p.k] {
            out.push_str(&fmt_f64(v));
            out.push(',');
        }
        out.pop();
        out.push('\n');
    }
    Ok(out)
}

/// Reads back a vertex CSV written by `write_mesh` (faces are not part
/// of the CSV form).
pub fn read_mesh_csv(path: &Path) -> Result<Mesh> {
    let text = std::fs::read_to_string(path).map_err(|e| io_ctx(path, e))?;
    let mut lines = text.lines();
    let header = lines
        .next()
        .ok_or_else(|| Error::Config(format!("{}: empty CSV", path.display())))?;
    let cols = header.split(',').count();
    if cols < 4 || (cols - 2) % 2 != 0 {
        return Err(Error::Config(format!("{}: malformed CSV header", path.display())));
    }
    let n = (cols - 2) / 2;
    let mut mesh = Mesh { n, ..Default::default() };
    for (ln, line) in lines.enumerate() {
        if line.is_empty() {
            continue;
        }
        let mut vals = Vec::with_capacity(cols);
        for tok in line.split(',') {
            vals.push(tok.parse::<f64>().map_err(|e| {
                Error::Config(format!("{}: line {}: {e}", path.display(), ln + 2))
            })?);
        }
        if vals.len() != cols {
            return Err(Error::Config(format!(
                "{}: line {} has {} fields, expected {cols}",
                path.display(),
                ln + 2,
                vals.len()
            )));
        }
        mesh.beta.push(vals.pop().unwrap());
        mesh.s.push(vals.pop().unwrap());
        mesh.vertices.push(vals);
    }
    Ok(mesh)
}

/// Rectangular (alpha, r) grid symmetric about alpha = pi/2, so the
/// phase plane's mirror symmetry is exact on the node set: node i sits
/// at pi/2 + (i - alpha_steps/2) h, and sin(alpha) is computed once per
/// absolute offset.
#[derive(Clone, Copy, Debug)]
pub struct PortraitGrid {
    pub alpha_half_span: f64,
    pub r_range: (f64, f64),
    /// Number of cells per axis; alpha_steps is rounded up to even.
    pub alpha_steps: usize,
    pub r_steps: usize,
}

impl PortraitGrid {
    /// Window covering the fixed point, the dip branch, and the
    /// inflection locus: alpha in [pi/2 - pi, pi/2 + pi], r up to 3 r_bar.
    pub fn standard(params: &HsParams) -> Result<Self> {
        let (fp, _) = hs::fixed_points(params)?;
        Ok(Self {
            alpha_half_span: PI,
            r_range: (0.05 * fp.r, 3.0 * fp.r),
            alpha_steps: 256,
            r_steps: 256,
        })
    }
}

/// One energy level's contour polylines.
#[derive(Clone, Debug)]
pub struct LevelSet {
    pub e: f64,
    pub polylines: Vec<Vec<[f64; 2]>>,
}

#[derive(Clone, Debug)]
pub struct PhasePortrait {
    pub levels: Vec<LevelSet>,
    /// Fixed points inside the window.
    pub fixed_points: Vec<[f64; 2]>,
}

/// Marching-squares contours of the first integral over the grid for
/// each requested level; E0 and 0 are always included.
pub fn phase_portrait_data(
    params: &HsParams,
    e_levels: &[f64],
    grid: &PortraitGrid,
) -> Result<PhasePortrait> {
    if params.c() <= 0.0 {
        return Err(Error::Config("phase portraits need a positive flux constant".into()));
    }
    let (fp, e0) = hs::fixed_points(params)?;
    let na = grid.alpha_steps.max(2).next_multiple_of(2);
    let nr = grid.r_steps.max(2);
    let (r_lo, r_hi) = grid.r_range;
    if !(r_lo > 0.0 && r_hi > r_lo) {
        return Err(Error::Config(format!("bad radius window [{r_lo}, {r_hi}]")));
    }
    let ha = grid.alpha_half_span / (na / 2) as f64;
    let hr = (r_hi - r_lo) / nr as f64;
    let half = (na / 2) as i64;
    // alpha nodes and a sine table keyed by |offset| so mirrored nodes
    // carry bit-identical field values.
    let alphas: Vec<f64> =
        (0..=na as i64).map(|i| FRAC_PI_2 + (i - half) as f64 * ha).collect();
    let sines: Vec<f64> = (0..=na as i64)
        .map(|i| {
            let d = (i - half).unsigned_abs() as f64;
            (FRAC_PI_2 + d * ha).sin()
        })
        .collect();
    let rs: Vec<f64> = (0..=nr).map(|j| r_lo + j as f64 * hr).collect();
    let n = params.n() as i32;
    let c = params.c();

    let mut wanted: Vec<f64> = vec![e0, 0.0];
    for &e in e_levels {
        if wanted.iter().all(|w| (w - e).abs() > 1e-12 * e.abs().max(1.0)) {
            wanted.push(e);
        }
    }

    let mut field = vec![vec![0.0f64; nr + 1]; na + 1];
    for (i, col) in field.iter_mut().enumerate() {
        for (j, cell) in col.iter_mut().enumerate() {
            let r = rs[j];
            *cell = 2.0 * r.powi(n) * sines[i] - c * r * r;
        }
    }

    let mut levels = Vec::with_capacity(wanted.len());
    for e in wanted {
        let mut segments: Vec<([f64; 2], [f64; 2])> = Vec::new();
        for i in 0..na {
            for j in 0..nr {
                cell_segments(
                    e,
                    [alphas[i], alphas[i + 1]],
                    [rs[j], rs[j + 1]],
                    [field[i][j], field[i + 1][j], field[i + 1][j + 1], field[i][j + 1]],
                    &mut segments,
                );
            }
        }
        levels.push(LevelSet { e, polylines: stitch(segments) });
    }

    let mut fixed_points = Vec::new();
    let mut k = 0i64;
    loop {
        let offsets: &[f64] =
            if k == 0 { &[0.0] } else { &[-(k as f64) * 2.0 * PI, k as f64 * 2.0 * PI] };
        let mut any = false;
        for off in offsets {
            if off.abs() <= grid.alpha_half_span && fp.r >= r_lo && fp.r <= r_hi {
                fixed_points.push([FRAC_PI_2 + off, fp.r]);
                any = true;
            }
        }
        if !any {
            break;
        }
        k += 1;
    }
    fixed_points.sort_by(|a, b| a[0].total_cmp(&b[0]));

    Ok(PhasePortrait { levels, fixed_points })
}

/// Emits the contour segments of one grid cell. Corners are ordered
/// (lo,lo), (hi,lo), (hi,hi), (lo,hi) in (alpha, r).
fn cell_segments(
    e: f64,
    a: [f64; 2],
    r: [f64; 2],
    f: [f64; 4],
    out: &mut Vec<([f64; 2], [f64; 2])>,
) {
    let v = [f[0] - e, f[1] - e, f[2] - e, f[3] - e];
    let inside = |x: f64| x >= 0.0;
    let code = (inside(v[0]) as usize)
        | (inside(v[1]) as usize) << 1
        | (inside(v[2]) as usize) << 2
        | (inside(v[3]) as usize) << 3;
    if code == 0 || code == 15 {
        return;
    }
    // Zero crossings on the four edges: bottom, right, top, left.
    let lerp = |p: f64, q: f64, fp_: f64, fq: f64| p + (q - p) * (fp_ / (fp_ - fq));
    let bottom = || [lerp(a[0], a[1], v[0], v[1]), r[0]];
    let right = || [a[1], lerp(r[0], r[1], v[1], v[2])];
    let top = || [lerp(a[0], a[1], v[3], v[2]), r[1]];
    let left = || [a[0], lerp(r[0], r[1], v[0], v[3])];
    let mut push = |p: [f64; 2], q: [f64; 2]| {
        if p != q {
            out.push((p, q));
        }
    };
    match code {
        1 | 14 => push(left(), bottom()),
        2 | 13 => push(bottom(), right()),
        3 | 12 => push(left(), right()),
        4 | 11 => push(right(), top()),
        6 | 9 => push(bottom(), top()),
        7 | 8 => push(left(), top()),
        5 | 10 => {
            // Saddle cell: split by the center sign.
            let center = 0.25 * (v[0] + v[1] + v[2] + v[3]);
            let flip = (code == 5) == (center >= 0.0);
            if flip {
                push(left(), bottom());
                push(right(), top());
            } else {
                push(left(), top());
                push(bottom(), right());
            }
        }
        _ => unreachable!(),
    }
}

/// Chains shared-endpoint segments into polylines. Endpoints on a
/// common cell edge are computed from the same corner values, so exact
/// bit equality is the join criterion.
fn stitch(segments: Vec<([f64; 2], [f64; 2])>) -> Vec<Vec<[f64; 2]>> {
    let key = |p: [f64; 2]| (p[0].to_bits(), p[1].to_bits());
    let mut at: HashMap<(u64, u64), Vec<usize>> = HashMap::new();
    for (idx, (p, q)) in segments.iter().enumerate() {
        at.entry(key(*p)).or_default().push(idx);
        at.entry(key(*q)).or_default().push(idx);
    }
    let mut used = vec![false; segments.len()];
    let mut out = Vec::new();
    for start in 0..segments.len() {
        if used[start] {
            continue;
        }
        used[start] = true;
        let (p, q) = segments[start];
        let mut chain = vec![p, q];
        // Chase forward from the tail, then backward from the head.
        for _pass in 0..2 {
            loop {
                let tail = *chain.last().unwrap();
                let next = at
                    .get(&key(tail))
                    .and_then(|ids| ids.iter().copied().find(|&i| !used[i]));
                let Some(i) = next else { break };
                used[i] = true;
                let (u, w) = segments[i];
                chain.push(if key(u) == key(tail) { w } else { u });
            }
            chain.reverse();
        }
        out.push(chain);
    }
    out
}
