//! Named verification checks with tolerances and witnesses,
//! serialized as deterministic JSON (17-significant-digit floats, so
//! identical inputs produce identical bytes).

use serde::Serialize;

use crate::error::Result;
use crate::foliation::{self, CurvatureData};
use crate::oracle::{self, FdConfig, ResidualReport};
use crate::profile::FoliatedSpec;
use crate::sample::{self, Site};

/// Worst sample site of a check.
#[derive(Clone, Debug, Serialize)]
pub struct Witness {
    pub s: f64,
    pub x: Vec<f64>,
}

#[derive(Clone, Debug, Serialize)]
pub struct CheckReport {
    pub check: String,
    pub pass: bool,
    pub sup: f64,
    pub rms: f64,
    pub tol: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<Witness>,
}

impl CheckReport {
    pub fn from_residual(check: &str, rep: &ResidualReport, tol: f64) -> Self {
        Self {
            check: check.into(),
            pass: rep.sup_norm <= tol,
            sup: rep.sup_norm,
            rms: rep.rms,
            tol,
            witness: (!rep.witness_x.is_empty())
                .then(|| Witness { s: rep.witness_s, x: rep.witness_x.clone() }),
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct VerifyReport {
    pub pass: bool,
    pub checks: Vec<CheckReport>,
}

impl VerifyReport {
    pub fn new(checks: Vec<CheckReport>) -> Self {
        Self { pass: checks.iter().all(|c| c.pass), checks }
    }

    pub fn to_json(&self) -> String {
        to_json_string(self)
    }
}

/// serde_json pretty printing with every float written as `{:.16e}`
/// (non-finite values become null, which plain JSON requires).
struct FixedFloats {
    inner: serde_json::ser::PrettyFormatter<'static>,
}

impl serde_json::ser::Formatter for FixedFloats {
    fn write_f64<W: std::io::Write + ?Sized>(
        &mut self,
        writer: &mut W,
        value: f64,
    ) -> std::io::Result<()> {
        if value.is_finite() {
            write!(writer, "{value:.16e}")
        } else {
            writer.write_all(b"null")
        }
    }

    fn begin_array<W: std::io::Write + ?Sized>(&mut self, w: &mut W) -> std::io::Result<()> {
        serde_json::ser::Formatter::begin_array(&mut self.inner, w)
    }
    fn end_array<W: std::io::Write + ?Sized>(&mut self, w: &mut W) -> std::io::Result<()> {
        serde_json::ser::Formatter::end_array(&mut self.inner, w)
    }
    fn begin_array_value<W: std::io::Write + ?Sized>(
        &mut self,
        w: &mut W,
        first: bool,
    ) -> std::io::Result<()> {
        serde_json::ser::Formatter::begin_array_value(&mut self.inner, w, first)
    }
    fn end_array_value<W: std::io::Write + ?Sized>(&mut self, w: &mut W) -> std::io::Result<()> {
        serde_json::ser::Formatter::end_array_value(&mut self.inner, w)
    }
    fn begin_object<W: std::io::Write + ?Sized>(&mut self, w: &mut W) -> std::io::Result<()> {
        serde_json::ser::Formatter::begin_object(&mut self.inner, w)
    }
    fn end_object<W: std::io::Write + ?Sized>(&mut self, w: &mut W) -> std::io::Result<()> {
        serde_json::ser::Formatter::end_object(&mut self.inner, w)
    }
    fn begin_object_key<W: std::io::Write + ?Sized>(
        &mut self,
        w: &mut W,
        first: bool,
    ) -> std::io::Result<()> {
        serde_json::ser::Formatter::begin_object_key(&mut self.inner, w, first)
    }
    fn begin_object_value<W: std::io::Write + ?Sized>(
        &mut self,
        w: &mut W,
    ) -> std::io::Result<()> {
        serde_json::ser::Formatter::begin_object_value(&mut self.inner, w)
    }
    fn end_object_value<W: std::io::Write + ?Sized>(&mut self, w: &mut W) -> std::io::Result<()> {
        serde_json::ser::Formatter::end_object_value(&mut self.inner, w)
    }
}

/// Serializes any value to the deterministic JSON form.
pub fn to_json_string<T: Serialize>(value: &T) -> String {
    let fmt = FixedFloats { inner: serde_json::ser::PrettyFormatter::new() };
    let mut buf = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut buf, fmt);
    value.serialize(&mut ser).expect("in-memory JSON serialization");
    String::from_utf8(buf).expect("serde_json emits UTF-8")
}

/// Per-site defect fold mirroring the oracle residual summary.
struct Fold {
    sup: f64,
    sum_sq: f64,
    count: usize,
    witness: Option<Witness>,
}

impl Fold {
    fn new() -> Self {
        Self { sup: 0.0, sum_sq: 0.0, count: 0, witness: None }
    }

    fn record(&mut self, site: &Site, value: f64) {
        self.count += 1;
        self.sum_sq += value * value;
        if value >= self.sup || self.witness.is_none() {
            self.sup = self.sup.max(value);
            self.witness = Some(Witness { s: site.s, x: site.x.coords().to_vec() });
        }
    }

    fn finish(self, check: &str, tol: f64) -> CheckReport {
        CheckReport {
            check: check.into(),
            pass: self.sup <= tol,
            sup: self.sup,
            rms: (self.sum_sq / self.count.max(1) as f64).sqrt(),
            tol,
            witness: self.witness,
        }
    }
}

/// Sampled tolerances of the formula-vs-oracle suite.
pub const TOL_ISOTROPY: f64 = 1e-8;
pub const TOL_METRIC: f64 = 1e-6;
pub const TOL_FRAME: f64 = 1e-9;
pub const TOL_ANGLE: f64 = 1e-6;
pub const TOL_CURVATURE: f64 = 1e-4;
pub const TOL_LAPLACIAN: f64 = 1e-3;

/// Runs the full closed-form-vs-finite-difference suite on one spec:
/// isotropy of the leaves, metric against the FD Gram matrix, frame
/// orthonormality, angle against the determinant phasor, curvature
/// coefficients, and the angle Laplacian (Richardson-extrapolated).
pub fn verify_spec(spec: &FoliatedSpec, seed: u64, count: usize) -> Result<VerifyReport> {
    let cfg = FdConfig::default();
    let plan = sample::plan(spec, seed, count, 1e-3);

    let isotropy = CheckReport::from_residual(
        "leaf-isotropy",
        &oracle::check_lagrangian(spec, &plan, &cfg)?,
        TOL_ISOTROPY,
    );

    let mut metric = Fold::new();
    let mut frame = Fold::new();
    let mut angle = Fold::new();
    let mut curvature = Fold::new();
    let mut laplacian = Fold::new();
    for site in &plan {
        metric.record(site, oracle::metric_vs_gram_defect(spec, site.s, &site.x, &cfg)?);
        frame.record(site, oracle::frame_vs_gram_defect(spec, site.s, &site.x, &cfg)?);
        angle.record(site, oracle::angle_vs_det_defect(spec, site.s, &site.x, &cfg)?);

        let oc = oracle::oracle_mean_curvature(spec, site.s, &site.x, &cfg)?;
        let cd = CurvatureData::at(spec, site.s, &site.x)?;
        let scale = cd.a.abs().max(1.0);
        let mut worst = (oc.a - cd.a).abs();
        for (num, closed) in oc.aj.iter().zip(&cd.aj) {
            worst = worst.max((num - closed).abs());
        }
        curvature.record(site, worst / scale);

        let est = oracle::oracle_laplace_beltrami(spec, site.s, &site.x, &cfg)?;
        let closed = foliation::laplace_beta(spec, site.s, &site.x)?;
        laplacian.record(site, (est.value - closed).abs() / closed.abs().max(1.0));
    }

    Ok(VerifyReport::new(vec![
        isotropy,
        metric.finish("metric-vs-gram", TOL_METRIC),
        frame.finish("frame-orthonormality", TOL_FRAME),
        angle.finish("angle-vs-determinant", TOL_ANGLE),
        curvature.finish("curvature-coefficients", TOL_CURVATURE),
        laplacian.finish("angle-laplacian", TOL_LAPLACIAN),
    ]))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn floats_serialize_with_seventeen_digits() {
        #[derive(Serialize)]
        struct Probe {
            v: f64,
            bad: f64,
        }
        let json = to_json_string(&Probe { v: 0.1, bad: f64::INFINITY });
        assert!(json.contains("1.0000000000000001e-1"), "{json}");
        assert!(json.contains("\"bad\": null"), "{json}");
        let parsed: serde_json::Value =
            serde_json::from_str(&json).expect("output must stay valid JSON");
        assert_eq!(parsed["v"].as_f64(), Some(0.1));
    }

    #[test]
    fn verify_passes_on_presets_and_is_deterministic() {
        for spec in [
            FoliatedSpec::standard_circle(3).unwrap(),
            FoliatedSpec::catenoid3(1.0).unwrap(),
        ] {
            let report = verify_spec(&spec, 11, 8).unwrap();
            assert!(report.pass, "{}", report.to_json());
            assert_eq!(report.checks.len(), 6);
            let again = verify_spec(&spec, 11, 8).unwrap();
            assert_eq!(report.to_json(), again.to_json());
        }
    }

    #[test]
    fn twisted_image_yields_a_failing_check() {
        let mut r = sample::rng(5);
        let spec = sample::random_spec(&mut r, 3).unwrap();
        let twisted = oracle::ImaginaryTwist { spec: &spec, angle: 0.05 };
        let plan = sample::plan(&spec, 11, 12, 1e-3);
        let cfg = FdConfig::default();
        let rep = oracle::check_lagrangian(&twisted, &plan, &cfg).unwrap();
        let check = CheckReport::from_residual("leaf-isotropy", &rep, TOL_ISOTROPY);
        assert!(!check.pass && check.sup >= 1e-4, "sup {}", check.sup);
        assert!(check.witness.is_some());
        assert!(!VerifyReport::new(vec![check]).pass);
    }

    #[test]
    fn report_passes_iff_all_checks_do() {
        let good = CheckReport {
            check: "a".into(),
            pass: true,
            sup: 0.0,
            rms: 0.0,
            tol: 1.0,
            witness: None,
        };
        let mut bad = good.clone();
        bad.check = "b".into();
        bad.pass = false;
        assert!(VerifyReport::new(vec![good.clone()]).pass);
        assert!(!VerifyReport::new(vec![good, bad]).pass);
        assert!(VerifyReport::new(vec![]).pass);
    }
}
