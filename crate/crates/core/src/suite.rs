//! Batch runner: a JSON config selects spacetimes and axiom suites; every
//! suite draws from its own seeded stream and emits sorted reports.

use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use rand::Rng;
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::closed_form::{BumpSource, ConvergenceStudy};
use crate::error::{Error, Result};
use crate::functor::{
    check_causality, check_composition, check_covariance, check_homomorphism, check_identity, check_injective, check_isotony,
    check_time_slice,
};
use crate::greens::{canonical_data, causal_propagator};
use crate::modular::{check_commutant, check_flow_invariance, check_identities, check_kms, tomita_operators, StandardPair};
use crate::natfield::{check_causal_factorization, check_naturality, check_s_matrix_covariance, s_matrix, WeylField};
use crate::report::{random_bump_in, seeded_rng, write_summary_csv, Report, Sampler};
use crate::spacetime::{
    validate_embedding, AffineMap, Embedding, EmbeddingSpec, LocObject, Point, Region, Spacetime2D, SpacetimeDesc,
};
use crate::testfun::TestFunction;
use crate::weyl::{WeylElement, EPS_LABEL};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SuiteName {
    FunctorLaws,
    Isotony,
    Covariance,
    Causality,
    TimeSlice,
    Naturality,
    Smatrix,
    Modular,
}

impl SuiteName {
    pub const ALL: [SuiteName; 8] = [
        SuiteName::FunctorLaws,
        SuiteName::Isotony,
        SuiteName::Covariance,
        SuiteName::Causality,
        SuiteName::TimeSlice,
        SuiteName::Naturality,
        SuiteName::Smatrix,
        SuiteName::Modular,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            SuiteName::FunctorLaws => "functor_laws",
            SuiteName::Isotony => "isotony",
            SuiteName::Covariance => "covariance",
            SuiteName::Causality => "causality",
            SuiteName::TimeSlice => "time_slice",
            SuiteName::Naturality => "naturality",
            SuiteName::Smatrix => "smatrix",
            SuiteName::Modular => "modular",
        }
    }
}

/// Tolerance table. `boost_c` and `time_slice_c` multiply `h^2`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Tolerances {
    pub identity: f64,
    pub translation: f64,
    pub boost_c: f64,
    pub homomorphism: f64,
    pub causality: f64,
    pub time_slice_c: f64,
    pub naturality: f64,
    pub factorization: f64,
    pub unitarity: f64,
    pub modular: f64,
    pub kms: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            identity: 0.0,
            translation: EPS_LABEL,
            boost_c: 0.004096,
            homomorphism: 1e-12,
            causality: 1e-10,
            time_slice_c: 1.0,
            naturality: 1e-9,
            factorization: 1e-9,
            unitarity: 4.0 * f64::EPSILON,
            modular: 1e-12,
            kms: 1e-11,
        }
    }
}

impl Tolerances {
    pub fn boost(&self, h: f64) -> f64 {
        self.boost_c * h * h
    }
}

/// Standard pair for the modular lab and subcommand. `rho` holds either `n`
/// eigenvalues or `n * n` real entries in row-major order.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModularConfig {
    pub n: usize,
    pub rho: Vec<f64>,
    #[serde(default = "default_dims")]
    pub random_dims: Vec<usize>,
}

fn default_dims() -> Vec<usize> {
    vec![2, 3, 4]
}

impl Default for ModularConfig {
    fn default() -> Self {
        ModularConfig { n: 2, rho: vec![0.3, 0.7], random_dims: default_dims() }
    }
}

/// Source of the `propagator` subcommand.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PropagatorConfig {
    #[serde(default)]
    pub spacetime: Option<String>,
    pub center: [f64; 2],
    pub radii: [f64; 2],
    #[serde(default = "one")]
    pub amplitude: f64,
}

fn one() -> f64 {
    1.0
}

impl Default for PropagatorConfig {
    fn default() -> Self {
        PropagatorConfig { spacetime: None, center: [0.0, 0.0], radii: [1.0, 1.0], amplitude: 1.0 }
    }
}

/// Gaps between `supp lambda` and `supp nu` swept by the `smatrix` subcommand.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SmatrixConfig {
    pub separations: Vec<f64>,
    #[serde(default = "default_configurations")]
    pub configurations: usize,
}

fn default_configurations() -> usize {
    10
}

impl Default for SmatrixConfig {
    fn default() -> Self {
        SmatrixConfig { separations: vec![0.25, 0.5, 1.0, 2.0], configurations: 10 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SuiteConfig {
    pub spacetimes: Vec<SpacetimeDesc>,
    pub suites: Vec<SuiteName>,
    pub seed: u64,
    pub samples: usize,
    #[serde(default)]
    pub tolerances: Tolerances,
    pub output_dir: PathBuf,
    /// Grid spacings of a refinement family, coarsest first.
    #[serde(default)]
    pub refinement: Vec<f64>,
    #[serde(default)]
    pub modular: ModularConfig,
    #[serde(default)]
    pub propagator: PropagatorConfig,
    #[serde(default)]
    pub smatrix: SmatrixConfig,
}

impl SuiteConfig {
    /// Parses and validates a config document. Syntax and schema errors carry
    /// the line and column; semantic errors name the field.
    pub fn parse(text: &str) -> Result<Self> {
        let cfg: SuiteConfig =
            serde_json::from_str(text).map_err(|e| Error::Config(format!("line {} column {}: {e}", e.line(), e.column())))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
        Self::parse(&text).map_err(|e| match e {
            Error::Config(msg) => Error::Config(format!("{}: {msg}", path.display())),
            other => other,
        })
    }

    fn validate(&self) -> Result<()> {
        for (k, d) in self.spacetimes.iter().enumerate() {
            d.build_with_regions().map_err(|e| Error::Config(format!("spacetimes[{k}]: {e}")))?;
        }
        let mut ids = std::collections::BTreeSet::new();
        for (k, id) in self.spacetime_ids().iter().enumerate() {
            if !ids.insert(id.clone()) {
                return Err(Error::Config(format!("spacetimes[{k}].id: duplicate id {id}")));
            }
        }
        if self.samples == 0 {
            return Err(Error::Config("samples: must be positive".into()));
        }
        if let Some(h) = self.refinement.iter().find(|h| !(**h > 0.0)) {
            return Err(Error::Config(format!("refinement: spacing {h} is not positive")));
        }
        let t = serde_json::to_value(&self.tolerances).expect("tolerances serialize");
        for (k, v) in t.as_object().expect("object") {
            if !v.as_f64().is_some_and(|x| x >= 0.0) {
                return Err(Error::Config(format!("tolerances.{k}: must be a nonnegative number")));
            }
        }
        if self.modular.n == 0 || ![self.modular.n, self.modular.n * self.modular.n].contains(&self.modular.rho.len()) {
            return Err(Error::Config(format!(
                "modular.rho: expected {} or {} entries",
                self.modular.n,
                self.modular.n * self.modular.n
            )));
        }
        if let Some(id) = &self.propagator.spacetime {
            if !self.spacetime_ids().contains(id) {
                return Err(Error::Config(format!("propagator.spacetime: unknown id {id}")));
            }
        }
        Ok(())
    }

    fn spacetime_ids(&self) -> Vec<String> {
        self.spacetimes.iter().enumerate().map(|(k, d)| d.id.clone().unwrap_or_else(|| format!("st{k}"))).collect()
    }

    /// Spacetimes with their ids, in config order.
    pub fn build_spacetimes(&self) -> Result<Vec<(String, Spacetime2D)>> {
        self.spacetimes.iter().zip(self.spacetime_ids()).map(|(d, id)| Ok((id, d.build()?))).collect()
    }

    /// The selected suites, deduplicated, in canonical order.
    pub fn selected(&self) -> Vec<SuiteName> {
        SuiteName::ALL.into_iter().filter(|s| self.suites.contains(s)).collect()
    }
}

/// Outcome of a batch run.
#[derive(Clone, Debug, PartialEq)]
pub struct RunOutcome {
    pub suites: BTreeMap<SuiteName, Vec<Report>>,
}

impl RunOutcome {
    pub fn reports(&self) -> Vec<&Report> {
        SuiteName::ALL.iter().filter_map(|s| self.suites.get(s)).flatten().collect()
    }

    pub fn all_pass(&self) -> bool {
        self.reports().iter().all(|r| r.pass)
    }

    pub fn exit_code(&self) -> i32 {
        if self.all_pass() {
            0
        } else {
            1
        }
    }
}

/// A failing report standing in for a check that could not be set up.
fn failed(check_id: String, e: &Error) -> Report {
    Report::new(check_id, json!({"error": e.to_string()}), 0, f64::INFINITY, 0.0)
}

fn tagged(tag: &str, r: Result<Report>, fallback: &str) -> Report {
    match r {
        Ok(mut r) => {
            r.check_id = format!("{}/{tag}", r.check_id);
            r
        }
        Err(e) => failed(format!("{fallback}/{tag}"), &e),
    }
}

fn automorphism(m: &Spacetime2D, map: AffineMap) -> Result<Embedding> {
    validate_embedding(EmbeddingSpec { source: LocObject::Spacetime(*m), target: *m, map })
}

fn cone(m: &Spacetime2D, t: f64, x: f64, r: f64) -> Result<Region> {
    Region::double_cone(m, Point::new(t, x), r)
}

/// Round bumps large enough for the boost transport to be in its asymptotic regime.
pub const BOOST_SAMPLER: Sampler = Sampler::Round { r_min: 3.0, r_max: 3.4 };
pub const BOOST_RAPIDITY: f64 = 0.2;
const BOOST_CONE: f64 = 5.0;

pub fn functor_laws<R: Rng>(id: &str, m: &Spacetime2D, n: usize, tol: &Tolerances, rng: &mut R) -> Vec<Report> {
    let mut out = Vec::new();
    let dom = cone(m, 0.0, 0.0, 1.5);
    out.push(tagged(id, dom.clone().and_then(|d| check_identity(m, &d, n, rng)), "functor_identity"));
    let shifts = (automorphism(m, AffineMap::translation_cells(3, -5)), automorphism(m, AffineMap::translation_cells(-2, 7)));
    let r = (|| {
        let (t1, t2) = (shifts.0.clone()?, shifts.1.clone()?);
        check_composition(&t2, &t1, &dom.clone()?, Sampler::Fitted, n, tol.translation, rng)
    })();
    out.push(tagged(&format!("{id}/translations"), r, "functor_composition"));
    let r = (|| check_homomorphism(&shifts.0.clone()?, &dom.clone()?, Sampler::Fitted, n, tol.homomorphism, rng))();
    out.push(tagged(&format!("{id}/translation"), r, "functor_homomorphism"));
    let r = (|| check_injective(&shifts.0.clone()?, &dom.clone()?, Sampler::Fitted, n, rng))();
    out.push(tagged(&format!("{id}/translation"), r, "functor_injective"));
    if !m.is_cylinder() {
        let wide = cone(m, 0.0, 0.0, BOOST_CONE);
        let b = automorphism(m, AffineMap::boost(BOOST_RAPIDITY));
        let t = automorphism(m, AffineMap::translation_cells(3, -5));
        let half = n.div_ceil(2);
        let r = (|| check_composition(&b.clone()?, &t.clone()?, &wide.clone()?, BOOST_SAMPLER, half, tol.boost(m.h()), rng))();
        out.push(tagged(&format!("{id}/boost_after_translation"), r, "functor_composition"));
        let r = (|| check_composition(&t.clone()?, &b.clone()?, &wide.clone()?, BOOST_SAMPLER, half, tol.boost(m.h()), rng))();
        out.push(tagged(&format!("{id}/translation_after_boost"), r, "functor_composition"));
    }
    out
}

pub fn isotony<R: Rng>(id: &str, m: &Spacetime2D, n: usize, rng: &mut R) -> Vec<Report> {
    let chains = [((0.0, 0.0), vec![0.5, 1.0, 1.5]), ((0.25, -0.5), vec![0.75, 1.25])];
    chains
        .iter()
        .enumerate()
        .map(|(k, ((t, x), radii))| {
            let r =
                radii.iter().map(|&r| cone(m, *t, *x, r)).collect::<Result<Vec<_>>>().and_then(|c| check_isotony(m, &c, n, rng));
            tagged(&format!("{id}/chain{k}"), r, "isotony")
        })
        .collect()
}

pub fn covariance<R: Rng>(id: &str, m: &Spacetime2D, n: usize, tol: &Tolerances, rng: &mut R) -> Vec<Report> {
    let mut out = Vec::new();
    let regions = [cone(m, 0.0, 0.0, 1.0), cone(m, 0.5, -1.0, 1.0)].into_iter().collect::<Result<Vec<_>>>();
    let shift =
        if m.is_cylinder() { AffineMap::translation_cells(4, m.nx() as i64 / 4) } else { AffineMap::translation_cells(4, -6) };
    let r = (|| check_covariance(&automorphism(m, shift)?, &regions.clone()?, Sampler::Fitted, n, tol.translation, rng))();
    out.push(tagged(&format!("{id}/translation"), r, "covariance"));
    if !m.is_cylinder() {
        let r = (|| {
            let b = automorphism(m, AffineMap::boost(BOOST_RAPIDITY))?;
            check_covariance(&b, &[cone(m, 0.0, 0.0, BOOST_CONE)?], BOOST_SAMPLER, n, tol.boost(m.h()), rng)
        })();
        out.push(tagged(&format!("{id}/boost"), r, "covariance"));
    }
    out
}

/// Causally separated double-cone pairs used by the causality suite.
pub fn causality_pairs(m: &Spacetime2D) -> Result<Vec<(Region, Region)>> {
    Ok(vec![
        (cone(m, 0.0, -2.0, 1.0)?, cone(m, 0.0, 2.0, 1.0)?),
        (cone(m, 0.5, -1.5, 0.75)?, cone(m, -0.5, 1.5, 0.75)?),
        (cone(m, 0.0, -0.6, 0.4)?, cone(m, 0.2, 0.6, 0.4)?),
    ])
}

pub fn causality<R: Rng>(id: &str, m: &Spacetime2D, n: usize, tol: &Tolerances, rng: &mut R) -> Vec<Report> {
    match causality_pairs(m) {
        Ok(pairs) => pairs
            .iter()
            .enumerate()
            .map(|(k, (a, b))| tagged(&format!("{id}/pair{k}"), check_causality(m, a, b, n, tol.causality, rng), "causality"))
            .collect(),
        Err(e) => vec![failed(format!("causality/{id}"), &e)],
    }
}

/// Slab of width `8h` around `t = 0`.
pub fn time_slice_slab(m: &Spacetime2D) -> Result<Region> {
    Region::slab(m, -4.0 * m.h(), 4.0 * m.h())
}

pub const TIME_SLICE_RADII: (f64, f64) = (0.5, 1.0);

pub fn time_slice<R: Rng>(id: &str, m: &Spacetime2D, n: usize, tol: &Tolerances, rng: &mut R) -> Vec<Report> {
    let h = m.h();
    let r = time_slice_slab(m).and_then(|s| check_time_slice(m, &s, n, TIME_SLICE_RADII, tol.time_slice_c * h * h, rng));
    vec![tagged(id, r, "time_slice")]
}

/// A double cone, as a spacetime in its own right, embedded by a translation
/// given in lattice cells (possibly fractional).
pub fn cone_embedding(target: &Spacetime2D, cells: (f64, f64)) -> Result<(Region, Embedding)> {
    let chart = Spacetime2D::minkowski(target.mass(), target.h(), (-2.5, 2.5), (-2.5, 2.5))?;
    let o = Region::double_cone(&chart, Point::new(0.0, 0.0), 1.5)?;
    let h = target.h();
    let psi = validate_embedding(EmbeddingSpec {
        source: LocObject::Region(o.clone()),
        target: *target,
        map: AffineMap::translation(h, cells.0 * h, cells.1 * h),
    })?;
    Ok((o, psi))
}

/// Grid and off-grid placements of the cone used by the naturality suite.
pub fn naturality_shifts(h: f64) -> [(&'static str, (f64, f64)); 2] {
    let c = (0.5 / h).round();
    [("grid", (c, 2.0 * c)), ("offgrid", (c + 0.37, -2.0 * c - 0.81))]
}

pub fn naturality<R: Rng>(id: &str, m: &Spacetime2D, n: usize, tol: &Tolerances, rng: &mut R) -> Vec<Report> {
    let mut out = Vec::new();
    for (name, cells) in naturality_shifts(m.h()) {
        let r = cone_embedding(m, cells).and_then(|(o, psi)| check_naturality(&WeylField, &psi, &o, n, tol.naturality, rng));
        out.push(tagged(&format!("{id}/{name}"), r, "naturality"));
        // Resampling onto a shifted grid moves the quadratic phase at O(h^2).
        if name != "grid" {
            continue;
        }
        let r = cone_embedding(m, cells).and_then(|(o, psi)| check_s_matrix_covariance(&psi, &o, n, tol.naturality, rng));
        out.push(tagged(&format!("{id}/{name}"), r, "s_matrix_covariance"));
    }
    out
}

/// `(lambda, mu, nu)` with `lambda` above and `nu` below a gap of width `gap`
/// around `t = 0`, and `mu` straddling it.
pub fn factorization_triple<R: Rng>(
    m: &Spacetime2D,
    gap: f64,
    rng: &mut R,
) -> Result<(TestFunction, TestFunction, TestFunction)> {
    let r = 0.75;
    let x = |rng: &mut R| rng.gen_range(-1.0..1.0);
    let up = cone(m, 0.5 * gap + r, x(rng), r)?;
    let down = cone(m, -0.5 * gap - r, x(rng), r)?;
    let mid = cone(m, 0.0, x(rng), 0.5 * gap + r)?;
    Ok((random_bump_in(&up, rng)?, random_bump_in(&mid, rng)?, random_bump_in(&down, rng)?))
}

fn s_matrix_axioms(m: &Spacetime2D, lambda: &TestFunction, tol: &Tolerances) -> Result<(Report, Report)> {
    let s0 = s_matrix(m, &TestFunction::zero(m))?.value;
    let unit = s0.deviation(&WeylElement::unit(m))?;
    let s = s_matrix(m, lambda)?.value;
    let ss = s.adjoint().multiply(&s)?.deviation(&WeylElement::unit(m))?;
    let ss2 = s.multiply(&s.adjoint())?.deviation(&WeylElement::unit(m))?;
    Ok((
        Report::new("s_matrix_unit", json!({"spacetime": m.id()}), 1, unit, 0.0),
        Report::new("s_matrix_unitarity", json!({"spacetime": m.id()}), 1, ss.max(ss2), tol.unitarity),
    ))
}

pub fn smatrix<R: Rng>(id: &str, m: &Spacetime2D, configurations: usize, tol: &Tolerances, rng: &mut R) -> Vec<Report> {
    let mut out = Vec::new();
    let mut worst = (0.0f64, 0.0f64, 0.0f64);
    let mut err = None;
    for _ in 0..configurations {
        let step = (|| {
            let (l, mu, nu) = factorization_triple(m, 0.5, rng)?;
            let (u, s) = s_matrix_axioms(m, &l.add(&mu)?.add(&nu)?, tol)?;
            let f = check_causal_factorization(m, &l, &mu, &nu, tol.factorization)?;
            Ok::<_, Error>((u.max_deviation, s.max_deviation, f.max_deviation))
        })();
        match step {
            Ok((a, b, c)) => worst = (worst.0.max(a), worst.1.max(b), worst.2.max(c)),
            Err(e) => err = Some(e),
        }
    }
    let p = json!({"spacetime": m.id(), "gap": 0.5});
    if let Some(e) = err {
        out.push(failed(format!("causal_factorization/{id}"), &e));
    } else {
        out.push(Report::new(format!("s_matrix_unit/{id}"), p.clone(), configurations, worst.0, 0.0));
        out.push(Report::new(format!("s_matrix_unitarity/{id}"), p.clone(), configurations, worst.1, tol.unitarity));
        out.push(Report::new(format!("causal_factorization/{id}"), p, configurations, worst.2, tol.factorization));
    }
    out
}

fn fold(reports: Vec<Report>, check_id: String, params: serde_json::Value) -> Report {
    let n = reports.iter().map(|r| r.n_samples).sum();
    let worst = reports.iter().map(|r| r.max_deviation).fold(0.0, |a, b| if b.is_nan() { f64::NAN } else { a.max(b) });
    let tol = reports.first().map_or(0.0, |r| r.tolerance);
    Report::new(check_id, params, n, worst, tol)
}

/// Builds the configured standard pair.
pub fn configured_pair(cfg: &ModularConfig) -> Result<StandardPair> {
    use nalgebra::DMatrix;
    use num_complex::Complex64;
    let n = cfg.n;
    if cfg.rho.len() == n {
        StandardPair::from_eigenvalues(&cfg.rho)
    } else if cfg.rho.len() == n * n {
        StandardPair::from_density(DMatrix::from_row_iterator(n, n, cfg.rho.iter().map(|&v| Complex64::new(v, 0.0))))
    } else {
        Err(Error::DimensionMismatch { expected: n * n, got: cfg.rho.len() })
    }
}

/// Largest gap between the computed spectrum of `Delta` and `{p_i / p_k}`.
pub fn spectrum_gap(pair: &StandardPair) -> Result<f64> {
    let data = tomita_operators(pair)?;
    let p: Vec<f64> = pair.rho().clone().symmetric_eigen().eigenvalues.iter().copied().collect();
    let mut expected: Vec<f64> = p.iter().flat_map(|a| p.iter().map(move |b| a / b)).collect();
    expected.sort_by(f64::total_cmp);
    Ok(data.spectrum().iter().zip(&expected).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max))
}

pub const FLOW_TIMES: [f64; 5] = [-1.5, -0.4, 0.0, 0.7, 2.0];

/// The four modular checks for one pair, `samples` operator draws each.
pub fn modular_reports<R: Rng>(pair: &StandardPair, samples: usize, tol: &Tolerances, rng: &mut R) -> Result<Vec<Report>> {
    let d = tomita_operators(pair)?;
    let mut ident = check_identities(pair, &d);
    ident.tolerance = tol.modular;
    ident.pass = ident.max_deviation <= tol.modular;
    Ok(vec![
        ident,
        check_commutant(pair, &d, samples, tol.modular, rng),
        check_flow_invariance(pair, &d, samples, &FLOW_TIMES, tol.modular, rng),
        check_kms(pair, &d, samples, &FLOW_TIMES, tol.kms, rng),
    ])
}

pub fn modular<R: Rng>(cfg: &ModularConfig, samples: usize, tol: &Tolerances, rng: &mut R) -> Vec<Report> {
    let mut out = Vec::new();
    for &n in &cfg.random_dims {
        let mut per: BTreeMap<String, Vec<Report>> = BTreeMap::new();
        let mut err = None;
        for _ in 0..samples {
            match StandardPair::random(n, 0.2, rng).and_then(|p| modular_reports(&p, 3, tol, rng)) {
                Ok(rs) => {
                    for r in rs {
                        per.entry(r.check_id.clone()).or_default().push(r);
                    }
                }
                Err(e) => err = Some(e),
            }
        }
        if let Some(e) = err {
            out.push(failed(format!("modular/n{n}"), &e));
        }
        for (k, rs) in per {
            out.push(fold(rs, format!("{k}/n{n}"), json!({"n": n, "states": samples})));
        }
    }
    let r = configured_pair(cfg).and_then(|p| spectrum_gap(&p));
    let params = json!({"n": cfg.n, "rho": cfg.rho});
    out.push(match r {
        Ok(g) => Report::new("modular_spectrum/configured", params, 1, g, tol.modular),
        Err(e) => failed("modular_spectrum/configured".into(), &e),
    });
    out
}

fn run_suite(cfg: &SuiteConfig, suite: SuiteName, spacetimes: &[(String, Spacetime2D)]) -> Vec<Report> {
    let mut rng = seeded_rng(cfg.seed, suite.as_str());
    let (n, tol) = (cfg.samples, &cfg.tolerances);
    let mut out = Vec::new();
    if suite == SuiteName::Modular {
        out = modular(&cfg.modular, n, tol, &mut rng);
    } else {
        for (id, m) in spacetimes {
            out.extend(match suite {
                SuiteName::FunctorLaws => functor_laws(id, m, n, tol, &mut rng),
                SuiteName::Isotony => isotony(id, m, n, &mut rng),
                SuiteName::Covariance => covariance(id, m, n, tol, &mut rng),
                SuiteName::Causality => causality(id, m, n, tol, &mut rng),
                SuiteName::TimeSlice => time_slice(id, m, n, tol, &mut rng),
                SuiteName::Naturality => naturality(id, m, n, tol, &mut rng),
                SuiteName::Smatrix => smatrix(id, m, cfg.smatrix.configurations, tol, &mut rng),
                SuiteName::Modular => unreachable!(),
            });
        }
    }
    out.sort_by(|a, b| a.check_id.cmp(&b.check_id));
    out
}

/// Executes the selected suites in parallel threads and merges by suite name.
pub fn execute(cfg: &SuiteConfig) -> Result<RunOutcome> {
    let spacetimes = cfg.build_spacetimes()?;
    let selected = cfg.selected();
    let results: Vec<(SuiteName, Vec<Report>)> = std::thread::scope(|scope| {
        let handles: Vec<_> = selected
            .iter()
            .map(|&s| {
                (
                    s,
                    scope.spawn({
                        let st = &spacetimes;
                        move || run_suite(cfg, s, st)
                    }),
                )
            })
            .collect();
        handles.into_iter().map(|(s, h)| (s, h.join().expect("suite thread panicked"))).collect()
    });
    Ok(RunOutcome { suites: results.into_iter().collect() })
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value).map_err(|e| Error::Io(e.to_string()))?;
    text.push('\n');
    fs::write(path, text)?;
    Ok(())
}

/// Runs the config and writes `<suite>.json` per suite plus `summary.csv`.
pub fn run(cfg: &SuiteConfig) -> Result<RunOutcome> {
    let outcome = execute(cfg)?;
    fs::create_dir_all(&cfg.output_dir)?;
    for (suite, reports) in &outcome.suites {
        write_json(&cfg.output_dir.join(format!("{}.json", suite.as_str())), reports)?;
    }
    let all: Vec<Report> = outcome.reports().into_iter().cloned().collect();
    write_summary_csv(&all, fs::File::create(cfg.output_dir.join("summary.csv"))?)?;
    Ok(outcome)
}

/// One row of the convergence table.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ConvergenceRow {
    pub h: f64,
    pub suite: String,
    pub max_deviation: f64,
}

/// Deviation of each refinable quantity on every spacing of the refinement
/// family: the lattice propagator against the continuum (m = 0 and m = 1),
/// and the boost covariance and time-slice distance on the first Minkowski
/// spacetime of the config.
pub fn convergence(cfg: &SuiteConfig) -> Result<Vec<ConvergenceRow>> {
    if cfg.refinement.len() < 2 {
        return Err(Error::Config("refinement: a convergence study needs at least two spacings".into()));
    }
    let mut rows = Vec::new();
    for (name, mass) in [("propagator_m0", 0.0), ("propagator_m1", 1.0)] {
        for (h, e) in cfg.refinement.iter().zip(ConvergenceStudy::standard(mass).errors(&cfg.refinement)?) {
            rows.push(ConvergenceRow { h: *h, suite: name.into(), max_deviation: e });
        }
    }
    let base = cfg.build_spacetimes()?.into_iter().map(|(_, m)| m).find(|m| !m.is_cylinder());
    let n = cfg.samples.min(8);
    if let Some(base) = base {
        for &h in &cfg.refinement {
            let m = base.with_spacing(h)?;
            let selected = cfg.selected();
            if selected.contains(&SuiteName::Covariance) {
                let mut rng = seeded_rng(cfg.seed, "convergence/covariance");
                let b = automorphism(&m, AffineMap::boost(BOOST_RAPIDITY))?;
                let r = check_covariance(&b, &[cone(&m, 0.0, 0.0, BOOST_CONE)?], BOOST_SAMPLER, n, 0.0, &mut rng)?;
                rows.push(ConvergenceRow { h, suite: "covariance_boost".into(), max_deviation: r.max_deviation });
            }
            if selected.contains(&SuiteName::TimeSlice) {
                let mut rng = seeded_rng(cfg.seed, "convergence/time_slice");
                let r = check_time_slice(&m, &time_slice_slab(&m)?, n, TIME_SLICE_RADII, 0.0, &mut rng)?;
                rows.push(ConvergenceRow { h, suite: "time_slice".into(), max_deviation: r.max_deviation });
            }
        }
    }
    rows.sort_by(|a, b| a.suite.cmp(&b.suite).then(b.h.total_cmp(&a.h)));
    Ok(rows)
}

pub fn write_convergence_csv<W: Write>(rows: &[ConvergenceRow], w: W) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(["h", "suite", "max_deviation"])?;
    for r in rows {
        out.write_record([format!("{:e}", r.h), r.suite.clone(), format!("{:e}", r.max_deviation)])?;
    }
    out.flush()?;
    Ok(())
}

/// Files written by a subcommand.
pub type Written = Vec<PathBuf>;

/// Convergence table to `convergence.csv`.
pub fn emit_convergence(cfg: &SuiteConfig) -> Result<Written> {
    let rows = convergence(cfg)?;
    fs::create_dir_all(&cfg.output_dir)?;
    let path = cfg.output_dir.join("convergence.csv");
    write_convergence_csv(&rows, fs::File::create(&path)?)?;
    Ok(vec![path])
}

/// `E f` for the configured bump source as CSV and JSON, and its Cauchy data at `t = 0`.
pub fn emit_propagator(cfg: &SuiteConfig) -> Result<Written> {
    let spacetimes = cfg.build_spacetimes()?;
    let (_, m) = match &cfg.propagator.spacetime {
        Some(id) => spacetimes.iter().find(|(k, _)| k == id),
        None => spacetimes.first(),
    }
    .ok_or_else(|| Error::Config("spacetimes: the propagator needs at least one spacetime".into()))?;
    let p = &cfg.propagator;
    let src =
        BumpSource { center: Point::new(p.center[0], p.center[1]), radii: (p.radii[0], p.radii[1]), amplitude: p.amplitude };
    let f = src.sample(m)?;
    let u = causal_propagator(m, &f)?;
    fs::create_dir_all(&cfg.output_dir)?;
    let paths = ["propagator.csv", "propagator.json", "cauchy_data.csv"].map(|s| cfg.output_dir.join(s));
    u.write_csv(fs::File::create(&paths[0])?)?;
    fs::write(&paths[1], u.to_json())?;
    canonical_data(m, &f)?.write_csv(fs::File::create(&paths[2])?)?;
    Ok(paths.to_vec())
}

/// Causal factorization swept over the gap between `supp lambda` and `supp nu`.
pub fn smatrix_sweep(cfg: &SuiteConfig) -> Result<Vec<Report>> {
    let mut rng = seeded_rng(cfg.seed, "smatrix_sweep");
    let mut out = Vec::new();
    for (id, m) in cfg.build_spacetimes()? {
        for &gap in &cfg.smatrix.separations {
            let mut reports = Vec::new();
            for _ in 0..cfg.smatrix.configurations {
                let (l, mu, nu) = factorization_triple(&m, gap, &mut rng)?;
                reports.push(check_causal_factorization(&m, &l, &mu, &nu, cfg.tolerances.factorization)?);
            }
            out.push(fold(reports, format!("causal_factorization/{id}/gap={gap}"), json!({"spacetime": m.id(), "gap": gap})));
        }
    }
    Ok(out)
}

pub fn emit_smatrix(cfg: &SuiteConfig) -> Result<(Vec<Report>, Written)> {
    let reports = smatrix_sweep(cfg)?;
    fs::create_dir_all(&cfg.output_dir)?;
    let paths = vec![cfg.output_dir.join("smatrix.json"), cfg.output_dir.join("smatrix_summary.csv")];
    write_json(&paths[0], &reports)?;
    write_summary_csv(&reports, fs::File::create(&paths[1])?)?;
    Ok((reports, paths))
}

/// Reports for the configured pair and its `Delta` spectrum.
pub fn emit_modular(cfg: &SuiteConfig) -> Result<(Vec<Report>, Written)> {
    let pair = configured_pair(&cfg.modular)?;
    let mut rng = seeded_rng(cfg.seed, "modular_pair");
    let mut reports = modular_reports(&pair, cfg.samples, &cfg.tolerances, &mut rng)?;
    reports.push(Report::new(
        "modular_spectrum",
        json!({"n": cfg.modular.n, "rho": cfg.modular.rho}),
        1,
        spectrum_gap(&pair)?,
        cfg.tolerances.modular,
    ));
    fs::create_dir_all(&cfg.output_dir)?;
    let paths = vec![cfg.output_dir.join("modular.json"), cfg.output_dir.join("modular_spectrum.csv")];
    write_json(&paths[0], &reports)?;
    tomita_operators(&pair)?.write_spectrum_csv(fs::File::create(&paths[1])?)?;
    Ok((reports, paths))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn minimal(extra: &str) -> String {
        format!(
            r#"{{
  "spacetimes": [{{"id": "cyl", "kind": "cylinder", "L": 8.0, "m": 0.5, "h": 0.0625, "window": {{"t": [-3.0, 3.0]}}}}],
  "suites": [],
  "seed": 1,
  "samples": 2,
  "output_dir": "unused"{extra}
}}"#
        )
    }

    #[test]
    fn parse_rejects_unknown_suites_with_position() {
        let text = minimal("").replace(r#""suites": []"#, r#""suites": ["functor_laws", "vibes"]"#);
        let Err(Error::Config(msg)) = SuiteConfig::parse(&text) else { panic!("accepted") };
        assert!(msg.contains("line 3") && msg.contains("vibes"), "{msg}");
        let text = minimal(r#", "tolerances": {"causalty": 1.0}"#);
        let Err(Error::Config(msg)) = SuiteConfig::parse(&text) else { panic!("accepted") };
        assert!(msg.contains("causalty"), "{msg}");
        let text = minimal(r#", "tolerances": {"causality": -1.0}"#);
        let Err(Error::Config(msg)) = SuiteConfig::parse(&text) else { panic!("accepted") };
        assert!(msg.contains("tolerances.causality"), "{msg}");
    }

    #[test]
    fn empty_suite_list_passes() {
        let cfg = SuiteConfig::parse(&minimal("")).unwrap();
        let out = execute(&cfg).unwrap();
        assert!(out.reports().is_empty());
        assert_eq!(out.exit_code(), 0);
    }

    #[test]
    fn single_spacing_is_rejected() {
        let cfg = SuiteConfig::parse(&minimal(r#", "refinement": [0.0625]"#)).unwrap();
        assert!(matches!(convergence(&cfg), Err(Error::Config(_))));
    }

    #[test]
    fn spectrum_of_configured_pair() {
        let pair = configured_pair(&ModularConfig::default()).unwrap();
        assert!(spectrum_gap(&pair).unwrap() < 1e-12);
        let full = ModularConfig { n: 2, rho: vec![0.5, 0.1, 0.1, 0.5], random_dims: vec![] };
        assert!(spectrum_gap(&configured_pair(&full).unwrap()).unwrap() < 1e-12);
    }

    #[test]
    fn factorization_triples_are_separated() {
        let cfg = SuiteConfig::parse(&minimal("")).unwrap();
        let (_, m) = cfg.build_spacetimes().unwrap().remove(0);
        let mut rng = seeded_rng(3, "triples");
        for gap in [0.25, 1.0] {
            let (l, _, nu) = factorization_triple(&m, gap, &mut rng).unwrap();
            let (l0, _) = l.row_range().unwrap();
            let (_, n1) = nu.row_range().unwrap();
            assert!((l0 - n1) as f64 * m.h() >= gap);
        }
    }
}
