//! The covariant functor from spacetimes to Weyl algebras: algebra handles,
//! the action of embeddings on generators, the local net, and executable
//! checks of the functor laws, isotony, covariance, causality and time slice.

use rand::Rng;
use serde_json::json;

use crate::error::{Error, Result};
use crate::greens::{canonical_data_scaled, evolve, slab_compress, slab_representative, CauchyData};
use crate::report::{random_bump_in, random_global_bump, Report, Sampler};
use crate::spacetime::{
    compose_embeddings, is_causally_convex, lattice_causal_hull, validate_embedding, Embedding, EmbeddingSpec, LocObject, Region,
    RegionShape, Spacetime2D,
};
use crate::testfun::{pushforward, TestFunction};
use crate::weyl::{WeylElement, WeylLabel, WeylTerm, EPS_LABEL};

/// The algebra of a spacetime, or of a region of it when `localization` is set.
#[derive(Clone, Debug, PartialEq)]
pub struct AlgebraHandle {
    ambient: Spacetime2D,
    localization: Option<Region>,
}

/// Global algebra of `m`.
pub fn algebra_of(m: &Spacetime2D) -> AlgebraHandle {
    AlgebraHandle { ambient: *m, localization: None }
}

/// Local algebra generated by test functions supported in `o`.
pub fn local_algebra(m: &Spacetime2D, o: &Region) -> Result<AlgebraHandle> {
    if o.ambient() != m {
        return Err(Error::DomainMismatch("region does not live on this spacetime".into()));
    }
    if !is_causally_convex(m, o) {
        return Err(Error::NotCausallyConvex);
    }
    Ok(AlgebraHandle { ambient: *m, localization: Some(o.clone()) })
}

impl AlgebraHandle {
    pub fn ambient(&self) -> &Spacetime2D {
        &self.ambient
    }

    pub fn localization(&self) -> Option<&Region> {
        self.localization.as_ref()
    }

    pub fn unit(&self) -> WeylElement {
        WeylElement::unit(&self.ambient)
    }

    /// Whether `f` may label a generator of this algebra.
    pub fn admits(&self, f: &TestFunction) -> bool {
        f.ambient() == &self.ambient && self.localization.as_ref().is_none_or(|o| f.supported_in(o))
    }

    pub fn generator(&self, f: &TestFunction) -> Result<WeylElement> {
        if f.ambient() != &self.ambient {
            return Err(Error::AmbientMismatch);
        }
        if !self.admits(f) {
            return Err(Error::NotLocalized);
        }
        WeylElement::generator(&self.ambient, f)
    }

    /// Every admissible support of `self` is admissible for `other`.
    pub fn is_contained_in(&self, other: &AlgebraHandle) -> bool {
        if self.ambient != other.ambient {
            return false;
        }
        match (&self.localization, &other.localization) {
            (_, None) => true,
            (None, Some(_)) => false,
            (Some(a), Some(b)) => a.is_subset_of(b),
        }
    }
}

/// The homomorphism `alpha_psi` induced by a validated embedding.
#[derive(Clone, Debug)]
pub struct MorphismAction {
    psi: Embedding,
}

/// `alpha_psi`. Only validated embeddings exist, so the action is always defined.
pub fn alpha(psi: &Embedding) -> MorphismAction {
    MorphismAction { psi: psi.clone() }
}

/// Half-width of the slab carrying the representative used by [`transport_data`],
/// as a fraction of the spatial extent of the label data.
const SLAB_FRACTION: f64 = 0.25;

/// Carries label data along an isometry of one geometry: the data on `t = 0`
/// of the solution moved by the map. Grid translations move the lattice
/// solution directly. Other maps push forward a representative supported in
/// a slab around `t = 0` and solve again on the target, so the result is
/// always the data of an exact lattice solution.
fn transport_data(psi: &Embedding, d: &CauchyData) -> Result<(CauchyData, f64)> {
    let m = psi.source().host();
    let target = psi.target();
    let h = m.h();
    if let Some((dn, dj)) = psi.map().cell_shift() {
        let (mut out, scale) = if dn == 0 {
            (d.clone(), d.max_abs())
        } else {
            let u = evolve(m, d, (-dn - 1, -dn + 1), None)?;
            let c0 = u.cols().0;
            let row = |n: i64| u.row(n).map(|r| r.to_vec()).unwrap_or_default();
            let (up, mid, down) = (row(-dn + 1), row(-dn), row(-dn - 1));
            let pi = up.iter().zip(&down).map(|(a, b)| (a - b) / (2.0 * h)).collect();
            (CauchyData { t0: 0.0, j0: c0, phi: mid, pi }, u.max_abs().max(d.max_abs()))
        };
        match m.period() {
            Some(p) => {
                let mut phi = vec![0.0; p as usize];
                let mut pi = vec![0.0; p as usize];
                for k in 0..out.len() {
                    let j = m.wrap_j(out.j0 + k as i64 + dj) as usize;
                    phi[j] = out.phi[k];
                    pi[j] = out.pi[k];
                }
                out = CauchyData { t0: 0.0, j0: 0, phi, pi };
            }
            None => out.j0 += dj,
        }
        return Ok((out, scale));
    }
    let extent = match m.period() {
        Some(_) => m.circumference(),
        None => d.len() as f64 * h,
    };
    let (t0, t1) = m.t_window();
    let half = (SLAB_FRACTION * extent).max(8.0 * h).min(-t0 - 2.0 * h).min(t1 - 2.0 * h);
    let rep = slab_representative(m, d, (-half, half))?;
    let whole = validate_embedding(EmbeddingSpec { source: LocObject::Spacetime(*m), target: *target, map: *psi.map() })?;
    canonical_data_scaled(target, &pushforward(&whole, &rep)?)
}

impl MorphismAction {
    pub fn embedding(&self) -> &Embedding {
        &self.psi
    }

    /// Image of one generator. Within a single geometry the label data is
    /// transported directly; across geometries the representative test
    /// function is pushed forward and its label recomputed on the target.
    pub fn apply_label(&self, label: &WeylLabel, rep: Option<&TestFunction>) -> Result<(WeylLabel, Option<TestFunction>)> {
        let host = self.psi.source().host();
        let target = self.psi.target();
        if !label.ambient().same_geometry(host) {
            return Err(Error::DomainMismatch("element does not live on the embedding source".into()));
        }
        let pushed = rep.map(|f| pushforward(&self.psi, f));
        if host.same_geometry(target) {
            let rep = pushed.and_then(|r| r.ok());
            if self.psi.map().is_identity() {
                return Ok((WeylLabel::from_data(target, label.data().clone(), label.data().max_abs()), rep));
            }
            if label.is_zero() {
                return Ok((WeylLabel::zero(target), rep));
            }
            let (data, scale) = transport_data(&self.psi, label.data())?;
            return Ok((WeylLabel::from_data(target, data, scale), rep));
        }
        let f = pushed.ok_or(Error::MissingRepresentative)??;
        Ok((WeylLabel::of(target, &f)?, Some(f)))
    }

    pub fn apply(&self, a: &WeylElement) -> Result<WeylElement> {
        let target = self.psi.target();
        let mut terms = Vec::with_capacity(a.terms().len());
        for t in a.terms() {
            let (label, rep) = self.apply_label(&t.label, t.rep.as_ref())?;
            terms.push(WeylTerm { label, coeff: t.coeff, rep });
        }
        WeylElement::from_terms(target, terms)
    }
}

/// Largest label distance and coefficient gap between two elements.
fn element_gap(a: &WeylElement, b: &WeylElement) -> f64 {
    let (dl, dc) = a.compare(b);
    dl.max(dc)
}

/// Samples a test function in `domain`, which must lie in the embedding source.
fn sample_source<R: Rng>(psi: &Embedding, domain: &Region, sampler: Sampler, rng: &mut R) -> Result<TestFunction> {
    if !domain.ambient().same_geometry(psi.source().host()) {
        return Err(Error::DomainMismatch("sampling domain is not on the embedding source".into()));
    }
    if let Some(o) = psi.source().region() {
        if !domain.is_subset_of(o) {
            return Err(Error::DomainMismatch("sampling domain leaves the source region".into()));
        }
    }
    sampler.draw(domain, rng)
}

fn map_params(psi: &Embedding) -> serde_json::Value {
    let m = psi.map();
    json!({
        "source": psi.source().host().id(),
        "target": psi.target().id(),
        "rapidity": m.rapidity,
        "shift": m.shift,
    })
}

/// `alpha(id)` leaves random generators and their products untouched.
pub fn check_identity<R: Rng>(m: &Spacetime2D, domain: &Region, n_samples: usize, rng: &mut R) -> Result<Report> {
    let id = Embedding::identity(m);
    let a = alpha(&id);
    let mut worst: f64 = 0.0;
    for _ in 0..n_samples {
        let f = sample_source(&id, domain, Sampler::Fitted, rng)?;
        let g = sample_source(&id, domain, Sampler::Fitted, rng)?;
        let x = WeylElement::generator(m, &f)?.add(&WeylElement::generator(m, &g)?.scale(rng.gen::<f64>().into()))?;
        worst = worst.max(element_gap(&a.apply(&x)?, &x));
    }
    Ok(Report::new("functor_identity", json!({"spacetime": m.id()}), n_samples, worst, 0.0))
}

/// `alpha(psi2 o psi1)` against `alpha(psi2) o alpha(psi1)` on sampled generators.
pub fn check_composition<R: Rng>(
    psi2: &Embedding,
    psi1: &Embedding,
    domain: &Region,
    sampler: Sampler,
    n_samples: usize,
    tol: f64,
    rng: &mut R,
) -> Result<Report> {
    let composite = compose_embeddings(psi2, psi1)?;
    let (a1, a2, a21) = (alpha(psi1), alpha(psi2), alpha(&composite));
    let host = psi1.source().host();
    let mut worst: f64 = 0.0;
    for _ in 0..n_samples {
        let f = sample_source(psi1, domain, sampler, rng)?;
        let x = WeylElement::generator(host, &f)?;
        worst = worst.max(element_gap(&a21.apply(&x)?, &a2.apply(&a1.apply(&x)?)?));
    }
    let params = json!({"outer": map_params(psi2), "inner": map_params(psi1)});
    Ok(Report::new("functor_composition", params, n_samples, worst, tol))
}

/// Homomorphism, unit and adjoint preservation of `alpha_psi` on sampled pairs.
pub fn check_homomorphism<R: Rng>(
    psi: &Embedding,
    domain: &Region,
    sampler: Sampler,
    n_samples: usize,
    tol: f64,
    rng: &mut R,
) -> Result<Report> {
    let a = alpha(psi);
    let host = psi.source().host();
    let mut worst = element_gap(&a.apply(&WeylElement::unit(host))?, &WeylElement::unit(psi.target()));
    for _ in 0..n_samples {
        let x = WeylElement::generator(host, &sample_source(psi, domain, sampler, rng)?)?;
        let y = WeylElement::generator(host, &sample_source(psi, domain, sampler, rng)?)?;
        let lhs = a.apply(&x.multiply(&y)?)?;
        let rhs = a.apply(&x)?.multiply(&a.apply(&y)?)?;
        worst = worst.max(element_gap(&lhs, &rhs));
        worst = worst.max(element_gap(&a.apply(&x.adjoint())?, &a.apply(&x)?.adjoint()));
    }
    Ok(Report::new("functor_homomorphism", map_params(psi), n_samples, worst, tol))
}

/// Faithfulness surrogate: images of distinct generators stay at label
/// distance at least `10 * EPS_LABEL`. The deviation is `10 * EPS_LABEL / min distance`.
pub fn check_injective<R: Rng>(
    psi: &Embedding,
    domain: &Region,
    sampler: Sampler,
    n_samples: usize,
    rng: &mut R,
) -> Result<Report> {
    let a = alpha(psi);
    let host = psi.source().host();
    let mut closest = f64::INFINITY;
    for _ in 0..n_samples {
        let f = sample_source(psi, domain, sampler, rng)?;
        let g = sample_source(psi, domain, sampler, rng)?;
        let (lf, lg) = (WeylLabel::of(host, &f)?, WeylLabel::of(host, &g)?);
        if lf.distance(&lg) < 10.0 * EPS_LABEL {
            continue;
        }
        let (mf, _) = a.apply_label(&lf, Some(&f))?;
        let (mg, _) = a.apply_label(&lg, Some(&g))?;
        closest = closest.min(mf.distance(&mg));
    }
    Ok(Report::new("functor_injective", map_params(psi), n_samples, 10.0 * EPS_LABEL / closest, 1.0))
}

/// Isotony along a chain of regions: each region lies in the next and every
/// sampled generator of a smaller local algebra is admitted by the larger ones.
/// The deviation counts violations.
pub fn check_isotony<R: Rng>(m: &Spacetime2D, chain: &[Region], n_samples: usize, rng: &mut R) -> Result<Report> {
    let handles = chain.iter().map(|o| local_algebra(m, o)).collect::<Result<Vec<_>>>()?;
    let mut violations = 0usize;
    for (k, a) in handles.iter().enumerate() {
        for b in &handles[k + 1..] {
            if !a.is_contained_in(b) {
                violations += 1;
            }
        }
        for _ in 0..n_samples {
            let f = random_bump_in(&chain[k], rng)?;
            if !a.admits(&f) || handles[k + 1..].iter().any(|b| !b.admits(&f)) {
                violations += 1;
            }
        }
    }
    let params = json!({"spacetime": m.id(), "chain_length": chain.len()});
    Ok(Report::new("isotony", params, n_samples * chain.len(), violations as f64, 0.0))
}

/// True when no lattice causal path joins `o1` and `o2`.
pub fn causally_separated(m: &Spacetime2D, o1: &Region, o2: &Region) -> bool {
    let (fut, past) = lattice_causal_hull(m, o1);
    let (n0, j0) = (m.n_range().0, m.j_range().0);
    let nx = m.nx();
    let mut in_o1 = vec![false; fut.len()];
    for c in o1.nodes() {
        in_o1[(c.n - n0) as usize * nx + (c.j - j0) as usize] = true;
    }
    o2.nodes().iter().all(|c| {
        let k = (c.n - n0) as usize * nx + (c.j - j0) as usize;
        !(fut[k] || past[k] || in_o1[k])
    })
}

/// Commutators of generators localized in causally separated regions vanish.
pub fn check_causality<R: Rng>(
    m: &Spacetime2D,
    o1: &Region,
    o2: &Region,
    n_samples: usize,
    tol: f64,
    rng: &mut R,
) -> Result<Report> {
    if !causally_separated(m, o1, o2) {
        return Err(Error::NotCausallySeparated);
    }
    let (a1, a2) = (local_algebra(m, o1)?, local_algebra(m, o2)?);
    let mut worst: f64 = 0.0;
    for _ in 0..n_samples {
        let x = a1.generator(&random_bump_in(o1, rng)?)?;
        let y = a2.generator(&random_bump_in(o2, rng)?)?;
        worst = worst.max(x.multiply(&y)?.deviation(&y.multiply(&x)?)?);
    }
    Ok(Report::new("causality", json!({"spacetime": m.id(), "h": m.h()}), n_samples, worst, tol))
}

/// Every global generator has an equal-label generator supported in the slab.
/// Sampled bumps have radii in `radii`; a compressed function leaking out of
/// the slab counts as an infinite deviation.
pub fn check_time_slice<R: Rng>(
    m: &Spacetime2D,
    slab: &Region,
    n_samples: usize,
    radii: (f64, f64),
    tol: f64,
    rng: &mut R,
) -> Result<Report> {
    let RegionShape::Slab { t_lo, t_hi } = *slab.shape() else {
        return Err(Error::NotCauchySlab("time-slice regions must be full slabs".into()));
    };
    if !(t_lo <= 0.0 && 0.0 <= t_hi) {
        return Err(Error::NotCauchySlab(format!("[{t_lo}, {t_hi}] misses the reference line t = 0")));
    }
    let mut worst: f64 = 0.0;
    for _ in 0..n_samples {
        let f = random_global_bump(m, radii, rng)?;
        let g = slab_compress(m, &f, (t_lo, t_hi))?;
        if !g.supported_in(slab) {
            worst = f64::INFINITY;
            continue;
        }
        worst = worst.max(WeylLabel::of(m, &f)?.distance(&WeylLabel::of(m, &g)?));
    }
    let params = json!({"spacetime": m.id(), "h": m.h(), "slab": [t_lo, t_hi]});
    Ok(Report::new("time_slice", params, n_samples, worst, tol))
}

/// Covariance of the net under an automorphism `kappa`: `alpha_kappa` maps
/// generators of `A(O)` to generators of `A(kappa(O))`, and the transported
/// labels agree with labels recomputed from pushed-forward test functions.
/// A support violation counts as an infinite deviation.
pub fn check_covariance<R: Rng>(
    kappa: &Embedding,
    regions: &[Region],
    sampler: Sampler,
    n_samples: usize,
    tol: f64,
    rng: &mut R,
) -> Result<Report> {
    if !kappa.is_automorphism_type() || !kappa.source().host().same_geometry(kappa.target()) {
        return Err(Error::DomainMismatch("covariance needs an isometry of one spacetime".into()));
    }
    let a = alpha(kappa);
    let m = kappa.source().host();
    let target = kappa.target();
    let mut worst: f64 = 0.0;
    for o in regions {
        let image = kappa.image_of(o)?;
        let local = local_algebra(target, &image)?;
        for _ in 0..n_samples {
            let f = sampler.draw(o, rng)?;
            let x = WeylElement::generator(m, &f)?;
            let (label, _) = a.apply_label(&x.terms()[0].label, None)?;
            let g = pushforward(kappa, &f)?;
            if !local.admits(&g) {
                worst = f64::INFINITY;
                continue;
            }
            worst = worst.max(label.distance(&WeylLabel::of(target, &g)?));
        }
    }
    Ok(Report::new("covariance", map_params(kappa), n_samples * regions.len(), worst, tol))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::report::seeded_rng;
    use crate::spacetime::{AffineMap, Point};
    use crate::testfun::bump;

    fn mink(h: f64) -> Spacetime2D {
        Spacetime2D::minkowski(0.5, h, (-6.0, 6.0), (-8.0, 8.0)).unwrap()
    }

    fn cyl(h: f64) -> Spacetime2D {
        Spacetime2D::cylinder(12.0, 0.5, h, (-6.0, 6.0)).unwrap()
    }

    fn auto(m: &Spacetime2D, map: AffineMap) -> Embedding {
        validate_embedding(EmbeddingSpec { source: LocObject::Spacetime(*m), target: *m, map }).unwrap()
    }

    #[test]
    fn handles_and_localization() {
        let m = mink(0.125);
        let g = algebra_of(&m);
        let f = bump(&m, Point::new(2.0, 3.0), (0.5, 0.5), 1.0).unwrap();
        assert!(g.admits(&f));
        assert_eq!(g.unit(), WeylElement::unit(&m));
        let o = Region::double_cone(&m, Point::new(0.0, 0.0), 1.0).unwrap();
        let local = local_algebra(&m, &o).unwrap();
        assert!(matches!(local.generator(&f), Err(Error::NotLocalized)));
        assert!(local.is_contained_in(&g) && !g.is_contained_in(&local));
        let empty = local_algebra(&m, &Region::empty(&m)).unwrap();
        assert!(!empty.admits(&f) && empty.admits(&TestFunction::zero(&m)));
        let a = Region::double_cone(&m, Point::new(0.0, 0.0), 1.0).unwrap();
        let b = Region::double_cone(&m, Point::new(2.0, 0.0), 1.0).unwrap();
        let union = Region::cells(&m, a.nodes().into_iter().chain(b.nodes())).unwrap();
        assert!(matches!(local_algebra(&m, &union), Err(Error::NotCausallyConvex)));
    }

    #[test]
    fn translations_transport_labels_exactly() {
        for m in [mink(0.0625), cyl(0.0625)] {
            let f = bump(&m, Point::new(0.7, 1.0), (0.8, 0.6), 1.0).unwrap();
            let x = WeylElement::generator(&m, &f).unwrap();
            for (dn, dj) in [(0, 5), (3, 0), (-7, -11), (16, 40)] {
                let psi = auto(&m, AffineMap::translation_cells(dn, dj));
                let (l, _) = alpha(&psi).apply_label(&x.terms()[0].label, None).unwrap();
                let direct = WeylLabel::of(&m, &pushforward(&psi, &f).unwrap()).unwrap();
                assert!(l.distance(&direct) < 1e-12, "{} ({dn},{dj}): {}", m.id(), l.distance(&direct));
            }
        }
    }

    #[test]
    fn off_grid_translations_commute_with_interpolation() {
        // Bilinear weights are constant for a translation, so resampling and
        // propagation commute up to rounding.
        let m = cyl(0.0625);
        let f = bump(&m, Point::new(0.3, 2.0), (1.5, 1.5), 1.0).unwrap();
        let psi = auto(&m, AffineMap::translation(m.h(), 0.3 * m.h(), 2.5 * m.h()));
        assert!(psi.map().cell_shift().is_none());
        let (l, _) = alpha(&psi).apply_label(&WeylLabel::of(&m, &f).unwrap(), None).unwrap();
        assert!(l.distance(&WeylLabel::of(&m, &pushforward(&psi, &f).unwrap()).unwrap()) < 1e-12);
    }

    #[test]
    fn boost_transport_is_second_order() {
        let err = |h: f64| {
            let m = Spacetime2D::minkowski(0.2, h, (-10.0, 10.0), (-14.0, 14.0)).unwrap();
            let psi = auto(&m, AffineMap::boost(0.2));
            let f = bump(&m, Point::new(0.2, -0.3), (3.0, 3.0), 1.0).unwrap();
            let (l, _) = alpha(&psi).apply_label(&WeylLabel::of(&m, &f).unwrap(), None).unwrap();
            l.distance(&WeylLabel::of(&m, &pushforward(&psi, &f).unwrap()).unwrap())
        };
        let (a, b) = (err(0.03125), err(0.015625));
        assert!(a / b > 3.0 && a / b < 5.0 && b < 1e-6, "{a} {b}");
    }

    #[test]
    fn functor_laws_for_translations() {
        let m = cyl(0.0625);
        let mut rng = seeded_rng(5, "functor");
        let dom = Region::double_cone(&m, Point::new(0.0, 6.0), 2.0).unwrap();
        assert_eq!(check_identity(&m, &dom, 5, &mut rng).unwrap().max_deviation, 0.0);
        let (p1, p2) = (auto(&m, AffineMap::translation_cells(4, 9)), auto(&m, AffineMap::translation_cells(-2, 30)));
        let r = check_composition(&p2, &p1, &dom, Sampler::Fitted, 5, EPS_LABEL, &mut rng).unwrap();
        assert!(r.pass, "{r:?}");
        let r = check_homomorphism(&p1, &dom, Sampler::Fitted, 3, 1e-9, &mut rng).unwrap();
        assert!(r.pass, "{r:?}");
        assert!(check_injective(&p1, &dom, Sampler::Fitted, 5, &mut rng).unwrap().pass);
    }

    #[test]
    fn causality_on_separated_cones() {
        let mut rng = seeded_rng(9, "causality");
        for m in [mink(0.0625), cyl(0.0625)] {
            let o1 = Region::double_cone(&m, Point::new(0.0, -3.0), 1.0).unwrap();
            let o2 = Region::double_cone(&m, Point::new(0.0, 3.0), 1.0).unwrap();
            let r = check_causality(&m, &o1, &o2, 5, 1e-10, &mut rng).unwrap();
            assert!(r.pass && r.max_deviation <= 1e-12, "{r:?}");
            let o3 = Region::double_cone(&m, Point::new(1.5, -2.0), 1.0).unwrap();
            assert!(matches!(check_causality(&m, &o1, &o3, 1, 1e-10, &mut rng), Err(Error::NotCausallySeparated)));
        }
    }

    #[test]
    fn time_slice_holds_and_rejects_bad_regions() {
        let m = cyl(0.0625);
        let mut rng = seeded_rng(2, "slice");
        let slab = Region::slab(&m, -0.25, 0.25).unwrap();
        let r = check_time_slice(&m, &slab, 4, (0.5, 1.0), 1e-9, &mut rng).unwrap();
        assert!(r.pass, "{r:?}");
        let off = Region::slab(&m, 1.0, 1.5).unwrap();
        assert!(matches!(check_time_slice(&m, &off, 1, (0.5, 1.0), 1e-9, &mut rng), Err(Error::NotCauchySlab(_))));
        let cone = Region::double_cone(&m, Point::new(0.0, 0.0), 1.0).unwrap();
        assert!(matches!(check_time_slice(&m, &cone, 1, (0.5, 1.0), 1e-9, &mut rng), Err(Error::NotCauchySlab(_))));
    }

    #[test]
    fn isotony_on_nested_cones() {
        let m = mink(0.0625);
        let mut rng = seeded_rng(4, "isotony");
        let chain: Vec<Region> =
            [0.5, 1.0, 2.0].iter().map(|r| Region::double_cone(&m, Point::new(0.0, 0.0), *r).unwrap()).collect();
        let r = check_isotony(&m, &chain, 5, &mut rng).unwrap();
        assert_eq!(r.max_deviation, 0.0);
        let r = check_isotony(&m, &[chain[2].clone(), chain[0].clone()], 5, &mut rng).unwrap();
        assert!(!r.pass);
    }

    #[test]
    fn covariance_for_grid_moves() {
        let m = cyl(0.0625);
        let mut rng = seeded_rng(1, "cov");
        let regions = [Region::double_cone(&m, Point::new(0.0, 2.0), 1.0).unwrap()];
        for map in [AffineMap::translation_cells(1, 0), AffineMap::translation_cells(0, 1), AffineMap::translation_cells(8, -40)]
        {
            let r = check_covariance(&auto(&m, map), &regions, Sampler::Fitted, 3, EPS_LABEL, &mut rng).unwrap();
            assert!(r.max_deviation < 1e-12, "{r:?}");
        }
    }

    #[test]
    fn cross_geometry_needs_a_representative() {
        let big = Spacetime2D::minkowski(0.5, 0.0625, (-3.0, 3.0), (-3.0, 3.0)).unwrap();
        let o = Region::double_cone(&big, Point::new(0.0, 0.0), 1.5).unwrap();
        let c = cyl(0.0625);
        let psi = validate_embedding(EmbeddingSpec {
            source: LocObject::Region(o.clone()),
            target: c,
            map: AffineMap::translation_cells(0, 16),
        })
        .unwrap();
        let f = bump(&big, Point::new(0.1, 0.2), (0.5, 0.5), 1.0).unwrap();
        let l = WeylLabel::of(&big, &f).unwrap();
        assert!(matches!(alpha(&psi).apply_label(&l, None), Err(Error::MissingRepresentative)));
        let (img, _) = alpha(&psi).apply_label(&l, Some(&f)).unwrap();
        assert_eq!(img.ambient(), &c);
        assert!(!img.is_zero());
    }
}
