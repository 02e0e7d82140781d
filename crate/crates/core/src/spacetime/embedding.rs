use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use super::region::{is_causally_convex, Region};
use super::{Node, Point, Spacetime2D, SpacetimeKind, SNAP_TOL};
use crate::error::{Error, Result};

/// Affine map `p -> Λ(χ) R p + h * shift` on `(t, x)` coordinates, where `R`
/// holds the optional reflections and the shift is stored in lattice units so
/// that grid-aligned translations compose exactly.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AffineMap {
    pub rapidity: f64,
    pub shift: [f64; 2],
    #[serde(default)]
    pub reverse_time: bool,
    #[serde(default)]
    pub reflect_space: bool,
}

fn snap(v: f64) -> f64 {
    let r = v.round();
    if (v - r).abs() <= SNAP_TOL * v.abs().max(1.0) {
        r
    } else {
        v
    }
}

impl AffineMap {
    pub fn identity() -> Self {
        AffineMap { rapidity: 0.0, shift: [0.0, 0.0], reverse_time: false, reflect_space: false }
    }

    /// Translation by `(a0, a1)` in physical units on a lattice of spacing `h`.
    pub fn translation(h: f64, a0: f64, a1: f64) -> Self {
        AffineMap { shift: [snap(a0 / h), snap(a1 / h)], ..Self::identity() }
    }

    /// Translation by whole lattice cells.
    pub fn translation_cells(dn: i64, dj: i64) -> Self {
        AffineMap { shift: [dn as f64, dj as f64], ..Self::identity() }
    }

    pub fn boost(rapidity: f64) -> Self {
        AffineMap { rapidity, ..Self::identity() }
    }

    fn reflection_signs(&self) -> (f64, f64) {
        (if self.reverse_time { -1.0 } else { 1.0 }, if self.reflect_space { -1.0 } else { 1.0 })
    }

    /// Linear part as a row-major 2x2 matrix acting on `(t, x)`.
    pub fn linear(&self) -> [[f64; 2]; 2] {
        let (c, s) = (self.rapidity.cosh(), self.rapidity.sinh());
        let (rt, rx) = self.reflection_signs();
        [[c * rt, s * rx], [s * rt, c * rx]]
    }

    pub fn is_identity(&self) -> bool {
        *self == Self::identity()
    }

    pub fn is_proper_orthochronous(&self) -> bool {
        !self.reverse_time && !self.reflect_space
    }

    /// Integral lattice shift when the map is a pure grid translation.
    pub fn cell_shift(&self) -> Option<(i64, i64)> {
        let integral = |v: f64| v == v.round();
        (self.rapidity == 0.0 && self.is_proper_orthochronous() && integral(self.shift[0]) && integral(self.shift[1]))
            .then(|| (self.shift[0] as i64, self.shift[1] as i64))
    }

    pub fn apply(&self, h: f64, p: Point) -> Point {
        let l = self.linear();
        Point::new(l[0][0] * p.t + l[0][1] * p.x + self.shift[0] * h, l[1][0] * p.t + l[1][1] * p.x + self.shift[1] * h)
    }

    pub fn apply_inverse(&self, h: f64, p: Point) -> Point {
        let (t, x) = (p.t - self.shift[0] * h, p.x - self.shift[1] * h);
        // Λ(χ)^{-1} = Λ(-χ); R is its own inverse and is applied last.
        let (c, s) = (self.rapidity.cosh(), self.rapidity.sinh());
        let (t1, x1) = (c * t - s * x, -s * t + c * x);
        let (rt, rx) = self.reflection_signs();
        Point::new(rt * t1, rx * x1)
    }

    /// `self ∘ inner`.
    pub fn compose(&self, inner: &AffineMap) -> AffineMap {
        let l = self.linear();
        let a = inner.shift;
        let shift =
            [snap(l[0][0] * a[0] + l[0][1] * a[1] + self.shift[0]), snap(l[1][0] * a[0] + l[1][1] * a[1] + self.shift[1])];
        // R Λ(χ) = Λ(±χ) R, with the sign flipped by a single reflection.
        let flip = self.reverse_time != self.reflect_space;
        let inner_rapidity = if flip { -inner.rapidity } else { inner.rapidity };
        AffineMap {
            rapidity: self.rapidity + inner_rapidity,
            shift,
            reverse_time: self.reverse_time != inner.reverse_time,
            reflect_space: self.reflect_space != inner.reflect_space,
        }
    }
}

/// An object of the locality category: a whole spacetime, or a causally convex
/// region of one regarded as a spacetime in its own right.
#[derive(Clone, Debug, PartialEq)]
pub enum LocObject {
    Spacetime(Spacetime2D),
    Region(Region),
}

impl LocObject {
    /// The spacetime whose coordinates and lattice the object uses.
    pub fn host(&self) -> &Spacetime2D {
        match self {
            LocObject::Spacetime(s) => s,
            LocObject::Region(r) => r.ambient(),
        }
    }

    pub fn region(&self) -> Option<&Region> {
        match self {
            LocObject::Spacetime(_) => None,
            LocObject::Region(r) => Some(r),
        }
    }
}

impl From<Spacetime2D> for LocObject {
    fn from(s: Spacetime2D) -> Self {
        LocObject::Spacetime(s)
    }
}

impl From<Region> for LocObject {
    fn from(r: Region) -> Self {
        LocObject::Region(r)
    }
}

/// Embedding data before validation.
#[derive(Clone, Debug, PartialEq)]
pub struct EmbeddingSpec {
    pub source: LocObject,
    pub target: Spacetime2D,
    pub map: AffineMap,
}

/// A validated morphism of the locality category. Only [`validate_embedding`]
/// and [`compose_embeddings`] construct values of this type.
#[derive(Clone, Debug, PartialEq)]
pub struct Embedding {
    source: LocObject,
    target: Spacetime2D,
    map: AffineMap,
}

impl Embedding {
    pub fn source(&self) -> &LocObject {
        &self.source
    }
    pub fn target(&self) -> &Spacetime2D {
        &self.target
    }
    pub fn map(&self) -> &AffineMap {
        &self.map
    }

    /// Identity morphism of a spacetime.
    pub fn identity(m: &Spacetime2D) -> Embedding {
        Embedding { source: LocObject::Spacetime(*m), target: *m, map: AffineMap::identity() }
    }

    /// True when the source is a whole spacetime, i.e. the map is onto.
    pub fn is_automorphism_type(&self) -> bool {
        matches!(self.source, LocObject::Spacetime(_))
    }

    /// Image of a region of the source, resolved on the target lattice.
    pub fn image_of(&self, o: &Region) -> Result<Region> {
        if !o.ambient().same_geometry(self.source.host()) {
            return Err(Error::DomainMismatch("region does not live on the embedding source".into()));
        }
        let nodes = image_nodes(&self.map, o, &self.target)?;
        Region::cells(&self.target, nodes)
    }

    pub fn to_spec(&self) -> EmbeddingSpec {
        EmbeddingSpec { source: self.source.clone(), target: self.target, map: self.map }
    }
}

/// Lattice image of `o` under `map`, checking injectivity and that the image fits the target window.
fn image_nodes(map: &AffineMap, o: &Region, target: &Spacetime2D) -> Result<Vec<Node>> {
    let host = o.ambient();
    let h = host.h();
    let nodes = o.nodes();
    for c in &nodes {
        let p = map.apply(h, host.point_of(*c));
        if !target.contains_point(p) {
            return Err(Error::OutOfDomain(format!("image point ({:.4}, {:.4}) outside target window", p.t, p.x)));
        }
    }
    if let Some((dn, dj)) = map.cell_shift() {
        let mut image = BTreeSet::new();
        for c in &nodes {
            image.insert(Node::new(c.n + dn, target.wrap_j(c.j + dj)));
        }
        if image.len() != nodes.len() {
            return Err(Error::NotInjective(format!("{} source cells map to {} target cells", nodes.len(), image.len())));
        }
        return Ok(image.into_iter().collect());
    }
    // General affine map: a target node is in the image when its preimage lies in o.
    let (mut t_lo, mut t_hi, mut x_lo, mut x_hi) = (f64::MAX, f64::MIN, f64::MAX, f64::MIN);
    for c in &nodes {
        let p = map.apply(h, host.point_of(*c));
        t_lo = t_lo.min(p.t);
        t_hi = t_hi.max(p.t);
        x_lo = x_lo.min(p.x);
        x_hi = x_hi.max(p.x);
    }
    if nodes.is_empty() {
        return Ok(Vec::new());
    }
    let windings: Vec<f64> = match target.period() {
        Some(_) => (-2..=2).map(|w| w as f64 * target.circumference()).collect(),
        None => vec![0.0],
    };
    let mut image = BTreeSet::new();
    for n in (t_lo / h).floor() as i64 - 1..=(t_hi / h).ceil() as i64 + 1 {
        for j in (x_lo / h).floor() as i64 - 1..=(x_hi / h).ceil() as i64 + 1 {
            let y = Point::new(n as f64 * h, j as f64 * h);
            let hits = windings.iter().filter(|w| o.contains_point(map.apply_inverse(h, Point::new(y.t, y.x + **w)))).count();
            if hits > 1 {
                return Err(Error::NotInjective(format!("target node ({n}, {j}) has {hits} preimages")));
            }
            if hits == 1 && target.contains_node(Node::new(n, j)) {
                image.insert(Node::new(n, target.wrap_j(j)));
            }
        }
    }
    Ok(image.into_iter().collect())
}

/// Checks the morphism conditions and returns the validated embedding.
pub fn validate_embedding(spec: EmbeddingSpec) -> Result<Embedding> {
    let host = *spec.source.host();
    let target = spec.target;
    if host.h() != target.h() {
        return Err(Error::GridMismatch(host.h(), target.h()));
    }
    if host.mass() != target.mass() {
        return Err(Error::MassMismatch(host.mass(), target.mass()));
    }
    if !spec.map.is_proper_orthochronous() {
        return Err(Error::OrientationViolated);
    }
    if spec.map.rapidity != 0.0 && (target.is_cylinder() || host.is_cylinder()) {
        return Err(Error::NotIsometric("boosts are not isometries of the cylinder".into()));
    }
    match &spec.source {
        LocObject::Spacetime(s) => match (s.kind(), target.kind()) {
            (SpacetimeKind::Minkowski, SpacetimeKind::Minkowski) => {}
            (SpacetimeKind::Cylinder, SpacetimeKind::Cylinder) if s.circumference() == target.circumference() => {}
            (SpacetimeKind::Cylinder, SpacetimeKind::Cylinder) => {
                return Err(Error::NotInjective("cylinders of different circumference".into()))
            }
            (SpacetimeKind::Minkowski, SpacetimeKind::Cylinder) => {
                return Err(Error::NotInjective("the plane does not embed in the cylinder".into()))
            }
            (SpacetimeKind::Cylinder, SpacetimeKind::Minkowski) => {
                return Err(Error::NotInjective("a closed Cauchy circle does not embed in the plane".into()))
            }
        },
        LocObject::Region(o) => {
            if !is_causally_convex(&host, o) {
                return Err(Error::NotCausallyConvex);
            }
            let image = Region::cells(&target, image_nodes(&spec.map, o, &target)?)?;
            if !is_causally_convex(&target, &image) {
                return Err(Error::CausalConvexityViolated);
            }
        }
    }
    Ok(Embedding { source: spec.source, target, map: spec.map })
}

/// `psi2 ∘ psi1`. The composite of validated morphisms is valid; debug builds re-check it.
pub fn compose_embeddings(psi2: &Embedding, psi1: &Embedding) -> Result<Embedding> {
    match &psi2.source {
        LocObject::Spacetime(s) if *s == psi1.target => {}
        _ => return Err(Error::DomainMismatch("target of the first morphism is not the source of the second".into())),
    }
    let composite = Embedding { source: psi1.source.clone(), target: psi2.target, map: psi2.map.compose(&psi1.map) };
    #[cfg(debug_assertions)]
    {
        let revalidated = validate_embedding(composite.to_spec());
        debug_assert!(revalidated.is_ok(), "composite failed validation: {revalidated:?}");
    }
    Ok(composite)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn mink() -> Spacetime2D {
        Spacetime2D::minkowski(0.0, 0.125, (-4.0, 4.0), (-8.0, 8.0)).unwrap()
    }

    fn cyl() -> Spacetime2D {
        Spacetime2D::cylinder(10.0, 0.0, 0.125, (-4.0, 4.0)).unwrap()
    }

    fn cone(r: f64) -> LocObject {
        let host = Spacetime2D::minkowski(0.0, 0.125, (-7.0, 7.0), (-7.0, 7.0)).unwrap();
        Region::double_cone(&host, Point::new(0.0, 0.0), r).unwrap().into()
    }

    fn valid(source: LocObject, target: Spacetime2D, map: AffineMap) -> Result<Embedding> {
        validate_embedding(EmbeddingSpec { source, target, map })
    }

    #[test]
    fn identity_is_valid() {
        let m = mink();
        let id = valid(m.into(), m, AffineMap::identity()).unwrap();
        assert_eq!(id, Embedding::identity(&m));
    }

    #[test]
    fn cones_into_cylinder() {
        let c = cyl();
        assert!(valid(cone(3.0), c, AffineMap::translation(0.125, 0.0, 5.0)).is_ok());
        assert!(matches!(
            valid(cone(6.0), Spacetime2D::cylinder(10.0, 0.0, 0.125, (-7.0, 7.0)).unwrap(), AffineMap::identity()),
            Err(Error::NotInjective(_))
        ));
        assert!(matches!(valid(cone(1.0), c, AffineMap::boost(0.2)), Err(Error::NotIsometric(_))));
    }

    #[test]
    fn wrap_around_causal_curves_break_convexity() {
        // Two cones that are causally disjoint in the plane become causally
        // connected once the circle closes up behind them.
        let host = Spacetime2D::minkowski(0.0, 0.125, (-4.0, 4.0), (-7.0, 7.0)).unwrap();
        let a = Region::double_cone(&host, Point::new(0.0, 0.0), 1.0).unwrap();
        let b = Region::double_cone(&host, Point::new(2.0, 5.0), 1.0).unwrap();
        let union = Region::cells(&host, a.nodes().into_iter().chain(b.nodes())).unwrap();
        assert!(is_causally_convex(&host, &union));
        let wide = Spacetime2D::cylinder(16.0, 0.0, 0.125, (-4.0, 4.0)).unwrap();
        assert!(valid(union.clone().into(), wide, AffineMap::identity()).is_ok());
        let narrow = Spacetime2D::cylinder(8.0, 0.0, 0.125, (-4.0, 4.0)).unwrap();
        assert_eq!(valid(union.into(), narrow, AffineMap::identity()), Err(Error::CausalConvexityViolated));
        let c = Spacetime2D::cylinder(10.0, 0.0, 0.125, (-6.0, 6.0)).unwrap();
        assert!(valid(cone(4.75), c, AffineMap::identity()).is_ok());
    }

    #[test]
    fn orientation_and_grid_checks() {
        let m = mink();
        let rev = AffineMap { reverse_time: true, ..AffineMap::identity() };
        let par = AffineMap { reflect_space: true, ..AffineMap::identity() };
        assert_eq!(valid(m.into(), m, rev), Err(Error::OrientationViolated));
        assert_eq!(valid(m.into(), m, par), Err(Error::OrientationViolated));
        let coarse = Spacetime2D::minkowski(0.0, 0.25, (-4.0, 4.0), (-8.0, 8.0)).unwrap();
        assert!(matches!(valid(m.into(), coarse, AffineMap::identity()), Err(Error::GridMismatch(..))));
        assert!(matches!(valid(m.into(), cyl(), AffineMap::identity()), Err(Error::NotInjective(_))));
        assert!(matches!(valid(cyl().into(), m, AffineMap::identity()), Err(Error::NotInjective(_))));
    }

    #[test]
    fn boosted_cone_image_is_convex() {
        let m = mink();
        let e = valid(cone(1.0), m, AffineMap::boost(0.3)).unwrap();
        let o = e.source().region().unwrap().clone();
        let img = e.image_of(&o).unwrap();
        assert!(is_causally_convex(&m, &img));
        assert!(img.contains_point(Point::new(0.0, 0.0)));
    }

    #[test]
    fn composition_laws() {
        let m = mink();
        let h = m.h();
        let t = |a0, a1| valid(m.into(), m, AffineMap::translation(h, a0, a1)).unwrap();
        let b = |chi| valid(m.into(), m, AffineMap::boost(chi)).unwrap();
        let id = Embedding::identity(&m);
        let psi = t(0.5, -1.25);
        assert_eq!(compose_embeddings(&id, &psi).unwrap(), psi);
        assert_eq!(compose_embeddings(&psi, &id).unwrap(), psi);
        assert_eq!(compose_embeddings(&t(0.0, 1.0), &t(0.0, 2.0)).unwrap(), t(0.0, 3.0));
        assert_eq!(compose_embeddings(&b(0.1), &b(0.25)).unwrap().map().rapidity, 0.1 + 0.25);
        let (p1, p2, p3) = (t(0.25, 0.5), t(-1.0, 0.125), t(0.375, -2.0));
        let left = compose_embeddings(&compose_embeddings(&p3, &p2).unwrap(), &p1).unwrap();
        let right = compose_embeddings(&p3, &compose_embeddings(&p2, &p1).unwrap()).unwrap();
        assert_eq!(left, right);
        let o = cone(1.0);
        let into = valid(o, m, AffineMap::translation(h, 0.5, 0.5)).unwrap();
        assert!(matches!(compose_embeddings(&into, &psi), Err(Error::DomainMismatch(_))));
    }

    #[test]
    fn non_grid_translation_snaps_when_close() {
        let a = AffineMap::translation(0.1, 0.0, 3.0);
        assert_eq!(a.cell_shift(), Some((0, 30)));
        let b = AffineMap::translation(0.1, 0.0, 1.0).compose(&AffineMap::translation(0.1, 0.0, 2.0));
        assert_eq!(a, b);
    }
}
