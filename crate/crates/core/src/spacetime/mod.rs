//! The locality category at desk scale: flat 1+1D spacetimes (the Minkowski
//! plane and the flat cylinder), their causal structure, causally convex
//! regions and validated isometric embeddings.
//!
//! Coordinates are `(t, x)` with `c = 1`. Every spacetime carries a uniform
//! lattice with `dt = dx = h`; a node `(n, j)` sits at `(n h, j h)`. On the
//! cylinder the spatial index is periodic with period `N = L / h`.

mod embedding;
mod region;

pub use embedding::{compose_embeddings, validate_embedding, AffineMap, Embedding, EmbeddingSpec, LocObject};
pub use region::{is_causally_convex, lattice_causal_hull, Region, RegionDesc, RegionShape};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

/// Largest admissible `m h`; the explicit mass term is only stable for small `m h`.
pub const MAX_MASS_TIMES_H: f64 = 0.1;

/// Relative tolerance used when snapping physical coordinates to lattice indices.
pub(crate) const SNAP_TOL: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SpacetimeKind {
    #[serde(alias = "minkowski_plane")]
    Minkowski,
    Cylinder,
}

/// A point in physical coordinates.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Point {
    pub t: f64,
    pub x: f64,
}

impl Point {
    pub fn new(t: f64, x: f64) -> Self {
        Point { t, x }
    }
}

/// A lattice node `(n, j)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Node {
    pub n: i64,
    pub j: i64,
}

impl Node {
    pub fn new(n: i64, j: i64) -> Self {
        Node { n, j }
    }
}

/// Causal type of a pair of points.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum CausalType {
    Timelike,
    Lightlike,
    Spacelike,
}

/// A flat, oriented, time-oriented, globally hyperbolic 1+1D spacetime
/// together with its lattice window.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Spacetime2D {
    kind: SpacetimeKind,
    circumference: f64,
    mass: f64,
    h: f64,
    n_min: i64,
    n_max: i64,
    j_min: i64,
    j_max: i64,
}

fn snap_index(v: f64, what: &str) -> Result<i64> {
    let r = v.round();
    if (v - r).abs() > SNAP_TOL * v.abs().max(1.0) {
        return Err(Error::InvalidSpacetime(format!("{what} = {v} grid units is not a lattice value")));
    }
    Ok(r as i64)
}

impl Spacetime2D {
    /// Minkowski plane with the computational window `t_window x x_window`.
    pub fn minkowski(mass: f64, h: f64, t_window: (f64, f64), x_window: (f64, f64)) -> Result<Self> {
        check_common(mass, h, t_window)?;
        if !(x_window.0 < x_window.1) {
            return Err(Error::InvalidSpacetime("empty spatial window".into()));
        }
        Ok(Spacetime2D {
            kind: SpacetimeKind::Minkowski,
            circumference: 0.0,
            mass,
            h,
            n_min: (t_window.0 / h - SNAP_TOL).ceil() as i64,
            n_max: (t_window.1 / h + SNAP_TOL).floor() as i64,
            j_min: (x_window.0 / h - SNAP_TOL).ceil() as i64,
            j_max: (x_window.1 / h + SNAP_TOL).floor() as i64,
        })
        .and_then(Self::check_reference_surface)
    }

    /// Flat cylinder `R x S^1` of circumference `circumference`.
    pub fn cylinder(circumference: f64, mass: f64, h: f64, t_window: (f64, f64)) -> Result<Self> {
        check_common(mass, h, t_window)?;
        if !(circumference > 0.0) {
            return Err(Error::InvalidSpacetime("cylinder requires L > 0".into()));
        }
        let n = snap_index(circumference / h, "L/h")?;
        if n < 3 {
            return Err(Error::InvalidSpacetime("cylinder needs at least 3 cells".into()));
        }
        Ok(Spacetime2D {
            kind: SpacetimeKind::Cylinder,
            circumference,
            mass,
            h,
            n_min: (t_window.0 / h - SNAP_TOL).ceil() as i64,
            n_max: (t_window.1 / h + SNAP_TOL).floor() as i64,
            j_min: 0,
            j_max: n - 1,
        })
        .and_then(Self::check_reference_surface)
    }

    fn check_reference_surface(self) -> Result<Self> {
        // Canonical labels are read off at t = 0 with a centered difference.
        if self.n_min > -1 || self.n_max < 1 {
            return Err(Error::InvalidSpacetime("time window must contain [-h, h]".into()));
        }
        Ok(self)
    }

    /// Same spacetime and window at a different lattice spacing.
    pub fn with_spacing(&self, h: f64) -> Result<Self> {
        let (t0, t1) = self.t_window();
        match self.kind {
            SpacetimeKind::Minkowski => Spacetime2D::minkowski(self.mass, h, (t0, t1), self.x_window()),
            SpacetimeKind::Cylinder => Spacetime2D::cylinder(self.circumference, self.mass, h, (t0, t1)),
        }
    }

    pub fn kind(&self) -> SpacetimeKind {
        self.kind
    }
    pub fn is_cylinder(&self) -> bool {
        self.kind == SpacetimeKind::Cylinder
    }
    pub fn mass(&self) -> f64 {
        self.mass
    }
    pub fn h(&self) -> f64 {
        self.h
    }
    /// Circumference `L`; zero on the Minkowski plane.
    pub fn circumference(&self) -> f64 {
        self.circumference
    }
    pub fn n_range(&self) -> (i64, i64) {
        (self.n_min, self.n_max)
    }
    pub fn j_range(&self) -> (i64, i64) {
        (self.j_min, self.j_max)
    }
    pub fn nt(&self) -> usize {
        (self.n_max - self.n_min + 1) as usize
    }
    pub fn nx(&self) -> usize {
        (self.j_max - self.j_min + 1) as usize
    }
    /// Number of cells around the circle (cylinder only).
    pub fn period(&self) -> Option<i64> {
        self.is_cylinder().then_some(self.j_max + 1)
    }
    pub fn t_window(&self) -> (f64, f64) {
        (self.n_min as f64 * self.h, self.n_max as f64 * self.h)
    }
    pub fn x_window(&self) -> (f64, f64) {
        (self.j_min as f64 * self.h, self.j_max as f64 * self.h)
    }

    /// Canonical spatial index (wrapped into `0..N` on the cylinder).
    pub fn wrap_j(&self, j: i64) -> i64 {
        match self.period() {
            Some(p) => j.rem_euclid(p),
            None => j,
        }
    }

    pub fn contains_node(&self, node: Node) -> bool {
        node.n >= self.n_min && node.n <= self.n_max && (self.is_cylinder() || (node.j >= self.j_min && node.j <= self.j_max))
    }

    pub fn contains_point(&self, p: Point) -> bool {
        let eps = SNAP_TOL * self.h;
        let (t0, t1) = self.t_window();
        if p.t < t0 - eps || p.t > t1 + eps {
            return false;
        }
        if self.is_cylinder() {
            return true;
        }
        let (x0, x1) = self.x_window();
        p.x >= x0 - eps && p.x <= x1 + eps
    }

    pub fn point_of(&self, node: Node) -> Point {
        Point::new(node.n as f64 * self.h, node.j as f64 * self.h)
    }

    /// Nearest lattice node (spatial index wrapped on the cylinder).
    pub fn node_of(&self, p: Point) -> Node {
        Node::new((p.t / self.h).round() as i64, self.wrap_j((p.x / self.h).round() as i64))
    }

    /// Spatial separation, taking the shortest way around on the cylinder.
    pub fn spatial_distance(&self, x: f64, y: f64) -> f64 {
        let d = (x - y).abs();
        if self.is_cylinder() {
            let l = self.circumference;
            let d = d.rem_euclid(l);
            d.min(l - d)
        } else {
            d
        }
    }

    /// Same underlying manifold and lattice, ignoring the window.
    pub fn same_geometry(&self, other: &Spacetime2D) -> bool {
        self.kind == other.kind && self.circumference == other.circumference && self.mass == other.mass && self.h == other.h
    }

    pub fn to_desc(&self) -> SpacetimeDesc {
        SpacetimeDesc {
            id: None,
            kind: self.kind,
            circumference: self.is_cylinder().then_some(self.circumference),
            m: self.mass,
            h: self.h,
            window: WindowDesc {
                t: [self.t_window().0, self.t_window().1],
                x: (!self.is_cylinder()).then(|| [self.x_window().0, self.x_window().1]),
            },
            regions: Vec::new(),
        }
    }

    /// Short content hash of the descriptor, used as `ambient_id` in exported files.
    pub fn id(&self) -> String {
        let json = serde_json::to_string(&self.to_desc()).expect("descriptor serializes");
        let digest = Sha256::digest(json.as_bytes());
        hex::encode(&digest[..8])
    }
}

fn check_common(mass: f64, h: f64, t_window: (f64, f64)) -> Result<()> {
    if !(h > 0.0) || !h.is_finite() {
        return Err(Error::InvalidSpacetime("grid spacing must be positive".into()));
    }
    if !(mass >= 0.0) || !mass.is_finite() {
        return Err(Error::InvalidSpacetime("mass must be nonnegative".into()));
    }
    if mass * h > MAX_MASS_TIMES_H {
        return Err(Error::InvalidSpacetime(format!("m h = {} exceeds {MAX_MASS_TIMES_H}", mass * h)));
    }
    if !(t_window.0 < t_window.1) {
        return Err(Error::InvalidSpacetime("empty time window".into()));
    }
    Ok(())
}

/// JSON descriptor of a spacetime and (optionally) some named regions in it.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpacetimeDesc {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub id: Option<String>,
    pub kind: SpacetimeKind,
    #[serde(rename = "L", default, skip_serializing_if = "Option::is_none")]
    pub circumference: Option<f64>,
    pub m: f64,
    pub h: f64,
    pub window: WindowDesc,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub regions: Vec<RegionDesc>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WindowDesc {
    pub t: [f64; 2],
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub x: Option<[f64; 2]>,
}

impl SpacetimeDesc {
    pub fn build(&self) -> Result<Spacetime2D> {
        let t = (self.window.t[0], self.window.t[1]);
        match self.kind {
            SpacetimeKind::Minkowski => {
                let x = self.window.x.ok_or_else(|| Error::InvalidSpacetime("minkowski window needs an x range".into()))?;
                if self.circumference.is_some() {
                    return Err(Error::InvalidSpacetime("L is only meaningful on the cylinder".into()));
                }
                Spacetime2D::minkowski(self.m, self.h, t, (x[0], x[1]))
            }
            SpacetimeKind::Cylinder => {
                let l = self.circumference.ok_or_else(|| Error::InvalidSpacetime("cylinder requires L".into()))?;
                Spacetime2D::cylinder(l, self.m, self.h, t)
            }
        }
    }

    /// Builds the spacetime and every listed region.
    pub fn build_with_regions(&self) -> Result<(Spacetime2D, Vec<Region>)> {
        let st = self.build()?;
        let regions = self.regions.iter().map(|r| Region::from_desc(&st, r)).collect::<Result<Vec<_>>>()?;
        Ok((st, regions))
    }
}

/// Classifies the separation of `x` and `y`. On the cylinder every winding of
/// the spatial separation is considered.
pub fn causal_relation(m: &Spacetime2D, x: Point, y: Point) -> Result<CausalType> {
    for p in [x, y] {
        if !m.contains_point(p) {
            return Err(Error::OutOfDomain(format!("({}, {})", p.t, p.x)));
        }
    }
    let dt = y.t - x.t;
    let dx = y.x - x.x;
    let windings: Vec<f64> = match m.kind {
        SpacetimeKind::Minkowski => vec![dx],
        SpacetimeKind::Cylinder => {
            let l = m.circumference;
            let w = (dt.abs() / l).ceil() as i64 + (dx.abs() / l).ceil() as i64 + 1;
            (-w..=w).map(|k| dx + k as f64 * l).collect()
        }
    };
    let mut lightlike = false;
    for d in windings {
        let s = dt * dt - d * d;
        let scale = (dt * dt + d * d).max(f64::MIN_POSITIVE);
        if s.abs() <= 1e-12 * scale {
            lightlike = true;
        } else if s > 0.0 {
            return Ok(CausalType::Timelike);
        }
    }
    Ok(if lightlike { CausalType::Lightlike } else { CausalType::Spacelike })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn mink() -> Spacetime2D {
        Spacetime2D::minkowski(0.0, 0.125, (-4.0, 4.0), (-4.0, 4.0)).unwrap()
    }

    #[test]
    fn causal_relation_examples() {
        let m = mink();
        assert_eq!(causal_relation(&m, Point::new(0.0, 0.0), Point::new(2.0, 1.0)).unwrap(), CausalType::Timelike);
        assert_eq!(causal_relation(&m, Point::new(0.0, 0.0), Point::new(1.0, 1.0)).unwrap(), CausalType::Lightlike);
        assert_eq!(causal_relation(&m, Point::new(0.0, 0.0), Point::new(1.0, 2.0)).unwrap(), CausalType::Spacelike);
        let c = Spacetime2D::cylinder(10.0, 0.0, 0.1, (-1.0, 1.0)).unwrap();
        assert_eq!(causal_relation(&c, Point::new(0.0, 0.0), Point::new(0.5, 9.9)).unwrap(), CausalType::Timelike);
        assert_eq!(causal_relation(&c, Point::new(0.0, 0.0), Point::new(0.5, 5.0)).unwrap(), CausalType::Spacelike);
    }

    #[test]
    fn out_of_window_point_is_rejected() {
        let m = mink();
        assert!(matches!(causal_relation(&m, Point::new(0.0, 0.0), Point::new(9.0, 0.0)), Err(Error::OutOfDomain(_))));
    }

    #[test]
    fn construction_invariants() {
        assert!(Spacetime2D::cylinder(10.0, 0.5, 0.3, (-1.0, 1.0)).is_err());
        assert!(Spacetime2D::cylinder(-1.0, 0.5, 0.1, (-1.0, 1.0)).is_err());
        assert!(Spacetime2D::minkowski(2.0, 0.1, (-1.0, 1.0), (-1.0, 1.0)).is_err());
        assert!(Spacetime2D::minkowski(-1.0, 0.1, (-1.0, 1.0), (-1.0, 1.0)).is_err());
        assert!(Spacetime2D::minkowski(0.0, 0.1, (0.5, 1.0), (-1.0, 1.0)).is_err());
        let c = Spacetime2D::cylinder(16.0, 0.5, 1.0 / 32.0, (-1.0, 1.0)).unwrap();
        assert_eq!(c.period(), Some(512));
    }

    #[test]
    fn descriptor_round_trip() {
        let json = r#"{"kind":"cylinder","L":12.0,"m":0.5,"h":0.0625,"window":{"t":[-2.0,2.0]},
            "regions":[{"shape":"double_cone","params":{"center":[0.0,1.0],"radius":1.0}},
                       {"shape":"slab","params":{"t_lo":-0.5,"t_hi":0.5}}]}"#;
        let desc: SpacetimeDesc = serde_json::from_str(json).unwrap();
        let (st, regions) = desc.build_with_regions().unwrap();
        assert_eq!(st.period(), Some(192));
        assert_eq!(regions.len(), 2);
        assert_eq!(st.to_desc().build().unwrap(), st);
        let bad = r#"{"kind":"cylinder","m":0.5,"h":0.0625,"window":{"t":[-2.0,2.0]}}"#;
        assert!(serde_json::from_str::<SpacetimeDesc>(bad).unwrap().build().is_err());
    }
}
