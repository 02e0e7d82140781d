use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use super::{Node, Point, Spacetime2D, SNAP_TOL};
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq)]
pub enum RegionShape {
    /// `{ |t - t_c| + |x - x_c| <= r }`, spatial distance taken around the circle on the cylinder.
    DoubleCone { center: Point, radius: f64 },
    /// `{ t_lo <= t <= t_hi }` across the whole spatial window.
    Slab { t_lo: f64, t_hi: f64 },
    /// Explicit set of lattice nodes (spatial index wrapped on the cylinder).
    Cells(BTreeSet<Node>),
}

/// A region of a spacetime, resolved at lattice granularity.
#[derive(Clone, Debug, PartialEq)]
pub struct Region {
    ambient: Spacetime2D,
    shape: RegionShape,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "shape", content = "params", rename_all = "snake_case", deny_unknown_fields)]
pub enum RegionDesc {
    DoubleCone { center: [f64; 2], radius: f64 },
    Slab { t_lo: f64, t_hi: f64 },
    Cells { cells: Vec<[i64; 2]> },
}

impl Region {
    pub fn double_cone(m: &Spacetime2D, center: Point, radius: f64) -> Result<Self> {
        if !(radius > 0.0) {
            return Err(Error::OutOfDomain("double cone radius must be positive".into()));
        }
        for p in [
            Point::new(center.t - radius, center.x),
            Point::new(center.t + radius, center.x),
            Point::new(center.t, center.x - radius),
            Point::new(center.t, center.x + radius),
        ] {
            if !m.contains_point(p) {
                return Err(Error::OutOfDomain(format!("double cone at ({}, {}) r={radius}", center.t, center.x)));
            }
        }
        Ok(Region { ambient: *m, shape: RegionShape::DoubleCone { center, radius } })
    }

    pub fn slab(m: &Spacetime2D, t_lo: f64, t_hi: f64) -> Result<Self> {
        if !(t_lo < t_hi)
            || !m.contains_point(Point::new(t_lo, m.x_window().0))
            || !m.contains_point(Point::new(t_hi, m.x_window().0))
        {
            return Err(Error::OutOfDomain(format!("slab [{t_lo}, {t_hi}]")));
        }
        Ok(Region { ambient: *m, shape: RegionShape::Slab { t_lo, t_hi } })
    }

    pub fn cells<I: IntoIterator<Item = Node>>(m: &Spacetime2D, cells: I) -> Result<Self> {
        let mut set = BTreeSet::new();
        for c in cells {
            if !m.contains_node(c) {
                return Err(Error::OutOfDomain(format!("cell ({}, {})", c.n, c.j)));
            }
            set.insert(Node::new(c.n, m.wrap_j(c.j)));
        }
        Ok(Region { ambient: *m, shape: RegionShape::Cells(set) })
    }

    pub fn empty(m: &Spacetime2D) -> Self {
        Region { ambient: *m, shape: RegionShape::Cells(BTreeSet::new()) }
    }

    pub fn from_desc(m: &Spacetime2D, desc: &RegionDesc) -> Result<Self> {
        match desc {
            RegionDesc::DoubleCone { center, radius } => Region::double_cone(m, Point::new(center[0], center[1]), *radius),
            RegionDesc::Slab { t_lo, t_hi } => Region::slab(m, *t_lo, *t_hi),
            RegionDesc::Cells { cells } => Region::cells(m, cells.iter().map(|c| Node::new(c[0], c[1]))),
        }
    }

    pub fn to_desc(&self) -> RegionDesc {
        match &self.shape {
            RegionShape::DoubleCone { center, radius } => {
                RegionDesc::DoubleCone { center: [center.t, center.x], radius: *radius }
            }
            RegionShape::Slab { t_lo, t_hi } => RegionDesc::Slab { t_lo: *t_lo, t_hi: *t_hi },
            RegionShape::Cells(set) => RegionDesc::Cells { cells: set.iter().map(|c| [c.n, c.j]).collect() },
        }
    }

    pub fn ambient(&self) -> &Spacetime2D {
        &self.ambient
    }

    pub fn shape(&self) -> &RegionShape {
        &self.shape
    }

    /// Continuum membership of a point (nearest node for explicit cell sets).
    pub fn contains_point(&self, p: Point) -> bool {
        let m = &self.ambient;
        let eps = SNAP_TOL * m.h();
        match &self.shape {
            RegionShape::DoubleCone { center, radius } => {
                m.contains_point(p) && (p.t - center.t).abs() + m.spatial_distance(p.x, center.x) <= radius + eps
            }
            RegionShape::Slab { t_lo, t_hi } => m.contains_point(p) && p.t >= t_lo - eps && p.t <= t_hi + eps,
            RegionShape::Cells(set) => set.contains(&m.node_of(p)),
        }
    }

    pub fn contains_node(&self, node: Node) -> bool {
        match &self.shape {
            RegionShape::Cells(set) => set.contains(&Node::new(node.n, self.ambient.wrap_j(node.j))),
            _ => self.ambient.contains_node(node) && self.contains_point(self.ambient.point_of(node)),
        }
    }

    /// All nodes of the region, sorted, spatial index wrapped.
    pub fn nodes(&self) -> Vec<Node> {
        let m = &self.ambient;
        let h = m.h();
        match &self.shape {
            RegionShape::Cells(set) => set.iter().copied().collect(),
            RegionShape::DoubleCone { center, radius } => {
                let n_lo = ((center.t - radius) / h).floor() as i64;
                let n_hi = ((center.t + radius) / h).ceil() as i64;
                let j_lo = ((center.x - radius) / h).floor() as i64;
                let j_hi = ((center.x + radius) / h).ceil() as i64;
                let mut out = BTreeSet::new();
                for n in n_lo..=n_hi {
                    for j in j_lo..=j_hi {
                        let node = Node::new(n, j);
                        if self.contains_node(node) {
                            out.insert(Node::new(n, m.wrap_j(j)));
                        }
                    }
                }
                out.into_iter().collect()
            }
            RegionShape::Slab { .. } => {
                let (n0, n1) = m.n_range();
                let (j0, j1) = m.j_range();
                let mut out = Vec::new();
                for n in n0..=n1 {
                    if !self.contains_node(Node::new(n, j0)) {
                        continue;
                    }
                    out.extend((j0..=j1).map(|j| Node::new(n, j)));
                }
                out
            }
        }
    }

    pub fn is_empty(&self) -> bool {
        self.nodes().is_empty()
    }

    /// True when `self` is contained in `other` node by node.
    pub fn is_subset_of(&self, other: &Region) -> bool {
        self.nodes().into_iter().all(|c| other.contains_node(c))
    }
}

/// Window-sized boolean masks.
struct Mask<'a> {
    m: &'a Spacetime2D,
    bits: Vec<bool>,
}

impl<'a> Mask<'a> {
    fn new(m: &'a Spacetime2D) -> Self {
        Mask { m, bits: vec![false; m.nt() * m.nx()] }
    }
    fn idx(&self, node: Node) -> Option<usize> {
        if !self.m.contains_node(node) {
            return None;
        }
        let j = self.m.wrap_j(node.j);
        Some((node.n - self.m.n_range().0) as usize * self.m.nx() + (j - self.m.j_range().0) as usize)
    }
    fn get(&self, node: Node) -> bool {
        self.idx(node).map(|i| self.bits[i]).unwrap_or(false)
    }
    fn set(&mut self, node: Node) {
        if let Some(i) = self.idx(node) {
            self.bits[i] = true;
        }
    }
}

/// Lattice causal future and past of a region (nodes reachable by at least one
/// causal step, each step going one time level forward to at most three neighbours).
/// Returns `(future, past)` as window masks indexed `(n - n_min) * nx + (j - j_min)`.
pub fn lattice_causal_hull(m: &Spacetime2D, o: &Region) -> (Vec<bool>, Vec<bool>) {
    let mut inside = Mask::new(m);
    for c in o.nodes() {
        inside.set(c);
    }
    let (n0, n1) = m.n_range();
    let (j0, j1) = m.j_range();
    let mut fut = Mask::new(m);
    for n in (n0 + 1)..=n1 {
        for j in j0..=j1 {
            let reach = (-1..=1).any(|d| {
                let prev = Node::new(n - 1, j + d);
                inside.get(prev) || fut.get(prev)
            });
            if reach {
                fut.set(Node::new(n, j));
            }
        }
    }
    let mut past = Mask::new(m);
    for n in (n0..n1).rev() {
        for j in j0..=j1 {
            let reach = (-1..=1).any(|d| {
                let next = Node::new(n + 1, j + d);
                inside.get(next) || past.get(next)
            });
            if reach {
                past.set(Node::new(n, j));
            }
        }
    }
    (fut.bits, past.bits)
}

/// Decides lattice causal convexity: no lattice causal path may leave the region
/// and come back. Equivalently `J+(O) ∩ J-(O) ⊂ O` on the lattice.
pub fn is_causally_convex(m: &Spacetime2D, o: &Region) -> bool {
    let (fut, past) = lattice_causal_hull(m, o);
    let mut inside = Mask::new(m);
    for c in o.nodes() {
        if !m.contains_node(c) {
            return false;
        }
        inside.set(c);
    }
    !fut.iter().zip(&past).zip(&inside.bits).any(|((&f, &p), &i)| f && p && !i)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spacetime::{causal_relation, CausalType};

    fn mink(h: f64) -> Spacetime2D {
        Spacetime2D::minkowski(0.0, h, (-4.0, 4.0), (-5.0, 5.0)).unwrap()
    }

    fn union(m: &Spacetime2D, a: &Region, b: &Region) -> Region {
        Region::cells(m, a.nodes().into_iter().chain(b.nodes())).unwrap()
    }

    #[test]
    fn double_cones_are_convex() {
        let m = mink(0.125);
        for (t, x, r) in [(0.0, 0.0, 1.0), (0.3, -1.7, 1.3), (-1.0, 2.0, 0.6)] {
            let o = Region::double_cone(&m, Point::new(t, x), r).unwrap();
            assert!(is_causally_convex(&m, &o));
        }
    }

    #[test]
    fn timelike_stacked_cones_are_not_convex() {
        let m = mink(0.125);
        let a = Region::double_cone(&m, Point::new(-2.0, 0.0), 1.5).unwrap();
        let b = Region::double_cone(&m, Point::new(2.0, 0.0), 1.5).unwrap();
        assert!(!is_causally_convex(&m, &union(&m, &a, &b)));
        // (t, x) = (-2, -1) and (2, 1) lie in the two cones and are timelike related.
        assert!(a.contains_point(Point::new(-2.0, -1.0)) && b.contains_point(Point::new(2.0, 1.0)));
        assert_eq!(causal_relation(&m, Point::new(-2.0, -1.0), Point::new(2.0, 1.0)).unwrap(), CausalType::Timelike);
    }

    #[test]
    fn spacelike_side_by_side_cones_stay_convex() {
        let m = mink(0.125);
        let a = Region::double_cone(&m, Point::new(0.0, -2.0), 1.5).unwrap();
        let b = Region::double_cone(&m, Point::new(0.0, 2.0), 1.5).unwrap();
        assert!(is_causally_convex(&m, &union(&m, &a, &b)));
    }

    #[test]
    fn slab_on_cylinder_is_convex() {
        let c = Spacetime2D::cylinder(10.0, 0.0, 0.125, (-2.0, 2.0)).unwrap();
        let s = Region::slab(&c, -0.5, 0.5).unwrap();
        assert!(is_causally_convex(&c, &s));
        // Removing one interior cell breaks convexity.
        let mut nodes = s.nodes();
        nodes.retain(|n| *n != Node::new(0, 3));
        assert!(!is_causally_convex(&c, &Region::cells(&c, nodes).unwrap()));
    }

    #[test]
    fn lattice_hull_agrees_with_continuum_relation() {
        let m = Spacetime2D::minkowski(0.0, 0.25, (-2.0, 2.0), (-2.0, 2.0)).unwrap();
        let o = Region::cells(&m, [Node::new(0, 0)]).unwrap();
        let (fut, past) = lattice_causal_hull(&m, &o);
        let (n0, _) = m.n_range();
        let (j0, _) = m.j_range();
        for n in m.n_range().0..=m.n_range().1 {
            for j in m.j_range().0..=m.j_range().1 {
                if n == 0 && j == 0 {
                    continue;
                }
                let i = (n - n0) as usize * m.nx() + (j - j0) as usize;
                let rel = causal_relation(&m, m.point_of(Node::new(0, 0)), m.point_of(Node::new(n, j))).unwrap();
                assert_eq!(fut[i] || past[i], rel != CausalType::Spacelike, "node ({n},{j})");
            }
        }
    }

    #[test]
    fn region_membership_on_cylinder_wraps() {
        let c = Spacetime2D::cylinder(10.0, 0.0, 0.5, (-2.0, 2.0)).unwrap();
        let o = Region::double_cone(&c, Point::new(0.0, 9.5), 1.0).unwrap();
        assert!(o.contains_point(Point::new(0.0, 0.25)));
        assert!(o.contains_node(Node::new(0, 0)));
        assert!(o.nodes().iter().all(|n| n.j >= 0 && n.j < 20));
    }
}
