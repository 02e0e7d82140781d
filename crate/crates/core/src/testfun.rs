//! Compactly supported test functions sampled on the lattice, and their
//! pushforwards along embeddings.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::spacetime::{Embedding, Node, Point, Region, Spacetime2D};

/// Lattice rectangle `[n0, n0 + nt) x [j0, j0 + nx)`. On the cylinder the
/// spatial range is always the full circle `[0, N)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SupportBox {
    pub n0: i64,
    pub j0: i64,
    pub nt: usize,
    pub nx: usize,
}

impl SupportBox {
    pub fn n_end(&self) -> i64 {
        self.n0 + self.nt as i64
    }
    pub fn j_end(&self) -> i64 {
        self.j0 + self.nx as i64
    }
    pub fn is_empty(&self) -> bool {
        self.nt == 0 || self.nx == 0
    }
}

/// A real test function: grid samples over a support box whose outer layer is zero.
#[derive(Clone, Debug, PartialEq)]
pub struct TestFunction {
    ambient: Spacetime2D,
    bx: SupportBox,
    samples: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct TestFunctionJson {
    ambient_id: String,
    support_box: SupportBox,
    samples: Vec<f64>,
}

impl TestFunction {
    pub fn zero(m: &Spacetime2D) -> Self {
        let nx = m.period().unwrap_or(0) as usize;
        TestFunction { ambient: *m, bx: SupportBox { n0: 0, j0: 0, nt: 0, nx }, samples: Vec::new() }
    }

    /// Builds a function from raw samples over `bx` (row-major, time rows).
    /// The box is trimmed to the nonzero samples and padded with one zero layer.
    pub fn from_samples(m: &Spacetime2D, bx: SupportBox, samples: Vec<f64>) -> Result<Self> {
        if samples.len() != bx.nt * bx.nx {
            return Err(Error::DimensionMismatch { expected: bx.nt * bx.nx, got: samples.len() });
        }
        if let Some(p) = m.period() {
            if bx.nx != p as usize || bx.j0 != 0 {
                return Err(Error::DomainMismatch("cylinder test functions span the full circle".into()));
            }
        }
        let mut rows: Option<(usize, usize)> = None;
        let mut cols: Option<(usize, usize)> = None;
        for r in 0..bx.nt {
            for c in 0..bx.nx {
                if samples[r * bx.nx + c] != 0.0 {
                    rows = Some(rows.map_or((r, r), |(a, b)| (a.min(r), b.max(r))));
                    cols = Some(cols.map_or((c, c), |(a, b)| (a.min(c), b.max(c))));
                }
            }
        }
        let (Some((r0, r1)), Some((c0, c1))) = (rows, cols) else {
            return Ok(Self::zero(m));
        };
        let (c0, c1, pad) = if m.is_cylinder() { (0, bx.nx - 1, 0) } else { (c0, c1, 1) };
        let out = SupportBox {
            n0: bx.n0 + r0 as i64 - 1,
            j0: bx.j0 + c0 as i64 - pad,
            nt: r1 - r0 + 3,
            nx: c1 - c0 + 1 + 2 * pad as usize,
        };
        let corner_lo = Node::new(out.n0, out.j0);
        let corner_hi = Node::new(out.n_end() - 1, out.j_end() - 1);
        if !m.contains_node(corner_lo) || !m.contains_node(corner_hi) {
            return Err(Error::OutOfDomain(format!(
                "support box rows {}..{} cols {}..{} leaves the window",
                out.n0,
                out.n_end(),
                out.j0,
                out.j_end()
            )));
        }
        let mut data = vec![0.0; out.nt * out.nx];
        for r in r0..=r1 {
            for c in c0..=c1 {
                let v = samples[r * bx.nx + c];
                let (rr, cc) = (r - r0 + 1, c - c0 + pad as usize);
                data[rr * out.nx + cc] = v;
            }
        }
        Ok(TestFunction { ambient: *m, bx: out, samples: data })
    }

    /// Builds a function from a closure evaluated at every node of `bx`.
    pub fn from_fn(m: &Spacetime2D, bx: SupportBox, f: impl Fn(Node) -> f64) -> Result<Self> {
        let mut samples = Vec::with_capacity(bx.nt * bx.nx);
        for n in bx.n0..bx.n_end() {
            for j in bx.j0..bx.j_end() {
                samples.push(f(Node::new(n, j)));
            }
        }
        Self::from_samples(m, bx, samples)
    }

    pub fn ambient(&self) -> &Spacetime2D {
        &self.ambient
    }

    pub fn support_box(&self) -> SupportBox {
        self.bx
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn is_zero(&self) -> bool {
        self.samples.iter().all(|&v| v == 0.0)
    }

    pub fn value(&self, node: Node) -> f64 {
        let j = self.ambient.wrap_j(node.j);
        if node.n < self.bx.n0 || node.n >= self.bx.n_end() || j < self.bx.j0 || j >= self.bx.j_end() {
            return 0.0;
        }
        self.samples[(node.n - self.bx.n0) as usize * self.bx.nx + (j - self.bx.j0) as usize]
    }

    /// Nodes carrying a nonzero sample, in row-major order.
    pub fn support_nodes(&self) -> Vec<Node> {
        let mut out = Vec::new();
        for r in 0..self.bx.nt {
            for c in 0..self.bx.nx {
                if self.samples[r * self.bx.nx + c] != 0.0 {
                    out.push(Node::new(self.bx.n0 + r as i64, self.bx.j0 + c as i64));
                }
            }
        }
        out
    }

    /// First and last time rows holding nonzero samples.
    pub fn row_range(&self) -> Option<(i64, i64)> {
        (!self.is_zero()).then(|| (self.bx.n0 + 1, self.bx.n_end() - 2))
    }

    /// Samples of row `n` on columns `c0 .. c0 + width` (indices wrapped on the cylinder).
    pub(crate) fn fill_row(&self, n: i64, c0: i64, out: &mut [f64]) {
        if n < self.bx.n0 || n >= self.bx.n_end() {
            return;
        }
        let base = (n - self.bx.n0) as usize * self.bx.nx;
        let row = &self.samples[base..base + self.bx.nx];
        if self.ambient.is_cylinder() {
            for (k, o) in out.iter_mut().enumerate() {
                *o += row[self.ambient.wrap_j(c0 + k as i64) as usize];
            }
        } else {
            let lo = self.bx.j0.max(c0);
            let hi = self.bx.j_end().min(c0 + out.len() as i64);
            for j in lo..hi {
                out[(j - c0) as usize] += row[(j - self.bx.j0) as usize];
            }
        }
    }

    fn check_same(&self, other: &TestFunction) -> Result<()> {
        if self.ambient != other.ambient {
            return Err(Error::AmbientMismatch);
        }
        Ok(())
    }

    /// `a * self + b * other`, evaluated sample by sample.
    pub fn lincomb(&self, a: f64, other: &TestFunction, b: f64) -> Result<TestFunction> {
        self.check_same(other)?;
        if self.is_zero() && other.is_zero() {
            return Ok(Self::zero(&self.ambient));
        }
        let boxes: Vec<SupportBox> = [self, other].iter().filter(|f| !f.is_zero()).map(|f| f.bx).collect();
        let n0 = boxes.iter().map(|b| b.n0).min().unwrap();
        let n1 = boxes.iter().map(|b| b.n_end()).max().unwrap();
        let j0 = boxes.iter().map(|b| b.j0).min().unwrap();
        let j1 = boxes.iter().map(|b| b.j_end()).max().unwrap();
        let bx = SupportBox { n0, j0, nt: (n1 - n0) as usize, nx: (j1 - j0) as usize };
        Self::from_fn(&self.ambient, bx, |node| a * self.value(node) + b * other.value(node))
    }

    pub fn add(&self, other: &TestFunction) -> Result<TestFunction> {
        self.lincomb(1.0, other, 1.0)
    }

    pub fn sub(&self, other: &TestFunction) -> Result<TestFunction> {
        self.lincomb(1.0, other, -1.0)
    }

    pub fn scale(&self, a: f64) -> TestFunction {
        if a == 0.0 {
            return Self::zero(&self.ambient);
        }
        TestFunction { ambient: self.ambient, bx: self.bx, samples: self.samples.iter().map(|v| a * v).collect() }
    }

    /// Discrete Klein-Gordon operator
    /// `(w[n+1,j] + w[n-1,j] - w[n,j+1] - w[n,j-1]) / h^2 + m^2 w[n,j]`.
    pub fn apply_kg(&self) -> Result<TestFunction> {
        if self.is_zero() {
            return Ok(self.clone());
        }
        let m = &self.ambient;
        let (h2, m2) = (m.h() * m.h(), m.mass() * m.mass());
        let grow = if m.is_cylinder() { 0 } else { 1 };
        let bx = SupportBox { n0: self.bx.n0 - 1, j0: self.bx.j0 - grow, nt: self.bx.nt + 2, nx: self.bx.nx + 2 * grow as usize };
        Self::from_fn(m, bx, |p| {
            let w = |dn: i64, dj: i64| self.value(Node::new(p.n + dn, p.j + dj));
            (w(1, 0) + w(-1, 0) - w(0, 1) - w(0, -1)) / h2 + m2 * w(0, 0)
        })
    }

    /// `h^2 * sum f`.
    pub fn integral(&self) -> f64 {
        let h = self.ambient.h();
        h * h * self.samples.iter().sum::<f64>()
    }

    /// Discrete `L^2` norm `(h^2 sum f^2)^{1/2}`.
    pub fn l2_norm(&self) -> f64 {
        let h = self.ambient.h();
        (h * h * self.samples.iter().map(|v| v * v).sum::<f64>()).sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.samples.iter().fold(0.0, |a, v| a.max(v.abs()))
    }

    /// `h^2 sum f g`.
    pub fn pairing(&self, other: &TestFunction) -> Result<f64> {
        self.check_same(other)?;
        let h = self.ambient.h();
        Ok(h * h * self.support_nodes().iter().map(|&p| self.value(p) * other.value(p)).sum::<f64>())
    }

    /// True when every nonzero sample sits on a node of `o`.
    pub fn supported_in(&self, o: &Region) -> bool {
        o.ambient().same_geometry(&self.ambient) && self.support_nodes().into_iter().all(|p| o.contains_node(p))
    }

    pub fn to_json(&self) -> String {
        let doc = TestFunctionJson { ambient_id: self.ambient.id(), support_box: self.bx, samples: self.samples.clone() };
        serde_json::to_string(&doc).expect("test function serializes")
    }

    pub fn from_json(m: &Spacetime2D, json: &str) -> Result<TestFunction> {
        let doc: TestFunctionJson = serde_json::from_str(json).map_err(|e| Error::Config(e.to_string()))?;
        if doc.ambient_id != m.id() {
            return Err(Error::AmbientMismatch);
        }
        Self::from_samples(m, doc.support_box, doc.samples)
    }

    /// One CSV row per support-box node: `n, j, t, x, value`.
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        out.write_record(["n", "j", "t", "x", "value"])?;
        let h = self.ambient.h();
        for r in 0..self.bx.nt {
            for c in 0..self.bx.nx {
                let (n, j) = (self.bx.n0 + r as i64, self.bx.j0 + c as i64);
                let v = self.samples[r * self.bx.nx + c];
                out.write_record(&[
                    n.to_string(),
                    j.to_string(),
                    (n as f64 * h).to_string(),
                    (j as f64 * h).to_string(),
                    v.to_string(),
                ])?;
            }
        }
        out.flush()?;
        Ok(())
    }
}

/// Signed spatial offset `x - xc`, taken to the nearest image on the cylinder.
fn offset(m: &Spacetime2D, x: f64, xc: f64) -> f64 {
    if m.is_cylinder() {
        let l = m.circumference();
        (x - xc + 0.5 * l).rem_euclid(l) - 0.5 * l
    } else {
        x - xc
    }
}

/// The C-infinity bump `amplitude * exp(-1 / (1 - s))`, `s = (dt/rt)^2 + (dx/rx)^2`.
pub fn bump(m: &Spacetime2D, center: Point, radii: (f64, f64), amplitude: f64) -> Result<TestFunction> {
    let (rt, rx) = radii;
    if !(rt > 0.0 && rx > 0.0) {
        return Err(Error::OutOfDomain("bump radii must be positive".into()));
    }
    if m.is_cylinder() && 2.0 * rx >= m.circumference() {
        return Err(Error::OutOfDomain("bump wraps around the cylinder".into()));
    }
    for p in [Point::new(center.t - rt, center.x - rx), Point::new(center.t + rt, center.x + rx)] {
        if !m.contains_point(p) {
            return Err(Error::OutOfDomain(format!("bump at ({}, {}) with radii ({rt}, {rx})", center.t, center.x)));
        }
    }
    if amplitude == 0.0 {
        return Ok(TestFunction::zero(m));
    }
    let h = m.h();
    let n0 = ((center.t - rt) / h).floor() as i64;
    let n1 = ((center.t + rt) / h).ceil() as i64;
    let bx = match m.period() {
        Some(p) => SupportBox { n0, j0: 0, nt: (n1 - n0 + 1) as usize, nx: p as usize },
        None => {
            let j0 = ((center.x - rx) / h).floor() as i64;
            let j1 = ((center.x + rx) / h).ceil() as i64;
            SupportBox { n0, j0, nt: (n1 - n0 + 1) as usize, nx: (j1 - j0 + 1) as usize }
        }
    };
    TestFunction::from_fn(m, bx, |node| {
        let dt = (node.n as f64 * h - center.t) / rt;
        let dx = offset(m, node.j as f64 * h, center.x) / rx;
        let s = dt * dt + dx * dx;
        if s < 1.0 {
            amplitude * (-1.0 / (1.0 - s)).exp()
        } else {
            0.0
        }
    })
}

/// Bilinear interpolation of the samples of `f` at a point.
fn bilinear(f: &TestFunction, p: Point) -> f64 {
    let h = f.ambient.h();
    let (ut, ux) = (p.t / h, p.x / h);
    let (n, j) = (ut.floor(), ux.floor());
    let (a, b) = (ut - n, ux - j);
    let (n, j) = (n as i64, j as i64);
    let v = |dn: i64, dj: i64| f.value(Node::new(n + dn, j + dj));
    (1.0 - a) * ((1.0 - b) * v(0, 0) + b * v(0, 1)) + a * ((1.0 - b) * v(1, 0) + b * v(1, 1))
}

/// Pushforward `psi_* f`: exact relocation for grid translations, bilinear
/// resampling at preimages otherwise.
pub fn pushforward(psi: &Embedding, f: &TestFunction) -> Result<TestFunction> {
    let host = psi.source().host();
    if !host.same_geometry(f.ambient()) {
        return Err(Error::DomainMismatch("test function does not live on the embedding source".into()));
    }
    if let Some(o) = psi.source().region() {
        if !f.supported_in(o) {
            return Err(Error::DomainMismatch("test function is not supported in the source region".into()));
        }
    }
    let target = psi.target();
    if f.is_zero() {
        return Ok(TestFunction::zero(target));
    }
    let map = psi.map();
    let h = host.h();
    if let Some((dn, dj)) = map.cell_shift() {
        let nodes = f.support_nodes();
        let mut n0 = i64::MAX;
        let (mut n1, mut j0, mut j1) = (i64::MIN, i64::MAX, i64::MIN);
        for p in &nodes {
            n0 = n0.min(p.n + dn);
            n1 = n1.max(p.n + dn);
            j0 = j0.min(p.j + dj);
            j1 = j1.max(p.j + dj);
        }
        let bx = match target.period() {
            Some(p) => SupportBox { n0, j0: 0, nt: (n1 - n0 + 1) as usize, nx: p as usize },
            None => SupportBox { n0, j0, nt: (n1 - n0 + 1) as usize, nx: (j1 - j0 + 1) as usize },
        };
        if !target.contains_node(Node::new(n0, j0)) || !target.contains_node(Node::new(n1, j1)) {
            return Err(Error::OutOfDomain("pushforward leaves the target window".into()));
        }
        let mut samples = vec![0.0; bx.nt * bx.nx];
        for p in nodes {
            let (n, j) = (p.n + dn, target.wrap_j(p.j + dj));
            samples[(n - bx.n0) as usize * bx.nx + (j - bx.j0) as usize] = f.value(p);
        }
        return TestFunction::from_samples(target, bx, samples);
    }
    let fb = f.support_box();
    let mut t_lo = f64::MAX;
    let (mut t_hi, mut x_lo, mut x_hi) = (f64::MIN, f64::MAX, f64::MIN);
    for (n, j) in [(fb.n0, fb.j0), (fb.n0, fb.j_end()), (fb.n_end(), fb.j0), (fb.n_end(), fb.j_end())] {
        let p = map.apply(h, Point::new(n as f64 * h, j as f64 * h));
        t_lo = t_lo.min(p.t);
        t_hi = t_hi.max(p.t);
        x_lo = x_lo.min(p.x);
        x_hi = x_hi.max(p.x);
    }
    let n0 = (t_lo / h).floor() as i64 - 1;
    let n1 = (t_hi / h).ceil() as i64 + 1;
    let bx = match target.period() {
        Some(p) => SupportBox { n0, j0: 0, nt: (n1 - n0 + 1) as usize, nx: p as usize },
        None => {
            let j0 = (x_lo / h).floor() as i64 - 1;
            let j1 = (x_hi / h).ceil() as i64 + 1;
            SupportBox { n0, j0, nt: (n1 - n0 + 1) as usize, nx: (j1 - j0 + 1) as usize }
        }
    };
    // A plane chart mapped onto the cylinder is unwrapped over the windings its image meets.
    let windings = match (target.period(), host.is_cylinder()) {
        (Some(_), false) => {
            let l = target.circumference();
            ((x_lo / l).floor() as i64..=(x_hi / l).floor() as i64).map(|k| k as f64 * l).collect()
        }
        _ => vec![0.0],
    };
    let mut samples = vec![0.0; bx.nt * bx.nx];
    for r in 0..bx.nt {
        for c in 0..bx.nx {
            let y = Point::new((bx.n0 + r as i64) as f64 * h, (bx.j0 + c as i64) as f64 * h);
            samples[r * bx.nx + c] = windings.iter().map(|w| bilinear(f, map.apply_inverse(h, Point::new(y.t, y.x + w)))).sum();
        }
    }
    TestFunction::from_samples(target, bx, samples)
}
