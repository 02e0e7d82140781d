//! Green operators of the lattice Klein-Gordon operator
//!
//! ```text
//! (P w)[n, j] = (w[n+1, j] + w[n-1, j] - w[n, j+1] - w[n, j-1]) / h^2 + m^2 w[n, j]
//! ```
//!
//! At `dt = dx = h` the explicit scheme `P u = f` propagates exactly one cell
//! per step, so the lattice domain of dependence is the light cone and the
//! retarded solution vanishes identically outside the forward cone of the
//! source.
//!
//! On the Minkowski plane every solver has infinite-line semantics: columns
//! are added as the solution spreads, so values inside the window never feel
//! an artificial boundary.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::spacetime::{Node, Spacetime2D};
use crate::testfun::{SupportBox, TestFunction};

/// Lattice values over rows `[n0, n0 + nt)` and columns `[j0, j0 + nx)`;
/// values outside the block read as zero.
#[derive(Clone, Debug, PartialEq)]
pub struct GridSolution {
    ambient: Spacetime2D,
    n0: i64,
    j0: i64,
    nt: usize,
    nx: usize,
    values: Vec<f64>,
}

/// Field value and centered time derivative on the grid line `t = t0`,
/// over columns `[j0, j0 + phi.len())`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CauchyData {
    pub t0: f64,
    pub j0: i64,
    pub phi: Vec<f64>,
    pub pi: Vec<f64>,
}

impl CauchyData {
    pub fn zero(t0: f64) -> Self {
        CauchyData { t0, j0: 0, phi: Vec::new(), pi: Vec::new() }
    }

    pub fn len(&self) -> usize {
        self.phi.len()
    }

    pub fn is_empty(&self) -> bool {
        self.phi.is_empty()
    }

    pub fn phi_at(&self, j: i64) -> f64 {
        let k = j - self.j0;
        if k < 0 || k >= self.phi.len() as i64 {
            0.0
        } else {
            self.phi[k as usize]
        }
    }

    pub fn pi_at(&self, j: i64) -> f64 {
        let k = j - self.j0;
        if k < 0 || k >= self.pi.len() as i64 {
            0.0
        } else {
            self.pi[k as usize]
        }
    }

    /// Column range `[lo, hi)` covered by either of two data sets.
    pub(crate) fn joint_range(&self, other: &CauchyData) -> (i64, i64) {
        match (self.is_empty(), other.is_empty()) {
            (true, true) => (0, 0),
            (true, false) => (other.j0, other.j0 + other.len() as i64),
            (false, true) => (self.j0, self.j0 + self.len() as i64),
            (false, false) => (self.j0.min(other.j0), (self.j0 + self.len() as i64).max(other.j0 + other.len() as i64)),
        }
    }

    /// `a * self + b * other` over the joint column range.
    pub fn lincomb(&self, a: f64, other: &CauchyData, b: f64) -> CauchyData {
        let (lo, hi) = self.joint_range(other);
        let phi = (lo..hi).map(|j| a * self.phi_at(j) + b * other.phi_at(j)).collect();
        let pi = (lo..hi).map(|j| a * self.pi_at(j) + b * other.pi_at(j)).collect();
        CauchyData { t0: self.t0, j0: lo, phi, pi }
    }

    pub fn max_abs(&self) -> f64 {
        self.phi.iter().chain(&self.pi).fold(0.0, |a, v| a.max(v.abs()))
    }

    /// Drops leading and trailing columns where both arrays vanish.
    pub fn trimmed(mut self) -> CauchyData {
        let nz = |k: usize| self.phi[k] != 0.0 || self.pi[k] != 0.0;
        let Some(first) = (0..self.len()).find(|&k| nz(k)) else {
            return CauchyData::zero(self.t0);
        };
        let last = (0..self.len()).rev().find(|&k| nz(k)).unwrap();
        self.phi = self.phi[first..=last].to_vec();
        self.pi = self.pi[first..=last].to_vec();
        self.j0 += first as i64;
        self
    }

    /// One CSV row per column: `j, phi, pi`.
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        out.write_record(["j", "phi", "pi"])?;
        for k in 0..self.len() {
            out.write_record(&[(self.j0 + k as i64).to_string(), self.phi[k].to_string(), self.pi[k].to_string()])?;
        }
        out.flush()?;
        Ok(())
    }
}

struct Stencil {
    h2: f64,
    mh2: f64,
    periodic: bool,
}

impl Stencil {
    fn new(m: &Spacetime2D) -> Self {
        let h2 = m.h() * m.h();
        Stencil { h2, mh2: h2 * m.mass() * m.mass(), periodic: m.is_cylinder() }
    }

    /// `next = cur[j+1] + cur[j-1] - prev - h^2 m^2 cur + h^2 src`.
    fn step(&self, prev: &[f64], cur: &[f64], src: Option<&[f64]>, next: &mut [f64]) {
        let w = cur.len();
        for c in 0..w {
            let left = if c > 0 {
                cur[c - 1]
            } else if self.periodic {
                cur[w - 1]
            } else {
                0.0
            };
            let right = if c + 1 < w {
                cur[c + 1]
            } else if self.periodic {
                cur[0]
            } else {
                0.0
            };
            let mut v = right + left - prev[c] - self.mh2 * cur[c];
            if let Some(s) = src {
                v += self.h2 * s[c];
            }
            next[c] = v;
        }
    }
}

/// Runs the scheme from rows `(n_cur - dir, n_cur)` towards `n_stop`, adding
/// `h^2 f` at each source row, and hands every new row to `emit`.
#[allow(clippy::too_many_arguments)]
fn leapfrog(
    m: &Spacetime2D,
    mut prev: Vec<f64>,
    mut cur: Vec<f64>,
    mut n_cur: i64,
    dir: i64,
    n_stop: i64,
    src: Option<&TestFunction>,
    c0: i64,
    mut emit: impl FnMut(i64, &[f64]),
) {
    let st = Stencil::new(m);
    let w = cur.len();
    let mut next = vec![0.0; w];
    let mut srow = vec![0.0; w];
    while n_cur != n_stop {
        let src_row = match src {
            Some(f) => {
                srow.iter_mut().for_each(|v| *v = 0.0);
                f.fill_row(n_cur, c0, &mut srow);
                Some(srow.as_slice())
            }
            None => None,
        };
        st.step(&prev, &cur, src_row, &mut next);
        n_cur += dir;
        emit(n_cur, &next);
        std::mem::swap(&mut prev, &mut cur);
        std::mem::swap(&mut cur, &mut next);
    }
}

/// Columns `[c0, c0 + width)` needed to reproduce columns `request` exactly
/// after `steps` steps from data living on `support` (inclusive ranges).
fn column_span(m: &Spacetime2D, support: (i64, i64), steps: i64, request: Option<(i64, i64)>) -> Option<(i64, usize)> {
    if let Some(p) = m.period() {
        return Some((0, p as usize));
    }
    let mut lo = support.0 - steps - 1;
    let mut hi = support.1 + steps + 1;
    if let Some((q0, q1)) = request {
        lo = lo.max(q0 - steps - 1);
        hi = hi.min(q1 + steps + 1);
    }
    (lo <= hi).then(|| (lo, (hi - lo + 1) as usize))
}

impl GridSolution {
    fn zeros(m: &Spacetime2D, rows: (i64, i64), cols: (i64, i64)) -> Self {
        let nt = (rows.1 - rows.0 + 1).max(0) as usize;
        let nx = (cols.1 - cols.0 + 1).max(0) as usize;
        GridSolution { ambient: *m, n0: rows.0, j0: cols.0, nt, nx, values: vec![0.0; nt * nx] }
    }

    fn window(m: &Spacetime2D) -> ((i64, i64), (i64, i64)) {
        (m.n_range(), m.j_range())
    }

    /// Samples a closure on every window node.
    pub fn from_fn(m: &Spacetime2D, f: impl Fn(Node) -> f64) -> Self {
        let (rows, cols) = Self::window(m);
        let mut u = Self::zeros(m, rows, cols);
        for n in rows.0..=rows.1 {
            for j in cols.0..=cols.1 {
                let k = u.index(n, j).unwrap();
                u.values[k] = f(Node::new(n, j));
            }
        }
        u
    }

    fn index(&self, n: i64, j: i64) -> Option<usize> {
        let j = self.ambient.wrap_j(j);
        let (r, c) = (n - self.n0, j - self.j0);
        (r >= 0 && c >= 0 && (r as usize) < self.nt && (c as usize) < self.nx).then(|| r as usize * self.nx + c as usize)
    }

    /// Copies a computed row over columns starting at `c0` into the block.
    fn store_row(&mut self, n: i64, c0: i64, row: &[f64]) {
        if n < self.n0 || n >= self.n0 + self.nt as i64 {
            return;
        }
        let base = (n - self.n0) as usize * self.nx;
        for (k, v) in row.iter().enumerate() {
            let j = c0 + k as i64;
            let c = j - self.j0;
            if c >= 0 && (c as usize) < self.nx {
                self.values[base + c as usize] = *v;
            }
        }
    }

    pub fn ambient(&self) -> &Spacetime2D {
        &self.ambient
    }

    /// Inclusive row range.
    pub fn rows(&self) -> (i64, i64) {
        (self.n0, self.n0 + self.nt as i64 - 1)
    }

    /// Inclusive column range.
    pub fn cols(&self) -> (i64, i64) {
        (self.j0, self.j0 + self.nx as i64 - 1)
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn get(&self, n: i64, j: i64) -> f64 {
        self.index(n, j).map_or(0.0, |k| self.values[k])
    }

    pub fn row(&self, n: i64) -> Option<&[f64]> {
        (n >= self.n0 && n < self.n0 + self.nt as i64).then(|| {
            let base = (n - self.n0) as usize * self.nx;
            &self.values[base..base + self.nx]
        })
    }

    /// `self - other` over this block.
    pub fn sub(&self, other: &GridSolution) -> GridSolution {
        let mut out = self.clone();
        for n in 0..self.nt as i64 {
            for c in 0..self.nx as i64 {
                let k = (n as usize) * self.nx + c as usize;
                out.values[k] -= other.get(self.n0 + n, self.j0 + c);
            }
        }
        out
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |a, v| a.max(v.abs()))
    }

    /// Discrete `L^2` norm over the block.
    pub fn l2_norm(&self) -> f64 {
        let h = self.ambient.h();
        (h * h * self.values.iter().map(|v| v * v).sum::<f64>()).sqrt()
    }

    /// `P u` at every node whose stencil lies inside the block.
    pub fn kg_residual(&self) -> GridSolution {
        let m = &self.ambient;
        let (h2, m2) = (m.h() * m.h(), m.mass() * m.mass());
        let (r0, r1) = self.rows();
        let (c0, c1) = self.cols();
        let (cl, ch) = if m.is_cylinder() { (c0, c1) } else { (c0 + 1, c1 - 1) };
        let mut out = Self::zeros(m, (r0 + 1, r1 - 1), (cl, ch));
        for n in r0 + 1..r1 {
            for j in cl..=ch {
                let u = |dn: i64, dj: i64| self.get(n + dn, j + dj);
                let v = (u(1, 0) + u(-1, 0) - u(0, 1) - u(0, -1)) / h2 + m2 * u(0, 0);
                let k = out.index(n, j).unwrap();
                out.values[k] = v;
            }
        }
        out
    }

    /// One CSV row per grid line: `n, t, v[j0], v[j0+1], ...`.
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        let mut header = vec!["n".to_string(), "t".to_string()];
        header.extend((self.j0..self.j0 + self.nx as i64).map(|j| format!("j{j}")));
        out.write_record(&header)?;
        let h = self.ambient.h();
        for r in 0..self.nt {
            let n = self.n0 + r as i64;
            let mut rec = vec![n.to_string(), (n as f64 * h).to_string()];
            rec.extend(self.values[r * self.nx..(r + 1) * self.nx].iter().map(|v| v.to_string()));
            out.write_record(&rec)?;
        }
        out.flush()?;
        Ok(())
    }

    pub fn to_json(&self) -> String {
        serde_json::json!({
            "ambient_id": self.ambient.id(),
            "rows": [self.rows().0, self.rows().1],
            "cols": [self.cols().0, self.cols().1],
            "values": self.values,
        })
        .to_string()
    }
}

fn check_ambient(m: &Spacetime2D, f: &TestFunction) -> Result<()> {
    if f.ambient() != m {
        return Err(Error::AmbientMismatch);
    }
    Ok(())
}

fn support_cols(f: &TestFunction) -> (i64, i64) {
    let b = f.support_box();
    (b.j0, b.j_end() - 1)
}

/// Retarded (`dir = 1`) or advanced (`dir = -1`) solution on rows `rows`,
/// exact on columns `cols` (the whole circle on the cylinder).
fn green_block(m: &Spacetime2D, f: &TestFunction, dir: i64, rows: (i64, i64), cols: Option<(i64, i64)>) -> GridSolution {
    green_block_scaled(m, f, dir, rows, cols).0
}

/// As [`green_block`], also returning the largest magnitude met during the march.
fn green_block_scaled(
    m: &Spacetime2D,
    f: &TestFunction,
    dir: i64,
    rows: (i64, i64),
    cols: Option<(i64, i64)>,
) -> (GridSolution, f64) {
    let Some((fa, fb)) = f.row_range() else {
        let cols = cols.unwrap_or((0, -1));
        return (GridSolution::zeros(m, rows, if m.is_cylinder() { m.j_range() } else { cols }), 0.0);
    };
    let (start, stop) = if dir > 0 { (fa, rows.1) } else { (fb, rows.0) };
    let steps = (stop - start) * dir;
    let span = if steps <= 0 { None } else { column_span(m, support_cols(f), steps, cols) };
    let block_cols = match (m.period(), cols, span) {
        (Some(p), _, _) => (0, p - 1),
        (None, Some(c), _) => c,
        (None, None, Some((c0, w))) => (c0, c0 + w as i64 - 1),
        (None, None, None) => (0, -1),
    };
    let mut out = GridSolution::zeros(m, rows, block_cols);
    let mut scale: f64 = 0.0;
    if let Some((c0, w)) = span {
        leapfrog(m, vec![0.0; w], vec![0.0; w], start, dir, stop, Some(f), c0, |n, row| {
            scale = row.iter().fold(scale, |a, v| a.max(v.abs()));
            out.store_row(n, c0, row)
        });
    }
    (out, scale)
}

fn window_cols(m: &Spacetime2D) -> Option<(i64, i64)> {
    (!m.is_cylinder()).then(|| m.j_range())
}

/// Retarded solution over the whole window.
pub fn retarded(m: &Spacetime2D, f: &TestFunction) -> Result<GridSolution> {
    check_ambient(m, f)?;
    Ok(green_block(m, f, 1, m.n_range(), window_cols(m)))
}

/// Advanced solution over the whole window.
pub fn advanced(m: &Spacetime2D, f: &TestFunction) -> Result<GridSolution> {
    check_ambient(m, f)?;
    Ok(green_block(m, f, -1, m.n_range(), window_cols(m)))
}

/// `E f = R f - A f` over the whole window.
pub fn causal_propagator(m: &Spacetime2D, f: &TestFunction) -> Result<GridSolution> {
    Ok(retarded(m, f)?.sub(&advanced(m, f)?))
}

/// Cauchy data of a solution on the grid line `t0`, over the solution's columns.
pub fn cauchy_data(m: &Spacetime2D, u: &GridSolution, t0: f64) -> Result<CauchyData> {
    if u.ambient() != m {
        return Err(Error::AmbientMismatch);
    }
    let h = m.h();
    let n = (t0 / h).round() as i64;
    if ((t0 / h) - n as f64).abs() > 1e-9 * (t0 / h).abs().max(1.0) {
        return Err(Error::OutOfWindow(t0));
    }
    let (r0, r1) = u.rows();
    if n - 1 < r0 || n + 1 > r1 {
        return Err(Error::OutOfWindow(t0));
    }
    let (up, mid, dn) = (u.row(n + 1).unwrap(), u.row(n).unwrap(), u.row(n - 1).unwrap());
    let pi = up.iter().zip(dn).map(|(a, b)| (a - b) / (2.0 * h)).collect();
    Ok(CauchyData { t0: n as f64 * h, j0: u.cols().0, phi: mid.to_vec(), pi })
}

/// Canonical Cauchy data of `E f` at `t = 0`: the full circle on the cylinder,
/// the nonzero stretch of the infinite line on the plane.
pub fn canonical_data(m: &Spacetime2D, f: &TestFunction) -> Result<CauchyData> {
    Ok(canonical_data_scaled(m, f)?.0)
}

/// Canonical data together with the largest magnitude met by either solver,
/// the natural scale for deciding when the data is rounding noise.
pub fn canonical_data_scaled(m: &Spacetime2D, f: &TestFunction) -> Result<(CauchyData, f64)> {
    check_ambient(m, f)?;
    let (r, sr) = green_block_scaled(m, f, 1, (-1, 1), None);
    let (a, sa) = green_block_scaled(m, f, -1, (-1, 1), None);
    let scale = sr.max(sa);
    let (lo, hi) = (r.cols().0.min(a.cols().0), r.cols().1.max(a.cols().1));
    if hi < lo {
        return Ok((CauchyData::zero(0.0), scale));
    }
    let mut e = GridSolution::zeros(m, (-1, 1), (lo, hi));
    for n in -1..=1 {
        for j in lo..=hi {
            let k = e.index(n, j).unwrap();
            e.values[k] = r.get(n, j) - a.get(n, j);
        }
    }
    let data = cauchy_data(m, &e, 0.0)?;
    Ok((if m.is_cylinder() { data } else { data.trimmed() }, scale))
}

/// Homogeneous solution with data `d` on rows `rows`, exact on columns `cols`
/// (the whole circle on the cylinder, everything reached on the plane if `None`).
pub fn evolve(m: &Spacetime2D, d: &CauchyData, rows: (i64, i64), cols: Option<(i64, i64)>) -> Result<GridSolution> {
    let h = m.h();
    let n0 = (d.t0 / h).round() as i64;
    if rows.0 > rows.1 {
        return Err(Error::OutOfWindow(rows.0 as f64 * h));
    }
    let reach = (rows.1 - n0).abs().max((rows.0 - n0).abs()) + 1;
    let dcols = if d.is_empty() { (0, -1) } else { (d.j0, d.j0 + d.len() as i64 - 1) };
    let span = if d.is_empty() { None } else { column_span(m, dcols, reach, cols) };
    let block_cols = match (m.period(), cols, span) {
        (Some(p), _, _) => (0, p - 1),
        (None, Some(c), _) => c,
        (None, None, Some((c0, w))) => (c0, c0 + w as i64 - 1),
        (None, None, None) => (0, -1),
    };
    let mut out = GridSolution::zeros(m, rows, block_cols);
    let Some((c0, w)) = span else {
        return Ok(out);
    };
    let st = Stencil::new(m);
    let mut u0 = vec![0.0; w];
    let mut p0 = vec![0.0; w];
    for k in 0..w {
        u0[k] = d.phi_at(c0 + k as i64);
        p0[k] = d.pi_at(c0 + k as i64);
    }
    // u[n0 +- 1] = (S u0 +- 2 h pi) / 2, where S u0 = u0[j+1] + u0[j-1] - h^2 m^2 u0.
    let zero = vec![0.0; w];
    let mut s = vec![0.0; w];
    st.step(&zero, &u0, None, &mut s);
    let up: Vec<f64> = (0..w).map(|k| 0.5 * (s[k] + 2.0 * h * p0[k])).collect();
    let dn: Vec<f64> = (0..w).map(|k| 0.5 * (s[k] - 2.0 * h * p0[k])).collect();
    out.store_row(n0, c0, &u0);
    out.store_row(n0 + 1, c0, &up);
    out.store_row(n0 - 1, c0, &dn);
    if rows.1 > n0 + 1 {
        leapfrog(m, u0.clone(), up.clone(), n0 + 1, 1, rows.1, None, c0, |n, row| out.store_row(n, c0, row));
    }
    if rows.0 < n0 - 1 {
        leapfrog(m, u0, dn, n0 - 1, -1, rows.0, None, c0, |n, row| out.store_row(n, c0, row));
    }
    Ok(out)
}

/// `sigma(a, b) = h * sum_j (phi_a pi_b - pi_a phi_b)` on a common grid line.
pub fn symplectic_data(m: &Spacetime2D, a: &CauchyData, b: &CauchyData) -> f64 {
    let (lo, hi) = (a.j0.max(b.j0), (a.j0 + a.len() as i64).min(b.j0 + b.len() as i64));
    let mut s = 0.0;
    for j in lo..hi {
        s += a.phi_at(j) * b.pi_at(j) - a.pi_at(j) * b.phi_at(j);
    }
    m.h() * s
}

/// Symplectic form of `E f` and `E g` on the reference line `t = 0`.
pub fn symplectic(m: &Spacetime2D, f: &TestFunction, g: &TestFunction) -> Result<f64> {
    Ok(symplectic_data(m, &canonical_data(m, f)?, &canonical_data(m, g)?))
}

/// `h^2 sum f * (G g)` where `G g` is the retarded (`dir = 1`) or advanced
/// (`dir = -1`) solution, computed only where `f` lives.
pub fn green_pairing(m: &Spacetime2D, f: &TestFunction, g: &TestFunction, dir: i64) -> Result<f64> {
    check_ambient(m, f)?;
    check_ambient(m, g)?;
    let Some(rows) = f.row_range() else {
        return Ok(0.0);
    };
    let cols = (!m.is_cylinder()).then(|| support_cols(f));
    let u = green_block(m, g, dir, rows, cols);
    let h = m.h();
    Ok(h * h * f.support_nodes().iter().map(|p| f.value(*p) * u.get(p.n, p.j)).sum::<f64>())
}

/// C-infinity step: 0 for `x <= 0`, 1 for `x >= 1`.
fn smoothstep(x: f64) -> f64 {
    let e = |y: f64| if y > 0.0 { (-1.0 / y).exp() } else { 0.0 };
    if x <= 0.0 {
        0.0
    } else if x >= 1.0 {
        1.0
    } else {
        e(x) / (e(x) + e(1.0 - x))
    }
}

/// Replaces `f` by `f'' = P(chi E f)` with `chi` switching from 0 to 1 across
/// the slab. `f''` is supported in the slab and `E f'' = E f`.
pub fn slab_compress(m: &Spacetime2D, f: &TestFunction, slab: (f64, f64)) -> Result<TestFunction> {
    check_ambient(m, f)?;
    slab_representative(m, &canonical_data(m, f)?, slab)
}

/// A test function supported in the slab whose propagator image is the
/// homogeneous solution with data `d`.
pub fn slab_representative(m: &Spacetime2D, d: &CauchyData, slab: (f64, f64)) -> Result<TestFunction> {
    let h = m.h();
    let n1 = (slab.0 / h - 1e-9).ceil() as i64;
    let n2 = (slab.1 / h + 1e-9).floor() as i64;
    if n2 <= n1 {
        return Err(Error::WindowTooSmall(format!("slab [{}, {}] holds fewer than two grid lines", slab.0, slab.1)));
    }
    let (w0, w1) = m.n_range();
    if n1 - 1 < w0 || n2 + 1 > w1 {
        return Err(Error::WindowTooSmall(format!("slab [{}, {}] is not inside the time window", slab.0, slab.1)));
    }
    let u = evolve(m, d, (n1 - 1, n2 + 1), None)?;
    let chi = |n: i64| smoothstep((n - n1) as f64 / (n2 - n1) as f64);
    let (c0, c1) = u.cols();
    let (h2, m2) = (h * h, m.mass() * m.mass());
    let w = |n: i64, j: i64| chi(n) * u.get(n, j);
    let bx = SupportBox { n0: n1 - 1, j0: c0 - 1, nt: (n2 - n1 + 3) as usize, nx: (c1 - c0 + 3).max(0) as usize };
    let bx = if let Some(p) = m.period() { SupportBox { j0: 0, nx: p as usize, ..bx } } else { bx };
    let out = TestFunction::from_fn(m, bx, |p| {
        if p.n < n1 || p.n > n2 {
            return 0.0;
        }
        (w(p.n + 1, p.j) + w(p.n - 1, p.j) - w(p.n, p.j + 1) - w(p.n, p.j - 1)) / h2 + m2 * w(p.n, p.j)
    });
    out.map_err(|e| match e {
        Error::OutOfDomain(msg) => Error::WindowTooSmall(msg),
        e => e,
    })
}
