//! Continuum Green operators of `box + m^2` on the Minkowski plane, evaluated
//! by quadrature in null coordinates. These are the reference values for the
//! lattice convergence studies.
//!
//! With `alpha, beta >= 0` parametrizing the backward cone,
//!
//! ```text
//! (R f)(t, x) = 1/4 ∫∫ J0(m sqrt(alpha beta)) f(t - (alpha+beta)/2, x - (beta-alpha)/2) dalpha dbeta
//! ```
//!
//! and the advanced operator integrates over the forward cone. `E = R - A`.

use crate::error::{Error, Result};
use crate::greens::causal_propagator;
use crate::spacetime::{Point, Spacetime2D};
use crate::testfun::{bump, TestFunction};

/// Bessel function `J0` from its power series. Accurate to rounding for `|z| <= 10`.
pub fn bessel_j0(z: f64) -> f64 {
    let q = 0.25 * z * z;
    let mut term = 1.0;
    let mut sum = 1.0;
    for k in 1..80 {
        term *= -q / (k as f64 * k as f64);
        sum += term;
        if term.abs() < 1e-17 * sum.abs().max(1e-300) {
            break;
        }
    }
    sum
}

/// Smooth bump `amplitude * exp(-1/(1-s))` as a continuum function.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BumpSource {
    pub center: Point,
    pub radii: (f64, f64),
    pub amplitude: f64,
}

impl BumpSource {
    pub fn value(&self, t: f64, x: f64) -> f64 {
        let dt = (t - self.center.t) / self.radii.0;
        let dx = (x - self.center.x) / self.radii.1;
        let s = dt * dt + dx * dx;
        if s < 1.0 {
            self.amplitude * (-1.0 / (1.0 - s)).exp()
        } else {
            0.0
        }
    }

    /// Lattice samples of the same function.
    pub fn sample(&self, m: &Spacetime2D) -> Result<TestFunction> {
        bump(m, self.center, self.radii, self.amplitude)
    }
}

/// Gauss-Legendre nodes and weights on `[-1, 1]` by Newton iteration.
fn gauss_legendre(n: usize) -> Vec<(f64, f64)> {
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        out.push((x, 2.0 / ((1.0 - x * x) * dp * dp)));
    }
    out
}

/// Composite Gauss-Legendre rule on `[a, b]`.
fn composite_rule(a: f64, b: f64, panels: usize, order: usize) -> Vec<(f64, f64)> {
    let gl = gauss_legendre(order);
    let w = (b - a) / panels as f64;
    let mut out = Vec::with_capacity(panels * order);
    for p in 0..panels {
        let lo = a + p as f64 * w;
        for &(x, wt) in &gl {
            out.push((lo + 0.5 * w * (x + 1.0), 0.5 * w * wt));
        }
    }
    out
}

/// Quadrature resolution for the continuum operators.
#[derive(Clone, Copy, Debug)]
pub struct Quadrature {
    pub panels: usize,
    pub order: usize,
}

impl Default for Quadrature {
    fn default() -> Self {
        Quadrature { panels: 24, order: 10 }
    }
}

/// Retarded (`dir = 1`) or advanced (`dir = -1`) continuum solution at `(t, x)`.
pub fn green_continuum(mass: f64, f: &BumpSource, p: Point, dir: f64, q: Quadrature) -> f64 {
    // Null offsets to the source box: alpha = dir*(dt - dx), beta = dir*(dt + dx),
    // where (dt, dx) = (t - s, x - y) for dir = 1.
    let (rt, rx) = f.radii;
    let dt_lo = dir * (p.t - f.center.t) - rt;
    let dt_hi = dir * (p.t - f.center.t) + rt;
    let dx_lo = dir * (p.x - f.center.x) - rx;
    let dx_hi = dir * (p.x - f.center.x) + rx;
    let a_lo = (dt_lo - dx_hi).max(0.0);
    let a_hi = dt_hi - dx_lo;
    let b_lo = (dt_lo + dx_lo).max(0.0);
    let b_hi = dt_hi + dx_hi;
    if a_hi <= a_lo || b_hi <= b_lo {
        return 0.0;
    }
    let ra = composite_rule(a_lo, a_hi, q.panels, q.order);
    let rb = composite_rule(b_lo, b_hi, q.panels, q.order);
    let mut sum = 0.0;
    for &(a, wa) in &ra {
        for &(b, wb) in &rb {
            let s = p.t - dir * 0.5 * (a + b);
            let y = p.x - dir * 0.5 * (b - a);
            let v = f.value(s, y);
            if v != 0.0 {
                let k = if mass == 0.0 { 1.0 } else { bessel_j0(mass * (a * b).sqrt()) };
                sum += wa * wb * k * v;
            }
        }
    }
    0.25 * sum
}

/// Continuum causal propagator `(E f)(t, x) = (R f - A f)(t, x)`.
pub fn propagator_continuum(mass: f64, f: &BumpSource, p: Point, q: Quadrature) -> f64 {
    green_continuum(mass, f, p, 1.0, q) - green_continuum(mass, f, p, -1.0, q)
}

/// Lattice `E f` against the continuum propagator on a fixed set of probe
/// points shared by every grid of a refinement family.
#[derive(Clone, Copy, Debug)]
pub struct ConvergenceStudy {
    pub mass: f64,
    pub source: BumpSource,
    pub t_window: (f64, f64),
    pub x_window: (f64, f64),
    /// Probes cover `[-probe.0, probe.0] x [-probe.1, probe.1]`.
    pub probe: (f64, f64),
    pub probe_step: f64,
}

impl ConvergenceStudy {
    pub fn standard(mass: f64) -> Self {
        ConvergenceStudy {
            mass,
            source: BumpSource { center: Point::new(0.0, 0.0), radii: (1.0, 1.0), amplitude: 1.0 },
            t_window: (-2.5, 2.5),
            x_window: (-3.5, 3.5),
            probe: (1.5, 2.0),
            probe_step: 0.125,
        }
    }

    fn probes(&self) -> Vec<Point> {
        let nt = (self.probe.0 / self.probe_step).round() as i64;
        let nx = (self.probe.1 / self.probe_step).round() as i64;
        let mut out = Vec::new();
        for a in -nt..=nt {
            for b in -nx..=nx {
                out.push(Point::new(a as f64 * self.probe_step, b as f64 * self.probe_step));
            }
        }
        out
    }

    /// Discrete L2 error of the lattice propagator at each spacing. Every `h`
    /// must divide the probe step.
    pub fn errors(&self, hs: &[f64]) -> Result<Vec<f64>> {
        let probes = self.probes();
        let exact: Vec<f64> =
            probes.iter().map(|&p| propagator_continuum(self.mass, &self.source, p, Quadrature::default())).collect();
        let area = self.probe_step * self.probe_step;
        hs.iter()
            .map(|&h| {
                let k = self.probe_step / h;
                if (k - k.round()).abs() > 1e-9 || k.round() < 1.0 {
                    return Err(Error::Config(format!("h = {h} does not divide the probe step {}", self.probe_step)));
                }
                let m = Spacetime2D::minkowski(self.mass, h, self.t_window, self.x_window)?;
                let u = causal_propagator(&m, &self.source.sample(&m)?)?;
                let sq: f64 = probes
                    .iter()
                    .zip(&exact)
                    .map(|(p, e)| {
                        let c = m.node_of(*p);
                        (u.get(c.n, c.j) - e).powi(2)
                    })
                    .sum();
                Ok((sq * area).sqrt())
            })
            .collect()
    }
}
