//! The Weyl *-algebra over the solution space, with generators labeled by
//! canonical Cauchy data on `t = 0`, and the quasi-free vacuum on the cylinder.

use std::collections::BTreeMap;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::greens::{canonical_data_scaled, symplectic_data, CauchyData};
use crate::spacetime::Spacetime2D;
use crate::testfun::TestFunction;

/// Relative tolerance under which two labels are identified.
pub const EPS_LABEL: f64 = 1e-9;

/// Canonical label of a generator: the Cauchy data of `E f` on `t = 0`.
#[derive(Clone, Debug, PartialEq)]
pub struct WeylLabel {
    ambient: Spacetime2D,
    data: Arc<CauchyData>,
}

impl WeylLabel {
    pub fn zero(m: &Spacetime2D) -> Self {
        WeylLabel { ambient: *m, data: Arc::new(CauchyData::zero(0.0)) }
    }

    /// Wraps data on `t = 0`, snapping it to zero when it is rounding noise
    /// relative to `scale`.
    pub fn from_data(m: &Spacetime2D, data: CauchyData, scale: f64) -> Self {
        debug_assert_eq!(data.t0, 0.0);
        if data.max_abs() <= EPS_LABEL * scale {
            return Self::zero(m);
        }
        let data = if m.is_cylinder() { data } else { data.trimmed() };
        WeylLabel { ambient: *m, data: Arc::new(data) }
    }

    /// Label of `E f`.
    pub fn of(m: &Spacetime2D, f: &TestFunction) -> Result<Self> {
        let (data, scale) = canonical_data_scaled(m, f)?;
        Ok(Self::from_data(m, data, scale))
    }

    pub fn ambient(&self) -> &Spacetime2D {
        &self.ambient
    }

    pub fn data(&self) -> &CauchyData {
        &self.data
    }

    pub fn is_zero(&self) -> bool {
        self.data.max_abs() == 0.0
    }

    fn check(&self, other: &WeylLabel) -> Result<()> {
        if self.ambient != other.ambient {
            return Err(Error::AmbientMismatch);
        }
        Ok(())
    }

    /// `a * self + b * other`, snapped against the larger input.
    pub fn lincomb(&self, a: f64, other: &WeylLabel, b: f64) -> Result<WeylLabel> {
        self.check(other)?;
        let scale = (a.abs() * self.data.max_abs()).max(b.abs() * other.data.max_abs());
        Ok(Self::from_data(&self.ambient, self.data.lincomb(a, &other.data, b), scale))
    }

    pub fn add(&self, other: &WeylLabel) -> Result<WeylLabel> {
        self.lincomb(1.0, other, 1.0)
    }

    pub fn neg(&self) -> WeylLabel {
        if self.is_zero() {
            return self.clone();
        }
        let d = &self.data;
        let data =
            CauchyData { t0: d.t0, j0: d.j0, phi: d.phi.iter().map(|v| -v).collect(), pi: d.pi.iter().map(|v| -v).collect() };
        WeylLabel { ambient: self.ambient, data: Arc::new(data) }
    }

    /// `sigma(self, other)` on the reference line.
    pub fn symplectic(&self, other: &WeylLabel) -> Result<f64> {
        self.check(other)?;
        Ok(symplectic_data(&self.ambient, &self.data, &other.data))
    }

    /// `(h sum (phi^2 + pi^2))^{1/2}`.
    pub fn norm(&self) -> f64 {
        let d = &self.data;
        (self.ambient.h() * d.phi.iter().chain(&d.pi).map(|v| v * v).sum::<f64>()).sqrt()
    }

    /// Relative distance `|a - b| / max(|a|, |b|)`, zero for two zero labels.
    pub fn distance(&self, other: &WeylLabel) -> f64 {
        if self.ambient != other.ambient {
            return f64::INFINITY;
        }
        let denom = self.norm().max(other.norm());
        if denom == 0.0 {
            return 0.0;
        }
        let diff = self.data.lincomb(1.0, &other.data, -1.0);
        let n = (self.ambient.h() * diff.phi.iter().chain(&diff.pi).map(|v| v * v).sum::<f64>()).sqrt();
        n / denom
    }

    /// Short content hash of the label data.
    pub fn hash(&self) -> String {
        let mut hasher = Sha256::new();
        hasher.update(self.ambient.id().as_bytes());
        hasher.update(self.data.j0.to_le_bytes());
        for v in self.data.phi.iter().chain(&self.data.pi) {
            hasher.update(v.to_bits().to_le_bytes());
        }
        hex::encode(&hasher.finalize()[..8])
    }
}

/// One term `coeff * W(label)`, optionally remembering a test function with that label.
#[derive(Clone, Debug, PartialEq)]
pub struct WeylTerm {
    pub label: WeylLabel,
    pub coeff: Complex64,
    pub rep: Option<TestFunction>,
}

/// A finite linear combination of Weyl generators.
#[derive(Clone, Debug, PartialEq)]
pub struct WeylElement {
    ambient: Spacetime2D,
    terms: Vec<WeylTerm>,
}

#[derive(Serialize, Deserialize)]
struct TermJson {
    label_hash: String,
    coeff_re: f64,
    coeff_im: f64,
}

#[derive(Serialize, Deserialize)]
struct ElementJson {
    terms: Vec<TermJson>,
}

impl WeylElement {
    pub fn zero(m: &Spacetime2D) -> Self {
        WeylElement { ambient: *m, terms: Vec::new() }
    }

    pub fn unit(m: &Spacetime2D) -> Self {
        let term = WeylTerm { label: WeylLabel::zero(m), coeff: Complex64::new(1.0, 0.0), rep: Some(TestFunction::zero(m)) };
        WeylElement { ambient: *m, terms: vec![term] }
    }

    /// The generator `W(E f)`.
    pub fn generator(m: &Spacetime2D, f: &TestFunction) -> Result<Self> {
        let label = WeylLabel::of(m, f)?;
        Ok(Self::from_label(label, Complex64::new(1.0, 0.0), Some(f.clone())))
    }

    pub fn from_label(label: WeylLabel, coeff: Complex64, rep: Option<TestFunction>) -> Self {
        let ambient = *label.ambient();
        let mut out = WeylElement { ambient, terms: Vec::new() };
        out.push(WeylTerm { label, coeff, rep });
        out
    }

    pub fn from_terms(m: &Spacetime2D, terms: impl IntoIterator<Item = WeylTerm>) -> Result<Self> {
        let mut out = Self::zero(m);
        for t in terms {
            if t.label.ambient() != m {
                return Err(Error::AmbientMismatch);
            }
            out.push(t);
        }
        Ok(out)
    }

    pub fn ambient(&self) -> &Spacetime2D {
        &self.ambient
    }

    pub fn terms(&self) -> &[WeylTerm] {
        &self.terms
    }

    /// Adds a term, merging it into a term whose label is within `EPS_LABEL`.
    fn push(&mut self, term: WeylTerm) {
        if term.coeff == Complex64::new(0.0, 0.0) {
            return;
        }
        if let Some(k) = self.terms.iter().position(|t| t.label.distance(&term.label) < EPS_LABEL) {
            self.terms[k].coeff += term.coeff;
            if self.terms[k].coeff == Complex64::new(0.0, 0.0) {
                self.terms.remove(k);
            }
            return;
        }
        self.terms.push(term);
    }

    fn check(&self, other: &WeylElement) -> Result<()> {
        if self.ambient != other.ambient {
            return Err(Error::AmbientMismatch);
        }
        Ok(())
    }

    pub fn add(&self, other: &WeylElement) -> Result<WeylElement> {
        self.check(other)?;
        let mut out = self.clone();
        for t in &other.terms {
            out.push(t.clone());
        }
        Ok(out)
    }

    pub fn scale(&self, c: Complex64) -> WeylElement {
        let mut out = WeylElement::zero(&self.ambient);
        for t in &self.terms {
            out.push(WeylTerm { coeff: c * t.coeff, ..t.clone() });
        }
        out
    }

    pub fn sub(&self, other: &WeylElement) -> Result<WeylElement> {
        self.add(&other.scale(Complex64::new(-1.0, 0.0)))
    }

    /// Product from `W(a) W(b) = exp(-i sigma(a, b) / 2) W(a + b)`.
    pub fn multiply(&self, other: &WeylElement) -> Result<WeylElement> {
        self.check(other)?;
        let mut out = WeylElement::zero(&self.ambient);
        for a in &self.terms {
            for b in &other.terms {
                let sigma = a.label.symplectic(&b.label)?;
                let phase = Complex64::from_polar(1.0, -0.5 * sigma);
                let rep = match (&a.rep, &b.rep) {
                    (Some(f), Some(g)) => Some(f.add(g)?),
                    _ => None,
                };
                out.push(WeylTerm { label: a.label.add(&b.label)?, coeff: a.coeff * b.coeff * phase, rep });
            }
        }
        Ok(out)
    }

    /// Conjugate-linear extension of `W(l)* = W(-l)`.
    pub fn adjoint(&self) -> WeylElement {
        let mut out = WeylElement::zero(&self.ambient);
        for t in &self.terms {
            out.push(WeylTerm { label: t.label.neg(), coeff: t.coeff.conj(), rep: t.rep.as_ref().map(|f| f.scale(-1.0)) });
        }
        out
    }

    /// Largest coefficient magnitude of `self - other`, terms matched within `EPS_LABEL`.
    pub fn deviation(&self, other: &WeylElement) -> Result<f64> {
        let d = self.sub(other)?;
        Ok(d.terms.iter().fold(0.0, |a, t| a.max(t.coeff.norm())))
    }

    /// Pairs the terms of two elements by nearest label and reports the largest
    /// label distance and coefficient difference. Unpaired terms count fully.
    pub fn compare(&self, other: &WeylElement) -> (f64, f64) {
        let mut used = vec![false; other.terms.len()];
        let (mut dl, mut dc): (f64, f64) = (0.0, 0.0);
        for a in &self.terms {
            let best = other
                .terms
                .iter()
                .enumerate()
                .filter(|(k, _)| !used[*k])
                .map(|(k, b)| (k, a.label.distance(&b.label)))
                .min_by(|x, y| x.1.total_cmp(&y.1));
            match best {
                Some((k, d)) => {
                    used[k] = true;
                    dl = dl.max(d);
                    dc = dc.max((a.coeff - other.terms[k].coeff).norm());
                }
                None => {
                    dl = f64::INFINITY;
                    dc = dc.max(a.coeff.norm());
                }
            }
        }
        for (k, b) in other.terms.iter().enumerate() {
            if !used[k] {
                dl = f64::INFINITY;
                dc = dc.max(b.coeff.norm());
            }
        }
        (dl, dc)
    }

    /// `{terms: [{label_hash, coeff_re, coeff_im}]}`.
    pub fn to_json(&self) -> String {
        let doc = ElementJson {
            terms: self
                .terms
                .iter()
                .map(|t| TermJson { label_hash: t.label.hash(), coeff_re: t.coeff.re, coeff_im: t.coeff.im })
                .collect(),
        };
        serde_json::to_string(&doc).expect("element serializes")
    }

    /// Label data keyed by content hash, for storing next to [`WeylElement::to_json`].
    pub fn label_sidecar(&self) -> BTreeMap<String, CauchyData> {
        self.terms.iter().map(|t| (t.label.hash(), t.label.data().clone())).collect()
    }
}

/// Quasi-free vacuum of mass `m > 0` on the cylinder, from the mode sum over
/// `k_n = 2 pi n / L`, `omega_n = (m^2 + k_n^2)^{1/2}`.
#[derive(Clone, Debug)]
pub struct QuasiFreeState {
    ambient: Spacetime2D,
    omega: Vec<f64>,
}

impl QuasiFreeState {
    pub fn vacuum(m: &Spacetime2D) -> Result<Self> {
        let Some(n) = m.period() else {
            return Err(Error::StateUnavailable("the mode-sum vacuum is built on the cylinder only".into()));
        };
        if m.mass() <= 0.0 {
            return Err(Error::StateUnavailable("the massless zero mode has no normalizable vacuum".into()));
        }
        let l = m.circumference();
        let omega = (0..n)
            .map(|k| {
                let ks = if 2 * k <= n { k } else { k - n };
                let kn = 2.0 * std::f64::consts::PI * ks as f64 / l;
                (m.mass() * m.mass() + kn * kn).sqrt()
            })
            .collect();
        Ok(QuasiFreeState { ambient: *m, omega })
    }

    fn spectrum(&self, v: &[f64]) -> Vec<Complex64> {
        let n = self.omega.len();
        let h = self.ambient.h();
        let mut buf: Vec<Complex64> = (0..n).map(|k| Complex64::new(h * v.get(k).copied().unwrap_or(0.0), 0.0)).collect();
        FftPlanner::new().plan_fft_forward(n).process(&mut buf);
        buf
    }

    /// Covariance `mu(a, b) = (1/2L) sum_n Re(omega conj(phi_a) phi_b + conj(pi_a) pi_b / omega)`.
    pub fn mu(&self, a: &WeylLabel, b: &WeylLabel) -> Result<f64> {
        if a.ambient() != &self.ambient || b.ambient() != &self.ambient {
            return Err(Error::AmbientMismatch);
        }
        if a.is_zero() || b.is_zero() {
            return Ok(0.0);
        }
        let (pa, qa) = (self.spectrum(&a.data().phi), self.spectrum(&a.data().pi));
        let (pb, qb) = (self.spectrum(&b.data().phi), self.spectrum(&b.data().pi));
        let mut s = 0.0;
        for k in 0..self.omega.len() {
            let w = self.omega[k];
            s += w * (pa[k].conj() * pb[k]).re + (qa[k].conj() * qb[k]).re / w;
        }
        Ok(s / (2.0 * self.ambient.circumference()))
    }

    /// `omega(W(l)) = exp(-mu(l, l) / 2)`, extended linearly.
    pub fn expectation(&self, a: &WeylElement) -> Result<Complex64> {
        if a.ambient() != &self.ambient {
            return Err(Error::StateUnavailable("element lives on a different spacetime".into()));
        }
        let mut s = Complex64::new(0.0, 0.0);
        for t in a.terms() {
            s += t.coeff * (-0.5 * self.mu(&t.label, &t.label)?).exp();
        }
        Ok(s)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spacetime::Point;
    use crate::testfun::bump;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn cyl() -> Spacetime2D {
        Spacetime2D::cylinder(8.0, 0.5, 0.0625, (-3.0, 3.0)).unwrap()
    }

    fn gen(m: &Spacetime2D, t: f64, x: f64, a: f64) -> WeylElement {
        WeylElement::generator(m, &bump(m, Point::new(t, x), (0.5, 0.5), a).unwrap()).unwrap()
    }

    fn random_element(m: &Spacetime2D, rng: &mut ChaCha8Rng) -> WeylElement {
        let mut out = WeylElement::zero(m);
        for _ in 0..3 {
            let g = gen(m, rng.gen_range(-1.5..1.5), rng.gen_range(0.0..8.0), rng.gen_range(-1.0..1.0));
            let c = Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
            out = out.add(&g.scale(c)).unwrap();
        }
        out
    }

    #[test]
    fn generators_of_zero_and_kg_images_are_unit() {
        let m = cyl();
        let u = WeylElement::unit(&m);
        assert_eq!(WeylElement::generator(&m, &TestFunction::zero(&m)).unwrap().compare(&u), (0.0, 0.0));
        let g = bump(&m, Point::new(0.2, 3.0), (0.6, 0.6), 1.0).unwrap();
        assert!(WeylLabel::of(&m, &g.apply_kg().unwrap()).unwrap().is_zero());
        let f = bump(&m, Point::new(-0.7, 2.0), (0.5, 0.8), 1.0).unwrap();
        let l1 = WeylLabel::of(&m, &f).unwrap();
        let l2 = WeylLabel::of(&m, &f.add(&g.apply_kg().unwrap()).unwrap()).unwrap();
        assert!(l1.distance(&l2) < EPS_LABEL);
    }

    #[test]
    fn weyl_relations() {
        let m = cyl();
        let a = gen(&m, 0.0, 2.0, 1.0);
        let b = gen(&m, 0.8, 2.5, 0.7);
        let u = WeylElement::unit(&m);
        assert_eq!(a.multiply(&a.adjoint()).unwrap().deviation(&u).unwrap(), 0.0);
        assert_eq!(a.adjoint().multiply(&a).unwrap().deviation(&u).unwrap(), 0.0);
        let sigma = a.terms()[0].label.symplectic(&b.terms()[0].label).unwrap();
        assert!(sigma.abs() > 1e-4);
        let comm = a.multiply(&b).unwrap().multiply(&a.adjoint()).unwrap().multiply(&b.adjoint()).unwrap();
        let expected = u.scale(Complex64::from_polar(1.0, -sigma));
        assert!(comm.deviation(&expected).unwrap() < 1e-12);
        let c = gen(&m, 0.0, 6.0, 1.0);
        assert!(a.multiply(&c).unwrap().deviation(&c.multiply(&a).unwrap()).unwrap() < 1e-10);
    }

    #[test]
    fn algebra_laws_on_random_elements() {
        let m = cyl();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..3 {
            let (a, b, c) = (random_element(&m, &mut rng), random_element(&m, &mut rng), random_element(&m, &mut rng));
            let ab_c = a.multiply(&b).unwrap().multiply(&c).unwrap();
            let a_bc = a.multiply(&b.multiply(&c).unwrap()).unwrap();
            assert!(ab_c.deviation(&a_bc).unwrap() < 1e-12);
            let lhs = a.multiply(&b).unwrap().adjoint();
            let rhs = b.adjoint().multiply(&a.adjoint()).unwrap();
            assert!(lhs.deviation(&rhs).unwrap() < 1e-12);
            assert_eq!(a.adjoint().adjoint(), a);
        }
        assert_eq!(WeylElement::unit(&m).adjoint(), WeylElement::unit(&m));
    }

    #[test]
    fn vacuum_expectations() {
        let m = cyl();
        let w = QuasiFreeState::vacuum(&m).unwrap();
        assert_eq!(w.expectation(&WeylElement::unit(&m)).unwrap(), Complex64::new(1.0, 0.0));
        let a = gen(&m, 0.3, 4.0, 1.0);
        let e = w.expectation(&a).unwrap();
        assert!(e.im == 0.0 && e.re > 0.0 && e.re <= 1.0);
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..3 {
            let x = random_element(&m, &mut rng);
            let v = w.expectation(&x.adjoint().multiply(&x).unwrap()).unwrap();
            assert!(v.re >= -1e-10 && v.im.abs() < 1e-10, "{v}");
        }
        let (la, lb) = (a.terms()[0].label.clone(), gen(&m, -0.5, 4.5, 1.0).terms()[0].label.clone());
        let s = la.symplectic(&lb).unwrap();
        assert!(s * s <= 4.0 * w.mu(&la, &la).unwrap() * w.mu(&lb, &lb).unwrap());
        let mink = Spacetime2D::minkowski(0.5, 0.0625, (-1.0, 1.0), (-1.0, 1.0)).unwrap();
        assert!(matches!(QuasiFreeState::vacuum(&mink), Err(Error::StateUnavailable(_))));
    }

    #[test]
    fn json_export_lists_terms() {
        let m = cyl();
        let a = gen(&m, 0.0, 2.0, 1.0).add(&WeylElement::unit(&m)).unwrap();
        let v: serde_json::Value = serde_json::from_str(&a.to_json()).unwrap();
        assert_eq!(v["terms"].as_array().unwrap().len(), 2);
        assert_eq!(a.label_sidecar().len(), 2);
    }
}
