//! Locally covariant fields: the Weyl field as a family of maps from test
//! functions to algebras, and local S-matrices of linear source couplings.
//!
//! The S-matrix of a source `lambda` is `exp(i gamma) W(E lambda)` with the
//! real phase `gamma = 1/2 <lambda, D lambda>`, `D = (R + A)/2`. If `lambda`
//! lies in the future of `nu`, then `<lambda, A nu> = 0`, so
//! `<lambda, D nu> = 1/2 <lambda, E nu> = -1/2 sigma(lambda, nu)`; this cross
//! term cancels the phase left over by the Weyl relations in the causal
//! factorization identity.

use num_complex::Complex64;
use rand::Rng;
use serde_json::json;

use crate::error::{Error, Result};
use crate::functor::alpha;
use crate::greens::green_pairing;
use crate::report::{random_bump_in, Report};
use crate::spacetime::{Embedding, Region, Spacetime2D};
use crate::testfun::{pushforward, TestFunction};
use crate::weyl::{WeylElement, WeylLabel};

/// A field defined on every spacetime at once.
pub trait CovariantField {
    fn apply(&self, m: &Spacetime2D, f: &TestFunction) -> Result<WeylElement>;
}

/// `Phi_M(f) = W(E f)`.
#[derive(Clone, Copy, Debug, Default)]
pub struct WeylField;

impl CovariantField for WeylField {
    fn apply(&self, m: &Spacetime2D, f: &TestFunction) -> Result<WeylElement> {
        WeylElement::generator(m, f)
    }
}

pub fn field_apply(phi: &impl CovariantField, m: &Spacetime2D, f: &TestFunction) -> Result<WeylElement> {
    phi.apply(m, f)
}

/// Compares `alpha_psi(Phi(f))` with `Phi(psi_* f)` on test functions sampled
/// in `domain`. Each sample is also mapped through a second representative
/// `f + P g` of the same label, which must land on the same image.
pub fn check_naturality<R: Rng>(
    phi: &impl CovariantField,
    psi: &Embedding,
    domain: &Region,
    n_samples: usize,
    tol: f64,
    rng: &mut R,
) -> Result<Report> {
    let host = psi.source().host();
    let target = psi.target();
    if !domain.ambient().same_geometry(host) || psi.source().region().is_some_and(|o| !domain.is_subset_of(o)) {
        return Err(Error::DomainMismatch("sampling domain is not in the embedding source".into()));
    }
    let a = alpha(psi);
    let mut worst: f64 = 0.0;
    for _ in 0..n_samples {
        let f = random_bump_in(domain, rng)?;
        let lhs = a.apply(&phi.apply(host, &f)?)?;
        let rhs = phi.apply(target, &pushforward(psi, &f)?)?;
        let (dl, dc) = lhs.compare(&rhs);
        worst = worst.max(dl).max(dc);
        // A shrunken copy keeps P g inside the domain.
        let g = random_bump_in(domain, rng)?.scale(0.1);
        let f2 = f.add(&g.apply_kg()?)?;
        if f2.supported_in(domain) {
            let alt = a.apply(&phi.apply(host, &f2)?)?;
            let (dl, dc) = alt.compare(&lhs);
            worst = worst.max(dl).max(dc);
        }
    }
    let params = json!({"source": host.id(), "target": target.id(), "rapidity": psi.map().rapidity, "shift": psi.map().shift});
    Ok(Report::new("naturality", params, n_samples, worst, tol))
}

/// `S(lambda) = exp(i gamma(lambda)) W(E lambda)`.
#[derive(Clone, Debug, PartialEq)]
pub struct LocalSMatrix {
    pub lambda: TestFunction,
    pub gamma: f64,
    pub value: WeylElement,
}

/// `gamma(lambda) = sign/2 <lambda, (R + A)/2 lambda>`; the physical choice is `sign = 1`.
fn phase(m: &Spacetime2D, lambda: &TestFunction, sign: f64) -> Result<f64> {
    let ret = green_pairing(m, lambda, lambda, 1)?;
    let adv = green_pairing(m, lambda, lambda, -1)?;
    Ok(sign * 0.25 * (ret + adv))
}

fn s_matrix_signed(m: &Spacetime2D, lambda: &TestFunction, sign: f64) -> Result<LocalSMatrix> {
    let gamma = phase(m, lambda, sign)?;
    let label = WeylLabel::of(m, lambda)?;
    let value = WeylElement::from_label(label, Complex64::from_polar(1.0, gamma), Some(lambda.clone()));
    Ok(LocalSMatrix { lambda: lambda.clone(), gamma, value })
}

pub fn s_matrix(m: &Spacetime2D, lambda: &TestFunction) -> Result<LocalSMatrix> {
    s_matrix_signed(m, lambda, 1.0)
}

/// `S_mu(lambda) = S(mu)^{-1} S(mu + lambda)`.
pub fn relative_s_matrix(m: &Spacetime2D, mu: &TestFunction, lambda: &TestFunction) -> Result<WeylElement> {
    let s_mu = s_matrix(m, mu)?.value;
    s_mu.adjoint().multiply(&s_matrix(m, &mu.add(lambda)?)?.value)
}

/// A grid line strictly between the supports, `lambda` above and `nu` below.
fn separating_row(lambda: &TestFunction, nu: &TestFunction) -> Option<i64> {
    match (lambda.row_range(), nu.row_range()) {
        (Some((l0, _)), Some((_, n1))) => (l0 - n1 >= 2).then_some(n1 + 1),
        _ => Some(0),
    }
}

fn factorization_gap(m: &Spacetime2D, lambda: &TestFunction, mu: &TestFunction, nu: &TestFunction, sign: f64) -> Result<f64> {
    let s = |f: &TestFunction| s_matrix_signed(m, f, sign).map(|s| s.value);
    let lhs = s(&lambda.add(mu)?.add(nu)?)?;
    let rhs = s(&lambda.add(mu)?)?.multiply(&s(mu)?.adjoint())?.multiply(&s(&mu.add(nu)?)?)?;
    lhs.deviation(&rhs)
}

/// `S(lambda + mu + nu) = S(lambda + mu) S(mu)^{-1} S(mu + nu)` when a grid
/// Cauchy line separates `supp lambda` (future) from `supp nu` (past).
pub fn check_causal_factorization(
    m: &Spacetime2D,
    lambda: &TestFunction,
    mu: &TestFunction,
    nu: &TestFunction,
    tol: f64,
) -> Result<Report> {
    let Some(row) = separating_row(lambda, nu) else {
        return Err(Error::SupportsNotSeparated);
    };
    let gap = factorization_gap(m, lambda, mu, nu, 1.0)?;
    let params = json!({"spacetime": m.id(), "separating_t": row as f64 * m.h()});
    Ok(Report::new("causal_factorization", params, 1, gap, tol))
}

/// `alpha_psi(S_M1(lambda))` against `S_M2(psi_* lambda)`.
pub fn check_s_matrix_covariance<R: Rng>(
    psi: &Embedding,
    domain: &Region,
    n_samples: usize,
    tol: f64,
    rng: &mut R,
) -> Result<Report> {
    let host = psi.source().host();
    let a = alpha(psi);
    let mut worst: f64 = 0.0;
    for _ in 0..n_samples {
        let lambda = random_bump_in(domain, rng)?;
        let lhs = a.apply(&s_matrix(host, &lambda)?.value)?;
        let rhs = s_matrix(psi.target(), &pushforward(psi, &lambda)?)?.value;
        let (dl, dc) = lhs.compare(&rhs);
        worst = worst.max(dl).max(dc);
    }
    let params = json!({"source": host.id(), "target": psi.target().id(), "rapidity": psi.map().rapidity});
    Ok(Report::new("s_matrix_covariance", params, n_samples, worst, tol))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::greens::symplectic;
    use crate::report::seeded_rng;
    use crate::spacetime::{validate_embedding, AffineMap, EmbeddingSpec, LocObject, Point};
    use crate::testfun::bump;
    use crate::weyl::QuasiFreeState;

    fn cyl() -> Spacetime2D {
        Spacetime2D::cylinder(16.0, 0.5, 0.0625, (-6.0, 6.0)).unwrap()
    }

    fn b(m: &Spacetime2D, t: f64, x: f64, a: f64) -> TestFunction {
        bump(m, Point::new(t, x), (0.6, 0.8), a).unwrap()
    }

    #[test]
    fn weyl_field_basics() {
        let m = cyl();
        let phi = WeylField;
        assert_eq!(field_apply(&phi, &m, &TestFunction::zero(&m)).unwrap(), WeylElement::unit(&m));
        let (f, g) = (b(&m, 0.0, 2.0, 1.0), b(&m, 1.0, 2.5, -0.7));
        let pf = field_apply(&phi, &m, &f).unwrap();
        let neg = field_apply(&phi, &m, &f.scale(-1.0)).unwrap();
        assert_eq!(pf.adjoint().compare(&neg), (0.0, 0.0));
        let pg = field_apply(&phi, &m, &g).unwrap();
        let comm = pf.multiply(&pg).unwrap().multiply(&pf.adjoint()).unwrap().multiply(&pg.adjoint()).unwrap();
        let sigma = symplectic(&m, &f, &g).unwrap();
        assert!(sigma.abs() > 1e-3);
        let expected = WeylElement::unit(&m).scale(Complex64::from_polar(1.0, -sigma));
        assert!(comm.deviation(&expected).unwrap() < 1e-12);
    }

    #[test]
    fn s_matrix_axioms() {
        let m = cyl();
        assert_eq!(s_matrix(&m, &TestFunction::zero(&m)).unwrap().value, WeylElement::unit(&m));
        let l = b(&m, 0.2, 3.0, 0.8);
        let s = s_matrix(&m, &l).unwrap();
        // |exp(i gamma)|^2 is 1 up to the rounding of cos and sin.
        assert!(s.value.adjoint().multiply(&s.value).unwrap().deviation(&WeylElement::unit(&m)).unwrap() <= 4.0 * f64::EPSILON);
        let s3 = s_matrix(&m, &l.scale(3.0)).unwrap();
        assert!((s3.gamma - 9.0 * s.gamma).abs() <= 1e-12 * s3.gamma.abs());
        let w = QuasiFreeState::vacuum(&m).unwrap();
        let lab = &s.value.terms()[0].label;
        let expect = Complex64::new(0.0, s.gamma).exp() * (-0.5 * w.mu(lab, lab).unwrap()).exp();
        assert!((w.expectation(&s.value).unwrap() - expect).norm() < 1e-14);
        assert_eq!(relative_s_matrix(&m, &TestFunction::zero(&m), &l).unwrap().compare(&s.value), (0.0, 0.0));
        let mu = b(&m, -1.0, 6.0, 0.5);
        let rel0 = relative_s_matrix(&m, &mu, &TestFunction::zero(&m)).unwrap();
        assert!(rel0.deviation(&WeylElement::unit(&m)).unwrap() < 1e-12);
    }

    #[test]
    fn factorization_holds_with_this_phase_and_fails_with_the_other() {
        let m = cyl();
        let lambda = b(&m, 2.0, 3.0, 1.0);
        let mu = b(&m, 0.3, 2.0, 0.7);
        let nu = b(&m, -1.5, 4.0, -0.9);
        let r = check_causal_factorization(&m, &lambda, &mu, &nu, 1e-9).unwrap();
        assert!(r.pass, "{r:?}");
        assert!(factorization_gap(&m, &lambda, &mu, &nu, -1.0).unwrap() > 1e-3);
        let z = TestFunction::zero(&m);
        assert!(check_causal_factorization(&m, &z, &mu, &z, 0.0).unwrap().pass);
        assert!(matches!(check_causal_factorization(&m, &nu, &mu, &lambda, 1e-9), Err(Error::SupportsNotSeparated)));
    }

    #[test]
    fn spacelike_sources_factorize_plainly() {
        let m = cyl();
        let (l, n) = (b(&m, 1.0, 0.0, 1.0), b(&m, -1.0, 8.0, 0.6));
        let z = TestFunction::zero(&m);
        assert!(check_causal_factorization(&m, &l, &z, &n, 1e-9).unwrap().pass);
        let lhs = s_matrix(&m, &l.add(&n).unwrap()).unwrap().value;
        let rhs = s_matrix(&m, &l).unwrap().value.multiply(&s_matrix(&m, &n).unwrap().value).unwrap();
        assert!(lhs.deviation(&rhs).unwrap() < 1e-10);
    }

    #[test]
    fn relative_s_matrices_factorize() {
        let m = cyl();
        let (l, mu, n) = (b(&m, 2.0, 3.0, 1.0), b(&m, 0.0, 3.5, 0.8), b(&m, -2.0, 2.5, 0.6));
        let lhs = relative_s_matrix(&m, &mu, &l.add(&n).unwrap()).unwrap();
        let rhs = relative_s_matrix(&m, &mu, &l).unwrap().multiply(&relative_s_matrix(&m, &mu, &n).unwrap()).unwrap();
        assert!(lhs.deviation(&rhs).unwrap() < 1e-9);
    }

    #[test]
    fn naturality_for_translations_and_cross_geometry() {
        let mut rng = seeded_rng(8, "naturality");
        let c = cyl();
        let dom = Region::double_cone(&c, Point::new(0.0, 4.0), 1.5).unwrap();
        let t = validate_embedding(EmbeddingSpec {
            source: LocObject::Spacetime(c),
            target: c,
            map: AffineMap::translation_cells(5, 17),
        })
        .unwrap();
        assert!(check_naturality(&WeylField, &t, &dom, 3, 1e-9, &mut rng).unwrap().pass);
        let id = Embedding::identity(&c);
        assert!(check_naturality(&WeylField, &id, &dom, 2, 0.0, &mut rng).unwrap().max_deviation < 1e-12);
        let plane = Spacetime2D::minkowski(0.5, 0.0625, (-3.0, 3.0), (-3.0, 3.0)).unwrap();
        let o = Region::double_cone(&plane, Point::new(0.0, 0.0), 2.0).unwrap();
        let psi = validate_embedding(EmbeddingSpec {
            source: LocObject::Region(o.clone()),
            target: c,
            map: AffineMap::translation_cells(0, 64),
        })
        .unwrap();
        let r = check_naturality(&WeylField, &psi, &o, 3, 1e-9, &mut rng).unwrap();
        assert!(r.pass, "{r:?}");
        let r = check_s_matrix_covariance(&psi, &o, 2, 1e-9, &mut rng).unwrap();
        assert!(r.pass, "{r:?}");
    }
}
