//! Tomita-Takesaki theory for the standard form of a full matrix algebra.
//!
//! The Hilbert space is `C^n ⊗ C^n`; the vector `xi` with entries
//! `xi[i n + k]` is identified with the `n x n` matrix `X[i][k]`, so that
//! `(a ⊗ 1) xi <-> a X` and `(1 ⊗ b) xi <-> X b^T`. The algebra is `M_n ⊗ 1`
//! and the vector state comes from a density matrix `rho` via `Omega <-> rho^{1/2}`.
//! Then `Delta = rho ⊗ conj(rho)^{-1}` and `J` is conjugation followed by the swap.
//!
//! Antilinear operators are stored as `xi -> U conj(xi)`. Composition of two
//! of them is linear: `(U1 C)(U2 C) = U1 conj(U2)`.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;
use serde_json::json;

use crate::error::{Error, Result};
use crate::report::Report;

type CMat = DMatrix<Complex64>;
type CVec = DVector<Complex64>;

fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

/// `a ⊗ b` in the `i n + k` ordering.
fn kron(a: &CMat, b: &CMat) -> CMat {
    a.kronecker(b)
}

fn frob(a: &CMat) -> f64 {
    a.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

fn vec_of(x: &CMat) -> CVec {
    let n = x.nrows();
    CVec::from_fn(n * n, |r, _| x[(r / n, r % n)])
}

fn mat_of(v: &CVec, n: usize) -> CMat {
    CMat::from_fn(n, n, |i, k| v[i * n + k])
}

/// Hermitian functional calculus `sum_k g(lambda_k) v_k v_k^*`.
fn hermitian_fn(vals: &[f64], vecs: &CMat, g: impl Fn(f64) -> Complex64) -> CMat {
    let d = CMat::from_diagonal(&CVec::from_iterator(vals.len(), vals.iter().map(|&l| g(l))));
    vecs * d * vecs.adjoint()
}

/// Antilinear operator `xi -> u conj(xi)`.
#[derive(Clone, Debug, PartialEq)]
pub struct AntiUnitary {
    pub u: CMat,
}

impl AntiUnitary {
    pub fn apply(&self, xi: &CVec) -> CVec {
        &self.u * xi.conjugate()
    }

    /// `self ∘ other`, a linear operator.
    pub fn compose(&self, other: &AntiUnitary) -> CMat {
        &self.u * other.u.conjugate()
    }

    /// `J A J` for a linear `A`.
    pub fn conjugate_op(&self, a: &CMat) -> CMat {
        &self.u * a.conjugate() * self.u.conjugate()
    }
}

/// Full matrix algebra `M_n ⊗ 1` with the vector of a faithful density matrix.
#[derive(Clone, Debug)]
pub struct StandardPair {
    n: usize,
    rho: CMat,
    omega: CVec,
}

/// Cyclicity and separation of a vector for `M_n ⊗ 1`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct StandardCheck {
    pub cyclic: bool,
    pub separating: bool,
}

/// Both properties reduce to the reshaped `n x n` matrix having rank `n`.
pub fn check_standard(n: usize, omega: &CVec) -> Result<StandardCheck> {
    if omega.len() != n * n {
        return Err(Error::DimensionMismatch { expected: n * n, got: omega.len() });
    }
    let sv = mat_of(omega, n).singular_values();
    let top = sv.max();
    let rank = sv.iter().filter(|&&s| s > 1e-10 * top.max(f64::MIN_POSITIVE)).count();
    let full = top > 0.0 && rank == n;
    Ok(StandardCheck { cyclic: full, separating: full })
}

impl StandardPair {
    /// Validates `rho` (Hermitian, unit trace, positive) and requires full rank.
    pub fn from_density(rho: CMat) -> Result<Self> {
        let n = rho.nrows();
        if n == 0 || rho.ncols() != n {
            return Err(Error::InvalidDensity(format!("{}x{} is not a square matrix", rho.nrows(), rho.ncols())));
        }
        if frob(&(&rho - rho.adjoint())) > 1e-12 * frob(&rho) {
            return Err(Error::InvalidDensity("not Hermitian".into()));
        }
        if (rho.trace() - c(1.0)).norm() > 1e-10 {
            return Err(Error::InvalidDensity(format!("trace {} differs from 1", rho.trace())));
        }
        let eig = rho.clone().symmetric_eigen();
        let vals: Vec<f64> = eig.eigenvalues.iter().copied().collect();
        if vals.iter().any(|&p| p < -1e-12) {
            return Err(Error::InvalidDensity("negative eigenvalue".into()));
        }
        let root = hermitian_fn(&vals, &eig.eigenvectors, |p| c(p.max(0.0).sqrt()));
        let omega = vec_of(&root);
        if !check_standard(n, &omega)?.cyclic {
            return Err(Error::NotStandard);
        }
        Ok(StandardPair { n, rho, omega })
    }

    /// Diagonal density matrix with the given eigenvalues.
    pub fn from_eigenvalues(p: &[f64]) -> Result<Self> {
        Self::from_density(CMat::from_diagonal(&CVec::from_iterator(p.len(), p.iter().map(|&v| c(v)))))
    }

    /// Random faithful density: eigenvalues proportional to `floor + U(0, 1)`
    /// in a Haar-like random unitary basis.
    pub fn random<R: Rng>(n: usize, floor: f64, rng: &mut R) -> Result<Self> {
        let raw: Vec<f64> = (0..n).map(|_| floor + rng.gen::<f64>()).collect();
        let total: f64 = raw.iter().sum();
        let q = random_gaussian(n, rng).qr().q();
        let d = CMat::from_diagonal(&CVec::from_iterator(n, raw.iter().map(|&v| c(v / total))));
        let rho = &q * d * q.adjoint();
        Self::from_density((&rho + rho.adjoint()).scale(0.5))
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn rho(&self) -> &CMat {
        &self.rho
    }

    pub fn omega(&self) -> &CVec {
        &self.omega
    }

    /// `a ⊗ 1`.
    pub fn represent(&self, a: &CMat) -> CMat {
        kron(a, &CMat::identity(self.n, self.n))
    }

    /// `<Omega, x Omega>`.
    pub fn state(&self, x: &CMat) -> Complex64 {
        self.omega.dotc(&(x * &self.omega))
    }
}

/// Complex matrix with independent standard Gaussian real and imaginary parts.
pub fn random_gaussian<R: Rng>(n: usize, rng: &mut R) -> CMat {
    CMat::from_fn(n, n, |_, _| Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)))
}

/// `J` and `Delta` with the spectral data of `Delta`.
#[derive(Clone, Debug)]
pub struct ModularData {
    pub j: AntiUnitary,
    pub delta: CMat,
    eigenvalues: Vec<f64>,
    eigenvectors: CMat,
}

impl ModularData {
    /// `Delta^z` for complex `z`.
    pub fn delta_power(&self, z: Complex64) -> CMat {
        hermitian_fn(&self.eigenvalues, &self.eigenvectors, |l| (z * l.ln()).exp())
    }

    /// Eigenvalues of `Delta` in ascending order.
    pub fn spectrum(&self) -> Vec<f64> {
        let mut s = self.eigenvalues.clone();
        s.sort_by(f64::total_cmp);
        s
    }

    /// One CSV row per eigenvalue.
    pub fn write_spectrum_csv<W: std::io::Write>(&self, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        out.write_record(["k", "eigenvalue"])?;
        for (k, l) in self.spectrum().iter().enumerate() {
            out.write_record([k.to_string(), format!("{l:e}")])?;
        }
        out.flush()?;
        Ok(())
    }
}

/// Solves `S (a ⊗ 1) Omega = (a^* ⊗ 1) Omega` over the matrix units and splits
/// `S = J Delta^{1/2}`. The result is checked against the closed forms.
pub fn tomita_operators(pair: &StandardPair) -> Result<ModularData> {
    let n = pair.n;
    let dim = n * n;
    let mut v = CMat::zeros(dim, dim);
    let mut w = CMat::zeros(dim, dim);
    for i in 0..n {
        for l in 0..n {
            let mut e = CMat::zeros(n, n);
            e[(i, l)] = c(1.0);
            let k = i * n + l;
            v.set_column(k, &(pair.represent(&e) * &pair.omega));
            w.set_column(k, &(pair.represent(&e.adjoint()) * &pair.omega));
        }
    }
    let vinv = v.conjugate().try_inverse().ok_or(Error::NotStandard)?;
    let m_s = w * vinv;
    // S = M_S C, S^* = M_S^T C, Delta = S^* S.
    let delta = m_s.transpose() * m_s.conjugate();
    let delta = (&delta + delta.adjoint()).scale(0.5);
    let eig = delta.clone().symmetric_eigen();
    let eigenvalues: Vec<f64> = eig.eigenvalues.iter().copied().collect();
    if eigenvalues.iter().any(|&l| l <= 0.0) {
        return Err(Error::NotStandard);
    }
    let inv_root = hermitian_fn(&eigenvalues, &eig.eigenvectors, |l| c(l.powf(-0.5)));
    let j = AntiUnitary { u: &m_s * inv_root.conjugate() };
    let data = ModularData { j, delta, eigenvalues, eigenvectors: eig.eigenvectors };

    let rho_inv = pair.rho.clone().try_inverse().ok_or(Error::NotStandard)?;
    let closed = kron(&pair.rho, &rho_inv.conjugate());
    let swap = CMat::from_fn(dim, dim, |r, s| if r == (s % n) * n + s / n { c(1.0) } else { c(0.0) });
    let scale = frob(&closed);
    if frob(&(&data.delta - &closed)) > 1e-8 * scale || frob(&(&data.j.u - &swap)) > 1e-8 * (dim as f64).sqrt() {
        return Err(Error::Internal("polar decomposition disagrees with the closed form".into()));
    }
    Ok(data)
}

/// `Delta^{it} x Delta^{-it}`.
pub fn modular_flow(data: &ModularData, x: &CMat, t: f64) -> CMat {
    data.delta_power(Complex64::new(0.0, t)) * x * data.delta_power(Complex64::new(0.0, -t))
}

/// Hilbert-Schmidt distance from `x` to `M_n ⊗ 1`.
pub fn distance_to_algebra(n: usize, x: &CMat) -> f64 {
    let mut a = CMat::zeros(n, n);
    for i in 0..n {
        for l in 0..n {
            a[(i, l)] = (0..n).map(|k| x[(i * n + k, l * n + k)]).sum::<Complex64>() / c(n as f64);
        }
    }
    frob(&(x - kron(&a, &CMat::identity(n, n))))
}

/// Hilbert-Schmidt distance from `x` to `1 ⊗ M_n`.
pub fn distance_to_commutant(n: usize, x: &CMat) -> f64 {
    let mut b = CMat::zeros(n, n);
    for k in 0..n {
        for l in 0..n {
            b[(k, l)] = (0..n).map(|i| x[(i * n + k, i * n + l)]).sum::<Complex64>() / c(n as f64);
        }
    }
    frob(&(x - kron(&CMat::identity(n, n), &b)))
}

fn unit_random<R: Rng>(n: usize, rng: &mut R) -> CMat {
    let a = random_gaussian(n, rng);
    let s = frob(&a);
    a.unscale(s)
}

fn pair_params(pair: &StandardPair) -> serde_json::Value {
    let eig: Vec<f64> = pair.rho.clone().symmetric_eigen().eigenvalues.iter().copied().collect();
    json!({"n": pair.n, "rho_eigenvalues": eig})
}

/// `J^2 = 1`, `J Omega = Omega`, `Delta Omega = Omega`, `J Delta J = Delta^{-1}`,
/// `Delta^{1/2} = J S` and the spectrum closed under inversion.
pub fn check_identities(pair: &StandardPair, data: &ModularData) -> Report {
    let dim = pair.n * pair.n;
    let id = CMat::identity(dim, dim);
    let om = &pair.omega;
    let mut dev = frob(&(data.j.compose(&data.j) - &id));
    dev = dev.max((data.j.apply(om) - om).norm());
    dev = dev.max((&data.delta * om - om).norm());
    let inv = data.delta_power(c(-1.0));
    dev = dev.max(frob(&(data.j.conjugate_op(&data.delta) - &inv)) / frob(&inv));
    let spec = data.spectrum();
    for (a, b) in spec.iter().zip(spec.iter().rev()) {
        dev = dev.max((a * b - 1.0).abs());
    }
    // J S = Delta^{1/2} on the basis (a ⊗ 1) Omega with a a matrix unit.
    let root = data.delta_power(c(0.5));
    let n = pair.n;
    for i in 0..n {
        for l in 0..n {
            let mut e = CMat::zeros(n, n);
            e[(i, l)] = c(1.0);
            let s_xi = pair.represent(&e.adjoint()) * om;
            let lhs = data.j.apply(&s_xi);
            dev = dev.max((lhs - &root * (pair.represent(&e) * om)).norm());
        }
    }
    Report::new("modular_identities", pair_params(pair), 1, dev, 1e-12)
}

/// `J (a ⊗ 1) J` lies in `1 ⊗ M_n` and commutes with `b ⊗ 1`, for random unit-norm `a`, `b`.
pub fn check_commutant<R: Rng>(pair: &StandardPair, data: &ModularData, samples: usize, tol: f64, rng: &mut R) -> Report {
    let n = pair.n;
    let mut dev: f64 = 0.0;
    for _ in 0..samples {
        let (a, b) = (unit_random(n, rng), unit_random(n, rng));
        let ja = data.j.conjugate_op(&pair.represent(&a));
        let bb = pair.represent(&b);
        dev = dev.max(frob(&(&ja * &bb - &bb * &ja)));
        dev = dev.max(distance_to_commutant(n, &ja));
    }
    Report::new("modular_commutant", pair_params(pair), samples, dev, tol)
}

/// `sigma_t(a ⊗ 1)` stays in `M_n ⊗ 1` over the time grid.
pub fn check_flow_invariance<R: Rng>(
    pair: &StandardPair,
    data: &ModularData,
    samples: usize,
    times: &[f64],
    tol: f64,
    rng: &mut R,
) -> Report {
    let mut dev: f64 = 0.0;
    for _ in 0..samples {
        let a = pair.represent(&unit_random(pair.n, rng));
        for &t in times {
            dev = dev.max(distance_to_algebra(pair.n, &modular_flow(data, &a, t)));
        }
    }
    Report::new("modular_flow_invariance", pair_params(pair), samples * times.len(), dev, tol)
}

/// `omega(x sigma_z(y))` with `sigma_z(y) = Delta^{iz} y Delta^{-iz}`.
fn kms_sides(pair: &StandardPair, data: &ModularData, x: &CMat, y: &CMat, t: f64, shift: f64) -> (Complex64, Complex64) {
    let z = Complex64::new(t, shift);
    let iz = Complex64::new(0.0, 1.0) * z;
    let shifted = data.delta_power(iz) * y * data.delta_power(-iz);
    let lhs = pair.state(&(x * shifted));
    let rhs = pair.state(&(modular_flow(data, y, t) * x));
    (lhs, rhs)
}

/// KMS boundary condition `omega(a sigma_{t - i}(b)) = omega(sigma_t(b) a)` on a time grid.
pub fn check_kms<R: Rng>(
    pair: &StandardPair,
    data: &ModularData,
    samples: usize,
    times: &[f64],
    tol: f64,
    rng: &mut R,
) -> Report {
    let mut dev: f64 = 0.0;
    for _ in 0..samples {
        let x = pair.represent(&unit_random(pair.n, rng));
        let y = pair.represent(&unit_random(pair.n, rng));
        for &t in times {
            let (l, r) = kms_sides(pair, data, &x, &y, t, -1.0);
            dev = dev.max((l - r).norm());
        }
    }
    Report::new("modular_kms", pair_params(pair), samples * times.len(), dev, tol)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::report::seeded_rng;

    #[test]
    fn standardness_is_a_rank_condition() {
        let p = StandardPair::from_eigenvalues(&[0.5, 0.5]).unwrap();
        assert_eq!(check_standard(2, p.omega()).unwrap(), StandardCheck { cyclic: true, separating: true });
        let mut e = CVec::zeros(4);
        e[0] = c(1.0);
        assert_eq!(check_standard(2, &e).unwrap(), StandardCheck { cyclic: false, separating: false });
        assert!(matches!(StandardPair::from_eigenvalues(&[0.9, 0.1, 0.0]), Err(Error::NotStandard)));
        assert!(matches!(check_standard(3, &e), Err(Error::DimensionMismatch { expected: 9, got: 4 })));
        assert!(matches!(StandardPair::from_eigenvalues(&[0.9, 0.3]), Err(Error::InvalidDensity(_))));
        assert!((p.omega().norm() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn tracial_state_has_trivial_delta() {
        let p = StandardPair::from_eigenvalues(&[0.5, 0.5]).unwrap();
        let d = tomita_operators(&p).unwrap();
        assert!(frob(&(&d.delta - CMat::identity(4, 4))) < 1e-12);
        // J(e_a ⊗ e_b) = e_b ⊗ e_a.
        for a in 0..2 {
            for b in 0..2 {
                let mut xi = CVec::zeros(4);
                xi[a * 2 + b] = c(1.0);
                let out = d.j.apply(&xi);
                assert!((out[b * 2 + a] - c(1.0)).norm() < 1e-12);
            }
        }
        let x = p.represent(&random_gaussian(2, &mut seeded_rng(0, "t")));
        assert!(frob(&(modular_flow(&d, &x, 0.7) - &x)) < 1e-12);
    }

    #[test]
    fn qubit_spectrum_matches_brute_force() {
        let p = StandardPair::from_eigenvalues(&[0.3, 0.7]).unwrap();
        let d = tomita_operators(&p).unwrap();
        let expected = [3.0 / 7.0, 1.0, 1.0, 7.0 / 3.0];
        for (a, b) in d.spectrum().iter().zip(expected) {
            assert!((a - b).abs() < 1e-12, "{a} {b}");
        }
        // sigma_t(|0><1|) = (0.3/0.7)^{it} |0><1|.
        let mut e = CMat::zeros(2, 2);
        e[(0, 1)] = c(1.0);
        for t in [0.0, 0.5, 1.0] {
            let got = modular_flow(&d, &p.represent(&e), t);
            let phase = (Complex64::new(0.0, t) * (0.3f64 / 0.7).ln()).exp();
            assert!(frob(&(got - p.represent(&e).scale(1.0).map(|z| z * phase))) < 1e-12);
            let (l, r) = kms_sides(&p, &d, &p.represent(&e.adjoint()), &p.represent(&e), t, -1.0);
            assert!((l - r).norm() < 1e-12);
        }
        let r = check_identities(&p, &d);
        assert!(r.pass, "{r:?}");
    }

    #[test]
    fn opposite_strip_direction_breaks_kms() {
        let p = StandardPair::from_eigenvalues(&[0.3, 0.7]).unwrap();
        let d = tomita_operators(&p).unwrap();
        let mut e = CMat::zeros(2, 2);
        e[(0, 1)] = c(1.0);
        let (x, y) = (p.represent(&e.adjoint()), p.represent(&e));
        let (l, r) = kms_sides(&p, &d, &x, &y, 0.0, 1.0);
        assert!((l - r).norm() > 0.1);
    }

    #[test]
    fn random_pairs_pass_all_checks() {
        let mut rng = seeded_rng(42, "modular");
        for n in [2, 3, 4] {
            for _ in 0..5 {
                let p = StandardPair::random(n, 0.2, &mut rng).unwrap();
                let d = tomita_operators(&p).unwrap();
                for r in [
                    check_identities(&p, &d),
                    check_commutant(&p, &d, 3, 1e-12, &mut rng),
                    check_flow_invariance(&p, &d, 3, &[0.0, 0.5, 1.0, 2.5], 1e-12, &mut rng),
                    check_kms(&p, &d, 3, &[0.0, 0.5, 1.0], 1e-11, &mut rng),
                ] {
                    assert!(r.pass, "{r:?}");
                }
            }
        }
    }
}
