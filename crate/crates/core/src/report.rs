//! Check reports and seeded sampling shared by the axiom suites.

use std::io::Write;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use serde_json::Value;
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::spacetime::{Point, Region, RegionShape, Spacetime2D};
use crate::testfun::{bump, TestFunction};

/// Outcome of one executable check.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub check_id: String,
    pub params: Value,
    pub n_samples: usize,
    pub max_deviation: f64,
    pub tolerance: f64,
    pub pass: bool,
}

impl Report {
    /// Passes iff `max_deviation <= tolerance`; a NaN deviation fails.
    pub fn new(check_id: impl Into<String>, params: Value, n_samples: usize, max_deviation: f64, tolerance: f64) -> Self {
        Report { check_id: check_id.into(), params, n_samples, max_deviation, tolerance, pass: max_deviation <= tolerance }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

/// Writes `check_id,n_samples,max_deviation,tolerance,pass` rows.
pub fn write_summary_csv<W: Write>(reports: &[Report], w: W) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(["check_id", "n_samples", "max_deviation", "tolerance", "pass"])?;
    for r in reports {
        out.write_record([
            r.check_id.clone(),
            r.n_samples.to_string(),
            format!("{:e}", r.max_deviation),
            format!("{:e}", r.tolerance),
            r.pass.to_string(),
        ])?;
    }
    out.flush()?;
    Ok(())
}

/// Generator seeded from the run seed and a stable hash of a stream name.
pub fn seeded_rng(seed: u64, stream: &str) -> ChaCha8Rng {
    let digest = Sha256::digest(stream.as_bytes());
    let mut k = [0u8; 8];
    k.copy_from_slice(&digest[..8]);
    ChaCha8Rng::seed_from_u64(seed ^ u64::from_le_bytes(k))
}

fn amplitude<R: Rng>(rng: &mut R) -> f64 {
    let a = rng.gen_range(0.5..1.0);
    if rng.gen_bool(0.5) {
        a
    } else {
        -a
    }
}

/// Random bump supported in the region, at least `2h` away from its boundary.
/// Regions other than double cones and slabs get a bump around a random node
/// small enough to fit, or the zero function if none does.
pub fn random_bump_in<R: Rng>(o: &Region, rng: &mut R) -> Result<TestFunction> {
    let m = o.ambient();
    let h = m.h();
    match o.shape() {
        RegionShape::DoubleCone { center, radius } => {
            let room = radius - 2.0 * h;
            if room <= 2.0 * h {
                return Ok(TestFunction::zero(m));
            }
            // |dt| + |dx| + sqrt(rt^2 + rx^2) <= room keeps the bump inside the diamond.
            let s = rng.gen_range(0.4..0.7) * room;
            let ang = rng.gen_range(0.2..1.37f64);
            let (rt, rx) = (s * ang.cos(), s * ang.sin());
            let left = room - s;
            let dt = rng.gen_range(-0.5..0.5) * left;
            let dx = (left - 2.0 * dt.abs()).max(0.0) * rng.gen_range(-0.5..0.5);
            bump(m, Point::new(center.t + dt, center.x + dx), (rt, rx), amplitude(rng))
        }
        RegionShape::Slab { t_lo, t_hi } => {
            let room = 0.5 * (t_hi - t_lo) - 2.0 * h;
            if room <= 2.0 * h {
                return Ok(TestFunction::zero(m));
            }
            let rt = rng.gen_range(0.5..0.9) * room;
            let tc = 0.5 * (t_lo + t_hi) + rng.gen_range(-1.0..1.0) * (room - rt);
            let (x0, x1) = m.x_window();
            let rx = rng.gen_range(0.5..1.0f64).min(0.2 * (x1 - x0));
            let xc = if m.is_cylinder() { rng.gen_range(x0..x1) } else { rng.gen_range(x0 + rx + 2.0 * h..x1 - rx - 2.0 * h) };
            bump(m, Point::new(tc, xc), (rt, rx), amplitude(rng))
        }
        RegionShape::Cells(_) => {
            let nodes = o.nodes();
            for _ in 0..16 {
                if nodes.is_empty() {
                    break;
                }
                let c = nodes[rng.gen_range(0..nodes.len())];
                let p = m.point_of(c);
                let r = 3.0 * h;
                let f = bump(m, p, (r, r), amplitude(rng))?;
                if f.supported_in(o) {
                    return Ok(f);
                }
            }
            Ok(TestFunction::zero(m))
        }
    }
}

/// How sampled test functions are drawn from a region.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Sampler {
    /// `random_bump_in`: bumps scaled to the region.
    #[default]
    Fitted,
    /// Round bumps with radius in `[r_min, r_max]`, placed inside a double cone.
    Round { r_min: f64, r_max: f64 },
}

impl Sampler {
    pub fn draw<R: Rng>(&self, o: &Region, rng: &mut R) -> Result<TestFunction> {
        match (*self, o.shape()) {
            (Sampler::Round { r_min, r_max }, RegionShape::DoubleCone { center, radius }) => {
                let m = o.ambient();
                let room = radius - 2.0 * m.h();
                let sq2 = std::f64::consts::SQRT_2;
                if r_min * sq2 > room {
                    return Err(Error::DomainMismatch(format!(
                        "double cone of radius {radius} cannot hold bumps of radius {r_min}"
                    )));
                }
                // A disc of radius r sits in the diamond when |dt| + |dx| + sqrt(2) r <= room.
                let r = rng.gen_range(r_min..=r_max.min(room / sq2));
                let left = room - sq2 * r;
                let dt = rng.gen_range(-0.5..=0.5) * left;
                let dx = (left - 2.0 * dt.abs()).max(0.0) * rng.gen_range(-0.5..=0.5);
                bump(m, Point::new(center.t + dt, center.x + dx), (r, r), amplitude(rng))
            }
            _ => random_bump_in(o, rng),
        }
    }
}

/// Random bump anywhere in the window, with radii in `radii` and a margin of `2h`.
/// On the plane the bump is also kept where its shadow on `t = 0` fits in the window.
pub fn random_global_bump<R: Rng>(m: &Spacetime2D, radii: (f64, f64), rng: &mut R) -> Result<TestFunction> {
    let h = m.h();
    let rt = rng.gen_range(radii.0..=radii.1);
    let rx = rng.gen_range(radii.0..=radii.1);
    let (t0, t1) = m.t_window();
    let (x0, x1) = m.x_window();
    if m.is_cylinder() {
        let tc = rng.gen_range(t0 + rt + 2.0 * h..=t1 - rt - 2.0 * h);
        return bump(m, Point::new(tc, rng.gen_range(x0..x1)), (rt, rx), amplitude(rng));
    }
    let half = 0.5 * (x1 - x0);
    let reach = half - rx - rt - 4.0 * h;
    let (lo, hi) = ((t0 + rt + 2.0 * h).max(-reach), (t1 - rt - 2.0 * h).min(reach));
    if lo > hi {
        return Err(Error::WindowTooSmall(format!("no room for a bump of radii ({rt}, {rx})")));
    }
    let tc = rng.gen_range(lo..=hi);
    let room = reach - tc.abs();
    let xc = 0.5 * (x0 + x1) + rng.gen_range(-room..=room);
    bump(m, Point::new(tc, xc), (rt, rx), amplitude(rng))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pass_flag_and_csv() {
        let r = Report::new("x", serde_json::json!({"a": 1}), 3, 1e-12, 1e-10);
        assert!(r.pass);
        assert!(!Report::new("y", Value::Null, 1, f64::NAN, 1.0).pass);
        let mut buf = Vec::new();
        write_summary_csv(&[r], &mut buf).unwrap();
        let s = String::from_utf8(buf).unwrap();
        assert!(s.starts_with("check_id,n_samples"));
        assert_eq!(s.lines().count(), 2);
    }

    #[test]
    fn streams_are_stable_and_distinct() {
        let a: u64 = seeded_rng(1, "causality").gen();
        let b: u64 = seeded_rng(1, "causality").gen();
        let c: u64 = seeded_rng(1, "isotony").gen();
        assert_eq!(a, b);
        assert_ne!(a, c);
    }

    #[test]
    fn random_bumps_stay_inside() {
        let m = Spacetime2D::minkowski(0.5, 0.0625, (-4.0, 4.0), (-6.0, 6.0)).unwrap();
        let mut rng = seeded_rng(3, "bumps");
        let cone = Region::double_cone(&m, Point::new(0.5, -1.0), 1.2).unwrap();
        let slab = Region::slab(&m, -0.5, 0.5).unwrap();
        for _ in 0..20 {
            let f = random_bump_in(&cone, &mut rng).unwrap();
            assert!(!f.is_zero() && f.supported_in(&cone));
            let g = random_bump_in(&slab, &mut rng).unwrap();
            assert!(!g.is_zero() && g.supported_in(&slab));
            assert!(!random_global_bump(&m, (0.5, 1.0), &mut rng).unwrap().is_zero());
        }
        let wide = Region::double_cone(&m, Point::new(0.0, 0.0), 3.0).unwrap();
        let round = Sampler::Round { r_min: 1.5, r_max: 2.5 };
        for _ in 0..20 {
            let f = round.draw(&wide, &mut rng).unwrap();
            assert!(!f.is_zero() && f.supported_in(&wide));
        }
        assert!(matches!(round.draw(&cone, &mut rng), Err(Error::DomainMismatch(_))));
    }
}
