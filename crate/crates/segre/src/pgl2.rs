//! Moebius transformations of P^1: fitting a unique PGL_2 element through
//! three point pairs, and projective equivalence of ordered tuples.

use crate::error::{Result, SegreError};
use crate::field::{FieldSpec, Scalar};
use crate::geometry::ProjPoint;

/// An invertible 2x2 matrix up to scalar, normalized so its first nonzero
/// entry (row-major) equals 1.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Mobius {
    entries: [Scalar; 4], // row-major [a, b, c, d]
}

impl Mobius {
    pub fn new(entries: [Scalar; 4]) -> Result<Mobius> {
        let [a, b, c, d] = &entries;
        let det = a.mul(d).sub(&b.mul(c));
        if det.is_zero() {
            return Err(SegreError::Degenerate("singular 2x2 matrix".into()));
        }
        Ok(Mobius::normalized(entries))
    }

    fn normalized(entries: [Scalar; 4]) -> Mobius {
        let lead = entries.iter().find(|e| !e.is_zero()).expect("nonzero matrix");
        let inv = lead.inv().unwrap();
        let e = entries.clone().map(|x| x.mul(&inv));
        Mobius { entries: e }
    }

    pub fn identity(field: &FieldSpec) -> Mobius {
        Mobius { entries: [field.one(), field.zero(), field.zero(), field.one()] }
    }

    pub fn entries(&self) -> &[Scalar; 4] {
        &self.entries
    }

    pub fn apply(&self, pt: &ProjPoint) -> ProjPoint {
        assert_eq!(pt.ambient_dim(), 1, "Mobius acts on P^1");
        let [a, b, c, d] = &self.entries;
        let (t, u) = (&pt.coords()[0], &pt.coords()[1]);
        ProjPoint::new(vec![a.mul(t).add(&b.mul(u)), c.mul(t).add(&d.mul(u))])
            .expect("invertible matrix maps nonzero to nonzero")
    }

    pub fn compose(&self, other: &Mobius) -> Mobius {
        let [a, b, c, d] = &self.entries;
        let [e, f, g, h] = &other.entries;
        Mobius::normalized([
            a.mul(e).add(&b.mul(g)),
            a.mul(f).add(&b.mul(h)),
            c.mul(e).add(&d.mul(g)),
            c.mul(f).add(&d.mul(h)),
        ])
    }

    pub fn inverse(&self) -> Mobius {
        let [a, b, c, d] = &self.entries;
        Mobius::normalized([d.clone(), b.neg(), c.neg(), a.clone()])
    }
}

fn distinct3(pts: &[ProjPoint; 3]) -> bool {
    pts[0] != pts[1] && pts[0] != pts[2] && pts[1] != pts[2]
}

/// Matrix sending the standard frame (1:0), (0:1), (1:1) to q0, q1, q2.
fn frame_matrix(q: &[ProjPoint; 3]) -> Result<Mobius> {
    if !distinct3(q) {
        return Err(SegreError::Degenerate("repeated point in triple".into()));
    }
    // Solve lam*q0 + mu*q1 = q2 in coordinates (2x2 system, invertible since
    // q0 != q1).
    let (x0, y0) = (&q[0].coords()[0], &q[0].coords()[1]);
    let (x1, y1) = (&q[1].coords()[0], &q[1].coords()[1]);
    let (x2, y2) = (&q[2].coords()[0], &q[2].coords()[1]);
    let det = x0.mul(y1).sub(&y0.mul(x1));
    let det_inv = det.inv().expect("q0 != q1 in P^1");
    let lam = x2.mul(y1).sub(&y2.mul(x1)).mul(&det_inv);
    let mu = x0.mul(y2).sub(&y0.mul(x2)).mul(&det_inv);
    // lam, mu nonzero because q2 differs from both q0 and q1.
    Mobius::new([lam.mul(x0), mu.mul(x1), lam.mul(y0), mu.mul(y1)])
}

/// The unique (up to scalar) Moebius map sending src_j -> dst_j, j = 0,1,2.
pub fn fit_pgl2(src: &[ProjPoint; 3], dst: &[ProjPoint; 3]) -> Result<Mobius> {
    let ms = frame_matrix(src)?;
    let md = frame_matrix(dst)?;
    Ok(md.compose(&ms.inverse()))
}

/// Tests whether two equal-length ordered tuples (>= 3 pairwise distinct
/// points each) differ by a Moebius map; returns the map when they do.
pub fn projectively_equivalent(a: &[ProjPoint], b: &[ProjPoint]) -> Result<Option<Mobius>> {
    if a.len() != b.len() {
        return Err(SegreError::Shape("tuple length mismatch".into()));
    }
    if a.len() < 3 {
        return Err(SegreError::Precondition("need >= 3 points".into()));
    }
    for tuple in [a, b] {
        for i in 0..tuple.len() {
            for j in i + 1..tuple.len() {
                if tuple[i] == tuple[j] {
                    return Err(SegreError::Degenerate("repeated point in tuple".into()));
                }
            }
        }
    }
    let m = fit_pgl2(
        &[a[0].clone(), a[1].clone(), a[2].clone()],
        &[b[0].clone(), b[1].clone(), b[2].clone()],
    )?;
    for (x, y) in a.iter().zip(b) {
        if &m.apply(x) != y {
            return Ok(None);
        }
    }
    Ok(Some(m))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn gf(p: u64) -> FieldSpec {
        FieldSpec::prime(p).unwrap()
    }

    fn aff(f: &FieldSpec, t: i64) -> ProjPoint {
        ProjPoint::affine(f, t)
    }

    #[test]
    fn identity_fixed_points() {
        let f = gf(5);
        let tri = [aff(&f, 0), aff(&f, 1), ProjPoint::infinity(&f)];
        let m = fit_pgl2(&tri, &tri).unwrap();
        assert_eq!(m, Mobius::identity(&f));
    }

    #[test]
    fn one_minus_t_over_gf5() {
        // (0,1,inf) -> (1,0,inf) is t -> 1 - t; oracle: apply to the nodes.
        let f = gf(5);
        let src = [aff(&f, 0), aff(&f, 1), ProjPoint::infinity(&f)];
        let dst = [aff(&f, 1), aff(&f, 0), ProjPoint::infinity(&f)];
        let m = fit_pgl2(&src, &dst).unwrap();
        for t in 0..5 {
            assert_eq!(m.apply(&aff(&f, t)), aff(&f, 1 - t));
        }
        assert_eq!(m.apply(&ProjPoint::infinity(&f)), ProjPoint::infinity(&f));
    }

    #[test]
    fn doubling_map() {
        // (0,1,2) -> (0,2,4) is t -> 2t over GF(5).
        let f = gf(5);
        let m = fit_pgl2(&[aff(&f, 0), aff(&f, 1), aff(&f, 2)], &[aff(&f, 0), aff(&f, 2), aff(&f, 4)])
            .unwrap();
        for t in 0..5 {
            assert_eq!(m.apply(&aff(&f, t)), aff(&f, 2 * t));
        }
    }

    #[test]
    fn repeated_point_is_degenerate() {
        let f = gf(5);
        let bad = [aff(&f, 0), aff(&f, 0), aff(&f, 1)];
        let ok = [aff(&f, 0), aff(&f, 1), aff(&f, 2)];
        assert!(matches!(fit_pgl2(&bad, &ok), Err(SegreError::Degenerate(_))));
        assert!(matches!(fit_pgl2(&ok, &bad), Err(SegreError::Degenerate(_))));
    }

    #[test]
    fn equivalence_identity_and_none() {
        let f = gf(7);
        let inf = ProjPoint::infinity(&f);
        let a = [aff(&f, 0), aff(&f, 1), inf.clone(), aff(&f, 2)];
        assert_eq!(projectively_equivalent(&a, &a).unwrap(), Some(Mobius::identity(&f)));
        // only the identity fixes 0, 1, inf, and it sends 2 to 2 != 3
        let b = [aff(&f, 0), aff(&f, 1), inf, aff(&f, 3)];
        assert_eq!(projectively_equivalent(&a, &b).unwrap(), None);
    }

    #[test]
    fn equivalence_recovers_random_map() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha12Rng::seed_from_u64(42);
        let f = gf(11);
        let pts = crate::geometry::proj_space_points(&f, 1).unwrap();
        for _ in 0..500 {
            let m = loop {
                let e: Vec<Scalar> = (0..4).map(|_| f.from_int(rng.gen_range(0..11))).collect();
                if let Ok(m) = Mobius::new([e[0].clone(), e[1].clone(), e[2].clone(), e[3].clone()])
                {
                    break m;
                }
            };
            let n = rng.gen_range(3..7usize);
            let mut idx: Vec<usize> = (0..pts.len()).collect();
            // partial shuffle
            for i in 0..n {
                let j = rng.gen_range(i..idx.len());
                idx.swap(i, j);
            }
            let a: Vec<ProjPoint> = idx[..n].iter().map(|&i| pts[i].clone()).collect();
            let b: Vec<ProjPoint> = a.iter().map(|x| m.apply(x)).collect();
            assert_eq!(projectively_equivalent(&a, &b).unwrap(), Some(m.clone()));
        }
    }

    #[test]
    fn works_over_rationals() {
        let f = FieldSpec::rational();
        let src = [aff(&f, 0), aff(&f, 1), ProjPoint::infinity(&f)];
        let dst = [aff(&f, 3), aff(&f, 5), aff(&f, 7)];
        let m = fit_pgl2(&src, &dst).unwrap();
        for (s, d) in src.iter().zip(&dst) {
            assert_eq!(&m.apply(s), d);
        }
    }
}
