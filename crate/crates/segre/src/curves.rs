//! Rational normal curves of multidegree (n_1,...,n_k) inside Segre
//! varieties: evaluation, fitting through point sets on all-ones shapes,
//! enumeration over prime fields, and the extremal-set constructors.

use rand::seq::SliceRandom;
use rand::Rng;

use crate::error::{Result, SegreError};
use crate::field::{next_prime_at_least, FieldSpec, Scalar};
use crate::geometry::{
    proj_space_points, random_mpoint, random_proj_point, random_scalar, MPoint, PointSet,
    ProjPoint, Shape,
};
use crate::linalg::Matrix;
use crate::pgl2::{projectively_equivalent, Mobius};
use crate::segre::{defect, is_circuit, is_minimal, is_nondegenerate};

/// Standard degree-n Veronese coordinates (t^n, t^{n-1}u, ..., u^n).
fn veronese(t: &ProjPoint, n: usize) -> Vec<Scalar> {
    let field = t.field();
    let (x, y) = (&t.coords()[0], &t.coords()[1]);
    let mut xs = vec![field.one()];
    let mut ys = vec![field.one()];
    for j in 1..=n {
        xs.push(xs[j - 1].mul(x));
        ys.push(ys[j - 1].mul(y));
    }
    (0..=n).map(|j| xs[n - j].mul(&ys[j])).collect()
}

fn mat_apply(m: &Matrix, v: &[Scalar]) -> Vec<Scalar> {
    let field = v[0].field();
    m.rows_iter()
        .map(|row| row.iter().zip(v).fold(field.zero(), |acc, (a, b)| acc.add(&a.mul(b))))
        .collect()
}

fn mobius_matrix(field: &FieldSpec, m: &Mobius) -> Matrix {
    let [a, b, c, d] = m.entries();
    let _ = field;
    Matrix::from_rows(vec![vec![a.clone(), b.clone()], vec![c.clone(), d.clone()]]).unwrap()
}

/// Multidegree of a curve of the Segre variety; for an [`RncCurve`] this is
/// always the shape itself.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Multidegree {
    pub degrees: Vec<usize>,
}

/// A rational normal curve of Y: per factor, an invertible frame matrix
/// composed with the standard degree-n_i Veronese map P^1 -> P^{n_i}.
///
/// For all-ones shapes the frames are k invertible 2x2 matrices; curves
/// constructed via [`RncCurve::from_mobius`], [`fit_multidegree_one`] or
/// [`enumerate_b_k`] are reparametrized so the first frame is the identity,
/// which makes the representation unique per curve and makes `==` curve
/// equality.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct RncCurve {
    shape: Shape,
    field: FieldSpec,
    frames: Vec<Matrix>,
}

impl RncCurve {
    pub fn new(shape: Shape, field: FieldSpec, frames: Vec<Matrix>) -> Result<RncCurve> {
        if frames.len() != shape.k() {
            return Err(SegreError::Shape("one frame per factor required".into()));
        }
        for (f, &n) in frames.iter().zip(shape.dims()) {
            if f.nrows() != n + 1 || f.ncols() != n + 1 {
                return Err(SegreError::Shape("frame must be square of factor size".into()));
            }
            if f.rank() != n + 1 {
                return Err(SegreError::Degenerate("singular frame matrix".into()));
            }
        }
        Ok(RncCurve { shape, field, frames })
    }

    /// The curve with every frame the identity (per-factor standard
    /// Veronese); for all-ones shapes this is the diagonal.
    pub fn diagonal(shape: Shape, field: FieldSpec) -> RncCurve {
        let frames = shape.dims().iter().map(|&n| Matrix::identity(&field, n + 1)).collect();
        RncCurve { shape, field, frames }
    }

    /// Canonical curve of an all-ones shape from one Moebius map per factor:
    /// reparametrizes by the inverse of the first map so the stored frames
    /// are (id, M_2 M_1^{-1}, ..., M_k M_1^{-1}).
    pub fn from_mobius(shape: Shape, field: FieldSpec, maps: &[Mobius]) -> Result<RncCurve> {
        if !shape.is_all_ones() {
            return Err(SegreError::Shape("from_mobius needs an all-ones shape".into()));
        }
        if maps.len() != shape.k() {
            return Err(SegreError::Shape("one map per factor required".into()));
        }
        let inv = maps[0].inverse();
        let frames = maps.iter().map(|m| mobius_matrix(&field, &m.compose(&inv))).collect();
        RncCurve::new(shape, field, frames)
    }

    pub fn shape(&self) -> &Shape {
        &self.shape
    }

    pub fn field(&self) -> &FieldSpec {
        &self.field
    }

    pub fn frames(&self) -> &[Matrix] {
        &self.frames
    }

    pub fn multidegree(&self) -> Multidegree {
        Multidegree { degrees: self.shape.dims().to_vec() }
    }

    pub fn point(&self, t: &ProjPoint) -> MPoint {
        assert_eq!(t.ambient_dim(), 1, "curve parameter lives on P^1");
        let factors: Vec<ProjPoint> = self
            .frames
            .iter()
            .zip(self.shape.dims())
            .map(|(f, &n)| {
                ProjPoint::new(mat_apply(f, &veronese(t, n)))
                    .expect("invertible frame maps nonzero to nonzero")
            })
            .collect();
        MPoint::new(&self.shape, factors).expect("factor sizes match the shape")
    }

    /// All rational points of the curve (prime fields only): exactly p+1.
    pub fn points(&self) -> Result<Vec<MPoint>> {
        let params = proj_space_points(&self.field, 1)?;
        Ok(params.iter().map(|t| self.point(t)).collect())
    }

    /// The point set sampled at the given (distinct) parameters.
    pub fn sample(&self, params: &[ProjPoint]) -> Result<PointSet> {
        PointSet::new(
            self.shape.clone(),
            self.field,
            params.iter().map(|t| self.point(t)).collect(),
        )
    }
}

pub fn curve_point(c: &RncCurve, t: &ProjPoint) -> MPoint {
    c.point(t)
}

/// Fits the unique multidegree-(1,...,1) curve through an ordered point set
/// of an all-ones shape, if one exists: the factor projections must be
/// projectively equivalent as ordered tuples.
pub fn fit_multidegree_one(s: &PointSet) -> Result<Option<RncCurve>> {
    if !s.shape().is_all_ones() {
        return Err(SegreError::Shape("fit needs an all-ones shape".into()));
    }
    if s.len() < 3 {
        return Err(SegreError::Precondition("need >= 3 points to fit a curve".into()));
    }
    let k = s.shape().k();
    let proj = |i: usize| -> Vec<ProjPoint> {
        s.points().iter().map(|p| p.factor(i).clone()).collect()
    };
    let first = proj(0);
    for i in 0..k {
        let pi = if i == 0 { first.clone() } else { proj(i) };
        for a in 0..pi.len() {
            for b in a + 1..pi.len() {
                if pi[a] == pi[b] {
                    return Err(SegreError::Precondition(format!(
                        "projection to factor {} is not injective on S",
                        i + 1
                    )));
                }
            }
        }
    }
    let mut maps = vec![Mobius::identity(s.field())];
    for i in 1..k {
        match projectively_equivalent(&first, &proj(i))? {
            Some(m) => maps.push(m),
            None => return Ok(None),
        }
    }
    let curve = RncCurve::from_mobius(s.shape().clone(), *s.field(), &maps)?;
    for p in s.points() {
        assert_eq!(&curve.point(p.factor(0)), p, "fitted curve passes through S");
    }
    Ok(Some(curve))
}

/// All normalized representatives of PGL_2(F_p): invertible 2x2 matrices
/// with first nonzero entry 1, exactly p^3 - p of them.
pub fn pgl2_elements(field: &FieldSpec) -> Result<Vec<Mobius>> {
    let Some(p) = field.modulus() else {
        return Err(SegreError::UnsupportedField);
    };
    let mut out = Vec::with_capacity((p * p * p - p) as usize);
    for a in 0..p {
        for b in 0..p {
            for c in 0..p {
                for d in 0..p {
                    if [a, b, c, d].iter().find(|&&x| x != 0) != Some(&&1) {
                        continue;
                    }
                    let e = [
                        field.from_int(a as i64),
                        field.from_int(b as i64),
                        field.from_int(c as i64),
                        field.from_int(d as i64),
                    ];
                    if let Ok(m) = Mobius::new(e) {
                        out.push(m);
                    }
                }
            }
        }
    }
    debug_assert_eq!(out.len() as u64, p * p * p - p);
    Ok(out)
}

/// All multidegree-(1,...,1) curves of (P^1)^k over F_p in canonical form:
/// (p^3 - p)^{k-1} of them, each distinct as a point set.
pub fn enumerate_b_k(field: &FieldSpec, k: usize) -> Result<Vec<RncCurve>> {
    if k == 0 {
        return Err(SegreError::Precondition("k >= 1 required".into()));
    }
    let group = pgl2_elements(field)?;
    let shape = Shape::new(vec![1; k])?;
    let id = Mobius::identity(field);
    let mut curves = Vec::new();
    let mut idx = vec![0usize; k - 1];
    loop {
        let mut maps = vec![id.clone()];
        for &j in &idx {
            maps.push(group[j].clone());
        }
        curves.push(RncCurve::from_mobius(shape.clone(), *field, &maps)?);
        // odometer over PGL_2^{k-1}
        let mut pos = 0;
        loop {
            if pos == idx.len() {
                return Ok(curves);
            }
            idx[pos] += 1;
            if idx[pos] < group.len() {
                break;
            }
            idx[pos] = 0;
            pos += 1;
        }
    }
}

const CONSTRUCT_RETRIES: u32 = 200;

fn random_invertible<R: Rng>(field: &FieldSpec, n: usize, rng: &mut R) -> Matrix {
    loop {
        let rows: Vec<Vec<Scalar>> =
            (0..n).map(|_| (0..n).map(|_| random_scalar(field, rng)).collect()).collect();
        let m = Matrix::from_rows(rows).unwrap();
        if m.rank() == n {
            return m;
        }
    }
}

fn random_mobius<R: Rng>(field: &FieldSpec, rng: &mut R) -> Mobius {
    loop {
        let e = [
            random_scalar(field, rng),
            random_scalar(field, rng),
            random_scalar(field, rng),
            random_scalar(field, rng),
        ];
        if let Ok(m) = Mobius::new(e) {
            return m;
        }
    }
}

/// `count` distinct points of P^1 over the field, randomly chosen.
fn random_parameters<R: Rng>(
    field: &FieldSpec,
    count: usize,
    rng: &mut R,
) -> Result<Vec<ProjPoint>> {
    match field.modulus() {
        Some(p) => {
            if (p + 1) < count as u64 {
                return Err(SegreError::FieldTooSmall {
                    needed: next_prime_at_least(count as u64 - 1),
                    have: p,
                });
            }
            let mut pts = proj_space_points(field, 1)?;
            pts.shuffle(rng);
            pts.truncate(count);
            Ok(pts)
        }
        None => {
            let mut pts = Vec::new();
            while pts.len() < count {
                let t = ProjPoint::affine(field, rng.gen_range(-1000..=1000));
                if !pts.contains(&t) {
                    pts.push(t);
                }
            }
            Ok(pts)
        }
    }
}

/// Nondegenerate set with exactly `e + 2 + m` points and defect `e`, where
/// `m = max(n_1 - 1, n_2, ..., n_k)`: e+2 points on a factor-1 line with all
/// other coordinates fixed, plus m spanning points.
pub fn construct_example_n2<R: Rng>(
    shape: &Shape,
    field: &FieldSpec,
    e: usize,
    rng: &mut R,
) -> Result<PointSet> {
    if shape.k() < 2 {
        return Err(SegreError::Precondition("k >= 2 required".into()));
    }
    if e == 0 {
        return Err(SegreError::Precondition("e >= 1 required".into()));
    }
    let dims = shape.dims();
    let m = dims[1..].iter().copied().chain([dims[0] - 1]).max().unwrap();
    if let Some(p) = field.modulus() {
        if p + 1 < (e + 2) as u64 {
            return Err(SegreError::FieldTooSmall {
                needed: next_prime_at_least((e + 1) as u64),
                have: p,
            });
        }
    }
    // the line x_2 = ... = x_{n_1} = 0 in the first factor
    let line_pt = |t: &ProjPoint| -> ProjPoint {
        let mut coords = vec![field.zero(); dims[0] + 1];
        coords[0] = t.coords()[0].clone();
        coords[1] = t.coords()[1].clone();
        ProjPoint::new(coords).unwrap()
    };
    for _ in 0..CONSTRUCT_RETRIES {
        let params = random_parameters(field, e + 2, rng)?;
        let anchors: Vec<ProjPoint> =
            dims[1..].iter().map(|&n| random_proj_point(field, n, rng)).collect();
        let mut pts: Vec<MPoint> = Vec::with_capacity(e + 2 + m);
        for t in &params {
            let mut factors = vec![line_pt(t)];
            factors.extend(anchors.iter().cloned());
            pts.push(MPoint::new(shape, factors)?);
        }
        for _ in 0..m {
            pts.push(random_mpoint(shape, field, rng));
        }
        let Ok(s) = PointSet::new(shape.clone(), *field, pts) else { continue };
        if s.len() != e + 2 + m {
            continue;
        }
        let (_, got_e) = defect(&s)?;
        if got_e == e && is_nondegenerate(&s)? {
            return Ok(s);
        }
    }
    Err(SegreError::RetriesExhausted(CONSTRUCT_RETRIES))
}

/// Minimal nondegenerate set of the smallest possible cardinality
/// `m + k + e` with defect `e`, where `m = max(n_i)`: k+e+1 points on a
/// random multidegree-(1,...,1) curve of an embedded (P^1)^k, plus m-1
/// general points.
pub fn construct_extremal_n400<R: Rng>(
    shape: &Shape,
    field: &FieldSpec,
    e: usize,
    rng: &mut R,
) -> Result<PointSet> {
    if shape.k() < 2 {
        return Err(SegreError::Precondition("k >= 2 required".into()));
    }
    if e == 0 {
        return Err(SegreError::Precondition("e >= 1 required".into()));
    }
    let k = shape.k();
    let m = shape.max_dim();
    if let Some(p) = field.modulus() {
        if p + 1 < (k + e + 1) as u64 {
            return Err(SegreError::FieldTooSmall {
                needed: next_prime_at_least((k + e) as u64),
                have: p,
            });
        }
    }
    // embed (P^1)^k into Y along the first two coordinates of each factor
    let embed = |q: &MPoint| -> MPoint {
        let factors: Vec<ProjPoint> = q
            .factors()
            .iter()
            .zip(shape.dims())
            .map(|(f, &n)| {
                let mut coords = vec![field.zero(); n + 1];
                coords[0] = f.coords()[0].clone();
                coords[1] = f.coords()[1].clone();
                ProjPoint::new(coords).unwrap()
            })
            .collect();
        MPoint::new(shape, factors).unwrap()
    };
    let cube = Shape::new(vec![1; k])?;
    for _ in 0..CONSTRUCT_RETRIES {
        let maps: Vec<Mobius> = (0..k).map(|_| random_mobius(field, rng)).collect();
        let curve = RncCurve::from_mobius(cube.clone(), *field, &maps)?;
        let params = random_parameters(field, k + e + 1, rng)?;
        let mut pts: Vec<MPoint> = params.iter().map(|t| embed(&curve.point(t))).collect();
        for _ in 0..m - 1 {
            pts.push(random_mpoint(shape, field, rng));
        }
        let Ok(s) = PointSet::new(shape.clone(), *field, pts) else { continue };
        if s.len() != m + k + e {
            continue;
        }
        let (_, got_e) = defect(&s)?;
        if got_e == e && is_minimal(&s).0 && is_nondegenerate(&s)? {
            return Ok(s);
        }
    }
    Err(SegreError::RetriesExhausted(CONSTRUCT_RETRIES))
}

/// The three incidence types of 5-point nondegenerate circuits of P^2 x P^1,
/// named after the curve cut out by the two (1,1)-forms through the circuit.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CircuitKind {
    /// irreducible: the curve is a twisted cubic
    TwistedCubic,
    /// a smooth conic and a line meeting at one node; split 3 + 2 off it
    ConicLine,
    /// a connected chain of three lines; at most 2 points per line
    ThreeLines,
}

impl std::str::FromStr for CircuitKind {
    type Err = SegreError;

    fn from_str(s: &str) -> Result<CircuitKind> {
        match s {
            "twisted_cubic" => Ok(CircuitKind::TwistedCubic),
            "conic_line" => Ok(CircuitKind::ConicLine),
            "three_lines" => Ok(CircuitKind::ThreeLines),
            other => Err(SegreError::Parse(format!("unknown circuit kind '{other}'"))),
        }
    }
}

/// A 5-point nondegenerate circuit of P^2 x P^1 of the requested kind.
pub fn construct_p2p1_circuit<R: Rng>(
    field: &FieldSpec,
    kind: CircuitKind,
    rng: &mut R,
) -> Result<PointSet> {
    if let Some(p) = field.modulus() {
        let needed: u64 = match kind {
            CircuitKind::TwistedCubic => 5,
            // 3 conic points + the node
            CircuitKind::ConicLine | CircuitKind::ThreeLines => 4,
        };
        if p + 1 < needed {
            return Err(SegreError::FieldTooSmall {
                needed: next_prime_at_least(needed - 1),
                have: p,
            });
        }
    }
    let shape = Shape::new(vec![2, 1])?;
    for _ in 0..CONSTRUCT_RETRIES {
        let pts = match kind {
            CircuitKind::TwistedCubic => {
                // 5 points on a random curve of multidegree (2, 1)
                let frames =
                    vec![random_invertible(field, 3, rng), random_invertible(field, 2, rng)];
                let Ok(curve) = RncCurve::new(shape.clone(), *field, frames) else { continue };
                let params = random_parameters(field, 5, rng)?;
                params.iter().map(|t| curve.point(t)).collect::<Vec<_>>()
            }
            CircuitKind::ConicLine => {
                // conic T_1 = {(l(t), t)} with l a parametrized line of P^2;
                // line L_1 = R x {c}; node (l({c}), {c}) with l(c) on R.
                let line_frame = random_invertible(field, 3, rng);
                let l = |t: &ProjPoint| -> ProjPoint {
                    let v = vec![t.coords()[0].clone(), t.coords()[1].clone(), field.zero()];
                    ProjPoint::new(mat_apply(&line_frame, &v)).unwrap()
                };
                let params = random_parameters(field, 4, rng)?;
                let (c, on_conic) = (&params[0], &params[1..]);
                let node1 = l(c);
                // R: line through node1 and a point off l(P^1)
                let dir = loop {
                    let q = random_proj_point(field, 2, rng);
                    let m = Matrix::from_rows(vec![node1.coords().to_vec(), q.coords().to_vec()])
                        .unwrap();
                    if m.rank() == 2 {
                        break q;
                    }
                };
                let mut pts: Vec<MPoint> = on_conic
                    .iter()
                    .map(|t| MPoint::new(&shape, vec![l(t), t.clone()]).unwrap())
                    .collect();
                for _ in 0..2 {
                    // point of R other than the node
                    let a = loop {
                        let lam = random_scalar(field, rng);
                        let coords: Vec<Scalar> = node1
                            .coords()
                            .iter()
                            .zip(dir.coords())
                            .map(|(x, y)| x.add(&lam.mul(y)))
                            .collect();
                        let pt = ProjPoint::new(coords).unwrap();
                        if pt != node1 {
                            break pt;
                        }
                    };
                    pts.push(MPoint::new(&shape, vec![a, c.clone()]).unwrap());
                }
                pts
            }
            CircuitKind::ThreeLines => {
                // chain A x {t1}, {q} x P^1, B x {t2} with q on both A and B
                let params = random_parameters(field, 2, rng)?;
                let (t1, t2) = (&params[0], &params[1]);
                let q = random_proj_point(field, 2, rng);
                let line_through_q = |rng: &mut R| -> (ProjPoint, ProjPoint) {
                    loop {
                        let d = random_proj_point(field, 2, rng);
                        let m =
                            Matrix::from_rows(vec![q.coords().to_vec(), d.coords().to_vec()])
                                .unwrap();
                        if m.rank() == 2 {
                            return (q.clone(), d);
                        }
                    }
                };
                let on_line = |base: &(ProjPoint, ProjPoint), rng: &mut R| -> ProjPoint {
                    loop {
                        let lam = random_scalar(field, rng);
                        let mu = random_scalar(field, rng);
                        let coords: Vec<Scalar> = base
                            .0
                            .coords()
                            .iter()
                            .zip(base.1.coords())
                            .map(|(x, y)| lam.mul(x).add(&mu.mul(y)))
                            .collect();
                        if let Ok(pt) = ProjPoint::new(coords) {
                            if pt != q {
                                return pt;
                            }
                        }
                    }
                };
                let la = line_through_q(rng);
                let lb = line_through_q(rng);
                let mut pts = Vec::with_capacity(5);
                for _ in 0..2 {
                    pts.push(MPoint::new(&shape, vec![on_line(&la, rng), t1.clone()]).unwrap());
                    pts.push(MPoint::new(&shape, vec![on_line(&lb, rng), t2.clone()]).unwrap());
                }
                // one point of {q} x P^1 off both nodes
                let fiber_t = loop {
                    let t = random_proj_point(field, 1, rng);
                    if &t != t1 && &t != t2 {
                        break t;
                    }
                };
                pts.push(MPoint::new(&shape, vec![q.clone(), fiber_t]).unwrap());
                pts
            }
        };
        let Ok(s) = PointSet::new(shape.clone(), *field, pts) else { continue };
        if s.len() == 5 && is_circuit(&s)? && is_nondegenerate(&s)? {
            return Ok(s);
        }
    }
    Err(SegreError::RetriesExhausted(CONSTRUCT_RETRIES))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::segre::{analyze, embed_matrix, span_of};
    use rand::SeedableRng;
    use rand_chacha::ChaCha12Rng;
    use std::collections::HashSet;

    fn gf(p: u64) -> FieldSpec {
        FieldSpec::prime(p).unwrap()
    }

    fn shape(dims: &[usize]) -> Shape {
        Shape::new(dims.to_vec()).unwrap()
    }

    #[test]
    fn diagonal_curve_point() {
        let f = gf(5);
        let c = RncCurve::diagonal(shape(&[1, 1, 1]), f);
        let t = ProjPoint::affine(&f, 2);
        let p = c.point(&t);
        assert!(p.factors().iter().all(|x| x == &t));
    }

    #[test]
    fn standard_veronese_point() {
        let f = gf(5);
        let c = RncCurve::diagonal(shape(&[2]), f);
        let p = c.point(&ProjPoint::affine(&f, 1));
        assert_eq!(p.factor(0), &ProjPoint::from_ints(&f, &[1, 1, 1]).unwrap());
        // generic check of the monomial basis (t^2, tu, u^2)
        let p3 = c.point(&ProjPoint::affine(&f, 3));
        assert_eq!(p3.factor(0), &ProjPoint::from_ints(&f, &[9, 3, 1]).unwrap());
    }

    #[test]
    fn sampled_defect_matches_curve_formula() {
        // 5 points on a random curve have e = max(0, 5 - sum(n_i) - 1), and
        // every sample is minimal.
        let f = gf(7);
        let mut rng = ChaCha12Rng::seed_from_u64(3);
        for dims in [vec![1, 1, 1], vec![2, 1], vec![1, 1]] {
            let sh = shape(&dims);
            let frames: Vec<Matrix> =
                dims.iter().map(|&n| random_invertible(&f, n + 1, &mut rng)).collect();
            let c = RncCurve::new(sh.clone(), f, frames).unwrap();
            let params = random_parameters(&f, 5, &mut rng).unwrap();
            let s = c.sample(&params).unwrap();
            let expected = 5usize.saturating_sub(sh.sum_dims() + 1);
            assert_eq!(defect(&s).unwrap().1, expected, "shape {dims:?}");
            assert!(is_minimal(&s).0);
        }
    }

    #[test]
    fn curve_span_has_dimension_sum_of_degrees() {
        let f = gf(5);
        let mut rng = ChaCha12Rng::seed_from_u64(11);
        let maps: Vec<Mobius> = (0..3).map(|_| random_mobius(&f, &mut rng)).collect();
        let c = RncCurve::from_mobius(shape(&[1, 1, 1]), f, &maps).unwrap();
        let all = c.points().unwrap();
        assert_eq!(all.len(), 6); // p + 1 rational points
        let s = PointSet::new(shape(&[1, 1, 1]), f, all).unwrap();
        assert_eq!(span_of(&s).proj_dim(), 3);
    }

    #[test]
    fn fit_diagonal_identity() {
        let f = gf(7);
        let sh = shape(&[1, 1, 1]);
        let c = RncCurve::diagonal(sh.clone(), f);
        let params: Vec<ProjPoint> = (0..5).map(|t| ProjPoint::affine(&f, t)).collect();
        let s = c.sample(&params).unwrap();
        let fitted = fit_multidegree_one(&s).unwrap().unwrap();
        assert_eq!(fitted, c);
    }

    #[test]
    fn fit_recovers_random_curve() {
        let f = gf(11);
        let sh = shape(&[1, 1, 1, 1]);
        let mut rng = ChaCha12Rng::seed_from_u64(19);
        for _ in 0..50 {
            let maps: Vec<Mobius> = (0..4).map(|_| random_mobius(&f, &mut rng)).collect();
            let c = RncCurve::from_mobius(sh.clone(), f, &maps).unwrap();
            let n = rng.gen_range(3..=6);
            let params = random_parameters(&f, n, &mut rng).unwrap();
            let s = c.sample(&params).unwrap();
            assert_eq!(fit_multidegree_one(&s).unwrap().unwrap(), c);
        }
    }

    /// Projective cross-ratio of 4 points of P^1 via 2x2 determinants.
    fn cross_ratio(q: &[ProjPoint]) -> (Scalar, Scalar) {
        let det = |a: &ProjPoint, b: &ProjPoint| {
            a.coords()[0].mul(&b.coords()[1]).sub(&a.coords()[1].mul(&b.coords()[0]))
        };
        // (q0,q1;q2,q3) as a ratio (num : den)
        (
            det(&q[0], &q[2]).mul(&det(&q[1], &q[3])),
            det(&q[0], &q[3]).mul(&det(&q[1], &q[2])),
        )
    }

    #[test]
    fn fit_rejects_cross_ratio_mismatch() {
        // pi_2 = pi_1 but pi_3 has a different cross-ratio on 4 points; the
        // cross-ratio is invariant under Moebius maps, so no curve can exist.
        let f = gf(7);
        let sh = shape(&[1, 1, 1]);
        let t1: Vec<ProjPoint> = [0, 1, 2, 3].iter().map(|&t| ProjPoint::affine(&f, t)).collect();
        let t3: Vec<ProjPoint> = [0, 1, 2, 4].iter().map(|&t| ProjPoint::affine(&f, t)).collect();
        let (n1, d1) = cross_ratio(&t1);
        let (n3, d3) = cross_ratio(&t3);
        assert_ne!(n1.mul(&d3), n3.mul(&d1), "cross-ratios differ");
        let pts: Vec<MPoint> = (0..4)
            .map(|j| MPoint::new(&sh, vec![t1[j].clone(), t1[j].clone(), t3[j].clone()]).unwrap())
            .collect();
        let s = PointSet::new(sh, f, pts).unwrap();
        assert!(fit_multidegree_one(&s).unwrap().is_none());
    }

    #[test]
    fn fit_precondition_errors() {
        let f = gf(5);
        let sh = shape(&[1, 1]);
        let c = RncCurve::diagonal(sh.clone(), f);
        let two = c.sample(&[ProjPoint::affine(&f, 0), ProjPoint::affine(&f, 1)]).unwrap();
        assert!(matches!(fit_multidegree_one(&two), Err(SegreError::Precondition(_))));
        // non-injective projection to factor 2
        let pts = vec![
            MPoint::new(&sh, vec![ProjPoint::affine(&f, 0), ProjPoint::affine(&f, 0)]).unwrap(),
            MPoint::new(&sh, vec![ProjPoint::affine(&f, 1), ProjPoint::affine(&f, 0)]).unwrap(),
            MPoint::new(&sh, vec![ProjPoint::affine(&f, 2), ProjPoint::affine(&f, 1)]).unwrap(),
        ];
        let s = PointSet::new(sh, f, pts).unwrap();
        assert!(matches!(fit_multidegree_one(&s), Err(SegreError::Precondition(_))));
    }

    #[test]
    fn pgl2_group_orders() {
        assert_eq!(pgl2_elements(&gf(2)).unwrap().len(), 6);
        assert_eq!(pgl2_elements(&gf(3)).unwrap().len(), 24);
        assert_eq!(pgl2_elements(&gf(5)).unwrap().len(), 120);
    }

    fn point_set_key(c: &RncCurve) -> Vec<MPoint> {
        let mut pts = c.points().unwrap();
        pts.sort();
        pts
    }

    #[test]
    fn enumerate_b_1_is_single_line() {
        assert_eq!(enumerate_b_k(&gf(5), 1).unwrap().len(), 1);
    }

    #[test]
    fn enumerate_b_2_over_gf2() {
        let curves = enumerate_b_k(&gf(2), 2).unwrap();
        assert_eq!(curves.len(), 6);
        // dedupe oracle: distinct as point sets
        let keys: HashSet<Vec<MPoint>> = curves.iter().map(point_set_key).collect();
        assert_eq!(keys.len(), 6);
    }

    #[test]
    fn enumerate_b_3_over_gf5() {
        let curves = enumerate_b_k(&gf(5), 3).unwrap();
        assert_eq!(curves.len(), 14400);
        let keys: HashSet<Vec<MPoint>> = curves.iter().map(point_set_key).collect();
        assert_eq!(keys.len(), 14400);
        // injective factor projections and p+1 points on each curve
        for c in curves.iter().step_by(997) {
            let pts = c.points().unwrap();
            assert_eq!(pts.len(), 6);
            for i in 0..3 {
                let proj: HashSet<&ProjPoint> = pts.iter().map(|p| p.factor(i)).collect();
                assert_eq!(proj.len(), 6);
            }
        }
    }

    #[test]
    fn example_n2_shapes() {
        let mut rng = ChaCha12Rng::seed_from_u64(21);
        let s = construct_example_n2(&shape(&[1, 1]), &gf(5), 1, &mut rng).unwrap();
        assert_eq!(s.len(), 4);
        assert_eq!(defect(&s).unwrap().1, 1);
        assert!(is_nondegenerate(&s).unwrap());

        // (2,1), e = 2: m = max(n1 - 1, n2) = 1, so #S = e + 2 + m = 5
        let s = construct_example_n2(&shape(&[2, 1]), &gf(7), 2, &mut rng).unwrap();
        assert_eq!(s.len(), 5);
        assert_eq!(defect(&s).unwrap().1, 2);
        assert!(is_nondegenerate(&s).unwrap());
    }

    #[test]
    fn example_n2_cardinality_formula() {
        let mut rng = ChaCha12Rng::seed_from_u64(22);
        for (dims, e, p) in [(vec![1usize, 1], 1usize, 5u64), (vec![2, 1], 2, 7), (vec![2, 2], 1, 5)] {
            let sh = shape(&dims);
            let m = dims[1..].iter().copied().chain([dims[0] - 1]).max().unwrap();
            let s = construct_example_n2(&sh, &gf(p), e, &mut rng).unwrap();
            assert_eq!(s.len(), e + 2 + m);
            assert_eq!(defect(&s).unwrap().1, e);
            assert!(is_nondegenerate(&s).unwrap());
        }
    }

    #[test]
    fn example_n2_field_too_small() {
        let mut rng = ChaCha12Rng::seed_from_u64(23);
        // e + 2 = 5 > p + 1 = 4
        assert!(matches!(
            construct_example_n2(&shape(&[1, 1]), &gf(3), 3, &mut rng),
            Err(SegreError::FieldTooSmall { .. })
        ));
    }

    #[test]
    fn extremal_n400_shapes() {
        let mut rng = ChaCha12Rng::seed_from_u64(31);
        // (1,1,1), e = 1: m+k+e = 1+3+1 = 5 points on a B_3 curve
        let s = construct_extremal_n400(&shape(&[1, 1, 1]), &gf(5), 1, &mut rng).unwrap();
        assert_eq!(s.len(), 5);
        assert_eq!(defect(&s).unwrap().1, 1);
        assert!(is_minimal(&s).0 && is_nondegenerate(&s).unwrap());
        assert!(fit_multidegree_one(&s).unwrap().is_some());

        // (2,1), e = 1: m+k+e = 2+2+1 = 5
        let s = construct_extremal_n400(&shape(&[2, 1]), &gf(5), 1, &mut rng).unwrap();
        assert_eq!(s.len(), 5);
        assert_eq!(defect(&s).unwrap().1, 1);
        assert!(is_minimal(&s).0 && is_nondegenerate(&s).unwrap());

        // lower bound #S >= k + e + 1 always holds on the output
        for e in 1..=2 {
            let s = construct_extremal_n400(&shape(&[1, 1]), &gf(7), e, &mut rng).unwrap();
            assert!(s.len() >= 2 + e + 1);
            assert_eq!(s.len(), 1 + 2 + e);
        }
    }

    #[test]
    fn p2p1_twisted_cubic() {
        let f = gf(5);
        let mut rng = ChaCha12Rng::seed_from_u64(41);
        let s = construct_p2p1_circuit(&f, CircuitKind::TwistedCubic, &mut rng).unwrap();
        assert!(is_circuit(&s).unwrap() && is_nondegenerate(&s).unwrap());
        // the space of (1,1)-forms through S is 2-dimensional
        assert_eq!(6 - embed_matrix(&s).rank(), 2);
    }

    #[test]
    fn p2p1_conic_line_incidence() {
        let f = gf(5);
        let mut rng = ChaCha12Rng::seed_from_u64(43);
        let s = construct_p2p1_circuit(&f, CircuitKind::ConicLine, &mut rng).unwrap();
        assert!(is_circuit(&s).unwrap() && is_nondegenerate(&s).unwrap());
        // split 3 + 2: exactly 2 points share their P^1 coordinate (the
        // line component sits over one point of P^1) and the other 3 carry
        // pairwise distinct P^1 coordinates (the conic maps isomorphically)
        let mut by_t: std::collections::HashMap<&ProjPoint, usize> = Default::default();
        for p in s.points() {
            *by_t.entry(p.factor(1)).or_default() += 1;
        }
        let mut counts: Vec<usize> = by_t.values().copied().collect();
        counts.sort();
        assert_eq!(counts, vec![1, 1, 1, 2]);
    }

    #[test]
    fn p2p1_three_lines_caps() {
        let f = gf(5);
        let mut rng = ChaCha12Rng::seed_from_u64(47);
        let s = construct_p2p1_circuit(&f, CircuitKind::ThreeLines, &mut rng).unwrap();
        assert!(is_circuit(&s).unwrap() && is_nondegenerate(&s).unwrap());
        // two fibers of pi_2 with 2 points each and a fifth point alone
        let mut by_t: std::collections::HashMap<&ProjPoint, usize> = Default::default();
        for p in s.points() {
            *by_t.entry(p.factor(1)).or_default() += 1;
        }
        let mut counts: Vec<usize> = by_t.values().copied().collect();
        counts.sort();
        assert_eq!(counts, vec![1, 2, 2]);
        // no line of the variety carries 3 points of S (circuit property)
        let rep = analyze(&s).unwrap();
        assert_eq!(rep.defect_e, 1);
        assert!(rep.strongly_essential);
    }

    #[test]
    fn p2p1_field_too_small() {
        let mut rng = ChaCha12Rng::seed_from_u64(53);
        assert!(matches!(
            construct_p2p1_circuit(&gf(3), CircuitKind::TwistedCubic, &mut rng),
            Err(SegreError::FieldTooSmall { .. })
        ));
    }
}
