//! Multiprojective geometry types: shapes, projective points, points of a
//! product of projective spaces, and finite point sets.

use crate::error::{Result, SegreError};
use crate::field::{FieldSpec, Scalar};

/// The shape (n_1, ..., n_k) of a multiprojective space P^{n_1} x ... x P^{n_k}.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Shape {
    dims: Vec<usize>,
}

impl Shape {
    pub fn new(dims: Vec<usize>) -> Result<Shape> {
        if dims.is_empty() {
            return Err(SegreError::Shape("shape needs at least one factor".into()));
        }
        if dims.iter().any(|&n| n == 0) {
            return Err(SegreError::Shape("factor dimensions must be >= 1".into()));
        }
        Ok(Shape { dims })
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn k(&self) -> usize {
        self.dims.len()
    }

    /// Length of the Segre coordinate vector: prod (n_i + 1).
    pub fn ambient_len(&self) -> usize {
        self.dims.iter().map(|n| n + 1).product()
    }

    /// Projective dimension of the Segre ambient space.
    pub fn segre_dim(&self) -> usize {
        self.ambient_len() - 1
    }

    pub fn max_dim(&self) -> usize {
        *self.dims.iter().max().unwrap()
    }

    pub fn sum_dims(&self) -> usize {
        self.dims.iter().sum()
    }

    pub fn is_all_ones(&self) -> bool {
        self.dims.iter().all(|&n| n == 1)
    }

    /// Number of F_p points of the full multiprojective space.
    pub fn point_count(&self, p: u64) -> u128 {
        self.dims
            .iter()
            .map(|&n| {
                let mut c: u128 = 0;
                let mut pw: u128 = 1;
                for _ in 0..=n {
                    c += pw;
                    pw *= p as u128;
                }
                c
            })
            .product()
    }
}

impl std::fmt::Display for Shape {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let parts: Vec<String> = self.dims.iter().map(|n| n.to_string()).collect();
        write!(f, "({})", parts.join(","))
    }
}

/// A point of P^n: nonzero coordinates, normalized so the first nonzero
/// coordinate is 1.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ProjPoint {
    coords: Vec<Scalar>,
}

impl ProjPoint {
    pub fn new(coords: Vec<Scalar>) -> Result<ProjPoint> {
        if coords.is_empty() {
            return Err(SegreError::Shape("projective point needs >= 1 coordinate".into()));
        }
        let Some(lead) = coords.iter().find(|c| !c.is_zero()) else {
            return Err(SegreError::Degenerate("zero vector is not a projective point".into()));
        };
        let inv = lead.inv().unwrap();
        Ok(ProjPoint { coords: coords.iter().map(|c| c.mul(&inv)).collect() })
    }

    pub fn from_ints(field: &FieldSpec, coords: &[i64]) -> Result<ProjPoint> {
        ProjPoint::new(coords.iter().map(|&c| field.from_int(c)).collect())
    }

    /// The affine point (t : 1) of P^1.
    pub fn affine(field: &FieldSpec, t: i64) -> ProjPoint {
        ProjPoint::from_ints(field, &[t, 1]).unwrap()
    }

    /// The point at infinity (1 : 0) of P^1.
    pub fn infinity(field: &FieldSpec) -> ProjPoint {
        ProjPoint::from_ints(field, &[1, 0]).unwrap()
    }

    pub fn coords(&self) -> &[Scalar] {
        &self.coords
    }

    pub fn ambient_dim(&self) -> usize {
        self.coords.len() - 1
    }

    pub fn field(&self) -> FieldSpec {
        self.coords[0].field()
    }
}

/// A point of a multiprojective space: one normalized factor per P^{n_i}.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct MPoint {
    factors: Vec<ProjPoint>,
}

impl MPoint {
    pub fn new(shape: &Shape, factors: Vec<ProjPoint>) -> Result<MPoint> {
        if factors.len() != shape.k() {
            return Err(SegreError::Shape("wrong number of factors".into()));
        }
        for (f, &n) in factors.iter().zip(shape.dims()) {
            if f.ambient_dim() != n {
                return Err(SegreError::Shape(format!(
                    "factor has ambient dim {}, shape wants {}",
                    f.ambient_dim(),
                    n
                )));
            }
        }
        Ok(MPoint { factors })
    }

    pub fn factors(&self) -> &[ProjPoint] {
        &self.factors
    }

    pub fn factor(&self, i: usize) -> &ProjPoint {
        &self.factors[i]
    }

    /// Equality after forgetting factor `i` (the eta_i projection).
    pub fn eta_eq(&self, other: &MPoint, i: usize) -> bool {
        self.factors
            .iter()
            .zip(&other.factors)
            .enumerate()
            .all(|(j, (a, b))| j == i || a == b)
    }

    pub fn with_factor(&self, i: usize, f: ProjPoint) -> MPoint {
        let mut factors = self.factors.clone();
        factors[i] = f;
        MPoint { factors }
    }
}

/// A finite set of distinct points of one multiprojective space over one
/// field, kept in canonical sorted order.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct PointSet {
    shape: Shape,
    field: FieldSpec,
    points: Vec<MPoint>,
}

impl PointSet {
    pub fn new(shape: Shape, field: FieldSpec, mut points: Vec<MPoint>) -> Result<PointSet> {
        for p in &points {
            if p.factors().len() != shape.k() {
                return Err(SegreError::Shape("point does not match shape".into()));
            }
            for (f, &n) in p.factors().iter().zip(shape.dims()) {
                if f.ambient_dim() != n {
                    return Err(SegreError::Shape("point factor dimension mismatch".into()));
                }
                if f.field() != field {
                    return Err(SegreError::Shape("point field mismatch".into()));
                }
            }
        }
        points.sort();
        if points.windows(2).any(|w| w[0] == w[1]) {
            return Err(SegreError::DuplicatePoint);
        }
        Ok(PointSet { shape, field, points })
    }

    pub fn shape(&self) -> &Shape {
        &self.shape
    }

    pub fn field(&self) -> &FieldSpec {
        &self.field
    }

    pub fn points(&self) -> &[MPoint] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn contains(&self, p: &MPoint) -> bool {
        self.points.binary_search(p).is_ok()
    }

    /// The set with one point removed (by index).
    pub fn without_index(&self, idx: usize) -> PointSet {
        let mut points = self.points.clone();
        points.remove(idx);
        PointSet { shape: self.shape.clone(), field: self.field, points }
    }

    /// Subset by sorted index list.
    pub fn subset(&self, idxs: &[usize]) -> PointSet {
        PointSet {
            shape: self.shape.clone(),
            field: self.field,
            points: idxs.iter().map(|&i| self.points[i].clone()).collect(),
        }
    }

    pub fn union(&self, other: &PointSet) -> Result<PointSet> {
        let mut points = self.points.clone();
        points.extend(other.points.iter().cloned());
        points.sort();
        points.dedup();
        Ok(PointSet { shape: self.shape.clone(), field: self.field, points })
    }
}

/// A 0/1 multidegree pattern over the factors; carries the twists used by
/// the residual arguments (single 1 = eps_i, single 0 = eps-hat_i).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Pattern {
    mask: Vec<bool>,
}

impl Pattern {
    pub fn new(mask: Vec<bool>) -> Result<Pattern> {
        if mask.iter().all(|&b| !b) {
            return Err(SegreError::Precondition("pattern must not be all-zero".into()));
        }
        Ok(Pattern { mask })
    }

    pub fn eps(k: usize, i: usize) -> Pattern {
        let mut mask = vec![false; k];
        mask[i] = true;
        Pattern { mask }
    }

    pub fn eps_hat(k: usize, i: usize) -> Pattern {
        assert!(k >= 2, "eps-hat needs k >= 2");
        let mut mask = vec![true; k];
        mask[i] = false;
        Pattern { mask }
    }

    pub fn all_ones(k: usize) -> Pattern {
        Pattern { mask: vec![true; k] }
    }

    pub fn mask(&self) -> &[bool] {
        &self.mask
    }
}

/// Uniform random scalar over GF(p); small random fraction over Q.
pub fn random_scalar<R: rand::Rng>(field: &FieldSpec, rng: &mut R) -> Scalar {
    match field {
        FieldSpec::Prime(p) => field.from_int(rng.gen_range(0..*p) as i64),
        FieldSpec::Rational => {
            Scalar::from_rational(rng.gen_range(-9..=9), rng.gen_range(1..=9))
        }
    }
}

pub fn random_proj_point<R: rand::Rng>(field: &FieldSpec, n: usize, rng: &mut R) -> ProjPoint {
    loop {
        let coords: Vec<Scalar> = (0..=n).map(|_| random_scalar(field, rng)).collect();
        if let Ok(p) = ProjPoint::new(coords) {
            return p;
        }
    }
}

pub fn random_mpoint<R: rand::Rng>(shape: &Shape, field: &FieldSpec, rng: &mut R) -> MPoint {
    let factors = shape.dims().iter().map(|&n| random_proj_point(field, n, rng)).collect();
    MPoint::new(shape, factors).unwrap()
}

/// Random set of exactly `n` distinct points.
pub fn random_point_set<R: rand::Rng>(
    shape: &Shape,
    field: &FieldSpec,
    n: usize,
    rng: &mut R,
) -> PointSet {
    let mut points: Vec<MPoint> = Vec::new();
    while points.len() < n {
        let p = random_mpoint(shape, field, rng);
        if !points.contains(&p) {
            points.push(p);
        }
    }
    PointSet::new(shape.clone(), *field, points).unwrap()
}

/// All points of P^n(F_p) in canonical (lexicographic, normalized) order.
pub fn proj_space_points(field: &FieldSpec, n: usize) -> Result<Vec<ProjPoint>> {
    let Some(p) = field.modulus() else {
        return Err(SegreError::UnsupportedField);
    };
    let mut out = Vec::new();
    // Leading coordinate 1 at position j, zeros before, free after.
    for j in 0..=n {
        let free = n - j;
        let count = (p as u128).pow(free as u32);
        for mut idx in 0..count {
            let mut coords = vec![field.zero(); n + 1];
            coords[j] = field.one();
            for slot in (j + 1..=n).rev() {
                coords[slot] = field.from_int((idx % p as u128) as i64);
                idx /= p as u128;
            }
            out.push(ProjPoint::new(coords).unwrap());
        }
    }
    out.sort();
    Ok(out)
}

/// All points of the multiprojective space over F_p, canonically sorted.
pub fn all_points(shape: &Shape, field: &FieldSpec) -> Result<Vec<MPoint>> {
    let factor_points: Vec<Vec<ProjPoint>> = shape
        .dims()
        .iter()
        .map(|&n| proj_space_points(field, n))
        .collect::<Result<_>>()?;
    let mut out: Vec<MPoint> = vec![];
    let mut idx = vec![0usize; shape.k()];
    loop {
        let factors: Vec<ProjPoint> =
            idx.iter().enumerate().map(|(i, &j)| factor_points[i][j].clone()).collect();
        out.push(MPoint { factors });
        // odometer
        let mut carry = shape.k();
        while carry > 0 {
            idx[carry - 1] += 1;
            if idx[carry - 1] < factor_points[carry - 1].len() {
                break;
            }
            idx[carry - 1] = 0;
            carry -= 1;
        }
        if carry == 0 {
            break;
        }
    }
    out.sort();
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn normalization_is_idempotent() {
        let f = FieldSpec::prime(7).unwrap();
        let p = ProjPoint::from_ints(&f, &[0, 3, 5]).unwrap();
        let q = ProjPoint::new(p.coords().to_vec()).unwrap();
        assert_eq!(p, q);
        assert!(p.coords()[1].is_one());
    }

    #[test]
    fn zero_point_rejected() {
        let f = FieldSpec::prime(5).unwrap();
        assert!(ProjPoint::from_ints(&f, &[0, 0]).is_err());
    }

    #[test]
    fn duplicate_points_rejected() {
        let f = FieldSpec::prime(5).unwrap();
        let shape = Shape::new(vec![1]).unwrap();
        let a = MPoint::new(&shape, vec![ProjPoint::affine(&f, 2)]).unwrap();
        let b = MPoint::new(&shape, vec![ProjPoint::from_ints(&f, &[4, 2]).unwrap()]).unwrap();
        // (4:2) = (2:1) after normalization
        assert!(matches!(
            PointSet::new(shape, f, vec![a, b]),
            Err(SegreError::DuplicatePoint)
        ));
    }

    #[test]
    fn proj_space_counts() {
        let f = FieldSpec::prime(3).unwrap();
        assert_eq!(proj_space_points(&f, 1).unwrap().len(), 4);
        assert_eq!(proj_space_points(&f, 2).unwrap().len(), 13);
        let f5 = FieldSpec::prime(5).unwrap();
        assert_eq!(proj_space_points(&f5, 3).unwrap().len(), 156);
    }

    #[test]
    fn all_points_count_matches_formula() {
        let f = FieldSpec::prime(2).unwrap();
        let shape = Shape::new(vec![2, 1]).unwrap();
        let pts = all_points(&shape, &f).unwrap();
        assert_eq!(pts.len() as u128, shape.point_count(2));
        assert_eq!(pts.len(), 21);
        // all distinct
        let mut sorted = pts.clone();
        sorted.dedup();
        assert_eq!(sorted.len(), pts.len());
    }
}
