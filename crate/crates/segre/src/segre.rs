//! The invariant calculus on finite subsets of multiprojective spaces:
//! Segre embedding, defects and their twisted variants, circuits, kernels,
//! minimality, elementary moves, factor projections and X-rank.

use rand::Rng;

use crate::error::{Result, SegreError};
use crate::field::{FieldSpec, Scalar};
use crate::geometry::{all_points, MPoint, Pattern, PointSet, ProjPoint, Shape};
use crate::linalg::{span_intersect, LinearSubspace, Matrix};

fn kron(a: &[Scalar], b: &[Scalar]) -> Vec<Scalar> {
    let mut out = Vec::with_capacity(a.len() * b.len());
    for x in a {
        for y in b {
            out.push(x.mul(y));
        }
    }
    out
}

/// Segre coordinates of a point: the Kronecker product of its factor
/// coordinate vectors, factor 1 most significant. Normalized factors make
/// the result normalized (first nonzero coordinate 1).
pub fn segre_embed(shape: &Shape, p: &MPoint) -> Result<Vec<Scalar>> {
    if p.factors().len() != shape.k()
        || p.factors().iter().zip(shape.dims()).any(|(f, &n)| f.ambient_dim() != n)
    {
        return Err(SegreError::Shape("point does not match shape".into()));
    }
    let mut acc: Vec<Scalar> = p.factor(0).coords().to_vec();
    for f in &p.factors()[1..] {
        acc = kron(&acc, f.coords());
    }
    Ok(acc)
}

/// Row matrix of the embedded points of `s` (in the set's canonical order).
pub fn embed_matrix(s: &PointSet) -> Matrix {
    let n = s.shape().ambient_len();
    let mut m = Matrix::empty(n);
    for p in s.points() {
        m.push_row(segre_embed(s.shape(), p).expect("points match their set's shape"));
    }
    m
}

pub fn span_of(s: &PointSet) -> LinearSubspace {
    LinearSubspace::from_spanning(
        s.shape().ambient_len(),
        embed_matrix(s).rows_iter().map(|r| r.to_vec()).collect(),
    )
    .expect("embedded rows share the ambient width")
}

/// `(span_dim, e)` with `span_dim = rank - 1` and `e = #S - rank`.
pub fn defect(s: &PointSet) -> Result<(isize, usize)> {
    if s.is_empty() {
        return Err(SegreError::Precondition("defect of the empty set".into()));
    }
    let rank = embed_matrix(s).rank();
    Ok((rank as isize - 1, s.len() - rank))
}

pub fn defect_e(s: &PointSet) -> usize {
    defect(s).map(|(_, e)| e).unwrap_or(0)
}

/// Defect of `s` in the twist given by a 0/1 pattern: evaluation rows are
/// Kronecker products over the masked-in factors only.
pub fn defect_pattern(s: &PointSet, pat: &Pattern) -> Result<usize> {
    if pat.mask().len() != s.shape().k() {
        return Err(SegreError::Shape("pattern length mismatch".into()));
    }
    if s.is_empty() {
        return Ok(0);
    }
    let width: usize = s
        .shape()
        .dims()
        .iter()
        .zip(pat.mask())
        .map(|(&n, &on)| if on { n + 1 } else { 1 })
        .product();
    let mut m = Matrix::empty(width);
    for p in s.points() {
        let mut acc = vec![s.field().one()];
        for (f, &on) in p.factors().iter().zip(pat.mask()) {
            if on {
                acc = kron(&acc, f.coords());
            }
        }
        m.push_row(acc);
    }
    Ok(s.len() - m.rank())
}

/// The minimal multiprojective subspace containing a set: per-factor span
/// dimensions, span frames, and the set rewritten in frame coordinates
/// (factors that collapse to a point are dropped from the reduced shape).
#[derive(Debug, Clone)]
pub struct MinimalSubspace {
    pub dims: Vec<usize>,
    pub frames: Vec<Matrix>,
    pub reduced: Option<PointSet>,
}

pub fn minimal_subspace(s: &PointSet) -> Result<MinimalSubspace> {
    if s.is_empty() {
        return Err(SegreError::Precondition("minimal subspace of the empty set".into()));
    }
    let k = s.shape().k();
    let mut dims = Vec::with_capacity(k);
    let mut frames = Vec::with_capacity(k);
    for i in 0..k {
        let rows: Vec<Vec<Scalar>> =
            s.points().iter().map(|p| p.factor(i).coords().to_vec()).collect();
        let frame = Matrix::from_rows(rows)?.row_basis();
        dims.push(frame.nrows() - 1);
        frames.push(frame);
    }
    let kept: Vec<usize> = (0..k).filter(|&i| dims[i] >= 1).collect();
    let reduced = if kept.is_empty() {
        None
    } else {
        let red_shape = Shape::new(kept.iter().map(|&i| dims[i]).collect())?;
        let mut pts = Vec::with_capacity(s.len());
        for p in s.points() {
            let factors: Vec<ProjPoint> = kept
                .iter()
                .map(|&i| {
                    let coords = frames[i]
                        .solve_combination(p.factor(i).coords())
                        .expect("factor point lies in its own span");
                    ProjPoint::new(coords).expect("nonzero combination")
                })
                .collect();
            pts.push(MPoint::new(&red_shape, factors)?);
        }
        Some(PointSet::new(red_shape, *s.field(), pts)?)
    };
    Ok(MinimalSubspace { dims, frames, reduced })
}

pub fn is_nondegenerate(s: &PointSet) -> Result<bool> {
    Ok(minimal_subspace(s)?.dims == s.shape().dims())
}

/// `(overall, per_factor)`: `per_factor[i]` is false iff two points of `s`
/// differ only in factor `i` (so they sit on a line of the Segre variety
/// along that factor). For k = 1 every pair of distinct points violates
/// 1-minimality.
pub fn is_minimal(s: &PointSet) -> (bool, Vec<bool>) {
    let k = s.shape().k();
    let mut per = vec![true; k];
    let pts = s.points();
    for i in 0..k {
        'outer: for a in 0..pts.len() {
            for b in a + 1..pts.len() {
                if pts[a].eta_eq(&pts[b], i) {
                    per[i] = false;
                    break 'outer;
                }
            }
        }
    }
    (per.iter().all(|&b| b), per)
}

/// Circuit test: e(S) = 1 and every point essential. Equivalent to "every
/// proper subset independent": removing a point from a dependent set drops
/// the defect by at most one, so all (#S-1)-subsets are independent iff
/// e = 1 with every point essential, and smaller subsets are then
/// independent a fortiori.
pub fn is_circuit(s: &PointSet) -> Result<bool> {
    if s.len() < 2 {
        return Err(SegreError::Precondition("circuit test needs >= 2 points".into()));
    }
    let (_, e) = defect(s)?;
    if e != 1 {
        return Ok(false);
    }
    for idx in 0..s.len() {
        if defect_e(&s.without_index(idx)) != 0 {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Kernel (essential points) and tail (the rest) of a dependent set.
pub fn essential_partition(s: &PointSet) -> Result<(PointSet, PointSet)> {
    let (_, e) = defect(s)?;
    if e == 0 {
        return Err(SegreError::Precondition("essential partition needs e(S) > 0".into()));
    }
    let flags = essential_flags(s, e);
    let kernel_idx: Vec<usize> = (0..s.len()).filter(|&i| flags[i]).collect();
    let tail_idx: Vec<usize> = (0..s.len()).filter(|&i| !flags[i]).collect();
    let kernel = s.subset(&kernel_idx);
    let tail = s.subset(&tail_idx);
    assert_eq!(defect_e(&kernel), e, "kernel carries the full defect");
    Ok((kernel, tail))
}

fn essential_flags(s: &PointSet, e: usize) -> Vec<bool> {
    (0..s.len()).map(|i| defect_e(&s.without_index(i)) == e - 1).collect()
}

/// Exhaustive check that every subset of size #S - e(S) is independent.
pub fn is_strongly_essential(s: &PointSet) -> Result<bool> {
    let (_, e) = defect(s)?;
    if e == 0 {
        return Err(SegreError::Precondition("strong essentiality needs e(S) > 0".into()));
    }
    let target = s.len() - e;
    let mut ok = true;
    for_each_combination(s.len(), target, &mut |idxs| {
        if ok && defect_e(&s.subset(idxs)) != 0 {
            ok = false;
        }
    });
    Ok(ok)
}

pub(crate) fn for_each_combination(n: usize, k: usize, f: &mut impl FnMut(&[usize])) {
    let mut cur = Vec::with_capacity(k);
    fn rec(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, f: &mut impl FnMut(&[usize])) {
        if cur.len() == k {
            f(cur);
            return;
        }
        let remaining = k - cur.len();
        for i in start..=n.saturating_sub(remaining) {
            cur.push(i);
            rec(i + 1, n, k, cur, f);
            cur.pop();
        }
    }
    rec(0, n, k, &mut cur, f);
}

const INCREASE_RETRIES: u32 = 64;

#[derive(Debug, Clone)]
pub struct ElementaryIncrease {
    pub set: PointSet,
    pub independent: bool,
    pub attempts: u32,
}

/// Replace `o` by two points on a random line through `pi_i(o)` in factor
/// `i` (other coordinates copied from `o`), retrying until the enlarged set
/// is linearly independent or the retry budget runs out.
pub fn elementary_increase<R: Rng>(
    s: &PointSet,
    o: &MPoint,
    i: usize,
    rng: &mut R,
) -> Result<ElementaryIncrease> {
    if defect_e(s) != 0 {
        return Err(SegreError::Precondition("input set must be linearly independent".into()));
    }
    if s.len() > s.shape().segre_dim() {
        return Err(SegreError::Precondition("#S must be <= r".into()));
    }
    if !s.contains(o) {
        return Err(SegreError::Precondition("o must belong to S".into()));
    }
    if i >= s.shape().k() {
        return Err(SegreError::Shape("factor index out of range".into()));
    }
    let field = *s.field();
    let ni = s.shape().dims()[i];
    let oi = o.factor(i).clone();
    let projections: Vec<ProjPoint> = s.points().iter().map(|p| p.factor(i).clone()).collect();
    let mut last: Option<PointSet> = None;
    for attempt in 1..=INCREASE_RETRIES {
        // a random line through pi_i(o)
        let dir = crate::geometry::random_proj_point(&field, ni, rng);
        if dir == oi {
            continue;
        }
        let line_pt = |lam: &Scalar, mu: &Scalar| -> Option<ProjPoint> {
            let coords: Vec<Scalar> = oi
                .coords()
                .iter()
                .zip(dir.coords())
                .map(|(a, b)| lam.mul(a).add(&mu.mul(b)))
                .collect();
            ProjPoint::new(coords).ok()
        };
        let pick = |rng: &mut R| -> Option<ProjPoint> {
            for _ in 0..16 {
                let lam = crate::geometry::random_scalar(&field, rng);
                let mu = crate::geometry::random_scalar(&field, rng);
                if let Some(pt) = line_pt(&lam, &mu) {
                    if !projections.contains(&pt) {
                        return Some(pt);
                    }
                }
            }
            None
        };
        let (Some(oa), Some(ob)) = (pick(rng), pick(rng)) else { continue };
        if oa == ob {
            continue;
        }
        let mut pts: Vec<MPoint> =
            s.points().iter().filter(|p| *p != o).cloned().collect();
        pts.push(o.with_factor(i, oa));
        pts.push(o.with_factor(i, ob));
        let Ok(candidate) = PointSet::new(s.shape().clone(), field, pts) else { continue };
        if defect_e(&candidate) == 0 {
            debug_assert!(span_contains_all(&candidate, s));
            return Ok(ElementaryIncrease { set: candidate, independent: true, attempts: attempt });
        }
        last = Some(candidate);
    }
    match last {
        Some(set) => Ok(ElementaryIncrease { set, independent: false, attempts: INCREASE_RETRIES }),
        None => match field {
            FieldSpec::Prime(p) => Err(SegreError::FieldTooSmall {
                needed: crate::field::next_prime_at_least(p + 1),
                have: p,
            }),
            FieldSpec::Rational => Err(SegreError::RetriesExhausted(INCREASE_RETRIES)),
        },
    }
}

fn span_contains_all(big: &PointSet, small: &PointSet) -> bool {
    let span = span_of(big);
    small.points().iter().all(|p| span.contains(&segre_embed(small.shape(), p).unwrap()))
}

/// Inverse move: given `q` in the span of `S` and a non-minimal pair `a, b`
/// aligned along factor `i`, find one point `o` on the factor-i line through
/// them with `q` in the span of `(S \ {a,b}) + {o}`.
pub fn elementary_decrease(
    s: &PointSet,
    q: &[Scalar],
    a: &MPoint,
    b: &MPoint,
    i: usize,
) -> Result<PointSet> {
    if a == b || !s.contains(a) || !s.contains(b) {
        return Err(SegreError::Precondition("a, b must be distinct points of S".into()));
    }
    if !a.eta_eq(b, i) {
        return Err(SegreError::Precondition("a, b must agree outside factor i".into()));
    }
    let rest_pts: Vec<MPoint> =
        s.points().iter().filter(|p| *p != a && *p != b).cloned().collect();
    let rest = PointSet::new(s.shape().clone(), *s.field(), rest_pts)?;
    let mut m = embed_matrix(&rest);
    m.push_row(segre_embed(s.shape(), a)?);
    m.push_row(segre_embed(s.shape(), b)?);
    let Some(coeffs) = m.solve_combination(q) else {
        return Err(SegreError::Precondition("q is outside the span of S".into()));
    };
    let alpha = &coeffs[coeffs.len() - 2];
    let beta = &coeffs[coeffs.len() - 1];
    if alpha.is_zero() && beta.is_zero() {
        return Ok(rest);
    }
    // o has factor-i coordinates alpha*pi_i(a) + beta*pi_i(b); the Segre
    // embedding is linear along one factor, so nu(o) ~ alpha nu(a) + beta nu(b).
    let coords: Vec<Scalar> = a
        .factor(i)
        .coords()
        .iter()
        .zip(b.factor(i).coords())
        .map(|(x, y)| alpha.mul(x).add(&beta.mul(y)))
        .collect();
    let o = a.with_factor(i, ProjPoint::new(coords)?);
    let mut pts = rest.points().to_vec();
    if !pts.contains(&o) {
        pts.push(o);
    }
    PointSet::new(s.shape().clone(), *s.field(), pts)
}

#[derive(Debug, Clone)]
pub struct Projection {
    pub set: PointSet,
    pub injective: bool,
}

/// Linear projection of factor `i` away from a center `V` (a subspace of the
/// coordinate space of that factor with projective dimension <= n_i - 2).
pub fn linear_project(s: &PointSet, i: usize, v: &LinearSubspace) -> Result<Projection> {
    let ni = s.shape().dims()[i];
    if v.ambient() != ni + 1 {
        return Err(SegreError::Shape("center lives in the wrong factor space".into()));
    }
    if v.rank() == 0 || v.proj_dim() > ni as isize - 2 {
        return Err(SegreError::Precondition(
            "center must have 0 <= dim V <= n_i - 2".into(),
        ));
    }
    // Quotient map: rows of the kernel of the center's basis matrix.
    let quot = v.basis().kernel_basis();
    let mut new_dims = s.shape().dims().to_vec();
    new_dims[i] = quot.nrows() - 1;
    let new_shape = Shape::new(new_dims)?;
    let mut images = Vec::with_capacity(s.len());
    for p in s.points() {
        let x = p.factor(i).coords();
        let img: Vec<Scalar> = quot
            .rows_iter()
            .map(|row| {
                row.iter().zip(x).fold(s.field().zero(), |acc, (a, b)| acc.add(&a.mul(b)))
            })
            .collect();
        let pt = ProjPoint::new(img).map_err(|_| {
            SegreError::CenterHit(format!("projection of a point of S lies in the center (factor {i})"))
        })?;
        let mut factors = p.factors().to_vec();
        factors[i] = pt;
        images.push(MPoint::new(&new_shape, factors)?);
    }
    let n_in = images.len();
    let mut dedup = images.clone();
    dedup.sort();
    dedup.dedup();
    let injective = dedup.len() == n_in;
    let set = PointSet::new(new_shape, *s.field(), dedup)?;
    Ok(Projection { set, injective })
}

#[derive(Debug, Clone)]
pub struct RankWitness {
    pub target: Vec<Scalar>,
    /// `None` means "unknown, greater than the cap".
    pub rank: Option<usize>,
    pub witnesses: Vec<PointSet>,
}

/// X-rank by exhaustive search over subsets of X(F_p) of size 1..=cap,
/// returning all minimal witnesses.
pub fn x_rank(q: &[Scalar], shape: &Shape, field: &FieldSpec, cap: usize) -> Result<RankWitness> {
    if !field.is_prime_field() {
        return Err(SegreError::UnsupportedField);
    }
    if q.iter().all(|c| c.is_zero()) {
        return Err(SegreError::Precondition("q must be nonzero".into()));
    }
    if q.len() != shape.ambient_len() {
        return Err(SegreError::Shape("q has the wrong length".into()));
    }
    let pts = all_points(shape, field)?;
    let rows: Vec<Vec<Scalar>> =
        pts.iter().map(|p| segre_embed(shape, p).unwrap()).collect();
    for size in 1..=cap {
        let mut witnesses = Vec::new();
        for_each_combination(pts.len(), size, &mut |idxs| {
            let m = Matrix::from_rows(idxs.iter().map(|&i| rows[i].clone()).collect()).unwrap();
            if m.solve_combination(q).is_some() {
                let subset: Vec<MPoint> = idxs.iter().map(|&i| pts[i].clone()).collect();
                witnesses.push(PointSet::new(shape.clone(), *field, subset).unwrap());
            }
        });
        if !witnesses.is_empty() {
            return Ok(RankWitness { target: q.to_vec(), rank: Some(size), witnesses });
        }
    }
    Ok(RankWitness { target: q.to_vec(), rank: None, witnesses: Vec::new() })
}

/// The single point of `<nu(A)> /\ <nu(S \ A)>` for a circuit `S` and a
/// nonempty proper subset `A` (given by indices into `s.points()`).
pub fn circuit_partition_point(s: &PointSet, a_idxs: &[usize]) -> Result<Vec<Scalar>> {
    if a_idxs.is_empty() || a_idxs.len() >= s.len() {
        return Err(SegreError::Precondition("A must be a nonempty proper subset".into()));
    }
    let b_idxs: Vec<usize> = (0..s.len()).filter(|i| !a_idxs.contains(i)).collect();
    let a = s.subset(a_idxs);
    let b = s.subset(&b_idxs);
    let inter = span_intersect(&span_of(&a), &span_of(&b))?;
    if inter.proj_dim() != 0 {
        return Err(SegreError::Degenerate(format!(
            "span intersection has projective dimension {}, expected 0 (is S a circuit?)",
            inter.proj_dim()
        )));
    }
    Ok(inter.basis().row(0).to_vec())
}

/// True iff `q` lies in the span of `nu(A)` but in no proper subset's span.
pub fn irredundantly_spans(q: &[Scalar], a: &PointSet) -> bool {
    if a.is_empty() {
        return false;
    }
    if embed_matrix(a).solve_combination(q).is_none() {
        return false;
    }
    (0..a.len()).all(|i| {
        let sub = a.without_index(i);
        sub.is_empty() || embed_matrix(&sub).solve_combination(q).is_none()
    })
}

#[derive(Debug, Clone)]
pub struct LemmaReport {
    pub preconditions_ok: bool,
    pub violations: Vec<String>,
    pub hypothesis_holds: bool,
    pub conclusion_holds: bool,
}

/// Checker for the residual-divisor uniqueness lemma with D the pullback of
/// a hyperplane H in factor i: if the eps-hat_i defect of (A u B) \ D
/// vanishes, the points of A and B off D must coincide.
pub fn check_lemma_ee0(
    q: &[Scalar],
    a: &PointSet,
    b: &PointSet,
    i: usize,
    h: &LinearSubspace,
) -> LemmaReport {
    let mut violations = Vec::new();
    let k = a.shape().k();
    if k < 2 {
        violations.push("eps-hat twist needs k >= 2".into());
    }
    if a.shape() != b.shape() || a.field() != b.field() {
        violations.push("A and B must share shape and field".into());
    }
    if a == b {
        violations.push("A and B must differ".into());
    }
    if i >= k || h.ambient() != a.shape().dims().get(i).map(|n| n + 1).unwrap_or(0) {
        violations.push("H must be a hyperplane in factor i".into());
    } else if h.proj_dim() != a.shape().dims()[i] as isize - 1 {
        violations.push("H must be a hyperplane in factor i".into());
    }
    if !irredundantly_spans(q, a) {
        violations.push("A does not irredundantly span q".into());
    }
    if !irredundantly_spans(q, b) {
        violations.push("B does not irredundantly span q".into());
    }
    if !violations.is_empty() {
        return LemmaReport {
            preconditions_ok: false,
            violations,
            hypothesis_holds: false,
            conclusion_holds: false,
        };
    }
    let off_divisor = |s: &PointSet| -> Vec<MPoint> {
        s.points().iter().filter(|p| !h.contains(p.factor(i).coords())).cloned().collect()
    };
    let union = a.union(b).expect("same shape and field");
    let residual_pts = off_divisor(&union);
    let hypothesis_holds = if residual_pts.is_empty() {
        true
    } else {
        let residual =
            PointSet::new(a.shape().clone(), *a.field(), residual_pts).expect("distinct points");
        defect_pattern(&residual, &Pattern::eps_hat(k, i)).expect("valid pattern") == 0
    };
    let conclusion_holds = off_divisor(a) == off_divisor(b);
    LemmaReport { preconditions_ok: true, violations, hypothesis_holds, conclusion_holds }
}

/// The full invariant report for one point set.
#[derive(Debug, Clone)]
pub struct DefectReport {
    pub span_dim: isize,
    pub defect_e: usize,
    pub kernel: Vec<MPoint>,
    pub tail: Vec<MPoint>,
    pub essential_flags: Vec<bool>,
    pub minimal: bool,
    pub i_minimal: Vec<bool>,
    pub minimal_subspace_dims: Vec<usize>,
    pub nondegenerate: bool,
    pub circuit: bool,
    pub strongly_essential: bool,
}

pub fn analyze(s: &PointSet) -> Result<DefectReport> {
    let (span_dim, e) = defect(s)?;
    let (minimal, i_minimal) = is_minimal(s);
    let sub = minimal_subspace(s)?;
    let nondegenerate = sub.dims == s.shape().dims();
    let circuit = if s.len() >= 2 { is_circuit(s)? } else { false };
    let (kernel, tail, essential_flags, strongly_essential) = if e > 0 {
        let flags = essential_flags(s, e);
        let (kernel, tail) = essential_partition(s)?;
        let se = is_strongly_essential(s)?;
        (kernel.points().to_vec(), tail.points().to_vec(), flags, se)
    } else {
        (Vec::new(), s.points().to_vec(), vec![false; s.len()], false)
    };
    let report = DefectReport {
        span_dim,
        defect_e: e,
        kernel,
        tail,
        essential_flags,
        minimal,
        i_minimal,
        minimal_subspace_dims: sub.dims,
        nondegenerate,
        circuit,
        strongly_essential,
    };
    debug_assert_eq!(report.span_dim, s.len() as isize - 1 - report.defect_e as isize);
    Ok(report)
}
