//! Release acceptance suite: one test per criterion, each printing a single
//! PASS/FAIL line. Heavy enumeration results are shared between criteria
//! through a `OnceLock` so the work runs once.

use std::collections::HashSet;
use std::sync::OnceLock;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;

use segre::classifier::{
    default_e2_shapes, default_e301_shapes, thm_e3_exclusion_shapes, verify_bounds,
    verify_prop_e2, verify_prop_e301, verify_thm_e3, BoundsCheck, VerificationReport,
    DEFAULT_BUDGET,
};
use segre::geometry::{random_point_set, random_proj_point};
use segre::{
    analyze, check_lemma_ee0, circuit_partition_point, defect, embed_matrix, enumerate_b_k,
    fit_multidegree_one, is_circuit, is_strongly_essential, FieldSpec, LinearSubspace, MPoint, Matrix, Mobius, PointSet,
    ProjPoint, RncCurve, Scalar, Shape,
};

fn report(criterion: usize, name: &str, ok: bool) {
    println!("acceptance criterion {criterion} ({name}): {}", if ok { "PASS" } else { "FAIL" });
    assert!(ok, "acceptance criterion {criterion} ({name}) failed");
}

fn shape(dims: &[usize]) -> Shape {
    Shape::new(dims.to_vec()).unwrap()
}

// ---------------------------------------------------------------- criterion 1

#[test]
fn criterion_1_four_point_circuits() {
    let rep = verify_prop_e2(&[2, 3], &default_e2_shapes(), DEFAULT_BUDGET).unwrap();
    let positive = [shape(&[2]), shape(&[1, 1])];
    let counts_ok = rep.counts.iter().all(|c| (c.count > 0) == positive.contains(&c.shape));
    report(1, "four-point nondegenerate circuits", rep.success() && counts_ok);
}

// ----------------------------------------------------------- criteria 2 and 3

fn e3_report() -> &'static VerificationReport {
    static REPORT: OnceLock<VerificationReport> = OnceLock::new();
    REPORT.get_or_init(|| verify_thm_e3(&[2, 3], 5, DEFAULT_BUDGET).unwrap())
}

#[test]
fn criterion_2_five_circuit_exclusion() {
    let rep = e3_report();
    let excluded = thm_e3_exclusion_shapes();
    let mut seen = 0;
    let zeros = rep
        .counts
        .iter()
        .filter(|c| excluded.contains(&c.shape))
        .inspect(|_| seen += 1)
        .all(|c| c.count == 0);
    // four shapes over GF(2) and GF(3) each
    report(2, "five-circuit exclusion shapes", zeros && seen == 8 && rep.reduction_used);
}

#[test]
fn criterion_3_five_circuits_on_curves() {
    let rep = e3_report();
    let f5 = FieldSpec::prime(5).unwrap();
    // independent dedupe of the curve family: |B_3(F_5)| = (5^3 - 5)^2
    let curves = enumerate_b_k(&f5, 3).unwrap();
    let distinct: HashSet<&RncCurve> = curves.iter().collect();
    let curve_count_ok = curves.len() == 14400 && distinct.len() == 14400;
    let total_ok = rep
        .counts
        .iter()
        .any(|c| c.shape == shape(&[1, 1, 1]) && c.field == f5 && c.count == 86_400);
    report(3, "five-circuits on (1,1,1)-curves", rep.success() && curve_count_ok && total_ok);
}

// ---------------------------------------------------------------- criterion 4

#[test]
fn criterion_4_defect_ge_2_cases() {
    let rep = verify_prop_e301(5, &default_e301_shapes(), DEFAULT_BUDGET).unwrap();
    report(4, "five-point sets with defect >= 2", rep.success());
}

// ---------------------------------------------------------------- criterion 5

#[test]
fn criterion_5_cardinality_bounds() {
    let n3 = verify_bounds(
        BoundsCheck::N3,
        2,
        &[shape(&[2, 1]), shape(&[3, 1]), shape(&[2, 2])],
        6,
        DEFAULT_BUDGET,
    )
    .unwrap();
    let n4a = verify_bounds(
        BoundsCheck::N4a,
        3,
        &[shape(&[1, 1]), shape(&[1, 1, 1])],
        6,
        DEFAULT_BUDGET,
    )
    .unwrap();
    let n400 = verify_bounds(
        BoundsCheck::N400,
        5,
        &[shape(&[2, 1]), shape(&[1, 1, 1])],
        6,
        DEFAULT_BUDGET,
    )
    .unwrap();
    report(
        5,
        "cardinality bounds",
        n3.success() && n4a.success() && n400.success(),
    );
}

// ---------------------------------------------------------------- criterion 6
//
// Eight randomized property suites, each run with >= 1000 seeded cases over
// GF(5) and another >= 1000 over the rationals.

const CASES: usize = 1000;

fn cases() -> usize {
    std::env::var("ACCEPTANCE_CASES").ok().and_then(|v| v.parse().ok()).unwrap_or(CASES)
}

fn fields() -> [FieldSpec; 2] {
    [FieldSpec::prime(5).unwrap(), FieldSpec::rational()]
}

fn mixed_shapes() -> Vec<Shape> {
    vec![shape(&[2]), shape(&[3]), shape(&[1, 1]), shape(&[2, 1]), shape(&[1, 1, 1])]
}

/// Replace every coordinate vector by its canonical small-integer
/// representative (projectively the same point). Over the rationals this
/// keeps the exact arithmetic in the suites fast.
fn tidy(s: &PointSet) -> PointSet {
    if s.field().is_prime_field() {
        return s.clone();
    }
    let pts: Vec<MPoint> = s
        .points()
        .iter()
        .map(|p| {
            let factors: Vec<ProjPoint> = p
                .factors()
                .iter()
                .map(|f| {
                    let ints = segre::io::scalars_to_ints(f.coords()).unwrap();
                    ProjPoint::from_ints(s.field(), &ints).unwrap()
                })
                .collect();
            MPoint::new(s.shape(), factors).unwrap()
        })
        .collect();
    PointSet::new(s.shape().clone(), *s.field(), pts).unwrap()
}

fn random_tidy_set<R: Rng>(sh: &Shape, field: &FieldSpec, n: usize, rng: &mut R) -> PointSet {
    tidy(&random_point_set(sh, field, n, rng))
}

/// Shapes whose ambient space is small enough that <= 7 points can be
/// forced dependent (for the brute-force suites capped at #S = 7).
fn small_shapes() -> Vec<Shape> {
    vec![shape(&[2]), shape(&[3]), shape(&[1, 1]), shape(&[2, 1])]
}

/// Random set that is guaranteed dependent: more points than the ambient
/// space holds in general position. Requires ambient_len <= 6.
fn random_dependent_set<R: Rng>(sh: &Shape, field: &FieldSpec, rng: &mut R) -> PointSet {
    let ambient = sh.ambient_len();
    assert!(ambient <= 6, "cannot force dependence with at most 7 points");
    let extra = rng.gen_range(1..=2);
    let n = (ambient + extra).min(7);
    loop {
        let s = random_tidy_set(sh, field, n, rng);
        if defect(&s).unwrap().1 > 0 {
            return s;
        }
    }
}

fn apply_matrix(m: &Matrix, v: &[Scalar]) -> Vec<Scalar> {
    m.rows_iter()
        .map(|row| {
            row.iter()
                .zip(v)
                .fold(None::<Scalar>, |acc, (a, b)| {
                    let t = a.mul(b);
                    Some(match acc {
                        Some(s) => s.add(&t),
                        None => t,
                    })
                })
                .unwrap()
        })
        .collect()
}

fn random_invertible<R: Rng>(field: &FieldSpec, n: usize, rng: &mut R) -> Matrix {
    loop {
        let rows: Vec<Vec<Scalar>> =
            (0..n).map(|_| random_proj_point(field, n - 1, rng).coords().to_vec()).collect();
        let m = Matrix::from_rows(rows).unwrap();
        if m.rank() == n {
            return m;
        }
    }
}

#[test]
fn criterion_6a_span_dim_identity() {
    let shapes = mixed_shapes();
    for (fi, field) in fields().iter().enumerate() {
        let mut rng = ChaCha12Rng::seed_from_u64(600 + fi as u64);
        for _ in 0..cases() {
            let sh = shapes.choose(&mut rng).unwrap();
            let n = rng.gen_range(2..=7);
            let s = random_tidy_set(sh, field, n, &mut rng);
            let (span_dim, e) = defect(&s).unwrap();
            let m = embed_matrix(&s);
            let r = m.rank();
            assert_eq!(span_dim, r as isize - 1);
            assert_eq!(e, s.len() - r);
            // rank-nullity on the same matrix
            assert_eq!(r + m.kernel_basis().nrows(), m.ncols());
            // rank is invariant under row shuffling and rescaling
            let mut rows: Vec<Vec<Scalar>> = m.rows_iter().map(|r| r.to_vec()).collect();
            rows.shuffle(&mut rng);
            for row in rows.iter_mut() {
                let c = loop {
                    let c = segre::geometry::random_scalar(field, &mut rng);
                    if !c.is_zero() {
                        break c;
                    }
                };
                for x in row.iter_mut() {
                    *x = x.mul(&c);
                }
            }
            assert_eq!(Matrix::from_rows(rows).unwrap().rank(), r);
        }
    }
    report(6, "property suite: span-dim identity", true);
}

#[test]
fn criterion_6b_kernel_vs_brute_force() {
    let shapes = small_shapes();
    for (fi, field) in fields().iter().enumerate() {
        let mut rng = ChaCha12Rng::seed_from_u64(610 + fi as u64);
        for _ in 0..cases() {
            let sh = shapes.choose(&mut rng).unwrap();
            let s = random_dependent_set(sh, field, &mut rng);
            let rep = analyze(&s).unwrap();
            let e = rep.defect_e;
            // embed each point once; subset defects are then plain ranks of
            // row selections, independent of the library's incremental paths
            let rows: Vec<Vec<Scalar>> = embed_matrix(&s).rows_iter().map(|r| r.to_vec()).collect();
            let subset_defect = |idxs: &[usize]| -> usize {
                let sel: Vec<Vec<Scalar>> = idxs.iter().map(|&i| rows[i].clone()).collect();
                idxs.len() - Matrix::from_rows(sel).unwrap().rank()
            };
            // brute force: essential <=> dropping the point drops the defect
            let brute: Vec<bool> = (0..s.len())
                .map(|i| {
                    let rest: Vec<usize> = (0..s.len()).filter(|&j| j != i).collect();
                    subset_defect(&rest) == e - 1
                })
                .collect();
            assert_eq!(rep.essential_flags, brute);
            // kernel uniqueness: among all subsets with the same defect, the
            // kernel is contained in every one and is the unique smallest
            let kernel_idx: Vec<usize> =
                (0..s.len()).filter(|&i| rep.essential_flags[i]).collect();
            let mut min_size = usize::MAX;
            let mut min_count = 0usize;
            for mask in 1u32..(1 << s.len()) {
                let idxs: Vec<usize> =
                    (0..s.len()).filter(|i| mask & (1 << i) != 0).collect();
                if subset_defect(&idxs) != e {
                    continue;
                }
                assert!(
                    kernel_idx.iter().all(|i| idxs.contains(i)),
                    "kernel not contained in a defect-preserving subset"
                );
                if idxs.len() < min_size {
                    min_size = idxs.len();
                    min_count = 1;
                } else if idxs.len() == min_size {
                    min_count += 1;
                }
            }
            assert_eq!(min_size, kernel_idx.len());
            assert_eq!(min_count, 1);
        }
    }
    report(6, "property suite: kernel vs brute force", true);
}

#[test]
fn criterion_6c_subset_law() {
    let shapes = small_shapes();
    for (fi, field) in fields().iter().enumerate() {
        let mut rng = ChaCha12Rng::seed_from_u64(620 + fi as u64);
        let mut done = 0;
        while done < cases() {
            let sh = shapes.choose(&mut rng).unwrap();
            let s = random_dependent_set(sh, field, &mut rng);
            let rep = analyze(&s).unwrap();
            // pass to the kernel (tail-free) and require strong essentiality:
            // every subset of size #K - e independent. That is exactly the
            // size-(#K - e) instance of the law below, and tail-freeness
            // alone does not imply it (two disjoint circuits are tail-free
            // yet a subset containing one of them is dependent).
            let kernel_idx: Vec<usize> =
                (0..s.len()).filter(|&i| rep.essential_flags[i]).collect();
            let k = s.subset(&kernel_idx);
            let e = defect(&k).unwrap().1;
            assert_eq!(e, rep.defect_e);
            if !is_strongly_essential(&k).unwrap() {
                continue;
            }
            // every subset S' of a strongly essential set:
            // e(S') = max(0, e - #S + #S')
            let size = rng.gen_range(1..=k.len());
            let mut idxs: Vec<usize> = (0..k.len()).collect();
            idxs.shuffle(&mut rng);
            idxs.truncate(size);
            let sub = k.subset(&idxs);
            let expected = (e + size).saturating_sub(k.len());
            assert_eq!(defect(&sub).unwrap().1, expected);
            done += 1;
        }
    }
    report(6, "property suite: essential-set subset law", true);
}

#[test]
fn criterion_6d_symmetry_invariance() {
    let shapes = mixed_shapes();
    for (fi, field) in fields().iter().enumerate() {
        let mut rng = ChaCha12Rng::seed_from_u64(630 + fi as u64);
        for _ in 0..cases() {
            let sh = shapes.choose(&mut rng).unwrap();
            let n = rng.gen_range(3..=6);
            let s = random_tidy_set(sh, field, n, &mut rng);
            let before = analyze(&s).unwrap();
            // a random projective transformation of each factor, then a
            // random reordering of the points
            let mats: Vec<Matrix> =
                sh.dims().iter().map(|&d| random_invertible(field, d + 1, &mut rng)).collect();
            let mut moved: Vec<MPoint> = s
                .points()
                .iter()
                .map(|p| {
                    let factors: Vec<ProjPoint> = p
                        .factors()
                        .iter()
                        .zip(&mats)
                        .map(|(f, m)| ProjPoint::new(apply_matrix(m, f.coords())).unwrap())
                        .collect();
                    MPoint::new(sh, factors).unwrap()
                })
                .collect();
            moved.shuffle(&mut rng);
            let t = PointSet::new(sh.clone(), *field, moved).unwrap();
            let after = analyze(&t).unwrap();
            assert_eq!(before.defect_e, after.defect_e);
            assert_eq!(before.circuit, after.circuit);
            assert_eq!(before.minimal, after.minimal);
            assert_eq!(before.kernel.len(), after.kernel.len());
        }
    }
    report(6, "property suite: symmetry invariance", true);
}

#[test]
fn criterion_6e_independent_fiber_bound() {
    let shapes = [shape(&[1, 1]), shape(&[1, 1, 1])];
    for (fi, field) in fields().iter().enumerate() {
        let mut rng = ChaCha12Rng::seed_from_u64(640 + fi as u64);
        let mut done = 0;
        while done < cases() {
            let sh = shapes.choose(&mut rng).unwrap();
            let n = rng.gen_range(2..=sh.ambient_len());
            let s = random_tidy_set(sh, field, n, &mut rng);
            if defect(&s).unwrap().1 != 0 {
                continue;
            }
            // an independent set meets each line of the Segre variety (a
            // fiber differing only in one factor) in at most 2 points
            for i in 0..sh.k() {
                for a in 0..s.len() {
                    let fiber = (0..s.len())
                        .filter(|&b| s.points()[a].eta_eq(&s.points()[b], i))
                        .count();
                    assert!(fiber <= 2, "independent set with {fiber} points on a fiber");
                }
            }
            done += 1;
        }
    }
    report(6, "property suite: independent fiber bound", true);
}

#[test]
fn criterion_6f_residual_divisor_lemma() {
    let shapes = [shape(&[1, 1]), shape(&[2, 1]), shape(&[1, 1, 1])];
    for (fi, field) in fields().iter().enumerate() {
        let mut rng = ChaCha12Rng::seed_from_u64(650 + fi as u64);
        let mut done = 0;
        while done < cases() {
            let sh = shapes.choose(&mut rng).unwrap();
            // sample a circuit, split it, and take the partition point,
            // which both halves irredundantly span
            let n = sh.ambient_len() + 1;
            let s = random_tidy_set(sh, field, n, &mut rng);
            if !is_circuit(&s).unwrap() {
                continue;
            }
            let split = rng.gen_range(1..s.len() - 1);
            let mut idxs: Vec<usize> = (0..s.len()).collect();
            idxs.shuffle(&mut rng);
            let (a_idxs, b_idxs) = idxs.split_at(split + 1);
            let q = circuit_partition_point(&s, a_idxs).unwrap();
            if q.iter().all(|c| c.is_zero()) {
                continue;
            }
            let a = s.subset(a_idxs);
            let b = s.subset(b_idxs);
            let i = rng.gen_range(0..sh.k());
            let d = sh.dims()[i];
            // random hyperplane of factor i
            let h = loop {
                let rows: Vec<Vec<Scalar>> =
                    (0..d).map(|_| random_proj_point(field, d, &mut rng).coords().to_vec()).collect();
                if let Ok(h) = LinearSubspace::from_spanning(d + 1, rows) {
                    if h.proj_dim() == d as isize - 1 {
                        break h;
                    }
                }
            };
            let rep = check_lemma_ee0(&q, &a, &b, i, &h);
            if !rep.preconditions_ok {
                continue;
            }
            if rep.hypothesis_holds {
                assert!(rep.conclusion_holds, "hypothesis held but conclusion failed");
            }
            done += 1;
        }
    }
    report(6, "property suite: residual divisor lemma", true);
}

fn random_mobius<R: Rng>(field: &FieldSpec, rng: &mut R) -> Mobius {
    loop {
        let entries: [Scalar; 4] = std::array::from_fn(|_| {
            segre::geometry::random_scalar(field, rng)
        });
        if let Ok(m) = Mobius::new(entries) {
            return m;
        }
    }
}

/// Distinct P^1 parameter values, valid over both field kinds.
fn distinct_params<R: Rng>(field: &FieldSpec, n: usize, rng: &mut R) -> Vec<ProjPoint> {
    let mut out: Vec<ProjPoint> = Vec::new();
    while out.len() < n {
        let t = random_proj_point(field, 1, rng);
        if !out.contains(&t) {
            out.push(t);
        }
    }
    out
}

#[test]
fn criterion_6g_fit_recovers_sampled_curve() {
    for (fi, field) in fields().iter().enumerate() {
        let mut rng = ChaCha12Rng::seed_from_u64(660 + fi as u64);
        for _ in 0..cases() {
            let k = rng.gen_range(2..=3);
            let sh = Shape::new(vec![1; k]).unwrap();
            let maps: Vec<Mobius> = (0..k).map(|_| random_mobius(field, &mut rng)).collect();
            let curve = RncCurve::from_mobius(sh, *field, &maps).unwrap();
            let n = rng.gen_range(3..=5);
            let params = distinct_params(field, n, &mut rng);
            let s = curve.sample(&params).unwrap();
            let fitted = fit_multidegree_one(&s).unwrap();
            assert_eq!(fitted.as_ref(), Some(&curve), "fit did not recover the sampled curve");
        }
    }
    report(6, "property suite: fit recovers sampled curves", true);
}

#[test]
fn criterion_6h_curve_sample_defect_formula() {
    for (fi, field) in fields().iter().enumerate() {
        let mut rng = ChaCha12Rng::seed_from_u64(670 + fi as u64);
        for _ in 0..cases() {
            let k = rng.gen_range(2..=3);
            let sh = Shape::new(vec![1; k]).unwrap();
            let maps: Vec<Mobius> = (0..k).map(|_| random_mobius(field, &mut rng)).collect();
            let curve = RncCurve::from_mobius(sh, *field, &maps).unwrap();
            let max_n = match field.modulus() {
                Some(p) => (p as usize + 1).min(k + 3),
                None => k + 3,
            };
            let n = rng.gen_range(2..=max_n);
            let params = distinct_params(field, n, &mut rng);
            let s = curve.sample(&params).unwrap();
            // points on a multidegree-(1,...,1) curve span min(#S-1, k)
            let e = defect(&s).unwrap().1;
            assert_eq!(e, n.saturating_sub(k + 1));
        }
    }
    report(6, "property suite: curve sample defect formula", true);
}

// ---------------------------------------------------------------- criterion 7

#[test]
fn criterion_7_cli_golden_reports() {
    let fixtures = concat!(env!("CARGO_MANIFEST_DIR"), "/../../fixtures");
    let cases = [
        ("analyze", "diagonal-5.json", "golden/diagonal-5.analyze.json"),
        ("analyze", "kernel-split.json", "golden/kernel-split.analyze.json"),
        ("analyze", "p2p1-conic-line.json", "golden/p2p1-conic-line.analyze.json"),
        ("fit-curve", "diagonal-5.json", "golden/diagonal-5.fit-curve.json"),
    ];
    let mut ok = true;
    for (cmd, input, golden) in cases {
        let out = std::process::Command::new(env!("CARGO_BIN_EXE_segre"))
            .arg(cmd)
            .arg(format!("{fixtures}/{input}"))
            .arg("--no-timestamp")
            .output()
            .expect("CLI binary runs");
        let expected = std::fs::read(format!("{fixtures}/{golden}")).expect("golden file");
        if !out.status.success() || out.stdout != expected {
            eprintln!("golden mismatch for {cmd} {input}");
            ok = false;
        }
    }
    report(7, "CLI golden reports", ok);
}
