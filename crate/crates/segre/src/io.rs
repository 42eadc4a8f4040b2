//! JSON file formats: point sets in and reports out. Field order of the
//! serde structs is the schema; identical inputs produce identical bytes
//! (the timestamp and elapsed fields are omitted when stability is wanted).

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::classifier::VerificationReport;
use crate::curves::RncCurve;
use crate::error::{Result, SegreError};
use crate::field::{FieldSpec, Scalar};
use crate::geometry::{MPoint, PointSet, ProjPoint, Shape};
use crate::segre::DefectReport;

pub const POINTSET_SCHEMA: &str = "segre.pointset/1";
pub const REPORT_SCHEMA: &str = "segre.report/1";

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FieldJson {
    pub kind: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub p: Option<u64>,
}

impl FieldJson {
    pub fn from_field(field: &FieldSpec) -> FieldJson {
        match field {
            FieldSpec::Prime(p) => FieldJson { kind: "prime".into(), p: Some(*p) },
            FieldSpec::Rational => FieldJson { kind: "rational".into(), p: None },
        }
    }

    pub fn to_field(&self) -> Result<FieldSpec> {
        match self.kind.as_str() {
            "prime" => {
                let p = self.p.ok_or_else(|| {
                    SegreError::Parse("prime field needs a modulus 'p'".into())
                })?;
                FieldSpec::prime(p)
            }
            "rational" => Ok(FieldSpec::rational()),
            other => Err(SegreError::Parse(format!("unknown field kind '{other}'"))),
        }
    }
}

/// A point set on disk: per point, one integer list per factor. P^1 points
/// are always two integers ([1, 0] encodes the point at infinity); integers
/// are reduced mod p on load for prime fields.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PointSetFile {
    pub schema: String,
    pub field: FieldJson,
    pub shape: Vec<usize>,
    pub points: Vec<Vec<Vec<i64>>>,
}

fn big_gcd(a: &BigInt, b: &BigInt) -> BigInt {
    let (mut a, mut b) = (a.abs(), b.abs());
    while !b.is_zero() {
        let r = &a % &b;
        a = b;
        b = r;
    }
    a
}

/// Canonical integer representatives of a scalar vector up to a common
/// scale: clear denominators, divide by the content, make the first
/// nonzero entry positive. Over GF(p) this is just the residues.
pub fn scalars_to_ints(coords: &[Scalar]) -> Result<Vec<i64>> {
    if coords.iter().all(|c| matches!(c, Scalar::Fp { .. })) {
        return Ok(coords.iter().map(|c| c.residue() as i64).collect());
    }
    let pairs: Vec<(BigInt, BigInt)> = coords.iter().map(|c| c.to_int_pair()).collect();
    let mut lcm = BigInt::one();
    for (_, d) in &pairs {
        lcm = &lcm / big_gcd(&lcm, d) * d.abs();
    }
    let mut ints: Vec<BigInt> = pairs.iter().map(|(n, d)| n * (&lcm / d)).collect();
    let mut content = BigInt::zero();
    for v in &ints {
        content = big_gcd(&content, v);
    }
    if !content.is_zero() {
        for v in ints.iter_mut() {
            *v = &*v / &content;
        }
    }
    if let Some(first) = ints.iter().find(|v| !v.is_zero()) {
        if first.is_negative() {
            for v in ints.iter_mut() {
                *v = -&*v;
            }
        }
    }
    ints.iter()
        .map(|v| {
            i64::try_from(v).map_err(|_| {
                SegreError::Parse("coordinate too large for the integer file format".into())
            })
        })
        .collect()
}

fn point_to_ints(pt: &ProjPoint) -> Result<Vec<i64>> {
    scalars_to_ints(pt.coords())
}

impl PointSetFile {
    pub fn from_point_set(s: &PointSet) -> Result<PointSetFile> {
        let mut points = Vec::with_capacity(s.len());
        for p in s.points() {
            let factors: Result<Vec<Vec<i64>>> = p.factors().iter().map(point_to_ints).collect();
            points.push(factors?);
        }
        Ok(PointSetFile {
            schema: POINTSET_SCHEMA.into(),
            field: FieldJson::from_field(s.field()),
            shape: s.shape().dims().to_vec(),
            points,
        })
    }

    pub fn to_point_set(&self) -> Result<PointSet> {
        if self.schema != POINTSET_SCHEMA {
            return Err(SegreError::Parse(format!(
                "unsupported schema '{}', expected '{POINTSET_SCHEMA}'",
                self.schema
            )));
        }
        let field = self.field.to_field()?;
        let shape = Shape::new(self.shape.clone())?;
        let mut pts = Vec::with_capacity(self.points.len());
        for (pi, raw) in self.points.iter().enumerate() {
            if raw.len() != shape.k() {
                return Err(SegreError::Parse(format!(
                    "point {pi}: expected {} factors, found {}",
                    shape.k(),
                    raw.len()
                )));
            }
            let factors: Result<Vec<ProjPoint>> = raw
                .iter()
                .enumerate()
                .map(|(fi, coords)| {
                    if coords.len() != shape.dims()[fi] + 1 {
                        return Err(SegreError::Parse(format!(
                            "point {pi}, factor {fi}: expected {} coordinates, found {}",
                            shape.dims()[fi] + 1,
                            coords.len()
                        )));
                    }
                    ProjPoint::from_ints(&field, coords).map_err(|_| {
                        SegreError::Parse(format!("point {pi}, factor {fi}: zero vector"))
                    })
                })
                .collect();
            pts.push(MPoint::new(&shape, factors?)?);
        }
        PointSet::new(shape, field, pts)
    }

    pub fn load(path: &std::path::Path) -> Result<PointSet> {
        let text = std::fs::read_to_string(path)?;
        let file: PointSetFile =
            serde_json::from_str(&text).map_err(|e| SegreError::Parse(e.to_string()))?;
        file.to_point_set()
    }
}

fn mpoint_to_ints(p: &MPoint) -> Result<Vec<Vec<i64>>> {
    p.factors().iter().map(point_to_ints).collect()
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DefectReportJson {
    pub span_dim: isize,
    pub defect_e: usize,
    pub circuit: bool,
    pub minimal: bool,
    pub i_minimal: Vec<bool>,
    pub nondegenerate: bool,
    pub minimal_subspace_dims: Vec<usize>,
    pub strongly_essential: bool,
    pub essential_flags: Vec<bool>,
    pub kernel: Vec<Vec<Vec<i64>>>,
    pub tail: Vec<Vec<Vec<i64>>>,
}

impl DefectReportJson {
    pub fn from_report(rep: &DefectReport) -> Result<DefectReportJson> {
        Ok(DefectReportJson {
            span_dim: rep.span_dim,
            defect_e: rep.defect_e,
            circuit: rep.circuit,
            minimal: rep.minimal,
            i_minimal: rep.i_minimal.clone(),
            nondegenerate: rep.nondegenerate,
            minimal_subspace_dims: rep.minimal_subspace_dims.clone(),
            strongly_essential: rep.strongly_essential,
            essential_flags: rep.essential_flags.clone(),
            kernel: rep.kernel.iter().map(mpoint_to_ints).collect::<Result<_>>()?,
            tail: rep.tail.iter().map(mpoint_to_ints).collect::<Result<_>>()?,
        })
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CurveJson {
    pub shape: Vec<usize>,
    /// row-major frame matrices, one per factor, canonical integer entries
    pub frames: Vec<Vec<Vec<i64>>>,
}

impl CurveJson {
    pub fn from_curve(c: &RncCurve) -> Result<CurveJson> {
        let frames = c
            .frames()
            .iter()
            .map(|m| {
                // a frame matters only up to scale, so canonicalize the
                // flattened entry vector and re-chunk into rows
                let flat: Vec<Scalar> = m.rows_iter().flatten().cloned().collect();
                let ints = scalars_to_ints(&flat)?;
                let cols = m.ncols();
                Ok(ints.chunks(cols).map(|r| r.to_vec()).collect())
            })
            .collect::<Result<_>>()?;
        Ok(CurveJson { shape: c.shape().dims().to_vec(), frames })
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CountJson {
    pub shape: Vec<usize>,
    pub field: FieldJson,
    pub count: String,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct VerificationJson {
    pub statement_id: String,
    pub success: bool,
    pub reduction_used: bool,
    pub shapes_checked: Vec<Vec<usize>>,
    pub fields_checked: Vec<FieldJson>,
    pub counts: Vec<CountJson>,
    pub counterexamples: Vec<PointSetFile>,
    pub notes: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub elapsed_ms: Option<u128>,
}

impl VerificationJson {
    pub fn from_report(rep: &VerificationReport, with_elapsed: bool) -> Result<VerificationJson> {
        Ok(VerificationJson {
            statement_id: rep.statement_id.clone(),
            success: rep.success(),
            reduction_used: rep.reduction_used,
            shapes_checked: rep.shapes_checked.iter().map(|s| s.dims().to_vec()).collect(),
            fields_checked: rep.fields_checked.iter().map(FieldJson::from_field).collect(),
            counts: rep
                .counts
                .iter()
                .map(|c| CountJson {
                    shape: c.shape.dims().to_vec(),
                    field: FieldJson::from_field(&c.field),
                    count: c.count.to_string(),
                })
                .collect(),
            counterexamples: rep
                .counterexamples
                .iter()
                .map(PointSetFile::from_point_set)
                .collect::<Result<_>>()?,
            notes: rep.notes.clone(),
            elapsed_ms: with_elapsed.then_some(rep.elapsed_ms),
        })
    }
}

/// Results payload of a report, one variant per command.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ReportResults {
    Analyze {
        report: DefectReportJson,
    },
    Embed {
        rows: Vec<Vec<i64>>,
    },
    FitCurve {
        curve: Option<CurveJson>,
        equivalence_witnesses: Vec<Option<Vec<Vec<i64>>>>,
    },
    Enumerate {
        emitted: Vec<PointSetFile>,
        emitted_count: usize,
        corrected_total: String,
    },
    Verify {
        report: VerificationJson,
    },
    Construct {
        point_set: PointSetFile,
        report: DefectReportJson,
    },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ReportFile {
    pub schema: String,
    pub tool_version: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub timestamp_unix: Option<u64>,
    /// verbatim echo of the command inputs for reproducibility
    pub inputs: serde_json::Value,
    pub results: ReportResults,
}

impl ReportFile {
    pub fn new(inputs: serde_json::Value, results: ReportResults, timestamp: bool) -> ReportFile {
        ReportFile {
            schema: REPORT_SCHEMA.into(),
            tool_version: env!("CARGO_PKG_VERSION").into(),
            timestamp_unix: timestamp.then(|| {
                std::time::SystemTime::now()
                    .duration_since(std::time::UNIX_EPOCH)
                    .map(|d| d.as_secs())
                    .unwrap_or(0)
            }),
            inputs,
            results,
        }
    }

    pub fn to_json(&self) -> String {
        let mut out = serde_json::to_string_pretty(self).expect("report serializes");
        out.push('\n');
        out
    }
}
