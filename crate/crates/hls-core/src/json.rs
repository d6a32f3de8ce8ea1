//! JSON file formats for potentials, boundary pairs, and scattering data.
//!
//! The on-disk schemas are flat and explicit: complex matrices are stored as
//! `{"rows": n, "cols": n, "re": [...], "im": [...]}` with row-major entry
//! order, and every float is written with 17 significant digits so a
//! write-read-write cycle is byte-identical and loses nothing.  Parsing goes
//! through plain data-transfer structs; structural errors carry the JSON
//! path of the offending field.

use crate::linalg::CMat;
use crate::model::{
    BoundState, BoundaryPair, ExpPolyTerm, FsRepresentation, Grid, ModelError, Potential,
    PotentialData, ScatteringData, ScatteringVariant,
};
use num_complex::Complex64;
use serde::{de::DeserializeOwned, Deserialize, Serialize};
use std::io::{self, Read, Write};
use thiserror::Error;

/// Errors raised while reading or writing interface files.
#[derive(Debug, Error)]
pub enum JsonError {
    #[error("i/o failure: {0}")]
    Io(#[from] io::Error),
    #[error("malformed JSON at {path}: {message}")]
    Malformed { path: String, message: String },
    #[error("schema violation at {path}: {message}")]
    Schema { path: String, message: String },
    #[error(transparent)]
    Model(#[from] ModelError),
}

type Result<T> = std::result::Result<T, JsonError>;

fn schema_err<T>(path: impl Into<String>, message: impl Into<String>) -> Result<T> {
    Err(JsonError::Schema { path: path.into(), message: message.into() })
}

/// Formats a float with 17 significant digits, enough to reproduce any
/// double exactly on parse.
pub fn format_f64(value: f64) -> String {
    format!("{value:.16e}")
}

struct SigFigFormatter;

impl serde_json::ser::Formatter for SigFigFormatter {
    fn write_f64<W>(&mut self, writer: &mut W, value: f64) -> io::Result<()>
    where
        W: ?Sized + Write,
    {
        write!(writer, "{value:.16e}")
    }

    fn write_f32<W>(&mut self, writer: &mut W, value: f32) -> io::Result<()>
    where
        W: ?Sized + Write,
    {
        write!(writer, "{value:.8e}")
    }
}

/// Serializes any DTO with the 17-significant-digit float convention and a
/// trailing newline.
///
/// # Errors
///
/// Returns an error when the writer fails.
pub fn write_json<T: Serialize, W: Write>(writer: &mut W, value: &T) -> Result<()> {
    let mut ser = serde_json::Serializer::with_formatter(&mut *writer, SigFigFormatter);
    value
        .serialize(&mut ser)
        .map_err(|e| JsonError::Malformed { path: ".".into(), message: e.to_string() })?;
    writer.write_all(b"\n")?;
    Ok(())
}

/// Serializes a DTO to an owned string in the on-disk format.
pub fn to_json_string<T: Serialize>(value: &T) -> String {
    let mut buf = Vec::new();
    write_json(&mut buf, value).expect("writing to memory cannot fail");
    String::from_utf8(buf).expect("serde_json emits UTF-8")
}

/// Deserializes a DTO, reporting the JSON path on failure.
///
/// # Errors
///
/// Returns an error when the reader fails or the document does not match the
/// schema; the error names the offending field path.
pub fn read_json<T: DeserializeOwned, R: Read>(reader: &mut R) -> Result<T> {
    let mut buf = String::new();
    reader.read_to_string(&mut buf)?;
    from_json_str(&buf)
}

/// Deserializes a DTO from a string, reporting the JSON path on failure.
///
/// # Errors
///
/// See [`read_json`].
pub fn from_json_str<T: DeserializeOwned>(text: &str) -> Result<T> {
    let de = &mut serde_json::Deserializer::from_str(text);
    serde_path_to_error::deserialize(de).map_err(|e| JsonError::Malformed {
        path: e.path().to_string(),
        message: e.inner().to_string(),
    })
}

/// Complex matrix in row-major split real/imaginary form.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MatrixDto {
    pub rows: usize,
    pub cols: usize,
    pub re: Vec<f64>,
    pub im: Vec<f64>,
}

impl MatrixDto {
    /// Converts a dense matrix into its storage form.
    pub fn from_cmat(m: &CMat) -> Self {
        let mut re = Vec::with_capacity(m.len());
        let mut im = Vec::with_capacity(m.len());
        for row in 0..m.nrows() {
            for col in 0..m.ncols() {
                re.push(m[(row, col)].re);
                im.push(m[(row, col)].im);
            }
        }
        MatrixDto { rows: m.nrows(), cols: m.ncols(), re, im }
    }

    /// Rebuilds the dense matrix, checking lengths and finiteness.
    ///
    /// # Errors
    ///
    /// Returns a schema violation naming `path` when the entry counts do not
    /// match the shape or an entry is not finite.
    pub fn to_cmat(&self, path: &str) -> Result<CMat> {
        let expected = self.rows * self.cols;
        if self.re.len() != expected || self.im.len() != expected {
            return schema_err(
                path,
                format!(
                    "matrix is {}x{} but re has {} and im has {} entries",
                    self.rows,
                    self.cols,
                    self.re.len(),
                    self.im.len()
                ),
            );
        }
        for (i, (&re, &im)) in self.re.iter().zip(&self.im).enumerate() {
            if !re.is_finite() || !im.is_finite() {
                return schema_err(format!("{path}.re[{i}]"), "entry must be finite");
            }
        }
        Ok(CMat::from_fn(self.rows, self.cols, |r, c| {
            let i = r * self.cols + c;
            Complex64::new(self.re[i], self.im[i])
        }))
    }
}

/// Potential file: `{"n", "variant", "x_cut", "grid"?, "values"?, "name"?}`.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PotentialDto {
    pub n: usize,
    pub variant: String,
    pub x_cut: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub grid: Option<Grid>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub values: Option<Vec<MatrixDto>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
}

impl PotentialDto {
    /// Storage form of a domain potential.
    pub fn from_domain(p: &Potential) -> Self {
        match &p.data {
            PotentialData::Zero => PotentialDto {
                n: p.n,
                variant: "zero".into(),
                x_cut: p.x_cut,
                grid: None,
                values: None,
                name: None,
            },
            PotentialData::Sampled { grid, values } => PotentialDto {
                n: p.n,
                variant: "sampled".into(),
                x_cut: p.x_cut,
                grid: Some(*grid),
                values: Some(values.iter().map(MatrixDto::from_cmat).collect()),
                name: None,
            },
            PotentialData::Catalog { name } => PotentialDto {
                n: p.n,
                variant: "catalog".into(),
                x_cut: p.x_cut,
                grid: None,
                values: None,
                name: Some(name.clone()),
            },
        }
    }

    /// Validated domain potential.
    ///
    /// # Errors
    ///
    /// Returns a schema violation when the variant tag is unknown, a needed
    /// field is missing, or the samples break a model invariant.
    pub fn to_domain(&self) -> Result<Potential> {
        let p = match self.variant.as_str() {
            "zero" => Potential::zero(self.n, self.x_cut),
            "sampled" => {
                let grid = match self.grid {
                    Some(g) => g,
                    None => return schema_err("grid", "required for the sampled variant"),
                };
                let dtos = match &self.values {
                    Some(v) => v,
                    None => return schema_err("values", "required for the sampled variant"),
                };
                let mut values = Vec::with_capacity(dtos.len());
                for (i, dto) in dtos.iter().enumerate() {
                    values.push(dto.to_cmat(&format!("values[{i}]"))?);
                }
                Potential { n: self.n, data: PotentialData::Sampled { grid, values }, x_cut: self.x_cut }
            }
            "catalog" => {
                let name = match &self.name {
                    Some(name) => name.clone(),
                    None => return schema_err("name", "required for the catalog variant"),
                };
                Potential { n: self.n, data: PotentialData::Catalog { name }, x_cut: self.x_cut }
            }
            other => {
                return schema_err(
                    "variant",
                    format!("unknown variant '{other}'; expected zero, sampled, or catalog"),
                )
            }
        };
        let violations = p.validate();
        if !violations.is_empty() {
            return schema_err("values", violations.join("; "));
        }
        if let PotentialData::Sampled { values, .. } = &p.data {
            for (i, v) in values.iter().enumerate() {
                if v.nrows() != self.n {
                    return schema_err(
                        format!("values[{i}]"),
                        format!("matrix is {}x{}, expected {}x{}", v.nrows(), v.ncols(), self.n, self.n),
                    );
                }
            }
        }
        Ok(p)
    }
}

/// Boundary file: `{"A": matrix, "B": matrix}`.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoundaryDto {
    #[serde(rename = "A")]
    pub a: MatrixDto,
    #[serde(rename = "B")]
    pub b: MatrixDto,
}

impl BoundaryDto {
    /// Storage form of a boundary pair.
    pub fn from_domain(pair: &BoundaryPair) -> Self {
        BoundaryDto { a: MatrixDto::from_cmat(pair.a()), b: MatrixDto::from_cmat(pair.b()) }
    }

    /// Validated boundary pair.
    ///
    /// # Errors
    ///
    /// Returns an error when the matrices are malformed or the pair fails
    /// the selfadjointness conditions.
    pub fn to_domain(&self) -> Result<BoundaryPair> {
        let a = self.a.to_cmat("A")?;
        let b = self.b.to_cmat("B")?;
        Ok(BoundaryPair::new(a, b)?)
    }
}

/// One exponential-polynomial term `C y^power e^{-rate y}`.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TermDto {
    #[serde(rename = "C")]
    pub c: MatrixDto,
    pub rate: f64,
    pub power: u32,
}

/// One bound state `{"kappa": kappa, "M": matrix}`.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoundStateDto {
    pub kappa: f64,
    #[serde(rename = "M")]
    pub m: MatrixDto,
}

/// Scattering-data file; the `variant` tag selects between the analytic
/// exponential-polynomial representation and sampled values on a k grid.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScatteringDataDto {
    pub n: usize,
    pub variant: String,
    pub s_inf: MatrixDto,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub right_terms: Option<Vec<TermDto>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub left_terms: Option<Vec<TermDto>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub k_grid: Option<Grid>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub s_values: Option<Vec<MatrixDto>>,
    pub bound_states: Vec<BoundStateDto>,
}

fn terms_to_domain(dtos: &[TermDto], label: &str) -> Result<Vec<ExpPolyTerm>> {
    let mut terms = Vec::with_capacity(dtos.len());
    for (i, dto) in dtos.iter().enumerate() {
        let c = dto.c.to_cmat(&format!("{label}[{i}].C"))?;
        let term = ExpPolyTerm::new(c, dto.rate, dto.power).map_err(|e| JsonError::Schema {
            path: format!("{label}[{i}]"),
            message: e.to_string(),
        })?;
        terms.push(term);
    }
    Ok(terms)
}

fn terms_from_domain(terms: &[ExpPolyTerm]) -> Vec<TermDto> {
    terms
        .iter()
        .map(|t| TermDto { c: MatrixDto::from_cmat(&t.c), rate: t.rate, power: t.power })
        .collect()
}

impl ScatteringDataDto {
    /// Storage form of a scattering data set.
    pub fn from_domain(data: &ScatteringData) -> Self {
        let bound_states = data
            .bound_states
            .iter()
            .map(|b| BoundStateDto { kappa: b.kappa, m: MatrixDto::from_cmat(&b.m) })
            .collect();
        match &data.variant {
            ScatteringVariant::Analytic(fs) => ScatteringDataDto {
                n: data.n,
                variant: "analytic".into(),
                s_inf: MatrixDto::from_cmat(&fs.s_inf),
                right_terms: Some(terms_from_domain(&fs.right)),
                left_terms: Some(terms_from_domain(&fs.left)),
                k_grid: None,
                s_values: None,
                bound_states,
            },
            ScatteringVariant::Sampled { k_grid, s_values, s_inf } => ScatteringDataDto {
                n: data.n,
                variant: "sampled".into(),
                s_inf: MatrixDto::from_cmat(s_inf),
                right_terms: None,
                left_terms: None,
                k_grid: Some(*k_grid),
                s_values: Some(s_values.iter().map(MatrixDto::from_cmat).collect()),
                bound_states,
            },
        }
    }

    /// Validated domain scattering data.
    ///
    /// # Errors
    ///
    /// Returns a schema violation when the variant tag is unknown, a needed
    /// field is missing, or a hard model invariant (positive rates, distinct
    /// bound-state energies, positive semidefinite normalizations) fails.
    pub fn to_domain(&self) -> Result<ScatteringData> {
        let s_inf = self.s_inf.to_cmat("s_inf")?;
        if s_inf.nrows() != self.n || s_inf.ncols() != self.n {
            return schema_err(
                "s_inf",
                format!("matrix is {}x{}, expected {}x{}", s_inf.nrows(), s_inf.ncols(), self.n, self.n),
            );
        }
        let mut bound_states = Vec::with_capacity(self.bound_states.len());
        for (i, dto) in self.bound_states.iter().enumerate() {
            let m = dto.m.to_cmat(&format!("bound_states[{i}].M"))?;
            let bs = BoundState::new(dto.kappa, m).map_err(|e| JsonError::Schema {
                path: format!("bound_states[{i}]"),
                message: e.to_string(),
            })?;
            bound_states.push(bs);
        }
        match self.variant.as_str() {
            "analytic" => {
                let right = terms_to_domain(self.right_terms.as_deref().unwrap_or(&[]), "right_terms")?;
                let left = terms_to_domain(self.left_terms.as_deref().unwrap_or(&[]), "left_terms")?;
                for (label, terms) in [("right_terms", &right), ("left_terms", &left)] {
                    for (i, t) in terms.iter().enumerate() {
                        if t.c.nrows() != self.n {
                            return schema_err(
                                format!("{label}[{i}].C"),
                                format!("matrix is {}x{}, expected {}x{}", t.c.nrows(), t.c.ncols(), self.n, self.n),
                            );
                        }
                    }
                }
                let fs = FsRepresentation { s_inf, right, left };
                Ok(ScatteringData::analytic(fs, bound_states)?)
            }
            "sampled" => {
                let k_grid = match self.k_grid {
                    Some(g) => g,
                    None => return schema_err("k_grid", "required for the sampled variant"),
                };
                let dtos = match &self.s_values {
                    Some(v) => v,
                    None => return schema_err("s_values", "required for the sampled variant"),
                };
                let mut s_values = Vec::with_capacity(dtos.len());
                for (i, dto) in dtos.iter().enumerate() {
                    s_values.push(dto.to_cmat(&format!("s_values[{i}]"))?);
                }
                Ok(ScatteringData::sampled(k_grid, s_values, s_inf, bound_states)?)
            }
            other => schema_err(
                "variant",
                format!("unknown variant '{other}'; expected analytic or sampled"),
            ),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{cxi, eye, mat_cx, mat_re, max_abs};

    #[test]
    fn matrix_round_trip_preserves_entries_and_order() {
        let m = mat_cx(2, 3, &[
            cxi(1.0, -2.0), cxi(0.25, 0.0), cxi(0.0, 1e-17),
            cxi(-4.5, 3.25), cxi(1e300, -1e-300), cxi(0.1, 0.2),
        ]);
        let dto = MatrixDto::from_cmat(&m);
        assert_eq!(dto.re[1], 0.25, "row-major: entry (0,1) is the second");
        let back = dto.to_cmat("m").unwrap();
        assert_eq!(max_abs(&(&back - &m)), 0.0);
    }

    #[test]
    fn malformed_matrix_reports_path() {
        let dto = MatrixDto { rows: 2, cols: 2, re: vec![1.0, 2.0, 3.0], im: vec![0.0; 4] };
        let err = dto.to_cmat("values[3]").unwrap_err();
        assert!(err.to_string().contains("values[3]"), "got: {err}");
    }

    #[test]
    fn non_finite_entries_are_rejected() {
        let dto = MatrixDto { rows: 1, cols: 1, re: vec![f64::NAN], im: vec![0.0] };
        assert!(dto.to_cmat("V").is_err());
    }

    #[test]
    fn float_format_is_17_significant_digits_and_lossless() {
        for &x in &[0.02, -1.5, 1.0 / 3.0, 6.02e23, -2.2250738585072014e-308, 0.0] {
            let s = format_f64(x);
            let mantissa = s.trim_start_matches('-');
            let digits: usize =
                mantissa.chars().take_while(|c| *c != 'e').filter(char::is_ascii_digit).count();
            assert_eq!(digits, 17, "'{s}' should carry 17 significant digits");
            let back: f64 = s.parse().unwrap();
            assert_eq!(back, x, "parsing '{s}' must restore the exact double");
        }
    }

    #[test]
    fn unknown_variant_is_a_schema_error() {
        let dto = PotentialDto {
            n: 1,
            variant: "analytic".into(),
            x_cut: 10.0,
            grid: None,
            values: None,
            name: None,
        };
        let err = dto.to_domain().unwrap_err();
        assert!(err.to_string().contains("variant"));
    }

    #[test]
    fn missing_field_error_names_the_path() {
        let text = r#"{"n": 1, "variant": "analytic", "s_inf": {"rows":1,"cols":1,"re":[1.0]},
                       "bound_states": []}"#;
        let err = from_json_str::<ScatteringDataDto>(text).unwrap_err();
        assert!(err.to_string().contains("s_inf"), "got: {err}");
    }

    #[test]
    fn scattering_data_json_round_trip_is_byte_identical() {
        let fs = FsRepresentation {
            s_inf: -eye(1),
            right: vec![ExpPolyTerm::new(mat_re(1, 1, &[2.0]), 1.0, 0).unwrap()],
            left: vec![],
        };
        let data = ScatteringData::analytic(fs, vec![
            BoundState::new(1.0 / 3.0, mat_re(1, 1, &[2.0f64.sqrt()])).unwrap(),
        ])
        .unwrap();
        let first = to_json_string(&ScatteringDataDto::from_domain(&data));
        let reread: ScatteringDataDto = from_json_str(&first).unwrap();
        let second = to_json_string(&ScatteringDataDto::from_domain(&reread.to_domain().unwrap()));
        assert_eq!(first, second);
        assert!(first.contains("\"variant\":\"analytic\""));
        assert!(!first.contains("k_grid"), "absent fields stay absent");
    }

    #[test]
    fn boundary_json_round_trip_validates() {
        let pair = BoundaryPair::new(eye(2), mat_re(2, 2, &[1.0, 2.0, 2.0, -1.0])).unwrap();
        let text = to_json_string(&BoundaryDto::from_domain(&pair));
        let back: BoundaryDto = from_json_str(&text).unwrap();
        let pair2 = back.to_domain().unwrap();
        assert_eq!(max_abs(&(pair.a() - pair2.a())), 0.0);
        assert_eq!(max_abs(&(pair.b() - pair2.b())), 0.0);
    }
}
