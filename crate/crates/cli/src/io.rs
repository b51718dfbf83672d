//! JSON formats. Complex numbers are `[re, im]` pairs and matrices are
//! row-major arrays of rows.

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;
use std::sync::Arc;

use mattolab::characterize::{CaraCertificate, MembershipReport, Witness};
use mattolab::linalg::{c, CMat, CVec};
use mattolab::matfun::{build_inner, Grid, InnerFunction, MatFun, PotapovFactor};
use mattolab::modelspace::ModelSpace;
use mattolab::ops::{OperatorMatrix, SymbolPair};
use mattolab::GlobalConfig;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

pub type JsonC = [f64; 2];
pub type JsonMat = Vec<Vec<JsonC>>;

/// Where and why an input file could not be read as the expected schema.
#[derive(Debug, Clone, PartialEq)]
pub struct ParseError {
    pub source: String,
    /// Dotted JSON path of the offending value (`.` for the root).
    pub path: String,
    pub line: usize,
    pub column: usize,
    pub offset: usize,
    pub message: String,
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}: at {} (line {}, column {}, byte {}): {}",
            self.source, self.path, self.line, self.column, self.offset, self.message
        )
    }
}

impl std::error::Error for ParseError {}

/// Byte offset of a 1-based (line, column) position.
fn byte_offset(text: &str, line: usize, column: usize) -> usize {
    if line == 0 {
        return 0;
    }
    let start: usize = text
        .split_inclusive('\n')
        .take(line - 1)
        .map(str::len)
        .sum();
    (start + column.saturating_sub(1)).min(text.len())
}

pub fn parse<T: DeserializeOwned>(text: &str, source: &str) -> Result<T, ParseError> {
    let syntax = |e: serde_json::Error, path: String| ParseError {
        source: source.into(),
        path,
        line: e.line(),
        column: e.column(),
        offset: byte_offset(text, e.line(), e.column()),
        message: e.to_string(),
    };
    let mut de = serde_json::Deserializer::from_str(text);
    let value: T = serde_path_to_error::deserialize(&mut de).map_err(|e| {
        let path = e.path().to_string();
        syntax(e.into_inner(), path)
    })?;
    de.end().map_err(|e| syntax(e, ".".into()))?;
    Ok(value)
}

/// Schema violation found after syntactic parsing; no position is known
/// beyond the JSON path.
pub fn invalid(source: &str, path: &str, message: impl Into<String>) -> ParseError {
    ParseError {
        source: source.into(),
        path: path.into(),
        line: 0,
        column: 0,
        offset: 0,
        message: message.into(),
    }
}

pub fn mat_to_json(m: &CMat) -> JsonMat {
    (0..m.nrows())
        .map(|i| {
            (0..m.ncols())
                .map(|j| [m[(i, j)].re, m[(i, j)].im])
                .collect()
        })
        .collect()
}

pub fn vec_to_json(v: &CVec) -> Vec<JsonC> {
    v.iter().map(|z| [z.re, z.im]).collect()
}

/// Rectangular matrix; `shape` if given must match.
pub fn mat_from_json(
    m: &JsonMat,
    shape: Option<(usize, usize)>,
    source: &str,
    path: &str,
) -> Result<CMat, ParseError> {
    let rows = m.len();
    let cols = m.first().map_or(0, Vec::len);
    if let Some((i, r)) = m.iter().enumerate().find(|(_, r)| r.len() != cols) {
        return Err(invalid(
            source,
            &format!("{path}[{i}]"),
            format!("row has {} entries, expected {cols}", r.len()),
        ));
    }
    if let Some((er, ec)) = shape {
        if (rows, cols) != (er, ec) && !(er * ec == 0 && rows == 0) {
            return Err(invalid(
                source,
                path,
                format!("matrix is {rows}x{cols}, expected {er}x{ec}"),
            ));
        }
        if rows == 0 {
            return Ok(CMat::zeros(er, ec));
        }
    }
    Ok(CMat::from_fn(rows, cols, |i, j| c(m[i][j][0], m[i][j][1])))
}

// ------------------------------------------------------------ inner.json

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct FactorSpec {
    pub w: JsonC,
    #[serde(rename = "P")]
    pub p: JsonMat,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct InnerSpec {
    pub d: usize,
    #[serde(rename = "U0")]
    pub u0: JsonMat,
    pub factors: Vec<FactorSpec>,
}

/// Validated content of an `inner.json`, before a grid is chosen.
#[derive(Debug)]
pub struct InnerInput {
    pub d: usize,
    pub u0: CMat,
    pub factors: Vec<PotapovFactor>,
}

impl InnerInput {
    pub fn degree(&self) -> usize {
        self.factors.iter().map(PotapovFactor::rank).sum()
    }

    pub fn max_radius(&self) -> f64 {
        self.factors
            .iter()
            .map(|f| f.w().norm())
            .fold(0.0, f64::max)
    }

    pub fn build(&self, grid: &Arc<Grid>, cfg: &GlobalConfig) -> mattolab::Result<InnerFunction> {
        build_inner(&self.u0, self.factors.clone(), grid, cfg)
    }
}

impl InnerSpec {
    pub fn from_parts(u0: &CMat, factors: &[PotapovFactor]) -> Self {
        Self {
            d: u0.nrows(),
            u0: mat_to_json(u0),
            factors: factors
                .iter()
                .map(|f| FactorSpec {
                    w: [f.w().re, f.w().im],
                    p: mat_to_json(f.projection()),
                })
                .collect(),
        }
    }

    pub fn validate(&self, source: &str) -> Result<InnerInput, ParseError> {
        let d = self.d;
        if d == 0 {
            return Err(invalid(source, "d", "dimension must be positive"));
        }
        let u0 = mat_from_json(&self.u0, Some((d, d)), source, "U0")?;
        let mut factors = Vec::with_capacity(self.factors.len());
        for (i, f) in self.factors.iter().enumerate() {
            let p = mat_from_json(&f.p, Some((d, d)), source, &format!("factors[{i}].P"))?;
            let w = c(f.w[0], f.w[1]);
            let factor = PotapovFactor::new(w, &p)
                .map_err(|e| invalid(source, &format!("factors[{i}]"), e.to_string()))?;
            factors.push(factor);
        }
        Ok(InnerInput { d, u0, factors })
    }
}

// ----------------------------------------------------------- symbol json

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct SymbolSpec {
    pub band: [i64; 2],
    /// Laurent coefficients keyed by the decimal index `n`.
    pub coeffs: BTreeMap<String, JsonMat>,
}

impl SymbolSpec {
    pub fn band_width(&self) -> usize {
        (self.band[1] - self.band[0]).unsigned_abs() as usize
    }

    pub fn to_matfun(
        &self,
        grid: &Arc<Grid>,
        d: usize,
        source: &str,
    ) -> Result<MatFun, ParseError> {
        let [lo, hi] = self.band;
        if lo > hi {
            return Err(invalid(source, "band", format!("empty band [{lo}, {hi}]")));
        }
        let mut terms = BTreeMap::new();
        for (key, m) in &self.coeffs {
            let path = format!("coeffs.{key}");
            let n: i64 = key
                .trim()
                .parse()
                .map_err(|_| invalid(source, &path, "key is not an integer index"))?;
            if n < lo || n > hi {
                return Err(invalid(
                    source,
                    &path,
                    format!("index {n} outside band [{lo}, {hi}]"),
                ));
            }
            terms.insert(n, mat_from_json(m, Some((d, d)), source, &path)?);
        }
        MatFun::from_coeffs(grid, d, &terms).map_err(|e| invalid(source, "band", e.to_string()))
    }

    /// Coefficients of `f` on `[lo, hi]`, dropping those below `floor`.
    pub fn from_matfun(f: &MatFun, lo: i64, hi: i64, floor: f64) -> Self {
        let coeffs = (lo..=hi)
            .filter_map(|n| {
                let m = f.coeff(n);
                (mattolab::linalg::frob(m) > floor).then(|| (n.to_string(), mat_to_json(m)))
            })
            .collect();
        Self {
            band: [lo, hi],
            coeffs,
        }
    }

    /// Analytic symbol on the full resolved band `[0, Q/2)`.
    pub fn analytic(f: &MatFun, floor: f64) -> Self {
        let hi = f.grid().q() as i64 / 2 - 1;
        let mut spec = Self::from_matfun(f, 0, hi, floor);
        let top = spec
            .coeffs
            .keys()
            .filter_map(|k| k.parse::<i64>().ok())
            .max()
            .unwrap_or(0);
        spec.band = [0, top];
        spec
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct SymbolPairJson {
    pub psi: SymbolSpec,
    pub xi: SymbolSpec,
}

impl SymbolPairJson {
    pub fn new(pair: &SymbolPair, floor: f64) -> Self {
        Self {
            psi: SymbolSpec::analytic(&pair.psi, floor),
            xi: SymbolSpec::analytic(&pair.xi, floor),
        }
    }
}

// --------------------------------------------------------- operator json

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct OperatorSpec {
    pub dim_in: usize,
    pub dim_out: usize,
    pub mat: JsonMat,
    /// Grid size of the bases the matrix is expressed in.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
}

impl OperatorSpec {
    pub fn from_operator(a: &OperatorMatrix) -> Self {
        Self {
            dim_in: a.domain().dim(),
            dim_out: a.codomain().dim(),
            mat: mat_to_json(a.mat()),
            grid: Some(a.domain().grid().q()),
            label: Some(a.label().to_string()),
        }
    }

    pub fn to_operator(
        &self,
        m1: &Arc<ModelSpace>,
        m2: &Arc<ModelSpace>,
        source: &str,
    ) -> Result<OperatorMatrix, ParseError> {
        if self.dim_in != m1.dim() || self.dim_out != m2.dim() {
            return Err(invalid(
                source,
                "dim_in",
                format!(
                    "operator is {}x{} but the spaces have dimensions {} -> {}",
                    self.dim_out,
                    self.dim_in,
                    m1.dim(),
                    m2.dim()
                ),
            ));
        }
        let mat = mat_from_json(&self.mat, Some((self.dim_out, self.dim_in)), source, "mat")?;
        let label = self.label.clone().unwrap_or_else(|| "A".into());
        Ok(OperatorMatrix::new(mat, m1.clone(), m2.clone(), label))
    }
}

// ------------------------------------------------------------ space json

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SpaceSummary {
    pub dim: usize,
    pub d: usize,
    pub grid: usize,
    pub gram_residual: f64,
    /// Per basis function, the Fourier coefficient vectors for `n = 0, 1, …`
    /// up to the last one above the floor.
    pub basis_fourier: Vec<Vec<Vec<JsonC>>>,
}

impl SpaceSummary {
    pub fn new(m: &ModelSpace, floor: f64) -> Self {
        let basis_fourier = m
            .basis()
            .iter()
            .map(|e| {
                let q = m.grid().q() as i64;
                let top = (0..q / 2)
                    .rev()
                    .find(|&n| e.coeff(n).norm() > floor)
                    .unwrap_or(0);
                (0..=top).map(|n| vec_to_json(&e.coeff(n))).collect()
            })
            .collect();
        Self {
            dim: m.dim(),
            d: m.d(),
            grid: m.grid().q(),
            gram_residual: m.gram_residual(),
            basis_fourier,
        }
    }
}

// ----------------------------------------------------------- report json

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CertificateJson {
    pub flavor: String,
    pub b1: JsonMat,
    pub b2: JsonMat,
    pub residual: f64,
    pub relative_residual: f64,
}

impl From<&CaraCertificate> for CertificateJson {
    fn from(c: &CaraCertificate) -> Self {
        Self {
            flavor: c.flavor.name().into(),
            b1: mat_to_json(&c.b1),
            b2: mat_to_json(&c.b2),
            residual: c.residual,
            relative_residual: c.relative_residual,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct WitnessJson {
    pub u: Vec<JsonC>,
    pub v: Vec<JsonC>,
    pub value: f64,
}

impl From<&Witness> for WitnessJson {
    fn from(w: &Witness) -> Self {
        Self {
            u: vec_to_json(&w.u),
            v: vec_to_json(&w.v),
            value: w.value,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MembershipJson {
    pub is_member: bool,
    pub flavor: String,
    /// Relative certificate residual.
    pub residual: f64,
    pub compression_residual: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub certificate: Option<CertificateJson>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub symbol: Option<SymbolPairJson>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub roundtrip_error: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<WitnessJson>,
    pub config: GlobalConfig,
}

impl MembershipJson {
    pub fn new(r: &MembershipReport, cfg: &GlobalConfig) -> Self {
        Self {
            is_member: r.is_member,
            flavor: r.flavor.name().into(),
            residual: r.lsq_residual,
            compression_residual: r.compression_residual,
            certificate: r.certificate.as_ref().map(Into::into),
            symbol: r
                .recovered_symbol
                .as_ref()
                .map(|p| SymbolPairJson::new(p, cfg.tol_id * 1e-6)),
            roundtrip_error: r.roundtrip_error,
            witness: r.witness.as_ref().map(Into::into),
            config: *cfg,
        }
    }
}

/// Pretty JSON with a trailing newline.
pub fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("report types serialize");
    s.push('\n');
    s
}

pub fn read_text(path: &Path) -> std::io::Result<String> {
    std::fs::read_to_string(path)
}
