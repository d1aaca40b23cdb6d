//! Nodal values on a mesh: [`Field`] on interior nodes, [`BoundaryData`] on
//! boundary nodes, and the named analytic functions used as boundary data.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{DomainMesh, Point};

/// One value per interior node.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Field {
    values: Vec<f64>,
}

impl Field {
    pub fn new(values: Vec<f64>) -> Self {
        Field { values }
    }

    pub fn zeros(n: usize) -> Self {
        Field { values: vec![0.0; n] }
    }

    pub fn constant(n: usize, c: f64) -> Self {
        Field { values: vec![c; n] }
    }

    /// `f` sampled at every interior node of `mesh`.
    pub fn sample(mesh: &DomainMesh, f: impl Fn(Point) -> f64) -> Self {
        Field { values: mesh.positions().iter().map(|&x| f(x)).collect() }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    /// `Err(LengthMismatch)` unless the field has one value per interior node.
    pub fn check_len(&self, n: usize) -> Result<()> {
        if self.values.len() == n {
            Ok(())
        } else {
            Err(Error::LengthMismatch { what: "field", expected: n, got: self.values.len() })
        }
    }

    /// `(Σ q_i |u_i|^p)^(1/p)` with the mesh quadrature weights.
    pub fn lp_norm(&self, weights: &[f64], p: f64) -> f64 {
        let s: f64 = self.values.iter().zip(weights).map(|(u, q)| q * u.abs().powf(p)).sum();
        s.powf(1.0 / p)
    }

    /// Weighted L² distance to `other`.
    pub fn l2_distance(&self, other: &Field, weights: &[f64]) -> f64 {
        self.values
            .iter()
            .zip(&other.values)
            .zip(weights)
            .map(|((a, b), q)| q * (a - b) * (a - b))
            .sum::<f64>()
            .sqrt()
    }
}

impl From<Vec<f64>> for Field {
    fn from(values: Vec<f64>) -> Self {
        Field { values }
    }
}

/// One value per boundary node: samples of the Dirichlet datum.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct BoundaryData {
    values: Vec<f64>,
}

impl BoundaryData {
    pub fn new(values: Vec<f64>) -> Self {
        BoundaryData { values }
    }

    pub fn zeros(mesh: &DomainMesh) -> Self {
        BoundaryData { values: vec![0.0; mesh.boundary_len()] }
    }

    pub fn sample(mesh: &DomainMesh, f: impl Fn(Point) -> f64) -> Self {
        BoundaryData { values: mesh.boundary_positions().iter().map(|&x| f(x)).collect() }
    }

    /// A named analytic datum (see [`NamedFunction`]) or `csv:<path>`.
    pub fn from_id(id: &str, mesh: &DomainMesh) -> Result<Self> {
        if let Some(path) = id.strip_prefix("csv:") {
            return Self::from_csv(Path::new(path), mesh);
        }
        let f = NamedFunction::from_id(id)?;
        Ok(Self::sample(mesh, |x| f.eval(x)))
    }

    /// One value per line (an optional non-numeric header is skipped), in
    /// boundary-node order.
    pub fn from_csv(path: &Path, mesh: &DomainMesh) -> Result<Self> {
        let mut reader = csv::ReaderBuilder::new()
            .has_headers(false)
            .trim(csv::Trim::All)
            .flexible(true)
            .from_path(path)
            .map_err(|source| Error::Csv { path: path.to_owned(), source })?;
        let mut values = Vec::new();
        for (row, record) in reader.records().enumerate() {
            let record = record.map_err(|source| Error::Csv { path: path.to_owned(), source })?;
            let cell = record.get(record.len().saturating_sub(1)).unwrap_or("");
            match cell.parse::<f64>() {
                Ok(v) => values.push(v),
                Err(_) if row == 0 => {}
                Err(_) => {
                    return Err(Error::InvalidArgument {
                        name: "boundary csv",
                        reason: format!("{}: row {} is not numeric", path.display(), row + 1),
                    })
                }
            }
        }
        let data = BoundaryData { values };
        data.check_len(mesh.boundary_len())?;
        Ok(data)
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn is_zero(&self) -> bool {
        self.values.iter().all(|&v| v == 0.0)
    }

    pub fn check_len(&self, n: usize) -> Result<()> {
        if self.values.len() == n {
            Ok(())
        } else {
            Err(Error::LengthMismatch { what: "boundary data", expected: n, got: self.values.len() })
        }
    }

    /// `(Σ_b w_b (self_b − other_b)²)^(1/2)` with the boundary weights.
    pub fn l2_distance(&self, other: &BoundaryData, weights: &[f64]) -> f64 {
        self.values
            .iter()
            .zip(&other.values)
            .zip(weights)
            .map(|((a, b), w)| w * (a - b) * (a - b))
            .sum::<f64>()
            .sqrt()
    }

    pub fn shifted(&self, c: f64) -> BoundaryData {
        BoundaryData { values: self.values.iter().map(|v| v + c).collect() }
    }
}

impl From<Vec<f64>> for BoundaryData {
    fn from(values: Vec<f64>) -> Self {
        BoundaryData { values }
    }
}

/// Analytic functions addressable by id.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NamedFunction {
    Zero,
    LinearX,
    HarmonicX2MinusY2,
    HarmonicXy,
}

impl NamedFunction {
    pub const CATALOG: &'static [NamedFunction] =
        &[NamedFunction::Zero, NamedFunction::LinearX, NamedFunction::HarmonicX2MinusY2, NamedFunction::HarmonicXy];

    pub fn id(self) -> &'static str {
        match self {
            NamedFunction::Zero => "zero",
            NamedFunction::LinearX => "linear_x",
            NamedFunction::HarmonicX2MinusY2 => "harmonic_x2_minus_y2",
            NamedFunction::HarmonicXy => "harmonic_xy",
        }
    }

    pub fn from_id(id: &str) -> Result<Self> {
        Self::CATALOG.iter().copied().find(|f| f.id() == id).ok_or_else(|| Error::UnknownId {
            what: "function",
            id: id.to_owned(),
            catalog: Self::CATALOG.iter().map(|f| f.id()).collect::<Vec<_>>().join(", "),
        })
    }

    pub fn eval(self, x: Point) -> f64 {
        match self {
            NamedFunction::Zero => 0.0,
            NamedFunction::LinearX => x[0],
            NamedFunction::HarmonicX2MinusY2 => x[0] * x[0] - x[1] * x[1],
            NamedFunction::HarmonicXy => x[0] * x[1],
        }
    }

    pub fn gradient(self, x: Point) -> Point {
        match self {
            NamedFunction::Zero => [0.0, 0.0],
            NamedFunction::LinearX => [1.0, 0.0],
            NamedFunction::HarmonicX2MinusY2 => [2.0 * x[0], -2.0 * x[1]],
            NamedFunction::HarmonicXy => [x[1], x[0]],
        }
    }

    /// Constant Hessian `[[f_xx, f_xy], [f_xy, f_yy]]`; every catalog entry is
    /// at most quadratic.
    pub fn hessian(self) -> [[f64; 2]; 2] {
        match self {
            NamedFunction::Zero | NamedFunction::LinearX => [[0.0; 2]; 2],
            NamedFunction::HarmonicX2MinusY2 => [[2.0, 0.0], [0.0, -2.0]],
            NamedFunction::HarmonicXy => [[0.0, 1.0], [1.0, 0.0]],
        }
    }
}
