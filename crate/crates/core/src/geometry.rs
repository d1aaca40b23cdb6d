//! Cell-centered meshes of intervals, rectangles and simple polygons.
//!
//! Interior nodes are the centers of grid cells whose center lies inside the
//! domain, weighted by the cell measure. Boundary nodes are segment midpoints
//! (in 2D) or the two endpoints (in 1D), weighted by surface measure.
//! Positions are stored as `[x, y]` in both dimensions; in 1D, `y = 0`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type Point = [f64; 2];

/// Domain descriptor, written in configs as `{"interval":[a,b]}`,
/// `{"rect":[[x0,y0],[x1,y1]]}` or `{"polygon":[[x,y],...]}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Shape {
    Interval([f64; 2]),
    Rect([Point; 2]),
    Polygon(Vec<Point>),
}

impl Shape {
    pub fn unit_interval() -> Self {
        Shape::Interval([0.0, 1.0])
    }

    pub fn unit_square() -> Self {
        Shape::Rect([[0.0, 0.0], [1.0, 1.0]])
    }

    pub fn dim(&self) -> usize {
        match self {
            Shape::Interval(_) => 1,
            _ => 2,
        }
    }

    /// Lebesgue measure of the domain.
    pub fn measure(&self) -> f64 {
        match self {
            Shape::Interval([a, b]) => b - a,
            Shape::Rect([p, q]) => (q[0] - p[0]) * (q[1] - p[1]),
            Shape::Polygon(v) => signed_area(v).abs(),
        }
    }

    /// Measure of the boundary: point count in 1D, perimeter in 2D.
    pub fn boundary_measure(&self) -> f64 {
        match self {
            Shape::Interval(_) => 2.0,
            Shape::Rect([p, q]) => 2.0 * ((q[0] - p[0]) + (q[1] - p[1])),
            Shape::Polygon(v) => (0..v.len()).map(|i| dist(v[i], v[(i + 1) % v.len()])).sum(),
        }
    }

    /// Shortest side (or length) of the shape, used to reject coarse cells.
    fn characteristic_size(&self) -> f64 {
        match self {
            Shape::Interval([a, b]) => b - a,
            Shape::Rect([p, q]) => (q[0] - p[0]).min(q[1] - p[1]),
            Shape::Polygon(v) => {
                let (lo, hi) = bbox(v);
                (hi[0] - lo[0]).min(hi[1] - lo[1])
            }
        }
    }

    fn validate(&self) -> Result<Shape> {
        match self {
            Shape::Interval([a, b]) => {
                if !(a.is_finite() && b.is_finite() && b > a) {
                    return Err(Error::DegenerateShape(format!("interval [{a}, {b}] has no length")));
                }
                Ok(self.clone())
            }
            Shape::Rect([p, q]) => {
                if !(p.iter().chain(q).all(|c| c.is_finite()) && q[0] > p[0] && q[1] > p[1]) {
                    return Err(Error::DegenerateShape(format!("rectangle {p:?}-{q:?} has no area")));
                }
                Ok(self.clone())
            }
            Shape::Polygon(v) => {
                if v.len() < 3 {
                    return Err(Error::DegenerateShape(format!("polygon needs at least 3 vertices, got {}", v.len())));
                }
                if v.iter().flatten().any(|c| !c.is_finite()) {
                    return Err(Error::DegenerateShape("polygon has non-finite vertices".into()));
                }
                let area = signed_area(v);
                if area.abs() <= 1e-14 * perimeter_sq(v) {
                    return Err(Error::DegenerateShape("polygon has zero area".into()));
                }
                if let Some((i, j)) = first_crossing(v) {
                    return Err(Error::DegenerateShape(format!("polygon edges {i} and {j} intersect")));
                }
                let mut v = v.clone();
                if area < 0.0 {
                    v.reverse();
                }
                Ok(Shape::Polygon(v))
            }
        }
    }
}

/// A discretized domain with interior and boundary quadrature.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct DomainMesh {
    shape: Shape,
    h: f64,
    positions: Vec<Point>,
    weights: Vec<f64>,
    boundary_positions: Vec<Point>,
    boundary_weights: Vec<f64>,
    /// Outward unit normals at boundary nodes.
    boundary_normals: Vec<Point>,
}

impl DomainMesh {
    pub fn shape(&self) -> &Shape {
        &self.shape
    }

    pub fn dim(&self) -> usize {
        self.shape.dim()
    }

    /// Requested cell size.
    pub fn h(&self) -> f64 {
        self.h
    }

    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }

    pub fn boundary_len(&self) -> usize {
        self.boundary_positions.len()
    }

    pub fn positions(&self) -> &[Point] {
        &self.positions
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn boundary_positions(&self) -> &[Point] {
        &self.boundary_positions
    }

    pub fn boundary_weights(&self) -> &[f64] {
        &self.boundary_weights
    }

    pub fn boundary_normals(&self) -> &[Point] {
        &self.boundary_normals
    }

    /// Copy with every interior weight multiplied by `c`.
    pub fn with_scaled_weights(&self, c: f64) -> DomainMesh {
        let mut m = self.clone();
        m.weights.iter_mut().for_each(|w| *w *= c);
        m
    }

    /// Mesh from explicit nodes, for small hand-built fixtures. No geometric
    /// checks are made beyond matching lengths.
    pub fn from_nodes(
        shape: Shape,
        h: f64,
        positions: Vec<Point>,
        weights: Vec<f64>,
        boundary_positions: Vec<Point>,
        boundary_weights: Vec<f64>,
    ) -> Result<DomainMesh> {
        if positions.len() != weights.len() {
            return Err(Error::LengthMismatch { what: "interior weights", expected: positions.len(), got: weights.len() });
        }
        if boundary_positions.len() != boundary_weights.len() {
            return Err(Error::LengthMismatch {
                what: "boundary weights",
                expected: boundary_positions.len(),
                got: boundary_weights.len(),
            });
        }
        let boundary_normals = vec![[0.0, 0.0]; boundary_positions.len()];
        Ok(DomainMesh { shape, h, positions, weights, boundary_positions, boundary_weights, boundary_normals })
    }

    /// Distance from `x` to the boundary. Errors if `x` is outside the domain.
    pub fn distance_to_boundary(&self, x: Point) -> Result<f64> {
        distance_to_boundary(&self.shape, x)
    }
}

/// Builds a cell-centered mesh with cell size at most `h`. Intervals and
/// rectangles use `L / ceil(L / h)` along each axis so the cells tile the
/// domain exactly.
pub fn build_mesh(shape: &Shape, h: f64) -> Result<DomainMesh> {
    if !(h > 0.0 && h.is_finite()) {
        return Err(Error::InvalidArgument { name: "h", reason: format!("cell size must be positive, got {h}") });
    }
    let shape = shape.validate()?;
    let size = shape.characteristic_size();
    if h > size {
        return Err(Error::InvalidArgument {
            name: "h",
            reason: format!("cell size {h} exceeds the shape's characteristic size {size}"),
        });
    }
    let mesh = match &shape {
        Shape::Interval([a, b]) => {
            let n = cells(b - a, h);
            let dx = (b - a) / n as f64;
            DomainMesh {
                positions: (0..n).map(|i| [a + (i as f64 + 0.5) * dx, 0.0]).collect(),
                weights: vec![dx; n],
                boundary_positions: vec![[*a, 0.0], [*b, 0.0]],
                boundary_weights: vec![1.0, 1.0],
                boundary_normals: vec![[-1.0, 0.0], [1.0, 0.0]],
                shape: shape.clone(),
                h,
            }
        }
        Shape::Rect([p, q]) => {
            let (nx, ny) = (cells(q[0] - p[0], h), cells(q[1] - p[1], h));
            let (dx, dy) = ((q[0] - p[0]) / nx as f64, (q[1] - p[1]) / ny as f64);
            let mut positions = Vec::with_capacity(nx * ny);
            for i in 0..nx {
                for j in 0..ny {
                    positions.push([p[0] + (i as f64 + 0.5) * dx, p[1] + (j as f64 + 0.5) * dy]);
                }
            }
            let corners = vec![*p, [q[0], p[1]], *q, [p[0], q[1]]];
            let (bp, bw, bn) = boundary_segments(&corners, h);
            DomainMesh {
                weights: vec![dx * dy; positions.len()],
                positions,
                boundary_positions: bp,
                boundary_weights: bw,
                boundary_normals: bn,
                shape: shape.clone(),
                h,
            }
        }
        Shape::Polygon(v) => {
            let (lo, hi) = bbox(v);
            let nx = ((hi[0] - lo[0]) / h).ceil() as usize;
            let ny = ((hi[1] - lo[1]) / h).ceil() as usize;
            let mut positions = Vec::new();
            for i in 0..nx {
                for j in 0..ny {
                    let c = [lo[0] + (i as f64 + 0.5) * h, lo[1] + (j as f64 + 0.5) * h];
                    if point_in_polygon(v, c) {
                        positions.push(c);
                    }
                }
            }
            if positions.is_empty() {
                return Err(Error::DegenerateShape(format!("no cell center of size {h} falls inside the polygon")));
            }
            let (bp, bw, bn) = boundary_segments(v, h);
            DomainMesh {
                weights: vec![h * h; positions.len()],
                positions,
                boundary_positions: bp,
                boundary_weights: bw,
                boundary_normals: bn,
                shape: shape.clone(),
                h,
            }
        }
    };
    Ok(mesh)
}

fn cells(len: f64, h: f64) -> usize {
    // Guard against ceil(1/0.25) landing on 5 through roundoff.
    let ratio = len / h;
    let rounded = ratio.round();
    if (ratio - rounded).abs() <= 1e-9 * rounded.max(1.0) {
        rounded.max(1.0) as usize
    } else {
        ratio.ceil() as usize
    }
}

/// Midpoint quadrature on each edge of a counter-clockwise polygon, with
/// every edge split into `ceil(len / h)` equal segments.
fn boundary_segments(v: &[Point], h: f64) -> (Vec<Point>, Vec<f64>, Vec<Point>) {
    let mut pos = Vec::new();
    let mut wts = Vec::new();
    let mut nrm = Vec::new();
    for i in 0..v.len() {
        let (a, b) = (v[i], v[(i + 1) % v.len()]);
        let len = dist(a, b);
        let n = cells(len, h);
        let t = [(b[0] - a[0]) / len, (b[1] - a[1]) / len];
        for k in 0..n {
            let s = (k as f64 + 0.5) / n as f64;
            pos.push([a[0] + s * (b[0] - a[0]), a[1] + s * (b[1] - a[1])]);
            wts.push(len / n as f64);
            nrm.push([t[1], -t[0]]);
        }
    }
    (pos, wts, nrm)
}

/// Exact distance to the boundary for intervals and rectangles, minimum over
/// edges for polygons.
pub fn distance_to_boundary(shape: &Shape, x: Point) -> Result<f64> {
    let outside = || Error::OutsideDomain { x: x[0], y: x[1] };
    match shape {
        Shape::Interval([a, b]) => {
            if x[0] < *a || x[0] > *b {
                return Err(outside());
            }
            Ok((x[0] - a).min(b - x[0]))
        }
        Shape::Rect([p, q]) => {
            if x[0] < p[0] || x[0] > q[0] || x[1] < p[1] || x[1] > q[1] {
                return Err(outside());
            }
            Ok((x[0] - p[0]).min(q[0] - x[0]).min(x[1] - p[1]).min(q[1] - x[1]))
        }
        Shape::Polygon(v) => {
            let d = (0..v.len()).map(|i| segment_distance(x, v[i], v[(i + 1) % v.len()])).fold(f64::INFINITY, f64::min);
            let scale = perimeter_sq(v).sqrt();
            if d > 1e-12 * scale && !point_in_polygon(v, x) {
                return Err(outside());
            }
            Ok(d)
        }
    }
}

/// Interior neighbor lists within a radius, plus the interior nodes near each
/// boundary node. Pairs at distance exactly `radius` are included; a node is
/// never its own neighbor.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NeighborTable {
    radius: f64,
    offsets: Vec<usize>,
    indices: Vec<usize>,
    boundary_offsets: Vec<usize>,
    boundary_indices: Vec<usize>,
}

impl NeighborTable {
    pub fn radius(&self) -> f64 {
        self.radius
    }

    /// Sorted interior neighbors of interior node `i`.
    pub fn neighbors(&self, i: usize) -> &[usize] {
        &self.indices[self.offsets[i]..self.offsets[i + 1]]
    }

    /// Sorted interior nodes within the radius of boundary node `b`.
    pub fn boundary_neighbors(&self, b: usize) -> &[usize] {
        &self.boundary_indices[self.boundary_offsets[b]..self.boundary_offsets[b + 1]]
    }

    pub fn len(&self) -> usize {
        self.offsets.len() - 1
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Total number of ordered interior pairs.
    pub fn pair_count(&self) -> usize {
        self.indices.len()
    }
}

/// Bucket-grid search for all interior pairs within `radius`, and for the
/// interior nodes within `radius` of each boundary node.
pub fn neighbor_pairs(mesh: &DomainMesh, radius: f64) -> NeighborTable {
    let n = mesh.len();
    let nb = mesh.boundary_len();
    if !(radius > 0.0) {
        return NeighborTable {
            radius: radius.max(0.0),
            offsets: vec![0; n + 1],
            indices: Vec::new(),
            boundary_offsets: vec![0; nb + 1],
            boundary_indices: Vec::new(),
        };
    }
    let grid = BucketGrid::new(mesh.positions(), radius);
    let r2 = radius * radius;
    let mut offsets = Vec::with_capacity(n + 1);
    let mut indices = Vec::new();
    offsets.push(0);
    let mut scratch = Vec::new();
    for (i, &x) in mesh.positions().iter().enumerate() {
        grid.query(x, r2, mesh.positions(), &mut scratch);
        scratch.retain(|&j| j != i);
        scratch.sort_unstable();
        indices.extend_from_slice(&scratch);
        offsets.push(indices.len());
    }
    let mut boundary_offsets = Vec::with_capacity(nb + 1);
    let mut boundary_indices = Vec::new();
    boundary_offsets.push(0);
    for &x in mesh.boundary_positions() {
        grid.query(x, r2, mesh.positions(), &mut scratch);
        scratch.sort_unstable();
        boundary_indices.extend_from_slice(&scratch);
        boundary_offsets.push(boundary_indices.len());
    }
    NeighborTable { radius, offsets, indices, boundary_offsets, boundary_indices }
}

struct BucketGrid {
    origin: Point,
    cell: f64,
    dims: [usize; 2],
    starts: Vec<usize>,
    items: Vec<usize>,
}

impl BucketGrid {
    fn new(points: &[Point], cell: f64) -> Self {
        let mut lo = [f64::INFINITY; 2];
        let mut hi = [f64::NEG_INFINITY; 2];
        for p in points {
            for k in 0..2 {
                lo[k] = lo[k].min(p[k]);
                hi[k] = hi[k].max(p[k]);
            }
        }
        if points.is_empty() {
            lo = [0.0; 2];
            hi = [0.0; 2];
        }
        let dims = [0, 1].map(|k| (((hi[k] - lo[k]) / cell).floor() as usize + 1).min(1 << 20));
        let mut counts = vec![0usize; dims[0] * dims[1] + 1];
        let key = |p: &Point| -> usize {
            let ix = (((p[0] - lo[0]) / cell).floor() as usize).min(dims[0] - 1);
            let iy = (((p[1] - lo[1]) / cell).floor() as usize).min(dims[1] - 1);
            ix * dims[1] + iy
        };
        for p in points {
            counts[key(p) + 1] += 1;
        }
        for k in 1..counts.len() {
            counts[k] += counts[k - 1];
        }
        let mut fill = counts.clone();
        let mut items = vec![0; points.len()];
        for (i, p) in points.iter().enumerate() {
            let k = key(p);
            items[fill[k]] = i;
            fill[k] += 1;
        }
        BucketGrid { origin: lo, cell, dims, starts: counts, items }
    }

    fn query(&self, x: Point, r2: f64, points: &[Point], out: &mut Vec<usize>) {
        out.clear();
        let range = |k: usize| -> (usize, usize) {
            let c = (x[k] - self.origin[k]) / self.cell;
            let lo = (c - 1.0).floor().max(0.0) as usize;
            let hi = ((c + 1.0).floor().max(-1.0) + 1.0).min(self.dims[k] as f64) as usize;
            (lo, hi)
        };
        let (x0, x1) = range(0);
        let (y0, y1) = range(1);
        for ix in x0..x1 {
            for iy in y0..y1 {
                let b = ix * self.dims[1] + iy;
                for &j in &self.items[self.starts[b]..self.starts[b + 1]] {
                    let p = points[j];
                    let d2 = (p[0] - x[0]).powi(2) + (p[1] - x[1]).powi(2);
                    if d2 <= r2 {
                        out.push(j);
                    }
                }
            }
        }
    }
}

#[inline]
pub(crate) fn dist(a: Point, b: Point) -> f64 {
    ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2)).sqrt()
}

#[inline]
pub(crate) fn dist_sq(a: Point, b: Point) -> f64 {
    (a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2)
}

fn signed_area(v: &[Point]) -> f64 {
    0.5 * (0..v.len())
        .map(|i| {
            let (a, b) = (v[i], v[(i + 1) % v.len()]);
            a[0] * b[1] - b[0] * a[1]
        })
        .sum::<f64>()
}

fn perimeter_sq(v: &[Point]) -> f64 {
    let p: f64 = (0..v.len()).map(|i| dist(v[i], v[(i + 1) % v.len()])).sum();
    p * p
}

fn bbox(v: &[Point]) -> (Point, Point) {
    let mut lo = [f64::INFINITY; 2];
    let mut hi = [f64::NEG_INFINITY; 2];
    for p in v {
        for k in 0..2 {
            lo[k] = lo[k].min(p[k]);
            hi[k] = hi[k].max(p[k]);
        }
    }
    (lo, hi)
}

fn point_in_polygon(v: &[Point], x: Point) -> bool {
    let mut inside = false;
    let mut j = v.len() - 1;
    for i in 0..v.len() {
        let (a, b) = (v[i], v[j]);
        if (a[1] > x[1]) != (b[1] > x[1]) {
            let t = (x[1] - a[1]) / (b[1] - a[1]);
            if x[0] < a[0] + t * (b[0] - a[0]) {
                inside = !inside;
            }
        }
        j = i;
    }
    inside
}

fn segment_distance(x: Point, a: Point, b: Point) -> f64 {
    let ab = [b[0] - a[0], b[1] - a[1]];
    let len2 = ab[0] * ab[0] + ab[1] * ab[1];
    let t = if len2 > 0.0 { (((x[0] - a[0]) * ab[0] + (x[1] - a[1]) * ab[1]) / len2).clamp(0.0, 1.0) } else { 0.0 };
    dist(x, [a[0] + t * ab[0], a[1] + t * ab[1]])
}

fn cross(o: Point, a: Point, b: Point) -> f64 {
    (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])
}

fn on_segment(a: Point, b: Point, x: Point) -> bool {
    x[0] >= a[0].min(b[0]) && x[0] <= a[0].max(b[0]) && x[1] >= a[1].min(b[1]) && x[1] <= a[1].max(b[1])
}

fn segments_intersect(p1: Point, p2: Point, q1: Point, q2: Point) -> bool {
    let d1 = cross(q1, q2, p1);
    let d2 = cross(q1, q2, p2);
    let d3 = cross(p1, p2, q1);
    let d4 = cross(p1, p2, q2);
    if ((d1 > 0.0 && d2 < 0.0) || (d1 < 0.0 && d2 > 0.0)) && ((d3 > 0.0 && d4 < 0.0) || (d3 < 0.0 && d4 > 0.0)) {
        return true;
    }
    (d1 == 0.0 && on_segment(q1, q2, p1))
        || (d2 == 0.0 && on_segment(q1, q2, p2))
        || (d3 == 0.0 && on_segment(p1, p2, q1))
        || (d4 == 0.0 && on_segment(p1, p2, q2))
}

/// First pair of edges that touch other than at a shared vertex.
fn first_crossing(v: &[Point]) -> Option<(usize, usize)> {
    let n = v.len();
    for i in 0..n {
        for j in i + 1..n {
            let adjacent = j == i + 1 || (i == 0 && j == n - 1);
            if adjacent {
                // Adjacent edges may only share their common vertex; a
                // collinear fold-back also counts as a crossing.
                let (a, b, c) = if j == i + 1 { (v[i], v[j], v[(j + 1) % n]) } else { (v[n - 1], v[0], v[1]) };
                if cross(a, b, c) == 0.0 && (c[0] - b[0]) * (a[0] - b[0]) + (c[1] - b[1]) * (a[1] - b[1]) > 0.0 {
                    return Some((i, j));
                }
                continue;
            }
            if segments_intersect(v[i], v[(i + 1) % n], v[j], v[(j + 1) % n]) {
                return Some((i, j));
            }
        }
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn pentagon() -> Shape {
        let v = (0..5)
            .map(|k| {
                let t = 2.0 * std::f64::consts::PI * k as f64 / 5.0 + 0.3;
                [0.5 + 0.4 * t.cos(), 0.5 + 0.4 * t.sin()]
            })
            .collect();
        Shape::Polygon(v)
    }

    #[test]
    fn interval_quarter_cells() {
        let m = build_mesh(&Shape::unit_interval(), 0.25).unwrap();
        let xs: Vec<f64> = m.positions().iter().map(|p| p[0]).collect();
        assert_eq!(xs, vec![0.125, 0.375, 0.625, 0.875]);
        assert_eq!(m.boundary_positions(), &[[0.0, 0.0], [1.0, 0.0]]);
        assert_eq!(m.boundary_weights(), &[1.0, 1.0]);
    }

    #[test]
    fn unit_square_half_cells() {
        let m = build_mesh(&Shape::unit_square(), 0.5).unwrap();
        assert_eq!(m.len(), 4);
        let total: f64 = m.boundary_weights().iter().sum();
        assert!((total - 4.0).abs() < 1e-15);
    }

    #[test]
    fn unit_square_fine_area() {
        let m = build_mesh(&Shape::unit_square(), 0.01).unwrap();
        let area: f64 = m.weights().iter().sum();
        assert!((area - 1.0).abs() < 1e-5);
    }

    #[test]
    fn weight_sums_match_measures() {
        for (shape, h) in [
            (Shape::Interval([-0.3, 1.1]), 0.03),
            (Shape::Rect([[0.0, 0.0], [2.0, 0.7]]), 0.05),
            (Shape::Rect([[0.0, 0.0], [1.0, 1.0]]), 0.3),
        ] {
            let m = build_mesh(&shape, h).unwrap();
            let area: f64 = m.weights().iter().sum();
            let perim: f64 = m.boundary_weights().iter().sum();
            assert!((area - shape.measure()).abs() <= 1e-3 * h * shape.measure());
            assert!((perim - shape.boundary_measure()).abs() <= 1e-3 * h * shape.boundary_measure());
        }
    }

    #[test]
    fn polygon_area_error_shrinks() {
        let shape = pentagon();
        let errs: Vec<f64> = [0.04, 0.02, 0.01, 0.005]
            .iter()
            .map(|&h| {
                let m = build_mesh(&shape, h).unwrap();
                (m.weights().iter().sum::<f64>() - shape.measure()).abs()
            })
            .collect();
        assert!(errs[3] < errs[0], "{errs:?}");
        assert!(errs.iter().zip([0.04, 0.02, 0.01, 0.005]).all(|(e, h)| *e < 2.0 * h), "{errs:?}");
        let m = build_mesh(&shape, 0.01).unwrap();
        let perim: f64 = m.boundary_weights().iter().sum();
        assert!((perim - shape.boundary_measure()).abs() < 1e-12);
        for &b in m.boundary_positions() {
            assert!(distance_to_boundary(&shape, b).unwrap() < 1e-12);
        }
    }

    #[test]
    fn clockwise_polygon_is_reoriented() {
        let cw = Shape::Polygon(vec![[0.0, 0.0], [0.0, 1.0], [1.0, 1.0], [1.0, 0.0]]);
        let m = build_mesh(&cw, 0.25).unwrap();
        // outward normal of the first edge (left side, going down after reorientation)
        for (p, n) in m.boundary_positions().iter().zip(m.boundary_normals()) {
            let probe = [p[0] + 1e-3 * n[0], p[1] + 1e-3 * n[1]];
            assert!(distance_to_boundary(m.shape(), probe).is_err());
        }
    }

    #[test]
    fn degenerate_shapes_rejected() {
        assert!(matches!(build_mesh(&Shape::Interval([1.0, 1.0]), 0.1), Err(Error::DegenerateShape(_))));
        assert!(matches!(build_mesh(&Shape::Rect([[0.0, 0.0], [1.0, 0.0]]), 0.1), Err(Error::DegenerateShape(_))));
        let bowtie = Shape::Polygon(vec![[0.0, 0.0], [1.0, 1.0], [1.0, 0.0], [0.0, 1.0]]);
        assert!(matches!(build_mesh(&bowtie, 0.1), Err(Error::DegenerateShape(_))));
        let flat = Shape::Polygon(vec![[0.0, 0.0], [1.0, 0.0], [2.0, 0.0]]);
        assert!(matches!(build_mesh(&flat, 0.1), Err(Error::DegenerateShape(_))));
        assert!(build_mesh(&Shape::unit_interval(), 2.0).is_err());
        assert!(build_mesh(&Shape::unit_interval(), 0.0).is_err());
    }

    #[test]
    fn neighbor_examples() {
        let m = build_mesh(&Shape::unit_interval(), 0.25).unwrap();
        let t = neighbor_pairs(&m, 0.3);
        assert_eq!(t.neighbors(0), &[1]);
        assert_eq!(t.neighbors(1), &[0, 2]);
        let empty = neighbor_pairs(&m, 0.0);
        assert!((0..m.len()).all(|i| empty.neighbors(i).is_empty()));
        assert_eq!(empty.pair_count(), 0);
    }

    #[test]
    fn distance_examples() {
        assert_eq!(distance_to_boundary(&Shape::unit_square(), [0.5, 0.5]).unwrap(), 0.5);
        assert_eq!(distance_to_boundary(&Shape::unit_interval(), [0.2, 0.0]).unwrap(), 0.2);
        assert!(distance_to_boundary(&Shape::unit_interval(), [1.2, 0.0]).is_err());
        assert!(distance_to_boundary(&Shape::unit_square(), [0.5, -0.1]).is_err());
    }

    #[test]
    fn pentagon_distance_matches_dense_sampling() {
        let shape = pentagon();
        let Shape::Polygon(v) = shape.validate().unwrap() else { unreachable!() };
        let samples: Vec<Point> = (0..v.len())
            .flat_map(|i| {
                let (a, b) = (v[i], v[(i + 1) % v.len()]);
                (0..=200_000).map(move |k| {
                    let t = k as f64 / 200_000.0;
                    [a[0] + t * (b[0] - a[0]), a[1] + t * (b[1] - a[1])]
                })
            })
            .collect();
        for x in [[0.5, 0.5], [0.3, 0.6], [0.7, 0.35]] {
            let exact = distance_to_boundary(&shape, x).unwrap();
            let brute = samples.iter().map(|&s| dist(s, x)).fold(f64::INFINITY, f64::min);
            assert!((exact - brute).abs() < 1e-6, "{exact} vs {brute}");
        }
        assert!(distance_to_boundary(&shape, [0.0, 0.0]).is_err());
    }

    fn brute_neighbors(pts: &[Point], r: f64) -> Vec<Vec<usize>> {
        (0..pts.len())
            .map(|i| (0..pts.len()).filter(|&j| j != i && dist_sq(pts[i], pts[j]) <= r * r).collect())
            .collect()
    }

    #[test]
    fn random_cloud_matches_brute_force() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        let pts: Vec<Point> = (0..50).map(|_| [rng.random::<f64>(), rng.random::<f64>()]).collect();
        let mesh = DomainMesh::from_nodes(Shape::unit_square(), 0.1, pts.clone(), vec![0.02; 50], vec![[0.0, 0.5]], vec![1.0])
            .unwrap();
        let t = neighbor_pairs(&mesh, 0.2);
        let brute = brute_neighbors(&pts, 0.2);
        for i in 0..50 {
            assert_eq!(t.neighbors(i), brute[i].as_slice());
        }
        let bn: Vec<usize> = (0..50).filter(|&j| dist_sq(pts[j], [0.0, 0.5]) <= 0.04).collect();
        assert_eq!(t.boundary_neighbors(0), bn.as_slice());
    }

    proptest! {
        #[test]
        fn neighbor_table_symmetric_and_complete(h in 0.04f64..0.2, r in 0.0f64..0.5) {
            let m = build_mesh(&Shape::Rect([[0.0, 0.0], [1.0, 0.8]]), h).unwrap();
            prop_assume!(m.len() <= 500);
            let t = neighbor_pairs(&m, r);
            let brute = brute_neighbors(m.positions(), r);
            for i in 0..m.len() {
                prop_assert_eq!(t.neighbors(i), brute[i].as_slice());
                for &j in t.neighbors(i) {
                    prop_assert!(t.neighbors(j).binary_search(&i).is_ok());
                }
            }
        }

        #[test]
        fn interior_nodes_inside(h in 0.02f64..0.2) {
            for shape in [Shape::unit_square(), pentagon()] {
                let m = build_mesh(&shape, h).unwrap();
                for &x in m.positions() {
                    prop_assert!(distance_to_boundary(&shape, x).is_ok());
                }
            }
        }
    }
}
