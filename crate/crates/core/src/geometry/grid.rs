use std::sync::Arc;

use super::shape::{Point, Shape};
use super::GeometryError;

/// Classification of a lattice node.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum NodeKind {
    Interior,
    /// Outside the open shape but 4-adjacent to an interior node; carries Dirichlet data.
    Boundary,
    Exterior,
}

/// A shape rasterized on the lattice `h * Z^2`.
///
/// Node `(i, j)` of the local array sits at `((i0 + i) h, (j0 + j) h)`; node ids are
/// row-major, `id = j * nx + i`. A node is interior when it lies strictly inside the
/// shape, boundary when it is not interior but has an interior axis neighbour.
#[derive(Clone, Debug)]
pub struct GridDomain {
    shape: Shape,
    h: f64,
    nx: usize,
    ny: usize,
    i0: i64,
    j0: i64,
    kinds: Vec<NodeKind>,
    interior: Vec<usize>,
    cells: Vec<[usize; 3]>,
}

impl GridDomain {
    /// Rasterizes `shape` with spacing `h`.
    pub fn new(shape: Shape, h: f64) -> Result<Arc<Self>, GeometryError> {
        if !(h.is_finite() && h > 0.0) {
            return Err(GeometryError::BadSpacing(h));
        }
        shape.check().map_err(GeometryError::BadShape)?;
        let b = shape.bbox();
        // one ring of margin so every interior node has all 8 neighbours in the array
        let i0 = (b[0] / h).floor() as i64 - 1;
        let j0 = (b[1] / h).floor() as i64 - 1;
        let i1 = (b[2] / h).ceil() as i64 + 1;
        let j1 = (b[3] / h).ceil() as i64 + 1;
        let nx = (i1 - i0 + 1) as usize;
        let ny = (j1 - j0 + 1) as usize;
        if nx.saturating_mul(ny) > 50_000_000 {
            return Err(GeometryError::BadSpacing(h));
        }

        let inside_tol = 1e-9 * h;
        let mut kinds = vec![NodeKind::Exterior; nx * ny];
        let mut interior = Vec::new();
        for j in 0..ny {
            for i in 0..nx {
                let x = [(i0 + i as i64) as f64 * h, (j0 + j as i64) as f64 * h];
                if shape.contains(x) && shape.boundary_distance(x) > inside_tol {
                    let id = j * nx + i;
                    kinds[id] = NodeKind::Interior;
                    interior.push(id);
                }
            }
        }
        if interior.is_empty() {
            return Err(GeometryError::EmptyInterior);
        }
        for &id in &interior {
            let (i, j) = (id % nx, id / nx);
            for nb in [id - 1, id + 1, id - nx, id + nx] {
                debug_assert!(i > 0 && j > 0 && i + 1 < nx && j + 1 < ny);
                if kinds[nb] == NodeKind::Exterior {
                    kinds[nb] = NodeKind::Boundary;
                }
            }
        }

        let mut cells = Vec::new();
        for j in 0..ny - 1 {
            for i in 0..nx - 1 {
                let a = j * nx + i;
                let tri = [a, a + 1, a + nx];
                if tri.iter().any(|&n| kinds[n] == NodeKind::Interior) {
                    cells.push(tri);
                }
            }
        }

        Ok(Arc::new(GridDomain { shape, h, nx, ny, i0, j0, kinds, interior, cells }))
    }

    pub fn shape(&self) -> &Shape {
        &self.shape
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    /// Array dimensions `(nx, ny)`.
    pub fn dims(&self) -> (usize, usize) {
        (self.nx, self.ny)
    }

    pub fn node_count(&self) -> usize {
        self.nx * self.ny
    }

    /// Bounding rectangle of the node array `[xmin, ymin, xmax, ymax]`.
    pub fn bbox(&self) -> [f64; 4] {
        let lo = self.coords(0);
        let hi = self.coords(self.node_count() - 1);
        [lo[0], lo[1], hi[0], hi[1]]
    }

    pub fn kind(&self, id: usize) -> NodeKind {
        self.kinds[id]
    }

    pub fn is_interior(&self, id: usize) -> bool {
        self.kinds[id] == NodeKind::Interior
    }

    /// Interior node ids in increasing order.
    pub fn interior(&self) -> &[usize] {
        &self.interior
    }

    /// Interior and boundary node ids in increasing order.
    pub fn closure(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.node_count()).filter(move |&id| self.kinds[id] != NodeKind::Exterior)
    }

    /// Lattice cells `[base, base + x, base + y]` touching at least one interior node.
    pub fn cells(&self) -> &[[usize; 3]] {
        &self.cells
    }

    /// Measure of the discrete domain, `h^2` times the interior node count.
    pub fn measure(&self) -> f64 {
        self.h * self.h * self.interior.len() as f64
    }

    pub fn coords(&self, id: usize) -> Point {
        let (i, j) = (id % self.nx, id / self.nx);
        [
            (self.i0 + i as i64) as f64 * self.h,
            (self.j0 + j as i64) as f64 * self.h,
        ]
    }

    /// Local array index `(i, j)` of a node id.
    pub fn index(&self, id: usize) -> (usize, usize) {
        (id % self.nx, id / self.nx)
    }

    pub fn id(&self, i: usize, j: usize) -> usize {
        j * self.nx + i
    }

    /// The node id offset by `(di, dj)`, if it stays inside the array.
    pub fn offset(&self, id: usize, di: i64, dj: i64) -> Option<usize> {
        let (i, j) = self.index(id);
        let (ni, nj) = (i as i64 + di, j as i64 + dj);
        if ni < 0 || nj < 0 || ni >= self.nx as i64 || nj >= self.ny as i64 {
            None
        } else {
            Some(nj as usize * self.nx + ni as usize)
        }
    }

    /// Node closest to `x` (may be of any kind).
    pub fn nearest_node(&self, x: Point) -> usize {
        let i = ((x[0] / self.h).round() as i64 - self.i0).clamp(0, self.nx as i64 - 1);
        let j = ((x[1] / self.h).round() as i64 - self.j0).clamp(0, self.ny as i64 - 1);
        self.id(i as usize, j as usize)
    }
}
