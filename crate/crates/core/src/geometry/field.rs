use std::io::{self, Write};
use std::sync::Arc;

use super::grid::{GridDomain, NodeKind};
use super::shape::Point;

/// A real value per lattice node.
///
/// Values live on interior and boundary nodes; exterior entries are kept at the
/// boundary value and never read by the solvers.
#[derive(Clone, Debug)]
pub struct ScalarField {
    domain: Arc<GridDomain>,
    values: Vec<f64>,
}

impl ScalarField {
    pub fn zeros(domain: &Arc<GridDomain>) -> Self {
        ScalarField { domain: Arc::clone(domain), values: vec![0.0; domain.node_count()] }
    }

    /// Evaluates `f` at interior nodes and sets every other node to zero.
    pub fn dirichlet_from_fn(domain: &Arc<GridDomain>, mut f: impl FnMut(Point) -> f64) -> Self {
        let mut field = Self::zeros(domain);
        for &id in domain.interior() {
            field.values[id] = f(domain.coords(id));
        }
        field
    }

    /// Evaluates `f` at interior and boundary nodes.
    pub fn from_fn(domain: &Arc<GridDomain>, mut f: impl FnMut(Point) -> f64) -> Self {
        let mut field = Self::zeros(domain);
        for id in domain.closure() {
            field.values[id] = f(domain.coords(id));
        }
        field
    }

    /// Wraps raw values; `values.len()` must equal the node count.
    pub fn from_values(domain: &Arc<GridDomain>, values: Vec<f64>) -> Self {
        assert_eq!(values.len(), domain.node_count(), "field length does not match the grid");
        ScalarField { domain: Arc::clone(domain), values }
    }

    pub fn domain(&self) -> &Arc<GridDomain> {
        &self.domain
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

    pub fn get(&self, id: usize) -> f64 {
        self.values[id]
    }

    pub fn set(&mut self, id: usize, v: f64) {
        self.values[id] = v;
    }

    /// Multiplies every value by `c`.
    pub fn scaled(&self, c: f64) -> ScalarField {
        ScalarField {
            domain: Arc::clone(&self.domain),
            values: self.values.iter().map(|v| v * c).collect(),
        }
    }

    /// Largest `|value|` over interior nodes.
    pub fn sup_norm(&self) -> f64 {
        self.domain.interior().iter().map(|&id| self.values[id].abs()).fold(0.0, f64::max)
    }

    /// `max |self - other|` over interior and boundary nodes.
    pub fn sup_distance(&self, other: &ScalarField) -> f64 {
        self.domain
            .closure()
            .map(|id| (self.values[id] - other.values[id]).abs())
            .fold(0.0, f64::max)
    }

    /// Whether every boundary node carries exactly zero.
    pub fn is_dirichlet_zero(&self) -> bool {
        self.domain
            .closure()
            .filter(|&id| self.domain.kind(id) == NodeKind::Boundary)
            .all(|id| self.values[id] == 0.0)
    }

    pub fn all_finite(&self) -> bool {
        self.domain.closure().all(|id| self.values[id].is_finite())
    }

    /// Writes `x,y,value` rows for interior and boundary nodes with 17 significant digits.
    pub fn write_csv<W: Write>(&self, mut out: W) -> io::Result<()> {
        writeln!(out, "x,y,value")?;
        for id in self.domain.closure() {
            let [x, y] = self.domain.coords(id);
            writeln!(out, "{},{},{}", fmt17(x), fmt17(y), fmt17(self.values[id]))?;
        }
        Ok(())
    }
}

/// Formats with 17 significant digits, enough to round-trip any f64.
pub fn fmt17(v: f64) -> String {
    format!("{v:.16e}")
}

/// A set of interior nodes selected by a threshold.
#[derive(Clone, Debug)]
pub struct PointSet {
    domain: Arc<GridDomain>,
    nodes: Vec<usize>,
    tol: f64,
}

impl PointSet {
    /// Builds a set from node ids, dropping non-interior ones.
    pub fn new(domain: &Arc<GridDomain>, mut nodes: Vec<usize>, tol: f64) -> Self {
        nodes.retain(|&id| domain.is_interior(id));
        nodes.sort_unstable();
        nodes.dedup();
        PointSet { domain: Arc::clone(domain), nodes, tol }
    }

    pub fn empty(domain: &Arc<GridDomain>) -> Self {
        PointSet { domain: Arc::clone(domain), nodes: Vec::new(), tol: 0.0 }
    }

    pub fn domain(&self) -> &Arc<GridDomain> {
        &self.domain
    }

    pub fn nodes(&self) -> &[usize] {
        &self.nodes
    }

    pub fn tol(&self) -> f64 {
        self.tol
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn contains(&self, id: usize) -> bool {
        self.nodes.binary_search(&id).is_ok()
    }

    pub fn is_subset_of(&self, other: &PointSet) -> bool {
        self.nodes.iter().all(|&id| other.contains(id))
    }

    pub fn union(&self, other: &PointSet) -> PointSet {
        let mut nodes = self.nodes.clone();
        nodes.extend_from_slice(&other.nodes);
        PointSet::new(&self.domain, nodes, self.tol.max(other.tol))
    }

    /// Largest distance from a member to the point `x`.
    pub fn max_distance_to(&self, x: Point) -> f64 {
        self.nodes
            .iter()
            .map(|&id| {
                let c = self.domain.coords(id);
                (c[0] - x[0]).hypot(c[1] - x[1])
            })
            .fold(0.0, f64::max)
    }

    /// Indicator field (1 on members) for CSV export.
    pub fn indicator(&self) -> ScalarField {
        let mut f = ScalarField::zeros(&self.domain);
        for &id in &self.nodes {
            f.set(id, 1.0);
        }
        f
    }
}

/// Pairwise (cascade) summation; fixed reduction order for reproducible sums.
pub fn pairwise_sum(xs: &[f64]) -> f64 {
    const BLOCK: usize = 64;
    if xs.len() <= BLOCK {
        xs.iter().sum()
    } else {
        let mid = xs.len() / 2;
        pairwise_sum(&xs[..mid]) + pairwise_sum(&xs[mid..])
    }
}
