//! Analytic shape descriptions and their boundary geometry.

use serde::{Deserialize, Serialize};

pub type Point = [f64; 2];

/// A bounded planar domain described analytically.
///
/// Rectangles are anchored at the origin: `[0, width] x [0, height]`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Shape {
    Disk {
        #[serde(default)]
        center: Point,
        radius: f64,
    },
    Rectangle {
        width: f64,
        height: f64,
    },
    Polygon {
        vertices: Vec<Point>,
    },
    Annulus {
        #[serde(default)]
        center: Point,
        r_in: f64,
        r_out: f64,
    },
}

/// One smooth piece of the boundary.
#[derive(Clone, Copy, Debug)]
pub(crate) enum Primitive {
    Segment(Point, Point),
    Circle(Point, f64),
}

/// Closest point of a boundary primitive to a query point.
#[derive(Clone, Copy, Debug)]
pub(crate) enum Foot {
    Point(Point),
    /// Every point of the circle is equidistant (query at its center).
    WholeCircle,
}

impl Primitive {
    pub(crate) fn nearest(&self, x: Point) -> (f64, Foot) {
        match *self {
            Primitive::Segment(a, b) => {
                let (d, y) = point_segment(x, a, b);
                (d, Foot::Point(y))
            }
            Primitive::Circle(c, r) => {
                let v = sub(x, c);
                let n = norm(v);
                if n <= f64::EPSILON * r.max(1.0) {
                    (r, Foot::WholeCircle)
                } else {
                    let y = [c[0] + r * v[0] / n, c[1] + r * v[1] / n];
                    ((n - r).abs(), Foot::Point(y))
                }
            }
        }
    }
}

pub(crate) fn sub(a: Point, b: Point) -> Point {
    [a[0] - b[0], a[1] - b[1]]
}

pub(crate) fn norm(v: Point) -> f64 {
    v[0].hypot(v[1])
}

fn cross(a: Point, b: Point) -> f64 {
    a[0] * b[1] - a[1] * b[0]
}

/// Distance from `x` to the segment `[a, b]` and the foot point.
pub(crate) fn point_segment(x: Point, a: Point, b: Point) -> (f64, Point) {
    let ab = sub(b, a);
    let len2 = ab[0] * ab[0] + ab[1] * ab[1];
    let t = if len2 == 0.0 {
        0.0
    } else {
        (((x[0] - a[0]) * ab[0] + (x[1] - a[1]) * ab[1]) / len2).clamp(0.0, 1.0)
    };
    let y = [a[0] + t * ab[0], a[1] + t * ab[1]];
    (norm(sub(x, y)), y)
}

fn segments_cross(a: Point, b: Point, c: Point, d: Point) -> bool {
    let orient = |p: Point, q: Point, r: Point| cross(sub(q, p), sub(r, p));
    let on_segment = |p: Point, q: Point, r: Point| {
        r[0] >= p[0].min(q[0])
            && r[0] <= p[0].max(q[0])
            && r[1] >= p[1].min(q[1])
            && r[1] <= p[1].max(q[1])
    };
    let d1 = orient(c, d, a);
    let d2 = orient(c, d, b);
    let d3 = orient(a, b, c);
    let d4 = orient(a, b, d);
    if ((d1 > 0.0 && d2 < 0.0) || (d1 < 0.0 && d2 > 0.0))
        && ((d3 > 0.0 && d4 < 0.0) || (d3 < 0.0 && d4 > 0.0))
    {
        return true;
    }
    (d1 == 0.0 && on_segment(c, d, a))
        || (d2 == 0.0 && on_segment(c, d, b))
        || (d3 == 0.0 && on_segment(a, b, c))
        || (d4 == 0.0 && on_segment(a, b, d))
}

impl Shape {
    /// Checks parameters; returns a description of the first problem found.
    pub fn check(&self) -> Result<(), String> {
        let positive = |name: &str, v: f64| {
            if v.is_finite() && v > 0.0 {
                Ok(())
            } else {
                Err(format!("{name} must be positive and finite, got {v}"))
            }
        };
        match self {
            Shape::Disk { center, radius } => {
                if !center.iter().all(|c| c.is_finite()) {
                    return Err("disk center must be finite".into());
                }
                positive("radius", *radius)
            }
            Shape::Rectangle { width, height } => {
                positive("width", *width)?;
                positive("height", *height)
            }
            Shape::Annulus { center, r_in, r_out } => {
                if !center.iter().all(|c| c.is_finite()) {
                    return Err("annulus center must be finite".into());
                }
                positive("r_in", *r_in)?;
                positive("r_out", *r_out)?;
                if r_in >= r_out {
                    return Err(format!("r_in ({r_in}) must be below r_out ({r_out})"));
                }
                Ok(())
            }
            Shape::Polygon { vertices } => {
                let n = vertices.len();
                if n < 3 {
                    return Err(format!("polygon needs at least 3 vertices, got {n}"));
                }
                if !vertices.iter().flatten().all(|c| c.is_finite()) {
                    return Err("polygon vertices must be finite".into());
                }
                for i in 0..n {
                    let (a, b) = (vertices[i], vertices[(i + 1) % n]);
                    if a == b {
                        return Err(format!("polygon edge {i} has zero length"));
                    }
                    for j in (i + 1)..n {
                        // adjacent edges share a vertex
                        if j == i + 1 || (i == 0 && j == n - 1) {
                            continue;
                        }
                        let (c, d) = (vertices[j], vertices[(j + 1) % n]);
                        if segments_cross(a, b, c, d) {
                            return Err(format!("polygon edges {i} and {j} intersect"));
                        }
                    }
                }
                if self.area() <= 0.0 {
                    return Err("polygon has zero area".into());
                }
                Ok(())
            }
        }
    }

    /// Axis-aligned bounding box `[xmin, ymin, xmax, ymax]`.
    pub fn bbox(&self) -> [f64; 4] {
        match self {
            Shape::Disk { center, radius } => [
                center[0] - radius,
                center[1] - radius,
                center[0] + radius,
                center[1] + radius,
            ],
            Shape::Annulus { center, r_out, .. } => [
                center[0] - r_out,
                center[1] - r_out,
                center[0] + r_out,
                center[1] + r_out,
            ],
            Shape::Rectangle { width, height } => [0.0, 0.0, *width, *height],
            Shape::Polygon { vertices } => {
                let mut b = [f64::INFINITY, f64::INFINITY, f64::NEG_INFINITY, f64::NEG_INFINITY];
                for v in vertices {
                    b[0] = b[0].min(v[0]);
                    b[1] = b[1].min(v[1]);
                    b[2] = b[2].max(v[0]);
                    b[3] = b[3].max(v[1]);
                }
                b
            }
        }
    }

    /// Analytic area of the shape.
    pub fn area(&self) -> f64 {
        use std::f64::consts::PI;
        match self {
            Shape::Disk { radius, .. } => PI * radius * radius,
            Shape::Annulus { r_in, r_out, .. } => PI * (r_out * r_out - r_in * r_in),
            Shape::Rectangle { width, height } => width * height,
            Shape::Polygon { vertices } => {
                let n = vertices.len();
                let twice: f64 = (0..n)
                    .map(|i| cross(vertices[i], vertices[(i + 1) % n]))
                    .sum();
                0.5 * twice.abs()
            }
        }
    }

    /// Whether `x` lies in the open set.
    pub fn contains(&self, x: Point) -> bool {
        match self {
            Shape::Disk { center, radius } => norm(sub(x, *center)) < *radius,
            Shape::Annulus { center, r_in, r_out } => {
                let r = norm(sub(x, *center));
                r > *r_in && r < *r_out
            }
            Shape::Rectangle { width, height } => {
                x[0] > 0.0 && x[0] < *width && x[1] > 0.0 && x[1] < *height
            }
            Shape::Polygon { vertices } => {
                let n = vertices.len();
                let mut inside = false;
                for i in 0..n {
                    let a = vertices[i];
                    let b = vertices[(i + 1) % n];
                    if (a[1] > x[1]) != (b[1] > x[1]) {
                        let t = (x[1] - a[1]) / (b[1] - a[1]);
                        if x[0] < a[0] + t * (b[0] - a[0]) {
                            inside = !inside;
                        }
                    }
                }
                inside
            }
        }
    }

    /// Distance from `x` to the boundary, exact for every shape kind.
    pub fn boundary_distance(&self, x: Point) -> f64 {
        match self {
            Shape::Disk { center, radius } => (radius - norm(sub(x, *center))).abs(),
            Shape::Annulus { center, r_in, r_out } => {
                let r = norm(sub(x, *center));
                (r - r_in).abs().min((r_out - r).abs())
            }
            Shape::Rectangle { width, height } if self.contains(x) => {
                x[0].min(width - x[0]).min(x[1]).min(height - x[1])
            }
            _ => self
                .primitives()
                .iter()
                .map(|p| p.nearest(x).0)
                .fold(f64::INFINITY, f64::min),
        }
    }

    pub(crate) fn primitives(&self) -> Vec<Primitive> {
        match self {
            Shape::Disk { center, radius } => vec![Primitive::Circle(*center, *radius)],
            Shape::Annulus { center, r_in, r_out } => vec![
                Primitive::Circle(*center, *r_in),
                Primitive::Circle(*center, *r_out),
            ],
            Shape::Rectangle { width, height } => {
                let (w, h) = (*width, *height);
                let c = [[0.0, 0.0], [w, 0.0], [w, h], [0.0, h]];
                (0..4).map(|i| Primitive::Segment(c[i], c[(i + 1) % 4])).collect()
            }
            Shape::Polygon { vertices } => {
                let n = vertices.len();
                (0..n)
                    .map(|i| Primitive::Segment(vertices[i], vertices[(i + 1) % n]))
                    .collect()
            }
        }
    }

    /// Analytic inradius, used only to cross-check the rasterized value.
    pub fn inradius(&self) -> Option<f64> {
        match self {
            Shape::Disk { radius, .. } => Some(*radius),
            Shape::Annulus { r_in, r_out, .. } => Some(0.5 * (r_out - r_in)),
            Shape::Rectangle { width, height } => Some(0.5 * width.min(*height)),
            Shape::Polygon { .. } => None,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn crossing_polygon_is_rejected() {
        let bowtie = Shape::Polygon {
            vertices: vec![[0.0, 0.0], [1.0, 1.0], [1.0, 0.0], [0.0, 1.0]],
        };
        assert!(bowtie.check().is_err());
        let square = Shape::Polygon {
            vertices: vec![[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]],
        };
        assert!(square.check().is_ok());
        assert!((square.area() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn polygon_distance_matches_rectangle() {
        let rect = Shape::Rectangle { width: 2.0, height: 1.0 };
        let poly = Shape::Polygon {
            vertices: vec![[0.0, 0.0], [2.0, 0.0], [2.0, 1.0], [0.0, 1.0]],
        };
        for &x in &[[0.3, 0.2], [1.0, 0.5], [1.9, 0.95], [0.01, 0.5]] {
            assert!(poly.contains(x) && rect.contains(x));
            let (a, b) = (rect.boundary_distance(x), poly.boundary_distance(x));
            assert!((a - b).abs() < 1e-15, "{x:?}: {a} vs {b}");
        }
    }

    #[test]
    fn annulus_rejects_inverted_radii() {
        let a = Shape::Annulus { center: [0.0, 0.0], r_in: 1.0, r_out: 0.5 };
        assert!(a.check().is_err());
    }
}
