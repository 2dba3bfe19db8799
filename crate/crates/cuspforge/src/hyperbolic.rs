//! Numeric hyperbolic geometry of the regular ideal tetrahedron in the ball
//! model, and the constants h₀ and l₀ from the upper half-plane.

use std::f64::consts::PI;

use crate::error::{Error, Result};

pub type Point = [f64; 3];

const NORM_TOL: f64 = 1e-12;

fn dot(a: Point, b: Point) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

fn sub(a: Point, b: Point) -> Point {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

fn scale(a: Point, s: f64) -> Point {
    [a[0] * s, a[1] * s, a[2] * s]
}

fn add(a: Point, b: Point) -> Point {
    [a[0] + b[0], a[1] + b[1], a[2] + b[2]]
}

/// Vertices `(±1,±1,±1)/√3` with an even number of minus signs.
pub fn regular_ideal_tetrahedron() -> [Point; 4] {
    let s = 1.0 / 3f64.sqrt();
    [[s, s, s], [s, -s, -s], [-s, s, -s], [-s, -s, s]]
}

/// Distance between interior points of the ball model.
pub fn hyperbolic_distance(p: Point, q: Point) -> Result<f64> {
    let np = dot(p, p);
    let nq = dot(q, q);
    if np >= 1.0 - NORM_TOL || nq >= 1.0 - NORM_TOL {
        return Err(Error::Range("hyperbolic distance needs interior points".into()));
    }
    let d = sub(p, q);
    let c = 1.0 + 2.0 * dot(d, d) / ((1.0 - np) * (1.0 - nq));
    Ok(c.max(1.0).acosh())
}

/// Sphere orthogonal to the unit sphere through three ideal points:
/// centre `c` with `c·pᵢ = 1`, radius `√(|c|² − 1)`.
fn face_sphere(p: [Point; 3]) -> (Point, f64) {
    // Solve the 3×3 system by Cramer's rule.
    let det3 = |a: Point, b: Point, c: Point| {
        a[0] * (b[1] * c[2] - b[2] * c[1]) - a[1] * (b[0] * c[2] - b[2] * c[0]) + a[2] * (b[0] * c[1] - b[1] * c[0])
    };
    let cols = |k: usize| [p[0][k], p[1][k], p[2][k]];
    let (c0, c1, c2) = (cols(0), cols(1), cols(2));
    let ones = [1.0, 1.0, 1.0];
    let d = det3(c0, c1, c2);
    let centre = [det3(ones, c1, c2) / d, det3(c0, ones, c2) / d, det3(c0, c1, ones) / d];
    let r = (dot(centre, centre) - 1.0).sqrt();
    (centre, r)
}

/// Interior dihedral angle of the regular ideal tetrahedron along the edge
/// `{a, b}`.
pub fn dihedral_angle(a: usize, b: usize) -> f64 {
    let v = regular_ideal_tetrahedron();
    let rest: Vec<usize> = (0..4).filter(|&i| i != a && i != b).collect();
    // The two faces containing the edge omit rest[0] and rest[1] respectively.
    let (c1, r1) = face_sphere([v[a], v[b], v[rest[1]]]);
    let (c2, r2) = face_sphere([v[a], v[b], v[rest[0]]]);
    let d = sub(c1, c2);
    let cos_normals = (r1 * r1 + r2 * r2 - dot(d, d)) / (2.0 * r1 * r2);
    PI - cos_normals.clamp(-1.0, 1.0).acos()
}

/// Point of the geodesic between ideal points `p` and `q` nearest the origin.
pub fn nearest_point_on_geodesic(p: Point, q: Point) -> Point {
    let c = scale(add(p, q), 1.0 / (1.0 + dot(p, q)));
    let len = dot(c, c).sqrt();
    let r = (len * len - 1.0).sqrt();
    scale(c, (len - r) / len)
}

#[derive(Clone, Debug, PartialEq)]
pub struct GeometricQuad {
    pub vertices: [Point; 4],
    pub side_length: f64,
    pub corner_angle: f64,
    pub sides: [f64; 4],
    pub corners: [f64; 4],
}

/// The quad separating the vertex pair `pair` from the complementary pair,
/// cut out by the plane through the origin normal to the common
/// perpendicular of the two opposite edges.
pub fn build_quad(pair: (usize, usize)) -> Result<GeometricQuad> {
    let (a, b) = pair;
    if a == b || a > 3 || b > 3 {
        return Err(Error::Range(format!("({a},{b}) is not an edge of the tetrahedron")));
    }
    let rest: Vec<usize> = (0..4).filter(|&i| i != a && i != b).collect();
    let (c, d) = (rest[0], rest[1]);
    let v = regular_ideal_tetrahedron();
    // Cycle through the four edges that join the two sides.
    let cycle = [(a, c), (a, d), (b, d), (b, c)];
    let verts: Vec<Point> = cycle.iter().map(|&(x, y)| nearest_point_on_geodesic(v[x], v[y])).collect();
    let vertices = [verts[0], verts[1], verts[2], verts[3]];
    let mut sides = [0.0; 4];
    let mut corners = [0.0; 4];
    for i in 0..4 {
        sides[i] = hyperbolic_distance(vertices[i], vertices[(i + 1) % 4])?;
    }
    for i in 0..4 {
        let prev = vertices[(i + 3) % 4];
        let next = vertices[(i + 1) % 4];
        let sa = hyperbolic_distance(vertices[i], prev)?;
        let sb = hyperbolic_distance(vertices[i], next)?;
        let diag = hyperbolic_distance(prev, next)?;
        let cos = (sa.cosh() * sb.cosh() - diag.cosh()) / (sa.sinh() * sb.sinh());
        corners[i] = cos.clamp(-1.0, 1.0).acos();
    }
    Ok(GeometricQuad { vertices, side_length: sides[0], corner_angle: corners[0], sides, corners })
}

/// Upper half-plane distance.
pub fn half_plane_distance(p: (f64, f64), q: (f64, f64)) -> f64 {
    let dx = p.0 - q.0;
    let dy = p.1 - q.1;
    (1.0 + (dx * dx + dy * dy) / (2.0 * p.1 * q.1)).acosh()
}

/// `(h₀, l₀)` for the ideal triangle with vertices −1, 1, ∞.
///
/// h₀ is the length of the horocyclic arc at height 1 between the vertical
/// sides. l₀ is the distance between the incircle tangency points on the
/// bottom side and on the side `x = 1`.
pub fn constants_h0_l0() -> (f64, f64) {
    // Horocycle y = 1 has length element dx / y.
    let h0 = (1.0 - (-1.0)) / 1.0;
    // The incentre is (0, √3). Its foot on the unit semicircle is (0, 1); its
    // foot on x = 1 lies on the perpendicular semicircle |z − 1| = 2.
    let incentre = (0.0f64, 3f64.sqrt());
    let radius = ((incentre.0 - 1.0).powi(2) + incentre.1.powi(2)).sqrt();
    let foot_side = (1.0, radius);
    let foot_bottom = (0.0, 1.0);
    (h0, half_plane_distance(foot_bottom, foot_side))
}

#[derive(Clone, Debug, PartialEq)]
pub struct HoroTriangle {
    pub side_length: f64,
    pub scale: f64,
    pub corner_angle: f64,
}

/// Equilateral Euclidean triangle of side `scale` on a horosphere.
pub fn horo_triangle(scale: f64) -> Result<HoroTriangle> {
    let (h0, _) = constants_h0_l0();
    if !(scale > 0.0 && scale < h0) {
        return Err(Error::Range(format!("horosphere scale {scale} not in (0, {h0})")));
    }
    Ok(HoroTriangle { side_length: scale, scale, corner_angle: PI / 3.0 })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn vertices_are_ideal_and_regular() {
        let v = regular_ideal_tetrahedron();
        for i in 0..4 {
            assert!((dot(v[i], v[i]) - 1.0).abs() < 1e-12);
            for j in i + 1..4 {
                assert!((dot(v[i], v[j]) + 1.0 / 3.0).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn distance_rejects_ideal_points() {
        let v = regular_ideal_tetrahedron();
        assert!(hyperbolic_distance(v[0], [0.0; 3]).is_err());
    }
}
