//! Planar geometry: vectors, poses, rectangles, convex polygons and the
//! separating-axis machinery used for footprint collision tests.

use std::ops::{Add, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};

use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(from = "[T; 2]", into = "[T; 2]")]
#[serde(bound(
    serialize = "T: Scalar + Serialize",
    deserialize = "T: Scalar + Deserialize<'de>"
))]
pub struct Vec2<T: Scalar> {
    pub x: T,
    pub y: T,
}

impl<T: Scalar> From<[T; 2]> for Vec2<T> {
    fn from(v: [T; 2]) -> Self {
        Vec2 { x: v[0], y: v[1] }
    }
}

impl<T: Scalar> From<Vec2<T>> for [T; 2] {
    fn from(v: Vec2<T>) -> Self {
        [v.x, v.y]
    }
}

impl<T: Scalar> Vec2<T> {
    pub fn new(x: T, y: T) -> Self {
        Vec2 { x, y }
    }

    pub fn zero() -> Self {
        Vec2 {
            x: T::zero(),
            y: T::zero(),
        }
    }

    pub fn dot(self, o: Self) -> T {
        self.x * o.x + self.y * o.y
    }

    /// z-component of the 3D cross product.
    pub fn cross(self, o: Self) -> T {
        self.x * o.y - self.y * o.x
    }

    pub fn norm_sq(self) -> T {
        self.dot(self)
    }

    pub fn norm(self) -> T {
        self.x.hypot(self.y)
    }

    pub fn distance(self, o: Self) -> T {
        (self - o).norm()
    }

    /// Counter-clockwise perpendicular.
    pub fn perp(self) -> Self {
        Vec2 {
            x: -self.y,
            y: self.x,
        }
    }

    pub fn rotate(self, angle: T) -> Self {
        let (s, c) = angle.sin_cos();
        Vec2 {
            x: self.x * c - self.y * s,
            y: self.x * s + self.y * c,
        }
    }

    pub fn normalized(self) -> Option<Self> {
        let n = self.norm();
        if n > T::zero() {
            Some(self * (T::one() / n))
        } else {
            None
        }
    }

    pub fn lerp(self, o: Self, t: T) -> Self {
        self + (o - self) * t
    }

    pub fn cast<U: Scalar>(self) -> Vec2<U> {
        Vec2 {
            x: U::lit(self.x.as_f64()),
            y: U::lit(self.y.as_f64()),
        }
    }
}

impl<T: Scalar> Add for Vec2<T> {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        Vec2 {
            x: self.x + o.x,
            y: self.y + o.y,
        }
    }
}

impl<T: Scalar> Sub for Vec2<T> {
    type Output = Self;
    fn sub(self, o: Self) -> Self {
        Vec2 {
            x: self.x - o.x,
            y: self.y - o.y,
        }
    }
}

impl<T: Scalar> Mul<T> for Vec2<T> {
    type Output = Self;
    fn mul(self, k: T) -> Self {
        Vec2 {
            x: self.x * k,
            y: self.y * k,
        }
    }
}

impl<T: Scalar> Neg for Vec2<T> {
    type Output = Self;
    fn neg(self) -> Self {
        Vec2 {
            x: -self.x,
            y: -self.y,
        }
    }
}

/// Wraps an angle into `(-pi, pi]`.
pub fn wrap_angle<T: Scalar>(a: T) -> T {
    let two_pi = T::PI() + T::PI();
    let mut r = a % two_pi;
    if r > T::PI() {
        r -= two_pi;
    } else if r <= -T::PI() {
        r += two_pi;
    }
    r
}

/// Planar rigid-body configuration `(x, y, theta)`.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(from = "[T; 3]", into = "[T; 3]")]
#[serde(bound(
    serialize = "T: Scalar + Serialize",
    deserialize = "T: Scalar + Deserialize<'de>"
))]
pub struct Pose<T: Scalar> {
    pub x: T,
    pub y: T,
    pub theta: T,
}

impl<T: Scalar> From<[T; 3]> for Pose<T> {
    fn from(v: [T; 3]) -> Self {
        Pose {
            x: v[0],
            y: v[1],
            theta: v[2],
        }
    }
}

impl<T: Scalar> From<Pose<T>> for [T; 3] {
    fn from(p: Pose<T>) -> Self {
        [p.x, p.y, p.theta]
    }
}

impl<T: Scalar> Pose<T> {
    pub fn new(x: T, y: T, theta: T) -> Self {
        Pose { x, y, theta }
    }

    pub fn position(&self) -> Vec2<T> {
        Vec2::new(self.x, self.y)
    }

    pub fn heading(&self) -> Vec2<T> {
        let (s, c) = self.theta.sin_cos();
        Vec2::new(c, s)
    }

    /// Maps a point from the body frame into the world frame.
    pub fn to_world(&self, local: Vec2<T>) -> Vec2<T> {
        local.rotate(self.theta) + self.position()
    }

    /// Maps a world point into the body frame.
    pub fn to_local(&self, world: Vec2<T>) -> Vec2<T> {
        (world - self.position()).rotate(-self.theta)
    }
}

/// Axis-aligned rectangle.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound(
    serialize = "T: Scalar + Serialize",
    deserialize = "T: Scalar + Deserialize<'de>"
))]
pub struct Rect<T: Scalar> {
    pub min: Vec2<T>,
    pub max: Vec2<T>,
}

impl<T: Scalar> Rect<T> {
    pub fn new(min: Vec2<T>, max: Vec2<T>) -> Self {
        Rect { min, max }
    }

    pub fn from_xywh(x: T, y: T, w: T, h: T) -> Self {
        Rect {
            min: Vec2::new(x, y),
            max: Vec2::new(x + w, y + h),
        }
    }

    pub fn centered(c: Vec2<T>, w: T, h: T) -> Self {
        let two = T::lit(2.0);
        Rect {
            min: Vec2::new(c.x - w / two, c.y - h / two),
            max: Vec2::new(c.x + w / two, c.y + h / two),
        }
    }

    pub fn width(&self) -> T {
        self.max.x - self.min.x
    }

    pub fn height(&self) -> T {
        self.max.y - self.min.y
    }

    pub fn area(&self) -> T {
        self.width() * self.height()
    }

    pub fn center(&self) -> Vec2<T> {
        (self.min + self.max) * T::lit(0.5)
    }

    pub fn perimeter(&self) -> T {
        T::lit(2.0) * (self.width() + self.height())
    }

    pub fn contains(&self, p: Vec2<T>) -> bool {
        p.x >= self.min.x && p.x <= self.max.x && p.y >= self.min.y && p.y <= self.max.y
    }

    /// True when `other` lies inside `self` up to `tol`.
    pub fn contains_rect(&self, other: &Rect<T>, tol: T) -> bool {
        other.min.x >= self.min.x - tol
            && other.min.y >= self.min.y - tol
            && other.max.x <= self.max.x + tol
            && other.max.y <= self.max.y + tol
    }

    pub fn translate(&self, d: Vec2<T>) -> Self {
        Rect {
            min: self.min + d,
            max: self.max + d,
        }
    }

    pub fn expand(&self, m: T) -> Self {
        Rect {
            min: self.min - Vec2::new(m, m),
            max: self.max + Vec2::new(m, m),
        }
    }

    /// Corners in counter-clockwise order starting at `min`.
    pub fn corners(&self) -> [Vec2<T>; 4] {
        [
            self.min,
            Vec2::new(self.max.x, self.min.y),
            self.max,
            Vec2::new(self.min.x, self.max.y),
        ]
    }

    pub fn to_polygon(&self) -> ConvexPolygon<T> {
        ConvexPolygon {
            vertices: self.corners().to_vec(),
        }
    }
}

/// Convex polygon with counter-clockwise vertex order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<Vec2<T>>", into = "Vec<Vec2<T>>")]
#[serde(bound(
    serialize = "T: Scalar + Serialize",
    deserialize = "T: Scalar + Deserialize<'de>"
))]
pub struct ConvexPolygon<T: Scalar> {
    vertices: Vec<Vec2<T>>,
}

impl<T: Scalar> TryFrom<Vec<Vec2<T>>> for ConvexPolygon<T> {
    type Error = String;
    fn try_from(v: Vec<Vec2<T>>) -> Result<Self, String> {
        ConvexPolygon::new(v).ok_or_else(|| "polygon is not convex or has zero area".to_string())
    }
}

impl<T: Scalar> From<ConvexPolygon<T>> for Vec<Vec2<T>> {
    fn from(p: ConvexPolygon<T>) -> Self {
        p.vertices
    }
}

fn signed_area<T: Scalar>(v: &[Vec2<T>]) -> T {
    let n = v.len();
    let mut acc = T::zero();
    for i in 0..n {
        acc += v[i].cross(v[(i + 1) % n]);
    }
    acc * T::lit(0.5)
}

impl<T: Scalar> ConvexPolygon<T> {
    /// Builds a polygon, reorienting clockwise input. Returns `None` for
    /// non-convex or degenerate vertex lists.
    pub fn new(mut vertices: Vec<Vec2<T>>) -> Option<Self> {
        vertices.dedup();
        if vertices.len() > 1 && vertices.first() == vertices.last() {
            vertices.pop();
        }
        if vertices.len() < 3 {
            return None;
        }
        let area = signed_area(&vertices);
        if !(area.abs() > T::epsilon()) {
            return None;
        }
        if area < T::zero() {
            vertices.reverse();
        }
        let n = vertices.len();
        let tol = T::lit(1e-9) * area.abs().max(T::one());
        for i in 0..n {
            let a = vertices[i];
            let b = vertices[(i + 1) % n];
            let c = vertices[(i + 2) % n];
            if (b - a).cross(c - b) < -tol {
                return None;
            }
        }
        Some(ConvexPolygon { vertices })
    }

    pub fn vertices(&self) -> &[Vec2<T>] {
        &self.vertices
    }

    pub fn area(&self) -> T {
        signed_area(&self.vertices)
    }

    pub fn centroid(&self) -> Vec2<T> {
        let n = T::from_usize(self.vertices.len()).unwrap();
        self.vertices.iter().fold(Vec2::zero(), |acc, &v| acc + v) * (T::one() / n)
    }

    pub fn aabb(&self) -> Rect<T> {
        aabb_of(&self.vertices)
    }

    /// Inclusive point containment.
    pub fn contains(&self, p: Vec2<T>) -> bool {
        let n = self.vertices.len();
        (0..n).all(|i| {
            let a = self.vertices[i];
            let b = self.vertices[(i + 1) % n];
            (b - a).cross(p - a) >= T::zero()
        })
    }

    /// Euclidean distance from `p` to the polygon; zero inside.
    pub fn distance_to_point(&self, p: Vec2<T>) -> T {
        if self.contains(p) {
            return T::zero();
        }
        edges(&self.vertices)
            .map(|(a, b)| point_segment_distance(p, a, b))
            .fold(T::infinity(), T::min)
    }

    pub fn translate(&self, d: Vec2<T>) -> Self {
        ConvexPolygon {
            vertices: self.vertices.iter().map(|&v| v + d).collect(),
        }
    }

    pub fn rotate_about(&self, pivot: Vec2<T>, angle: T) -> Self {
        ConvexPolygon {
            vertices: self
                .vertices
                .iter()
                .map(|&v| (v - pivot).rotate(angle) + pivot)
                .collect(),
        }
    }
}

/// Rectangle rotated by `theta` about its center; `half_length` runs along
/// the heading, `half_width` across it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OrientedRect<T: Scalar> {
    pub center: Vec2<T>,
    pub half_length: T,
    pub half_width: T,
    pub theta: T,
}

impl<T: Scalar> OrientedRect<T> {
    pub fn new(center: Vec2<T>, length: T, width: T, theta: T) -> Self {
        let half = T::lit(0.5);
        OrientedRect {
            center,
            half_length: length * half,
            half_width: width * half,
            theta,
        }
    }

    pub fn corners(&self) -> [Vec2<T>; 4] {
        let (hl, hw) = (self.half_length, self.half_width);
        [
            Vec2::new(-hl, -hw),
            Vec2::new(hl, -hw),
            Vec2::new(hl, hw),
            Vec2::new(-hl, hw),
        ]
        .map(|c| c.rotate(self.theta) + self.center)
    }

    pub fn contains(&self, p: Vec2<T>) -> bool {
        let l = (p - self.center).rotate(-self.theta);
        l.x.abs() <= self.half_length && l.y.abs() <= self.half_width
    }

    pub fn aabb(&self) -> Rect<T> {
        aabb_of(&self.corners())
    }

    pub fn area(&self) -> T {
        T::lit(4.0) * self.half_length * self.half_width
    }
}

pub fn aabb_of<T: Scalar>(pts: &[Vec2<T>]) -> Rect<T> {
    let mut min = Vec2::new(T::infinity(), T::infinity());
    let mut max = Vec2::new(T::neg_infinity(), T::neg_infinity());
    for p in pts {
        min.x = min.x.min(p.x);
        min.y = min.y.min(p.y);
        max.x = max.x.max(p.x);
        max.y = max.y.max(p.y);
    }
    Rect { min, max }
}

fn edges<T: Scalar>(v: &[Vec2<T>]) -> impl Iterator<Item = (Vec2<T>, Vec2<T>)> + '_ {
    let n = v.len();
    (0..n).map(move |i| (v[i], v[(i + 1) % n]))
}

pub fn point_segment_distance<T: Scalar>(p: Vec2<T>, a: Vec2<T>, b: Vec2<T>) -> T {
    let ab = b - a;
    let len_sq = ab.norm_sq();
    if len_sq <= T::zero() {
        return p.distance(a);
    }
    let t = ((p - a).dot(ab) / len_sq).max(T::zero()).min(T::one());
    p.distance(a + ab * t)
}

fn project<T: Scalar>(v: &[Vec2<T>], axis: Vec2<T>) -> (T, T) {
    v.iter()
        .fold((T::infinity(), T::neg_infinity()), |(lo, hi), p| {
            let d = p.dot(axis);
            (lo.min(d), hi.max(d))
        })
}

/// Separating-axis test between two convex vertex loops. Touching shapes
/// (zero-width overlap) are reported as disjoint.
pub fn convex_overlap<T: Scalar>(a: &[Vec2<T>], b: &[Vec2<T>]) -> bool {
    for poly in [a, b] {
        for (p, q) in edges(poly) {
            let axis = (q - p).perp();
            let (amin, amax) = project(a, axis);
            let (bmin, bmax) = project(b, axis);
            if amax <= bmin || bmax <= amin {
                return false;
            }
        }
    }
    true
}

/// Minimum distance between two convex vertex loops; zero when they overlap.
pub fn convex_distance<T: Scalar>(a: &[Vec2<T>], b: &[Vec2<T>]) -> T {
    if convex_overlap(a, b) {
        return T::zero();
    }
    let mut best = T::infinity();
    for &p in a {
        for (s, e) in edges(b) {
            best = best.min(point_segment_distance(p, s, e));
        }
    }
    for &p in b {
        for (s, e) in edges(a) {
            best = best.min(point_segment_distance(p, s, e));
        }
    }
    best
}

/// Cyrus-Beck clip of segment `p -> q` against a convex polygon. Returns the
/// parameter interval `[t_in, t_out]` inside the polygon, if any.
pub fn clip_segment<T: Scalar>(p: Vec2<T>, q: Vec2<T>, poly: &[Vec2<T>]) -> Option<(T, T)> {
    let d = q - p;
    let mut t_in = T::zero();
    let mut t_out = T::one();
    for (a, b) in edges(poly) {
        // inward normal for a CCW loop
        let n = (b - a).perp();
        let num = n.dot(p - a);
        let den = n.dot(d);
        if den == T::zero() {
            // parallel to this edge: outside or running along it
            if num <= T::zero() {
                return None;
            }
            continue;
        }
        let t = -num / den;
        if den > T::zero() {
            t_in = t_in.max(t);
        } else {
            t_out = t_out.min(t);
        }
        if t_in > t_out {
            return None;
        }
    }
    Some((t_in, t_out))
}

/// True when the segment passes through the polygon's interior for more than
/// `min_len` of its length.
pub fn segment_crosses<T: Scalar>(p: Vec2<T>, q: Vec2<T>, poly: &[Vec2<T>], min_len: T) -> bool {
    match clip_segment(p, q, poly) {
        Some((a, b)) => (b - a) * (q - p).norm() > min_len,
        None => false,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit_square() -> ConvexPolygon<f64> {
        Rect::from_xywh(0.0, 0.0, 1.0, 1.0).to_polygon()
    }

    #[test]
    fn polygon_orientation_normalised() {
        let cw = vec![
            Vec2::new(0.0, 0.0),
            Vec2::new(0.0, 1.0),
            Vec2::new(1.0, 1.0),
            Vec2::new(1.0, 0.0),
        ];
        let p = ConvexPolygon::new(cw).unwrap();
        assert!(p.area() > 0.0);
        assert!(p.contains(Vec2::new(0.5, 0.5)));
    }

    #[test]
    fn rejects_degenerate_and_concave() {
        let line = vec![
            Vec2::new(0.0, 0.0),
            Vec2::new(1.0, 0.0),
            Vec2::new(2.0, 0.0),
        ];
        assert!(ConvexPolygon::new(line).is_none());
        let dart = vec![
            Vec2::new(0.0, 0.0),
            Vec2::new(2.0, 0.0),
            Vec2::new(1.0, 0.3),
            Vec2::new(1.0, 2.0),
        ];
        assert!(ConvexPolygon::new(dart).is_none());
    }

    #[test]
    fn sat_touching_is_not_overlap() {
        let a = unit_square();
        let b = a.translate(Vec2::new(1.0, 0.0));
        assert!(!convex_overlap(a.vertices(), b.vertices()));
        let c = a.translate(Vec2::new(0.99, 0.5));
        assert!(convex_overlap(a.vertices(), c.vertices()));
    }

    #[test]
    fn distance_between_separated_squares() {
        let a = unit_square();
        let b = a.translate(Vec2::new(1.5, 0.0));
        assert!((convex_distance(a.vertices(), b.vertices()) - 0.5).abs() < 1e-12);
        let r = OrientedRect::new(Vec2::new(3.0, 0.5), 1.0, 1.0, std::f64::consts::FRAC_PI_4);
        let d = convex_distance(a.vertices(), &r.corners());
        assert!((d - (2.0 - 0.5f64.sqrt())).abs() < 1e-12);
    }

    #[test]
    fn segment_clipping() {
        let sq = unit_square();
        assert!(segment_crosses(
            Vec2::new(-1.0, 0.5),
            Vec2::new(2.0, 0.5),
            sq.vertices(),
            1e-9
        ));
        assert!(!segment_crosses(
            Vec2::new(-1.0, 1.5),
            Vec2::new(2.0, 1.5),
            sq.vertices(),
            1e-9
        ));
        // grazing an edge does not count as crossing
        assert!(!segment_crosses(
            Vec2::new(-1.0, 1.0),
            Vec2::new(2.0, 1.0),
            sq.vertices(),
            1e-9
        ));
    }

    #[test]
    fn wrap_angle_range() {
        for k in -20..20 {
            let a = k as f64 * 0.7;
            let w = wrap_angle(a);
            assert!(w > -std::f64::consts::PI - 1e-12 && w <= std::f64::consts::PI + 1e-12);
            assert!(
                ((a - w) / (2.0 * std::f64::consts::PI)).fract().abs() < 1e-9
                    || ((a - w) / (2.0 * std::f64::consts::PI)).fract().abs() > 1.0 - 1e-9
            );
        }
    }

    #[test]
    fn single_precision_footprint() {
        let r = OrientedRect::<f32>::new(Vec2::new(0.0, 0.0), 0.41, 0.47, 0.3);
        assert!(r.contains(Vec2::new(0.1, 0.1)));
        assert!(!r.contains(Vec2::new(0.4, 0.0)));
        assert!((r.area() - 0.41 * 0.47).abs() < 1e-6);
    }

    #[test]
    fn vec_serde_as_array() {
        let v = Vec2::new(1.5, -2.0);
        assert_eq!(serde_json::to_string(&v).unwrap(), "[1.5,-2.0]");
        let p: Pose<f64> = serde_json::from_str("[1,2,0.5]").unwrap();
        assert_eq!(p, Pose::new(1.0, 2.0, 0.5));
    }
}
