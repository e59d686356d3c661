//! The model surface: a closed disk of radius `R` minus two open hole disks,
//! carrying two annular tubes whose core circles cross at the basepoint `z`.
//!
//! Each push letter rotates one tube about its hole center by `±2π·f(s)`,
//! where `s` is the normalized distance from the core circle and `f` is the
//! finger profile. Rotations by an angle depending only on the radius are
//! exactly area-preserving.

use std::f64::consts::PI;
use std::fmt;
use std::ops::{Add, Mul, Sub};
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::quadrature;
use crate::words::{Generator, Letter, ParseWordError, Word};

pub const DEFAULT_SAMPLES_PER_LETTER: usize = 32;
pub const MIN_SAMPLES_PER_LETTER: usize = 8;
pub const REGION_TOLERANCE: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub const fn new(x: f64, y: f64) -> Point {
        Point { x, y }
    }

    pub fn norm(self) -> f64 {
        self.x.hypot(self.y)
    }

    pub fn dist(self, other: Point) -> f64 {
        (self - other).norm()
    }

    pub fn dot(self, other: Point) -> f64 {
        self.x * other.x + self.y * other.y
    }

    /// z-component of the planar cross product.
    pub fn cross(self, other: Point) -> f64 {
        self.x * other.y - self.y * other.x
    }

    pub fn rotated(self, angle: f64) -> Point {
        let (s, c) = angle.sin_cos();
        Point::new(c * self.x - s * self.y, s * self.x + c * self.y)
    }

    pub fn angle(self) -> f64 {
        self.y.atan2(self.x)
    }
}

impl Add for Point {
    type Output = Point;
    fn add(self, o: Point) -> Point {
        Point::new(self.x + o.x, self.y + o.y)
    }
}

impl Sub for Point {
    type Output = Point;
    fn sub(self, o: Point) -> Point {
        Point::new(self.x - o.x, self.y - o.y)
    }
}

impl Mul<f64> for Point {
    type Output = Point;
    fn mul(self, k: f64) -> Point {
        Point::new(self.x * k, self.y * k)
    }
}

impl From<[f64; 2]> for Point {
    fn from(a: [f64; 2]) -> Point {
        Point::new(a[0], a[1])
    }
}

impl From<Point> for [f64; 2] {
    fn from(p: Point) -> [f64; 2] {
        [p.x, p.y]
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GeometryError {
    #[error("parameter {name} = {value} is out of range")]
    BadParameter { name: &'static str, value: f64 },
    #[error("core circles do not cross in two points")]
    CoresDoNotCross,
    #[error("tube {0} leaves the ambient disk")]
    TubeOutsideAmbient(Generator),
    #[error("hole {which} of radius {radius} must lie in (0, {max}) to avoid both tubes and the other hole")]
    BadHole { which: Generator, radius: f64, max: f64 },
    #[error("tube overlap reaches {0:?}, away from both core crossings")]
    OverlapNotLocal(Point),
    #[error("region quadrature reached error {achieved:e}, tolerance {tol:e}")]
    Quadrature { achieved: f64, tol: f64 },
}

/// Geometry as it appears in JSON files.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GeometryParams {
    #[serde(rename = "R")]
    pub ambient_radius: f64,
    pub c_alpha: [f64; 2],
    pub c_beta: [f64; 2],
    pub r_alpha: f64,
    pub r_beta: f64,
    pub w_alpha: f64,
    pub w_beta: f64,
    pub epsilon: f64,
    /// Hole radii; half the largest admissible radius when omitted.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub h_alpha: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub h_beta: Option<f64>,
}

impl Default for GeometryParams {
    fn default() -> Self {
        GeometryParams {
            ambient_radius: 6.0,
            c_alpha: [-1.0, 0.0],
            c_beta: [1.0, 0.0],
            r_alpha: 2f64.sqrt(),
            r_beta: 2f64.sqrt(),
            w_alpha: 0.25,
            w_beta: 0.25,
            epsilon: 0.1,
            h_alpha: None,
            h_beta: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RegionLabel {
    Outside,
    CoreBoth,
    CoreAOnly,
    CoreBOnly,
    Collar,
}

impl RegionLabel {
    pub const ALL: [RegionLabel; 5] = [
        RegionLabel::Outside,
        RegionLabel::CoreBoth,
        RegionLabel::CoreAOnly,
        RegionLabel::CoreBOnly,
        RegionLabel::Collar,
    ];

    fn index(self) -> usize {
        self as usize
    }
}

impl fmt::Display for RegionLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            RegionLabel::Outside => "outside",
            RegionLabel::CoreBoth => "core_both",
            RegionLabel::CoreAOnly => "core_a_only",
            RegionLabel::CoreBOnly => "core_b_only",
            RegionLabel::Collar => "collar",
        };
        f.write_str(s)
    }
}

/// `f(t) = 1` on `[0, 1−ε]`, cubic smoothstep down to `f(1) = 0`, zero beyond.
pub fn finger_profile(t: f64, epsilon: f64) -> f64 {
    let knee = 1.0 - epsilon;
    if t <= knee {
        1.0
    } else if t >= 1.0 {
        0.0
    } else {
        let u = (t - knee) / epsilon;
        1.0 - u * u * (3.0 - 2.0 * u)
    }
}

/// `ρ_ε(w)`: the product of push maps spelled by a reduced word, applied right to left.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct TransformationElement {
    word: Word,
}

impl TransformationElement {
    pub fn identity() -> Self {
        Self::default()
    }

    pub fn push(l: Letter) -> Self {
        Word::letter(l).into()
    }

    pub fn word(&self) -> &Word {
        &self.word
    }

    pub fn letters(&self) -> &[Letter] {
        self.word.letters()
    }

    pub fn len(&self) -> usize {
        self.word.len()
    }

    pub fn is_empty(&self) -> bool {
        self.word.is_empty()
    }

    pub fn multiply(&self, other: &Self) -> Self {
        self.word.multiply(&other.word).into()
    }

    pub fn inverse(&self) -> Self {
        self.word.inverse().into()
    }

    pub fn pow(&self, n: u32) -> Self {
        self.word.pow(n).into()
    }
}

impl From<Word> for TransformationElement {
    fn from(word: Word) -> Self {
        TransformationElement { word }
    }
}

impl fmt::Display for TransformationElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.word.fmt(f)
    }
}

impl FromStr for TransformationElement {
    type Err = ParseWordError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Ok(s.parse::<Word>()?.into())
    }
}

#[derive(Debug, Clone, Copy)]
struct Tube {
    center: Point,
    radius: f64,
    half_width: f64,
}

impl Tube {
    fn radial(&self, p: Point) -> f64 {
        (p.dist(self.center) - self.radius).abs() / self.half_width
    }
}

/// A validated model surface with its region areas precomputed.
#[derive(Debug, Clone)]
pub struct ModelGeometry {
    params: GeometryParams,
    tubes: [Tube; 2],
    holes: [f64; 2],
    z: Point,
    z_other: Point,
    measures: [f64; 5],
    measure_error: f64,
}

fn tube_index(g: Generator) -> usize {
    match g {
        Generator::A => 0,
        Generator::B => 1,
    }
}

fn positive(name: &'static str, value: f64) -> Result<(), GeometryError> {
    if value > 0.0 && value.is_finite() {
        Ok(())
    } else {
        Err(GeometryError::BadParameter { name, value })
    }
}

/// Intersection points of two circles, left of the direction `c0 → c1` first.
fn circle_intersections(c0: Point, r0: f64, c1: Point, r1: f64) -> Option<(Point, Point)> {
    let d = c0.dist(c1);
    if !(d > (r0 - r1).abs() && d < r0 + r1) {
        return None;
    }
    let u = (c1 - c0) * (1.0 / d);
    let a = (r0 * r0 - r1 * r1 + d * d) / (2.0 * d);
    let h = (r0 * r0 - a * a).max(0.0).sqrt();
    let base = c0 + u * a;
    let n = Point::new(-u.y, u.x);
    Some((base + n * h, base - n * h))
}

impl ModelGeometry {
    pub fn new(params: GeometryParams) -> Result<ModelGeometry, GeometryError> {
        let p = params;
        positive("R", p.ambient_radius)?;
        positive("r_alpha", p.r_alpha)?;
        positive("r_beta", p.r_beta)?;
        positive("w_alpha", p.w_alpha)?;
        positive("w_beta", p.w_beta)?;
        if !(p.epsilon > 0.0 && p.epsilon < 1.0) {
            return Err(GeometryError::BadParameter {
                name: "epsilon",
                value: p.epsilon,
            });
        }
        if p.w_alpha >= p.r_alpha {
            return Err(GeometryError::BadParameter {
                name: "w_alpha",
                value: p.w_alpha,
            });
        }
        if p.w_beta >= p.r_beta {
            return Err(GeometryError::BadParameter {
                name: "w_beta",
                value: p.w_beta,
            });
        }
        let tubes = [
            Tube {
                center: p.c_alpha.into(),
                radius: p.r_alpha,
                half_width: p.w_alpha,
            },
            Tube {
                center: p.c_beta.into(),
                radius: p.r_beta,
                half_width: p.w_beta,
            },
        ];
        let (z, z_other) = circle_intersections(tubes[0].center, tubes[0].radius, tubes[1].center, tubes[1].radius)
            .ok_or(GeometryError::CoresDoNotCross)?;
        for (t, g) in tubes.iter().zip([Generator::A, Generator::B]) {
            if t.center.norm() + t.radius + t.half_width >= p.ambient_radius {
                return Err(GeometryError::TubeOutsideAmbient(g));
            }
        }
        let max_holes = Self::max_hole_radii(&tubes, p.ambient_radius);
        let mut holes = [0.0; 2];
        for (i, (given, g)) in [(p.h_alpha, Generator::A), (p.h_beta, Generator::B)].into_iter().enumerate() {
            let max = max_holes[i];
            let h = given.unwrap_or(0.5 * max);
            if !(h > 0.0 && h < max) {
                return Err(GeometryError::BadHole {
                    which: g,
                    radius: h,
                    max: max.max(0.0),
                });
            }
            holes[i] = h;
        }
        if holes[0] + holes[1] >= tubes[0].center.dist(tubes[1].center) {
            return Err(GeometryError::BadHole {
                which: Generator::B,
                radius: holes[1],
                max: tubes[0].center.dist(tubes[1].center) - holes[0],
            });
        }
        let mut geom = ModelGeometry {
            params: GeometryParams {
                h_alpha: Some(holes[0]),
                h_beta: Some(holes[1]),
                ..p
            },
            tubes,
            holes,
            z,
            z_other,
            measures: [0.0; 5],
            measure_error: 0.0,
        };
        geom.check_overlap_locality()?;
        let mut total_error = 0.0;
        for label in RegionLabel::ALL {
            let (value, err) = geom.area_where_with_error(|q| geom.classify_region(q) == label, 0.1 * REGION_TOLERANCE)?;
            geom.measures[label.index()] = value;
            total_error += err;
        }
        geom.measure_error = total_error;
        Ok(geom)
    }

    /// Default geometry with the given `ε`.
    pub fn with_epsilon(epsilon: f64) -> Result<ModelGeometry, GeometryError> {
        ModelGeometry::new(GeometryParams {
            epsilon,
            ..GeometryParams::default()
        })
    }

    /// Same shape, different `ε`; hole radii are kept.
    pub fn at_epsilon(&self, epsilon: f64) -> Result<ModelGeometry, GeometryError> {
        ModelGeometry::new(GeometryParams { epsilon, ..self.params })
    }

    fn max_hole_radii(tubes: &[Tube; 2], ambient: f64) -> [f64; 2] {
        let mut out = [0.0; 2];
        for i in 0..2 {
            let own = &tubes[i];
            let other = &tubes[1 - i];
            let d = own.center.dist(other.center);
            let (inner, outer) = (other.radius - other.half_width, other.radius + other.half_width);
            let to_other = if d > outer {
                d - outer
            } else if d < inner {
                inner - d
            } else {
                0.0
            };
            out[i] = (own.radius - own.half_width)
                .min(to_other)
                .min(ambient - own.center.norm());
        }
        out
    }

    fn check_overlap_locality(&self) -> Result<(), GeometryError> {
        let reach = 3.0 * self.tubes[0].half_width.max(self.tubes[1].half_width);
        for i in 0..2 {
            let t = self.tubes[i];
            let other = self.tubes[1 - i];
            for k in 0..=20 {
                let rho = t.radius + t.half_width * (k as f64 / 10.0 - 1.0);
                for j in 0..4096 {
                    let q = t.center + Point::new(rho, 0.0).rotated(2.0 * PI * j as f64 / 4096.0);
                    if other.radial(q) <= 1.0 && q.dist(self.z) > reach && q.dist(self.z_other) > reach {
                        return Err(GeometryError::OverlapNotLocal(q));
                    }
                }
            }
        }
        Ok(())
    }

    pub fn params(&self) -> &GeometryParams {
        &self.params
    }

    pub fn epsilon(&self) -> f64 {
        self.params.epsilon
    }

    pub fn ambient_radius(&self) -> f64 {
        self.params.ambient_radius
    }

    /// The basepoint: the core crossing to the left of `c_α → c_β`.
    pub fn basepoint(&self) -> Point {
        self.z
    }

    /// The second core crossing.
    pub fn other_crossing(&self) -> Point {
        self.z_other
    }

    pub fn hole_center(&self, g: Generator) -> Point {
        self.tubes[tube_index(g)].center
    }

    pub fn hole_radius(&self, g: Generator) -> f64 {
        self.holes[tube_index(g)]
    }

    pub fn core_radius(&self, g: Generator) -> f64 {
        self.tubes[tube_index(g)].radius
    }

    pub fn half_width(&self, g: Generator) -> f64 {
        self.tubes[tube_index(g)].half_width
    }

    /// `|dist(p, cᵢ) − rᵢ| / wᵢ`.
    pub fn radial(&self, g: Generator, p: Point) -> f64 {
        self.tubes[tube_index(g)].radial(p)
    }

    pub fn in_tube(&self, g: Generator, p: Point) -> bool {
        self.radial(g, p) <= 1.0
    }

    pub fn in_core(&self, g: Generator, p: Point) -> bool {
        self.radial(g, p) <= 1.0 - self.epsilon()
    }

    pub fn contains(&self, p: Point) -> bool {
        p.norm() <= self.params.ambient_radius
            && (0..2).all(|i| p.dist(self.tubes[i].center) >= self.holes[i])
    }

    /// `πR² − πh_α² − πh_β²`.
    pub fn area(&self) -> f64 {
        PI * (self.params.ambient_radius.powi(2) - self.holes[0].powi(2) - self.holes[1].powi(2))
    }

    pub fn classify_region(&self, p: Point) -> RegionLabel {
        let sa = self.radial(Generator::A, p);
        let sb = self.radial(Generator::B, p);
        let knee = 1.0 - self.epsilon();
        let (in_a, in_b) = (sa <= 1.0, sb <= 1.0);
        let (core_a, core_b) = (sa <= knee, sb <= knee);
        if core_a && core_b {
            RegionLabel::CoreBoth
        } else if core_a && !in_b {
            RegionLabel::CoreAOnly
        } else if core_b && !in_a {
            RegionLabel::CoreBOnly
        } else if in_a || in_b {
            RegionLabel::Collar
        } else {
            RegionLabel::Outside
        }
    }

    pub fn region_measure(&self, label: RegionLabel) -> f64 {
        self.measures[label.index()]
    }

    /// Summed quadrature error estimate over the five cached region areas.
    pub fn region_measure_error(&self) -> f64 {
        self.measure_error
    }

    pub fn apply_letter(&self, l: Letter, p: Point) -> Point {
        let t = &self.tubes[tube_index(l.generator())];
        let s = t.radial(p);
        if s >= 1.0 {
            return p;
        }
        let f = finger_profile(s, self.epsilon());
        if f == 1.0 || f == 0.0 {
            return p;
        }
        t.center + (p - t.center).rotated(l.sign() as f64 * 2.0 * PI * f)
    }

    pub fn apply(&self, g: &TransformationElement, p: Point) -> Point {
        g.letters().iter().rev().fold(p, |q, l| self.apply_letter(*l, q))
    }

    /// The isotopy path from `p` to `g(p)`, one sampled arc per acting letter.
    /// `samples_per_letter` below the minimum is raised to it.
    pub fn trajectory(&self, g: &TransformationElement, p: Point, samples_per_letter: usize) -> Vec<Point> {
        let n = samples_per_letter.max(MIN_SAMPLES_PER_LETTER);
        let mut out = vec![p];
        let mut cur = p;
        for &l in g.letters().iter().rev() {
            let t = &self.tubes[tube_index(l.generator())];
            let s = t.radial(cur);
            if s >= 1.0 {
                continue;
            }
            let f = finger_profile(s, self.epsilon());
            if f == 0.0 {
                continue;
            }
            let total = l.sign() as f64 * 2.0 * PI * f;
            let arm = cur - t.center;
            for k in 1..n {
                out.push(t.center + arm.rotated(total * k as f64 / n as f64));
            }
            cur = self.apply_letter(l, cur);
            out.push(cur);
        }
        out
    }

    /// Circles bounding every region; vertical lines meet each region in
    /// intervals between their crossings.
    fn boundary_circles(&self) -> Vec<(Point, f64)> {
        let mut c = vec![(Point::default(), self.params.ambient_radius)];
        let knee = 1.0 - self.epsilon();
        for (i, t) in self.tubes.iter().enumerate() {
            c.push((t.center, self.holes[i]));
            for k in [-1.0, -knee, knee, 1.0] {
                c.push((t.center, t.radius + k * t.half_width));
            }
        }
        c
    }

    /// Area of `{p ∈ M : pred(p)}` for predicates whose boundary lies on the
    /// region circles, with absolute tolerance `REGION_TOLERANCE`.
    pub fn area_where<F: Fn(Point) -> bool>(&self, pred: F) -> Result<f64, GeometryError> {
        self.area_where_with_error(pred, REGION_TOLERANCE).map(|(v, _)| v)
    }

    fn area_where_with_error<F: Fn(Point) -> bool>(&self, pred: F, tol: f64) -> Result<(f64, f64), GeometryError> {
        let circles = self.boundary_circles();
        let big_r = self.params.ambient_radius;
        let mut xs = vec![-big_r, big_r];
        for (i, &(c, r)) in circles.iter().enumerate() {
            xs.push(c.x - r);
            xs.push(c.x + r);
            for &(c2, r2) in &circles[i + 1..] {
                if let Some((p, q)) = circle_intersections(c, r, c2, r2) {
                    xs.push(p.x);
                    xs.push(q.x);
                }
            }
        }
        xs.retain(|x| x.abs() <= big_r);
        xs.sort_by(f64::total_cmp);
        xs.dedup_by(|a, b| (*a - *b).abs() < 1e-13);

        let chord_length = |x: f64| -> f64 {
            let mut ys = Vec::with_capacity(2 * circles.len());
            for &(c, r) in &circles {
                let dx = x - c.x;
                if dx.abs() < r {
                    let h = (r * r - dx * dx).sqrt();
                    ys.push(c.y - h);
                    ys.push(c.y + h);
                }
            }
            ys.sort_by(f64::total_cmp);
            let mut len = 0.0;
            for w in ys.windows(2) {
                if w[1] > w[0] {
                    let q = Point::new(x, 0.5 * (w[0] + w[1]));
                    if self.contains(q) && pred(q) {
                        len += w[1] - w[0];
                    }
                }
            }
            len
        };

        let panel_tol = tol / (xs.len() as f64);
        let mut value = 0.0;
        let mut error = 0.0;
        for w in xs.windows(2) {
            let (x0, x1) = (w[0], w[1]);
            let h = x1 - x0;
            let g = |t: f64| {
                let x = x0 + 0.5 * h * (1.0 - (PI * t).cos());
                chord_length(x) * 0.5 * h * PI * (PI * t).sin()
            };
            let (est, _) = quadrature::adaptive(g, 0.0, 1.0, panel_tol, 400);
            value += est.value;
            error += est.error;
        }
        if error > tol.max(REGION_TOLERANCE) {
            return Err(GeometryError::Quadrature { achieved: error, tol });
        }
        Ok((value, error))
    }
}
