//! Reading `γ(g, x) ∈ F₂` off based loops.
//!
//! The loop is the chord `z → x`, the isotopy trajectory of `x` under `g`,
//! and the chord `g(x) → z`. Its class in the plane minus the two hole
//! centers (homotopy equivalent to the model surface) is spelled by signed
//! crossings of two cut rays, one from each hole center pointing away from
//! the other. Under the multiplication convention `u·v` = "`v` first", the
//! word is the reversed crossing sequence.

use std::f64::consts::PI;

use thiserror::Error;

use crate::eightmodel::{ModelGeometry, Point, RegionLabel, TransformationElement, DEFAULT_SAMPLES_PER_LETTER};
use crate::words::{reduce, Generator, Letter, Word};

/// Crossings closer than this to a ray origin are rejected.
pub const DEGENERACY_RADIUS: f64 = 1e-12;
pub const MAX_PERTURBATIONS: u32 = 8;
const PERTURBATION_STEP: Point = Point::new(1e-9, 1.3e-9);

#[derive(Debug, Clone, PartialEq, Error)]
pub enum HomotopyError {
    #[error("path passes within {DEGENERACY_RADIUS:e} of the puncture at {0:?}")]
    Degenerate(Point),
    #[error("loop must start and end at the basepoint")]
    NotClosed,
    #[error("point {0:?} lies in the collar, where no closed form applies")]
    CollarInput(Point),
    #[error("point {0:?} lies in no tube core")]
    NotInCore(Point),
    #[error("basepoint lies on cut ray {0}")]
    BasepointOnRay(Generator),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Ray {
    pub origin: Point,
    /// Unit direction.
    pub direction: Point,
    /// Read when crossing from the right of `direction` to its left.
    pub letter: Letter,
}

impl Ray {
    fn side(&self, p: Point) -> bool {
        self.direction.cross(p - self.origin) >= 0.0
    }

    /// Signed crossing of the segment `p → q`, with the side test half-open so
    /// that consecutive segments never double count a vertex on the ray.
    fn crossing(&self, p: Point, q: Point) -> Result<Option<Letter>, HomotopyError> {
        let (lp, lq) = (self.side(p), self.side(q));
        if lp == lq {
            return Ok(None);
        }
        // Intersect with the left endpoint first so both traversal directions agree.
        let (a, b) = if lp { (p, q) } else { (q, p) };
        let sa = self.direction.cross(a - self.origin);
        let sb = self.direction.cross(b - self.origin);
        let hit = a + (b - a) * (sa / (sa - sb));
        let rel = hit - self.origin;
        if rel.norm() <= DEGENERACY_RADIUS {
            return Err(HomotopyError::Degenerate(self.origin));
        }
        if self.direction.dot(rel) <= 0.0 {
            return Ok(None);
        }
        Ok(Some(if lq { self.letter } else { self.letter.inverse() }))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CutSystem {
    pub rays: [Ray; 2],
    basepoint: Point,
}

impl CutSystem {
    pub fn new(geom: &ModelGeometry) -> Result<CutSystem, HomotopyError> {
        let ca = geom.hole_center(Generator::A);
        let cb = geom.hole_center(Generator::B);
        let u = (ca - cb) * (1.0 / ca.dist(cb));
        let rays = [
            Ray {
                origin: ca,
                direction: u,
                letter: Letter::A,
            },
            Ray {
                origin: cb,
                direction: u * -1.0,
                letter: Letter::B,
            },
        ];
        let z = geom.basepoint();
        for (ray, g) in rays.iter().zip([Generator::A, Generator::B]) {
            let rel = z - ray.origin;
            let along = ray.direction.dot(rel);
            let off = if along > 0.0 { ray.direction.cross(rel).abs() } else { rel.norm() };
            if off < 1e-9 {
                return Err(HomotopyError::BasepointOnRay(g));
            }
        }
        Ok(CutSystem { rays, basepoint: z })
    }

    pub fn ray(&self, g: Generator) -> &Ray {
        match g {
            Generator::A => &self.rays[0],
            Generator::B => &self.rays[1],
        }
    }

    pub fn basepoint(&self) -> Point {
        self.basepoint
    }

    /// Signed crossings of an open polyline, in traversal order.
    pub fn crossings(&self, path: &[Point]) -> Result<Vec<Letter>, HomotopyError> {
        let mut out = Vec::new();
        for seg in path.windows(2) {
            let mut hits: Vec<(f64, Letter)> = Vec::new();
            for ray in &self.rays {
                if let Some(l) = ray.crossing(seg[0], seg[1])? {
                    let s0 = ray.direction.cross(seg[0] - ray.origin);
                    let s1 = ray.direction.cross(seg[1] - ray.origin);
                    hits.push((s0 / (s0 - s1), l));
                }
            }
            hits.sort_by(|x, y| x.0.total_cmp(&y.0));
            out.extend(hits.into_iter().map(|h| h.1));
        }
        Ok(out)
    }
}

/// A closed polyline through the basepoint.
#[derive(Debug, Clone, PartialEq)]
pub struct BasedLoop {
    points: Vec<Point>,
}

impl BasedLoop {
    pub fn new(points: Vec<Point>, basepoint: Point) -> Result<BasedLoop, HomotopyError> {
        if points.first() != Some(&basepoint) || points.last() != Some(&basepoint) {
            return Err(HomotopyError::NotClosed);
        }
        Ok(BasedLoop { points })
    }

    pub fn points(&self) -> &[Point] {
        &self.points
    }
}

pub fn loop_class(cuts: &CutSystem, lp: &BasedLoop) -> Result<Word, HomotopyError> {
    let mut letters = cuts.crossings(lp.points())?;
    letters.reverse();
    Ok(reduce(letters))
}

/// `γ(g, x)` together with the point actually traced.
#[derive(Debug, Clone, PartialEq)]
pub struct GammaTrace {
    pub word: Word,
    pub point: Point,
    /// Number of perturbation steps applied to reach general position.
    pub perturbations: u32,
}

fn trace_once(
    geom: &ModelGeometry,
    cuts: &CutSystem,
    g: &TransformationElement,
    x: Point,
    samples_per_letter: usize,
) -> Result<Word, HomotopyError> {
    let z = cuts.basepoint();
    let mut pts = Vec::with_capacity(2 + samples_per_letter * g.len());
    pts.push(z);
    pts.extend(geom.trajectory(g, x, samples_per_letter));
    pts.push(z);
    loop_class(cuts, &BasedLoop { points: pts })
}

pub fn gamma_traced(
    geom: &ModelGeometry,
    cuts: &CutSystem,
    g: &TransformationElement,
    x: Point,
    samples_per_letter: usize,
) -> Result<GammaTrace, HomotopyError> {
    let mut last_err = None;
    for k in 0..=MAX_PERTURBATIONS {
        let p = x + PERTURBATION_STEP * k as f64;
        match trace_once(geom, cuts, g, p, samples_per_letter) {
            Ok(word) => {
                return Ok(GammaTrace {
                    word,
                    point: p,
                    perturbations: k,
                })
            }
            Err(e @ HomotopyError::Degenerate(_)) => last_err = Some(e),
            Err(e) => return Err(e),
        }
    }
    Err(last_err.unwrap())
}

/// `γ(g, x)` with the default trajectory sampling.
pub fn gamma(geom: &ModelGeometry, cuts: &CutSystem, g: &TransformationElement, x: Point) -> Result<Word, HomotopyError> {
    Ok(gamma_traced(geom, cuts, g, x, DEFAULT_SAMPLES_PER_LETTER)?.word)
}

fn core_generator(label: RegionLabel) -> Option<Generator> {
    match label {
        RegionLabel::CoreBoth | RegionLabel::CoreAOnly => Some(Generator::A),
        RegionLabel::CoreBOnly => Some(Generator::B),
        _ => None,
    }
}

/// Class of the loop running from `z` along a core circle to the angle of `x`
/// (never crossing that tube's own ray), radially out to `x`, then by chord back to `z`.
pub fn conjugator(geom: &ModelGeometry, cuts: &CutSystem, x: Point) -> Result<Word, HomotopyError> {
    let label = geom.classify_region(x);
    let g = match label {
        RegionLabel::Collar => return Err(HomotopyError::CollarInput(x)),
        _ => core_generator(label).ok_or(HomotopyError::NotInCore(x))?,
    };
    let c = geom.hole_center(g);
    let r = geom.core_radius(g);
    let ray_angle = cuts.ray(g).direction.angle();
    let phase = |p: Point| ((p - c).angle() - ray_angle).rem_euclid(2.0 * PI);
    let z = cuts.basepoint();
    let (pz, px) = (phase(z), phase(x));
    let delta = px - pz;
    let n = ((delta.abs() / (2.0 * PI) * 64.0).ceil() as usize).max(8);
    let mut pts = vec![z];
    for k in 1..=n {
        let th = ray_angle + pz + delta * k as f64 / n as f64;
        pts.push(c + Point::new(r, 0.0).rotated(th));
    }
    pts.push(x);
    pts.push(z);
    loop_class(cuts, &BasedLoop { points: pts })
}

/// Closed form of `γ(ρ_ε(w), x)` off the collar: `u·t(w)·u⁻¹` with `t` the
/// identity on the double core and the retraction onto the acting generator
/// on a single core.
pub fn gamma_piecewise(geom: &ModelGeometry, cuts: &CutSystem, w: &Word, x: Point) -> Result<Word, HomotopyError> {
    let t = match geom.classify_region(x) {
        RegionLabel::Outside => return Ok(Word::identity()),
        RegionLabel::Collar => return Err(HomotopyError::CollarInput(x)),
        RegionLabel::CoreBoth => w.clone(),
        RegionLabel::CoreAOnly => w.retract(Generator::A),
        RegionLabel::CoreBOnly => w.retract(Generator::B),
    };
    if t.is_identity() {
        return Ok(t);
    }
    Ok(t.conjugate_by(&conjugator(geom, cuts, x)?))
}

/// Sampled `max |γ(g,x)| / |g|` over the given points; the word-length constant.
pub fn word_length_ratio(
    geom: &ModelGeometry,
    cuts: &CutSystem,
    g: &TransformationElement,
    points: &[Point],
) -> Result<f64, HomotopyError> {
    if g.is_empty() {
        return Ok(0.0);
    }
    let mut worst = 0usize;
    for &x in points {
        worst = worst.max(gamma(geom, cuts, g, x)?.len());
    }
    Ok(worst as f64 / g.len() as f64)
}
