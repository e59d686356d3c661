//! Hyperbolic 3-space in the Klein ball model, isometric actions of the free
//! group by Lorentz matrices, signed volumes of geodesic simplices, and the
//! degree-3 volume cocycle.
//!
//! Geodesic simplices are Euclidean simplices in the Klein model, so the
//! hyperbolic volume is the integral of `(1 − |x|²)⁻²` over a Euclidean
//! tetrahedron. The tetrahedron is written as a signed sum of four cones from
//! the origin; along each cone ray the integral has a closed form, which
//! leaves an adaptive Duffy-collapsed Gauss–Legendre quadrature over each face.

use std::cmp::Ordering;
use std::collections::{BinaryHeap, HashMap};
use std::sync::{Arc, RwLock};

use nalgebra::{Matrix4, Vector3, Vector4};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::cochains::{Cochain, CochainError};
use crate::quadrature::GaussLegendre;
use crate::words::{Letter, Word};

/// Volume of the regular ideal tetrahedron, the supremum of geodesic simplex volumes.
pub const IDEAL_SIMPLEX_VOLUME: f64 = 1.014_941_606_409_653_6;

pub const DEFAULT_VOLUME_TOL: f64 = 1e-6;

const BALL_MARGIN: f64 = 1e-14;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum VolumeError {
    #[error("point {0:?} is not strictly inside the unit ball")]
    OutsideBall([f64; 3]),
    #[error("isometry moved a point to Klein radius {radius}; action and basepoint are unsuitable")]
    EscapedBall { radius: f64 },
    #[error("matrix does not preserve the Lorentz form (deviation {0:e})")]
    NotLorentz(f64),
    #[error("matrix reverses orientation or swaps the hyperboloid sheets")]
    NotOrientationPreserving,
    #[error("translation length must be positive, got {0}")]
    NonPositiveTranslation(f64),
    #[error("tolerance must be positive, got {0}")]
    BadTolerance(f64),
    #[error("quadrature did not converge: achieved error {achieved:e} > tolerance {tol:e}")]
    NonConvergence { achieved: f64, tol: f64 },
}

impl From<VolumeError> for CochainError {
    fn from(e: VolumeError) -> Self {
        CochainError::Numeric(e.to_string())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KleinPoint(Vector3<f64>);

impl KleinPoint {
    pub fn new(x: f64, y: f64, z: f64) -> Result<KleinPoint, VolumeError> {
        let v = Vector3::new(x, y, z);
        if v.norm_squared() < 1.0 && v.iter().all(|c| c.is_finite()) {
            Ok(KleinPoint(v))
        } else {
            Err(VolumeError::OutsideBall([x, y, z]))
        }
    }

    pub fn origin() -> KleinPoint {
        KleinPoint(Vector3::zeros())
    }

    pub fn coords(&self) -> [f64; 3] {
        [self.0.x, self.0.y, self.0.z]
    }

    pub fn vector(&self) -> &Vector3<f64> {
        &self.0
    }

    /// Unit-hyperboloid lift `(1, x)/√(1 − |x|²)`.
    pub fn lift(&self) -> Vector4<f64> {
        let s = 1.0 / (1.0 - self.0.norm_squared()).sqrt();
        Vector4::new(s, s * self.0.x, s * self.0.y, s * self.0.z)
    }
}

fn lorentz_dot(a: &Vector4<f64>, b: &Vector4<f64>) -> f64 {
    -a[0] * b[0] + a[1] * b[1] + a[2] * b[2] + a[3] * b[3]
}

/// Hyperbolic distance through the Lorentz inner product of the lifts.
pub fn distance(p: &KleinPoint, q: &KleinPoint) -> f64 {
    let c = -lorentz_dot(&p.lift(), &q.lift());
    c.max(1.0).acosh()
}

fn minkowski() -> Matrix4<f64> {
    Matrix4::from_diagonal(&Vector4::new(-1.0, 1.0, 1.0, 1.0))
}

/// Orientation-preserving isometry of H³ as a matrix on the upper hyperboloid sheet.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Isometry(Matrix4<f64>);

impl Isometry {
    pub fn new(m: Matrix4<f64>) -> Result<Isometry, VolumeError> {
        let j = minkowski();
        let scale = m.amax().max(1.0).powi(2);
        let dev = (m.transpose() * j * m - j).amax();
        if dev > 1e-12 * scale {
            return Err(VolumeError::NotLorentz(dev));
        }
        if m.determinant() <= 0.0 || m[(0, 0)] <= 0.0 {
            return Err(VolumeError::NotOrientationPreserving);
        }
        Ok(Isometry(m))
    }

    pub fn identity() -> Isometry {
        Isometry(Matrix4::identity())
    }

    pub fn matrix(&self) -> &Matrix4<f64> {
        &self.0
    }

    /// Hyperbolic translation of length `t` along the coordinate axis `axis` ∈ {0,1,2}.
    pub fn boost(axis: usize, t: f64) -> Isometry {
        let mut m = Matrix4::identity();
        let k = axis + 1;
        m[(0, 0)] = t.cosh();
        m[(k, k)] = t.cosh();
        m[(0, k)] = t.sinh();
        m[(k, 0)] = t.sinh();
        Isometry(m)
    }

    /// Rotation by `angle` about the coordinate axis `axis` ∈ {0,1,2}.
    pub fn rotation(axis: usize, angle: f64) -> Isometry {
        let mut m = Matrix4::identity();
        let (i, j) = match axis {
            0 => (2, 3),
            1 => (3, 1),
            _ => (1, 2),
        };
        let (s, c) = angle.sin_cos();
        m[(i, i)] = c;
        m[(j, j)] = c;
        m[(i, j)] = -s;
        m[(j, i)] = s;
        Isometry(m)
    }

    pub fn compose(&self, other: &Isometry) -> Isometry {
        Isometry(self.0 * other.0)
    }

    /// `J Mᵀ J`, exact for Lorentz matrices.
    pub fn inverse(&self) -> Isometry {
        let j = minkowski();
        Isometry(j * self.0.transpose() * j)
    }

    pub fn apply(&self, p: &KleinPoint) -> Result<KleinPoint, VolumeError> {
        let y = self.0 * p.lift();
        let k = Vector3::new(y[1] / y[0], y[2] / y[0], y[3] / y[0]);
        let r = k.norm();
        if !(r < 1.0 - BALL_MARGIN) || y[0] <= 0.0 {
            return Err(VolumeError::EscapedBall { radius: r });
        }
        Ok(KleinPoint(k))
    }
}

/// Isometric action of F₂, memoizing word matrices.
#[derive(Debug)]
pub struct GroupAction {
    gen_a: Isometry,
    gen_b: Isometry,
    memo: RwLock<HashMap<Word, Isometry>>,
}

impl GroupAction {
    pub fn new(gen_a: Isometry, gen_b: Isometry) -> GroupAction {
        GroupAction {
            gen_a,
            gen_b,
            memo: RwLock::new(HashMap::new()),
        }
    }

    pub fn generator(&self, l: Letter) -> Isometry {
        match l {
            Letter::A => self.gen_a,
            Letter::AInv => self.gen_a.inverse(),
            Letter::B => self.gen_b,
            Letter::BInv => self.gen_b.inverse(),
        }
    }

    pub fn matrix(&self, w: &Word) -> Isometry {
        if let Some(m) = self.memo.read().unwrap().get(w) {
            return *m;
        }
        let m = w
            .letters()
            .iter()
            .fold(Isometry::identity(), |acc, l| acc.compose(&self.generator(*l)));
        self.memo.write().unwrap().insert(w.clone(), m);
        m
    }
}

/// Parameters of [`loxodromic_pair`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ActionParams {
    pub translation_length: f64,
    pub rotation_angle: f64,
    pub axis_separation: f64,
}

impl Default for ActionParams {
    fn default() -> Self {
        ActionParams {
            translation_length: 1.0,
            rotation_angle: 0.7,
            axis_separation: 1.0,
        }
    }
}

/// `a` translates along the first coordinate axis through the origin and
/// rotates about it; `b` does the same along an axis parallel to the second
/// coordinate direction, at distance `axis_separation` along the third.
pub fn loxodromic_pair(
    translation_length: f64,
    rotation_angle: f64,
    axis_separation: f64,
) -> Result<GroupAction, VolumeError> {
    if !(translation_length > 0.0) {
        return Err(VolumeError::NonPositiveTranslation(translation_length));
    }
    let a = Isometry::boost(0, translation_length).compose(&Isometry::rotation(0, rotation_angle));
    let b0 = Isometry::boost(1, translation_length).compose(&Isometry::rotation(1, rotation_angle));
    let shift = Isometry::boost(2, axis_separation);
    let b = shift.compose(&b0).compose(&shift.inverse());
    Ok(GroupAction::new(Isometry::new(a.0)?, Isometry::new(b.0)?))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VolumeEstimate {
    pub value: f64,
    pub error: f64,
}

/// `∫₀¹ t² (1 − s²t²)⁻² dt`, the radial cone integral at Klein radius `s`.
fn radial_integral(s2: f64) -> f64 {
    if s2 < 0.25 {
        let mut sum = 0.0;
        let mut pow = 1.0;
        for k in 0..60 {
            let term = (k as f64 + 1.0) / (2.0 * k as f64 + 3.0) * pow;
            sum += term;
            if term < 1e-18 {
                break;
            }
            pow *= s2;
        }
        sum
    } else {
        let s = s2.sqrt();
        let one_minus = (1.0 - s2).max(f64::EPSILON);
        (s / (2.0 * one_minus) - 0.5 * s.atanh()) / (s2 * s)
    }
}

struct Panel {
    verts: [[f64; 2]; 3],
    value: f64,
    error: f64,
}

impl PartialEq for Panel {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}
impl Eq for Panel {}
impl PartialOrd for Panel {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Panel {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

struct FaceIntegrator<'a> {
    origin: Vector3<f64>,
    e1: Vector3<f64>,
    e2: Vector3<f64>,
    hi: &'a GaussLegendre,
    lo: &'a GaussLegendre,
}

impl FaceIntegrator<'_> {
    fn point(&self, u: f64, v: f64) -> Vector3<f64> {
        self.origin + self.e1 * u + self.e2 * v
    }

    fn rule(&self, verts: &[[f64; 2]; 3], g: &GaussLegendre) -> f64 {
        // Collapse the Duffy square at the vertex nearest the sphere.
        let r2 = |p: &[f64; 2]| self.point(p[0], p[1]).norm_squared();
        let apex = (0..3)
            .max_by(|&i, &j| r2(&verts[i]).total_cmp(&r2(&verts[j])))
            .unwrap();
        let v0 = verts[apex];
        let v1 = verts[(apex + 1) % 3];
        let v2 = verts[(apex + 2) % 3];
        let d1 = [v1[0] - v0[0], v1[1] - v0[1]];
        let d2 = [v2[0] - v1[0], v2[1] - v1[1]];
        let jac = (d1[0] * d2[1] - d1[1] * d2[0]).abs();
        let mut sum = 0.0;
        for (xi, wx) in g.nodes.iter().zip(&g.weights) {
            let mut inner = 0.0;
            for (eta, wy) in g.nodes.iter().zip(&g.weights) {
                let u = v0[0] + xi * (d1[0] + eta * d2[0]);
                let v = v0[1] + xi * (d1[1] + eta * d2[1]);
                inner += wy * radial_integral(self.point(u, v).norm_squared());
            }
            sum += wx * xi * inner;
        }
        sum * jac
    }

    fn panel(&self, verts: [[f64; 2]; 3]) -> Panel {
        let value = self.rule(&verts, self.hi);
        let error = (value - self.rule(&verts, self.lo)).abs();
        Panel {
            verts,
            value,
            error,
        }
    }
}

/// `∫` over the unit parameter triangle of the radial integral at `p + u(q−p) + v(r−p)`.
/// The signed cone volume over the face `(p, q, r)` is `det(p, q, r)` times this.
fn cone_factor(p: &Vector3<f64>, q: &Vector3<f64>, r: &Vector3<f64>, tol: f64) -> Result<VolumeEstimate, VolumeError> {
    thread_local! {
        static RULES: (GaussLegendre, GaussLegendre) = (GaussLegendre::new(9), GaussLegendre::new(5));
    }
    RULES.with(|(hi, lo)| {
        let fi = FaceIntegrator {
            origin: *p,
            e1: q - p,
            e2: r - p,
            hi,
            lo,
        };
        let mut heap = BinaryHeap::new();
        let root = fi.panel([[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]]);
        let mut error = root.error;
        heap.push(root);
        let mut splits = 0;
        while error > tol {
            if splits > 6000 {
                return Err(VolumeError::NonConvergence { achieved: error, tol });
            }
            let worst = heap.pop().unwrap();
            error -= worst.error;
            let [a, b, c] = worst.verts;
            let mid = |x: [f64; 2], y: [f64; 2]| [0.5 * (x[0] + y[0]), 0.5 * (x[1] + y[1])];
            let (ab, bc, ca) = (mid(a, b), mid(b, c), mid(c, a));
            for verts in [[a, ab, ca], [ab, b, bc], [ca, bc, c], [ab, bc, ca]] {
                let child = fi.panel(verts);
                error += child.error;
                heap.push(child);
            }
            splits += 1;
            if splits % 64 == 0 {
                // Re-sum to shed accumulated cancellation error.
                error = heap.iter().map(|p| p.error).sum();
            }
        }
        let value = heap.iter().map(|p| p.value).sum();
        let error = heap.iter().map(|p| p.error).sum();
        Ok(VolumeEstimate { value, error })
    })
}

fn det3(a: &Vector3<f64>, b: &Vector3<f64>, c: &Vector3<f64>) -> f64 {
    a.dot(&b.cross(c))
}

/// Signed hyperbolic volume of the geodesic simplex spanned by four Klein points.
/// Positive when `det(v₁−v₀, v₂−v₀, v₃−v₀) > 0`; exactly zero for degenerate input.
pub fn simplex_signed_volume(v: &[KleinPoint; 4], tol: f64) -> Result<VolumeEstimate, VolumeError> {
    if !(tol > 0.0) {
        return Err(VolumeError::BadTolerance(tol));
    }
    let p: Vec<Vector3<f64>> = v.iter().map(|k| k.0).collect();
    let (e1, e2, e3) = (p[1] - p[0], p[2] - p[0], p[3] - p[0]);
    let euclid = det3(&e1, &e2, &e3);
    let scale = e1.norm() * e2.norm() * e3.norm();
    if euclid == 0.0 || euclid.abs() <= 64.0 * f64::EPSILON * scale {
        return Ok(VolumeEstimate {
            value: 0.0,
            error: 0.0,
        });
    }
    let mut value = 0.0;
    let mut error = 0.0;
    for skip in 0..4 {
        let f: Vec<&Vector3<f64>> = (0..4).filter(|&i| i != skip).map(|i| &p[i]).collect();
        let d = det3(f[0], f[1], f[2]);
        if d == 0.0 {
            continue;
        }
        let cone = cone_factor(f[0], f[1], f[2], tol / (8.0 * d.abs().max(1e-300)))?;
        let sign = if skip % 2 == 0 { 1.0 } else { -1.0 };
        value += sign * d * cone.value;
        error += d.abs() * cone.error;
    }
    Ok(VolumeEstimate { value, error })
}

/// `c(a₁,…,a₄) = vol Δ(ρ(a₁⁻¹)x, …, ρ(a₄⁻¹)x)`, right-invariant.
pub struct VolumeCocycle {
    action: Arc<GroupAction>,
    basepoint: KleinPoint,
    tol: f64,
    memo: RwLock<HashMap<Vec<Word>, VolumeEstimate>>,
}

pub fn volume_cocycle(action: Arc<GroupAction>, basepoint: KleinPoint, tol: f64) -> Result<VolumeCocycle, VolumeError> {
    if !(tol > 0.0) {
        return Err(VolumeError::BadTolerance(tol));
    }
    Ok(VolumeCocycle {
        action,
        basepoint,
        tol,
        memo: RwLock::new(HashMap::new()),
    })
}

impl VolumeCocycle {
    pub fn tolerance(&self) -> f64 {
        self.tol
    }

    pub fn action(&self) -> &GroupAction {
        &self.action
    }

    pub fn vertex(&self, w: &Word) -> Result<KleinPoint, VolumeError> {
        self.action.matrix(&w.inverse()).apply(&self.basepoint)
    }

    pub fn eval_detailed(&self, args: &[Word]) -> Result<VolumeEstimate, CochainError> {
        self.check_arity(args)?;
        if let Some(v) = self.memo.read().unwrap().get(args) {
            return Ok(*v);
        }
        let verts = [
            self.vertex(&args[0])?,
            self.vertex(&args[1])?,
            self.vertex(&args[2])?,
            self.vertex(&args[3])?,
        ];
        let est = simplex_signed_volume(&verts, self.tol)?;
        self.memo.write().unwrap().insert(args.to_vec(), est);
        Ok(est)
    }
}

impl Cochain for VolumeCocycle {
    fn degree(&self) -> usize {
        3
    }

    fn eval(&self, args: &[Word]) -> Result<f64, CochainError> {
        Ok(self.eval_detailed(args)?.value)
    }

    fn sup_bound(&self) -> Option<f64> {
        Some(IDEAL_SIMPLEX_VOLUME)
    }
}
