//! Homogeneous cochains on the free group, the coboundary operator, Brooks
//! counting quasimorphisms and their bounded 2-cocycles.
//!
//! Homogeneity is right-invariance: `c(g₀h, …, gₙh) = c(g₀, …, gₙ)`.

use std::fmt;
use std::sync::Arc;

use rand::Rng;
use thiserror::Error;

use crate::rng::{self, Domain};
use crate::words::{Generator, Word};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CochainError {
    #[error("cochain of degree {degree} takes {expected} arguments, got {got}")]
    Arity {
        degree: usize,
        expected: usize,
        got: usize,
    },
    #[error("quasimorphism must be homogeneous with a finite defect bound")]
    NotHomogeneous,
    #[error("Brooks pattern must be a nonempty word")]
    EmptyPattern,
    #[error("numerical failure: {0}")]
    Numeric(String),
}

/// A degree-`n` homogeneous cochain, evaluated on `n + 1` words.
pub trait Cochain: Send + Sync {
    fn degree(&self) -> usize;

    fn eval(&self, args: &[Word]) -> Result<f64, CochainError>;

    /// A proven bound on `|eval|`, if one is known.
    fn sup_bound(&self) -> Option<f64>;

    fn check_arity(&self, args: &[Word]) -> Result<(), CochainError> {
        let expected = self.degree() + 1;
        if args.len() == expected {
            Ok(())
        } else {
            Err(CochainError::Arity {
                degree: self.degree(),
                expected,
                got: args.len(),
            })
        }
    }
}

pub type SharedCochain = Arc<dyn Cochain>;

impl<C: Cochain + ?Sized> Cochain for &C {
    fn degree(&self) -> usize {
        (**self).degree()
    }
    fn eval(&self, args: &[Word]) -> Result<f64, CochainError> {
        (**self).eval(args)
    }
    fn sup_bound(&self) -> Option<f64> {
        (**self).sup_bound()
    }
}

impl<C: Cochain + ?Sized> Cochain for Arc<C> {
    fn degree(&self) -> usize {
        (**self).degree()
    }
    fn eval(&self, args: &[Word]) -> Result<f64, CochainError> {
        (**self).eval(args)
    }
    fn sup_bound(&self) -> Option<f64> {
        (**self).sup_bound()
    }
}

#[derive(Debug, Clone, Copy)]
pub struct ConstantCochain {
    pub degree: usize,
    pub value: f64,
}

impl ConstantCochain {
    pub fn zero(degree: usize) -> Self {
        ConstantCochain { degree, value: 0.0 }
    }
}

impl Cochain for ConstantCochain {
    fn degree(&self) -> usize {
        self.degree
    }
    fn eval(&self, args: &[Word]) -> Result<f64, CochainError> {
        self.check_arity(args)?;
        Ok(self.value)
    }
    fn sup_bound(&self) -> Option<f64> {
        Some(self.value.abs())
    }
}

/// Cochain backed by a closure. Homogeneity is the caller's responsibility.
pub struct FnCochain {
    degree: usize,
    sup_bound: Option<f64>,
    f: Box<dyn Fn(&[Word]) -> f64 + Send + Sync>,
}

impl FnCochain {
    pub fn new<F>(degree: usize, sup_bound: Option<f64>, f: F) -> Self
    where
        F: Fn(&[Word]) -> f64 + Send + Sync + 'static,
    {
        FnCochain {
            degree,
            sup_bound,
            f: Box::new(f),
        }
    }
}

impl Cochain for FnCochain {
    fn degree(&self) -> usize {
        self.degree
    }
    fn eval(&self, args: &[Word]) -> Result<f64, CochainError> {
        self.check_arity(args)?;
        Ok((self.f)(args))
    }
    fn sup_bound(&self) -> Option<f64> {
        self.sup_bound
    }
}

/// `dc(g₀,…,gₙ₊₁) = Σᵢ (−1)ⁱ c(g₀,…,ĝᵢ,…,gₙ₊₁)`.
pub struct Coboundary<C> {
    inner: C,
}

pub fn coboundary<C: Cochain>(c: C) -> Coboundary<C> {
    Coboundary { inner: c }
}

impl<C: Cochain> Cochain for Coboundary<C> {
    fn degree(&self) -> usize {
        self.inner.degree() + 1
    }

    fn eval(&self, args: &[Word]) -> Result<f64, CochainError> {
        self.check_arity(args)?;
        let mut face: Vec<Word> = Vec::with_capacity(args.len() - 1);
        let mut total = 0.0;
        for i in 0..args.len() {
            face.clear();
            face.extend(
                args.iter()
                    .enumerate()
                    .filter(|(j, _)| *j != i)
                    .map(|(_, w)| w.clone()),
            );
            let v = self.inner.eval(&face)?;
            if i % 2 == 0 {
                total += v;
            } else {
                total -= v;
            }
        }
        Ok(total)
    }

    fn sup_bound(&self) -> Option<f64> {
        self.inner
            .sup_bound()
            .map(|b| b * (self.inner.degree() + 2) as f64)
    }
}

/// `c − c(e,…,e)`, so the normalized cochain vanishes on the identity tuple.
pub struct Normalized<C> {
    inner: C,
    offset: f64,
}

pub fn normalized<C: Cochain>(c: C) -> Result<Normalized<C>, CochainError> {
    let identity = vec![Word::identity(); c.degree() + 1];
    let offset = c.eval(&identity)?;
    Ok(Normalized { inner: c, offset })
}

impl<C: Cochain> Cochain for Normalized<C> {
    fn degree(&self) -> usize {
        self.inner.degree()
    }
    fn eval(&self, args: &[Word]) -> Result<f64, CochainError> {
        Ok(self.inner.eval(args)? - self.offset)
    }
    fn sup_bound(&self) -> Option<f64> {
        self.inner.sup_bound().map(|b| b + self.offset.abs())
    }
}

#[derive(Clone)]
enum QmKind {
    Brooks { pattern: Word },
    ExponentSum(Generator),
    Custom(Arc<dyn Fn(&Word) -> f64 + Send + Sync>),
}

/// A real-valued quasimorphism on the free group.
#[derive(Clone)]
pub struct Quasimorphism {
    kind: QmKind,
    defect_bound: Option<f64>,
    homogeneous: bool,
}

impl fmt::Debug for Quasimorphism {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let kind = match &self.kind {
            QmKind::Brooks { pattern } => format!("brooks({pattern})"),
            QmKind::ExponentSum(g) => format!("exponent_sum({g})"),
            QmKind::Custom(_) => "custom".to_string(),
        };
        f.debug_struct("Quasimorphism")
            .field("kind", &kind)
            .field("defect_bound", &self.defect_bound)
            .field("homogeneous", &self.homogeneous)
            .finish()
    }
}

/// Number of starting positions `i` in the bi-infinite periodic word `…core core…`
/// (one period) at which `pattern` reads.
fn cyclic_occurrences(core: &[crate::words::Letter], pattern: &[crate::words::Letter]) -> usize {
    let n = core.len();
    (0..n)
        .filter(|&i| pattern.iter().enumerate().all(|(j, l)| core[(i + j) % n] == *l))
        .count()
}

impl Quasimorphism {
    /// Homogenized Brooks counting quasimorphism of `pattern`, evaluated exactly
    /// on the cyclic core.
    pub fn brooks_homogeneous(pattern: &Word) -> Result<Quasimorphism, CochainError> {
        if pattern.is_identity() {
            return Err(CochainError::EmptyPattern);
        }
        // Counting defect is at most 3(|p|−1); homogenization at most doubles it.
        let defect = 6.0 * (pattern.len() as f64 - 1.0);
        Ok(Quasimorphism {
            kind: QmKind::Brooks {
                pattern: pattern.clone(),
            },
            defect_bound: Some(defect),
            homogeneous: true,
        })
    }

    pub fn exponent_sum(g: Generator) -> Quasimorphism {
        Quasimorphism {
            kind: QmKind::ExponentSum(g),
            defect_bound: Some(0.0),
            homogeneous: true,
        }
    }

    pub fn custom<F>(f: F, defect_bound: Option<f64>, homogeneous: bool) -> Quasimorphism
    where
        F: Fn(&Word) -> f64 + Send + Sync + 'static,
    {
        Quasimorphism {
            kind: QmKind::Custom(Arc::new(f)),
            defect_bound,
            homogeneous,
        }
    }

    pub fn defect_bound(&self) -> Option<f64> {
        self.defect_bound
    }

    pub fn is_homogeneous(&self) -> bool {
        self.homogeneous
    }

    pub fn pattern(&self) -> Option<&Word> {
        match &self.kind {
            QmKind::Brooks { pattern } => Some(pattern),
            _ => None,
        }
    }

    pub fn eval(&self, w: &Word) -> f64 {
        match &self.kind {
            QmKind::Brooks { pattern } => {
                let (core, _) = w.cyclically_reduce();
                if core.is_identity() {
                    return 0.0;
                }
                let inv = pattern.inverse();
                let pos = cyclic_occurrences(core.letters(), pattern.letters());
                let neg = cyclic_occurrences(core.letters(), inv.letters());
                pos as f64 - neg as f64
            }
            QmKind::ExponentSum(g) => w.exponent_sum(*g) as f64,
            QmKind::Custom(f) => f(w),
        }
    }
}

/// Lower bound for the defect `sup |q(u) + q(v) − q(uv)|` from `samples` random
/// pairs of length at most `max_len`. Sample `i` is fixed by its index, so the
/// estimate is nondecreasing in `samples`.
pub fn defect_estimate(q: &Quasimorphism, max_len: usize, samples: usize) -> f64 {
    let mut best: f64 = 0.0;
    for i in 0..samples {
        let mut rng = rng::stream(0x5eed_defe, Domain::WordPairs, i as u64);
        let u = Word::random_up_to(&mut rng, max_len);
        let v = Word::random_up_to(&mut rng, max_len);
        let d = (q.eval(&u) + q.eval(&v) - q.eval(&u.multiply(&v))).abs();
        best = best.max(d);
    }
    best
}

/// The bounded 2-cocycle `c(g₀,g₁,g₂) = q(g₀g₁⁻¹) + q(g₁g₂⁻¹) − q(g₀g₂⁻¹)` of a
/// homogeneous quasimorphism; it is the coboundary of `(g₀,g₁) ↦ q(g₀g₁⁻¹)`.
#[derive(Clone, Debug)]
pub struct QuasimorphismCocycle {
    q: Quasimorphism,
    bound: f64,
}

pub fn qm_to_two_cocycle(q: &Quasimorphism) -> Result<QuasimorphismCocycle, CochainError> {
    match q.defect_bound {
        Some(bound) if q.homogeneous => Ok(QuasimorphismCocycle {
            q: q.clone(),
            bound,
        }),
        _ => Err(CochainError::NotHomogeneous),
    }
}

impl QuasimorphismCocycle {
    pub fn quasimorphism(&self) -> &Quasimorphism {
        &self.q
    }
}

impl Cochain for QuasimorphismCocycle {
    fn degree(&self) -> usize {
        2
    }

    fn eval(&self, args: &[Word]) -> Result<f64, CochainError> {
        self.check_arity(args)?;
        let (g0, g1, g2) = (&args[0], &args[1], &args[2]);
        let q = |x: &Word, y: &Word| self.q.eval(&x.multiply(&y.inverse()));
        Ok(q(g0, g1) + q(g1, g2) - q(g0, g2))
    }

    fn sup_bound(&self) -> Option<f64> {
        Some(self.bound)
    }
}

/// Random `(degree+1)`-tuple of words, each of length at most `max_len`.
pub fn random_tuple<R: Rng + ?Sized>(rng: &mut R, arity: usize, max_len: usize) -> Vec<Word> {
    (0..arity).map(|_| Word::random_up_to(rng, max_len)).collect()
}

/// Sampled `sup |c|`; a lower bound for the sup norm.
pub fn sup_norm_estimate<C: Cochain + ?Sized>(
    c: &C,
    max_len: usize,
    samples: usize,
) -> Result<f64, CochainError> {
    let mut best: f64 = 0.0;
    for i in 0..samples {
        let mut rng = rng::stream(0x05ee_d5a9, Domain::Tuples, i as u64);
        let args = random_tuple(&mut rng, c.degree() + 1, max_len);
        best = best.max(c.eval(&args)?.abs());
    }
    Ok(best)
}

/// Largest `|c(g₀h,…,gₙh) − c(g₀,…,gₙ)|` over `trials` random tuples and
/// translations.
pub fn homogeneity_defect<C: Cochain + ?Sized>(
    c: &C,
    trials: usize,
    max_len: usize,
    seed: u64,
) -> Result<f64, CochainError> {
    let mut worst: f64 = 0.0;
    for i in 0..trials {
        let mut rng = rng::stream(seed, Domain::Tuples, i as u64);
        let args = random_tuple(&mut rng, c.degree() + 1, max_len);
        let h = Word::random_up_to(&mut rng, max_len);
        let shifted: Vec<Word> = args.iter().map(|g| g.multiply(&h)).collect();
        worst = worst.max((c.eval(&shifted)? - c.eval(&args)?).abs());
    }
    Ok(worst)
}

/// Largest `|dc|` over `trials` random `(degree+2)`-tuples.
pub fn cocycle_defect<C: Cochain>(
    c: C,
    trials: usize,
    max_len: usize,
    seed: u64,
) -> Result<f64, CochainError> {
    let dc = coboundary(c);
    let mut worst: f64 = 0.0;
    for i in 0..trials {
        let mut rng = rng::stream(seed, Domain::Tuples, (1 << 32) + i as u64);
        let args = random_tuple(&mut rng, dc.degree() + 1, max_len);
        worst = worst.max(dc.eval(&args)?.abs());
    }
    Ok(worst)
}
