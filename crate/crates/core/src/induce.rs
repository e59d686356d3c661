//! Induced cochains: `Γ(c)(g₀,…,gₙ) = ∫_M c(γ(g₀,x),…,γ(gₙ,x)) dμ(x)`.
//!
//! Two integrators are provided. Monte Carlo samples `M` uniformly. The
//! region integrator uses the closed form of `γ` on the three core regions
//! and on the outside, and samples only the collar.
//!
//! Sample `i` is drawn from the stream `(seed, domain, i)` and sums run over
//! fixed chunks in index order, so results do not depend on the worker count.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::cochains::{Cochain, CochainError, Quasimorphism};
use crate::eightmodel::{GeometryError, ModelGeometry, Point, RegionLabel, TransformationElement, DEFAULT_SAMPLES_PER_LETTER};
use crate::homotopy::{conjugator, gamma_piecewise, gamma_traced, CutSystem, HomotopyError};
use crate::rng::{self, Domain};
use crate::words::{Generator, Word};

const CHUNK: usize = 1024;
const PROBES: usize = 512;
const PROBES_FALLBACK: usize = 4096;
pub const MIN_POWERS: u32 = 4;
pub const MIN_IMAGE_SAMPLES: usize = 1000;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum InduceError {
    #[error(transparent)]
    Cochain(#[from] CochainError),
    #[error(transparent)]
    Homotopy(#[from] HomotopyError),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error("cochain of degree {degree} needs {expected} elements, got {got}")]
    Arity { degree: usize, expected: usize, got: usize },
    #[error("sample count must be at least {min}, got {got}")]
    TooFewSamples { min: usize, got: usize },
    #[error("powers must be at least {MIN_POWERS}, got {0}")]
    TooFewPowers(u32),
    #[error("quasimorphism must be homogeneous")]
    NotHomogeneous,
    #[error("worker pool: {0}")]
    Pool(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    Regions,
    MonteCarlo,
}

/// Integrator settings. In `Regions` mode `mc_samples` is the collar sample count.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Integrator {
    pub mode: Mode,
    pub mc_samples: usize,
    pub seed: u64,
    pub tolerance: f64,
    #[serde(default = "default_workers")]
    pub workers: usize,
}

/// `BCOH_THREADS` if set and positive, else the available parallelism.
pub fn default_workers() -> usize {
    std::env::var("BCOH_THREADS")
        .ok()
        .and_then(|s| s.trim().parse::<usize>().ok())
        .filter(|&n| n > 0)
        .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()))
}

impl Integrator {
    pub fn monte_carlo(mc_samples: usize, seed: u64) -> Integrator {
        Integrator {
            mode: Mode::MonteCarlo,
            mc_samples,
            seed,
            tolerance: 1e-6,
            workers: default_workers(),
        }
    }

    pub fn regions(collar_samples: usize, seed: u64) -> Integrator {
        Integrator {
            mode: Mode::Regions,
            ..Integrator::monte_carlo(collar_samples, seed)
        }
    }

    pub fn with_workers(self, workers: usize) -> Integrator {
        Integrator {
            workers: workers.max(1),
            ..self
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegionContribution {
    pub region: RegionLabel,
    pub measure: f64,
    pub contribution: f64,
    pub stat_error: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InducedValue {
    pub value: f64,
    /// Monte Carlo 1σ, plus quadrature error where applicable.
    pub stat_error: f64,
    /// `μ(collar) · max |integrand|` over the collar samples.
    pub collar_bound: f64,
    pub region_breakdown: Vec<RegionContribution>,
}

/// One constant piece of a region-exact evaluation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegionTerm {
    pub region: RegionLabel,
    pub words: Vec<Word>,
    /// Share of the region carrying these words.
    pub fraction: f64,
    /// `μ(region) · fraction`.
    pub weight: f64,
    pub cochain_value: f64,
}

/// Neumaier-compensated sum in slice order.
fn compensated_sum(xs: impl IntoIterator<Item = f64>) -> f64 {
    let (mut s, mut c) = (0.0f64, 0.0f64);
    for x in xs {
        let t = s + x;
        if s.abs() >= x.abs() {
            c += (s - t) + x;
        } else {
            c += (x - t) + s;
        }
        s = t;
    }
    s + c
}

fn pairwise_sum(xs: &[f64]) -> f64 {
    if xs.len() <= 8 {
        return compensated_sum(xs.iter().copied());
    }
    let (l, r) = xs.split_at(xs.len() / 2);
    pairwise_sum(l) + pairwise_sum(r)
}

/// Per-label sums, squared sums and the overall maximum of `|value|`.
#[derive(Debug, Clone, Copy, Default)]
struct Moments {
    sum: [f64; 5],
    sumsq: [f64; 5],
    max_abs: [f64; 5],
}

/// Evaluates `f(i)` for `i < n` and reduces in fixed chunks.
fn reduce_samples<F>(n: usize, workers: usize, f: F) -> Result<Moments, InduceError>
where
    F: Fn(u64) -> Result<(RegionLabel, f64), InduceError> + Sync,
{
    let chunks = n.div_ceil(CHUNK);
    let run = || -> Result<Vec<Moments>, InduceError> {
        (0..chunks)
            .into_par_iter()
            .map(|k| {
                let lo = k * CHUNK;
                let hi = (lo + CHUNK).min(n);
                let mut vals: Vec<(usize, f64)> = Vec::with_capacity(hi - lo);
                for i in lo..hi {
                    let (label, v) = f(i as u64)?;
                    vals.push((label as usize, v));
                }
                let mut m = Moments::default();
                for j in 0..5 {
                    let own = || vals.iter().filter(|(l, _)| *l == j).map(|(_, v)| *v);
                    m.sum[j] = compensated_sum(own());
                    m.sumsq[j] = compensated_sum(own().map(|v| v * v));
                    m.max_abs[j] = own().fold(0.0, |a, v| a.max(v.abs()));
                }
                Ok(m)
            })
            .collect()
    };
    let parts = rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .map_err(|e| InduceError::Pool(e.to_string()))?
        .install(run)?;
    let mut out = Moments::default();
    for j in 0..5 {
        out.sum[j] = pairwise_sum(&parts.iter().map(|m| m.sum[j]).collect::<Vec<_>>());
        out.sumsq[j] = pairwise_sum(&parts.iter().map(|m| m.sumsq[j]).collect::<Vec<_>>());
        out.max_abs[j] = parts.iter().fold(0.0, |a, m| a.max(m.max_abs[j]));
    }
    Ok(out)
}

/// Scaled mean and its 1σ error for a sample sum.
fn mean_and_error(scale: f64, sum: f64, sumsq: f64, n: usize) -> (f64, f64) {
    let nf = n as f64;
    let mean = sum / nf;
    let var = if n > 1 { ((sumsq - sum * mean) / (nf - 1.0)).max(0.0) } else { 0.0 };
    (scale * mean, scale * (var / nf).sqrt())
}

/// The model surface with its cut system, ready to induce cochains.
#[derive(Debug, Clone)]
pub struct Induction {
    geom: ModelGeometry,
    cuts: CutSystem,
    samples_per_letter: usize,
}

impl Induction {
    pub fn new(geom: ModelGeometry) -> Result<Induction, InduceError> {
        let cuts = CutSystem::new(&geom)?;
        Ok(Induction {
            geom,
            cuts,
            samples_per_letter: DEFAULT_SAMPLES_PER_LETTER,
        })
    }

    pub fn geometry(&self) -> &ModelGeometry {
        &self.geom
    }

    pub fn cuts(&self) -> &CutSystem {
        &self.cuts
    }

    pub fn gamma(&self, g: &TransformationElement, x: Point) -> Result<Word, InduceError> {
        Ok(gamma_traced(&self.geom, &self.cuts, g, x, self.samples_per_letter)?.word)
    }

    /// Uniform point of `M` by rejection from the bounding square.
    pub fn sample_manifold(&self, seed: u64, index: u64) -> Point {
        let mut rng = rng::stream(seed, Domain::Manifold, index);
        let r = self.geom.ambient_radius();
        loop {
            let p = Point::new(rng.gen_range(-r..r), rng.gen_range(-r..r));
            if self.geom.contains(p) {
                return p;
            }
        }
    }

    /// Uniform point of `N(α) ∪ N(β)` whose label satisfies `keep`.
    fn sample_tubes<F: Fn(RegionLabel) -> bool>(&self, domain: Domain, seed: u64, index: u64, keep: F) -> Point {
        let mut rng = rng::stream(seed, domain, index);
        let gens = [Generator::A, Generator::B];
        let annulus = gens.map(|g| {
            let (r, w) = (self.geom.core_radius(g), self.geom.half_width(g));
            (self.geom.hole_center(g), r - w, r + w)
        });
        let area = annulus.map(|(_, ri, ro)| PI * (ro * ro - ri * ri));
        loop {
            let i = usize::from(rng.gen::<f64>() * (area[0] + area[1]) >= area[0]);
            let (c, ri, ro) = annulus[i];
            let rho = (rng.gen::<f64>() * (ro * ro - ri * ri) + ri * ri).sqrt();
            let p = c + Point::new(rho, 0.0).rotated(rng.gen_range(0.0..2.0 * PI));
            let cover = gens.iter().filter(|g| self.geom.in_tube(**g, p)).count();
            if cover == 0 || (cover == 2 && rng.gen::<bool>()) {
                continue;
            }
            if keep(self.geom.classify_region(p)) {
                return p;
            }
        }
    }

    fn check_arity(c: &dyn Cochain, tuple: &[TransformationElement]) -> Result<(), InduceError> {
        let expected = c.degree() + 1;
        if tuple.len() != expected {
            return Err(InduceError::Arity {
                degree: c.degree(),
                expected,
                got: tuple.len(),
            });
        }
        Ok(())
    }

    fn integrand(&self, c: &dyn Cochain, tuple: &[TransformationElement], x: Point) -> Result<f64, InduceError> {
        let words = tuple.iter().map(|g| self.gamma(g, x)).collect::<Result<Vec<_>, _>>()?;
        Ok(c.eval(&words)?)
    }

    pub fn induce(&self, c: &dyn Cochain, tuple: &[TransformationElement], integ: &Integrator) -> Result<InducedValue, InduceError> {
        Self::check_arity(c, tuple)?;
        if integ.mc_samples < 2 {
            return Err(InduceError::TooFewSamples {
                min: 2,
                got: integ.mc_samples,
            });
        }
        match integ.mode {
            Mode::MonteCarlo => self.induce_mc(c, tuple, integ),
            Mode::Regions => self.induce_regions(c, tuple, integ),
        }
    }

    fn induce_mc(&self, c: &dyn Cochain, tuple: &[TransformationElement], integ: &Integrator) -> Result<InducedValue, InduceError> {
        let n = integ.mc_samples;
        let m = reduce_samples(n, integ.workers, |i| {
            let x = self.sample_manifold(integ.seed, i);
            Ok((self.geom.classify_region(x), self.integrand(c, tuple, x)?))
        })?;
        let area = self.geom.area();
        let (value, stat_error) = mean_and_error(area, pairwise_sum(&m.sum), pairwise_sum(&m.sumsq), n);
        let region_breakdown = RegionLabel::ALL
            .iter()
            .map(|&label| {
                let j = label as usize;
                let (contribution, err) = mean_and_error(area, m.sum[j], m.sumsq[j], n);
                RegionContribution {
                    region: label,
                    measure: self.geom.region_measure(label),
                    contribution,
                    stat_error: err,
                }
            })
            .collect();
        Ok(InducedValue {
            value,
            stat_error,
            collar_bound: self.geom.region_measure(RegionLabel::Collar) * m.max_abs[RegionLabel::Collar as usize],
            region_breakdown,
        })
    }

    /// Constant pieces of the integrand on the outside and the three core
    /// regions. A region whose word tuple varies across probes is split by
    /// probe frequency.
    pub fn region_terms(&self, c: &dyn Cochain, tuple: &[TransformationElement], seed: u64) -> Result<Vec<RegionTerm>, InduceError> {
        Self::check_arity(c, tuple)?;
        let mut terms = Vec::new();
        let identity = vec![Word::identity(); tuple.len()];
        let outside = self.geom.region_measure(RegionLabel::Outside);
        terms.push(RegionTerm {
            region: RegionLabel::Outside,
            cochain_value: c.eval(&identity)?,
            words: identity,
            fraction: 1.0,
            weight: outside,
        });
        for label in [RegionLabel::CoreBoth, RegionLabel::CoreAOnly, RegionLabel::CoreBOnly] {
            let measure = self.geom.region_measure(label);
            let probe = |count: usize| -> Result<BTreeMap<Vec<Word>, usize>, InduceError> {
                let mut seen = BTreeMap::new();
                for i in 0..count {
                    let x = self.sample_tubes(Domain::RegionProbe, seed, ((label as u64) << 40) + i as u64, |l| l == label);
                    let words = tuple
                        .iter()
                        .map(|g| gamma_piecewise(&self.geom, &self.cuts, g.word(), x))
                        .collect::<Result<Vec<_>, _>>()?;
                    *seen.entry(words).or_insert(0) += 1;
                }
                Ok(seen)
            };
            let mut seen = probe(PROBES)?;
            let mut total = PROBES;
            if seen.len() > 1 {
                seen = probe(PROBES_FALLBACK)?;
                total = PROBES_FALLBACK;
            }
            for (words, count) in seen {
                let fraction = count as f64 / total as f64;
                terms.push(RegionTerm {
                    region: label,
                    cochain_value: c.eval(&words)?,
                    words,
                    fraction,
                    weight: measure * fraction,
                });
            }
        }
        Ok(terms)
    }

    /// Collar integral by uniform sampling of the collar: `(value, 1σ, max |integrand|)`.
    fn collar_integral<F>(&self, integ: &Integrator, f: F) -> Result<(f64, f64, f64), InduceError>
    where
        F: Fn(Point) -> Result<f64, InduceError> + Sync,
    {
        let n = integ.mc_samples;
        let m = reduce_samples(n, integ.workers, |i| {
            let x = self.sample_tubes(Domain::Collar, integ.seed, i, |l| l == RegionLabel::Collar);
            Ok((RegionLabel::Collar, f(x)?))
        })?;
        let j = RegionLabel::Collar as usize;
        let mu = self.geom.region_measure(RegionLabel::Collar);
        let (v, e) = mean_and_error(mu, m.sum[j], m.sumsq[j], n);
        Ok((v, e, m.max_abs[j]))
    }

    fn induce_regions(&self, c: &dyn Cochain, tuple: &[TransformationElement], integ: &Integrator) -> Result<InducedValue, InduceError> {
        let terms = self.region_terms(c, tuple, integ.seed)?;
        let mut region_breakdown = Vec::new();
        let mut value = 0.0;
        let mut stat_error_sq = 0.0;
        for label in [RegionLabel::Outside, RegionLabel::CoreBoth, RegionLabel::CoreAOnly, RegionLabel::CoreBOnly] {
            let own: Vec<&RegionTerm> = terms.iter().filter(|t| t.region == label).collect();
            let measure = self.geom.region_measure(label);
            let contribution = compensated_sum(own.iter().map(|t| t.weight * t.cochain_value));
            // Split regions carry the multinomial error of their probe frequencies.
            let err = if own.len() > 1 {
                let mean = contribution / measure;
                let var = own.iter().map(|t| t.fraction * (t.cochain_value - mean).powi(2)).sum::<f64>();
                measure * (var / PROBES_FALLBACK as f64).sqrt()
            } else {
                0.0
            };
            value += contribution;
            stat_error_sq += err * err;
            region_breakdown.push(RegionContribution {
                region: label,
                measure,
                contribution,
                stat_error: err,
            });
        }
        let (collar, collar_err, collar_max) = self.collar_integral(integ, |x| self.integrand(c, tuple, x))?;
        value += collar;
        stat_error_sq += collar_err * collar_err;
        let mu_b = self.geom.region_measure(RegionLabel::Collar);
        region_breakdown.push(RegionContribution {
            region: RegionLabel::Collar,
            measure: mu_b,
            contribution: collar,
            stat_error: collar_err,
        });
        let quad = self.geom.region_measure_error() * c.sup_bound().unwrap_or(0.0);
        Ok(InducedValue {
            value,
            stat_error: stat_error_sq.sqrt() + quad,
            collar_bound: mu_b * collar_max,
            region_breakdown,
        })
    }

    /// `Φ(gᵖ)/p` with `Φ(h) = ∫ q(γ(h,x)) dμ(x)`.
    pub fn induced_quasimorphism(
        &self,
        q: &Quasimorphism,
        g: &TransformationElement,
        integ: &Integrator,
        powers: u32,
    ) -> Result<InducedValue, InduceError> {
        if !q.is_homogeneous() {
            return Err(InduceError::NotHomogeneous);
        }
        if powers < MIN_POWERS {
            return Err(InduceError::TooFewPowers(powers));
        }
        if integ.mc_samples < 2 {
            return Err(InduceError::TooFewSamples {
                min: 2,
                got: integ.mc_samples,
            });
        }
        let gp = g.pow(powers);
        let p = powers as f64;
        let per_point = |x: Point| -> Result<f64, InduceError> { Ok(q.eval(&self.gamma(&gp, x)?)) };
        match integ.mode {
            Mode::MonteCarlo => {
                let n = integ.mc_samples;
                let m = reduce_samples(n, integ.workers, |i| {
                    let x = self.sample_manifold(integ.seed, i);
                    Ok((self.geom.classify_region(x), per_point(x)?))
                })?;
                let area = self.geom.area();
                let (v, e) = mean_and_error(area, pairwise_sum(&m.sum), pairwise_sum(&m.sumsq), n);
                let region_breakdown = RegionLabel::ALL
                    .iter()
                    .map(|&label| {
                        let j = label as usize;
                        let (c, err) = mean_and_error(area, m.sum[j], m.sumsq[j], n);
                        RegionContribution {
                            region: label,
                            measure: self.geom.region_measure(label),
                            contribution: c / p,
                            stat_error: err / p,
                        }
                    })
                    .collect();
                Ok(InducedValue {
                    value: v / p,
                    stat_error: e / p,
                    collar_bound: self.geom.region_measure(RegionLabel::Collar) * m.max_abs[RegionLabel::Collar as usize] / p,
                    region_breakdown,
                })
            }
            Mode::Regions => {
                let w = g.word();
                let core = [
                    (RegionLabel::CoreBoth, q.eval(w)),
                    (RegionLabel::CoreAOnly, q.eval(&w.retract(Generator::A))),
                    (RegionLabel::CoreBOnly, q.eval(&w.retract(Generator::B))),
                ];
                let mut region_breakdown = vec![RegionContribution {
                    region: RegionLabel::Outside,
                    measure: self.geom.region_measure(RegionLabel::Outside),
                    contribution: 0.0,
                    stat_error: 0.0,
                }];
                let mut value = 0.0;
                for (label, qv) in core {
                    let measure = self.geom.region_measure(label);
                    value += measure * qv;
                    region_breakdown.push(RegionContribution {
                        region: label,
                        measure,
                        contribution: measure * qv,
                        stat_error: 0.0,
                    });
                }
                let (collar, err, max) = self.collar_integral(integ, per_point)?;
                let mu_b = self.geom.region_measure(RegionLabel::Collar);
                region_breakdown.push(RegionContribution {
                    region: RegionLabel::Collar,
                    measure: mu_b,
                    contribution: collar / p,
                    stat_error: err / p,
                });
                let quad = self.geom.region_measure_error() * core.iter().fold(0.0f64, |a, (_, v)| a.max(v.abs()));
                Ok(InducedValue {
                    value: value + collar / p,
                    stat_error: err / p + quad,
                    collar_bound: mu_b * max / p,
                    region_breakdown,
                })
            }
        }
    }

    /// `μ(A_ε)q(w) + μ(A^a_ε)q(h_a w) + μ(A^b_ε)q(h_b w)`.
    pub fn core_closed_form(&self, q: &Quasimorphism, w: &Word) -> f64 {
        self.geom.region_measure(RegionLabel::CoreBoth) * q.eval(w)
            + self.geom.region_measure(RegionLabel::CoreAOnly) * q.eval(&w.retract(Generator::A))
            + self.geom.region_measure(RegionLabel::CoreBOnly) * q.eval(&w.retract(Generator::B))
    }

    /// Distinct values of `γ(g, ·)` over uniform samples of `M`, with frequencies,
    /// most frequent first.
    pub fn essential_image(&self, g: &TransformationElement, samples: usize, seed: u64) -> Result<Vec<(Word, f64)>, InduceError> {
        self.image_by(g, samples, |i| self.sample_manifold(seed, i))
    }

    /// As [`Induction::essential_image`], restricted to the collar.
    pub fn collar_image(&self, g: &TransformationElement, samples: usize, seed: u64) -> Result<Vec<(Word, f64)>, InduceError> {
        self.image_by(g, samples, |i| self.sample_tubes(Domain::Collar, seed, i, |l| l == RegionLabel::Collar))
    }

    fn image_by<S>(&self, g: &TransformationElement, samples: usize, sample: S) -> Result<Vec<(Word, f64)>, InduceError>
    where
        S: Fn(u64) -> Point,
    {
        if samples < MIN_IMAGE_SAMPLES {
            return Err(InduceError::TooFewSamples {
                min: MIN_IMAGE_SAMPLES,
                got: samples,
            });
        }
        let mut counts: BTreeMap<Word, usize> = BTreeMap::new();
        for i in 0..samples as u64 {
            *counts.entry(self.gamma(g, sample(i))?).or_insert(0) += 1;
        }
        let mut out: Vec<(Word, f64)> = counts.into_iter().map(|(w, k)| (w, k as f64 / samples as f64)).collect();
        out.sort_by(|a, b| b.1.total_cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
        Ok(out)
    }

    /// The conjugator of the closed form at `x`, for reporting.
    pub fn conjugator(&self, x: Point) -> Result<Word, InduceError> {
        Ok(conjugator(&self.geom, &self.cuts, x)?)
    }
}
