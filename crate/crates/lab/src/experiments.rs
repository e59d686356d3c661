//! The convergence sweep, the volume-class evaluation and smaller tables.

use bcoh_core::eightmodel::{ModelGeometry, RegionLabel, TransformationElement};
use bcoh_core::hypervol::IDEAL_SIMPLEX_VOLUME;
use bcoh_core::induce::{InducedValue, Induction, Integrator, Mode, RegionContribution};
use bcoh_core::{Generator, Quasimorphism, Word};
use serde::{Deserialize, Serialize};

use crate::config::{CochainDescriptor, ExperimentConfig};
use crate::LabError;

/// Collar samples used to measure the largest `|q|` on the collar image.
pub const COLLAR_IMAGE_SAMPLES: usize = 20_000;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceRow {
    pub word: TransformationElement,
    pub epsilon: f64,
    pub mu_core_both: f64,
    pub mu_core_a: f64,
    pub mu_core_b: f64,
    pub mu_collar: f64,
    /// `μ(N(α) ∩ N(β))`, the full tube overlap.
    pub mu_tube_overlap: f64,
    pub induced: f64,
    pub stat_error: f64,
    pub core_closed_form: f64,
    /// `|induced − core_closed_form|`.
    pub discrepancy: f64,
    /// `μ(collar) · Q` with `Q` the largest `|q|` seen on the collar image.
    pub collar_bound: f64,
}

impl ConvergenceRow {
    pub fn holds(&self) -> bool {
        self.discrepancy <= self.collar_bound + 3.0 * self.stat_error + 1e-12
    }
}

/// One row per word and ladder entry, words outermost, each word in ladder order.
pub fn converge_sweep(cfg: &ExperimentConfig) -> Result<Vec<ConvergenceRow>, LabError> {
    cfg.validate()?;
    let q = cfg.cochain.quasimorphism()?;
    let base = cfg.model()?;
    let inductions = cfg
        .epsilon_ladder
        .iter()
        .map(|&eps| Ok((eps, Induction::new(base.at_epsilon(eps)?)?)))
        .collect::<Result<Vec<_>, LabError>>()?;
    let mut rows = Vec::with_capacity(cfg.words.len() * inductions.len());
    for g in &cfg.words {
        for (eps, ind) in &inductions {
            rows.push(convergence_row(ind, &q, g, *eps, cfg)?);
        }
    }
    Ok(rows)
}

fn convergence_row(
    ind: &Induction,
    q: &Quasimorphism,
    g: &TransformationElement,
    epsilon: f64,
    cfg: &ExperimentConfig,
) -> Result<ConvergenceRow, LabError> {
    let geom = ind.geometry();
    let v = ind.induced_quasimorphism(q, g, &cfg.integrator, cfg.powers)?;
    let core = ind.core_closed_form(q, g.word());
    let mu_collar = geom.region_measure(RegionLabel::Collar);
    let q_max = collar_q_max(ind, q, g, cfg.powers, cfg.integrator.seed)?;
    Ok(ConvergenceRow {
        word: g.clone(),
        epsilon,
        mu_core_both: geom.region_measure(RegionLabel::CoreBoth),
        mu_core_a: geom.region_measure(RegionLabel::CoreAOnly),
        mu_core_b: geom.region_measure(RegionLabel::CoreBOnly),
        mu_collar,
        mu_tube_overlap: tube_overlap(geom)?,
        induced: v.value,
        stat_error: v.stat_error,
        core_closed_form: core,
        discrepancy: (v.value - core).abs(),
        collar_bound: (mu_collar * q_max).max(v.collar_bound),
    })
}

/// Largest `|q(γ(gᵖ, x))| / p` over a dedicated sample of the collar.
pub fn collar_q_max(ind: &Induction, q: &Quasimorphism, g: &TransformationElement, powers: u32, seed: u64) -> Result<f64, LabError> {
    let image = ind.collar_image(&g.pow(powers), COLLAR_IMAGE_SAMPLES, seed)?;
    Ok(image.iter().fold(0.0f64, |m, (w, _)| m.max(q.eval(w).abs())) / powers as f64)
}

pub fn tube_overlap(geom: &ModelGeometry) -> Result<f64, LabError> {
    Ok(geom.area_where(|p| geom.in_tube(Generator::A, p) && geom.in_tube(Generator::B, p))?)
}

/// Induced quasimorphism values for each configured word at the geometry's own `ε`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QmRow {
    pub word: TransformationElement,
    pub epsilon: f64,
    pub induced: f64,
    pub stat_error: f64,
    pub core_closed_form: f64,
    pub collar_bound: f64,
}

pub fn qm_table(cfg: &ExperimentConfig) -> Result<Vec<QmRow>, LabError> {
    cfg.validate()?;
    let q = cfg.cochain.quasimorphism()?;
    let ind = Induction::new(cfg.model()?)?;
    cfg.words
        .iter()
        .map(|g| {
            let v = ind.induced_quasimorphism(&q, g, &cfg.integrator, cfg.powers)?;
            Ok(QmRow {
                word: g.clone(),
                epsilon: ind.geometry().epsilon(),
                induced: v.value,
                stat_error: v.stat_error,
                core_closed_form: ind.core_closed_form(&q, g.word()),
                collar_bound: v.collar_bound,
            })
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VolumeTerm {
    pub region: RegionLabel,
    pub words: Vec<Word>,
    /// `μ(region) · share of the region carrying these words`.
    pub weight: f64,
    pub volume: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VolumeReport {
    pub epsilon: f64,
    pub tuple: Vec<TransformationElement>,
    pub terms: Vec<VolumeTerm>,
    /// `Σ weight · volume` over the core regions.
    pub core_total: f64,
    pub collar: RegionContribution,
    pub total: f64,
    pub stat_error: f64,
    pub monte_carlo: InducedValue,
}

impl VolumeReport {
    pub fn agrees_with_monte_carlo(&self) -> bool {
        let sigma = self.stat_error.hypot(self.monte_carlo.stat_error);
        (self.total - self.monte_carlo.value).abs() <= 3.0 * sigma + 1e-12
    }

    pub fn within_volume_bound(&self, area: f64) -> bool {
        self.total.abs() <= IDEAL_SIMPLEX_VOLUME * area
    }
}

/// Finite weighted sum of simplex volumes for a 4-tuple, cross-checked by Monte Carlo.
pub fn volume_class_eval(cfg: &ExperimentConfig, tuple: &[TransformationElement]) -> Result<VolumeReport, LabError> {
    cfg.validate()?;
    if !matches!(cfg.cochain, CochainDescriptor::Vol3 { .. }) {
        return Err(LabError::Config(format!("volume evaluation needs a vol3 cochain, got {}", cfg.cochain.kind())));
    }
    if tuple.len() != 4 {
        return Err(LabError::Config(format!("volume evaluation needs 4 elements, got {}", tuple.len())));
    }
    let c = cfg.cochain.build()?;
    let ind = Induction::new(cfg.model()?)?;
    let integ = cfg.integrator;
    let terms: Vec<VolumeTerm> = ind
        .region_terms(&*c, tuple, integ.seed)?
        .into_iter()
        .map(|t| VolumeTerm {
            region: t.region,
            words: t.words,
            weight: t.weight,
            volume: t.cochain_value,
        })
        .collect();
    let regions = ind.induce(&*c, tuple, &Integrator { mode: Mode::Regions, ..integ })?;
    let monte_carlo = ind.induce(&*c, tuple, &Integrator { mode: Mode::MonteCarlo, ..integ })?;
    let collar = regions
        .region_breakdown
        .iter()
        .find(|r| r.region == RegionLabel::Collar)
        .cloned()
        .ok_or_else(|| LabError::Invariant("regions breakdown has no collar entry".into()))?;
    Ok(VolumeReport {
        epsilon: ind.geometry().epsilon(),
        tuple: tuple.to_vec(),
        core_total: regions.value - collar.contribution,
        terms,
        collar,
        total: regions.value,
        stat_error: regions.stat_error,
        monte_carlo,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegionRow {
    pub epsilon: f64,
    pub region: RegionLabel,
    pub measure: f64,
}

/// Region measures at each `ε`, followed by the check that they sum to `area(M)`.
pub fn regions_table(base: &ModelGeometry, epsilons: &[f64]) -> Result<Vec<RegionRow>, LabError> {
    let mut rows = Vec::new();
    for &eps in epsilons {
        let geom = base.at_epsilon(eps)?;
        let sum: f64 = RegionLabel::ALL.iter().map(|&l| geom.region_measure(l)).sum();
        if (sum - geom.area()).abs() > 5e-8 {
            return Err(LabError::Invariant(format!(
                "region measures sum to {sum}, area is {} at epsilon {eps}",
                geom.area()
            )));
        }
        rows.extend(RegionLabel::ALL.iter().map(|&region| RegionRow {
            epsilon: eps,
            region,
            measure: geom.region_measure(region),
        }));
    }
    Ok(rows)
}
