//! Scenario catalog, configuration parsing, verification pipelines, and
//! report emission for the command-line driver.

use std::collections::BTreeMap;
use std::rc::Rc;
use std::time::Instant;

use num_bigint::BigInt;
use num_complex::Complex64;
use num_traits::{Signed, Zero};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::bundlegeom::{check_primitivity, curvature_report, generator_primitive, GeneratorScenario};
use crate::cech::{
    bockstein, circle_nerve, circle_times_sphere2_nerve, circle_times_sphere2_twist, dd_cocycle,
    nerve_class_coordinates, nerve_cohomology, sphere2_nerve, torus2_nerve, torus3_nerve,
    CechCochain, CoeffGroup, Nerve,
};
use crate::cherncalc::{bott_index_comparison, grr_check, twisted_index_comparison};
use crate::fiberops::{index_idempotent, parametrix, random_kernel, toeplitz_winding};
use crate::forms::DiffScheme;
use crate::mesh::{ChartPoint, Factor, Mesh};
use crate::sclquant::{
    det_winding, odd_scl_index, scl_composition_defect, sigma_scl, thom_isotropic_check,
    OddSymbolFamily, SclSymbol, DEFAULT_EPS_GRID,
};
use crate::simplicial::IntCochain;
use crate::twistedderham::{random_2_cochain, s1xs2_model, twisted_dims};
use crate::{Error, Result};

pub const SCHEMA_VERSION: u32 = 1;

// ---------------------------------------------------------------------------
// configuration
// ---------------------------------------------------------------------------

fn default_resolution() -> u32 {
    1
}
fn default_fiber_points() -> usize {
    12
}
fn default_cutoff() -> usize {
    5
}
fn default_one() -> i64 {
    1
}

/// One scenario instance.  Unknown keys are rejected; integers must meet
/// their documented minima (`validate`).
#[derive(Serialize, Deserialize, Clone, Debug)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub name: String,
    /// catalog tag of the base space: circle | s2 | t2 | t3 | s1xs2
    pub base: String,
    /// refinement level / discretization scale (pipeline-specific, ≥ 1)
    #[serde(default = "default_resolution")]
    pub resolution: u32,
    /// sample count on circle factors (≥ 8)
    #[serde(default = "default_fiber_points")]
    pub fiber_points: usize,
    /// Fourier / band cutoff (≥ 3)
    #[serde(rename = "N", default = "default_cutoff")]
    pub n: usize,
    /// winding of the circle-valued base map
    #[serde(default = "default_one")]
    pub u_winding: i64,
    /// monopole bundle degree
    #[serde(default = "default_one")]
    pub bundle_degree: i64,
    /// fiber symbol winding for quantized families
    #[serde(default = "default_one")]
    pub symbol_winding: i64,
    /// named tolerance overrides; every name must be a residual the chosen
    /// pipeline actually checks
    #[serde(default)]
    pub tolerances: BTreeMap<String, f64>,
    #[serde(default)]
    pub seed: u64,
}

pub const BASE_TAGS: [&str; 5] = ["circle", "s2", "t2", "t3", "s1xs2"];

impl ScenarioConfig {
    pub fn from_json(text: &str) -> Result<ScenarioConfig> {
        let cfg: ScenarioConfig = serde_json::from_str(text)
            .map_err(|e| Error::validation(format!("config parse: {e}")))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.name.is_empty() {
            return Err(Error::validation("name must be non-empty"));
        }
        if !BASE_TAGS.contains(&self.base.as_str()) {
            return Err(Error::validation(format!(
                "unknown base tag {:?}; catalog: {:?}",
                self.base, BASE_TAGS
            )));
        }
        if self.resolution < 1 {
            return Err(Error::validation("resolution must be ≥ 1"));
        }
        if self.fiber_points < 8 {
            return Err(Error::validation("fiber_points must be ≥ 8"));
        }
        if self.n < 3 {
            return Err(Error::validation("N must be ≥ 3"));
        }
        for (k, v) in &self.tolerances {
            if !(v.is_finite() && *v > 0.0) {
                return Err(Error::validation(format!(
                    "tolerance {k:?} must be a positive real"
                )));
            }
        }
        Ok(())
    }

    fn tol(&self, name: &str, default: f64) -> f64 {
        *self.tolerances.get(name).unwrap_or(&default)
    }
}

// ---------------------------------------------------------------------------
// reports
// ---------------------------------------------------------------------------

/// Machine-readable outcome of one pipeline run.  `results` holds named
/// values (integers, rationals as "p/q" strings, reals), `residuals` the
/// named sup-defects compared against tolerances, `pass` one flag per
/// criterion.
#[derive(Serialize, Clone, Debug)]
pub struct Report {
    pub schema_version: u32,
    pub subcommand: String,
    pub scenario: ScenarioConfig,
    pub results: BTreeMap<String, Value>,
    pub residuals: BTreeMap<String, f64>,
    pub pass: BTreeMap<String, bool>,
    pub runtime_ms: u128,
}

impl Report {
    fn new(subcommand: &str, cfg: &ScenarioConfig) -> Report {
        Report {
            schema_version: SCHEMA_VERSION,
            subcommand: subcommand.to_string(),
            scenario: cfg.clone(),
            results: BTreeMap::new(),
            residuals: BTreeMap::new(),
            pass: BTreeMap::new(),
            runtime_ms: 0,
        }
    }

    pub fn all_pass(&self) -> bool {
        self.pass.values().all(|&b| b)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serialization")
    }
}

pub const SUBCOMMANDS: [&str; 8] = [
    "cech-h",
    "dd-class",
    "twisted-derham",
    "family-index",
    "index-compare",
    "scl-check",
    "thom-check",
    "grr",
];

/// Runs one pipeline.  Validation failures surface as `Error::Validation`
/// (CLI exit 2), computation failures as other variants (exit 1).
pub fn run(subcommand: &str, cfg: &ScenarioConfig) -> Result<Report> {
    cfg.validate()?;
    let started = Instant::now();
    let mut report = Report::new(subcommand, cfg);
    match subcommand {
        "grr" => run_grr(cfg, &mut report)?,
        "cech-h" => run_cech_h(cfg, &mut report)?,
        "dd-class" => run_dd_class(cfg, &mut report)?,
        "twisted-derham" => run_twisted_derham(cfg, &mut report)?,
        "family-index" => run_family_index(cfg, &mut report)?,
        "index-compare" => run_index_compare(cfg, &mut report)?,
        "scl-check" => run_scl_check(cfg, &mut report)?,
        "thom-check" => run_thom_check(cfg, &mut report)?,
        other => {
            return Err(Error::validation(format!(
                "unknown subcommand {other:?}; available: {SUBCOMMANDS:?}"
            )))
        }
    }
    // every tolerance named in the config must have been checked
    for name in cfg.tolerances.keys() {
        if !report.residuals.contains_key(name) {
            return Err(Error::validation(format!(
                "tolerance {name:?} does not name a residual of the {subcommand} pipeline \
                 (checked: {:?})",
                report.residuals.keys().collect::<Vec<_>>()
            )));
        }
    }
    report.runtime_ms = started.elapsed().as_millis();
    Ok(report)
}

// ---------------------------------------------------------------------------
// pipelines
// ---------------------------------------------------------------------------

fn run_grr(_cfg: &ScenarioConfig, rep: &mut Report) -> Result<()> {
    let grr = grr_check(6)?;
    let todd: Vec<String> = grr
        .todd
        .coefficients
        .iter()
        .take(3)
        .map(|c| c.to_string())
        .collect();
    let expected_todd = ["1", "1/2", "1/12"];
    rep.results.insert("todd_coefficients".into(), json!(todd));
    rep.results.insert(
        "degree4_coefficient".into(),
        json!(grr.degree4_coefficient.to_string()),
    );
    rep.results.insert(
        "determinant_relation".into(),
        json!([grr.mmm_relation.0.to_string(), grr.mmm_relation.1.to_string()]),
    );
    rep.pass.insert(
        "todd_exact".into(),
        todd.iter().map(String::as_str).eq(expected_todd),
    );
    rep.pass.insert(
        "degree4_exact".into(),
        grr.degree4_coefficient.to_string() == "13/12",
    );
    rep.pass.insert(
        "determinant_relation_exact".into(),
        grr.mmm_relation.1.to_string() == "13",
    );
    Ok(())
}

fn catalog_nerve(tag: &str) -> Result<(Nerve, Vec<usize>)> {
    Ok(match tag {
        "circle" => (circle_nerve(), vec![1, 1]),
        "s2" => (sphere2_nerve(), vec![1, 0, 1]),
        "t2" => (torus2_nerve(), vec![1, 2, 1]),
        "t3" => (torus3_nerve(), vec![1, 3, 3, 1]),
        "s1xs2" => (circle_times_sphere2_nerve(), vec![1, 1, 1, 1]),
        other => return Err(Error::validation(format!("no nerve for base {other:?}"))),
    })
}

fn run_cech_h(cfg: &ScenarioConfig, rep: &mut Report) -> Result<()> {
    let (nerve, betti) = catalog_nerve(&cfg.base)?;
    let mut ranks = Vec::new();
    let mut torsion_free = true;
    for k in 0..betti.len() {
        let h = nerve_cohomology(&nerve, k, CoeffGroup::Integer)?;
        torsion_free &= h.torsion.is_empty();
        ranks.push(h.free_rank);
    }
    rep.results.insert("betti_numbers".into(), json!(ranks));
    rep.results.insert("expected".into(), json!(betti));
    rep.pass.insert("betti_match".into(), ranks == betti);
    rep.pass.insert("torsion_free".into(), torsion_free);
    Ok(())
}

fn run_dd_class(cfg: &ScenarioConfig, rep: &mut Report) -> Result<()> {
    if cfg.base != "s1xs2" {
        return Err(Error::validation(
            "dd-class runs on the s1xs2 generator scenario",
        ));
    }
    // discrete side: Dixmier–Douady cocycle, Bockstein, cup product
    let data = circle_times_sphere2_twist(cfg.u_winding, cfg.bundle_degree)?;
    let d = dd_cocycle(&data.u, &data.c, &data.nerve)?;
    if !d.is_cocycle(&data.nerve) {
        return Err(Error::computation("dd cocycle failed the cocycle identity"));
    }
    let z = bockstein(&d, &data.nerve, None)?;
    let cup_ab = data.alpha.cup(&data.beta, data.nerve.complex());
    let zc = nerve_class_coordinates(&data.nerve, &CechCochain::from_int(z))?;
    let cc = nerve_class_coordinates(&data.nerve, &CechCochain::from_int(cup_ab))?;
    let class: Vec<String> = zc.iter().map(|b| b.to_string()).collect();
    rep.results.insert("dd_class_coordinates".into(), json!(class));
    rep.results.insert(
        "cup_class_coordinates".into(),
        json!(cc.iter().map(|b| b.to_string()).collect::<Vec<_>>()),
    );
    let expected = BigInt::from(cfg.u_winding) * BigInt::from(cfg.bundle_degree);
    rep.pass.insert("bockstein_equals_cup".into(), zc == cc);
    rep.pass.insert(
        "class_coordinate_expected".into(),
        zc.len() == 1 && zc[0].clone().abs() == expected.abs(),
    );

    // geometric side: primitive structure and curvature identities of the
    // realizing bundle at `resolution` refinement levels
    let sc = GeneratorScenario {
        degree: cfg.bundle_degree,
        winding: cfg.u_winding,
        ..GeneratorScenario::default()
    };
    let finest = generator_primitive(&sc, cfg.resolution - 1)?;
    let prim = check_primitivity(&finest);
    rep.results.insert(
        "transition_defect".into(),
        json!(prim.transition_defect.to_string()),
    );
    rep.results.insert(
        "associativity_defect".into(),
        json!(prim.associativity_defect.to_string()),
    );
    rep.residuals
        .insert("connection_defect".into(), prim.connection_defect);
    rep.pass.insert(
        "primitivity_exact".into(),
        prim.transition_defect.is_zero() && prim.associativity_defect.is_zero(),
    );
    rep.pass.insert(
        "connection_defect_small".into(),
        prim.connection_defect <= cfg.tol("connection_defect", 1e-9),
    );
    let curv = curvature_report(&sc, cfg.resolution)?;
    rep.residuals.insert(
        "mu_exactness".into(),
        *curv.mu_exactness.residuals.last().unwrap(),
    );
    rep.residuals
        .insert("descent".into(), *curv.descent.residuals.last().unwrap());
    rep.residuals.insert("flux_defect".into(), curv.flux_defect);
    rep.pass.insert(
        "flux_integral".into(),
        curv.flux_defect <= cfg.tol("flux_defect", 1e-9),
    );
    if cfg.resolution >= 3 {
        let min_slope = cfg.tol("min_slope", 1.5);
        rep.results
            .insert("mu_exactness_slope".into(), json!(curv.mu_exactness.slope()));
        rep.results
            .insert("descent_slope".into(), json!(curv.descent.slope()));
        rep.pass.insert(
            "curvature_slopes".into(),
            curv.mu_exactness.passes(min_slope) && curv.descent.passes(min_slope),
        );
    }
    Ok(())
}

fn run_twisted_derham(cfg: &ScenarioConfig, rep: &mut Report) -> Result<()> {
    if cfg.base != "s1xs2" {
        return Err(Error::validation(
            "twisted-derham runs on the s1xs2 generator scenario",
        ));
    }
    let mut dims = Vec::new();
    for level in [cfg.resolution - 1, cfg.resolution] {
        let m = s1xs2_model(3, level)?;
        let zero = IntCochain {
            degree: 3,
            values: vec![BigInt::zero(); m.complex.simplex_count(3)],
        };
        let un = twisted_dims(&m.complex, &zero)?;
        let tw = twisted_dims(&m.complex, &m.delta_bar)?;
        if un.threshold_ambiguous || tw.threshold_ambiguous {
            return Err(Error::computation(
                "rank threshold ambiguous; refine the complex",
            ));
        }
        dims.push((level, un.even, un.odd, tw.even, tw.odd));
    }
    rep.results.insert(
        "dimensions".into(),
        json!(dims
            .iter()
            .map(|d| json!({
                "level": d.0,
                "untwisted": [d.1, d.2],
                "twisted": [d.3, d.4]
            }))
            .collect::<Vec<_>>()),
    );
    let finest = dims.last().unwrap();
    rep.pass.insert(
        "untwisted_2_2".into(),
        dims.iter().all(|d| d.1 == 2 && d.2 == 2),
    );
    rep.pass
        .insert("twisted_1_1".into(), dims.iter().all(|d| d.3 == 1 && d.4 == 1));
    rep.pass.insert(
        "stable_across_refinement".into(),
        dims.iter()
            .all(|d| (d.1, d.2, d.3, d.4) == (finest.1, finest.2, finest.3, finest.4)),
    );
    // twisting by an exact form cannot change the dimensions
    let m = s1xs2_model(3, cfg.resolution - 1)?;
    let gauge = random_2_cochain(&m.complex, cfg.seed).coboundary(&m.complex);
    let mut shifted = m.delta_bar.clone();
    for (v, g) in shifted.values.iter_mut().zip(&gauge.values) {
        *v += g;
    }
    let tg = twisted_dims(&m.complex, &shifted)?;
    rep.pass.insert(
        "twist_gauge_invariance".into(),
        (tg.even, tg.odd) == (finest.3, finest.4),
    );
    Ok(())
}

fn run_family_index(cfg: &ScenarioConfig, rep: &mut Report) -> Result<()> {
    // idempotent identity over seeded random kernels
    let trials = 20usize;
    let mut max_idem = 0.0f64;
    let mut max_integrality = 0.0f64;
    for t in 0..trials {
        let p = random_kernel(3 + t % 3, cfg.seed.wrapping_add(t as u64));
        let par = parametrix(&p)?;
        let idx = index_idempotent(&p, &par.q, &par.s0, &par.s1)?;
        max_idem = max_idem.max(idx.idempotency_residual);
        let tr = idx.trace_difference;
        max_integrality = max_integrality
            .max((tr.re - tr.re.round()).abs())
            .max(tr.im.abs());
    }
    rep.results.insert("random_trials".into(), json!(trials));
    rep.residuals.insert("idempotency".into(), max_idem);
    rep.residuals
        .insert("trace_integrality".into(), max_integrality);
    rep.pass.insert(
        "idempotency_ok".into(),
        max_idem <= cfg.tol("idempotency", 1e-12),
    );
    rep.pass.insert(
        "trace_integral".into(),
        max_integrality <= cfg.tol("trace_integrality", 1e-9),
    );
    // winding models: |trace(E1 − E0)| = |k|
    let mut windings = Vec::new();
    let mut winding_ok = true;
    for k in [0, cfg.symbol_winding, -cfg.symbol_winding] {
        let p = toeplitz_winding(cfg.n, k)?;
        let par = parametrix(&p)?;
        let idx = index_idempotent(&p, &par.q, &par.s0, &par.s1)?;
        let tr = idx.trace_difference.re;
        windings.push(json!({ "k": k, "trace_difference": tr }));
        winding_ok &= (tr.abs() - k.abs() as f64).abs() <= 1e-9;
    }
    rep.results.insert("winding_models".into(), json!(windings));
    rep.pass.insert("winding_traces_match".into(), winding_ok);
    Ok(())
}

fn run_index_compare(cfg: &ScenarioConfig, rep: &mut Report) -> Result<()> {
    match cfg.base.as_str() {
        "s2" => {
            // untwisted family index identity for the sphere clutching family
            let sphere_n = 4 * cfg.resolution as usize + 4;
            let cmp = bott_index_comparison(sphere_n, cfg.n, cfg.fiber_points, 12, 40)?;
            let tol = cfg.tol("pairing_gap", 1e-6);
            rep.results
                .insert("analytic_pairing".into(), json!(cmp.analytic.re));
            rep.results
                .insert("topological_pairing".into(), json!(cmp.topological.re));
            rep.residuals
                .insert("pairing_gap".into(), (cmp.analytic - cmp.topological).norm());
            rep.residuals.insert(
                "pairing_integrality".into(),
                (cmp.analytic.re.abs() - 1.0).abs().max(cmp.analytic.im.abs()),
            );
            rep.pass.insert(
                "pairing_unit".into(),
                (cmp.analytic.re.abs() - 1.0).abs() <= tol && cmp.analytic.im.abs() <= tol,
            );
            rep.pass.insert(
                "sides_agree".into(),
                (cmp.analytic - cmp.topological).norm() <= tol,
            );
        }
        "s1xs2" => {
            // twisted comparison: harmonic projection of the character gap
            let r = cfg.resolution as usize;
            let cmp = twisted_index_comparison(
                8 * r,
                4 * r + 1,
                cfg.bundle_degree,
                cfg.u_winding,
                cfg.n,
                cfg.fiber_points,
                8,
                DiffScheme::Ord2,
                0,
                300,
            )?;
            rep.residuals.insert("degree0_gap".into(), cmp.degree0_gap);
            rep.residuals
                .insert("harmonic_projection".into(), cmp.harmonic_projection);
            rep.pass.insert(
                "degree0_exact".into(),
                cmp.degree0_gap <= cfg.tol("degree0_gap", 1e-10),
            );
            rep.pass.insert(
                "character_gap_coexact".into(),
                cmp.harmonic_projection <= cfg.tol("harmonic_projection", 1e-4),
            );
        }
        other => {
            return Err(Error::validation(format!(
                "index-compare expects base s2 (untwisted) or s1xs2 (twisted), got {other:?}"
            )))
        }
    }
    Ok(())
}

/// Catalog fiber symbols for the semiclassical checks.
fn catalog_symbols() -> Vec<(&'static str, SclSymbol)> {
    vec![
        (
            "gaussian",
            SclSymbol::new(0, 6.0, |_, xi| Complex64::new((-xi * xi).exp(), 0.0)).unwrap(),
        ),
        (
            "cos_gaussian",
            SclSymbol::new(1, 6.0, |th, xi| {
                Complex64::new(th.cos() * (-xi * xi).exp(), 0.0)
            })
            .unwrap(),
        ),
        (
            "shifted_gaussian",
            SclSymbol::new(1, 6.0, |th, xi| {
                Complex64::new(0.0, th.sin()) * Complex64::new((-(xi - 1.0) * (xi - 1.0)).exp(), 0.0)
            })
            .unwrap(),
        ),
    ]
}

/// Scalar invertible family over the base circle whose determinant winds
/// `w` times: Id + (e^{2πiwx} − 1)·bump(ξ) with an exact symbol inverse.
fn base_winding_family(points: usize, w: i64) -> Result<OddSymbolFamily> {
    let base = Mesh::new(vec![Factor::Circle { points }], 0)?;
    let loop_at = move |x: f64| {
        Complex64::new(
            (2.0 * std::f64::consts::PI * w as f64 * x).cos() - 1.0,
            (2.0 * std::f64::consts::PI * w as f64 * x).sin(),
        )
    };
    let sym = move |p: &ChartPoint| {
        let lv = loop_at(p.x[0]);
        SclSymbol::new(0, 6.0, move |_, xi| lv * (-12.0 * xi * xi).exp()).unwrap()
    };
    let seed = move |p: &ChartPoint| {
        let lv = loop_at(p.x[0]);
        SclSymbol::new(0, 6.0, move |_, xi| {
            let v = Complex64::new(1.0, 0.0) + lv * (-12.0 * xi * xi).exp();
            1.0 / v - 1.0
        })
        .unwrap()
    };
    Ok(OddSymbolFamily {
        base,
        symbol_at: Rc::new(sym),
        inverse_seed_at: Rc::new(seed),
    })
}

fn run_scl_check(cfg: &ScenarioConfig, rep: &mut Report) -> Result<()> {
    let symbols = catalog_symbols();
    // composition defect slopes over every ordered catalog pair
    let mut slopes = Vec::new();
    let mut min_slope_seen = f64::INFINITY;
    let mut all_ok = true;
    let min_slope = cfg.tol("min_defect_slope", 0.9);
    for (na, a) in &symbols {
        for (nb, b) in &symbols {
            let d = scl_composition_defect(a, b, &DEFAULT_EPS_GRID)?;
            let ok = d.at_floor || d.slope >= min_slope;
            all_ok &= ok;
            if !d.at_floor {
                min_slope_seen = min_slope_seen.min(d.slope);
            }
            slopes.push(json!({ "a": na, "b": nb, "slope": d.slope, "at_floor": d.at_floor }));
        }
    }
    rep.results.insert("composition_defects".into(), json!(slopes));
    rep.residuals.insert(
        "min_defect_slope".into(),
        if min_slope_seen.is_finite() {
            min_slope_seen
        } else {
            min_slope
        },
    );
    rep.pass.insert("defect_slopes_ok".into(), all_ok);
    // σ ∘ quantize is the identity on the sample grid
    let mut sigma_residual = 0.0f64;
    for (_, a) in &symbols {
        let eps = 0.5;
        let k = crate::sclquant::quantize_banded(a, eps, cfg.n.max(24))?;
        let samples = sigma_scl(&k, eps, 16);
        for (ti, th) in samples.thetas.iter().enumerate() {
            for (mi, m) in samples.modes.iter().enumerate() {
                let gap = (samples.values[ti][mi] - a.at(*th, eps * *m as f64)).norm();
                sigma_residual = sigma_residual.max(gap);
            }
        }
    }
    rep.residuals.insert("sigma_quantize".into(), sigma_residual);
    // "exact on the grid" up to the rounding of the oversampled DFT that
    // extracts the θ coefficients
    rep.pass.insert(
        "sigma_quantize_exact".into(),
        sigma_residual <= cfg.tol("sigma_quantize", 1e-12),
    );
    // quantized winding family pairs to its symbol winding
    let fam = base_winding_family(cfg.fiber_points.max(16), cfg.symbol_winding)?;
    let inv = odd_scl_index(&fam, 0.5, cfg.n.max(16))?;
    let w = det_winding(&inv)?;
    rep.results.insert("det_winding".into(), json!(w));
    rep.residuals.insert(
        "winding_gap".into(),
        (w - cfg.symbol_winding as f64).abs(),
    );
    rep.pass.insert(
        "winding_matches".into(),
        (w - cfg.symbol_winding as f64).abs() <= cfg.tol("winding_gap", 1e-6),
    );
    Ok(())
}

fn run_thom_check(cfg: &ScenarioConfig, rep: &mut Report) -> Result<()> {
    let n = cfg.n.max(24);
    let a = thom_isotropic_check(n, &DEFAULT_EPS_GRID)?;
    let b = thom_isotropic_check(2 * n, &DEFAULT_EPS_GRID)?;
    rep.results.insert("index".into(), json!(a.index));
    rep.results.insert("index_doubled".into(), json!(b.index));
    rep.residuals.insert(
        "ground_state_mass_defect".into(),
        (1.0 - a.ground_state_mass).abs(),
    );
    rep.pass.insert("index_is_one".into(), a.index == 1);
    rep.pass.insert(
        "stable_under_doubling".into(),
        a.index == b.index && a.stable_under_doubling && b.stable_under_doubling,
    );
    rep.pass.insert(
        "ground_state_captured".into(),
        (1.0 - a.ground_state_mass).abs() <= cfg.tol("ground_state_mass_defect", 1e-8),
    );
    Ok(())
}

// ---------------------------------------------------------------------------
// sweeps
// ---------------------------------------------------------------------------

/// One row of a sweep table: the swept value and the report's residuals.
pub struct SweepTable {
    pub parameter: String,
    pub columns: Vec<String>,
    pub rows: Vec<(f64, Vec<f64>)>,
    /// least-squares log-log slope per column (against the swept value)
    pub slopes: Vec<f64>,
}

impl SweepTable {
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        out.push_str(&self.parameter);
        for c in &self.columns {
            out.push(',');
            out.push_str(c);
        }
        out.push('\n');
        for (v, row) in &self.rows {
            out.push_str(&format!("{v}"));
            for r in row {
                out.push_str(&format!(",{r:e}"));
            }
            out.push('\n');
        }
        out.push_str("slope");
        for s in &self.slopes {
            out.push_str(&format!(",{s}"));
        }
        out.push('\n');
        out
    }
}

fn lsq_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let pairs: Vec<(f64, f64)> = xs
        .iter()
        .zip(ys)
        .map(|(&x, &y)| (x.ln(), y.max(1e-300).ln()))
        .collect();
    let n = pairs.len() as f64;
    let sx: f64 = pairs.iter().map(|p| p.0).sum();
    let sy: f64 = pairs.iter().map(|p| p.1).sum();
    let sxx: f64 = pairs.iter().map(|p| p.0 * p.0).sum();
    let sxy: f64 = pairs.iter().map(|p| p.0 * p.1).sum();
    (n * sxy - sx * sy) / (n * sxx - sx * sx)
}

/// Runs the pipeline once per parameter value and assembles a convergence
/// table over the report residuals, with fitted log-log slopes.
pub fn sweep(
    subcommand: &str,
    cfg: &ScenarioConfig,
    parameter: &str,
    values: &[f64],
) -> Result<(SweepTable, Vec<Report>)> {
    if values.len() < 3 {
        return Err(Error::validation("a sweep needs at least 3 values"));
    }
    if !["resolution", "N", "eps"].contains(&parameter) {
        return Err(Error::validation(format!(
            "sweep parameter must be resolution, N, or eps; got {parameter:?}"
        )));
    }
    let mut reports = Vec::new();
    let mut rows = Vec::new();
    let mut columns: Vec<String> = Vec::new();
    for &v in values {
        let mut c = cfg.clone();
        match parameter {
            "resolution" => {
                if v < 1.0 || v.fract() != 0.0 {
                    return Err(Error::validation("resolution values must be integers ≥ 1"));
                }
                c.resolution = v as u32;
            }
            "N" => {
                if v < 3.0 || v.fract() != 0.0 {
                    return Err(Error::validation("N values must be integers ≥ 3"));
                }
                c.n = v as usize;
            }
            "eps" => {
                // ε enters through the semiclassical pipelines only; encode
                // it as the inverse band scale
                if !(v > 0.0 && v < 1.0) {
                    return Err(Error::validation("eps values must lie in (0,1)"));
                }
                c.n = (cfg.n as f64 / v).ceil() as usize;
            }
            _ => unreachable!(),
        }
        let r = run(subcommand, &c)?;
        if columns.is_empty() {
            columns = r.residuals.keys().cloned().collect();
        }
        let row: Vec<f64> = columns
            .iter()
            .map(|k| *r.residuals.get(k).unwrap_or(&f64::NAN))
            .collect();
        rows.push((v, row));
        reports.push(r);
    }
    let xs: Vec<f64> = rows.iter().map(|r| r.0).collect();
    let slopes: Vec<f64> = (0..columns.len())
        .map(|i| {
            let ys: Vec<f64> = rows.iter().map(|r| r.1[i]).collect();
            lsq_slope(&xs, &ys)
        })
        .collect();
    Ok((
        SweepTable {
            parameter: parameter.to_string(),
            columns,
            rows,
            slopes,
        },
        reports,
    ))
}
