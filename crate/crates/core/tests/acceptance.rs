//! Acceptance gate: ten end-to-end checks, one per release criterion.
//! Each test prints a single pass/fail line with its wall-clock time and
//! enforces both the numerical criterion and the time budget.

use std::rc::Rc;
use std::time::Instant;

use tkindex::bundlegeom::{
    check_primitivity, curvature_report, generator_primitive, probe_points, ConvergenceStudy,
    GeneratorScenario,
};
use tkindex::cherncalc::{
    bott_index_comparison, diagonal_band_family, generator_connection, odd_chern,
    scl_index_character_comparison, twisted_index_comparison, ConnectionData,
};
use tkindex::fiberops::{index_idempotent, parametrix, random_kernel, toeplitz_winding};
use tkindex::forms::DiffScheme;
use tkindex::mesh::ChartPoint;
use tkindex::scenario::{run, ScenarioConfig};
use tkindex::sclquant::{thom_isotropic_check, DEFAULT_EPS_GRID};

fn cfg(json: &str) -> ScenarioConfig {
    ScenarioConfig::from_json(json).expect("valid config")
}

/// Print the verdict line, then assert, so a failure still leaves the line
/// in the captured output.
fn verdict(label: &str, ok: bool, t: &Instant, budget_s: f64) {
    let secs = t.elapsed().as_secs_f64();
    let in_budget = secs <= budget_s;
    println!(
        "{label}: {} ({secs:.1}s, budget {budget_s:.0}s)",
        if ok && in_budget { "PASS" } else { "FAIL" }
    );
    assert!(ok, "{label}: criterion failed");
    assert!(in_budget, "{label}: over budget ({secs:.1}s > {budget_s:.0}s)");
}

#[test]
fn criterion_01_riemann_roch_exact() {
    let t = Instant::now();
    let rep = run("grr", &cfg(r#"{"name":"ac1","base":"circle"}"#)).unwrap();
    let deg4 = rep.results["degree4_coefficient"].as_str().unwrap().to_string();
    let det = rep.results["determinant_relation"][1].as_str().unwrap().to_string();
    verdict(
        "AC1 exact rational Riemann-Roch (13/12 and 13e1)",
        rep.all_pass() && deg4 == "13/12" && det == "13",
        &t,
        1.0,
    );
}

#[test]
fn criterion_02_decomposable_class_is_generator() {
    let t = Instant::now();
    let rep = run("dd-class", &cfg(r#"{"name":"ac2","base":"s1xs2"}"#)).unwrap();
    verdict(
        "AC2 degree-3 class = ±generator, torsion comparison exact",
        rep.all_pass() && rep.pass["bockstein_equals_cup"] && rep.pass["class_coordinate_expected"],
        &t,
        10.0,
    );
}

#[test]
fn criterion_03_primitive_bundle_and_curvature() {
    let t = Instant::now();
    let sc = GeneratorScenario::default();
    let prim = check_primitivity(&generator_primitive(&sc, 2).unwrap());
    let curv = curvature_report(&sc, 3).unwrap();
    let exact = prim.transition_defect.to_string() == "0"
        && prim.associativity_defect.to_string() == "0";
    let slopes = curv.mu_exactness.passes(1.5) && curv.descent.passes(1.5);
    verdict(
        "AC3 primitivity defect 0, curvature identities converge at order >= 1.5",
        exact && prim.connection_defect <= 1e-9 && slopes && curv.flux_defect <= 1e-9,
        &t,
        180.0, // 60s per refinement level, three levels run together
    );
}

#[test]
fn criterion_04_twisted_hodge_dimensions() {
    let t = Instant::now();
    let rep = run("twisted-derham", &cfg(r#"{"name":"ac4","base":"s1xs2"}"#)).unwrap();
    verdict(
        "AC4 twisted dimensions (1,1) vs untwisted (2,2), refinement- and gauge-stable",
        rep.all_pass()
            && rep.pass["untwisted_2_2"]
            && rep.pass["twisted_1_1"]
            && rep.pass["stable_across_refinement"]
            && rep.pass["twist_gauge_invariance"],
        &t,
        120.0,
    );
}

#[test]
fn criterion_05_analytic_index_idempotents() {
    let t = Instant::now();
    let mut max_idem = 0.0f64;
    let mut max_int = 0.0f64;
    for s in 0..100u64 {
        let p = random_kernel(3 + (s % 3) as usize, s);
        let par = parametrix(&p).unwrap();
        let idx = index_idempotent(&p, &par.q, &par.s0, &par.s1).unwrap();
        max_idem = max_idem.max(idx.idempotency_residual);
        let tr = idx.trace_difference;
        max_int = max_int.max((tr.re - tr.re.round()).abs()).max(tr.im.abs());
    }
    let mut winding_ok = true;
    for k in 0..=2i64 {
        let p = toeplitz_winding(8, k).unwrap();
        let par = parametrix(&p).unwrap();
        let idx = index_idempotent(&p, &par.q, &par.s0, &par.s1).unwrap();
        winding_ok &= (idx.trace_difference.re.abs() - k.abs() as f64).abs() <= 1e-9;
    }
    verdict(
        "AC5 100 random parametrices: E1^2=E1 (1e-12), integer trace (1e-9), winding traces",
        max_idem <= 1e-12 && max_int <= 1e-9 && winding_ok,
        &t,
        10.0,
    );
}

#[test]
fn criterion_06_odd_character_refines_and_deck_shifts() {
    let t = Instant::now();
    // closedness / subcomplex residuals over three refinements
    let mut steps = Vec::new();
    let mut closed = Vec::new();
    let mut subc = Vec::new();
    for (bp, sn) in [(8usize, 5usize), (16, 9), (32, 17)] {
        let sc = generator_connection(bp, sn, 1, 1, 0, 6).unwrap();
        let (a, ai) = diagonal_band_family(&sc.conn, 1, 0);
        let ch = odd_chern(&a, &ai, &sc.conn, 8, DiffScheme::Ord2, 300).unwrap();
        steps.push(1.0 / bp as f64);
        closed.push(ch.closedness_residual);
        subc.push(ch.subcomplex_residual);
    }
    let closed_study = ConvergenceStudy {
        steps: steps.clone(),
        residuals: closed,
        floor: 1e-12,
    };
    let subc_study = ConvergenceStudy {
        steps,
        residuals: subc,
        floor: 1e-10,
    };

    // deck shift f -> f+1 with the mode-relabeled family
    let sc = generator_connection(8, 5, 1, 1, 0, 7).unwrap();
    let (a1, a1i) = diagonal_band_family(&sc.conn, 1, 0);
    let ch1 = odd_chern(&a1, &a1i, &sc.conn, 8, DiffScheme::Ord2, 40).unwrap();
    let f0 = sc.conn.f.clone();
    let conn2 = ConnectionData {
        mesh: sc.conn.mesh.clone(),
        theta_axis: sc.conn.theta_axis,
        gamma_bar: sc.conn.gamma_bar.clone(),
        gamma: sc.conn.gamma.clone(),
        alpha: sc.conn.alpha.clone(),
        beta: sc.conn.beta.clone(),
        f: Rc::new(move |p: &ChartPoint| f0(p) + 1.0),
        n_modes: sc.conn.n_modes,
        mode0: sc.conn.mode0,
    };
    let (a2, a2i) = diagonal_band_family(&conn2, 1, 1);
    let ch2 = odd_chern(&a2, &a2i, &conn2, 8, DiffScheme::Ord2, 40).unwrap();
    let probes = probe_points(&sc.conn.mesh, 60);
    let drift = ch1.form.sub(&ch2.form).sup_on(&probes);

    verdict(
        "AC6 odd character residuals O(h^2) with slope >= 1.5, deck-shift invariant (1e-10)",
        closed_study.passes(1.5) && subc_study.passes(1.5) && drift <= 1e-10,
        &t,
        120.0,
    );
}

#[test]
fn criterion_07_even_index_theorem_untwisted() {
    let t = Instant::now();
    let cmp = bott_index_comparison(8, 5, 16, 12, 40).unwrap();
    let gap = (cmp.analytic - cmp.topological).norm();
    let is_unit = (cmp.analytic.re.abs() - 1.0).abs() <= 1e-6 && cmp.analytic.im.abs() <= 1e-6;
    verdict(
        "AC7 Bott projector over S^2: analytic = topological = ±1 (1e-6)",
        gap <= 1e-6 && is_unit,
        &t,
        300.0,
    );
}

#[test]
fn criterion_08_twisted_index_characters_agree() {
    let t = Instant::now();
    let cmp = twisted_index_comparison(8, 5, 1, 1, 5, 12, 8, DiffScheme::Ord2, 0, 300).unwrap();
    verdict(
        "AC8 twisted index: characters agree up to twisted-exact forms (projection gap <= 1e-4)",
        cmp.degree0_gap <= 1e-10 && cmp.harmonic_projection <= 1e-4,
        &t,
        600.0,
    );
}

#[test]
fn criterion_09_quantization_and_odd_index_pairings() {
    let t = Instant::now();
    let rep = run("scl-check", &cfg(r#"{"name":"ac9","base":"circle"}"#)).unwrap();
    let quant_ok = rep.all_pass()
        && rep.pass["defect_slopes_ok"]
        && rep.pass["sigma_quantize_exact"]
        && rep.pass["winding_matches"];
    let cmp = scl_index_character_comparison(32, 12, 32, 72, 128).unwrap();
    let pairings_ok = (cmp.quantized_pairing - cmp.det_winding).abs() <= 1e-6
        && cmp.det_winding.abs() > 0.5
        && (cmp.quantized_pairing - cmp.symbol_pairing).abs() <= 1e-5;
    verdict(
        "AC9 composition defect slope >= 0.9, sigma∘quantize exact, index pairings match (1e-5)",
        quant_ok && pairings_ok,
        &t,
        300.0,
    );
}

#[test]
fn criterion_10_isotropic_ground_state_index() {
    let t = Instant::now();
    let a = thom_isotropic_check(24, &DEFAULT_EPS_GRID).unwrap();
    let b = thom_isotropic_check(48, &DEFAULT_EPS_GRID).unwrap();
    verdict(
        "AC10 isotropic model index = 1, stable under doubling the cutoff",
        a.index == 1 && b.index == 1 && a.stable_under_doubling && b.stable_under_doubling,
        &t,
        60.0,
    );
}
