//! Geometric layer: Hermitian line bundles with monopole-type connections on
//! the cube-sphere, the associated circle bundle with its global angular
//! 1-form, the fiber-shift character, and the primitive line bundle on the
//! fiber product with its connection and curvature.
//!
//! Conventions (reduced units): connection forms are real, curvatures have
//! integer periods, and circle-valued quantities are additive mod 1.
//! Fiber circle directions are virtual mesh factors: forms may have legs
//! along them, but all data is invariant along the fiber, so sample
//! lattices need not resolve it.

use num_complex::Complex64;
use std::f64::consts::PI;
use std::rc::Rc;

use crate::cech::{mod1 as rat_mod1, Rat};
use crate::forms::{axis_subsets, DiffScheme, Form};
use crate::mesh::{sphere_area_density, sphere_chart, ChartPoint, Factor, Mesh};
use crate::{Error, Result};

fn mod1f(x: f64) -> f64 {
    x.rem_euclid(1.0)
}

fn comp_index(dim: usize, subset: &[usize]) -> usize {
    axis_subsets(dim, subset.len())
        .iter()
        .position(|s| s == subset)
        .expect("component subset in range")
}

// ---------------------------------------------------------------------------
// Hermitian line bundles
// ---------------------------------------------------------------------------

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum Gauge {
    North,
    South,
}

/// A Hermitian line bundle with unitary connection over a product mesh with
/// at most one sphere factor.  The connection 1-form is stored per chart:
/// the −z sphere face carries the south gauge, the other five the north
/// gauge, so each chart's data is smooth on (an extension of) that chart.
pub struct HermitianLineBundle {
    pub mesh: Rc<Mesh>,
    pub sphere_factor: Option<usize>,
    pub degree: i64,
    pub connection: Form<Complex64>,
    pub curvature: Form<Complex64>,
}

/// Gauge patch assignment for a chart of the sphere factor.
pub fn face_gauge(face: usize) -> Gauge {
    if face == 5 {
        Gauge::South
    } else {
        Gauge::North
    }
}

/// Rotationally symmetric connection with total flux `k` on the sphere
/// factor: a = k/(4π) · (x dy − y dx)/(1 ± z) in the two gauges, pulled
/// back through the gnomonic charts.  Legs on non-sphere axes vanish.
pub fn monopole_connection(mesh: &Rc<Mesh>, sphere_factor: usize, k: i64) -> Form<Complex64> {
    let a0 = mesh.first_axis_of(sphere_factor);
    let dim = mesh.dim();
    let sf = sphere_factor;
    Form::new(mesh.clone(), 1, move |p: &ChartPoint| {
        let face = p.chart[sf];
        let (pt, ps, ptv) = sphere_chart(face, p.x[a0], p.x[a0 + 1]);
        let (x, y, z) = (pt[0], pt[1], pt[2]);
        let c = match face_gauge(face) {
            Gauge::North => k as f64 / (4.0 * PI * (1.0 + z)),
            Gauge::South => -(k as f64) / (4.0 * PI * (1.0 - z)),
        };
        let mut v = vec![Complex64::new(0.0, 0.0); dim];
        v[a0] = Complex64::new(c * (x * ps[1] - y * ps[0]), 0.0);
        v[a0 + 1] = Complex64::new(c * (x * ptv[1] - y * ptv[0]), 0.0);
        v
    })
}

/// The corresponding global curvature 2-form k/(4π)·(area form).
pub fn monopole_curvature(mesh: &Rc<Mesh>, sphere_factor: usize, k: i64) -> Form<Complex64> {
    let a0 = mesh.first_axis_of(sphere_factor);
    let dim = mesh.dim();
    let sf = sphere_factor;
    let ci = comp_index(dim, &[a0, a0 + 1]);
    let n_comp = axis_subsets(dim, 2).len();
    Form::new(mesh.clone(), 2, move |p: &ChartPoint| {
        let mut v = vec![Complex64::new(0.0, 0.0); n_comp];
        let dens = sphere_area_density(p.chart[sf], p.x[a0], p.x[a0 + 1]);
        v[ci] = Complex64::new(k as f64 / (4.0 * PI) * dens, 0.0);
        v
    })
}

/// Constant 1-form `value`·dx along the single axis of a circle factor
/// (the degree-w generator of the base circle has value w).
pub fn circle_generator_form(mesh: &Rc<Mesh>, circle_factor: usize, value: f64) -> Form<Complex64> {
    let axis = mesh.first_axis_of(circle_factor);
    let dim = mesh.dim();
    Form::new(mesh.clone(), 1, move |_p: &ChartPoint| {
        let mut v = vec![Complex64::new(0.0, 0.0); dim];
        v[axis] = Complex64::new(value, 0.0);
        v
    })
}

pub fn monopole_bundle(
    mesh: &Rc<Mesh>,
    sphere_factor: usize,
    degree: i64,
) -> Result<HermitianLineBundle> {
    match mesh.factors.get(sphere_factor) {
        Some(Factor::CubeSphere { .. }) => {}
        _ => return Err(Error::validation("sphere_factor must index a sphere grid")),
    }
    Ok(HermitianLineBundle {
        mesh: mesh.clone(),
        sphere_factor: Some(sphere_factor),
        degree,
        connection: monopole_connection(mesh, sphere_factor, degree),
        curvature: monopole_curvature(mesh, sphere_factor, degree),
    })
}

pub fn trivial_bundle(mesh: &Rc<Mesh>) -> HermitianLineBundle {
    let dim = mesh.dim();
    let n1 = dim;
    let n2 = axis_subsets(dim, 2).len();
    HermitianLineBundle {
        mesh: mesh.clone(),
        sphere_factor: None,
        degree: 0,
        connection: Form::new(mesh.clone(), 1, move |_| {
            vec![Complex64::new(0.0, 0.0); n1]
        }),
        curvature: Form::new(mesh.clone(), 2, move |_| {
            vec![Complex64::new(0.0, 0.0); n2]
        }),
    }
}

impl HermitianLineBundle {
    /// Total curvature period over the sphere factor (the Chern number).
    pub fn flux(&self) -> f64 {
        let sf = match self.sphere_factor {
            Some(sf) => sf,
            None => return 0.0,
        };
        let reduced = self.curvature.fiber_integrate(&[sf]);
        if reduced.mesh.factors.is_empty() {
            // a lone empty-product point
            reduced
                .eval(&ChartPoint {
                    chart: Vec::new(),
                    x: Vec::new(),
                })[0]
                .re
        } else {
            reduced.eval(&reduced.mesh.lattice()[0])[0].re
        }
    }
}

// ---------------------------------------------------------------------------
// cycles and holonomy
// ---------------------------------------------------------------------------

/// A straight coordinate segment inside one chart.
#[derive(Debug, Clone)]
pub struct Segment {
    pub chart: Vec<usize>,
    pub from: Vec<f64>,
    pub to: Vec<f64>,
}

/// A closed 1-cycle given as a chain of chart segments whose endpoints match
/// as points of the manifold.
#[derive(Debug, Clone)]
pub struct Cycle1 {
    pub segments: Vec<Segment>,
}

/// Embed a chart point into the product of the factors' model spaces
/// (unit circle in R² per circle factor, unit sphere in R³, nothing for
/// virtual factors) — used to compare points across charts.
pub fn embed_point(mesh: &Mesh, chart: &[usize], x: &[f64]) -> Vec<f64> {
    let mut out = Vec::new();
    let mut a = 0;
    for (fi, f) in mesh.factors.iter().enumerate() {
        match *f {
            Factor::Circle { .. } => {
                out.push((2.0 * PI * x[a]).cos());
                out.push((2.0 * PI * x[a]).sin());
                a += 1;
            }
            Factor::CubeSphere { .. } => {
                let (p, _, _) = sphere_chart(chart[fi], x[a], x[a + 1]);
                out.extend_from_slice(&p);
                a += 2;
            }
            Factor::VirtualCircle => {
                a += 1;
            }
        }
    }
    out
}

fn gauge_of_chart(_mesh: &Mesh, sphere_factor: Option<usize>, chart: &[usize]) -> Gauge {
    match sphere_factor {
        Some(sf) => face_gauge(chart[sf]),
        None => Gauge::North,
    }
}

/// Azimuthal transition lift (θ_N − θ_S)(p) = k·atan2(y,x)/2π at an
/// embedded sphere point of a chart point.
fn transition_lift(mesh: &Mesh, sphere_factor: usize, chart: &[usize], x: &[f64], k: i64) -> f64 {
    let a0 = mesh.first_axis_of(sphere_factor);
    let (p, _, _) = sphere_chart(chart[sphere_factor], x[a0], x[a0 + 1]);
    k as f64 * p[1].atan2(p[0]) / (2.0 * PI)
}

/// Parallel-transport phase (additively, mod 1) of the bundle connection
/// around a closed segment chain, with gauge-transition corrections at
/// junctions where the chart's gauge patch changes.
pub fn holonomy(l: &HermitianLineBundle, z: &Cycle1) -> Result<f64> {
    if z.segments.is_empty() {
        return Err(Error::validation("empty cycle"));
    }
    // closedness: each segment's end must embed to the next one's start
    let m = z.segments.len();
    for i in 0..m {
        let a = &z.segments[i];
        let b = &z.segments[(i + 1) % m];
        let ea = embed_point(&l.mesh, &a.chart, &a.to);
        let eb = embed_point(&l.mesh, &b.chart, &b.from);
        let gap: f64 = ea
            .iter()
            .zip(&eb)
            .map(|(u, v)| (u - v) * (u - v))
            .sum::<f64>()
            .sqrt();
        if gap > 1e-9 {
            return Err(Error::validation("cycle is not closed"));
        }
    }
    let (nodes, weights) = crate::mesh::gauss_legendre(20);
    let mut total = 0.0;
    for seg in &z.segments {
        let tangent: Vec<f64> = seg
            .to
            .iter()
            .zip(&seg.from)
            .map(|(b, a)| b - a)
            .collect();
        for (u, w) in nodes.iter().zip(&weights) {
            let tau = 0.5 * (u + 1.0);
            let x: Vec<f64> = seg
                .from
                .iter()
                .zip(&seg.to)
                .map(|(a, b)| a + tau * (b - a))
                .collect();
            let p = ChartPoint {
                chart: seg.chart.clone(),
                x,
            };
            let a_vals = l.connection.eval(&p);
            let integrand: f64 = a_vals
                .iter()
                .zip(&tangent)
                .map(|(c, t)| c.re * t)
                .sum();
            total += 0.5 * w * integrand;
        }
    }
    // junction corrections: south→north adds the transition lift, the
    // reverse subtracts it
    if let Some(sf) = l.sphere_factor {
        for i in 0..m {
            let a = &z.segments[i];
            let b = &z.segments[(i + 1) % m];
            let ga = gauge_of_chart(&l.mesh, l.sphere_factor, &a.chart);
            let gb = gauge_of_chart(&l.mesh, l.sphere_factor, &b.chart);
            if ga != gb {
                let lift = transition_lift(&l.mesh, sf, &b.chart, &b.from, l.degree);
                total += match (ga, gb) {
                    (Gauge::South, Gauge::North) => lift,
                    (Gauge::North, Gauge::South) => -lift,
                    _ => 0.0,
                };
            }
        }
    }
    Ok(mod1f(total))
}

/// The equator of the sphere factor, counterclockwise seen from +z, with
/// all other coordinates frozen at those of `base`.
pub fn equator_cycle(mesh: &Rc<Mesh>, sphere_factor: usize, base: &ChartPoint) -> Cycle1 {
    let a0 = mesh.first_axis_of(sphere_factor);
    let mut segments = Vec::new();
    for face in [0usize, 2, 1, 3] {
        let mut chart = base.chart.clone();
        chart[sphere_factor] = face;
        let mut from = base.x.clone();
        let mut to = base.x.clone();
        from[a0] = -1.0;
        from[a0 + 1] = 0.0;
        to[a0] = 1.0;
        to[a0 + 1] = 0.0;
        segments.push(Segment { chart, from, to });
    }
    Cycle1 { segments }
}

/// Counterclockwise boundary of one full gnomonic face (in that face's own
/// chart), the positively oriented boundary of the face as a 2-cell.
pub fn face_boundary_cycle(
    mesh: &Rc<Mesh>,
    sphere_factor: usize,
    face: usize,
    base: &ChartPoint,
) -> Cycle1 {
    let a0 = mesh.first_axis_of(sphere_factor);
    let corners = [(-1.0, -1.0), (1.0, -1.0), (1.0, 1.0), (-1.0, 1.0)];
    let mut segments = Vec::new();
    for i in 0..4 {
        let (s0, t0) = corners[i];
        let (s1, t1) = corners[(i + 1) % 4];
        let mut chart = base.chart.clone();
        chart[sphere_factor] = face;
        let mut from = base.x.clone();
        let mut to = base.x.clone();
        from[a0] = s0;
        from[a0 + 1] = t0;
        to[a0] = s1;
        to[a0 + 1] = t1;
        segments.push(Segment { chart, from, to });
    }
    Cycle1 { segments }
}

/// The base-circle generator loop with all other coordinates frozen.
pub fn base_circle_cycle(mesh: &Rc<Mesh>, circle_factor: usize, base: &ChartPoint) -> Cycle1 {
    let a = mesh.first_axis_of(circle_factor);
    let mut from = base.x.clone();
    let mut to = base.x.clone();
    from[a] = 0.0;
    to[a] = 1.0;
    Cycle1 {
        segments: vec![Segment {
            chart: base.chart.clone(),
            from,
            to,
        }],
    }
}

/// Curvature flux over an axis-aligned coordinate rectangle of one sphere
/// face (Gauss–Legendre, other coordinates frozen at `base`).
pub fn flux_over_face_rect(
    l: &HermitianLineBundle,
    face: usize,
    s_range: (f64, f64),
    t_range: (f64, f64),
    base: &ChartPoint,
) -> f64 {
    let sf = l.sphere_factor.expect("flux needs a sphere factor");
    let a0 = l.mesh.first_axis_of(sf);
    let ci = comp_index(l.mesh.dim(), &[a0, a0 + 1]);
    let (nodes, weights) = crate::mesh::gauss_legendre(16);
    let jac = 0.25 * (s_range.1 - s_range.0) * (t_range.1 - t_range.0);
    let mut total = 0.0;
    for (us, ws) in nodes.iter().zip(&weights) {
        let s = 0.5 * (s_range.0 + s_range.1) + 0.5 * us * (s_range.1 - s_range.0);
        for (ut, wt) in nodes.iter().zip(&weights) {
            let t = 0.5 * (t_range.0 + t_range.1) + 0.5 * ut * (t_range.1 - t_range.0);
            let mut chart = base.chart.clone();
            chart[sf] = face;
            let mut x = base.x.clone();
            x[a0] = s;
            x[a0 + 1] = t;
            total += ws * wt * jac * l.curvature.eval(&ChartPoint { chart, x })[ci].re;
        }
    }
    total
}

// ---------------------------------------------------------------------------
// circle bundle and shift character
// ---------------------------------------------------------------------------

/// Total space of the circle bundle of a line bundle: the base mesh with a
/// virtual fiber circle appended, carrying the global angular 1-form
/// γ = dθ + a (per gauge chart; fiber coordinates of adjacent gauges differ
/// by the transition, so the formula is chart-coherent).
pub struct CircleBundleTotal {
    pub bundle: HermitianLineBundle,
    pub total_mesh: Rc<Mesh>,
    pub fiber_factor: usize,
    /// fiber sample count for exact shift-character arithmetic
    pub fiber_points: usize,
    pub gamma: Form<Complex64>,
}

pub fn build_circle_bundle(
    l: HermitianLineBundle,
    fiber_points: usize,
) -> Result<CircleBundleTotal> {
    if fiber_points < 8 {
        return Err(Error::validation("fiber needs at least 8 points"));
    }
    let flux = l.flux();
    if (flux - flux.round()).abs() > 1e-6 {
        return Err(Error::validation("curvature period is not an integer"));
    }
    let mut factors = l.mesh.factors.clone();
    factors.push(Factor::VirtualCircle);
    let total_mesh = Mesh::new(factors, l.mesh.resolution)?;
    let fiber_factor = total_mesh.factors.len() - 1;
    let theta_axis = total_mesh.first_axis_of(fiber_factor);
    let dim = total_mesh.dim();
    // base connection legs re-expressed on the total mesh
    let sf = l.sphere_factor;
    let a_total = match sf {
        Some(sf) => monopole_connection(&total_mesh, sf, l.degree),
        None => {
            let n1 = dim;
            Form::new(total_mesh.clone(), 1, move |_| {
                vec![Complex64::new(0.0, 0.0); n1]
            })
        }
    };
    let gamma = {
        let dtheta = Form::new(total_mesh.clone(), 1, move |_p: &ChartPoint| {
            let mut v = vec![Complex64::new(0.0, 0.0); dim];
            v[theta_axis] = Complex64::new(1.0, 0.0);
            v
        });
        dtheta.add(&a_total)
    };
    Ok(CircleBundleTotal {
        bundle: l,
        total_mesh,
        fiber_factor,
        fiber_points,
        gamma,
    })
}

/// Fiber-shift character at two fiber lattice points j₁/m, j₂/m: the exact
/// coordinate difference mod 1.  Gauge-independent (both coordinates rotate
/// by the same transition).
pub fn shift_character(j1: i64, j2: i64, m: i64) -> Rat {
    rat_mod1(Rat::new(j1 - j2, m))
}

// ---------------------------------------------------------------------------
// primitive bundle
// ---------------------------------------------------------------------------

/// The primitive line bundle on the fiber product of the circle bundle,
/// induced by a circle-valued base map of winding `winding`.  Its local
/// connection is d + f·ds with f a local lift of the base map, and its
/// descent curvature datum is μ = df∧γ on the total space.
pub struct PrimitiveBundle {
    pub total: CircleBundleTotal,
    /// winding of the inducing circle-valued map on the base circle factor
    pub winding: i64,
    /// deck-shift branch: the lift used is f(x) = −winding·x + branch_offset
    pub branch_offset: i64,
    pub base_circle_factor: usize,
    /// fiber-product mesh (total mesh with a second virtual fiber)
    pub mesh2: Rc<Mesh>,
    /// connection 1-form f·(dθ₁ − dθ₂) on the fiber product
    pub eta: Form<Complex64>,
    /// μ = df∧γ on the total space
    pub mu: Form<Complex64>,
    /// ᾱ = −df, the generator 1-form of the base circle (winding·dx)
    pub alpha: Form<Complex64>,
}

pub fn build_primitive_bundle(
    total: CircleBundleTotal,
    base_circle_factor: usize,
    winding: i64,
    branch_offset: i64,
) -> Result<PrimitiveBundle> {
    match total.total_mesh.factors.get(base_circle_factor) {
        Some(Factor::Circle { .. }) => {}
        _ => {
            return Err(Error::validation(
                "base_circle_factor must index a circle grid",
            ))
        }
    }
    let mut factors = total.total_mesh.factors.clone();
    factors.push(Factor::VirtualCircle);
    let mesh2 = Mesh::new(factors, total.total_mesh.resolution)?;
    let x_axis = mesh2.first_axis_of(base_circle_factor);
    let th1_axis = mesh2.first_axis_of(total.fiber_factor);
    let th2_axis = mesh2.first_axis_of(mesh2.factors.len() - 1);
    let dim2 = mesh2.dim();
    let w = winding as f64;
    let off = branch_offset as f64;
    // f·ds with the local lift f = −w·x + offset (smooth on the coordinate
    // cover; the mod-1 reduction only matters for transition data)
    let eta = Form::new(mesh2.clone(), 1, move |p: &ChartPoint| {
        let f = -w * p.x[x_axis] + off;
        let mut v = vec![Complex64::new(0.0, 0.0); dim2];
        v[th1_axis] = Complex64::new(f, 0.0);
        v[th2_axis] = Complex64::new(-f, 0.0);
        v
    });
    let df = circle_generator_form(&total.total_mesh, base_circle_factor, -w);
    let mu = df.wedge(&total.gamma);
    let alpha = circle_generator_form(&total.total_mesh, base_circle_factor, w);
    Ok(PrimitiveBundle {
        total,
        winding,
        branch_offset,
        base_circle_factor,
        mesh2,
        eta,
        mu,
        alpha,
    })
}

// ---------------------------------------------------------------------------
// primitivity and curvature reports
// ---------------------------------------------------------------------------

/// Defects of the multiplicative structure: transition data is exact
/// rational arithmetic mod 1 and must vanish identically; connection data
/// is compared numerically on the triple fiber product.
#[derive(Debug, Clone)]
pub struct PrimitivityReport {
    /// max over sampled triples and deck shifts of the additive transition
    /// defect (exact rational, mod 1)
    pub transition_defect: Rat,
    /// sup of η₁₂ + η₂₃ − η₁₃ over probe points
    pub connection_defect: f64,
    /// max additive defect of the character on sampled quadruples
    pub associativity_defect: Rat,
}

pub fn check_primitivity(j: &PrimitiveBundle) -> PrimitivityReport {
    let m = j.total.fiber_points as i64;
    let mut transition_defect = Rat::new(0, 1);
    let mut associativity_defect = Rat::new(0, 1);
    for j1 in 0..m {
        for j2 in (0..m).step_by(3) {
            for j3 in (0..m).step_by(5) {
                for n in -2i64..=2 {
                    // deck-n transition of π_S*J ⊗ π_F*J against π_C*J
                    let d = rat_mod1(
                        Rat::new(n, 1)
                            * (shift_character(j1, j2, m) + shift_character(j2, j3, m)
                                - shift_character(j1, j3, m)),
                    );
                    let d = d.min(Rat::new(1, 1) - d);
                    transition_defect = transition_defect.max(d);
                }
                let j4 = (j1 * 5 + j3) % m;
                let a = rat_mod1(
                    shift_character(j1, j2, m)
                        + shift_character(j2, j3, m)
                        + shift_character(j3, j4, m)
                        - shift_character(j1, j4, m),
                );
                let a = a.min(Rat::new(1, 1) - a);
                associativity_defect = associativity_defect.max(a);
            }
        }
    }
    // triple fiber product: add a third virtual fiber
    let mut factors = j.mesh2.factors.clone();
    factors.push(Factor::VirtualCircle);
    let mesh3 = Mesh::new(factors, j.mesh2.resolution).expect("triple mesh");
    let n2 = j.mesh2.factors.len();
    let id2: Vec<usize> = (0..n2).collect();
    // (θ₁,θ₂), (θ₂,θ₃), (θ₁,θ₃) leg assignments on the triple product
    let mut map12 = id2.clone();
    let mut map23 = id2.clone();
    let mut map13 = id2.clone();
    map12[n2 - 1] = n2 - 1;
    map23[n2 - 2] = n2 - 1;
    map23[n2 - 1] = n2;
    map13[n2 - 1] = n2;
    let e12 = j.eta.pulled_back(&mesh3, &map12);
    let e23 = j.eta.pulled_back(&mesh3, &map23);
    let e13 = j.eta.pulled_back(&mesh3, &map13);
    let resid = e12.add(&e23).sub(&e13);
    let connection_defect = sup_on(&resid, &probe_points(&mesh3, 4000));
    PrimitivityReport {
        transition_defect,
        connection_defect,
        associativity_defect,
    }
}

/// Evenly strided subsample of the mesh lattice, capped in size.
pub fn probe_points(mesh: &Rc<Mesh>, cap: usize) -> Vec<ChartPoint> {
    let lattice = mesh.lattice();
    let stride = lattice.len().div_ceil(cap).max(1);
    lattice.into_iter().step_by(stride).collect()
}

pub fn sup_on<T: crate::forms::Coeff>(form: &Form<T>, points: &[ChartPoint]) -> f64 {
    let mut m: f64 = 0.0;
    for p in points {
        for v in form.eval(p) {
            m = m.max(v.norm());
        }
    }
    m
}

/// Residuals of one quantity across successive mesh refinements.
#[derive(Debug, Clone)]
pub struct ConvergenceStudy {
    pub steps: Vec<f64>,
    pub residuals: Vec<f64>,
    /// absolute floor below which residuals count as converged regardless
    /// of slope (exact identities sit at rounding level on every grid)
    pub floor: f64,
}

impl ConvergenceStudy {
    /// Least-squares slope of log(residual) against log(step).
    pub fn slope(&self) -> f64 {
        let pairs: Vec<(f64, f64)> = self
            .steps
            .iter()
            .zip(&self.residuals)
            .map(|(&h, &r)| (h.ln(), r.max(1e-300).ln()))
            .collect();
        let n = pairs.len() as f64;
        let sx: f64 = pairs.iter().map(|p| p.0).sum();
        let sy: f64 = pairs.iter().map(|p| p.1).sum();
        let sxx: f64 = pairs.iter().map(|p| p.0 * p.0).sum();
        let sxy: f64 = pairs.iter().map(|p| p.0 * p.1).sum();
        (n * sxy - sx * sy) / (n * sxx - sx * sx)
    }

    pub fn passes(&self, min_slope: f64) -> bool {
        self.residuals.iter().all(|&r| r <= self.floor) || self.slope() >= min_slope
    }
}

/// Scenario sizes at refinement level 0 for the generator geometry
/// (base S¹×S², bundle degree k, base map winding w).
#[derive(Debug, Clone, Copy)]
pub struct GeneratorScenario {
    pub base_points: usize,
    pub sphere_n: usize,
    pub fiber_points: usize,
    pub degree: i64,
    pub winding: i64,
}

impl Default for GeneratorScenario {
    fn default() -> Self {
        GeneratorScenario {
            base_points: 8,
            sphere_n: 5,
            fiber_points: 8,
            degree: 1,
            winding: 1,
        }
    }
}

/// Build the twisted generator geometry at a refinement level (grid steps
/// halve per level).
pub fn generator_primitive(sc: &GeneratorScenario, level: u32) -> Result<PrimitiveBundle> {
    let mul = 1usize << level;
    let mesh = Mesh::new(
        vec![
            Factor::Circle {
                points: sc.base_points * mul,
            },
            Factor::CubeSphere {
                n: (sc.sphere_n - 1) * mul + 1,
            },
        ],
        level,
    )?;
    let l = monopole_bundle(&mesh, 1, sc.degree)?;
    let total = build_circle_bundle(l, sc.fiber_points * mul)?;
    build_primitive_bundle(total, 0, sc.winding, 0)
}

#[derive(Debug, Clone)]
pub struct CurvatureReport {
    /// ‖dγ − p*β̄‖ over refinements
    pub gamma_consistency: ConvergenceStudy,
    /// ‖dμ − ᾱ∧β̄‖ over refinements
    pub mu_exactness: ConvergenceStudy,
    /// ‖dη − (π₁*μ − π₂*μ)‖ over refinements
    pub descent: ConvergenceStudy,
    /// |∫ β̄ − degree| at the finest level
    pub flux_defect: f64,
}

pub fn curvature_report(sc: &GeneratorScenario, levels: u32) -> Result<CurvatureReport> {
    let mut steps = Vec::new();
    let mut r_gamma = Vec::new();
    let mut r_mu = Vec::new();
    let mut r_eta = Vec::new();
    let mut flux_defect = 0.0;
    for level in 0..levels {
        let j = generator_primitive(sc, level)?;
        let ym = &j.total.total_mesh;
        let h = ym.axis_step(ym.first_axis_of(1));
        steps.push(h);
        let probes_y = probe_points(ym, 20000);
        let beta = monopole_curvature(ym, 1, sc.degree);
        let dgamma = j.total.gamma.d(DiffScheme::Ord2).sub(&beta);
        r_gamma.push(sup_on(&dgamma, &probes_y));
        let dmu = j.mu.d(DiffScheme::Ord2).sub(&j.alpha.wedge(&beta));
        r_mu.push(sup_on(&dmu, &probes_y));
        let probes_y2 = probe_points(&j.mesh2, 20000);
        let id: Vec<usize> = (0..j.total.total_mesh.factors.len()).collect();
        let mut map2 = id.clone();
        *map2.last_mut().unwrap() = j.mesh2.factors.len() - 1;
        let pi1mu = j.mu.pulled_back(&j.mesh2, &id);
        let pi2mu = j.mu.pulled_back(&j.mesh2, &map2);
        let f_resid = j.eta.d(DiffScheme::Ord2).sub(&pi1mu.sub(&pi2mu));
        r_eta.push(sup_on(&f_resid, &probes_y2));
        if level == levels - 1 {
            flux_defect = (j.total.bundle.flux() - sc.degree as f64).abs();
        }
    }
    let floor = 1e-11;
    Ok(CurvatureReport {
        gamma_consistency: ConvergenceStudy {
            steps: steps.clone(),
            residuals: r_gamma,
            floor,
        },
        mu_exactness: ConvergenceStudy {
            steps: steps.clone(),
            residuals: r_mu,
            floor,
        },
        descent: ConvergenceStudy {
            steps,
            residuals: r_eta,
            floor,
        },
        flux_defect,
    })
}

// ---------------------------------------------------------------------------

#[cfg(test)]
mod tests {
    use super::*;

    fn sphere_mesh(n: usize) -> Rc<Mesh> {
        Mesh::new(vec![Factor::CubeSphere { n }], 0).unwrap()
    }

    #[test]
    fn monopole_flux_is_the_degree() {
        for k in [-2i64, 0, 1, 3] {
            let mesh = sphere_mesh(9);
            let l = monopole_bundle(&mesh, 0, k).unwrap();
            assert!((l.flux() - k as f64).abs() < 1e-9, "flux for k={k}");
        }
    }

    #[test]
    fn gauge_transition_is_azimuthal() {
        // A_N − A_S = k/(2π)·dφ on an equatorial chart, checked against the
        // finite difference of the azimuth lift along both face axes
        let mesh = sphere_mesh(9);
        let k = 1;
        let north = monopole_connection(&mesh, 0, k);
        // south-gauge values on an equatorial face, evaluated directly
        let south = Form::new(mesh.clone(), 1, move |p: &ChartPoint| {
            let (pt, ps, ptv) = sphere_chart(p.chart[0], p.x[0], p.x[1]);
            let (x, y, z) = (pt[0], pt[1], pt[2]);
            let c = -(k as f64) / (4.0 * PI * (1.0 - z));
            vec![
                Complex64::new(c * (x * ps[1] - y * ps[0]), 0.0),
                Complex64::new(c * (x * ptv[1] - y * ptv[0]), 0.0),
            ]
        });
        let diff = north.sub(&south);
        for &(s, t) in &[(0.3, 0.2), (-0.5, 0.6), (0.0, -0.4)] {
            let h = 1e-5;
            for axis in 0..2 {
                let mut xp = vec![s, t];
                let mut xm = vec![s, t];
                xp[axis] += h;
                xm[axis] -= h;
                let lift = |x: &Vec<f64>| {
                    let (p, _, _) = sphere_chart(0, x[0], x[1]);
                    k as f64 * p[1].atan2(p[0]) / (2.0 * PI)
                };
                let fd = (lift(&xp) - lift(&xm)) / (2.0 * h);
                let got = diff.eval(&ChartPoint {
                    chart: vec![0],
                    x: vec![s, t],
                })[axis]
                    .re;
                assert!((got - fd).abs() < 1e-7, "axis {axis} at ({s},{t})");
            }
        }
    }

    #[test]
    fn equator_holonomy_is_half_flux() {
        let mesh = sphere_mesh(9);
        for k in [1i64, 2, 3] {
            let l = monopole_bundle(&mesh, 0, k).unwrap();
            let base = ChartPoint {
                chart: vec![0],
                x: vec![0.0, 0.0],
            };
            let hol = holonomy(&l, &equator_cycle(&mesh, 0, &base)).unwrap();
            let expected = mod1f(k as f64 / 2.0);
            let d = mod1f(hol - expected);
            assert!(
                d.min(1.0 - d) < 1e-8,
                "k={k}: holonomy {hol} vs {expected}"
            );
        }
    }

    #[test]
    fn trivial_connection_has_no_holonomy() {
        let mesh = Mesh::new(
            vec![
                Factor::Circle { points: 8 },
                Factor::Circle { points: 8 },
            ],
            0,
        )
        .unwrap();
        let l = trivial_bundle(&mesh);
        let base = ChartPoint {
            chart: vec![0, 0],
            x: vec![0.0, 0.3],
        };
        let hol = holonomy(&l, &base_circle_cycle(&mesh, 0, &base)).unwrap();
        assert!(hol.min(1.0 - hol) < 1e-12);
    }

    #[test]
    fn cap_holonomy_matches_enclosed_flux() {
        let mesh = sphere_mesh(9);
        let l = monopole_bundle(&mesh, 0, 1).unwrap();
        let base = ChartPoint {
            chart: vec![0],
            x: vec![0.0, 0.0],
        };
        // +z face as a cap: boundary holonomy vs enclosed flux (= 1/6)
        let hol = holonomy(&l, &face_boundary_cycle(&mesh, 0, 4, &base)).unwrap();
        let flux = flux_over_face_rect(&l, 4, (-1.0, 1.0), (-1.0, 1.0), &base);
        assert!((flux - 1.0 / 6.0).abs() < 1e-9);
        assert!((mod1f(hol - flux)).min(1.0 - mod1f(hol - flux)) < 1e-8);
        // upper hemisphere: +z face plus the t ≥ 0 halves of the four
        // equatorial faces; its flux must match the equator holonomy
        let mut cap = flux;
        for f in 0..4 {
            cap += flux_over_face_rect(&l, f, (-1.0, 1.0), (0.0, 1.0), &base);
        }
        assert!((cap - 0.5).abs() < 1e-9, "upper-hemisphere flux {cap}");
        let eq = holonomy(&l, &equator_cycle(&mesh, 0, &base)).unwrap();
        assert!((mod1f(eq - cap)).min(1.0 - mod1f(eq - cap)) < 1e-8);
    }

    #[test]
    fn mixed_gauge_loop_needs_junction_corrections() {
        // boundary of the −z face with one edge expressed in the adjacent
        // −y face's chart: the gauge changes twice along the loop and the
        // corrections must restore holonomy = enclosed flux = k/6
        let mesh = sphere_mesh(9);
        let k = 1i64;
        let l = monopole_bundle(&mesh, 0, k).unwrap();
        let seg5 = |from: [f64; 2], to: [f64; 2]| Segment {
            chart: vec![5],
            from: from.to_vec(),
            to: to.to_vec(),
        };
        // face-5 edge t=−1 from (−1,−1) to (1,−1) equals the face-3 edge
        // t=−1 from (1,−1) to (−1,−1)
        let cycle = Cycle1 {
            segments: vec![
                Segment {
                    chart: vec![3],
                    from: vec![1.0, -1.0],
                    to: vec![-1.0, -1.0],
                },
                seg5([1.0, -1.0], [1.0, 1.0]),
                seg5([1.0, 1.0], [-1.0, 1.0]),
                seg5([-1.0, 1.0], [-1.0, -1.0]),
            ],
        };
        let hol = holonomy(&l, &cycle).unwrap();
        let base = ChartPoint {
            chart: vec![0],
            x: vec![0.0, 0.0],
        };
        let flux = flux_over_face_rect(&l, 5, (-1.0, 1.0), (-1.0, 1.0), &base);
        let d = mod1f(hol - flux);
        assert!(d.min(1.0 - d) < 1e-8, "holonomy {hol} vs flux {flux}");
    }

    #[test]
    fn shift_character_is_an_exact_cocycle() {
        let m = 24i64;
        for j1 in 0..m {
            assert_eq!(shift_character(j1, j1, m), Rat::new(0, 1));
            for j2 in 0..m {
                for j3 in (0..m).step_by(5) {
                    let lhs = rat_mod1(shift_character(j1, j2, m) + shift_character(j2, j3, m));
                    assert_eq!(lhs, shift_character(j1, j3, m));
                }
            }
        }
    }

    #[test]
    fn primitivity_defects() {
        let sc = GeneratorScenario::default();
        let j = generator_primitive(&sc, 0).unwrap();
        let rep = check_primitivity(&j);
        assert_eq!(rep.transition_defect, Rat::new(0, 1));
        assert_eq!(rep.associativity_defect, Rat::new(0, 1));
        assert!(rep.connection_defect <= 1e-9);
    }

    #[test]
    fn deck_shift_changes_nothing_observable() {
        let sc = GeneratorScenario::default();
        let j0 = generator_primitive(&sc, 0).unwrap();
        let j1 = build_primitive_bundle(
            build_circle_bundle(
                monopole_bundle(&j0.total.bundle.mesh, 1, sc.degree).unwrap(),
                sc.fiber_points,
            )
            .unwrap(),
            0,
            sc.winding,
            1,
        )
        .unwrap();
        let probes = probe_points(&j0.mesh2, 2000);
        // μ is identical; the connection changes by the closed form ds, so
        // the curvature dη is unchanged
        let dmu = j0.mu.sub(&j1.mu);
        assert!(sup_on(&dmu, &probe_points(&j0.total.total_mesh, 2000)) < 1e-12);
        let df = j0
            .eta
            .d(DiffScheme::Ord2)
            .sub(&j1.eta.d(DiffScheme::Ord2));
        assert!(sup_on(&df, &probes) < 1e-10);
    }

    #[test]
    fn curvature_residuals_converge() {
        let sc = GeneratorScenario::default();
        let rep = curvature_report(&sc, 3).unwrap();
        assert!(rep.flux_defect < 1e-9, "flux defect {}", rep.flux_defect);
        assert!(
            rep.gamma_consistency.passes(1.5),
            "gamma residuals {:?} slope {}",
            rep.gamma_consistency.residuals,
            rep.gamma_consistency.slope()
        );
        assert!(
            rep.mu_exactness.passes(1.5),
            "mu residuals {:?} slope {}",
            rep.mu_exactness.residuals,
            rep.mu_exactness.slope()
        );
        assert!(
            rep.descent.passes(1.5),
            "descent residuals {:?} slope {}",
            rep.descent.residuals,
            rep.descent.slope()
        );
    }
}
