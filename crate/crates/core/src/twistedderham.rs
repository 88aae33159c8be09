//! Twisted de Rham complex d + δ̄∧ in two realizations:
//!
//! * a simplicial cochain realization on product complexes (cycle graph ×
//!   subdivided octahedron), where the twisted differential D = δ + δ̄∪
//!   squares to zero exactly and dimension counts are exact integers, and
//! * a smooth collocation realization on product meshes, carrying the
//!   circle-bundle subcomplex map and its conjugation identity.
//!
//! Twisted dimensions are computed by rank: the twist only contributes the
//! degree-0 → degree-3 block (δ̄ has top degree on a 3-complex), so
//! D_even = [[δ₀, 0], [T, δ₂]] and D_odd = [δ₁, 0].  Ranks come from
//! singular-value thresholding on small complexes and from exact modular
//! Gaussian elimination on large ones; both methods are cross-checked.

use nalgebra::DMatrix;
use num_bigint::BigInt;
use num_complex::Complex64;
use num_traits::{ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::rc::Rc;

use crate::bundlegeom::{probe_points, sup_on, CircleBundleTotal};
use crate::forms::{DiffScheme, Form};
use crate::mesh::Mesh;
use crate::simplicial::{IntCochain, SimplicialComplex};
use crate::{Error, Result};

// ---------------------------------------------------------------------------
// simplicial models
// ---------------------------------------------------------------------------

/// Cycle graph with m vertices (triangulated circle).
pub fn cycle_complex(m: usize) -> SimplicialComplex {
    assert!(m >= 3);
    let mut tops: Vec<Vec<usize>> = (0..m - 1).map(|i| vec![i, i + 1]).collect();
    tops.push(vec![0, m - 1]);
    SimplicialComplex::from_top_simplices(m, &tops).expect("cycle complex")
}

/// Octahedron sphere triangulation with `level` rounds of edge-midpoint
/// subdivision (each triangle splits into four).
pub fn octahedron_complex(level: u32) -> SimplicialComplex {
    // vertices 0..5: ±x, ±y, ±z poles; purely combinatorial
    let mut tris: Vec<[usize; 3]> = vec![
        [0, 2, 4],
        [2, 1, 4],
        [1, 3, 4],
        [3, 0, 4],
        [2, 0, 5],
        [1, 2, 5],
        [3, 1, 5],
        [0, 3, 5],
    ];
    let mut nv = 6usize;
    for _ in 0..level {
        let mut midpoint = std::collections::BTreeMap::new();
        let mut next = Vec::with_capacity(tris.len() * 4);
        for t in &tris {
            let mut mids = [0usize; 3];
            for (i, (a, b)) in [(t[0], t[1]), (t[1], t[2]), (t[0], t[2])]
                .into_iter()
                .enumerate()
            {
                let key = (a.min(b), a.max(b));
                mids[i] = *midpoint.entry(key).or_insert_with(|| {
                    nv += 1;
                    nv - 1
                });
            }
            let (m01, m12, m02) = (mids[0], mids[1], mids[2]);
            next.push([t[0], m01, m02]);
            next.push([m01, t[1], m12]);
            next.push([m02, m12, t[2]]);
            next.push([m01, m12, m02]);
        }
        tris = next;
    }
    let tops: Vec<Vec<usize>> = tris
        .iter()
        .map(|t| {
            let mut v = t.to_vec();
            v.sort_unstable();
            v
        })
        .collect();
    SimplicialComplex::from_top_simplices(nv, &tops).expect("octahedron complex")
}

/// S¹×S² product model with the decomposable generator 3-cocycle
/// δ̄ = (pullback of the circle generator) ∪ (pullback of a sphere
/// generator).
pub struct ProductModel {
    pub complex: SimplicialComplex,
    pub sphere_vertices: usize,
    pub alpha: IntCochain,
    pub beta: IntCochain,
    pub delta_bar: IntCochain,
}

pub fn s1xs2_model(cycle_m: usize, level: u32) -> Result<ProductModel> {
    let circle = cycle_complex(cycle_m);
    let sphere = octahedron_complex(level);
    let nw = sphere.vertex_count;
    let complex = circle.product(&sphere)?;
    // circle generator: unit value on the wrap-around edge
    let mut alpha_c = IntCochain {
        degree: 1,
        values: vec![BigInt::zero(); circle.simplex_count(1)],
    };
    let wrap = circle
        .index_of(&[0, cycle_m - 1])
        .expect("wrap edge present");
    alpha_c.values[wrap] = BigInt::from(1);
    // sphere generator: unit value on a single triangle
    let mut beta_s = IntCochain {
        degree: 2,
        values: vec![BigInt::zero(); sphere.simplex_count(2)],
    };
    beta_s.values[0] = BigInt::from(1);
    let alpha = complex.pullback_int(&circle, &|u| u / nw, &alpha_c)?;
    let beta = complex.pullback_int(&sphere, &|u| u % nw, &beta_s)?;
    let delta_bar = alpha.cup(&beta, &complex);
    Ok(ProductModel {
        complex,
        sphere_vertices: nw,
        alpha,
        beta,
        delta_bar,
    })
}

/// Cochain with components in several degrees (the twisted differential is
/// not degree-homogeneous: it raises degree by 1 and by deg δ̄).
#[derive(Debug, Clone, Default)]
pub struct GradedCochain {
    pub parts: std::collections::BTreeMap<usize, IntCochain>,
}

impl GradedCochain {
    pub fn from_cochain(c: IntCochain) -> Self {
        let mut parts = std::collections::BTreeMap::new();
        parts.insert(c.degree, c);
        GradedCochain { parts }
    }

    fn accumulate(&mut self, c: IntCochain) {
        if c.values.is_empty() {
            return;
        }
        match self.parts.get_mut(&c.degree) {
            Some(existing) => *existing = existing.add(&c),
            None => {
                self.parts.insert(c.degree, c);
            }
        }
    }

    pub fn is_zero(&self) -> bool {
        self.parts
            .values()
            .all(|c| c.values.iter().all(|v| v.is_zero()))
    }
}

/// Twisted coboundary on graded integer cochains: (δ + δ̄∪)v, with
/// components above the top degree dropped.
pub fn twisted_coboundary(
    complex: &SimplicialComplex,
    delta_bar: &IntCochain,
    v: &GradedCochain,
) -> GradedCochain {
    let mut out = GradedCochain::default();
    for part in v.parts.values() {
        out.accumulate(part.coboundary(complex));
        if complex.simplex_count(delta_bar.degree + part.degree) > 0 {
            out.accumulate(delta_bar.cup(part, complex));
        }
    }
    out
}

// ---------------------------------------------------------------------------
// exact modular rank
// ---------------------------------------------------------------------------

const P: u64 = 2_147_483_647; // Mersenne prime 2³¹−1

fn modp(v: &BigInt) -> u64 {
    let r = v % BigInt::from(P);
    let r = r.to_i64().expect("reduced value fits i64");
    r.rem_euclid(P as i64) as u64
}

fn inv_modp(a: u64) -> u64 {
    // Fermat: a^(p−2)
    let mut base = a % P;
    let mut e = P - 2;
    let mut acc = 1u64;
    while e > 0 {
        if e & 1 == 1 {
            acc = acc * base % P;
        }
        base = base * base % P;
        e >>= 1;
    }
    acc
}

/// Column-echelon accumulator over GF(p): columns normalized to unit
/// pivots, supporting residual reduction and membership tests.
struct Echelon {
    rows: usize,
    cols: Vec<(usize, Vec<u64>)>,
}

impl Echelon {
    fn new(rows: usize) -> Self {
        Echelon {
            rows,
            cols: Vec::new(),
        }
    }

    fn reduce(&self, mut v: Vec<u64>) -> Vec<u64> {
        for (pr, c) in &self.cols {
            let f = v[*pr];
            if f != 0 {
                let f = P - f;
                for i in 0..self.rows {
                    if c[i] != 0 {
                        v[i] = (v[i] + f * c[i]) % P;
                    }
                }
            }
        }
        v
    }

    /// Reduce and insert if independent; returns whether the rank grew.
    fn insert(&mut self, v: Vec<u64>) -> bool {
        let mut v = self.reduce(v);
        match v.iter().position(|&x| x != 0) {
            None => false,
            Some(pr) => {
                let inv = inv_modp(v[pr]);
                for x in v.iter_mut() {
                    *x = *x * inv % P;
                }
                self.cols.push((pr, v));
                true
            }
        }
    }

    fn rank(&self) -> usize {
        self.cols.len()
    }
}

fn echelon_of_coboundary(complex: &SimplicialComplex, k: usize) -> Echelon {
    // build columns of δ_k (one per k-simplex) directly
    let rows = complex.simplex_count(k + 1);
    let cols = complex.simplex_count(k);
    let mut cells: Vec<Vec<(usize, u64)>> = vec![Vec::new(); cols];
    for (r, tau) in complex.simplices(k + 1).iter().enumerate() {
        for i in 0..tau.len() {
            let mut face = tau.clone();
            face.remove(i);
            let c = complex.index_of(&face).expect("face closure");
            let sign = if i % 2 == 0 { 1 } else { P - 1 };
            cells[c].push((r, sign));
        }
    }
    let mut ech = Echelon::new(rows);
    for col in cells {
        let mut v = vec![0u64; rows];
        for (r, s) in col {
            v[r] = (v[r] + s) % P;
        }
        ech.insert(v);
    }
    ech
}

/// Kernel basis of δ₀ over GF(p) (used to fold the twist block into the
/// block-triangular rank).
fn kernel0_modp(complex: &SimplicialComplex) -> Vec<Vec<u64>> {
    let rows = complex.simplex_count(1);
    let cols = complex.simplex_count(0);
    let mut m: Vec<Vec<u64>> = vec![vec![0; cols]; rows];
    for (r, tau) in complex.simplices(1).iter().enumerate() {
        for i in 0..2 {
            let mut face = tau.clone();
            face.remove(i);
            let c = complex.index_of(&face).expect("face closure");
            let sign = if i % 2 == 0 { 1 } else { P - 1 };
            m[r][c] = (m[r][c] + sign) % P;
        }
    }
    // row-reduce; track pivot columns
    let mut pivots: Vec<(usize, usize)> = Vec::new(); // (row, col)
    let mut row = 0;
    for col in 0..cols {
        let mut sel = None;
        for r in row..rows {
            if m[r][col] != 0 {
                sel = Some(r);
                break;
            }
        }
        let Some(sel) = sel else { continue };
        m.swap(row, sel);
        let inv = inv_modp(m[row][col]);
        for j in 0..cols {
            m[row][j] = m[row][j] * inv % P;
        }
        for r in 0..rows {
            if r != row && m[r][col] != 0 {
                let f = P - m[r][col];
                for j in 0..cols {
                    if m[row][j] != 0 {
                        m[r][j] = (m[r][j] + f * m[row][j]) % P;
                    }
                }
            }
        }
        pivots.push((row, col));
        row += 1;
        if row == rows {
            break;
        }
    }
    let pivot_cols: Vec<usize> = pivots.iter().map(|p| p.1).collect();
    let mut basis = Vec::new();
    for free in (0..cols).filter(|c| !pivot_cols.contains(c)) {
        let mut v = vec![0u64; cols];
        v[free] = 1;
        for &(r, c) in &pivots {
            // x_c = −m[r][free]
            v[c] = (P - m[r][free]) % P;
        }
        basis.push(v);
    }
    basis
}

// ---------------------------------------------------------------------------
// twisted dimension counts
// ---------------------------------------------------------------------------

#[derive(Debug, Clone)]
pub struct TwistedDimsReport {
    pub even: usize,
    pub odd: usize,
    /// ratio of the smallest retained to largest discarded singular value
    /// (infinite when the rank was computed exactly)
    pub gap_ratio_even: f64,
    pub gap_ratio_odd: f64,
    /// true when a spectral gap ratio fell below 10
    pub threshold_ambiguous: bool,
    pub method: &'static str,
}

fn svd_rank(m: &DMatrix<f64>) -> (usize, f64) {
    if m.nrows() == 0 || m.ncols() == 0 {
        return (0, f64::INFINITY);
    }
    let sv = m.clone().singular_values();
    let smax = sv.iter().cloned().fold(0.0f64, f64::max);
    if smax == 0.0 {
        return (0, f64::INFINITY);
    }
    let thresh = 1e-6 * smax;
    let mut kept: Vec<f64> = sv.iter().cloned().filter(|&s| s >= thresh).collect();
    let mut dropped: Vec<f64> = sv.iter().cloned().filter(|&s| s < thresh).collect();
    kept.sort_by(|a, b| a.partial_cmp(b).unwrap());
    dropped.sort_by(|a, b| b.partial_cmp(a).unwrap());
    let gap = match (kept.first(), dropped.first()) {
        (Some(&lo), Some(&hi)) if hi > 0.0 => lo / hi,
        _ => f64::INFINITY,
    };
    (kept.len(), gap)
}

fn dense_f64(complex: &SimplicialComplex, k: usize) -> DMatrix<f64> {
    let m = complex.coboundary_matrix(k);
    DMatrix::from_fn(m.rows, m.cols, |r, c| m.get(r, c).to_f64().unwrap_or(0.0))
}

/// Dimensions of twisted cohomology in even and odd total degree on a
/// 3-dimensional complex.  `delta_bar` must be a degree-3 cocycle (use an
/// all-zero cochain for the untwisted count).
pub fn twisted_dims(complex: &SimplicialComplex, delta_bar: &IntCochain) -> Result<TwistedDimsReport> {
    if delta_bar.degree != 3 {
        return Err(Error::validation("twist must have degree 3"));
    }
    if !delta_bar.is_cocycle(complex) {
        return Err(Error::validation("twist is not closed"));
    }
    let n: Vec<usize> = (0..4).map(|k| complex.simplex_count(k)).collect();
    let small = n[0] + n[2] <= 700 && n[1] + n[3] <= 700;
    if small {
        // assemble D_even = [[δ₀,0],[T,δ₂]] and D_odd = [δ₁,0] densely
        let d0 = dense_f64(complex, 0);
        let d1 = dense_f64(complex, 1);
        let d2 = dense_f64(complex, 2);
        let mut de = DMatrix::zeros(n[1] + n[3], n[0] + n[2]);
        de.view_mut((0, 0), (n[1], n[0])).copy_from(&d0);
        de.view_mut((n[1], n[0]), (n[3], n[2])).copy_from(&d2);
        for (i, s) in complex.simplices(3).iter().enumerate() {
            let val = delta_bar.values[i].to_f64().unwrap_or(0.0);
            if val != 0.0 {
                let last = *s.last().unwrap();
                de[(n[1] + i, last)] += val;
            }
        }
        let mut dod = DMatrix::zeros(n[2], n[1] + n[3]);
        dod.view_mut((0, 0), (n[2], n[1])).copy_from(&d1);
        let (re, gap_e) = svd_rank(&de);
        let (ro, gap_o) = svd_rank(&dod);
        let even = n[0] + n[2] - re - ro;
        let odd = n[1] + n[3] - ro - re;
        return Ok(TwistedDimsReport {
            even,
            odd,
            gap_ratio_even: gap_e,
            gap_ratio_odd: gap_o,
            threshold_ambiguous: gap_e < 10.0 || gap_o < 10.0,
            method: "svd",
        });
    }
    // exact modular rank, using the block-triangular shape:
    // rank D_even = rank δ₀ + rank [δ₂ | T·(kernel of δ₀)]
    let e0 = echelon_of_coboundary(complex, 0);
    let e1 = echelon_of_coboundary(complex, 1);
    let mut e2 = echelon_of_coboundary(complex, 2);
    let (r0, r1, r2) = (e0.rank(), e1.rank(), e2.rank());
    let mut extra = 0usize;
    for k in kernel0_modp(complex) {
        // T·k: (T k)(σ₃) = δ̄(σ₃) · k(last vertex of σ₃)
        let mut t = vec![0u64; n[3]];
        for (i, s) in complex.simplices(3).iter().enumerate() {
            let val = modp(&delta_bar.values[i]);
            if val != 0 {
                let last = *s.last().unwrap();
                t[i] = (t[i] + val * k[last]) % P;
            }
        }
        if e2.insert(t) {
            extra += 1;
        }
    }
    let re = r0 + r2 + extra;
    let ro = r1;
    Ok(TwistedDimsReport {
        even: n[0] + n[2] - re - ro,
        odd: n[1] + n[3] - ro - re,
        gap_ratio_even: f64::INFINITY,
        gap_ratio_odd: f64::INFINITY,
        threshold_ambiguous: false,
        method: "exact-rank",
    })
}

/// Random integer 2-cochain with entries in {−1,0,1} (for twist-by-exact
/// invariance checks).
pub fn random_2_cochain(complex: &SimplicialComplex, seed: u64) -> IntCochain {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    IntCochain {
        degree: 2,
        values: (0..complex.simplex_count(2))
            .map(|_| BigInt::from(rng.gen_range(-1i64..=1)))
            .collect(),
    }
}

// ---------------------------------------------------------------------------
// smooth realization: twist data, subcomplex map, conjugation
// ---------------------------------------------------------------------------

/// Closed 3-form twist on a mesh.
pub struct TwistData {
    pub delta_bar: Form<Complex64>,
    pub closedness_residual: f64,
}

impl TwistData {
    pub fn new(delta_bar: Form<Complex64>) -> TwistData {
        let probes = probe_points(&delta_bar.mesh, 4000);
        let closedness_residual = if delta_bar.degree + 1 > delta_bar.mesh.dim() {
            0.0
        } else {
            sup_on(&delta_bar.d(DiffScheme::Ord2), &probes)
        };
        TwistData {
            delta_bar,
            closedness_residual,
        }
    }
}

fn same_mesh(a: &Rc<Mesh>, b: &Rc<Mesh>) -> bool {
    a.factors == b.factors
}

/// Collection of forms of several degrees on one mesh (the image of the
/// twisted differential and of the subcomplex map are mixed-degree).
/// Degrees above the mesh dimension are dropped.
pub struct PolyForm {
    pub mesh: Rc<Mesh>,
    pub parts: std::collections::BTreeMap<usize, Form<Complex64>>,
}

impl PolyForm {
    pub fn from_form(f: Form<Complex64>) -> Self {
        let mesh = f.mesh.clone();
        let mut parts = std::collections::BTreeMap::new();
        if f.degree <= mesh.dim() {
            parts.insert(f.degree, f);
        }
        PolyForm { mesh, parts }
    }

    fn accumulate(&mut self, f: Form<Complex64>) {
        if f.degree > self.mesh.dim() {
            return;
        }
        match self.parts.remove(&f.degree) {
            Some(existing) => {
                self.parts.insert(f.degree, existing.add(&f));
            }
            None => {
                self.parts.insert(f.degree, f);
            }
        }
    }

    pub fn sub(&self, other: &PolyForm) -> PolyForm {
        let mut out = PolyForm {
            mesh: self.mesh.clone(),
            parts: self.parts.clone(),
        };
        for f in other.parts.values() {
            out.accumulate(f.scale(Complex64::new(-1.0, 0.0)));
        }
        out
    }

    pub fn sup_on(&self, probes: &[crate::mesh::ChartPoint]) -> f64 {
        self.parts
            .values()
            .map(|f| sup_on(f, probes))
            .fold(0.0, f64::max)
    }
}

/// (d + δ̄∧)v on graded forms.
pub fn twisted_d(v: &PolyForm, t: &TwistData, scheme: DiffScheme) -> Result<PolyForm> {
    if !same_mesh(&v.mesh, &t.delta_bar.mesh) {
        return Err(Error::structural("form and twist live on different meshes"));
    }
    let mut out = PolyForm {
        mesh: v.mesh.clone(),
        parts: Default::default(),
    };
    for f in v.parts.values() {
        if f.degree < v.mesh.dim() {
            out.accumulate(f.d(scheme));
        }
        if t.delta_bar.degree + f.degree <= v.mesh.dim() {
            out.accumulate(t.delta_bar.wedge(f));
        }
    }
    Ok(out)
}

/// ṽ = p*v + γ∧p*ᾱ∧p*v on the circle-bundle total space: the image of the
/// base twisted complex inside the fiber-invariant forms upstairs.
pub fn subcomplex_map(
    v: &PolyForm,
    tot: &CircleBundleTotal,
    alpha_bar: &Form<Complex64>,
) -> Result<PolyForm> {
    if !same_mesh(&v.mesh, &tot.bundle.mesh) || !same_mesh(&alpha_bar.mesh, &tot.bundle.mesh) {
        return Err(Error::structural("forms must live on the bundle base"));
    }
    let base_factors: Vec<usize> = (0..v.mesh.factors.len()).collect();
    let pa = alpha_bar.pulled_back(&tot.total_mesh, &base_factors);
    let gamma_alpha = tot.gamma.wedge(&pa);
    let mut out = PolyForm {
        mesh: tot.total_mesh.clone(),
        parts: Default::default(),
    };
    for f in v.parts.values() {
        let pf = f.pulled_back(&tot.total_mesh, &base_factors);
        if pf.degree + 2 <= tot.total_mesh.dim() {
            out.accumulate(gamma_alpha.wedge(&pf));
        }
        out.accumulate(pf);
    }
    Ok(out)
}

/// Residuals of the two defining conditions of the subcomplex: fiber
/// invariance 𝓛_{∂θ}ṽ (via Cartan's formula) and ι_{∂θ}ṽ = p*ᾱ∧ṽ.
pub fn subcomplex_condition_residuals(
    vtilde: &PolyForm,
    tot: &CircleBundleTotal,
    alpha_bar: &Form<Complex64>,
    scheme: DiffScheme,
) -> Result<(f64, f64)> {
    let theta_axis = tot.total_mesh.first_axis_of(tot.fiber_factor);
    let probes = probe_points(&tot.total_mesh, 4000);
    let dim = tot.total_mesh.dim();
    let mut lie = PolyForm {
        mesh: tot.total_mesh.clone(),
        parts: Default::default(),
    };
    let mut iota = PolyForm {
        mesh: tot.total_mesh.clone(),
        parts: Default::default(),
    };
    for f in vtilde.parts.values() {
        if f.degree < dim {
            lie.accumulate(f.d(scheme).contract_axis(theta_axis));
        }
        if f.degree >= 1 {
            let c = f.contract_axis(theta_axis);
            if c.degree < dim {
                lie.accumulate(c.d(scheme));
            }
            iota.accumulate(c);
        }
    }
    let r_lie = lie.sup_on(&probes);
    let base_factors: Vec<usize> = (0..tot.bundle.mesh.factors.len()).collect();
    let pa = alpha_bar.pulled_back(&tot.total_mesh, &base_factors);
    let mut rhs = PolyForm {
        mesh: tot.total_mesh.clone(),
        parts: Default::default(),
    };
    for f in vtilde.parts.values() {
        if pa.degree + f.degree <= dim {
            rhs.accumulate(pa.wedge(f));
        }
    }
    let r_iota = iota.sub(&rhs).sup_on(&probes);
    Ok((r_lie, r_iota))
}

/// ‖ d(ṽ) − (twisted d v)~ ‖ over probe points: the conjugation identity
/// of the subcomplex map.
pub fn conjugation_check(
    v: &PolyForm,
    tot: &CircleBundleTotal,
    alpha_bar: &Form<Complex64>,
    t: &TwistData,
    scheme: DiffScheme,
) -> Result<f64> {
    let vt = subcomplex_map(v, tot, alpha_bar)?;
    let dv = twisted_d(v, t, scheme)?;
    let dvt = subcomplex_map(&dv, tot, alpha_bar)?;
    let mut dvtilde = PolyForm {
        mesh: tot.total_mesh.clone(),
        parts: Default::default(),
    };
    for f in vt.parts.values() {
        if f.degree < tot.total_mesh.dim() {
            dvtilde.accumulate(f.d(scheme));
        }
    }
    let resid = dvtilde.sub(&dvt);
    Ok(resid.sup_on(&probe_points(&tot.total_mesh, 8000)))
}

// ---------------------------------------------------------------------------

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bundlegeom::{
        build_circle_bundle, circle_generator_form, monopole_bundle, monopole_curvature,
        ConvergenceStudy, GeneratorScenario,
    };
    use crate::mesh::{sphere_chart, ChartPoint, Factor};
    use crate::simplicial::{class_coordinates, cohomology};
    use std::f64::consts::PI;

    #[test]
    fn octahedron_subdivision_has_sphere_cohomology() {
        for level in 0..3u32 {
            let s = octahedron_complex(level);
            assert_eq!(cohomology(&s, 0).free_rank, 1);
            assert_eq!(cohomology(&s, 1).free_rank, 0);
            let h2 = cohomology(&s, 2);
            assert_eq!(h2.free_rank, 1);
            assert!(h2.torsion.is_empty());
        }
    }

    #[test]
    fn generator_twist_is_a_generator_of_h3() {
        let m = s1xs2_model(3, 0).unwrap();
        let coords = class_coordinates(&m.complex, &m.delta_bar).unwrap();
        assert_eq!(coords.len(), 1);
        assert_eq!(num_traits::Signed::abs(&coords[0]), BigInt::from(1));
    }

    #[test]
    fn twisted_coboundary_squares_to_zero_exactly() {
        let m = s1xs2_model(3, 0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for deg in 0..=1usize {
            let v = IntCochain {
                degree: deg,
                values: (0..m.complex.simplex_count(deg))
                    .map(|_| BigInt::from(rng.gen_range(-3i64..=3)))
                    .collect(),
            };
            let v = GradedCochain::from_cochain(v);
            let ddv = twisted_coboundary(
                &m.complex,
                &m.delta_bar,
                &twisted_coboundary(&m.complex, &m.delta_bar, &v),
            );
            assert!(ddv.is_zero(), "degree {deg}");
        }
    }

    #[test]
    fn untwisted_dims_are_2_2_and_twisted_1_1() {
        for level in [0u32, 1] {
            let m = s1xs2_model(3, level).unwrap();
            let zero = IntCochain {
                degree: 3,
                values: vec![BigInt::zero(); m.complex.simplex_count(3)],
            };
            let un = twisted_dims(&m.complex, &zero).unwrap();
            assert_eq!((un.even, un.odd), (2, 2), "untwisted at level {level}");
            assert!(!un.threshold_ambiguous);
            let tw = twisted_dims(&m.complex, &m.delta_bar).unwrap();
            assert_eq!((tw.even, tw.odd), (1, 1), "twisted at level {level}");
        }
    }

    #[test]
    fn exact_rank_and_svd_agree() {
        let m = s1xs2_model(3, 1).unwrap();
        let tw_svd = twisted_dims(&m.complex, &m.delta_bar).unwrap();
        assert_eq!(tw_svd.method, "svd");
        // force the exact path by a direct call on the large level
        let m2 = s1xs2_model(3, 2).unwrap();
        let tw_exact = twisted_dims(&m2.complex, &m2.delta_bar).unwrap();
        assert_eq!(tw_exact.method, "exact-rank");
        assert_eq!((tw_svd.even, tw_svd.odd), (tw_exact.even, tw_exact.odd));
    }

    #[test]
    fn twist_by_exact_form_is_invariant() {
        let m = s1xs2_model(3, 1).unwrap();
        let base = twisted_dims(&m.complex, &m.delta_bar).unwrap();
        for seed in [1u64, 2] {
            let eta = random_2_cochain(&m.complex, seed);
            let shifted = m.delta_bar.add(&eta.coboundary(&m.complex));
            let rep = twisted_dims(&m.complex, &shifted).unwrap();
            assert_eq!((rep.even, rep.odd), (base.even, base.odd), "seed {seed}");
        }
    }

    // ---- smooth half ----

    fn smooth_scenario(level: u32) -> (CircleBundleTotal, Form<Complex64>, TwistData) {
        let sc = GeneratorScenario::default();
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
        )
        .unwrap();
        let l = monopole_bundle(&mesh, 1, sc.degree).unwrap();
        let alpha = circle_generator_form(&mesh, 0, sc.winding as f64);
        let beta = monopole_curvature(&mesh, 1, sc.degree);
        let twist = TwistData::new(alpha.wedge(&beta));
        let tot = build_circle_bundle(l, sc.fiber_points).unwrap();
        (tot, alpha, twist)
    }

    fn trig_test_form(mesh: &Rc<Mesh>) -> Form<Complex64> {
        // a global 1-form: a(x,p) dx + c(x)·(embedded covector field)
        Form::new(mesh.clone(), 1, |p: &ChartPoint| {
            let (q, ps, pt) = sphere_chart(p.chart[1], p.x[1], p.x[2]);
            let x = p.x[0];
            let a = (2.0 * PI * x).sin() * (1.0 + q[0] * q[2]);
            let w = [q[1] * q[2], q[0] + 0.3, q[0] * q[1] - q[2]];
            let c = 0.7 + 0.2 * (2.0 * PI * x).cos();
            let ws = c * (w[0] * ps[0] + w[1] * ps[1] + w[2] * ps[2]);
            let wt = c * (w[0] * pt[0] + w[1] * pt[1] + w[2] * pt[2]);
            vec![
                Complex64::new(a, 0.0),
                Complex64::new(ws, 0.0),
                Complex64::new(wt, 0.0),
            ]
        })
    }

    #[test]
    fn twist_data_is_closed_and_twisted_d_squares_small() {
        let (_tot, alpha, twist) = smooth_scenario(0);
        assert!(twist.closedness_residual < 1e-9);
        let mesh = alpha.mesh.clone();
        let v = Form::new(mesh.clone(), 0, |p: &ChartPoint| {
            let (q, _, _) = sphere_chart(p.chart[1], p.x[1], p.x[2]);
            vec![Complex64::new(
                (2.0 * PI * p.x[0]).cos() * (1.0 + 0.5 * q[2]),
                0.0,
            )]
        });
        let v = PolyForm::from_form(v);
        let dv = twisted_d(&v, &twist, DiffScheme::Ord2).unwrap();
        let ddv = twisted_d(&dv, &twist, DiffScheme::Ord2).unwrap();
        let probes = probe_points(&mesh, 4000);
        assert!(ddv.sup_on(&probes) < 1e-6);
    }

    #[test]
    fn subcomplex_map_of_one_and_conditions() {
        let (tot, alpha, _twist) = smooth_scenario(0);
        let mesh = alpha.mesh.clone();
        let one = PolyForm::from_form(Form::constant(mesh.clone(), Complex64::new(1.0, 0.0)));
        let vt = subcomplex_map(&one, &tot, &alpha).unwrap();
        // ṽ(1) = 1 + γ∧p*ᾱ: the degree-0 part stays the constant 1 and a
        // degree-2 part appears
        let p = probe_points(&tot.total_mesh, 10)[3].clone();
        let v = vt.parts[&0].eval(&p);
        assert!((v[0] - Complex64::new(1.0, 0.0)).norm() < 1e-12);
        assert!(vt.parts.contains_key(&2));
        let (r_lie, r_iota) = subcomplex_condition_residuals(&vt, &tot, &alpha, DiffScheme::Ord2)
            .unwrap();
        assert!(r_lie < 1e-9, "Lie residual {r_lie}");
        assert!(r_iota < 1e-9, "contraction residual {r_iota}");
        // conditions also hold for the image of a non-trivial form
        let v1 = PolyForm::from_form(trig_test_form(&mesh));
        let vt1 = subcomplex_map(&v1, &tot, &alpha).unwrap();
        let (r_lie, r_iota) =
            subcomplex_condition_residuals(&vt1, &tot, &alpha, DiffScheme::Ord2).unwrap();
        assert!(r_lie < 1e-8, "Lie residual {r_lie}");
        assert!(r_iota < 1e-9, "contraction residual {r_iota}");
    }

    #[test]
    fn conjugation_residual_converges() {
        let mut steps = Vec::new();
        let mut residuals = Vec::new();
        for level in 0..3u32 {
            let (tot, alpha, twist) = smooth_scenario(level);
            let v = PolyForm::from_form(trig_test_form(&alpha.mesh));
            let r = conjugation_check(&v, &tot, &alpha, &twist, DiffScheme::Ord2).unwrap();
            steps.push(alpha.mesh.axis_step(1));
            residuals.push(r);
        }
        let study = ConvergenceStudy {
            steps,
            residuals: residuals.clone(),
            floor: 1e-11,
        };
        assert!(
            study.passes(1.5),
            "residuals {residuals:?} slope {}",
            study.slope()
        );
    }

    #[test]
    fn flat_scenario_conjugation_is_exact() {
        // winding 0: the map is a plain pullback and d commutes with it
        let mesh = Mesh::new(
            vec![
                Factor::Circle { points: 8 },
                Factor::CubeSphere { n: 5 },
            ],
            0,
        )
        .unwrap();
        let l = monopole_bundle(&mesh, 1, 1).unwrap();
        let alpha = circle_generator_form(&mesh, 0, 0.0);
        let beta = monopole_curvature(&mesh, 1, 1);
        let twist = TwistData::new(alpha.wedge(&beta));
        let tot = build_circle_bundle(l, 8).unwrap();
        let v = PolyForm::from_form(trig_test_form(&mesh));
        let r = conjugation_check(&v, &tot, &alpha, &twist, DiffScheme::Ord2).unwrap();
        assert!(r < 1e-10, "flat conjugation residual {r}");
    }
}
