//! Čech cohomology over nerves of good covers.
//!
//! Circle-valued cochains are the one subtle point.  A transition cocycle of
//! a nontrivial line bundle is a *function* on each overlap, not a constant,
//! so a circle cochain here carries an exact rational value at the sample
//! point of every simplex contained in its overlap (one sample point per
//! nerve simplex, sitting in that simplex's intersection region).  All
//! catalog data is rational, so every identity below is exact.

use num_bigint::BigInt;
use num_rational::Rational64;
use num_traits::{One, Signed, Zero};
use std::collections::BTreeMap;

use crate::simplicial::{
    circle_complex, class_coordinates, cohomology, sphere2_complex, CohomologyGroup, IntCochain,
    SimplicialComplex,
};
use crate::{Error, Result};

pub type Rat = Rational64;

/// Reduce a rational to its representative in [0, 1).
pub fn mod1(r: Rat) -> Rat {
    let one = Rat::one();
    let mut v = r - r.floor();
    if v < Rat::zero() {
        v += one;
    }
    if v >= one {
        v -= one;
    }
    v
}

/// Key of a simplex inside a nerve: (degree, index in lexicographic order).
pub type SimplexKey = (usize, usize);

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub enum ManifoldTag {
    Circle,
    Sphere2,
    Torus2,
    CircleTimesSphere2,
    Torus3,
}

/// Nerve of a good cover.  Every simplex has one implicit sample point in
/// its intersection region; the points available inside region `σ` are the
/// sample points of all simplices containing `σ`.
#[derive(Debug, Clone)]
pub struct Nerve {
    pub manifold_tag: ManifoldTag,
    complex: SimplicialComplex,
    /// cofaces[k][i]: keys of all simplices containing the i-th k-simplex
    /// (itself first).
    cofaces: Vec<Vec<Vec<SimplexKey>>>,
}

impl Nerve {
    pub fn new(tag: ManifoldTag, complex: SimplicialComplex) -> Self {
        let dim = complex.dim();
        let mut cofaces: Vec<Vec<Vec<SimplexKey>>> = (0..=dim)
            .map(|k| vec![Vec::new(); complex.simplex_count(k)])
            .collect();
        for k in 0..=dim {
            for (i, s) in complex.simplices(k).iter().enumerate() {
                cofaces[k][i].push((k, i));
                for k2 in k + 1..=dim {
                    for (j, t) in complex.simplices(k2).iter().enumerate() {
                        if s.iter().all(|v| t.contains(v)) {
                            cofaces[k][i].push((k2, j));
                        }
                    }
                }
            }
        }
        Nerve {
            manifold_tag: tag,
            complex,
            cofaces,
        }
    }

    pub fn complex(&self) -> &SimplicialComplex {
        &self.complex
    }

    pub fn vertex_count(&self) -> usize {
        self.complex.vertex_count
    }

    pub fn dim(&self) -> usize {
        self.complex.dim()
    }

    pub fn cofaces(&self, key: SimplexKey) -> &[SimplexKey] {
        &self.cofaces[key.0][key.1]
    }

    /// Uniform partition-of-unity weight at the sample point of `at`: each
    /// patch of `at` carries weight 1/|at|.
    fn weight(&self, at: SimplexKey) -> Rat {
        Rat::new(1, (at.0 + 1) as i64)
    }

    /// Signed evaluation of an integer 1-cochain on an ordered vertex pair.
    pub fn int1(&self, c: &IntCochain, a: usize, b: usize) -> BigInt {
        assert_eq!(c.degree, 1);
        if a == b {
            return BigInt::zero();
        }
        let (lo, hi, sign) = if a < b { (a, b, 1) } else { (b, a, -1) };
        let idx = self
            .complex
            .index_of(&[lo, hi])
            .unwrap_or_else(|| panic!("edge {{{lo},{hi}}} missing from nerve"));
        c.values[idx].clone() * sign
    }

    /// Signed evaluation of an integer 2-cochain on an ordered vertex triple.
    pub fn int2(&self, c: &IntCochain, a: usize, b: usize, d: usize) -> BigInt {
        assert_eq!(c.degree, 2);
        if a == b || b == d || a == d {
            return BigInt::zero();
        }
        let mut v = [a, b, d];
        // sort, tracking parity
        let mut sign = 1i64;
        for i in 0..2 {
            for j in 0..2 - i {
                if v[j] > v[j + 1] {
                    v.swap(j, j + 1);
                    sign = -sign;
                }
            }
        }
        let idx = self
            .complex
            .index_of(&v)
            .unwrap_or_else(|| panic!("triangle {v:?} missing from nerve"));
        c.values[idx].clone() * sign
    }
}

/// Coefficient group of a Čech cochain.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub enum CoeffGroup {
    Integer,
    Real,
    Circle,
}

/// Čech cochain.  Integer and real cochains are constant per simplex;
/// circle cochains carry exact rationals in [0,1) sampled at the points of
/// each simplex's cofaces.
#[derive(Debug, Clone)]
pub struct CechCochain {
    pub degree: usize,
    pub data: CochainData,
}

#[derive(Debug, Clone)]
pub enum CochainData {
    Int(Vec<BigInt>),
    Real(Vec<f64>),
    Circle(Vec<BTreeMap<SimplexKey, Rat>>),
}

impl CechCochain {
    pub fn coeff(&self) -> CoeffGroup {
        match self.data {
            CochainData::Int(_) => CoeffGroup::Integer,
            CochainData::Real(_) => CoeffGroup::Real,
            CochainData::Circle(_) => CoeffGroup::Circle,
        }
    }

    pub fn zero(nerve: &Nerve, degree: usize, coeff: CoeffGroup) -> Self {
        let n = nerve.complex.simplex_count(degree);
        let data = match coeff {
            CoeffGroup::Integer => CochainData::Int(vec![BigInt::zero(); n]),
            CoeffGroup::Real => CochainData::Real(vec![0.0; n]),
            CoeffGroup::Circle => CochainData::Circle(
                (0..n)
                    .map(|i| {
                        nerve
                            .cofaces((degree, i))
                            .iter()
                            .map(|&key| (key, Rat::zero()))
                            .collect()
                    })
                    .collect(),
            ),
        };
        CechCochain { degree, data }
    }

    pub fn from_int(c: IntCochain) -> Self {
        CechCochain {
            degree: c.degree,
            data: CochainData::Int(c.values),
        }
    }

    pub fn as_int(&self) -> Result<IntCochain> {
        match &self.data {
            CochainData::Int(v) => Ok(IntCochain {
                degree: self.degree,
                values: v.clone(),
            }),
            _ => Err(Error::structural("expected integer coefficients")),
        }
    }

    /// Build a circle cochain from per-(simplex, point) rational values,
    /// reducing mod 1.
    pub fn circle_from_samples(degree: usize, samples: Vec<BTreeMap<SimplexKey, Rat>>) -> Self {
        let data = samples
            .into_iter()
            .map(|m| m.into_iter().map(|(k, v)| (k, mod1(v))).collect())
            .collect();
        CechCochain {
            degree,
            data: CochainData::Circle(data),
        }
    }

    pub fn circle_value(&self, simplex: usize, at: SimplexKey) -> Rat {
        match &self.data {
            CochainData::Circle(v) => *v[simplex]
                .get(&at)
                .unwrap_or_else(|| panic!("no sample at {at:?} for simplex {simplex}")),
            _ => panic!("not a circle cochain"),
        }
    }

    /// Standard alternating-sum coboundary.
    pub fn coboundary(&self, nerve: &Nerve) -> CechCochain {
        let k = self.degree;
        let complex = &nerve.complex;
        match &self.data {
            CochainData::Int(v) => CechCochain::from_int(
                IntCochain {
                    degree: k,
                    values: v.clone(),
                }
                .coboundary(complex),
            ),
            CochainData::Real(v) => {
                let m = complex.coboundary_matrix(k);
                let mut out = vec![0.0; complex.simplex_count(k + 1)];
                for (r, val) in out.iter_mut().enumerate() {
                    for c in 0..m.cols {
                        let e = m.get(r, c);
                        if !e.is_zero() {
                            let e: f64 = if e.is_negative() { -1.0 } else { 1.0 } * e.abs().to_string().parse::<f64>().unwrap();
                            *val += e * v[c];
                        }
                    }
                }
                CechCochain {
                    degree: k + 1,
                    data: CochainData::Real(out),
                }
            }
            CochainData::Circle(vals) => {
                let n1 = complex.simplex_count(k + 1);
                let mut out: Vec<BTreeMap<SimplexKey, Rat>> = Vec::with_capacity(n1);
                for (t, tau) in complex.simplices(k + 1).iter().enumerate() {
                    let mut per_point = BTreeMap::new();
                    for &rho in nerve.cofaces((k + 1, t)) {
                        let mut sum = Rat::zero();
                        for i in 0..tau.len() {
                            let mut face = tau.clone();
                            face.remove(i);
                            let fi = complex.index_of(&face).expect("face");
                            let v = vals[fi][&rho];
                            if i % 2 == 0 {
                                sum += v;
                            } else {
                                sum -= v;
                            }
                        }
                        per_point.insert(rho, mod1(sum));
                    }
                    out.push(per_point);
                }
                CechCochain {
                    degree: k + 1,
                    data: CochainData::Circle(out),
                }
            }
        }
    }

    /// Index of the first simplex where the coboundary is nonzero, if any.
    pub fn cocycle_defect(&self, nerve: &Nerve) -> Option<usize> {
        if self.degree + 1 > nerve.dim() {
            return None;
        }
        let d = self.coboundary(nerve);
        match &d.data {
            CochainData::Int(v) => v.iter().position(|x| !x.is_zero()),
            CochainData::Real(v) => v.iter().position(|x| x.abs() > 1e-9),
            CochainData::Circle(v) => v.iter().position(|m| m.values().any(|x| !x.is_zero())),
        }
    }

    pub fn is_cocycle(&self, nerve: &Nerve) -> bool {
        self.cocycle_defect(nerve).is_none()
    }
}

/// Alexander–Whitney cup product.  Pairings: ℤ×ℤ→ℤ and ℤ×circle→circle.
pub fn cup(p: &CechCochain, q: &CechCochain, nerve: &Nerve) -> Result<CechCochain> {
    let complex = &nerve.complex;
    let k = p.degree + q.degree;
    match (&p.data, &q.data) {
        (CochainData::Int(_), CochainData::Int(_)) => {
            let a = p.as_int()?;
            let b = q.as_int()?;
            Ok(CechCochain::from_int(a.cup(&b, complex)))
        }
        (CochainData::Int(pa), CochainData::Circle(qb)) => {
            let n = complex.simplex_count(k);
            let mut out: Vec<BTreeMap<SimplexKey, Rat>> = Vec::with_capacity(n);
            for (i, s) in complex.simplices(k).iter().enumerate() {
                let front = &s[..=p.degree];
                let back = &s[p.degree..];
                let a = complex.index_of(front).expect("front face");
                let b = complex.index_of(back).expect("back face");
                let pv = &pa[a];
                let pv_i64: i64 = pv.to_string().parse().map_err(|_| {
                    Error::computation("integer cochain value exceeds i64 in cup")
                })?;
                let mut per_point = BTreeMap::new();
                for &rho in nerve.cofaces((k, i)) {
                    let qv = qb[b][&rho];
                    per_point.insert(rho, mod1(qv * Rat::from_integer(pv_i64)));
                }
                out.push(per_point);
            }
            Ok(CechCochain {
                degree: k,
                data: CochainData::Circle(out),
            })
        }
        _ => Err(Error::structural(
            "cup supports Z x Z -> Z and Z x circle -> circle",
        )),
    }
}

/// Circle-valued map on the cover: exact rational local lifts `f_j` sampled
/// on the points of every simplex containing patch `j`, with integer
/// transition 1-cocycle `n_jk = f_j - f_k`.
#[derive(Debug, Clone)]
pub struct CircleValuedMap {
    pub transitions: IntCochain,
    pub local_lifts: Vec<BTreeMap<SimplexKey, Rat>>,
}

impl CircleValuedMap {
    /// Canonical map with a prescribed transition cocycle, built from the
    /// uniform partition of unity on the nerve: f_j = -Σ_l ψ_l n_{lj}.
    pub fn from_transition_cocycle(nerve: &Nerve, n: &IntCochain) -> Result<Self> {
        if n.degree != 1 {
            return Err(Error::structural("transitions must be a 1-cochain"));
        }
        if !n.is_cocycle(nerve.complex()) {
            return Err(Error::validation("transitions are not a 1-cocycle"));
        }
        let mut local_lifts = Vec::with_capacity(nerve.vertex_count());
        for j in 0..nerve.vertex_count() {
            let mut lifts = BTreeMap::new();
            // points inside patch j: sample points of simplices containing j
            for &sigma in nerve.cofaces((0, j)) {
                let verts = &nerve.complex().simplices(sigma.0)[sigma.1];
                let w = nerve.weight(sigma);
                let mut f = Rat::zero();
                for &l in verts {
                    let nlj = nerve.int1(n, l, j);
                    let nlj: i64 = nlj.to_string().parse().unwrap();
                    f -= w * Rat::from_integer(nlj);
                }
                lifts.insert(sigma, f);
            }
            local_lifts.push(lifts);
        }
        let map = CircleValuedMap {
            transitions: n.clone(),
            local_lifts,
        };
        map.validate(nerve)?;
        Ok(map)
    }

    /// Check that f_j - f_k equals the declared integer on every shared
    /// sample point, exactly.
    pub fn validate(&self, nerve: &Nerve) -> Result<()> {
        for (e, edge) in nerve.complex().simplices(1).iter().enumerate() {
            let (j, k) = (edge[0], edge[1]);
            let njk = nerve.int1(&self.transitions, j, k);
            for &sigma in nerve.cofaces((1, e)) {
                let fj = self.local_lifts[j][&sigma];
                let fk = self.local_lifts[k][&sigma];
                let diff = fj - fk;
                if !diff.is_integer() || BigInt::from(*diff.numer()) != njk {
                    return Err(Error::validation(format!(
                        "lift mismatch on edge {edge:?}: f_{j}-f_{k} = {diff} != {njk}"
                    )));
                }
            }
        }
        Ok(())
    }

    /// Re-branch the lift on one patch by an integer (deck transformation of
    /// the data); adjusts the transition cocycle accordingly.
    pub fn rebranch(&self, nerve: &Nerve, patch: usize, shift: i64) -> Result<Self> {
        let mut lifts = self.local_lifts.clone();
        for v in lifts[patch].values_mut() {
            *v += Rat::from_integer(shift);
        }
        let mut n = self.transitions.clone();
        for (e, edge) in nerve.complex().simplices(1).iter().enumerate() {
            if edge[0] == patch {
                n.values[e] += shift;
            } else if edge[1] == patch {
                n.values[e] -= shift;
            }
        }
        let map = CircleValuedMap {
            transitions: n,
            local_lifts: lifts,
        };
        map.validate(nerve)?;
        Ok(map)
    }
}

/// Transition cocycle of a line bundle with prescribed Chern 2-cocycle `m`,
/// via the uniform partition of unity: θ_jk = Σ_l ψ_l m_{ljk}, so that
/// δθ = m pointwise, exactly.  Returns the circle reduction of θ.
pub fn line_bundle_cocycle(nerve: &Nerve, m: &IntCochain) -> Result<CechCochain> {
    if m.degree != 2 {
        return Err(Error::structural("Chern representative must be a 2-cochain"));
    }
    if !m.is_cocycle(nerve.complex()) {
        return Err(Error::validation("Chern representative is not a cocycle"));
    }
    let complex = nerve.complex();
    let n_edges = complex.simplex_count(1);
    let mut samples: Vec<BTreeMap<SimplexKey, Rat>> = Vec::with_capacity(n_edges);
    for (e, edge) in complex.simplices(1).iter().enumerate() {
        let (j, k) = (edge[0], edge[1]);
        let mut per_point = BTreeMap::new();
        for &sigma in nerve.cofaces((1, e)) {
            let verts = &complex.simplices(sigma.0)[sigma.1];
            let w = nerve.weight(sigma);
            let mut theta = Rat::zero();
            for &l in verts {
                let mljk = nerve.int2(m, l, j, k);
                let mljk: i64 = mljk.to_string().parse().unwrap();
                theta += w * Rat::from_integer(mljk);
            }
            per_point.insert(sigma, theta);
        }
        samples.push(per_point);
    }
    Ok(CechCochain::circle_from_samples(1, samples))
}

/// Dixmier–Douady cocycle of the decomposable twist: in additive notation
/// d_ijk = -n_ji · θ_kj mod 1 on each triple overlap, evaluated at the
/// overlap's sample points.  Since n is integral, the value only depends on
/// θ mod 1.
pub fn dd_cocycle(u: &CircleValuedMap, c: &CechCochain, nerve: &Nerve) -> Result<CechCochain> {
    if c.degree != 1 || c.coeff() != CoeffGroup::Circle {
        return Err(Error::structural("c must be a circle 1-cochain"));
    }
    if let Some(bad) = c.cocycle_defect(nerve) {
        return Err(Error::validation(format!(
            "c is not a cocycle: violation on 2-simplex {:?}",
            nerve.complex().simplices(2)[bad]
        )));
    }
    if !u.transitions.is_cocycle(nerve.complex()) {
        return Err(Error::validation("u.transitions is not a cocycle"));
    }
    let complex = nerve.complex();
    let n_tri = complex.simplex_count(2);
    let mut samples: Vec<BTreeMap<SimplexKey, Rat>> = Vec::with_capacity(n_tri);
    for (t, tri) in complex.simplices(2).iter().enumerate() {
        let (i, j, k) = (tri[0], tri[1], tri[2]);
        // -n_ji θ_kj = -n_ij θ_jk with our orientation conventions
        let nij = nerve.int1(&u.transitions, i, j);
        let nij: i64 = nij.to_string().parse().unwrap();
        let edge_jk = complex.index_of(&[j, k]).expect("edge");
        let mut per_point = BTreeMap::new();
        for &rho in nerve.cofaces((2, t)) {
            let theta = c.circle_value(edge_jk, rho);
            per_point.insert(rho, mod1(-theta * Rat::from_integer(nij)));
        }
        samples.push(per_point);
    }
    Ok(CechCochain {
        degree: 2,
        data: CochainData::Circle(samples),
    })
}

/// Connecting map to integer cohomology: lift the circle 2-cocycle to real
/// (here: rational) representatives, continuous on each overlap, and take
/// the coboundary.  `lift_offsets`, when given, shifts each simplex's lift
/// by a constant integer — the class is unchanged.
pub fn bockstein(
    d: &CechCochain,
    nerve: &Nerve,
    lift_offsets: Option<&[i64]>,
) -> Result<IntCochain> {
    if d.degree != 2 || d.coeff() != CoeffGroup::Circle {
        return Err(Error::structural("bockstein expects a circle 2-cochain"));
    }
    if let Some(bad) = d.cocycle_defect(nerve) {
        return Err(Error::validation(format!(
            "input is not a cocycle: violation on 3-simplex {:?}",
            nerve.complex().simplices(3)[bad]
        )));
    }
    let complex = nerve.complex();
    let n_tri = complex.simplex_count(2);
    if let Some(offs) = lift_offsets {
        if offs.len() != n_tri {
            return Err(Error::structural("offset vector length mismatch"));
        }
    }
    // choose a branch per triangle: canonical value at the triangle's own
    // sample point, extended to deeper points by the nearest representative
    let half = Rat::new(1, 2);
    let mut lifts: Vec<BTreeMap<SimplexKey, Rat>> = Vec::with_capacity(n_tri);
    for t in 0..n_tri {
        let offset = Rat::from_integer(lift_offsets.map_or(0, |o| o[t]));
        let base = d.circle_value(t, (2, t)) + offset;
        let mut per_point = BTreeMap::new();
        for &rho in nerve.cofaces((2, t)) {
            let raw = d.circle_value(t, rho) + offset;
            // shift by an integer to land within 1/2 of the base value
            let mut v = raw;
            while v - base > half {
                v -= Rat::one();
            }
            while base - v > half {
                v += Rat::one();
            }
            if (v - base).abs() > half {
                return Err(Error::computation(
                    "overlap variation too large for branch continuation",
                ));
            }
            per_point.insert(rho, v);
        }
        lifts.push(per_point);
    }
    // coboundary of the lift, evaluated at each tetrahedron's points; the
    // result must be a point-independent integer
    let n_tet = complex.simplex_count(3);
    let mut values = vec![BigInt::zero(); n_tet];
    for (t, tau) in complex.simplices(3).iter().enumerate() {
        let mut result: Option<Rat> = None;
        for &rho in nerve.cofaces((3, t)) {
            let mut sum = Rat::zero();
            for i in 0..tau.len() {
                let mut face = tau.clone();
                face.remove(i);
                let fi = complex.index_of(&face).expect("face");
                let v = lifts[fi][&rho];
                if i % 2 == 0 {
                    sum += v;
                } else {
                    sum -= v;
                }
            }
            if !sum.is_integer() {
                return Err(Error::computation(format!(
                    "lifted coboundary not integral on {tau:?}: {sum}"
                )));
            }
            match result {
                None => result = Some(sum),
                Some(prev) if prev != sum => {
                    return Err(Error::computation(format!(
                        "lifted coboundary varies across overlap {tau:?}"
                    )))
                }
                _ => {}
            }
        }
        values[t] = BigInt::from(*result.unwrap().numer());
    }
    Ok(IntCochain { degree: 3, values })
}

/// Čech cohomology of the nerve.
pub fn nerve_cohomology(nerve: &Nerve, k: usize, coeff: CoeffGroup) -> Result<CohomologyGroup> {
    if nerve.complex().simplex_count(0) == 0 {
        return Err(Error::structural("empty nerve"));
    }
    if k > nerve.dim() {
        return Ok(CohomologyGroup {
            free_rank: 0,
            torsion: vec![],
        });
    }
    let g = cohomology(nerve.complex(), k);
    Ok(match coeff {
        CoeffGroup::Integer => g,
        // over R (or the circle's identity component) torsion disappears
        CoeffGroup::Real | CoeffGroup::Circle => CohomologyGroup {
            free_rank: g.free_rank,
            torsion: vec![],
        },
    })
}

/// Coordinates of an integer cocycle's class in the free part of H^k.
pub fn nerve_class_coordinates(nerve: &Nerve, z: &CechCochain) -> Result<Vec<BigInt>> {
    let zi = z.as_int()?;
    if !zi.is_cocycle(nerve.complex()) {
        return Err(Error::validation("not a cocycle"));
    }
    class_coordinates(nerve.complex(), &zi)
}

// ---------------------------------------------------------------------------
// nerve catalog
// ---------------------------------------------------------------------------

/// Circle covered by three arcs.
pub fn circle_nerve() -> Nerve {
    Nerve::new(ManifoldTag::Circle, circle_complex())
}

/// 2-sphere covered by four patches (boundary of the tetrahedron).
pub fn sphere2_nerve() -> Nerve {
    Nerve::new(ManifoldTag::Sphere2, sphere2_complex())
}

pub fn torus2_nerve() -> Nerve {
    Nerve::new(
        ManifoldTag::Torus2,
        circle_complex().product(&circle_complex()).unwrap(),
    )
}

pub fn torus3_nerve() -> Nerve {
    let t2 = circle_complex().product(&circle_complex()).unwrap();
    Nerve::new(ManifoldTag::Torus3, t2.product(&circle_complex()).unwrap())
}

pub fn circle_times_sphere2_nerve() -> Nerve {
    Nerve::new(
        ManifoldTag::CircleTimesSphere2,
        circle_complex().product(&sphere2_complex()).unwrap(),
    )
}

/// Winding-w 1-cocycle on the 3-arc circle nerve (generator for w = 1).
pub fn circle_winding_cocycle(w: i64) -> IntCochain {
    let c = circle_complex();
    let mut z = IntCochain::zero(&c, 1);
    z.values[c.index_of(&[0, 2]).unwrap()] = BigInt::from(-w);
    z
}

/// Degree-k 2-cocycle on the tetrahedron nerve (generator for k = 1).
pub fn sphere2_chern_cocycle(k: i64) -> IntCochain {
    let s = sphere2_complex();
    let mut z = IntCochain::zero(&s, 2);
    z.values[s.index_of(&[0, 1, 2]).unwrap()] = BigInt::from(k);
    z
}

/// The two projections of the S¹×S² product nerve, as vertex maps.
pub fn product_projections() -> (impl Fn(usize) -> usize, impl Fn(usize) -> usize) {
    let nw = sphere2_complex().vertex_count;
    (move |v: usize| v / nw, move |v: usize| v % nw)
}

/// Full generator data on S¹×S²: u of winding `w` pulled back from the
/// circle factor, bundle 2-cocycle of degree `deg` pulled back from the
/// sphere factor, and its circle transition cocycle.
pub struct DecomposedTwistData {
    pub nerve: Nerve,
    pub u: CircleValuedMap,
    pub alpha: IntCochain,
    pub beta: IntCochain,
    pub c: CechCochain,
}

pub fn circle_times_sphere2_twist(w: i64, deg: i64) -> Result<DecomposedTwistData> {
    let nerve = circle_times_sphere2_nerve();
    let (p1, p2) = product_projections();
    let alpha = nerve.complex().pullback_int(
        &circle_complex(),
        &p1,
        &circle_winding_cocycle(w),
    )?;
    let beta = nerve.complex().pullback_int(
        &sphere2_complex(),
        &p2,
        &sphere2_chern_cocycle(deg),
    )?;
    let u = CircleValuedMap::from_transition_cocycle(&nerve, &alpha)?;
    let c = line_bundle_cocycle(&nerve, &beta)?;
    Ok(DecomposedTwistData {
        nerve,
        u,
        alpha,
        beta,
        c,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;
    use rand::SeedableRng;

    #[test]
    fn catalog_cohomology() {
        let n = circle_nerve();
        assert_eq!(nerve_cohomology(&n, 1, CoeffGroup::Integer).unwrap().free_rank, 1);
        let s = sphere2_nerve();
        assert_eq!(nerve_cohomology(&s, 2, CoeffGroup::Integer).unwrap().free_rank, 1);
        let x = circle_times_sphere2_nerve();
        assert_eq!(nerve_cohomology(&x, 3, CoeffGroup::Integer).unwrap().free_rank, 1);
        assert_eq!(nerve_cohomology(&x, 4, CoeffGroup::Integer).unwrap().free_rank, 0);
    }

    #[test]
    fn line_bundle_cocycle_is_cocycle_with_chern_class() {
        let nerve = sphere2_nerve();
        let m = sphere2_chern_cocycle(1);
        let c = line_bundle_cocycle(&nerve, &m).unwrap();
        assert!(c.is_cocycle(&nerve));
        // the coboundary of the rational lift recovers m: rebuild the lift
        // and check δθ = m at every sample point of every triangle
        let complex = nerve.complex();
        for (t, tri) in complex.simplices(2).iter().enumerate() {
            for &rho in nerve.cofaces((2, t)) {
                let mut sum = Rat::zero();
                for i in 0..3 {
                    let mut face = tri.clone();
                    face.remove(i);
                    let fi = complex.index_of(&face).unwrap();
                    let v = c.circle_value(fi, rho);
                    if i % 2 == 0 {
                        sum += v;
                    } else {
                        sum -= v;
                    }
                }
                // equality mod 1: the branch information sits in the lift,
                // the reduced values still satisfy δθ ≡ m ≡ 0 mod 1
                assert_eq!(mod1(sum), Rat::zero());
            }
        }
    }

    #[test]
    fn u_map_construction_and_rebranch() {
        let data = circle_times_sphere2_twist(1, 1).unwrap();
        data.u.validate(&data.nerve).unwrap();
        let re = data.u.rebranch(&data.nerve, 3, 1).unwrap();
        // transition classes agree
        let z1 = CechCochain::from_int(data.u.transitions.clone());
        let z2 = CechCochain::from_int(re.transitions.clone());
        assert_eq!(
            nerve_class_coordinates(&data.nerve, &z1).unwrap(),
            nerve_class_coordinates(&data.nerve, &z2).unwrap()
        );
    }

    #[test]
    fn dd_cocycle_trivial_cases() {
        let data = circle_times_sphere2_twist(0, 1).unwrap();
        let d = dd_cocycle(&data.u, &data.c, &data.nerve).unwrap();
        // u constant: all transitions zero => d == 0
        match &d.data {
            CochainData::Circle(v) => {
                assert!(v.iter().all(|m| m.values().all(|x| x.is_zero())))
            }
            _ => panic!(),
        }
        let data = circle_times_sphere2_twist(1, 0).unwrap();
        let d = dd_cocycle(&data.u, &data.c, &data.nerve).unwrap();
        match &d.data {
            CochainData::Circle(v) => {
                assert!(v.iter().all(|m| m.values().all(|x| x.is_zero())))
            }
            _ => panic!(),
        }
    }

    #[test]
    fn dd_class_is_cup_class() {
        let data = circle_times_sphere2_twist(1, 1).unwrap();
        let d = dd_cocycle(&data.u, &data.c, &data.nerve).unwrap();
        assert!(d.is_cocycle(&data.nerve));
        let z = bockstein(&d, &data.nerve, None).unwrap();
        let cup_ab = data.alpha.cup(&data.beta, data.nerve.complex());
        let zc = nerve_class_coordinates(&data.nerve, &CechCochain::from_int(z)).unwrap();
        let cc = nerve_class_coordinates(&data.nerve, &CechCochain::from_int(cup_ab)).unwrap();
        assert_eq!(zc.len(), 1);
        assert_eq!(zc[0].abs(), BigInt::from(1));
        assert_eq!(zc, cc);
    }

    #[test]
    fn bockstein_lift_invariance() {
        let data = circle_times_sphere2_twist(1, 1).unwrap();
        let d = dd_cocycle(&data.u, &data.c, &data.nerve).unwrap();
        let z0 = bockstein(&d, &data.nerve, None).unwrap();
        let n_tri = data.nerve.complex().simplex_count(2);
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        let offs: Vec<i64> = (0..n_tri).map(|_| rng.gen_range(-3..=3)).collect();
        let z1 = bockstein(&d, &data.nerve, Some(&offs)).unwrap();
        let c0 = nerve_class_coordinates(&data.nerve, &CechCochain::from_int(z0)).unwrap();
        let c1 = nerve_class_coordinates(&data.nerve, &CechCochain::from_int(z1)).unwrap();
        assert_eq!(c0, c1);
    }

    #[test]
    fn dd_class_invariance_under_data_changes() {
        let data = circle_times_sphere2_twist(1, 1).unwrap();
        let base = {
            let d = dd_cocycle(&data.u, &data.c, &data.nerve).unwrap();
            let z = bockstein(&d, &data.nerve, None).unwrap();
            nerve_class_coordinates(&data.nerve, &CechCochain::from_int(z)).unwrap()
        };
        // re-branching u's lifts
        let u2 = data.u.rebranch(&data.nerve, 5, -1).unwrap();
        let d2 = dd_cocycle(&u2, &data.c, &data.nerve).unwrap();
        let z2 = bockstein(&d2, &data.nerve, None).unwrap();
        let c2 = nerve_class_coordinates(&data.nerve, &CechCochain::from_int(z2)).unwrap();
        assert_eq!(base, c2);
        // multiplying c by the coboundary of a constant rational 0-cochain
        let complex = data.nerve.complex();
        let g: Vec<Rat> = (0..complex.vertex_count)
            .map(|v| Rat::new((v % 5) as i64, 7))
            .collect();
        let mut samples = Vec::new();
        for (e, edge) in complex.simplices(1).iter().enumerate() {
            let mut per_point = BTreeMap::new();
            for &rho in data.nerve.cofaces((1, e)) {
                per_point.insert(rho, g[edge[1]] - g[edge[0]]);
            }
            samples.push(per_point);
        }
        let cob = CechCochain::circle_from_samples(1, samples);
        let c_mod = match (&data.c.data, &cob.data) {
            (CochainData::Circle(a), CochainData::Circle(b)) => {
                let merged: Vec<BTreeMap<SimplexKey, Rat>> = a
                    .iter()
                    .zip(b)
                    .map(|(ma, mb)| {
                        ma.iter()
                            .map(|(k, v)| (*k, mod1(*v + mb[k])))
                            .collect()
                    })
                    .collect();
                CechCochain {
                    degree: 1,
                    data: CochainData::Circle(merged),
                }
            }
            _ => unreachable!(),
        };
        assert!(c_mod.is_cocycle(&data.nerve));
        let d3 = dd_cocycle(&data.u, &c_mod, &data.nerve).unwrap();
        let z3 = bockstein(&d3, &data.nerve, None).unwrap();
        let c3 = nerve_class_coordinates(&data.nerve, &CechCochain::from_int(z3)).unwrap();
        assert_eq!(base, c3);
    }

    #[test]
    fn circle_coboundary_squares_to_zero() {
        let nerve = circle_times_sphere2_nerve();
        let complex = nerve.complex();
        let n1 = complex.simplex_count(1);
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        let mut samples = Vec::new();
        for e in 0..n1 {
            let mut per_point = BTreeMap::new();
            for &rho in nerve.cofaces((1, e)) {
                per_point.insert(rho, Rat::new(rng.gen_range(0..12), 12));
            }
            samples.push(per_point);
        }
        use rand::Rng;
        let c = CechCochain::circle_from_samples(1, samples);
        let dd = c.coboundary(&nerve).coboundary(&nerve);
        match &dd.data {
            CochainData::Circle(v) => assert!(v.iter().all(|m| m.values().all(|x| x.is_zero()))),
            _ => panic!(),
        }
    }

    #[test]
    fn cup_linearity_and_antisymmetry_class() {
        // for 1-cocycles p,q on T²: [p∪q] = -[q∪p]
        let nerve = torus2_nerve();
        let complex = nerve.complex();
        let c1 = circle_complex();
        let nw = c1.vertex_count;
        let g = circle_winding_cocycle(1);
        let p = complex.pullback_int(&c1, &|v| v / nw, &g).unwrap();
        let q = complex.pullback_int(&c1, &|v| v % nw, &g).unwrap();
        let pq = p.cup(&q, complex);
        let qp = q.cup(&p, complex);
        let a = class_coordinates(complex, &pq).unwrap();
        let b = class_coordinates(complex, &qp).unwrap();
        assert_eq!(a.len(), 1);
        assert_eq!(a[0].abs(), BigInt::from(1));
        assert_eq!(a[0], -b[0].clone());
    }
}
