//! Differential forms on product-grid meshes, backed by evaluators.
//!
//! A form of degree k stores a closure producing all C(dim, k) components
//! (with respect to the local coordinate coframe, axes in increasing order)
//! at any chart point.  Derivatives are finite differences of the evaluator
//! with a resolution-tied step, so refining the mesh honestly halves the
//! step; wedge and contraction are pointwise.  Values can be scalars or
//! operator blocks — anything implementing [`Coeff`].

use num_complex::Complex64;
use std::rc::Rc;

use crate::fiberops::CMat;
use crate::mesh::{ChartPoint, Mesh};

/// Coefficient ring of a form: complex scalars or operator blocks.
pub trait Coeff: Clone + 'static {
    fn add(&self, o: &Self) -> Self;
    fn scale(&self, c: Complex64) -> Self;
    fn mul(&self, o: &Self) -> Self;
    fn norm(&self) -> f64;
}

impl Coeff for Complex64 {
    fn add(&self, o: &Self) -> Self {
        self + o
    }
    fn scale(&self, c: Complex64) -> Self {
        self * c
    }
    fn mul(&self, o: &Self) -> Self {
        self * o
    }
    fn norm(&self) -> f64 {
        num_complex::Complex::norm(*self)
    }
}

impl Coeff for CMat {
    fn add(&self, o: &Self) -> Self {
        self + o
    }
    fn scale(&self, c: Complex64) -> Self {
        self * c
    }
    fn mul(&self, o: &Self) -> Self {
        self * o
    }
    fn norm(&self) -> f64 {
        nalgebra::Matrix::norm(self)
    }
}

/// Lexicographically ordered k-subsets of 0..dim.
pub fn axis_subsets(dim: usize, k: usize) -> Vec<Vec<usize>> {
    if k > dim {
        return Vec::new();
    }
    let mut out = Vec::new();
    let mut cur: Vec<usize> = (0..k).collect();
    loop {
        out.push(cur.clone());
        // advance
        let mut i = k;
        loop {
            if i == 0 {
                return out;
            }
            i -= 1;
            if cur[i] + (k - i) <= dim - 1 {
                cur[i] += 1;
                for j in i + 1..k {
                    cur[j] = cur[j - 1] + 1;
                }
                break;
            }
        }
    }
}

/// Sign of the permutation sorting the concatenation of two disjoint
/// sorted subsets, as used by the wedge product.
fn shuffle_sign(a: &[usize], b: &[usize]) -> f64 {
    let mut inversions = 0;
    for &x in a {
        for &y in b {
            if x > y {
                inversions += 1;
            }
        }
    }
    if inversions % 2 == 0 {
        1.0
    } else {
        -1.0
    }
}

/// Finite-difference scheme for exterior derivatives.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DiffScheme {
    /// central differences, O(h²) — used in convergence studies
    Ord2,
    /// five-point central differences, O(h⁴) — used where pairings need
    /// more accuracy than a slope study
    Ord4,
    /// seven-point central differences, O(h⁶)
    Ord6,
}

#[derive(Clone)]
pub struct Form<T: Coeff> {
    pub mesh: Rc<Mesh>,
    pub degree: usize,
    eval: Rc<dyn Fn(&ChartPoint) -> Vec<T>>,
}

impl<T: Coeff> Form<T> {
    pub fn new(
        mesh: Rc<Mesh>,
        degree: usize,
        eval: impl Fn(&ChartPoint) -> Vec<T> + 'static,
    ) -> Self {
        Form {
            mesh,
            degree,
            eval: Rc::new(eval),
        }
    }

    pub fn components(&self) -> usize {
        axis_subsets(self.mesh.dim(), self.degree).len()
    }

    pub fn eval(&self, p: &ChartPoint) -> Vec<T> {
        (self.eval)(p)
    }

    pub fn add(&self, other: &Form<T>) -> Form<T> {
        assert_eq!(self.degree, other.degree, "degree mismatch in add");
        let (a, b) = (self.eval.clone(), other.eval.clone());
        Form {
            mesh: self.mesh.clone(),
            degree: self.degree,
            eval: Rc::new(move |p| {
                let va = a(p);
                let vb = b(p);
                va.iter().zip(&vb).map(|(x, y)| x.add(y)).collect()
            }),
        }
    }

    pub fn scale(&self, c: Complex64) -> Form<T> {
        let a = self.eval.clone();
        Form {
            mesh: self.mesh.clone(),
            degree: self.degree,
            eval: Rc::new(move |p| a(p).iter().map(|x| x.scale(c)).collect()),
        }
    }

    pub fn sub(&self, other: &Form<T>) -> Form<T> {
        self.add(&other.scale(Complex64::new(-1.0, 0.0)))
    }

    pub fn map<U: Coeff>(&self, f: impl Fn(&T) -> U + 'static) -> Form<U> {
        let a = self.eval.clone();
        Form {
            mesh: self.mesh.clone(),
            degree: self.degree,
            eval: Rc::new(move |p| a(p).iter().map(&f).collect()),
        }
    }

    /// Pointwise wedge product (values multiplied with `Coeff::mul`, left
    /// factor first — order matters for operator-valued forms).
    pub fn wedge(&self, other: &Form<T>) -> Form<T> {
        let dim = self.mesh.dim();
        let (ka, kb) = (self.degree, other.degree);
        let k = ka + kb;
        let subs = axis_subsets(dim, k);
        let subs_a = axis_subsets(dim, ka);
        // precompute the split table: for each output subset, the list of
        // (index into a-components, index into b-components, sign)
        let mut table: Vec<Vec<(usize, usize, f64)>> = Vec::with_capacity(subs.len());
        let subs_b = axis_subsets(dim, kb);
        for s in &subs {
            let mut splits = Vec::new();
            for (ia, a_sub) in subs_a.iter().enumerate() {
                if !a_sub.iter().all(|x| s.contains(x)) {
                    continue;
                }
                let b_sub: Vec<usize> = s.iter().copied().filter(|x| !a_sub.contains(x)).collect();
                let ib = subs_b.iter().position(|t| *t == b_sub).unwrap();
                splits.push((ia, ib, shuffle_sign(a_sub, &b_sub)));
            }
            table.push(splits);
        }
        let (a, b) = (self.eval.clone(), other.eval.clone());
        Form {
            mesh: self.mesh.clone(),
            degree: k,
            eval: Rc::new(move |p| {
                let va = a(p);
                let vb = b(p);
                table
                    .iter()
                    .map(|splits| {
                        let mut acc: Option<T> = None;
                        for &(ia, ib, sign) in splits {
                            let term = va[ia].mul(&vb[ib]).scale(Complex64::new(sign, 0.0));
                            acc = Some(match acc {
                                None => term,
                                Some(x) => x.add(&term),
                            });
                        }
                        acc.expect("nonempty split list")
                    })
                    .collect()
            }),
        }
    }

    /// Exterior derivative by finite differences of the evaluator.
    /// Derivatives along virtual axes vanish.
    pub fn d(&self, scheme: DiffScheme) -> Form<T> {
        let dim = self.mesh.dim();
        let k = self.degree;
        let subs_out = axis_subsets(dim, k + 1);
        let subs_in = axis_subsets(dim, k);
        // (axis to differentiate, input component, sign) per output component
        let mut table: Vec<Vec<(usize, usize, f64)>> = Vec::with_capacity(subs_out.len());
        for s in &subs_out {
            let mut terms = Vec::new();
            for (pos, &axis) in s.iter().enumerate() {
                let rest: Vec<usize> = s
                    .iter()
                    .copied()
                    .filter(|&x| x != axis)
                    .collect();
                let ci = subs_in.iter().position(|t| *t == rest).unwrap();
                let sign = if pos % 2 == 0 { 1.0 } else { -1.0 };
                terms.push((axis, ci, sign));
            }
            table.push(terms);
        }
        let mesh = self.mesh.clone();
        let a = self.eval.clone();
        Form {
            mesh: self.mesh.clone(),
            degree: k + 1,
            eval: Rc::new(move |p| {
                // cache shifted evaluations per axis
                let dim_axes: Vec<usize> = (0..mesh.dim()).collect();
                let mut partials: Vec<Option<Vec<T>>> = vec![None; dim_axes.len()];
                let needed: Vec<usize> = {
                    let mut v: Vec<usize> =
                        table.iter().flatten().map(|&(axis, _, _)| axis).collect();
                    v.sort_unstable();
                    v.dedup();
                    v
                };
                for &axis in &needed {
                    let h = mesh.axis_step(axis);
                    if h == 0.0 {
                        continue; // virtual axis: derivative is zero
                    }
                    let sample = |delta: f64| a(&mesh.shifted(p, axis, delta));
                    let deriv: Vec<T> = match scheme {
                        DiffScheme::Ord2 => {
                            let fp = sample(h);
                            let fm = sample(-h);
                            fp.iter()
                                .zip(&fm)
                                .map(|(p1, m1)| {
                                    p1.add(&m1.scale(Complex64::new(-1.0, 0.0)))
                                        .scale(Complex64::new(0.5 / h, 0.0))
                                })
                                .collect()
                        }
                        DiffScheme::Ord4 => {
                            let f1 = sample(h);
                            let m1 = sample(-h);
                            let f2 = sample(2.0 * h);
                            let m2 = sample(-2.0 * h);
                            (0..f1.len())
                                .map(|i| {
                                    let t = f1[i]
                                        .add(&m1[i].scale(Complex64::new(-1.0, 0.0)))
                                        .scale(Complex64::new(8.0, 0.0));
                                    let u = m2[i].add(&f2[i].scale(Complex64::new(-1.0, 0.0)));
                                    t.add(&u).scale(Complex64::new(1.0 / (12.0 * h), 0.0))
                                })
                                .collect()
                        }
                        DiffScheme::Ord6 => {
                            let f1 = sample(h);
                            let m1 = sample(-h);
                            let f2 = sample(2.0 * h);
                            let m2 = sample(-2.0 * h);
                            let f3 = sample(3.0 * h);
                            let m3 = sample(-3.0 * h);
                            (0..f1.len())
                                .map(|i| {
                                    let d1 = f1[i].add(&m1[i].scale(Complex64::new(-1.0, 0.0)));
                                    let d2 = f2[i].add(&m2[i].scale(Complex64::new(-1.0, 0.0)));
                                    let d3 = f3[i].add(&m3[i].scale(Complex64::new(-1.0, 0.0)));
                                    d1.scale(Complex64::new(45.0, 0.0))
                                        .add(&d2.scale(Complex64::new(-9.0, 0.0)))
                                        .add(&d3)
                                        .scale(Complex64::new(1.0 / (60.0 * h), 0.0))
                                })
                                .collect()
                        }
                    };
                    partials[axis] = Some(deriv);
                }
                let base = a(p); // shape reference for zero terms
                table
                    .iter()
                    .map(|terms| {
                        let mut acc: Option<T> = None;
                        for &(axis, ci, sign) in terms {
                            let term = match &partials[axis] {
                                Some(dv) => dv[ci].scale(Complex64::new(sign, 0.0)),
                                None => base[0].scale(Complex64::new(0.0, 0.0)),
                            };
                            acc = Some(match acc {
                                None => term,
                                Some(x) => x.add(&term),
                            });
                        }
                        acc.expect("nonempty derivative terms")
                    })
                    .collect()
            }),
        }
    }

    /// Interior product with the coordinate vector field of `axis`.
    pub fn contract_axis(&self, axis: usize) -> Form<T> {
        assert!(self.degree >= 1);
        let dim = self.mesh.dim();
        let subs_out = axis_subsets(dim, self.degree - 1);
        let subs_in = axis_subsets(dim, self.degree);
        let mut table: Vec<Option<(usize, f64)>> = Vec::with_capacity(subs_out.len());
        for s in &subs_out {
            if s.contains(&axis) {
                table.push(None);
                continue;
            }
            let mut full: Vec<usize> = s.clone();
            let pos = full.iter().filter(|&&x| x < axis).count();
            full.insert(pos, axis);
            let ci = subs_in.iter().position(|t| *t == full).unwrap();
            let sign = if pos % 2 == 0 { 1.0 } else { -1.0 };
            table.push(Some((ci, sign)));
        }
        let a = self.eval.clone();
        Form {
            mesh: self.mesh.clone(),
            degree: self.degree - 1,
            eval: Rc::new(move |p| {
                let v = a(p);
                table
                    .iter()
                    .map(|t| match t {
                        Some((ci, sign)) => v[*ci].scale(Complex64::new(*sign, 0.0)),
                        None => v[0].scale(Complex64::new(0.0, 0.0)),
                    })
                    .collect()
            }),
        }
    }

    /// Pull back along the projection of `big` onto this form's mesh, where
    /// `factor_map[i]` is the index (in `big`) of this mesh's i-th factor.
    pub fn pulled_back(&self, big: &Rc<Mesh>, factor_map: &[usize]) -> Form<T> {
        assert_eq!(factor_map.len(), self.mesh.factors.len());
        // axis correspondence: small axis -> big axis
        let mut axis_map = Vec::new();
        for (sf, &bf) in factor_map.iter().enumerate() {
            assert_eq!(self.mesh.factors[sf], big.factors[bf], "factor mismatch");
            let b0 = big.first_axis_of(bf);
            for a in 0..self.mesh.factors[sf].axes() {
                axis_map.push(b0 + a);
            }
        }
        let dim_b = big.dim();
        let subs_out = axis_subsets(dim_b, self.degree);
        let subs_in = axis_subsets(self.mesh.dim(), self.degree);
        // each output component either corresponds to a small component or
        // vanishes (legs outside the image of the projection's cotangent map)
        let table: Vec<Option<usize>> = subs_out
            .iter()
            .map(|s| {
                let mut small = Vec::new();
                for &ax in s {
                    match axis_map.iter().position(|&b| b == ax) {
                        Some(sm) => small.push(sm),
                        None => return None,
                    }
                }
                small.sort_unstable();
                Some(subs_in.iter().position(|t| *t == small).unwrap())
            })
            .collect();
        let a = self.eval.clone();
        let small_mesh = self.mesh.clone();
        let fm = factor_map.to_vec();
        let axis_map2 = axis_map.clone();
        Form {
            mesh: big.clone(),
            degree: self.degree,
            eval: Rc::new(move |p| {
                let q = ChartPoint {
                    chart: fm.iter().map(|&bf| p.chart[bf]).collect(),
                    x: axis_map2.iter().map(|&ba| p.x[ba]).collect(),
                };
                let _ = &small_mesh;
                let v = a(&q);
                table
                    .iter()
                    .map(|t| match t {
                        Some(ci) => v[*ci].clone(),
                        None => v[0].scale(Complex64::new(0.0, 0.0)),
                    })
                    .collect()
            }),
        }
    }

    /// Sup-norm over the sample lattice.
    pub fn sup_norm(&self) -> f64 {
        let mut m: f64 = 0.0;
        for p in self.mesh.lattice() {
            for v in self.eval(&p) {
                m = m.max(v.norm());
            }
        }
        m
    }

    /// Integrate over a set of whole factors, producing a form on the mesh
    /// with those factors removed.  Convention: the integrated legs are
    /// moved to the back (in increasing axis order), so a form written
    /// α ∧ dvol_fiber pushes forward to α times the fiber volume.
    pub fn fiber_integrate(&self, factors: &[usize]) -> Form<T> {
        let mesh = &self.mesh;
        let int_axes: Vec<usize> = factors
            .iter()
            .flat_map(|&f| {
                let a0 = mesh.first_axis_of(f);
                (a0..a0 + mesh.factors[f].axes()).collect::<Vec<_>>()
            })
            .collect();
        let fiber_dim = int_axes.len();
        assert!(self.degree >= fiber_dim, "form degree below fiber dimension");
        let kept_factors: Vec<usize> =
            (0..mesh.factors.len()).filter(|f| !factors.contains(f)).collect();
        let small = Rc::new(Mesh {
            factors: kept_factors.iter().map(|&f| mesh.factors[f]).collect(),
            resolution: mesh.resolution,
        });
        let kept_axes: Vec<usize> = kept_factors
            .iter()
            .flat_map(|&f| {
                let a0 = mesh.first_axis_of(f);
                (a0..a0 + mesh.factors[f].axes()).collect::<Vec<_>>()
            })
            .collect();
        // fiber quadrature over the integrated factors
        let fiber_mesh = Rc::new(Mesh {
            factors: factors.iter().map(|&f| mesh.factors[f]).collect(),
            resolution: mesh.resolution,
        });
        let quad = fiber_mesh.quadrature();
        let subs_small = axis_subsets(small.dim(), self.degree - fiber_dim);
        let subs_big = axis_subsets(mesh.dim(), self.degree);
        // for each output component: big component index and sign moving the
        // fiber legs to the front
        let table: Vec<(usize, f64)> = subs_small
            .iter()
            .map(|s| {
                let mut big: Vec<usize> = s.iter().map(|&sa| kept_axes[sa]).collect();
                big.extend(int_axes.iter().copied());
                let mut sorted = big.clone();
                sorted.sort_unstable();
                let sign = perm_sign(&big, &sorted);
                let ci = subs_big.iter().position(|t| *t == sorted).unwrap();
                (ci, sign)
            })
            .collect();
        let a = self.eval.clone();
        let mesh_full = mesh.clone();
        let factors_v = factors.to_vec();
        let kept_v = kept_factors.clone();
        Form {
            mesh: small,
            degree: self.degree - fiber_dim,
            eval: Rc::new(move |p| {
                let mut acc: Vec<Option<T>> = vec![None; table.len()];
                for (fp, w) in &quad {
                    // assemble the full point
                    let mut chart = vec![0usize; mesh_full.factors.len()];
                    let mut x = vec![0.0f64; mesh_full.dim()];
                    for (i, &f) in factors_v.iter().enumerate() {
                        chart[f] = fp.chart[i];
                        let a0s = mesh_full.first_axis_of(f);
                        let a0f: usize =
                            factors_v[..i].iter().map(|&g| mesh_full.factors[g].axes()).sum();
                        for a in 0..mesh_full.factors[f].axes() {
                            x[a0s + a] = fp.x[a0f + a];
                        }
                    }
                    for (i, &f) in kept_v.iter().enumerate() {
                        chart[f] = p.chart[i];
                        let a0s = mesh_full.first_axis_of(f);
                        let a0k: usize =
                            kept_v[..i].iter().map(|&g| mesh_full.factors[g].axes()).sum();
                        for a in 0..mesh_full.factors[f].axes() {
                            x[a0s + a] = p.x[a0k + a];
                        }
                    }
                    let full = ChartPoint { chart, x };
                    let v = a(&full);
                    for (out, &(ci, sign)) in table.iter().enumerate() {
                        let term = v[ci].scale(Complex64::new(sign * w, 0.0));
                        acc[out] = Some(match acc[out].take() {
                            None => term,
                            Some(x) => x.add(&term),
                        });
                    }
                }
                acc.into_iter().map(|v| v.expect("nonempty quadrature")).collect()
            }),
        }
    }
}

impl Form<Complex64> {
    /// Full integral of a top-degree scalar form.
    pub fn integrate(&self) -> Complex64 {
        assert_eq!(self.degree, self.mesh.dim(), "integrate needs a top form");
        let mut acc = Complex64::new(0.0, 0.0);
        for (p, w) in self.mesh.quadrature() {
            acc += self.eval(&p)[0] * w;
        }
        acc
    }

    pub fn constant(mesh: Rc<Mesh>, value: Complex64) -> Form<Complex64> {
        Form::new(mesh, 0, move |_| vec![value])
    }
}

fn perm_sign(from: &[usize], to: &[usize]) -> f64 {
    // sign of the permutation carrying `from` to `to` (both sequences of the
    // same distinct elements)
    let mut perm: Vec<usize> = from
        .iter()
        .map(|x| to.iter().position(|y| y == x).unwrap())
        .collect();
    let mut sign = 1.0;
    for i in 0..perm.len() {
        while perm[i] != i {
            let j = perm[i];
            perm.swap(i, j);
            sign = -sign;
        }
    }
    sign
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::Factor;
    use std::f64::consts::PI;

    fn t2_mesh(points: usize) -> Rc<Mesh> {
        Mesh::new(
            vec![Factor::Circle { points }, Factor::Circle { points }],
            0,
        )
        .unwrap()
    }

    #[test]
    fn d_squared_vanishes_on_trig_data() {
        let mesh = t2_mesh(16);
        let f = Form::new(mesh.clone(), 0, |p: &ChartPoint| {
            vec![Complex64::new(
                (2.0 * PI * p.x[0]).sin() * (2.0 * PI * 2.0 * p.x[1]).cos(),
                0.0,
            )]
        });
        let ddf = f.d(DiffScheme::Ord2).d(DiffScheme::Ord2);
        assert!(ddf.sup_norm() < 1e-10);
    }

    #[test]
    fn derivative_accuracy_orders() {
        let mut errs = Vec::new();
        for points in [16, 32, 64] {
            let mesh = t2_mesh(points);
            let f = Form::new(mesh.clone(), 0, |p: &ChartPoint| {
                vec![Complex64::new((2.0 * PI * p.x[0]).sin(), 0.0)]
            });
            let df = f.d(DiffScheme::Ord2);
            let exact = Form::new(mesh.clone(), 1, |p: &ChartPoint| {
                vec![
                    Complex64::new(2.0 * PI * (2.0 * PI * p.x[0]).cos(), 0.0),
                    Complex64::new(0.0, 0.0),
                ]
            });
            errs.push(df.sub(&exact).sup_norm());
        }
        // second-order slope
        let s1 = (errs[0] / errs[1]).log2();
        let s2 = (errs[1] / errs[2]).log2();
        assert!(s1 > 1.8 && s2 > 1.8, "slopes {s1} {s2}");
    }

    #[test]
    fn wedge_antisymmetry_scalar() {
        let mesh = t2_mesh(8);
        let a = Form::new(mesh.clone(), 1, |p: &ChartPoint| {
            vec![
                Complex64::new((2.0 * PI * p.x[1]).cos(), 0.3),
                Complex64::new(0.7, 0.0),
            ]
        });
        let b = Form::new(mesh.clone(), 1, |p: &ChartPoint| {
            vec![
                Complex64::new(0.2, -0.1),
                Complex64::new((2.0 * PI * p.x[0]).sin(), 0.0),
            ]
        });
        let ab = a.wedge(&b);
        let ba = b.wedge(&a).scale(Complex64::new(-1.0, 0.0));
        assert!(ab.sub(&ba).sup_norm() < 1e-14);
    }

    #[test]
    fn torus_volume_and_fiber_integration() {
        let mesh = t2_mesh(12);
        let vol = Form::new(mesh.clone(), 2, |_: &ChartPoint| {
            vec![Complex64::new(1.0, 0.0)]
        });
        assert!((vol.integrate() - Complex64::new(1.0, 0.0)).norm() < 1e-13);
        // integrate out the second factor only
        let partial = vol.fiber_integrate(&[1]);
        assert_eq!(partial.degree, 1);
        let total = partial.integrate();
        assert!((total - Complex64::new(1.0, 0.0)).norm() < 1e-13);
    }

    #[test]
    fn contraction_and_leibniz() {
        let mesh = t2_mesh(8);
        let a = Form::new(mesh.clone(), 1, |_: &ChartPoint| {
            vec![Complex64::new(2.0, 0.0), Complex64::new(3.0, 0.0)]
        });
        let i0 = a.contract_axis(0);
        assert!((i0.eval(&mesh.lattice()[0])[0] - Complex64::new(2.0, 0.0)).norm() < 1e-15);
        let ab = a.wedge(&a.clone());
        // a ∧ a = 0 for scalar-valued 1-forms
        assert!(ab.sup_norm() < 1e-14);
    }

    #[test]
    fn pullback_has_no_transverse_legs() {
        let small = Mesh::new(vec![Factor::Circle { points: 8 }], 0).unwrap();
        let big = t2_mesh(8);
        let a = Form::new(small.clone(), 1, |p: &ChartPoint| {
            vec![Complex64::new((2.0 * PI * p.x[0]).cos(), 0.0)]
        });
        let pa = a.pulled_back(&big, &[1]); // small circle is big's factor 1
        let v = pa.eval(&ChartPoint {
            chart: vec![0, 0],
            x: vec![0.3, 0.25],
        });
        assert!((v[0]).norm() < 1e-15); // dx0-leg vanishes
        assert!((v[1] - Complex64::new((2.0 * PI * 0.25).cos(), 0.0)).norm() < 1e-15);
    }
}
