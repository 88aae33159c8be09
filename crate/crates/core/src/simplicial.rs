//! Finite ordered simplicial complexes with exact integer (co)homology.
//!
//! Everything here is deliberately small and exact: complexes are closed
//! vertex-tuple sets, coboundaries are signed incidence matrices over ℤ,
//! and cohomology groups / class coordinates come out of a Smith normal
//! form over arbitrary-precision integers.  The same machinery serves the
//! nerve-of-cover computations and the product triangulations used by the
//! twisted de Rham dimension counts.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{Signed, Zero};
use std::collections::{BTreeMap, BTreeSet};

use crate::{Error, Result};

// ---------------------------------------------------------------------------
// complexes
// ---------------------------------------------------------------------------

/// An ordered simplicial complex: for each degree `k`, the strictly
/// increasing `(k+1)`-tuples of vertex indices, sorted lexicographically.
#[derive(Debug, Clone)]
pub struct SimplicialComplex {
    pub vertex_count: usize,
    /// `simplices[k]` lists the k-simplices in lexicographic order.
    simplices: Vec<Vec<Vec<usize>>>,
    /// per-degree map tuple -> position in `simplices[k]`
    index: Vec<BTreeMap<Vec<usize>, usize>>,
}

impl SimplicialComplex {
    /// Build the closure of a set of top simplices.  Tuples may come in any
    /// order; vertices inside a tuple must be distinct.
    pub fn from_top_simplices(vertex_count: usize, tops: &[Vec<usize>]) -> Result<Self> {
        let mut per_deg: Vec<BTreeSet<Vec<usize>>> = Vec::new();
        let push = |per_deg: &mut Vec<BTreeSet<Vec<usize>>>, s: Vec<usize>| {
            let k = s.len() - 1;
            while per_deg.len() <= k {
                per_deg.push(BTreeSet::new());
            }
            per_deg[k].insert(s);
        };
        for top in tops {
            let mut s = top.clone();
            s.sort_unstable();
            s.dedup();
            if s.len() != top.len() {
                return Err(Error::validation(format!(
                    "simplex {top:?} has repeated vertices"
                )));
            }
            if s.iter().any(|&v| v >= vertex_count) {
                return Err(Error::validation(format!(
                    "simplex {top:?} exceeds vertex count {vertex_count}"
                )));
            }
            // close under faces
            let n = s.len();
            for mask in 1u64..(1 << n) {
                let face: Vec<usize> = (0..n).filter(|i| mask >> i & 1 == 1).map(|i| s[i]).collect();
                push(&mut per_deg, face);
            }
        }
        // every vertex should appear as a 0-simplex
        if per_deg.is_empty() {
            return Err(Error::validation("empty complex"));
        }
        for v in 0..vertex_count {
            per_deg[0].insert(vec![v]);
        }
        let simplices: Vec<Vec<Vec<usize>>> =
            per_deg.into_iter().map(|s| s.into_iter().collect()).collect();
        let index = simplices
            .iter()
            .map(|level| {
                level
                    .iter()
                    .enumerate()
                    .map(|(i, s)| (s.clone(), i))
                    .collect()
            })
            .collect();
        Ok(SimplicialComplex {
            vertex_count,
            simplices,
            index,
        })
    }

    /// Highest degree with any simplex.
    pub fn dim(&self) -> usize {
        self.simplices.len() - 1
    }

    /// The k-simplices (empty slice above the dimension).
    pub fn simplices(&self, k: usize) -> &[Vec<usize>] {
        if k < self.simplices.len() {
            &self.simplices[k]
        } else {
            &[]
        }
    }

    pub fn simplex_count(&self, k: usize) -> usize {
        self.simplices(k).len()
    }

    pub fn index_of(&self, s: &[usize]) -> Option<usize> {
        self.index.get(s.len() - 1)?.get(s).copied()
    }

    /// Signed incidence matrix of the coboundary C^k -> C^{k+1}:
    /// rows are (k+1)-simplices, columns k-simplices, entry (τ, σ) the sign
    /// (-1)^i when σ is the i-th face of τ.
    pub fn coboundary_matrix(&self, k: usize) -> IMat {
        let rows = self.simplex_count(k + 1);
        let cols = self.simplex_count(k);
        let mut m = IMat::zeros(rows, cols);
        for (r, tau) in self.simplices(k + 1).iter().enumerate() {
            for i in 0..tau.len() {
                let mut face = tau.clone();
                face.remove(i);
                let c = self.index_of(&face).expect("face closure");
                let sign = if i % 2 == 0 { 1 } else { -1 };
                m.add_to(r, c, BigInt::from(sign));
            }
        }
        m
    }

    /// Staircase (Eilenberg–Zilber) triangulation of the product: vertices
    /// are pairs `(v, w)` numbered `v * other.vertex_count + w`, and each
    /// pair of top simplices contributes one simplex per monotone staircase
    /// path through the index grid.
    pub fn product(&self, other: &SimplicialComplex) -> Result<SimplicialComplex> {
        let nw = other.vertex_count;
        let mut tops: Vec<Vec<usize>> = Vec::new();
        let self_tops = self.top_simplices();
        let other_tops = other.top_simplices();
        for s in &self_tops {
            for t in &other_tops {
                let p = s.len() - 1;
                let q = t.len() - 1;
                // enumerate monotone paths from (0,0) to (p,q)
                let mut stack = vec![(0usize, 0usize, vec![(0usize, 0usize)])];
                while let Some((i, j, path)) = stack.pop() {
                    if i == p && j == q {
                        let simplex: Vec<usize> =
                            path.iter().map(|&(a, b)| s[a] * nw + t[b]).collect();
                        tops.push(simplex);
                        continue;
                    }
                    if i < p {
                        let mut path2 = path.clone();
                        path2.push((i + 1, j));
                        stack.push((i + 1, j, path2));
                    }
                    if j < q {
                        let mut path2 = path;
                        path2.push((i, j + 1));
                        stack.push((i, j + 1, path2));
                    }
                }
            }
        }
        SimplicialComplex::from_top_simplices(self.vertex_count * nw, &tops)
    }

    /// Simplices not contained in any larger simplex.
    pub fn top_simplices(&self) -> Vec<Vec<usize>> {
        let mut tops = Vec::new();
        for k in 0..self.simplices.len() {
            'outer: for s in &self.simplices[k] {
                if k + 1 < self.simplices.len() {
                    for t in &self.simplices[k + 1] {
                        if s.iter().all(|v| t.contains(v)) {
                            continue 'outer;
                        }
                    }
                }
                tops.push(s.clone());
            }
        }
        tops
    }

    /// Pull a cochain back along a vertex map that is weakly monotone on
    /// every simplex (e.g. a product projection).  Simplices whose image
    /// degenerates contribute zero.
    pub fn pullback_int(
        &self,
        target: &SimplicialComplex,
        vertex_map: &dyn Fn(usize) -> usize,
        c: &IntCochain,
    ) -> Result<IntCochain> {
        let k = c.degree;
        let mut values = vec![BigInt::zero(); self.simplex_count(k)];
        for (i, s) in self.simplices(k).iter().enumerate() {
            let image: Vec<usize> = s.iter().map(|&v| vertex_map(v)).collect();
            if image.windows(2).any(|w| w[0] > w[1]) {
                return Err(Error::structural(format!(
                    "vertex map not monotone on simplex {s:?} (image {image:?})"
                )));
            }
            if image.windows(2).any(|w| w[0] == w[1]) {
                continue; // degenerate
            }
            let j = target.index_of(&image).ok_or_else(|| {
                Error::structural(format!("image simplex {image:?} missing in target"))
            })?;
            values[i] = c.values[j].clone();
        }
        Ok(IntCochain { degree: k, values })
    }
}

// ---------------------------------------------------------------------------
// integer cochains
// ---------------------------------------------------------------------------

/// Integer cochain indexed by the complex's lexicographic simplex order.
#[derive(Debug, Clone)]
pub struct IntCochain {
    pub degree: usize,
    pub values: Vec<BigInt>,
}

impl IntCochain {
    pub fn zero(complex: &SimplicialComplex, degree: usize) -> Self {
        IntCochain {
            degree,
            values: vec![BigInt::zero(); complex.simplex_count(degree)],
        }
    }

    pub fn from_i64(degree: usize, values: &[i64]) -> Self {
        IntCochain {
            degree,
            values: values.iter().map(|&v| BigInt::from(v)).collect(),
        }
    }

    pub fn coboundary(&self, complex: &SimplicialComplex) -> IntCochain {
        let m = complex.coboundary_matrix(self.degree);
        IntCochain {
            degree: self.degree + 1,
            values: m.apply(&self.values),
        }
    }

    pub fn is_cocycle(&self, complex: &SimplicialComplex) -> bool {
        self.coboundary(complex).values.iter().all(|v| v.is_zero())
    }

    /// Alexander–Whitney cup product: front face times back face.
    pub fn cup(&self, other: &IntCochain, complex: &SimplicialComplex) -> IntCochain {
        let k = self.degree + other.degree;
        let mut values = vec![BigInt::zero(); complex.simplex_count(k)];
        for (i, s) in complex.simplices(k).iter().enumerate() {
            let front = &s[..=self.degree];
            let back = &s[self.degree..];
            let a = complex.index_of(front).expect("front face");
            let b = complex.index_of(back).expect("back face");
            values[i] = &self.values[a] * &other.values[b];
        }
        IntCochain { degree: k, values }
    }

    pub fn scaled(&self, c: i64) -> IntCochain {
        IntCochain {
            degree: self.degree,
            values: self.values.iter().map(|v| v * c).collect(),
        }
    }

    pub fn add(&self, other: &IntCochain) -> IntCochain {
        assert_eq!(self.degree, other.degree);
        IntCochain {
            degree: self.degree,
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(a, b)| a + b)
                .collect(),
        }
    }
}

/// H^k presented by invariant factors.
#[derive(Debug, Clone, PartialEq, Eq, serde::Serialize)]
pub struct CohomologyGroup {
    pub free_rank: usize,
    pub torsion: Vec<BigInt>,
}

/// Integer cohomology of the complex in degree k via Smith normal form.
pub fn cohomology(complex: &SimplicialComplex, k: usize) -> CohomologyGroup {
    let d_k = complex.coboundary_matrix(k);
    let n_k = complex.simplex_count(k);
    let rank_k = d_k.smith().rank();
    let (rank_km1, torsion) = if k == 0 {
        (0, Vec::new())
    } else {
        let snf = complex.coboundary_matrix(k - 1).smith();
        let torsion = snf
            .d
            .iter()
            .filter(|v| !v.is_zero() && v.abs() > BigInt::from(1))
            .map(|v| v.abs())
            .collect();
        (snf.rank(), torsion)
    };
    CohomologyGroup {
        free_rank: n_k - rank_k - rank_km1,
        torsion,
    }
}

/// Coordinates of the class `[z]` in the free part of H^k, with respect to
/// the (deterministic) Smith-basis generators.  Errors if `z` is not a
/// cocycle; torsion coordinates of the catalog classes are always zero and
/// are asserted to be so.
pub fn class_coordinates(complex: &SimplicialComplex, z: &IntCochain) -> Result<Vec<BigInt>> {
    let k = z.degree;
    if !z.is_cocycle(complex) {
        return Err(Error::validation(format!("degree-{k} cochain is not a cocycle")));
    }
    let d_k = complex.coboundary_matrix(k);
    let kernel = d_k.kernel_basis(); // n_k × κ, a saturated lattice basis
    let kappa = kernel.cols;
    if kappa == 0 {
        return Ok(Vec::new());
    }
    let w = kernel
        .solve_exact_vec(&z.values)
        .ok_or_else(|| Error::computation("cocycle not in kernel lattice"))?;
    // image of the previous coboundary, expressed in kernel coordinates
    let y = if k == 0 {
        IMat::zeros(kappa, 0)
    } else {
        let d_km1 = complex.coboundary_matrix(k - 1);
        kernel
            .solve_exact(&d_km1)
            .ok_or_else(|| Error::computation("coboundary image not in kernel lattice"))?
    };
    let snf = y.smith();
    let rho = snf.rank();
    let t = snf.left.apply(&w);
    for i in 0..rho {
        let r = t[i].mod_floor(&snf.d[i].abs());
        if !r.is_zero() {
            return Err(Error::computation(format!(
                "class has nonzero torsion coordinate {r} mod {}",
                snf.d[i]
            )));
        }
    }
    Ok(t[rho..].to_vec())
}

// ---------------------------------------------------------------------------
// exact integer matrices and Smith normal form
// ---------------------------------------------------------------------------

/// Dense arbitrary-precision integer matrix (row-major).
#[derive(Debug, Clone)]
pub struct IMat {
    pub rows: usize,
    pub cols: usize,
    a: Vec<BigInt>,
}

impl IMat {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        IMat {
            rows,
            cols,
            a: vec![BigInt::zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = IMat::zeros(n, n);
        for i in 0..n {
            m.set(i, i, BigInt::from(1));
        }
        m
    }

    pub fn get(&self, i: usize, j: usize) -> &BigInt {
        &self.a[i * self.cols + j]
    }
    pub fn set(&mut self, i: usize, j: usize, v: BigInt) {
        self.a[i * self.cols + j] = v;
    }
    pub fn add_to(&mut self, i: usize, j: usize, v: BigInt) {
        self.a[i * self.cols + j] += v;
    }

    pub fn apply(&self, x: &[BigInt]) -> Vec<BigInt> {
        assert_eq!(x.len(), self.cols);
        (0..self.rows)
            .map(|i| (0..self.cols).map(|j| self.get(i, j) * &x[j]).sum())
            .collect()
    }

    fn swap_rows(&mut self, i: usize, j: usize) {
        if i == j {
            return;
        }
        for c in 0..self.cols {
            self.a.swap(i * self.cols + c, j * self.cols + c);
        }
    }
    fn swap_cols(&mut self, i: usize, j: usize) {
        if i == j {
            return;
        }
        for r in 0..self.rows {
            self.a.swap(r * self.cols + i, r * self.cols + j);
        }
    }
    /// row_i += c * row_j
    fn add_row(&mut self, i: usize, j: usize, c: &BigInt) {
        for k in 0..self.cols {
            let v = self.get(j, k) * c;
            self.add_to(i, k, v);
        }
    }
    /// col_i += c * col_j
    fn add_col(&mut self, i: usize, j: usize, c: &BigInt) {
        for k in 0..self.rows {
            let v = self.get(k, j) * c;
            self.add_to(k, i, v);
        }
    }

    /// Smith normal form `S = L · A · R` with unimodular `L`, `R`; the
    /// diagonal of `S` is returned in `d` (nonzero entries first, each
    /// dividing the next).
    pub fn smith(&self) -> Snf {
        let mut s = self.clone();
        let mut left = IMat::identity(self.rows);
        let mut right = IMat::identity(self.cols);
        let n = self.rows.min(self.cols);
        let mut t = 0;
        while t < n {
            // locate a pivot: nonzero entry of minimal magnitude in the
            // remaining block (deterministic scan order)
            let mut pivot: Option<(usize, usize)> = None;
            for i in t..s.rows {
                for j in t..s.cols {
                    if !s.get(i, j).is_zero()
                        && pivot
                            .map(|(pi, pj)| s.get(i, j).abs() < s.get(pi, pj).abs())
                            .unwrap_or(true)
                    {
                        pivot = Some((i, j));
                    }
                }
            }
            let Some((pi, pj)) = pivot else { break };
            s.swap_rows(t, pi);
            left.swap_rows(t, pi);
            s.swap_cols(t, pj);
            right.swap_cols(t, pj);
            // clear row and column t
            loop {
                let mut done = true;
                for i in t + 1..s.rows {
                    if !s.get(i, t).is_zero() {
                        let q = -(s.get(i, t) / s.get(t, t));
                        s.add_row(i, t, &q);
                        left.add_row(i, t, &q);
                        if !s.get(i, t).is_zero() {
                            s.swap_rows(t, i);
                            left.swap_rows(t, i);
                            done = false;
                        }
                    }
                }
                for j in t + 1..s.cols {
                    if !s.get(t, j).is_zero() {
                        let q = -(s.get(t, j) / s.get(t, t));
                        s.add_col(j, t, &q);
                        right.add_col(j, t, &q);
                        if !s.get(t, j).is_zero() {
                            s.swap_cols(t, j);
                            right.swap_cols(t, j);
                            done = false;
                        }
                    }
                }
                if done {
                    break;
                }
            }
            // divisibility: fold in any entry the pivot does not divide
            let mut redo = false;
            'scan: for i in t + 1..s.rows {
                for j in t + 1..s.cols {
                    if !(s.get(i, j) % s.get(t, t)).is_zero() {
                        let one = BigInt::from(1);
                        s.add_row(t, i, &one);
                        left.add_row(t, i, &one);
                        redo = true;
                        break 'scan;
                    }
                }
            }
            if redo {
                continue; // re-clear with the new row
            }
            t += 1;
        }
        // normalize diagonal signs so that L·A·R has the reported diagonal
        for i in 0..n {
            if s.get(i, i).is_negative() {
                let neg = BigInt::from(-1);
                for c in 0..s.cols {
                    let v = s.get(i, c) * &neg;
                    s.set(i, c, v);
                }
                for c in 0..left.cols {
                    let v = left.get(i, c) * &neg;
                    left.set(i, c, v);
                }
            }
        }
        let d = (0..n).map(|i| s.get(i, i).clone()).collect();
        Snf { d, left, right }
    }

    /// Basis of the integer kernel (a saturated sublattice), as columns.
    pub fn kernel_basis(&self) -> IMat {
        let snf = self.smith();
        let r = snf.rank();
        let kappa = self.cols - r;
        let mut k = IMat::zeros(self.cols, kappa);
        for (out, j) in (r..self.cols).enumerate() {
            for i in 0..self.cols {
                k.set(i, out, snf.right.get(i, j).clone());
            }
        }
        k
    }

    /// Solve `self · X = B` exactly over ℤ; `None` if no integer solution.
    pub fn solve_exact(&self, b: &IMat) -> Option<IMat> {
        assert_eq!(self.rows, b.rows);
        let snf = self.smith();
        let r = snf.rank();
        // S = L A R  =>  A x = b  <=>  S (R^{-1} x) = L b
        let mut lb = IMat::zeros(b.rows, b.cols);
        for j in 0..b.cols {
            let col: Vec<BigInt> = (0..b.rows).map(|i| b.get(i, j).clone()).collect();
            let lcol = snf.left.apply(&col);
            for i in 0..b.rows {
                lb.set(i, j, lcol[i].clone());
            }
        }
        let mut y = IMat::zeros(self.cols, b.cols);
        for j in 0..b.cols {
            for i in 0..self.rows {
                if i < r {
                    let (q, rem) = lb.get(i, j).div_rem(&snf.d[i]);
                    if !rem.is_zero() {
                        return None;
                    }
                    y.set(i, j, q);
                } else if !lb.get(i, j).is_zero() {
                    return None;
                }
            }
        }
        // x = R y
        let mut x = IMat::zeros(self.cols, b.cols);
        for j in 0..b.cols {
            let col: Vec<BigInt> = (0..self.cols).map(|i| y.get(i, j).clone()).collect();
            let xcol = snf.right.apply(&col);
            for i in 0..self.cols {
                x.set(i, j, xcol[i].clone());
            }
        }
        Some(x)
    }

    pub fn solve_exact_vec(&self, b: &[BigInt]) -> Option<Vec<BigInt>> {
        let mut bm = IMat::zeros(b.len(), 1);
        for (i, v) in b.iter().enumerate() {
            bm.set(i, 0, v.clone());
        }
        let x = self.solve_exact(&bm)?;
        Some((0..self.cols).map(|i| x.get(i, 0).clone()).collect())
    }

    /// Multiply: self · other.
    pub fn mul(&self, other: &IMat) -> IMat {
        assert_eq!(self.cols, other.rows);
        let mut m = IMat::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let v = self.get(i, k);
                if v.is_zero() {
                    continue;
                }
                for j in 0..other.cols {
                    let w = v * other.get(k, j);
                    m.add_to(i, j, w);
                }
            }
        }
        m
    }
}

/// Smith normal form data: `d` holds |diagonal| entries (nonzero first).
#[derive(Debug, Clone)]
pub struct Snf {
    pub d: Vec<BigInt>,
    pub left: IMat,
    pub right: IMat,
}

impl Snf {
    pub fn rank(&self) -> usize {
        self.d.iter().filter(|v| !v.is_zero()).count()
    }
}

// ---------------------------------------------------------------------------
// standard complexes
// ---------------------------------------------------------------------------

/// Circle as three arcs: vertices 0,1,2 and edges (01),(12),(02).
pub fn circle_complex() -> SimplicialComplex {
    SimplicialComplex::from_top_simplices(3, &[vec![0, 1], vec![1, 2], vec![0, 2]]).unwrap()
}

/// 2-sphere as the boundary of the tetrahedron.
pub fn sphere2_complex() -> SimplicialComplex {
    SimplicialComplex::from_top_simplices(
        4,
        &[vec![0, 1, 2], vec![0, 1, 3], vec![0, 2, 3], vec![1, 2, 3]],
    )
    .unwrap()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn betti(c: &SimplicialComplex, k: usize) -> usize {
        cohomology(c, k).free_rank
    }

    #[test]
    fn snf_identity_and_diag() {
        let m = IMat::identity(3);
        let s = m.smith();
        assert_eq!(s.rank(), 3);
        let mut m = IMat::zeros(2, 3);
        m.set(0, 0, BigInt::from(2));
        m.set(1, 1, BigInt::from(4));
        let s = m.smith();
        assert_eq!(s.d[0], BigInt::from(2));
        assert_eq!(s.d[1], BigInt::from(2) * 2);
    }

    #[test]
    fn snf_factorization_holds() {
        // S = L A R must hold entrywise
        let mut a = IMat::zeros(3, 4);
        let vals = [3i64, -1, 4, 1, -5, 9, 2, 6, -5, 3, 5, -8];
        for i in 0..3 {
            for j in 0..4 {
                a.set(i, j, BigInt::from(vals[i * 4 + j]));
            }
        }
        let s = a.smith();
        let lar = s.left.mul(&a).mul(&s.right);
        for i in 0..3 {
            for j in 0..4 {
                if i == j {
                    assert_eq!(lar.get(i, j).abs(), s.d[i]);
                } else {
                    assert!(lar.get(i, j).is_zero(), "off-diagonal at {i},{j}");
                }
            }
        }
    }

    #[test]
    fn circle_cohomology() {
        let c = circle_complex();
        assert_eq!(betti(&c, 0), 1);
        assert_eq!(betti(&c, 1), 1);
    }

    #[test]
    fn sphere_cohomology() {
        let s = sphere2_complex();
        assert_eq!(betti(&s, 0), 1);
        assert_eq!(betti(&s, 1), 0);
        assert_eq!(betti(&s, 2), 1);
        assert!(cohomology(&s, 2).torsion.is_empty());
    }

    #[test]
    fn torus_product_cohomology() {
        let t2 = circle_complex().product(&circle_complex()).unwrap();
        assert_eq!(betti(&t2, 0), 1);
        assert_eq!(betti(&t2, 1), 2);
        assert_eq!(betti(&t2, 2), 1);
    }

    #[test]
    fn torus3_cohomology() {
        let t2 = circle_complex().product(&circle_complex()).unwrap();
        let t3 = t2.product(&circle_complex()).unwrap();
        assert_eq!(betti(&t3, 0), 1);
        assert_eq!(betti(&t3, 1), 3);
        assert_eq!(betti(&t3, 2), 3);
        assert_eq!(betti(&t3, 3), 1);
    }

    #[test]
    fn circle_times_sphere_cohomology() {
        let x = circle_complex().product(&sphere2_complex()).unwrap();
        assert_eq!(betti(&x, 0), 1);
        assert_eq!(betti(&x, 1), 1);
        assert_eq!(betti(&x, 2), 1);
        assert_eq!(betti(&x, 3), 1);
    }

    #[test]
    fn coboundary_squares_to_zero() {
        let x = circle_complex().product(&sphere2_complex()).unwrap();
        for k in 0..x.dim() {
            let mut c = IntCochain::zero(&x, k);
            for (i, v) in c.values.iter_mut().enumerate() {
                *v = BigInt::from((i as i64 * 7 + 3) % 11 - 5);
            }
            let dd = c.coboundary(&x).coboundary(&x);
            assert!(dd.values.iter().all(|v| v.is_zero()));
        }
    }

    #[test]
    fn class_coordinates_of_generators() {
        let s = sphere2_complex();
        // single-triangle indicator is a generator of H^2
        let mut z = IntCochain::zero(&s, 2);
        z.values[0] = BigInt::from(1);
        let coords = class_coordinates(&s, &z).unwrap();
        assert_eq!(coords.len(), 1);
        assert_eq!(coords[0].abs(), BigInt::from(1));
        let coords2 = class_coordinates(&s, &z.scaled(2)).unwrap();
        assert_eq!(coords2[0].abs(), BigInt::from(2));
        // a coboundary has zero coordinates
        let mut f = IntCochain::zero(&s, 1);
        f.values[2] = BigInt::from(5);
        let b = f.coboundary(&s);
        let coords3 = class_coordinates(&s, &b).unwrap();
        assert!(coords3.iter().all(|v| v.is_zero()));
    }

    #[test]
    fn cup_product_on_product_nerve() {
        // H^1(S^1) cup H^2(S^2) generates H^3(S^1 x S^2)
        let s1 = circle_complex();
        let s2 = sphere2_complex();
        let x = s1.product(&s2).unwrap();
        let nw = s2.vertex_count;
        // generator cochains upstairs
        let mut a1 = IntCochain::zero(&s1, 1);
        a1.values[s1.index_of(&[0, 2]).unwrap()] = BigInt::from(1);
        assert!(a1.is_cocycle(&s1));
        assert_eq!(class_coordinates(&s1, &a1).unwrap()[0].abs(), BigInt::from(1));
        let mut b2 = IntCochain::zero(&s2, 2);
        b2.values[0] = BigInt::from(1);
        // pull back along the projections and cup
        let a = x
            .pullback_int(&s1, &|v| v / nw, &a1)
            .unwrap();
        let b = x
            .pullback_int(&s2, &|v| v % nw, &b2)
            .unwrap();
        assert!(a.is_cocycle(&x));
        assert!(b.is_cocycle(&x));
        let ab = a.cup(&b, &x);
        assert!(ab.is_cocycle(&x));
        let coords = class_coordinates(&x, &ab).unwrap();
        assert_eq!(coords.len(), 1);
        assert_eq!(coords[0].abs(), BigInt::from(1));
        // graded sign: for p=1,q=2 classes, [a∪b] = [b∪a] up to (-1)^{pq}
        let ba = b.cup(&a, &x);
        let coords_ba = class_coordinates(&x, &ba).unwrap();
        assert_eq!(coords_ba[0], coords[0]);
    }
}
