//! Semiclassical calculus on circle fibers: left quantization of symbols
//! a(θ, ξ) at ξ = ε·(mode), the exact symbol recovery of the diagonal
//! calculus, O(ε) composition defects, invertibility and idempotent
//! polish at fixed ε, and the one-dimensional isotropic (Hermite-model)
//! Bott index check.
//!
//! Conventions: fiber modes run −N..N; the left quantization of a is the
//! banded mode-space matrix A_{r,c} = â_{r−c}(ε·μ_c) with â_m(ξ) the θ
//! Fourier coefficients and μ_c = c−N the column mode.  The symbol map σ
//! reads the band back off the matrix; σ∘quantize is the identity on grid
//! points whose band stays inside the truncation.

use nalgebra::DMatrix;
use num_complex::Complex64;
use std::f64::consts::PI;
use std::rc::Rc;

use crate::fiberops::{index_idempotent, parametrix, CMat, TruncatedKernel};
use crate::mesh::{ChartPoint, Mesh};
use crate::{Error, Result};

// ---------------------------------------------------------------------------
// symbols
// ---------------------------------------------------------------------------

/// Scalar symbol on the fiber cotangent circle: a trigonometric polynomial
/// of bounded degree in θ with Schwartz-type decay in ξ outside a support
/// radius.
#[derive(Clone)]
pub struct SclSymbol {
    pub theta_degree: usize,
    pub support_radius: f64,
    eval: Rc<dyn Fn(f64, f64) -> Complex64>,
}

impl SclSymbol {
    pub fn new(
        theta_degree: usize,
        support_radius: f64,
        eval: impl Fn(f64, f64) -> Complex64 + 'static,
    ) -> Result<SclSymbol> {
        let s = SclSymbol {
            theta_degree,
            support_radius,
            eval: Rc::new(eval),
        };
        // decay envelope audit: outside the support radius the symbol must
        // sit below (interior sup)·e^{−(|ξ|−R)}
        let mut interior: f64 = 0.0;
        for i in 0..16 {
            let th = 2.0 * PI * i as f64 / 16.0;
            for j in 0..9 {
                let xi = s.support_radius * (j as f64 / 4.0 - 1.0);
                interior = interior.max(s.at(th, xi).norm());
            }
        }
        let envelope = interior.max(1.0);
        for i in 0..8 {
            let th = 2.0 * PI * i as f64 / 8.0;
            for extra in [1.0f64, 2.0, 4.0] {
                for sign in [-1.0, 1.0] {
                    let xi = sign * (s.support_radius + extra);
                    if s.at(th, xi).norm() > envelope * (-extra).exp() + 1e-12 {
                        return Err(Error::validation(
                            "symbol exceeds its decay envelope outside the support radius",
                        ));
                    }
                }
            }
        }
        Ok(s)
    }

    /// ξ-independent multiplication symbol; no decay audit applies and any
    /// band covers it.
    pub fn multiplication(
        theta_degree: usize,
        eval: impl Fn(f64) -> Complex64 + 'static,
    ) -> SclSymbol {
        SclSymbol {
            theta_degree,
            support_radius: 0.0,
            eval: Rc::new(move |th, _| eval(th)),
        }
    }

    pub fn at(&self, theta: f64, xi: f64) -> Complex64 {
        (self.eval)(theta, xi)
    }

    /// θ Fourier coefficients â_m(ξ) for m = −D..D (exact for trig
    /// polynomials of degree ≤ D via an oversampled DFT).
    pub fn theta_coeffs(&self, xi: f64) -> Vec<Complex64> {
        let d = self.theta_degree;
        let m_grid = 4 * (2 * d + 1);
        let samples: Vec<Complex64> = (0..m_grid)
            .map(|j| self.at(2.0 * PI * j as f64 / m_grid as f64, xi))
            .collect();
        (0..=2 * d as i64)
            .map(|mi| {
                let m = mi - d as i64;
                let mut acc = Complex64::new(0.0, 0.0);
                for (j, s) in samples.iter().enumerate() {
                    let ph = -2.0 * PI * m as f64 * j as f64 / m_grid as f64;
                    acc += s * Complex64::new(ph.cos(), ph.sin());
                }
                acc / m_grid as f64
            })
            .collect()
    }
}

// ---------------------------------------------------------------------------
// banded kernels and quantization
// ---------------------------------------------------------------------------

/// Mode-space matrix stored by diagonals: `bands[mi][c]` is the entry at
/// (row = c+m, col = c) with m = mi − d, rows/cols 0..2N.
#[derive(Debug, Clone)]
pub struct BandedKernel {
    pub n: usize,
    pub d: usize,
    pub bands: Vec<Vec<Complex64>>,
}

impl BandedKernel {
    pub fn modes(&self) -> usize {
        2 * self.n + 1
    }

    pub fn entry(&self, r: usize, c: usize) -> Complex64 {
        let m = r as i64 - c as i64;
        if m.unsigned_abs() as usize > self.d {
            Complex64::new(0.0, 0.0)
        } else {
            self.bands[(m + self.d as i64) as usize][c]
        }
    }

    pub fn compose(&self, other: &BandedKernel) -> Result<BandedKernel> {
        if self.n != other.n {
            return Err(Error::structural("mode cutoffs differ in composition"));
        }
        let nm = self.modes();
        let d = self.d + other.d;
        let mut bands = vec![vec![Complex64::new(0.0, 0.0); nm]; 2 * d + 1];
        for m1 in -(self.d as i64)..=self.d as i64 {
            for m2 in -(other.d as i64)..=other.d as i64 {
                let m = m1 + m2;
                let row_band = &mut bands[(m + d as i64) as usize];
                let a_band = &self.bands[(m1 + self.d as i64) as usize];
                let b_band = &other.bands[(m2 + other.d as i64) as usize];
                for c in 0..nm {
                    // (AB)_{c+m,c} += A_{c+m, c+m2} B_{c+m2, c}
                    let j = c as i64 + m2;
                    let r = c as i64 + m;
                    if j < 0 || j >= nm as i64 || r < 0 || r >= nm as i64 {
                        continue;
                    }
                    row_band[c] += a_band[j as usize] * b_band[c];
                }
            }
        }
        Ok(BandedKernel {
            n: self.n,
            d,
            bands,
        })
    }

    pub fn to_dense(&self) -> CMat {
        let nm = self.modes();
        DMatrix::from_fn(nm, nm, |r, c| self.entry(r, c))
    }
}

/// Left quantization at scale ε and cutoff N; errors when the band cannot
/// cover the symbol's ξ-support.
pub fn quantize_banded(a: &SclSymbol, eps: f64, n: usize) -> Result<BandedKernel> {
    if !(0.0 < eps && eps < 1.0) {
        return Err(Error::validation("eps must lie in (0,1)"));
    }
    if (n as f64) * eps < a.support_radius {
        let needed = (a.support_radius / eps).ceil() as usize;
        return Err(Error::validation(format!(
            "band N·eps does not cover the symbol support; need N ≥ {needed}"
        )));
    }
    let d = a.theta_degree;
    let nm = 2 * n + 1;
    let mut bands = vec![vec![Complex64::new(0.0, 0.0); nm]; 2 * d + 1];
    for c in 0..nm {
        let xi = eps * (c as f64 - n as f64);
        let coeffs = a.theta_coeffs(xi);
        for (mi, v) in coeffs.iter().enumerate() {
            let r = c as i64 + mi as i64 - d as i64;
            if r >= 0 && r < nm as i64 {
                bands[mi][c] = *v;
            }
        }
    }
    Ok(BandedKernel { n, d, bands })
}

/// Dense quantization (for small cutoffs feeding the operator layer).
pub fn quantize(a: &SclSymbol, eps: f64, n: usize) -> Result<CMat> {
    Ok(quantize_banded(a, eps, n)?.to_dense())
}

/// Symbol samples recovered from a kernel on the interior of the band.
pub struct SymbolSamples {
    pub thetas: Vec<f64>,
    /// interior modes μ with |μ| ≤ N − band width
    pub modes: Vec<i64>,
    pub eps: f64,
    /// values[theta index][mode index]
    pub values: Vec<Vec<Complex64>>,
}

/// σ_scl: read the symbol back off the band (exact for the diagonal
/// calculus on interior modes).
pub fn sigma_scl(k: &BandedKernel, eps: f64, theta_points: usize) -> SymbolSamples {
    let thetas: Vec<f64> = (0..theta_points)
        .map(|j| 2.0 * PI * j as f64 / theta_points as f64)
        .collect();
    let interior = k.n as i64 - k.d as i64;
    let modes: Vec<i64> = (-interior..=interior).collect();
    let values = thetas
        .iter()
        .map(|&th| {
            modes
                .iter()
                .map(|&mu| {
                    let c = (mu + k.n as i64) as usize;
                    let mut acc = Complex64::new(0.0, 0.0);
                    for mi in 0..=2 * k.d {
                        let m = mi as i64 - k.d as i64;
                        let r = c as i64 + m;
                        if r < 0 || r >= k.modes() as i64 {
                            continue;
                        }
                        let ph = m as f64 * th;
                        acc += k.bands[mi][c] * Complex64::new(ph.cos(), ph.sin());
                    }
                    acc
                })
                .collect()
        })
        .collect();
    SymbolSamples {
        thetas,
        modes,
        eps,
        values,
    }
}

// ---------------------------------------------------------------------------
// composition defect
// ---------------------------------------------------------------------------

#[derive(Debug, Clone)]
pub struct DefectReport {
    pub epsilons: Vec<f64>,
    pub defects: Vec<f64>,
    pub slope: f64,
    /// defects at rounding level count as converged regardless of slope
    pub at_floor: bool,
}

pub const DEFAULT_EPS_GRID: [f64; 5] = [1.0 / 8.0, 1.0 / 16.0, 1.0 / 32.0, 1.0 / 64.0, 1.0 / 128.0];

/// ‖σ(Q(a)Q(b)) − a·b‖_∞ over the ε-grid with a log-log slope fit.
pub fn scl_composition_defect(
    a: &SclSymbol,
    b: &SclSymbol,
    eps_grid: &[f64],
) -> Result<DefectReport> {
    if eps_grid.len() < 4 {
        return Err(Error::validation("eps grid needs at least 4 values"));
    }
    let reach = a.support_radius.max(b.support_radius) + 2.0;
    let mut defects = Vec::new();
    for &eps in eps_grid {
        let n = (reach / eps).ceil() as usize;
        let qa = quantize_banded(a, eps, n)?;
        let qb = quantize_banded(b, eps, n)?;
        let qc = qa.compose(&qb)?;
        let rec = sigma_scl(&qc, eps, 48);
        let mut defect: f64 = 0.0;
        for (ti, &th) in rec.thetas.iter().enumerate() {
            for (mi, &mu) in rec.modes.iter().enumerate() {
                let xi = eps * mu as f64;
                let exact = a.at(th, xi) * b.at(th, xi);
                defect = defect.max((rec.values[ti][mi] - exact).norm());
            }
        }
        defects.push(defect);
    }
    let floor = 1e-12;
    let at_floor = defects.iter().all(|&d| d <= floor);
    let pairs: Vec<(f64, f64)> = eps_grid
        .iter()
        .zip(&defects)
        .map(|(&e, &d)| (e.ln(), d.max(1e-300).ln()))
        .collect();
    let n = pairs.len() as f64;
    let sx: f64 = pairs.iter().map(|p| p.0).sum();
    let sy: f64 = pairs.iter().map(|p| p.1).sum();
    let sxx: f64 = pairs.iter().map(|p| p.0 * p.0).sum();
    let sxy: f64 = pairs.iter().map(|p| p.0 * p.1).sum();
    let slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    Ok(DefectReport {
        epsilons: eps_grid.to_vec(),
        defects,
        slope,
        at_floor,
    })
}

// ---------------------------------------------------------------------------
// odd index: invertible families
// ---------------------------------------------------------------------------

/// Invertible symbol family Id + a over a base mesh, together with an
/// approximate inverse symbol b ≈ (1+a)^{−1} − 1 used to seed the polish.
pub struct OddSymbolFamily {
    pub base: Rc<Mesh>,
    pub symbol_at: Rc<dyn Fn(&ChartPoint) -> SclSymbol>,
    pub inverse_seed_at: Rc<dyn Fn(&ChartPoint) -> SclSymbol>,
}

/// Exactly invertible operator family at fixed ε, ready for character
/// pairings.
pub struct InvertibleFamily {
    pub base: Rc<Mesh>,
    pub eps: f64,
    pub n: usize,
    pub points: Vec<ChartPoint>,
    pub ops: Vec<CMat>,
    pub inverses: Vec<CMat>,
    pub max_residual: f64,
    pub polish_iterations: usize,
}

pub fn odd_scl_index(fam: &OddSymbolFamily, eps: f64, n: usize) -> Result<InvertibleFamily> {
    let points = fam.base.lattice();
    let mut ops = Vec::with_capacity(points.len());
    let mut inverses = Vec::with_capacity(points.len());
    let mut max_residual: f64 = 0.0;
    let mut polish_iterations = 0usize;
    let id = CMat::identity(2 * n + 1, 2 * n + 1);
    for p in &points {
        let a = (fam.symbol_at)(p);
        let op = &id + quantize(&a, eps, n)?;
        let seed = (fam.inverse_seed_at)(p);
        let mut inv = &id + quantize(&seed, eps, n)?;
        let mut ok = false;
        for it in 0..50 {
            let resid = &id - &op * &inv;
            let rnorm = resid.norm();
            if rnorm < 1e-12 {
                polish_iterations = polish_iterations.max(it);
                max_residual = max_residual.max(rnorm);
                ok = true;
                break;
            }
            // Newton step for the inverse: B ← B(2I − PB) = B + B(I − PB)
            inv = &inv + &inv * resid;
        }
        if !ok {
            let sv = op.clone().singular_values();
            let smin = sv.iter().cloned().fold(f64::INFINITY, f64::min);
            return Err(Error::computation(format!(
                "invertibility polish failed; smallest singular value {smin:.3e}"
            )));
        }
        ops.push(op);
        inverses.push(inv);
    }
    Ok(InvertibleFamily {
        base: fam.base.clone(),
        eps,
        n,
        points,
        ops,
        inverses,
        max_residual,
        polish_iterations,
    })
}

/// Winding number of x ↦ det(op(x)) around 0 along the ordered base loop
/// (phase continuation over the closed lattice).
pub fn det_winding(fam: &InvertibleFamily) -> Result<f64> {
    let dets: Vec<Complex64> = fam.ops.iter().map(|m| m.determinant()).collect();
    if dets.iter().any(|d| d.norm() < 1e-300) {
        return Err(Error::computation("determinant vanished on the loop"));
    }
    let mut total = 0.0;
    let n = dets.len();
    for i in 0..n {
        let ratio = dets[(i + 1) % n] / dets[i];
        total += ratio.im.atan2(ratio.re);
    }
    Ok(total / (2.0 * PI))
}

/// Matrix-valued invertible symbol family Id + a over a base mesh; each
/// entry of a is a scalar fiber symbol.  `symbol_at(p, r, c)` returns the
/// (r,c) entry of a at the base point p.
pub struct MatrixOddSymbolFamily {
    pub base: Rc<Mesh>,
    pub dim: usize,
    pub symbol_at: Rc<dyn Fn(&ChartPoint, usize, usize) -> SclSymbol>,
    pub inverse_seed_at: Rc<dyn Fn(&ChartPoint, usize, usize) -> SclSymbol>,
}

/// Block quantization of a matrix symbol family: each scalar entry is
/// quantized into its mode-space block, the dim·(2N+1) operator is
/// assembled, and the family is Newton-polished to exact invertibility
/// using the quantized inverse symbol as seed (as in `odd_scl_index`).
pub fn odd_scl_index_blocks(
    fam: &MatrixOddSymbolFamily,
    eps: f64,
    n: usize,
) -> Result<InvertibleFamily> {
    let points = fam.base.lattice();
    let nm = 2 * n + 1;
    let dim = fam.dim;
    let big = dim * nm;
    let id = CMat::identity(big, big);
    let assemble = |entry: &dyn Fn(usize, usize) -> SclSymbol| -> Result<CMat> {
        let mut m = CMat::identity(big, big);
        for r in 0..dim {
            for c in 0..dim {
                let block = quantize(&entry(r, c), eps, n)?;
                for i in 0..nm {
                    for j in 0..nm {
                        m[(r * nm + i, c * nm + j)] += block[(i, j)];
                    }
                }
            }
        }
        Ok(m)
    };
    let mut ops = Vec::with_capacity(points.len());
    let mut inverses = Vec::with_capacity(points.len());
    let mut max_residual: f64 = 0.0;
    let mut polish_iterations = 0usize;
    for p in &points {
        let op = assemble(&|r, c| (fam.symbol_at)(p, r, c))?;
        let mut inv = assemble(&|r, c| (fam.inverse_seed_at)(p, r, c))?;
        let mut ok = false;
        for it in 0..50 {
            let resid = &id - &op * &inv;
            let rnorm = resid.norm();
            if rnorm < 1e-12 {
                polish_iterations = polish_iterations.max(it);
                max_residual = max_residual.max(rnorm);
                ok = true;
                break;
            }
            inv = &inv + &inv * resid;
        }
        if !ok {
            let sv = op.clone().singular_values();
            let smin = sv.iter().cloned().fold(f64::INFINITY, f64::min);
            return Err(Error::computation(format!(
                "invertibility polish failed; smallest singular value {smin:.3e}"
            )));
        }
        ops.push(op);
        inverses.push(inv);
    }
    Ok(InvertibleFamily {
        base: fam.base.clone(),
        eps,
        n,
        points,
        ops,
        inverses,
        max_residual,
        polish_iterations,
    })
}

// ---------------------------------------------------------------------------
// even index: idempotent families
// ---------------------------------------------------------------------------

/// Matrix-valued idempotent symbol family over a base mesh.
pub struct EvenSymbolFamily {
    pub base: Rc<Mesh>,
    pub block: usize,
    /// idempotent value at (base point, θ, ξ)
    pub symbol_at: Rc<dyn Fn(&ChartPoint, f64, f64) -> CMat>,
    pub theta_degree: usize,
    pub support_radius: f64,
}

pub struct IdempotentFamily {
    pub base: Rc<Mesh>,
    pub eps: f64,
    pub n: usize,
    pub block: usize,
    pub points: Vec<ChartPoint>,
    pub projectors: Vec<CMat>,
    pub idempotency_residual: f64,
}

/// Contour (Riesz) projection onto the spectrum near 1: the circle
/// |z−1| = 1/2 with a trapezoid rule, exponentially accurate for spectra
/// separated from the contour.
pub fn riesz_projector(p: &CMat) -> Result<CMat> {
    let dim = p.nrows();
    let sep = (p - CMat::identity(dim, dim) * Complex64::new(0.5, 0.0))
        .singular_values()
        .iter()
        .cloned()
        .fold(f64::INFINITY, f64::min);
    if sep < 0.1 {
        return Err(Error::computation(format!(
            "spectrum not separated from 1/2 (margin {sep:.3e})"
        )));
    }
    let m = 128usize;
    let mut acc = CMat::zeros(dim, dim);
    for j in 0..m {
        let phi = 2.0 * PI * j as f64 / m as f64;
        let z = Complex64::new(1.0 + 0.5 * phi.cos(), 0.5 * phi.sin());
        let zi = CMat::identity(dim, dim) * z - p;
        let inv = zi
            .lu()
            .try_inverse()
            .ok_or_else(|| Error::computation("contour resolvent is singular"))?;
        acc += inv * Complex64::new(0.5 * phi.cos(), 0.5 * phi.sin());
    }
    Ok(acc / Complex64::new(m as f64, 0.0))
}

pub fn even_scl_index(fam: &EvenSymbolFamily, eps: f64, n: usize) -> Result<IdempotentFamily> {
    // idempotency of the symbol itself, spot-checked
    let points = fam.base.lattice();
    for p in points.iter().step_by((points.len() / 8).max(1)) {
        let s = (fam.symbol_at)(p, 0.7, eps);
        if (&s * &s - &s).norm() > 1e-9 {
            return Err(Error::validation("symbol family is not idempotent"));
        }
    }
    let nm = 2 * n + 1;
    let mut projectors = Vec::with_capacity(points.len());
    let mut worst: f64 = 0.0;
    for p in &points {
        // quantize entrywise
        let mut q = CMat::zeros(fam.block * nm, fam.block * nm);
        for bi in 0..fam.block {
            for bj in 0..fam.block {
                let p2 = p.clone();
                let f = fam.symbol_at.clone();
                let entry = SclSymbol::new(fam.theta_degree, fam.support_radius, move |th, xi| {
                    f(&p2, th, xi)[(bi, bj)]
                })?;
                let k = quantize(&entry, eps, n)?;
                q.view_mut((bi * nm, bj * nm), (nm, nm)).copy_from(&k);
            }
        }
        let proj = riesz_projector(&q)?;
        worst = worst.max((&proj * &proj - &proj).norm());
        projectors.push(proj);
    }
    if worst > 1e-12 {
        return Err(Error::computation(format!(
            "idempotent polish left residual {worst:.3e}"
        )));
    }
    Ok(IdempotentFamily {
        base: fam.base.clone(),
        eps,
        n,
        block: fam.block,
        points,
        projectors,
        idempotency_residual: worst,
    })
}

// ---------------------------------------------------------------------------
// isotropic Thom/Bott check
// ---------------------------------------------------------------------------

/// Harmonic-oscillator ground-state projector in the truncated Hermite
/// basis (rank one onto the lowest mode).
pub fn ground_state_projector(n: usize) -> CMat {
    let mut p = CMat::zeros(n + 1, n + 1);
    p[(0, 0)] = Complex64::new(1.0, 0.0);
    p
}

/// Annihilation operator in the truncated Hermite basis, as a rectangular
/// map (modes 0..n) → (modes 0..n−1) so the truncation loses nothing.
pub fn annihilation(n: usize) -> CMat {
    let mut a = CMat::zeros(n, n + 1);
    for k in 1..=n {
        a[(k - 1, k)] = Complex64::new((k as f64).sqrt(), 0.0);
    }
    a
}

#[derive(Debug, Clone)]
pub struct ThomReport {
    pub index: i64,
    pub ground_state_mass: f64,
    pub kernel_dim: usize,
    pub stable_under_doubling: bool,
}

/// Index pairing of the quantized Bott element in the 1-D isotropic model:
/// the annihilation operator (the quantization of the degree-one symbol
/// q+ip up to scale) has a one-dimensional kernel spanned by the oscillator
/// ground state and no cokernel, so the index is 1; scaling by ε changes
/// nothing.  The ground state is recovered from the truncated oscillator
/// Hamiltonian as an independent truncation audit.
pub fn thom_isotropic_check(n: usize, eps_grid: &[f64]) -> Result<ThomReport> {
    if n < 4 {
        return Err(Error::validation("Hermite cutoff too small"));
    }
    // truncated position/momentum quadratic Hamiltonian; its ground
    // eigenvector must carry ≥ 1−1e-8 of its mass on the lowest mode
    let dim = n + 1;
    let mut q = DMatrix::<f64>::zeros(dim, dim);
    let mut pm = DMatrix::<f64>::zeros(dim, dim);
    for k in 1..dim {
        let s = (k as f64 / 2.0).sqrt();
        q[(k - 1, k)] = s;
        q[(k, k - 1)] = s;
        pm[(k - 1, k)] = s;
        pm[(k, k - 1)] = -s;
    }
    let h = (&q * &q - &pm * &pm) * 0.5; // (Q² + P²)/2 with P = i·pm
    let eig = nalgebra::SymmetricEigen::new(h);
    let (mut gi, mut gv) = (0usize, f64::INFINITY);
    for (i, &v) in eig.eigenvalues.iter().enumerate() {
        if v < gv {
            gv = v;
            gi = i;
        }
    }
    let ground = eig.eigenvectors.column(gi);
    let ground_state_mass = ground[0] * ground[0] / ground.norm_squared();
    if ground_state_mass < 1.0 - 1e-8 {
        return Err(Error::computation(format!(
            "Hermite truncation too small: ground-state mass {ground_state_mass}"
        )));
    }
    let index_at = |nn: usize, scale: f64| -> Result<i64> {
        let a = TruncatedKernel::new(nn, annihilation(nn) * Complex64::new(scale, 0.0));
        let par = parametrix(&a)?;
        let idx = index_idempotent(&a, &par.q, &par.s0, &par.s1)?;
        let tr = idx.trace_difference;
        if (tr.im).abs() > 1e-9 || (tr.re - tr.re.round()).abs() > 1e-9 {
            return Err(Error::computation("index trace is not an integer"));
        }
        // trace(E₁−E₀) = rank S₁ − rank S₀ = −index
        Ok(-(tr.re.round() as i64))
    };
    let scales: Vec<f64> = if eps_grid.is_empty() {
        vec![1.0]
    } else {
        eps_grid.to_vec()
    };
    let mut index = None;
    for &eps in &scales {
        let v = index_at(n, eps)?;
        if *index.get_or_insert(v) != v {
            return Err(Error::computation("index varies across the eps grid"));
        }
    }
    let index = index.unwrap();
    let doubled = index_at(2 * n, scales[0])?;
    // kernel dimension oracle via SVD
    let sv = annihilation(n).singular_values();
    let kernel_dim = (n + 1) - sv.iter().filter(|&&s| s > 1e-9).count();
    Ok(ThomReport {
        index,
        ground_state_mass,
        kernel_dim,
        stable_under_doubling: doubled == index,
    })
}

// ---------------------------------------------------------------------------

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::Factor;

    fn gauss() -> SclSymbol {
        SclSymbol::new(0, 6.0, |_, xi| Complex64::new((-xi * xi).exp(), 0.0)).unwrap()
    }

    fn g_gauss() -> SclSymbol {
        SclSymbol::new(2, 6.0, |th, xi| {
            Complex64::new(
                (1.0 + 0.5 * (2.0 * th).cos()) * (-xi * xi).exp(),
                0.3 * th.sin() * (-xi * xi).exp(),
            )
        })
        .unwrap()
    }

    #[test]
    fn decay_envelope_is_enforced() {
        // claiming support radius 1 for a slowly decaying symbol must fail
        assert!(SclSymbol::new(0, 1.0, |_, _| Complex64::new(1.0, 0.0)).is_err());
        assert!(gauss().support_radius == 6.0);
    }

    #[test]
    fn diagonal_symbol_quantizes_to_diagonal() {
        let a = gauss();
        let k = quantize_banded(&a, 0.25, 32).unwrap();
        assert_eq!(k.d, 0);
        for c in 0..k.modes() {
            let xi = 0.25 * (c as f64 - 32.0);
            assert!((k.entry(c, c) - a.at(0.0, xi)).norm() < 1e-14);
        }
        // zero symbol → zero kernel
        let z = SclSymbol::new(0, 1.0, |_, _| Complex64::new(0.0, 0.0)).unwrap();
        let kz = quantize_banded(&z, 0.25, 8).unwrap();
        assert!(kz.to_dense().norm() < 1e-15);
    }

    #[test]
    fn entries_match_oscillatory_integral_oracle() {
        let a = g_gauss();
        let eps = 0.25;
        let n = 32;
        let k = quantize_banded(&a, eps, n).unwrap();
        // independent quadrature: A_{r,c} = (1/2π)∫ a(θ, ε·μ_c) e^{−i(r−c)θ} dθ
        for (r, c) in [(30usize, 32usize), (33, 32), (10, 9), (40, 41), (32, 32)] {
            let xi = eps * (c as f64 - n as f64);
            let m = r as i64 - c as i64;
            let grid = 512;
            let mut acc = Complex64::new(0.0, 0.0);
            for j in 0..grid {
                let th = 2.0 * PI * j as f64 / grid as f64;
                let ph = -(m as f64) * th;
                acc += a.at(th, xi) * Complex64::new(ph.cos(), ph.sin());
            }
            acc /= grid as f64;
            assert!((k.entry(r, c) - acc).norm() < 1e-8, "entry ({r},{c})");
        }
    }

    #[test]
    fn sigma_inverts_quantize_exactly() {
        let a = g_gauss();
        let eps = 1.0 / 8.0;
        let k = quantize_banded(&a, eps, 64).unwrap();
        let rec = sigma_scl(&k, eps, 24);
        for (ti, &th) in rec.thetas.iter().enumerate() {
            for (mi, &mu) in rec.modes.iter().enumerate() {
                let exact = a.at(th, eps * mu as f64);
                assert!((rec.values[ti][mi] - exact).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn quantize_is_linear_and_has_real_symmetry() {
        let eps = 0.25;
        let n = 24;
        let a = g_gauss();
        let b = gauss();
        let sum = SclSymbol::new(2, 6.0, {
            let (a, b) = (a.clone(), b.clone());
            move |th, xi| a.at(th, xi) + Complex64::new(2.0, 0.0) * b.at(th, xi)
        })
        .unwrap();
        let qs = quantize(&sum, eps, n).unwrap();
        let ql = quantize(&a, eps, n).unwrap() + quantize(&b, eps, n).unwrap() * Complex64::new(2.0, 0.0);
        assert!((qs - ql).norm() < 1e-12);
        // a(θ,−ξ) = conj a(θ,ξ) ⇒ A = conj(J A J) with J the mode flip
        let real_sym = SclSymbol::new(1, 6.0, |th, xi| {
            Complex64::new((-xi * xi).exp() * th.cos(), xi * (-xi * xi).exp())
        })
        .unwrap();
        let q = quantize(&real_sym, eps, n).unwrap();
        let nm = 2 * n + 1;
        for r in 0..nm {
            for c in 0..nm {
                let flipped = q[(nm - 1 - r, nm - 1 - c)].conj();
                assert!((q[(r, c)] - flipped).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn multiplication_symbols_compose_exactly() {
        let eps_grid = DEFAULT_EPS_GRID;
        let f = SclSymbol::multiplication(1, |th| Complex64::new(th.cos(), 0.2));
        let g = SclSymbol::multiplication(1, |th| Complex64::new(0.5, th.sin()));
        let rep = scl_composition_defect(&f, &g, &eps_grid).unwrap();
        assert!(rep.at_floor, "defects {:?}", rep.defects);
    }

    #[test]
    fn composition_defect_slope_is_order_eps() {
        let rep = scl_composition_defect(&gauss(), &g_gauss(), &DEFAULT_EPS_GRID).unwrap();
        assert!(rep.slope >= 0.9, "slope {} defects {:?}", rep.slope, rep.defects);
        // reversed order: the diagonal factor sits on the right where left
        // quantization is exact, so the defect lands on the floor instead
        let rev = scl_composition_defect(&g_gauss(), &gauss(), &DEFAULT_EPS_GRID).unwrap();
        assert!(rev.at_floor || rev.slope >= 0.9, "reversed {rev:?}");
        // two ξ-dependent, θ-dependent symbols in both orders
        let c = SclSymbol::new(1, 6.0, |th, xi| {
            Complex64::new(th.sin(), 0.4) * Complex64::new((-0.5 * (xi - 1.0) * (xi - 1.0)).exp(), 0.0)
        })
        .unwrap();
        let both = scl_composition_defect(&c, &g_gauss(), &DEFAULT_EPS_GRID).unwrap();
        assert!(both.slope >= 0.9, "slope {} defects {:?}", both.slope, both.defects);
        // short grids are rejected
        assert!(scl_composition_defect(&gauss(), &g_gauss(), &[0.25, 0.125]).is_err());
    }

    fn winding_family(points: usize) -> OddSymbolFamily {
        let base = Mesh::new(vec![Factor::Circle { points }], 0).unwrap();
        let a = |p: &ChartPoint| {
            let x = p.x[0];
            SclSymbol::new(1, 6.0, move |th, xi| {
                let bump = (-12.0 * xi * xi).exp();
                let loopv = Complex64::new((2.0 * PI * x).cos() - 1.0, (2.0 * PI * x).sin());
                loopv * bump + Complex64::new(0.0, 0.2) * Complex64::new(th.cos(), 0.0) * (-(xi - 1.0) * (xi - 1.0)).exp()
            })
            .unwrap()
        };
        let seed = |p: &ChartPoint| {
            let x = p.x[0];
            SclSymbol::new(0, 6.0, move |_, xi| {
                let bump = (-12.0 * xi * xi).exp();
                let loopv = Complex64::new((2.0 * PI * x).cos() - 1.0, (2.0 * PI * x).sin());
                let v = Complex64::new(1.0, 0.0) + loopv * bump;
                1.0 / v - 1.0
            })
            .unwrap()
        };
        OddSymbolFamily {
            base,
            symbol_at: Rc::new(a),
            inverse_seed_at: Rc::new(seed),
        }
    }

    #[test]
    fn odd_family_polishes_and_winds_once() {
        let fam = winding_family(16);
        let inv = odd_scl_index(&fam, 0.5, 16).unwrap();
        assert!(inv.max_residual < 1e-12);
        let w = det_winding(&inv).unwrap();
        assert!((w - 1.0).abs() < 1e-6, "winding {w}");
        // identity family has zero class
        let base = inv.base.clone();
        let zero = OddSymbolFamily {
            base,
            symbol_at: Rc::new(|_p: &ChartPoint| {
                SclSymbol::new(0, 1.0, |_, _| Complex64::new(0.0, 0.0)).unwrap()
            }),
            inverse_seed_at: Rc::new(|_p: &ChartPoint| {
                SclSymbol::new(0, 1.0, |_, _| Complex64::new(0.0, 0.0)).unwrap()
            }),
        };
        let invz = odd_scl_index(&zero, 0.5, 16).unwrap();
        assert!(det_winding(&invz).unwrap().abs() < 1e-9);
    }

    #[test]
    fn winding_is_invariant_under_eps_reparametrization() {
        let fam = winding_family(16);
        let w_half = det_winding(&odd_scl_index(&fam, 0.5, 16).unwrap()).unwrap();
        let w_quarter = det_winding(&odd_scl_index(&fam, 0.25, 32).unwrap()).unwrap();
        assert!((w_half - w_quarter).abs() < 1e-6, "{w_half} vs {w_quarter}");
    }

    #[test]
    fn riesz_projector_polishes_idempotents() {
        // perturbed projector: exact idempotent plus a small non-idempotent
        // perturbation, polished back to machine idempotency
        let mut p = CMat::zeros(6, 6);
        for i in 0..3 {
            p[(i, i)] = Complex64::new(1.0, 0.0);
        }
        let mut pert = p.clone();
        pert[(0, 4)] = Complex64::new(0.05, 0.02);
        pert[(5, 1)] = Complex64::new(-0.03, 0.01);
        pert[(2, 2)] += Complex64::new(0.04, 0.0);
        let proj = riesz_projector(&pert).unwrap();
        assert!((&proj * &proj - &proj).norm() < 1e-12);
        // the polished rank matches the seed rank
        let tr = proj.trace();
        assert!((tr - Complex64::new(3.0, 0.0)).norm() < 1e-9);
        // a spectrum touching 1/2 is rejected
        let mut bad = CMat::zeros(2, 2);
        bad[(0, 0)] = Complex64::new(0.5, 0.0);
        assert!(riesz_projector(&bad).is_err());
    }

    #[test]
    fn thom_check_returns_one_and_is_stable() {
        let rep = thom_isotropic_check(32, &[0.5, 0.25]).unwrap();
        assert_eq!(rep.index, 1);
        assert_eq!(rep.kernel_dim, 1);
        assert!(rep.stable_under_doubling);
        assert!(rep.ground_state_mass > 1.0 - 1e-10);
        // ground-state projector is rank one with unit trace
        let g = ground_state_projector(32);
        assert!((g.trace() - Complex64::new(1.0, 0.0)).norm() < 1e-12);
        assert!((&g * &g - &g).norm() < 1e-14);
    }
}
