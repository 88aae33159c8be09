//! Truncated operator algebra on circle fibers.
//!
//! A smoothing kernel on the fiber is modeled by its matrix in the Fourier
//! basis e^{imθ}, m = -N..N.  Twisted transitions act by mode shifts and
//! phases; the analytic index comes out of the standard parametrix /
//! idempotent construction.  Everything is plain finite linear algebra, and
//! every truncation loss is measured and reported, never dropped silently.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::{Error, Result};

pub type CMat = DMatrix<Complex64>;

/// Matrix of a fiber operator in the truncated Fourier basis.  Square
/// kernels act on modes -N..N (size 2N+1); rectangular shapes appear as
/// restrictions in index computations and carry their own row/column mode
/// offsets.
#[derive(Debug, Clone)]
pub struct TruncatedKernel {
    pub n: usize,
    pub mat: CMat,
    /// lowest mode of row index 0 / column index 0
    pub row_mode0: i64,
    pub col_mode0: i64,
    /// optional grading (block sizes of E+/E-) for graded kernels
    pub grading: Option<(usize, usize)>,
}

impl TruncatedKernel {
    pub fn new(n: usize, mat: CMat) -> Self {
        let m0 = -(n as i64);
        TruncatedKernel {
            n,
            mat,
            row_mode0: m0,
            col_mode0: m0,
            grading: None,
        }
    }

    pub fn identity(n: usize) -> Self {
        let d = 2 * n + 1;
        TruncatedKernel::new(n, CMat::identity(d, d))
    }

    pub fn zeros(n: usize) -> Self {
        let d = 2 * n + 1;
        TruncatedKernel::new(n, CMat::zeros(d, d))
    }

    pub fn dim(&self) -> usize {
        2 * self.n + 1
    }

    /// Fiberwise composition: in the trivialized Fourier representation
    /// this is plain matrix multiplication.
    pub fn compose(&self, other: &TruncatedKernel) -> Result<TruncatedKernel> {
        if self.n != other.n || self.mat.ncols() != other.mat.nrows() {
            return Err(Error::structural(format!(
                "kernel size mismatch: {}x{} vs {}x{}",
                self.mat.nrows(),
                self.mat.ncols(),
                other.mat.nrows(),
                other.mat.ncols()
            )));
        }
        Ok(TruncatedKernel {
            n: self.n,
            mat: &self.mat * &other.mat,
            row_mode0: self.row_mode0,
            col_mode0: other.col_mode0,
            grading: None,
        })
    }

    /// Twisted conjugation a ↦ e^{inθ} a e^{-inθ'}: both indices shift by
    /// `shift`; mass pushed outside the band is dropped and returned as the
    /// truncation defect (Frobenius norm of the lost block).
    pub fn twisted_conjugate(&self, shift: i64) -> Result<(TruncatedKernel, f64)> {
        if shift.unsigned_abs() as usize > self.n {
            return Err(Error::structural(format!(
                "shift {shift} exceeds band cutoff {}",
                self.n
            )));
        }
        let d = self.mat.nrows();
        assert_eq!(d, self.mat.ncols(), "twisted conjugation needs square kernels");
        let mut out = CMat::zeros(d, d);
        let mut lost = 0.0f64;
        for i in 0..d {
            for j in 0..d {
                let v = self.mat[(i, j)];
                if v.norm() == 0.0 {
                    continue;
                }
                let ti = i as i64 + shift;
                let tj = j as i64 + shift;
                if ti >= 0 && (ti as usize) < d && tj >= 0 && (tj as usize) < d {
                    out[(ti as usize, tj as usize)] = v;
                } else {
                    lost += v.norm_sqr();
                }
            }
        }
        Ok((TruncatedKernel::new(self.n, out), lost.sqrt()))
    }

    pub fn frobenius(&self) -> f64 {
        self.mat.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn sup_entry(&self) -> f64 {
        self.mat.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }
}

/// Translation and multiplication unitaries of the basic Heisenberg-group
/// representation on L²(S¹), truncated to the band.
pub struct HeisenbergUnitaries {
    pub n: usize,
}

impl HeisenbergUnitaries {
    pub fn new(n: usize) -> Result<Self> {
        if n < 1 {
            return Err(Error::validation("band cutoff must be >= 1"));
        }
        Ok(HeisenbergUnitaries { n })
    }

    /// Translation by φ: diagonal phases e^{ikφ}.
    pub fn translation(&self, phi: f64) -> TruncatedKernel {
        let d = 2 * self.n + 1;
        let mut m = CMat::zeros(d, d);
        for i in 0..d {
            let k = i as i64 - self.n as i64;
            m[(i, i)] = Complex64::from_polar(1.0, k as f64 * phi);
        }
        TruncatedKernel::new(self.n, m)
    }

    /// Multiplication by e^{inθ}: mode shift by `shift` (entries leaving the
    /// band are dropped; the matrix is a partial isometry at truncation).
    pub fn multiplication(&self, shift: i64) -> TruncatedKernel {
        let d = 2 * self.n + 1;
        let mut m = CMat::zeros(d, d);
        for j in 0..d {
            let i = j as i64 + shift;
            if i >= 0 && (i as usize) < d {
                m[(i as usize, j)] = Complex64::new(1.0, 0.0);
            }
        }
        TruncatedKernel::new(self.n, m)
    }

    /// Representation of a Heisenberg group element (g, n, z), with g a
    /// circle rotation, n a winding and z a scalar: z · mult(n) · trans(g).
    pub fn represent(&self, g: f64, winding: i64, z: Complex64) -> TruncatedKernel {
        let t = self.translation(g);
        let m = self.multiplication(winding);
        let mut k = m.compose(&t).unwrap();
        k.mat *= z;
        k
    }

    /// Interior-band projector leaving `margin` modes off each edge, used to
    /// compare truncated products away from edge effects.
    pub fn interior(&self, margin: usize) -> TruncatedKernel {
        let d = 2 * self.n + 1;
        let mut m = CMat::zeros(d, d);
        for i in margin..d.saturating_sub(margin) {
            m[(i, i)] = Complex64::new(1.0, 0.0);
        }
        TruncatedKernel::new(self.n, m)
    }
}

/// Parametrix data for a fiber operator.
pub struct ParametrixData {
    pub q: TruncatedKernel,
    pub s0: TruncatedKernel,
    pub s1: TruncatedKernel,
    pub rank_s0: usize,
    pub rank_s1: usize,
    pub condition_warning: bool,
}

const RANK_TOL_FACTOR: f64 = 1e-9;

/// Moore–Penrose parametrix: Q = pseudoinverse of P, S0 = I - QP the
/// projection onto ker P, S1 = I - PQ the projection onto coker P.
pub fn parametrix(p: &TruncatedKernel) -> Result<ParametrixData> {
    let (rows, cols) = (p.mat.nrows(), p.mat.ncols());
    let svd = p.mat.clone().svd(true, true);
    let smax = svd.singular_values.iter().cloned().fold(0.0f64, f64::max);
    let tol = smax.max(1.0) * RANK_TOL_FACTOR;
    let rank = svd.singular_values.iter().filter(|&&s| s > tol).count();
    let smin_nonzero = svd
        .singular_values
        .iter()
        .cloned()
        .filter(|&s| s > tol)
        .fold(f64::INFINITY, f64::min);
    let condition_warning = rank > 0 && smax / smin_nonzero > 1e12;
    let mut q = svd.clone().pseudo_inverse(tol).map_err(Error::computation)?;
    if rank == 0 {
        q = CMat::zeros(cols, rows);
    }
    let s0 = CMat::identity(cols, cols) - &q * &p.mat;
    let s1 = CMat::identity(rows, rows) - &p.mat * &q;
    let mk = |mat: CMat, r0: i64, c0: i64| TruncatedKernel {
        n: p.n,
        mat,
        row_mode0: r0,
        col_mode0: c0,
        grading: None,
    };
    Ok(ParametrixData {
        q: mk(q, p.col_mode0, p.row_mode0),
        s0: mk(s0, p.col_mode0, p.col_mode0),
        s1: mk(s1, p.row_mode0, p.row_mode0),
        rank_s0: cols - rank,
        rank_s1: rows - rank,
        condition_warning,
    })
}

/// The analytic-index idempotent pair.
pub struct IndexData {
    pub e0: CMat,
    pub e1: CMat,
    pub idempotency_residual: f64,
    /// trace(E1 - E0); equals rank S1 - rank S0 = -index(P)
    pub trace_difference: Complex64,
}

/// E1 = [[1-S0², Q(S1+S1²)],[S1 P, S1²]] and E0 = [[1,0],[0,0]] on the
/// graded space domain ⊕ codomain.  E1² = E1 holds for any generalized
/// inverse Q as long as S0 = I - QP and S1 = I - PQ.
pub fn index_idempotent(
    p: &TruncatedKernel,
    q: &TruncatedKernel,
    s0: &TruncatedKernel,
    s1: &TruncatedKernel,
) -> Result<IndexData> {
    let dc = p.mat.ncols(); // domain
    let dr = p.mat.nrows(); // codomain
    if q.mat.nrows() != dc || q.mat.ncols() != dr {
        return Err(Error::structural("Q shape incompatible with P"));
    }
    // defining relations
    let r0 = (&s0.mat + &q.mat * &p.mat - CMat::identity(dc, dc)).norm();
    let r1 = (&s1.mat + &p.mat * &q.mat - CMat::identity(dr, dr)).norm();
    if r0 > 1e-9 || r1 > 1e-9 {
        return Err(Error::validation(format!(
            "S0/S1 do not satisfy their defining relations (residuals {r0:.2e}, {r1:.2e})"
        )));
    }
    let d = dc + dr;
    let mut e1 = CMat::zeros(d, d);
    let mut e0 = CMat::zeros(d, d);
    let s0sq = &s0.mat * &s0.mat;
    let s1sq = &s1.mat * &s1.mat;
    let top_left = CMat::identity(dc, dc) - &s0sq;
    let top_right = &q.mat * (&s1.mat + &s1sq);
    let bot_left = &s1.mat * &p.mat;
    e1.view_mut((0, 0), (dc, dc)).copy_from(&top_left);
    e1.view_mut((0, dc), (dc, dr)).copy_from(&top_right);
    e1.view_mut((dc, 0), (dr, dc)).copy_from(&bot_left);
    e1.view_mut((dc, dc), (dr, dr)).copy_from(&s1sq);
    e0.view_mut((0, 0), (dc, dc))
        .copy_from(&CMat::identity(dc, dc));
    let idempotency_residual = (&e1 * &e1 - &e1).norm();
    if idempotency_residual > 1e-9 {
        return Err(Error::computation(format!(
            "E1 failed idempotency: residual {idempotency_residual:.2e}"
        )));
    }
    let trace_difference = (&e1 - &e0).trace();
    Ok(IndexData {
        e0,
        e1,
        idempotency_residual,
        trace_difference,
    })
}

/// Toeplitz-type model with winding k: the shift by k on the band, with the
/// domain restricted so that no mass falls off the band edge (k ≥ 0 shrinks
/// the domain from the top, k < 0 from the bottom).  This reproduces the
/// half-infinite Toeplitz kernel/cokernel counts without edge artifacts:
/// ker = 0, coker of dimension |k|.
pub fn toeplitz_winding(n: usize, k: i64) -> Result<TruncatedKernel> {
    let d = 2 * n + 1;
    let ka = k.unsigned_abs() as usize;
    if ka > d {
        return Err(Error::validation("winding exceeds band size"));
    }
    let cols = d - ka;
    let mut mat = CMat::zeros(d, cols);
    for j in 0..cols {
        let i = if k >= 0 { j + ka } else { j };
        mat[(i, j)] = Complex64::new(1.0, 0.0);
    }
    // column mode offset: for k >= 0 the domain keeps modes -N..N-k
    let col_mode0 = -(n as i64);
    Ok(TruncatedKernel {
        n,
        mat,
        row_mode0: -(n as i64),
        col_mode0,
        grading: None,
    })
}

/// Seed-deterministic dense random kernel on the band (uniform complex
/// entries), for idempotent-identity exercises.
pub fn random_kernel(n: usize, seed: u64) -> TruncatedKernel {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let d = 2 * n + 1;
    let mat = CMat::from_fn(d, d, |_, _| {
        Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
    });
    TruncatedKernel::new(n, mat)
}
