//! Product-grid meshes: circle factors, six-patch cube-sphere factors, and
//! a virtual circle factor for fiber directions that forms may have legs
//! along without depending on (the circle-bundle fiber).
//!
//! Sample lattices are used for sup-norms and residual reports; integration
//! uses trapezoid sums on periodic factors and per-patch Gauss–Legendre
//! quadrature on sphere patches, so analytic integrands integrate to near
//! machine precision while finite-difference derivatives keep an honest,
//! resolution-tied step.

use std::rc::Rc;

use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Factor {
    /// coordinate in [0,1), periodic
    Circle { points: usize },
    /// six gnomonic patches with (s,t) in [-1,1]^2, n lattice points per axis
    CubeSphere { n: usize },
    /// fiber circle direction: contributes a form axis, but all data is
    /// invariant along it and integration over it has total measure 1
    VirtualCircle,
}

impl Factor {
    pub fn axes(&self) -> usize {
        match self {
            Factor::CubeSphere { .. } => 2,
            _ => 1,
        }
    }
    pub fn patches(&self) -> usize {
        match self {
            Factor::CubeSphere { .. } => 6,
            _ => 1,
        }
    }
}

#[derive(Debug, Clone)]
pub struct Mesh {
    pub factors: Vec<Factor>,
    pub resolution: u32,
}

/// A point: one patch index per factor plus one coordinate per axis.
#[derive(Debug, Clone, PartialEq)]
pub struct ChartPoint {
    pub chart: Vec<usize>,
    pub x: Vec<f64>,
}

impl Mesh {
    pub fn new(factors: Vec<Factor>, resolution: u32) -> Result<Rc<Mesh>> {
        for f in &factors {
            match *f {
                Factor::Circle { points } if points < 8 => {
                    return Err(Error::validation("circle grids need at least 8 points"))
                }
                Factor::CubeSphere { n } if n < 4 => {
                    return Err(Error::validation("cube-sphere patches need at least 4 points"))
                }
                _ => {}
            }
        }
        Ok(Rc::new(Mesh {
            factors,
            resolution,
        }))
    }

    /// Same factors at double resolution.
    pub fn refined(&self) -> Rc<Mesh> {
        let factors = self
            .factors
            .iter()
            .map(|f| match *f {
                Factor::Circle { points } => Factor::Circle { points: points * 2 },
                Factor::CubeSphere { n } => Factor::CubeSphere { n: n * 2 },
                Factor::VirtualCircle => Factor::VirtualCircle,
            })
            .collect();
        Rc::new(Mesh {
            factors,
            resolution: self.resolution + 1,
        })
    }

    pub fn dim(&self) -> usize {
        self.factors.iter().map(Factor::axes).sum()
    }

    /// Factor index and within-factor axis for a global axis.
    pub fn axis_owner(&self, axis: usize) -> (usize, usize) {
        let mut a = axis;
        for (fi, f) in self.factors.iter().enumerate() {
            if a < f.axes() {
                return (fi, a);
            }
            a -= f.axes();
        }
        panic!("axis {axis} out of range");
    }

    pub fn first_axis_of(&self, factor: usize) -> usize {
        self.factors[..factor].iter().map(Factor::axes).sum()
    }

    /// Finite-difference step along an axis (zero marks a virtual axis with
    /// no dependence).
    pub fn axis_step(&self, axis: usize) -> f64 {
        let (fi, _) = self.axis_owner(axis);
        match self.factors[fi] {
            Factor::Circle { points } => 1.0 / points as f64,
            Factor::CubeSphere { n } => 2.0 / (n as f64 - 1.0),
            Factor::VirtualCircle => 0.0,
        }
    }

    /// Sample lattice (used for sup-norms and residual scans).
    pub fn lattice(&self) -> Vec<ChartPoint> {
        let mut pts = vec![ChartPoint {
            chart: Vec::new(),
            x: Vec::new(),
        }];
        for f in &self.factors {
            let mut next = Vec::new();
            for p in &pts {
                match *f {
                    Factor::Circle { points } => {
                        for i in 0..points {
                            let mut q = p.clone();
                            q.chart.push(0);
                            q.x.push(i as f64 / points as f64);
                            next.push(q);
                        }
                    }
                    Factor::CubeSphere { n } => {
                        for face in 0..6 {
                            for i in 0..n {
                                for j in 0..n {
                                    let mut q = p.clone();
                                    q.chart.push(face);
                                    q.x.push(-1.0 + 2.0 * i as f64 / (n as f64 - 1.0));
                                    q.x.push(-1.0 + 2.0 * j as f64 / (n as f64 - 1.0));
                                    next.push(q);
                                }
                            }
                        }
                    }
                    Factor::VirtualCircle => {
                        let mut q = p.clone();
                        q.chart.push(0);
                        q.x.push(0.0);
                        next.push(q);
                    }
                }
            }
            pts = next;
        }
        pts
    }

    /// Quadrature rule: points with weights, integrating functions sampled
    /// in local coordinates (form components carry the metric factors).
    pub fn quadrature(&self) -> Vec<(ChartPoint, f64)> {
        let mut pts = vec![(
            ChartPoint {
                chart: Vec::new(),
                x: Vec::new(),
            },
            1.0,
        )];
        for f in &self.factors {
            let mut next = Vec::new();
            for (p, w) in &pts {
                match *f {
                    Factor::Circle { points } => {
                        for i in 0..points {
                            let mut q = p.clone();
                            q.chart.push(0);
                            q.x.push(i as f64 / points as f64);
                            next.push((q, w / points as f64));
                        }
                    }
                    Factor::CubeSphere { n } => {
                        // enough nodes that smooth curvature integrands
                        // integrate to ~1e-12 even on coarse lattices
                        let (nodes, weights) = gauss_legendre(n.max(24));
                        for face in 0..6 {
                            for (i, &s) in nodes.iter().enumerate() {
                                for (j, &t) in nodes.iter().enumerate() {
                                    let mut q = p.clone();
                                    q.chart.push(face);
                                    q.x.push(s);
                                    q.x.push(t);
                                    next.push((q, w * weights[i] * weights[j]));
                                }
                            }
                        }
                    }
                    Factor::VirtualCircle => {
                        let mut q = p.clone();
                        q.chart.push(0);
                        q.x.push(0.0);
                        next.push((q, *w));
                    }
                }
            }
            pts = next;
        }
        pts
    }

    /// Shift a point along an axis.  Circle coordinates are NOT wrapped:
    /// evaluators see the universal-cover coordinate, so locally lifted
    /// (multivalued) data stays smooth under finite differencing.  Periodic
    /// evaluators must be periodic as functions (e.g. built from sin/cos or
    /// an explicit internal reduction).
    pub fn shifted(&self, p: &ChartPoint, axis: usize, delta: f64) -> ChartPoint {
        let mut q = p.clone();
        q.x[axis] += delta;
        q
    }
}

// ---------------------------------------------------------------------------
// cube-sphere charts
// ---------------------------------------------------------------------------

/// Embedding of a cube face into R³ before normalization; faces oriented so
/// that ∂s × ∂t points outward everywhere.
fn face_embed(face: usize, s: f64, t: f64) -> [f64; 3] {
    match face {
        0 => [1.0, s, t],
        1 => [-1.0, -s, t],
        2 => [-s, 1.0, t],
        3 => [s, -1.0, t],
        4 => [s, t, 1.0],
        5 => [-s, t, -1.0],
        _ => panic!("face index {face}"),
    }
}

fn face_embed_ds(face: usize) -> [f64; 3] {
    match face {
        0 => [0.0, 1.0, 0.0],
        1 => [0.0, -1.0, 0.0],
        2 => [-1.0, 0.0, 0.0],
        3 => [1.0, 0.0, 0.0],
        4 => [1.0, 0.0, 0.0],
        5 => [-1.0, 0.0, 0.0],
        _ => panic!(),
    }
}

fn face_embed_dt(face: usize) -> [f64; 3] {
    match face {
        0 | 1 | 2 | 3 => [0.0, 0.0, 1.0],
        4 | 5 => [0.0, 1.0, 0.0],
        _ => panic!(),
    }
}

/// Normalized sphere point of a face chart plus the s- and t-derivatives of
/// the normalized point.
pub fn sphere_chart(face: usize, s: f64, t: f64) -> ([f64; 3], [f64; 3], [f64; 3]) {
    let p = face_embed(face, s, t);
    let dps = face_embed_ds(face);
    let dpt = face_embed_dt(face);
    let r2 = p[0] * p[0] + p[1] * p[1] + p[2] * p[2];
    let r = r2.sqrt();
    let dot = |a: &[f64; 3], b: &[f64; 3]| a[0] * b[0] + a[1] * b[1] + a[2] * b[2];
    let ps = dot(&p, &dps);
    let pt = dot(&p, &dpt);
    let mut x = [0.0; 3];
    let mut xs = [0.0; 3];
    let mut xt = [0.0; 3];
    for i in 0..3 {
        x[i] = p[i] / r;
        xs[i] = dps[i] / r - p[i] * ps / (r2 * r);
        xt[i] = dpt[i] / r - p[i] * pt / (r2 * r);
    }
    (x, xs, xt)
}

/// Riemannian area density of the chart: |∂s x × ∂t x| with sign from the
/// outward orientation (positive by construction).
pub fn sphere_area_density(face: usize, s: f64, t: f64) -> f64 {
    let (x, xs, xt) = sphere_chart(face, s, t);
    let cx = xs[1] * xt[2] - xs[2] * xt[1];
    let cy = xs[2] * xt[0] - xs[0] * xt[2];
    let cz = xs[0] * xt[1] - xs[1] * xt[0];
    // oriented density: project onto the outward normal x
    x[0] * cx + x[1] * cy + x[2] * cz
}

/// Gauss–Legendre nodes and weights on [-1, 1].
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for k in 0..n {
        // Newton iteration from the Chebyshev-based initial guess
        let mut x = (std::f64::consts::PI * (k as f64 + 0.75) / (n as f64 + 0.5)).cos();
        for _ in 0..100 {
            let (p, dp) = legendre(n, x);
            let dx = p / dp;
            x -= dx;
            if dx.abs() < 1e-15 {
                break;
            }
        }
        let (_, dp) = legendre(n, x);
        nodes[n - 1 - k] = x;
        weights[n - 1 - k] = 2.0 / ((1.0 - x * x) * dp * dp);
    }
    (nodes, weights)
}

/// Legendre polynomial P_n and derivative at x.
fn legendre(n: usize, x: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0f64, x);
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let k = k as f64;
        let p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
    }
    let dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, dp)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gauss_legendre_integrates_polynomials() {
        let (x, w) = gauss_legendre(8);
        let int: f64 = x.iter().zip(&w).map(|(&x, &w)| w * x.powi(10)).sum();
        assert!((int - 2.0 / 11.0).abs() < 1e-13);
        let total: f64 = w.iter().sum();
        assert!((total - 2.0).abs() < 1e-13);
    }

    #[test]
    fn sphere_area_is_4pi() {
        let mesh = Mesh::new(vec![Factor::CubeSphere { n: 16 }], 0).unwrap();
        let mut area = 0.0;
        for (p, w) in mesh.quadrature() {
            area += w * sphere_area_density(p.chart[0], p.x[0], p.x[1]);
        }
        assert!((area - 4.0 * std::f64::consts::PI).abs() < 1e-10, "area {area}");
    }

    #[test]
    fn sphere_chart_derivatives_match_fd() {
        let (_, xs, xt) = sphere_chart(2, 0.3, -0.4);
        let h = 1e-6;
        let (xp, _, _) = sphere_chart(2, 0.3 + h, -0.4);
        let (xm, _, _) = sphere_chart(2, 0.3 - h, -0.4);
        for i in 0..3 {
            assert!(((xp[i] - xm[i]) / (2.0 * h) - xs[i]).abs() < 1e-8);
        }
        let (yp, _, _) = sphere_chart(2, 0.3, -0.4 + h);
        let (ym, _, _) = sphere_chart(2, 0.3, -0.4 - h);
        for i in 0..3 {
            assert!(((yp[i] - ym[i]) / (2.0 * h) - xt[i]).abs() < 1e-8);
        }
    }

    #[test]
    fn circle_quadrature_is_exact_for_trig() {
        let mesh = Mesh::new(vec![Factor::Circle { points: 16 }], 0).unwrap();
        let mut s = 0.0;
        for (p, w) in mesh.quadrature() {
            s += w * (2.0 * std::f64::consts::PI * 3.0 * p.x[0]).cos().powi(2);
        }
        assert!((s - 0.5).abs() < 1e-13);
    }
}
