//! Finite graphs with edge lengths and their Ihara zeta functions.
//!
//! An undirected edge `j` with endpoints `(u, v)` gives the directed edges
//! `e_j: u -> v` and `e_{j+J}: v -> u`. Its length is `a_j + b_j / L` where
//! `L = log(1/|z|)`; Ihara zeta functions use `b = 0`.

use crate::numeric::{clog1p, real_gcd};
use nalgebra::DMatrix;
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GraphError {
    #[error("invalid graph: {0}")]
    Invalid(String),
    #[error("graph is not regular: vertex {vertex} has degree {degree}, expected {expected}")]
    NotRegular { vertex: usize, degree: u32, expected: u32 },
    #[error("lengths ({0}, {1}, {2}, {3}) do not match any two-generator skeleton")]
    InconsistentLengths(f64, f64, f64, f64),
    #[error("the figure-eight skeleton has no edge weighting that reproduces Z_0")]
    NoWeighting,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Edge {
    pub from: usize,
    pub to: usize,
    /// Length at `L = infinity`.
    pub a: f64,
    /// Coefficient of `1/L` in the length.
    #[serde(default)]
    pub b: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WeightedGraph {
    pub vertices: usize,
    pub edges: Vec<Edge>,
}

/// Result of a truncated Euler product.
#[derive(Clone, Debug, Serialize)]
pub struct EulerValue {
    pub value: C64,
    pub classes: usize,
    /// Bound on `|log Z - log Z_truncated|`; infinite when the tail series diverges.
    pub tail_bound: f64,
}

impl WeightedGraph {
    pub fn new(vertices: usize, edges: Vec<Edge>) -> Result<Self, GraphError> {
        if edges.is_empty() {
            return Err(GraphError::Invalid("no edges".into()));
        }
        for e in &edges {
            if e.from >= vertices || e.to >= vertices {
                return Err(GraphError::Invalid(format!(
                    "edge {}-{} uses a vertex outside 0..{vertices}",
                    e.from, e.to
                )));
            }
            if !(e.a > 0.0) || !e.a.is_finite() || !e.b.is_finite() {
                return Err(GraphError::Invalid("edge lengths must be positive".into()));
            }
        }
        Ok(Self { vertices, edges })
    }

    /// Graph with the given integer lengths and no `1/L` part.
    pub fn with_lengths(vertices: usize, ends: &[(usize, usize)], lengths: &[f64]) -> Result<Self, GraphError> {
        let edges = ends
            .iter()
            .zip(lengths)
            .map(|(&(from, to), &a)| Edge { from, to, a, b: 0.0 })
            .collect();
        Self::new(vertices, edges)
    }

    /// Two vertices joined by three edges.
    pub fn theta(h: [f64; 3]) -> Self {
        Self::with_lengths(2, &[(0, 1), (0, 1), (0, 1)], &h).expect("valid")
    }

    /// Two loops joined by a bar: loop `h[0]` at vertex 0, loop `h[1]` at vertex 1, bar `h[2]`.
    pub fn dumbbell(h: [f64; 3]) -> Self {
        Self::with_lengths(2, &[(0, 0), (1, 1), (0, 1)], &h).expect("valid")
    }

    /// Two loops at one vertex.
    pub fn figure_eight(h: [f64; 2]) -> Self {
        Self::with_lengths(1, &[(0, 0), (0, 0)], &h).expect("valid")
    }

    /// Unit-length graph from a symmetric adjacency matrix; diagonal entries
    /// count each loop twice.
    pub fn from_adjacency(adj: &DMatrix<u32>) -> Result<Self, GraphError> {
        let n = adj.nrows();
        if adj.ncols() != n || adj != &adj.transpose() {
            return Err(GraphError::Invalid("adjacency must be square and symmetric".into()));
        }
        let mut ends = Vec::new();
        for i in 0..n {
            if adj[(i, i)] % 2 != 0 {
                return Err(GraphError::Invalid("diagonal entries count loops twice".into()));
            }
            for _ in 0..adj[(i, i)] / 2 {
                ends.push((i, i));
            }
            for j in i + 1..n {
                for _ in 0..adj[(i, j)] {
                    ends.push((i, j));
                }
            }
        }
        let lengths = vec![1.0; ends.len()];
        Self::with_lengths(n, &ends, &lengths)
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    /// Lengths of the `J` undirected edges at `L` (`None` drops the `1/L` part).
    pub fn lengths(&self, l: Option<f64>) -> Vec<f64> {
        self.edges.iter().map(|e| e.a + l.map_or(0.0, |l| e.b / l)).collect()
    }

    /// `(tail, head)` of directed edge `k` in `0..2J`.
    pub fn ends(&self, k: usize) -> (usize, usize) {
        let j = self.edges.len();
        if k < j {
            (self.edges[k].from, self.edges[k].to)
        } else {
            (self.edges[k - j].to, self.edges[k - j].from)
        }
    }

    pub fn reverse(&self, k: usize) -> usize {
        let j = self.edges.len();
        if k < j {
            k + j
        } else {
            k - j
        }
    }

    /// True when `e_j` feeds `e_k` without backtracking.
    pub fn feeds(&self, j: usize, k: usize) -> bool {
        self.ends(j).1 == self.ends(k).0 && k != self.reverse(j)
    }

    /// `W(e_j, e_k) = exp(-s (h_j + h_k)/2)` when `e_j` feeds `e_k`.
    pub fn edge_matrix(&self, s: C64, l: Option<f64>) -> DMatrix<C64> {
        let h = self.lengths(l);
        let jn = self.edges.len();
        let hd = |k: usize| h[k % jn];
        DMatrix::from_fn(2 * jn, 2 * jn, |j, k| {
            if self.feeds(j, k) {
                (-s * (hd(j) + hd(k)) / 2.0).exp()
            } else {
                C64::new(0.0, 0.0)
            }
        })
    }

    /// `det(I - W(s))` by LU with partial pivoting.
    pub fn ihara_det(&self, s: C64, l: Option<f64>) -> C64 {
        let w = self.edge_matrix(s, l);
        let n = w.nrows();
        (DMatrix::identity(n, n) - w).lu().determinant()
    }

    /// Primitive non-backtracking loop classes (rotation classes of directed
    /// edge cycles) of length at most `l_max`, each as its least rotation.
    pub fn primitive_loops(&self, l_max: f64, l: Option<f64>) -> Vec<(Vec<usize>, f64)> {
        let h = self.lengths(l);
        let jn = self.edges.len();
        let n = 2 * jn;
        let succ: Vec<Vec<usize>> = (0..n).map(|j| (0..n).filter(|&k| self.feeds(j, k)).collect()).collect();
        let mut out = Vec::new();
        let mut path = Vec::new();
        struct Ctx<'a> {
            succ: &'a [Vec<usize>],
            h: &'a [f64],
            jn: usize,
            l_max: f64,
        }
        fn dfs(ctx: &Ctx, start: usize, path: &mut Vec<usize>, len: f64, out: &mut Vec<(Vec<usize>, f64)>) {
            let last = *path.last().expect("nonempty");
            for &k in &ctx.succ[last] {
                if k == start && is_least_primitive_rotation(path) {
                    out.push((path.clone(), len));
                }
                if k < start {
                    continue;
                }
                let nl = len + ctx.h[k % ctx.jn];
                if nl > ctx.l_max + 1e-9 {
                    continue;
                }
                path.push(k);
                dfs(ctx, start, path, nl, out);
                path.pop();
            }
        }
        let ctx = Ctx {
            succ: &succ,
            h: &h,
            jn,
            l_max,
        };
        for start in 0..n {
            let len = h[start % jn];
            if len > l_max + 1e-9 {
                continue;
            }
            path.clear();
            path.push(start);
            dfs(&ctx, start, &mut path, len, &mut out);
        }
        out
    }

    /// Euler product over primitive loop classes of length at most `l_max`.
    pub fn ihara_euler(&self, s: C64, l_max: f64, l: Option<f64>) -> EulerValue {
        let loops = self.primitive_loops(l_max, l);
        let log_sum: C64 = loops.iter().map(|(_, len)| clog1p(-(-s * len).exp())).sum();
        let tail = self.euler_tail_bound(s.re, l_max, l);
        if !(tail <= 1e-9) {
            log::warn!("Ihara Euler product tail bound {tail:e} at Re s = {}", s.re);
        }
        EulerValue {
            value: log_sum.exp(),
            classes: loops.len(),
            tail_bound: tail,
        }
    }

    /// Bound on the omitted part of `log Z`: loops of `n` steps number at most
    /// `2J d^{n-1}` (`d` the largest out-degree in `W`), each contributes at
    /// most `2 e^{-sigma max(l_max, n h_min)}`.
    pub fn euler_tail_bound(&self, sigma: f64, l_max: f64, l: Option<f64>) -> f64 {
        let h = self.lengths(l);
        let hmin = h.iter().copied().fold(f64::INFINITY, f64::min);
        let n = 2 * self.edges.len();
        let d = (0..n)
            .map(|j| (0..n).filter(|&k| self.feeds(j, k)).count())
            .max()
            .unwrap_or(0) as f64;
        if sigma <= 0.0 {
            return f64::INFINITY;
        }
        let ratio = d * (-sigma * hmin).exp();
        if ratio >= 1.0 {
            return f64::INFINITY;
        }
        let n0 = (l_max / hmin).floor() as i32;
        let near = (1..=n0.max(0)).map(|k| d.powi(k - 1)).sum::<f64>() * (-sigma * l_max).exp();
        let far = d.powi(n0) * (-sigma * hmin * (n0 + 1) as f64).exp() / (1.0 - ratio);
        2.0 * n as f64 * 2.0 * (near + far)
    }

    /// Period `2 pi / d` of `W(s)` along the imaginary axis, where `d` is the
    /// gcd of the numbers `(h_j + h_k)/2` over feeding pairs.
    pub fn strip_period(&self, l: Option<f64>) -> Option<f64> {
        let h = self.lengths(l);
        let jn = self.edges.len();
        let mut vals = Vec::new();
        for j in 0..2 * jn {
            for k in 0..2 * jn {
                if self.feeds(j, k) {
                    vals.push((h[j % jn] + h[k % jn]) / 2.0);
                }
            }
        }
        real_gcd(&vals, 1e-9).map(|d| 2.0 * PI / d)
    }
}

fn is_least_primitive_rotation(p: &[usize]) -> bool {
    let n = p.len();
    for r in 1..n {
        for i in 0..n {
            let (a, b) = (p[(i + r) % n], p[i]);
            if a < b {
                return false;
            }
            if a > b {
                break;
            }
            if i == n - 1 {
                // equal to a proper rotation: not primitive
                return false;
            }
        }
    }
    // cyclic non-backtracking is guaranteed by construction (last feeds first)
    true
}

/// `(1 - u^2)^{r-1} det(I - A u + (q - 1) u^2)` for a `q`-regular graph
/// with adjacency `A`, `r = |E| - |V| + 1`, `u = e^{-s}`.
pub fn regular_graph_zeta(adj: &DMatrix<u32>, s: C64) -> Result<C64, GraphError> {
    let n = adj.nrows();
    let degrees: Vec<u32> = (0..n).map(|i| adj.row(i).iter().sum()).collect();
    let q = degrees[0];
    if let Some((v, &d)) = degrees.iter().enumerate().find(|(_, &d)| d != q) {
        return Err(GraphError::NotRegular {
            vertex: v,
            degree: d,
            expected: q,
        });
    }
    let edges = degrees.iter().sum::<u32>() as i64 / 2;
    let r = edges - n as i64 + 1;
    let u = (-s).exp();
    let a = adj.map(|x| C64::new(x as f64, 0.0));
    let m = DMatrix::<C64>::identity(n, n) - a * u + DMatrix::<C64>::identity(n, n) * ((q as f64 - 1.0) * u * u);
    Ok((1.0 - u * u).powi((r - 1) as i32) * m.lu().determinant())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SkeletonKind {
    Theta,
    Dumbbell,
    FigureEight,
}

/// Skeleton graph of a rank-two family.
#[derive(Clone, Debug, Serialize)]
pub struct Skeleton {
    pub kind: SkeletonKind,
    pub graph: WeightedGraph,
    /// For the theta graph: whether `a_1 a_2^{-1}` (rather than `a_1 a_2`)
    /// is the short product.
    pub inverted: bool,
}

/// Classifies the skeleton from the non-Archimedean lengths of
/// `a_1, a_2, a_1 a_2, a_1 a_2^{-1}`.
///
/// Theta: one product is `l_a + l_b`, the other shorter; edges
/// `h_1 = (l_a + l_ab - l_b)/2`, `h_2 = (l_a + l_b - l_ab)/2`, `h_3 = (l_b + l_ab - l_a)/2`.
/// Figure eight: both products equal `l_a + l_b`; loops `l_a, l_b`.
/// Dumbbell: both products equal and longer; loops `l_a, l_b`, bar `(l_ab - l_a - l_b)/2`.
pub fn skeleton_two_generator(la: f64, lb: f64, lab: f64, labinv: f64) -> Result<Skeleton, GraphError> {
    let sum = la + lb;
    let eq = |x: f64, y: f64| (x - y).abs() < 1e-9;
    let bad = GraphError::InconsistentLengths(la, lb, lab, labinv);
    if !(la > 0.0 && lb > 0.0) {
        return Err(bad);
    }
    if eq(lab, sum) && eq(labinv, sum) {
        return Ok(Skeleton {
            kind: SkeletonKind::FigureEight,
            graph: WeightedGraph::figure_eight([la, lb]),
            inverted: false,
        });
    }
    if lab > sum + 1e-9 && labinv > sum + 1e-9 {
        if !eq(lab, labinv) {
            return Err(bad);
        }
        return Ok(Skeleton {
            kind: SkeletonKind::Dumbbell,
            graph: WeightedGraph::dumbbell([la, lb, (lab - sum) / 2.0]),
            inverted: false,
        });
    }
    let (short, inverted) = if eq(labinv, sum) && lab < sum {
        (lab, false)
    } else if eq(lab, sum) && labinv < sum {
        (labinv, true)
    } else {
        return Err(bad);
    };
    let h = [
        (la + short - lb) / 2.0,
        (la + lb - short) / 2.0,
        (lb + short - la) / 2.0,
    ];
    if h.iter().any(|&x| x <= 0.0) {
        return Err(bad);
    }
    Ok(Skeleton {
        kind: SkeletonKind::Theta,
        graph: WeightedGraph::theta(h),
        inverted,
    })
}

impl Skeleton {
    /// Adds the `1/L` corrections `b_j = 2 alpha_j` determined by the leading
    /// trace coefficients `A, B` of the generators and `C` of the short
    /// product (`a_1 a_2`, or `a_1 a_2^{-1}` when inverted; for the dumbbell
    /// either product).
    pub fn weighted(&self, a: f64, b: f64, c: f64) -> Result<WeightedGraph, GraphError> {
        let (la, lb, lc) = (a.abs().ln(), b.abs().ln(), c.abs().ln());
        let alpha = match self.kind {
            SkeletonKind::Theta => [(la + lc - lb) / 2.0, (la + lb - lc) / 2.0, (lb + lc - la) / 2.0],
            SkeletonKind::Dumbbell => [la, lb, (lc - la - lb) / 2.0],
            SkeletonKind::FigureEight => return Err(GraphError::NoWeighting),
        };
        let mut g = self.graph.clone();
        for (e, al) in g.edges.iter_mut().zip(alpha) {
            e.b = 2.0 * al;
        }
        Ok(g)
    }
}

/// `(-2abc + a^2 + b^2 + c^2 - 1)(2abc + a^2 + b^2 + c^2 - 1)` with
/// `a = e^{-s(h_2+h_3)/2}`, `b = e^{-s(h_1+h_3)/2}`, `c = e^{-s(h_1+h_2)/2}`.
pub fn theta_closed_form(h: [f64; 3], s: C64) -> C64 {
    let a = (-s * (h[1] + h[2]) / 2.0).exp();
    let b = (-s * (h[0] + h[2]) / 2.0).exp();
    let c = (-s * (h[0] + h[1]) / 2.0).exp();
    let q = a * a + b * b + c * c - 1.0;
    (q - 2.0 * a * b * c) * (q + 2.0 * a * b * c)
}

/// `-(c-1)(c+1)(a-1)(a+1)(4a^2b^4c^2 - a^2c^2 + a^2 + c^2 - 1)` with
/// `a = e^{-s h_1/2}`, `b = e^{-s h_3/2}`, `c = e^{-s h_2/2}` (loops `h_1, h_2`, bar `h_3`).
pub fn dumbbell_closed_form(h: [f64; 3], s: C64) -> C64 {
    let a = (-s * h[0] / 2.0).exp();
    let b = (-s * h[2] / 2.0).exp();
    let c = (-s * h[1] / 2.0).exp();
    let (a2, b2, c2) = (a * a, b * b, c * c);
    -(c - 1.0) * (c + 1.0) * (a - 1.0) * (a + 1.0) * (4.0 * a2 * b2 * b2 * c2 - a2 * c2 + a2 + c2 - 1.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn cs(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn single_loop() {
        let g = WeightedGraph::with_lengths(1, &[(0, 0)], &[3.0]).unwrap();
        let w = g.edge_matrix(cs(0.4, 0.0), None);
        assert_eq!(w.nrows(), 2);
        assert!((w[(0, 0)] - (-1.2f64).exp()).norm() < 1e-15);
        assert_eq!(w[(0, 1)], cs(0.0, 0.0));
        let s = cs(0.7, 1.3);
        let want = (1.0 - (-s * 3.0).exp()).powi(2);
        assert!((g.ihara_det(s, None) - want).norm() < 1e-14);
        let e = g.ihara_euler(s, 3.5, None);
        assert_eq!(e.classes, 2);
        assert!((e.value - want).norm() < 1e-14);
    }

    #[test]
    fn theta_edge_matrix_shape() {
        let g = WeightedGraph::theta([2.0; 3]);
        let w = g.edge_matrix(cs(0.0, 0.0), None);
        assert_eq!(w.nrows(), 6);
        for j in 0..6 {
            let row: Vec<C64> = (0..6).map(|k| w[(j, k)]).filter(|x| x.norm() > 0.0).collect();
            assert_eq!(row.len(), 2);
            assert!(row.iter().all(|x| (x - 1.0).norm() == 0.0));
        }
    }

    #[test]
    fn theta_matches_factorization() {
        let g = WeightedGraph::theta([2.0; 3]);
        for k in 0..20 {
            let s = cs(0.1 + 0.13 * k as f64, -2.0 + 0.21 * k as f64);
            let x = (-2.0 * s).exp();
            let want = (1.0 - x * x).powi(2) * (1.0 - 4.0 * x * x);
            assert!((g.ihara_det(s, None) - want).norm() <= 1e-10 * want.norm().max(1.0));
            assert!((theta_closed_form([2.0; 3], s) - want).norm() <= 1e-12 * want.norm().max(1.0));
        }
        assert!((g.ihara_det(cs(50.0, 0.0), None) - 1.0).norm() <= 1e-20);
    }

    #[test]
    fn euler_matches_det() {
        for g in [
            WeightedGraph::theta([2.0; 3]),
            WeightedGraph::dumbbell([2.0; 3]),
            WeightedGraph::theta([1.0, 2.0, 3.0]),
        ] {
            let s = cs(2.0, 0.3);
            let e = g.ihara_euler(s, 30.0, None);
            assert!((e.value - g.ihara_det(s, None)).norm() <= 1e-8, "{g:?}");
            assert!(e.tail_bound < 1e-8);
        }
    }

    fn k4() -> DMatrix<u32> {
        DMatrix::from_fn(4, 4, |i, j| u32::from(i != j))
    }

    #[test]
    fn k4_regular_formula() {
        let g = WeightedGraph::from_adjacency(&k4()).unwrap();
        for k in 0..20 {
            let s = cs(0.2 + 0.1 * k as f64, 0.37 * k as f64);
            let u = (-s).exp();
            let want = (1.0 - u * u).powi(2) * (1.0 - 3.0 * u + 2.0 * u * u) * (1.0 + u + 2.0 * u * u).powi(3);
            let r = regular_graph_zeta(&k4(), s).unwrap();
            assert!((r - want).norm() <= 1e-10 * want.norm().max(1.0));
            assert!((g.ihara_det(s, None) - want).norm() <= 1e-10 * want.norm().max(1.0));
        }
        assert!((regular_graph_zeta(&k4(), cs(60.0, 0.0)).unwrap() - 1.0).norm() < 1e-20);
        let e = g.ihara_euler(cs(3.0, 0.0), 24.0, None);
        assert!((e.value - regular_graph_zeta(&k4(), cs(3.0, 0.0)).unwrap()).norm() < 1e-7);
        let path = DMatrix::from_row_slice(3, 3, &[0, 1, 0, 1, 0, 1, 0, 1, 0]);
        assert!(matches!(
            regular_graph_zeta(&path, cs(1.0, 0.0)),
            Err(GraphError::NotRegular { .. })
        ));
    }

    #[test]
    fn skeleton_classification() {
        let t = skeleton_two_generator(4.0, 4.0, 4.0, 8.0).unwrap();
        assert_eq!(t.kind, SkeletonKind::Theta);
        assert_eq!(t.graph.lengths(None), vec![2.0, 2.0, 2.0]);
        let e = skeleton_two_generator(2.0, 2.0, 4.0, 4.0).unwrap();
        assert_eq!(e.kind, SkeletonKind::FigureEight);
        assert_eq!(e.graph.lengths(None), vec![2.0, 2.0]);
        let d = skeleton_two_generator(2.0, 2.0, 8.0, 8.0).unwrap();
        assert_eq!(d.kind, SkeletonKind::Dumbbell);
        assert_eq!(d.graph.lengths(None), vec![2.0, 2.0, 2.0]);
        assert!(skeleton_two_generator(2.0, 2.0, 1.0, 1.0).is_err());
        let inv = skeleton_two_generator(4.0, 4.0, 8.0, 4.0).unwrap();
        assert!(inv.inverted);
    }

    #[test]
    fn dumbbell_closed_form_matches_det() {
        let h = [2.0, 3.0, 1.5];
        let g = WeightedGraph::dumbbell(h);
        for k in 0..10 {
            let s = cs(0.05 + 0.2 * k as f64, 1.0 - 0.3 * k as f64);
            let d = g.ihara_det(s, None);
            assert!((d - dumbbell_closed_form(h, s)).norm() <= 1e-12 * d.norm().max(1.0));
        }
    }

    #[test]
    fn periods() {
        let g = WeightedGraph::theta([2.0; 3]);
        let p = g.strip_period(None).unwrap();
        assert!((p - PI).abs() < 1e-12);
        let s = cs(0.3, 0.4);
        let w0 = g.edge_matrix(s, None);
        let w1 = g.edge_matrix(s + cs(0.0, p), None);
        assert!((w0 - w1).norm() < 1e-14);
    }

    proptest! {
        #[test]
        fn relabeling_keeps_det(perm in prop::sample::select(vec![[0usize, 1, 2], [0, 2, 1], [1, 0, 2], [1, 2, 0], [2, 0, 1], [2, 1, 0]]), re in 0.05f64..2.0, im in -3.0f64..3.0) {
            let h = [1.0, 2.0, 3.0];
            let g = WeightedGraph::theta(h);
            let p = WeightedGraph::theta([h[perm[0]], h[perm[1]], h[perm[2]]]);
            let s = cs(re, im);
            let (a, b) = (g.ihara_det(s, None), p.ihara_det(s, None));
            prop_assert!((a - b).norm() <= 1e-12 * a.norm().max(1.0));
        }
    }
}
