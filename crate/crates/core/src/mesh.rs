//! Closed polygonal boundaries and the periodic piecewise-linear basis.
//!
//! Panel `a` runs from node `a` to node `a + 1 (mod N)`. With nodes listed
//! counter-clockwise the normal `n = (tau_2, -tau_1)` points outwards and the
//! tangent `t = A n` coincides with the panel direction `tau`.

use std::path::Path;

use crate::error::{BemError, Result};
use crate::quadrature::gauss_legendre;

/// The rotation `A = [0, -1; 1, 0]`.
pub const ROTATION: [[f64; 2]; 2] = [[0.0, -1.0], [1.0, 0.0]];

pub fn rotate(v: [f64; 2]) -> [f64; 2] {
    [-v[1], v[0]]
}

#[derive(Debug, Clone, PartialEq)]
pub struct BoundaryMesh {
    pub nodes: Vec<[f64; 2]>,
    pub segments: Vec<(usize, usize)>,
    pub seg_length: Vec<f64>,
    pub seg_normal: Vec<[f64; 2]>,
    pub seg_tangent: Vec<[f64; 2]>,
    /// Arclength at each node, with `node_arc[N]` the perimeter.
    pub node_arc: Vec<f64>,
}

impl BoundaryMesh {
    /// Closed polygon through `nodes` in the given order.
    pub fn from_nodes(nodes: Vec<[f64; 2]>) -> Result<Self> {
        let n = nodes.len();
        if n < 3 {
            return Err(BemError::param("nodes", format!("a closed polygon needs at least 3 nodes, got {n}")));
        }
        let mut segments = Vec::with_capacity(n);
        let mut seg_length = Vec::with_capacity(n);
        let mut seg_normal = Vec::with_capacity(n);
        let mut seg_tangent = Vec::with_capacity(n);
        let mut node_arc = Vec::with_capacity(n + 1);
        node_arc.push(0.0);
        for a in 0..n {
            let b = (a + 1) % n;
            let d = [nodes[b][0] - nodes[a][0], nodes[b][1] - nodes[a][1]];
            let h = d[0].hypot(d[1]);
            if !(h > 0.0) {
                return Err(BemError::param("nodes", format!("segment {a} has zero length")));
            }
            let tau = [d[0] / h, d[1] / h];
            let normal = [tau[1], -tau[0]];
            segments.push((a, b));
            seg_length.push(h);
            seg_normal.push(normal);
            seg_tangent.push(rotate(normal));
            node_arc.push(node_arc[a] + h);
        }
        Ok(Self { nodes, segments, seg_length, seg_normal, seg_tangent, node_arc })
    }

    /// Plain text, one `x y` pair per line; `#` starts a comment.
    pub fn from_polyline_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| BemError::param("polyline", format!("{}: {e}", path.display())))?;
        let mut nodes = Vec::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let vals: Vec<f64> = line
                .split_whitespace()
                .map(str::parse)
                .collect::<std::result::Result<_, _>>()
                .map_err(|e| BemError::param("polyline", format!("line {}: {e}", lineno + 1)))?;
            if vals.len() != 2 {
                return Err(BemError::param("polyline", format!("line {}: expected two numbers", lineno + 1)));
            }
            nodes.push([vals[0], vals[1]]);
        }
        Self::from_nodes(nodes)
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn perimeter(&self) -> f64 {
        self.node_arc[self.len()]
    }

    pub fn max_h(&self) -> f64 {
        self.seg_length.iter().cloned().fold(0.0, f64::max)
    }

    /// Point at local coordinate `s in [0, 1]` of panel `a`.
    #[inline]
    pub fn point(&self, a: usize, s: f64) -> [f64; 2] {
        let (i, j) = self.segments[a];
        let (p, q) = (self.nodes[i], self.nodes[j]);
        [p[0] + s * (q[0] - p[0]), p[1] + s * (q[1] - p[1])]
    }

    /// Mesh with reversed node order; every normal flips.
    pub fn reversed(&self) -> Self {
        let mut nodes = self.nodes.clone();
        nodes.reverse();
        Self::from_nodes(nodes).expect("reversal preserves validity")
    }

    pub fn scaled(&self, s: f64) -> Self {
        Self::from_nodes(self.nodes.iter().map(|p| [p[0] * s, p[1] * s]).collect()).expect("positive scale")
    }
}

/// Regular `N`-gon inscribed in the circle of radius `r0`, counter-clockwise.
pub fn build_circle_mesh(r0: f64, n: usize) -> Result<BoundaryMesh> {
    if n < 4 {
        return Err(BemError::param("N", format!("circle mesh needs at least 4 elements, got {n}")));
    }
    if !(r0 > 0.0) || !r0.is_finite() {
        return Err(BemError::param("R0", format!("radius must be positive, got {r0}")));
    }
    let nodes = (0..n)
        .map(|j| {
            let th = 2.0 * std::f64::consts::PI * j as f64 / n as f64;
            [r0 * th.cos(), r0 * th.sin()]
        })
        .collect();
    BoundaryMesh::from_nodes(nodes)
}

/// One periodic hat function `phi_i`, supported on panels `i - 1` and `i`.
#[derive(Debug, Clone, Copy)]
pub struct PLBasis<'a> {
    pub mesh: &'a BoundaryMesh,
    pub index: usize,
}

impl<'a> PLBasis<'a> {
    pub fn new(mesh: &'a BoundaryMesh, index: usize) -> Self {
        Self { mesh, index: index % mesh.len() }
    }

    /// The two panels of the support, `(left, right)`.
    pub fn support(&self) -> (usize, usize) {
        let n = self.mesh.len();
        ((self.index + n - 1) % n, self.index)
    }

    /// Value at local coordinate `s` of panel `a`.
    pub fn value(&self, a: usize, s: f64) -> f64 {
        let (l, r) = self.support();
        let mut v = 0.0;
        if a == r {
            v += 1.0 - s;
        }
        if a == l {
            v += s;
        }
        v
    }

    /// Arclength derivative on panel `a`: `+1/h` rising, `-1/h` falling.
    pub fn dds(&self, a: usize) -> f64 {
        let (l, r) = self.support();
        let h = self.mesh.seg_length[a];
        let mut v = 0.0;
        if a == r {
            v -= 1.0 / h;
        }
        if a == l {
            v += 1.0 / h;
        }
        v
    }
}

/// Local hat values `[1 - s, s]` at a reference point.
#[inline]
pub fn local_hats(s: f64) -> [f64; 2] {
    [1.0 - s, s]
}

/// Gauss points of one panel with the two local hats and their derivatives.
#[derive(Debug, Clone, PartialEq)]
pub struct PanelQuadrature {
    pub points: Vec<[f64; 2]>,
    pub weights: Vec<f64>,
    /// `phi[k] = [phi_a(x_k), phi_{a+1}(x_k)]`.
    pub phi: Vec<[f64; 2]>,
    /// `[-1/h, 1/h]`.
    pub dphi: [f64; 2],
}

/// Gauss-Legendre tables on every panel; weights on a panel sum to `h`.
pub fn basis_quadrature_nodes(mesh: &BoundaryMesh, q: usize) -> Vec<PanelQuadrature> {
    let rule = gauss_legendre(q.max(1));
    (0..mesh.len())
        .map(|a| {
            let h = mesh.seg_length[a];
            PanelQuadrature {
                points: rule.nodes.iter().map(|&s| mesh.point(a, s)).collect(),
                weights: rule.weights.iter().map(|w| w * h).collect(),
                phi: rule.nodes.iter().map(|&s| local_hats(s)).collect(),
                dphi: [-1.0 / h, 1.0 / h],
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn square_mesh() {
        let m = build_circle_mesh(1.0, 4).unwrap();
        let expect = [[1.0, 0.0], [0.0, 1.0], [-1.0, 0.0], [0.0, -1.0]];
        for (p, e) in m.nodes.iter().zip(expect) {
            assert!((p[0] - e[0]).abs() < 1e-15 && (p[1] - e[1]).abs() < 1e-15);
        }
        for &h in &m.seg_length {
            assert!((h - 2f64.sqrt()).abs() < 1e-15);
        }
    }

    #[test]
    fn outward_unit_normals() {
        let m = build_circle_mesh(0.01, 64).unwrap();
        for a in 0..m.len() {
            let n = m.seg_normal[a];
            let t = m.seg_tangent[a];
            assert!((n[0].hypot(n[1]) - 1.0).abs() < 1e-15);
            assert!((n[0] * t[0] + n[1] * t[1]).abs() < 1e-15);
            let mid = m.point(a, 0.5);
            assert!(mid[0] * n[0] + mid[1] * n[1] > 0.0);
            assert!((m.seg_length[a] - 2.0 * 0.01 * (std::f64::consts::PI / 64.0).sin()).abs() < 1e-16);
        }
    }

    #[test]
    fn perimeter_converges() {
        let m = build_circle_mesh(1.0, 256).unwrap();
        let gap = (m.perimeter() - 2.0 * std::f64::consts::PI).abs() / (2.0 * std::f64::consts::PI);
        assert!(gap < 1e-4);
    }

    #[test]
    fn too_few_elements() {
        assert!(build_circle_mesh(1.0, 3).is_err());
    }

    #[test]
    fn hat_basis_partition_of_unity() {
        let m = build_circle_mesh(1.0, 7).unwrap();
        for a in 0..m.len() {
            for &s in &[0.0, 0.3, 1.0] {
                let total: f64 = (0..m.len()).map(|i| PLBasis::new(&m, i).value(a, s)).sum();
                assert!((total - 1.0).abs() < 1e-15);
                let d: f64 = (0..m.len()).map(|i| PLBasis::new(&m, i).dds(a)).sum();
                assert!(d.abs() < 1e-12);
            }
        }
    }

    #[test]
    fn midpoint_rule() {
        let m = build_circle_mesh(2.0, 5).unwrap();
        let q = basis_quadrature_nodes(&m, 1);
        assert_eq!(q[0].points.len(), 1);
        assert!((q[0].weights[0] - m.seg_length[0]).abs() < 1e-15);
    }
}
