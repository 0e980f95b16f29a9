//! Reference P2/P1 element data on the six Kuhn tetrahedra of a cube.

use super::mesh::{corners, LOCAL_EDGES};

const GL_NODES: [f64; 4] = [
    -0.861_136_311_594_052_6,
    -0.339_981_043_584_856_3,
    0.339_981_043_584_856_3,
    0.861_136_311_594_052_6,
];
const GL_WEIGHTS: [f64; 4] = [
    0.347_854_845_137_453_8,
    0.652_145_154_862_546_1,
    0.652_145_154_862_546_1,
    0.347_854_845_137_453_8,
];

/// Quadrature points per tetrahedron.
pub const NQ: usize = 64;

/// Collapsed Gauss–Legendre rule on the unit tetrahedron: reference
/// coordinates and weights (summing to 1/6). Exact for total degree 5.
pub fn reference_rule() -> Vec<([f64; 3], f64)> {
    let mut out = Vec::with_capacity(NQ);
    for (&a, &wa) in GL_NODES.iter().zip(&GL_WEIGHTS) {
        let t1 = 0.5 * (a + 1.0);
        for (&b, &wb) in GL_NODES.iter().zip(&GL_WEIGHTS) {
            let t2 = 0.5 * (b + 1.0);
            for (&c, &wc) in GL_NODES.iter().zip(&GL_WEIGHTS) {
                let t3 = 0.5 * (c + 1.0);
                let xi = [t1, (1.0 - t1) * t2, (1.0 - t1) * (1.0 - t2) * t3];
                let w = 0.125 * wa * wb * wc * (1.0 - t1).powi(2) * (1.0 - t2);
                out.push((xi, w));
            }
        }
    }
    out
}

fn barycentric(xi: [f64; 3]) -> [f64; 4] {
    [1.0 - xi[0] - xi[1] - xi[2], xi[0], xi[1], xi[2]]
}

/// P2 shape values: vertices `λ_i(2λ_i − 1)`, then edges `4λ_aλ_b`.
pub fn p2_values(l: [f64; 4]) -> [f64; 10] {
    let mut v = [0.0; 10];
    for i in 0..4 {
        v[i] = l[i] * (2.0 * l[i] - 1.0);
    }
    for (e, &(a, b)) in LOCAL_EDGES.iter().enumerate() {
        v[4 + e] = 4.0 * l[a] * l[b];
    }
    v
}

fn p2_gradients(l: [f64; 4], gl: &[[f64; 3]; 4]) -> [[f64; 3]; 10] {
    let mut g = [[0.0; 3]; 10];
    for i in 0..4 {
        let s = 4.0 * l[i] - 1.0;
        g[i] = gl[i].map(|x| s * x);
    }
    for (e, &(a, b)) in LOCAL_EDGES.iter().enumerate() {
        for d in 0..3 {
            g[4 + e][d] = 4.0 * (l[a] * gl[b][d] + l[b] * gl[a][d]);
        }
    }
    g
}

/// Geometry and basis tables of one tetrahedron shape.
#[derive(Clone, Debug)]
pub struct LocalElement {
    /// Quadrature point offsets from the cube origin (physical units).
    pub offsets: Vec<[f64; 3]>,
    pub weights: Vec<f64>,
    pub phi: Vec<[f64; 10]>,
    pub grad: Vec<[[f64; 3]; 10]>,
    pub psi: Vec<[f64; 4]>,
    pub mass: [[f64; 10]; 10],
    pub stiffness: [[f64; 10]; 10],
    /// `div[c][i][j] = ∫ ψ_i ∂_c φ_j`.
    pub div: [[[f64; 10]; 4]; 3],
    pub pmass: [[f64; 4]; 4],
    pub pint: [f64; 4],
}

impl LocalElement {
    pub fn new(p: usize, hc: f64) -> Self {
        let cs = corners(p);
        let col = |k: usize| cs[k].map(|x| x as f64 * hc);
        let jac = [col(1), col(2), col(3)]; // columns
        // J[r][c] = jac[c][r]
        let m = |r: usize, c: usize| jac[c][r];
        let det = m(0, 0) * (m(1, 1) * m(2, 2) - m(1, 2) * m(2, 1)) - m(0, 1) * (m(1, 0) * m(2, 2) - m(1, 2) * m(2, 0))
            + m(0, 2) * (m(1, 0) * m(2, 1) - m(1, 1) * m(2, 0));
        // rows of J⁻¹ are the gradients of ξ_1, ξ_2, ξ_3
        let cof = |r: usize, c: usize| {
            let (r1, r2) = ((r + 1) % 3, (r + 2) % 3);
            let (c1, c2) = ((c + 1) % 3, (c + 2) % 3);
            m(r1, c1) * m(r2, c2) - m(r1, c2) * m(r2, c1)
        };
        let mut inv = [[0.0; 3]; 3];
        for r in 0..3 {
            for c in 0..3 {
                inv[r][c] = cof(c, r) / det;
            }
        }
        let g1 = inv[0];
        let g2 = inv[1];
        let g3 = inv[2];
        let g0 = [-(g1[0] + g2[0] + g3[0]), -(g1[1] + g2[1] + g3[1]), -(g1[2] + g2[2] + g3[2])];
        let grad_lambda = [g0, g1, g2, g3];
        let vol_scale = det.abs();

        let rule = reference_rule();
        let mut el = Self {
            offsets: Vec::with_capacity(NQ),
            weights: Vec::with_capacity(NQ),
            phi: Vec::with_capacity(NQ),
            grad: Vec::with_capacity(NQ),
            psi: Vec::with_capacity(NQ),
            mass: [[0.0; 10]; 10],
            stiffness: [[0.0; 10]; 10],
            div: [[[0.0; 10]; 4]; 3],
            pmass: [[0.0; 4]; 4],
            pint: [0.0; 4],
        };
        for (xi, w) in rule {
            let x = [0, 1, 2].map(|r| m(r, 0) * xi[0] + m(r, 1) * xi[1] + m(r, 2) * xi[2]);
            let l = barycentric(xi);
            let w = w * vol_scale;
            let phi = p2_values(l);
            let grad = p2_gradients(l, &grad_lambda);
            for i in 0..10 {
                for j in 0..10 {
                    el.mass[i][j] += w * phi[i] * phi[j];
                    el.stiffness[i][j] += w * (0..3).map(|d| grad[i][d] * grad[j][d]).sum::<f64>();
                }
            }
            for i in 0..4 {
                for j in 0..4 {
                    el.pmass[i][j] += w * l[i] * l[j];
                }
                el.pint[i] += w * l[i];
                for c in 0..3 {
                    for j in 0..10 {
                        el.div[c][i][j] += w * l[i] * grad[j][c];
                    }
                }
            }
            el.offsets.push(x);
            el.weights.push(w);
            el.phi.push(phi);
            el.grad.push(grad);
            el.psi.push(l);
        }
        el
    }
}
