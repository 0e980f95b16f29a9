use super::element::{LocalElement, NQ};
use super::mesh::PeriodicMesh;
use super::sparse::{Csr, Factor, Pattern};
use super::saddle::SaddleSolver;
use crate::spectral::LatticeSpec;
use crate::{Error, Result};
use std::io::Write;
use std::sync::OnceLock;

/// Periodic P2/P1 Taylor–Hood space with its static operators.
///
/// Scalar P2 unknowns are numbered vertices first (`0..n³`), then edges
/// (`n³ + edge id`); the velocity vector stacks the three components, so
/// component `c` of scalar unknown `s` sits at `c·8n³ + s`. Pressure unknowns
/// are the `n³` vertices.
pub struct TaylorHood {
    mesh: PeriodicMesh,
    pub(crate) local: Vec<LocalElement>,
    tet_dofs: Vec<[usize; 10]>,
    tet_pdofs: Vec<[usize; 4]>,
    mass: Csr,
    stiffness: Csr,
    div: [Csr; 3],
    pmass: Csr,
    pint: Vec<f64>,
    lattice: LatticeSpec,
    scalar_pattern: OnceLock<Pattern>,
    projector: OnceLock<SaddleSolver>,
    pressure_solver: OnceLock<Factor>,
}

impl std::fmt::Debug for TaylorHood {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("TaylorHood")
            .field("n", &self.mesh.n())
            .field("velocity_dofs", &self.velocity_dofs())
            .field("pressure_dofs", &self.pressure_dofs())
            .finish()
    }
}

/// Build the mesh and the Taylor–Hood space on it.
pub fn build_space(n: usize) -> Result<(PeriodicMesh, TaylorHood)> {
    let space = TaylorHood::new(n)?;
    Ok((space.mesh.clone(), space))
}

impl TaylorHood {
    pub fn new(n: usize) -> Result<Self> {
        let mesh = PeriodicMesh::new(n)?;
        let hc = mesh.cell_size();
        let local: Vec<LocalElement> = (0..6).map(|p| LocalElement::new(p, hc)).collect();
        let nvert = mesh.num_vertices();
        let ntet = mesh.num_tets();
        let mut tet_dofs = Vec::with_capacity(ntet);
        let mut tet_pdofs = Vec::with_capacity(ntet);
        for t in 0..ntet {
            let v = mesh.tet_vertices(t);
            let e = mesh.tet_edges(t);
            let mut d = [0usize; 10];
            d[..4].copy_from_slice(&v);
            for k in 0..6 {
                d[4 + k] = nvert + e[k];
            }
            tet_dofs.push(d);
            tet_pdofs.push(v);
        }
        let ns = 8 * nvert;
        let mut m = Vec::with_capacity(ntet * 100);
        let mut a = Vec::with_capacity(ntet * 100);
        let mut b: [Vec<(usize, usize, f64)>; 3] = std::array::from_fn(|_| Vec::with_capacity(ntet * 40));
        let mut q = Vec::with_capacity(ntet * 16);
        let mut pint = vec![0.0; nvert];
        for t in 0..ntet {
            let el = &local[t % 6];
            let d = &tet_dofs[t];
            let pd = &tet_pdofs[t];
            for i in 0..10 {
                for j in 0..10 {
                    m.push((d[i], d[j], el.mass[i][j]));
                    a.push((d[i], d[j], el.stiffness[i][j]));
                }
            }
            for i in 0..4 {
                for c in 0..3 {
                    for j in 0..10 {
                        b[c].push((pd[i], d[j], el.div[c][i][j]));
                    }
                }
                for j in 0..4 {
                    q.push((pd[i], pd[j], el.pmass[i][j]));
                }
                pint[pd[i]] += el.pint[i];
            }
        }
        let lattice = LatticeSpec {
            cells: n,
            spacing: hc,
            offsets: local.iter().flat_map(|el| el.offsets.iter().copied()).collect(),
        };
        Ok(Self {
            mass: Csr::from_triplets(ns, ns, &m),
            stiffness: Csr::from_triplets(ns, ns, &a),
            div: b.map(|e| Csr::from_triplets(nvert, ns, &e)),
            pmass: Csr::from_triplets(nvert, nvert, &q),
            pint,
            mesh,
            local,
            tet_dofs,
            tet_pdofs,
            lattice,
            scalar_pattern: OnceLock::new(),
            projector: OnceLock::new(),
            pressure_solver: OnceLock::new(),
        })
    }

    pub fn mesh(&self) -> &PeriodicMesh {
        &self.mesh
    }

    pub fn n(&self) -> usize {
        self.mesh.n()
    }

    pub fn h(&self) -> f64 {
        self.mesh.h()
    }

    /// P2 unknowns per velocity component.
    pub fn scalar_dofs(&self) -> usize {
        8 * self.mesh.num_vertices()
    }

    pub fn velocity_dofs(&self) -> usize {
        3 * self.scalar_dofs()
    }

    pub fn pressure_dofs(&self) -> usize {
        self.mesh.num_vertices()
    }

    /// Scalar P2 mass matrix (one velocity component).
    pub fn mass(&self) -> &Csr {
        &self.mass
    }

    /// Scalar P2 stiffness matrix `∫ ∇φ_i·∇φ_j`.
    pub fn stiffness(&self) -> &Csr {
        &self.stiffness
    }

    /// `B_c[i][j] = ∫ ψ_i ∂_c φ_j`.
    pub fn divergence(&self, c: usize) -> &Csr {
        &self.div[c]
    }

    /// P1 pressure mass matrix.
    pub fn pressure_mass(&self) -> &Csr {
        &self.pmass
    }

    /// `∫ ψ_i`, the mean-constraint row.
    pub fn pressure_integrals(&self) -> &[f64] {
        &self.pint
    }

    pub fn tet_dofs(&self, t: usize) -> &[usize; 10] {
        &self.tet_dofs[t]
    }

    pub fn tet_pressure_dofs(&self, t: usize) -> &[usize; 4] {
        &self.tet_pdofs[t]
    }

    /// All quadrature points as a lattice: point `cell·384 + p·64 + q`.
    pub fn quadrature_points(&self) -> &LatticeSpec {
        &self.lattice
    }

    pub fn num_quadrature_points(&self) -> usize {
        self.lattice.len()
    }

    /// Quadrature weight of point `idx`.
    pub fn quadrature_weight(&self, idx: usize) -> f64 {
        let o = idx % (6 * NQ);
        self.local[o / NQ].weights[o % NQ]
    }

    pub fn component<'a>(&self, u: &'a [f64], c: usize) -> &'a [f64] {
        let ns = self.scalar_dofs();
        &u[c * ns..(c + 1) * ns]
    }

    /// `B u = Σ_c B_c u_c`.
    pub fn div_apply(&self, u: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.pressure_dofs()];
        for c in 0..3 {
            let bc = self.div[c].matvec(self.component(u, c));
            out.iter_mut().zip(&bc).for_each(|(o, v)| *o += v);
        }
        out
    }

    /// `Bᵀ p`.
    pub fn div_transpose_apply(&self, p: &[f64]) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.velocity_dofs());
        for c in 0..3 {
            out.extend(self.div[c].tmatvec(p));
        }
        out
    }

    /// `Σ_c u_cᵀ K v_c` for a scalar matrix `K`.
    pub fn block_form(&self, k: &Csr, u: &[f64], v: &[f64]) -> f64 {
        (0..3).map(|c| k.form(self.component(u, c), self.component(v, c))).sum()
    }

    pub fn l2_norm(&self, u: &[f64]) -> f64 {
        self.block_form(&self.mass, u, u).max(0.0).sqrt()
    }

    pub fn grad_norm(&self, u: &[f64]) -> f64 {
        self.block_form(&self.stiffness, u, u).max(0.0).sqrt()
    }

    /// Velocity values and gradients at all quadrature points:
    /// `values[c][pt]`, `grads[3c + d][pt] = ∂_d u_c`.
    pub fn evaluate(&self, u: &[f64]) -> ([Vec<f64>; 3], [Vec<f64>; 9]) {
        let npts = self.num_quadrature_points();
        let mut vals: [Vec<f64>; 3] = std::array::from_fn(|_| vec![0.0; npts]);
        let mut grads: [Vec<f64>; 9] = std::array::from_fn(|_| vec![0.0; npts]);
        let ntet = self.mesh.num_tets();
        for t in 0..ntet {
            let el = &self.local[t % 6];
            let d = &self.tet_dofs[t];
            let base = t * NQ;
            for c in 0..3 {
                let uc = self.component(u, c);
                let loc: [f64; 10] = std::array::from_fn(|i| uc[d[i]]);
                for q in 0..NQ {
                    let mut v = 0.0;
                    let mut g = [0.0; 3];
                    for i in 0..10 {
                        v += loc[i] * el.phi[q][i];
                        for k in 0..3 {
                            g[k] += loc[i] * el.grad[q][i][k];
                        }
                    }
                    vals[c][base + q] = v;
                    for k in 0..3 {
                        grads[3 * c + k][base + q] = g[k];
                    }
                }
            }
        }
        (vals, grads)
    }

    /// Load vector `∫ f·φ_i` from values of `f` at the quadrature points.
    pub fn load_vector(&self, values: &[Vec<f64>; 3]) -> Vec<f64> {
        let ns = self.scalar_dofs();
        let mut out = vec![0.0; 3 * ns];
        for t in 0..self.mesh.num_tets() {
            let el = &self.local[t % 6];
            let d = &self.tet_dofs[t];
            let base = t * NQ;
            for c in 0..3 {
                let f = &values[c];
                let mut loc = [0.0; 10];
                for q in 0..NQ {
                    let wf = el.weights[q] * f[base + q];
                    for i in 0..10 {
                        loc[i] += wf * el.phi[q][i];
                    }
                }
                for i in 0..10 {
                    out[c * ns + d[i]] += loc[i];
                }
            }
        }
        out
    }

    /// Temam-form convection `C(w)_ij = ∫ (w·∇φ_j) φ_i + ½ (div w) φ_j φ_i`
    /// as a scalar matrix (the same for every velocity component).
    pub fn assemble_convection(&self, w: &[f64]) -> Result<Csr> {
        if w.len() != self.velocity_dofs() {
            return Err(Error::invalid(format!(
                "convecting field has {} entries, expected {}",
                w.len(),
                self.velocity_dofs()
            )));
        }
        let ns = self.scalar_dofs();
        let ntet = self.mesh.num_tets();
        let mut entries = Vec::with_capacity(ntet * 100);
        for t in 0..ntet {
            let el = &self.local[t % 6];
            let d = &self.tet_dofs[t];
            let wl: [[f64; 10]; 3] = std::array::from_fn(|c| std::array::from_fn(|i| w[c * ns + d[i]]));
            let mut loc = [[0.0f64; 10]; 10];
            for q in 0..NQ {
                let phi = &el.phi[q];
                let grad = &el.grad[q];
                let mut wq = [0.0; 3];
                let mut divw = 0.0;
                for i in 0..10 {
                    for c in 0..3 {
                        wq[c] += wl[c][i] * phi[i];
                        divw += wl[c][i] * grad[i][c];
                    }
                }
                let a: [f64; 10] = std::array::from_fn(|j| {
                    wq[0] * grad[j][0] + wq[1] * grad[j][1] + wq[2] * grad[j][2] + 0.5 * divw * phi[j]
                });
                let wt = el.weights[q];
                for i in 0..10 {
                    let s = wt * phi[i];
                    for j in 0..10 {
                        loc[i][j] += s * a[j];
                    }
                }
            }
            for i in 0..10 {
                for j in 0..10 {
                    entries.push((d[i], d[j], loc[i][j]));
                }
            }
        }
        Ok(Csr::from_triplets(ns, ns, &entries))
    }

    /// Symbolic factorisation shared by every scalar velocity matrix (all
    /// are assembled on the same pattern).
    pub(crate) fn scalar_pattern(&self) -> Result<&Pattern> {
        if let Some(p) = self.scalar_pattern.get() {
            return Ok(p);
        }
        let p = Pattern::analyse(self.scalar_dofs(), &self.mass.entries())?;
        Ok(self.scalar_pattern.get_or_init(|| p))
    }

    /// Saddle-point solver with `K = M` (the divergence-free `L²` projection).
    pub(crate) fn projector(&self) -> Result<&SaddleSolver> {
        if let Some(f) = self.projector.get() {
            return Ok(f);
        }
        let f = SaddleSolver::new(self, &self.mass)?;
        Ok(self.projector.get_or_init(|| f))
    }

    pub(crate) fn pressure_solver(&self) -> Result<&Factor> {
        if let Some(f) = self.pressure_solver.get() {
            return Ok(f);
        }
        let f = super::sparse::factorize(self.pressure_dofs(), &self.pmass.entries())?;
        Ok(self.pressure_solver.get_or_init(|| f))
    }

    /// Plain-text listing of the mesh and both DOF maps.
    pub fn write_dump<W: Write>(&self, mut w: W) -> Result<()> {
        self.mesh.write_dump(&mut w)?;
        writeln!(
            w,
            "dofs velocity={} pressure={} scalar={}",
            self.velocity_dofs(),
            self.pressure_dofs(),
            self.scalar_dofs()
        )?;
        for t in 0..self.mesh.num_tets() {
            let d = &self.tet_dofs[t];
            let p = &self.tet_pdofs[t];
            let v: Vec<String> = d.iter().map(|x| x.to_string()).collect();
            let q: Vec<String> = p.iter().map(|x| x.to_string()).collect();
            writeln!(w, "{t} v[{}] p[{}]", v.join(" "), q.join(" "))?;
        }
        Ok(())
    }
}
