//! Evaluation of trigonometric series on lattice-translated point clouds.
//!
//! Quadrature points of a structured periodic mesh are `c·spacing + r_o` for
//! cell indices `c ∈ {0..cells-1}³` and a fixed set of offsets `r_o`. For each
//! offset the series is summed one axis at a time, which costs
//! `O(cells·K³ + cells²·K² + cells³·K)` instead of `O(cells³·K³)`.

use super::modes;
use num_complex::Complex64;

#[derive(Clone, Debug)]
pub struct LatticeSpec {
    pub cells: usize,
    pub spacing: f64,
    pub offsets: Vec<[f64; 3]>,
}

impl LatticeSpec {
    pub fn len(&self) -> usize {
        self.cells.pow(3) * self.offsets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Physical coordinates of lattice point `cell * offsets.len() + o`.
    pub fn point(&self, idx: usize) -> [f64; 3] {
        let no = self.offsets.len();
        let cell = idx / no;
        let o = idx % no;
        let c = [
            cell % self.cells,
            (cell / self.cells) % self.cells,
            cell / (self.cells * self.cells),
        ];
        std::array::from_fn(|d| c[d] as f64 * self.spacing + self.offsets[o][d])
    }
}

/// Evaluate every coefficient array (all at resolution `n`) on the lattice.
/// Output `[a][cell * offsets.len() + o]`, `cell = c1 + cells (c2 + cells c3)`.
pub fn eval_lattice(n: usize, arrays: &[&[Complex64]], lattice: &LatticeSpec) -> Vec<Vec<f64>> {
    let table = modes(n);
    let mut km = 0i64;
    for a in arrays {
        for (idx, z) in a.iter().enumerate() {
            if *z != Complex64::default() {
                km = km.max(table.k[idx].iter().map(|c| c.abs()).max().unwrap_or(0));
            }
        }
    }
    let kw = (2 * km + 1) as usize;
    let band: Vec<Vec<Complex64>> = arrays
        .iter()
        .map(|a| {
            let mut b = vec![Complex64::default(); kw * kw * kw];
            for (idx, z) in a.iter().enumerate() {
                let k = table.k[idx];
                if k.iter().all(|c| c.abs() <= km) && *z != Complex64::default() {
                    let j = |c: i64| (c + km) as usize;
                    b[j(k[0]) + kw * (j(k[1]) + kw * j(k[2]))] += *z;
                }
            }
            b
        })
        .collect();

    let cells = lattice.cells;
    let no = lattice.offsets.len();
    let mut out = vec![vec![0.0; cells * cells * cells * no]; arrays.len()];
    let mut s1 = vec![Complex64::default(); kw * kw * cells];
    let mut s2 = vec![Complex64::default(); kw * cells * cells];
    for (o, r) in lattice.offsets.iter().enumerate() {
        // phase[d][c * kw + (k + km)]
        let phase: Vec<Vec<Complex64>> = (0..3)
            .map(|d| {
                let mut p = Vec::with_capacity(cells * kw);
                for c in 0..cells {
                    let x = c as f64 * lattice.spacing + r[d];
                    for k in -km..=km {
                        p.push(Complex64::from_polar(1.0, k as f64 * x));
                    }
                }
                p
            })
            .collect();
        for (b, dst) in band.iter().zip(out.iter_mut()) {
            // S1[(k3, k2), c1] = Σ_k1 B[k1,k2,k3] e^{i k1 x1}
            for k23 in 0..kw * kw {
                let row = &b[k23 * kw..(k23 + 1) * kw];
                for c1 in 0..cells {
                    let ph = &phase[0][c1 * kw..(c1 + 1) * kw];
                    let mut acc = Complex64::default();
                    for (z, p) in row.iter().zip(ph) {
                        acc += z * p;
                    }
                    s1[k23 * cells + c1] = acc;
                }
            }
            // S2[k3, c2, c1] = Σ_k2 S1[(k3,k2), c1] e^{i k2 x2}
            for k3 in 0..kw {
                for c2 in 0..cells {
                    let ph = &phase[1][c2 * kw..(c2 + 1) * kw];
                    for c1 in 0..cells {
                        let mut acc = Complex64::default();
                        for (k2, p) in ph.iter().enumerate() {
                            acc += s1[(k3 * kw + k2) * cells + c1] * p;
                        }
                        s2[(k3 * cells + c2) * cells + c1] = acc;
                    }
                }
            }
            for c3 in 0..cells {
                let ph = &phase[2][c3 * kw..(c3 + 1) * kw];
                for c2 in 0..cells {
                    for c1 in 0..cells {
                        let mut acc = 0.0;
                        for (k3, p) in ph.iter().enumerate() {
                            acc += (s2[(k3 * cells + c2) * cells + c1] * p).re;
                        }
                        let cell = c1 + cells * (c2 + cells * c3);
                        dst[cell * no + o] = acc;
                    }
                }
            }
        }
    }
    out
}
