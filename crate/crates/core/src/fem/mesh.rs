use crate::{Error, Result, PERIOD};
use std::io::Write;

/// Axis orderings; tetrahedron `p` of a cube is the path
/// `0 → e_{π0} → e_{π0}+e_{π1} → (1,1,1)` for `π = PERMS[p]`.
pub(crate) const PERMS: [[usize; 3]; 6] = [[0, 1, 2], [0, 2, 1], [1, 0, 2], [1, 2, 0], [2, 0, 1], [2, 1, 0]];

/// Local edges as pairs of local vertex indices.
pub(crate) const LOCAL_EDGES: [(usize, usize); 6] = [(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)];

/// Corner offsets (in cube units) of tetrahedron `p`.
pub(crate) fn corners(p: usize) -> [[i64; 3]; 4] {
    let [a, b, _] = PERMS[p];
    let mut c1 = [0i64; 3];
    c1[a] = 1;
    let mut c2 = c1;
    c2[b] = 1;
    [[0, 0, 0], c1, c2, [1, 1, 1]]
}

/// Index in `0..7` of a nonzero 0/1 direction vector.
fn direction_index(d: [i64; 3]) -> usize {
    (d[0] + 2 * d[1] + 4 * d[2] - 1) as usize
}

/// Periodic Kuhn triangulation of `[0, 2π)³`: `n³` cubes, six tetrahedra each.
///
/// Vertices are the `n³` lattice points. An edge is a pair (start vertex,
/// direction) with the direction one of the seven nonzero 0/1 vectors, which
/// keeps distinct segments distinct even when `n = 2` makes their endpoints
/// coincide.
#[derive(Clone, Debug, PartialEq)]
pub struct PeriodicMesh {
    n: usize,
}

impl PeriodicMesh {
    pub fn new(n: usize) -> Result<Self> {
        if n < 2 {
            return Err(Error::invalid(format!(
                "periodic mesh needs at least 2 cells per axis, got {n}"
            )));
        }
        Ok(Self { n })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Cube edge length `2π/n`.
    pub fn cell_size(&self) -> f64 {
        PERIOD / self.n as f64
    }

    /// Largest tetrahedron diameter (the cube diagonal).
    pub fn h(&self) -> f64 {
        3f64.sqrt() * self.cell_size()
    }

    pub fn num_vertices(&self) -> usize {
        self.n.pow(3)
    }

    pub fn num_edges(&self) -> usize {
        7 * self.n.pow(3)
    }

    pub fn num_faces(&self) -> usize {
        12 * self.n.pow(3)
    }

    pub fn num_tets(&self) -> usize {
        6 * self.n.pow(3)
    }

    /// `V − E + F − T`, zero for the 3-torus.
    pub fn euler_characteristic(&self) -> i64 {
        self.num_vertices() as i64 - self.num_edges() as i64 + self.num_faces() as i64 - self.num_tets() as i64
    }

    pub fn vertex_index(&self, c: [i64; 3]) -> usize {
        let n = self.n as i64;
        let w = c.map(|x| x.rem_euclid(n) as usize);
        w[0] + self.n * (w[1] + self.n * w[2])
    }

    pub fn vertex_coords(&self, v: usize) -> [f64; 3] {
        let n = self.n;
        let h = self.cell_size();
        [(v % n) as f64 * h, ((v / n) % n) as f64 * h, (v / (n * n)) as f64 * h]
    }

    pub(crate) fn cell_origin(&self, cell: usize) -> [i64; 3] {
        let n = self.n;
        [(cell % n) as i64, ((cell / n) % n) as i64, (cell / (n * n)) as i64]
    }

    /// Vertices of tetrahedron `t = 6·cell + p`.
    pub fn tet_vertices(&self, t: usize) -> [usize; 4] {
        let o = self.cell_origin(t / 6);
        corners(t % 6).map(|c| self.vertex_index([o[0] + c[0], o[1] + c[1], o[2] + c[2]]))
    }

    /// Edge ids of tetrahedron `t` in local edge order.
    pub fn tet_edges(&self, t: usize) -> [usize; 6] {
        let o = self.cell_origin(t / 6);
        let cs = corners(t % 6);
        LOCAL_EDGES.map(|(a, b)| {
            let start = self.vertex_index([o[0] + cs[a][0], o[1] + cs[a][1], o[2] + cs[a][2]]);
            let d = [cs[b][0] - cs[a][0], cs[b][1] - cs[a][1], cs[b][2] - cs[a][2]];
            7 * start + direction_index(d)
        })
    }

    /// Faces as sorted triples of unwrapped corner coordinates reduced to a
    /// canonical periodic translate; used to audit the face adjacency.
    pub fn tet_faces(&self, t: usize) -> [[[i64; 3]; 3]; 4] {
        let n = self.n as i64;
        let o = self.cell_origin(t / 6);
        let cs = corners(t % 6).map(|c| [o[0] + c[0], o[1] + c[1], o[2] + c[2]]);
        let face = |skip: usize| -> [[i64; 3]; 3] {
            let mut f: Vec<[i64; 3]> = (0..4).filter(|&i| i != skip).map(|i| cs[i]).collect();
            f.sort();
            let shift = f[0].map(|x| x.div_euclid(n) * n);
            let g: Vec<[i64; 3]> = f.iter().map(|c| [c[0] - shift[0], c[1] - shift[1], c[2] - shift[2]]).collect();
            [g[0], g[1], g[2]]
        };
        [face(0), face(1), face(2), face(3)]
    }

    /// Plain-text listing of vertices and tetrahedra.
    pub fn write_dump<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "# periodic mesh n={} h={:.17e}", self.n, self.h())?;
        writeln!(w, "vertices {}", self.num_vertices())?;
        for v in 0..self.num_vertices() {
            let x = self.vertex_coords(v);
            writeln!(w, "{v} {:.17e} {:.17e} {:.17e}", x[0], x[1], x[2])?;
        }
        writeln!(w, "tets {}", self.num_tets())?;
        for t in 0..self.num_tets() {
            let v = self.tet_vertices(t);
            let e = self.tet_edges(t);
            writeln!(
                w,
                "{t} {} {} {} {} | {} {} {} {} {} {}",
                v[0], v[1], v[2], v[3], e[0], e[1], e[2], e[3], e[4], e[5]
            )?;
        }
        Ok(())
    }
}
