use crate::microgen::TriMesh;

/// Square sparse matrix in compressed row form with sorted column indices.
#[derive(Clone, Debug, PartialEq)]
pub struct CsrMatrix {
    pub n: usize,
    pub row_ptr: Vec<usize>,
    pub col_idx: Vec<usize>,
    pub values: Vec<f64>,
}

impl CsrMatrix {
    /// Zero matrix with the node-adjacency pattern of `mesh`, expanded to
    /// `components` interleaved degrees of freedom per node.
    pub fn from_mesh(mesh: &TriMesh, components: usize) -> Self {
        let nn = mesh.node_count();
        let mut adj: Vec<Vec<usize>> = vec![Vec::new(); nn];
        for t in &mesh.triangles {
            for &a in t {
                adj[a].extend_from_slice(t);
            }
        }
        let n = nn * components;
        let mut row_ptr = Vec::with_capacity(n + 1);
        let mut col_idx = Vec::new();
        row_ptr.push(0);
        for nbrs in adj.iter_mut() {
            nbrs.sort_unstable();
            nbrs.dedup();
            for _ in 0..components {
                for &b in nbrs.iter() {
                    col_idx.extend((0..components).map(|c| b * components + c));
                }
                row_ptr.push(col_idx.len());
            }
        }
        let values = vec![0.0; col_idx.len()];
        CsrMatrix { n, row_ptr, col_idx, values }
    }

    /// Builds a matrix from a dense row-major array, dropping exact zeros.
    pub fn from_dense(a: &[Vec<f64>]) -> Self {
        let n = a.len();
        let mut row_ptr = vec![0];
        let mut col_idx = Vec::new();
        let mut values = Vec::new();
        for row in a {
            for (j, &v) in row.iter().enumerate() {
                if v != 0.0 {
                    col_idx.push(j);
                    values.push(v);
                }
            }
            row_ptr.push(col_idx.len());
        }
        CsrMatrix { n, row_ptr, col_idx, values }
    }

    pub fn identity(n: usize) -> Self {
        CsrMatrix { n, row_ptr: (0..=n).collect(), col_idx: (0..n).collect(), values: vec![1.0; n] }
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let r = self.row_ptr[i]..self.row_ptr[i + 1];
        self.col_idx[r.clone()].iter().copied().zip(self.values[r].iter().copied())
    }

    fn position(&self, i: usize, j: usize) -> Option<usize> {
        let lo = self.row_ptr[i];
        let cols = &self.col_idx[lo..self.row_ptr[i + 1]];
        cols.binary_search(&j).ok().map(|k| lo + k)
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.position(i, j).map_or(0.0, |k| self.values[k])
    }

    /// Adds `v` at `(i, j)`; panics if the entry is outside the pattern.
    #[inline]
    pub fn add(&mut self, i: usize, j: usize, v: f64) {
        let k = self.position(i, j).unwrap_or_else(|| panic!("entry ({i}, {j}) outside sparsity pattern"));
        self.values[k] += v;
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.get(i, i)).collect()
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.n];
        self.mul_vec_into(x, &mut y);
        y
    }

    pub fn mul_vec_into(&self, x: &[f64], y: &mut [f64]) {
        for (i, yi) in y.iter_mut().enumerate() {
            let mut s = 0.0;
            for k in self.row_ptr[i]..self.row_ptr[i + 1] {
                s += self.values[k] * x[self.col_idx[k]];
            }
            *yi = s;
        }
    }

    pub fn scale(&mut self, s: f64) {
        self.values.iter_mut().for_each(|v| *v *= s);
    }

    /// `self + s * other` for matrices sharing a sparsity pattern.
    pub fn add_scaled(&mut self, s: f64, other: &CsrMatrix) {
        assert_eq!(self.col_idx, other.col_idx, "sparsity patterns differ");
        for (a, b) in self.values.iter_mut().zip(&other.values) {
            *a += s * b;
        }
    }

    /// Largest `|a_ij - a_ji|` relative to the largest entry.
    pub fn asymmetry(&self) -> f64 {
        let scale = self.values.iter().fold(0.0f64, |m, v| m.max(v.abs())).max(f64::MIN_POSITIVE);
        let mut worst: f64 = 0.0;
        for i in 0..self.n {
            for (j, v) in self.row(i) {
                worst = worst.max((v - self.get(j, i)).abs());
            }
        }
        worst / scale
    }

    /// Half bandwidth `max |i - j|` over stored entries.
    pub fn bandwidth(&self) -> usize {
        (0..self.n)
            .flat_map(|i| self.row(i).map(move |(j, _)| i.abs_diff(j)))
            .max()
            .unwrap_or(0)
    }

    pub fn to_dense(&self) -> Vec<Vec<f64>> {
        let mut d = vec![vec![0.0; self.n]; self.n];
        for (i, row) in d.iter_mut().enumerate() {
            for (j, v) in self.row(i) {
                row[j] = v;
            }
        }
        d
    }
}

/// A matrix with its right-hand side.
#[derive(Clone, Debug, PartialEq)]
pub struct SparseSystem {
    pub matrix: CsrMatrix,
    pub rhs: Vec<f64>,
}

impl SparseSystem {
    pub fn new(matrix: CsrMatrix, rhs: Vec<f64>) -> Self {
        assert_eq!(matrix.n, rhs.len());
        SparseSystem { matrix, rhs }
    }

    pub fn dimension(&self) -> usize {
        self.matrix.n
    }
}

/// Symmetric elimination of prescribed degrees of freedom.
///
/// Columns of constrained dofs are moved to the right-hand side, their rows
/// and columns are zeroed and the diagonal set to one.
pub fn apply_dirichlet(system: &mut SparseSystem, dofs: &[usize], values: &[f64]) {
    assert_eq!(dofs.len(), values.len());
    let n = system.dimension();
    let mut prescribed = vec![None; n];
    for (&d, &v) in dofs.iter().zip(values) {
        prescribed[d] = Some(v);
    }
    let a = &mut system.matrix;
    for i in 0..n {
        let range = a.row_ptr[i]..a.row_ptr[i + 1];
        if let Some(g) = prescribed[i] {
            for k in range {
                a.values[k] = if a.col_idx[k] == i { 1.0 } else { 0.0 };
            }
            system.rhs[i] = g;
        } else {
            for k in range {
                if let Some(g) = prescribed[a.col_idx[k]] {
                    system.rhs[i] -= a.values[k] * g;
                    a.values[k] = 0.0;
                }
            }
        }
    }
}

/// Homogeneous elimination on a matrix alone; pair with [`zero_entries`] on
/// each right-hand side.
pub fn constrain_matrix(matrix: &mut CsrMatrix, dofs: &[usize]) {
    let mut fixed = vec![false; matrix.n];
    for &d in dofs {
        fixed[d] = true;
    }
    for i in 0..matrix.n {
        for k in matrix.row_ptr[i]..matrix.row_ptr[i + 1] {
            let j = matrix.col_idx[k];
            if fixed[i] {
                matrix.values[k] = if j == i { 1.0 } else { 0.0 };
            } else if fixed[j] {
                matrix.values[k] = 0.0;
            }
        }
    }
}

pub fn zero_entries(v: &mut [f64], dofs: &[usize]) {
    for &d in dofs {
        v[d] = 0.0;
    }
}
