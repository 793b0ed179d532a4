//! Gauss–Jordan elimination over F_p with the row-operation matrix kept,
//! so one factorisation serves many right-hand sides.

use crate::arith::mod_pow;

#[derive(Clone, Debug)]
pub struct Echelon {
    p: u32,
    /// Reduced row echelon form; rows past `rank` are zero.
    reduced: Vec<Vec<u32>>,
    pivots: Vec<usize>,
    /// Row operations: `transform · original = reduced`.
    transform: Vec<Vec<u32>>,
}

impl Echelon {
    pub fn new(p: u32, rows: Vec<Vec<u32>>) -> Self {
        let nrows = rows.len();
        let ncols = rows.first().map_or(0, Vec::len);
        let pu = p as u64;
        let mut a = rows;
        let mut e: Vec<Vec<u32>> = (0..nrows)
            .map(|i| (0..nrows).map(|j| u32::from(i == j)).collect())
            .collect();
        let mut pivots = Vec::new();
        let mut rank = 0;
        for col in 0..ncols {
            if rank == nrows {
                break;
            }
            let Some(r) = (rank..nrows).find(|&r| a[r][col] != 0) else {
                continue;
            };
            a.swap(rank, r);
            e.swap(rank, r);
            let inv = mod_pow(a[rank][col] as u64, pu - 2, pu) as u32;
            scale_row(&mut a[rank], inv, p);
            scale_row(&mut e[rank], inv, p);
            for r in 0..nrows {
                if r == rank || a[r][col] == 0 {
                    continue;
                }
                let factor = p - a[r][col];
                let (pivot_a, pivot_e) = (a[rank].clone(), e[rank].clone());
                axpy(&mut a[r], factor, &pivot_a, p);
                axpy(&mut e[r], factor, &pivot_e, p);
            }
            pivots.push(col);
            rank += 1;
        }
        Echelon {
            p,
            reduced: a,
            pivots,
            transform: e,
        }
    }

    pub fn rank(&self) -> usize {
        self.pivots.len()
    }

    /// Solves `M z = rhs` for the matrix this echelon was built from
    /// (rows are equations). Returns a particular solution with all free
    /// variables zero, or `None` if the system is inconsistent.
    pub fn solve(&self, rhs: &[u32]) -> Option<Vec<u32>> {
        let ncols = self.reduced.first().map_or(0, Vec::len);
        let transformed: Vec<u32> = self
            .transform
            .iter()
            .map(|row| dot(row, rhs, self.p))
            .collect();
        if transformed[self.rank()..].iter().any(|&v| v != 0) {
            return None;
        }
        let mut z = vec![0u32; ncols];
        for (i, &col) in self.pivots.iter().enumerate() {
            z[col] = transformed[i];
        }
        Some(z)
    }

    /// Writes `v` as a combination of the original rows, if it lies in
    /// their span. The result has one coefficient per original row.
    pub fn decompose(&self, v: &[u32]) -> Option<Vec<u32>> {
        let p = self.p;
        let mut residual = v.to_vec();
        let nrows = self.transform.len();
        let mut coeffs = vec![0u32; nrows];
        for (i, &col) in self.pivots.iter().enumerate() {
            let c = residual[col];
            if c == 0 {
                continue;
            }
            axpy(&mut residual, p - c, &self.reduced[i], p);
            axpy(&mut coeffs, c, &self.transform[i], p);
        }
        residual.iter().all(|&x| x == 0).then_some(coeffs)
    }
}

fn scale_row(row: &mut [u32], c: u32, p: u32) {
    for x in row {
        *x = ((*x as u64 * c as u64) % p as u64) as u32;
    }
}

/// `row ← row + c · other`.
fn axpy(row: &mut [u32], c: u32, other: &[u32], p: u32) {
    for (x, &y) in row.iter_mut().zip(other) {
        *x = ((*x as u64 + c as u64 * y as u64) % p as u64) as u32;
    }
}

fn dot(a: &[u32], b: &[u32], p: u32) -> u32 {
    (a.iter()
        .zip(b)
        .map(|(&x, &y)| x as u64 * y as u64)
        .sum::<u64>()
        % p as u64) as u32
}
