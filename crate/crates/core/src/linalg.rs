//! Small dense linear algebra: column-pivoted Householder QR for least
//! squares and a Cholesky factorization. Matrices are row-major slices.

/// Column-pivoted Householder QR of an `n x p` matrix.
#[derive(Debug, Clone)]
pub struct PivotedQr {
    n: usize,
    p: usize,
    /// R in column-major order, upper triangle significant.
    r: Vec<f64>,
    /// Householder vectors; `reflectors[k]` acts on rows `k..n`.
    reflectors: Vec<Vec<f64>>,
    /// `perm[j]` is the original column at pivoted position `j`.
    perm: Vec<usize>,
    rank: usize,
}

impl PivotedQr {
    /// Factorizes `a` and determines its numerical rank: a pivot counts when
    /// `|R_kk| > rel_tol * |R_00|`.
    pub fn new(a: &[f64], n: usize, p: usize, rel_tol: f64) -> Self {
        assert_eq!(a.len(), n * p);
        let mut cols: Vec<Vec<f64>> = (0..p).map(|j| (0..n).map(|i| a[i * p + j]).collect()).collect();
        let mut perm: Vec<usize> = (0..p).collect();
        let steps = n.min(p);
        let mut reflectors = Vec::with_capacity(steps);
        let mut diag = Vec::with_capacity(steps);

        for k in 0..steps {
            let best = (k..p)
                .max_by(|&i, &j| {
                    let ni: f64 = cols[i][k..].iter().map(|v| v * v).sum();
                    let nj: f64 = cols[j][k..].iter().map(|v| v * v).sum();
                    ni.total_cmp(&nj).then(j.cmp(&i))
                })
                .unwrap();
            cols.swap(k, best);
            perm.swap(k, best);

            let x = &cols[k][k..];
            let norm = x.iter().map(|v| v * v).sum::<f64>().sqrt();
            let mut v = x.to_vec();
            let alpha = if x[0] >= 0.0 { -norm } else { norm };
            v[0] -= alpha;
            let vv: f64 = v.iter().map(|e| e * e).sum();
            if vv > 0.0 {
                for col in cols.iter_mut().skip(k) {
                    reflect(&v, vv, &mut col[k..]);
                }
            }
            diag.push(cols[k][k]);
            reflectors.push(v);
        }

        let lead = diag.first().map_or(0.0, |v: &f64| v.abs());
        let rank = if lead == 0.0 {
            0
        } else {
            diag.iter().take_while(|v| v.abs() > rel_tol * lead).count()
        };

        let rows = steps;
        let mut r = vec![0.0; rows * p];
        for (j, col) in cols.iter().enumerate() {
            for i in 0..rows.min(j + 1) {
                r[j * rows + i] = col[i];
            }
        }

        Self {
            n,
            p,
            r,
            reflectors,
            perm,
            rank,
        }
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn is_full_column_rank(&self) -> bool {
        self.rank == self.p && self.n >= self.p
    }

    /// Least-squares solution of `A beta = b`.
    ///
    /// # Panics
    /// If the matrix is not of full column rank.
    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        assert!(self.is_full_column_rank(), "least squares on a rank-deficient design");
        assert_eq!(b.len(), self.n);
        let mut qtb = b.to_vec();
        for (k, v) in self.reflectors.iter().enumerate() {
            let vv: f64 = v.iter().map(|e| e * e).sum();
            if vv > 0.0 {
                reflect(v, vv, &mut qtb[k..]);
            }
        }
        let p = self.p;
        let rows = self.n.min(p);
        let mut z = vec![0.0; p];
        for i in (0..p).rev() {
            let mut s = qtb[i];
            for j in i + 1..p {
                s -= self.r[j * rows + i] * z[j];
            }
            z[i] = s / self.r[i * rows + i];
        }
        let mut beta = vec![0.0; p];
        for (j, &orig) in self.perm.iter().enumerate() {
            beta[orig] = z[j];
        }
        beta
    }
}

/// Applies `I - 2 v v' / (v'v)` to `x` in place.
fn reflect(v: &[f64], vv: f64, x: &mut [f64]) {
    let dot: f64 = v.iter().zip(x.iter()).map(|(a, b)| a * b).sum();
    let s = 2.0 * dot / vv;
    for (xi, vi) in x.iter_mut().zip(v) {
        *xi -= s * vi;
    }
}

/// Lower-triangular Cholesky factor `L` with `A = L L'`, or `None` when a
/// pivot falls below `rel_tol` times the corresponding diagonal entry.
pub fn cholesky(a: &[f64], d: usize, rel_tol: f64) -> Option<Vec<f64>> {
    assert_eq!(a.len(), d * d);
    let mut l = vec![0.0; d * d];
    for i in 0..d {
        for j in 0..=i {
            let s: f64 = (0..j).map(|k| l[i * d + k] * l[j * d + k]).sum();
            if i == j {
                let pivot = a[i * d + i] - s;
                if !(pivot > rel_tol * a[i * d + i].abs()) {
                    return None;
                }
                l[i * d + i] = pivot.sqrt();
            } else {
                l[i * d + j] = (a[i * d + j] - s) / l[j * d + j];
            }
        }
    }
    Some(l)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn solves_square_system_exactly() {
        let a = [2.0, 1.0, 1.0, 3.0];
        let qr = PivotedQr::new(&a, 2, 2, 1e-10);
        assert_eq!(qr.rank(), 2);
        let beta = qr.solve(&[3.0, 5.0]);
        assert!((beta[0] - 0.8).abs() < 1e-14);
        assert!((beta[1] - 1.4).abs() < 1e-14);
    }

    #[test]
    fn least_squares_line_fit() {
        // y = 1 + 2 s at s = 0..4, plus a symmetric perturbation that is
        // orthogonal to the design.
        let s = [0.0, 1.0, 2.0, 3.0, 4.0];
        let noise = [0.1, -0.2, 0.2, -0.2, 0.1];
        let a: Vec<f64> = s.iter().flat_map(|&v| [1.0, v]).collect();
        let y: Vec<f64> = s.iter().zip(noise).map(|(&v, e)| 1.0 + 2.0 * v + e).collect();
        let beta = PivotedQr::new(&a, 5, 2, 1e-10).solve(&y);
        assert!((beta[0] - 1.0).abs() < 1e-12, "{beta:?}");
        assert!((beta[1] - 2.0).abs() < 1e-12, "{beta:?}");
    }

    #[test]
    fn detects_duplicate_columns() {
        let a = [1.0, 2.0, 2.0, 1.0, 3.0, 3.0, 1.0, 5.0, 5.0, 1.0, 7.0, 7.0];
        let qr = PivotedQr::new(&a, 4, 3, 1e-10);
        assert_eq!(qr.rank(), 2);
        assert!(!qr.is_full_column_rank());
    }

    #[test]
    fn wide_matrix_is_rank_deficient() {
        let a = [1.0, 2.0, 3.0, 4.0, 5.0, 7.0];
        let qr = PivotedQr::new(&a, 2, 3, 1e-10);
        assert!(!qr.is_full_column_rank());
    }

    #[test]
    fn zero_matrix_has_rank_zero() {
        let qr = PivotedQr::new(&[0.0; 6], 3, 2, 1e-10);
        assert_eq!(qr.rank(), 0);
    }

    #[test]
    fn cholesky_reconstructs() {
        let a = [4.0, 2.0, 0.4, 2.0, 5.0, 1.0, 0.4, 1.0, 3.0];
        let l = cholesky(&a, 3, 1e-12).unwrap();
        for i in 0..3 {
            for j in 0..3 {
                let v: f64 = (0..3).map(|k| l[i * 3 + k] * l[j * 3 + k]).sum();
                assert!((v - a[i * 3 + j]).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn cholesky_rejects_singular() {
        assert!(cholesky(&[1.0, 1.0, 1.0, 1.0], 2, 1e-10).is_none());
        assert!(cholesky(&[1.0, 2.0, 2.0, 1.0], 2, 1e-10).is_none());
    }
}
