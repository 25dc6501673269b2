use crate::precision::Real;

/// Determinant of a square matrix by Gaussian elimination with symmetric
/// (diagonal) pivoting: at each step the largest remaining diagonal entry is
/// brought to the pivot position by a simultaneous row/column swap. This is
/// the natural pivoting for the symmetric positive-definite matrices used
/// here (moment matrices, `I - G`), and falls back to partial pivoting when
/// the diagonal vanishes.
pub fn determinant(mut m: Vec<Vec<Real>>) -> Real {
    let n = m.len();
    assert!(m.iter().all(|row| row.len() == n), "matrix must be square");
    let prec = m
        .iter()
        .flat_map(|row| row.iter().map(Real::prec))
        .max()
        .unwrap_or(64);
    let mut det = Real::one(prec);
    for k in 0..n {
        let mut pivot = k;
        for i in k + 1..n {
            if m[i][i].abs() > m[pivot][pivot].abs() {
                pivot = i;
            }
        }
        if pivot != k {
            m.swap(pivot, k);
            for row in m.iter_mut() {
                row.swap(pivot, k);
            }
        }
        if m[k][k].is_zero() {
            // Diagonal exhausted: fall back to a row swap within column k.
            match (k + 1..n).find(|&i| !m[i][k].is_zero()) {
                Some(i) => {
                    m.swap(i, k);
                    det = -det;
                }
                None => return Real::zero(prec),
            }
        }
        let pivot_value = m[k][k].clone();
        det *= &pivot_value;
        for i in k + 1..n {
            if m[i][k].is_zero() {
                continue;
            }
            let factor = &m[i][k] / &pivot_value;
            for j in k + 1..n {
                let delta = &factor * &m[k][j];
                m[i][j] -= &delta;
            }
        }
    }
    det
}
