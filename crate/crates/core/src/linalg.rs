//! Small dense helpers on ambient coordinate slices.

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub(crate) fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

pub(crate) fn dist_sq(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

pub(crate) fn scaled(a: &[f64], s: f64) -> Vec<f64> {
    a.iter().map(|x| x * s).collect()
}

pub(crate) fn normalize(mut a: Vec<f64>) -> Vec<f64> {
    let n = norm(&a);
    a.iter_mut().for_each(|x| *x /= n);
    a
}

/// `acc += s * a`
pub(crate) fn axpy(acc: &mut [f64], s: f64, a: &[f64]) {
    acc.iter_mut().zip(a).for_each(|(o, x)| *o += s * x);
}

/// Great-circle distance between unit vectors, `2 atan2(|a-b|, |a+b|)`.
///
/// Equal to `acos(<a,b>)` but keeps full relative accuracy near 0 and π.
pub(crate) fn arc(a: &[f64], b: &[f64]) -> f64 {
    let mut diff = 0.0;
    let mut sum = 0.0;
    for (x, y) in a.iter().zip(b) {
        diff += (x - y) * (x - y);
        sum += (x + y) * (x + y);
    }
    2.0 * diff.sqrt().atan2(sum.sqrt())
}

/// Cosine of the great-circle distance, clamped to [-1, 1].
pub(crate) fn cos_arc(a: &[f64], b: &[f64]) -> f64 {
    // 1 - |a-b|^2/2 is exact for unit vectors and avoids the cancellation in <a,b> - 1
    (1.0 - 0.5 * dist_sq(a, b)).clamp(-1.0, 1.0)
}

/// Tangent component of `a` at `y`, i.e. `a - <a,y> y` for unit `a`, `y`.
pub(crate) fn tangent_toward(y: &[f64], a: &[f64]) -> Vec<f64> {
    let h = 0.5 * dist_sq(a, y);
    a.iter().zip(y).map(|(ai, yi)| (ai - yi) + yi * h).collect()
}

/// Projects an ambient vector onto the tangent space at `y`.
pub(crate) fn project_tangent(y: &[f64], v: &[f64]) -> Vec<f64> {
    let c = dot(v, y);
    v.iter().zip(y).map(|(vi, yi)| vi - c * yi).collect()
}

/// Exponential map: walk `|v|` along the great circle leaving `y` in direction `v`.
pub(crate) fn exp(y: &[f64], v: &[f64]) -> Vec<f64> {
    let theta = norm(v);
    if theta == 0.0 {
        return y.to_vec();
    }
    let (s, c) = theta.sin_cos();
    let k = s / theta;
    normalize(y.iter().zip(v).map(|(yi, vi)| c * yi + k * vi).collect())
}

/// Logarithm map: tangent vector at `y` pointing at `a` with length `d(y, a)`.
/// Returns the zero vector for coincident points.
pub(crate) fn log(y: &[f64], a: &[f64]) -> Vec<f64> {
    let w = tangent_toward(y, a);
    let wn = norm(&w);
    if wn == 0.0 {
        return vec![0.0; y.len()];
    }
    scaled(&w, arc(y, a) / wn)
}

/// Solves the square system `m x = rhs` by Gaussian elimination with partial pivoting.
/// Returns `None` when a pivot vanishes.
pub(crate) fn solve(mut m: Vec<Vec<f64>>, mut rhs: Vec<f64>) -> Option<Vec<f64>> {
    let n = rhs.len();
    for col in 0..n {
        let pivot = (col..n).max_by(|&i, &j| m[i][col].abs().total_cmp(&m[j][col].abs()))?;
        if m[pivot][col] == 0.0 || !m[pivot][col].is_finite() {
            return None;
        }
        m.swap(col, pivot);
        rhs.swap(col, pivot);
        for row in col + 1..n {
            let f = m[row][col] / m[col][col];
            if f != 0.0 {
                let (top, rest) = m.split_at_mut(row);
                for (a, b) in rest[0][col..n].iter_mut().zip(&top[col][col..n]) {
                    *a -= f * b;
                }
                rhs[row] -= f * rhs[col];
            }
        }
    }
    let mut x = vec![0.0; n];
    for row in (0..n).rev() {
        let tail: f64 = (row + 1..n).map(|k| m[row][k] * x[k]).sum();
        x[row] = (rhs[row] - tail) / m[row][row];
    }
    Some(x)
}
