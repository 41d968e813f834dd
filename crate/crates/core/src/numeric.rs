//! Small numeric utilities shared across the crate: order-statistic
//! quantiles, a Fenwick tree for rank counting, Gauss-Hermite quadrature,
//! and a dense symmetric solver for the Newton steps.

/// Linear-interpolation ("type 7") quantile of an ascending-sorted slice.
pub fn quantile_type7(sorted: &[f64], q: f64) -> f64 {
    debug_assert!(!sorted.is_empty());
    debug_assert!(q > 0.0 && q <= 1.0);
    let n = sorted.len();
    if n == 1 {
        return sorted[0];
    }
    let h = (n - 1) as f64 * q;
    let lo = h.floor() as usize;
    if lo + 1 >= n {
        return sorted[n - 1];
    }
    sorted[lo] + (h - lo as f64) * (sorted[lo + 1] - sorted[lo])
}

/// Fenwick (binary indexed) tree over `1..=len` counting insertions per rank.
#[derive(Debug, Clone)]
pub struct Fenwick {
    tree: Vec<u64>,
}

impl Fenwick {
    pub fn new(len: usize) -> Self {
        Fenwick {
            tree: vec![0; len + 1],
        }
    }

    /// Add one occurrence of `rank` (0-based).
    pub fn insert(&mut self, rank: usize) {
        let mut i = rank + 1;
        while i < self.tree.len() {
            self.tree[i] += 1;
            i += i & i.wrapping_neg();
        }
    }

    /// Number of inserted items with rank strictly below `rank` (0-based).
    pub fn count_below(&self, rank: usize) -> u64 {
        let mut i = rank;
        let mut sum = 0;
        while i > 0 {
            sum += self.tree[i];
            i -= i & i.wrapping_neg();
        }
        sum
    }

    /// Number of inserted items with rank `<= rank`.
    pub fn count_through(&self, rank: usize) -> u64 {
        self.count_below(rank + 1)
    }
}

/// Dense ranks (0-based) of `values` with ties sharing a rank, plus the
/// number of distinct values. NaNs are not expected by callers.
pub fn dense_ranks(values: &[f64]) -> (Vec<usize>, usize) {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let mut ranks = vec![0usize; values.len()];
    let mut rank = 0usize;
    for (pos, &idx) in order.iter().enumerate() {
        if pos > 0 && values[idx] > values[order[pos - 1]] {
            rank += 1;
        }
        ranks[idx] = rank;
    }
    (ranks, if values.is_empty() { 0 } else { rank + 1 })
}

/// Gauss-Hermite nodes and weights for `n` points: the rule integrates
/// `exp(-z^2) f(z)` exactly for polynomials up to degree `2n - 1`.
///
/// Newton iteration on the normalized Hermite recurrence; accurate to near
/// machine precision for the node counts used here (n <= 256).
pub fn gauss_hermite(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 2);
    let mut nodes = vec![0.0f64; n];
    let mut weights = vec![0.0f64; n];
    let m = n.div_ceil(2);
    let nf = n as f64;
    let mut z = 0.0f64;
    for i in 0..m {
        // asymptotic initial guesses, refined by Newton
        z = match i {
            0 => (2.0 * nf + 1.0).sqrt() - 1.85575 * (2.0 * nf + 1.0).powf(-1.0 / 6.0),
            1 => z - 1.14 * nf.powf(0.426) / z,
            2 => 1.86 * z - 0.86 * nodes[0],
            3 => 1.91 * z - 0.91 * nodes[1],
            _ => 2.0 * z - nodes[i - 2],
        };
        let mut pp = 0.0f64;
        for _ in 0..200 {
            let mut p1 = std::f64::consts::PI.powf(-0.25);
            let mut p2 = 0.0f64;
            for j in 1..=n {
                let p3 = p2;
                p2 = p1;
                let jf = j as f64;
                p1 = z * (2.0 / jf).sqrt() * p2 - ((jf - 1.0) / jf).sqrt() * p3;
            }
            pp = (2.0 * nf).sqrt() * p2;
            let dz = p1 / pp;
            z -= dz;
            if dz.abs() < 1e-15 {
                break;
            }
        }
        nodes[i] = z;
        nodes[n - 1 - i] = -z;
        weights[i] = 2.0 / (pp * pp);
        weights[n - 1 - i] = weights[i];
    }
    (nodes, weights)
}

/// Expectation of `f(X)` for `X ~ N(0, 1)` using a Gauss-Hermite rule.
pub fn normal_expectation(nodes: &[f64], weights: &[f64], mut f: impl FnMut(f64) -> f64) -> f64 {
    let scale = 1.0 / std::f64::consts::PI.sqrt();
    let mut sum = 0.0;
    for (&z, &w) in nodes.iter().zip(weights) {
        sum += w * f(std::f64::consts::SQRT_2 * z);
    }
    sum * scale
}

/// Gauss-Legendre nodes and weights on `[-1, 1]`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 2);
    let mut nodes = vec![0.0f64; n];
    let mut weights = vec![0.0f64; n];
    let m = n.div_ceil(2);
    for i in 0..m {
        let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut pp = 0.0f64;
        for _ in 0..100 {
            let mut p1 = 1.0f64;
            let mut p2 = 0.0f64;
            for j in 1..=n {
                let p3 = p2;
                p2 = p1;
                let jf = j as f64;
                p1 = ((2.0 * jf - 1.0) * z * p2 - (jf - 1.0) * p3) / jf;
            }
            pp = n as f64 * (z * p1 - p2) / (z * z - 1.0);
            let dz = p1 / pp;
            z -= dz;
            if dz.abs() < 1e-15 {
                break;
            }
        }
        nodes[i] = -z;
        nodes[n - 1 - i] = z;
        weights[i] = 2.0 / ((1.0 - z * z) * pp * pp);
        weights[n - 1 - i] = weights[i];
    }
    (nodes, weights)
}

/// Integrate `f` over `[a, b]` with a fixed Gauss-Legendre rule.
pub fn integrate_gl(nodes: &[f64], weights: &[f64], a: f64, b: f64, mut f: impl FnMut(f64) -> f64) -> f64 {
    let half = 0.5 * (b - a);
    let mid = 0.5 * (a + b);
    let mut sum = 0.0;
    for (&z, &w) in nodes.iter().zip(weights) {
        sum += w * f(mid + half * z);
    }
    sum * half
}

/// Solve `A x = b` for symmetric positive-definite `A` (row-major, `p x p`)
/// by Cholesky factorization. Falls back to a small ridge on the diagonal
/// when the factorization stalls on a semidefinite matrix.
pub fn solve_spd(a: &[f64], b: &[f64], p: usize) -> Option<Vec<f64>> {
    debug_assert_eq!(a.len(), p * p);
    debug_assert_eq!(b.len(), p);
    for ridge in [0.0, 1e-10, 1e-6] {
        if let Some(x) = try_cholesky_solve(a, b, p, ridge) {
            return Some(x);
        }
    }
    None
}

fn try_cholesky_solve(a: &[f64], b: &[f64], p: usize, ridge: f64) -> Option<Vec<f64>> {
    let scale = (0..p)
        .map(|i| a[i * p + i].abs())
        .fold(0.0f64, f64::max)
        .max(1.0);
    let mut l = a.to_vec();
    for i in 0..p {
        l[i * p + i] += ridge * scale;
    }
    for i in 0..p {
        for j in 0..=i {
            let mut sum = l[i * p + j];
            for k in 0..j {
                sum -= l[i * p + k] * l[j * p + k];
            }
            if i == j {
                if sum <= 0.0 || !sum.is_finite() {
                    return None;
                }
                l[i * p + i] = sum.sqrt();
            } else {
                l[i * p + j] = sum / l[j * p + j];
            }
        }
    }
    // forward then backward substitution
    let mut y = b.to_vec();
    for i in 0..p {
        for k in 0..i {
            y[i] -= l[i * p + k] * y[k];
        }
        y[i] /= l[i * p + i];
    }
    for i in (0..p).rev() {
        for k in (i + 1)..p {
            y[i] -= l[k * p + i] * y[k];
        }
        y[i] /= l[i * p + i];
    }
    Some(y)
}
