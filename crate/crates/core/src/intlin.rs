//! Exact integer linear algebra: gcds, determinants and integer kernels.

pub fn gcd(a: i128, b: i128) -> i128 {
    let (mut a, mut b) = (a.abs(), b.abs());
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a
}

/// Returns `(g, x, y)` with `a x + b y = g = gcd(a, b) >= 0`.
pub fn ext_gcd(a: i128, b: i128) -> (i128, i128, i128) {
    let (mut old_r, mut r) = (a, b);
    let (mut old_s, mut s) = (1i128, 0i128);
    let (mut old_t, mut t) = (0i128, 1i128);
    while r != 0 {
        let q = old_r.div_euclid(r);
        (old_r, r) = (r, old_r - q * r);
        (old_s, s) = (s, old_s - q * s);
        (old_t, t) = (t, old_t - q * t);
    }
    if old_r < 0 {
        (-old_r, -old_s, -old_t)
    } else {
        (old_r, old_s, old_t)
    }
}

/// An integer solution `x` of `Σ coeffs[i] x[i] = target`, if one exists.
pub fn solve_linear_diophantine(coeffs: &[i64], target: i64) -> Option<Vec<i64>> {
    if coeffs.is_empty() {
        return (target == 0).then(Vec::new);
    }
    // Build Bezout coefficients incrementally: g_k = Σ_{i<=k} c_i x_i.
    let mut g = coeffs[0] as i128;
    let mut x: Vec<i128> = vec![1];
    for &c in &coeffs[1..] {
        let (g2, s, t) = ext_gcd(g, c as i128);
        for xi in x.iter_mut() {
            *xi *= s;
        }
        x.push(t);
        g = g2;
    }
    if g < 0 {
        g = -g;
        for xi in x.iter_mut() {
            *xi = -*xi;
        }
    }
    let target = target as i128;
    if g == 0 {
        return (target == 0).then(|| vec![0; coeffs.len()]);
    }
    if target % g != 0 {
        return None;
    }
    let f = target / g;
    x.iter()
        .map(|&xi| i64::try_from(xi * f).ok())
        .collect::<Option<Vec<_>>>()
}

/// Determinant of a square integer matrix (fraction-free Bareiss elimination).
pub fn determinant(m: &[Vec<i64>]) -> i128 {
    let n = m.len();
    if n == 0 {
        return 1;
    }
    let mut a: Vec<Vec<i128>> = m
        .iter()
        .map(|r| {
            assert_eq!(r.len(), n, "determinant of a non-square matrix");
            r.iter().map(|&x| x as i128).collect()
        })
        .collect();
    let mut sign = 1i128;
    let mut prev = 1i128;
    for k in 0..n - 1 {
        if a[k][k] == 0 {
            match (k + 1..n).find(|&i| a[i][k] != 0) {
                Some(i) => {
                    a.swap(i, k);
                    sign = -sign;
                }
                None => return 0,
            }
        }
        for i in k + 1..n {
            for j in k + 1..n {
                a[i][j] = (a[i][j] * a[k][k] - a[i][k] * a[k][j]) / prev;
            }
        }
        prev = a[k][k];
    }
    sign * a[n - 1][n - 1]
}

/// A basis of the integer kernel `{x ∈ Z^cols : M x = 0}`.
///
/// Column-style Hermite reduction with a unimodular transform `U`; the
/// columns of `U` that map to zero columns span the kernel over `Z`.
/// Each basis vector is made primitive with its last nonzero entry positive.
pub fn integer_kernel(m: &[Vec<i64>], cols: usize) -> Vec<Vec<i64>> {
    let rows = m.len();
    let mut a: Vec<Vec<i128>> = m
        .iter()
        .map(|r| r.iter().map(|&x| x as i128).collect())
        .collect();
    let mut u: Vec<Vec<i128>> = (0..cols)
        .map(|i| (0..cols).map(|j| i128::from(i == j)).collect())
        .collect();
    // u is stored row-major; column c of U is u[*][c].
    let swap_cols = |a: &mut Vec<Vec<i128>>, u: &mut Vec<Vec<i128>>, c1: usize, c2: usize| {
        for row in a.iter_mut() {
            row.swap(c1, c2);
        }
        for row in u.iter_mut() {
            row.swap(c1, c2);
        }
    };
    let mut pivot = 0usize;
    for r in 0..rows {
        if pivot >= cols {
            break;
        }
        loop {
            // Smallest nonzero entry among the active columns of row r.
            let best = (pivot..cols)
                .filter(|&c| a[r][c] != 0)
                .min_by_key(|&c| a[r][c].abs());
            let Some(c) = best else { break };
            swap_cols(&mut a, &mut u, pivot, c);
            let mut done = true;
            for c2 in pivot + 1..cols {
                if a[r][c2] != 0 {
                    let q = a[r][c2].div_euclid(a[r][pivot]);
                    for row in a.iter_mut() {
                        row[c2] -= q * row[pivot];
                    }
                    for row in u.iter_mut() {
                        row[c2] -= q * row[pivot];
                    }
                    if a[r][c2] != 0 {
                        done = false;
                    }
                }
            }
            if done {
                break;
            }
        }
        if a[r][pivot] != 0 {
            pivot += 1;
        }
    }
    (pivot..cols)
        .map(|c| {
            let mut v: Vec<i128> = (0..cols).map(|i| u[i][c]).collect();
            let g = v.iter().fold(0i128, |acc, &x| gcd(acc, x));
            if g > 1 {
                for x in v.iter_mut() {
                    *x /= g;
                }
            }
            if let Some(&last) = v.iter().rev().find(|&&x| x != 0) {
                if last < 0 {
                    for x in v.iter_mut() {
                        *x = -*x;
                    }
                }
            }
            v.into_iter().map(|x| x as i64).collect()
        })
        .collect()
}

pub fn mat_vec(m: &[Vec<i64>], x: &[i64]) -> Vec<i128> {
    m.iter()
        .map(|r| r.iter().zip(x).map(|(&a, &b)| a as i128 * b as i128).sum())
        .collect()
}
