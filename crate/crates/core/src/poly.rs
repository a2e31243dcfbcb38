//! Real polynomials in increasing-power coefficient order.

pub fn eval(p: &[f64], x: f64) -> f64 {
    p.iter().rev().fold(0.0, |acc, c| acc * x + c)
}

pub fn derivative(p: &[f64]) -> Vec<f64> {
    p.iter()
        .enumerate()
        .skip(1)
        .map(|(j, c)| c * j as f64)
        .collect()
}

/// `k`-th derivative.
pub fn nth_derivative(p: &[f64], k: usize) -> Vec<f64> {
    (0..k).fold(p.to_vec(), |q, _| derivative(&q))
}

/// Drops trailing zero coefficients.
pub fn trim(p: &[f64]) -> Vec<f64> {
    let mut v = p.to_vec();
    while v.len() > 1 && *v.last().unwrap() == 0.0 {
        v.pop();
    }
    if v.is_empty() {
        v.push(0.0);
    }
    v
}

pub fn degree(p: &[f64]) -> usize {
    trim(p).len().saturating_sub(1)
}

pub fn is_zero(p: &[f64]) -> bool {
    p.iter().all(|&c| c == 0.0)
}

pub fn leading(p: &[f64]) -> f64 {
    *trim(p).last().unwrap_or(&0.0)
}

/// Sign of `p(x)` as `x -> +inf` and `x -> -inf`.
pub fn limit_signs(p: &[f64]) -> (f64, f64) {
    let q = trim(p);
    let lead = *q.last().unwrap_or(&0.0);
    let deg = q.len().saturating_sub(1);
    let plus = lead.signum();
    let minus = if deg % 2 == 0 { plus } else { -plus };
    if lead == 0.0 {
        (0.0, 0.0)
    } else {
        (plus, minus)
    }
}

/// Cauchy bound: every real root lies in `[-R, R]`.
pub fn root_bound(p: &[f64]) -> f64 {
    let q = trim(p);
    let lead = *q.last().unwrap();
    1.0 + q[..q.len() - 1]
        .iter()
        .fold(0.0f64, |m, c| m.max((c / lead).abs()))
}

/// All distinct real roots, ascending. Roots of even multiplicity are found
/// through the critical points of `p`.
pub fn real_roots(p: &[f64]) -> Vec<f64> {
    let q = trim(p);
    if q.len() <= 1 {
        return Vec::new();
    }
    if q.len() == 2 {
        return vec![-q[0] / q[1]];
    }
    let bound = root_bound(&q);
    let crit = real_roots(&derivative(&q));
    let mut knots = vec![-bound];
    knots.extend(crit.iter().copied().filter(|x| x.abs() < bound));
    knots.push(bound);
    let scale = q.iter().fold(0.0f64, |m, c| m.max(c.abs()));
    let mut roots: Vec<f64> = Vec::new();
    for w in knots.windows(2) {
        let (a, b) = (w[0], w[1]);
        let (fa, fb) = (eval(&q, a), eval(&q, b));
        if fa == 0.0 {
            push_distinct(&mut roots, a);
        }
        if fa * fb < 0.0 {
            push_distinct(&mut roots, bisect(&q, a, b));
        }
    }
    if eval(&q, bound) == 0.0 {
        push_distinct(&mut roots, bound);
    }
    // touching roots sit at critical points
    for &c in &crit {
        let tol = 1e-12 * scale * (1.0 + c.abs()).powi(degree(&q) as i32);
        if eval(&q, c).abs() <= tol {
            push_distinct(&mut roots, c);
        }
    }
    roots.sort_by(f64::total_cmp);
    roots
}

fn push_distinct(roots: &mut Vec<f64>, x: f64) {
    if roots.iter().all(|r| (r - x).abs() > 1e-9 * (1.0 + x.abs())) {
        roots.push(x);
    }
}

fn bisect(p: &[f64], mut a: f64, mut b: f64) -> f64 {
    let mut fa = eval(p, a);
    for _ in 0..200 {
        let m = 0.5 * (a + b);
        if m == a || m == b {
            break;
        }
        let fm = eval(p, m);
        if fm == 0.0 {
            return m;
        }
        if fa * fm < 0.0 {
            b = m;
        } else {
            a = m;
            fa = fm;
        }
    }
    0.5 * (a + b)
}

/// Minimum of `p` over `[lo, hi]` and where it is attained.
pub fn min_on(p: &[f64], lo: f64, hi: f64) -> (f64, f64) {
    let mut cands = vec![lo, hi];
    cands.extend(real_roots(&derivative(p)).into_iter().filter(|x| *x > lo && *x < hi));
    cands
        .into_iter()
        .map(|x| (eval(p, x), x))
        .min_by(|a, b| a.0.total_cmp(&b.0))
        .unwrap()
}

/// Global infimum over the real line, `None` when unbounded below.
pub fn global_min(p: &[f64]) -> Option<(f64, f64)> {
    let q = trim(p);
    let (plus, minus) = limit_signs(&q);
    if q.len() > 1 && (plus < 0.0 || minus < 0.0) {
        return None;
    }
    if q.len() <= 1 {
        return Some((q.first().copied().unwrap_or(0.0), 0.0));
    }
    let crit = real_roots(&derivative(&q));
    crit.into_iter()
        .map(|x| (eval(&q, x), x))
        .min_by(|a, b| a.0.total_cmp(&b.0))
        .or(Some((q[0], 0.0)))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn roots_of_cubic_and_double_root() {
        let r = real_roots(&[0.0, -1.0, 0.0, 1.0]);
        assert_eq!(r.len(), 3);
        for (a, b) in r.iter().zip([-1.0, 0.0, 1.0]) {
            assert!((a - b).abs() < 1e-12);
        }
        let r = real_roots(&[0.0, 0.0, 12.0]);
        assert_eq!(r.len(), 1);
        assert!(r[0].abs() < 1e-12);
        assert!(real_roots(&[1.0, 0.0, 1.0]).is_empty());
    }

    #[test]
    fn limits_and_minimum() {
        assert_eq!(limit_signs(&[0.0, 0.0, 1.0]), (1.0, 1.0));
        assert_eq!(limit_signs(&[0.0, 0.0, 0.0, -1.0]), (-1.0, 1.0));
        assert!(global_min(&[0.0, 1.0]).is_none());
        let (m, x) = global_min(&[1.0, -2.0, 1.0]).unwrap();
        assert!(m.abs() < 1e-14 && (x - 1.0).abs() < 1e-12);
        assert!(global_min(&[0.0, 1.0, 0.0, 1.0]).is_none());
        let (m, _) = min_on(&[0.0, -1.0, 0.0, 1.0], -2.0, 2.0);
        assert!((m + 6.0).abs() < 1e-12);
    }
}
