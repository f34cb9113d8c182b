//! Bracketing root finders on a fixed scan grid.

/// Bisection for a sign change of `g` on `[a, b]`; returns the midpoint of
/// the final bracket. Exact zeros at the ends are returned as-is.
pub fn bisect(g: impl Fn(f64) -> f64, mut a: f64, mut b: f64) -> f64 {
    let mut ga = g(a);
    if ga == 0.0 {
        return a;
    }
    if g(b) == 0.0 {
        return b;
    }
    for _ in 0..200 {
        let m = 0.5 * (a + b);
        if m <= a || m >= b {
            break;
        }
        let gm = g(m);
        if gm == 0.0 {
            return m;
        }
        if (gm > 0.0) == (ga > 0.0) {
            a = m;
            ga = gm;
        } else {
            b = m;
        }
    }
    0.5 * (a + b)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Root {
    pub x: f64,
    /// `true` when `g` changes sign through the root.
    pub crossing: bool,
}

/// All roots of `g` on `[lo, hi]` found on a grid of `cells` cells:
/// sign changes (bisected), exact grid zeros, and touching roots where `|g|`
/// has a grid-local minimum, the finite-difference slope changes sign and
/// the polished value is below `touch_tol`.
pub fn scan_roots(
    g: impl Fn(f64) -> f64,
    lo: f64,
    hi: f64,
    cells: usize,
    touch_tol: f64,
) -> Vec<Root> {
    let h = (hi - lo) / cells as f64;
    let xs: Vec<f64> = (0..=cells).map(|i| lo + h * i as f64).collect();
    let gs: Vec<f64> = xs.iter().map(|&x| g(x)).collect();
    let mut out: Vec<Root> = Vec::new();
    let push = |out: &mut Vec<Root>, r: Root| {
        if let Some(last) = out.last() {
            if (r.x - last.x).abs() <= 1e-12 * (1.0 + r.x.abs()) {
                return;
            }
        }
        out.push(r);
    };
    for i in 0..=cells {
        if gs[i] == 0.0 {
            let left = if i > 0 { gs[i - 1] } else { gs[i] };
            let right = if i < cells { gs[i + 1] } else { gs[i] };
            push(
                &mut out,
                Root {
                    x: xs[i],
                    crossing: left * right < 0.0,
                },
            );
            continue;
        }
        if i < cells && gs[i + 1] != 0.0 && gs[i] * gs[i + 1] < 0.0 {
            push(
                &mut out,
                Root {
                    x: bisect(&g, xs[i], xs[i + 1]),
                    crossing: true,
                },
            );
        }
        if i > 0 && i < cells {
            let (l, m, r) = (gs[i - 1], gs[i], gs[i + 1]);
            if l * m > 0.0 && m * r > 0.0 && m.abs() <= l.abs() && m.abs() <= r.abs() {
                if let Some(x) = touching_root(&g, xs[i - 1], xs[i + 1], h, touch_tol) {
                    push(&mut out, Root { x, crossing: false });
                }
            }
        }
    }
    out.sort_by(|a, b| a.x.total_cmp(&b.x));
    out.dedup_by(|a, b| (a.x - b.x).abs() <= 1e-10 * (1.0 + a.x.abs()));
    out
}

fn touching_root(
    g: &impl Fn(f64) -> f64,
    a: f64,
    b: f64,
    h: f64,
    tol: f64,
) -> Option<f64> {
    let eps = 1e-7 * h;
    let slope = |x: f64| {
        let v = g(x);
        (g(x + eps) - g(x - eps)) * v.signum()
    };
    // |g| is decreasing then increasing across a touching root.
    let (sa, sb) = (slope(a), slope(b));
    if !(sa < 0.0 && sb > 0.0) {
        return None;
    }
    let x = bisect(slope, a, b);
    (g(x).abs() <= tol).then_some(x)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sign_changes_and_touching_roots() {
        let g = |x: f64| (x - 0.3) * (x + 0.7) * (x - 0.123_456).powi(2);
        let roots = scan_roots(g, -1.0, 1.0, 2048, 1e-12);
        assert_eq!(roots.len(), 3);
        assert!((roots[0].x + 0.7).abs() < 1e-13 && roots[0].crossing);
        assert!((roots[1].x - 0.123_456).abs() < 1e-6 && !roots[1].crossing);
        assert!((roots[2].x - 0.3).abs() < 1e-13);
    }

    #[test]
    fn grid_node_zero() {
        let roots = scan_roots(|x: f64| -x * x, -1.0, 1.0, 2048, 1e-12);
        assert_eq!(roots.len(), 1);
        assert_eq!(roots[0].x, 0.0);
        assert!(!roots[0].crossing);
    }
}
