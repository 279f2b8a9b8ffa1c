//! Deterministic quadrature: Gauss-Legendre on intervals, Grundmann-Möller on simplices.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

/// Gauss-Legendre rule on `[-1, 1]`.
#[derive(Debug, Clone)]
pub struct GaussLegendre {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GaussLegendre {
    pub fn new(n: usize) -> Self {
        assert!(n > 0, "a Gauss-Legendre rule needs at least one node");
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        let nf = n as f64;
        for i in 0..(n + 1) / 2 {
            let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (mut p0, mut p1) = (1.0, x);
                for k in 2..=n {
                    let kf = k as f64;
                    let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
                    p0 = p1;
                    p1 = p2;
                }
                dp = nf * (x * p1 - p0) / (x * x - 1.0);
                let dx = p1 / dp;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = -x;
            nodes[n - 1 - i] = x;
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        if n % 2 == 1 {
            nodes[n / 2] = 0.0;
        }
        GaussLegendre { nodes, weights }
    }

    /// `∫_a^b f`, exact for polynomials of degree `< 2n`.
    pub fn integrate(&self, a: f64, b: f64, mut f: impl FnMut(f64) -> f64) -> f64 {
        let h = 0.5 * (b - a);
        let m = 0.5 * (a + b);
        h * self
            .nodes
            .iter()
            .zip(&self.weights)
            .map(|(x, w)| w * f(m + h * x))
            .sum::<f64>()
    }
}

/// Fully symmetric simplex rule in barycentric coordinates; weights are
/// relative to the simplex volume.
#[derive(Debug, Clone)]
pub struct SimplexRule {
    pub degree: usize,
    pub points: Vec<Vec<f64>>,
    pub weights: Vec<f64>,
}

fn compositions(total: usize, parts: usize, prefix: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
    if parts == 1 {
        prefix.push(total);
        out.push(prefix.clone());
        prefix.pop();
        return;
    }
    for k in 0..=total {
        prefix.push(k);
        compositions(total - k, parts - 1, prefix, out);
        prefix.pop();
    }
}

fn factorial(k: usize) -> f64 {
    (1..=k).map(|v| v as f64).product()
}

/// Grundmann-Möller rule of degree `2s + 1` on the `n`-simplex.
pub fn grundmann_moller(n: usize, s: usize) -> SimplexRule {
    let d = 2 * s + 1;
    let mut points = Vec::new();
    let mut weights = Vec::new();
    for i in 0..=s {
        let denom = (d + n - 2 * i) as f64;
        let sign = if i % 2 == 0 { 1.0 } else { -1.0 };
        let w = sign * 0.25f64.powi(s as i32) * denom.powi(d as i32) * factorial(n)
            / (factorial(i) * factorial(d + n - i));
        let mut comps = Vec::new();
        compositions(s - i, n + 1, &mut Vec::new(), &mut comps);
        for c in comps {
            points.push(c.iter().map(|&b| (2 * b + 1) as f64 / denom).collect());
            weights.push(w);
        }
    }
    SimplexRule {
        degree: d,
        points,
        weights,
    }
}

fn determinant(mut m: Vec<Vec<f64>>) -> f64 {
    let n = m.len();
    let mut det = 1.0;
    for c in 0..n {
        let p = (c..n)
            .max_by(|&a, &b| m[a][c].abs().total_cmp(&m[b][c].abs()))
            .unwrap_or(c);
        if m[p][c] == 0.0 {
            return 0.0;
        }
        if p != c {
            m.swap(p, c);
            det = -det;
        }
        det *= m[c][c];
        for r in c + 1..n {
            let k = m[r][c] / m[c][c];
            for j in c..n {
                m[r][j] -= k * m[c][j];
            }
        }
    }
    det
}

/// Volume of the simplex spanned by `n + 1` points in `R^n`.
pub fn simplex_volume(vertices: &[Vec<f64>]) -> f64 {
    let n = vertices.len() - 1;
    let rows = (1..=n)
        .map(|i| (0..n).map(|j| vertices[i][j] - vertices[0][j]).collect())
        .collect();
    determinant(rows).abs() / factorial(n)
}

impl SimplexRule {
    pub fn apply(&self, vertices: &[Vec<f64>], f: &impl Fn(&[f64]) -> f64) -> f64 {
        let dim = vertices[0].len();
        let mut x = vec![0.0; dim];
        let mut acc = 0.0;
        for (bary, w) in self.points.iter().zip(&self.weights) {
            x.iter_mut().for_each(|v| *v = 0.0);
            for (b, v) in bary.iter().zip(vertices) {
                for (xi, vi) in x.iter_mut().zip(v) {
                    *xi += b * vi;
                }
            }
            acc += w * f(&x);
        }
        acc * simplex_volume(vertices)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Cubature {
    pub value: f64,
    /// Sum over regions of the difference between the two embedded rule orders.
    pub error: f64,
    pub converged: bool,
    pub regions: usize,
    pub evaluations: usize,
}

struct Region {
    vertices: Vec<Vec<f64>>,
    value: f64,
    error: f64,
    /// Rule values on the two halves, reused when the region is split.
    halves: [f64; 2],
    order: usize,
}

impl PartialEq for Region {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Region {}

impl PartialOrd for Region {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Region {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error
            .total_cmp(&other.error)
            .then_with(|| other.order.cmp(&self.order))
    }
}

fn bisect(vertices: &[Vec<f64>]) -> (Vec<Vec<f64>>, Vec<Vec<f64>>) {
    let n = vertices.len() - 1;
    let (mut a, mut b, mut best) = (0, 1, -1.0);
    for i in 0..=n {
        for j in i + 1..=n {
            let d: f64 = vertices[i]
                .iter()
                .zip(&vertices[j])
                .map(|(x, y)| (x - y) * (x - y))
                .sum();
            if d > best {
                (a, b, best) = (i, j, d);
            }
        }
    }
    let mid: Vec<f64> = vertices[a]
        .iter()
        .zip(&vertices[b])
        .map(|(x, y)| 0.5 * (x + y))
        .collect();
    let mut left = vertices.to_vec();
    left[b] = mid.clone();
    let mut right = vertices.to_vec();
    right[a] = mid;
    (left, right)
}

/// Globally adaptive cubature over a simplex. Each region is estimated by
/// the degree `2s + 1` rule on its two longest-edge halves, with the
/// difference from the rule on the whole region as error estimate; the
/// worst region is split until the summed estimate falls below `tol` or
/// `max_regions` is reached.
///
/// Interior rule nodes can all miss a kink or jump that runs close to a
/// region's boundary, in which case the estimate reports agreement; the
/// domain is therefore first bisected uniformly into at least `min_regions`
/// pieces so that any such region is small.
pub fn adaptive_simplex(
    f: impl Fn(&[f64]) -> f64,
    vertices: &[Vec<f64>],
    s: usize,
    tol: f64,
    min_regions: usize,
    max_regions: usize,
) -> Cubature {
    let n = vertices.len() - 1;
    let rule = grundmann_moller(n, s);
    let mut evaluations = 0;
    let mut counter = 0;
    let mut eval = |v: Vec<Vec<f64>>, whole: f64, evaluations: &mut usize| {
        let (l, r) = bisect(&v);
        let a = rule.apply(&l, &f);
        let b = rule.apply(&r, &f);
        *evaluations += 2 * rule.points.len();
        counter += 1;
        Region {
            vertices: v,
            value: a + b,
            error: (a + b - whole).abs(),
            halves: [a, b],
            order: counter,
        }
    };
    let mut level = vec![vertices.to_vec()];
    while level.len() * 2 <= min_regions.max(1) {
        level = level
            .iter()
            .flat_map(|v| {
                let (l, r) = bisect(v);
                [l, r]
            })
            .collect();
    }
    let mut heap = BinaryHeap::new();
    for v in level {
        let whole = rule.apply(&v, &f);
        evaluations += rule.points.len();
        heap.push(eval(v, whole, &mut evaluations));
    }
    loop {
        let total_err: f64 = heap.iter().map(|r| r.error).sum();
        if total_err <= tol || heap.len() >= max_regions {
            let mut regions: Vec<&Region> = heap.iter().collect();
            regions.sort_by_key(|r| r.order);
            return Cubature {
                value: regions.iter().map(|r| r.value).sum(),
                error: total_err,
                converged: total_err <= tol,
                regions: heap.len(),
                evaluations,
            };
        }
        let worst = heap.pop().expect("heap is never empty");
        let (l, r) = bisect(&worst.vertices);
        heap.push(eval(l, worst.halves[0], &mut evaluations));
        heap.push(eval(r, worst.halves[1], &mut evaluations));
    }
}
