#![allow(dead_code)]

use fishnet::mc::EventPoint;

/// Brute-force re-implementation of the deletion sequence: dense Laplacian,
/// Gaussian elimination, union-find connectivity. Unit modulus, length and
/// area are assumed.
pub struct DenseNet {
    m: usize,
    n: usize,
    nodes: Vec<(usize, usize)>,
    /// (node at column g, node at column g + 1), indexed by `g * m + band`.
    links: Vec<(usize, usize)>,
}

impl DenseNet {
    pub fn new(m: usize, n: usize) -> Self {
        let mut nodes = Vec::new();
        for i in 0..=m {
            for j in 0..=n {
                if (i + j) % 2 == 0 {
                    nodes.push((i, j));
                }
            }
        }
        let find = |i: usize, j: usize| nodes.iter().position(|&p| p == (i, j)).unwrap();
        let mut links = vec![(usize::MAX, usize::MAX); m * n];
        for (a, &(i, j)) in nodes.iter().enumerate() {
            if j == n {
                continue;
            }
            if i + 1 <= m {
                links[j * m + i] = (a, find(i + 1, j + 1));
            }
            if i >= 1 {
                links[j * m + i - 1] = (a, find(i - 1, j + 1));
            }
        }
        assert!(links.iter().all(|l| l.0 != usize::MAX));
        Self { m, n, nodes, links }
    }

    fn root(parent: &mut Vec<usize>, mut a: usize) -> usize {
        while parent[a] != a {
            parent[a] = parent[parent[a]];
            a = parent[a];
        }
        a
    }

    fn components(&self, alive: &[bool]) -> Vec<usize> {
        let mut parent: Vec<usize> = (0..self.nodes.len()).collect();
        for (l, &(a, b)) in self.links.iter().enumerate() {
            if alive[l] {
                let (ra, rb) = (Self::root(&mut parent, a), Self::root(&mut parent, b));
                parent[ra] = rb;
            }
        }
        (0..self.nodes.len()).map(|a| Self::root(&mut parent, a)).collect()
    }

    /// Link stresses at unit end displacement, or `None` when disconnected.
    fn stresses(&self, alive: &[bool]) -> Option<Vec<f64>> {
        let comp = self.components(alive);
        let left: Vec<usize> = (0..self.nodes.len()).filter(|&a| self.nodes[a].1 == 0).collect();
        let right: Vec<usize> = (0..self.nodes.len()).filter(|&a| self.nodes[a].1 == self.n).collect();
        if !left.iter().any(|&a| right.iter().any(|&b| comp[a] == comp[b])) {
            return None;
        }
        let grounded = |a: usize| left.iter().chain(&right).any(|&b| comp[a] == comp[b]);
        let k = self.nodes.len();
        let mut mat = vec![vec![0.0; k]; k];
        let mut rhs = vec![0.0; k];
        for a in 0..k {
            let j = self.nodes[a].1;
            if j == 0 || j == self.n || !grounded(a) {
                mat[a][a] = 1.0;
                rhs[a] = if j == self.n { 1.0 } else { 0.0 };
            }
        }
        for (l, &(a, b)) in self.links.iter().enumerate() {
            if !alive[l] {
                continue;
            }
            for (p, q) in [(a, b), (b, a)] {
                let j = self.nodes[p].1;
                if j != 0 && j != self.n && grounded(p) {
                    mat[p][p] += 1.0;
                    mat[p][q] -= 1.0;
                }
            }
        }
        let u = gauss(mat, rhs);
        Some(
            self.links
                .iter()
                .enumerate()
                .map(|(l, &(a, b))| if alive[l] { u[b] - u[a] } else { 0.0 })
                .collect(),
        )
    }

    /// Event curve for given strengths.
    pub fn run(&self, strengths: &[f64]) -> Vec<EventPoint> {
        let mut alive = vec![true; self.links.len()];
        let mut out = Vec::new();
        while let Some(s) = self.stresses(&alive) {
            let nominal: f64 = (0..self.m).map(|r| s[r]).sum::<f64>() / self.m as f64;
            let mut best = (f64::INFINITY, usize::MAX);
            for l in 0..s.len() {
                if alive[l] && s[l] > 0.0 && strengths[l] / s[l] < best.0 {
                    best = (strengths[l] / s[l], l);
                }
            }
            out.push(EventPoint {
                displacement: best.0,
                nominal_stress: best.0 * nominal,
            });
            alive[best.1] = false;
        }
        out
    }
}

fn gauss(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Vec<f64> {
    let n = b.len();
    for c in 0..n {
        let p = (c..n).max_by(|&x, &y| a[x][c].abs().total_cmp(&a[y][c].abs())).unwrap();
        a.swap(c, p);
        b.swap(c, p);
        for r in c + 1..n {
            let f = a[r][c] / a[c][c];
            if f != 0.0 {
                for k in c..n {
                    a[r][k] -= f * a[c][k];
                }
                b[r] -= f * b[c];
            }
        }
    }
    let mut x = vec![0.0; n];
    for r in (0..n).rev() {
        let s: f64 = (r + 1..n).map(|k| a[r][k] * x[k]).sum();
        x[r] = (b[r] - s) / a[r][r];
    }
    x
}

/// Equal-load-sharing peak of a bundle: `max_k s_(k+1) (N − k) / N`.
pub fn bundle_peak(strengths: &[f64]) -> f64 {
    let mut s = strengths.to_vec();
    s.sort_by(f64::total_cmp);
    let n = s.len() as f64;
    s.iter()
        .enumerate()
        .map(|(k, &v)| v * (n - k as f64) / n)
        .fold(f64::MIN, f64::max)
}

pub fn close(a: f64, b: f64, rel: f64) -> bool {
    (a - b).abs() <= rel * a.abs().max(b.abs())
}
