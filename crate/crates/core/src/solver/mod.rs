//! Scalar equilibrium of the collapsed fishnet.
//!
//! In the collapsed configuration every node carries one unknown, the axial
//! displacement `u`. Link forces are `E A (u_head - u_tail) / a`, the left
//! boundary is held at `u = 0`, and the right boundary is pulled to `u = u0`.
//! Equilibrium is a graph-Laplacian Dirichlet problem on the surviving links.

mod banded;
mod cg;

use std::collections::VecDeque;

pub use banded::BandCholesky;
pub use cg::pcg;

use crate::error::{Error, Result};
use crate::mesh::FishnetMesh;
use crate::numeric::linear_fit;

const NONE: usize = usize::MAX;

/// Meshes with at least this many nodes use the iterative solver under
/// [`SolverKind::Auto`].
pub const ITERATIVE_THRESHOLD: usize = 100_000;

/// Set of failed links plus the order in which they failed.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DamageState {
    failed: Vec<bool>,
    order: Vec<usize>,
}

impl DamageState {
    pub fn new(link_count: usize) -> Self {
        Self {
            failed: vec![false; link_count],
            order: Vec::new(),
        }
    }

    pub fn from_links(link_count: usize, links: &[usize]) -> Result<Self> {
        let mut d = Self::new(link_count);
        for &l in links {
            d.fail(l)?;
        }
        Ok(d)
    }

    pub fn fail(&mut self, link: usize) -> Result<()> {
        match self.failed.get(link) {
            None => Err(Error::InvalidInput(format!("link {link} out of range"))),
            Some(true) => Err(Error::InvalidInput(format!("link {link} already failed"))),
            Some(false) => {
                self.failed[link] = true;
                self.order.push(link);
                Ok(())
            }
        }
    }

    pub fn reset(&mut self) {
        self.failed.fill(false);
        self.order.clear();
    }

    pub fn is_failed(&self, link: usize) -> bool {
        self.failed[link]
    }

    /// Per-link failure mask.
    pub fn mask(&self) -> &[bool] {
        &self.failed
    }

    /// Failed links in failure order.
    pub fn failed_links(&self) -> &[usize] {
        &self.order
    }

    /// Number of failures so far.
    pub fn step(&self) -> usize {
        self.order.len()
    }
}

/// Solution of one equilibrium problem.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct LinkStressField {
    /// Link stresses; zero for failed and unloaded links.
    pub sigma: Vec<f64>,
    /// `sigma / nominal_stress`.
    pub eta: Vec<f64>,
    /// Nodal displacements.
    pub displacement: Vec<f64>,
    /// Total reaction force transmitted between the boundaries.
    pub force: f64,
    /// `force / (m A)`.
    pub nominal_stress: f64,
}

impl LinkStressField {
    /// Sum of link forces across one cross-section.
    pub fn cross_section_force(&self, mesh: &FishnetMesh, gap: usize) -> Result<f64> {
        let area = mesh.geometry().link_area;
        Ok(mesh.cross_section_links(gap)?.map(|l| self.sigma[l] * area).sum())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SolverKind {
    /// Banded Cholesky below [`ITERATIVE_THRESHOLD`] nodes, CG above.
    #[default]
    Auto,
    Direct,
    Iterative,
}

/// Reusable solver workspace bound to one mesh.
#[derive(Debug, Clone)]
pub struct Solver<'a> {
    mesh: &'a FishnetMesh,
    iterative: bool,
    boundary_displacement: f64,
    /// Node → unknown index, `NONE` for boundary nodes.
    index: Vec<usize>,
    /// Unknown index → node.
    unknowns: Vec<usize>,
    band: BandCholesky,
    rhs: Vec<f64>,
    reached: Vec<bool>,
    queue: VecDeque<usize>,
}

impl<'a> Solver<'a> {
    pub fn new(mesh: &'a FishnetMesh) -> Self {
        Self::with_kind(mesh, SolverKind::Auto)
    }

    pub fn with_kind(mesh: &'a FishnetMesh, kind: SolverKind) -> Self {
        let (m, n) = (mesh.rows(), mesh.cols());
        let mut free: Vec<usize> = (0..mesh.node_count())
            .filter(|&k| {
                let j = mesh.nodes()[k].j;
                j > 0 && j < n
            })
            .collect();
        // order along the longer side so the band spans the shorter one
        if m > n {
            free.sort_by_key(|&k| (mesh.nodes()[k].i, mesh.nodes()[k].j));
        }
        let mut index = vec![NONE; mesh.node_count()];
        for (u, &k) in free.iter().enumerate() {
            index[k] = u;
        }
        let mut w = 0;
        for l in mesh.links() {
            let (a, b) = (index[l.tail], index[l.head]);
            if a != NONE && b != NONE {
                w = w.max(a.abs_diff(b));
            }
        }
        let iterative = match kind {
            SolverKind::Auto => mesh.node_count() >= ITERATIVE_THRESHOLD,
            SolverKind::Direct => false,
            SolverKind::Iterative => true,
        };
        let band = if iterative {
            BandCholesky::default()
        } else {
            BandCholesky::new(free.len(), w)
        };
        Self {
            mesh,
            iterative,
            boundary_displacement: 1.0,
            rhs: vec![0.0; free.len()],
            index,
            unknowns: free,
            band,
            reached: vec![false; mesh.node_count()],
            queue: VecDeque::new(),
        }
    }

    /// Sets the prescribed right-boundary displacement (default 1).
    pub fn set_boundary_displacement(&mut self, u0: f64) {
        self.boundary_displacement = u0;
    }

    pub fn mesh(&self) -> &'a FishnetMesh {
        self.mesh
    }

    /// Half-bandwidth of the direct factorization.
    pub fn bandwidth(&self) -> usize {
        self.band.bandwidth()
    }

    /// Marks nodes reachable from either boundary; returns whether the two
    /// boundaries are joined.
    fn mark_reached(&mut self, failed: &[bool]) -> bool {
        let mesh = self.mesh;
        self.reached.fill(false);
        self.queue.clear();
        for &s in mesh.left_boundary() {
            self.reached[s] = true;
            self.queue.push_back(s);
        }
        self.flood(failed);
        let connected = mesh.right_boundary().iter().any(|&r| self.reached[r]);
        if connected {
            for &s in mesh.right_boundary() {
                if !self.reached[s] {
                    self.reached[s] = true;
                    self.queue.push_back(s);
                }
            }
            self.flood(failed);
        }
        connected
    }

    fn flood(&mut self, failed: &[bool]) {
        let mesh = self.mesh;
        while let Some(v) = self.queue.pop_front() {
            for &l in mesh.incident(v) {
                if failed[l] {
                    continue;
                }
                let w = mesh.opposite(l, v);
                if !self.reached[w] {
                    self.reached[w] = true;
                    self.queue.push_back(w);
                }
            }
        }
    }

    fn boundary_value(&self, node: usize) -> f64 {
        if self.mesh.nodes()[node].j == 0 {
            0.0
        } else {
            self.boundary_displacement
        }
    }

    /// Solves for a failure mask, writing into `out`.
    ///
    /// Returns [`Error::Disconnected`] when the surviving links no longer
    /// join the boundaries.
    pub fn solve_into(&mut self, failed: &[bool], out: &mut LinkStressField) -> Result<()> {
        let mesh = self.mesh;
        if failed.len() != mesh.link_count() {
            return Err(Error::InvalidInput("failure mask length mismatch".into()));
        }
        if !self.mark_reached(failed) {
            return Err(Error::Disconnected);
        }
        let nu = self.unknowns.len();
        self.rhs.fill(0.0);
        let x = if self.iterative {
            self.solve_iterative(failed)?
        } else {
            self.assemble_direct(failed);
            self.band.factor()?;
            let mut x = std::mem::take(&mut self.rhs);
            self.band.solve_in_place(&mut x);
            let sol = x.clone();
            self.rhs = x;
            sol
        };
        debug_assert_eq!(x.len(), nu);

        out.displacement.clear();
        out.displacement.extend((0..mesh.node_count()).map(|k| {
            let u = self.index[k];
            if u == NONE {
                self.boundary_value(k)
            } else if self.reached[k] {
                x[u]
            } else {
                0.0
            }
        }));
        let g = mesh.geometry();
        let scale = g.modulus / g.link_length;
        out.sigma.clear();
        out.sigma.extend(mesh.links().iter().enumerate().map(|(id, l)| {
            if failed[id] || !self.reached[l.tail] {
                0.0
            } else {
                scale * (out.displacement[l.head] - out.displacement[l.tail])
            }
        }));
        out.force = mesh.cross_section_links(0)?.map(|l| out.sigma[l] * g.link_area).sum();
        out.nominal_stress = out.force / (mesh.rows() as f64 * g.link_area);
        let inv = 1.0 / out.nominal_stress;
        out.eta.clear();
        out.eta.extend(out.sigma.iter().map(|s| s * inv));
        Ok(())
    }

    fn assemble_direct(&mut self, failed: &[bool]) {
        let mesh = self.mesh;
        self.band.clear();
        for (id, l) in mesh.links().iter().enumerate() {
            if failed[id] || !self.reached[l.tail] {
                continue;
            }
            let (a, b) = (self.index[l.tail], self.index[l.head]);
            match (a != NONE, b != NONE) {
                (true, true) => {
                    self.band.add(a, a, 1.0);
                    self.band.add(b, b, 1.0);
                    self.band.add(a.max(b), a.min(b), -1.0);
                }
                (true, false) => {
                    self.band.add(a, a, 1.0);
                    self.rhs[a] += self.boundary_value(l.head);
                }
                (false, true) => {
                    self.band.add(b, b, 1.0);
                    self.rhs[b] += self.boundary_value(l.tail);
                }
                (false, false) => {}
            }
        }
        for (u, &k) in self.unknowns.iter().enumerate() {
            if !self.reached[k] {
                self.band.add(u, u, 1.0);
            }
        }
    }

    fn solve_iterative(&mut self, failed: &[bool]) -> Result<Vec<f64>> {
        let mesh = self.mesh;
        let nu = self.unknowns.len();
        let mut diag = vec![0.0; nu];
        for (u, &k) in self.unknowns.iter().enumerate() {
            if !self.reached[k] {
                diag[u] = 1.0;
                continue;
            }
            for &l in mesh.incident(k) {
                if failed[l] {
                    continue;
                }
                diag[u] += 1.0;
                let w = mesh.opposite(l, k);
                if self.index[w] == NONE {
                    self.rhs[u] += self.boundary_value(w);
                }
            }
        }
        let index = &self.index;
        let unknowns = &self.unknowns;
        let reached = &self.reached;
        let apply = |x: &[f64], y: &mut [f64]| {
            for (u, &k) in unknowns.iter().enumerate() {
                if !reached[k] {
                    y[u] = x[u];
                    continue;
                }
                let mut v = 0.0;
                for &l in mesh.incident(k) {
                    if failed[l] {
                        continue;
                    }
                    v += x[u];
                    let w = index[mesh.opposite(l, k)];
                    if w != NONE {
                        v -= x[w];
                    }
                }
                y[u] = v;
            }
        };
        // linear initial guess along the load direction
        let n = mesh.cols() as f64;
        let mut x: Vec<f64> = unknowns
            .iter()
            .map(|&k| {
                if reached[k] {
                    self.boundary_displacement * mesh.nodes()[k].j as f64 / n
                } else {
                    0.0
                }
            })
            .collect();
        pcg(apply, &diag, &self.rhs, &mut x, 1e-13, 20 * nu + 1000)?;
        Ok(x)
    }

    /// Allocating convenience wrapper around [`Self::solve_into`].
    pub fn solve(&mut self, failed: &[bool]) -> Result<LinkStressField> {
        let mut out = LinkStressField::default();
        self.solve_into(failed, &mut out)?;
        Ok(out)
    }
}

/// Solves the equilibrium problem for a damage state at unit end displacement.
pub fn solve(mesh: &FishnetMesh, damage: &DamageState) -> Result<LinkStressField> {
    Solver::new(mesh).solve(damage.mask())
}

/// Largest `|η − 1|` over surviving links, grouped by line-graph distance
/// from the `origin` link. Entry `k` is shell `d = k + 1`.
pub fn eta_profile(field: &LinkStressField, mesh: &FishnetMesh, damage: &DamageState, origin: usize) -> Result<Vec<(usize, f64)>> {
    if origin >= mesh.link_count() || !damage.is_failed(origin) {
        return Err(Error::Precondition(format!("origin link {origin} has not failed")));
    }
    Ok(shells(field, mesh, damage, &[origin]))
}

fn shells(field: &LinkStressField, mesh: &FishnetMesh, damage: &DamageState, sources: &[usize]) -> Vec<(usize, f64)> {
    let dist = mesh.link_distances(sources);
    let dmax = dist.iter().copied().filter(|&d| d != usize::MAX).max().unwrap_or(0);
    let mut out: Vec<(usize, f64)> = (1..=dmax).map(|d| (d, 0.0)).collect();
    for (l, &d) in dist.iter().enumerate() {
        if d == 0 || d == usize::MAX || damage.is_failed(l) {
            continue;
        }
        let dev = (field.eta[l] - 1.0).abs();
        if dev > out[d - 1].1 {
            out[d - 1].1 = dev;
        }
    }
    out
}

/// Power-law decay exponent of the stress disturbance around the damage,
/// fitted over shells 2 to 8.
pub fn far_field_decay_exponent(mesh: &FishnetMesh, damage: &DamageState) -> Result<f64> {
    if mesh.rows() < 64 || mesh.cols() < 64 {
        return Err(Error::Precondition(format!(
            "decay fit needs at least a 64x64 mesh, got {}x{}",
            mesh.rows(),
            mesh.cols()
        )));
    }
    if damage.step() == 0 {
        return Err(Error::Precondition("no damage to measure decay from".into()));
    }
    let field = solve(mesh, damage)?;
    let profile = shells(&field, mesh, damage, damage.failed_links());
    let (mut x, mut y) = (Vec::new(), Vec::new());
    for &(d, dev) in profile.iter().filter(|(d, _)| (2..=8).contains(d)) {
        if dev <= 0.0 {
            return Err(Error::Fit(format!("no disturbance at distance {d}")));
        }
        x.push((d as f64).ln());
        y.push(dev.ln());
    }
    linear_fit(&x, &y)
        .map(|(slope, _)| slope)
        .ok_or_else(|| Error::Fit("too few shells for decay fit".into()))
}
