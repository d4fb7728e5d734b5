//! Diamond ("fishnet") lattice in its collapsed configuration.
//!
//! Nodes sit at integer pairs `(i, j)` with `i ∈ [0, m]`, `j ∈ [0, n]` and
//! `i + j` even. Each link joins `(i, j)` to `(i ± 1, j + 1)`, so the links
//! between node columns `g` and `g + 1` form one cross-section of exactly `m`
//! links, one per row band. Link ids are `gap * m + row`.

use std::collections::VecDeque;
use std::f64::consts::SQRT_2;

use serde::Serialize;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FishnetGeometry {
    /// Links per transverse cross-section.
    pub rows: usize,
    /// Number of cross-sections along the load direction.
    pub cols: usize,
    pub link_length: f64,
    pub link_area: f64,
    pub modulus: f64,
}

impl FishnetGeometry {
    /// Unit link length, area and modulus.
    pub fn new(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            link_length: 1.0,
            link_area: 1.0,
            modulus: 1.0,
        }
    }

    pub fn link_count(&self) -> usize {
        self.rows * self.cols
    }

    fn validate(&self) -> Result<()> {
        if self.rows == 0 || self.cols == 0 {
            return Err(Error::Geometry(format!(
                "rows and cols must be positive, got {}x{}",
                self.rows, self.cols
            )));
        }
        for (name, v) in [
            ("link_length", self.link_length),
            ("link_area", self.link_area),
            ("modulus", self.modulus),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::Geometry(format!("{name} must be positive, got {v}")));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Node {
    pub i: usize,
    pub j: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Link {
    /// Node on column `gap`.
    pub tail: usize,
    /// Node on column `gap + 1`.
    pub head: usize,
    /// Row band `min(i_tail, i_head)`.
    pub row: usize,
    pub gap: usize,
}

#[derive(Debug, Clone)]
pub struct FishnetMesh {
    geometry: FishnetGeometry,
    nodes: Vec<Node>,
    links: Vec<Link>,
    adjacency: Vec<Vec<usize>>,
    left: Vec<usize>,
    right: Vec<usize>,
    /// `(m + 1) * (n + 1)` grid lookup; `usize::MAX` where no node exists.
    grid: Vec<usize>,
}

/// Builds the lattice for a geometry.
pub fn build_mesh(g: FishnetGeometry) -> Result<FishnetMesh> {
    g.validate()?;
    let (m, n) = (g.rows, g.cols);
    let mut grid = vec![usize::MAX; (m + 1) * (n + 1)];
    let mut nodes = Vec::new();
    for j in 0..=n {
        for i in 0..=m {
            if (i + j) % 2 == 0 {
                grid[j * (m + 1) + i] = nodes.len();
                nodes.push(Node { i, j });
            }
        }
    }
    let at = |i: usize, j: usize| grid[j * (m + 1) + i];
    let mut links = Vec::with_capacity(m * n);
    let mut adjacency = vec![Vec::new(); nodes.len()];
    for gap in 0..n {
        for row in 0..m {
            let (ti, hi) = if (row + gap) % 2 == 0 { (row, row + 1) } else { (row + 1, row) };
            let tail = at(ti, gap);
            let head = at(hi, gap + 1);
            debug_assert!(tail != usize::MAX && head != usize::MAX);
            adjacency[tail].push(links.len());
            adjacency[head].push(links.len());
            links.push(Link { tail, head, row, gap });
        }
    }
    let left = nodes.iter().enumerate().filter(|(_, p)| p.j == 0).map(|(k, _)| k).collect();
    let right = nodes.iter().enumerate().filter(|(_, p)| p.j == n).map(|(k, _)| k).collect();
    Ok(FishnetMesh {
        geometry: g,
        nodes,
        links,
        adjacency,
        left,
        right,
        grid,
    })
}

impl FishnetMesh {
    pub fn geometry(&self) -> &FishnetGeometry {
        &self.geometry
    }

    pub fn rows(&self) -> usize {
        self.geometry.rows
    }

    pub fn cols(&self) -> usize {
        self.geometry.cols
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn links(&self) -> &[Link] {
        &self.links
    }

    pub fn link_count(&self) -> usize {
        self.links.len()
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    /// Links incident to a node.
    pub fn incident(&self, node: usize) -> &[usize] {
        &self.adjacency[node]
    }

    pub fn left_boundary(&self) -> &[usize] {
        &self.left
    }

    pub fn right_boundary(&self) -> &[usize] {
        &self.right
    }

    /// Node index at lattice position `(i, j)`, if one exists.
    pub fn node_at(&self, i: usize, j: usize) -> Option<usize> {
        if i > self.geometry.rows || j > self.geometry.cols {
            return None;
        }
        let k = self.grid[j * (self.geometry.rows + 1) + i];
        (k != usize::MAX).then_some(k)
    }

    /// Link id for a row band and gap.
    pub fn link_id(&self, row: usize, gap: usize) -> usize {
        gap * self.geometry.rows + row
    }

    /// Node position in the undeformed net, for plotting only.
    pub fn position(&self, node: usize) -> (f64, f64) {
        let p = self.nodes[node];
        let s = self.geometry.link_length / SQRT_2;
        (p.j as f64 * s, p.i as f64 * s)
    }

    /// The `m` links crossing the cut between node columns `gap` and `gap + 1`.
    pub fn cross_section_links(&self, gap: usize) -> Result<std::ops::Range<usize>> {
        if gap >= self.geometry.cols {
            return Err(Error::InvalidInput(format!(
                "gap {gap} out of range 0..{}",
                self.geometry.cols
            )));
        }
        let m = self.geometry.rows;
        Ok(gap * m..(gap + 1) * m)
    }

    /// The other endpoint of `link` as seen from `node`.
    pub fn opposite(&self, link: usize, node: usize) -> usize {
        let l = self.links[link];
        if l.tail == node {
            l.head
        } else {
            l.tail
        }
    }

    /// Whether surviving links still join the two loaded boundaries.
    ///
    /// `failed` is a per-link mask.
    pub fn is_connected(&self, failed: &[bool]) -> bool {
        let mut seen = vec![false; self.nodes.len()];
        self.is_connected_with(failed, &mut seen, &mut VecDeque::new())
    }

    /// Allocation-free variant of [`Self::is_connected`].
    pub fn is_connected_with(&self, failed: &[bool], seen: &mut [bool], queue: &mut VecDeque<usize>) -> bool {
        debug_assert_eq!(failed.len(), self.links.len());
        seen.fill(false);
        queue.clear();
        for &s in &self.left {
            seen[s] = true;
            queue.push_back(s);
        }
        let n = self.geometry.cols;
        while let Some(v) = queue.pop_front() {
            if self.nodes[v].j == n {
                return true;
            }
            for &l in &self.adjacency[v] {
                if failed[l] {
                    continue;
                }
                let w = self.opposite(l, v);
                if !seen[w] {
                    seen[w] = true;
                    queue.push_back(w);
                }
            }
        }
        false
    }

    /// Line-graph distance (links sharing a node are 1 apart) from a set of
    /// source links to every link.
    pub fn link_distances(&self, sources: &[usize]) -> Vec<usize> {
        let mut dist = vec![usize::MAX; self.links.len()];
        let mut queue = VecDeque::new();
        for &s in sources {
            dist[s] = 0;
            queue.push_back(s);
        }
        while let Some(l) = queue.pop_front() {
            let d = dist[l];
            let link = self.links[l];
            for end in [link.tail, link.head] {
                for &k in &self.adjacency[end] {
                    if dist[k] == usize::MAX {
                        dist[k] = d + 1;
                        queue.push_back(k);
                    }
                }
            }
        }
        dist
    }

    /// Nodes and links with positions, for plotting and debugging.
    pub fn to_json(&self) -> serde_json::Value {
        #[derive(Serialize)]
        struct NodeOut {
            i: usize,
            j: usize,
            x: f64,
            y: f64,
        }
        #[derive(Serialize)]
        struct LinkOut {
            id: usize,
            tail: usize,
            head: usize,
        }
        let nodes: Vec<NodeOut> = (0..self.nodes.len())
            .map(|k| {
                let (x, y) = self.position(k);
                NodeOut {
                    i: self.nodes[k].i,
                    j: self.nodes[k].j,
                    x,
                    y,
                }
            })
            .collect();
        let links: Vec<LinkOut> = self
            .links
            .iter()
            .enumerate()
            .map(|(id, l)| LinkOut {
                id,
                tail: l.tail,
                head: l.head,
            })
            .collect();
        serde_json::json!({
            "rows": self.geometry.rows,
            "cols": self.geometry.cols,
            "nodes": nodes,
            "links": links,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn mesh(m: usize, n: usize) -> FishnetMesh {
        build_mesh(FishnetGeometry::new(m, n)).unwrap()
    }

    fn degrees(me: &FishnetMesh) -> Vec<usize> {
        (0..me.node_count()).map(|k| me.incident(k).len()).collect()
    }

    #[test]
    fn chain_is_a_zigzag() {
        let me = mesh(1, 4);
        assert_eq!(me.link_count(), 4);
        assert_eq!(me.node_count(), 5);
        assert_eq!(*degrees(&me).iter().max().unwrap(), 2);
    }

    #[test]
    fn small_fishnet_enumeration() {
        let me = mesh(2, 3);
        assert_eq!(me.link_count(), 6);
        assert_eq!(me.node_count(), 6);
        let c = me.node_at(1, 1).unwrap();
        assert_eq!(me.incident(c).len(), 4);
    }

    #[test]
    fn reference_mesh_size() {
        assert_eq!(mesh(16, 32).link_count(), 512);
    }

    #[test]
    fn empty_geometry_is_rejected() {
        assert!(build_mesh(FishnetGeometry::new(0, 3)).is_err());
        assert!(build_mesh(FishnetGeometry::new(3, 0)).is_err());
    }

    #[test]
    fn degree_counts_follow_checkerboard_rule() {
        for m in 1..=8 {
            for n in 1..=8 {
                let me = mesh(m, n);
                for (k, p) in me.nodes().iter().enumerate() {
                    // one link per side per adjacent row band
                    let bands = usize::from(p.i > 0) + usize::from(p.i < m);
                    let sides = usize::from(p.j > 0) + usize::from(p.j < n);
                    assert_eq!(me.incident(k).len(), bands * sides, "{m}x{n} node {p:?}");
                }
                let expected_nodes: usize = (0..=n).map(|j| (0..=m).filter(|i| (i + j) % 2 == 0).count()).sum();
                assert_eq!(me.node_count(), expected_nodes);
            }
        }
    }

    #[test]
    fn interior_nodes_have_degree_four() {
        let me = mesh(6, 7);
        for (k, p) in me.nodes().iter().enumerate() {
            if p.i > 0 && p.i < 6 && p.j > 0 && p.j < 7 {
                assert_eq!(me.incident(k).len(), 4);
            }
            if p.i == 0 || p.i == 6 {
                assert!(me.incident(k).len() <= 2);
            }
        }
    }

    #[test]
    fn cross_sections_partition_links() {
        let me = mesh(5, 6);
        let mut seen = vec![0; me.link_count()];
        for g in 0..6 {
            let cs = me.cross_section_links(g).unwrap();
            assert_eq!(cs.len(), 5);
            for l in cs {
                assert_eq!(me.links()[l].gap, g);
                let (t, h) = (me.links()[l].tail, me.links()[l].head);
                assert_eq!(me.nodes()[t].j, g);
                assert_eq!(me.nodes()[h].j, g + 1);
                seen[l] += 1;
            }
        }
        assert!(seen.iter().all(|&c| c == 1));
        assert!(me.cross_section_links(6).is_err());
        assert_eq!(mesh(2, 3).cross_section_links(0).unwrap().len(), 2);
        assert_eq!(mesh(1, 4).cross_section_links(2).unwrap().len(), 1);
    }

    #[test]
    fn connectivity_basics() {
        for m in 1..=6 {
            for n in 1..=6 {
                let me = mesh(m, n);
                let mut failed = vec![false; me.link_count()];
                assert!(me.is_connected(&failed));
                for l in me.cross_section_links(n / 2).unwrap() {
                    failed[l] = true;
                }
                assert!(!me.is_connected(&failed));
            }
        }
        let chain = mesh(1, 4);
        for l in 0..4 {
            let mut failed = vec![false; 4];
            failed[l] = true;
            assert!(!chain.is_connected(&failed));
        }
    }

    #[test]
    fn bundle_spans_boundaries() {
        let me = mesh(4, 1);
        for l in me.links() {
            assert_eq!(me.nodes()[l.tail].j, 0);
            assert_eq!(me.nodes()[l.head].j, 1);
        }
    }

    #[test]
    fn link_distance_neighbours() {
        let me = mesh(4, 4);
        let src = me.link_id(1, 1);
        let d = me.link_distances(&[src]);
        assert_eq!(d[src], 0);
        assert_eq!(d.iter().filter(|&&x| x == 1).count(), 6);
    }

    #[test]
    fn json_export_has_all_parts() {
        let me = mesh(2, 3);
        let v = me.to_json();
        assert_eq!(v["nodes"].as_array().unwrap().len(), 6);
        assert_eq!(v["links"].as_array().unwrap().len(), 6);
    }
}
