//! Network topology and the static routing oracle standing in for a
//! routing protocol.

use std::collections::BTreeSet;

use petgraph::algo::dijkstra;
use petgraph::graph::{NodeIndex, UnGraph};

use crate::icn::{FaceId, Time};

/// Face 0 of a site node is its application face.
pub const APP_FACE: FaceId = 0;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NodeKind {
    Site(usize),
    Router,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinkSpec {
    pub a: usize,
    pub b: usize,
    /// One-way latency in µs.
    pub latency: Time,
    /// Bytes per millisecond.
    pub bandwidth: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Topology {
    pub nodes: Vec<NodeKind>,
    pub links: Vec<LinkSpec>,
}

/// A face of a node: the link it rides on and the neighbor at its far end.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Face {
    pub id: FaceId,
    pub link: usize,
    pub neighbor: usize,
}

impl Topology {
    /// `sites` site nodes (indices `0..sites`) attached to one provider
    /// router (index `sites`).
    pub fn star(sites: usize, latency: Time, bandwidth: f64) -> Self {
        let mut nodes: Vec<NodeKind> = (0..sites).map(NodeKind::Site).collect();
        nodes.push(NodeKind::Router);
        let links = (0..sites)
            .map(|i| LinkSpec {
                a: i,
                b: sites,
                latency,
                bandwidth,
            })
            .collect();
        Self { nodes, links }
    }

    pub fn site_node(&self, site: usize) -> Option<usize> {
        self.nodes.iter().position(|k| *k == NodeKind::Site(site))
    }

    pub fn site_count(&self) -> usize {
        self.nodes.iter().filter(|k| matches!(k, NodeKind::Site(_))).count()
    }

    /// Faces of `node`, numbered from 1 in link order.
    pub fn faces(&self, node: usize) -> Vec<Face> {
        self.links
            .iter()
            .enumerate()
            .filter_map(|(i, l)| {
                if l.a == node {
                    Some((i, l.b))
                } else if l.b == node {
                    Some((i, l.a))
                } else {
                    None
                }
            })
            .enumerate()
            .map(|(n, (link, neighbor))| Face {
                id: n as FaceId + 1,
                link,
                neighbor,
            })
            .collect()
    }

    fn graph(&self) -> UnGraph<(), Time> {
        let mut g = UnGraph::new_undirected();
        for _ in &self.nodes {
            g.add_node(());
        }
        for l in &self.links {
            g.add_edge(NodeIndex::new(l.a), NodeIndex::new(l.b), l.latency);
        }
        g
    }

    pub fn validate(&self) -> Result<(), String> {
        if self.links.iter().any(|l| l.latency == 0 || l.bandwidth <= 0.0) {
            return Err("links need positive latency and bandwidth".into());
        }
        if self.links.iter().any(|l| l.a >= self.nodes.len() || l.b >= self.nodes.len() || l.a == l.b) {
            return Err("link endpoint out of range".into());
        }
        if !self.nodes.is_empty() && dijkstra(&self.graph(), NodeIndex::new(0), None, |e| *e.weight()).len() != self.nodes.len() {
            return Err("topology is not connected".into());
        }
        Ok(())
    }

    /// Next hop of every node toward `dest`: `(node, face, path cost)`,
    /// lowest cost first, ties to the lowest face id. `dest` itself is not
    /// listed.
    pub fn routes_to(&self, dest: usize) -> Vec<(usize, FaceId, Time)> {
        let dist = dijkstra(&self.graph(), NodeIndex::new(dest), None, |e| *e.weight());
        let mut out = Vec::new();
        for n in 0..self.nodes.len() {
            if n == dest {
                continue;
            }
            let Some(dn) = dist.get(&NodeIndex::new(n)) else {
                continue;
            };
            let hop = self
                .faces(n)
                .into_iter()
                .filter(|f| dist.get(&NodeIndex::new(f.neighbor)).is_some_and(|dm| dm + self.links[f.link].latency == *dn))
                .map(|f| f.id)
                .min();
            if let Some(face) = hop {
                out.push((n, face, *dn));
            }
        }
        out
    }

    /// Faces `node` uses for the multicast notification prefix: next hops
    /// toward every other member site, plus the application face at members.
    pub fn multicast_faces(&self, node: usize, members: &BTreeSet<usize>) -> BTreeSet<FaceId> {
        let mut faces = BTreeSet::new();
        if members.contains(&node) {
            faces.insert(APP_FACE);
        }
        for m in members {
            if *m == node {
                continue;
            }
            if let Some((_, f, _)) = self.routes_to(*m).into_iter().find(|(n, _, _)| *n == node) {
                faces.insert(f);
            }
        }
        faces
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn star_routes() {
        let t = Topology::star(3, 1000, 12_500.0);
        t.validate().unwrap();
        assert_eq!(t.site_node(2), Some(2));
        assert_eq!(t.faces(3).len(), 3);
        assert_eq!(t.faces(0), vec![Face { id: 1, link: 0, neighbor: 3 }]);
        let r = t.routes_to(1);
        assert_eq!(r, vec![(0, 1, 2000), (2, 1, 2000), (3, 2, 1000)]);
        let members: BTreeSet<usize> = [0, 1, 2].into();
        assert_eq!(t.multicast_faces(0, &members), [0, 1].into());
        assert_eq!(t.multicast_faces(3, &members), [1, 2, 3].into());
    }

    #[test]
    fn line_prefers_cheapest_path() {
        // 0 - 2 - 1 with a slow direct link 0 - 1
        let t = Topology {
            nodes: vec![NodeKind::Site(0), NodeKind::Site(1), NodeKind::Router],
            links: vec![
                LinkSpec { a: 0, b: 2, latency: 100, bandwidth: 1.0 },
                LinkSpec { a: 2, b: 1, latency: 100, bandwidth: 1.0 },
                LinkSpec { a: 0, b: 1, latency: 500, bandwidth: 1.0 },
            ],
        };
        let r = t.routes_to(1);
        assert_eq!(r[0], (0, 1, 200));
        let bad = Topology {
            nodes: vec![NodeKind::Site(0), NodeKind::Router],
            links: vec![],
        };
        assert!(bad.validate().is_err());
    }
}
