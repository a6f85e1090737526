//! Directed 3-cycles (D3Cs) in directed networks and the 3-uniform
//! hypergraphs built from them.

use std::collections::HashMap;
use std::io::{BufRead, Write};

use petgraph::algo::tarjan_scc;
use petgraph::graph::{DiGraph, NodeIndex};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::hypergraph::UniformHypergraph;

/// Simple directed graph on dense ids `0..n`, with the external id of each
/// node kept alongside.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DirectedGraph {
    out: Vec<Vec<usize>>,
    inc: Vec<Vec<usize>>,
    ids: Vec<u64>,
}

/// Line and arc counts from reading an edge list.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct EdgeListStats {
    pub comment_lines: usize,
    pub arcs_read: usize,
    pub self_loops_dropped: usize,
    pub duplicates_dropped: usize,
}

impl DirectedGraph {
    /// Builds a graph on `0..n`, dropping self-loops and repeated arcs.
    pub fn from_arcs<I>(n: usize, arcs: I) -> Result<Self>
    where
        I: IntoIterator<Item = (usize, usize)>,
    {
        let ids = (0..n as u64).collect();
        Self::build(n, arcs, ids, &mut EdgeListStats::default())
    }

    fn build<I>(n: usize, arcs: I, ids: Vec<u64>, stats: &mut EdgeListStats) -> Result<Self>
    where
        I: IntoIterator<Item = (usize, usize)>,
    {
        let mut out = vec![Vec::new(); n];
        for (a, b) in arcs {
            if a >= n || b >= n {
                return Err(Error::InvalidParameter(format!("arc ({a}, {b}) out of range n={n}")));
            }
            if a == b {
                stats.self_loops_dropped += 1;
                continue;
            }
            out[a].push(b);
        }
        let mut inc = vec![Vec::new(); n];
        for (a, list) in out.iter_mut().enumerate() {
            let before = list.len();
            list.sort_unstable();
            list.dedup();
            stats.duplicates_dropped += before - list.len();
            for &b in list.iter() {
                inc[b].push(a);
            }
        }
        Ok(Self { out, inc, ids })
    }

    pub fn n(&self) -> usize {
        self.out.len()
    }

    pub fn num_arcs(&self) -> usize {
        self.out.iter().map(Vec::len).sum()
    }

    pub fn has_arc(&self, a: usize, b: usize) -> bool {
        self.out[a].binary_search(&b).is_ok()
    }

    pub fn out_neighbors(&self, a: usize) -> &[usize] {
        &self.out[a]
    }

    pub fn arcs(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.out.iter().enumerate().flat_map(|(a, l)| l.iter().map(move |&b| (a, b)))
    }

    /// External id of each dense node.
    pub fn ids(&self) -> &[u64] {
        &self.ids
    }

    /// Subgraph on `keep` (ascending dense ids) with only the arcs passing
    /// `arc_ok`; external ids carry over.
    fn restrict(&self, keep: &[usize], arc_ok: impl Fn(usize, usize) -> bool) -> Self {
        let mut local = vec![usize::MAX; self.n()];
        for (i, &v) in keep.iter().enumerate() {
            local[v] = i;
        }
        let arcs = self
            .arcs()
            .filter(|&(a, b)| local[a] != usize::MAX && local[b] != usize::MAX && arc_ok(a, b))
            .map(|(a, b)| (local[a], local[b]));
        let ids = keep.iter().map(|&v| self.ids[v]).collect();
        Self::build(keep.len(), arcs, ids, &mut EdgeListStats::default()).expect("restricted arcs stay in range")
    }
}

/// Reads a whitespace-separated `from to` edge list. Lines starting with `#`
/// are skipped; node ids may be any unsigned integers and are densified in
/// order of first appearance.
pub fn read_edge_list<R: BufRead>(reader: R) -> Result<(DirectedGraph, EdgeListStats)> {
    let mut stats = EdgeListStats::default();
    let mut index: HashMap<u64, usize> = HashMap::new();
    let mut ids = Vec::new();
    let mut arcs = Vec::new();
    for (lineno, line) in reader.lines().enumerate() {
        let line = line?;
        let t = line.trim();
        if t.is_empty() {
            continue;
        }
        if t.starts_with('#') {
            stats.comment_lines += 1;
            continue;
        }
        let mut fields = t.split_whitespace();
        let mut node = |f: Option<&str>| -> Result<usize> {
            let raw: u64 = f
                .ok_or_else(|| Error::Parse { line: lineno + 1, msg: "expected two node ids".into() })?
                .parse()
                .map_err(|_| Error::Parse { line: lineno + 1, msg: format!("bad node id in {t:?}") })?;
            Ok(*index.entry(raw).or_insert_with(|| {
                ids.push(raw);
                ids.len() - 1
            }))
        };
        let a = node(fields.next())?;
        let b = node(fields.next())?;
        arcs.push((a, b));
        stats.arcs_read += 1;
    }
    let n = ids.len();
    let g = DirectedGraph::build(n, arcs, ids, &mut stats)?;
    Ok((g, stats))
}

/// Each oriented cycle `a -> b -> c -> a` once, rotated so `a` is smallest.
fn oriented_cycles(g: &DirectedGraph, mut visit: impl FnMut(usize, usize, usize)) {
    for a in 0..g.n() {
        let back = &g.inc[a];
        for &b in g.out[a].iter().filter(|&&b| b > a) {
            // c in out(b) and in(a), with c > a
            let fwd = &g.out[b];
            let (mut p, mut q) = (fwd.partition_point(|&c| c <= a), back.partition_point(|&c| c <= a));
            while p < fwd.len() && q < back.len() {
                match fwd[p].cmp(&back[q]) {
                    std::cmp::Ordering::Less => p += 1,
                    std::cmp::Ordering::Greater => q += 1,
                    std::cmp::Ordering::Equal => {
                        visit(a, b, fwd[p]);
                        p += 1;
                        q += 1;
                    }
                }
            }
        }
    }
}

/// All vertex triples carrying a directed 3-cycle in at least one
/// orientation, sorted ascending, each listed once.
pub fn enumerate_d3c(g: &DirectedGraph) -> Vec<[usize; 3]> {
    let mut out = Vec::new();
    oriented_cycles(g, |a, b, c| {
        let mut t = [a, b, c];
        t.sort_unstable();
        out.push(t);
    });
    out.sort_unstable();
    out.dedup();
    out
}

/// Keeps only arcs on some D3C, then the largest strongly connected
/// component (ties go to the component holding the smaller dense id), and
/// re-enumerates the D3Cs there.
pub fn filter_network(g: &DirectedGraph) -> Result<(DirectedGraph, Vec<[usize; 3]>)> {
    let mut on_cycle: Vec<(usize, usize)> = Vec::new();
    oriented_cycles(g, |a, b, c| on_cycle.extend([(a, b), (b, c), (c, a)]));
    on_cycle.sort_unstable();
    on_cycle.dedup();
    if on_cycle.is_empty() {
        return Err(Error::Degenerate("network has no directed 3-cycles".into()));
    }
    let mut pg: DiGraph<(), ()> = DiGraph::with_capacity(g.n(), on_cycle.len());
    for _ in 0..g.n() {
        pg.add_node(());
    }
    for &(a, b) in &on_cycle {
        pg.add_edge(NodeIndex::new(a), NodeIndex::new(b), ());
    }
    let mut best: Option<Vec<usize>> = None;
    for comp in tarjan_scc(&pg) {
        let mut comp: Vec<usize> = comp.into_iter().map(|v| v.index()).collect();
        comp.sort_unstable();
        let better = match &best {
            None => true,
            Some(b) => comp.len() > b.len() || (comp.len() == b.len() && comp[0] < b[0]),
        };
        if better {
            best = Some(comp);
        }
    }
    let keep = best.expect("graph has nodes");
    let filtered = g.restrict(&keep, |a, b| on_cycle.binary_search(&(a, b)).is_ok());
    let d3cs = enumerate_d3c(&filtered);
    Ok((filtered, d3cs))
}

/// Unit-weight undirected 3-uniform hypergraph with one edge per triple.
pub fn d3c_hypergraph(g: &DirectedGraph, d3cs: &[[usize; 3]]) -> Result<UniformHypergraph> {
    UniformHypergraph::unweighted(g.n(), 3, d3cs.iter().copied())
}

/// Writes `dense,external` rows with 1-based dense ids.
pub fn write_id_map<W: Write>(mut w: W, g: &DirectedGraph) -> Result<()> {
    writeln!(w, "vertex,id")?;
    for (i, id) in g.ids().iter().enumerate() {
        writeln!(w, "{},{id}", i + 1)?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_cycle_and_feed_forward() {
        let g = DirectedGraph::from_arcs(3, [(0, 1), (1, 2), (2, 0)]).unwrap();
        assert_eq!(enumerate_d3c(&g), vec![[0, 1, 2]]);
        let g = DirectedGraph::from_arcs(3, [(0, 1), (1, 2), (0, 2)]).unwrap();
        assert!(enumerate_d3c(&g).is_empty());
    }

    #[test]
    fn both_orientations_list_once() {
        let g = DirectedGraph::from_arcs(3, [(0, 1), (1, 2), (2, 0), (1, 0), (2, 1), (0, 2)]).unwrap();
        assert_eq!(enumerate_d3c(&g), vec![[0, 1, 2]]);
        let h = d3c_hypergraph(&g, &enumerate_d3c(&g)).unwrap();
        assert_eq!(h.num_edges(), 1);
    }

    #[test]
    fn pendant_arc_is_filtered() {
        let g = DirectedGraph::from_arcs(5, [(0, 1), (1, 2), (2, 0), (2, 3), (4, 0)]).unwrap();
        let (f, d) = filter_network(&g).unwrap();
        assert_eq!(f.n(), 3);
        assert_eq!(f.num_arcs(), 3);
        assert_eq!(d, vec![[0, 1, 2]]);
        assert_eq!(f.ids(), &[0, 1, 2]);
    }

    #[test]
    fn no_cycle_is_an_error() {
        let g = DirectedGraph::from_arcs(3, [(0, 1), (1, 2)]).unwrap();
        assert!(matches!(filter_network(&g), Err(Error::Degenerate(_))));
    }

    #[test]
    fn edge_list_parsing_counts_drops() {
        let text = "# header\n10 20\n20\t30\n30 10\n10 20\n40 40\n\n";
        let (g, s) = read_edge_list(text.as_bytes()).unwrap();
        assert_eq!(g.n(), 4);
        assert_eq!(g.ids(), &[10, 20, 30, 40]);
        assert_eq!(s, EdgeListStats { comment_lines: 1, arcs_read: 5, self_loops_dropped: 1, duplicates_dropped: 1 });
        assert_eq!(enumerate_d3c(&g), vec![[0, 1, 2]]);
        assert!(read_edge_list("1 x\n".as_bytes()).is_err());
        assert!(read_edge_list("1\n".as_bytes()).is_err());
    }

    #[test]
    fn tied_components_pick_smallest_id() {
        let g = DirectedGraph::from_arcs(6, [(3, 4), (4, 5), (5, 3), (0, 1), (1, 2), (2, 0)]).unwrap();
        let (f, _) = filter_network(&g).unwrap();
        assert_eq!(f.ids(), &[0, 1, 2]);
    }
}
