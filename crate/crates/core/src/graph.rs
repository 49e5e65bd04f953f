//! Weekly temporal mention graph.
//!
//! Edges are bucketed into fixed 604800-second weeks counted from the Unix
//! epoch. Each week becomes a [`Snapshot`] holding a CSR adjacency over local
//! node positions; external user ids are interned once into a [`NodeTable`]
//! in sorted order, so the result does not depend on input edge order.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ingest::MentionEdge;

pub const SECONDS_PER_WEEK: i64 = 604_800;

/// Dense index of an interned user id.
pub type NodeId = u32;

/// Weeks elapsed since the Unix epoch.
pub fn week_of(timestamp: i64) -> Result<u64> {
    if timestamp < 0 {
        return Err(Error::domain(format!("negative timestamp {timestamp}")));
    }
    Ok((timestamp / SECONDS_PER_WEEK) as u64)
}

/// Bidirectional map between external user ids and dense node indices.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct NodeTable {
    names: Vec<String>,
    index: HashMap<String, NodeId>,
}

impl NodeTable {
    /// Interns the given ids in ascending order.
    pub fn from_sorted_unique(names: Vec<String>) -> Self {
        let index = names
            .iter()
            .enumerate()
            .map(|(i, n)| (n.clone(), i as NodeId))
            .collect();
        NodeTable { names, index }
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn id(&self, name: &str) -> Option<NodeId> {
        self.index.get(name).copied()
    }

    pub fn name(&self, id: NodeId) -> &str {
        &self.names[id as usize]
    }
}

/// Compressed sparse row adjacency over local node positions `0..n`.
#[derive(Debug, Clone, PartialEq)]
pub struct Adjacency {
    row_ptr: Vec<usize>,
    cols: Vec<u32>,
    weights: Vec<f64>,
}

impl Adjacency {
    /// Builds from `(row, col, weight)` triplets. Duplicate coordinates are
    /// summed; triplets must carry positive weights.
    pub fn from_triplets(n: usize, mut triplets: Vec<(u32, u32, f64)>) -> Self {
        triplets.sort_by(|a, b| (a.0, a.1).cmp(&(b.0, b.1)).then(a.2.total_cmp(&b.2)));
        let mut row_ptr = vec![0usize; n + 1];
        let mut cols = Vec::with_capacity(triplets.len());
        let mut weights: Vec<f64> = Vec::with_capacity(triplets.len());
        let mut last: Option<(u32, u32)> = None;
        for (r, c, w) in triplets {
            debug_assert!((r as usize) < n && (c as usize) < n);
            debug_assert!(w > 0.0);
            if last == Some((r, c)) {
                *weights.last_mut().unwrap() += w;
            } else {
                cols.push(c);
                weights.push(w);
                row_ptr[r as usize + 1] += 1;
                last = Some((r, c));
            }
        }
        for i in 0..n {
            row_ptr[i + 1] += row_ptr[i];
        }
        Adjacency { row_ptr, cols, weights }
    }

    pub fn num_rows(&self) -> usize {
        self.row_ptr.len() - 1
    }

    pub fn nnz(&self) -> usize {
        self.cols.len()
    }

    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let span = self.row_ptr[i]..self.row_ptr[i + 1];
        self.cols[span.clone()]
            .iter()
            .zip(&self.weights[span])
            .map(|(&c, &w)| (c as usize, w))
    }

    /// All entries `(row, col, weight)` in row-major order.
    pub fn entries(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        (0..self.num_rows()).flat_map(move |i| self.row(i).map(move |(j, w)| (i, j, w)))
    }

    pub fn total_weight(&self) -> f64 {
        self.weights.iter().sum()
    }
}

/// One week of the mention graph.
#[derive(Debug, Clone, PartialEq)]
pub struct Snapshot {
    pub week: u64,
    nodes: Vec<NodeId>,
    adjacency: Adjacency,
}

impl Snapshot {
    /// Builds a snapshot from `(src, dst, weight)` over node ids. The node set
    /// is exactly the set of endpoints.
    pub fn from_edges(week: u64, edges: impl IntoIterator<Item = (NodeId, NodeId, f64)>) -> Result<Self> {
        let edges: Vec<_> = edges.into_iter().collect();
        let mut nodes: Vec<NodeId> = edges.iter().flat_map(|&(s, d, _)| [s, d]).collect();
        nodes.sort_unstable();
        nodes.dedup();
        Self::with_nodes(week, nodes, edges)
    }

    /// Builds a snapshot with an explicit node set, which may include
    /// isolated vertices.
    pub fn with_nodes(
        week: u64,
        mut nodes: Vec<NodeId>,
        edges: impl IntoIterator<Item = (NodeId, NodeId, f64)>,
    ) -> Result<Self> {
        nodes.sort_unstable();
        nodes.dedup();
        let local = |id: NodeId| -> Result<u32> {
            nodes
                .binary_search(&id)
                .map(|p| p as u32)
                .map_err(|_| Error::domain(format!("edge endpoint {id} is not in the node set")))
        };
        let mut triplets = Vec::new();
        for (s, d, w) in edges {
            if !(w > 0.0 && w.is_finite()) {
                return Err(Error::domain(format!("edge weight must be positive and finite, got {w}")));
            }
            triplets.push((local(s)?, local(d)?, w));
        }
        let adjacency = Adjacency::from_triplets(nodes.len(), triplets);
        Ok(Snapshot { week, nodes, adjacency })
    }

    pub fn num_nodes(&self) -> usize {
        self.nodes.len()
    }

    /// Node ids in ascending order; the position of an id is its local index.
    pub fn nodes(&self) -> &[NodeId] {
        &self.nodes
    }

    pub fn adjacency(&self) -> &Adjacency {
        &self.adjacency
    }

    pub fn local_index(&self, id: NodeId) -> Option<usize> {
        self.nodes.binary_search(&id).ok()
    }

    /// Entries as `(src id, dst id, weight)`.
    pub fn edges(&self) -> impl Iterator<Item = (NodeId, NodeId, f64)> + '_ {
        self.adjacency
            .entries()
            .map(|(i, j, w)| (self.nodes[i], self.nodes[j], w))
    }

    pub fn total_weight(&self) -> f64 {
        self.adjacency.total_weight()
    }
}

/// How [`TemporalGraph::filter_low_degree`] measures a node's activity.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DegreeCount {
    /// Summed incident weight (in + out) across all snapshots; with unit
    /// input weights this counts mention occurrences.
    #[default]
    Occurrences,
    /// Number of distinct directed arcs touching the node, deduplicated
    /// across weeks.
    DistinctArcs,
}

impl std::str::FromStr for DegreeCount {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "occurrences" => Ok(DegreeCount::Occurrences),
            "distinct-arcs" => Ok(DegreeCount::DistinctArcs),
            other => Err(Error::Config(format!("unknown degree counting mode {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct TemporalGraph {
    snapshots: Vec<Snapshot>,
    nodes: NodeTable,
}

impl TemporalGraph {
    /// Groups mention edges by week; parallel edges in a week sum into one
    /// weighted entry and empty weeks are omitted.
    pub fn build_weekly_snapshots<I>(edges: I) -> Result<Self>
    where
        I: IntoIterator<Item = MentionEdge>,
    {
        let mut rows = Vec::new();
        for e in edges {
            rows.push((e.src, e.dst, week_of(e.timestamp)?, e.weight));
        }
        Self::from_weekly_edges(rows)
    }

    /// Builds from `(src, dst, week, weight)` rows, the edge-list layout.
    pub fn from_weekly_edges(rows: Vec<(String, String, u64, f64)>) -> Result<Self> {
        for (s, d, _, w) in &rows {
            if s.is_empty() || d.is_empty() {
                return Err(Error::domain("edge endpoint id is empty"));
            }
            if !(*w > 0.0 && w.is_finite()) {
                return Err(Error::domain(format!("edge weight must be positive and finite, got {w}")));
            }
        }
        let mut names: Vec<String> = rows
            .iter()
            .flat_map(|(s, d, _, _)| [s.clone(), d.clone()])
            .collect::<HashSet<_>>()
            .into_iter()
            .collect();
        names.sort_unstable();
        let table = NodeTable::from_sorted_unique(names);

        let mut by_week: BTreeMap<u64, Vec<(NodeId, NodeId, f64)>> = BTreeMap::new();
        for (s, d, week, w) in rows {
            let s = table.id(&s).expect("interned");
            let d = table.id(&d).expect("interned");
            by_week.entry(week).or_default().push((s, d, w));
        }
        let snapshots = by_week
            .into_iter()
            .map(|(week, es)| Snapshot::from_edges(week, es))
            .collect::<Result<Vec<_>>>()?;
        Ok(TemporalGraph { snapshots, nodes: table })
    }

    pub fn snapshots(&self) -> &[Snapshot] {
        &self.snapshots
    }

    pub fn node_table(&self) -> &NodeTable {
        &self.nodes
    }

    pub fn snapshot_at(&self, week: u64) -> Option<&Snapshot> {
        self.snapshots
            .binary_search_by_key(&week, |s| s.week)
            .ok()
            .map(|i| &self.snapshots[i])
    }

    pub fn total_weight(&self) -> f64 {
        self.snapshots.iter().map(Snapshot::total_weight).sum()
    }

    /// Per-node activity across all snapshots, indexed by [`NodeId`].
    pub fn incident_totals(&self, mode: DegreeCount) -> Vec<f64> {
        let mut totals = vec![0.0; self.nodes.len()];
        match mode {
            DegreeCount::Occurrences => {
                for snap in &self.snapshots {
                    for (s, d, w) in snap.edges() {
                        totals[s as usize] += w;
                        totals[d as usize] += w;
                    }
                }
            }
            DegreeCount::DistinctArcs => {
                let arcs: HashSet<(NodeId, NodeId)> = self
                    .snapshots
                    .iter()
                    .flat_map(|s| s.edges().map(|(a, b, _)| (a, b)))
                    .collect();
                for (s, d) in arcs {
                    totals[s as usize] += 1.0;
                    if d != s {
                        totals[d as usize] += 1.0;
                    }
                }
            }
        }
        totals
    }

    /// Removes every node whose activity, measured once on this graph, is
    /// below `threshold`, along with all its incident entries. Snapshots left
    /// without edges are dropped and surviving ids are re-interned.
    pub fn filter_low_degree(&self, threshold: u64, mode: DegreeCount) -> Result<Self> {
        if threshold == 0 {
            return Err(Error::domain("degree threshold must be at least 1"));
        }
        let totals = self.incident_totals(mode);
        let keep: Vec<bool> = totals.iter().map(|&t| t >= threshold as f64).collect();
        let mut rows = Vec::new();
        for snap in &self.snapshots {
            for (s, d, w) in snap.edges() {
                if keep[s as usize] && keep[d as usize] {
                    rows.push((
                        self.nodes.name(s).to_string(),
                        self.nodes.name(d).to_string(),
                        snap.week,
                        w,
                    ));
                }
            }
        }
        Self::from_weekly_edges(rows)
    }

    /// Writes the `src,dst,week,weight` edge list with external ids.
    pub fn write_edge_list<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["src", "dst", "week", "weight"])?;
        for snap in &self.snapshots {
            for (s, d, wt) in snap.edges() {
                w.write_record([
                    self.nodes.name(s),
                    self.nodes.name(d),
                    &snap.week.to_string(),
                    &wt.to_string(),
                ])?;
            }
        }
        w.flush()?;
        Ok(())
    }

    pub fn read_edge_list<R: Read>(input: R) -> Result<Self> {
        #[derive(Deserialize)]
        struct Row {
            src: String,
            dst: String,
            week: u64,
            weight: f64,
        }
        let mut reader = csv::Reader::from_reader(input);
        let headers = reader.headers()?.clone();
        if headers.iter().collect::<Vec<_>>() != ["src", "dst", "week", "weight"] {
            return Err(Error::Config(format!(
                "edge list header must be src,dst,week,weight, found {}",
                headers.iter().collect::<Vec<_>>().join(",")
            )));
        }
        let mut rows = Vec::new();
        for (i, r) in reader.deserialize::<Row>().enumerate() {
            let r = r.map_err(|e| Error::Row { row: i + 2, reason: e.to_string() })?;
            rows.push((r.src, r.dst, r.week, r.weight));
        }
        Self::from_weekly_edges(rows)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SnapshotStats {
    pub num_nodes: usize,
    /// Distinct directed arcs, self-loops excluded.
    pub num_edges: usize,
    pub density: f64,
    pub total_weight: f64,
}

pub fn snapshot_stats(s: &Snapshot) -> SnapshotStats {
    let n = s.num_nodes();
    let num_edges = s.adjacency.entries().filter(|&(i, j, _)| i != j).count();
    let density = if n >= 2 {
        num_edges as f64 / (n as f64 * (n as f64 - 1.0))
    } else {
        0.0
    };
    SnapshotStats {
        num_nodes: n,
        num_edges,
        density,
        total_weight: s.total_weight(),
    }
}

/// Writes `week,num_nodes,num_edges,density,total_weight`, one row per snapshot.
pub fn write_stats_csv<W: Write>(out: W, graph: &TemporalGraph) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["week", "num_nodes", "num_edges", "density", "total_weight"])?;
    for snap in graph.snapshots() {
        let st = snapshot_stats(snap);
        w.write_record([
            snap.week.to_string(),
            st.num_nodes.to_string(),
            st.num_edges.to_string(),
            st.density.to_string(),
            st.total_weight.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn edge(s: &str, d: &str, t: i64) -> MentionEdge {
        MentionEdge { src: s.into(), dst: d.into(), timestamp: t, weight: 1.0 }
    }

    #[test]
    fn week_boundaries() {
        assert_eq!(week_of(0).unwrap(), 0);
        assert_eq!(week_of(604_799).unwrap(), 0);
        assert_eq!(week_of(604_800).unwrap(), 1);
        assert_eq!(week_of(1_448_841_600).unwrap(), 2395);
        assert!(week_of(-1).is_err());
    }

    #[test]
    fn build_cases() {
        let g = TemporalGraph::build_weekly_snapshots(Vec::new()).unwrap();
        assert!(g.snapshots().is_empty());

        let g = TemporalGraph::build_weekly_snapshots(vec![edge("u1", "u2", 0), edge("u1", "u2", 10)]).unwrap();
        assert_eq!(g.snapshots().len(), 1);
        let e: Vec<_> = g.snapshots()[0].edges().collect();
        assert_eq!(e, vec![(0, 1, 2.0)]);

        let g = TemporalGraph::build_weekly_snapshots(vec![edge("u1", "u2", 0), edge("u1", "u2", 604_800)]).unwrap();
        let weeks: Vec<u64> = g.snapshots().iter().map(|s| s.week).collect();
        assert_eq!(weeks, vec![0, 1]);
    }

    #[test]
    fn self_loops_are_kept() {
        let g = TemporalGraph::build_weekly_snapshots(vec![edge("a", "a", 0)]).unwrap();
        let s = &g.snapshots()[0];
        assert_eq!(s.total_weight(), 1.0);
        let st = snapshot_stats(s);
        assert_eq!((st.num_nodes, st.num_edges, st.density), (1, 0, 0.0));
    }

    #[test]
    fn density_examples() {
        let s = Snapshot::from_edges(0, [(0, 1, 1.0)]).unwrap();
        assert_eq!(snapshot_stats(&s).density, 0.5);
        let k3: Vec<_> = (0..3u32)
            .flat_map(|i| (0..3u32).filter(move |&j| j != i).map(move |j| (i, j, 1.0)))
            .collect();
        let st = snapshot_stats(&Snapshot::from_edges(0, k3).unwrap());
        assert_eq!((st.num_edges, st.density), (6, 1.0));
    }

    fn hub(hub: &str, spokes: usize, prefix: &str) -> Vec<MentionEdge> {
        (0..spokes).map(|i| edge(hub, &format!("{prefix}{i}"), i as i64 * 1000)).collect()
    }

    #[test]
    fn threshold_is_inclusive() {
        let mut edges = hub("c100", 100, "x");
        edges.extend(hub("c99", 99, "y"));
        let g = TemporalGraph::build_weekly_snapshots(edges).unwrap();
        let totals = g.incident_totals(DegreeCount::Occurrences);
        assert_eq!(totals[g.node_table().id("c100").unwrap() as usize], 100.0);
        // Leaves have total 1, so survivors keep no edges; check the degree test directly.
        let keep = |n: &str| totals[g.node_table().id(n).unwrap() as usize] >= 100.0;
        assert!(keep("c100"));
        assert!(!keep("c99"));
    }

    #[test]
    fn star_filter_is_one_pass() {
        let g = TemporalGraph::build_weekly_snapshots(hub("center", 5, "leaf")).unwrap();
        let f = g.filter_low_degree(2, DegreeCount::Occurrences).unwrap();
        assert!(f.snapshots().is_empty());
        assert!(f.node_table().is_empty());
    }

    #[test]
    fn distinct_arc_mode_ignores_repeats() {
        let edges = vec![edge("a", "b", 0), edge("a", "b", 1), edge("a", "b", 700_000), edge("b", "a", 5)];
        let g = TemporalGraph::build_weekly_snapshots(edges).unwrap();
        let occ = g.incident_totals(DegreeCount::Occurrences);
        let arcs = g.incident_totals(DegreeCount::DistinctArcs);
        assert_eq!(occ, vec![4.0, 4.0]);
        assert_eq!(arcs, vec![2.0, 2.0]);
        assert_eq!(g.filter_low_degree(3, DegreeCount::DistinctArcs).unwrap().snapshots().len(), 0);
        assert_eq!(g.filter_low_degree(3, DegreeCount::Occurrences).unwrap(), g);
        assert!(g.filter_low_degree(0, DegreeCount::Occurrences).is_err());
    }

    #[test]
    fn edge_list_round_trip() {
        let edges = vec![edge("b", "a", 0), edge("a", "c", 604_800), edge("a", "c", 604_801)];
        let g = TemporalGraph::build_weekly_snapshots(edges).unwrap();
        let mut buf = Vec::new();
        g.write_edge_list(&mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert_eq!(text, "src,dst,week,weight\nb,a,0,1\na,c,1,2\n");
        assert_eq!(TemporalGraph::read_edge_list(buf.as_slice()).unwrap(), g);
        assert!(TemporalGraph::read_edge_list("a,b\n".as_bytes()).is_err());
    }

    #[test]
    fn rejects_bad_weights() {
        assert!(Snapshot::from_edges(0, [(0, 1, 0.0)]).is_err());
        assert!(Snapshot::from_edges(0, [(0, 1, f64::NAN)]).is_err());
        assert!(Snapshot::with_nodes(0, vec![0], [(0, 1, 1.0)]).is_err());
    }

    #[test]
    fn stats_csv() {
        let g = TemporalGraph::build_weekly_snapshots(vec![edge("a", "b", 0)]).unwrap();
        let mut buf = Vec::new();
        write_stats_csv(&mut buf, &g).unwrap();
        assert_eq!(
            String::from_utf8(buf).unwrap(),
            "week,num_nodes,num_edges,density,total_weight\n0,2,1,0.5,1\n"
        );
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        fn edges() -> impl Strategy<Value = Vec<MentionEdge>> {
            prop::collection::vec((0u8..12, 0u8..12, 0i64..5 * SECONDS_PER_WEEK), 0..80).prop_map(|v| {
                v.into_iter()
                    .map(|(s, d, t)| edge(&format!("u{s}"), &format!("u{d}"), t))
                    .collect()
            })
        }

        proptest! {
            #[test]
            fn week_is_monotone(a in 0i64..i64::MAX / 2, b in 0i64..i64::MAX / 2) {
                let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
                prop_assert!(week_of(lo).unwrap() <= week_of(hi).unwrap());
            }

            #[test]
            fn build_conserves_weight_and_ignores_order(es in edges(), seed in any::<u64>()) {
                use rand::seq::SliceRandom;
                use rand::SeedableRng;
                let g = TemporalGraph::build_weekly_snapshots(es.clone()).unwrap();
                prop_assert_eq!(g.total_weight(), es.len() as f64);
                for w in g.snapshots().windows(2) {
                    prop_assert!(w[0].week < w[1].week);
                }
                let mut shuffled = es;
                shuffled.shuffle(&mut rand_chacha::ChaCha8Rng::seed_from_u64(seed));
                prop_assert_eq!(TemporalGraph::build_weekly_snapshots(shuffled).unwrap(), g);
            }

            #[test]
            fn survivors_met_threshold_in_original(es in edges(), threshold in 1u64..8) {
                let g = TemporalGraph::build_weekly_snapshots(es).unwrap();
                let totals = g.incident_totals(DegreeCount::Occurrences);
                let f = g.filter_low_degree(threshold, DegreeCount::Occurrences).unwrap();
                for snap in f.snapshots() {
                    prop_assert!(snap.total_weight() > 0.0);
                    let st = snapshot_stats(snap);
                    prop_assert!((0.0..=1.0).contains(&st.density));
                    for &id in snap.nodes() {
                        let orig = g.node_table().id(f.node_table().name(id)).unwrap();
                        prop_assert!(totals[orig as usize] >= threshold as f64);
                    }
                }
            }
        }
    }
}
