//! Modularity and two-phase Louvain community detection on single snapshots.
//!
//! Directed snapshots are symmetrized (`A + Aᵀ`) before scoring, so a node's
//! degree is its in + out weight and `2m` is twice the snapshot's total
//! weight. A self-loop of weight `w` contributes `2w` to the diagonal.
//!
//! Partition indices are local node positions of the snapshot (see
//! [`Snapshot::nodes`]).

use std::io::Write;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::graph::{NodeId, NodeTable, Snapshot, TemporalGraph};

/// Smallest modularity gain accepted as an improvement.
pub const MIN_GAIN: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct Partition {
    assignment: Vec<usize>,
    num_communities: usize,
    modularity: f64,
}

impl Partition {
    /// Relabels `labels` to contiguous ids in order of first appearance and
    /// scores the result on `s`.
    pub fn evaluate(s: &Snapshot, labels: &[usize]) -> Result<Self> {
        let (assignment, num_communities) = relabel(labels);
        let modularity = modularity(s, &assignment)?;
        Ok(Partition { assignment, num_communities, modularity })
    }

    pub fn singleton(s: &Snapshot) -> Result<Self> {
        Self::evaluate(s, &(0..s.num_nodes()).collect::<Vec<_>>())
    }

    /// Community id per local node index.
    pub fn assignment(&self) -> &[usize] {
        &self.assignment
    }

    pub fn num_communities(&self) -> usize {
        self.num_communities
    }

    pub fn modularity(&self) -> f64 {
        self.modularity
    }

    /// Members of each community, in ascending node order.
    pub fn communities(&self) -> Vec<Vec<usize>> {
        let mut out = vec![Vec::new(); self.num_communities];
        for (node, &c) in self.assignment.iter().enumerate() {
            out[c].push(node);
        }
        out
    }
}

fn relabel(labels: &[usize]) -> (Vec<usize>, usize) {
    let mut map = std::collections::HashMap::new();
    let assignment = labels
        .iter()
        .map(|l| {
            let next = map.len();
            *map.entry(*l).or_insert(next)
        })
        .collect();
    (assignment, map.len())
}

/// Undirected view of a snapshot: symmetrized neighbor weights with the
/// diagonal kept apart.
#[derive(Debug, Clone)]
struct UndirectedGraph {
    neighbors: Vec<Vec<(usize, f64)>>,
    /// `A_sym[i][i]`, i.e. twice the self-loop weight.
    self_loops: Vec<f64>,
    degree: Vec<f64>,
    two_m: f64,
}

impl UndirectedGraph {
    fn from_snapshot(s: &Snapshot) -> Self {
        let n = s.num_nodes();
        let mut half: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n];
        let mut self_loops = vec![0.0; n];
        for (i, j, w) in s.adjacency().entries() {
            if i == j {
                self_loops[i] += 2.0 * w;
            } else {
                half[i].push((j, w));
                half[j].push((i, w));
            }
        }
        let neighbors: Vec<Vec<(usize, f64)>> = half
            .into_iter()
            .map(|mut row| {
                row.sort_by_key(|&(j, _)| j);
                let mut merged: Vec<(usize, f64)> = Vec::with_capacity(row.len());
                for (j, w) in row {
                    match merged.last_mut() {
                        Some((lj, lw)) if *lj == j => *lw += w,
                        _ => merged.push((j, w)),
                    }
                }
                merged
            })
            .collect();
        let degree: Vec<f64> = neighbors
            .iter()
            .zip(&self_loops)
            .map(|(row, sl)| row.iter().map(|&(_, w)| w).sum::<f64>() + sl)
            .collect();
        let two_m = degree.iter().sum();
        UndirectedGraph { neighbors, self_loops, degree, two_m }
    }
}

/// Modularity of `assignment` on `s`. Labels need not be contiguous; two
/// nodes share a community iff their labels are equal.
pub fn modularity(s: &Snapshot, assignment: &[usize]) -> Result<f64> {
    if assignment.len() != s.num_nodes() {
        return Err(Error::domain(format!(
            "partition covers {} nodes, snapshot has {}",
            assignment.len(),
            s.num_nodes()
        )));
    }
    let g = UndirectedGraph::from_snapshot(s);
    if g.two_m <= 0.0 {
        return Err(Error::UndefinedModularity);
    }
    Ok(modularity_of(&g, assignment))
}

fn modularity_of(g: &UndirectedGraph, assignment: &[usize]) -> f64 {
    let k = assignment.iter().max().map_or(0, |m| m + 1);
    let mut internal = vec![0.0; k];
    let mut total = vec![0.0; k];
    for (i, &c) in assignment.iter().enumerate() {
        total[c] += g.degree[i];
        internal[c] += g.self_loops[i];
        for &(j, w) in &g.neighbors[i] {
            if assignment[j] == c {
                internal[c] += w;
            }
        }
    }
    internal
        .iter()
        .zip(&total)
        .map(|(inn, tot)| inn - tot * tot / g.two_m)
        .sum::<f64>()
        / g.two_m
}

/// A node move accepted by the local-move phase.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AcceptedMove {
    pub node: usize,
    pub from: usize,
    pub to: usize,
    /// Modularity gain computed incrementally from community totals.
    pub delta_q: f64,
}

/// Phase one of Louvain: sweep nodes in `order`, moving each to the
/// neighboring community with the largest strictly positive gain, until a
/// full sweep moves nothing.
pub fn louvain_local_move(s: &Snapshot, p: &Partition, order: &[usize]) -> Result<(Partition, bool)> {
    let (labels, improved) = local_move_traced(s, p, order, |_| {})?;
    Ok((Partition::evaluate(s, &labels)?, improved))
}

/// Same as [`louvain_local_move`] but reports every accepted move and
/// returns the raw (not relabeled) community labels.
pub fn local_move_traced(
    s: &Snapshot,
    p: &Partition,
    order: &[usize],
    on_move: impl FnMut(AcceptedMove),
) -> Result<(Vec<usize>, bool)> {
    let n = s.num_nodes();
    if p.assignment.len() != n {
        return Err(Error::domain("partition does not cover the snapshot"));
    }
    let mut seen = vec![false; n];
    if order.len() != n || !order.iter().all(|&i| i < n && !std::mem::replace(&mut seen[i], true)) {
        return Err(Error::domain("sweep order must be a permutation of the snapshot's nodes"));
    }
    let g = UndirectedGraph::from_snapshot(s);
    if g.two_m <= 0.0 {
        return Err(Error::UndefinedModularity);
    }
    let mut labels = p.assignment.clone();
    let improved = sweep(&g, &mut labels, order, on_move);
    Ok((labels, improved))
}

fn sweep(g: &UndirectedGraph, comm: &mut [usize], order: &[usize], mut on_move: impl FnMut(AcceptedMove)) -> bool {
    let n = comm.len();
    let slots = comm.iter().max().map_or(0, |m| m + 1).max(n);
    let mut tot = vec![0.0; slots];
    for (i, &c) in comm.iter().enumerate() {
        tot[c] += g.degree[i];
    }
    let m = g.two_m / 2.0;
    let mut link = vec![0.0; slots];
    let mut touched: Vec<usize> = Vec::new();
    let mut improved = false;

    loop {
        let mut moved = false;
        for &i in order {
            let own = comm[i];
            let ki = g.degree[i];
            for &(j, w) in &g.neighbors[i] {
                let c = comm[j];
                if link[c] == 0.0 {
                    touched.push(c);
                }
                link[c] += w;
            }
            tot[own] -= ki;
            let gain = |c: usize, link: &[f64], tot: &[f64]| link[c] - ki * tot[c] / g.two_m;
            let stay = gain(own, &link, &tot);

            touched.sort_unstable();
            let mut best = own;
            let mut best_gain = f64::NEG_INFINITY;
            for &c in &touched {
                if c == own {
                    continue;
                }
                let gc = gain(c, &link, &tot);
                if gc > best_gain {
                    best = c;
                    best_gain = gc;
                }
            }
            let delta_q = (best_gain - stay) / m;
            let target = if best != own && delta_q > MIN_GAIN { best } else { own };
            tot[target] += ki;
            if target != own {
                comm[i] = target;
                moved = true;
                on_move(AcceptedMove { node: i, from: own, to: target, delta_q });
            }
            for &c in &touched {
                link[c] = 0.0;
            }
            touched.clear();
        }
        if !moved {
            break;
        }
        improved = true;
    }
    improved
}

/// Phase two of Louvain: one node per community, entries summed between
/// communities, intra-community weight kept as self-loops.
pub fn aggregate(s: &Snapshot, p: &Partition) -> Result<Snapshot> {
    if p.assignment.len() != s.num_nodes() {
        return Err(Error::domain("partition does not cover the snapshot"));
    }
    let nodes: Vec<NodeId> = (0..p.num_communities as NodeId).collect();
    let edges = s
        .adjacency()
        .entries()
        .map(|(i, j, w)| (p.assignment[i] as NodeId, p.assignment[j] as NodeId, w));
    Snapshot::with_nodes(s.week, nodes, edges)
}

#[derive(Debug, Clone, PartialEq)]
pub struct LouvainResult {
    /// Partition of the input snapshot's nodes after the last level.
    pub final_partition: Partition,
    /// One partition of the input nodes per aggregation level, finest first.
    pub levels: Vec<Partition>,
    /// Number of local-move phases run, including the final one that found
    /// no improvement.
    pub passes: usize,
}

pub fn louvain(s: &Snapshot, seed: u64) -> Result<LouvainResult> {
    if s.num_nodes() == 0 || s.adjacency().nnz() == 0 {
        return Err(Error::EmptyGraph);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut level_graph = s.clone();
    let mut membership: Vec<usize> = (0..s.num_nodes()).collect();
    let mut levels = Vec::new();
    let mut passes = 0;

    loop {
        let n = level_graph.num_nodes();
        let mut order: Vec<usize> = (0..n).collect();
        order.shuffle(&mut rng);
        let start = Partition::singleton(&level_graph)?;
        let (labels, improved) = local_move_traced(&level_graph, &start, &order, |_| {})?;
        passes += 1;
        if !improved {
            break;
        }
        let level = Partition::evaluate(&level_graph, &labels)?;
        for c in membership.iter_mut() {
            *c = level.assignment[*c];
        }
        levels.push(Partition::evaluate(s, &membership)?);
        level_graph = aggregate(&level_graph, &level)?;
    }

    if levels.is_empty() {
        levels.push(Partition::singleton(s)?);
    }
    let final_partition = levels.last().cloned().expect("at least one level");
    Ok(LouvainResult { final_partition, levels, passes })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SeriesRow {
    pub week: u64,
    pub num_communities: usize,
    pub modularity: f64,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct CommunitySeries {
    pub rows: Vec<SeriesRow>,
    /// Weeks skipped because their snapshot has no edge weight.
    pub gaps: Vec<u64>,
}

/// Runs Louvain on every snapshot in parallel with the same seed.
pub fn community_count_series(g: &TemporalGraph, seed: u64) -> Result<CommunitySeries> {
    let results: Vec<(u64, Option<LouvainResult>)> = g
        .snapshots()
        .par_iter()
        .map(|s| {
            if s.total_weight() > 0.0 {
                louvain(s, seed).map(|r| (s.week, Some(r)))
            } else {
                Ok((s.week, None))
            }
        })
        .collect::<Result<_>>()?;
    let mut series = CommunitySeries::default();
    for (week, r) in results {
        match r {
            Some(r) => series.rows.push(SeriesRow {
                week,
                num_communities: r.final_partition.num_communities,
                modularity: r.final_partition.modularity,
            }),
            None => series.gaps.push(week),
        }
    }
    Ok(series)
}

/// Spread of Louvain outcomes across several seeds for one week.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SeedSpread {
    pub week: u64,
    pub runs: usize,
    pub min_communities: usize,
    pub max_communities: usize,
    pub mean_communities: f64,
    pub min_modularity: f64,
    pub max_modularity: f64,
    pub mean_modularity: f64,
}

pub fn seed_spread(g: &TemporalGraph, seeds: &[u64]) -> Result<Vec<SeedSpread>> {
    if seeds.is_empty() {
        return Err(Error::domain("at least one seed is required"));
    }
    let per_seed = seeds
        .iter()
        .map(|&seed| community_count_series(g, seed))
        .collect::<Result<Vec<_>>>()?;
    let weeks = per_seed[0].rows.len();
    let out = (0..weeks)
        .map(|i| {
            let rows: Vec<&SeriesRow> = per_seed.iter().map(|s| &s.rows[i]).collect();
            let counts = rows.iter().map(|r| r.num_communities);
            let qs = rows.iter().map(|r| r.modularity);
            let runs = rows.len();
            SeedSpread {
                week: rows[0].week,
                runs,
                min_communities: counts.clone().min().unwrap(),
                max_communities: counts.clone().max().unwrap(),
                mean_communities: counts.sum::<usize>() as f64 / runs as f64,
                min_modularity: qs.clone().fold(f64::INFINITY, f64::min),
                max_modularity: qs.clone().fold(f64::NEG_INFINITY, f64::max),
                mean_modularity: qs.sum::<f64>() / runs as f64,
            }
        })
        .collect();
    Ok(out)
}

/// Writes `node_id,community_id` with external ids.
pub fn write_partition_csv<W: Write>(out: W, s: &Snapshot, p: &Partition, table: &NodeTable) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["node_id", "community_id"])?;
    for (local, &c) in p.assignment.iter().enumerate() {
        w.write_record([table.name(s.nodes()[local]), &c.to_string()])?;
    }
    w.flush()?;
    Ok(())
}

/// Writes `week,num_communities,modularity`.
pub fn write_series_csv<W: Write>(out: W, series: &CommunitySeries) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["week", "num_communities", "modularity"])?;
    for r in &series.rows {
        w.write_record([r.week.to_string(), r.num_communities.to_string(), r.modularity.to_string()])?;
    }
    w.flush()?;
    Ok(())
}
