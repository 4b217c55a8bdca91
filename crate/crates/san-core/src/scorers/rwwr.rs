//! Restarting random walks over the positive links of a network.
//!
//! A walker at node i either restarts at the source (probability `alpha`)
//! or moves to a neighbor with probability proportional to the link
//! weight. The walk graph joins social links and positive attribute
//! links; negative links and mutex pairs are excluded. The stationary
//! distribution solves `p = alpha·e_source + (1−alpha)·Wᵀp` for the
//! row-normalized weighted adjacency W, which power iteration reaches
//! geometrically since the restart makes the map a contraction.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{NodeRef, SocialAttributeNetwork};

/// Restart probability and convergence budget for [`rwwr`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RwwrParams {
    /// Restart probability, in (0, 1].
    pub alpha: f64,
    /// L1 convergence threshold between successive iterates.
    pub tol: f64,
    pub max_iters: usize,
}

impl Default for RwwrParams {
    fn default() -> Self {
        RwwrParams {
            alpha: 0.7,
            tol: 1e-10,
            max_iters: 1000,
        }
    }
}

impl RwwrParams {
    fn check(&self) -> Result<()> {
        if !(self.alpha > 0.0 && self.alpha <= 1.0) {
            return Err(Error::precondition(format!(
                "restart probability {} outside (0, 1]",
                self.alpha
            )));
        }
        if !(self.tol > 0.0) {
            return Err(Error::precondition("walk tolerance must be > 0"));
        }
        Ok(())
    }
}

/// The walkable graph: social plus positive attribute links, flattened to
/// one index space (social nodes first, then attribute nodes).
#[derive(Debug, Clone)]
pub struct WalkGraph {
    out: Vec<Vec<(u32, f64)>>,
    /// Total outgoing weight per node; 0 marks a dangling node.
    out_weight: Vec<f64>,
}

impl WalkGraph {
    pub fn build(net: &SocialAttributeNetwork) -> WalkGraph {
        let n = net.n_social();
        let m = net.n_attributes();
        let mut out: Vec<Vec<(u32, f64)>> = Vec::with_capacity(n + m);
        for u in 0..n {
            let mut row: Vec<(u32, f64)> =
                net.social_neighbors(u).iter().map(|&(v, w)| (v, w)).collect();
            row.extend(
                net.positive_attributes(u)
                    .iter()
                    .map(|&(a, w)| (n as u32 + a, w)),
            );
            out.push(row);
        }
        for a in 0..m {
            out.push(
                net.attribute_positive_users(a)
                    .iter()
                    .map(|&(u, w)| (u, w))
                    .collect(),
            );
        }
        let out_weight = out
            .iter()
            .map(|row| row.iter().map(|&(_, w)| w).sum())
            .collect();
        WalkGraph { out, out_weight }
    }

    pub fn n_nodes(&self) -> usize {
        self.out.len()
    }
}

/// Stationary distribution of a walk restarting at `source`, over the
/// flattened node space (length N+M, social entries first).
///
/// Mass leaving a dangling node returns to the source. The result is a
/// probability distribution: non-negative, summing to 1 up to float error.
/// Errors if the iteration budget runs out before the L1 residual drops
/// below `tol` (cannot happen for the default budget, which allows the
/// contraction to shrink the residual far below any representable value).
pub fn rwwr_on(walk: &WalkGraph, source: usize, params: &RwwrParams) -> Result<Vec<f64>> {
    params.check()?;
    let n = walk.n_nodes();
    if source >= n {
        return Err(Error::precondition(format!(
            "walk source {source} outside the node space of {n}"
        )));
    }
    let alpha = params.alpha;
    let mut p = vec![0.0; n];
    p[source] = 1.0;
    if alpha == 1.0 {
        return Ok(p); // the walker never leaves the source
    }
    let mut next = vec![0.0; n];
    let mut residual = f64::INFINITY;
    for _ in 0..params.max_iters {
        next.iter_mut().for_each(|x| *x = 0.0);
        let mut dangling = 0.0;
        for i in 0..n {
            let mass = p[i];
            if mass == 0.0 {
                continue;
            }
            if walk.out_weight[i] > 0.0 {
                let scale = mass / walk.out_weight[i];
                for &(j, w) in &walk.out[i] {
                    next[j as usize] += scale * w;
                }
            } else {
                dangling += mass;
            }
        }
        next[source] += dangling;
        for x in next.iter_mut() {
            *x *= 1.0 - alpha;
        }
        next[source] += alpha;
        residual = p
            .iter()
            .zip(next.iter())
            .map(|(a, b)| (a - b).abs())
            .sum();
        std::mem::swap(&mut p, &mut next);
        if residual <= params.tol {
            return Ok(p);
        }
    }
    Err(Error::NoConvergence {
        what: "restarting random walk".into(),
        iterations: params.max_iters,
        residual,
        tolerance: params.tol,
    })
}

/// As [`rwwr_on`], building the walk graph for a single source. Batch
/// callers should build the graph once and use [`rwwr_on`] per source.
pub fn rwwr(
    net: &SocialAttributeNetwork,
    source: NodeRef,
    params: &RwwrParams,
) -> Result<Vec<f64>> {
    let id = match source.kind() {
        crate::graph::NodeKind::Social if source.index() < net.n_social() => source.index(),
        crate::graph::NodeKind::Attribute if source.index() < net.n_attributes() => {
            net.n_social() + source.index()
        }
        _ => return Err(Error::UnknownNode(source)),
    };
    rwwr_on(&WalkGraph::build(net), id, params)
}

/// Walk-based score for one candidate pair: the two directed stationary
/// probabilities averaged for a social pair, or the single probability of
/// reaching the attribute for a (social, attribute) pair.
pub fn rwwr_score(
    net: &SocialAttributeNetwork,
    u: NodeRef,
    v: NodeRef,
    params: &RwwrParams,
) -> Result<f64> {
    let (u_idx, v_idx, task) = super::resolve_pair(net, u, v)?;
    let walk = WalkGraph::build(net);
    match task {
        crate::labels::Task::SocialLink => {
            let from_u = rwwr_on(&walk, u_idx, params)?;
            let from_v = rwwr_on(&walk, v_idx, params)?;
            Ok((from_u[v_idx] + from_v[u_idx]) / 2.0)
        }
        crate::labels::Task::AttributeLink => {
            let from_u = rwwr_on(&walk, u_idx, params)?;
            Ok(from_u[net.n_social() + v_idx])
        }
    }
}
