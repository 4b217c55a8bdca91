//! Post-processing of attribute predictions against mutual-exclusion
//! constraints.
//!
//! The top-scored candidates of each user form that user's putative
//! positive set. Within it, whenever both members of a mutex pair appear,
//! the lower-ranked member is demoted to a negative prediction; a
//! candidate whose mutex partner is an existing positive link of the user
//! is demoted as well. Demotions are decided simultaneously against the
//! original putative set and nothing below the cutoff is promoted to
//! replace a demoted link, which is exactly what makes the operation
//! idempotent: re-running it on the surviving links finds no new
//! conflicts.

use std::collections::{BTreeMap, HashMap};

use crate::error::{Error, Result};
use crate::graph::{NodeRef, SocialAttributeNetwork};
use crate::scorers::ScoreTable;

/// Result of [`mutex_postprocess`].
#[derive(Debug, Clone, PartialEq)]
pub struct MutexAdjusted {
    pub cutoff: usize,
    /// Surviving putative positive links, grouped by user in ranking
    /// order — the first links of a user are its best predictions.
    pub kept: Vec<(NodeRef, NodeRef, f64)>,
    /// Demoted links, sorted by (user, attribute).
    pub demoted: Vec<(NodeRef, NodeRef)>,
}

/// Group an attribute score table by user, each list sorted by score
/// descending with attribute index breaking ties. This ranking order is
/// shared by the cutoff here and the top-K metrics downstream.
pub fn ranked_by_user(table: &ScoreTable) -> Result<BTreeMap<u32, Vec<(u32, f64)>>> {
    if table.task != crate::labels::Task::AttributeLink {
        return Err(Error::precondition(
            "mutex post-processing applies to attribute predictions",
        ));
    }
    let mut by_user: BTreeMap<u32, Vec<(u32, f64)>> = BTreeMap::new();
    for &(u, a, score) in &table.entries {
        if !u.is_social() {
            return Err(Error::UnknownNode(u));
        }
        if !a.is_attribute() {
            return Err(Error::UnknownNode(a));
        }
        if !score.is_finite() {
            return Err(Error::precondition(format!(
                "non-finite score for ({u}, {a})"
            )));
        }
        by_user
            .entry(u.index() as u32)
            .or_default()
            .push((a.index() as u32, score));
    }
    for ranked in by_user.values_mut() {
        ranked.sort_unstable_by(|&(a1, s1), &(a2, s2)| {
            s2.total_cmp(&s1).then(a1.cmp(&a2))
        });
    }
    Ok(by_user)
}

/// `candidate` loses to `other` when the other scores higher, or scores
/// equal with a smaller attribute index.
fn beats(other: (u32, f64), candidate: (u32, f64)) -> bool {
    other.1 > candidate.1 || (other.1 == candidate.1 && other.0 < candidate.0)
}

/// Demote putative positive links that violate a mutex constraint.
///
/// Per user, the `cutoff` best-scored candidates are putative positives.
/// A putative link is demoted when its mutex partner is a better-ranked
/// putative positive of the same user, or an existing positive link of
/// that user. Links below the cutoff are untouched and never promoted.
pub fn mutex_postprocess(
    table: &ScoreTable,
    net: &SocialAttributeNetwork,
    cutoff: usize,
) -> Result<MutexAdjusted> {
    let rankings = ranked_by_user(table)?;
    let mut kept = Vec::new();
    let mut demoted = Vec::new();
    for (&u, ranked) in &rankings {
        let user = u as usize;
        if user >= net.n_social() {
            return Err(Error::UnknownNode(NodeRef::social(user)));
        }
        let top = &ranked[..cutoff.min(ranked.len())];
        let putative: HashMap<u32, f64> = top.iter().copied().collect();
        for &(a, score) in top {
            if a as usize >= net.n_attributes() {
                return Err(Error::UnknownNode(NodeRef::attribute(a as usize)));
            }
            let conflicted = net.mutex_partners(a as usize).iter().any(|&partner| {
                putative
                    .get(&partner)
                    .is_some_and(|&s| beats((partner, s), (a, score)))
                    || net.has_positive_link(user, partner as usize)
            });
            let pair = (NodeRef::social(user), NodeRef::attribute(a as usize));
            if conflicted {
                demoted.push(pair);
            } else {
                kept.push((pair.0, pair.1, score));
            }
        }
    }
    demoted.sort_unstable();
    Ok(MutexAdjusted {
        cutoff,
        kept,
        demoted,
    })
}

/// A copy of the network with extra positive attribute links, all at the
/// given weight. Links already positive keep their existing weight; a
/// link contradicting an existing negative link is an error.
pub fn augment_positive_links(
    net: &SocialAttributeNetwork,
    links: &[(NodeRef, NodeRef)],
    weight: f64,
) -> Result<SocialAttributeNetwork> {
    let n = net.n_social();
    let mut pos: Vec<Vec<(u32, f64)>> =
        (0..n).map(|u| net.positive_attributes(u).to_vec()).collect();
    for &(u, a) in links {
        if !u.is_social() || u.index() >= n {
            return Err(Error::UnknownNode(u));
        }
        if !a.is_attribute() || a.index() >= net.n_attributes() {
            return Err(Error::UnknownNode(a));
        }
        let id = a.index() as u32;
        if net
            .negative_attributes(u.index())
            .binary_search_by_key(&id, |&(x, _)| x)
            .is_ok()
        {
            return Err(Error::precondition(format!(
                "cannot add positive link ({u}, {a}): it contradicts an existing negative link"
            )));
        }
        let row = &mut pos[u.index()];
        if let Err(at) = row.binary_search_by_key(&id, |&(x, _)| x) {
            row.insert(at, (id, weight));
        }
    }
    Ok(SocialAttributeNetwork::from_raw_parts_unchecked(
        (0..n).map(|u| net.social_neighbors(u).to_vec()).collect(),
        pos,
        (0..n).map(|u| net.negative_attributes(u).to_vec()).collect(),
        net.n_attributes(),
        net.mutex_pairs().to_vec(),
        net.social_node_weights().to_vec(),
        net.attribute_node_weights().to_vec(),
        net.names()
            .map(|nm| (nm.social.clone(), nm.attribute.clone())),
    ))
}
