//! The social-attribute network: a weighted undirected graph over social
//! nodes augmented with one node per attribute, signed social↔attribute
//! links, and mutex constraints between mutually exclusive attributes.
//!
//! Design notes:
//!
//! * Nodes are dense integer ids per kind ([`NodeRef`]); string ids exist
//!   only as optional [`Names`] attached at the ingestion boundary.
//! * Social links are unsigned; attribute links carry a sign. Negative
//!   attribute links are stored but never appear in the positive
//!   neighborhoods the scorers traverse.
//! * Mutex links are constraints, not affinity: they live outside the
//!   adjacency and are never returned as neighbors.
//! * Networks are frozen after construction. Experiments that modify a
//!   network (attribute removal, augmentation with inferred links) derive a
//!   new network instead of mutating.
//!
//! Adjacency lists are kept sorted by neighbor index so neighborhood
//! intersections run as linear merges.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;

use crate::error::{Error, Result};

/// Node kind: a person in the social graph or an attribute value.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum NodeKind {
    Social,
    Attribute,
}

/// Dense reference to a node of a given kind. Stable for the lifetime of the
/// network it belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct NodeRef {
    kind: NodeKind,
    index: u32,
}

impl NodeRef {
    /// Reference to the social node with the given dense index.
    pub fn social(index: usize) -> Self {
        NodeRef {
            kind: NodeKind::Social,
            index: index as u32,
        }
    }

    /// Reference to the attribute node with the given dense index.
    pub fn attribute(index: usize) -> Self {
        NodeRef {
            kind: NodeKind::Attribute,
            index: index as u32,
        }
    }

    pub fn kind(&self) -> NodeKind {
        self.kind
    }

    pub fn index(&self) -> usize {
        self.index as usize
    }

    pub fn is_social(&self) -> bool {
        self.kind == NodeKind::Social
    }

    pub fn is_attribute(&self) -> bool {
        self.kind == NodeKind::Attribute
    }
}

impl fmt::Display for NodeRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.kind {
            NodeKind::Social => write!(f, "s{}", self.index),
            NodeKind::Attribute => write!(f, "a{}", self.index),
        }
    }
}

/// Sign of an attribute link: the user has (+) or explicitly does not have
/// (−) the attribute.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Sign {
    Positive,
    Negative,
}

/// Which links a neighborhood query may traverse.
///
/// `All` follows social links plus attribute links of the requested sign
/// (Γ₊/Γ₋); `SocialOnly` drops attribute neighbors (Γ_{s+}/Γ_{s−}). For an
/// attribute node both modes return the users linked with the requested
/// sign, since attribute nodes only ever have social neighbors.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Restrict {
    All,
    SocialOnly,
}

/// A single invariant violation found by [`SocialAttributeNetwork::validate`]
/// or rejected by [`NetworkBuilder::build`]. Violations are data, not errors:
/// `validate` reports all of them.
#[derive(Debug, Clone, PartialEq)]
pub enum Violation {
    /// Social adjacency entry (u,v) has no matching (v,u) or the weights
    /// disagree.
    AsymmetricSocialEdge { u: usize, v: usize },
    /// Social node linked to itself.
    SocialSelfLoop { u: usize },
    /// The same (user, attribute) pair carries both a positive and a
    /// negative link.
    ConflictingAttributeLink { user: usize, attribute: usize },
    /// A user holds positive links to both members of a mutex pair.
    MutexTriangle {
        user: usize,
        attribute_a: usize,
        attribute_b: usize,
    },
    /// A mutex pair joining an attribute to itself.
    SelfMutex { attribute: usize },
    /// A node or edge weight that is negative, NaN or infinite.
    BadWeight { what: String, value: f64 },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::AsymmetricSocialEdge { u, v } => {
                write!(f, "social edge ({u},{v}) is not symmetric")
            }
            Violation::SocialSelfLoop { u } => write!(f, "social self-loop at node {u}"),
            Violation::ConflictingAttributeLink { user, attribute } => write!(
                f,
                "user {user} has both a positive and a negative link to attribute {attribute}"
            ),
            Violation::MutexTriangle {
                user,
                attribute_a,
                attribute_b,
            } => write!(
                f,
                "user {user} holds positive links to both mutex attributes {attribute_a} and {attribute_b}"
            ),
            Violation::SelfMutex { attribute } => {
                write!(f, "attribute {attribute} is mutex with itself")
            }
            Violation::BadWeight { what, value } => {
                write!(f, "weight of {what} is {value}, expected finite and >= 0")
            }
        }
    }
}

/// Optional external string ids for nodes.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Names {
    pub social: Vec<String>,
    pub attribute: Vec<String>,
    social_index: HashMap<String, u32>,
    attribute_index: HashMap<String, u32>,
}

impl Names {
    fn from_vecs(social: Vec<String>, attribute: Vec<String>) -> Self {
        let social_index = social
            .iter()
            .enumerate()
            .map(|(i, s)| (s.clone(), i as u32))
            .collect();
        let attribute_index = attribute
            .iter()
            .enumerate()
            .map(|(i, s)| (s.clone(), i as u32))
            .collect();
        Names {
            social,
            attribute,
            social_index,
            attribute_index,
        }
    }

    pub fn social_by_name(&self, name: &str) -> Option<NodeRef> {
        self.social_index
            .get(name)
            .map(|&i| NodeRef::social(i as usize))
    }

    pub fn attribute_by_name(&self, name: &str) -> Option<NodeRef> {
        self.attribute_index
            .get(name)
            .map(|&i| NodeRef::attribute(i as usize))
    }
}

/// Immutable weighted social-attribute network.
///
/// Invariants (enforced by [`NetworkBuilder::build`], re-checkable with
/// [`SocialAttributeNetwork::validate`]):
///
/// * the social adjacency is symmetric with no self-loops;
/// * no (user, attribute) pair is linked both positively and negatively;
/// * no user holds positive links to both members of a mutex pair;
/// * all node and edge weights are finite and ≥ 0.
#[derive(Debug, Clone, PartialEq)]
pub struct SocialAttributeNetwork {
    /// Per social node: sorted `(social neighbor, edge weight)`.
    social_adj: Vec<Vec<(u32, f64)>>,
    /// Per social node: sorted `(attribute, link weight)` positive links.
    pos_attr: Vec<Vec<(u32, f64)>>,
    /// Per social node: sorted `(attribute, link weight)` negative links.
    neg_attr: Vec<Vec<(u32, f64)>>,
    /// Per attribute node: sorted `(user, link weight)` positive links
    /// (transpose of `pos_attr`).
    attr_pos: Vec<Vec<(u32, f64)>>,
    /// Per attribute node: sorted `(user, link weight)` negative links.
    attr_neg: Vec<Vec<(u32, f64)>>,
    /// Mutex pairs, each stored once with `a < b`, sorted.
    mutex_pairs: Vec<(u32, u32)>,
    /// Per attribute node: sorted mutex partners.
    mutex_adj: Vec<Vec<u32>>,
    social_weight: Vec<f64>,
    attribute_weight: Vec<f64>,
    names: Option<Names>,
}

impl SocialAttributeNetwork {
    /// Number of social nodes (N).
    pub fn n_social(&self) -> usize {
        self.social_adj.len()
    }

    /// Number of attribute nodes (M).
    pub fn n_attributes(&self) -> usize {
        self.attr_pos.len()
    }

    /// Number of undirected social links.
    pub fn social_link_count(&self) -> usize {
        self.social_adj.iter().map(|row| row.len()).sum::<usize>() / 2
    }

    /// Number of positive attribute links.
    pub fn positive_link_count(&self) -> usize {
        self.pos_attr.iter().map(|row| row.len()).sum()
    }

    /// Number of negative attribute links.
    pub fn negative_link_count(&self) -> usize {
        self.neg_attr.iter().map(|row| row.len()).sum()
    }

    /// Mutex pairs, each once with the smaller attribute index first.
    pub fn mutex_pairs(&self) -> &[(u32, u32)] {
        &self.mutex_pairs
    }

    pub fn names(&self) -> Option<&Names> {
        self.names.as_ref()
    }

    /// Human-readable label for a node: its external name when known,
    /// otherwise `s{index}` / `a{index}`.
    pub fn node_label(&self, node: NodeRef) -> String {
        if let Some(names) = &self.names {
            let list = match node.kind() {
                NodeKind::Social => &names.social,
                NodeKind::Attribute => &names.attribute,
            };
            if let Some(name) = list.get(node.index()) {
                return name.clone();
            }
        }
        node.to_string()
    }

    fn check_node(&self, node: NodeRef) -> Result<()> {
        let bound = match node.kind() {
            NodeKind::Social => self.n_social(),
            NodeKind::Attribute => self.n_attributes(),
        };
        if node.index() < bound {
            Ok(())
        } else {
            Err(Error::UnknownNode(node))
        }
    }

    /// Does the undirected social edge (u, v) exist? Indices are social.
    pub fn has_social_edge(&self, u: usize, v: usize) -> bool {
        self.social_adj[u]
            .binary_search_by_key(&(v as u32), |&(n, _)| n)
            .is_ok()
    }

    /// Does user `u` hold a positive link to attribute `a`?
    pub fn has_positive_link(&self, u: usize, a: usize) -> bool {
        self.pos_attr[u]
            .binary_search_by_key(&(a as u32), |&(n, _)| n)
            .is_ok()
    }

    /// Sorted `(neighbor, weight)` social adjacency of social node `u`.
    pub fn social_neighbors(&self, u: usize) -> &[(u32, f64)] {
        &self.social_adj[u]
    }

    /// Sorted `(attribute, weight)` positive links of social node `u`.
    pub fn positive_attributes(&self, u: usize) -> &[(u32, f64)] {
        &self.pos_attr[u]
    }

    /// Sorted `(attribute, weight)` negative links of social node `u`.
    pub fn negative_attributes(&self, u: usize) -> &[(u32, f64)] {
        &self.neg_attr[u]
    }

    /// Sorted `(user, weight)` positive links of attribute node `a`.
    pub fn attribute_positive_users(&self, a: usize) -> &[(u32, f64)] {
        &self.attr_pos[a]
    }

    /// Sorted `(user, weight)` negative links of attribute node `a`.
    pub fn attribute_negative_users(&self, a: usize) -> &[(u32, f64)] {
        &self.attr_neg[a]
    }

    /// Sorted mutex partners of attribute node `a`.
    pub fn mutex_partners(&self, a: usize) -> &[u32] {
        &self.mutex_adj[a]
    }

    /// Node weights w(u) of social nodes, indexed densely.
    pub fn social_node_weights(&self) -> &[f64] {
        &self.social_weight
    }

    /// Node weights w(a) of attribute nodes, indexed densely.
    pub fn attribute_node_weights(&self) -> &[f64] {
        &self.attribute_weight
    }

    /// Weight of a single node.
    pub fn node_weight(&self, node: NodeRef) -> Result<f64> {
        self.check_node(node)?;
        Ok(match node.kind() {
            NodeKind::Social => self.social_weight[node.index()],
            NodeKind::Attribute => self.attribute_weight[node.index()],
        })
    }

    /// All undirected social edges, each once with `u < v`, ascending.
    pub fn social_edges(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        self.social_adj.iter().enumerate().flat_map(|(u, row)| {
            row.iter().filter_map(move |&(v, w)| {
                if u < v as usize {
                    Some((u, v as usize, w))
                } else {
                    None
                }
            })
        })
    }

    /// All attribute links of one sign as `(user, attribute, weight)`,
    /// ascending by (user, attribute).
    pub fn attribute_links(&self, sign: Sign) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        let rows = match sign {
            Sign::Positive => &self.pos_attr,
            Sign::Negative => &self.neg_attr,
        };
        rows.iter()
            .enumerate()
            .flat_map(|(u, row)| row.iter().map(move |&(a, w)| (u, a as usize, w)))
    }

    /// Neighborhood query: Γ₊/Γ₋ (`Restrict::All`) or Γ_{s+}/Γ_{s−}
    /// (`Restrict::SocialOnly`).
    ///
    /// Social links are unsigned and count under either sign; the sign
    /// selects which attribute links are followed. Mutex links are never
    /// neighbors. The result is sorted: social nodes ascending, then
    /// attribute nodes ascending.
    pub fn neighbors(&self, u: NodeRef, sign: Sign, restrict: Restrict) -> Result<Vec<NodeRef>> {
        self.check_node(u)?;
        let mut out = Vec::new();
        match u.kind() {
            NodeKind::Social => {
                let i = u.index();
                out.extend(
                    self.social_adj[i]
                        .iter()
                        .map(|&(v, _)| NodeRef::social(v as usize)),
                );
                if restrict == Restrict::All {
                    let attrs = match sign {
                        Sign::Positive => &self.pos_attr[i],
                        Sign::Negative => &self.neg_attr[i],
                    };
                    out.extend(attrs.iter().map(|&(a, _)| NodeRef::attribute(a as usize)));
                }
            }
            NodeKind::Attribute => {
                // Attribute nodes only have social neighbors, so both
                // restricts coincide.
                let users = match sign {
                    Sign::Positive => &self.attr_pos[u.index()],
                    Sign::Negative => &self.attr_neg[u.index()],
                };
                out.extend(users.iter().map(|&(v, _)| NodeRef::social(v as usize)));
            }
        }
        Ok(out)
    }

    /// `|neighbors(u, sign, restrict)|` without materializing the set.
    pub fn degree(&self, u: NodeRef, sign: Sign, restrict: Restrict) -> Result<usize> {
        self.check_node(u)?;
        Ok(match u.kind() {
            NodeKind::Social => {
                let i = u.index();
                let social = self.social_adj[i].len();
                match restrict {
                    Restrict::SocialOnly => social,
                    Restrict::All => {
                        social
                            + match sign {
                                Sign::Positive => self.pos_attr[i].len(),
                                Sign::Negative => self.neg_attr[i].len(),
                            }
                    }
                }
            }
            NodeKind::Attribute => match sign {
                Sign::Positive => self.attr_pos[u.index()].len(),
                Sign::Negative => self.attr_neg[u.index()].len(),
            },
        })
    }

    /// Social-only projection: identical social structure, no attribute or
    /// mutex links, every weight reset to 1.0. This is the network behind
    /// every "without attributes" configuration.
    pub fn project_social(&self) -> SocialAttributeNetwork {
        let social_adj: Vec<Vec<(u32, f64)>> = self
            .social_adj
            .iter()
            .map(|row| row.iter().map(|&(v, _)| (v, 1.0)).collect())
            .collect();
        let n = social_adj.len();
        SocialAttributeNetwork {
            social_adj,
            pos_attr: vec![Vec::new(); n],
            neg_attr: vec![Vec::new(); n],
            attr_pos: Vec::new(),
            attr_neg: Vec::new(),
            mutex_pairs: Vec::new(),
            mutex_adj: Vec::new(),
            social_weight: vec![1.0; n],
            attribute_weight: Vec::new(),
            names: self.names.as_ref().map(|names| {
                Names::from_vecs(names.social.clone(), Vec::new())
            }),
        }
    }

    /// Re-check every type invariant, reporting all violations.
    ///
    /// Networks built through [`NetworkBuilder`] always validate clean; this
    /// exists for data that arrived through
    /// [`SocialAttributeNetwork::from_raw_parts_unchecked`].
    pub fn validate(&self) -> Vec<Violation> {
        let mut out = Vec::new();

        for (u, row) in self.social_adj.iter().enumerate() {
            for &(v, w) in row {
                if u == v as usize {
                    // Report each self-loop once.
                    out.push(Violation::SocialSelfLoop { u });
                    continue;
                }
                let back = self.social_adj[v as usize]
                    .binary_search_by_key(&(u as u32), |&(n, _)| n)
                    .ok()
                    .map(|pos| self.social_adj[v as usize][pos].1);
                // Weights must agree bit-for-bit: both sides are written from
                // the same builder entry. Bit comparison keeps NaN weights
                // from doubling as spurious asymmetry reports.
                if back.map(f64::to_bits) != Some(w.to_bits()) && u < v as usize {
                    out.push(Violation::AsymmetricSocialEdge { u, v: v as usize });
                } else if back.is_none() && u > v as usize {
                    out.push(Violation::AsymmetricSocialEdge { u: v as usize, v: u });
                }
                if !(w.is_finite() && w >= 0.0) && u < v as usize {
                    out.push(Violation::BadWeight {
                        what: format!("social edge ({u},{v})"),
                        value: w,
                    });
                }
            }
        }

        for (u, row) in self.pos_attr.iter().enumerate() {
            for &(a, w) in row {
                if self.neg_attr[u]
                    .binary_search_by_key(&a, |&(n, _)| n)
                    .is_ok()
                {
                    out.push(Violation::ConflictingAttributeLink {
                        user: u,
                        attribute: a as usize,
                    });
                }
                if !(w.is_finite() && w >= 0.0) {
                    out.push(Violation::BadWeight {
                        what: format!("positive link ({u},a{a})"),
                        value: w,
                    });
                }
            }
        }
        for (u, row) in self.neg_attr.iter().enumerate() {
            for &(a, w) in row {
                if !(w.is_finite() && w >= 0.0) {
                    out.push(Violation::BadWeight {
                        what: format!("negative link ({u},a{a})"),
                        value: w,
                    });
                }
            }
        }

        for &(a, b) in &self.mutex_pairs {
            if a == b {
                out.push(Violation::SelfMutex {
                    attribute: a as usize,
                });
                continue;
            }
            // Linear merge over the two sorted positive-user lists.
            let left = &self.attr_pos[a as usize];
            let right = &self.attr_pos[b as usize];
            let (mut i, mut j) = (0, 0);
            while i < left.len() && j < right.len() {
                match left[i].0.cmp(&right[j].0) {
                    std::cmp::Ordering::Less => i += 1,
                    std::cmp::Ordering::Greater => j += 1,
                    std::cmp::Ordering::Equal => {
                        out.push(Violation::MutexTriangle {
                            user: left[i].0 as usize,
                            attribute_a: a as usize,
                            attribute_b: b as usize,
                        });
                        i += 1;
                        j += 1;
                    }
                }
            }
        }

        for (i, &w) in self.social_weight.iter().enumerate() {
            if !(w.is_finite() && w >= 0.0) {
                out.push(Violation::BadWeight {
                    what: format!("social node {i}"),
                    value: w,
                });
            }
        }
        for (i, &w) in self.attribute_weight.iter().enumerate() {
            if !(w.is_finite() && w >= 0.0) {
                out.push(Violation::BadWeight {
                    what: format!("attribute node {i}"),
                    value: w,
                });
            }
        }

        out
    }

    /// Assemble a network directly from adjacency rows, bypassing every
    /// invariant check. Reverse indexes (attribute→user lists, mutex
    /// partner lists) are derived from the forward rows.
    ///
    /// Intended for deserialization and for tests that need to inject
    /// invalid structures; anything else should go through
    /// [`NetworkBuilder`]. Callers are expected to run
    /// [`SocialAttributeNetwork::validate`] afterwards.
    pub fn from_raw_parts_unchecked(
        social_adj: Vec<Vec<(u32, f64)>>,
        pos_attr: Vec<Vec<(u32, f64)>>,
        neg_attr: Vec<Vec<(u32, f64)>>,
        n_attributes: usize,
        mutex_pairs: Vec<(u32, u32)>,
        social_weight: Vec<f64>,
        attribute_weight: Vec<f64>,
        names: Option<(Vec<String>, Vec<String>)>,
    ) -> SocialAttributeNetwork {
        let mut attr_pos = vec![Vec::new(); n_attributes];
        let mut attr_neg = vec![Vec::new(); n_attributes];
        for (u, row) in pos_attr.iter().enumerate() {
            for &(a, w) in row {
                attr_pos[a as usize].push((u as u32, w));
            }
        }
        for (u, row) in neg_attr.iter().enumerate() {
            for &(a, w) in row {
                attr_neg[a as usize].push((u as u32, w));
            }
        }
        let mut mutex_adj = vec![Vec::new(); n_attributes];
        for &(a, b) in &mutex_pairs {
            if a != b {
                mutex_adj[a as usize].push(b);
                mutex_adj[b as usize].push(a);
            }
        }
        for row in &mut mutex_adj {
            row.sort_unstable();
        }
        SocialAttributeNetwork {
            social_adj,
            pos_attr,
            neg_attr,
            attr_pos,
            attr_neg,
            mutex_pairs,
            mutex_adj,
            social_weight,
            attribute_weight,
            names: names.map(|(s, a)| Names::from_vecs(s, a)),
        }
    }
}

#[derive(Debug, Clone, Copy, Default)]
struct SignedWeights {
    pos: Option<f64>,
    neg: Option<f64>,
}

/// Checked constructor for [`SocialAttributeNetwork`].
///
/// Nodes are interned by name (or created anonymously with
/// [`NetworkBuilder::with_sizes`]); links may be added in any order and
/// duplicates overwrite. [`NetworkBuilder::build`] verifies every invariant
/// and reports all violations at once.
#[derive(Debug, Clone, Default)]
pub struct NetworkBuilder {
    social_names: Vec<String>,
    attribute_names: Vec<String>,
    social_index: HashMap<String, u32>,
    attribute_index: HashMap<String, u32>,
    anonymous: bool,
    n_social: usize,
    n_attributes: usize,
    /// Undirected edges keyed with u < v.
    edges: BTreeMap<(u32, u32), f64>,
    self_loops: BTreeSet<u32>,
    attr_links: BTreeMap<(u32, u32), SignedWeights>,
    mutex: BTreeSet<(u32, u32)>,
    self_mutex: BTreeSet<u32>,
    social_weight_overrides: BTreeMap<u32, f64>,
    attribute_weight_overrides: BTreeMap<u32, f64>,
}

impl NetworkBuilder {
    /// Builder with named nodes, interned on first use.
    pub fn new() -> Self {
        NetworkBuilder::default()
    }

    /// Builder over anonymous nodes with fixed counts; refs are made with
    /// [`NodeRef::social`] / [`NodeRef::attribute`] directly.
    pub fn with_sizes(n_social: usize, n_attributes: usize) -> Self {
        NetworkBuilder {
            anonymous: true,
            n_social,
            n_attributes,
            ..NetworkBuilder::default()
        }
    }

    /// Intern (or look up) a social node by name.
    pub fn social(&mut self, name: &str) -> NodeRef {
        debug_assert!(!self.anonymous, "named lookup on an anonymous builder");
        if let Some(&i) = self.social_index.get(name) {
            return NodeRef::social(i as usize);
        }
        let i = self.social_names.len() as u32;
        self.social_names.push(name.to_string());
        self.social_index.insert(name.to_string(), i);
        self.n_social += 1;
        NodeRef::social(i as usize)
    }

    /// Look up an already-interned social node without creating it.
    pub fn social_lookup(&self, name: &str) -> Option<NodeRef> {
        self.social_index
            .get(name)
            .map(|&i| NodeRef::social(i as usize))
    }

    /// Look up an already-interned attribute node without creating it.
    pub fn attribute_lookup(&self, name: &str) -> Option<NodeRef> {
        self.attribute_index
            .get(name)
            .map(|&i| NodeRef::attribute(i as usize))
    }

    /// Intern (or look up) an attribute node by name.
    pub fn attribute(&mut self, name: &str) -> NodeRef {
        debug_assert!(!self.anonymous, "named lookup on an anonymous builder");
        if let Some(&i) = self.attribute_index.get(name) {
            return NodeRef::attribute(i as usize);
        }
        let i = self.attribute_names.len() as u32;
        self.attribute_names.push(name.to_string());
        self.attribute_index.insert(name.to_string(), i);
        self.n_attributes += 1;
        NodeRef::attribute(i as usize)
    }

    fn check(&self, node: NodeRef, kind: NodeKind) -> Result<u32> {
        if node.kind() != kind {
            return Err(Error::precondition(format!(
                "expected a {kind:?} node, got {node}"
            )));
        }
        let bound = match kind {
            NodeKind::Social => self.n_social,
            NodeKind::Attribute => self.n_attributes,
        };
        if node.index() >= bound {
            return Err(Error::UnknownNode(node));
        }
        Ok(node.index() as u32)
    }

    /// Add an undirected social edge with weight 1.0.
    pub fn social_edge(&mut self, u: NodeRef, v: NodeRef) -> Result<&mut Self> {
        self.social_edge_weighted(u, v, 1.0)
    }

    /// Add an undirected social edge with an explicit weight. Duplicate
    /// insertions overwrite the weight.
    pub fn social_edge_weighted(&mut self, u: NodeRef, v: NodeRef, weight: f64) -> Result<&mut Self> {
        let ui = self.check(u, NodeKind::Social)?;
        let vi = self.check(v, NodeKind::Social)?;
        if ui == vi {
            // Recorded now, reported as a violation by build().
            self.self_loops.insert(ui);
            return Ok(self);
        }
        let key = (ui.min(vi), ui.max(vi));
        self.edges.insert(key, weight);
        Ok(self)
    }

    /// Add a signed attribute link with weight 1.0.
    pub fn attribute_link(&mut self, u: NodeRef, a: NodeRef, sign: Sign) -> Result<&mut Self> {
        self.attribute_link_weighted(u, a, sign, 1.0)
    }

    /// Add a signed attribute link with an explicit weight.
    pub fn attribute_link_weighted(
        &mut self,
        u: NodeRef,
        a: NodeRef,
        sign: Sign,
        weight: f64,
    ) -> Result<&mut Self> {
        let ui = self.check(u, NodeKind::Social)?;
        let ai = self.check(a, NodeKind::Attribute)?;
        let entry = self.attr_links.entry((ui, ai)).or_default();
        match sign {
            Sign::Positive => entry.pos = Some(weight),
            Sign::Negative => entry.neg = Some(weight),
        }
        Ok(self)
    }

    /// Declare two attributes mutually exclusive.
    pub fn mutex(&mut self, a: NodeRef, b: NodeRef) -> Result<&mut Self> {
        let ai = self.check(a, NodeKind::Attribute)?;
        let bi = self.check(b, NodeKind::Attribute)?;
        if ai == bi {
            self.self_mutex.insert(ai);
            return Ok(self);
        }
        self.mutex.insert((ai.min(bi), ai.max(bi)));
        Ok(self)
    }

    /// Override a node weight (default 1.0).
    pub fn node_weight(&mut self, node: NodeRef, weight: f64) -> Result<&mut Self> {
        match node.kind() {
            NodeKind::Social => {
                let i = self.check(node, NodeKind::Social)?;
                self.social_weight_overrides.insert(i, weight);
            }
            NodeKind::Attribute => {
                let i = self.check(node, NodeKind::Attribute)?;
                self.attribute_weight_overrides.insert(i, weight);
            }
        }
        Ok(self)
    }

    /// Verify all invariants and freeze the network. On failure every
    /// violation found is reported.
    pub fn build(self) -> Result<SocialAttributeNetwork> {
        let n = self.n_social;
        let m = self.n_attributes;

        let mut social_adj: Vec<Vec<(u32, f64)>> = vec![Vec::new(); n];
        for (&(u, v), &w) in &self.edges {
            social_adj[u as usize].push((v, w));
            social_adj[v as usize].push((u, w));
        }
        for row in &mut social_adj {
            row.sort_unstable_by_key(|&(v, _)| v);
        }

        let mut pos_attr: Vec<Vec<(u32, f64)>> = vec![Vec::new(); n];
        let mut neg_attr: Vec<Vec<(u32, f64)>> = vec![Vec::new(); n];
        for (&(u, a), sw) in &self.attr_links {
            if let Some(w) = sw.pos {
                pos_attr[u as usize].push((a, w));
            }
            if let Some(w) = sw.neg {
                neg_attr[u as usize].push((a, w));
            }
        }
        // BTreeMap iteration already delivers (u, a) ascending; rows are
        // sorted by construction.

        let mut social_weight = vec![1.0; n];
        for (&i, &w) in &self.social_weight_overrides {
            social_weight[i as usize] = w;
        }
        let mut attribute_weight = vec![1.0; m];
        for (&i, &w) in &self.attribute_weight_overrides {
            attribute_weight[i as usize] = w;
        }

        let mut mutex_pairs: Vec<(u32, u32)> = self.mutex.iter().copied().collect();
        mutex_pairs.extend(self.self_mutex.iter().map(|&a| (a, a)));
        mutex_pairs.sort_unstable();

        let names = if self.anonymous {
            None
        } else {
            Some((self.social_names, self.attribute_names))
        };

        let network = SocialAttributeNetwork::from_raw_parts_unchecked(
            social_adj,
            pos_attr,
            neg_attr,
            m,
            mutex_pairs,
            social_weight,
            attribute_weight,
            names,
        );

        let mut violations = network.validate();
        violations.extend(
            self.self_loops
                .iter()
                .map(|&u| Violation::SocialSelfLoop { u: u as usize }),
        );
        if violations.is_empty() {
            Ok(network)
        } else {
            Err(Error::InvalidNetwork(violations))
        }
    }
}

/// A named, time-ordered network (a JUL/AUG/SEP-style observation).
#[derive(Debug, Clone, PartialEq)]
pub struct Snapshot {
    pub network: SocialAttributeNetwork,
    pub label: String,
    /// Strictly orders snapshots in time; direction of an experiment
    /// (new vs missing links) is decided by comparing ordinals.
    pub ordinal: i64,
}

impl Snapshot {
    pub fn new(network: SocialAttributeNetwork, label: impl Into<String>, ordinal: i64) -> Self {
        Snapshot {
            network,
            label: label.into(),
            ordinal,
        }
    }
}
