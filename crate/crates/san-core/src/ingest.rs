//! Raw-data parsing, the preprocessing pipeline, and snapshot file I/O.
//!
//! The pipeline mirrors how the evaluation corpus is prepared from a crawl:
//!
//! 1. [`mutualize`] keeps a directed edge only when both directions exist;
//! 2. [`build_vocabulary`] keeps attributes positively stated by at least
//!    `min_freq` distinct users;
//! 3. [`select_core`] keeps the largest connected social component in which
//!    every node has at least `k` distinct positive attributes;
//! 4. [`backfill_missing_links`] unions an earlier snapshot's social edges
//!    into a later one (links observed earlier rarely truly disappear).
//!
//! ## File formats
//!
//! All files are tab-separated UTF-8, one record per line; blank lines and
//! lines starting with `#` are skipped.
//!
//! * social edge file: `u \t v`
//! * attribute file: `u \t attribute [\t sign]` where sign is `+1`/`1` or
//!   `-1` (default `+1`: crawled profiles state only what users have)
//! * mutex file: `a \t b`
//! * node file: one social node id per line (fixes the node universe shared
//!   by a snapshot triple, including nodes that are isolated in one
//!   snapshot)
//! * snapshot manifest: a JSON list of `{label, ordinal, edge_file,
//!   attribute_file, mutex_file}` with optional `node_file` (shared
//!   universe) and `all_edge_file` (backfilled edges) per entry; paths are
//!   relative to the manifest.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{NetworkBuilder, Sign, Snapshot, SocialAttributeNetwork};

/// A deduplicated directed edge list over string ids.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct RawDirectedGraph {
    /// Directed edges, deduplicated, in sorted order.
    pub edges: BTreeSet<(String, String)>,
}

/// One `user — attribute` statement with a sign.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AttributeRecord {
    pub user: String,
    pub attribute: String,
    pub sign: Sign,
}

fn read_to_string(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

/// Iterate the meaningful lines of a TSV file as `(line_number, fields)`.
fn tsv_lines(content: &str) -> impl Iterator<Item = (usize, Vec<&str>)> {
    content.lines().enumerate().filter_map(|(i, line)| {
        let line = line.strip_suffix('\r').unwrap_or(line);
        if line.is_empty() || line.starts_with('#') {
            None
        } else {
            Some((i + 1, line.split('\t').collect()))
        }
    })
}

fn expect_fields<'a>(
    location: &str,
    line_no: usize,
    fields: &[&'a str],
    min: usize,
    max: usize,
) -> Result<()> {
    if fields.len() < min || fields.len() > max || fields.iter().any(|f| f.is_empty()) {
        let want = if min == max {
            format!("{min}")
        } else {
            format!("{min}..{max}")
        };
        return Err(Error::parse(
            location,
            Some(line_no),
            format!(
                "expected {want} non-empty tab-separated fields, found {}",
                fields.len()
            ),
        ));
    }
    Ok(())
}

/// Parse a directed edge file.
pub fn parse_edge_file(path: &Path) -> Result<RawDirectedGraph> {
    let content = read_to_string(path)?;
    let location = path.display().to_string();
    let mut edges = BTreeSet::new();
    for (line_no, fields) in tsv_lines(&content) {
        expect_fields(&location, line_no, &fields, 2, 2)?;
        edges.insert((fields[0].to_string(), fields[1].to_string()));
    }
    Ok(RawDirectedGraph { edges })
}

fn parse_sign(location: &str, line_no: usize, token: &str) -> Result<Sign> {
    match token {
        "+1" | "1" | "+" => Ok(Sign::Positive),
        "-1" | "-" => Ok(Sign::Negative),
        other => Err(Error::parse(
            location,
            Some(line_no),
            format!("bad sign {other:?}, expected +1 or -1"),
        )),
    }
}

/// Parse an attribute file; the sign column defaults to positive.
pub fn parse_attribute_file(path: &Path) -> Result<Vec<AttributeRecord>> {
    let content = read_to_string(path)?;
    let location = path.display().to_string();
    let mut records = Vec::new();
    for (line_no, fields) in tsv_lines(&content) {
        expect_fields(&location, line_no, &fields, 2, 3)?;
        let sign = if fields.len() == 3 {
            parse_sign(&location, line_no, fields[2])?
        } else {
            Sign::Positive
        };
        records.push(AttributeRecord {
            user: fields[0].to_string(),
            attribute: fields[1].to_string(),
            sign,
        });
    }
    Ok(records)
}

/// Parse a mutex file into attribute-name pairs.
pub fn parse_mutex_file(path: &Path) -> Result<Vec<(String, String)>> {
    let content = read_to_string(path)?;
    let location = path.display().to_string();
    let mut pairs = Vec::new();
    for (line_no, fields) in tsv_lines(&content) {
        expect_fields(&location, line_no, &fields, 2, 2)?;
        pairs.push((fields[0].to_string(), fields[1].to_string()));
    }
    Ok(pairs)
}

/// Parse a node file: one social id per line.
pub fn parse_node_file(path: &Path) -> Result<Vec<String>> {
    let content = read_to_string(path)?;
    let location = path.display().to_string();
    let mut nodes = Vec::new();
    let mut seen = BTreeSet::new();
    for (line_no, fields) in tsv_lines(&content) {
        expect_fields(&location, line_no, &fields, 1, 1)?;
        if !seen.insert(fields[0].to_string()) {
            return Err(Error::parse(
                &location,
                Some(line_no),
                format!("duplicate node id {:?}", fields[0]),
            ));
        }
        nodes.push(fields[0].to_string());
    }
    Ok(nodes)
}

/// Keep (u,v) iff both directed edges (u,v) and (v,u) exist; drop
/// self-loops. Output is the undirected edge list, each pair once with the
/// lexicographically smaller endpoint first, sorted.
pub fn mutualize(raw: &RawDirectedGraph) -> Vec<(String, String)> {
    let mut out = Vec::new();
    for (u, v) in &raw.edges {
        // Visit each unordered pair from its smaller endpoint to emit once.
        if u < v && raw.edges.contains(&(v.clone(), u.clone())) {
            out.push((u.clone(), v.clone()));
        }
    }
    out
}

/// Attribute vocabulary: names in id order plus the reverse index.
///
/// Ids are assigned by descending positive frequency (distinct users),
/// ties broken lexicographically, so the map is independent of input order.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Vocabulary {
    names: Vec<String>,
    index: HashMap<String, u32>,
}

impl Vocabulary {
    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn contains(&self, name: &str) -> bool {
        self.index.contains_key(name)
    }

    pub fn id(&self, name: &str) -> Option<u32> {
        self.index.get(name).copied()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }
}

/// Keep attributes positively stated by at least `min_freq` distinct users.
pub fn build_vocabulary(records: &[AttributeRecord], min_freq: usize) -> Result<Vocabulary> {
    if min_freq < 1 {
        return Err(Error::precondition("min_freq must be >= 1"));
    }
    // Distinct (attribute, user) positive statements.
    let mut stated: BTreeSet<(&str, &str)> = BTreeSet::new();
    for r in records {
        if r.sign == Sign::Positive {
            stated.insert((r.attribute.as_str(), r.user.as_str()));
        }
    }
    let mut freq: BTreeMap<&str, usize> = BTreeMap::new();
    for (attr, _) in &stated {
        *freq.entry(attr).or_insert(0) += 1;
    }
    let mut kept: Vec<(&str, usize)> = freq
        .into_iter()
        .filter(|&(_, f)| f >= min_freq)
        .collect();
    kept.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(b.0)));
    let names: Vec<String> = kept.iter().map(|&(n, _)| n.to_string()).collect();
    let index = names
        .iter()
        .enumerate()
        .map(|(i, n)| (n.clone(), i as u32))
        .collect();
    Ok(Vocabulary { names, index })
}

/// Restrict a network to the given social nodes (sorted dense indices),
/// renumbering social ids and keeping the attribute universe unchanged.
fn induce_social(net: &SocialAttributeNetwork, keep: &[u32]) -> SocialAttributeNetwork {
    let mut remap: HashMap<u32, u32> = HashMap::with_capacity(keep.len());
    for (new, &old) in keep.iter().enumerate() {
        remap.insert(old, new as u32);
    }
    let mut social_adj = Vec::with_capacity(keep.len());
    let mut pos_attr = Vec::with_capacity(keep.len());
    let mut neg_attr = Vec::with_capacity(keep.len());
    let mut weights = Vec::with_capacity(keep.len());
    for &old in keep {
        let row: Vec<(u32, f64)> = net
            .social_neighbors(old as usize)
            .iter()
            .filter_map(|&(v, w)| remap.get(&v).map(|&nv| (nv, w)))
            .collect();
        // Remapping preserves relative order, so rows stay sorted.
        let mut row = row;
        row.sort_unstable_by_key(|&(v, _)| v);
        social_adj.push(row);
        pos_attr.push(net.positive_attributes(old as usize).to_vec());
        neg_attr.push(net.negative_attributes(old as usize).to_vec());
        weights.push(net.social_node_weights()[old as usize]);
    }
    let names = net.names().map(|n| {
        (
            keep.iter()
                .map(|&old| n.social[old as usize].clone())
                .collect(),
            n.attribute.clone(),
        )
    });
    SocialAttributeNetwork::from_raw_parts_unchecked(
        social_adj,
        pos_attr,
        neg_attr,
        net.n_attributes(),
        net.mutex_pairs().to_vec(),
        weights,
        net.attribute_node_weights().to_vec(),
        names,
    )
}

/// Connected components of the social graph; returns the largest one as
/// sorted node indices. Ties go to the component containing the smallest
/// node index, which makes the choice deterministic.
fn largest_component(net: &SocialAttributeNetwork, alive: &[bool]) -> Vec<u32> {
    let n = net.n_social();
    let mut seen = vec![false; n];
    let mut best: Vec<u32> = Vec::new();
    let mut stack = Vec::new();
    for start in 0..n {
        if !alive[start] || seen[start] {
            continue;
        }
        let mut comp = Vec::new();
        seen[start] = true;
        stack.push(start as u32);
        while let Some(u) = stack.pop() {
            comp.push(u);
            for &(v, _) in net.social_neighbors(u as usize) {
                if alive[v as usize] && !seen[v as usize] {
                    seen[v as usize] = true;
                    stack.push(v);
                }
            }
        }
        comp.sort_unstable();
        // Strict > keeps the earliest (smallest-min-index) component on ties.
        if comp.len() > best.len() {
            best = comp;
        }
    }
    best
}

/// Largest connected social component in which every node has at least `k`
/// distinct positive attributes.
///
/// Removing low-attribute nodes can disconnect the graph and shrinking to a
/// component can strand low-attribute nodes, so the two steps alternate to
/// a fixpoint; the result satisfies both conditions simultaneously. The
/// attribute universe is left unchanged (unused attributes simply have no
/// links).
pub fn select_core(net: &SocialAttributeNetwork, k: usize) -> Result<SocialAttributeNetwork> {
    let n = net.n_social();
    let mut alive = vec![true; n];
    loop {
        let mut changed = false;
        for u in 0..n {
            if alive[u] && net.positive_attributes(u).len() < k {
                alive[u] = false;
                changed = true;
            }
        }
        let component = largest_component(net, &alive);
        let comp_set: BTreeSet<u32> = component.iter().copied().collect();
        for u in 0..n {
            if alive[u] && !comp_set.contains(&(u as u32)) {
                alive[u] = false;
                changed = true;
            }
        }
        if !changed {
            let keep: Vec<u32> = (0..n as u32).filter(|&u| alive[u as usize]).collect();
            if keep.is_empty() {
                return Err(Error::EmptyCore { k });
            }
            return Ok(induce_social(net, &keep));
        }
    }
}

fn same_social_universe(a: &SocialAttributeNetwork, b: &SocialAttributeNetwork) -> bool {
    if a.n_social() != b.n_social() {
        return false;
    }
    match (a.names(), b.names()) {
        (Some(na), Some(nb)) => na.social == nb.social,
        _ => true,
    }
}

/// Union an earlier snapshot's social edges into a later one.
///
/// Social links observed at an earlier time rarely truly disappear, so the
/// later snapshot's edge set is completed with them; attribute links are
/// untouched. Requires `earlier.ordinal <= later.ordinal` (equality makes
/// the operation the identity) over the same node universe. Where both
/// snapshots carry the same edge, the later weight wins.
pub fn backfill_missing_links(earlier: &Snapshot, later: &Snapshot) -> Result<Snapshot> {
    if earlier.ordinal > later.ordinal {
        return Err(Error::precondition(format!(
            "backfill direction reversed: {} (ordinal {}) is later than {} (ordinal {})",
            earlier.label, earlier.ordinal, later.label, later.ordinal
        )));
    }
    if !same_social_universe(&earlier.network, &later.network) {
        return Err(Error::precondition(format!(
            "snapshots {} and {} cover different node universes",
            earlier.label, later.label
        )));
    }
    let n = later.network.n_social();
    let mut social_adj: Vec<Vec<(u32, f64)>> = Vec::with_capacity(n);
    for u in 0..n {
        let mut merged: BTreeMap<u32, f64> = earlier
            .network
            .social_neighbors(u)
            .iter()
            .copied()
            .collect();
        for &(v, w) in later.network.social_neighbors(u) {
            merged.insert(v, w);
        }
        social_adj.push(merged.into_iter().collect());
    }
    let m = later.network.n_attributes();
    let pos_attr = (0..n)
        .map(|u| later.network.positive_attributes(u).to_vec())
        .collect();
    let neg_attr = (0..n)
        .map(|u| later.network.negative_attributes(u).to_vec())
        .collect();
    let names = later
        .network
        .names()
        .map(|nm| (nm.social.clone(), nm.attribute.clone()));
    let network = SocialAttributeNetwork::from_raw_parts_unchecked(
        social_adj,
        pos_attr,
        neg_attr,
        m,
        later.network.mutex_pairs().to_vec(),
        later.network.social_node_weights().to_vec(),
        later.network.attribute_node_weights().to_vec(),
        names,
    );
    Ok(Snapshot::new(network, later.label.clone(), later.ordinal))
}

/// Which social edge set of a snapshot an experiment reads.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EdgeSet {
    /// Edges observed in the snapshot itself.
    Observed,
    /// Observed edges plus everything backfilled from earlier snapshots.
    Backfilled,
}

/// One snapshot's entry in a manifest. Paths are relative to the manifest
/// file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManifestEntry {
    pub label: String,
    pub ordinal: i64,
    pub edge_file: String,
    pub attribute_file: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mutex_file: Option<String>,
    /// Shared social-node universe; without it the universe is derived from
    /// the edge and attribute files, which may differ between snapshots.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub node_file: Option<String>,
    /// Backfilled ("all links") edge file, when precomputed.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub all_edge_file: Option<String>,
}

/// A parsed snapshot manifest plus the directory its paths resolve against.
#[derive(Debug, Clone, PartialEq)]
pub struct Manifest {
    pub entries: Vec<ManifestEntry>,
    base_dir: PathBuf,
}

impl Manifest {
    pub fn read(path: &Path) -> Result<Manifest> {
        let content = read_to_string(path)?;
        let entries: Vec<ManifestEntry> = serde_json::from_str(&content).map_err(|e| {
            Error::parse(path.display().to_string(), Some(e.line()), e.to_string())
        })?;
        let mut seen = BTreeSet::new();
        for entry in &entries {
            if !seen.insert(entry.label.clone()) {
                return Err(Error::parse(
                    path.display().to_string(),
                    None,
                    format!("duplicate snapshot label {:?}", entry.label),
                ));
            }
        }
        let base_dir = path.parent().unwrap_or(Path::new(".")).to_path_buf();
        Ok(Manifest { entries, base_dir })
    }

    pub fn entry(&self, label: &str) -> Result<&ManifestEntry> {
        self.entries
            .iter()
            .find(|e| e.label == label)
            .ok_or_else(|| {
                let known: Vec<&str> = self.entries.iter().map(|e| e.label.as_str()).collect();
                Error::precondition(format!(
                    "snapshot {label:?} not in manifest (known: {})",
                    known.join(", ")
                ))
            })
    }

    fn resolve(&self, rel: &str) -> PathBuf {
        self.base_dir.join(rel)
    }

    /// Load one snapshot with the requested edge set. Asking for
    /// [`EdgeSet::Backfilled`] when the manifest has no `all_edge_file`
    /// falls back to the observed edges with a warning.
    pub fn load(&self, label: &str, edge_set: EdgeSet) -> Result<Snapshot> {
        let entry = self.entry(label)?;
        let edge_path = match edge_set {
            EdgeSet::Observed => self.resolve(&entry.edge_file),
            EdgeSet::Backfilled => match &entry.all_edge_file {
                Some(f) => self.resolve(f),
                None => {
                    log::warn!(
                        "snapshot {label}: no all_edge_file; falling back to observed edges"
                    );
                    self.resolve(&entry.edge_file)
                }
            },
        };

        let edge_content = read_to_string(&edge_path)?;
        let edge_location = edge_path.display().to_string();
        let mut edges: Vec<(String, String)> = Vec::new();
        for (line_no, fields) in tsv_lines(&edge_content) {
            expect_fields(&edge_location, line_no, &fields, 2, 2)?;
            edges.push((fields[0].to_string(), fields[1].to_string()));
        }

        let records = parse_attribute_file(&self.resolve(&entry.attribute_file))?;
        let mutex = match &entry.mutex_file {
            Some(f) => parse_mutex_file(&self.resolve(f))?,
            None => Vec::new(),
        };

        let mut builder = NetworkBuilder::new();
        let fixed_universe = entry.node_file.is_some();
        if let Some(node_file) = &entry.node_file {
            for name in parse_node_file(&self.resolve(node_file))? {
                builder.social(&name);
            }
        }
        // With an explicit universe, references to unlisted nodes are data
        // errors; otherwise the universe grows as names appear.
        let social = |builder: &mut NetworkBuilder, name: &str, source: &str| {
            if fixed_universe {
                builder.social_lookup(name).ok_or_else(|| {
                    Error::parse(
                        source,
                        None,
                        format!("references node {name:?} missing from the node file"),
                    )
                })
            } else {
                Ok(builder.social(name))
            }
        };
        for (u, v) in &edges {
            let ur = social(&mut builder, u, &edge_location)?;
            let vr = social(&mut builder, v, &edge_location)?;
            builder.social_edge(ur, vr)?;
        }
        let attr_location = self.resolve(&entry.attribute_file).display().to_string();
        for r in &records {
            let ur = social(&mut builder, &r.user, &attr_location)?;
            let ar = builder.attribute(&r.attribute);
            builder.attribute_link(ur, ar, r.sign)?;
        }
        for (a, b) in &mutex {
            let ar = builder.attribute(a);
            let br = builder.attribute(b);
            builder.mutex(ar, br)?;
        }

        let network = builder.build()?;
        Ok(Snapshot::new(network, entry.label.clone(), entry.ordinal))
    }
}

/// Canonical on-disk form of a snapshot triple sharing one node universe,
/// one attribute universe, one set of attribute links and one mutex set.
/// Both the ingestion pipeline and the synthetic generator produce this.
#[derive(Debug, Clone, PartialEq)]
pub struct CanonicalTriple {
    pub nodes: Vec<String>,
    pub attributes: Vec<String>,
    /// `(user, attribute, sign)` links shared by every snapshot.
    pub attribute_links: Vec<(u32, u32, Sign)>,
    pub mutex: Vec<(u32, u32)>,
    pub snapshots: Vec<CanonicalSnapshot>,
}

/// One snapshot's edges inside a [`CanonicalTriple`].
#[derive(Debug, Clone, PartialEq)]
pub struct CanonicalSnapshot {
    pub label: String,
    pub ordinal: i64,
    /// Observed undirected edges, each once with u < v, sorted.
    pub edges: Vec<(u32, u32)>,
    /// Observed plus backfilled edges, same conventions.
    pub all_edges: Vec<(u32, u32)>,
}

/// Row of the ingest/generate statistics table.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SnapshotStats {
    pub label: String,
    pub social_links: usize,
    pub all_social_links: usize,
    pub social_nodes: usize,
    pub positive_attribute_links: usize,
    pub attribute_nodes: usize,
}

impl CanonicalTriple {
    /// Per-snapshot statistics (the ingest summary table).
    pub fn stats(&self) -> Vec<SnapshotStats> {
        self.snapshots
            .iter()
            .map(|s| SnapshotStats {
                label: s.label.clone(),
                social_links: s.edges.len(),
                all_social_links: s.all_edges.len(),
                social_nodes: self.nodes.len(),
                positive_attribute_links: self
                    .attribute_links
                    .iter()
                    .filter(|&&(_, _, sign)| sign == Sign::Positive)
                    .count(),
                attribute_nodes: self.attributes.len(),
            })
            .collect()
    }

    /// CSV rendering of [`CanonicalTriple::stats`].
    pub fn stats_csv(&self) -> String {
        let mut out = String::from(
            "label,social_links,all_social_links,social_nodes,positive_attribute_links,attribute_nodes\n",
        );
        for s in self.stats() {
            let _ = writeln!(
                out,
                "{},{},{},{},{},{}",
                s.label,
                s.social_links,
                s.all_social_links,
                s.social_nodes,
                s.positive_attribute_links,
                s.attribute_nodes
            );
        }
        out
    }

    /// Build the snapshots in memory, without touching the filesystem.
    ///
    /// Mirrors [`Manifest::load`] on the files [`CanonicalTriple::write`]
    /// emits: the social universe is the full node list and attribute
    /// indices follow first appearance in the link list, then the mutex
    /// list. An attribute with no links and no mutex membership therefore
    /// does not materialize, exactly as it would vanish in a write→load
    /// round trip.
    pub fn materialize(&self, edge_set: EdgeSet) -> Result<Vec<Snapshot>> {
        let mut out = Vec::with_capacity(self.snapshots.len());
        for snap in &self.snapshots {
            let mut builder = NetworkBuilder::new();
            for name in &self.nodes {
                builder.social(name);
            }
            let edges = match edge_set {
                EdgeSet::Observed => &snap.edges,
                EdgeSet::Backfilled => &snap.all_edges,
            };
            for &(u, v) in edges {
                builder.social_edge(
                    crate::graph::NodeRef::social(u as usize),
                    crate::graph::NodeRef::social(v as usize),
                )?;
            }
            for &(u, a, sign) in &self.attribute_links {
                let ar = builder.attribute(&self.attributes[a as usize]);
                builder.attribute_link(crate::graph::NodeRef::social(u as usize), ar, sign)?;
            }
            for &(a, b) in &self.mutex {
                let ar = builder.attribute(&self.attributes[a as usize]);
                let br = builder.attribute(&self.attributes[b as usize]);
                builder.mutex(ar, br)?;
            }
            out.push(Snapshot::new(builder.build()?, snap.label.clone(), snap.ordinal));
        }
        Ok(out)
    }

    /// Write all files plus `manifest.json` and `stats.csv` into `dir`;
    /// returns the manifest path. Output is byte-deterministic.
    pub fn write(&self, dir: &Path) -> Result<PathBuf> {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        let write = |name: &str, content: &str| -> Result<()> {
            let path = dir.join(name);
            fs::write(&path, content).map_err(|e| Error::io(path, e))
        };

        let mut nodes_out = String::new();
        for n in &self.nodes {
            let _ = writeln!(nodes_out, "{n}");
        }
        write("nodes.tsv", &nodes_out)?;

        let mut attr_out = String::new();
        for &(u, a, sign) in &self.attribute_links {
            let sign_str = match sign {
                Sign::Positive => "+1",
                Sign::Negative => "-1",
            };
            let _ = writeln!(
                attr_out,
                "{}\t{}\t{}",
                self.nodes[u as usize], self.attributes[a as usize], sign_str
            );
        }
        write("attributes.tsv", &attr_out)?;

        let mut mutex_out = String::new();
        for &(a, b) in &self.mutex {
            let _ = writeln!(
                mutex_out,
                "{}\t{}",
                self.attributes[a as usize], self.attributes[b as usize]
            );
        }
        write("mutex.tsv", &mutex_out)?;

        let mut entries = Vec::new();
        for snap in &self.snapshots {
            let edge_name = format!("{}_edges.tsv", snap.label.to_lowercase());
            let all_name = format!("{}_edges_all.tsv", snap.label.to_lowercase());
            for (name, edges) in [(&edge_name, &snap.edges), (&all_name, &snap.all_edges)] {
                let mut out = String::new();
                for &(u, v) in edges.iter() {
                    let _ = writeln!(out, "{}\t{}", self.nodes[u as usize], self.nodes[v as usize]);
                }
                write(name, &out)?;
            }
            entries.push(ManifestEntry {
                label: snap.label.clone(),
                ordinal: snap.ordinal,
                edge_file: edge_name,
                attribute_file: "attributes.tsv".to_string(),
                mutex_file: Some("mutex.tsv".to_string()),
                node_file: Some("nodes.tsv".to_string()),
                all_edge_file: Some(all_name),
            });
        }

        let manifest_path = dir.join("manifest.json");
        let json = serde_json::to_string_pretty(&entries)
            .expect("manifest serialization cannot fail");
        fs::write(&manifest_path, json + "\n").map_err(|e| Error::io(&manifest_path, e))?;
        write("stats.csv", &self.stats_csv())?;
        Ok(manifest_path)
    }
}

/// Raw input naming one snapshot's crawl files (pre-preprocessing).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RawSnapshotEntry {
    pub label: String,
    pub ordinal: i64,
    pub edge_file: String,
    /// Attribute statements; the earliest snapshot's file also defines the
    /// vocabulary.
    pub attribute_file: String,
}

/// Options for [`run_ingest`].
#[derive(Debug, Clone, Copy)]
pub struct IngestOptions {
    /// Minimum distinct-user positive frequency for the vocabulary.
    pub min_freq: usize,
    /// Minimum distinct positive attributes per core node.
    pub core_k: usize,
}

impl Default for IngestOptions {
    fn default() -> Self {
        IngestOptions {
            min_freq: 3,
            core_k: 4,
        }
    }
}

/// Full preprocessing pipeline: mutualize every snapshot, build the
/// vocabulary from the earliest snapshot, select its core, restrict every
/// snapshot to the core, and backfill later snapshots cumulatively.
pub fn run_ingest(
    raw: &[RawSnapshotEntry],
    base_dir: &Path,
    mutex_file: Option<&Path>,
    options: &IngestOptions,
) -> Result<CanonicalTriple> {
    if raw.is_empty() {
        return Err(Error::precondition("no raw snapshots given"));
    }
    let mut ordered: Vec<&RawSnapshotEntry> = raw.iter().collect();
    ordered.sort_by_key(|e| e.ordinal);

    // Mutual edges per snapshot, by name.
    let mut mutual: Vec<Vec<(String, String)>> = Vec::new();
    for entry in &ordered {
        let graph = parse_edge_file(&base_dir.join(&entry.edge_file))?;
        mutual.push(mutualize(&graph));
    }

    // Vocabulary and attribute links come from the earliest snapshot.
    let records = parse_attribute_file(&base_dir.join(&ordered[0].attribute_file))?;
    let vocab = build_vocabulary(&records, options.min_freq)?;

    // Earliest network over its own mutual-edge universe.
    let mut builder = NetworkBuilder::new();
    for (u, v) in &mutual[0] {
        let ur = builder.social(u);
        let vr = builder.social(v);
        builder.social_edge(ur, vr)?;
    }
    let mut linked: BTreeSet<(String, String, Sign)> = BTreeSet::new();
    for r in &records {
        if vocab.contains(&r.attribute) {
            linked.insert((r.user.clone(), r.attribute.clone(), r.sign));
        }
    }
    for (user, attr, sign) in &linked {
        if let Some(ur) = builder.social_lookup(user) {
            let ar = builder.attribute(attr);
            builder.attribute_link(ur, ar, *sign)?;
        }
    }
    let earliest = builder.build()?;

    // Core selection fixes the social universe for the whole triple.
    let core = select_core(&earliest, options.core_k)?;
    let core_names: Vec<String> = core
        .names()
        .expect("named construction")
        .social
        .clone();
    let core_set: BTreeSet<&str> = core_names.iter().map(|s| s.as_str()).collect();
    let name_to_id: HashMap<&str, u32> = core_names
        .iter()
        .enumerate()
        .map(|(i, n)| (n.as_str(), i as u32))
        .collect();

    // Attribute universe: vocabulary attributes actually linked to a core
    // user, renumbered by vocabulary order.
    let mut used_attrs: BTreeSet<&str> = BTreeSet::new();
    for (user, attr, _) in &linked {
        if core_set.contains(user.as_str()) {
            used_attrs.insert(attr.as_str());
        }
    }
    let attributes: Vec<String> = vocab
        .names()
        .iter()
        .filter(|n| used_attrs.contains(n.as_str()))
        .cloned()
        .collect();
    let attr_to_id: HashMap<&str, u32> = attributes
        .iter()
        .enumerate()
        .map(|(i, n)| (n.as_str(), i as u32))
        .collect();

    let mut attribute_links: Vec<(u32, u32, Sign)> = Vec::new();
    for (user, attr, sign) in &linked {
        if let (Some(&u), Some(&a)) = (
            name_to_id.get(user.as_str()),
            attr_to_id.get(attr.as_str()),
        ) {
            attribute_links.push((u, a, *sign));
        }
    }
    attribute_links.sort_unstable();

    let mutex: Vec<(u32, u32)> = match mutex_file {
        Some(path) => {
            let mut pairs = Vec::new();
            for (a, b) in parse_mutex_file(path)? {
                if let (Some(&ai), Some(&bi)) =
                    (attr_to_id.get(a.as_str()), attr_to_id.get(b.as_str()))
                {
                    pairs.push((ai.min(bi), ai.max(bi)));
                }
            }
            pairs.sort_unstable();
            pairs.dedup();
            pairs
        }
        None => Vec::new(),
    };

    // Snapshot edges restricted to the core, then cumulative backfill.
    let mut snapshots = Vec::new();
    let mut cumulative: BTreeSet<(u32, u32)> = BTreeSet::new();
    for (entry, edges) in ordered.iter().zip(&mutual) {
        let mut observed: Vec<(u32, u32)> = edges
            .iter()
            .filter_map(|(u, v)| {
                match (name_to_id.get(u.as_str()), name_to_id.get(v.as_str())) {
                    (Some(&ui), Some(&vi)) => Some((ui.min(vi), ui.max(vi))),
                    _ => None,
                }
            })
            .collect();
        observed.sort_unstable();
        observed.dedup();
        cumulative.extend(observed.iter().copied());
        snapshots.push(CanonicalSnapshot {
            label: entry.label.clone(),
            ordinal: entry.ordinal,
            edges: observed,
            all_edges: cumulative.iter().copied().collect(),
        });
    }

    Ok(CanonicalTriple {
        nodes: core_names,
        attributes,
        attribute_links,
        mutex,
        snapshots,
    })
}
