//! Structural properties of a discussion: redundancy, topic dispersion,
//! chronological coherence and degree of hierarchy.

use std::collections::HashMap;
use std::fmt;
use std::hash::Hash;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dedup::{DedupError, DuplicateFlags};
use crate::thread::{PostId, Shape, Thread, ThreadError, TopicLabel};
use crate::topics::TopicAssignment;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MetricsError {
    #[error("duplicate count {duplicates} exceeds post count {total}")]
    TooManyDuplicates { total: usize, duplicates: usize },
    #[error("every one of the {0} posts is flagged as a duplicate")]
    AllPostsDuplicates(usize),
    #[error("topic assignment names post `{0}`, which is not in the thread")]
    UnknownPostInAssignment(PostId),
    #[error("orderings are not permutations of the same posts")]
    NotAPermutation,
    #[error("topic list is empty")]
    EmptyTopicList,
    #[error("topic sizes must be at least 1")]
    EmptyTopic,
    #[error(transparent)]
    Thread(#[from] ThreadError),
    #[error("invalid duplicate flags: {0}")]
    Flags(#[from] DedupError),
}

/// `N_d / (N - N_d)`; zero for an empty thread.
pub fn redundancy_factor(total: usize, duplicates: usize) -> Result<f64, MetricsError> {
    if duplicates > total {
        return Err(MetricsError::TooManyDuplicates { total, duplicates });
    }
    if total == 0 {
        return Ok(0.0);
    }
    if duplicates == total {
        return Err(MetricsError::AllPostsDuplicates(total));
    }
    Ok(duplicates as f64 / (total - duplicates) as f64)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RedundancyStats {
    #[serde(rename = "n")]
    pub total_posts: usize,
    #[serde(rename = "n_d")]
    pub duplicate_posts: usize,
    #[serde(rename = "r")]
    pub redundancy: f64,
}

impl RedundancyStats {
    pub fn compute(total: usize, duplicates: usize) -> Result<Self, MetricsError> {
        Ok(Self {
            total_posts: total,
            duplicate_posts: duplicates,
            redundancy: redundancy_factor(total, duplicates)?,
        })
    }
}

/// How posts are placed on a line before measuring dispersion.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Projection {
    /// Zero-based position in the preorder traversal.
    #[default]
    DfsIndex,
    /// Number of ancestors (first-level posts sit at 0).
    Depth,
}

impl FromStr for Projection {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "dfs" | "dfs_index" => Ok(Self::DfsIndex),
            "depth" => Ok(Self::Depth),
            other => Err(format!("unknown projection `{other}` (expected `dfs` or `depth`)")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TopicStats {
    pub topic: TopicLabel,
    #[serde(rename = "count")]
    pub post_count: usize,
    #[serde(skip)]
    pub positions: Vec<f64>,
    pub dispersion: f64,
}

/// Population standard deviation; 0 for fewer than two values.
pub fn population_std(values: &[f64]) -> f64 {
    if values.len() < 2 {
        return 0.0;
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
    var.sqrt()
}

/// Per-topic spread of posts along the chosen projection.
pub fn topic_dispersion(
    thread: &Thread,
    assignment: &TopicAssignment,
    projection: Projection,
) -> Result<Vec<TopicStats>, MetricsError> {
    let mut buckets: Vec<(TopicLabel, Vec<f64>)> = assignment
        .topic_set()
        .iter()
        .map(|t| (t.clone(), Vec::new()))
        .collect();
    let slot: HashMap<&TopicLabel, usize> = assignment
        .topic_set()
        .iter()
        .enumerate()
        .map(|(i, t)| (t, i))
        .collect();

    for entry in assignment.entries() {
        let pos = thread
            .position(&entry.post)
            .map_err(|_| MetricsError::UnknownPostInAssignment(entry.post.clone()))?;
        let coord = match projection {
            Projection::DfsIndex => thread.preorder_pos_at(pos),
            Projection::Depth => thread.depth_at(pos) - 1,
        };
        buckets[slot[&entry.topic]].1.push(coord as f64);
    }

    Ok(buckets
        .into_iter()
        .map(|(topic, positions)| TopicStats {
            topic,
            post_count: positions.len(),
            dispersion: population_std(&positions),
            positions,
        })
        .collect())
}

/// Normalized Kendall tau distance between two orderings of the same items:
/// discordant pairs over `n(n-1)/2`, and 0 when `n <= 1`.
pub fn chronological_coherence<T: Eq + Hash>(actual: &[T], ideal: &[T]) -> Result<f64, MetricsError> {
    if actual.len() != ideal.len() {
        return Err(MetricsError::NotAPermutation);
    }
    let rank: HashMap<&T, usize> = ideal.iter().enumerate().map(|(i, x)| (x, i)).collect();
    if rank.len() != ideal.len() {
        return Err(MetricsError::NotAPermutation);
    }
    let mut seq = Vec::with_capacity(actual.len());
    let mut seen = vec![false; ideal.len()];
    for item in actual {
        let &r = rank.get(item).ok_or(MetricsError::NotAPermutation)?;
        if std::mem::replace(&mut seen[r], true) {
            return Err(MetricsError::NotAPermutation);
        }
        seq.push(r);
    }
    let n = seq.len();
    if n <= 1 {
        return Ok(0.0);
    }
    let discordant = count_inversions(&mut seq);
    Ok(discordant as f64 / (n * (n - 1) / 2) as f64)
}

/// Merge-sort inversion count; sorts `seq` in place.
fn count_inversions(seq: &mut [usize]) -> u64 {
    let n = seq.len();
    if n < 2 {
        return 0;
    }
    let mid = n / 2;
    let mut inv = count_inversions(&mut seq[..mid]) + count_inversions(&mut seq[mid..]);
    let mut merged = Vec::with_capacity(n);
    let (mut i, mut j) = (0, mid);
    while i < mid && j < n {
        if seq[i] <= seq[j] {
            merged.push(seq[i]);
            i += 1;
        } else {
            inv += (mid - i) as u64;
            merged.push(seq[j]);
            j += 1;
        }
    }
    merged.extend_from_slice(&seq[i..mid]);
    merged.extend_from_slice(&seq[j..]);
    seq.copy_from_slice(&merged);
    inv
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HierarchyStats {
    #[serde(rename = "d")]
    pub depth: usize,
    #[serde(rename = "b")]
    pub breadth: usize,
    #[serde(rename = "h")]
    pub hierarchy_degree: f64,
}

impl HierarchyStats {
    fn zero() -> Self {
        Self {
            depth: 0,
            breadth: 0,
            hierarchy_degree: 0.0,
        }
    }
}

/// `h = d / b` for a thread or sub-thread.
pub fn degree_of_hierarchy(scope: &impl Shape) -> Result<HierarchyStats, MetricsError> {
    let depth = scope.max_depth()?;
    let breadth = scope.breadth()?;
    Ok(HierarchyStats {
        depth,
        breadth,
        hierarchy_degree: depth as f64 / breadth as f64,
    })
}

/// `max_i N_i / M`: the degree of hierarchy when every topic is one chain
/// and `M` is the number of topics.
pub fn hierarchical_reference(topic_counts: &[usize]) -> Result<f64, MetricsError> {
    if topic_counts.is_empty() {
        return Err(MetricsError::EmptyTopicList);
    }
    if topic_counts.contains(&0) {
        return Err(MetricsError::EmptyTopic);
    }
    let max = *topic_counts.iter().max().expect("non-empty");
    Ok(max as f64 / topic_counts.len() as f64)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SubThreadHierarchy {
    pub root: PostId,
    #[serde(flatten)]
    pub stats: HierarchyStats,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub redundancy: RedundancyStats,
    pub hierarchy: HierarchyStats,
    /// One entry per first-level sub-thread. Text output only.
    #[serde(skip)]
    pub subthreads: Vec<SubThreadHierarchy>,
    pub topics: Vec<TopicStats>,
    pub chronological_coherence: Option<f64>,
}

impl MetricsReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

/// Computes every metric for one thread.
///
/// Redundancy counts `flags` against all posts; dispersion and hierarchy are
/// measured on the thread as given. Chronological coherence compares the
/// chronological post order with `ideal_order` and is omitted without it.
pub fn metrics_report(
    thread: &Thread,
    assignment: &TopicAssignment,
    flags: &DuplicateFlags,
    ideal_order: Option<&[PostId]>,
    projection: Projection,
) -> Result<MetricsReport, MetricsError> {
    flags.validate(thread)?;
    let redundancy = RedundancyStats::compute(thread.len(), flags.len())?;
    let topics = topic_dispersion(thread, assignment, projection)?;
    let hierarchy = if thread.is_empty() {
        HierarchyStats::zero()
    } else {
        degree_of_hierarchy(thread)?
    };
    let subthreads = thread
        .first_level_subthreads()
        .iter()
        .map(|sub| {
            Ok(SubThreadHierarchy {
                root: sub.root().clone(),
                stats: degree_of_hierarchy(sub)?,
            })
        })
        .collect::<Result<_, MetricsError>>()?;
    let chronological_coherence = match ideal_order {
        Some(ideal) => {
            let actual: Vec<&PostId> = thread.posts().iter().map(|p| &p.id).collect();
            let ideal: Vec<&PostId> = ideal.iter().collect();
            Some(chronological_coherence(&actual, &ideal)?)
        }
        None => None,
    };
    Ok(MetricsReport {
        redundancy,
        hierarchy,
        subthreads,
        topics,
        chronological_coherence,
    })
}

/// Human-readable rendering, two decimals throughout.
impl fmt::Display for MetricsReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let r = &self.redundancy;
        let h = &self.hierarchy;
        writeln!(f, "posts:        N = {}", r.total_posts)?;
        writeln!(f, "duplicates:   N_d = {}", r.duplicate_posts)?;
        writeln!(f, "redundancy:   r = {:.2}", r.redundancy)?;
        writeln!(f, "hierarchy:    h = {:.2} (d = {}, b = {})", h.hierarchy_degree, h.depth, h.breadth)?;
        if !self.subthreads.is_empty() {
            writeln!(f, "sub-threads:")?;
            for sub in &self.subthreads {
                writeln!(
                    f,
                    "  {:<12} h = {:.2} (d = {}, b = {})",
                    sub.root.as_str(),
                    sub.stats.hierarchy_degree,
                    sub.stats.depth,
                    sub.stats.breadth
                )?;
            }
        }
        writeln!(f, "topics:       M = {}", self.topics.len())?;
        for t in &self.topics {
            writeln!(
                f,
                "  {:<12} N_j = {:<4} dispersion = {:.2}",
                t.topic.as_str(),
                t.post_count,
                t.dispersion
            )?;
        }
        match self.chronological_coherence {
            Some(c) => writeln!(f, "chronological coherence: {c:.2}"),
            None => writeln!(f, "chronological coherence: n/a"),
        }
    }
}
