//! Topic assignments: validated human labels, or a keyword-clustering baseline
//! for unlabeled threads.

use std::collections::{BTreeMap, HashMap};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::text::{is_stopword, normalize_words};
use crate::thread::{PostId, Thread, TopicLabel};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum TopicError {
    #[error("no post carries a topic label")]
    NoLabelsPresent,
    #[error("cannot cluster an empty thread")]
    EmptyThread,
    #[error("link threshold must lie in (0, 1), got {0}")]
    ThresholdOutOfRange(f64),
    #[error("assignment names unknown post `{0}`")]
    UnknownPost(PostId),
    #[error("post `{0}` is assigned twice")]
    RepeatedPost(PostId),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TopicEntry {
    pub post: PostId,
    pub topic: TopicLabel,
}

/// Post → topic mapping for one thread.
///
/// Entries are kept in the thread's chronological order and the topic set
/// is ordered by each topic's earliest post.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct TopicAssignment {
    entries: Vec<TopicEntry>,
    lookup: HashMap<PostId, usize>,
    topic_set: Vec<TopicLabel>,
}

impl TopicAssignment {
    pub fn empty() -> Self {
        Self::default()
    }

    /// Validates `pairs` against `thread`.
    pub fn new(
        thread: &Thread,
        pairs: impl IntoIterator<Item = (PostId, TopicLabel)>,
    ) -> Result<Self, TopicError> {
        let mut by_post: HashMap<PostId, TopicLabel> = HashMap::new();
        for (post, topic) in pairs {
            if !thread.contains(&post) {
                return Err(TopicError::UnknownPost(post));
            }
            if by_post.contains_key(&post) {
                return Err(TopicError::RepeatedPost(post));
            }
            by_post.insert(post, topic);
        }
        let mut out = Self::default();
        for post in thread.posts() {
            if let Some(topic) = by_post.remove(&post.id) {
                if !out.topic_set.contains(&topic) {
                    out.topic_set.push(topic.clone());
                }
                out.lookup.insert(post.id.clone(), out.entries.len());
                out.entries.push(TopicEntry {
                    post: post.id.clone(),
                    topic,
                });
            }
        }
        Ok(out)
    }

    /// The distinct labels; `M` is its length.
    pub fn topic_set(&self) -> &[TopicLabel] {
        &self.topic_set
    }

    pub fn entries(&self) -> &[TopicEntry] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn topic_of(&self, id: &PostId) -> Option<&TopicLabel> {
        self.lookup.get(id).map(|&i| &self.entries[i].topic)
    }

    /// Members of `topic`, chronologically.
    pub fn members(&self, topic: &TopicLabel) -> impl Iterator<Item = &PostId> {
        let topic = topic.clone();
        self.entries
            .iter()
            .filter(move |e| e.topic == topic)
            .map(|e| &e.post)
    }

    /// `N_j` for every topic, in topic-set order.
    pub fn counts(&self) -> Vec<usize> {
        self.topic_set
            .iter()
            .map(|t| self.entries.iter().filter(|e| &e.topic == t).count())
            .collect()
    }

    /// Posts of `thread` without a label.
    pub fn unassigned<'t>(&self, thread: &'t Thread) -> Vec<&'t PostId> {
        thread
            .posts()
            .iter()
            .map(|p| &p.id)
            .filter(|id| !self.lookup.contains_key(*id))
            .collect()
    }

    /// Keeps only entries whose post is still in `thread`.
    pub fn restricted_to(&self, thread: &Thread) -> Self {
        let pairs = self
            .entries
            .iter()
            .filter(|e| thread.contains(&e.post))
            .map(|e| (e.post.clone(), e.topic.clone()));
        Self::new(thread, pairs).expect("subset of a valid assignment")
    }

    /// Parses `{"topics": [{"post": ..., "topic": ...}]}` and validates it.
    pub fn from_json(thread: &Thread, json: &str) -> Result<Self, AssignmentJsonError> {
        let doc: AssignmentDoc = serde_json::from_str(json)?;
        Ok(Self::new(
            thread,
            doc.topics.into_iter().map(|e| (e.post, e.topic)),
        )?)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&AssignmentDocRef {
            topics: &self.entries,
        })
        .expect("assignment serializes")
    }
}

#[derive(Debug, Error)]
pub enum AssignmentJsonError {
    #[error("malformed assignment JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Invalid(#[from] TopicError),
}

#[derive(Deserialize)]
struct AssignmentDoc {
    topics: Vec<TopicEntry>,
}

#[derive(Serialize)]
struct AssignmentDocRef<'a> {
    topics: &'a [TopicEntry],
}

/// Collects the labels carried by the posts. Unlabeled posts are left out;
/// see [`TopicAssignment::unassigned`].
pub fn assignment_from_labels(thread: &Thread) -> Result<TopicAssignment, TopicError> {
    let pairs: Vec<_> = thread
        .posts()
        .iter()
        .filter_map(|p| p.topic.clone().map(|t| (p.id.clone(), t)))
        .collect();
    if pairs.is_empty() {
        return Err(TopicError::NoLabelsPresent);
    }
    TopicAssignment::new(thread, pairs)
}

pub const DEFAULT_LINK_THRESHOLD: f64 = 0.3;

/// Term-frequency vector of a post body: normalized words minus stopwords.
pub fn term_frequencies(body: &str) -> BTreeMap<String, f64> {
    let mut tf = BTreeMap::new();
    for word in normalize_words(body) {
        if !is_stopword(&word) {
            *tf.entry(word).or_insert(0.0) += 1.0;
        }
    }
    tf
}

/// Cosine similarity of two sparse vectors; 0 when either is all zeros.
pub fn cosine(a: &BTreeMap<String, f64>, b: &BTreeMap<String, f64>) -> f64 {
    let (small, large) = if a.len() <= b.len() { (a, b) } else { (b, a) };
    let dot: f64 = small
        .iter()
        .filter_map(|(k, x)| large.get(k).map(|y| x * y))
        .sum();
    let norm = |v: &BTreeMap<String, f64>| v.values().map(|x| x * x).sum::<f64>().sqrt();
    let (na, nb) = (norm(a), norm(b));
    if na == 0.0 || nb == 0.0 {
        return 0.0;
    }
    dot / (na * nb)
}

/// Single-link agglomerative clustering over term-frequency cosine.
///
/// Two posts link when their cosine similarity is at least `link_threshold`;
/// each connected component becomes a topic `C1`, `C2`, ... numbered by its
/// earliest post.
pub fn cluster_keywords(thread: &Thread, link_threshold: f64) -> Result<TopicAssignment, TopicError> {
    if !(link_threshold > 0.0 && link_threshold < 1.0) {
        return Err(TopicError::ThresholdOutOfRange(link_threshold));
    }
    if thread.is_empty() {
        return Err(TopicError::EmptyThread);
    }
    let posts = thread.posts();
    let vectors: Vec<_> = posts.iter().map(|p| term_frequencies(&p.body)).collect();

    let mut components = DisjointSets::new(posts.len());
    for i in 0..posts.len() {
        for j in (i + 1)..posts.len() {
            if cosine(&vectors[i], &vectors[j]) >= link_threshold {
                components.union(i, j);
            }
        }
    }

    let mut labels: HashMap<usize, TopicLabel> = HashMap::new();
    let mut pairs = Vec::with_capacity(posts.len());
    for (i, post) in posts.iter().enumerate() {
        let root = components.find(i);
        let next = labels.len() + 1;
        let label = labels
            .entry(root)
            .or_insert_with(|| TopicLabel::new(format!("C{next}")).expect("non-empty"))
            .clone();
        pairs.push((post.id.clone(), label));
    }
    TopicAssignment::new(thread, pairs)
}

struct DisjointSets {
    parent: Vec<usize>,
}

impl DisjointSets {
    fn new(n: usize) -> Self {
        Self {
            parent: (0..n).collect(),
        }
    }

    fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            let (lo, hi) = if ra < rb { (ra, rb) } else { (rb, ra) };
            self.parent[hi] = lo;
        }
    }
}
