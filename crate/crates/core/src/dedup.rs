//! Duplicate-post detection.
//!
//! A later post is a duplicate of an earlier one when their word-shingle
//! sets overlap with Jaccard similarity at or above a threshold. Explicit
//! `duplicate_of` annotations on posts are taken as given.

use std::collections::{BTreeSet, HashMap};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::text::normalize_words;
use crate::thread::{PostId, Thread};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DedupError {
    #[error("shingle size must be at least 1")]
    ZeroShingleSize,
    #[error("similarity threshold must lie in (0, 1], got {0}")]
    ThresholdOutOfRange(f64),
    #[error("post `{0}` is flagged more than once")]
    RepeatedPost(PostId),
    #[error("flagged post `{0}` is not in the thread")]
    UnknownPost(PostId),
    #[error("original `{original}` of `{post}` is not in the thread")]
    UnknownOriginal { post: PostId, original: PostId },
    #[error("`{post}` is not strictly later than its original `{original}`")]
    NotLater { post: PostId, original: PostId },
    #[error("`{0}` is flagged as a duplicate and also serves as an original")]
    Chained(PostId),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimilarityConfig {
    shingle_size: usize,
    threshold: f64,
}

impl SimilarityConfig {
    pub const DEFAULT_SHINGLE_SIZE: usize = 3;
    pub const DEFAULT_THRESHOLD: f64 = 0.8;

    pub fn new(shingle_size: usize, threshold: f64) -> Result<Self, DedupError> {
        if shingle_size == 0 {
            return Err(DedupError::ZeroShingleSize);
        }
        if !(threshold > 0.0 && threshold <= 1.0) {
            return Err(DedupError::ThresholdOutOfRange(threshold));
        }
        Ok(Self {
            shingle_size,
            threshold,
        })
    }

    pub fn shingle_size(&self) -> usize {
        self.shingle_size
    }

    pub fn threshold(&self) -> f64 {
        self.threshold
    }
}

impl Default for SimilarityConfig {
    fn default() -> Self {
        Self {
            shingle_size: Self::DEFAULT_SHINGLE_SIZE,
            threshold: Self::DEFAULT_THRESHOLD,
        }
    }
}

/// Set of `k`-word shingles of the normalized text.
///
/// Text with fewer than `k` words yields a single shingle of all its words;
/// empty text yields the empty set.
pub fn shingles(body: &str, k: usize) -> BTreeSet<String> {
    let k = k.max(1);
    let words = normalize_words(body);
    if words.is_empty() {
        return BTreeSet::new();
    }
    if words.len() < k {
        return BTreeSet::from([words.join(" ")]);
    }
    words.windows(k).map(|w| w.join(" ")).collect()
}

/// `|a ∩ b| / |a ∪ b|`, with two empty sets counting as identical.
pub fn jaccard<T: Ord>(a: &BTreeSet<T>, b: &BTreeSet<T>) -> f64 {
    if a.is_empty() && b.is_empty() {
        return 1.0;
    }
    let shared = a.intersection(b).count();
    let union = a.len() + b.len() - shared;
    shared as f64 / union as f64
}

/// One flagged pair: `post` duplicates the earlier `of`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DuplicatePair {
    pub post: PostId,
    pub of: PostId,
    /// Similarity that triggered the flag; `None` for annotated pairs.
    pub score: Option<f64>,
}

/// Duplicate posts mapped to the originals they repeat.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(from = "FlagsDoc", into = "FlagsDoc")]
pub struct DuplicateFlags {
    pairs: Vec<DuplicatePair>,
    index: HashMap<PostId, usize>,
}

#[derive(Serialize, Deserialize)]
struct FlagsDoc {
    duplicates: Vec<DuplicatePair>,
}

impl From<FlagsDoc> for DuplicateFlags {
    fn from(doc: FlagsDoc) -> Self {
        let mut flags = DuplicateFlags::default();
        for pair in doc.duplicates {
            flags.push(pair);
        }
        flags
    }
}

impl From<DuplicateFlags> for FlagsDoc {
    fn from(flags: DuplicateFlags) -> Self {
        FlagsDoc {
            duplicates: flags.pairs,
        }
    }
}

impl DuplicateFlags {
    pub fn empty() -> Self {
        Self::default()
    }

    /// Builds flags from explicit pairs. Call [`DuplicateFlags::validate`]
    /// before trusting them against a thread.
    pub fn from_pairs(pairs: impl IntoIterator<Item = DuplicatePair>) -> Self {
        let mut flags = Self::default();
        for pair in pairs {
            flags.push(pair);
        }
        flags
    }

    fn push(&mut self, pair: DuplicatePair) {
        self.index.entry(pair.post.clone()).or_insert(self.pairs.len());
        self.pairs.push(pair);
    }

    /// Number of duplicate posts, `N_d`.
    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn pairs(&self) -> &[DuplicatePair] {
        &self.pairs
    }

    pub fn is_flagged(&self, id: &PostId) -> bool {
        self.index.contains_key(id)
    }

    pub fn original_of(&self, id: &PostId) -> Option<&PostId> {
        self.index.get(id).map(|&i| &self.pairs[i].of)
    }

    /// Checks every pair against `thread`: both ends exist, the duplicate is
    /// strictly later, no post is flagged twice, and no original is itself
    /// flagged.
    pub fn validate(&self, thread: &Thread) -> Result<(), DedupError> {
        if self.index.len() != self.pairs.len() {
            let mut seen = BTreeSet::new();
            for p in &self.pairs {
                if !seen.insert(&p.post) {
                    return Err(DedupError::RepeatedPost(p.post.clone()));
                }
            }
        }
        for p in &self.pairs {
            let dup = thread
                .post(&p.post)
                .map_err(|_| DedupError::UnknownPost(p.post.clone()))?;
            let orig = thread.post(&p.of).map_err(|_| DedupError::UnknownOriginal {
                post: p.post.clone(),
                original: p.of.clone(),
            })?;
            if dup.timestamp <= orig.timestamp {
                return Err(DedupError::NotLater {
                    post: p.post.clone(),
                    original: p.of.clone(),
                });
            }
            if self.is_flagged(&p.of) {
                return Err(DedupError::Chained(p.of.clone()));
            }
        }
        Ok(())
    }
}

/// Flags only the posts carrying a `duplicate_of` annotation.
///
/// Annotations that point at another annotated duplicate are resolved to
/// that post's original, so the result never contains chains.
pub fn flags_from_annotations(thread: &Thread) -> DuplicateFlags {
    let mut flags = DuplicateFlags::default();
    for post in thread.posts() {
        if let Some(target) = &post.duplicate_of {
            let of = resolve(&flags, target);
            flags.push(DuplicatePair {
                post: post.id.clone(),
                of,
                score: None,
            });
        }
    }
    flags
}

fn resolve(flags: &DuplicateFlags, target: &PostId) -> PostId {
    // Originals are never flagged, so one hop suffices.
    flags.original_of(target).unwrap_or(target).clone()
}

/// Scans posts chronologically and flags each one against the earliest
/// earlier, unflagged post whose shingle similarity reaches the threshold.
pub fn detect_duplicates(thread: &Thread, config: &SimilarityConfig) -> DuplicateFlags {
    let posts = thread.posts();
    let sets: Vec<BTreeSet<String>> = posts
        .iter()
        .map(|p| shingles(&p.body, config.shingle_size))
        .collect();

    let mut flags = DuplicateFlags::default();
    let mut retained: Vec<usize> = Vec::new();
    for (j, post) in posts.iter().enumerate() {
        if let Some(target) = &post.duplicate_of {
            let of = resolve(&flags, target);
            flags.push(DuplicatePair {
                post: post.id.clone(),
                of,
                score: None,
            });
            continue;
        }
        let hit = retained
            .iter()
            .filter(|&&i| posts[i].timestamp < post.timestamp)
            .map(|&i| (i, jaccard(&sets[i], &sets[j])))
            .find(|&(_, score)| score >= config.threshold);
        match hit {
            Some((i, score)) => flags.push(DuplicatePair {
                post: post.id.clone(),
                of: posts[i].id.clone(),
                score: Some(score),
            }),
            None => retained.push(j),
        }
    }
    flags
}
