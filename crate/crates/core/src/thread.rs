//! Tree model for threaded discussions.
//!
//! A [`Thread`] is a forest of [`Post`]s rooted at the first-level posts.
//! Posts are kept in chronological order (stable on ties), and the derived
//! indexes (children, depth, preorder position) are computed once at build
//! time so that every metric can work off immutable lookups.

use std::collections::HashMap;
use std::fmt;

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Identifier of a post, unique within its thread.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct PostId(String);

impl PostId {
    pub fn new(value: impl Into<String>) -> Result<Self, ThreadError> {
        let value = value.into();
        if value.is_empty() {
            return Err(ThreadError::EmptyId);
        }
        Ok(Self(value))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl TryFrom<String> for PostId {
    type Error = ThreadError;

    fn try_from(value: String) -> Result<Self, Self::Error> {
        Self::new(value)
    }
}

impl From<PostId> for String {
    fn from(id: PostId) -> Self {
        id.0
    }
}

impl fmt::Display for PostId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

/// Topic (or stance) label attached to a post, e.g. `T3`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct TopicLabel(String);

impl TopicLabel {
    pub fn new(value: impl Into<String>) -> Result<Self, ThreadError> {
        let value = value.into();
        if value.is_empty() {
            return Err(ThreadError::EmptyLabel);
        }
        Ok(Self(value))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl TryFrom<String> for TopicLabel {
    type Error = ThreadError;

    fn try_from(value: String) -> Result<Self, Self::Error> {
        Self::new(value)
    }
}

impl From<TopicLabel> for String {
    fn from(label: TopicLabel) -> Self {
        label.0
    }
}

impl fmt::Display for TopicLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

/// One contribution to a discussion.
#[derive(Debug, Clone, PartialEq)]
pub struct Post {
    pub id: PostId,
    /// `None` for first-level posts.
    pub parent: Option<PostId>,
    pub author: String,
    pub timestamp: DateTime<Utc>,
    pub body: String,
    pub topic: Option<TopicLabel>,
    pub duplicate_of: Option<PostId>,
}

impl Post {
    /// A first-level post with no topic and no duplicate annotation.
    pub fn new(
        id: PostId,
        author: impl Into<String>,
        timestamp: DateTime<Utc>,
        body: impl Into<String>,
    ) -> Self {
        Self {
            id,
            parent: None,
            author: author.into(),
            timestamp,
            body: body.into(),
            topic: None,
            duplicate_of: None,
        }
    }

    pub fn with_parent(mut self, parent: PostId) -> Self {
        self.parent = Some(parent);
        self
    }

    pub fn with_topic(mut self, topic: TopicLabel) -> Self {
        self.topic = Some(topic);
        self
    }

    pub fn with_duplicate_of(mut self, original: PostId) -> Self {
        self.duplicate_of = Some(original);
        self
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ThreadError {
    #[error("post id must not be empty")]
    EmptyId,
    #[error("topic label must not be empty")]
    EmptyLabel,
    #[error("duplicate post id `{0}`")]
    DuplicateId(PostId),
    #[error("post `{post}` names unknown parent `{parent}`")]
    UnknownParent { post: PostId, parent: PostId },
    #[error("reply cycle among posts {}", join_ids(.0))]
    CycleDetected(Vec<PostId>),
    #[error("post `{post}` is marked as duplicate of unknown post `{original}`")]
    UnknownDuplicateTarget { post: PostId, original: PostId },
    #[error("post `{post}` is marked as duplicate of `{original}`, which is not strictly earlier")]
    DuplicateNotLater { post: PostId, original: PostId },
    #[error("unknown post `{0}`")]
    UnknownPost(PostId),
    #[error("sub-thread is empty")]
    EmptySubThread,
}

fn join_ids(ids: &[PostId]) -> String {
    ids.iter()
        .map(PostId::as_str)
        .collect::<Vec<_>>()
        .join(", ")
}

/// Non-fatal findings recorded while building a thread.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Warning {
    TimestampBeforeParent { post: PostId, parent: PostId },
    EmptyBody(PostId),
}

impl fmt::Display for Warning {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Warning::TimestampBeforeParent { post, parent } => {
                write!(f, "post `{post}` is timestamped before its parent `{parent}`")
            }
            Warning::EmptyBody(id) => write!(f, "post `{id}` has an empty body"),
        }
    }
}

/// A validated discussion tree.
///
/// Immutable once built. Internally posts are addressed by their position in
/// chronological order.
#[derive(Debug, Clone)]
pub struct Thread {
    thread_id: String,
    posts: Vec<Post>,
    index: HashMap<PostId, usize>,
    parent: Vec<Option<usize>>,
    children: Vec<Vec<usize>>,
    roots: Vec<usize>,
    depth: Vec<usize>,
    preorder: Vec<usize>,
    preorder_pos: Vec<usize>,
    warnings: Vec<Warning>,
}

impl PartialEq for Thread {
    fn eq(&self, other: &Self) -> bool {
        self.thread_id == other.thread_id && self.posts == other.posts
    }
}

impl Thread {
    /// Validates `records` and materializes the tree.
    ///
    /// Records may arrive in any order; they are sorted by timestamp with
    /// ties kept in input order.
    pub fn build(thread_id: impl Into<String>, mut records: Vec<Post>) -> Result<Self, ThreadError> {
        records.sort_by_key(|p| p.timestamp);
        let posts = records;

        let mut index = HashMap::with_capacity(posts.len());
        for (i, post) in posts.iter().enumerate() {
            if index.insert(post.id.clone(), i).is_some() {
                return Err(ThreadError::DuplicateId(post.id.clone()));
            }
        }

        let mut parent = Vec::with_capacity(posts.len());
        let mut warnings = Vec::new();
        for post in &posts {
            let resolved = match &post.parent {
                None => None,
                Some(pid) => match index.get(pid) {
                    Some(&j) => Some(j),
                    None => {
                        return Err(ThreadError::UnknownParent {
                            post: post.id.clone(),
                            parent: pid.clone(),
                        })
                    }
                },
            };
            parent.push(resolved);
        }

        for (i, post) in posts.iter().enumerate() {
            if let Some(orig) = &post.duplicate_of {
                let Some(&j) = index.get(orig) else {
                    return Err(ThreadError::UnknownDuplicateTarget {
                        post: post.id.clone(),
                        original: orig.clone(),
                    });
                };
                if posts[j].timestamp >= posts[i].timestamp {
                    return Err(ThreadError::DuplicateNotLater {
                        post: post.id.clone(),
                        original: orig.clone(),
                    });
                }
            }
        }

        let mut children = vec![Vec::new(); posts.len()];
        let mut roots = Vec::new();
        for (i, p) in parent.iter().enumerate() {
            match p {
                Some(j) => children[*j].push(i),
                None => roots.push(i),
            }
        }

        // Preorder from the first-level posts; anything left unvisited hangs
        // off a cycle.
        let mut depth = vec![0usize; posts.len()];
        let mut preorder = Vec::with_capacity(posts.len());
        let mut stack: Vec<(usize, usize)> = roots.iter().rev().map(|&r| (r, 1)).collect();
        while let Some((node, d)) = stack.pop() {
            depth[node] = d;
            preorder.push(node);
            stack.extend(children[node].iter().rev().map(|&c| (c, d + 1)));
        }
        if preorder.len() != posts.len() {
            return Err(ThreadError::CycleDetected(find_cycle(&posts, &parent, &depth)));
        }

        let mut preorder_pos = vec![0usize; posts.len()];
        for (pos, &node) in preorder.iter().enumerate() {
            preorder_pos[node] = pos;
        }

        for (i, post) in posts.iter().enumerate() {
            if let Some(j) = parent[i] {
                if post.timestamp < posts[j].timestamp {
                    warnings.push(Warning::TimestampBeforeParent {
                        post: post.id.clone(),
                        parent: posts[j].id.clone(),
                    });
                }
            }
            if post.body.trim().is_empty() {
                warnings.push(Warning::EmptyBody(post.id.clone()));
            }
        }

        Ok(Self {
            thread_id: thread_id.into(),
            posts,
            index,
            parent,
            children,
            roots,
            depth,
            preorder,
            preorder_pos,
            warnings,
        })
    }

    pub fn empty(thread_id: impl Into<String>) -> Self {
        Self::build(thread_id, Vec::new()).expect("empty thread is valid")
    }

    pub fn thread_id(&self) -> &str {
        &self.thread_id
    }

    /// Number of posts, `N`.
    pub fn len(&self) -> usize {
        self.posts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.posts.is_empty()
    }

    /// Posts in chronological order.
    pub fn posts(&self) -> &[Post] {
        &self.posts
    }

    pub fn into_posts(self) -> Vec<Post> {
        self.posts
    }

    pub fn warnings(&self) -> &[Warning] {
        &self.warnings
    }

    pub fn contains(&self, id: &PostId) -> bool {
        self.index.contains_key(id)
    }

    pub fn post(&self, id: &PostId) -> Result<&Post, ThreadError> {
        self.position(id).map(|i| &self.posts[i])
    }

    /// Nesting level: 1 for first-level posts, parent's depth + 1 otherwise.
    pub fn depth(&self, id: &PostId) -> Result<usize, ThreadError> {
        self.position(id).map(|i| self.depth[i])
    }

    /// Zero-based position of the post in [`Thread::dfs_order`].
    pub fn dfs_index(&self, id: &PostId) -> Result<usize, ThreadError> {
        self.position(id).map(|i| self.preorder_pos[i])
    }

    /// Preorder traversal; first-level posts and siblings in chronological order.
    pub fn dfs_order(&self) -> Vec<&PostId> {
        self.preorder.iter().map(|&i| &self.posts[i].id).collect()
    }

    /// Replies to `id`, chronologically.
    pub fn children(&self, id: &PostId) -> Result<Vec<&PostId>, ThreadError> {
        let i = self.position(id)?;
        Ok(self.children[i].iter().map(|&c| &self.posts[c].id).collect())
    }

    pub fn first_level(&self) -> Vec<&PostId> {
        self.roots.iter().map(|&r| &self.posts[r].id).collect()
    }

    pub fn subthread(&self, root: &PostId) -> Result<SubThread<'_>, ThreadError> {
        let root = self.position(root)?;
        Ok(SubThread { thread: self, root })
    }

    /// One sub-thread per first-level post.
    pub fn first_level_subthreads(&self) -> Vec<SubThread<'_>> {
        self.roots
            .iter()
            .map(|&root| SubThread { thread: self, root })
            .collect()
    }

    /// True when the thread is a single chain: one first-level post and
    /// no post with more than one reply.
    pub fn is_single_threaded(&self) -> bool {
        self.roots.len() <= 1 && self.children.iter().all(|c| c.len() <= 1)
    }

    pub(crate) fn position(&self, id: &PostId) -> Result<usize, ThreadError> {
        self.index
            .get(id)
            .copied()
            .ok_or_else(|| ThreadError::UnknownPost(id.clone()))
    }

    pub(crate) fn parent_at(&self, i: usize) -> Option<usize> {
        self.parent[i]
    }

    pub(crate) fn depth_at(&self, i: usize) -> usize {
        self.depth[i]
    }

    pub(crate) fn preorder_pos_at(&self, i: usize) -> usize {
        self.preorder_pos[i]
    }
}

fn find_cycle(posts: &[Post], parent: &[Option<usize>], depth: &[usize]) -> Vec<PostId> {
    let start = depth.iter().position(|&d| d == 0).expect("unvisited post");
    let mut seen = vec![false; posts.len()];
    let mut node = start;
    while !seen[node] {
        seen[node] = true;
        node = parent[node].expect("unvisited posts always have a parent");
    }
    // `node` is on the cycle; walk it once.
    let mut cycle = vec![node];
    let mut cur = parent[node].expect("cycle member has a parent");
    while cur != node {
        cycle.push(cur);
        cur = parent[cur].expect("cycle member has a parent");
    }
    cycle.sort_unstable();
    cycle.into_iter().map(|i| posts[i].id.clone()).collect()
}

/// The descendant closure of one post, root inclusive.
#[derive(Debug, Clone, Copy)]
pub struct SubThread<'a> {
    thread: &'a Thread,
    root: usize,
}

impl<'a> SubThread<'a> {
    pub fn root(&self) -> &'a PostId {
        &self.thread.posts[self.root].id
    }

    /// Members in preorder, root first.
    pub fn members(&self) -> Vec<&'a PostId> {
        let mut out = Vec::new();
        let mut stack = vec![self.root];
        while let Some(node) = stack.pop() {
            out.push(&self.thread.posts[node].id);
            stack.extend(self.thread.children[node].iter().rev());
        }
        out
    }

    pub fn len(&self) -> usize {
        self.members().len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }
}

/// Depth and breadth of a (sub-)thread.
pub trait Shape {
    /// Deepest nesting level, counting the top level as 1.
    fn max_depth(&self) -> Result<usize, ThreadError>;
    fn breadth(&self) -> Result<usize, ThreadError>;
}

impl Shape for SubThread<'_> {
    fn max_depth(&self) -> Result<usize, ThreadError> {
        let base = self.thread.depth[self.root];
        let mut deepest = base;
        let mut stack = vec![self.root];
        while let Some(node) = stack.pop() {
            deepest = deepest.max(self.thread.depth[node]);
            stack.extend(&self.thread.children[node]);
        }
        Ok(deepest - base + 1)
    }

    /// Replies to the root; a childless sub-thread counts as breadth 1.
    fn breadth(&self) -> Result<usize, ThreadError> {
        Ok(self.thread.children[self.root].len().max(1))
    }
}

/// The whole thread hangs off a virtual root whose children are the
/// first-level posts.
impl Shape for Thread {
    fn max_depth(&self) -> Result<usize, ThreadError> {
        self.depth
            .iter()
            .copied()
            .max()
            .ok_or(ThreadError::EmptySubThread)
    }

    fn breadth(&self) -> Result<usize, ThreadError> {
        if self.is_empty() {
            return Err(ThreadError::EmptySubThread);
        }
        Ok(self.roots.len())
    }
}
