//! Restructuring: drop duplicate posts, then regroup the remaining posts so
//! each topic becomes one first-level sub-thread.

use indexmap::IndexMap;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dedup::{DedupError, DuplicateFlags};
use crate::metrics::{metrics_report, MetricsError, MetricsReport, Projection};
use crate::thread::{Post, PostId, Thread, ThreadError, TopicLabel};
use crate::topics::TopicAssignment;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum RestructureError {
    #[error("invalid duplicate flags: {0}")]
    InvalidFlags(#[from] DedupError),
    #[error("post `{0}` has no topic label")]
    UnlabeledPost(PostId),
    #[error("topic assignment names post `{0}`, which is not in the thread")]
    UnknownPost(PostId),
    #[error(transparent)]
    Thread(#[from] ThreadError),
    #[error(transparent)]
    Metrics(#[from] MetricsError),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Removal {
    pub post: PostId,
    pub of: PostId,
}

/// A change of parent; `None` stands for first level.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Move {
    pub post: PostId,
    pub from: Option<PostId>,
    pub to: Option<PostId>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct RestructurePlan {
    pub removals: Vec<Removal>,
    pub moves: Vec<Move>,
    /// Ordered by each topic's earliest post.
    pub topic_roots: IndexMap<TopicLabel, PostId>,
}

impl RestructurePlan {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("plan serializes")
    }
}

#[derive(Debug, Clone)]
pub struct RestructureResult {
    pub thread: Thread,
    pub plan: RestructurePlan,
    pub before: MetricsReport,
    pub after: MetricsReport,
}

/// Deletes flagged posts. Replies to a deleted post move to the post it
/// duplicates, unless that original sits inside the reply's own sub-tree
/// (possible only under clock skew), in which case they move to the deleted
/// post's own parent.
pub fn remove_duplicates(thread: &Thread, flags: &DuplicateFlags) -> Result<Thread, RestructureError> {
    flags.validate(thread)?;
    let posts = thread.posts();
    let flagged: Vec<bool> = posts.iter().map(|p| flags.is_flagged(&p.id)).collect();

    let mut kept = Vec::with_capacity(posts.len() - flags.len());
    for (i, post) in posts.iter().enumerate() {
        if flagged[i] {
            continue;
        }
        let parent = thread
            .parent_at(i)
            .and_then(|p| surviving_parent(thread, flags, &flagged, i, p));
        let mut post = post.clone();
        post.parent = parent.map(|p| posts[p].id.clone());
        post.duplicate_of = None;
        kept.push(post);
    }
    Ok(Thread::build(thread.thread_id(), kept)?)
}

/// New parent of `child` when its parent `parent` may have been removed.
fn surviving_parent(
    thread: &Thread,
    flags: &DuplicateFlags,
    flagged: &[bool],
    child: usize,
    mut parent: usize,
) -> Option<usize> {
    loop {
        if !flagged[parent] {
            return Some(parent);
        }
        let original = flags
            .original_of(&thread.posts()[parent].id)
            .and_then(|id| thread.position(id).ok())
            .expect("validated flags");
        if !is_ancestor_or_self(thread, child, original) {
            return Some(original);
        }
        parent = thread.parent_at(parent)?;
    }
}

fn is_ancestor_or_self(thread: &Thread, ancestor: usize, mut node: usize) -> bool {
    loop {
        if node == ancestor {
            return true;
        }
        match thread.parent_at(node) {
            Some(p) => node = p,
            None => return false,
        }
    }
}

/// Regroups posts so every topic forms one first-level sub-thread rooted at
/// its earliest post.
///
/// Reply edges between posts of the same topic are kept. A post whose parent
/// belongs to another topic attaches to its nearest same-topic ancestor, or
/// to the topic root when there is none. Each post's `topic` field is set
/// from `assignment`.
pub fn group_by_topic(thread: &Thread, assignment: &TopicAssignment) -> Result<Thread, RestructureError> {
    Ok(grouping(thread, assignment)?.0)
}

fn grouping(
    thread: &Thread,
    assignment: &TopicAssignment,
) -> Result<(Thread, IndexMap<TopicLabel, PostId>), RestructureError> {
    if let Some(e) = assignment.entries().iter().find(|e| !thread.contains(&e.post)) {
        return Err(RestructureError::UnknownPost(e.post.clone()));
    }
    let posts = thread.posts();
    let mut topic = Vec::with_capacity(posts.len());
    for post in posts {
        match assignment.topic_of(&post.id) {
            Some(t) => topic.push(t),
            None => return Err(RestructureError::UnlabeledPost(post.id.clone())),
        }
    }

    // Posts are chronological, so the first hit per topic is its root.
    let mut roots: IndexMap<&TopicLabel, usize> = IndexMap::new();
    for (i, t) in topic.iter().enumerate() {
        roots.entry(*t).or_insert(i);
    }

    let mut out = Vec::with_capacity(posts.len());
    for (i, post) in posts.iter().enumerate() {
        let root = roots[topic[i]];
        let parent = if i == root {
            None
        } else {
            let mut anc = thread.parent_at(i);
            while let Some(a) = anc {
                if topic[a] == topic[i] {
                    break;
                }
                anc = thread.parent_at(a);
            }
            Some(anc.unwrap_or(root))
        };
        let mut post = post.clone();
        post.parent = parent.map(|p| posts[p].id.clone());
        post.topic = Some(topic[i].clone());
        out.push(post);
    }
    let roots = roots
        .into_iter()
        .map(|(t, i)| (t.clone(), posts[i].id.clone()))
        .collect();
    Ok((Thread::build(thread.thread_id(), out)?, roots))
}

/// Full pipeline: [`remove_duplicates`], then [`group_by_topic`], with
/// metrics before and after.
///
/// `assignment` may label the duplicates too; labels of removed posts are
/// ignored for grouping.
pub fn restructure(
    thread: &Thread,
    flags: &DuplicateFlags,
    assignment: &TopicAssignment,
    projection: Projection,
) -> Result<RestructureResult, RestructureError> {
    let before = metrics_report(thread, assignment, flags, None, projection)?;
    let deduped = remove_duplicates(thread, flags)?;
    let kept_labels = assignment.restricted_to(&deduped);
    let (grouped, topic_roots) = grouping(&deduped, &kept_labels)?;
    let after = metrics_report(&grouped, &kept_labels, &DuplicateFlags::empty(), None, projection)?;

    let removals = flags
        .pairs()
        .iter()
        .map(|p| Removal {
            post: p.post.clone(),
            of: p.of.clone(),
        })
        .collect();
    let moves = grouped
        .posts()
        .iter()
        .filter_map(|new| {
            let old = thread.post(&new.id).expect("retained post");
            (old.parent != new.parent).then(|| Move {
                post: new.id.clone(),
                from: old.parent.clone(),
                to: new.parent.clone(),
            })
        })
        .collect();

    Ok(RestructureResult {
        thread: grouped,
        plan: RestructurePlan {
            removals,
            moves,
            topic_roots,
        },
        before,
        after,
    })
}

/// Applies a plan's edits to `thread` without recomputing anything.
pub fn apply_plan(thread: &Thread, plan: &RestructurePlan) -> Result<Thread, RestructureError> {
    let removed: std::collections::HashSet<&PostId> = plan.removals.iter().map(|r| &r.post).collect();
    let moved: std::collections::HashMap<&PostId, &Option<PostId>> =
        plan.moves.iter().map(|m| (&m.post, &m.to)).collect();
    let posts: Vec<Post> = thread
        .posts()
        .iter()
        .filter(|p| !removed.contains(&p.id))
        .map(|p| {
            let mut p = p.clone();
            if let Some(to) = moved.get(&p.id) {
                p.parent = (*to).clone();
            }
            p.duplicate_of = None;
            p
        })
        .collect();
    Ok(Thread::build(thread.thread_id(), posts)?)
}
