//! Canonical thread JSON.
//!
//! ```json
//! {"thread_id": "...", "posts": [{"id": "...", "parent_id": null, "author": "...",
//!   "timestamp": "2012-02-01T10:00:00Z", "body": "...", "topic": null, "duplicate_of": null}]}
//! ```
//!
//! Posts are written in chronological order with keys in the order above.
//! Timestamps are RFC 3339, normalized to UTC at second precision.

use chrono::{DateTime, SecondsFormat, SubsecRound, Utc};
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

use crate::thread::{Post, PostId, Thread, ThreadError, TopicLabel};

#[derive(Debug, Error)]
pub enum CodecError {
    #[error("malformed thread JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error("invalid thread: {0}")]
    Invalid(#[from] ThreadError),
}

#[derive(Debug, Serialize, Deserialize)]
struct ThreadDoc {
    thread_id: String,
    posts: Vec<PostDoc>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct PostDoc {
    id: PostId,
    #[serde(default)]
    parent_id: Option<PostId>,
    author: String,
    #[serde(serialize_with = "write_ts", deserialize_with = "read_ts")]
    timestamp: DateTime<Utc>,
    body: String,
    #[serde(default)]
    topic: Option<TopicLabel>,
    #[serde(default)]
    duplicate_of: Option<PostId>,
}

fn write_ts<S: Serializer>(ts: &DateTime<Utc>, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_str(&ts.to_rfc3339_opts(SecondsFormat::Secs, true))
}

fn read_ts<'de, D: Deserializer<'de>>(d: D) -> Result<DateTime<Utc>, D::Error> {
    let raw = String::deserialize(d)?;
    DateTime::parse_from_rfc3339(&raw)
        .map(|ts| ts.with_timezone(&Utc).trunc_subsecs(0))
        .map_err(|e| serde::de::Error::custom(format!("invalid RFC 3339 timestamp `{raw}`: {e}")))
}

impl From<PostDoc> for Post {
    fn from(doc: PostDoc) -> Self {
        Post {
            id: doc.id,
            parent: doc.parent_id,
            author: doc.author,
            timestamp: doc.timestamp,
            body: doc.body,
            topic: doc.topic,
            duplicate_of: doc.duplicate_of,
        }
    }
}

impl From<&Post> for PostDoc {
    fn from(p: &Post) -> Self {
        PostDoc {
            id: p.id.clone(),
            parent_id: p.parent.clone(),
            author: p.author.clone(),
            timestamp: p.timestamp,
            body: p.body.clone(),
            topic: p.topic.clone(),
            duplicate_of: p.duplicate_of.clone(),
        }
    }
}

/// Parses the raw records without building the tree.
pub fn parse_records(json: &str) -> Result<(String, Vec<Post>), serde_json::Error> {
    let doc: ThreadDoc = serde_json::from_str(json)?;
    Ok((doc.thread_id, doc.posts.into_iter().map(Post::from).collect()))
}

pub fn parse_thread(json: &str) -> Result<Thread, CodecError> {
    let (thread_id, posts) = parse_records(json)?;
    Ok(Thread::build(thread_id, posts)?)
}

/// Serializes a thread in canonical form, for embedding in larger documents.
pub struct Canonical<'a>(pub &'a Thread);

impl Serialize for Canonical<'_> {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        doc(self.0).serialize(s)
    }
}

/// Pretty-printed canonical JSON.
pub fn to_json(thread: &Thread) -> String {
    serde_json::to_string_pretty(&doc(thread)).expect("thread document serializes")
}

fn doc(thread: &Thread) -> ThreadDoc {
    ThreadDoc {
        thread_id: thread.thread_id().to_owned(),
        posts: thread.posts().iter().map(PostDoc::from).collect(),
    }
}
