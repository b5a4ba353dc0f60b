//! Analysis and restructuring of threaded discussions.
//!
//! A discussion is modelled as a [`Thread`]: a forest of posts rooted at the
//! first-level posts. On top of that the crate measures
//!
//! * redundancy, the ratio of duplicate posts to retained posts,
//! * topic dispersion, the spread of each topic's posts along a 1-D projection,
//! * chronological coherence, a normalized Kendall tau distance to an ideal order,
//! * degree of hierarchy, depth over breadth of a (sub-)thread,
//!
//! and can rebuild a thread so duplicates are gone and every topic is one
//! contiguous sub-thread.
//!
//! ```
//! use threadlens::{dedup, fixtures, metrics, topics};
//!
//! let thread = fixtures::original();
//! let flags = dedup::flags_from_annotations(&thread);
//! let labels = topics::assignment_from_labels(&thread).unwrap();
//! let report = metrics::metrics_report(&thread, &labels, &flags, None, Default::default()).unwrap();
//! assert_eq!((report.hierarchy.depth, report.hierarchy.breadth), (4, 11));
//! ```

pub mod codec;
pub mod dedup;
pub mod fixtures;
pub mod metrics;
pub mod restructure;
mod text;
pub mod thread;
pub mod topics;

pub use codec::{parse_thread, to_json, CodecError};
pub use dedup::{detect_duplicates, DuplicateFlags, DuplicatePair, SimilarityConfig};
pub use metrics::{metrics_report, HierarchyStats, MetricsReport, Projection, RedundancyStats, TopicStats};
pub use restructure::{restructure, RestructurePlan, RestructureResult};
pub use text::normalize_words;
pub use thread::{Post, PostId, Shape, SubThread, Thread, ThreadError, TopicLabel, Warning};
pub use topics::TopicAssignment;
