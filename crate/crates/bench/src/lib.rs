//! Synthetic discussion threads for benchmarking.

use chrono::{TimeZone, Utc};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use threadlens::{Post, PostId, Thread, TopicLabel};

const WORDS: &[&str] = &[
    "java", "compiler", "pointer", "memory", "class", "object", "template", "syntax", "runtime",
    "garbage", "collector", "library", "stl", "method", "inheritance", "virtual", "interface",
    "performance", "portable", "bytecode", "header", "linker", "exception", "thread", "lambda",
    "generic", "student", "course", "assignment", "question", "answer", "example",
];

/// A random thread of `n` posts over `topics` labels. Roughly one post in
/// ten repeats an earlier body verbatim.
pub fn synthetic_thread(n: usize, topics: usize, seed: u64) -> Thread {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut posts: Vec<Post> = Vec::with_capacity(n);
    for i in 0..n {
        let body = if i > 0 && rng.gen_bool(0.1) {
            posts[rng.gen_range(0..i)].body.clone()
        } else {
            let len = rng.gen_range(8..40);
            (0..len)
                .map(|_| *WORDS.choose(&mut rng).expect("non-empty"))
                .collect::<Vec<_>>()
                .join(" ")
        };
        let mut post = Post::new(
            PostId::new(format!("p{i}")).expect("non-empty"),
            format!("user{}", rng.gen_range(0..20)),
            Utc.timestamp_opt(1_300_000_000 + i as i64 * 60, 0).unwrap(),
            body,
        )
        .with_topic(TopicLabel::new(format!("T{}", rng.gen_range(0..topics.max(1)))).expect("non-empty"));
        if i > 0 && rng.gen_bool(0.8) {
            post = post.with_parent(posts[rng.gen_range(0..i)].id.clone());
        }
        posts.push(post);
    }
    Thread::build(format!("synthetic-{seed}"), posts).expect("generated thread is valid")
}
