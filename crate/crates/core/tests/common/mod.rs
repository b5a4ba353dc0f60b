#![allow(dead_code)]

use std::collections::HashMap;

use chrono::{TimeZone, Utc};
use rand::seq::SliceRandom;
use rand::Rng;
use threadlens::{Post, PostId, Thread, TopicLabel};

pub const VOCAB: &[&str] = &[
    "java", "syntax", "compiler", "memory", "pointer", "class", "object", "stl", "template",
    "library", "runtime", "method", "easier", "faster", "portable", "virtual", "machine",
    "design", "question", "answer", "bonus", "course", "analogy", "procedural", "language",
];

pub fn id(s: &str) -> PostId {
    PostId::new(s).unwrap()
}

fn random_body<R: Rng>(rng: &mut R) -> String {
    let len = rng.gen_range(3..15);
    (0..len)
        .map(|_| *VOCAB.choose(rng).unwrap())
        .collect::<Vec<_>>()
        .join(" ")
}

fn mutate<R: Rng>(rng: &mut R, body: &str) -> String {
    let mut words: Vec<&str> = body.split(' ').collect();
    let edits = rng.gen_range(0..=2);
    for _ in 0..edits {
        let i = rng.gen_range(0..words.len());
        words[i] = VOCAB.choose(rng).unwrap();
    }
    words.join(" ")
}

/// Random labeled thread of up to `max_posts` posts.
///
/// Timestamps strictly increase with creation order. Some bodies are fresh,
/// some are lightly edited copies of earlier bodies, and a few posts carry a
/// `duplicate_of` annotation pointing at an earlier post.
pub fn random_thread<R: Rng>(rng: &mut R, max_posts: usize, annotate: bool) -> Thread {
    let n = rng.gen_range(0..=max_posts);
    let topics = rng.gen_range(1..=5);
    let mut posts: Vec<Post> = Vec::with_capacity(n);
    for i in 0..n {
        let body = if i > 0 && rng.gen_bool(0.3) {
            let src = &posts[rng.gen_range(0..i)].body;
            mutate(rng, src)
        } else {
            random_body(rng)
        };
        let mut post = Post::new(
            id(&format!("p{i:02}")),
            format!("u{}", rng.gen_range(0..6)),
            Utc.timestamp_opt(1_330_000_000 + 60 * i as i64, 0).unwrap(),
            body,
        )
        .with_topic(TopicLabel::new(format!("T{}", rng.gen_range(1..=topics))).unwrap());
        if i > 0 && rng.gen_bool(0.7) {
            post = post.with_parent(posts[rng.gen_range(0..i)].id.clone());
        }
        if annotate && i > 0 && rng.gen_bool(0.08) {
            post = post.with_duplicate_of(posts[rng.gen_range(0..i)].id.clone());
        }
        posts.push(post);
    }
    // Present records shuffled; the builder must restore chronology.
    posts.shuffle(rng);
    Thread::build("random", posts).unwrap()
}

/// Preorder positions computed straight from the parent links, without the
/// thread's own index.
pub fn oracle_preorder(thread: &Thread) -> HashMap<PostId, usize> {
    let mut kids: HashMap<Option<&PostId>, Vec<&Post>> = HashMap::new();
    for p in thread.posts() {
        kids.entry(p.parent.as_ref()).or_default().push(p);
    }
    for v in kids.values_mut() {
        v.sort_by_key(|p| p.timestamp);
    }
    fn walk<'a>(
        node: Option<&'a PostId>,
        kids: &HashMap<Option<&'a PostId>, Vec<&'a Post>>,
        out: &mut HashMap<PostId, usize>,
    ) {
        for child in kids.get(&node).map(Vec::as_slice).unwrap_or(&[]) {
            let next = out.len();
            out.insert(child.id.clone(), next);
            walk(Some(&child.id), kids, out);
        }
    }
    let mut out = HashMap::new();
    walk(None, &kids, &mut out);
    out
}

/// Ancestor count from parent links.
pub fn oracle_ancestors(thread: &Thread, id: &PostId) -> usize {
    let parents: HashMap<&PostId, Option<&PostId>> =
        thread.posts().iter().map(|p| (&p.id, p.parent.as_ref())).collect();
    let mut n = 0;
    let mut cur = parents[id];
    while let Some(p) = cur {
        n += 1;
        cur = parents[p];
    }
    n
}

/// Standard deviation via `sqrt(E[x^2] - E[x]^2)`.
pub fn oracle_std(xs: &[f64]) -> f64 {
    if xs.is_empty() {
        return 0.0;
    }
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let mean_sq = xs.iter().map(|x| x * x).sum::<f64>() / n;
    (mean_sq - mean * mean).max(0.0).sqrt()
}

/// Discordant pairs counted pair by pair, over `n(n-1)/2`.
pub fn oracle_kendall<T: PartialEq>(actual: &[T], ideal: &[T]) -> f64 {
    let n = actual.len();
    if n <= 1 {
        return 0.0;
    }
    let rank = |x: &T| ideal.iter().position(|y| y == x).unwrap();
    let mut discordant = 0usize;
    for i in 0..n {
        for j in (i + 1)..n {
            if rank(&actual[i]) > rank(&actual[j]) {
                discordant += 1;
            }
        }
    }
    discordant as f64 / (n * (n - 1) / 2) as f64
}

/// Every permutation of `0..n`, lexicographic.
pub fn permutations(n: usize) -> Vec<Vec<usize>> {
    fn go(cur: &mut Vec<usize>, used: &mut [bool], out: &mut Vec<Vec<usize>>) {
        if cur.len() == used.len() {
            out.push(cur.clone());
            return;
        }
        for i in 0..used.len() {
            if !used[i] {
                used[i] = true;
                cur.push(i);
                go(cur, used, out);
                cur.pop();
                used[i] = false;
            }
        }
    }
    let mut out = Vec::new();
    go(&mut Vec::new(), &mut vec![false; n], &mut out);
    out
}

/// True when each label's preorder positions form one interval.
pub fn topics_contiguous(thread: &Thread) -> bool {
    let order = thread.dfs_order();
    let labels: Vec<_> = order
        .iter()
        .map(|id| thread.post(id).unwrap().topic.clone())
        .collect();
    let mut closed = std::collections::HashSet::new();
    for w in 0..labels.len() {
        if w > 0 && labels[w] != labels[w - 1] {
            closed.insert(labels[w - 1].clone());
        }
        if closed.contains(&labels[w]) {
            return false;
        }
    }
    true
}
