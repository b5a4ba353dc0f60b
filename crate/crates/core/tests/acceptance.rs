//! Acceptance suite. Runs every criterion, prints one PASS/FAIL line each,
//! and exits non-zero if any fails.

mod common;

use std::collections::HashSet;
use std::process::ExitCode;

use chrono::{TimeZone, Utc};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use threadlens::dedup::detect_duplicates;
use threadlens::metrics::{
    chronological_coherence, degree_of_hierarchy, hierarchical_reference, metrics_report,
    population_std, topic_dispersion,
};
use threadlens::restructure::{remove_duplicates, restructure};
use threadlens::topics::assignment_from_labels;
use threadlens::{
    codec, fixtures, Post, PostId, Projection, Shape, SimilarityConfig, Thread,
    TopicAssignment, TopicLabel,
};

use common::*;

type Outcome = Result<String, String>;

macro_rules! ensure {
    ($cond:expr, $($msg:tt)+) => {
        if !$cond {
            return Err(format!($($msg)+));
        }
    };
}

const TOL: f64 = 1e-9;

fn fixture_report() -> threadlens::MetricsReport {
    let thread = fixtures::original();
    let flags = detect_duplicates(&thread, &SimilarityConfig::default());
    let labels = assignment_from_labels(&thread).unwrap();
    metrics_report(&thread, &labels, &flags, None, Projection::DfsIndex).unwrap()
}

fn redundancy_original() -> Outcome {
    let report = fixture_report();
    let r = &report.redundancy;
    ensure!(r.total_posts == 20 && r.duplicate_posts == 2, "N={}, N_d={}", r.total_posts, r.duplicate_posts);
    ensure!((r.redundancy - 2.0 / 18.0).abs() < TOL, "r = {}", r.redundancy);
    let text = report.to_string();
    ensure!(text.contains("r = 0.11"), "rendering lacks `r = 0.11`:\n{text}");
    Ok(format!("N=20, N_d=2, r={:.12}", r.redundancy))
}

fn hierarchy_original() -> Outcome {
    let report = fixture_report();
    let h = &report.hierarchy;
    ensure!(h.depth == 4 && h.breadth == 11, "d={}, b={}", h.depth, h.breadth);
    ensure!((h.hierarchy_degree - 4.0 / 11.0).abs() < TOL, "h = {}", h.hierarchy_degree);
    let text = report.to_string();
    ensure!(text.contains("h = 0.36"), "rendering lacks `h = 0.36`:\n{text}");
    Ok(format!("d=4, b=11, h={:.12}", h.hierarchy_degree))
}

fn restructured_fixture() -> Outcome {
    let thread = fixtures::original();
    let flags = detect_duplicates(&thread, &SimilarityConfig::default());
    let labels = assignment_from_labels(&thread).unwrap();
    let res = restructure(&thread, &flags, &labels, Projection::DfsIndex).map_err(|e| e.to_string())?;
    let after = &res.after;
    ensure!(res.thread.len() == 18, "post count {}", res.thread.len());
    ensure!(after.redundancy.redundancy == 0.0, "r = {}", after.redundancy.redundancy);
    ensure!(
        after.hierarchy.breadth == 5 && after.hierarchy.depth == 4,
        "b={}, d={}",
        after.hierarchy.breadth,
        after.hierarchy.depth
    );
    ensure!(after.hierarchy.hierarchy_degree == 0.80, "h = {}", after.hierarchy.hierarchy_degree);
    ensure!(topics_contiguous(&res.thread), "topics not contiguous in dfs order");

    // The hand-restructured fixture measures the same.
    let table2 = fixtures::restructured();
    let h2 = degree_of_hierarchy(&table2).map_err(|e| e.to_string())?;
    ensure!(
        (h2.depth, h2.breadth, h2.hierarchy_degree) == (4, 5, 0.80),
        "bundled restructured fixture: {h2:?}"
    );
    Ok("N=18, r=0, b=5, d=4, h=0.80, 5 contiguous topics".into())
}

fn flat_and_hierarchical() -> Outcome {
    let posts = (0..10)
        .map(|i| {
            Post::new(
                id(&format!("f{i}")),
                "a",
                Utc.timestamp_opt(i, 0).unwrap(),
                "x",
            )
        })
        .collect();
    let flat = Thread::build("flat", posts).unwrap();
    let h = degree_of_hierarchy(&flat).map_err(|e| e.to_string())?;
    ensure!(h.hierarchy_degree == 0.1, "flat h = {}", h.hierarchy_degree);
    let reference = hierarchical_reference(&[1, 5, 9, 1, 2]).map_err(|e| e.to_string())?;
    ensure!(reference == 1.8, "hierarchical reference = {reference}");

    let counts = assignment_from_labels(&fixtures::restructured()).unwrap().counts();
    ensure!(counts == [1, 5, 9, 1, 2], "topic sizes of restructured fixture: {counts:?}");
    Ok("flat N=10 -> 0.1, max N_i / M = 9/5 = 1.8".into())
}

fn kendall_exhaustive() -> Outcome {
    let mut checked = 0usize;
    for n in 0..=6 {
        let perms = permutations(n);
        let identity: Vec<usize> = (0..n).collect();
        for p in &perms {
            let got = chronological_coherence(p, &identity).map_err(|e| e.to_string())?;
            let want = oracle_kendall(p, &identity);
            ensure!(got == want, "n={n} perm={p:?}: {got} != {want}");
            checked += 1;
        }
        // All ordered pairs for the smaller sizes.
        if n <= 5 {
            for a in &perms {
                for b in &perms {
                    let got = chronological_coherence(a, b).map_err(|e| e.to_string())?;
                    ensure!(got == oracle_kendall(a, b), "n={n} {a:?} vs {b:?}");
                    ensure!(got == chronological_coherence(b, a).unwrap(), "asymmetric at {a:?} {b:?}");
                    checked += 1;
                }
            }
        }
    }
    Ok(format!("{checked} permutation comparisons exact"))
}

fn dispersion_oracle() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(0x6d15);
    let mut topics_checked = 0usize;
    for case in 0..1000 {
        let thread = random_thread(&mut rng, 30, false);
        if thread.is_empty() {
            continue;
        }
        let labels = assignment_from_labels(&thread).unwrap();
        let pre = oracle_preorder(&thread);
        for projection in [Projection::DfsIndex, Projection::Depth] {
            let stats = topic_dispersion(&thread, &labels, projection).map_err(|e| e.to_string())?;
            for s in &stats {
                let coords: Vec<f64> = thread
                    .posts()
                    .iter()
                    .filter(|p| p.topic.as_ref() == Some(&s.topic))
                    .map(|p| match projection {
                        Projection::DfsIndex => pre[&p.id] as f64,
                        Projection::Depth => oracle_ancestors(&thread, &p.id) as f64,
                    })
                    .collect();
                let want = oracle_std(&coords);
                ensure!(
                    (s.dispersion - want).abs() < TOL && s.post_count == coords.len(),
                    "case {case} {projection:?} {}: {} vs {want}",
                    s.topic,
                    s.dispersion
                );
                topics_checked += 1;
            }
        }
    }

    // Translation invariance of a contiguous block on a flat thread.
    for total in 1..=30usize {
        for k in 1..=total {
            let reference: Vec<f64> = (0..k).map(|x| x as f64).collect();
            let reference = population_std(&reference);
            for start in 0..=(total - k) {
                let posts = (0..total)
                    .map(|i| {
                        let label = if (start..start + k).contains(&i) { "B" } else { "A" };
                        Post::new(id(&format!("b{i:02}")), "a", Utc.timestamp_opt(i as i64, 0).unwrap(), "x")
                            .with_topic(TopicLabel::new(label).unwrap())
                    })
                    .collect();
                let thread = Thread::build("block", posts).unwrap();
                let labels = assignment_from_labels(&thread).unwrap();
                let stats = topic_dispersion(&thread, &labels, Projection::DfsIndex).unwrap();
                let block = stats.iter().find(|s| s.topic.as_str() == "B").unwrap();
                ensure!(
                    block.dispersion == reference,
                    "block k={k} at {start} of {total}: {} != {reference}",
                    block.dispersion
                );
            }
        }
    }
    Ok(format!("{topics_checked} topic dispersions within 1e-9; block invariance exact"))
}

fn restructure_properties() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(0x7e57);
    let config = SimilarityConfig::default();
    for case in 0..1000 {
        let thread = random_thread(&mut rng, 50, true);
        let flags = detect_duplicates(&thread, &config);
        flags
            .validate(&thread)
            .map_err(|e| format!("case {case}: flags invalid: {e}"))?;
        let originals: HashSet<&PostId> = flags.pairs().iter().map(|p| &p.of).collect();
        ensure!(
            flags.pairs().iter().all(|p| !originals.contains(&p.post)),
            "case {case}: chained flags"
        );

        let roundtrip = codec::parse_thread(&codec::to_json(&thread)).map_err(|e| e.to_string())?;
        ensure!(roundtrip == thread, "case {case}: codec round-trip differs");

        let labels = if thread.is_empty() {
            TopicAssignment::empty()
        } else {
            assignment_from_labels(&thread).unwrap()
        };
        let res = restructure(&thread, &flags, &labels, Projection::DfsIndex)
            .map_err(|e| format!("case {case}: {e}"))?;

        let expected: HashSet<&PostId> = thread
            .posts()
            .iter()
            .map(|p| &p.id)
            .filter(|id| !flags.is_flagged(id))
            .collect();
        let got: HashSet<&PostId> = res.thread.posts().iter().map(|p| &p.id).collect();
        ensure!(
            got == expected && res.thread.len() == expected.len(),
            "case {case}: post conservation"
        );
        ensure!(res.after.redundancy.redundancy == 0.0, "case {case}: r after = {}", res.after.redundancy.redundancy);
        if res.thread.is_empty() {
            continue;
        }
        let m = assignment_from_labels(&res.thread).unwrap().topic_set().len();
        ensure!(res.thread.breadth() == Ok(m), "case {case}: b={:?} M={m}", res.thread.breadth());
        ensure!(topics_contiguous(&res.thread), "case {case}: topics not contiguous");

        let deduped = remove_duplicates(&thread, &flags).unwrap();
        let kept = labels.restricted_to(&deduped);
        let before = topic_dispersion(&deduped, &kept, Projection::DfsIndex).unwrap();
        let after = topic_dispersion(&res.thread, &kept, Projection::DfsIndex).unwrap();
        for (b, a) in before.iter().zip(&after) {
            ensure!(b.topic == a.topic, "case {case}: topic order");
            ensure!(
                a.dispersion <= b.dispersion + 1e-12,
                "case {case} {}: dispersion grew {} -> {}",
                a.topic,
                b.dispersion,
                a.dispersion
            );
        }
    }
    Ok("1000 random threads: flags valid, conservation, b=M, r=0, contiguity, dispersion non-increasing, codec identity".into())
}

fn dedup_monotonicity() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(0xd0d0);
    let taus = [0.5, 0.7, 0.8, 0.9, 1.0];
    for case in 0..200 {
        let thread = random_thread(&mut rng, 50, false);
        let sizes: Vec<usize> = taus
            .iter()
            .map(|&t| detect_duplicates(&thread, &SimilarityConfig::new(3, t).unwrap()).len())
            .collect();
        ensure!(
            sizes.windows(2).all(|w| w[0] >= w[1]),
            "case {case}: flagged counts {sizes:?} for tau {taus:?}"
        );
    }
    Ok("200 random threads, counts non-increasing over tau".into())
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Outcome); 8] = [
        ("1 redundancy of original fixture", redundancy_original),
        ("2 hierarchy of original fixture", hierarchy_original),
        ("3 restructured fixture", restructured_fixture),
        ("4 flat and hierarchical formulas", flat_and_hierarchical),
        ("5 Kendall tau exhaustive oracle", kendall_exhaustive),
        ("6 dispersion oracle", dispersion_oracle),
        ("7 restructure property suite", restructure_properties),
        ("8 dedup threshold monotonicity", dedup_monotonicity),
    ];
    let mut failed = 0;
    for (name, check) in criteria {
        match check() {
            Ok(detail) => println!("PASS  criterion {name}: {detail}"),
            Err(detail) => {
                failed += 1;
                println!("FAIL  criterion {name}: {detail}");
            }
        }
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
