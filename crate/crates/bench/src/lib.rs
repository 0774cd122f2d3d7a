//! Deterministic inputs for the benchmarks.

use stancedrift::dims::Cooccurrence;
use stancedrift::{assign_cohorts, CommentEvent, Quarter, Stance};

/// Cheap LCG so the fixtures need no RNG crate.
struct Lcg(u64);

impl Lcg {
    fn next(&mut self) -> u64 {
        self.0 = self.0.wrapping_mul(6_364_136_223_846_793_005).wrapping_add(1_442_695_040_888_963_407);
        self.0 >> 33
    }

    fn below(&mut self, n: u64) -> u64 {
        self.next() % n
    }
}

pub fn wave(len: usize, phase: f64) -> Vec<f64> {
    (0..len).map(|i| (i as f64 * 0.21 + phase).sin()).collect()
}

/// `n` labeled events spread over 34 quarters from 2014Q1.
pub fn events(n: usize) -> Vec<CommentEvent> {
    const TOPICS: [&str; 6] = ["Automation", "Taxes", "Work", "Health", "Inflation", "Housing"];
    let mut rng = Lcg(7);
    let quarters: Vec<Quarter> = std::iter::successors(Some(Quarter::new(2014, 1).unwrap()), |q| Some(q.succ()))
        .take(34)
        .collect();
    let mut out: Vec<CommentEvent> = (0..n)
        .map(|i| {
            let q = quarters[rng.below(34) as usize];
            let k = rng.below(4) as usize;
            let topics: Vec<&str> = (0..k).map(|_| TOPICS[rng.below(6) as usize]).collect();
            let stance = match rng.below(3) {
                0 => Stance::Against,
                1 => Stance::Neutral,
                _ => Stance::Supportive,
            };
            CommentEvent::new(format!("e{i}"), q, format!("u{}", rng.below(2000)), "c", stance, topics)
        })
        .collect();
    assign_cohorts(&mut out, None);
    out
}

/// Block-structured community/author counts.
pub fn cooccurrence(communities: usize, authors: usize) -> Vec<Cooccurrence> {
    let mut rng = Lcg(11);
    let mut out = Vec::new();
    for a in 0..authors {
        let block = a % 4;
        for _ in 0..5 {
            let c = (block * communities / 4 + rng.below((communities / 4).max(1) as u64) as usize) % communities;
            out.push(Cooccurrence::new(format!("c{c}"), format!("a{a}"), 1 + rng.below(9)));
        }
    }
    out
}
