//! Exact bounds, LP membership tests and quantum violations for multipartite
//! Bell-type correlation polytopes: local, bilocal (BL), time-ordered
//! bilocal (TOBL), no-signaling bilocal (NSBL), first-event broadcasting
//! (BC1) and bipartite one-way signaling classes, together with GHZ-like
//! states, the broadcast construction reproducing the GHZ correlation, and a
//! multistart optimizer for violation curves.

pub mod error;
pub mod expressions;
pub mod lp;
pub mod optimize;
pub mod polytopes;
pub mod quantum;
pub mod scenario;
pub mod verify;

pub use error::{Error, Result};
pub use scenario::{Behavior, Scenario};

use expressions::{Expression, Factor, Term};
use rand::Rng;

/// A seeded random tripartite-style expression: up to six terms, each a
/// partial joint event on a random nonempty party subset with uniform
/// coefficients in [−1, 1]. Used by structural property checks.
pub fn random_expression<R: Rng>(rng: &mut R, n: usize, name: &str) -> Expression {
    let scenario = Scenario::new(n).expect("valid scenario");
    let num_terms = rng.gen_range(1..=6);
    let mut terms = Vec::with_capacity(num_terms);
    for _ in 0..num_terms {
        let mut factors: Vec<Factor> = Vec::new();
        while factors.is_empty() {
            for party in 0..n {
                if rng.gen_bool(0.6) {
                    factors.push(Factor {
                        party,
                        setting: rng.gen_range(0..2u8),
                        sign: if rng.gen_bool(0.5) { 1 } else { -1 },
                    });
                }
            }
        }
        terms.push(Term {
            coefficient: rng.gen_range(-1.0..1.0),
            factors,
        });
    }
    Expression::new(name, scenario, terms).expect("random expressions are well-formed")
}
