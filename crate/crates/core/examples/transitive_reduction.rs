//! Closure and reduction of a precedence relation given as `a>b` pairs.
//!
//! cargo run -p promodel --example transitive_reduction -- 0>1 1>2 0>2 2>3

use std::collections::BTreeSet;
use std::process::ExitCode;

use promodel::powl::{transitive_closure, transitive_reduction};

fn main() -> ExitCode {
    let mut edges = BTreeSet::new();
    for arg in std::env::args().skip(1) {
        let parsed = arg.split_once('>').and_then(|(a, b)| Some((a.parse::<usize>().ok()?, b.parse::<usize>().ok()?)));
        match parsed {
            Some(e) => {
                edges.insert(e);
            }
            None => {
                eprintln!("not an edge: {arg} (expected a>b)");
                return ExitCode::from(2);
            }
        }
    }
    if edges.is_empty() {
        edges = BTreeSet::from([(0, 1), (1, 2), (0, 2), (2, 3), (0, 3)]);
    }
    let n = edges.iter().map(|&(a, b)| a.max(b) + 1).max().unwrap_or(0);
    println!("edges:     {edges:?}");
    println!("closure:   {:?}", transitive_closure(&edges, n));
    match transitive_reduction(&edges, n) {
        Ok(r) => {
            println!("reduction: {r:?}");
            ExitCode::SUCCESS
        }
        Err(e) => {
            println!("reduction: {e}");
            ExitCode::FAILURE
        }
    }
}
