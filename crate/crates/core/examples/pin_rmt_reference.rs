//! Regenerates `data/rmt_reference.txt`.
//!
//!     cargo run --release -p syk-core --example pin_rmt_reference -- 1000 500 > crates/core/data/rmt_reference.txt

use syk_core::statistics::rmt::{sample_mean_r, RmtEnsemble};

fn main() {
    let args: Vec<String> = std::env::args().collect();
    let dim: usize = args.get(1).map_or(1000, |s| s.parse().expect("dim"));
    let samples: usize = args.get(2).map_or(500, |s| s.parse().expect("samples"));
    let seed: u64 = args.get(3).map_or(20_221_017, |s| s.parse().expect("seed"));
    println!("# ensemble mean_r stderr dim samples seed");
    println!("# pooled gap ratio over all levels of {samples} matrices with {dim} distinct levels each");
    for ens in [RmtEnsemble::Goe, RmtEnsemble::Gue, RmtEnsemble::Gse] {
        let r = sample_mean_r(ens, dim, samples, seed).expect("sampling failed");
        println!("{} {:.6} {:.6} {} {} {}", ens.name(), r.mean_r, r.stderr, r.dim, r.samples, r.seed);
    }
}
