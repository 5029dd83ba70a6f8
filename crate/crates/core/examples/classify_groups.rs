//! Generic exactness verdict for each shipped group.
//!
//! cargo run --release --example classify_groups

use dsmatch::exactness::{classify_generic, RANK_TOL};
use dsmatch::experiments::groups::shipped_groups;

fn main() {
    for named in shipped_groups() {
        let g = named.group();
        let v = classify_generic(&g, 20, 0, RANK_TOL);
        let smallest = v.margins.iter().cloned().fold(f64::INFINITY, f64::min);
        println!(
            "{:<16} |G| = {:<2} {:<17} zero evaluations {:>2}/{}  smallest margin {:.1e}",
            named.name,
            g.order(),
            v.verdict.as_str(),
            v.zero_evaluations,
            v.trials,
            smallest
        );
    }
}
