//! Solve one distribution with every method and print the report.

use aifv2::numeric::parse_dist_text;
use aifv2::solvers::{solve, Method};

pub fn run_example() -> aifv2::Result<String> {
    let dist = parse_dist_text("# p(a) p(b) p(c)\n0.011\n0.1\n1/8\n")?;
    let mut out = String::new();
    let mut costs = Vec::new();
    for method in Method::ALL {
        let report = solve(&dist, method)?;
        costs.push(report.cost.clone());
        if method == Method::BinarySearch {
            out.push_str(&report.render(&dist));
        }
        out.push_str(&format!("{method}: {}\n", report.cost));
    }
    assert!(costs.windows(2).all(|w| w[0] == w[1]));
    Ok(out)
}

fn main() {
    print!("{}", run_example().expect("example failed"));
}
