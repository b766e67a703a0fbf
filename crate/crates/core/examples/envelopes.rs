//! Sample E0, E1 and their minimum, and locate the crossing.

use aifv2::geometry::envelope_at;
use aifv2::numeric::{parse_dist_text, ExactScalar};
use aifv2::solvers::solve_binary_search;

pub fn run_example() -> aifv2::Result<String> {
    let dist = parse_dist_text("1/2\n3/8\n1/8\n")?;
    let mut out = String::from("x\tE0\tE1\tM\n");
    for k in 0..=8 {
        let x = ExactScalar::ratio(k, 8)?;
        let e = envelope_at(&x, &dist)?;
        out.push_str(&format!("{x}\t{}\t{}\t{}\n", e.e0, e.e1, e.m()));
    }
    let report = solve_binary_search(&dist)?;
    let x = report.x_star.expect("binary search reports x*");
    let e = envelope_at(&x, &dist)?;
    assert_eq!(e.e0, e.e1);
    out.push_str(&format!("crossing x* = {x}, E0 = E1 = {}\n", e.e0));
    Ok(out)
}

fn main() {
    print!("{}", run_example().expect("example failed"));
}
