//! Ellipsoid solver: oracle calls against the budget, at two precisions.

use aifv2::numeric::parse_dist_text;
use aifv2::solvers::{gls_budget, mantissa_bits, solve_binary_search, solve_ellipsoid_with};

pub fn run_example() -> aifv2::Result<String> {
    let dist = parse_dist_text("0.011\n0.01\n0.0011\n0.001\n0.0001\n")?;
    let (n, b) = (dist.len(), dist.bits());
    let reference = solve_binary_search(&dist)?;
    let mut out = format!("n = {n}, b = {b}, budget = {}\n", gls_budget(n, b));
    for prec in [mantissa_bits(n, b), 32] {
        let r = solve_ellipsoid_with(&dist, Some(prec))?;
        assert_eq!(r.cost, reference.cost);
        out.push_str(&format!(
            "precision {prec}: oracle calls {}, cuts {}, x' = {}, cost = {}\n",
            r.oracle_calls,
            r.iterations,
            r.x_star.as_ref().map(|x| x.to_string()).unwrap_or_default(),
            r.cost
        ));
    }
    Ok(out)
}

fn main() {
    print!("{}", run_example().expect("example failed"));
}
