//! Where does AIFV-2 beat Huffman? Scan every three-symbol distribution
//! on the 2^-4 grid.

use aifv2::codec::{entropy, huffman};
use aifv2::numeric::dyadic_grid;
use aifv2::solvers::solve_binary_search;

pub fn run_example() -> aifv2::Result<String> {
    let mut out = String::from("probs\taifv2\thuffman\tentropy\n");
    let mut wins = 0;
    for dist in dyadic_grid(3, 4) {
        let cost = solve_binary_search(&dist)?.cost;
        let (_, huff) = huffman(&dist);
        assert!(cost <= huff);
        if cost < huff {
            wins += 1;
        }
        let probs: Vec<String> = dist.probs().iter().map(|p| p.to_string()).collect();
        out.push_str(&format!(
            "{}\t{:.4}\t{:.4}\t{:.4}\n",
            probs.join(" "),
            cost.to_f64(),
            huff.to_f64(),
            entropy(&dist)
        ));
    }
    out.push_str(&format!("AIFV-2 strictly better on {wins} distributions\n"));
    Ok(out)
}

fn main() {
    print!("{}", run_example().expect("example failed"));
}
