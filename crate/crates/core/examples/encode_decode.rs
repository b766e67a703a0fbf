//! Encode a sampled message with an optimal pair and decode it again.

use aifv2::codec::{aifv_cost, decode, encode, huffman, read_container, sample_symbols, write_container};
use aifv2::numeric::parse_dist_text;
use aifv2::solvers::solve_binary_search;
use rand::SeedableRng;

pub fn run_example() -> aifv2::Result<String> {
    let dist = parse_dist_text("1/2\n7/16\n1/16\n")?;
    let report = solve_binary_search(&dist)?;
    let mut rng = rand::rngs::StdRng::seed_from_u64(1);
    let msg = sample_symbols(&dist, 100_000, &mut rng)?;

    let bits = encode(&msg, &report.pair)?;
    let file = write_container(dist.len(), msg.len(), &bits);
    let (_, count, stored) = read_container(&file)?;
    let back = decode(&stored, count, &report.pair)?;
    assert_eq!(back, msg);

    let cost = aifv_cost(&report.pair, &dist)?;
    let (_, huff) = huffman(&dist);
    Ok(format!(
        "symbols: {}\nbits: {}\nrate: {:.4}\naifv2 cost: {} ({:.4})\nhuffman cost: {} ({:.4})\n",
        msg.len(),
        bits.len(),
        bits.len() as f64 / msg.len() as f64,
        cost,
        cost.to_f64(),
        huff,
        huff.to_f64()
    ))
}

fn main() {
    print!("{}", run_example().expect("example failed"));
}
