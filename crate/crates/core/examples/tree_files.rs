//! Build code trees from codewords, check them and round-trip the text
//! format.

use aifv2::codetree::{CodeTree, NodeKind, TreeKind};

pub fn run_example() -> aifv2::Result<String> {
    use NodeKind::{Leaf, Master};
    let t1 = CodeTree::from_codewords(
        TreeKind::T1,
        4,
        &[(Some(0), "01", Leaf), (Some(1), "10", Leaf), (Some(2), "11", Master), (Some(3), "1100", Leaf)],
    )?;
    let text = t1.to_text();
    let back = CodeTree::from_text(&text)?;
    assert_eq!(back.to_text(), text);

    let mut out = text;
    // a master with nothing below its slave is legal but not reduced
    let loose = CodeTree::from_codewords(
        TreeKind::T0,
        2,
        &[(Some(0), "0", Leaf), (Some(1), "1", Master), (None, "100", Leaf)],
    )?;
    for w in loose.check()? {
        out.push_str(&format!("warning: {w}\n"));
    }
    let mut broken = loose.clone();
    broken.nodes_mut()[0].symbol = Some(0);
    if let Err(e) = broken.check() {
        out.push_str(&format!("rejected: {e}\n"));
    }
    Ok(out)
}

fn main() {
    print!("{}", run_example().expect("example failed"));
}
