use dps_core::enumerate::*;

#[test]
fn debug_extensions() {
    let point = CompactPoset::point();
    println!("point raws: {:?}", raw_extensions(&point, 1));
    let chain1 = CompactPoset { rank_sizes: vec![1, 1], up: vec![vec![1]] };
    println!("chain1 raws: {:?}", raw_extensions(&chain1, 1));
    let chain2 = CompactPoset { rank_sizes: vec![1, 1, 2], up: vec![vec![1], vec![1, 1]] };
    println!("chain2 raws: {:?}", raw_extensions(&chain2, 1));
}
