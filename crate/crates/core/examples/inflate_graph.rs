//! Inflate a small graph and inspect the chains that replace each edge.

use inflated_selftest::{inflate, Graph};

fn main() {
    let g = Graph::new([1, 2, 3, 4], [(1, 2), (1, 4), (2, 3), (3, 4)]).unwrap();
    for d in 0..=2 {
        let ig = inflate(&g, d);
        println!("d={d}: {} vertices, {} edges", ig.graph.n(), ig.graph.edge_count());
    }

    let ig = inflate(&g, 2);
    for (a, b) in g.edges() {
        let chain = ig.chain_from(a, b);
        let labels: Vec<String> = chain
            .iter()
            .map(|&v| {
                let l = ig.chain_label(v).unwrap();
                format!("{v}(r={},{:?},{:?})", l.r, l.parity, l.side)
            })
            .collect();
        println!("{a} -> {b}: {}", labels.join(" "));
    }
    assert_eq!(ig.contract(), g);
    println!("{}", serde_json::to_string(&ig.graph).unwrap());
}
