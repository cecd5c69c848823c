//! Pick a reference experiment for several graphs and list its targets.

use inflated_selftest::commands::{cmd_gen_re, KindChoice};
use inflated_selftest::Graph;

fn main() {
    let graphs = [
        ("path of three", Graph::path(3)),
        ("triangle", Graph::triangle()),
        ("claw", Graph::star(3)),
        ("single edge", Graph::pair()),
    ];
    for (name, g) in graphs {
        let re = cmd_gen_re(&g, 1, KindChoice::Auto).unwrap();
        let tab = re.tableau();
        println!("{name}: {} at d={} on {} qubits", re.kind, re.d, re.graph.n());
        for (m, s) in re.submeasurements().take(6) {
            let value = re.correlator(m, s).tableau_value(&tab).unwrap();
            println!("  {:<12} target {:+.4}  stabilizer value {:+.4}", s.label, s.target, value);
        }
        let rest = re.submeasurements().count().saturating_sub(6);
        if rest > 0 {
            println!("  ... and {rest} more");
        }
    }
}
