//! Tabulate the robustness bounds of every experiment kind.

use inflated_selftest::commands::cmd_bounds;
use inflated_selftest::selftest::BoundParams;

fn main() {
    let params = BoundParams { vertices: 9, edges: 9, circle: Some(3), center_degree: Some(3), distance: 1 };
    println!("{:<14} {:>8} {:>12} {:>12}", "kind", "ε", "table", "general");
    for eps in [1e-8, 1e-6, 1e-4] {
        for row in cmd_bounds(None, params.clone(), eps).unwrap().rows {
            println!("{:<14} {:>8.0e} {:>12.4} {:>12.4}", row.kind.to_string(), eps, row.table, row.general);
        }
    }
}
