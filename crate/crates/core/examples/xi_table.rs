//! Regenerates `src/asymptotics/xi_table_data.rs`:
//! `cargo run --release --example xi_table > src/asymptotics/xi_table_data.rs`

use gei::asymptotics::{XiDistribution, XiTable};

fn main() {
    println!("//! Precomputed `ln P(ξ_d > s)` on the grids `s_i = s_max (i/N)²`.");
    println!("//! Generated by `examples/xi_table.rs`.");
    println!();
    for d in [2usize, 3] {
        let table = XiTable::build(XiDistribution::new(d).expect("valid dimension"));
        let v = table.log_tail_values();
        println!("pub(super) const XI{d}_S_MAX: f64 = {:?};", table.s_max());
        println!("#[rustfmt::skip]");
        println!("pub(super) const XI{d}_LOG_TAIL: [f64; {}] = [", v.len());
        for chunk in v.chunks(4) {
            let row: Vec<String> = chunk.iter().map(|x| format!("{x:?}")).collect();
            println!("    {},", row.join(", "));
        }
        println!("];");
    }
}
