//! Maps continuous slice fractions to resource blocks and checks the result
//! against the allocation constraints.
//!
//! ```text
//! cargo run --example scheduler -- 0.6 0.5 0.4
//! ```

use oran_slicing::mdp::{action_to_allocation, ActionVec};
use oran_slicing::radio::UEState;

fn main() -> oran_slicing::Result<()> {
    let mut fractions: Vec<f64> = std::env::args().skip(1).filter_map(|s| s.parse().ok()).collect();
    if fractions.is_empty() {
        fractions = vec![0.6, 0.5, 0.4];
    }
    let l = fractions.len();
    let k = 20;
    // two UEs per slice, the second one idle in slice 0
    let mut ues: Vec<UEState> = (0..2 * l).map(|n| UEState::new(n, n / 2, [50.0 + n as f64, 0.0], 10.0)).collect();
    ues[1].active = false;

    let a = ActionVec::new(fractions);
    let alloc = action_to_allocation(&a, k, &ues)?;
    println!("requested  {:?}", a.slice_fractions);
    println!("projected  {:?}", a.projected());
    println!("RB counts  {:?} of {k}", alloc.slice_counts());
    println!();
    for (l, row) in alloc.slice_rb.rows().into_iter().enumerate() {
        let line: String = row.iter().map(|&b| if b { char::from(b'A' + l as u8) } else { '.' }).collect();
        println!("slice {l}   {line}");
    }
    for (n, row) in alloc.ue_rb.rows().into_iter().enumerate() {
        let line: String = row.iter().map(|&b| if b { '#' } else { '.' }).collect();
        let state = if ues[n].active { "" } else { " (idle)" };
        println!("UE {n} s{}   {line}{state}", ues[n].slice_id);
    }
    let slices: Vec<usize> = ues.iter().map(|u| u.slice_id).collect();
    alloc.validate(&slices)?;
    println!("\nallocation satisfies exclusivity, budget and slice ownership");
    Ok(())
}
