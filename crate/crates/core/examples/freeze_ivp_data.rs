//! Regenerates the `[ivp0]`/`[ivp1]` sections of the model data files from
//! the generic construction in `models::recipe`. Output goes to stdout, one
//! block per model, delimited for splicing:
//!
//! ```text
//! cargo run -p cohom1-core --example freeze_ivp_data
//! ```

use cohom1_core::models::{recipe, ALL_MODELS};

fn main() {
    for id in ALL_MODELS {
        println!("=== model {id} ===");
        print!("{}", recipe::render_ivp_sections(id));
        println!("=== end {id} ===");
    }
}
