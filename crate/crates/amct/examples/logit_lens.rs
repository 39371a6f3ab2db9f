//! Logit-lens grids from an exported hidden-state dump: project each
//! layer's hidden state through the unembedding and read the top-1 token.
//!
//! ```bash
//! cargo run --example logit_lens
//! ```

use amct::introspect::{
    load_hidden_dump, logit_lens_grid, save_hidden_dump, HiddenDump, Unembedding,
};

fn main() {
    // A small synthetic dump: 3 layers x 4 positions x 4 dims. Early
    // layers lean toward token "the"; later layers sharpen to the answer
    // tokens, the usual logit-lens picture.
    let vocab_strings: Vec<String> =
        ["the", "PIE", "KPE", "44", "km"].iter().map(|s| s.to_string()).collect();
    let dim = 4;
    #[rustfmt::skip]
    let unembedding = Unembedding::new(5, dim, vec![
        1.0, 0.1, 0.0, 0.0, // the
        0.0, 1.0, 0.2, 0.0, // PIE
        0.0, 0.9, 0.0, 0.0, // KPE (close to PIE on purpose)
        0.0, 0.0, 1.0, 0.3, // 44
        0.0, 0.0, 0.0, 1.0, // km
    ], vocab_strings).unwrap();

    let position_labels: Vec<String> =
        ["p0", "p1", "p2", "p3"].iter().map(|s| s.to_string()).collect();
    #[rustfmt::skip]
    let hidden = HiddenDump::new(3, 4, dim, vec![
        // layer 0: everything looks like "the"
        0.9, 0.1, 0.1, 0.0,   0.8, 0.2, 0.1, 0.0,   0.9, 0.0, 0.2, 0.1,   0.7, 0.1, 0.0, 0.2,
        // layer 1: positions start to differentiate
        0.4, 0.6, 0.1, 0.0,   0.3, 0.8, 0.0, 0.0,   0.2, 0.1, 0.9, 0.1,   0.2, 0.0, 0.2, 0.6,
        // layer 2: confident answers
        0.0, 1.2, 0.0, 0.0,   0.0, 1.1, 0.1, 0.0,   0.0, 0.0, 1.3, 0.2,   0.0, 0.0, 0.1, 1.4,
    ], position_labels.clone()).unwrap();

    // The binary dump format round-trips, so dumps produced elsewhere load
    // the same way.
    let dir = tempfile::tempdir().unwrap();
    let dump_path = dir.path().join("hidden.bin");
    save_hidden_dump(&hidden, &dump_path).unwrap();
    let reloaded = load_hidden_dump(&dump_path).unwrap();

    let grid = logit_lens_grid(&reloaded, &unembedding).unwrap();
    print!("{:>8}", "layer");
    for label in &position_labels {
        print!("{label:>8}");
    }
    println!();
    for (layer, row) in grid.iter().enumerate() {
        print!("{layer:>8}");
        for cell in row {
            print!("{:>8}", cell.token);
        }
        println!();
    }
}
