//! Resolve and echo a run configuration the way the command line does.

use molhier::config::RunConfig;

fn main() {
    let mut cfg = RunConfig::default();
    cfg.apply_text("# tokenizer run\nseed = 42\nsteps = 500\nmode = node\n", "inline").unwrap();
    cfg.apply_override("k_neg=6").unwrap();
    if let Err(e) = cfg.apply_override("learning_rate=0.1") {
        println!("rejected: {e}");
    }
    print!("{}", cfg.render());
}
