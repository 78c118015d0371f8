//! Drive the command surface in-process, as a test or a host program would.
//!
//! cargo run --example cli -- limits --output csv

fn main() {
    let mut argv: Vec<String> = std::env::args().skip(1).collect();
    if argv.is_empty() {
        argv = vec!["fit".into(), "--response".into(), "shelter_2016".into(), "--degree".into(), "1,2,3".into()];
    }
    let out = commute_frontier::cli::run(std::iter::once("commute-frontier".to_string()).chain(argv));
    print!("{}", out.stdout);
    eprint!("{}", out.stderr);
    std::process::exit(out.code);
}
