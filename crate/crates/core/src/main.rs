use std::collections::BTreeMap;

fn main() {
    let args: Vec<String> = std::env::args().collect();
    let env: BTreeMap<String, String> = std::env::vars().filter(|(k, _)| k.starts_with("KNOTQM_")).collect();
    std::process::exit(knotqm::cli::run(&args, &env));
}
