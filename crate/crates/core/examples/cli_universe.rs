//! Drive the command-line front end in-process with a JSON universe.

fn main() {
    let dir = env!("CARGO_MANIFEST_DIR");
    let out = ospec::cli::run([
        "ospec".to_string(),
        format!("{dir}/specs/network.ospec"),
        format!("{dir}/specs/network.json"),
        "-n".into(),
        "1".into(),
    ]);
    print!("{}", out.stdout);
    eprint!("{}", out.stderr);
    std::process::exit(out.code);
}
