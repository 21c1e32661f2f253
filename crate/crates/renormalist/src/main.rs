use std::io::Write;

fn main() {
    let (stdout, stderr, code) = renormalist::cli::main_with_args(std::env::args_os());
    let _ = std::io::stdout().write_all(stdout.as_bytes());
    if !stderr.is_empty() {
        let _ = writeln!(std::io::stderr(), "{stderr}");
    }
    std::process::exit(code);
}
