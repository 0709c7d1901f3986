use std::io::Write;

fn main() {
    let budget = std::env::var("CANTOR_BUDGET").ok();
    let out = cantor::cli::run(std::env::args_os(), budget.as_deref());
    print!("{}", out.stdout);
    let _ = std::io::stdout().flush();
    eprint!("{}", out.stderr);
    std::process::exit(out.code);
}
