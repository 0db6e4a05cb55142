use std::io::Write;

fn main() {
    let env_tol = std::env::var(pwlab_core::cli::TOL_ENV).ok();
    let out = pwlab_core::cli::dispatch(std::env::args_os(), env_tol);
    print!("{}", out.stdout);
    eprint!("{}", out.stderr);
    let _ = std::io::stdout().flush();
    std::process::exit(out.code);
}
