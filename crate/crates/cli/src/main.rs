fn main() {
    if let Err(e) = mlqc_cli::configure_threads() {
        eprintln!("{e}");
        std::process::exit(e.exit_code());
    }
    let code = mlqc_cli::run(std::env::args_os(), &mut std::io::stdout().lock(), &mut std::io::stderr().lock());
    std::process::exit(code);
}
