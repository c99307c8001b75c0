fn main() {
    let env = std::env::var_os(advtax_cli::DATA_DIR_ENV).map(Into::into);
    let stdout = std::io::stdout();
    let stderr = std::io::stderr();
    let code = advtax_cli::run(std::env::args_os(), env, &mut stdout.lock(), &mut stderr.lock());
    std::process::exit(code);
}
