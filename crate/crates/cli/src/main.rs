fn main() {
    let mut stdout = std::io::stdout().lock();
    let mut stderr = std::io::stderr().lock();
    let code = wpspine_cli::dispatch(std::env::args_os(), &mut wpspine_cli::Io { stdout: &mut stdout, stderr: &mut stderr });
    std::process::exit(code);
}
