use std::io::{self, BufWriter, Write};

fn main() {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let stdin = io::stdin();
    let stdout = io::stdout();
    let mut out = BufWriter::new(stdout.lock());
    let code = cidb::cli::run(
        std::env::args_os(),
        &mut stdin.lock(),
        &mut out,
        &mut io::stderr(),
    );
    let _ = out.flush();
    std::process::exit(code);
}
