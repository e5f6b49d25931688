use clap::Parser;
use entrolab_cli::{exit_code, run, Cli, EXIT_USAGE};

fn main() {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            std::process::exit(if e.use_stderr() { EXIT_USAGE } else { 0 });
        }
    };
    let result = run(&cli);
    if let Err(e) = &result {
        eprintln!("entrolab: {e}");
    }
    std::process::exit(exit_code(&result));
}
