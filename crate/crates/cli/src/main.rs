use clap::Parser;

fn main() {
    let cli = qpattern_cli::Cli::parse();
    match qpattern_cli::run(cli).and_then(|a| qpattern_cli::emit(&a).map(|()| a)) {
        Ok(artifact) => eprintln!("{}", artifact.summary),
        Err(e) => {
            eprintln!("error: {e:#}");
            std::process::exit(1);
        }
    }
}
