use clap::Parser;
use fiscast_cli::{execute, Cli};

fn main() {
    let cli = Cli::parse();
    let (command, args) = cli.command.split();
    match execute(command, &args.config, &args.overrides()) {
        Ok((_, written)) => {
            for path in written {
                println!("wrote {}", path.display());
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            std::process::exit(e.exit_code());
        }
    }
}
