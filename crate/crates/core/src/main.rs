use clap::Parser;

fn main() {
    let args = khessian_lab::cli::Args::parse();
    std::process::exit(khessian_lab::cli::run(&args));
}
