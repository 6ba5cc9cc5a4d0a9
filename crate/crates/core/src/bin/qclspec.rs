use env_logger::Env;

fn main() {
    env_logger::Builder::from_env(Env::new().filter_or("QCLSPEC_LOG", "warn")).init();
    std::process::exit(qclspec::cli::main_with_args(std::env::args_os()));
}
