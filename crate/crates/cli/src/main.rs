fn main() {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("KO_LOG", "warn"))
        .format_timestamp(None)
        .init();
    std::process::exit(ko_cli::main_with_args(std::env::args_os()));
}
