fn main() {
    std::process::exit(bosonvalid::cli::run(std::env::args_os()));
}
