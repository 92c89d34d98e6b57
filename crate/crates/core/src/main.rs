fn main() {
    std::process::exit(spiked_hyp::cli::main_with_args(std::env::args_os()));
}
