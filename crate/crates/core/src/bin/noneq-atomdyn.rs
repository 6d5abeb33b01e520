fn main() {
    std::process::exit(noneq_atomdyn::sweep::cli::main_with_args(std::env::args_os()));
}
