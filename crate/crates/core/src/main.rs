fn main() {
    std::process::exit(mclnn::cli::run(std::env::args_os()));
}
