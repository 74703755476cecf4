fn main() {
    std::process::exit(queuechan::cli::run(std::env::args_os()));
}
