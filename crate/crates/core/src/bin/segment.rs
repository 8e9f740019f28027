fn main() {
    std::process::exit(quadphase::pipeline::run_segment(std::env::args_os()));
}
