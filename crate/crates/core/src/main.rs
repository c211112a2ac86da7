fn main() {
    codebleu::cli::main();
}
