fn main() -> anyhow::Result<()> {
    dlotrack::cli::run()
}
