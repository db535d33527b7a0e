#![no_main]
use clap::Parser;
use gibbs_fisher_cli::Cli;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|text: &str| {
    let args = std::iter::once("gibbs-fisher").chain(text.split_whitespace());
    let _ = Cli::try_parse_from(args);
});
