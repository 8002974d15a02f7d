//! Doc-tests for the guide chapters. Each chapter in `book/src` is attached
//! to a module here, so `cargo test` compiles and runs its snippets.

macro_rules! chapter {
    ($name:ident, $file:literal) => {
        #[doc = include_str!(concat!("../../../book/src/", $file))]
        pub mod $name {}
    };
}

chapter!(introduction, "introduction.md");
chapter!(structures, "structures.md");
chapter!(formulas, "formulas.md");
chapter!(neighborhoods, "neighborhoods.md");
chapter!(frequency, "frequency.md");
chapter!(orders, "orders.md");
chapter!(games, "games.md");
chapter!(pipeline, "pipeline.md");
chapter!(cli, "cli.md");

#[doc = include_str!("../../../README.md")]
pub mod readme {}
