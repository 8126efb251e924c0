//! The book chapters, included as modules so their code blocks run under
//! `cargo test --doc` and cannot drift from the library.

macro_rules! chapter {
    ($name:ident, $path:literal) => {
        #[doc = include_str!($path)]
        pub mod $name {}
    };
}

chapter!(matrices_and_observations, "../../../book/src/matrices-and-observations.md");
chapter!(proximal_operators, "../../../book/src/proximal-operators.md");
chapter!(quasi_norms, "../../../book/src/quasi-norms.md");
chapter!(matrix_completion, "../../../book/src/matrix-completion.md");
chapter!(robust_recovery, "../../../book/src/robust-recovery.md");
chapter!(data_and_metrics, "../../../book/src/data-and-metrics.md");
