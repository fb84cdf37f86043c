//! Free *-algebra over graded generators with rule-driven normal ordering.

pub mod coeff;
pub mod expr;
pub mod field;
pub mod generator;
pub mod rules;
pub mod scalar;
pub mod vev;

pub use coeff::Coeff;
pub use expr::{word_grade, Expr, OperatorExpr, Word};
pub use field::{Qi2, RealSurd};
pub use generator::{Generator, Species, Statistics};
pub use rules::{is_normal, normal_order, normal_order_random, RewriteRules, Rule};
pub use scalar::{Scalar, Var};
pub use vev::{act_on_vacuum, vev, Vacuum};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum AlgebraError {
    #[error("rewrite rules do not terminate on word `{0}`")]
    NonTerminating(String),
    #[error("normal ordering exceeded the word budget")]
    TooLarge,
    #[error("unresolved expectation for word `{0}`")]
    Unresolved(String),
    #[error("rule for pair `{0}` is not adjoint-consistent")]
    InconsistentRule(String),
    #[error("rule remainder changes the ε-grade: {0}")]
    GradingViolation(String),
}
