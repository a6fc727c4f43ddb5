use laxgeom_jet::JetError;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error(transparent)]
    Jet(#[from] JetError),
    #[error("equation `{equation}`: `{jet}` is not ranked below the principal derivative")]
    RankingViolation { equation: String, jet: String },
    #[error("equations `{0}` and `{1}` have principal derivatives of the same unknown")]
    DuplicatePrincipal(String, String),
    #[error("system is not determined: {0}")]
    NotDetermined(String),
    #[error("denominator vanishes modulo the ideal")]
    DegenerateDenominator,
    #[error("expression is not in the ideal")]
    NotInIdeal,
    #[error("cofactor needs derivative order {needed}, budget is {budget}")]
    OrderBudgetExceeded { needed: usize, budget: usize },
    #[error("no cofactor representation: {0}")]
    CofactorFailure(String),
    #[error("characteristic variety is not a quadric (squarefree part has degree {0})")]
    NotAQuadric(usize),
    #[error("quadric is degenerate modulo the ideal")]
    DegenerateQuadric,
    #[error("degenerate: {0}")]
    Degenerate(String),
    #[error("singular sample point")]
    SingularSample,
    #[error("wrong dimension: expected {expected}, found {found}")]
    WrongDimension { expected: usize, found: usize },
    #[error("no Weyl form in the ansatz")]
    NoSolution,
    #[error("Weyl form not unique ({0} free parameters)")]
    NonUnique(usize),
    #[error("congruence is not null for the metric")]
    NotNull,
    #[error("cannot reparametrize so that beta = lambda")]
    ReparametrizationFailure,
    #[error("pole at sample point")]
    PoleAtSample,
    #[error("linear system for the metric is degenerate")]
    DegenerateLinearSystem,
    #[error("recovered metric depends on the spectral parameter")]
    LambdaDependent,
}

pub type Result<T> = std::result::Result<T, Error>;
