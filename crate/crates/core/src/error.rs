use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("not a generalized Cartan matrix: {0}")]
    NotGcm(String),
    #[error("matrix is not symmetrizable")]
    NotSymmetrizable,
    #[error("matrix is decomposable")]
    Decomposable,
    #[error("wrong Cartan type: {0}")]
    WrongType(String),
    #[error("z-degree {degree} leaves the window [-{window}, {window}]")]
    WindowOverflow { degree: i64, window: i64 },
    #[error("ad is not nilpotent: {0}")]
    NonNilpotent(String),
    #[error("no period up to {0}")]
    PeriodExceeded(u32),
    #[error("{0} is not a period of the automorphism")]
    NotPeriod(u32),
    #[error("{d} does not divide {m}")]
    NotDivisor { d: u32, m: u32 },
    #[error("map does not normalize the centroid: {0}")]
    NotSemilinear(String),
    #[error("no root available: {0}")]
    NoRootAvailable(String),
    #[error("action does not preserve the degree window; enlarge it")]
    WindowNotStable,
    #[error("matrix has no finite order up to {0}")]
    NotFiniteOrder(u32),
    #[error("automorphisms do not commute: {0}")]
    NotCommuting(String),
    #[error("word is not compatible with the root grading: {0}")]
    NotGradingCompatible(String),
    #[error("witness withheld: {0}")]
    SecondKindUnsupported(String),
    #[error("word is not in the normal form required for witness assembly: {0}")]
    NotNormalForm(String),
    #[error("division by zero")]
    DivisionByZero,
    #[error("{path}: {msg}")]
    Schema { path: String, msg: String },
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("verification failed: {0}")]
    Verification(String),
}

impl Error {
    pub fn schema(path: impl Into<String>, msg: impl Into<String>) -> Self {
        Error::Schema { path: path.into(), msg: msg.into() }
    }
}
