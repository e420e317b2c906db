use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum NetworkError {
    #[error("network has no arcs")]
    Empty,
    #[error("arc `{arc}` references unknown vertex `{vertex}`")]
    UnknownVertex { arc: String, vertex: String },
    #[error("duplicate identifier `{0}`")]
    DuplicateId(String),
    #[error("arc `{0}` needs at least two polyline points")]
    TooFewPoints(String),
    #[error("arc `{arc}` has a point of dimension {found}, expected {expected}")]
    DimensionMismatch {
        arc: String,
        expected: usize,
        found: usize,
    },
    #[error("arc `{0}` starts and ends at the same vertex")]
    LoopArc(String),
    #[error("arc `{arc}` endpoint is {distance:.3e} away from vertex `{vertex}`")]
    EndpointMismatch {
        arc: String,
        vertex: String,
        distance: f64,
    },
    #[error("arc `{0}` has a vanishing derivative (zero-length segment)")]
    DegenerateArc(String),
    #[error("network is disconnected: vertex `{0}` is unreachable")]
    Disconnected(String),
    #[error("arcs `{first}` and `{second}` come within {distance:.3e} of each other away from their endpoints")]
    InteriorIntersection {
        first: String,
        second: String,
        distance: f64,
    },
    #[error("unknown arc `{0}`")]
    UnknownArc(String),
    #[error("parameter s = {0} lies outside [0, 1]")]
    OffArc(f64),
    #[error("velocity is not tangent to arc `{arc}` at s = {s}")]
    NotTangent { arc: String, s: f64 },
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum HamiltonianError {
    #[error("conjugate maximizer escaped every bracket at s = {s}, lambda = {lambda}; the Hamiltonian is not superlinear")]
    BracketFailure { s: f64, lambda: f64 },
    #[error("level {level} is below the minimum level {minimum} (= -c_gamma)")]
    LevelBelowMinimum { level: f64, minimum: f64 },
    #[error("flux limiter at vertex `{vertex}` exceeds its cap by {excess:.3e}")]
    LimiterTooLarge { vertex: String, excess: f64 },
    #[error("flux limiter has no value for vertex `{0}`")]
    MissingLimiter(String),
    #[error("expected {expected} Hamiltonians (one per arc), got {found}")]
    CountMismatch { expected: usize, found: usize },
    #[error("invalid Hamiltonian table: {0}")]
    InvalidTable(String),
    #[error("invalid Hamiltonian parameter: {0}")]
    InvalidParameter(String),
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ActionError {
    #[error("curve leaves the network: {0}")]
    OffNetwork(String),
    #[error("curve is not continuous at t = {0}")]
    Discontinuous(f64),
    #[error("({point}, q) is not in the tangent bundle")]
    NotInTangentBundle { point: String },
    #[error("precondition violated: {0}")]
    PreconditionViolated(String),
    #[error(transparent)]
    Hamiltonian(#[from] HamiltonianError),
    #[error(transparent)]
    Network(#[from] NetworkError),
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SolverError {
    #[error("invalid grid: {0}")]
    BadGrid(String),
    #[error("horizon must satisfy r > t (got t = {t}, r = {r})")]
    BadHorizon { t: f64, r: f64 },
    #[error("initial datum disagrees at vertex `{vertex}` by {gap:.3e}")]
    InconsistentDatum { vertex: String, gap: f64 },
    #[error("instance too large for the brute-force oracle: {0}")]
    InstanceTooLarge(String),
    #[error("operation needs the {0} scheme")]
    UnsupportedScheme(&'static str),
    #[error("target is unreachable within the horizon")]
    Unreachable,
    #[error(transparent)]
    Hamiltonian(#[from] HamiltonianError),
    #[error(transparent)]
    Action(#[from] ActionError),
    #[error(transparent)]
    Network(#[from] NetworkError),
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum VerifyError {
    #[error("value grids are not comparable: {0}")]
    GridMismatch(String),
}
