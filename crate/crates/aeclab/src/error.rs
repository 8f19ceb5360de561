//! Crate-wide error type.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// The two structures are not over the same vocabulary.
    #[error("distinct signatures: {0}")]
    SignatureMismatch(String),

    /// A structure violates a well-formedness invariant (out-of-range tuple,
    /// non-total function table, constants over an empty universe, ...).
    #[error("invalid structure: {0}")]
    InvalidStructure(String),

    /// A partial map violates functionality or injectivity, or falls outside
    /// the universes it is used against.
    #[error("invalid map: {0}")]
    InvalidMap(String),

    /// An operation's stated precondition does not hold.
    #[error("precondition failed: {0}")]
    Precondition(String),

    /// The input structure is not a member of the class.
    #[error("structure {structure} is not a member of class {class}")]
    NotMember { class: String, structure: String },

    /// Two type locators were compared over different parameter sets.
    #[error("parameter sets differ: {{{left:?}}} vs {{{right:?}}}")]
    ParameterMismatch { left: Vec<usize>, right: Vec<usize> },

    /// The tuple is not inside cl(A), so a closure-local computation would be
    /// unjustified.
    #[error("tuple {tuple:?} lies outside cl(A) = {closure:?}")]
    OutOfClosure { tuple: Vec<usize>, closure: Vec<usize> },

    /// Raw enumeration space exceeds the configured budget.
    #[error("enumeration budget exceeded: {count} candidate structures > budget {budget}")]
    BudgetExceeded { count: u128, budget: u128 },

    /// A mapping family grew past the configured budget (evidence that the
    /// class is not multiuniversal).
    #[error("mapping family over {domain:?} exceeded budget {budget}")]
    FamilyBudget { domain: Vec<usize>, budget: usize },

    /// A subset handed to the gluing engine fails the closure condition
    /// B ⊆ cl(B ∩ ran(a)).
    #[error("subset {subset:?} is not in the admissible family P")]
    NotInFamily { subset: Vec<usize> },

    /// A diagram of embeddings fails to commute.
    #[error("incoherent diagram: maps {i}->{j}->{k} do not compose to {i}->{k}")]
    Incoherent { i: usize, j: usize, k: usize },

    /// The colimit quotient cannot interpret a function symbol because some
    /// argument tuple has no common home structure.
    #[error("colimit undefined: {0}")]
    ColimitUndefined(String),

    /// A tuple in the corpus realizes no catalog entry.
    #[error("incomplete type catalog: tuple {tuple:?} in structure {structure} matches no entry")]
    IncompleteCatalog { structure: String, tuple: Vec<usize> },

    /// Two oracle witnesses induce different types on a shared index set.
    #[error("oracle witnesses are incompatible on index set {indices:?}")]
    CompletenessViolation { indices: Vec<usize> },

    /// A successor step of the chain construction produced a non-strong
    /// embedding.
    #[error("amalgamation failed at chain stage {stage}")]
    AmalgamationFailure { stage: usize },

    /// The greedy separation loop ran out of parameters without separating
    /// all realizations (evidence against shortness of the class).
    #[error("type separation exhausted the parameter set {params:?}")]
    SeparationExhausted { params: Vec<usize> },

    /// A corpus document failed to parse or validate.
    #[error("{path}: document {doc}: {message}")]
    Corpus { path: String, doc: usize, message: String },

    /// The named class is not registered.
    #[error("unknown class: {0}")]
    UnknownClass(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
