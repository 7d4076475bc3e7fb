use core::fmt;

/// Non-fatal diagnostics attached to fitted outputs.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(tag = "kind", rename_all = "snake_case"))]
pub enum Warning {
    /// A group with one member centers to a zero row and carries no information.
    SingletonGroup { group: usize },
    /// The pooled Gram matrix of the centered protected attributes is rank deficient.
    RankDeficient { rank: usize, k: usize },
    /// The k-th and (k+1)-th singular values coincide; the subspace is not unique.
    SingularValueTie { k: usize },
    /// A group requested by the caller had no members and was dropped.
    EmptyGroup { group: usize },
}

impl fmt::Display for Warning {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Warning::SingletonGroup { group } => {
                write!(
                    f,
                    "group {group} is a singleton and contributes nothing after centering"
                )
            }
            Warning::RankDeficient { rank, k } => write!(
                f,
                "pooled Gram matrix has rank {rank} < {k}; using the minimum-norm solution"
            ),
            Warning::SingularValueTie { k } => write!(
                f,
                "singular values {k} and {} are tied; the estimated subspace is not unique",
                k + 1
            ),
            Warning::EmptyGroup { group } => write!(f, "group {group} is empty and was dropped"),
        }
    }
}
