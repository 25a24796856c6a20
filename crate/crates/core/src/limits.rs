/// Caps on the exhaustive parts of the library.
///
/// Every brute-force path consults one of these before it starts, so a
/// request that would not finish interactively fails fast instead.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Limits {
    /// Maximum number of weighted assignments `n^m` an urn enumeration may visit.
    pub assignments: u128,
    /// Maximum number of up-sets enumerated on one side of an event search.
    pub upsets: u64,
    /// Maximum number of edges for exhaustive orientation enumeration (`2^edges`).
    pub orientation_edges: usize,
    /// Maximum `|V_1|` for the exhaustive independent-set LYM check.
    pub independent_side: usize,
    /// Maximum poset size for the exhaustive antichain check of the Griggs poset.
    pub antichain_elements: usize,
    /// Maximum ground-set size for exhaustive up-set cross-checks on `2^[m]`.
    pub exhaustive_ground: usize,
}

impl Default for Limits {
    fn default() -> Self {
        Limits {
            assignments: 10_000_000,
            upsets: 1_000_000,
            orientation_edges: 24,
            independent_side: 20,
            antichain_elements: 12,
            exhaustive_ground: 5,
        }
    }
}
