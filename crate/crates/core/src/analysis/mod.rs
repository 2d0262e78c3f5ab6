//! Dense-algebra checks of the error recursion and the scalar symbol bounds.

mod lemma;
mod recursion;
mod reference;
mod stability;
mod symbols;

pub use lemma::{lemma_f, lemma_f_min, lemma_f_min_oracle, GridMinimum};
pub use recursion::{check_recursion, check_recursion_with, RecursionCheck, StabilityBuilder};
pub use reference::{probe_local_error, ExponentialReference, LocalErrorProbe};
pub use stability::{estimate_growth, local_error_vector, measure_stability, stability_matrix, StabilityReport};
pub use symbols::{
    first_term_value, mixed_radius, sample_symbols, second_term_value, theorem22_bound,
    theorem24_lower_bound, SymbolTriple, SYMBOL_MAGNITUDE_RANGE,
};
