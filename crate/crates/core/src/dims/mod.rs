//! Community embeddings and the social dimensions projected from them.

mod dimension;
mod embedding;
mod sgns;

pub use dimension::{
    bin_facet, bin_for_percentile, bin_labels, build_dimension, read_scores_csv, score_communities,
    write_scores_csv, CommunityScore, Dimension, DimensionSpec,
};
pub use embedding::{cosine, dot, normalize, EmbeddingMatrix};
pub use sgns::{read_cooccurrence_csv, train_embedding, Cooccurrence, SgnsParams, TrainOutcome};
