pub mod align;
pub mod classify;
pub mod corpus;
pub mod lda;
pub mod pipeline;
pub mod synop;
pub mod text;
