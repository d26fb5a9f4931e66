//! Relational databases queried through learned token embeddings.
//!
//! The pipeline: [`textify`] turns tables into a token document, [`embed`]
//! learns (or imports) one vector per token, [`vecstore`] keeps the vectors
//! for lookup, [`ciops`] implements the similarity kernels, and [`ciql`]
//! parses and evaluates SQL whose predicates use them. [`cli`] binds the
//! stages into commands.

pub mod ciops;
pub mod ciql;
pub mod cli;
pub mod embed;
pub mod textify;
pub mod vecstore;
