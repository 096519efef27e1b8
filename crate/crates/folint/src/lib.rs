//! Relational many-sorted first-order theories, multi-dimensional relativized
//! translations between them, interpretation proof obligations (with TPTP FOF
//! export), finite-model evaluation including internal models, a constructive
//! Schröder–Bernstein bijection over class structures, and synonymy-producing
//! interpretation rewrites — together with a small built-in corpus of theories
//! (set-like and class-like) and the translations connecting them.
//!
//! The library is organized to mirror the pipeline:
//!
//! * [`syntax`] — signatures, formulas, proto-formulas, theories, parsing and
//!   printing of the ASCII grammar (with `def` macros and functional-notation
//!   expansion).
//! * [`translation`] — m-dimensional relativized translations: application to
//!   formulas, composition, identity, and syntactic classification
//!   (identity-preserving / unrelativized / direct).
//! * [`interp`] — interpretations and their proof obligations: axiom
//!   translations, domain inhabitation, equality schemes, equality of
//!   interpretations, definable-map and definable-isomorphism conditions, and
//!   TPTP FOF export.
//! * [`model`] — finite structures, Tarskian evaluation (plus an opt-in
//!   acceleration registry for heavy derived predicates), internal models,
//!   tagged hereditarily-finite countermodel universes and their involutions.
//! * [`sb`] — Schröder–Bernstein class structures, switches, the bijection
//!   `H`, a fast-path equivalent, and the formula-level `H` builder.
//! * [`synonymy`] — `make_direct`, `sb_directify`, and sequentiality
//!   transport.
//! * [`corpus`] — built-in theories/translations, the composite-translation
//!   verification suite, and the countermodel demo.

pub mod cli;
pub mod corpus;
pub mod interp;
pub mod model;
pub mod report;
pub mod sb;
pub mod synonymy;
pub mod syntax;
pub mod translation;

use thiserror::Error;

/// Library-wide error type.
#[derive(Debug, Error)]
pub enum Error {
    /// Lexical or grammatical failure while reading one of the text formats.
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },
    /// Structurally valid input that violates a well-formedness rule
    /// (unknown sort/predicate, arity or sort clash, unbound variable, ...).
    #[error("ill-formed input: {0}")]
    IllFormed(String),
    /// An operation's precondition does not hold.
    #[error("precondition violated: {0}")]
    Precondition(String),
    /// A resource guard tripped (carrier or search space too large).
    #[error("resource guard: {0}")]
    Resource(String),
    /// Name lookup failure in a library of theories/translations.
    #[error("unknown name: {0}")]
    Unknown(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Convenience alias used across the crate.
pub type Result<T> = std::result::Result<T, Error>;
