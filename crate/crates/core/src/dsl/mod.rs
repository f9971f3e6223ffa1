//! The textual protocol format.
//!
//! ```text
//! % a memory cell
//! machine #0 {
//!     initial s0;
//!     final s0;
//!     s0 -- ?{get, P} -> s1;
//!     s0 -- ?{put, S} -> s0;
//!     s1 -- P!S -> s0;
//! }
//! ```
//!
//! A file holds one or more machines. Each declares its initial state, an
//! optional list of final states, and transitions `from -- label -> to;`
//! where the label is `?pattern` or `Target!term`. Receive transitions
//! leaving the same state are tried in the order they appear. Process
//! identifiers are written `#n`, atoms start lowercase, variables uppercase,
//! and `%` starts a comment.

mod erlang;
mod lexer;
mod parser;
mod printer;

pub use erlang::{emit_erlang, module_name, EmitError};
pub use lexer::Span;
pub use parser::{parse_protocol, Diagnostic, ParseError, ProtocolDoc, SpanMap};
pub use printer::print_protocol;
