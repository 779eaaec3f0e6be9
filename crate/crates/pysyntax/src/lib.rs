//! Python source handling: tokens, syntax trees and a canonical printer.
//!
//! ```
//! let tree = pysyntax::parse_module("x=1\nif x :\n  print( x )\n").unwrap();
//! assert_eq!(pysyntax::unparse(&tree), "x = 1\nif x:\n    print(x)");
//! ```

pub mod ast;
pub mod error;
pub mod lexer;
pub mod parser;
pub mod unparse;
pub mod visit;

pub use ast::Module;
pub use error::{SyntaxError, SyntaxErrorKind};
pub use lexer::{tokenize, tokenize_lenient, Span, Token, TokenKind};
pub use parser::{parse_expression, parse_module};
pub use unparse::{unparse, unparse_expr};

/// Parses and re-prints `src` in canonical form.
pub fn canonicalize(src: &str) -> Result<String, SyntaxError> {
    parse_module(src).map(|m| unparse(&m))
}
