pub mod bdd;
pub mod engine;
pub mod formula;
pub mod interval;
pub mod invariants;
pub mod oracle;
pub mod parser;
pub mod transconf;

pub use formula::{Formula, FormulaClass};
pub use interval::{FiniteInterval, LassoInterval, VAtom, VariableContext};
pub use parser::{parse, print, SyntaxError};
