//! Design zero-sum games with a prescribed unique row minimax strategy,
//! certify them with exact linear programming, and simulate guided play.

pub mod arena;
pub mod designer;
pub mod game;
pub mod instances;
pub mod learners;
pub mod lp;
pub mod lrca;
pub mod numeric;
pub mod verifier;
