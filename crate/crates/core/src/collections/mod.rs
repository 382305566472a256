//! Augmented ordered collections shared by the min-plus structures and the dynamic
//! mode structure.

mod count_tree;
mod handle_tree;
mod min_tree;
mod order_tree;

pub use count_tree::{CountError, CountForest, CountTree};
pub use handle_tree::{HandleTreeError, OccurrenceTree, PairTree};
pub use min_tree::{MinForest, MinKey};
pub use order_tree::{ElementHandle, OrderError, OrderTree, RangeIter};
