//! Reference functions, embedded rectangles and matrix rigidity.

mod functions;
mod rect;
mod rigidity;

pub use functions::{
    bool_matmul, element_distinct, hamming_close, hamming_threshold, rank, sort, unique,
};
pub use rect::{max_alpha_search, max_alpha_search_guarded, rect_alpha, EmbeddedRectangle, Ratio, RectGuard};
pub use rigidity::{is_rigid, is_rigid_guarded, Matrix};
