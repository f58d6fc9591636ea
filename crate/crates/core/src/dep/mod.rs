pub mod model;
pub mod transition;

pub use model::{eval_dp, train_dp, DepParse, DpConfig, DpMetrics, DpModel, OpPrediction};
pub use transition::{
    labels_to_tree, run_transition_executor, tree_to_oplabels, OpLabel, Reconstruction, TraceStep, Transition,
    TransitionTrace,
};
