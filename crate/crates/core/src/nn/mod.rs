//! Dense numeric building blocks: LSTM/BiLSTM encoders with BPTT, a linear
//! projection, dropout, a linear-chain CRF head, and RMSprop. All arithmetic
//! is double precision.

pub mod activation;
pub mod crf;
pub mod dropout;
pub mod init;
pub mod linear;
pub mod lstm;
pub mod params;
pub mod rmsprop;

pub use activation::{hard_sigmoid, hard_sigmoid_grad, log_sum_exp};
pub use crf::{CrfLoss, CrfParams};
pub use dropout::dropout;
pub use linear::Linear;
pub use lstm::{bilstm_backward, bilstm_forward, bptt_backward, lstm_forward, BiLstmCache, LstmCache, LstmParams};
pub use params::Parameters;
pub use rmsprop::{rmsprop_step, Rmsprop, RmspropState};
