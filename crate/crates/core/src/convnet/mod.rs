//! A small convolutional network written from scratch: forward pass,
//! backpropagation, momentum SGD, text weight files and freeze-prefix
//! fine-tuning for transfer learning.

mod gradcheck;
mod io;
mod layer;
mod net;
mod train;

pub use gradcheck::numeric_gradient_check;
pub use io::{load_weights, save_weights, weights_from_text, weights_to_text, WEIGHT_MAGIC};
pub use layer::{softmax, softmax_cross_entropy, Conv2d, Dense, Layer, MaxPool, Shape};
pub use net::{build_custom_cnn, ConvNet, Gradients, LayerSpec, CONV_BLOCKS, CUSTOM_CNN};
pub use train::{accuracy_on, backward_and_step, train, train_on, transfer_finetune, Sgd, TrainConfig};
