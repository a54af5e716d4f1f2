//! Small differentiable core: dense layers with explicit reverse passes,
//! Adam, Polyak tracking, the squashed Gaussian policy head and a
//! parameter archive. All math is `f64`.

pub mod adam;
pub mod checkpoint;
pub mod gradcheck;
pub mod layers;
pub mod policy;
pub mod tensor;

pub use adam::{polyak_update, Adam, AdamConfig};
pub use checkpoint::{Checkpoint, CheckpointEntry};
pub use layers::{leaky, leaky_grad, softmax_in_place, Activation, Linear, Mlp, MlpCache, MlpSpec, LEAKY_SLOPE};
pub use policy::{gaussian_policy_sample, standard_normal, PolicySample, SquashedGaussian, LOG_STD_MAX, LOG_STD_MIN};
pub use tensor::{fingerprint, param_distance_sq, Module, ParamTensor};
