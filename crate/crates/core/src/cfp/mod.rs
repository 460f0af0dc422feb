//! Learned fill-reducing ordering: a spectral embedding network and a
//! vertex encoder trained with the end-max chain loss on path triplets.

mod checkpoint;
mod loss;
mod model;
mod train;
mod triplets;

pub use checkpoint::{
    load_checkpoint, load_checkpoint_file, save_checkpoint, save_checkpoint_file, CHECKPOINT_MAGIC,
    CHECKPOINT_VERSION,
};
pub use loss::{chain_loss_on_tape, end_max_chain_loss, end_max_margin};
pub use model::{
    chain_loss, encoder_shapes, joint_chain_loss, reorder_cfp, spectral_embed, spectral_loss,
    spectral_shapes, vertex_scores, CfpModel, GraphContext, ModelConfig, ParamSet, SpectralEmbedding,
    DEFAULT_HIDDEN,
};
pub use train::{
    check_learning_rate, mean_fir, moving_average, train_cfp, train_spectral, write_training_log,
    CfpTrainConfig, EpochLog,
};
pub use triplets::{is_eligible, sample_triplets, SamplerConfig, Triplet, DEFAULT_TRIPLETS_PER_VERTEX};
