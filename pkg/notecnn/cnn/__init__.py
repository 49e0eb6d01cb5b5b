from .checkpoint import load_checkpoint, save_checkpoint
from .layers import conv_forward, dropout_mask, log_softmax, max_pool, relu, softmax
from .model import CnnModel, ForwardTrace, forward, init_model, loss_and_gradients, predict, predict_scores
from .optim import Adam
from .train import TrainingLogEntry, TrainingResult, cross_validate, train, validation_report
