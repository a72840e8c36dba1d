"""Single-tweet credibility scorer (CNN + LSTM trained from scratch)."""
from .network import (
    NEWS,
    RUMOR,
    CredibilityModel,
    CredibilityNumericError,
    CredibilityPrediction,
    Hyper,
    backward,
    forward,
    init_params,
    nll,
    predict_proba,
)
from .serialize import load_model, model_from_json, model_to_json, save_model
from .training import (
    SingleClassError,
    gradient_check,
    label_index,
    loss,
    predict,
    score_texts,
    train_credibility,
    training_accuracy,
)
from .vocab import PAD_ID, UNK_ID, Vocabulary, build_vocabulary, encode_batch, tokenize_and_pad

__all__ = [
    "NEWS", "PAD_ID", "RUMOR", "UNK_ID", "CredibilityModel", "CredibilityNumericError",
    "CredibilityPrediction", "Hyper", "SingleClassError", "Vocabulary", "backward",
    "build_vocabulary", "encode_batch", "forward", "gradient_check", "init_params", "label_index",
    "load_model", "loss", "model_from_json", "model_to_json", "nll", "predict", "predict_proba",
    "save_model", "score_texts", "tokenize_and_pad", "train_credibility", "training_accuracy",
]
