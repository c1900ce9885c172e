"""From-scratch model kernels used by query policies and iteration models."""

from .bayes import NaiveBayesModel
from .boosting import BoostedTreesModel
from .forest import RandomForest, SingleClassError
from .isolation import IsolationForest, average_path_length
from .linear import LogisticModel, loss_and_gradient, sigmoid
from .trees import Tree, grow_classification_tree, grow_regression_tree

__all__ = [
    "BoostedTreesModel",
    "IsolationForest",
    "LogisticModel",
    "NaiveBayesModel",
    "RandomForest",
    "SingleClassError",
    "Tree",
    "average_path_length",
    "grow_classification_tree",
    "grow_regression_tree",
    "loss_and_gradient",
    "sigmoid",
]
