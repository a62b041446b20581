"""Weekly state-level RSV hospitalization risk: data pipeline, tree-ensemble
classifiers, evaluation, and a prediction service."""

__version__ = "0.1.0"
