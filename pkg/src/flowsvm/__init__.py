"""Gas-liquid two-phase flow-pattern classification with an RBF-kernel SVM."""
from .dataset import (
    TEST1, TEST2, TEST3, Dataset, FlowPattern, FlowSample, LabelScheme, StandardScaler,
    apply_scaler, fit_scaler, load_csv, relabel, save_csv, stratified_split,
)
from .kernel import KernelParams, gram, rbf
from .metrics import ClassReport, ConfusionMatrix, accuracy, confusion, report
from .model_selection import GridResult, GridSpec, cross_validate, grid_search
from .multiclass import OvoModel, predict, predict_batch, train_ovo
from .smo import BinarySvmModel, TrainConfig, decision_value, train_binary
from .synthetic import synth_generate

__version__ = "0.1.0"
