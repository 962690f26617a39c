"""D-vine copula based structural equation models on a known DAG."""

__version__ = "0.1.0"

from ._util import (
    CycleError,
    DegenerateDataError,
    DomainError,
    InsufficientDataError,
    NumericError,
    UnsupportedError,
    UsageError,
    VinesemError,
)
from .copula import (
    PairCopula,
    copula_cdf,
    copula_pdf,
    fit_pair_mle,
    hfunc,
    hinv,
    kendall_tau,
    param_from_tau,
    select_pair_family,
)
from .dvine import DVineRegModel, fit_dvine_reg
from .graph import DagSpec, load_dag, read_dag, topo_sort
from .lgbn import LgbnModel, fit_lgbn
from .margins import MarginModel, fit_margin, margin_gof
from .npcop import NpCopula, fit_np_pair
from .sem import SemConfig, SemModel, fit_sem, gof_table, joint_logdensity, pruned_edges
from .simulate import cond_median_path, sample_lgbn, sample_node_given_parents, sample_sem

__all__ = [
    "CycleError", "DegenerateDataError", "DomainError", "InsufficientDataError", "NumericError",
    "UnsupportedError", "UsageError", "VinesemError",
    "PairCopula", "copula_cdf", "copula_pdf", "fit_pair_mle", "hfunc", "hinv", "kendall_tau",
    "param_from_tau", "select_pair_family",
    "DVineRegModel", "fit_dvine_reg",
    "DagSpec", "load_dag", "read_dag", "topo_sort",
    "LgbnModel", "fit_lgbn",
    "MarginModel", "fit_margin", "margin_gof",
    "NpCopula", "fit_np_pair",
    "SemConfig", "SemModel", "fit_sem", "gof_table", "joint_logdensity", "pruned_edges",
    "cond_median_path", "sample_lgbn", "sample_node_given_parents", "sample_sem",
]
